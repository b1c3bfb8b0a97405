//! Quantum-information domain objects.
//!
//! States, POVMs, ensembles, Kraus channels, and the standard constructions
//! the game machinery needs: maximally entangled states, the Werner family,
//! Heisenberg-Weyl unitaries, the PPT entanglement test, and seeded samplers.

mod random;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matcore::{self, eigh, kron, partial_transpose, CMatrix, DimVector, C64};

pub use random::{
    ginibre, random_kraus_channel, random_losr, random_npt_two_qubit, random_povm,
    random_product_state, random_pure_ket, random_state, rng_from_seed,
};

/// Positive semi-definite, trace-one operator with subsystem bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub dims: DimVector,
    pub mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix, dims: DimVector, tols: &Tolerances) -> Result<Self> {
        let dm = DensityMatrix { dims, mat };
        dm.validate(tols)?;
        Ok(dm)
    }

    /// Like [`DensityMatrix::new`] but without validation; for internal
    /// constructions that are valid by algebra.
    pub(crate) fn new_unchecked(mat: CMatrix, dims: DimVector) -> Self {
        DensityMatrix { dims, mat }
    }

    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        self.dims.check_side(self.mat.rows())?;
        if !self.mat.is_hermitian(tols.tol_herm) {
            return Err(Error::Contract(format!(
                "density matrix is not Hermitian (defect {:.3e})",
                self.mat.herm_defect()
            )));
        }
        let min = matcore::min_eigenvalue(&self.mat, tols.tol_herm)?;
        if min < -tols.tol_psd {
            return Err(Error::Contract(format!(
                "density matrix is not PSD (min eigenvalue {min:.3e})"
            )));
        }
        let tr = self.mat.trace();
        if (tr.re - 1.0).abs() > tols.tol_eq || tr.im.abs() > tols.tol_eq {
            return Err(Error::Contract(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        Ok(())
    }

    pub fn side(&self) -> usize {
        self.mat.rows()
    }
}

/// Labeled family of positive operators summing to identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    pub labels: Vec<String>,
    pub elements: Vec<CMatrix>,
    pub dims: DimVector,
}

impl Povm {
    pub fn new(
        labels: Vec<String>,
        elements: Vec<CMatrix>,
        dims: DimVector,
        tols: &Tolerances,
    ) -> Result<Self> {
        let p = Povm {
            labels,
            elements,
            dims,
        };
        p.validate(tols)?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(labels: Vec<String>, elements: Vec<CMatrix>, dims: DimVector) -> Self {
        Povm {
            labels,
            elements,
            dims,
        }
    }

    /// Default labels "0", "1", ... for `n` outcomes.
    pub fn index_labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        if self.labels.len() != self.elements.len() || self.elements.is_empty() {
            return Err(Error::Argument(
                "POVM needs one label per element and at least one element".into(),
            ));
        }
        let side = self.elements[0].rows();
        self.dims.check_side(side)?;
        let mut sum = CMatrix::zeros(side, side);
        for el in &self.elements {
            if el.rows() != side || el.cols() != side {
                return Err(Error::Argument("POVM elements differ in shape".into()));
            }
            if !matcore::is_psd(el, tols.tol_psd)? {
                return Err(Error::Contract("POVM element is not PSD".into()));
            }
            sum = sum.add(el)?;
        }
        if sum.max_abs_diff(&CMatrix::identity(side)) > tols.tol_eq {
            return Err(Error::Contract(format!(
                "POVM elements sum to identity only within {:.3e}",
                sum.max_abs_diff(&CMatrix::identity(side))
            )));
        }
        Ok(())
    }

    pub fn n_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn side(&self) -> usize {
        self.elements[0].rows()
    }
}

/// Random source of states: labels, probabilities, and normalized states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(
        labels: Vec<String>,
        probs: Vec<f64>,
        states: Vec<DensityMatrix>,
        tols: &Tolerances,
    ) -> Result<Self> {
        let e = Ensemble {
            labels,
            probs,
            states,
        };
        e.validate(tols)?;
        Ok(e)
    }

    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        if self.labels.len() != self.probs.len() || self.labels.len() != self.states.len() {
            return Err(Error::Argument("ensemble field lengths differ".into()));
        }
        if self.states.is_empty() {
            return Err(Error::Argument("ensemble must not be empty".into()));
        }
        check_distribution(&self.probs, tols.tol_eq)?;
        let dims = &self.states[0].dims;
        for st in &self.states {
            if &st.dims != dims {
                return Err(Error::Argument("ensemble states differ in dims".into()));
            }
            st.validate(tols)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dims(&self) -> &DimVector {
        &self.states[0].dims
    }

    pub fn side(&self) -> usize {
        self.states[0].side()
    }

    /// Sub-normalized view p(s)·τ^s.
    pub fn subnormalized(&self, s: usize) -> CMatrix {
        self.states[s].mat.scale_re(self.probs[s])
    }
}

/// CPTP map in Kraus form. Rectangular Kraus operators change dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KrausChannel {
    pub kraus_ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(kraus_ops: Vec<CMatrix>, tols: &Tolerances) -> Result<Self> {
        let ch = KrausChannel { kraus_ops };
        ch.validate(tols)?;
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            kraus_ops: vec![CMatrix::identity(dim)],
        }
    }

    /// Trace-and-replace with `gamma`: discards any input of dimension
    /// `input_dim` and outputs `gamma`.
    pub fn discard_and_prepare(gamma: &CMatrix, input_dim: usize, tols: &Tolerances) -> Result<Self> {
        let (vals, vecs) = eigh(gamma, tols.tol_herm)?;
        let d_out = gamma.rows();
        let mut ops = Vec::new();
        for (k, &l) in vals.iter().enumerate() {
            if l <= tols.tol_psd {
                continue;
            }
            let sl = l.sqrt();
            for j in 0..input_dim {
                // sqrt(λ_k) |v_k><j|
                let mut op = CMatrix::zeros(d_out, input_dim);
                for o in 0..d_out {
                    op.set(o, j, vecs.at(o, k) * sl);
                }
                ops.push(op);
            }
        }
        KrausChannel::new(ops, tols)
    }

    pub fn input_dim(&self) -> usize {
        self.kraus_ops[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus_ops[0].rows()
    }

    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        if self.kraus_ops.is_empty() {
            return Err(Error::Argument("channel needs at least one Kraus op".into()));
        }
        let (d_out, d_in) = (self.kraus_ops[0].rows(), self.kraus_ops[0].cols());
        let mut sum = CMatrix::zeros(d_in, d_in);
        for k in &self.kraus_ops {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::Argument("Kraus ops differ in shape".into()));
            }
            sum = sum.add(&k.dagger().matmul(k)?)?;
        }
        if sum.max_abs_diff(&CMatrix::identity(d_in)) > tols.tol_eq {
            return Err(Error::Contract(format!(
                "channel is not trace preserving (Σ K†K deviates by {:.3e})",
                sum.max_abs_diff(&CMatrix::identity(d_in))
            )));
        }
        Ok(())
    }

    /// Raw action on an operator (not necessarily a state).
    pub fn apply_mat(&self, m: &CMatrix) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.output_dim(), self.output_dim());
        for k in &self.kraus_ops {
            out = out.add(&k.matmul(m)?.matmul(&k.dagger())?)?;
        }
        Ok(out)
    }
}

/// One shared-randomness branch of an LOSR map: a channel pair (A-side, B-side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosrPair {
    pub a_kraus: KrausChannel,
    pub b_kraus: KrausChannel,
}

/// Probability-weighted pairs of local channels Σᵢ ν(i) Eⁱ⊗Fⁱ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosrMap {
    pub weights: Vec<f64>,
    pub pairs: Vec<LosrPair>,
}

impl LosrMap {
    pub fn new(weights: Vec<f64>, pairs: Vec<LosrPair>, tols: &Tolerances) -> Result<Self> {
        let m = LosrMap { weights, pairs };
        m.validate(tols)?;
        Ok(m)
    }

    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        if self.weights.len() != self.pairs.len() || self.pairs.is_empty() {
            return Err(Error::Argument(
                "LOSR map needs one weight per channel pair".into(),
            ));
        }
        check_distribution(&self.weights, tols.tol_eq)?;
        let a_in = self.pairs[0].a_kraus.input_dim();
        let a_out = self.pairs[0].a_kraus.output_dim();
        let b_in = self.pairs[0].b_kraus.input_dim();
        let b_out = self.pairs[0].b_kraus.output_dim();
        for pair in &self.pairs {
            pair.a_kraus.validate(tols)?;
            pair.b_kraus.validate(tols)?;
            if pair.a_kraus.input_dim() != a_in
                || pair.a_kraus.output_dim() != a_out
                || pair.b_kraus.input_dim() != b_in
                || pair.b_kraus.output_dim() != b_out
            {
                return Err(Error::Argument("LOSR pairs differ in dims".into()));
            }
        }
        Ok(())
    }

    pub fn input_dims(&self) -> DimVector {
        DimVector(vec![
            self.pairs[0].a_kraus.input_dim(),
            self.pairs[0].b_kraus.input_dim(),
        ])
    }

    pub fn output_dims(&self) -> DimVector {
        DimVector(vec![
            self.pairs[0].a_kraus.output_dim(),
            self.pairs[0].b_kraus.output_dim(),
        ])
    }
}

/// Convex combination of product POVM pairs: Σᵢ ν(i) P̄(i) ⊗ Q̄(i).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableJointPovm {
    pub weights: Vec<f64>,
    pub pairs: Vec<(Povm, Povm)>,
}

impl SeparableJointPovm {
    pub fn new(weights: Vec<f64>, pairs: Vec<(Povm, Povm)>, tols: &Tolerances) -> Result<Self> {
        let z = SeparableJointPovm { weights, pairs };
        z.validate(tols)?;
        Ok(z)
    }

    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        if self.weights.len() != self.pairs.len() || self.pairs.is_empty() {
            return Err(Error::Argument(
                "separable joint POVM needs one weight per pair".into(),
            ));
        }
        check_distribution(&self.weights, tols.tol_eq)?;
        let (p0, q0) = &self.pairs[0];
        for (p, q) in &self.pairs {
            p.validate(tols)?;
            q.validate(tols)?;
            if p.labels != p0.labels || q.labels != q0.labels || p.dims != p0.dims || q.dims != q0.dims
            {
                return Err(Error::Argument(
                    "separable joint POVM pairs differ in labels or dims".into(),
                ));
            }
        }
        Ok(())
    }

    /// Joint element Z^{x,y} = Σᵢ ν(i) P̄ˣ(i) ⊗ Q̄ʸ(i).
    pub fn joint_element(&self, x: usize, y: usize) -> Result<CMatrix> {
        let side = self.pairs[0].0.side() * self.pairs[0].1.side();
        let mut out = CMatrix::zeros(side, side);
        for (w, (p, q)) in self.weights.iter().zip(&self.pairs) {
            out = out.add(&kron(&p.elements[x], &q.elements[y])?.scale_re(*w))?;
        }
        Ok(out)
    }
}

pub(crate) fn check_distribution(probs: &[f64], tol: f64) -> Result<()> {
    if probs.iter().any(|&p| !p.is_finite() || p < -tol) {
        return Err(Error::Argument(format!(
            "negative or non-finite probability in {probs:?}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::Argument(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// standard constructions
// ---------------------------------------------------------------------------

/// Maximally entangled state (1/√d) Σ |ii> on d⊗d.
pub fn max_entangled(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::Argument(format!("max_entangled needs d >= 2, got {d}")));
    }
    let mut ket = CMatrix::zeros(d * d, 1);
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        ket.set(i * d + i, 0, amp);
    }
    let proj = CMatrix::projector_from_ket(&ket)?;
    Ok(DensityMatrix::new_unchecked(proj, DimVector(vec![d, d])))
}

/// Ket of the singlet (|01> - |10>)/√2.
pub fn singlet_ket() -> CMatrix {
    let mut ket = CMatrix::zeros(4, 1);
    ket.set(1, 0, C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    ket.set(2, 0, C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0));
    ket
}

/// Werner state p·|Ψ⁻><Ψ⁻| + (1-p)·I₄/4 on two qubits.
pub fn werner_state(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("werner_state needs p in [0,1], got {p}")));
    }
    let proj = CMatrix::projector_from_ket(&singlet_ket())?;
    let mat = proj
        .scale_re(p)
        .add(&CMatrix::identity(4).scale_re((1.0 - p) / 4.0))?;
    Ok(DensityMatrix::new_unchecked(mat, DimVector(vec![2, 2])))
}

/// Output of the PPT test on a bipartite state.
#[derive(Debug, Clone, Serialize)]
pub struct PptReport {
    /// True iff the partial transpose has a negative eigenvalue.
    pub flag: bool,
    pub min_pt_eigenvalue: f64,
    /// Eigenvector of the partial transpose at the minimal eigenvalue
    /// (column vector).
    pub witness_vector: CMatrix,
}

/// Negative-partial-transpose entanglement test. Transposes the SECOND
/// subsystem; exact for 2⊗2 and 2⊗3 systems.
pub fn ppt_entangled(rho: &DensityMatrix, tols: &Tolerances) -> Result<PptReport> {
    if rho.dims.len() != 2 {
        return Err(Error::Argument(format!(
            "ppt_entangled needs exactly 2 subsystems, got {}",
            rho.dims.len()
        )));
    }
    let pt = partial_transpose(&rho.mat, &rho.dims, 1)?;
    let (vals, vecs) = eigh(&pt, tols.tol_herm)?;
    let n = vals.len();
    let min = vals[n - 1];
    let mut witness = CMatrix::zeros(n, 1);
    for i in 0..n {
        witness.set(i, 0, vecs.at(i, n - 1));
    }
    Ok(PptReport {
        flag: min < -tols.tol_psd,
        min_pt_eigenvalue: min,
        witness_vector: witness,
    })
}

/// Apply a Kraus channel to a state: Σ K ρ K†.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if ch.input_dim() != rho.side() {
        return Err(Error::Argument(format!(
            "channel input dim {} does not match state side {}",
            ch.input_dim(),
            rho.side()
        )));
    }
    let out = ch.apply_mat(&rho.mat)?;
    let dims = if ch.output_dim() == rho.side() {
        rho.dims.clone()
    } else {
        DimVector(vec![ch.output_dim()])
    };
    Ok(DensityMatrix::new_unchecked(out, dims))
}

/// Generalized Pauli (Heisenberg-Weyl) unitaries {X^a Z^b}, ordered by
/// index a·d + b. For d = 2 this is [I, Z, X, XZ].
pub fn heisenberg_weyl(d: usize) -> Result<Vec<CMatrix>> {
    if d < 2 {
        return Err(Error::Argument(format!(
            "heisenberg_weyl needs d >= 2, got {d}"
        )));
    }
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut w = CMatrix::zeros(d, d);
            for j in 0..d {
                // X^a Z^b |j> = ω^{bj} |j+a mod d>
                let phase = C64::new(0.0, omega * (b * j) as f64).exp();
                w.set((j + a) % d, j, phase);
            }
            out.push(w);
        }
    }
    Ok(out)
}

/// Projectors onto the Bell basis in the fixed order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub fn bell_projectors() -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets: [(usize, usize, f64); 4] = [(0, 3, 1.0), (0, 3, -1.0), (1, 2, 1.0), (1, 2, -1.0)];
    kets.iter()
        .map(|&(i, j, sign)| {
            let mut ket = CMatrix::zeros(4, 1);
            ket.set(i, 0, C64::new(s, 0.0));
            ket.set(j, 0, C64::new(sign * s, 0.0));
            CMatrix::projector_from_ket(&ket).expect("nonzero ket")
        })
        .collect()
}

/// The Bell measurement as a POVM with labels "1".."4".
pub fn bell_povm() -> Povm {
    Povm::new_unchecked(
        Povm::index_labels(4),
        bell_projectors(),
        DimVector(vec![2, 2]),
    )
}
