//! Tetrahedral questions, Bell answers, and state reconstruction.
//!
//! The machinery here turns measurement statistics back into states. Four
//! tetrahedral qubit states serve as informationally complete questions, Bell
//! projectors as answers, and the resulting table μ̄(x,y|s,t) determines the
//! shared state completely. Two rewritings of the same object are provided:
//! a direct six-qubit double-teleportation contraction, and an equivalent
//! LOSR map assembled from the measurement strategy. With exact Bell
//! measurements both are the identity, which is the hinge of the
//! reconstruction argument: any separable strategy reproducing μ̄ would
//! rebuild the entangled state out of a separable one.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::games::ConditionalDistribution;
use crate::matcore::{eigh, hs_inner, kron, partial_trace, CMatrix, DimVector, C64};
use crate::qobjects::{
    bell_projectors, heisenberg_weyl, max_entangled, ppt_entangled, DensityMatrix, Ensemble,
    KrausChannel, LosrMap, LosrPair, Povm, SeparableJointPovm,
};

/// Four pure qubit states at the corners of a tetrahedron in the Bloch ball.
#[derive(Debug, Clone)]
pub struct TetraQuestionSet {
    pub states: Vec<DensityMatrix>,
    /// Pairwise Hilbert-Schmidt inner products Tr[ψ^s ψ^t].
    pub gram: Vec<Vec<f64>>,
}

const TETRA_BLOCH: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

fn bloch_state(v: &[f64; 3]) -> CMatrix {
    // (I + v·σ)/2
    let (x, y, z) = (v[0], v[1], v[2]);
    let mut m = CMatrix::zeros(2, 2);
    m.set(0, 0, C64::new((1.0 + z) / 2.0, 0.0));
    m.set(0, 1, C64::new(x / 2.0, -y / 2.0));
    m.set(1, 0, C64::new(x / 2.0, y / 2.0));
    m.set(1, 1, C64::new((1.0 - z) / 2.0, 0.0));
    m
}

impl TetraQuestionSet {
    pub fn standard() -> Self {
        let norm = 1.0 / 3.0f64.sqrt();
        let states: Vec<DensityMatrix> = TETRA_BLOCH
            .iter()
            .map(|v| {
                let scaled = [v[0] * norm, v[1] * norm, v[2] * norm];
                DensityMatrix::new_unchecked(bloch_state(&scaled), DimVector(vec![2]))
            })
            .collect();
        let gram = (0..4)
            .map(|s| {
                (0..4)
                    .map(|t| hs_inner(&states[s].mat, &states[t].mat).unwrap().re)
                    .collect()
            })
            .collect();
        TetraQuestionSet { states, gram }
    }

    /// Uniform question ensemble over the four states.
    pub fn ensemble(&self, tols: &Tolerances) -> Result<Ensemble> {
        Ensemble::new(
            (1..=4).map(|i| i.to_string()).collect(),
            vec![0.25; 4],
            self.states.clone(),
            tols,
        )
    }

    /// The tetrahedral POVM Θ^s = ψ^s / 2.
    pub fn povm(&self) -> Povm {
        Povm::new_unchecked(
            Povm::index_labels(4),
            self.states.iter().map(|p| p.mat.scale_re(0.5)).collect(),
            DimVector(vec![2]),
        )
    }
}

/// The four Bell projectors used as answers, in the fixed order Φ⁺,Φ⁻,Ψ⁺,Ψ⁻.
#[derive(Debug, Clone)]
pub struct BellAnswerSet {
    pub projectors: Vec<CMatrix>,
}

impl BellAnswerSet {
    pub fn standard() -> Self {
        BellAnswerSet {
            projectors: bell_projectors(),
        }
    }
}

/// Correction unitaries indexed by Bell outcome: (Φ⁺,Φ⁻,Ψ⁺,Ψ⁻) ↦ (I,Z,X,XZ).
pub fn correction_unitaries() -> Vec<CMatrix> {
    heisenberg_weyl(2).expect("d = 2 is valid")
}

/// μ(x,y|s,t) = Tr[(P^x ⊗ Q^y)(ψ^s ⊗ m ⊗ ψ^t)] for arbitrary 4x4 m.
/// Complex-valued so it can be applied to matrix-unit inputs during
/// tomographic inversion.
fn mu_table_complex(
    m: &CMatrix,
    p: &[CMatrix],
    q: &[CMatrix],
    tetra: &TetraQuestionSet,
) -> Result<Vec<Vec<Vec<Vec<C64>>>>> {
    let mut out = vec![vec![vec![vec![C64::new(0.0, 0.0); 4]; 4]; q.len()]; p.len()];
    for s in 0..4 {
        for t in 0..4 {
            let state = kron(&kron(&tetra.states[s].mat, m)?, &tetra.states[t].mat)?;
            for (x, px) in p.iter().enumerate() {
                for (y, qy) in q.iter().enumerate() {
                    let op = kron(px, qy)?;
                    out[x][y][s][t] = op.matmul(&state)?.trace();
                }
            }
        }
    }
    Ok(out)
}

/// Conditional table for a state measured with the given local POVMs against
/// the tetrahedral questions.
pub fn mu_with_povms(
    rho: &DensityMatrix,
    p: &Povm,
    q: &Povm,
    tetra: &TetraQuestionSet,
) -> Result<ConditionalDistribution> {
    if rho.dims.dims() != [2, 2] {
        return Err(Error::Size("mu tables need a two-qubit state".into()));
    }
    if p.side() != 4 || q.side() != 4 {
        return Err(Error::Size("POVMs must act on two qubits".into()));
    }
    let table = mu_table_complex(&rho.mat, &p.elements, &q.elements, tetra)?;
    let values = table
        .iter()
        .map(|a| {
            a.iter()
                .map(|b| b.iter().map(|c| c.iter().map(|z| z.re).collect()).collect())
                .collect()
        })
        .collect();
    Ok(ConditionalDistribution { values })
}

/// The canonical table μ̄: tetrahedral questions, Bell-measurement answers.
pub fn mu_bar(rho: &DensityMatrix) -> Result<ConditionalDistribution> {
    let tetra = TetraQuestionSet::standard();
    let bell = crate::qobjects::bell_povm();
    mu_with_povms(rho, &bell, &bell, &tetra)
}

/// Question ensemble obtained by steering through a maximally entangled
/// state: τ^s = Tr_{A₁}[(Θ^s ⊗ 1)Ψ⁺], sub-normalized, with p(s) its trace.
/// Requires the POVM to be informationally complete.
pub fn ic_question_ensemble(theta: &Povm, tols: &Tolerances) -> Result<Ensemble> {
    let d = theta.side();
    let n = theta.n_outcomes();
    if n < d * d {
        return Err(Error::Rank(format!(
            "{n} operators cannot span a {}-dimensional operator space",
            d * d
        )));
    }
    // Gram rank check
    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram.set(i, j, hs_inner(&theta.elements[i], &theta.elements[j])?);
        }
    }
    let (gvals, _) = eigh(&gram, tols.tol_herm)?;
    let top = gvals[0].max(1e-300);
    if gvals[d * d - 1] <= 1e-8 * top {
        return Err(Error::Rank(format!(
            "POVM Gram rank below {}: eigenvalue {} vs top {}",
            d * d,
            gvals[d * d - 1],
            top
        )));
    }

    let psi = max_entangled(d)?;
    let dims2 = DimVector(vec![d, d]);
    let mut probs = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    for el in &theta.elements {
        let lifted = kron(el, &CMatrix::identity(d))?;
        let sub = partial_trace(&lifted.matmul(&psi.mat)?, &dims2, &[1])?;
        let p = sub.trace().re;
        if p <= tols.tol_psd {
            return Err(Error::Rank(
                "zero-probability question operator in IC ensemble".into(),
            ));
        }
        probs.push(p);
        states.push(DensityMatrix::new_unchecked(
            sub.scale_re(1.0 / p).herm_part(),
            DimVector(vec![d]),
        ));
    }
    Ensemble::new(theta.labels.clone(), probs, states, tols)
}

/// Double teleportation driven by a joint answer strategy: both halves of ρ
/// are pushed through Ψ⁺ resources, the strategy measures the middle four
/// qubits, and outcome-indexed corrections act on the outer pair. With exact
/// Bell measurements this returns ρ.
pub fn teleport_reconstruct(
    rho: &DensityMatrix,
    zbar: &SeparableJointPovm,
    tols: &Tolerances,
) -> Result<DensityMatrix> {
    if rho.dims.dims() != [2, 2] {
        return Err(Error::Size("teleport_reconstruct needs a two-qubit state".into()));
    }
    zbar.validate(tols)?;
    let (nx, ny) = (zbar.pairs[0].0.n_outcomes(), zbar.pairs[0].1.n_outcomes());
    if nx != 4 || ny != 4 {
        return Err(Error::Argument(
            "strategy must have four outcomes per side".into(),
        ));
    }
    let psi = max_entangled(2)?;
    // qubit order: A1, A0, A, B, B0, B1
    let full = kron(&kron(&psi.mat, &rho.mat)?, &psi.mat)?;
    let dims6 = DimVector(vec![2; 6]);
    let u = correction_unitaries();
    let mut out = CMatrix::zeros(4, 4);
    for x in 0..4 {
        for y in 0..4 {
            let z = zbar.joint_element(x, y)?;
            let lifted = kron(&CMatrix::identity(2), &kron(&z, &CMatrix::identity(2))?)?;
            let reduced = partial_trace(&lifted.matmul(&full)?, &dims6, &[0, 5])?;
            let uv = kron(&u[x], &u[y])?;
            let term = uv.matmul(&reduced)?.matmul(&uv.dagger())?;
            out = out.add(&term)?;
        }
    }
    DensityMatrix::new(out.herm_part(), DimVector(vec![2, 2]), tols)
}

/// Kraus form of a linear map given only as an action, via its Choi matrix.
fn channel_from_action<F>(action: F, d_in: usize, d_out: usize, tols: &Tolerances) -> Result<KrausChannel>
where
    F: Fn(&CMatrix) -> Result<CMatrix>,
{
    let side = d_out * d_in;
    let mut choi = CMatrix::zeros(side, side);
    for i in 0..d_in {
        for j in 0..d_in {
            let mut unit = CMatrix::zeros(d_in, d_in);
            unit.set(i, j, C64::new(1.0, 0.0));
            let img = action(&unit)?;
            for o in 0..d_out {
                for o2 in 0..d_out {
                    choi.set(o * d_in + i, o2 * d_in + j, img.at(o, o2));
                }
            }
        }
    }
    let (vals, vecs) = eigh(&choi.herm_part(), tols.tol_herm)?;
    let mut ops = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam < -1e-9 {
            return Err(Error::Construction(format!(
                "map is not completely positive: Choi eigenvalue {lam}"
            )));
        }
        if lam <= 1e-12 {
            continue;
        }
        let mut kmat = CMatrix::zeros(d_out, d_in);
        let scale = lam.sqrt();
        for o in 0..d_out {
            for i in 0..d_in {
                kmat.set(o, i, vecs.at(o * d_in + i, k) * scale);
            }
        }
        ops.push(kmat);
    }
    if ops.is_empty() {
        return Err(Error::Construction("map has vanishing Choi matrix".into()));
    }
    // trace preservation check
    let mut sum = CMatrix::zeros(d_in, d_in);
    for k in &ops {
        sum = sum.add(&k.dagger().matmul(k)?)?;
    }
    if sum.max_abs_diff(&CMatrix::identity(d_in)) > 1e-10 {
        return Err(Error::Construction(format!(
            "channel is not trace-preserving: defect {}",
            sum.max_abs_diff(&CMatrix::identity(d_in))
        )));
    }
    Ok(KrausChannel { kraus_ops: ops })
}

/// Rewrites a separable answer strategy as an LOSR map. Per decomposition
/// term the A-side channel teleports through Ψ⁺ with the term's POVM and
/// applies the corrections, and the B-side channel mirrors it.
pub fn build_losr_from_strategy(
    zbar: &SeparableJointPovm,
    u_ops: &[CMatrix],
    v_ops: &[CMatrix],
    tols: &Tolerances,
) -> Result<LosrMap> {
    zbar.validate(tols)?;
    let psi = max_entangled(2)?.mat;
    let dims3 = DimVector(vec![2, 2, 2]);
    let mut pairs = Vec::with_capacity(zbar.pairs.len());
    for (p, q) in &zbar.pairs {
        if p.n_outcomes() != u_ops.len() || q.n_outcomes() != v_ops.len() {
            return Err(Error::Argument(
                "correction unitary count must match POVM outcomes".into(),
            ));
        }
        let p = p.clone();
        let u: Vec<CMatrix> = u_ops.to_vec();
        let psi_a = psi.clone();
        let dims_a = dims3.clone();
        let a_kraus = channel_from_action(
            move |z| {
                // qubit order A1, A0, A; measure A0A, keep A1
                let state = kron(&psi_a, z)?;
                let mut out = CMatrix::zeros(2, 2);
                for (x, px) in p.elements.iter().enumerate() {
                    let lifted = kron(&CMatrix::identity(2), px)?;
                    let reduced = partial_trace(&lifted.matmul(&state)?, &dims_a, &[0])?;
                    out = out.add(&u[x].matmul(&reduced)?.matmul(&u[x].dagger())?)?;
                }
                Ok(out)
            },
            2,
            2,
            tols,
        )?;
        let q = q.clone();
        let v: Vec<CMatrix> = v_ops.to_vec();
        let psi_b = psi.clone();
        let dims_b = dims3.clone();
        let b_kraus = channel_from_action(
            move |w| {
                // qubit order B, B0, B1; measure BB0, keep B1
                let state = kron(w, &psi_b)?;
                let mut out = CMatrix::zeros(2, 2);
                for (y, qy) in q.elements.iter().enumerate() {
                    let lifted = kron(qy, &CMatrix::identity(2))?;
                    let reduced = partial_trace(&lifted.matmul(&state)?, &dims_b, &[2])?;
                    out = out.add(&v[y].matmul(&reduced)?.matmul(&v[y].dagger())?)?;
                }
                Ok(out)
            },
            2,
            2,
            tols,
        )?;
        pairs.push(LosrPair { a_kraus, b_kraus });
    }
    LosrMap::new(zbar.weights.clone(), pairs, tols)
}

/// Least-squares inversion of the μ̄ table back to a two-qubit state.
pub fn reconstruct_from_mu_bar(
    mu: &ConditionalDistribution,
    tols: &Tolerances,
) -> Result<DensityMatrix> {
    let (nx, ny, ns, nt) = mu.shape();
    if (nx, ny, ns, nt) != (4, 4, 4, 4) {
        return Err(Error::Size("expected a 4x4x4x4 conditional table".into()));
    }
    let tetra = TetraQuestionSet::standard();
    let bell = bell_projectors();
    // linear map L: vec(rho) (16) -> mu entries (256), built column by column
    let mut l = CMatrix::zeros(256, 16);
    for i in 0..4 {
        for j in 0..4 {
            let mut unit = CMatrix::zeros(4, 4);
            unit.set(i, j, C64::new(1.0, 0.0));
            let col = mu_table_complex(&unit, &bell, &bell, &tetra)?;
            let mut row = 0;
            for s in 0..4 {
                for t in 0..4 {
                    for x in 0..4 {
                        for y in 0..4 {
                            l.set(row, i * 4 + j, col[x][y][s][t]);
                            row += 1;
                        }
                    }
                }
            }
        }
    }
    let mut b = CMatrix::zeros(256, 1);
    let mut row = 0;
    for s in 0..4 {
        for t in 0..4 {
            for x in 0..4 {
                for y in 0..4 {
                    b.set(row, 0, C64::new(mu.get(x, y, s, t), 0.0));
                    row += 1;
                }
            }
        }
    }
    // normal equations solved through the eigendecomposition of L†L
    let a = l.dagger().matmul(&l)?;
    let rhs = l.dagger().matmul(&b)?;
    let (vals, vecs) = eigh(&a.herm_part(), tols.tol_herm)?;
    let top = vals[0].max(1e-300);
    let mut v = CMatrix::zeros(16, 1);
    for k in 0..16 {
        if vals[k] <= 1e-10 * top {
            return Err(Error::Rank(
                "tomography system is rank-deficient".into(),
            ));
        }
        let mut proj = C64::new(0.0, 0.0);
        for i in 0..16 {
            proj += vecs.at(i, k).conj() * rhs.at(i, 0);
        }
        let coeff = proj / vals[k];
        for i in 0..16 {
            let cur = v.at(i, 0) + vecs.at(i, k) * coeff;
            v.set(i, 0, cur);
        }
    }
    let mut rho = CMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            rho.set(i, j, v.at(i * 4 + j, 0));
        }
    }
    Ok(DensityMatrix::new_unchecked(
        rho.herm_part(),
        DimVector(vec![2, 2]),
    ))
}

/// Output of [`entanglement_nonreproducibility_demo`].
#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    /// max |μ̄(x,y|s,t‖ρ) − μ(x,y|s,t)| over all 256 entries.
    pub max_deviation: f64,
    pub rho_npt: bool,
    /// If the strategy reproduced μ̄ for an NPT ρ, distance between the LOSR
    /// image of the separable state and ρ itself (the contradiction step).
    pub losr_image_error: Option<f64>,
}

/// Compares μ̄ of an entangled ρ against the statistics a separable state
/// produces under a product strategy. If the strategy were to reproduce μ̄
/// exactly, the strategy-derived LOSR map would rebuild ρ from a separable
/// state, which is impossible for NPT ρ; the report quantifies both sides.
pub fn entanglement_nonreproducibility_demo(
    rho: &DensityMatrix,
    sigma_sep: &DensityMatrix,
    p_povm: &Povm,
    q_povm: &Povm,
    tols: &Tolerances,
) -> Result<DemoReport> {
    let tetra = TetraQuestionSet::standard();
    let target = mu_bar(rho)?;
    let observed = mu_with_povms(sigma_sep, p_povm, q_povm, &tetra)?;
    let mut max_deviation = 0.0f64;
    for x in 0..4 {
        for y in 0..4 {
            for s in 0..4 {
                for t in 0..4 {
                    max_deviation = max_deviation
                        .max((target.get(x, y, s, t) - observed.get(x, y, s, t)).abs());
                }
            }
        }
    }
    let rho_npt = ppt_entangled(rho, tols)?.flag;
    let losr_image_error = if rho_npt && max_deviation < 1e-9 {
        let zbar = SeparableJointPovm::new(
            vec![1.0],
            vec![(p_povm.clone(), q_povm.clone())],
            tols,
        )?;
        let u = correction_unitaries();
        let m = build_losr_from_strategy(&zbar, &u, &u, tols)?;
        let image = crate::losr::apply_losr(&m, sigma_sep)?;
        Some(image.mat.max_abs_diff(&rho.mat))
    } else {
        None
    };
    Ok(DemoReport {
        max_deviation,
        rho_npt,
        losr_image_error,
    })
}
