//! From an NPT state to a game that singles it out.
//!
//! The route: the partial transpose of an NPT two-qubit state has a negative
//! eigenvalue, whose eigenvector yields an entanglement witness W with
//! Tr[Wρ] < 0 but Tr[Wσ] ≥ 0 for every separable σ. Because the tetrahedral
//! question states are informationally complete, W decomposes as
//! Σ β_st (ψ^s)ᵀ⊗(ψ^t)ᵀ, and placing −β_st (suitably scaled) as the payoff of
//! the (Φ⁺,Φ⁺) answer pair produces a game whose Bell-strategy payoff equals
//! −Tr[Wρ]. Product strategies can never push this payoff above zero, so the
//! state beats every separable competitor.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::games::{expected_payoff, joint_distribution, SemiQuantumGame};
use crate::matcore::{eigh, kron, partial_transpose, CMatrix, C64};
use crate::optimize::{seesaw_with_seed, separable_value, SeesawOptions};
use crate::qobjects::{bell_povm, ppt_entangled, DensityMatrix, Ensemble};

/// A semi-quantum game built around an entanglement witness.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessGame {
    pub game: SemiQuantumGame,
    /// Coefficients of W in the transposed question-state product basis.
    pub beta: Vec<Vec<f64>>,
    pub w_matrix: CMatrix,
    /// Positive constant c in the payoff identity; fixed to 1 by the κ scaling.
    pub scale_c: f64,
    pub target_payoff_identity: String,
}

/// Entanglement witness from the negative partial-transpose eigenvector:
/// W = (|φ⟩⟨φ|)^{T_B} where φ is the most negative eigenvector of ρ^{T_B}.
pub fn witness_from_ppt(rho: &DensityMatrix, tols: &Tolerances) -> Result<CMatrix> {
    let report = ppt_entangled(rho, tols)?;
    if !report.flag {
        return Err(Error::NotEntangled(format!(
            "partial transpose has no negative eigenvalue (min {})",
            report.min_pt_eigenvalue
        )));
    }
    let proj = CMatrix::projector_from_ket(&report.witness_vector)?;
    partial_transpose(&proj, &rho.dims, 1)
}

/// Decomposes W over the transposed question-state products and wraps the
/// coefficients into a payoff tensor supported on the (Φ⁺,Φ⁺) answer pair,
/// scaled so that the Bell-strategy payoff on ρ equals −Tr[Wρ].
pub fn build_witness_game(
    w: &CMatrix,
    tau: &Ensemble,
    omega: &Ensemble,
    tols: &Tolerances,
) -> Result<WitnessGame> {
    if tau.len() != 4 || omega.len() != 4 || tau.side() != 2 || omega.side() != 2 {
        return Err(Error::Argument(
            "witness games need four qubit question states per side".into(),
        ));
    }
    if w.rows() != 4 || w.cols() != 4 || !w.is_hermitian(tols.tol_herm) {
        return Err(Error::Argument("witness must be a Hermitian 4x4 matrix".into()));
    }

    // basis M_st = (ψ^s)ᵀ ⊗ (ψ^t)ᵀ, solve Σ β_st M_st = W by least squares
    let mut basis = Vec::with_capacity(16);
    for s in 0..4 {
        for t in 0..4 {
            basis.push(kron(
                &tau.states[s].mat.transpose(),
                &omega.states[t].mat.transpose(),
            )?);
        }
    }
    let mut a = CMatrix::zeros(16, 16);
    for (col, m) in basis.iter().enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                a.set(i * 4 + j, col, m.at(i, j));
            }
        }
    }
    let mut b = CMatrix::zeros(16, 1);
    for i in 0..4 {
        for j in 0..4 {
            b.set(i * 4 + j, 0, w.at(i, j));
        }
    }
    let gram = a.dagger().matmul(&a)?;
    let rhs = a.dagger().matmul(&b)?;
    let (vals, vecs) = eigh(&gram.herm_part(), tols.tol_herm)?;
    let top = vals[0].max(1e-300);
    if vals[15] <= 1e-8 * top {
        return Err(Error::Rank(
            "question states are not informationally complete".into(),
        ));
    }
    let mut coeffs = vec![C64::new(0.0, 0.0); 16];
    for k in 0..16 {
        let mut proj = C64::new(0.0, 0.0);
        for i in 0..16 {
            proj += vecs.at(i, k).conj() * rhs.at(i, 0);
        }
        let weight = proj / vals[k];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c += vecs.at(i, k) * weight;
        }
    }
    let mut beta = vec![vec![0.0; 4]; 4];
    let mut reassembled = CMatrix::zeros(4, 4);
    for s in 0..4 {
        for t in 0..4 {
            let c = coeffs[s * 4 + t];
            if c.im.abs() > 1e-9 {
                return Err(Error::Construction(format!(
                    "witness coefficient β[{s}][{t}] is not real: {c}"
                )));
            }
            beta[s][t] = c.re;
            reassembled = reassembled.add(&basis[s * 4 + t].scale_re(c.re))?;
        }
    }
    let residual = reassembled.max_abs_diff(w);
    if residual > 1e-9 {
        return Err(Error::Construction(format!(
            "witness reassembly residual {residual} exceeds 1e-9"
        )));
    }

    // payoff nonzero only at (x,y) = (Φ⁺,Φ⁺); κ cancels p(s)q(t) and the
    // 1/4 from the two Bell contractions
    let mut payoff = vec![vec![vec![vec![0.0; 4]; 4]; 4]; 4];
    for s in 0..4 {
        for t in 0..4 {
            let kappa = 4.0 / (tau.probs[s] * omega.probs[t]);
            payoff[s][t][0][0] = -beta[s][t] * kappa;
        }
    }
    // answer labels match the Bell POVM's, in the fixed order Φ⁺,Φ⁻,Ψ⁺,Ψ⁻
    let labels = bell_povm().labels;
    let game = SemiQuantumGame {
        s_labels: tau.labels.clone(),
        t_labels: omega.labels.clone(),
        x_labels: labels.clone(),
        y_labels: labels,
        tau: tau.clone(),
        omega: omega.clone(),
        payoff,
    };
    game.validate(tols)?;
    Ok(WitnessGame {
        game,
        beta,
        w_matrix: w.clone(),
        scale_c: 1.0,
        target_payoff_identity: "Bell-strategy payoff on ρ equals −Tr[Wρ]·c".into(),
    })
}

/// Full pipeline from an NPT state to its witness game, with tetrahedral
/// questions on both sides.
pub fn witness_game_for_state(rho: &DensityMatrix, tols: &Tolerances) -> Result<WitnessGame> {
    let w = witness_from_ppt(rho, tols)?;
    let tetra = crate::appendixlab::TetraQuestionSet::standard();
    let ens = tetra.ensemble(tols)?;
    build_witness_game(&w, &ens, &ens, tols)
}

/// Payoff of the fixed Bell-measurement strategy, no optimization.
pub fn bell_strategy_payoff(
    wg: &WitnessGame,
    rho: &DensityMatrix,
    tols: &Tolerances,
) -> Result<f64> {
    let bell = bell_povm();
    let mu = joint_distribution(&wg.game, rho, &bell, &bell, tols)?;
    expected_payoff(&wg.game, &mu)
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessGapReport {
    pub entangled_value: f64,
    pub separable_value: f64,
    pub gap: f64,
    pub scale_c: f64,
}

/// Optimized value of the witness game on ρ versus the best any separable
/// state can do. The Bell strategy seeds restart 0 so the optimizer starts
/// at least as high as the witness expectation.
pub fn witness_gap(
    rho: &DensityMatrix,
    wg: &WitnessGame,
    opts: &SeesawOptions,
    tols: &Tolerances,
) -> Result<WitnessGapReport> {
    let bell = bell_povm();
    let entangled = seesaw_with_seed(&wg.game, rho, opts, Some(&bell), tols)?;
    let separable = separable_value(&wg.game, opts, tols)?;
    Ok(WitnessGapReport {
        entangled_value: entangled.value,
        separable_value: separable.value,
        gap: entangled.value - separable.value,
        scale_c: wg.scale_c,
    })
}
