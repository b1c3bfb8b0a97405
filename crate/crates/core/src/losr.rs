//! Local operations with shared randomness.
//!
//! An LOSR map is a convex mixture Σᵢ ν(i) Eⁱ⊗Fⁱ of product channels. These
//! transformations cannot increase the value of any semi-quantum game, which
//! is the ordering this module probes numerically: applying a map and
//! re-optimizing should never beat the original state beyond optimizer slack.
//! Discard-and-prepare maps, which replace the input with a fixed separable
//! state, are the reason every separable state earns the same payoff.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::games::SemiQuantumGame;
use crate::matcore::{kron, CMatrix, DimVector};
use crate::optimize::{seesaw_value, SeesawOptions};
use crate::qobjects::{DensityMatrix, KrausChannel, LosrMap, LosrPair};

/// Apply Σᵢ ν(i) (Eⁱ⊗Fⁱ) to a bipartite state.
pub fn apply_losr(m: &LosrMap, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dims.len() != 2 {
        return Err(Error::Argument("apply_losr needs a bipartite state".into()));
    }
    if m.input_dims() != rho.dims {
        return Err(Error::Size(format!(
            "LOSR input dims {:?} do not match state dims {:?}",
            m.input_dims().dims(),
            rho.dims.dims()
        )));
    }
    let out_dims = m.output_dims();
    let side = out_dims.product();
    let mut out = CMatrix::zeros(side, side);
    for (w, pair) in m.weights.iter().zip(&m.pairs) {
        // (E⊗F)(ρ) = Σ_{jk} (K_j⊗L_k) ρ (K_j⊗L_k)†
        for kj in &pair.a_kraus.kraus_ops {
            for lk in &pair.b_kraus.kraus_ops {
                let op = kron(kj, lk)?;
                let term = op.matmul(&rho.mat)?.matmul(&op.dagger())?;
                out = out.add(&term.scale_re(*w))?;
            }
        }
    }
    Ok(DensityMatrix::new_unchecked(out, out_dims))
}

/// Discard-and-prepare map onto a fixed separable decomposition: every input
/// is replaced by Σᵢ ν(i) γⁱ⊗χⁱ.
pub fn discard_and_prepare_map(
    sep: &[(f64, DensityMatrix, DensityMatrix)],
    dims_in: &DimVector,
    tols: &Tolerances,
) -> Result<LosrMap> {
    if dims_in.len() != 2 || sep.is_empty() {
        return Err(Error::Argument(
            "discard_and_prepare_map needs bipartite input dims and at least one term".into(),
        ));
    }
    let weights: Vec<f64> = sep.iter().map(|(w, _, _)| *w).collect();
    let (da, db) = (dims_in.dims()[0], dims_in.dims()[1]);
    let mut pairs = Vec::with_capacity(sep.len());
    for (_, gamma, chi) in sep {
        if gamma.dims.len() != 1 || chi.dims.len() != 1 {
            return Err(Error::Argument(
                "prepared states must be single-subsystem".into(),
            ));
        }
        gamma.validate(tols)?;
        chi.validate(tols)?;
        pairs.push(LosrPair {
            a_kraus: KrausChannel::discard_and_prepare(&gamma.mat, da, tols)?,
            b_kraus: KrausChannel::discard_and_prepare(&chi.mat, db, tols)?,
        });
    }
    LosrMap::new(weights, pairs, tols)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityEntry {
    pub value_before: f64,
    pub value_after: f64,
    pub slack_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub slack: f64,
    pub entries: Vec<MonotonicityEntry>,
    pub violations: usize,
}

/// Slack absorbing see-saw suboptimality in monotonicity checks.
pub const MONOTONICITY_SLACK: f64 = 1e-3;

/// For each game, compares the value of ρ with the value of its LOSR image.
/// A transformation can never raise the value, so `value_after` exceeding
/// `value_before` by more than the slack is reported as a violation.
pub fn check_monotonicity(
    rho: &DensityMatrix,
    m: &LosrMap,
    games: &[SemiQuantumGame],
    opts: &SeesawOptions,
    tols: &Tolerances,
) -> Result<MonotonicityReport> {
    let image = apply_losr(m, rho)?;
    let mut entries = Vec::with_capacity(games.len());
    let mut violations = 0;
    for g in games {
        let before = seesaw_value(g, rho, opts, tols)?.value;
        let after = seesaw_value(g, &image, opts, tols)?.value;
        let ok = after <= before + MONOTONICITY_SLACK;
        if !ok {
            violations += 1;
        }
        entries.push(MonotonicityEntry {
            value_before: before,
            value_after: after,
            slack_ok: ok,
        });
    }
    Ok(MonotonicityReport {
        slack: MONOTONICITY_SLACK,
        entries,
        violations,
    })
}
