//! Single-side POVM subproblem with a dual certificate.
//!
//! Maximize Σ_x Tr[P^x R^x] over POVMs (P^x). The dual is
//! min Tr[Y] subject to Y ⪰ R^x for all x, so any dual-feasible Y bounds the
//! suboptimality of a primal candidate by gap = Tr[Y] - Σ_x Tr[P^x R^x].
//!
//! Solved exactly for one outcome, for commuting diagonal operators, and for
//! two outcomes (Helstrom). The general case runs a fixed-point iteration
//! interleaved with pairwise Helstrom sweeps until the certified gap reaches
//! the requested tolerance.

use crate::error::{Error, Result};
use crate::matcore::{eigh, pinv_sqrt, psd_sqrt, CMatrix, C64};

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub elements: Vec<CMatrix>,
    pub dual_y: CMatrix,
    pub value: f64,
    pub gap: f64,
}

const MAX_ROUNDS: usize = 400;
const FIXED_POINT_ITERS: usize = 60;

pub fn povm_subproblem(r_ops: &[CMatrix], gap_tol: f64) -> Result<SubproblemSolution> {
    if r_ops.is_empty() {
        return Err(Error::Argument("no effective operators given".into()));
    }
    let d = r_ops[0].rows();
    for r in r_ops {
        if r.rows() != d || r.cols() != d {
            return Err(Error::Argument("effective operators differ in shape".into()));
        }
        if !r.is_hermitian(1e-9 * (1.0 + r.max_abs())) {
            return Err(Error::Contract(
                "effective operator is not Hermitian".into(),
            ));
        }
    }
    let r_ops: Vec<CMatrix> = r_ops.iter().map(|r| r.herm_part()).collect();
    let n = r_ops.len();

    if n == 1 {
        let value = r_ops[0].trace().re;
        return Ok(SubproblemSolution {
            elements: vec![CMatrix::identity(d)],
            dual_y: r_ops[0].clone(),
            value,
            gap: 0.0,
        });
    }

    if let Some(sol) = solve_diagonal(&r_ops, d) {
        return Ok(sol);
    }
    if n == 2 {
        return solve_helstrom(&r_ops, d);
    }
    solve_iterative(&r_ops, d, gap_tol)
}

/// Exact solution when every operator is diagonal: each basis vector goes to
/// the outcome with the largest diagonal entry, ties to the lowest label.
fn solve_diagonal(r_ops: &[CMatrix], d: usize) -> Option<SubproblemSolution> {
    let scale = r_ops.iter().map(|r| r.max_abs()).fold(1.0, f64::max);
    let diag_tol = 1e-13 * scale;
    for r in r_ops {
        for i in 0..d {
            for j in 0..d {
                if i != j && r.at(i, j).norm() > diag_tol {
                    return None;
                }
            }
        }
    }
    let n = r_ops.len();
    let mut elements = vec![CMatrix::zeros(d, d); n];
    let mut y_diag = vec![0.0; d];
    let mut value = 0.0;
    for j in 0..d {
        let mut best = 0usize;
        for x in 1..n {
            if r_ops[x].at(j, j).re > r_ops[best].at(j, j).re {
                best = x;
            }
        }
        elements[best].set(j, j, C64::new(1.0, 0.0));
        y_diag[j] = r_ops[best].at(j, j).re;
        value += y_diag[j];
    }
    Some(SubproblemSolution {
        elements,
        dual_y: CMatrix::diag(&y_diag),
        value,
        gap: 0.0,
    })
}

/// Exact two-outcome solution: P¹ projects onto the nonnegative eigenspace of
/// R¹ - R² (zero eigenvalues to the lower label), Y = R² + (R¹-R²)₊.
fn solve_helstrom(r_ops: &[CMatrix], d: usize) -> Result<SubproblemSolution> {
    let delta = r_ops[0].sub(&r_ops[1])?;
    let (vals, vecs) = eigh(&delta, 1e-8 * (1.0 + delta.max_abs()))?;
    let mut p1 = CMatrix::zeros(d, d);
    let mut delta_plus = CMatrix::zeros(d, d);
    for (k, &l) in vals.iter().enumerate() {
        if l >= 0.0 {
            for i in 0..d {
                for j in 0..d {
                    let v = vecs.at(i, k) * vecs.at(j, k).conj();
                    p1.set(i, j, p1.at(i, j) + v);
                    delta_plus.set(i, j, delta_plus.at(i, j) + v * l);
                }
            }
        }
    }
    let p2 = CMatrix::identity(d).sub(&p1)?;
    let value = r_ops[0].matmul(&p1)?.trace().re + r_ops[1].matmul(&p2)?.trace().re;
    let dual_y = r_ops[1].add(&delta_plus)?;
    let gap = (dual_y.trace().re - value).max(0.0);
    Ok(SubproblemSolution {
        elements: vec![p1, p2],
        dual_y,
        value,
        gap,
    })
}

fn primal_value(r_ops: &[CMatrix], povm: &[CMatrix]) -> Result<f64> {
    let mut v = 0.0;
    for (r, p) in r_ops.iter().zip(povm) {
        v += r.matmul(p)?.trace().re;
    }
    Ok(v)
}

/// Dual candidate from a primal iterate: herm(Σ R^x P^x) lifted by the largest
/// violation of Y ⪰ R^x.
fn certificate(r_ops: &[CMatrix], povm: &[CMatrix]) -> Result<(CMatrix, f64, f64)> {
    let d = r_ops[0].rows();
    let mut y0 = CMatrix::zeros(d, d);
    for (r, p) in r_ops.iter().zip(povm) {
        y0 = y0.add(&r.matmul(p)?)?;
    }
    let y0 = y0.herm_part();
    let mut lift: f64 = 0.0;
    for r in r_ops {
        let diff = r.sub(&y0)?;
        let (vals, _) = eigh(&diff, 1e-7 * (1.0 + diff.max_abs()))?;
        lift = lift.max(vals[0]);
    }
    let y = if lift > 0.0 {
        y0.add(&CMatrix::identity(d).scale_re(lift))?
    } else {
        y0
    };
    let value = primal_value(r_ops, povm)?;
    let gap = (y.trace().re - value).max(0.0);
    Ok((y, value, gap))
}

/// One fixed-point pass: P^x <- Λ^{-1/2} R^x P^x R^x Λ^{-1/2} with
/// Λ = Σ R^x P^x R^x, on operators shifted to be PSD.
fn fixed_point_pass(shifted: &[CMatrix], povm: &mut [CMatrix]) -> Result<()> {
    let d = shifted[0].rows();
    let mut lambda = CMatrix::zeros(d, d);
    let mut rpr = Vec::with_capacity(shifted.len());
    for (r, p) in shifted.iter().zip(povm.iter()) {
        let m = r.matmul(p)?.matmul(r)?;
        lambda = lambda.add(&m)?;
        rpr.push(m);
    }
    let lambda = lambda.herm_part();
    let t = pinv_sqrt(&lambda, 1e-7 * (1.0 + lambda.max_abs()), 1e-13 * (1.0 + lambda.max_abs()))?;
    let mut sum = CMatrix::zeros(d, d);
    for (p, m) in povm.iter_mut().zip(&rpr) {
        *p = t.matmul(m)?.matmul(&t)?.herm_part();
        sum = sum.add(p)?;
    }
    // Λ can be singular; spread the completeness defect evenly
    let defect = CMatrix::identity(d).sub(&sum)?;
    if defect.max_abs() > 1e-14 {
        let share = defect.scale_re(1.0 / povm.len() as f64);
        for p in povm.iter_mut() {
            *p = p.add(&share)?;
        }
    }
    Ok(())
}

/// One sweep of exact pairwise redistributions: for each pair, reassign
/// S = P^x + P^y optimally between the two outcomes.
fn pairwise_sweep(r_ops: &[CMatrix], povm: &mut [CMatrix]) -> Result<()> {
    let d = r_ops[0].rows();
    let n = r_ops.len();
    for x in 0..n {
        for y in (x + 1)..n {
            let s = povm[x].add(&povm[y])?.herm_part();
            if s.trace().re < 1e-13 {
                continue;
            }
            let s_half = psd_sqrt(&s, 1e-7 * (1.0 + s.max_abs()))?;
            let delta = r_ops[x].sub(&r_ops[y])?;
            let inner = s_half.matmul(&delta)?.matmul(&s_half)?.herm_part();
            let (vals, vecs) = eigh(&inner, 1e-7 * (1.0 + inner.max_abs()))?;
            let mut proj = CMatrix::zeros(d, d);
            for (k, &l) in vals.iter().enumerate() {
                // zero eigenvalues go with the lower label x
                if l >= -1e-13 * (1.0 + inner.max_abs()) {
                    for i in 0..d {
                        for j in 0..d {
                            proj.set(i, j, proj.at(i, j) + vecs.at(i, k) * vecs.at(j, k).conj());
                        }
                    }
                }
            }
            let px = s_half.matmul(&proj)?.matmul(&s_half)?.herm_part();
            let py = s.sub(&px)?.herm_part();
            povm[x] = px;
            povm[y] = py;
        }
    }
    Ok(())
}

fn solve_iterative(r_ops: &[CMatrix], d: usize, gap_tol: f64) -> Result<SubproblemSolution> {
    let n = r_ops.len();
    // shift to PSD for the fixed-point pass
    let mut min_eig: f64 = 0.0;
    for r in r_ops {
        let (vals, _) = eigh(r, 1e-8 * (1.0 + r.max_abs()))?;
        min_eig = min_eig.min(*vals.last().unwrap());
    }
    let shift = if min_eig < 0.0 { -min_eig + 1e-3 } else { 1e-3 };
    let shifted: Vec<CMatrix> = r_ops
        .iter()
        .map(|r| r.add(&CMatrix::identity(d).scale_re(shift)))
        .collect::<Result<_>>()?;

    let mut povm: Vec<CMatrix> = (0..n)
        .map(|_| CMatrix::identity(d).scale_re(1.0 / n as f64))
        .collect();

    let mut best: Option<SubproblemSolution> = None;
    for round in 0..MAX_ROUNDS {
        if round % 2 == 1 {
            pairwise_sweep(r_ops, &mut povm)?;
        } else {
            for _ in 0..FIXED_POINT_ITERS {
                fixed_point_pass(&shifted, &mut povm)?;
            }
        }
        let (y, value, gap) = certificate(r_ops, &povm)?;
        let better = best.as_ref().map_or(true, |b| gap < b.gap);
        if better {
            best = Some(SubproblemSolution {
                elements: povm.clone(),
                dual_y: y,
                value,
                gap,
            });
        }
        if best.as_ref().unwrap().gap <= gap_tol {
            return Ok(best.unwrap());
        }
    }
    let best_gap = best.as_ref().map_or(f64::INFINITY, |b| b.gap);
    Err(Error::Convergence {
        msg: format!("POVM subproblem missed gap tolerance {gap_tol:.1e}"),
        best_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::DimVector;
    use crate::qobjects::{ginibre, rng_from_seed};

    #[test]
    fn single_outcome_is_identity() {
        let r = CMatrix::diag(&[0.4, -0.3, 1.1]);
        let sol = povm_subproblem(&[r.clone()], 1e-7).unwrap();
        assert!(sol.elements[0].max_abs_diff(&CMatrix::identity(3)) < 1e-15);
        assert!((sol.value - r.trace().re).abs() < 1e-15);
        assert_eq!(sol.gap, 0.0);
    }

    #[test]
    fn diagonal_case_argmax_with_low_label_ties() {
        let r1 = CMatrix::diag(&[2.0, 1.0, 5.0]);
        let r2 = CMatrix::diag(&[2.0, 3.0, 0.0]);
        let r3 = CMatrix::diag(&[1.0, 3.0, 5.0]);
        let sol = povm_subproblem(&[r1, r2, r3], 1e-7).unwrap();
        // basis 0: tie between x=0,1 -> x=0; basis 1: tie between 1,2 -> 1;
        // basis 2: tie between 0,2 -> 0
        assert!(sol.elements[0].max_abs_diff(&CMatrix::diag(&[1.0, 0.0, 1.0])) < 1e-15);
        assert!(sol.elements[1].max_abs_diff(&CMatrix::diag(&[0.0, 1.0, 0.0])) < 1e-15);
        assert!(sol.elements[2].max_abs_diff(&CMatrix::diag(&[0.0, 0.0, 0.0])) < 1e-15);
        assert!((sol.value - 10.0).abs() < 1e-12);
        assert_eq!(sol.gap, 0.0);
    }

    #[test]
    fn qubit_two_outcome_matches_bloch_grid_oracle() {
        // R¹ = |0><0|, R² = |+><+|: optimum 1 + sin(π/4)
        let r1 = CMatrix::diag(&[1.0, 0.0]);
        let half = C64::new(0.5, 0.0);
        let r2 = CMatrix::new(2, 2, vec![half, half, half, half]).unwrap();
        let sol = povm_subproblem(&[r1.clone(), r2.clone()], 1e-7).unwrap();
        let expect = 1.0 + (std::f64::consts::PI / 4.0).sin();
        assert!(
            (sol.value - expect).abs() < 1e-10,
            "value {} vs {}",
            sol.value,
            expect
        );
        assert!(sol.gap <= 1e-7);

        // independent grid oracle over projective qubit measurements
        let grid = bloch_grid_oracle(&[r1, r2], 100);
        assert!((sol.value - grid).abs() < 1e-3);
        assert!(sol.value + 1e-9 >= grid - 1e-3);
    }

    /// Brute-force over projective qubit measurements on a Bloch-sphere grid.
    /// Only meaningful for 2 outcomes on a qubit; used as an oracle.
    pub(crate) fn bloch_grid_oracle(r_ops: &[CMatrix], steps: usize) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..steps {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / steps as f64;
            for j in 0..steps {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / steps as f64;
                let ct = (theta / 2.0).cos();
                let st = (theta / 2.0).sin();
                let mut ket = CMatrix::zeros(2, 1);
                ket.set(0, 0, C64::new(ct, 0.0));
                ket.set(1, 0, C64::new(st * phi.cos(), st * phi.sin()));
                let p1 = CMatrix::projector_from_ket(&ket).unwrap();
                let p2 = CMatrix::identity(2).sub(&p1).unwrap();
                let v = r_ops[0].matmul(&p1).unwrap().trace().re
                    + r_ops[1].matmul(&p2).unwrap().trace().re;
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn dual_certificate_is_feasible_on_random_instances() {
        let mut rng = rng_from_seed(17);
        for trial in 0..20 {
            let d = 2 + (trial % 3);
            let n = 2 + (trial % 3);
            let r_ops: Vec<CMatrix> = (0..n)
                .map(|_| ginibre(&mut rng, d, d).herm_part())
                .collect();
            let sol = povm_subproblem(&r_ops, 1e-7).unwrap();
            assert!(sol.gap <= 1e-7, "trial {trial}: gap {}", sol.gap);
            // Y ⪰ R^x
            for r in &r_ops {
                let diff = sol.dual_y.sub(r).unwrap();
                let min = crate::matcore::min_eigenvalue(&diff, 1e-7 * (1.0 + diff.max_abs()))
                    .unwrap();
                assert!(min >= -1e-6, "trial {trial}: dual violation {min}");
            }
            // primal is a POVM
            let povm = crate::qobjects::Povm::new_unchecked(
                crate::qobjects::Povm::index_labels(n),
                sol.elements.clone(),
                DimVector(vec![d]),
            );
            povm.validate(&crate::Tolerances {
                tol_psd: 1e-7,
                tol_eq: 1e-8,
                ..Default::default()
            })
            .unwrap();
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m.set(0, 1, C64::new(1.0, 0.0));
        assert!(matches!(
            povm_subproblem(&[m], 1e-7),
            Err(Error::Contract(_))
        ));
    }
}
