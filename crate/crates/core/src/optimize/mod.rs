//! Game-value optimization.
//!
//! The game value ℘*(ρ;G) maximizes the expected payoff over local POVMs on
//! A₀A and BB₀. The bilinear maximization is attacked by alternating (see-saw)
//! optimization: each half-step is a linear POVM subproblem solved with a dual
//! certificate (see [`povm_subproblem`]), so the reported value is a certified
//! lower bound on ℘* whose per-step suboptimality is bounded by the recorded
//! gaps. The separable value ℘_sep is the same optimization with a trivial
//! shared state, and an exact brute force over deterministic strategies covers
//! conventional games.

mod subproblem;

pub use subproblem::{povm_subproblem, SubproblemSolution};

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::games::{
    expected_payoff, joint_distribution, trivial_shared_state, NonlocalGame, SemiQuantumGame,
};
use crate::matcore::{eigh, kron, partial_trace, CMatrix, DimVector};
use crate::qobjects::{random_povm, DensityMatrix, Povm};

/// Options for the see-saw optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub improve_tol: f64,
    pub gap_tol: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions {
            restarts: 20,
            max_iters: 200,
            improve_tol: 1e-9,
            gap_tol: 1e-7,
            seed: 0,
        }
    }
}

impl SeesawOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0
            || self.max_iters == 0
            || self.improve_tol <= 0.0
            || self.gap_tol <= 0.0
        {
            return Err(Error::Argument(
                "see-saw options must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a see-saw run: a certified lower bound on the game value with
/// the strategy that achieves it.
#[derive(Debug, Clone, Serialize)]
pub struct GameValueResult {
    pub value: f64,
    pub restarts_used: usize,
    pub per_restart_values: Vec<f64>,
    /// Largest dual gap reported by any POVM subproblem along the way.
    pub max_gap: f64,
    pub p_opt: Povm,
    pub q_opt: Povm,
    #[serde(skip)]
    pub iterations: usize,
    #[serde(skip)]
    pub subproblem_gaps: Vec<f64>,
    /// Payoff after each half-step of the winning restart.
    #[serde(skip)]
    pub trajectory: Vec<f64>,
}

/// See-saw optimization of ℘*(ρ;G) over local POVMs.
pub fn seesaw_value(
    g: &SemiQuantumGame,
    rho: &DensityMatrix,
    opts: &SeesawOptions,
    tols: &Tolerances,
) -> Result<GameValueResult> {
    seesaw_with_seed(g, rho, opts, None, tols)
}

/// Separable value ℘_sep(G): see-saw with a trivial shared system. A
/// discard-and-prepare map makes every separable state reach this value, so
/// the trivial state stands in for them all.
pub fn separable_value(
    g: &SemiQuantumGame,
    opts: &SeesawOptions,
    tols: &Tolerances,
) -> Result<GameValueResult> {
    seesaw_with_seed(g, &trivial_shared_state(), opts, None, tols)
}

/// See-saw with an optional caller-provided POVM for Bob used in restart 0.
pub fn seesaw_with_seed(
    g: &SemiQuantumGame,
    rho: &DensityMatrix,
    opts: &SeesawOptions,
    q_seed: Option<&Povm>,
    tols: &Tolerances,
) -> Result<GameValueResult> {
    opts.validate()?;
    g.validate(tols)?;
    if rho.dims.len() != 2 {
        return Err(Error::Argument("shared state must be bipartite".into()));
    }
    let (da, db) = (rho.dims.dims()[0], rho.dims.dims()[1]);
    let (da0, db0) = (g.dim_a0(), g.dim_b0());
    let alice_dims = DimVector(vec![da0, da]);
    let bob_dims = DimVector(vec![db, db0]);

    // τ^s ⊗ ρ ⊗ ω^t for every question pair, with weight p(s)q(t)
    let mut full = Vec::with_capacity(g.n_s() * g.n_t());
    for s in 0..g.n_s() {
        for t in 0..g.n_t() {
            let m = kron(&kron(&g.tau.states[s].mat, &rho.mat)?, &g.omega.states[t].mat)?;
            full.push((s, t, g.tau.probs[s] * g.omega.probs[t], m));
        }
    }
    let full_dims = DimVector(vec![da0, da, db, db0]);

    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut per_restart_values = Vec::with_capacity(opts.restarts);
    let mut all_gaps: Vec<f64> = Vec::new();
    let mut total_iters = 0usize;

    for restart in 0..opts.restarts {
        let q_init = if restart == 0 {
            match q_seed {
                Some(q) => q.clone(),
                None => seed_povm_bob(g, db, &bob_dims, tols)?,
            }
        } else {
            random_povm(&bob_dims, g.n_y(), opts.seed.wrapping_add(restart as u64))?
        };

        let outcome = run_restart(g, &full, &full_dims, &alice_dims, &bob_dims, q_init, opts)
            .map_err(|e| match e {
                Error::Convergence { msg, best_gap } => Error::Convergence {
                    msg: format!("restart {restart}: {msg}"),
                    best_gap,
                },
                other => other,
            })?;

        per_restart_values.push(outcome.value);
        all_gaps.extend(outcome.gaps.iter().copied());
        total_iters += outcome.iterations;

        // ties broken by lowest restart index: strictly-greater replaces
        let replace = best.as_ref().map_or(true, |(_, b)| outcome.value > b.value);
        if replace {
            best = Some((restart, outcome));
        }
    }

    let (_, winner) = best.expect("at least one restart");
    let p_opt = Povm::new_unchecked(g.x_labels.clone(), winner.p, alice_dims);
    let q_opt = Povm::new_unchecked(g.y_labels.clone(), winner.q, bob_dims);

    // report the value as actually achieved by the returned strategy
    let mu = joint_distribution(g, rho, &p_opt, &q_opt, tols)?;
    let value = expected_payoff(g, &mu)?;
    debug_assert!((value - winner.value).abs() <= 1e-7 * (1.0 + value.abs()));

    let max_gap = all_gaps.iter().copied().fold(0.0, f64::max);
    Ok(GameValueResult {
        value,
        restarts_used: opts.restarts,
        per_restart_values,
        max_gap,
        p_opt,
        q_opt,
        iterations: total_iters,
        subproblem_gaps: all_gaps,
        trajectory: winner.trajectory,
    })
}

struct RestartOutcome {
    value: f64,
    p: Vec<CMatrix>,
    q: Vec<CMatrix>,
    gaps: Vec<f64>,
    iterations: usize,
    trajectory: Vec<f64>,
}

fn run_restart(
    g: &SemiQuantumGame,
    full: &[(usize, usize, f64, CMatrix)],
    full_dims: &DimVector,
    alice_dims: &DimVector,
    bob_dims: &DimVector,
    q_init: Povm,
    opts: &SeesawOptions,
) -> Result<RestartOutcome> {
    let da0a = alice_dims.product();
    let dbb0 = bob_dims.product();
    let mut q: Vec<CMatrix> = q_init.elements;
    let mut p: Vec<CMatrix> = Vec::new();
    let mut gaps = Vec::new();
    let mut trajectory = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut value = f64::NEG_INFINITY;
    let mut iters = 0usize;

    for _ in 0..opts.max_iters {
        iters += 1;

        // Alice: R^x = Σ_{s,t,y} p q ℘ Tr_{BB₀}[(1 ⊗ Q^y) (τ^s⊗ρ⊗ω^t)]
        let mut r_alice = vec![CMatrix::zeros(da0a, da0a); g.n_x()];
        for &(s, t, w, ref m) in full {
            for (y, qy) in q.iter().enumerate() {
                let lifted = kron(&CMatrix::identity(da0a), qy)?;
                let reduced = partial_trace(&lifted.matmul(m)?, full_dims, &[0, 1])?;
                for (x, rx) in r_alice.iter_mut().enumerate() {
                    let coeff = w * g.payoff[s][t][x][y];
                    if coeff != 0.0 {
                        *rx = rx.add(&reduced.scale_re(coeff))?;
                    }
                }
            }
        }
        let r_alice: Vec<CMatrix> = r_alice.into_iter().map(|r| r.herm_part()).collect();
        let sol_a = povm_subproblem(&r_alice, opts.gap_tol)?;
        gaps.push(sol_a.gap);
        p = sol_a.elements;
        trajectory.push(sol_a.value);

        // Bob: R^y = Σ_{s,t,x} p q ℘ Tr_{A₀A}[(P^x ⊗ 1) (τ^s⊗ρ⊗ω^t)]
        let mut r_bob = vec![CMatrix::zeros(dbb0, dbb0); g.n_y()];
        for &(s, t, w, ref m) in full {
            for (x, px) in p.iter().enumerate() {
                let lifted = kron(px, &CMatrix::identity(dbb0))?;
                let reduced = partial_trace(&lifted.matmul(m)?, full_dims, &[2, 3])?;
                for (y, ry) in r_bob.iter_mut().enumerate() {
                    let coeff = w * g.payoff[s][t][x][y];
                    if coeff != 0.0 {
                        *ry = ry.add(&reduced.scale_re(coeff))?;
                    }
                }
            }
        }
        let r_bob: Vec<CMatrix> = r_bob.into_iter().map(|r| r.herm_part()).collect();
        let sol_b = povm_subproblem(&r_bob, opts.gap_tol)?;
        gaps.push(sol_b.gap);
        q = sol_b.elements;
        trajectory.push(sol_b.value);

        value = sol_b.value;
        if value - prev < opts.improve_tol && prev.is_finite() {
            break;
        }
        prev = value;
    }

    Ok(RestartOutcome {
        value,
        p,
        q,
        gaps,
        iterations: iters,
        trajectory,
    })
}

/// Deterministic "pretty good" initial POVM for Bob, built from the
/// eigenbasis of a question-weighted operator on B⊗B₀.
fn seed_povm_bob(
    g: &SemiQuantumGame,
    db: usize,
    bob_dims: &DimVector,
    tols: &Tolerances,
) -> Result<Povm> {
    let dbb0 = bob_dims.product();
    let mut m = CMatrix::zeros(dbb0, dbb0);
    for t in 0..g.n_t() {
        let lifted = kron(&CMatrix::identity(db), &g.omega.states[t].mat)?;
        m = m.add(&lifted.scale_re((t + 1) as f64 * g.omega.probs[t]))?;
    }
    let (_, vecs) = eigh(&m.herm_part(), tols.tol_herm.max(1e-9))?;
    let mut elements = vec![CMatrix::zeros(dbb0, dbb0); g.n_y()];
    for k in 0..dbb0 {
        let target = k % g.n_y();
        for i in 0..dbb0 {
            for j in 0..dbb0 {
                let v = elements[target].at(i, j) + vecs.at(i, k) * vecs.at(j, k).conj();
                elements[target].set(i, j, v);
            }
        }
    }
    Ok(Povm::new_unchecked(
        g.y_labels.clone(),
        elements,
        bob_dims.clone(),
    ))
}

/// Exact classical optimum by enumerating deterministic strategies. Shared
/// randomness cannot beat the best deterministic pair for a linear objective,
/// so this is the exact separable value of a conventional game.
pub fn brute_force_classical(g: &NonlocalGame) -> Result<f64> {
    let (ns, nt, nx, ny) = (
        g.s_labels.len(),
        g.t_labels.len(),
        g.x_labels.len(),
        g.y_labels.len(),
    );
    let count = (nx as f64).powi(ns as i32) * (ny as f64).powi(nt as i32);
    if count > 1e7 {
        return Err(Error::Size(format!(
            "deterministic strategy space {count:.3e} exceeds cap 1e7"
        )));
    }
    let total_f = (nx as u64).pow(ns as u32);
    let mut best = f64::NEG_INFINITY;
    for code in 0..total_f {
        // decode f: S -> X
        let mut f = Vec::with_capacity(ns);
        let mut c = code;
        for _ in 0..ns {
            f.push((c % nx as u64) as usize);
            c /= nx as u64;
        }
        // best response per t is independent across t
        let mut payoff = 0.0;
        for t in 0..nt {
            let mut best_y = f64::NEG_INFINITY;
            for y in 0..ny {
                let mut v = 0.0;
                for s in 0..ns {
                    v += g.p[s] * g.q[t] * g.payoff[s][t][f[s]][y];
                }
                best_y = best_y.max(v);
            }
            payoff += best_y;
        }
        best = best.max(payoff);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{embed_classical, random_semi_quantum_game};
    use crate::qobjects::werner_state;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn fast_opts(seed: u64) -> SeesawOptions {
        SeesawOptions {
            restarts: 6,
            max_iters: 100,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn brute_force_chsh() {
        let v = brute_force_classical(&NonlocalGame::chsh()).unwrap();
        assert!((v - 0.75).abs() < 1e-12);
    }

    #[test]
    fn brute_force_constant_payoff() {
        let mut g = NonlocalGame::chsh();
        for v in g.payoff.iter_mut().flatten().flatten().flatten() {
            *v = 0.4;
        }
        assert!((brute_force_classical(&g).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn brute_force_echo_game_is_perfect() {
        // payoff 1 iff x = s and y = t: players echo their questions
        let mut g = NonlocalGame::chsh();
        for (s, st) in g.payoff.iter_mut().enumerate() {
            for (t, tx) in st.iter_mut().enumerate() {
                for (x, xy) in tx.iter_mut().enumerate() {
                    for (y, v) in xy.iter_mut().enumerate() {
                        *v = if x == s && y == t { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        assert!((brute_force_classical(&g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chsh_separable_value_is_classical() {
        let sq = embed_classical(&NonlocalGame::chsh()).unwrap();
        let res = separable_value(&sq, &fast_opts(5), &tols()).unwrap();
        assert!((res.value - 0.75).abs() < 1e-6, "value {}", res.value);
        assert!(res.max_gap <= 1e-7);
    }

    #[test]
    fn chsh_with_singlet_beats_classical() {
        let sq = embed_classical(&NonlocalGame::chsh()).unwrap();
        let singlet = werner_state(1.0).unwrap();
        let res = seesaw_value(&sq, &singlet, &fast_opts(7), &tols()).unwrap();
        let tsirelson = (2.0 + 2.0f64.sqrt()) / 4.0;
        assert!(
            res.value >= tsirelson - 1e-4,
            "value {} below {}",
            res.value,
            tsirelson
        );
        assert!(res.value <= tsirelson + 1e-6);
        assert!(res.max_gap <= 1e-7);
    }

    #[test]
    fn chsh_with_maximally_mixed_stays_classical() {
        let sq = embed_classical(&NonlocalGame::chsh()).unwrap();
        let mixed = werner_state(0.0).unwrap();
        let res = seesaw_value(&sq, &mixed, &fast_opts(3), &tols()).unwrap();
        assert!((res.value - 0.75).abs() < 1e-6, "value {}", res.value);
    }

    #[test]
    fn constant_game_converges_immediately() {
        let g = {
            let mut g = random_semi_quantum_game(2, 2, 9).unwrap();
            for v in g.payoff.iter_mut().flatten().flatten().flatten() {
                *v = 1.7;
            }
            g
        };
        let rho = werner_state(0.5).unwrap();
        let res = seesaw_value(
            &g,
            &rho,
            &SeesawOptions {
                restarts: 1,
                ..fast_opts(1)
            },
            &tols(),
        )
        .unwrap();
        assert!((res.value - 1.7).abs() < 1e-9);
        assert!((res.trajectory[0] - 1.7).abs() < 1e-9);
    }

    #[test]
    fn trajectory_is_monotone() {
        let g = random_semi_quantum_game(4, 2, 11).unwrap();
        let rho = werner_state(0.9).unwrap();
        let res = seesaw_value(&g, &rho, &fast_opts(2), &tols()).unwrap();
        for w in res.trajectory.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "trajectory decreased: {:?}", w);
        }
    }

    #[test]
    fn state_never_hurts() {
        let g = random_semi_quantum_game(3, 2, 13).unwrap();
        let rho = werner_state(0.7).unwrap();
        let with_state = seesaw_value(&g, &rho, &fast_opts(4), &tols()).unwrap();
        let sep = separable_value(&g, &fast_opts(4), &tols()).unwrap();
        assert!(with_state.value >= sep.value - 1e-6);
    }

    #[test]
    fn scale_equivariance() {
        let g = random_semi_quantum_game(2, 2, 15).unwrap();
        let mut g2 = g.clone();
        let lambda = 3.5;
        for v in g2.payoff.iter_mut().flatten().flatten().flatten() {
            *v *= lambda;
        }
        let rho = werner_state(0.8).unwrap();
        let r1 = seesaw_value(&g, &rho, &fast_opts(6), &tols()).unwrap();
        let r2 = seesaw_value(&g2, &rho, &fast_opts(6), &tols()).unwrap();
        assert!(
            (r2.value - lambda * r1.value).abs() < 1e-9 * (1.0 + r2.value.abs()),
            "{} vs {}",
            r2.value,
            lambda * r1.value
        );
    }

    #[test]
    fn separable_value_matches_brute_force_on_random_classical_games() {
        let mut rng = crate::qobjects::rng_from_seed(99);
        use rand::Rng;
        for trial in 0..3 {
            let mut g = NonlocalGame::chsh();
            for v in g.payoff.iter_mut().flatten().flatten().flatten() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let exact = brute_force_classical(&g).unwrap();
            let sq = embed_classical(&g).unwrap();
            let sep = separable_value(&sq, &fast_opts(trial as u64), &tols()).unwrap();
            assert!(
                (sep.value - exact).abs() < 1e-6,
                "trial {trial}: seesaw {} vs exact {}",
                sep.value,
                exact
            );
        }
    }
}
