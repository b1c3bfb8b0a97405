//! Game definitions and payoff evaluation for fixed strategies.
//!
//! A semi-quantum game sends quantum question states τ^s, ω^t from two
//! ensembles; a conventional game is the special case of perfectly
//! distinguishable question states. The joint conditional distribution for a
//! shared state ρ and local POVMs (P, Q) is
//! μ(x,y|s,t) = Tr[(P^x ⊗ Q^y)(τ^s ⊗ ρ ⊗ ω^t)], and the expected payoff is
//! Σ p(s) q(t) ℘(s,t,x,y) μ(x,y|s,t).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matcore::{kron, CMatrix, DimVector};
use crate::qobjects::{check_distribution, rng_from_seed, DensityMatrix, Ensemble, Povm};

/// Payoff tensor indexed `[s][t][x][y]`.
pub type PayoffTensor = Vec<Vec<Vec<Vec<f64>>>>;

/// Semi-quantum nonlocal game: quantum question ensembles and a payoff tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiQuantumGame {
    pub s_labels: Vec<String>,
    pub t_labels: Vec<String>,
    pub x_labels: Vec<String>,
    pub y_labels: Vec<String>,
    pub tau: Ensemble,
    pub omega: Ensemble,
    pub payoff: PayoffTensor,
}

/// Conventional nonlocal game with classical questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalGame {
    pub s_labels: Vec<String>,
    pub t_labels: Vec<String>,
    pub x_labels: Vec<String>,
    pub y_labels: Vec<String>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub payoff: PayoffTensor,
}

/// Joint conditional probabilities μ(x,y|s,t), stored `values[x][y][s][t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalDistribution {
    pub values: Vec<Vec<Vec<Vec<f64>>>>,
}

impl ConditionalDistribution {
    pub fn get(&self, x: usize, y: usize, s: usize, t: usize) -> f64 {
        self.values[x][y][s][t]
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        let nx = self.values.len();
        let ny = self.values.first().map_or(0, |v| v.len());
        let ns = self
            .values
            .first()
            .and_then(|v| v.first())
            .map_or(0, |v| v.len());
        let nt = self
            .values
            .first()
            .and_then(|v| v.first())
            .and_then(|v| v.first())
            .map_or(0, |v| v.len());
        (nx, ny, ns, nt)
    }

    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        let (nx, ny, ns, nt) = self.shape();
        for s in 0..ns {
            for t in 0..nt {
                let mut total = 0.0;
                for x in 0..nx {
                    for y in 0..ny {
                        let v = self.get(x, y, s, t);
                        if v < -tols.tol_eq {
                            return Err(Error::Contract(format!(
                                "μ({x},{y}|{s},{t}) = {v} is negative"
                            )));
                        }
                        total += v;
                    }
                }
                if (total - 1.0).abs() > tols.tol_eq {
                    return Err(Error::Contract(format!(
                        "μ(.|{s},{t}) sums to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_payoff_shape(
    payoff: &PayoffTensor,
    ns: usize,
    nt: usize,
    nx: usize,
    ny: usize,
) -> Result<()> {
    if payoff.len() != ns
        || payoff.iter().any(|t| t.len() != nt)
        || payoff
            .iter()
            .flatten()
            .any(|x| x.len() != nx || x.iter().any(|y| y.len() != ny))
    {
        return Err(Error::Argument("payoff tensor shape mismatch".into()));
    }
    if payoff
        .iter()
        .flatten()
        .flatten()
        .flatten()
        .any(|v| !v.is_finite())
    {
        return Err(Error::Argument("non-finite payoff entry".into()));
    }
    Ok(())
}

impl SemiQuantumGame {
    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        self.tau.validate(tols)?;
        self.omega.validate(tols)?;
        if self.tau.len() != self.s_labels.len() || self.omega.len() != self.t_labels.len() {
            return Err(Error::Argument(
                "ensemble sizes do not match question label sets".into(),
            ));
        }
        check_payoff_shape(
            &self.payoff,
            self.s_labels.len(),
            self.t_labels.len(),
            self.x_labels.len(),
            self.y_labels.len(),
        )
    }

    pub fn n_s(&self) -> usize {
        self.s_labels.len()
    }
    pub fn n_t(&self) -> usize {
        self.t_labels.len()
    }
    pub fn n_x(&self) -> usize {
        self.x_labels.len()
    }
    pub fn n_y(&self) -> usize {
        self.y_labels.len()
    }

    /// Question-system dimension on Alice's side (A₀).
    pub fn dim_a0(&self) -> usize {
        self.tau.side()
    }

    /// Question-system dimension on Bob's side (B₀).
    pub fn dim_b0(&self) -> usize {
        self.omega.side()
    }
}

impl NonlocalGame {
    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        check_distribution(&self.p, tols.tol_eq)?;
        check_distribution(&self.q, tols.tol_eq)?;
        if self.p.len() != self.s_labels.len() || self.q.len() != self.t_labels.len() {
            return Err(Error::Argument(
                "probability vectors do not match question label sets".into(),
            ));
        }
        check_payoff_shape(
            &self.payoff,
            self.s_labels.len(),
            self.t_labels.len(),
            self.x_labels.len(),
            self.y_labels.len(),
        )
    }

    /// The CHSH game: uniform binary questions, win (payoff 1) iff x⊕y = s·t.
    pub fn chsh() -> NonlocalGame {
        let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        let mut payoff = vec![vec![vec![vec![0.0; 2]; 2]; 2]; 2];
        for s in 0..2 {
            for t in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        if x ^ y == s & t {
                            payoff[s][t][x][y] = 1.0;
                        }
                    }
                }
            }
        }
        NonlocalGame {
            s_labels: labels(2),
            t_labels: labels(2),
            x_labels: labels(2),
            y_labels: labels(2),
            p: vec![0.5, 0.5],
            q: vec![0.5, 0.5],
            payoff,
        }
    }
}

/// Embed a conventional game as a semi-quantum game with orthonormal question
/// states |s><s| on a |𝒮|-dimensional question system (and similarly for t).
pub fn embed_classical(g: &NonlocalGame) -> Result<SemiQuantumGame> {
    let basis_ensemble = |labels: &[String], probs: &[f64]| -> Result<Ensemble> {
        let d = labels.len();
        let states = (0..d)
            .map(|i| {
                let proj = CMatrix::projector_from_ket(&CMatrix::basis_ket(d, i))?;
                Ok(DensityMatrix::new_unchecked(proj, DimVector(vec![d])))
            })
            .collect::<Result<_>>()?;
        Ok(Ensemble {
            labels: labels.to_vec(),
            probs: probs.to_vec(),
            states,
        })
    };
    Ok(SemiQuantumGame {
        s_labels: g.s_labels.clone(),
        t_labels: g.t_labels.clone(),
        x_labels: g.x_labels.clone(),
        y_labels: g.y_labels.clone(),
        tau: basis_ensemble(&g.s_labels, &g.p)?,
        omega: basis_ensemble(&g.t_labels, &g.q)?,
        payoff: g.payoff.clone(),
    })
}

/// μ(x,y|s,t) = Tr[(P^x ⊗ Q^y)(τ^s ⊗ ρ ⊗ ω^t)] for a shared state on A⊗B,
/// Alice measuring A₀⊗A and Bob measuring B⊗B₀.
///
/// Negative entries within -tol_eq (eigensolver round-off) are clamped to 0;
/// larger negativity is an error.
pub fn joint_distribution(
    g: &SemiQuantumGame,
    rho: &DensityMatrix,
    p_povm: &Povm,
    q_povm: &Povm,
    tols: &Tolerances,
) -> Result<ConditionalDistribution> {
    if rho.dims.len() != 2 {
        return Err(Error::Argument("shared state must be bipartite".into()));
    }
    let (da, db) = (rho.dims.dims()[0], rho.dims.dims()[1]);
    let (da0, db0) = (g.dim_a0(), g.dim_b0());
    if p_povm.side() != da0 * da || q_povm.side() != db * db0 {
        return Err(Error::Argument(format!(
            "POVM sides {}x{} do not compose with A₀A = {} and BB₀ = {}",
            p_povm.side(),
            q_povm.side(),
            da0 * da,
            db * db0
        )));
    }
    if p_povm.labels != g.x_labels || q_povm.labels != g.y_labels {
        return Err(Error::Argument(
            "POVM outcome labels do not match the game's answer sets".into(),
        ));
    }

    let (ns, nt, nx, ny) = (g.n_s(), g.n_t(), g.n_x(), g.n_y());
    let mut values = vec![vec![vec![vec![0.0; nt]; ns]; ny]; nx];
    for s in 0..ns {
        let tau_s = &g.tau.states[s].mat;
        for t in 0..nt {
            let omega_t = &g.omega.states[t].mat;
            let full = kron(&kron(tau_s, &rho.mat)?, omega_t)?;
            for x in 0..nx {
                for y in 0..ny {
                    let op = kron(&p_povm.elements[x], &q_povm.elements[y])?;
                    let tr = op.matmul(&full)?.trace();
                    let mut v = tr.re;
                    if v < 0.0 {
                        if v < -tols.tol_eq {
                            return Err(Error::Contract(format!(
                                "μ({x},{y}|{s},{t}) = {v} below -tol_eq"
                            )));
                        }
                        v = 0.0;
                    }
                    values[x][y][s][t] = v;
                }
            }
        }
    }
    Ok(ConditionalDistribution { values })
}

/// Expected payoff Σ p(s) q(t) ℘(s,t,x,y) μ(x,y|s,t), summed in fixed
/// lexicographic (s,t,x,y) order for reproducibility.
pub fn expected_payoff(g: &SemiQuantumGame, mu: &ConditionalDistribution) -> Result<f64> {
    let (nx, ny, ns, nt) = mu.shape();
    if (ns, nt, nx, ny) != (g.n_s(), g.n_t(), g.n_x(), g.n_y()) {
        return Err(Error::Argument(format!(
            "distribution shape ({ns},{nt},{nx},{ny}) does not match game"
        )));
    }
    let mut total = 0.0;
    for s in 0..ns {
        for t in 0..nt {
            let w = g.tau.probs[s] * g.omega.probs[t];
            for x in 0..nx {
                for y in 0..ny {
                    total += w * g.payoff[s][t][x][y] * mu.get(x, y, s, t);
                }
            }
        }
    }
    Ok(total)
}

/// Seeded random semi-quantum game: qubit question systems, random pure
/// question states, uniform question probabilities, signed payoffs in [-1,1].
pub fn random_semi_quantum_game(
    n_questions: usize,
    n_answers: usize,
    seed: u64,
) -> Result<SemiQuantumGame> {
    let mut rng = rng_from_seed(seed);
    let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
    let mut ensemble = |n: usize| -> Result<Ensemble> {
        let states = (0..n)
            .map(|_| {
                let ket = crate::qobjects::random_pure_ket(&mut rng, 2);
                Ok(DensityMatrix::new_unchecked(
                    CMatrix::projector_from_ket(&ket)?,
                    DimVector(vec![2]),
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Ensemble {
            labels: labels(n),
            probs: vec![1.0 / n as f64; n],
            states,
        })
    };
    let tau = ensemble(n_questions)?;
    let omega = ensemble(n_questions)?;
    let mut payoff = vec![vec![vec![vec![0.0; n_answers]; n_answers]; n_questions]; n_questions];
    for row in payoff.iter_mut().flatten().flatten().flatten() {
        *row = rng.gen_range(-1.0..1.0);
    }
    Ok(SemiQuantumGame {
        s_labels: labels(n_questions),
        t_labels: labels(n_questions),
        x_labels: labels(n_answers),
        y_labels: labels(n_answers),
        tau,
        omega,
        payoff,
    })
}

/// Trivial one-dimensional shared state, used to evaluate separable values.
pub fn trivial_shared_state() -> DensityMatrix {
    DensityMatrix::new_unchecked(CMatrix::identity(1), DimVector(vec![1, 1]))
}
