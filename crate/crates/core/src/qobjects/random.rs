//! Seeded samplers for states, POVMs, and channels.
//!
//! Every sampler is a deterministic function of its parameters and an explicit
//! 64-bit seed (or an already-seeded generator); the same seed produces
//! bit-identical output.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DensityMatrix, KrausChannel, LosrMap, LosrPair, Povm};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matcore::{kron, pinv_sqrt, CMatrix, DimVector, C64};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian via Box-Muller.
fn gaussian_c64(rng: &mut impl Rng) -> C64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    // scaled so that E|z|^2 = 1
    C64::new(
        r * phi.cos() * std::f64::consts::FRAC_1_SQRT_2,
        r * phi.sin() * std::f64::consts::FRAC_1_SQRT_2,
    )
}

/// Matrix of iid standard complex Gaussians.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols).map(|_| gaussian_c64(rng)).collect();
    CMatrix::new(rows, cols, data).expect("finite Gaussian samples")
}

/// Random density matrix of the given rank: GG†/Tr[GG†] with Ginibre G.
pub fn random_state(dims: &DimVector, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let side = dims.product();
    if rank < 1 || rank > side {
        return Err(Error::Argument(format!(
            "rank {rank} infeasible for side {side}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let g = ginibre(&mut rng, side, rank);
    let gg = g.matmul(&g.dagger())?;
    let tr = gg.trace().re;
    Ok(DensityMatrix::new_unchecked(
        gg.scale_re(1.0 / tr),
        dims.clone(),
    ))
}

/// Random POVM: PSD blocks Gᵏ conjugated by S^{-1/2} with S = Σ Gᵏ.
pub fn random_povm(dims: &DimVector, n_outcomes: usize, seed: u64) -> Result<Povm> {
    if n_outcomes < 1 {
        return Err(Error::Argument("POVM needs at least one outcome".into()));
    }
    let mut rng = rng_from_seed(seed);
    random_povm_with(&mut rng, dims, n_outcomes)
}

pub(crate) fn random_povm_with(
    rng: &mut impl Rng,
    dims: &DimVector,
    n_outcomes: usize,
) -> Result<Povm> {
    let side = dims.product();
    let blocks: Vec<CMatrix> = (0..n_outcomes)
        .map(|_| {
            let a = ginibre(rng, side, side);
            a.matmul(&a.dagger())
        })
        .collect::<Result<_>>()?;
    let mut s = CMatrix::zeros(side, side);
    for b in &blocks {
        s = s.add(b)?;
    }
    let si = pinv_sqrt(&s, 1e-8, 1e-12)?;
    let mut elements: Vec<CMatrix> = blocks
        .iter()
        .map(|b| Ok(si.matmul(b)?.matmul(&si)?.herm_part()))
        .collect::<Result<_>>()?;
    // distribute any support defect of S uniformly (S is full rank a.s.)
    let mut sum = CMatrix::zeros(side, side);
    for e in &elements {
        sum = sum.add(e)?;
    }
    let defect = CMatrix::identity(side).sub(&sum)?;
    if defect.max_abs() > 1e-14 {
        let share = defect.scale_re(1.0 / n_outcomes as f64);
        for e in &mut elements {
            *e = e.add(&share)?;
        }
    }
    Ok(Povm::new_unchecked(
        Povm::index_labels(n_outcomes),
        elements,
        dims.clone(),
    ))
}

/// Random pure state as a normalized column vector.
pub fn random_pure_ket(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let mut ket = ginibre(rng, dim, 1);
    let norm: f64 = ket.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    ket = ket.scale_re(1.0 / norm);
    ket
}

/// Random product state |a><a| ⊗ |b><b| on d_a ⊗ d_b.
pub fn random_product_state(rng: &mut impl Rng, d_a: usize, d_b: usize) -> Result<DensityMatrix> {
    let a = CMatrix::projector_from_ket(&random_pure_ket(rng, d_a))?;
    let b = CMatrix::projector_from_ket(&random_pure_ket(rng, d_b))?;
    Ok(DensityMatrix::new_unchecked(
        kron(&a, &b)?,
        DimVector(vec![d_a, d_b]),
    ))
}

/// Random CPTP map from a Haar-style random isometry (Gram-Schmidt on Ginibre
/// columns), split into `n_kraus` Kraus blocks.
pub fn random_kraus_channel(
    rng: &mut impl Rng,
    d_in: usize,
    d_out: usize,
    n_kraus: usize,
) -> Result<KrausChannel> {
    if d_in < 1 || d_out < 1 || n_kraus < 1 || d_out * n_kraus < d_in {
        return Err(Error::Argument(format!(
            "infeasible channel dims: {d_in} -> {d_out} with {n_kraus} Kraus ops"
        )));
    }
    let total = d_out * n_kraus;
    let g = ginibre(rng, total, d_in);
    // orthonormalize the d_in columns (modified Gram-Schmidt)
    let mut cols: Vec<Vec<C64>> = (0..d_in)
        .map(|j| (0..total).map(|i| g.at(i, j)).collect())
        .collect();
    for j in 0..d_in {
        for k in 0..j {
            let dot: C64 = cols[k]
                .iter()
                .zip(&cols[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            for i in 0..total {
                let v = cols[k][i] * dot;
                cols[j][i] -= v;
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Construction("rank-deficient Ginibre draw".into()));
        }
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    let mut ops = Vec::with_capacity(n_kraus);
    for e in 0..n_kraus {
        let mut k = CMatrix::zeros(d_out, d_in);
        for o in 0..d_out {
            for (j, col) in cols.iter().enumerate() {
                k.set(o, j, col[e * d_out + o]);
            }
        }
        ops.push(k);
    }
    Ok(KrausChannel { kraus_ops: ops })
}

/// Random LOSR map with `n_terms` channel pairs.
pub fn random_losr(
    dims_in: &DimVector,
    dims_out: &DimVector,
    n_terms: usize,
    seed: u64,
) -> Result<LosrMap> {
    if dims_in.len() != 2 || dims_out.len() != 2 || n_terms < 1 {
        return Err(Error::Argument(
            "random_losr needs bipartite dims and n_terms >= 1".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let raw: Vec<f64> = (0..n_terms).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let (da, db) = (dims_in.dims()[0], dims_in.dims()[1]);
    let (da2, db2) = (dims_out.dims()[0], dims_out.dims()[1]);
    let pairs: Vec<LosrPair> = (0..n_terms)
        .map(|_| {
            Ok(LosrPair {
                a_kraus: random_kraus_channel(&mut rng, da, da2, 2.max(da.div_ceil(da2)))?,
                b_kraus: random_kraus_channel(&mut rng, db, db2, 2.max(db.div_ceil(db2)))?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LosrMap { weights, pairs })
}

/// First NPT two-qubit state found along a deterministic seed-derived scan.
pub fn random_npt_two_qubit(seed: u64, tols: &Tolerances) -> Result<DensityMatrix> {
    let dims = DimVector(vec![2, 2]);
    for k in 0..1000u64 {
        let rank = 1 + (k % 2) as usize;
        let rho = random_state(&dims, rank, seed.wrapping_add(k.wrapping_mul(0x9e37_79b9)))?;
        if super::ppt_entangled(&rho, tols)?.flag {
            return Ok(rho);
        }
    }
    Err(Error::Construction(
        "no NPT state found in 1000 draws (should not happen)".into(),
    ))
}
