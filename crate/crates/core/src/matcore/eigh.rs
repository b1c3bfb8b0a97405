//! Hermitian eigendecomposition via cyclic Jacobi rotations.
//!
//! Deterministic and dependency-free; accurate for the small matrices this
//! crate works with (side <= the Kronecker cap). Complex off-diagonal entries
//! are phased to real before the classic symmetric Jacobi rotation is applied.

use num_complex::Complex;

use super::{CMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// columns of a unitary matrix, so that `h = V diag(λ) V†`.
pub fn eigh(h: &CMatrix, tol_herm: f64) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_square() {
        return Err(Error::Argument("eigh needs a square matrix".into()));
    }
    if h.herm_defect() > tol_herm {
        return Err(Error::Contract(format!(
            "eigh input is not Hermitian: max |h - h†| = {:.3e} > {:.3e}",
            h.herm_defect(),
            tol_herm
        )));
    }
    let n = h.rows();
    let mut a = h.herm_part();
    let mut v = CMatrix::identity(n);

    let scale = a.max_abs().max(1.0);
    let stop = 1e-15 * scale;

    for _ in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.at(p, q).norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                let r = apq.norm();
                if r <= stop * 1e-2 {
                    continue;
                }
                let phase = apq / r;
                let app = a.at(p, p).re;
                let aqq = a.at(q, q).re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // U on the (p,q) plane: U = D(phase) * R(c,s)
                let u_pp = Complex::new(c, 0.0);
                let u_pq = Complex::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                rotate(&mut a, &mut v, p, q, u_pp, u_pq, u_qp, u_qq);
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a.at(i, i).re, i)).collect();
    // descending by eigenvalue; index tiebreak for determinism
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));

    let eigenvalues: Vec<f64> = pairs.iter().map(|&(l, _)| l).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new_col, v.at(row, old_col));
        }
    }
    Ok((eigenvalues, vectors))
}

/// A <- U† A U and V <- V U, with U nontrivial only on the (p,q) plane.
#[allow(clippy::too_many_arguments)]
fn rotate(
    a: &mut CMatrix,
    v: &mut CMatrix,
    p: usize,
    q: usize,
    u_pp: C64,
    u_pq: C64,
    u_qp: C64,
    u_qq: C64,
) {
    let n = a.rows();
    // columns: A <- A U
    for i in 0..n {
        let aip = a.at(i, p);
        let aiq = a.at(i, q);
        a.set(i, p, aip * u_pp + aiq * u_qp);
        a.set(i, q, aip * u_pq + aiq * u_qq);
    }
    // rows: A <- U† A
    for j in 0..n {
        let apj = a.at(p, j);
        let aqj = a.at(q, j);
        a.set(p, j, u_pp.conj() * apj + u_qp.conj() * aqj);
        a.set(q, j, u_pq.conj() * apj + u_qq.conj() * aqj);
    }
    for i in 0..n {
        let vip = v.at(i, p);
        let viq = v.at(i, q);
        v.set(i, p, vip * u_pp + viq * u_qp);
        v.set(i, q, vip * u_pq + viq * u_qq);
    }
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &CMatrix, tol_herm: f64) -> Result<f64> {
    let (vals, _) = eigh(h, tol_herm)?;
    Ok(*vals.last().expect("non-empty spectrum"))
}

/// True iff min eigenvalue >= -tol.
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::Argument("is_psd needs a square matrix".into()));
    }
    // reuse tol as the hermiticity gate: a matrix far from Hermitian is not PSD
    if !m.is_hermitian(tol.max(1e-12)) {
        return Ok(false);
    }
    Ok(min_eigenvalue(m, tol.max(1e-12))? >= -tol)
}

/// Apply a real function to the spectrum: V f(λ) V†.
pub fn hermitian_function(h: &CMatrix, tol_herm: f64, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (vals, vecs) = eigh(h, tol_herm)?;
    let n = h.rows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        let fl = f(l);
        if fl == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                let v = out.at(i, j) + vecs.at(i, k) * vecs.at(j, k).conj() * fl;
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// PSD square root; small negative eigenvalues are clamped to zero.
pub fn psd_sqrt(h: &CMatrix, tol_herm: f64) -> Result<CMatrix> {
    hermitian_function(h, tol_herm, |l| if l > 0.0 { l.sqrt() } else { 0.0 })
}

/// Pseudo-inverse square root on the support (eigenvalues above `cutoff`).
pub fn pinv_sqrt(h: &CMatrix, tol_herm: f64, cutoff: f64) -> Result<CMatrix> {
    hermitian_function(
        h,
        tol_herm,
        |l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 },
    )
}
