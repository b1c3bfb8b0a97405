//! Dense complex-matrix kernel.
//!
//! Row-major `CMatrix` over `Complex<f64>` with the handful of operations the
//! rest of the crate needs: products, Kronecker products, partial traces and
//! transposes, Hermitian eigendecomposition (cyclic Jacobi, see [`eigh`]),
//! and tolerance-aware predicates. Everything here is a pure function of its
//! inputs; matrices are immutable after construction from the caller's point
//! of view.

mod eigh;
mod json;

use num_complex::Complex;

use crate::config::SIDE_CAP;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Ordered subsystem dimensions of a composite system.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct DimVector(pub Vec<usize>);

impl DimVector {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Argument(format!(
                "subsystem dimensions must be positive and non-empty, got {dims:?}"
            )));
        }
        Ok(DimVector(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn product(&self) -> usize {
        self.0.iter().product()
    }

    /// Check compatibility with a square operator of side `side`.
    pub fn check_side(&self, side: usize) -> Result<()> {
        if self.product() != side {
            return Err(Error::Argument(format!(
                "dims {:?} (product {}) do not match matrix side {}",
                self.0,
                self.product(),
                side
            )));
        }
        Ok(())
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!(
                "entry count {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("non-finite matrix entry".into()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, C64::new(v, 0.0));
        }
        m
    }

    /// Build from rows of (re, im) pairs; convenience for tests and literals.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Argument("ragged rows".into()));
        }
        CMatrix::new(r, c, rows.iter().flatten().copied().collect())
    }

    /// Column vector |j> in dimension `n`.
    pub fn basis_ket(n: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(n, 1);
        m.set(j, 0, C64::new(1.0, 0.0));
        m
    }

    /// Rank-1 projector |v><v| / <v|v> from a column vector.
    pub fn projector_from_ket(ket: &CMatrix) -> Result<Self> {
        if ket.cols != 1 {
            return Err(Error::Argument("expected a column vector".into()));
        }
        let norm2: f64 = ket.data.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::Argument("zero vector has no projector".into()));
        }
        let n = ket.rows;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, ket.at(i, 0) * ket.at(j, 0).conj() / norm2);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, f: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * f).collect(),
        }
    }

    pub fn scale_re(&self, f: f64) -> CMatrix {
        self.scale(C64::new(f, 0.0))
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::Argument(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.at(i, j) + a * other.at(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.at(i, i)).sum()
    }

    /// Hermitian part (m + m†)/2; only valid for square matrices.
    pub fn herm_part(&self) -> CMatrix {
        debug_assert!(self.is_square());
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, (self.at(i, j) + self.at(j, i).conj()) * 0.5);
            }
        }
        out
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-abs of m - m†.
    pub fn herm_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.herm_defect() <= tol
    }

    fn check_same_shape(&self, other: &CMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Argument(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

/// Kronecker product; subsystem dimensions multiply.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    if rows > SIDE_CAP || cols > SIDE_CAP {
        return Err(Error::Size(format!(
            "kron result {rows}x{cols} exceeds side cap {SIDE_CAP}"
        )));
    }
    let mut out = CMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let f = a.at(i, j);
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.set(i * b.rows + k, j * b.cols + l, f * b.at(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a slice of factors, left to right.
pub fn kron_all(ms: &[&CMatrix]) -> Result<CMatrix> {
    let mut it = ms.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::Argument("kron_all of empty list".into()))?;
    let mut acc = (*first).clone();
    for m in it {
        acc = kron(&acc, m)?;
    }
    Ok(acc)
}

/// Trace out all subsystems not listed in `keep`; kept subsystems stay in
/// their original relative order. Preserves the total trace.
pub fn partial_trace(m: &CMatrix, dims: &DimVector, keep: &[usize]) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Argument("partial_trace needs a square matrix".into()));
    }
    dims.check_side(m.rows())?;
    let n_sub = dims.len();
    if keep.iter().any(|&k| k >= n_sub) {
        return Err(Error::Argument(format!(
            "keep indices {keep:?} out of range for {n_sub} subsystems"
        )));
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..n_sub).filter(|i| !keep_sorted.contains(i)).collect();

    let d = dims.dims();
    let kept_dim: usize = keep_sorted.iter().map(|&i| d[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| d[i]).product();

    // strides of each subsystem index in the flattened row/col index
    let mut strides = vec![1usize; n_sub];
    for i in (0..n_sub.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * d[i + 1];
    }

    let unrank = |mut x: usize, subs: &[usize]| -> usize {
        // map a rank over the listed subsystems to a full flat offset
        let mut offset = 0usize;
        for &s in subs.iter().rev() {
            offset += (x % d[s]) * strides[s];
            x /= d[s];
        }
        offset
    };

    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for kr in 0..kept_dim {
        let base_r = unrank(kr, &keep_sorted);
        for kc in 0..kept_dim {
            let base_c = unrank(kc, &keep_sorted);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_dim {
                let off = unrank(t, &traced);
                acc += m.at(base_r + off, base_c + off);
            }
            out.set(kr, kc, acc);
        }
    }
    Ok(out)
}

/// Transpose subsystem `which` of a bipartite (or multipartite) operator.
pub fn partial_transpose(m: &CMatrix, dims: &DimVector, which: usize) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Argument(
            "partial_transpose needs a square matrix".into(),
        ));
    }
    dims.check_side(m.rows())?;
    let n_sub = dims.len();
    if which >= n_sub {
        return Err(Error::Argument(format!(
            "subsystem {which} out of range for {n_sub} subsystems"
        )));
    }
    let d = dims.dims();
    let mut strides = vec![1usize; n_sub];
    for i in (0..n_sub.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * d[i + 1];
    }
    let side = m.rows();
    let mut out = CMatrix::zeros(side, side);
    for r in 0..side {
        let r_w = (r / strides[which]) % d[which];
        for c in 0..side {
            let c_w = (c / strides[which]) % d[which];
            // swap the `which` component of row and column indices
            let r2 = r - r_w * strides[which] + c_w * strides[which];
            let c2 = c - c_w * strides[which] + r_w * strides[which];
            out.set(r2, c2, m.at(r, c));
        }
    }
    Ok(out)
}

/// Hilbert-Schmidt inner product Tr[a† b].
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Argument("hs_inner shape mismatch".into()));
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

pub use eigh::{eigh, hermitian_function, is_psd, min_eigenvalue, pinv_sqrt, psd_sqrt};
