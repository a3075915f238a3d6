use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::{digits_to_index, index_to_digits, BipartitionLayout};
use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type Cpx = Complex64;

pub const HERMITICITY_TOL: f64 = 1e-10;

/// Dense Hermitian operator on an n-copy bipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMat,
    layout: BipartitionLayout,
}

impl HermitianOperator {
    /// Wrap a matrix, checking Hermiticity to a relative tolerance.
    pub fn new(mat: CMat, layout: BipartitionLayout) -> Result<Self> {
        if mat.nrows() != layout.total_dim() || mat.ncols() != layout.total_dim() {
            return Err(Error::LayoutMismatch(format!(
                "matrix is {}x{}, layout dimension is {}",
                mat.nrows(),
                mat.ncols(),
                layout.total_dim()
            )));
        }
        let scale = mat.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
        let mut dev = 0.0_f64;
        for i in 0..mat.nrows() {
            for j in i..mat.ncols() {
                dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if dev > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian(dev / scale));
        }
        Ok(Self { mat, layout })
    }

    /// Wrap without checking; for internal constructions that are Hermitian
    /// by algebra (sums, conjugations, spectral synthesis).
    pub(crate) fn new_unchecked(mat: CMat, layout: BipartitionLayout) -> Self {
        Self { mat, layout }
    }

    pub fn identity(layout: BipartitionLayout) -> Self {
        let d = layout.total_dim();
        Self::new_unchecked(CMat::identity(d, d), layout)
    }

    pub fn zeros(layout: BipartitionLayout) -> Self {
        let d = layout.total_dim();
        Self::new_unchecked(CMat::zeros(d, d), layout)
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn layout(&self) -> BipartitionLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// Real Hilbert-Schmidt inner product tr(X Y) of two Hermitian operators.
    pub fn inner(&self, other: &Self) -> f64 {
        let mut acc = Cpx::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        acc.re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new_unchecked(&self.mat * Cpx::new(s, 0.0), self.layout)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self::new_unchecked(&self.mat + &other.mat, self.layout))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self::new_unchecked(&self.mat - &other.mat, self.layout))
    }

    pub fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    /// Kronecker product with layout concatenation.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.tensor_with(&other.layout)?;
        // Kronecker of interleaved blocks is not itself interleaved: the
        // factor order comes out A1B1..AnBn A'1B'1..; regroup to the
        // canonical interleaved order of the concatenated layout, which is
        // the same thing. Concatenation keeps interleaving, so plain
        // Kronecker is already canonical.
        Ok(Self::new_unchecked(self.mat.kronecker(&other.mat), layout))
    }

    /// n-fold tensor power.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("tensor power requires n >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// Partial transpose over all B factors. Trace-preserving involution.
    pub fn partial_transpose(&self) -> Self {
        Self::new_unchecked(
            partial_transpose_matrix(&self.mat, &self.layout),
            self.layout,
        )
    }
}

/// Partial transpose of a raw matrix for the given layout: swaps the B-factor
/// digits between row and column indices.
pub fn partial_transpose_matrix(mat: &CMat, layout: &BipartitionLayout) -> CMat {
    let dims = layout.factor_dims();
    let nf = dims.len();
    let d = mat.nrows();
    let mut out = CMat::zeros(d, d);
    let mut rd = vec![0usize; nf];
    let mut cd = vec![0usize; nf];
    for r in 0..d {
        for c in 0..d {
            index_to_digits(r, &dims, &mut rd);
            index_to_digits(c, &dims, &mut cd);
            // B factors sit at odd positions in the interleaved order.
            for k in (1..nf).step_by(2) {
                std::mem::swap(&mut rd[k], &mut cd[k]);
            }
            let r2 = digits_to_index(&rd, &dims);
            let c2 = digits_to_index(&cd, &dims);
            out[(r2, c2)] = mat[(r, c)];
        }
    }
    out
}

/// Reorder tensor factors: `perm[k]` is the old position of the factor that
/// lands at new position k. Returns P X P^dagger as a raw matrix.
pub fn reorder_factors(mat: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let d = mat.nrows();
    let nf = dims.len();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    // map old flat index -> new flat index
    let mut map = vec![0usize; d];
    let mut digits = vec![0usize; nf];
    let mut new_digits = vec![0usize; nf];
    for idx in 0..d {
        index_to_digits(idx, dims, &mut digits);
        for k in 0..nf {
            new_digits[k] = digits[perm[k]];
        }
        map[idx] = digits_to_index(&new_digits, &new_dims);
    }
    let mut out = CMat::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            out[(map[r], map[c])] = mat[(r, c)];
        }
    }
    out
}
