use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor-factor bookkeeping for an n-copy bipartite system.
///
/// Subsystem ordering is fixed as A1 B1 A2 B2 ... An Bn. The partial
/// transpose partition is A1...An : B1...Bn (all B factors transposed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartitionLayout {
    pub dim_a: usize,
    pub dim_b: usize,
    pub copies: usize,
}

impl BipartitionLayout {
    pub fn new(dim_a: usize, dim_b: usize, copies: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || copies == 0 {
            return Err(Error::Domain(
                "layout dimensions and copy count must be positive".into(),
            ));
        }
        let layout = Self { dim_a, dim_b, copies };
        if layout.total_dim() > 4096 {
            return Err(Error::Unsupported(format!(
                "total dimension {} exceeds 4096",
                layout.total_dim()
            )));
        }
        Ok(layout)
    }

    /// Two-qubit pairs: the workhorse layout for everything in this crate.
    pub fn qubit_pairs(copies: usize) -> Result<Self> {
        Self::new(2, 2, copies)
    }

    pub fn total_dim(&self) -> usize {
        (self.dim_a * self.dim_b).pow(self.copies as u32)
    }

    /// Interleaved factor dimensions [dA, dB, dA, dB, ...].
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(2 * self.copies);
        for _ in 0..self.copies {
            dims.push(self.dim_a);
            dims.push(self.dim_b);
        }
        dims
    }

    /// Layout of the n-fold tensor power of this system.
    pub fn tensor_with(&self, other: &Self) -> Result<Self> {
        if self.dim_a != other.dim_a || self.dim_b != other.dim_b {
            return Err(Error::LayoutMismatch(format!(
                "cannot concatenate {}x{} with {}x{} factors",
                self.dim_a, self.dim_b, other.dim_a, other.dim_b
            )));
        }
        Self::new(self.dim_a, self.dim_b, self.copies + other.copies)
    }
}

/// Decompose a flat index into digits for the given factor dims (row-major:
/// first factor most significant).
pub fn index_to_digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

pub fn digits_to_index(digits: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0;
    for k in 0..dims.len() {
        idx = idx * dims[k] + digits[k];
    }
    idx
}
