//! Sparse Hermitian basis elements used to express semidefinite constraints
//! without materializing dense coefficient matrices.

use crate::linalg::layout::{digits_to_index, index_to_digits};
use crate::linalg::{BipartitionLayout, CMat, Cpx};

/// A Hermitian matrix with very few nonzero entries, stored as explicit
/// (row, col, value) triples covering all nonzeros.
#[derive(Debug, Clone)]
pub struct SparseHerm {
    pub entries: Vec<(usize, usize, Cpx)>,
}

impl SparseHerm {
    pub fn scalar(v: f64) -> Self {
        Self { entries: vec![(0, 0, Cpx::new(v, 0.0))] }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let w = Cpx::new(s, 0.0);
        Self { entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * w)).collect() }
    }

    pub fn add_to(&self, m: &mut CMat, scale: f64) {
        let w = Cpx::new(scale, 0.0);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v * w;
        }
    }

    /// tr(X A) for Hermitian X; real by symmetry.
    pub fn trace_with(&self, x: &CMat) -> f64 {
        self.entries.iter().map(|&(r, c, v)| (x[(c, r)] * v).re).sum()
    }

    /// Partial transpose over the B factors of the given layout.
    pub fn partial_transpose(&self, layout: &BipartitionLayout) -> Self {
        let dims = layout.factor_dims();
        let nf = dims.len();
        let mut rd = vec![0usize; nf];
        let mut cd = vec![0usize; nf];
        let entries = self
            .entries
            .iter()
            .map(|&(r, c, v)| {
                index_to_digits(r, &dims, &mut rd);
                index_to_digits(c, &dims, &mut cd);
                for k in (1..nf).step_by(2) {
                    std::mem::swap(&mut rd[k], &mut cd[k]);
                }
                (digits_to_index(&rd, &dims), digits_to_index(&cd, &dims), v)
            })
            .collect();
        Self { entries }
    }
}

/// Full Hermitian basis of d x d: for p < q the symmetric pair
/// E_pq + E_qp and the antisymmetric pair i(E_pq - E_qp), then the
/// diagonal units E_pp. Coordinates of X: Re X[p,q], Im X[p,q], X[p,p].
pub fn hermitian_basis(d: usize) -> Vec<SparseHerm> {
    let mut out = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in (p + 1)..d {
            out.push(SparseHerm {
                entries: vec![(p, q, Cpx::new(1.0, 0.0)), (q, p, Cpx::new(1.0, 0.0))],
            });
            out.push(SparseHerm {
                entries: vec![(p, q, Cpx::new(0.0, 1.0)), (q, p, Cpx::new(0.0, -1.0))],
            });
        }
    }
    for p in 0..d {
        out.push(SparseHerm { entries: vec![(p, p, Cpx::new(1.0, 0.0))] });
    }
    out
}

/// Coordinates of Hermitian X in the `hermitian_basis` ordering.
pub fn hermitian_coords(x: &CMat) -> Vec<f64> {
    let d = x.nrows();
    let mut y = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in (p + 1)..d {
            y.push(x[(p, q)].re);
            y.push(x[(p, q)].im);
        }
    }
    for p in 0..d {
        y.push(x[(p, p)].re);
    }
    y
}

/// Basis of the traceless Hermitian subspace (d^2 - 1 elements): the
/// off-diagonal pairs of `hermitian_basis` followed by E_00 - E_kk for
/// k = 1..d-1.
pub fn traceless_basis(d: usize) -> Vec<SparseHerm> {
    let mut out = Vec::with_capacity(d * d - 1);
    for p in 0..d {
        for q in (p + 1)..d {
            out.push(SparseHerm {
                entries: vec![(p, q, Cpx::new(1.0, 0.0)), (q, p, Cpx::new(1.0, 0.0))],
            });
            out.push(SparseHerm {
                entries: vec![(p, q, Cpx::new(0.0, 1.0)), (q, p, Cpx::new(0.0, -1.0))],
            });
        }
    }
    for k in 1..d {
        out.push(SparseHerm {
            entries: vec![(0, 0, Cpx::new(1.0, 0.0)), (k, k, Cpx::new(-1.0, 0.0))],
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_round_trip() {
        let d = 3;
        let basis = hermitian_basis(d);
        let mut x = CMat::zeros(d, d);
        x[(0, 0)] = Cpx::new(1.0, 0.0);
        x[(1, 1)] = Cpx::new(-0.5, 0.0);
        x[(0, 1)] = Cpx::new(0.3, 0.7);
        x[(1, 0)] = Cpx::new(0.3, -0.7);
        x[(2, 0)] = Cpx::new(-0.2, 0.1);
        x[(0, 2)] = Cpx::new(-0.2, -0.1);
        let y = hermitian_coords(&x);
        let mut rec = CMat::zeros(d, d);
        for (b, &yi) in basis.iter().zip(&y) {
            b.add_to(&mut rec, yi);
        }
        assert!((rec - x).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
    }

    #[test]
    fn sparse_pt_matches_dense_pt() {
        use crate::linalg::op::partial_transpose_matrix;
        let layout = BipartitionLayout::new(2, 2, 1).unwrap();
        for b in hermitian_basis(4) {
            let mut dense = CMat::zeros(4, 4);
            b.add_to(&mut dense, 1.0);
            let want = partial_transpose_matrix(&dense, &layout);
            let mut got = CMat::zeros(4, 4);
            b.partial_transpose(&layout).add_to(&mut got, 1.0);
            assert!((got - want).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
        }
    }
}
