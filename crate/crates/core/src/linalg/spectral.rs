use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::op::{CMat, Cpx, HermitianOperator};
use crate::error::{Error, Result};

/// Relative cutoff below which eigenvalues count as zero support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Absolute tolerance for negative eigenvalues of nominally PSD operators.
pub const PSD_TOL: f64 = 1e-10;

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMat {
        let d = self.eigenvalues.len();
        let mut lam = CMat::zeros(d, d);
        for i in 0..d {
            lam[(i, i)] = Cpx::new(self.eigenvalues[i], 0.0);
        }
        &self.eigenvectors * lam * self.eigenvectors.adjoint()
    }

    /// Apply a scalar function to the spectrum and resynthesize.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d = self.eigenvalues.len();
        let mut lam = CMat::zeros(d, d);
        for i in 0..d {
            lam[(i, i)] = Cpx::new(f(self.eigenvalues[i]), 0.0);
        }
        &self.eigenvectors * lam * self.eigenvectors.adjoint()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Hermitian eigendecomposition of a raw matrix, eigenvalues ascending.
///
/// Householder tridiagonalization followed by implicit-shift QL with
/// eigenvector accumulation. Self-contained: nalgebra's SymmetricEigen
/// produces NaNs on some structured complex Hermitian inputs (e.g. rank-one
/// projectors), so we do not rely on it.
pub fn eigh_matrix(mat: &CMat) -> SpectralDecomposition {
    let d = mat.nrows();
    assert_eq!(d, mat.ncols(), "eigh needs a square matrix");
    let mut a = mat.clone();
    let mut q = CMat::identity(d, d);
    let scale = mat.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    let tiny = 1e-300_f64;

    // Householder reduction to Hermitian tridiagonal form.
    for k in 0..d.saturating_sub(2) {
        let mut norm2 = 0.0;
        for i in k + 1..d {
            norm2 += a[(i, k)].norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm <= tiny * scale {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > tiny { x0 / x0.norm() } else { Cpx::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut u = vec![Cpx::new(0.0, 0.0); d];
        for i in k + 1..d {
            u[i] = a[(i, k)];
        }
        u[k + 1] -= alpha;
        let un: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if un <= tiny * scale {
            continue;
        }
        for z in u.iter_mut() {
            *z /= un;
        }
        // A <- P A P with P = I - 2 u u^*
        let mut v = vec![Cpx::new(0.0, 0.0); d];
        for i in 0..d {
            let mut acc = Cpx::new(0.0, 0.0);
            for j in k + 1..d {
                acc += a[(i, j)] * u[j];
            }
            v[i] = acc;
        }
        let beta: f64 = (0..d).map(|i| (u[i].conj() * v[i]).re).sum();
        let w: Vec<Cpx> = (0..d).map(|i| v[i] - u[i] * beta).collect();
        for i in 0..d {
            for j in 0..d {
                let delta = u[i] * w[j].conj() + w[i] * u[j].conj();
                a[(i, j)] -= delta * 2.0;
            }
        }
        // Q <- Q P
        for i in 0..d {
            let mut acc = Cpx::new(0.0, 0.0);
            for j in k + 1..d {
                acc += q[(i, j)] * u[j];
            }
            for j in k + 1..d {
                q[(i, j)] -= acc * u[j].conj() * 2.0;
            }
        }
    }

    // Phase similarity making the subdiagonal real non-negative.
    let mut diag = vec![0.0_f64; d];
    let mut sub = vec![0.0_f64; d];
    let mut ph = vec![Cpx::new(1.0, 0.0); d];
    for i in 0..d {
        diag[i] = a[(i, i)].re;
    }
    for i in 0..d.saturating_sub(1) {
        let e = a[(i + 1, i)];
        let m = e.norm();
        sub[i] = m;
        ph[i + 1] = if m > tiny { ph[i] * e.conj() / m } else { ph[i] };
    }
    for (i, p) in ph.iter().enumerate() {
        let pc = p.conj();
        for r in 0..d {
            q[(r, i)] *= pc;
        }
    }

    tql2(&mut diag, &mut sub, &mut q);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap());
    let eigenvalues = DVector::from_iterator(d, order.iter().map(|&i| diag[i]));
    let mut eigenvectors = CMat::zeros(d, d);
    for (new_col, &old_col) in order.iter().enumerate() {
        eigenvectors.set_column(new_col, &q.column(old_col));
    }
    SpectralDecomposition { eigenvalues, eigenvectors }
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix, rotations
/// accumulated into the (complex) column basis `z`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut CMat) {
    let n = d.len();
    if n <= 1 {
        return;
    }
    let nrows = z.nrows();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                // leave what we have; callers check reconstruction in tests
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sg = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sg);
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0_f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..nrows {
                    let fz = z[(k, i + 1)];
                    z[(k, i + 1)] = z[(k, i)] * s + fz * c;
                    z[(k, i)] = z[(k, i)] * c - fz * s;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

pub fn eigh(x: &HermitianOperator) -> SpectralDecomposition {
    eigh_matrix(x.matrix())
}

/// Sum of absolute eigenvalues of a Hermitian operator.
pub fn trace_norm(x: &HermitianOperator) -> f64 {
    eigh(x).eigenvalues.iter().map(|l| l.abs()).sum()
}

/// Trace norm of an arbitrary (not necessarily Hermitian) matrix:
/// sum of singular values via the Hermitian square.
pub fn trace_norm_general(m: &CMat) -> f64 {
    let gram = m.adjoint() * m;
    eigh_matrix(&gram)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum()
}

pub fn psd_check(x: &HermitianOperator, tol: f64) -> bool {
    eigh(x).min_eigenvalue() >= -tol
}

pub fn min_eigenvalue(x: &HermitianOperator) -> f64 {
    eigh(x).min_eigenvalue()
}

/// X^t on the support of X: eigenvalues at or below `support_cutoff`
/// (relative to the largest) are treated as exact zeros, with 0^t := 0 for
/// every t including negative t.
pub fn frac_power(x: &HermitianOperator, t: f64, support_cutoff: f64) -> Result<HermitianOperator> {
    let dec = eigh(x);
    let scale = dec.max_eigenvalue().max(0.0);
    if dec.min_eigenvalue() < -PSD_TOL * scale.max(1.0) {
        return Err(Error::NotPsd(dec.min_eigenvalue()));
    }
    let cut = support_cutoff * scale;
    let mat = dec.map(|l| if l <= cut { 0.0 } else { l.powf(t) });
    Ok(HermitianOperator::new_unchecked(mat, x.layout()))
}

/// log2 of X on its support (zeros outside the support).
pub fn log2_on_support(x: &HermitianOperator, support_cutoff: f64) -> Result<HermitianOperator> {
    let dec = eigh(x);
    let scale = dec.max_eigenvalue().max(0.0);
    if dec.min_eigenvalue() < -PSD_TOL * scale.max(1.0) {
        return Err(Error::NotPsd(dec.min_eigenvalue()));
    }
    let cut = support_cutoff * scale;
    let mat = dec.map(|l| if l <= cut { 0.0 } else { l.log2() });
    Ok(HermitianOperator::new_unchecked(mat, x.layout()))
}

/// Projector onto the span of eigenvectors of A - B with eigenvalue >= 0.
/// Ties (zero eigenvalues) are included, matching {A >= B} with non-strict
/// inequality.
pub fn dominance_projector(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    a.check_same_layout(b)?;
    let diff = a.sub(b)?;
    let dec = eigh(&diff);
    let scale = dec
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let tol = 1e-12 * scale;
    let d = diff.dim();
    let mut p = CMat::zeros(d, d);
    for i in 0..d {
        if dec.eigenvalues[i] >= -tol {
            let v = dec.eigenvectors.column(i);
            p += &v * v.adjoint();
        }
    }
    Ok(HermitianOperator::new_unchecked(p, a.layout()))
}

/// Daleckii-Krein derivative of the spectral function f at sigma, applied to
/// the Hermitian direction K: returns U (Phi o (U* K U)) U* where
/// Phi[i,j] is the first divided difference of f on the eigenvalues.
/// Equal (or nearly equal) eigenvalue pairs use the derivative f'.
pub fn daleckii_krein(
    sigma_dec: &SpectralDecomposition,
    k: &CMat,
    f: impl Fn(f64) -> f64,
    fprime: impl Fn(f64) -> f64,
) -> CMat {
    let d = sigma_dec.eigenvalues.len();
    let u = &sigma_dec.eigenvectors;
    let kt = u.adjoint() * k * u;
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    let lam = &sigma_dec.eigenvalues;
    let scale = lam.iter().map(|l| l.abs()).fold(0.0_f64, f64::max).max(1.0);
    for i in 0..d {
        for j in 0..d {
            let (li, lj) = (lam[i], lam[j]);
            let phi = if (li - lj).abs() <= 1e-12 * scale {
                fprime(0.5 * (li + lj))
            } else {
                (f(li) - f(lj)) / (li - lj)
            };
            out[(i, j)] = kt[(i, j)] * Cpx::new(phi, 0.0);
        }
    }
    u * out * u.adjoint()
}
