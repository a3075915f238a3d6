use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::layout::{digits_to_index, BipartitionLayout};
use super::op::{CMat, Cpx, HermitianOperator};
use super::spectral::{eigh, frac_power, trace_norm_general, SUPPORT_CUTOFF};
use crate::error::{Error, Result};

pub const DENSITY_TOL: f64 = 1e-10;

/// Positive semi-definite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        if (op.trace() - 1.0).abs() > DENSITY_TOL {
            return Err(Error::NotDensity(format!("trace is {}", op.trace())));
        }
        let min = eigh(&op).min_eigenvalue();
        if min < -DENSITY_TOL {
            return Err(Error::NotDensity(format!("min eigenvalue is {min:.3e}")));
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn layout(&self) -> BipartitionLayout {
        self.op.layout()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn purity(&self) -> f64 {
        self.op.inner(&self.op)
    }

    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        Ok(Self { op: self.op.tensor_power(n)? })
    }

    /// Pure state from a normalized state vector.
    pub fn from_vector(v: &DVector<Complex64>, layout: BipartitionLayout) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotDensity(format!("vector norm^2 is {norm}")));
        }
        let mat = v * v.adjoint();
        Self::new(HermitianOperator::new_unchecked(mat, layout))
    }
}

/// The maximally mixed state on the given layout.
pub fn maximally_mixed(layout: BipartitionLayout) -> DensityMatrix {
    let d = layout.total_dim();
    DensityMatrix::new(HermitianOperator::identity(layout).scale(1.0 / d as f64)).unwrap()
}

/// m copies of the two-qubit Bell state, interleaved layout (2,2,m).
pub fn max_entangled(m: usize) -> Result<DensityMatrix> {
    let layout = BipartitionLayout::qubit_pairs(m)?;
    let dims = layout.factor_dims();
    let d = layout.total_dim();
    let amp = Cpx::new((0.5_f64).powf(m as f64 / 2.0), 0.0);
    let mut v = DVector::<Complex64>::zeros(d);
    let mut digits = vec![0usize; 2 * m];
    // nonzero amplitudes on |a1 a1 a2 a2 ... am am>
    for bits in 0..(1usize << m) {
        for k in 0..m {
            let a = (bits >> k) & 1;
            digits[2 * k] = a;
            digits[2 * k + 1] = a;
        }
        v[digits_to_index(&digits, &dims)] = amp;
    }
    DensityMatrix::from_vector(&v, layout)
}

/// Isotropic state p*Phi + (1-p)*(I - Phi)/(4^m - 1) on m qubit pairs.
pub fn isotropic(p: f64, m: usize) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("isotropic weight p={p} outside [0,1]")));
    }
    let phi = max_entangled(m)?;
    let layout = phi.layout();
    let dim = layout.total_dim() as f64;
    let rest = HermitianOperator::identity(layout)
        .sub(phi.op())
        .unwrap()
        .scale((1.0 - p) / (dim - 1.0));
    DensityMatrix::new(phi.op().scale(p).add(&rest).unwrap())
}

/// Pure bipartite state with the given Schmidt coefficients on a d x d
/// system: |psi> = sum_i sqrt(lambda_i) |ii>.
pub fn pure_from_schmidt(lambdas: &[f64]) -> Result<DensityMatrix> {
    let d = lambdas.len();
    if d == 0 {
        return Err(Error::Domain("empty Schmidt vector".into()));
    }
    let sum: f64 = lambdas.iter().sum();
    if lambdas.iter().any(|&l| l < -1e-12) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "Schmidt coefficients must be a probability vector (sum {sum})"
        )));
    }
    let layout = BipartitionLayout::new(d, d, 1)?;
    let dims = layout.factor_dims();
    let mut v = DVector::<Complex64>::zeros(layout.total_dim());
    for (i, &l) in lambdas.iter().enumerate() {
        v[digits_to_index(&[i, i], &dims)] = Cpx::new(l.max(0.0).sqrt(), 0.0);
    }
    DensityMatrix::from_vector(&v, layout)
}

/// Swap operator W on m qubit pairs (interleaved layout): W |x>_A |y>_B =
/// |y>_A |x>_B. W^2 = I and W <= I.
pub fn swap_operator(m: usize) -> Result<HermitianOperator> {
    let layout = BipartitionLayout::qubit_pairs(m)?;
    // per-pair 4x4 swap |a,b> -> |b,a>
    let mut s4 = CMat::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            s4[(2 * b + a, 2 * a + b)] = Cpx::new(1.0, 0.0);
        }
    }
    let one = HermitianOperator::new(s4, BipartitionLayout::qubit_pairs(1)?)?;
    let mut w = one.clone();
    for _ in 1..m {
        w = w.tensor(&one)?;
    }
    debug_assert_eq!(w.layout(), layout);
    Ok(w)
}

/// Uhlmann fidelity ||sqrt(rho) sqrt(sigma)||_1^2.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.op().check_same_layout(sigma.op())?;
    let sr = frac_power(rho.op(), 0.5, SUPPORT_CUTOFF)?;
    let ss = frac_power(sigma.op(), 0.5, SUPPORT_CUTOFF)?;
    let prod = sr.matrix() * ss.matrix();
    let f = trace_norm_general(&prod).powi(2);
    Ok(f.clamp(0.0, 1.0 + 1e-12).min(1.0))
}

/// Haar-ish random density matrix (Ginibre ensemble) on the given layout.
pub fn random_density<R: Rng>(layout: BipartitionLayout, rng: &mut R) -> DensityMatrix {
    let d = layout.total_dim();
    let mut g = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = Cpx::new(re, im);
        }
    }
    let w = &g * g.adjoint();
    let tr: f64 = w.diagonal().iter().map(|z| z.re).sum();
    DensityMatrix::new(HermitianOperator::new_unchecked(w / Cpx::new(tr, 0.0), layout)).unwrap()
}

/// Random pure product state |a><a| (x) |b><b| on one copy of the layout.
pub fn random_product_state<R: Rng>(layout: BipartitionLayout, rng: &mut R) -> Result<DensityMatrix> {
    if layout.copies != 1 {
        return Err(Error::Domain("product state sampler needs a single copy".into()));
    }
    let part = |d: usize, rng: &mut R| {
        let mut v = DVector::<Complex64>::zeros(d);
        for i in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v[i] = Cpx::new(re, im);
        }
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v / Cpx::new(n, 0.0)
    };
    let va = part(layout.dim_a, rng);
    let vb = part(layout.dim_b, rng);
    let mut v = DVector::<Complex64>::zeros(layout.total_dim());
    for a in 0..layout.dim_a {
        for b in 0..layout.dim_b {
            v[a * layout.dim_b + b] = va[a] * vb[b];
        }
    }
    DensityMatrix::from_vector(&v, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral::eigh;

    #[test]
    fn bell_state_basics() {
        let phi = max_entangled(1).unwrap();
        // <00|Phi|11> = 1/2
        assert!((phi.matrix()[(0, 3)].re - 0.5).abs() < 1e-14);
        assert!((phi.op().trace() - 1.0).abs() < 1e-12);
        assert!((phi.purity() - 1.0).abs() < 1e-10);
        assert!((fidelity(&phi, &phi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bell_tensor_trace() {
        let phi = max_entangled(2).unwrap();
        assert!((phi.op().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_partial_transpose_eigenvalues() {
        let phi = max_entangled(1).unwrap();
        let pt = phi.op().partial_transpose();
        let evs = eigh(&pt).eigenvalues;
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (got, want) in evs.iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn swap_matches_bell_partial_transpose() {
        for m in 1..=3 {
            let w = swap_operator(m).unwrap();
            let pt = max_entangled(m).unwrap().op().partial_transpose();
            let scaled = w.scale((0.5_f64).powi(m as i32));
            let err = (pt.matrix() - scaled.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "m={m}: {err}");
        }
    }

    #[test]
    fn swap_defining_action_and_spectrum() {
        let w = swap_operator(1).unwrap();
        // W|01> = |10>
        assert!((w.matrix()[(2, 1)].re - 1.0).abs() < 1e-14);
        for l in eigh(&w).eigenvalues.iter() {
            assert!((l.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn isotropic_endpoints() {
        let m = 1;
        let phi = max_entangled(m).unwrap();
        let top = isotropic(1.0, m).unwrap();
        let err = (top.matrix() - phi.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-14);

        let mix = isotropic(0.25, m).unwrap();
        for i in 0..4 {
            assert!((mix.matrix()[(i, i)].re - 0.25).abs() < 1e-12);
        }
        assert!(isotropic(1.5, 1).is_err());
    }

    #[test]
    fn fidelity_special_cases() {
        let zero = pure_from_schmidt(&[1.0]).unwrap();
        // |0><0| vs |1><1| on a qubit pair: build diag states directly
        let l = BipartitionLayout::new(2, 2, 1).unwrap();
        let mut e0 = CMat::zeros(4, 4);
        e0[(0, 0)] = Cpx::new(1.0, 0.0);
        let s0 = DensityMatrix::new(HermitianOperator::new(e0, l).unwrap()).unwrap();
        let mut e3 = CMat::zeros(4, 4);
        e3[(3, 3)] = Cpx::new(1.0, 0.0);
        let s3 = DensityMatrix::new(HermitianOperator::new(e3, l).unwrap()).unwrap();
        assert!(fidelity(&s0, &s3).unwrap() < 1e-12);

        let mm = maximally_mixed(l);
        // pure-state reduction: F(I/4, |0><0|) = 1/4
        assert!((fidelity(&mm, &s0).unwrap() - 0.25).abs() < 1e-10);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_state_is_pure() {
        let psi = pure_from_schmidt(&[0.8, 0.2]).unwrap();
        assert!((psi.purity() - 1.0).abs() < 1e-10);
        assert!(pure_from_schmidt(&[0.9, 0.2]).is_err());
    }
}
