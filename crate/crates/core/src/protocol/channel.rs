//! The two constructions tying distillation to hypothesis testing: a binary
//! test becomes a measure-and-prepare distiller, and a distiller becomes a
//! binary test through the channel adjoint. Choi matrices are the source of
//! truth for adjoints.

use serde::{Deserialize, Serialize};

use crate::conic::{beta_opt, max_linear_ppt, StateSet, SolverDiagnostics};
use crate::error::{Error, Result};
use crate::linalg::{
    eigh, fidelity, max_entangled, BipartitionLayout, CMat, Cpx, DensityMatrix, HermitianOperator,
};

const TEST_TOL: f64 = 1e-10;

/// A two-outcome measurement operator 0 <= M <= I.
#[derive(Debug, Clone)]
pub struct BinaryTest {
    m: HermitianOperator,
}

impl BinaryTest {
    pub fn new(m: HermitianOperator) -> Result<Self> {
        let dec = eigh(&m);
        let lo = dec.min_eigenvalue();
        let hi = dec.max_eigenvalue();
        if lo < -TEST_TOL || hi > 1.0 + TEST_TOL {
            return Err(Error::Domain(format!(
                "test operator eigenvalues [{lo}, {hi}] leave [0, 1]"
            )));
        }
        Ok(Self { m })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.m
    }
}

/// Measure-and-prepare distiller with cached Choi matrix. The input space
/// is the test's layout; the output is the m-pair Bell space.
#[derive(Debug, Clone)]
pub struct DistillerChannel {
    pub test: BinaryTest,
    pub m: usize,
    choi: CMat,
    d_in: usize,
    d_out: usize,
}

impl DistillerChannel {
    pub fn choi(&self) -> &CMat {
        &self.choi
    }

    pub fn input_layout(&self) -> BipartitionLayout {
        self.test.operator().layout()
    }

    pub fn output_layout(&self) -> BipartitionLayout {
        BipartitionLayout::qubit_pairs(self.m).expect("m validated at construction")
    }
}

/// Lambda(X) = tr((I-M)X) Phi^(m) + tr(MX) (I - Phi^(m))/(4^m - 1).
pub fn channel_from_test(test: BinaryTest, m: usize) -> Result<DistillerChannel> {
    if m == 0 {
        return Err(Error::Domain("target of zero copies is meaningless".into()));
    }
    let d_in = test.operator().dim();
    let phi = max_entangled(m)?;
    let d_out = phi.dim();
    let rest = {
        let mut q = -phi.matrix().clone();
        for k in 0..d_out {
            q[(k, k)] += Cpx::new(1.0, 0.0);
        }
        q / Cpx::new((d_out - 1) as f64, 0.0)
    };
    // J = (I-M)^T (x) Phi + M^T (x) Q
    let mt = test.operator().matrix().transpose();
    let imt = {
        let mut x = -mt.clone();
        for k in 0..d_in {
            x[(k, k)] += Cpx::new(1.0, 0.0);
        }
        x
    };
    let choi = imt.kronecker(phi.matrix()) + mt.kronecker(&rest);
    Ok(DistillerChannel { test, m, choi, d_in, d_out })
}

fn partial_trace_in(j: &CMat, d_in: usize, d_out: usize) -> CMat {
    let mut out = CMat::zeros(d_out, d_out);
    for i in 0..d_in {
        for a in 0..d_out {
            for b in 0..d_out {
                out[(a, b)] += j[(i * d_out + a, i * d_out + b)];
            }
        }
    }
    out
}

fn partial_trace_out(j: &CMat, d_in: usize, d_out: usize) -> CMat {
    let mut out = CMat::zeros(d_in, d_in);
    for i in 0..d_in {
        for k in 0..d_in {
            for a in 0..d_out {
                out[(i, k)] += j[(i * d_out + a, k * d_out + a)];
            }
        }
    }
    out
}

/// Contract the Choi matrix against an input operator: tr_in[J (X^T (x) I)].
pub fn choi_apply(channel: &DistillerChannel, x: &CMat) -> CMat {
    let (d_in, d_out) = (channel.d_in, channel.d_out);
    let xt = x.transpose();
    let big = &channel.choi * xt.kronecker(&CMat::identity(d_out, d_out));
    partial_trace_in(&big, d_in, d_out)
}

/// Adjoint map from the Choi matrix: Lambda^dag(Y) = (tr_out[J (I (x) Y^T)])^T.
pub fn choi_adjoint(channel: &DistillerChannel, y: &CMat) -> CMat {
    let (d_in, d_out) = (channel.d_in, channel.d_out);
    let yt = y.transpose();
    let big = &channel.choi * CMat::identity(d_in, d_in).kronecker(&yt);
    partial_trace_out(&big, d_in, d_out).transpose()
}

pub fn apply_channel(channel: &DistillerChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.layout() != channel.input_layout() {
        return Err(Error::LayoutMismatch("channel input layout".into()));
    }
    // closed form of the measure-and-prepare map
    let m_op = channel.test.operator();
    let p_reject = m_op.inner(rho.op());
    let p_accept = 1.0 - p_reject;
    let phi = max_entangled(channel.m)?;
    let d_out = channel.d_out;
    let mut out = phi.matrix() * Cpx::new(p_accept, 0.0);
    let w = p_reject / (d_out - 1) as f64;
    out -= phi.matrix() * Cpx::new(w, 0.0);
    for k in 0..d_out {
        out[(k, k)] += Cpx::new(w, 0.0);
    }
    DensityMatrix::new(HermitianOperator::new(out, channel.output_layout())?)
}

/// M = I - Lambda^dag(Phi^(m)), evaluated from the Choi representation.
pub fn test_from_channel(channel: &DistillerChannel) -> Result<BinaryTest> {
    let tp = partial_trace_out(&channel.choi, channel.d_in, channel.d_out);
    let tp_dev = (0..channel.d_in)
        .flat_map(|i| (0..channel.d_in).map(move |k| (i, k)))
        .map(|(i, k)| {
            let want = if i == k { Cpx::new(1.0, 0.0) } else { Cpx::new(0.0, 0.0) };
            (tp[(i, k)] - want).norm()
        })
        .fold(0.0_f64, f64::max);
    if tp_dev > 1e-9 {
        return Err(Error::Domain(format!(
            "Choi matrix is not trace preserving (deviation {tp_dev:.3e})"
        )));
    }
    let phi = max_entangled(channel.m)?;
    let adj = choi_adjoint(channel, phi.matrix());
    let mut m = -adj;
    for k in 0..channel.d_in {
        m[(k, k)] += Cpx::new(1.0, 0.0);
    }
    BinaryTest::new(HermitianOperator::new(m, channel.input_layout())?)
}

/// Worst-case infidelity to the m-pair Bell target over the vertex set.
pub fn distillation_error(channel: &DistillerChannel, r: &StateSet) -> Result<f64> {
    let phi = max_entangled(channel.m)?;
    let mut worst = 0.0_f64;
    for rho in &r.vertices {
        let out = apply_channel(channel, rho)?;
        worst = worst.max(1.0 - fidelity(&out, &phi)?);
    }
    Ok(worst)
}

/// Worst acceptance probability on free states: max over PPT sigma of
/// tr((I-M) sigma).
pub fn type1_error(test: &BinaryTest) -> Result<f64> {
    let m = test.operator();
    let mut x = -m.matrix().clone();
    for k in 0..m.dim() {
        x[(k, k)] += Cpx::new(1.0, 0.0);
    }
    Ok(max_linear_ppt(&HermitianOperator::new_unchecked(x, m.layout()))?.value)
}

/// Both directions of the distillation <-> testing equivalence at one
/// (R, r, n) point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub n: usize,
    pub r: f64,
    pub m: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub gap: f64,
    pub beta_diagnostics: SolverDiagnostics,
    /// Round trip: test -> channel -> test deviation in max-norm.
    pub roundtrip_deviation: f64,
    /// Type-I error of the recovered test (must be <= 2^-m budget).
    pub reverse_type1: f64,
    pub type1_budget: f64,
}

pub fn verify_theorem1(r_set: &StateSet, r: f64, n: usize) -> Result<Theorem1Report> {
    let m = (r * n as f64).floor() as usize;
    if m == 0 {
        return Err(Error::Domain(format!(
            "floor(r n) = 0 for r={r}, n={n}: target of zero copies is meaningless"
        )));
    }
    let vertices_n: Vec<DensityMatrix> = r_set
        .vertices
        .iter()
        .map(|v| v.tensor_power(n))
        .collect::<Result<_>>()?;
    let rn = StateSet::from_vertices(vertices_n)?;
    let eps_budget = 2f64.powi(-(m as i32));
    let beta_sol = beta_opt(&rn, eps_budget)?;
    let test = BinaryTest::new(clip_to_test(&beta_sol.primal))?;
    let channel = channel_from_test(test.clone(), m)?;
    let epsilon = distillation_error(&channel, &rn)?;
    let recovered = test_from_channel(&channel)?;
    let roundtrip_deviation = (recovered.operator().matrix() - test.operator().matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    let reverse_type1 = type1_error(&recovered)?;
    Ok(Theorem1Report {
        n,
        r,
        m,
        beta: beta_sol.value,
        epsilon,
        gap: (beta_sol.value - epsilon).abs(),
        beta_diagnostics: beta_sol.diagnostics(),
        roundtrip_deviation,
        reverse_type1,
        type1_budget: eps_budget,
    })
}

/// Interior-point optimizers return M with eigenvalues strictly inside
/// (0, 1) up to roundoff; clip the stragglers so BinaryTest accepts it.
pub fn clip_to_test(m: &HermitianOperator) -> HermitianOperator {
    let dec = eigh(m);
    let clipped = dec.map(|l| l.clamp(0.0, 1.0));
    HermitianOperator::new_unchecked(clipped, m.layout())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::is_ppt;
    use crate::linalg::{isotropic, maximally_mixed, random_density};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_test<R: rand::Rng>(l: BipartitionLayout, rng: &mut R) -> BinaryTest {
        let rho = random_density(l, rng);
        let dec = eigh(rho.op());
        let scaled = dec.map(|lam| lam / dec.max_eigenvalue());
        BinaryTest::new(HermitianOperator::new_unchecked(scaled, l)).unwrap()
    }

    #[test]
    fn extreme_tests_give_extreme_channels() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let zero = BinaryTest::new(HermitianOperator::zeros(l)).unwrap();
        let ch = channel_from_test(zero, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(l, &mut rng);
        let out = apply_channel(&ch, &rho).unwrap();
        let phi = max_entangled(1).unwrap();
        assert!((out.matrix() - phi.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        let one = BinaryTest::new(HermitianOperator::identity(l)).unwrap();
        let ch1 = channel_from_test(one, 1).unwrap();
        let out1 = apply_channel(&ch1, &rho).unwrap();
        assert!((fidelity(&out1, &phi).unwrap()).abs() < 1e-12);
        assert!((out1.op().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_choi_contraction() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let test = random_test(l, &mut rng);
            let ch = channel_from_test(test, 1).unwrap();
            let rho = random_density(l, &mut rng);
            let closed = apply_channel(&ch, &rho).unwrap();
            let via_choi = choi_apply(&ch, rho.matrix());
            let dev = (closed.matrix() - via_choi).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-10, "deviation {dev}");
        }
    }

    #[test]
    fn apply_channel_is_affine() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let test = random_test(l, &mut rng);
        let ch = channel_from_test(test, 1).unwrap();
        let a = random_density(l, &mut rng);
        let b = random_density(l, &mut rng);
        let mixed =
            DensityMatrix::new(a.op().scale(0.3).add(&b.op().scale(0.7)).unwrap()).unwrap();
        let lhs = apply_channel(&ch, &mixed).unwrap();
        let rhs = apply_channel(&ch, &a)
            .unwrap()
            .op()
            .scale(0.3)
            .add(&apply_channel(&ch, &b).unwrap().op().scale(0.7))
            .unwrap();
        let dev = (lhs.matrix() - rhs.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn round_trip_is_exact() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let test = random_test(l, &mut rng);
            let ch = channel_from_test(test.clone(), 1).unwrap();
            let back = test_from_channel(&ch).unwrap();
            let dev = (back.operator().matrix() - test.operator().matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0_f64, f64::max);
            assert!(dev < 1e-12, "round trip deviation {dev}");
        }
    }

    #[test]
    fn recovered_test_eigenvalues_in_range() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let test = random_test(l, &mut rng);
            let ch = channel_from_test(test, 2).unwrap();
            let back = test_from_channel(&ch).unwrap();
            let dec = eigh(back.operator());
            assert!(dec.min_eigenvalue() >= -1e-10);
            assert!(dec.max_eigenvalue() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn distillation_error_equals_test_acceptance() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let test = random_test(l, &mut rng);
        let rho = random_density(l, &mut rng);
        let want = test.operator().inner(rho.op());
        let ch = channel_from_test(test, 1).unwrap();
        let rs = StateSet::from_vertices(vec![rho]).unwrap();
        let got = distillation_error(&ch, &rs).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn type1_error_examples() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let id = BinaryTest::new(HermitianOperator::identity(l)).unwrap();
        assert!(type1_error(&id).unwrap().abs() < 1e-7);
        let zero = BinaryTest::new(HermitianOperator::zeros(l)).unwrap();
        assert!((type1_error(&zero).unwrap() - 1.0).abs() < 1e-7);
        // M = I - Phi -> 2^-1
        let phi = max_entangled(1).unwrap();
        let m = HermitianOperator::identity(l).sub(phi.op()).unwrap();
        let t = BinaryTest::new(m).unwrap();
        assert!((type1_error(&t).unwrap() - 0.5).abs() < 1e-7);
    }

    #[test]
    fn ppt_preserving_when_type1_small() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let phi = max_entangled(1).unwrap();
        let m = HermitianOperator::identity(l).sub(phi.op()).unwrap();
        let test = BinaryTest::new(m).unwrap();
        assert!(type1_error(&test).unwrap() <= 0.5 + 1e-9);
        let ch = channel_from_test(test, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 100 {
            let s = random_density(l, &mut rng);
            if !is_ppt(&s, 0.0) {
                continue;
            }
            checked += 1;
            let out = apply_channel(&ch, &s).unwrap();
            assert!(is_ppt(&out, 1e-10));
        }
    }

    #[test]
    fn theorem1_isotropic_n1() {
        let iso = isotropic(0.9, 1).unwrap();
        let rs = StateSet::from_vertices(vec![iso]).unwrap();
        let report = verify_theorem1(&rs, 1.0, 1).unwrap();
        assert_eq!(report.m, 1);
        assert!(report.gap <= 1e-6, "|beta - eps| = {}", report.gap);
        assert!(report.roundtrip_deviation < 1e-12);
        assert!(report.reverse_type1 <= report.type1_budget + 1e-7);
    }

    #[test]
    fn theorem1_ppt_vertex_closed_form() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let rs = StateSet::from_vertices(vec![maximally_mixed(l)]).unwrap();
        let report = verify_theorem1(&rs, 1.0, 1).unwrap();
        assert!((report.beta - 0.5).abs() < 1e-6, "beta {}", report.beta);
        assert!(report.gap <= 1e-6);
    }

    #[test]
    fn theorem1_rejects_zero_target() {
        let iso = isotropic(0.9, 1).unwrap();
        let rs = StateSet::from_vertices(vec![iso]).unwrap();
        assert!(verify_theorem1(&rs, 0.2, 1).is_err());
    }
}
