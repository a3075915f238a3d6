//! Closed-form two-state divergences, the two-state Hoeffding divergence,
//! and the pure-state single-letter formulas. All values in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, DensityMatrix, SUPPORT_CUTOFF};

/// Renyi order alpha in (0,1) or (1,inf). The protocol parameter s in (0,1)
/// reuses this type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || (alpha - 1.0).abs() < 1e-12 {
            return Err(Error::Domain(format!(
                "Renyi order must be positive and != 1, got {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// A divergence value in bits, with an explicit +infinity sentinel that
/// saturates under arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DivergenceValue {
    Bits(f64),
    Infinite,
}

impl DivergenceValue {
    pub fn bits(self) -> Option<f64> {
        match self {
            Self::Bits(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (Self::Bits(a), Self::Bits(b)) => Self::Bits(a.max(b)),
            _ => Self::Infinite,
        }
    }
}

impl std::fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Bits(v) => write!(f, "{v}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

/// Probability vector of Schmidt coefficients, stored descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtVector {
    lambdas: Vec<f64>,
}

impl SchmidtVector {
    pub fn new(mut lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Domain("empty Schmidt vector".into()));
        }
        let sum: f64 = lambdas.iter().sum();
        if lambdas.iter().any(|&l| l < -1e-12) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "Schmidt coefficients must sum to 1 (sum {sum})"
            )));
        }
        lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self { lambdas })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn max_coefficient(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn shannon_entropy(&self) -> f64 {
        -self
            .lambdas
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| l * l.log2())
            .sum::<f64>()
    }
}

/// Spectral data for fast repeated evaluation of tr(rho^a sigma^(1-a)):
/// eigenvalues of both states and the squared overlap matrix.
struct PetzKernel {
    rho_evals: Vec<f64>,
    sigma_evals: Vec<f64>,
    overlap: Vec<Vec<f64>>, // |<u_i|v_j>|^2
    rho_outside_sigma: f64, // tr(P_perp(sigma) rho)
    orthogonal: bool,
}

impl PetzKernel {
    fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        rho.op().check_same_layout(sigma.op())?;
        let dr = eigh(rho.op());
        let ds = eigh(sigma.op());
        let d = rho.dim();
        let cut_r = SUPPORT_CUTOFF * dr.max_eigenvalue().max(0.0);
        let cut_s = SUPPORT_CUTOFF * ds.max_eigenvalue().max(0.0);
        let cross = dr.eigenvectors.adjoint() * &ds.eigenvectors;
        let mut overlap = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                overlap[i][j] = cross[(i, j)].norm_sqr();
            }
        }
        let rho_evals: Vec<f64> = dr.eigenvalues.iter().map(|&l| if l > cut_r { l } else { 0.0 }).collect();
        let sigma_evals: Vec<f64> =
            ds.eigenvalues.iter().map(|&l| if l > cut_s { l } else { 0.0 }).collect();
        let mut rho_outside_sigma = 0.0;
        let mut common = 0.0;
        for i in 0..d {
            if rho_evals[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if sigma_evals[j] == 0.0 {
                    rho_outside_sigma += rho_evals[i] * overlap[i][j];
                } else {
                    common += rho_evals[i] * overlap[i][j];
                }
            }
        }
        let orthogonal = common <= 1e-12;
        Ok(Self { rho_evals, sigma_evals, overlap, rho_outside_sigma, orthogonal })
    }

    /// Q(alpha) = tr(rho^alpha sigma^(1-alpha)) on supports.
    fn q(&self, alpha: f64) -> f64 {
        let d = self.rho_evals.len();
        let mut q = 0.0;
        for i in 0..d {
            let li = self.rho_evals[i];
            if li == 0.0 {
                continue;
            }
            let la = li.powf(alpha);
            for j in 0..d {
                let mj = self.sigma_evals[j];
                if mj == 0.0 {
                    continue;
                }
                q += la * mj.powf(1.0 - alpha) * self.overlap[i][j];
            }
        }
        q
    }

    fn support_violated(&self) -> bool {
        self.rho_outside_sigma > 1e-10
    }
}

/// Umegaki relative entropy D(rho||sigma) = tr[rho(log rho - log sigma)]
/// in bits; +infinity when supp(rho) is not contained in supp(sigma).
pub fn umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    let k = PetzKernel::new(rho, sigma)?;
    if k.support_violated() {
        return Ok(DivergenceValue::Infinite);
    }
    let mut v = 0.0;
    for (i, &li) in k.rho_evals.iter().enumerate() {
        if li == 0.0 {
            continue;
        }
        v += li * li.log2();
        for (j, &mj) in k.sigma_evals.iter().enumerate() {
            if mj == 0.0 {
                continue;
            }
            v -= li * k.overlap[i][j] * mj.log2();
        }
    }
    Ok(DivergenceValue::Bits(clamp_tiny_negative(v)))
}

/// Petz Renyi divergence (1/(alpha-1)) log tr[rho^alpha sigma^(1-alpha)].
pub fn petz_renyi(
    alpha: RenyiOrder,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<DivergenceValue> {
    let a = alpha.get();
    let k = PetzKernel::new(rho, sigma)?;
    if a < 1.0 && k.orthogonal {
        return Ok(DivergenceValue::Infinite);
    }
    if a > 1.0 && k.support_violated() {
        return Ok(DivergenceValue::Infinite);
    }
    let q = k.q(a);
    if q <= 0.0 {
        return Ok(DivergenceValue::Infinite);
    }
    Ok(DivergenceValue::Bits(clamp_tiny_negative(q.log2() / (a - 1.0))))
}

/// Sandwiched Renyi divergence
/// (1/(alpha-1)) log tr[(sigma^((1-a)/2a) rho sigma^((1-a)/2a))^alpha].
pub fn sandwiched_renyi(
    alpha: RenyiOrder,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<DivergenceValue> {
    rho.op().check_same_layout(sigma.op())?;
    let a = alpha.get();
    let k = PetzKernel::new(rho, sigma)?;
    if a < 1.0 && k.orthogonal {
        return Ok(DivergenceValue::Infinite);
    }
    if a > 1.0 && k.support_violated() {
        return Ok(DivergenceValue::Infinite);
    }
    let q = sandwiched_q(a, rho, sigma)?;
    if q <= 0.0 {
        return Ok(DivergenceValue::Infinite);
    }
    Ok(DivergenceValue::Bits(clamp_tiny_negative(q.log2() / (a - 1.0))))
}

/// tr[(sigma^c rho sigma^c)^alpha] with c = (1-alpha)/(2 alpha), powers on
/// supports.
pub fn sandwiched_q(alpha: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let c = (1.0 - alpha) / (2.0 * alpha);
    let sc = crate::linalg::frac_power(sigma.op(), c, SUPPORT_CUTOFF)?;
    let y = sc.matrix() * rho.matrix() * sc.matrix();
    let dec = crate::linalg::eigh_matrix(&y);
    Ok(dec
        .eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l.powf(alpha))
        .sum())
}

fn clamp_tiny_negative(v: f64) -> f64 {
    if v < 0.0 && v > -1e-9 {
        0.0
    } else {
        v
    }
}

/// Where a 1-D sup landed: interior with a maximizer, or pinned at an
/// endpoint of the clipped domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Maximizer {
    Interior(f64),
    LowerBoundary(f64),
    UpperBoundary(f64),
}

impl Maximizer {
    pub fn position(self) -> f64 {
        match self {
            Self::Interior(x) | Self::LowerBoundary(x) | Self::UpperBoundary(x) => x,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HoeffdingResult {
    pub value: DivergenceValue,
    pub maximizer: Maximizer,
    /// Set when the objective exceeds 1000 bits at the alpha -> 0 end.
    pub diverging: bool,
}

/// Endpoint clipping for the singular alpha -> 0, 1 limits.
pub const ALPHA_EPS: f64 = 1e-4;
/// Divergence flag threshold in bits.
pub const DIVERGING_BITS: f64 = 1e3;

/// Two-state Hoeffding divergence:
/// sup over alpha in (0,1) of ((alpha-1)/alpha) (r - D_{P,alpha}(rho||sigma)).
pub fn hoeffding_two_state(
    r: f64,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<HoeffdingResult> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("rate must be positive, got {r}")));
    }
    let kernel = PetzKernel::new(rho, sigma)?;
    if kernel.orthogonal {
        return Ok(HoeffdingResult {
            value: DivergenceValue::Infinite,
            maximizer: Maximizer::LowerBoundary(ALPHA_EPS),
            diverging: true,
        });
    }
    let objective = |alpha: f64| -> f64 {
        let q = kernel.q(alpha);
        if q <= 0.0 {
            return f64::INFINITY;
        }
        let d = q.log2() / (alpha - 1.0);
        (alpha - 1.0) / alpha * (r - d)
    };
    let sup = supremum_on_unit_interval(&objective);
    let diverging = objective(ALPHA_EPS) > DIVERGING_BITS;
    Ok(HoeffdingResult {
        value: DivergenceValue::Bits(sup.value.max(0.0)),
        maximizer: sup.maximizer,
        diverging,
    })
}

pub(crate) struct SupResult {
    pub value: f64,
    pub maximizer: Maximizer,
}

/// Maximize f over the clipped interval (ALPHA_EPS, 1-ALPHA_EPS): coarse
/// logit-space grid, golden-section refinement around the best grid point,
/// plus golden restarts bracketed at {0.1, 0.5, 0.9} against flat regions.
pub(crate) fn supremum_on_unit_interval(f: &dyn Fn(f64) -> f64) -> SupResult {
    let lo = ALPHA_EPS;
    let hi = 1.0 - ALPHA_EPS;
    let to_alpha = |u: f64| 1.0 / (1.0 + (-u).exp());
    let to_u = |a: f64| (a / (1.0 - a)).ln();
    let g = |u: f64| f(to_alpha(u));

    let (ulo, uhi) = (to_u(lo), to_u(hi));
    let npts = 61;
    let mut best_u = ulo;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..npts {
        let u = ulo + (uhi - ulo) * k as f64 / (npts - 1) as f64;
        let v = g(u);
        if v > best_v {
            best_v = v;
            best_u = u;
        }
    }
    let step = (uhi - ulo) / (npts - 1) as f64;
    let mut candidates = vec![(best_u - step).max(ulo)..=(best_u + step).min(uhi)];
    for a0 in [0.1, 0.5, 0.9] {
        let u0 = to_u(a0);
        candidates.push((u0 - 1.0).max(ulo)..=(u0 + 1.0).min(uhi));
    }
    let mut best = (best_u, best_v);
    for range in candidates {
        let (u, v) = golden_max(&g, *range.start(), *range.end(), 1e-10);
        if v > best.1 {
            best = (u, v);
        }
    }
    let alpha = to_alpha(best.0);
    let maximizer = if alpha <= lo * 1.05 {
        Maximizer::LowerBoundary(lo)
    } else if alpha >= 1.0 - lo * 1.05 {
        Maximizer::UpperBoundary(hi)
    } else {
        Maximizer::Interior(alpha)
    };
    SupResult { value: best.1, maximizer }
}

/// Golden-section maximization on [a, b], returning (argmax, max).
pub(crate) fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > xtol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// Petz Renyi relative entropy of entanglement of a pure state with the
/// given Schmidt vector: (alpha/(alpha-1)) log sum_i lambda_i^(1/alpha).
pub fn pure_petz_entanglement(alpha: RenyiOrder, schmidt: &SchmidtVector) -> DivergenceValue {
    let a = alpha.get();
    let s: f64 = schmidt
        .coefficients()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l.powf(1.0 / a))
        .sum();
    DivergenceValue::Bits(clamp_tiny_negative(a / (a - 1.0) * s.log2()))
}

/// Upper end of the s-grid in the achievable-rate sup; past this point the
/// objective is within 1e-9 of its s -> infinity limit for any Schmidt
/// vector with lambda_max >= 1/2.
pub const HAYASHI_S_MAX: f64 = 200.0;

/// Achievable distillation rate at demanded error exponent r for a pure
/// state: sup over s >= 1 of (1/(1-s)) (r + log sum_i lambda_i^s).
pub fn hayashi_rate(r: f64, schmidt: &SchmidtVector) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("exponent must be positive, got {r}")));
    }
    let h = |s: f64| -> f64 {
        let z: f64 = schmidt
            .coefficients()
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| l.powf(s))
            .sum();
        (r + z.log2()) / (1.0 - s)
    };
    let lo = 1.0 + ALPHA_EPS;
    // coarse scan then golden refinement
    let npts = 400;
    let mut best = (lo, h(lo));
    for k in 1..npts {
        let s = lo + (HAYASHI_S_MAX - lo) * k as f64 / (npts - 1) as f64;
        let v = h(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let step = (HAYASHI_S_MAX - lo) / (npts - 1) as f64;
    let (_, refined) = golden_max(&h, (best.0 - step).max(lo), (best.0 + step).min(HAYASHI_S_MAX), 1e-10);
    let limit = -schmidt.max_coefficient().log2();
    Ok(refined.max(best.1).max(limit))
}
