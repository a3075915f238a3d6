//! Finite-n error-exponent estimates for distillation viewed as hypothesis
//! testing: measured reliability via optimal type-II errors, Hoeffding
//! exponents against the PPT cone, strong-converse lower bounds, and the
//! minimax-swap and vanishing-rate diagnostics.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::conic::{
    beta_opt, min_petz_ppt, min_sandwiched_ppt, reverse_rel_ent_ppt, ReverseOutcome,
    StateSet,
};
use crate::divergence::{golden_max, Maximizer, RenyiOrder, ALPHA_EPS, DIVERGING_BITS};
use crate::error::{Error, Result};
use crate::linalg::{
    daleckii_krein, eigh, frac_power, CMat, DensityMatrix, HermitianOperator, SUPPORT_CUTOFF,
};

/// Type-II errors at or below this level count as exact zero-error points.
pub const ZERO_ERROR_TOL: f64 = 1e-9;

const LN2: f64 = std::f64::consts::LN_2;

/// One evaluated point of an exponent curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentSample {
    pub n: usize,
    pub r: f64,
    /// Exponent in bits; meaningful only when neither sentinel is set.
    pub value: f64,
    /// Location of the 1-D sup over the Renyi order, when one was taken.
    pub maximizer: Option<Maximizer>,
    /// Worst inner-solver gap among the evaluated points.
    pub gap: f64,
    /// Optimal error was exactly zero at solver tolerance.
    pub zero_error: bool,
    /// The sup grows beyond any bound at the small-order boundary.
    pub diverging: bool,
    /// The sup was attained by the extrapolated infinite-order tail.
    pub tail: bool,
}

impl ExponentSample {
    fn finite(n: usize, r: f64, value: f64, maximizer: Option<Maximizer>, gap: f64) -> Self {
        Self { n, r, value, maximizer, gap, zero_error: false, diverging: false, tail: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub state: String,
    pub free_set: String,
    pub method: String,
}

/// Samples sorted by (r, n) with non-decreasing r.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentCurve {
    pub samples: Vec<ExponentSample>,
    pub metadata: CurveMetadata,
}

impl ExponentCurve {
    pub fn new(mut samples: Vec<ExponentSample>, metadata: CurveMetadata) -> Self {
        samples.sort_by(|a, b| {
            a.r.partial_cmp(&b.r).unwrap_or(std::cmp::Ordering::Equal).then(a.n.cmp(&b.n))
        });
        Self { samples, metadata }
    }

    /// Deterministic CSV: '.' decimal, fixed column order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,r,value_bits,maximizer,gap,zero_error,diverging,tail\n");
        for s in &self.samples {
            let m = s
                .maximizer
                .map(|m| format!("{:.12e}", m.position()))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{},{:.3e},{},{},{}\n",
                s.n, s.r, s.value, m, s.gap, s.zero_error, s.diverging, s.tail
            ));
        }
        out
    }
}

/// Measured finite-n reliability: -(1/n) log2 of the optimal type-II error
/// at budget 2^-floor(rn), for each n up to n_max where the budget is
/// meaningful.
pub fn reliability_measured(r_set: &StateSet, r: f64, n_max: usize) -> Result<ExponentCurve> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be positive".into()));
    }
    let mut samples = Vec::new();
    for n in 1..=n_max {
        let m = (r * n as f64).floor() as i32;
        if m < 1 {
            continue;
        }
        let vertices: Vec<DensityMatrix> = r_set
            .vertices
            .iter()
            .map(|v| v.tensor_power(n))
            .collect::<Result<_>>()?;
        let rn = StateSet::from_vertices(vertices)?;
        let sol = beta_opt(&rn, 2f64.powi(-m))?;
        let beta = sol.value.max(0.0);
        // zero-error when the optimum is indistinguishable from 0 within
        // the solver's own duality-gap certificate
        let zero_cut = ZERO_ERROR_TOL.max(sol.gap);
        let mut sample = if beta <= zero_cut {
            let mut s = ExponentSample::finite(n, r, 0.0, None, sol.gap);
            s.zero_error = true;
            s
        } else {
            ExponentSample::finite(n, r, -beta.log2() / n as f64, None, sol.gap)
        };
        sample.gap = sol.gap;
        samples.push(sample);
    }
    Ok(ExponentCurve::new(
        samples,
        CurveMetadata {
            state: format!("{} vertex states", r_set.vertices.len()),
            free_set: "PPT".into(),
            method: "beta_opt".into(),
        },
    ))
}

/// Memoized 1-D sup of `objective` over a supplied order grid, refined by
/// golden section around the grid argmax. Returns (value, maximizer).
fn sup_over_grid(objective: &dyn Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    let vals: Vec<f64> = grid.iter().map(|&a| objective(a)).collect();
    let mut k = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[k] {
            k = i;
        }
    }
    let lo = if k == 0 { grid[0] } else { grid[k - 1] };
    let hi = if k + 1 == grid.len() { grid[k] } else { grid[k + 1] };
    if hi > lo {
        let (a, v) = golden_max(objective, lo, hi, 1e-6);
        if v >= vals[k] {
            return (v, a);
        }
    }
    (vals[k], grid[k])
}

fn uniform_grid(lo: f64, hi: f64, npts: usize) -> Vec<f64> {
    (0..npts)
        .map(|k| lo + (hi - lo) * k as f64 / (npts - 1) as f64)
        .collect()
}

struct MemoDivergence<'a> {
    cache: RefCell<HashMap<u64, (f64, f64)>>,
    failure: RefCell<Option<Error>>,
    eval: Box<dyn Fn(f64) -> Result<(f64, f64)> + 'a>,
}

impl<'a> MemoDivergence<'a> {
    fn new(eval: impl Fn(f64) -> Result<(f64, f64)> + 'a) -> Self {
        Self {
            cache: RefCell::new(HashMap::new()),
            failure: RefCell::new(None),
            eval: Box::new(eval),
        }
    }

    /// (divergence bits, solver gap); NEG_INFINITY poisons after a failure.
    fn get(&self, alpha: f64) -> (f64, f64) {
        if self.failure.borrow().is_some() {
            return (f64::NEG_INFINITY, 0.0);
        }
        let key = alpha.to_bits();
        if let Some(&v) = self.cache.borrow().get(&key) {
            return v;
        }
        match (self.eval)(alpha) {
            Ok(v) => {
                self.cache.borrow_mut().insert(key, v);
                v
            }
            Err(e) => {
                *self.failure.borrow_mut() = Some(e);
                (f64::NEG_INFINITY, 0.0)
            }
        }
    }

    fn worst_gap(&self) -> f64 {
        self.cache.borrow().values().map(|v| v.1).fold(0.0, f64::max)
    }

    fn into_failure(self) -> Option<Error> {
        self.failure.into_inner()
    }
}

/// Per-n Hoeffding exponent against PPT:
/// (1/n) sup over alpha in (0,1) of ((alpha-1)/alpha)(n r - D_P,alpha).
pub fn hoeffding_exponent(rho: &DensityMatrix, r: f64, n: usize) -> Result<ExponentSample> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("rate must be positive, got {r}")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let rho_n = rho.tensor_power(n)?;
    let memo = MemoDivergence::new(|alpha: f64| {
        let sol = min_petz_ppt(RenyiOrder::new(alpha)?, &rho_n)?;
        Ok((sol.value, sol.gap))
    });
    let nr = r * n as f64;
    let objective = |alpha: f64| -> f64 {
        let (d, _) = memo.get(alpha);
        (alpha - 1.0) / alpha * (nr - d) / n as f64
    };
    let grid = uniform_grid(ALPHA_EPS, 1.0 - ALPHA_EPS, 20);
    let (mut value, mut argmax) = sup_over_grid(&objective, &grid);
    // probe the singular small-order end for divergence
    let mut diverging = false;
    for probe in [1e-5, 1e-6] {
        let v = objective(probe);
        if v > value {
            value = v;
            argmax = probe;
        }
    }
    if value > DIVERGING_BITS {
        diverging = true;
    }
    let worst_gap = memo.worst_gap();
    if let Some(e) = memo.into_failure() {
        return Err(e);
    }
    let maximizer = if argmax <= grid[0] * 1.05 {
        Maximizer::LowerBoundary(argmax)
    } else if argmax >= 1.0 - ALPHA_EPS * 1.05 {
        Maximizer::UpperBoundary(argmax)
    } else {
        Maximizer::Interior(argmax)
    };
    let mut sample = ExponentSample::finite(n, r, value.max(0.0), Some(maximizer), worst_gap);
    sample.diverging = diverging;
    Ok(sample)
}

/// Per-n strong-converse lower bound:
/// sup over alpha > 1 of ((alpha-1)/alpha)(r - D_S,alpha / n), evaluated on
/// a fixed grid with the infinite-order tail extrapolated from the largest
/// grid point.
pub fn strong_converse_bound(rho: &DensityMatrix, r: f64, n: usize) -> Result<ExponentSample> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let rho_n = rho.tensor_power(n)?;
    let alphas = [1.0001, 1.001, 1.01, 1.1, 1.5, 2.0, 3.0, 5.0, 10.0, 50.0];
    let mut best = f64::NEG_INFINITY;
    let mut best_alpha = alphas[0];
    let mut worst_gap: f64 = 0.0;
    let mut d_largest = 0.0;
    for &a in &alphas {
        let out = min_sandwiched_ppt(RenyiOrder::new(a)?, &rho_n)?;
        let d = out.solution.value / n as f64;
        worst_gap = worst_gap.max(out.solution.gap);
        let obj = (a - 1.0) / a * (r - d);
        if obj > best {
            best = obj;
            best_alpha = a;
        }
        d_largest = d;
    }
    // alpha -> infinity tail with the largest grid point standing in for
    // the infinite-order divergence
    let tail_obj = r - d_largest;
    let mut sample = if tail_obj > best {
        let mut s = ExponentSample::finite(n, r, tail_obj.max(0.0), None, worst_gap);
        s.tail = true;
        s
    } else {
        ExponentSample::finite(
            n,
            r,
            best.max(0.0),
            Some(Maximizer::Interior(best_alpha)),
            worst_gap,
        )
    };
    if sample.value == 0.0 {
        sample.maximizer = Some(Maximizer::LowerBoundary(alphas[0]));
        sample.tail = false;
    }
    Ok(sample)
}

/// Best achievable fidelity at the given type-I budget: 1 - beta.
pub fn fidelity_from_beta(r_set: &StateSet, r: f64, n: usize) -> Result<f64> {
    let m = (r * n as f64).floor() as i32;
    if m < 1 {
        return Err(Error::Domain(format!(
            "floor(r n) = 0 for r={r}, n={n}: no Bell-pair budget"
        )));
    }
    let vertices: Vec<DensityMatrix> = r_set
        .vertices
        .iter()
        .map(|v| v.tensor_power(n))
        .collect::<Result<_>>()?;
    let rn = StateSet::from_vertices(vertices)?;
    Ok(1.0 - beta_opt(&rn, 2f64.powi(-m))?.value)
}

/// Both evaluation orders of the Hoeffding-type saddle objective
/// ((alpha-1)/alpha)(n r - D_P,alpha(rho^n || sigma)) over alpha in the
/// grid and sigma in the PPT set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaxReport {
    pub sup_inf: f64,
    pub inf_sup: f64,
    pub difference: f64,
    pub sup_inf_alpha: f64,
    pub inf_sup_alpha: f64,
    pub fw_gap: f64,
}

/// Sup over alpha of the Petz kernel objective for a fixed sigma, done on
/// the cached overlap kernel so each alpha is O(d^2).
struct FixedSigmaEnvelope {
    rho_evals: Vec<f64>,
    nr: f64,
    grid: Vec<f64>,
}

impl FixedSigmaEnvelope {
    fn eval(&self, sigma: &HermitianOperator, rho_vecs: &CMat) -> (f64, f64) {
        let sdec = eigh(sigma);
        let d = sigma.dim();
        let cross = rho_vecs.adjoint() * &sdec.eigenvectors;
        let mut overlap = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                overlap[i * d + j] = cross[(i, j)].norm_sqr();
            }
        }
        let q = |a: f64| -> f64 {
            let mut acc = 0.0;
            for (i, &li) in self.rho_evals.iter().enumerate() {
                if li <= 0.0 {
                    continue;
                }
                let lia = li.powf(a);
                for (j, &mj) in sdec.eigenvalues.iter().enumerate() {
                    if mj <= 0.0 {
                        continue;
                    }
                    acc += lia * mj.powf(1.0 - a) * overlap[i * d + j];
                }
            }
            acc
        };
        let f = |a: f64| -> f64 {
            let qv = q(a);
            if qv <= 0.0 {
                return f64::INFINITY;
            }
            let div = qv.log2() / (a - 1.0);
            (a - 1.0) / a * (self.nr - div)
        };
        sup_over_grid(&f, &self.grid)
    }
}

pub fn minimax_swap_check(
    rho: &DensityMatrix,
    r: f64,
    n: usize,
    alpha_grid: &[f64],
) -> Result<MinimaxReport> {
    if alpha_grid.is_empty() || alpha_grid.iter().any(|&a| !(0.0 < a && a < 1.0)) {
        return Err(Error::Domain("alpha grid must be a nonempty subset of (0,1)".into()));
    }
    let mut grid = alpha_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rho_n = rho.tensor_power(n)?;
    let nr = r * n as f64;
    let layout = rho_n.layout();

    // sup-inf: inner PPT minimization solved per alpha
    let memo = MemoDivergence::new(|alpha: f64| {
        let sol = min_petz_ppt(RenyiOrder::new(alpha)?, &rho_n)?;
        Ok((sol.value, sol.gap))
    });
    let outer = |alpha: f64| -> f64 {
        let (d, _) = memo.get(alpha);
        (alpha - 1.0) / alpha * (nr - d)
    };
    let (sup_inf_raw, sup_inf_alpha) = sup_over_grid(&outer, &grid);
    // warm-start the joint problem with the minimizer at the outer argmax
    let warm_sigma = min_petz_ppt(RenyiOrder::new(sup_inf_alpha)?, &rho_n)?.primal;
    if let Some(e) = memo.into_failure() {
        return Err(e);
    }

    // inf-sup: Frank-Wolfe on the (convex) alpha-sup envelope with a
    // Danskin gradient at the inner maximizer
    let rho_dec = eigh(rho_n.op());
    let envelope = FixedSigmaEnvelope {
        rho_evals: rho_dec.eigenvalues.iter().copied().collect(),
        nr,
        grid: grid.clone(),
    };
    let rho_vecs = rho_dec.eigenvectors.clone();
    let objective = |sigma: &HermitianOperator| -> f64 { -envelope.eval(sigma, &rho_vecs).0 };
    let rho_op = rho_n.op().clone();
    let gradient = |sigma: &HermitianOperator| -> Result<HermitianOperator> {
        let (_, astar) = envelope.eval(sigma, &rho_vecs);
        let rho_a = frac_power(&rho_op, astar, SUPPORT_CUTOFF)?;
        let sdec = eigh(sigma);
        let grad_q = daleckii_krein(
            &sdec,
            rho_a.matrix(),
            |l| if l > 0.0 { l.powf(1.0 - astar) } else { 0.0 },
            |l| (1.0 - astar) * l.max(1e-18).powf(-astar),
        );
        // q recomputed in the eigenbasis of sigma
        let u = &sdec.eigenvectors;
        let k = u.adjoint() * rho_a.matrix() * u;
        let qv: f64 = sdec
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(j, &l)| l.powf(1.0 - astar) * k[(j, j)].re)
            .sum();
        if qv <= 0.0 {
            return Err(Error::SolverFailure("Petz kernel collapsed to zero".into()));
        }
        Ok(HermitianOperator::new_unchecked(
            grad_q / crate::linalg::Cpx::new(astar * LN2 * qv, 0.0),
            sigma.layout(),
        ))
    };
    let converged = |_v: f64, gap: f64| gap <= 1e-6;
    let out = crate::conic::fw::frank_wolfe_max(
        layout,
        &objective,
        &gradient,
        &converged,
        &[warm_sigma],
    )?;
    let inf_sup_raw = -out.value;
    let (_, inf_sup_alpha) = {
        let rho_vecs2 = eigh(rho_n.op()).eigenvectors.clone();
        FixedSigmaEnvelope {
            rho_evals: eigh(rho_n.op()).eigenvalues.iter().copied().collect(),
            nr,
            grid,
        }
        .eval(&out.sigma, &rho_vecs2)
    };
    let sup_inf = sup_inf_raw.max(0.0);
    let inf_sup = inf_sup_raw.max(0.0);
    Ok(MinimaxReport {
        sup_inf,
        inf_sup,
        difference: (sup_inf - inf_sup).abs(),
        sup_inf_alpha,
        inf_sup_alpha,
        fw_gap: out.gap,
    })
}

/// Hoeffding exponents at rates m/n for a fixed Bell-pair budget m,
/// reported next to the reverse relative entropy of the single-copy state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VanishingRateReport {
    pub entries: Vec<ExponentSample>,
    /// Reverse relative entropy of entanglement in bits; None when the
    /// support condition makes it infinite.
    pub reverse_bits: Option<f64>,
    pub reverse_explanation: Option<String>,
    pub reverse_gap: f64,
}

pub fn vanishing_rate_diagnostic(
    rho: &DensityMatrix,
    m: usize,
    n_list: &[usize],
) -> Result<VanishingRateReport> {
    if m == 0 {
        return Err(Error::Domain("Bell-pair budget m must be positive".into()));
    }
    let mut entries = Vec::new();
    for &n in n_list {
        let r = m as f64 / n as f64;
        entries.push(hoeffding_exponent(rho, r, n)?);
    }
    let (reverse_bits, reverse_explanation, reverse_gap) = match reverse_rel_ent_ppt(rho)? {
        ReverseOutcome::Finite(sol) => (Some(sol.value), None, sol.gap),
        ReverseOutcome::Infinite { explanation } => (None, Some(explanation), 0.0),
    };
    Ok(VanishingRateReport { entries, reverse_bits, reverse_explanation, reverse_gap })
}

/// Threshold-protocol exponent at finite n, for the optimality-ordering
/// check against reliability_measured.
pub fn protocol_exponent(rho: &DensityMatrix, n: usize, s: f64, r: f64) -> Result<f64> {
    let (test, _) = crate::protocol::threshold_test(rho, n, s, r)?;
    let rho_n = rho.tensor_power(n)?;
    let err = crate::protocol::type2_error(&test, &rho_n);
    if err <= ZERO_ERROR_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(-err.log2() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{hayashi_rate, SchmidtVector};
    use crate::linalg::{isotropic, max_entangled, maximally_mixed, pure_from_schmidt, BipartitionLayout};

    #[test]
    fn hoeffding_ppt_state_is_zero() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let s = hoeffding_exponent(&maximally_mixed(l), 0.5, 1).unwrap();
        assert!(s.value.abs() < 1e-4, "value {}", s.value);
        assert!(!s.diverging);
    }

    #[test]
    fn hoeffding_bell_diverges_below_one() {
        let phi = max_entangled(1).unwrap();
        let s = hoeffding_exponent(&phi, 0.5, 1).unwrap();
        assert!(s.diverging, "value {} should be flagged diverging", s.value);
    }

    #[test]
    fn hoeffding_non_increasing_in_rate() {
        let rho = isotropic(0.9, 1).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let r = 0.05 + 0.09 * k as f64;
            let s = hoeffding_exponent(&rho, r, 1).unwrap();
            assert!(
                s.value <= prev + 1e-6,
                "exponent increased at r={r}: {} > {prev}",
                s.value
            );
            prev = s.value;
        }
    }

    #[test]
    fn hoeffding_crosses_at_hayashi_rate() {
        let lambdas = vec![0.8, 0.2];
        let rho = pure_from_schmidt(&lambdas).unwrap();
        let schmidt = SchmidtVector::new(lambdas).unwrap();
        let e = 0.1;
        let want_rate = hayashi_rate(e, &schmidt).unwrap();
        // bisect the non-increasing exponent curve for H(r) = e
        let h = |r: f64| hoeffding_exponent(&rho, r, 1).unwrap().value;
        let (mut lo, mut hi) = (0.16, 0.72);
        for _ in 0..14 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > e {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);
        assert!(
            (crossing - want_rate).abs() <= 1e-3,
            "crossing {crossing} vs hayashi {want_rate}"
        );
    }

    #[test]
    fn strong_converse_bell_closed_form() {
        let phi = max_entangled(1).unwrap();
        let s = strong_converse_bound(&phi, 2.0, 1).unwrap();
        assert!((s.value - 1.0).abs() <= 1e-3, "value {}", s.value);
        for r in [0.2, 0.7] {
            let below = strong_converse_bound(&phi, r, 1).unwrap();
            assert!(
                (below.value - (r - 1.0).max(0.0)).abs() <= 1e-3,
                "r={r}: {}",
                below.value
            );
        }
        // monotone in r
        let mut prev = -1.0;
        for r in [1.2, 1.5, 2.0, 3.0] {
            let v = strong_converse_bound(&phi, r, 1).unwrap().value;
            assert!(v >= prev - 1e-9);
            prev = v;
        }
    }

    #[test]
    fn reliability_bell_zero_error() {
        let phi = max_entangled(1).unwrap();
        let rs = StateSet::from_vertices(vec![phi]).unwrap();
        let curve = reliability_measured(&rs, 0.5, 2).unwrap();
        assert_eq!(curve.samples.len(), 1);
        assert!(curve.samples[0].zero_error);
        assert_eq!(curve.samples[0].n, 2);
    }

    #[test]
    fn reliability_ppt_closed_form() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let rs = StateSet::from_vertices(vec![maximally_mixed(l)]).unwrap();
        let curve = reliability_measured(&rs, 1.0, 2).unwrap();
        for s in &curve.samples {
            let m = s.n as i32; // floor(1.0 * n)
            let want = -(1.0 - 2f64.powi(-m)).log2() / s.n as f64;
            assert!((s.value - want).abs() < 1e-6, "n={}: {} vs {want}", s.n, s.value);
        }
    }

    #[test]
    fn fidelity_identities() {
        let phi = max_entangled(1).unwrap();
        let rs = StateSet::from_vertices(vec![phi]).unwrap();
        let f = fidelity_from_beta(&rs, 1.0, 1).unwrap();
        assert!((f - 1.0).abs() < 1e-7, "fidelity {f}");
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let rs_ppt = StateSet::from_vertices(vec![maximally_mixed(l)]).unwrap();
        let vertices: Vec<DensityMatrix> = rs_ppt.vertices.clone();
        let beta = beta_opt(&StateSet::from_vertices(vertices).unwrap(), 0.5).unwrap().value;
        let fid = fidelity_from_beta(&rs_ppt, 1.0, 1).unwrap();
        assert!((fid + beta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minimax_swap_isotropic() {
        let rho = isotropic(0.9, 1).unwrap();
        let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let report = minimax_swap_check(&rho, 0.2, 1, &grid).unwrap();
        assert!(
            report.difference <= 1e-3,
            "sup-inf {} vs inf-sup {}",
            report.sup_inf,
            report.inf_sup
        );
    }

    #[test]
    fn minimax_ppt_both_zero() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let rho = maximally_mixed(l);
        let grid = [0.2, 0.5, 0.8];
        let report = minimax_swap_check(&rho, 0.3, 1, &grid).unwrap();
        assert!(report.sup_inf.abs() < 1e-6);
        assert!(report.inf_sup.abs() < 1e-6);
    }

    #[test]
    fn vanishing_rate_reports() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let mixed = maximally_mixed(l);
        let rep = vanishing_rate_diagnostic(&mixed, 1, &[1]).unwrap();
        assert!(rep.entries[0].value.abs() < 1e-4);
        assert!(rep.reverse_bits.unwrap().abs() < 1e-6);

        let rho = isotropic(0.9, 1).unwrap();
        let rep = vanishing_rate_diagnostic(&rho, 1, &[1, 2]).unwrap();
        assert_eq!(rep.entries.len(), 2);
        for e in &rep.entries {
            assert!(e.maximizer.is_some());
            assert!(e.value >= 0.0);
        }
        assert!(rep.reverse_bits.is_some(), "full-rank state has finite reverse divergence");
    }

    #[test]
    fn measured_reliability_dominates_explicit_protocol() {
        // the optimal test can only beat the threshold construction, as
        // long as the latter stays within the same type-I budget
        let rho = isotropic(0.9, 1).unwrap();
        let (n, r, s) = (2usize, 0.5f64, 0.5f64);
        let set = StateSet::from_vertices(vec![rho.clone()]).unwrap();
        let curve = reliability_measured(&set, r, n).unwrap();
        let measured = curve.samples.iter().find(|smp| smp.n == n).unwrap();
        let (_, params) = crate::protocol::threshold_test(&rho, n, s, r).unwrap();
        assert!(params.type1_measured <= params.type1_budget + 1e-9);
        let protocol = protocol_exponent(&rho, n, s, r).unwrap();
        assert!(
            measured.zero_error || measured.value >= protocol - 1e-9,
            "optimal {} bits below protocol {} bits",
            measured.value,
            protocol
        );
    }

    #[test]
    fn csv_is_deterministic() {
        let phi = max_entangled(1).unwrap();
        let rs = StateSet::from_vertices(vec![phi]).unwrap();
        let a = reliability_measured(&rs, 1.0, 2).unwrap().to_csv();
        let b = reliability_measured(&rs, 1.0, 2).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with("n,r,value_bits,maximizer,gap,zero_error,diverging,tail\n"));
    }
}
