//! Seeded randomized property suites shared by the command-line runner and
//! the acceptance tests: trace-inequality checks for dominance projectors,
//! universal-state domination, channel round trips, and the isotropic
//! PPT boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conic::is_ppt;
use crate::error::{Error, Result};
use crate::linalg::{
    dominance_projector, eigh, frac_power, isotropic, random_density, random_product_state,
    BipartitionLayout, HermitianOperator, SUPPORT_CUTOFF,
};
use crate::protocol::{channel_from_test, test_from_channel, universal_state, BinaryTest};

/// Outcome of one randomized suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub checks: usize,
    pub violations: usize,
    /// Most adverse margin seen; negative values within tolerance are the
    /// expected numerical noise, positive margins are slack.
    pub worst_margin: f64,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> Self {
        Self {
            suite: suite.into(),
            seed,
            trials: 0,
            checks: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, margin: f64, tol: f64) {
        self.checks += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if margin < -tol {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// For random PSD pairs A, B and s in {0.1, ..., 0.9}:
/// tr({A>=B} B) + tr({A<B} A) <= tr(A^s B^(1-s)) + 1e-10.
pub fn audenaert_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("audenaert", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        report.trials += 1;
        let d = rng.gen_range(2..=8usize);
        let layout = BipartitionLayout::new(d, 1, 1)?;
        let a = random_density(layout, &mut rng)
            .op()
            .scale(rng.gen_range(0.5..2.0));
        let b = random_density(layout, &mut rng)
            .op()
            .scale(rng.gen_range(0.5..2.0));
        let proj = dominance_projector(&a, &b)?;
        // tr({A>=B} B) + tr A - tr({A>=B} A)
        let lhs = proj.inner(&b) + a.trace() - proj.inner(&a);
        for k in 1..=9 {
            let s = k as f64 / 10.0;
            let as_pow = frac_power(&a, s, SUPPORT_CUTOFF)?;
            let bs_pow = frac_power(&b, 1.0 - s, SUPPORT_CUTOFF)?;
            let rhs = as_pow.inner(&bs_pow);
            report.record(rhs - lhs, 1e-10);
        }
    }
    Ok(report)
}

/// Universal-state domination: g * omega - sigma^(x n) is PSD for random
/// two-qubit product states, n in {2, 3}.
pub fn domination_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("domination", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = BipartitionLayout::qubit_pairs(1)?;
    for n in [2usize, 3] {
        let u = universal_state(n, 2, 2)?;
        let scaled = u.omega.op().scale(u.g);
        for _ in 0..trials {
            report.trials += 1;
            let sigma = random_product_state(layout, &mut rng)?;
            let slack = scaled.sub(sigma.tensor_power(n)?.op())?;
            report.record(eigh(&slack).min_eigenvalue(), 1e-9);
        }
    }
    Ok(report)
}

/// test -> channel -> test round trip is the identity to 1e-12.
pub fn round_trip_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("round-trip", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = BipartitionLayout::qubit_pairs(1)?;
    for _ in 0..trials {
        report.trials += 1;
        let rho = random_density(layout, &mut rng);
        let dec = eigh(rho.op());
        let top = dec.max_eigenvalue();
        let test = BinaryTest::new(HermitianOperator::new_unchecked(
            dec.map(|l| l / top),
            layout,
        ))?;
        let m = rng.gen_range(1..=2usize);
        let channel = channel_from_test(test.clone(), m)?;
        let back = test_from_channel(&channel)?;
        let dev = (back.operator().matrix() - test.operator().matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        report.record(1e-12 - dev, 0.0);
    }
    Ok(report)
}

/// Isotropic states sit exactly on the PPT boundary at p = 2^-m.
pub fn ppt_boundary_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("ppt-boundary", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in [1usize, 2] {
        let boundary = 2f64.powi(-(m as i32));
        report.trials += 1;
        let on = isotropic(boundary, m)?;
        report.record(if is_ppt(&on, 1e-10) { 1.0 } else { -1.0 }, 0.0);
        let off = isotropic(boundary + 1e-3, m)?;
        report.record(if is_ppt(&off, 1e-10) { -1.0 } else { 1.0 }, 0.0);
        // interior samples stay inside
        for _ in 0..trials {
            report.trials += 1;
            let p = rng.gen_range(0.0..boundary);
            report.record(if is_ppt(&isotropic(p, m)?, 1e-10) { 1.0 } else { -1.0 }, 0.0);
        }
    }
    Ok(report)
}

/// Run a named suite.
pub fn run_suite(name: &str, trials: usize, seed: u64) -> Result<SuiteReport> {
    match name {
        "audenaert" => audenaert_suite(trials, seed),
        "domination" => domination_suite(trials, seed),
        "round-trip" | "roundtrip" => round_trip_suite(trials, seed),
        "ppt-boundary" | "ppt" => ppt_boundary_suite(trials, seed),
        other => Err(Error::Domain(format!(
            "unknown suite '{other}' (expected audenaert, domination, round-trip, ppt-boundary)"
        ))),
    }
}

pub const ALL_SUITES: [&str; 4] = ["audenaert", "domination", "round-trip", "ppt-boundary"];
