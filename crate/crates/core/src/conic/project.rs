//! Alternating projections onto the PPT density set, a projected-ascent
//! oracle for linear objectives, and projected descent for the sandwiched
//! divergence.

use rand::Rng;

use super::ppt::{is_ppt, ConicSolution};
use crate::divergence::RenyiOrder;
use crate::error::{Error, Result};
use crate::linalg::op::partial_transpose_matrix;
use crate::linalg::{
    daleckii_krein, eigh, eigh_matrix, frac_power, random_density, BipartitionLayout, CMat, Cpx,
    DensityMatrix, HermitianOperator, SUPPORT_CUTOFF,
};

fn project_psd(m: &CMat) -> CMat {
    let dec = eigh_matrix(m);
    let clipped = dec.eigenvalues.map(|l| l.max(0.0));
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (k, &l) in clipped.iter().enumerate() {
        if l > 0.0 {
            let col = dec.eigenvectors.column(k);
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out[(i, j)] += col[i] * col[j].conj() * Cpx::new(l, 0.0);
                }
            }
        }
    }
    out
}

fn project_trace_one(m: &CMat) -> CMat {
    let d = m.nrows();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    let shift = Cpx::new((tr - 1.0) / d as f64, 0.0);
    let mut out = m.clone();
    for k in 0..d {
        out[(k, k)] -= shift;
    }
    out
}

/// Dykstra's algorithm over {X >= 0}, {X^Gamma >= 0}, {tr X = 1}:
/// converges to the Frobenius-nearest PPT density operator.
pub fn project_density_ppt(x: &HermitianOperator) -> HermitianOperator {
    let layout = x.layout();
    let mut z = x.matrix().clone();
    let d = z.nrows();
    let mut p1 = CMat::zeros(d, d);
    let mut p2 = CMat::zeros(d, d);
    let mut p3 = CMat::zeros(d, d);
    let scale = z.iter().map(|c| c.norm()).fold(0.0_f64, f64::max).max(1.0);
    for _ in 0..2000 {
        let prev = z.clone();
        let y1 = project_psd(&(&z + &p1));
        p1 = &z + &p1 - &y1;
        let y2 = {
            let pt = partial_transpose_matrix(&(&y1 + &p2), &layout);
            partial_transpose_matrix(&project_psd(&pt), &layout)
        };
        p2 = &y1 + &p2 - &y2;
        let y3 = project_trace_one(&(&y2 + &p3));
        p3 = &y2 + &p3 - &y3;
        z = y3;
        let delta = (&z - &prev).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if delta < 1e-13 * scale {
            break;
        }
    }
    // final cleanup keeps the result exactly admissible up to tolerance
    let z = project_trace_one(&project_psd(&z));
    HermitianOperator::new_unchecked(z, layout)
}

/// Projected-ascent oracle for max tr(X sigma) over PPT densities.
/// Projecting sigma + eta X back onto the set yields a feasible point whose
/// objective is within diam^2/(2 eta) of the maximum for any feasible
/// sigma, so a ladder of growing eta values converges to the optimum
/// without any step-size tuning; this is an independent check on the SDP
/// path.
pub fn linear_ascent_oracle<R: Rng>(x: &HermitianOperator, starts: usize, rng: &mut R) -> f64 {
    let layout = x.layout();
    let mut best = f64::NEG_INFINITY;
    for s in 0..starts {
        let mut sigma = if s == 0 {
            crate::linalg::maximally_mixed(layout).op().clone()
        } else {
            random_density(layout, rng).op().clone()
        };
        for eta in [1.0, 1e2, 1e4, 1e6] {
            let step = sigma.add(&x.scale(eta)).unwrap();
            sigma = project_density_ppt(&step);
            best = best.max(x.inner(&sigma));
        }
        // polish: the fixed point of sigma <- P(sigma + eta X) satisfies the
        // exact variational optimality condition for any eta > 0
        for _ in 0..400 {
            let next = project_density_ppt(&sigma.add(&x.scale(2.0)).unwrap());
            let delta = (next.matrix() - sigma.matrix())
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
                .sqrt();
            sigma = next;
            best = best.max(x.inner(&sigma));
            if delta < 1e-12 {
                break;
            }
        }
    }
    best
}

/// Result of one projected-descent restart.
#[derive(Debug, Clone)]
pub struct RestartRecord {
    pub value: f64,
    pub stationarity: f64,
}

#[derive(Debug, Clone)]
pub struct SandwichedOutcome {
    pub solution: ConicSolution,
    pub restarts: Vec<RestartRecord>,
}

const SANDWICH_RESTARTS: usize = 5;
const INTERIOR_MIX: f64 = 1e-9;

/// min over PPT sigma of the sandwiched divergence D_{S,alpha}(rho||sigma),
/// alpha > 1, by projected descent with random restarts. The value is an
/// upper bound on the true minimum, certified only by restart agreement;
/// `gap` carries the best stationarity norm.
pub fn min_sandwiched_ppt(alpha: RenyiOrder, rho: &DensityMatrix) -> Result<SandwichedOutcome> {
    let a = alpha.get();
    if a <= 1.0 {
        return Err(Error::Domain(format!("sandwiched minimization needs alpha > 1, got {a}")));
    }
    let layout = rho.layout();
    let d = layout.total_dim();
    let c = (1.0 - a) / (2.0 * a);

    let objective = |sigma: &HermitianOperator| -> f64 {
        // support of rho must sit inside support of sigma
        let dec = eigh(sigma);
        let cut = SUPPORT_CUTOFF * dec.max_eigenvalue().max(0.0);
        let proj_weight: f64 = {
            let mut w = 0.0;
            for (k, &l) in dec.eigenvalues.iter().enumerate() {
                if l <= cut {
                    let col = dec.eigenvectors.column(k);
                    let mut acc = Cpx::new(0.0, 0.0);
                    for i in 0..d {
                        for j in 0..d {
                            acc += col[i].conj() * rho.matrix()[(i, j)] * col[j];
                        }
                    }
                    w += acc.re;
                }
            }
            w
        };
        if proj_weight > 1e-10 {
            return f64::INFINITY;
        }
        let sc = match frac_power(sigma, c, SUPPORT_CUTOFF) {
            Ok(m) => m,
            Err(_) => return f64::INFINITY,
        };
        let y = sc.matrix() * rho.matrix() * sc.matrix();
        let q: f64 = eigh_matrix(&y)
            .eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| l.powf(a))
            .sum();
        if q <= 0.0 {
            f64::INFINITY
        } else {
            q.log2() / (a - 1.0)
        }
    };

    let gradient = |sigma: &HermitianOperator| -> Result<HermitianOperator> {
        let dec = eigh(sigma);
        let sc = frac_power(sigma, c, SUPPORT_CUTOFF)?;
        let y = sc.matrix() * rho.matrix() * sc.matrix();
        let ydec = eigh_matrix(&y);
        let q: f64 = ydec.eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| l.powf(a)).sum();
        // Y^(alpha-1) on support
        let mut ypow = CMat::zeros(d, d);
        for (k, &l) in ydec.eigenvalues.iter().enumerate() {
            if l > 0.0 {
                let col = ydec.eigenvectors.column(k);
                let w = Cpx::new(l.powf(a - 1.0), 0.0);
                for i in 0..d {
                    for j in 0..d {
                        ypow[(i, j)] += col[i] * col[j].conj() * w;
                    }
                }
            }
        }
        let half = rho.matrix() * sc.matrix() * &ypow;
        let w = (&half + half.adjoint()) * Cpx::new(a, 0.0);
        let grad_q = daleckii_krein(
            &dec,
            &w,
            |l| if l > 0.0 { l.powf(c) } else { 0.0 },
            |l| c * l.max(1e-18).powf(c - 1.0),
        );
        // d/dsigma of log2(Q)/(a-1)
        let scale = 1.0 / (q * std::f64::consts::LN_2 * (a - 1.0));
        Ok(HermitianOperator::new_unchecked(grad_q * Cpx::new(scale, 0.0), layout))
    };

    let mm = crate::linalg::maximally_mixed(layout);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let mut restarts = Vec::new();
    let mut best: Option<(f64, HermitianOperator, f64)> = None;
    for s in 0..SANDWICH_RESTARTS {
        let mut sigma = if s == 0 {
            mm.op().clone()
        } else {
            let r = random_density(layout, &mut rng);
            project_density_ppt(r.op())
        };
        // keep strictly inside so negative powers stay bounded
        sigma = sigma.scale(1.0 - INTERIOR_MIX).add(&mm.op().scale(INTERIOR_MIX))?;
        let mut f = objective(&sigma);
        for _ in 0..300 {
            let g = gradient(&sigma)?;
            let gnorm = g.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-14);
            let mut eta = 0.5 / gnorm;
            let mut moved = false;
            for _ in 0..40 {
                let trial = project_density_ppt(&sigma.sub(&g.scale(eta))?)
                    .scale(1.0 - INTERIOR_MIX)
                    .add(&mm.op().scale(INTERIOR_MIX))?;
                let ft = objective(&trial);
                if ft < f - 1e-14 {
                    let delta = (trial.matrix() - sigma.matrix())
                        .iter()
                        .map(|z| z.norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    sigma = trial;
                    f = ft;
                    moved = delta > 1e-11;
                    break;
                }
                eta *= 0.5;
            }
            if !moved {
                break;
            }
        }
        // stationarity: norm of the projected-gradient mapping at fixed step
        let g = gradient(&sigma)?;
        let eta0 = 1e-2;
        let mapped = project_density_ppt(&sigma.sub(&g.scale(eta0))?);
        let stationarity = (mapped.matrix() - sigma.matrix())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            / eta0;
        restarts.push(RestartRecord { value: f, stationarity });
        if best.as_ref().map_or(true, |(bf, _, _)| f < *bf) {
            best = Some((f, sigma, stationarity));
        }
    }
    let (value, sigma, stationarity) = best.unwrap();
    if !value.is_finite() {
        return Err(Error::SolverFailure("all sandwiched restarts failed".into()));
    }
    Ok(SandwichedOutcome {
        solution: ConicSolution {
            value,
            primal: sigma,
            dual_certificate: vec![],
            gap: stationarity,
            iterations: SANDWICH_RESTARTS,
        },
        restarts,
    })
}

/// Draw a random PPT density by projecting a Ginibre state.
pub fn random_ppt_state<R: Rng>(layout: BipartitionLayout, rng: &mut R) -> DensityMatrix {
    let r = random_density(layout, rng);
    if is_ppt(&r, 1e-12) {
        return r;
    }
    let p = project_density_ppt(r.op());
    let mm = crate::linalg::maximally_mixed(layout);
    DensityMatrix::new(p.scale(1.0 - 1e-9).add(&mm.op().scale(1e-9)).unwrap())
        .unwrap_or(mm)
}
