//! PPT-cone membership, linear maximization with dual certificates, and the
//! optimal type-II error SDP.

use serde::{Deserialize, Serialize};

use super::basis::{hermitian_coords, traceless_basis, SparseHerm};
use super::sdp::{solve_barrier, solve_barrier_observed, SdpBlock, SdpProblem};
use crate::error::{Error, Result};
use crate::linalg::{
    eigh_matrix, min_eigenvalue, BipartitionLayout, CMat, Cpx, DensityMatrix, HermitianOperator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateSetKind {
    Vertices,
    Ppt,
}

/// Either a finite convex hull of states or the full PPT set.
#[derive(Debug, Clone)]
pub struct StateSet {
    pub kind: StateSetKind,
    pub vertices: Vec<DensityMatrix>,
    pub layout: BipartitionLayout,
}

impl StateSet {
    pub fn from_vertices(vertices: Vec<DensityMatrix>) -> Result<Self> {
        let layout = vertices
            .first()
            .ok_or_else(|| Error::Domain("state set needs at least one vertex".into()))?
            .layout();
        for v in &vertices {
            if v.layout() != layout {
                return Err(Error::LayoutMismatch("state-set vertices disagree".into()));
            }
        }
        Ok(Self { kind: StateSetKind::Vertices, vertices, layout })
    }

    pub fn ppt(layout: BipartitionLayout) -> Self {
        Self { kind: StateSetKind::Ppt, vertices: Vec::new(), layout }
    }
}

/// Optimizer output with a machine-checkable certificate.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub value: f64,
    pub primal: HermitianOperator,
    pub dual_certificate: Vec<HermitianOperator>,
    pub gap: f64,
    pub iterations: usize,
}

/// Flat record for the CLI's JSON output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub certificate_norms: Vec<f64>,
}

impl ConicSolution {
    pub fn diagnostics(&self) -> SolverDiagnostics {
        SolverDiagnostics {
            value: self.value,
            gap: self.gap,
            iterations: self.iterations,
            certificate_norms: self
                .dual_certificate
                .iter()
                .map(|c| c.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                .collect(),
        }
    }
}

pub fn is_ppt(sigma: &DensityMatrix, tol: f64) -> bool {
    min_eigenvalue(&sigma.op().partial_transpose()) >= -tol
}

/// max tr(X sigma) over sigma >= 0, sigma^Gamma >= 0, tr sigma = 1.
///
/// The state is parametrized as I/d plus a traceless part, so the trace
/// constraint is structural. The dual certificate (mu, Z) satisfies
/// mu I - X - Z^Gamma >= 0 with Z >= 0, proving tr(X sigma) <= mu for every
/// PPT sigma; it is assembled from the barrier duals with an explicit
/// eigenvalue inflation that makes the slack PSD exactly, so `gap` is a
/// rigorous bound.
pub fn max_linear_ppt(x: &HermitianOperator) -> Result<ConicSolution> {
    let layout = x.layout();
    let d = x.dim();
    let basis = traceless_basis(d);
    let n = basis.len();
    let mut eye_over_d = CMat::zeros(d, d);
    for k in 0..d {
        eye_over_d[(k, k)] = Cpx::new(1.0 / d as f64, 0.0);
    }
    let mut b1 = SdpBlock { constant: eye_over_d.clone(), terms: Vec::with_capacity(n) };
    let mut b2 = SdpBlock { constant: eye_over_d, terms: Vec::with_capacity(n) };
    let mut c = Vec::with_capacity(n);
    for (i, b) in basis.iter().enumerate() {
        c.push(-b.trace_with(x.matrix()));
        b1.terms.push((i, b.clone()));
        b2.terms.push((i, b.partial_transpose(&layout)));
    }
    let scale = x.matrix().iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    let p = SdpProblem { nvars: n, c, blocks: vec![b1, b2] };

    // At an exact center, S = X + V1 + (V2)^Gamma is a multiple of I; the
    // traceless residual from imperfect centering is absorbed into mu so
    // the certificate stays rigorous. The residual grows with the condition
    // number of the final blocks, so the best certificate usually appears a
    // few path steps before the floating-point wall — track it along the
    // path.
    struct Best {
        value: f64,
        sigma: HermitianOperator,
        z: HermitianOperator,
        slack: HermitianOperator,
        gap: f64,
    }
    let mut best: Option<Best> = None;
    let cert_tol = 1e-8 * scale;
    let certify = |y: &[f64], duals: &[CMat]| -> Result<Best> {
        let mut sigma_mat = CMat::identity(d, d) / Cpx::new(d as f64, 0.0);
        for (b, &yi) in basis.iter().zip(y) {
            b.add_to(&mut sigma_mat, yi);
        }
        let sigma = HermitianOperator::new_unchecked(sigma_mat, layout);
        let value = x.inner(&sigma);
        let v2 = HermitianOperator::new_unchecked(duals[1].clone(), layout);
        let v2_pt = v2.partial_transpose();
        // mu(s) = lambda_max(X + s Z^Gamma) is convex in the dual scaling s;
        // the minimizer gives the tightest bound available from this dual
        // direction, and the slack is PSD by construction
        let mu_of = |s: f64| -> f64 {
            let m = x.add(&v2_pt.scale(s)).unwrap();
            eigh_matrix(m.matrix()).eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &l| a.max(l))
        };
        let (s_star, neg_mu) = crate::divergence::golden_max(&|s| -mu_of(s), 0.0, 3.0, 1e-10);
        let mu = -neg_mu;
        let mut slack = -x.matrix() - (v2_pt.matrix() * Cpx::new(s_star, 0.0));
        for k in 0..d {
            slack[(k, k)] += Cpx::new(mu, 0.0);
        }
        Ok(Best {
            value,
            sigma,
            z: v2.scale(s_star),
            slack: HermitianOperator::new_unchecked(slack, layout),
            gap: mu - value,
        })
    };
    let mut observer = |y: &[f64], duals: &[CMat], _t: f64| -> bool {
        if let Ok(cand) = certify(y, duals) {
            if best.as_ref().map_or(true, |b| cand.gap < b.gap) {
                let stop = cand.gap <= cert_tol;
                best = Some(cand);
                return stop;
            }
        }
        false
    };
    let out = solve_barrier_observed(&p, vec![0.0; n], 1e-10 * scale, 60_000, &mut observer)?;
    let best = match best {
        Some(b) => b,
        None => certify(&out.y, &out.duals)?,
    };
    Ok(ConicSolution {
        value: best.value,
        primal: best.sigma,
        dual_certificate: vec![best.z, best.slack],
        gap: best.gap,
        iterations: out.newton_iters,
    })
}

/// Optimal type-II error: min over tests M of the worst-case acceptance on
/// the vertex set, subject to accepting every PPT state with probability
/// at least 1 - eps. The PPT constraint max_{sigma PPT} tr((I-M) sigma)
/// <= eps enters through its dual cone: exists Z >= 0 with
/// eps I - (I - M) - Z^Gamma >= 0.
pub fn beta_opt(r: &StateSet, eps: f64) -> Result<ConicSolution> {
    if r.kind != StateSetKind::Vertices {
        return Err(Error::Unsupported("beta_opt needs a finite vertex set".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    let layout = r.layout;
    let d = layout.total_dim();
    let basis = super::basis::hermitian_basis(d);
    let nb = basis.len();
    let tvar = nb;
    let zoff = nb + 1;
    let nvars = 2 * nb + 1;

    let mut m_psd = SdpBlock { constant: CMat::zeros(d, d), terms: vec![] };
    let mut m_leq_i = SdpBlock { constant: CMat::identity(d, d), terms: vec![] };
    let mut z_psd = SdpBlock { constant: CMat::zeros(d, d), terms: vec![] };
    let mut dual_cone = SdpBlock {
        constant: CMat::identity(d, d) * Cpx::new(eps - 1.0, 0.0),
        terms: vec![],
    };
    for (i, b) in basis.iter().enumerate() {
        m_psd.terms.push((i, b.clone()));
        m_leq_i.terms.push((i, b.scaled(-1.0)));
        z_psd.terms.push((zoff + i, b.clone()));
        dual_cone.terms.push((i, b.clone()));
        dual_cone.terms.push((zoff + i, b.partial_transpose(&layout).scaled(-1.0)));
    }
    let mut blocks = vec![m_psd, m_leq_i, z_psd, dual_cone];
    for rho in &r.vertices {
        let mut blk = SdpBlock {
            constant: CMat::zeros(1, 1),
            terms: vec![(tvar, SparseHerm::scalar(1.0))],
        };
        for (i, b) in basis.iter().enumerate() {
            let coeff = b.trace_with(rho.matrix());
            if coeff.abs() > 0.0 {
                blk.terms.push((i, SparseHerm::scalar(-coeff)));
            }
        }
        blocks.push(blk);
    }
    let mut c = vec![0.0; nvars];
    c[tvar] = 1.0;
    let p = SdpProblem { nvars, c, blocks };

    // strictly interior start: M = (1 - eps/2) I, Z = (eps/8) I, t = 2
    let mut y0 = vec![0.0; nvars];
    let m0 = CMat::identity(d, d) * Cpx::new(1.0 - eps / 2.0, 0.0);
    let z0 = CMat::identity(d, d) * Cpx::new(eps / 8.0, 0.0);
    for (i, v) in hermitian_coords(&m0).into_iter().enumerate() {
        y0[i] = v;
    }
    for (i, v) in hermitian_coords(&z0).into_iter().enumerate() {
        y0[zoff + i] = v;
    }
    y0[tvar] = 2.0;

    let out = solve_barrier(&p, y0, 1e-10, 120_000)?;
    let mut m_mat = CMat::zeros(d, d);
    for (b, &yi) in basis.iter().zip(&out.y) {
        b.add_to(&mut m_mat, yi);
    }
    let duals = out
        .duals
        .iter()
        .take(4)
        .map(|v| HermitianOperator::new_unchecked(v.clone(), layout))
        .collect();
    Ok(ConicSolution {
        value: out.y[tvar],
        primal: HermitianOperator::new_unchecked(m_mat, layout),
        dual_certificate: duals,
        gap: out.gap,
        iterations: out.newton_iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        isotropic, max_entangled, maximally_mixed, psd_check, random_density,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ppt_membership_examples() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        assert!(is_ppt(&maximally_mixed(l), 1e-9));
        let phi = max_entangled(1).unwrap();
        assert!(!is_ppt(&phi, 1e-9));
        // sharp isotropic threshold at p = 2^-m
        for m in 1..=2 {
            let p = 2f64.powi(-(m as i32));
            assert!(is_ppt(&isotropic(p, m).unwrap(), 1e-9), "m={m}");
            assert!(!is_ppt(&isotropic(p + 1e-3, m).unwrap(), 1e-9), "m={m}");
        }
        // eigenvalue -1/2 of Phi^Gamma
        assert!((min_eigenvalue(&phi.op().partial_transpose()) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn max_linear_identity_and_neg_identity() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let id = HermitianOperator::identity(l);
        let sol = max_linear_ppt(&id).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-7, "value {}", sol.value);
        assert!(sol.gap <= 1e-7);
        let sol2 = max_linear_ppt(&id.scale(-1.0)).unwrap();
        assert!((sol2.value + 1.0).abs() < 1e-7);
    }

    #[test]
    fn max_linear_bell_projectors() {
        for m in 1..=2 {
            let phi = max_entangled(m).unwrap();
            let sol = max_linear_ppt(phi.op()).unwrap();
            let want = 2f64.powi(-(m as i32));
            assert!((sol.value - want).abs() < 1e-6, "m={m}: {}", sol.value);
            assert!(sol.gap <= 1e-7, "m={m}: gap {}", sol.gap);
            // certificate operators are PSD and certify the bound
            for cert in &sol.dual_certificate {
                assert!(psd_check(cert, 1e-9));
            }
            assert!(is_ppt(&DensityMatrix::new(sol.primal.clone()).unwrap(), 1e-7));
        }
    }

    #[test]
    fn dual_certificate_dominates_sampled_ppt_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let x = random_density(l, &mut rng).op().scale(3.0);
        let sol = max_linear_ppt(&x).unwrap();
        let mu = sol.value + sol.gap;
        let mut checked = 0;
        while checked < 10_000 {
            let s = random_density(l, &mut rng);
            if !is_ppt(&s, 0.0) {
                continue;
            }
            checked += 1;
            assert!(mu - x.inner(s.op()) >= -1e-7);
        }
    }

    #[test]
    fn beta_opt_bell_is_zero() {
        let phi = max_entangled(1).unwrap();
        let r = StateSet::from_vertices(vec![phi]).unwrap();
        let sol = beta_opt(&r, 0.5).unwrap();
        assert!(sol.value.abs() < 1e-6, "beta {}", sol.value);
        for cert in &sol.dual_certificate {
            assert!(psd_check(cert, 1e-9));
        }
    }

    #[test]
    fn beta_opt_ppt_vertex_saturates() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let r = StateSet::from_vertices(vec![maximally_mixed(l)]).unwrap();
        let sol = beta_opt(&r, 0.3).unwrap();
        assert!((sol.value - 0.7).abs() < 1e-6, "beta {}", sol.value);
    }

    #[test]
    fn beta_opt_monotone_and_zero_at_eps_one() {
        let iso = isotropic(0.8, 1).unwrap();
        let r = StateSet::from_vertices(vec![iso]).unwrap();
        let b_half = beta_opt(&r, 0.5).unwrap().value;
        let b_quarter = beta_opt(&r, 0.25).unwrap().value;
        assert!(b_half <= b_quarter + 1e-8);
        let b_one = beta_opt(&r, 1.0).unwrap().value;
        assert!(b_one.abs() < 1e-6);
    }

    #[test]
    fn dual_cone_encoding_validated_against_ascent_oracle() {
        // compare the SDP value of max tr(X sigma) over PPT against
        // projected gradient ascent from random starts
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        for trial in 0..50 {
            let a = random_density(l, &mut rng);
            let b = random_density(l, &mut rng);
            let x = a.op().sub(b.op()).unwrap().scale(2.0);
            let sol = max_linear_ppt(&x).unwrap();
            let oracle = super::super::project::linear_ascent_oracle(&x, 6, &mut rng);
            assert!(
                (sol.value - oracle).abs() <= 1e-5,
                "trial {trial}: sdp {} vs oracle {oracle}",
                sol.value
            );
        }
    }
}
