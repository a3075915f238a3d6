//! Frank-Wolfe over the PPT spectrahedron with away steps. The linear
//! subproblem is `max_linear_ppt` of the current gradient, so every iterate
//! carries a duality-gap certificate from concavity:
//! F* - F(sigma) <= <grad, s - sigma>.

use super::ppt::{is_ppt, max_linear_ppt, ConicSolution};
use crate::divergence::{golden_max, DivergenceValue, RenyiOrder};
use crate::error::{Error, Result};
use crate::linalg::{
    daleckii_krein, eigh, frac_power, log2_on_support, maximally_mixed, BipartitionLayout, CMat,
    Cpx, DensityMatrix, HermitianOperator, SUPPORT_CUTOFF,
};

pub(crate) struct FwOutcome {
    pub sigma: HermitianOperator,
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
}

const FW_MAX_ITER: usize = 500;
const LMO_GAP: f64 = 1e-9;

/// Maximize a concave objective over PPT densities. `converged(value, gap)`
/// decides termination from the raw Frank-Wolfe gap; `warm` supplies extra
/// starting atoms (must be PPT densities).
pub(crate) fn frank_wolfe_max(
    layout: BipartitionLayout,
    objective: &dyn Fn(&HermitianOperator) -> f64,
    gradient: &dyn Fn(&HermitianOperator) -> Result<HermitianOperator>,
    converged: &dyn Fn(f64, f64) -> bool,
    warm: &[HermitianOperator],
) -> Result<FwOutcome> {
    let mut atoms: Vec<CMat> = vec![maximally_mixed(layout).matrix().clone()];
    let mut weights: Vec<f64> = vec![1.0];
    for w in warm {
        atoms.push(w.matrix().clone());
        weights.push(0.0);
    }
    // seed weights: best single atom
    {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, a) in atoms.iter().enumerate() {
            let v = objective(&HermitianOperator::new_unchecked(a.clone(), layout));
            if v > best.1 {
                best = (i, v);
            }
        }
        // mix toward the best atom but stay interior via the mixed atom
        for w in weights.iter_mut() {
            *w = 0.0;
        }
        weights[0] = 0.05;
        weights[best.0] += 0.95;
    }

    let mix = |atoms: &[CMat], weights: &[f64]| -> HermitianOperator {
        let d = layout.total_dim();
        let mut m = CMat::zeros(d, d);
        for (a, &w) in atoms.iter().zip(weights) {
            if w != 0.0 {
                m += a * Cpx::new(w, 0.0);
            }
        }
        HermitianOperator::new_unchecked(m, layout)
    };

    let mut sigma = mix(&atoms, &weights);
    let mut value = objective(&sigma);
    if !value.is_finite() {
        return Err(Error::SolverFailure("Frank-Wolfe start infeasible".into()));
    }
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..FW_MAX_ITER {
        iterations = it + 1;
        let g = gradient(&sigma)?;
        let lmo = max_linear_ppt(&g)?;
        debug_assert!(lmo.gap <= LMO_GAP.max(1e-7));
        let s = lmo.primal;
        gap = g.inner(&s) - g.inner(&sigma) + lmo.gap;
        if converged(value, gap.max(0.0)) {
            break;
        }
        // away atom among active ones
        let mut away_idx = 0;
        let mut away_score = f64::INFINITY;
        for (i, (a, &w)) in atoms.iter().zip(&weights).enumerate() {
            if w > 1e-14 {
                let sc = g.inner(&HermitianOperator::new_unchecked(a.clone(), layout));
                if sc < away_score {
                    away_score = sc;
                    away_idx = i;
                }
            }
        }
        let fw_score = g.inner(&s) - g.inner(&sigma);
        let away_gain = g.inner(&sigma) - away_score;
        let use_away = away_gain > fw_score && weights[away_idx] < 1.0 - 1e-12;

        let (dir, gamma_max, atom_idx) = if use_away {
            let a = HermitianOperator::new_unchecked(atoms[away_idx].clone(), layout);
            let w = weights[away_idx];
            (sigma.sub(&a)?, w / (1.0 - w), away_idx)
        } else {
            // register (or find) the new atom
            let mut idx = None;
            for (i, a) in atoms.iter().enumerate() {
                let dist = (a - s.matrix()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if dist < 1e-9 {
                    idx = Some(i);
                    break;
                }
            }
            let idx = idx.unwrap_or_else(|| {
                atoms.push(s.matrix().clone());
                weights.push(0.0);
                atoms.len() - 1
            });
            (s.sub(&sigma)?, 1.0, idx)
        };

        let line = |gamma: f64| -> f64 {
            let trial = sigma.add(&dir.scale(gamma)).unwrap();
            let v = objective(&trial);
            if v.is_finite() {
                v
            } else {
                f64::NEG_INFINITY
            }
        };
        let (gamma, fval) = golden_max(&line, 0.0, gamma_max, 1e-9 * gamma_max.max(1e-9));
        if fval < value - 1e-12 || gamma <= 0.0 {
            // no measurable progress along either direction
            break;
        }
        if use_away {
            for w in weights.iter_mut() {
                *w *= 1.0 + gamma;
            }
            weights[atom_idx] -= gamma;
        } else {
            for w in weights.iter_mut() {
                *w *= 1.0 - gamma;
            }
            weights[atom_idx] += gamma;
        }
        for w in weights.iter_mut() {
            if *w < 1e-15 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        sigma = mix(&atoms, &weights);
        let new_value = objective(&sigma);
        debug_assert!(new_value >= value - 1e-10, "FW objective decreased");
        value = new_value.max(value);
    }
    Ok(FwOutcome { sigma, value, gap: gap.max(0.0), iterations })
}

/// Petz divergence to the PPT set, alpha in (0,1):
/// D_{P,alpha}(rho||PPT) = min over PPT sigma, computed by maximizing the
/// concave Q_alpha(sigma) = tr[rho^alpha sigma^(1-alpha)].
pub fn min_petz_ppt(alpha: RenyiOrder, rho: &DensityMatrix) -> Result<ConicSolution> {
    let a = alpha.get();
    if a >= 1.0 {
        return Err(Error::Domain(format!("Petz minimization needs alpha in (0,1), got {a}")));
    }
    let layout = rho.layout();
    let rho_a = frac_power(rho.op(), a, SUPPORT_CUTOFF)?;

    let objective = move |sigma: &HermitianOperator| -> f64 {
        let dec = eigh(sigma);
        let u = &dec.eigenvectors;
        let k = u.adjoint() * rho_a.matrix() * u;
        dec.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(j, &l)| l.powf(1.0 - a) * k[(j, j)].re)
            .sum()
    };
    let rho_a2 = frac_power(rho.op(), a, SUPPORT_CUTOFF)?;
    let gradient = move |sigma: &HermitianOperator| -> Result<HermitianOperator> {
        let dec = eigh(sigma);
        let g = daleckii_krein(
            &dec,
            rho_a2.matrix(),
            |l| if l > 0.0 { l.powf(1.0 - a) } else { 0.0 },
            |l| (1.0 - a) * l.max(1e-18).powf(-a),
        );
        Ok(HermitianOperator::new_unchecked(g, layout))
    };
    // convergence measured in divergence units
    let converged = move |q: f64, gap: f64| -> bool {
        q > 0.0 && (1.0 + gap / q).log2() / (1.0 - a) <= 1e-5
    };
    let warm: Vec<HermitianOperator> =
        if is_ppt(rho, 1e-12) { vec![rho.op().clone()] } else { vec![] };
    let out = frank_wolfe_max(layout, &objective, &gradient, &converged, &warm)?;
    let q = out.value;
    if q <= 0.0 {
        return Err(Error::SolverFailure("Petz objective collapsed to zero".into()));
    }
    Ok(ConicSolution {
        value: (q.log2() / (a - 1.0)).max(0.0),
        primal: out.sigma,
        dual_certificate: vec![],
        gap: (1.0 + out.gap / q).log2() / (1.0 - a),
        iterations: out.iterations,
    })
}

/// Relative entropy of entanglement over the PPT set (forward direction):
/// min over PPT sigma of D(rho||sigma).
pub fn rel_ent_ppt(rho: &DensityMatrix) -> Result<ConicSolution> {
    let layout = rho.layout();
    let d = layout.total_dim();
    let rho_dec = eigh(rho.op());
    let entropy_term: f64 = {
        let cut = SUPPORT_CUTOFF * rho_dec.max_eigenvalue().max(0.0);
        rho_dec.eigenvalues.iter().filter(|&&l| l > cut).map(|&l| l * l.log2()).sum()
    };
    let rho_mat = rho.matrix().clone();
    // F(sigma) = tr(rho log2 sigma); D = entropy_term - F
    let objective = move |sigma: &HermitianOperator| -> f64 {
        let dec = eigh(sigma);
        let cut = SUPPORT_CUTOFF * dec.max_eigenvalue().max(0.0);
        let u = &dec.eigenvectors;
        let k = u.adjoint() * &rho_mat * u;
        let mut f = 0.0;
        for (j, &l) in dec.eigenvalues.iter().enumerate() {
            let w = k[(j, j)].re;
            if l <= cut {
                if w > 1e-12 {
                    return f64::NEG_INFINITY;
                }
            } else {
                f += w * l.log2();
            }
        }
        f
    };
    let rho_mat2 = rho.matrix().clone();
    let gradient = move |sigma: &HermitianOperator| -> Result<HermitianOperator> {
        let dec = eigh(sigma);
        let g = daleckii_krein(
            &dec,
            &rho_mat2,
            |l| l.max(1e-300).log2(),
            |l| 1.0 / (l.max(1e-18) * std::f64::consts::LN_2),
        );
        Ok(HermitianOperator::new_unchecked(g, layout))
    };
    let converged = |_v: f64, gap: f64| gap <= 1e-5;
    let warm: Vec<HermitianOperator> =
        if is_ppt(rho, 1e-12) { vec![rho.op().clone()] } else { vec![] };
    let _ = d;
    let out = frank_wolfe_max(layout, &objective, &gradient, &converged, &warm)?;
    Ok(ConicSolution {
        value: (entropy_term - out.value).max(0.0),
        primal: out.sigma,
        dual_certificate: vec![],
        gap: out.gap,
        iterations: out.iterations,
    })
}

/// Reverse relative entropy of entanglement: min over PPT sigma of
/// D(sigma||rho). Infinite whenever no PPT state fits inside supp(rho).
pub enum ReverseOutcome {
    Finite(ConicSolution),
    Infinite { explanation: String },
}

impl ReverseOutcome {
    pub fn value(&self) -> DivergenceValue {
        match self {
            Self::Finite(s) => DivergenceValue::Bits(s.value),
            Self::Infinite { .. } => DivergenceValue::Infinite,
        }
    }
}

pub fn reverse_rel_ent_ppt(rho: &DensityMatrix) -> Result<ReverseOutcome> {
    let layout = rho.layout();
    let d = layout.total_dim();
    let rho_dec = eigh(rho.op());
    let cut = SUPPORT_CUTOFF * rho_dec.max_eigenvalue().max(0.0);
    let rank = rho_dec.eigenvalues.iter().filter(|&&l| l > cut).count();
    if rank < d {
        // feasibility: is there a PPT state supported inside supp(rho)?
        let mut proj = CMat::zeros(d, d);
        for (k, &l) in rho_dec.eigenvalues.iter().enumerate() {
            if l > cut {
                let col = rho_dec.eigenvectors.column(k);
                for i in 0..d {
                    for j in 0..d {
                        proj[(i, j)] += col[i] * col[j].conj();
                    }
                }
            }
        }
        let sup = max_linear_ppt(&HermitianOperator::new_unchecked(proj, layout))?;
        if sup.value + sup.gap < 1.0 - 1e-9 {
            return Ok(ReverseOutcome::Infinite {
                explanation: format!(
                    "every PPT state puts weight at least {:.3e} outside supp(rho) \
                     (rank {rank} of {d}), so D(sigma||rho) is infinite for all of them",
                    1.0 - sup.value - sup.gap
                ),
            });
        }
        return Err(Error::Unsupported(
            "rank-deficient target whose support admits PPT states".into(),
        ));
    }
    let log_rho = log2_on_support(rho.op(), SUPPORT_CUTOFF)?;
    // F(sigma) = -D(sigma||rho) = -tr(sigma log2 sigma) + tr(sigma log2 rho)
    let lr = log_rho.clone();
    let objective = move |sigma: &HermitianOperator| -> f64 {
        let dec = eigh(sigma);
        let scut = SUPPORT_CUTOFF * dec.max_eigenvalue().max(0.0);
        let ent: f64 =
            dec.eigenvalues.iter().filter(|&&l| l > scut).map(|&l| l * l.log2()).sum();
        -ent + sigma.inner(&lr)
    };
    let lr2 = log_rho;
    let gradient = move |sigma: &HermitianOperator| -> Result<HermitianOperator> {
        let dec = eigh(sigma);
        let d = sigma.dim();
        let u = &dec.eigenvectors;
        let mut logs = CMat::zeros(d, d);
        for (k, &l) in dec.eigenvalues.iter().enumerate() {
            let w = Cpx::new(l.max(1e-18).log2() + 1.0 / std::f64::consts::LN_2, 0.0);
            let col = u.column(k);
            for i in 0..d {
                for j in 0..d {
                    logs[(i, j)] += col[i] * col[j].conj() * w;
                }
            }
        }
        let g = lr2.matrix() - logs;
        Ok(HermitianOperator::new_unchecked(g, layout))
    };
    let converged = |_v: f64, gap: f64| gap <= 1e-5;
    let out = frank_wolfe_max(layout, &objective, &gradient, &converged, &[])?;
    Ok(ReverseOutcome::Finite(ConicSolution {
        value: (-out.value).max(0.0),
        primal: out.sigma,
        dual_certificate: vec![],
        gap: out.gap,
        iterations: out.iterations,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{petz_renyi, pure_petz_entanglement, SchmidtVector};
    use crate::linalg::{isotropic, max_entangled, pure_from_schmidt, random_density};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn petz_ppt_input_is_zero() {
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let mm = maximally_mixed(l);
        let sol = min_petz_ppt(RenyiOrder::new(0.5).unwrap(), &mm).unwrap();
        assert!(sol.value.abs() < 1e-7, "value {}", sol.value);
    }

    #[test]
    fn petz_bell_is_one_bit() {
        let phi = max_entangled(1).unwrap();
        for alpha in [0.3, 0.5, 0.7] {
            let sol = min_petz_ppt(RenyiOrder::new(alpha).unwrap(), &phi).unwrap();
            assert!((sol.value - 1.0).abs() < 1e-4, "alpha={alpha}: {}", sol.value);
        }
    }

    #[test]
    fn petz_matches_pure_state_formula() {
        let psi = pure_from_schmidt(&[0.8, 0.2]).unwrap();
        let schmidt = SchmidtVector::new(vec![0.8, 0.2]).unwrap();
        let alpha = RenyiOrder::new(0.5).unwrap();
        let want = pure_petz_entanglement(alpha, &schmidt).bits().unwrap();
        let sol = min_petz_ppt(alpha, &psi).unwrap();
        assert!((sol.value - want).abs() < 1e-4, "{} vs {want}", sol.value);
    }

    #[test]
    fn petz_min_below_any_ppt_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        let rho = random_density(l, &mut rng);
        let alpha = RenyiOrder::new(0.5).unwrap();
        let sol = min_petz_ppt(alpha, &rho).unwrap();
        for sigma0 in [maximally_mixed(l), isotropic(0.4, 1).unwrap()] {
            let ub = petz_renyi(alpha, &rho, &sigma0).unwrap().bits().unwrap();
            assert!(sol.value <= ub + 1e-9, "{} vs {ub}", sol.value);
        }
    }

    #[test]
    fn ree_bell_is_one_bit() {
        let phi = max_entangled(1).unwrap();
        let sol = rel_ent_ppt(&phi).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-3, "value {}", sol.value);
        assert!(sol.gap <= 1e-4, "gap {}", sol.gap);
    }

    #[test]
    fn ree_ppt_input_is_zero() {
        let iso = isotropic(0.4, 1).unwrap();
        let sol = rel_ent_ppt(&iso).unwrap();
        assert!(sol.value.abs() < 1e-6, "value {}", sol.value);
    }

    #[test]
    fn reverse_ree_bell_is_infinite() {
        let phi = max_entangled(1).unwrap();
        match reverse_rel_ent_ppt(&phi).unwrap() {
            ReverseOutcome::Infinite { explanation } => {
                assert!(explanation.contains("supp"));
            }
            ReverseOutcome::Finite(s) => panic!("expected infinite, got {}", s.value),
        }
    }

    #[test]
    fn reverse_ree_isotropic_matches_restart_oracle() {
        let rho = isotropic(0.9, 1).unwrap();
        let sol = match reverse_rel_ent_ppt(&rho).unwrap() {
            ReverseOutcome::Finite(s) => s,
            ReverseOutcome::Infinite { .. } => panic!("full-rank target"),
        };
        // oracle: multi-start projected descent on D(sigma||rho)
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let l = rho.layout();
        let mut best = f64::INFINITY;
        for s in 0..4 {
            let mut sigma = if s == 0 {
                maximally_mixed(l).op().clone()
            } else {
                super::super::project::random_ppt_state(l, &mut rng).op().clone()
            };
            for _ in 0..200 {
                let dec = eigh(&sigma);
                let d = sigma.dim();
                let mut logs = CMat::zeros(d, d);
                for (k, &lam) in dec.eigenvalues.iter().enumerate() {
                    let w = Cpx::new(
                        lam.max(1e-18).log2() + 1.0 / std::f64::consts::LN_2,
                        0.0,
                    );
                    let col = dec.eigenvectors.column(k);
                    for i in 0..d {
                        for j in 0..d {
                            logs[(i, j)] += col[i] * col[j].conj() * w;
                        }
                    }
                }
                let grad = &logs
                    - crate::linalg::log2_on_support(rho.op(), SUPPORT_CUTOFF)
                        .unwrap()
                        .matrix();
                let step = HermitianOperator::new_unchecked(
                    sigma.matrix() - grad * Cpx::new(0.05, 0.0),
                    l,
                );
                sigma = super::super::project::project_density_ppt(&step)
                    .scale(1.0 - 1e-12)
                    .add(&maximally_mixed(l).op().scale(1e-12))
                    .unwrap();
            }
            let v = crate::divergence::umegaki(
                &DensityMatrix::new(sigma.clone()).unwrap(),
                &rho,
            )
            .unwrap()
            .bits()
            .unwrap();
            best = best.min(v);
        }
        assert!((sol.value - best).abs() < 1e-3, "{} vs oracle {best}", sol.value);
    }
}
