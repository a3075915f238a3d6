//! Permutation-symmetric universal states: the uniform mixture over the
//! normalized isotypic components of the symmetric-group action on n copies.
//! Every n-fold product state is dominated by g times the universal state.

use crate::error::{Error, Result};
use crate::linalg::{
    digits_to_index, index_to_digits, reorder_factors, BipartitionLayout, CMat, Cpx,
    DensityMatrix, HermitianOperator,
};

/// Universal bipartite state omega_A (x) omega_B on n copies, together with
/// the domination constant g = (n+1)^(dA^2 + dB^2 - 2).
#[derive(Debug, Clone)]
pub struct UniversalState {
    pub omega: DensityMatrix,
    pub g: f64,
}

/// Irreducible character values of S_n for n <= 4, indexed by conjugacy
/// class (cycle type). Classes are listed in a fixed order per n; rows are
/// partitions from the single-row partition down to the single-column one.
struct CharacterTable {
    /// cycle types, each sorted descending
    classes: &'static [&'static [usize]],
    /// rows of character values, one per partition; row 0 entry 0 area:
    /// chi(identity) = dimension of the irrep
    rows: &'static [&'static [f64]],
    /// partitions matching `rows`, as row lengths sorted descending
    partitions: &'static [&'static [usize]],
}

fn character_table(n: usize) -> Result<CharacterTable> {
    match n {
        1 => Ok(CharacterTable {
            classes: &[&[1]],
            rows: &[&[1.0]],
            partitions: &[&[1]],
        }),
        2 => Ok(CharacterTable {
            classes: &[&[1, 1], &[2]],
            rows: &[&[1.0, 1.0], &[1.0, -1.0]],
            partitions: &[&[2], &[1, 1]],
        }),
        3 => Ok(CharacterTable {
            classes: &[&[1, 1, 1], &[2, 1], &[3]],
            rows: &[&[1.0, 1.0, 1.0], &[2.0, 0.0, -1.0], &[1.0, -1.0, 1.0]],
            partitions: &[&[3], &[2, 1], &[1, 1, 1]],
        }),
        4 => Ok(CharacterTable {
            classes: &[&[1, 1, 1, 1], &[2, 1, 1], &[2, 2], &[3, 1], &[4]],
            rows: &[
                &[1.0, 1.0, 1.0, 1.0, 1.0],
                &[3.0, 1.0, -1.0, 0.0, -1.0],
                &[2.0, 0.0, 2.0, -1.0, 0.0],
                &[3.0, -1.0, -1.0, 0.0, 1.0],
                &[1.0, -1.0, 1.0, 1.0, -1.0],
            ],
            partitions: &[&[4], &[3, 1], &[2, 2], &[2, 1, 1], &[1, 1, 1, 1]],
        }),
        _ => Err(Error::Unsupported(format!(
            "symmetric-group character data covers n <= 4, got {n}"
        ))),
    }
}

fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        cycles.push(len);
    }
    cycles.sort_unstable_by(|a, b| b.cmp(a));
    cycles
}

/// U_pi on (C^d)^(x n): factor at position i is sent to position pi(i).
fn single_system_permutation(perm: &[usize], d: usize) -> CMat {
    let n = perm.len();
    let dims = vec![d; n];
    let dim = d.pow(n as u32);
    let mut u = CMat::zeros(dim, dim);
    let mut digits = vec![0usize; n];
    let mut out = vec![0usize; n];
    for col in 0..dim {
        index_to_digits(col, &dims, &mut digits);
        for i in 0..n {
            out[perm[i]] = digits[i];
        }
        u[(digits_to_index(&out, &dims), col)] = Cpx::new(1.0, 0.0);
    }
    u
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

/// Isotypic projectors of the S_n action on (C^d)^(x n), one per partition
/// with at most d rows (the others vanish identically).
fn isotypic_projectors(n: usize, d: usize) -> Result<Vec<CMat>> {
    let table = character_table(n)?;
    let perms = crate::linalg::all_permutations(n);
    let dim = d.pow(n as u32);
    let mut projectors = Vec::new();
    for (row, partition) in table.rows.iter().zip(table.partitions) {
        if partition.len() > d {
            continue;
        }
        let d_lambda = row[0];
        let mut p = CMat::zeros(dim, dim);
        for perm in &perms {
            let ct = cycle_type(perm);
            let class = table
                .classes
                .iter()
                .position(|c| **c == ct[..])
                .expect("every cycle type appears in the class list");
            let chi = row[class];
            if chi == 0.0 {
                continue;
            }
            p += single_system_permutation(perm, d) * Cpx::new(chi, 0.0);
        }
        p *= Cpx::new(d_lambda / factorial(n), 0.0);
        projectors.push(p);
    }
    Ok(projectors)
}

/// Uniform mixture of normalized isotypic components on (C^d)^(x n).
fn universal_factor(n: usize, d: usize) -> Result<CMat> {
    if d == 0 {
        return Err(Error::Domain("local dimension must be positive".into()));
    }
    let projectors = isotypic_projectors(n, d)?;
    let count = projectors.len() as f64;
    let dim = d.pow(n as u32);
    let mut omega = CMat::zeros(dim, dim);
    for p in projectors {
        let tr: f64 = (0..dim).map(|k| p[(k, k)].re).sum();
        if tr < 0.5 {
            return Err(Error::SolverFailure(
                "isotypic projector has vanishing trace".into(),
            ));
        }
        omega += p / Cpx::new(count * tr, 0.0);
    }
    Ok(omega)
}

/// omega_A^(n) (x) omega_B^(n), reordered to the interleaved copy layout
/// A1 B1 A2 B2 ..., with the product-state domination constant g.
pub fn universal_state(n: usize, d_a: usize, d_b: usize) -> Result<UniversalState> {
    if n == 0 {
        return Err(Error::Domain("need at least one copy".into()));
    }
    let layout = BipartitionLayout::new(d_a, d_b, n)?;
    let wa = universal_factor(n, d_a)?;
    let wb = universal_factor(n, d_b)?;
    let kron = wa.kronecker(&wb);
    // kron factor order is A1..An B1..Bn; interleave to A1 B1 A2 B2 ...
    let mut dims = vec![d_a; n];
    dims.extend(std::iter::repeat(d_b).take(n));
    let mut perm = Vec::with_capacity(2 * n);
    for i in 0..n {
        perm.push(i);
        perm.push(n + i);
    }
    let omega = reorder_factors(&kron, &dims, &perm);
    let exponent = (d_a * d_a + d_b * d_b - 2) as f64;
    let g = ((n + 1) as f64).powf(exponent);
    Ok(UniversalState {
        omega: DensityMatrix::new(HermitianOperator::new(omega, layout)?)?,
        g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh_matrix, min_eigenvalue, random_product_state, twirl};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projectors_are_orthogonal_resolution() {
        for (n, d) in [(2usize, 2usize), (3, 2), (2, 3), (4, 2)] {
            let ps = isotypic_projectors(n, d).unwrap();
            let dim = d.pow(n as u32);
            let mut sum = CMat::zeros(dim, dim);
            for p in &ps {
                let idem = p * p - p;
                let dev = idem.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
                assert!(dev < 1e-12, "not idempotent ({n},{d}): {dev}");
                sum += p;
            }
            for (i, p) in ps.iter().enumerate() {
                for q in &ps[i + 1..] {
                    let dev = (p * q).iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
                    assert!(dev < 1e-12, "not orthogonal ({n},{d})");
                }
            }
            sum -= CMat::identity(dim, dim);
            let dev = sum.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
            assert!(dev < 1e-12, "not a resolution of identity ({n},{d})");
        }
    }

    #[test]
    fn two_copy_qubit_factor_spectrum() {
        let w = universal_factor(2, 2).unwrap();
        let mut evals: Vec<f64> = eigh_matrix(&w).eigenvalues.iter().copied().collect();
        evals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let want = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        for (got, want) in evals.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{evals:?}");
        }
    }

    #[test]
    fn universal_state_is_permutation_invariant() {
        let u = universal_state(2, 2, 2).unwrap();
        let t = twirl(u.omega.op()).unwrap();
        let dev = (t.matrix() - u.omega.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        assert!(dev < 1e-12);
        assert!((u.g - 729.0).abs() < 1e-9);
    }

    #[test]
    fn dominates_product_state_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = BipartitionLayout::qubit_pairs(1).unwrap();
        for n in [2usize, 3] {
            let u = universal_state(n, 2, 2).unwrap();
            let trials = if n == 2 { 100 } else { 25 };
            for _ in 0..trials {
                let sigma = random_product_state(l, &mut rng).unwrap();
                let power = sigma.tensor_power(n).unwrap();
                let slack = u.omega.op().scale(u.g).sub(power.op()).unwrap();
                let lo = min_eigenvalue(&slack);
                assert!(lo > -1e-9, "domination violated at n={n}: {lo}");
            }
        }
    }
}
