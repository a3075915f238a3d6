use itertools::Itertools;

use super::layout::{digits_to_index, index_to_digits, BipartitionLayout};
use super::op::{CMat, Cpx, HermitianOperator};
use crate::error::{Error, Result};

/// Natural representation of a permutation of the n copy blocks A_i B_i.
///
/// `perm` maps copy position i to pi(i); the unitary acts as
/// U |x_1 ... x_n> = |x_{pi^{-1}(1)} ... x_{pi^{-1}(n)}> on the joint
/// A_i B_i digits.
pub fn permutation_unitary(perm: &[usize], layout: BipartitionLayout) -> Result<CMat> {
    let n = layout.copies;
    if perm.len() != n {
        return Err(Error::Domain(format!(
            "permutation length {} does not match {} copies",
            perm.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Domain("not a permutation".into()));
        }
        seen[p] = true;
    }
    let dims = layout.factor_dims();
    let d = layout.total_dim();
    let mut u = CMat::zeros(d, d);
    let mut digits = vec![0usize; 2 * n];
    let mut out_digits = vec![0usize; 2 * n];
    for col in 0..d {
        index_to_digits(col, &dims, &mut digits);
        // copy block i of the input lands at block perm[i] of the output
        for i in 0..n {
            out_digits[2 * perm[i]] = digits[2 * i];
            out_digits[2 * perm[i] + 1] = digits[2 * i + 1];
        }
        let row = digits_to_index(&out_digits, &dims);
        u[(row, col)] = Cpx::new(1.0, 0.0);
    }
    Ok(u)
}

/// All permutations of {0..n-1}.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    (0..n).permutations(n).collect()
}

/// Average of U_pi X U_pi^dagger over all n! permutations of the copy
/// blocks. Idempotent; output commutes with every permutation unitary.
pub fn twirl(x: &HermitianOperator) -> Result<HermitianOperator> {
    let layout = x.layout();
    let n = layout.copies;
    let perms = all_permutations(n);
    let d = layout.total_dim();
    let mut acc = CMat::zeros(d, d);
    for p in &perms {
        let u = permutation_unitary(p, layout)?;
        acc += &u * x.matrix() * u.adjoint();
    }
    acc /= Cpx::new(perms.len() as f64, 0.0);
    Ok(HermitianOperator::new_unchecked(acc, layout))
}
