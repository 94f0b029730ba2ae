//! Zero patterns and pattern-constrained MDS sampling.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Field;
use crate::linalg::Matrix;

/// Binary mask over a generator block; `true` marks an entry allowed to be
/// nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroPattern {
    rows: usize,
    cols: usize,
    mask: Vec<bool>,
}

impl ZeroPattern {
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::usage("zero pattern rows must have equal length"));
        }
        Ok(Self { rows: rows.len(), cols, mask: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.cols + j]
    }

    /// Columns where row `i` may be nonzero.
    pub fn support(&self, i: usize) -> Vec<usize> {
        (0..self.cols).filter(|&j| self.allows(i, j)).collect()
    }

    /// Columns forced to zero in row `i`.
    pub fn zero_set(&self, i: usize) -> BTreeSet<usize> {
        (0..self.cols).filter(|&j| !self.allows(i, j)).collect()
    }
}

/// Cyclic pattern with z_ij = 1 iff (i + j) mod (smax + t) < smax, shaped
/// (m - smin) x (smax + t). Valid only for t < m - smin < smax + t.
pub fn build_zero_pattern(m: usize, t: usize, smin: usize, smax: usize) -> Result<ZeroPattern> {
    if smin > m || !(t < m - smin && m - smin < smax + t) {
        return Err(Error::usage(format!(
            "sparse MDS pattern needs t < m - smin < smax + t, got m={m} t={t} smin={smin} smax={smax}"
        )));
    }
    let (rows, cols) = (m - smin, smax + t);
    let mask = (0..rows).flat_map(|i| (0..cols).map(move |j| (i + j) % cols < smax)).collect();
    Ok(ZeroPattern { rows, cols, mask })
}

/// Row subset P with |P| + |intersection of zero sets| > ell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdsViolation {
    pub rows: Vec<usize>,
    pub common_zeros: usize,
}

/// Checks |P| + |∩_{i in P} Z_i| <= ell for every nonempty row subset P,
/// smallest subsets first. Exponential in the number of rows.
pub fn check_mds_condition(pattern: &ZeroPattern, ell: usize) -> Option<MdsViolation> {
    assert!(pattern.cols <= 128, "pattern too wide for the bitset check");
    let zeros: Vec<u128> = (0..pattern.rows)
        .map(|i| pattern.zero_set(i).iter().fold(0u128, |acc, &j| acc | 1 << j))
        .collect();
    for size in 1..=pattern.rows {
        for rows in (0..pattern.rows).combinations(size) {
            let common = rows.iter().fold(u128::MAX, |acc, &i| acc & zeros[i]).count_ones() as usize;
            if size + common > ell {
                return Some(MdsViolation { rows, common_zeros: common });
            }
        }
    }
    None
}

/// Samples a matrix that is zero exactly where the pattern is zero and
/// whose every ell x ell submatrix is nonsingular.
///
/// Every allowed entry starts uniform over the nonzero elements. Each
/// attempt then finds the first singular ell x ell submatrix and redraws
/// one of its allowed entries whose cofactor is nonzero, keeping a value
/// that makes that submatrix nonsingular. When no such entry exists, all
/// allowed entries of the submatrix are redrawn. A matrix is returned only
/// after the full check finds no singular submatrix.
pub fn sample_sparse_mds<R: Rng>(
    pattern: &ZeroPattern,
    ell: usize,
    field: &Field,
    rng: &mut R,
    retry_budget: u32,
) -> Result<Matrix> {
    if ell > pattern.rows.min(pattern.cols) {
        return Err(Error::usage(format!(
            "ell = {ell} exceeds the {}x{} pattern",
            pattern.rows, pattern.cols
        )));
    }
    let needed = (pattern.rows + pattern.cols).saturating_sub(1) as u64;
    if (field.size() as u64) < needed {
        return Err(Error::usage(format!(
            "{} has {} elements; this pattern needs at least {needed}",
            field.spec(),
            field.size()
        )));
    }
    if let Some(v) = check_mds_condition(pattern, ell) {
        return Err(Error::usage(format!(
            "pattern violates the MDS condition on rows {:?} ({} common zeros, ell = {ell})",
            v.rows, v.common_zeros
        )));
    }
    let q = field.size() as u16;
    let mut m = Matrix::zeros(field.clone(), pattern.rows, pattern.cols);
    for i in 0..pattern.rows {
        for j in 0..pattern.cols {
            if pattern.allows(i, j) {
                m.set(i, j, rng.gen_range(1..q));
            }
        }
    }
    for _ in 0..retry_budget {
        let Some(w) = m.first_deficient_square(ell) else {
            return Ok(m);
        };
        let square = m.row_submatrix(&w.rows)?.column_submatrix(&w.cols)?;
        // Entries with a nonzero cofactor: the determinant is affine in such
        // an entry with nonzero slope, so all but one value repair the square.
        let repairable: Vec<(usize, usize)> = (0..ell)
            .flat_map(|a| (0..ell).map(move |b| (a, b)))
            .filter(|&(a, b)| pattern.allows(w.rows[a], w.cols[b]) && cofactor_nonzero(&square, a, b))
            .collect();
        if repairable.is_empty() {
            for &i in &w.rows {
                for &j in &w.cols {
                    if pattern.allows(i, j) {
                        m.set(i, j, rng.gen_range(1..q));
                    }
                }
            }
            continue;
        }
        let (a, b) = repairable[rng.gen_range(0..repairable.len())];
        let mut square = square;
        loop {
            let x = rng.gen_range(1..q);
            square.set(a, b, x);
            if square.rank() == ell {
                m.set(w.rows[a], w.cols[b], x);
                break;
            }
        }
    }
    Err(Error::Construction {
        attempts: retry_budget,
        detail: format!("no {}x{} sparse MDS matrix found over {}", pattern.rows, pattern.cols, field.spec()),
    })
}

fn cofactor_nonzero(square: &Matrix, a: usize, b: usize) -> bool {
    let n = square.rows();
    let rows: Vec<usize> = (0..n).filter(|&r| r != a).collect();
    let cols: Vec<usize> = (0..n).filter(|&c| c != b).collect();
    let minor = square.row_submatrix(&rows).and_then(|s| s.column_submatrix(&cols)).expect("indices in range");
    minor.rank() == n - 1
}
