//! Dense matrices over GF(2^b).
//!
//! Elimination picks the first nonzero entry in column order as pivot;
//! arithmetic is exact so no pivoting strategy is needed. Submatrix
//! enumeration runs in lexicographic subset order and stops at the first
//! rank-deficient selection, which is returned as the witness.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::gf::Field;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<u16>,
    field: Field,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field.spec())?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Row and column selection of a rank-deficient square submatrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Matrix {
    pub fn new(field: Field, rows: usize, cols: usize, entries: Vec<u16>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::usage(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let q = field.size();
        if let Some(bad) = entries.iter().find(|&&v| v as u32 >= q) {
            return Err(Error::usage(format!("entry {bad} is not in {}", field.spec())));
        }
        Ok(Self { rows, cols, entries, field })
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0; rows * cols], field }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from row vectors; `cols` is needed when `rows` is empty.
    pub fn from_rows(field: Field, cols: usize, rows: &[Vec<u16>]) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::usage(format!("row of length {} in a {cols}-column matrix", r.len())));
        }
        Self::new(field, rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u16 {
        debug_assert!(r < self.rows && c < self.cols);
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u16) {
        debug_assert!(r < self.rows && c < self.cols);
        debug_assert!((v as u32) < self.field.size());
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u16] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u16>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Column indices where row `r` is nonzero.
    pub fn row_support(&self, r: usize) -> BTreeSet<usize> {
        self.row(r).iter().enumerate().filter(|(_, &v)| v != 0).map(|(c, _)| c).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch { expected: self.field.spec(), found: other.field.spec() });
        }
        if self.cols != other.rows {
            return Err(Error::usage(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f.clone(), self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) ^ f.mul_raw(a, other.get(k, c));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field || self.cols != other.cols {
            return Err(Error::usage("vstack needs equal column counts over one field"));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, entries, field: self.field.clone() })
    }

    pub fn row_submatrix(&self, rows: &[usize]) -> Result<Matrix> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(Error::usage(format!("row index {r} out of range 0..{}", self.rows)));
        }
        let entries = rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect();
        Ok(Matrix { rows: rows.len(), cols: self.cols, entries, field: self.field.clone() })
    }

    /// Selected columns, in the given order.
    pub fn column_submatrix(&self, cols: &[usize]) -> Result<Matrix> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::usage(format!("column index {c} out of range 0..{}", self.cols)));
        }
        let mut entries = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            entries.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Matrix { rows: self.rows, cols: cols.len(), entries, field: self.field.clone() })
    }

    /// Reduced row echelon form with unit pivots, plus the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.reduce_in_place(None);
        (m, pivots)
    }

    /// Row-reduces in place, applying the same row operations to `track`
    /// when given. Returns pivot columns in row order.
    fn reduce_in_place(&mut self, mut track: Option<&mut Matrix>) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            self.swap_rows(p, lead);
            if let Some(t) = track.as_deref_mut() {
                t.swap_rows(p, lead);
            }
            let inv = f.inv_raw(self.get(lead, c)).expect("pivot is nonzero");
            self.scale_row(lead, inv);
            if let Some(t) = track.as_deref_mut() {
                t.scale_row(lead, inv);
            }
            for r in 0..self.rows {
                if r == lead {
                    continue;
                }
                let factor = self.get(r, c);
                if factor != 0 {
                    self.add_scaled_row(r, lead, factor);
                    if let Some(t) = track.as_deref_mut() {
                        t.add_scaled_row(r, lead, factor);
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: u16) {
        for c in 0..self.cols {
            let v = self.field.mul_raw(self.get(r, c), s);
            self.set(r, c, v);
        }
    }

    /// row[dst] += s * row[src]
    fn add_scaled_row(&mut self, dst: usize, src: usize, s: u16) {
        for c in 0..self.cols {
            let v = self.get(dst, c) ^ self.field.mul_raw(self.get(src, c), s);
            self.set(dst, c, v);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Column indices `j` whose unit row vector e_j lies in the row space.
    ///
    /// In reduced echelon form e_j is in the span exactly when `j` is a
    /// pivot column whose pivot row has no other nonzero entry.
    pub fn solve_for_unit_rows(&self) -> BTreeSet<usize> {
        let (r, pivots) = self.rref();
        pivots
            .iter()
            .enumerate()
            .filter(|&(i, &c)| r.row(i).iter().enumerate().all(|(k, &v)| k == c || v == 0))
            .map(|(_, &c)| c)
            .collect()
    }

    /// Coefficients `x` with `x * self = e_j`, if e_j is in the row space.
    pub fn unit_row_combination(&self, j: usize) -> Option<Vec<u16>> {
        if j >= self.cols {
            return None;
        }
        let mut reduced = self.clone();
        let mut transform = Matrix::identity(self.field.clone(), self.rows);
        let pivots = reduced.reduce_in_place(Some(&mut transform));
        let i = pivots.iter().position(|&c| c == j)?;
        let clean = reduced.row(i).iter().enumerate().all(|(k, &v)| k == j || v == 0);
        clean.then(|| transform.row(i).to_vec())
    }

    /// True iff every k x k submatrix is nonsingular. With `rows == k` this
    /// is the MDS property over all C(cols, k) column selections.
    pub fn all_square_submatrices_full_rank(&self, k: usize) -> bool {
        self.first_deficient_square(k).is_none()
    }

    /// First rank-deficient k x k submatrix in lexicographic (rows, cols)
    /// order.
    pub fn first_deficient_square(&self, k: usize) -> Option<SquareWitness> {
        assert!(k <= self.rows.min(self.cols), "k exceeds matrix dimensions");
        for rows in (0..self.rows).combinations(k) {
            let sub = self.row_submatrix(&rows).expect("indices in range");
            for cols in (0..self.cols).combinations(k) {
                let square = sub.column_submatrix(&cols).expect("indices in range");
                if square.rank() < k {
                    return Some(SquareWitness { rows, cols });
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(bits: u32) -> Field {
        Field::with_bits(bits).unwrap()
    }

    fn mat(field: &Field, rows: &[&[u16]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(field.clone(), cols, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn rank_examples() {
        let f = gf(1);
        assert_eq!(Matrix::identity(f.clone(), 3).rank(), 3);
        assert_eq!(Matrix::zeros(f.clone(), 2, 4).rank(), 0);
        assert_eq!(mat(&f, &[&[1, 1], &[1, 1]]).rank(), 1);
    }

    #[test]
    fn column_submatrix_examples() {
        let f = gf(3);
        let m = mat(&f, &[&[1, 2, 3], &[4, 5, 6]]);
        assert_eq!(m.column_submatrix(&[0, 1, 2]).unwrap(), m);
        let empty = m.column_submatrix(&[]).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (2, 0));
        assert_eq!(m.column_submatrix(&[0, 2]).unwrap(), mat(&f, &[&[1, 3], &[4, 6]]));
        assert!(matches!(m.column_submatrix(&[3]), Err(Error::Usage(_))));
    }

    #[test]
    fn unit_rows_examples() {
        let f = gf(1);
        assert_eq!(Matrix::identity(f.clone(), 4).solve_for_unit_rows(), (0..4).collect());
        assert!(Matrix::zeros(f.clone(), 3, 3).solve_for_unit_rows().is_empty());
        // row space {000, 110, 011, 101}: no unit vector
        let m = mat(&f, &[&[1, 1, 0], &[0, 1, 1]]);
        assert!(m.solve_for_unit_rows().is_empty());
    }

    #[test]
    fn unit_rows_match_rank_criterion() {
        let f = gf(2);
        let m = mat(&f, &[&[1, 2, 0, 0], &[0, 1, 0, 0], &[0, 0, 3, 1]]);
        let by_rank: BTreeSet<usize> = (0..4)
            .filter(|&j| {
                let mut e = vec![0; 4];
                e[j] = 1;
                let stacked = m.vstack(&Matrix::from_rows(f.clone(), 4, &[e]).unwrap()).unwrap();
                stacked.rank() == m.rank()
            })
            .collect();
        assert_eq!(m.solve_for_unit_rows(), by_rank);
        assert_eq!(by_rank, [0, 1].into_iter().collect());
    }

    #[test]
    fn mds_examples() {
        let f = gf(3);
        assert!(Matrix::identity(f.clone(), 3).all_square_submatrices_full_rank(3));
        let zero_col = mat(&f, &[&[1, 0, 2], &[3, 0, 1]]);
        assert!(!zero_col.all_square_submatrices_full_rank(1));
        assert!(!zero_col.all_square_submatrices_full_rank(2));
        // 2x4 Vandermonde at distinct points 1, 2, 3, 4
        let points = [1u16, 2, 3, 4];
        let vander = mat(&f, &[&[1, 1, 1, 1], &points]);
        for pair in (0..4).combinations(2) {
            let (a, b) = (points[pair[0]], points[pair[1]]);
            // det [[1,1],[a,b]] = b - a
            assert_ne!(a ^ b, 0);
        }
        assert!(vander.all_square_submatrices_full_rank(2));
    }

    #[test]
    fn deficient_witness_is_first_in_order() {
        let f = gf(1);
        let m = mat(&f, &[&[1, 1, 0, 1], &[0, 0, 1, 1]]);
        let w = m.first_deficient_square(2).unwrap();
        assert_eq!(w, SquareWitness { rows: vec![0, 1], cols: vec![0, 1] });
    }

    #[test]
    fn unit_row_combination_reproduces_unit_vector() {
        let f = gf(3);
        let m = mat(&f, &[&[1, 2, 0], &[3, 0, 0], &[0, 5, 7]]);
        for j in m.solve_for_unit_rows() {
            let x = m.unit_row_combination(j).unwrap();
            let combo = Matrix::from_rows(f.clone(), 3, &[x]).unwrap().mul(&m).unwrap();
            let mut e = vec![0; 3];
            e[j] = 1;
            assert_eq!(combo.row(0), e.as_slice());
        }
    }

    #[test]
    fn rejects_out_of_field_entries() {
        assert!(Matrix::new(gf(1), 1, 2, vec![1, 2]).is_err());
        assert!(Matrix::new(gf(2), 1, 2, vec![1]).is_err());
    }
}
