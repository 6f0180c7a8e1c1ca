//! Dense exact linear algebra over the rationals.
//!
//! Pivoting always takes the first nonzero entry, scanning columns left to
//! right and rows top to bottom, so every output is deterministic.

use std::fmt;

use num_traits::{One, Zero};

use crate::{Error, Rational, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n_rows = rows.len();
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
            }
            data.extend(row);
        }
        Ok(RatMatrix { rows: n_rows, cols, data })
    }

    /// Builds a matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<Rational>]) -> Result<Self> {
        let mut m = RatMatrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: col.len() });
            }
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Reduces `rows` (each of length `cols`) to reduced row echelon form in
/// place, dropping zero rows. Returns the pivot columns.
fn rref_rows(rows: &mut Vec<Vec<Rational>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next, found);
        let inv = rows[next][col].recip();
        for v in rows[next][col..].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let (head, tail) = rows.split_at_mut(next);
        let (pivot_row, tail) = tail.split_first_mut().expect("pivot row exists");
        for other in head.iter_mut().chain(tail.iter_mut()) {
            let factor = other[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (o, p) in other[col..].iter_mut().zip(&pivot_row[col..]) {
                if !p.is_zero() {
                    *o -= &factor * p;
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    rows.truncate(next);
    pivots
}

/// Exact reduced row echelon form and pivot columns. The returned matrix
/// keeps the input shape; rows past the rank are zero.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut rows = m.to_rows();
    let pivots = rref_rows(&mut rows, m.cols);
    let mut out = RatMatrix::zeros(m.rows, m.cols);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    (out, pivots)
}

/// Basis of `{v : m·v = 0}` in free-variable form: one vector per non-pivot
/// column `f`, with a one at `f` and zeros at the other free columns.
pub fn null_space_basis(m: &RatMatrix) -> Vec<Vec<Rational>> {
    let mut rows = m.to_rows();
    let pivots = rref_rows(&mut rows, m.cols);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..m.cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![Rational::zero(); m.cols];
            v[f] = Rational::one();
            for (row, &p) in rows.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

pub fn null_space(m: &RatMatrix) -> Subspace {
    Subspace::span(m.cols, null_space_basis(m)).expect("null space vectors have the column count")
}

/// The solution of `m·x = b` whose free coordinates are all zero.
pub fn solve_particular(m: &RatMatrix, b: &[Rational]) -> Result<Vec<Rational>> {
    if b.len() != m.rows {
        return Err(Error::DimensionMismatch { expected: m.rows, found: b.len() });
    }
    let mut rows: Vec<Vec<Rational>> = (0..m.rows)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.push(b[i].clone());
            row
        })
        .collect();
    let pivots = rref_rows(&mut rows, m.cols + 1);
    if pivots.last() == Some(&m.cols) {
        return Err(Error::NoSolution);
    }
    let mut x = vec![Rational::zero(); m.cols];
    for (row, &p) in rows.iter().zip(&pivots) {
        x[p] = row[m.cols].clone();
    }
    Ok(x)
}

/// A linear subspace of `Q^ambient`, stored as the nonzero rows of its
/// reduced row echelon form. The representation is unique, so equality of
/// subspaces is equality of values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: RatMatrix::identity(ambient).to_rows(),
            pivots: (0..ambient).collect(),
        }
    }

    pub fn span(ambient: usize, vectors: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.len() != ambient) {
            return Err(Error::DimensionMismatch { expected: ambient, found: bad.len() });
        }
        let mut rows = vectors;
        let pivots = rref_rows(&mut rows, ambient);
        Ok(Subspace { ambient, basis: rows, pivots })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Canonical (RREF) basis vectors.
    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Remainder of `v` after eliminating the pivot coordinates.
    fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut rest = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let factor = rest[p].clone();
            if factor.is_zero() {
                continue;
            }
            for (r, b) in rest.iter_mut().zip(row) {
                if !b.is_zero() {
                    *r -= &factor * b;
                }
            }
        }
        rest
    }

    pub fn contains(&self, v: &[Rational]) -> Result<bool> {
        if v.len() != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, found: v.len() });
        }
        Ok(self.reduce(v).iter().all(Zero::is_zero))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch { expected: other.ambient, found: self.ambient });
        }
        for v in &self.basis {
            if !other.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, found: other.ambient });
        }
        Subspace::span(self.ambient, self.basis.iter().chain(&other.basis).cloned().collect())
    }

    /// Coordinates on `Q^ambient / self`: one row per non-pivot coordinate
    /// `j`, sending `v` to `v_j − Σ_i v_{p_i}·B[i][j]`. The kernel is exactly
    /// `self`, and for the zero subspace this is the identity.
    pub fn quotient_map(&self) -> RatMatrix {
        let mut is_pivot = vec![false; self.ambient];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.ambient).filter(|&j| !is_pivot[j]).collect();
        let mut q = RatMatrix::zeros(free.len(), self.ambient);
        for (r, &j) in free.iter().enumerate() {
            q[(r, j)] = Rational::one();
            for (row, &p) in self.basis.iter().zip(&self.pivots) {
                if !row[j].is_zero() {
                    q[(r, p)] = -row[j].clone();
                }
            }
        }
        q
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| format!("({})", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "span{{{}}} ⊂ Q^{}", rows.join(", "), self.ambient)
    }
}

pub fn subspace_contains(s: &Subspace, v: &[Rational]) -> Result<bool> {
    s.contains(v)
}

pub fn subspace_leq(a: &Subspace, b: &Subspace) -> Result<bool> {
    a.is_subspace_of(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn mat(rows: &[&[i64]]) -> RatMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        RatMatrix::from_rows(cols, rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    fn vec_of(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn rref_examples() {
        let (r, p) = rref(&mat(&[&[2, 4], &[1, 2]]));
        assert_eq!(r, mat(&[&[1, 2], &[0, 0]]));
        assert_eq!(p, vec![0]);

        let (r, p) = rref(&RatMatrix::identity(3));
        assert_eq!(r, RatMatrix::identity(3));
        assert_eq!(p, vec![0, 1, 2]);

        let (r, _) = rref(&mat(&[&[0, 1], &[1, 0]]));
        assert_eq!(r, RatMatrix::identity(2));
    }

    #[test]
    fn null_space_examples() {
        let s = null_space(&mat(&[&[1, -1]]));
        assert_eq!(s, Subspace::span(2, vec![vec_of(&[1, 1])]).unwrap());
        assert!(null_space(&RatMatrix::identity(3)).is_zero());
        assert_eq!(null_space(&RatMatrix::zeros(2, 3)), Subspace::full(3));
    }

    #[test]
    fn particular_solutions() {
        assert_eq!(solve_particular(&mat(&[&[1, 1]]), &vec_of(&[3])).unwrap(), vec_of(&[3, 0]));
        let b = vec_of(&[4, -1, 7]);
        assert_eq!(solve_particular(&RatMatrix::identity(3), &b).unwrap(), b);
        assert_eq!(solve_particular(&mat(&[&[1], &[0]]), &vec_of(&[0, 1])), Err(Error::NoSolution));
    }

    #[test]
    fn membership() {
        let x = Subspace::span(2, vec![vec_of(&[1, 0])]).unwrap();
        assert!(x.contains(&vec_of(&[2, 0])).unwrap());
        assert!(subspace_leq(&x, &Subspace::full(2)).unwrap());
        let diag = Subspace::span(2, vec![vec_of(&[1, 1])]).unwrap();
        assert!(!subspace_contains(&diag, &vec_of(&[1, 0])).unwrap());
        assert!(matches!(x.contains(&vec_of(&[1])), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(subspace_leq(&x, &Subspace::full(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn canonical_equality() {
        let a = Subspace::span(3, vec![vec_of(&[1, 2, 3]), vec_of(&[0, 1, 1])]).unwrap();
        let b = Subspace::span(3, vec![vec_of(&[1, 3, 4]), vec_of(&[2, 4, 6]), vec_of(&[1, 1, 2])]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
    }

    #[test]
    fn quotient_map_kernel() {
        let s = Subspace::span(4, vec![vec_of(&[1, 0, 0, 1]), vec_of(&[0, 1, 1, 0])]).unwrap();
        let q = s.quotient_map();
        assert_eq!(q.rows(), 2);
        assert_eq!(null_space(&q), s);
        assert_eq!(Subspace::zero(3).quotient_map(), RatMatrix::identity(3));
    }

    mod props {
        use super::*;
        use crate::rational::frac;
        use proptest::prelude::*;

        fn small() -> impl Strategy<Value = Rational> {
            // Mostly zeros so that random matrices have interesting rank.
            prop_oneof![3 => Just(0i64), 2 => -4i64..=4].prop_flat_map(|p| (1i64..=3).prop_map(move |q| frac(p, q)))
        }

        fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = RatMatrix> {
            (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
                proptest::collection::vec(proptest::collection::vec(small(), c), r)
                    .prop_map(move |rows| RatMatrix::from_rows(c, rows).unwrap())
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn null_space_vectors_are_annihilated(m in matrix(30, 60)) {
                for v in null_space_basis(&m) {
                    prop_assert!(m.mul_vec(&v).unwrap().iter().all(|x| x.is_zero()));
                }
            }

            #[test]
            fn rank_nullity(m in matrix(12, 16)) {
                prop_assert_eq!(m.rank() + null_space(&m).dim(), m.cols());
            }

            #[test]
            fn rref_is_idempotent(m in matrix(10, 10)) {
                let (once, pivots) = rref(&m);
                let (twice, again) = rref(&once);
                prop_assert_eq!(&once, &twice);
                prop_assert_eq!(pivots, again);
            }

            #[test]
            fn particular_solutions_solve(m in matrix(8, 10), x in proptest::collection::vec(small(), 10)) {
                // Consistent right-hand sides come from a known solution; others may be rejected.
                let x = &x[..m.cols()];
                let b = m.mul_vec(x).unwrap();
                let y = solve_particular(&m, &b).unwrap();
                prop_assert_eq!(m.mul_vec(&y).unwrap(), b);
            }
        }
    }
}
