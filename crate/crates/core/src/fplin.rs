//! Exact linear algebra over the prime field F_p.
//!
//! Matrices are stored row-sparse: each row is a list of `(column, residue)`
//! pairs sorted by column, with residues in `[1, p-1]`. Zero entries are never
//! stored, so two matrices are equal exactly when their stored data agree.
//!
//! Vectors in this module are dense `Vec<u64>` of residues; bases are returned
//! as the *columns* of an [`FpMatrix`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted. Products of two residues must fit in a `u64`.
pub const MAX_PRIME: u64 = u32::MAX as u64;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if p > MAX_PRIME || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

#[inline]
pub fn add(p: u64, a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(p: u64, a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn mul(p: u64, a: u64, b: u64) -> u64 {
    a * b % p
}

#[inline]
pub fn neg(p: u64, a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub fn pow(p: u64, mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(p, acc, base);
        }
        base = mul(p, base, base);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero residue.
pub fn inv(p: u64, a: u64) -> u64 {
    debug_assert!(a % p != 0, "inverse of zero mod {p}");
    pow(p, a, p - 2)
}

/// Reduce a signed integer into `[0, p)`.
pub fn reduce(p: u64, a: i64) -> u64 {
    a.rem_euclid(p as i64) as u64
}

type SparseRow = Vec<(usize, u64)>;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct FpMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<SparseRow>,
}

/// On-disk form: `{ "rows", "cols", "entries": [[r, c, v], ...] }` plus the modulus.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    p: u64,
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, i64)>,
}

impl TryFrom<MatrixJson> for FpMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        check_prime(j.p)?;
        let mut m = FpMatrix::zero(j.p, j.rows, j.cols);
        for (r, c, v) in j.entries {
            if r >= j.rows || c >= j.cols {
                return Err(Error::Shape(format!(
                    "entry ({r}, {c}) outside a {}x{} matrix",
                    j.rows, j.cols
                )));
            }
            m.add_entry(r, c, reduce(j.p, v));
        }
        Ok(m)
    }
}

impl From<FpMatrix> for MatrixJson {
    fn from(m: FpMatrix) -> Self {
        let entries = m.triplets().map(|(r, c, v)| (r, c, v as i64)).collect();
        MatrixJson {
            p: m.p,
            rows: m.rows,
            cols: m.cols,
            entries,
        }
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix(p={}, {}x{})", self.p, self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.dense_row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl FpMatrix {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = FpMatrix::zero(p, n, n);
        for i in 0..n {
            m.data[i].push((i, 1));
        }
        m
    }

    /// Build from dense rows of signed integers, reduced mod `p`.
    pub fn from_rows(p: u64, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = FpMatrix::zero(p, rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            m.data[r] = row
                .iter()
                .enumerate()
                .filter_map(|(c, &v)| {
                    let v = reduce(p, v);
                    (v != 0).then_some((c, v))
                })
                .collect();
        }
        m
    }

    /// Build from dense column vectors (each of length `rows`).
    pub fn from_columns(p: u64, rows: usize, columns: &[Vec<u64>]) -> Self {
        let mut m = FpMatrix::zero(p, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (r, &v) in col.iter().enumerate() {
                let v = v % p;
                if v != 0 {
                    m.data[r].push((c, v));
                }
            }
        }
        m
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        match self.data[r].binary_search_by_key(&c, |&(col, _)| col) {
            Ok(i) => self.data[r][i].1,
            Err(_) => 0,
        }
    }

    /// Add `v` to entry `(r, c)`, keeping the row canonical.
    pub fn add_entry(&mut self, r: usize, c: usize, v: u64) {
        assert!(r < self.rows && c < self.cols, "entry out of bounds");
        let v = v % self.p;
        if v == 0 {
            return;
        }
        let p = self.p;
        let row = &mut self.data[r];
        match row.binary_search_by_key(&c, |&(col, _)| col) {
            Ok(i) => {
                let s = add(p, row[i].1, v);
                if s == 0 {
                    row.remove(i);
                } else {
                    row[i].1 = s;
                }
            }
            Err(i) => row.insert(i, (c, v)),
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        let cur = self.get(r, c);
        self.add_entry(r, c, sub(self.p, v % self.p, cur));
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn sparse_row(&self, r: usize) -> &[(usize, u64)] {
        &self.data[r]
    }

    pub fn dense_row(&self, r: usize) -> Vec<u64> {
        let mut out = vec![0; self.cols];
        for &(c, v) in &self.data[r] {
            out[c] = v;
        }
        out
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0; self.rows]; self.cols];
        for (r, c, v) in self.triplets() {
            out[c][r] = v;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.dense_row(r)).collect()
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut out = FpMatrix::zero(self.p, self.cols, self.rows);
        for (r, c, v) in self.triplets() {
            out.data[c].push((r, v));
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != rhs.rows || self.p != rhs.p {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let p = self.p;
        let mut out = FpMatrix::zero(p, self.rows, rhs.cols);
        let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
        for (r, row) in self.data.iter().enumerate() {
            acc.clear();
            for &(k, a) in row {
                for &(c, b) in &rhs.data[k] {
                    let e = acc.entry(c).or_insert(0);
                    *e = add(p, *e, mul(p, a, b));
                }
            }
            out.data[r] = acc.iter().filter(|(_, &v)| v != 0).map(|(&c, &v)| (c, v)).collect();
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let p = self.p;
        self.data
            .iter()
            .map(|row| row.iter().fold(0, |s, &(c, a)| add(p, s, mul(p, a, v[c] % p))))
            .collect()
    }

    pub fn scale(&self, s: u64) -> FpMatrix {
        let s = s % self.p;
        let mut out = FpMatrix::zero(self.p, self.rows, self.cols);
        if s != 0 {
            for (r, row) in self.data.iter().enumerate() {
                out.data[r] = row.iter().map(|&(c, v)| (c, mul(self.p, v, s))).collect();
            }
        }
        out
    }

    pub fn sub_matrix(&self, rhs: &FpMatrix) -> Result<FpMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape("difference of mismatched shapes".into()));
        }
        let mut out = self.clone();
        for (r, c, v) in rhs.triplets() {
            out.add_entry(r, c, neg(self.p, v));
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &FpMatrix) -> Result<FpMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::Shape("hstack of mismatched row counts".into()));
        }
        let mut out = self.clone();
        out.cols += rhs.cols;
        for (r, row) in rhs.data.iter().enumerate() {
            out.data[r].extend(row.iter().map(|&(c, v)| (c + self.cols, v)));
        }
        Ok(out)
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> FpMatrix {
        let cols = self.columns();
        let picked: Vec<Vec<u64>> = keep.iter().map(|&c| cols[c].clone()).collect();
        FpMatrix::from_columns(self.p, self.rows, &picked)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Reduced row-echelon form and the pivot columns (strictly increasing).
    ///
    /// Zero rows are kept at the bottom so the shape is unchanged.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let p = self.p;
        // pivot column -> normalized row with that leading column
        let mut pivots: BTreeMap<usize, SparseRow> = BTreeMap::new();
        for row in &self.data {
            let mut row = row.clone();
            while let Some(&(lead, coeff)) = row.first() {
                match pivots.get(&lead) {
                    Some(prow) => {
                        row = axpy(p, &row, neg(p, coeff), prow);
                    }
                    None => {
                        let s = inv(p, coeff);
                        for e in row.iter_mut() {
                            e.1 = mul(p, e.1, s);
                        }
                        pivots.insert(lead, row);
                        break;
                    }
                }
            }
        }
        // Back substitution, highest pivot first.
        let pivot_cols: Vec<usize> = pivots.keys().copied().collect();
        for &pc in pivot_cols.iter().rev() {
            let prow = pivots[&pc].clone();
            for &other in pivot_cols.iter().filter(|&&c| c < pc) {
                let orow = pivots.get_mut(&other).unwrap();
                if let Ok(i) = orow.binary_search_by_key(&pc, |&(c, _)| c) {
                    let coeff = orow[i].1;
                    *orow = axpy(p, orow, neg(p, coeff), &prow);
                }
            }
        }
        let mut out = FpMatrix::zero(p, self.rows, self.cols);
        for (i, (_, row)) in pivots.into_iter().enumerate() {
            out.data[i] = row;
        }
        (out, pivot_cols)
    }

    /// Dense Gauss-Jordan elimination. Same contract as [`FpMatrix::rref`];
    /// kept as an independent path for cross-checking the sparse one.
    pub fn rref_dense(&self) -> (FpMatrix, Vec<usize>) {
        let p = self.p;
        let mut a = self.to_dense();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(src) = (r..self.rows).find(|&i| a[i][c] != 0) else {
                continue;
            };
            a.swap(r, src);
            let s = inv(p, a[r][c]);
            for v in a[r].iter_mut() {
                *v = mul(p, *v, s);
            }
            for i in 0..self.rows {
                if i != r && a[i][c] != 0 {
                    let f = a[i][c];
                    for j in 0..self.cols {
                        let t = mul(p, f, a[r][j]);
                        a[i][j] = sub(p, a[i][j], t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let rows: Vec<Vec<i64>> = a.iter().map(|row| row.iter().map(|&v| v as i64).collect()).collect();
        let mut out = if rows.is_empty() {
            FpMatrix::zero(p, 0, self.cols)
        } else {
            FpMatrix::from_rows(p, &rows)
        };
        out.cols = self.cols;
        (out, pivots)
    }

    /// Basis of the null space as the columns of a `cols x nullity` matrix.
    ///
    /// One column per free variable, in increasing free-column order; the
    /// free variable itself carries coefficient 1.
    pub fn kernel_basis(&self) -> FpMatrix {
        self.kernel_basis_with_free().0
    }

    /// Kernel basis together with its free columns: basis vector k has a 1
    /// at `free[k]` and 0 at every other free column, so the coordinates of a
    /// kernel vector v are `v[free[k]]`.
    pub fn kernel_basis_with_free(&self) -> (FpMatrix, Vec<usize>) {
        let p = self.p;
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = FpMatrix::zero(p, self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out.data[f].push((k, 1));
            for (i, &pc) in pivots.iter().enumerate() {
                let v = r.get(i, f);
                if v != 0 {
                    out.add_entry(pc, k, neg(p, v));
                }
            }
        }
        (out, free)
    }

    /// Canonical basis of the column space: the nonzero rows of the RREF of
    /// the transpose, returned as columns.
    pub fn image_basis(&self) -> FpMatrix {
        let (r, pivots) = self.transpose().rref();
        let mut out = FpMatrix::zero(self.p, pivots.len(), self.rows);
        for i in 0..pivots.len() {
            out.data[i] = r.data[i].clone();
        }
        out.transpose()
    }

    /// Solve `self * x = b`. Returns one solution (free variables set to 0).
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let p = self.p;
        let rhs = FpMatrix::from_columns(p, self.rows, &[b.to_vec()]);
        let aug = self.hstack(&rhs).ok()?;
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0; self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, self.cols);
        }
        Some(x)
    }
}

/// `row + s * other` for sparse rows sorted by column.
fn axpy(p: u64, row: &[(usize, u64)], s: u64, other: &[(usize, u64)]) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < other.len() {
        let take_left = j == other.len() || (i < row.len() && row[i].0 < other[j].0);
        let take_right = i == row.len() || (j < other.len() && other[j].0 < row[i].0);
        if take_left {
            out.push(row[i]);
            i += 1;
        } else if take_right {
            let v = mul(p, s, other[j].1);
            if v != 0 {
                out.push((other[j].0, v));
            }
            j += 1;
        } else {
            let v = add(p, row[i].1, mul(p, s, other[j].1));
            if v != 0 {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Representatives completing the column span of `sub` to a basis of
/// `F_p^ambient`: the standard basis vectors at non-pivot positions of the
/// RREF of `sub^T`. Dependent columns in `sub` are fine.
pub fn quotient_basis(sub: &FpMatrix, ambient: usize) -> FpMatrix {
    assert_eq!(sub.rows(), ambient, "sub columns must live in the ambient space");
    let (_, pivots) = sub.transpose().rref();
    let mut is_pivot = vec![false; ambient];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let reps: Vec<Vec<u64>> = (0..ambient)
        .filter(|&i| !is_pivot[i])
        .map(|i| {
            let mut v = vec![0; ambient];
            v[i] = 1;
            v
        })
        .collect();
    FpMatrix::from_columns(sub.p(), ambient, &reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rref_duplicate_rows_mod_2() {
        let m = FpMatrix::from_rows(2, &[vec![1, 1], vec![1, 1]]);
        let (r, piv) = m.rref();
        assert_eq!(r, FpMatrix::from_rows(2, &[vec![1, 1], vec![0, 0]]));
        assert_eq!(piv, vec![0]);
    }

    #[test]
    fn rref_identity_mod_3() {
        let m = FpMatrix::identity(3, 3);
        let (r, piv) = m.rref();
        assert_eq!(r, m);
        assert_eq!(piv, vec![0, 1, 2]);
    }

    #[test]
    fn rref_normalizes_scalar_mod_5() {
        let m = FpMatrix::from_rows(5, &[vec![2, 4]]);
        let (r, piv) = m.rref();
        assert_eq!(r, FpMatrix::from_rows(5, &[vec![1, 2]]));
        assert_eq!(piv, vec![0]);
        assert_eq!(inv(5, 2), 3);
    }

    #[test]
    fn kernel_examples() {
        let k = FpMatrix::from_rows(2, &[vec![1, 1]]).kernel_basis();
        assert_eq!(k.columns(), vec![vec![1, 1]]);

        let z = FpMatrix::zero(7, 3, 4).kernel_basis();
        assert_eq!(z, FpMatrix::identity(7, 4));

        let inj = FpMatrix::identity(3, 2).kernel_basis();
        assert_eq!(inj.cols(), 0);
    }

    #[test]
    fn image_and_quotient_examples() {
        let img = FpMatrix::from_rows(2, &[vec![1, 1], vec![1, 1]]).image_basis();
        assert_eq!(img.columns(), vec![vec![1, 1]]);

        let q0 = quotient_basis(&FpMatrix::zero(3, 2, 0), 2);
        assert_eq!(q0.cols(), 2);

        let qfull = quotient_basis(&FpMatrix::identity(3, 2), 2);
        assert_eq!(qfull.cols(), 0);

        // dependent generators are reduced internally
        let dep = FpMatrix::from_columns(5, 3, &[vec![1, 2, 0], vec![2, 4, 0]]);
        assert_eq!(quotient_basis(&dep, 3).cols(), 2);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = FpMatrix::from_rows(3, &[vec![1, 2], vec![0, 1]]);
        let x = a.solve(&[1, 2]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![1, 2]);
        let b = FpMatrix::from_rows(3, &[vec![1, 1], vec![1, 1]]);
        assert!(b.solve(&[1, 2]).is_none());
    }

    #[test]
    fn json_round_trip() {
        let m = FpMatrix::from_rows(5, &[vec![0, 3], vec![4, 0]]);
        let s = serde_json::to_string(&m).unwrap();
        let back: FpMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }

    fn arb_matrix() -> impl Strategy<Value = FpMatrix> {
        (prop::sample::select(vec![2u64, 3, 5, 7]), 0usize..9, 0usize..9).prop_flat_map(|(p, r, c)| {
            prop::collection::vec(prop::collection::vec(0i64..p as i64, c), r).prop_map(move |rows| {
                let mut m = FpMatrix::zero(p, rows.len(), c);
                for (i, row) in rows.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        m.add_entry(i, j, v as u64);
                    }
                }
                m
            })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in arb_matrix()) {
            let k = m.kernel_basis();
            prop_assert_eq!(k.cols() + m.rank(), m.cols());
            prop_assert!(m.mul(&k).unwrap().is_zero());
            prop_assert_eq!(k.rank(), k.cols());
        }

        #[test]
        fn rref_idempotent(m in arb_matrix()) {
            let (r, piv) = m.rref();
            let (rr, piv2) = r.rref();
            prop_assert_eq!(&r, &rr);
            prop_assert_eq!(piv, piv2);
        }

        #[test]
        fn sparse_and_dense_agree(m in arb_matrix()) {
            prop_assert_eq!(m.rref(), m.rref_dense());
        }

        #[test]
        fn quotient_completes_basis(m in arb_matrix()) {
            let img = m.image_basis();
            let q = quotient_basis(&m, m.rows());
            let both = img.hstack(&q).unwrap();
            prop_assert_eq!(both.rank(), m.rows());
            prop_assert_eq!(both.cols(), m.rows());
        }
    }
}
