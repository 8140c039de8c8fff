//! Arithmetic over the prime field F_p and dense matrices over it.
//!
//! Everything downstream (element inverses, centralizers, identity
//! compilation, solution spaces) reduces to row reduction over F_p, so this
//! module is deliberately plain: `u64` residues, `u128` intermediate
//! products, row-major matrices, and a reduced-row-echelon routine whose
//! pivot choice is fixed (first nonzero entry, scanning columns left to
//! right) so that every result downstream is bit-reproducible.

use crate::error::{Error, Result};

/// Trial-division primality test; inputs are desk scale throughout.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn ensure_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn neg(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    base %= p;
    let mut acc = 1 % p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base, p);
        }
        base = mul(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue, via Fermat.
pub fn inv(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p), "inverse of zero mod {p}");
    pow(a, p - 2, p)
}

/// Reduce an arbitrary signed integer into `[0, p)`.
pub fn reduce_i64(a: i64, p: u64) -> u64 {
    let p_i = p as i64;
    (((a % p_i) + p_i) % p_i) as u64
}

/// The least positive primitive root mod `p` (p prime).
pub fn least_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    // Factor p-1 once, then test candidates.
    let mut factors = Vec::new();
    let mut m = p - 1;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            factors.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    'cand: for g in 2..p {
        for &q in &factors {
            if pow(g, (p - 1) / q, p) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root")
}

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMat {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FpMat {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        FpMat { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = FpMat::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u64, rows: Vec<Vec<u64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.into_iter().map(|v| v % p));
        }
        FpMat { p, rows: r, cols: c, data }
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> FpMat {
        let mut t = FpMat::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let p = self.p;
        (0..self.rows)
            .map(|i| {
                let mut acc: u128 = 0;
                let row = self.row(i);
                for (a, b) in row.iter().zip(v) {
                    acc += *a as u128 * *b as u128;
                }
                (acc % p as u128) as u64
            })
            .collect()
    }

    pub fn mat_mul(&self, other: &FpMat) -> FpMat {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.p, other.p);
        let p = self.p;
        let mut out = FpMat::zeros(p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = add(out.get(i, j), mul(a, other.get(k, j), p), p);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add_mat(&self, other: &FpMat) -> FpMat {
        assert_eq!((self.rows, self.cols, self.p), (other.rows, other.cols, other.p));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = add(*a, *b, self.p);
        }
        out
    }

    pub fn scale(&self, c: u64) -> FpMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = mul(*a, c, self.p);
        }
        out
    }

    /// In-place reduced row echelon form. Returns the pivot columns in order.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // First row at or below r with a nonzero entry in column c.
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    let t = self.get(r, j);
                    let v = self.get(pr, j);
                    self.set(r, j, v);
                    self.set(pr, j, t);
                }
            }
            let s = inv(self.get(r, c), p);
            for j in 0..self.cols {
                let v = mul(self.get(r, j), s, p);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i != r && self.get(i, c) != 0 {
                    let f = self.get(i, c);
                    for j in 0..self.cols {
                        let v = sub(self.get(i, j), mul(f, self.get(r, j), p), p);
                        self.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace { v : A v = 0 }, one vector per free
    /// column of the RREF, in ascending free-column order. The basis is its
    /// own reduced echelon form: vector k has a 1 at its free column and 0 at
    /// every other free column.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let p = self.p;
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &c) in pivots.iter().enumerate() {
                v[c] = Some(row);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut vec = vec![0u64; self.cols];
            vec[free] = 1;
            for (c, slot) in pivot_set.iter().enumerate() {
                if let Some(row) = slot {
                    vec[c] = neg(m.get(*row, free), p);
                }
            }
            basis.push(vec);
        }
        basis
    }

    /// Particular solution of `A x = b` with every free variable set to 0,
    /// or `None` when the system is inconsistent.
    pub fn solve(&self, rhs: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(rhs.len(), self.rows);
        let p = self.p;
        let mut aug = FpMat::zeros(p, self.rows, self.cols + 1);
        for (i, &b) in rhs.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b % p);
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![0u64; self.cols];
        for (row, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(row, self.cols);
        }
        Some(x)
    }

    /// Two-sided inverse of a square matrix, when it exists.
    pub fn inverse(&self) -> Option<FpMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let p = self.p;
        let mut aug = FpMat::zeros(p, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, 1);
        }
        let pivots = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return None;
        }
        let mut out = FpMat::zeros(p, n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug.get(i, n + j));
            }
        }
        Some(out)
    }
}

/// Incremental row reducer: feed rows one at a time, keep only the reduced
/// independent ones. Memory stays O(cols * rank) no matter how many rows the
/// domain generates, and a row of the form (0 ... 0 | c != 0) in augmented
/// use is reported as an inconsistency by the caller checking `reduce`.
#[derive(Debug, Clone)]
pub struct RowReducer {
    p: u64,
    cols: usize,
    /// Reduced rows, sorted by pivot column; parallel vector of pivots.
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl RowReducer {
    pub fn new(p: u64, cols: usize) -> Self {
        RowReducer { p, cols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `row` against the current basis; if a new pivot appears, absorb
    /// the row. Returns the fully reduced row.
    pub fn reduce(&mut self, mut row: Vec<u64>) -> Vec<u64> {
        assert_eq!(row.len(), self.cols);
        let p = self.p;
        for v in row.iter_mut() {
            *v %= p;
        }
        for (r, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = row[pc];
            if f != 0 {
                for j in 0..self.cols {
                    row[j] = sub(row[j], mul(f, r[j], p), p);
                }
            }
        }
        if let Some(pc) = row.iter().position(|&v| v != 0) {
            let s = inv(row[pc], p);
            for v in row.iter_mut() {
                *v = mul(*v, s, p);
            }
            // Back-substitute into existing rows to stay fully reduced.
            for r in self.rows.iter_mut() {
                let f = r[pc];
                if f != 0 {
                    for j in 0..self.cols {
                        r[j] = sub(r[j], mul(f, row[j], p), p);
                    }
                }
            }
            let at = self.pivots.iter().position(|&q| q > pc).unwrap_or(self.pivots.len());
            self.pivots.insert(at, pc);
            self.rows.insert(at, row.clone());
        }
        row
    }

    /// View of the accumulated reduced rows as a matrix.
    pub fn to_matrix(&self) -> FpMat {
        FpMat::from_rows(self.p, if self.rows.is_empty() {
            vec![vec![0; self.cols]]
        } else {
            self.rows.clone()
        })
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn reduced_rows(&self) -> &[Vec<u64>] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let primes = [2u64, 3, 5, 7, 11, 13, 101];
        for p in primes {
            assert!(is_prime(p), "{p}");
        }
        for n in [0u64, 1, 4, 9, 15, 21, 100] {
            assert!(!is_prime(n), "{n}");
        }
    }

    #[test]
    fn scalar_inverses() {
        for p in [3u64, 5, 7, 11] {
            for a in 1..p {
                assert_eq!(mul(a, inv(a, p), p), 1);
            }
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(least_primitive_root(3), 2);
        assert_eq!(least_primitive_root(5), 2);
        assert_eq!(least_primitive_root(7), 3);
        assert_eq!(least_primitive_root(11), 2);
    }

    #[test]
    fn rref_and_nullspace() {
        // x + y = 0 over F_3 has nullspace spanned by (2, 1)... normalized as
        // free col y = 1, x = -1 = 2.
        let m = FpMat::from_rows(3, vec![vec![1, 1]]);
        let ns = m.nullspace();
        assert_eq!(ns, vec![vec![2, 1]]);
        for v in &ns {
            assert_eq!(m.mul_vec(v), vec![0]);
        }
    }

    #[test]
    fn solve_consistent_and_not() {
        let m = FpMat::from_rows(5, vec![vec![1, 2], vec![3, 1]]);
        let x = m.solve(&[3, 4]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![3, 4]);
        let sing = FpMat::from_rows(5, vec![vec![1, 2], vec![2, 4]]);
        assert!(sing.solve(&[1, 3]).is_none());
        assert!(sing.solve(&[1, 2]).is_some());
    }

    #[test]
    fn inverse_round_trip() {
        let m = FpMat::from_rows(7, vec![vec![1, 2, 0], vec![0, 1, 3], vec![5, 0, 1]]);
        let inv = m.inverse().expect("invertible");
        assert_eq!(m.mat_mul(&inv), FpMat::identity(7, 3));
        assert_eq!(inv.mat_mul(&m), FpMat::identity(7, 3));
        let sing = FpMat::from_rows(7, vec![vec![1, 2], vec![2, 4]]);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn incremental_matches_batch() {
        let rows = vec![
            vec![1u64, 2, 3, 4],
            vec![2, 4, 6, 8],
            vec![0, 1, 1, 0],
            vec![1, 0, 1, 4],
            vec![3, 3, 3, 3],
        ];
        let mut inc = RowReducer::new(5, 4);
        for r in &rows {
            inc.reduce(r.clone());
        }
        let mut batch = FpMat::from_rows(5, rows);
        let pivots = batch.rref();
        assert_eq!(inc.pivots(), &pivots[..]);
        assert_eq!(inc.rank(), pivots.len());
        for (i, row) in inc.reduced_rows().iter().enumerate() {
            assert_eq!(&batch.row(i).to_vec(), row);
        }
    }
}
