//! Finite-dimensional unital associative algebras over a prime field, given
//! by structure constants.
//!
//! An algebra is a prime `p`, a dimension `d`, and a `d x d` table whose
//! entry `(i, j)` is the coordinate vector of `basis_i * basis_j`. The ground
//! field is always F_p: in characteristic p an additive map of the algebra is
//! the same thing as an F_p-linear map, which is what makes functional
//! identities a finite linear problem downstream.
//!
//! Matrix algebras over finite fields stand in for the division rings of the
//! underlying theory. They are proxies: their unit group is a proper subset
//! of the nonzero elements, so operations quantified over units and over the
//! whole algebra are kept distinct everywhere in this crate.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::{self, FpMat};
use crate::fppoly::{self, FpPoly};
use crate::genpoly::CanonCtx;
use crate::DEFAULT_BUDGET;

/// The interchange JSON form of an algebra.
///
/// `mul_table[i][j]` is the coordinate vector of `basis_i * basis_j`; all
/// integers are reduced mod `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub p: u64,
    pub dim: usize,
    pub basis: Vec<String>,
    pub mul_table: Vec<Vec<Vec<u64>>>,
    pub one: Vec<u64>,
}

impl AlgebraDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::BadParameter(format!("invalid algebra descriptor: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }
}

/// How a standard algebra was constructed, when known. Raw descriptors are
/// `Custom`; the field/matrix constructors record their parameters so that
/// structure-aware helpers (Frobenius powers, transpose) stay available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraKind {
    Custom,
    /// GF(p^k) with the recorded modulus.
    Field { k: usize, modulus: FpPoly },
    /// M_n(GF(p^k)) with the recorded modulus.
    Matrix { n: usize, k: usize, modulus: FpPoly },
}

#[derive(Debug)]
pub(crate) struct AlgebraData {
    p: u64,
    dim: usize,
    basis_labels: Vec<String>,
    /// Row-major: entry `i * dim + j` is the coordinate vector of b_i * b_j.
    mul_table: Vec<Vec<u64>>,
    one: Vec<u64>,
    kind: AlgebraKind,
    /// Basis of the center, computed eagerly at construction.
    center: Vec<Vec<u64>>,
    /// Canonicalization context for generalized polynomials, built on demand.
    pub(crate) canon_ctx: OnceLock<std::result::Result<Arc<CanonCtx>, Error>>,
}

/// A validated algebra. Cheap to clone; all data is immutable and shared.
#[derive(Clone)]
pub struct FiniteAlgebra {
    pub(crate) data: Arc<AlgebraData>,
}

impl fmt::Debug for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteAlgebra(p={}, dim={})", self.p(), self.dim())
    }
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.p == other.data.p
                && self.data.dim == other.data.dim
                && self.data.mul_table == other.data.mul_table
                && self.data.one == other.data.one)
    }
}

impl Eq for FiniteAlgebra {}

impl FiniteAlgebra {
    /// Build and validate an algebra from its descriptor. Associativity and
    /// the unity law are verified exhaustively on basis triples.
    pub fn build(desc: AlgebraDescriptor) -> Result<FiniteAlgebra> {
        fp::ensure_prime(desc.p)?;
        let p = desc.p;
        let d = desc.dim;
        if d < 1 {
            return Err(Error::BadParameter("dimension must be >= 1".into()));
        }
        if desc.basis.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: desc.basis.len() });
        }
        if desc.mul_table.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: desc.mul_table.len() });
        }
        let mut table = Vec::with_capacity(d * d);
        for row in &desc.mul_table {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            for entry in row {
                if entry.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: entry.len() });
                }
                table.push(entry.iter().map(|&c| c % p).collect::<Vec<u64>>());
            }
        }
        if desc.one.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: desc.one.len() });
        }
        let one: Vec<u64> = desc.one.iter().map(|&c| c % p).collect();
        Self::from_parts(p, d, desc.basis, table, one, AlgebraKind::Custom)
    }

    fn from_parts(
        p: u64,
        dim: usize,
        basis_labels: Vec<String>,
        mul_table: Vec<Vec<u64>>,
        one: Vec<u64>,
        kind: AlgebraKind,
    ) -> Result<FiniteAlgebra> {
        // Raw table product of coordinate vectors, usable before the algebra
        // value exists.
        let raw_mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
            let mut out = vec![0u64; dim];
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0 {
                    continue;
                }
                for (j, &bj) in b.iter().enumerate() {
                    if bj == 0 {
                        continue;
                    }
                    let c = fp::mul(ai, bj, p);
                    for (o, &t) in out.iter_mut().zip(&mul_table[i * dim + j]) {
                        *o = fp::add(*o, fp::mul(c, t, p), p);
                    }
                }
            }
            out
        };

        // Unity law on every basis element.
        for i in 0..dim {
            let mut e = vec![0u64; dim];
            e[i] = 1;
            if raw_mul(&one, &e) != e || raw_mul(&e, &one) != e {
                return Err(Error::UnityFailure { index: i });
            }
        }

        // Associativity on all basis triples.
        for i in 0..dim {
            for j in 0..dim {
                let ij = mul_table[i * dim + j].clone();
                for k in 0..dim {
                    let mut ek = vec![0u64; dim];
                    ek[k] = 1;
                    let left = raw_mul(&ij, &ek);
                    let right = {
                        let mut ei = vec![0u64; dim];
                        ei[i] = 1;
                        raw_mul(&ei, &mul_table[j * dim + k])
                    };
                    if left != right {
                        return Err(Error::NotAssociative { i, j, k });
                    }
                }
            }
        }

        // Center: nullspace of the stacked commutation maps L_{b_i} - R_{b_i}.
        let mut rows = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            // Row block expressing coords of b_i * a - a * b_i.
            #[allow(clippy::needless_range_loop)]
            for coord in 0..dim {
                let row: Vec<u64> = (0..dim)
                    .map(|j| {
                        fp::sub(mul_table[i * dim + j][coord], mul_table[j * dim + i][coord], p)
                    })
                    .collect();
                rows.push(row);
            }
        }
        let center = FpMat::from_rows(p, rows).nullspace();

        Ok(FiniteAlgebra {
            data: Arc::new(AlgebraData {
                p,
                dim,
                basis_labels,
                mul_table,
                one,
                kind,
                center,
                canon_ctx: OnceLock::new(),
            }),
        })
    }

    /// GF(p^k) as a k-dimensional F_p-algebra. When no modulus is supplied,
    /// the first irreducible monic polynomial in lexicographic coefficient
    /// order (constant term first) is used, so descriptors are reproducible.
    pub fn galois_field(p: u64, k: usize, modulus: Option<FpPoly>) -> Result<FiniteAlgebra> {
        fp::ensure_prime(p)?;
        if k < 1 {
            return Err(Error::BadParameter(format!("extension degree must be >= 1, got {k}")));
        }
        let modulus = match modulus {
            Some(m) => {
                if m.p() != p {
                    return Err(Error::CharMismatch { expected: p, found: m.p() });
                }
                if m.degree() != Some(k) {
                    return Err(Error::BadParameter(format!(
                        "modulus must have degree {k}, got {:?}",
                        m.degree()
                    )));
                }
                // Normalize to monic; scaling by a unit does not change the ideal.
                let lead_inv = fp::inv(m.coeff(k), p);
                let monic =
                    FpPoly::new(p, m.coeffs().iter().map(|&c| fp::mul(c, lead_inv, p)).collect());
                if !monic.is_irreducible() {
                    return Err(Error::ReducibleModulus(monic.display_in("t")));
                }
                monic
            }
            None => fppoly::default_irreducible(p, k)?,
        };
        let labels: Vec<String> = (0..k)
            .map(|a| match a {
                0 => "1".to_string(),
                1 => "t".to_string(),
                a => format!("t{a}"),
            })
            .collect();
        // Powers t^e reduced mod the modulus, for e up to 2k - 2.
        let mut powers: Vec<Vec<u64>> = Vec::with_capacity(2 * k - 1);
        let mut cur = FpPoly::one(p);
        for _ in 0..(2 * k - 1) {
            let mut coords = vec![0u64; k];
            for (i, c) in coords.iter_mut().enumerate() {
                *c = cur.coeff(i);
            }
            powers.push(coords);
            cur = cur.mul(&FpPoly::x(p)).rem(&modulus);
        }
        let mut table = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                table.push(powers[a + b].clone());
            }
        }
        let mut one = vec![0u64; k];
        one[0] = 1;
        Self::from_parts(p, k, labels, table, one, AlgebraKind::Field { k, modulus })
    }

    /// M_n(GF(p^k)) as an F_p-algebra of dimension n^2 * k. Basis element
    /// (i, j, a) is the matrix unit e_ij scaled by t^a; its label is `eIJ`
    /// with a `tA` suffix for a >= 1.
    pub fn matrix_algebra(n: usize, p: u64, k: usize, modulus: Option<FpPoly>) -> Result<FiniteAlgebra> {
        if n < 1 {
            return Err(Error::BadParameter(format!("matrix size must be >= 1, got {n}")));
        }
        let field = FiniteAlgebra::galois_field(p, k, modulus)?;
        let modulus = match field.kind() {
            AlgebraKind::Field { modulus, .. } => modulus.clone(),
            _ => unreachable!(),
        };
        let d = n * n * k;
        let sep = if n > 9 { "_" } else { "" };
        let mut labels = Vec::with_capacity(d);
        for i in 1..=n {
            for j in 1..=n {
                for a in 0..k {
                    let base = format!("e{i}{sep}{j}");
                    labels.push(match a {
                        0 => base,
                        1 => format!("{base}t"),
                        a => format!("{base}t{a}"),
                    });
                }
            }
        }
        let idx = |i: usize, j: usize, a: usize| ((i * n) + j) * k + a;
        let mut table = vec![vec![0u64; d]; d * d];
        for i in 0..n {
            for j in 0..n {
                for a in 0..k {
                    for l in 0..n {
                        for m in 0..n {
                            for b in 0..k {
                                if j != l {
                                    continue;
                                }
                                // e_ij t^a * e_jm t^b = e_im (t^a t^b mod modulus)
                                let field_coords = {
                                    let mut ea = vec![0u64; k];
                                    ea[a] = 1;
                                    let mut eb = vec![0u64; k];
                                    eb[b] = 1;
                                    field.raw_mul(&ea, &eb)
                                };
                                let entry = &mut table[idx(i, j, a) * d + idx(l, m, b)];
                                for (c, &v) in field_coords.iter().enumerate() {
                                    entry[idx(i, m, c)] = v;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut one = vec![0u64; d];
        for i in 0..n {
            one[idx(i, i, 0)] = 1;
        }
        Self::from_parts(p, d, labels, table, one, AlgebraKind::Matrix { n, k, modulus })
    }

    pub fn p(&self) -> u64 {
        self.data.p
    }

    pub fn dim(&self) -> usize {
        self.data.dim
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.data.basis_labels
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.data.kind
    }

    /// Recover (n, k) when this algebra is a matrix algebra: either recorded
    /// at construction, or recognized from a descriptor whose labels and
    /// table match the standard construction exactly.
    pub fn matrix_structure(&self) -> Option<(usize, usize)> {
        if let AlgebraKind::Matrix { n, k, .. } = &self.data.kind {
            return Some((*n, *k));
        }
        // Try to recognize a round-tripped standard descriptor.
        for k in 1..=self.dim() {
            if !self.dim().is_multiple_of(k) {
                continue;
            }
            let nn = self.dim() / k;
            let n = (nn as f64).sqrt().round() as usize;
            if n * n != nn || n < 1 {
                continue;
            }
            if let Ok(std) = FiniteAlgebra::matrix_algebra(n, self.p(), k, None) {
                if std.basis_labels() == self.basis_labels()
                    && std.data.mul_table == self.data.mul_table
                    && std.data.one == self.data.one
                {
                    return Some((n, k));
                }
            }
        }
        None
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        let d = self.dim();
        let mut mul_table = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::with_capacity(d);
            for j in 0..d {
                row.push(self.data.mul_table[i * d + j].clone());
            }
            mul_table.push(row);
        }
        AlgebraDescriptor {
            p: self.p(),
            dim: d,
            basis: self.data.basis_labels.clone(),
            mul_table,
            one: self.data.one.clone(),
        }
    }

    pub fn zero(&self) -> Element {
        Element { algebra: self.clone(), coords: vec![0; self.dim()] }
    }

    pub fn one(&self) -> Element {
        Element { algebra: self.clone(), coords: self.data.one.clone() }
    }

    pub fn basis_elem(&self, i: usize) -> Element {
        assert!(i < self.dim());
        let mut coords = vec![0u64; self.dim()];
        coords[i] = 1;
        Element { algebra: self.clone(), coords }
    }

    /// The scalar `c mod p` times the unity.
    pub fn scalar(&self, c: u64) -> Element {
        let c = c % self.p();
        let coords = self.data.one.iter().map(|&o| fp::mul(o, c, self.p())).collect();
        Element { algebra: self.clone(), coords }
    }

    pub fn from_coords(&self, coords: Vec<u64>) -> Result<Element> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: coords.len() });
        }
        let coords = coords.into_iter().map(|c| c % self.p()).collect();
        Ok(Element { algebra: self.clone(), coords })
    }

    /// Element by its index in the lexicographic coordinate order:
    /// `coords[0]` is the most significant digit base p.
    pub fn element_from_index(&self, mut idx: u64) -> Element {
        let d = self.dim();
        let p = self.p();
        let mut coords = vec![0u64; d];
        for c in coords.iter_mut().rev() {
            *c = idx % p;
            idx /= p;
        }
        Element { algebra: self.clone(), coords }
    }

    pub fn index_of(&self, elt: &Element) -> u64 {
        let p = self.p();
        elt.coords.iter().fold(0u64, |acc, &c| acc * p + c)
    }

    /// Number of elements, bailing out if it does not fit the budget math.
    pub fn order(&self) -> u128 {
        (self.p() as u128)
            .checked_pow(self.dim() as u32)
            .unwrap_or(u128::MAX)
    }

    pub(crate) fn raw_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let d = self.dim();
        let p = self.p();
        let mut out = vec![0u64; d];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let row_base = i * d;
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let c = fp::mul(ai, bj, p);
                for (o, &t) in out.iter_mut().zip(&self.data.mul_table[row_base + j]) {
                    *o = fp::add(*o, fp::mul(c, t, p), p);
                }
            }
        }
        out
    }

    /// Matrix of left multiplication by `a` acting on coordinate columns.
    pub fn left_mul_matrix(&self, a: &Element) -> FpMat {
        assert_eq!(self, &a.algebra, "operands belong to different algebras");
        let d = self.dim();
        let mut m = FpMat::zeros(self.p(), d, d);
        for j in 0..d {
            let mut e = vec![0u64; d];
            e[j] = 1;
            let col = self.raw_mul(&a.coords, &e);
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Matrix of right multiplication by `b`.
    pub fn right_mul_matrix(&self, b: &Element) -> FpMat {
        assert_eq!(self, &b.algebra, "operands belong to different algebras");
        let d = self.dim();
        let mut m = FpMat::zeros(self.p(), d, d);
        for j in 0..d {
            let mut e = vec![0u64; d];
            e[j] = 1;
            let col = self.raw_mul(&e, &b.coords);
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn is_commutative(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| self.data.mul_table[i * d + j] == self.data.mul_table[j * d + i]))
    }

    /// All invertible elements, in lexicographic coordinate order.
    pub fn enumerate_units(&self) -> Result<Vec<Element>> {
        self.enumerate_units_with_budget(DEFAULT_BUDGET)
    }

    pub fn enumerate_units_with_budget(&self, budget: u64) -> Result<Vec<Element>> {
        let order = self.order();
        if order > budget as u128 {
            return Err(Error::BudgetExceeded { needed: order, budget });
        }
        let mut units = Vec::new();
        for idx in 0..order as u64 {
            let e = self.element_from_index(idx);
            if e.inv().is_some() {
                units.push(e);
            }
        }
        Ok(units)
    }

    /// Basis over F_p of { a : a s = s a for every s in S }.
    pub fn centralizer(&self, s: &[Element]) -> Result<Vec<Element>> {
        let d = self.dim();
        let p = self.p();
        let mut rows = Vec::new();
        for elt in s {
            if &elt.algebra != self {
                return Err(Error::AlgebraMismatch);
            }
            let l = self.left_mul_matrix(elt);
            let r = self.right_mul_matrix(elt);
            for i in 0..d {
                let row: Vec<u64> =
                    (0..d).map(|j| fp::sub(l.get(i, j), r.get(i, j), p)).collect();
                rows.push(row);
            }
        }
        if rows.is_empty() {
            // Empty S centralizes to the whole algebra.
            return Ok((0..d).map(|i| self.basis_elem(i)).collect());
        }
        let basis = FpMat::from_rows(p, rows).nullspace();
        basis.into_iter().map(|coords| self.from_coords(coords)).collect()
    }

    /// Basis of the center Z(A): the centralizer of the full basis.
    pub fn center(&self) -> Vec<Element> {
        self.data
            .center
            .iter()
            .map(|coords| Element { algebra: self.clone(), coords: coords.clone() })
            .collect()
    }

    pub fn center_dim(&self) -> usize {
        self.data.center.len()
    }
}

/// A coordinate vector in a fixed algebra.
#[derive(Clone)]
pub struct Element {
    algebra: FiniteAlgebra,
    coords: Vec<u64>,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element{:?}", self.coords)
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.coords == other.coords
    }
}

impl Eq for Element {}

impl Element {
    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn checked_add(&self, other: &Element) -> Result<Element> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Element) -> Result<Element> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self * other)
    }

    pub fn scale(&self, c: u64) -> Element {
        let p = self.algebra.p();
        let c = c % p;
        Element {
            algebra: self.algebra.clone(),
            coords: self.coords.iter().map(|&a| fp::mul(a, c, p)).collect(),
        }
    }

    /// a^n with a^0 = 1, by square and multiply.
    pub fn pow(&self, mut n: u64) -> Element {
        let mut acc = self.algebra.one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// The two-sided inverse, if this element is a unit. Found by solving the
    /// linear system a * x = 1 and verifying x * a = 1; there is no
    /// division-ring shortcut for a general algebra.
    pub fn inv(&self) -> Option<Element> {
        let one = &self.algebra.data.one;
        let l = self.algebra.left_mul_matrix(self);
        let x = l.solve(one)?;
        let back = self.algebra.raw_mul(&x, &self.coords);
        if &back == one {
            Some(Element { algebra: self.algebra.clone(), coords: x })
        } else {
            None
        }
    }

    pub fn is_unit(&self) -> bool {
        self.inv().is_some()
    }

    /// Commutator a b - b a.
    pub fn commutator(&self, other: &Element) -> Element {
        &(self * other) - &(other * self)
    }
}

impl std::ops::Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        assert_eq!(self.algebra, rhs.algebra, "operands belong to different algebras");
        let p = self.algebra.p();
        Element {
            algebra: self.algebra.clone(),
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(&a, &b)| fp::add(a, b, p))
                .collect(),
        }
    }
}

impl std::ops::Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        assert_eq!(self.algebra, rhs.algebra, "operands belong to different algebras");
        let p = self.algebra.p();
        Element {
            algebra: self.algebra.clone(),
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(&a, &b)| fp::sub(a, b, p))
                .collect(),
        }
    }
}

impl std::ops::Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        assert_eq!(self.algebra, rhs.algebra, "operands belong to different algebras");
        Element {
            algebra: self.algebra.clone(),
            coords: self.algebra.raw_mul(&self.coords, &rhs.coords),
        }
    }
}

impl std::ops::Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        let p = self.algebra.p();
        Element {
            algebra: self.algebra.clone(),
            coords: self.coords.iter().map(|&a| fp::neg(a, p)).collect(),
        }
    }
}
