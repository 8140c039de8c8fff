//! Generalized polynomials in A{X_1,...,X_m} with a canonical normal form.
//!
//! A monomial of degree s reads `a_1 X_{v_1} a_2 X_{v_2} ... a_s X_{v_s}
//! a_{s+1}` with coefficients from the algebra interleaved between variables.
//! A generalized polynomial is a finite sum of monomials, considered modulo
//! the relations that let central elements slide across variables:
//! `a z X b = a X z b` for z in the center Z(A).
//!
//! The normal form realizes that quotient concretely. Writing Z = Z(A) and
//! picking a Z-basis u_0 = 1, u_1, ..., u_{r-1} of A, the span of the
//! degree-s monomials with variable word w decomposes as the s+1-fold tensor
//! power of A over Z: each monomial becomes a Z-linear combination of the
//! tensors `u_{i_1} (x) ... (x) u_{i_{s+1}}`. The canonical table maps each
//! variable word to the sparse set of those multi-indices with their Z
//! coordinates. Two term lists are the same formal element exactly when the
//! tables agree, and the zero test is literal emptiness.
//!
//! This construction needs Z(A) to be a field and A free over it, which
//! holds for GF(q) and M_n(GF(q)). Algebras with a non-field center (such as
//! a direct product of fields) are valid inputs elsewhere in the crate but
//! are rejected here with a diagnostic.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::fp::{self, FpMat};

/// Degree with a distinct value for the zero polynomial, so that degree
/// arithmetic and homogeneous decomposition never special-case silently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    MinusInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::MinusInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

/// Per-algebra canonicalization data: the center basis, a Z-basis of the
/// algebra with u_0 = 1, and the change-of-basis matrices. Stored as raw
/// coordinate vectors (not `Element`s) so the cache inside `FiniteAlgebra`
/// does not create a reference cycle.
#[derive(Debug)]
pub struct CanonCtx {
    /// Dimension of the center over F_p.
    pub(crate) center_dim: usize,
    /// Rank of A as a free Z-module; center_dim * rank = dim.
    pub(crate) rank: usize,
    /// Coordinates of the Z-basis u_0, ..., u_{r-1}; u_0 is the unity.
    pub(crate) zbasis: Vec<Vec<u64>>,
    /// Coordinates of the center basis over F_p.
    pub(crate) zeta: Vec<Vec<u64>>,
    /// dim x dim matrix taking element coordinates to block coordinates;
    /// block index i * center_dim + j is the coefficient of zeta_j * u_i.
    pub(crate) to_block: FpMat,
    /// Structure constants of the center: entry i * c + j is the
    /// zeta-coordinate vector of zeta_i * zeta_j.
    pub(crate) zmul: Vec<Vec<u64>>,
    /// zeta-coordinates of 1.
    pub(crate) one_z: Vec<u64>,
}

impl CanonCtx {
    fn zmul(&self, p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
        let c = self.center_dim;
        let mut out = vec![0u64; c];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let f = fp::mul(ai, bj, p);
                for (o, &t) in out.iter_mut().zip(&self.zmul[i * c + j]) {
                    *o = fp::add(*o, fp::mul(f, t, p), p);
                }
            }
        }
        out
    }

    /// Decompose an element as a sparse list of (Z-basis index, Z-coords).
    fn decompose(&self, coords: &[u64]) -> Vec<(u8, Vec<u64>)> {
        let block = self.to_block.mul_vec(coords);
        let c = self.center_dim;
        let mut out = Vec::new();
        for i in 0..self.rank {
            let z = &block[i * c..(i + 1) * c];
            if z.iter().any(|&v| v != 0) {
                out.push((i as u8, z.to_vec()));
            }
        }
        out
    }

    /// Element coordinates of (z in zeta-coords) * u_i.
    fn lift(&self, algebra: &FiniteAlgebra, z: &[u64], i: u8) -> Vec<u64> {
        let p = algebra.p();
        let d = algebra.dim();
        let mut zc = vec![0u64; d];
        for (j, &v) in z.iter().enumerate() {
            if v == 0 {
                continue;
            }
            for (o, &t) in zc.iter_mut().zip(&self.zeta[j]) {
                *o = fp::add(*o, fp::mul(v, t, p), p);
            }
        }
        algebra.raw_mul(&zc, &self.zbasis[i as usize])
    }
}

/// Build (or fetch the cached) canonicalization context for an algebra.
pub(crate) fn canon_ctx(algebra: &FiniteAlgebra) -> Result<Arc<CanonCtx>> {
    algebra
        .data
        .canon_ctx
        .get_or_init(|| build_ctx(algebra).map(Arc::new))
        .clone()
}

fn build_ctx(algebra: &FiniteAlgebra) -> Result<CanonCtx> {
    let d = algebra.dim();
    let p = algebra.p();
    if d > 255 {
        return Err(Error::BadParameter(
            "canonical form supports dimension at most 255".into(),
        ));
    }
    let zeta: Vec<Vec<u64>> = algebra.center().iter().map(|z| z.coords().to_vec()).collect();
    let c = zeta.len();
    if !d.is_multiple_of(c) {
        return Err(Error::CenterNotField(format!(
            "center dimension {c} does not divide the algebra dimension {d}"
        )));
    }

    // The center is a field iff (a) the Frobenius z -> z^p is injective on it
    // (no nilpotents) and (b) its fixed space is one-dimensional (no
    // nontrivial idempotents splitting it into a product).
    let project = |coords: &[u64]| -> Option<Vec<u64>> {
        let mut cols = FpMat::zeros(p, d, c);
        for (j, z) in zeta.iter().enumerate() {
            for (i, &v) in z.iter().enumerate() {
                cols.set(i, j, v);
            }
        }
        cols.solve(coords)
    };
    let mut frob = FpMat::zeros(p, c, c);
    for (j, z) in zeta.iter().enumerate() {
        let zp = algebra.from_coords(z.clone()).expect("center coords").pow(p);
        let col = project(zp.coords()).expect("Frobenius stays in the center");
        for (i, &v) in col.iter().enumerate() {
            frob.set(i, j, v);
        }
    }
    if !frob.nullspace().is_empty() {
        return Err(Error::CenterNotField(
            "the center contains nonzero nilpotent elements".into(),
        ));
    }
    let mut fixed = frob.clone();
    for i in 0..c {
        let v = fp::sub(fixed.get(i, i), 1, p);
        fixed.set(i, i, v);
    }
    if fixed.nullspace().len() != 1 {
        return Err(Error::CenterNotField(
            "the center splits as a product of fields (nontrivial idempotents)".into(),
        ));
    }

    // Greedy Z-basis with u_0 = 1. For a field center every pick adds an
    // exact block of center_dim new dimensions, so the loop always completes.
    let mut reducer = crate::fp::RowReducer::new(p, d);
    let mut zbasis: Vec<Vec<u64>> = Vec::new();
    let one = algebra.one().coords().to_vec();
    let add_module = |reducer: &mut crate::fp::RowReducer, u: &[u64]| {
        for z in &zeta {
            reducer.reduce(algebra.raw_mul(z, u));
        }
    };
    zbasis.push(one.clone());
    add_module(&mut reducer, &one);
    let mut i = 0;
    while reducer.rank() < d {
        debug_assert!(i < d, "standard basis exhausted before spanning");
        let mut e = vec![0u64; d];
        e[i] = 1;
        let before = reducer.rank();
        let reduced = {
            let mut probe = reducer.clone();
            probe.reduce(e.clone());
            probe.rank()
        };
        if reduced > before {
            zbasis.push(e.clone());
            add_module(&mut reducer, &e);
        }
        i += 1;
    }
    let r = zbasis.len();
    debug_assert_eq!(r * c, d);

    // from_block: columns are zeta_j * u_i; invert once.
    let mut from_block = FpMat::zeros(p, d, d);
    for (i, u) in zbasis.iter().enumerate() {
        for (j, z) in zeta.iter().enumerate() {
            let col = algebra.raw_mul(z, u);
            for (row, &v) in col.iter().enumerate() {
                from_block.set(row, i * c + j, v);
            }
        }
    }
    let to_block = from_block.inverse().expect("Z-basis blocks are independent");

    let mut zmul = Vec::with_capacity(c * c);
    let one_z = {
        let block = to_block.mul_vec(&one);
        block[..c].to_vec()
    };
    for a in 0..c {
        for b in 0..c {
            let prod = algebra.raw_mul(&zeta[a], &zeta[b]);
            let block = to_block.mul_vec(&prod);
            debug_assert!(block[c..].iter().all(|&v| v == 0));
            zmul.push(block[..c].to_vec());
        }
    }

    Ok(CanonCtx { center_dim: c, rank: r, zbasis, zeta, to_block, zmul, one_z })
}

/// One interleaved monomial `a_1 X_{v_1} ... a_s X_{v_s} a_{s+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenMonomial {
    coeffs: Vec<Element>,
    vars: Vec<u8>,
}

impl GenMonomial {
    pub fn new(coeffs: Vec<Element>, vars: Vec<usize>) -> Result<GenMonomial> {
        if coeffs.len() != vars.len() + 1 {
            return Err(Error::BadParameter(format!(
                "a degree-{} monomial needs {} coefficients, got {}",
                vars.len(),
                vars.len() + 1,
                coeffs.len()
            )));
        }
        if vars.iter().any(|&v| v > 255) {
            return Err(Error::BadParameter("variable index exceeds 255".into()));
        }
        Ok(GenMonomial { coeffs, vars: vars.into_iter().map(|v| v as u8).collect() })
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    pub fn vars(&self) -> Vec<usize> {
        self.vars.iter().map(|&v| v as usize).collect()
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }
}

type Word = Vec<u8>;
type MultiIdx = Vec<u8>;
type Canon = BTreeMap<Word, BTreeMap<MultiIdx, Vec<u64>>>;

/// A generalized polynomial in canonical normal form.
///
/// The stored term list is regenerated from the canonical table after every
/// operation and sorted by (degree, variable word, tensor index), so equal
/// elements print identically and `terms` is empty exactly for the zero
/// polynomial.
#[derive(Debug, Clone)]
pub struct GenPoly {
    algebra: FiniteAlgebra,
    num_vars: usize,
    terms: Vec<GenMonomial>,
    canon: Canon,
}

impl PartialEq for GenPoly {
    /// Formal equality: same algebra and identical canonical tables. The
    /// ambient variable count does not matter (X_1 in one variable equals
    /// X_1 viewed inside two variables).
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.canon == other.canon
    }
}

impl Eq for GenPoly {}

impl GenPoly {
    pub fn zero(algebra: &FiniteAlgebra, num_vars: usize) -> GenPoly {
        GenPoly {
            algebra: algebra.clone(),
            num_vars,
            terms: Vec::new(),
            canon: Canon::new(),
        }
    }

    pub fn constant(value: &Element, num_vars: usize) -> Result<GenPoly> {
        let monomial = GenMonomial::new(vec![value.clone()], vec![])?;
        GenPoly::from_monomials(value.algebra(), num_vars, vec![monomial])
    }

    pub fn variable(algebra: &FiniteAlgebra, var: usize, num_vars: usize) -> Result<GenPoly> {
        if var >= num_vars {
            return Err(Error::BadParameter(format!(
                "variable index {var} out of range for {num_vars} variables"
            )));
        }
        let monomial = GenMonomial::new(vec![algebra.one(), algebra.one()], vec![var])?;
        GenPoly::from_monomials(algebra, num_vars, vec![monomial])
    }

    /// Canonicalize a raw term list.
    pub fn from_monomials(
        algebra: &FiniteAlgebra,
        num_vars: usize,
        monomials: Vec<GenMonomial>,
    ) -> Result<GenPoly> {
        if num_vars > 255 {
            return Err(Error::BadParameter("at most 255 variables supported".into()));
        }
        let ctx = canon_ctx(algebra)?;
        let p = algebra.p();
        let mut canon = Canon::new();
        for m in &monomials {
            for coeff in &m.coeffs {
                if coeff.algebra() != algebra {
                    return Err(Error::AlgebraMismatch);
                }
            }
            if let Some(&v) = m.vars.iter().find(|&&v| (v as usize) >= num_vars) {
                return Err(Error::BadParameter(format!(
                    "variable index {v} out of range for {num_vars} variables"
                )));
            }
            // Tensor expansion of the coefficient tuple.
            let mut acc: BTreeMap<MultiIdx, Vec<u64>> = BTreeMap::new();
            acc.insert(Vec::new(), ctx.one_z.clone());
            for coeff in &m.coeffs {
                let parts = ctx.decompose(coeff.coords());
                let mut next: BTreeMap<MultiIdx, Vec<u64>> = BTreeMap::new();
                for (mi, z) in &acc {
                    for (i, zi) in &parts {
                        let prod = ctx.zmul(p, z, zi);
                        if prod.iter().all(|&v| v == 0) {
                            continue;
                        }
                        let mut key = mi.clone();
                        key.push(*i);
                        match next.get_mut(&key) {
                            Some(existing) => {
                                for (o, &v) in existing.iter_mut().zip(&prod) {
                                    *o = fp::add(*o, v, p);
                                }
                            }
                            None => {
                                next.insert(key, prod);
                            }
                        }
                    }
                }
                acc = next;
            }
            let block = canon.entry(m.vars.clone()).or_default();
            for (mi, z) in acc {
                match block.get_mut(&mi) {
                    Some(existing) => {
                        for (o, &v) in existing.iter_mut().zip(&z) {
                            *o = fp::add(*o, v, p);
                        }
                    }
                    None => {
                        block.insert(mi, z);
                    }
                }
            }
        }
        normalize(&mut canon);
        let terms = regenerate_terms(algebra, &ctx, &canon);
        Ok(GenPoly { algebra: algebra.clone(), num_vars, terms, canon })
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Canonical term list, sorted by (degree, variable word, tensor index).
    pub fn terms(&self) -> &[GenMonomial] {
        &self.terms
    }

    pub fn is_zero_formal(&self) -> bool {
        self.canon.is_empty()
    }

    pub fn degree(&self) -> Degree {
        self.canon
            .keys()
            .map(|w| w.len())
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    /// Does variable v occur in the canonical form?
    pub fn uses_var(&self, v: usize) -> bool {
        self.canon.keys().any(|w| w.iter().any(|&q| q as usize == v))
    }

    /// View in a larger ambient variable set.
    pub fn with_num_vars(&self, num_vars: usize) -> Result<GenPoly> {
        if num_vars < self.num_vars
            && self.canon.keys().any(|w| w.iter().any(|&v| (v as usize) >= num_vars)) {
                return Err(Error::VarCountMismatch { left: self.num_vars, right: num_vars });
            }
        let mut out = self.clone();
        out.num_vars = num_vars;
        Ok(out)
    }

    fn merged_num_vars(&self, other: &GenPoly) -> usize {
        self.num_vars.max(other.num_vars)
    }

    pub fn add(&self, other: &GenPoly) -> Result<GenPoly> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        let p = self.algebra.p();
        let mut canon = self.canon.clone();
        for (w, block) in &other.canon {
            let target = canon.entry(w.clone()).or_default();
            for (mi, z) in block {
                match target.get_mut(mi) {
                    Some(existing) => {
                        for (o, &v) in existing.iter_mut().zip(z) {
                            *o = fp::add(*o, v, p);
                        }
                    }
                    None => {
                        target.insert(mi.clone(), z.clone());
                    }
                }
            }
        }
        normalize(&mut canon);
        self.rebuild(canon, self.merged_num_vars(other))
    }

    pub fn neg(&self) -> GenPoly {
        let p = self.algebra.p();
        let mut canon = self.canon.clone();
        for block in canon.values_mut() {
            for z in block.values_mut() {
                for v in z.iter_mut() {
                    *v = fp::neg(*v, p);
                }
            }
        }
        self.rebuild(canon, self.num_vars).expect("negation preserves validity")
    }

    pub fn sub(&self, other: &GenPoly) -> Result<GenPoly> {
        self.add(&other.neg())
    }

    /// Scale by a central scalar c in F_p.
    pub fn scale(&self, c: u64) -> GenPoly {
        let p = self.algebra.p();
        let c = c % p;
        let mut canon = self.canon.clone();
        for block in canon.values_mut() {
            for z in block.values_mut() {
                for v in z.iter_mut() {
                    *v = fp::mul(*v, c, p);
                }
            }
        }
        normalize(&mut canon);
        self.rebuild(canon, self.num_vars).expect("scaling preserves validity")
    }

    pub fn mul(&self, other: &GenPoly) -> Result<GenPoly> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        let mut monomials = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                // Concatenate, merging the boundary coefficients.
                let mut coeffs = Vec::with_capacity(a.coeffs.len() + b.coeffs.len() - 1);
                coeffs.extend(a.coeffs[..a.coeffs.len() - 1].iter().cloned());
                coeffs.push(&a.coeffs[a.coeffs.len() - 1] * &b.coeffs[0]);
                coeffs.extend(b.coeffs[1..].iter().cloned());
                let mut vars: Vec<usize> = a.vars();
                vars.extend(b.vars());
                monomials.push(GenMonomial::new(coeffs, vars)?);
            }
        }
        GenPoly::from_monomials(&self.algebra, self.merged_num_vars(other), monomials)
    }

    pub fn pow(&self, n: u64) -> Result<GenPoly> {
        let mut acc = GenPoly::constant(&self.algebra.one(), self.num_vars)?;
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// The sum of all degree-j monomials.
    pub fn homogeneous_part(&self, j: usize) -> GenPoly {
        let canon: Canon = self
            .canon
            .iter()
            .filter(|(w, _)| w.len() == j)
            .map(|(w, b)| (w.clone(), b.clone()))
            .collect();
        self.rebuild(canon, self.num_vars).expect("filtering preserves validity")
    }

    /// Substitute elements for the variables and multiply out.
    pub fn eval(&self, assignment: &[Element]) -> Result<Element> {
        if assignment.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: assignment.len(),
            });
        }
        for x in assignment {
            if x.algebra() != &self.algebra {
                return Err(Error::AlgebraMismatch);
            }
        }
        let one = self.algebra.one();
        let mut total = self.algebra.zero();
        for m in &self.terms {
            let mut acc = m.coeffs[0].clone();
            for (t, &v) in m.vars.iter().enumerate() {
                acc = &acc * &assignment[v as usize];
                // Interior slots are often the unity; skip the multiplication.
                let c = &m.coeffs[t + 1];
                if c != &one {
                    acc = &acc * c;
                }
            }
            total = &total + &acc;
        }
        Ok(total)
    }

    /// Apply a variable permutation: occurrences of X_v become X_(perm of v).
    pub fn permute_vars(&self, perm: &[usize]) -> Result<GenPoly> {
        if perm.len() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: perm.len() });
        }
        let mut seen = vec![false; self.num_vars];
        for &q in perm {
            if q >= self.num_vars || seen[q] {
                return Err(Error::BadParameter("not a permutation".into()));
            }
            seen[q] = true;
        }
        let mut canon = Canon::new();
        for (w, block) in &self.canon {
            let nw: Word = w.iter().map(|&v| perm[v as usize] as u8).collect();
            canon.insert(nw, block.clone());
        }
        self.rebuild(canon, self.num_vars)
    }

    /// Replace X_v by X_a + X_b, viewing the result in `num_vars` variables.
    fn substitute_sum(&self, v: usize, a: usize, b: usize, num_vars: usize) -> Result<GenPoly> {
        let mut monomials = Vec::new();
        for m in &self.terms {
            let positions: Vec<usize> =
                (0..m.vars.len()).filter(|&t| m.vars[t] as usize == v).collect();
            for mask in 0u64..(1 << positions.len()) {
                let mut vars = m.vars();
                for (bit, &pos) in positions.iter().enumerate() {
                    vars[pos] = if mask >> bit & 1 == 0 { a } else { b };
                }
                monomials.push(GenMonomial::new(m.coeffs.clone(), vars)?);
            }
        }
        GenPoly::from_monomials(&self.algebra, num_vars, monomials)
    }

    fn rename_var(&self, v: usize, w: usize, num_vars: usize) -> Result<GenPoly> {
        let mut canon = Canon::new();
        let p = self.algebra.p();
        for (word, block) in &self.canon {
            let nw: Word =
                word.iter().map(|&q| if q as usize == v { w as u8 } else { q }).collect();
            let target = canon.entry(nw).or_default();
            for (mi, z) in block {
                match target.get_mut(mi) {
                    Some(existing) => {
                        for (o, &val) in existing.iter_mut().zip(z) {
                            *o = fp::add(*o, val, p);
                        }
                    }
                    None => {
                        target.insert(mi.clone(), z.clone());
                    }
                }
            }
        }
        normalize(&mut canon);
        self.rebuild(canon, num_vars)
    }

    /// The iterated difference operator of the linearization calculus:
    /// F^(1) = F and
    /// F^(k+1)(x_1,...,x_{k+1})
    ///   = F^(k)(...,x_k + x_{k+1}) - F^(k)(...,x_k) - F^(k)(...,x_{k+1}).
    ///
    /// For G homogeneous of degree s, `linearize(G, s)` is the symmetrized
    /// multilinear form (the sum over all permutations of the slots), and for
    /// t > deg G with G(0) = 0 the result is formally zero.
    pub fn linearize(&self, t: usize) -> Result<GenPoly> {
        if self.num_vars != 1 {
            return Err(Error::VarCountMismatch { left: self.num_vars, right: 1 });
        }
        if t < 1 {
            return Err(Error::BadParameter("linearization order must be >= 1".into()));
        }
        let mut f = self.with_num_vars(t.max(1))?;
        for k in 1..t {
            // f is F^(k) in variables 0..k; produce F^(k+1) in variables 0..=k.
            let merged = f.substitute_sum(k - 1, k - 1, k, t)?;
            let shifted = f.rename_var(k - 1, k, t)?;
            f = merged.sub(&f)?.sub(&shifted)?;
        }
        Ok(f)
    }

    /// Decide formal additivity: G(X+Y) = G(X) + G(Y) holds exactly when G is
    /// a sum of monomials a X b, i.e. deg G <= 1 and G(0) = 0. On success the
    /// canonical (a_i, b_i) pairs are returned; otherwise the obstruction.
    pub fn additive_form(&self) -> AdditiveForm {
        if let Degree::Finite(d) = self.degree() {
            if d >= 2 {
                return AdditiveForm::NotAdditive(AdditiveObstruction::HigherDegree(d));
            }
        }
        let constant = self.homogeneous_part(0);
        if !constant.is_zero_formal() {
            let value = constant.eval(&vec![self.algebra.zero(); self.num_vars]).expect("eval");
            return AdditiveForm::NotAdditive(AdditiveObstruction::NonzeroConstant(value));
        }
        let mut pairs = Vec::new();
        for m in &self.terms {
            debug_assert_eq!(m.vars.len(), 1);
            pairs.push((m.coeffs[0].clone(), m.coeffs[1].clone()));
        }
        AdditiveForm::Additive(pairs)
    }

    fn rebuild(&self, mut canon: Canon, num_vars: usize) -> Result<GenPoly> {
        normalize(&mut canon);
        let ctx = canon_ctx(&self.algebra)?;
        let terms = regenerate_terms(&self.algebra, &ctx, &canon);
        Ok(GenPoly { algebra: self.algebra.clone(), num_vars, terms, canon })
    }

    /// Canonical JSON dump.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|m| {
                serde_json::json!({
                    "coeffs": m.coeffs.iter().map(|c| c.coords().to_vec()).collect::<Vec<_>>(),
                    "vars": m.vars(),
                })
            })
            .collect();
        serde_json::json!({
            "algebra": serde_json::to_value(self.algebra.descriptor()).expect("descriptor"),
            "vars": self.num_vars,
            "terms": terms,
        })
    }
}

/// Outcome of the additivity test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdditiveForm {
    Additive(Vec<(Element, Element)>),
    NotAdditive(AdditiveObstruction),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdditiveObstruction {
    /// G(0) != 0; the value is reported.
    NonzeroConstant(Element),
    /// A homogeneous part of this degree >= 2 is present.
    HigherDegree(usize),
}

fn normalize(canon: &mut Canon) {
    for block in canon.values_mut() {
        block.retain(|_, z| z.iter().any(|&v| v != 0));
    }
    canon.retain(|_, block| !block.is_empty());
}

fn regenerate_terms(algebra: &FiniteAlgebra, ctx: &CanonCtx, canon: &Canon) -> Vec<GenMonomial> {
    let mut keyed: Vec<(usize, &Word, &MultiIdx, &Vec<u64>)> = Vec::new();
    for (w, block) in canon {
        for (mi, z) in block {
            keyed.push((w.len(), w, mi, z));
        }
    }
    keyed.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    keyed
        .into_iter()
        .map(|(_, w, mi, z)| {
            let mut coeffs = Vec::with_capacity(mi.len());
            // Fold the Z-coordinate into the first slot; later slots are
            // plain Z-basis vectors.
            coeffs.push(
                algebra.from_coords(ctx.lift(algebra, z, mi[0])).expect("lift coords"),
            );
            for &i in &mi[1..] {
                coeffs.push(
                    algebra
                        .from_coords(ctx.zbasis[i as usize].clone())
                        .expect("basis coords"),
                );
            }
            GenMonomial { coeffs, vars: w.clone() }
        })
        .collect()
}
