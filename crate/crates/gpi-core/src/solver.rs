//! Compiling functional identities into exact linear systems and analyzing
//! their solution spaces.
//!
//! An identity template is a finite sum of terms `L_t(x) * f_{s_t}(arg_t) *
//! R_t(x)` equated to a right-hand side, where the `L`, `R` and the rhs are
//! generalized polynomials in `x` and (over the unit domain) `x^{-1}`, the
//! `f_s` are unknown additive maps, and `arg_t` is either `x` or `x^{-1}`.
//! In characteristic p every additive map is F_p-linear, so fixing a domain
//! element turns each term into a linear function of the matrix entries of
//! the unknowns: the whole identity compiles to `|domain| * d` linear
//! equations over F_p in `num_unknowns * d^2` variables.
//!
//! `solve` row-reduces that system incrementally (memory stays proportional
//! to the number of unknowns, not the domain size) and returns the exact
//! solution space: a reduced-echelon basis of the homogeneous part plus a
//! particular solution when the right-hand side is nonzero. Every returned
//! tuple is re-verified against the original identity by direct evaluation
//! over the full domain; the linear-algebra route and the evaluation route
//! must agree.

use serde::Deserialize;

use crate::addmap::AdditiveMap;
use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::expr;
use crate::fp::{self, FpMat, RowReducer};
use crate::genpoly::GenPoly;
use crate::identity::{Mode, Verdict};
use crate::DEFAULT_BUDGET;

/// Which elements the identity quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// All invertible elements; `x^{-1}` is available.
    Units,
    /// Every element; `x^{-1}` is forbidden.
    All,
}

/// Which argument the unknown map receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgKind {
    /// f(x)
    Direct,
    /// f(x^{-1})
    Inverse,
}

/// One summand `L(x) * f_slot(arg) * R(x)`.
#[derive(Debug, Clone)]
pub struct TemplateTerm {
    pub left: GenPoly,
    pub slot: usize,
    pub arg: ArgKind,
    pub right: GenPoly,
}

/// A compiled-to-be functional identity
/// `sum_t L_t(x) f_{slot_t}(arg_t) R_t(x) = rhs(x)` over a domain.
///
/// The polynomials live in two formal variables: variable 0 is `x` and
/// variable 1 is `x^{-1}`.
#[derive(Debug, Clone)]
pub struct IdentityTemplate {
    algebra: FiniteAlgebra,
    num_unknowns: usize,
    domain: DomainKind,
    terms: Vec<TemplateTerm>,
    rhs: GenPoly,
}

#[derive(Deserialize)]
struct TemplateTermJson {
    #[serde(rename = "L")]
    left: String,
    slot: usize,
    arg: String,
    #[serde(rename = "R")]
    right: String,
}

#[derive(Deserialize)]
struct TemplateJson {
    unknowns: usize,
    domain: String,
    terms: Vec<TemplateTermJson>,
    rhs: String,
}

impl IdentityTemplate {
    pub fn new(
        algebra: &FiniteAlgebra,
        num_unknowns: usize,
        domain: DomainKind,
        terms: Vec<TemplateTerm>,
        rhs: GenPoly,
    ) -> Result<IdentityTemplate> {
        let t = IdentityTemplate {
            algebra: algebra.clone(),
            num_unknowns,
            domain,
            terms,
            rhs,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        for term in &self.terms {
            if term.slot >= self.num_unknowns {
                return Err(Error::BadParameter(format!(
                    "term references unknown slot {} of {}",
                    term.slot, self.num_unknowns
                )));
            }
            if term.left.algebra() != &self.algebra || term.right.algebra() != &self.algebra {
                return Err(Error::AlgebraMismatch);
            }
            if self.domain == DomainKind::All
                && (term.left.uses_var(1) || term.right.uses_var(1) || term.arg == ArgKind::Inverse)
            {
                return Err(Error::InverseOverFullDomain);
            }
        }
        if self.rhs.algebra() != &self.algebra {
            return Err(Error::AlgebraMismatch);
        }
        if self.domain == DomainKind::All && self.rhs.uses_var(1) {
            return Err(Error::InverseOverFullDomain);
        }
        Ok(())
    }

    /// The power identity `f(x) = x^n g(x^{-1})` over the units: two
    /// unknowns, f in slot 0 and g in slot 1.
    pub fn power_identity(algebra: &FiniteAlgebra, n: u64) -> Result<IdentityTemplate> {
        let one = GenPoly::constant(&algebra.one(), 2)?;
        let x = GenPoly::variable(algebra, 0, 2)?;
        let minus_xn = x.pow(n)?.neg();
        IdentityTemplate::new(
            algebra,
            2,
            DomainKind::Units,
            vec![
                TemplateTerm { left: one.clone(), slot: 0, arg: ArgKind::Direct, right: one.clone() },
                TemplateTerm { left: minus_xn, slot: 1, arg: ArgKind::Inverse, right: one },
            ],
            GenPoly::zero(algebra, 2),
        )
    }

    /// `G(x) f(x) = H(x)` over the whole algebra: one unknown. `g` and `h`
    /// are univariate polynomials in x.
    pub fn poly_map_identity(g: &GenPoly, h: &GenPoly) -> Result<IdentityTemplate> {
        let algebra = g.algebra().clone();
        let one = GenPoly::constant(&algebra.one(), 2)?;
        IdentityTemplate::new(
            &algebra,
            1,
            DomainKind::All,
            vec![TemplateTerm {
                left: g.with_num_vars(2)?,
                slot: 0,
                arg: ArgKind::Direct,
                right: one,
            }],
            h.with_num_vars(2)?,
        )
    }

    /// Parse the JSON template format:
    /// `{"unknowns": int, "domain": "units"|"all",
    ///   "terms": [{"L": expr, "slot": int, "arg": "x"|"xinv", "R": expr}],
    ///   "rhs": expr}`
    /// where expressions use the reserved variables `x` and `xinv`.
    pub fn from_json(text: &str, algebra: &FiniteAlgebra) -> Result<IdentityTemplate> {
        let parsed: TemplateJson = serde_json::from_str(text)
            .map_err(|e| Error::BadParameter(format!("invalid template JSON: {e}")))?;
        let domain = match parsed.domain.as_str() {
            "units" => DomainKind::Units,
            "all" => DomainKind::All,
            other => {
                return Err(Error::BadParameter(format!(
                    "domain must be \"units\" or \"all\", got {other:?}"
                )))
            }
        };
        let mut terms = Vec::new();
        for t in &parsed.terms {
            let arg = match t.arg.as_str() {
                "x" => ArgKind::Direct,
                "xinv" => ArgKind::Inverse,
                other => {
                    return Err(Error::BadParameter(format!(
                        "arg must be \"x\" or \"xinv\", got {other:?}"
                    )))
                }
            };
            terms.push(TemplateTerm {
                left: expr::parse_solver_expr(&t.left, algebra)?,
                slot: t.slot,
                arg,
                right: expr::parse_solver_expr(&t.right, algebra)?,
            });
        }
        let rhs = expr::parse_solver_expr(&parsed.rhs, algebra)?;
        IdentityTemplate::new(algebra, parsed.unknowns, domain, terms, rhs)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "unknowns": self.num_unknowns,
            "domain": match self.domain { DomainKind::Units => "units", DomainKind::All => "all" },
            "terms": self.terms.iter().map(|t| serde_json::json!({
                "L": expr::print_solver_expr(&t.left),
                "slot": t.slot,
                "arg": match t.arg { ArgKind::Direct => "x", ArgKind::Inverse => "xinv" },
                "R": expr::print_solver_expr(&t.right),
            })).collect::<Vec<_>>(),
            "rhs": expr::print_solver_expr(&self.rhs),
        })
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn num_unknowns(&self) -> usize {
        self.num_unknowns
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    fn domain_elements(&self, budget: u64) -> Result<Vec<Element>> {
        match self.domain {
            DomainKind::Units => self.algebra.enumerate_units_with_budget(budget),
            DomainKind::All => {
                let order = self.algebra.order();
                if order > budget as u128 {
                    return Err(Error::BudgetExceeded { needed: order, budget });
                }
                Ok((0..order as u64).map(|i| self.algebra.element_from_index(i)).collect())
            }
        }
    }

    /// Residual of the identity at `x` for concrete maps.
    fn residual(&self, maps: &[AdditiveMap], x: &Element, xinv: &Element) -> Result<Element> {
        let assignment = [x.clone(), xinv.clone()];
        let mut acc = self.algebra.zero();
        for term in &self.terms {
            let alpha = term.left.eval(&assignment)?;
            let beta = term.right.eval(&assignment)?;
            let arg = match term.arg {
                ArgKind::Direct => x,
                ArgKind::Inverse => xinv,
            };
            acc = &acc + &(&(&alpha * &maps[term.slot].apply(arg)) * &beta);
        }
        Ok(&acc - &self.rhs.eval(&assignment)?)
    }

    /// Direct evaluation check: do the given maps satisfy the identity on
    /// its full domain? This is the membership test for the solution set,
    /// independent of the linear-algebra route.
    pub fn satisfies(&self, maps: &[AdditiveMap], budget: u64) -> Result<Verdict> {
        if maps.len() != self.num_unknowns {
            return Err(Error::DimensionMismatch {
                expected: self.num_unknowns,
                found: maps.len(),
            });
        }
        for m in maps {
            if m.algebra() != &self.algebra {
                return Err(Error::AlgebraMismatch);
            }
        }
        let domain = self.domain_elements(budget)?;
        let mut witness = None;
        for x in &domain {
            let xinv = match self.domain {
                DomainKind::Units => x.inv().expect("unit"),
                DomainKind::All => self.algebra.zero(),
            };
            if !self.residual(maps, x, &xinv)?.is_zero() && witness.is_none() {
                witness = Some(vec![x.clone()]);
            }
        }
        Ok(Verdict {
            holds: witness.is_none(),
            witness,
            checked: domain.len() as u64,
            mode: Mode::Exhaustive,
        })
    }

    /// The homogeneous version (rhs = 0) of this template.
    fn homogenized(&self) -> IdentityTemplate {
        IdentityTemplate {
            algebra: self.algebra.clone(),
            num_unknowns: self.num_unknowns,
            domain: self.domain,
            terms: self.terms.clone(),
            rhs: GenPoly::zero(&self.algebra, 2),
        }
    }

    /// Rows of the compiled linear system for one domain element: d rows of
    /// width num_unknowns * d^2, plus the rhs coordinates.
    fn rows_for(&self, x: &Element) -> Result<(Vec<Vec<u64>>, Vec<u64>)> {
        let d = self.algebra.dim();
        let p = self.algebra.p();
        let cols = self.num_unknowns * d * d;
        let xinv = match self.domain {
            DomainKind::Units => x.inv().expect("unit"),
            DomainKind::All => self.algebra.zero(),
        };
        let assignment = [x.clone(), xinv.clone()];
        let mut rows = vec![vec![0u64; cols]; d];
        for term in &self.terms {
            let alpha = term.left.eval(&assignment)?;
            let beta = term.right.eval(&assignment)?;
            let t = self
                .algebra
                .left_mul_matrix(&alpha)
                .mat_mul(&self.algebra.right_mul_matrix(&beta));
            let argv = match term.arg {
                ArgKind::Direct => x.coords(),
                ArgKind::Inverse => xinv.coords(),
            };
            let base = term.slot * d * d;
            // coordinate i of alpha * M(arg) * beta = sum_{k,j} T[i][k] argv[j] M[k][j]
            for (i, row) in rows.iter_mut().enumerate() {
                for k in 0..d {
                    let tik = t.get(i, k);
                    if tik == 0 {
                        continue;
                    }
                    for (j, &aj) in argv.iter().enumerate() {
                        if aj == 0 {
                            continue;
                        }
                        let c = &mut row[base + k * d + j];
                        *c = fp::add(*c, fp::mul(tik, aj, p), p);
                    }
                }
            }
        }
        let rhs = self.rhs.eval(&assignment)?;
        Ok((rows, rhs.coords().to_vec()))
    }
}

/// A materialized compiled system, mostly for inspection and tests; `solve`
/// streams rows instead of building this.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: FpMat,
    pub rhs: Vec<u64>,
}

impl LinearSystem {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

/// Materialize the full linear system over F_p: one block of d rows per
/// domain element, in domain order. Entry (i, j) of the slot-s unknown
/// matrix occupies column `s * d^2 + i * d + j` of the stacked vector.
pub fn compile(template: &IdentityTemplate, budget: u64) -> Result<LinearSystem> {
    let algebra = template.algebra();
    let d = algebra.dim();
    let cols = template.num_unknowns() * d * d;
    let domain = template.domain_elements(budget)?;
    let total = (domain.len() * d) as u128 * (cols as u128 + 1);
    if total > 1 << 28 {
        return Err(Error::BudgetExceeded { needed: total, budget: 1 << 28 });
    }
    let mut rows = Vec::with_capacity(domain.len() * d);
    let mut rhs = Vec::with_capacity(domain.len() * d);
    for x in &domain {
        let (r, b) = template.rows_for(x)?;
        rows.extend(r);
        rhs.extend(b);
    }
    Ok(LinearSystem { matrix: FpMat::from_rows(algebra.p(), rows), rhs })
}

/// The exact solution set of a compiled identity: a particular solution
/// (when the identity is inhomogeneous) plus a reduced-echelon basis of the
/// homogeneous solutions.
#[derive(Debug, Clone)]
pub struct SolutionSpace {
    algebra: FiniteAlgebra,
    num_unknowns: usize,
    /// Present exactly when the right-hand side is nonzero and the system is
    /// consistent.
    pub particular: Option<Vec<AdditiveMap>>,
    pub basis: Vec<Vec<AdditiveMap>>,
    /// False when an inhomogeneous system has no solution at all.
    pub consistent: bool,
}

impl SolutionSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn num_unknowns(&self) -> usize {
        self.num_unknowns
    }

    fn stack(&self, maps: &[AdditiveMap]) -> Vec<u64> {
        let d = self.algebra.dim();
        let mut v = Vec::with_capacity(self.num_unknowns * d * d);
        for m in maps {
            for i in 0..d {
                for j in 0..d {
                    v.push(m.matrix().get(i, j));
                }
            }
        }
        v
    }

    /// Linear-algebra membership: reduce the stacked tuple (minus the
    /// particular solution, if any) against the basis.
    pub fn contains_linear(&self, maps: &[AdditiveMap]) -> bool {
        if maps.len() != self.num_unknowns || !self.consistent {
            return false;
        }
        let d = self.algebra.dim();
        let p = self.algebra.p();
        let cols = self.num_unknowns * d * d;
        let mut v = self.stack(maps);
        if let Some(part) = &self.particular {
            let pv = self.stack(part);
            for (a, b) in v.iter_mut().zip(&pv) {
                *a = fp::sub(*a, *b, p);
            }
        }
        let mut reducer = RowReducer::new(p, cols);
        for b in &self.basis {
            reducer.reduce(self.stack(b));
        }
        let before = reducer.rank();
        reducer.reduce(v);
        reducer.rank() == before
    }

    /// Enumerate every tuple in the space (p^dimension of them).
    pub fn enumerate(&self, budget: u64) -> Result<Vec<Vec<AdditiveMap>>> {
        let p = self.algebra.p();
        let count = (p as u128)
            .checked_pow(self.dimension() as u32)
            .ok_or(Error::BudgetExceeded { needed: u128::MAX, budget })?;
        if count > budget as u128 {
            return Err(Error::BudgetExceeded { needed: count, budget });
        }
        if !self.consistent {
            return Ok(Vec::new());
        }
        let mut out = Vec::with_capacity(count as usize);
        for mut idx in 0..count as u64 {
            let mut tuple = match &self.particular {
                Some(part) => part.clone(),
                None => vec![AdditiveMap::zero(&self.algebra); self.num_unknowns],
            };
            for b in &self.basis {
                let c = idx % p;
                idx /= p;
                if c != 0 {
                    for (slot, m) in tuple.iter_mut().enumerate() {
                        *m = m.add(&b[slot].scale(c))?;
                    }
                }
            }
            out.push(tuple);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dimension": self.dimension(),
            "consistent": self.consistent,
            "particular": self.particular.as_ref().map(|t| {
                t.iter().map(|m| m.rows()).collect::<Vec<_>>()
            }),
            "basis": self.basis.iter().map(|t| {
                t.iter().map(|m| m.rows()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }
}

/// Solve the compiled identity exactly. Rows are generated in domain order
/// and reduced incrementally; the result is deterministic for fixed input.
/// Every basis tuple (and the particular solution) is re-verified against
/// the identity by direct evaluation before being returned.
pub fn solve(template: &IdentityTemplate, budget: u64) -> Result<SolutionSpace> {
    let algebra = template.algebra().clone();
    let d = algebra.dim();
    let p = algebra.p();
    let cols = template.num_unknowns() * d * d;
    let domain = template.domain_elements(budget)?;

    let mut reducer = RowReducer::new(p, cols + 1);
    for x in &domain {
        let (rows, rhs) = template.rows_for(x)?;
        for (mut row, b) in rows.into_iter().zip(rhs) {
            row.push(b);
            reducer.reduce(row);
        }
    }

    let pivots = reducer.pivots().to_vec();
    let reduced = reducer.reduced_rows().to_vec();
    let consistent = !pivots.contains(&cols);

    let rhs_is_zero = template.rhs.is_zero_formal();
    let mut basis_vecs: Vec<Vec<u64>> = Vec::new();
    let mut particular_vec: Option<Vec<u64>> = None;
    if consistent {
        let pivot_of_col: std::collections::HashMap<usize, usize> =
            pivots.iter().enumerate().map(|(row, &c)| (c, row)).collect();
        for free in 0..cols {
            if pivot_of_col.contains_key(&free) {
                continue;
            }
            let mut v = vec![0u64; cols];
            v[free] = 1;
            for (&c, &row) in &pivot_of_col {
                v[c] = fp::neg(reduced[row][free], p);
            }
            basis_vecs.push(v);
        }
        // Present the basis in reduced echelon form of the stacked unknown
        // vector, so the space has one deterministic representation.
        let mut echelon = RowReducer::new(p, cols);
        for v in basis_vecs.drain(..) {
            echelon.reduce(v);
        }
        basis_vecs = echelon.reduced_rows().to_vec();
        if !rhs_is_zero {
            let mut v = vec![0u64; cols];
            for (&c, &row) in &pivot_of_col {
                v[c] = reduced[row][cols];
            }
            particular_vec = Some(v);
        }
    }

    let to_tuple = |v: &[u64]| -> Vec<AdditiveMap> {
        (0..template.num_unknowns())
            .map(|s| {
                let mut m = FpMat::zeros(p, d, d);
                for i in 0..d {
                    for j in 0..d {
                        m.set(i, j, v[s * d * d + i * d + j]);
                    }
                }
                AdditiveMap::from_matrix(&algebra, m).expect("dimensions match")
            })
            .collect()
    };

    let basis: Vec<Vec<AdditiveMap>> = basis_vecs.iter().map(|v| to_tuple(v)).collect();
    let particular = particular_vec.as_deref().map(to_tuple);

    // Soundness: the evaluation route must confirm the linear-algebra route.
    let homogeneous = template.homogenized();
    for tuple in &basis {
        let v = homogeneous.satisfies(tuple, budget)?;
        assert!(v.holds, "solver basis tuple fails re-verification");
    }
    if let Some(part) = &particular {
        let v = template.satisfies(part, budget)?;
        assert!(v.holds, "particular solution fails re-verification");
    }

    Ok(SolutionSpace {
        algebra,
        num_unknowns: template.num_unknowns(),
        particular,
        basis,
        consistent,
    })
}

/// Write an additive map as an elementary operator `x -> sum_t a_t x b_t`.
///
/// Solving the d^2 x d^2 system expressing the map in the span of
/// `{L_{e_i} R_{e_j}}` gives a coefficient matrix C; a rank-revealing
/// elimination (rank factorization C = U V) then yields `rank(C)` pairs,
/// the minimum for this particular C. On a central simple algebra the span
/// is all of End(A), so decomposition never fails there; when the solution
/// C is not unique the pair count is best-effort, not globally minimal.
pub fn elementary_decomposition(
    map: &AdditiveMap,
    max_terms: usize,
) -> Result<Vec<(Element, Element)>> {
    let algebra = map.algebra().clone();
    let d = algebra.dim();
    let p = algebra.p();
    let dd = d * d;
    // Columns: vec(L_{e_i} R_{e_j}) in (i, j) lexicographic order.
    let mut cols = FpMat::zeros(p, dd, dd);
    for i in 0..d {
        let li = algebra.left_mul_matrix(&algebra.basis_elem(i));
        for j in 0..d {
            let rj = algebra.right_mul_matrix(&algebra.basis_elem(j));
            let op = li.mat_mul(&rj);
            for r in 0..d {
                for c in 0..d {
                    cols.set(r * d + c, i * d + j, op.get(r, c));
                }
            }
        }
    }
    let mut target = Vec::with_capacity(dd);
    for r in 0..d {
        for c in 0..d {
            target.push(map.matrix().get(r, c));
        }
    }
    let coeffs = cols.solve(&target).ok_or_else(|| {
        Error::NotInSpan("the map is not a sum of two-sided multiplications".into())
    })?;

    // Rank factorization of the coefficient matrix C[i][j] = coeffs[i*d+j].
    let c_mat = FpMat::from_rows(
        p,
        (0..d).map(|i| coeffs[i * d..(i + 1) * d].to_vec()).collect(),
    );
    let mut rref = c_mat.clone();
    let pivots = rref.rref();
    let rank = pivots.len();
    if rank > max_terms {
        return Err(Error::NotInSpan(format!(
            "decomposition needs {rank} terms, max_terms is {max_terms}"
        )));
    }
    let mut pairs = Vec::with_capacity(rank);
    for (row, &pc) in pivots.iter().enumerate() {
        // a_t = sum_i C[i][pc] e_i, b_t = sum_j R[row][j] e_j.
        let a = algebra
            .from_coords((0..d).map(|i| c_mat.get(i, pc)).collect())
            .expect("len");
        let b = algebra.from_coords(rref.row(row).to_vec()).expect("len");
        pairs.push((a, b));
    }
    // The factorization is exact by construction; make that checkable.
    let recomposed = AdditiveMap::elementary(&algebra, &pairs)?;
    assert!(recomposed == *map, "rank factorization must recompose exactly");
    Ok(pairs)
}

/// Outcome of the scalar-scaling argument for `f(x) = x^n g(x^{-1})`:
/// substituting k x for x forces `k (k^{n-2} - 1) f(x) = 0`, so when some
/// scalar k makes that factor invertible, f vanishes on every unit. That
/// happens exactly when p - 1 does not divide n - 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalingOutcome {
    /// The witness scalar k and the nonzero value k (k^{n-2} - 1) mod p.
    ForcesZero { k: u64, value: u64 },
    /// p - 1 divides n - 2; scaling alone decides nothing.
    Inconclusive,
}

pub fn scaling_filter(p: u64, n: i64) -> Result<ScalingOutcome> {
    fp::ensure_prime(p)?;
    if p == 2 {
        // p - 1 = 1 divides everything.
        return Ok(ScalingOutcome::Inconclusive);
    }
    let modulus = (p - 1) as i64;
    let e = (((n - 2) % modulus) + modulus) % modulus;
    if e == 0 {
        return Ok(ScalingOutcome::Inconclusive);
    }
    let value_for = |k: u64| -> u64 {
        let ke = fp::pow(k, e as u64, p);
        fp::mul(k, fp::sub(ke, 1, p), p)
    };
    // k = 2 when it works, else the least primitive root, whose order
    // guarantees k^e != 1.
    let k = if value_for(2) != 0 { 2 } else { fp::least_primitive_root(p) };
    let value = value_for(k);
    debug_assert_ne!(value, 0);
    Ok(ScalingOutcome::ForcesZero { k, value })
}

/// Does the additive closure of the units reach the whole algebra? In
/// characteristic p the subgroup generated by the units is an F_p-subspace,
/// so this is a rank computation over the unit coordinate vectors.
pub fn units_additively_generate(algebra: &FiniteAlgebra, budget: u64) -> Result<bool> {
    let units = algebra.enumerate_units_with_budget(budget)?;
    let mut reducer = RowReducer::new(algebra.p(), algebra.dim());
    for u in &units {
        reducer.reduce(u.coords().to_vec());
        if reducer.rank() == algebra.dim() {
            return Ok(true);
        }
    }
    Ok(reducer.rank() == algebra.dim())
}

/// Dimension of the F_p-span of the units; the closure itself has p^rank
/// elements.
pub fn unit_span_rank(algebra: &FiniteAlgebra, budget: u64) -> Result<usize> {
    let units = algebra.enumerate_units_with_budget(budget)?;
    let mut reducer = RowReducer::new(algebra.p(), algebra.dim());
    for u in &units {
        reducer.reduce(u.coords().to_vec());
    }
    Ok(reducer.rank())
}

/// Convenience: solve with the default budget.
pub fn solve_default(template: &IdentityTemplate) -> Result<SolutionSpace> {
    solve(template, DEFAULT_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraDescriptor;

    fn gf(p: u64) -> FiniteAlgebra {
        FiniteAlgebra::galois_field(p, 1, None).unwrap()
    }

    fn gf9() -> FiniteAlgebra {
        FiniteAlgebra::galois_field(3, 2, None).unwrap()
    }

    fn m2f3() -> FiniteAlgebra {
        FiniteAlgebra::matrix_algebra(2, 3, 1, None).unwrap()
    }

    #[test]
    fn compile_dimensions() {
        // GF(5), n = 6: 4 units, d = 1 -> 4 rows, 2 unknowns.
        let t = IdentityTemplate::power_identity(&gf(5), 6).unwrap();
        let sys = compile(&t, DEFAULT_BUDGET).unwrap();
        assert_eq!(sys.rows(), 4);
        assert_eq!(sys.cols(), 2);

        // M_2(F_5), n = 2: 480 units -> 1920 rows, 32 unknowns.
        let m2f5 = FiniteAlgebra::matrix_algebra(2, 5, 1, None).unwrap();
        let t = IdentityTemplate::power_identity(&m2f5, 2).unwrap();
        let sys = compile(&t, DEFAULT_BUDGET).unwrap();
        assert_eq!(sys.rows(), 1920);
        assert_eq!(sys.cols(), 32);

        // G(x) f(x) = H(x) on GF(9): 9 elements -> 18 rows, 4 unknowns.
        let a = gf9();
        let x = crate::expr::parse_expr("X", &a, 1).unwrap();
        let x2 = crate::expr::parse_expr("X^2", &a, 1).unwrap();
        let t = IdentityTemplate::poly_map_identity(&x, &x2).unwrap();
        let sys = compile(&t, DEFAULT_BUDGET).unwrap();
        assert_eq!(sys.rows(), 18);
        assert_eq!(sys.cols(), 4);
    }

    #[test]
    fn inverse_over_full_domain_rejected() {
        let a = gf9();
        let xinv = crate::expr::parse_solver_expr("xinv", &a).unwrap();
        let one = GenPoly::constant(&a.one(), 2).unwrap();
        let err = IdentityTemplate::new(
            &a,
            1,
            DomainKind::All,
            vec![TemplateTerm { left: xinv, slot: 0, arg: ArgKind::Direct, right: one }],
            GenPoly::zero(&a, 2),
        )
        .unwrap_err();
        assert_eq!(err, Error::InverseOverFullDomain);
    }

    #[test]
    fn power_identity_solutions_on_small_fields() {
        // GF(5), n = 6: solutions are exactly f = g (dimension 1).
        let a = gf(5);
        let t = IdentityTemplate::power_identity(&a, 6).unwrap();
        let s = solve_default(&t).unwrap();
        assert_eq!(s.dimension(), 1);
        let id = AdditiveMap::identity(&a);
        assert!(s.contains_linear(&[id.clone(), id.clone()]));
        assert!(t.satisfies(&[id.clone(), id], DEFAULT_BUDGET).unwrap().holds);

        // The zero tuple is always a solution of the homogeneous identity.
        let zero = AdditiveMap::zero(&a);
        assert!(s.contains_linear(&[zero.clone(), zero]));
    }

    #[test]
    fn power_identity_frobenius_solution_on_gf9() {
        let a = gf9();
        let t = IdentityTemplate::power_identity(&a, 12).unwrap();
        let s = solve_default(&t).unwrap();
        let id = AdditiveMap::identity(&a);
        let frob = AdditiveMap::frobenius(&a, 1).unwrap();
        assert!(s.contains_linear(&[id.clone(), frob.clone()]));
        assert!(t.satisfies(&[id, frob], DEFAULT_BUDGET).unwrap().holds);
    }

    #[test]
    fn forced_zero_dimension_on_m2f3() {
        let a = m2f3();
        let t = IdentityTemplate::power_identity(&a, 3).unwrap();
        let s = solve_default(&t).unwrap();
        assert_eq!(s.dimension(), 0, "only the zero pair satisfies n = 3 on M_2(F_3)");
    }

    #[test]
    fn solver_agrees_with_brute_force_enumeration() {
        // GF(3), n = 4: enumerate all 9 pairs of 1x1 maps directly.
        let a = gf(3);
        let t = IdentityTemplate::power_identity(&a, 4).unwrap();
        let s = solve_default(&t).unwrap();
        let solver_set: std::collections::BTreeSet<Vec<Vec<Vec<u64>>>> = s
            .enumerate(DEFAULT_BUDGET)
            .unwrap()
            .into_iter()
            .map(|tuple| tuple.iter().map(|m| m.rows()).collect())
            .collect();
        let mut brute = std::collections::BTreeSet::new();
        for fc in 0..3u64 {
            for gc in 0..3u64 {
                let f = AdditiveMap::from_rows(&a, vec![vec![fc]]).unwrap();
                let g = AdditiveMap::from_rows(&a, vec![vec![gc]]).unwrap();
                if t.satisfies(&[f.clone(), g.clone()], DEFAULT_BUDGET).unwrap().holds {
                    brute.insert(vec![f.rows(), g.rows()]);
                }
            }
        }
        assert_eq!(solver_set, brute);
        assert_eq!(solver_set.len(), 3, "f = g over GF(3)");
    }

    #[test]
    fn solver_agrees_with_brute_force_on_gf2() {
        // Over GF(2) the only unit is 1, so for every n the constraint is
        // just f(1) = g(1); all four map pairs are checked directly.
        let a = gf(2);
        for n in [1u64, 3, 4] {
            let t = IdentityTemplate::power_identity(&a, n).unwrap();
            let s = solve_default(&t).unwrap();
            let solver_set: std::collections::BTreeSet<Vec<Vec<Vec<u64>>>> = s
                .enumerate(DEFAULT_BUDGET)
                .unwrap()
                .into_iter()
                .map(|tuple| tuple.iter().map(|m| m.rows()).collect())
                .collect();
            let mut brute = std::collections::BTreeSet::new();
            for fc in 0..2u64 {
                for gc in 0..2u64 {
                    let f = AdditiveMap::from_rows(&a, vec![vec![fc]]).unwrap();
                    let g = AdditiveMap::from_rows(&a, vec![vec![gc]]).unwrap();
                    if t.satisfies(&[f.clone(), g.clone()], DEFAULT_BUDGET).unwrap().holds {
                        brute.insert(vec![f.rows(), g.rows()]);
                    }
                }
            }
            assert_eq!(solver_set, brute, "n = {n}");
            assert_eq!(solver_set.len(), 2, "f = g over GF(2), n = {n}");
        }
    }

    #[test]
    fn affine_identity_with_nonzero_rhs() {
        // f(x) = x^2 on GF(3) has no additive solution: x -> cx would need
        // c = 1 at x = 1 and c = 2 at x = 2.
        let a = gf(3);
        let one_poly = GenPoly::constant(&a.one(), 1).unwrap();
        let x2 = crate::expr::parse_expr("X^2", &a, 1).unwrap();
        let t = IdentityTemplate::poly_map_identity(&one_poly, &x2).unwrap();
        let s = solve_default(&t).unwrap();
        assert!(!s.consistent);
        assert!(s.particular.is_none());
        assert!(s.enumerate(DEFAULT_BUDGET).unwrap().is_empty());

        // f(x) * 1 = x on GF(3) is consistent: f = id exactly.
        let x = crate::expr::parse_expr("X", &a, 1).unwrap();
        let t = IdentityTemplate::poly_map_identity(&one_poly, &x).unwrap();
        let s = solve_default(&t).unwrap();
        assert!(s.consistent);
        assert_eq!(s.dimension(), 0);
        let part = s.particular.as_ref().unwrap();
        assert_eq!(part[0], AdditiveMap::identity(&a));
    }

    #[test]
    fn multi_term_identity_with_distinct_degrees() {
        // f1(x) + x f2(x) = x + x^2 over all of GF(9): contains (id, id),
        // and the solver's affine structure re-verifies.
        let a = gf9();
        let one = GenPoly::constant(&a.one(), 2).unwrap();
        let x = GenPoly::variable(&a, 0, 2).unwrap();
        let rhs = x.add(&x.mul(&x).unwrap()).unwrap();
        let t = IdentityTemplate::new(
            &a,
            2,
            DomainKind::All,
            vec![
                TemplateTerm { left: one.clone(), slot: 0, arg: ArgKind::Direct, right: one.clone() },
                TemplateTerm { left: x, slot: 1, arg: ArgKind::Direct, right: one },
            ],
            rhs,
        )
        .unwrap();
        let s = solve_default(&t).unwrap();
        assert!(s.consistent);
        let id = AdditiveMap::identity(&a);
        assert!(t.satisfies(&[id.clone(), id.clone()], DEFAULT_BUDGET).unwrap().holds);
        assert!(s.contains_linear(&[id.clone(), id]));
        // Every enumerated solution satisfies the identity by evaluation.
        for tuple in s.enumerate(DEFAULT_BUDGET).unwrap() {
            assert!(t.satisfies(&tuple, DEFAULT_BUDGET).unwrap().holds);
        }
    }

    #[test]
    fn derivation_shaped_identity_solves_and_reverifies() {
        // f(x) x^{-1} + x g(x^{-1}) = 0 over the units of GF(9).
        let a = gf9();
        let one = GenPoly::constant(&a.one(), 2).unwrap();
        let x = GenPoly::variable(&a, 0, 2).unwrap();
        let xinv = GenPoly::variable(&a, 1, 2).unwrap();
        let t = IdentityTemplate::new(
            &a,
            2,
            DomainKind::Units,
            vec![
                TemplateTerm { left: one.clone(), slot: 0, arg: ArgKind::Direct, right: xinv },
                TemplateTerm { left: x, slot: 1, arg: ArgKind::Inverse, right: one },
            ],
            GenPoly::zero(&a, 2),
        )
        .unwrap();
        let s = solve_default(&t).unwrap();
        // Re-verification happens inside solve; spot-check a family:
        // f(x) = xq, g(x) = -qx satisfies f(x)x^{-1} + xg(x^{-1}) = q - q = 0.
        for qidx in 0..9 {
            let q = a.element_from_index(qidx);
            let f = AdditiveMap::right_mul(&q);
            let g = AdditiveMap::left_mul(&q).neg();
            assert!(t.satisfies(&[f.clone(), g.clone()], DEFAULT_BUDGET).unwrap().holds);
            assert!(s.contains_linear(&[f, g]));
        }
    }

    #[test]
    fn membership_routes_agree() {
        let a = gf9();
        let t = IdentityTemplate::power_identity(&a, 12).unwrap();
        let s = solve_default(&t).unwrap();
        let mut rng = crate::rng::SplitMix64::new(42);
        for _ in 0..40 {
            let rand_map = |rng: &mut crate::rng::SplitMix64| {
                let rows: Vec<Vec<u64>> = (0..a.dim())
                    .map(|_| (0..a.dim()).map(|_| rng.below(a.p())).collect())
                    .collect();
                AdditiveMap::from_rows(&a, rows).unwrap()
            };
            let f = rand_map(&mut rng);
            let g = rand_map(&mut rng);
            let by_eval = t.satisfies(&[f.clone(), g.clone()], DEFAULT_BUDGET).unwrap().holds;
            let by_linear = s.contains_linear(&[f, g]);
            assert_eq!(by_eval, by_linear);
        }
    }

    #[test]
    fn template_json_round_trip() {
        let a = gf(5);
        let text = r#"{
            "unknowns": 2,
            "domain": "units",
            "terms": [
                {"L": "1", "slot": 0, "arg": "x", "R": "1"},
                {"L": "-x^6", "slot": 1, "arg": "xinv", "R": "1"}
            ],
            "rhs": "0"
        }"#;
        let t = IdentityTemplate::from_json(text, &a).unwrap();
        let builtin = IdentityTemplate::power_identity(&a, 6).unwrap();
        // Same solution space either way.
        let s1 = solve_default(&t).unwrap();
        let s2 = solve_default(&builtin).unwrap();
        assert_eq!(s1.to_json(), s2.to_json());
        // And the JSON round-trips through the printer.
        let again =
            IdentityTemplate::from_json(&t.to_json().to_string(), &a).unwrap();
        assert_eq!(solve_default(&again).unwrap().to_json(), s1.to_json());
    }

    #[test]
    fn solve_is_deterministic() {
        let a = m2f3();
        let t = IdentityTemplate::power_identity(&a, 2).unwrap();
        let s1 = solve_default(&t).unwrap();
        let s2 = solve_default(&t).unwrap();
        assert_eq!(s1.to_json().to_string(), s2.to_json().to_string());
    }

    #[test]
    fn decomposition_examples() {
        let a = m2f3();
        // Identity map: the single pair (1, 1).
        let id = AdditiveMap::identity(&a);
        let pairs = elementary_decomposition(&id, 16).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0], (a.one(), a.one()));

        // x -> e11 x e22: the single pair (e11, e22).
        let e11 = a.basis_elem(0);
        let e22 = a.basis_elem(3);
        let t = AdditiveMap::elementary(&a, &[(e11.clone(), e22.clone())]).unwrap();
        let pairs = elementary_decomposition(&t, 16).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0], (e11, e22));

        // Transpose: recomposes exactly.
        let tr = AdditiveMap::transpose(&a).unwrap();
        let pairs = elementary_decomposition(&tr, 16).unwrap();
        let recomposed = AdditiveMap::elementary(&a, &pairs).unwrap();
        assert_eq!(recomposed, tr);
        assert!(pairs.len() <= 4);

        // max_terms is honored.
        assert!(matches!(
            elementary_decomposition(&tr, pairs.len() - 1),
            Err(Error::NotInSpan(_))
        ));
    }

    #[test]
    fn decomposition_can_fail_off_the_span() {
        // On F_2 x F_2 the span of L_u R_v misses some maps: multiplications
        // preserve the two components, so the swap map is out of reach.
        let a = FiniteAlgebra::build(AlgebraDescriptor {
            p: 2,
            dim: 2,
            basis: vec!["u".into(), "v".into()],
            mul_table: vec![
                vec![vec![1, 0], vec![0, 0]],
                vec![vec![0, 0], vec![0, 1]],
            ],
            one: vec![1, 1],
        })
        .unwrap();
        let swap = AdditiveMap::from_rows(&a, vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert!(matches!(
            elementary_decomposition(&swap, 16),
            Err(Error::NotInSpan(_))
        ));
    }

    #[test]
    fn scaling_filter_examples() {
        assert_eq!(
            scaling_filter(5, 3).unwrap(),
            ScalingOutcome::ForcesZero { k: 2, value: 2 },
            "2 * (2^1 - 1) = 2"
        );
        assert_eq!(scaling_filter(5, 6).unwrap(), ScalingOutcome::Inconclusive, "4 | 4");
        assert_eq!(scaling_filter(3, 4).unwrap(), ScalingOutcome::Inconclusive, "2 | 2");
        assert_eq!(scaling_filter(2, 5).unwrap(), ScalingOutcome::Inconclusive);
        // When 2 has small order the primitive root steps in: p = 7, n = 5:
        // e = 3, 2^3 = 1 mod 7, so k = 3 and 3 * (3^3 - 1) = 15 = 1 mod 7.
        assert_eq!(scaling_filter(7, 5).unwrap(), ScalingOutcome::ForcesZero { k: 3, value: 1 });
        // Negative n works through the residue of n - 2 mod p - 1.
        assert!(matches!(scaling_filter(5, -1).unwrap(), ScalingOutcome::ForcesZero { .. }));
    }

    #[test]
    fn unit_generation() {
        assert!(units_additively_generate(&m2f3(), DEFAULT_BUDGET).unwrap());
        assert!(units_additively_generate(&gf9(), DEFAULT_BUDGET).unwrap());
        let f2xf2 = FiniteAlgebra::build(AlgebraDescriptor {
            p: 2,
            dim: 2,
            basis: vec!["u".into(), "v".into()],
            mul_table: vec![
                vec![vec![1, 0], vec![0, 0]],
                vec![vec![0, 0], vec![0, 1]],
            ],
            one: vec![1, 1],
        })
        .unwrap();
        assert!(!units_additively_generate(&f2xf2, DEFAULT_BUDGET).unwrap());
        // Units = {(1,1)}: the closure is {0, (1,1)}, an F_2-line.
        assert_eq!(unit_span_rank(&f2xf2, DEFAULT_BUDGET).unwrap(), 1);
    }

    #[test]
    fn scaling_consistency_with_solver() {
        // Whenever the scaling argument forces zero and the units generate
        // additively, the solution space is trivial.
        let cases: Vec<(FiniteAlgebra, i64)> =
            vec![(gf(7), 4), (m2f3(), 3), (gf(5), 3)];
        for (a, n) in cases {
            assert!(matches!(
                scaling_filter(a.p(), n).unwrap(),
                ScalingOutcome::ForcesZero { .. }
            ));
            assert!(units_additively_generate(&a, DEFAULT_BUDGET).unwrap());
            let t = IdentityTemplate::power_identity(&a, n as u64).unwrap();
            let s = solve_default(&t).unwrap();
            assert_eq!(s.dimension(), 0, "p = {}, n = {n}", a.p());
        }
    }

    #[test]
    fn field_solutions_satisfy_the_shift_identity() {
        // Every solution (f, g) over a field satisfies
        // f(b) = (-(1-b)^n + b^n + 1) f(1) - g(b) for all b.
        for (a, n) in [(gf(5), 6u64), (gf9(), 12), (gf(3), 4)] {
            let t = IdentityTemplate::power_identity(&a, n).unwrap();
            let s = solve_default(&t).unwrap();
            for tuple in s.enumerate(DEFAULT_BUDGET).unwrap() {
                let (f, g) = (&tuple[0], &tuple[1]);
                let f1 = f.apply(&a.one());
                for idx in 0..a.order() as u64 {
                    let b = a.element_from_index(idx);
                    let one_minus_b = &a.one() - &b;
                    let coeff = &(&b.pow(n) - &one_minus_b.pow(n)) + &a.one();
                    let expect = &(&coeff * &f1) - &g.apply(&b);
                    assert_eq!(f.apply(&b), expect);
                }
            }
        }
    }
}
