//! Binomial arithmetic mod p and the classification of power-identity
//! exponents.
//!
//! The solver's vanishing arguments for `f(x) = x^n g(x^{-1})` hinge on a
//! residual condition: p > 2, n > 2, and p-1 dividing n-2. Exponents that
//! satisfy it split into two families,
//!
//! * case I: n = p^l * k with gcd(p, k) = 1, k > 1, and k - 1 not a power
//!   of p, and
//! * case II: n = p^(l+m) + p^l with (l, m) != (0, 0),
//!
//! and exactly one applies. Case I feeds a binomial non-divisibility
//! argument computed here via Lucas' theorem; case II feeds the additivity
//! defect of a sum of two Frobenius powers, constructed here as a
//! generalized polynomial.

use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::fp;
use crate::fppoly::FpPoly;
use crate::genpoly::GenPoly;

use serde::Serialize;

/// C(a, b) mod p for single base-p digits a, b < p.
fn digit_binom(a: u64, b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..b {
        num = fp::mul(num, a - i, p);
        den = fp::mul(den, i + 1, p);
    }
    fp::mul(num, fp::inv(den.max(1), p), p)
}

/// C(k, t) mod p by Lucas' theorem: the product of digitwise binomials in
/// base p.
pub fn binom_mod_p(k: u64, t: u64, p: u64) -> Result<u64> {
    fp::ensure_prime(p)?;
    let mut k = k;
    let mut t = t;
    let mut acc = 1u64;
    while k > 0 || t > 0 {
        let (dk, dt) = (k % p, t % p);
        acc = fp::mul(acc, digit_binom(dk, dt, p), p);
        if acc == 0 {
            return Ok(0);
        }
        k /= p;
        t /= p;
    }
    Ok(acc)
}

/// Largest m with p^m dividing n, for n > 0.
pub fn p_adic_valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n > 0);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Is n a non-negative power of p (1 = p^0 counts)? Returns the exponent.
pub fn as_p_power(n: u64, p: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut n = n;
    let mut e = 0;
    while n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    if n == 1 {
        Some(e)
    } else {
        None
    }
}

/// The non-divisibility data behind case I: for k > 1 coprime to p with
/// k - 1 not a power of p, let m be the largest integer with p^m | k - 1;
/// then p does not divide C(k, p^m + 1). Returns (m, C(k, p^m+1) mod p) and
/// asserts the residue is nonzero, which is a proved fact under the
/// hypotheses.
pub fn binomial_criterion(k: u64, p: u64) -> Result<(u32, u64)> {
    fp::ensure_prime(p)?;
    if p == 2 {
        return Err(Error::Hypothesis("p must be an odd prime".into()));
    }
    if k <= 1 {
        return Err(Error::Hypothesis(format!("k must exceed 1, got {k}")));
    }
    if k.is_multiple_of(p) {
        return Err(Error::Hypothesis(format!("gcd(p, k) must be 1: {p} divides {k}")));
    }
    if let Some(e) = as_p_power(k - 1, p) {
        return Err(Error::Hypothesis(format!(
            "k-1 must not be a power of p: {} = {p}^{e} (note that 1 = p^0)",
            k - 1
        )));
    }
    let m = p_adic_valuation(k - 1, p);
    let idx = p
        .checked_pow(m)
        .and_then(|q| q.checked_add(1))
        .ok_or_else(|| Error::BadParameter("p^m + 1 overflows".into()))?;
    let residue = binom_mod_p(k, idx, p)?;
    assert!(residue != 0, "C({k}, {p}^{m}+1) mod {p} is provably nonzero");
    Ok((m, residue))
}

/// The even-part defect polynomial
/// `P(X) = (1 + X)^n + (1 - X)^n - 2 X^n - 2` over F_p, as a dense
/// coefficient list. For case-I exponents it equals
/// `2 * sum_{t even, 2 <= t <= k-2} C(k, t) X^(p^l t)` and is nonzero.
pub fn power_defect_poly(n: u64, p: u64) -> Result<FpPoly> {
    fp::ensure_prime(p)?;
    let len = usize::try_from(n + 1)
        .map_err(|_| Error::BadParameter("exponent too large".into()))?;
    let mut coeffs = vec![0u64; len];
    for (j, c) in coeffs.iter_mut().enumerate() {
        // (1+X)^n contributes C(n,j); (1-X)^n contributes (-1)^j C(n,j); the
        // odd coefficients cancel.
        let b = binom_mod_p(n, j as u64, p)?;
        *c = if j % 2 == 0 { fp::mul(2, b, p) } else { 0 };
    }
    let jn = n as usize;
    coeffs[jn] = fp::sub(coeffs[jn], 2, p);
    coeffs[0] = fp::sub(coeffs[0], 2, p);
    Ok(FpPoly::new(p, coeffs))
}

/// Exponent classification under the residual condition
/// p > 2, n > 2, (p-1) | (n-2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseParams {
    pub n: u64,
    pub p: u64,
    /// The p-adic valuation of n.
    pub l: u32,
    pub case: ExponentCase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ExponentCase {
    /// n = p^l * k with k > 1 coprime to p and k - 1 not a power of p.
    I { k: u64 },
    /// n = p^(l+m) + p^l.
    II { m: u32 },
}

impl CaseParams {
    /// Rebuild n from the parameters; an internal consistency invariant.
    pub fn reconstruct(&self) -> u64 {
        match self.case {
            ExponentCase::I { k } => self.p.pow(self.l) * k,
            ExponentCase::II { m } => self.p.pow(self.l + m) + self.p.pow(self.l),
        }
    }
}

/// Check the residual condition and sort n into case I or case II.
pub fn classify_exponent(n: u64, p: u64) -> Result<CaseParams> {
    fp::ensure_prime(p)?;
    if p <= 2 {
        return Err(Error::Hypothesis(format!("p must exceed 2, got {p}")));
    }
    if n <= 2 {
        return Err(Error::Hypothesis(format!("n must exceed 2, got {n}")));
    }
    if !(n - 2).is_multiple_of(p - 1) {
        return Err(Error::Hypothesis(format!(
            "p-1 = {} must divide n-2 = {}",
            p - 1,
            n - 2
        )));
    }
    let l = p_adic_valuation(n, p);
    let k = n / p.pow(l);
    debug_assert!(k > 1, "n = p^l is impossible under the residual condition");
    match as_p_power(k - 1, p) {
        Some(m) => Ok(CaseParams { n, p, l, case: ExponentCase::II { m } }),
        None => Ok(CaseParams { n, p, l, case: ExponentCase::I { k } }),
    }
}

/// Largest Frobenius exponent the two-variable defect polynomial will
/// expand; (X+Y)^e has 2^e monomials, so this is a hard desk-scale cap.
pub const MAX_FROBENIUS_EXPONENT: u64 = 16;

/// The additivity defect of x -> x^(p^l) + x^(p^(l+m)) as a two-variable
/// generalized polynomial over `target`:
///
/// Q(X, Y) = ((X+Y)^(p^l) + (X+Y)^(p^(l+m)))
///           - (X^(p^l) + X^(p^(l+m))) - (Y^(p^l) + Y^(p^(l+m))).
///
/// All coefficients are +-1; the degree is p^(l+m) whenever (l, m) != (0, 0).
/// When l = 0 the linear Y term survives the cancellation, so evaluations
/// such as Q(e11, e12) come out as e12 rather than 2 e12; both are nonzero,
/// which is all the vanishing argument needs.
pub fn frobenius_sum_defect(
    p: u64,
    l: u32,
    m: u32,
    target: &FiniteAlgebra,
) -> Result<GenPoly> {
    fp::ensure_prime(p)?;
    if target.p() != p {
        return Err(Error::CharMismatch { expected: p, found: target.p() });
    }
    let e1 = p
        .checked_pow(l)
        .ok_or_else(|| Error::BadParameter("p^l overflows".into()))?;
    let e2 = p
        .checked_pow(l + m)
        .ok_or_else(|| Error::BadParameter("p^(l+m) overflows".into()))?;
    if e2 > MAX_FROBENIUS_EXPONENT {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << e2.min(127),
            budget: 1 << MAX_FROBENIUS_EXPONENT,
        });
    }
    let x = GenPoly::variable(target, 0, 2)?;
    let y = GenPoly::variable(target, 1, 2)?;
    let s = x.add(&y)?;
    let lhs = s.pow(e1)?.add(&s.pow(e2)?)?;
    let xpart = x.pow(e1)?.add(&x.pow(e2)?)?;
    let ypart = y.pow(e1)?.add(&y.pow(e2)?)?;
    lhs.sub(&xpart)?.sub(&ypart)
}

/// Scan GF(p^r) (default modulus) in lexicographic coordinate order for the
/// first element where the defect polynomial P does not vanish. `None` means
/// P vanishes on the whole field.
pub fn find_defect_nonroot(n: u64, p: u64, r: usize) -> Result<Option<Element>> {
    let poly = power_defect_poly(n, p)?;
    let field = FiniteAlgebra::galois_field(p, r, None)?;
    Ok(eval_scan(&poly, &field))
}

fn eval_scan(poly: &FpPoly, field: &FiniteAlgebra) -> Option<Element> {
    let order = field.order() as u64;
    for idx in 0..order {
        let x = field.element_from_index(idx);
        if !eval_fp_poly(poly, &x).is_zero() {
            return Some(x);
        }
    }
    None
}

/// Evaluate a prime-field polynomial at an algebra element (coefficients act
/// as scalars).
pub fn eval_fp_poly(poly: &FpPoly, x: &Element) -> Element {
    let a = x.algebra();
    let mut acc = a.zero();
    for &c in poly.coeffs().iter().rev() {
        acc = &(&acc * x) + &a.scalar(c);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    /// Exact factorial-based binomial oracle.
    fn binom_exact(k: u64, t: u64) -> BigUint {
        if t > k {
            return BigUint::from(0u32);
        }
        let mut num = BigUint::from(1u32);
        let mut den = BigUint::from(1u32);
        for i in 0..t {
            num *= BigUint::from(k - i);
            den *= BigUint::from(i + 1);
        }
        num / den
    }

    fn binom_exact_mod(k: u64, t: u64, p: u64) -> u64 {
        use num_bigint::BigUint;
        let m = binom_exact(k, t) % BigUint::from(p);
        m.to_u64_digits().first().copied().unwrap_or(0)
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(binom_mod_p(14, 2, 3).unwrap(), 1, "C(14,2) = 91 = 3*30 + 1");
        assert_eq!(binom_mod_p(7, 4, 3).unwrap(), 2, "C(7,4) = 35 = 33 + 2");
        for k in [0u64, 1, 5, 100] {
            assert_eq!(binom_mod_p(k, 0, 7).unwrap(), 1);
        }
        assert!(matches!(binom_mod_p(5, 2, 6), Err(Error::NotPrime(6))));
    }

    #[test]
    fn lucas_matches_factorial_oracle() {
        for p in [3u64, 5, 7] {
            for k in 0..=100u64 {
                for t in 0..=k {
                    assert_eq!(
                        binom_mod_p(k, t, p).unwrap(),
                        binom_exact_mod(k, t, p),
                        "C({k},{t}) mod {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn criterion_examples() {
        // k = 7, p = 3: 3 | 6, 9 does not divide 6, C(7,4) = 35 = 2 mod 3.
        assert_eq!(binomial_criterion(7, 3).unwrap(), (1, 2));
        // k = 14, p = 3: 3 does not divide 13, C(14,2) = 91 = 1 mod 3.
        assert_eq!(binomial_criterion(14, 3).unwrap(), (0, 1));
        // k = 2, p = 3: k - 1 = 1 = 3^0 violates the hypothesis.
        let err = binomial_criterion(2, 3).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(ref m) if m.contains("power of p")), "{err}");
        // Other violations are named too.
        assert!(binomial_criterion(6, 3).is_err(), "gcd(3, 6) != 1");
        assert!(binomial_criterion(1, 3).is_err(), "k must exceed 1");
    }

    #[test]
    fn criterion_sweep_is_nonzero_and_lucas_agrees() {
        for p in [3u64, 5, 7, 11] {
            for k in 2..=300u64 {
                if k % p == 0 || as_p_power(k - 1, p).is_some() {
                    continue;
                }
                let (m, residue) = binomial_criterion(k, p).unwrap();
                assert_ne!(residue, 0, "k={k}, p={p}");
                let idx = p.pow(m) + 1;
                assert_eq!(residue, binom_exact_mod(k, idx, p), "oracle k={k}, p={p}");
            }
        }
    }

    #[test]
    fn defect_poly_values() {
        // n = 14, p = 3: coefficient of X^2 is 2*C(14,2) = 182 = 2 mod 3.
        let p14 = power_defect_poly(14, 3).unwrap();
        assert!(!p14.is_zero());
        assert_eq!(p14.coeff(2), 2);
        // n = 6, p = 5: 2*C(6,2) = 30 = 0 and 2*C(6,4) = 30 = 0, so P = 0.
        let p6 = power_defect_poly(6, 5).unwrap();
        assert!(p6.is_zero());
    }

    #[test]
    fn defect_poly_matches_direct_expansion() {
        // Independent construction: expand (1+X)^n + (1-X)^n - 2X^n - 2 with
        // the exact binomial oracle.
        for (n, p) in [(14u64, 3u64), (6, 5), (10, 3), (26, 5), (7, 7), (20, 7)] {
            let fast = power_defect_poly(n, p).unwrap();
            let mut coeffs = vec![0u64; n as usize + 1];
            for (j, c) in coeffs.iter_mut().enumerate() {
                let b = binom_exact_mod(n, j as u64, p);
                let plus = b;
                let minus = if j % 2 == 0 { b } else { fp::neg(b, p) };
                *c = fp::add(plus, minus, p);
            }
            coeffs[n as usize] = fp::sub(coeffs[n as usize], 2, p);
            coeffs[0] = fp::sub(coeffs[0], 2, p);
            assert_eq!(fast, FpPoly::new(p, coeffs), "n={n}, p={p}");
        }
    }

    #[test]
    fn defect_poly_is_even_for_even_n() {
        for (n, p) in [(14u64, 3u64), (6, 5), (18, 3)] {
            let poly = power_defect_poly(n, p).unwrap();
            for (j, &c) in poly.coeffs().iter().enumerate() {
                if j % 2 == 1 {
                    assert_eq!(c, 0, "P(-X) = P(X) for even n");
                }
            }
        }
    }

    #[test]
    fn case_one_closed_form() {
        // For case-I exponents, P(X) = 2 sum_{t even} C(k,t) X^(p^l t).
        for n in 3..=200u64 {
            for p in [3u64, 5, 7] {
                let Ok(params) = classify_exponent(n, p) else { continue };
                let ExponentCase::I { k } = params.case else { continue };
                let l = params.l;
                let direct = power_defect_poly(n, p).unwrap();
                let mut coeffs = vec![0u64; n as usize + 1];
                let step = p.pow(l);
                let mut t = 2u64;
                while t <= k.saturating_sub(2) {
                    let c = fp::mul(2, binom_mod_p(k, t, p).unwrap(), p);
                    coeffs[(step * t) as usize] = c;
                    t += 2;
                }
                assert_eq!(direct, FpPoly::new(p, coeffs), "n={n}, p={p}");
                assert!(!direct.is_zero(), "case-I defect polynomial is nonzero");
            }
        }
    }

    #[test]
    fn defect_poly_vanishes_exactly_in_case_two() {
        // Under the residual condition, P = 0 iff n falls in case II: the
        // base-p digits of k = p^m + 1 kill every even binomial in range.
        for p in [3u64, 5, 7] {
            for n in 3..=200u64 {
                let Ok(params) = classify_exponent(n, p) else { continue };
                let poly = power_defect_poly(n, p).unwrap();
                match params.case {
                    ExponentCase::I { .. } => {
                        assert!(!poly.is_zero(), "case I must have P != 0: n={n}, p={p}")
                    }
                    ExponentCase::II { .. } => {
                        assert!(poly.is_zero(), "case II must have P = 0: n={n}, p={p}")
                    }
                }
            }
        }
    }

    #[test]
    fn classification_examples() {
        let c = classify_exponent(14, 3).unwrap();
        assert_eq!(c.l, 0);
        assert_eq!(c.case, ExponentCase::I { k: 14 });

        let c = classify_exponent(6, 5).unwrap();
        assert_eq!(c.l, 0);
        assert_eq!(c.case, ExponentCase::II { m: 1 }, "6 = 5 + 1");

        let c = classify_exponent(18, 3).unwrap();
        assert_eq!(c.l, 2);
        assert_eq!(c.case, ExponentCase::II { m: 0 }, "18 = 9 + 9 = 2 * 3^2");

        assert!(classify_exponent(4, 3).is_ok(), "4 = 3 + 1");
        assert!(classify_exponent(5, 3).is_err(), "2 does not divide 3");
        assert!(classify_exponent(2, 3).is_err(), "n must exceed 2");
        assert!(classify_exponent(10, 2).is_err(), "p must exceed 2");
    }

    #[test]
    fn classification_reconstructs_and_is_exclusive() {
        for p in [3u64, 5, 7, 11] {
            for n in 3..=10_000u64 {
                let Ok(params) = classify_exponent(n, p) else { continue };
                assert_eq!(params.reconstruct(), n, "n={n}, p={p}");
                // Exclusivity: the case-I hypotheses and the case-II shape
                // cannot hold at once.
                let k = n / p.pow(params.l);
                match params.case {
                    ExponentCase::I { k: kk } => {
                        assert_eq!(k, kk);
                        assert!(kk > 1 && kk % p != 0);
                        assert!(as_p_power(kk - 1, p).is_none());
                    }
                    ExponentCase::II { m } => {
                        assert_eq!(k - 1, p.pow(m));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_defect_degree_and_values() {
        let m2f3 = FiniteAlgebra::matrix_algebra(2, 3, 1, None).unwrap();
        let q = frobenius_sum_defect(3, 1, 1, &m2f3).unwrap();
        assert_eq!(q.degree(), crate::genpoly::Degree::Finite(9));

        // Q(e11, e12) = 2 e12 for (l, m) = (1, 1).
        let e11 = m2f3.basis_elem(0);
        let e12 = m2f3.basis_elem(1);
        let v = q.eval(&[e11.clone(), e12.clone()]).unwrap();
        assert_eq!(v, e12.scale(2));

        // Q(x, 0) collapses to 0 for any x.
        for idx in 0..81 {
            let x = m2f3.element_from_index(idx);
            assert!(q.eval(&[x, m2f3.zero()]).unwrap().is_zero());
        }

        // With l = 0 the linear Y term survives: the value is e12, not 2e12.
        let q0 = frobenius_sum_defect(3, 0, 2, &m2f3).unwrap();
        let v0 = q0.eval(&[e11, e12.clone()]).unwrap();
        assert_eq!(v0, e12);

        // Characteristic mismatch is rejected.
        let gf5 = FiniteAlgebra::galois_field(5, 1, None).unwrap();
        assert!(matches!(
            frobenius_sum_defect(3, 1, 1, &gf5),
            Err(Error::CharMismatch { .. })
        ));
        // (l, m) = (0, 0) gives the formally zero polynomial.
        let z = frobenius_sum_defect(3, 0, 0, &m2f3).unwrap();
        assert!(z.is_zero_formal());
    }

    #[test]
    fn frobenius_defect_vanishes_on_commutative_algebras() {
        // Freshman's dream: x -> x^(p^j) is additive on commutative algebras
        // of characteristic p, so Q evaluates to zero everywhere.
        for (p, r) in [(3u64, 1usize), (3, 2), (5, 1), (5, 2)] {
            let field = FiniteAlgebra::galois_field(p, r, None).unwrap();
            for l in 0..=2u32 {
                for m in 0..=2u32 {
                    if p.checked_pow(l + m).is_none_or(|e| e > MAX_FROBENIUS_EXPONENT) {
                        continue;
                    }
                    let q = frobenius_sum_defect(p, l, m, &field).unwrap();
                    let order = field.order() as u64;
                    for i in 0..order {
                        for j in 0..order {
                            let x = field.element_from_index(i);
                            let y = field.element_from_index(j);
                            assert!(
                                q.eval(&[x, y]).unwrap().is_zero(),
                                "p={p}, r={r}, l={l}, m={m}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nonroot_scan() {
        // n = 14, p = 3: P vanishes on all of GF(3).
        assert_eq!(find_defect_nonroot(14, 3, 1).unwrap(), None);
        // Zero polynomial: no nonroot anywhere.
        assert_eq!(find_defect_nonroot(6, 5, 1).unwrap(), None);
        assert_eq!(find_defect_nonroot(6, 5, 2).unwrap(), None);
        // Over GF(9) the scan's answer re-verifies by evaluation.
        let poly = power_defect_poly(14, 3).unwrap();
        match find_defect_nonroot(14, 3, 2).unwrap() {
            Some(x) => assert!(!eval_fp_poly(&poly, &x).is_zero()),
            None => {
                let field = FiniteAlgebra::galois_field(3, 2, None).unwrap();
                for idx in 0..9 {
                    let x = field.element_from_index(idx);
                    assert!(eval_fp_poly(&poly, &x).is_zero());
                }
            }
        }
    }
}
