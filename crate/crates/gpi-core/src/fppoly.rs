//! Dense univariate polynomials over F_p.
//!
//! Coefficients are stored in ascending degree order; the vector is either
//! empty (the zero polynomial) or ends in a nonzero coefficient. This is the
//! carrier both for extension-field moduli (irreducibility via trial
//! division) and for the classification polynomials of the identity solver.

use crate::error::{Error, Result};
use crate::fp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        FpPoly::new(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        FpPoly::new(p, vec![0, 1])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the convention that the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.p, other.p);
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| fp::add(self.coeff(i), other.coeff(i), self.p))
            .collect();
        FpPoly::new(self.p, coeffs)
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.p, other.p);
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| fp::sub(self.coeff(i), other.coeff(i), self.p))
            .collect();
        FpPoly::new(self.p, coeffs)
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.p, other.p);
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(self.p);
        }
        let mut coeffs = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = fp::add(coeffs[i + j], fp::mul(a, b, self.p), self.p);
            }
        }
        FpPoly::new(self.p, coeffs)
    }

    /// Remainder of `self` modulo a nonzero divisor.
    pub fn rem(&self, divisor: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.p, divisor.p);
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let p = self.p;
        let dd = divisor.degree().unwrap();
        let lead_inv = fp::inv(divisor.coeff(dd), p);
        let mut rem = self.coeffs.clone();
        while rem.len() > dd {
            let k = rem.len() - 1;
            let c = rem[k];
            if c != 0 {
                let f = fp::mul(c, lead_inv, p);
                for (j, &dcoef) in divisor.coeffs.iter().enumerate() {
                    let idx = k - dd + j;
                    rem[idx] = fp::sub(rem[idx], fp::mul(f, dcoef, p), p);
                }
            }
            rem.pop();
        }
        FpPoly::new(p, rem)
    }

    pub fn eval(&self, x: u64, p: u64) -> u64 {
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = fp::add(fp::mul(acc, x, p), c, p);
        }
        acc
    }

    /// Irreducibility by trial division against every monic polynomial of
    /// degree 1 ..= deg/2. Desk scale by construction.
    pub fn is_irreducible(&self) -> bool {
        let Some(deg) = self.degree() else { return false };
        if deg == 0 {
            return false;
        }
        if deg == 1 {
            return true;
        }
        let p = self.p;
        for d in 1..=deg / 2 {
            // Enumerate monic degree-d polynomials by their lower coefficients.
            let count = (p as u128).pow(d as u32);
            for idx in 0..count {
                let mut coeffs = Vec::with_capacity(d + 1);
                let mut k = idx;
                for _ in 0..d {
                    coeffs.push((k % p as u128) as u64);
                    k /= p as u128;
                }
                coeffs.push(1);
                let cand = FpPoly::new(p, coeffs);
                if self.rem(&cand).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Render as a human-readable polynomial in `t`.
    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let part = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => var.to_string(),
                (1, c) => format!("{c}*{var}"),
                (i, 1) => format!("{var}^{i}"),
                (i, c) => format!("{c}*{var}^{i}"),
            };
            parts.push(part);
        }
        parts.reverse();
        parts.join(" + ")
    }
}

/// The deterministic default modulus for GF(p^k): the first irreducible
/// monic degree-k polynomial when candidates are ordered lexicographically by
/// their coefficient sequence, constant term first.
pub fn default_irreducible(p: u64, k: usize) -> Result<FpPoly> {
    fp::ensure_prime(p)?;
    if k < 1 {
        return Err(Error::BadParameter(format!("extension degree must be >= 1, got {k}")));
    }
    let count = (p as u128)
        .checked_pow(k as u32)
        .ok_or_else(|| Error::BadParameter("extension degree too large".into()))?;
    // Low coefficients vary slowest in lexicographic (c_0, c_1, ...) order.
    for idx in 0..count {
        let mut coeffs = Vec::with_capacity(k + 1);
        let mut rest = idx;
        for pos in 0..k {
            let weight = (p as u128).pow((k - 1 - pos) as u32);
            coeffs.push((rest / weight) as u64);
            rest %= weight;
        }
        coeffs.push(1);
        let cand = FpPoly::new(p, coeffs);
        if cand.is_irreducible() {
            return Ok(cand);
        }
    }
    unreachable!("irreducible polynomials exist in every degree over F_p")
}
