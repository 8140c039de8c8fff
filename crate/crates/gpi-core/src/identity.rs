//! Deciding identities on a finite algebra, with witnesses.
//!
//! Every check returns a [`Verdict`]: whether the identity held, how many
//! assignments were examined, the mode (exhaustive or seeded sampling), and
//! on failure a witness assignment that re-evaluates to a nonzero residual.
//! Exhaustive sweeps run in lexicographic coordinate order, so the reported
//! witness is the least violation and repeated runs are byte-identical.
//!
//! Domains matter: checks of `f(x) = x^n g(x^{-1})` quantify over units,
//! while polynomial-coefficient identities `sum G_i(x) f_i(x) = H(x)`
//! quantify over the whole algebra. Each operation states its domain.

use crate::addmap::AdditiveMap;
use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::genpoly::GenPoly;
use crate::rng::SplitMix64;
use crate::DEFAULT_BUDGET;

pub const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { seed: u64, trials: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// The violating assignment, when `holds` is false. Exhaustive mode
    /// reports the lexicographically least one.
    pub witness: Option<Vec<Element>>,
    /// Assignments examined. In exhaustive mode this is the full domain.
    pub checked: u64,
    pub mode: Mode,
}

impl Verdict {
    fn pass(checked: u64, mode: Mode) -> Verdict {
        Verdict { holds: true, witness: None, checked, mode }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (mode, seed) = match self.mode {
            Mode::Exhaustive => ("exhaustive", None),
            Mode::Sampled { seed, .. } => ("sampled", Some(seed)),
        };
        serde_json::json!({
            "holds": self.holds,
            "witness": self.witness.as_ref().map(|w| {
                w.iter().map(|e| e.coords().to_vec()).collect::<Vec<_>>()
            }),
            "checked": self.checked,
            "mode": mode,
            "seed": seed,
        })
    }
}

/// Iterate all m-tuples over the algebra in lexicographic order of the
/// concatenated coordinate vectors (first variable most significant).
fn assignment_at(algebra: &FiniteAlgebra, m: usize, mut idx: u128) -> Vec<Element> {
    let order = algebra.order();
    let mut out = vec![algebra.zero(); m];
    for slot in (0..m).rev() {
        out[slot] = algebra.element_from_index((idx % order) as u64);
        idx /= order;
    }
    out
}

/// Is `g` a polynomial identity on its algebra? Exhaustive mode requires the
/// full assignment space p^(d*m) to fit the budget; sampled mode draws
/// seeded random assignments and stops at the first violation.
pub fn is_gpi(g: &GenPoly, mode: Mode, budget: u64) -> Result<Verdict> {
    let algebra = g.algebra();
    let m = g.num_vars();
    match mode {
        Mode::Exhaustive => {
            let total = algebra
                .order()
                .checked_pow(m as u32)
                .ok_or(Error::BudgetExceeded { needed: u128::MAX, budget })?;
            if total > budget as u128 {
                return Err(Error::BudgetExceeded { needed: total, budget });
            }
            let mut witness = None;
            for idx in 0..total {
                let assignment = assignment_at(algebra, m, idx);
                if !g.eval(&assignment)?.is_zero() && witness.is_none() {
                    witness = Some(assignment);
                }
            }
            Ok(Verdict { holds: witness.is_none(), witness, checked: total as u64, mode })
        }
        Mode::Sampled { seed, trials } => {
            let mut rng = SplitMix64::new(seed);
            let order = algebra.order();
            let order_u64 = u64::try_from(order.min(u64::MAX as u128)).unwrap();
            for t in 0..trials {
                let assignment: Vec<Element> = (0..m)
                    .map(|_| algebra.element_from_index(rng.below(order_u64)))
                    .collect();
                if !g.eval(&assignment)?.is_zero() {
                    return Ok(Verdict {
                        holds: false,
                        witness: Some(assignment),
                        checked: t + 1,
                        mode,
                    });
                }
            }
            Ok(Verdict::pass(trials, mode))
        }
    }
}

/// Residual check for `f(x) = x^n g(x^{-1})` over all units.
pub fn fi_residual(
    f: &AdditiveMap,
    g: &AdditiveMap,
    n: u64,
    budget: u64,
) -> Result<Verdict> {
    let algebra = f.algebra();
    if g.algebra() != algebra {
        return Err(Error::AlgebraMismatch);
    }
    let units = algebra.enumerate_units_with_budget(budget)?;
    let mut witness = None;
    for x in &units {
        let xinv = x.inv().expect("enumerated units are invertible");
        let residual = &f.apply(x) - &(&x.pow(n) * &g.apply(&xinv));
        if !residual.is_zero() && witness.is_none() {
            witness = Some(vec![x.clone()]);
        }
    }
    Ok(Verdict {
        holds: witness.is_none(),
        witness,
        checked: units.len() as u64,
        mode: Mode::Exhaustive,
    })
}

/// Residual check for `sum_j G_j(x) f_j(x) = H(x)` over the whole algebra.
pub fn check_gfi(
    pairs: &[(GenPoly, AdditiveMap)],
    h: &GenPoly,
    budget: u64,
) -> Result<Verdict> {
    let algebra = h.algebra();
    for (g, f) in pairs {
        if g.algebra() != algebra || f.algebra() != algebra {
            return Err(Error::AlgebraMismatch);
        }
        if g.num_vars() != 1 {
            return Err(Error::VarCountMismatch { left: g.num_vars(), right: 1 });
        }
    }
    if h.num_vars() != 1 {
        return Err(Error::VarCountMismatch { left: h.num_vars(), right: 1 });
    }
    let order = algebra.order();
    if order > budget as u128 {
        return Err(Error::BudgetExceeded { needed: order, budget });
    }
    let mut witness = None;
    for idx in 0..order as u64 {
        let x = algebra.element_from_index(idx);
        let mut lhs = algebra.zero();
        for (g, f) in pairs {
            lhs = &lhs + &(&g.eval(std::slice::from_ref(&x))? * &f.apply(&x));
        }
        let rhs = h.eval(std::slice::from_ref(&x))?;
        if lhs != rhs && witness.is_none() {
            witness = Some(vec![x]);
        }
    }
    Ok(Verdict { holds: witness.is_none(), witness, checked: order as u64, mode: Mode::Exhaustive })
}

#[derive(Debug, Clone)]
pub struct HuaReport {
    pub verdict: Verdict,
    /// Pairs (a, b) of units for which b^{-1} - a and a^{-1} + (b^{-1}-a)^{-1}
    /// are units as well, so every inverse in the identity exists.
    pub admissible_pairs: u64,
}

/// Verify Hua's identity `a - a b a = (a^{-1} + (b^{-1} - a)^{-1})^{-1}`
/// over every admissible pair of units. Admissibility is decided by explicit
/// unit tests on each subexpression: in a matrix algebra `a b` outside
/// {0, 1} does not guarantee the inverses exist.
pub fn check_hua(algebra: &FiniteAlgebra, budget: u64) -> Result<HuaReport> {
    let units = algebra.enumerate_units_with_budget(budget)?;
    let mut inverse = std::collections::HashMap::new();
    let mut unit_set = std::collections::HashSet::new();
    for u in &units {
        let idx = algebra.index_of(u);
        unit_set.insert(idx);
        inverse.insert(idx, u.inv().expect("unit"));
    }
    let mut admissible = 0u64;
    let mut witness = None;
    for a in &units {
        let a_inv = &inverse[&algebra.index_of(a)];
        for b in &units {
            let b_inv = &inverse[&algebra.index_of(b)];
            let c = b_inv - a;
            let c_idx = algebra.index_of(&c);
            if !unit_set.contains(&c_idx) {
                continue;
            }
            let s = a_inv + &inverse[&c_idx];
            let s_idx = algebra.index_of(&s);
            if !unit_set.contains(&s_idx) {
                continue;
            }
            admissible += 1;
            let lhs = a - &(&(a * b) * a);
            let rhs = &inverse[&s_idx];
            if &lhs != rhs && witness.is_none() {
                witness = Some(vec![a.clone(), b.clone()]);
            }
        }
    }
    Ok(HuaReport {
        verdict: Verdict {
            holds: witness.is_none(),
            witness,
            checked: admissible,
            mode: Mode::Exhaustive,
        },
        admissible_pairs: admissible,
    })
}

#[derive(Debug, Clone)]
pub struct WIdentityReport {
    /// (a): f(x^2) = w(x) g(x) over every element.
    pub hypothesis: Verdict,
    /// (b): the derived two-variable identity
    /// (2w(2x) - w(x+y) - w(x-y) - 2w(x)) g(x)
    ///   = (w(x+y) - w(x-y) - 2w(y)) g(y) over every pair.
    /// Whenever (a) holds, (b) follows.
    pub derived: Verdict,
}

/// Check the square identity f(x^2) = w(x) g(x) and its two-variable
/// consequence. Requires characteristic not 2.
pub fn check_w_identity(
    f: &AdditiveMap,
    g: &AdditiveMap,
    w: &GenPoly,
    budget: u64,
) -> Result<WIdentityReport> {
    let algebra = w.algebra();
    if algebra.p() == 2 {
        return Err(Error::Hypothesis("characteristic 2 is excluded".into()));
    }
    if f.algebra() != algebra || g.algebra() != algebra {
        return Err(Error::AlgebraMismatch);
    }
    if w.num_vars() != 1 {
        return Err(Error::VarCountMismatch { left: w.num_vars(), right: 1 });
    }
    let order = algebra.order();
    let pairs = order.saturating_mul(order);
    if pairs > budget as u128 {
        return Err(Error::BudgetExceeded { needed: pairs, budget });
    }
    let n = order as u64;
    // Value tables make the pair sweep cheap.
    let elems: Vec<Element> = (0..n).map(|i| algebra.element_from_index(i)).collect();
    let w_tab: Vec<Element> = elems
        .iter()
        .map(|x| w.eval(std::slice::from_ref(x)))
        .collect::<Result<_>>()?;
    let f_tab: Vec<Element> = elems.iter().map(|x| f.apply(x)).collect();
    let g_tab: Vec<Element> = elems.iter().map(|x| g.apply(x)).collect();
    let idx = |e: &Element| algebra.index_of(e) as usize;

    let mut hyp_witness = None;
    for (i, x) in elems.iter().enumerate() {
        let lhs = &f_tab[idx(&x.pow(2))];
        let rhs = &w_tab[i] * &g_tab[i];
        if lhs != &rhs && hyp_witness.is_none() {
            hyp_witness = Some(vec![x.clone()]);
        }
    }
    let hypothesis = Verdict {
        holds: hyp_witness.is_none(),
        witness: hyp_witness,
        checked: n,
        mode: Mode::Exhaustive,
    };

    let mut der_witness = None;
    for (i, x) in elems.iter().enumerate() {
        let two_x = idx(&(x + x));
        for (j, y) in elems.iter().enumerate() {
            let xpy = idx(&(x + y));
            let xmy = idx(&(x - y));
            let lhs_coeff = &(&(&w_tab[two_x].scale(2) - &w_tab[xpy]) - &w_tab[xmy])
                - &w_tab[i].scale(2);
            let rhs_coeff = &(&w_tab[xpy] - &w_tab[xmy]) - &w_tab[j].scale(2);
            let lhs = &lhs_coeff * &g_tab[i];
            let rhs = &rhs_coeff * &g_tab[j];
            if lhs != rhs && der_witness.is_none() {
                der_witness = Some(vec![x.clone(), y.clone()]);
            }
        }
    }
    let derived = Verdict {
        holds: der_witness.is_none(),
        witness: der_witness,
        checked: (pairs.min(u64::MAX as u128)) as u64,
        mode: Mode::Exhaustive,
    };

    Ok(WIdentityReport { hypothesis, derived })
}

/// Convenience wrapper with the default budget.
pub fn is_gpi_default(g: &GenPoly, mode: Mode) -> Result<Verdict> {
    is_gpi(g, mode, DEFAULT_BUDGET)
}
