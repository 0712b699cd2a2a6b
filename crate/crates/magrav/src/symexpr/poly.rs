//! Exact distributed expansion of rational expressions.
//!
//! An expression without transcendental function nodes is a rational
//! function of its variables. [`expand_rational`] rewrites it as a quotient
//! `p / q` with `p` a fully distributed multivariate polynomial and `q` a
//! *factored* denominator; since the denominator is a product of canonically
//! nonzero factors, the expression is identically zero exactly when `p` has
//! no terms. This is the engine behind every `proven-zero` verdict on
//! non-trivial identities.
//!
//! Denominators are kept factored (monic factors with integer exponents) so
//! that sums combine over a least common multiple instead of a plain
//! product.  Identities built from matrix-inverse entries mix many different
//! powers of the same determinant; folding those with pairwise denominator
//! products would raise the determinant to a power that grows with the
//! number of terms, while the LCM keeps it at the maximum power present.
//!
//! Expansion can still be exponentially larger than the input, so it runs
//! under a term budget and reports [`ExpandError::Budget`] instead of
//! thrashing.

use super::{Expr, ExprView, Symbol};
use num::{BigRational, One, Zero};
use std::collections::BTreeMap;

/// A power product `x1^e1 * x2^e2 * ...` with sorted, distinct variables.
pub type Monomial = Vec<(Symbol, u32)>;

/// A multivariate polynomial in distributed form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct MPoly {
    /// Map from monomial to nonzero coefficient.
    pub terms: BTreeMap<Monomial, BigRational>,
}

impl MPoly {
    /// The zero polynomial.
    pub fn zero() -> MPoly {
        MPoly::default()
    }

    /// A constant polynomial.
    pub fn constant(c: BigRational) -> MPoly {
        let mut p = MPoly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    /// The polynomial `v`.
    pub fn var(v: &Symbol) -> MPoly {
        let mut p = MPoly::zero();
        p.terms.insert(vec![(v.clone(), 1)], BigRational::one());
        p
    }

    /// True when there are no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the constant polynomial `1`.
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Vec::new() as &Monomial)
                .is_some_and(|c| c.is_one())
    }

    /// Number of terms (for budget accounting and diagnostics).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when there are no terms (mirrors [`MPoly::len`]).
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the largest monomial in the term order.
    fn leading(&self) -> Option<&BigRational> {
        self.terms.values().next_back()
    }

    /// Divide every coefficient by a nonzero scalar.
    fn div_scalar(&self, c: &BigRational) -> MPoly {
        let mut out = MPoly::zero();
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), v / c);
        }
        out
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Product of two polynomials, with a term budget.
    pub fn mul(&self, other: &MPoly, budget: usize) -> Result<MPoly, ExpandError> {
        let mut out = MPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(merge_monomials(ma, mb), ca * cb);
                if out.terms.len() > budget {
                    return Err(ExpandError::Budget);
                }
            }
        }
        Ok(out)
    }

    /// Integer power by binary exponentiation.
    pub fn pow(&self, n: u32, budget: usize) -> Result<MPoly, ExpandError> {
        let mut acc = MPoly::constant(BigRational::one());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, budget)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, budget)?;
            }
        }
        Ok(acc)
    }
}

fn merge_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn rational_pow(c: &BigRational, n: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..n {
        out *= c;
    }
    out
}

/// A denominator in factored form `Π fᵢ^{eᵢ}` with each factor monic (leading
/// coefficient one), nonconstant, distinct, and kept sorted.  Scalar parts of
/// denominators are normalized into the numerator instead.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factors {
    parts: Vec<(MPoly, u32)>,
}

impl Factors {
    /// The empty product.
    pub fn one() -> Factors {
        Factors::default()
    }

    /// True for the empty product.
    pub fn is_one(&self) -> bool {
        self.parts.is_empty()
    }

    /// The factors with their exponents.
    pub fn parts(&self) -> &[(MPoly, u32)] {
        &self.parts
    }

    fn push(&mut self, f: MPoly, e: u32) {
        if e == 0 {
            return;
        }
        match self.parts.binary_search_by(|(g, _)| g.cmp(&f)) {
            Ok(i) => self.parts[i].1 += e,
            Err(i) => self.parts.insert(i, (f, e)),
        }
    }

    fn mul(&self, other: &Factors) -> Factors {
        let mut out = self.clone();
        for (f, e) in &other.parts {
            out.push(f.clone(), *e);
        }
        out
    }

    fn pow(&self, n: u32) -> Factors {
        if n == 0 {
            return Factors::one();
        }
        Factors {
            parts: self.parts.iter().map(|(f, e)| (f.clone(), e * n)).collect(),
        }
    }

    fn lcm(&self, other: &Factors) -> Factors {
        let mut out = self.clone();
        for (f, e) in &other.parts {
            match out.parts.binary_search_by(|(g, _)| g.cmp(f)) {
                Ok(i) => out.parts[i].1 = out.parts[i].1.max(*e),
                Err(i) => out.parts.insert(i, (f.clone(), *e)),
            }
        }
        out
    }

    fn exponent_of(&self, f: &MPoly) -> u32 {
        self.parts
            .binary_search_by(|(g, _)| g.cmp(f))
            .map(|i| self.parts[i].1)
            .unwrap_or(0)
    }

    /// The distributed polynomial `lcm / self` (requires `self` to divide
    /// `lcm` factorwise, which holds by construction).
    fn cofactor(&self, lcm: &Factors, budget: usize) -> Result<MPoly, ExpandError> {
        let mut out = MPoly::constant(BigRational::one());
        for (f, le) in &lcm.parts {
            let e = self.exponent_of(f);
            if *le > e {
                out = out.mul(&f.pow(*le - e, budget)?, budget)?;
            }
        }
        Ok(out)
    }

    /// Multiply the factors out into a distributed polynomial.
    pub fn expand(&self, budget: usize) -> Result<MPoly, ExpandError> {
        let mut out = MPoly::constant(BigRational::one());
        for (f, e) in &self.parts {
            out = out.mul(&f.pow(*e, budget)?, budget)?;
        }
        Ok(out)
    }
}

/// Why an expansion did not produce a polynomial quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandError {
    /// A transcendental function node makes the expression non-rational.
    NotRational,
    /// The distributed form exceeded the term budget.
    Budget,
    /// A negative power of a polynomial that expands to zero (symbolic
    /// division by zero).
    ZeroDenominator,
}

/// A quotient `num / den` with `den` a product of canonically nonzero monic
/// factors.
#[derive(Debug, Clone)]
pub struct RationalForm {
    pub num: MPoly,
    pub den: Factors,
}

/// Expand an expression into a [`RationalForm`] under a term budget.
pub fn expand_rational(e: &Expr, budget: usize) -> Result<RationalForm, ExpandError> {
    let mut memo: std::collections::HashMap<usize, RationalForm> = std::collections::HashMap::new();
    expand_inner(e, budget, &mut memo)
}

fn expand_inner(
    e: &Expr,
    budget: usize,
    memo: &mut std::collections::HashMap<usize, RationalForm>,
) -> Result<RationalForm, ExpandError> {
    if let Some(r) = memo.get(&e.key()) {
        return Ok(r.clone());
    }
    let r = match e.visit() {
        ExprView::Num(c) => RationalForm {
            num: MPoly::constant(c.clone()),
            den: Factors::one(),
        },
        ExprView::Var(v) => RationalForm {
            num: MPoly::var(v),
            den: Factors::one(),
        },
        ExprView::Sum(ts) => {
            // Fold over the least common multiple of the denominators seen
            // so far; equal denominators merge without any multiplication.
            let mut acc: Option<RationalForm> = None;
            for t in ts {
                let rt = expand_inner(t, budget, memo)?;
                acc = Some(match acc {
                    None => rt,
                    Some(a) if a.den == rt.den => RationalForm {
                        num: a.num.add(&rt.num),
                        den: a.den,
                    },
                    Some(a) => {
                        let lcm = a.den.lcm(&rt.den);
                        let ca = a.den.cofactor(&lcm, budget)?;
                        let ct = rt.den.cofactor(&lcm, budget)?;
                        RationalForm {
                            num: a.num.mul(&ca, budget)?.add(&rt.num.mul(&ct, budget)?),
                            den: lcm,
                        }
                    }
                });
            }
            acc.unwrap_or(RationalForm {
                num: MPoly::zero(),
                den: Factors::one(),
            })
        }
        ExprView::Prod(fs) => {
            let mut num = MPoly::constant(BigRational::one());
            let mut den = Factors::one();
            for f in fs {
                let rf = expand_inner(f, budget, memo)?;
                num = num.mul(&rf.num, budget)?;
                den = den.mul(&rf.den);
            }
            RationalForm { num, den }
        }
        ExprView::Pow(b, n) => {
            let rb = expand_inner(b, budget, memo)?;
            let mag = n.unsigned_abs() as u32;
            if n >= 0 {
                RationalForm {
                    num: rb.num.pow(mag, budget)?,
                    den: rb.den.pow(mag),
                }
            } else {
                if rb.num.is_zero() {
                    return Err(ExpandError::ZeroDenominator);
                }
                // 1/(p/q)^m = q^m / p^m with p made monic: its scalar part
                // moves into the numerator.
                let num = rb.den.expand(budget)?.pow(mag, budget)?;
                let lead = rb.num.leading().expect("nonzero polynomial").clone();
                let monic = rb.num.div_scalar(&lead);
                let num = num.div_scalar(&rational_pow(&lead, mag));
                let mut den = Factors::one();
                if !monic.is_one() {
                    den.push(monic, mag);
                }
                RationalForm { num, den }
            }
        }
        ExprView::Func(..) => return Err(ExpandError::NotRational),
    };
    memo.insert(e.key(), r.clone());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{parse::parse, VarTable};

    fn expand_zero(src: &str) -> bool {
        let t = VarTable::with_vars(&["a", "b", "c"]);
        let e = parse(src, &t).unwrap();
        expand_rational(&e, 100_000).unwrap().num.is_zero()
    }

    #[test]
    fn binomial_identity_is_proven_by_expansion() {
        assert!(expand_zero("(a + b)^2 - a^2 - 2*a*b - b^2"));
        assert!(expand_zero("(a + b)*(a - b) - a^2 + b^2"));
        assert!(!expand_zero("(a + b)^2 - a^2 - b^2"));
    }

    #[test]
    fn rational_functions_clear_denominators() {
        // a/(a+b) + b/(a+b) - 1 == 0
        assert!(expand_zero("a/(a + b) + b/(a + b) - 1"));
        // 1/a - 1/b == (b-a)/(ab), not zero
        assert!(!expand_zero("1/a - 1/b"));
    }

    #[test]
    fn mixed_denominator_powers_combine_over_the_lcm() {
        // Partial fractions across two factors and several powers.
        assert!(expand_zero("1/b - 1/(a + b) - a/(b*(a + b))"));
        assert!(expand_zero(
            "c/(a + b)^3 + c/(a + b) - (c + c*(a + b)^2)/(a + b)^3"
        ));
        assert!(!expand_zero("1/(a + b) - 1/(a + b)^2"));
        // Scalar multiples of a factor normalize away: 1/(2a) + 1/(2a) = 1/a.
        assert!(expand_zero("1/(2*a) + 1/(2*a) - 1/a"));
    }

    #[test]
    fn lcm_folding_keeps_the_denominator_at_the_maximal_power() {
        // A long alternating sum of different powers of the same two-term
        // factor stays within a budget that the pairwise product rule would
        // overrun almost immediately.
        let t = VarTable::with_vars(&["a", "b", "c"]);
        let mut src = String::new();
        for i in 0..40 {
            let p = 1 + (i % 3);
            if i > 0 {
                src.push_str(" + ");
            }
            src.push_str(&format!("{}/(a + b)^{}", i + 1, p));
        }
        let e = parse(&src, &t).unwrap();
        let form = expand_rational(&e, 60).unwrap();
        assert_eq!(form.den.parts().len(), 1);
        assert_eq!(form.den.parts()[0].1, 3);
    }

    #[test]
    fn functions_and_budget_are_reported() {
        let t = VarTable::with_vars(&["a"]);
        let e = parse("sin(a)", &t).unwrap();
        assert_eq!(expand_rational(&e, 1000).unwrap_err(), ExpandError::NotRational);
        let e = parse("(a + 1)^30*(a + 2)^30", &t).unwrap();
        assert_eq!(expand_rational(&e, 10).unwrap_err(), ExpandError::Budget);
        let e = parse("(a - a)^-1", &t).unwrap();
        assert_eq!(
            expand_rational(&e, 1000).unwrap_err(),
            ExpandError::ZeroDenominator
        );
    }
}
