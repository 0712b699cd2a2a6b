//! Exact-rational and floating-point evaluation.
//!
//! Both evaluators memoize on shared subtrees, so evaluating a large
//! expression DAG costs one visit per distinct node. The floating-point
//! evaluator additionally tracks a magnitude estimate that grows through
//! sums and products; the zero test uses it to scale its tolerance so that
//! benign cancellation in large sums is not mistaken for a nonzero value.

use super::{Expr, ExprView, Func, Symbol};
use crate::error::{Error, Result};
use num::{BigRational, Signed, ToPrimitive, Zero};
use std::collections::HashMap;

/// Exact evaluation. Fails with [`Error::Domain`] on missing bindings,
/// division by zero, or any transcendental function node (those have no
/// rational value).
pub fn eval_exact(e: &Expr, env: &HashMap<Symbol, BigRational>) -> Result<BigRational> {
    let mut memo: HashMap<usize, BigRational> = HashMap::new();
    eval_exact_inner(e, env, &mut memo)
}

fn eval_exact_inner(
    e: &Expr,
    env: &HashMap<Symbol, BigRational>,
    memo: &mut HashMap<usize, BigRational>,
) -> Result<BigRational> {
    if let Some(v) = memo.get(&e.key()) {
        return Ok(v.clone());
    }
    let v = match e.visit() {
        ExprView::Num(r) => r.clone(),
        ExprView::Var(s) => env
            .get(s)
            .cloned()
            .ok_or_else(|| Error::Domain(format!("no binding for variable `{s}`")))?,
        ExprView::Sum(ts) => {
            let mut acc = BigRational::zero();
            for t in ts {
                acc += eval_exact_inner(t, env, memo)?;
            }
            acc
        }
        ExprView::Prod(fs) => {
            let mut acc = BigRational::from_integer(1.into());
            for f in fs {
                acc *= eval_exact_inner(f, env, memo)?;
            }
            acc
        }
        ExprView::Pow(b, n) => {
            let bv = eval_exact_inner(b, env, memo)?;
            if bv.is_zero() && n < 0 {
                return Err(Error::Domain("zero raised to a negative power".into()));
            }
            super::rational_pow(&bv, n)
        }
        ExprView::Func(f, _) => {
            return Err(Error::Domain(format!(
                "`{}` has no exact rational value",
                f.name()
            )))
        }
    };
    memo.insert(e.key(), v.clone());
    Ok(v)
}

/// Floating-point evaluation returning `(value, magnitude)`.
///
/// The magnitude is an upper-bound-style estimate of the size of the terms
/// that combined into the value: leaves contribute their absolute value,
/// sums add magnitudes, products multiply them. `|value|` can be far below
/// the magnitude exactly when the expression suffered cancellation.
pub fn eval_f64(e: &Expr, env: &HashMap<Symbol, f64>) -> Result<(f64, f64)> {
    let mut memo: HashMap<usize, (f64, f64)> = HashMap::new();
    let r = eval_f64_inner(e, env, &mut memo)?;
    if !r.0.is_finite() {
        return Err(Error::Domain("evaluation overflowed to a non-finite value".into()));
    }
    Ok(r)
}

fn eval_f64_inner(
    e: &Expr,
    env: &HashMap<Symbol, f64>,
    memo: &mut HashMap<usize, (f64, f64)>,
) -> Result<(f64, f64)> {
    if let Some(v) = memo.get(&e.key()) {
        return Ok(*v);
    }
    let v = match e.visit() {
        ExprView::Num(r) => {
            let x = rational_to_f64(r);
            (x, x.abs())
        }
        ExprView::Var(s) => {
            let x = *env
                .get(s)
                .ok_or_else(|| Error::Domain(format!("no binding for variable `{s}`")))?;
            (x, x.abs())
        }
        ExprView::Sum(ts) => {
            let mut val = 0.0;
            let mut mag = 0.0;
            for t in ts {
                let (v, m) = eval_f64_inner(t, env, memo)?;
                val += v;
                mag += m;
            }
            (val, mag)
        }
        ExprView::Prod(fs) => {
            let mut val = 1.0;
            let mut mag = 1.0;
            for f in fs {
                let (v, m) = eval_f64_inner(f, env, memo)?;
                val *= v;
                mag *= m.max(v.abs());
            }
            (val, mag)
        }
        ExprView::Pow(b, n) => {
            let (bv, bm) = eval_f64_inner(b, env, memo)?;
            if bv == 0.0 && n < 0 {
                return Err(Error::Domain("zero raised to a negative power".into()));
            }
            let val = bv.powi(n.clamp(i32::MIN as i64, i32::MAX as i64) as i32);
            let mag = if n >= 0 {
                bm.max(bv.abs()).powi(n as i32)
            } else {
                val.abs()
            };
            (val, mag.max(val.abs()))
        }
        ExprView::Func(f, a) => {
            let (av, _) = eval_f64_inner(a, env, memo)?;
            let val = match f {
                Func::Sin => av.sin(),
                Func::Cos => av.cos(),
                Func::Exp => av.exp(),
                Func::Ln => {
                    if av <= 0.0 {
                        return Err(Error::Domain("ln of a nonpositive value".into()));
                    }
                    av.ln()
                }
                Func::Sqrt => {
                    if av < 0.0 {
                        return Err(Error::Domain("sqrt of a negative value".into()));
                    }
                    av.sqrt()
                }
            };
            (val, val.abs().max(1.0))
        }
    };
    memo.insert(e.key(), v);
    Ok(v)
}

/// Convert an arbitrary-precision rational to the nearest `f64`.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Fall back through a scaled representation for extreme operands.
    let digits = 30usize;
    let scale = num::BigInt::from(10u32).pow(digits as u32);
    let scaled = (r * BigRational::from_integer(scale)).to_integer();
    scaled.to_f64().unwrap_or(if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
        / 10f64.powi(digits as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{parse::parse, VarTable};

    fn env_exact(pairs: &[(&str, (i64, i64))]) -> HashMap<Symbol, BigRational> {
        pairs
            .iter()
            .map(|(n, (p, q))| {
                (
                    Symbol::new(n),
                    BigRational::new((*p).into(), (*q).into()),
                )
            })
            .collect()
    }

    #[test]
    fn exact_evaluation_of_rational_expressions() {
        let t = VarTable::with_vars(&["a", "b"]);
        let e = parse("(a + b)^2/(a - b)", &t).unwrap();
        let env = env_exact(&[("a", (3, 1)), ("b", (1, 2))]);
        let got = eval_exact(&e, &env).unwrap();
        // (3 + 1/2)^2 / (3 - 1/2) = (49/4)/(5/2) = 49/10
        assert_eq!(got, BigRational::new(49.into(), 10.into()));
    }

    #[test]
    fn exact_evaluation_rejects_functions_and_poles() {
        let t = VarTable::with_vars(&["a"]);
        let e = parse("sin(a)", &t).unwrap();
        assert!(matches!(
            eval_exact(&e, &env_exact(&[("a", (1, 1))])),
            Err(Error::Domain(_))
        ));
        let e = parse("1/a", &t).unwrap();
        assert!(matches!(
            eval_exact(&e, &env_exact(&[("a", (0, 1))])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn float_evaluation_tracks_magnitude_through_cancellation() {
        let t = VarTable::with_vars(&["a"]);
        // Catastrophic cancellation: value ~0, magnitude ~2e9.
        let e = parse("(a + 1) - a", &t).unwrap();
        // Canonicalization already kills this one; build it via sin to survive.
        let e2 = parse("sin(a)^2 + cos(a)^2 - 1", &t).unwrap();
        let env: HashMap<Symbol, f64> = [(Symbol::new("a"), 1e9f64)].into_iter().collect();
        let (v, _) = eval_f64(&e, &env).unwrap();
        assert_eq!(v, 1.0);
        let (v2, m2) = eval_f64(&e2, &env).unwrap();
        assert!(v2.abs() < 1e-6);
        assert!(m2 >= 1.0);
    }

    #[test]
    fn float_domain_violations_are_reported() {
        let t = VarTable::with_vars(&["a"]);
        let env: HashMap<Symbol, f64> = [(Symbol::new("a"), -2.0f64)].into_iter().collect();
        assert!(eval_f64(&parse("ln(a)", &t).unwrap(), &env).is_err());
        assert!(eval_f64(&parse("sqrt(a)", &t).unwrap(), &env).is_err());
    }
}
