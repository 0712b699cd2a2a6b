//! Exact scalar expressions over arbitrary-precision rationals.
//!
//! Expressions are immutable trees behind [`std::sync::Arc`] handles and are
//! kept in a deterministic canonical form by the smart constructors:
//!
//! * sums and products are flattened (never nested in themselves), their
//!   operands sorted by a total structural order, and like terms / like bases
//!   merged;
//! * rational constants are folded and the neutral elements absorbed
//!   (`x + 0 → x`, `1 * x → x`, `0 * x → 0`, `x^0 → 1`, `x^1 → x`);
//! * there is no division node — quotients are products with negative
//!   integer powers;
//! * the unary functions `sin`, `cos`, `exp`, `ln`, `sqrt` stay symbolic and
//!   are never rewritten (no trigonometric normalization of any kind).
//!
//! Canonicalization does **not** distribute products over sums; full
//! expansion is the business of the exact zero test in [`zerotest`], which
//! decides polynomial and rational expressions exactly and falls back to
//! seeded random evaluation otherwise.
//!
//! The parser in [`parse`] accepts the grammar documented there (a strict
//! superset of what [`Expr`]'s `Display` implementation emits, so
//! `parse(print(e)) == e` for every expression).

pub mod eval;
pub mod parse;
pub mod poly;
pub mod vartable;
pub mod zerotest;

pub use vartable::{Role, Symbol, VarTable};
pub use zerotest::{is_zero, Verdict, ZeroCfg};

use num::{BigInt, BigRational, One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// The unary functions kept symbolic by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    /// The spelling used by the parser and printer.
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    /// Inverse of [`Func::name`].
    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
enum Node {
    Num(BigRational),
    Var(Symbol),
    /// At least two operands, none of which is itself a `Sum`; operands are
    /// sorted by their non-constant part and like terms are merged.
    Sum(Vec<Expr>),
    /// At least one non-numeric factor; an optional leading rational
    /// coefficient (never `0` or `1`); factors sorted by base with distinct
    /// bases.
    Prod(Vec<Expr>),
    /// Integer power with exponent not in `{0, 1}`; the base is never a
    /// number (folded), a product (distributed), or a power (exponents
    /// multiplied).
    Pow(Expr, i64),
    Func(Func, Expr),
}

/// A canonical scalar expression. Cheap to clone (shared tree).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn node(&self) -> &Node {
        &self.0
    }

    /// Address of the shared node, used as a memoization key by evaluators.
    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// The constant zero.
    pub fn zero() -> Expr {
        Expr(Arc::new(Node::Num(BigRational::zero())))
    }

    /// The constant one.
    pub fn one() -> Expr {
        Expr(Arc::new(Node::Num(BigRational::one())))
    }

    /// A rational constant.
    pub fn num(r: BigRational) -> Expr {
        Expr(Arc::new(Node::Num(r)))
    }

    /// An integer constant.
    pub fn int(n: i64) -> Expr {
        Expr::num(BigRational::from_integer(BigInt::from(n)))
    }

    /// The fraction `p/q` (`q != 0`).
    pub fn rational(p: i64, q: i64) -> Expr {
        assert!(q != 0, "rational literal with zero denominator");
        Expr::num(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// A variable.
    pub fn var(s: &Symbol) -> Expr {
        Expr(Arc::new(Node::Var(s.clone())))
    }

    /// Sum of two expressions.
    pub fn add(&self, other: &Expr) -> Expr {
        Expr::sum(vec![self.clone(), other.clone()])
    }

    /// Difference of two expressions.
    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::sum(vec![self.clone(), other.neg()])
    }

    /// Product of two expressions.
    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::product(vec![self.clone(), other.clone()])
    }

    /// Negation.
    pub fn neg(&self) -> Expr {
        self.scale(&BigRational::from_integer(BigInt::from(-1)))
    }

    /// Quotient `self * other^-1`.
    pub fn div(&self, other: &Expr) -> Expr {
        self.mul(&other.pow(-1))
    }

    /// Multiplication by a rational constant.
    pub fn scale(&self, c: &BigRational) -> Expr {
        self.mul(&Expr::num(c.clone()))
    }

    // The leading rational unit of a canonical sum, together with the
    // primitive sum left after dividing it out. Returns `None` unless the
    // expression is a sum whose first term carries a coefficient other than
    // one. Pulling the unit out whenever a sum is used as a product factor
    // gives every scalar multiple of a sum the same primitive base, so like
    // terms built along different routes still cancel structurally.
    fn sum_unit(e: &Expr) -> Option<(BigRational, Expr)> {
        let Node::Sum(ts) = e.node() else {
            return None;
        };
        let u = ts[0].split_coeff().0;
        if u.is_one() {
            return None;
        }
        let inv = u.recip();
        let prim = Expr::sum(ts.iter().map(|t| t.scale(&inv)).collect());
        Some((u, prim))
    }

    /// Canonical sum of arbitrarily many operands.
    pub fn sum(operands: Vec<Expr>) -> Expr {
        // Accumulate coefficient per non-constant part.
        let mut constant = BigRational::zero();
        let mut terms: BTreeMap<Expr, BigRational> = BTreeMap::new();
        let mut stack = operands;
        stack.reverse();
        while let Some(e) = stack.pop() {
            match e.node() {
                Node::Num(r) => constant += r,
                Node::Sum(ts) => stack.extend(ts.iter().rev().cloned()),
                _ => {
                    let (c, rest) = e.split_coeff();
                    *terms.entry(rest).or_insert_with(BigRational::zero) += c;
                }
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(terms.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::num(constant));
        }
        for (rest, c) in terms {
            if c.is_zero() {
                continue;
            }
            out.push(rest.with_coeff(&c));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr(Arc::new(Node::Sum(out))),
        }
    }

    /// Canonical product of arbitrarily many operands.
    pub fn product(operands: Vec<Expr>) -> Expr {
        let mut coeff = BigRational::one();
        let mut bases: BTreeMap<Expr, i64> = BTreeMap::new();
        let mut stack = operands;
        stack.reverse();
        while let Some(e) = stack.pop() {
            match e.node() {
                Node::Num(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= r;
                }
                Node::Prod(fs) => stack.extend(fs.iter().rev().cloned()),
                Node::Pow(base, exp) => {
                    if let Some((u, prim)) = Expr::sum_unit(base) {
                        coeff *= rational_pow(&u, *exp);
                        *bases.entry(prim).or_insert(0) += *exp;
                    } else {
                        *bases.entry(base.clone()).or_insert(0) += *exp;
                    }
                }
                Node::Sum(_) => {
                    if let Some((u, prim)) = Expr::sum_unit(&e) {
                        coeff *= u;
                        *bases.entry(prim).or_insert(0) += 1;
                    } else {
                        *bases.entry(e.clone()).or_insert(0) += 1;
                    }
                }
                _ => {
                    *bases.entry(e).or_insert(0) += 1;
                }
            }
        }
        let mut factors: Vec<Expr> = Vec::with_capacity(bases.len() + 1);
        for (base, exp) in bases {
            match exp {
                0 => {}
                1 => factors.push(base),
                _ => factors.push(Expr::raw_pow(base, exp)),
            }
        }
        if factors.is_empty() {
            return Expr::num(coeff);
        }
        if factors.len() == 1 {
            let lone = factors.pop().unwrap();
            if coeff.is_one() {
                return lone;
            }
            // A rational coefficient distributes over a lone sum so that
            // differences of sums cancel term by term; products with two or
            // more non-numeric factors are never expanded.
            if let Node::Sum(terms) = lone.node() {
                let c = Expr::num(coeff);
                return Expr::sum(terms.iter().map(|t| t.mul(&c)).collect());
            }
            return Expr(Arc::new(Node::Prod(vec![Expr::num(coeff), lone])));
        }
        let mut out = Vec::with_capacity(factors.len() + 1);
        if !coeff.is_one() {
            out.push(Expr::num(coeff));
        }
        out.extend(factors);
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        Expr(Arc::new(Node::Prod(out)))
    }

    /// Canonical integer power.
    pub fn pow(&self, exp: i64) -> Expr {
        match exp {
            0 => return Expr::one(),
            1 => return self.clone(),
            _ => {}
        }
        match self.node() {
            Node::Num(r) => {
                if r.is_zero() && exp < 0 {
                    // Symbolically undefined; kept as an inert marker so that
                    // evaluation reports a domain error instead of silently
                    // producing a value.
                    return Expr(Arc::new(Node::Pow(self.clone(), exp)));
                }
                Expr::num(rational_pow(r, exp))
            }
            Node::Pow(base, inner) => Expr::raw_pow(base.clone(), inner.checked_mul(exp).expect("exponent overflow")),
            Node::Prod(fs) => {
                let raised: Vec<Expr> = fs.iter().map(|f| f.pow(exp)).collect();
                Expr::product(raised)
            }
            Node::Sum(_) => {
                if let Some((u, prim)) = Expr::sum_unit(self) {
                    let p = Expr(Arc::new(Node::Pow(prim, exp)));
                    Expr::product(vec![Expr::num(rational_pow(&u, exp)), p])
                } else {
                    Expr(Arc::new(Node::Pow(self.clone(), exp)))
                }
            }
            _ => Expr(Arc::new(Node::Pow(self.clone(), exp))),
        }
    }

    // A power node whose base is already known to be a legal power base.
    fn raw_pow(base: Expr, exp: i64) -> Expr {
        match exp {
            0 => Expr::one(),
            1 => base,
            _ => match base.node() {
                Node::Num(_) | Node::Pow(..) | Node::Prod(_) => base.pow(exp),
                _ => Expr(Arc::new(Node::Pow(base, exp))),
            },
        }
    }

    /// Apply a unary function. Exact special values at rational arguments
    /// are folded (`sin(0) = 0`, `cos(0) = exp(0) = 1`, `ln(1) = 0`, square
    /// roots of perfect squares); everything else stays as an inert function
    /// node — symbolic arguments are never rewritten.
    pub fn func(f: Func, arg: &Expr) -> Expr {
        if let Some(r) = arg.as_number() {
            match f {
                Func::Sin if r.is_zero() => return Expr::zero(),
                Func::Cos | Func::Exp if r.is_zero() => return Expr::one(),
                Func::Ln if r.is_one() => return Expr::zero(),
                Func::Sqrt => {
                    if let Some(root) = rational_sqrt(r) {
                        return Expr::num(root);
                    }
                }
                _ => {}
            }
        }
        Expr(Arc::new(Node::Func(f, arg.clone())))
    }

    /// `sqrt(self)`.
    pub fn sqrt(&self) -> Expr {
        Expr::func(Func::Sqrt, self)
    }

    /// True if this is the literal constant `0`.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node(), Node::Num(r) if r.is_zero())
    }

    /// True if this is the literal constant `1`.
    pub fn is_one_literal(&self) -> bool {
        matches!(self.node(), Node::Num(r) if r.is_one())
    }

    /// The rational value if the expression is a constant.
    pub fn as_number(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    /// The symbol if the expression is a bare variable.
    pub fn as_var(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Var(s) => Some(s),
            _ => None,
        }
    }

    /// Split into `(coefficient, rest)` with `self == coefficient * rest` and
    /// `rest` carrying no leading rational factor (`rest == 1` for constants).
    pub fn split_coeff(&self) -> (BigRational, Expr) {
        match self.node() {
            Node::Num(r) => (r.clone(), Expr::one()),
            Node::Prod(fs) => {
                if let Node::Num(r) = fs[0].node() {
                    let rest = if fs.len() == 2 {
                        fs[1].clone()
                    } else {
                        Expr(Arc::new(Node::Prod(fs[1..].to_vec())))
                    };
                    (r.clone(), rest)
                } else {
                    (BigRational::one(), self.clone())
                }
            }
            _ => (BigRational::one(), self.clone()),
        }
    }

    // Reattach a coefficient to a coefficient-free expression.
    fn with_coeff(&self, c: &BigRational) -> Expr {
        if c.is_one() {
            return self.clone();
        }
        if self.is_one_literal() {
            return Expr::num(c.clone());
        }
        match self.node() {
            Node::Prod(fs) => {
                let mut out = Vec::with_capacity(fs.len() + 1);
                out.push(Expr::num(c.clone()));
                out.extend(fs.iter().cloned());
                Expr(Arc::new(Node::Prod(out)))
            }
            _ => Expr(Arc::new(Node::Prod(vec![Expr::num(c.clone()), self.clone()]))),
        }
    }

    /// Exact partial derivative with respect to `v`. Every other symbol is
    /// treated as an independent constant.
    pub fn diff(&self, v: &Symbol) -> Expr {
        let mut memo: HashMap<usize, Expr> = HashMap::new();
        self.diff_memo(v, &mut memo)
    }

    fn diff_memo(&self, v: &Symbol, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.key()) {
            return d.clone();
        }
        let d = match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Var(s) => {
                if s == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.diff_memo(v, memo)).collect()),
            Node::Prod(fs) => {
                let mut parts = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let df = f.diff_memo(v, memo);
                    if df.is_zero_literal() {
                        continue;
                    }
                    let mut ops: Vec<Expr> = Vec::with_capacity(fs.len());
                    ops.extend(fs.iter().take(i).cloned());
                    ops.extend(fs.iter().skip(i + 1).cloned());
                    ops.push(df);
                    parts.push(Expr::product(ops));
                }
                Expr::sum(parts)
            }
            Node::Pow(base, exp) => {
                let db = base.diff_memo(v, memo);
                if db.is_zero_literal() {
                    Expr::zero()
                } else {
                    Expr::product(vec![Expr::int(*exp), base.pow(exp - 1), db])
                }
            }
            Node::Func(f, arg) => {
                let da = arg.diff_memo(v, memo);
                if da.is_zero_literal() {
                    Expr::zero()
                } else {
                    let outer = match f {
                        Func::Sin => Expr::func(Func::Cos, arg),
                        Func::Cos => Expr::func(Func::Sin, arg).neg(),
                        Func::Exp => Expr::func(Func::Exp, arg),
                        Func::Ln => arg.pow(-1),
                        Func::Sqrt => Expr::rational(1, 2).mul(&Expr::func(Func::Sqrt, arg).pow(-1)),
                    };
                    outer.mul(&da)
                }
            }
        };
        memo.insert(self.key(), d.clone());
        d
    }

    /// Substitute expressions for variables (simultaneously), recanonicalizing.
    pub fn subst(&self, map: &HashMap<Symbol, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        let mut memo: HashMap<usize, Expr> = HashMap::new();
        self.subst_memo(map, &mut memo)
    }

    fn subst_memo(&self, map: &HashMap<Symbol, Expr>, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(r) = memo.get(&self.key()) {
            return r.clone();
        }
        let r = match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(s) => match map.get(s) {
                Some(e) => e.clone(),
                None => self.clone(),
            },
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.subst_memo(map, memo)).collect()),
            Node::Prod(fs) => Expr::product(fs.iter().map(|f| f.subst_memo(map, memo)).collect()),
            Node::Pow(b, e) => b.subst_memo(map, memo).pow(*e),
            Node::Func(f, a) => Expr::func(*f, &a.subst_memo(map, memo)),
        };
        memo.insert(self.key(), r.clone());
        r
    }

    /// The set of variables occurring in the expression.
    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut seen: std::collections::HashSet<usize> = std::collections::HashSet::new();
        let mut out = BTreeSet::new();
        self.collect_vars(&mut seen, &mut out);
        out
    }

    fn collect_vars(&self, seen: &mut std::collections::HashSet<usize>, out: &mut BTreeSet<Symbol>) {
        if !seen.insert(self.key()) {
            return;
        }
        match self.node() {
            Node::Num(_) => {}
            Node::Var(s) => {
                out.insert(s.clone());
            }
            Node::Sum(es) | Node::Prod(es) => {
                for e in es {
                    e.collect_vars(seen, out);
                }
            }
            Node::Pow(b, _) => b.collect_vars(seen, out),
            Node::Func(_, a) => a.collect_vars(seen, out),
        }
    }

    /// True if no `sin`/`cos`/`exp`/`ln`/`sqrt` node occurs, i.e. the
    /// expression is a rational function of its variables.
    pub fn is_rational(&self) -> bool {
        let mut seen: std::collections::HashSet<usize> = std::collections::HashSet::new();
        self.is_rational_inner(&mut seen)
    }

    fn is_rational_inner(&self, seen: &mut std::collections::HashSet<usize>) -> bool {
        if !seen.insert(self.key()) {
            return true;
        }
        match self.node() {
            Node::Num(_) | Node::Var(_) => true,
            Node::Sum(es) | Node::Prod(es) => es.iter().all(|e| e.is_rational_inner(seen)),
            Node::Pow(b, _) => b.is_rational_inner(seen),
            Node::Func(..) => false,
        }
    }

    // Internal accessors for the sibling modules.
    pub(crate) fn visit(&self) -> ExprView<'_> {
        match self.node() {
            Node::Num(r) => ExprView::Num(r),
            Node::Var(s) => ExprView::Var(s),
            Node::Sum(ts) => ExprView::Sum(ts),
            Node::Prod(fs) => ExprView::Prod(fs),
            Node::Pow(b, e) => ExprView::Pow(b, *e),
            Node::Func(f, a) => ExprView::Func(*f, a),
        }
    }
}

/// Read-only structural view used by the evaluators and the expander.
pub(crate) enum ExprView<'a> {
    Num(&'a BigRational),
    Var(&'a Symbol),
    Sum(&'a [Expr]),
    Prod(&'a [Expr]),
    Pow(&'a Expr, i64),
    Func(Func, &'a Expr),
}

fn rational_pow(r: &BigRational, exp: i64) -> BigRational {
    let mag = exp.unsigned_abs() as u32;
    let p = num::pow::pow(r.numer().clone(), mag as usize);
    let q = num::pow::pow(r.denom().clone(), mag as usize);
    if exp >= 0 {
        BigRational::new(p, q)
    } else {
        BigRational::new(q, p)
    }
}

// Exact square root of a nonnegative rational, if it is a perfect square.
fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    use num::Signed;
    if r.is_negative() {
        return None;
    }
    let p = r.numer().sqrt();
    let q = r.denom().sqrt();
    if &(&p * &p) == r.numer() && &(&q * &q) == r.denom() {
        Some(BigRational::new(p, q))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Total structural order (deterministic across runs: variables compare by
// name, never by creation order).
// ---------------------------------------------------------------------------

fn rank(n: &Node) -> u8 {
    match n {
        Node::Num(_) => 0,
        Node::Var(_) => 1,
        Node::Pow(..) => 2,
        Node::Func(..) => 3,
        Node::Prod(_) => 4,
        Node::Sum(_) => 5,
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Expr) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (self.node(), other.node());
        rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
            (Node::Num(x), Node::Num(y)) => x.cmp(y),
            (Node::Var(x), Node::Var(y)) => x.cmp(y),
            (Node::Pow(bx, ex), Node::Pow(by, ey)) => bx.cmp(by).then(ex.cmp(ey)),
            (Node::Func(fx, ax), Node::Func(fy, ay)) => fx.cmp(fy).then_with(|| ax.cmp(ay)),
            (Node::Prod(xs), Node::Prod(ys)) | (Node::Sum(xs), Node::Sum(ys)) => xs.cmp(ys),
            _ => unreachable!("rank already discriminated"),
        })
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Expr) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ---------------------------------------------------------------------------
// Printing. The output re-parses to the identical expression; quotients are
// rendered with `/` and positive exponents only.
// ---------------------------------------------------------------------------

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_expr(self))
    }
}

fn print_expr(e: &Expr) -> String {
    match e.node() {
        Node::Sum(ts) => {
            let mut out = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (c, rest) = t.split_coeff();
                if c.is_negative() {
                    out.push_str(if i == 0 { "-" } else { " - " });
                    out.push_str(&print_product_like(&rest.with_coeff(&-c)));
                } else {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    out.push_str(&print_product_like(t));
                }
            }
            out
        }
        _ => {
            let (c, rest) = e.split_coeff();
            if c.is_negative() {
                format!("-{}", print_product_like(&rest.with_coeff(&-c)))
            } else {
                print_product_like(e)
            }
        }
    }
}

// Print a non-sum (or a parenthesized sum) with nonnegative leading sign.
fn print_product_like(e: &Expr) -> String {
    // Collect numerator and denominator pieces.
    let mut num_parts: Vec<String> = Vec::new();
    let mut den_parts: Vec<String> = Vec::new();
    let push_factor = |base: &Expr, exp: i64, num_parts: &mut Vec<String>, den_parts: &mut Vec<String>| {
        let (target, mag) = if exp < 0 {
            (den_parts, exp.unsigned_abs())
        } else {
            (num_parts, exp as u64)
        };
        let b = print_atom(base);
        if mag == 1 {
            target.push(b);
        } else {
            target.push(format!("{b}^{mag}"));
        }
    };
    match e.node() {
        Node::Prod(fs) => {
            for f in fs {
                match f.node() {
                    Node::Num(r) => {
                        if !r.numer().is_one() {
                            num_parts.insert(0, r.numer().to_string());
                        }
                        if !r.denom().is_one() {
                            den_parts.insert(0, r.denom().to_string());
                        }
                    }
                    Node::Pow(b, n) => push_factor(b, *n, &mut num_parts, &mut den_parts),
                    _ => num_parts.push(print_atom(f)),
                }
            }
        }
        Node::Pow(b, n) => push_factor(b, *n, &mut num_parts, &mut den_parts),
        Node::Num(r) => {
            return r.to_string();
        }
        _ => num_parts.push(print_atom(e)),
    }
    let num = if num_parts.is_empty() {
        "1".to_string()
    } else {
        num_parts.join("*")
    };
    if den_parts.is_empty() {
        num
    } else if den_parts.len() == 1 && !den_parts[0].contains('*') {
        format!("{num}/{}", den_parts[0])
    } else {
        format!("{num}/({})", den_parts.join("*"))
    }
}

// Print with parentheses whenever the node binds looser than a power base.
fn print_atom(e: &Expr) -> String {
    match e.node() {
        Node::Num(r) => {
            if r.is_negative() || !r.denom().is_one() {
                format!("({r})")
            } else {
                r.to_string()
            }
        }
        Node::Var(s) => s.to_string(),
        Node::Func(f, a) => format!("{}({})", f.name(), print_expr(a)),
        Node::Sum(_) | Node::Prod(_) | Node::Pow(..) => format!("({})", print_expr(e)),
    }
}
