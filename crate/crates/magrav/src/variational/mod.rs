//! Variational calculus on jet coordinates for first-order metric-affine
//! Lagrangian densities.
//!
//! The field content is an inverse metric σ^{αβ} (symmetric) together with an
//! independent linear connection k_μ^α_β on a chart of dimension 2..=4.
//! A [`JetContext`] owns formal coordinates for the fields and their total
//! derivatives up to a configurable order, plus translation parameters τ^α
//! (with their own formal derivatives) and a formal volume factor standing
//! for √|det σ_{αβ}|.
//!
//! Symbol naming, with all indices single digits:
//!
//! * `si{a}{b}`       — σ^{ab} with a ≤ b (symmetric storage, one slot per class)
//! * `si{a}{b}_{λ…}`  — total-derivative jets, derivative digits sorted
//! * `k{μ}{a}{b}`     — k_μ^a_b (base index μ, upper a, lower b)
//! * `k{μ}{a}{b}_{λ…}`— jets of the connection component
//! * `t{a}`, `t{a}_{λ…}` — translation parameters and their derivatives
//! * `sq`             — the volume factor √|det σ_{αβ}|
//!
//! [`JetContext::total_derivative`] implements the total derivative d_λ:
//! it shifts jet symbols one order up, differentiates the volume factor by
//! the Jacobi rule d_λ sq = −½ sq σ_{αβ} σ^{αβ}_λ, and raises a
//! jet-order error instead of silently inventing variables beyond the
//! configured order.  [`euler_lagrange`] produces the variational
//! derivatives 𝓔_{αβ} (metric) and 𝓔^μ_α^β (connection) of a first-order
//! [`LagrangianDensity`]; [`hilbert_einstein`] and [`yang_mills`] build the
//! two standard curvature densities.  The identity checks that tie these
//! together live in [`identities`].

pub mod identities;

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Chart;
use crate::symexpr::vartable::{Role, Symbol, VarTable};
use crate::symexpr::parse::parse;
use crate::symexpr::{Expr, ExprView, Func};

pub use identities::{
    energy_momentum_current, energy_momentum_report, field_equations_he, flat_point_substitution,
    invariance_identities, komar_report, komar_superpotential, levi_civita_substitution,
    noether_identities, OnShellSampler,
};

/// Identifies one stored jet coordinate.  Derivative lists are kept sorted,
/// so each symmetric class has exactly one key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum JetKey {
    /// σ^{ab} with a ≤ b, plus `ders` total-derivative indices.
    Sigma {
        a: usize,
        b: usize,
        ders: Vec<usize>,
    },
    /// k_μ^a_b plus `ders` total-derivative indices.
    Conn {
        mu: usize,
        a: usize,
        b: usize,
        ders: Vec<usize>,
    },
    /// τ^a plus `ders` formal derivative indices.
    Tau {
        a: usize,
        ders: Vec<usize>,
    },
    /// The formal volume factor √|det σ_{αβ}|.
    Volume,
}

#[derive(Debug)]
struct JetData {
    chart: Chart,
    dim: usize,
    sigma_order: usize,
    k_order: usize,
    tau_order: usize,
    table: VarTable,
    vars: HashMap<JetKey, Symbol>,
    kinds: HashMap<Symbol, JetKey>,
    /// σ_{ab}: symbolic inverse of the σ^{ab} matrix (dense, mirrored).
    lower: Vec<Vec<Expr>>,
    /// det(σ^{ab}) of the mirrored matrix.
    det_upper: Expr,
    volume_sym: Symbol,
    /// Precomputed d_λ(sq) for each direction λ.
    d_volume: Vec<Expr>,
}

/// Shared, immutable bundle of jet coordinates for one chart dimension.
/// Cloning is cheap; symbols compare by name, so expressions built in one
/// context remain valid in any context of the same dimension with at least
/// the same orders (see [`JetContext::upgraded`]).
#[derive(Debug, Clone)]
pub struct JetContext(Arc<JetData>);

/// Maximal jet orders seen in an expression, by family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JetOrders {
    /// Highest σ-jet order present (`None` when no σ symbol appears).
    pub sigma: Option<usize>,
    /// Highest connection-jet order present.
    pub conn: Option<usize>,
    /// Highest τ-derivative order present.
    pub tau: Option<usize>,
    /// True when the volume factor appears.
    pub volume: bool,
}

fn minmax(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn ders_suffix(name: &mut String, ders: &[usize]) {
    if !ders.is_empty() {
        name.push('_');
        for d in ders {
            name.push_str(&d.to_string());
        }
    }
}

fn sigma_name(a: usize, b: usize, ders: &[usize]) -> String {
    let mut s = format!("si{a}{b}");
    ders_suffix(&mut s, ders);
    s
}

fn conn_name(mu: usize, a: usize, b: usize, ders: &[usize]) -> String {
    let mut s = format!("k{mu}{a}{b}");
    ders_suffix(&mut s, ders);
    s
}

fn tau_name(a: usize, ders: &[usize]) -> String {
    let mut s = format!("t{a}");
    ders_suffix(&mut s, ders);
    s
}

/// All sorted derivative tuples over `dim` directions with length 0..=`max`.
fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for tail in &frontier {
            let start = tail.last().copied().unwrap_or(0);
            for d in start..dim {
                let mut t = tail.clone();
                t.push(d);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Number of distinct orderings of a sorted derivative tuple
/// (the multinomial coefficient of its index multiplicities).
fn orderings(ders: &[usize]) -> u64 {
    let mut total: u64 = 1;
    for k in 1..=ders.len() as u64 {
        total *= k;
    }
    let mut denom = 1u64;
    let mut i = 0;
    while i < ders.len() {
        let mut j = i + 1;
        while j < ders.len() && ders[j] == ders[i] {
            j += 1;
        }
        for k in 1..=(j - i) as u64 {
            denom *= k;
        }
        i = j;
    }
    total / denom
}

impl JetContext {
    /// σ jets to third order by default: identities apply two total
    /// derivatives to variational derivatives that are already first order.
    pub const DEFAULT_SIGMA_ORDER: usize = 3;
    /// Connection jets to second order by default.
    pub const DEFAULT_K_ORDER: usize = 2;
    /// Translation parameters always carry derivatives up to third order.
    pub const TAU_ORDER: usize = 3;

    /// Context with the default orders (σ to 3, k to 2, τ to 3).
    pub fn new(dim: usize) -> Result<JetContext> {
        JetContext::with_orders(dim, Self::DEFAULT_SIGMA_ORDER, Self::DEFAULT_K_ORDER)
    }

    /// Context with explicit σ- and connection-jet orders (each at least 1).
    pub fn with_orders(dim: usize, sigma_order: usize, k_order: usize) -> Result<JetContext> {
        if sigma_order < 1 || k_order < 1 {
            return Err(Error::Shape(
                "a jet context needs at least first-order jets in every family".into(),
            ));
        }
        let chart = Chart::new(dim)?;
        let mut table = chart.table().clone();
        let mut vars: HashMap<JetKey, Symbol> = HashMap::new();
        let mut kinds: HashMap<Symbol, JetKey> = HashMap::new();

        let mut add = |table: &mut VarTable, key: JetKey, name: String| -> Result<()> {
            let role = match &key {
                JetKey::Sigma { ders, .. } | JetKey::Conn { ders, .. } | JetKey::Tau { ders, .. }
                    if ders.is_empty() =>
                {
                    Role::Fiber
                }
                JetKey::Volume => Role::Fiber,
                _ => Role::Jet,
            };
            let sym = table.add(Symbol::new(&name), role)?;
            vars.insert(key.clone(), sym.clone());
            kinds.insert(sym, key);
            Ok(())
        };

        for a in 0..dim {
            for b in a..dim {
                for ders in multi_indices(dim, sigma_order) {
                    add(
                        &mut table,
                        JetKey::Sigma {
                            a,
                            b,
                            ders: ders.clone(),
                        },
                        sigma_name(a, b, &ders),
                    )?;
                }
            }
        }
        for mu in 0..dim {
            for a in 0..dim {
                for b in 0..dim {
                    for ders in multi_indices(dim, k_order) {
                        add(
                            &mut table,
                            JetKey::Conn {
                                mu,
                                a,
                                b,
                                ders: ders.clone(),
                            },
                            conn_name(mu, a, b, &ders),
                        )?;
                    }
                }
            }
        }
        for a in 0..dim {
            for ders in multi_indices(dim, Self::TAU_ORDER) {
                add(
                    &mut table,
                    JetKey::Tau {
                        a,
                        ders: ders.clone(),
                    },
                    tau_name(a, &ders),
                )?;
            }
        }
        add(&mut table, JetKey::Volume, "sq".into())?;
        let volume_sym = vars[&JetKey::Volume].clone();

        // Dense σ^{ab} matrix and its symbolic inverse.
        let mut upper = vec![vec![Expr::zero(); dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                let (lo, hi) = minmax(a, b);
                upper[a][b] = Expr::var(&vars[&JetKey::Sigma {
                    a: lo,
                    b: hi,
                    ders: Vec::new(),
                }]);
            }
        }
        let (lower, det_upper) = crate::geometry::metric::invert_expr_matrix(&upper);

        // d_λ(sq) = −½ sq Σ_{αβ} σ_{αβ} σ^{αβ}_λ  (Jacobi rule; the sum runs
        // over all index pairs, so stored classes enter with weight 2 − δ).
        let volume = Expr::var(&volume_sym);
        let mut d_volume = Vec::with_capacity(dim);
        for lam in 0..dim {
            let mut terms = Vec::new();
            for a in 0..dim {
                for b in a..dim {
                    let jet = Expr::var(&vars[&JetKey::Sigma {
                        a,
                        b,
                        ders: vec![lam],
                    }]);
                    let weight = if a == b {
                        Expr::one()
                    } else {
                        Expr::int(2)
                    };
                    terms.push(Expr::product(vec![weight, lower[a][b].clone(), jet]));
                }
            }
            d_volume.push(Expr::product(vec![
                Expr::rational(-1, 2),
                volume.clone(),
                Expr::sum(terms),
            ]));
        }

        Ok(JetContext(Arc::new(JetData {
            chart,
            dim,
            sigma_order,
            k_order,
            tau_order: Self::TAU_ORDER,
            table,
            vars,
            kinds,
            lower,
            det_upper,
            volume_sym,
            d_volume,
        })))
    }

    /// A context of the same dimension whose orders are raised to at least
    /// the given ones.  Returns `self` unchanged when nothing grows.
    pub fn upgraded(&self, sigma_order: usize, k_order: usize) -> Result<JetContext> {
        let so = self.0.sigma_order.max(sigma_order);
        let ko = self.0.k_order.max(k_order);
        if so == self.0.sigma_order && ko == self.0.k_order {
            return Ok(self.clone());
        }
        JetContext::with_orders(self.0.dim, so, ko)
    }

    /// Chart dimension.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// The underlying chart.
    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    /// Variable table covering chart coordinates and all jet symbols.
    pub fn table(&self) -> &VarTable {
        &self.0.table
    }

    /// Configured σ-jet order.
    pub fn sigma_order(&self) -> usize {
        self.0.sigma_order
    }

    /// Configured connection-jet order.
    pub fn k_order(&self) -> usize {
        self.0.k_order
    }

    /// Configured τ-derivative order.
    pub fn tau_order(&self) -> usize {
        self.0.tau_order
    }

    /// Parse a scalar expression over the context's symbols.
    pub fn parse(&self, src: &str) -> Result<Expr> {
        parse(src, &self.0.table)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.0.dim {
            Ok(())
        } else {
            Err(Error::IndexRange {
                got: i,
                dim: self.0.dim,
            })
        }
    }

    fn sigma_key(&self, a: usize, b: usize, ders: &[usize]) -> Result<&Symbol> {
        self.check_index(a)?;
        self.check_index(b)?;
        for &d in ders {
            self.check_index(d)?;
        }
        if ders.len() > self.0.sigma_order {
            return Err(Error::JetOrder(format!(
                "σ-jet of order {} requested but the context stops at order {}",
                ders.len(),
                self.0.sigma_order
            )));
        }
        let (lo, hi) = minmax(a, b);
        let mut sorted = ders.to_vec();
        sorted.sort_unstable();
        Ok(&self.0.vars[&JetKey::Sigma {
            a: lo,
            b: hi,
            ders: sorted,
        }])
    }

    fn conn_key(&self, mu: usize, a: usize, b: usize, ders: &[usize]) -> Result<&Symbol> {
        self.check_index(mu)?;
        self.check_index(a)?;
        self.check_index(b)?;
        for &d in ders {
            self.check_index(d)?;
        }
        if ders.len() > self.0.k_order {
            return Err(Error::JetOrder(format!(
                "connection jet of order {} requested but the context stops at order {}",
                ders.len(),
                self.0.k_order
            )));
        }
        let mut sorted = ders.to_vec();
        sorted.sort_unstable();
        Ok(&self.0.vars[&JetKey::Conn {
            mu,
            a,
            b,
            ders: sorted,
        }])
    }

    fn tau_key(&self, a: usize, ders: &[usize]) -> Result<&Symbol> {
        self.check_index(a)?;
        for &d in ders {
            self.check_index(d)?;
        }
        if ders.len() > self.0.tau_order {
            return Err(Error::JetOrder(format!(
                "τ-derivative of order {} requested but the context stops at order {}",
                ders.len(),
                self.0.tau_order
            )));
        }
        let mut sorted = ders.to_vec();
        sorted.sort_unstable();
        Ok(&self.0.vars[&JetKey::Tau { a, ders: sorted }])
    }

    /// σ^{ab} as an expression (either index order).
    pub fn sigma(&self, a: usize, b: usize) -> Expr {
        Expr::var(self.sigma_key(a, b, &[]).expect("order-0 σ symbol exists"))
    }

    /// A σ-jet σ^{ab}_{λ…}; the derivative list may come in any order.
    pub fn sigma_jet(&self, a: usize, b: usize, ders: &[usize]) -> Result<Expr> {
        Ok(Expr::var(self.sigma_key(a, b, ders)?))
    }

    /// k_μ^a_b as an expression.
    pub fn connection(&self, mu: usize, a: usize, b: usize) -> Expr {
        Expr::var(
            self.conn_key(mu, a, b, &[])
                .expect("order-0 connection symbol exists"),
        )
    }

    /// A connection jet k_μ^a_b carrying the given total derivatives; the
    /// first-order jet with derivative λ is the coordinate often written
    /// k_{λμ}^a_b.
    pub fn connection_jet(&self, mu: usize, a: usize, b: usize, ders: &[usize]) -> Result<Expr> {
        Ok(Expr::var(self.conn_key(mu, a, b, ders)?))
    }

    /// τ^a as an expression.
    pub fn translation(&self, a: usize) -> Expr {
        Expr::var(self.tau_key(a, &[]).expect("order-0 τ symbol exists"))
    }

    /// A formal derivative ∂_{λ…}τ^a.
    pub fn translation_jet(&self, a: usize, ders: &[usize]) -> Result<Expr> {
        Ok(Expr::var(self.tau_key(a, ders)?))
    }

    /// The formal volume factor √|det σ_{αβ}| as an expression.
    pub fn volume(&self) -> Expr {
        Expr::var(&self.0.volume_sym)
    }

    /// The symbol behind [`JetContext::volume`].
    pub fn volume_symbol(&self) -> &Symbol {
        &self.0.volume_sym
    }

    /// σ_{ab}: entry of the symbolic inverse of the σ^{ab} matrix.
    pub fn sigma_lower(&self, a: usize, b: usize) -> &Expr {
        &self.0.lower[a][b]
    }

    /// det(σ^{ab}) as a symbolic expression.
    pub fn sigma_det(&self) -> &Expr {
        &self.0.det_upper
    }

    /// Curvature 𝓡_{λμ}^a_b = k_{λμ}^a_b − k_{μλ}^a_b
    /// + k_λ^γ_b k_μ^a_γ − k_μ^γ_b k_λ^a_γ, antisymmetric in (λ, μ).
    pub fn curvature(&self, lam: usize, mu: usize, a: usize, b: usize) -> Result<Expr> {
        let mut terms = vec![
            self.connection_jet(mu, a, b, &[lam])?,
            self.connection_jet(lam, a, b, &[mu])?.neg(),
        ];
        for g in 0..self.0.dim {
            terms.push(self.connection(lam, g, b).mul(&self.connection(mu, a, g)));
            terms.push(
                self.connection(mu, g, b)
                    .mul(&self.connection(lam, a, g))
                    .neg(),
            );
        }
        Ok(Expr::sum(terms))
    }

    /// Torsion t_μ^a_λ = k_μ^a_λ − k_λ^a_μ.
    pub fn torsion(&self, mu: usize, a: usize, lam: usize) -> Expr {
        self.connection(mu, a, lam).sub(&self.connection(lam, a, mu))
    }

    /// Non-metricity c_{μνα} = d_μ σ_{να} + k_μ^β_α σ_{νβ} + k_μ^β_ν σ_{βα},
    /// symmetric in (ν, α).
    pub fn nonmetricity(&self, mu: usize, nu: usize, al: usize) -> Result<Expr> {
        let mut terms = vec![self.total_derivative(&self.0.lower[nu][al], mu)?];
        for b in 0..self.0.dim {
            terms.push(self.connection(mu, b, al).mul(&self.0.lower[nu][b]));
            terms.push(self.connection(mu, b, nu).mul(&self.0.lower[b][al]));
        }
        Ok(Expr::sum(terms))
    }

    /// Total derivative d_λ: shifts jet symbols one order up, maps the chart
    /// coordinate x^λ to 1 (other coordinates to 0), applies the chain rule
    /// through sums, products, powers, and unary functions, and expands the
    /// volume factor by the Jacobi rule.  Errors when a shift would exceed a
    /// configured jet order.
    pub fn total_derivative(&self, e: &Expr, lam: usize) -> Result<Expr> {
        self.check_index(lam)?;
        let mut memo: HashMap<usize, Expr> = HashMap::new();
        self.td(e, lam, &mut memo)
    }

    fn td(&self, e: &Expr, lam: usize, memo: &mut HashMap<usize, Expr>) -> Result<Expr> {
        if let Some(hit) = memo.get(&e.key()) {
            return Ok(hit.clone());
        }
        let out = match e.visit() {
            ExprView::Num(_) => Expr::zero(),
            ExprView::Var(s) => self.shift_var(s, lam)?,
            ExprView::Sum(ts) => {
                let mut parts = Vec::with_capacity(ts.len());
                for t in ts {
                    let dt = self.td(t, lam, memo)?;
                    if !dt.is_zero_literal() {
                        parts.push(dt);
                    }
                }
                Expr::sum(parts)
            }
            ExprView::Prod(fs) => {
                let mut parts = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    let df = self.td(f, lam, memo)?;
                    if df.is_zero_literal() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                    for (j, g) in fs.iter().enumerate() {
                        if j != i {
                            factors.push(g.clone());
                        }
                    }
                    factors.push(df);
                    parts.push(Expr::product(factors));
                }
                Expr::sum(parts)
            }
            ExprView::Pow(base, n) => {
                let db = self.td(base, lam, memo)?;
                if db.is_zero_literal() {
                    Expr::zero()
                } else {
                    Expr::product(vec![Expr::int(n), base.pow(n - 1), db])
                }
            }
            ExprView::Func(f, arg) => {
                let da = self.td(arg, lam, memo)?;
                if da.is_zero_literal() {
                    Expr::zero()
                } else {
                    let outer = match f {
                        Func::Sin => Expr::func(Func::Cos, arg),
                        Func::Cos => Expr::func(Func::Sin, arg).neg(),
                        Func::Exp => Expr::func(Func::Exp, arg),
                        Func::Ln => arg.pow(-1),
                        Func::Sqrt => Expr::func(Func::Sqrt, arg)
                            .pow(-1)
                            .mul(&Expr::rational(1, 2)),
                    };
                    outer.mul(&da)
                }
            }
        };
        memo.insert(e.key(), out.clone());
        Ok(out)
    }

    fn shift_var(&self, s: &Symbol, lam: usize) -> Result<Expr> {
        let d = &*self.0;
        if let Some(key) = d.kinds.get(s) {
            return match key {
                JetKey::Sigma { a, b, ders } => {
                    if ders.len() + 1 > d.sigma_order {
                        return Err(Error::JetOrder(format!(
                            "d_{lam} needs a σ-jet of order {} but the context stops at {}",
                            ders.len() + 1,
                            d.sigma_order
                        )));
                    }
                    let mut next = ders.clone();
                    next.push(lam);
                    next.sort_unstable();
                    Ok(Expr::var(&d.vars[&JetKey::Sigma {
                        a: *a,
                        b: *b,
                        ders: next,
                    }]))
                }
                JetKey::Conn { mu, a, b, ders } => {
                    if ders.len() + 1 > d.k_order {
                        return Err(Error::JetOrder(format!(
                            "d_{lam} needs a connection jet of order {} but the context stops at {}",
                            ders.len() + 1,
                            d.k_order
                        )));
                    }
                    let mut next = ders.clone();
                    next.push(lam);
                    next.sort_unstable();
                    Ok(Expr::var(&d.vars[&JetKey::Conn {
                        mu: *mu,
                        a: *a,
                        b: *b,
                        ders: next,
                    }]))
                }
                JetKey::Tau { a, ders } => {
                    if ders.len() + 1 > d.tau_order {
                        return Err(Error::JetOrder(format!(
                            "d_{lam} needs a τ-derivative of order {} but the context stops at {}",
                            ders.len() + 1,
                            d.tau_order
                        )));
                    }
                    let mut next = ders.clone();
                    next.push(lam);
                    next.sort_unstable();
                    Ok(Expr::var(&d.vars[&JetKey::Tau { a: *a, ders: next }]))
                }
                JetKey::Volume => Ok(d.d_volume[lam].clone()),
            };
        }
        match d.table.role(s) {
            Some(Role::Chart(i)) => Ok(if i == lam { Expr::one() } else { Expr::zero() }),
            Some(Role::Param) => Ok(Expr::zero()),
            _ => Err(Error::UnknownIdentifier(s.to_string())),
        }
    }

    /// ∂F/∂σ^{αβ} honoring symmetric storage: off-diagonal classes carry the
    /// multiplicity weight ½, and the formal volume factor is chained through
    /// with ∂sq/∂σ^{αβ} = −½ sq σ_{αβ}.
    pub fn sigma_partial(&self, f: &Expr, a: usize, b: usize) -> Expr {
        let (lo, hi) = minmax(a, b);
        let sym = self
            .sigma_key(lo, hi, &[])
            .expect("order-0 σ symbol exists");
        let mut out = f.diff(sym);
        if lo != hi {
            out = out.mul(&Expr::rational(1, 2));
        }
        let dv = f.diff(&self.0.volume_sym);
        if !dv.is_zero_literal() {
            let chain = Expr::product(vec![
                Expr::rational(-1, 2),
                self.volume(),
                self.0.lower[lo][hi].clone(),
            ]);
            out = out.add(&dv.mul(&chain));
        }
        out
    }

    /// ∂F/∂σ^{αβ}_{λ…} with the full multiplicity weight: ½ for an
    /// off-diagonal index class times one over the number of distinct
    /// orderings of the derivative tuple.
    pub fn sigma_jet_partial(&self, f: &Expr, a: usize, b: usize, ders: &[usize]) -> Result<Expr> {
        let (lo, hi) = minmax(a, b);
        let sym = self.sigma_key(lo, hi, ders)?;
        let mut out = f.diff(sym);
        if out.is_zero_literal() {
            return Ok(out);
        }
        let mut weight = orderings(&{
            let mut s = ders.to_vec();
            s.sort_unstable();
            s
        }) as i64;
        if lo != hi {
            weight *= 2;
        }
        if weight != 1 {
            out = out.mul(&Expr::rational(1, weight));
        }
        Ok(out)
    }

    /// ∂F/∂k_μ^a_b (no multiplicity: the three indices are independent).
    pub fn connection_partial(&self, f: &Expr, mu: usize, a: usize, b: usize) -> Expr {
        let sym = self
            .conn_key(mu, a, b, &[])
            .expect("order-0 connection symbol exists");
        f.diff(sym)
    }

    /// ∂F/∂k_μ^a_b,{λ…}: for a first-order jet this is the canonical
    /// momentum slot ∂F/∂k_{λμ}^a_b; repeated higher derivatives carry the
    /// ordering weight.
    pub fn connection_jet_partial(
        &self,
        f: &Expr,
        mu: usize,
        a: usize,
        b: usize,
        ders: &[usize],
    ) -> Result<Expr> {
        let sym = self.conn_key(mu, a, b, ders)?;
        let mut out = f.diff(sym);
        if out.is_zero_literal() {
            return Ok(out);
        }
        let weight = orderings(&{
            let mut s = ders.to_vec();
            s.sort_unstable();
            s
        }) as i64;
        if weight != 1 {
            out = out.mul(&Expr::rational(1, weight));
        }
        Ok(out)
    }

    /// Maximal jet orders used by an expression, per family.
    pub fn jet_orders(&self, e: &Expr) -> JetOrders {
        let mut out = JetOrders::default();
        for v in e.free_vars() {
            match self.0.kinds.get(&v) {
                Some(JetKey::Sigma { ders, .. }) => {
                    out.sigma = Some(out.sigma.unwrap_or(0).max(ders.len()));
                }
                Some(JetKey::Conn { ders, .. }) => {
                    out.conn = Some(out.conn.unwrap_or(0).max(ders.len()));
                }
                Some(JetKey::Tau { ders, .. }) => {
                    out.tau = Some(out.tau.unwrap_or(0).max(ders.len()));
                }
                Some(JetKey::Volume) => out.volume = true,
                None => {}
            }
        }
        out
    }

    pub(crate) fn kind_of(&self, s: &Symbol) -> Option<&JetKey> {
        self.0.kinds.get(s)
    }

    pub(crate) fn keys(&self) -> impl Iterator<Item = (&JetKey, &Symbol)> {
        self.0.vars.iter()
    }
}

/// A scalar density 𝓛 (the coefficient of the volume form) over a
/// [`JetContext`], tagged with a label used in report titles.
#[derive(Debug, Clone)]
pub struct LagrangianDensity {
    ctx: JetContext,
    density: Expr,
    label: String,
}

impl LagrangianDensity {
    /// Wrap an expression as a Lagrangian density.  Every free variable must
    /// be known to the context (jet symbol or chart coordinate).
    pub fn new(ctx: &JetContext, density: Expr) -> Result<LagrangianDensity> {
        for v in density.free_vars() {
            if ctx.table().role(&v).is_none() {
                return Err(Error::UnknownIdentifier(v.to_string()));
            }
        }
        Ok(LagrangianDensity {
            ctx: ctx.clone(),
            density,
            label: "custom".into(),
        })
    }

    /// Same, with a label for reports.
    pub fn with_label(ctx: &JetContext, density: Expr, label: &str) -> Result<LagrangianDensity> {
        let mut l = LagrangianDensity::new(ctx, density)?;
        l.label = label.into();
        Ok(l)
    }

    /// The owning context.
    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    /// The density expression.
    pub fn density(&self) -> &Expr {
        &self.density
    }

    /// The report label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Canonical momentum π^{λν}_a^b = ∂𝓛/∂k_{λν}^a_b.
    pub fn momentum(&self, lam: usize, nu: usize, a: usize, b: usize) -> Expr {
        self.ctx
            .connection_jet_partial(&self.density, nu, a, b, &[lam])
            .expect("first-order jets exist in every context")
    }
}

/// The Hilbert–Einstein density σ^{μβ} 𝓡_{λμ}^λ_β √|det σ_{αβ}| built from
/// the jet-coordinate curvature.
pub fn hilbert_einstein(ctx: &JetContext) -> LagrangianDensity {
    let n = ctx.dim();
    let mut terms = Vec::new();
    for mu in 0..n {
        for b in 0..n {
            let mut ric = Vec::with_capacity(n);
            for lam in 0..n {
                ric.push(
                    ctx.curvature(lam, mu, lam, b)
                        .expect("first-order jets exist in every context"),
                );
            }
            terms.push(ctx.sigma(mu, b).mul(&Expr::sum(ric)));
        }
    }
    let density = Expr::sum(terms).mul(&ctx.volume());
    LagrangianDensity {
        ctx: ctx.clone(),
        density,
        label: "hilbert_einstein".into(),
    }
}

/// The quadratic curvature density
/// σ^{μλ} σ^{νγ} 𝓡_{μν}^α_β 𝓡_{λγ}^β_α √|det σ_{αβ}|.
/// The volume factor makes it a density like its linear counterpart.
pub fn yang_mills(ctx: &JetContext) -> LagrangianDensity {
    let n = ctx.dim();
    let mut r = vec![vec![vec![vec![Expr::zero(); n]; n]; n]; n];
    for mu in 0..n {
        for nu in 0..n {
            for a in 0..n {
                for b in 0..n {
                    r[mu][nu][a][b] = ctx
                        .curvature(mu, nu, a, b)
                        .expect("first-order jets exist in every context");
                }
            }
        }
    }
    let mut terms = Vec::new();
    for mu in 0..n {
        for lam in 0..n {
            for nu in 0..n {
                for ga in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            terms.push(Expr::product(vec![
                                ctx.sigma(mu, lam),
                                ctx.sigma(nu, ga),
                                r[mu][nu][a][b].clone(),
                                r[lam][ga][b][a].clone(),
                            ]));
                        }
                    }
                }
            }
        }
    }
    let density = Expr::sum(terms).mul(&ctx.volume());
    LagrangianDensity {
        ctx: ctx.clone(),
        density,
        label: "yang_mills".into(),
    }
}

/// Variational derivatives of a first-order density: the symmetric metric
/// family 𝓔_{αβ} and the connection family 𝓔^μ_α^β.
#[derive(Debug, Clone)]
pub struct VariationalDerivatives {
    ctx: JetContext,
    metric: Vec<Vec<Expr>>,
    connection: Vec<Vec<Vec<Expr>>>,
}

impl VariationalDerivatives {
    /// The owning context.
    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    /// 𝓔_{αβ} (symmetric in its indices).
    pub fn metric(&self, a: usize, b: usize) -> &Expr {
        &self.metric[a][b]
    }

    /// 𝓔^μ_α^β.
    pub fn connection(&self, mu: usize, a: usize, b: usize) -> &Expr {
        &self.connection[mu][a][b]
    }
}

/// Euler–Lagrange operator for first-order densities:
/// 𝓔_{αβ} = (∂/∂σ^{αβ} − d_λ ∂/∂σ^{αβ}_λ)𝓛 and
/// 𝓔^μ_α^β = (∂/∂k_μ^α_β − d_λ ∂/∂k_{λμ}^α_β)𝓛.
/// Errors when the density carries second-order jets or τ-symbols.
pub fn euler_lagrange(l: &LagrangianDensity) -> Result<VariationalDerivatives> {
    let ctx = l.ctx();
    let n = ctx.dim();
    let lag = l.density();
    let orders = ctx.jet_orders(lag);
    if orders.sigma.unwrap_or(0) > 1 || orders.conn.unwrap_or(0) > 1 {
        return Err(Error::JetOrder(
            "the Euler-Lagrange operator needs a first-order density".into(),
        ));
    }
    if orders.tau.is_some() {
        return Err(Error::JetOrder(
            "a Lagrangian density must not contain translation parameters".into(),
        ));
    }

    let mut metric = vec![vec![Expr::zero(); n]; n];
    for a in 0..n {
        for b in a..n {
            let mut e = ctx.sigma_partial(lag, a, b);
            for lam in 0..n {
                let p = ctx.sigma_jet_partial(lag, a, b, &[lam])?;
                if !p.is_zero_literal() {
                    e = e.sub(&ctx.total_derivative(&p, lam)?);
                }
            }
            metric[a][b] = e.clone();
            metric[b][a] = e;
        }
    }

    let mut connection = vec![vec![vec![Expr::zero(); n]; n]; n];
    for mu in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut e = ctx.connection_partial(lag, mu, a, b);
                for lam in 0..n {
                    let p = ctx.connection_jet_partial(lag, mu, a, b, &[lam])?;
                    if !p.is_zero_literal() {
                        e = e.sub(&ctx.total_derivative(&p, lam)?);
                    }
                }
                connection[mu][a][b] = e;
            }
        }
    }

    Ok(VariationalDerivatives {
        ctx: ctx.clone(),
        metric,
        connection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::zerotest::{is_zero, Verdict, ZeroCfg};

    fn cfg() -> ZeroCfg {
        ZeroCfg::default()
    }

    fn assert_proven(e: &Expr) {
        let v = is_zero(e, &cfg()).unwrap();
        assert!(matches!(v, Verdict::ProvenZero), "expected proven zero, got {v}: {e}");
    }

    #[test]
    fn symbol_inventory_matches_orders() {
        let ctx = JetContext::new(2).unwrap();
        // σ: 3 classes × (1+2+3+4) tuples; k: 8 × (1+2+3); τ: 2 × (1+2+3+4);
        // plus the volume factor and the two chart coordinates.
        assert_eq!(ctx.table().len(), 3 * 10 + 8 * 6 + 2 * 10 + 1 + 2);
        assert_eq!(ctx.sigma(0, 1), ctx.sigma(1, 0));
        assert_eq!(ctx.sigma_jet(1, 0, &[1, 0]).unwrap(), ctx.parse("si01_01").unwrap());
    }

    #[test]
    fn total_derivative_basics() {
        let ctx = JetContext::new(2).unwrap();
        assert!(ctx.total_derivative(&Expr::int(5), 0).unwrap().is_zero_literal());
        assert_eq!(
            ctx.total_derivative(&ctx.sigma(0, 0), 1).unwrap(),
            ctx.sigma_jet(0, 0, &[1]).unwrap()
        );
        // Leibniz: d_0(k_1^0_1 σ^{11}) = k_{01}^0_1 σ^{11} + k_1^0_1 σ^{11}_0.
        let e = ctx.connection(1, 0, 1).mul(&ctx.sigma(1, 1));
        let want = ctx
            .connection_jet(1, 0, 1, &[0])
            .unwrap()
            .mul(&ctx.sigma(1, 1))
            .add(&ctx.connection(1, 0, 1).mul(&ctx.sigma_jet(1, 1, &[0]).unwrap()));
        assert_eq!(ctx.total_derivative(&e, 0).unwrap(), want);
        // Chart coordinates: d_λ x^μ = δ.
        let x0 = Expr::var(ctx.chart().coord(0).unwrap());
        assert!(ctx.total_derivative(&x0, 0).unwrap().is_one_literal());
        assert!(ctx.total_derivative(&x0, 1).unwrap().is_zero_literal());
        let s = Expr::func(Func::Sin, &x0);
        assert_eq!(
            ctx.total_derivative(&s, 0).unwrap(),
            Expr::func(Func::Cos, &x0)
        );
    }

    #[test]
    fn total_derivative_error_past_configured_order() {
        let ctx = JetContext::new(2).unwrap();
        let top = ctx.sigma_jet(0, 0, &[0, 1, 1]).unwrap();
        let err = ctx.total_derivative(&top, 0).unwrap_err();
        assert!(matches!(err, Error::JetOrder(_)), "got {err}");
        let ktop = ctx.connection_jet(0, 0, 0, &[1, 1]).unwrap();
        assert!(ctx.total_derivative(&ktop, 0).is_err());
    }

    #[test]
    fn total_derivatives_commute_through_the_volume_factor() {
        let ctx = JetContext::new(2).unwrap();
        let e = ctx
            .volume()
            .mul(&ctx.sigma(0, 1))
            .add(&ctx.connection(0, 1, 1).mul(&ctx.volume()));
        let d01 = ctx
            .total_derivative(&ctx.total_derivative(&e, 0).unwrap(), 1)
            .unwrap();
        let d10 = ctx
            .total_derivative(&ctx.total_derivative(&e, 1).unwrap(), 0)
            .unwrap();
        assert_proven(&d01.sub(&d10));
    }

    #[test]
    fn volume_rule_is_consistent_with_the_determinant() {
        // Jacobi: d_0 det = det · Σ_{αβ} σ_{αβ} σ^{αβ}_0 (all pairs).
        let ctx = JetContext::new(2).unwrap();
        let det = ctx.sigma_det().clone();
        let mut trace = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                trace.push(
                    ctx.sigma_lower(a, b)
                        .mul(&ctx.sigma_jet(a, b, &[0]).unwrap()),
                );
            }
        }
        let want = det.mul(&Expr::sum(trace));
        let got = ctx.total_derivative(&det, 0).unwrap();
        assert_proven(&got.sub(&want));
    }

    #[test]
    fn sigma_partial_weights_y_euler_homogeneity() {
        // Σ_{αβ} σ^{αβ} ∂det/∂σ^{αβ} = n · det for the degree-n determinant.
        for dim in [2usize, 3] {
            let ctx = JetContext::new(dim).unwrap();
            let det = ctx.sigma_det().clone();
            let mut sum = Vec::new();
            for a in 0..dim {
                for b in 0..dim {
                    sum.push(ctx.sigma(a, b).mul(&ctx.sigma_partial(&det, a, b)));
                }
            }
            let diff = Expr::sum(sum).sub(&det.mul(&Expr::int(dim as i64)));
            assert_proven(&diff);
        }
    }

    #[test]
    fn euler_lagrange_of_a_bare_coordinate() {
        let ctx = JetContext::new(2).unwrap();
        let l = LagrangianDensity::new(&ctx, ctx.sigma(0, 0)).unwrap();
        let el = euler_lagrange(&l).unwrap();
        assert!(el.metric(0, 0).is_one_literal());
        assert!(el.metric(0, 1).is_zero_literal());
        assert!(el.metric(1, 1).is_zero_literal());
        for mu in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    assert!(el.connection(mu, a, b).is_zero_literal());
                }
            }
        }
    }

    #[test]
    fn euler_lagrange_of_a_squared_first_jet() {
        // L = ½ (k_{01}^0_0)² gives 𝓔^1_0^0 = −k_{001}^0_0.
        let ctx = JetContext::new(2).unwrap();
        let jet = ctx.connection_jet(1, 0, 0, &[0]).unwrap();
        let l = LagrangianDensity::new(&ctx, jet.pow(2).mul(&Expr::rational(1, 2))).unwrap();
        let el = euler_lagrange(&l).unwrap();
        let want = ctx.connection_jet(1, 0, 0, &[0, 0]).unwrap().neg();
        assert_eq!(el.connection(1, 0, 0), &want);
        assert!(el.connection(0, 0, 0).is_zero_literal());
        assert!(el.metric(0, 0).is_zero_literal());
    }

    #[test]
    fn euler_lagrange_rejects_second_order_densities() {
        let ctx = JetContext::new(2).unwrap();
        let second = ctx.sigma_jet(0, 0, &[0, 1]).unwrap();
        let l = LagrangianDensity::new(&ctx, second).unwrap();
        assert!(matches!(euler_lagrange(&l), Err(Error::JetOrder(_))));
        let with_tau = LagrangianDensity::new(&ctx, ctx.translation(0)).unwrap();
        assert!(matches!(euler_lagrange(&with_tau), Err(Error::JetOrder(_))));
    }

    #[test]
    fn euler_lagrange_annihilates_total_divergences() {
        // 𝓔(d_λ F^λ) = 0 for first-order F^λ: spot-check one mixed F.
        let ctx = JetContext::new(2).unwrap();
        let f0 = ctx.sigma(0, 1).mul(&ctx.connection(1, 1, 0));
        let f1 = ctx.volume().mul(&ctx.sigma(1, 1));
        let div = ctx
            .total_derivative(&f0, 0)
            .unwrap()
            .add(&ctx.total_derivative(&f1, 1).unwrap());
        let l = LagrangianDensity::new(&ctx, div).unwrap();
        let el = euler_lagrange(&l).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert_proven(el.metric(a, b));
                for mu in 0..2 {
                    assert_proven(el.connection(mu, a, b));
                }
            }
        }
    }

    #[test]
    fn momentum_of_the_linear_curvature_density() {
        // π^{λν}_α^β(HE) = sq (δ^λ_α σ^{νβ} − δ^ν_α σ^{λβ}).
        let ctx = JetContext::new(2).unwrap();
        let l = hilbert_einstein(&ctx);
        for lam in 0..2 {
            for nu in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let mut want = Expr::zero();
                        if lam == a {
                            want = want.add(&ctx.volume().mul(&ctx.sigma(nu, b)));
                        }
                        if nu == a {
                            want = want.sub(&ctx.volume().mul(&ctx.sigma(lam, b)));
                        }
                        assert_proven(&l.momentum(lam, nu, a, b).sub(&want));
                    }
                }
            }
        }
    }

    #[test]
    fn momenta_are_antisymmetric_for_both_built_in_densities() {
        let ctx = JetContext::new(2).unwrap();
        for l in [hilbert_einstein(&ctx), yang_mills(&ctx)] {
            for lam in 0..2 {
                for nu in 0..2 {
                    for a in 0..2 {
                        for b in 0..2 {
                            let s = l.momentum(lam, nu, a, b).add(&l.momentum(nu, lam, a, b));
                            assert_proven(&s);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn velocity_derivative_identity_for_both_built_in_densities() {
        // ∂𝓛/∂k_ν^α_β = π^{λν}_α^σ k_λ^β_σ − π^{λν}_σ^β k_λ^σ_α.
        let ctx = JetContext::new(2).unwrap();
        for l in [hilbert_einstein(&ctx), yang_mills(&ctx)] {
            for nu in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let lhs = ctx.connection_partial(l.density(), nu, a, b);
                        let mut rhs = Vec::new();
                        for lam in 0..2 {
                            for s in 0..2 {
                                rhs.push(
                                    l.momentum(lam, nu, a, s).mul(&ctx.connection(lam, b, s)),
                                );
                                rhs.push(
                                    l.momentum(lam, nu, s, b)
                                        .mul(&ctx.connection(lam, s, a))
                                        .neg(),
                                );
                            }
                        }
                        assert_proven(&lhs.sub(&Expr::sum(rhs)));
                    }
                }
            }
        }
    }

    #[test]
    fn built_in_densities_vanish_at_the_flat_point() {
        for dim in [2usize, 3] {
            let ctx = JetContext::new(dim).unwrap();
            let flat = identities::flat_point_substitution(&ctx);
            assert!(hilbert_einstein(&ctx).density().subst(&flat).is_zero_literal());
            assert!(yang_mills(&ctx).density().subst(&flat).is_zero_literal());
        }
    }

    #[test]
    fn upgraded_contexts_extend_old_expressions() {
        let ctx = JetContext::with_orders(2, 1, 1).unwrap();
        let e = ctx.connection_jet(0, 0, 1, &[1]).unwrap();
        assert!(ctx.total_derivative(&e, 0).is_err());
        let up = ctx.upgraded(1, 2).unwrap();
        let d = up.total_derivative(&e, 0).unwrap();
        assert_eq!(d, up.connection_jet(0, 0, 1, &[0, 1]).unwrap());
        // Upgrading to the current orders is a no-op clone.
        let same = up.upgraded(1, 1).unwrap();
        assert_eq!(same.sigma_order(), up.sigma_order());
        assert_eq!(same.k_order(), up.k_order());
    }

    #[test]
    fn lagrangian_rejects_foreign_symbols() {
        let ctx = JetContext::new(2).unwrap();
        let foreign = Expr::var(&Symbol::new("zz9"));
        assert!(matches!(
            LagrangianDensity::new(&ctx, foreign),
            Err(Error::UnknownIdentifier(_))
        ));
    }

    #[test]
    fn ordering_weights() {
        assert_eq!(orderings(&[]), 1);
        assert_eq!(orderings(&[0]), 1);
        assert_eq!(orderings(&[0, 1]), 2);
        assert_eq!(orderings(&[1, 1]), 1);
        assert_eq!(orderings(&[0, 1, 2]), 6);
        assert_eq!(orderings(&[0, 0, 1]), 3);
        assert_eq!(orderings(&[2, 2, 2]), 1);
    }
}
