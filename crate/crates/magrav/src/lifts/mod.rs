//! Functorial lifts of base vector fields to natural bundles.
//!
//! A vector field `τ = τ^λ∂_λ` on the base induces a canonical ("functorial")
//! vector field on every natural bundle over it: tensor bundles, the frame
//! bundle, the bundle of world-connection coefficients, and the product of
//! the inverse-metric and connection bundles. The assignment `τ ↦ τ̃` is a
//! Lie-algebra monomorphism — brackets of lifts are lifts of brackets — and
//! that is the property the tests here pin down. The horizontal lift through
//! a fixed world connection is *not* a Lie-algebra morphism unless the
//! connection is flat; [`horizontal_lift`] exists to exhibit the failure.
//!
//! Fiber coordinates are formal indeterminates registered with
//! [`Role::Fiber`](crate::symexpr::Role): `dx…` for tensor components
//! (contravariant digits, then `_`, then covariant digits), `H{μ}{a}` for
//! frame matrices, `k{μ}{α}{β}` for connection coefficients and `si{α}{β}`
//! (with `α ≤ β`) for the symmetric inverse metric.

use crate::error::{Error, Result};
use crate::geometry::{index_tuples, Chart, WorldConnection};
use crate::symexpr::{is_zero, Expr, Role, Symbol, VarTable, Verdict, ZeroCfg};
use num::BigRational;
use std::fmt;

// ---------------------------------------------------------------------------
// Base vector fields
// ---------------------------------------------------------------------------

/// A vector field `τ = τ^λ ∂_λ` on the base chart.
#[derive(Debug, Clone)]
pub struct BaseVectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

impl BaseVectorField {
    /// A vector field from its components `τ^λ` in coordinate order.
    pub fn new(chart: &Chart, comps: Vec<Expr>) -> Result<BaseVectorField> {
        if comps.len() != chart.dim() {
            return Err(Error::Shape(format!(
                "expected {} vector components, got {}",
                chart.dim(),
                comps.len()
            )));
        }
        Ok(BaseVectorField {
            chart: chart.clone(),
            comps,
        })
    }

    /// Components produced by a function of the coordinate index.
    pub fn from_fn(chart: &Chart, mut f: impl FnMut(usize) -> Expr) -> BaseVectorField {
        let comps = (0..chart.dim()).map(&mut f).collect();
        BaseVectorField {
            chart: chart.clone(),
            comps,
        }
    }

    /// The coordinate vector field `∂_λ`.
    pub fn coordinate(chart: &Chart, lam: usize) -> Result<BaseVectorField> {
        if lam >= chart.dim() {
            return Err(Error::IndexRange {
                got: lam,
                dim: chart.dim(),
            });
        }
        Ok(BaseVectorField::from_fn(chart, |mu| {
            if mu == lam {
                Expr::one()
            } else {
                Expr::zero()
            }
        }))
    }

    /// The underlying chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// The component `τ^λ`.
    pub fn component(&self, lam: usize) -> Result<&Expr> {
        self.comps.get(lam).ok_or(Error::IndexRange {
            got: lam,
            dim: self.chart.dim(),
        })
    }

    /// All components in coordinate order.
    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// The Lie bracket `[τ, τ']^μ = τ^ν ∂_ν τ'^μ − τ'^ν ∂_ν τ^μ`.
    pub fn bracket(&self, other: &BaseVectorField) -> Result<BaseVectorField> {
        self.chart.expect_same(other.chart())?;
        let dim = self.chart.dim();
        let mut comps = Vec::with_capacity(dim);
        for mu in 0..dim {
            let mut terms = Vec::with_capacity(2 * dim);
            for nu in 0..dim {
                terms.push(self.comps[nu].mul(&self.chart.partial(&other.comps[mu], nu)?));
                terms.push(
                    other.comps[nu]
                        .mul(&self.chart.partial(&self.comps[mu], nu)?)
                        .neg(),
                );
            }
            comps.push(Expr::sum(terms));
        }
        BaseVectorField::new(&self.chart, comps)
    }

    /// The combination `a·self + b·other`.
    pub fn linear_combination(
        &self,
        a: &BigRational,
        other: &BaseVectorField,
        b: &BigRational,
    ) -> Result<BaseVectorField> {
        self.chart.expect_same(other.chart())?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(u, v)| u.scale(a).add(&v.scale(b)))
            .collect();
        BaseVectorField::new(&self.chart, comps)
    }
}

impl fmt::Display for BaseVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (mu, c) in self.comps.iter().enumerate() {
            if c.is_zero_literal() {
                continue;
            }
            if any {
                write!(f, " + ")?;
            }
            write!(f, "({c}) d_{mu}")?;
            any = true;
        }
        if !any {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Bundles and lifted fields
// ---------------------------------------------------------------------------

/// Which natural bundle a lifted field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bundle {
    /// The tensor bundle of valence `(contra, co)` with coordinates `ẋ^{…}_{…}`.
    Tensor { contra: usize, co: usize },
    /// The frame bundle with matrix coordinates `H^μ_a`.
    Frame,
    /// The bundle of world connections with coordinates `k_μ^α_β`.
    Connections,
    /// The product of inverse metrics `σ^{αβ}` and connections `k_μ^α_β`.
    MetricConnections,
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bundle::Tensor { contra, co } => write!(f, "tensor({contra},{co})"),
            Bundle::Frame => write!(f, "frame"),
            Bundle::Connections => write!(f, "connections"),
            Bundle::MetricConnections => write!(f, "metric-connections"),
        }
    }
}

/// A projectable vector field `u = τ^λ∂_λ + u^i(x, y)∂_i` on a bundle.
///
/// The base part always equals the lifted field's `τ^λ`; the fiber part is
/// one scalar per fiber coordinate, in a fixed canonical order.
#[derive(Debug, Clone)]
pub struct LiftedVectorField {
    chart: Chart,
    bundle: Bundle,
    table: VarTable,
    base: Vec<Expr>,
    fiber: Vec<(Symbol, Expr)>,
}

impl LiftedVectorField {
    /// The chart of the underlying base manifold.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// The bundle this field lives on.
    pub fn bundle(&self) -> Bundle {
        self.bundle
    }

    /// The variable table covering chart coordinates and fiber coordinates.
    pub fn table(&self) -> &VarTable {
        &self.table
    }

    /// The base components `τ^λ`.
    pub fn base_components(&self) -> &[Expr] {
        &self.base
    }

    /// Fiber components as `(coordinate, component)` pairs in canonical order.
    pub fn fiber_components(&self) -> &[(Symbol, Expr)] {
        &self.fiber
    }

    /// The fiber component on `∂/∂name`.
    pub fn fiber_component(&self, name: &str) -> Result<&Expr> {
        self.fiber
            .iter()
            .find(|(s, _)| s.as_str() == name)
            .map(|(_, e)| e)
            .ok_or_else(|| Error::UnknownIdentifier(name.to_string()))
    }

    fn expect_compatible(&self, other: &LiftedVectorField) -> Result<()> {
        self.chart.expect_same(other.chart())?;
        if self.bundle != other.bundle {
            return Err(Error::Shape(format!(
                "cannot combine fields on different bundles: {} vs {}",
                self.bundle, other.bundle
            )));
        }
        Ok(())
    }

    /// The commutator `[u, v]` of two fields on the same bundle.
    ///
    /// Both base and fiber parts follow the standard derivation rule
    /// `[u,v]^A = u^B ∂_B v^A − v^B ∂_B u^A` over all bundle coordinates
    /// (chart plus fiber).
    pub fn bracket(&self, other: &LiftedVectorField) -> Result<LiftedVectorField> {
        self.expect_compatible(other)?;
        let coords: Vec<Symbol> = self
            .chart
            .coords()
            .iter()
            .cloned()
            .chain(self.fiber.iter().map(|(s, _)| s.clone()))
            .collect();
        let u: Vec<&Expr> = self
            .base
            .iter()
            .chain(self.fiber.iter().map(|(_, e)| e))
            .collect();
        let v: Vec<&Expr> = other
            .base
            .iter()
            .chain(other.fiber.iter().map(|(_, e)| e))
            .collect();
        let comp = |a: usize| -> Expr {
            let mut terms = Vec::with_capacity(2 * coords.len());
            for b in 0..coords.len() {
                terms.push(u[b].mul(&v[a].diff(&coords[b])));
                terms.push(v[b].mul(&u[a].diff(&coords[b])).neg());
            }
            Expr::sum(terms)
        };
        let dim = self.chart.dim();
        let base = (0..dim).map(comp).collect();
        let fiber = self
            .fiber
            .iter()
            .enumerate()
            .map(|(i, (s, _))| (s.clone(), comp(dim + i)))
            .collect();
        Ok(LiftedVectorField {
            chart: self.chart.clone(),
            bundle: self.bundle,
            table: self.table.clone(),
            base,
            fiber,
        })
    }

    /// The combination `a·self + b·other` on the same bundle.
    pub fn linear_combination(
        &self,
        a: &BigRational,
        other: &LiftedVectorField,
        b: &BigRational,
    ) -> Result<LiftedVectorField> {
        self.expect_compatible(other)?;
        let cmb = |x: &Expr, y: &Expr| x.scale(a).add(&y.scale(b));
        let base = self.base.iter().zip(&other.base).map(|(x, y)| cmb(x, y)).collect();
        let fiber = self
            .fiber
            .iter()
            .zip(&other.fiber)
            .map(|((s, x), (_, y))| (s.clone(), cmb(x, y)))
            .collect();
        Ok(LiftedVectorField {
            chart: self.chart.clone(),
            bundle: self.bundle,
            table: self.table.clone(),
            base,
            fiber,
        })
    }

    /// Componentwise difference `self − other` on the same bundle.
    pub fn difference(&self, other: &LiftedVectorField) -> Result<LiftedVectorField> {
        self.linear_combination(
            &BigRational::from_integer(1.into()),
            other,
            &BigRational::from_integer((-1).into()),
        )
    }

    /// True when every component is the literal constant zero.
    pub fn is_zero_literal(&self) -> bool {
        self.base.iter().all(Expr::is_zero_literal)
            && self.fiber.iter().all(|(_, e)| e.is_zero_literal())
    }

    /// Combined zero verdict over all base and fiber components.
    pub fn is_zero(&self, cfg: &ZeroCfg) -> Result<Verdict> {
        let mut verdict = Verdict::ProvenZero;
        for e in self.base.iter().chain(self.fiber.iter().map(|(_, e)| e)) {
            verdict = verdict.combine(is_zero(e, cfg)?);
            if !verdict.is_zero() {
                break;
            }
        }
        Ok(verdict)
    }
}

impl fmt::Display for LiftedVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (mu, c) in self.base.iter().enumerate() {
            if c.is_zero_literal() {
                continue;
            }
            if any {
                write!(f, " + ")?;
            }
            write!(f, "({c}) d_x{mu}")?;
            any = true;
        }
        for (s, c) in &self.fiber {
            if c.is_zero_literal() {
                continue;
            }
            if any {
                write!(f, " + ")?;
            }
            write!(f, "({c}) d_{s}")?;
            any = true;
        }
        if !any {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Fiber coordinate tables
// ---------------------------------------------------------------------------

fn digits(idx: &[usize]) -> String {
    idx.iter().map(|i| i.to_string()).collect()
}

fn tensor_symbol(contra: usize, idx: &[usize]) -> Symbol {
    let (up, down) = idx.split_at(contra);
    let mut name = format!("dx{}", digits(up));
    if !down.is_empty() {
        name.push('_');
        name.push_str(&digits(down));
    }
    Symbol::new(&name)
}

fn frame_symbol(mu: usize, a: usize) -> Symbol {
    Symbol::new(&format!("H{mu}{a}"))
}

fn connection_symbol(mu: usize, al: usize, be: usize) -> Symbol {
    Symbol::new(&format!("k{mu}{al}{be}"))
}

fn sigma_symbol(a: usize, b: usize) -> Symbol {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    Symbol::new(&format!("si{lo}{hi}"))
}

fn extend_table(chart: &Chart, fiber: &[Symbol]) -> Result<VarTable> {
    let mut table = chart.table().clone();
    for s in fiber {
        table.add(s.clone(), Role::Fiber)?;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// The lifts
// ---------------------------------------------------------------------------

/// Lift `τ` to the tensor bundle of valence `(contra, co)`:
/// `τ̃ = τ^μ∂_μ + [∂_ν τ^{α_1} ẋ^{να_2…}_{β…} + … − ∂_{β_1} τ^ν ẋ^{…}_{νβ_2…} − …] ∂̇`.
pub fn lift_tensor(tau: &BaseVectorField, contra: usize, co: usize) -> Result<LiftedVectorField> {
    if contra + co == 0 {
        return Err(Error::Shape(
            "tensor bundle lift needs valence (m,k) with m + k >= 1".to_string(),
        ));
    }
    let chart = tau.chart().clone();
    let dim = chart.dim();
    let tuples = index_tuples(contra + co, dim);
    let syms: Vec<Symbol> = tuples.iter().map(|t| tensor_symbol(contra, t)).collect();
    let table = extend_table(&chart, &syms)?;
    let var_at = |idx: &[usize]| Expr::var(&tensor_symbol(contra, idx));
    let mut fiber = Vec::with_capacity(tuples.len());
    for (tuple, sym) in tuples.iter().zip(&syms) {
        let mut terms = Vec::new();
        for slot in 0..contra {
            for nu in 0..dim {
                let mut swapped = tuple.clone();
                swapped[slot] = nu;
                let d = chart.partial(tau.component(tuple[slot])?, nu)?;
                terms.push(d.mul(&var_at(&swapped)));
            }
        }
        for slot in contra..contra + co {
            for nu in 0..dim {
                let mut swapped = tuple.clone();
                swapped[slot] = nu;
                let d = chart.partial(tau.component(nu)?, tuple[slot])?;
                terms.push(d.mul(&var_at(&swapped)).neg());
            }
        }
        fiber.push((sym.clone(), Expr::sum(terms)));
    }
    Ok(LiftedVectorField {
        chart,
        bundle: Bundle::Tensor { contra, co },
        table,
        base: tau.components().to_vec(),
        fiber,
    })
}

/// Lift `τ` to the frame bundle: `τ̃ = τ^μ∂_μ + ∂_ν τ^α H^ν_a ∂/∂H^α_a`.
pub fn lift_frame(tau: &BaseVectorField) -> Result<LiftedVectorField> {
    let chart = tau.chart().clone();
    let dim = chart.dim();
    let mut syms = Vec::with_capacity(dim * dim);
    for mu in 0..dim {
        for a in 0..dim {
            syms.push(frame_symbol(mu, a));
        }
    }
    let table = extend_table(&chart, &syms)?;
    let mut fiber = Vec::with_capacity(dim * dim);
    for al in 0..dim {
        for a in 0..dim {
            let mut terms = Vec::with_capacity(dim);
            for nu in 0..dim {
                let d = chart.partial(tau.component(al)?, nu)?;
                terms.push(d.mul(&Expr::var(&frame_symbol(nu, a))));
            }
            fiber.push((frame_symbol(al, a), Expr::sum(terms)));
        }
    }
    Ok(LiftedVectorField {
        chart,
        bundle: Bundle::Frame,
        table,
        base: tau.components().to_vec(),
        fiber,
    })
}

// The connection-bundle fiber component on ∂/∂k_μ^α_β:
//   ∂_ν τ^α k_μ^ν_β − ∂_β τ^ν k_μ^α_ν − ∂_μ τ^ν k_ν^α_β + ∂_{μβ} τ^α.
fn connection_component(
    tau: &BaseVectorField,
    mu: usize,
    al: usize,
    be: usize,
) -> Result<Expr> {
    let chart = tau.chart();
    let dim = chart.dim();
    let kvar = |m: usize, a: usize, b: usize| Expr::var(&connection_symbol(m, a, b));
    let mut terms = Vec::with_capacity(3 * dim + 1);
    for nu in 0..dim {
        terms.push(chart.partial(tau.component(al)?, nu)?.mul(&kvar(mu, nu, be)));
        terms.push(
            chart
                .partial(tau.component(nu)?, be)?
                .mul(&kvar(mu, al, nu))
                .neg(),
        );
        terms.push(
            chart
                .partial(tau.component(nu)?, mu)?
                .mul(&kvar(nu, al, be))
                .neg(),
        );
    }
    terms.push(chart.partial(&chart.partial(tau.component(al)?, mu)?, be)?);
    Ok(Expr::sum(terms))
}

/// Lift `τ` to the bundle of world connections:
/// `τ̃_C = τ^μ∂_μ + [∂_ν τ^α k_μ^ν_β − ∂_β τ^ν k_μ^α_ν − ∂_μ τ^ν k_ν^α_β + ∂_{μβ} τ^α] ∂/∂k_μ^α_β`.
pub fn lift_connection_bundle(tau: &BaseVectorField) -> Result<LiftedVectorField> {
    let chart = tau.chart().clone();
    let dim = chart.dim();
    let mut syms = Vec::with_capacity(dim.pow(3));
    for mu in 0..dim {
        for al in 0..dim {
            for be in 0..dim {
                syms.push(connection_symbol(mu, al, be));
            }
        }
    }
    let table = extend_table(&chart, &syms)?;
    let mut fiber = Vec::with_capacity(syms.len());
    for mu in 0..dim {
        for al in 0..dim {
            for be in 0..dim {
                fiber.push((
                    connection_symbol(mu, al, be),
                    connection_component(tau, mu, al, be)?,
                ));
            }
        }
    }
    Ok(LiftedVectorField {
        chart,
        bundle: Bundle::Connections,
        table,
        base: tau.components().to_vec(),
        fiber,
    })
}

/// Lift `τ` to the product of the inverse-metric and connection bundles:
/// the generator of general covariant transformations,
/// `τ̃_{ΣC} = τ^μ∂_μ + (σ^{νβ}∂_ν τ^α + σ^{αν}∂_ν τ^β) ∂/∂σ^{αβ} + (… as τ̃_C …) ∂/∂k_μ^α_β`.
pub fn lift_sigma_c(tau: &BaseVectorField) -> Result<LiftedVectorField> {
    let chart = tau.chart().clone();
    let dim = chart.dim();
    let mut syms = Vec::new();
    for a in 0..dim {
        for b in a..dim {
            syms.push(sigma_symbol(a, b));
        }
    }
    for mu in 0..dim {
        for al in 0..dim {
            for be in 0..dim {
                syms.push(connection_symbol(mu, al, be));
            }
        }
    }
    let table = extend_table(&chart, &syms)?;
    let svar = |a: usize, b: usize| Expr::var(&sigma_symbol(a, b));
    let mut fiber = Vec::with_capacity(syms.len());
    for a in 0..dim {
        for b in a..dim {
            let mut terms = Vec::with_capacity(2 * dim);
            for nu in 0..dim {
                terms.push(svar(nu, b).mul(&chart.partial(tau.component(a)?, nu)?));
                terms.push(svar(a, nu).mul(&chart.partial(tau.component(b)?, nu)?));
            }
            fiber.push((sigma_symbol(a, b), Expr::sum(terms)));
        }
    }
    for mu in 0..dim {
        for al in 0..dim {
            for be in 0..dim {
                fiber.push((
                    connection_symbol(mu, al, be),
                    connection_component(tau, mu, al, be)?,
                ));
            }
        }
    }
    Ok(LiftedVectorField {
        chart,
        bundle: Bundle::MetricConnections,
        table,
        base: tau.components().to_vec(),
        fiber,
    })
}

/// The horizontal lift of `τ` through a world connection, on the tangent
/// bundle: `Γτ = τ^λ(∂_λ + Γ_λ^μ_ν ẋ^ν ∂̇_μ)`.
///
/// Unlike the functorial lifts this is merely `C^∞(X)`-linear, not a
/// Lie-algebra morphism: brackets pick up a curvature obstruction unless the
/// connection is flat.
pub fn horizontal_lift(
    tau: &BaseVectorField,
    gamma: &WorldConnection,
) -> Result<LiftedVectorField> {
    tau.chart().expect_same(gamma.chart())?;
    let chart = tau.chart().clone();
    let dim = chart.dim();
    let tuples = index_tuples(1, dim);
    let syms: Vec<Symbol> = tuples.iter().map(|t| tensor_symbol(1, t)).collect();
    let table = extend_table(&chart, &syms)?;
    let mut fiber = Vec::with_capacity(dim);
    for mu in 0..dim {
        let mut terms = Vec::with_capacity(dim * dim);
        for lam in 0..dim {
            for nu in 0..dim {
                terms.push(
                    tau.component(lam)?
                        .mul(gamma.get(lam, mu, nu))
                        .mul(&Expr::var(&tensor_symbol(1, &[nu]))),
                );
            }
        }
        fiber.push((tensor_symbol(1, &[mu]), Expr::sum(terms)));
    }
    Ok(LiftedVectorField {
        chart,
        bundle: Bundle::Tensor { contra: 1, co: 0 },
        table,
        base: tau.components().to_vec(),
        fiber,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Chart;

    fn chart2() -> Chart {
        Chart::new(2).unwrap()
    }

    fn field(chart: &Chart, comps: &[&str]) -> BaseVectorField {
        BaseVectorField::new(
            chart,
            comps.iter().map(|s| chart.parse(s).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_fields_lift_horizontally_everywhere() {
        let chart = chart2();
        let tau = BaseVectorField::coordinate(&chart, 0).unwrap();
        for lifted in [
            lift_tensor(&tau, 1, 0).unwrap(),
            lift_tensor(&tau, 0, 2).unwrap(),
            lift_frame(&tau).unwrap(),
            lift_connection_bundle(&tau).unwrap(),
            lift_sigma_c(&tau).unwrap(),
        ] {
            assert_eq!(lifted.base_components(), tau.components());
            assert!(lifted.fiber_components().iter().all(|(_, e)| e.is_zero_literal()));
        }
    }

    #[test]
    fn tangent_and_cotangent_lifts_match_hand_values() {
        let chart = chart2();
        // τ = x¹∂_0 on the tangent bundle: component on ẋ⁰ is ẋ¹.
        let tau = field(&chart, &["x1", "0"]);
        let lifted = lift_tensor(&tau, 1, 0).unwrap();
        assert_eq!(lifted.fiber_component("dx0").unwrap().to_string(), "dx1");
        assert!(lifted.fiber_component("dx1").unwrap().is_zero_literal());
        // τ = x⁰∂_0 on the cotangent bundle: component on ẋ_0 is −ẋ_0.
        let tau = field(&chart, &["x0", "0"]);
        let lifted = lift_tensor(&tau, 0, 1).unwrap();
        assert_eq!(lifted.fiber_component("dx_0").unwrap().to_string(), "-dx_0");
        assert!(lifted.fiber_component("dx_1").unwrap().is_zero_literal());
        // Valence (0,0) is rejected.
        assert!(matches!(lift_tensor(&tau, 0, 0), Err(Error::Shape(_))));
    }

    #[test]
    fn frame_lift_mixes_rows_by_the_jacobian() {
        let chart = chart2();
        // τ = x⁰∂_1: the fiber component on ∂/∂H^1_a is H^0_a.
        let tau = field(&chart, &["0", "x0"]);
        let lifted = lift_frame(&tau).unwrap();
        for a in 0..2 {
            assert_eq!(
                lifted.fiber_component(&format!("H1{a}")).unwrap().to_string(),
                format!("H0{a}")
            );
            assert!(lifted.fiber_component(&format!("H0{a}")).unwrap().is_zero_literal());
        }
    }

    #[test]
    fn connection_lift_of_a_linear_field_is_homogeneous() {
        let chart = chart2();
        let tau = field(&chart, &["x0", "0"]);
        let lifted = lift_connection_bundle(&tau).unwrap();
        // No second derivatives: every component is linear homogeneous in k.
        assert_eq!(lifted.fiber_component("k101").unwrap().to_string(), "k101");
        assert_eq!(
            lifted.fiber_component("k010").unwrap().to_string(),
            "-2*k010"
        );
    }

    #[test]
    fn connection_lift_of_a_quadratic_field_matches_the_expansion_oracle() {
        let chart = chart2();
        let tau = field(&chart, &["x0^2", "0"]);
        let lifted = lift_connection_bundle(&tau).unwrap();
        let expect = [
            ("k000", "2 - 2*k000*x0"),
            ("k010", "-4*k010*x0"),
            ("k011", "-2*k011*x0"),
            ("k101", "2*k101*x0"),
            ("k110", "-2*k110*x0"),
        ];
        for (name, want) in expect {
            assert_eq!(lifted.fiber_component(name).unwrap().to_string(), want);
        }
        for name in ["k001", "k100", "k111"] {
            assert!(lifted.fiber_component(name).unwrap().is_zero_literal());
        }
    }

    #[test]
    fn sigma_part_doubles_on_the_diagonal() {
        let chart = chart2();
        // τ = x¹∂_0: the component on σ^{00} is 2σ^{01}.
        let tau = field(&chart, &["x1", "0"]);
        let lifted = lift_sigma_c(&tau).unwrap();
        assert_eq!(lifted.fiber_component("si00").unwrap().to_string(), "2*si01");
        // σ^{01} gets the single term σ^{11}.
        assert_eq!(lifted.fiber_component("si01").unwrap().to_string(), "si11");
        assert!(lifted.fiber_component("si11").unwrap().is_zero_literal());
    }

    #[test]
    fn coordinate_lifts_commute() {
        let chart = chart2();
        let t0 = BaseVectorField::coordinate(&chart, 0).unwrap();
        let t1 = BaseVectorField::coordinate(&chart, 1).unwrap();
        let b = lift_tensor(&t0, 1, 1)
            .unwrap()
            .bracket(&lift_tensor(&t1, 1, 1).unwrap())
            .unwrap();
        assert!(b.is_zero_literal());
    }

    #[test]
    fn tensor_lift_is_a_lie_algebra_morphism_on_a_hand_pair() {
        let chart = chart2();
        let tau = field(&chart, &["0", "x0"]);
        let tau2 = field(&chart, &["x1", "0"]);
        // [τ, τ'] = x⁰∂_0 − x¹∂_1.
        let base = tau.bracket(&tau2).unwrap();
        assert_eq!(base.component(0).unwrap().to_string(), "x0");
        assert_eq!(base.component(1).unwrap().to_string(), "-x1");
        let lhs = lift_tensor(&tau, 1, 1)
            .unwrap()
            .bracket(&lift_tensor(&tau2, 1, 1).unwrap())
            .unwrap();
        let rhs = lift_tensor(&base, 1, 1).unwrap();
        let diff = lhs.difference(&rhs).unwrap();
        assert!(diff.is_zero(&ZeroCfg::default()).unwrap().is_proven());
    }

    #[test]
    fn connection_lift_is_a_lie_algebra_morphism_for_quadratic_fields() {
        let chart = chart2();
        let tau = field(&chart, &["x0^2", "x0*x1"]);
        let tau2 = field(&chart, &["x1", "x1^2"]);
        let lhs = lift_connection_bundle(&tau)
            .unwrap()
            .bracket(&lift_connection_bundle(&tau2).unwrap())
            .unwrap();
        let rhs = lift_connection_bundle(&tau.bracket(&tau2).unwrap()).unwrap();
        let diff = lhs.difference(&rhs).unwrap();
        assert!(diff.is_zero(&ZeroCfg::default()).unwrap().is_proven());
    }

    #[test]
    fn sigma_c_lift_is_a_lie_algebra_morphism_for_quadratic_fields() {
        let chart = chart2();
        let tau = field(&chart, &["x0*x1", "x1^2"]);
        let tau2 = field(&chart, &["x0", "x0^2"]);
        let lhs = lift_sigma_c(&tau)
            .unwrap()
            .bracket(&lift_sigma_c(&tau2).unwrap())
            .unwrap();
        let rhs = lift_sigma_c(&tau.bracket(&tau2).unwrap()).unwrap();
        let diff = lhs.difference(&rhs).unwrap();
        assert!(diff.is_zero(&ZeroCfg::default()).unwrap().is_proven());
    }

    #[test]
    fn lifts_are_linear_in_the_base_field() {
        let chart = chart2();
        let tau = field(&chart, &["x0^2", "x1"]);
        let tau2 = field(&chart, &["x1^2", "x0*x1"]);
        let a = BigRational::new(3.into(), 2.into());
        let b = BigRational::from_integer((-2).into());
        let combined = tau.linear_combination(&a, &tau2, &b).unwrap();
        let lhs = lift_connection_bundle(&combined).unwrap();
        let rhs = lift_connection_bundle(&tau)
            .unwrap()
            .linear_combination(&a, &lift_connection_bundle(&tau2).unwrap(), &b)
            .unwrap();
        // Products of combined Jacobians against fiber variables associate
        // differently on the two sides, so equality needs the exact expansion
        // proof rather than literal comparison.
        let diff = lhs.difference(&rhs).unwrap();
        assert!(diff.is_zero(&ZeroCfg::default()).unwrap().is_proven());
    }

    #[test]
    fn mismatched_bundles_cannot_be_bracketed() {
        let chart = chart2();
        let tau = BaseVectorField::coordinate(&chart, 0).unwrap();
        let u = lift_frame(&tau).unwrap();
        let v = lift_connection_bundle(&tau).unwrap();
        assert!(matches!(u.bracket(&v), Err(Error::Shape(_))));
    }

    #[test]
    fn horizontal_lift_fails_to_be_a_morphism_for_curved_connections() {
        let chart = chart2();
        // Γ_1^1_1 = x⁰ has curvature: R_{01}^1_1 contains ∂_0 Γ_1^1_1 = 1.
        let gamma = WorldConnection::from_fn(&chart, |lam, mu, nu| {
            if (lam, mu, nu) == (1, 1, 1) {
                chart.parse("x0").unwrap()
            } else {
                Expr::zero()
            }
        });
        let t0 = BaseVectorField::coordinate(&chart, 0).unwrap();
        let t1 = BaseVectorField::coordinate(&chart, 1).unwrap();
        let lhs = horizontal_lift(&t0, &gamma)
            .unwrap()
            .bracket(&horizontal_lift(&t1, &gamma).unwrap())
            .unwrap();
        // [∂_0, ∂_1] = 0, so a morphism would give the zero field; instead the
        // bracket picks up the curvature term ẋ¹∂̇_1.
        let rhs = horizontal_lift(&t0.bracket(&t1).unwrap(), &gamma).unwrap();
        let diff = lhs.difference(&rhs).unwrap();
        let verdict = diff.is_zero(&ZeroCfg::default()).unwrap();
        assert!(!verdict.is_zero(), "curved horizontal lift looked flat");
        assert_eq!(diff.fiber_component("dx1").unwrap().to_string(), "dx1");
    }
}
