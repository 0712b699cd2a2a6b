//! Charts, tensor fields, metrics, tetrads and the connection calculus.
//!
//! All geometry lives on a single coordinate chart: a fixed dimension
//! (2 to 4) with coordinates `x0..x{dim-1}` plus optional scalar parameters
//! (for example a mass). Tensor components are exact symbolic scalars; the
//! operations in [`connection`] and [`tetrad`] implement one consistent set
//! of sign conventions, documented there, with an explicit converter to the
//! common textbook convention.

pub mod connection;
pub mod metric;
pub mod tetrad;

pub use connection::{
    cartan_connection, christoffel, contorsion, curvature, decompose, metric_connection,
    nonmetricity, ricci, scalar_curvature, symmetric_part, torsion, AffineWorldConnection,
    Decomposition, RicciPair, WorldConnection,
};
pub use metric::{MetricField, Signature};
pub use tetrad::{
    integrability_check, lorentz_connection, lorentz_world_connection, metric_from_tetrad,
    riemannian_from_tetrad, spacetime_metric, LorentzConnection, TetradField,
};

use crate::error::{Error, Result};
use crate::symexpr::{Expr, Role, Symbol, VarTable};
use std::fmt;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Charts
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct ChartData {
    dim: usize,
    coords: Vec<Symbol>,
    params: Vec<Symbol>,
    table: VarTable,
    oriented: bool,
}

/// A single coordinate chart: the common context of every tensor field.
///
/// Cloning is cheap (shared pointer); two charts compare equal when they
/// have the same dimension, coordinates and parameters.
#[derive(Clone, Debug)]
pub struct Chart(Arc<ChartData>);

impl Chart {
    /// A chart of the given dimension with coordinates `x0..x{dim-1}`.
    pub fn new(dim: usize) -> Result<Chart> {
        Chart::with_params(dim, &[])
    }

    /// A chart with additional scalar parameters (constants under all
    /// coordinate derivatives, e.g. a symbolic mass).
    pub fn with_params(dim: usize, params: &[&str]) -> Result<Chart> {
        if !(2..=4).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        let mut table = VarTable::new();
        let mut coords = Vec::with_capacity(dim);
        for mu in 0..dim {
            let s = Symbol::new(&format!("x{mu}"));
            table.add(s.clone(), Role::Chart(mu))?;
            coords.push(s);
        }
        let mut ps = Vec::with_capacity(params.len());
        for name in params {
            let s = Symbol::new(name);
            table.add(s.clone(), Role::Param)?;
            ps.push(s);
        }
        Ok(Chart(Arc::new(ChartData {
            dim,
            coords,
            params: ps,
            table,
            oriented: true,
        })))
    }

    /// The chart dimension.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// The `mu`-th coordinate symbol.
    pub fn coord(&self, mu: usize) -> Result<&Symbol> {
        self.0.coords.get(mu).ok_or(Error::IndexRange {
            got: mu,
            dim: self.0.dim,
        })
    }

    /// All coordinate symbols in order.
    pub fn coords(&self) -> &[Symbol] {
        &self.0.coords
    }

    /// The declared parameter symbols.
    pub fn params(&self) -> &[Symbol] {
        &self.0.params
    }

    /// The variable table (coordinates plus parameters).
    pub fn table(&self) -> &VarTable {
        &self.0.table
    }

    /// Whether the chart is taken as positively oriented.
    pub fn oriented(&self) -> bool {
        self.0.oriented
    }

    /// Parse a scalar expression over this chart's variables.
    pub fn parse(&self, src: &str) -> Result<Expr> {
        crate::symexpr::parse::parse(src, &self.0.table)
    }

    /// Partial derivative along the `mu`-th coordinate.
    pub fn partial(&self, e: &Expr, mu: usize) -> Result<Expr> {
        Ok(e.diff(self.coord(mu)?))
    }

    /// Error unless `other` is the same chart.
    pub fn expect_same(&self, other: &Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "operands live on different charts (dim {} vs dim {})",
                self.dim(),
                other.dim()
            )))
        }
    }
}

impl PartialEq for Chart {
    fn eq(&self, other: &Chart) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.dim == other.0.dim
                && self.0.coords == other.0.coords
                && self.0.params == other.0.params)
    }
}

impl Eq for Chart {}

// ---------------------------------------------------------------------------
// Tensor fields
// ---------------------------------------------------------------------------

/// A declared symmetry between two index slots (in storage order:
/// contravariant slots first, then covariant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotSymmetry {
    /// Components equal under slot exchange.
    Symmetric(usize, usize),
    /// Components negate under slot exchange.
    Antisymmetric(usize, usize),
}

/// A tensor field of valence `(p, q)`: `p` contravariant and `q` covariant
/// slots, with a dense array of `dim^(p+q)` scalar components.
///
/// Components are stored row-major with contravariant slots first. Declared
/// slot symmetries are verified on construction against the canonical forms
/// of the components.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    chart: Chart,
    contra: usize,
    co: usize,
    components: Vec<Expr>,
    symmetries: Vec<SlotSymmetry>,
}

impl TensorField {
    /// Build a tensor from an explicit component array (row-major, length
    /// `dim^(p+q)`), verifying any declared slot symmetries.
    pub fn new(
        chart: &Chart,
        contra: usize,
        co: usize,
        components: Vec<Expr>,
        symmetries: Vec<SlotSymmetry>,
    ) -> Result<TensorField> {
        let rank = contra + co;
        let want = chart.dim().pow(rank as u32);
        if components.len() != want {
            return Err(Error::Shape(format!(
                "expected {want} components for a ({contra},{co}) tensor in dimension {}, got {}",
                chart.dim(),
                components.len()
            )));
        }
        let t = TensorField {
            chart: chart.clone(),
            contra,
            co,
            components,
            symmetries,
        };
        t.verify_symmetries()?;
        Ok(t)
    }

    /// Build a tensor by evaluating `f` on every index tuple.
    pub fn from_fn(
        chart: &Chart,
        contra: usize,
        co: usize,
        symmetries: Vec<SlotSymmetry>,
        mut f: impl FnMut(&[usize]) -> Expr,
    ) -> Result<TensorField> {
        let rank = contra + co;
        let dim = chart.dim();
        let mut components = Vec::with_capacity(dim.pow(rank as u32));
        let mut idx = vec![0usize; rank];
        loop {
            components.push(f(&idx));
            if !advance(&mut idx, dim) {
                break;
            }
        }
        TensorField::new(chart, contra, co, components, symmetries)
    }

    /// The zero tensor of the given valence.
    pub fn zeros(chart: &Chart, contra: usize, co: usize) -> TensorField {
        let rank = contra + co;
        TensorField {
            chart: chart.clone(),
            contra,
            co,
            components: vec![Expr::zero(); chart.dim().pow(rank as u32)],
            symmetries: Vec::new(),
        }
    }

    /// The identity (1,1) tensor δ^μ_ν.
    pub fn delta(chart: &Chart) -> TensorField {
        TensorField::from_fn(chart, 1, 1, Vec::new(), |idx| {
            if idx[0] == idx[1] {
                Expr::one()
            } else {
                Expr::zero()
            }
        })
        .expect("identity tensor is well-formed")
    }

    fn verify_symmetries(&self) -> Result<()> {
        let rank = self.contra + self.co;
        for sym in &self.symmetries {
            let (a, b, want_sign) = match *sym {
                SlotSymmetry::Symmetric(a, b) => (a, b, 1),
                SlotSymmetry::Antisymmetric(a, b) => (a, b, -1),
            };
            if a >= rank || b >= rank || a == b {
                return Err(Error::Symmetry(format!(
                    "slot pair ({a},{b}) invalid for a rank-{rank} tensor"
                )));
            }
            let mut idx = vec![0usize; rank];
            loop {
                let mut swapped = idx.clone();
                swapped.swap(a, b);
                let lhs = self.get(&idx)?;
                let rhs = self.get(&swapped)?;
                let expect = if want_sign == 1 { rhs.clone() } else { rhs.neg() };
                if lhs != &expect {
                    return Err(Error::Symmetry(format!(
                        "component {idx:?} vs {swapped:?}: `{lhs}` does not match the declared {} symmetry",
                        if want_sign == 1 { "symmetric" } else { "antisymmetric" },
                    )));
                }
                if !advance(&mut idx, self.chart.dim()) {
                    break;
                }
            }
        }
        Ok(())
    }

    /// The chart this field lives on.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Valence `(p, q)`.
    pub fn valence(&self) -> (usize, usize) {
        (self.contra, self.co)
    }

    /// Declared slot symmetries.
    pub fn symmetries(&self) -> &[SlotSymmetry] {
        &self.symmetries
    }

    /// Component at an index tuple (contravariant slots first).
    pub fn get(&self, idx: &[usize]) -> Result<&Expr> {
        Ok(&self.components[self.offset(idx)?])
    }

    fn offset(&self, idx: &[usize]) -> Result<usize> {
        let rank = self.contra + self.co;
        if idx.len() != rank {
            return Err(Error::Shape(format!(
                "index tuple of length {} for a rank-{rank} tensor",
                idx.len()
            )));
        }
        let dim = self.chart.dim();
        let mut off = 0usize;
        for &i in idx {
            if i >= dim {
                return Err(Error::IndexRange { got: i, dim });
            }
            off = off * dim + i;
        }
        Ok(off)
    }

    /// All components in storage order.
    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Iterate `(index-tuple, component)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &Expr)> {
        let rank = self.contra + self.co;
        let dim = self.chart.dim();
        self.components.iter().enumerate().map(move |(off, c)| {
            let mut idx = vec![0usize; rank];
            let mut rem = off;
            for slot in (0..rank).rev() {
                idx[slot] = rem % dim;
                rem /= dim;
            }
            (idx, c)
        })
    }

    /// Componentwise sum. Symmetries common to both declarations survive.
    pub fn add(&self, other: &TensorField) -> Result<TensorField> {
        self.chart.expect_same(&other.chart)?;
        if self.valence() != other.valence() {
            return Err(Error::Shape(format!(
                "cannot add a {:?} tensor to a {:?} tensor",
                self.valence(),
                other.valence()
            )));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect();
        let symmetries = self
            .symmetries
            .iter()
            .copied()
            .filter(|s| other.symmetries.contains(s))
            .collect();
        TensorField::new(&self.chart, self.contra, self.co, components, symmetries)
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &TensorField) -> Result<TensorField> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Multiply every component by a scalar.
    pub fn scale(&self, s: &Expr) -> TensorField {
        TensorField {
            chart: self.chart.clone(),
            contra: self.contra,
            co: self.co,
            components: self.components.iter().map(|c| c.mul(s)).collect(),
            symmetries: self.symmetries.clone(),
        }
    }

    /// Apply `f` to every component, dropping symmetry declarations (the
    /// image need not respect them).
    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> TensorField {
        TensorField {
            chart: self.chart.clone(),
            contra: self.contra,
            co: self.co,
            components: self.components.iter().map(|c| f(c)).collect(),
            symmetries: Vec::new(),
        }
    }

    /// True if every component is the literal zero.
    pub fn is_zero_literal(&self) -> bool {
        self.components.iter().all(|c| c.is_zero_literal())
    }

    /// Zero-test every component and combine the verdicts: any nonzero
    /// component wins, otherwise the weakest zero verdict is reported.
    pub fn is_zero(&self, cfg: &crate::symexpr::ZeroCfg) -> Result<crate::symexpr::Verdict> {
        let mut verdict = crate::symexpr::Verdict::ProvenZero;
        for c in &self.components {
            verdict = verdict.combine(crate::symexpr::zerotest::is_zero(c, cfg)?);
            if !verdict.is_zero() {
                break;
            }
        }
        Ok(verdict)
    }
}

impl fmt::Display for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, q) = self.valence();
        writeln!(f, "({p},{q}) tensor on dim-{} chart:", self.chart.dim())?;
        let mut any = false;
        for (idx, c) in self.iter() {
            if !c.is_zero_literal() {
                any = true;
                let tag: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                writeln!(f, "  [{}] = {c}", tag.join(","))?;
            }
        }
        if !any {
            writeln!(f, "  (all components zero)")?;
        }
        Ok(())
    }
}

/// Advance a mixed-radix index tuple; false when it wraps to all zeros.
pub(crate) fn advance(idx: &mut [usize], dim: usize) -> bool {
    for slot in (0..idx.len()).rev() {
        idx[slot] += 1;
        if idx[slot] < dim {
            return true;
        }
        idx[slot] = 0;
    }
    false
}

/// Iterate all index tuples of the given rank.
pub(crate) fn index_tuples(rank: usize, dim: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(dim.pow(rank as u32));
    let mut idx = vec![0usize; rank];
    loop {
        out.push(idx.clone());
        if !advance(&mut idx, dim) {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_construction_and_bounds() {
        let c = Chart::new(3).unwrap();
        assert_eq!(c.dim(), 3);
        assert_eq!(c.coord(2).unwrap().to_string(), "x2");
        assert!(matches!(c.coord(3), Err(Error::IndexRange { .. })));
        assert!(matches!(Chart::new(1), Err(Error::BadDimension(1))));
        assert!(matches!(Chart::new(5), Err(Error::BadDimension(5))));
    }

    #[test]
    fn charts_compare_by_structure() {
        let a = Chart::new(2).unwrap();
        let b = Chart::new(2).unwrap();
        let c = Chart::new(3).unwrap();
        let d = Chart::with_params(2, &["m"]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn tensor_shape_is_enforced() {
        let c = Chart::new(2).unwrap();
        let bad = TensorField::new(&c, 0, 2, vec![Expr::zero(); 3], Vec::new());
        assert!(matches!(bad, Err(Error::Shape(_))));
    }

    #[test]
    fn declared_symmetries_are_checked() {
        let c = Chart::new(2).unwrap();
        let x0 = c.parse("x0").unwrap();
        // Symmetric matrix [[0, x0], [x0, 0]].
        let ok = TensorField::new(
            &c,
            0,
            2,
            vec![Expr::zero(), x0.clone(), x0.clone(), Expr::zero()],
            vec![SlotSymmetry::Symmetric(0, 1)],
        );
        assert!(ok.is_ok());
        let bad = TensorField::new(
            &c,
            0,
            2,
            vec![Expr::zero(), x0.clone(), x0.neg(), Expr::zero()],
            vec![SlotSymmetry::Symmetric(0, 1)],
        );
        assert!(matches!(bad, Err(Error::Symmetry(_))));
        let anti = TensorField::new(
            &c,
            0,
            2,
            vec![Expr::zero(), x0.clone(), x0.neg(), Expr::zero()],
            vec![SlotSymmetry::Antisymmetric(0, 1)],
        );
        assert!(anti.is_ok());
    }

    #[test]
    fn indexing_round_trips() {
        let c = Chart::new(3).unwrap();
        let t = TensorField::from_fn(&c, 1, 1, Vec::new(), |idx| {
            Expr::int((10 * idx[0] + idx[1]) as i64)
        })
        .unwrap();
        for (idx, comp) in t.iter() {
            assert_eq!(t.get(&idx).unwrap(), comp);
        }
        assert_eq!(t.get(&[2, 1]).unwrap(), &Expr::int(21));
        assert!(t.get(&[3, 0]).is_err());
        assert!(t.get(&[0]).is_err());
    }

    #[test]
    fn arithmetic_preserves_common_symmetries() {
        let c = Chart::new(2).unwrap();
        let sym = vec![SlotSymmetry::Symmetric(0, 1)];
        let a = TensorField::from_fn(&c, 0, 2, sym.clone(), |_| Expr::one()).unwrap();
        let b = TensorField::from_fn(&c, 0, 2, sym.clone(), |idx| {
            Expr::int((idx[0] + idx[1]) as i64)
        })
        .unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.symmetries(), &sym[..]);
        assert_eq!(s.get(&[0, 1]).unwrap(), &Expr::int(2));
        assert!(a.sub(&a).unwrap().is_zero_literal());
    }
}
