//! World connections and the connection calculus: Christoffel symbols,
//! torsion, curvature, nonmetricity, contorsion, and the splitting of an
//! arbitrary linear connection into those parts.
//!
//! # Sign conventions
//!
//! One fixed convention is used throughout, chosen so that every identity
//! in this crate holds exactly as stated:
//!
//! * Christoffel symbols of the first kind carry a leading −½:
//!   `{_{μνα}} = −½(∂_μ g_{να} + ∂_α g_{νμ} − ∂_ν g_{μα})`;
//! * the metricity condition reads `∂_μ g_{να} + Γ_{μνα} + Γ_{μαν} = 0`;
//! * consequently curvature, Ricci and scalar curvature are the *negatives*
//!   of the common textbook quantities (the unit 2-sphere has scalar
//!   curvature −2 here).
//!
//! [`WorldConnection::flip_sign`] converts to and from the textbook
//! convention; it is an involution, and under it curvature (built from the
//! flipped connection) flips sign as well.
//!
//! # Index order
//!
//! Connection coefficients `Γ_λ^μ_ν` are stored as `[λ][μ][ν]` — derivative
//! index first, then the contravariant index, then the covariant one. The
//! lowered form is `Γ_{μνα} = g_{νβ} Γ_μ^β_α`.

use super::metric::MetricField;
use super::{Chart, SlotSymmetry, TensorField};
use crate::error::{Error, Result};
use crate::symexpr::zerotest::is_zero;
use crate::symexpr::{Expr, Verdict, ZeroCfg};
use std::fmt;

/// A general linear world connection: `dim³` coefficients with no built-in
/// symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConnection {
    chart: Chart,
    coeffs: Vec<Expr>,
}

impl WorldConnection {
    /// Build from a row-major coefficient array `[λ][μ][ν]`.
    pub fn new(chart: &Chart, coeffs: Vec<Expr>) -> Result<WorldConnection> {
        let want = chart.dim().pow(3);
        if coeffs.len() != want {
            return Err(Error::Shape(format!(
                "expected {want} connection coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(WorldConnection {
            chart: chart.clone(),
            coeffs,
        })
    }

    /// Build by evaluating `f(λ, μ, ν)` on every index triple.
    pub fn from_fn(chart: &Chart, mut f: impl FnMut(usize, usize, usize) -> Expr) -> WorldConnection {
        let dim = chart.dim();
        let mut coeffs = Vec::with_capacity(dim.pow(3));
        for lam in 0..dim {
            for mu in 0..dim {
                for nu in 0..dim {
                    coeffs.push(f(lam, mu, nu));
                }
            }
        }
        WorldConnection {
            chart: chart.clone(),
            coeffs,
        }
    }

    /// The flat connection (all coefficients zero).
    pub fn zero(chart: &Chart) -> WorldConnection {
        WorldConnection {
            chart: chart.clone(),
            coeffs: vec![Expr::zero(); chart.dim().pow(3)],
        }
    }

    /// Coefficient `Γ_λ^μ_ν`.
    pub fn get(&self, lam: usize, mu: usize, nu: usize) -> &Expr {
        let d = self.chart.dim();
        assert!(lam < d && mu < d && nu < d, "connection index out of range");
        &self.coeffs[(lam * d + mu) * d + nu]
    }

    /// The chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// All coefficients in `[λ][μ][ν]` row-major order.
    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// Componentwise difference (the difference of two connections is a
    /// tensor, but it is kept in connection layout for comparisons).
    pub fn sub(&self, other: &WorldConnection) -> Result<WorldConnection> {
        self.chart.expect_same(&other.chart)?;
        Ok(WorldConnection {
            chart: self.chart.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    /// True if every coefficient is the literal zero.
    pub fn is_zero_literal(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_literal())
    }

    /// Zero-test every coefficient and combine the verdicts.
    pub fn is_zero(&self, cfg: &ZeroCfg) -> Result<Verdict> {
        let mut verdict = Verdict::ProvenZero;
        for c in &self.coeffs {
            verdict = verdict.combine(is_zero(c, cfg)?);
            if !verdict.is_zero() {
                break;
            }
        }
        Ok(verdict)
    }

    /// Convert to (or back from) the common textbook sign convention by
    /// negating every coefficient. Applying it twice is the identity.
    pub fn flip_sign(&self) -> WorldConnection {
        WorldConnection {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    /// Lowered coefficients `Γ_{μνα} = g_{νβ} Γ_μ^β_α` as a (0,3) tensor
    /// stored `[μ][ν][α]`.
    pub fn lowered(&self, g: &MetricField) -> Result<TensorField> {
        self.chart.expect_same(g.chart())?;
        let dim = self.chart.dim();
        TensorField::from_fn(&self.chart, 0, 3, Vec::new(), |idx| {
            let (mu, nu, al) = (idx[0], idx[1], idx[2]);
            let terms: Vec<Expr> = (0..dim)
                .map(|beta| g.dn(nu, beta).mul(self.get(mu, beta, al)))
                .collect();
            Expr::sum(terms)
        })
    }
}

impl fmt::Display for WorldConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "connection on dim-{} chart:", self.chart.dim())?;
        let dim = self.chart.dim();
        let mut any = false;
        for lam in 0..dim {
            for mu in 0..dim {
                for nu in 0..dim {
                    let c = self.get(lam, mu, nu);
                    if !c.is_zero_literal() {
                        any = true;
                        writeln!(f, "  Γ_{lam}^{mu}_{nu} = {c}")?;
                    }
                }
            }
        }
        if !any {
            writeln!(f, "  (flat)")?;
        }
        Ok(())
    }
}

/// Christoffel symbols of the first kind, `{_{μνα}}`, as a (0,3) tensor
/// stored `[μ][ν][α]` (symmetric in the outer pair `μ, α`).
pub fn christoffel_lower(g: &MetricField) -> Result<TensorField> {
    let chart = g.chart().clone();
    TensorField::from_fn(&chart, 0, 3, Vec::new(), |idx| {
        let (mu, nu, al) = (idx[0], idx[1], idx[2]);
        let d1 = chart.partial(g.dn(nu, al), mu).expect("index in range");
        let d2 = chart.partial(g.dn(nu, mu), al).expect("index in range");
        let d3 = chart.partial(g.dn(mu, al), nu).expect("index in range");
        Expr::sum(vec![d1, d2, d3.neg()]).mul(&frac(-1, 2))
    })
}

/// The Levi-Civita connection of `g`: first-kind symbols raised with the
/// inverse metric, `Γ_μ^β_α = g^{βν} {_{μνα}}`. Symmetric (torsion-free)
/// and metric (zero nonmetricity).
pub fn christoffel(g: &MetricField) -> Result<WorldConnection> {
    let lower = christoffel_lower(g)?;
    raise_lowered(&lower, g)
}

/// Raise a lowered coefficient array `Γ_{μνα}` back to `Γ_μ^β_α = g^{βν} Γ_{μνα}`.
pub fn raise_lowered(lower: &TensorField, g: &MetricField) -> Result<WorldConnection> {
    lower.chart().expect_same(g.chart())?;
    let dim = g.chart().dim();
    let mut coeffs = Vec::with_capacity(dim.pow(3));
    for mu in 0..dim {
        for beta in 0..dim {
            for al in 0..dim {
                let terms: Vec<Expr> = (0..dim)
                    .map(|nu| g.up(beta, nu).mul(lower.get(&[mu, nu, al]).expect("in range")))
                    .collect();
                coeffs.push(Expr::sum(terms));
            }
        }
    }
    WorldConnection::new(g.chart(), coeffs)
}

/// Torsion `T_μ^ν_λ = Γ_μ^ν_λ − Γ_λ^ν_μ` as a (1,2) tensor stored
/// `[ν][μ][λ]` (contravariant slot first), antisymmetric in the lower pair.
pub fn torsion(gamma: &WorldConnection) -> TensorField {
    let chart = gamma.chart().clone();
    TensorField::from_fn(
        &chart,
        1,
        2,
        vec![SlotSymmetry::Antisymmetric(1, 2)],
        |idx| {
            let (nu, mu, lam) = (idx[0], idx[1], idx[2]);
            gamma.get(mu, nu, lam).sub(gamma.get(lam, nu, mu))
        },
    )
    .expect("torsion is antisymmetric by construction")
}

/// Curvature `R_{λμ}^α_β = ∂_λ Γ_μ^α_β − ∂_μ Γ_λ^α_β + Γ_λ^γ_β Γ_μ^α_γ −
/// Γ_μ^γ_β Γ_λ^α_γ` as a (1,3) tensor stored `[α][λ][μ][β]`, antisymmetric
/// in the derivative pair `λ, μ`.
pub fn curvature(gamma: &WorldConnection) -> TensorField {
    let chart = gamma.chart().clone();
    let dim = chart.dim();
    TensorField::from_fn(
        &chart,
        1,
        3,
        vec![SlotSymmetry::Antisymmetric(1, 2)],
        |idx| {
            let (al, lam, mu, beta) = (idx[0], idx[1], idx[2], idx[3]);
            let mut terms = vec![
                chart.partial(gamma.get(mu, al, beta), lam).expect("in range"),
                chart.partial(gamma.get(lam, al, beta), mu).expect("in range").neg(),
            ];
            for gam in 0..dim {
                terms.push(gamma.get(lam, gam, beta).mul(gamma.get(mu, al, gam)));
                terms.push(gamma.get(mu, gam, beta).mul(gamma.get(lam, al, gam)).neg());
            }
            Expr::sum(terms)
        },
    )
    .expect("curvature is antisymmetric by construction")
}

/// The two Ricci contractions of a curvature tensor.
#[derive(Debug, Clone)]
pub struct RicciPair {
    /// The ½-weighted form `½ R_{λμ}^λ_β dx^μ ⊗ dx^β`.
    pub weighted: TensorField,
    /// The plain contraction `R_{λμ}^λ_β` without the ½ (this is the form
    /// contracted into the scalar curvature).
    pub plain: TensorField,
}

/// Ricci tensor of a connection, in both normalizations (they differ by a
/// factor ½, and different displayed formulas use different ones).
pub fn ricci(gamma: &WorldConnection) -> RicciPair {
    let r = curvature(gamma);
    let chart = gamma.chart().clone();
    let dim = chart.dim();
    let plain = TensorField::from_fn(&chart, 0, 2, Vec::new(), |idx| {
        let (mu, beta) = (idx[0], idx[1]);
        let terms: Vec<Expr> = (0..dim)
            .map(|lam| r.get(&[lam, lam, mu, beta]).expect("in range").clone())
            .collect();
        Expr::sum(terms)
    })
    .expect("shape fixed");
    let weighted = plain.scale(&Expr::rational(1, 2));
    RicciPair { weighted, plain }
}

/// Scalar curvature `g^{μν} R_{λμ}^λ_ν` (plain contraction, no ½).
pub fn scalar_curvature(gamma: &WorldConnection, g: &MetricField) -> Result<Expr> {
    gamma.chart().expect_same(g.chart())?;
    let dim = g.chart().dim();
    let rp = ricci(gamma);
    let mut terms = Vec::with_capacity(dim * dim);
    for mu in 0..dim {
        for nu in 0..dim {
            terms.push(g.up(mu, nu).mul(rp.plain.get(&[mu, nu])?));
        }
    }
    Ok(Expr::sum(terms))
}

/// Nonmetricity `C_{μνα} = ∂_μ g_{να} + Γ_{μνα} + Γ_{μαν}` as a (0,3)
/// tensor stored `[μ][ν][α]`, symmetric in the last two slots. Vanishes
/// exactly when the connection preserves the metric.
pub fn nonmetricity(gamma: &WorldConnection, g: &MetricField) -> Result<TensorField> {
    gamma.chart().expect_same(g.chart())?;
    let chart = g.chart().clone();
    let low = gamma.lowered(g)?;
    TensorField::from_fn(&chart, 0, 3, vec![SlotSymmetry::Symmetric(1, 2)], |idx| {
        let (mu, nu, al) = (idx[0], idx[1], idx[2]);
        Expr::sum(vec![
            chart.partial(g.dn(nu, al), mu).expect("in range"),
            low.get(&[mu, nu, al]).expect("in range").clone(),
            low.get(&[mu, al, nu]).expect("in range").clone(),
        ])
    })
}

/// Contorsion `S_{μνα} = ½(T_{νμα} + T_{ναμ} + T_{μνα} + C_{ανμ} − C_{ναμ})`
/// as a (0,3) tensor stored `[μ][ν][α]`, antisymmetric in the last two
/// slots. Index lowering follows the connection convention:
/// `T_{μνα} = g_{νβ} T_μ^β_α`.
pub fn contorsion(gamma: &WorldConnection, g: &MetricField) -> Result<TensorField> {
    gamma.chart().expect_same(g.chart())?;
    let chart = g.chart().clone();
    let dim = chart.dim();
    let t = torsion(gamma);
    let c = nonmetricity(gamma, g)?;
    // Lowered torsion T_{abc} = g_{bβ} T_a^β_c.
    let tl = TensorField::from_fn(&chart, 0, 3, Vec::new(), |idx| {
        let (a, b, cc) = (idx[0], idx[1], idx[2]);
        let terms: Vec<Expr> = (0..dim)
            .map(|beta| g.dn(b, beta).mul(t.get(&[beta, a, cc]).expect("in range")))
            .collect();
        Expr::sum(terms)
    })?;
    TensorField::from_fn(
        &chart,
        0,
        3,
        vec![SlotSymmetry::Antisymmetric(1, 2)],
        |idx| {
            let (mu, nu, al) = (idx[0], idx[1], idx[2]);
            Expr::sum(vec![
                tl.get(&[nu, mu, al]).expect("in range").clone(),
                tl.get(&[nu, al, mu]).expect("in range").clone(),
                tl.get(&[mu, nu, al]).expect("in range").clone(),
                c.get(&[al, nu, mu]).expect("in range").clone(),
                c.get(&[nu, al, mu]).expect("in range").neg(),
            ])
            .mul(&frac(1, 2))
        },
    )
}

/// The three lowered parts of a connection relative to a metric.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Christoffel symbols of the first kind `{_{μνα}}`.
    pub levi_civita: TensorField,
    /// Contorsion `S_{μνα}`.
    pub contorsion: TensorField,
    /// Nonmetricity `C_{μνα}`.
    pub nonmetricity: TensorField,
}

impl Decomposition {
    /// Reassemble the connection: `Γ_{μνα} = {_{μνα}} + S_{μνα} + ½C_{μνα}`,
    /// raised with the inverse metric. The difference from the original
    /// connection is identically zero (provable by exact expansion for
    /// rational metrics).
    pub fn recompose(&self, g: &MetricField) -> Result<WorldConnection> {
        let lower = self
            .levi_civita
            .add(&self.contorsion)?
            .add(&self.nonmetricity.scale(&Expr::rational(1, 2)))?;
        raise_lowered(&lower, g)
    }
}

/// Split a connection into Christoffel, contorsion and nonmetricity parts.
pub fn decompose(gamma: &WorldConnection, g: &MetricField) -> Result<Decomposition> {
    Ok(Decomposition {
        levi_civita: christoffel_lower(g)?,
        contorsion: contorsion(gamma, g)?,
        nonmetricity: nonmetricity(gamma, g)?,
    })
}

/// The unique metric connection with prescribed torsion:
/// `Γ_{μνα} = {_{μνα}} + ½(T_{νμα} + T_{ναμ} + T_{μνα})`, raised.
///
/// `t` must be a (1,2) tensor antisymmetric in its lower pair (the same
/// index pattern [`torsion`] produces); violations are errors.
pub fn metric_connection(g: &MetricField, t: &TensorField) -> Result<WorldConnection> {
    g.chart().expect_same(t.chart())?;
    let (p, q) = t.valence();
    if (p, q) != (1, 2) {
        return Err(Error::Shape(format!(
            "torsion must be a (1,2) tensor, got ({p},{q})"
        )));
    }
    // Verify the antisymmetry even if the caller did not declare it.
    TensorField::new(
        g.chart(),
        1,
        2,
        t.components().to_vec(),
        vec![SlotSymmetry::Antisymmetric(1, 2)],
    )?;
    let chart = g.chart().clone();
    let dim = chart.dim();
    let ch = christoffel_lower(g)?;
    let tl = TensorField::from_fn(&chart, 0, 3, Vec::new(), |idx| {
        let (a, b, cc) = (idx[0], idx[1], idx[2]);
        let terms: Vec<Expr> = (0..dim)
            .map(|beta| g.dn(b, beta).mul(t.get(&[beta, a, cc]).expect("in range")))
            .collect();
        Expr::sum(terms)
    })?;
    let lower = TensorField::from_fn(&chart, 0, 3, Vec::new(), |idx| {
        let (mu, nu, al) = (idx[0], idx[1], idx[2]);
        let half = Expr::sum(vec![
            tl.get(&[nu, mu, al]).expect("in range").clone(),
            tl.get(&[nu, al, mu]).expect("in range").clone(),
            tl.get(&[mu, nu, al]).expect("in range").clone(),
        ])
        .mul(&frac(1, 2));
        ch.get(&[mu, nu, al]).expect("in range").add(&half)
    })?;
    raise_lowered(&lower, g)
}

/// The symmetric part `Γ′ = Γ − T/2`, i.e. `Γ′_λ^μ_ν = ½(Γ_λ^μ_ν + Γ_ν^μ_λ)`.
/// Always torsion-free.
pub fn symmetric_part(gamma: &WorldConnection) -> WorldConnection {
    WorldConnection::from_fn(gamma.chart(), |lam, mu, nu| {
        gamma.get(lam, mu, nu).add(gamma.get(nu, mu, lam)).mul(&frac(1, 2))
    })
}

/// An affine world connection: a linear part plus a soldering (1,1) tensor.
#[derive(Debug, Clone)]
pub struct AffineWorldConnection {
    linear: WorldConnection,
    soldering: TensorField,
}

impl AffineWorldConnection {
    /// Build from parts; the soldering form must be a (1,1) tensor.
    pub fn new(linear: WorldConnection, soldering: TensorField) -> Result<AffineWorldConnection> {
        linear.chart().expect_same(soldering.chart())?;
        if soldering.valence() != (1, 1) {
            return Err(Error::Shape(format!(
                "soldering form must be a (1,1) tensor, got {:?}",
                soldering.valence()
            )));
        }
        Ok(AffineWorldConnection { linear, soldering })
    }

    /// The linear part.
    pub fn linear(&self) -> &WorldConnection {
        &self.linear
    }

    /// The soldering part.
    pub fn soldering(&self) -> &TensorField {
        &self.soldering
    }

    /// Both parts, consuming the connection (round-trip inverse of
    /// [`cartan_connection`] when the soldering part is the identity).
    pub fn into_parts(self) -> (WorldConnection, TensorField) {
        (self.linear, self.soldering)
    }

    /// Evaluate on a velocity vector: `A_λ^μ = Γ_λ^μ_ν ẋ^ν + σ^μ_λ`,
    /// returned as a (1,1) tensor stored `[μ][λ]`.
    pub fn evaluate(&self, xdot: &TensorField) -> Result<TensorField> {
        self.linear.chart().expect_same(xdot.chart())?;
        if xdot.valence() != (1, 0) {
            return Err(Error::Shape(format!(
                "velocity must be a (1,0) tensor, got {:?}",
                xdot.valence()
            )));
        }
        let chart = self.linear.chart().clone();
        let dim = chart.dim();
        TensorField::from_fn(&chart, 1, 1, Vec::new(), |idx| {
            let (mu, lam) = (idx[0], idx[1]);
            let mut terms: Vec<Expr> = (0..dim)
                .map(|nu| self.linear.get(lam, mu, nu).mul(xdot.get(&[nu]).expect("in range")))
                .collect();
            terms.push(self.soldering.get(&[mu, lam]).expect("in range").clone());
            Expr::sum(terms)
        })
    }
}

/// Extend a linear connection to the affine connection whose soldering part
/// is the identity tensor δ^μ_λ (the canonical affine extension).
pub fn cartan_connection(gamma: &WorldConnection) -> AffineWorldConnection {
    AffineWorldConnection {
        soldering: TensorField::delta(gamma.chart()),
        linear: gamma.clone(),
    }
}

// Small helper: the rational constant p/q as an expression.
fn frac(p: i64, q: i64) -> Expr {
    Expr::rational(p, q)
}

#[cfg(test)]
mod tests {
    use super::super::metric::Signature;
    use super::*;
    use crate::symexpr::zerotest::is_zero;

    fn polar_like() -> (Chart, MetricField) {
        let chart = Chart::new(2).unwrap();
        let g = MetricField::diagonal(
            &chart,
            &[Expr::one(), chart.parse("x0^2").unwrap()],
            Signature::Riemannian,
        )
        .unwrap();
        (chart, g)
    }

    #[test]
    fn constant_metrics_are_flat() {
        let chart = Chart::new(4).unwrap();
        let g = MetricField::minkowski(&chart).unwrap();
        assert!(christoffel(&g).unwrap().is_zero_literal());
    }

    #[test]
    fn christoffel_components_in_two_dimensions() {
        let (chart, g) = polar_like();
        let gamma = christoffel(&g).unwrap();
        assert_eq!(gamma.get(1, 0, 1), &chart.parse("x0").unwrap());
        assert_eq!(gamma.get(0, 1, 1), &chart.parse("0 - x0^-1").unwrap());
        assert_eq!(gamma.get(1, 1, 0), &chart.parse("0 - x0^-1").unwrap());
        assert_eq!(gamma.get(0, 0, 0), &Expr::zero());
        // Levi-Civita is symmetric, hence torsion-free.
        assert!(torsion(&gamma).is_zero_literal());
    }

    #[test]
    fn torsion_by_direct_substitution() {
        let chart = Chart::new(2).unwrap();
        let x0 = chart.parse("x0").unwrap();
        let gamma = WorldConnection::from_fn(&chart, |lam, mu, nu| {
            if (lam, mu, nu) == (0, 1, 1) {
                x0.clone()
            } else {
                Expr::zero()
            }
        });
        let t = torsion(&gamma);
        assert_eq!(t.get(&[1, 0, 1]).unwrap(), &x0);
        assert_eq!(t.get(&[1, 1, 0]).unwrap(), &x0.neg());
        assert_eq!(t.get(&[0, 0, 1]).unwrap(), &Expr::zero());
    }

    #[test]
    fn flat_and_constant_curvature() {
        let chart = Chart::new(2).unwrap();
        assert!(curvature(&WorldConnection::zero(&chart)).is_zero_literal());
        // Constant coefficients: only the ΓΓ commutator survives. With
        // Γ_0^0_1 = 1 and Γ_1^1_0 = 3 the nonzero components are
        // R_{01}^1_1 = 3 and R_{01}^0_0 = −3 (plus antisymmetric mirrors).
        let gamma = WorldConnection::from_fn(&chart, |lam, mu, nu| match (lam, mu, nu) {
            (0, 0, 1) => Expr::one(),
            (1, 1, 0) => Expr::int(3),
            _ => Expr::zero(),
        });
        let r = curvature(&gamma);
        assert_eq!(r.get(&[1, 0, 1, 1]).unwrap(), &Expr::int(3));
        assert_eq!(r.get(&[0, 0, 1, 0]).unwrap(), &Expr::int(-3));
        assert_eq!(r.get(&[1, 1, 0, 1]).unwrap(), &Expr::int(-3));
        assert_eq!(r.get(&[0, 1, 0, 0]).unwrap(), &Expr::int(3));
        assert_eq!(r.get(&[0, 0, 1, 1]).unwrap(), &Expr::zero());
    }

    #[test]
    fn sphere_scalar_curvature_is_minus_two() {
        // diag(1, sin²x0): under this crate's sign conventions the unit
        // sphere has scalar curvature −2 and plain Ricci equal to −g.
        let chart = Chart::new(2).unwrap();
        let g = MetricField::diagonal(
            &chart,
            &[Expr::one(), chart.parse("sin(x0)^2").unwrap()],
            Signature::Riemannian,
        )
        .unwrap();
        let gamma = christoffel(&g).unwrap();
        let s = scalar_curvature(&gamma, &g).unwrap();
        let cfg = ZeroCfg::default();
        assert!(is_zero(&s.add(&Expr::int(2)), &cfg).unwrap().is_zero());
        let rp = ricci(&gamma);
        let diff = rp.plain.add(g.lower()).unwrap();
        assert!(diff.is_zero(&cfg).unwrap().is_zero());
        // The ½-weighted form is half of the plain contraction.
        let twice = rp.weighted.scale(&Expr::int(2)).sub(&rp.plain).unwrap();
        assert!(twice.is_zero_literal());
    }

    #[test]
    fn nonmetricity_vanishes_for_levi_civita_and_not_otherwise() {
        let (_, g) = polar_like();
        let gamma = christoffel(&g).unwrap();
        let c = nonmetricity(&gamma, &g).unwrap();
        assert!(c.is_zero(&ZeroCfg::default()).unwrap().is_proven());

        // Γ = 0 against a curved metric leaves the plain metric gradient.
        let chart = Chart::new(4).unwrap();
        let g = MetricField::diagonal(
            &chart,
            &[
                Expr::one(),
                chart.parse("0 - exp(2*x0)").unwrap(),
                Expr::int(-1),
                Expr::int(-1),
            ],
            Signature::Lorentzian,
        )
        .unwrap();
        let c = nonmetricity(&WorldConnection::zero(&chart), &g).unwrap();
        assert_eq!(
            c.get(&[0, 1, 1]).unwrap(),
            &chart.parse("0 - 2*exp(2*x0)").unwrap()
        );
        assert_eq!(c.get(&[1, 1, 1]).unwrap(), &Expr::zero());
    }

    #[test]
    fn levi_civita_decomposes_trivially() {
        let (_, g) = polar_like();
        let gamma = christoffel(&g).unwrap();
        let parts = decompose(&gamma, &g).unwrap();
        assert!(parts.contorsion.is_zero_literal());
        assert!(parts.nonmetricity.is_zero_literal());
        let back = parts.recompose(&g).unwrap();
        assert!(back.sub(&gamma).unwrap().is_zero_literal());
    }

    #[test]
    fn splitting_round_trips_on_a_dense_example() {
        let chart = Chart::new(2).unwrap();
        let x0 = chart.parse("x0").unwrap();
        let x1 = chart.parse("x1").unwrap();
        let lower = TensorField::new(
            &chart,
            0,
            2,
            vec![
                Expr::one(),
                x0.mul(&frac(1, 4)),
                x0.mul(&frac(1, 4)),
                chart.parse("1 + x1^2").unwrap(),
            ],
            vec![SlotSymmetry::Symmetric(0, 1)],
        )
        .unwrap();
        let g = MetricField::new(&chart, lower, Signature::Riemannian).unwrap();
        let gamma = WorldConnection::from_fn(&chart, |lam, mu, nu| match (lam, mu, nu) {
            (0, 1, 1) => x0.clone(),
            (1, 0, 1) => x1.mul(&x0),
            (1, 1, 0) => Expr::int(2),
            _ => Expr::zero(),
        });
        let parts = decompose(&gamma, &g).unwrap();
        let back = parts.recompose(&g).unwrap();
        let verdict = back.sub(&gamma).unwrap().is_zero(&ZeroCfg::default()).unwrap();
        assert!(verdict.is_proven(), "got {verdict}");
    }

    #[test]
    fn metric_connections_have_prescribed_torsion_and_no_nonmetricity() {
        let chart = Chart::new(2).unwrap();
        let g = MetricField::minkowski(&chart).unwrap();
        // Constant antisymmetric torsion.
        let t = TensorField::new(
            &chart,
            1,
            2,
            vec![
                Expr::zero(),
                Expr::int(5),
                Expr::int(-5),
                Expr::zero(),
                Expr::zero(),
                Expr::one(),
                Expr::int(-1),
                Expr::zero(),
            ],
            vec![SlotSymmetry::Antisymmetric(1, 2)],
        )
        .unwrap();
        let gamma = metric_connection(&g, &t).unwrap();
        let cfg = ZeroCfg::default();
        assert!(torsion(&gamma).sub(&t).unwrap().is_zero(&cfg).unwrap().is_proven());
        assert!(nonmetricity(&gamma, &g).unwrap().is_zero(&cfg).unwrap().is_proven());
        // T = 0 reproduces Levi-Civita on the nose.
        let lc = metric_connection(&g, &TensorField::zeros(&chart, 1, 2)).unwrap();
        assert!(lc.sub(&christoffel(&g).unwrap()).unwrap().is_zero_literal());
        // A symmetric (non-antisymmetric) "torsion" is rejected.
        let bad = TensorField::from_fn(&chart, 1, 2, Vec::new(), |_| Expr::one()).unwrap();
        assert!(matches!(
            metric_connection(&g, &bad),
            Err(Error::Symmetry(_))
        ));
    }

    #[test]
    fn symmetric_part_kills_torsion() {
        let chart = Chart::new(2).unwrap();
        let x0 = chart.parse("x0").unwrap();
        let gamma = WorldConnection::from_fn(&chart, |lam, mu, nu| match (lam, mu, nu) {
            (0, 1, 1) => x0.clone(),
            (1, 0, 0) => Expr::int(7),
            _ => Expr::zero(),
        });
        let sym = symmetric_part(&gamma);
        assert!(torsion(&sym).is_zero_literal());
        // Γ′_0^1_1 = Γ_0^1_1 − T_0^1_1/2 = x0 − x0/2.
        assert_eq!(sym.get(0, 1, 1), &x0.mul(&frac(1, 2)));
    }

    #[test]
    fn affine_extension_round_trips() {
        let chart = Chart::new(3).unwrap();
        let gamma = WorldConnection::from_fn(&chart, |lam, mu, nu| {
            Expr::int((lam + 2 * mu + 3 * nu) as i64)
        });
        let affine = cartan_connection(&gamma);
        assert_eq!(affine.soldering(), &TensorField::delta(&chart));
        let (lin, sol) = affine.clone().into_parts();
        assert_eq!(&lin, &gamma);
        assert_eq!(sol, TensorField::delta(&chart));
        // Evaluating the flat affine connection on a velocity returns δ.
        let flat = cartan_connection(&WorldConnection::zero(&chart));
        let xdot = TensorField::from_fn(&chart, 1, 0, Vec::new(), |idx| {
            chart.parse(&format!("x{}", idx[0])).unwrap()
        })
        .unwrap();
        assert_eq!(flat.evaluate(&xdot).unwrap(), TensorField::delta(&chart));
    }

    #[test]
    fn sign_flip_is_an_involution_matching_textbook_curvature() {
        let (chart, g) = polar_like();
        let gamma = christoffel(&g).unwrap();
        let flipped = gamma.flip_sign();
        assert!(flipped.flip_sign().sub(&gamma).unwrap().is_zero_literal());
        // The flipped coefficients are the usual textbook Christoffel
        // symbols.  Feeding them into the textbook curvature formula
        //   R_{λμ}{}^α{}_β = ∂_λ Γ_μ{}^α{}_β − ∂_μ Γ_λ{}^α{}_β
        //                    + Γ_λ{}^α{}_γ Γ_μ{}^γ{}_β − Γ_μ{}^α{}_γ Γ_λ{}^γ{}_β
        // must reproduce exactly the negative of our curvature: both the
        // connection and the curvature convert by an overall sign flip.
        let dim = chart.dim();
        let textbook = TensorField::from_fn(&chart, 1, 3, Vec::new(), |idx| {
            let (al, lam, mu, be) = (idx[0], idx[1], idx[2], idx[3]);
            let mut terms = vec![
                chart.partial(flipped.get(mu, al, be), lam).unwrap(),
                chart.partial(flipped.get(lam, al, be), mu).unwrap().neg(),
            ];
            for ga in 0..dim {
                terms.push(flipped.get(lam, al, ga).mul(flipped.get(mu, ga, be)));
                terms.push(flipped.get(mu, al, ga).mul(flipped.get(lam, ga, be)).neg());
            }
            Expr::sum(terms)
        })
        .unwrap();
        let r = curvature(&gamma);
        assert!(r.add(&textbook).unwrap().is_zero_literal());
    }
}
