//! Tetrads (coframes), the Lorentz connections they induce, and the
//! construction of a spacetime metric from a riemannian metric and a
//! nowhere-vanishing one-form.
//!
//! A tetrad `h^a_μ` is an invertible matrix of scalars relating the
//! coordinate coframe to an orthonormal frame; indices `a, b, k` are frame
//! indices, `λ, μ, ν` world indices. The frame metric is `diag(1, −1, …)`
//! (or the identity for the riemannian constructions).

use super::connection::WorldConnection;
use super::metric::{invert_expr_matrix, MetricField, Signature};
use super::{Chart, SlotSymmetry, TensorField};
use crate::error::{Error, Result};
use crate::symexpr::eval::{eval_exact, eval_f64, rational_to_f64};
use crate::symexpr::zerotest::{is_zero, Verdict};
use crate::symexpr::{Expr, Symbol, ZeroCfg};
use num::{BigInt, BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;

/// An invertible coframe field `h^a_μ` together with its inverse `h^μ_a`.
#[derive(Debug, Clone)]
pub struct TetradField {
    chart: Chart,
    coframe: Vec<Expr>, // [a][μ] row-major
    frame: Vec<Expr>,   // inverse, [μ][a] row-major
}

impl TetradField {
    /// Build from coframe components `h^a_μ` (row-major `[a][μ]`, length
    /// `dim²`). The inverse is computed symbolically; nondegeneracy and the
    /// duality `h^a_μ h^μ_b = δ^a_b` are verified.
    pub fn new(chart: &Chart, coframe: Vec<Expr>) -> Result<TetradField> {
        TetradField::new_with(chart, coframe, &ZeroCfg::default())
    }

    /// As [`TetradField::new`] with an explicit zero-test configuration.
    pub fn new_with(chart: &Chart, coframe: Vec<Expr>, cfg: &ZeroCfg) -> Result<TetradField> {
        let dim = chart.dim();
        if coframe.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} coframe components, got {}",
                dim * dim,
                coframe.len()
            )));
        }
        let m: Vec<Vec<Expr>> = (0..dim)
            .map(|a| coframe[a * dim..(a + 1) * dim].to_vec())
            .collect();
        let (inv, det) = invert_expr_matrix(&m);
        match is_zero(&det, cfg)? {
            Verdict::Nonzero { .. } => {}
            _ => {
                return Err(Error::Degenerate(
                    "tetrad determinant vanishes identically (or at every sampled point)".into(),
                ))
            }
        }
        let t = TetradField {
            chart: chart.clone(),
            coframe,
            frame: inv.into_iter().flatten().collect(),
        };
        // Duality check h^a_μ h^μ_b = δ^a_b (exact for the adjugate inverse,
        // but verified to catch budget blowups early).
        for a in 0..dim {
            for b in 0..dim {
                let mut s: Vec<Expr> = (0..dim).map(|mu| t.get(a, mu).mul(t.inv(mu, b))).collect();
                if a == b {
                    s.push(Expr::int(-1));
                }
                if let Verdict::Nonzero { witness, .. } = is_zero(&Expr::sum(s), cfg)? {
                    return Err(Error::Degenerate(format!(
                        "tetrad duality h·h⁻¹ = δ fails in component ({a},{b}) at {witness:?}"
                    )));
                }
            }
        }
        Ok(t)
    }

    /// The identity coframe `h^a_μ = δ^a_μ`.
    pub fn identity(chart: &Chart) -> TetradField {
        let dim = chart.dim();
        let mut coframe = vec![Expr::zero(); dim * dim];
        for a in 0..dim {
            coframe[a * dim + a] = Expr::one();
        }
        TetradField {
            chart: chart.clone(),
            coframe: coframe.clone(),
            frame: coframe,
        }
    }

    /// The chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Coframe component `h^a_μ`.
    pub fn get(&self, a: usize, mu: usize) -> &Expr {
        let d = self.chart.dim();
        assert!(a < d && mu < d, "tetrad index out of range");
        &self.coframe[a * d + mu]
    }

    /// Inverse (frame) component `h^μ_a`.
    pub fn inv(&self, mu: usize, a: usize) -> &Expr {
        let d = self.chart.dim();
        assert!(mu < d && a < d, "tetrad index out of range");
        &self.frame[mu * d + a]
    }
}

impl fmt::Display for TetradField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tetrad on dim-{} chart:", self.chart.dim())?;
        let dim = self.chart.dim();
        for a in 0..dim {
            for mu in 0..dim {
                let c = self.get(a, mu);
                if !c.is_zero_literal() {
                    writeln!(f, "  h^{a}_{mu} = {c}")?;
                }
            }
        }
        Ok(())
    }
}

/// The lorentzian metric induced by a tetrad:
/// `g_{μν} = h^a_μ h^b_ν η_{ab}` with `η = diag(1, −1, …)`.
pub fn metric_from_tetrad(h: &TetradField) -> Result<MetricField> {
    induced_metric(h, Signature::Lorentzian)
}

/// The riemannian metric induced by the same tetrad with the Euclidean
/// frame metric: `g^R_{μν} = Σ_a h^a_μ h^a_ν`.
pub fn riemannian_from_tetrad(h: &TetradField) -> Result<MetricField> {
    induced_metric(h, Signature::Riemannian)
}

fn induced_metric(h: &TetradField, signature: Signature) -> Result<MetricField> {
    let chart = h.chart().clone();
    let dim = chart.dim();
    let eta = signature.frame_metric(dim);
    let lower = TensorField::from_fn(&chart, 0, 2, vec![SlotSymmetry::Symmetric(0, 1)], |idx| {
        let (mu, nu) = (idx[0], idx[1]);
        let terms: Vec<Expr> = (0..dim)
            .map(|a| h.get(a, mu).mul(h.get(a, nu)).scale(&BigRational::from_integer(eta[a].into())))
            .collect();
        Expr::sum(terms)
    })?;
    // The inverse comes from the inverse frame: g^{μν} = η^{ab} h^μ_a h^ν_b
    // (η is its own inverse).
    let upper = TensorField::from_fn(&chart, 2, 0, vec![SlotSymmetry::Symmetric(0, 1)], |idx| {
        let (mu, nu) = (idx[0], idx[1]);
        let terms: Vec<Expr> = (0..dim)
            .map(|a| h.inv(mu, a).mul(h.inv(nu, a)).scale(&BigRational::from_integer(eta[a].into())))
            .collect();
        Expr::sum(terms)
    })?;
    MetricField::with_inverse(&chart, lower, upper, signature, &ZeroCfg::default())
}

/// Antisymmetric Lorentz-connection coefficients `A_λ^{ab}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzConnection {
    chart: Chart,
    comps: Vec<Expr>, // [λ][a][b] row-major
}

impl LorentzConnection {
    /// Build from components `A_λ^{ab}` (row-major `[λ][a][b]`), verifying
    /// antisymmetry in the frame pair.
    pub fn new(chart: &Chart, comps: Vec<Expr>) -> Result<LorentzConnection> {
        let dim = chart.dim();
        if comps.len() != dim.pow(3) {
            return Err(Error::Shape(format!(
                "expected {} Lorentz-connection components, got {}",
                dim.pow(3),
                comps.len()
            )));
        }
        let a = LorentzConnection {
            chart: chart.clone(),
            comps,
        };
        for lam in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    if a.get(lam, i, j) != &a.get(lam, j, i).neg() {
                        return Err(Error::Symmetry(format!(
                            "A_{lam}^{{{i}{j}}} is not antisymmetric in the frame pair"
                        )));
                    }
                }
            }
        }
        Ok(a)
    }

    /// Build by evaluating `f(λ, a, b)` on every triple.
    pub fn from_fn(chart: &Chart, mut f: impl FnMut(usize, usize, usize) -> Expr) -> Result<LorentzConnection> {
        let dim = chart.dim();
        let mut comps = Vec::with_capacity(dim.pow(3));
        for lam in 0..dim {
            for a in 0..dim {
                for b in 0..dim {
                    comps.push(f(lam, a, b));
                }
            }
        }
        LorentzConnection::new(chart, comps)
    }

    /// Component `A_λ^{ab}`.
    pub fn get(&self, lam: usize, a: usize, b: usize) -> &Expr {
        let d = self.chart.dim();
        assert!(lam < d && a < d && b < d, "index out of range");
        &self.comps[(lam * d + a) * d + b]
    }

    /// The chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &LorentzConnection) -> Result<LorentzConnection> {
        self.chart.expect_same(&other.chart)?;
        Ok(LorentzConnection {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(x, y)| x.sub(y))
                .collect(),
        })
    }

    /// Zero-test every component and combine the verdicts.
    pub fn is_zero(&self, cfg: &ZeroCfg) -> Result<Verdict> {
        let mut verdict = Verdict::ProvenZero;
        for c in &self.comps {
            verdict = verdict.combine(is_zero(c, cfg)?);
            if !verdict.is_zero() {
                break;
            }
        }
        Ok(verdict)
    }

    /// True if every component is the literal zero.
    pub fn is_zero_literal(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero_literal())
    }
}

/// Project a world connection onto the Lorentz connection determined by a
/// tetrad:
///
/// `A_λ^{ab} = ½ (η^{kb} h^a_μ − η^{ka} h^b_μ)(∂_λ h^μ_k − h^ν_k Γ_λ^μ_ν)`,
///
/// returned together with the world connection `Γ_h` that `A` induces back
/// through [`lorentz_world_connection`]. `Γ_h` preserves the tetrad metric,
/// and the projection leaves Lorentz-induced connections fixed.
pub fn lorentz_connection(
    gamma: &WorldConnection,
    h: &TetradField,
) -> Result<(LorentzConnection, WorldConnection)> {
    gamma.chart().expect_same(h.chart())?;
    let chart = h.chart().clone();
    let dim = chart.dim();
    let eta = Signature::Lorentzian.frame_metric(dim);
    // D_λ^μ_k = ∂_λ h^μ_k − h^ν_k Γ_λ^μ_ν.
    let mut d = vec![Expr::zero(); dim.pow(3)];
    for lam in 0..dim {
        for mu in 0..dim {
            for k in 0..dim {
                let mut terms = vec![chart.partial(h.inv(mu, k), lam)?];
                for nu in 0..dim {
                    terms.push(h.inv(nu, k).mul(gamma.get(lam, mu, nu)).neg());
                }
                d[(lam * dim + mu) * dim + k] = Expr::sum(terms);
            }
        }
    }
    let a = LorentzConnection::from_fn(&chart, |lam, aa, bb| {
        let mut terms = Vec::new();
        for k in 0..dim {
            for mu in 0..dim {
                let dv = &d[(lam * dim + mu) * dim + k];
                if dv.is_zero_literal() {
                    continue;
                }
                // η^{kb} h^a_μ contributes only for k = b (η diagonal),
                // and η^{ka} h^b_μ only for k = a.
                if k == bb {
                    terms.push(
                        h.get(aa, mu)
                            .mul(dv)
                            .scale(&BigRational::new(BigInt::from(eta[k]), BigInt::from(2))),
                    );
                }
                if k == aa {
                    terms.push(
                        h.get(bb, mu)
                            .mul(dv)
                            .scale(&BigRational::new(BigInt::from(-eta[k]), BigInt::from(2))),
                    );
                }
            }
        }
        Expr::sum(terms)
    })?;
    let gamma_h = lorentz_world_connection(&a, h)?;
    Ok((a, gamma_h))
}

/// The world connection induced by Lorentz-connection coefficients:
///
/// `Γ_λ^μ_ν = h^k_ν ∂_λ h^μ_k + η_{ka} h^μ_b h^k_ν A_λ^{ab}`.
pub fn lorentz_world_connection(a: &LorentzConnection, h: &TetradField) -> Result<WorldConnection> {
    a.chart().expect_same(h.chart())?;
    let chart = h.chart().clone();
    let dim = chart.dim();
    let eta = Signature::Lorentzian.frame_metric(dim);
    let mut coeffs = Vec::with_capacity(dim.pow(3));
    for lam in 0..dim {
        for mu in 0..dim {
            for nu in 0..dim {
                let mut terms = Vec::new();
                for k in 0..dim {
                    terms.push(h.get(k, nu).mul(&chart.partial(h.inv(mu, k), lam)?));
                    for b in 0..dim {
                        // η_{ka} collapses the frame sum to a = k.
                        let av = a.get(lam, k, b);
                        if av.is_zero_literal() {
                            continue;
                        }
                        terms.push(
                            h.inv(mu, b)
                                .mul(h.get(k, nu))
                                .mul(av)
                                .scale(&BigRational::from_integer(eta[k].into())),
                        );
                    }
                }
                coeffs.push(Expr::sum(terms));
            }
        }
    }
    WorldConnection::new(&chart, coeffs)
}

/// Build a normalized time-like one-form and the lorentzian metric
/// `g = 2h⁰⊗h⁰ − g^R` from a riemannian metric `g^R` and a one-form `σ`
/// that vanishes nowhere: `h⁰ = σ / √(g^R(σ, σ))`.
///
/// Verifies that `h⁰` has unit `g^R`-norm and that `g` really is lorentzian
/// at sample points. Points where `σ` vanishes are reported as errors.
pub fn spacetime_metric(
    sigma: &TensorField,
    g_r: &MetricField,
) -> Result<(TensorField, MetricField)> {
    spacetime_metric_with(sigma, g_r, &ZeroCfg::default())
}

/// As [`spacetime_metric`] with an explicit zero-test configuration.
pub fn spacetime_metric_with(
    sigma: &TensorField,
    g_r: &MetricField,
    cfg: &ZeroCfg,
) -> Result<(TensorField, MetricField)> {
    sigma.chart().expect_same(g_r.chart())?;
    if sigma.valence() != (0, 1) {
        return Err(Error::Shape(format!(
            "expected a one-form, got a {:?} tensor",
            sigma.valence()
        )));
    }
    if g_r.signature() != Signature::Riemannian {
        return Err(Error::Degenerate(
            "the base metric must be riemannian".into(),
        ));
    }
    let chart = g_r.chart().clone();
    let dim = chart.dim();
    let mut terms = Vec::with_capacity(dim * dim);
    for mu in 0..dim {
        for nu in 0..dim {
            terms.push(g_r.up(mu, nu).mul(sigma.get(&[mu])?).mul(sigma.get(&[nu])?));
        }
    }
    let norm2 = Expr::sum(terms);
    check_nowhere_zero(&norm2, cfg)?;
    let inv_norm = norm2.sqrt().pow(-1);
    let h0 = sigma.map(|c| c.mul(&inv_norm));

    // Unit-norm check g^{R,μν} h⁰_μ h⁰_ν = 1.
    let mut unit = Vec::with_capacity(dim * dim + 1);
    for mu in 0..dim {
        for nu in 0..dim {
            unit.push(g_r.up(mu, nu).mul(h0.get(&[mu])?).mul(h0.get(&[nu])?));
        }
    }
    unit.push(Expr::int(-1));
    if let Verdict::Nonzero { witness, .. } = is_zero(&Expr::sum(unit), cfg)? {
        return Err(Error::Degenerate(format!(
            "normalized one-form failed its unit-norm check at {witness:?}"
        )));
    }

    // τ^μ = g^{R,μν} h⁰_ν raises the normalized form; the inverse of
    // g = 2h⁰⊗h⁰ − g^R is then 2τ⊗τ − g^{R,−1}.
    let tau: Vec<Expr> = (0..dim)
        .map(|mu| {
            Expr::sum(
                (0..dim)
                    .map(|nu| g_r.up(mu, nu).mul(h0.get(&[nu]).expect("in range")))
                    .collect(),
            )
        })
        .collect();
    let lower = TensorField::from_fn(&chart, 0, 2, vec![SlotSymmetry::Symmetric(0, 1)], |idx| {
        let (mu, nu) = (idx[0], idx[1]);
        h0.get(&[mu])
            .expect("in range")
            .mul(h0.get(&[nu]).expect("in range"))
            .scale(&BigRational::from_integer(2.into()))
            .sub(g_r.dn(mu, nu))
    })?;
    let upper = TensorField::from_fn(&chart, 2, 0, vec![SlotSymmetry::Symmetric(0, 1)], |idx| {
        let (mu, nu) = (idx[0], idx[1]);
        tau[mu]
            .mul(&tau[nu])
            .scale(&BigRational::from_integer(2.into()))
            .sub(g_r.up(mu, nu))
    })?;
    let g = MetricField::with_inverse(&chart, lower, upper, Signature::Lorentzian, cfg)?;
    Ok((h0, g))
}

/// Error if `norm2` vanishes at any admissible sample point (or cannot be
/// sampled at all).
fn check_nowhere_zero(norm2: &Expr, cfg: &ZeroCfg) -> Result<()> {
    let vars: Vec<Symbol> = norm2.free_vars().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0f0e);
    let needed = 8usize;
    let mut found = 0usize;
    for _ in 0..cfg.max_resample.max(needed) {
        let env: HashMap<Symbol, BigRational> = vars
            .iter()
            .map(|v| {
                let raw = rng.gen_range(1..=9i64);
                let sign = if cfg.positive.contains(v) || rng.gen_bool(0.5) {
                    1
                } else {
                    -1
                };
                let den = rng.gen_range(2..=5i64);
                (v.clone(), BigRational::new(BigInt::from(sign * raw), BigInt::from(den)))
            })
            .collect();
        if norm2.is_rational() {
            match eval_exact(norm2, &env) {
                Err(_) => continue,
                Ok(v) if v.is_zero() => {
                    return Err(Error::Degenerate(format!(
                        "the one-form vanishes at the sample point {env:?}"
                    )))
                }
                Ok(_) => found += 1,
            }
        } else {
            let fenv: HashMap<Symbol, f64> =
                env.iter().map(|(s, r)| (s.clone(), rational_to_f64(r))).collect();
            match eval_f64(norm2, &fenv) {
                Err(_) => continue,
                Ok((v, mag)) if v.abs() <= cfg.tol * mag.max(1.0) => {
                    return Err(Error::Degenerate(format!(
                        "the one-form vanishes at the sample point {env:?}"
                    )))
                }
                Ok(_) => found += 1,
            }
        }
        if found == needed {
            return Ok(());
        }
    }
    Err(Error::SamplingExhausted(cfg.max_resample))
}

/// The obstruction 3-form `dh⁰ ∧ h⁰` as a fully antisymmetric (0,3)
/// tensor: `ω_{μνλ} = (dh⁰)_{μν} h⁰_λ + (dh⁰)_{νλ} h⁰_μ + (dh⁰)_{λμ} h⁰_ν`
/// with `(dh⁰)_{μν} = ∂_μ h⁰_ν − ∂_ν h⁰_μ`.
pub fn integrability_form(h0: &TensorField) -> Result<TensorField> {
    if h0.valence() != (0, 1) {
        return Err(Error::Shape(format!(
            "expected a one-form, got a {:?} tensor",
            h0.valence()
        )));
    }
    let chart = h0.chart().clone();
    let dim = chart.dim();
    let mut dh = vec![Expr::zero(); dim * dim];
    for mu in 0..dim {
        for nu in 0..dim {
            dh[mu * dim + nu] = chart
                .partial(h0.get(&[nu])?, mu)?
                .sub(&chart.partial(h0.get(&[mu])?, nu)?);
        }
    }
    TensorField::from_fn(
        &chart,
        0,
        3,
        vec![
            SlotSymmetry::Antisymmetric(0, 1),
            SlotSymmetry::Antisymmetric(1, 2),
        ],
        |idx| {
            let (mu, nu, lam) = (idx[0], idx[1], idx[2]);
            Expr::sum(vec![
                dh[mu * dim + nu].mul(h0.get(&[lam]).expect("in range")),
                dh[nu * dim + lam].mul(h0.get(&[mu]).expect("in range")),
                dh[lam * dim + mu].mul(h0.get(&[nu]).expect("in range")),
            ])
        },
    )
}

/// Whether `dh⁰ ∧ h⁰ = 0`, i.e. whether the codistribution orthogonal to
/// the time-like form is integrable into spatial hypersurfaces.
pub fn integrability_check(h0: &TensorField, cfg: &ZeroCfg) -> Result<Verdict> {
    integrability_form(h0)?.is_zero(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_form(chart: &Chart, comps: &[&str]) -> TensorField {
        TensorField::from_fn(chart, 0, 1, Vec::new(), |idx| {
            chart.parse(comps[idx[0]]).unwrap()
        })
        .unwrap()
    }

    #[test]
    fn identity_tetrad_induces_constant_metrics() {
        let chart = Chart::new(4).unwrap();
        let h = TetradField::identity(&chart);
        let g = metric_from_tetrad(&h).unwrap();
        assert_eq!(g.lower(), MetricField::minkowski(&chart).unwrap().lower());
        let gr = riemannian_from_tetrad(&h).unwrap();
        assert_eq!(gr.lower(), MetricField::euclidean(&chart).unwrap().lower());
    }

    #[test]
    fn diagonal_tetrads_square_their_entries() {
        let chart = Chart::new(3).unwrap();
        let f1 = chart.parse("1 + x0^2").unwrap();
        let f2 = chart.parse("exp(x1)").unwrap();
        let mut coframe = vec![Expr::zero(); 9];
        coframe[0] = Expr::int(2);
        coframe[4] = f1.clone();
        coframe[8] = f2.clone();
        let h = TetradField::new(&chart, coframe).unwrap();
        let g = metric_from_tetrad(&h).unwrap();
        assert_eq!(g.dn(0, 0), &Expr::int(4));
        assert_eq!(g.dn(1, 1), &f1.mul(&f1).neg());
        assert_eq!(g.dn(2, 2), &f2.mul(&f2).neg());
        assert_eq!(g.dn(0, 1), &Expr::zero());
    }

    #[test]
    fn lorentzian_metric_is_twice_h0_minus_riemannian() {
        // The frame metric satisfies η = 2e⁰⊗e⁰ − 𝟙, so the induced metrics
        // satisfy the same relation with h⁰ the 0-th coframe row — exactly,
        // component by component.
        let chart = Chart::new(3).unwrap();
        let coframe = vec![
            Expr::one(),
            chart.parse("x1").unwrap(),
            Expr::zero(),
            Expr::zero(),
            Expr::int(2),
            chart.parse("x0").unwrap(),
            chart.parse("x2").unwrap(),
            Expr::zero(),
            Expr::one(),
        ];
        let h = TetradField::new(&chart, coframe).unwrap();
        let g = metric_from_tetrad(&h).unwrap();
        let gr = riemannian_from_tetrad(&h).unwrap();
        for mu in 0..3 {
            for nu in 0..3 {
                let twice = h
                    .get(0, mu)
                    .mul(h.get(0, nu))
                    .scale(&BigRational::from_integer(2.into()));
                assert_eq!(g.dn(mu, nu), &twice.sub(gr.dn(mu, nu)));
            }
        }
    }

    #[test]
    fn flat_identity_projection_is_zero() {
        let chart = Chart::new(4).unwrap();
        let h = TetradField::identity(&chart);
        let (a, gamma_h) = lorentz_connection(&WorldConnection::zero(&chart), &h).unwrap();
        assert!(a.is_zero_literal());
        assert!(gamma_h.is_zero_literal());
    }

    #[test]
    fn constant_lorentz_coefficients_round_trip() {
        let chart = Chart::new(3).unwrap();
        let h = TetradField::identity(&chart);
        let a = LorentzConnection::from_fn(&chart, |lam, i, j| match (i, j) {
            (0, 1) => Expr::int(2 + lam as i64),
            (1, 0) => Expr::int(-(2 + lam as i64)),
            (1, 2) => Expr::one(),
            (2, 1) => Expr::int(-1),
            _ => Expr::zero(),
        })
        .unwrap();
        let gamma = lorentz_world_connection(&a, &h).unwrap();
        let (a2, gamma_h) = lorentz_connection(&gamma, &h).unwrap();
        assert!(a2.sub(&a).unwrap().is_zero_literal());
        assert!(gamma_h.sub(&gamma).unwrap().is_zero_literal());
    }

    #[test]
    fn lorentz_antisymmetry_is_enforced() {
        let chart = Chart::new(2).unwrap();
        let bad = LorentzConnection::new(&chart, vec![Expr::one(); 8]);
        assert!(matches!(bad, Err(Error::Symmetry(_))));
    }

    #[test]
    fn trivial_spacetime_structures() {
        let chart = Chart::new(4).unwrap();
        let gr = MetricField::euclidean(&chart).unwrap();
        let sigma = one_form(&chart, &["1", "0", "0", "0"]);
        let (h0, g) = spacetime_metric(&sigma, &gr).unwrap();
        // Unit norm-squared folds exactly, so the output is literally
        // Minkowski and h⁰ is literally dx⁰.
        assert_eq!(h0, sigma);
        assert_eq!(g.lower(), MetricField::minkowski(&chart).unwrap().lower());
        // Scaling σ does not change the result.
        let doubled = sigma.scale(&Expr::int(2));
        let (h0b, gb) = spacetime_metric(&doubled, &gr).unwrap();
        assert_eq!(h0b.components(), sigma.components());
        assert_eq!(gb.lower(), g.lower());
    }

    #[test]
    fn tilted_spacetime_structure_passes_its_checks() {
        let chart = Chart::new(4).unwrap();
        let gr = MetricField::euclidean(&chart).unwrap();
        let sigma = one_form(&chart, &["1", "0", "x1", "0"]);
        let (h0, g) = spacetime_metric(&sigma, &gr).unwrap();
        assert_eq!(g.signature(), Signature::Lorentzian);
        // g_{00} = 2/(1 + x1²) − 1.
        let cfg = ZeroCfg::default();
        let want = chart.parse("2*(1 + x1^2)^-1 - 1").unwrap();
        let diff = g.dn(0, 0).sub(&want);
        assert!(is_zero(&diff, &cfg).unwrap().is_zero());
        let _ = h0;
    }

    #[test]
    fn vanishing_one_forms_are_rejected() {
        let chart = Chart::new(2).unwrap();
        let gr = MetricField::euclidean(&chart).unwrap();
        let zero = TensorField::zeros(&chart, 0, 1);
        assert!(matches!(
            spacetime_metric(&zero, &gr),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn integrability_of_closed_and_tilted_forms() {
        let chart = Chart::new(4).unwrap();
        let cfg = ZeroCfg::default();
        // dx⁰ and f(x⁰)dx⁰ are integrable.
        let flat = one_form(&chart, &["1", "0", "0", "0"]);
        assert_eq!(integrability_check(&flat, &cfg).unwrap(), Verdict::ProvenZero);
        let scaled = one_form(&chart, &["1 + x0^2", "0", "0", "0"]);
        assert_eq!(integrability_check(&scaled, &cfg).unwrap(), Verdict::ProvenZero);
        // dx⁰ + x¹dx² is not: the obstruction 3-form is the constant
        // volume element of the (x0, x1, x2) directions.
        let tilted = one_form(&chart, &["1", "0", "x1", "0"]);
        let omega = integrability_form(&tilted).unwrap();
        assert_eq!(omega.get(&[0, 1, 2]).unwrap(), &Expr::one());
        assert_eq!(omega.get(&[1, 2, 0]).unwrap(), &Expr::one());
        assert_eq!(omega.get(&[1, 0, 2]).unwrap(), &Expr::int(-1));
        assert_eq!(omega.get(&[0, 1, 3]).unwrap(), &Expr::zero());
        assert!(!integrability_check(&tilted, &cfg).unwrap().is_zero());
    }
}
