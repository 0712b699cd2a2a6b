//! Metric fields: symmetric nondegenerate (0,2) tensors with an exact
//! symbolic inverse and a signature tag verified at sample points.

use super::{Chart, SlotSymmetry, TensorField};
use crate::error::{Error, Result};
use crate::numeric;
use crate::symexpr::eval::{eval_exact, eval_f64, rational_to_f64};
use crate::symexpr::zerotest::{is_zero, Verdict};
use crate::symexpr::{Expr, Symbol, ZeroCfg};
use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};

/// Metric signature tag. The convention is "mostly minus": a lorentzian
/// metric has eigenvalue signs `(+, −, …, −)`, a riemannian one is positive
/// definite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Lorentzian,
    Riemannian,
}

impl Signature {
    /// Expected inertia `(positive, negative, zero)` in the given dimension.
    fn inertia(self, dim: usize) -> (usize, usize, usize) {
        match self {
            Signature::Lorentzian => (1, dim - 1, 0),
            Signature::Riemannian => (dim, 0, 0),
        }
    }

    /// The constant frame metric of this signature: `diag(1, −1, …)` or the
    /// identity.
    pub fn frame_metric(self, dim: usize) -> Vec<i64> {
        (0..dim)
            .map(|i| {
                if i == 0 || self == Signature::Riemannian {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }
}

/// A nondegenerate symmetric metric together with its inverse.
///
/// Construction verifies, in order: symmetry of the supplied components,
/// symbolic nondegeneracy of the determinant, `g·g⁻¹ = δ` (exactly where
/// possible, probabilistically otherwise), and the signature tag by exact
/// congruence diagonalization of the component matrix at several sample
/// points. Failures are hard errors.
#[derive(Debug, Clone)]
pub struct MetricField {
    chart: Chart,
    lower: TensorField,
    upper: TensorField,
    det: Expr,
    signature: Signature,
}

impl MetricField {
    /// Build a metric from its covariant components, computing the inverse
    /// symbolically by adjugate over determinant.
    pub fn new(chart: &Chart, lower: TensorField, signature: Signature) -> Result<MetricField> {
        MetricField::new_with(chart, lower, signature, &ZeroCfg::default())
    }

    /// As [`MetricField::new`] with an explicit zero-test configuration.
    pub fn new_with(
        chart: &Chart,
        lower: TensorField,
        signature: Signature,
        cfg: &ZeroCfg,
    ) -> Result<MetricField> {
        let lower = declare_symmetric(chart, lower)?;
        let dim = chart.dim();
        let m = matrix_of(&lower, dim);
        let det = det_expr(&m);
        check_nondegenerate(&det, cfg)?;
        let inv_det = det.pow(-1);
        // Fill the upper triangle and mirror, so the inverse is symmetric
        // by construction (cofactors of a symmetric matrix agree only up to
        // canonical-form differences otherwise).
        let mut inv = vec![vec![Expr::zero(); dim]; dim];
        for mu in 0..dim {
            for nu in mu..dim {
                // Inverse entry (μ,ν) = cofactor (ν,μ) / det; the matrix is
                // symmetric so the transposition is immaterial.
                let c = cofactor(&m, nu, mu).mul(&inv_det);
                inv[mu][nu] = c.clone();
                inv[nu][mu] = c;
            }
        }
        let upper = TensorField::new(
            chart,
            2,
            0,
            inv.into_iter().flatten().collect(),
            vec![SlotSymmetry::Symmetric(0, 1)],
        )?;
        MetricField::assemble(chart, lower, upper, det, signature, cfg, false)
    }

    /// Build a metric from known covariant *and* contravariant components.
    /// The product `g·g⁻¹ = δ` is verified instead of recomputed.
    pub fn with_inverse(
        chart: &Chart,
        lower: TensorField,
        upper: TensorField,
        signature: Signature,
        cfg: &ZeroCfg,
    ) -> Result<MetricField> {
        let lower = declare_symmetric(chart, lower)?;
        let (p, q) = upper.valence();
        if (p, q) != (2, 0) {
            return Err(Error::Shape(format!(
                "metric inverse must be a (2,0) tensor, got ({p},{q})"
            )));
        }
        let dim = chart.dim();
        let det = det_expr(&matrix_of(&lower, dim));
        check_nondegenerate(&det, cfg)?;
        MetricField::assemble(chart, lower, upper, det, signature, cfg, true)
    }

    /// Convenience constructor for a diagonal metric: the inverse is the
    /// entrywise reciprocal, no adjugate needed.
    pub fn diagonal(chart: &Chart, entries: &[Expr], signature: Signature) -> Result<MetricField> {
        let dim = chart.dim();
        if entries.len() != dim {
            return Err(Error::Shape(format!(
                "{} diagonal entries for dimension {dim}",
                entries.len()
            )));
        }
        let lower = TensorField::from_fn(chart, 0, 2, vec![SlotSymmetry::Symmetric(0, 1)], |idx| {
            if idx[0] == idx[1] {
                entries[idx[0]].clone()
            } else {
                Expr::zero()
            }
        })?;
        let upper = TensorField::from_fn(chart, 2, 0, vec![SlotSymmetry::Symmetric(0, 1)], |idx| {
            if idx[0] == idx[1] {
                entries[idx[0]].pow(-1)
            } else {
                Expr::zero()
            }
        })?;
        MetricField::with_inverse(chart, lower, upper, signature, &ZeroCfg::default())
    }

    /// The constant metric `diag(1, −1, …, −1)`.
    pub fn minkowski(chart: &Chart) -> Result<MetricField> {
        let entries: Vec<Expr> = Signature::Lorentzian
            .frame_metric(chart.dim())
            .into_iter()
            .map(Expr::int)
            .collect();
        MetricField::diagonal(chart, &entries, Signature::Lorentzian)
    }

    /// The constant identity metric.
    pub fn euclidean(chart: &Chart) -> Result<MetricField> {
        let entries = vec![Expr::one(); chart.dim()];
        MetricField::diagonal(chart, &entries, Signature::Riemannian)
    }

    fn assemble(
        chart: &Chart,
        lower: TensorField,
        upper: TensorField,
        det: Expr,
        signature: Signature,
        cfg: &ZeroCfg,
        verify_product: bool,
    ) -> Result<MetricField> {
        let dim = chart.dim();
        if verify_product || cfg!(debug_assertions) {
            for mu in 0..dim {
                for sigma in 0..dim {
                    let mut acc = Vec::with_capacity(dim);
                    for nu in 0..dim {
                        acc.push(lower.get(&[mu, nu])?.mul(upper.get(&[nu, sigma])?));
                    }
                    let mut s = Expr::sum(acc);
                    if mu == sigma {
                        s = s.sub(&Expr::one());
                    }
                    if let Verdict::Nonzero { witness, .. } = is_zero(&s, cfg)? {
                        return Err(Error::Degenerate(format!(
                            "g·g⁻¹ differs from the identity in component ({mu},{sigma}) at {witness:?}"
                        )));
                    }
                }
            }
        }
        verify_signature(&lower, dim, signature, cfg)?;
        Ok(MetricField {
            chart: chart.clone(),
            lower,
            upper,
            det,
            signature,
        })
    }

    /// The chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Covariant components g_{μν}.
    pub fn lower(&self) -> &TensorField {
        &self.lower
    }

    /// Contravariant components g^{μν}.
    pub fn upper(&self) -> &TensorField {
        &self.upper
    }

    /// Shorthand for a covariant component.
    pub fn dn(&self, mu: usize, nu: usize) -> &Expr {
        self.lower.get(&[mu, nu]).expect("index in range")
    }

    /// Shorthand for a contravariant component.
    pub fn up(&self, mu: usize, nu: usize) -> &Expr {
        self.upper.get(&[mu, nu]).expect("index in range")
    }

    /// Symbolic determinant of the covariant components.
    pub fn det(&self) -> &Expr {
        &self.det
    }

    /// The signature tag.
    pub fn signature(&self) -> Signature {
        self.signature
    }
}

fn declare_symmetric(chart: &Chart, t: TensorField) -> Result<TensorField> {
    chart.expect_same(t.chart())?;
    let (p, q) = t.valence();
    if (p, q) != (0, 2) {
        return Err(Error::Shape(format!(
            "metric components must form a (0,2) tensor, got ({p},{q})"
        )));
    }
    // Re-wrap with the symmetry declared so it is verified even if the
    // caller omitted the flag.
    TensorField::new(
        chart,
        0,
        2,
        t.components().to_vec(),
        vec![SlotSymmetry::Symmetric(0, 1)],
    )
}

fn check_nondegenerate(det: &Expr, cfg: &ZeroCfg) -> Result<()> {
    match is_zero(det, cfg)? {
        Verdict::Nonzero { .. } => Ok(()),
        _ => Err(Error::Degenerate(
            "metric determinant vanishes identically (or at every sampled point)".into(),
        )),
    }
}

/// Verify the inertia of the component matrix at several random sample
/// points by exact congruence diagonalization. Points where the matrix is
/// singular or a component fails to evaluate are skipped (within a retry
/// budget) — a metric may degenerate on a thin locus without being
/// degenerate as a field.
fn verify_signature(
    lower: &TensorField,
    dim: usize,
    signature: Signature,
    cfg: &ZeroCfg,
) -> Result<()> {
    let want = signature.inertia(dim);
    let mut vars: BTreeSet<Symbol> = BTreeSet::new();
    for c in lower.components() {
        vars.extend(c.free_vars());
    }
    let vars: Vec<Symbol> = vars.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5161);
    let needed = 4usize;
    let mut found = 0usize;
    for _ in 0..cfg.max_resample.max(needed) {
        // Small-magnitude points keep generic metrics (identity plus a
        // perturbation) inside the region where their signature is visible.
        let env: HashMap<Symbol, BigRational> = vars
            .iter()
            .map(|v| {
                let raw = rng.gen_range(1..=3i64);
                let sign = if cfg.positive.contains(v) || rng.gen_bool(0.5) {
                    1
                } else {
                    -1
                };
                let den = rng.gen_range(7..=12i64);
                (v.clone(), BigRational::new(BigInt::from(sign * raw), BigInt::from(den)))
            })
            .collect();
        let Some(matrix) = eval_matrix(lower, dim, &env) else {
            continue;
        };
        let inertia = numeric::signature(&matrix);
        if inertia.2 > 0 {
            continue; // singular sample point; try another
        }
        if inertia != want {
            return Err(Error::Degenerate(format!(
                "signature check failed: expected inertia {want:?} for {signature:?}, found {inertia:?}"
            )));
        }
        found += 1;
        if found == needed {
            return Ok(());
        }
    }
    Err(Error::SamplingExhausted(cfg.max_resample))
}

/// Evaluate the component matrix at a rational point: exactly when the
/// components are rational, through correctly-rounded floats otherwise
/// (sign decisions at generic points are robust to that rounding).
fn eval_matrix(
    lower: &TensorField,
    dim: usize,
    env: &HashMap<Symbol, BigRational>,
) -> Option<Vec<Vec<BigRational>>> {
    let fenv: HashMap<Symbol, f64> = env
        .iter()
        .map(|(s, r)| (s.clone(), rational_to_f64(r)))
        .collect();
    let mut m = vec![vec![BigRational::from_integer(0.into()); dim]; dim];
    for mu in 0..dim {
        for nu in 0..dim {
            let c = lower.get(&[mu, nu]).ok()?;
            let val = if c.is_rational() {
                eval_exact(c, env).ok()?
            } else {
                BigRational::from_float(eval_f64(c, &fenv).ok()?.0)?
            };
            m[mu][nu] = val;
        }
    }
    Some(m)
}

fn matrix_of(t: &TensorField, dim: usize) -> Vec<Vec<Expr>> {
    let mut m = vec![vec![Expr::zero(); dim]; dim];
    for mu in 0..dim {
        for nu in 0..dim {
            m[mu][nu] = t.get(&[mu, nu]).expect("index in range").clone();
        }
    }
    m
}

/// Determinant of a small symbolic matrix by cofactor expansion.
pub(crate) fn det_expr(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut terms = Vec::with_capacity(n);
            for col in 0..n {
                if m[0][col].is_zero_literal() {
                    continue;
                }
                let c = cofactor(m, 0, col);
                terms.push(m[0][col].mul(&c));
            }
            Expr::sum(terms)
        }
    }
}

/// Signed cofactor: (−1)^{row+col} times the (row,col) minor.
pub(crate) fn cofactor(m: &[Vec<Expr>], row: usize, col: usize) -> Expr {
    let n = m.len();
    let minor: Vec<Vec<Expr>> = (0..n)
        .filter(|&r| r != row)
        .map(|r| {
            (0..n)
                .filter(|&c| c != col)
                .map(|c| m[r][c].clone())
                .collect()
        })
        .collect();
    let d = det_expr(&minor);
    if (row + col) % 2 == 0 {
        d
    } else {
        d.neg()
    }
}

/// Full inverse of a small symbolic matrix: `(inverse, determinant)`.
/// The caller is responsible for checking that the determinant is nonzero.
pub(crate) fn invert_expr_matrix(m: &[Vec<Expr>]) -> (Vec<Vec<Expr>>, Expr) {
    let n = m.len();
    let det = det_expr(m);
    let inv_det = det.pow(-1);
    let mut inv = vec![vec![Expr::zero(); n]; n];
    for r in 0..n {
        for c in 0..n {
            inv[r][c] = cofactor(m, c, r).mul(&inv_det);
        }
    }
    (inv, det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_metrics_invert_entrywise() {
        let chart = Chart::new(2).unwrap();
        let g = MetricField::diagonal(
            &chart,
            &[Expr::one(), chart.parse("x0^2").unwrap()],
            Signature::Riemannian,
        )
        .unwrap();
        assert_eq!(g.up(1, 1), &chart.parse("x0^-2").unwrap());
        assert_eq!(g.det(), &chart.parse("x0^2").unwrap());
    }

    #[test]
    fn dense_metrics_get_adjugate_inverses() {
        let chart = Chart::new(2).unwrap();
        let x0 = chart.parse("x0").unwrap();
        let lower = TensorField::new(
            &chart,
            0,
            2,
            vec![Expr::int(2), x0.clone(), x0.clone(), Expr::one()],
            vec![SlotSymmetry::Symmetric(0, 1)],
        )
        .unwrap();
        let g = MetricField::new(&chart, lower, Signature::Riemannian);
        // Positive definite only for x0² < 2; the small-point signature
        // sampling stays within that region.
        let g = g.unwrap();
        // det = 2 − x0²; check one inverse entry: g^{01} = −x0/(2 − x0²).
        let det = chart.parse("2 - x0^2").unwrap();
        assert_eq!(g.det(), &det);
        assert_eq!(g.up(0, 1), &x0.neg().mul(&det.pow(-1)));
    }

    #[test]
    fn singular_metrics_are_rejected() {
        let chart = Chart::new(2).unwrap();
        let one = Expr::one();
        let lower = TensorField::new(
            &chart,
            0,
            2,
            vec![one.clone(), one.clone(), one.clone(), one.clone()],
            vec![SlotSymmetry::Symmetric(0, 1)],
        )
        .unwrap();
        assert!(matches!(
            MetricField::new(&chart, lower, Signature::Riemannian),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn signature_tags_are_verified() {
        let chart = Chart::new(3).unwrap();
        let entries = [Expr::one(), Expr::int(-1), Expr::int(-1)];
        assert!(MetricField::diagonal(&chart, &entries, Signature::Lorentzian).is_ok());
        assert!(matches!(
            MetricField::diagonal(&chart, &entries, Signature::Riemannian),
            Err(Error::Degenerate(_))
        ));
        assert!(MetricField::euclidean(&chart).is_ok());
        assert!(MetricField::minkowski(&chart).is_ok());
    }

    #[test]
    fn supplied_inverses_are_checked() {
        let chart = Chart::new(2).unwrap();
        let lower = TensorField::new(
            &chart,
            0,
            2,
            vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::one()],
            Vec::new(),
        )
        .unwrap();
        let wrong = TensorField::new(
            &chart,
            2,
            0,
            vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::int(2)],
            Vec::new(),
        )
        .unwrap();
        assert!(matches!(
            MetricField::with_inverse(&chart, lower, wrong, Signature::Riemannian, &ZeroCfg::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn matrix_helpers_agree_with_exact_linear_algebra() {
        let m: Vec<Vec<Expr>> = vec![
            vec![Expr::int(2), Expr::one(), Expr::zero()],
            vec![Expr::zero(), Expr::int(3), Expr::one()],
            vec![Expr::one(), Expr::zero(), Expr::one()],
        ];
        assert_eq!(det_expr(&m), Expr::int(7));
        let (inv, det) = invert_expr_matrix(&m);
        assert_eq!(det, Expr::int(7));
        // Row 0 of the inverse: (3, −1, 1)/7.
        assert_eq!(inv[0][0], Expr::rational(3, 7));
        assert_eq!(inv[0][1], Expr::rational(-1, 7));
        assert_eq!(inv[0][2], Expr::rational(1, 7));
    }
}
