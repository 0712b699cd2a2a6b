//! Clifford algebra over four-dimensional Minkowski space with exact
//! complex-rational matrices, Lorentz generators, tetrad-dependent covector
//! representations, spin connections induced by world connections, and
//! Dirac-operator assembly.
//!
//! The gamma matrices carry Gaussian-rational entries, so the Clifford
//! relation, the Lorentz algebra, and the boost equivariance of the Dirac
//! operator are verified by exact matrix arithmetic.  Field-level objects
//! (covector representations, spin connections, Dirac images of spinor
//! fields) carry scalar expressions and are compared through the symbolic
//! zero test.
//!
//! Everything here is fixed to four dimensions: the gamma representation
//! acts on a four-component spinor space, and the frame metric is
//! `η = diag(1, −1, −1, −1)`.

use std::fmt;

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};
use crate::geometry::metric::invert_expr_matrix;
use crate::geometry::tetrad::{lorentz_connection, TetradField};
use crate::geometry::{Chart, Signature, TensorField, WorldConnection};
use crate::symexpr::vartable::{Role, Symbol, VarTable};
use crate::symexpr::zerotest::{is_zero, Verdict, ZeroCfg};
use crate::symexpr::Expr;

/// Spinor-space dimension; the module is fixed to four spacetime
/// dimensions.
pub const DIM: usize = 4;

/// η^{aa} entries of the Minkowski frame metric.
fn eta() -> [i64; 4] {
    let v = Signature::Lorentzian.frame_metric(DIM);
    [v[0], v[1], v[2], v[3]]
}

// ---------------------------------------------------------------------------
// Exact complex scalars and matrices
// ---------------------------------------------------------------------------

/// A Gaussian rational: a complex number with exact rational real and
/// imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CRational {
    /// Real part.
    pub re: BigRational,
    /// Imaginary part.
    pub im: BigRational,
}

impl CRational {
    /// Build from parts.
    pub fn new(re: BigRational, im: BigRational) -> CRational {
        CRational { re, im }
    }

    /// A real integer.
    pub fn int(n: i64) -> CRational {
        CRational {
            re: BigRational::from_integer(n.into()),
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit times an integer.
    pub fn imag(n: i64) -> CRational {
        CRational {
            re: BigRational::zero(),
            im: BigRational::from_integer(n.into()),
        }
    }

    /// Zero.
    pub fn zero() -> CRational {
        CRational::default()
    }

    /// One.
    pub fn one() -> CRational {
        CRational::int(1)
    }

    /// True when both parts vanish.
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Sum.
    pub fn add(&self, other: &CRational) -> CRational {
        CRational::new(&self.re + &other.re, &self.im + &other.im)
    }

    /// Difference.
    pub fn sub(&self, other: &CRational) -> CRational {
        CRational::new(&self.re - &other.re, &self.im - &other.im)
    }

    /// Product.
    pub fn mul(&self, other: &CRational) -> CRational {
        CRational::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    /// Negation.
    pub fn neg(&self) -> CRational {
        CRational::new(-&self.re, -&self.im)
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<CRational> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return Err(Error::Domain("division by complex zero".into()));
        }
        Ok(CRational::new(&self.re / &norm, -&self.im / &norm))
    }
}

impl fmt::Display for CRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}*i", self.im),
            (false, false) => write!(f, "{} + {}*i", self.re, self.im),
        }
    }
}

/// A 4×4 matrix of Gaussian rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CMatrix {
    entries: Vec<CRational>,
}

impl CMatrix {
    /// The zero matrix.
    pub fn zero() -> CMatrix {
        CMatrix {
            entries: vec![CRational::zero(); DIM * DIM],
        }
    }

    /// The identity matrix.
    pub fn identity() -> CMatrix {
        let mut m = CMatrix::zero();
        for i in 0..DIM {
            m.entries[i * DIM + i] = CRational::one();
        }
        m
    }

    /// Build from a function of (row, column).
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> CRational) -> CMatrix {
        let mut m = CMatrix::zero();
        for r in 0..DIM {
            for c in 0..DIM {
                m.entries[r * DIM + c] = f(r, c);
            }
        }
        m
    }

    /// Entry at (row, column).
    pub fn get(&self, r: usize, c: usize) -> &CRational {
        &self.entries[r * DIM + c]
    }

    /// Sum.
    pub fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix::from_fn(|r, c| self.get(r, c).add(other.get(r, c)))
    }

    /// Difference.
    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix::from_fn(|r, c| self.get(r, c).sub(other.get(r, c)))
    }

    /// Negation.
    pub fn neg(&self) -> CMatrix {
        CMatrix::from_fn(|r, c| self.get(r, c).neg())
    }

    /// Scalar multiple.
    pub fn scale(&self, s: &CRational) -> CMatrix {
        CMatrix::from_fn(|r, c| self.get(r, c).mul(s))
    }

    /// Matrix product.
    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        CMatrix::from_fn(|r, c| {
            let mut acc = CRational::zero();
            for k in 0..DIM {
                acc = acc.add(&self.get(r, k).mul(other.get(k, c)));
            }
            acc
        })
    }

    /// Commutator [self, other].
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    /// Anticommutator {self, other}.
    pub fn anticommutator(&self, other: &CMatrix) -> CMatrix {
        self.mul(other).add(&other.mul(self))
    }

    /// Trace.
    pub fn trace(&self) -> CRational {
        let mut t = CRational::zero();
        for i in 0..DIM {
            t = t.add(self.get(i, i));
        }
        t
    }

    /// True when every entry vanishes.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(CRational::is_zero)
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<CMatrix> {
        let mut a = self.entries.clone();
        let mut b = CMatrix::identity().entries;
        for col in 0..DIM {
            let pivot = (col..DIM)
                .find(|&r| !a[r * DIM + col].is_zero())
                .ok_or_else(|| Error::Degenerate("singular complex matrix".into()))?;
            if pivot != col {
                for c in 0..DIM {
                    a.swap(pivot * DIM + c, col * DIM + c);
                    b.swap(pivot * DIM + c, col * DIM + c);
                }
            }
            let inv = a[col * DIM + col].inv()?;
            for c in 0..DIM {
                a[col * DIM + c] = a[col * DIM + c].mul(&inv);
                b[col * DIM + c] = b[col * DIM + c].mul(&inv);
            }
            for r in 0..DIM {
                if r == col || a[r * DIM + col].is_zero() {
                    continue;
                }
                let f = a[r * DIM + col].clone();
                for c in 0..DIM {
                    let ac = a[col * DIM + c].mul(&f);
                    let bc = b[col * DIM + c].mul(&f);
                    a[r * DIM + c] = a[r * DIM + c].sub(&ac);
                    b[r * DIM + c] = b[r * DIM + c].sub(&bc);
                }
            }
        }
        Ok(CMatrix { entries: b })
    }
}

// ---------------------------------------------------------------------------
// Gamma representation and Lorentz generators
// ---------------------------------------------------------------------------

/// Four gamma matrices with exact entries satisfying the Clifford relation
/// γ^aγ^b + γ^bγ^a = 2η^{ab}·𝟙 with η = diag(1, −1, −1, −1).
#[derive(Debug, Clone)]
pub struct GammaRep {
    gammas: Vec<CMatrix>,
}

impl GammaRep {
    /// γ^a with the frame index up.
    pub fn gamma(&self, a: usize) -> &CMatrix {
        &self.gammas[a]
    }

    /// γ_a = η_{ab} γ^b with the frame index down.
    pub fn gamma_lower(&self, a: usize) -> CMatrix {
        let e = eta();
        if e[a] == 1 {
            self.gammas[a].clone()
        } else {
            self.gammas[a].neg()
        }
    }

    /// η^{ab} entry of the frame metric.
    pub fn eta(&self, a: usize, b: usize) -> i64 {
        if a == b {
            eta()[a]
        } else {
            0
        }
    }

    /// Left-hand side of the Clifford relation minus its right-hand side,
    /// for one index pair; zero for a valid representation.
    pub fn clifford_defect(&self, a: usize, b: usize) -> CMatrix {
        self.gammas[a]
            .anticommutator(&self.gammas[b])
            .sub(&CMatrix::identity().scale(&CRational::int(2 * self.eta(a, b))))
    }
}

/// The fixed Dirac basis: γ⁰ = diag(𝟙, −𝟙) and γ^i assembled from Pauli
/// blocks, all entries Gaussian rational.
pub fn gamma_basis() -> GammaRep {
    let o = || CRational::zero();
    let p = |n| CRational::int(n);
    let q = |n| CRational::imag(n);
    let rows = |rs: [[CRational; 4]; 4]| CMatrix::from_fn(|r, c| rs[r][c].clone());
    let g0 = rows([
        [p(1), o(), o(), o()],
        [o(), p(1), o(), o()],
        [o(), o(), p(-1), o()],
        [o(), o(), o(), p(-1)],
    ]);
    let g1 = rows([
        [o(), o(), o(), p(1)],
        [o(), o(), p(1), o()],
        [o(), p(-1), o(), o()],
        [p(-1), o(), o(), o()],
    ]);
    let g2 = rows([
        [o(), o(), o(), q(-1)],
        [o(), o(), q(1), o()],
        [o(), q(1), o(), o()],
        [q(-1), o(), o(), o()],
    ]);
    let g3 = rows([
        [o(), o(), p(1), o()],
        [o(), o(), o(), p(-1)],
        [p(-1), o(), o(), o()],
        [o(), p(1), o(), o()],
    ]);
    GammaRep {
        gammas: vec![g0, g1, g2, g3],
    }
}

/// A deliberately wrong gamma basis: one entry of γ¹ is perturbed so the
/// Clifford relations fail.  Used by the self-check suite as a negative
/// control demonstrating that the verification really rejects bad inputs.
#[doc(hidden)]
pub fn tampered_gamma_basis() -> GammaRep {
    let mut rep = gamma_basis();
    let bumped = rep.gammas[1].get(0, 0).add(&CRational::one());
    rep.gammas[1].entries[0] = bumped;
    rep
}

/// The sixteen Lorentz generators L_{ab} = ¼[γ_a, γ_b] (antisymmetric, so
/// six are independent).
#[derive(Debug, Clone)]
pub struct LorentzGenerators {
    mats: Vec<CMatrix>,
}

impl LorentzGenerators {
    /// L_{ab}.
    pub fn get(&self, a: usize, b: usize) -> &CMatrix {
        &self.mats[a * DIM + b]
    }

    /// The six independent generators with a < b.
    pub fn independent(&self) -> Vec<((usize, usize), &CMatrix)> {
        let mut out = Vec::new();
        for a in 0..DIM {
            for b in (a + 1)..DIM {
                out.push(((a, b), self.get(a, b)));
            }
        }
        out
    }
}

/// Build the Lorentz generators of a gamma representation.
pub fn lorentz_generators(rep: &GammaRep) -> LorentzGenerators {
    let quarter = CRational::new(BigRational::new(BigInt::from(1), BigInt::from(4)), BigRational::zero());
    let mut mats = Vec::with_capacity(DIM * DIM);
    for a in 0..DIM {
        for b in 0..DIM {
            mats.push(
                rep.gamma_lower(a)
                    .commutator(&rep.gamma_lower(b))
                    .scale(&quarter),
            );
        }
    }
    LorentzGenerators { mats }
}

// ---------------------------------------------------------------------------
// Complex scalar expressions and matrices of them
// ---------------------------------------------------------------------------

/// A complex scalar expression: a pair of real scalar expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CExpr {
    /// Real part.
    pub re: Expr,
    /// Imaginary part.
    pub im: Expr,
}

impl CExpr {
    /// Build from parts.
    pub fn new(re: Expr, im: Expr) -> CExpr {
        CExpr { re, im }
    }

    /// A purely real expression.
    pub fn real(re: Expr) -> CExpr {
        CExpr {
            re,
            im: Expr::zero(),
        }
    }

    /// Zero.
    pub fn zero() -> CExpr {
        CExpr::real(Expr::zero())
    }

    /// Lift an exact complex rational.
    pub fn from_rational(c: &CRational) -> CExpr {
        CExpr {
            re: Expr::num(c.re.clone()),
            im: Expr::num(c.im.clone()),
        }
    }

    /// Sum.
    pub fn add(&self, other: &CExpr) -> CExpr {
        CExpr::new(self.re.add(&other.re), self.im.add(&other.im))
    }

    /// Difference.
    pub fn sub(&self, other: &CExpr) -> CExpr {
        CExpr::new(self.re.sub(&other.re), self.im.sub(&other.im))
    }

    /// Product.
    pub fn mul(&self, other: &CExpr) -> CExpr {
        CExpr::new(
            self.re.mul(&other.re).sub(&self.im.mul(&other.im)),
            self.re.mul(&other.im).add(&self.im.mul(&other.re)),
        )
    }

    /// Multiply by a real scalar expression.
    pub fn scale_real(&self, s: &Expr) -> CExpr {
        CExpr::new(self.re.mul(s), self.im.mul(s))
    }

    /// Negation.
    pub fn neg(&self) -> CExpr {
        CExpr::new(self.re.neg(), self.im.neg())
    }

    /// True when both parts are the literal zero.
    pub fn is_zero_literal(&self) -> bool {
        self.re.is_zero_literal() && self.im.is_zero_literal()
    }

    /// Zero test of both parts, combined into one verdict.
    pub fn is_zero(&self, cfg: &ZeroCfg) -> Result<Verdict> {
        Ok(is_zero(&self.re, cfg)?.combine(is_zero(&self.im, cfg)?))
    }
}

/// A 4×4 matrix of complex scalar expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CExprMatrix {
    entries: Vec<CExpr>,
}

impl CExprMatrix {
    /// The zero matrix.
    pub fn zero() -> CExprMatrix {
        CExprMatrix {
            entries: vec![CExpr::zero(); DIM * DIM],
        }
    }

    /// The identity matrix scaled by a real expression.
    pub fn scalar(s: &Expr) -> CExprMatrix {
        let mut m = CExprMatrix::zero();
        for i in 0..DIM {
            m.entries[i * DIM + i] = CExpr::real(s.clone());
        }
        m
    }

    /// Lift an exact matrix.
    pub fn from_matrix(m: &CMatrix) -> CExprMatrix {
        CExprMatrix {
            entries: (0..DIM * DIM)
                .map(|i| CExpr::from_rational(&m.entries[i]))
                .collect(),
        }
    }

    /// Entry at (row, column).
    pub fn get(&self, r: usize, c: usize) -> &CExpr {
        &self.entries[r * DIM + c]
    }

    /// Sum.
    pub fn add(&self, other: &CExprMatrix) -> CExprMatrix {
        CExprMatrix {
            entries: (0..DIM * DIM)
                .map(|i| self.entries[i].add(&other.entries[i]))
                .collect(),
        }
    }

    /// Difference.
    pub fn sub(&self, other: &CExprMatrix) -> CExprMatrix {
        CExprMatrix {
            entries: (0..DIM * DIM)
                .map(|i| self.entries[i].sub(&other.entries[i]))
                .collect(),
        }
    }

    /// Matrix product.
    pub fn mul(&self, other: &CExprMatrix) -> CExprMatrix {
        let mut m = CExprMatrix::zero();
        for r in 0..DIM {
            for c in 0..DIM {
                let mut acc = CExpr::zero();
                for k in 0..DIM {
                    acc = acc.add(&self.get(r, k).mul(other.get(k, c)));
                }
                m.entries[r * DIM + c] = acc;
            }
        }
        m
    }

    /// Multiply every entry by a real scalar expression.
    pub fn scale_real(&self, s: &Expr) -> CExprMatrix {
        CExprMatrix {
            entries: self.entries.iter().map(|e| e.scale_real(s)).collect(),
        }
    }

    /// Apply to a spinor component vector.
    pub fn apply(&self, v: &[CExpr]) -> Vec<CExpr> {
        (0..DIM)
            .map(|r| {
                let mut acc = CExpr::zero();
                for c in 0..DIM {
                    acc = acc.add(&self.get(r, c).mul(&v[c]));
                }
                acc
            })
            .collect()
    }

    /// Zero test over all entries, combined into one verdict.
    pub fn is_zero(&self, cfg: &ZeroCfg) -> Result<Verdict> {
        let mut v = Verdict::ProvenZero;
        for e in &self.entries {
            v = v.combine(e.is_zero(cfg)?);
            if !v.is_zero() {
                return Ok(v);
            }
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Spinor fields
// ---------------------------------------------------------------------------

/// A spinor field: four complex-valued components over a chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinorFieldExpr {
    chart: Chart,
    comps: Vec<CExpr>,
}

impl SpinorFieldExpr {
    /// Build from four components.
    pub fn new(chart: &Chart, comps: Vec<CExpr>) -> Result<SpinorFieldExpr> {
        if chart.dim() != DIM {
            return Err(Error::BadDimension(chart.dim()));
        }
        if comps.len() != DIM {
            return Err(Error::Shape(format!(
                "expected {DIM} spinor components, got {}",
                comps.len()
            )));
        }
        Ok(SpinorFieldExpr {
            chart: chart.clone(),
            comps,
        })
    }

    /// The chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Component ψ^A.
    pub fn comp(&self, a: usize) -> &CExpr {
        &self.comps[a]
    }

    /// All components.
    pub fn comps(&self) -> &[CExpr] {
        &self.comps
    }

    /// Apply an exact matrix to the components.
    pub fn transform(&self, m: &CMatrix) -> SpinorFieldExpr {
        SpinorFieldExpr {
            chart: self.chart.clone(),
            comps: CExprMatrix::from_matrix(m).apply(&self.comps),
        }
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &SpinorFieldExpr) -> SpinorFieldExpr {
        SpinorFieldExpr {
            chart: self.chart.clone(),
            comps: (0..DIM)
                .map(|a| self.comps[a].sub(&other.comps[a]))
                .collect(),
        }
    }

    /// Zero test over all components.
    pub fn is_zero(&self, cfg: &ZeroCfg) -> Result<Verdict> {
        let mut v = Verdict::ProvenZero;
        for c in &self.comps {
            v = v.combine(c.is_zero(cfg)?);
            if !v.is_zero() {
                return Ok(v);
            }
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Covector representation
// ---------------------------------------------------------------------------

/// Represent a one-form by gamma matrices through a tetrad:
/// t = t_μ dx^μ ↦ t_μ h^μ_a γ^a.  Its square is the metric norm
/// g^{μν}t_μt_ν times the identity, with g induced by the tetrad.
pub fn rep_covector(h: &TetradField, t: &TensorField) -> Result<CExprMatrix> {
    h.chart().expect_same(t.chart())?;
    if h.chart().dim() != DIM {
        return Err(Error::BadDimension(h.chart().dim()));
    }
    if t.valence() != (0, 1) {
        return Err(Error::Shape(format!(
            "rep_covector expects a one-form, got valence {:?}",
            t.valence()
        )));
    }
    let rep = gamma_basis();
    let mut out = CExprMatrix::zero();
    for a in 0..DIM {
        let mut coeff = Expr::zero();
        for mu in 0..DIM {
            coeff = coeff.add(&t.get(&[mu])?.mul(h.inv(mu, a)));
        }
        out = out.add(&CExprMatrix::from_matrix(rep.gamma(a)).scale_real(&coeff));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Spin connection
// ---------------------------------------------------------------------------

/// Spin-connection coefficients: the L_{ab}-weights of the connection form
/// induced on spinors by a world connection and a tetrad.  Antisymmetric in
/// the frame pair (a, b) exactly.
#[derive(Debug, Clone)]
pub struct SpinConnectionCoeffs {
    chart: Chart,
    coeffs: Vec<Expr>,
}

impl SpinConnectionCoeffs {
    fn from_raw(chart: &Chart, coeffs: Vec<Expr>) -> Result<SpinConnectionCoeffs> {
        for lam in 0..DIM {
            for a in 0..DIM {
                for b in 0..DIM {
                    let sym = coeffs[(lam * DIM + a) * DIM + b]
                        .add(&coeffs[(lam * DIM + b) * DIM + a]);
                    if !sym.is_zero_literal() {
                        return Err(Error::Symmetry(format!(
                            "spin connection not antisymmetric at ({lam},{a},{b})"
                        )));
                    }
                }
            }
        }
        Ok(SpinConnectionCoeffs {
            chart: chart.clone(),
            coeffs,
        })
    }

    /// The chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Coefficient of L_{ab} in the λ-direction.
    pub fn get(&self, lam: usize, a: usize, b: usize) -> &Expr {
        &self.coeffs[(lam * DIM + a) * DIM + b]
    }

    /// The matrix Σ_{a,b} coefficient·L_{ab} for one direction.
    pub fn matrix(&self, lam: usize, gen: &LorentzGenerators) -> CExprMatrix {
        let mut m = CExprMatrix::zero();
        for a in 0..DIM {
            for b in 0..DIM {
                let c = self.get(lam, a, b);
                if c.is_zero_literal() {
                    continue;
                }
                m = m.add(&CExprMatrix::from_matrix(gen.get(a, b)).scale_real(c));
            }
        }
        m
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &SpinConnectionCoeffs) -> SpinConnectionCoeffs {
        SpinConnectionCoeffs {
            chart: self.chart.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x.sub(y))
                .collect(),
        }
    }

    /// Zero test over all coefficients.
    pub fn is_zero(&self, cfg: &ZeroCfg) -> Result<Verdict> {
        let mut v = Verdict::ProvenZero;
        for c in &self.coeffs {
            v = v.combine(is_zero(c, cfg)?);
            if !v.is_zero() {
                return Ok(v);
            }
        }
        Ok(v)
    }

    /// True when every coefficient is the literal zero.
    pub fn is_zero_literal(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero_literal)
    }
}

/// The spin connection induced by a world connection in a tetrad
/// background:
///
/// coefficient of L_{ab} in direction λ
///   = ¼ (η^{kb} h^a_μ − η^{ka} h^b_μ)(∂_λ h^μ_k − h^ν_k Γ_λ^μ_ν),
///
/// which is half the Lorentz-connection coefficient of the reduction
/// machinery for the same pair (Γ, h).
pub fn spin_connection(gamma: &WorldConnection, h: &TetradField) -> Result<SpinConnectionCoeffs> {
    gamma.chart().expect_same(h.chart())?;
    let chart = h.chart().clone();
    if chart.dim() != DIM {
        return Err(Error::BadDimension(chart.dim()));
    }
    let e = eta();
    // D_λ^μ_k = ∂_λ h^μ_k − h^ν_k Γ_λ^μ_ν.
    let mut d = vec![Expr::zero(); DIM * DIM * DIM];
    for lam in 0..DIM {
        for mu in 0..DIM {
            for k in 0..DIM {
                let mut terms = vec![chart.partial(h.inv(mu, k), lam)?];
                for nu in 0..DIM {
                    terms.push(h.inv(nu, k).mul(gamma.get(lam, mu, nu)).neg());
                }
                d[(lam * DIM + mu) * DIM + k] = Expr::sum(terms);
            }
        }
    }
    let quarter = |n: i64| BigRational::new(BigInt::from(n), BigInt::from(4));
    let mut coeffs = vec![Expr::zero(); DIM * DIM * DIM];
    for lam in 0..DIM {
        for a in 0..DIM {
            for b in 0..DIM {
                let mut terms = Vec::new();
                for mu in 0..DIM {
                    // η^{kb} picks k = b, η^{ka} picks k = a.
                    let dv_b = &d[(lam * DIM + mu) * DIM + b];
                    if !dv_b.is_zero_literal() {
                        terms.push(h.get(a, mu).mul(dv_b).scale(&quarter(e[b])));
                    }
                    let dv_a = &d[(lam * DIM + mu) * DIM + a];
                    if !dv_a.is_zero_literal() {
                        terms.push(h.get(b, mu).mul(dv_a).scale(&quarter(-e[a])));
                    }
                }
                coeffs[(lam * DIM + a) * DIM + b] = Expr::sum(terms);
            }
        }
    }
    SpinConnectionCoeffs::from_raw(&chart, coeffs)
}

/// Half the Lorentz-connection coefficients of the reduction machinery:
/// the value the spin connection must equal.
pub fn half_lorentz_coefficients(
    gamma: &WorldConnection,
    h: &TetradField,
) -> Result<SpinConnectionCoeffs> {
    let (a, _) = lorentz_connection(gamma, h)?;
    let chart = h.chart().clone();
    let mut coeffs = vec![Expr::zero(); DIM * DIM * DIM];
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for lam in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                coeffs[(lam * DIM + i) * DIM + j] = a.get(lam, i, j).scale(&half);
            }
        }
    }
    SpinConnectionCoeffs::from_raw(&chart, coeffs)
}

// ---------------------------------------------------------------------------
// Dirac operator
// ---------------------------------------------------------------------------

/// Assemble the Dirac operator in a tetrad background:
///
/// 𝒟ψ = h^λ_a γ^a (∂_λψ − Ω_λ ψ),
///
/// where Ω_λ is the spin-connection matrix.  For the identity tetrad and a
/// vanishing world connection this is exactly γ^λ ∂_λ ψ.
pub fn dirac_operator(
    gamma: &WorldConnection,
    h: &TetradField,
    psi: &SpinorFieldExpr,
) -> Result<SpinorFieldExpr> {
    gamma.chart().expect_same(h.chart())?;
    h.chart().expect_same(psi.chart())?;
    let chart = h.chart().clone();
    let omega = spin_connection(gamma, h)?;
    let rep = gamma_basis();
    let gen = lorentz_generators(&rep);
    let mut out = vec![CExpr::zero(); DIM];
    for lam in 0..DIM {
        // Covariant derivative in direction λ.
        let mut dpsi: Vec<CExpr> = Vec::with_capacity(DIM);
        for a in 0..DIM {
            let c = psi.comp(a);
            dpsi.push(CExpr::new(
                chart.partial(&c.re, lam)?,
                chart.partial(&c.im, lam)?,
            ));
        }
        let omega_psi = omega.matrix(lam, &gen).apply(psi.comps());
        let cov: Vec<CExpr> = (0..DIM).map(|a| dpsi[a].sub(&omega_psi[a])).collect();
        // Contract with h^λ_a γ^a.
        let mut slash = CExprMatrix::zero();
        for a in 0..DIM {
            slash = slash
                .add(&CExprMatrix::from_matrix(rep.gamma(a)).scale_real(h.inv(lam, a)));
        }
        let term = slash.apply(&cov);
        for a in 0..DIM {
            out[a] = out[a].add(&term[a]);
        }
    }
    SpinorFieldExpr::new(&chart, out)
}

// ---------------------------------------------------------------------------
// Vertical covariant differential on the universal bundle
// ---------------------------------------------------------------------------

/// A point in the tetrad-jet variables: values for the frame σ^μ_k and its
/// formal derivatives σ^μ_{λk}.  Formal points carry fresh symbols; tetrad
/// points carry the frame of an actual tetrad field and its derivatives.
#[derive(Debug, Clone)]
pub struct TetradJetPoint {
    chart: Chart,
    table: VarTable,
    frame: Vec<Expr>,     // [μ][k]
    frame_jet: Vec<Expr>, // [λ][μ][k]
}

impl TetradJetPoint {
    /// Fresh formal variables s{μ}{k} and s{μ}{k}_{λ}.
    pub fn formal(chart: &Chart) -> Result<TetradJetPoint> {
        if chart.dim() != DIM {
            return Err(Error::BadDimension(chart.dim()));
        }
        let mut table = VarTable::new();
        let mut frame = Vec::new();
        let mut frame_jet = vec![Expr::zero(); DIM * DIM * DIM];
        for mu in 0..DIM {
            for k in 0..DIM {
                let s = table.add(Symbol::new(&format!("s{mu}{k}")), Role::Fiber)?;
                frame.push(Expr::var(&s));
            }
        }
        for lam in 0..DIM {
            for mu in 0..DIM {
                for k in 0..DIM {
                    let s = table.add(Symbol::new(&format!("s{mu}{k}_{lam}")), Role::Jet)?;
                    frame_jet[(lam * DIM + mu) * DIM + k] = Expr::var(&s);
                }
            }
        }
        Ok(TetradJetPoint {
            chart: chart.clone(),
            table,
            frame,
            frame_jet,
        })
    }

    /// The frame of a tetrad field and its coordinate derivatives.
    pub fn from_tetrad(h: &TetradField) -> Result<TetradJetPoint> {
        let chart = h.chart().clone();
        if chart.dim() != DIM {
            return Err(Error::BadDimension(chart.dim()));
        }
        let mut frame = Vec::new();
        let mut frame_jet = vec![Expr::zero(); DIM * DIM * DIM];
        for mu in 0..DIM {
            for k in 0..DIM {
                frame.push(h.inv(mu, k).clone());
            }
        }
        for lam in 0..DIM {
            for mu in 0..DIM {
                for k in 0..DIM {
                    frame_jet[(lam * DIM + mu) * DIM + k] = chart.partial(h.inv(mu, k), lam)?;
                }
            }
        }
        Ok(TetradJetPoint {
            chart,
            table: VarTable::new(),
            frame,
            frame_jet,
        })
    }

    /// The chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// The table of formal variables (empty for tetrad points).
    pub fn table(&self) -> &VarTable {
        &self.table
    }

    /// σ^μ_k.
    pub fn frame(&self, mu: usize, k: usize) -> &Expr {
        &self.frame[mu * DIM + k]
    }

    /// σ^μ_{λk}.
    pub fn frame_jet(&self, lam: usize, mu: usize, k: usize) -> &Expr {
        &self.frame_jet[(lam * DIM + mu) * DIM + k]
    }
}

/// The coefficient block of the vertical covariant differential on the
/// universal spinor bundle, evaluated at a tetrad-jet point:
///
/// coefficient of L_{ab} in direction λ
///   = ¼ (η^{kb} σ^a_μ − η^{ka} σ^b_μ)(σ^μ_{λk} − σ^ν_k Γ_λ^μ_ν),
///
/// where σ^a_μ is the matrix inverse of the frame σ^μ_a.  Substituting the
/// frame and derivatives of an actual tetrad reproduces the spin
/// connection; at the flat point the block vanishes and the differential is
/// the plain jet.
pub fn vertical_covariant_differential(
    gamma: &WorldConnection,
    point: &TetradJetPoint,
) -> Result<SpinConnectionCoeffs> {
    gamma.chart().expect_same(point.chart())?;
    let chart = point.chart().clone();
    let e = eta();
    // Invert the frame to get the coframe σ^a_μ.
    let rows: Vec<Vec<Expr>> = (0..DIM)
        .map(|mu| (0..DIM).map(|k| point.frame(mu, k).clone()).collect())
        .collect();
    let (cof, _det) = invert_expr_matrix(&rows);
    // cof[k][μ] = σ^k_μ.
    let mut d = vec![Expr::zero(); DIM * DIM * DIM];
    for lam in 0..DIM {
        for mu in 0..DIM {
            for k in 0..DIM {
                let mut terms = vec![point.frame_jet(lam, mu, k).clone()];
                for nu in 0..DIM {
                    terms.push(point.frame(nu, k).mul(gamma.get(lam, mu, nu)).neg());
                }
                d[(lam * DIM + mu) * DIM + k] = Expr::sum(terms);
            }
        }
    }
    let quarter = |n: i64| BigRational::new(BigInt::from(n), BigInt::from(4));
    let mut coeffs = vec![Expr::zero(); DIM * DIM * DIM];
    for lam in 0..DIM {
        for a in 0..DIM {
            for b in 0..DIM {
                let mut terms = Vec::new();
                for mu in 0..DIM {
                    let dv_b = &d[(lam * DIM + mu) * DIM + b];
                    if !dv_b.is_zero_literal() {
                        terms.push(cof[a][mu].mul(dv_b).scale(&quarter(e[b])));
                    }
                    let dv_a = &d[(lam * DIM + mu) * DIM + a];
                    if !dv_a.is_zero_literal() {
                        terms.push(cof[b][mu].mul(dv_a).scale(&quarter(-e[a])));
                    }
                }
                coeffs[(lam * DIM + a) * DIM + b] = Expr::sum(terms);
            }
        }
    }
    SpinConnectionCoeffs::from_raw(&chart, coeffs)
}

// ---------------------------------------------------------------------------
// Exact Lorentz boosts and their spin matrices
// ---------------------------------------------------------------------------

/// A boost in the (0,1) frame plane with rational parameters
/// (cosh, sinh), cosh² − sinh² = 1, together with the spin matrix that
/// implements it by conjugation:
///
/// S = (1 + cosh)·𝟙 + sinh·γ⁰γ¹,    S γ^a S⁻¹ = Λ^a_b γ^b,
///
/// with Λ = [[cosh, −sinh], [−sinh, cosh]] ⊕ 𝟙.  The overall scale of S is
/// immaterial for conjugation and is chosen to keep the entries rational.
pub fn lorentz_boost_01(ch: &BigRational, sh: &BigRational) -> Result<(Vec<BigRational>, CMatrix)> {
    if &(ch * ch) - &(sh * sh) != BigRational::one() {
        return Err(Error::Domain(
            "boost parameters must satisfy cosh² − sinh² = 1".into(),
        ));
    }
    let mut lam = vec![BigRational::zero(); DIM * DIM];
    lam[0] = ch.clone();
    lam[1] = -sh.clone();
    lam[DIM] = -sh.clone();
    lam[DIM + 1] = ch.clone();
    lam[2 * DIM + 2] = BigRational::one();
    lam[3 * DIM + 3] = BigRational::one();
    let rep = gamma_basis();
    let one_plus: BigRational = BigRational::one() + ch;
    let s = CMatrix::identity()
        .scale(&CRational::new(one_plus, BigRational::zero()))
        .add(
            &rep.gamma(0)
                .mul(rep.gamma(1))
                .scale(&CRational::new(sh.clone(), BigRational::zero())),
        );
    Ok((lam, s))
}

/// Transform a tetrad by a constant frame Lorentz matrix: the new frame is
/// h^μ_b Λ^b_a, equivalently the new coframe is (Λ⁻¹)^a_b h^b_μ.
pub fn boost_tetrad(h: &TetradField, lam: &[BigRational]) -> Result<TetradField> {
    let chart = h.chart().clone();
    if chart.dim() != DIM || lam.len() != DIM * DIM {
        return Err(Error::BadDimension(chart.dim()));
    }
    // Invert Λ exactly.
    let lam_c = CMatrix::from_fn(|r, c| CRational::new(lam[r * DIM + c].clone(), BigRational::zero()));
    let inv = lam_c.inverse()?;
    let mut coframe = vec![Expr::zero(); DIM * DIM];
    for a in 0..DIM {
        for mu in 0..DIM {
            let mut terms = Vec::new();
            for b in 0..DIM {
                let w = inv.get(a, b);
                if w.is_zero() {
                    continue;
                }
                terms.push(h.get(b, mu).scale(&w.re));
            }
            coframe[a * DIM + mu] = Expr::sum(terms);
        }
    }
    TetradField::new(&chart, coframe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tetrad::metric_from_tetrad;

    fn chart4() -> Chart {
        Chart::new(4).unwrap()
    }

    #[test]
    fn clifford_relation_holds_for_all_sixteen_pairs() {
        let rep = gamma_basis();
        for a in 0..4 {
            for b in 0..4 {
                assert!(rep.clifford_defect(a, b).is_zero(), "pair ({a},{b})");
            }
        }
    }

    #[test]
    fn gamma_squares_and_anticommutation() {
        let rep = gamma_basis();
        let id = CMatrix::identity();
        assert_eq!(rep.gamma(0).mul(rep.gamma(0)), id);
        assert_eq!(rep.gamma(1).mul(rep.gamma(1)), id.neg());
        assert_eq!(
            rep.gamma(0).mul(rep.gamma(1)),
            rep.gamma(1).mul(rep.gamma(0)).neg()
        );
    }

    #[test]
    fn lorentz_generators_act_as_vectors_on_gammas() {
        // [L_{ab}, γ^c] = δ^c_b γ_a − δ^c_a γ_b.
        let rep = gamma_basis();
        let gen = lorentz_generators(&rep);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let lhs = gen.get(a, b).commutator(rep.gamma(c));
                    let mut rhs = CMatrix::zero();
                    if c == b {
                        rhs = rhs.add(&rep.gamma_lower(a));
                    }
                    if c == a {
                        rhs = rhs.sub(&rep.gamma_lower(b));
                    }
                    assert_eq!(lhs, rhs, "indices ({a},{b},{c})");
                }
            }
        }
    }

    #[test]
    fn lorentz_algebra_closes() {
        // [L_{ab}, L_{cd}] = η_{bc}L_{ad} − η_{ac}L_{bd} − η_{bd}L_{ac}
        //                    + η_{ad}L_{bc}.
        let rep = gamma_basis();
        let gen = lorentz_generators(&rep);
        let e = eta();
        let etad = |i: usize, j: usize| if i == j { e[i] } else { 0 };
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for dd in 0..4 {
                        let lhs = gen.get(a, b).commutator(gen.get(c, dd));
                        let mut rhs = CMatrix::zero();
                        for (sgn, i, j, w) in [
                            (1, a, dd, etad(b, c)),
                            (-1, b, dd, etad(a, c)),
                            (-1, a, c, etad(b, dd)),
                            (1, b, c, etad(a, dd)),
                        ] {
                            if w != 0 {
                                rhs = rhs.add(&gen.get(i, j).scale(&CRational::int(sgn * w)));
                            }
                        }
                        assert_eq!(lhs, rhs, "indices ({a},{b},{c},{dd})");
                    }
                }
            }
        }
    }

    #[test]
    fn generator_examples() {
        let rep = gamma_basis();
        let gen = lorentz_generators(&rep);
        assert!(gen.get(0, 1).trace().is_zero());
        assert!(gen.get(0, 1).commutator(gen.get(2, 3)).is_zero());
        assert!(gen.get(1, 2).commutator(rep.gamma(3)).is_zero());
        assert_eq!(gen.independent().len(), 6);
    }

    #[test]
    fn identity_tetrad_represents_dx0_as_gamma0() {
        let chart = chart4();
        let h = TetradField::identity(&chart);
        let t = TensorField::from_fn(&chart, 0, 1, vec![], |idx| {
            if idx == [0] {
                Expr::one()
            } else {
                Expr::zero()
            }
        })
        .unwrap();
        let m = rep_covector(&h, &t).unwrap();
        let g0 = CExprMatrix::from_matrix(gamma_basis().gamma(0));
        assert!(m.sub(&g0).is_zero(&ZeroCfg::default()).unwrap().is_proven());
    }

    #[test]
    fn covector_representation_squares_to_the_metric_norm() {
        let chart = chart4();
        let x1 = Expr::var(chart.coord(1).unwrap());
        let x3 = Expr::var(chart.coord(3).unwrap());
        // Diagonal tetrad with one coordinate-dependent leg.
        let mut coframe = vec![Expr::zero(); 16];
        coframe[0] = Expr::one();
        coframe[5] = Expr::one().add(&x1.mul(&x1));
        coframe[10] = Expr::int(2);
        coframe[15] = Expr::one();
        let h = TetradField::new(&chart, coframe).unwrap();
        let g = metric_from_tetrad(&h).unwrap();
        let comps = [Expr::var(chart.coord(0).unwrap()), x1.clone(), Expr::one(), x3.clone()];
        let t = TensorField::from_fn(&chart, 0, 1, vec![], |idx| comps[idx[0]].clone()).unwrap();
        let m = rep_covector(&h, &t).unwrap();
        let mut norm = Expr::zero();
        for mu in 0..4 {
            for nu in 0..4 {
                norm = norm.add(&comps[mu].mul(&comps[nu]).mul(g.up(mu, nu)));
            }
        }
        let defect = m.mul(&m).sub(&CExprMatrix::scalar(&norm));
        assert!(defect.is_zero(&ZeroCfg::default()).unwrap().is_zero());
    }

    #[test]
    fn representations_for_different_tetrads_are_inequivalent() {
        // Fixed covector t = dx⁰; tetrads inducing different metrics give
        // rep squares with different scalar eigenvalues, so no similarity
        // transform can relate them.
        let chart = chart4();
        let h1 = TetradField::identity(&chart);
        let mut coframe = vec![Expr::zero(); 16];
        coframe[0] = Expr::int(2);
        coframe[5] = Expr::one();
        coframe[10] = Expr::one();
        coframe[15] = Expr::one();
        let h2 = TetradField::new(&chart, coframe).unwrap();
        let t = TensorField::from_fn(&chart, 0, 1, vec![], |idx| {
            if idx == [0] {
                Expr::one()
            } else {
                Expr::zero()
            }
        })
        .unwrap();
        let sq1 = rep_covector(&h1, &t).unwrap();
        let sq1 = sq1.mul(&sq1);
        let sq2 = rep_covector(&h2, &t).unwrap();
        let sq2 = sq2.mul(&sq2);
        // g1^{00} = 1 while g2^{00} = 1/4: the squares are distinct scalar
        // matrices, hence distinct spectra.
        let cfg = ZeroCfg::default();
        assert!(sq1
            .sub(&CExprMatrix::scalar(&Expr::one()))
            .is_zero(&cfg)
            .unwrap()
            .is_zero());
        assert!(sq2
            .sub(&CExprMatrix::scalar(&Expr::rational(1, 4)))
            .is_zero(&cfg)
            .unwrap()
            .is_zero());
        assert!(!sq1.sub(&sq2).is_zero(&cfg).unwrap().is_zero());
    }

    #[test]
    fn flat_data_gives_a_vanishing_spin_connection() {
        let chart = chart4();
        let h = TetradField::identity(&chart);
        let gamma = WorldConnection::zero(&chart);
        let omega = spin_connection(&gamma, &h).unwrap();
        assert!(omega.is_zero_literal());
    }

    #[test]
    fn rotation_tetrad_concentrates_in_one_component() {
        // Rotation in the (1,2) plane parametrized rationally by
        // c = (1−u²)/(1+u²), s = 2u/(1+u²) with u = x⁰, so c² + s² = 1
        // exactly.  Expected: the only independent nonzero coefficient is
        // the (1,2) one, equal to 1/(1+u²).
        let chart = chart4();
        let u = Expr::var(chart.coord(0).unwrap());
        let denom = Expr::one().add(&u.mul(&u));
        let c = Expr::one().sub(&u.mul(&u)).div(&denom);
        let s = Expr::int(2).mul(&u).div(&denom);
        let mut coframe = vec![Expr::zero(); 16];
        coframe[0] = Expr::one();
        coframe[5] = c.clone();
        coframe[6] = s.clone();
        coframe[9] = s.neg();
        coframe[10] = c.clone();
        coframe[15] = Expr::one();
        let h = TetradField::new(&chart, coframe).unwrap();
        let omega = spin_connection(&WorldConnection::zero(&chart), &h).unwrap();
        let cfg = ZeroCfg::default();
        let expected = Expr::one().div(&denom);
        assert!(is_zero(&omega.get(0, 1, 2).sub(&expected), &cfg)
            .unwrap()
            .is_zero());
        for lam in 0..4 {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    let v = is_zero(omega.get(lam, a, b), &cfg).unwrap();
                    if (lam, a, b) == (0, 1, 2) {
                        assert!(!v.is_zero(), "expected nonzero at (0,1,2)");
                    } else {
                        assert!(v.is_zero(), "expected zero at ({lam},{a},{b})");
                    }
                }
            }
        }
    }

    #[test]
    fn spin_connection_is_half_the_lorentz_coefficients() {
        let chart = chart4();
        let x0 = Expr::var(chart.coord(0).unwrap());
        let x2 = Expr::var(chart.coord(2).unwrap());
        let mut coframe = vec![Expr::zero(); 16];
        coframe[0] = Expr::one();
        coframe[1] = x2.clone();
        coframe[5] = Expr::one().add(&x0.mul(&x0));
        coframe[10] = Expr::one();
        coframe[15] = Expr::int(3);
        let h = TetradField::new(&chart, coframe).unwrap();
        let gamma = WorldConnection::from_fn(&chart, |l, m, n| {
            if (l, m, n) == (0, 1, 2) {
                x0.clone()
            } else if (l, m, n) == (3, 0, 0) {
                Expr::one()
            } else {
                Expr::zero()
            }
        });
        let omega = spin_connection(&gamma, &h).unwrap();
        let half = half_lorentz_coefficients(&gamma, &h).unwrap();
        assert!(omega
            .sub(&half)
            .is_zero(&ZeroCfg::default())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn flat_dirac_operator_is_the_coordinate_slash() {
        let chart = chart4();
        let h = TetradField::identity(&chart);
        let gamma = WorldConnection::zero(&chart);
        let x0 = Expr::var(chart.coord(0).unwrap());
        let x1 = Expr::var(chart.coord(1).unwrap());
        // Constant spinor → zero.
        let constant = SpinorFieldExpr::new(
            &chart,
            vec![
                CExpr::real(Expr::int(2)),
                CExpr::new(Expr::zero(), Expr::one()),
                CExpr::zero(),
                CExpr::real(Expr::int(-1)),
            ],
        )
        .unwrap();
        let image = dirac_operator(&gamma, &h, &constant).unwrap();
        assert!(image.is_zero(&ZeroCfg::default()).unwrap().is_proven());
        // Polynomial spinor → γ^λ ∂_λ ψ.
        let psi = SpinorFieldExpr::new(
            &chart,
            vec![
                CExpr::new(x0.mul(&x0), x1.clone()),
                CExpr::real(x1.mul(&x0)),
                CExpr::new(Expr::one(), x0.clone()),
                CExpr::zero(),
            ],
        )
        .unwrap();
        let image = dirac_operator(&gamma, &h, &psi).unwrap();
        let rep = gamma_basis();
        let mut expect = vec![CExpr::zero(); 4];
        for lam in 0..4 {
            let slash = CExprMatrix::from_matrix(rep.gamma(lam));
            let d: Vec<CExpr> = (0..4)
                .map(|a| {
                    CExpr::new(
                        chart.partial(&psi.comp(a).re, lam).unwrap(),
                        chart.partial(&psi.comp(a).im, lam).unwrap(),
                    )
                })
                .collect();
            let t = slash.apply(&d);
            for a in 0..4 {
                expect[a] = expect[a].add(&t[a]);
            }
        }
        let expect = SpinorFieldExpr::new(&chart, expect).unwrap();
        assert!(image
            .sub(&expect)
            .is_zero(&ZeroCfg::default())
            .unwrap()
            .is_proven());
    }

    #[test]
    fn boost_conjugation_is_exact() {
        let ch = BigRational::new(BigInt::from(5), BigInt::from(4));
        let sh = BigRational::new(BigInt::from(3), BigInt::from(4));
        let (lam, s) = lorentz_boost_01(&ch, &sh).unwrap();
        let si = s.inverse().unwrap();
        let rep = gamma_basis();
        for a in 0..4 {
            let lhs = s.mul(rep.gamma(a)).mul(&si);
            let mut rhs = CMatrix::zero();
            for b in 0..4 {
                let w = &lam[a * DIM + b];
                if !w.is_zero() {
                    rhs = rhs.add(&rep.gamma(b).scale(&CRational::new(w.clone(), BigRational::zero())));
                }
            }
            assert_eq!(lhs, rhs, "gamma {a}");
        }
        // Bad parameters are rejected.
        assert!(lorentz_boost_01(&BigRational::one(), &BigRational::one()).is_err());
    }

    #[test]
    fn dirac_operator_is_boost_equivariant() {
        // 𝒟_{Λh}(Sψ) = S·𝒟_h(ψ) for a constant boost with rational
        // parameters.
        let chart = chart4();
        let x0 = Expr::var(chart.coord(0).unwrap());
        let x1 = Expr::var(chart.coord(1).unwrap());
        let mut coframe = vec![Expr::zero(); 16];
        coframe[0] = Expr::one();
        coframe[5] = Expr::one().add(&x0.mul(&x0));
        coframe[10] = Expr::one();
        coframe[15] = Expr::one();
        let h = TetradField::new(&chart, coframe).unwrap();
        let gamma = WorldConnection::from_fn(&chart, |l, m, n| {
            if (l, m, n) == (0, 1, 1) {
                x1.clone()
            } else {
                Expr::zero()
            }
        });
        let psi = SpinorFieldExpr::new(
            &chart,
            vec![
                CExpr::new(x0.clone(), x1.clone()),
                CExpr::real(x1.mul(&x1)),
                CExpr::real(Expr::one()),
                CExpr::new(Expr::zero(), x0.mul(&x1)),
            ],
        )
        .unwrap();
        let ch = BigRational::new(BigInt::from(5), BigInt::from(4));
        let sh = BigRational::new(BigInt::from(3), BigInt::from(4));
        let (lam, s) = lorentz_boost_01(&ch, &sh).unwrap();
        let hb = boost_tetrad(&h, &lam).unwrap();
        let lhs = dirac_operator(&gamma, &hb, &psi.transform(&s)).unwrap();
        let rhs = dirac_operator(&gamma, &h, &psi).unwrap().transform(&s);
        assert!(lhs.sub(&rhs).is_zero(&ZeroCfg::default()).unwrap().is_zero());
    }

    #[test]
    fn vertical_differential_reduces_to_the_spin_connection() {
        let chart = chart4();
        let x0 = Expr::var(chart.coord(0).unwrap());
        let mut coframe = vec![Expr::zero(); 16];
        coframe[0] = Expr::one();
        coframe[5] = Expr::one().add(&x0.mul(&x0));
        coframe[10] = Expr::int(2);
        coframe[15] = Expr::one();
        let h = TetradField::new(&chart, coframe).unwrap();
        let gamma = WorldConnection::from_fn(&chart, |l, m, n| {
            if (l, m, n) == (1, 2, 2) {
                x0.clone()
            } else {
                Expr::zero()
            }
        });
        let point = TetradJetPoint::from_tetrad(&h).unwrap();
        let vert = vertical_covariant_differential(&gamma, &point).unwrap();
        let omega = spin_connection(&gamma, &h).unwrap();
        assert!(vert
            .sub(&omega)
            .is_zero(&ZeroCfg::default())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn formal_vertical_differential_is_antisymmetric_and_flat_at_the_flat_point() {
        let chart = chart4();
        let gamma = WorldConnection::zero(&chart);
        let point = TetradJetPoint::formal(&chart).unwrap();
        let vert = vertical_covariant_differential(&gamma, &point).unwrap();
        // Antisymmetry is structural (enforced on construction); spot-check.
        for lam in 0..4 {
            for a in 0..4 {
                assert!(vert.get(lam, a, a).is_zero_literal());
            }
        }
        // Flat point: identity frame, vanishing jets → zero block.
        let mut subs = std::collections::HashMap::new();
        for mu in 0..4 {
            for k in 0..4 {
                let sym = point.frame(mu, k).as_var().unwrap().clone();
                subs.insert(sym, if mu == k { Expr::one() } else { Expr::zero() });
                for lam in 0..4 {
                    let sym = point.frame_jet(lam, mu, k).as_var().unwrap().clone();
                    subs.insert(sym, Expr::zero());
                }
            }
        }
        let cfg = ZeroCfg::default();
        for lam in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let v = vert.get(lam, a, b).subst(&subs);
                    assert!(is_zero(&v, &cfg).unwrap().is_zero(), "({lam},{a},{b})");
                }
            }
        }
    }
}
