//! Deciding whether an expression is identically zero.
//!
//! Three-valued outcome:
//!
//! * `proven-zero` — canonical form is the literal `0`, or the expression is
//!   a rational function whose exact distributed numerator has no terms;
//! * `probably-zero(n)` — `n` seeded pseudo-random sample points all
//!   evaluated to zero (exactly, for rational expressions; within a
//!   magnitude-scaled tolerance, for transcendental ones);
//! * `nonzero` — a witness point together with the value there.
//!
//! Sampling avoids domain violations (poles, nonpositive `ln`/`sqrt`
//! arguments) by resampling up to a retry bound and then failing loudly.
//! With a fixed seed the verdicts are fully deterministic.

use super::eval::{eval_exact, eval_f64, rational_to_f64};
use super::poly::{expand_rational, ExpandError};
use super::{Expr, Symbol};
use crate::error::{Error, Result};
use num::{BigInt, BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// The value of an expression at a witness point.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessValue {
    /// Exact rational value (rational expressions).
    Exact(BigRational),
    /// Floating-point value (expressions with transcendental functions).
    Approx(f64),
}

impl fmt::Display for WitnessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessValue::Exact(r) => write!(f, "{r}"),
            WitnessValue::Approx(x) => write!(f, "{x:e}"),
        }
    }
}

/// Outcome of a zero test.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Identically zero, decided exactly.
    ProvenZero,
    /// Zero at all sampled points.
    ProbablyZero {
        /// Number of admissible sample points tested.
        samples: usize,
    },
    /// Definitely not identically zero.
    Nonzero {
        /// The sample point, sorted by variable name.
        witness: Vec<(Symbol, BigRational)>,
        /// The value at the witness point.
        value: WitnessValue,
    },
}

impl Verdict {
    /// True for `proven-zero` and `probably-zero`.
    pub fn is_zero(&self) -> bool {
        !matches!(self, Verdict::Nonzero { .. })
    }

    /// True only for `proven-zero`.
    pub fn is_proven(&self) -> bool {
        matches!(self, Verdict::ProvenZero)
    }

    /// Merge componentwise verdicts into a single tensor-level verdict:
    /// any `nonzero` wins, otherwise the weakest zero verdict is kept.
    pub fn combine(self, other: Verdict) -> Verdict {
        match (self, other) {
            (v @ Verdict::Nonzero { .. }, _) => v,
            (_, v @ Verdict::Nonzero { .. }) => v,
            (Verdict::ProvenZero, v) => v,
            (v, Verdict::ProvenZero) => v,
            (Verdict::ProbablyZero { samples: a }, Verdict::ProbablyZero { samples: b }) => {
                Verdict::ProbablyZero { samples: a.min(b) }
            }
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ProvenZero => write!(f, "proven-zero"),
            Verdict::ProbablyZero { samples } => write!(f, "probably-zero({samples})"),
            Verdict::Nonzero { witness, value } => {
                write!(f, "nonzero at (")?;
                for (i, (s, v)) in witness.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s} = {v}")?;
                }
                write!(f, ") with value {value}")
            }
        }
    }
}

/// Configuration of the zero test.
#[derive(Debug, Clone)]
pub struct ZeroCfg {
    /// Number of sample points for the probabilistic fallback.
    pub samples: usize,
    /// Seed of the deterministic sample stream.
    pub seed: u64,
    /// Term budget for the exact expansion stage.
    pub expand_budget: usize,
    /// Variables that must be sampled strictly positive (for example a
    /// symbol standing for a square root of a determinant).
    pub positive: BTreeSet<Symbol>,
    /// Retries per sample point before giving up on the expression.
    pub max_resample: usize,
    /// Relative tolerance for the floating-point path.
    pub tol: f64,
}

impl Default for ZeroCfg {
    fn default() -> ZeroCfg {
        ZeroCfg {
            samples: 32,
            seed: 0x6d61_6772,
            expand_budget: 200_000,
            positive: BTreeSet::new(),
            max_resample: 400,
            tol: 1e-9,
        }
    }
}

impl ZeroCfg {
    /// Default configuration with a different sample count.
    pub fn with_samples(samples: usize) -> ZeroCfg {
        ZeroCfg {
            samples,
            ..ZeroCfg::default()
        }
    }

    /// Builder-style seed override.
    pub fn seed(mut self, seed: u64) -> ZeroCfg {
        self.seed = seed;
        self
    }

    /// Builder-style positivity constraint.
    pub fn positive_var(mut self, s: &Symbol) -> ZeroCfg {
        self.positive.insert(s.clone());
        self
    }
}

/// Decide whether `e` is identically zero. See the module docs for the
/// decision procedure; errors mean the expression could not be sampled (for
/// example a pole at every attempted point), never "unknown".
pub fn is_zero(e: &Expr, cfg: &ZeroCfg) -> Result<Verdict> {
    if e.is_zero_literal() {
        return Ok(Verdict::ProvenZero);
    }
    let vars: Vec<Symbol> = e.free_vars().into_iter().collect();
    if e.is_rational() {
        match expand_rational(e, cfg.expand_budget) {
            Ok(form) => {
                if form.num.is_zero() {
                    return Ok(Verdict::ProvenZero);
                }
                // Exactly nonzero: exhibit a witness.
                return nonzero_witness_exact(e, &vars, cfg);
            }
            Err(ExpandError::Budget) => return sample_exact(e, &vars, cfg),
            Err(ExpandError::ZeroDenominator) => {
                return Err(Error::Domain(
                    "expression contains a division by a symbolically zero denominator".into(),
                ))
            }
            Err(ExpandError::NotRational) => unreachable!("is_rational() was checked"),
        }
    }
    sample_float(e, &vars, cfg)
}

fn gen_point(
    rng: &mut ChaCha8Rng,
    vars: &[Symbol],
    positive: &BTreeSet<Symbol>,
) -> HashMap<Symbol, BigRational> {
    vars.iter()
        .map(|v| {
            let denom = rng.gen_range(1..=4i64);
            let numer = if positive.contains(v) {
                rng.gen_range(1..=12i64)
            } else {
                // Skip zero to stay clear of the most common singular loci.
                let n = rng.gen_range(-12..=11i64);
                if n >= 0 {
                    n + 1
                } else {
                    n
                }
            };
            (v.clone(), BigRational::new(BigInt::from(numer), BigInt::from(denom)))
        })
        .collect()
}

fn witness_vec(env: &HashMap<Symbol, BigRational>) -> Vec<(Symbol, BigRational)> {
    let mut w: Vec<(Symbol, BigRational)> = env.iter().map(|(s, v)| (s.clone(), v.clone())).collect();
    w.sort_by(|a, b| a.0.cmp(&b.0));
    w
}

fn nonzero_witness_exact(e: &Expr, vars: &[Symbol], cfg: &ZeroCfg) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.max_resample.max(cfg.samples) {
        let env = gen_point(&mut rng, vars, &cfg.positive);
        if let Ok(v) = eval_exact(e, &env) {
            if !v.is_zero() {
                return Ok(Verdict::Nonzero {
                    witness: witness_vec(&env),
                    value: WitnessValue::Exact(v),
                });
            }
        }
    }
    Err(Error::SamplingExhausted(cfg.max_resample))
}

fn sample_exact(e: &Expr, vars: &[Symbol], cfg: &ZeroCfg) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < cfg.samples {
        if attempts >= cfg.max_resample + cfg.samples {
            return Err(Error::SamplingExhausted(attempts));
        }
        attempts += 1;
        let env = gen_point(&mut rng, vars, &cfg.positive);
        match eval_exact(e, &env) {
            Err(_) => continue,
            Ok(v) => {
                if !v.is_zero() {
                    return Ok(Verdict::Nonzero {
                        witness: witness_vec(&env),
                        value: WitnessValue::Exact(v),
                    });
                }
                accepted += 1;
            }
        }
    }
    Ok(Verdict::ProbablyZero { samples: accepted })
}

fn sample_float(e: &Expr, vars: &[Symbol], cfg: &ZeroCfg) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < cfg.samples {
        if attempts >= cfg.max_resample + cfg.samples {
            return Err(Error::SamplingExhausted(attempts));
        }
        attempts += 1;
        let env = gen_point(&mut rng, vars, &cfg.positive);
        let fenv: HashMap<Symbol, f64> = env
            .iter()
            .map(|(s, r)| (s.clone(), rational_to_f64(r)))
            .collect();
        match eval_f64(e, &fenv) {
            Err(_) => continue,
            Ok((v, mag)) => {
                if v.abs() > cfg.tol * mag.max(1.0) {
                    return Ok(Verdict::Nonzero {
                        witness: witness_vec(&env),
                        value: WitnessValue::Approx(v),
                    });
                }
                accepted += 1;
            }
        }
    }
    Ok(Verdict::ProbablyZero { samples: accepted })
}
