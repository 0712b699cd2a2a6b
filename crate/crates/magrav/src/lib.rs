//! Exact symbolic tensor calculus for metric-affine gravity.
//!
//! The crate mechanizes the classical gauge-theoretic formulation of gravity
//! on natural bundles and verifies its structural identities by computation:
//!
//! * [`symexpr`] — an exact scalar-expression engine over arbitrary-precision
//!   rationals with a deterministic canonical form, partial derivatives, and a
//!   probabilistic-plus-exact zero test;
//! * [`geometry`] — charts, tensor fields, world connections, torsion,
//!   curvature, nonmetricity, the contorsion splitting, tetrads and Lorentz
//!   connections, and the space-time metric construction;
//! * [`corpus`] — deterministic example inputs (named metrics and seeded
//!   random fields) shared by tests, examples, and the self-check suite;
//! * [`lifts`] — functorial lifts of vector fields to tensor, frame and
//!   connection bundles, with Lie-bracket functoriality checks;
//! * [`variational`] — first-order jet calculus on the metric-connection
//!   configuration space: total derivatives, Euler–Lagrange operators, the
//!   Hilbert–Einstein and Yang–Mills style Lagrangians, invariance
//!   identities, energy-momentum currents, Komar superpotentials and Noether
//!   identities;
//! * [`brst`] — a graded polynomial algebra with ghosts and antifields, the
//!   gauge operator, its nilpotent BRST extension and the extended Lagrangian;
//! * [`spinor`] — exact gamma matrices in a fixed Dirac basis, Lorentz
//!   generators, spin connections and the Dirac operator assembled from a
//!   tetrad;
//! * [`scenario`] — a line-oriented scenario format plus the report machinery
//!   behind the `magrav` command-line tool (`run` / `selfcheck`).
//!
//! Sign conventions differ from most textbooks and are documented in
//! [`geometry`]; the short version is that Christoffel symbols (and with them
//! curvature) carry an overall minus sign relative to the common convention,
//! so the unit 2-sphere has scalar curvature `-2`. A documented converter to
//! the textbook convention is provided.

pub mod brst;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod lifts;
pub mod numeric;
pub mod report;
pub mod scenario;
pub mod spinor;
pub mod symexpr;
pub mod variational;

pub use error::{Error, Result};
pub use symexpr::{Expr, Func, Role, Symbol, VarTable, Verdict, ZeroCfg};
