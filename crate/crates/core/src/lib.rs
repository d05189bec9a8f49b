//! Symbolic Picard iteration for two-point boundary value problems.
//!
//! The solvers approximate `y'' = f(t, y, y')` with `y(a) = α`, `y(b) = β`
//! by iterating on polynomial representations of `y` and `u = y'` while
//! simultaneously updating the unknown initial slope `γ = y'(a)` (or the
//! unknown left value `α` when the slope is given instead). Right-hand sides
//! built from `exp`, `sin`, `cos`, `ln` and reciprocals are first rewritten as
//! larger polynomial systems through auxiliary variables, so every quadrature
//! is a closed-form antiderivative.
//!
//! Modules:
//! - [`polynomial`]: dense shifted-basis polynomials and multivariate right-hand sides
//! - [`problem`]: boundary value problem model, polynomialization, problem files
//! - [`picard`]: single-interval iteration
//! - [`multishoot`]: equal-partition multi-interval iteration
//! - [`analysis`]: convergence gates, prefix checks, error reports
//! - [`oracle`]: fixed-step RK4 with bisection shooting, for validation

pub mod analysis;
pub mod error;
pub mod multishoot;
pub mod oracle;
pub mod picard;
pub mod polynomial;
pub mod problem;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Poly = polynomial::Polynomial<f64>;
pub type Poly32 = polynomial::Polynomial<f32>;
pub type MultiPoly = polynomial::MultiPoly<f64>;
pub type SystemSpec = problem::SystemSpec<f64>;
pub type AuxExpr = problem::AuxExpr<f64>;
pub type SolveOptions = picard::SolveOptions;
pub type Solution = picard::Solution<f64>;
pub type IterationState = picard::IterationState<f64>;
pub type MultiSolution = multishoot::MultiSolution<f64>;
pub type SegmentState = multishoot::SegmentState<f64>;
pub type Trajectory = oracle::Trajectory<f64>;
