//! Boundary value problems as first-order polynomial systems.
//!
//! A [`SystemSpec`] holds `y' = u`, `u' = f`, plus any auxiliary states, all
//! with polynomial right-hand sides over `(t, y, u, aux…)`. Exactly one of
//! `y(a)` and `u(a)` is unknown; the other is fixed by the left boundary
//! condition, and `y(b) = β` always.

mod expr;
pub mod file;
mod polynomialize;

pub use expr::{parse_rhs, parse_with_states, AuxExpr, Func, Parser};
pub use polynomialize::polynomialize;

use crate::error::{Error, Result};
use crate::polynomial::{sample_grid, MultiPoly};
use crate::scalar::Scalar;

/// Which initial value the iteration has to discover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unknown {
    /// `y(a) = α` is given and `γ = u(a)` is unknown.
    Slope,
    /// `u(a) = γ` is given and `α = y(a)` is unknown.
    LeftValue,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitCondition<T> {
    Known(T),
    Unknown,
    /// Auxiliary state whose initial value is its definition evaluated at `t = a`.
    Derived(AuxExpr<T>),
}

/// Left boundary condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LeftBoundary<T> {
    Value(T),
    Slope(T),
}

/// Boundary data `y(a) = α` or `y'(a) = γ`, and `y(b) = β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boundary<T> {
    pub left: LeftBoundary<T>,
    pub right: T,
}

impl<T: Scalar> Boundary<T> {
    pub fn dirichlet(alpha: T, beta: T) -> Self {
        Self {
            left: LeftBoundary::Value(alpha),
            right: beta,
        }
    }

    pub fn slope_left(gamma: T, beta: T) -> Self {
        Self {
            left: LeftBoundary::Slope(gamma),
            right: beta,
        }
    }

    pub fn unknown(&self) -> Unknown {
        match self.left {
            LeftBoundary::Value(_) => Unknown::Slope,
            LeftBoundary::Slope(_) => Unknown::LeftValue,
        }
    }
}

/// First-order polynomial system with two-point boundary data.
///
/// MultiPoly variable 0 is `t`; variable `i + 1` is state `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec<T> {
    pub a: T,
    pub b: T,
    pub state_names: Vec<String>,
    pub rhs: Vec<MultiPoly<T>>,
    pub init: Vec<InitCondition<T>>,
    pub beta: T,
    pub unknown: Unknown,
}

pub const Y: usize = 0;
pub const U: usize = 1;

impl<T: Scalar> SystemSpec<T> {
    /// `y'' = f(t, y, u)` with `f` already a polynomial over `(t, y, u)`.
    pub fn second_order(a: T, b: T, f: MultiPoly<T>, boundary: Boundary<T>) -> Result<Self> {
        if f.arity() != 3 {
            return Err(Error::ArityMismatch {
                expected: 3,
                got: f.arity(),
            });
        }
        let init = match boundary.left {
            LeftBoundary::Value(alpha) => vec![InitCondition::Known(alpha), InitCondition::Unknown],
            LeftBoundary::Slope(gamma) => vec![InitCondition::Unknown, InitCondition::Known(gamma)],
        };
        Ok(Self {
            a,
            b,
            state_names: vec!["y".into(), "u".into()],
            rhs: vec![MultiPoly::variable(3, U + 1), f],
            init,
            beta: boundary.right,
            unknown: boundary.unknown(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    /// Width of the MultiPoly variable vector, `1 + num_states`.
    pub fn arity(&self) -> usize {
        self.num_states() + 1
    }

    /// The given left value α (Slope mode only).
    pub fn alpha(&self) -> Option<T> {
        match self.init.get(Y) {
            Some(InitCondition::Known(v)) => Some(*v),
            _ => None,
        }
    }

    /// The given left slope γ (LeftValue mode only).
    pub fn gamma(&self) -> Option<T> {
        match self.init.get(U) {
            Some(InitCondition::Known(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn width(&self) -> T {
        self.b - self.a
    }

    /// Checks every structural invariant; an empty list means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.a < self.b) {
            out.push("empty interval: a must be less than b".to_string());
        }
        if !self.a.is_finite() || !self.b.is_finite() || !self.beta.is_finite() {
            out.push("interval endpoints and boundary values must be finite".to_string());
        }
        let n = self.state_names.len();
        if n < 2 {
            out.push("a system needs at least the states y and u".to_string());
        }
        if self.rhs.len() != n || self.init.len() != n {
            out.push(format!(
                "state count mismatch: {} names, {} right-hand sides, {} initial conditions",
                n,
                self.rhs.len(),
                self.init.len()
            ));
        }
        for (i, f) in self.rhs.iter().enumerate() {
            if f.arity() != n + 1 {
                out.push(format!(
                    "right-hand side {i} has arity {}, expected {}",
                    f.arity(),
                    n + 1
                ));
            }
        }
        if let Some(f) = self.rhs.first() {
            if !f.is_projection_onto(U + 1) {
                out.push("first equation must be y′ = u".to_string());
            }
        }
        let unknowns: Vec<usize> = self
            .init
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, InitCondition::Unknown))
            .map(|(i, _)| i)
            .collect();
        let expected = match self.unknown {
            Unknown::Slope => U,
            Unknown::LeftValue => Y,
        };
        if unknowns != [expected] {
            out.push(format!(
                "exactly one initial value must be unknown and it must be state {} for {:?} mode",
                self.state_names.get(expected).map_or("?", String::as_str),
                self.unknown
            ));
        }
        let other = 1 - expected;
        if n >= 2 && !matches!(self.init.get(other), Some(InitCondition::Known(_))) {
            out.push(format!(
                "initial value of state {} must be given",
                self.state_names.get(other).map_or("?", String::as_str)
            ));
        }
        for (i, c) in self.init.iter().enumerate() {
            match c {
                InitCondition::Derived(_) if i < 2 => {
                    out.push(format!("state {i} cannot have a derived initial value"));
                }
                InitCondition::Derived(e) if e.max_state().is_some_and(|s| s > U) => {
                    out.push(format!(
                        "derived initial value of state {} may only reference y, u and t",
                        self.state_names[i]
                    ));
                }
                InitCondition::Known(v) if !v.is_finite() => {
                    out.push(format!("initial value of state {i} is not finite"));
                }
                _ => {}
            }
        }
        out
    }

    /// Returns `Err` carrying every diagnostic if the system is invalid.
    pub fn check(&self) -> Result<()> {
        let diagnostics = self.validate();
        if diagnostics.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSystem(diagnostics.join("; ")))
        }
    }

    /// Initial state vector at `t = a` for the given `(α, γ)`.
    pub fn derived_inits(&self, alpha: T, gamma: T) -> Result<Vec<T>> {
        self.derived_inits_at(self.a, alpha, gamma)
    }

    /// Initial state vector at an arbitrary node `t0` with `y(t0) = y0`,
    /// `u(t0) = u0`; auxiliary definitions are evaluated there.
    pub fn derived_inits_at(&self, t0: T, y0: T, u0: T) -> Result<Vec<T>> {
        let base = [y0, u0];
        let mut out = Vec::with_capacity(self.num_states());
        for (i, cond) in self.init.iter().enumerate() {
            let value = match (i, cond) {
                (Y, _) => y0,
                (U, _) => u0,
                (_, InitCondition::Known(v)) => *v,
                (_, InitCondition::Derived(e)) => {
                    e.evaluate(t0, &base).map_err(|reason| Error::Domain {
                        state: self.state_names[i].clone(),
                        reason,
                    })?
                }
                (_, InitCondition::Unknown) => {
                    return Err(Error::InvalidSystem(format!(
                        "auxiliary state {} has no initial value",
                        self.state_names[i]
                    )))
                }
            };
            if !value.is_finite() {
                return Err(Error::Domain {
                    state: self.state_names[i].clone(),
                    reason: "initial value is not finite".into(),
                });
            }
            out.push(value);
        }
        Ok(out)
    }

    /// Sampled estimate of the sum-norm Lipschitz constant of `u' = f` in
    /// `(y, u)`; see [`estimate_lipschitz`].
    pub fn estimate_lipschitz(&self, bounds: &[(T, T)], grid: usize) -> LipschitzEstimate<T> {
        estimate_lipschitz(self, bounds, grid)
    }
}

/// Result of [`estimate_lipschitz`]: the grid maximum and how it was sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzEstimate<T> {
    pub value: T,
    pub points_per_dimension: usize,
}

/// Default number of grid points per box dimension.
pub const LIPSCHITZ_GRID: usize = 33;

/// Maximizes `|∂f/∂y| + |∂f/∂u|` of the `u'` right-hand side over
/// `[a, b] × box`, sampling `grid` points per dimension.
///
/// `bounds` gives `(lo, hi)` for each state, starting with `y` and `u`;
/// auxiliary states without bounds are held at zero. The gradient is
/// exact; only the maximization is sampled.
pub fn estimate_lipschitz<T: Scalar>(
    spec: &SystemSpec<T>,
    bounds: &[(T, T)],
    grid: usize,
) -> LipschitzEstimate<T> {
    let grid = grid.max(2);
    let f = &spec.rhs[U];
    let dy = f.partial_derivative(Y + 1);
    let du = f.partial_derivative(U + 1);

    // Only dimensions the gradient actually depends on need sampling.
    let mut axes: Vec<(usize, Vec<T>)> = Vec::new();
    let depends = |v: usize| dy.uses_variable(v) || du.uses_variable(v);
    if depends(0) {
        axes.push((0, sample_grid(spec.a, spec.b, grid).collect()));
    }
    for v in 1..spec.arity() {
        if !depends(v) {
            continue;
        }
        let (lo, hi) = bounds.get(v - 1).copied().unwrap_or((T::zero(), T::zero()));
        axes.push((v, sample_grid(lo, hi, grid).collect()));
    }

    let mut point = vec![T::zero(); spec.arity()];
    let mut best = T::zero();
    let mut idx = vec![0usize; axes.len()];
    loop {
        for (k, (v, values)) in axes.iter().enumerate() {
            point[*v] = values[idx[k]];
        }
        let g = dy.evaluate(&point).abs() + du.evaluate(&point).abs();
        if g > best {
            best = g;
        }
        // Odometer increment over the grid.
        let mut k = 0;
        loop {
            if k == axes.len() {
                return LipschitzEstimate {
                    value: best,
                    points_per_dimension: grid,
                };
            }
            idx[k] += 1;
            if idx[k] < axes[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
