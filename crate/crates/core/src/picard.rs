//! Single-interval Picard iteration with a self-correcting initial value.
//!
//! Starting from `y⁰ ≡ α`, `u⁰ ≡ (β − α)/(b − a)`, each step computes
//!
//! ```text
//! γᵏ⁺¹ = (β − α − ∫ₐᵇ (b − s) f(s, yᵏ, uᵏ) ds) / (b − a)
//! yᵏ⁺¹ = α + ∫ₐᵗ uᵏ
//! uᵏ⁺¹ = γᵏ⁺¹ + ∫ₐᵗ f(s, yᵏ, uᵏ) ds
//! ```
//!
//! and auxiliary states follow their own Picard recursions. Every new
//! iterate reads only the previous one. When the slope is given instead of
//! the left value, `α` is updated from `α = β − γ(b − a) − ∫ₐᵇ (b − s) f ds`.

use crate::error::{Error, Result};
use crate::polynomial::{sup_distance, Polynomial};
use crate::problem::{SystemSpec, Unknown, U, Y};
use crate::scalar::Scalar;

/// Sampled magnitude beyond which an iterate is treated as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TruncationMode {
    /// Only the degree cap is applied.
    #[default]
    Full,
    /// Iterate `k` is additionally truncated to degree `k + 1`.
    Prefix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Stop when `|Δγ|` (or `|Δα|`) drops below this. Zero never stops early.
    pub gamma_tol: f64,
    /// Stop when the sampled sup change of every state drops below this.
    pub state_tol: f64,
    pub degree_cap: usize,
    pub samples: usize,
    pub truncation_mode: TruncationMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 25,
            gamma_tol: 1e-10,
            state_tol: 1e-10,
            degree_cap: 64,
            samples: crate::polynomial::DEFAULT_SAMPLES,
            truncation_mode: TruncationMode::Full,
        }
    }
}

impl SolveOptions {
    /// Runs exactly `iterations` steps with both stopping tests disabled.
    pub fn fixed(iterations: usize) -> Self {
        Self {
            max_iterations: iterations,
            gamma_tol: 0.0,
            state_tol: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOptions(m.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.gamma_tol >= 0.0 && self.gamma_tol.is_finite()) {
            return bad("gamma_tol must be a finite non-negative number");
        }
        if !(self.state_tol >= 0.0 && self.state_tol.is_finite()) {
            return bad("state_tol must be a finite non-negative number");
        }
        if self.degree_cap < 2 {
            return bad("degree_cap must be at least 2");
        }
        if self.samples < 2 {
            return bad("samples must be at least 2");
        }
        Ok(())
    }

    pub(crate) fn degree_limit(&self, k: usize) -> usize {
        match self.truncation_mode {
            TruncationMode::Full => self.degree_cap,
            TruncationMode::Prefix => self.degree_cap.min(k + 1),
        }
    }
}

/// The `k`-th iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationState<T> {
    pub k: usize,
    /// `γᵏ` in slope mode, `αᵏ` in left-value mode.
    pub unknown_value: T,
    /// `y, u`, then auxiliaries; all with basepoint `a`.
    pub states: Vec<Polynomial<T>>,
    /// `|yᵏ(b) − β|`.
    pub right_residual: T,
    /// Change of the unknown from the previous iterate.
    pub unknown_delta: T,
    /// Largest sampled sup change over all states.
    pub state_delta: T,
}

impl<T: Scalar> IterationState<T> {
    pub fn y(&self) -> &Polynomial<T> {
        &self.states[Y]
    }

    pub fn u(&self) -> &Polynomial<T> {
        &self.states[U]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub final_states: Vec<Polynomial<T>>,
    /// `γ¹, γ², …` (or the `α` trace).
    pub unknown_trace: Vec<T>,
    pub residual_trace: Vec<T>,
    pub state_delta_trace: Vec<T>,
    pub converged: bool,
    pub iterations_used: usize,
    pub unknown: Unknown,
    /// Iterates `1..=iterations_used`.
    pub history: Vec<IterationState<T>>,
}

impl<T: Scalar> Solution<T> {
    pub fn y(&self) -> &Polynomial<T> {
        &self.final_states[Y]
    }

    pub fn final_unknown(&self) -> T {
        *self.unknown_trace.last().expect("at least one iteration")
    }
}

/// `(α, γ)` implied by the unknown's current value.
fn left_data<T: Scalar>(spec: &SystemSpec<T>, unknown_value: T) -> (T, T) {
    match spec.unknown {
        Unknown::Slope => (spec.alpha().expect("validated slope-mode spec"), unknown_value),
        Unknown::LeftValue => (unknown_value, spec.gamma().expect("validated left-value spec")),
    }
}

/// Constant initial iterate.
pub fn initialize<T: Scalar>(spec: &SystemSpec<T>) -> Result<IterationState<T>> {
    spec.check()?;
    let width = spec.width();
    let unknown_value = match spec.unknown {
        Unknown::Slope => (spec.beta - spec.alpha().expect("checked")) / width,
        Unknown::LeftValue => spec.beta - spec.gamma().expect("checked") * width,
    };
    let (alpha, gamma) = left_data(spec, unknown_value);
    let values = spec.derived_inits(alpha, gamma)?;
    let states: Vec<_> = values
        .iter()
        .map(|&v| Polynomial::constant(spec.a, v))
        .collect();
    Ok(IterationState {
        k: 0,
        unknown_value,
        right_residual: (alpha - spec.beta).abs(),
        states,
        unknown_delta: T::zero(),
        state_delta: T::zero(),
    })
}

fn divergence(k: usize) -> Error {
    Error::Divergence {
        iteration: k,
        segment: None,
    }
}

/// Right-hand sides evaluated along the current iterate.
fn integrands<T: Scalar>(
    spec: &SystemSpec<T>,
    states: &[Polynomial<T>],
    cap: usize,
    k: usize,
) -> Result<Vec<Polynomial<T>>> {
    spec.rhs
        .iter()
        .map(|f| {
            f.compose(states, Some(cap)).map_err(|e| match e {
                Error::NonFinite { .. } => divergence(k),
                other => other,
            })
        })
        .collect()
}

fn weighted_rhs<T: Scalar>(spec: &SystemSpec<T>, state: &IterationState<T>, opts: &SolveOptions) -> Result<T> {
    let f = spec.rhs[U].compose(&state.states, Some(opts.degree_cap))?;
    Ok(f.weighted_integral(spec.a, spec.b))
}

/// `γᵏ⁺¹` from the `k`-th iterate (slope mode).
pub fn gamma_update<T: Scalar>(spec: &SystemSpec<T>, state: &IterationState<T>, opts: &SolveOptions) -> Result<T> {
    let alpha = match (spec.unknown, spec.alpha()) {
        (Unknown::Slope, Some(alpha)) => alpha,
        _ => return Err(Error::InvalidSystem("gamma_update needs a slope-mode system".into())),
    };
    Ok((spec.beta - alpha - weighted_rhs(spec, state, opts)?) / spec.width())
}

/// `αᵏ⁺¹` from the `k`-th iterate (left-value mode).
pub fn alpha_update<T: Scalar>(spec: &SystemSpec<T>, state: &IterationState<T>, opts: &SolveOptions) -> Result<T> {
    let gamma = match (spec.unknown, spec.gamma()) {
        (Unknown::LeftValue, Some(gamma)) => gamma,
        _ => return Err(Error::InvalidSystem("alpha_update needs a left-value-mode system".into())),
    };
    Ok(spec.beta - gamma * spec.width() - weighted_rhs(spec, state, opts)?)
}

/// Builds `Xᵏ⁺¹ = X(a) + ∫ₐᵗ F(Xᵏ)` for every state, given the new initial values.
pub(crate) fn integrate_states<T: Scalar>(
    integrands: &[Polynomial<T>],
    initial: &[T],
    lower: T,
    degree: usize,
) -> Result<Vec<Polynomial<T>>> {
    integrands
        .iter()
        .zip(initial)
        .map(|(f, &x0)| Ok(f.antiderivative(lower)?.shift_by(x0)?.truncate(degree)))
        .collect()
}

/// Rejects iterates with huge sampled values.
pub(crate) fn check_bounded<T: Scalar>(states: &[Polynomial<T>], a: T, b: T, samples: usize) -> bool {
    let limit = T::of(DIVERGENCE_LIMIT);
    states.iter().all(|p| {
        let m = p.sup_norm_estimate(a, b, samples);
        m.is_finite() && m <= limit
    })
}

/// One Picard step: the `(k+1)`-th iterate from the `k`-th.
pub fn picard_step<T: Scalar>(
    spec: &SystemSpec<T>,
    state: &IterationState<T>,
    opts: &SolveOptions,
) -> Result<IterationState<T>> {
    let k = state.k + 1;
    let f = integrands(spec, &state.states, opts.degree_cap, k)?;
    let weighted = f[U].weighted_integral(spec.a, spec.b);
    let unknown_value = match spec.unknown {
        Unknown::Slope => {
            let alpha = spec.alpha().expect("slope mode");
            (spec.beta - alpha - weighted) / spec.width()
        }
        Unknown::LeftValue => {
            let gamma = spec.gamma().expect("left-value mode");
            spec.beta - gamma * spec.width() - weighted
        }
    };
    if !unknown_value.is_finite() {
        return Err(divergence(k));
    }
    let (alpha, gamma) = left_data(spec, unknown_value);
    let initial = spec.derived_inits(alpha, gamma)?;
    let states = integrate_states(&f, &initial, spec.a, opts.degree_limit(k)).map_err(|e| match e {
        Error::NonFinite { .. } => divergence(k),
        other => other,
    })?;
    if !check_bounded(&states, spec.a, spec.b, opts.samples) {
        return Err(divergence(k));
    }
    let state_delta = states
        .iter()
        .zip(&state.states)
        .map(|(new, old)| sup_distance(new, old, spec.a, spec.b, opts.samples))
        .fold(T::zero(), T::max);
    Ok(IterationState {
        k,
        unknown_value,
        right_residual: (states[Y].evaluate(spec.b) - spec.beta).abs(),
        unknown_delta: (unknown_value - state.unknown_value).abs(),
        state_delta,
        states,
    })
}

/// Iterates until both deltas fall below their tolerances or
/// `max_iterations` is reached.
pub fn solve<T: Scalar>(spec: &SystemSpec<T>, opts: &SolveOptions) -> Result<Solution<T>> {
    opts.validate()?;
    let mut state = initialize(spec)?;
    let gamma_tol = T::of(opts.gamma_tol);
    let state_tol = T::of(opts.state_tol);
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        state = picard_step(spec, &state, opts)?;
        history.push(state.clone());
        if state.unknown_delta < gamma_tol && state.state_delta < state_tol {
            converged = true;
            break;
        }
    }
    Ok(Solution {
        final_states: state.states.clone(),
        unknown_trace: history.iter().map(|s| s.unknown_value).collect(),
        residual_trace: history.iter().map(|s| s.right_residual).collect(),
        state_delta_trace: history.iter().map(|s| s.state_delta).collect(),
        converged,
        iterations_used: history.len(),
        unknown: spec.unknown,
        history,
    })
}

/// Plain Picard iterates of the initial value problem with every initial
/// value fixed (no boundary correction). Returns iterates `1..=iterations`,
/// each truncated to `degree_cap`.
pub fn ivp_iterates<T: Scalar>(
    spec: &SystemSpec<T>,
    alpha: T,
    gamma: T,
    iterations: usize,
    degree_cap: usize,
) -> Result<Vec<Vec<Polynomial<T>>>> {
    let initial = spec.derived_inits(alpha, gamma)?;
    let mut states: Vec<_> = initial
        .iter()
        .map(|&v| Polynomial::constant(spec.a, v))
        .collect();
    let mut out = Vec::with_capacity(iterations);
    for k in 1..=iterations {
        let f = integrands(spec, &states, degree_cap, k)?;
        states = integrate_states(&f, &initial, spec.a, degree_cap)?;
        out.push(states.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::MultiPoly;
    use crate::problem::Boundary;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn harmonic(b: f64, beta: f64) -> SystemSpec<f64> {
        let f = MultiPoly::variable(3, 1).neg();
        SystemSpec::second_order(0.0, b, f, Boundary::dirichlet(1.0, beta)).unwrap()
    }

    fn free(alpha: f64, beta: f64) -> SystemSpec<f64> {
        SystemSpec::second_order(0.0, 2.0, MultiPoly::zero(3), Boundary::dirichlet(alpha, beta)).unwrap()
    }

    #[test]
    fn initial_slope_is_average() {
        let s = initialize(&harmonic(FRAC_PI_4, 2f64.sqrt())).unwrap();
        assert!((s.unknown_value - (2f64.sqrt() - 1.0) / FRAC_PI_4).abs() < 1e-15);
        assert!((s.unknown_value - 0.527).abs() < 1e-3);
        assert_eq!(initialize(&free(3.0, 3.0)).unwrap().unknown_value, 0.0);
    }

    #[test]
    fn gamma_update_examples() {
        let opts = SolveOptions::default();
        let spec = free(1.0, 5.0);
        let s = initialize(&spec).unwrap();
        assert_eq!(gamma_update(&spec, &s, &opts).unwrap(), 2.0);

        let b = FRAC_PI_8;
        let spec = harmonic(b, (1.0 + 0.5f64.sqrt()).sqrt());
        let s = initialize(&spec).unwrap();
        let g = gamma_update(&spec, &s, &opts).unwrap();
        assert!(((g - 1.0).abs() - 0.02294).abs() < 1e-4);

        let spec = harmonic(FRAC_PI_4, 2f64.sqrt());
        let s = initialize(&spec).unwrap();
        let g = gamma_update(&spec, &s, &opts).unwrap();
        assert!(((g - 1.0).abs() - 0.07991).abs() < 1e-5);
        assert!(alpha_update(&spec, &s, &opts).is_err());
    }

    #[test]
    fn alpha_update_examples() {
        let opts = SolveOptions::default();
        let zero = SystemSpec::second_order(0.0, 2.0, MultiPoly::zero(3), Boundary::slope_left(0.5, 4.0)).unwrap();
        let s = initialize(&zero).unwrap();
        assert_eq!(alpha_update(&zero, &s, &opts).unwrap(), 3.0);

        let one = SystemSpec::second_order(0.0, 1.0, MultiPoly::constant(3, 1.0f64), Boundary::slope_left(0.0, 1.0))
            .unwrap();
        let s = initialize(&one).unwrap();
        assert!((alpha_update(&one, &s, &opts).unwrap() - 0.5).abs() < 1e-15);

        // Consistent slope recovers any chosen α.
        let target = -0.75f64;
        let spec = SystemSpec::second_order(0.0, 2.0, MultiPoly::zero(3), Boundary::slope_left((4.0 - target) / 2.0, 4.0))
            .unwrap();
        let s = initialize(&spec).unwrap();
        assert!((alpha_update(&spec, &s, &opts).unwrap() - target).abs() < 1e-15);
        assert!(gamma_update(&spec, &s, &opts).is_err());
    }

    #[test]
    fn free_particle_is_exact_after_one_step() {
        let spec = free(1.0, 5.0);
        let s1 = picard_step(&spec, &initialize(&spec).unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(s1.y().coeffs(), &[1.0, 2.0]);
        assert_eq!(s1.right_residual, 0.0);
        // Fixed point: another step changes nothing.
        let s2 = picard_step(&spec, &s1, &SolveOptions::default()).unwrap();
        assert_eq!(s2.states, s1.states);
        assert_eq!(s2.state_delta, 0.0);
    }

    #[test]
    fn free_particle_solve_stops_on_second_step() {
        let sol = solve(&free(0.0, 1.0), &SolveOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations_used, 2);
        assert_eq!(sol.unknown_trace, vec![0.5, 0.5]);
    }

    #[test]
    fn left_boundary_is_exact_on_every_iterate() {
        let spec = harmonic(FRAC_PI_4, 2f64.sqrt());
        let sol = solve(&spec, &SolveOptions::fixed(12)).unwrap();
        for it in &sol.history {
            assert_eq!(it.y().evaluate(0.0), 1.0);
        }
        assert!(!sol.converged);
        assert_eq!(sol.iterations_used, 12);
    }

    #[test]
    fn left_value_mode_converges() {
        // y'' = -y, y'(0) = 1, y(π/8) = cos + sin at π/8: α should approach 1.
        let b = FRAC_PI_8;
        let f = MultiPoly::variable(3, 1).neg();
        let spec = SystemSpec::second_order(0.0, b, f, Boundary::slope_left(1.0, b.cos() + b.sin())).unwrap();
        let sol = solve(&spec, &SolveOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.final_unknown() - 1.0).abs() < 1e-9);
        for it in &sol.history {
            assert_eq!(it.y().evaluate(0.0), it.unknown_value);
        }
    }

    #[test]
    fn divergence_is_reported() {
        // y'' = y^3 with far-apart boundary values blows up.
        let f = MultiPoly::variable(3, 1).pow(3).scale(50.0);
        let spec = SystemSpec::second_order(0.0, 3.0, f, Boundary::dirichlet(5.0, -5.0)).unwrap();
        let err = solve(&spec, &SolveOptions::fixed(40)).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err:?}");
    }

    #[test]
    fn prefix_mode_limits_degree() {
        let spec = harmonic(FRAC_PI_8, 1.3);
        let opts = SolveOptions {
            truncation_mode: TruncationMode::Prefix,
            ..SolveOptions::fixed(4)
        };
        let sol = solve(&spec, &opts).unwrap();
        for it in &sol.history {
            assert!(it.y().degree() <= it.k + 1);
        }
    }

    #[test]
    fn rejects_bad_options() {
        let spec = free(0.0, 1.0);
        let opts = SolveOptions {
            degree_cap: 1,
            ..SolveOptions::default()
        };
        assert!(matches!(solve(&spec, &opts), Err(Error::InvalidOptions(_))));
    }
}
