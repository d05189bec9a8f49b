//! Sufficient-condition gates, the Maclaurin-prefix check and error reports.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::Trajectory;
use crate::picard::{ivp_iterates, Solution};
use crate::polynomial::sample_grid;
use crate::problem::{SystemSpec, Unknown, U, Y};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    SingleInterval,
    #[serde(rename = "Multi_h_le_1")]
    MultiHLe1,
    #[serde(rename = "Multi_h_ge_1")]
    MultiHGe1,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SingleInterval => "single",
            Regime::MultiHLe1 => "multi_h_le_1",
            Regime::MultiHGe1 => "multi_h_ge_1",
        }
    }
}

/// `passed == (lhs < bound)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateReport<T> {
    pub passed: bool,
    pub lhs: T,
    pub bound: T,
    pub regime: Regime,
}

impl<T: Scalar> GateReport<T> {
    fn new(lhs: T, bound: T, regime: Regime) -> Self {
        Self {
            passed: lhs < bound,
            lhs,
            bound,
            regime,
        }
    }
}

/// `n³ + n² + n + 2`.
fn cubic<T: Scalar>(n: usize) -> T {
    let n = T::of_usize(n);
    n * n * n + n * n + n + T::of(2.0)
}

/// Single interval: passes iff `b − a < 1/(1 + 1.5 L)`.
pub fn theorem1_gate<T: Scalar>(l: T, a: T, b: T) -> GateReport<T> {
    GateReport::new(b - a, T::one() / (T::one() + T::of(1.5) * l), Regime::SingleInterval)
}

/// `n` equal subintervals of width `h`. For `h ≤ 1` the gate quantity is
/// `[(n³+n²+n+2)L + 2](b−a)/(2n)`, otherwise `[(n³+n²+n+2)L + 2](b−a)²/(2n²)`;
/// either way it must stay below 1.
pub fn theorem_multi_gate<T: Scalar>(l: T, a: T, b: T, n: usize) -> GateReport<T> {
    let width = b - a;
    let nf = T::of_usize(n.max(1));
    let h = width / nf;
    let bracket = cubic::<T>(n) * l + T::of(2.0);
    let two = T::of(2.0);
    if h <= T::one() {
        GateReport::new(bracket * width / (two * nf), T::one(), Regime::MultiHLe1)
    } else {
        GateReport::new(bracket * width * width / (two * nf * nf), T::one(), Regime::MultiHGe1)
    }
}

/// Gate used for `n` subintervals: the single-interval gate for `n = 1`.
pub fn gate_for<T: Scalar>(l: T, a: T, b: T, n: usize) -> GateReport<T> {
    if n <= 1 {
        theorem1_gate(l, a, b)
    } else {
        theorem_multi_gate(l, a, b, n)
    }
}

/// Smallest `n` in `1..=n_max` whose gate passes.
pub fn min_subintervals<T: Scalar>(l: T, a: T, b: T, n_max: usize) -> Option<usize> {
    (1..=n_max).find(|&n| gate_for(l, a, b, n).passed)
}

/// Supremum of Lipschitz constants the gate for `n` accepts; may be `≤ 0`.
///
/// Inverts the same inequality [`gate_for`] evaluates, so the gate passes
/// exactly for `L` below the returned value.
pub fn max_lipschitz<T: Scalar>(a: T, b: T, n: usize) -> T {
    let width = b - a;
    let two = T::of(2.0);
    if n <= 1 {
        return two / T::of(3.0) * (T::one() / width - T::one());
    }
    let nf = T::of_usize(n);
    let h = width / nf;
    let lhs_scale = if h <= T::one() { two * nf / width } else { two * nf * nf / (width * width) };
    (lhs_scale - two) / cubic::<T>(n)
}

/// `(n³+n²−2n+2)/(n³+n²+n−1)`: the multi-interval gate improves on the
/// single-interval one for the same `L` iff `b − a` exceeds this ratio.
pub fn improvement_threshold<T: Scalar>(n: usize) -> T {
    let n = T::of_usize(n);
    let n2 = n * n;
    let n3 = n2 * n;
    (n3 + n2 - T::of(2.0) * n + T::of(2.0)) / (n3 + n2 + n - T::one())
}

/// Result of [`maclaurin_prefix_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrefixCheck<T> {
    pub passed: bool,
    /// Largest relative coefficient deviation (absolute where the reference is 0).
    pub max_deviation: T,
}

/// Relative tolerance per coefficient.
pub const PREFIX_TOL: f64 = 1e-10;

/// Compares coefficients `0..=k` of the `k`-th plain Picard iterate of the
/// initial value problem `y(a) = α`, `y'(a) = gamma` with `reference`.
pub fn maclaurin_prefix_check<T: Scalar>(
    spec: &SystemSpec<T>,
    gamma: T,
    k: usize,
    reference: &[T],
) -> Result<PrefixCheck<T>> {
    maclaurin_prefix_check_with(spec, gamma, k, reference, T::of(PREFIX_TOL))
}

pub fn maclaurin_prefix_check_with<T: Scalar>(
    spec: &SystemSpec<T>,
    gamma: T,
    k: usize,
    reference: &[T],
    tol: T,
) -> Result<PrefixCheck<T>> {
    if reference.len() < k + 1 {
        return Err(Error::InvalidOptions(format!(
            "reference needs at least {} coefficients, got {}",
            k + 1,
            reference.len()
        )));
    }
    let alpha = match spec.unknown {
        Unknown::Slope => spec.alpha().expect("slope mode"),
        Unknown::LeftValue => {
            return Err(Error::InvalidSystem("the prefix check needs y(a) given".into()));
        }
    };
    let coeffs: Vec<T> = if k == 0 {
        vec![alpha]
    } else {
        let cap = k.max(1) * 4 + 8;
        let iterates = ivp_iterates(spec, alpha, gamma, k, cap)?;
        iterates[k - 1][Y].coeffs().to_vec()
    };
    let max_deviation = reference[..=k]
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let c = coeffs.get(i).copied().unwrap_or_else(T::zero);
            let scale = if r == T::zero() { T::one() } else { r.abs() };
            (c - r).abs() / scale
        })
        .fold(T::zero(), T::max);
    Ok(PrefixCheck {
        passed: max_deviation <= tol,
        max_deviation,
    })
}

/// What an error report compares against.
pub enum Reference<'a, T> {
    /// A closed-form `y(t)` and, when known, the true value of the unknown.
    Exact {
        y: &'a dyn Fn(T) -> T,
        unknown: Option<T>,
    },
    /// An oracle trajectory, interpolated onto the sample grid.
    Trajectory(&'a Trajectory<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorRow<T> {
    pub k: usize,
    pub sup_error: T,
    pub unknown_error: Option<T>,
    pub right_residual: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport<T> {
    /// Sorted by `k`.
    pub rows: Vec<ErrorRow<T>>,
    pub samples: usize,
}

impl<T: Scalar> ErrorReport<T> {
    pub fn sup_errors(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }

    pub fn unknown_errors(&self) -> Option<Vec<T>> {
        self.rows.iter().map(|r| r.unknown_error).collect()
    }
}

/// One row per stored iterate of `sol`, sup errors on a `samples`-point grid over `[a, b]`.
pub fn error_report<T: Scalar>(
    spec: &SystemSpec<T>,
    sol: &Solution<T>,
    reference: Reference<'_, T>,
    samples: usize,
) -> Result<ErrorReport<T>> {
    if samples < 2 {
        return Err(Error::GridMismatch(format!("need at least 2 samples, got {samples}")));
    }
    let grid: Vec<T> = sample_grid(spec.a, spec.b, samples).collect();
    let (exact, unknown) = match &reference {
        Reference::Exact { y, unknown } => (grid.iter().map(|&t| y(t)).collect::<Vec<_>>(), *unknown),
        Reference::Trajectory(traj) => {
            if !traj.covers(spec.a, spec.b) {
                return Err(Error::GridMismatch(format!(
                    "reference trajectory does not cover [{}, {}]",
                    spec.a, spec.b
                )));
            }
            let values = grid
                .iter()
                .map(|&t| traj.y_at(t).ok_or_else(|| Error::GridMismatch(format!("no reference value at t = {t}"))))
                .collect::<Result<Vec<_>>>()?;
            let first = traj.first_state();
            let unknown = match sol.unknown {
                Unknown::Slope => first[U],
                Unknown::LeftValue => first[Y],
            };
            (values, Some(unknown))
        }
    };
    let rows = sol
        .history
        .iter()
        .map(|it| {
            let y = it.y();
            let sup_error = grid
                .iter()
                .zip(&exact)
                .map(|(&t, &e)| (y.evaluate(t) - e).abs())
                .fold(T::zero(), T::max);
            ErrorRow {
                k: it.k,
                sup_error,
                unknown_error: unknown.map(|g| (it.unknown_value - g).abs()),
                right_residual: it.right_residual,
            }
        })
        .collect();
    Ok(ErrorReport { rows, samples })
}
