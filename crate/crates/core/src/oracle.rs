//! Reference solver for validation: classical RK4 with a fixed step, plus
//! bisection shooting on the unknown initial value. The Picard solvers never
//! call into this module.

use crate::error::{Error, Result};
use crate::problem::{SystemSpec, Unknown, U, Y};
use crate::scalar::Scalar;

/// Default step as a fraction of `b − a`.
pub const DEFAULT_STEP_FRACTION: f64 = 1e-4;

/// Bisection halvings before giving up on reaching `tol`.
const MAX_BISECTIONS: usize = 200;

pub fn default_step<T: Scalar>(spec: &SystemSpec<T>) -> T {
    spec.width() * T::of(DEFAULT_STEP_FRACTION)
}

/// Sampled solution of the full state system.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    /// Strictly increasing.
    pub times: Vec<T>,
    /// One state vector per time.
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_state(&self) -> &[T] {
        &self.values[0]
    }

    pub fn last_state(&self) -> &[T] {
        self.values.last().expect("non-empty trajectory")
    }

    pub fn covers(&self, a: T, b: T) -> bool {
        let slack = (b - a).abs() * T::of(1e-12);
        !self.is_empty() && self.times[0] <= a + slack && *self.times.last().unwrap() >= b - slack
    }

    /// `y(t)` by cubic Hermite interpolation using `y' = u`; `None` outside the time range.
    pub fn y_at(&self, t: T) -> Option<T> {
        let n = self.times.len();
        if n == 0 {
            return None;
        }
        let slack = (self.times[n - 1] - self.times[0]).abs() * T::of(1e-12);
        if t < self.times[0] - slack || t > self.times[n - 1] + slack {
            return None;
        }
        if n == 1 {
            return Some(self.values[0][Y]);
        }
        let i = match self.times.binary_search_by(|x| x.partial_cmp(&t).expect("finite times")) {
            Ok(i) => return Some(self.values[i][Y]),
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1) = (self.values[i][Y], self.values[i + 1][Y]);
        let (d0, d1) = (self.values[i][U] * h, self.values[i + 1][U] * h);
        let one = T::one();
        let two = T::of(2.0);
        let three = T::of(3.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + one;
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        Some(h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1)
    }
}

fn derivative<T: Scalar>(spec: &SystemSpec<T>, t: T, x: &[T], point: &mut Vec<T>, out: &mut [T]) {
    point.clear();
    point.push(t);
    point.extend_from_slice(x);
    for (o, g) in out.iter_mut().zip(&spec.rhs) {
        *o = g.evaluate(point);
    }
}

/// Integrates the state system from `a` to `b` with `y(a) = alpha`, `u(a) = gamma`.
/// The step is shrunk slightly if needed so that it divides `b − a`.
pub fn integrate_ivp<T: Scalar>(spec: &SystemSpec<T>, alpha: T, gamma: T, step: T) -> Result<Trajectory<T>> {
    spec.check()?;
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::InvalidOptions("oracle step must be positive".into()));
    }
    let width = spec.width();
    let steps = (width / step - T::of(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    let h = width / T::of_usize(steps);
    let half = h / T::of(2.0);
    let sixth = h / T::of(6.0);
    let two = T::of(2.0);

    let dim = spec.num_states();
    let mut x = spec.derived_inits(alpha, gamma)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(spec.a);
    values.push(x.clone());

    let mut point = Vec::with_capacity(dim + 1);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![T::zero(); dim], vec![T::zero(); dim], vec![T::zero(); dim], vec![T::zero(); dim]);
    let mut tmp = vec![T::zero(); dim];
    for i in 0..steps {
        let t = spec.a + h * T::of_usize(i);
        derivative(spec, t, &x, &mut point, &mut k1);
        for d in 0..dim {
            tmp[d] = x[d] + half * k1[d];
        }
        derivative(spec, t + half, &tmp, &mut point, &mut k2);
        for d in 0..dim {
            tmp[d] = x[d] + half * k2[d];
        }
        derivative(spec, t + half, &tmp, &mut point, &mut k3);
        for d in 0..dim {
            tmp[d] = x[d] + h * k3[d];
        }
        derivative(spec, t + h, &tmp, &mut point, &mut k4);
        for d in 0..dim {
            x[d] += sixth * (k1[d] + two * k2[d] + two * k3[d] + k4[d]);
        }
        let t_next = if i + 1 == steps { spec.b } else { spec.a + h * T::of_usize(i + 1) };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::OracleDivergence { time: t_next.as_f64() });
        }
        times.push(t_next);
        values.push(x.clone());
    }
    Ok(Trajectory { times, values })
}

/// Trajectory for a given value of the problem's unknown (`γ` or `α`).
pub fn trajectory_for<T: Scalar>(spec: &SystemSpec<T>, unknown: T, step: T) -> Result<Trajectory<T>> {
    match spec.unknown {
        Unknown::Slope => integrate_ivp(spec, spec.alpha().expect("slope mode"), unknown, step),
        Unknown::LeftValue => integrate_ivp(spec, unknown, spec.gamma().expect("left-value mode"), step),
    }
}

/// Bisects on the unknown initial value until `|y(b) − β| < tol`.
/// Returns the unknown and its trajectory.
pub fn shooting_solve<T: Scalar>(
    spec: &SystemSpec<T>,
    lo: T,
    hi: T,
    tol: T,
    step: T,
) -> Result<(T, Trajectory<T>)> {
    let shoot = |g: T| -> Result<(T, Trajectory<T>)> {
        let traj = trajectory_for(spec, g, step)?;
        let r = traj.last_state()[Y] - spec.beta;
        Ok((r, traj))
    };
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (r_lo, traj_lo) = shoot(lo)?;
    if r_lo.abs() < tol {
        return Ok((lo, traj_lo));
    }
    let (r_hi, traj_hi) = shoot(hi)?;
    if r_hi.abs() < tol {
        return Ok((hi, traj_hi));
    }
    if r_lo.signum() == r_hi.signum() {
        return Err(Error::Bracketing {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let lo_sign = r_lo.signum();
    let mut best = if r_lo.abs() < r_hi.abs() { (r_lo.abs(), lo, traj_lo) } else { (r_hi.abs(), hi, traj_hi) };
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + (hi - lo) / T::of(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let (r, traj) = shoot(mid)?;
        if r.abs() < tol {
            return Ok((mid, traj));
        }
        if r.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        if r.abs() < best.0 {
            best = (r.abs(), mid, traj);
        }
    }
    Ok((best.1, best.2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::MultiPoly;
    use crate::problem::{parse_rhs, polynomialize, Boundary};
    use std::f64::consts::FRAC_PI_4;

    fn harmonic() -> SystemSpec<f64> {
        let f = MultiPoly::variable(3, 1).neg();
        SystemSpec::second_order(0.0, FRAC_PI_4, f, Boundary::dirichlet(1.0, 2f64.sqrt())).unwrap()
    }

    #[test]
    fn free_particle() {
        let spec = SystemSpec::second_order(0.0, 1.0, MultiPoly::zero(3), Boundary::dirichlet(0.0, 1.0)).unwrap();
        let traj: Trajectory<f64> = integrate_ivp(&spec, 0.0, 1.0, 1e-3).unwrap();
        for (t, x) in traj.times.iter().zip(&traj.values) {
            assert!((x[Y] - t).abs() < 1e-12);
        }
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        let (g, _): (f64, _) = shooting_solve(&spec, 0.0, 3.0, 1e-12, 1e-2).unwrap();
        assert!((g - 1.0).abs() < 1e-10);
    }

    #[test]
    fn harmonic_endpoint() {
        let traj = integrate_ivp(&harmonic(), 1.0, 1.0, 1e-4).unwrap();
        assert!((traj.last_state()[Y] - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_convergence() {
        // At t = π/4 the leading error term vanishes (y' = 0 there), so use t = 1.
        let f = MultiPoly::variable(3, 1).neg();
        let exact = 1f64.cos() + 1f64.sin();
        let spec = SystemSpec::second_order(0.0, 1.0, f, Boundary::dirichlet(1.0, exact)).unwrap();
        let err = |step: f64| (integrate_ivp(&spec, 1.0, 1.0, step).unwrap().last_state()[Y] - exact).abs();
        let ratio = err(0.05) / err(0.025);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn sin_state_tracks_sin_y() {
        let spec = polynomialize(0.0, 1.0, &parse_rhs("-sin(y)").unwrap(), Boundary::dirichlet(0.3, 0.5)).unwrap();
        let traj: Trajectory<f64> = integrate_ivp(&spec, 0.3, 0.8, 1e-3).unwrap();
        for x in &traj.values {
            assert!((x[2] - x[Y].sin()).abs() < 1e-8);
            assert!((x[2] * x[2] + x[3] * x[3] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn bracket_independence_and_errors() {
        let spec = harmonic();
        let (g1, _) = shooting_solve(&spec, -5.0, 5.0, 1e-11, 1e-3).unwrap();
        let (g2, _) = shooting_solve(&spec, 0.5, 1.7, 1e-11, 1e-3).unwrap();
        assert!((g1 - g2).abs() < 1e-9);
        assert!((g1 - 1.0).abs() < 1e-8);
        assert!(matches!(
            shooting_solve(&spec, 2.0, 3.0, 1e-10, 1e-3),
            Err(Error::Bracketing { .. })
        ));
    }

    #[test]
    fn hermite_interpolation() {
        let traj = integrate_ivp(&harmonic(), 1.0, 1.0, 1e-2).unwrap();
        let t = 0.123456;
        assert!((traj.y_at(t).unwrap() - (t.cos() + t.sin())).abs() < 1e-9);
        assert!(traj.y_at(2.0).is_none());
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = u, u' = u² blows up at t = 1 for u(0) = 1.
        let f = MultiPoly::variable(3, 2).pow(2);
        let spec = SystemSpec::second_order(0.0, 2.0, f, Boundary::dirichlet(0.0, 0.0)).unwrap();
        assert!(matches!(integrate_ivp(&spec, 0.0, 1.0, 1e-3), Err(Error::OracleDivergence { .. })));
    }
}
