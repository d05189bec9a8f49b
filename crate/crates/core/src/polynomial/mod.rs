//! Dense univariate polynomials in a shifted monomial basis.
//!
//! A [`Polynomial`] stores coefficients `c[i]` multiplying `(t - basepoint)^i`.
//! Every iterate of the solvers is one of these, so all quadratures in the
//! recursions reduce to closed-form antiderivatives.
//!
//! Values are immutable; every operation returns a fresh polynomial in
//! canonical form (no trailing exact zeros, the zero polynomial is `[0]`).

mod multi;

pub use multi::MultiPoly;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default number of grid points for sampled sup norms.
pub const DEFAULT_SAMPLES: usize = 201;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    basepoint: T,
    coeffs: Vec<T>,
}

fn trim<T: Scalar>(coeffs: &mut Vec<T>) {
    while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == T::zero() {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        coeffs.push(T::zero());
    }
}

impl<T: Scalar> Polynomial<T> {
    /// Builds a polynomial from coefficients of `(t - basepoint)^i`.
    ///
    /// Fails if the basepoint or any coefficient is NaN or infinite.
    pub fn new(basepoint: T, coeffs: Vec<T>) -> Result<Self> {
        Self::checked(basepoint, coeffs, "construction")
    }

    fn checked(basepoint: T, mut coeffs: Vec<T>, operation: &'static str) -> Result<Self> {
        if !basepoint.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { operation });
        }
        trim(&mut coeffs);
        Ok(Self { basepoint, coeffs })
    }

    pub fn zero(basepoint: T) -> Self {
        Self {
            basepoint,
            coeffs: vec![T::zero()],
        }
    }

    pub fn constant(basepoint: T, value: T) -> Self {
        Self {
            basepoint,
            coeffs: vec![value],
        }
    }

    /// The polynomial `t`, written as `basepoint + (t - basepoint)`.
    pub fn identity(basepoint: T) -> Self {
        Self {
            basepoint,
            coeffs: vec![basepoint, T::one()],
        }
        .canonical()
    }

    fn canonical(mut self) -> Self {
        trim(&mut self.coeffs);
        self
    }

    pub fn basepoint(&self) -> T {
        self.basepoint
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `(t - basepoint)^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).copied().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == T::zero()
    }

    fn same_base(&self, other: &Self) -> Result<()> {
        if self.basepoint == other.basepoint {
            Ok(())
        } else {
            Err(Error::BasepointMismatch {
                left: self.basepoint.as_f64(),
                right: other.basepoint.as_f64(),
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Self::checked(self.basepoint, coeffs, "add")
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Self::checked(self.basepoint, coeffs, "sub")
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_capped(other, None)
    }

    /// Convolution product, dropping every term above `cap` when one is given.
    pub fn mul_capped(&self, other: &Self, cap: Option<usize>) -> Result<Self> {
        self.same_base(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.basepoint));
        }
        let full = self.degree() + other.degree();
        let top = cap.map_or(full, |c| c.min(full));
        let mut coeffs = vec![T::zero(); top + 1];
        for (i, &p) in self.coeffs.iter().enumerate().take(top + 1) {
            if p == T::zero() {
                continue;
            }
            for (j, &q) in other.coeffs.iter().enumerate().take(top + 1 - i) {
                coeffs[i + j] += p * q;
            }
        }
        Self::checked(self.basepoint, coeffs, "mul")
    }

    pub fn scale(&self, factor: T) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|&c| c * factor).collect();
        Self::checked(self.basepoint, coeffs, "scale")
    }

    pub fn neg(&self) -> Self {
        Self {
            basepoint: self.basepoint,
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
        .canonical()
    }

    /// Adds a constant to the polynomial.
    pub fn shift_by(&self, value: T) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += value;
        Self::checked(self.basepoint, coeffs, "add")
    }

    /// Antiderivative `P` with `P' = self` and `P(lower) = 0`.
    pub fn antiderivative(&self, lower: T) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / T::of_usize(i + 1));
        }
        let mut p = Self::checked(self.basepoint, coeffs, "antiderivative")?;
        if lower != self.basepoint {
            let offset = p.evaluate(lower);
            p.coeffs[0] = -offset;
            p = Self::checked(p.basepoint, p.coeffs, "antiderivative")?;
        }
        Ok(p)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(self.basepoint);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * T::of_usize(i))
            .collect();
        Self {
            basepoint: self.basepoint,
            coeffs,
        }
        .canonical()
    }

    /// Exact integral of the polynomial over `[a, b]`.
    pub fn definite_integral(&self, a: T, b: T) -> T {
        // Antiderivative anchored at the basepoint, evaluated at both ends.
        let upper = self.primitive_at(b);
        let lower = self.primitive_at(a);
        upper - lower
    }

    fn primitive_at(&self, t: T) -> T {
        let x = t - self.basepoint;
        let mut acc = T::zero();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * x + c / T::of_usize(i + 1);
        }
        acc * x
    }

    /// `∫ₐᵇ (b − s)·p(s) ds`, via one multiply and one quadrature.
    pub fn weighted_integral(&self, a: T, b: T) -> T {
        let kernel = Self {
            basepoint: self.basepoint,
            coeffs: vec![b - self.basepoint, -T::one()],
        }
        .canonical();
        match self.mul(&kernel) {
            Ok(p) => p.definite_integral(a, b),
            Err(_) => T::nan(),
        }
    }

    /// Horner evaluation in the shifted variable.
    pub fn evaluate(&self, t: T) -> T {
        let x = t - self.basepoint;
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    /// Drops every coefficient of index greater than `maxdeg`.
    pub fn truncate(&self, maxdeg: usize) -> Self {
        let keep = (maxdeg + 1).min(self.coeffs.len());
        Self {
            basepoint: self.basepoint,
            coeffs: self.coeffs[..keep].to_vec(),
        }
        .canonical()
    }

    /// Maximum of `|p|` on `samples` equally spaced points of `[a, b]`,
    /// endpoints included. A lower bound on the true sup norm.
    pub fn sup_norm_estimate(&self, a: T, b: T, samples: usize) -> T {
        sample_grid(a, b, samples)
            .map(|t| self.evaluate(t).abs())
            .fold(T::zero(), T::max)
    }
}

/// `samples` equally spaced points on `[a, b]`; the last point is exactly `b`.
pub fn sample_grid<T: Scalar>(a: T, b: T, samples: usize) -> impl Iterator<Item = T> {
    let samples = samples.max(2);
    let last = samples - 1;
    let step = (b - a) / T::of_usize(last);
    (0..samples).map(move |i| {
        if i == last {
            b
        } else {
            a + step * T::of_usize(i)
        }
    })
}

/// Sampled sup norm of `p - q` on `[a, b]`, without forming the difference.
pub fn sup_distance<T: Scalar>(p: &Polynomial<T>, q: &Polynomial<T>, a: T, b: T, samples: usize) -> T {
    sample_grid(a, b, samples)
        .map(|t| (p.evaluate(t) - q.evaluate(t)).abs())
        .fold(T::zero(), T::max)
}

/// Univariate polynomial obtained by substituting `states` into `f`.
///
/// Variable 0 of `f` is replaced by `t`; variable `i > 0` by `states[i - 1]`.
/// When `cap` is given every intermediate product is truncated to that degree.
pub fn compose_system<T: Scalar>(
    f: &MultiPoly<T>,
    states: &[Polynomial<T>],
    cap: Option<usize>,
) -> Result<Polynomial<T>> {
    f.compose(states, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[f64]) -> Polynomial<f64> {
        Polynomial::new(0.0, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(p(&[1.0, 1.0]).add(&p(&[2.0, -1.0])).unwrap(), p(&[3.0]));
        let q = p(&[1.0, 2.0, 3.0]);
        assert_eq!(q.add(&Polynomial::zero(0.0)).unwrap(), q);
        assert_eq!(p(&[0.0, 0.0, 1.0]).add(&p(&[0.0, 1.0])).unwrap(), p(&[0.0, 1.0, 1.0]));
    }

    #[test]
    fn add_rejects_mismatched_basepoints() {
        let q = Polynomial::new(1.0, vec![1.0]).unwrap();
        assert!(matches!(
            p(&[1.0]).add(&q),
            Err(Error::BasepointMismatch { .. })
        ));
        assert!(p(&[1.0]).mul(&q).is_err());
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p(&[1.0, 1.0]).mul(&p(&[1.0, -1.0])).unwrap(), p(&[1.0, 0.0, -1.0]));
        let q = p(&[4.0, -2.0, 0.5]);
        assert_eq!(q.mul(&p(&[1.0])).unwrap(), q);
        assert_eq!(p(&[0.0, 1.0]).mul(&p(&[0.0, 1.0])).unwrap(), p(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn mul_capped_drops_high_terms() {
        let q = p(&[1.0, 1.0]);
        let r = q.mul_capped(&q, Some(1)).unwrap();
        assert_eq!(r, p(&[1.0, 2.0]));
    }

    #[test]
    fn canonical_form() {
        assert_eq!(p(&[0.0, 0.0, 0.0]).coeffs(), &[0.0]);
        assert!(p(&[]).is_zero());
        assert_eq!(p(&[1.0, 2.0, 0.0]).degree(), 1);
        assert!(Polynomial::new(0.0, vec![f64::NAN]).is_err());
        assert!(Polynomial::new(0.0, vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(p(&[1.0]).antiderivative(0.0).unwrap(), p(&[0.0, 1.0]));
        assert_eq!(p(&[0.0, 2.0]).antiderivative(0.0).unwrap(), p(&[0.0, 0.0, 1.0]));
        assert_eq!(p(&[1.0]).antiderivative(1.0).unwrap(), p(&[-1.0, 1.0]));
    }

    #[test]
    fn antiderivative_overflow_is_reported() {
        let huge = p(&[f64::MAX, f64::MAX]);
        assert!(huge.antiderivative(-10.0).is_err());
    }

    #[test]
    fn definite_integral_examples() {
        assert_eq!(p(&[1.0]).definite_integral(0.0, 1.0), 1.0);
        assert_eq!(p(&[0.0, 1.0]).definite_integral(0.0, 1.0), 0.5);
        let e = std::f64::consts::FRAC_PI_8;
        let q = p(&[e, -1.0]);
        let expected = std::f64::consts::PI.powi(2) / 128.0;
        assert!((q.definite_integral(0.0, e) - expected).abs() < 1e-15);
        assert!((expected - 0.0771063).abs() < 1e-7);
    }

    #[test]
    fn weighted_integral_examples() {
        assert_eq!(Polynomial::zero(0.0).weighted_integral(0.0, 1.0), 0.0);
        assert!((p(&[1.0]).weighted_integral(0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((p(&[0.0, 1.0]).weighted_integral(0.0, 1.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(p(&[1.0, 0.0, 1.0]).evaluate(2.0), 5.0);
        assert_eq!(Polynomial::zero(0.0).evaluate(123.0), 0.0);
        let shifted = Polynomial::new(1.0, vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(shifted.evaluate(3.0), 4.0);
    }

    #[test]
    fn truncate_examples() {
        assert_eq!(p(&[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]).truncate(2), p(&[1.0, 1.0]));
        let q = p(&[1.0, 2.0, 3.0]);
        assert_eq!(q.truncate(q.degree()), q);
        assert!(p(&[0.0, 0.0, 0.0, 1.0]).truncate(2).is_zero());
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(p(&[-3.5]).sup_norm_estimate(0.0, 1.0, 11), 3.5);
        assert_eq!(p(&[0.0, 1.0]).sup_norm_estimate(0.0, 1.0, 101), 1.0);
        let bump = p(&[0.0, 1.0, -1.0]);
        assert!((bump.sup_norm_estimate(0.0, 1.0, 101) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_in_shifted_basis() {
        let t = Polynomial::identity(2.0);
        assert_eq!(t.coeffs(), &[2.0, 1.0]);
        assert_eq!(t.evaluate(5.0), 5.0);
    }

    #[test]
    fn works_in_single_precision() {
        let q = Polynomial::<f32>::new(0.0, vec![1.0, 1.0]).unwrap();
        let r = q.mul(&q).unwrap().antiderivative(0.0).unwrap();
        assert!((r.evaluate(1.0) - 7.0 / 3.0).abs() < 1e-6);
    }
}
