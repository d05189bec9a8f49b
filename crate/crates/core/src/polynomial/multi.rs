use std::collections::BTreeMap;
use std::fmt;

use super::Polynomial;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse multivariate polynomial over `(t, x₁, …, xₘ)`.
///
/// Variable 0 is time, variables `1..arity` are the states of a system.
/// No term has an exactly zero coefficient and exponent vectors are unique.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<T> {
    arity: usize,
    terms: BTreeMap<Vec<u32>, T>,
}

impl<T: Scalar> MultiPoly<T> {
    pub fn zero(arity: usize) -> Self {
        assert!(arity >= 1, "a MultiPoly needs at least the time variable");
        Self {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, value: T) -> Self {
        let mut p = Self::zero(arity);
        p.insert(vec![0; arity], value);
        p
    }

    /// The polynomial consisting of the single variable `var`.
    pub fn variable(arity: usize, var: usize) -> Self {
        assert!(var < arity, "variable {var} out of range for arity {arity}");
        let mut exps = vec![0; arity];
        exps[var] = 1;
        let mut p = Self::zero(arity);
        p.insert(exps, T::one());
        p
    }

    /// Builds from `(exponents, coefficient)` pairs, merging duplicates and
    /// dropping zero coefficients.
    pub fn from_terms<I>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, T)>,
    {
        let mut p = Self::zero(arity);
        for (exps, coef) in terms {
            if exps.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: exps.len(),
                });
            }
            if !coef.is_finite() {
                return Err(Error::NonFinite {
                    operation: "MultiPoly construction",
                });
            }
            p.insert(exps, coef);
        }
        Ok(p)
    }

    fn insert(&mut self, exps: Vec<u32>, coef: T) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(slot) => {
                if coef != T::zero() {
                    slot.insert(coef);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coef;
                if *slot.get() == T::zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], T)> + '_ {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// True if the variable `var` appears in some term.
    pub fn uses_variable(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e.get(var).is_some_and(|&k| k > 0))
    }

    /// True if this is exactly the single variable `var` with coefficient 1.
    pub fn is_projection_onto(&self, var: usize) -> bool {
        *self == Self::variable(self.arity, var)
    }

    /// Same polynomial viewed over more variables (new ones do not appear).
    pub fn with_arity(&self, arity: usize) -> Self {
        assert!(arity >= self.arity, "cannot shrink a MultiPoly");
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| {
                let mut e = e.clone();
                e.resize(arity, 0);
                (e, c)
            })
            .collect();
        Self { arity, terms }
    }

    fn same_arity(&self, other: &Self) -> Result<()> {
        if self.arity == other.arity {
            Ok(())
        } else {
            Err(Error::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_arity(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.insert(e.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, factor: T) -> Self {
        if factor == T::zero() {
            return Self::zero(self.arity);
        }
        let mut out = Self::zero(self.arity);
        for (e, &c) in &self.terms {
            out.insert(e.clone(), c * factor);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_arity(other)?;
        let mut out = Self::zero(self.arity);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.arity, T::one());
        for _ in 0..n {
            out = out.mul(self).expect("same arity");
        }
        out
    }

    pub fn partial_derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.arity);
        for (e, &c) in &self.terms {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut d = e.clone();
            d[var] = k - 1;
            out.insert(d, c * T::of_usize(k as usize));
        }
        out
    }

    /// Evaluates at `point = (t, x₁, …, xₘ)`.
    pub fn evaluate(&self, point: &[T]) -> T {
        debug_assert_eq!(point.len(), self.arity);
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .zip(point)
                    .fold(c, |acc, (&k, &x)| acc * x.powi(k as i32))
            })
            .fold(T::zero(), |acc, v| acc + v)
    }

    /// Substitutes `t` for variable 0 and `states[i-1]` for variable `i`.
    ///
    /// With `cap`, each intermediate product is truncated to that degree.
    pub fn compose(&self, states: &[Polynomial<T>], cap: Option<usize>) -> Result<Polynomial<T>> {
        if states.len() + 1 != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity - 1,
                got: states.len(),
            });
        }
        let base = match states.first() {
            Some(s) => s.basepoint(),
            None => T::zero(),
        };
        if let Some(bad) = states.iter().find(|s| s.basepoint() != base) {
            return Err(Error::BasepointMismatch {
                left: base.as_f64(),
                right: bad.basepoint().as_f64(),
            });
        }
        let clip = |p: Polynomial<T>| match cap {
            Some(c) => p.truncate(c),
            None => p,
        };

        // powers[v][k] = (variable v)^k, filled lazily.
        let mut powers: Vec<Vec<Polynomial<T>>> = (0..self.arity)
            .map(|v| {
                let x = if v == 0 {
                    Polynomial::identity(base)
                } else {
                    states[v - 1].clone()
                };
                vec![Polynomial::constant(base, T::one()), clip(x)]
            })
            .collect();

        let mut acc = Polynomial::zero(base);
        for (exps, &coef) in &self.terms {
            let mut term = Polynomial::constant(base, coef);
            for (v, &k) in exps.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let k = k as usize;
                while powers[v].len() <= k {
                    let next = powers[v]
                        .last()
                        .expect("nonempty")
                        .mul_capped(&powers[v][1], cap)?;
                    powers[v].push(next);
                }
                term = term.mul_capped(&powers[v][k], cap)?;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Renders with the given variable names (index 0 is time).
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        DisplayWith { poly: self, names }
    }
}

struct DisplayWith<'a, T> {
    poly: &'a MultiPoly<T>,
    names: &'a [String],
}

impl<T: Scalar> fmt::Display for DisplayWith<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.poly.terms().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (v, &k) in e.iter().enumerate() {
                let name = self.names.get(v).map_or("?", String::as_str);
                match k {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Display for MultiPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.arity)
            .map(|v| if v == 0 { "t".into() } else { format!("x{v}") })
            .collect();
        let shown = self.display_with(&names);
        write!(f, "{shown}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[f64]) -> Polynomial<f64> {
        Polynomial::new(0.0, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn compose_projection() {
        let f = MultiPoly::<f64>::variable(2, 1);
        let p = poly(&[1.0, -2.0, 3.0]);
        assert_eq!(f.compose(&[p.clone()], None).unwrap(), p);
    }

    #[test]
    fn compose_time_times_state() {
        let f = MultiPoly::variable(2, 0).mul(&MultiPoly::variable(2, 1)).unwrap();
        let r = f.compose(&[poly(&[1.0, 1.0])], None).unwrap();
        assert_eq!(r, poly(&[0.0, 1.0, 1.0]));
    }

    #[test]
    fn compose_product_of_states() {
        let f = MultiPoly::variable(3, 1).mul(&MultiPoly::variable(3, 2)).unwrap();
        let r = f.compose(&[poly(&[0.0, 1.0]), poly(&[1.0, -1.0])], None).unwrap();
        assert_eq!(r, poly(&[0.0, 1.0, -1.0]));
    }

    #[test]
    fn compose_in_shifted_basis_uses_identity_for_time() {
        // f = t at basepoint 2 is 2 + (t - 2).
        let f = MultiPoly::<f64>::variable(2, 0);
        let s = Polynomial::constant(2.0, 0.0);
        let r = f.compose(&[s], None).unwrap();
        assert_eq!(r.evaluate(3.5), 3.5);
    }

    #[test]
    fn compose_arity_mismatch() {
        let f = MultiPoly::<f64>::variable(3, 1);
        assert!(matches!(
            f.compose(&[poly(&[1.0])], None),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn compose_cap_applies_to_intermediate_products() {
        let f = MultiPoly::<f64>::variable(2, 1).pow(3);
        let r = f.compose(&[poly(&[0.0, 1.0])], Some(2)).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn zero_terms_are_dropped() {
        let x = MultiPoly::<f64>::variable(2, 1);
        let d = x.sub(&x).unwrap();
        assert!(d.is_zero());
        let m = MultiPoly::from_terms(2, vec![(vec![0, 1], 2.0), (vec![0, 1], -2.0), (vec![1, 0], 1.0)]).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn partial_derivative_and_evaluate() {
        // f = y*u/4 over (t, y, u)
        let f = MultiPoly::variable(3, 1)
            .mul(&MultiPoly::variable(3, 2))
            .unwrap()
            .scale(0.25);
        assert_eq!(f.partial_derivative(1).evaluate(&[0.0, 17.0, 9.0]), 2.25);
        assert_eq!(f.evaluate(&[0.0, 2.0, 4.0]), 2.0);
        assert!(f.partial_derivative(0).is_zero());
    }

    #[test]
    fn projection_check() {
        let u = MultiPoly::<f64>::variable(3, 2);
        assert!(u.is_projection_onto(2));
        assert!(!u.scale(2.0).is_projection_onto(2));
        assert!(!u.is_projection_onto(1));
    }
}
