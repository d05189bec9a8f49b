//! Auxiliary-variable rewriting of elementary right-hand sides.
//!
//! Each function node `F(g)` becomes a new state whose derivative is again
//! polynomial once `g' = ∂g/∂t + Σ ∂g/∂xᵢ · xᵢ'` is expanded:
//!
//! | node            | new states      | derivatives                    |
//! |-----------------|-----------------|--------------------------------|
//! | `exp(g)`        | `v`             | `v' = v·g'`                    |
//! | `sin(g)/cos(g)` | `v = sin, w = cos` | `v' = w·g'`, `w' = −v·g'`   |
//! | `1/g`           | `v`             | `v' = −v²·g'`                  |
//! | `ln(g)`         | `v`, `w = 1/g`  | `v' = w·g'`                    |
//!
//! Structurally identical nodes share one state.

use super::{AuxExpr, Boundary, Func, InitCondition, LeftBoundary, SystemSpec, U, Y};
use crate::error::{Error, Result};
use crate::polynomial::MultiPoly;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Exp,
    Trig,
    Recip,
    Ln,
}

struct Aux<T> {
    kind: Kind,
    arg_expr: AuxExpr<T>,
    arg: MultiPoly<T>,
    /// Trig owns `[sin, cos]`; Ln owns `[ln, reciprocal]`; others one state.
    states: Vec<usize>,
}

struct Builder<T> {
    num_states: usize,
    names: Vec<String>,
    inits: Vec<InitCondition<T>>,
    aux: Vec<Aux<T>>,
}

const NAME_POOL: [&str; 2] = ["v", "w"];

fn lift<T: Scalar>(p: MultiPoly<T>, arity: usize) -> MultiPoly<T> {
    if p.arity() == arity {
        p
    } else {
        p.with_arity(arity)
    }
}

impl<T: Scalar> Builder<T> {
    fn arity(&self) -> usize {
        self.num_states + 1
    }

    fn new_state(&mut self, init: AuxExpr<T>) -> usize {
        let index = self.num_states;
        let k = index - 2;
        let name = NAME_POOL
            .get(k)
            .map_or_else(|| format!("v{}", k + 1), |s| s.to_string());
        self.names.push(name);
        self.inits.push(InitCondition::Derived(init));
        self.num_states += 1;
        index
    }

    fn var(&self, state: usize) -> MultiPoly<T> {
        MultiPoly::variable(self.arity(), state + 1)
    }

    fn binary(
        &mut self,
        l: &AuxExpr<T>,
        r: &AuxExpr<T>,
        op: fn(&MultiPoly<T>, &MultiPoly<T>) -> Result<MultiPoly<T>>,
    ) -> Result<MultiPoly<T>> {
        let l = self.convert(l)?;
        let r = self.convert(r)?;
        let arity = self.arity();
        op(&lift(l, arity), &lift(r, arity))
    }

    fn convert(&mut self, e: &AuxExpr<T>) -> Result<MultiPoly<T>> {
        Ok(match e {
            AuxExpr::Const(c) => MultiPoly::constant(self.arity(), *c),
            AuxExpr::Time => MultiPoly::variable(self.arity(), 0),
            AuxExpr::State(i) if *i <= U => self.var(*i),
            AuxExpr::State(i) => {
                return Err(Error::InvalidSystem(format!(
                    "right-hand side references state {i}; only t, y and u are allowed"
                )))
            }
            AuxExpr::Neg(inner) => self.convert(inner)?.neg(),
            AuxExpr::Add(l, r) => self.binary(l, r, MultiPoly::add)?,
            AuxExpr::Sub(l, r) => self.binary(l, r, MultiPoly::sub)?,
            AuxExpr::Mul(l, r) => self.binary(l, r, MultiPoly::mul)?,
            AuxExpr::Pow(base, n) if *n >= 0 => self.convert(base)?.pow(*n as u32),
            AuxExpr::Pow(base, n) => {
                let recip = AuxExpr::apply(Func::Recip, (**base).clone());
                self.convert(&recip)?.pow(n.unsigned_abs())
            }
            AuxExpr::Func(func, arg) => self.function(*func, arg)?,
        })
    }

    fn function(&mut self, func: Func, arg: &AuxExpr<T>) -> Result<MultiPoly<T>> {
        let g = self.convert(arg)?;
        if g.total_degree() == 0 {
            let c = g.terms().next().map_or(T::zero(), |(_, c)| c);
            let value = func.apply(c).map_err(|reason| Error::Domain {
                state: format!("{}({c})", func.name()),
                reason,
            })?;
            return Ok(MultiPoly::constant(self.arity(), value));
        }
        let state = match func {
            Func::Exp => self.ensure(Kind::Exp, arg, g)?[0],
            Func::Sin => self.ensure(Kind::Trig, arg, g)?[0],
            Func::Cos => self.ensure(Kind::Trig, arg, g)?[1],
            Func::Recip => self.ensure(Kind::Recip, arg, g)?[0],
            Func::Ln => self.ensure(Kind::Ln, arg, g)?[0],
        };
        Ok(self.var(state))
    }

    fn ensure(&mut self, kind: Kind, arg_expr: &AuxExpr<T>, arg: MultiPoly<T>) -> Result<Vec<usize>> {
        if let Some(found) = self
            .aux
            .iter()
            .find(|a| a.kind == kind && a.arg_expr == *arg_expr)
        {
            return Ok(found.states.clone());
        }
        let node = |f: Func| AuxExpr::apply(f, arg_expr.clone());
        let states = match kind {
            Kind::Exp => vec![self.new_state(node(Func::Exp))],
            Kind::Recip => vec![self.new_state(node(Func::Recip))],
            Kind::Trig => {
                let s = self.new_state(node(Func::Sin));
                let c = self.new_state(node(Func::Cos));
                vec![s, c]
            }
            Kind::Ln => {
                let recip = self.ensure(Kind::Recip, arg_expr, arg.clone())?[0];
                let v = self.new_state(node(Func::Ln));
                vec![v, recip]
            }
        };
        self.aux.push(Aux {
            kind,
            arg_expr: arg_expr.clone(),
            arg,
            states: states.clone(),
        });
        Ok(states)
    }

    /// Right-hand sides for every state once `u' = f` is known.
    fn close(self, f: MultiPoly<T>) -> Result<(Vec<String>, Vec<MultiPoly<T>>, Vec<InitCondition<T>>)> {
        let arity = self.arity();
        let n = self.num_states;
        let var = |s: usize| MultiPoly::variable(arity, s + 1);
        let mut rhs: Vec<Option<MultiPoly<T>>> = vec![None; n];
        rhs[Y] = Some(var(U));
        rhs[U] = Some(lift(f, arity));

        for aux in &self.aux {
            let g = lift(aux.arg.clone(), arity);
            // Derivative of the argument along the flow.
            let mut dg = g.partial_derivative(0);
            for s in 0..n {
                if !g.uses_variable(s + 1) {
                    continue;
                }
                let ds = rhs[s].as_ref().ok_or_else(|| {
                    Error::CyclicDefinition(format!(
                        "argument of {:?} node depends on state {s} before it is defined",
                        aux.kind
                    ))
                })?;
                dg = dg.add(&g.partial_derivative(s + 1).mul(ds)?)?;
            }
            match aux.kind {
                Kind::Exp => {
                    let v = aux.states[0];
                    rhs[v] = Some(var(v).mul(&dg)?);
                }
                Kind::Trig => {
                    let (s, c) = (aux.states[0], aux.states[1]);
                    rhs[s] = Some(var(c).mul(&dg)?);
                    rhs[c] = Some(var(s).mul(&dg)?.neg());
                }
                Kind::Recip => {
                    let v = aux.states[0];
                    rhs[v] = Some(var(v).pow(2).mul(&dg)?.neg());
                }
                Kind::Ln => {
                    let (v, w) = (aux.states[0], aux.states[1]);
                    rhs[v] = Some(var(w).mul(&dg)?);
                }
            }
        }
        let rhs = rhs
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::CyclicDefinition(format!("state {i} has no equation"))))
            .collect::<Result<Vec<_>>>()?;
        Ok((self.names, rhs, self.inits))
    }
}

/// Rewrites `y'' = rhs_expr(t, y, u)` as a first-order polynomial system.
///
/// Already-polynomial right-hand sides yield the plain two-state system.
pub fn polynomialize<T: Scalar>(
    a: T,
    b: T,
    rhs_expr: &AuxExpr<T>,
    boundary: Boundary<T>,
) -> Result<SystemSpec<T>> {
    let (y0, u0) = match boundary.left {
        LeftBoundary::Value(alpha) => (InitCondition::Known(alpha), InitCondition::Unknown),
        LeftBoundary::Slope(gamma) => (InitCondition::Unknown, InitCondition::Known(gamma)),
    };
    let mut builder = Builder {
        num_states: 2,
        names: vec!["y".into(), "u".into()],
        inits: vec![y0, u0],
        aux: Vec::new(),
    };
    let f = builder.convert(rhs_expr)?;
    let (state_names, rhs, init) = builder.close(f)?;
    let spec = SystemSpec {
        a,
        b,
        state_names,
        rhs,
        init,
        beta: boundary.right,
        unknown: boundary.unknown(),
    };
    spec.check()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_rhs;

    fn mp(arity: usize, terms: &[(&[u32], f64)]) -> MultiPoly<f64> {
        MultiPoly::from_terms(arity, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn sine_becomes_four_state_system() {
        let b = std::f64::consts::FRAC_PI_8;
        let spec = polynomialize(0.0, b, &parse_rhs("sin(y)").unwrap(), Boundary::dirichlet(0.0, 1.0)).unwrap();
        assert_eq!(spec.num_states(), 4);
        // variables: t, y, u, v, w
        assert_eq!(spec.rhs[0], mp(5, &[(&[0, 0, 1, 0, 0], 1.0)]));
        assert_eq!(spec.rhs[1], mp(5, &[(&[0, 0, 0, 1, 0], 1.0)]));
        assert_eq!(spec.rhs[2], mp(5, &[(&[0, 0, 1, 0, 1], 1.0)]));
        assert_eq!(spec.rhs[3], mp(5, &[(&[0, 0, 1, 1, 0], -1.0)]));
        assert_eq!(spec.derived_inits(0.0, 0.3).unwrap(), vec![0.0, 0.3, 0.0, 1.0]);
    }

    #[test]
    fn exponential_becomes_three_state_system() {
        let beta = 1.2f64.cos().ln();
        let spec = polynomialize(0.0, 1.2, &parse_rhs("-exp(-2*y)").unwrap(), Boundary::dirichlet(0.0, beta)).unwrap();
        assert_eq!(spec.num_states(), 3);
        assert_eq!(spec.rhs[1], mp(4, &[(&[0, 0, 0, 1], -1.0)]));
        assert_eq!(spec.rhs[2], mp(4, &[(&[0, 0, 1, 1], -2.0)]));
        assert_eq!(spec.derived_inits(0.0, 0.0).unwrap()[2], 1.0);
        let v = spec.derived_inits(2f64.ln(), 0.0).unwrap()[2];
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn polynomial_input_is_unchanged() {
        let e = parse_rhs("16 + (3 - 2*t)^3 + 0.25*y*u").unwrap();
        let spec = polynomialize(0.0, 1.0, &e, Boundary::dirichlet(43.0 / 3.0, 17.0)).unwrap();
        assert_eq!(spec.num_states(), 2);
        let f = spec.rhs[1].clone();
        let direct = SystemSpec::second_order(0.0, 1.0, f, Boundary::dirichlet(43.0 / 3.0, 17.0)).unwrap();
        assert_eq!(spec, direct);
        // f(1, 2, 4) = 16 + 1 + 2
        assert_eq!(spec.rhs[1].evaluate(&[1.0, 2.0, 4.0]), 19.0);
    }

    #[test]
    fn shared_subexpressions_use_one_state() {
        let e = parse_rhs("sin(y) + cos(y) + exp(u) * exp(u)").unwrap();
        let spec = polynomialize(0.0, 1.0, &e, Boundary::dirichlet(0.0, 0.0)).unwrap();
        assert_eq!(spec.num_states(), 5);
    }

    #[test]
    fn log_introduces_reciprocal() {
        let e = parse_rhs::<f64>("ln(1 + y^2)").unwrap();
        let spec = polynomialize(0.0, 1.0, &e, Boundary::dirichlet(1.0, 2.0)).unwrap();
        assert_eq!(spec.num_states(), 4);
        let inits = spec.derived_inits(1.0, 0.5).unwrap();
        assert!((inits[2] - 0.5).abs() < 1e-15); // 1/(1+y²)
        assert!((inits[3] - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn constant_function_nodes_fold() {
        let e = parse_rhs("exp(0) * y + cos(pi)").unwrap();
        let spec = polynomialize(0.0, 1.0, &e, Boundary::dirichlet(0.0, 0.0)).unwrap();
        assert_eq!(spec.num_states(), 2);
        assert_eq!(spec.rhs[1].evaluate(&[0.0, 2.0, 0.0]), 1.0);
    }

    #[test]
    fn domain_violation_in_derived_init() {
        let e = parse_rhs("ln(y)").unwrap();
        let spec = polynomialize(0.0, 1.0, &e, Boundary::dirichlet(1.0, 2.0)).unwrap();
        let err = spec.derived_inits(-1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }), "{err:?}");
    }

    #[test]
    fn slope_boundary_gives_left_value_mode() {
        let e = parse_rhs("-y").unwrap();
        let spec = polynomialize(0.0, 1.0, &e, Boundary::slope_left(1.0, 2.0)).unwrap();
        assert_eq!(spec.unknown, super::super::Unknown::LeftValue);
        assert_eq!(spec.gamma(), Some(1.0));
        assert_eq!(spec.alpha(), None);
    }
}
