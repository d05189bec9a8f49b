//! JSON problem files.
//!
//! ```json
//! {
//!   "interval": [0, 0.7853981633974483],
//!   "equation": { "expr": "-y" },
//!   "boundary": {
//!     "left":  { "kind": "value", "value": 1 },
//!     "right": { "kind": "value", "value": 1.4142135623730951 }
//!   },
//!   "exact": "cos(t) + sin(t)"
//! }
//! ```
//!
//! `equation` may instead be an explicit polynomial system:
//! `{ "system": { "states": [...], "rhs": [{"terms": [{"coef": r, "powers": {"y": 1}}]}], "init": [...] } }`.
//! Init entries are `{"kind": "value", "value": r}`, `{"kind": "unknown"}`,
//! `{"kind": "derived", "expr": "..."}` or `{"kind": "boundary"}`; the entries for
//! the first two states are always taken from the boundary data.
//! `exact` (a closed form in `t`) and `lipschitz_box` (bounds per state name) are optional.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    parse_rhs, parse_with_states, polynomialize, AuxExpr, Boundary, InitCondition, LeftBoundary,
    SystemSpec, U, Y,
};
use crate::error::{Error, Result};
use crate::polynomial::MultiPoly;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub interval: [f64; 2],
    pub equation: Equation,
    pub boundary: BoundarySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_box: Option<BTreeMap<String, [f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Expr(String),
    System(SystemSection),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSection {
    pub states: Vec<String>,
    pub rhs: Vec<TermList>,
    pub init: Vec<InitSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermList {
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    #[serde(default)]
    pub powers: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitSpec {
    Value { value: f64 },
    Unknown,
    Derived { expr: String },
    Boundary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub left: LeftSpec,
    pub right: RightSpec,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LeftSpec {
    Value { value: f64 },
    Slope { value: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RightSpec {
    Value { value: f64 },
}

fn nested_parse_error(context: &str, err: Error) -> Error {
    match err {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{context}: {message}"),
        },
        other => other,
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ProblemFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn boundary(&self) -> Boundary<f64> {
        let right = match self.boundary.right {
            RightSpec::Value { value } => value,
        };
        match self.boundary.left {
            LeftSpec::Value { value } => Boundary::dirichlet(value, right),
            LeftSpec::Slope { value } => Boundary::slope_left(value, right),
        }
    }

    /// Builds the polynomial system, polynomializing an `expr` equation.
    pub fn to_spec(&self) -> Result<SystemSpec<f64>> {
        let [a, b] = self.interval;
        let boundary = self.boundary();
        match &self.equation {
            Equation::Expr(src) => {
                let e = parse_rhs::<f64>(src).map_err(|e| nested_parse_error("equation.expr", e))?;
                polynomialize(a, b, &e, boundary)
            }
            Equation::System(sys) => self.system_spec(sys, boundary),
        }
    }

    fn system_spec(&self, sys: &SystemSection, boundary: Boundary<f64>) -> Result<SystemSpec<f64>> {
        let [a, b] = self.interval;
        let n = sys.states.len();
        if n < 2 || sys.rhs.len() != n || sys.init.len() != n {
            return Err(Error::ProblemFile(format!(
                "system needs matching states/rhs/init lists of length ≥ 2 (got {}, {}, {})",
                n,
                sys.rhs.len(),
                sys.init.len()
            )));
        }
        let arity = n + 1;
        let index_of = |name: &str| -> Result<usize> {
            if name == "t" {
                return Ok(0);
            }
            sys.states
                .iter()
                .position(|s| s == name)
                .map(|i| i + 1)
                .ok_or_else(|| Error::ProblemFile(format!("unknown variable `{name}` in rhs")))
        };
        let mut rhs = Vec::with_capacity(n);
        for list in &sys.rhs {
            let mut terms = Vec::with_capacity(list.terms.len());
            for term in &list.terms {
                let mut exps = vec![0u32; arity];
                for (name, &k) in &term.powers {
                    exps[index_of(name)?] += k;
                }
                terms.push((exps, term.coef));
            }
            rhs.push(MultiPoly::from_terms(arity, terms)?);
        }
        let mut init = Vec::with_capacity(n);
        for (i, spec) in sys.init.iter().enumerate() {
            let cond = match (i, spec) {
                (Y, _) => match boundary.left {
                    LeftBoundary::Value(alpha) => InitCondition::Known(alpha),
                    LeftBoundary::Slope(_) => InitCondition::Unknown,
                },
                (U, _) => match boundary.left {
                    LeftBoundary::Value(_) => InitCondition::Unknown,
                    LeftBoundary::Slope(gamma) => InitCondition::Known(gamma),
                },
                (_, InitSpec::Value { value }) => InitCondition::Known(*value),
                (_, InitSpec::Derived { expr }) => InitCondition::Derived(
                    parse_with_states::<f64>(expr, &sys.states[..2])
                        .map_err(|e| nested_parse_error(&format!("init of {}", sys.states[i]), e))?,
                ),
                (_, InitSpec::Unknown | InitSpec::Boundary) => {
                    return Err(Error::ProblemFile(format!(
                        "auxiliary state {} needs a value or derived initial condition",
                        sys.states[i]
                    )))
                }
            };
            init.push(cond);
        }
        let spec = SystemSpec {
            a,
            b,
            state_names: sys.states.clone(),
            rhs,
            init,
            beta: boundary.right,
            unknown: boundary.unknown(),
        };
        spec.check()?;
        Ok(spec)
    }

    /// Closed-form solution `y(t)`, if the file declares one.
    pub fn exact_solution(&self) -> Result<Option<AuxExpr<f64>>> {
        self.exact
            .as_deref()
            .map(|src| {
                super::Parser::parse(src, &[("t", AuxExpr::Time)])
                    .map_err(|e| nested_parse_error("exact", e))
            })
            .transpose()
    }

    /// Lipschitz box bounds ordered like the system's states.
    pub fn lipschitz_bounds(&self, spec: &SystemSpec<f64>) -> Option<Vec<(f64, f64)>> {
        let bounds = self.lipschitz_box.as_ref()?;
        Some(
            spec.state_names
                .iter()
                .map(|n| bounds.get(n).map_or((0.0, 0.0), |&[lo, hi]| (lo, hi)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Unknown;

    #[test]
    fn expression_file() {
        let text = r#"{
            "interval": [0, 1.2],
            "equation": { "expr": "-exp(-2*y)" },
            "boundary": { "left": {"kind": "value", "value": 0},
                          "right": {"kind": "value", "value": -1.0151232834956} },
            "exact": "ln(cos(t))"
        }"#;
        let file = ProblemFile::from_json(text).unwrap();
        let spec = file.to_spec().unwrap();
        assert_eq!(spec.num_states(), 3);
        assert_eq!(spec.unknown, Unknown::Slope);
        let exact = file.exact_solution().unwrap().unwrap();
        assert!((exact.evaluate(1.2, &[]).unwrap() - 1.2f64.cos().ln()).abs() < 1e-15);
    }

    #[test]
    fn system_file() {
        let text = r#"{
            "interval": [0, 1.2],
            "equation": { "system": {
                "states": ["y", "u", "v"],
                "rhs": [
                    {"terms": [{"coef": 1, "powers": {"u": 1}}]},
                    {"terms": [{"coef": -1, "powers": {"v": 1}}]},
                    {"terms": [{"coef": -2, "powers": {"u": 1, "v": 1}}]}
                ],
                "init": [{"kind": "boundary"}, {"kind": "unknown"}, {"kind": "derived", "expr": "exp(-2*y)"}]
            }},
            "boundary": { "left": {"kind": "value", "value": 0},
                          "right": {"kind": "value", "value": -1.0151232834956} }
        }"#;
        let from_system = ProblemFile::from_json(text).unwrap().to_spec().unwrap();
        let from_expr = polynomialize(
            0.0,
            1.2,
            &parse_rhs("-exp(-2*y)").unwrap(),
            Boundary::dirichlet(0.0, -1.0151232834956),
        )
        .unwrap();
        assert_eq!(from_system.rhs, from_expr.rhs);
        assert_eq!(
            from_system.derived_inits(0.0, 0.0).unwrap(),
            from_expr.derived_inits(0.0, 0.0).unwrap()
        );
    }

    #[test]
    fn json_errors_carry_position() {
        let err = ProblemFile::from_json("{\n  \"interval\": [0, 1],\n  oops\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn expression_errors_carry_position() {
        let text = r#"{"interval": [0, 1], "equation": {"expr": "y + * u"},
            "boundary": {"left": {"kind": "value", "value": 0}, "right": {"kind": "value", "value": 1}}}"#;
        let err = ProblemFile::from_json(text).unwrap().to_spec().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 5, .. }), "{err:?}");
    }

    #[test]
    fn slope_left_boundary() {
        let text = r#"{"interval": [0, 1], "equation": {"expr": "0"},
            "boundary": {"left": {"kind": "slope", "value": 2}, "right": {"kind": "value", "value": 1}}}"#;
        let spec = ProblemFile::from_json(text).unwrap().to_spec().unwrap();
        assert_eq!(spec.unknown, Unknown::LeftValue);
        assert_eq!(spec.gamma(), Some(2.0));
    }
}
