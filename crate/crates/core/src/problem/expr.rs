//! Elementary-function expressions and the infix parser for them.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Unary elementary functions that polynomialization knows how to remove.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Recip,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Recip => "reciprocal",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "ln" | "log" => Func::Ln,
            "reciprocal" | "recip" => Func::Recip,
            _ => return None,
        })
    }

    /// Applies the function, rejecting points outside its domain.
    pub fn apply<T: Scalar>(self, x: T) -> std::result::Result<T, String> {
        match self {
            Func::Exp => Ok(x.exp()),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Recip if x == T::zero() => Err("reciprocal of zero".into()),
            Func::Recip => Ok(x.recip()),
            Func::Ln if x <= T::zero() => Err(format!("ln of non-positive value {x}")),
            Func::Ln => Ok(x.ln()),
        }
    }
}

/// Expression tree over constants, `t`, state variables and [`Func`] nodes.
///
/// `State(0)` is `y`, `State(1)` is `u = y'`, higher indices are further
/// states of an explicit system.
#[derive(Clone, Debug, PartialEq)]
pub enum AuxExpr<T> {
    Const(T),
    Time,
    State(usize),
    Neg(Box<AuxExpr<T>>),
    Add(Box<AuxExpr<T>>, Box<AuxExpr<T>>),
    Sub(Box<AuxExpr<T>>, Box<AuxExpr<T>>),
    Mul(Box<AuxExpr<T>>, Box<AuxExpr<T>>),
    Pow(Box<AuxExpr<T>>, i32),
    Func(Func, Box<AuxExpr<T>>),
}

impl<T: Scalar> AuxExpr<T> {
    pub fn constant(value: T) -> Self {
        AuxExpr::Const(value)
    }

    pub fn y() -> Self {
        AuxExpr::State(0)
    }

    pub fn u() -> Self {
        AuxExpr::State(1)
    }

    pub fn apply(func: Func, arg: Self) -> Self {
        AuxExpr::Func(func, Box::new(arg))
    }

    /// Evaluates with `t` and the given state values.
    pub fn evaluate(&self, t: T, states: &[T]) -> std::result::Result<T, String> {
        Ok(match self {
            AuxExpr::Const(c) => *c,
            AuxExpr::Time => t,
            AuxExpr::State(i) => *states
                .get(*i)
                .ok_or_else(|| format!("state index {i} is not available here"))?,
            AuxExpr::Neg(e) => -e.evaluate(t, states)?,
            AuxExpr::Add(l, r) => l.evaluate(t, states)? + r.evaluate(t, states)?,
            AuxExpr::Sub(l, r) => l.evaluate(t, states)? - r.evaluate(t, states)?,
            AuxExpr::Mul(l, r) => l.evaluate(t, states)? * r.evaluate(t, states)?,
            AuxExpr::Pow(base, n) => {
                let x = base.evaluate(t, states)?;
                if *n < 0 && x == T::zero() {
                    return Err("negative power of zero".into());
                }
                x.powi(*n)
            }
            AuxExpr::Func(f, arg) => f.apply(arg.evaluate(t, states)?)?,
        })
    }

    /// Largest state index referenced, if any.
    pub fn max_state(&self) -> Option<usize> {
        match self {
            AuxExpr::Const(_) | AuxExpr::Time => None,
            AuxExpr::State(i) => Some(*i),
            AuxExpr::Neg(e) | AuxExpr::Pow(e, _) | AuxExpr::Func(_, e) => e.max_state(),
            AuxExpr::Add(l, r) | AuxExpr::Sub(l, r) | AuxExpr::Mul(l, r) => {
                match (l.max_state(), r.max_state()) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            }
        }
    }

    pub fn contains_function(&self) -> bool {
        match self {
            AuxExpr::Const(_) | AuxExpr::Time | AuxExpr::State(_) => false,
            AuxExpr::Func(..) => true,
            AuxExpr::Neg(e) => e.contains_function(),
            AuxExpr::Pow(e, n) => *n < 0 || e.contains_function(),
            AuxExpr::Add(l, r) | AuxExpr::Sub(l, r) | AuxExpr::Mul(l, r) => {
                l.contains_function() || r.contains_function()
            }
        }
    }

    /// Renders using the given state names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        ExprDisplay { expr: self, names }
    }
}

struct ExprDisplay<'a, T> {
    expr: &'a AuxExpr<T>,
    names: &'a [String],
}

impl<T: Scalar> fmt::Display for ExprDisplay<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names;
        let sub = |e| ExprDisplay { expr: e, names };
        match self.expr {
            AuxExpr::Const(c) => write!(f, "{c}"),
            AuxExpr::Time => write!(f, "t"),
            AuxExpr::State(i) => match self.names.get(*i) {
                Some(n) => write!(f, "{n}"),
                None => write!(f, "x{i}"),
            },
            AuxExpr::Neg(e) => write!(f, "-({})", sub(e)),
            AuxExpr::Add(l, r) => write!(f, "({} + {})", sub(l), sub(r)),
            AuxExpr::Sub(l, r) => write!(f, "({} - {})", sub(l), sub(r)),
            AuxExpr::Mul(l, r) => write!(f, "{}*{}", sub(l), sub(r)),
            AuxExpr::Pow(b, n) => write!(f, "({})^{n}", sub(b)),
            AuxExpr::Func(Func::Recip, a) => write!(f, "1/({})", sub(a)),
            AuxExpr::Func(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}

impl<T: Scalar> fmt::Display for AuxExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["y".to_string(), "u".to_string()];
        let shown = self.display_with(&names);
        write!(f, "{shown}")
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize, usize)>> {
        let mut lx = Lexer { src, toks: Vec::new() };
        lx.scan()?;
        Ok(lx.toks)
    }

    fn scan(&mut self) -> Result<()> {
        let chars: Vec<char> = self.src.chars().collect();
        let (mut line, mut col) = (1usize, 1usize);
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if c.is_whitespace() {
                col += 1;
                i += 1;
                continue;
            }
            let (start_line, start_col) = (line, col);
            if c.is_ascii_digit() || c == '.' {
                let begin = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[begin..i].iter().collect();
                let value = text.parse::<f64>().map_err(|_| Error::Parse {
                    line: start_line,
                    column: start_col,
                    message: format!("malformed number `{text}`"),
                })?;
                col += i - begin;
                self.toks.push((Tok::Num(value), start_line, start_col));
            } else if c.is_alphabetic() || c == '_' {
                let begin = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - begin;
                let text: String = chars[begin..i].iter().collect();
                self.toks.push((Tok::Ident(text), start_line, start_col));
            } else if "+-*/^()".contains(c) {
                i += 1;
                col += 1;
                self.toks.push((Tok::Op(c), start_line, start_col));
            } else {
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
        self.toks.push((Tok::End, line, col));
        Ok(())
    }
}

/// Recursive-descent parser for infix right-hand sides.
///
/// Grammar (standard precedence, `^` binds tightest and takes an integer):
/// ```text
/// expr  := term (('+' | '-') term)*
/// term  := unary (('*' | '/') unary)*
/// unary := '-' unary | power
/// power := atom ('^' ['-'] integer)?
/// atom  := number | name | func '(' expr ')' | '(' expr ')'
/// ```
/// Names resolve through `variables`; `pi` is the usual constant.
pub struct Parser<'v, T> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    variables: &'v [(&'v str, AuxExpr<T>)],
}

impl<'v, T: Scalar> Parser<'v, T> {
    pub fn parse(src: &str, variables: &'v [(&'v str, AuxExpr<T>)]) -> Result<AuxExpr<T>> {
        let mut p = Parser {
            toks: Lexer::run(src)?,
            pos: 0,
            variables,
        };
        let e = p.expr()?;
        if p.peek() != &Tok::End {
            return Err(p.error_here(format!("unexpected token {}", p.describe())));
        }
        Ok(e)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }

    fn error_here(&self, message: String) -> Error {
        let (_, line, column) = self.toks[self.pos];
        Error::Parse {
            line,
            column,
            message,
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek() == &Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{op}`, found {}", self.describe())))
        }
    }

    fn expr(&mut self) -> Result<AuxExpr<T>> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = AuxExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = AuxExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<AuxExpr<T>> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = AuxExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    let factor = match rhs {
                        AuxExpr::Const(c) if c != T::zero() => AuxExpr::Const(c.recip()),
                        AuxExpr::Const(_) => {
                            return Err(self.error_here("division by constant zero".into()))
                        }
                        other => AuxExpr::apply(Func::Recip, other),
                    };
                    lhs = match lhs {
                        AuxExpr::Const(c) if c == T::one() => factor,
                        lhs => AuxExpr::Mul(Box::new(lhs), Box::new(factor)),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<AuxExpr<T>> {
        if self.peek() == &Tok::Op('-') {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner {
                AuxExpr::Const(c) => AuxExpr::Const(-c),
                e => AuxExpr::Neg(Box::new(e)),
            });
        }
        if self.peek() == &Tok::Op('+') {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<AuxExpr<T>> {
        let base = self.atom()?;
        if self.peek() != &Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let parenthesized = self.peek() == &Tok::Op('(');
        if parenthesized {
            self.bump();
        }
        let negative = self.peek() == &Tok::Op('-');
        if negative {
            self.bump();
        }
        let n = match self.bump() {
            Tok::Num(x) if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 => x as i32,
            _ => {
                self.pos -= 1;
                return Err(self.error_here("exponent must be an integer literal".into()));
            }
        };
        if parenthesized {
            self.expect(')')?;
        }
        let n = if negative { -n } else { n };
        Ok(match base {
            AuxExpr::Const(c) => AuxExpr::Const(c.powi(n)),
            b => AuxExpr::Pow(Box::new(b), n),
        })
    }

    fn atom(&mut self) -> Result<AuxExpr<T>> {
        let e = match self.bump() {
            Tok::Num(x) => AuxExpr::Const(T::of(x)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                e
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    AuxExpr::apply(func, arg)
                } else if let Some((_, e)) = self.variables.iter().find(|(n, _)| *n == name) {
                    e.clone()
                } else if name == "pi" {
                    AuxExpr::Const(T::PI())
                } else if self.peek() == &Tok::Op('(') {
                    self.pos -= 1;
                    return Err(Error::UnsupportedFunction(name));
                } else {
                    self.pos -= 1;
                    return Err(self.error_here(format!("unknown name `{name}`")));
                }
            }
            _ => {
                self.pos -= 1;
                return Err(self.error_here(format!("expected a value, found {}", self.describe())));
            }
        };
        if matches!(self.peek(), Tok::Num(_) | Tok::Ident(_) | Tok::Op('(')) {
            return Err(self.error_here("implicit multiplication is not allowed".into()));
        }
        Ok(e)
    }
}

/// Parses an expression over `t`, `y` and `u`.
pub fn parse_rhs<T: Scalar>(src: &str) -> Result<AuxExpr<T>> {
    let vars = [
        ("t", AuxExpr::Time),
        ("y", AuxExpr::State(0)),
        ("u", AuxExpr::State(1)),
    ];
    Parser::parse(src, &vars)
}

/// Parses an expression over `t` and the named states.
pub fn parse_with_states<T: Scalar>(src: &str, states: &[String]) -> Result<AuxExpr<T>> {
    let mut vars: Vec<(&str, AuxExpr<T>)> = vec![("t", AuxExpr::Time)];
    vars.extend(states.iter().enumerate().map(|(i, n)| (n.as_str(), AuxExpr::State(i))));
    Parser::parse(src, &vars)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, t: f64, y: f64, u: f64) -> f64 {
        parse_rhs::<f64>(src).unwrap().evaluate(t, &[y, u]).unwrap()
    }

    #[test]
    fn precedence_and_powers() {
        assert_eq!(eval("1 + 2*3", 0.0, 0.0, 0.0), 7.0);
        assert_eq!(eval("-2^2", 0.0, 0.0, 0.0), -4.0);
        assert_eq!(eval("(3 - 2*t)^3", 1.0, 0.0, 0.0), 1.0);
        assert_eq!(eval("16 + (3-2*t)^3 + 0.25*y*u", 0.0, 4.0, 2.0), 16.0 + 27.0 + 2.0);
        assert_eq!(eval("y^-2", 0.0, 2.0, 0.0), 0.25);
        assert_eq!(eval("y^(-1)", 0.0, 4.0, 0.0), 0.25);
    }

    #[test]
    fn functions_and_reciprocals() {
        assert!((eval("-exp(-2*y)", 0.0, 0.0, 0.0) + 1.0).abs() < 1e-15);
        assert_eq!(eval("1/(1 + y)", 0.0, 1.0, 0.0), 0.5);
        assert_eq!(eval("u/2", 0.0, 0.0, 3.0), 1.5);
        assert!((eval("sin(pi/2)", 0.0, 0.0, 0.0) - 1.0).abs() < 1e-15);
        let e = parse_rhs::<f64>("1/(y)").unwrap();
        assert_eq!(e, AuxExpr::apply(Func::Recip, AuxExpr::State(0)));
    }

    #[test]
    fn rejects_implicit_multiplication() {
        let err = parse_rhs::<f64>("2 y").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 3, .. }), "{err:?}");
        assert!(parse_rhs::<f64>("2(y)").is_err());
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse_rhs::<f64>("y +\n  * u").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 3, .. }), "{err:?}");
        let err = parse_rhs::<f64>("y ^ 1.5").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 5, .. }), "{err:?}");
    }

    #[test]
    fn unknown_function_is_named() {
        assert_eq!(
            parse_rhs::<f64>("tan(y)").unwrap_err(),
            Error::UnsupportedFunction("tan".into())
        );
        assert!(matches!(parse_rhs::<f64>("z + 1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn domain_errors() {
        let e = parse_rhs::<f64>("ln(y)").unwrap();
        assert!(e.evaluate(0.0, &[0.0, 0.0]).is_err());
        let e = parse_rhs::<f64>("1/y").unwrap();
        assert!(e.evaluate(0.0, &[0.0, 0.0]).is_err());
    }
}
