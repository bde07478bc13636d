//! Real-valued expressions of one variable.
//!
//! Grammar (standard precedence, `^` right-associative and binding tighter
//! than unary minus):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! `x` is the variable and `pi` the constant π. The functions are `arctan`,
//! `log` (natural), `exp`, `sin`, `cos`, `sqrt` and `abs`. Any other
//! identifier is a named parameter bound at evaluation time.

mod eval;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use eval::{evaluate, Bound};
pub use parse::parse;

/// Parameter bindings, e.g. `a = 1.0` in `1/(1+a*x^2)`.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Arctan,
    Log,
    Exp,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Arctan,
        Func::Log,
        Func::Exp,
        Func::Sin,
        Func::Cos,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Arctan => "arctan",
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone)]
pub enum Expr {
    /// Non-negative finite literal.
    Number(f64),
    Variable,
    Pi,
    Param(String),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

/// Structural equality; numbers compare by bit pattern.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Number(a), Number(b)) => a.to_bits() == b.to_bits(),
            (Variable, Variable) | (Pi, Pi) => true,
            (Param(a), Param(b)) => a == b,
            (Call(f, a), Call(g, b)) => f == g && a == b,
            (Binary(o, a, b), Binary(p, c, d)) => o == p && a == c && b == d,
            (Neg(a), Neg(b)) => a == b,
            _ => false,
        }
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Number(v)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn negate(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    /// Names of all parameters, sorted and deduplicated.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(name) = e {
                out.push(name.clone());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    pub fn uses_variable(&self) -> bool {
        let mut seen = false;
        self.visit(&mut |e| seen |= matches!(e, Expr::Variable));
        seen
    }

    fn visit<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match self {
            Expr::Call(_, a) | Expr::Neg(a) => a.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Number(_) | Expr::Variable | Expr::Pi | Expr::Param(_) => {}
        }
    }

    // Printing precedence: higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn fmt_at(&self, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.precedence() < min_prec {
            f.write_str("(")?;
            self.fmt_at(0, f)?;
            return f.write_str(")");
        }
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Variable => f.write_str("x"),
            Expr::Pi => f.write_str("pi"),
            Expr::Param(name) => f.write_str(name),
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.fmt_at(0, f)?;
                f.write_str(")")
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(3, f)
            }
            Expr::Binary(op, a, b) => {
                let (left, right) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 3),
                };
                a.fmt_at(left, f)?;
                write!(f, "{}", op.symbol())?;
                b.fmt_at(right, f)
            }
        }
    }
}

/// Canonical form: minimal parentheses, no spaces. Parsing the output gives
/// back a structurally equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(0, f)
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("invalid number '{0}'")]
    InvalidNumber(String),
    #[error("unexpected {found}, expected {expected}")]
    UnexpectedToken {
        found: String,
        expected: &'static str,
    },
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("'{0}' takes one parenthesised argument")]
    Arity(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound parameter '{0}'")]
    Unbound(String),
    #[error("{reason} at x = {x}")]
    Domain { x: f64, reason: DomainIssue },
}

impl EvalError {
    /// The evaluation point, when the failure happened at a specific input.
    pub fn x(&self) -> Option<f64> {
        match self {
            EvalError::Domain { x, .. } => Some(*x),
            EvalError::Unbound(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DomainIssue {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of a non-positive value")]
    Log,
    #[error("sqrt of a negative value")]
    Sqrt,
    #[error("power with no real value")]
    Pow,
    #[error("non-finite result")]
    NonFinite,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round(src: &str) -> String {
        parse(src).unwrap().to_string()
    }

    #[test]
    fn canonical_printing() {
        assert_eq!(round("arctan(x)/(x*(1+x))"), "arctan(x)/(x*(1+x))");
        assert_eq!(round(" 1 / ( 1 + a * x ^ 2 ) "), "1/(1+a*x^2)");
        assert_eq!(round("(2^3)^2"), "(2^3)^2");
        assert_eq!(round("2^(3^2)"), "2^3^2");
        assert_eq!(round("-(x^2)"), "-x^2");
        assert_eq!(round("(-x)^2"), "(-x)^2");
        assert_eq!(round("a-(b-c)"), "a-(b-c)");
        assert_eq!(round("(a-b)-c"), "a-b-c");
        assert_eq!(round("a/(b*c)"), "a/(b*c)");
        assert_eq!(round("x*-x"), "x*-x");
        assert_eq!(round("2^-x"), "2^-x");
        assert_eq!(round("--x"), "--x");
        assert_eq!(round("1.50e1"), "15");
    }

    #[test]
    fn params_and_variable() {
        let e = parse("1/(1+a*x^2) + b*a").unwrap();
        assert_eq!(e.params(), vec!["a".to_string(), "b".to_string()]);
        assert!(e.uses_variable());
        assert!(!parse("3/pi^2").unwrap().uses_variable());
    }
}
