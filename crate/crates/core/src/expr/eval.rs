use super::{BinOp, DomainIssue, EvalError, Expr, Func, Params};

/// An expression with every parameter replaced by its value, ready for
/// repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Const(f64),
    Input,
    Call(Func, Box<Bound>),
    Binary(BinOp, Box<Bound>, Box<Bound>),
    Neg(Box<Bound>),
}

impl Expr {
    /// Binds parameters, with `x` as the input variable.
    pub fn bind(&self, params: &Params) -> Result<Bound, EvalError> {
        self.bind_as("x", params)
    }

    /// Binds parameters, treating the identifier `var` as the input.
    ///
    /// With `var = "k"` an expression such as `k^0.5` describes a sequence;
    /// `x` is then rejected as unbound.
    pub fn bind_as(&self, var: &str, params: &Params) -> Result<Bound, EvalError> {
        Ok(match self {
            Expr::Number(v) => Bound::Const(*v),
            Expr::Pi => Bound::Const(std::f64::consts::PI),
            Expr::Variable if var == "x" => Bound::Input,
            Expr::Variable => return Err(EvalError::Unbound("x".into())),
            Expr::Param(name) if name == var => Bound::Input,
            Expr::Param(name) => match params.get(name) {
                Some(v) => Bound::Const(*v),
                None => return Err(EvalError::Unbound(name.clone())),
            },
            Expr::Call(f, a) => Bound::Call(*f, Box::new(a.bind_as(var, params)?)),
            Expr::Binary(op, a, b) => Bound::Binary(
                *op,
                Box::new(a.bind_as(var, params)?),
                Box::new(b.bind_as(var, params)?),
            ),
            Expr::Neg(a) => Bound::Neg(Box::new(a.bind_as(var, params)?)),
        })
    }
}

impl Bound {
    /// Evaluates at `x`. Any step that would produce NaN or ±∞ is reported
    /// as a domain error at `x`.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let fail = |reason| Err(EvalError::Domain { x, reason });
        let v = match self {
            Bound::Const(c) => *c,
            Bound::Input => x,
            Bound::Neg(a) => -a.eval(x)?,
            Bound::Call(f, a) => {
                let a = a.eval(x)?;
                match f {
                    Func::Arctan => a.atan(),
                    Func::Log if a <= 0.0 => return fail(DomainIssue::Log),
                    Func::Log => a.ln(),
                    Func::Exp => a.exp(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt if a < 0.0 => return fail(DomainIssue::Sqrt),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                }
            }
            Bound::Binary(op, a, b) => {
                let a = a.eval(x)?;
                let b = b.eval(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return fail(DomainIssue::DivisionByZero),
                    BinOp::Div => a / b,
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            return fail(DomainIssue::DivisionByZero);
                        }
                        let v = a.powf(b);
                        if v.is_nan() {
                            return fail(DomainIssue::Pow);
                        }
                        v
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            fail(DomainIssue::NonFinite)
        }
    }

    /// The value when the expression does not depend on the input.
    pub fn constant(&self) -> Option<f64> {
        match self {
            Bound::Const(c) => Some(*c),
            _ => None,
        }
    }
}

/// Evaluates `e` at `x` with the given parameter bindings.
pub fn evaluate(e: &Expr, x: f64, params: &Params) -> Result<f64, EvalError> {
    e.bind(params)?.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn at(src: &str, x: f64) -> Result<f64, EvalError> {
        evaluate(&parse(src).unwrap(), x, &Params::new())
    }

    #[test]
    fn basic_values() {
        assert_eq!(at("x", 0.5).unwrap(), 0.5);
        assert_eq!(at("2+3*4", 0.0).unwrap(), 14.0);
        assert_eq!(at("2^3^2", 0.0).unwrap(), 512.0);
        assert_eq!(at("-x^2", 2.0).unwrap(), -4.0);
        assert_eq!(at("(-x)^2", 2.0).unwrap(), 4.0);
        assert_eq!(at("8/2/2", 0.0).unwrap(), 2.0);
        assert_eq!(at("8-2-2", 0.0).unwrap(), 4.0);
        assert_eq!(at("abs(-3)+sqrt(4)", 0.0).unwrap(), 5.0);
    }

    #[test]
    fn arctan_quotient_at_one() {
        // arctan(1) = π/4, divided by 1·(1+1)
        let v = at("arctan(x)/(x*(1+x))", 1.0).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_8).abs() < 1e-15, "{v}");
    }

    #[test]
    fn removable_singularity_is_an_error() {
        let e = at("arctan(x)/(x*(1+x))", 0.0).unwrap_err();
        assert_eq!(
            e,
            EvalError::Domain {
                x: 0.0,
                reason: DomainIssue::DivisionByZero
            }
        );
        assert_eq!(e.x(), Some(0.0));
    }

    #[test]
    fn domain_errors() {
        let reason = |src: &str, x: f64| match at(src, x) {
            Err(EvalError::Domain { reason, .. }) => reason,
            other => panic!("{src}: {other:?}"),
        };
        assert_eq!(reason("log(x)", 0.0), DomainIssue::Log);
        assert_eq!(reason("log(x)", -1.0), DomainIssue::Log);
        assert_eq!(reason("sqrt(x)", -0.25), DomainIssue::Sqrt);
        assert_eq!(reason("x^0.5", -0.25), DomainIssue::Pow);
        assert_eq!(reason("x^-1", 0.0), DomainIssue::DivisionByZero);
        assert_eq!(reason("exp(1000*x)", 1.0), DomainIssue::NonFinite);
        assert_eq!(at("(-1)^3", 0.0).unwrap(), -1.0);
        assert_eq!(at("x^0", 0.0).unwrap(), 1.0);
    }

    #[test]
    fn parameters() {
        let e = parse("1/(1+a*x^2)").unwrap();
        let mut p = Params::new();
        assert_eq!(e.bind(&p).unwrap_err(), EvalError::Unbound("a".into()));
        p.insert("a".into(), 1.0);
        assert_eq!(evaluate(&e, 1.0, &p).unwrap(), 0.5);
    }

    #[test]
    fn sequence_variable() {
        let e = parse("k^0.5").unwrap();
        let b = e.bind_as("k", &Params::new()).unwrap();
        assert_eq!(b.eval(9.0).unwrap(), 3.0);
        assert!(parse("x+k").unwrap().bind_as("k", &Params::new()).is_err());
    }

    #[test]
    fn log_is_natural() {
        assert!((at("log(2)", 0.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-16);
    }
}
