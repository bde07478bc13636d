use super::{BinOp, Expr, Func, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn err<T>(offset: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { offset, kind })
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((i, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // exponent only if digits follow, so "2e" stays an error below
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let invalid = || ParseErrorKind::InvalidNumber(text.to_string());
                if text == "." || text.starts_with("..") {
                    return err(start, invalid());
                }
                if i < bytes.len()
                    && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_' || bytes[i] == b'.')
                {
                    return err(
                        start,
                        ParseErrorKind::InvalidNumber(format!("{text}{}", bytes[i] as char)),
                    );
                }
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push((start, Tok::Num(v))),
                    _ => return err(start, invalid()),
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap();
                return err(i, ParseErrorKind::UnexpectedChar(ch));
            }
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &'static str) -> Result<T, ParseError> {
        let found = self.peek();
        let kind = match found {
            Tok::RParen => ParseErrorKind::Unbalanced,
            Tok::End if self.depth > 0 => ParseErrorKind::Unbalanced,
            _ => ParseErrorKind::UnexpectedToken {
                found: found.describe(),
                expected,
            },
        };
        err(self.offset(), kind)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::negate(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            return Ok(Expr::binary(BinOp::Pow, base, self.factor()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Number(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.group(at)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                let called = *self.peek() == Tok::LParen;
                match (Func::from_name(&name), called) {
                    (Some(f), true) => {
                        self.bump();
                        Ok(Expr::call(f, self.group(at)?))
                    }
                    (Some(_), false) => err(at, ParseErrorKind::Arity(name)),
                    (None, true) if name == "x" || name == "pi" => {
                        err(at, ParseErrorKind::Arity(name))
                    }
                    (None, true) => err(at, ParseErrorKind::UnknownFunction(name)),
                    (None, false) => Ok(match name.as_str() {
                        "x" => Expr::Variable,
                        "pi" => Expr::Pi,
                        _ => Expr::Param(name),
                    }),
                }
            }
            _ => self.unexpected("a number, identifier or '('"),
        }
    }

    /// Parses `expr ')'` after an opening parenthesis at `open`.
    fn group(&mut self, open: usize) -> Result<Expr, ParseError> {
        self.depth += 1;
        let inner = self.expr()?;
        self.depth -= 1;
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(inner)
            }
            Tok::End => err(open, ParseErrorKind::Unbalanced),
            _ => self.unexpected("')'"),
        }
    }
}

/// Parses `source` into an [`Expr`]. Errors carry the byte offset of the
/// offending token.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    if toks.len() == 1 {
        return err(0, ParseErrorKind::Empty);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::RParen => err(p.offset(), ParseErrorKind::Unbalanced),
        _ => p.unexpected("an operator or end of input"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ParseErrorKind as K;

    fn kind(src: &str) -> (usize, ParseErrorKind) {
        let e = parse(src).unwrap_err();
        (e.offset, e.kind)
    }

    #[test]
    fn variable() {
        assert_eq!(parse("x").unwrap(), Expr::Variable);
    }

    #[test]
    fn arctan_quotient_shape() {
        let e = parse("arctan(x)/(x*(1+x))").unwrap();
        let expected = Expr::binary(
            BinOp::Div,
            Expr::call(Func::Arctan, Expr::Variable),
            Expr::binary(
                BinOp::Mul,
                Expr::Variable,
                Expr::binary(BinOp::Add, Expr::num(1.0), Expr::Variable),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn parameterised_rational() {
        let e = parse("1/(1+a*x^2)").unwrap();
        let expected = Expr::binary(
            BinOp::Div,
            Expr::num(1.0),
            Expr::binary(
                BinOp::Add,
                Expr::num(1.0),
                Expr::binary(
                    BinOp::Mul,
                    Expr::Param("a".into()),
                    Expr::binary(BinOp::Pow, Expr::Variable, Expr::num(2.0)),
                ),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn precedence_shapes() {
        assert_eq!(
            parse("-x^2").unwrap(),
            Expr::negate(Expr::binary(BinOp::Pow, Expr::Variable, Expr::num(2.0)))
        );
        assert_eq!(
            parse("2^3^2").unwrap(),
            Expr::binary(
                BinOp::Pow,
                Expr::num(2.0),
                Expr::binary(BinOp::Pow, Expr::num(3.0), Expr::num(2.0))
            )
        );
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::num(1.5e-3));
        assert_eq!(parse(".5").unwrap(), Expr::num(0.5));
        assert_eq!(parse("2.").unwrap(), Expr::num(2.0));
        assert_eq!(parse("3E2").unwrap(), Expr::num(300.0));
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(kind(""), (0, K::Empty));
        assert_eq!(kind("   "), (0, K::Empty));
        assert_eq!(kind("x # 2"), (2, K::UnexpectedChar('#')));
        assert_eq!(kind("(x+1"), (0, K::Unbalanced));
        assert_eq!(kind("x+1)"), (3, K::Unbalanced));
        assert_eq!(kind("sin(x"), (0, K::Unbalanced));
        assert_eq!(kind("foo(x)"), (0, K::UnknownFunction("foo".into())));
        assert_eq!(kind("1+sin"), (2, K::Arity("sin".into())));
        assert_eq!(kind("x(2)"), (0, K::Arity("x".into())));
        assert_eq!(kind("1e999"), (0, K::InvalidNumber("1e999".into())));
        assert_eq!(kind("2x"), (0, K::InvalidNumber("2x".into())));
        assert_eq!(kind("1.2.3"), (0, K::InvalidNumber("1.2.".into())));
        assert!(matches!(kind("x+"), (2, K::UnexpectedToken { .. })));
        assert!(matches!(kind("x y"), (2, K::UnexpectedToken { .. })));
        assert!(matches!(kind("()"), (1, K::Unbalanced)));
    }
}
