//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (("+"|"-") term)*
//! term  := unary (("*"|"/") unary)*
//! unary := "-"? power
//! power := atom ("^" unary)?
//! atom  := number | "t" | "x" | func "(" expr ")" | "(" expr ")"
//!        | ("quad"|"quadinv") "(" expr "," expr "," expr "," expr "," expr ")"
//! ```
//!
//! `quad(C, x0, lo, hi, arg)` is the printed form of a numeric primitive of
//! `1/C` and only appears in files written by the engine itself.

use std::sync::Arc;

use super::{Expr, Func, Number, QuadDir, QuadMap};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Dec(f64),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut decimal = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                decimal = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    decimal = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if decimal {
                let v: f64 = s.parse().map_err(|_| Error::Syntax {
                    line: l0,
                    column: c0,
                    message: format!("bad number `{s}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Syntax {
                        line: l0,
                        column: c0,
                        message: format!("number `{s}` out of range"),
                    });
                }
                Tok::Dec(v)
            } else {
                match s.parse::<i64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => Tok::Dec(s.parse().unwrap_or(f64::INFINITY)),
                }
            };
            out.push(Token {
                tok,
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                column: c0,
            });
            continue;
        }
        if "+-*/^(),".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                line: l0,
                column: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(Error::Syntax {
            line: l0,
            column: c0,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, tok: &Token, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: tok.line,
            column: tok.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.err(&t, format!("expected `{c}`, found {}", describe(&t.tok))))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    acc = acc.add(&self.term()?);
                }
                Tok::Sym('-') => {
                    self.next();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.next();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Sym('/') => {
                    let slash = self.next();
                    let num_is_int = matches!(acc.as_number(), Some(Number::Rational(_)));
                    let den_tok = self.peek().clone();
                    let den = self.unary()?;
                    if den.is_zero() {
                        if num_is_int && matches!(den_tok.tok, Tok::Int(_)) {
                            return Err(Error::MalformedRational {
                                line: slash.line,
                                column: slash.column,
                                message: "zero denominator".into(),
                            });
                        }
                        return Err(self.err(&slash, "division by literal zero"));
                    }
                    acc = acc.div(&den);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().tok == Tok::Sym('-') {
            self.next();
            if self.peek().tok == Tok::Sym('-') {
                let t = self.peek().clone();
                return Err(self.err(&t, "repeated unary minus"));
            }
            return Ok(self.power()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Sym('^') {
            self.next();
            let e = self.unary()?;
            return Ok(base.pow(&e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => Ok(Expr::int(*n)),
            Tok::Dec(v) => {
                if !v.is_finite() {
                    return Err(self.err(&t, "number out of range"));
                }
                Ok(Expr::float(*v))
            }
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::t()),
                "x" => Ok(Expr::x()),
                "quad" | "quadinv" => {
                    let dir = if name == "quad" {
                        QuadDir::Forward
                    } else {
                        QuadDir::Inverse
                    };
                    self.expect('(')?;
                    let c = self.expr()?;
                    let mut consts = [0.0; 3];
                    for slot in consts.iter_mut() {
                        self.expect(',')?;
                        let at = self.peek().clone();
                        let v = self.expr()?;
                        *slot = v
                            .as_f64()
                            .ok_or_else(|| self.err(&at, "quadrature bounds must be constants"))?;
                    }
                    self.expect(',')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    let map = QuadMap::new(c, consts[0], consts[1], consts[2]);
                    Ok(Expr::quad(dir, Arc::new(map), &arg))
                }
                other => match Func::from_name(other) {
                    Some(f) => {
                        self.expect('(')?;
                        let a = self.expr()?;
                        self.expect(')')?;
                        Ok(a.apply(f))
                    }
                    None => Err(Error::UnknownIdentifier {
                        name: other.to_string(),
                        line: t.line,
                        column: t.column,
                    }),
                },
            },
            other => Err(self.err(&t, format!("unexpected {}", describe(other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number `{n}`"),
        Tok::Dec(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parse an expression in `t` and `x`.
pub fn parse_expression(text: &str) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    if p.peek().tok == Tok::End {
        let t = p.peek().clone();
        return Err(p.err(&t, "empty expression"));
    }
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.err(&t, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn exact_rational_exponent() {
        let e = parse_expression("x^2*abs(x)^(1/2)").unwrap();
        let Node::Mul(_, r) = e.node() else { panic!("{e:?}") };
        let Node::Pow(_, p) = r.node() else { panic!("{r:?}") };
        assert_eq!(p.as_number(), Some(Number::ratio(1, 2)));
    }

    #[test]
    fn precedence() {
        assert!(matches!(parse_expression("--x"), Err(Error::Syntax { .. })));
        let e = parse_expression("1 - -3").unwrap();
        assert_eq!(e.as_f64(), Some(4.0));
        let e = parse_expression("1 + 2*x^2 - 3").unwrap();
        assert!((e.eval(0.0, 2.0) - 6.0).abs() < 1e-15);
        let e = parse_expression("-x^2").unwrap();
        assert_eq!(e.eval(0.0, 3.0), -9.0);
        let e = parse_expression("2^3^2").unwrap();
        assert_eq!(e.as_f64(), Some(512.0));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expression("x +\n  foo(x)") {
            Err(Error::UnknownIdentifier { name, line, column }) => {
                assert_eq!((name.as_str(), line, column), ("foo", 2, 3));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expression("3/0"), Err(Error::MalformedRational { .. })));
        assert!(matches!(parse_expression("(x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression(""), Err(Error::Syntax { .. })));
    }

    #[test]
    fn log_stage_member() {
        let e = parse_expression("ln(abs(t))/2").unwrap();
        assert!((e.eval(-3.0, 0.0) - 3f64.ln() / 2.0).abs() < 1e-15);
    }
}
