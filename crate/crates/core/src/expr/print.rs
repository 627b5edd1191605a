use std::fmt;

use super::{Expr, Node, Number, QuadDir};

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Pow(..) => 3,
        _ => 4,
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, n: &Number) -> fmt::Result {
    let plain = match n {
        Number::Rational(r) => r.is_integer() && *r.numer() >= 0,
        Number::Float(v) => *v >= 0.0,
    };
    if plain {
        write!(f, "{n}")
    } else {
        write!(f, "({n})")
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(n) => write_num(f, n),
            Node::Var(v) => f.write_str(v.name()),
            Node::Add(a, b) | Node::Sub(a, b) => {
                let op = if matches!(self.node(), Node::Add(..)) { '+' } else { '-' };
                wrap(f, a, false)?;
                write!(f, " {op} ")?;
                wrap(f, b, prec(b) <= 1)
            }
            Node::Mul(a, b) | Node::Div(a, b) => {
                let op = if matches!(self.node(), Node::Mul(..)) { '*' } else { '/' };
                wrap(f, a, prec(a) < 2)?;
                write!(f, "{op}")?;
                wrap(f, b, prec(b) <= 2)
            }
            Node::Pow(a, b) => {
                wrap(f, a, prec(a) < 4)?;
                f.write_str("^")?;
                wrap(f, b, prec(b) < 4)
            }
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
            Node::Quad(dir, m, a) => {
                let name = match dir {
                    QuadDir::Forward => "quad",
                    QuadDir::Inverse => "quadinv",
                };
                write!(
                    f,
                    "{name}({}, {}, {}, {}, {a})",
                    m.integrand,
                    Expr::float(m.x0),
                    Expr::float(m.lo),
                    Expr::float(m.hi)
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse_expression;

    fn round_trip(s: &str) {
        let e = parse_expression(s).unwrap();
        let printed = e.to_string();
        let again = parse_expression(&printed).unwrap();
        assert_eq!(e, again, "{s} -> {printed}");
        assert_eq!(printed, again.to_string());
    }

    #[test]
    fn round_trips() {
        for s in [
            "x^2*abs(x)^(1/2)",
            "(2*t+1)/(t+1)",
            "ln(abs(t))/2",
            "x - (t - 1)",
            "x/(t*x)",
            "(x^2)^(1/3)",
            "-x^2 + 0.125*t",
            "2^(-1/3)*x",
            "exp(-t)*sin(3*x) + x^2/10",
            "1e-20*x + 123456789012345678901.5",
        ] {
            round_trip(s);
        }
    }

    #[test]
    fn rationals_print_in_parentheses() {
        let e = parse_expression("x^(1/2)").unwrap();
        assert_eq!(e.to_string(), "x^(1/2)");
        let e = parse_expression("3/4*x").unwrap();
        assert_eq!(e.to_string(), "(3/4)*x");
    }
}
