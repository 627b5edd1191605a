use std::collections::HashMap;

use super::{Expr, Func, Node, QuadDir, Var};

pub(super) fn differentiate(e: &Expr, v: Var) -> Expr {
    let mut memo = HashMap::new();
    d(e, v, &mut memo)
}

fn d(e: &Expr, v: Var, memo: &mut HashMap<usize, Expr>) -> Expr {
    if !e.depends_on(v) {
        return Expr::zero();
    }
    if let Some(r) = memo.get(&e.id()) {
        return r.clone();
    }
    let out = match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(a, b) => d(a, v, memo).add(&d(b, v, memo)),
        Node::Sub(a, b) => d(a, v, memo).sub(&d(b, v, memo)),
        Node::Mul(a, b) => d(a, v, memo).mul(b).add(&a.mul(&d(b, v, memo))),
        Node::Div(a, b) => {
            if !b.depends_on(v) {
                d(a, v, memo).div(b)
            } else {
                let num = d(a, v, memo).mul(b).sub(&a.mul(&d(b, v, memo)));
                num.div(&b.powi(2))
            }
        }
        Node::Pow(b, p) => {
            if !p.depends_on(v) {
                // p b^(p-1) b'
                let pm1 = p.sub(&Expr::one());
                p.mul(&b.pow(&pm1)).mul(&d(b, v, memo))
            } else {
                // b^p (p' ln|b| + p b'/b)
                let inner = d(p, v, memo).mul(&b.ln()).add(&p.mul(&d(b, v, memo)).div(b));
                e.mul(&inner)
            }
        }
        Node::Func(f, a) => {
            let da = d(a, v, memo);
            let outer = match f {
                Func::Abs => a.sign(),
                // zero away from the origin; the origin itself is excluded by evaluation
                Func::Sign => Expr::zero(),
                Func::Exp => e.clone(),
                Func::Ln => a.recip(),
                Func::Sin => a.cos(),
                Func::Cos => a.sin().neg(),
                Func::Tan => a.cos().powi(-2),
                Func::Atan => Expr::one().div(&Expr::one().add(&a.powi(2))),
                Func::Sqrt => Expr::ratio(1, 2).div(e),
            };
            outer.mul(&da)
        }
        Node::Quad(dir, m, a) => {
            let da = d(a, v, memo);
            let outer = match dir {
                // F' = 1/C
                QuadDir::Forward => m.integrand.subst(Var::X, a).recip(),
                // (F⁻¹)' = C(F⁻¹)
                QuadDir::Inverse => m.integrand.subst(Var::X, e),
            };
            outer.mul(&da)
        }
    };
    memo.insert(e.id(), out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(e: &Expr, t: f64, x: f64) -> f64 {
        let h = 1e-5;
        (e.eval(t, x + h) - e.eval(t, x - h)) / (2.0 * h)
    }

    #[test]
    fn polynomial_rule() {
        let e = Expr::x().powi(2);
        let de = e.diff(Var::X);
        for x in [-1.0, 0.5, 3.0] {
            assert!((de.eval(0.0, x) - 2.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn abs_power_product_matches_finite_differences() {
        let x = Expr::x();
        let e = x.powi(2).mul(&x.abs().powr(1, 2));
        let de = e.diff(Var::X);
        let closed = Expr::ratio(5, 2).mul(&x.sign()).mul(&x.abs().powr(3, 2));
        for x0 in [-2.0, -0.5, 0.5, 2.0] {
            let got = de.eval(0.0, x0);
            let want = fd(&e, 0.0, x0);
            assert!(
                (got - want).abs() <= 1e-8 * want.abs().max(1.0),
                "{x0}: {got} vs {want}"
            );
            assert!((got - closed.eval(0.0, x0)).abs() < 1e-12);
        }
    }

    #[test]
    fn tan_derivative_is_sec_squared() {
        let de = Expr::t().tan().diff(Var::T);
        assert!((de.eval(0.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn variable_exponent_uses_log_rule() {
        let e = Expr::x().pow(&Expr::x());
        let de = e.diff(Var::X);
        for x0 in [0.5, 1.5] {
            assert!((de.eval(0.0, x0) - fd(&e, 0.0, x0)).abs() < 1e-7);
        }
    }
}
