use std::collections::HashMap;
use std::sync::Arc;

use super::{Expr, Func, Node, Number, QuadDir, QuadMap, Var};

/// Evaluation point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub t: f64,
    pub x: f64,
}

#[derive(Clone, Debug)]
enum PowKind {
    Int(i32),
    /// rational p/q with odd q: real root of a negative base
    OddRoot(f64, bool),
    Real,
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Var(Var),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, usize, PowKind),
    Func(Func, usize),
    Quad(QuadDir, Arc<QuadMap>, usize),
}

/// An expression flattened into a deduplicated instruction tape.
#[derive(Clone, Debug)]
pub struct Compiled {
    ops: Vec<Op>,
}

fn pow_kind(e: &Expr) -> PowKind {
    match e.as_number() {
        Some(n) => {
            if let Some(k) = n.as_integer() {
                if k.abs() < i32::MAX as i64 {
                    return PowKind::Int(k as i32);
                }
            }
            if let Number::Rational(r) = n {
                if r.denom() % 2 != 0 {
                    return PowKind::OddRoot(n.to_f64(), r.numer() % 2 == 0);
                }
            }
            PowKind::Real
        }
        None => PowKind::Real,
    }
}

impl Compiled {
    pub fn new(e: &Expr) -> Compiled {
        let mut ops = Vec::new();
        let mut index = HashMap::new();
        emit(e, &mut ops, &mut index);
        Compiled { ops }
    }

    /// Value at `p`; NaN marks a point outside the real domain.
    pub fn eval(&self, p: Point) -> f64 {
        let mut regs = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Var(Var::T) => p.t,
                Op::Var(Var::X) => p.x,
                Op::Add(a, b) => regs[*a] + regs[*b],
                Op::Sub(a, b) => regs[*a] - regs[*b],
                Op::Mul(a, b) => regs[*a] * regs[*b],
                Op::Div(a, b) => {
                    let den: f64 = regs[*b];
                    if den == 0.0 {
                        f64::NAN
                    } else {
                        regs[*a] / den
                    }
                }
                Op::Pow(a, b, kind) => power(regs[*a], regs[*b], kind),
                Op::Func(f, a) => f.apply(regs[*a]),
                Op::Quad(dir, m, a) => match dir {
                    QuadDir::Forward => m.forward(regs[*a]),
                    QuadDir::Inverse => m.inverse(regs[*a]),
                },
            };
            regs.push(v);
        }
        let out = *regs.last().unwrap_or(&f64::NAN);
        if out.is_finite() {
            out
        } else {
            f64::NAN
        }
    }

    pub fn eval_tx(&self, t: f64, x: f64) -> f64 {
        self.eval(Point { t, x })
    }

    /// Value at `p` together with the magnitude of the intermediate
    /// quantities it was computed from: a first-order running rounding-error
    /// bound divided by the unit roundoff. For a plain sum this is the sum of
    /// the absolute terms; when large terms cancel it stays large while the
    /// value does not.
    pub fn eval_scaled(&self, p: Point) -> (f64, f64) {
        let mut regs: Vec<(f64, f64)> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let r = |i: &usize| regs[*i];
            let (v, s) = match op {
                Op::Const(c) => (*c, c.abs()),
                Op::Var(Var::T) => (p.t, 0.0),
                Op::Var(Var::X) => (p.x, 0.0),
                Op::Add(a, b) | Op::Sub(a, b) => {
                    let ((va, sa), (vb, sb)) = (r(a), r(b));
                    let v = if matches!(op, Op::Add(..)) { va + vb } else { va - vb };
                    (v, sa + sb + v.abs())
                }
                Op::Mul(a, b) => {
                    let ((va, sa), (vb, sb)) = (r(a), r(b));
                    let v = va * vb;
                    (v, vb.abs() * sa + va.abs() * sb + v.abs())
                }
                Op::Div(a, b) => {
                    let ((va, sa), (vb, sb)) = (r(a), r(b));
                    if vb == 0.0 {
                        (f64::NAN, f64::NAN)
                    } else {
                        let v = va / vb;
                        (v, (sa + v.abs() * sb) / vb.abs() + v.abs())
                    }
                }
                Op::Pow(a, b, kind) => {
                    let ((va, sa), (vb, sb)) = (r(a), r(b));
                    let v = power(va, vb, kind);
                    let da = if va == 0.0 { 0.0 } else { (vb * v / va).abs() };
                    let db = if va > 0.0 { (v * va.ln()).abs() } else { 0.0 };
                    (v, da * sa + db * sb + 2.0 * v.abs())
                }
                Op::Func(f, a) => {
                    let (va, sa) = r(a);
                    let v = f.apply(va);
                    (v, f.slope(va, v) * sa + v.abs())
                }
                Op::Quad(dir, m, a) => {
                    let (va, sa) = r(a);
                    let f = |y: f64| match dir {
                        QuadDir::Forward => m.forward(y),
                        QuadDir::Inverse => m.inverse(y),
                    };
                    let v = f(va);
                    let h = 1e-6 * (1.0 + va.abs());
                    let slope = ((f(va + h) - f(va - h)) / (2.0 * h)).abs();
                    (v, slope * sa + v.abs())
                }
            };
            regs.push((v, s));
        }
        match regs.last() {
            Some(&(v, s)) if v.is_finite() && s.is_finite() => (v, s),
            _ => (f64::NAN, f64::NAN),
        }
    }
}

fn power(b: f64, e: f64, kind: &PowKind) -> f64 {
    match kind {
        PowKind::Int(k) => {
            if b == 0.0 && *k < 0 {
                f64::NAN
            } else {
                b.powi(*k)
            }
        }
        PowKind::OddRoot(p, even_numer) => {
            if b < 0.0 {
                let m = (-b).powf(*p);
                if *even_numer {
                    m
                } else {
                    -m
                }
            } else if b == 0.0 && *p < 0.0 {
                f64::NAN
            } else {
                b.powf(*p)
            }
        }
        PowKind::Real => {
            if b < 0.0 || (b == 0.0 && e <= 0.0) {
                f64::NAN
            } else {
                b.powf(e)
            }
        }
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>, index: &mut HashMap<usize, usize>) -> usize {
    if let Some(&i) = index.get(&e.id()) {
        return i;
    }
    let op = match e.node() {
        Node::Num(n) => Op::Const(n.to_f64()),
        Node::Var(v) => Op::Var(*v),
        Node::Add(a, b) => {
            let (a, b) = (emit(a, ops, index), emit(b, ops, index));
            Op::Add(a, b)
        }
        Node::Sub(a, b) => {
            let (a, b) = (emit(a, ops, index), emit(b, ops, index));
            Op::Sub(a, b)
        }
        Node::Mul(a, b) => {
            let (a, b) = (emit(a, ops, index), emit(b, ops, index));
            Op::Mul(a, b)
        }
        Node::Div(a, b) => {
            let (a, b) = (emit(a, ops, index), emit(b, ops, index));
            Op::Div(a, b)
        }
        Node::Pow(a, b) => {
            let kind = pow_kind(b);
            let (ia, ib) = (emit(a, ops, index), emit(b, ops, index));
            Op::Pow(ia, ib, kind)
        }
        Node::Func(f, a) => Op::Func(*f, emit(a, ops, index)),
        Node::Quad(d, m, a) => Op::Quad(*d, m.clone(), emit(a, ops, index)),
    };
    ops.push(op);
    let i = ops.len() - 1;
    index.insert(e.id(), i);
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_root_of_negative_base_is_real() {
        let e = Expr::x().powr(1, 3);
        assert!((e.eval(0.0, -8.0) + 2.0).abs() < 1e-14);
        let e = Expr::x().powr(2, 3);
        assert!((e.eval(0.0, -8.0) - 4.0).abs() < 1e-13);
        assert!(Expr::x().powr(1, 2).eval(0.0, -1.0).is_nan());
    }

    #[test]
    fn ln_is_abs_aware() {
        let e = Expr::t().ln();
        assert!((e.eval(-1.5, 0.0) - 1.5f64.ln()).abs() < 1e-15);
        assert!(e.eval(0.0, 0.0).is_nan());
    }

    #[test]
    fn shared_subtrees_are_emitted_once() {
        let s = Expr::x().sin();
        let e = s.mul(&s.add(&Expr::t()));
        let c = e.compile();
        assert_eq!(c.ops.len(), 5);
    }
}
