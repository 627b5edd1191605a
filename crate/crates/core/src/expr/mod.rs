//! Symbolic expressions in the two independent variables `t` and `x`.
//!
//! Expressions are immutable, reference-counted trees. Construction goes through
//! the smart constructors ([`Expr::add`], [`Expr::mul`], ...), which apply a small
//! fixed rule set: constant folding, neutral/absorbing elements, merging of
//! numeric powers of a common base and `sign(f)·|f| → f`. There is no canonical
//! form; equality of functions is decided numerically by [`sample::sample_equiv`].
//!
//! Evaluation follows real-variable conventions: `ln` is `ln|·|`, powers with a
//! rational exponent of odd denominator take the real root of a negative base,
//! and everything else outside the real domain evaluates to NaN (a domain
//! exclusion).

mod diff;
mod eval;
mod number;
mod parse;
mod print;
pub mod quad;
pub mod sample;

use std::collections::HashMap;
use std::sync::Arc;

pub use eval::{Compiled, Point};
pub use number::{Number, Rational};
pub use parse::parse_expression;
pub use quad::QuadMap;

/// Independent variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X,
}

impl Var {
    fn mask(self) -> u8 {
        match self {
            Var::T => 1,
            Var::X => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
        }
    }
}

/// Unary function symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Abs,
    Sign,
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Atan,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Abs,
        Func::Sign,
        Func::Exp,
        Func::Ln,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Atan,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// `|f'(v)|` given `fv = f(v)`; zero for the piecewise-constant sign.
    pub fn slope(self, v: f64, fv: f64) -> f64 {
        match self {
            Func::Abs => 1.0,
            Func::Sign => 0.0,
            Func::Exp => fv.abs(),
            Func::Ln => 1.0 / v.abs(),
            Func::Sin => v.cos().abs(),
            Func::Cos => v.sin().abs(),
            Func::Tan => 1.0 + fv * fv,
            Func::Atan => 1.0 / (1.0 + v * v),
            Func::Sqrt => 0.5 / fv.abs(),
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Abs => v.abs(),
            Func::Sign => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    // derivative of |f| is undefined at 0
                    f64::NAN
                }
            }
            Func::Exp => v.exp(),
            Func::Ln => {
                if v == 0.0 {
                    f64::NAN
                } else {
                    v.abs().ln()
                }
            }
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Atan => v.atan(),
            Func::Sqrt => {
                if v < 0.0 {
                    f64::NAN
                } else {
                    v.sqrt()
                }
            }
        }
    }
}

/// Direction of a quadrature map node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadDir {
    /// `F(x) = ∫_{x0}^{x} dξ / C(ξ)`
    Forward,
    /// `F⁻¹`
    Inverse,
}

#[derive(Debug)]
pub enum Node {
    Num(Number),
    Var(Var),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Func(Func, Expr),
    Quad(QuadDir, Arc<QuadMap>, Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    deps: u8,
}

/// Immutable expression handle; cloning is a reference-count bump.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.deps != other.0.deps {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Num(a), Node::Num(b)) => a == b,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d))
            | (Node::Div(a, b), Node::Div(c, d))
            | (Node::Pow(a, b), Node::Pow(c, d)) => a == c && b == d,
            (Node::Func(f, a), Node::Func(g, b)) => f == g && a == b,
            (Node::Quad(d1, m1, a), Node::Quad(d2, m2, b)) => {
                d1 == d2 && (Arc::ptr_eq(m1, m2) || **m1 == **m2) && a == b
            }
            _ => false,
        }
    }
}

fn deps_of(node: &Node) -> u8 {
    match node {
        Node::Num(_) => 0,
        Node::Var(v) => v.mask(),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => a.0.deps | b.0.deps,
        Node::Func(_, a) | Node::Quad(_, _, a) => a.0.deps,
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::float(v)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<Number> for Expr {
    fn from(n: Number) -> Self {
        Expr::num(n)
    }
}

impl Expr {
    fn raw(node: Node) -> Expr {
        let deps = deps_of(&node);
        Expr(Arc::new(Inner { node, deps }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn num(n: Number) -> Expr {
        Expr::raw(Node::Num(n))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(Number::int(n))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::num(Number::ratio(p, q))
    }

    /// Float literal; integral values of moderate size are stored exactly.
    pub fn float(v: f64) -> Expr {
        assert!(v.is_finite(), "non-finite literal {v}");
        if v.fract() == 0.0 && v.abs() < 1e15 {
            Expr::int(v as i64)
        } else {
            Expr::num(Number::Float(v))
        }
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn t() -> Expr {
        Expr::raw(Node::Var(Var::T))
    }

    pub fn x() -> Expr {
        Expr::raw(Node::Var(Var::X))
    }

    pub fn var(v: Var) -> Expr {
        Expr::raw(Node::Var(v))
    }

    pub fn as_number(&self) -> Option<Number> {
        match self.node() {
            Node::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.as_number().map(Number::to_f64)
    }

    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    pub fn is_constant(&self) -> bool {
        self.0.deps == 0
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.0.deps & v.mask() != 0
    }

    // ---- smart constructors ----

    pub fn add(&self, other: &Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_number(), other.as_number()) {
            if let Some(n) = a.add(b) {
                return Expr::num(n);
            }
        }
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // a + (-c)·e → a - c·e keeps printed forms short
        if let Node::Mul(c, e) = other.node() {
            if let Some(n) = c.as_number() {
                if n.is_negative() {
                    return self.sub(&Expr::num(n.neg()).mul(e));
                }
            }
        }
        Expr::raw(Node::Add(self.clone(), other.clone()))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_number(), other.as_number()) {
            if let Some(n) = a.sub(b) {
                return Expr::num(n);
            }
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.neg();
        }
        if Arc::ptr_eq(&self.0, &other.0) {
            return Expr::zero();
        }
        Expr::raw(Node::Sub(self.clone(), other.clone()))
    }

    pub fn neg(&self) -> Expr {
        if let Some(n) = self.as_number() {
            return Expr::num(n.neg());
        }
        Expr::int(-1).mul(self)
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let (a, b) = (self, other);
        if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
            if let Some(n) = x.mul(y) {
                return Expr::num(n);
            }
        }
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b.clone();
        }
        if b.is_one() {
            return a.clone();
        }
        // constants to the left
        if b.as_number().is_some() && a.as_number().is_none() {
            return b.mul(a);
        }
        if let Some(ca) = a.as_number() {
            if let Node::Mul(l, r) = b.node() {
                if let Some(cb) = l.as_number() {
                    if let Some(n) = ca.mul(cb) {
                        return Expr::num(n).mul(r);
                    }
                }
            }
        }
        // sign(f)·|f| → f
        if let (Node::Func(Func::Sign, f), Node::Func(Func::Abs, g))
        | (Node::Func(Func::Abs, g), Node::Func(Func::Sign, f)) = (a.node(), b.node())
        {
            if f == g {
                return f.clone();
            }
        }
        // f^p · f^q → f^(p+q) for numeric exponents
        let (base_a, exp_a) = a.power_parts();
        let (base_b, exp_b) = b.power_parts();
        if base_a == base_b && a.as_number().is_none() {
            if let (Some(p), Some(q)) = (exp_a, exp_b) {
                if let Some(s) = p.add(q) {
                    return base_a.pow(&Expr::num(s));
                }
            }
        }
        Expr::raw(Node::Mul(a.clone(), b.clone()))
    }

    /// Base and numeric exponent of a power (`f` is `f^1`).
    fn power_parts(&self) -> (Expr, Option<Number>) {
        match self.node() {
            Node::Pow(b, e) => (b.clone(), e.as_number()),
            _ => (self.clone(), Some(Number::ONE)),
        }
    }

    /// Division; panics on a literal zero denominator, which the parser rejects
    /// before construction.
    pub fn div(&self, other: &Expr) -> Expr {
        assert!(!other.is_zero(), "division by literal zero");
        if let (Some(a), Some(b)) = (self.as_number(), other.as_number()) {
            if let Some(n) = a.div(b) {
                return Expr::num(n);
            }
        }
        if self.is_zero() {
            return Expr::zero();
        }
        if other.is_one() {
            return self.clone();
        }
        if Arc::ptr_eq(&self.0, &other.0) {
            return Expr::one();
        }
        if let Some(b) = other.as_number() {
            if let Some(inv) = Number::ONE.div(b) {
                if matches!(b, Number::Rational(_)) {
                    return Expr::num(inv).mul(self);
                }
            }
        }
        Expr::raw(Node::Div(self.clone(), other.clone()))
    }

    pub fn recip(&self) -> Expr {
        Expr::one().div(self)
    }

    pub fn pow(&self, exponent: &Expr) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return self.clone();
        }
        if let (Some(b), Some(e)) = (self.as_number(), exponent.as_number()) {
            if let Some(k) = e.as_integer() {
                if let Some(n) = b.powi(k) {
                    return Expr::num(n);
                }
            }
            if let Number::Float(_) = e {
                let v = b.to_f64().powf(e.to_f64());
                if v.is_finite() && b.to_f64() > 0.0 {
                    return Expr::float(v);
                }
            }
        }
        if self.is_one() {
            return Expr::one();
        }
        // (f^p)^k → f^(pk) for integer k
        if let (Node::Pow(b, p), Some(k)) = (self.node(), exponent.as_number()) {
            if let (Some(p), Some(_)) = (p.as_number(), k.as_integer()) {
                if let Some(prod) = p.mul(k) {
                    return b.pow(&Expr::num(prod));
                }
            }
        }
        Expr::raw(Node::Pow(self.clone(), exponent.clone()))
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.pow(&Expr::int(k))
    }

    pub fn powr(&self, p: i64, q: i64) -> Expr {
        self.pow(&Expr::ratio(p, q))
    }

    pub fn powf(&self, e: f64) -> Expr {
        self.pow(&Expr::float(e))
    }

    pub fn apply(&self, f: Func) -> Expr {
        if let Some(n) = self.as_number() {
            if let Some(folded) = fold_func(f, n) {
                return folded;
            }
        }
        match (f, self.node()) {
            (Func::Abs, Node::Func(Func::Abs, _)) => return self.clone(),
            (Func::Abs, Node::Func(Func::Exp, _)) => return self.clone(),
            (Func::Ln, Node::Func(Func::Exp, a)) => return a.clone(),
            (Func::Ln, Node::Func(Func::Abs, a)) => return a.apply(Func::Ln),
            (Func::Sign, Node::Func(Func::Sign, _)) => return self.clone(),
            (Func::Sign, Node::Func(Func::Exp, _)) => return Expr::one(),
            _ => {}
        }
        Expr::raw(Node::Func(f, self.clone()))
    }

    pub fn abs(&self) -> Expr {
        self.apply(Func::Abs)
    }
    pub fn sign(&self) -> Expr {
        self.apply(Func::Sign)
    }
    pub fn exp(&self) -> Expr {
        self.apply(Func::Exp)
    }
    pub fn ln(&self) -> Expr {
        self.apply(Func::Ln)
    }
    pub fn sin(&self) -> Expr {
        self.apply(Func::Sin)
    }
    pub fn cos(&self) -> Expr {
        self.apply(Func::Cos)
    }
    pub fn tan(&self) -> Expr {
        self.apply(Func::Tan)
    }
    pub fn atan(&self) -> Expr {
        self.apply(Func::Atan)
    }
    pub fn sqrt(&self) -> Expr {
        self.apply(Func::Sqrt)
    }

    pub fn quad(dir: QuadDir, map: Arc<QuadMap>, arg: &Expr) -> Expr {
        Expr::raw(Node::Quad(dir, map, arg.clone()))
    }

    /// Replace every occurrence of `v` by `repl`.
    pub fn subst(&self, v: Var, repl: &Expr) -> Expr {
        let mut memo = HashMap::new();
        subst_rec(self, v, repl, &mut memo)
    }

    /// Simultaneous substitution of both variables.
    pub fn subst2(&self, t: &Expr, x: &Expr) -> Expr {
        let mut memo = HashMap::new();
        subst2_rec(self, t, x, &mut memo)
    }

    /// Exact symbolic derivative.
    pub fn diff(&self, v: Var) -> Expr {
        diff::differentiate(self, v)
    }

    pub fn diff_n(&self, v: Var, n: usize) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff(v))
    }

    /// Number of distinct nodes.
    pub fn size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.node() {
                Node::Num(_) | Node::Var(_) => {}
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Node::Func(_, a) | Node::Quad(_, _, a) => stack.push(a.clone()),
            }
        }
        seen.len()
    }

    /// True when the expression is free of quadrature nodes and prints in the
    /// plain grammar.
    pub fn is_plain(&self) -> bool {
        match self.node() {
            Node::Num(_) | Node::Var(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.is_plain() && b.is_plain()
            }
            Node::Func(_, a) => a.is_plain(),
            Node::Quad(..) => false,
        }
    }

    pub fn compile(&self) -> Compiled {
        Compiled::new(self)
    }

    /// One-off evaluation; use [`Expr::compile`] for repeated evaluation.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.compile().eval(Point { t, x })
    }
}

fn fold_func(f: Func, n: Number) -> Option<Expr> {
    let exact = match f {
        Func::Abs => Some(if n.is_negative() { n.neg() } else { n }),
        Func::Sign if !n.is_zero() => Some(if n.is_negative() { Number::int(-1) } else { Number::ONE }),
        Func::Exp | Func::Cos if n.is_zero() => Some(Number::ONE),
        Func::Sin | Func::Tan | Func::Atan | Func::Sqrt if n.is_zero() => Some(Number::ZERO),
        Func::Ln if n.is_one() => Some(Number::ZERO),
        Func::Sqrt => n.as_rational().and_then(exact_sqrt),
        _ => None,
    };
    if let Some(v) = exact {
        return Some(Expr::num(v));
    }
    if let Number::Float(v) = n {
        let out = f.apply(v);
        if out.is_finite() {
            return Some(Expr::float(out));
        }
    }
    None
}

fn exact_sqrt(r: Rational) -> Option<Number> {
    if *r.numer() < 0 {
        return None;
    }
    let isqrt = |n: i64| {
        let s = (n as f64).sqrt().round() as i64;
        (s * s == n).then_some(s)
    };
    Some(Number::ratio(isqrt(*r.numer())?, isqrt(*r.denom())?))
}

fn rebuild(e: &Expr, kids: &[Expr]) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Var(_) => e.clone(),
        Node::Add(..) => kids[0].add(&kids[1]),
        Node::Sub(..) => kids[0].sub(&kids[1]),
        Node::Mul(..) => kids[0].mul(&kids[1]),
        Node::Div(..) => kids[0].div(&kids[1]),
        Node::Pow(..) => kids[0].pow(&kids[1]),
        Node::Func(f, _) => kids[0].apply(*f),
        Node::Quad(d, m, _) => Expr::quad(*d, m.clone(), &kids[0]),
    }
}

pub(crate) fn children(e: &Expr) -> Vec<Expr> {
    match e.node() {
        Node::Num(_) | Node::Var(_) => vec![],
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            vec![a.clone(), b.clone()]
        }
        Node::Func(_, a) | Node::Quad(_, _, a) => vec![a.clone()],
    }
}

fn subst_rec(e: &Expr, v: Var, repl: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if !e.depends_on(v) {
        return e.clone();
    }
    if let Some(r) = memo.get(&e.id()) {
        return r.clone();
    }
    let out = match e.node() {
        Node::Var(w) if *w == v => repl.clone(),
        _ => {
            let kids: Vec<Expr> = children(e).iter().map(|k| subst_rec(k, v, repl, memo)).collect();
            rebuild(e, &kids)
        }
    };
    memo.insert(e.id(), out.clone());
    out
}

fn subst2_rec(e: &Expr, t: &Expr, x: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if e.is_constant() {
        return e.clone();
    }
    if let Some(r) = memo.get(&e.id()) {
        return r.clone();
    }
    let out = match e.node() {
        Node::Var(Var::T) => t.clone(),
        Node::Var(Var::X) => x.clone(),
        _ => {
            let kids: Vec<Expr> = children(e).iter().map(|k| subst2_rec(k, t, x, memo)).collect();
            rebuild(e, &kids)
        }
    };
    memo.insert(e.id(), out.clone());
    out
}

macro_rules! impl_op {
    ($tr:ident, $m:ident, $call:ident) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$call(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$call(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$call(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$call(self, &rhs)
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::$call(&self, &Expr::float(rhs))
            }
        }
        impl std::ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::$call(self, &Expr::float(rhs))
            }
        }
        impl std::ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$call(&Expr::float(self), &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$call(&Expr::float(self), rhs)
            }
        }
    };
}

impl_op!(Add, add, add);
impl_op!(Sub, sub, sub);
impl_op!(Mul, mul, mul);
impl_op!(Div, div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neutral_elements_fold() {
        let x = Expr::x();
        assert_eq!(&x + &Expr::zero(), x);
        assert_eq!(&x * &Expr::one(), x);
        assert!((&x * &Expr::zero()).is_zero());
        assert_eq!(x.powi(1), x);
    }

    #[test]
    fn powers_of_common_base_merge() {
        let x = Expr::x();
        let e = x.powi(2).mul(&x.powr(1, 2));
        assert_eq!(e, x.powr(5, 2));
        assert_eq!(x.mul(&x), x.powi(2));
    }

    #[test]
    fn sign_abs_fuse() {
        let f = Expr::x() + 1.0;
        assert_eq!(f.sign().mul(&f.abs()), f);
    }

    #[test]
    fn constants_collect_to_the_left() {
        let e = Expr::int(2).mul(&Expr::x().mul(&Expr::int(3)));
        match e.node() {
            Node::Mul(c, _) => assert_eq!(c.as_number(), Some(Number::int(6))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn substitution_replaces_variable() {
        let e = Expr::x().powi(2) + Expr::t();
        let s = e.subst(Var::X, &(Expr::t() + 1.0));
        assert!((s.eval(2.0, 0.0) - 11.0).abs() < 1e-15);
        assert!(!s.depends_on(Var::X));
    }
}
