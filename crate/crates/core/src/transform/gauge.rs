//! Stationary point transformations `t̃ = c1 t`, `x̃ = X(x)`, `ũ = c3 u + U⁰(x)`
//! and the gauge `C = 1`, `A¹ = 0`.

use std::sync::Arc;

use super::bell::{partial_bell, MAX_ORDER};
use crate::error::{Error, Result};
use crate::expr::sample::SampleBox;
use crate::expr::{Expr, Node, Number, QuadDir, QuadMap, Var};
use crate::model::{ReducedEquation, StationaryGeneralEquation};

#[derive(Clone, Debug)]
pub struct GaugeTransformation {
    /// `X(x)`.
    pub x_map: Expr,
    /// `X⁻¹(x̃)`.
    pub x_inv: Expr,
    pub u0: Expr,
    pub c1: f64,
    pub c3: f64,
    /// Source x-interval.
    pub x_domain: (f64, f64),
}

/// Result of gauging: the reduced equation, the map used, and the computed
/// `C̃` and `Ã¹` (before they are replaced by 1 and 0).
#[derive(Clone, Debug)]
pub struct GaugeResult {
    pub equation: ReducedEquation,
    pub map: GaugeTransformation,
    pub c_tilde: Expr,
    pub a1_tilde: Expr,
}

fn split_constant(e: &Expr) -> (f64, Expr) {
    match e.node() {
        Node::Num(n) => (n.to_f64(), Expr::one()),
        Node::Mul(k, rest) if k.is_constant() => match k.as_f64() {
            Some(v) => (v, rest.clone()),
            None => (1.0, e.clone()),
        },
        _ => (1.0, e.clone()),
    }
}

/// `x + β` → β.
fn shift_of(e: &Expr) -> Option<f64> {
    match e.node() {
        Node::Var(Var::X) => Some(0.0),
        Node::Add(a, b) if matches!(a.node(), Node::Var(Var::X)) => b.as_f64(),
        Node::Add(a, b) if matches!(b.node(), Node::Var(Var::X)) => a.as_f64(),
        Node::Sub(a, b) if matches!(a.node(), Node::Var(Var::X)) => b.as_f64().map(|v| -v),
        _ => None,
    }
}

fn positive_on(e: &Expr, dom: (f64, f64)) -> bool {
    let c = e.compile();
    (0..=32).all(|i| c.eval_tx(0.0, dom.0 + (dom.1 - dom.0) * i as f64 / 32.0) > 0.0)
}

/// Exact primitive of `1/C` and its inverse for the constant, power,
/// exponential and `1 + y²` families.
fn exact_primitive(c: &Expr, dom: (f64, f64)) -> Option<(Expr, Expr)> {
    let (k, rest) = split_constant(c);
    if k == 0.0 || !k.is_finite() {
        return None;
    }
    let x = Expr::x();
    let f = Expr::float;
    if rest.is_one() {
        return Some((x.div(&f(k)), f(k).mul(&x)));
    }
    // k·y or k·y^p with y = x + β > 0
    let power = match rest.node() {
        Node::Pow(y, p) => shift_of(y).zip(p.as_number()).map(|(b, p)| (b, y.clone(), p)),
        _ => shift_of(&rest).map(|b| (b, rest.clone(), Number::ONE)),
    };
    if let Some((beta, y, p)) = power {
        if !positive_on(&y, dom) {
            return None;
        }
        let yt = |e: Expr| e.sub(&f(beta));
        if p.is_one() {
            return Some((y.ln().div(&f(k)), yt(f(k).mul(&x).exp())));
        }
        let q = Expr::one().sub(&Expr::num(p));
        let kq = f(k).mul(&q);
        return Some((y.pow(&q).div(&kq), yt(kq.mul(&x).pow(&q.recip()))));
    }
    // k·exp(λx)
    if let Node::Func(crate::expr::Func::Exp, arg) = rest.node() {
        let (lam, inner) = split_constant(arg);
        if matches!(inner.node(), Node::Var(Var::X)) && lam != 0.0 {
            let kl = f(k * lam);
            let fwd = f(-lam).mul(&x).exp().neg().div(&kl);
            let inv = kl.neg().mul(&x).ln().div(&f(-lam));
            return Some((fwd, inv));
        }
    }
    // k·(1 + y²)
    if let Node::Add(one, sq) = rest.node() {
        if one.is_one() {
            if let Node::Pow(y, two) = sq.node() {
                if two.as_number().and_then(Number::as_integer) == Some(2) {
                    if let Some(beta) = shift_of(y) {
                        let fwd = y.atan().div(&f(k));
                        let inv = f(k).mul(&x).tan().sub(&f(beta));
                        return Some((fwd, inv));
                    }
                }
            }
        }
    }
    None
}

fn check_one_sign(c: &Expr, dom: (f64, f64)) -> Result<()> {
    let cc = c.compile();
    let mut sign = None;
    for i in 0..=64 {
        let x = dom.0 + (dom.1 - dom.0) * i as f64 / 64.0;
        let v = cc.eval_tx(0.0, x);
        if !v.is_finite() || v == 0.0 {
            return Err(Error::domain(format!("C vanishes or is undefined at x = {x}")));
        }
        match sign {
            None => sign = Some(v.signum()),
            Some(s) if s != v.signum() => return Err(Error::domain("C changes sign on the domain")),
            _ => {}
        }
    }
    Ok(())
}

impl GaugeTransformation {
    pub fn identity(x_domain: (f64, f64)) -> GaugeTransformation {
        GaugeTransformation {
            x_map: Expr::x(),
            x_inv: Expr::x(),
            u0: Expr::zero(),
            c1: 1.0,
            c3: 1.0,
            x_domain,
        }
    }

    /// Map `X = ∫dx/C`, exact when the family is recognised and by quadrature
    /// otherwise.
    pub fn primitive(c: &Expr, dom: (f64, f64)) -> Result<(Expr, Expr)> {
        check_one_sign(c, dom)?;
        if let Some(pair) = exact_primitive(c, dom) {
            return Ok(pair);
        }
        let map = Arc::new(QuadMap::new(c.clone(), 0.5 * (dom.0 + dom.1), dom.0, dom.1));
        Ok((
            Expr::quad(QuadDir::Forward, map.clone(), &Expr::x()),
            Expr::quad(QuadDir::Inverse, map, &Expr::x()),
        ))
    }

    /// Image interval of the source x-domain.
    pub fn image_domain(&self) -> (f64, f64) {
        let c = self.x_map.compile();
        let (a, b) = (c.eval_tx(0.0, self.x_domain.0), c.eval_tx(0.0, self.x_domain.1));
        (a.min(b), a.max(b))
    }

    /// Pushforward `ũ(t̃, x̃) = c3 u(t̃/c1, X⁻¹(x̃)) + U⁰(X⁻¹(x̃))`.
    pub fn pushforward(&self, u: &Expr) -> Expr {
        let t = Expr::t().div(&Expr::float(self.c1));
        let xs = &self.x_inv;
        Expr::float(self.c3)
            .mul(&u.subst2(&t, xs))
            .add(&self.u0.subst(Var::X, xs))
    }

    /// Apply to a stationary equation; coefficients of the result are in x̃.
    pub fn apply(&self, eq: &StationaryGeneralEquation) -> Result<StationaryGeneralEquation> {
        let r = eq.order;
        if r > MAX_ORDER {
            return Err(Error::domain(format!("order {r} exceeds the cap {MAX_ORDER}")));
        }
        let (c1, c3) = (Expr::float(self.c1), Expr::float(self.c3));
        let c13 = c1.mul(&c3);
        let d: Vec<Expr> = (1..=r).map(|i| self.x_map.diff_n(Var::X, i)).collect();
        let xp = &d[0];
        let bell = partial_bell(&d, r);
        let u0d: Vec<Expr> = (0..=r).map(|k| self.u0.diff_n(Var::X, k)).collect();
        let mut a = vec![Expr::zero(); r + 1];
        for (m, am) in a.iter_mut().enumerate().skip(1) {
            let mut acc = Expr::zero();
            for k in m..=r {
                acc = acc.add(&eq.a[k].mul(&bell[k][m]));
            }
            *am = acc.div(&c1);
        }
        a[1] = a[1].add(&eq.c.mul(&self.u0).mul(xp).div(&c13));
        a[0] = eq.a[0].div(&c1).add(&eq.c.mul(&u0d[1]).div(&c13));
        let mut b = c3.mul(&eq.b).div(&c1);
        for k in 0..=r {
            b = b.sub(&eq.a[k].mul(&u0d[k]).div(&c1));
        }
        b = b.sub(&eq.c.mul(&self.u0).mul(&u0d[1]).div(&c13));
        let c_tilde = eq.c.mul(xp).div(&c13);
        let back = |e: &Expr| e.subst(Var::X, &self.x_inv);
        let img = self.image_domain();
        Ok(StationaryGeneralEquation {
            order: r,
            c: back(&c_tilde),
            a: a.iter().map(back).collect(),
            b: back(&b),
            domain: SampleBox::new(eq.domain.t, img),
        })
    }

    /// Inverse map (same family, `c1 → 1/c1`, `c3 → 1/c3`).
    pub fn invert(&self) -> GaugeTransformation {
        GaugeTransformation {
            x_map: self.x_inv.clone(),
            x_inv: self.x_map.clone(),
            u0: self.u0.subst(Var::X, &self.x_inv).neg().div(&Expr::float(self.c3)),
            c1: 1.0 / self.c1,
            c3: 1.0 / self.c3,
            x_domain: self.image_domain(),
        }
    }
}

/// Gauge a stationary equation to `C = 1`, `A¹ = 0`.
pub fn gauge_stationary(eq: &StationaryGeneralEquation) -> Result<GaugeResult> {
    let dom = eq.domain.x;
    let (x_map, x_inv) = GaugeTransformation::primitive(&eq.c, dom)?;
    let mut u0 = Expr::zero();
    for k in 1..=eq.order {
        u0 = u0.sub(&eq.a[k].mul(&x_map.diff_n(Var::X, k)));
    }
    let map = GaugeTransformation {
        x_map,
        x_inv,
        u0,
        c1: 1.0,
        c3: 1.0,
        x_domain: dom,
    };
    let out = map.apply(eq)?;
    let equation = ReducedEquation::new(out.a[2..].to_vec(), out.a[0].clone(), out.b.clone(), out.domain)?;
    Ok(GaugeResult {
        equation,
        map,
        c_tilde: out.c,
        a1_tilde: out.a[1].clone(),
    })
}

impl StationaryGeneralEquation {
    /// View a reduced equation as a stationary one with `C = 1`, `A¹ = 0`.
    pub fn from_reduced(eq: &ReducedEquation) -> StationaryGeneralEquation {
        let mut a = vec![eq.a0.clone(), Expr::zero()];
        a.extend(eq.a.iter().cloned());
        StationaryGeneralEquation {
            order: eq.order,
            c: Expr::one(),
            a,
            b: eq.b.clone(),
            domain: eq.domain,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::expr::sample::{rel_dev, sample_equiv, Halton};

    fn pe(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    fn st(c: &str, a: &[&str], b: &str) -> StationaryGeneralEquation {
        StationaryGeneralEquation::new(pe(c), a.iter().map(|s| pe(s)).collect(), pe(b), SampleBox::standard()).unwrap()
    }

    fn zero(e: &Expr, bx: SampleBox) -> bool {
        sample_equiv(e, &Expr::zero(), bx, 64, 1e-10, 2).unwrap().equal
    }

    fn covariance(eq: &StationaryGeneralEquation, res: &GaugeResult, u: &Expr) -> f64 {
        let ut = res.map.pushforward(u);
        let rt = res.equation.residual_expr(&ut).compile();
        let rs = eq.residual_expr(u).compile();
        let x = res.map.x_map.compile();
        let mut worst: f64 = 0.0;
        for p in Halton::new(eq.domain, 9).take(60) {
            let q = crate::expr::Point { t: p.t, x: x.eval(p) };
            worst = worst.max(rel_dev(rt.eval(q), rs.eval(p)));
        }
        worst
    }

    #[test]
    fn identity_gauge() {
        let eq = st("1", &["0", "0", "1"], "0");
        let res = gauge_stationary(&eq).unwrap();
        assert!(zero(&res.equation.a[0].sub(&Expr::one()), res.equation.domain));
        assert!(zero(&res.a1_tilde, res.equation.domain));
    }

    #[test]
    fn constant_c_example() {
        let eq = st("2", &["0", "1", "1"], "0");
        let res = gauge_stationary(&eq).unwrap();
        let bx = res.equation.domain;
        assert!(zero(&res.equation.a[0].sub(&Expr::ratio(1, 4)), bx));
        assert!(zero(&res.equation.a0, bx));
        assert!(zero(&res.equation.b, bx));
        assert!(zero(&res.map.u0.sub(&Expr::ratio(-1, 2)), SampleBox::standard()));
        assert!(zero(&res.c_tilde.sub(&Expr::one()), bx));
    }

    #[test]
    fn constant_first_order_term_is_absorbed() {
        let eq = st("1", &["0", "3", "1"], "0");
        let res = gauge_stationary(&eq).unwrap();
        let bx = res.equation.domain;
        assert!(zero(&res.equation.a[0].sub(&Expr::one()), bx));
        assert!(zero(&res.equation.a0, bx));
        assert!(zero(&res.equation.b, bx));
        assert!(zero(&res.map.u0.add(&Expr::int(3)), SampleBox::standard()));
    }

    #[test]
    fn covariance_exact_and_quadrature_paths() {
        let u = pe("exp(-t)*sin(3*x) + x^2/10");
        for c in ["2*x^2", "3*(x+1)", "exp(x/2)", "1 + x^2", "2 + sin(x)"] {
            let eq = st(c, &["x", "1/(1+x)", "1 + x^2", "x/5"], "x^2 - 1");
            let res = gauge_stationary(&eq).unwrap();
            let bx = res.equation.domain;
            assert!(zero(&res.a1_tilde, bx), "{c}");
            assert!(zero(&res.c_tilde.sub(&Expr::one()), bx), "{c}");
            let dev = covariance(&eq, &res, &u);
            assert!(dev < 1e-8, "{c}: {dev}");
        }
    }

    #[test]
    fn inverse_recovers_source() {
        let eq = st("exp(x/2)", &["x", "1/(1+x)", "1 + x^2"], "x^2 - 1");
        let res = gauge_stationary(&eq).unwrap();
        let back = res
            .map
            .invert()
            .apply(&StationaryGeneralEquation::from_reduced(&res.equation))
            .unwrap();
        for k in 0..=2 {
            assert!(zero(&back.a[k].sub(&eq.a[k]), eq.domain), "A{k}");
        }
        assert!(zero(&back.b.sub(&eq.b), eq.domain));
        assert!(zero(&back.c.sub(&eq.c), eq.domain));
    }

    #[test]
    fn sign_change_is_rejected() {
        let eq = st("x - 1", &["0", "0", "1"], "0");
        assert!(matches!(gauge_stationary(&eq), Err(Error::Domain(_))));
    }
}
