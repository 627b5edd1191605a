//! Oracles: residual covariance, defining ODEs of the group families,
//! group axioms, and the catalogue audit.

mod audit;

use crate::error::{Error, Result};
use crate::expr::sample::{admissible_points, rel_dev, sample_equiv, sample_residual, scaled_dev, SampleBox};
use crate::expr::{Expr, Point, Var};
use crate::groups::{
    act, iv1_x0, loglike_params, loglike_residual, realize, realize_on, recover, schwarzian, GroupElement,
};
use crate::model::{instantiate_normal_form, ReducedEquation, StationaryGeneralEquation, SubclassParams, Tag};
use crate::report::{fmt_f64, Report};
use crate::transform::{FiberTransformation, GaugeResult};

pub use audit::{audit_paper, Audit};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_dev: f64,
    pub tol: f64,
    pub worst: Option<Point>,
    /// Human-readable note; names the mismatch on failure.
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, max_dev: f64, tol: f64, worst: Option<Point>) -> Check {
        Check {
            name: name.into(),
            passed: max_dev <= tol,
            max_dev,
            tol,
            worst,
            detail: String::new(),
        }
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new();
        r.set("check", self.name.as_str())
            .set("passed", self.passed)
            .set("max_dev", self.max_dev)
            .set("tol", self.tol);
        if let Some(p) = self.worst {
            r.set("worst_t", p.t).set("worst_x", p.x);
        }
        if !self.detail.is_empty() {
            r.set("detail", self.detail.as_str());
        }
        r
    }

    /// Fold several checks into one with the largest deviation.
    fn worst_of(name: &str, checks: Vec<Check>, tol: f64) -> Check {
        let mut out = Check::new(name, 0.0, tol, None);
        for c in checks {
            if c.max_dev > out.max_dev || c.max_dev.is_nan() || (!c.passed && out.passed) {
                out.max_dev = c.max_dev;
                out.worst = c.worst;
                out.detail = c.name.clone();
            }
            out.passed &= c.passed;
        }
        out
    }
}

/// Result of the residual covariance oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariance {
    pub check: Check,
    /// Range of `X¹/T_t²` over the sample.
    pub factor: (f64, f64),
    pub samples: usize,
}

impl Covariance {
    pub fn report(&self) -> Report {
        let mut r = self.check.report();
        r.set("factor_min", self.factor.0)
            .set("factor_max", self.factor.1)
            .set("samples", self.samples);
        r
    }
}

/// `residual_tgt(ũ)(T(t), X¹x + X⁰) = (X¹/T_t²)·residual_src(u)(t, x)` at `n`
/// points of `bx`, where `tgt` is the image of `src` and `ũ` the pushforward
/// of `u`.
pub fn residual_covariance_check(
    src: &ReducedEquation,
    tr: &FiberTransformation,
    u: &Expr,
    bx: SampleBox,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<Covariance> {
    covariance_with(src, tr, u, &tr.pushforward(u), bx, n, tol, seed)
}

/// As [`residual_covariance_check`] with an explicit target function
/// `ũ(t, x̃)`, for testing candidate u-actions.
#[allow(clippy::too_many_arguments)]
pub fn covariance_with(
    src: &ReducedEquation,
    tr: &FiberTransformation,
    u: &Expr,
    u_tilde: &Expr,
    bx: SampleBox,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<Covariance> {
    let tgt = tr.apply_reduced(src);
    let lhs = tgt.residual_expr(u_tilde).compile();
    let rs = src.residual_expr(u).compile();
    let fac = tr.x1.div(&tr.t.diff(Var::T).powi(2)).compile();
    let img = tr.x_image().compile();
    let at_img = |p: Point| Point { t: p.t, x: img.eval(p) };
    let pts = admissible_points(bx, n, seed, |p| {
        lhs.eval_scaled(at_img(p)).1.is_finite() && rs.eval_scaled(p).1.is_finite() && fac.eval(p).is_finite()
    })?;
    let mut worst = (0.0, None, 0.0, 0.0);
    let mut factor = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        let k = fac.eval(*p);
        factor = (factor.0.min(k), factor.1.max(k));
        let (l, sl) = lhs.eval_scaled(at_img(*p));
        let (r, sr) = rs.eval_scaled(*p);
        let d = scaled_dev((l, sl), (k * r, k.abs() * sr));
        let r = k * r;
        if worst.1.is_none() || d > worst.0 {
            worst = (d, Some(*p), l, r);
        }
    }
    let mut check = Check::new("residual-covariance", worst.0, tol, worst.1);
    if !check.passed {
        if let Some(p) = worst.1 {
            check.detail = format!(
                "residual_tgt(ũ) = {} but (X¹/T_t²)·residual_src(u) = {} at t = {}, x = {}",
                fmt_f64(worst.2),
                fmt_f64(worst.3),
                fmt_f64(p.t),
                fmt_f64(p.x)
            );
        }
    }
    Ok(Covariance {
        check,
        factor,
        samples: pts.len(),
    })
}

/// Covariance of a gauge map: `residual_tgt(ũ)(t̃, X(x)) = (c3/c1)·residual_src(u)`,
/// with `t̃ = c1 t`.
pub fn gauge_covariance_check(
    src: &StationaryGeneralEquation,
    gauge: &GaugeResult,
    u: &Expr,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<Covariance> {
    let map = &gauge.map;
    let ut = map.pushforward(u);
    let lhs = gauge.equation.residual_expr(&ut).compile();
    let rs = src.residual_expr(u).compile();
    let xm = map.x_map.compile();
    let k = map.c3 / map.c1;
    let at_img = |p: Point| Point {
        t: map.c1 * p.t,
        x: xm.eval(p),
    };
    let pts = admissible_points(src.domain, n, seed, |p| {
        lhs.eval_scaled(at_img(p)).1.is_finite() && rs.eval_scaled(p).1.is_finite()
    })?;
    let mut worst = (0.0, None);
    for p in &pts {
        let (r, sr) = rs.eval_scaled(*p);
        let d = scaled_dev(lhs.eval_scaled(at_img(*p)), (k * r, k.abs() * sr));
        if worst.1.is_none() || d > worst.0 {
            worst = (d, Some(*p));
        }
    }
    Ok(Covariance {
        check: Check::new("gauge-covariance", worst.0, tol, worst.1),
        factor: (k, k),
        samples: pts.len(),
    })
}

/// `(T_tt/T_t)_t − ½(T_tt/T_t)² + 2b − 2b̃T_t²`: the time map between two
/// equations whose gauged coefficient (`b₀` for I00, `b₁` for IV0_2) is `b`
/// and `b̃`.
pub fn schwarzian_relation(t: &Expr, b: f64, b_tilde: f64) -> Expr {
    let f = Expr::float;
    schwarzian(t)
        .add(&f(2.0 * b))
        .sub(&f(2.0 * b_tilde).mul(&t.diff(Var::T).powi(2)))
}

/// `(1/T_t)(X⁰_t/T_t)_t − ã₀X⁰_t/T_t − b̃₁X⁰ − b̃₀ + b₀X¹/T_t²`: the constant
/// part of the `B` condition for the IV subclasses (`B = b₁x + b₀`, constant `A⁰`).
pub fn iv_x0_relation(tr: &FiberTransformation, b0: f64, a0_tilde: f64, b1_tilde: f64, b0_tilde: f64) -> Expr {
    let f = Expr::float;
    let tt = tr.t.diff(Var::T);
    let k0 = tr.x0.diff(Var::T).div(&tt);
    k0.diff(Var::T)
        .div(&tt)
        .sub(&f(a0_tilde).mul(&k0))
        .sub(&f(b1_tilde).mul(&tr.x0))
        .sub(&f(b0_tilde))
        .add(&f(b0).mul(&tr.x1).div(&tt.powi(2)))
}

/// Residual expressions of the defining relations satisfied by `realize(g, θ)`.
pub fn ode_relations(g: &GroupElement, theta: &SubclassParams) -> Result<Vec<(String, Expr)>> {
    let fiber = realize(g, theta)?;
    let target = act(g, theta)?;
    let f = Expr::float;
    let (t, x1) = (&fiber.t, &fiber.x1);
    let d = |e: &Expr| e.diff(Var::T);
    let log_d = |e: &Expr| d(e).div(e);
    let t_ratio = d(&d(t)).div(&d(t));
    let mut out: Vec<(String, Expr)> = Vec::new();
    // X¹ relations `k·X¹_t/X¹ = T_tt/T_t` mean (X¹)^k/T_t is constant
    let x1_power = |k: f64| f(k).mul(&log_d(x1)).sub(&t_ratio);
    match g.tag {
        Tag::I1 | Tag::I01 | Tag::III | Tag::IV0High => {
            let p = loglike_params(g, theta)?;
            out.push(("T: γ = δ/T_t + (1/T_t)_t".into(), loglike_residual(t, p.gamma, p.delta)));
            match g.tag {
                Tag::I1 | Tag::I01 => out.push(("X1: (X¹)^(-α)/T_t const".into(), x1_power(-theta.alpha))),
                Tag::III => out.push(("X1 const".into(), d(x1))),
                _ => {
                    let r = theta.order() as f64;
                    out.push(("X1: (X¹)^r/T_t const".into(), x1_power(r)));
                    out.push((
                        "X0 relation".into(),
                        iv_x0_relation(&fiber, theta.b0, target.a00, target.b1, target.b0),
                    ));
                }
            }
        }
        Tag::I00 | Tag::IV0_2 => {
            let (b, bt) = if g.tag == Tag::I00 {
                (theta.b0, target.b0)
            } else {
                (theta.b1, target.b1)
            };
            out.push(("T: Schwarzian relation".into(), schwarzian_relation(t, b, bt)));
            out.push(("X1: (X¹)²/T_t const".into(), x1_power(2.0)));
            if g.tag == Tag::IV0_2 {
                out.push((
                    "X0 relation".into(),
                    iv_x0_relation(&fiber, theta.b0, 0.0, target.b1, target.b0),
                ));
            }
        }
        Tag::II0 => {
            out.push(("T_tt = 0".into(), d(&d(t))));
            out.push(("(X¹_t/X¹)_t = 0".into(), d(&log_d(x1))));
        }
        Tag::II1 => {
            let l = x1.ln();
            out.push(("T_tt = 0".into(), d(&d(t))));
            out.push((
                "(ln X¹)_tt = (a01/2)(ln X¹)_t".into(),
                d(&d(&l)).sub(&f(theta.a01 / 2.0).mul(&d(&l))),
            ));
        }
        Tag::IV1 => {
            let (x0, _) = iv1_x0(theta, g.c[1], g.c[2], g.c[3]);
            let dn = |n| x0.diff_n(Var::T, n);
            out.push(("T_tt = 0".into(), d(&d(t))));
            out.push(("X1 const".into(), d(x1)));
            out.push((
                "X0: X⁰_ttt − a0 X⁰_tt − b1 X⁰_t = 0".into(),
                dn(3).sub(&f(theta.a00).mul(&dn(2))).sub(&f(theta.b1).mul(&dn(1))),
            ));
            out.push((
                "X0 relation".into(),
                iv_x0_relation(&fiber, theta.b0, target.a00, target.b1, target.b0),
            ));
        }
        Tag::F0 => return Err(Error::domain("F0 has no equivalence group")),
    }
    Ok(out)
}

/// Evaluate every defining relation of `realize(g, θ)` at `n` points of the
/// default box of `θ`.
pub fn ode_family_check(g: &GroupElement, theta: &SubclassParams, n: usize, tol: f64, seed: u64) -> Result<Check> {
    let mut checks = Vec::new();
    for (name, e) in ode_relations(g, theta)? {
        let rep = sample_residual(&e, theta.default_domain(), n, tol, seed)?;
        checks.push(Check::new(name, rep.max_dev, tol, rep.worst));
    }
    let mut out = Check::worst_of("ode-family", checks, tol);
    out.detail = format!("{} [{}]", out.detail, g.branch(theta));
    Ok(out)
}

/// Residual of the classifying conditions of `realize(g, θ)` for the normal
/// form of `act(g, θ)`.
pub fn classifying_check(g: &GroupElement, theta: &SubclassParams, n: usize, tol: f64, seed: u64) -> Result<Check> {
    let phi = realize(g, theta)?;
    let tgt = instantiate_normal_form(&act(g, theta)?)?;
    let mut checks = Vec::new();
    for (name, e) in crate::transform::classifying_residuals(&phi, &tgt).all() {
        let rep = sample_residual(&e, theta.default_domain(), n, tol, seed)?;
        checks.push(Check::new(name, rep.max_dev, tol, rep.worst));
    }
    Ok(Check::worst_of("classifying", checks, tol))
}

/// Outcome of a closure check.
#[derive(Clone, Debug, PartialEq)]
pub struct Closure {
    pub check: Check,
    pub composed: GroupElement,
}

/// Recover `g″` with `realize(g″, θ) = realize(g′, act(g, θ)) ∘ realize(g, θ)`.
pub fn closure_check(g: &GroupElement, g2: &GroupElement, theta: &SubclassParams, tol: f64) -> Result<Closure> {
    let first = realize(g, theta)?;
    let theta1 = act(g, theta)?;
    let phi = realize_on(g2, &theta1, first.image_domain())?.compose(&first);
    let theta2 = act(g2, &theta1)?;
    let (composed, dev) = recover(theta, &phi, &theta2, g)?;
    let mut check = Check::new("closure", dev, tol, None);
    check.detail = composed.to_string();
    Ok(Closure { check, composed })
}

/// The identity element realizes to the identity map and fixes `θ`.
pub fn identity_check(theta: &SubclassParams, tol: f64) -> Result<Check> {
    let g = GroupElement::identity(theta);
    let phi = realize(&g, theta)?;
    let id = FiberTransformation::identity().with_domain(phi.t_domain);
    let dev = crate::groups::recover::fiber_deviation(&phi, &id, phi.t_domain);
    let th = act(&g, theta)?;
    let mut worst = dev;
    for (a, b) in th.a.iter().zip(&theta.a) {
        worst = worst.max(rel_dev(*a, *b));
    }
    for (a, b) in [
        (th.beta, theta.beta),
        (th.alpha, theta.alpha),
        (th.a01, theta.a01),
        (th.a00, theta.a00),
        (th.b0, theta.b0),
        (th.b1, theta.b1),
        (th.b2, theta.b2),
    ] {
        worst = worst.max(rel_dev(a, b));
    }
    Ok(Check::new("identity", worst, tol, None))
}

/// The inverse of `realize(g, θ)` is realized by an element acting on
/// `act(g, θ)` and maps back to `θ`.
pub fn inverse_check(g: &GroupElement, theta: &SubclassParams, tol: f64) -> Result<Closure> {
    let phi = realize(g, theta)?;
    let inv = phi.invert()?;
    let theta1 = act(g, theta)?;
    let mut hint = GroupElement::identity(&theta1);
    hint.variant = g.variant;
    let (back, dev) = recover(&theta1, &inv, theta, &hint)?;
    let mut check = Check::new("inverse", dev, tol, None);
    check.detail = back.to_string();
    Ok(Closure { check, composed: back })
}

/// `t̃ = c1 t + c2`, `x̃ = c3 x + c4`.
pub fn usual_transformation(c1: f64, c2: f64, c3: f64, c4: f64) -> FiberTransformation {
    let f = Expr::float;
    let t = Expr::t();
    FiberTransformation::new(f(c1).mul(&t).add(&f(c2)), f(c3), f(c4)).with_inverse(t.sub(&f(c2)).div(&f(c1)))
}

/// Composition in the usual group: `(c1, c2, c3, c4)` after `(d1, d2, d3, d4)`.
pub fn usual_compose(c: [f64; 4], d: [f64; 4]) -> [f64; 4] {
    [c[0] * d[0], c[0] * d[1] + c[1], c[2] * d[2], c[2] * d[3] + c[3]]
}

/// Closure of the usual group: the composed map equals the map of the
/// composed parameters.
pub fn usual_closure_check(c: [f64; 4], d: [f64; 4], tol: f64) -> Check {
    let dom = SampleBox::standard().t;
    let a = usual_transformation(c[0], c[1], c[2], c[3])
        .compose(&usual_transformation(d[0], d[1], d[2], d[3]).with_domain(dom));
    let e = usual_compose(c, d);
    let b = usual_transformation(e[0], e[1], e[2], e[3]).with_domain(dom);
    Check::new(
        "usual-closure",
        crate::groups::recover::fiber_deviation(&a, &b, dom),
        tol,
        None,
    )
}

/// Composing a realized element with a usual-group element keeps the target
/// time-independent: `∂_s` of every target coefficient vanishes.
pub fn usual_composition_check(
    g: &GroupElement,
    theta: &SubclassParams,
    usual: [f64; 4],
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<Check> {
    let phi = realize(g, theta)?;
    let u = usual_transformation(usual[0], usual[1], usual[2], usual[3]);
    let both = u.compose(&phi);
    let tgt = both.apply_reduced(&instantiate_normal_form(theta)?);
    let mut coeffs: Vec<(String, Expr)> = (2..=tgt.order).map(|j| (format!("A[{j}]"), tgt.coeff(j))).collect();
    coeffs.push(("A0".into(), tgt.a0.clone()));
    coeffs.push(("B".into(), tgt.b.clone()));
    let mut checks = Vec::new();
    for (name, e) in coeffs {
        // relative to the coefficient size
        let rel = e.diff(Var::T).div(&Expr::one().add(&e.abs()));
        let rep = sample_equiv(&rel, &Expr::zero(), tgt.domain, n, tol, seed)?;
        checks.push(Check::new(name, rep.max_dev, tol, rep.worst));
    }
    Ok(Check::worst_of("usual-composition", checks, tol))
}

/// Time maps with a known value of the Schwarzian relation: `e^{2bt}` and
/// `tan(bt)` (particular solutions for `b = ±b²`), and a Möbius map.
pub fn particular_solutions(b: f64) -> Vec<(String, Expr)> {
    let f = Expr::float;
    let t = Expr::t();
    vec![
        (
            format!("T = exp(2·{b}·t), b0 = b²"),
            schwarzian_relation(&f(2.0 * b).mul(&t).exp(), b * b, 0.0),
        ),
        (
            format!("T = tan({b}·t), b0 = −b²"),
            schwarzian_relation(&f(b).mul(&t).tan(), -b * b, 0.0),
        ),
        (
            "T = t/(t+1): Schwarzian zero".into(),
            schwarzian(&t.div(&t.add(&Expr::one()))),
        ),
    ]
}

#[cfg(test)]
mod tests;
