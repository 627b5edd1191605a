//! Subclass detection: which catalogue normal form (if any) a reduced
//! equation has, with its parameters.
//!
//! Each ansatz fixes its nonlinear parameters `(β, α)` from a probe on one
//! coefficient (`A/A′` is linear in `x` for a power of `x + β`, `A′/A` is
//! constant for an exponential), then fits the remaining parameters by linear
//! least squares. A fit is accepted when the completed normal form reproduces
//! the equation on a validation sample disjoint from the fit sample and all
//! gates hold.

mod usual;

pub use usual::{match_modulo_usual_group, UsualMatch};

use crate::error::{Error, Result};
use crate::expr::sample::rel_dev;
use crate::expr::{Expr, Var};
use crate::model::{instantiate_normal_form, ReducedEquation, SubclassParams, Tag};
use crate::numeric::{line_fit, lstsq};
use crate::report::Report;

pub const DEFAULT_TOL: f64 = 1e-8;
const FIT_POINTS: usize = 64;
/// Relative size below which a fitted contribution is taken to be zero.
const SNAP: f64 = 1e-10;

/// Ansatz order: more constrained classes first.
pub const FIT_ORDER: [Tag; 9] = [
    Tag::I1,
    Tag::I01,
    Tag::I00,
    Tag::II1,
    Tag::II0,
    Tag::III,
    Tag::IV1,
    Tag::IV0High,
    Tag::IV0_2,
];

/// Outcome of one ansatz.
#[derive(Clone, Debug, PartialEq)]
pub struct Attempt {
    pub tag: Tag,
    pub accepted: bool,
    /// Validation residual, when the fit got that far.
    pub residual: Option<f64>,
    /// Worst condition number of the linear fits.
    pub condition: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    /// `F0` when no ansatz is accepted.
    pub tag: Tag,
    pub params: Option<SubclassParams>,
    pub residual: f64,
    pub attempts: Vec<Attempt>,
}

impl Classification {
    pub fn report(&self) -> Report {
        let mut r = Report::new();
        r.set("tag", self.tag.name());
        if let Some(p) = &self.params {
            if p.tag.uses_beta() {
                r.set("beta", p.beta);
            }
            if p.tag.uses_alpha() {
                r.set("alpha", p.alpha);
            }
            r.set("order", p.order());
            r.set("a", p.a.clone());
            for (k, v) in [("a01", p.a01), ("a00", p.a00), ("b0", p.b0), ("b1", p.b1), ("b2", p.b2)] {
                r.set(k, v);
            }
        }
        r.set("residual", self.residual);
        r.set(
            "fit_order",
            FIT_ORDER.iter().map(|t| t.name().to_string()).collect::<Vec<_>>(),
        );
        let tried: Vec<String> = self
            .attempts
            .iter()
            .map(|a| {
                let res = a.residual.map(|v| format!(" residual={v:.3e}")).unwrap_or_default();
                format!("{}: {}{res}", a.tag, a.note)
            })
            .collect();
        r.set("attempts", tried);
        let gates: Vec<String> = self
            .attempts
            .iter()
            .filter(|a| a.note.starts_with("gate"))
            .map(|a| format!("{}: {}", a.tag, a.note))
            .collect();
        r.set("violated_gates", gates);
        r
    }
}

/// Inequality gates and equality constraints of `p`.
pub fn gate_check(p: &SubclassParams) -> (bool, Vec<String>) {
    let v = p.gate_violations();
    (v.is_empty(), v)
}

/// Coefficient values on a set of abscissae.
struct Data {
    xs: Vec<f64>,
    /// `A^j`, `j = 2..=r`.
    a: Vec<Vec<f64>>,
    a0: Vec<f64>,
    b: Vec<f64>,
}

impl Data {
    fn collect(eq: &ReducedEquation, xs: &[f64]) -> Data {
        let ca: Vec<_> = eq.a.iter().map(|e| e.compile()).collect();
        let (c0, cb) = (eq.a0.compile(), eq.b.compile());
        let mut d = Data {
            xs: Vec::new(),
            a: vec![Vec::new(); ca.len()],
            a0: Vec::new(),
            b: Vec::new(),
        };
        for &x in xs {
            let av: Vec<f64> = ca.iter().map(|c| c.eval_tx(0.0, x)).collect();
            let (v0, vb) = (c0.eval_tx(0.0, x), cb.eval_tx(0.0, x));
            if av.iter().chain([&v0, &vb]).all(|v| v.is_finite()) {
                d.xs.push(x);
                for (col, v) in d.a.iter_mut().zip(av) {
                    col.push(v);
                }
                d.a0.push(v0);
                d.b.push(vb);
            }
        }
        d
    }

    fn columns(&self) -> Vec<(&'static str, &[f64])> {
        let mut out: Vec<(&'static str, &[f64])> = self.a.iter().map(|c| ("A", c.as_slice())).collect();
        out.push(("A0", &self.a0));
        out.push(("B", &self.b));
        out
    }
}

fn points(dom: (f64, f64), n: usize, shift: f64) -> Vec<f64> {
    (0..n)
        .map(|i| dom.0 + (dom.1 - dom.0) * (0.01 + 0.98 * (i as f64 + shift) / n as f64))
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn is_constant(v: &[f64]) -> bool {
    let m = max_abs(v);
    v.iter().all(|x| (x - v[0]).abs() <= 1e-10 * (1.0 + m))
}

fn values(e: &Expr, xs: &[f64]) -> Vec<f64> {
    let c = e.compile();
    xs.iter().map(|x| c.eval_tx(0.0, *x)).collect()
}

/// `(p, β)` with `f ∝ (x + β)^p`, from the linearity of `f/f′`.
fn power_probe(f: &Expr, xs: &[f64]) -> Option<(f64, f64)> {
    let fv = values(f, xs);
    if fv.iter().any(|v| !v.is_finite()) || is_constant(&fv) {
        return None;
    }
    let dv = values(&f.diff(Var::X), xs);
    let (mut px, mut q) = (Vec::new(), Vec::new());
    for ((x, a), b) in xs.iter().zip(&fv).zip(&dv) {
        let r = a / b;
        if r.is_finite() && *b != 0.0 {
            px.push(*x);
            q.push(r);
        }
    }
    if px.len() < 8 {
        return None;
    }
    let (s, c, res) = line_fit(&px, &q)?;
    if res > 1e-7 * (1.0 + max_abs(&q)) || s.abs() < 1e-12 {
        return None;
    }
    Some((1.0 / s, c / s))
}

/// `α` with `f ∝ e^{αx}`.
fn exp_probe(f: &Expr, xs: &[f64]) -> Option<f64> {
    let fv = values(f, xs);
    if fv.iter().any(|v| !v.is_finite()) || is_constant(&fv) {
        return None;
    }
    let dv = values(&f.diff(Var::X), xs);
    let h: Vec<f64> = fv
        .iter()
        .zip(&dv)
        .filter(|(a, _)| **a != 0.0)
        .map(|(a, b)| b / a)
        .collect();
    if h.len() < 8 || !h.iter().all(|v| v.is_finite()) || !is_constant(&h) {
        return None;
    }
    Some(h.iter().sum::<f64>() / h.len() as f64)
}

type Basis = Vec<Box<dyn Fn(f64) -> f64>>;

struct Layout {
    a: Vec<Basis>,
    a0: Basis,
    b: Basis,
}

/// Nonlinear parameters of an ansatz, or why it does not apply.
fn probe(tag: Tag, eq: &ReducedEquation, xs: &[f64]) -> std::result::Result<(f64, f64), String> {
    let r = eq.order;
    let desc = |j: usize| eq.coeff(j);
    match tag {
        Tag::I1 | Tag::I01 => {
            for j in (2..=r).rev() {
                if let Some((p, beta)) = power_probe(&desc(j), xs) {
                    let mut alpha = p - j as f64;
                    for snap in [0.0, -2.0] {
                        if (alpha - snap).abs() <= 1e-9 {
                            alpha = snap;
                        }
                    }
                    return Ok((beta, alpha));
                }
            }
            Err("no coefficient A^j is a non-constant power of x+β".into())
        }
        Tag::I00 => {
            let mut probes: Vec<(Expr, f64)> = (3..=r).rev().map(|j| (desc(j), j as f64 - 2.0)).collect();
            probes.push((eq.b.diff_n(Var::X, 2), -5.0));
            for (f, want) in probes {
                if let Some((p, beta)) = power_probe(&f, xs) {
                    if (p - want).abs() > 1e-6 * (1.0 + want.abs()) {
                        return Err(format!("power {p} where {want} is required"));
                    }
                    return Ok((beta, -2.0));
                }
            }
            Err("no probe coefficient is a non-constant power of x+β".into())
        }
        Tag::II0 | Tag::II1 => {
            for j in (2..=r).rev() {
                if let Some((p, beta)) = power_probe(&desc(j), xs) {
                    if (p - j as f64).abs() > 1e-6 * j as f64 {
                        return Err(format!("A^{j} has power {p}, need {j}"));
                    }
                    return Ok((beta, 0.0));
                }
            }
            Err("no coefficient A^j is a non-constant power of x+β".into())
        }
        Tag::III => {
            for j in (2..=r).rev() {
                if let Some(alpha) = exp_probe(&desc(j), xs) {
                    return Ok((0.0, alpha));
                }
            }
            Err("no coefficient A^j is a non-constant exponential".into())
        }
        Tag::IV1 | Tag::IV0High | Tag::IV0_2 => Ok((0.0, 0.0)),
        Tag::F0 => Err("F0 has no ansatz".into()),
    }
}

fn layout(tag: Tag, r: usize, beta: f64, alpha: f64) -> Layout {
    let y = move |x: f64| x + beta;
    let pw = move |x: f64| y(x).abs().powf(alpha);
    let per_j = |f: &dyn Fn(usize) -> Box<dyn Fn(f64) -> f64>| -> Vec<Basis> { (2..=r).map(|j| vec![f(j)]).collect() };
    match tag {
        Tag::I1 | Tag::I01 => {
            let a = per_j(&|j| Box::new(move |x| y(x).powi(j as i32) * pw(x)));
            let a0: Basis = if tag == Tag::I1 {
                vec![Box::new(|_| 1.0), Box::new(pw)]
            } else {
                vec![Box::new(|_| 1.0)]
            };
            let mut b: Basis = vec![Box::new(move |x| y(x) * pw(x) * pw(x))];
            if tag == Tag::I1 {
                b.push(Box::new(move |x| y(x) * pw(x)));
            }
            b.push(Box::new(y));
            Layout { a, a0, b }
        }
        Tag::I00 => Layout {
            a: per_j(&|j| Box::new(move |x| y(x).powi(j as i32 - 2))),
            a0: vec![],
            b: vec![Box::new(y), Box::new(move |x| y(x).powi(-3))],
        },
        Tag::II0 | Tag::II1 => {
            let a = per_j(&|j| Box::new(move |x| y(x).powi(j as i32)));
            let l = move |x: f64| y(x).abs().ln();
            if tag == Tag::II0 {
                Layout {
                    a,
                    a0: vec![Box::new(|_| 1.0)],
                    b: vec![Box::new(y)],
                }
            } else {
                Layout {
                    a,
                    a0: vec![Box::new(l), Box::new(|_| 1.0)],
                    b: vec![
                        Box::new(move |x| y(x) * l(x) * l(x)),
                        Box::new(move |x| y(x) * l(x)),
                        Box::new(y),
                    ],
                }
            }
        }
        Tag::III => {
            let e = move |x: f64| (alpha * x).exp();
            Layout {
                a: per_j(&|_| Box::new(e)),
                a0: vec![Box::new(e), Box::new(|_| 1.0)],
                b: vec![Box::new(move |x| e(x) * e(x)), Box::new(e), Box::new(|_| 1.0)],
            }
        }
        _ => Layout {
            a: per_j(&|_| Box::new(|_| 1.0)),
            a0: vec![Box::new(|_| 1.0)],
            b: vec![Box::new(|x| x), Box::new(|_| 1.0)],
        },
    }
}

/// Fit `ys` on a basis; tiny contributions are set to exactly zero.
fn fit_basis(basis: &Basis, xs: &[f64], ys: &[f64]) -> std::result::Result<(Vec<f64>, f64), String> {
    if basis.is_empty() {
        return Ok((vec![], 1.0));
    }
    let rows: Vec<Vec<f64>> = xs.iter().map(|x| basis.iter().map(|f| f(*x)).collect()).collect();
    let fit = lstsq(&rows, ys).ok_or("least squares failed (non-finite basis values)")?;
    let scale = 1.0 + max_abs(ys);
    let coef = fit
        .coef
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let phi = rows.iter().fold(0.0f64, |m, row| m.max(row[k].abs()));
            if (c * phi).abs() <= SNAP * scale {
                0.0
            } else {
                *c
            }
        })
        .collect();
    Ok((coef, fit.condition))
}

fn params_from(tag: Tag, beta: f64, alpha: f64, a: Vec<f64>, c0: &[f64], cb: &[f64]) -> SubclassParams {
    let mut p = SubclassParams::new(tag, a);
    p.beta = beta;
    p.alpha = alpha;
    match tag {
        Tag::I1 => {
            p.a00 = c0[0];
            p.a01 = c0[1];
            (p.b2, p.b1, p.b0) = (cb[0], cb[1], cb[2]);
        }
        Tag::I01 => {
            p.a00 = c0[0];
            (p.b2, p.b0) = (cb[0], cb[1]);
        }
        Tag::I00 => (p.b0, p.b2) = (cb[0], cb[1]),
        Tag::II0 => {
            p.a00 = c0[0];
            p.b0 = cb[0];
        }
        Tag::II1 => {
            (p.a01, p.a00) = (c0[0], c0[1]);
            p.b0 = cb[2];
        }
        Tag::III => {
            (p.a01, p.a00) = (c0[0], c0[1]);
            (p.b2, p.b1, p.b0) = (cb[0], cb[1], cb[2]);
        }
        _ => {
            p.a00 = c0[0];
            (p.b1, p.b0) = (cb[0], cb[1]);
        }
    }
    p.complete()
}

/// Max relative deviation between the normal form of `p` and the data.
fn validate(p: &SubclassParams, data: &Data) -> Result<f64> {
    let nf = instantiate_normal_form(p)?;
    let model = Data::collect(&nf, &data.xs);
    if model.xs.len() != data.xs.len() {
        return Ok(f64::INFINITY);
    }
    let mut worst: f64 = 0.0;
    for ((_, m), (_, d)) in model.columns().iter().zip(data.columns()) {
        for (u, v) in m.iter().zip(d) {
            worst = worst.max(rel_dev(*u, *v));
        }
    }
    Ok(worst)
}

fn attempt(tag: Tag, eq: &ReducedEquation, fit: &Data, val: &Data, tol: f64) -> (Attempt, Option<SubclassParams>) {
    let mut at = Attempt {
        tag,
        accepted: false,
        residual: None,
        condition: None,
        note: String::new(),
    };
    let (beta, alpha) = match probe(tag, eq, &fit.xs) {
        Ok(v) => v,
        Err(msg) => {
            at.note = format!("probe: {msg}");
            return (at, None);
        }
    };
    if !(beta.is_finite() && alpha.is_finite()) {
        at.note = "probe: non-finite β or α".into();
        return (at, None);
    }
    let lay = layout(tag, eq.order, beta, alpha);
    let mut cond: f64 = 1.0;
    let mut run = |basis: &Basis, ys: &[f64]| -> std::result::Result<Vec<f64>, String> {
        let (c, k) = fit_basis(basis, &fit.xs, ys)?;
        cond = cond.max(k);
        Ok(c)
    };
    let fitted = (|| {
        let mut a = Vec::new();
        for (basis, ys) in lay.a.iter().zip(&fit.a) {
            a.push(run(basis, ys)?[0]);
        }
        let c0 = run(&lay.a0, &fit.a0)?;
        let cb = run(&lay.b, &fit.b)?;
        Ok::<_, String>((a, c0, cb))
    })();
    at.condition = Some(cond);
    let (a, c0, cb) = match fitted {
        Ok(v) => v,
        Err(msg) => {
            at.note = format!("fit: {msg}");
            return (at, None);
        }
    };
    let p = params_from(tag, beta, alpha, a, &c0, &cb);
    let gates = p.gate_violations();
    if !gates.is_empty() {
        at.note = format!("gate: {}", gates.join("; "));
        return (at, None);
    }
    match validate(&p, val) {
        Ok(res) => {
            at.residual = Some(res);
            if res <= tol {
                at.accepted = true;
                at.note = "accepted".into();
                (at, Some(p))
            } else {
                at.note = "validation residual above tolerance".into();
                (at, None)
            }
        }
        Err(e) => {
            at.note = format!("normal form: {e}");
            (at, None)
        }
    }
}

/// Classify `eq` into the first subclass of [`FIT_ORDER`] whose normal form
/// reproduces it to relative `tol`; `F0` otherwise.
pub fn detect_subclass(eq: &ReducedEquation, tol: f64) -> Result<Classification> {
    let dom = eq.domain.x;
    if !(dom.1 - dom.0 > 1e-6) {
        return Err(Error::domain(format!("x domain [{}, {}] is too small", dom.0, dom.1)));
    }
    let fit = Data::collect(eq, &points(dom, FIT_POINTS, 0.25));
    let val = Data::collect(eq, &points(dom, FIT_POINTS, 0.75));
    if fit.xs.len() < FIT_POINTS / 2 || val.xs.len() < FIT_POINTS / 2 {
        return Err(Error::domain("coefficients are undefined on most of the x domain"));
    }
    if fit.a.last().is_some_and(|v| v.iter().all(|x| *x == 0.0)) {
        return Err(Error::domain(format!(
            "leading coefficient A^{} vanishes on the domain",
            eq.order
        )));
    }
    let mut attempts = Vec::new();
    for tag in FIT_ORDER {
        let (at, p) = attempt(tag, eq, &fit, &val, tol);
        let res = at.residual.unwrap_or(0.0);
        attempts.push(at);
        if let Some(p) = p {
            return Ok(Classification {
                tag,
                params: Some(p),
                residual: res,
                attempts,
            });
        }
    }
    Ok(Classification {
        tag: Tag::F0,
        params: None,
        residual: f64::NAN,
        attempts,
    })
}

#[cfg(test)]
mod tests;
