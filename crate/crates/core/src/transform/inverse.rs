//! Closed-form inversion of time maps.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::expr::{Expr, Func, Node, Var};

fn samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
}

/// Common sign of `e` over the interval, if any.
fn sign_on(e: &Expr, dom: (f64, f64)) -> Option<f64> {
    let c = e.compile();
    let mut sign = None;
    for s in samples(dom.0, dom.1, 9).chain([dom.0, dom.1]) {
        let v = c.eval_tx(s, 0.0);
        if !v.is_finite() || v == 0.0 {
            continue;
        }
        match sign {
            None => sign = Some(v.signum()),
            Some(sg) if sg != v.signum() => return None,
            _ => {}
        }
    }
    sign
}

/// Solve `e(t) = y` for `t` when `t` occurs along a single path of
/// invertible operations.
fn solve(e: &Expr, y: Expr, dom: (f64, f64)) -> Option<Expr> {
    let dep = |a: &Expr| a.depends_on(Var::T);
    match e.node() {
        Node::Var(Var::T) => Some(y),
        Node::Add(a, b) => match (dep(a), dep(b)) {
            (false, true) => solve(b, y.sub(a), dom),
            (true, false) => solve(a, y.sub(b), dom),
            _ => None,
        },
        Node::Sub(a, b) => match (dep(a), dep(b)) {
            (false, true) => solve(b, a.sub(&y), dom),
            (true, false) => solve(a, y.add(b), dom),
            _ => None,
        },
        Node::Mul(a, b) => match (dep(a), dep(b)) {
            (false, true) => solve(b, y.div(a), dom),
            (true, false) => solve(a, y.div(b), dom),
            _ => None,
        },
        Node::Div(a, b) => match (dep(a), dep(b)) {
            (true, false) => solve(a, y.mul(b), dom),
            (false, true) => solve(b, a.div(&y), dom),
            _ => None,
        },
        Node::Pow(a, p) if !dep(p) => {
            let s = sign_on(a, dom)?;
            let root = y.abs().pow(&p.recip());
            solve(a, if s > 0.0 { root } else { root.neg() }, dom)
        }
        Node::Pow(c, a) if !dep(c) => {
            let base = c.as_f64()?;
            if base <= 0.0 || base == 1.0 {
                return None;
            }
            solve(a, y.ln().div(&c.ln()), dom)
        }
        Node::Func(f, a) => {
            let inner = match f {
                Func::Exp => y.ln(),
                Func::Ln => {
                    let s = sign_on(a, dom)?;
                    Expr::float(s).mul(&y.exp())
                }
                Func::Abs => Expr::float(sign_on(a, dom)?).mul(&y),
                Func::Sqrt => y.powi(2),
                Func::Atan => y.tan(),
                Func::Tan => {
                    // branch of atan containing the values of `a`
                    let c = a.compile();
                    let mid = c.eval_tx(0.5 * (dom.0 + dom.1), 0.0);
                    if !mid.is_finite() {
                        return None;
                    }
                    let k = ((mid - mid.tan().atan()) / std::f64::consts::PI).round();
                    let shift = k * std::f64::consts::PI;
                    y.atan().add(&Expr::float(shift))
                }
                Func::Sin | Func::Cos | Func::Sign => return None,
            };
            solve(a, inner, dom)
        }
        _ => None,
    }
}

/// Fit `T = (αt+β)/(γt+δ)` from samples; returns the inverse if the fit is exact.
fn mobius_inverse(t: &Expr, dom: (f64, f64)) -> Option<Expr> {
    let c = t.compile();
    let pts: Vec<(f64, f64)> = samples(dom.0, dom.1, 12).map(|s| (s, c.eval_tx(s, 0.0))).collect();
    if pts.iter().any(|(_, v)| !v.is_finite()) {
        return None;
    }
    let scale = pts.iter().map(|(_, v)| v.abs()).fold(1.0, f64::max);
    let m = DMatrix::from_fn(pts.len(), 4, |i, j| {
        let (s, v) = pts[i];
        let v = v / scale;
        match j {
            0 => s,
            1 => 1.0,
            2 => -s * v,
            _ => -v,
        }
    });
    let svd = SVD::new(m.clone(), false, true);
    let vt = svd.v_t?;
    let sv = svd.singular_values;
    let (imin, smin) = sv
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smin > 1e-10 * smax {
        return None;
    }
    let v = vt.row(imin);
    // undo the value scaling: γ and δ multiply v/scale
    let (al, be, ga, de) = (v[0], v[1], v[2] / scale, v[3] / scale);
    let det = al * de - be * ga;
    if det.abs() < 1e-12 * (al.abs() + be.abs()) * (ga.abs() + de.abs()) {
        return None;
    }
    let y = Expr::t();
    let f = Expr::float;
    Some(f(de).mul(&y).sub(&f(be)).div(&f(al).sub(&f(ga).mul(&y))))
}

/// `T⁻¹` in closed form on the image of `dom`.
pub fn invert_time_map(t: &Expr, dom: (f64, f64)) -> Result<Expr> {
    let candidate = solve(t, Expr::t(), dom).or_else(|| mobius_inverse(t, dom));
    let inv = candidate.ok_or_else(|| Error::NonInvertible(format!("T = {t}")))?;
    // confirm T⁻¹(T(s)) = s on the domain
    let round = inv.subst(Var::T, t).compile();
    for s in samples(dom.0, dom.1, 16) {
        let back = round.eval_tx(s, 0.0);
        if !((back - s).abs() <= 1e-9 * (1.0 + s.abs())) {
            return Err(Error::NonInvertible(format!("T = {t}: inverse fails at t = {s}")));
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn check(s: &str, dom: (f64, f64)) {
        let t = parse_expression(s).unwrap();
        invert_time_map(&t, dom).unwrap_or_else(|e| panic!("{s}: {e}"));
    }

    #[test]
    fn families_invert() {
        check("exp(2*t)", (0.1, 0.9));
        check("(2*t+1)/(t+1)", (0.1, 0.9));
        check("ln(abs(3*(exp(2*t)-1)/2 + 1/2 + 1))/3", (0.1, 0.9));
        check("tan(2*t)", (0.9, 1.2));
        check("atan(t)/2", (-3.0, 3.0));
        check("-ln(abs(t))", (-2.0, -0.5));
        check("(t+1)^3", (-3.0, -2.0));
        check("2^t", (0.0, 1.0));
    }

    #[test]
    fn non_monotone_is_rejected() {
        let t = parse_expression("t^2 + sin(t)").unwrap();
        assert!(invert_time_map(&t, (0.1, 0.9)).is_err());
    }
}
