//! Recovery of group parameters from a realized fiber transformation.

use nalgebra::{DMatrix, SVD};

use super::{realize_on, resolve_p1, GroupElement, MobiusParams, Stage1, Stage2};
use crate::error::{Error, Result};
use crate::expr::sample::rel_dev;
use crate::model::{SubclassParams, Tag};
use crate::numeric;
use crate::transform::FiberTransformation;

const FIT_POINTS: usize = 24;
const CHECK_POINTS: usize = 64;

struct Samples {
    t: Vec<f64>,
    tt: Vec<f64>,
    x1: Vec<f64>,
    x0: Vec<f64>,
}

fn grid(dom: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| dom.0 + (dom.1 - dom.0) * (i as f64 + 0.5) / n as f64)
        .collect()
}

fn sample(phi: &FiberTransformation, ts: &[f64]) -> Samples {
    let (t, x1, x0) = (phi.t.compile(), phi.x1.compile(), phi.x0.compile());
    Samples {
        t: ts.to_vec(),
        tt: ts.iter().map(|s| t.eval_tx(*s, 0.0)).collect(),
        x1: ts.iter().map(|s| x1.eval_tx(*s, 0.0)).collect(),
        x0: ts.iter().map(|s| x0.eval_tx(*s, 0.0)).collect(),
    }
}

fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    numeric::lstsq(rows, y).map(|f| (f.coef, f.residual))
}

fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    numeric::line_fit(x, y).map(|(s, c, _)| (s, c))
}

/// `(c1, c2)` of a log-like map with known `(γ, δ)`.
fn loglike_fit(gamma: f64, delta: f64, ts: &[f64], tv: &[f64]) -> Option<(f64, f64)> {
    let e: Vec<f64> = ts
        .iter()
        .map(|t| {
            if delta == 0.0 {
                *t
            } else {
                ((delta * t).exp() - 1.0) / delta
            }
        })
        .collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for sigma in [1.0, -1.0] {
        let y: Vec<f64> = tv
            .iter()
            .map(|v| {
                if gamma == 0.0 {
                    *v
                } else {
                    (sigma * (gamma * v).exp() - 1.0) / gamma
                }
            })
            .collect();
        let rows: Vec<Vec<f64>> = e.iter().map(|v| vec![*v, 1.0]).collect();
        if let Some((c, res)) = lstsq(&rows, &y) {
            if best.map_or(true, |b| res < b.2) {
                best = Some((c[0], c[1], res));
            }
        }
        if gamma == 0.0 {
            break;
        }
    }
    best.map(|b| (b.0, b.1))
}

/// Möbius parameters through the points `(s, v)`.
fn mobius_fit(s: &[f64], v: &[f64]) -> Option<MobiusParams> {
    let scale = v.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let m = DMatrix::from_fn(s.len(), 4, |i, j| match j {
        0 => s[i],
        1 => 1.0,
        2 => -s[i] * v[i] / scale,
        _ => -v[i] / scale,
    });
    if m.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let svd = SVD::new(m, false, true);
    let vt = svd.v_t?;
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, x)| if *x < acc.1 { (i, *x) } else { acc });
    let row = vt.row(imin);
    let p = MobiusParams {
        c1: row[0],
        c2: row[1],
        c3: row[2] / scale,
        c0: row[3] / scale,
    };
    let norm = [p.c0, p.c1, p.c2, p.c3].iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Some(MobiusParams {
        c0: p.c0 / norm,
        c1: p.c1 / norm,
        c2: p.c2 / norm,
        c3: p.c3 / norm,
    })
}

/// Fit coefficients `c[idx]` that enter `X⁰` linearly.
fn fit_linear(g: &mut GroupElement, idx: &[usize], theta: &SubclassParams, dom: (f64, f64), s: &Samples) -> Result<()> {
    let x0_at = |g: &GroupElement| -> Result<Vec<f64>> {
        let phi = realize_on(g, theta, dom)?;
        let c = phi.x0.compile();
        Ok(s.t.iter().map(|t| c.eval_tx(*t, 0.0)).collect())
    };
    for &i in idx {
        g.c[i] = 0.0;
    }
    let base = x0_at(g)?;
    let mut cols = Vec::new();
    for &i in idx {
        g.c[i] = 1.0;
        let v = x0_at(g)?;
        cols.push(v.iter().zip(&base).map(|(a, b)| a - b).collect::<Vec<f64>>());
        g.c[i] = 0.0;
    }
    let rows: Vec<Vec<f64>> = (0..s.t.len()).map(|k| cols.iter().map(|c| c[k]).collect()).collect();
    let y: Vec<f64> = s.x0.iter().zip(&base).map(|(a, b)| a - b).collect();
    let (c, _) = lstsq(&rows, &y).ok_or_else(|| Error::IllConditioned("X0 coefficient fit".into()))?;
    for (k, &i) in idx.iter().enumerate() {
        g.c[i] = c[k];
    }
    Ok(())
}

fn sign_of(v: &[f64]) -> f64 {
    if v[v.len() / 2] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Maximum deviation between the components of two fiber transformations.
pub fn fiber_deviation(a: &FiberTransformation, b: &FiberTransformation, dom: (f64, f64)) -> f64 {
    let ts = grid(dom, CHECK_POINTS);
    let (sa, sb) = (sample(a, &ts), sample(b, &ts));
    let mut worst: f64 = 0.0;
    for (u, v) in [(&sa.tt, &sb.tt), (&sa.x1, &sb.x1), (&sa.x0, &sb.x0)] {
        for (p, q) in u.iter().zip(v.iter()) {
            let d = rel_dev(*p, *q);
            worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
        }
    }
    worst
}

fn fail(tag: Tag, what: &str) -> Error {
    Error::IllConditioned(format!("{tag}: could not recover {what}"))
}

/// Find `g` with `realize(g, θ) = φ` and `act(g, θ) = target`. Returns the
/// element and the maximum deviation of its realization from `φ`.
pub fn recover(
    theta: &SubclassParams,
    phi: &FiberTransformation,
    target: &SubclassParams,
    hint: &GroupElement,
) -> Result<(GroupElement, f64)> {
    let dom = phi.t_domain;
    let ts = grid(dom, FIT_POINTS);
    let s = sample(phi, &ts);
    let tag = theta.tag;
    let r = theta.order();
    let mut g = GroupElement::new(tag, [0.0; 9]);
    g.variant = hint.variant;
    if tag.uses_beta() {
        g.s = target.beta;
    }
    let ratio_r = target.a_r() / theta.a_r();
    let finish = |g: GroupElement| -> Result<(GroupElement, f64)> {
        let re = realize_on(&g, theta, dom)?;
        let dev = fiber_deviation(&re, phi, dom);
        Ok((g, dev))
    };
    match tag {
        Tag::I1 | Tag::I01 | Tag::III | Tag::IV0High => {
            match tag {
                Tag::I1 => {
                    g.c[4] = ratio_r;
                    g.c[5] = target.b1;
                }
                Tag::I01 => {
                    g.c[4] = ratio_r;
                    g.c[5] = target.a00;
                }
                Tag::III => {
                    g.c[5] = theta.alpha / target.alpha;
                    g.c[4] = ratio_r / g.c[5].powi(r as i32);
                    g.c[3] = target.a00 - theta.a00;
                }
                _ => {
                    g.c[3] = target.a00;
                    g.c[4] = ratio_r;
                    g.c[5] = target.b0;
                }
            }
            let p = super::loglike_params(&g, theta)?;
            let (c1, c2) = loglike_fit(p.gamma, p.delta, &s.t, &s.tt).ok_or_else(|| fail(tag, "T"))?;
            g.c[1] = c1;
            g.c[2] = c2;
            if tag != Tag::III {
                g.eps = sign_of(&s.x1);
            }
            if tag == Tag::IV0High {
                fit_linear(&mut g, &[6, 7], theta, dom, &s)?;
            }
            finish(g)
        }
        Tag::II0 | Tag::II1 => {
            let (c1, icpt) = line_fit(&s.t, &s.tt).ok_or_else(|| fail(tag, "T"))?;
            g.c[1] = c1;
            let ln: Vec<f64> = s.x1.iter().map(|v| v.abs().ln()).collect();
            if tag == Tag::II0 {
                g.c[2] = icpt;
                let (c3, l4) = line_fit(&s.t, &ln).ok_or_else(|| fail(tag, "X1"))?;
                g.c[3] = c3;
                g.c[4] = sign_of(&s.x1) * l4.exp();
            } else {
                let a01 = theta.a01;
                let e: Vec<f64> = s.t.iter().map(|t| (a01 * t / 2.0).exp()).collect();
                let lead = match g.variant {
                    super::Variant::Effective => {
                        g.c[2] = icpt * a01;
                        g.c[3] = c1 * target.a00 - theta.a00;
                        -g.c[3] / a01
                    }
                    super::Variant::Full => {
                        g.c[2] = icpt;
                        g.c[3] = (theta.a00 - c1 * target.a00) / a01;
                        g.c[3]
                    }
                };
                let rows: Vec<Vec<f64>> = e.iter().map(|v| vec![*v]).collect();
                let y: Vec<f64> = ln.iter().map(|v| v - lead).collect();
                g.c[4] = lstsq(&rows, &y).ok_or_else(|| fail(tag, "c4"))?.0[0];
            }
            finish(g)
        }
        Tag::IV1 => {
            let (c5, c6) = line_fit(&s.t, &s.tt).ok_or_else(|| fail(tag, "T"))?;
            g.c[4] = s.x1[s.x1.len() / 2];
            g.c[5] = c5;
            g.c[6] = c6;
            fit_linear(&mut g, &[1, 2, 3], theta, dom, &s)?;
            finish(g)
        }
        Tag::I00 | Tag::IV0_2 => {
            let i00 = tag == Tag::I00;
            g.p1 = Stage1::Auto;
            let p1 = resolve_p1(&g, theta)?;
            let b = if i00 { theta.b0 } else { theta.b1 };
            let k1 = b.abs().sqrt();
            let hat: Vec<f64> =
                s.t.iter()
                    .map(|t| match p1 {
                        Stage1::Tan => (k1 * t).tan(),
                        Stage1::Exp => (2.0 * k1 * t).exp(),
                        _ => *t,
                    })
                    .collect();
            let bt = if i00 { target.b0 } else { target.b1 };
            let (p2, mag) = if bt == 0.0 {
                (Stage2::Id, 1.0)
            } else if bt > 0.0 {
                (Stage2::Log, if i00 { 2.0 * bt.sqrt() } else { bt.sqrt() })
            } else {
                (Stage2::Atan, if i00 { (-bt).sqrt() / 2.0 } else { (-bt).sqrt() })
            };
            let (k, m) = if i00 { (1.0, 2.0) } else { (2.0, 1.0) };
            g.p2 = p2;
            g.c[4] = ratio_r;
            g.eps = sign_of(&s.x1);
            if !i00 {
                g.c[6] = if p2 == Stage2::Id { target.b0 } else { -target.b0 };
            }
            // sign of c5 and of t̄ on the log stage are both free
            let signs: &[(f64, f64)] = if p2 == Stage2::Log {
                &[(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            } else {
                &[(1.0, 1.0)]
            };
            let mut best: Option<(GroupElement, f64)> = None;
            for &(sg, sigma) in signs {
                let c5 = sg * mag;
                let bar: Vec<f64> =
                    s.tt.iter()
                        .map(|v| match p2 {
                            Stage2::Id => *v,
                            Stage2::Log => sigma * (k * c5 * v).exp(),
                            Stage2::Atan => (m * c5 * v).tan(),
                        })
                        .collect();
                let Some(mb) = mobius_fit(&hat, &bar) else { continue };
                let mut cand = g.clone();
                cand.c[0] = mb.c0;
                cand.c[1] = mb.c1;
                cand.c[2] = mb.c2;
                cand.c[3] = mb.c3;
                cand.c[5] = if p2 == Stage2::Id { 0.0 } else { c5 };
                if !i00 && fit_linear(&mut cand, &[7, 8], theta, dom, &s).is_err() {
                    continue;
                }
                if let Ok((cand, dev)) = finish(cand) {
                    if best.as_ref().map_or(true, |b| dev < b.1) {
                        best = Some((cand, dev));
                    }
                }
            }
            best.ok_or_else(|| fail(tag, "staged element"))
        }
        Tag::F0 => Err(Error::domain("F0 has no equivalence group")),
    }
}
