//! Random gated parameter tuples and valid group elements, for property checks
//! and the audit.

use rand::Rng;

use super::{act, realize_on, GroupElement, Stage2, Variant};
use crate::error::{Error, Result};
use crate::model::{SubclassParams, Tag};

fn nz<R: Rng>(rng: &mut R) -> f64 {
    let v = rng.gen_range(0.4..1.5);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

fn u<R: Rng>(rng: &mut R, a: f64) -> f64 {
    rng.gen_range(-a..a)
}

/// Exactly zero with probability `p`, otherwise `±[a/20, a)`. Nonzero values
/// stay away from zero: next to a singular branch the closed forms lose all
/// precision to cancellation.
fn maybe_zero<R: Rng>(rng: &mut R, a: f64, p: f64) -> f64 {
    if rng.gen_bool(p) {
        0.0
    } else {
        let v = rng.gen_range(a / 20.0..a);
        if rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    }
}

fn alpha<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let a: f64 = rng.gen_range(-1.5..3.0);
        if a.abs() > 0.2 {
            return a;
        }
    }
}

/// Smallest and largest order drawn for a tag.
pub fn order_range(tag: Tag) -> (usize, usize) {
    match tag {
        Tag::IV1 | Tag::IV0High => (3, 4),
        Tag::IV0_2 => (2, 2),
        _ => (2, 4),
    }
}

/// A random parameter tuple of `tag` passing its gate. `zero_prob` is the
/// chance that an optional parameter is exactly zero (singular branches).
pub fn random_params<R: Rng>(tag: Tag, order: usize, zero_prob: f64, rng: &mut R) -> Result<SubclassParams> {
    let r = order;
    let mut a: Vec<f64> = (2..=r).map(|_| maybe_zero(rng, 1.0, zero_prob)).collect();
    if r >= 2 {
        a[r - 2] = nz(rng);
    }
    match tag {
        Tag::IV1 => {
            if a[..r - 2].iter().all(|v| *v == 0.0) {
                a[0] = nz(rng);
            }
        }
        Tag::IV0High => a[..r - 2].iter_mut().for_each(|v| *v = 0.0),
        _ => {}
    }
    let mut p = SubclassParams::new(tag, a);
    if tag.uses_beta() {
        p.beta = u(rng, 1.0);
    }
    match tag {
        Tag::I1 => {
            p.alpha = alpha(rng);
            p.a01 = nz(rng);
            p.b1 = maybe_zero(rng, 1.0, zero_prob);
            p.b2 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::I01 => {
            p.alpha = alpha(rng);
            p.a00 = maybe_zero(rng, 1.0, zero_prob);
            p.b2 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::I00 => {
            p.b0 = maybe_zero(rng, 2.0, zero_prob);
            p.b2 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::II0 => {
            p.a00 = maybe_zero(rng, 1.0, zero_prob);
            p.b0 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::II1 => {
            p.a01 = nz(rng);
            p.a00 = maybe_zero(rng, 1.0, zero_prob);
            p.b0 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::III => {
            p.alpha = nz(rng);
            p.a01 = maybe_zero(rng, 1.0, zero_prob);
            p.a00 = maybe_zero(rng, 1.0, zero_prob);
            p.b2 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::IV1 => {
            p.a00 = maybe_zero(rng, 1.0, zero_prob);
            p.b1 = maybe_zero(rng, 1.0, zero_prob);
            p.b0 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::IV0High => {
            p.a00 = maybe_zero(rng, 1.0, zero_prob);
            p.b0 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::IV0_2 => {
            p.b1 = maybe_zero(rng, 2.0, zero_prob);
            p.b0 = maybe_zero(rng, 1.0, zero_prob);
        }
        Tag::F0 => return Err(Error::domain("F0 has no parameters")),
    }
    let p = p.complete();
    p.check_gates()?;
    Ok(p)
}

fn draw<R: Rng>(tag: Tag, theta: &SubclassParams, rng: &mut R) -> GroupElement {
    let mut c = [0.0; 9];
    let mut g = GroupElement::new(tag, c);
    g.eps = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    if tag.uses_beta() {
        g.s = u(rng, 1.0);
    }
    match tag {
        Tag::I1 | Tag::I01 => {
            c[1] = nz(rng);
            c[2] = u(rng, 0.3);
            c[4] = nz(rng);
            c[5] = maybe_zero(rng, 1.0, 0.15);
        }
        Tag::I00 | Tag::IV0_2 => {
            c[0] = nz(rng);
            c[1] = nz(rng);
            c[2] = u(rng, 0.3);
            c[3] = u(rng, 0.3);
            let det = c[1] * c[0] - c[2] * c[3];
            c[4] = det.signum() * rng.gen_range(0.5..1.5);
            g.p2 = match rng.gen_range(0..3) {
                0 => Stage2::Id,
                1 => Stage2::Log,
                _ => Stage2::Atan,
            };
            c[5] = match g.p2 {
                Stage2::Atan => rng.gen_range(0.2..0.8),
                _ => nz(rng),
            };
            c[6] = u(rng, 1.0);
            c[7] = u(rng, 1.0);
            if tag == Tag::IV0_2 {
                c[8] = u(rng, 1.0);
            }
        }
        Tag::II0 => {
            c[1] = nz(rng);
            c[2] = u(rng, 1.0);
            c[3] = maybe_zero(rng, 1.0, 0.15);
            c[4] = nz(rng);
        }
        Tag::II1 => {
            c[1] = nz(rng);
            c[2] = u(rng, 1.0);
            c[3] = u(rng, 1.0);
            c[4] = u(rng, 0.5);
            if rng.gen_bool(0.3) {
                g.variant = Variant::Full;
            }
        }
        Tag::III => {
            c[1] = nz(rng);
            c[2] = u(rng, 0.3);
            c[3] = if rng.gen_bool(0.15) { -theta.a00 } else { u(rng, 1.0) };
            c[4] = nz(rng);
            c[5] = nz(rng);
        }
        Tag::IV1 => {
            c[1] = u(rng, 1.0);
            c[2] = u(rng, 1.0);
            c[3] = u(rng, 1.0);
            c[4] = nz(rng);
            c[5] = nz(rng);
            c[6] = u(rng, 1.0);
        }
        Tag::IV0High => {
            c[1] = nz(rng);
            c[2] = u(rng, 0.3);
            c[3] = maybe_zero(rng, 1.0, 0.15);
            c[4] = nz(rng);
            c[5] = u(rng, 1.0);
            c[6] = u(rng, 0.5);
            c[7] = u(rng, 0.5);
            if theta.order() % 2 == 1 {
                g.eps = 1.0;
            }
        }
        Tag::F0 => {}
    }
    g.c = c;
    g
}

/// A random element acting on `θ` that realizes on the time interval `dom`.
pub fn random_element<R: Rng>(theta: &SubclassParams, dom: (f64, f64), rng: &mut R) -> Result<GroupElement> {
    const ATTEMPTS: usize = 500;
    for _ in 0..ATTEMPTS {
        let g = draw(theta.tag, theta, rng);
        if realize_on(&g, theta, dom).is_ok() && act(&g, theta).is_ok() {
            return Ok(g);
        }
    }
    Err(Error::DomainExhausted { attempts: ATTEMPTS })
}
