//! Quasi-random sampling on a (t, x) box and numeric equality of expressions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expr, Point};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;

/// Closed interval box for (t, x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBox {
    pub t: (f64, f64),
    pub x: (f64, f64),
}

impl SampleBox {
    pub fn new(t: (f64, f64), x: (f64, f64)) -> SampleBox {
        SampleBox { t, x }
    }

    pub fn standard() -> SampleBox {
        SampleBox::new((0.1, 0.9), (0.25, 2.0))
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox::standard()
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Halton sequence in bases 2 and 3 with a Cranley–Patterson rotation drawn
/// from `seed`. Points are kept away from the box edges by a relative margin
/// of 1e-3.
#[derive(Clone, Debug)]
pub struct Halton {
    bx: SampleBox,
    shift: (f64, f64),
    index: u64,
}

impl Halton {
    pub fn new(bx: SampleBox, seed: u64) -> Halton {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Halton {
            bx,
            shift: (rng.gen::<f64>(), rng.gen::<f64>()),
            index: 1,
        }
    }

    /// Skip ahead, e.g. to draw a sample disjoint from an earlier one.
    pub fn skip(mut self, n: u64) -> Halton {
        self.index += n;
        self
    }
}

impl Iterator for Halton {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let u = (radical_inverse(self.index, 2) + self.shift.0).fract();
        let v = (radical_inverse(self.index, 3) + self.shift.1).fract();
        self.index += 1;
        let m = 1e-3;
        let lerp = |(lo, hi): (f64, f64), s: f64| lo + (hi - lo) * (m + (1.0 - 2.0 * m) * s);
        Some(Point {
            t: lerp(self.bx.t, u),
            x: lerp(self.bx.x, v),
        })
    }
}

/// Draw up to `n` points at which every predicate value is finite; at most
/// `20 n` candidates are tried.
pub fn admissible_points(bx: SampleBox, n: usize, seed: u64, mut ok: impl FnMut(Point) -> bool) -> Result<Vec<Point>> {
    let attempts = 20 * n.max(1);
    let pts: Vec<Point> = Halton::new(bx, seed)
        .take(attempts)
        .filter(|p| ok(*p))
        .take(n)
        .collect();
    if pts.is_empty() && n > 0 {
        return Err(Error::DomainExhausted { attempts });
    }
    Ok(pts)
}

/// Outcome of a sampled comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivReport {
    pub equal: bool,
    pub max_dev: f64,
    pub worst: Option<Point>,
    pub samples: usize,
}

/// Symmetric relative deviation `|a-b| / (1 + max(|a|,|b|))`.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Compare two expressions at `n` quasi-random admissible points.
pub fn sample_equiv(e1: &Expr, e2: &Expr, bx: SampleBox, n: usize, tol: f64, seed: u64) -> Result<EquivReport> {
    let (c1, c2) = (e1.compile(), e2.compile());
    let pts = admissible_points(bx, n, seed, |p| c1.eval(p).is_finite() && c2.eval(p).is_finite())?;
    let mut report = EquivReport {
        equal: true,
        max_dev: 0.0,
        worst: None,
        samples: pts.len(),
    };
    for p in pts {
        let d = rel_dev(c1.eval(p), c2.eval(p));
        if report.worst.is_none() || d > report.max_dev {
            report.max_dev = d;
            report.worst = Some(p);
        }
    }
    report.equal = report.max_dev <= tol;
    Ok(report)
}

/// Symmetric relative deviation of `a` from `b` in excess of their rounding
/// error bounds, for pairs from [`Compiled::eval_scaled`](super::Compiled::eval_scaled).
pub fn scaled_dev((a, sa): (f64, f64), (b, sb): (f64, f64)) -> f64 {
    let excess = ((a - b).abs() - f64::EPSILON * (sa + sb)).max(0.0);
    excess / (1.0 + a.abs().max(b.abs()))
}

/// Sampled size of `e` beyond its rounding error bound. Unlike comparing with
/// zero, this is not tripped by cancellation of large terms.
pub fn sample_residual(e: &Expr, bx: SampleBox, n: usize, tol: f64, seed: u64) -> Result<EquivReport> {
    let c = e.compile();
    let pts = admissible_points(bx, n, seed, |p| c.eval_scaled(p).1.is_finite())?;
    let mut report = EquivReport {
        equal: true,
        max_dev: 0.0,
        worst: None,
        samples: pts.len(),
    };
    for p in pts {
        let d = scaled_dev(c.eval_scaled(p), (0.0, 0.0));
        if report.worst.is_none() || d > report.max_dev || d.is_nan() {
            report.max_dev = d;
            report.worst = Some(p);
        }
    }
    report.equal = report.max_dev <= tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn p(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn residual_ignores_rounding_of_cancelled_terms() {
        // 1e8·(x + 1e-8) − 1e8·x − 1 is zero up to rounding of the large terms
        let e = p("100000000*(x + 1/100000000) - 100000000*x - 1");
        let r = sample_residual(&e, SampleBox::standard(), 32, 1e-14, 1).unwrap();
        assert!(r.equal, "{}", r.max_dev);
        assert!(
            sample_equiv(&e, &Expr::zero(), SampleBox::standard(), 32, 1e-14, 1)
                .unwrap()
                .max_dev
                > 1e-10
        );
        // a genuine error of 1e-6 is still seen
        let r = sample_residual(&p("x*(1 + 1/1000000) - x"), SampleBox::standard(), 32, 1e-8, 1).unwrap();
        assert!(!r.equal && r.max_dev > 1e-7, "{}", r.max_dev);
    }

    #[test]
    fn algebraic_identity() {
        let r = sample_equiv(&p("(x+1)^2-1"), &p("x^2+2*x"), SampleBox::standard(), 64, 1e-12, 1).unwrap();
        assert!(r.equal, "{r:?}");
    }

    #[test]
    fn tan_is_sin_over_cos() {
        let bx = SampleBox::new((-1.0, 1.0), (-1.0, 1.0));
        let r = sample_equiv(&p("tan(t)"), &p("sin(t)/cos(t)"), bx, 64, 1e-12, 1).unwrap();
        assert!(r.equal);
    }

    #[test]
    fn log_is_abs_aware_on_negative_axis() {
        let bx = SampleBox::new((-2.0, -1.0), (0.0, 1.0));
        let r = sample_equiv(&p("ln(abs(t))"), &p("ln(t)"), bx, 64, 1e-12, 1).unwrap();
        assert!(r.equal);
        assert!((p("ln(t)").eval(-1.5, 0.0) - 0.405465108108164).abs() < 1e-12);
    }

    #[test]
    fn exhausted_domain_is_an_error() {
        let bx = SampleBox::new((0.0, 1.0), (-2.0, -1.0));
        let e = sample_equiv(&p("sqrt(x)"), &p("x"), bx, 16, 1e-12, 1).unwrap_err();
        assert!(matches!(e, Error::DomainExhausted { .. }));
    }

    #[test]
    fn halton_points_stay_inside_the_box() {
        let bx = SampleBox::standard();
        for q in Halton::new(bx, 7).take(500) {
            assert!(q.t > 0.1 && q.t < 0.9 && q.x > 0.25 && q.x < 2.0);
        }
    }
}
