//! Numeric primitive `F(x) = ∫_{x0}^{x} dξ / C(ξ)` and its inverse, used when
//! no closed form for a gauge map exists.

use super::{Compiled, Expr, Point};

#[derive(Debug)]
pub struct QuadMap {
    pub integrand: Expr,
    pub x0: f64,
    /// Interval on which `C` has one sign; the inverse is searched here.
    pub lo: f64,
    pub hi: f64,
    compiled: Compiled,
}

impl PartialEq for QuadMap {
    fn eq(&self, other: &Self) -> bool {
        self.integrand == other.integrand && self.x0 == other.x0 && self.lo == other.lo && self.hi == other.hi
    }
}

const TOL: f64 = 1e-12;

impl QuadMap {
    pub fn new(integrand: Expr, x0: f64, lo: f64, hi: f64) -> QuadMap {
        let compiled = integrand.compile();
        QuadMap {
            integrand,
            x0,
            lo,
            hi,
            compiled,
        }
    }

    fn recip_c(&self, x: f64) -> f64 {
        1.0 / self.compiled.eval(Point { t: 0.0, x })
    }

    pub fn forward(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return f64::NAN;
        }
        if x == self.x0 {
            return 0.0;
        }
        let (a, b) = (self.x0, x);
        let f = |s: f64| self.recip_c(s);
        let (fa, fb) = (f(a), f(b));
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        simpson(&f, a, b, fa, fm, fb, whole, TOL, 48)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        if !y.is_finite() {
            return f64::NAN;
        }
        // F is monotone on [lo, hi]; widen the bracket a little so that
        // boundary values are reachable
        let width = self.hi - self.lo;
        let (mut a, mut b) = (self.lo - 0.5 * width, self.hi + 0.5 * width);
        let (mut fa, fb) = (self.forward(a) - y, self.forward(b) - y);
        if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
            a = self.lo;
            b = self.hi;
            fa = self.forward(a) - y;
            let fb = self.forward(b) - y;
            if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
                return f64::NAN;
            }
        }
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let fx = self.forward(x) - y;
            if fx == 0.0 {
                return x;
            }
            if fx.signum() == fa.signum() {
                a = x;
                fa = fx;
            } else {
                b = x;
            }
            // Newton step with F' = 1/C, bisection when it leaves the bracket
            let step = fx / self.recip_c(x);
            let mut next = x - step;
            if !next.is_finite() || next <= a.min(b) || next >= a.max(b) {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return f64::NAN;
    }
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_of_reciprocal_matches_log() {
        let q = QuadMap::new(Expr::x(), 1.0, 0.5, 3.0);
        assert!((q.forward(2.0) - 2f64.ln()).abs() < 1e-11);
        assert!((q.inverse(2f64.ln()) - 2.0).abs() < 1e-11);
    }

    #[test]
    fn inverse_round_trips() {
        let c = Expr::one()
            .add(&Expr::x().powi(2))
            .add(&Expr::x().sin().mul(&Expr::ratio(1, 2)));
        let q = QuadMap::new(c, 0.0, -1.0, 2.0);
        for x in [-0.7, 0.3, 1.9] {
            assert!((q.inverse(q.forward(x)) - x).abs() < 1e-10);
        }
    }
}
