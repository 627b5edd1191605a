//! Matching two equations modulo the usual equivalence group
//! `t̃ = c1 t + c2`, `x̃ = c3 x + c4`, under which
//! `Ã^j = c3^j/c1 A^j`, `Ã⁰ = A⁰/c1`, `B̃ = c3/c1² B`.

use crate::expr::sample::rel_dev;
use crate::expr::Compiled;
use crate::model::ReducedEquation;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UsualMatch {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Max relative deviation of the mapped coefficients.
    pub residual: f64,
}

struct Side {
    /// `A^2..A^r`, then `A0`, then `B`.
    coef: Vec<Compiled>,
}

impl Side {
    fn new(eq: &ReducedEquation) -> Side {
        let mut coef: Vec<Compiled> = eq.a.iter().map(|e| e.compile()).collect();
        coef.push(eq.a0.compile());
        coef.push(eq.b.compile());
        Side { coef }
    }

    fn at(&self, k: usize, x: f64) -> f64 {
        self.coef[k].eval_tx(0.0, x)
    }
}

/// Scale factor of coefficient slot `k` (order `r`).
fn factor(k: usize, r: usize, c1: f64, c3: f64) -> f64 {
    if k + 2 <= r {
        c3.powi(k as i32 + 2) / c1
    } else if k + 2 == r + 1 {
        1.0 / c1
    } else {
        c3 / (c1 * c1)
    }
}

struct Problem<'a> {
    src: &'a Side,
    dst: &'a Side,
    xs: Vec<f64>,
    r: usize,
}

impl Problem<'_> {
    /// Max relative deviation for `(c1, c3, c4)`.
    fn residual(&self, c1: f64, c3: f64, c4: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in &self.xs {
            for k in 0..self.src.coef.len() {
                let want = factor(k, self.r, c1, c3) * self.src.at(k, x);
                let have = self.dst.at(k, c3 * x + c4);
                let d = rel_dev(have, want);
                worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
        worst
    }

    /// `c1` from the leading coefficients, given `(c3, c4)`.
    fn profile_c1(&self, c3: f64, c4: f64) -> Option<f64> {
        let k = self.r - 2;
        let mut ratios: Vec<f64> = self
            .xs
            .iter()
            .filter_map(|&x| {
                let (a, b) = (self.src.at(k, x), self.dst.at(k, c3 * x + c4));
                let q = c3.powi(self.r as i32) * a / b;
                (q.is_finite() && q != 0.0).then_some(q)
            })
            .collect();
        if ratios.is_empty() {
            return None;
        }
        ratios.sort_by(|a, b| a.total_cmp(b));
        Some(ratios[ratios.len() / 2])
    }

    /// Smooth objective for the search: mean squared deviation.
    fn objective(&self, l3: f64, s3: f64, c4: f64) -> f64 {
        let c3 = s3 * l3.exp();
        let Some(c1) = self.profile_c1(c3, c4) else {
            return f64::INFINITY;
        };
        let mut sum = 0.0;
        let mut n = 0.0;
        for &x in &self.xs {
            for k in 0..self.src.coef.len() {
                let want = factor(k, self.r, c1, c3) * self.src.at(k, x);
                let have = self.dst.at(k, c3 * x + c4);
                let d = rel_dev(have, want);
                if !d.is_finite() {
                    return f64::INFINITY;
                }
                sum += d * d;
                n += 1.0;
            }
        }
        sum / n
    }
}

/// Plain Nelder–Mead on two variables.
fn nelder_mead(f: &dyn Fn(f64, f64) -> f64, start: (f64, f64), step: f64, iters: usize) -> ((f64, f64), f64) {
    let mut pts = [start, (start.0 + step, start.1), (start.0, start.1 + step)];
    let mut vals = pts.map(|p| f(p.0, p.1));
    for _ in 0..iters {
        let mut idx = [0, 1, 2];
        idx.sort_by(|a, b| vals[*a].total_cmp(&vals[*b]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        if (vals[2] - vals[0]).abs() <= 1e-32 {
            break;
        }
        let c = ((pts[0].0 + pts[1].0) / 2.0, (pts[0].1 + pts[1].1) / 2.0);
        let along = |t: f64| (c.0 + t * (pts[2].0 - c.0), c.1 + t * (pts[2].1 - c.1));
        let refl = along(-1.0);
        let fr = f(refl.0, refl.1);
        if fr < vals[0] {
            let exp = along(-2.0);
            let fe = f(exp.0, exp.1);
            (pts[2], vals[2]) = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < vals[1] {
            (pts[2], vals[2]) = (refl, fr);
        } else {
            let con = along(0.5);
            let fc = f(con.0, con.1);
            if fc < vals[2] {
                (pts[2], vals[2]) = (con, fc);
            } else {
                for i in 1..3 {
                    pts[i] = ((pts[i].0 + pts[0].0) / 2.0, (pts[i].1 + pts[0].1) / 2.0);
                    vals[i] = f(pts[i].0, pts[i].1);
                }
            }
        }
    }
    let best = (0..3).min_by(|a, b| vals[*a].total_cmp(&vals[*b])).unwrap_or(0);
    (pts[best], vals[best])
}

fn is_const(side: &Side, k: usize, xs: &[f64]) -> Option<f64> {
    let v0 = side.at(k, xs[0]);
    xs.iter()
        .all(|x| (side.at(k, *x) - v0).abs() <= 1e-12 * (1.0 + v0.abs()))
        .then_some(v0)
}

/// `(b1, b0)` if `B` is affine.
fn affine(side: &Side, k: usize, xs: &[f64]) -> Option<(f64, f64)> {
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let (y0, y1) = (side.at(k, x0), side.at(k, x1));
    let b1 = (y1 - y0) / (x1 - x0);
    let b0 = y0 - b1 * x0;
    xs.iter()
        .all(|x| (side.at(k, *x) - b1 * x - b0).abs() <= 1e-10 * (1.0 + y0.abs().max(y1.abs())))
        .then_some((b1, b0))
}

/// Closed-form match when all `A` are constant and `B` is affine.
fn constant_case(p: &Problem, tol: f64) -> Option<Option<UsualMatch>> {
    let r = p.r;
    let n = p.src.coef.len();
    let mut src_c = Vec::new();
    let mut dst_c = Vec::new();
    for k in 0..n - 1 {
        src_c.push(is_const(p.src, k, &p.xs)?);
    }
    let dst_xs: Vec<f64> = (0..16).map(|i| -2.0 + 4.0 * i as f64 / 15.0).collect();
    for k in 0..n - 1 {
        dst_c.push(is_const(p.dst, k, &dst_xs)?);
    }
    let (b1, b0) = affine(p.src, n - 1, &p.xs)?;
    let (bt1, bt0) = affine(p.dst, n - 1, &dst_xs)?;
    // log-linear rows (coefficient of ln|c3|, of ln|c1|) = rhs, with sign data
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let mut signs: Vec<(i32, f64)> = Vec::new(); // (power of c3, required sign of c3^p c1^q)
    for k in 0..n - 1 {
        let (a, at) = (src_c[k], dst_c[k]);
        if (a == 0.0) != (at == 0.0) {
            return Some(None);
        }
        if a != 0.0 {
            let j = if k + 2 <= r { k as f64 + 2.0 } else { 0.0 };
            rows.push((j, -1.0, (at / a).abs().ln()));
            signs.push((j as i32, (at / a).signum()));
        }
    }
    if (b1 == 0.0) != (bt1 == 0.0) {
        return Some(None);
    }
    if b1 != 0.0 {
        if bt1 / b1 < 0.0 {
            return Some(None);
        }
        rows.push((0.0, -2.0, (bt1 / b1).ln()));
    }
    // minimize |ln c3| first, then |ln c1|
    let (l3, l1) = solve_tiebreak(&rows);
    let mut found = None;
    'outer: for s3 in [1.0, -1.0] {
        for s1 in [1.0, -1.0] {
            if signs.iter().all(|(j, sg)| f64::powi(s3, *j) * s1 == *sg) {
                found = Some((s1, s3));
                break 'outer;
            }
        }
    }
    let Some((s1, s3)) = found else { return Some(None) };
    let (c1, c3) = (s1 * l1.exp(), s3 * l3.exp());
    let c4 = if bt1 != 0.0 {
        (c3 * b0 / (c1 * c1) - bt0) / bt1
    } else {
        0.0
    };
    let res = p.residual(c1, c3, c4);
    Some((res <= tol).then_some(UsualMatch {
        c1,
        c2: 0.0,
        c3,
        c4,
        residual: res,
    }))
}

/// Least-squares `(l3, l1)` with the tie-break `l3 = 0` when the rows do
/// not determine it.
fn solve_tiebreak(rows: &[(f64, f64, f64)]) -> (f64, f64) {
    if rows.is_empty() {
        return (0.0, 0.0);
    }
    let m: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0, r.1]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let determined = rows.iter().any(|r| r.0 * rows[0].1 - r.1 * rows[0].0 != 0.0);
    if determined {
        if let Some(f) = crate::numeric::lstsq(&m, &y) {
            return (f.coef[0], f.coef[1]);
        }
    }
    // every row is a multiple of the first: set l3 = 0
    let r0 = rows[0];
    (0.0, r0.2 / r0.1)
}

/// Find `(c1, c2, c3, c4)` mapping `eq1` onto `eq2`. Time translations act
/// trivially on stationary equations, so `c2 = 0`; among a continuum of
/// solutions the one with smallest `|ln|c3||`, then `|ln|c1||`, then `|c4|`
/// is returned.
pub fn match_modulo_usual_group(eq1: &ReducedEquation, eq2: &ReducedEquation, tol: f64) -> Option<UsualMatch> {
    if eq1.order != eq2.order {
        return None;
    }
    let (src, dst) = (Side::new(eq1), Side::new(eq2));
    let dom = eq1.domain.x;
    let xs: Vec<f64> = (0..32)
        .map(|i| dom.0 + (dom.1 - dom.0) * (i as f64 + 0.5) / 32.0)
        .collect();
    let p = Problem {
        src: &src,
        dst: &dst,
        xs,
        r: eq1.order,
    };
    if let Some(m) = constant_case(&p, tol) {
        return m;
    }
    let mut found: Vec<UsualMatch> = Vec::new();
    for s3 in [1.0, -1.0] {
        for l3 in [0.0, -0.7, 0.7, -1.5, 1.5] {
            for c4 in [0.0, -1.0, 1.0, -2.5, 2.5] {
                let f = |a: f64, b: f64| p.objective(a, s3, b);
                let ((l3b, c4b), _) = nelder_mead(&f, (l3, c4), 0.3, 600);
                let c3 = s3 * l3b.exp();
                let Some(c1) = p.profile_c1(c3, c4b) else { continue };
                let res = p.residual(c1, c3, c4b);
                if res <= tol {
                    found.push(UsualMatch {
                        c1,
                        c2: 0.0,
                        c3,
                        c4: c4b,
                        residual: res,
                    });
                }
            }
        }
    }
    found.into_iter().min_by(|a, b| {
        let key = |m: &UsualMatch| (m.c3.abs().ln().abs(), m.c1.abs().ln().abs(), m.c4.abs());
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
    })
}
