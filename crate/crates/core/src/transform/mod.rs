//! Fiber-affine point transformations `t̃ = T(t)`, `x̃ = X¹(t) x + X⁰(t)`,
//! `ũ = (X¹/T_t) u + (X¹_t/T_t) x + X⁰_t/T_t` and their action on equations.

pub mod bell;
pub mod classifying;
pub mod gauge;
mod inverse;

use crate::error::{Error, Result};
use crate::expr::sample::{admissible_points, SampleBox};
use crate::expr::{Expr, Point, Var};
use crate::model::{ReducedEquation, TimeDependentEquation};

pub use classifying::{classifying_residuals, ClassifyingResiduals};
pub use gauge::{gauge_stationary, GaugeResult, GaugeTransformation};
pub use inverse::invert_time_map;

#[derive(Clone, Debug)]
pub struct FiberTransformation {
    pub t: Expr,
    pub x1: Expr,
    pub x0: Expr,
    /// Interval of source times on which the map is used.
    pub t_domain: (f64, f64),
    /// Closed-form `T⁻¹` when known.
    pub t_inverse: Option<Expr>,
}

/// Time derivative along a reparametrisation: `d/dt = (1/T0'(s)) d/ds`.
fn dt(f: &Expr, t0s: &Expr) -> Expr {
    f.diff(Var::T).div(t0s)
}

/// Components of a transformation with all t-derivatives expanded, written in
/// the time parameter `s` of a source whose time is `T0(s)`.
pub(crate) struct Expanded {
    pub t: Expr,
    pub x1: Expr,
    pub x0: Expr,
    /// T_t
    pub tdot: Expr,
    /// T_tt
    pub tddot: Expr,
    pub x1t: Expr,
    pub x0t: Expr,
    pub t0s: Expr,
}

impl FiberTransformation {
    pub fn new(t: Expr, x1: Expr, x0: Expr) -> FiberTransformation {
        FiberTransformation {
            t,
            x1,
            x0,
            t_domain: SampleBox::standard().t,
            t_inverse: None,
        }
    }

    pub fn identity() -> FiberTransformation {
        FiberTransformation::new(Expr::t(), Expr::one(), Expr::zero()).with_inverse(Expr::t())
    }

    pub fn with_inverse(mut self, inv: Expr) -> FiberTransformation {
        self.t_inverse = Some(inv);
        self
    }

    pub fn with_domain(mut self, t_domain: (f64, f64)) -> FiberTransformation {
        self.t_domain = t_domain;
        self
    }

    pub(crate) fn expand(&self, time_map: &Expr) -> Expanded {
        let t0s = time_map.diff(Var::T);
        let (t, x1, x0) = if matches!(time_map.node(), crate::expr::Node::Var(Var::T)) {
            (self.t.clone(), self.x1.clone(), self.x0.clone())
        } else {
            (
                self.t.subst(Var::T, time_map),
                self.x1.subst(Var::T, time_map),
                self.x0.subst(Var::T, time_map),
            )
        };
        let tdot = dt(&t, &t0s);
        let tddot = dt(&tdot, &t0s);
        let x1t = dt(&x1, &t0s);
        let x0t = dt(&x0, &t0s);
        Expanded {
            t,
            x1,
            x0,
            tdot,
            tddot,
            x1t,
            x0t,
            t0s,
        }
    }

    /// Check `T_t·X¹ ≠ 0` at sample times of the domain.
    pub fn check_invariants(&self) -> Result<()> {
        let tt = self.t.diff(Var::T).compile();
        let x1 = self.x1.compile();
        let (lo, hi) = self.t_domain;
        let mut sign = None;
        for i in 0..=32 {
            let s = lo + (hi - lo) * i as f64 / 32.0;
            let p = Point { t: s, x: 0.0 };
            let (a, b) = (tt.eval(p), x1.eval(p));
            if !(a.is_finite() && b.is_finite()) || a == 0.0 || b == 0.0 {
                return Err(Error::nondegenerate(format!(
                    "T_t·X1 vanishes or is undefined at t={s}"
                )));
            }
            match sign {
                None => sign = Some(a.signum()),
                Some(sg) if sg != a.signum() => {
                    return Err(Error::nondegenerate("T_t changes sign on the time domain"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Image of `x` under the map, as an expression in (t, x).
    pub fn x_image(&self) -> Expr {
        self.x1.mul(&Expr::x()).add(&self.x0)
    }

    /// Pushforward of `u(s, x)` for a source with time `T0(s)`; the result is
    /// a function of (s, x̃).
    pub fn pushforward_in(&self, u: &Expr, time_map: &Expr) -> Expr {
        let e = self.expand(time_map);
        let xs = Expr::x().sub(&e.x0).div(&e.x1);
        let u_src = u.subst(Var::X, &xs);
        e.x1.div(&e.tdot)
            .mul(&u_src)
            .add(&e.x1t.div(&e.tdot).mul(&xs))
            .add(&e.x0t.div(&e.tdot))
    }

    pub fn pushforward(&self, u: &Expr) -> Expr {
        self.pushforward_in(u, &Expr::t())
    }

    /// Transform a reduced equation. The result is parameterised by the source
    /// time `s`, with `t̃ = T(s)` recorded as its time map.
    pub fn apply_reduced(&self, eq: &ReducedEquation) -> TimeDependentEquation {
        self.apply(&eq.to_time_dependent())
    }

    /// Transform an equation that is itself parameterised by `s`.
    pub fn apply(&self, eq: &TimeDependentEquation) -> TimeDependentEquation {
        let e = self.expand(&eq.time_map);
        let xs = Expr::x().sub(&e.x0).div(&e.x1);
        let at = |c: &Expr| c.subst(Var::X, &xs);
        let a: Vec<Expr> =
            eq.a.iter()
                .enumerate()
                .map(|(i, aj)| e.x1.powi(i as i64 + 2).div(&e.tdot).mul(&at(aj)))
                .collect();
        let t_ratio = e.tddot.div(&e.tdot);
        let a0 = at(&eq.a0)
            .add(&Expr::int(2).mul(&e.x1t).div(&e.x1))
            .sub(&t_ratio)
            .div(&e.tdot);
        let k1 = e.x1t.div(&e.tdot);
        let k0 = e.x0t.div(&e.tdot);
        let b =
            e.x1.div(&e.tdot.powi(2))
                .mul(&at(&eq.b))
                .add(&dt(&k1, &e.t0s).div(&e.tdot).mul(&xs))
                .add(&dt(&k0, &e.t0s).div(&e.tdot))
                .sub(&k1.mul(&xs).add(&k0).mul(&a0));
        TimeDependentEquation {
            order: eq.order,
            a,
            a0,
            b,
            time_map: e.t,
            domain: self.image_box(eq.domain, &eq.time_map),
        }
    }

    /// Box in (s, x̃) covering the image of a source box.
    fn image_box(&self, src: SampleBox, time_map: &Expr) -> SampleBox {
        let e = self.expand(time_map);
        let img = e.x1.mul(&Expr::x()).add(&e.x0).compile();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=8 {
            for k in 0..=8 {
                let p = Point {
                    t: src.t.0 + (src.t.1 - src.t.0) * i as f64 / 8.0,
                    x: src.x.0 + (src.x.1 - src.x.0) * k as f64 / 8.0,
                };
                let v = img.eval(p);
                if v.is_finite() {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        if !(lo < hi) {
            return src;
        }
        SampleBox::new(src.t, (lo, hi))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &FiberTransformation) -> FiberTransformation {
        let t1 = &first.t;
        let x1_2 = self.x1.subst(Var::T, t1);
        let t = self.t.subst(Var::T, t1);
        let x1 = x1_2.mul(&first.x1);
        let x0 = x1_2.mul(&first.x0).add(&self.x0.subst(Var::T, t1));
        let t_inverse = match (&first.t_inverse, &self.t_inverse) {
            (Some(i1), Some(i2)) => Some(i1.subst(Var::T, i2)),
            _ => None,
        };
        FiberTransformation {
            t,
            x1,
            x0,
            t_domain: first.t_domain,
            t_inverse,
        }
    }

    /// Closed-form `T⁻¹`, from the stored value or by symbolic inversion.
    pub fn time_inverse(&self) -> Result<Expr> {
        match &self.t_inverse {
            Some(i) => Ok(i.clone()),
            None => invert_time_map(&self.t, self.t_domain),
        }
    }

    /// Image of the time domain under `T`.
    pub fn image_domain(&self) -> (f64, f64) {
        let t = self.t.compile();
        let (a, b) = (t.eval_tx(self.t_domain.0, 0.0), t.eval_tx(self.t_domain.1, 0.0));
        (a.min(b), a.max(b))
    }

    pub fn invert(&self) -> Result<FiberTransformation> {
        let inv = self.time_inverse()?;
        let x1 = self.x1.subst(Var::T, &inv);
        let x0 = self.x0.subst(Var::T, &inv);
        Ok(FiberTransformation {
            t: inv,
            x1: x1.recip(),
            x0: x0.neg().div(&x1),
            t_domain: self.image_domain(),
            t_inverse: Some(self.t.clone()),
        })
    }
}

impl TimeDependentEquation {
    /// Express coefficients in the new time `t̃` via `s = T⁻¹(t̃)`.
    pub fn reparametrize(&self, inverse: &Expr, t_domain: (f64, f64)) -> TimeDependentEquation {
        let sub = |e: &Expr| e.subst(Var::T, inverse);
        TimeDependentEquation {
            order: self.order,
            a: self.a.iter().map(sub).collect(),
            a0: sub(&self.a0),
            b: sub(&self.b),
            time_map: Expr::t(),
            domain: SampleBox::new(t_domain, self.domain.x),
        }
    }
}

/// Outcome of comparing two equations coefficient by coefficient.
#[derive(Clone, Debug)]
pub struct CoefficientComparison {
    pub equal: bool,
    pub max_dev: f64,
    pub worst: Option<(String, Point)>,
}

/// Compare coefficients of two (s, x)-parameterised equations at points of
/// `bx`. Coefficients are compared with the symmetric relative deviation.
pub fn compare_equations(
    a: &TimeDependentEquation,
    b: &TimeDependentEquation,
    bx: SampleBox,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<CoefficientComparison> {
    if a.order != b.order {
        return Ok(CoefficientComparison {
            equal: false,
            max_dev: f64::INFINITY,
            worst: None,
        });
    }
    let mut pairs: Vec<(String, Expr, Expr)> = (2..=a.order)
        .map(|j| (format!("A[{j}]"), a.coeff(j), b.coeff(j)))
        .collect();
    pairs.push(("A0".into(), a.a0.clone(), b.a0.clone()));
    pairs.push(("B".into(), a.b.clone(), b.b.clone()));
    pairs.push(("T".into(), a.time_map.clone(), b.time_map.clone()));
    let compiled: Vec<_> = pairs
        .iter()
        .map(|(n, x, y)| (n.clone(), x.compile(), y.compile()))
        .collect();
    let pts = admissible_points(bx, n, seed, |p| {
        compiled
            .iter()
            .all(|(_, x, y)| x.eval(p).is_finite() && y.eval(p).is_finite())
    })?;
    let mut out = CoefficientComparison {
        equal: true,
        max_dev: 0.0,
        worst: None,
    };
    for p in pts {
        for (name, x, y) in &compiled {
            let d = crate::expr::sample::rel_dev(x.eval(p), y.eval(p));
            if d > out.max_dev || out.worst.is_none() {
                out.max_dev = d.max(out.max_dev);
                out.worst = Some((name.clone(), p));
            }
        }
    }
    out.equal = out.max_dev <= tol;
    Ok(out)
}
