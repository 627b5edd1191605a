//! Equivalence groups of the normalized subclasses: time-map families, group
//! elements, their realization as fiber transformations and their action on
//! subclass parameters.
//!
//! Formulas act in the centred coordinate `y = x + β`; a realized element maps
//! `x ↦ X¹(x + β) + X⁰ − s`, so the target has `β̃ = s`.
//!
//! Parameter slots of [`GroupElement::c`] (index = subscript):
//!
//! | tag        | used                                            |
//! |------------|-------------------------------------------------|
//! | I1, I01    | c1 c2 (T), c4, c5, ε                            |
//! | I00        | c0..c3 (Möbius), c4, c5 (P²), ε, P¹, P²         |
//! | II0        | c1 c2 (T), c3 c4 (X¹)                           |
//! | II1        | c1..c4, variant                                 |
//! | III        | c1 c2 (T), c3, c4, c5                           |
//! | IV1        | c1 c2 c3 (X⁰), c4 = X¹, c5 = T¹, c6 = T⁰        |
//! | IV0_high   | c1..c7, ε                                       |
//! | IV0_2      | c0..c3 (Möbius), c4, c5 (P²), c6 (R²), c7 c8 (X⁰), ε, P¹, P² |

pub mod io;
pub mod random;
pub mod recover;
pub mod tfamily;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expr::sample::sample_equiv;
use crate::expr::{Expr, Point, Var};
use crate::model::{instantiate_normal_form, SubclassParams, Tag};
use crate::transform::FiberTransformation;

pub use recover::recover;
pub use tfamily::{
    check_monotone, loglike_residual, mk_t_loglike, mk_t_mobius, schwarzian, LoglikeBranch, MobiusParams, TFamilyParams,
};

/// Parameterisation for subclasses that have both a full and an effective
/// generalized group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Effective,
    Full,
}

/// First stage `P¹`, gauging `b₀` (I00) or `b₁` (IV0_2) to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage1 {
    Auto,
    Id,
    Tan,
    Exp,
}

/// Last stage `P²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage2 {
    Id,
    Log,
    Atan,
}

impl Stage1 {
    pub fn name(self) -> &'static str {
        match self {
            Stage1::Auto => "auto",
            Stage1::Id => "t",
            Stage1::Tan => "tan",
            Stage1::Exp => "exp",
        }
    }
}

impl Stage2 {
    pub fn name(self) -> &'static str {
        match self {
            Stage2::Id => "id",
            Stage2::Log => "log",
            Stage2::Atan => "atan",
        }
    }
}

impl FromStr for Stage1 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Stage1> {
        match s.trim() {
            "auto" => Ok(Stage1::Auto),
            "t" | "id" => Ok(Stage1::Id),
            "tan" => Ok(Stage1::Tan),
            "exp" => Ok(Stage1::Exp),
            other => Err(Error::domain(format!("unknown P1 stage `{other}`"))),
        }
    }
}

impl FromStr for Stage2 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Stage2> {
        match s.trim() {
            "id" | "t" => Ok(Stage2::Id),
            "log" | "ln" => Ok(Stage2::Log),
            "atan" | "arctan" => Ok(Stage2::Atan),
            other => Err(Error::domain(format!("unknown P2 stage `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub tag: Tag,
    /// `c0..c8`.
    pub c: [f64; 9],
    pub eps: f64,
    pub variant: Variant,
    pub p1: Stage1,
    pub p2: Stage2,
    /// Target shift; the image has `β̃ = s`.
    pub s: f64,
}

impl GroupElement {
    pub fn new(tag: Tag, c: [f64; 9]) -> GroupElement {
        GroupElement {
            tag,
            c,
            eps: 1.0,
            variant: Variant::Effective,
            p1: Stage1::Auto,
            p2: Stage2::Id,
            s: 0.0,
        }
    }

    /// The identity of the group acting on `θ`.
    pub fn identity(theta: &SubclassParams) -> GroupElement {
        let mut c = [0.0; 9];
        let mut g = GroupElement::new(theta.tag, c);
        g.s = theta.beta;
        match theta.tag {
            Tag::I1 => {
                c[1] = 1.0;
                c[4] = 1.0;
                c[5] = theta.b1;
            }
            Tag::I01 => {
                c[1] = 1.0;
                c[4] = 1.0;
                c[5] = theta.a00;
            }
            Tag::I00 | Tag::IV0_2 => {
                c[0] = 1.0;
                c[1] = 1.0;
                c[4] = 1.0;
                let (b, k) = if theta.tag == Tag::I00 {
                    (theta.b0, 1.0)
                } else {
                    (theta.b1, 0.5)
                };
                g.p2 = if b > 0.0 {
                    c[5] = 2.0 * k * b.sqrt();
                    Stage2::Log
                } else if b < 0.0 {
                    c[5] = 0.5 / k * (-b).sqrt();
                    Stage2::Atan
                } else {
                    Stage2::Id
                };
                if theta.tag == Tag::IV0_2 {
                    c[6] = if b == 0.0 { theta.b0 } else { -theta.b0 };
                }
            }
            Tag::II0 | Tag::II1 => {
                c[1] = 1.0;
                c[4] = if theta.tag == Tag::II0 { 1.0 } else { 0.0 };
            }
            Tag::III => {
                c[1] = 1.0;
                c[4] = 1.0;
                c[5] = 1.0;
            }
            Tag::IV1 => {
                c[4] = 1.0;
                c[5] = 1.0;
            }
            Tag::IV0High => {
                c[1] = 1.0;
                c[3] = theta.a00;
                c[4] = 1.0;
                c[5] = theta.b0;
            }
            Tag::F0 => {}
        }
        g.c = c;
        g
    }

    /// Descriptive branch label for reports.
    pub fn branch(&self, theta: &SubclassParams) -> String {
        let c = &self.c;
        match self.tag {
            Tag::I1 | Tag::I01 | Tag::III | Tag::IV0High => loglike_params(self, theta)
                .map(|p| p.branch().name().to_string())
                .unwrap_or_else(|_| "invalid".into()),
            Tag::I00 | Tag::IV0_2 => {
                format!(
                    "P1={},P2={}",
                    resolve_p1(self, theta).map(Stage1::name).unwrap_or("invalid"),
                    self.p2.name()
                )
            }
            Tag::IV1 => iv1_branch(theta).name().to_string(),
            Tag::II1 => match self.variant {
                Variant::Effective => "effective".into(),
                Variant::Full => "full".into(),
            },
            Tag::II0 => if c[3] == 0.0 { "c3=0" } else { "general" }.into(),
            Tag::F0 => "none".into(),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.tag)?;
        for (i, v) in self.c.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "c{i}={v}")?;
        }
        write!(f, ", ε={}, s={})", self.eps, self.s)
    }
}

/// Branches of the `X⁰` ODE `X⁰_ttt − a₀X⁰_tt − b₁X⁰_t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Iv1Branch {
    /// `D > 0`, `b₁ ≠ 0`.
    Distinct,
    /// `b₁ = 0`, `a₀ ≠ 0`.
    ZeroRoot,
    /// `D = 0`, `a₀ ≠ 0`.
    Double,
    /// `a₀ = b₁ = 0`.
    Polynomial,
    /// `D < 0`.
    Oscillating,
}

impl Iv1Branch {
    pub const ALL: [Iv1Branch; 5] = [
        Iv1Branch::Distinct,
        Iv1Branch::ZeroRoot,
        Iv1Branch::Double,
        Iv1Branch::Polynomial,
        Iv1Branch::Oscillating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Iv1Branch::Distinct => "D>0",
            Iv1Branch::ZeroRoot => "lambda1=0",
            Iv1Branch::Double => "D=0",
            Iv1Branch::Polynomial => "a0=b1=0",
            Iv1Branch::Oscillating => "D<0",
        }
    }
}

pub fn iv1_branch(theta: &SubclassParams) -> Iv1Branch {
    let (a0, b1) = (theta.a00, theta.b1);
    let d = a0 * a0 + 4.0 * b1;
    if a0 == 0.0 && b1 == 0.0 {
        Iv1Branch::Polynomial
    } else if b1 == 0.0 {
        Iv1Branch::ZeroRoot
    } else if d == 0.0 {
        Iv1Branch::Double
    } else if d > 0.0 {
        Iv1Branch::Distinct
    } else {
        Iv1Branch::Oscillating
    }
}

/// `X⁰(t)` for IV1 and the constant `K` entering `b̃₀`.
pub fn iv1_x0(theta: &SubclassParams, c1: f64, c2: f64, c3: f64) -> (Expr, f64) {
    let (a0, b1) = (theta.a00, theta.b1);
    let f = Expr::float;
    let t = Expr::t();
    let ex = |l: f64| f(l).mul(&t).exp();
    let d = a0 * a0 + 4.0 * b1;
    let (x0, k) = match iv1_branch(theta) {
        Iv1Branch::Distinct => {
            let (l1, l2) = ((a0 - d.sqrt()) / 2.0, (a0 + d.sqrt()) / 2.0);
            let (l1, l2) = if l1.abs() <= l2.abs() { (l1, l2) } else { (l2, l1) };
            (f(c1).mul(&ex(l1)).add(&f(c2).mul(&ex(l2))), -b1 * c3)
        }
        Iv1Branch::ZeroRoot => (f(c1).mul(&t).add(&f(c2).mul(&ex(a0))), -a0 * c1),
        Iv1Branch::Double => (f(c1).add(&f(c2).mul(&t)).mul(&ex(a0 / 2.0)), -b1 * c3),
        Iv1Branch::Polynomial => (f(c1).mul(&t.powi(2)).add(&f(c2).mul(&t)), 2.0 * c1),
        Iv1Branch::Oscillating => {
            let w = f((-d).sqrt() / 2.0).mul(&t);
            (
                ex(a0 / 2.0).mul(&f(c1).mul(&w.sin()).add(&f(c2).mul(&w.cos()))),
                -b1 * c3,
            )
        }
    };
    (x0.add(&f(c3)), k)
}

/// Log-like time-map parameters `(γ, δ, c1, c2)` of an element.
pub fn loglike_params(g: &GroupElement, theta: &SubclassParams) -> Result<TFamilyParams> {
    let c = &g.c;
    let (al, r) = (theta.alpha, theta.order() as f64);
    let (gamma, delta) = match g.tag {
        Tag::I1 => {
            if c[4] == 0.0 {
                return Err(Error::nondegenerate("c4 ≠ 0 required"));
            }
            (-al * c[5] / (c[4] * theta.a01), -al * theta.b1 / theta.a01)
        }
        Tag::I01 => (al * c[5] / (al + 2.0), theta.a00 * al / (al + 2.0)),
        Tag::III => (theta.a00 + c[3], theta.a00),
        Tag::IV0High => (r * c[3] / (r - 2.0), r * theta.a00 / (r - 2.0)),
        _ => return Err(Error::domain(format!("{} has no log-like time map", g.tag))),
    };
    Ok(TFamilyParams::new(gamma, delta, c[1], c[2]))
}

pub(crate) fn resolve_p1(g: &GroupElement, theta: &SubclassParams) -> Result<Stage1> {
    let b = if g.tag == Tag::I00 { theta.b0 } else { theta.b1 };
    let want = if b == 0.0 {
        Stage1::Id
    } else if b < 0.0 {
        Stage1::Tan
    } else {
        Stage1::Exp
    };
    match g.p1 {
        Stage1::Auto => Ok(want),
        p if p == want => Ok(p),
        p => Err(Error::domain(format!(
            "P1 = {} does not match the sign of the gauged coefficient ({b}); expected {}",
            p.name(),
            want.name()
        ))),
    }
}

fn check_eps(g: &GroupElement) -> Result<()> {
    if g.eps == 1.0 || g.eps == -1.0 {
        Ok(())
    } else {
        Err(Error::nondegenerate(format!("ε must be ±1, got {}", g.eps)))
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::nondegenerate(msg))
    }
}

/// Require `e(t) > 0` on the interval.
fn positive_in_t(e: &Expr, dom: (f64, f64), what: &str) -> Result<()> {
    let c = e.compile();
    for i in 0..=64 {
        let s = dom.0 + (dom.1 - dom.0) * i as f64 / 64.0;
        let v = c.eval_tx(s, 0.0);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::nondegenerate(format!("{what} > 0 fails at t = {s}")));
        }
    }
    Ok(())
}

fn interval_image(e: &Expr, dom: (f64, f64)) -> (f64, f64) {
    let c = e.compile();
    let (a, b) = (c.eval_tx(dom.0, 0.0), c.eval_tx(dom.1, 0.0));
    (a.min(b), a.max(b))
}

/// A single stage `t̃ = T, x̃ = X¹x + X⁰` with its time inverse.
fn stage(t: Expr, x1: Expr, x0: Expr, inv: Expr, dom: (f64, f64)) -> FiberTransformation {
    FiberTransformation::new(t, x1, x0).with_inverse(inv).with_domain(dom)
}

/// Pieces of the staged construction shared by I00 and IV0_2.
struct Staged {
    p1: Stage1,
    k1: f64,
}

fn stage1_map(st: &Staged, r1: Expr, dom: (f64, f64)) -> FiberTransformation {
    let f = Expr::float;
    let t = Expr::t();
    let (p, inv) = match st.p1 {
        Stage1::Tan => (f(st.k1).mul(&t).tan(), t.atan().div(&f(st.k1))),
        Stage1::Exp => (f(2.0 * st.k1).mul(&t).exp(), t.ln().div(&f(2.0 * st.k1))),
        _ => (t.clone(), t.clone()),
    };
    let x1 = p.diff(Var::T).sqrt();
    stage(p, x1, r1, inv, dom)
}

/// `P²` stage; `k` scales `c5` inside the log (`ln|t̄|/(k c5)`) and `m` inside
/// the arctan (`arctan(t̄)/(m c5)`).
fn stage2_map(p2: Stage2, c5: f64, k: f64, m: f64, r2: Expr, dom: (f64, f64)) -> Result<FiberTransformation> {
    let f = Expr::float;
    let t = Expr::t();
    if p2 != Stage2::Id {
        require(c5 != 0.0, "c5 ≠ 0 required for the P2 stage")?;
    }
    let (p, inv) = match p2 {
        Stage2::Id => (t.clone(), t.clone()),
        Stage2::Log => {
            if dom.0 * dom.1 <= 0.0 {
                return Err(Error::nondegenerate("ln|t̄| stage needs t̄ of one sign"));
            }
            let sigma = dom.0.signum();
            (t.ln().div(&f(k * c5)), f(sigma).mul(&f(k * c5).mul(&t).exp()))
        }
        Stage2::Atan => (t.atan().div(&f(m * c5)), f(m * c5).mul(&t).tan()),
    };
    let pt = p.diff(Var::T);
    positive_in_t(&pt, dom, "P2_t")?;
    Ok(stage(p, pt.sqrt(), r2, inv, dom))
}

/// Möbius stage with `X⁰ = k0 + k1·T`; `k1` is the Galilean boost.
fn mobius_core(g: &GroupElement, k0: f64, k1: f64, dom: (f64, f64)) -> Result<FiberTransformation> {
    let c = &g.c;
    let m = MobiusParams {
        c0: c[0],
        c1: c[1],
        c2: c[2],
        c3: c[3],
    };
    let t = mk_t_mobius(m, dom)?;
    require(c[4] * m.det() > 0.0, "c4·δ > 0 required")?;
    let x1 = Expr::float(g.eps).mul(&Expr::float(c[4]).mul(&t.diff(Var::T)).sqrt());
    let x0 = Expr::float(k0).add(&Expr::float(k1).mul(&t));
    Ok(stage(t, x1, x0, m.inverse_expr(), dom))
}

/// Stage-one shift `R¹` for the IV0_2 gauge of `(b₀, b₁)`.
pub fn iv02_r1(b0: f64, b1: f64) -> Expr {
    let f = Expr::float;
    let t = Expr::t();
    if b1 == 0.0 {
        f(-b0 / 2.0).mul(&t.powi(2))
    } else if b1 < 0.0 {
        let w = (-b1).sqrt();
        f(-b0 * (-b1).powf(-0.75)).div(&f(w).mul(&t).cos())
    } else {
        let w = b1.sqrt();
        f(4.0 * b0 * (2.0 * w).powf(-1.5)).mul(&f(w).mul(&t).exp())
    }
}

/// Realize `g` acting on `θ` on the default time domain of `θ`.
pub fn realize(g: &GroupElement, theta: &SubclassParams) -> Result<FiberTransformation> {
    realize_on(g, theta, theta.default_domain().t)
}

/// Realize `g` acting on `θ` on a given source time interval.
pub fn realize_on(g: &GroupElement, theta: &SubclassParams, dom: (f64, f64)) -> Result<FiberTransformation> {
    theta.check_gates()?;
    if g.tag != theta.tag {
        return Err(Error::domain(format!("element for {} applied to {}", g.tag, theta.tag)));
    }
    if !g.c.iter().chain([&g.eps, &g.s]).all(|v| v.is_finite()) {
        return Err(Error::nondegenerate("group parameters must be finite"));
    }
    if !theta.tag.uses_beta() && g.s != 0.0 {
        return Err(Error::domain(format!(
            "{} has no β; the target shift s must be 0",
            g.tag
        )));
    }
    let c = &g.c;
    let f = Expr::float;
    let t = Expr::t();
    let r = theta.order();
    let mut fiber = match g.tag {
        Tag::I1 | Tag::I01 => {
            check_eps(g)?;
            require(c[4] != 0.0, "c4 ≠ 0 required")?;
            let tm = mk_t_loglike(loglike_params(g, theta)?, dom)?;
            let ct = f(c[4]).mul(&tm.diff(Var::T));
            positive_in_t(&ct, dom, "c4·T_t")?;
            let x1 = f(g.eps).mul(&ct.powf(-1.0 / theta.alpha));
            FiberTransformation::new(tm, x1, Expr::zero())
        }
        Tag::III => {
            require(c[4] * c[5] != 0.0, "c1·c4·c5 ≠ 0 required")?;
            let tm = mk_t_loglike(loglike_params(g, theta)?, dom)?;
            let ct = f(c[4]).mul(&tm.diff(Var::T));
            positive_in_t(&ct, dom, "c4·T_t")?;
            let x0 = f(-c[5] / theta.alpha).mul(&ct.ln());
            FiberTransformation::new(tm, f(c[5]), x0)
        }
        Tag::IV0High => {
            check_eps(g)?;
            require(r % 2 == 0 || g.eps == 1.0, "ε = 1 required for odd r")?;
            let tm = mk_t_loglike(loglike_params(g, theta)?, dom)?;
            let ct = f(c[4]).mul(&tm.diff(Var::T));
            positive_in_t(&ct, dom, "c4·T_t")?;
            let x1 = f(g.eps).mul(&ct.powf(1.0 / r as f64));
            let s0 = if theta.a00 != 0.0 {
                f(theta.b0 / theta.b1)
            } else {
                f(-theta.b0 / 2.0).mul(&t.powi(2))
            };
            let x0 = x1.mul(&s0).add(&iv0_high_y(theta, c).subst(Var::T, &tm));
            FiberTransformation::new(tm, x1, x0)
        }
        Tag::II0 => {
            require(c[1] * c[4] != 0.0, "c1·c4 ≠ 0 required")?;
            let x1 = f(c[4]).mul(&f(c[3]).mul(&t).exp());
            let tm = f(c[1]).mul(&t).add(&f(c[2]));
            let inv = t.sub(&f(c[2])).div(&f(c[1]));
            FiberTransformation::new(tm, x1, Expr::zero()).with_inverse(inv)
        }
        Tag::II1 => {
            require(c[1] != 0.0, "c1 ≠ 0 required")?;
            let a01 = theta.a01;
            let (shift, lead) = match g.variant {
                Variant::Effective => (c[2] / a01, -c[3] / a01),
                Variant::Full => (c[2], c[3]),
            };
            let tm = f(c[1]).mul(&t).add(&f(shift));
            let inv = t.sub(&f(shift)).div(&f(c[1]));
            let x1 = f(lead).add(&f(c[4]).mul(&f(a01 / 2.0).mul(&t).exp())).exp();
            FiberTransformation::new(tm, x1, Expr::zero()).with_inverse(inv)
        }
        Tag::IV1 => {
            require(c[4] * c[5] != 0.0, "X1·T1 ≠ 0 required")?;
            let (x0, _) = iv1_x0(theta, c[1], c[2], c[3]);
            let tm = f(c[5]).mul(&t).add(&f(c[6]));
            let inv = t.sub(&f(c[6])).div(&f(c[5]));
            FiberTransformation::new(tm, f(c[4]), x0).with_inverse(inv)
        }
        Tag::I00 | Tag::IV0_2 => {
            check_eps(g)?;
            let i00 = g.tag == Tag::I00;
            let b = if i00 { theta.b0 } else { theta.b1 };
            let st = Staged {
                p1: resolve_p1(g, theta)?,
                k1: b.abs().sqrt(),
            };
            let r1 = if i00 { Expr::zero() } else { iv02_r1(theta.b0, theta.b1) };
            let s1 = stage1_map(&st, r1, dom);
            let d1 = interval_image(&s1.t, dom);
            let (k0, k1) = if i00 { (0.0, 0.0) } else { (c[7], c[8]) };
            let core = mobius_core(g, k0, k1, d1)?;
            let d2 = interval_image(&core.t, d1);
            let (k, m, r2) = if i00 {
                (1.0, 2.0, Expr::zero())
            } else {
                let r2 = match g.p2 {
                    Stage2::Id => f(c[6] / 2.0).mul(&t.powi(2)),
                    Stage2::Log => f(c[6] / (c[5] * c[5])),
                    Stage2::Atan => f(-c[6] / (c[5] * c[5])),
                };
                (2.0, 1.0, r2)
            };
            let s3 = stage2_map(g.p2, c[5], k, m, r2, d2)?;
            s3.compose(&core.compose(&s1))
        }
        Tag::F0 => return Err(Error::domain("F0 has no equivalence group")),
    };
    if theta.tag.uses_beta() {
        fiber.x0 = fiber.x0.add(&fiber.x1.mul(&f(theta.beta))).sub(&f(g.s));
    }
    fiber.t_domain = dom;
    fiber.check_invariants()?;
    Ok(fiber)
}

/// `Y(τ)` of the IV0_high construction.
fn iv0_high_y(theta: &SubclassParams, c: &[f64; 9]) -> Expr {
    let r = theta.order() as f64;
    let f = Expr::float;
    let tau = Expr::t();
    let c3 = c[3];
    if c3 == 0.0 {
        f(c[5] / 2.0).mul(&tau.powi(2)).add(&f(c[6]).mul(&tau)).add(&f(c[7]))
    } else {
        let bt1 = (r - 1.0) * c3 * c3 / ((r - 2.0) * (r - 2.0));
        let (l1, l2) = (c3 * (r - 1.0) / (r - 2.0), -c3 / (r - 2.0));
        f(-c[5] / bt1)
            .add(&f(c[6]).mul(&f(l1).mul(&tau).exp()))
            .add(&f(c[7]).mul(&f(l2).mul(&tau).exp()))
    }
}

/// Target parameters `θ̃` of `g` acting on `θ`.
pub fn act(g: &GroupElement, theta: &SubclassParams) -> Result<SubclassParams> {
    theta.check_gates()?;
    if g.tag != theta.tag {
        return Err(Error::domain(format!("element for {} applied to {}", g.tag, theta.tag)));
    }
    let c = &g.c;
    let mut out = theta.clone();
    let scale_a = |out: &mut SubclassParams, k: &dyn Fn(usize) -> f64| {
        for (i, a) in out.a.iter_mut().enumerate() {
            *a *= k(i + 2);
        }
    };
    match g.tag {
        Tag::I1 => {
            scale_a(&mut out, &|_| c[4]);
            out.a01 *= c[4];
            out.b2 *= c[4] * c[4];
            out.b1 = c[5];
        }
        Tag::I01 => {
            scale_a(&mut out, &|_| c[4]);
            out.a00 = c[5];
            out.b2 *= c[4] * c[4];
        }
        Tag::I00 => {
            scale_a(&mut out, &|_| c[4]);
            out.b2 *= c[4] * c[4];
            out.b0 = match g.p2 {
                Stage2::Id => 0.0,
                Stage2::Log => c[5] * c[5] / 4.0,
                Stage2::Atan => -4.0 * c[5] * c[5],
            };
        }
        Tag::II0 => {
            scale_a(&mut out, &|_| 1.0 / c[1]);
            out.a00 = (theta.a00 + 2.0 * c[3]) / c[1];
            out.b0 = (theta.b0 - c[3] * c[3] - theta.a00 * c[3]) / (c[1] * c[1]);
        }
        Tag::II1 => {
            scale_a(&mut out, &|_| 1.0 / c[1]);
            let (a00, a01, b0, c1, c3) = (theta.a00, theta.a01, theta.b0, c[1], c[3]);
            out.a01 = a01 / c1;
            match g.variant {
                Variant::Effective => {
                    out.a00 = (a00 + c3) / c1;
                    out.b0 = (4.0 * b0 + (a01 - 2.0 * a00) * c3 - c3 * c3) / (4.0 * c1 * c1);
                }
                Variant::Full => {
                    out.a00 = (a00 - a01 * c3) / c1;
                    out.b0 = (4.0 * b0 - a01 * a01 * (c3 * c3 + c3) + 2.0 * a00 * a01 * c3) / (4.0 * c1 * c1);
                }
            }
        }
        Tag::III => {
            scale_a(&mut out, &|j| c[4] * c[5].powi(j as i32));
            out.alpha = theta.alpha / c[5];
            out.a01 *= c[4];
            out.a00 = theta.a00 + c[3];
            out.b2 *= c[4] * c[4] * c[5];
        }
        Tag::IV1 => {
            let (x1, t1) = (c[4], c[5]);
            scale_a(&mut out, &|j| x1.powi(j as i32) / t1);
            let (_, k) = iv1_x0(theta, c[1], c[2], c[3]);
            out.a00 = theta.a00 / t1;
            out.b1 = theta.b1 / (t1 * t1);
            out.b0 = (x1 * theta.b0 + k) / (t1 * t1);
        }
        Tag::IV0High => {
            let r = theta.order();
            out.a[r - 2] *= c[4];
            out.a00 = c[3];
            out.b0 = c[5];
        }
        Tag::IV0_2 => {
            out.a[0] *= c[4];
            let (b1, b0) = match g.p2 {
                Stage2::Id => (0.0, c[6]),
                Stage2::Log => (c[5] * c[5], -c[6]),
                Stage2::Atan => (-c[5] * c[5], -c[6]),
            };
            out.b1 = b1;
            out.b0 = b0;
        }
        Tag::F0 => return Err(Error::domain("F0 has no equivalence group")),
    }
    if theta.tag.uses_beta() {
        out.beta = g.s;
    }
    let out = out.complete();
    let v = out.gate_violations();
    if !v.is_empty() {
        return Err(Error::Audit(format!(
            "target of {g} leaves {}: {}",
            g.tag,
            v.join("; ")
        )));
    }
    Ok(out)
}

/// Largest deviation between the image of the normal form of `θ` under
/// `realize(g, θ)` and the normal form of `act(g, θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coherence {
    pub max_dev: f64,
    /// Coefficient with the largest deviation.
    pub worst: String,
    pub point: Option<Point>,
}

/// Sample both sides at `x̃ = X¹x + X⁰` over the source box of `θ`.
pub fn coherence(g: &GroupElement, theta: &SubclassParams, n: usize, seed: u64) -> Result<Coherence> {
    coherence_against(g, theta, &act(g, theta)?, n, seed)
}

/// As [`coherence`], against an arbitrary target `θ̃`.
pub fn coherence_against(
    g: &GroupElement,
    theta: &SubclassParams,
    target: &SubclassParams,
    n: usize,
    seed: u64,
) -> Result<Coherence> {
    let fiber = realize(g, theta)?;
    let img = fiber.apply_reduced(&instantiate_normal_form(theta)?);
    let want = instantiate_normal_form(target)?;
    let xi = fiber.x_image();
    let mut pairs: Vec<(String, Expr, Expr)> = (2..=theta.order())
        .map(|j| (format!("A[{j}]"), img.coeff(j), want.coeff(j)))
        .collect();
    pairs.push(("A0".into(), img.a0.clone(), want.a0.clone()));
    pairs.push(("B".into(), img.b.clone(), want.b.clone()));
    let mut out = Coherence {
        max_dev: 0.0,
        worst: String::new(),
        point: None,
    };
    for (name, a, b) in pairs {
        let rep = sample_equiv(
            &a.subst(Var::X, &xi),
            &b.subst(Var::X, &xi),
            theta.default_domain(),
            n,
            0.0,
            seed,
        )?;
        if out.point.is_none() || rep.max_dev > out.max_dev {
            out = Coherence {
                max_dev: rep.max_dev,
                worst: name,
                point: rep.worst,
            };
        }
    }
    Ok(out)
}
