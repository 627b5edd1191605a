//! Equation classes, subclass parameter records and PDE residuals.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expr::sample::SampleBox;
use crate::expr::{Expr, Point, Var};

/// Reduced equation `u_t + u u_x = Σ_{j=2}^r A^j(x) u_j + A⁰(x) u + B(x)`.
#[derive(Clone, Debug)]
pub struct ReducedEquation {
    pub order: usize,
    /// `A^j` for `j = 2..=order`, index `j-2`.
    pub a: Vec<Expr>,
    pub a0: Expr,
    pub b: Expr,
    pub domain: SampleBox,
}

/// Reduced equation with coefficients depending on (s, x̃), where the new time
/// is `t̃ = T(s)`. When `time_map` is `t` the parameter is the time itself.
#[derive(Clone, Debug)]
pub struct TimeDependentEquation {
    pub order: usize,
    pub a: Vec<Expr>,
    pub a0: Expr,
    pub b: Expr,
    pub time_map: Expr,
    pub domain: SampleBox,
}

/// `u_t + C(x) u u_x = Σ_{k=0}^r A^k(x) u_k + B(x)`.
#[derive(Clone, Debug)]
pub struct StationaryGeneralEquation {
    pub order: usize,
    pub c: Expr,
    /// `A^k` for `k = 0..=order`.
    pub a: Vec<Expr>,
    pub b: Expr,
    pub domain: SampleBox,
}

fn check_order(order: usize, len: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::domain(format!("order must be at least 2, got {order}")));
    }
    if len != order - 1 {
        return Err(Error::domain(format!(
            "expected {} coefficients A^2..A^{order}, got {len}",
            order - 1
        )));
    }
    Ok(())
}

impl ReducedEquation {
    pub fn new(a: Vec<Expr>, a0: Expr, b: Expr, domain: SampleBox) -> Result<ReducedEquation> {
        let order = a.len() + 1;
        check_order(order, a.len())?;
        for (name, e) in a.iter().chain([&a0, &b]).enumerate() {
            if e.depends_on(Var::T) {
                return Err(Error::domain(format!("coefficient #{name} depends on t")));
            }
        }
        Ok(ReducedEquation {
            order,
            a,
            a0,
            b,
            domain,
        })
    }

    /// `A^j`, zero outside `2..=r`.
    pub fn coeff(&self, j: usize) -> Expr {
        if (2..=self.order).contains(&j) {
            self.a[j - 2].clone()
        } else {
            Expr::zero()
        }
    }

    pub fn leading(&self) -> &Expr {
        &self.a[self.order - 2]
    }

    pub fn to_time_dependent(&self) -> TimeDependentEquation {
        TimeDependentEquation {
            order: self.order,
            a: self.a.clone(),
            a0: self.a0.clone(),
            b: self.b.clone(),
            time_map: Expr::t(),
            domain: self.domain,
        }
    }

    pub fn with_domain(mut self, domain: SampleBox) -> ReducedEquation {
        self.domain = domain;
        self
    }

    pub fn residual_expr(&self, u: &Expr) -> Expr {
        residual_expr(&self.a, &self.a0, &self.b, &Expr::t(), u)
    }

    /// `u_t + u u_x − Σ A^j u_j − A⁰ u − B` at `p`.
    pub fn residual(&self, u: &Expr, p: Point) -> Result<f64> {
        eval_in_domain(&self.residual_expr(u), p)
    }
}

impl TimeDependentEquation {
    pub fn coeff(&self, j: usize) -> Expr {
        if (2..=self.order).contains(&j) {
            self.a[j - 2].clone()
        } else {
            Expr::zero()
        }
    }

    /// Residual with `u` given as a function of (s, x̃).
    pub fn residual_expr(&self, u: &Expr) -> Expr {
        residual_expr(&self.a, &self.a0, &self.b, &self.time_map, u)
    }

    pub fn residual(&self, u: &Expr, p: Point) -> Result<f64> {
        eval_in_domain(&self.residual_expr(u), p)
    }

    /// The equation as a reduced one when all coefficients are free of the
    /// time parameter.
    pub fn to_reduced(&self, domain: SampleBox) -> Option<ReducedEquation> {
        if self.a.iter().chain([&self.a0, &self.b]).any(|e| e.depends_on(Var::T)) {
            return None;
        }
        ReducedEquation::new(self.a.clone(), self.a0.clone(), self.b.clone(), domain).ok()
    }
}

impl StationaryGeneralEquation {
    pub fn new(c: Expr, a: Vec<Expr>, b: Expr, domain: SampleBox) -> Result<StationaryGeneralEquation> {
        if a.len() < 3 {
            return Err(Error::domain("stationary equation needs A^0..A^r with r >= 2"));
        }
        let order = a.len() - 1;
        for e in a.iter().chain([&c, &b]) {
            if e.depends_on(Var::T) {
                return Err(Error::domain("stationary coefficients must not depend on t"));
            }
        }
        Ok(StationaryGeneralEquation { order, c, a, b, domain })
    }

    pub fn residual_expr(&self, u: &Expr) -> Expr {
        let mut rhs = self.b.clone();
        let mut dk = u.clone();
        for (k, ak) in self.a.iter().enumerate() {
            if k > 0 {
                dk = dk.diff(Var::X);
            }
            rhs = rhs.add(&ak.mul(&dk));
        }
        u.diff(Var::T).add(&self.c.mul(u).mul(&u.diff(Var::X))).sub(&rhs)
    }

    pub fn residual(&self, u: &Expr, p: Point) -> Result<f64> {
        eval_in_domain(&self.residual_expr(u), p)
    }
}

fn residual_expr(a: &[Expr], a0: &Expr, b: &Expr, time_map: &Expr, u: &Expr) -> Expr {
    let ts = time_map.diff(Var::T);
    let mut out = u.diff(Var::T).div(&ts).add(&u.mul(&u.diff(Var::X)));
    let mut dj = u.diff(Var::X);
    for aj in a {
        dj = dj.diff(Var::X);
        out = out.sub(&aj.mul(&dj));
    }
    out.sub(&a0.mul(u)).sub(b)
}

fn eval_in_domain(e: &Expr, p: Point) -> Result<f64> {
    let v = e.compile().eval(p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!(
            "point (t={}, x={}) is outside the domain",
            p.t, p.x
        )))
    }
}

/// Subclass labels of the catalogue plus the complement `F0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    I1,
    I01,
    I00,
    II0,
    II1,
    III,
    IV1,
    IV0High,
    IV0_2,
    F0,
}

impl Tag {
    pub const ALL: [Tag; 10] = [
        Tag::I1,
        Tag::I01,
        Tag::I00,
        Tag::II0,
        Tag::II1,
        Tag::III,
        Tag::IV1,
        Tag::IV0High,
        Tag::IV0_2,
        Tag::F0,
    ];

    /// The nine normalized subclasses.
    pub const SUBCLASSES: [Tag; 9] = [
        Tag::I1,
        Tag::I01,
        Tag::I00,
        Tag::II0,
        Tag::II1,
        Tag::III,
        Tag::IV1,
        Tag::IV0High,
        Tag::IV0_2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tag::I1 => "I1",
            Tag::I01 => "I01",
            Tag::I00 => "I00",
            Tag::II0 => "II0",
            Tag::II1 => "II1",
            Tag::III => "III",
            Tag::IV1 => "IV1",
            Tag::IV0High => "IV0_high",
            Tag::IV0_2 => "IV0_2",
            Tag::F0 => "F0",
        }
    }

    /// Tags whose coefficients are singular at `x = −β`.
    pub fn uses_beta(self) -> bool {
        matches!(self, Tag::I1 | Tag::I01 | Tag::I00 | Tag::II0 | Tag::II1)
    }

    pub fn uses_alpha(self) -> bool {
        matches!(self, Tag::I1 | Tag::I01 | Tag::III)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Tag> {
        Tag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::domain(format!("unknown subclass tag `{s}`")))
    }
}

/// Parameters of a catalogue normal form. Fields not used by a tag are zero.
/// For the IV subclasses `a00` holds `a₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubclassParams {
    pub tag: Tag,
    pub beta: f64,
    pub alpha: f64,
    /// `a_j` for `j = 2..=r`, index `j-2`.
    pub a: Vec<f64>,
    pub a01: f64,
    pub a00: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Relative comparison used for the equality constraints of the catalogue.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

impl SubclassParams {
    pub fn new(tag: Tag, a: Vec<f64>) -> SubclassParams {
        SubclassParams {
            tag,
            beta: 0.0,
            alpha: if tag == Tag::I00 { -2.0 } else { 0.0 },
            a,
            a01: 0.0,
            a00: 0.0,
            b0: 0.0,
            b1: 0.0,
            b2: 0.0,
        }
    }

    pub fn order(&self) -> usize {
        self.a.len() + 1
    }

    pub fn a_r(&self) -> f64 {
        *self.a.last().unwrap_or(&0.0)
    }

    /// Values of the dependent parameters fixed by the catalogue constraints.
    fn derived(&self) -> Vec<(&'static str, f64, f64)> {
        let (al, r) = (self.alpha, self.order() as f64);
        match self.tag {
            Tag::I1 if self.a01 != 0.0 => vec![
                ("a00 = -(α+2)·b1/a01", self.a00, -(al + 2.0) * self.b1 / self.a01),
                (
                    "b0 = -b1²(α+1)/a01²",
                    self.b0,
                    -self.b1 * self.b1 * (al + 1.0) / (self.a01 * self.a01),
                ),
            ],
            Tag::I01 if al != -2.0 => vec![
                ("b1 = 0", self.b1, 0.0),
                ("a01 = 0", self.a01, 0.0),
                (
                    "b0 = -(α+1)·a00²/(α+2)²",
                    self.b0,
                    -(al + 1.0) * self.a00 * self.a00 / ((al + 2.0) * (al + 2.0)),
                ),
            ],
            Tag::I00 => vec![
                ("α = -2", self.alpha, -2.0),
                ("a00 = 0", self.a00, 0.0),
                ("a01 = 0", self.a01, 0.0),
                ("b1 = 0", self.b1, 0.0),
            ],
            Tag::II0 => vec![
                ("a01 = 0", self.a01, 0.0),
                ("b1 = 0", self.b1, 0.0),
                ("b2 = 0", self.b2, 0.0),
            ],
            Tag::II1 => vec![("b1 = 0", self.b1, 0.0), ("b2 = 0", self.b2, 0.0)],
            Tag::III if al != 0.0 => vec![
                ("b0 = -a00²/α", self.b0, -self.a00 * self.a00 / al),
                ("b1 = -a00·a01/α", self.b1, -self.a00 * self.a01 / al),
            ],
            Tag::IV1 => vec![("a01 = 0", self.a01, 0.0), ("b2 = 0", self.b2, 0.0)],
            Tag::IV0High if self.order() > 2 => vec![
                (
                    "b1 = (r-1)·a0²/(r-2)²",
                    self.b1,
                    (r - 1.0) * self.a00 * self.a00 / ((r - 2.0) * (r - 2.0)),
                ),
                ("a01 = 0", self.a01, 0.0),
                ("b2 = 0", self.b2, 0.0),
            ],
            Tag::IV0_2 => vec![
                ("a0 = 0", self.a00, 0.0),
                ("a01 = 0", self.a01, 0.0),
                ("b2 = 0", self.b2, 0.0),
            ],
            _ => vec![],
        }
    }

    /// Overwrite the dependent parameters with their constrained values.
    pub fn complete(mut self) -> SubclassParams {
        let (al, r) = (self.alpha, self.order() as f64);
        match self.tag {
            Tag::I1 if self.a01 != 0.0 => {
                self.a00 = -(al + 2.0) * self.b1 / self.a01;
                self.b0 = -self.b1 * self.b1 * (al + 1.0) / (self.a01 * self.a01);
            }
            Tag::I01 if al != -2.0 => {
                self.b1 = 0.0;
                self.a01 = 0.0;
                self.b0 = -(al + 1.0) * self.a00 * self.a00 / ((al + 2.0) * (al + 2.0));
            }
            Tag::I00 => {
                self.alpha = -2.0;
                self.a00 = 0.0;
                self.a01 = 0.0;
                self.b1 = 0.0;
            }
            Tag::III if al != 0.0 => {
                self.b0 = -self.a00 * self.a00 / al;
                self.b1 = -self.a00 * self.a01 / al;
            }
            Tag::IV0High if self.order() > 2 => {
                self.b1 = (r - 1.0) * self.a00 * self.a00 / ((r - 2.0) * (r - 2.0));
            }
            Tag::IV0_2 => self.a00 = 0.0,
            _ => {}
        }
        if !self.tag.uses_beta() {
            self.beta = 0.0;
        }
        if !self.tag.uses_alpha() && self.tag != Tag::I00 {
            self.alpha = 0.0;
        }
        self
    }

    /// Inequality gates and equality constraints; returns the violated ones.
    pub fn gate_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let ar = self.a_r();
        let r = self.order();
        let params = [self.beta, self.alpha, self.a01, self.a00, self.b0, self.b1, self.b2];
        if params.iter().chain(self.a.iter()).any(|p| !p.is_finite()) {
            v.push("parameters must be finite".to_string());
            return v;
        }
        if r < 2 {
            v.push("order r ≥ 2".into());
            return v;
        }
        let mut gate = |ok: bool, msg: &str| {
            if !ok {
                v.push(format!("{msg} violated"));
            }
        };
        match self.tag {
            Tag::I1 => gate(self.alpha * ar * self.a01 != 0.0, "α·a_r·a01 ≠ 0"),
            Tag::I01 => {
                gate((self.alpha + 2.0) * ar != 0.0, "(α+2)·a_r ≠ 0");
                gate(self.alpha != 0.0, "α ≠ 0");
            }
            Tag::I00 | Tag::II0 => gate(ar != 0.0, "a_r ≠ 0"),
            Tag::II1 => gate(ar * self.a01 != 0.0, "a_r·a01 ≠ 0"),
            Tag::III => gate(self.alpha * ar != 0.0, "α·a_r ≠ 0"),
            Tag::IV1 => {
                gate(ar != 0.0, "a_r ≠ 0");
                let mid: f64 = self.a[..r - 2].iter().map(|a| a.abs()).sum();
                gate(mid != 0.0, "Σ_{j=2}^{r-1} |a_j| ≠ 0");
            }
            Tag::IV0High => {
                gate(ar != 0.0, "a_r ≠ 0");
                gate(r > 2, "r > 2");
                gate(self.a[..r - 2].iter().all(|a| *a == 0.0), "a_j = 0 for 2 ≤ j < r");
            }
            Tag::IV0_2 => {
                gate(ar != 0.0, "a_2 ≠ 0");
                gate(r == 2, "r = 2");
            }
            Tag::F0 => gate(false, "F0 has no normal form"),
        }
        for (name, have, want) in self.derived() {
            if !close(have, want) {
                v.push(format!("{name} violated (have {have}, need {want})"));
            }
        }
        v
    }

    pub fn check_gates(&self) -> Result<()> {
        let v = self.gate_violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Gate(v))
        }
    }

    /// Working box for this subclass: the standard box shifted so that it
    /// stays on the side `x + β > 0` of the singularity.
    pub fn default_domain(&self) -> SampleBox {
        let mut bx = SampleBox::standard();
        if self.tag.uses_beta() {
            bx.x = (bx.x.0 - self.beta, bx.x.1 - self.beta);
        }
        bx
    }
}

/// Catalogue normal form for `p`.
pub fn instantiate_normal_form(p: &SubclassParams) -> Result<ReducedEquation> {
    p.check_gates()?;
    let r = p.order();
    let x = Expr::x();
    let y = x.add(&Expr::float(p.beta));
    let c = Expr::float;
    let (a, a0, b) = match p.tag {
        Tag::I1 | Tag::I01 => {
            let pw = y.abs().pow(&c(p.alpha));
            let a = (2..=r).map(|j| c(p.a[j - 2]).mul(&y.powi(j as i64)).mul(&pw)).collect();
            let a0 = c(p.a00).add(&c(p.a01).mul(&pw));
            let b = y.mul(
                &c(p.b2)
                    .mul(&y.abs().pow(&c(2.0 * p.alpha)))
                    .add(&c(p.b1).mul(&pw))
                    .add(&c(p.b0)),
            );
            (a, a0, b)
        }
        Tag::I00 => {
            let a = (2..=r).map(|j| c(p.a[j - 2]).mul(&y.powi(j as i64 - 2))).collect();
            let b = c(p.b0).mul(&y).add(&c(p.b2).mul(&y.powi(-3)));
            (a, Expr::zero(), b)
        }
        Tag::II0 => {
            let a = (2..=r).map(|j| c(p.a[j - 2]).mul(&y.powi(j as i64))).collect();
            (a, c(p.a00), c(p.b0).mul(&y))
        }
        Tag::II1 => {
            let a = (2..=r).map(|j| c(p.a[j - 2]).mul(&y.powi(j as i64))).collect();
            let l = y.ln();
            let a0 = c(p.a01).mul(&l).add(&c(p.a00));
            let q = p.a01 * p.a01 / 4.0;
            let b = y.mul(
                &c(-q)
                    .mul(&l.powi(2))
                    .add(&c(q - p.a00 * p.a01 / 2.0).mul(&l))
                    .add(&c(p.b0)),
            );
            (a, a0, b)
        }
        Tag::III => {
            let e = c(p.alpha).mul(&x).exp();
            let a = (2..=r).map(|j| c(p.a[j - 2]).mul(&e)).collect();
            let a0 = c(p.a01).mul(&e).add(&c(p.a00));
            let b = c(p.b2).mul(&e.powi(2)).add(&c(p.b1).mul(&e)).add(&c(p.b0));
            (a, a0, b)
        }
        Tag::IV1 | Tag::IV0High | Tag::IV0_2 => {
            let a = p.a.iter().map(|v| c(*v)).collect();
            (a, c(p.a00), c(p.b1).mul(&x).add(&c(p.b0)))
        }
        Tag::F0 => unreachable!("gate rejects F0"),
    };
    ReducedEquation::new(a, a0, b, p.default_domain())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::expr::sample::sample_equiv;

    fn pe(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    fn same(a: &Expr, b: &Expr) -> bool {
        sample_equiv(a, b, SampleBox::standard(), 64, 1e-12, 3).unwrap().equal
    }

    #[test]
    fn ii0_normal_form() {
        let mut p = SubclassParams::new(Tag::II0, vec![1.0]);
        p.a00 = 1.0;
        p.b0 = 5.0;
        let eq = instantiate_normal_form(&p).unwrap();
        assert!(same(&eq.a[0], &pe("x^2")));
        assert!(same(&eq.a0, &pe("1")));
        assert!(same(&eq.b, &pe("5*x")));
    }

    #[test]
    fn iv0_2_normal_form() {
        let mut p = SubclassParams::new(Tag::IV0_2, vec![1.0]);
        p.b1 = 1.0;
        let eq = instantiate_normal_form(&p).unwrap();
        assert!(same(&eq.a[0], &pe("1")));
        assert!(same(&eq.b, &pe("x")));
    }

    #[test]
    fn i01_gate_at_minus_two() {
        let mut p = SubclassParams::new(Tag::I01, vec![1.0]);
        p.alpha = -2.0;
        match instantiate_normal_form(&p) {
            Err(Error::Gate(v)) => assert!(v.iter().any(|m| m.contains("(α+2)·a_r ≠ 0")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn iv1_gate_fails_for_order_two() {
        let p = SubclassParams::new(Tag::IV1, vec![1.0]);
        let v = p.gate_violations();
        assert!(v.iter().any(|m| m.contains("Σ")), "{v:?}");
    }

    #[test]
    fn residual_examples() {
        let heat = ReducedEquation::new(vec![Expr::one()], Expr::zero(), Expr::zero(), SampleBox::standard()).unwrap();
        let u = pe("x/(1+t)");
        let pt = Point { t: 0.3, x: 1.2 };
        assert_eq!(heat.residual(&Expr::zero(), pt).unwrap(), 0.0);
        assert!(heat.residual(&u, pt).unwrap().abs() < 1e-15);
        let forced = ReducedEquation::new(vec![Expr::one()], Expr::zero(), Expr::one(), SampleBox::standard()).unwrap();
        assert!((forced.residual(&u, pt).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn completed_params_pass_their_gates() {
        let mut p = SubclassParams::new(Tag::I1, vec![0.5, 2.0]);
        p.alpha = 1.5;
        p.a01 = -0.7;
        p.b1 = 0.3;
        p.b2 = 1.1;
        let p = p.complete();
        assert!(p.gate_violations().is_empty(), "{:?}", p.gate_violations());
        let eq = instantiate_normal_form(&p).unwrap();
        assert!(!eq.leading().is_zero());
    }
}
