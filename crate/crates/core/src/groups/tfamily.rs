//! Closed-form time maps: the log-like family solving `γ = δ/T_t + (1/T_t)_t`
//! and Möbius maps.

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};

/// Which of `γ`, `δ` vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoglikeBranch {
    General,
    GammaZero,
    DeltaZero,
    BothZero,
}

impl LoglikeBranch {
    pub fn name(self) -> &'static str {
        match self {
            LoglikeBranch::General => "general",
            LoglikeBranch::GammaZero => "gamma=0",
            LoglikeBranch::DeltaZero => "delta=0",
            LoglikeBranch::BothZero => "both-zero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TFamilyParams {
    pub gamma: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
}

impl TFamilyParams {
    pub fn new(gamma: f64, delta: f64, c1: f64, c2: f64) -> TFamilyParams {
        TFamilyParams { gamma, delta, c1, c2 }
    }

    pub fn branch(&self) -> LoglikeBranch {
        match (self.gamma == 0.0, self.delta == 0.0) {
            (false, false) => LoglikeBranch::General,
            (true, false) => LoglikeBranch::GammaZero,
            (false, true) => LoglikeBranch::DeltaZero,
            (true, true) => LoglikeBranch::BothZero,
        }
    }

    /// `c1 (e^{δt} − 1)/δ + c2`, or `c1 t + c2` when `δ = 0`.
    fn inner(&self) -> Expr {
        let f = Expr::float;
        let e = if self.delta == 0.0 {
            Expr::t()
        } else {
            f(self.delta)
                .mul(&Expr::t())
                .exp()
                .sub(&Expr::one())
                .div(&f(self.delta))
        };
        f(self.c1).mul(&e).add(&f(self.c2))
    }

    /// The time map without any domain check.
    pub fn expr(&self) -> Expr {
        let y = self.inner();
        if self.gamma == 0.0 {
            y
        } else {
            let g = Expr::float(self.gamma);
            g.mul(&y).add(&Expr::one()).ln().div(&g)
        }
    }
}

/// Check that `T_t` is finite and of one sign on `dom`.
pub fn check_monotone(t: &Expr, dom: (f64, f64)) -> Result<()> {
    let tt = t.diff(Var::T).compile();
    let mut sign = None;
    for i in 0..=64 {
        let s = dom.0 + (dom.1 - dom.0) * i as f64 / 64.0;
        let v = tt.eval_tx(s, 0.0);
        if !v.is_finite() || v == 0.0 {
            return Err(Error::nondegenerate(format!(
                "T = {t}: T_t vanishes or is undefined at t = {s}"
            )));
        }
        match sign {
            None => sign = Some(v.signum()),
            Some(sg) if sg != v.signum() => {
                return Err(Error::nondegenerate(format!(
                    "T = {t} is not monotone on [{}, {}]",
                    dom.0, dom.1
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

/// `T = (1/γ) ln|γ(c1 (e^{δt}−1)/δ + c2) + 1|` and its singular branches.
pub fn mk_t_loglike(p: TFamilyParams, dom: (f64, f64)) -> Result<Expr> {
    if p.c1 == 0.0 || ![p.gamma, p.delta, p.c1, p.c2].iter().all(|v| v.is_finite()) {
        return Err(Error::nondegenerate(
            "log-like time map needs finite parameters and c1 ≠ 0",
        ));
    }
    let t = p.expr();
    check_monotone(&t, dom)?;
    Ok(t)
}

/// `γ − δ/T_t − (1/T_t)_t`, identically zero on the family.
pub fn loglike_residual(t: &Expr, gamma: f64, delta: f64) -> Expr {
    let inv = t.diff(Var::T).recip();
    Expr::float(gamma)
        .sub(&Expr::float(delta).mul(&inv))
        .sub(&inv.diff(Var::T))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl MobiusParams {
    pub fn identity() -> MobiusParams {
        MobiusParams {
            c0: 1.0,
            c1: 1.0,
            c2: 0.0,
            c3: 0.0,
        }
    }

    /// `δ = c1 c0 − c2 c3`.
    pub fn det(&self) -> f64 {
        self.c1 * self.c0 - self.c2 * self.c3
    }

    /// `(c1 t + c2)/(c3 t + c0)`.
    pub fn expr(&self) -> Expr {
        let f = Expr::float;
        let t = Expr::t();
        f(self.c1)
            .mul(&t)
            .add(&f(self.c2))
            .div(&f(self.c3).mul(&t).add(&f(self.c0)))
    }

    /// `(c0 t − c2)/(c1 − c3 t)`.
    pub fn inverse_expr(&self) -> Expr {
        let f = Expr::float;
        let t = Expr::t();
        f(self.c0)
            .mul(&t)
            .sub(&f(self.c2))
            .div(&f(self.c1).sub(&f(self.c3).mul(&t)))
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &MobiusParams) -> MobiusParams {
        // matrices [[c1, c2], [c3, c0]]
        MobiusParams {
            c1: self.c1 * other.c1 + self.c2 * other.c3,
            c2: self.c1 * other.c2 + self.c2 * other.c0,
            c3: self.c3 * other.c1 + self.c0 * other.c3,
            c0: self.c3 * other.c2 + self.c0 * other.c0,
        }
    }

    /// Value at `t`; infinite at the pole.
    pub fn eval(&self, t: f64) -> f64 {
        (self.c1 * t + self.c2) / (self.c3 * t + self.c0)
    }
}

/// Möbius map with a pole-free, nondegenerate check on `dom`.
pub fn mk_t_mobius(p: MobiusParams, dom: (f64, f64)) -> Result<Expr> {
    if p.det() == 0.0 || !p.det().is_finite() {
        return Err(Error::nondegenerate("Möbius map needs c1·c0 − c2·c3 ≠ 0"));
    }
    // pole outside the closed interval
    if p.c3 != 0.0 {
        let pole = -p.c0 / p.c3;
        if pole >= dom.0 && pole <= dom.1 {
            return Err(Error::nondegenerate(format!(
                "Möbius pole at t = {pole} inside the time domain"
            )));
        }
    }
    Ok(p.expr())
}

/// `(T_tt/T_t)_t − ½(T_tt/T_t)²`.
pub fn schwarzian(t: &Expr) -> Expr {
    let q = t.diff_n(Var::T, 2).div(&t.diff(Var::T));
    q.diff(Var::T).sub(&Expr::ratio(1, 2).mul(&q.powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::expr::sample::{sample_equiv, SampleBox};

    fn same(a: &Expr, b: &Expr) -> bool {
        sample_equiv(a, b, SampleBox::standard(), 48, 1e-12, 1).unwrap().equal
    }

    #[test]
    fn spec_branches() {
        let d = (0.1, 0.9);
        let t = mk_t_loglike(TFamilyParams::new(0.0, 0.0, 1.0, 0.0), d).unwrap();
        assert!(same(&t, &Expr::t()));
        let t = mk_t_loglike(TFamilyParams::new(0.0, 1.0, 1.0, 0.0), d).unwrap();
        assert!(same(&t, &parse_expression("exp(t) - 1").unwrap()));
        let t = mk_t_loglike(TFamilyParams::new(1.0, 0.0, 1.0, 0.0), d).unwrap();
        assert!(same(&t, &parse_expression("ln(abs(t + 1))").unwrap()));
        assert!(same(&loglike_residual(&t, 1.0, 0.0), &Expr::zero()));
    }

    #[test]
    fn all_branches_solve_the_ode() {
        for (g, dl) in [(0.7, -1.3), (0.0, 2.0), (-0.4, 0.0), (0.0, 0.0), (1.0, 2.0)] {
            let p = TFamilyParams::new(g, dl, 1.3, 0.4);
            let t = mk_t_loglike(p, (0.1, 0.9)).unwrap();
            let r = loglike_residual(&t, g, dl);
            assert!(
                sample_equiv(&r, &Expr::zero(), SampleBox::standard(), 200, 1e-10, 4)
                    .unwrap()
                    .equal,
                "{g} {dl}"
            );
        }
    }

    #[test]
    fn branch_continuity() {
        let near = TFamilyParams::new(1e-6, 0.8, 1.1, 0.3).expr();
        let at = TFamilyParams::new(0.0, 0.8, 1.1, 0.3).expr();
        for s in [0.1, 0.5, 0.9] {
            assert!((near.eval(s, 0.0) - at.eval(s, 0.0)).abs() < 1e-4);
        }
    }

    #[test]
    fn degenerate_affine_log_is_rejected() {
        // γ c2 = −1 with δ = 0 and c1 = 0 is constant; c1 = 0 rejected outright
        assert!(mk_t_loglike(TFamilyParams::new(1.0, 0.0, 0.0, -1.0), (0.1, 0.9)).is_err());
        // argument crosses zero inside the domain
        assert!(mk_t_loglike(TFamilyParams::new(1.0, 0.0, -2.0, 0.0), (0.1, 0.9)).is_err());
    }

    #[test]
    fn mobius_schwarzian_vanishes_and_composes() {
        let m = MobiusParams {
            c0: 1.0,
            c1: 1.0,
            c2: 0.0,
            c3: 1.0,
        };
        let t = mk_t_mobius(m, (0.1, 0.9)).unwrap();
        assert!(
            sample_equiv(&schwarzian(&t), &Expr::zero(), SampleBox::standard(), 100, 1e-10, 2)
                .unwrap()
                .equal
        );
        let n = MobiusParams {
            c0: 3.0,
            c1: 2.0,
            c2: 1.0,
            c3: 0.5,
        };
        let direct = m.expr().subst(Var::T, &n.expr());
        assert!(same(&direct, &m.compose(&n).expr()));
        assert!(same(&m.inverse_expr().subst(Var::T, &m.expr()), &Expr::t()));
    }

    #[test]
    fn tan_is_a_particular_solution() {
        let t = parse_expression("tan(t)").unwrap();
        let r = schwarzian(&t).add(&Expr::int(2).mul(&Expr::int(-1)));
        assert!(
            sample_equiv(&r, &Expr::zero(), SampleBox::standard(), 100, 1e-10, 2)
                .unwrap()
                .equal
        );
    }
}
