//! Determining equations for point transformations between stationary
//! equations of the class.

use super::FiberTransformation;
use crate::expr::{Expr, Var};
use crate::model::ReducedEquation;

/// Residuals of the classifying conditions, as expressions in the source
/// variables (t, x). All vanish iff the transformation maps some stationary
/// equation onto `target`.
#[derive(Clone, Debug)]
pub struct ClassifyingResiduals {
    /// One entry per `j = 2..=r`.
    pub a: Vec<Expr>,
    pub a0: Expr,
    pub b: Expr,
}

impl ClassifyingResiduals {
    pub fn all(&self) -> Vec<(String, Expr)> {
        let mut out: Vec<(String, Expr)> = self
            .a
            .iter()
            .enumerate()
            .map(|(i, e)| (format!("A[{}]", i + 2), e.clone()))
            .collect();
        out.push(("A0".into(), self.a0.clone()));
        out.push(("B".into(), self.b.clone()));
        out
    }
}

/// Conditions on `φ` for the target coefficients `Ã(x̃)`, evaluated at
/// `x̃ = X¹x + X⁰`.
pub fn classifying_residuals(phi: &FiberTransformation, target: &ReducedEquation) -> ClassifyingResiduals {
    let e = phi.expand(&Expr::t());
    let dt = |f: &Expr| f.diff(Var::T);
    let xt = phi.x_image();
    let at = |c: &Expr| c.subst(Var::X, &xt);
    let prime = |c: &Expr| at(&c.diff(Var::X));
    let v = e.x1t.mul(&Expr::x()).add(&e.x0t);
    let tr = e.tddot.div(&e.tdot);
    let x1r = e.x1t.div(&e.x1);

    let a = target
        .a
        .iter()
        .enumerate()
        .map(|(i, aj)| {
            let j = Expr::int(i as i64 + 2);
            v.mul(&prime(aj)).add(&tr.sub(&j.mul(&x1r)).mul(&at(aj)))
        })
        .collect();

    let a0t = &target.a0;
    let a0 = v
        .mul(&prime(a0t))
        .add(&tr.mul(&at(a0t)))
        .sub(&dt(&Expr::int(2).mul(&x1r).sub(&tr)).div(&e.tdot));

    let bt = &target.b;
    let lhs = v.mul(&prime(bt)).add(&Expr::int(2).mul(&tr).sub(&x1r).mul(&at(bt)));
    let w = e.x1.div(&e.tdot.powi(2));
    let rhs = v
        .powi(2)
        .div(&e.tdot)
        .mul(&prime(a0t))
        .neg()
        .sub(&w.mul(&dt(&e.tdot.mul(&v).div(&e.x1))).mul(&at(a0t)))
        .add(&w.mul(&dt(&e.tdot.div(&e.x1).mul(&dt(&v.div(&e.tdot))))));
    ClassifyingResiduals {
        a,
        a0,
        b: lhs.sub(&rhs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::expr::sample::{sample_equiv, SampleBox};

    fn pe(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    fn vanishes(r: &ClassifyingResiduals) -> bool {
        r.all().iter().all(|(_, e)| {
            sample_equiv(e, &Expr::zero(), SampleBox::standard(), 48, 1e-9, 5)
                .unwrap()
                .equal
        })
    }

    #[test]
    fn scaling_with_exponential_x1() {
        // T = 2t+1, X¹ = 3e^{t/2} maps u_t+uu_x = x³u_xxx + u + 2x onto
        // Ã³ = x̃³/2, Ã0 = (1+1)/2, B̃ = (2 - 1/4 - 1/2)/4·x̃
        let tgt =
            ReducedEquation::new(vec![pe("0"), pe("x^3/2")], pe("1"), pe("5/16*x"), SampleBox::standard()).unwrap();
        let phi = FiberTransformation::new(pe("2*t+1"), pe("3*exp(t/2)"), pe("0"));
        assert!(vanishes(&classifying_residuals(&phi, &tgt)));
        // any linear B̃ has a stationary preimage, a non-constant Ã0 does not
        let other =
            ReducedEquation::new(vec![pe("0"), pe("x^3/2")], pe("1"), pe("x/4"), SampleBox::standard()).unwrap();
        assert!(vanishes(&classifying_residuals(&phi, &other)));
        let wrong =
            ReducedEquation::new(vec![pe("0"), pe("x^3/2")], pe("x"), pe("x/4"), SampleBox::standard()).unwrap();
        let r = classifying_residuals(&phi, &wrong);
        assert!(!vanishes(&r));
    }

    #[test]
    fn galilean_boost_of_constant_equation() {
        // u_t + uu_x = u_xxx is invariant under x̃ = x + ct, ũ = u + c
        let tgt = ReducedEquation::new(vec![pe("1")], pe("0"), pe("0"), SampleBox::standard()).unwrap();
        let phi = FiberTransformation::new(pe("t"), pe("1"), pe("3*t"));
        assert!(vanishes(&classifying_residuals(&phi, &tgt)));
    }

    #[test]
    fn non_admissible_transformation_fails() {
        let tgt = ReducedEquation::new(vec![pe("x^2")], pe("0"), pe("0"), SampleBox::standard()).unwrap();
        let phi = FiberTransformation::new(pe("t"), pe("1"), pe("t"));
        assert!(!vanishes(&classifying_residuals(&phi, &tgt)));
    }

    #[test]
    fn leading_condition_is_time_derivative_of_preimage() {
        // A^j(t,x) = T_t/X1^j Ã^j(X1x+X0), so ∂_t A^j = T_t/X1^j · residual_j
        let tgt = ReducedEquation::new(vec![pe("x^2 + 1")], pe("0"), pe("0"), SampleBox::standard()).unwrap();
        let phi = FiberTransformation::new(pe("exp(t)"), pe("1 + t^2"), pe("sin(t)"));
        let r = classifying_residuals(&phi, &tgt);
        let tt = phi.t.diff(Var::T);
        let pre = tt.div(&phi.x1.powi(2)).mul(&tgt.a[0].subst(Var::X, &phi.x_image()));
        let lhs = pre.diff(Var::T);
        let rhs = tt.div(&phi.x1.powi(2)).mul(&r.a[0]);
        assert!(
            sample_equiv(&lhs, &rhs, SampleBox::standard(), 48, 1e-10, 3)
                .unwrap()
                .equal
        );
    }
}
