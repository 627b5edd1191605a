//! Partial Bell polynomials for the chain rule of order k.

use crate::expr::Expr;

/// Default cap on the order handled by the gauge.
pub const MAX_ORDER: usize = 8;

fn binom(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

/// Table `B[n][k] = B_{n,k}(d[0], d[1], …)` for `0 ≤ k ≤ n ≤ order`, where
/// `d[i]` is the (i+1)-th derivative of the inner function:
/// `B_{n,k} = Σ_{i=1}^{n-k+1} C(n-1, i-1) d_i B_{n-i,k-1}`.
pub fn partial_bell(d: &[Expr], order: usize) -> Vec<Vec<Expr>> {
    assert!(d.len() >= order, "need {order} derivatives");
    let mut b = vec![vec![Expr::zero(); order + 1]; order + 1];
    b[0][0] = Expr::one();
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = Expr::zero();
            for i in 1..=(n - k + 1) {
                let prev = &b[n - i][k - 1];
                if prev.is_zero() {
                    continue;
                }
                let term = Expr::int(binom(n - 1, i - 1)).mul(&d[i - 1]).mul(prev);
                acc = acc.add(&term);
            }
            b[n][k] = acc;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, Var};

    #[test]
    fn matches_direct_chain_rule() {
        // d^4/dx^4 f(g(x)) with f = sin, g = x^3 + x
        let x = Expr::x();
        let g = x.powi(3).add(&x);
        let direct = g.sin().diff_n(Var::X, 4);
        let d: Vec<Expr> = (1..=4).map(|i| g.diff_n(Var::X, i)).collect();
        let b = partial_bell(&d, 4);
        // f^(k) of sin at g
        let fk = |k: usize| match k % 4 {
            0 => g.sin(),
            1 => g.cos(),
            2 => g.sin().neg(),
            _ => g.cos().neg(),
        };
        let mut via_bell = Expr::zero();
        for k in 1..=4 {
            via_bell = via_bell.add(&fk(k).mul(&b[4][k]));
        }
        for x0 in [-0.7, 0.2, 1.3] {
            let (a, c) = (direct.eval(0.0, x0), via_bell.eval(0.0, x0));
            assert!((a - c).abs() < 1e-9 * (1.0 + a.abs()), "{a} vs {c}");
        }
    }

    #[test]
    fn known_values() {
        let d: Vec<Expr> = (0..3).map(|_| Expr::one()).collect();
        let b = partial_bell(&d, 3);
        // with all derivatives 1, B_{n,k} are Stirling numbers of the second kind
        let stirling = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 1, 1, 0], [0, 1, 3, 1]];
        for n in 0..=3 {
            for k in 0..=n {
                assert_eq!(b[n][k].as_f64(), Some(stirling[n][k] as f64));
            }
        }
    }
}
