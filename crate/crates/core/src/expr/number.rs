use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i64>;

/// A literal: exact rational or binary64 float.
#[derive(Clone, Copy, Debug)]
pub enum Number {
    Rational(Rational),
    Float(f64),
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a == b,
            (Number::Float(a), Number::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Number {
    pub const ZERO: Number = Number::Rational(Ratio::new_raw(0, 1));
    pub const ONE: Number = Number::Rational(Ratio::new_raw(1, 1));

    pub fn int(n: i64) -> Self {
        Number::Rational(Rational::from_integer(n))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Number::Rational(Rational::new(p, q))
    }

    /// Floats with an exactly representable small integer value stay floats; the
    /// caller decides whether a literal is exact.
    pub fn float(v: f64) -> Self {
        Number::Float(v)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap(),
            Number::Float(v) => v,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(v) => v == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Float(v) => v == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(v) => v < 0.0,
        }
    }

    pub fn as_rational(self) -> Option<Rational> {
        match self {
            Number::Rational(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn as_integer(self) -> Option<i64> {
        match self {
            Number::Rational(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    fn lift(
        self,
        other: Number,
        exact: impl Fn(&Rational, &Rational) -> Option<Rational>,
        float: impl Fn(f64, f64) -> f64,
    ) -> Option<Number> {
        let out = match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match exact(&a, &b) {
                Some(r) => Number::Rational(r),
                None => Number::Float(float(self.to_f64(), other.to_f64())),
            },
            _ => Number::Float(float(self.to_f64(), other.to_f64())),
        };
        match out {
            Number::Float(v) if !v.is_finite() => None,
            n => Some(n),
        }
    }

    pub fn add(self, other: Number) -> Option<Number> {
        self.lift(other, |a, b| a.checked_add(b), |a, b| a + b)
    }

    pub fn sub(self, other: Number) -> Option<Number> {
        self.lift(other, |a, b| a.checked_sub(b), |a, b| a - b)
    }

    pub fn mul(self, other: Number) -> Option<Number> {
        self.lift(other, |a, b| a.checked_mul(b), |a, b| a * b)
    }

    pub fn div(self, other: Number) -> Option<Number> {
        if other.is_zero() {
            return None;
        }
        self.lift(other, |a, b| a.checked_div(b), |a, b| a / b)
    }

    pub fn neg(self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Float(v) => Number::Float(-v),
        }
    }

    /// Exact integer power when possible.
    pub fn powi(self, e: i64) -> Option<Number> {
        if e == 0 {
            return Some(Number::ONE);
        }
        match self {
            Number::Rational(r) => {
                if r.is_zero() && e < 0 {
                    return None;
                }
                let base = if e < 0 { r.recip() } else { r };
                let mut acc = Rational::one();
                for _ in 0..e.unsigned_abs().min(64) {
                    acc = acc.checked_mul(&base)?;
                }
                if e.unsigned_abs() > 64 {
                    return None;
                }
                Some(Number::Rational(acc))
            }
            Number::Float(v) => {
                let out = v.powi(e as i32);
                out.is_finite().then_some(Number::Float(out))
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Float(v) => {
                let s = format!("{v}");
                if s.contains('.') {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_rational() {
        let a = Number::ratio(1, 3);
        let b = Number::ratio(1, 6);
        assert_eq!(a.add(b), Some(Number::ratio(1, 2)));
        assert_eq!(a.powi(-2), Some(Number::int(9)));
    }

    #[test]
    fn overflow_falls_back_to_float() {
        let big = Number::int(i64::MAX / 2);
        match big.mul(Number::int(4)).unwrap() {
            Number::Float(v) => assert!((v - (i64::MAX / 2) as f64 * 4.0).abs() < 1e6),
            other => panic!("expected float, got {other:?}"),
        }
    }

    #[test]
    fn float_display_always_has_point() {
        assert_eq!(Number::Float(2.0).to_string(), "2.0");
        assert_eq!(Number::Float(0.5).to_string(), "0.5");
    }
}
