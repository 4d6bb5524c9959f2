//! Scalar abstraction shared by every numeric module.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::{Serialize, Serializer};

/// Floating point type the library can run on: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Infallible for the supported types.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn of_i64(x: i64) -> Self {
        Self::from_i64(x).expect("integer representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance that is meaningful for this precision.
    fn rel_tol(requested: f64) -> Self {
        let eps = Self::epsilon() * Self::of(8.0);
        Self::of(requested).max(eps)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sign map with `sgn(0) = 0`.
pub fn sgn<F: Real>(x: F) -> F {
    if x > F::zero() {
        F::one()
    } else if x < F::zero() {
        -F::one()
    } else {
        F::zero()
    }
}

/// A point of the extended real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal<F> {
    NegInf,
    Finite(F),
    PosInf,
}

impl<F: Real> ExtReal<F> {
    /// Maps IEEE infinities onto the extended endpoints.
    pub fn from_value(x: F) -> Self {
        if x == F::infinity() {
            ExtReal::PosInf
        } else if x == F::neg_infinity() {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn value(self) -> F {
        match self {
            ExtReal::NegInf => F::neg_infinity(),
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => F::infinity(),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<F> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.value().to_f64_lossy()
    }

    /// Shifts finite values; infinities are fixed points.
    pub fn shift(self, by: F) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x + by),
            other => other,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// `|self - other| <= tol`, with equal infinities counted as close.
    pub fn close_to(self, other: Self, tol: F) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            (a, b) => a == b,
        }
    }
}

impl<F: Real> PartialOrd for ExtReal<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (_, NegInf) | (PosInf, _) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<F: Real> Display for ExtReal<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("+inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// Numbers serialize as numbers, infinities as the strings `"-inf"` / `"+inf"`.
impl<F: Serialize> Serialize for ExtReal<F> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::Finite(x) => x.serialize(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_places_infinities_at_the_ends() {
        let a = ExtReal::Finite(3.0_f64);
        assert!(ExtReal::NegInf < a);
        assert!(a < ExtReal::PosInf);
        assert!(ExtReal::<f64>::NegInf < ExtReal::PosInf);
        assert_eq!(ExtReal::from_value(f64::INFINITY), ExtReal::PosInf);
        assert_eq!(a.shift(-1.0), ExtReal::Finite(2.0));
        assert_eq!(ExtReal::<f64>::PosInf.shift(-1.0), ExtReal::PosInf);
    }

    #[test]
    fn sign_map_is_zero_at_origin() {
        assert_eq!(sgn(0.0_f64), 0.0);
        assert_eq!(sgn(-2.5_f32), -1.0);
        assert_eq!(sgn(1e-300_f64), 1.0);
    }

    #[test]
    fn serializes_infinities_as_strings() {
        let v = serde_json::to_string(&[ExtReal::NegInf, ExtReal::Finite(1.5), ExtReal::PosInf]).unwrap();
        assert_eq!(v, r#"["-inf",1.5,"+inf"]"#);
    }
}
