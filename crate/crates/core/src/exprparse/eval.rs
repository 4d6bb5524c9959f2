use super::{BinOp, Expr, ExprError, Func};
use crate::scalar::{sgn, Real};

/// A real number held as `sign * exp(log_abs)`, so that values such as
/// `exp(-3*400^2)` survive without underflowing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog<F> {
    /// -1, 0 or 1.
    pub sign: i8,
    /// `ln|x|`; negative infinity when `sign == 0`.
    pub log_abs: F,
}

impl<F: Real> SignedLog<F> {
    pub fn zero() -> Self {
        SignedLog { sign: 0, log_abs: F::neg_infinity() }
    }

    pub fn from_value(x: F) -> Self {
        if x == F::zero() {
            Self::zero()
        } else {
            SignedLog { sign: if x > F::zero() { 1 } else { -1 }, log_abs: x.abs().ln() }
        }
    }

    pub fn value(self) -> F {
        match self.sign {
            0 => F::zero(),
            s => F::of(s as f64) * self.log_abs.exp(),
        }
    }

    fn negate(self) -> Self {
        SignedLog { sign: -self.sign, ..self }
    }

    fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_abs >= other.log_abs { (self, other) } else { (other, self) };
        let ratio = (small.log_abs - big.log_abs).exp();
        if big.sign == small.sign {
            SignedLog { sign: big.sign, log_abs: big.log_abs + ratio.ln_1p() }
        } else if ratio == F::one() {
            Self::zero()
        } else {
            SignedLog { sign: big.sign, log_abs: big.log_abs + (-ratio).ln_1p() }
        }
    }

    fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::zero();
        }
        SignedLog { sign: self.sign * other.sign, log_abs: self.log_abs + other.log_abs }
    }

    fn cmp_value(self, other: Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match self.sign.cmp(&other.sign) {
            Equal => {
                let by_mag = self.log_abs.partial_cmp(&other.log_abs).unwrap_or(Equal);
                match self.sign {
                    0 => Equal,
                    1 => by_mag,
                    _ => by_mag.reverse(),
                }
            }
            o => o,
        }
    }
}

fn is_integer<F: Real>(x: F) -> bool {
    x.is_finite() && x.fract() == F::zero()
}

fn is_odd_integer<F: Real>(x: F) -> bool {
    is_integer(x) && (x / F::of(2.0)).fract() != F::zero()
}

impl<F: Real> Expr<F> {
    fn domain(&self, input: F, reason: &'static str) -> ExprError {
        ExprError::Domain { expr: self.to_string(), input: input.to_f64_lossy(), reason }
    }

    /// Evaluates the expression with the variable set to `x`.
    pub fn eval(&self, x: F) -> Result<F, ExprError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(_) => x,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Binary(op, a, b) => {
                let (u, v) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => {
                        if v == F::zero() {
                            return Err(self.domain(x, "division by zero"));
                        }
                        u / v
                    }
                    BinOp::Pow => {
                        if u < F::zero() && !is_integer(v) {
                            return Err(self.domain(x, "negative base with non-integer exponent"));
                        }
                        if u == F::zero() && v < F::zero() {
                            return Err(self.domain(x, "zero base with negative exponent"));
                        }
                        u.powf(v)
                    }
                }
            }
            Expr::Call(f, args) => {
                let u = args[0].eval(x)?;
                match f {
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u <= F::zero() {
                            return Err(self.domain(x, "logarithm of a non-positive value"));
                        }
                        u.ln()
                    }
                    Func::Abs => u.abs(),
                    Func::Sgn => sgn(u),
                    Func::Sqrt => {
                        if u < F::zero() {
                            return Err(self.domain(x, "square root of a negative value"));
                        }
                        u.sqrt()
                    }
                    Func::Min => u.min(args[1].eval(x)?),
                    Func::Max => u.max(args[1].eval(x)?),
                }
            }
        })
    }

    /// Evaluates `sign` and `ln|value|` without forming the value itself.
    ///
    /// Agrees with [`Expr::eval`] wherever the latter is finite, and keeps
    /// working when the value would overflow or underflow.
    pub fn eval_signed_log(&self, x: F) -> Result<SignedLog<F>, ExprError> {
        Ok(match self {
            Expr::Const(c) => SignedLog::from_value(*c),
            Expr::Var(_) => SignedLog::from_value(x),
            Expr::Neg(e) => e.eval_signed_log(x)?.negate(),
            Expr::Binary(op, a, b) => {
                let u = a.eval_signed_log(x)?;
                match op {
                    BinOp::Add => u.add(b.eval_signed_log(x)?),
                    BinOp::Sub => u.add(b.eval_signed_log(x)?.negate()),
                    BinOp::Mul => u.mul(b.eval_signed_log(x)?),
                    BinOp::Div => {
                        let v = b.eval_signed_log(x)?;
                        if v.sign == 0 {
                            return Err(self.domain(x, "division by zero"));
                        }
                        u.mul(SignedLog { sign: v.sign, log_abs: -v.log_abs })
                    }
                    BinOp::Pow => {
                        let v = b.eval(x)?;
                        match u.sign {
                            0 if v > F::zero() => SignedLog::zero(),
                            0 if v == F::zero() => SignedLog::from_value(F::one()),
                            0 => return Err(self.domain(x, "zero base with negative exponent")),
                            1 => SignedLog { sign: 1, log_abs: v * u.log_abs },
                            _ => {
                                if !is_integer(v) {
                                    return Err(self.domain(x, "negative base with non-integer exponent"));
                                }
                                let sign = if is_odd_integer(v) { -1 } else { 1 };
                                SignedLog { sign, log_abs: v * u.log_abs }
                            }
                        }
                    }
                }
            }
            Expr::Call(f, args) => match f {
                Func::Exp => SignedLog { sign: 1, log_abs: args[0].eval(x)? },
                Func::Log => {
                    let u = args[0].eval_signed_log(x)?;
                    if u.sign <= 0 {
                        return Err(self.domain(x, "logarithm of a non-positive value"));
                    }
                    SignedLog::from_value(u.log_abs)
                }
                Func::Abs => {
                    let u = args[0].eval_signed_log(x)?;
                    SignedLog { sign: u.sign.abs(), ..u }
                }
                Func::Sgn => SignedLog::from_value(F::of(args[0].eval_signed_log(x)?.sign as f64)),
                Func::Sqrt => {
                    let u = args[0].eval_signed_log(x)?;
                    if u.sign < 0 {
                        return Err(self.domain(x, "square root of a negative value"));
                    }
                    SignedLog { sign: u.sign, log_abs: u.log_abs / F::of(2.0) }
                }
                Func::Min | Func::Max => {
                    let u = args[0].eval_signed_log(x)?;
                    let v = args[1].eval_signed_log(x)?;
                    let u_first = u.cmp_value(v) != std::cmp::Ordering::Greater;
                    match (f, u_first) {
                        (Func::Min, true) | (Func::Max, false) => u,
                        _ => v,
                    }
                }
            },
        })
    }
}
