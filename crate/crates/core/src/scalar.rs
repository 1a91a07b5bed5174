//! Exact and floating scalar fields used for parameters.
//!
//! Lattice and parameter bookkeeping runs over arbitrary-precision
//! rationals ([`Q`]) or Gaussian rationals ([`CQ`]); matrices live over
//! [`C64`]. Everything generic in this crate is written against [`Scalar`].

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type CQ = Complex<BigRational>;
pub type C64 = Complex<f64>;

/// A field with exact or approximate arithmetic.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn to_c64(&self) -> C64;
    /// Exact zero test for exact fields; `== 0.0` for floats.
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    /// Whether the value is a (real) integer.
    fn is_integral(&self) -> bool;
}

impl Scalar for Q {
    fn from_i64(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

impl Scalar for CQ {
    fn from_i64(v: i64) -> Self {
        CQ::new(Q::from_i64(v), Q::zero())
    }
    fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn is_integral(&self) -> bool {
        self.im.is_zero() && self.re.is_integer()
    }
}

impl Scalar for C64 {
    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn is_integral(&self) -> bool {
        self.im == 0.0 && self.re.fract() == 0.0
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_c64(&self) -> C64 {
        C64::new(*self, 0.0)
    }
    fn is_integral(&self) -> bool {
        self.fract() == 0.0
    }
}

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn cq(re: Q, im: Q) -> CQ {
    CQ::new(re, im)
}

pub fn real(v: Q) -> CQ {
    CQ::new(v, Q::zero())
}

/// Exact rational value of a finite `f64` (every double is dyadic).
pub fn q_from_f64(v: f64) -> Result<Q> {
    Q::from_float(v).ok_or_else(|| Error::Input(format!("non-finite value {v}")))
}

pub fn cq_from_c64(v: C64) -> Result<CQ> {
    Ok(CQ::new(q_from_f64(v.re)?, q_from_f64(v.im)?))
}

pub fn is_integer(v: &Q) -> bool {
    v.is_integer()
}

pub fn cq_is_integer(v: &CQ) -> bool {
    v.im.is_zero() && v.re.is_integer()
}

/// `"p/q"` (or `"p"` for integers).
pub fn format_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Input(format!("malformed rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// `[re, im]` as rational strings.
pub fn format_cq(v: &CQ) -> [String; 2] {
    [format_q(&v.re), format_q(&v.im)]
}

pub fn parse_cq(parts: &[String]) -> Result<CQ> {
    match parts {
        [re] => Ok(real(parse_q(re)?)),
        [re, im] => Ok(CQ::new(parse_q(re)?, parse_q(im)?)),
        _ => Err(Error::Input(format!("expected [re, im], got {parts:?}"))),
    }
}

/// Magnitude bound used to scale relative tolerances.
pub fn abs_c64(v: &CQ) -> f64 {
    v.to_c64().norm()
}

pub fn q_abs(v: &Q) -> Q {
    v.abs()
}
