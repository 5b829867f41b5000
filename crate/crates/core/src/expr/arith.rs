//! Real arithmetic backends used to evaluate exact coefficients numerically.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_traits::{ToPrimitive, Zero};

use super::Scalar;

/// A real-number backend. Operations take `&mut self` so backends may cache constants.
pub trait Arith {
    type T: Clone;

    fn zero(&mut self) -> Self::T;
    fn one(&mut self) -> Self::T;
    fn from_f64(&mut self, x: f64) -> Self::T;
    fn from_scalar(&mut self, q: &Scalar) -> Self::T;
    fn add(&mut self, a: &Self::T, b: &Self::T) -> Self::T;
    fn sub(&mut self, a: &Self::T, b: &Self::T) -> Self::T;
    fn mul(&mut self, a: &Self::T, b: &Self::T) -> Self::T;
    fn div(&mut self, a: &Self::T, b: &Self::T) -> Self::T;
    fn neg(&mut self, a: &Self::T) -> Self::T;
    fn sin(&mut self, a: &Self::T) -> Self::T;
    fn cos(&mut self, a: &Self::T) -> Self::T;
    fn sinh(&mut self, a: &Self::T) -> Self::T;
    fn cosh(&mut self, a: &Self::T) -> Self::T;
    fn to_f64(&self, a: &Self::T) -> f64;
}

/// Plain double precision.
#[derive(Clone, Copy, Debug, Default)]
pub struct F64;

impl Arith for F64 {
    type T = f64;

    fn zero(&mut self) -> f64 {
        0.0
    }
    fn one(&mut self) -> f64 {
        1.0
    }
    fn from_f64(&mut self, x: f64) -> f64 {
        x
    }
    fn from_scalar(&mut self, q: &Scalar) -> f64 {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn add(&mut self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&mut self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn mul(&mut self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn div(&mut self, a: &f64, b: &f64) -> f64 {
        a / b
    }
    fn neg(&mut self, a: &f64) -> f64 {
        -a
    }
    fn sin(&mut self, a: &f64) -> f64 {
        a.sin()
    }
    fn cos(&mut self, a: &f64) -> f64 {
        a.cos()
    }
    fn sinh(&mut self, a: &f64) -> f64 {
        a.sinh()
    }
    fn cosh(&mut self, a: &f64) -> f64 {
        a.cosh()
    }
    fn to_f64(&self, a: &f64) -> f64 {
        *a
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

/// Arbitrary precision binary floating point.
pub struct HighPrecision {
    bits: usize,
    consts: Consts,
}

impl HighPrecision {
    /// Working precision of at least `digits` significant decimal digits.
    pub fn with_digits(digits: u32) -> Self {
        // log2(10) ~ 3.3219; one extra word of guard bits
        let bits = ((digits as f64) * 3.321_928_1).ceil() as usize + 64;
        HighPrecision { bits, consts: Consts::new().expect("astro-float constants") }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn digits(&self) -> u32 {
        (((self.bits - 64) as f64) / 3.321_928_1).floor() as u32
    }

    pub fn pi(&mut self) -> BigFloat {
        self.consts.pi(self.bits, RM)
    }

    fn parse_int(&mut self, s: &str) -> BigFloat {
        BigFloat::parse(s, Radix::Dec, self.bits, RM, &mut self.consts)
    }

    /// Decimal rendering, for diagnostics.
    pub fn format(&mut self, a: &BigFloat) -> String {
        a.format(Radix::Dec, RM, &mut self.consts).unwrap_or_else(|_| "NaN".into())
    }
}

impl Arith for HighPrecision {
    type T = BigFloat;

    fn zero(&mut self) -> BigFloat {
        BigFloat::from_i32(0, self.bits)
    }
    fn one(&mut self) -> BigFloat {
        BigFloat::from_i32(1, self.bits)
    }
    fn from_f64(&mut self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }
    fn from_scalar(&mut self, q: &Scalar) -> BigFloat {
        if q.is_zero() {
            return self.zero();
        }
        let n = match q.numer().to_i64() {
            Some(v) => BigFloat::from_i64(v, self.bits),
            None => self.parse_int(&q.numer().to_string()),
        };
        if q.is_integer() {
            return n;
        }
        let d = match q.denom().to_i64() {
            Some(v) => BigFloat::from_i64(v, self.bits),
            None => self.parse_int(&q.denom().to_string()),
        };
        n.div(&d, self.bits, RM)
    }
    fn add(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }
    fn sub(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }
    fn mul(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, RM)
    }
    fn div(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, RM)
    }
    fn neg(&mut self, a: &BigFloat) -> BigFloat {
        a.neg()
    }
    fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.bits, RM, &mut self.consts)
    }
    fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.bits, RM, &mut self.consts)
    }
    fn sinh(&mut self, a: &BigFloat) -> BigFloat {
        a.sinh(self.bits, RM, &mut self.consts)
    }
    fn cosh(&mut self, a: &BigFloat) -> BigFloat {
        a.cosh(self.bits, RM, &mut self.consts)
    }
    fn to_f64(&self, a: &BigFloat) -> f64 {
        bigfloat_to_f64(a)
    }
}

/// Round a `BigFloat` to the nearest double (to within one ulp).
pub fn bigfloat_to_f64(a: &BigFloat) -> f64 {
    if a.is_nan() {
        return f64::NAN;
    }
    if a.is_zero() {
        return 0.0;
    }
    if a.is_inf_pos() {
        return f64::INFINITY;
    }
    if a.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _n, sign, exp, _)) = a.as_raw_parts() else { return f64::NAN };
    // mantissa words are little-endian, normalized so the top bit of the last word is set
    let top = *words.last().unwrap_or(&0) as u64;
    let frac = top as f64 / 18446744073709551616.0; // 2^64, value in [0.5, 1)
    let v = frac * 2f64.powi(exp);
    if sign.is_negative() {
        -v
    } else {
        v
    }
}
