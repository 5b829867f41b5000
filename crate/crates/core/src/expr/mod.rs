//! Exact symbolic coefficients: rational functions of trigonometric, hyperbolic or
//! Laurent generators in the position variables, with symbolic parameters.

pub mod arith;
mod coeff;
mod mono;
mod param;
mod parse;
mod poly;
mod ring;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

pub use coeff::{atom_values, Coeff, CoeffSum};
pub use mono::{Mono, NATOMS};
pub use param::{Param, ParamValues, NPARAMS};
pub use parse::{parse_coeff, parse_coeff_with};
pub use poly::{AtomNames, AtomValues, Poly};
pub use ring::{Freq, GenKind, Ring};

/// Exact rational scalar.
pub type Scalar = BigRational;

/// Number of position slots: the base coordinate and the extension coordinate.
pub const SLOTS: usize = 2;

/// Default printable names of the position variables.
pub const DEFAULT_VARS: [&str; SLOTS] = ["q", "u"];

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("conflicting generator kinds for position slot {slot}")]
    RingConflict { slot: usize },
    #[error("curvature {0} is not the square of a rational; use the numeric path")]
    NonSquareCurvature(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("expression is singular at this point")]
    Singular,
    #[error("no value bound for parameter `{0}`")]
    MissingParam(Param),
    #[error("no value bound for position slot {0}")]
    MissingCoordinate(usize),
}

/// Thresholds below which a denominator is treated as vanishing.
#[derive(Debug, Clone, Copy)]
pub struct EvalGuard {
    /// Absolute bound on a single position generator in a denominator.
    pub atom: f64,
    /// Bound on a denominator factor relative to the sum of its term magnitudes.
    pub relative: f64,
}

impl Default for EvalGuard {
    fn default() -> Self {
        EvalGuard { atom: 1e-8, relative: 1e-10 }
    }
}

/// Parse an exact rational: `3`, `-7/2`, `0.125`, `1.5e-3`.
pub fn parse_scalar(s: &str) -> Result<Scalar, ExprError> {
    let err = |msg: &str| ExprError::Parse { pos: 0, msg: format!("{msg}: `{s}`") };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty number"));
    }
    if let Some((a, b)) = t.split_once('/') {
        let n = parse_scalar(a)?;
        let d = parse_scalar(b)?;
        if d.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        return Ok(n / d);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| err("bad exponent"))?),
        None => (body, 0),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(err("bad number"));
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("bad number"));
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = digits.parse().map_err(|_| err("bad number"))?;
    let shift = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Scalar::from_integer(n);
    if shift >= 0 {
        q *= Scalar::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        q /= Scalar::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if neg { -q } else { q })
}

/// Exact rational from a small fraction.
pub fn rat(n: i64, d: i64) -> Scalar {
    Scalar::new(n.into(), d.into())
}

/// Exact integer scalar.
pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(n.into())
}

/// Exact square root of a rational, if it is a perfect square.
pub fn rational_sqrt(q: &Scalar) -> Option<Scalar> {
    use num_traits::Signed;
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Scalar::new(n, d))
    } else {
        None
    }
}

/// Convert a small rational to a generator frequency.
pub fn scalar_to_freq(q: &Scalar) -> Option<Freq> {
    use num_traits::ToPrimitive;
    Some(Freq::new(q.numer().to_i64()?, q.denom().to_i64()?))
}

pub fn freq_to_scalar(w: Freq) -> Scalar {
    rat(*w.numer(), *w.denom())
}
