use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::ExtError;
use crate::expr::{rational_sqrt, scalar_to_freq, Coeff, ExprError, Scalar};
use crate::poisson::EXT;

/// Which Table-1 column a profile comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    /// `c = 0`: `gamma = -A u`.
    Flat,
    /// `c != 0`: `gamma = 1 / T_kappa(c u)`.
    Curved,
}

/// Tagged trigonometric family member.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tagged {
    S,
    C,
    T,
}

/// Numeric tagged function for any real `kappa`.
pub fn tagged_trig(kind: Tagged, kappa: f64, x: f64) -> Result<f64, ExtError> {
    let s = if kappa > 0.0 {
        let k = kappa.sqrt();
        ((k * x).sin() / k, (k * x).cos())
    } else if kappa < 0.0 {
        let k = (-kappa).sqrt();
        ((k * x).sinh() / k, (k * x).cosh())
    } else {
        (x, 1.0)
    };
    match kind {
        Tagged::S => Ok(s.0),
        Tagged::C => Ok(s.1),
        Tagged::T => {
            if s.1.abs() < 1e-14 {
                Err(ExtError::Singular(format!("T_kappa undefined at x = {x}: C_kappa vanishes")))
            } else {
                Ok(s.0 / s.1)
            }
        }
    }
}

/// Exact `S_kappa(w v)`, `C_kappa(w v)` or `T_kappa(w v)` for the position in `slot`.
///
/// Needs `kappa = 0` or `|kappa|` a rational square.
pub fn tagged_symbolic(kind: Tagged, kappa: &Scalar, w: &Scalar, slot: usize) -> Result<Coeff, ExtError> {
    let (s, c) = if kappa.is_zero() {
        (Coeff::var(slot).scale(w), Coeff::one())
    } else {
        let k = rational_sqrt(&kappa.abs()).ok_or_else(|| ExprError::NonSquareCurvature(kappa.to_string()))?;
        let f = &k * w;
        if f.is_zero() {
            return Err(ExtError::InvalidProfile("tagged function with zero argument scale".into()));
        }
        let freq = scalar_to_freq(&f.abs()).ok_or_else(|| ExtError::InvalidProfile("frequency too large".into()))?;
        let sign = if f.is_negative() { -Scalar::one() } else { Scalar::one() };
        let (s, c) = if kappa.is_positive() {
            (Coeff::sin(slot, freq), Coeff::cos(slot, freq))
        } else {
            (Coeff::sinh(slot, freq), Coeff::cosh(slot, freq))
        };
        (s.scale(&(sign / k)), c)
    };
    Ok(match kind {
        Tagged::S => s,
        Tagged::C => c,
        Tagged::T => s.checked_div(&c)?,
    })
}

/// `(m, n, c, L0, kappa, A, omega)` with the derived `alpha`, `beta`, `gamma`.
#[derive(Clone, Debug)]
pub struct Profile {
    pub m: u32,
    pub n: u32,
    pub c: Scalar,
    pub l0: Coeff,
    pub kappa: Scalar,
    pub a: Coeff,
    pub omega: Coeff,
    pub column: Column,
    pub alpha: Coeff,
    pub beta: Coeff,
    pub gamma: Coeff,
    /// Set when a nonzero `L0` was replaced by zero in the curved column.
    pub l0_forced: bool,
}

/// Table-1 profile. In the curved column `L0` is forced to zero.
pub fn make_profile(m: u32, n: u32, c: &Scalar, l0: &Coeff, kappa: &Scalar, a: &Coeff, omega: &Coeff) -> Result<Profile, ExtError> {
    if m == 0 || n == 0 {
        return Err(ExtError::InvalidProfile("m and n must be positive".into()));
    }
    if !l0.is_constant() || !a.is_constant() || !omega.is_constant() {
        return Err(ExtError::InvalidProfile("L0, A and omega must not depend on positions".into()));
    }
    if c.is_zero() && l0.is_zero() {
        return Err(ExtError::InvalidProfile("c and L0 cannot both vanish".into()));
    }
    let (column, l0v, l0_forced, alpha, beta, gamma) = if c.is_zero() {
        if a.is_zero() {
            return Err(ExtError::InvalidProfile("A must be nonzero".into()));
        }
        let gamma = -(a * &Coeff::var(EXT));
        let beta = l0 * &gamma.powu(2);
        (Column::Flat, l0.clone(), false, a.clone(), beta, gamma)
    } else {
        let s = tagged_symbolic(Tagged::S, kappa, c, EXT)?;
        let t = tagged_symbolic(Tagged::T, kappa, c, EXT)?;
        let gamma = t.recip()?;
        let alpha = Coeff::from_scalar(c.clone()).checked_div(&s.powu(2))?;
        (Column::Curved, Coeff::zero(), !l0.is_zero(), alpha, Coeff::zero(), gamma)
    };
    let p = Profile { m, n, c: c.clone(), l0: l0v, kappa: kappa.clone(), a: a.clone(), omega: omega.clone(), column, alpha, beta, gamma, l0_forced };
    p.check_invariants()?;
    Ok(p)
}

impl Profile {
    /// `m / n` as an exact rational.
    pub fn ratio(&self) -> Scalar {
        Scalar::new(self.m.into(), self.n.into())
    }

    /// `m^2 / n^2`.
    pub fn ratio_sq(&self) -> Scalar {
        let r = self.ratio();
        &r * &r
    }

    /// Same functions with different `(m, n)`.
    pub fn with_mn(&self, m: u32, n: u32) -> Profile {
        Profile { m, n, ..self.clone() }
    }

    /// Residuals of `alpha + gamma'`, `beta - L0 gamma^2` (or `beta`), `gamma'' + 2 c gamma' gamma`.
    pub fn invariant_residuals(&self) -> [Coeff; 3] {
        let g1 = self.gamma.derivative(EXT);
        let g2 = g1.derivative(EXT);
        let r_alpha = &self.alpha + &g1;
        let r_beta = match self.column {
            Column::Flat => &self.beta - &(&self.l0 * &self.gamma.powu(2)),
            Column::Curved => self.beta.clone(),
        };
        let r_gamma = &g2 + &(&g1 * &self.gamma).scale(&(Scalar::from_integer(2.into()) * &self.c));
        [r_alpha, r_beta, r_gamma]
    }

    pub fn check_invariants(&self) -> Result<(), ExtError> {
        let names = ["alpha = -gamma'", "beta relation", "gamma'' + 2c gamma' gamma = 0"];
        for (r, name) in self.invariant_residuals().iter().zip(names) {
            if !r.is_zero() {
                return Err(ExtError::InvalidProfile(format!("profile invariant `{name}` fails: residual {r}")));
            }
        }
        Ok(())
    }

    /// `gamma^-2`.
    pub fn gamma_inv_sq(&self) -> Result<Coeff, ExtError> {
        Ok(self.gamma.pow(-2)?)
    }
}
