use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::profile::{tagged_symbolic, Tagged};
use super::ExtError;
use crate::expr::{Coeff, Scalar};
use crate::poisson::BASE;

/// Rows of the table of linear seeds `G = eta p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearCase {
    /// `c != 0`
    Curved,
    /// `c = 0`, `a1 != 0`
    FlatAffine,
    /// `c = 0`, `a1 = 0`
    FlatConstant,
}

#[derive(Clone, Debug)]
pub struct LinearInputs {
    pub c: Scalar,
    pub a1: Coeff,
    pub a2: Coeff,
    pub c1: Coeff,
    pub c2: Coeff,
    pub l0: Coeff,
    /// Optional explicit row; must agree with the inputs.
    pub case: Option<LinearCase>,
}

#[derive(Clone, Debug)]
pub struct LinearSeedFamily {
    pub case: LinearCase,
    pub eta: Coeff,
    pub v: Coeff,
    pub c: Scalar,
    pub l0: Coeff,
    /// Residuals of `eta'' + c eta` and `3 V' eta' + eta V'' - 2 eta (c V + L0)`.
    pub residuals: [Coeff; 2],
    pub certified: bool,
}

/// Residuals of the two linear-seed equations.
pub fn gl_residuals(eta: &Coeff, v: &Coeff, c: &Scalar, l0: &Coeff) -> [Coeff; 2] {
    let e1 = eta.derivative(BASE);
    let e2 = e1.derivative(BASE);
    let v1 = v.derivative(BASE);
    let v2 = v1.derivative(BASE);
    let r1 = &e2 + &eta.scale(c);
    let two = Scalar::from_integer(2.into());
    let r2 = &(&(&v1 * &e1).scale(&Scalar::from_integer(3.into())) + &(eta * &v2)) - &(eta * &(&v.scale(c) + l0)).scale(&two);
    [r1, r2]
}

pub fn infer_case(c: &Scalar, a1: &Coeff) -> LinearCase {
    if !c.is_zero() {
        LinearCase::Curved
    } else if a1.is_zero() {
        LinearCase::FlatConstant
    } else {
        LinearCase::FlatAffine
    }
}

/// `(eta, V)` for a row of the linear-seed table, with certified residuals.
pub fn solve_linear_seed(inp: &LinearInputs) -> Result<LinearSeedFamily, ExtError> {
    let case = infer_case(&inp.c, &inp.a1);
    if let Some(explicit) = inp.case {
        if explicit != case {
            return Err(ExtError::InconsistentCase(format!("requested {explicit:?} but inputs select {case:?}")));
        }
    }
    for (name, k) in [("a1", &inp.a1), ("a2", &inp.a2), ("c1", &inp.c1), ("c2", &inp.c2), ("L0", &inp.l0)] {
        if !k.is_constant() {
            return Err(ExtError::InconsistentCase(format!("{name} must be a constant")));
        }
    }
    let q = Coeff::var(BASE);
    let (eta, v) = match case {
        LinearCase::Curved => {
            if inp.a1.is_zero() && inp.a2.is_zero() {
                return Err(ExtError::InconsistentCase("a1 and a2 cannot both vanish".into()));
            }
            let one = Scalar::from_integer(1.into());
            let s = tagged_symbolic(Tagged::S, &inp.c, &one, BASE)?;
            let cc = tagged_symbolic(Tagged::C, &inp.c, &one, BASE)?;
            let eta = &(&inp.a1 * &s) + &(&inp.a2 * &cc);
            let d = eta.derivative(BASE);
            let v = (&inp.c1 + &(&inp.c2 * &d)).checked_div(&eta.powu(2))?;
            let v = &v - &inp.l0.scale(&inp.c.recip());
            (eta, v)
        }
        LinearCase::FlatAffine => {
            let eta = &(&inp.a1 * &q) + &inp.a2;
            let e2 = eta.powu(2);
            let k = inp.l0.checked_div(&inp.a1.powu(2).scale(&Scalar::from_integer(4.into())))?;
            let v = &(&(&k * &e2) + &inp.c1.checked_div(&e2)?) + &inp.c2;
            (eta, v)
        }
        LinearCase::FlatConstant => {
            if inp.a2.is_zero() {
                return Err(ExtError::InconsistentCase("a2 must be nonzero when a1 = 0".into()));
            }
            let v = &(&(&inp.l0 * &q.powu(2)) + &(&inp.c1 * &q)) + &inp.c2;
            (inp.a2.clone(), v)
        }
    };
    let residuals = gl_residuals(&eta, &v, &inp.c, &inp.l0);
    let certified = residuals.iter().all(Coeff::is_zero);
    Ok(LinearSeedFamily { case, eta, v, c: inp.c.clone(), l0: inp.l0.clone(), residuals, certified })
}

/// One equation of the coefficient system for a degree-`r` seed.
#[derive(Clone, Debug)]
pub struct E2Residual {
    /// Power of `p` whose coefficient this is.
    pub power: usize,
    /// Block of the system (1: top pair, 2: next pair, 3: middle, 4: bottom pair).
    pub block: u8,
    pub residual: Coeff,
}

#[derive(Clone, Debug)]
pub struct E2Report {
    pub residuals: Vec<E2Residual>,
    pub ok: bool,
}

/// Coefficient-wise form of `X_L^2 G + 2 (c L + L0) G` for `L = p^2/2 + V`, `G = sum eta_i p^i`.
pub fn check_e2_system(v: &Coeff, etas: &[Coeff], c: &Scalar, l0: &Coeff) -> E2Report {
    let r = etas.len().saturating_sub(1);
    let eta = |j: isize| -> Coeff {
        if j < 0 || j as usize > r {
            Coeff::zero()
        } else {
            etas[j as usize].clone()
        }
    };
    let v1 = v.derivative(BASE);
    let v2 = v1.derivative(BASE);
    let v1sq = &v1 * &v1;
    let two = Scalar::from_integer(2.into());
    let mut residuals = Vec::new();
    for j in 0..=(r + 2) {
        let ji = j as isize;
        let low = eta(ji - 2);
        let mid = eta(ji);
        let high = eta(ji + 2);
        let a = &low.derivative(BASE).derivative(BASE) + &low.scale(c);
        let b = (&v1 * &mid.derivative(BASE)).scale(&Scalar::from_integer((2 * j as i64 + 1).into()));
        let w = &(&v.scale(&(c * &two)) + &l0.scale(&two)) - &v2.scale(&Scalar::from_integer((j as i64).into()));
        let d = (&v1sq * &high).scale(&Scalar::from_integer((((j + 1) * (j + 2)) as i64).into()));
        let res = &(&(&a - &b) + &(&w * &mid)) + &d;
        let block = if j > r {
            1
        } else if j + 1 >= r && j >= 2 {
            2
        } else if j >= 2 {
            3
        } else {
            4
        };
        residuals.push(E2Residual { power: j, block, residual: res });
    }
    let ok = residuals.iter().all(|e| e.residual.is_zero());
    E2Report { residuals, ok }
}
