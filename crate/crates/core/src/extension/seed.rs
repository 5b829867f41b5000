use num_traits::Zero;

use super::ExtError;
use crate::expr::{Coeff, Scalar};
use crate::poisson::{apply_xl, PPoly, EXT};

/// Base Hamiltonian `L` with a solution `G` of the structural equation.
#[derive(Clone, Debug)]
pub struct Seed {
    pub l: PPoly,
    pub g: PPoly,
    pub c: Scalar,
    pub l0: Coeff,
}

/// Outcome of a structural-equation check.
#[derive(Clone, Debug)]
pub struct SeedCheck {
    pub residual: PPoly,
    pub ok: bool,
}

/// `X_L^2(G) + 2 k^2 (c L + L0) G`.
pub fn structural_residual(l: &PPoly, g: &PPoly, c: &Scalar, l0: &Coeff, k: u32) -> Result<PPoly, ExtError> {
    let x2 = apply_xl(l, &apply_xl(l, g)?)?;
    let k2 = Scalar::from_integer((2 * k * k).into());
    let shift = l.scale(c).add(&PPoly::constant(l0.clone())).scale(&k2);
    Ok(x2.add(&shift.mul(g)))
}

/// Checks `X_L^2(G) = -2 (c L + L0) G`.
pub fn check_seed(l: &PPoly, g: &PPoly, c: &Scalar, l0: &Coeff) -> Result<SeedCheck, ExtError> {
    let residual = structural_residual(l, g, c, l0, 1)?;
    let ok = residual.is_zero();
    Ok(SeedCheck { residual, ok })
}

impl Seed {
    /// Certified seed; refuses pairs whose structural residual is nonzero.
    pub fn new(l: PPoly, g: PPoly, c: Scalar, l0: Coeff) -> Result<Seed, ExtError> {
        if !l.independent_of(EXT) || !g.independent_of(EXT) {
            return Err(ExtError::InvalidSeed("L and G must not depend on (u, p_u)".into()));
        }
        if c.is_zero() && l0.is_zero() {
            return Err(ExtError::InvalidSeed("c and L0 cannot both vanish".into()));
        }
        let chk = check_seed(&l, &g, &c, &l0)?;
        if !chk.ok {
            return Err(ExtError::SeedCondition { residual: chk.residual.to_string() });
        }
        Ok(Seed { l, g, c, l0 })
    }

    /// `G_1, ..., G_n` of the recursion.
    pub fn recursion(&self, n: u32) -> Vec<PPoly> {
        assert!(n >= 1, "recursion index starts at 1");
        let xg = apply_xl(&self.l, &self.g).expect("seed ring");
        let mut out = vec![self.g.clone()];
        for k in 1..n {
            let gk = out.last().unwrap();
            let xgk = apply_xl(&self.l, gk).expect("seed ring");
            let next = xg.mul(gk).add(&self.g.mul(&xgk).scale(&Scalar::new(1.into(), k.into())));
            out.push(next);
        }
        out
    }

    /// Residual of the transferred structural equation for `G_n`.
    pub fn recursion_residual(&self, gn: &PPoly, n: u32) -> PPoly {
        structural_residual(&self.l, gn, &self.c, &self.l0, n).expect("seed ring")
    }
}

/// `G_n` of the recursion `G_{k+1} = X_L(G) G_k + (1/k) G X_L(G_k)`.
pub fn recursion_gn(seed: &Seed, n: u32) -> PPoly {
    seed.recursion(n).pop().unwrap()
}
