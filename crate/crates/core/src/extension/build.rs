use num_integer::binomial;
use serde::Serialize;

use super::{ExtError, Profile, Seed};
use crate::expr::{Coeff, Scalar};
use crate::poisson::{apply_xl, PPoly, UOperator, WOperator, EXT};

fn int(k: u64) -> Scalar {
    Scalar::from_integer(k.into())
}

fn half_pu_sq() -> PPoly {
    PPoly::momentum(EXT).pow(2).scale(&Scalar::new(1.into(), 2.into()))
}

/// `U_{m,n} = p_u + (m/n^2) gamma X_L` for a profile and base Hamiltonian.
pub fn u_operator(profile: &Profile, l: &PPoly) -> Result<UOperator, ExtError> {
    Ok(UOperator::new(l, profile.m, profile.n, &profile.gamma)?)
}

/// `U^2 + 2 omega gamma^-2`.
pub fn w_operator(profile: &Profile, l: &PPoly) -> Result<WOperator, ExtError> {
    Ok(WOperator::new(u_operator(profile, l)?, &profile.omega, &profile.gamma)?)
}

pub fn apply_u(profile: &Profile, l: &PPoly, f: &PPoly) -> Result<PPoly, ExtError> {
    Ok(u_operator(profile, l)?.apply(f))
}

pub fn apply_w(profile: &Profile, l: &PPoly, f: &PPoly) -> Result<PPoly, ExtError> {
    Ok(w_operator(profile, l)?.apply(f))
}

/// `H = p_u^2/2 + (m^2/n^2) alpha L + (m^2/n^2) beta`.
pub fn build_extended_h(profile: &Profile, l: &PPoly) -> Result<PPoly, ExtError> {
    if !l.independent_of(EXT) {
        return Err(ExtError::InvalidSeed("L must not depend on (u, p_u)".into()));
    }
    let k = profile.ratio_sq();
    let body = l.mul_coeff(&profile.alpha).add(&PPoly::constant(profile.beta.clone()));
    Ok(half_pu_sq().add(&body.scale(&k)))
}

/// `K = U^m (G_n)`.
pub fn build_k(profile: &Profile, seed: &Seed) -> Result<PPoly, ExtError> {
    let gn = super::recursion_gn(seed, profile.n);
    Ok(u_operator(profile, &seed.l)?.apply_n(&gn, profile.m))
}

/// `Lambda = -2 (c L + L0)`.
pub fn lambda(seed: &Seed) -> PPoly {
    seed.l.scale(&seed.c).add(&PPoly::constant(seed.l0.clone())).scale(&int(2)).neg()
}

/// `(P, D)` with `U^r(G_n) = P G_n + D X_L(G_n)`.
pub fn closed_form_pd(profile: &Profile, seed: &Seed, r: u32) -> Result<(PPoly, PPoly), ExtError> {
    if r > profile.m {
        return Err(ExtError::ClosedFormOrder { r, m: profile.m });
    }
    let lam = lambda(seed);
    let w = profile.gamma.scale(&profile.ratio());
    let pu = PPoly::momentum(EXT);
    let mut p = PPoly::zero();
    let mut d = PPoly::zero();
    for k in 0..=r / 2 {
        let t = pu.pow(r - 2 * k).mul(&lam.pow(k)).mul_coeff(&w.powu(2 * k)).scale(&int(binomial(r as u64, 2 * k as u64)));
        p = p.add(&t);
    }
    if r >= 1 {
        let inv_n = Scalar::new(1.into(), profile.n.into());
        for k in 0..=(r - 1) / 2 {
            let t = pu
                .pow(r - 2 * k - 1)
                .mul(&lam.pow(k))
                .mul_coeff(&w.powu(2 * k + 1))
                .scale(&(int(binomial(r as u64, 2 * k as u64 + 1)) * &inv_n));
            d = d.add(&t);
        }
    }
    Ok((p, d))
}

/// `P G_n + D X_L(G_n)`.
pub fn closed_form_apply(profile: &Profile, seed: &Seed, r: u32, gn: &PPoly) -> Result<PPoly, ExtError> {
    let (p, d) = closed_form_pd(profile, seed, r)?;
    let xg = apply_xl(&seed.l, gn)?;
    Ok(p.mul(gn).add(&d.mul(&xg)))
}

/// `H_bar = H + omega gamma^-2`.
pub fn build_modified_h(profile: &Profile, l: &PPoly) -> Result<PPoly, ExtError> {
    let h = build_extended_h(profile, l)?;
    let shift = &profile.omega * &profile.gamma_inv_sq()?;
    Ok(h.add(&PPoly::constant(shift)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Which extension was actually used to build a modified first integral.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KMeta {
    pub requested_m: u32,
    pub requested_n: u32,
    pub branch: Parity,
    pub effective_m: u32,
    pub effective_n: u32,
    /// Number of applications of `U^2 + 2 omega gamma^-2`.
    pub power: u32,
    /// Index of the recursion term acted on.
    pub g_index: u32,
}

impl KMeta {
    pub fn for_profile(profile: &Profile) -> KMeta {
        let (m, n) = (profile.m, profile.n);
        if m % 2 == 0 {
            KMeta { requested_m: m, requested_n: n, branch: Parity::Even, effective_m: m, effective_n: n, power: m / 2, g_index: n }
        } else {
            KMeta { requested_m: m, requested_n: n, branch: Parity::Odd, effective_m: 2 * m, effective_n: 2 * n, power: m, g_index: 2 * n }
        }
    }

    pub fn effective_profile(&self, profile: &Profile) -> Profile {
        profile.with_mn(self.effective_m, self.effective_n)
    }
}

#[derive(Clone, Debug)]
pub struct ModifiedK {
    pub k: PPoly,
    pub meta: KMeta,
}

/// `(U^2 + 2 omega gamma^-2)^s G_n` for even `m = 2s`; odd `m` goes through `(2m, 2n)`.
pub fn build_modified_k(profile: &Profile, seed: &Seed) -> Result<ModifiedK, ExtError> {
    let meta = KMeta::for_profile(profile);
    let eff = meta.effective_profile(profile);
    let g = super::recursion_gn(seed, meta.g_index);
    let k = w_operator(&eff, &seed.l)?.apply_n(&g, meta.power);
    Ok(ModifiedK { k, meta })
}

/// `sum_j C(s,j) (2 omega / gamma^2)^j U^{2(s-j)}(G_n)`, with the same dispatch.
pub fn expand_modified_k(profile: &Profile, seed: &Seed) -> Result<PPoly, ExtError> {
    let meta = KMeta::for_profile(profile);
    let eff = meta.effective_profile(profile);
    let g = super::recursion_gn(seed, meta.g_index);
    let u = u_operator(&eff, &seed.l)?;
    let s = meta.power;
    let shift = (&eff.omega * &eff.gamma_inv_sq()?).scale(&int(2));
    // powers U^{2i}(G) for i = 0..s
    let mut pows = vec![g];
    for _ in 0..s {
        let next = u.apply_n(pows.last().unwrap(), 2);
        pows.push(next);
    }
    let mut out = PPoly::zero();
    let mut w = Coeff::one();
    for j in 0..=s {
        let term = pows[(s - j) as usize].mul_coeff(&w).scale(&int(binomial(s as u64, j as u64)));
        out = out.add(&term);
        w = &w * &shift;
    }
    Ok(out)
}
