//! Built-in models: TTW, the caged anisotropic oscillator, the harmonic seed, and
//! inline linear seeds.

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::expr::{int, parse_coeff, rat, Coeff, GenKind, Param, ParamValues, Scalar};
use crate::extension::{build_extended_h, build_k, build_modified_h, build_modified_k, make_profile, ExtError, KMeta, Profile, Seed};
use crate::poisson::{Mom, PPoly, PhasePoint, PhaseSpace, BASE, EXT};

/// A fully generated model.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    /// User-facing rational parameter `m/n`, coprime.
    pub lambda: (u32, u32),
    /// Physical parameters as supplied.
    pub physical: ParamValues,
    /// Values of every symbol occurring in `h_bar` and `k_bar`.
    pub values: ParamValues,
    pub profile: Profile,
    pub seed: Seed,
    pub h_bar: PPoly,
    pub k_bar: PPoly,
    pub k_meta: KMeta,
    /// Coordinate relations to the physical model.
    pub coordinates: Vec<String>,
}

impl ModelSpec {
    fn assemble(name: &str, lambda: (u32, u32), physical: ParamValues, values: ParamValues, profile: Profile, seed: Seed, coordinates: Vec<String>) -> Result<ModelSpec, ExtError> {
        let h_bar = build_modified_h(&profile, &seed.l)?;
        let mk = build_modified_k(&profile, &seed)?;
        Ok(ModelSpec { name: name.into(), lambda, physical, values, profile, seed, h_bar, k_bar: mk.k, k_meta: mk.meta, coordinates })
    }

    /// Plain extension `H` (no `omega` term).
    pub fn plain_h(&self) -> Result<PPoly, ExtError> {
        build_extended_h(&self.profile, &self.seed.l)
    }

    /// Plain first integral `U^m(G_n)`.
    pub fn plain_k(&self) -> Result<PPoly, ExtError> {
        build_k(&self.profile, &self.seed)
    }

    /// Base Hamiltonian lifted to the extended phase space.
    pub fn base_l(&self) -> &PPoly {
        &self.seed.l
    }

    pub fn space(&self) -> PhaseSpace {
        let ring = self.h_bar.ring().merge(&self.k_bar.ring()).unwrap_or_else(|_| self.h_bar.ring());
        PhaseSpace::extended(ring.kind(BASE).unwrap_or(GenKind::Linear), ring.kind(EXT).unwrap_or(GenKind::Linear))
    }
}

fn check_lambda(m: u32, n: u32) -> Result<(), ExtError> {
    if m == 0 || n == 0 {
        return Err(ExtError::InvalidProfile("m and n must be positive".into()));
    }
    if m.gcd(&n) != 1 {
        return Err(ExtError::InvalidProfile(format!("m = {m} and n = {n} are not coprime")));
    }
    Ok(())
}

fn natural(v: &Coeff) -> PPoly {
    PPoly::momentum(BASE).pow(2).scale(&rat(1, 2)).add(&PPoly::constant(v.clone()))
}

fn sym(p: Param) -> Coeff {
    Coeff::param(p)
}

/// TTW base Hamiltonian `p^2/2 + (c1 + c2 cos q)/sin^2 q` with seed `sin(q) p`.
pub fn ttw_seed() -> Seed {
    let v = parse_coeff("(c1 + c2*cos(q))/sin(q)^2").expect("ttw potential");
    let g = PPoly::momentum(BASE).mul_coeff(&parse_coeff("sin(q)").expect("ttw seed"));
    Seed::new(natural(&v), g, int(1), Coeff::zero()).expect("ttw seed")
}

/// `c1 = (alpha1 + alpha2)/(2 lambda^2)`, `c2 = (alpha2 - alpha1)/(2 lambda^2)`.
pub fn ttw_constants(m: u32, n: u32, alpha1: &Scalar, alpha2: &Scalar) -> (Scalar, Scalar) {
    let lam = Scalar::new(m.into(), n.into());
    let d = int(2) * &lam * &lam;
    ((alpha1 + alpha2) / &d, (alpha2 - alpha1) / &d)
}

/// TTW with `lambda = m/n`: the modified `(2m, n)`-extension of the TTW base with `c = 1`, `L0 = 0`, `kappa = 0`.
///
/// Coefficients stay symbolic in `c1`, `c2`, `omega`; `values` carries their numbers.
pub fn ttw_model(m: u32, n: u32, alpha1: &Scalar, alpha2: &Scalar, omega: &Scalar) -> Result<ModelSpec, ExtError> {
    check_lambda(m, n)?;
    let profile = make_profile(2 * m, n, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), &sym(Param::Omega))?;
    let (c1, c2) = ttw_constants(m, n, alpha1, alpha2);
    let physical = ParamValues::new().with(Param::Alpha1, alpha1.clone()).with(Param::Alpha2, alpha2.clone()).with(Param::Omega, omega.clone());
    let values = ParamValues::new().with(Param::C1, c1).with(Param::C2, c2).with(Param::Omega, omega.clone());
    let coordinates = vec![
        format!("q = 2*({m}/{n})*theta"),
        "u = r".into(),
        format!("p_q = p_theta/(2*({m}/{n}))"),
        "p_u = p_r".into(),
    ];
    ModelSpec::assemble("ttw", (m, n), physical, values, profile, ttw_seed(), coordinates)
}

/// Caged base `p^2/2 + (L0/4) q^2 + b/q^2` with seed `q p`.
pub fn cage_seed() -> Seed {
    let v = parse_coeff("L0*q^2/4 + b/q^2").expect("cage potential");
    Seed::new(natural(&v), PPoly::momentum(BASE).mul_coeff(&Coeff::var(BASE)), int(0), sym(Param::L0)).expect("cage seed")
}

/// Caged anisotropic oscillator: the modified `(m, n)`-extension of the caged base with `c = 0`.
///
/// Symbolic in `L0`, `b`, `omega`; `A` enters exactly.
pub fn cage_model(m: u32, n: u32, l0: &Scalar, b: &Scalar, omega: &Scalar, a: &Scalar) -> Result<ModelSpec, ExtError> {
    check_lambda(m, n)?;
    let profile = make_profile(m, n, &int(0), &sym(Param::L0), &int(0), &Coeff::from_scalar(a.clone()), &sym(Param::Omega))?;
    let physical = ParamValues::new().with(Param::L0, l0.clone()).with(Param::B, b.clone()).with(Param::Omega, omega.clone()).with(Param::A, a.clone());
    let values = ParamValues::new().with(Param::L0, l0.clone()).with(Param::B, b.clone()).with(Param::Omega, omega.clone());
    let coordinates = vec![format!("x = ({n}/{m})*q"), "y = u".into(), format!("p_x = ({m}/{n})*p_q"), "p_y = p_u".into()];
    ModelSpec::assemble("cage", (m, n), physical, values, profile, cage_seed(), coordinates)
}

/// Harmonic base `p^2/2 + L0 q^2` with seed `p`.
pub fn harmonic_seed() -> Seed {
    Seed::new(natural(&parse_coeff("L0*q^2").expect("harmonic potential")), PPoly::momentum(BASE), int(0), sym(Param::L0)).expect("harmonic seed")
}

pub fn harmonic_model(m: u32, n: u32, l0: &Scalar, omega: &Scalar) -> Result<ModelSpec, ExtError> {
    check_lambda(m, n)?;
    let profile = make_profile(m, n, &int(0), &sym(Param::L0), &int(0), &Coeff::one(), &sym(Param::Omega))?;
    let values = ParamValues::new().with(Param::L0, l0.clone()).with(Param::Omega, omega.clone());
    ModelSpec::assemble("harmonic", (m, n), values.clone(), values, profile, harmonic_seed(), vec![])
}

/// Inline base system `L = p^2/2 + V` with linear seed `G = eta p`.
pub struct InlineModel<'a> {
    pub v: &'a str,
    pub eta: &'a str,
    pub c: Scalar,
    pub l0: Scalar,
    pub kappa: Scalar,
    pub a: Scalar,
}

pub fn inline_model(def: &InlineModel<'_>, m: u32, n: u32, values: ParamValues) -> Result<ModelSpec, ExtError> {
    if m == 0 || n == 0 {
        return Err(ExtError::InvalidProfile("m and n must be positive".into()));
    }
    let v = parse_coeff(def.v)?;
    let eta = parse_coeff(def.eta)?;
    if v.uses_slot(EXT) || eta.uses_slot(EXT) {
        return Err(ExtError::InvalidSeed("V and eta must depend on q only".into()));
    }
    let l0 = Coeff::from_scalar(def.l0.clone());
    let seed = Seed::new(natural(&v), PPoly::momentum(BASE).mul_coeff(&eta), def.c.clone(), l0.clone())?;
    let profile = make_profile(m, n, &def.c, &l0, &def.kappa, &Coeff::from_scalar(def.a.clone()), &sym(Param::Omega))?;
    ModelSpec::assemble("inline", (m, n), values.clone(), values, profile, seed, vec![])
}

/// Reference closed form of the first integral of `H_bar_{2,1}` (TTW, `lambda = 1`), term by term.
pub fn golden_k21() -> PPoly {
    let c = |s: &str| parse_coeff(s).expect("golden coefficient");
    PPoly::from_terms([
        (Mom([1, 2]), c("sin(q)")),
        (Mom([2, 1]), c("4*cos(q)/u")),
        (Mom([3, 0]), c("-4*sin(q)/u^2")),
        (Mom([0, 1]), c("4*(c2*(cos(q)^2 + 1) + 2*c1*cos(q))/(u*sin(q)^2)")),
        (Mom([1, 0]), c("2*(omega*u^4*sin(q)^2 - 4*(c1 + c2*cos(q)))/(u^2*sin(q))")),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapDirection {
    PolarToCartesian,
    CartesianToPolar,
}

/// Canonical point map between `(r, theta, p_r, p_theta)` and `(x, y, p_x, p_y)`,
/// stored in the `q`/`p` arrays in that order.
pub fn polar_cartesian_map(x: &PhasePoint, dir: MapDirection) -> Result<PhasePoint, ExtError> {
    match dir {
        MapDirection::PolarToCartesian => {
            let [r, th] = x.q;
            let [pr, pth] = x.p;
            if r <= 0.0 {
                return Err(ExtError::Singular("r must be positive".into()));
            }
            let (s, c) = th.sin_cos();
            Ok(PhasePoint::new([r * c, r * s], [c * pr - s * pth / r, s * pr + c * pth / r]))
        }
        MapDirection::CartesianToPolar => {
            let [px, py] = x.p;
            let [x0, y0] = x.q;
            let r = x0.hypot(y0);
            if r == 0.0 {
                return Err(ExtError::Singular("origin has no polar coordinates".into()));
            }
            Ok(PhasePoint::new([r, y0.atan2(x0)], [(x0 * px + y0 * py) / r, x0 * py - y0 * px]))
        }
    }
}

/// Polar point to TTW model coordinates `(q, u, p_q, p_u)`.
pub fn ttw_from_polar(pt: &PhasePoint, m: u32, n: u32) -> PhasePoint {
    let lam = m as f64 / n as f64;
    PhasePoint::new([2.0 * lam * pt.q[1], pt.q[0]], [pt.p[1] / (2.0 * lam), pt.p[0]])
}

/// Cartesian point to caged model coordinates `(q, u, p_q, p_u)`, with `x = (n/m) q`, `y = u`.
pub fn cage_from_cartesian(pt: &PhasePoint, m: u32, n: u32) -> PhasePoint {
    let k = m as f64 / n as f64;
    PhasePoint::new([k * pt.q[0], pt.q[1]], [pt.p[0] / k, pt.p[1]])
}

/// The caged model matching TTW with `lambda = 1`: `b = alpha1`, cage `omega = alpha2`,
/// `4 L0 = omega_ttw`, on the `(2, 1)` extension.
pub fn cage_partner_of_ttw(alpha1: &Scalar, alpha2: &Scalar, omega: &Scalar) -> Result<ModelSpec, ExtError> {
    cage_model(2, 1, &(omega / int(4)), alpha1, alpha2, &Scalar::one())
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    pub default: &'static str,
    pub meaning: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub parameters: Vec<ParamSchema>,
}

pub fn catalog() -> Vec<CatalogEntry> {
    let p = |name, default, meaning| ParamSchema { name, default, meaning };
    vec![
        CatalogEntry {
            name: "ttw",
            description: "TTW system with lambda = m/n, built as the modified (2m, n)-extension of p^2/2 + (c1 + c2 cos q)/sin^2 q",
            parameters: vec![p("alpha1", "1", "coefficient of 1/cos^2"), p("alpha2", "2", "coefficient of 1/sin^2"), p("omega", "1", "radial oscillator")],
        },
        CatalogEntry {
            name: "cage",
            description: "caged anisotropic oscillator, modified (m, n)-extension of p^2/2 + L0 q^2/4 + b/q^2",
            parameters: vec![p("L0", "1", "oscillator strength"), p("b", "1", "barrier in x"), p("omega", "1", "barrier in u"), p("A", "1", "profile scale")],
        },
        CatalogEntry {
            name: "harmonic",
            description: "modified (m, n)-extension of p^2/2 + L0 q^2 with seed p",
            parameters: vec![p("L0", "1", "oscillator strength"), p("omega", "1", "barrier in u")],
        },
    ]
}

/// Default numeric parameters for a catalog model.
pub fn default_params(name: &str) -> Option<ParamValues> {
    let v = |s: &[(Param, i64)]| s.iter().fold(ParamValues::new(), |acc, (p, x)| acc.with(*p, int(*x)));
    match name {
        "ttw" => Some(v(&[(Param::Alpha1, 1), (Param::Alpha2, 2), (Param::Omega, 1)])),
        "cage" => Some(v(&[(Param::L0, 1), (Param::B, 1), (Param::Omega, 1), (Param::A, 1)])),
        "harmonic" => Some(v(&[(Param::L0, 1), (Param::Omega, 1)])),
        _ => None,
    }
}

/// Builds a catalog model from `(m, n)` and parameters; missing ones take defaults.
pub fn build_catalog_model(name: &str, m: u32, n: u32, params: &ParamValues) -> Result<ModelSpec, ExtError> {
    let defaults = default_params(name).ok_or_else(|| ExtError::InvalidSeed(format!("unknown model `{name}`")))?;
    for (p, _) in params.iter() {
        if defaults.get(*p).is_none() {
            return Err(ExtError::InvalidSeed(format!("model `{name}` has no parameter `{p}`")));
        }
    }
    let pv = defaults.merged(params);
    let g = |p: Param| pv.get(p).cloned().unwrap_or_else(Scalar::zero);
    match name {
        "ttw" => ttw_model(m, n, &g(Param::Alpha1), &g(Param::Alpha2), &g(Param::Omega)),
        "cage" => cage_model(m, n, &g(Param::L0), &g(Param::B), &g(Param::Omega), &g(Param::A)),
        _ => harmonic_model(m, n, &g(Param::L0), &g(Param::Omega)),
    }
}
