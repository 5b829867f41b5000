//! Polynomials in the momenta with exact coefficient functions, and canonical
//! Poisson brackets on them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::arith::{Arith, F64};
use crate::expr::{atom_values, Coeff, CoeffSum, EvalError, EvalGuard, GenKind, ParamValues, Ring, Scalar, SLOTS};

/// Slot of the base position variable.
pub const BASE: usize = 0;
/// Slot of the extension variable `u`.
pub const EXT: usize = 1;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PoissonError {
    #[error("operands live on different phase spaces (slot {slot} kinds differ)")]
    PhaseSpaceMismatch { slot: usize },
    #[error("the phase space has no extension pair")]
    NoExtension,
    #[error("the base function depends on the extension pair")]
    DependsOnExtension,
    #[error("gamma vanishes identically")]
    GammaZero,
}

/// Coordinate names and generator kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseSpace {
    pub positions: [String; SLOTS],
    pub momenta: [String; SLOTS],
    pub ring: Ring,
    pub extension: bool,
}

impl PhaseSpace {
    /// One-degree-of-freedom base space with coordinate `q`.
    pub fn base(kind: GenKind) -> Self {
        PhaseSpace {
            positions: ["q".into(), "u".into()],
            momenta: ["p_q".into(), "p_u".into()],
            ring: Ring::default().with_slot(BASE, kind),
            extension: false,
        }
    }

    /// Base space extended by the pair `(u, p_u)`.
    pub fn extended(base: GenKind, ext: GenKind) -> Self {
        PhaseSpace { ring: Ring::default().with_slot(BASE, base).with_slot(EXT, ext), extension: true, ..PhaseSpace::base(base) }
    }

    pub fn dim(&self) -> usize {
        if self.extension {
            2 * SLOTS
        } else {
            2
        }
    }

    pub fn active_slots(&self) -> usize {
        if self.extension {
            SLOTS
        } else {
            1
        }
    }

    pub fn position_names(&self) -> [&str; SLOTS] {
        [self.positions[0].as_str(), self.positions[1].as_str()]
    }
}

/// Numeric phase point; unused slots are ignored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: [f64; SLOTS],
    pub p: [f64; SLOTS],
}

impl PhasePoint {
    pub fn new(q: [f64; SLOTS], p: [f64; SLOTS]) -> Self {
        PhasePoint { q, p }
    }

    /// Coordinates ordered `(q, u, p_q, p_u)`.
    pub fn to_vec(&self) -> [f64; 2 * SLOTS] {
        [self.q[0], self.q[1], self.p[0], self.p[1]]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        PhasePoint { q: [x[0], x[1]], p: [x[2], x[3]] }
    }
}

/// Momentum exponent vector, ordered graded-lex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mom(pub [u16; SLOTS]);

impl Mom {
    pub const ONE: Mom = Mom([0; SLOTS]);

    pub fn unit(slot: usize) -> Mom {
        let mut m = Mom::ONE;
        m.0[slot] = 1;
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, o: &Mom) -> Mom {
        let mut m = *self;
        for i in 0..SLOTS {
            m.0[i] += o.0[i];
        }
        m
    }

    fn lower(&self, slot: usize) -> Mom {
        let mut m = *self;
        m.0[slot] -= 1;
        m
    }
}

impl Ord for Mom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in the momenta with exact position-dependent coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PPoly {
    terms: BTreeMap<Mom, Coeff>,
}

fn merge_rings(a: &Ring, b: &Ring) -> Result<Ring, PoissonError> {
    a.merge(b).map_err(|e| match e {
        crate::expr::ExprError::RingConflict { slot } => PoissonError::PhaseSpaceMismatch { slot },
        _ => unreachable!(),
    })
}

impl PPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::term(Mom::ONE, c)
    }

    pub fn term(m: Mom, c: Coeff) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// The momentum conjugate to `slot`.
    pub fn momentum(slot: usize) -> Self {
        Self::term(Mom::unit(slot), Coeff::one())
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Mom, Coeff)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, &c);
        }
        p
    }

    fn add_term(&mut self, m: Mom, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x = &*x + c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mom, &Coeff)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mom) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Total momentum degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Mom::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, slot: usize) -> u32 {
        self.terms.keys().map(|m| m.0[slot] as u32).max().unwrap_or(0)
    }

    pub fn ring(&self) -> Ring {
        self.terms.values().fold(Ring::default(), |r, c| r.merge_or_panic(c.ring()))
    }

    /// True when neither `slot`'s position nor its momentum appears.
    pub fn independent_of(&self, slot: usize) -> bool {
        self.terms.iter().all(|(m, c)| m.0[slot] == 0 && !c.uses_slot(slot))
    }

    /// Total number of numerator terms across all coefficients.
    pub fn term_count(&self) -> usize {
        self.terms.values().map(Coeff::term_count).sum()
    }

    pub fn add(&self, o: &PPoly) -> PPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, o: &PPoly) -> PPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> PPoly {
        PPoly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn scale(&self, k: &Scalar) -> PPoly {
        if k.is_zero() {
            return PPoly::zero();
        }
        PPoly { terms: self.terms.iter().map(|(m, c)| (*m, c.scale(k))).collect() }
    }

    pub fn mul_coeff(&self, k: &Coeff) -> PPoly {
        if k.is_zero() {
            return PPoly::zero();
        }
        PPoly::from_terms(self.terms.iter().map(|(m, c)| (*m, c * k)))
    }

    pub fn mul(&self, o: &PPoly) -> PPoly {
        let mut acc: BTreeMap<Mom, CoeffSum> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                acc.entry(ma.mul(mb)).or_default().add_product(ca, cb, &Scalar::one());
            }
        }
        finish(acc)
    }

    pub fn pow(&self, e: u32) -> PPoly {
        let mut out = PPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Multiply by the momentum of `slot`.
    pub fn mul_momentum(&self, slot: usize) -> PPoly {
        PPoly { terms: self.terms.iter().map(|(m, c)| (m.mul(&Mom::unit(slot)), c.clone())).collect() }
    }

    /// Partial derivative with respect to the position in `slot`.
    pub fn d_position(&self, slot: usize) -> PPoly {
        PPoly::from_terms(self.terms.iter().map(|(m, c)| (*m, c.derivative(slot))))
    }

    /// Partial derivative with respect to the momentum in `slot`.
    pub fn d_momentum(&self, slot: usize) -> PPoly {
        let mut out = PPoly::zero();
        for (m, c) in &self.terms {
            let e = m.0[slot];
            if e > 0 {
                out.add_term(m.lower(slot), &c.scale(&Scalar::from_integer(e.into())));
            }
        }
        out
    }

    /// Canonical bracket `{F, G} = sum_i dF/dq_i dG/dp_i - dF/dp_i dG/dq_i`.
    pub fn bracket(&self, o: &PPoly) -> Result<PPoly, PoissonError> {
        merge_rings(&self.ring(), &o.ring())?;
        let mut acc: BTreeMap<Mom, CoeffSum> = BTreeMap::new();
        for slot in 0..SLOTS {
            let df: Vec<(Mom, &Coeff, Coeff)> = self.terms.iter().map(|(m, c)| (*m, c, c.derivative(slot))).collect();
            let dg: Vec<(Mom, &Coeff, Coeff)> = o.terms.iter().map(|(m, c)| (*m, c, c.derivative(slot))).collect();
            for (ma, ca, dca) in &df {
                for (mb, cb, dcb) in &dg {
                    let b = mb.0[slot];
                    if b > 0 && !dca.is_zero() {
                        let k = Scalar::from_integer(b.into());
                        acc.entry(ma.mul(mb).lower(slot)).or_default().add_product(dca, cb, &k);
                    }
                    let a = ma.0[slot];
                    if a > 0 && !dcb.is_zero() {
                        let k = -Scalar::from_integer(a.into());
                        acc.entry(ma.mul(mb).lower(slot)).or_default().add_product(ca, dcb, &k);
                    }
                }
            }
        }
        Ok(finish(acc))
    }

    /// Replace parameters by exact values in every coefficient.
    pub fn substitute(&self, values: &ParamValues) -> PPoly {
        PPoly::from_terms(self.terms.iter().map(|(m, c)| (*m, c.substitute(values).expect("substitution keeps denominators nonzero"))))
    }

    pub fn eval<A: Arith>(&self, ar: &mut A, positions: &[A::T; SLOTS], momenta: &[A::T; SLOTS], params: &ParamValues) -> Result<A::T, EvalError> {
        let ring = self.ring();
        let mut atoms = atom_values(ar, &ring, &positions.clone().map(Some), params);
        let guard = EvalGuard::default();
        let mut acc = ar.zero();
        for (m, c) in &self.terms {
            let mut t = c.eval(ar, &mut atoms, &guard)?;
            for slot in 0..SLOTS {
                for _ in 0..m.0[slot] {
                    t = ar.mul(&t, &momenta[slot]);
                }
            }
            acc = ar.add(&acc, &t);
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, x: &PhasePoint, params: &ParamValues) -> Result<f64, EvalError> {
        self.eval(&mut F64, &x.q, &x.p, params)
    }

    pub fn render(&self, space: &PhaseSpace) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let vars = space.position_names();
        let mut parts = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mut mom = Vec::new();
            for slot in 0..SLOTS {
                match m.0[slot] {
                    0 => {}
                    1 => mom.push(space.momenta[slot].clone()),
                    e => mom.push(format!("{}^{}", space.momenta[slot], e)),
                }
            }
            let coeff = c.render(&vars);
            let part = if mom.is_empty() {
                format!("({coeff})")
            } else if c.is_one() {
                mom.join("*")
            } else {
                format!("({coeff})*{}", mom.join("*"))
            };
            parts.push(part);
        }
        parts.join(" + ")
    }
}

fn finish(acc: BTreeMap<Mom, CoeffSum>) -> PPoly {
    let mut out = PPoly::zero();
    for (m, s) in acc {
        let c = s.finish();
        if !c.is_zero() {
            out.terms.insert(m, c);
        }
    }
    out
}

impl fmt::Display for PPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&PhaseSpace::base(GenKind::Linear)))
    }
}

impl From<Coeff> for PPoly {
    fn from(c: Coeff) -> Self {
        PPoly::constant(c)
    }
}

/// `X_L(F) = {F, L}`.
pub fn apply_xl(l: &PPoly, f: &PPoly) -> Result<PPoly, PoissonError> {
    f.bracket(l)
}

/// Operator `U = p_u + k * gamma * X_L` with `k = m / n^2`.
#[derive(Clone, Debug)]
pub struct UOperator {
    pub l: PPoly,
    /// `(m / n^2) * gamma(u)`.
    pub weight: Coeff,
}

impl UOperator {
    pub fn new(l: &PPoly, m: u32, n: u32, gamma: &Coeff) -> Result<Self, PoissonError> {
        if !l.independent_of(EXT) {
            return Err(PoissonError::DependsOnExtension);
        }
        let k = Scalar::new(m.into(), (n * n).into());
        Ok(UOperator { l: l.clone(), weight: gamma.scale(&k) })
    }

    pub fn apply(&self, f: &PPoly) -> PPoly {
        let xl = apply_xl(&self.l, f).expect("U operands share a ring");
        f.mul_momentum(EXT).add(&xl.mul_coeff(&self.weight))
    }

    pub fn apply_n(&self, f: &PPoly, times: u32) -> PPoly {
        (0..times).fold(f.clone(), |acc, _| self.apply(&acc))
    }
}

/// Operator `W = U^2 + 2 omega gamma^-2`.
#[derive(Clone, Debug)]
pub struct WOperator {
    pub u: UOperator,
    /// `2 omega / gamma^2`.
    pub shift: Coeff,
}

impl WOperator {
    pub fn new(u: UOperator, omega: &Coeff, gamma: &Coeff) -> Result<Self, PoissonError> {
        if gamma.is_zero() {
            return Err(PoissonError::GammaZero);
        }
        let inv = gamma.pow(-2).map_err(|_| PoissonError::GammaZero)?;
        Ok(WOperator { u, shift: (omega * &inv).scale(&Scalar::from_integer(2.into())) })
    }

    pub fn apply(&self, f: &PPoly) -> PPoly {
        self.u.apply_n(f, 2).add(&f.mul_coeff(&self.shift))
    }

    pub fn apply_n(&self, f: &PPoly, times: u32) -> PPoly {
        (0..times).fold(f.clone(), |acc, _| self.apply(&acc))
    }
}

#[cfg(test)]
mod tests;
