//! Canonical fractions of Laurent-trigonometric polynomials.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::arith::Arith;
use super::mono::{cos_atom, main_atom, Mono, NATOMS};
use super::param::{Param, ParamValues, NPARAMS};
use super::poly::{AtomNames, AtomValues, Poly};
use super::ring::{Freq, GenKind, Ring};
use super::{EvalError, EvalGuard, ExprError, Scalar, SLOTS};

/// Denominator: a monic power product of atoms times powers of monic, content-free polynomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Den {
    mono: Mono,
    factors: Vec<(Poly, u32)>,
}

impl Den {
    fn is_one(&self) -> bool {
        self.mono.is_one() && self.factors.is_empty()
    }

    fn insert_factor(factors: &mut Vec<(Poly, u32)>, f: &Poly, e: u32, combine: fn(u32, u32) -> u32) {
        match factors.binary_search_by(|(g, _)| g.cmp(f)) {
            Ok(i) => factors[i].1 = combine(factors[i].1, e),
            Err(i) => factors.insert(i, (f.clone(), e)),
        }
    }

    fn mul(&self, o: &Den) -> Den {
        let mut factors = self.factors.clone();
        for (f, e) in &o.factors {
            Den::insert_factor(&mut factors, f, *e, |a, b| a + b);
        }
        Den { mono: self.mono.mul(&o.mono), factors }
    }

    fn lcm(&self, o: &Den) -> Den {
        let mut factors = self.factors.clone();
        for (f, e) in &o.factors {
            Den::insert_factor(&mut factors, f, *e, u32::max);
        }
        Den { mono: self.mono.lcm(&o.mono), factors }
    }

    fn exponent_of(&self, f: &Poly) -> u32 {
        self.factors.binary_search_by(|(g, _)| g.cmp(f)).map(|i| self.factors[i].1).unwrap_or(0)
    }

    /// Expanded `l / self` where `self` divides `l`.
    fn cofactor(&self, l: &Den, ring: &Ring) -> Poly {
        let mono = l.mono.div(&self.mono);
        let mut p = Poly::term(mono, Scalar::one());
        let mut reduced = false;
        for (f, e) in &l.factors {
            let k = e - self.exponent_of(f);
            for _ in 0..k {
                p = p.mul(f, ring);
                reduced = true;
            }
        }
        if !reduced {
            // mono may carry cosine powers that need rewriting
            let mut out = Poly::zero();
            for (m, q) in p.terms() {
                out.push(*m, q.clone(), ring);
            }
            return out;
        }
        p
    }

    fn expand(&self, ring: &Ring) -> Poly {
        Den::default().cofactor(self, ring)
    }
}

/// Exact coefficient function `num / den` of the position variables and parameters.
///
/// Numerators are kept in Pythagorean normal form (cosine degree at most one per
/// trig slot), so a coefficient is identically zero exactly when its numerator is
/// the zero polynomial.
#[derive(Clone, Debug)]
pub struct Coeff {
    ring: Ring,
    num: Poly,
    den: Den,
}

impl PartialEq for Coeff {
    fn eq(&self, o: &Coeff) -> bool {
        if self.den == o.den {
            return self.num == o.num;
        }
        self.sub_ref(o).is_zero()
    }
}

impl Eq for Coeff {}

impl Default for Coeff {
    fn default() -> Self {
        Coeff::zero()
    }
}

fn slot_kind_or_panic(ring: &Ring, slot: usize) -> GenKind {
    ring.0[slot].unwrap_or_else(|| panic!("slot {slot} has no generator kind"))
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff { ring: Ring::default(), num: Poly::zero(), den: Den::default() }
    }

    pub fn one() -> Self {
        Coeff::from_scalar(Scalar::one())
    }

    pub fn from_scalar(q: Scalar) -> Self {
        Coeff { ring: Ring::default(), num: Poly::constant(q), den: Den::default() }
    }

    pub fn from_int(i: i64) -> Self {
        Coeff::from_scalar(Scalar::from_integer(i.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Coeff::from_scalar(Scalar::new(n.into(), d.into()))
    }

    pub fn param(p: Param) -> Self {
        Coeff { ring: Ring::default(), num: Poly::term(Mono::atom(p.index(), 1), Scalar::one()), den: Den::default() }
    }

    /// The slot's main generator: `v` (linear), `sin(w v)` or `sinh(w v)`.
    pub fn generator(slot: usize, kind: GenKind) -> Self {
        let ring = Ring::default().with_slot(slot, kind);
        Coeff { ring, num: Poly::term(Mono::atom(main_atom(slot), 1), Scalar::one()), den: Den::default() }
    }

    /// The cosine partner `cos(w v)` / `cosh(w v)` of a trig slot.
    pub fn partner(slot: usize, kind: GenKind) -> Self {
        assert!(kind.is_trig(), "linear slots have no partner generator");
        let ring = Ring::default().with_slot(slot, kind);
        Coeff { ring, num: Poly::term(Mono::atom(cos_atom(slot), 1), Scalar::one()), den: Den::default() }
    }

    pub fn var(slot: usize) -> Self {
        Coeff::generator(slot, GenKind::Linear)
    }

    pub fn sin(slot: usize, w: Freq) -> Self {
        Coeff::generator(slot, GenKind::Circular(w))
    }

    pub fn cos(slot: usize, w: Freq) -> Self {
        Coeff::partner(slot, GenKind::Circular(w))
    }

    pub fn sinh(slot: usize, w: Freq) -> Self {
        Coeff::generator(slot, GenKind::Hyperbolic(w))
    }

    pub fn cosh(slot: usize, w: Freq) -> Self {
        Coeff::partner(slot, GenKind::Hyperbolic(w))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Same value, with extra slot kinds declared.
    pub fn in_ring(&self, ring: &Ring) -> Result<Coeff, ExprError> {
        let mut out = self.clone();
        out.ring = self.ring.merge(ring)?;
        Ok(out)
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator_is_one(&self) -> bool {
        self.den.is_one()
    }

    pub fn denominator_is_monomial(&self) -> bool {
        self.den.factors.is_empty()
    }

    /// Expanded denominator polynomial.
    pub fn denominator(&self) -> Poly {
        self.den.expand(&self.ring)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Denominator as a monomial times powers of irreducible-by-construction factors.
    pub fn denominator_parts(&self) -> (&Mono, &[(Poly, u32)]) {
        (&self.den.mono, &self.den.factors)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.single_term().is_some_and(|(m, q)| m.is_one() && q.is_one())
    }

    /// The exact rational value if the coefficient is a pure number.
    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.num.is_zero() {
            return Some(Scalar::zero());
        }
        if !self.den.is_one() {
            return None;
        }
        self.num.single_term().filter(|(m, _)| m.is_one()).map(|(_, q)| q.clone())
    }

    /// True when no position generator appears (a pure parameter expression).
    pub fn is_constant(&self) -> bool {
        !self.num.has_position_atoms()
            && !self.den.mono.has_position_atoms()
            && self.den.factors.iter().all(|(f, _)| !f.has_position_atoms())
    }

    pub fn uses_slot(&self, slot: usize) -> bool {
        self.num.uses_slot(slot)
            || self.den.mono.uses_slot(slot)
            || self.den.factors.iter().any(|(f, _)| f.uses_slot(slot))
    }

    pub fn uses_param(&self, p: Param) -> bool {
        let i = p.index();
        self.num.terms().any(|(m, _)| m.exp(i) > 0)
            || self.den.mono.exp(i) > 0
            || self.den.factors.iter().any(|(f, _)| f.terms().any(|(m, _)| m.exp(i) > 0))
    }

    pub fn term_count(&self) -> usize {
        self.num.len()
    }

    fn normalize(mut self) -> Coeff {
        if self.num.is_zero() {
            self.den = Den::default();
            return self;
        }
        if !self.den.factors.is_empty() {
            let mut factors = std::mem::take(&mut self.den.factors);
            for (f, e) in factors.iter_mut() {
                while *e > 0 {
                    match self.num.exact_div(f) {
                        Some(q) => {
                            self.num = q;
                            *e -= 1;
                        }
                        None => break,
                    }
                }
            }
            factors.retain(|(_, e)| *e > 0);
            self.den.factors = factors;
        }
        let g = self.num.content().gcd(&self.den.mono);
        if !g.is_one() {
            self.num = self.num.div_mono(&g);
            self.den.mono = self.den.mono.div(&g);
        }
        self
    }

    pub fn add_ref(&self, o: &Coeff) -> Coeff {
        let ring = self.ring.merge_or_panic(&o.ring);
        if o.is_zero() {
            return Coeff { ring, ..self.clone() };
        }
        if self.is_zero() {
            return Coeff { ring, ..o.clone() };
        }
        if self.den == o.den {
            return Coeff { ring, num: self.num.add(&o.num), den: self.den.clone() }.normalize();
        }
        let l = self.den.lcm(&o.den);
        let a = self.num.mul(&self.den.cofactor(&l, &ring), &ring);
        let b = o.num.mul(&o.den.cofactor(&l, &ring), &ring);
        Coeff { ring, num: a.add(&b), den: l }.normalize()
    }

    pub fn neg_ref(&self) -> Coeff {
        Coeff { ring: self.ring, num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub_ref(&self, o: &Coeff) -> Coeff {
        self.add_ref(&o.neg_ref())
    }

    pub fn mul_ref(&self, o: &Coeff) -> Coeff {
        let ring = self.ring.merge_or_panic(&o.ring);
        if self.is_zero() || o.is_zero() {
            return Coeff { ring, ..Coeff::zero() };
        }
        if let Some(k) = o.as_scalar() {
            return Coeff { ring, num: self.num.scale(&k), den: self.den.clone() };
        }
        if let Some(k) = self.as_scalar() {
            return Coeff { ring, num: o.num.scale(&k), den: o.den.clone() };
        }
        Coeff { ring, num: self.num.mul(&o.num, &ring), den: self.den.mul(&o.den) }.normalize()
    }

    pub fn scale(&self, k: &Scalar) -> Coeff {
        if k.is_zero() {
            return Coeff { ring: self.ring, ..Coeff::zero() };
        }
        Coeff { ring: self.ring, num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Coeff, ExprError> {
        if self.num.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let ring = self.ring;
        let mut num = self.den.expand(&ring);
        let content = self.num.content();
        let prim = self.num.div_mono(&content);
        let den = if let Some((m, k)) = prim.single_term() {
            debug_assert!(m.is_one());
            num = num.scale(&k.recip());
            Den { mono: content, factors: Vec::new() }
        } else {
            let lc = prim.leading().expect("nonzero").1.clone();
            let inv = lc.recip();
            num = num.scale(&inv);
            Den { mono: content, factors: vec![(prim.scale(&inv), 1)] }
        };
        Ok(Coeff { ring, num, den }.normalize())
    }

    pub fn checked_div(&self, o: &Coeff) -> Result<Coeff, ExprError> {
        Ok(self.mul_ref(&o.recip()?))
    }

    pub fn powu(&self, e: u32) -> Coeff {
        let mut out = Coeff { ring: self.ring, ..Coeff::one() };
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        out
    }

    pub fn pow(&self, e: i32) -> Result<Coeff, ExprError> {
        if e >= 0 {
            Ok(self.powu(e as u32))
        } else {
            Ok(self.recip()?.powu(e.unsigned_abs()))
        }
    }

    /// Exact partial derivative with respect to the position variable in `slot`.
    pub fn derivative(&self, slot: usize) -> Coeff {
        if !self.uses_slot(slot) {
            return Coeff { ring: self.ring, ..Coeff::zero() };
        }
        let ring = self.ring;
        let kind = slot_kind_or_panic(&ring, slot);
        let dn = self.num.derivative(slot, kind, &ring);
        let base = Coeff { ring, num: dn, den: self.den.clone() }.normalize();
        let logd = self.log_derivative_of_den(slot, kind);
        if logd.is_zero() {
            return base;
        }
        base.sub_ref(&self.mul_ref(&logd))
    }

    /// `D' / D` for the denominator `D`.
    fn log_derivative_of_den(&self, slot: usize, kind: GenKind) -> Coeff {
        let ring = self.ring;
        let mut acc = Coeff { ring, ..Coeff::zero() };
        let a = self.den.mono.exp(main_atom(slot));
        let b = self.den.mono.exp(cos_atom(slot));
        let gen = Coeff::generator(slot, kind);
        match kind {
            GenKind::Linear => {
                if a > 0 {
                    acc = acc.add_ref(&gen.recip().expect("generator").scale(&Scalar::from_integer(a.into())));
                }
            }
            GenKind::Circular(w) | GenKind::Hyperbolic(w) => {
                let w = Scalar::new((*w.numer()).into(), (*w.denom()).into());
                let partner = Coeff::partner(slot, kind);
                if a > 0 {
                    let t = partner.mul_ref(&gen.recip().expect("generator"));
                    acc = acc.add_ref(&t.scale(&(&w * Scalar::from_integer(a.into()))));
                }
                if b > 0 {
                    let t = gen.mul_ref(&partner.recip().expect("partner"));
                    let k = &w * Scalar::from_integer(b.into());
                    let k = if matches!(kind, GenKind::Circular(_)) { -k } else { k };
                    acc = acc.add_ref(&t.scale(&k));
                }
            }
        }
        for (f, e) in &self.den.factors {
            let fd = f.derivative(slot, kind, &ring);
            if fd.is_zero() {
                continue;
            }
            let t = Coeff { ring, num: fd, den: Den { mono: Mono::ONE, factors: vec![(f.clone(), 1)] } }.normalize();
            acc = acc.add_ref(&t.scale(&Scalar::from_integer((*e).into())));
        }
        acc.in_ring(&ring).expect("same ring")
    }

    /// Replace parameters by exact values.
    pub fn substitute(&self, values: &ParamValues) -> Result<Coeff, ExprError> {
        let num = Coeff { ring: self.ring, num: self.num.substitute(values), den: Den::default() };
        let den = Coeff { ring: self.ring, num: self.den.expand(&self.ring).substitute(values), den: Den::default() };
        num.checked_div(&den)
    }

    /// Numeric value at the given atom values.
    pub fn eval<A: Arith>(&self, ar: &mut A, atoms: &mut AtomValues<A::T>, guard: &EvalGuard) -> Result<A::T, EvalError> {
        let (n, _) = self.num.eval(ar, atoms)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let mut d = ar.one();
        for i in 0..NATOMS {
            let e = self.den.mono.exp(i);
            if e == 0 {
                continue;
            }
            let v = atoms.pow(ar, i, 1)?;
            if i >= NPARAMS && ar.to_f64(&v).abs() < guard.atom {
                return Err(EvalError::Singular);
            }
            let p = atoms.pow(ar, i, e)?;
            d = ar.mul(&d, &p);
        }
        for (f, e) in &self.den.factors {
            let (fv, scale) = f.eval(ar, atoms)?;
            let x = ar.to_f64(&fv).abs();
            if x == 0.0 || x <= guard.relative * scale {
                return Err(EvalError::Singular);
            }
            for _ in 0..*e {
                d = ar.mul(&d, &fv);
            }
        }
        if ar.to_f64(&d) == 0.0 {
            return Err(EvalError::Singular);
        }
        Ok(ar.div(&n, &d))
    }

    /// Evaluate in double precision with position values given per slot.
    pub fn eval_f64(&self, positions: &[f64; SLOTS], params: &ParamValues) -> Result<f64, EvalError> {
        let mut ar = super::arith::F64;
        let mut atoms = atom_values(&mut ar, &self.ring, &positions.map(Some), params);
        self.eval(&mut ar, &mut atoms, &EvalGuard::default())
    }

    pub fn render(&self, vars: &[&str; SLOTS]) -> String {
        let names = AtomNames::new(&self.ring, vars);
        let num = self.num.render(&names);
        if self.den.is_one() {
            return num;
        }
        let mut parts = Vec::new();
        let m = names.render_mono(&self.den.mono);
        if !m.is_empty() {
            parts.push(m);
        }
        for (f, e) in &self.den.factors {
            let body = format!("({})", f.render(&names));
            parts.push(if *e == 1 { body } else { format!("{body}^{e}") });
        }
        let den = parts.join("*");
        let num = if self.num.len() > 1 { format!("({num})") } else { num };
        let den = if parts.len() > 1 || den.contains('*') { format!("({den})") } else { den };
        format!("{num}/{den}")
    }
}

/// Accumulates many terms, summing numerators that share a denominator before
/// combining distinct denominators.
#[derive(Clone, Debug, Default)]
pub struct CoeffSum {
    ring: Ring,
    groups: BTreeMap<Den, Poly>,
}

impl CoeffSum {
    pub fn new() -> Self {
        Self::default()
    }

    fn merge_ring(&mut self, r: &Ring) {
        self.ring = self.ring.merge_or_panic(r);
    }

    fn push_group(&mut self, den: Den, num: Poly) {
        if num.is_zero() {
            return;
        }
        match self.groups.get_mut(&den) {
            Some(p) => *p = p.add(&num),
            None => {
                self.groups.insert(den, num);
            }
        }
    }

    pub fn add(&mut self, c: &Coeff) {
        self.merge_ring(&c.ring);
        self.push_group(c.den.clone(), c.num.clone());
    }

    pub fn add_scaled(&mut self, c: &Coeff, k: &Scalar) {
        self.merge_ring(&c.ring);
        self.push_group(c.den.clone(), c.num.scale(k));
    }

    /// Adds `k * a * b` without normalizing the product.
    pub fn add_product(&mut self, a: &Coeff, b: &Coeff, k: &Scalar) {
        if a.is_zero() || b.is_zero() || k.is_zero() {
            return;
        }
        self.merge_ring(&a.ring);
        self.merge_ring(&b.ring);
        let ring = self.ring;
        let num = a.num.mul(&b.num, &ring).scale(k);
        self.push_group(a.den.mul(&b.den), num);
    }

    pub fn finish(self) -> Coeff {
        let ring = self.ring;
        let mut acc = Coeff { ring, ..Coeff::zero() };
        for (den, num) in self.groups {
            let c = Coeff { ring, num, den }.normalize();
            acc = acc.add_ref(&c);
        }
        acc
    }
}

/// Numeric atom table for a ring at the given positions and parameter values.
pub fn atom_values<A: Arith>(ar: &mut A, ring: &Ring, positions: &[Option<A::T>; SLOTS], params: &ParamValues) -> AtomValues<A::T> {
    let mut values: Vec<Option<A::T>> = vec![None; NATOMS];
    for p in Param::ALL {
        if let Some(v) = params.get(p) {
            values[p.index()] = Some(ar.from_scalar(v));
        }
    }
    for slot in 0..SLOTS {
        let Some(x) = positions[slot].clone() else { continue };
        match ring.0[slot] {
            None | Some(GenKind::Linear) => values[main_atom(slot)] = Some(x),
            Some(kind) => {
                let w = kind.freq().unwrap();
                let arg = if w.is_one() {
                    x
                } else {
                    let ws = ar.from_scalar(&Scalar::new((*w.numer()).into(), (*w.denom()).into()));
                    ar.mul(&ws, &x)
                };
                let (s, c) = if matches!(kind, GenKind::Circular(_)) {
                    (ar.sin(&arg), ar.cos(&arg))
                } else {
                    (ar.sinh(&arg), ar.cosh(&arg))
                };
                values[main_atom(slot)] = Some(s);
                values[cos_atom(slot)] = Some(c);
            }
        }
    }
    AtomValues::from_values(values)
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&super::DEFAULT_VARS))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $imp:ident) => {
        impl $tr<&Coeff> for &Coeff {
            type Output = Coeff;
            fn $m(self, o: &Coeff) -> Coeff {
                self.$imp(o)
            }
        }
        impl $tr<Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, o: Coeff) -> Coeff {
                (&self).$imp(&o)
            }
        }
        impl $tr<&Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, o: &Coeff) -> Coeff {
                (&self).$imp(o)
            }
        }
        impl $tr<Coeff> for &Coeff {
            type Output = Coeff;
            fn $m(self, o: Coeff) -> Coeff {
                self.$imp(&o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        self.neg_ref()
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        self.neg_ref()
    }
}
