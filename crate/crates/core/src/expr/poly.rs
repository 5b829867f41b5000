//! Sparse polynomials over the atoms with exact rational coefficients.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::arith::Arith;
use super::mono::{cos_atom, main_atom, Mono, NATOMS};
use super::param::{Param, NPARAMS};
use super::ring::{GenKind, Ring};
use super::{EvalError, Scalar, SLOTS};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Mono, Scalar>,
}

fn freq_scalar(kind: GenKind) -> Scalar {
    let w = kind.freq().expect("trig kind");
    Scalar::new((*w.numer()).into(), (*w.denom()).into())
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: Scalar) -> Self {
        Self::term(Mono::ONE, q)
    }

    pub fn term(m: Mono, q: Scalar) -> Self {
        let mut p = Self::zero();
        p.add_raw(m, q);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Scalar)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Mono, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn single_term(&self) -> Option<(&Mono, &Scalar)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Add a term without applying the Pythagorean rewrite.
    pub(crate) fn add_raw(&mut self, m: Mono, q: Scalar) {
        if q.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(q);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += q;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Add a term, rewriting every trig cosine power above one.
    pub(crate) fn push(&mut self, m: Mono, q: Scalar, ring: &Ring) {
        for slot in 0..SLOTS {
            let Some(kind) = ring.0[slot] else { continue };
            if !kind.is_trig() {
                continue;
            }
            let ce = m.exp(cos_atom(slot));
            if ce >= 2 {
                let mut lower = m;
                lower.set(cos_atom(slot), ce - 2);
                let mut shifted = lower;
                shifted.set(main_atom(slot), lower.exp(main_atom(slot)) + 2);
                let k = kind.square_rule();
                let q2 = if k < 0 { -q.clone() } else { q.clone() };
                self.push(lower, q, ring);
                self.push(shifted, q2, ring);
                return;
            }
        }
        self.add_raw(m, q);
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= o.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (m, q) in small.terms.iter() {
            big.add_raw(*m, q.clone());
        }
        big
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, q) in o.terms.iter() {
            out.add_raw(*m, -q.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, q)| (*m, -q.clone())).collect() }
    }

    pub fn scale(&self, k: &Scalar) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, q)| (*m, q * k)).collect() }
    }

    pub fn mul(&self, o: &Poly, ring: &Ring) -> Poly {
        let mut out = Poly::zero();
        for (ma, qa) in self.terms.iter() {
            for (mb, qb) in o.terms.iter() {
                out.push(ma.mul(mb), qa * qb, ring);
            }
        }
        out
    }

    pub fn mul_mono(&self, m: &Mono, ring: &Ring) -> Poly {
        if m.is_one() {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (mm, q) in self.terms.iter() {
            out.push(mm.mul(m), q.clone(), ring);
        }
        out
    }

    pub fn pow(&self, e: u32, ring: &Ring) -> Poly {
        let mut out = Poly::constant(Scalar::one());
        for _ in 0..e {
            out = out.mul(self, ring);
        }
        out
    }

    /// Componentwise minimum exponent over all terms.
    pub fn content(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return Mono::ONE };
        it.fold(*first, |acc, m| acc.gcd(m))
    }

    pub fn div_mono(&self, m: &Mono) -> Poly {
        if m.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(mm, q)| (mm.div(m), q.clone())).collect() }
    }

    /// Exact quotient in the plain polynomial ring, if one exists.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (lm_d, lc_d) = d.leading()?;
        let (lm_d, lc_d) = (*lm_d, lc_d.clone());
        let mut r = self.clone();
        let mut q = Poly::zero();
        let mut guard = 0usize;
        while let Some((lm_r, lc_r)) = r.leading() {
            if !lm_d.divides(lm_r) {
                return None;
            }
            let tm = lm_r.div(&lm_d);
            let tc = lc_r / &lc_d;
            q.add_raw(tm, tc.clone());
            for (m, c) in d.terms.iter() {
                r.add_raw(m.mul(&tm), -(c * &tc));
            }
            guard += 1;
            if guard > 100_000 {
                return None;
            }
        }
        Some(q)
    }

    pub fn uses_slot(&self, slot: usize) -> bool {
        self.terms.keys().any(|m| m.uses_slot(slot))
    }

    pub fn has_position_atoms(&self) -> bool {
        self.terms.keys().any(|m| m.has_position_atoms())
    }

    pub fn derivative(&self, slot: usize, kind: GenKind, ring: &Ring) -> Poly {
        let mut out = Poly::zero();
        let (ia, ic) = (main_atom(slot), cos_atom(slot));
        for (m, q) in self.terms.iter() {
            let a = m.exp(ia);
            let b = m.exp(ic);
            match kind {
                GenKind::Linear => {
                    if a > 0 {
                        let mut mm = *m;
                        mm.set(ia, a - 1);
                        out.push(mm, q * Scalar::from_integer(a.into()), ring);
                    }
                }
                GenKind::Circular(_) | GenKind::Hyperbolic(_) => {
                    let w = freq_scalar(kind);
                    if a > 0 {
                        let mut mm = *m;
                        mm.set(ia, a - 1);
                        mm.set(ic, b + 1);
                        out.push(mm, q * &w * Scalar::from_integer(a.into()), ring);
                    }
                    if b > 0 {
                        let mut mm = *m;
                        mm.set(ia, a + 1);
                        mm.set(ic, b - 1);
                        let v = q * &w * Scalar::from_integer(b.into());
                        let v = if matches!(kind, GenKind::Circular(_)) { -v } else { v };
                        out.push(mm, v, ring);
                    }
                }
            }
        }
        out
    }

    /// Substitute exact values for some parameters.
    pub fn substitute(&self, values: &super::ParamValues) -> Poly {
        let mut out = Poly::zero();
        for (m, q) in self.terms.iter() {
            let mut mm = *m;
            let mut k = q.clone();
            for p in Param::ALL {
                let e = m.exp(p.index());
                if e > 0 {
                    if let Some(v) = values.get(p) {
                        k *= num_traits::pow(v.clone(), e as usize);
                        mm.set(p.index(), 0);
                    }
                }
            }
            out.add_raw(mm, k);
        }
        out
    }

    pub fn eval<A: Arith>(&self, ar: &mut A, atoms: &mut AtomValues<A::T>) -> Result<(A::T, f64), EvalError> {
        let mut acc = ar.zero();
        let mut scale = 0.0f64;
        for (m, q) in self.terms.iter() {
            let mut t = ar.from_scalar(q);
            for i in 0..NATOMS {
                let e = m.exp(i);
                if e > 0 {
                    let v = atoms.pow(ar, i, e)?;
                    t = ar.mul(&t, &v);
                }
            }
            scale += ar.to_f64(&t).abs();
            acc = ar.add(&acc, &t);
        }
        Ok((acc, scale))
    }

    pub fn render(&self, names: &AtomNames) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, q)) in self.terms.iter().rev().enumerate() {
            let neg = q.is_negative();
            let abs = q.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let body = names.render_mono(m);
            match (abs.is_one(), body.is_empty()) {
                (true, true) => out.push('1'),
                (true, false) => out.push_str(&body),
                (false, true) => out.push_str(&abs.to_string()),
                (false, false) => {
                    out.push_str(&abs.to_string());
                    out.push('*');
                    out.push_str(&body);
                }
            }
        }
        out
    }
}

/// Printable names of every atom, derived from slot variable names and kinds.
#[derive(Clone, Debug)]
pub struct AtomNames {
    names: Vec<String>,
}

impl AtomNames {
    pub fn new(ring: &Ring, vars: &[&str; SLOTS]) -> Self {
        let mut names: Vec<String> = Param::ALL.iter().map(|p| p.name().to_string()).collect();
        for slot in 0..SLOTS {
            match ring.0[slot] {
                None | Some(GenKind::Linear) => {
                    names.push(vars[slot].to_string());
                    names.push(format!("cos({})", vars[slot]));
                }
                Some(kind) => {
                    let (s, c) = kind.atom_names(vars[slot]);
                    names.push(s);
                    names.push(c);
                }
            }
        }
        debug_assert_eq!(names.len(), NATOMS);
        AtomNames { names }
    }

    pub fn render_mono(&self, m: &Mono) -> String {
        // positions first, then parameters
        let order = (NPARAMS..NATOMS).chain(0..NPARAMS);
        let mut parts = Vec::new();
        for i in order {
            let e = m.exp(i);
            if e == 1 {
                parts.push(self.names[i].clone());
            } else if e > 1 {
                parts.push(format!("{}^{}", self.names[i], e));
            }
        }
        parts.join("*")
    }
}

/// Numeric values of atoms with a memoized power table.
pub struct AtomValues<T> {
    values: Vec<Option<T>>,
    powers: Vec<Vec<T>>,
}

impl<T: Clone> AtomValues<T> {
    pub fn from_values(values: Vec<Option<T>>) -> Self {
        assert_eq!(values.len(), NATOMS);
        AtomValues { values, powers: vec![Vec::new(); NATOMS] }
    }

    pub fn value(&self, i: usize) -> Option<&T> {
        self.values[i].as_ref()
    }

    pub fn pow<A: Arith<T = T>>(&mut self, ar: &mut A, i: usize, e: u16) -> Result<T, EvalError> {
        let Some(base) = self.values[i].clone() else {
            return Err(if i < NPARAMS {
                EvalError::MissingParam(Param::ALL[i])
            } else {
                EvalError::MissingCoordinate((i - NPARAMS) / 2)
            });
        };
        let table = &mut self.powers[i];
        if table.is_empty() {
            table.push(base.clone());
        }
        while table.len() < e as usize {
            let next = ar.mul(table.last().unwrap(), &base);
            table.push(next);
        }
        Ok(table[e as usize - 1].clone())
    }
}
