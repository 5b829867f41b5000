use std::cmp::Ordering;
use std::fmt;

use super::param::NPARAMS;
use super::SLOTS;

/// Atoms: every parameter, then two per position slot (main generator, cosine partner).
pub const NATOMS: usize = NPARAMS + 2 * SLOTS;

pub const fn main_atom(slot: usize) -> usize {
    NPARAMS + 2 * slot
}

pub const fn cos_atom(slot: usize) -> usize {
    NPARAMS + 2 * slot + 1
}

/// Power product over all atoms. Ordered graded-lex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Mono(pub(crate) [u16; NATOMS]);

impl Mono {
    pub const ONE: Mono = Mono([0; NATOMS]);

    pub fn atom(i: usize, e: u16) -> Mono {
        let mut m = Mono::ONE;
        m.0[i] = e;
        m
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, e: u16) {
        self.0[i] = e;
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(o.0.iter()) {
            *a = a.checked_add(*b).expect("monomial exponent overflow");
        }
        out
    }

    pub fn divides(&self, o: &Mono) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    /// `self / o`; caller guarantees `o` divides `self`.
    pub fn div(&self, o: &Mono) -> Mono {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(o.0.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn gcd(&self, o: &Mono) -> Mono {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(o.0.iter()) {
            *a = (*a).min(*b);
        }
        out
    }

    pub fn lcm(&self, o: &Mono) -> Mono {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(o.0.iter()) {
            *a = (*a).max(*b);
        }
        out
    }

    pub fn uses_slot(&self, slot: usize) -> bool {
        self.0[main_atom(slot)] > 0 || self.0[cos_atom(slot)] > 0
    }

    pub fn has_position_atoms(&self) -> bool {
        (0..SLOTS).any(|s| self.uses_slot(s))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mono{:?}", &self.0)
    }
}
