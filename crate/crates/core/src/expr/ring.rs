use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed};

use super::{ExprError, SLOTS};

/// Frequency multiplying a trigonometric generator's argument.
pub type Freq = Ratio<i64>;

/// How a position variable enters the coefficient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenKind {
    /// The variable itself, with Laurent powers.
    Linear,
    /// `s = sin(w v)`, `c = cos(w v)` with `s^2 + c^2 = 1`.
    Circular(Freq),
    /// `s = sinh(w v)`, `c = cosh(w v)` with `c^2 - s^2 = 1`.
    Hyperbolic(Freq),
}

impl GenKind {
    pub fn circular() -> Self {
        GenKind::Circular(Freq::one())
    }

    pub fn is_trig(&self) -> bool {
        !matches!(self, GenKind::Linear)
    }

    pub fn freq(&self) -> Option<Freq> {
        match self {
            GenKind::Linear => None,
            GenKind::Circular(w) | GenKind::Hyperbolic(w) => Some(*w),
        }
    }

    /// Sign `k` in the rewrite `c^2 = 1 + k s^2`.
    pub(crate) fn square_rule(&self) -> i32 {
        match self {
            GenKind::Linear => 0,
            GenKind::Circular(_) => -1,
            GenKind::Hyperbolic(_) => 1,
        }
    }

    pub(crate) fn atom_names(&self, var: &str) -> (String, String) {
        let arg = match self.freq() {
            None => return (var.to_string(), String::new()),
            Some(w) if w.is_one() => var.to_string(),
            Some(w) if w.is_integer() => format!("{}*{}", w.numer(), var),
            Some(w) => format!("({})*{}", w, var),
        };
        let arg = if let Some(w) = self.freq() {
            if w.is_negative() && !w.is_integer() { format!("({arg})") } else { arg }
        } else {
            arg
        };
        match self {
            GenKind::Linear => unreachable!(),
            GenKind::Circular(_) => (format!("sin({arg})"), format!("cos({arg})")),
            GenKind::Hyperbolic(_) => (format!("sinh({arg})"), format!("cosh({arg})")),
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenKind::Linear => write!(f, "linear"),
            GenKind::Circular(w) => write!(f, "circular({w})"),
            GenKind::Hyperbolic(w) => write!(f, "hyperbolic({w})"),
        }
    }
}

/// Generator kind of every position slot; `None` for slots a value never touches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ring(pub [Option<GenKind>; SLOTS]);

impl Ring {
    pub fn with_slot(mut self, slot: usize, kind: GenKind) -> Self {
        self.0[slot] = Some(kind);
        self
    }

    pub fn kind(&self, slot: usize) -> Option<GenKind> {
        self.0[slot]
    }

    pub fn merge(&self, other: &Ring) -> Result<Ring, ExprError> {
        let mut out = *self;
        for slot in 0..SLOTS {
            match (self.0[slot], other.0[slot]) {
                (Some(a), Some(b)) if a != b => return Err(ExprError::RingConflict { slot }),
                (None, b) => out.0[slot] = b,
                _ => {}
            }
        }
        Ok(out)
    }

    pub(crate) fn merge_or_panic(&self, other: &Ring) -> Ring {
        if self == other {
            return *self;
        }
        self.merge(other).unwrap_or_else(|e| panic!("{e}"))
    }
}
