//! Inline expression syntax for coefficient functions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom (('^' | '**') int)?
//! atom   := number | param | var | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | sinh | cosh
//! ```
//!
//! Function arguments must be a rational multiple of one position variable.

use num_traits::{Signed, ToPrimitive, Zero};

use super::param::Param;
use super::ring::GenKind;
use super::{parse_scalar, scalar_to_freq, Coeff, ExprError, Freq, Scalar, DEFAULT_VARS, SLOTS};

/// Parse with the default variable names `q` and `u`.
pub fn parse_coeff(src: &str) -> Result<Coeff, ExprError> {
    parse_coeff_with(src, &DEFAULT_VARS)
}

pub fn parse_coeff_with(src: &str, vars: &[&str; SLOTS]) -> Result<Coeff, ExprError> {
    let mut p = Parser { src, pos: 0, vars };
    let c = p.expr()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(c)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a [&'a str; SLOTS],
}

fn checked(pos: usize, r: Result<Coeff, ExprError>) -> Result<Coeff, ExprError> {
    r.map_err(|e| match e {
        ExprError::Parse { .. } => e,
        other => ExprError::Parse { pos, msg: other.to_string() },
    })
}

impl<'a> Parser<'a> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let t = self.rest();
        self.pos += t.len() - t.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn combine(&self, a: &Coeff, b: &Coeff, op: char) -> Result<Coeff, ExprError> {
        a.ring().merge(b.ring()).map_err(|e| self.error(&e.to_string()))?;
        match op {
            '+' => Ok(a + b),
            '-' => Ok(a - b),
            '*' => Ok(a * b),
            _ => checked(self.pos, a.checked_div(b)),
        }
    }

    fn expr(&mut self) -> Result<Coeff, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                let t = self.term()?;
                acc = self.combine(&acc, &t, '+')?;
            } else if self.eat("-") {
                let t = self.term()?;
                acc = self.combine(&acc, &t, '-')?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Coeff, ExprError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            if self.rest().starts_with("**") {
                return Ok(acc);
            }
            if self.eat("*") {
                let t = self.unary()?;
                acc = self.combine(&acc, &t, '*')?;
            } else if self.eat("/") {
                let t = self.unary()?;
                acc = self.combine(&acc, &t, '/')?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Coeff, ExprError> {
        if self.eat("-") {
            return Ok(-self.unary()?);
        }
        if self.eat("+") {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Coeff, ExprError> {
        let base = self.atom()?;
        if self.eat("**") || self.eat("^") {
            let e = self.exponent()?;
            return checked(self.pos, base.pow(e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ExprError> {
        let paren = self.eat("(");
        let neg = self.eat("-");
        self.skip_ws();
        let len = self.rest().chars().take_while(|c| c.is_ascii_digit()).count();
        if len == 0 {
            return Err(self.error("expected integer exponent"));
        }
        let v: i32 = self.rest()[..len].parse().map_err(|_| self.error("exponent too large"))?;
        self.pos += len;
        if paren && !self.eat(")") {
            return Err(self.error("expected `)`"));
        }
        Ok(if neg { -v } else { v })
    }

    fn number(&mut self) -> Result<Scalar, ExprError> {
        let t = self.rest();
        let mut len = 0;
        let bytes = t.as_bytes();
        while len < bytes.len() && (bytes[len].is_ascii_digit() || bytes[len] == b'.') {
            len += 1;
        }
        if len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
            let mut k = len + 1;
            if k < bytes.len() && (bytes[k] == b'-' || bytes[k] == b'+') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                len = k;
            }
        }
        let q = parse_scalar(&t[..len]).map_err(|_| self.error("bad number"))?;
        self.pos += len;
        Ok(q)
    }

    fn ident(&mut self) -> &'a str {
        let t = self.rest();
        let len = t.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').count();
        self.pos += len;
        &t[..len]
    }

    fn atom(&mut self) -> Result<Coeff, ExprError> {
        self.skip_ws();
        let Some(ch) = self.rest().chars().next() else {
            return Err(self.error("unexpected end of input"));
        };
        if ch == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("expected `)`"));
            }
            return Ok(e);
        }
        if ch.is_ascii_digit() || ch == '.' {
            return Ok(Coeff::from_scalar(self.number()?));
        }
        if !(ch.is_ascii_alphabetic() || ch == '_') {
            return Err(self.error(&format!("unexpected character `{ch}`")));
        }
        let start = self.pos;
        let name = self.ident();
        if let Some(slot) = self.vars.iter().position(|v| *v == name) {
            return Ok(Coeff::var(slot));
        }
        if matches!(name, "sin" | "cos" | "sinh" | "cosh") {
            if !self.eat("(") {
                return Err(self.error("expected `(` after function name"));
            }
            let arg_pos = self.pos;
            let arg = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("expected `)`"));
            }
            return self.trig(name, &arg, arg_pos);
        }
        if let Some(p) = Param::from_name(name) {
            return Ok(Coeff::param(p));
        }
        self.pos = start;
        Err(self.error(&format!("unknown identifier `{name}`")))
    }

    fn trig(&self, name: &str, arg: &Coeff, arg_pos: usize) -> Result<Coeff, ExprError> {
        let bad = || ExprError::Parse { pos: arg_pos, msg: "function argument must be a rational multiple of a position variable".into() };
        if let Some(k) = arg.as_scalar() {
            if k.is_zero() {
                return Ok(match name {
                    "sin" | "sinh" => Coeff::zero(),
                    _ => Coeff::one(),
                });
            }
            return Err(bad());
        }
        let (slot, w) = linear_multiple(arg).ok_or_else(bad)?;
        let wf: Freq = scalar_to_freq(&w.abs()).ok_or_else(bad)?;
        let neg = w.is_negative();
        let c = match name {
            "sin" => Coeff::sin(slot, wf),
            "cos" => Coeff::cos(slot, wf),
            "sinh" => Coeff::sinh(slot, wf),
            _ => Coeff::cosh(slot, wf),
        };
        Ok(if neg && matches!(name, "sin" | "sinh") { -c } else { c })
    }
}

/// `(slot, k)` when `c == k * v_slot` with `v_slot` a linear generator.
fn linear_multiple(c: &Coeff) -> Option<(usize, Scalar)> {
    if !c.denominator_is_one() {
        return None;
    }
    let (m, k) = c.numerator().single_term()?;
    let slot = (0..SLOTS).find(|&s| m.uses_slot(s))?;
    if c.ring().kind(slot) != Some(GenKind::Linear) || m.degree() != 1 || m.exp(super::mono::main_atom(slot)) != 1 {
        return None;
    }
    k.to_f64()?;
    Some((slot, k.clone()))
}
