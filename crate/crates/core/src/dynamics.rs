//! Adaptive integration of Hamiltonian flows and drift monitoring of invariants.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, ParamValues, SLOTS};
use crate::poisson::{PPoly, PhasePoint};

/// Dimension of the phase space `(q, u, p_q, p_u)`.
pub const DIM: usize = 2 * SLOTS;
pub type State = [f64; DIM];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid trajectory config: {0}")]
    InvalidConfig(String),
    #[error("initial point is singular: {0}")]
    SingularStart(String),
}

/// Right-hand side of an autonomous ODE on the phase space.
pub trait VectorField {
    fn eval(&self, y: &State) -> Result<State, EvalError>;
}

/// `(dq/dt, dp/dt) = (dH/dp, -dH/dq)` from symbolic derivatives.
#[derive(Clone, Debug)]
pub struct HamiltonField {
    dq: [PPoly; SLOTS],
    dp: [PPoly; SLOTS],
    params: ParamValues,
}

pub fn hamiltons_equations(h: &PPoly, params: &ParamValues) -> HamiltonField {
    HamiltonField {
        dq: std::array::from_fn(|s| h.d_momentum(s)),
        dp: std::array::from_fn(|s| h.d_position(s).neg()),
        params: params.clone(),
    }
}

impl VectorField for HamiltonField {
    fn eval(&self, y: &State) -> Result<State, EvalError> {
        let x = PhasePoint::from_slice(y);
        let mut out = [0.0; DIM];
        for s in 0..SLOTS {
            out[s] = self.dq[s].eval_f64(&x, &self.params)?;
            out[SLOTS + s] = self.dp[s].eval_f64(&x, &self.params)?;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::Singular);
        }
        Ok(out)
    }
}

/// The same field with time reversed.
pub struct Reversed<'a, F: VectorField>(pub &'a F);

impl<F: VectorField> VectorField for Reversed<'_, F> {
    fn eval(&self, y: &State) -> Result<State, EvalError> {
        Ok(self.0.eval(y)?.map(|v| -v))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryConfig {
    pub initial: State,
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Output spacing in time; `None` records every accepted step.
    pub stride: Option<f64>,
    /// Maximum number of attempted steps.
    pub max_steps: usize,
}

impl TrajectoryConfig {
    pub fn new(initial: State, t_end: f64, tol: f64) -> Self {
        TrajectoryConfig { initial, t_end, rtol: tol, atol: tol, stride: None, max_steps: 5_000_000 }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(DynamicsError::InvalidConfig("T must be positive".into()));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(DynamicsError::InvalidConfig("tolerances must be positive".into()));
        }
        if let Some(s) = self.stride {
            if !(s > 0.0) {
                return Err(DynamicsError::InvalidConfig("stride must be positive".into()));
            }
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::InvalidConfig("initial point must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub steps: usize,
    pub rejected: usize,
    /// Set when integration stopped before `T`.
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn comb(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (a, k) in terms {
        for i in 0..DIM {
            out[i] += h * a * k[i];
        }
    }
    out
}

struct Step {
    y: State,
    k7: State,
    err: f64,
    cont: [State; 5],
}

fn dopri_step<F: VectorField>(f: &F, y: &State, k1: &State, h: f64, rtol: f64, atol: f64) -> Result<Step, EvalError> {
    let k2 = f.eval(&comb(y, h, &[(A21, k1)]))?;
    let k3 = f.eval(&comb(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f.eval(&comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f.eval(&comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f.eval(&comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let yn = comb(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f.eval(&yn)?;
    let mut err = 0.0;
    let mut cont = [[0.0; DIM]; 5];
    for i in 0..DIM {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sk = atol + rtol * y[i].abs().max(yn[i].abs());
        err += (e / sk).powi(2);
        let ydiff = yn[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        cont[0][i] = y[i];
        cont[1][i] = ydiff;
        cont[2][i] = bspl;
        cont[3][i] = ydiff - h * k7[i] - bspl;
        cont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Ok(Step { y: yn, k7, err: (err / DIM as f64).sqrt(), cont })
}

fn dense(cont: &[State; 5], s: f64) -> State {
    let s1 = 1.0 - s;
    std::array::from_fn(|i| cont[0][i] + s * (cont[1][i] + s1 * (cont[2][i] + s * (cont[3][i] + s1 * cont[4][i]))))
}

fn initial_step<F: VectorField>(f: &F, y: &State, k1: &State, rtol: f64, atol: f64, t_end: f64) -> f64 {
    let norm = |v: &State| (v.iter().zip(y).map(|(a, b)| (a / (atol + rtol * b.abs())).powi(2)).sum::<f64>() / DIM as f64).sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(t_end);
    let d2 = match f.eval(&comb(y, h0, &[(1.0, k1)])) {
        Ok(k) => {
            let diff: State = std::array::from_fn(|i| k[i] - k1[i]);
            norm(&diff) / h0
        }
        Err(_) => return h0 * 0.01,
    };
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / m).powf(0.2) };
    (100.0 * h0).min(h1).min(t_end)
}

/// DOPRI5 with local error control and dense output at `stride` points.
pub fn integrate_adaptive<F: VectorField>(cfg: &TrajectoryConfig, f: &F) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    let mut y = cfg.initial;
    let mut k1 = f.eval(&y).map_err(|e| DynamicsError::SingularStart(e.to_string()))?;
    let mut tr = Trajectory { times: vec![0.0], states: vec![y], ..Default::default() };
    let mut t = 0.0;
    let mut h = initial_step(f, &y, &k1, cfg.rtol, cfg.atol, cfg.t_end);
    let mut next_out = cfg.stride.unwrap_or(f64::INFINITY);
    let mut out_index = 1u64;
    let mut last_rejected = false;
    while t < cfg.t_end {
        if tr.steps + tr.rejected >= cfg.max_steps {
            tr.aborted = Some(format!("step limit {} reached at t = {t}", cfg.max_steps));
            break;
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            tr.aborted = Some(format!("step size underflow at t = {t} (h = {h:e}): near a singularity"));
            break;
        }
        let last = t + h >= cfg.t_end;
        if last {
            h = cfg.t_end - t;
        }
        let step = match dopri_step(f, &y, &k1, h, cfg.rtol, cfg.atol) {
            Ok(s) if s.err.is_finite() => s,
            _ => {
                tr.rejected += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };
        if step.err <= 1.0 {
            let t_new = if last { cfg.t_end } else { t + h };
            if let Some(stride) = cfg.stride {
                while next_out < t_new {
                    let s = (next_out - t) / h;
                    tr.times.push(next_out);
                    tr.states.push(dense(&step.cont, s));
                    out_index += 1;
                    next_out = stride * out_index as f64;
                }
            }
            t = t_new;
            y = step.y;
            k1 = step.k7;
            tr.steps += 1;
            if cfg.stride.is_none() || t >= cfg.t_end {
                tr.times.push(t);
                tr.states.push(y);
            }
            let mut fac = 0.9 * step.err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            tr.rejected += 1;
            h *= (0.9 * step.err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    if tr.aborted.is_some() && tr.times.last().is_some_and(|&last| last < t) {
        tr.times.push(t);
        tr.states.push(y);
    }
    Ok(tr)
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    /// `max |I(t) - I(0)|`, divided by `|I(0)|` when `relative`.
    pub max_drift: f64,
    pub relative: bool,
    /// Samples where the invariant could not be evaluated.
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub invariants: Vec<DriftEntry>,
    pub steps: usize,
    pub rejected: usize,
    pub samples: usize,
}

impl DriftReport {
    pub fn get(&self, name: &str) -> Option<&DriftEntry> {
        self.invariants.iter().find(|e| e.name == name)
    }
}

/// Values of each invariant at every recorded state (`NaN` where evaluation fails).
pub fn invariant_values(tr: &Trajectory, invariants: &[(String, PPoly)], params: &ParamValues) -> Vec<Vec<f64>> {
    invariants
        .iter()
        .map(|(_, f)| tr.states.iter().map(|y| f.eval_f64(&PhasePoint::from_slice(y), params).unwrap_or(f64::NAN)).collect())
        .collect()
}

pub fn monitor_invariants(tr: &Trajectory, invariants: &[(String, PPoly)], params: &ParamValues) -> DriftReport {
    let values = invariant_values(tr, invariants, params);
    let entries = invariants
        .iter()
        .zip(values)
        .map(|((name, _), vals)| {
            let initial = vals.first().copied().unwrap_or(f64::NAN);
            let relative = initial.abs() > f64::EPSILON;
            let scale = if relative { initial.abs() } else { 1.0 };
            let failed = vals.iter().filter(|v| !v.is_finite()).count();
            let max_drift = vals.iter().filter(|v| v.is_finite()).map(|v| (v - initial).abs() / scale).fold(0.0, f64::max);
            DriftEntry { name: name.clone(), initial, max_drift, relative, failed }
        })
        .collect();
    DriftReport { invariants: entries, steps: tr.steps, rejected: tr.rejected, samples: tr.states.len() }
}

/// Delimited text: `t`, the four coordinates, then one column per invariant, 17 significant digits.
pub fn write_csv<W: Write>(w: &mut W, coords: &[String; DIM], tr: &Trajectory, invariants: &[(String, PPoly)], params: &ParamValues) -> io::Result<()> {
    let values = invariant_values(tr, invariants, params);
    let mut header = vec!["t".to_string()];
    header.extend(coords.iter().cloned());
    header.extend(invariants.iter().map(|(n, _)| n.clone()));
    writeln!(w, "{}", header.join(","))?;
    for (i, (t, y)) in tr.times.iter().zip(&tr.states).enumerate() {
        let mut row = vec![format!("{t:.16e}")];
        row.extend(y.iter().map(|v| format!("{v:.16e}")));
        row.extend(values.iter().map(|col| format!("{:.16e}", col[i])));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
