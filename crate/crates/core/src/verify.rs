//! Exact and sampled checks of commutation, independence, reference formulas and derivatives.

use std::collections::BTreeMap;

use astro_float::BigFloat;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{golden_k21, ModelSpec};
use crate::expr::arith::{Arith, HighPrecision};
use crate::expr::{Coeff, ParamValues, Scalar, SLOTS};
use crate::extension::{build_modified_k, check_lemma_conditions, recursion_gn, ExtError, LemmaInputs};
use crate::poisson::{apply_xl, PPoly, PhasePoint, PoissonError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("no sample point was accepted ({rejected} rejected)")]
    SamplingFailed { rejected: usize },
    #[error("reference function vanishes identically")]
    GoldenZero,
    #[error("need at least {0} functions")]
    TooFewFunctions(usize),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Ext(#[from] ExtError),
}

/// Box from which phase points are drawn.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleRegion {
    pub positions: (f64, f64),
    pub momenta: (f64, f64),
}

impl Default for SampleRegion {
    fn default() -> Self {
        SampleRegion { positions: (0.3, 1.2), momenta: (-1.0, 1.0) }
    }
}

/// Deterministic uniform points in the region.
pub fn sample_points(seed: u64, count: usize, region: &SampleRegion) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut q = [0.0; SLOTS];
            let mut p = [0.0; SLOTS];
            for x in q.iter_mut() {
                *x = rng.gen_range(region.positions.0..region.positions.1);
            }
            for x in p.iter_mut() {
                *x = rng.gen_range(region.momenta.0..region.momenta.1);
            }
            PhasePoint::new(q, p)
        })
        .collect()
}

/// Exact outcome of `{H, K}`.
#[derive(Clone, Debug)]
pub struct CommuteVerdict {
    pub is_zero: bool,
    pub residual: PPoly,
}

pub fn symbolic_commute_check(h: &PPoly, k: &PPoly) -> Result<CommuteVerdict, VerifyError> {
    let residual = h.bracket(k)?;
    Ok(CommuteVerdict { is_zero: residual.is_zero(), residual })
}

/// Partial derivatives in the order `(q, u, p_q, p_u)`.
fn gradient(f: &PPoly) -> Vec<PPoly> {
    let mut g: Vec<PPoly> = (0..SLOTS).map(|s| f.d_position(s)).collect();
    g.extend((0..SLOTS).map(|s| f.d_momentum(s)));
    g
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleStats {
    pub max_residual: f64,
    pub accepted: usize,
    pub rejected: usize,
}

fn eval_grad_hp(ar: &mut HighPrecision, grad: &[PPoly], x: &PhasePoint, params: &ParamValues) -> Option<Vec<BigFloat>> {
    let q = x.q.map(|v| ar.from_f64(v));
    let p = x.p.map(|v| ar.from_f64(v));
    grad.iter().map(|g| g.eval(ar, &q, &p, params).ok()).collect()
}

/// Max over accepted samples of `|{H, K}| / (1 + |grad H| |grad K|)`, evaluated with `digits` decimal digits.
pub fn numeric_commute_check(h: &PPoly, k: &PPoly, params: &ParamValues, points: &[PhasePoint], digits: u32) -> Result<SampleStats, VerifyError> {
    let gh = gradient(h);
    let gk = gradient(k);
    let mut ar = HighPrecision::with_digits(digits);
    let (mut max, mut accepted, mut rejected) = (0.0f64, 0, 0);
    for x in points {
        let (Some(a), Some(b)) = (eval_grad_hp(&mut ar, &gh, x, params), eval_grad_hp(&mut ar, &gk, x, params)) else {
            rejected += 1;
            continue;
        };
        let mut br = ar.zero();
        let (mut na, mut nb) = (ar.zero(), ar.zero());
        for s in 0..SLOTS {
            let t1 = ar.mul(&a[s], &b[SLOTS + s]);
            let t2 = ar.mul(&a[SLOTS + s], &b[s]);
            let d = ar.sub(&t1, &t2);
            br = ar.add(&br, &d);
        }
        for i in 0..2 * SLOTS {
            let sa = ar.mul(&a[i], &a[i]);
            na = ar.add(&na, &sa);
            let sb = ar.mul(&b[i], &b[i]);
            nb = ar.add(&nb, &sb);
        }
        let norm = 1.0 + (ar.to_f64(&na) * ar.to_f64(&nb)).sqrt();
        let r = ar.to_f64(&br).abs() / norm;
        if !r.is_finite() {
            rejected += 1;
            continue;
        }
        max = max.max(r);
        accepted += 1;
    }
    if accepted == 0 {
        return Err(VerifyError::SamplingFailed { rejected });
    }
    Ok(SampleStats { max_residual: max, accepted, rejected })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankStats {
    /// Number of samples at each numeric rank.
    pub histogram: BTreeMap<usize, usize>,
    pub accepted: usize,
    pub rejected: usize,
    pub functions: usize,
}

impl RankStats {
    pub fn count_at(&self, rank: usize) -> usize {
        self.histogram.get(&rank).copied().unwrap_or(0)
    }

    pub fn fraction_at(&self, rank: usize) -> f64 {
        self.count_at(rank) as f64 / self.accepted.max(1) as f64
    }
}

/// Singular values below this fraction of the largest count as zero.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Numeric rank of a Jacobian given as rows; rows are normalized first.
pub fn numeric_rank(rows: &[Vec<f64>]) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m = DMatrix::<f64>::zeros(rows.len(), ncols);
    for (i, r) in rows.iter().enumerate() {
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = v / norm;
        }
    }
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_THRESHOLD * top).count()
}

/// Rank histogram of the Jacobian of `functions` over the sample points.
pub fn independence_rank(functions: &[PPoly], params: &ParamValues, points: &[PhasePoint]) -> Result<RankStats, VerifyError> {
    if functions.len() < 2 {
        return Err(VerifyError::TooFewFunctions(2));
    }
    let grads: Vec<Vec<PPoly>> = functions.iter().map(gradient).collect();
    let mut histogram = BTreeMap::new();
    let (mut accepted, mut rejected) = (0, 0);
    'points: for x in points {
        let mut rows = Vec::with_capacity(grads.len());
        for g in &grads {
            let mut row = Vec::with_capacity(g.len());
            for d in g {
                match d.eval_f64(x, params) {
                    Ok(v) if v.is_finite() => row.push(v),
                    _ => {
                        rejected += 1;
                        continue 'points;
                    }
                }
            }
            rows.push(row);
        }
        *histogram.entry(numeric_rank(&rows)).or_insert(0) += 1;
        accepted += 1;
    }
    if accepted == 0 {
        return Err(VerifyError::SamplingFailed { rejected });
    }
    Ok(RankStats { histogram, accepted, rejected, functions: functions.len() })
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldenComparison {
    /// Least-squares `c` with `generated ~ c * golden`.
    pub constant: f64,
    /// `max |generated - c golden| / max |generated|` over accepted samples.
    pub max_deviation: f64,
    /// Exact constant, when the symbolic route finds one.
    pub exact_constant: Option<String>,
    /// `generated * g0 - golden * f0` vanishes for the matched leading coefficients.
    pub symbolic_proportional: bool,
    pub accepted: usize,
    pub rejected: usize,
}

pub fn golden_compare(generated: &PPoly, golden: &PPoly, params: &ParamValues, points: &[PhasePoint]) -> Result<GoldenComparison, VerifyError> {
    if golden.is_zero() {
        return Err(VerifyError::GoldenZero);
    }
    let (mut fg, mut gg, mut fmax) = (0.0, 0.0, 0.0f64);
    let mut vals = Vec::new();
    let mut rejected = 0;
    for x in points {
        match (generated.eval_f64(x, params), golden.eval_f64(x, params)) {
            (Ok(f), Ok(g)) if f.is_finite() && g.is_finite() => {
                fg += f * g;
                gg += g * g;
                fmax = fmax.max(f.abs());
                vals.push((f, g));
            }
            _ => rejected += 1,
        }
    }
    if vals.is_empty() {
        return Err(VerifyError::SamplingFailed { rejected });
    }
    let constant = if gg == 0.0 { 0.0 } else { fg / gg };
    let dev = vals.iter().map(|(f, g)| (f - constant * g).abs()).fold(0.0, f64::max);
    let max_deviation = if fmax == 0.0 { dev } else { dev / fmax };

    let (exact_constant, symbolic_proportional) = match golden.terms().rev().find(|(m, _)| !generated.coeff(m).is_zero()) {
        Some((m, g0)) => {
            let f0 = generated.coeff(m);
            let ok = generated.mul_coeff(g0).sub(&golden.mul_coeff(&f0)).is_zero();
            let k = f0.checked_div(g0).ok().and_then(|c| c.as_scalar()).map(|s| s.to_string());
            (if ok { k } else { None }, ok)
        }
        None => (None, false),
    };
    Ok(GoldenComparison { constant, max_deviation, exact_constant, symbolic_proportional, accepted: vals.len(), rejected })
}

/// Step of the finite-difference stencil.
pub const FD_STEP: f64 = 1e-4;

/// Max over samples and coordinates of `|symbolic - fd| / max(1, |symbolic|)` with 5-point central differences.
pub fn fd_crosscheck(f: &PPoly, params: &ParamValues, points: &[PhasePoint]) -> Result<SampleStats, VerifyError> {
    let grad = gradient(f);
    let h = FD_STEP;
    let (mut max, mut accepted, mut rejected) = (0.0f64, 0, 0);
    'points: for x in points {
        let base = x.to_vec();
        let mut worst = 0.0f64;
        for (i, d) in grad.iter().enumerate() {
            let Ok(exact) = d.eval_f64(x, params) else {
                rejected += 1;
                continue 'points;
            };
            let mut vals = [0.0; 4];
            for (slot, k) in [-2.0, -1.0, 1.0, 2.0].into_iter().enumerate() {
                let mut y = base;
                y[i] += k * h;
                match f.eval_f64(&PhasePoint::from_slice(&y), params) {
                    Ok(v) if v.is_finite() => vals[slot] = v,
                    _ => {
                        rejected += 1;
                        continue 'points;
                    }
                }
            }
            let fd = (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h);
            worst = worst.max((exact - fd).abs() / exact.abs().max(1.0));
        }
        max = max.max(worst);
        accepted += 1;
    }
    if accepted == 0 {
        return Err(VerifyError::SamplingFailed { rejected });
    }
    Ok(SampleStats { max_residual: max, accepted, rejected })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySettings {
    pub samples: usize,
    /// Relative tolerance for the reference-formula comparison.
    pub tol: f64,
    /// Decimal digits for numeric commutation.
    pub precision: u32,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings { samples: 100, tol: 1e-12, precision: 50, seed: 1 }
    }
}

/// Tolerance of the derivative cross-check.
pub const FD_TOL: f64 = 1e-6;
/// Required share of samples at full rank.
pub const RANK_SHARE: f64 = 0.95;
/// Minimum accepted samples for a sampled claim.
pub const MIN_SAMPLES: usize = 30;

#[derive(Clone, Debug, Default, Serialize)]
pub struct ClaimEntry {
    pub id: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_histogram: Option<BTreeMap<usize, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub model: String,
    pub lambda: [u32; 2],
    pub effective_m: u32,
    pub effective_n: u32,
    pub branch: crate::extension::Parity,
    pub rng_seed: u64,
    pub precision: u32,
    pub params: ParamValues,
    pub claims: Vec<ClaimEntry>,
    pub all_passed: bool,
}

/// Longest residual text kept in a report.
const RESIDUAL_CHARS: usize = 2000;

fn clip(s: String) -> String {
    if s.len() <= RESIDUAL_CHARS {
        s
    } else {
        let mut end = RESIDUAL_CHARS;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}...", &s[..end])
    }
}

fn sampled(id: &str, r: Result<SampleStats, VerifyError>, ok: impl Fn(&SampleStats) -> bool) -> ClaimEntry {
    match r {
        Ok(s) => ClaimEntry {
            id: id.into(),
            passed: s.accepted >= MIN_SAMPLES && ok(&s),
            max_residual: Some(s.max_residual),
            samples: Some(s.accepted),
            rejected: Some(s.rejected),
            ..Default::default()
        },
        Err(e) => ClaimEntry { id: id.into(), passed: false, note: Some(e.to_string()), ..Default::default() },
    }
}

/// `K_bar` rebuilt with `omega` shifted by `delta`, for defect injection.
pub fn tampered_k(model: &ModelSpec, delta: &Scalar) -> Result<PPoly, ExtError> {
    let mut profile = model.profile.clone();
    profile.omega = &profile.omega + &Coeff::from_scalar(delta.clone());
    Ok(build_modified_k(&profile, &model.seed)?.k)
}

/// Runs every claim on a model. `k_override` replaces `K_bar` (defect injection).
pub fn verify_model(model: &ModelSpec, settings: &VerifySettings, k_override: Option<&PPoly>) -> Result<VerificationReport, VerifyError> {
    let h = &model.h_bar;
    let k = k_override.unwrap_or(&model.k_bar);
    let params = &model.values;
    let points = sample_points(settings.seed, settings.samples, &SampleRegion::default());
    let mut claims = Vec::new();

    let sym = symbolic_commute_check(h, k)?;
    claims.push(ClaimEntry {
        id: "symbolic_commutation".into(),
        passed: sym.is_zero,
        symbolic: Some(sym.is_zero),
        residual: (!sym.is_zero).then(|| clip(sym.residual.to_string())),
        ..Default::default()
    });

    let tol = 10f64.powi(-(settings.precision as i32 - 10));
    claims.push(sampled("numeric_commutation", numeric_commute_check(h, k, params, &points, settings.precision), |s| s.max_residual < tol));

    let l = model.base_l();
    claims.push(match independence_rank(&[h.clone(), k.clone(), l.clone()], params, &points) {
        Ok(r) => ClaimEntry {
            id: "independence".into(),
            passed: r.accepted >= MIN_SAMPLES && r.fraction_at(3) >= RANK_SHARE,
            samples: Some(r.accepted),
            rejected: Some(r.rejected),
            rank_histogram: Some(r.histogram.clone()),
            ..Default::default()
        },
        Err(e) => ClaimEntry { id: "independence".into(), note: Some(e.to_string()), ..Default::default() },
    });

    let gn = recursion_gn(&model.seed, model.k_meta.g_index);
    let xg_nonzero = !apply_xl(l, &gn)?.is_zero();
    claims.push(ClaimEntry {
        id: "xl_gn_nonzero".into(),
        passed: xg_nonzero,
        symbolic: Some(xg_nonzero),
        note: Some(format!("G_{} of the recursion", model.k_meta.g_index)),
        ..Default::default()
    });

    let inp = LemmaInputs::for_modified_extension(&model.profile, &model.seed)?;
    let lemma = check_lemma_conditions(&inp, Some(&model.profile.omega))?;
    let failed: Vec<String> = lemma.checks.iter().filter(|c| !c.ok).map(|c| format!("{:?}", c.condition)).collect();
    claims.push(ClaimEntry {
        id: "lemma_conditions".into(),
        passed: lemma.all_ok && lemma.f0_matches_omega == Some(true),
        symbolic: Some(lemma.all_ok),
        constant: lemma.f0.clone(),
        note: (!failed.is_empty()).then(|| format!("failed: {}", failed.join(", "))),
        ..Default::default()
    });

    if model.name == "ttw" && model.lambda == (1, 1) {
        claims.push(match golden_compare(k, &golden_k21(), params, &points) {
            Ok(g) => ClaimEntry {
                id: "golden_k21".into(),
                passed: g.symbolic_proportional && g.max_deviation < settings.tol && g.accepted >= MIN_SAMPLES,
                symbolic: Some(g.symbolic_proportional),
                max_residual: Some(g.max_deviation),
                samples: Some(g.accepted),
                rejected: Some(g.rejected),
                constant: Some(g.exact_constant.clone().unwrap_or_else(|| format!("{:e}", g.constant))),
                ..Default::default()
            },
            Err(e) => ClaimEntry { id: "golden_k21".into(), note: Some(e.to_string()), ..Default::default() },
        });
    }

    claims.push(sampled("fd_crosscheck_h", fd_crosscheck(h, params, &points), |s| s.max_residual < FD_TOL));
    claims.push(sampled("fd_crosscheck_k", fd_crosscheck(k, params, &points), |s| s.max_residual < FD_TOL));

    let all_passed = claims.iter().all(|c| c.passed);
    Ok(VerificationReport {
        model: model.name.clone(),
        lambda: [model.lambda.0, model.lambda.1],
        effective_m: model.k_meta.effective_m,
        effective_n: model.k_meta.effective_n,
        branch: model.k_meta.branch,
        rng_seed: settings.seed,
        precision: settings.precision,
        params: model.physical.clone(),
        claims,
        all_passed,
    })
}
