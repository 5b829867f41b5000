//! Batch jobs: configuration documents, commands and exit codes.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::catalog::{build_catalog_model, catalog, inline_model, InlineModel, ModelSpec};
use crate::dynamics::{hamiltons_equations, integrate_adaptive, monitor_invariants, write_csv, DriftReport, DynamicsError, TrajectoryConfig, VectorField, DIM};
use crate::expr::{parse_coeff, parse_scalar, Coeff, Param, ParamValues, Scalar};
use crate::extension::{solve_linear_seed, ExtError, LinearCase, LinearInputs};
use crate::poisson::{PPoly, PhasePoint};
use crate::verify::{tampered_k, verify_model, VerifySettings};

#[derive(Debug, Error)]
pub enum JobError {
    #[error("config error: {0}")]
    Config(String),
    #[error("seed condition fails: {0}")]
    SeedCondition(String),
}

impl JobError {
    pub fn exit_code(&self) -> u8 {
        match self {
            JobError::Config(_) => 1,
            JobError::SeedCondition(_) => 2,
        }
    }
}

impl From<ExtError> for JobError {
    fn from(e: ExtError) -> Self {
        match e {
            ExtError::SeedCondition { residual } => JobError::SeedCondition(format!("residual X_L^2 G + 2 (c L + L0) G = {residual}")),
            other => JobError::Config(other.to_string()),
        }
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CLAIM_FAILED: u8 = 3;
pub const EXIT_INTEGRATION: u8 = 4;

/// Exact number given as a JSON number or as text (`"3/2"`, `"1e-3"`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Num(pub Scalar);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = Text::deserialize(d)?.0;
        parse_scalar(&text).map(Num).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

/// Expression text; bare JSON numbers are accepted too.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Text(pub String);

impl<'de> Deserialize<'de> for Text {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Str(String),
        }
        Ok(Text(match Raw::deserialize(d)? {
            Raw::Int(i) => i.to_string(),
            Raw::Float(x) => x.to_string(),
            Raw::Str(s) => s,
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Build,
    Verify,
    Simulate,
    Catalog,
    SolveLinear,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `ttw`, `cage`, `harmonic` or `inline`.
    pub name: String,
    #[serde(default)]
    pub params: ParamValues,
    /// Inline potential `V(q)`.
    #[serde(default, rename = "V", skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    /// Inline seed coefficient, `G = eta(q) p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Num>,
    #[serde(default, rename = "L0", skip_serializing_if = "Option::is_none")]
    pub l0: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Num>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<Num>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub samples: usize,
    pub tol: f64,
    pub precision: u32,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let d = VerifySettings::default();
        VerifyConfig { samples: d.samples, tol: d.tol, precision: d.precision, seed: d.seed }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// `(q, u, p_q, p_u)` at `t = 0`.
    pub initial: [f64; DIM],
    pub t_end: f64,
    pub tol: f64,
    pub stride: Option<f64>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { initial: [1.0, 1.0, 0.3, 0.2], t_end: 100.0, tol: 1e-12, stride: Some(0.1) }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    pub c: Option<Num>,
    pub a1: Option<Text>,
    pub a2: Option<Text>,
    pub c1: Option<Text>,
    pub c2: Option<Text>,
    #[serde(rename = "L0")]
    pub l0: Option<Text>,
    pub case: Option<LinearCase>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default = "one")]
    pub m: u32,
    #[serde(default = "one")]
    pub n: u32,
    #[serde(default)]
    pub omega: Option<Num>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub solve_linear: LinearConfig,
    /// Output file: the document, or the trajectory for `simulate`.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Test-only: shift `omega` inside `K_bar` by 1/1000.
    #[serde(default)]
    pub inject_defect: bool,
}

fn one() -> u32 {
    1
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        JobConfig {
            command,
            model: None,
            m: 1,
            n: 1,
            omega: None,
            verify: VerifyConfig::default(),
            simulate: SimulateConfig::default(),
            solve_linear: LinearConfig::default(),
            out: None,
            inject_defect: false,
        }
    }

    pub fn from_json(text: &str) -> Result<JobConfig, JobError> {
        serde_json::from_str(text).map_err(|e| JobError::Config(e.to_string()))
    }
}

/// Printed document and exit code.
#[derive(Clone, Debug)]
pub struct JobOutput {
    pub document: String,
    pub exit_code: u8,
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable document")
}

fn symbols(f: &PPoly) -> impl Iterator<Item = Param> + '_ {
    Param::ALL.into_iter().filter(move |p| f.terms().any(|(_, c)| c.uses_param(*p)))
}

/// Builds the model named in the config.
pub fn resolve_model(cfg: &JobConfig) -> Result<ModelSpec, JobError> {
    let mc = cfg.model.as_ref().ok_or_else(|| JobError::Config("no model given".into()))?;
    let mut params = mc.params.clone();
    if let Some(w) = &cfg.omega {
        params.set(Param::Omega, w.0.clone());
    }
    let model = if mc.name == "inline" {
        let (Some(v), Some(eta)) = (&mc.v, &mc.eta) else {
            return Err(JobError::Config("inline models need V and eta".into()));
        };
        let num = |x: &Option<Num>, d: i64| x.as_ref().map(|n| n.0.clone()).unwrap_or_else(|| Scalar::from_integer(d.into()));
        let def = InlineModel { v, eta, c: num(&mc.c, 0), l0: num(&mc.l0, 0), kappa: num(&mc.kappa, 0), a: num(&mc.a, 1) };
        if params.get(Param::Omega).is_none() {
            params.set(Param::Omega, Scalar::from_integer(0.into()));
        }
        inline_model(&def, cfg.m, cfg.n, params)?
    } else {
        if mc.c.is_some() || mc.kappa.is_some() || mc.v.is_some() || mc.eta.is_some() {
            return Err(JobError::Config(format!("c, kappa, V and eta only apply to inline models, not `{}`", mc.name)));
        }
        if let Some(l0) = &mc.l0 {
            params.set(Param::L0, l0.0.clone());
        }
        if let Some(a) = &mc.a {
            params.set(Param::A, a.0.clone());
        }
        build_catalog_model(&mc.name, cfg.m, cfg.n, &params)?
    };
    for f in [&model.h_bar, &model.k_bar] {
        if let Some(p) = symbols(f).find(|p| model.values.get(*p).is_none()) {
            return Err(JobError::Config(format!("no value for parameter `{p}`")));
        }
    }
    Ok(model)
}

#[derive(Serialize)]
struct BuildDoc<'a> {
    model: &'a str,
    lambda: [u32; 2],
    extension_m: u32,
    extension_n: u32,
    effective_m: u32,
    effective_n: u32,
    branch: crate::extension::Parity,
    power: u32,
    g_index: u32,
    params: &'a ParamValues,
    coordinates: &'a [String],
    h_bar: String,
    k_bar: String,
    h_degree: u32,
    k_degree: u32,
    h_terms: usize,
    k_terms: usize,
}

pub fn cmd_build(cfg: &JobConfig) -> Result<JobOutput, JobError> {
    let m = resolve_model(cfg)?;
    let space = m.space();
    let doc = BuildDoc {
        model: &m.name,
        lambda: [m.lambda.0, m.lambda.1],
        extension_m: m.profile.m,
        extension_n: m.profile.n,
        effective_m: m.k_meta.effective_m,
        effective_n: m.k_meta.effective_n,
        branch: m.k_meta.branch,
        power: m.k_meta.power,
        g_index: m.k_meta.g_index,
        params: &m.physical,
        coordinates: &m.coordinates,
        h_bar: m.h_bar.render(&space),
        k_bar: m.k_bar.render(&space),
        h_degree: m.h_bar.degree(),
        k_degree: m.k_bar.degree(),
        h_terms: m.h_bar.term_count(),
        k_terms: m.k_bar.term_count(),
    };
    Ok(JobOutput { document: pretty(&doc), exit_code: EXIT_OK })
}

pub fn cmd_verify(cfg: &JobConfig) -> Result<JobOutput, JobError> {
    let m = resolve_model(cfg)?;
    let v = &cfg.verify;
    if v.samples == 0 || v.precision < 20 || !(v.tol > 0.0) {
        return Err(JobError::Config("need samples > 0, precision >= 20 and tol > 0".into()));
    }
    let settings = VerifySettings { samples: v.samples, tol: v.tol, precision: v.precision, seed: v.seed };
    let bad = if cfg.inject_defect { Some(tampered_k(&m, &Scalar::new(1.into(), 1000.into()))?) } else { None };
    let report = verify_model(&m, &settings, bad.as_ref()).map_err(|e| JobError::Config(e.to_string()))?;
    let exit_code = if report.all_passed { EXIT_OK } else { EXIT_CLAIM_FAILED };
    Ok(JobOutput { document: pretty(&report), exit_code })
}

#[derive(Serialize)]
struct SimulateDoc {
    model: String,
    trajectory: String,
    drift: DriftReport,
    /// `max_i |y_i(T) - y_i(0)|`.
    closure: f64,
    t_reached: f64,
    aborted: Option<String>,
}

pub fn cmd_simulate(cfg: &JobConfig) -> Result<JobOutput, JobError> {
    let m = resolve_model(cfg)?;
    let s = &cfg.simulate;
    let field = hamiltons_equations(&m.h_bar, &m.values);
    if field.eval(&s.initial).is_err() {
        return Err(JobError::Config(format!("initial point {:?} is singular for this model", s.initial)));
    }
    for (name, f) in [("K_bar", &m.k_bar), ("L", &m.seed.l)] {
        if f.eval_f64(&PhasePoint::from_slice(&s.initial), &m.values).is_err() {
            return Err(JobError::Config(format!("initial point is singular for {name}")));
        }
    }
    let mut tc = TrajectoryConfig::new(s.initial, s.t_end, s.tol);
    tc.stride = s.stride;
    let tr = integrate_adaptive(&tc, &field).map_err(|e| match e {
        DynamicsError::InvalidConfig(msg) | DynamicsError::SingularStart(msg) => JobError::Config(msg),
    })?;
    let invariants = vec![("H_bar".to_string(), m.h_bar.clone()), ("K_bar".to_string(), m.k_bar.clone()), ("L".to_string(), m.seed.l.clone())];
    let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    let space = m.space();
    let coords = [space.positions[0].clone(), space.positions[1].clone(), space.momenta[0].clone(), space.momenta[1].clone()];
    let mut buf = Vec::new();
    write_csv(&mut buf, &coords, &tr, &invariants, &m.values).map_err(|e| JobError::Config(e.to_string()))?;
    fs::write(&path, buf).map_err(|e| JobError::Config(format!("cannot write {}: {e}", path.display())))?;
    let drift = monitor_invariants(&tr, &invariants, &m.values);
    let last = tr.last().copied().unwrap_or(s.initial);
    let closure = last.iter().zip(&s.initial).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let doc = SimulateDoc {
        model: m.name.clone(),
        trajectory: path.display().to_string(),
        drift,
        closure,
        t_reached: tr.times.last().copied().unwrap_or(0.0),
        aborted: tr.aborted.clone(),
    };
    let exit_code = if tr.aborted.is_some() { EXIT_INTEGRATION } else { EXIT_OK };
    Ok(JobOutput { document: pretty(&doc), exit_code })
}

pub fn cmd_catalog() -> JobOutput {
    JobOutput { document: pretty(&catalog()), exit_code: EXIT_OK }
}

#[derive(Serialize)]
struct LinearDoc {
    case: LinearCase,
    eta: String,
    #[serde(rename = "V")]
    v: String,
    c: String,
    #[serde(rename = "L0")]
    l0: String,
    residuals: [String; 2],
    certified: bool,
}

pub fn cmd_solve_linear(cfg: &JobConfig) -> Result<JobOutput, JobError> {
    let lc = &cfg.solve_linear;
    let c = lc.c.as_ref().ok_or_else(|| JobError::Config("solve-linear needs c".into()))?.0.clone();
    let expr = |t: &Option<Text>, default: &str| -> Result<Coeff, JobError> {
        let s = t.as_ref().map_or(default, |x| x.0.as_str());
        let e = parse_coeff(s).map_err(|e| JobError::Config(format!("`{s}`: {e}")))?;
        if !e.is_constant() {
            return Err(JobError::Config(format!("`{s}` must not depend on q or u")));
        }
        Ok(e)
    };
    let inp = LinearInputs {
        c,
        a1: expr(&lc.a1, "a1")?,
        a2: expr(&lc.a2, "a2")?,
        c1: expr(&lc.c1, "c1")?,
        c2: expr(&lc.c2, "c2")?,
        l0: expr(&lc.l0, "L0")?,
        case: lc.case,
    };
    let fam = solve_linear_seed(&inp)?;
    let doc = LinearDoc {
        case: fam.case,
        eta: fam.eta.to_string(),
        v: fam.v.to_string(),
        c: fam.c.to_string(),
        l0: fam.l0.to_string(),
        residuals: [fam.residuals[0].to_string(), fam.residuals[1].to_string()],
        certified: fam.certified,
    };
    Ok(JobOutput { document: pretty(&doc), exit_code: EXIT_OK })
}

/// Runs a job. Documents go to `out` when set, except for `simulate` whose `out` is the trajectory.
pub fn run_job(cfg: &JobConfig) -> Result<JobOutput, JobError> {
    let out = match cfg.command {
        Command::Build => cmd_build(cfg)?,
        Command::Verify => cmd_verify(cfg)?,
        Command::Simulate => return cmd_simulate(cfg),
        Command::Catalog => cmd_catalog(),
        Command::SolveLinear => cmd_solve_linear(cfg)?,
    };
    if let Some(path) = &cfg.out {
        fs::write(path, format!("{}\n", out.document)).map_err(|e| JobError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(out)
}
