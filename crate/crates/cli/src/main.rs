use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use superext::expr::{parse_scalar, Param};
use superext::job::{run_job, Command, JobConfig, JobError, ModelConfig, Num, Text};

#[derive(Parser)]
#[command(name = "superext", version, about = "Build, verify and simulate superintegrable extensions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the extended Hamiltonian and its extra integral.
    Build(Opts),
    /// Check commutation, independence and the structural conditions.
    Verify(Opts),
    /// Integrate Hamilton's equations and monitor the invariants.
    Simulate(Opts),
    /// List the built-in models and their parameters.
    Catalog(Opts),
    /// Solve the linear-seed equations for one row of the table.
    SolveLinear(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// JSON job file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog model name, or `inline`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long = "L0", allow_hyphen_values = true)]
    l0: Option<String>,
    #[arg(long = "A", allow_hyphen_values = true)]
    a: Option<String>,
    /// Inline potential V(q).
    #[arg(long = "V", allow_hyphen_values = true)]
    v: Option<String>,
    /// Inline seed coefficient eta(q), with G = eta p.
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// Parameter value, `name=value`; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Initial point `q,u,p_q,p_u`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    initial: Option<Vec<f64>>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    stride: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shift omega inside K_bar (testing only).
    #[arg(long, hide = true)]
    inject_defect: bool,
}

fn num(s: &str) -> Result<Num, JobError> {
    parse_scalar(s).map(Num).map_err(|e| JobError::Config(format!("`{s}`: {e}")))
}

fn job_config(command: Command, o: Opts) -> Result<JobConfig, JobError> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| JobError::Config(format!("cannot read {}: {e}", path.display())))?;
            JobConfig::from_json(&text)?
        }
        None => JobConfig::new(command),
    };
    cfg.command = command;
    cfg.m = o.m.unwrap_or(cfg.m);
    cfg.n = o.n.unwrap_or(cfg.n);
    if let Some(w) = &o.omega {
        cfg.omega = Some(num(w)?);
    }
    if o.out.is_some() {
        cfg.out = o.out;
    }
    cfg.inject_defect |= o.inject_defect;

    let v = &mut cfg.verify;
    v.samples = o.samples.unwrap_or(v.samples);
    v.precision = o.precision.unwrap_or(v.precision);
    v.seed = o.seed.unwrap_or(v.seed);
    let s = &mut cfg.simulate;
    if let Some(x) = o.initial {
        s.initial = x.try_into().map_err(|_| JobError::Config("--initial takes four values q,u,p_q,p_u".into()))?;
    }
    s.t_end = o.t_end.unwrap_or(s.t_end);
    if o.stride.is_some() {
        s.stride = o.stride;
    }
    if let Some(t) = o.tol {
        cfg.verify.tol = t;
        cfg.simulate.tol = t;
    }

    let mut params = Vec::new();
    for kv in &o.params {
        let (k, val) = kv.split_once('=').ok_or_else(|| JobError::Config(format!("--param expects name=value, got `{kv}`")))?;
        let p = Param::from_name(k.trim()).ok_or_else(|| JobError::Config(format!("unknown parameter `{k}`")))?;
        params.push((p, val.trim().to_string()));
    }

    if command == Command::SolveLinear {
        let lc = &mut cfg.solve_linear;
        if let Some(c) = &o.c {
            lc.c = Some(num(c)?);
        }
        if let Some(l0) = o.l0 {
            lc.l0 = Some(Text(l0));
        }
        for (p, val) in params {
            let slot = match p {
                Param::A1 => &mut lc.a1,
                Param::A2 => &mut lc.a2,
                Param::C1 => &mut lc.c1,
                Param::C2 => &mut lc.c2,
                Param::L0 => &mut lc.l0,
                other => return Err(JobError::Config(format!("solve-linear does not take `{other}`"))),
            };
            *slot = Some(Text(val));
        }
        return Ok(cfg);
    }

    let touches_model = o.model.is_some() || o.v.is_some() || o.eta.is_some() || o.c.is_some() || o.l0.is_some() || o.kappa.is_some() || o.a.is_some() || !params.is_empty();
    if touches_model {
        let mc = cfg.model.get_or_insert_with(ModelConfig::default);
        if let Some(name) = o.model {
            mc.name = name;
        }
        if mc.name.is_empty() {
            return Err(JobError::Config("--model is required".into()));
        }
        mc.v = o.v.or(mc.v.take());
        mc.eta = o.eta.or(mc.eta.take());
        for (dst, src) in [(&mut mc.c, &o.c), (&mut mc.l0, &o.l0), (&mut mc.kappa, &o.kappa), (&mut mc.a, &o.a)] {
            if let Some(s) = src {
                *dst = Some(num(s)?);
            }
        }
        for (p, val) in params {
            mc.params.set(p, num(&val)?.0);
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, opts) = match cli.command {
        Cmd::Build(o) => (Command::Build, o),
        Cmd::Verify(o) => (Command::Verify, o),
        Cmd::Simulate(o) => (Command::Simulate, o),
        Cmd::Catalog(o) => (Command::Catalog, o),
        Cmd::SolveLinear(o) => (Command::SolveLinear, o),
    };
    match job_config(command, opts).and_then(|cfg| run_job(&cfg)) {
        Ok(out) => {
            let _ = writeln!(std::io::stdout().lock(), "{}", out.document);
            ExitCode::from(out.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
