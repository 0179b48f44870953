use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgelaw::checks::{self, SelftestOptions};
use edgelaw::fredholm::{default_length, trace_power_1d, trace_power_2d, F_sigma_many, TraceGrid};
use edgelaw::idpii::{solve_idpii, F_from_idpii};
use edgelaw::kernels::KernelSpec;
use edgelaw::mc::{run_experiment, with_thread_cap, McConfig, Reference, Scaling};
use edgelaw::tails::{
    gumbel_tail, left_tail_cor4, right_tail_thm2, right_tail_thm3, tw_right_tail, TailExpansion,
};
use edgelaw::EdgeError;

const SUBCOMMANDS: [&str; 6] = ["eval", "tails", "idpii", "mc", "traceid", "selftest"];

#[derive(Debug)]
enum CliError {
    Numeric(String),
    Io(String),
    Invalid(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 1,
            CliError::Io(_) => 2,
            CliError::Invalid(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Numeric(m) | CliError::Io(m) | CliError::Invalid(m) => m,
        }
    }
}

impl From<EdgeError> for CliError {
    fn from(e: EdgeError) -> Self {
        match e {
            EdgeError::InvalidArgument(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "edgelaw", version, about = "Rightmost-eigenvalue law of the elliptic Ginibre ensemble")]
struct Cli {
    /// Optional key=value file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Tabulate F_sigma(t) by the Fredholm determinant.
    Eval(EvalArgs),
    /// Compare the Fredholm value with an asymptotic formula.
    Tails(TailsArgs),
    /// Tabulate F_sigma(t) by the integro-differential Painleve route.
    Idpii(IdpiiArgs),
    /// Monte Carlo rightmost-eigenvalue samples.
    Mc(McArgs),
    /// Compare one- and two-dimensional traces for n = 1, 2.
    Traceid(TraceArgs),
    /// Run the invariant suite of every module.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output path; standard output when absent or "-".
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Csv,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    t_min: f64,

    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    t_max: f64,

    #[arg(long, default_value_t = 13)]
    steps: usize,

    /// Repeatable; also accepts a comma-separated list.
    #[arg(long = "sigma", value_delimiter = ',', default_values_t = vec![0.0])]
    sigmas: Vec<f64>,
}

impl GridArgs {
    fn ts(&self) -> CliResult<Vec<f64>> {
        if !(self.t_min < self.t_max) {
            return Err(CliError::Invalid(format!("need t-min < t-max, got {} and {}", self.t_min, self.t_max)));
        }
        if self.steps < 2 {
            return Err(CliError::Invalid("steps must be at least 2".into()));
        }
        let h = (self.t_max - self.t_min) / (self.steps - 1) as f64;
        Ok((0..self.steps).map(|i| if i + 1 == self.steps { self.t_max } else { self.t_min + h * i as f64 }).collect())
    }

    fn sorted_sigmas(&self) -> CliResult<Vec<f64>> {
        let mut s = self.sigmas.clone();
        if s.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(CliError::Invalid("sigma values must be finite and non-negative".into()));
        }
        s.sort_by(|a, b| a.total_cmp(b));
        s.dedup();
        Ok(s)
    }

    fn describe(&self, cfg: &mut Vec<(String, String)>) {
        cfg.push(("t-min".into(), num(self.t_min)));
        cfg.push(("t-max".into(), num(self.t_max)));
        cfg.push(("steps".into(), self.steps.to_string()));
        cfg.push(("sigma".into(), self.sigmas.iter().map(|s| num(*s)).collect::<Vec<_>>().join(",")));
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    grid: GridArgs,

    /// Quadrature nodes; the default rule is used when absent.
    #[arg(long)]
    m: Option<usize>,

    /// Truncation length of (0, L); the default rule is used when absent.
    #[arg(long = "L")]
    l: Option<f64>,

    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum TailRegime {
    Thm2,
    Thm3,
    Left,
    Gumbel,
    TwRight,
}

#[derive(Args, Debug)]
struct TailsArgs {
    #[arg(long, value_enum)]
    regime: TailRegime,

    #[command(flatten)]
    grid: GridArgs,

    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct IdpiiArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,

    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    t_min: f64,

    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    t_max: f64,

    #[arg(long, default_value_t = 9)]
    steps: usize,

    /// Seed point of the backward integration.
    #[arg(long, default_value_t = 8.0)]
    t0: f64,

    /// Gauss-Hermite nodes in the measure variable.
    #[arg(long, default_value_t = 32)]
    m_h: usize,

    #[arg(long, default_value_t = 1e-10)]
    ode_tol: f64,

    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum Law {
    Gue,
    Ginue,
    GinueMatched,
    Weak,
    Raw,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,

    /// Defaults to 1 for gue and raw, 0 for the Ginibre laws; required for weak.
    #[arg(long)]
    tau: Option<f64>,

    #[arg(long, default_value_t = 2000)]
    trials: usize,

    #[arg(long, default_value_t = 2024)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Law::Gue)]
    law: Law,

    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long, allow_hyphen_values = true)]
    t: f64,

    #[arg(long)]
    sigma: f64,

    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Perturbs the stored zeta'(-1) in the left-tail check.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, hide = true)]
    zeta_shift: f64,

    /// Run a single group: specfun, kernels, fredholm, idpii, tails or mc.
    #[arg(long)]
    only: Option<String>,
}

/// Round-trippable scientific notation with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    command: &'static str,
    config: Vec<(String, String)>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    trailer: Vec<(String, String)>,
}

impl Table {
    fn render(&self) -> String {
        let mut s = format!("# edgelaw {}\n", self.command);
        for (k, v) in &self.config {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        for (k, v) in &self.trailer {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }

    fn write(&self, out: &OutArgs) -> CliResult<()> {
        let text = self.render();
        match out.out.as_deref() {
            None => write_stdout(&text),
            Some(p) if p == Path::new("-") => write_stdout(&text),
            Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        }
    }
}

fn write_stdout(text: &str) -> CliResult<()> {
    io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn out_config(out: &OutArgs, cfg: &mut Vec<(String, String)>) {
    let path = out.out.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into());
    cfg.push(("out".into(), path));
    cfg.push(("format".into(), "csv".into()));
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let ts = a.grid.ts()?;
    let sigmas = a.grid.sorted_sigmas()?;
    let grid = match (a.m, a.l) {
        (None, None) => None,
        (Some(m), Some(l)) if m >= 8 && l > 0.0 => Some((m, l)),
        _ => return Err(CliError::Invalid("--m and --L must be given together, with m >= 8 and L > 0".into())),
    };
    let points: Vec<(f64, f64)> = sigmas.iter().flat_map(|&s| ts.iter().map(move |&t| (t, s))).collect();
    let evals = F_sigma_many(&points, grid)?;
    let mut config = Vec::new();
    a.grid.describe(&mut config);
    config.push(("m".into(), a.m.map(|m| m.to_string()).unwrap_or_else(|| "default".into())));
    config.push(("L".into(), a.l.map(num).unwrap_or_else(|| "default".into())));
    out_config(&a.out, &mut config);
    let rows = evals.iter().map(|e| vec![num(e.t), num(e.sigma), num(e.value), num(e.err_est)]).collect();
    Table { command: "eval", config, header: vec!["t", "sigma", "F_fredholm", "err_est"], rows, trailer: vec![] }
        .write(&a.out)
}

fn tail_eval(regime: TailRegime, t: f64, sigma: f64) -> CliResult<TailExpansion> {
    Ok(match regime {
        TailRegime::Thm2 => right_tail_thm2(t, sigma)?,
        TailRegime::Thm3 => right_tail_thm3(t, sigma)?,
        TailRegime::Left => left_tail_cor4(t, sigma)?,
        TailRegime::Gumbel => gumbel_tail(t, sigma)?,
        TailRegime::TwRight => tw_right_tail(t)?,
    })
}

fn cmd_tails(a: &TailsArgs) -> CliResult<()> {
    let ts = a.grid.ts()?;
    let sigmas = a.grid.sorted_sigmas()?;
    let points: Vec<(f64, f64)> = sigmas.iter().flat_map(|&s| ts.iter().map(move |&t| (t, s))).collect();
    let asym = points.iter().map(|&(t, s)| tail_eval(a.regime, t, s)).collect::<CliResult<Vec<_>>>()?;
    let fred = F_sigma_many(&points, None)?;
    let mut rows = Vec::new();
    for (f, e) in fred.iter().zip(&asym) {
        let valid = e.valid.to_string();
        let (t, s) = (num(f.t), num(f.sigma));
        rows.push(vec![t.clone(), s.clone(), "fredholm".into(), num(f.value), num(f.complement), num(f.ln_value), String::new(), valid.clone()]);
        rows.push(vec![t.clone(), s.clone(), e.regime.name().into(), num(e.value), num(e.complement), num(e.ln_value), String::new(), valid.clone()]);
        // The relative error uses the complement in right tails and ln F elsewhere.
        let right = !matches!(a.regime, TailRegime::Left);
        let rel = if right {
            (e.complement - f.complement) / f.complement
        } else {
            (e.ln_value - f.ln_value) / f.ln_value
        };
        rows.push(vec![
            t,
            s,
            "difference".into(),
            num(e.value - f.value),
            num(e.complement - f.complement),
            num(e.ln_value - f.ln_value),
            num(rel),
            valid,
        ]);
    }
    let mut config = vec![("regime".into(), format!("{:?}", a.regime).to_lowercase())];
    a.grid.describe(&mut config);
    out_config(&a.out, &mut config);
    Table {
        command: "tails",
        config,
        header: vec!["t", "sigma", "source", "F", "one_minus_F", "ln_F", "rel_err", "valid"],
        rows,
        trailer: vec![],
    }
    .write(&a.out)
}

fn cmd_idpii(a: &IdpiiArgs) -> CliResult<()> {
    let grid = GridArgs { t_min: a.t_min, t_max: a.t_max, steps: a.steps, sigmas: vec![a.sigma] };
    let ts = grid.ts()?;
    let state = solve_idpii(a.sigma, a.t_min, a.t0, a.m_h, a.ode_tol)?;
    let points: Vec<(f64, f64)> = ts.iter().map(|&t| (t, a.sigma)).collect();
    let fred = F_sigma_many(&points, None)?;
    let mut rows = Vec::new();
    for (&t, f) in ts.iter().zip(&fred) {
        let p = F_from_idpii(&state, t)?;
        rows.push(vec![num(t), num(a.sigma), num(p.value), num(f.value), num((p.value - f.value).abs()), num(state.energy_at(t)?)]);
    }
    let config = vec![
        ("sigma".into(), num(a.sigma)),
        ("t-min".into(), num(a.t_min)),
        ("t-max".into(), num(a.t_max)),
        ("steps".into(), a.steps.to_string()),
        ("t0".into(), num(a.t0)),
        ("m-h".into(), a.m_h.to_string()),
        ("ode-tol".into(), num(a.ode_tol)),
        ("ode-steps".into(), state.t_grid.len().to_string()),
    ];
    let mut config = config;
    out_config(&a.out, &mut config);
    Table {
        command: "idpii",
        config,
        header: vec!["t", "sigma", "F_idpii", "F_fredholm", "abs_diff", "E"],
        rows,
        trailer: vec![],
    }
    .write(&a.out)
}

fn mc_config(a: &McArgs) -> CliResult<McConfig> {
    let tau = match (a.law, a.tau) {
        (_, Some(t)) => t,
        (Law::Gue | Law::Raw, None) => 1.0,
        (Law::Ginue | Law::GinueMatched, None) => 0.0,
        (Law::Weak, None) => return Err(CliError::Invalid("law weak needs --tau".into())),
    };
    let mut cfg = McConfig::new(a.n, tau, a.trials, a.seed);
    (cfg.scaling, cfg.reference) = match a.law {
        Law::Gue => (Scaling::GueEdge, Reference::TracyWidom),
        Law::Ginue => (Scaling::GinueEdge, Reference::Gumbel),
        Law::GinueMatched => (Scaling::GinueMatched, Reference::Gumbel),
        Law::Weak => (Scaling::GueEdge, Reference::WeakSigma),
        Law::Raw => (Scaling::Raw, Reference::None),
    };
    Ok(cfg)
}

fn cmd_mc(a: &McArgs) -> CliResult<()> {
    let cfg = mc_config(a)?;
    let run = run_experiment(&cfg)?;
    let mut config = vec![
        ("n".into(), cfg.n.to_string()),
        ("tau".into(), num(cfg.tau)),
        ("trials".into(), cfg.trials.to_string()),
        ("seed".into(), cfg.seed.to_string()),
        ("law".into(), format!("{:?}", a.law).to_lowercase()),
        ("scaling".into(), cfg.scaling.name().into()),
        ("sigma_n".into(), num(cfg.sigma())),
    ];
    out_config(&a.out, &mut config);
    let rows = run.samples.iter().enumerate().map(|(i, x)| vec![i.to_string(), num(*x)]).collect();
    let s = &run.summary;
    let trailer = vec![
        ("summary.reference".into(), s.reference.to_string()),
        ("summary.mean".into(), num(s.mean)),
        ("summary.ks".into(), s.ks.map(num).unwrap_or_else(|| "none".into())),
    ];
    Table { command: "mc", config, header: vec!["trial", "sample"], rows, trailer }.write(&a.out)
}

fn cmd_traceid(a: &TraceArgs) -> CliResult<()> {
    let spec = KernelSpec::for_distribution(a.t, a.sigma)?;
    let l = default_length(a.t, a.sigma);
    let m = 120;
    let grid = TraceGrid::default_for(a.t, a.sigma);
    let mut rows = Vec::new();
    for n in [1u32, 2] {
        let d1 = trace_power_1d(&spec, n, m, l)?;
        let d2 = trace_power_2d(a.t, a.sigma, n, grid)?;
        rows.push(vec![
            n.to_string(),
            num(d1),
            num(d2.value),
            num((d1 - d2.value).abs()),
            num(d2.coarse),
            d2.grid.m_x.to_string(),
            num(d2.grid.l),
            d2.grid.m_h.to_string(),
            m.to_string(),
            num(l),
        ]);
    }
    let mut config = vec![("t".into(), num(a.t)), ("sigma".into(), num(a.sigma))];
    out_config(&a.out, &mut config);
    Table {
        command: "traceid",
        config,
        header: vec!["n", "trace_1d", "trace_2d", "abs_diff", "trace_2d_coarse", "m_x", "L_2d", "m_h", "m_1d", "L_1d"],
        rows,
        trailer: vec![],
    }
    .write(&a.out)
}

fn cmd_selftest(a: &SelftestArgs) -> CliResult<bool> {
    if let Some(g) = &a.only {
        if !checks::SELFTEST_GROUPS.contains(&g.as_str()) {
            return Err(CliError::Invalid(format!("unknown selftest group '{g}'")));
        }
    }
    let opts = SelftestOptions { zeta_shift: a.zeta_shift, only: a.only.clone() };
    let checks = checks::selftest(&opts);
    let mut ok = 0;
    for c in &checks {
        println!("{}", c.line());
        if c.pass() {
            ok += 1;
        }
    }
    println!("selftest: {ok} of {} checks pass", checks.len());
    Ok(ok == checks.len())
}

/// `key=value` lines; blank lines and `#` comments are skipped.
fn read_config(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Invalid(format!("{}:{}: expected key=value", path.display(), i + 1)));
        };
        out.push((k.trim().trim_start_matches("--").to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Splices config-file entries into the argument list right after the
/// subcommand, skipping keys that also appear as explicit flags.
fn merge_config(args: Vec<String>) -> CliResult<Vec<String>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        }
    }
    let Some(path) = path else { return Ok(args) };
    let entries = read_config(&path)?;
    let explicit: HashSet<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let Some(pos) = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(args);
    };
    let mut merged = args[..=pos].to_vec();
    for (k, v) in entries {
        if k != "config" && !explicit.contains(&k) {
            merged.push(format!("--{k}={v}"));
        }
    }
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}

fn run(cli: Cli) -> CliResult<bool> {
    with_thread_cap(move || -> CliResult<bool> {
        match &cli.cmd {
            Cmd::Eval(a) => cmd_eval(a).map(|_| true),
            Cmd::Tails(a) => cmd_tails(a).map(|_| true),
            Cmd::Idpii(a) => cmd_idpii(a).map(|_| true),
            Cmd::Mc(a) => cmd_mc(a).map(|_| true),
            Cmd::Traceid(a) => cmd_traceid(a).map(|_| true),
            Cmd::Selftest(a) => cmd_selftest(a),
        }
    })?
}

fn main() -> ExitCode {
    let args = match merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("edgelaw: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("edgelaw: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
