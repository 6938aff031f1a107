use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use advs_core::sweep::{fit_rows, format_float, read_csv, summary_json, write_csv, write_dat};
use advs_core::{
    p1, run_sweep, threshold_report, Channel, GroverInstance, MatrixElementForm, Method, PhaseIntegral, Schedule, ScheduleKind, SweepRow, Target,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

mod config;

use config::{budget_from_env, parse_methods, parse_n_list, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "advs", version, about = "Adiabatic Grover search coupled to a bath: gaps, schedules and failure probabilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral gap at one or more values of s.
    Gap(GapArgs),
    /// Build a schedule and print it as JSON.
    Schedule(ScheduleArgs),
    /// Transition matrix elements <E0|sigma|E1> per qubit and channel.
    MatrixElements(ElementArgs),
    /// Failure probability for every configuration in a config file.
    P1(RunArgs),
    /// Full sweep with exponent fits and scalability classification.
    Sweep(RunArgs),
    /// Refit exponents from a sweep CSV.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Dat,
}

#[derive(Args)]
struct PointArgs {
    /// Number of qubits.
    #[arg(long)]
    n: u32,
    /// Comma-separated values of s.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    s: Vec<f64>,
    /// Evenly spaced points on [0, 1], endpoints included.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl PointArgs {
    fn points(&self) -> Result<Vec<f64>, Failure> {
        match (self.grid, self.s.is_empty()) {
            (Some(0 | 1), _) => Err(Failure::Config("--grid needs at least 2 points".into())),
            (Some(k), _) => Ok((0..k).map(|i| i as f64 / (k - 1) as f64).collect()),
            (None, false) => Ok(self.s.clone()),
            (None, true) => Err(Failure::Config("give --s or --grid".into())),
        }
    }
}

#[derive(Args)]
struct GapArgs {
    #[command(flatten)]
    points: PointArgs,
}

#[derive(Args)]
struct ElementArgs {
    #[command(flatten)]
    points: PointArgs,
    #[arg(long, value_enum, default_value_t = FormArg::LargeN)]
    form: FormArg,
    /// Marked item as a bitstring (default: alternating 0101...).
    #[arg(long)]
    marked: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    LargeN,
    FiniteN,
}

impl From<FormArg> for MatrixElementForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::LargeN => MatrixElementForm::LargeN,
            FormArg::FiniteN => MatrixElementForm::FiniteN,
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: ScheduleKind,
    #[arg(long)]
    n: u32,
    /// Adiabatic error estimate to hold (default 0.1).
    #[arg(long, conflicts_with = "runtime")]
    epsilon: Option<f64>,
    /// Total runtime T instead of an error target.
    #[arg(long)]
    runtime: Option<f64>,
    /// Directory to write schedule.json into (stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// time, freq, markov, asymptotic, brute, a comma list, or all.
    #[arg(long)]
    method: Option<String>,
    /// Qubit counts: 8, 6,8,10 or 6..14.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct FitArgs {
    csv: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn parse_kind(s: &str) -> Result<ScheduleKind, String> {
    match s.parse::<ScheduleKind>() {
        Ok(ScheduleKind::CustomTable) => Err("custom tables are loaded from files, not built".into()),
        Ok(k) => Ok(k),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<advs_core::Error> for Failure {
    fn from(e: advs_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

/// A printable table; numbers keep full round-trip precision.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map(format_float).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        Value::Null => "nan".into(),
        other => other.to_string(),
    }
}

fn num(x: f64) -> Value {
    // JSON has no NaN; null stands in for it.
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.header.join(",") + "\n";
                for r in &self.rows {
                    s += &r.iter().map(|v| csv_field(&cell(v))).collect::<Vec<_>>().join(",");
                    s.push('\n');
                }
                s
            }
            Format::Dat => {
                let mut s = format!("# {}\n", self.header.join(" "));
                for r in &self.rows {
                    s += &r.iter().map(cell).collect::<Vec<_>>().join(" ");
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let objs: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                serde_json::to_string_pretty(&objs).expect("tables serialise") + "\n"
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_gap(a: &GapArgs) -> Result<String, Failure> {
    let inst = GroverInstance::balanced(a.points.n)?;
    let mut rows = Vec::new();
    for s in a.points.points()? {
        rows.push(vec![num(s), num(inst.gap(s)?)]);
    }
    Ok(Table { header: vec!["s", "gap"], rows }.render(a.points.format))
}

fn cmd_matrix_elements(a: &ElementArgs) -> Result<String, Failure> {
    let inst = match &a.marked {
        Some(bits) => GroverInstance::from_bitstring(bits)?,
        None => GroverInstance::balanced(a.points.n)?,
    };
    if inst.n_qubits() != a.points.n {
        return Err(Failure::Config(format!("--marked has {} bits but --n is {}", inst.n_qubits(), a.points.n)));
    }
    let mut rows = Vec::new();
    for s in a.points.points()? {
        for q in 0..inst.n_qubits() {
            for ch in [Channel::X, Channel::Y, Channel::Z] {
                let v = inst.transition_element(q, ch, s, a.form.into())?;
                rows.push(vec![num(s), json!(q), json!(ch.name()), num(v.re), num(v.im)]);
            }
        }
    }
    Ok(Table {
        header: vec!["s", "qubit", "channel", "re", "im"],
        rows,
    }
    .render(a.points.format))
}

fn cmd_schedule(a: &ScheduleArgs) -> Result<String, Failure> {
    let inst = GroverInstance::balanced(a.n)?;
    let target = match (a.runtime, a.epsilon) {
        (Some(t), _) => Target::Runtime(t),
        (None, Some(e)) => Target::Epsilon(e),
        (None, None) => Target::Epsilon(0.1),
    };
    let sched = Schedule::build(a.kind, &inst, target)?;
    let text = serde_json::to_string(&sched.to_document()).expect("schedules serialise") + "\n";
    match &a.out {
        Some(dir) => {
            let path = write_file(dir, "schedule.json", text.as_bytes())?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

fn load(a: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(&a.config)?;
    cfg.apply(&Overrides {
        n: a.n.as_deref().map(parse_n_list).transpose().map_err(Failure::Config)?,
        methods: a.method.as_deref().map(parse_methods).transpose().map_err(Failure::Config)?,
        format: a.format,
        out: a.out.clone(),
        jobs: a.jobs,
    })?;
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn relative_deviation(v: f64, reference: f64) -> f64 {
    if v == reference {
        0.0
    } else {
        (v - reference).abs() / reference.abs()
    }
}

fn cmd_p1(a: &RunArgs) -> Result<String, Failure> {
    let cfg = load(a)?;
    let spec = &cfg.sweep;
    let all_requested = a.method.as_deref().is_some_and(|m| m.trim().eq_ignore_ascii_case("all"));
    let coupling = spec.coupling();
    let mut rows = Vec::new();
    for &n in &spec.n_range {
        let inst = GroverInstance::balanced(n)?;
        for &kind in &spec.schedules {
            let sched = Schedule::build(kind, &inst, Target::Epsilon(spec.epsilon))?;
            let phase = PhaseIntegral::new(&sched)?;
            for bath in &spec.baths {
                let model = bath.model(spec.preset_params)?;
                let mut estimates = Vec::new();
                for &m in &spec.methods {
                    // "all" means all that apply: the Markovian engine only
                    // takes delta-correlated baths.
                    if all_requested && m == Method::Markovian && model.markovian_strength().is_none() {
                        continue;
                    }
                    estimates.push(p1(m, &inst, &sched, &phase, &coupling, &model, &spec.options)?);
                }
                let reference = estimates
                    .iter()
                    .find(|e| e.method == Method::FrequencyDomain)
                    .or(estimates.first())
                    .map(|e| e.value)
                    .unwrap_or(0.0);
                for e in &estimates {
                    rows.push(vec![
                        json!(n),
                        json!(kind.name()),
                        json!(bath.label()),
                        json!(e.method.name()),
                        num(e.value),
                        num(e.numerical_error),
                        num(relative_deviation(e.value, reference)),
                        json!(e.unreliable),
                    ]);
                }
            }
        }
    }
    let table = Table {
        header: vec!["n", "schedule", "preset", "method", "p1", "err", "rel_dev", "unreliable"],
        rows,
    };
    let text = table.render(cfg.format);
    match &cfg.out {
        Some(dir) => {
            let ext = match cfg.format {
                Format::Csv => "csv",
                Format::Json => "json",
                Format::Dat => "dat",
            };
            let path = write_file(dir, &format!("p1.{ext}"), text.as_bytes())?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

fn csv_bytes(rows: &[SweepRow]) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(buf)
}

fn dat_bytes(rows: &[SweepRow]) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_dat(rows, &mut buf)?;
    Ok(buf)
}

fn classification_lines(rows: &[SweepRow]) -> Result<String, Failure> {
    let mut s = String::new();
    for c in threshold_report(rows)? {
        s += &format!("{} {} {}: exponent {} +- {} -> {}", c.schedule, c.preset, c.method, format_float(c.exponent), format_float(c.stderr), c.class);
        if let Some(p) = &c.poly {
            s += &format!(" (log n power {}, rss {} -> {})", format_float(p.log_n_power), format_float(p.rss_power), format_float(p.rss_with_log_n));
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_sweep(a: &RunArgs) -> Result<(String, bool), Failure> {
    let cfg = load(a)?;
    let result = run_sweep(&cfg.sweep, cfg.jobs)?;
    let failed: Vec<String> = result
        .rows
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("n={} {} {} {}: {f}", r.n, r.schedule, r.preset, r.method)))
        .collect();
    let summary = summary_json(&result)? + "\n";
    let mut report = String::new();
    match &cfg.out {
        Some(dir) => {
            let mut written = vec![write_file(dir, "sweep.csv", &csv_bytes(&result.rows)?)?];
            written.push(write_file(dir, "summary.json", summary.as_bytes())?);
            if cfg.format == Format::Dat {
                written.push(write_file(dir, "sweep.dat", &dat_bytes(&result.rows)?)?);
            }
            for p in written {
                report += &format!("wrote {}\n", p.display());
            }
            report += &classification_lines(&result.rows)?;
        }
        None => {
            report = match cfg.format {
                Format::Csv => String::from_utf8(csv_bytes(&result.rows)?).expect("utf-8 csv"),
                Format::Json => summary,
                Format::Dat => String::from_utf8(dat_bytes(&result.rows)?).expect("utf-8 dat"),
            }
        }
    }
    for f in &failed {
        eprintln!("failed row: {f}");
    }
    Ok((report, failed.is_empty()))
}

fn cmd_fit(a: &FitArgs) -> Result<String, Failure> {
    let rows = read_csv(&a.csv)?;
    let fits = fit_rows(&rows);
    if fits.is_empty() {
        return Err(Failure::Config(format!("{}: no group has the 4 positive rows a fit needs", a.csv.display())));
    }
    let classes = threshold_report(&rows)?;
    let table = Table {
        header: vec!["schedule", "preset", "method", "exponent", "stderr", "r2", "points", "class"],
        rows: fits
            .iter()
            .map(|f| {
                let class = classes
                    .iter()
                    .find(|c| c.schedule == f.schedule && c.preset == f.preset && c.method == f.method)
                    .map(|c| c.class.to_string())
                    .unwrap_or_default();
                vec![
                    json!(f.schedule.name()),
                    json!(f.preset),
                    json!(f.method.name()),
                    num(f.fit.exponent),
                    num(f.fit.stderr),
                    num(f.fit.r2),
                    json!(f.fit.points),
                    json!(class),
                ]
            })
            .collect(),
    };
    Ok(table.render(a.format))
}

fn run(cli: Cli) -> Result<(String, bool), Failure> {
    // Validate the environment before any work, whatever the command.
    budget_from_env()?;
    match cli.command {
        Command::Gap(a) => cmd_gap(&a).map(|s| (s, true)),
        Command::Schedule(a) => cmd_schedule(&a).map(|s| (s, true)),
        Command::MatrixElements(a) => cmd_matrix_elements(&a).map(|s| (s, true)),
        Command::P1(a) => cmd_p1(&a).map(|s| (s, true)),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Fit(a) => cmd_fit(&a).map(|s| (s, true)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok((text, clean)) => {
            let mut out = io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}
