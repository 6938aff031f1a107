//! Parameter sweeps over register size, schedule and bath, with power-law
//! fits of the failure probability against N.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::failure::{p1, EngineOptions, Method};
use crate::grover::{GroverInstance, MatrixElementForm};
use crate::phase::PhaseIntegral;
use crate::schedule::{Schedule, ScheduleKind, Target};
use crate::spectral::{preset, CouplingConfig, Preset, PresetParams, SpectralModel, Topology};

/// A bath in a sweep: a named preset or an explicit model.
#[derive(Debug, Clone, PartialEq)]
pub enum Bath {
    Preset(Preset),
    Model { label: String, model: SpectralModel },
}

impl Bath {
    pub fn label(&self) -> String {
        match self {
            Bath::Preset(p) => p.to_string(),
            Bath::Model { label, .. } => label.clone(),
        }
    }

    pub fn model(&self, params: PresetParams) -> Result<SpectralModel> {
        match self {
            Bath::Preset(p) => preset(*p, params),
            Bath::Model { model, .. } => Ok(model.clone()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LabelledModel {
    label: String,
    #[serde(flatten)]
    model: serde_json::Value,
}

impl Serialize for Bath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        match self {
            Bath::Preset(p) => s.serialize_str(&p.to_string()),
            Bath::Model { label, model } => LabelledModel {
                label: label.clone(),
                model: serde_json::to_value(model).map_err(S::Error::custom)?,
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Bath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => Preset::from_str(&s).map(Bath::Preset).map_err(D::Error::custom),
            serde_json::Value::Object(_) => {
                let lm: LabelledModel = serde_json::from_value(v).map_err(D::Error::custom)?;
                let model: SpectralModel = serde_json::from_value(lm.model).map_err(D::Error::custom)?;
                Ok(Bath::Model { label: lm.label, model })
            }
            _ => Err(D::Error::custom("a bath is a preset name or a labelled spectral model")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n_range: Vec<u32>,
    pub schedules: Vec<ScheduleKind>,
    pub baths: Vec<Bath>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Effective by default, so that register-size factors from the
    /// topology do not enter the fitted exponents.
    #[serde(default = "default_topology")]
    pub topology: Topology,
    #[serde(default)]
    pub form: MatrixElementForm,
    #[serde(default)]
    pub preset_params: PresetParams,
    #[serde(default)]
    pub options: EngineOptions,
    /// Record wall-clock seconds per row (otherwise 0, keeping output reproducible).
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Report the coupling that would hold p1 at this value.
    #[serde(default)]
    pub target_p1: Option<f64>,
}

fn default_lambda() -> f64 {
    0.01
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_methods() -> Vec<Method> {
    vec![Method::FrequencyDomain]
}
fn default_topology() -> Topology {
    Topology::Effective
}
fn default_repetitions() -> usize {
    1
}

impl SweepSpec {
    pub fn new(n_range: Vec<u32>, schedules: Vec<ScheduleKind>, baths: Vec<Bath>) -> Self {
        SweepSpec {
            n_range,
            schedules,
            baths,
            lambda: default_lambda(),
            epsilon: default_epsilon(),
            methods: default_methods(),
            topology: default_topology(),
            form: MatrixElementForm::default(),
            preset_params: PresetParams::default(),
            options: EngineOptions::default(),
            timing: false,
            repetitions: 1,
            target_p1: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_range.is_empty() {
            return Err(Error::Invalid("n_range is empty".into()));
        }
        if self.n_range.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("n_range must be strictly increasing".into()));
        }
        if self.schedules.is_empty() || self.baths.is_empty() || self.methods.is_empty() {
            return Err(Error::Invalid("schedules, baths and methods must be non-empty".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::domain("epsilon", self.epsilon, "(0, 0.5)"));
        }
        if self.schedules.contains(&ScheduleKind::CustomTable) {
            return Err(Error::Invalid("sweeps need analytic schedules".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Invalid("repetitions must be at least 1".into()));
        }
        self.coupling().validate()?;
        for b in &self.baths {
            b.model(self.preset_params)?.validate()?;
        }
        Ok(())
    }

    pub fn coupling(&self) -> CouplingConfig {
        CouplingConfig {
            lambda: self.lambda,
            topology: self.topology,
            form: self.form,
        }
    }

    /// Rows in output order: n, then schedule, then bath, then method.
    pub fn combinations(&self) -> Vec<(u32, ScheduleKind, usize, Method)> {
        let mut out = Vec::new();
        for &n in &self.n_range {
            for &k in &self.schedules {
                for b in 0..self.baths.len() {
                    for &m in &self.methods {
                        out.push((n, k, b, m));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    #[serde(rename = "N")]
    pub n_states: u64,
    pub schedule: ScheduleKind,
    pub preset: String,
    pub method: Method,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub gap_min: f64,
    pub p1: f64,
    pub err: f64,
    pub seconds: f64,
    /// Reason for a failed row (p1 is NaN then).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub stderr: f64,
    pub r2: f64,
    /// ln of the prefactor.
    pub intercept: f64,
    pub points: usize,
}

/// Ordinary least squares y ~ X b by Householder-free modified Gram-Schmidt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    pub rss: f64,
    pub r2: f64,
}

pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let p = columns.len();
    let m = y.len();
    if p == 0 || columns.iter().any(|c| c.len() != m) {
        return Err(Error::Invalid("design matrix shape mismatch".into()));
    }
    if m <= p {
        return Err(Error::Invalid(format!("{m} points cannot fit {p} coefficients")));
    }
    let mut q: Vec<Vec<f64>> = columns.to_vec();
    let mut r = vec![vec![0.0; p]; p];
    for j in 0..p {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            q[j].iter_mut().zip(&qi).for_each(|(v, u)| *v -= d * u);
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = columns[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::Invalid("degenerate regressors".into()));
        }
        r[j][j] = norm;
        q[j].iter_mut().for_each(|v| *v /= norm);
    }
    let qty: Vec<f64> = q.iter().map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let mut b = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| r[i][k] * b[k]).sum();
        b[i] = (qty[i] - s) / r[i][i];
    }
    let resid: Vec<f64> = (0..m).map(|k| y[k] - (0..p).map(|j| columns[j][k] * b[j]).sum::<f64>()).collect();
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    let mean = y.iter().sum::<f64>() / m as f64;
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sigma2 = rss / (m - p) as f64;
    // diag((R^T R)^-1) = row norms of R^-1.
    let mut rinv = vec![vec![0.0; p]; p];
    for j in 0..p {
        rinv[j][j] = 1.0 / r[j][j];
        for i in (0..j).rev() {
            let s: f64 = (i + 1..=j).map(|k| r[i][k] * rinv[k][j]).sum();
            rinv[i][j] = -s / r[i][i];
        }
    }
    let stderr = (0..p).map(|i| (sigma2 * rinv[i].iter().map(|v| v * v).sum::<f64>()).sqrt()).collect();
    Ok(LinearFit {
        coefficients: b,
        stderr,
        rss,
        r2: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
    })
}

/// Slope of ln y against ln x.
pub fn fit_exponent(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() {
        return Err(Error::Invalid("xs and ys differ in length".into()));
    }
    if xs.len() < 4 {
        return Err(Error::Invalid(format!("an exponent fit needs at least 4 points, got {}", xs.len())));
    }
    if let Some(y) = ys.iter().find(|y| !(**y > 0.0) || !y.is_finite()) {
        return Err(Error::Invalid(format!("fit values must be positive, got {y}")));
    }
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Invalid(format!("fit abscissae must be positive, got {x}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mean = lx.iter().sum::<f64>() / lx.len() as f64;
    // Centred abscissa keeps the two columns orthogonal.
    let centred: Vec<f64> = lx.iter().map(|v| v - mean).collect();
    if centred.iter().all(|v| v.abs() < 1e-12 * mean.abs().max(1.0)) {
        return Err(Error::Invalid("all abscissae are equal".into()));
    }
    let fit = least_squares(&[vec![1.0; lx.len()], centred], &ly)?;
    Ok(PowerFit {
        exponent: fit.coefficients[1],
        stderr: fit.stderr[1],
        r2: fit.r2,
        intercept: fit.coefficients[0] - fit.coefficients[1] * mean,
        points: xs.len(),
    })
}

/// Coupling that would bring `p1` (computed at `lambda`) to `target`.
pub fn lambda_for_target(p1: f64, lambda: f64, target: f64) -> Result<f64> {
    if !(p1 > 0.0) || !(target > 0.0) || !(lambda > 0.0) {
        return Err(Error::Invalid("lambda_for_target needs positive p1, lambda and target".into()));
    }
    Ok(lambda * (target / p1).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFit {
    pub schedule: ScheduleKind,
    pub preset: String,
    pub method: Method,
    pub fit: PowerFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scalability {
    Scalable,
    Marginal,
    NonScalable,
}

impl fmt::Display for Scalability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scalability::Scalable => "scalable",
            Scalability::Marginal => "marginal",
            Scalability::NonScalable => "non-scalable",
        })
    }
}

/// Sub-leading diagnostics: does a ln n term explain the residuals, and what
/// are the exponents of p1 / n and p1 / n^2?
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyDiagnostics {
    pub rss_power: f64,
    pub rss_with_log_n: f64,
    /// Coefficient of ln n in ln p1 = a + b ln N + k ln n.
    pub log_n_power: f64,
    pub exponent_over_n: f64,
    pub exponent_over_n2: f64,
}

impl PolyDiagnostics {
    pub fn improves(&self) -> bool {
        self.rss_with_log_n < self.rss_power
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub schedule: ScheduleKind,
    pub preset: String,
    pub method: Method,
    pub exponent: f64,
    pub stderr: f64,
    pub class: Scalability,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly: Option<PolyDiagnostics>,
}

pub const MARGINAL_BAND: f64 = 0.1;

pub fn classify(exponent: f64) -> Scalability {
    if exponent < -MARGINAL_BAND {
        Scalability::Scalable
    } else if exponent > MARGINAL_BAND {
        Scalability::NonScalable
    } else {
        Scalability::Marginal
    }
}

fn poly_diagnostics(rows: &[&SweepRow]) -> Result<PolyDiagnostics> {
    let big_n: Vec<f64> = rows.iter().map(|r| r.n_states as f64).collect();
    let small_n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.p1).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let ones = vec![1.0; rows.len()];
    let ln_big: Vec<f64> = big_n.iter().map(|v| v.ln()).collect();
    let ln_small: Vec<f64> = small_n.iter().map(|v| v.ln()).collect();
    let pure = least_squares(&[ones.clone(), ln_big.clone()], &ly)?;
    let with = least_squares(&[ones, ln_big, ln_small], &ly)?;
    let over = |k: i32| -> Result<f64> {
        let y: Vec<f64> = ys.iter().zip(&small_n).map(|(y, n)| y / n.powi(k)).collect();
        Ok(fit_exponent(&big_n, &y)?.exponent)
    };
    Ok(PolyDiagnostics {
        rss_power: pure.rss,
        rss_with_log_n: with.rss,
        log_n_power: with.coefficients[2],
        exponent_over_n: over(1)?,
        exponent_over_n2: over(2)?,
    })
}

fn groups(rows: &[SweepRow]) -> BTreeMap<(String, String, String), Vec<&SweepRow>> {
    let mut g: BTreeMap<(String, String, String), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.failure.is_none() && r.p1 > 0.0 && r.p1.is_finite()) {
        g.entry((r.schedule.name().to_string(), r.preset.clone(), r.method.name().to_string())).or_default().push(r);
    }
    g
}

/// Exponent fits for every (schedule, bath, method) group with >= 4 usable rows.
pub fn fit_rows(rows: &[SweepRow]) -> Vec<GroupFit> {
    let mut out = Vec::new();
    for g in groups(rows).into_values() {
        let xs: Vec<f64> = g.iter().map(|r| r.n_states as f64).collect();
        let ys: Vec<f64> = g.iter().map(|r| r.p1).collect();
        if let Ok(fit) = fit_exponent(&xs, &ys) {
            out.push(GroupFit {
                schedule: g[0].schedule,
                preset: g[0].preset.clone(),
                method: g[0].method,
                fit,
            });
        }
    }
    out
}

/// Classifies every fitted group; marginal groups carry poly(n) diagnostics.
pub fn threshold_report(rows: &[SweepRow]) -> Result<Vec<Classification>> {
    let mut out = Vec::new();
    for g in groups(rows).into_values() {
        if g.len() < 4 {
            continue;
        }
        let xs: Vec<f64> = g.iter().map(|r| r.n_states as f64).collect();
        let ys: Vec<f64> = g.iter().map(|r| r.p1).collect();
        let fit = fit_exponent(&xs, &ys)?;
        let class = classify(fit.exponent);
        let poly = match class {
            Scalability::Marginal => Some(poly_diagnostics(&g)?),
            _ => None,
        };
        out.push(Classification {
            schedule: g[0].schedule,
            preset: g[0].preset.clone(),
            method: g[0].method,
            exponent: fit.exponent,
            stderr: fit.stderr,
            class,
            poly,
        });
    }
    if out.is_empty() {
        return Err(Error::Invalid("no group has the 4 rows needed for a fit".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaTarget {
    pub n: u32,
    pub schedule: ScheduleKind,
    pub preset: String,
    pub method: Method,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fits: Vec<GroupFit>,
    pub classifications: Vec<Classification>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub lambda_targets: Vec<LambdaTarget>,
}

fn run_row(spec: &SweepSpec, n: u32, kind: ScheduleKind, bath: &Bath, method: Method) -> SweepRow {
    let mut row = SweepRow {
        n,
        n_states: 1u64 << n.min(63),
        schedule: kind,
        preset: bath.label(),
        method,
        total_time: f64::NAN,
        gap_min: f64::NAN,
        p1: f64::NAN,
        err: f64::NAN,
        seconds: 0.0,
        failure: None,
    };
    let start = Instant::now();
    let result = (|| -> Result<(f64, f64, f64, f64)> {
        let inst = GroverInstance::balanced(n)?;
        let schedule = Schedule::build(kind, &inst, Target::Epsilon(spec.epsilon))?;
        let phase = PhaseIntegral::new(&schedule)?;
        let model = bath.model(spec.preset_params)?;
        let mut est = None;
        for _ in 0..spec.repetitions {
            est = Some(p1(method, &inst, &schedule, &phase, &spec.coupling(), &model, &spec.options)?);
        }
        let est = est.expect("at least one repetition");
        Ok((schedule.total_time(), inst.gap_min(), est.value, est.numerical_error))
    })();
    let elapsed = start.elapsed().as_secs_f64() / spec.repetitions.max(1) as f64;
    match result {
        Ok((tt, g, v, e)) => {
            row.total_time = tt;
            row.gap_min = g;
            row.p1 = v;
            row.err = e;
        }
        Err(e) => row.failure = Some(e.to_string()),
    }
    if spec.timing {
        row.seconds = elapsed;
    }
    row
}

/// Runs every combination (in parallel when `jobs` allows) and returns rows
/// in `SweepSpec::combinations` order. Row failures are recorded, not propagated.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let combos = spec.combinations();
    let compute = || -> Vec<SweepRow> {
        combos.par_iter().map(|&(n, k, b, m)| run_row(spec, n, k, &spec.baths[b], m)).collect()
    };
    let rows = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?
            .install(compute),
        None => compute(),
    };
    let fits = fit_rows(&rows);
    let classifications = threshold_report(&rows).unwrap_or_default();
    let lambda_targets = match spec.target_p1 {
        Some(t) => rows
            .iter()
            .filter_map(|r| {
                lambda_for_target(r.p1, spec.lambda, t).ok().map(|lambda| LambdaTarget {
                    n: r.n,
                    schedule: r.schedule,
                    preset: r.preset.clone(),
                    method: r.method,
                    lambda,
                })
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(SweepResult {
        rows,
        fits,
        classifications,
        lambda_targets,
    })
}

/// Shortest decimal that parses back to the same f64.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || (x.abs() >= 1e-4 && x.abs() < 1e15) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub const CSV_HEADER: [&str; 10] = ["n", "N", "schedule", "preset", "method", "T", "gap_min", "p1", "err", "seconds"];

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.n_states.to_string(),
            r.schedule.name().to_string(),
            r.preset.clone(),
            r.method.name().to_string(),
            format_float(r.total_time),
            format_float(r.gap_min),
            format_float(r.p1),
            format_float(r.err),
            format_float(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Invalid(format!("CSV is missing column '{name}'")))
    };
    let idx: Vec<usize> = CSV_HEADER.iter().map(|h| col(h)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(idx[k]).unwrap_or("").trim().to_string();
        let num = |k: usize| -> Result<f64> {
            field(k)
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("row {}: column '{}' is not a number", line + 2, CSV_HEADER[k])))
        };
        let n = num(0)? as u32;
        rows.push(SweepRow {
            n,
            n_states: num(1)? as u64,
            schedule: field(2).parse()?,
            preset: field(3),
            method: field(4).parse()?,
            total_time: num(5)?,
            gap_min: num(6)?,
            p1: num(7)?,
            err: num(8)?,
            seconds: num(9)?,
            failure: None,
        });
    }
    Ok(rows)
}

/// Gnuplot data: one index block per (schedule, bath, method) with columns N p1 err.
pub fn write_dat<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    let mut first = true;
    for ((sched, preset, method), g) in groups(rows) {
        if !first {
            writeln!(out, "\n")?;
        }
        first = false;
        writeln!(out, "# schedule={sched} preset={preset} method={method}")?;
        writeln!(out, "# N p1 err")?;
        for r in g {
            writeln!(out, "{} {} {}", r.n_states, format_float(r.p1), format_float(r.err))?;
        }
    }
    Ok(())
}

pub fn summary_json(result: &SweepResult) -> Result<String> {
    #[derive(Serialize)]
    struct Summary<'a> {
        rows: usize,
        failures: Vec<(usize, &'a str)>,
        fits: &'a [GroupFit],
        classifications: &'a [Classification],
        #[serde(skip_serializing_if = "<[_]>::is_empty")]
        lambda_targets: &'a [LambdaTarget],
    }
    let s = Summary {
        rows: result.rows.len(),
        failures: result.rows.iter().enumerate().filter_map(|(i, r)| r.failure.as_deref().map(|f| (i, f))).collect(),
        fits: &result.fits,
        classifications: &result.classifications,
        lambda_targets: &result.lambda_targets,
    };
    Ok(serde_json::to_string_pretty(&s)?)
}
