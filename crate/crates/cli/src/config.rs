//! Run configuration: a sweep specification plus output plumbing, read from
//! one JSON document. Precedence is defaults < config file < command-line
//! flags < ADVS_BUDGET (which can only lower the evaluation budget).

use std::path::{Path, PathBuf};

use advs_core::{Method, SweepSpec};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::{Failure, Format};

pub const BUDGET_ENV: &str = "ADVS_BUDGET";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sweep: SweepSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
    /// Reserved; the pipeline has no randomness, so only 0 is accepted.
    pub seed: u64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Plumbing {
    out: Option<PathBuf>,
    format: Option<Format>,
    jobs: Option<usize>,
    #[serde(default)]
    seed: u64,
}

const PLUMBING_KEYS: [&str; 4] = ["out", "format", "jobs", "seed"];

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, Failure> {
        let value: Value = serde_json::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))?;
        let Value::Object(mut fields) = value else {
            return Err(Failure::Config("config must be a JSON object".into()));
        };
        let mut plumbing = Map::new();
        for key in PLUMBING_KEYS {
            if let Some(v) = fields.remove(key) {
                plumbing.insert(key.to_string(), v);
            }
        }
        let plumbing: Plumbing =
            serde_json::from_value(Value::Object(plumbing)).map_err(|e| Failure::Config(format!("config: {e}")))?;
        let sweep: SweepSpec =
            serde_json::from_value(Value::Object(fields)).map_err(|e| Failure::Config(format!("config: {e}")))?;
        if plumbing.seed != 0 {
            return Err(Failure::Config("seed is reserved and must be 0".into()));
        }
        Ok(RunConfig {
            sweep,
            out: plumbing.out,
            format: plumbing.format.unwrap_or_default(),
            jobs: plumbing.jobs,
            seed: 0,
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn apply(&mut self, flags: &Overrides) -> Result<(), Failure> {
        if let Some(n) = &flags.n {
            self.sweep.n_range = n.clone();
        }
        if let Some(m) = &flags.methods {
            self.sweep.methods = m.clone();
        }
        if let Some(f) = flags.format {
            self.format = f;
        }
        if let Some(o) = &flags.out {
            self.out = Some(o.clone());
        }
        if flags.jobs.is_some() {
            self.jobs = flags.jobs;
        }
        if let Some(cap) = budget_from_env()? {
            let b = &mut self.sweep.options.max_evaluations;
            *b = (*b).min(cap);
        }
        self.sweep.validate().map_err(|e| Failure::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<Vec<u32>>,
    pub methods: Option<Vec<Method>>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub fn budget_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|b| *b >= 1.0 && b.is_finite())
            .map(|b| Some(b as usize))
            .ok_or_else(|| Failure::Config(format!("{BUDGET_ENV} must be a positive number, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

/// "8", "6,8,10" or "6..14" (inclusive).
pub fn parse_n_list(s: &str) -> Result<Vec<u32>, String> {
    let bad = |_| format!("cannot read '{s}' as a qubit count, list or a..b range");
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(bad)?;
        let b: u32 = b.trim().parse().map_err(bad)?;
        if b < a {
            return Err(format!("empty range {s}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(bad)).collect()
}

/// "all" or a comma list of method names.
pub fn parse_methods(s: &str) -> Result<Vec<Method>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    s.split(',').map(|m| m.trim().parse::<Method>().map_err(|e| e.to_string())).collect()
}
