//! Second-order failure probability <P1(T)> by four routes.
//!
//! With M_mu(t) = e^{-i Phi(t)} m_mu(s(t)) and C(tau) = int e^{-i w tau} f(w) dw:
//!
//! * time domain:      lambda^2 sum W_{mu nu} int int C(t1 - t2) M_mu(t1) M_nu*(t2)
//! * frequency domain: lambda^2 sum W_{mu nu} int f(w) conj(A_mu(w)) A_nu(w) dw,
//!   A_mu(w) = int e^{i (w t + Phi)} m_mu dt
//! * Markovian:        lambda^2 A sum W_{mu nu} int m_mu m_nu dt
//! * asymptotic:       near-gap bound plus stationary-phase saddle term.
//!
//! The two exact routes sample time on a uniform grid (Gregory weights) and
//! use chirp-z / FFT correlation, so a run costs O(K log K) in the number of
//! time steps K ~ T (1 + bandwidth) / dphi.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{channel_profile, Channel, GroverInstance, MatrixElementForm};
use crate::integrators::adaptive::{integrate_pieces, Tolerance};
use crate::integrators::chirpz::{chirp_z, cross_correlation, direct_sum};
use crate::integrators::gregory::{end_deltas, gregory_weights};
use crate::integrators::saddle::find_saddles;
use crate::phase::PhaseIntegral;
use crate::schedule::{Schedule, ScheduleKind};
use crate::spectral::{active_channels, correlation_kernel, effective_weight, ChannelWeights, CorrelationKernel, CouplingConfig, FrequencyRule, SpectralModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TimeDomain,
    FrequencyDomain,
    Markovian,
    Asymptotic,
    /// Trapezoid double sum over exactly propagated elements (validation only).
    BruteForce,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::TimeDomain, Method::FrequencyDomain, Method::Markovian, Method::Asymptotic];

    pub fn name(self) -> &'static str {
        match self {
            Method::TimeDomain => "time",
            Method::FrequencyDomain => "freq",
            Method::Markovian => "markov",
            Method::Asymptotic => "asymptotic",
            Method::BruteForce => "brute",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "time" | "time_domain" => Ok(Method::TimeDomain),
            "freq" | "frequency" | "frequency_domain" => Ok(Method::FrequencyDomain),
            "markov" | "markovian" => Ok(Method::Markovian),
            "asymptotic" => Ok(Method::Asymptotic),
            "brute" | "brute_force" => Ok(Method::BruteForce),
            _ => Err(Error::Invalid(format!("unknown method '{s}'"))),
        }
    }
}

/// Separate pieces of the asymptotic estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTerms {
    /// lambda^2 N int_{-g}^{g} f, the phase-free bound near the gap.
    pub near_gap: f64,
    /// Saddle-point contribution from |omega| above the near-gap band.
    pub saddle: f64,
    /// Direct quadrature over the near-threshold band (hybrid variant only).
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureEstimate {
    pub value: f64,
    pub method: Method,
    pub numerical_error: f64,
    /// Contribution of each channel pair (weights included).
    pub breakdown: ChannelWeights,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<AsymptoticTerms>,
    /// Set when value > 0.5: second order has left its range of validity.
    pub unreliable: bool,
    pub evaluations: usize,
}

impl FailureEstimate {
    fn new(method: Method, breakdown: ChannelWeights, numerical_error: f64, evaluations: usize) -> Self {
        let value = breakdown.total();
        FailureEstimate {
            value,
            method,
            numerical_error,
            breakdown,
            terms: None,
            unreliable: value > 0.5,
            evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticVariant {
    /// Saddle term from the gap minimum upwards.
    #[default]
    Estimate,
    /// Direct quadrature on gap_min <= |omega| <= 3 gap_min, saddle term above.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineOptions {
    /// Phase advance per time step and per frequency step (radians).
    pub dphi: f64,
    /// Relative tolerance of adaptive one-dimensional quadratures.
    pub rel_tol: f64,
    /// Cap on integrand evaluations (time samples, frequency nodes, ...).
    pub max_evaluations: usize,
    /// Repeat exact engines at double step size to estimate the error.
    pub error_check: bool,
    pub asymptotic: AsymptoticVariant,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            dphi: 0.2,
            rel_tol: 1e-10,
            max_evaluations: 200_000_000,
            error_check: true,
            asymptotic: AsymptoticVariant::Estimate,
        }
    }
}

impl EngineOptions {
    fn check(&self) -> Result<()> {
        if !(self.dphi > 0.0 && self.dphi <= 1.0) {
            return Err(Error::domain("dphi", self.dphi, "(0, 1]"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::domain("rel_tol", self.rel_tol, "(0, inf)"));
        }
        Ok(())
    }
}

/// Uniform time grid with the schedule and phase evaluated on it.
struct Grid {
    dt: f64,
    s: Vec<f64>,
    phi: Vec<f64>,
}

impl Grid {
    fn new(schedule: &Schedule, phase: &PhaseIntegral, steps: usize) -> Grid {
        let tt = schedule.total_time();
        let dt = tt / steps as f64;
        let (s, phi) = (0..=steps)
            .map(|j| {
                let t = if j == steps { tt } else { j as f64 * dt };
                (schedule.s_at(t), phase.eval(t))
            })
            .unzip();
        Grid { dt, s, phi }
    }

    fn len(&self) -> usize {
        self.s.len()
    }

    fn profile(&self, n_states: f64, ch: Channel, form: MatrixElementForm) -> Vec<f64> {
        self.s.iter().map(|&s| channel_profile(n_states, ch, s, form)).collect()
    }
}

fn time_steps(schedule: &Schedule, bandwidth: f64, dphi: f64) -> usize {
    let rate = 1.0 + bandwidth;
    ((schedule.total_time() * rate / dphi).ceil() as usize).max(64)
}

fn check_budget(needed: usize, opts: &EngineOptions) -> Result<()> {
    if needed > opts.max_evaluations {
        Err(Error::Budget {
            budget: opts.max_evaluations,
        })
    } else {
        Ok(())
    }
}

fn zero_estimate(method: Method) -> FailureEstimate {
    FailureEstimate::new(method, ChannelWeights::from_fn(|_, _| 0.0), 0.0, 0)
}

fn pair_weights(coupling: &CouplingConfig, instance: &GroverInstance, model: &SpectralModel) -> ChannelWeights {
    let l2 = coupling.lambda * coupling.lambda;
    let w = effective_weight(coupling, instance, model);
    ChannelWeights::from_fn(|mu, nu| l2 * w.get(mu, nu))
}

fn check_inputs(instance: &GroverInstance, schedule: &Schedule, coupling: &CouplingConfig) -> Result<()> {
    coupling.validate()?;
    if schedule.n_qubits() != instance.n_qubits() {
        return Err(Error::Invalid(format!(
            "schedule built for {} qubits used with a {}-qubit instance",
            schedule.n_qubits(),
            instance.n_qubits()
        )));
    }
    Ok(())
}

/// int_0^T m_mu m_nu dt for each pair, integrated in s with dt = ds / s_dot.
fn markov_integrals(schedule: &Schedule, form: MatrixElementForm, pairs: &ChannelWeights, rel_tol: f64, budget: usize) -> Result<(ChannelWeights, f64, usize)> {
    let n_states = schedule.n_states();
    let w = n_states.sqrt().recip();
    let mut breaks: Vec<f64> = match schedule.kind() {
        ScheduleKind::CustomTable => schedule.nodes().map(|(_, s)| s).collect(),
        _ => vec![0.0, 0.5 - 10.0 * w, 0.5 - w, 0.5, 0.5 + w, 0.5 + 10.0 * w, 1.0],
    };
    breaks.retain(|s| (0.0..=1.0).contains(s));
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let mut err = 0.0;
    let mut evals = 0;
    let mut out = ChannelWeights::from_fn(|_, _| 0.0);
    for (mu, nu) in ChannelWeights::pairs() {
        if pairs.get(mu, nu) == 0.0 {
            continue;
        }
        let f = |s: f64| channel_profile(n_states, mu, s, form) * channel_profile(n_states, nu, s, form) / schedule.rate_at_s(s);
        let (v, e, n) = integrate_pieces(f, &breaks, Tolerance::relative(rel_tol), budget)?;
        set(&mut out, mu, nu, v);
        err += e;
        evals += n;
    }
    Ok((out, err, evals))
}

fn set(w: &mut ChannelWeights, mu: Channel, nu: Channel, v: f64) {
    match (mu, nu) {
        (Channel::X, Channel::X) => w.xx = v,
        (Channel::X, Channel::Z) => w.xz = v,
        (Channel::Z, Channel::X) => w.zx = v,
        (Channel::Z, Channel::Z) => w.zz = v,
        _ => {}
    }
}

fn weighted(integrals: &ChannelWeights, weights: &ChannelWeights) -> ChannelWeights {
    ChannelWeights::from_fn(|mu, nu| integrals.get(mu, nu) * weights.get(mu, nu))
}

/// Closed-form engine for a delta-correlated bath of strength A.
pub fn p1_markovian(instance: &GroverInstance, schedule: &Schedule, coupling: &CouplingConfig, strength: f64, channels: ChannelWeights, opts: &EngineOptions) -> Result<FailureEstimate> {
    check_inputs(instance, schedule, coupling)?;
    opts.check()?;
    let model = SpectralModel::markovian(strength).with_channel_weights(channels);
    model.validate()?;
    let weights = pair_weights(coupling, instance, &model);
    let weights = ChannelWeights::from_fn(|mu, nu| strength * weights.get(mu, nu));
    let (ints, err, evals) = markov_integrals(schedule, coupling.form, &weights, opts.rel_tol, opts.max_evaluations)?;
    let scale = weights.xx.abs().max(weights.zz.abs()).max(weights.xz.abs()).max(weights.zx.abs());
    Ok(FailureEstimate::new(Method::Markovian, weighted(&ints, &weights), err * scale, evals))
}

/// Delta kernel inside the time-domain engine: the diagonal line integral,
/// integrated directly in t.
fn delta_time_domain(instance: &GroverInstance, schedule: &Schedule, coupling: &CouplingConfig, model: &SpectralModel, strength: f64, opts: &EngineOptions) -> Result<FailureEstimate> {
    let weights = pair_weights(coupling, instance, model);
    let n_states = instance.size();
    let tt = schedule.total_time();
    let mut out = ChannelWeights::from_fn(|_, _| 0.0);
    let (mut err, mut evals) = (0.0, 0);
    let mid = schedule.t_of_s(0.5)?;
    let width = schedule.t_of_s((0.5 + 10.0 / n_states.sqrt()).min(1.0))? - mid;
    let mut breaks = vec![0.0, (mid - width).max(0.0), mid, (mid + width).min(tt), tt];
    breaks.dedup();
    for (mu, nu) in ChannelWeights::pairs() {
        let w = weights.get(mu, nu);
        if w == 0.0 {
            continue;
        }
        let form = coupling.form;
        let f = |t: f64| {
            let (s, _) = schedule.state_at(t);
            channel_profile(n_states, mu, s, form) * channel_profile(n_states, nu, s, form)
        };
        let (v, e, n) = integrate_pieces(f, &breaks, Tolerance::relative(opts.rel_tol), opts.max_evaluations)?;
        set(&mut out, mu, nu, strength * w * v);
        err += strength * w.abs() * e;
        evals += n;
    }
    Ok(FailureEstimate::new(Method::TimeDomain, out, err, evals))
}

/// Frequency-domain engine.
pub fn p1_frequency_domain(
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    coupling: &CouplingConfig,
    model: &SpectralModel,
    opts: &EngineOptions,
) -> Result<FailureEstimate> {
    check_inputs(instance, schedule, coupling)?;
    opts.check()?;
    model.validate()?;
    if let Some(a) = model.markovian_strength() {
        // Flat spectrum: Parseval turns the frequency integral into the
        // diagonal time integral exactly.
        let mut e = delta_time_domain(instance, schedule, coupling, model, a, opts)?;
        e.method = Method::FrequencyDomain;
        return Ok(e);
    }
    let weights = pair_weights(coupling, instance, model);
    if coupling.lambda == 0.0 {
        return Ok(zero_estimate(Method::FrequencyDomain));
    }
    let (fine, evals) = frequency_core(instance, schedule, phase, coupling.form, model, &weights, opts.dphi, opts)?;
    let (err, evals) = if opts.error_check {
        let (coarse, e2) = frequency_core(instance, schedule, phase, coupling.form, model, &weights, 2.0 * opts.dphi, opts)?;
        ((fine.total() - coarse.total()).abs(), evals + e2)
    } else {
        (0.0, evals)
    };
    Ok(FailureEstimate::new(Method::FrequencyDomain, fine, err, evals))
}

#[allow(clippy::too_many_arguments)]
fn frequency_core(
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    form: MatrixElementForm,
    model: &SpectralModel,
    weights: &ChannelWeights,
    dphi: f64,
    opts: &EngineOptions,
) -> Result<(ChannelWeights, usize)> {
    let steps = time_steps(schedule, model.bandwidth(), dphi);
    let rule = model.frequency_rule(dphi / schedule.total_time())?;
    frequency_sum(instance, schedule, phase, form, &rule, weights, steps, opts)
}

#[allow(clippy::too_many_arguments)]
fn frequency_sum(
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    form: MatrixElementForm,
    rule: &FrequencyRule,
    weights: &ChannelWeights,
    steps: usize,
    opts: &EngineOptions,
) -> Result<(ChannelWeights, usize)> {
    let channels = active_channels(weights);
    let cost = (steps + 1) * channels.len() + rule.len() * (1 + channels.len());
    check_budget(cost, opts)?;
    let grid = Grid::new(schedule, phase, steps);
    let g = gregory_weights(grid.len());
    let n_states = instance.size();

    // Amplitudes per channel on every rule node, segment by segment.
    let mut amps: Vec<Vec<Complex64>> = Vec::new();
    for &ch in &channels {
        let m = grid.profile(n_states, ch, form);
        let x: Vec<Complex64> = (0..grid.len()).map(|j| Complex64::from_polar(g[j] * grid.dt * m[j], grid.phi[j])).collect();
        let mut a = Vec::with_capacity(rule.len());
        for seg in &rule.segments {
            a.extend(chirp_z(&x, 0.0, grid.dt, seg.start, seg.step, seg.weights.len()));
        }
        for &(omega, _) in &rule.nodes {
            a.push(direct_sum(&x, 0.0, grid.dt, omega));
        }
        amps.push(a);
    }
    let rule_w: Vec<f64> = rule.segments.iter().flat_map(|s| s.weights.iter().copied()).chain(rule.nodes.iter().map(|n| n.1)).collect();
    let idx = |ch: Channel| channels.iter().position(|&c| c == ch);
    let mut out = ChannelWeights::from_fn(|_, _| 0.0);
    for (mu, nu) in ChannelWeights::pairs() {
        let w = weights.get(mu, nu);
        let (Some(i), Some(j)) = (idx(mu), idx(nu)) else { continue };
        if w == 0.0 {
            continue;
        }
        let v: f64 = rule_w.iter().zip(amps[i].iter().zip(&amps[j])).map(|(r, (a, b))| r * (a.conj() * b).re).sum();
        set(&mut out, mu, nu, w * v);
    }
    Ok((out, cost))
}

/// Time-domain engine; the kernel is tabulated on the engine's own grid.
pub fn p1_time_domain(
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    coupling: &CouplingConfig,
    model: &SpectralModel,
    opts: &EngineOptions,
) -> Result<FailureEstimate> {
    check_inputs(instance, schedule, coupling)?;
    opts.check()?;
    model.validate()?;
    if let Some(a) = model.markovian_strength() {
        return delta_time_domain(instance, schedule, coupling, model, a, opts);
    }
    let weights = pair_weights(coupling, instance, model);
    if coupling.lambda == 0.0 {
        return Ok(zero_estimate(Method::TimeDomain));
    }
    let run = |dphi: f64| -> Result<(ChannelWeights, usize)> {
        let steps = time_steps(schedule, model.bandwidth(), dphi);
        let dt = schedule.total_time() / steps as f64;
        check_budget(4 * (steps + 1), opts)?;
        let kernel = correlation_kernel(model, schedule.total_time(), dt)?;
        time_core(instance, schedule, phase, coupling.form, &kernel, &weights, steps, opts)
    };
    let (fine, evals) = run(opts.dphi)?;
    let (err, evals) = if opts.error_check {
        let (coarse, e2) = run(2.0 * opts.dphi)?;
        ((fine.total() - coarse.total()).abs(), evals + e2)
    } else {
        (0.0, evals)
    };
    Ok(FailureEstimate::new(Method::TimeDomain, fine, err, evals))
}

/// Time-domain engine with a caller-supplied kernel, evaluated at the lags of
/// a uniform grid of `steps` intervals.
#[allow(clippy::too_many_arguments)]
pub fn p1_time_domain_with_kernel(
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    coupling: &CouplingConfig,
    kernel: &CorrelationKernel,
    channels: ChannelWeights,
    steps: usize,
    opts: &EngineOptions,
) -> Result<FailureEstimate> {
    check_inputs(instance, schedule, coupling)?;
    opts.check()?;
    let tt = schedule.total_time();
    if kernel.tau_max() < tt * (1.0 - 1e-12) {
        return Err(Error::KernelRange {
            needed: tt,
            available: kernel.tau_max(),
        });
    }
    let model = SpectralModel::power_law(0.0, 1.0).with_channel_weights(channels);
    if let CorrelationKernel::Delta { strength } = kernel {
        let m = SpectralModel::markovian(*strength).with_channel_weights(channels);
        return delta_time_domain(instance, schedule, coupling, &m, *strength, opts);
    }
    let weights = pair_weights(coupling, instance, &model);
    if coupling.lambda == 0.0 {
        return Ok(zero_estimate(Method::TimeDomain));
    }
    let (v, evals) = time_core(instance, schedule, phase, coupling.form, kernel, &weights, steps.max(16), opts)?;
    Ok(FailureEstimate::new(Method::TimeDomain, v, kernel.error_estimate() * tt * tt, evals))
}

#[allow(clippy::too_many_arguments)]
fn time_core(
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    form: MatrixElementForm,
    kernel: &CorrelationKernel,
    weights: &ChannelWeights,
    steps: usize,
    opts: &EngineOptions,
) -> Result<(ChannelWeights, usize)> {
    let channels = active_channels(weights);
    let cost = (steps + 1) * (channels.len() + 1);
    check_budget(cost, opts)?;
    let grid = Grid::new(schedule, phase, steps);
    let k_len = grid.len();
    let c: Vec<Complex64> = (0..k_len).map(|k| kernel.eval(k as f64 * grid.dt)).collect::<Result<_>>()?;
    let n_states = instance.size();
    let series: Vec<Vec<Complex64>> = channels
        .iter()
        .map(|&ch| {
            let m = grid.profile(n_states, ch, form);
            (0..k_len).map(|j| Complex64::from_polar(m[j], -grid.phi[j])).collect()
        })
        .collect();
    let idx = |ch: Channel| channels.iter().position(|&c| c == ch);
    let g = gregory_weights(k_len);
    let mut out = ChannelWeights::from_fn(|_, _| 0.0);
    for (mu, nu) in ChannelWeights::pairs() {
        let w = weights.get(mu, nu);
        let (Some(i), Some(j)) = (idx(mu), idx(nu)) else { continue };
        if w == 0.0 {
            continue;
        }
        let r_mn = lag_products(&series[i], &series[j], grid.dt);
        let r_nm = if i == j { r_mn.clone() } else { lag_products(&series[j], &series[i], grid.dt) };
        let v: f64 = (0..k_len).map(|k| g[k] * grid.dt * (c[k] * r_mn[k] + (c[k] * r_nm[k]).conj()).re).sum();
        set(&mut out, mu, nu, w * v);
    }
    Ok((out, cost))
}

/// R(k dt) = int_0^{T - k dt} a(t + k dt) conj(b(t)) dt with Gregory weights
/// on each shortened interval: FFT correlation plus end corrections.
fn lag_products(a: &[Complex64], b: &[Complex64], dt: f64) -> Vec<Complex64> {
    let n = a.len();
    let mut r = cross_correlation(a, b);
    let last = n - 1;
    for (k, rk) in r.iter_mut().enumerate() {
        let points = n - k;
        let deltas = end_deltas(points);
        let mut corr = Complex64::new(0.0, 0.0);
        for (j, d) in deltas.iter().enumerate() {
            if j >= points {
                break;
            }
            corr += a[j + k] * b[j].conj() * *d;
            corr += a[last - j] * b[last - k - j].conj() * *d;
        }
        *rk = (*rk + corr) * dt;
    }
    r
}

/// Two-regime estimate: phase-free bound below the gap minimum plus the
/// stationary-phase saddle contribution above it.
pub fn p1_asymptotic(
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    coupling: &CouplingConfig,
    model: &SpectralModel,
    opts: &EngineOptions,
) -> Result<FailureEstimate> {
    check_inputs(instance, schedule, coupling)?;
    opts.check()?;
    model.validate()?;
    if !model.is_flat() {
        model.frequency_rule(1.0)?;
    }
    let weights = pair_weights(coupling, instance, model);
    let total_w = weights.total();
    let n_states = instance.size();
    let g = instance.gap_min();
    let tol = Tolerance::relative(opts.rel_tol.max(1e-12));
    let budget = opts.max_evaluations;
    let f = |w: f64| model.f_eval(w);

    let (near, e1, n1) = integrate_pieces(f, &[-g, 0.0, g], tol, budget)?;
    let near_gap = n_states * near;

    let lower = match opts.asymptotic {
        AsymptoticVariant::Estimate => g,
        AsymptoticVariant::Hybrid => (3.0 * g).min(1.0),
    };
    let upper = model.bandwidth().min(1.0);
    let saddle_integrand = |w: f64| -> f64 {
        let Ok(sp) = find_saddles(instance, schedule, -w) else { return f64::NAN };
        if sp.is_empty() {
            return 0.0;
        }
        let inv_rate = sp.iter().map(|p| 1.0 / p.s_dot).sum::<f64>() / sp.len() as f64;
        f(-w) * inv_rate / (w * w)
    };
    let (saddle_int, e2, n2) = if upper > lower {
        let mid = (lower * upper).sqrt();
        integrate_pieces(saddle_integrand, &[lower, mid, upper], tol, budget)?
    } else {
        (0.0, 0.0, 0)
    };
    let saddle = PI / (2.0 * n_states) * saddle_int;

    let (threshold, e3, n3) = match opts.asymptotic {
        AsymptoticVariant::Estimate => (0.0, 0.0, 0),
        AsymptoticVariant::Hybrid => {
            // Direct frequency-domain quadrature restricted to the band.
            let band = model.frequency_rule_clipped(opts.dphi / schedule.total_time(), -lower, -g)?;
            let unit = ChannelWeights::from_fn(|mu, nu| if weights.get(mu, nu) != 0.0 { 1.0 } else { 0.0 });
            let steps = time_steps(schedule, model.bandwidth().min(1.0), opts.dphi);
            let (v, n) = frequency_sum(instance, schedule, phase, coupling.form, &band, &unit, steps, opts)?;
            // Per-pair direct values; the first active pair represents them all.
            let per = ChannelWeights::pairs().iter().map(|&(mu, nu)| v.get(mu, nu)).find(|x| *x != 0.0).unwrap_or(0.0);
            (per, 0.0, n)
        }
    };

    let per_unit = near_gap + saddle + threshold;
    let breakdown = ChannelWeights::from_fn(|mu, nu| weights.get(mu, nu) * per_unit);
    let err = total_w.abs() * (n_states * e1 + PI / (2.0 * n_states) * e2 + e3);
    let mut est = FailureEstimate::new(Method::Asymptotic, breakdown, err, n1 + n2 + n3);
    est.terms = Some(AsymptoticTerms {
        near_gap: total_w * near_gap,
        saddle: total_w * saddle,
        threshold: total_w * threshold,
    });
    Ok(est)
}

/// lambda^2 f(-gap_min) / gap_min, independent of the schedule.
pub fn p1_scaling_law(instance: &GroverInstance, model: &SpectralModel, coupling: &CouplingConfig) -> Result<f64> {
    coupling.validate()?;
    model.validate()?;
    let g = instance.gap_min();
    let f = model.f_eval(-g);
    if !f.is_finite() {
        return Err(Error::InfraredDivergence { p: f64::NEG_INFINITY });
    }
    Ok(pair_weights(coupling, instance, model).total() * f / g)
}

/// Dispatch by method; `Markovian` requires a delta-correlated model.
pub fn p1(
    method: Method,
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    coupling: &CouplingConfig,
    model: &SpectralModel,
    opts: &EngineOptions,
) -> Result<FailureEstimate> {
    match method {
        Method::TimeDomain => p1_time_domain(instance, schedule, phase, coupling, model, opts),
        Method::FrequencyDomain => p1_frequency_domain(instance, schedule, phase, coupling, model, opts),
        Method::Asymptotic => p1_asymptotic(instance, schedule, phase, coupling, model, opts),
        Method::Markovian => match model.markovian_strength() {
            Some(a) => p1_markovian(instance, schedule, coupling, a, model.channel_weights, opts),
            None => Err(Error::Invalid("the Markovian engine needs a delta-correlated (markovian) bath".into())),
        },
        Method::BruteForce => {
            let tt = schedule.total_time();
            let intervals = time_steps(schedule, model.bandwidth().min(1e3), 0.1);
            check_budget(intervals, opts)?;
            let kernel = match model.markovian_strength() {
                Some(a) => CorrelationKernel::Delta { strength: a },
                None => correlation_kernel(model, tt, tt / intervals as f64)?,
            };
            crate::oracle::p1_brute_double_integral(instance, schedule, coupling, &kernel, model.channel_weights, intervals)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::Target;
    use crate::spectral::{SpectralKind, Topology};
    use proptest::prelude::*;

    struct Setup {
        inst: GroverInstance,
        sched: Schedule,
        phase: PhaseIntegral,
    }

    fn setup(n: u32, kind: ScheduleKind, eps: f64) -> Setup {
        let inst = GroverInstance::balanced(n).unwrap();
        let sched = Schedule::build(kind, &inst, Target::Epsilon(eps)).unwrap();
        let phase = PhaseIntegral::new(&sched).unwrap();
        Setup { inst, sched, phase }
    }

    fn coupling(lambda: f64) -> CouplingConfig {
        CouplingConfig::new(lambda, Topology::Effective)
    }

    fn run(m: Method, s: &Setup, c: &CouplingConfig, model: &SpectralModel) -> FailureEstimate {
        p1(m, &s.inst, &s.sched, &s.phase, c, model, &EngineOptions::default()).unwrap()
    }

    #[test]
    fn zero_coupling_is_zero_everywhere() {
        let s = setup(5, ScheduleKind::GapSquared, 0.1);
        let c = coupling(0.0);
        let smooth = SpectralModel::power_law(2.0, 1.0);
        for m in [Method::TimeDomain, Method::FrequencyDomain, Method::Asymptotic] {
            assert_eq!(run(m, &s, &c, &smooth).value, 0.0, "{m}");
        }
        assert_eq!(run(Method::Markovian, &s, &c, &SpectralModel::markovian(1.0)).value, 0.0);
    }

    // m_x(s) and m_z(1 - s) coincide, and every built-in schedule is
    // symmetric under t -> T - t, so x-only and z-only baths fail equally.
    #[test]
    fn x_and_z_channels_mirror_each_other() {
        let only = |xx: f64, zz: f64| ChannelWeights { xx, xz: 0.0, zx: 0.0, zz };
        for kind in ScheduleKind::ANALYTIC {
            let s = setup(7, kind, 0.1);
            let base = SpectralModel::power_law(1.0, 1.0);
            let x = run(Method::FrequencyDomain, &s, &coupling(0.01), &base.clone().with_channel_weights(only(1.0, 0.0))).value;
            let z = run(Method::FrequencyDomain, &s, &coupling(0.01), &base.with_channel_weights(only(0.0, 1.0))).value;
            assert!((x - z).abs() < 1e-8 * x, "{kind}: {x} vs {z}");
        }
    }

    #[test]
    fn every_engine_scales_as_lambda_squared() {
        let s = setup(6, ScheduleKind::GapLinear, 0.1);
        let model = SpectralModel::power_law(1.0, 1.0);
        for m in [Method::TimeDomain, Method::FrequencyDomain, Method::Asymptotic] {
            let a = run(m, &s, &coupling(0.01), &model).value;
            let b = run(m, &s, &coupling(0.02), &model).value;
            assert!((b / a - 4.0).abs() < 1e-12, "{m}: {}", b / a);
        }
        let mk = SpectralModel::markovian(0.3);
        let a = run(Method::Markovian, &s, &coupling(0.01), &mk).value;
        let b = run(Method::Markovian, &s, &coupling(0.02), &mk).value;
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn time_and_frequency_domain_agree() {
        let model = SpectralModel::new(SpectralKind::PowerLaw {
            exponent: 1.0,
            prefactor: 0.5,
            omega_min: 0.0,
            omega_max: 1.0,
            theta: Some(0.2),
        })
        .with_channel_weights(ChannelWeights::ALL);
        for kind in ScheduleKind::ANALYTIC {
            let s = setup(5, kind, 0.05);
            let c = CouplingConfig::new(0.01, Topology::CommonBath);
            let td = run(Method::TimeDomain, &s, &c, &model);
            let fd = run(Method::FrequencyDomain, &s, &c, &model);
            assert!((td.value - fd.value).abs() < 1e-6 * fd.value, "{kind:?}: {} vs {}", td.value, fd.value);
            assert!(td.value > 0.0);
        }
    }

    #[test]
    fn delta_kernel_in_time_domain_is_the_markovian_engine() {
        for kind in ScheduleKind::ANALYTIC {
            let s = setup(7, kind, 0.1);
            let model = SpectralModel::markovian(0.7);
            let c = coupling(0.05);
            let td = run(Method::TimeDomain, &s, &c, &model).value;
            let mk = run(Method::Markovian, &s, &c, &model).value;
            let fd = run(Method::FrequencyDomain, &s, &c, &model).value;
            assert!((td - mk).abs() < 1e-8 * mk, "{kind:?}: {td} {mk}");
            assert!((fd - mk).abs() < 1e-8 * mk);
        }
    }

    #[test]
    fn markovian_uniform_matches_riemann_sum() {
        // p1 = lambda^2 A T int_0^1 m_x(s)^2 ds for the uniform schedule.
        let s = setup(4, ScheduleKind::Uniform, 0.1);
        let n = s.inst.size();
        let steps = 200_000;
        let h = 1.0 / steps as f64;
        let sum: f64 = (0..steps)
            .map(|k| {
                let x = (k as f64 + 0.5) * h;
                let m = x / (n.sqrt() * crate::grover::gap_raw(n, x));
                m * m * h
            })
            .sum();
        let want = 0.01f64.powi(2) * 2.0 * s.sched.total_time() * sum;
        let got = run(Method::Markovian, &s, &coupling(0.01), &SpectralModel::markovian(2.0)).value;
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn frequency_domain_ignores_weight_above_the_gap_band() {
        // Flat infrared spectrum: the resonant part dominates p1.
        let s = setup(8, ScheduleKind::GapSquared, 0.1);
        let base = SpectralModel::power_law(0.0, 1.0);
        let extra = base.clone().plus(SpectralKind::Box { lo: 1.0, hi: 2.0, level: 1.0 });
        let c = coupling(0.01);
        let a = run(Method::FrequencyDomain, &s, &c, &base).value;
        let b = run(Method::FrequencyDomain, &s, &c, &extra).value;
        assert!(b >= a && (b - a) < 1e-4 * a, "{a} {b}");
    }

    #[test]
    fn asymptotic_terms_add_up() {
        let s = setup(10, ScheduleKind::GapSquared, 0.1);
        let e = run(Method::Asymptotic, &s, &coupling(0.01), &SpectralModel::power_law(2.0, 1.0));
        let t = e.terms.unwrap();
        assert!(((t.near_gap + t.saddle) - e.value).abs() < 1e-15 * e.value);
        assert_eq!(t.threshold, 0.0);
        // int_{-g}^{g} |w|^2 = 2 g^3 / 3, times N lambda^2.
        let g = s.inst.gap_min();
        let near = 1e-4 * s.inst.size() * 2.0 * g.powi(3) / 3.0;
        assert!((t.near_gap - near).abs() < 1e-12 * near);
    }

    #[test]
    fn hybrid_asymptotic_stays_close_to_the_estimate() {
        let s = setup(10, ScheduleKind::GapSquared, 0.1);
        let model = SpectralModel::power_law(1.0, 1.0);
        let c = coupling(0.01);
        let mut o = EngineOptions::default();
        let plain = p1_asymptotic(&s.inst, &s.sched, &s.phase, &c, &model, &o).unwrap();
        o.asymptotic = AsymptoticVariant::Hybrid;
        let hybrid = p1_asymptotic(&s.inst, &s.sched, &s.phase, &c, &model, &o).unwrap();
        assert!(hybrid.terms.unwrap().threshold > 0.0);
        let r = hybrid.value / plain.value;
        assert!(r > 0.5 && r < 2.0, "{r}");
    }

    #[test]
    fn scaling_law_values() {
        let inst = GroverInstance::balanced(8).unwrap();
        let c = coupling(0.1);
        let g = inst.gap_min();
        let v = p1_scaling_law(&inst, &SpectralModel::power_law(2.0, 1.0), &c).unwrap();
        assert!((v - 0.01 * g).abs() < 1e-17);
        let ind = CouplingConfig::new(0.1, Topology::IndependentBaths);
        let w = p1_scaling_law(&inst, &SpectralModel::power_law(2.0, 1.0), &ind).unwrap();
        assert!((w - 8.0 * v).abs() < 1e-15);
    }

    #[test]
    fn infrared_divergence_is_reported() {
        let s = setup(4, ScheduleKind::Uniform, 0.1);
        let bad = SpectralModel::power_law(-1.0, 1.0);
        for m in [Method::TimeDomain, Method::FrequencyDomain, Method::Asymptotic] {
            let e = p1(m, &s.inst, &s.sched, &s.phase, &coupling(0.01), &bad, &EngineOptions::default());
            assert!(matches!(e, Err(Error::InfraredDivergence { .. })), "{m}: {e:?}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let s = setup(8, ScheduleKind::Uniform, 0.1);
        let o = EngineOptions {
            max_evaluations: 1000,
            ..Default::default()
        };
        let model = SpectralModel::power_law(1.0, 1.0);
        let e = p1_frequency_domain(&s.inst, &s.sched, &s.phase, &coupling(0.01), &model, &o);
        assert!(matches!(e, Err(Error::Budget { budget: 1000 })));
        assert!(e.unwrap_err().is_numerical());
    }

    #[test]
    fn short_kernel_is_rejected() {
        let s = setup(4, ScheduleKind::GapSquared, 0.1);
        let model = SpectralModel::power_law(1.0, 1.0);
        let k = correlation_kernel(&model, 0.5 * s.sched.total_time(), 0.1).unwrap();
        let e = p1_time_domain_with_kernel(&s.inst, &s.sched, &s.phase, &coupling(0.01), &k, ChannelWeights::XX_ONLY, 1000, &EngineOptions::default());
        assert!(matches!(e, Err(Error::KernelRange { .. })));
    }

    #[test]
    fn supplied_kernel_matches_internal_one() {
        let s = setup(5, ScheduleKind::GapSquared, 0.1);
        let model = SpectralModel::power_law(2.0, 1.0);
        let c = coupling(0.01);
        let tt = s.sched.total_time();
        let steps = 4000;
        let k = correlation_kernel(&model, tt, tt / steps as f64).unwrap();
        let a = p1_time_domain_with_kernel(&s.inst, &s.sched, &s.phase, &c, &k, model.channel_weights, steps, &EngineOptions::default()).unwrap();
        let b = run(Method::TimeDomain, &s, &c, &model);
        assert!((a.value - b.value).abs() < 1e-6 * b.value, "{} {}", a.value, b.value);
    }

    #[test]
    fn markovian_engine_needs_a_flat_bath() {
        let s = setup(4, ScheduleKind::Uniform, 0.1);
        let e = p1(Method::Markovian, &s.inst, &s.sched, &s.phase, &coupling(0.01), &SpectralModel::power_law(1.0, 1.0), &EngineOptions::default());
        assert!(matches!(e, Err(Error::Invalid(_))));
    }

    #[test]
    fn large_values_are_flagged() {
        let s = setup(6, ScheduleKind::Uniform, 0.1);
        let e = run(Method::Markovian, &s, &coupling(1.0), &SpectralModel::markovian(1.0));
        assert!(e.value > 0.5 && e.unreliable);
    }

    #[test]
    fn brute_force_dispatch_tracks_frequency_domain() {
        let s = setup(4, ScheduleKind::GapSquared, 0.02);
        let model = SpectralModel::flat_box(-0.5, -0.4, 1.0);
        let c = CouplingConfig::new(0.01, Topology::IndependentBaths).with_form(MatrixElementForm::FiniteN);
        let b = run(Method::BruteForce, &s, &c, &model);
        let f = run(Method::FrequencyDomain, &s, &c, &model);
        assert!((b.value - f.value).abs() < 1e-2 * f.value, "{} {}", b.value, f.value);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL.into_iter().chain([Method::BruteForce]) {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("exact".parse::<Method>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn failure_probability_is_non_negative(p in 0.0f64..3.0, lo in -1.0f64..-0.05, n in 3u32..7) {
            let s = setup(n, ScheduleKind::GapLinear, 0.1);
            let c = coupling(0.01);
            let pl = run(Method::FrequencyDomain, &s, &c, &SpectralModel::power_law(p, 1.0));
            prop_assert!(pl.value >= 0.0);
            let bx = run(Method::TimeDomain, &s, &c, &SpectralModel::flat_box(lo, lo + 0.05, 2.0));
            prop_assert!(bx.value >= -1e-12 * bx.numerical_error.max(1.0));
        }
    }
}
