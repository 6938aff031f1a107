//! Interpolation laws s(t): constant velocity and the two gap-adapted laws
//! ds/dt = c * gap^p, plus user-supplied tables.
//!
//! The inverse map t(s) is stored on an s-grid that is dense where the gap is
//! small; between nodes it is a cubic Hermite interpolant whose end slopes are
//! the exact dt/ds, and s(t) is recovered from it by safeguarded Newton.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{adiabatic_error_estimate, gap_raw, GroverInstance};
use crate::integrators::adaptive::{adaptive_quad, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Uniform,
    GapSquared,
    GapLinear,
    CustomTable,
}

impl ScheduleKind {
    pub const ANALYTIC: [ScheduleKind; 3] = [ScheduleKind::Uniform, ScheduleKind::GapSquared, ScheduleKind::GapLinear];

    /// Exponent p in ds/dt = c * gap^p.
    pub fn gap_power(self) -> Option<i32> {
        match self {
            ScheduleKind::Uniform => Some(0),
            ScheduleKind::GapSquared => Some(2),
            ScheduleKind::GapLinear => Some(1),
            ScheduleKind::CustomTable => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Uniform => "uniform",
            ScheduleKind::GapSquared => "gap_squared",
            ScheduleKind::GapLinear => "gap_linear",
            ScheduleKind::CustomTable => "custom_table",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "uniform" | "linear" => Ok(ScheduleKind::Uniform),
            "gap_squared" | "gapsquared" => Ok(ScheduleKind::GapSquared),
            "gap_linear" | "gaplinear" => Ok(ScheduleKind::GapLinear),
            "custom_table" | "custom" => Ok(ScheduleKind::CustomTable),
            _ => Err(Error::Invalid(format!("unknown schedule kind '{s}'"))),
        }
    }
}

/// What fixes the overall speed of an analytic schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Runtime(f64),
    /// Adiabatic error estimate held at this value.
    Epsilon(f64),
    /// Velocity scale c given directly.
    VelocityScale(f64),
}

/// Grid resolution: roughly 200 nodes per decade of the gap.
const STEP_PER_GAP: f64 = std::f64::consts::LN_10 / 800.0;
const MAX_STEP: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    n_qubits: u32,
    n_states: f64,
    total_time: f64,
    velocity_scale: f64,
    s: Vec<f64>,
    t: Vec<f64>,
    /// ds/dt at each node for analytic kinds; for tables, the slope of the
    /// cell to the right (left for the last node).
    rate: Vec<f64>,
}

impl Schedule {
    pub fn build(kind: ScheduleKind, instance: &GroverInstance, target: Target) -> Result<Schedule> {
        let p = kind
            .gap_power()
            .ok_or_else(|| Error::Invalid("custom tables are built with Schedule::custom".into()))?;
        let n_states = instance.size();
        let unit = unit_grid(n_states, p)?;
        let c = match target {
            Target::Runtime(t) => {
                positive("runtime", t)?;
                unit.runtime / t
            }
            Target::VelocityScale(c) => {
                positive("velocity scale", c)?;
                c
            }
            Target::Epsilon(eps) => {
                positive("epsilon", eps)?;
                let probe = Schedule::from_unit(kind, instance, &unit, 1.0);
                eps / adiabatic_error_estimate(instance, &probe)
            }
        };
        Ok(Schedule::from_unit(kind, instance, &unit, c))
    }

    fn from_unit(kind: ScheduleKind, instance: &GroverInstance, unit: &UnitGrid, c: f64) -> Schedule {
        let p = kind.gap_power().unwrap_or(0);
        let n_states = instance.size();
        let mut t: Vec<f64> = unit.t.iter().map(|x| x / c).collect();
        let total_time = unit.runtime / c;
        *t.last_mut().expect("grid has nodes") = total_time;
        let rate = unit.s.iter().map(|&s| c * gap_raw(n_states, s).powi(p)).collect();
        Schedule {
            kind,
            n_qubits: instance.n_qubits(),
            n_states,
            total_time,
            velocity_scale: c,
            s: unit.s.clone(),
            t,
            rate,
        }
    }

    /// Piecewise-linear schedule through monotone (t, s) pairs that start at
    /// (0, 0) and end at (T, 1).
    pub fn custom(n_qubits: u32, grid: &[(f64, f64)]) -> Result<Schedule> {
        GroverInstance::new(n_qubits, 0)?;
        if grid.len() < 2 {
            return Err(Error::Invalid("custom schedule needs at least two points".into()));
        }
        let (t0, s0) = grid[0];
        let (tn, sn) = grid[grid.len() - 1];
        if t0 != 0.0 || s0 != 0.0 || sn != 1.0 || !(tn > 0.0) || !tn.is_finite() {
            return Err(Error::Invalid("custom schedule must run from (0, 0) to (T, 1)".into()));
        }
        for w in grid.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::Invalid("custom schedule must be strictly increasing in t and s".into()));
            }
        }
        let t: Vec<f64> = grid.iter().map(|p| p.0).collect();
        let s: Vec<f64> = grid.iter().map(|p| p.1).collect();
        let mut rate: Vec<f64> = t.windows(2).zip(s.windows(2)).map(|(tw, sw)| (sw[1] - sw[0]) / (tw[1] - tw[0])).collect();
        rate.push(*rate.last().expect("at least one cell"));
        Ok(Schedule {
            kind: ScheduleKind::CustomTable,
            n_qubits,
            n_states: (1u64 << n_qubits) as f64,
            total_time: tn,
            velocity_scale: 1.0 / tn,
            s,
            t,
            rate,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn n_states(&self) -> f64 {
        self.n_states
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    /// c in ds/dt = c * gap^p (1/T for the uniform law).
    pub fn velocity_scale(&self) -> f64 {
        self.velocity_scale
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.s.iter().copied())
    }

    pub fn node_count(&self) -> usize {
        self.s.len()
    }

    pub(crate) fn node_times(&self) -> &[f64] {
        &self.t
    }

    pub fn s_of_t(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.total_time).contains(&t) {
            return Err(Error::domain("t", t, "[0, T]"));
        }
        Ok(self.s_at(t))
    }

    pub fn t_of_s(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain("s", s, "[0, 1]"));
        }
        let k = cell(&self.s, s);
        let h = self.s[k + 1] - self.s[k];
        let x = (s - self.s[k]) / h;
        Ok(match self.kind {
            ScheduleKind::CustomTable => self.t[k] + x * (self.t[k + 1] - self.t[k]),
            _ => hermite(self.t[k], self.t[k + 1], h / self.rate[k], h / self.rate[k + 1], x).0,
        })
    }

    /// ds/dt at parameter value s.
    pub fn s_dot(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain("s", s, "[0, 1]"));
        }
        Ok(self.rate_at_s(s))
    }

    pub(crate) fn rate_at_s(&self, s: f64) -> f64 {
        match self.kind.gap_power() {
            Some(p) => self.velocity_scale * gap_raw(self.n_states, s).powi(p),
            None => self.rate[cell(&self.s, s)],
        }
    }

    /// s(t) without range checks; t is clamped to [0, T].
    pub(crate) fn s_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.total_time);
        let k = cell(&self.t, t);
        let (t0, t1) = (self.t[k], self.t[k + 1]);
        let (s0, s1) = (self.s[k], self.s[k + 1]);
        if self.kind == ScheduleKind::CustomTable {
            return s0 + (s1 - s0) * (t - t0) / (t1 - t0);
        }
        let h = s1 - s0;
        let (m0, m1) = (h / self.rate[k], h / self.rate[k + 1]);
        // Newton on the monotone cubic t(x) = target, bracketed in [0, 1].
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut x = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        for _ in 0..60 {
            let (v, d) = hermite(t0, t1, m0, m1, x);
            let r = v - t;
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - r / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-16 {
                x = next;
                break;
            }
            x = next;
        }
        s0 + h * x
    }

    /// (s, ds/dt) at time t.
    pub(crate) fn state_at(&self, t: f64) -> (f64, f64) {
        let t = t.clamp(0.0, self.total_time);
        let s = self.s_at(t);
        let rate = match self.kind.gap_power() {
            Some(p) => self.velocity_scale * gap_raw(self.n_states, s).powi(p),
            None => self.rate[cell(&self.t, t)],
        };
        (s, rate)
    }

    /// Points (s, ds/dt) at which the adiabatic estimate can peak: the grid,
    /// s = 1/2, and both one-sided velocities at table breakpoints.
    pub(crate) fn rate_candidates(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.s.len() + 1);
        match self.kind {
            ScheduleKind::CustomTable => {
                for k in 0..self.s.len() - 1 {
                    let r = self.rate[k];
                    out.push((self.s[k], r));
                    out.push((self.s[k + 1], r));
                    if self.s[k] < 0.5 && self.s[k + 1] > 0.5 {
                        out.push((0.5, r));
                    }
                }
            }
            _ => {
                out.extend(self.s.iter().map(|&s| (s, self.rate_at_s(s))));
                out.push((0.5, self.rate_at_s(0.5)));
            }
        }
        out
    }

    pub fn to_document(&self) -> ScheduleDocument {
        ScheduleDocument {
            kind: self.kind,
            n_qubits: self.n_qubits,
            runtime: self.total_time,
            velocity_scale: self.velocity_scale,
            grid: self.nodes().collect(),
        }
    }

    /// Rebuilds a schedule from its serialised form. Analytic kinds are
    /// regenerated from (n, c) and checked against the stored runtime.
    pub fn from_document(doc: &ScheduleDocument) -> Result<Schedule> {
        match doc.kind {
            ScheduleKind::CustomTable => Schedule::custom(doc.n_qubits, &doc.grid),
            kind => {
                let inst = GroverInstance::new(doc.n_qubits, 0)?;
                let sched = Schedule::build(kind, &inst, Target::VelocityScale(doc.velocity_scale))?;
                if (sched.total_time - doc.runtime).abs() > 1e-9 * doc.runtime {
                    return Err(Error::Invalid(format!(
                        "stored runtime {} disagrees with the rebuilt schedule ({})",
                        doc.runtime, sched.total_time
                    )));
                }
                Ok(sched)
            }
        }
    }
}

/// Serialised schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub kind: ScheduleKind,
    pub n_qubits: u32,
    #[serde(rename = "T")]
    pub runtime: f64,
    #[serde(rename = "c")]
    pub velocity_scale: f64,
    /// (t, s) pairs.
    pub grid: Vec<(f64, f64)>,
}

fn positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(what, v, "(0, inf)"))
    }
}

/// Index k of the cell [x_k, x_{k+1}] containing v (clamped).
#[inline]
fn cell(xs: &[f64], v: f64) -> usize {
    let n = xs.len();
    match xs.binary_search_by(|x| x.total_cmp(&v)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    }
}

/// Cubic Hermite on [0, 1] with values y0, y1 and scaled slopes m0, m1;
/// returns the value and derivative with respect to x.
#[inline]
fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> (f64, f64) {
    let x2 = x * x;
    let x3 = x2 * x;
    let v = (2.0 * x3 - 3.0 * x2 + 1.0) * y0 + (x3 - 2.0 * x2 + x) * m0 + (-2.0 * x3 + 3.0 * x2) * y1 + (x3 - x2) * m1;
    let d = (6.0 * x2 - 6.0 * x) * (y0 - y1) + (3.0 * x2 - 4.0 * x + 1.0) * m0 + (3.0 * x2 - 2.0 * x) * m1;
    (v, d)
}

/// t(s) at unit velocity scale on a grid symmetric about s = 1/2.
struct UnitGrid {
    s: Vec<f64>,
    t: Vec<f64>,
    runtime: f64,
}

fn unit_grid(n_states: f64, p: i32) -> Result<UnitGrid> {
    let gap = |s: f64| gap_raw(n_states, s);
    let mut half = vec![0.0];
    let mut s = 0.0;
    while s < 0.5 {
        let h0 = (STEP_PER_GAP * gap(s)).min(MAX_STEP);
        let h = (STEP_PER_GAP * gap((s + h0).min(0.5))).min(h0);
        if s + 1.25 * h >= 0.5 {
            s = 0.5;
        } else {
            s += h;
        }
        half.push(s);
    }
    let integrand = |s: f64| gap(s).powi(-p);
    let mut t_half = vec![0.0; half.len()];
    for k in 1..half.len() {
        let r = adaptive_quad(integrand, half[k - 1], half[k], Tolerance { abs: 0.0, rel: 1e-14 })?;
        t_half[k] = t_half[k - 1] + r.re();
    }
    let t_mid = t_half[half.len() - 1];
    let runtime = 2.0 * t_mid;
    let mut s_all = half.clone();
    let mut t_all = t_half.clone();
    for k in (0..half.len() - 1).rev() {
        s_all.push(1.0 - half[k]);
        t_all.push(runtime - t_half[k]);
    }
    Ok(UnitGrid {
        s: s_all,
        t: t_all,
        runtime,
    })
}

/// Runtimes at fixed adiabatic error across register sizes.
pub fn runtime_scaling_sweep(kind: ScheduleKind, n_list: &[u32], epsilon: f64) -> Result<Vec<(u32, f64)>> {
    if n_list.is_empty() {
        return Err(Error::Invalid("empty qubit list".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            let inst = GroverInstance::new(n, 0)?;
            Ok((n, Schedule::build(kind, &inst, Target::Epsilon(epsilon))?.total_time()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: u32) -> GroverInstance {
        GroverInstance::new(n, 0).unwrap()
    }

    // Closed-form integrals of 1/gap^p, used as oracles.
    fn closed_runtime(n_states: f64, p: i32, c: f64) -> f64 {
        let k = 1.0 - 1.0 / n_states;
        match p {
            0 => 1.0 / c,
            1 => (k * n_states).sqrt().asinh() / (k.sqrt() * c),
            2 => n_states / (n_states - 1.0).sqrt() * (n_states - 1.0).sqrt().atan() / c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn uniform_is_linear() {
        let sch = Schedule::build(ScheduleKind::Uniform, &inst(3), Target::Runtime(7.0)).unwrap();
        assert!((sch.total_time() - 7.0).abs() < 1e-12);
        for t in [0.0, 1.0, 3.5, 6.9, 7.0] {
            assert!((sch.s_of_t(t).unwrap() - t / 7.0).abs() < 1e-14);
        }
        let sch = Schedule::build(ScheduleKind::Uniform, &inst(3), Target::Runtime(10.0)).unwrap();
        assert!((sch.s_of_t(2.5).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn gap_squared_runtime_at_1024() {
        let sch = Schedule::build(ScheduleKind::GapSquared, &inst(10), Target::VelocityScale(1.0)).unwrap();
        assert!((sch.total_time() - 49.289_392_590_302_825).abs() < 1e-10);
        assert!((sch.total_time() - closed_runtime(1024.0, 2, 1.0)).abs() < 1e-10);
        assert!((sch.s_dot(0.5).unwrap() - 1.0 / 1024.0).abs() < 1e-18);
    }

    #[test]
    fn gap_linear_runtime_at_1024() {
        let sch = Schedule::build(ScheduleKind::GapLinear, &inst(10), Target::VelocityScale(1.0)).unwrap();
        assert!((sch.total_time() - 4.160_670_927_113_253).abs() < 1e-11);
        assert!((sch.total_time() - closed_runtime(1024.0, 1, 1.0)).abs() < 1e-11);
    }

    #[test]
    fn midpoint_is_exact_for_symmetric_laws() {
        for kind in [ScheduleKind::GapSquared, ScheduleKind::GapLinear] {
            let sch = Schedule::build(kind, &inst(8), Target::Epsilon(0.1)).unwrap();
            assert!((sch.s_of_t(0.5 * sch.total_time()).unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn gap_squared_matches_closed_form_trajectory() {
        let n = 256.0f64;
        let c = 0.37;
        let sch = Schedule::build(ScheduleKind::GapSquared, &inst(8), Target::VelocityScale(c)).unwrap();
        let k = 1.0 - 1.0 / n;
        let a = (k * n).sqrt();
        for f in [0.01, 0.2, 0.45, 0.5, 0.61, 0.99] {
            let t = f * sch.total_time();
            let exact = (((2.0 * c * k.sqrt() * t / n.sqrt()) - a.atan()).tan() / a + 1.0) / 2.0;
            assert!((sch.s_of_t(t).unwrap() - exact).abs() < 1e-10, "f={f} {} {exact}", sch.s_of_t(t).unwrap());
        }
    }

    #[test]
    fn ode_residual_and_inverse_maps() {
        for kind in ScheduleKind::ANALYTIC {
            let sch = Schedule::build(kind, &inst(9), Target::Epsilon(0.05)).unwrap();
            let p = kind.gap_power().unwrap();
            let c = sch.velocity_scale();
            let tt = sch.total_time();
            for (t, s) in sch.nodes().step_by(7) {
                if t == 0.0 || t == tt {
                    continue;
                }
                let dt = 1e-4 * tt.min(1.0) * sch.s_dot(s).unwrap().recip().min(1.0);
                let fd = (sch.s_of_t(t + dt).unwrap() - sch.s_of_t(t - dt).unwrap()) / (2.0 * dt);
                let exact = c * gap_raw(sch.n_states(), s).powi(p);
                assert!((fd - exact).abs() < 1e-6 * exact, "{kind} s={s}: {fd} vs {exact}");
                assert!((sch.t_of_s(sch.s_of_t(t).unwrap()).unwrap() - t).abs() < 1e-9 * t);
            }
        }
    }

    #[test]
    fn runtime_identity_against_adaptive_quadrature() {
        for kind in ScheduleKind::ANALYTIC {
            for n in [2u32, 7, 15] {
                let sch = Schedule::build(kind, &inst(n), Target::VelocityScale(0.3)).unwrap();
                let p = kind.gap_power().unwrap();
                let nn = (1u64 << n) as f64;
                let r = adaptive_quad(|s| 1.0 / (0.3 * gap_raw(nn, s).powi(p)), 0.0, 1.0, Tolerance::relative(1e-13)).unwrap();
                assert!((sch.total_time() - r.re()).abs() < 1e-6 * r.re());
                assert!((sch.total_time() - closed_runtime(nn, p, 0.3)).abs() < 1e-10 * r.re());
            }
        }
    }

    #[test]
    fn epsilon_normalisation() {
        for kind in ScheduleKind::ANALYTIC {
            let i = inst(8);
            let sch = Schedule::build(kind, &i, Target::Epsilon(0.1)).unwrap();
            assert!((adiabatic_error_estimate(&i, &sch) - 0.1).abs() < 1e-12);
        }
        let i = inst(10);
        let nn = i.size();
        let u = Schedule::build(ScheduleKind::Uniform, &i, Target::Epsilon(0.1)).unwrap();
        assert!((u.total_time() - (nn * (nn - 1.0)).sqrt() / 0.1).abs() < 1e-8 * u.total_time());
        let g = Schedule::build(ScheduleKind::GapSquared, &i, Target::Epsilon(0.1)).unwrap();
        assert!((g.velocity_scale() - 0.1 * (nn / (nn - 1.0)).sqrt()).abs() < 1e-14);
        let l = Schedule::build(ScheduleKind::GapLinear, &i, Target::Epsilon(0.1)).unwrap();
        assert!((l.velocity_scale() - 0.1 / (nn - 1.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn estimate_is_linear_in_velocity() {
        let i = inst(6);
        let a = Schedule::build(ScheduleKind::Uniform, &i, Target::Runtime(1.0)).unwrap();
        let b = Schedule::build(ScheduleKind::Uniform, &i, Target::Runtime(100.0)).unwrap();
        let r = adiabatic_error_estimate(&i, &a) / adiabatic_error_estimate(&i, &b);
        assert!((r - 100.0).abs() < 1e-9);
    }

    // The gap-squared law puts the estimate's peak, and only its peak, at the
    // crossing: away from it the estimate falls off as gap_min / gap.
    #[test]
    fn gap_squared_estimate_peaks_at_crossing() {
        let i = inst(8);
        let sch = Schedule::build(ScheduleKind::GapSquared, &i, Target::Epsilon(0.1)).unwrap();
        let nn = i.size();
        let width = 1.0 / nn.sqrt();
        for k in -10..=10 {
            let s = 0.5 + 0.1 * width * k as f64;
            let g = gap_raw(nn, s);
            let e = sch.s_dot(s).unwrap() * i.derivative_coupling(s).unwrap() / (g * g);
            let want = 0.1 * i.gap_min() / g;
            assert!((e - want).abs() < 1e-12 * want, "s={s}: {e} vs {want}");
        }
    }

    #[test]
    fn custom_table_is_piecewise_linear() {
        let sch = Schedule::custom(3, &[(0.0, 0.0), (2.0, 0.4), (6.0, 0.6), (7.0, 1.0)]).unwrap();
        assert!((sch.s_of_t(1.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((sch.s_of_t(4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((sch.t_of_s(0.8).unwrap() - 6.5).abs() < 1e-14);
        assert!((sch.s_dot(0.5).unwrap() - 0.05).abs() < 1e-15);
        assert!(Schedule::custom(3, &[(0.0, 0.0), (1.0, 0.5), (0.5, 1.0)]).is_err());
        assert!(Schedule::custom(3, &[(0.0, 0.1), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn document_round_trip() {
        let i = inst(5);
        for kind in ScheduleKind::ANALYTIC {
            let sch = Schedule::build(kind, &i, Target::Epsilon(0.2)).unwrap();
            let json = serde_json::to_string(&sch.to_document()).unwrap();
            let back = Schedule::from_document(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back, sch);
        }
        let c = Schedule::custom(2, &[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(Schedule::from_document(&c.to_document()).unwrap(), c);
        let bad = r#"{"kind":"uniform","n_qubits":2,"T":1,"c":1,"grid":[],"extra":1}"#;
        assert!(serde_json::from_str::<ScheduleDocument>(bad).is_err());
    }

    #[test]
    fn domain_errors() {
        let sch = Schedule::build(ScheduleKind::Uniform, &inst(3), Target::Runtime(5.0)).unwrap();
        assert!(sch.s_of_t(5.1).is_err());
        assert!(sch.t_of_s(-0.1).is_err());
        assert!(Schedule::build(ScheduleKind::Uniform, &inst(3), Target::Epsilon(0.0)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn kinds() -> impl Strategy<Value = ScheduleKind> {
            prop_oneof![Just(ScheduleKind::Uniform), Just(ScheduleKind::GapSquared), Just(ScheduleKind::GapLinear)]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn monotone_and_symmetric(kind in kinds(), n in 1u32..20, a in 0.0f64..1.0, b in 0.0f64..1.0) {
                let sch = Schedule::build(kind, &GroverInstance::new(n, 0).unwrap(), Target::Epsilon(0.1)).unwrap();
                let tt = sch.total_time();
                let (lo, hi) = (a.min(b) * tt, a.max(b) * tt);
                if hi - lo > 1e-9 * tt {
                    prop_assert!(sch.s_of_t(hi).unwrap() > sch.s_of_t(lo).unwrap());
                }
                let s = sch.s_of_t(lo).unwrap();
                let mirrored = sch.s_of_t(tt - lo).unwrap();
                prop_assert!((s + mirrored - 1.0).abs() < 1e-6 * s.max(1e-300).max(1e-9));
            }

            #[test]
            fn inverse_round_trip(kind in kinds(), n in 1u32..20, f in 0.0f64..=1.0) {
                let sch = Schedule::build(kind, &GroverInstance::new(n, 0).unwrap(), Target::Epsilon(0.1)).unwrap();
                let t = f * sch.total_time();
                let back = sch.t_of_s(sch.s_of_t(t).unwrap()).unwrap();
                prop_assert!((back - t).abs() <= 1e-9 * t.max(1e-12));
            }
        }
    }
}
