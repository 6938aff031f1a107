//! Stationary points of omega t + Phi(t), i.e. omega + gap(t*) = 0, and the
//! stationary-phase estimate of |A(omega)|^2.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{channel_profile, gap_raw, gap_slope, Channel, GroverInstance, MatrixElementForm};
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    BeforeCrossing,
    AfterCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub t_star: f64,
    pub s_star: f64,
    /// d gap / dt at the saddle (the second derivative of the phase).
    pub gap_rate: f64,
    /// ds/dt at the saddle.
    pub s_dot: f64,
    pub branch: Branch,
}

/// Bisection on each monotone half of the gap.
pub fn find_saddles(instance: &GroverInstance, schedule: &Schedule, omega: f64) -> Result<Vec<SaddlePoint>> {
    let target = -omega;
    let n_states = instance.size();
    if !(target >= instance.gap_min() && target <= 1.0) || target == instance.gap_min() {
        return Ok(Vec::new());
    }
    let gap = |s: f64| gap_raw(n_states, s);
    let mut out = Vec::with_capacity(2);
    for branch in [Branch::BeforeCrossing, Branch::AfterCrossing] {
        // Orient so that f(lo) >= 0 >= f(hi).
        let (mut lo, mut hi) = match branch {
            Branch::BeforeCrossing => (0.0, 0.5),
            Branch::AfterCrossing => (1.0, 0.5),
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if gap(mid) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo).abs() < 1e-15 {
                break;
            }
        }
        let s = 0.5 * (lo + hi);
        if (gap(s) - target).abs() > 1e-10 {
            return Err(Error::NoConvergence(format!("saddle for omega = {omega}")));
        }
        let s_dot = schedule.s_dot(s)?;
        out.push(SaddlePoint {
            t_star: schedule.t_of_s(s)?,
            s_star: s,
            gap_rate: gap_slope(n_states, s) * s_dot,
            s_dot,
            branch,
        });
    }
    Ok(out)
}

/// Sum over both saddles of 2 pi m(s*)^2 / |d gap/dt|, added incoherently.
pub fn stationary_phase_amplitude_sq(
    instance: &GroverInstance,
    schedule: &Schedule,
    omega: f64,
    channel: Channel,
    form: MatrixElementForm,
) -> Result<f64> {
    let saddles = find_saddles(instance, schedule, omega)?;
    if saddles.is_empty() {
        return Err(Error::NoSaddle { omega });
    }
    if -omega < 2.0 * instance.gap_min() {
        return Err(Error::DegenerateSaddle { omega });
    }
    Ok(saddles
        .iter()
        .map(|sp| {
            let m = channel_profile(instance.size(), channel, sp.s_star, form);
            2.0 * PI * m * m / sp.gap_rate.abs()
        })
        .sum())
}

/// Closed-form coefficient pi / (2 N omega^2 ds/dt) in the regime
/// gap_min << |omega| << 1, with ds/dt averaged (harmonically) over the saddles.
pub fn large_n_coefficient(instance: &GroverInstance, schedule: &Schedule, omega: f64) -> Result<f64> {
    let saddles = find_saddles(instance, schedule, omega)?;
    if saddles.is_empty() {
        return Err(Error::NoSaddle { omega });
    }
    let inv_rate = saddles.iter().map(|sp| 1.0 / sp.s_dot).sum::<f64>() / saddles.len() as f64;
    Ok(PI * inv_rate / (2.0 * instance.size() * omega * omega))
}
