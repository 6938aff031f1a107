//! Single-frequency time integral
//! A(omega) = int_0^T exp(i [omega t + Phi(t)]) m(s(t)) dt
//! by phase-resolved adaptive subdivision.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::adaptive::{adaptive_quad, adaptive_quad_complex, QuadratureResult, Tolerance};
use crate::error::{Error, Result};
use crate::grover::{channel_profile, Channel, GroverInstance, MatrixElementForm};
use crate::phase::PhaseIntegral;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeOptions {
    pub channel: Channel,
    pub form: MatrixElementForm,
    /// Relative to int_0^T m dt, the scale of the non-oscillatory integral.
    pub rel_tol: f64,
    pub budget: usize,
}

impl Default for AmplitudeOptions {
    fn default() -> Self {
        AmplitudeOptions {
            channel: Channel::X,
            form: MatrixElementForm::LargeN,
            rel_tol: 1e-9,
            budget: 20_000_000,
        }
    }
}

pub fn oscillatory_amplitude(
    instance: &GroverInstance,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    omega: f64,
    opts: AmplitudeOptions,
) -> Result<QuadratureResult> {
    let tt = schedule.total_time();
    let n_states = instance.size();
    let profile = |t: f64| {
        let (s, _) = schedule.state_at(t);
        channel_profile(n_states, opts.channel, s, opts.form)
    };
    // Panels of at most half a period of the fastest possible phase rate,
    // i.e. 30 Kronrod nodes per period.
    let rate = omega.abs() + 1.0;
    let panels = ((tt * rate / PI).ceil() as usize).max(1);
    if panels.saturating_mul(15) > opts.budget {
        return Err(Error::Budget { budget: opts.budget });
    }
    let scale = adaptive_quad(profile, 0.0, tt, Tolerance::relative(1e-6))?.re();
    let breaks: Vec<f64> = (0..=panels).map(|k| tt * k as f64 / panels as f64).collect();
    let integrand = |t: f64| Complex64::from_polar(profile(t), omega * t + phase.eval(t));
    adaptive_quad_complex(integrand, &breaks, Tolerance::absolute(opts.rel_tol * scale.max(f64::MIN_POSITIVE)), opts.budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{ScheduleKind, Target};

    fn setup(n: u32, kind: ScheduleKind, target: Target) -> (GroverInstance, Schedule, PhaseIntegral) {
        let i = GroverInstance::balanced(n).unwrap();
        let s = Schedule::build(kind, &i, target).unwrap();
        let p = PhaseIntegral::new(&s).unwrap();
        (i, s, p)
    }

    // Brute-force Riemann (midpoint) sum at 10^6 steps.
    #[test]
    fn matches_riemann_sum() {
        let (i, s, p) = setup(2, ScheduleKind::Uniform, Target::Runtime(10.0));
        let a = oscillatory_amplitude(&i, &s, &p, 0.0, AmplitudeOptions::default()).unwrap();
        let steps = 1_000_000;
        let h = 10.0 / steps as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..steps {
            let t = (k as f64 + 0.5) * h;
            let sv = t / 10.0;
            let g = i.gap(sv).unwrap();
            // Uniform schedule: Phi(t) = T int_0^s gap.
            let phi = 10.0 * adaptive_quad(|x| i.gap(x).unwrap(), 0.0, sv, Tolerance::relative(1e-14)).unwrap().re();
            acc += Complex64::from_polar(sv / (2.0 * g), phi) * h;
        }
        assert!((a.value - acc).norm() < 1e-6 * acc.norm(), "{} vs {}", a.value, acc);
    }

    #[test]
    fn no_saddle_means_small() {
        let (i, s, p) = setup(8, ScheduleKind::GapSquared, Target::Epsilon(0.1));
        let above = oscillatory_amplitude(&i, &s, &p, 0.5, AmplitudeOptions::default()).unwrap();
        let resonant = oscillatory_amplitude(&i, &s, &p, -0.5, AmplitudeOptions::default()).unwrap();
        assert!(above.value.norm_sqr() < 5e-3 * resonant.value.norm_sqr(), "{} {}", above.value, resonant.value);
    }

    #[test]
    fn continuous_in_omega() {
        let (i, s, p) = setup(6, ScheduleKind::Uniform, Target::Epsilon(0.1));
        let a = oscillatory_amplitude(&i, &s, &p, -0.3, AmplitudeOptions::default()).unwrap();
        let b = oscillatory_amplitude(&i, &s, &p, -0.3 + 1e-6, AmplitudeOptions::default()).unwrap();
        // |dA/domega| <= int t m dt <= T int m dt.
        let bound = s.total_time() * s.total_time();
        assert!((a.value - b.value).norm() <= 1e-6 * bound);
        assert!((a.value - b.value).norm() < 1e-3 * a.value.norm());
    }

    #[test]
    fn short_runtime_gives_small_amplitude() {
        let (i, s, p) = setup(4, ScheduleKind::Uniform, Target::Runtime(1e-6));
        let a = oscillatory_amplitude(&i, &s, &p, -0.2, AmplitudeOptions::default()).unwrap();
        assert!(a.value.norm() < 1e-6);
    }

    #[test]
    fn budget_is_reported() {
        let (i, s, p) = setup(10, ScheduleKind::Uniform, Target::Epsilon(0.1));
        let opts = AmplitudeOptions {
            budget: 1000,
            ..Default::default()
        };
        assert!(matches!(oscillatory_amplitude(&i, &s, &p, -0.2, opts), Err(Error::Budget { .. })));
    }
}
