//! Accumulated dynamical phase Phi(t) = int_0^t gap(s(tau)) dtau, cached as a
//! cubic Hermite interpolant whose slopes are the exact gap.

use crate::error::{Error, Result};
use crate::grover::gap_raw;
use crate::integrators::adaptive::{adaptive_quad, Tolerance};
use crate::schedule::Schedule;

pub const DEFAULT_PHASE_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseIntegral {
    t: Vec<f64>,
    phi: Vec<f64>,
    slope: Vec<f64>,
    max_error: f64,
}

impl PhaseIntegral {
    pub fn new(schedule: &Schedule) -> Result<Self> {
        Self::build(schedule, DEFAULT_PHASE_TOLERANCE, DEFAULT_NODE_BUDGET)
    }

    /// Refines cells until the midpoint interpolation error is below
    /// `rel_tol * Phi(T)` everywhere.
    pub fn build(schedule: &Schedule, rel_tol: f64, node_budget: usize) -> Result<Self> {
        let n_states = schedule.n_states();
        let gap_t = |t: f64| gap_raw(n_states, schedule.s_at(t));
        let exact = |a: f64, b: f64| -> Result<f64> {
            Ok(adaptive_quad(gap_t, a, b, Tolerance { abs: 0.0, rel: 1e-14 })?.re())
        };

        let base = schedule.node_times();
        if base.len() > node_budget {
            return Err(Error::Budget { budget: node_budget });
        }
        let mut t = vec![base[0]];
        let mut phi = vec![0.0];
        for w in base.windows(2) {
            let inc = exact(w[0], w[1])?;
            t.push(w[1]);
            phi.push(phi.last().unwrap() + inc);
        }
        let total = *phi.last().unwrap();
        let tol = rel_tol * total.max(f64::MIN_POSITIVE);

        // Depth-first refinement, emitting accepted nodes in order.
        let mut out_t = vec![t[0]];
        let mut out_phi = vec![phi[0]];
        let mut max_error: f64 = 0.0;
        for k in 0..t.len() - 1 {
            let mut stack = vec![(t[k + 1], phi[k + 1])];
            let (mut a, mut pa) = (t[k], phi[k]);
            while let Some(&(b, pb)) = stack.last() {
                let mid = 0.5 * (a + b);
                let pm = pa + exact(a, mid)?;
                let guess = hermite(a, b, pa, pb, gap_t(a), gap_t(b), mid);
                let err = (guess - pm).abs();
                if err > tol && mid > a && mid < b {
                    if out_t.len() + stack.len() >= node_budget {
                        return Err(Error::Budget { budget: node_budget });
                    }
                    stack.push((mid, pm));
                } else {
                    max_error = max_error.max(err);
                    stack.pop();
                    out_t.push(b);
                    out_phi.push(pb);
                    a = b;
                    pa = pb;
                }
            }
        }
        let slope = out_t.iter().map(|&x| gap_t(x)).collect();
        Ok(PhaseIntegral {
            t: out_t,
            phi: out_phi,
            slope,
            max_error,
        })
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let tt = self.total_time();
        if !(0.0..=tt).contains(&t) {
            return Err(Error::domain("t", t, "[0, T]"));
        }
        Ok(self.eval(t))
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        let n = self.t.len();
        let k = match self.t.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return self.phi[i],
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        hermite(self.t[k], self.t[k + 1], self.phi[k], self.phi[k + 1], self.slope[k], self.slope[k + 1], t)
    }

    pub fn total(&self) -> f64 {
        *self.phi.last().unwrap()
    }

    pub fn total_time(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn node_count(&self) -> usize {
        self.t.len()
    }

    /// Largest midpoint interpolation error seen while refining.
    pub fn max_error_estimate(&self) -> f64 {
        self.max_error
    }
}

#[inline]
fn hermite(a: f64, b: f64, ya: f64, yb: f64, da: f64, db: f64, t: f64) -> f64 {
    let h = b - a;
    let x = (t - a) / h;
    let x2 = x * x;
    let x3 = x2 * x;
    (2.0 * x3 - 3.0 * x2 + 1.0) * ya + (x3 - 2.0 * x2 + x) * h * da + (-2.0 * x3 + 3.0 * x2) * yb + (x3 - x2) * h * db
}
