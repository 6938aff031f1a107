//! Brute-force validators, deliberately independent of the analytic
//! matrix-element formulas: exact two-level and full-register evolution, and a
//! plain trapezoid double sum for the failure probability.
//!
//! Only the Hamiltonian H(s) = 1 - (1-s)|psi0><psi0| - s|w><w| is shared with
//! the rest of the crate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::failure::{FailureEstimate, Method};
use crate::grover::{Channel, GroverInstance};
use crate::schedule::Schedule;
use crate::spectral::{ChannelWeights, CorrelationKernel, CouplingConfig, Topology};

/// Largest register evolved in the full 2^n space.
pub const MAX_FULL_QUBITS: u32 = 12;
/// Largest register whose Pauli projections are summed over all basis states.
pub const MAX_PROJECTION_QUBITS: u32 = 22;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

type Mat2 = [[Complex64; 2]; 2];
type Vec2 = [Complex64; 2];

fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn dot(u: &Vec2, v: &Vec2) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

/// Real symmetric h(s) in the basis (|w>, |w_perp>).
fn hamiltonian(n_states: f64, s: f64) -> [[f64; 2]; 2] {
    let a = n_states.sqrt().recip();
    let b = (1.0 - a * a).sqrt();
    let psi = [a, b];
    let w = [1.0, 0.0];
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { 1.0 } else { 0.0 };
            h[i][j] = id - (1.0 - s) * psi[i] * psi[j] - s * w[i] * w[j];
        }
    }
    h
}

/// exp(-i h dt) for real symmetric 2x2 h.
fn step_matrix(h: &[[f64; 2]; 2], dt: f64) -> Mat2 {
    let m = 0.5 * (h[0][0] + h[1][1]);
    let d = 0.5 * (h[0][0] - h[1][1]);
    let r = d.hypot(h[0][1]);
    let (c, sn) = ((r * dt).cos(), (r * dt).sin());
    let k = if r > 0.0 { sn / r } else { dt };
    let g = Complex64::from_polar(1.0, -m * dt);
    let i = Complex64::new(0.0, 1.0);
    [
        [g * (c - i * k * d), g * (-i * k * h[0][1])],
        [g * (-i * k * h[1][0]), g * (c + i * k * d)],
    ]
}

/// (ground, excited) eigenvectors of a real symmetric 2x2 matrix.
fn eigvecs(h: &[[f64; 2]; 2]) -> (Vec2, Vec2) {
    let m = 0.5 * (h[0][0] + h[1][1]);
    let d = 0.5 * (h[0][0] - h[1][1]);
    let r = d.hypot(h[0][1]);
    let lo = m - r;
    let (p, q) = if (lo - h[1][1]).abs() > (lo - h[0][0]).abs() {
        (lo - h[1][1], h[0][1])
    } else {
        (h[0][1], lo - h[0][0])
    };
    let norm = p.hypot(q);
    let (p, q) = if norm > 0.0 { (p / norm, q / norm) } else { (1.0, 0.0) };
    let c = |x: f64| Complex64::new(x, 0.0);
    ([c(p), c(q)], [c(q), c(-p)])
}

/// Step count: `per_period` steps per phase period of the largest splitting,
/// at least 10^4.
pub fn default_steps(schedule: &Schedule) -> usize {
    let n_states = schedule.n_states();
    let split = |s: f64| {
        let h = hamiltonian(n_states, s);
        (h[0][0] - h[1][1]).hypot(2.0 * h[0][1])
    };
    let max_gap = [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().map(split).fold(0.0, f64::max);
    let periods = schedule.total_time() * max_gap / (2.0 * PI);
    ((200.0 * periods).ceil() as usize).max(10_000)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator2x2 {
    /// U_sys(t) in the (|w>, |w_perp>) basis.
    pub u: [[Complex64; 2]; 2],
    pub time: f64,
    pub steps: usize,
}

impl Propagator2x2 {
    /// max |(U^dagger U - 1)_ij|.
    pub fn unitarity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut v = self.u[0][i].conj() * self.u[0][j] + self.u[1][i].conj() * self.u[1][j];
                if i == j {
                    v -= ONE;
                }
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        mat_vec(&self.u, &v)
    }
}

/// Midpoint exponential stepper over [0, t] with uniform steps.
struct Stepper<'a> {
    schedule: &'a Schedule,
    n_states: f64,
    dt: f64,
}

impl Stepper<'_> {
    fn step(&self, k: usize) -> Mat2 {
        let t_mid = (k as f64 + 0.5) * self.dt;
        let s = self.schedule.s_of_t(t_mid).unwrap_or_else(|_| t_mid.clamp(0.0, 1.0));
        step_matrix(&hamiltonian(self.n_states, s), self.dt)
    }
}

fn check_instance(instance: &GroverInstance, schedule: &Schedule) -> Result<()> {
    if schedule.n_qubits() != instance.n_qubits() {
        return Err(Error::Invalid("schedule and instance sizes differ".into()));
    }
    Ok(())
}

/// U_sys(t), the time-ordered product of exact 2x2 step exponentials.
/// `steps` defaults to [`default_steps`] scaled to the fraction t / T.
pub fn propagator_2x2(instance: &GroverInstance, schedule: &Schedule, t: f64, steps: Option<usize>) -> Result<Propagator2x2> {
    check_instance(instance, schedule)?;
    let tt = schedule.total_time();
    if !(0.0..=tt).contains(&t) {
        return Err(Error::domain("t", t, "[0, T]"));
    }
    let steps = steps.unwrap_or_else(|| ((default_steps(schedule) as f64 * t / tt).ceil() as usize).max(1));
    let mut u = [[ONE, ZERO], [ZERO, ONE]];
    if t > 0.0 {
        let st = Stepper {
            schedule,
            n_states: schedule.n_states(),
            dt: t / steps as f64,
        };
        for k in 0..steps {
            u = mat_mul(&st.step(k), &u);
        }
    }
    let p = Propagator2x2 { u, time: t, steps };
    let err = p.unitarity_error();
    if err > 1e-6 {
        return Err(Error::NormDrift { drift: err });
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl FullState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn overlap(&self, other: &[Complex64]) -> Complex64 {
        self.amplitudes.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Integrates the full-register Schrodinger equation from |psi0> using the
/// rank-2 structure of H: each step exponentiates H exactly on
/// span{|w>, |psi0>} and multiplies the rest by e^{-i dt}.
pub fn evolve_full(instance: &GroverInstance, schedule: &Schedule, steps: Option<usize>) -> Result<FullState> {
    check_instance(instance, schedule)?;
    let n = instance.n_qubits();
    if n > MAX_FULL_QUBITS {
        return Err(Error::Invalid(format!("full evolution is limited to {MAX_FULL_QUBITS} qubits (got {n})")));
    }
    let dim = instance.dim() as usize;
    let w = instance.marked() as usize;
    let steps = steps.unwrap_or_else(|| default_steps(schedule)).max(1);
    let tt = schedule.total_time();
    let dt = tt / steps as f64;
    let amp0 = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    let mut psi = vec![amp0; dim];
    let a = (dim as f64).sqrt().recip();
    let b = (1.0 - a * a).sqrt();
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let s = schedule.s_of_t(t_mid)?;
        // Orthonormal frame: e0 = |w>, e1 = (|psi0> - a|w>) / b.
        // Components: c0 = psi[w]; c1 = (sum_x psi[x] - psi[w]) * a / b.
        let total: Complex64 = psi.iter().sum();
        let c0 = psi[w];
        let c1 = (total - c0) * (a / b);
        let u = step_matrix(&hamiltonian(dim as f64, s), dt);
        let [d0, d1] = mat_vec(&u, &[c0, c1]);
        let phase = Complex64::from_polar(1.0, -dt);
        // psi = phase * (psi - c0 e0 - c1 e1) + d0 e0 + d1 e1.
        let e1_other = Complex64::new(a / b, 0.0);
        let shift = d1 - phase * c1;
        for (x, v) in psi.iter_mut().enumerate() {
            if x == w {
                *v = d0;
            } else {
                *v = phase * *v + shift * e1_other;
            }
        }
    }
    let state = FullState { amplitudes: psi, time: tt };
    let drift = (state.norm() - 1.0).abs();
    if drift > 1e-6 {
        return Err(Error::NormDrift { drift });
    }
    Ok(state)
}

/// Embeds a (|w>, |w_perp>) vector into the full register.
pub fn embed(instance: &GroverInstance, v: [Complex64; 2]) -> Result<Vec<Complex64>> {
    if instance.n_qubits() > MAX_FULL_QUBITS {
        return Err(Error::Invalid(format!("embedding is limited to {MAX_FULL_QUBITS} qubits")));
    }
    let dim = instance.dim() as usize;
    let a = (dim as f64).sqrt().recip();
    let b = (1.0 - a * a).sqrt();
    let perp = a / b;
    let mut out = vec![v[1] * perp; dim];
    out[instance.marked() as usize] = v[0];
    Ok(out)
}

/// P sigma_a^mu P in the (|w>, |w_perp>) basis, summed over all basis states.
pub fn projected_pauli(instance: &GroverInstance, qubit: u32, channel: Channel) -> Result<[[Complex64; 2]; 2]> {
    let n = instance.n_qubits();
    if n > MAX_PROJECTION_QUBITS {
        return Err(Error::Invalid(format!("Pauli projection is limited to {MAX_PROJECTION_QUBITS} qubits")));
    }
    if qubit >= n {
        return Err(Error::Invalid(format!("qubit {qubit} out of range for {n} qubits")));
    }
    let dim = instance.dim() as usize;
    let w = instance.marked() as usize;
    let mask = 1usize << (n - 1 - qubit);
    let a = (dim as f64).sqrt().recip();
    let b = (1.0 - a * a).sqrt();
    // Real basis vectors as functions of the index.
    let e = |k: usize, x: usize| -> f64 {
        match k {
            0 => (x == w) as u8 as f64,
            _ => (a - if x == w { a } else { 0.0 }) / b,
        }
    };
    // sigma applied to basis vector v, evaluated at x.
    let apply = |k: usize, x: usize| -> Complex64 {
        let bit = x & mask != 0;
        match channel {
            Channel::X => Complex64::new(e(k, x ^ mask), 0.0),
            Channel::Y => {
                // Y|0> = i|1>, Y|1> = -i|0>: (Y v)[x] = (bit ? i : -i) v[x ^ mask].
                let f = if bit { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
                f * e(k, x ^ mask)
            }
            Channel::Z => Complex64::new(if bit { -1.0 } else { 1.0 } * e(k, x), 0.0),
        }
    };
    let mut m = [[ZERO; 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            let mut acc = ZERO;
            for x in 0..dim {
                acc += apply(j, x) * e(i, x);
            }
            *out = acc;
        }
    }
    Ok(m)
}

/// Interaction-picture elements <G0|U(t)^dagger sigma_a^mu U(t)|X0> on a
/// uniform grid, with X0 = U(T)^dagger |excited(T)>.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteElements {
    pub dt: f64,
    /// series[a][0] is the x channel of qubit a, series[a][1] the z channel.
    pub series: Vec<[Vec<Complex64>; 2]>,
    pub steps: usize,
}

pub fn brute_matrix_elements(instance: &GroverInstance, schedule: &Schedule, intervals: usize, steps: Option<usize>) -> Result<BruteElements> {
    check_instance(instance, schedule)?;
    if intervals == 0 {
        return Err(Error::Invalid("the time grid needs at least one interval".into()));
    }
    let n_states = schedule.n_states();
    let per = steps.unwrap_or_else(|| default_steps(schedule)).div_ceil(intervals).max(1);
    let total_steps = per * intervals;
    let tt = schedule.total_time();
    let st = Stepper {
        schedule,
        n_states,
        dt: tt / total_steps as f64,
    };
    let mut us = Vec::with_capacity(intervals + 1);
    let mut u = [[ONE, ZERO], [ZERO, ONE]];
    us.push(u);
    for k in 0..intervals {
        for j in 0..per {
            u = mat_mul(&st.step(k * per + j), &u);
        }
        us.push(u);
    }
    let (g0, _) = eigvecs(&hamiltonian(n_states, 0.0));
    let (_, x_t) = eigvecs(&hamiltonian(n_states, 1.0));
    let u_t = us[intervals];
    // X0 = U(T)^dagger x_T.
    let x0 = [
        u_t[0][0].conj() * x_t[0] + u_t[1][0].conj() * x_t[1],
        u_t[0][1].conj() * x_t[0] + u_t[1][1].conj() * x_t[1],
    ];
    let mut series = Vec::with_capacity(instance.n_qubits() as usize);
    for a in 0..instance.n_qubits() {
        let px = projected_pauli(instance, a, Channel::X)?;
        let pz = projected_pauli(instance, a, Channel::Z)?;
        let mut sx = Vec::with_capacity(intervals + 1);
        let mut sz = Vec::with_capacity(intervals + 1);
        for u in &us {
            let g = mat_vec(u, &g0);
            let x = mat_vec(u, &x0);
            sx.push(dot(&g, &mat_vec(&px, &x)));
            sz.push(dot(&g, &mat_vec(&pz, &x)));
        }
        series.push([sx, sz]);
    }
    Ok(BruteElements {
        dt: tt / intervals as f64,
        series,
        steps: total_steps,
    })
}

/// sum_{i,j} C(t_i - t_j) a_i conj(b_j), trapezoid weights already in a, b.
fn toeplitz_sum(c: &[Complex64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    if a.len() <= 512 {
        return toeplitz_sum_direct(c, a, b);
    }
    let ab = correlate(a, b);
    let ba = correlate(b, a);
    let mut acc = c[0] * ab[0];
    for k in 1..a.len() {
        acc += c[k] * ab[k] + (c[k] * ba[k]).conj();
    }
    acc
}

fn toeplitz_sum_direct(c: &[Complex64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            let ck = if i >= j { c[i - j] } else { c[j - i].conj() };
            acc += ck * ai * bj.conj();
        }
    }
    acc
}

/// r_k = sum_i a_{i+k} conj(b_i) for k >= 0, via zero-padded FFTs.
fn correlate(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut fa: Vec<Complex64> = a.iter().copied().chain(std::iter::repeat(ZERO)).take(len).collect();
    let mut fb: Vec<Complex64> = b.iter().copied().chain(std::iter::repeat(ZERO)).take(len).collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y.conj();
    }
    inv.process(&mut fa);
    fa.truncate(n);
    fa.iter_mut().for_each(|v| *v /= len as f64);
    fa
}

/// Trapezoid double sum over a uniform grid of `intervals` steps, with
/// elements from [`brute_matrix_elements`]. Physical topologies only: the
/// effective single-channel model has no brute-force counterpart.
pub fn p1_brute_double_integral(
    instance: &GroverInstance,
    schedule: &Schedule,
    coupling: &CouplingConfig,
    kernel: &CorrelationKernel,
    channels: ChannelWeights,
    intervals: usize,
) -> Result<FailureEstimate> {
    coupling.validate()?;
    if coupling.topology == Topology::Effective {
        return Err(Error::Invalid("the brute-force oracle needs a physical topology (common or independent baths)".into()));
    }
    let tt = schedule.total_time();
    if !kernel.is_delta() && kernel.tau_max() < tt * (1.0 - 1e-12) {
        return Err(Error::KernelRange {
            needed: tt,
            available: kernel.tau_max(),
        });
    }
    let l2 = coupling.lambda * coupling.lambda;
    let el = brute_matrix_elements(instance, schedule, intervals, None)?;
    let k_len = intervals + 1;
    let weight = |i: usize| if i == 0 || i == intervals { 0.5 * el.dt } else { el.dt };
    let c: Vec<Complex64> = match kernel {
        CorrelationKernel::Delta { .. } => Vec::new(),
        _ => (0..k_len).map(|k| kernel.eval(k as f64 * el.dt)).collect::<Result<_>>()?,
    };
    let pair = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        match kernel {
            CorrelationKernel::Delta { strength } => {
                (0..k_len).map(|i| a[i] * b[i].conj() * weight(i)).sum::<Complex64>() * *strength
            }
            _ => {
                let aw: Vec<Complex64> = (0..k_len).map(|i| a[i] * weight(i)).collect();
                let bw: Vec<Complex64> = (0..k_len).map(|i| b[i] * weight(i)).collect();
                toeplitz_sum(&c, &aw, &bw)
            }
        }
    };
    let idx = |ch: Channel| if ch == Channel::X { 0 } else { 1 };
    let mut parts = [0.0f64; 4];
    for (slot, (mu, nu)) in ChannelWeights::pairs().into_iter().enumerate() {
        let cw = channels.get(mu, nu);
        if cw == 0.0 {
            continue;
        }
        let v = match coupling.topology {
            Topology::CommonBath => {
                let sum = |ch: Channel| -> Vec<Complex64> {
                    (0..k_len).map(|i| el.series.iter().map(|s| s[idx(ch)][i]).sum()).collect()
                };
                pair(&sum(mu), &sum(nu)).re
            }
            _ => el.series.iter().map(|s| pair(&s[idx(mu)], &s[idx(nu)]).re).sum(),
        };
        parts[slot] = l2 * cw * v;
    }
    let breakdown = ChannelWeights {
        xx: parts[0],
        xz: parts[1],
        zx: parts[2],
        zz: parts[3],
    };
    let value = breakdown.total();
    Ok(FailureEstimate {
        value,
        method: Method::BruteForce,
        numerical_error: 0.0,
        breakdown,
        terms: None,
        unreliable: value > 0.5,
        evaluations: el.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grover::MatrixElementForm;
    use crate::schedule::{ScheduleKind, Target};
    use crate::spectral::{correlation_kernel, SpectralModel};

    fn sched(n: u32, kind: ScheduleKind, target: Target) -> (GroverInstance, Schedule) {
        let i = GroverInstance::balanced(n).unwrap();
        let s = Schedule::build(kind, &i, target).unwrap();
        (i, s)
    }

    #[test]
    fn propagator_starts_at_identity_and_stays_unitary() {
        let (i, s) = sched(6, ScheduleKind::GapSquared, Target::Epsilon(0.1));
        let p0 = propagator_2x2(&i, &s, 0.0, None).unwrap();
        assert_eq!(p0.u, [[ONE, ZERO], [ZERO, ONE]]);
        let p = propagator_2x2(&i, &s, s.total_time(), None).unwrap();
        assert!(p.unitarity_error() < 1e-9, "{}", p.unitarity_error());
    }

    #[test]
    fn adiabatic_endpoint_is_the_marked_state() {
        let (i, s) = sched(2, ScheduleKind::GapSquared, Target::Runtime(400.0));
        let p = propagator_2x2(&i, &s, s.total_time(), None).unwrap();
        let a = 0.5f64;
        let psi = [Complex64::new(a, 0.0), Complex64::new((1.0 - a * a).sqrt(), 0.0)];
        let out = p.apply(psi);
        assert!(out[0].norm_sqr() > 0.999, "{}", out[0].norm_sqr());
    }

    #[test]
    fn full_evolution_reaches_marked_state_when_slow() {
        let (i, s) = sched(2, ScheduleKind::GapSquared, Target::Runtime(400.0));
        let st = evolve_full(&i, &s, None).unwrap();
        assert!(st.amplitudes[i.marked() as usize].norm_sqr() > 0.999);
    }

    #[test]
    fn sudden_limit_freezes_the_state() {
        let (i, s) = sched(4, ScheduleKind::Uniform, Target::Runtime(0.1));
        let st = evolve_full(&i, &s, None).unwrap();
        let psi0 = vec![Complex64::new(0.25, 0.0); 16];
        assert!(st.overlap(&psi0).norm_sqr() > 0.99);
    }

    #[test]
    fn full_space_matches_embedded_two_level_evolution() {
        let (i, s) = sched(8, ScheduleKind::GapSquared, Target::Epsilon(0.1));
        let steps = default_steps(&s);
        let st = evolve_full(&i, &s, Some(steps)).unwrap();
        let p = propagator_2x2(&i, &s, s.total_time(), Some(steps)).unwrap();
        let a = 1.0 / 16.0;
        let v = p.apply([Complex64::new(a, 0.0), Complex64::new((1.0 - a * a).sqrt(), 0.0)]);
        let emb = embed(&i, v).unwrap();
        let ov = st.overlap(&emb).norm_sqr();
        assert!(ov > 1.0 - 1e-6, "{ov}");
        assert!((st.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_space_never_leaves_the_subspace() {
        for n in [3, 6, 10] {
            for kind in ScheduleKind::ANALYTIC {
                let (i, s) = sched(n, kind, Target::Runtime(5.0));
                let st = evolve_full(&i, &s, Some(2000)).unwrap();
                // Outside the span all amplitudes off |w> are equal.
                let w = i.marked() as usize;
                let r = st.amplitudes[(w + 1) % st.amplitudes.len()];
                let spread = st.amplitudes.iter().enumerate().filter(|(x, _)| *x != w).map(|(_, v)| (v - r).norm()).fold(0.0, f64::max);
                assert!(spread < 1e-10, "n={n} {kind:?}: {spread}");
            }
        }
    }

    #[test]
    fn full_evolution_refuses_large_registers() {
        let (i, s) = sched(13, ScheduleKind::Uniform, Target::Runtime(1.0));
        assert!(evolve_full(&i, &s, Some(10)).is_err());
    }

    #[test]
    fn projected_paulis_are_hermitian() {
        let i = GroverInstance::from_bitstring("0110").unwrap();
        for a in 0..4 {
            for ch in [Channel::X, Channel::Y, Channel::Z] {
                let m = projected_pauli(&i, a, ch).unwrap();
                assert!((m[0][1] - m[1][0].conj()).norm() < 1e-14);
                assert!(m[0][0].im.abs() < 1e-14 && m[1][1].im.abs() < 1e-14);
            }
            // <w|Z_a|w> = (-1)^{w_a}
            let z = projected_pauli(&i, a, Channel::Z).unwrap();
            assert_eq!(z[0][0].re, if i.bit(a) == 1 { -1.0 } else { 1.0 });
        }
    }

    #[test]
    fn elements_track_the_analytic_magnitude_at_mid_run() {
        let (i, s) = sched(6, ScheduleKind::GapSquared, Target::Epsilon(0.02));
        let el = brute_matrix_elements(&i, &s, 400, None).unwrap();
        let k = 200;
        let t = k as f64 * el.dt;
        let sv = s.s_of_t(t).unwrap();
        let exact = i.transition_element(0, Channel::X, sv, MatrixElementForm::FiniteN).unwrap().norm();
        let got = el.series[0][0][k].norm();
        assert!((got - exact).abs() / exact < 1e-2, "{got} vs {exact}");
    }

    #[test]
    fn fft_and_direct_toeplitz_sums_agree() {
        let n = 700;
        let c: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar((-0.01 * k as f64).exp(), 0.3 * k as f64)).collect();
        let a: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0 + (k as f64 * 0.1).sin(), 0.05 * k as f64)).collect();
        let b: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64 * 0.02).cos(), 0.1)).collect();
        let fast = toeplitz_sum(&c, &a, &b);
        let slow = toeplitz_sum_direct(&c, &a, &b);
        assert!((fast - slow).norm() < 1e-9 * slow.norm(), "{fast} {slow}");
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let (i, s) = sched(4, ScheduleKind::GapSquared, Target::Epsilon(0.1));
        let k = CorrelationKernel::Delta { strength: 1.0 };
        let c = CouplingConfig::new(0.0, Topology::IndependentBaths);
        let p = p1_brute_double_integral(&i, &s, &c, &k, ChannelWeights::XX_ONLY, 100).unwrap();
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn double_sum_converges_at_second_order() {
        let (i, s) = sched(4, ScheduleKind::GapSquared, Target::Epsilon(0.1));
        let model = SpectralModel::flat_box(-0.8, -0.2, 1.0);
        let c = CouplingConfig::new(0.01, Topology::IndependentBaths).with_form(MatrixElementForm::FiniteN);
        let tt = s.total_time();
        let run = |k: usize| {
            let ker = correlation_kernel(&model, tt, tt / k as f64).unwrap();
            p1_brute_double_integral(&i, &s, &c, &ker, ChannelWeights::XX_ONLY, k).unwrap().value
        };
        let (p1, p2, p3) = (run(100), run(200), run(400));
        let ratio = (p1 - p2).abs() / (p2 - p3).abs();
        assert!(ratio > 3.0, "{p1} {p2} {p3} ratio {ratio}");
    }
}
