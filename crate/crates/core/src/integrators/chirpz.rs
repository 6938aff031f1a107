//! Chirp-z transform: sums of the form
//!
//! y_k = sum_j x_j exp(i (u0 + j du)(v0 + k dv)),  k = 0..m
//!
//! for arbitrary (non-commensurate) grid spacings, via one FFT convolution.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn chirp_z(x: &[Complex64], u0: f64, du: f64, v0: f64, dv: f64, m: usize) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 || m == 0 {
        return vec![Complex64::new(0.0, 0.0); m];
    }
    let alpha = du * dv;
    let len = (n + m - 1).next_power_of_two();
    let cis = |p: f64| Complex64::from_polar(1.0, p);

    let mut a = vec![Complex64::new(0.0, 0.0); len];
    for (j, (aj, xj)) in a.iter_mut().zip(x).enumerate() {
        let jf = j as f64;
        *aj = xj * cis(du * v0 * jf + 0.5 * alpha * jf * jf);
    }
    let mut b = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..m {
        let kf = k as f64;
        b[k] = cis(-0.5 * alpha * kf * kf);
    }
    for j in 1..n {
        let jf = j as f64;
        b[len - j] = cis(-0.5 * alpha * jf * jf);
    }

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    inv.process(&mut a);

    let scale = 1.0 / len as f64;
    (0..m)
        .map(|k| {
            let kf = k as f64;
            a[k] * scale * cis(u0 * v0 + u0 * dv * kf + 0.5 * alpha * kf * kf)
        })
        .collect()
}

/// Plain O(n) evaluation of the same sum at a single point v.
pub fn direct_sum(x: &[Complex64], u0: f64, du: f64, v: f64) -> Complex64 {
    // Rotate incrementally, re-anchoring every so often to bound drift.
    let step = Complex64::from_polar(1.0, du * v);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut rot = Complex64::from_polar(1.0, u0 * v);
    for (j, xj) in x.iter().enumerate() {
        if j % 256 == 0 {
            rot = Complex64::from_polar(1.0, (u0 + j as f64 * du) * v);
        }
        acc += xj * rot;
        rot *= step;
    }
    acc
}

/// Circular-free cross-correlation c_k = sum_i a_{i+k} conj(b_i), k = 0..n-1,
/// for equal-length inputs.
pub fn cross_correlation(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    assert_eq!(n, b.len(), "correlation inputs must have equal length");
    if n == 0 {
        return Vec::new();
    }
    let len = (2 * n).next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); len];
    let mut fb = vec![Complex64::new(0.0, 0.0); len];
    fa[..n].copy_from_slice(a);
    fb[..n].copy_from_slice(b);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y.conj();
    }
    inv.process(&mut fa);
    let scale = 1.0 / len as f64;
    fa.truncate(n);
    fa.iter_mut().for_each(|v| *v *= scale);
    fa
}
