//! Globally adaptive Gauss-Kronrod quadrature for real or complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauss::gk15;
use crate::error::{Error, Result};

/// Values the adaptive driver can integrate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
    fn into_complex(self) -> Complex64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn into_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
    fn into_complex(self) -> Complex64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub fn re(&self) -> f64 {
        self.value.re
    }
}

/// Absolute/relative target; the stricter of the two is never demanded,
/// the looser one wins (`err <= max(abs, rel * |I|)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-10,
        }
    }
}

pub const DEFAULT_BUDGET: usize = 2_000_000;

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn panel<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> Result<(Segment<V>, usize)> {
    let (k, g, n) = gk15(f, a, b);
    let kn = k.norm();
    if !kn.is_finite() || !(k - g).norm().is_finite() {
        return Err(Error::NonFinite { at: 0.5 * (a + b) });
    }
    // Roundoff floor keeps the driver from chasing noise.
    let err = (k - g).norm().max(50.0 * f64::EPSILON * kn);
    Ok((Segment { a, b, value: k, err }, n))
}

/// Adaptive quadrature of `f` over each of the given consecutive breakpoints.
///
/// Splitting at known kinks or oscillation boundaries up front is much cheaper
/// than letting bisection discover them.
pub fn integrate_pieces<V, F>(mut f: F, breaks: &[f64], tol: Tolerance, budget: usize) -> Result<(V, f64, usize)>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    if breaks.len() < 2 {
        return Err(Error::Invalid("quadrature needs at least one interval".into()));
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut evals = 0;
    for w in breaks.windows(2) {
        if !(w[1] > w[0]) {
            if w[1] == w[0] {
                continue;
            }
            return Err(Error::Invalid(format!("interval [{}, {}] is reversed", w[0], w[1])));
        }
        let (seg, n) = panel(&mut f, w[0], w[1])?;
        evals += n;
        heap.push(seg);
    }
    if heap.is_empty() {
        return Ok((V::zero(), 0.0, 0));
    }
    let total = |h: &BinaryHeap<Segment<V>>| {
        let mut v = V::zero();
        let mut e = 0.0;
        for s in h.iter() {
            v = v + s.value;
            e += s.err;
        }
        (v, e)
    };
    let (mut value, mut err) = total(&heap);
    let mut since_resum = 0;
    loop {
        let target = tol.abs.max(tol.rel * value.norm());
        if err <= target {
            break;
        }
        if evals + 30 > budget {
            return Err(Error::Budget { budget });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let at_floor = worst.err <= 50.0 * f64::EPSILON * worst.value.norm();
        if at_floor || !(mid > worst.a && mid < worst.b) {
            // Worst panel is at roundoff or at floating-point resolution;
            // nothing left to gain.
            heap.push(worst);
            break;
        }
        let (l, n1) = panel(&mut f, worst.a, mid)?;
        let (r, n2) = panel(&mut f, mid, worst.b)?;
        evals += n1 + n2;
        value = value - worst.value + l.value + r.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        since_resum += 1;
        if since_resum == 64 {
            (value, err) = total(&heap);
            since_resum = 0;
        }
    }
    let (value, err) = total(&heap);
    Ok((value, err, evals))
}

/// Real adaptive quadrature over [a, b].
pub fn adaptive_quad<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadratureResult> {
    adaptive_quad_budget(f, a, b, tol, DEFAULT_BUDGET)
}

pub fn adaptive_quad_budget<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    budget: usize,
) -> Result<QuadratureResult> {
    if !(a < b) {
        if a == b {
            return Ok(QuadratureResult {
                value: Complex64::new(0.0, 0.0),
                abs_error_estimate: 0.0,
                evaluations: 0,
            });
        }
        return Err(Error::Invalid(format!("quadrature bounds reversed: [{a}, {b}]")));
    }
    let (v, e, n) = integrate_pieces(f, &[a, b], tol, budget)?;
    Ok(QuadratureResult {
        value: v.into_complex(),
        abs_error_estimate: e,
        evaluations: n,
    })
}

/// Complex adaptive quadrature over consecutive breakpoints.
pub fn adaptive_quad_complex<F: FnMut(f64) -> Complex64>(
    f: F,
    breaks: &[f64],
    tol: Tolerance,
    budget: usize,
) -> Result<QuadratureResult> {
    let (v, e, n) = integrate_pieces(f, breaks, tol, budget)?;
    Ok(QuadratureResult {
        value: v,
        abs_error_estimate: e,
        evaluations: n,
    })
}
