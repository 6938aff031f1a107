//! End-corrected trapezoid (Gregory) weights on uniform grids.
//!
//! Interior weights are one; the first and last few nodes carry corrections
//! that make the rule exact for polynomials well beyond the trapezoid's degree
//! one, without the ill-conditioning of high-order Newton-Cotes.

/// End weights of the 7-node correction, exact to degree 7.
pub const END6: [f64; 7] = [
    5257.0 / 17280.0,
    22081.0 / 15120.0,
    54851.0 / 120960.0,
    103.0 / 70.0,
    89437.0 / 120960.0,
    16367.0 / 15120.0,
    23917.0 / 24192.0,
];

/// End weights of the 4-node correction, exact to degree 3.
pub const END3: [f64; 4] = [251.0 / 720.0, 299.0 / 240.0, 211.0 / 240.0, 739.0 / 720.0];

/// Quadrature weights for `points` equally spaced nodes with unit spacing.
///
/// Falls back to lower order when the grid is too short for the end
/// corrections not to overlap.
pub fn gregory_weights(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let mut w = vec![1.0; points];
            let end: &[f64] = if points >= 2 * END6.len() {
                &END6
            } else if points >= 2 * END3.len() {
                &END3
            } else {
                &[0.5]
            };
            for (j, &e) in end.iter().enumerate() {
                w[j] = e;
                w[points - 1 - j] = e;
            }
            w
        }
    }
}

/// Deviation of each end weight from one, used to patch FFT-computed sums.
pub(crate) fn end_deltas(points: usize) -> &'static [f64] {
    if points >= 2 * END6.len() {
        &END6_DELTA
    } else if points >= 2 * END3.len() {
        &END3_DELTA
    } else {
        &[-0.5]
    }
}

const END6_DELTA: [f64; 7] = [
    END6[0] - 1.0,
    END6[1] - 1.0,
    END6[2] - 1.0,
    END6[3] - 1.0,
    END6[4] - 1.0,
    END6[5] - 1.0,
    END6[6] - 1.0,
];
const END3_DELTA: [f64; 4] = [END3[0] - 1.0, END3[1] - 1.0, END3[2] - 1.0, END3[3] - 1.0];

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_monomial(points: usize, deg: i32) -> (f64, f64) {
        let w = gregory_weights(points);
        let k = (points - 1) as f64;
        let h = 1.0 / k;
        let q: f64 = w.iter().enumerate().map(|(i, wi)| wi * (i as f64 * h).powi(deg)).sum::<f64>() * h;
        (q, 1.0 / (deg as f64 + 1.0))
    }

    #[test]
    fn exact_to_degree_seven_for_any_length() {
        for points in [14usize, 15, 20, 57, 200] {
            for deg in 0..=7 {
                let (q, exact) = integrate_monomial(points, deg);
                assert!((q - exact).abs() < 1e-13, "points {points} degree {deg}: {q}");
            }
        }
    }

    #[test]
    fn short_grids_fall_back() {
        for points in 8..14 {
            for deg in 0..=3 {
                let (q, exact) = integrate_monomial(points, deg);
                assert!((q - exact).abs() < 1e-13);
            }
        }
        let (q, _) = integrate_monomial(2, 1);
        assert!((q - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_length() {
        for points in 2..60 {
            let s: f64 = gregory_weights(points).iter().sum();
            assert!((s - (points - 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn eighth_order_convergence_on_smooth_function() {
        let f = |x: f64| (3.0 * x).cos();
        let exact = 3f64.sin() / 3.0;
        let err = |k: usize| {
            let w = gregory_weights(k + 1);
            let h = 1.0 / k as f64;
            (w.iter().enumerate().map(|(i, wi)| wi * f(i as f64 * h)).sum::<f64>() * h - exact).abs()
        };
        let ratio = err(40) / err(80);
        assert!(ratio > 150.0, "ratio {ratio}");
    }
}
