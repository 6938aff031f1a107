//! Two-level effective model of the adiabatic Grover Hamiltonian
//! H(s) = 1 - (1-s)|psi0><psi0| - s|w><w| restricted to span{|w>, |w_perp>}.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhaseIntegral;
use crate::schedule::Schedule;

/// Largest register for which N = 2^n stays exactly representable in f64
/// together with its square root.
pub const MAX_QUBITS: u32 = 52;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroverInstance {
    n_qubits: u32,
    marked: u64,
}

impl GroverInstance {
    pub fn new(n_qubits: u32, marked: u64) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::Invalid(format!(
                "n_qubits = {n_qubits} must lie in 1..={MAX_QUBITS} (N >= 2)"
            )));
        }
        if marked >> n_qubits != 0 {
            return Err(Error::Invalid(format!("marked state {marked} does not fit in {n_qubits} qubits")));
        }
        Ok(GroverInstance { n_qubits, marked })
    }

    /// Marked state 0101... which has (nearly) as many zeros as ones.
    pub fn balanced(n_qubits: u32) -> Result<Self> {
        let mut w = 0u64;
        for a in 0..n_qubits {
            w = (w << 1) | (a % 2) as u64;
        }
        Self::new(n_qubits, w)
    }

    /// Parses a bitstring; character `a` is the bit of qubit `a`.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Invalid(format!("'{bits}' is not a bitstring")));
        }
        let n = bits.len() as u32;
        if n > MAX_QUBITS {
            return Err(Error::Invalid(format!("{n} qubits exceeds the supported {MAX_QUBITS}")));
        }
        let w = u64::from_str_radix(bits, 2).map_err(|e| Error::Invalid(e.to_string()))?;
        Self::new(n, w)
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn marked(&self) -> u64 {
        self.marked
    }

    /// N = 2^n.
    pub fn dim(&self) -> u64 {
        1u64 << self.n_qubits
    }

    pub fn size(&self) -> f64 {
        self.dim() as f64
    }

    /// Bit w_a of the marked state.
    pub fn bit(&self, qubit: u32) -> u8 {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        ((self.marked >> (self.n_qubits - 1 - qubit)) & 1) as u8
    }

    pub fn bitstring(&self) -> String {
        (0..self.n_qubits).map(|a| if self.bit(a) == 1 { '1' } else { '0' }).collect()
    }

    pub fn gap(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(gap_raw(self.size(), s))
    }

    pub fn gap_min(&self) -> f64 {
        1.0 / self.size().sqrt()
    }

    pub fn effective_hamiltonian(&self, s: f64) -> Result<EffectiveHamiltonian> {
        check_s(s)?;
        let n = self.size();
        let a2 = 1.0 / n;
        let b2 = 1.0 - a2;
        let ab = (a2 * b2).sqrt();
        let h = [[1.0 - (1.0 - s) * a2 - s, -(1.0 - s) * ab], [-(1.0 - s) * ab, 1.0 - (1.0 - s) * b2]];
        Ok(EffectiveHamiltonian { s, h })
    }

    /// |<E1| dH/ds |E0>| evaluated from the eigenvectors of the 2x2 model.
    pub fn derivative_coupling(&self, s: f64) -> Result<f64> {
        let eig = self.effective_hamiltonian(s)?.eigen();
        let n = self.size();
        let a2 = 1.0 / n;
        let ab = (a2 * (1.0 - a2)).sqrt();
        // dH/ds = |psi0><psi0| - |w><w|
        let dh = [[a2 - 1.0, ab], [ab, 1.0 - a2]];
        let (g, x) = (eig.ground, eig.excited);
        let v = x[0] * (dh[0][0] * g[0] + dh[0][1] * g[1]) + x[1] * (dh[1][0] * g[0] + dh[1][1] * g[1]);
        Ok(v.abs())
    }
}

impl fmt::Display for GroverInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} w={}", self.n_qubits, self.bitstring())
    }
}

fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::domain("s", s, "[0, 1]"))
    }
}

/// Gap for a register of `n_states` basis states, written to avoid the
/// cancellation in 1 - 4s(1-s)(1 - 1/N) near s = 1/2.
#[inline]
pub fn gap_raw(n_states: f64, s: f64) -> f64 {
    let u = 1.0 - 2.0 * s;
    (u * u + 4.0 * s * (1.0 - s) / n_states).sqrt()
}

/// dGap/ds.
#[inline]
pub fn gap_slope(n_states: f64, s: f64) -> f64 {
    let u = 2.0 * s - 1.0;
    2.0 * (1.0 - 1.0 / n_states) * u / gap_raw(n_states, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveHamiltonian {
    pub s: f64,
    /// Matrix in the ordered basis (|w>, |w_perp>).
    pub h: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigensystem {
    pub energies: [f64; 2],
    /// Ground state with non-negative components.
    pub ground: [f64; 2],
    /// Excited state fixed as (g_2, -g_1) so it varies continuously in s.
    pub excited: [f64; 2],
}

impl EffectiveHamiltonian {
    pub fn eigen(&self) -> Eigensystem {
        let [[h11, h12], [_, h22]] = self.h;
        let m = 0.5 * (h11 + h22);
        let d = 0.5 * (h11 - h22);
        let r = d.hypot(h12);
        // Off-diagonal is non-positive, so the ground state is non-negative.
        let g = if d >= 0.0 { [-h12, d + r] } else { [r - d, -h12] };
        let norm = g[0].hypot(g[1]);
        let ground = [g[0] / norm, g[1] / norm];
        Eigensystem {
            energies: [m - r, m + r],
            ground,
            excited: [ground[1], -ground[0]],
        }
    }

    pub fn splitting(&self) -> f64 {
        let [[h11, h12], [_, h22]] = self.h;
        (h11 - h22).hypot(2.0 * h12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Z,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Z => "z",
        }
    }
}

impl FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Channel::X),
            "y" => Ok(Channel::Y),
            "z" => Ok(Channel::Z),
            _ => Err(Error::Invalid(format!("unknown channel '{s}'"))),
        }
    }
}

/// Normalisation of the transition elements.
///
/// `LargeN` uses 1/sqrt(N), the leading large-N form. `FiniteN` uses the
/// exact 1/sqrt(N-1) of the two-level projection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixElementForm {
    #[default]
    LargeN,
    FiniteN,
}

impl MatrixElementForm {
    #[inline]
    pub(crate) fn norm(self, n_states: f64) -> f64 {
        match self {
            MatrixElementForm::LargeN => n_states.sqrt(),
            MatrixElementForm::FiniteN => (n_states - 1.0).sqrt(),
        }
    }
}

/// Magnitude profile m(s) >= 0 of a channel; the signed element for qubit a
/// is `channel_sign(a) * m(s)` (times i for y).
#[inline]
pub fn channel_profile(n_states: f64, channel: Channel, s: f64, form: MatrixElementForm) -> f64 {
    let norm = form.norm(n_states);
    match channel {
        Channel::X => s / (norm * gap_raw(n_states, s)),
        Channel::Z => (1.0 - s) / (norm * gap_raw(n_states, s)),
        Channel::Y => 1.0 / norm,
    }
}

impl GroverInstance {
    /// Sign c^mu_a of the channel-mu element for qubit a: -1 for x,
    /// (-1)^{w_a} for y and z.
    pub fn channel_sign(&self, qubit: u32, channel: Channel) -> f64 {
        match channel {
            Channel::X => -1.0,
            Channel::Y | Channel::Z => {
                if self.bit(qubit) == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// <E0(s)| sigma^mu_a |E1(s)> without the dynamical phase.
    pub fn transition_element(&self, qubit: u32, channel: Channel, s: f64, form: MatrixElementForm) -> Result<Complex64> {
        check_s(s)?;
        if qubit >= self.n_qubits {
            return Err(Error::Invalid(format!("qubit {qubit} out of range for n = {}", self.n_qubits)));
        }
        let v = self.channel_sign(qubit, channel) * channel_profile(self.size(), channel, s, form);
        Ok(match channel {
            Channel::Y => Complex64::new(0.0, v),
            _ => Complex64::new(v, 0.0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElement {
    pub value: Complex64,
    /// Set for the y channel, which is O(1/sqrt N) smaller in effect and
    /// left out of the lowest-order failure engines.
    pub suppressed: bool,
}

/// Interaction-picture element e^{-i Phi(t)} <E0(t)| sigma^mu_a |E1(t)>.
pub fn matrix_element(
    instance: &GroverInstance,
    qubit: u32,
    channel: Channel,
    t: f64,
    schedule: &Schedule,
    phase: &PhaseIntegral,
    form: MatrixElementForm,
) -> Result<MatrixElement> {
    let s = schedule.s_of_t(t)?;
    let phi = phase.at(t)?;
    let v = instance.transition_element(qubit, channel, s, form)?;
    Ok(MatrixElement {
        value: v * Complex64::from_polar(1.0, -phi),
        suppressed: channel == Channel::Y,
    })
}

/// max_t |<E1| dH/dt |E0>| / gap^2 over the schedule.
pub fn adiabatic_error_estimate(instance: &GroverInstance, schedule: &Schedule) -> f64 {
    let mut best: f64 = 0.0;
    for (s, rate) in schedule.rate_candidates() {
        let g = gap_raw(instance.size(), s);
        let c = instance.derivative_coupling(s).unwrap_or(0.0);
        best = best.max(rate * c / (g * g));
    }
    best
}
