//! Bath spectral functions, channel/topology weights and correlation kernels.
//!
//! Sign convention: omega < 0 excites the system (absorption from the bath),
//! omega > 0 is emission into the bath.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{Channel, GroverInstance, MatrixElementForm};
use crate::integrators::chirpz::chirp_z;
use crate::integrators::gauss::gauss_legendre_on;
use crate::integrators::gregory::gregory_weights;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectralKind {
    /// Delta-correlated bath, C(tau) = A delta(tau); flat f = A / 2 pi.
    MarkovianDelta { strength: f64 },
    /// f = C |omega|^p B(omega, theta) for omega_min <= |omega| <= omega_max.
    PowerLaw {
        #[serde(rename = "p")]
        exponent: f64,
        #[serde(rename = "C", default = "one")]
        prefactor: f64,
        #[serde(default)]
        omega_min: f64,
        #[serde(default = "one")]
        omega_max: f64,
        /// Bath temperature; absent means the high-temperature limit B = 1.
        #[serde(default)]
        theta: Option<f64>,
    },
    /// Linear interpolation through (omega, f) samples, zero outside.
    Tabulated { omega: Vec<f64>, density: Vec<f64> },
    /// Constant `level` on [lo, hi].
    Box { lo: f64, hi: f64, level: f64 },
    Sum { parts: Vec<SpectralKind> },
}

fn one() -> f64 {
    1.0
}

/// Per channel-pair multipliers (xx, xz, zx, zz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelWeights {
    #[serde(default)]
    pub xx: f64,
    #[serde(default)]
    pub xz: f64,
    #[serde(default)]
    pub zx: f64,
    #[serde(default)]
    pub zz: f64,
}

impl ChannelWeights {
    pub const XX_ONLY: ChannelWeights = ChannelWeights {
        xx: 1.0,
        xz: 0.0,
        zx: 0.0,
        zz: 0.0,
    };
    pub const ALL: ChannelWeights = ChannelWeights {
        xx: 1.0,
        xz: 1.0,
        zx: 1.0,
        zz: 1.0,
    };

    pub fn get(&self, mu: Channel, nu: Channel) -> f64 {
        match (mu, nu) {
            (Channel::X, Channel::X) => self.xx,
            (Channel::X, Channel::Z) => self.xz,
            (Channel::Z, Channel::X) => self.zx,
            (Channel::Z, Channel::Z) => self.zz,
            _ => 0.0,
        }
    }

    pub fn pairs() -> [(Channel, Channel); 4] {
        [
            (Channel::X, Channel::X),
            (Channel::X, Channel::Z),
            (Channel::Z, Channel::X),
            (Channel::Z, Channel::Z),
        ]
    }

    pub(crate) fn from_fn(mut f: impl FnMut(Channel, Channel) -> f64) -> Self {
        ChannelWeights {
            xx: f(Channel::X, Channel::X),
            xz: f(Channel::X, Channel::Z),
            zx: f(Channel::Z, Channel::X),
            zz: f(Channel::Z, Channel::Z),
        }
    }

    pub fn total(&self) -> f64 {
        self.xx + self.xz + self.zx + self.zz
    }
}

impl Default for ChannelWeights {
    fn default() -> Self {
        Self::XX_ONLY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralModel {
    #[serde(flatten)]
    pub kind: SpectralKind,
    pub channel_weights: ChannelWeights,
}

impl<'de> Deserialize<'de> for SpectralModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut v = serde_json::Value::deserialize(d)?;
        let weights = match v.as_object_mut().and_then(|o| o.remove("channel_weights")) {
            Some(w) => serde_json::from_value(w).map_err(D::Error::custom)?,
            None => ChannelWeights::default(),
        };
        let kind = serde_json::from_value(v).map_err(D::Error::custom)?;
        Ok(SpectralModel {
            kind,
            channel_weights: weights,
        })
    }
}

/// B(omega, theta): n for absorption, n + 1 for emission, scaled by
/// |omega|/theta so that B -> 1 when theta >> |omega|.
pub fn detailed_balance(omega: f64, theta: Option<f64>) -> f64 {
    let Some(theta) = theta else { return 1.0 };
    let x = omega.abs() / theta;
    if x == 0.0 {
        return 1.0;
    }
    if omega < 0.0 {
        x / x.exp_m1()
    } else {
        x / -(-x).exp_m1()
    }
}

impl SpectralKind {
    fn density(&self, omega: f64) -> f64 {
        match self {
            SpectralKind::MarkovianDelta { strength } => strength / (2.0 * PI),
            SpectralKind::PowerLaw {
                exponent,
                prefactor,
                omega_min,
                omega_max,
                theta,
            } => {
                let a = omega.abs();
                if a < *omega_min || a > *omega_max || (a == 0.0 && *exponent < 0.0) {
                    if a == 0.0 && *exponent < 0.0 && *omega_min == 0.0 {
                        return f64::INFINITY;
                    }
                    return 0.0;
                }
                let pw = if *exponent == 0.0 { 1.0 } else { a.powf(*exponent) };
                prefactor * pw * detailed_balance(omega, *theta)
            }
            SpectralKind::Tabulated { omega: xs, density } => {
                if xs.is_empty() || omega < xs[0] || omega > xs[xs.len() - 1] {
                    return 0.0;
                }
                let k = match xs.binary_search_by(|x| x.total_cmp(&omega)) {
                    Ok(i) => return density[i],
                    Err(i) => i - 1,
                };
                let x = (omega - xs[k]) / (xs[k + 1] - xs[k]);
                density[k] + x * (density[k + 1] - density[k])
            }
            SpectralKind::Box { lo, hi, level } => {
                if omega >= *lo && omega <= *hi {
                    *level
                } else {
                    0.0
                }
            }
            SpectralKind::Sum { parts } => parts.iter().map(|p| p.density(omega)).sum(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        match self {
            SpectralKind::MarkovianDelta { strength } => {
                if !(*strength >= 0.0 && strength.is_finite()) {
                    return bad(format!("Markovian strength {strength} must be non-negative"));
                }
            }
            SpectralKind::PowerLaw {
                exponent,
                prefactor,
                omega_min,
                omega_max,
                theta,
            } => {
                if !exponent.is_finite() || !(*prefactor >= 0.0) || !prefactor.is_finite() {
                    return bad("power law needs finite p and C >= 0".into());
                }
                if !(*omega_min >= 0.0 && omega_max > omega_min && omega_max.is_finite()) {
                    return bad(format!("cutoffs must satisfy 0 <= {omega_min} < {omega_max}"));
                }
                if let Some(t) = theta {
                    if !(*t > 0.0) {
                        return bad(format!("temperature {t} must be positive"));
                    }
                }
            }
            SpectralKind::Tabulated { omega, density } => {
                if omega.len() < 2 || omega.len() != density.len() {
                    return bad("tabulated spectrum needs >= 2 (omega, f) pairs".into());
                }
                if omega.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("tabulated omega must be strictly increasing".into());
                }
                if density.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
                    return bad("tabulated density must be finite and non-negative".into());
                }
            }
            SpectralKind::Box { lo, hi, level } => {
                if !(hi > lo) || !(*level >= 0.0) || !lo.is_finite() || !hi.is_finite() {
                    return bad(format!("box [{lo}, {hi}] with level {level} is invalid"));
                }
            }
            SpectralKind::Sum { parts } => {
                if parts.is_empty() {
                    return bad("empty spectral sum".into());
                }
                for p in parts {
                    if matches!(p, SpectralKind::MarkovianDelta { .. }) {
                        return bad("a delta-correlated bath cannot be part of a sum".into());
                    }
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Smooth pieces of the support. Singular ends carry the local exponent.
    fn pieces(&self) -> Vec<Piece> {
        match self {
            SpectralKind::MarkovianDelta { .. } => Vec::new(),
            SpectralKind::PowerLaw {
                exponent,
                omega_min,
                omega_max,
                ..
            } => {
                let singular = *omega_min == 0.0 && !(exponent.fract() == 0.0 && *exponent >= 0.0);
                let e = if singular { Some(*exponent) } else { None };
                vec![
                    Piece {
                        lo: -omega_max,
                        hi: -omega_min,
                        sing_lo: None,
                        sing_hi: e,
                    },
                    Piece {
                        lo: *omega_min,
                        hi: *omega_max,
                        sing_lo: e,
                        sing_hi: None,
                    },
                ]
            }
            SpectralKind::Tabulated { omega, .. } => omega
                .windows(2)
                .map(|w| Piece {
                    lo: w[0],
                    hi: w[1],
                    sing_lo: None,
                    sing_hi: None,
                })
                .collect(),
            SpectralKind::Box { lo, hi, .. } => vec![Piece {
                lo: *lo,
                hi: *hi,
                sing_lo: None,
                sing_hi: None,
            }],
            SpectralKind::Sum { parts } => {
                let all: Vec<Piece> = parts.iter().flat_map(|p| p.pieces()).collect();
                let mut cuts: Vec<f64> = all.iter().flat_map(|p| [p.lo, p.hi]).collect();
                cuts.sort_by(|a, b| a.total_cmp(b));
                cuts.dedup();
                let mut out = Vec::new();
                for w in cuts.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    let covering: Vec<&Piece> = all.iter().filter(|p| p.lo <= lo && p.hi >= hi).collect();
                    if covering.is_empty() {
                        continue;
                    }
                    let worst = |xs: Vec<f64>| xs.into_iter().reduce(f64::min);
                    out.push(Piece {
                        lo,
                        hi,
                        sing_lo: worst(covering.iter().filter(|p| p.lo == lo).filter_map(|p| p.sing_lo).collect()),
                        sing_hi: worst(covering.iter().filter(|p| p.hi == hi).filter_map(|p| p.sing_hi).collect()),
                    });
                }
                out
            }
        }
    }

    fn bandwidth(&self) -> f64 {
        match self {
            SpectralKind::MarkovianDelta { .. } => f64::INFINITY,
            SpectralKind::PowerLaw { omega_max, .. } => *omega_max,
            SpectralKind::Tabulated { omega, .. } => omega[0].abs().max(omega[omega.len() - 1].abs()),
            SpectralKind::Box { lo, hi, .. } => lo.abs().max(hi.abs()),
            SpectralKind::Sum { parts } => parts.iter().map(|p| p.bandwidth()).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    lo: f64,
    hi: f64,
    sing_lo: Option<f64>,
    sing_hi: Option<f64>,
}

impl SpectralModel {
    pub fn new(kind: SpectralKind) -> Self {
        SpectralModel {
            kind,
            channel_weights: ChannelWeights::default(),
        }
    }

    pub fn with_channel_weights(mut self, w: ChannelWeights) -> Self {
        self.channel_weights = w;
        self
    }

    pub fn power_law(exponent: f64, prefactor: f64) -> Self {
        Self::new(SpectralKind::PowerLaw {
            exponent,
            prefactor,
            omega_min: 0.0,
            omega_max: 1.0,
            theta: None,
        })
    }

    pub fn flat_box(lo: f64, hi: f64, level: f64) -> Self {
        Self::new(SpectralKind::Box { lo, hi, level })
    }

    pub fn markovian(strength: f64) -> Self {
        Self::new(SpectralKind::MarkovianDelta { strength })
    }

    /// f(omega). A delta-correlated bath reports its flat level A / 2 pi; see
    /// [`SpectralModel::is_flat`].
    pub fn f_eval(&self, omega: f64) -> f64 {
        self.kind.density(omega)
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, SpectralKind::MarkovianDelta { .. })
    }

    pub fn markovian_strength(&self) -> Option<f64> {
        match self.kind {
            SpectralKind::MarkovianDelta { strength } => Some(strength),
            _ => None,
        }
    }

    /// Largest |omega| with non-zero density.
    pub fn bandwidth(&self) -> f64 {
        self.kind.bandwidth()
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()
    }

    /// Adds `other` to this spectrum, keeping this model's channel weights.
    pub fn plus(self, other: SpectralKind) -> Self {
        let parts = match self.kind {
            SpectralKind::Sum { mut parts } => {
                parts.push(other);
                parts
            }
            k => vec![k, other],
        };
        SpectralModel {
            kind: SpectralKind::Sum { parts },
            channel_weights: self.channel_weights,
        }
    }

    /// Two-column (omega, f) CSV; a header row is optional.
    pub fn load_tabulated(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let (mut xs, mut fs) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Invalid(format!("row {} has fewer than two columns", i + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(f)) => {
                    xs.push(x);
                    fs.push(f);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::Invalid(format!("row {} is not numeric", i + 1))),
            }
        }
        let m = Self::new(SpectralKind::Tabulated { omega: xs, density: fs });
        m.validate()?;
        Ok(m)
    }

    /// Quadrature rule for int f(omega) g(omega) d omega, resolving g up to
    /// oscillation frequency ~ `dphi / max_step` in omega.
    pub(crate) fn frequency_rule(&self, max_step: f64) -> Result<FrequencyRule> {
        self.frequency_rule_clipped(max_step, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// As [`frequency_rule`](Self::frequency_rule), restricted to lo <= omega <= hi.
    pub(crate) fn frequency_rule_clipped(&self, max_step: f64, lo: f64, hi: f64) -> Result<FrequencyRule> {
        self.validate()?;
        check_infrared(&self.kind)?;
        let mut rule = FrequencyRule::default();
        for mut piece in self.kind.pieces() {
            if piece.lo < lo {
                piece.lo = lo;
                piece.sing_lo = None;
            }
            if piece.hi > hi {
                piece.hi = hi;
                piece.sing_hi = None;
            }
            add_piece(&mut rule, &self.kind, piece, max_step);
        }
        Ok(rule)
    }
}

fn check_infrared(kind: &SpectralKind) -> Result<()> {
    match kind {
        SpectralKind::PowerLaw { exponent, omega_min, .. } if *omega_min == 0.0 && *exponent <= -1.0 => {
            Err(Error::InfraredDivergence { p: *exponent })
        }
        SpectralKind::Sum { parts } => parts.iter().try_for_each(check_infrared),
        _ => Ok(()),
    }
}

/// Uniformly spaced part of a frequency rule; `weights` already include f.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct UniformSegment {
    pub start: f64,
    pub step: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct FrequencyRule {
    pub segments: Vec<UniformSegment>,
    /// Scattered (omega, weight * f) nodes.
    pub nodes: Vec<(f64, f64)>,
}

impl FrequencyRule {
    pub fn len(&self) -> usize {
        self.nodes.len() + self.segments.iter().map(|s| s.weights.len()).sum::<usize>()
    }

    #[cfg(test)]
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for seg in &self.segments {
            for (j, w) in seg.weights.iter().enumerate() {
                acc += w * g(seg.start + j as f64 * seg.step);
            }
        }
        acc + self.nodes.iter().map(|(x, w)| w * g(*x)).sum::<f64>()
    }

    /// sum_j w_j m(omega_j) exp(-i omega_j tau_k) for tau_k = k * h, k < count.
    pub fn fourier(&self, h: f64, count: usize, m: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        for seg in &self.segments {
            let x: Vec<Complex64> = seg
                .weights
                .iter()
                .enumerate()
                .map(|(j, w)| m(seg.start + j as f64 * seg.step) * *w)
                .collect();
            let y = chirp_z(&x, seg.start, seg.step, 0.0, -h, count);
            out.iter_mut().zip(y).for_each(|(o, v)| *o += v);
        }
        for &(omega, w) in &self.nodes {
            let amp = m(omega) * w;
            let step = Complex64::from_polar(1.0, -omega * h);
            let mut rot = Complex64::new(1.0, 0.0);
            for (k, o) in out.iter_mut().enumerate() {
                if k % 256 == 0 {
                    rot = Complex64::from_polar(1.0, -omega * h * k as f64);
                }
                *o += amp * rot;
                rot *= step;
            }
        }
        out
    }
}

/// Gauss-Legendre points on the graded end regions.
const GRADED_POINTS: usize = 64;

fn add_piece(rule: &mut FrequencyRule, kind: &SpectralKind, piece: Piece, max_step: f64) {
    let Piece {
        mut lo,
        mut hi,
        sing_lo,
        sing_hi,
    } = piece;
    let width = hi - lo;
    if !(width > 0.0) {
        return;
    }
    let delta = (0.25 * width).min(32.0 * max_step);
    // omega = end +/- delta v^k turns |omega - end|^p dw into v^3 dv.
    let mut graded = |end: f64, dir: f64, p: f64| {
        let k = (4.0 / (p + 1.0)).max(1.0);
        let (v, w) = gauss_legendre_on(GRADED_POINTS, 0.0, 1.0);
        for (vi, wi) in v.into_iter().zip(w) {
            let omega = end + dir * delta * vi.powf(k);
            let jac = k * delta * vi.powf(k - 1.0);
            rule.nodes.push((omega, wi * jac * kind.density(omega)));
        }
    };
    if let Some(p) = sing_lo {
        graded(lo, 1.0, p);
        lo += delta;
    }
    if let Some(p) = sing_hi {
        graded(hi, -1.0, p);
        hi -= delta;
    }
    let width = hi - lo;
    let m = (width / max_step).ceil() as usize;
    if m + 1 >= 32 {
        let step = width / m as f64;
        let weights = gregory_weights(m + 1)
            .into_iter()
            .enumerate()
            .map(|(j, g)| {
                // End nodes take the one-sided limit from inside the piece, so
                // a jump at a shared breakpoint is not counted twice.
                let inset = 1e-13 * width;
                let omega = match j {
                    0 => lo + inset,
                    _ if j == m => hi - inset,
                    _ => lo + j as f64 * step,
                };
                g * step * kind.density(omega)
            })
            .collect();
        rule.segments.push(UniformSegment { start: lo, step, weights });
    } else {
        let n = (2 * m + 16).min(64);
        let (x, w) = gauss_legendre_on(n, lo, hi);
        for (xi, wi) in x.into_iter().zip(w) {
            rule.nodes.push((xi, wi * kind.density(xi)));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    PhotonThermal(u8),
    PhononThermal(u8),
    PhotonZeroTemperature(u8),
    PhononZeroTemperature(u8),
    Ohmic,
    Markovian,
}

impl Preset {
    /// Infrared exponent p of f ~ |omega|^p.
    pub fn exponent(self) -> Option<f64> {
        let d = |d: u8| d as f64;
        match self {
            Preset::PhotonThermal(dim) => Some(d(dim) - 1.0),
            Preset::PhononThermal(dim) => Some(d(dim) - 3.0),
            Preset::PhotonZeroTemperature(dim) => Some(d(dim)),
            Preset::PhononZeroTemperature(dim) => Some(d(dim) - 2.0),
            Preset::Ohmic => Some(1.0),
            Preset::Markovian => None,
        }
    }

    pub fn dimension(self) -> Option<u8> {
        match self {
            Preset::PhotonThermal(d) | Preset::PhononThermal(d) | Preset::PhotonZeroTemperature(d) | Preset::PhononZeroTemperature(d) => {
                Some(d)
            }
            _ => None,
        }
    }

    fn check(self) -> Result<Self> {
        match self.dimension() {
            Some(d) if !(1..=3).contains(&d) => Err(Error::Invalid(format!("spatial dimension {d} must be 1, 2 or 3"))),
            _ => Ok(self),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::PhotonThermal(d) => write!(f, "photon_thermal({d})"),
            Preset::PhononThermal(d) => write!(f, "phonon_thermal({d})"),
            Preset::PhotonZeroTemperature(d) => write!(f, "photon_zero_temperature({d})"),
            Preset::PhononZeroTemperature(d) => write!(f, "phonon_zero_temperature({d})"),
            Preset::Ohmic => f.write_str("ohmic"),
            Preset::Markovian => f.write_str("markovian"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once('(') {
            Some((n, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Invalid(format!("unterminated preset '{s}'")))?;
                let d = inner.trim().parse::<u8>().map_err(|_| Error::Invalid(format!("bad dimension in '{s}'")))?;
                (n.trim().to_string(), Some(d))
            }
            None => (s.clone(), None),
        };
        let need = |d: Option<u8>| d.ok_or_else(|| Error::Invalid(format!("preset '{name}' needs a dimension, e.g. {name}(3)")));
        let p = match name.as_str() {
            "photon_thermal" => Preset::PhotonThermal(need(arg)?),
            "phonon_thermal" => Preset::PhononThermal(need(arg)?),
            "photon_zero_temperature" => Preset::PhotonZeroTemperature(need(arg)?),
            "phonon_zero_temperature" => Preset::PhononZeroTemperature(need(arg)?),
            "ohmic" => Preset::Ohmic,
            "markovian" => Preset::Markovian,
            _ => return Err(Error::Invalid(format!("unknown preset '{s}'"))),
        };
        p.check()
    }
}

/// Free parameters of a preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PresetParams {
    #[serde(rename = "C")]
    pub prefactor: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub theta: Option<f64>,
    /// Strength A of the delta-correlated preset.
    pub strength: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            prefactor: 1.0,
            omega_min: 0.0,
            omega_max: 1.0,
            theta: None,
            strength: 1.0,
        }
    }
}

pub fn preset(which: Preset, params: PresetParams) -> Result<SpectralModel> {
    let which = which.check()?;
    Ok(match which.exponent() {
        None => SpectralModel::markovian(params.strength),
        Some(p) => SpectralModel::new(SpectralKind::PowerLaw {
            exponent: p,
            prefactor: params.prefactor,
            omega_min: params.omega_min,
            omega_max: params.omega_max,
            theta: params.theta,
        }),
    })
}

/// How the bath couples to the register.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// One bath seen by every qubit: amplitudes add before squaring.
    CommonBath,
    /// A separate bath per qubit: probabilities add.
    #[default]
    IndependentBaths,
    /// f is already the summed effective spectrum; unit weight per channel.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub lambda: f64,
    #[serde(default)]
    pub topology: Topology,
    #[serde(default)]
    pub form: MatrixElementForm,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig {
            lambda: 0.01,
            topology: Topology::default(),
            form: MatrixElementForm::default(),
        }
    }
}

impl CouplingConfig {
    pub fn new(lambda: f64, topology: Topology) -> Self {
        CouplingConfig {
            lambda,
            topology,
            form: MatrixElementForm::default(),
        }
    }

    pub fn with_form(mut self, form: MatrixElementForm) -> Self {
        self.form = form;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::domain("lambda", self.lambda, "[0, inf)"));
        }
        Ok(())
    }

    /// Lowest-order engines assume lambda^2 << 1.
    pub fn warning(&self) -> Option<String> {
        (self.lambda > 0.1).then(|| format!("lambda = {} is above 0.1; second-order results may be unreliable", self.lambda))
    }
}

/// Topology weights W_{mu nu} with the signed channel coefficients
/// c^x_a = -1 and c^z_a = (-1)^{w_a}.
pub fn topology_weights(topology: Topology, instance: &GroverInstance) -> ChannelWeights {
    let n = instance.n_qubits();
    let c = |ch: Channel, a: u32| instance.channel_sign(a, ch);
    ChannelWeights::from_fn(|mu, nu| match topology {
        Topology::Effective => 1.0,
        Topology::CommonBath => (0..n).map(|a| c(mu, a)).sum::<f64>() * (0..n).map(|a| c(nu, a)).sum::<f64>(),
        Topology::IndependentBaths => (0..n).map(|a| c(mu, a) * c(nu, a)).sum(),
    })
}

/// Topology weight times the model's channel weight for each pair.
pub fn effective_weight(config: &CouplingConfig, instance: &GroverInstance, model: &SpectralModel) -> ChannelWeights {
    let w = topology_weights(config.topology, instance);
    ChannelWeights::from_fn(|mu, nu| w.get(mu, nu) * model.channel_weights.get(mu, nu))
}

/// Bath correlation C(tau) = int e^{-i omega tau} f(omega) d omega.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationKernel {
    /// C(tau) = strength * delta(tau), never tabulated.
    Delta { strength: f64 },
    /// C on tau = k h, k = 0..; negative lags follow from C(-tau) = conj C(tau).
    Table {
        spacing: f64,
        values: Vec<Complex64>,
        slopes: Vec<Complex64>,
        error_estimate: f64,
    },
}

impl CorrelationKernel {
    pub fn is_delta(&self) -> bool {
        matches!(self, CorrelationKernel::Delta { .. })
    }

    pub fn tau_max(&self) -> f64 {
        match self {
            CorrelationKernel::Delta { .. } => f64::INFINITY,
            CorrelationKernel::Table { spacing, values, .. } => spacing * (values.len() - 1) as f64,
        }
    }

    pub fn error_estimate(&self) -> f64 {
        match self {
            CorrelationKernel::Delta { .. } => 0.0,
            CorrelationKernel::Table { error_estimate, .. } => *error_estimate,
        }
    }

    /// C(tau) by Hermite interpolation of the table.
    pub fn eval(&self, tau: f64) -> Result<Complex64> {
        let CorrelationKernel::Table {
            spacing, values, slopes, ..
        } = self
        else {
            return Err(Error::Invalid("a delta kernel has no pointwise values".into()));
        };
        let a = tau.abs();
        let tmax = self.tau_max();
        if a > tmax * (1.0 + 1e-12) {
            return Err(Error::KernelRange { needed: a, available: tmax });
        }
        let x = a / spacing;
        let k = (x.floor() as usize).min(values.len() - 2);
        let u = x - k as f64;
        let (u2, u3) = (u * u, u * u * u);
        let v = values[k] * (2.0 * u3 - 3.0 * u2 + 1.0)
            + slopes[k] * (*spacing * (u3 - 2.0 * u2 + u))
            + values[k + 1] * (-2.0 * u3 + 3.0 * u2)
            + slopes[k + 1] * (*spacing * (u3 - u2));
        Ok(if tau < 0.0 { v.conj() } else { v })
    }
}

/// Resolution (radians of e^{-i omega tau} per omega step) used for kernels.
const KERNEL_DPHI: f64 = 0.25;

pub fn correlation_kernel(model: &SpectralModel, tau_max: f64, spacing: f64) -> Result<CorrelationKernel> {
    if let Some(strength) = model.markovian_strength() {
        model.validate()?;
        return Ok(CorrelationKernel::Delta { strength });
    }
    if !(tau_max > 0.0 && spacing > 0.0 && spacing <= tau_max) {
        return Err(Error::Invalid(format!("kernel grid tau_max = {tau_max}, spacing = {spacing} is invalid")));
    }
    let count = (tau_max / spacing).ceil() as usize + 1;
    let tmax = spacing * (count - 1) as f64;
    let step = KERNEL_DPHI / tmax.max(1.0);
    let rule = model.frequency_rule(step)?;
    let coarse = model.frequency_rule(2.0 * step)?;
    let values = rule.fourier(spacing, count, |_| Complex64::new(1.0, 0.0));
    let slopes = rule.fourier(spacing, count, |w| Complex64::new(0.0, -w));
    let check = coarse.fourier(spacing, count, |_| Complex64::new(1.0, 0.0));
    let quad_err = values.iter().zip(&check).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let mut kernel = CorrelationKernel::Table {
        spacing,
        values,
        slopes,
        error_estimate: quad_err,
    };
    // Interpolation error sampled at a few cell midpoints.
    let probes: Vec<usize> = (0..16).map(|i| i * (count - 1) / 16).collect();
    let mut interp_err: f64 = 0.0;
    for &k in &probes {
        let tau = (k as f64 + 0.5) * spacing;
        let exact: Complex64 = direct_kernel(&rule, tau);
        interp_err = interp_err.max((kernel.eval(tau)? - exact).norm());
    }
    if let CorrelationKernel::Table { error_estimate, .. } = &mut kernel {
        *error_estimate += interp_err;
    }
    Ok(kernel)
}

fn direct_kernel(rule: &FrequencyRule, tau: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for seg in &rule.segments {
        for (j, w) in seg.weights.iter().enumerate() {
            acc += Complex64::from_polar(*w, -(seg.start + j as f64 * seg.step) * tau);
        }
    }
    acc + rule.nodes.iter().map(|(x, w)| Complex64::from_polar(*w, -x * tau)).sum::<Complex64>()
}

/// Channels that carry non-zero weight in any pair.
pub(crate) fn active_channels(weights: &ChannelWeights) -> Vec<Channel> {
    let mut out = Vec::new();
    if weights.xx != 0.0 || weights.xz != 0.0 || weights.zx != 0.0 {
        out.push(Channel::X);
    }
    if weights.zz != 0.0 || weights.xz != 0.0 || weights.zx != 0.0 {
        out.push(Channel::Z);
    }
    out
}
