//! Interaction parameters, position conventions, regime checks and initial
//! wavepackets.
//!
//! All positions are standing-wave phases φ = k₀x and all momenta are in units
//! of ħk₀. Axis values quoted as multiples of the wavelength (u = x/λ) are
//! converted with a [`Convention`].

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Probability mass a wavepacket may lose to the grid window before
/// construction is refused.
pub const MAX_TRUNCATED_MASS: f64 = 1e-10;

/// Gaussian support is taken as this many standard deviations either side.
const GAUSSIAN_SUPPORT_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionConfig {
    /// Pulse area G·τ.
    pub g_tau: f64,
    /// Coherent amplitude α (real, non-negative).
    pub alpha: f64,
    /// Local-oscillator phase θ of the measured quadrature.
    pub theta: f64,
    /// Measured quadrature outcome χ₀.
    pub chi0: f64,
    /// Internal-state amplitudes on entering the cavity.
    pub c_a: Complex64,
    pub c_b: Complex64,
    /// Ramsey pulses on (dual measurement) or off (field-only measurement).
    pub ramsey_on: bool,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self {
            g_tau: PI,
            alpha: 2.5,
            theta: 0.0,
            chi0: 0.0,
            c_a: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_b: Complex64::new(FRAC_1_SQRT_2, 0.0),
            ramsey_on: true,
        }
    }
}

impl InteractionConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("interaction.g_tau", self.g_tau),
            ("interaction.alpha", self.alpha),
            ("interaction.theta", self.theta),
            ("interaction.chi0", self.chi0),
            ("interaction.c_a", self.c_a.re + self.c_a.im),
            ("interaction.c_b", self.c_b.re + self.c_b.im),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidParameter {
                name: "interaction.alpha",
                reason: format!("{} is negative", self.alpha),
            });
        }
        let norm = self.c_a.norm_sqr() + self.c_b.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "interaction.c_a/c_b",
                reason: format!("|c_a|^2 + |c_b|^2 = {norm}, expected 1"),
            });
        }
        Ok(())
    }

    pub fn with_chi0(self, chi0: f64) -> Self {
        Self { chi0, ..self }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_ramsey(self, ramsey_on: bool) -> Self {
        Self { ramsey_on, ..self }
    }

    pub fn with_amplitudes(self, c_a: Complex64, c_b: Complex64) -> Self {
        Self { c_a, c_b, ..self }
    }

    /// Atom entering the cavity definitely in `state`.
    pub fn definite(self, state: InternalState) -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        match state {
            InternalState::A => self.with_amplitudes(one, zero),
            InternalState::B => self.with_amplitudes(zero, one),
        }
    }

    pub fn weight(&self, state: InternalState) -> Complex64 {
        match state {
            InternalState::A => self.c_a,
            InternalState::B => self.c_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InternalState {
    A,
    B,
}

impl InternalState {
    pub const BOTH: [InternalState; 2] = [InternalState::A, InternalState::B];

    /// +1 for |a⟩, −1 for |b⟩: sign of the light-shift rotation and of the
    /// dipole force.
    pub fn sign(self) -> f64 {
        match self {
            InternalState::A => 1.0,
            InternalState::B => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            InternalState::A => "a",
            InternalState::B => "b",
        }
    }
}

/// Mapping from axis values quoted in wavelengths (u = x/λ) to the phase φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// φ = πu: node at u = 0, midway at u = 1/4, antinode at u = 1/2.
    #[default]
    PaperFigure,
    /// φ = k₀x = 2πu.
    StrictK0,
}

impl Convention {
    pub fn phase_per_wavelength(self) -> f64 {
        match self {
            Convention::PaperFigure => PI,
            Convention::StrictK0 => 2.0 * PI,
        }
    }

    pub fn wavelength_to_phase(self, u: f64) -> f64 {
        u * self.phase_per_wavelength()
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::PaperFigure => "paper-figure",
            Convention::StrictK0 => "strict-k0",
        }
    }
}

/// Atomic level structure behind the effective light-shift Hamiltonian.
/// Frequencies are angular frequencies in any consistent unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalRegime {
    pub g_a: f64,
    pub g_b: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    100.0
}

/// Relative mismatch allowed between −g_a²/δ_a and g_b²/δ_b.
pub const BALANCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub ratio_a: f64,
    pub ratio_b: f64,
    pub margin: f64,
    pub detuning_a_ok: bool,
    pub detuning_b_ok: bool,
    /// G = g_b²/δ_b.
    pub light_shift: f64,
    pub balance_mismatch: f64,
    pub balanced: bool,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.detuning_a_ok && self.detuning_b_ok && self.balanced
    }
}

/// Checks the far-detuned adiabatic-elimination conditions and the balanced
/// light shift that the effective interaction assumes.
pub fn validate_regime(regime: &PhysicalRegime, cfg: &InteractionConfig) -> Result<ValidityReport> {
    cfg.validate()?;
    let PhysicalRegime {
        g_a,
        g_b,
        delta_a,
        delta_b,
        gamma_a,
        gamma_b,
        margin,
    } = *regime;
    for (name, v) in [
        ("regime.g_a", g_a),
        ("regime.g_b", g_b),
        ("regime.delta_a", delta_a),
        ("regime.delta_b", delta_b),
        ("regime.gamma_a", gamma_a),
        ("regime.gamma_b", gamma_b),
        ("regime.margin", margin),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    if delta_a >= 0.0 {
        return Err(Error::SignViolation(format!(
            "delta_a = {delta_a} must be negative (cavity below the a-c transition)"
        )));
    }
    if delta_b <= 0.0 {
        return Err(Error::SignViolation(format!(
            "delta_b = {delta_b} must be positive (cavity above the b-c transition)"
        )));
    }
    for (name, v) in [
        ("regime.g_a", g_a),
        ("regime.g_b", g_b),
        ("regime.gamma_a", gamma_a),
        ("regime.gamma_b", gamma_b),
        ("regime.margin", margin),
    ] {
        if v <= 0.0 {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("{v} must be positive"),
            });
        }
    }

    let ratio_a = delta_a.abs() / gamma_a;
    let ratio_b = delta_b.abs() / gamma_b;
    let shift_a = -g_a * g_a / delta_a;
    let shift_b = g_b * g_b / delta_b;
    let balance_mismatch = (shift_a - shift_b).abs() / shift_b;
    Ok(ValidityReport {
        ratio_a,
        ratio_b,
        margin,
        detuning_a_ok: ratio_a >= margin,
        detuning_b_ok: ratio_b >= margin,
        light_shift: shift_b,
        balance_mismatch,
        balanced: balance_mismatch <= BALANCE_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPoint {
    pub phi: f64,
    pub amplitude: Complex64,
}

/// Initial position amplitude f(φ), in phase units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WavepacketSpec {
    /// Constant amplitude on |φ − center| ≤ half_width.
    FlatTop { center: f64, half_width: f64 },
    /// |f|² is a normal density with the given center and standard deviation.
    Gaussian { center: f64, sigma: f64 },
    /// Complex amplitudes at arbitrary phases, linearly interpolated.
    Tabulated { points: Vec<TabulatedPoint> },
}

impl WavepacketSpec {
    pub fn flat_top(half_width: f64) -> Self {
        WavepacketSpec::FlatTop {
            center: 0.0,
            half_width,
        }
    }

    pub fn gaussian(center: f64, sigma: f64) -> Self {
        WavepacketSpec::Gaussian { center, sigma }
    }

    /// Single-point table: a delta-like column at `phi`.
    pub fn spike(phi: f64) -> Self {
        WavepacketSpec::Tabulated {
            points: vec![TabulatedPoint {
                phi,
                amplitude: Complex64::new(1.0, 0.0),
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WavepacketSpec::FlatTop { center, half_width } => {
                if !center.is_finite() || !half_width.is_finite() {
                    return Err(Error::NonFinite("wavepacket"));
                }
                if *half_width <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "wavepacket.half_width",
                        reason: format!("{half_width} must be positive"),
                    });
                }
            }
            WavepacketSpec::Gaussian { center, sigma } => {
                if !center.is_finite() || !sigma.is_finite() {
                    return Err(Error::NonFinite("wavepacket"));
                }
                if *sigma <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "wavepacket.sigma",
                        reason: format!("{sigma} must be positive"),
                    });
                }
            }
            WavepacketSpec::Tabulated { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidParameter {
                        name: "wavepacket.points",
                        reason: "table is empty".into(),
                    });
                }
                if points.iter().any(|p| {
                    !(p.phi.is_finite() && p.amplitude.re.is_finite() && p.amplitude.im.is_finite())
                }) {
                    return Err(Error::NonFinite("wavepacket.points"));
                }
                if points.iter().all(|p| p.amplitude.norm_sqr() == 0.0) {
                    return Err(Error::ZeroMass);
                }
            }
        }
        Ok(())
    }

    /// Interval outside which the amplitude vanishes (or is negligible).
    pub fn support(&self) -> (f64, f64) {
        match self {
            WavepacketSpec::FlatTop { center, half_width } => {
                (center - half_width, center + half_width)
            }
            WavepacketSpec::Gaussian { center, sigma } => (
                center - GAUSSIAN_SUPPORT_SIGMAS * sigma,
                center + GAUSSIAN_SUPPORT_SIGMAS * sigma,
            ),
            WavepacketSpec::Tabulated { points } => points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p.phi), hi.max(p.phi))
                }),
        }
    }

    /// Default grid for this wavepacket: support padded on both sides.
    pub fn default_grid(&self, log2_points: u32, padding: f64) -> Result<Grid> {
        self.validate()?;
        let (lo, hi) = self.support();
        Grid::for_support(lo, hi, log2_points, padding)
    }
}

/// Complex amplitude samples of a wavepacket, L²-normalized on their grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl AmplitudeField {
    /// Wraps raw samples, normalizing them so that Σ|f|²dφ = 1.
    pub fn from_samples(grid: Grid, mut values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: format!("{} samples for a grid of {}", values.len(), grid.len()),
            });
        }
        let mass: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.step();
        if !mass.is_finite() {
            return Err(Error::NonFinite("wavepacket samples"));
        }
        if mass <= 0.0 {
            return Err(Error::Truncation { mass_lost: 1.0 });
        }
        let scale = mass.sqrt().recip();
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Σ|f|²dφ.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step()
    }

    /// Indices with non-zero amplitude.
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| self.values[i] != Complex64::new(0.0, 0.0))
            .collect()
    }
}

/// Samples `spec` on `grid` and normalizes the result.
pub fn build_wavepacket(spec: &WavepacketSpec, grid: &Grid) -> Result<AmplitudeField> {
    spec.validate()?;
    let (lo, hi) = grid.window();
    let values = match spec {
        WavepacketSpec::FlatTop { center, half_width } => {
            let a = center - half_width;
            let b = center + half_width;
            let outside = (lo - a).clamp(0.0, b - a) + (b - hi).clamp(0.0, b - a);
            check_lost(outside / (b - a))?;
            let tol = 1e-12 * half_width.max(1.0);
            grid.phis()
                .map(|phi| {
                    if (phi - center).abs() <= half_width + tol {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect::<Vec<_>>()
        }
        WavepacketSpec::Gaussian { center, sigma } => {
            let z = std::f64::consts::SQRT_2 * sigma;
            let lost = 0.5 * erfc((center - lo) / z) + 0.5 * erfc((hi - center) / z);
            check_lost(lost)?;
            let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
            grid.phis()
                .map(|phi| {
                    let d = phi - center;
                    Complex64::new(norm * (-d * d / (4.0 * sigma * sigma)).exp(), 0.0)
                })
                .collect()
        }
        WavepacketSpec::Tabulated { points } => tabulated_samples(points, grid)?,
    };
    AmplitudeField::from_samples(*grid, values)
}

fn check_lost(lost: f64) -> Result<()> {
    if lost > MAX_TRUNCATED_MASS {
        Err(Error::Truncation {
            mass_lost: lost.min(1.0),
        })
    } else {
        Ok(())
    }
}

fn tabulated_samples(points: &[TabulatedPoint], grid: &Grid) -> Result<Vec<Complex64>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    let (lo, hi) = grid.window();
    let total: f64 = pts.iter().map(|p| p.amplitude.norm_sqr()).sum();
    let outside: f64 = pts
        .iter()
        .filter(|p| p.phi < lo || p.phi >= hi)
        .map(|p| p.amplitude.norm_sqr())
        .sum();
    check_lost(outside / total)?;

    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let first = pts[0].phi;
    let last = pts[pts.len() - 1].phi;
    if last - first < grid.step() {
        // Narrower than one bin: collapse onto the nearest sample.
        let mut amp = Complex64::new(0.0, 0.0);
        for p in &pts {
            amp += p.amplitude;
        }
        let center = 0.5 * (first + last);
        let idx = grid
            .nearest_index(center)
            .ok_or(Error::Truncation { mass_lost: 1.0 })?;
        values[idx] = if amp.norm_sqr() > 0.0 {
            amp
        } else {
            Complex64::new(total.sqrt(), 0.0)
        };
        return Ok(values);
    }
    let mut seg = 0;
    for (i, phi) in grid.phis().enumerate() {
        if phi < first || phi > last {
            continue;
        }
        while seg + 2 < pts.len() && phi > pts[seg + 1].phi {
            seg += 1;
        }
        let (p0, p1) = (&pts[seg], &pts[seg + 1]);
        let span = p1.phi - p0.phi;
        let t = if span > 0.0 {
            (phi - p0.phi) / span
        } else {
            0.0
        };
        values[i] = p0.amplitude * (1.0 - t) + p1.amplitude * t;
    }
    Ok(values)
}
