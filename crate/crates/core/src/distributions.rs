//! Near-region position distributions and the momentum distributions that the
//! far region maps onto.
//!
//! Densities carry absolute Born weights: integrating a branch column gives the
//! joint density of the quadrature outcome χ₀ and that internal-state result.
//!
//! Momentum amplitudes use ψ̃(q) = (2π)^{-1/2} ∫ ψ(φ) e^{−iqφ} dφ, evaluated
//! with an FFT on the grid, so Parseval holds to rounding.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::branch_amplitudes;
use crate::grid::Grid;
use crate::model::{AmplitudeField, InteractionConfig, InternalState};

/// Mass allowed in the outer edge strips of the window before the momentum
/// transform is refused.
pub const EDGE_MASS_LIMIT: f64 = 1e-10;

/// Width of each edge strip as a fraction of the window.
const EDGE_FRACTION: f64 = 1.0 / 64.0;

/// Default relative height for peak extraction.
pub const PEAK_THRESHOLD: f64 = 0.05;

/// Relative height separating comb teeth from the sinc sidelobes of a
/// sharp-edged packet.
pub const COMB_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Position,
    Momentum,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::Position => "phi",
            Axis::Momentum => "q",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Column {
    /// Dual measurement, internal state found in |a⟩.
    PA,
    PB,
    /// Field-only measurement, atom definitely in |a⟩.
    PiA,
    PiB,
    /// Field-only density weighted by the entry populations.
    Envelope,
}

impl Column {
    pub const ALL: [Column; 5] = [
        Column::PA,
        Column::PB,
        Column::PiA,
        Column::PiB,
        Column::Envelope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::PA => "p_a",
            Column::PB => "p_b",
            Column::PiA => "pi_a",
            Column::PiB => "pi_b",
            Column::Envelope => "envelope",
        }
    }

    pub fn dual(state: InternalState) -> Self {
        match state {
            InternalState::A => Column::PA,
            InternalState::B => Column::PB,
        }
    }

    pub fn single(state: InternalState) -> Self {
        match state {
            InternalState::A => Column::PiA,
            InternalState::B => Column::PiB,
        }
    }
}

/// Sampled densities on a position or momentum axis. Columns not produced by
/// the active mode are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub axis: Axis,
    pub coords: Vec<f64>,
    pub step: f64,
    pub p_a: Option<Vec<f64>>,
    pub p_b: Option<Vec<f64>>,
    pub pi_a: Option<Vec<f64>>,
    pub pi_b: Option<Vec<f64>>,
    pub envelope: Option<Vec<f64>>,
}

impl DistributionTable {
    pub fn column(&self, column: Column) -> Option<&[f64]> {
        match column {
            Column::PA => self.p_a.as_deref(),
            Column::PB => self.p_b.as_deref(),
            Column::PiA => self.pi_a.as_deref(),
            Column::PiB => self.pi_b.as_deref(),
            Column::Envelope => self.envelope.as_deref(),
        }
    }

    pub fn present_columns(&self) -> Vec<Column> {
        Column::ALL
            .into_iter()
            .filter(|c| self.column(*c).is_some())
            .collect()
    }

    /// ∫ column, i.e. the branch probability (density in χ₀) it carries.
    pub fn probability(&self, column: Column) -> Option<f64> {
        self.column(column)
            .map(|v| v.iter().sum::<f64>() * self.step)
    }

    /// Writes `axis,<columns...>` rows in round-trip decimal precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let cols = self.present_columns();
        let mut header = vec![self.axis.label()];
        header.extend(cols.iter().map(|c| c.name()));
        writeln!(out, "{}", header.join(","))?;
        let data: Vec<&[f64]> = cols.iter().filter_map(|c| self.column(*c)).collect();
        for (i, x) in self.coords.iter().enumerate() {
            write!(out, "{}", Num(*x))?;
            for col in &data {
                write!(out, ",{}", Num(col[i]))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal form; exponent notation outside
/// [1e-4, 1e15) in magnitude.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

/// Per-sample complex post-measurement amplitudes f·amp for each column that
/// the mode defines (envelope excluded).
struct BranchAmplitudes {
    dual: Option<[Vec<Complex64>; 2]>,
    single: [Vec<Complex64>; 2],
}

fn branch_fields(wp: &AmplitudeField, cfg: &InteractionConfig) -> BranchAmplitudes {
    let grid = wp.grid();
    let zero = Complex64::new(0.0, 0.0);
    let n = grid.len();
    let single_cfg = cfg.with_ramsey(false);
    let mut single = [vec![zero; n], vec![zero; n]];
    let mut dual = cfg.ramsey_on.then(|| [vec![zero; n], vec![zero; n]]);
    for (i, f) in wp.values().iter().enumerate() {
        if *f == zero {
            continue;
        }
        let phi = grid.phi(i);
        let (a, b) = branch_amplitudes(phi, &single_cfg);
        single[0][i] = f * a;
        single[1][i] = f * b;
        if let Some(d) = dual.as_mut() {
            let (a, b) = branch_amplitudes(phi, cfg);
            d[0][i] = f * a;
            d[1][i] = f * b;
        }
    }
    BranchAmplitudes { dual, single }
}

fn densities(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.norm_sqr()).collect()
}

/// Near-region position densities |f·amp_s|² for every branch of the mode,
/// plus the field-only envelope |c_a|²Π_a + |c_b|²Π_b.
pub fn position_distribution(
    wp: &AmplitudeField,
    cfg: &InteractionConfig,
) -> Result<DistributionTable> {
    cfg.validate()?;
    let grid = wp.grid();
    let fields = branch_fields(wp, cfg);
    let pi_a = densities(&fields.single[0]);
    let pi_b = densities(&fields.single[1]);
    let (wa, wb) = (cfg.c_a.norm_sqr(), cfg.c_b.norm_sqr());
    let envelope = pi_a
        .iter()
        .zip(&pi_b)
        .map(|(a, b)| wa * a + wb * b)
        .collect();
    let (p_a, p_b) = match &fields.dual {
        Some([a, b]) => (Some(densities(a)), Some(densities(b))),
        None => (None, None),
    };
    Ok(DistributionTable {
        axis: Axis::Position,
        coords: grid.phis().collect(),
        step: grid.step(),
        p_a,
        p_b,
        pi_a: Some(pi_a),
        pi_b: Some(pi_b),
        envelope: Some(envelope),
    })
}

/// Momentum densities (units of ħk₀) of the post-measurement amplitudes,
/// branch by branch.
pub fn momentum_distribution(
    wp: &AmplitudeField,
    cfg: &InteractionConfig,
) -> Result<DistributionTable> {
    cfg.validate()?;
    let grid = *wp.grid();
    let fields = branch_fields(wp, cfg);
    let mut planner = FftPlanner::new();
    let mut transform = |v: &[Complex64]| -> Result<Vec<f64>> {
        check_edge_mass(&grid, v)?;
        Ok(densities(&fourier_transform(&grid, v, &mut planner)))
    };
    let pi_a = transform(&fields.single[0])?;
    let pi_b = transform(&fields.single[1])?;
    let (p_a, p_b) = match &fields.dual {
        Some([a, b]) => (Some(transform(a)?), Some(transform(b)?)),
        None => (None, None),
    };
    Ok(DistributionTable {
        axis: Axis::Momentum,
        coords: grid.momenta().collect(),
        step: grid.momentum_step(),
        p_a,
        p_b,
        pi_a: Some(pi_a),
        pi_b: Some(pi_b),
        envelope: None,
    })
}

fn check_edge_mass(grid: &Grid, v: &[Complex64]) -> Result<()> {
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(());
    }
    let strip = ((grid.len() as f64 * EDGE_FRACTION).ceil() as usize).max(1);
    let edge: f64 = v[..strip]
        .iter()
        .chain(&v[v.len() - strip..])
        .map(|z| z.norm_sqr())
        .sum();
    let edge_mass = edge / total;
    if edge_mass > EDGE_MASS_LIMIT {
        return Err(Error::Padding {
            edge_mass,
            limit: EDGE_MASS_LIMIT,
        });
    }
    Ok(())
}

/// ψ̃(q_k) = (2π)^{-1/2} Σ_j ψ(φ_j) e^{−i q_k φ_j} dφ on the grid's momentum
/// lattice.
pub fn fourier_transform(
    grid: &Grid,
    values: &[Complex64],
    planner: &mut FftPlanner<f64>,
) -> Vec<Complex64> {
    let n = grid.len();
    // (−1)^j shifts the output so that index N/2 is q = 0
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 0 { *v } else { -*v })
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = grid.step() / (2.0 * PI).sqrt();
    let phi0 = grid.start();
    buf.iter()
        .enumerate()
        .map(|(k, v)| v * Complex64::from_polar(scale, -grid.momentum(k) * phi0))
        .collect()
}

/// Restriction applied before measuring a localization width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Full,
    Interval(f64, f64),
}

impl Window {
    /// One period [0, π/2) of the χ₀ = 0 dual filters.
    pub fn one_period() -> Self {
        Window::Interval(0.0, FRAC_PI_2)
    }

    fn contains(&self, x: f64) -> bool {
        match *self {
            Window::Full => true,
            Window::Interval(lo, hi) => x >= lo && x < hi,
        }
    }
}

/// Standard deviation of the axis coordinate under `column`, restricted to
/// `window` and renormalized there.
pub fn localization_width(
    table: &DistributionTable,
    column: Column,
    window: Window,
) -> Result<f64> {
    let values = table.column(column).ok_or(Error::InvalidParameter {
        name: "column",
        reason: format!("{} is not present in this table", column.name()),
    })?;
    weighted_std(&table.coords, values, window)
}

/// Standard deviation of `coords` weighted by `weights` inside `window`.
pub fn weighted_std(coords: &[f64], weights: &[f64], window: Window) -> Result<f64> {
    let mut mass = 0.0;
    let mut first = 0.0;
    for (x, w) in coords.iter().zip(weights) {
        if window.contains(*x) {
            mass += w;
            first += w * x;
        }
    }
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let mean = first / mass;
    let var: f64 = coords
        .iter()
        .zip(weights)
        .filter(|(x, _)| window.contains(**x))
        .map(|(x, w)| w * (x - mean).powi(2))
        .sum::<f64>()
        / mass;
    Ok(var.sqrt())
}

/// ∫|f·amp_s|² dφ for the measured record (χ₀, s). With Ramsey pulses on this
/// is the dual branch; off, the definite-state density weighted by |c_s|².
/// Summed over s it equals the outcome density at χ₀.
pub fn branch_probability(
    wp: &AmplitudeField,
    cfg: &InteractionConfig,
    state: InternalState,
) -> Result<f64> {
    cfg.validate()?;
    let grid = wp.grid();
    let mut total = 0.0;
    for (i, f) in wp.values().iter().enumerate() {
        let w = f.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let (a, b) = branch_amplitudes(grid.phi(i), cfg);
        let amp = match state {
            InternalState::A => a,
            InternalState::B => b,
        };
        let weight = if cfg.ramsey_on {
            1.0
        } else {
            cfg.weight(state).norm_sqr()
        };
        total += w * amp.norm_sqr() * weight;
    }
    Ok(total * grid.step())
}

/// Local maxima above `rel_threshold` times the global maximum, as coordinates.
pub fn find_peaks(coords: &[f64], values: &[f64], rel_threshold: f64) -> Vec<f64> {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    if values.len() < 3 || max <= 0.0 {
        return Vec::new();
    }
    let cut = rel_threshold * max;
    (1..values.len() - 1)
        .filter(|&i| values[i] >= cut && values[i] > values[i - 1] && values[i] >= values[i + 1])
        .map(|i| coords[i])
        .collect()
}

/// Median gap between consecutive peaks.
pub fn comb_spacing(peaks: &[f64]) -> Option<f64> {
    if peaks.len() < 2 {
        return None;
    }
    let mut gaps: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let m = gaps.len();
    Some(if m % 2 == 1 {
        gaps[m / 2]
    } else {
        0.5 * (gaps[m / 2 - 1] + gaps[m / 2])
    })
}

/// Coordinate of the global maximum.
pub fn dominant_peak(coords: &[f64], values: &[f64]) -> Option<f64> {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| coords[i])
}

/// Mean and standard deviation of the axis under a column (full range).
pub fn moments(table: &DistributionTable, column: Column) -> Option<(f64, f64)> {
    let v = table.column(column)?;
    let mass: f64 = v.iter().sum();
    if mass <= 0.0 {
        return None;
    }
    let mean = table.coords.iter().zip(v).map(|(x, w)| x * w).sum::<f64>() / mass;
    let var = table
        .coords
        .iter()
        .zip(v)
        .map(|(x, w)| w * (x - mean).powi(2))
        .sum::<f64>()
        / mass;
    Some((mean, var.sqrt()))
}
