use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform sampling of the standing-wave phase φ with a power-of-two point
/// count, together with the conjugate momentum lattice (units of ħk₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    len: usize,
    start: f64,
    step: f64,
}

pub const DEFAULT_LOG2_POINTS: u32 = 14;
pub const DEFAULT_PADDING: f64 = 4.0;

/// Support width used when a wavepacket has no spatial extent (single-point table).
const MIN_SUPPORT_WIDTH: f64 = 2.0 * PI;

impl Grid {
    /// `2^log2_points` samples covering the half-open window `[lo, hi)`.
    pub fn new(log2_points: u32, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite("grid window"));
        }
        if !(1..=24).contains(&log2_points) {
            return Err(Error::InvalidParameter {
                name: "grid.log2_points",
                reason: format!("{log2_points} is outside 1..=24"),
            });
        }
        if hi <= lo {
            return Err(Error::InvalidParameter {
                name: "grid window",
                reason: format!("upper bound {hi} must exceed lower bound {lo}"),
            });
        }
        let len = 1usize << log2_points;
        Ok(Self {
            len,
            start: lo,
            step: (hi - lo) / len as f64,
        })
    }

    /// Window centered on `center`; sample `len/2` sits exactly on `center`.
    pub fn centered(log2_points: u32, center: f64, half_width: f64) -> Result<Self> {
        Self::new(log2_points, center - half_width, center + half_width)
    }

    /// Window that holds the support `[lo, hi]` with `padding` support-widths of
    /// empty space added on each side.
    ///
    /// The window is widened slightly so that the step divides π/4: samples
    /// then fall exactly on nodes, antinodes and midway points relative to the
    /// support center.
    pub fn for_support(lo: f64, hi: f64, log2_points: u32, padding: f64) -> Result<Self> {
        if !padding.is_finite() || padding < 0.0 {
            return Err(Error::InvalidParameter {
                name: "grid.padding",
                reason: format!("{padding} must be finite and non-negative"),
            });
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite("grid window"));
        }
        let width = (hi - lo).max(MIN_SUPPORT_WIDTH) * (1.0 + 2.0 * padding);
        let center = 0.5 * (lo + hi);
        let len = 1u64 << log2_points.min(24);
        let steps_per_quarter = ((len as f64 * PI / (4.0 * width)).floor()).max(1.0);
        let snapped = (len as f64 * PI / (4.0 * steps_per_quarter)).max(width);
        Self::centered(log2_points, center, 0.5 * snapped)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    /// `[lo, hi)` covered by the samples.
    pub fn window(&self) -> (f64, f64) {
        (self.start, self.start + self.step * self.len as f64)
    }

    pub fn phi(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn phis(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.phi(i))
    }

    /// Spacing of the conjugate momentum lattice, 2π / (N·dφ).
    pub fn momentum_step(&self) -> f64 {
        2.0 * PI / (self.len as f64 * self.step)
    }

    /// Momentum sample `k`, centered so that `k = len/2` is q = 0.
    pub fn momentum(&self, k: usize) -> f64 {
        (k as f64 - (self.len / 2) as f64) * self.momentum_step()
    }

    pub fn momenta(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.momentum(k))
    }

    /// Index of the sample nearest to `phi`, if it lies inside the window.
    pub fn nearest_index(&self, phi: f64) -> Option<usize> {
        let pos = ((phi - self.start) / self.step).round();
        if pos >= 0.0 && pos < self.len as f64 {
            Some(pos as usize)
        } else {
            None
        }
    }

    /// Same window with twice the samples.
    pub fn refined(&self) -> Self {
        Self {
            len: self.len * 2,
            start: self.start,
            step: self.step / 2.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_grid_hits_center() {
        let g = Grid::centered(10, 0.0, 3.0).unwrap();
        assert_eq!(g.len(), 1024);
        assert_eq!(g.phi(512), 0.0);
        assert_eq!(g.momentum(512), 0.0);
    }

    #[test]
    fn momentum_lattice_is_conjugate() {
        let g = Grid::new(8, -PI, PI).unwrap();
        // window 2π → dq = 1
        assert!((g.momentum_step() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn padding_scales_window() {
        let g = Grid::for_support(-PI, PI, 14, 4.0).unwrap();
        let (lo, hi) = g.window();
        assert!(lo <= -9.0 * PI && hi >= 9.0 * PI);
        assert!(hi - lo < 18.1 * PI);
        let quarter = (PI / 4.0) / g.step();
        assert!((quarter - quarter.round()).abs() < 1e-9);
        assert_eq!(g.nearest_index(0.0), Some(g.len() / 2));
    }

    #[test]
    fn rejects_bad_window() {
        assert!(Grid::new(10, 1.0, 1.0).is_err());
        assert!(Grid::new(0, 0.0, 1.0).is_err());
        assert!(Grid::new(10, f64::NAN, 1.0).is_err());
        assert!(Grid::for_support(0.0, 1.0, 10, -1.0).is_err());
    }
}
