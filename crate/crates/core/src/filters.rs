//! Closed-form position filters of the quadrature + internal-state measurement.
//!
//! For an atom at phase φ the cavity field ends up in |α e^{±iΘ(φ)}⟩ with
//! Θ(φ) = Gτ sin²φ, the sign following the internal state. Projecting onto a
//! quadrature eigenstate ⟨χ_θ| turns each branch into a complex amplitude,
//! which at θ = 0 factorizes into an amplitude filter D and a phase filter Δ:
//!
//! ```text
//! ⟨χ|α e^{±iΘ}⟩ = N·D·e^{∓iΔ},   N = (2π)^{-1/4}
//! D = exp[−(α cos Θ − χ/2)²],    Δ = α sin Θ (α cos Θ − χ)
//! ```
//!
//! The second Ramsey pulse mixes the two branches into
//! I_a = −i sin Δ and I_b = cos Δ.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::model::InteractionConfig;

/// (2π)^{-1/4}: normalization of the quadrature overlap, so that
/// ∫|⟨χ_θ|β⟩|² dχ = 1.
pub fn overlap_norm() -> f64 {
    (2.0 * PI).powf(-0.25)
}

/// Common weight c_w of the branch amplitudes: they are exact Born amplitudes,
/// amp_s = c_w·D·I_s, with no further rescaling.
pub fn common_weight() -> f64 {
    overlap_norm()
}

/// Pulse area seen at phase φ, G(x)·τ = Gτ sin²φ.
pub fn light_shift(phi: f64, cfg: &InteractionConfig) -> f64 {
    let s = phi.sin();
    cfg.g_tau * s * s
}

/// Phase-space rotation angles of the field for the |a⟩ and |b⟩ branches.
pub fn rotation_angles(phi: f64, cfg: &InteractionConfig) -> (f64, f64) {
    let theta = light_shift(phi, cfg);
    (theta, -theta)
}

/// ⟨χ_θ|β⟩ for a coherent state |β⟩ given in the frame of the quadrature,
/// i.e. with `beta = α e^{i(η−θ)}`.
#[inline]
pub fn overlap_in_frame(beta: Complex64, chi: f64) -> Complex64 {
    let (br, bi) = (beta.re, beta.im);
    let x = br - 0.5 * chi;
    Complex64::new(-x * x, -bi * (br - chi)).exp() * overlap_norm()
}

/// ⟨χ_θ|α e^{iη}⟩ for real α.
pub fn quadrature_overlap(alpha: f64, eta: f64, theta: f64, chi: f64) -> Complex64 {
    overlap_in_frame(Complex64::from_polar(alpha, eta - theta), chi)
}

/// Amplitude filter D(φ) at θ = 0.
pub fn amplitude_filter(phi: f64, cfg: &InteractionConfig) -> f64 {
    let x = cfg.alpha * light_shift(phi, cfg).cos() - 0.5 * cfg.chi0;
    (-x * x).exp()
}

/// Phase filter Δ(φ) at θ = 0.
pub fn phase_filter(phi: f64, cfg: &InteractionConfig) -> f64 {
    let (s, c) = light_shift(phi, cfg).sin_cos();
    cfg.alpha * s * (cfg.alpha * c - cfg.chi0)
}

/// Interference filters (I_a, I_b) = (−i sin Δ, cos Δ).
pub fn interference_filters(phi: f64, cfg: &InteractionConfig) -> (Complex64, Complex64) {
    let (s, c) = phase_filter(phi, cfg).sin_cos();
    (Complex64::new(0.0, -s), Complex64::new(c, 0.0))
}

/// Post-measurement amplitudes of the dual measurement at θ = 0.
///
/// For c_a = c_b = 1/√2 these are c_w·D·I_a and c_w·D·I_b; general entry
/// amplitudes give c_w·D·(c_a e^{−iΔ} ∓ c_b e^{iΔ})/√2.
pub fn dual_amplitudes(phi: f64, cfg: &InteractionConfig) -> (Complex64, Complex64) {
    let d = amplitude_filter(phi, cfg) * common_weight();
    let delta = phase_filter(phi, cfg);
    let plus = cfg.c_a * Complex64::from_polar(d, -delta);
    let minus = cfg.c_b * Complex64::from_polar(d, delta);
    (
        (plus - minus) * FRAC_1_SQRT_2,
        (plus + minus) * FRAC_1_SQRT_2,
    )
}

/// Field-only amplitudes at θ = 0 for an atom that stays definitely in |a⟩
/// (first entry) or |b⟩ (second entry): c_w·D·e^{∓iΔ}.
pub fn single_amplitudes(phi: f64, cfg: &InteractionConfig) -> (Complex64, Complex64) {
    let d = amplitude_filter(phi, cfg) * common_weight();
    let delta = phase_filter(phi, cfg);
    (
        Complex64::from_polar(d, -delta),
        Complex64::from_polar(d, delta),
    )
}

/// The two rotated coherent amplitudes α e^{i(±Θ(φ) − θ)}, precomputed so
/// that overlaps for many outcomes χ can be evaluated cheaply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedBranches {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl RotatedBranches {
    pub fn new(phi: f64, cfg: &InteractionConfig) -> Self {
        let rot = light_shift(phi, cfg);
        Self {
            plus: Complex64::from_polar(cfg.alpha, rot - cfg.theta),
            minus: Complex64::from_polar(cfg.alpha, -rot - cfg.theta),
        }
    }

    /// (⟨χ_θ|α e^{iΘ}⟩, ⟨χ_θ|α e^{−iΘ}⟩).
    #[inline]
    pub fn overlaps(&self, chi: f64) -> (Complex64, Complex64) {
        (
            overlap_in_frame(self.plus, chi),
            overlap_in_frame(self.minus, chi),
        )
    }

    /// Amplitudes of the measured record (χ, s) at any θ, weighted by the entry
    /// amplitudes c_a, c_b. In field-only mode these are c_s·⟨χ|branch_s⟩.
    #[inline]
    pub fn measured(&self, chi: f64, cfg: &InteractionConfig) -> (Complex64, Complex64) {
        let (p, m) = self.overlaps(chi);
        let (p, m) = (cfg.c_a * p, cfg.c_b * m);
        if cfg.ramsey_on {
            ((p - m) * FRAC_1_SQRT_2, (p + m) * FRAC_1_SQRT_2)
        } else {
            (p, m)
        }
    }
}

/// Per-position filter values for the active mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterSample {
    pub phi: f64,
    /// Effective amplitude filter, √(|amp_a|² + |amp_b|²)/c_w in dual mode
    /// (reduces to D at θ = 0).
    pub d: f64,
    /// Phase filter Δ; only defined for θ = 0.
    pub delta: Option<f64>,
    pub i_a: Complex64,
    pub i_b: Complex64,
    pub amp_a: Complex64,
    pub amp_b: Complex64,
}

impl FilterSample {
    /// Closed forms at θ = 0, general overlap path otherwise.
    pub fn evaluate(phi: f64, cfg: &InteractionConfig) -> Self {
        if cfg.theta != 0.0 {
            return generalized_filter(phi, cfg);
        }
        let d = amplitude_filter(phi, cfg);
        let delta = phase_filter(phi, cfg);
        let (i_a, i_b) = interference_filters(phi, cfg);
        let (amp_a, amp_b) = if cfg.ramsey_on {
            dual_amplitudes(phi, cfg)
        } else {
            single_amplitudes(phi, cfg)
        };
        Self {
            phi,
            d,
            delta: Some(delta),
            i_a,
            i_b,
            amp_a,
            amp_b,
        }
    }

    /// F_a = |D·I_a|², without the overlap normalization.
    pub fn f_a(&self) -> f64 {
        self.d * self.d * self.i_a.norm_sqr()
    }

    pub fn f_b(&self) -> f64 {
        self.d * self.d * self.i_b.norm_sqr()
    }
}

/// Filter sample from direct overlaps of the two rotated branches at any θ.
///
/// Dual mode: amp = (c_a⟨χ_θ|αe^{iΘ}⟩ ∓ c_b⟨χ_θ|αe^{−iΘ}⟩)/√2. Field-only mode:
/// the definite-state overlaps. The interference factors are the amplitudes
/// divided by c_w·d, so |i_a|² + |i_b|² = 1 holds by construction.
pub fn generalized_filter(phi: f64, cfg: &InteractionConfig) -> FilterSample {
    let branches = RotatedBranches::new(phi, cfg);
    let (plus, minus) = branches.overlaps(cfg.chi0);
    let (amp_a, amp_b) = if cfg.ramsey_on {
        branches.measured(cfg.chi0, cfg)
    } else {
        (plus, minus)
    };
    let cw = common_weight();
    let d = if cfg.ramsey_on {
        (amp_a.norm_sqr() + amp_b.norm_sqr()).sqrt() / cw
    } else {
        (0.5 * (plus.norm_sqr() + minus.norm_sqr())).sqrt() / cw
    };
    let (i_a, i_b) = if d > 0.0 && cfg.ramsey_on {
        (amp_a / (cw * d), amp_b / (cw * d))
    } else if d > 0.0 {
        (
            plus / (cw * d * std::f64::consts::SQRT_2),
            minus / (cw * d * std::f64::consts::SQRT_2),
        )
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    };
    FilterSample {
        phi,
        d,
        delta: if cfg.theta == 0.0 {
            Some(phase_filter(phi, cfg))
        } else {
            None
        },
        i_a,
        i_b,
        amp_a,
        amp_b,
    }
}

/// Amplitudes entering the position/momentum tables for the active mode and
/// θ: dual amplitudes with Ramsey pulses on, definite-state amplitudes off.
pub fn branch_amplitudes(phi: f64, cfg: &InteractionConfig) -> (Complex64, Complex64) {
    if cfg.theta == 0.0 {
        if cfg.ramsey_on {
            dual_amplitudes(phi, cfg)
        } else {
            single_amplitudes(phi, cfg)
        }
    } else {
        let s = generalized_filter(phi, cfg);
        (s.amp_a, s.amp_b)
    }
}
