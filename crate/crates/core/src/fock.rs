//! Truncated photon-number-basis reference implementation of the field
//! evolution and quadrature projection.
//!
//! Nothing here uses the closed-form overlap in [`crate::filters`]; coherent
//! states are built coefficient by coefficient, rotated by e^{inΘ}, mixed by
//! the Ramsey pulse and projected on Hermite-function quadrature eigenvectors.
//! The closed forms are tested against this module.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filters::light_shift;
use crate::model::InteractionConfig;

/// Largest |χ| for which exp(−χ²/4) stays comfortably above underflow.
pub const MAX_CHI: f64 = 50.0;

/// Default acceptable norm loss for constructed coherent states.
pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-12;

/// Default basis size, with plenty of room beyond the Poisson tail of α².
pub fn default_n_max(alpha: f64) -> usize {
    let a = alpha.abs();
    80usize.max((a * a + 10.0 * a + 20.0).ceil() as usize)
}

/// Coefficients c_0..c_{n_max} in the photon-number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    coeffs: Vec<Complex64>,
    truncation_loss: f64,
}

impl FockState {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n_max + 1],
            truncation_loss: 0.0,
        }
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        Self {
            coeffs,
            truncation_loss: 0.0,
        }
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Norm discarded by truncating the basis at `n_max` (coherent states only).
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    /// ⟨self|other⟩ over the common basis.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, k: Complex64) -> FockState {
        FockState {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
            truncation_loss: self.truncation_loss,
        }
    }

    fn zip_with(
        &self,
        other: &FockState,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> FockState {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|i| {
                f(
                    *self.coeffs.get(i).unwrap_or(&zero),
                    *other.coeffs.get(i).unwrap_or(&zero),
                )
            })
            .collect();
        FockState {
            coeffs,
            truncation_loss: self.truncation_loss.max(other.truncation_loss),
        }
    }
}

impl Add for &FockState {
    type Output = FockState;
    fn add(self, rhs: &FockState) -> FockState {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &FockState {
    type Output = FockState;
    fn sub(self, rhs: &FockState) -> FockState {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<Complex64> for &FockState {
    type Output = FockState;
    fn mul(self, rhs: Complex64) -> FockState {
        self.scale(rhs)
    }
}

/// |β⟩ truncated at `n_max`: c_n = e^{−|β|²/2} βⁿ/√(n!), by log-magnitude
/// recursion.
pub fn coherent_state(beta: Complex64, n_max: usize) -> FockState {
    let r = beta.norm();
    let arg = beta.arg();
    let mut coeffs = Vec::with_capacity(n_max + 1);
    if r == 0.0 {
        coeffs.push(Complex64::new(1.0, 0.0));
        coeffs.resize(n_max + 1, Complex64::new(0.0, 0.0));
        return FockState::from_coeffs(coeffs);
    }
    let ln_r = r.ln();
    let mut log_mag = -0.5 * r * r;
    for n in 0..=n_max {
        if n > 0 {
            log_mag += ln_r - 0.5 * (n as f64).ln();
        }
        coeffs.push(Complex64::from_polar(log_mag.exp(), n as f64 * arg));
    }
    let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    FockState {
        coeffs,
        truncation_loss: (1.0 - kept).max(0.0),
    }
}

/// [`coherent_state`] that refuses a basis too small for `tolerance`.
pub fn coherent_state_within(beta: Complex64, n_max: usize, tolerance: f64) -> Result<FockState> {
    if n_max < 1 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: "must be at least 1".into(),
        });
    }
    let state = coherent_state(beta, n_max);
    // 1 − Σ|c_n|² is only resolved to rounding; bound the tail directly as well.
    let tail = poisson_tail(beta.norm_sqr(), n_max);
    let loss = state.truncation_loss.max(tail);
    if loss > tolerance {
        return Err(Error::FockTruncation {
            n_max,
            loss,
            tolerance,
        });
    }
    Ok(state)
}

/// P(N > n_max) for N ~ Poisson(mean), summed from the tail terms.
fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut log_term = -mean;
    for n in 1..=n_max + 1 {
        log_term += ln_mean - (n as f64).ln();
    }
    let mut sum = 0.0;
    let mut n = n_max + 1;
    loop {
        let term = log_term.exp();
        sum += term;
        if term < 1e-30 * sum.max(1e-300) || n > n_max + 10_000 {
            break;
        }
        n += 1;
        log_term += ln_mean - (n as f64).ln();
    }
    sum
}

/// e^{i·angle·a†a}: c_n → e^{in·angle} c_n.
pub fn phase_rotate(state: &FockState, angle: f64) -> FockState {
    FockState {
        coeffs: state
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * angle))
            .collect(),
        truncation_loss: state.truncation_loss,
    }
}

/// Components ⟨n|χ_θ⟩ of the eigenvector of X_θ = a e^{−iθ} + a† e^{iθ} with
/// eigenvalue χ, delta-normalized.
///
/// With h_n(χ) = ⟨n|χ_0⟩ (real Hermite functions of χ/√2 scaled by 2^{-1/4}),
/// ⟨n|χ_θ⟩ = e^{inθ} h_n(χ), and the projection ⟨χ_θ|ψ⟩ = Σ e^{−inθ} h_n c_n.
pub fn quadrature_vector(chi: f64, theta: f64, n_max: usize) -> Result<FockState> {
    if !chi.is_finite() || !theta.is_finite() {
        return Err(Error::NonFinite("quadrature outcome"));
    }
    if chi.abs() > MAX_CHI {
        return Err(Error::Range {
            chi,
            limit: MAX_CHI,
        });
    }
    let h = hermite_functions(chi, n_max);
    Ok(FockState::from_coeffs(
        h.iter()
            .enumerate()
            .map(|(n, &v)| Complex64::from_polar(v, n as f64 * theta))
            .collect(),
    ))
}

/// h_0 = (2π)^{-1/4} e^{−χ²/4}, √(n+1) h_{n+1} = χ h_n − √n h_{n−1}.
fn hermite_functions(chi: f64, n_max: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n_max + 1);
    h.push((2.0 * PI).powf(-0.25) * (-0.25 * chi * chi).exp());
    if n_max >= 1 {
        h.push(chi * h[0]);
    }
    for n in 1..n_max {
        let next = (chi * h[n] - (n as f64).sqrt() * h[n - 1]) / ((n + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

/// X_θ applied to `state` inside the truncated basis.
pub fn apply_quadrature_operator(state: &FockState, theta: f64) -> FockState {
    let c = &state.coeffs;
    let n_max = c.len() - 1;
    let lower = Complex64::from_polar(1.0, -theta);
    let raise = Complex64::from_polar(1.0, theta);
    let coeffs = (0..=n_max)
        .map(|n| {
            let mut v = Complex64::new(0.0, 0.0);
            if n < n_max {
                v += lower * ((n + 1) as f64).sqrt() * c[n + 1];
            }
            if n > 0 {
                v += raise * (n as f64).sqrt() * c[n - 1];
            }
            v
        })
        .collect();
    FockState::from_coeffs(coeffs)
}

/// Field state attached to each final internal state for an atom at fixed φ.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalBranches {
    pub a: FockState,
    pub b: FockState,
}

impl FinalBranches {
    pub fn total_norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }
}

/// Exact joint field/internal state after the interaction (and optionally the
/// second Ramsey pulse) for an atom at phase φ.
///
/// Inside the cavity |a⟩ carries c_a|α e^{iΘ}⟩ and |b⟩ carries c_b|α e^{−iΘ}⟩.
/// The closing π/2 pulse maps |a⟩ → (|a⟩+|b⟩)/√2 and |b⟩ → (|b⟩−|a⟩)/√2.
pub fn simulate_final(
    phi: f64,
    cfg: &InteractionConfig,
    include_second_pulse: bool,
    n_max: usize,
) -> FinalBranches {
    let field = coherent_state(Complex64::new(cfg.alpha, 0.0), n_max);
    let rot = light_shift(phi, cfg);
    let in_a = phase_rotate(&field, rot).scale(cfg.c_a);
    let in_b = phase_rotate(&field, -rot).scale(cfg.c_b);
    if !include_second_pulse {
        return FinalBranches { a: in_a, b: in_b };
    }
    let half = Complex64::new(FRAC_1_SQRT_2, 0.0);
    FinalBranches {
        a: &(&in_a - &in_b) * half,
        b: &(&in_a + &in_b) * half,
    }
}

/// ⟨χ₀, θ| projection of each branch of [`simulate_final`], with the second
/// pulse present when the configuration has the Ramsey pulses on.
pub fn oracle_amplitudes(
    phi: f64,
    cfg: &InteractionConfig,
    n_max: usize,
) -> Result<(Complex64, Complex64)> {
    let branches = simulate_final(phi, cfg, cfg.ramsey_on, n_max);
    let loss = poisson_tail(cfg.alpha * cfg.alpha, n_max);
    if loss > DEFAULT_TRUNCATION_TOLERANCE {
        return Err(Error::FockTruncation {
            n_max,
            loss,
            tolerance: DEFAULT_TRUNCATION_TOLERANCE,
        });
    }
    let chi = quadrature_vector(cfg.chi0, cfg.theta, n_max)?;
    Ok((chi.inner(&branches.a), chi.inner(&branches.b)))
}

/// ⟨χ_θ|β⟩ through the number basis.
pub fn oracle_overlap(beta: Complex64, theta: f64, chi: f64, n_max: usize) -> Result<Complex64> {
    let state = coherent_state_within(beta, n_max, DEFAULT_TRUNCATION_TOLERANCE)?;
    Ok(quadrature_vector(chi, theta, n_max)?.inner(&state))
}
