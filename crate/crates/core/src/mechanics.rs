//! Dipole-force analytics.
//!
//! With n̂ → α² the light shift acts on the atom as U_{a,b}(φ) = ∓ħGα² sin²φ.
//! Over the interaction time this delivers the impulse
//! p_t(φ) = ±Gτα² sin 2φ (units of ħk₀), whose spread over the localized
//! position density is the mechanical part of the momentum uncertainty.

use serde::Serialize;

use crate::distributions::{
    localization_width, moments, momentum_distribution, position_distribution, Column, Window,
};
use crate::error::{Error, Result};
use crate::model::{AmplitudeField, InteractionConfig, InternalState};

/// Allowed deviation of ∫P dφ from 1 in [`dpt_numeric`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// U_s(φ) in units of ħG: −α² sin²φ for |a⟩, +α² sin²φ for |b⟩.
pub fn dipole_potential(phi: f64, cfg: &InteractionConfig, state: InternalState) -> f64 {
    let s = phi.sin();
    -state.sign() * cfg.alpha * cfg.alpha * s * s
}

/// p_t(φ) = −τ ∂U/∂x in units of ħk₀.
pub fn transferred_momentum(phi: f64, cfg: &InteractionConfig, state: InternalState) -> f64 {
    state.sign() * cfg.g_tau * cfg.alpha * cfg.alpha * (2.0 * phi).sin()
}

/// Position density sampled on a uniform axis.
#[derive(Debug, Clone, Copy)]
pub struct SampledDensity<'a> {
    pub coords: &'a [f64],
    pub values: &'a [f64],
    pub step: f64,
}

impl<'a> SampledDensity<'a> {
    pub fn new(coords: &'a [f64], values: &'a [f64], step: f64) -> Self {
        Self {
            coords,
            values,
            step,
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step
    }

    /// Mean and variance of g(φ) under the density, two-pass.
    fn moments_of(&self, g: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
        let mass: f64 = self.values.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        let mean = self
            .coords
            .iter()
            .zip(self.values)
            .map(|(x, w)| w * g(*x))
            .sum::<f64>()
            / mass;
        let var = self
            .coords
            .iter()
            .zip(self.values)
            .map(|(x, w)| w * (g(*x) - mean).powi(2))
            .sum::<f64>()
            / mass;
        Ok((mean, var))
    }
}

/// Standard deviation of the transferred momentum, Gτα²·√(⟨sin²2φ⟩ − ⟨sin2φ⟩²),
/// by quadrature against a normalized position density.
pub fn dpt_numeric(density: SampledDensity<'_>, cfg: &InteractionConfig) -> Result<f64> {
    let integral = density.integral();
    if !integral.is_finite() || (integral - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Normalization { integral });
    }
    let (_, var) = density.moments_of(|phi| (2.0 * phi).sin())?;
    Ok(cfg.g_tau * cfg.alpha * cfg.alpha * var.sqrt())
}

/// Gaussian closed form of [`dpt_numeric`] for |f|² normal with center φ₀ and
/// standard deviation σ.
///
/// The variance factor 1 − e^{−8σ²}cos4φ₀ − 2e^{−4σ²}sin²2φ₀ is evaluated
/// as (1−A)(2cos²2φ₀ − cos4φ₀·(1−A)) with A = e^{−4σ²}, which is exact
/// algebraically and keeps precision as σ → 0.
pub fn dpt_closed(phi0: f64, sigma: f64, cfg: &InteractionConfig) -> f64 {
    let one_minus_a = -(-4.0 * sigma * sigma).exp_m1();
    let c2 = (2.0 * phi0).cos();
    let c4 = (4.0 * phi0).cos();
    let factor = (one_minus_a * (2.0 * c2 * c2 - c4 * one_minus_a)).max(0.0);
    cfg.g_tau * cfg.alpha * cfg.alpha * (0.5 * factor).sqrt()
}

/// Leading small-σ behaviour of [`dpt_closed`]: 2Gτα²·σ·|cos 2φ₀|.
pub fn dpt_small_sigma(phi0: f64, sigma: f64, cfg: &InteractionConfig) -> f64 {
    2.0 * cfg.g_tau * cfg.alpha * cfg.alpha * sigma * (2.0 * phi0).cos().abs()
}

/// Spread of the impulse when the atom crosses the cavity in the superposition
/// c_a|a⟩ + c_b|b⟩: a classical mixture of +p_t(φ) (weight |c_a|²) and
/// −p_t(φ) (weight |c_b|²) over the position density.
///
/// Var = Var_def(p_t) + 4|c_a|²|c_b|²⟨p_t⟩², never below the definite-state value.
pub fn superposed_spread(density: SampledDensity<'_>, cfg: &InteractionConfig) -> Result<f64> {
    let integral = density.integral();
    if !integral.is_finite() || (integral - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Normalization { integral });
    }
    let (mean, var) = density.moments_of(|phi| (2.0 * phi).sin())?;
    let (wa, wb) = (cfg.c_a.norm_sqr(), cfg.c_b.norm_sqr());
    let scale = cfg.g_tau * cfg.alpha * cfg.alpha;
    Ok(scale * (var + 4.0 * wa * wb * mean * mean).sqrt())
}

/// Normal density on ±12σ around φ₀, `points` samples (odd, so φ₀ is sampled).
pub fn gaussian_density(phi0: f64, sigma: f64, points: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let points = points.max(3) | 1;
    let half = 12.0 * sigma;
    let step = 2.0 * half / (points - 1) as f64;
    let norm = (2.0 * std::f64::consts::PI).sqrt().recip() / sigma;
    let coords: Vec<f64> = (0..points).map(|i| phi0 - half + step * i as f64).collect();
    let values = coords
        .iter()
        .map(|x| norm * (-(x - phi0).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    (coords, values, step)
}

/// One row of the dipole-force sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub phi0: f64,
    pub sigma: f64,
    pub dpt_numeric: f64,
    pub dpt_closed: f64,
    pub dpt_smallsigma: f64,
}

/// Numerical, closed-form and small-σ transferred-momentum spreads for each
/// (φ₀, σ) pair.
pub fn sweep(phi0s: &[f64], sigmas: &[f64], cfg: &InteractionConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(phi0s.len() * sigmas.len());
    for &phi0 in phi0s {
        for &sigma in sigmas {
            if !(sigma > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "sigma",
                    reason: format!("{sigma} must be positive"),
                });
            }
            let (x, p, h) = gaussian_density(phi0, sigma, 8193);
            rows.push(SweepRow {
                phi0,
                sigma,
                dpt_numeric: dpt_numeric(SampledDensity::new(&x, &p, h), cfg)?,
                dpt_closed: dpt_closed(phi0, sigma, cfg),
                dpt_smallsigma: dpt_small_sigma(phi0, sigma, cfg),
            });
        }
    }
    Ok(rows)
}

/// Potential and impulse curves along φ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanicsCurves {
    pub phi: Vec<f64>,
    pub u_a: Vec<f64>,
    pub u_b: Vec<f64>,
    pub p_t_a: Vec<f64>,
    pub p_t_b: Vec<f64>,
}

pub fn curves(phis: &[f64], cfg: &InteractionConfig) -> MechanicsCurves {
    let f = |g: fn(f64, &InteractionConfig, InternalState) -> f64, s| {
        phis.iter().map(|&x| g(x, cfg, s)).collect()
    };
    MechanicsCurves {
        phi: phis.to_vec(),
        u_a: f(dipole_potential, InternalState::A),
        u_b: f(dipole_potential, InternalState::B),
        p_t_a: f(transferred_momentum, InternalState::A),
        p_t_b: f(transferred_momentum, InternalState::B),
    }
}

/// Localization and momentum figures for one measured branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchFigures {
    pub state: InternalState,
    /// Probability density of the record (χ₀, state).
    pub probability: f64,
    pub delta_x: f64,
    /// Standard deviation of the branch momentum distribution.
    pub delta_p: f64,
    /// Transferred-momentum spread for an atom definitely in one internal state.
    pub delta_p_t: f64,
    /// Δp − Δp_t; a heuristic split of Δp into knowledge and mechanical parts.
    pub delta_p_k_heuristic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigurationFigures {
    pub label: String,
    pub ramsey_on: bool,
    pub theta: f64,
    pub chi0: f64,
    pub branches: Vec<BranchFigures>,
    /// Δp_t over the total localized density, atom in a definite state.
    pub mechanical_definite: f64,
    /// Mixture spread over the same density when the atom crosses the cavity
    /// in the superposed state (only with the Ramsey pulses on).
    pub mechanical_superposed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopperReport {
    pub configurations: Vec<ConfigurationFigures>,
    /// Superposed spread of the first Ramsey-on configuration minus the
    /// definite-state spread of the first field-only one, when both exist.
    pub superposed_excess: Option<f64>,
}

/// Compares localization width, momentum width and the mechanical share for
/// each labelled configuration on the same initial wavepacket.
pub fn popper_report(
    configs: &[(String, InteractionConfig)],
    wp: &AmplitudeField,
) -> Result<PopperReport> {
    let mut out = Vec::with_capacity(configs.len());
    for (label, cfg) in configs {
        let pos = position_distribution(wp, cfg)?;
        let mom = momentum_distribution(wp, cfg)?;
        let mut branches = Vec::new();
        for state in InternalState::BOTH {
            let column = if cfg.ramsey_on {
                Column::dual(state)
            } else {
                Column::single(state)
            };
            let probability = pos.probability(column).unwrap_or(0.0);
            if probability <= 0.0 {
                continue;
            }
            let values: Vec<f64> = pos
                .column(column)
                .unwrap()
                .iter()
                .map(|v| v / probability)
                .collect();
            let delta_x = localization_width(&pos, column, Window::Full)?;
            let delta_p = moments(&mom, column).map(|(_, s)| s).unwrap_or(0.0);
            let delta_p_t = dpt_numeric(SampledDensity::new(&pos.coords, &values, pos.step), cfg)?;
            branches.push(BranchFigures {
                state,
                probability,
                delta_x,
                delta_p,
                delta_p_t,
                delta_p_k_heuristic: delta_p - delta_p_t,
            });
        }
        let envelope = pos
            .envelope
            .as_ref()
            .expect("position tables carry the envelope");
        let total: f64 = envelope.iter().sum::<f64>() * pos.step;
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let localized: Vec<f64> = envelope.iter().map(|v| v / total).collect();
        let density = SampledDensity::new(&pos.coords, &localized, pos.step);
        out.push(ConfigurationFigures {
            label: label.clone(),
            ramsey_on: cfg.ramsey_on,
            theta: cfg.theta,
            chi0: cfg.chi0,
            branches,
            mechanical_definite: dpt_numeric(density, cfg)?,
            mechanical_superposed: if cfg.ramsey_on {
                Some(superposed_spread(density, cfg)?)
            } else {
                None
            },
        });
    }
    let dual = out.iter().find_map(|c| c.mechanical_superposed);
    let field = out
        .iter()
        .find(|c| !c.ramsey_on)
        .map(|c| c.mechanical_definite);
    let superposed_excess = match (dual, field) {
        (Some(d), Some(f)) => Some(d - f),
        _ => None,
    };
    Ok(PopperReport {
        configurations: out,
        superposed_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn cfg() -> InteractionConfig {
        InteractionConfig::default()
    }

    #[test]
    fn potential_examples() {
        let c = cfg();
        for s in InternalState::BOTH {
            assert_eq!(dipole_potential(0.0, &c, s), 0.0);
        }
        assert!((dipole_potential(FRAC_PI_2, &c, InternalState::A) + 6.25).abs() < 1e-14);
        for phi in [0.3, 1.1, -2.0] {
            assert_eq!(
                dipole_potential(phi, &c, InternalState::A),
                -dipole_potential(phi, &c, InternalState::B)
            );
        }
    }

    #[test]
    fn impulse_examples() {
        let c = cfg();
        let p = transferred_momentum(FRAC_PI_4, &c, InternalState::A);
        assert!((p - PI * 6.25).abs() < 1e-12);
        assert!((p - 19.63).abs() < 0.01);
        assert!(transferred_momentum(0.0, &c, InternalState::A).abs() < 1e-15);
        assert!(transferred_momentum(FRAC_PI_2, &c, InternalState::B).abs() < 1e-14);
    }

    #[test]
    fn impulse_is_force_times_time() {
        let c = cfg();
        let h = 1e-6;
        for k in 0..50 {
            let phi = -1.5 + 0.061 * k as f64;
            for s in InternalState::BOTH {
                let du = (dipole_potential(phi + h, &c, s) - dipole_potential(phi - h, &c, s))
                    / (2.0 * h);
                let fd = -c.g_tau * du;
                let p = transferred_momentum(phi, &c, s);
                assert!((fd - p).abs() <= 1e-6 * p.abs().max(1.0), "{phi} {fd} {p}");
            }
        }
    }

    #[test]
    fn point_particle_has_no_spread() {
        let coords = [0.0, 0.5, 1.0];
        let values = [0.0, 2.0, 0.0];
        let d = SampledDensity::new(&coords, &values, 0.5);
        assert!(dpt_numeric(d, &cfg()).unwrap().abs() < 1e-15);
        // equal superposition at the same point: ±p_t two-point distribution
        let s = superposed_spread(d, &cfg()).unwrap();
        let p = transferred_momentum(0.5, &cfg(), InternalState::A);
        assert!((s - p.abs()).abs() < 1e-12);
        // definite entry state: no mixture
        let def = cfg().definite(InternalState::A);
        assert!(superposed_spread(d, &def).unwrap().abs() < 1e-15);
    }

    #[test]
    fn uniform_period_gives_over_root_two() {
        let n = 10_000;
        let h = PI / n as f64;
        let coords: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let values = vec![1.0 / PI; n];
        let v = dpt_numeric(SampledDensity::new(&coords, &values, h), &cfg()).unwrap();
        let scale = PI * 6.25;
        assert!((v - scale / 2f64.sqrt()).abs() < 1e-10 * scale);
    }

    #[test]
    fn unnormalized_density_rejected() {
        let coords = [0.0, 1.0];
        let values = [1.0, 1.0];
        let err = dpt_numeric(SampledDensity::new(&coords, &values, 1.0), &cfg()).unwrap_err();
        assert!(matches!(err, Error::Normalization { .. }));
    }

    #[test]
    fn closed_form_examples() {
        let c = cfg();
        for phi0 in [0.0, 0.3, FRAC_PI_4, 1.2] {
            assert!(dpt_closed(phi0, 1e-9, &c) < 1e-6);
        }
        let v = dpt_closed(FRAC_PI_4, 0.3142, &c);
        let reduced = PI * 6.25 / 2f64.sqrt() * (1.0 - (-4.0f64 * 0.3142 * 0.3142).exp());
        assert!((v - reduced).abs() < 1e-12);
        assert!((v - 4.53).abs() < 0.01, "{v}");
    }

    #[test]
    fn closed_form_matches_unsimplified_expression() {
        let c = cfg();
        for &(phi0, s) in &[(0.1, 0.2), (0.9, 0.05), (2.0, 0.7), (FRAC_PI_4, 0.4)] {
            let e = 1.0
                - (-8.0f64 * s * s).exp() * (4.0f64 * phi0).cos()
                - 2.0 * (-4.0f64 * s * s).exp() * (2.0f64 * phi0).sin().powi(2);
            let direct = PI * 6.25 * (0.5 * e).sqrt();
            assert!((dpt_closed(phi0, s, &c) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn small_sigma_examples() {
        let c = cfg();
        assert_eq!(
            dpt_small_sigma(FRAC_PI_4, 0.1, &c),
            2.0 * PI * 6.25 * 0.1 * (FRAC_PI_2).cos().abs()
        );
        assert!(dpt_small_sigma(FRAC_PI_4, 0.1, &c) < 1e-14);
        let rel = (dpt_small_sigma(0.0, 0.01, &c) - dpt_closed(0.0, 0.01, &c)).abs()
            / dpt_closed(0.0, 0.01, &c);
        assert!(rel < 1e-3);
        assert!(
            (dpt_small_sigma(0.3, 0.02, &c) - 2.0 * dpt_small_sigma(0.3, 0.01, &c)).abs() < 1e-14
        );
    }

    #[test]
    fn elimination_at_midway() {
        let c = cfg();
        let n = 2000;
        let best = (0..=n)
            .map(|k| FRAC_PI_2 * k as f64 / n as f64)
            .min_by(|a, b| dpt_closed(*a, 0.05, &c).total_cmp(&dpt_closed(*b, 0.05, &c)))
            .unwrap();
        assert!((best - FRAC_PI_4).abs() < 1e-3);
    }

    #[test]
    fn sweep_agrees() {
        let rows = sweep(&[0.0, 0.4, FRAC_PI_4], &[0.05, 0.2], &cfg()).unwrap();
        assert_eq!(rows.len(), 6);
        for r in rows {
            assert!((r.dpt_numeric - r.dpt_closed).abs() <= 1e-10 * r.dpt_closed.max(1e-12));
        }
        assert!(sweep(&[0.0], &[0.0], &cfg()).is_err());
    }
}
