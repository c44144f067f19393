//! Closed-form versus number-basis checks and numerical invariants, run as one
//! report.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::distributions::{momentum_distribution, position_distribution, Column};
use crate::error::Result;
use crate::filters::{branch_amplitudes, common_weight, quadrature_overlap, FilterSample};
use crate::fock::{default_n_max, oracle_amplitudes, oracle_overlap, simulate_final};
use crate::mechanics::{dpt_closed, dpt_numeric, gaussian_density, SampledDensity};
use crate::model::{Convention, InteractionConfig, InternalState};
use crate::sampler::{outcome_density, ChiGrid};

/// Relative agreement required between closed forms and the number basis.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Amplitudes below this fraction of c_w are compared in absolute terms.
pub const RELATIVE_FLOOR: f64 = 1e-4;

const LATTICE_SEED: u64 = 0x5_eed0_fa70;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, samples: usize, max_error: f64, tolerance: f64) -> Self {
        Self {
            name,
            samples,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub elapsed_seconds: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

/// |x − y| scaled by max(|y|, floor).
pub fn relative_error(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / y.norm().max(RELATIVE_FLOOR * common_weight())
}

fn max_of(it: impl ParallelIterator<Item = Result<f64>>) -> Result<f64> {
    it.try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Random (φ, χ₀, α) tuples at θ = 0 plus an optional random θ.
pub fn random_configs(
    count: usize,
    seed: u64,
    random_theta: bool,
) -> Vec<(f64, InteractionConfig)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let phi = rng.random_range(0.0..PI);
            let alpha = rng.random_range(0.5..3.0);
            let chi0 = rng.random_range(-2.0 * alpha - 3.0..2.0 * alpha + 3.0);
            let theta = if random_theta {
                rng.random_range(0.0..2.0 * PI)
            } else {
                0.0
            };
            let ramsey_on = rng.random_bool(0.5);
            let cfg = InteractionConfig::default()
                .with_alpha(alpha)
                .with_chi0(chi0)
                .with_theta(theta)
                .with_ramsey(ramsey_on);
            (phi, cfg)
        })
        .collect()
}

/// Largest relative deviation of [`branch_amplitudes`] from the number-basis
/// projection over the given tuples, in both measurement modes.
pub fn oracle_deviation(tuples: &[(f64, InteractionConfig)]) -> Result<f64> {
    max_of(tuples.par_iter().map(|(phi, cfg)| {
        let n_max = default_n_max(cfg.alpha);
        let dual = cfg.with_ramsey(true);
        let (a, b) = branch_amplitudes(*phi, &dual);
        let (oa, ob) = oracle_amplitudes(*phi, &dual, n_max)?;
        let mut worst = relative_error(a, oa).max(relative_error(b, ob));
        // field-only amplitudes are those of an atom definitely in one state
        let off = cfg.with_ramsey(false);
        let single = branch_amplitudes(*phi, &off);
        let (oa, _) = oracle_amplitudes(*phi, &off.definite(InternalState::A), n_max)?;
        let (_, ob) = oracle_amplitudes(*phi, &off.definite(InternalState::B), n_max)?;
        worst = worst
            .max(relative_error(single.0, oa))
            .max(relative_error(single.1, ob));
        Ok(worst)
    }))
}

/// Overlap closed form against the number basis on a (χ, η, θ) lattice.
pub fn overlap_lattice_deviation(
    alpha: f64,
    n_chi: usize,
    n_eta: usize,
    n_theta: usize,
) -> Result<f64> {
    let reach = 2.0 * alpha + 3.0;
    let n_max = default_n_max(alpha);
    let points: Vec<(f64, f64, f64)> = (0..n_chi)
        .flat_map(|i| {
            let chi = -reach + 2.0 * reach * i as f64 / (n_chi - 1) as f64;
            (0..n_eta).flat_map(move |j| {
                let eta = 2.0 * PI * j as f64 / n_eta as f64;
                (0..n_theta).map(move |k| (chi, eta, PI * k as f64 / (n_theta - 1) as f64))
            })
        })
        .collect();
    max_of(points.par_iter().map(|&(chi, eta, theta)| {
        let closed = quadrature_overlap(alpha, eta, theta, chi);
        let oracle = oracle_overlap(Complex64::from_polar(alpha, eta), theta, chi, n_max)?;
        Ok(relative_error(closed, oracle))
    }))
}

/// |∫|⟨χ|α⟩|² dχ − 1| with the overlap taken through the number basis.
pub fn completeness_deviation(alpha: f64, points: usize) -> Result<f64> {
    let reach = 2.0 * alpha + 8.0;
    let h = 2.0 * reach / (points - 1) as f64;
    let n_max = default_n_max(alpha);
    let beta = Complex64::new(alpha, 0.0);
    let values: Vec<f64> = (0..points)
        .into_par_iter()
        .map(|i| oracle_overlap(beta, 0.0, -reach + h * i as f64, n_max).map(|z| z.norm_sqr()))
        .collect::<Result<_>>()?;
    let integral = h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[points - 1]));
    Ok((integral - 1.0).abs())
}

/// Change of the oracle amplitudes when n_max is doubled.
pub fn truncation_deviation(tuples: &[(f64, InteractionConfig)]) -> Result<f64> {
    max_of(tuples.par_iter().map(|(phi, cfg)| {
        let n = default_n_max(cfg.alpha);
        let (a1, b1) = oracle_amplitudes(*phi, cfg, n)?;
        let (a2, b2) = oracle_amplitudes(*phi, cfg, 2 * n)?;
        Ok((a1 - a2).norm().max((b1 - b2).norm()))
    }))
}

pub fn unitarity_deviation(tuples: &[(f64, InteractionConfig)]) -> f64 {
    tuples
        .iter()
        .flat_map(|(phi, cfg)| {
            [true, false].map(|pulse| {
                (simulate_final(*phi, cfg, pulse, default_n_max(cfg.alpha)).total_norm_sqr() - 1.0)
                    .abs()
            })
        })
        .fold(0.0, f64::max)
}

/// Worst violation of |I_a|² + |I_b|² = 1 and F_a + F_b = D² at the three
/// reference outcomes χ₀ ∈ {2α, 0, −2α}.
pub fn filter_identity_deviation(cfg: &InteractionConfig, points: usize) -> f64 {
    let mut worst = 0.0f64;
    for chi0 in [2.0 * cfg.alpha, 0.0, -2.0 * cfg.alpha] {
        let cfg = cfg.with_chi0(chi0).with_theta(0.0);
        for i in 0..points {
            let s = FilterSample::evaluate(PI * i as f64 / (points - 1) as f64, &cfg);
            worst = worst
                .max((s.i_a.norm_sqr() + s.i_b.norm_sqr() - 1.0).abs())
                .max((s.f_a() + s.f_b() - s.d * s.d).abs());
        }
    }
    worst
}

/// Parseval per branch: position probability versus momentum probability.
pub fn parseval_deviation(config: &Config) -> Result<f64> {
    let r = config.resolve(Convention::PaperFigure)?;
    let wp = r.wavepacket()?;
    let pos = position_distribution(&wp, &r.interaction)?;
    let mom = momentum_distribution(&wp, &r.interaction)?;
    Ok(Column::ALL
        .iter()
        .filter_map(|c| Some((pos.probability(*c)? - mom.probability(*c)?).abs()))
        .fold(0.0, f64::max))
}

/// |∫Σ_s ρ(χ, s) dχ − 1| for the configured wavepacket.
pub fn outcome_mass_deviation(config: &Config) -> Result<f64> {
    let r = config.resolve(Convention::PaperFigure)?;
    let wp = r.wavepacket()?;
    let d = outcome_density(
        &wp,
        &r.interaction,
        ChiGrid::default_for(r.interaction.alpha),
    )?;
    Ok((d.total_mass() - 1.0).abs())
}

/// Relative gap between the numerically integrated and closed-form Δp_t.
pub fn mechanics_deviation(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let cfg = InteractionConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..count {
        let phi0 = rng.random_range(0.0..PI);
        let sigma = rng.random_range(0.02..0.8);
        let (x, p, h) = gaussian_density(phi0, sigma, 8193);
        let numeric = dpt_numeric(SampledDensity::new(&x, &p, h), &cfg)?;
        let closed = dpt_closed(phi0, sigma, &cfg);
        worst = worst.max((numeric - closed).abs() / closed.abs().max(1e-300));
    }
    Ok(worst)
}

/// Runs every check on default settings.
pub fn run_validation() -> Result<ValidationReport> {
    let start = Instant::now();
    let theta0 = random_configs(100, LATTICE_SEED, false);
    let general = random_configs(50, LATTICE_SEED + 1, true);
    let small = random_configs(20, LATTICE_SEED + 2, true);
    let config = Config::default();
    let mut grid_cfg = config.clone();
    grid_cfg.grid.log2_points = 12;

    let checks = vec![
        Check::new(
            "oracle amplitudes, theta = 0",
            theta0.len(),
            oracle_deviation(&theta0)?,
            ORACLE_TOLERANCE,
        ),
        Check::new(
            "oracle amplitudes, general theta",
            general.len(),
            oracle_deviation(&general)?,
            ORACLE_TOLERANCE,
        ),
        Check::new(
            "quadrature overlap lattice 21x21x11",
            21 * 21 * 11,
            overlap_lattice_deviation(2.5, 21, 21, 11)?,
            ORACLE_TOLERANCE,
        ),
        Check::new(
            "quadrature completeness",
            4001,
            completeness_deviation(2.5, 4001)?,
            1e-8,
        ),
        Check::new(
            "Fock truncation convergence",
            small.len(),
            truncation_deviation(&small)?,
            1e-9,
        ),
        Check::new(
            "evolution unitarity",
            2 * small.len(),
            unitarity_deviation(&small),
            1e-12,
        ),
        Check::new(
            "filter identities",
            3 * 1001,
            filter_identity_deviation(&InteractionConfig::default(), 1001),
            1e-12,
        ),
        Check::new(
            "Parseval per branch",
            Column::ALL.len(),
            parseval_deviation(&config)?,
            1e-9,
        ),
        Check::new(
            "outcome density mass",
            1,
            outcome_mass_deviation(&grid_cfg)?,
            1e-8,
        ),
        Check::new(
            "transferred-momentum closed form",
            20,
            mechanics_deviation(20, LATTICE_SEED)?,
            1e-10,
        ),
    ];
    Ok(ValidationReport {
        checks,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_configs_are_reproducible() {
        assert_eq!(random_configs(5, 1, true), random_configs(5, 1, true));
        assert!(random_configs(20, 3, false)
            .iter()
            .all(|(_, c)| c.theta == 0.0));
    }

    #[test]
    fn relative_error_uses_floor() {
        let tiny = Complex64::new(1e-30, 0.0);
        assert!(relative_error(tiny, Complex64::new(0.0, 0.0)) < 1e-20);
        assert!(
            (relative_error(Complex64::new(1.1, 0.0), Complex64::new(1.0, 0.0)) - 0.1).abs()
                < 1e-12
        );
    }

    #[test]
    fn small_lattice_agrees() {
        assert!(overlap_lattice_deviation(1.5, 5, 4, 3).unwrap() < ORACLE_TOLERANCE);
        assert!(oracle_deviation(&random_configs(10, 9, true)).unwrap() < ORACLE_TOLERANCE);
    }
}
