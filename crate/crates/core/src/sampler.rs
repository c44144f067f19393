//! Born-rule Monte Carlo of measurement records (χ, internal state).
//!
//! The joint outcome density is ρ(χ, s) = ∫ dφ |f(φ)|² |amp_s(φ; χ)|², which
//! integrates to one over χ and s. Records are drawn by inverse CDF on the χ
//! marginal followed by a conditional state draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::filters::RotatedBranches;
use crate::model::{AmplitudeField, InteractionConfig, InternalState};

/// Generator recorded in run metadata.
pub const GENERATOR: &str = "ChaCha20 (rand_chacha), one stream per chunk";

/// Records drawn per RNG stream.
pub const CHUNK: usize = 4096;

pub const DEFAULT_CHI_POINTS: usize = 8001;

/// Minimum reach of the χ grid beyond ±2α.
pub const REQUIRED_MARGIN: f64 = 6.0;

const DEFAULT_MARGIN: f64 = 8.0;

/// Uniform grid of quadrature outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiGrid {
    pub lo: f64,
    pub hi: f64,
    pub len: usize,
}

impl ChiGrid {
    pub fn new(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite("chi grid"));
        }
        if hi <= lo || len < 3 {
            return Err(Error::InvalidParameter {
                name: "chi grid",
                reason: format!("need lo < hi and at least 3 points, got [{lo}, {hi}] with {len}"),
            });
        }
        Ok(Self { lo, hi, len })
    }

    pub fn default_for(alpha: f64) -> Self {
        let reach = 2.0 * alpha + DEFAULT_MARGIN;
        Self {
            lo: -reach,
            hi: reach,
            len: DEFAULT_CHI_POINTS,
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.len - 1) as f64
    }

    pub fn chi(&self, i: usize) -> f64 {
        self.lo + self.step() * i as f64
    }
}

/// Joint outcome density ρ(χ, s) tabulated on a [`ChiGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDensity {
    pub grid: ChiGrid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl OutcomeDensity {
    pub fn marginal(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| a + b).collect()
    }

    fn trapezoid(&self, v: &[f64]) -> f64 {
        let h = self.grid.step();
        let n = v.len();
        h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
    }

    /// ∫ Σ_s ρ dχ.
    pub fn total_mass(&self) -> f64 {
        self.trapezoid(&self.marginal())
    }

    /// ∫ ρ(χ, s) dχ.
    pub fn state_probability(&self, state: InternalState) -> f64 {
        match state {
            InternalState::A => self.trapezoid(&self.a),
            InternalState::B => self.trapezoid(&self.b),
        }
    }

    /// Linear interpolation of (ρ_a, ρ_b) at χ; zero outside the grid.
    pub fn at(&self, chi: f64) -> (f64, f64) {
        let g = self.grid;
        if !(chi >= g.lo && chi <= g.hi) {
            return (0.0, 0.0);
        }
        let x = (chi - g.lo) / g.step();
        let i = (x.floor() as usize).min(g.len - 2);
        let t = x - i as f64;
        (
            self.a[i] * (1.0 - t) + self.a[i + 1] * t,
            self.b[i] * (1.0 - t) + self.b[i + 1] * t,
        )
    }
}

/// Per-position ingredients: weight |f|²dφ and the rotated branches.
fn weighted_branches(wp: &AmplitudeField, cfg: &InteractionConfig) -> Vec<(f64, RotatedBranches)> {
    let grid = wp.grid();
    wp.values()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.norm_sqr() > 0.0)
        .map(|(i, f)| {
            (
                f.norm_sqr() * grid.step(),
                RotatedBranches::new(grid.phi(i), cfg),
            )
        })
        .collect()
}

fn joint_at(points: &[(f64, RotatedBranches)], cfg: &InteractionConfig, chi: f64) -> (f64, f64) {
    points.iter().fold((0.0, 0.0), |(sa, sb), (w, br)| {
        let (a, b) = br.measured(chi, cfg);
        (sa + w * a.norm_sqr(), sb + w * b.norm_sqr())
    })
}

/// ρ(χ, s) at a single outcome, by direct quadrature over φ.
pub fn outcome_density_at(wp: &AmplitudeField, cfg: &InteractionConfig, chi: f64) -> (f64, f64) {
    joint_at(&weighted_branches(wp, cfg), cfg, chi)
}

/// Tabulates ρ(χ, s) on `chi_grid`, which must reach 2α + 6 on both sides.
pub fn outcome_density(
    wp: &AmplitudeField,
    cfg: &InteractionConfig,
    chi_grid: ChiGrid,
) -> Result<OutcomeDensity> {
    cfg.validate()?;
    let need = 2.0 * cfg.alpha + REQUIRED_MARGIN;
    if chi_grid.lo > -need || chi_grid.hi < need {
        return Err(Error::MassDeficit {
            lo: chi_grid.lo,
            hi: chi_grid.hi,
            need_lo: -need,
            need_hi: need,
        });
    }
    let points = weighted_branches(wp, cfg);
    let (a, b): (Vec<f64>, Vec<f64>) = (0..chi_grid.len)
        .into_par_iter()
        .map(|i| joint_at(&points, cfg, chi_grid.chi(i)))
        .unzip();
    Ok(OutcomeDensity {
        grid: chi_grid,
        a,
        b,
    })
}

/// One simulated measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub chi: f64,
    pub state: InternalState,
    /// ρ(χ, state) at the drawn outcome; normalizes the posterior.
    pub joint_density: f64,
}

impl MeasurementRecord {
    /// Conditional position density given this record, normalized on the grid.
    pub fn posterior(&self, wp: &AmplitudeField, cfg: &InteractionConfig) -> Result<Vec<f64>> {
        let grid = wp.grid();
        let mut out: Vec<f64> = wp
            .values()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let w = f.norm_sqr();
                if w == 0.0 {
                    return 0.0;
                }
                let (a, b) = RotatedBranches::new(grid.phi(i), cfg).measured(self.chi, cfg);
                w * match self.state {
                    InternalState::A => a.norm_sqr(),
                    InternalState::B => b.norm_sqr(),
                }
            })
            .collect();
        let mass: f64 = out.iter().sum::<f64>() * grid.step();
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        out.iter_mut().for_each(|v| *v /= mass);
        Ok(out)
    }
}

/// Inverse-CDF sampler over a tabulated outcome density.
#[derive(Debug, Clone)]
pub struct RecordSampler {
    density: OutcomeDensity,
    cdf: Vec<f64>,
}

impl RecordSampler {
    pub fn new(density: OutcomeDensity) -> Result<Self> {
        let m = density.marginal();
        let h = density.grid.step();
        let mut cdf = Vec::with_capacity(m.len());
        cdf.push(0.0);
        for i in 1..m.len() {
            cdf.push(cdf[i - 1] + 0.5 * h * (m[i - 1] + m[i]));
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroMass);
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { density, cdf })
    }

    pub fn density(&self) -> &OutcomeDensity {
        &self.density
    }

    /// χ with CDF value `u`, linear within each bin.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self
            .cdf
            .partition_point(|c| *c <= u)
            .clamp(1, self.cdf.len() - 1)
            - 1;
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let t = if c1 > c0 {
            ((u - c0) / (c1 - c0)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        self.density.grid.chi(i) + t * self.density.grid.step()
    }

    /// Tabulated CDF at χ (linear within bins).
    pub fn cdf(&self, chi: f64) -> f64 {
        let g = self.density.grid;
        if chi <= g.lo {
            return 0.0;
        }
        if chi >= g.hi {
            return 1.0;
        }
        let x = (chi - g.lo) / g.step();
        let i = (x.floor() as usize).min(g.len - 2);
        let t = x - i as f64;
        self.cdf[i] * (1.0 - t) + self.cdf[i + 1] * t
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> MeasurementRecord {
        let chi = self.quantile(rng.random::<f64>());
        let (a, b) = self.density.at(chi);
        let p_a = if a + b > 0.0 { a / (a + b) } else { 0.0 };
        let state = if rng.random::<f64>() < p_a {
            InternalState::A
        } else {
            InternalState::B
        };
        MeasurementRecord {
            chi,
            state,
            joint_density: match state {
                InternalState::A => a,
                InternalState::B => b,
            },
        }
    }

    /// `count` i.i.d. records; chunk `c` draws from ChaCha20 stream `c` of `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<MeasurementRecord> {
        let chunks = count.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let n = CHUNK.min(count - c * CHUNK);
                (0..n).map(|_| self.draw(&mut rng)).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Draws `count` records for the wavepacket and configuration with the default
/// χ grid.
pub fn sample_records(
    wp: &AmplitudeField,
    cfg: &InteractionConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: "at least one record is required".into(),
        });
    }
    let density = outcome_density(wp, cfg, ChiGrid::default_for(cfg.alpha))?;
    Ok(RecordSampler::new(density)?.sample(count, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² test of `samples` against bin probabilities `probs` over the
/// bins delimited by `edges` (`edges.len() == probs.len() + 1`). Samples
/// outside the edges are ignored; probabilities are renormalized to the
/// covered mass.
pub fn chi_square_test(samples: &[f64], edges: &[f64], probs: &[f64]) -> Result<GoodnessOfFit> {
    if edges.len() != probs.len() + 1 || probs.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "bins",
            reason: format!("{} edges for {} probabilities", edges.len(), probs.len()),
        });
    }
    let mut counts = vec![0usize; probs.len()];
    for &x in samples {
        if x < edges[0] || x >= edges[edges.len() - 1] {
            continue;
        }
        let k = edges.partition_point(|e| *e <= x) - 1;
        counts[k] += 1;
    }
    let n: usize = counts.iter().sum();
    let mass: f64 = probs.iter().sum();
    let statistic = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = n as f64 * p / mass;
            (c as f64 - e).powi(2) / e
        })
        .sum::<f64>();
    let dof = probs.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter {
        name: "dof",
        reason: e.to_string(),
    })?;
    Ok(GoodnessOfFit {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

/// Equal-probability bin edges under the sampler's own CDF.
pub fn equiprobable_edges(sampler: &RecordSampler, bins: usize) -> Vec<f64> {
    let g = sampler.density().grid;
    let mut edges = vec![g.lo];
    edges.extend((1..bins).map(|k| sampler.quantile(k as f64 / bins as f64)));
    edges.push(g.hi);
    edges
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub generator: &'static str,
    pub seed: u64,
    pub count: usize,
    pub count_a: usize,
    pub count_b: usize,
    pub frequency_a: f64,
    pub frequency_b: f64,
    pub probability_a: f64,
    pub probability_b: f64,
    pub chi_mean: f64,
    pub goodness_of_fit: GoodnessOfFit,
}

/// Frequencies plus a χ² test of the outcomes against the sampler's own
/// tabulated density over 50 equiprobable bins.
pub fn summarize(
    sampler: &RecordSampler,
    records: &[MeasurementRecord],
    seed: u64,
) -> Result<SampleSummary> {
    let count = records.len();
    let count_a = records
        .iter()
        .filter(|r| r.state == InternalState::A)
        .count();
    let count_b = count - count_a;
    let chis: Vec<f64> = records.iter().map(|r| r.chi).collect();
    let bins = 50;
    let edges = equiprobable_edges(sampler, bins);
    let probs: Vec<f64> = edges
        .windows(2)
        .map(|w| sampler.cdf(w[1]) - sampler.cdf(w[0]))
        .collect();
    let mass = sampler.density().total_mass();
    Ok(SampleSummary {
        generator: GENERATOR,
        seed,
        count,
        count_a,
        count_b,
        frequency_a: count_a as f64 / count as f64,
        frequency_b: count_b as f64 / count as f64,
        probability_a: sampler.density().state_probability(InternalState::A) / mass,
        probability_b: sampler.density().state_probability(InternalState::B) / mass,
        chi_mean: chis.iter().sum::<f64>() / count as f64,
        goodness_of_fit: chi_square_test(&chis, &edges, &probs)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::model::{build_wavepacket, WavepacketSpec};
    use std::f64::consts::PI;

    fn spike(phi: f64) -> AmplitudeField {
        let grid = Grid::centered(8, 0.0, PI).unwrap();
        build_wavepacket(&WavepacketSpec::spike(phi), &grid).unwrap()
    }

    #[test]
    fn node_spike_density() {
        let cfg = InteractionConfig::default();
        let d = outcome_density(&spike(0.0), &cfg, ChiGrid::default_for(2.5)).unwrap();
        assert!(d.a.iter().all(|v| *v == 0.0));
        for i in (0..d.grid.len).step_by(97) {
            let chi = d.grid.chi(i);
            let unit = (-(chi - 5.0f64).powi(2) / 2.0).exp() / (2.0 * PI).sqrt();
            assert!((d.b[i] - unit).abs() < 1e-14);
        }
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antinode_spike_sits_at_minus_two_alpha() {
        let cfg = InteractionConfig::default();
        let grid = Grid::centered(8, PI / 2.0, PI).unwrap();
        let wp = build_wavepacket(&WavepacketSpec::spike(PI / 2.0), &grid).unwrap();
        let d = outcome_density(&wp, &cfg, ChiGrid::default_for(2.5)).unwrap();
        let m = d.marginal();
        let (imax, _) = m
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((d.grid.chi(imax) + 5.0).abs() < 0.01);
    }

    #[test]
    fn narrow_chi_grid_rejected() {
        let cfg = InteractionConfig::default();
        let err =
            outcome_density(&spike(0.0), &cfg, ChiGrid::new(-5.0, 5.0, 101).unwrap()).unwrap_err();
        assert!(matches!(err, Error::MassDeficit { .. }));
        assert!(ChiGrid::new(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn node_spike_records_all_b() {
        let cfg = InteractionConfig::default();
        let recs = sample_records(&spike(0.0), &cfg, 5000, 7).unwrap();
        assert!(recs.iter().all(|r| r.state == InternalState::B));
        assert!(sample_records(&spike(0.0), &cfg, 0, 7).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = InteractionConfig::default();
        let wp = spike(0.6);
        let a = sample_records(&wp, &cfg, 10_000, 42).unwrap();
        let b = sample_records(&wp, &cfg, 10_000, 42).unwrap();
        let c = sample_records(&wp, &cfg, 10_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let cfg = InteractionConfig::default();
        let d = outcome_density(&spike(0.6), &cfg, ChiGrid::default_for(2.5)).unwrap();
        let s = RecordSampler::new(d).unwrap();
        for u in [0.01, 0.2, 0.5, 0.77, 0.999] {
            assert!((s.cdf(s.quantile(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_is_normalized() {
        let spec = WavepacketSpec::flat_top(PI);
        let grid = spec.default_grid(10, 4.0).unwrap();
        let wp = build_wavepacket(&spec, &grid).unwrap();
        let cfg = InteractionConfig::default();
        let recs = sample_records(&wp, &cfg, 10, 1).unwrap();
        for r in recs {
            let p = r.posterior(&wp, &cfg).unwrap();
            assert!((p.iter().sum::<f64>() * grid.step() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn chi_square_rejects_wrong_model() {
        let samples: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        let edges: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let fair = vec![0.1; 10];
        assert!(chi_square_test(&samples, &edges, &fair).unwrap().p_value > 0.99);
        let skewed: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert!(chi_square_test(&samples, &edges, &skewed).unwrap().p_value < 1e-6);
    }
}
