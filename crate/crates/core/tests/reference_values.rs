//! Worked examples: each value is checked against an evaluation made here,
//! independently of the closed forms under test.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use atomloc::distributions::{branch_probability, position_distribution, Column};
use atomloc::filters::{
    amplitude_filter, branch_amplitudes, light_shift, phase_filter, quadrature_overlap,
    rotation_angles,
};
use atomloc::fock::{coherent_state_within, oracle_amplitudes, oracle_overlap};
use atomloc::mechanics::{
    dpt_closed, dpt_numeric, dpt_small_sigma, gaussian_density, popper_report,
    transferred_momentum, SampledDensity,
};
use atomloc::model::{
    build_wavepacket, validate_regime, InteractionConfig, InternalState, PhysicalRegime,
    WavepacketSpec,
};
use atomloc::sampler::{outcome_density, ChiGrid};
use num_complex::Complex64;

/// (2π)^{-1/4}
fn norm() -> f64 {
    (2.0 * PI).powf(-0.25)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn hyperfine_regime_passes() {
    let two_pi = 2.0 * PI;
    let regime = PhysicalRegime {
        g_a: two_pi * 10e6,
        g_b: two_pi * 10e6,
        delta_a: -two_pi * 1.5e9,
        delta_b: two_pi * 1.5e9,
        gamma_a: two_pi * 6e6,
        gamma_b: two_pi * 6e6,
        margin: 100.0,
    };
    let r = validate_regime(&regime, &InteractionConfig::default()).unwrap();
    assert!(r.passed());
    assert!(close(r.ratio_a, 250.0, 1e-12) && close(r.ratio_b, 250.0, 1e-12));
}

#[test]
fn flat_top_is_constant_on_support() {
    let spec = WavepacketSpec::flat_top(PI);
    let grid = spec.default_grid(12, 4.0).unwrap();
    let wp = build_wavepacket(&spec, &grid).unwrap();
    let inside: Vec<f64> = grid
        .phis()
        .zip(wp.density())
        .filter(|(phi, _)| phi.abs() < PI - 1e-9)
        .map(|(_, d)| d)
        .collect();
    assert!(inside.iter().all(|d| close(*d, inside[0], 1e-12)));
    assert!(grid
        .phis()
        .zip(wp.density())
        .filter(|(phi, _)| phi.abs() > PI + 1e-9)
        .all(|(_, d)| d == 0.0));
}

#[test]
fn rotation_angles_at_reference_points() {
    let cfg = InteractionConfig::default();
    assert!(close(light_shift(FRAC_PI_2, &cfg), PI, 1e-15));
    assert!(close(light_shift(FRAC_PI_4, &cfg), FRAC_PI_2, 1e-15));
    let (a, b) = rotation_angles(FRAC_PI_2, &cfg);
    assert!(close(a, PI, 1e-15) && close(b, -PI, 1e-15));
}

#[test]
fn overlap_reference_point() {
    let closed = quadrature_overlap(2.5, 0.7, 0.2, 1.3);
    let oracle = oracle_overlap(Complex64::from_polar(2.5, 0.7), 0.2, 1.3, 80).unwrap();
    assert!((closed - oracle).norm() <= 1e-8 * oracle.norm());
}

#[test]
fn amplitude_filter_at_node() {
    let cfg = InteractionConfig::default();
    assert!(close(amplitude_filter(0.0, &cfg), (-6.25f64).exp(), 1e-15));
    let (_, b) =
        oracle_amplitudes(0.0, &cfg.with_ramsey(false).definite(InternalState::B), 80).unwrap();
    assert!(close(b.norm() / norm(), (-6.25f64).exp(), 1e-10));
}

#[test]
fn phase_filter_at_eighth_period() {
    let cfg = InteractionConfig::default();
    let rot = PI * FRAC_PI_8.sin().powi(2);
    let expected = 3.125 * (2.0 * rot).sin();
    assert!(close(phase_filter(FRAC_PI_8, &cfg), expected, 1e-14));
    // the |a⟩ branch amplitude is N·D·e^{−iΔ}
    let cfg_a = cfg.with_ramsey(false).definite(InternalState::A);
    let (a, _) = oracle_amplitudes(FRAC_PI_8, &cfg_a, 80).unwrap();
    assert!(close(-a.arg(), expected, 1e-9));
}

#[test]
fn single_measurement_is_state_blind() {
    let cfg = InteractionConfig::default()
        .with_ramsey(false)
        .with_chi0(0.7);
    for i in 0..200 {
        let (a, b) = branch_amplitudes(i as f64 * 0.0317, &cfg);
        assert!((a.norm() - b.norm()).abs() < 1e-15);
    }
}

#[test]
fn rotated_quadrature_peaks_at_midway() {
    let cfg = InteractionConfig::default()
        .with_ramsey(false)
        .with_theta(FRAC_PI_2)
        .with_chi0(5.0);
    let n = 20_000;
    let best = (0..=n)
        .map(|i| FRAC_PI_2 * i as f64 / n as f64)
        .max_by(|x, y| {
            let ax = branch_amplitudes(*x, &cfg).0.norm();
            let ay = branch_amplitudes(*y, &cfg).0.norm();
            ax.total_cmp(&ay)
        })
        .unwrap();
    assert!((best - FRAC_PI_4).abs() < 1e-3);
    assert!(close(
        branch_amplitudes(FRAC_PI_4, &cfg).0.norm(),
        norm(),
        1e-12
    ));
}

#[test]
fn coherent_state_tail_bound() {
    let s = coherent_state_within(Complex64::new(2.5, 0.0), 80, 1e-12).unwrap();
    assert!(s.norm_sqr() >= 1.0 - 1e-12);
}

#[test]
fn quadrature_completeness() {
    let points = 4801;
    let h = 24.0 / (points - 1) as f64;
    let mut closed = 0.0;
    let mut oracle = 0.0;
    for i in 0..points {
        let chi = -12.0 + h * i as f64;
        let w = if i == 0 || i == points - 1 {
            0.5 * h
        } else {
            h
        };
        closed += w * quadrature_overlap(2.5, 0.0, 0.0, chi).norm_sqr();
        oracle += w * oracle_overlap(Complex64::new(2.5, 0.0), 0.0, chi, 80)
            .unwrap()
            .norm_sqr();
    }
    assert!((closed - 1.0).abs() < 1e-8, "{closed}");
    assert!((oracle - 1.0).abs() < 1e-8, "{oracle}");
}

/// Zeros of Δ on [0, π/2] found by bisection on sign changes.
fn delta_roots(cfg: &InteractionConfig) -> Vec<f64> {
    let f = |phi: f64| phase_filter(phi, cfg);
    // odd bin count keeps π/4 off the bin edges
    let n = 999;
    let mut roots = vec![0.0];
    for i in 0..n {
        let (mut lo, mut hi) = (
            FRAC_PI_2 * i as f64 / n as f64 + 1e-9,
            FRAC_PI_2 * (i + 1) as f64 / n as f64,
        );
        if i == n - 1 {
            hi -= 1e-9;
        }
        if f(lo).signum() == f(hi).signum() {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(lo).signum() == f(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.push(FRAC_PI_2);
    roots
}

#[test]
fn dual_position_zeros_follow_phase_roots() {
    let cfg = InteractionConfig::default();
    let roots = delta_roots(&cfg);
    assert_eq!(roots.len(), 3);
    assert!((roots[1] - FRAC_PI_4).abs() < 1e-12);
    let spec = WavepacketSpec::flat_top(PI);
    let grid = spec.default_grid(14, 4.0).unwrap();
    let wp = build_wavepacket(&spec, &grid).unwrap();
    let table = position_distribution(&wp, &cfg).unwrap();
    let p_a = table.column(Column::PA).unwrap();
    let scale = p_a.iter().cloned().fold(0.0, f64::max);
    for r in roots {
        let i = grid.nearest_index(r).unwrap();
        assert!(p_a[i] < 1e-20 * scale.max(1.0), "phi = {r}: {}", p_a[i]);
    }
}

#[test]
fn field_only_position_is_state_blind() {
    let spec = WavepacketSpec::flat_top(PI);
    let grid = spec.default_grid(12, 4.0).unwrap();
    let wp = build_wavepacket(&spec, &grid).unwrap();
    let cfg = InteractionConfig::default()
        .with_ramsey(false)
        .with_chi0(1.1);
    let t = position_distribution(&wp, &cfg).unwrap();
    assert!(t.column(Column::PA).is_none());
    let (a, b) = (
        t.column(Column::PiA).unwrap(),
        t.column(Column::PiB).unwrap(),
    );
    assert!(a
        .iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= 1e-15 * x.max(1e-300)));
}

#[test]
fn both_branches_occur_for_flat_top() {
    let spec = WavepacketSpec::flat_top(PI);
    let grid = spec.default_grid(12, 4.0).unwrap();
    let wp = build_wavepacket(&spec, &grid).unwrap();
    let cfg = InteractionConfig::default();
    for s in InternalState::BOTH {
        assert!(branch_probability(&wp, &cfg, s).unwrap() > 0.0);
    }
}

#[test]
fn impulse_at_midway() {
    let cfg = InteractionConfig::default();
    let p = transferred_momentum(FRAC_PI_4, &cfg, InternalState::A);
    assert!(close(p, PI * 6.25, 1e-14));
    assert!((p - 19.6).abs() < 0.05);
    assert!(close(
        transferred_momentum(FRAC_PI_4, &cfg, InternalState::B),
        -PI * 6.25,
        1e-14
    ));
}

#[test]
fn midway_gaussian_spread() {
    let cfg = InteractionConfig::default();
    let sigma = 0.1 * PI;
    let expected = PI * 6.25 / 2f64.sqrt() * (1.0 - (-4.0 * sigma * sigma).exp());
    assert!((expected - 4.53).abs() < 0.005);
    assert!(close(dpt_closed(FRAC_PI_4, sigma, &cfg), expected, 1e-12));
    let (x, p, h) = gaussian_density(FRAC_PI_4, sigma, 8193);
    let numeric = dpt_numeric(SampledDensity::new(&x, &p, h), &cfg).unwrap();
    assert!(close(numeric, expected, 1e-10));
}

#[test]
fn small_sigma_limit() {
    let cfg = InteractionConfig::default();
    assert_eq!(
        dpt_small_sigma(FRAC_PI_4, 0.05, &cfg),
        dpt_small_sigma(FRAC_PI_4, 0.05, &cfg).abs()
    );
    assert!(dpt_small_sigma(FRAC_PI_4, 0.05, &cfg).abs() < 1e-12);
    let (closed, approx) = (
        dpt_closed(0.0, 0.01, &cfg),
        dpt_small_sigma(0.0, 0.01, &cfg),
    );
    assert!((approx - closed).abs() / closed < 1e-3);
}

#[test]
fn dual_mechanical_spread_exceeds_field_only() {
    let spec = WavepacketSpec::gaussian(FRAC_PI_4, 0.1 * PI);
    let grid = spec.default_grid(13, 4.0).unwrap();
    let wp = build_wavepacket(&spec, &grid).unwrap();
    let cfg = InteractionConfig::default();
    let report = popper_report(
        &[
            ("dual".into(), cfg.with_ramsey(true)),
            ("field".into(), cfg.with_ramsey(false)),
        ],
        &wp,
    )
    .unwrap();
    let dual = report.configurations[0].mechanical_superposed.unwrap();
    let field = report.configurations[1].mechanical_definite;
    assert!(dual > field);
    // with the field-only record at χ₀ = 0 the localized density stays close to the prior Gaussian
    let (x, p, h) = gaussian_density(FRAC_PI_4, 0.1 * PI, 8193);
    let prior = dpt_numeric(SampledDensity::new(&x, &p, h), &cfg).unwrap();
    assert!((prior - 4.53).abs() < 0.005);
    assert!(field > 0.0);
}

#[test]
fn outcome_mass_and_antinode() {
    let spec = WavepacketSpec::flat_top(PI);
    let grid = spec.default_grid(12, 4.0).unwrap();
    let wp = build_wavepacket(&spec, &grid).unwrap();
    let cfg = InteractionConfig::default();
    let d = outcome_density(&wp, &cfg, ChiGrid::default_for(2.5)).unwrap();
    assert!((d.total_mass() - 1.0).abs() < 1e-8);

    let spike = WavepacketSpec::spike(FRAC_PI_2);
    let grid = atomloc::grid::Grid::centered(6, FRAC_PI_2, 1.0).unwrap();
    let wp = build_wavepacket(&spike, &grid).unwrap();
    let d = outcome_density(&wp, &cfg, ChiGrid::default_for(2.5)).unwrap();
    let m = d.marginal();
    let mean: f64 = (0..m.len()).map(|i| d.grid.chi(i) * m[i]).sum::<f64>() * d.grid.step();
    assert!((mean + 5.0).abs() < 1e-6, "{mean}");
}
