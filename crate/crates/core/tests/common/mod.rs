#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use secbeam::beamformer::{solve_an_split, solve_non_robust, solve_robust, BeamformingSolution, Method, TargetSinrs};
use secbeam::channel::ChannelSet;
use secbeam::config::{ChannelMode, ScenarioConfig};
use secbeam::linalg::{orthonormalize, ComplexVector, C64};
use secbeam::rng::SimRng;

pub fn gaussian_vector(n: usize, rng: &mut SimRng) -> ComplexVector {
    ComplexVector::from_fn(n, |_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn unit_vector(n: usize, rng: &mut SimRng) -> ComplexVector {
    gaussian_vector(n, rng).normalized().unwrap()
}

/// Random valid scenario config: synthetic most of the time, physical otherwise.
pub fn random_config(rng: &mut SimRng, max_n: usize) -> ScenarioConfig {
    let n = rng.random_range(4..=max_n);
    let k = rng.random_range(1..=(n - 1).min(10));
    let gamma_db = rng.random_range(0.0..20.0);
    let physical = rng.random_bool(0.2);
    ScenarioConfig {
        n_antennas: n,
        n_users: k,
        gamma_db,
        gamma_e_db: gamma_db - rng.random_range(1.0..15.0),
        g: rng.random_range(0.01..0.9),
        g_eve: Some(rng.random_range(0.01..0.9)),
        sigma2: rng.random_range(0.1..4.0),
        eve_sigma2: Some(rng.random_range(0.1..4.0)),
        channel_norm_sq: Some(rng.random_range(1.0..400.0)),
        channel_mode: if physical { ChannelMode::Physical } else { ChannelMode::Synthetic },
        // one beam per receiver keeps small physical arrays valid
        beams_per_user: if physical { 1 } else { 2 },
        base_seed: rng.random(),
        n_trials: 1,
        ..Default::default()
    }
}

/// Random config together with its channel set. Physical draws whose BDMA
/// residual reaches the estimate norm are redrawn.
pub fn random_scenario(rng: &mut SimRng, max_n: usize) -> (ScenarioConfig, ChannelSet) {
    loop {
        let cfg = random_config(rng, max_n);
        match secbeam::channel::make_channel_set(&cfg) {
            Ok(ch) => return (cfg, ch),
            Err(secbeam::Error::InfeasibleGeometry { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

/// Small channel set with orthogonal random estimates.
pub fn random_small_set(n: usize, k: usize, rng: &mut SimRng, allow_zero_radius: bool) -> ChannelSet {
    let raw: Vec<ComplexVector> = (0..=k).map(|_| gaussian_vector(n, rng)).collect();
    let basis = orthonormalize(&raw, 1e-8);
    assert_eq!(basis.len(), k + 1);
    let radius = |norm: f64, rng: &mut SimRng| {
        if allow_zero_radius && rng.random_bool(0.05) {
            0.0
        } else {
            norm * rng.random_range(0.01..0.9)
        }
    };
    let mut estimates = Vec::new();
    let mut radii = Vec::new();
    for u in &basis[..k] {
        let norm = rng.random_range(1.0..5.0);
        estimates.push(u.scale(norm));
        radii.push(radius(norm, rng));
    }
    let en = rng.random_range(1.0..5.0);
    let eve = basis[k].scale(en);
    let eve_radius = radius(en, rng);
    let noise = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
    ChannelSet::new(estimates, eve, radii, eve_radius, noise, rng.random_range(0.5..2.0)).unwrap()
}

pub fn random_targets(k: usize, rng: &mut SimRng) -> TargetSinrs {
    let gamma: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..20.0)).collect();
    let gamma_e = gamma.iter().map(|g| g * rng.random_range(0.005..0.5)).collect();
    TargetSinrs::new(gamma, gamma_e).unwrap()
}

/// Arbitrary beams with powers around the single-user requirement, so that
/// both verdicts occur.
pub fn random_beams(ch: &ChannelSet, t: &TargetSinrs, rng: &mut SimRng) -> BeamformingSolution {
    let n = ch.n_antennas();
    let k = ch.n_users();
    let dirs: Vec<ComplexVector> = (0..k)
        .map(|i| {
            // mostly along the estimate, with a random tilt
            let h = ch.estimates()[i].normalized().unwrap();
            h.add(&unit_vector(n, rng).scale(rng.random_range(0.0..0.6))).normalized().unwrap()
        })
        .collect();
    let powers = (0..k)
        .map(|i| {
            let gap = ch.estimates()[i].norm() - ch.error_radii()[i];
            rng.random_range(0.3..3.0) * t.gamma()[i] * ch.noise_vars()[i] / (gap * gap)
        })
        .collect();
    let (an, pe) = if rng.random_bool(0.5) {
        (Some(unit_vector(n, rng)), rng.random_range(0.0..2.0))
    } else {
        (None, 0.0)
    };
    BeamformingSolution::from_beams(Method::Robust, dirs, powers, an, pe).unwrap()
}

/// One of the closed-form solutions or random beams, cycling with `case`.
pub fn solution_for_case(case: usize, ch: &ChannelSet, t: &TargetSinrs, rng: &mut SimRng) -> BeamformingSolution {
    match case % 4 {
        0 => solve_robust(ch, t).unwrap(),
        1 => solve_non_robust(ch, t).unwrap(),
        2 => solve_an_split(ch, t, rng.random_range(0.05..0.6)).unwrap(),
        _ => random_beams(ch, t, rng),
    }
}
