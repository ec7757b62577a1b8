mod common;

use proptest::prelude::*;
use rand::Rng;
use secbeam::beamformer::{covariance_views, solve_robust, BeamformingSolution};
use secbeam::channel::{sample_error, steering_vector, ChannelSet, ErrorSampler, UlaGeometry};
use secbeam::config::ScenarioConfig;
use secbeam::linalg::{generalized_schur, is_psd, pseudo_inverse, ComplexVector, HermitianMatrix, DEFAULT_RANK_TOL};
use secbeam::metrics::sinr_quotient;
use secbeam::rng::rng_from_seed;
use secbeam::verifier::{kkt_residuals, worst_case_eve_sinr, worst_case_user_sinr};

/// `Σ vᵢvᵢᴴ` over `rank` random vectors, scaled to unit spectral size.
fn random_psd(n: usize, rank: usize, rng: &mut secbeam::rng::SimRng) -> HermitianMatrix {
    let mut m = HermitianMatrix::zeros(n);
    for _ in 0..rank {
        let v = common::gaussian_vector(n, rng);
        m = m.add(&HermitianMatrix::scaled_outer(1.0 / n as f64, &v));
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1200))]

    /// Block PSD-ness and the generalized Schur conditions give the same verdict.
    #[test]
    fn schur_matches_block_psd(n in 2usize..=8, rank_frac in 0.0f64..1.0, seed in any::<u64>(),
                               in_range in any::<bool>(), offset in 0.01f64..2.0, positive in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let rank = ((n as f64 * rank_frac) as usize).min(n);
        let a = random_psd(n, rank, &mut rng);
        let b = if in_range && rank > 0 {
            a.mul_vec(&common::gaussian_vector(n, &mut rng))
        } else {
            common::gaussian_vector(n, &mut rng)
        };
        let pinv = pseudo_inverse(&a, DEFAULT_RANK_TOL).unwrap();
        let threshold = b.dot(&pinv.mul_vec(&b)).re;
        // keep the corner well away from the boundary
        let c = if positive { threshold + offset } else { threshold - offset };
        let block = HermitianMatrix::bordered(&a, &b, c);
        let direct = is_psd(&block, 1e-9).unwrap().feasible;
        let schur = is_psd(&a, 1e-9).unwrap().feasible
            && generalized_schur(&a, &b, c, DEFAULT_RANK_TOL).unwrap().feasible();
        prop_assert_eq!(direct, schur);
        let range_ok = b.sub(&a.mul_vec(&pinv.mul_vec(&b))).norm() <= 1e-9 * b.norm();
        prop_assert_eq!(direct, positive && range_ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn steering_vector_norm(n in 1usize..=256, d in 0.05f64..=0.5, theta in -1.5f64..1.5) {
        let geo = UlaGeometry::new(n, d).unwrap();
        let a = steering_vector(&geo, theta).unwrap();
        prop_assert!((a.norm() - (n as f64).sqrt()).abs() <= 1e-12 * (n as f64).sqrt());
    }

    #[test]
    fn errors_stay_in_ball(n in 1usize..=64, radius in 0.0f64..10.0, seed in any::<u64>(), sphere in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let sampler = if sphere { ErrorSampler::UniformSphere } else { ErrorSampler::UniformBall };
        let e = sample_error(n, radius, sampler, &mut rng);
        prop_assert!(e.norm() <= radius);
        if sphere {
            prop_assert!((e.norm() - radius).abs() <= 1e-12 * radius.max(1.0));
        }
    }

    /// More uncertainty or weaker channels never reduce the robust power.
    #[test]
    fn robust_power_monotone(g1 in 0.0f64..0.9, dg in 0.001f64..0.09, n in 2usize..=64,
                             gamma_db in -5.0f64..25.0, seed in any::<u64>()) {
        let cfg = |g: f64, norm_sq: Option<f64>| ScenarioConfig {
            n_antennas: n.max(2),
            n_users: 1,
            g,
            gamma_db,
            gamma_e_db: gamma_db - 1.0,
            channel_norm_sq: norm_sq,
            base_seed: seed,
            ..Default::default()
        };
        let power = |c: ScenarioConfig| {
            let ch = secbeam::channel::make_channel_set(&c).unwrap();
            solve_robust(&ch, &c.targets().unwrap()).unwrap().total_power()
        };
        prop_assert!(power(cfg(g1 + dg, None)) > power(cfg(g1, None)));
        prop_assert!(power(cfg(g1, Some(n as f64 * 2.0))) < power(cfg(g1, None)));
    }

    /// The closed form satisfies the optimality system and zeroes the Eve-side residual.
    #[test]
    fn closed_form_optimality(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (cfg, ch) = common::random_scenario(&mut rng, 48);
        let t = cfg.targets().unwrap();
        let sol = solve_robust(&ch, &t).unwrap();
        let rep = kkt_residuals(&ch, &sol, &t).unwrap();
        prop_assert!(rep.max_relative() < 1e-9);
        let s2e = ch.eve_noise_var();
        for r in rep.eve.iter().flatten() {
            prop_assert!(r.absolute <= 4.0 * f64::EPSILON * s2e, "{:?}", r);
        }
        prop_assert_eq!(sol.an_power(), 0.0);
    }

    /// Sampled channels never beat the worst-case oracles, and the witnesses lie in the balls.
    #[test]
    fn oracles_bound_samples(seed in any::<u64>(), case in 0usize..4) {
        let mut rng = rng_from_seed(seed);
        let n = rng.random_range(2..=6);
        let k = rng.random_range(1..=(n - 1).min(3));
        let ch: ChannelSet = common::random_small_set(n, k, &mut rng, false);
        let t = common::random_targets(k, &mut rng);
        let sol: BeamformingSolution = common::solution_for_case(case, &ch, &t, &mut rng);
        for i in 0..k {
            let wu = worst_case_user_sinr(&ch, &sol, i).unwrap();
            let we = worst_case_eve_sinr(&ch, &sol, i).unwrap();
            prop_assert!(wu.witness.norm() <= ch.error_radii()[i] * (1.0 + 1e-12));
            prop_assert!(we.witness.norm() <= ch.eve_error_radius() * (1.0 + 1e-12));
            for _ in 0..50 {
                let d = sample_error(n, ch.error_radii()[i], ErrorSampler::UniformBall, &mut rng);
                let s = sinr_quotient(&ch.estimates()[i].add(&d), &sol, i, ch.noise_vars()[i]);
                prop_assert!(s >= wu.sinr * (1.0 - 1e-9));
                let d = sample_error(n, ch.eve_error_radius(), ErrorSampler::UniformSphere, &mut rng);
                let s = sinr_quotient(&ch.eve_estimate().add(&d), &sol, i, ch.eve_noise_var());
                prop_assert!(s <= we.sinr * (1.0 + 1e-9) + 1e-300);
            }
        }
    }

    /// Channel sets and solutions survive a JSON round trip bit for bit.
    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (cfg, ch) = common::random_scenario(&mut rng, 24);
        let back = ChannelSet::from_json(&ch.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.estimates(), ch.estimates());
        prop_assert_eq!(back.error_radii(), ch.error_radii());
        let sol = solve_robust(&ch, &cfg.targets().unwrap()).unwrap();
        let again = BeamformingSolution::from_json(&sol.to_json().unwrap()).unwrap();
        prop_assert_eq!(again.info_powers(), sol.info_powers());
        prop_assert_eq!(again.multipliers_s(), sol.multipliers_s());
        let (we, s) = covariance_views(&again);
        prop_assert_eq!(we.trace(), 0.0);
        prop_assert_eq!(s.len(), ch.n_users());
    }
}

#[test]
fn pseudo_inverse_of_random_psd_satisfies_penrose() {
    let mut rng = rng_from_seed(9);
    for n in 2..=8 {
        for rank in 0..=n {
            let a = random_psd(n, rank, &mut rng);
            let p = pseudo_inverse(&a, DEFAULT_RANK_TOL).unwrap();
            assert!(secbeam::linalg::penrose_residual(&a, &p) < 1e-8, "n {n} rank {rank}");
        }
    }
}

#[test]
fn unit_vectors_are_unit() {
    let mut rng = rng_from_seed(3);
    let v: ComplexVector = common::unit_vector(5, &mut rng);
    assert!((v.norm() - 1.0).abs() < 1e-15);
}
