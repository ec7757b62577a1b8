//! Realized SINRs, secrecy rates and their Monte Carlo summaries.

use serde::{Deserialize, Serialize};

use crate::beamformer::BeamformingSolution;
use crate::channel::{sample_error, ChannelSet, ErrorSampler, Receiver};
use crate::config::linear_to_db;
use crate::linalg::ComplexVector;
use crate::rng::{mix_seed, rng_from_seed, stream};

/// dB value reported for an exactly zero SINR.
pub const SINR_FLOOR_DB: f64 = -300.0;

/// How a trial's K per-target Eve SINRs collapse to one number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveAggregate {
    #[default]
    Mean,
    Max,
}

/// How per-trial Eve SINRs are averaged across trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveAverage {
    /// dB of the mean linear value.
    #[default]
    DbOfMean,
    /// Mean of per-trial dB values.
    MeanOfDb,
}

pub fn to_db(linear: f64) -> f64 {
    if linear > 0.0 {
        linear_to_db(linear).max(SINR_FLOOR_DB)
    } else {
        SINR_FLOOR_DB
    }
}

/// Received power `|hᴴ x|²` of every beam at channel `h`, users first then AN.
fn beam_gains(h: &ComplexVector, sol: &BeamformingSolution) -> (Vec<f64>, f64) {
    let info = (0..sol.n_users())
        .map(|i| sol.info_powers()[i] * sol.info_directions()[i].dot(h).norm_sqr())
        .collect();
    let an = match sol.an_direction() {
        Some(u) if sol.an_power() > 0.0 => sol.an_power() * u.dot(h).norm_sqr(),
        _ => 0.0,
    };
    (info, an)
}

/// `|hᴴsₖ|² / (Σ_{i≠k} |hᴴsᵢ|² + |hᴴwₑ|² + σ²)` at channel `h`.
pub fn sinr_quotient(h: &ComplexVector, sol: &BeamformingSolution, target: usize, noise_var: f64) -> f64 {
    let (info, an) = beam_gains(h, sol);
    quotient(&info, an, target, noise_var)
}

fn quotient(info: &[f64], an: f64, target: usize, noise_var: f64) -> f64 {
    let interference: f64 = info
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, g)| g)
        .sum();
    info[target] / (interference + an + noise_var)
}

/// SINR of every user at its own channel, and Eve's SINR for every target.
pub fn instantaneous_sinrs(
    users: &[ComplexVector],
    eve: &ComplexVector,
    sol: &BeamformingSolution,
    noise_vars: &[f64],
    eve_noise_var: f64,
) -> (Vec<f64>, Vec<f64>) {
    let user = users
        .iter()
        .enumerate()
        .map(|(k, h)| sinr_quotient(h, sol, k, noise_vars[k]))
        .collect();
    let (info, an) = beam_gains(eve, sol);
    let eve_sinrs = (0..sol.n_users())
        .map(|k| quotient(&info, an, k, eve_noise_var))
        .collect();
    (user, eve_sinrs)
}

pub fn secret_rate_unclamped(user_sinr: f64, eve_sinr: f64) -> f64 {
    (1.0 + user_sinr).log2() - (1.0 + eve_sinr).log2()
}

pub fn secret_rate(user_sinr: f64, eve_sinr: f64) -> f64 {
    secret_rate_unclamped(user_sinr, eve_sinr).max(0.0)
}

/// Sum by recursive halving; the result depends only on the slice contents.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// True channels of one trial, users then Eve.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub users: Vec<ComplexVector>,
    pub eve: ComplexVector,
}

/// The stored true channels when the set carries them, otherwise fresh
/// draws inside each error ball. Every receiver uses its own derived stream.
pub fn sample_realization(channels: &ChannelSet, rng_seed: u64, sampler: ErrorSampler) -> Realization {
    if let Some(t) = channels.true_channels() {
        let k = channels.n_users();
        return Realization {
            users: t[..k].to_vec(),
            eve: t[k].clone(),
        };
    }
    let draw = |r: Receiver, idx: u64| {
        let h = channels.estimate(r);
        let mut rng = rng_from_seed(mix_seed(rng_seed, stream::RECEIVER, idx));
        h.add(&sample_error(h.dim(), channels.error_radius(r), sampler, &mut rng))
    };
    let k = channels.n_users();
    Realization {
        users: (0..k).map(|i| draw(Receiver::User(i), i as u64)).collect(),
        eve: draw(Receiver::Eve, k as u64),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialMetrics {
    pub user_sinrs: Vec<f64>,
    pub eve_sinrs_per_target: Vec<f64>,
    pub secret_rates: Vec<f64>,
    pub secret_rates_unclamped: Vec<f64>,
    pub secret_sum_rate: f64,
    pub total_power: f64,
    /// Eve's SINR aggregated over targets, linear.
    pub eve_sinr: f64,
    pub eve_sinr_db_avg: f64,
}

pub fn evaluate(
    realization: &Realization,
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    aggregate: EveAggregate,
) -> TrialMetrics {
    let (user_sinrs, eve_sinrs) = instantaneous_sinrs(
        &realization.users,
        &realization.eve,
        sol,
        channels.noise_vars(),
        channels.eve_noise_var(),
    );
    let unclamped: Vec<f64> = user_sinrs
        .iter()
        .zip(&eve_sinrs)
        .map(|(&u, &e)| secret_rate_unclamped(u, e))
        .collect();
    let rates: Vec<f64> = unclamped.iter().map(|r| r.max(0.0)).collect();
    let eve_sinr = match aggregate {
        EveAggregate::Mean => pairwise_sum(&eve_sinrs) / eve_sinrs.len() as f64,
        EveAggregate::Max => eve_sinrs.iter().copied().fold(0.0, f64::max),
    };
    TrialMetrics {
        secret_sum_rate: pairwise_sum(&rates),
        total_power: sol.total_power(),
        eve_sinr_db_avg: to_db(eve_sinr),
        eve_sinr,
        user_sinrs,
        eve_sinrs_per_target: eve_sinrs,
        secret_rates: rates,
        secret_rates_unclamped: unclamped,
    }
}

/// Samples one realization from `rng_seed` and evaluates `sol` on it.
pub fn trial_metrics(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    rng_seed: u64,
    sampler: ErrorSampler,
    aggregate: EveAggregate,
) -> TrialMetrics {
    let r = sample_realization(channels, rng_seed, sampler);
    evaluate(&r, channels, sol, aggregate)
}

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

pub fn mean_se(values: &[f64]) -> MeanSe {
    let n = values.len();
    assert!(n > 0, "empty sample");
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return MeanSe { mean, se: 0.0 };
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    MeanSe {
        mean,
        se: (var / n as f64).sqrt(),
    }
}

/// Average of per-trial Eve SINRs (linear input) in dB.
pub fn eve_sinr_summary(linear: &[f64], average: EveAverage) -> MeanSe {
    match average {
        EveAverage::DbOfMean => {
            let m = mean_se(linear);
            // delta method: d(10 log10 x) = 10/(x ln 10) dx
            let se = if m.mean > 0.0 {
                10.0 / std::f64::consts::LN_10 * m.se / m.mean
            } else {
                0.0
            };
            MeanSe {
                mean: to_db(m.mean),
                se,
            }
        }
        EveAverage::MeanOfDb => {
            let db: Vec<f64> = linear.iter().map(|&x| to_db(x)).collect();
            mean_se(&db)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamformer::{covariance_views, solve_an_split, solve_non_robust, solve_robust};
    use crate::channel::make_channel_set;
    use crate::config::ScenarioConfig;
    use crate::linalg::C64;

    fn setup(n: usize, k: usize, g: f64) -> (ChannelSet, crate::beamformer::TargetSinrs) {
        let cfg = ScenarioConfig {
            n_antennas: n,
            n_users: k,
            g,
            ..Default::default()
        };
        (make_channel_set(&cfg).unwrap(), cfg.targets().unwrap())
    }

    fn nominal(ch: &ChannelSet) -> Realization {
        Realization {
            users: ch.estimates().to_vec(),
            eve: ch.eve_estimate().clone(),
        }
    }

    #[test]
    fn nominal_channels_robust() {
        let (ch, t) = setup(32, 4, 0.5);
        let sol = solve_robust(&ch, &t).unwrap();
        let m = evaluate(&nominal(&ch), &ch, &sol, EveAggregate::Mean);
        for k in 0..4 {
            let expected = sol.info_powers()[k] * ch.estimates()[k].norm_sqr() / ch.noise_vars()[k];
            assert!((m.user_sinrs[k] - expected).abs() < 1e-12 * expected);
        }
        assert!(m.eve_sinrs_per_target.iter().all(|&e| e < 1e-28));
    }

    #[test]
    fn nominal_channels_non_robust_hit_target() {
        let (ch, t) = setup(32, 4, 0.5);
        let sol = solve_non_robust(&ch, &t).unwrap();
        let m = evaluate(&nominal(&ch), &ch, &sol, EveAggregate::Mean);
        for &s in &m.user_sinrs {
            assert!((s - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_elementwise_recomputation() {
        let (ch, t) = setup(6, 2, 0.5);
        let sol = solve_an_split(&ch, &t, 0.3).unwrap();
        let r = sample_realization(&ch, 99, ErrorSampler::UniformBall);
        let m = evaluate(&r, &ch, &sol, EveAggregate::Mean);
        // plain loops over entries, no shared helpers
        let inner = |h: &ComplexVector, x: &ComplexVector| -> f64 {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..h.dim() {
                acc += h.get(n).conj() * x.get(n);
            }
            acc.norm_sqr()
        };
        let w = sol.an_beam().unwrap();
        for k in 0..2 {
            let s: Vec<ComplexVector> = (0..2).map(|i| sol.info_beam(i)).collect();
            let user = inner(&r.users[k], &s[k])
                / (inner(&r.users[k], &s[1 - k]) + inner(&r.users[k], &w) + ch.noise_vars()[k]);
            let eve = inner(&r.eve, &s[k])
                / (inner(&r.eve, &s[1 - k]) + inner(&r.eve, &w) + ch.eve_noise_var());
            assert!((m.user_sinrs[k] - user).abs() <= 1e-12 * user);
            assert!((m.eve_sinrs_per_target[k] - eve).abs() <= 1e-12 * eve.max(1e-300));
        }
        let (we, s) = covariance_views(&sol);
        let trace = we.trace() + s.iter().map(|x| x.trace()).sum::<f64>();
        assert!((m.total_power - trace).abs() < 1e-12);
    }

    #[test]
    fn secret_rate_values() {
        assert!((secret_rate(10.0, 0.0) - 11f64.log2()).abs() < 1e-15);
        assert!((secret_rate(10.0, 0.0) - 3.4594).abs() < 1e-4);
        assert_eq!(secret_rate(3.0, 3.0), 0.0);
        assert_eq!(secret_rate(1.0, 2.0), 0.0);
        assert!(secret_rate_unclamped(1.0, 2.0) < 0.0);
    }

    #[test]
    fn zero_error_sum_rate() {
        let (ch, t) = setup(16, 3, 0.0);
        let sol = solve_robust(&ch, &t).unwrap();
        let m = trial_metrics(&ch, &sol, 5, ErrorSampler::UniformBall, EveAggregate::Mean);
        let expected = 3.0 * 11f64.log2();
        assert!((m.secret_sum_rate - expected).abs() < 1e-12);
    }

    #[test]
    fn trials_are_deterministic() {
        let (ch, t) = setup(16, 3, 0.4);
        let sol = solve_robust(&ch, &t).unwrap();
        let a = trial_metrics(&ch, &sol, 17, ErrorSampler::UniformBall, EveAggregate::Mean);
        let b = trial_metrics(&ch, &sol, 17, ErrorSampler::UniformBall, EveAggregate::Mean);
        assert_eq!(a, b);
        let sum: f64 = a.secret_rates.iter().sum();
        assert!((a.secret_sum_rate - sum).abs() < 1e-12);
    }

    #[test]
    fn eve_aggregates() {
        let (ch, t) = setup(16, 3, 0.6);
        let sol = solve_robust(&ch, &t).unwrap();
        let r = sample_realization(&ch, 3, ErrorSampler::UniformBall);
        let mean = evaluate(&r, &ch, &sol, EveAggregate::Mean);
        let max = evaluate(&r, &ch, &sol, EveAggregate::Max);
        assert!(max.eve_sinr >= mean.eve_sinr);
        let m: f64 = mean.eve_sinrs_per_target.iter().sum::<f64>() / 3.0;
        assert!((mean.eve_sinr - m).abs() < 1e-15);
    }

    #[test]
    fn summaries() {
        let m = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let e = eve_sinr_summary(&[0.1, 0.1], EveAverage::DbOfMean);
        assert!((e.mean + 10.0).abs() < 1e-12);
        let e = eve_sinr_summary(&[0.1, 0.01], EveAverage::MeanOfDb);
        assert!((e.mean + 15.0).abs() < 1e-12);
        assert_eq!(to_db(0.0), SINR_FLOOR_DB);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-10);
    }
}
