//! Built-in sweeps for the seven figure analogs, each with a trend
//! self-check and a structural check of the robust solution.
//!
//! | preset | axis | quantity |
//! |--------|------|----------|
//! | fig2   | g    | Eve SINR (dB) |
//! | fig3   | g    | secret sum-rate |
//! | fig4   | N    | secret sum-rate |
//! | fig5   | K    | secret sum-rate |
//! | fig6   | g    | total power |
//! | fig7   | N    | total power |
//! | fig8   | K    | total power |
//!
//! Power trends follow `Pₖ = γσ²/(‖h̃‖ − ε)²` with `‖h̃‖² = N`: total power
//! falls as `1/N` and grows linearly in `K`.

use std::fmt;
use std::str::FromStr;

use super::sweep::{run_sweep, SweepResult, SweepRow, SweepSpec, SweptParameter};
use crate::beamformer::{solve_robust, Method};
use crate::channel::make_channel_set;
use crate::config::{ChannelMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::verifier::{check_solution_rank_structure, kkt_residuals};

/// Largest relative optimality residual accepted by the structural check.
const KKT_TOL: f64 = 1e-9;
/// Relative slack for trends that hold exactly in closed form.
const EXACT_TOL: f64 = 1e-12;
/// Standard errors separating the robust and AN-split sum-rates.
const SE_MARGIN: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 7] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
        }
    }

    fn axis(self) -> SweptParameter {
        match self {
            Figure::Fig2 | Figure::Fig3 | Figure::Fig6 => SweptParameter::G,
            Figure::Fig4 | Figure::Fig7 => SweptParameter::N,
            Figure::Fig5 | Figure::Fig8 => SweptParameter::K,
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid("figure", format!("unknown preset `{s}` (expected fig2..fig8)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// N = 64, K = 8, 2000 trials.
    Desk,
    /// N = 128, K = 30, 10000 trials.
    Full,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(Error::invalid("scale", format!("unknown scale `{s}` (expected desk or full)"))),
        }
    }
}

impl Figure {
    /// The preset sweep. `trials` overrides the scale's default count.
    pub fn spec(self, scale: Scale, trials: Option<usize>, seed: u64) -> SweepSpec {
        let (n, k, default_trials) = match scale {
            Scale::Desk => (64, 8, 2000),
            Scale::Full => (128, 30, 10_000),
        };
        let values = match (self.axis(), scale) {
            (SweptParameter::G, _) => vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
            (SweptParameter::N, Scale::Desk) => vec![16.0, 32.0, 64.0, 128.0],
            (SweptParameter::N, Scale::Full) => vec![32.0, 64.0, 128.0, 256.0],
            (SweptParameter::K, Scale::Desk) => vec![2.0, 4.0, 8.0, 16.0],
            (SweptParameter::K, Scale::Full) => vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
        };
        SweepSpec {
            swept_parameter: self.axis(),
            values,
            fixed: ScenarioConfig {
                n_antennas: n,
                n_users: k,
                gamma_db: 10.0,
                gamma_e_db: 0.0,
                g: 0.5,
                channel_mode: ChannelMode::Synthetic,
                n_trials: trials.unwrap_or(default_trials),
                base_seed: seed,
                methods: vec![Method::Robust, Method::NonRobust, Method::AnSplit],
                ..Default::default()
            },
        }
    }

    /// Trend assertions on a finished sweep of this preset.
    pub fn trend_check(self, result: &SweepResult) -> Result<()> {
        let robust = result.series(Method::Robust);
        match self {
            Figure::Fig2 => {
                for row in &result.rows {
                    if !(row.mean_eve_sinr_db < 0.0) {
                        return fail(format!(
                            "{} Eve SINR {} dB at g = {} is not below 0 dB",
                            row.method, row.mean_eve_sinr_db, row.sweep_value
                        ));
                    }
                }
                for m in [Method::Robust, Method::NonRobust, Method::AnSplit] {
                    strictly(&result.series(m), |r| r.mean_eve_sinr_db, Order::Increasing, "Eve SINR")?;
                }
                // the robust design spends the most power on information beams
                for other in [Method::NonRobust, Method::AnSplit] {
                    for (r, o) in robust.iter().zip(result.series(other)) {
                        if !(r.mean_eve_sinr_db > o.mean_eve_sinr_db) {
                            return fail(format!("robust Eve SINR not above {other} at g = {}", r.sweep_value));
                        }
                    }
                }
            }
            Figure::Fig3 => {
                let an = result.series(Method::AnSplit);
                for (r, a) in robust.iter().zip(&an) {
                    let gap = r.mean_secret_sum_rate - a.mean_secret_sum_rate;
                    let se = r.se_secret_sum_rate.hypot(a.se_secret_sum_rate);
                    if !(gap > 0.0 && gap > SE_MARGIN * se) {
                        return fail(format!(
                            "robust sum-rate {} does not exceed AN-split {} by {SE_MARGIN} SE ({se}) at g = {}",
                            r.mean_secret_sum_rate, a.mean_secret_sum_rate, r.sweep_value
                        ));
                    }
                }
                strictly(
                    &result.series(Method::NonRobust),
                    |r| r.mean_secret_sum_rate,
                    Order::Decreasing,
                    "non-robust sum-rate",
                )?;
            }
            Figure::Fig4 | Figure::Fig5 => {
                strictly(&robust, |r| r.mean_secret_sum_rate, Order::Increasing, "robust sum-rate")?;
            }
            Figure::Fig6 => {
                strictly(&robust, |r| r.mean_total_power, Order::Increasing, "robust power")?;
                let flat = result.series(Method::NonRobust);
                if flat.iter().any(|r| r.mean_total_power != flat[0].mean_total_power) {
                    return fail("non-robust power varies with g".into());
                }
                for (r, a) in robust.iter().zip(result.series(Method::AnSplit)) {
                    if !close(r.mean_total_power, a.mean_total_power) {
                        return fail(format!("AN-split power differs from robust at g = {}", r.sweep_value));
                    }
                }
            }
            Figure::Fig7 => {
                strictly(&robust, |r| r.mean_total_power, Order::Decreasing, "robust power")?;
                proportional(&robust, |v| 1.0 / v, "1/N")?;
            }
            Figure::Fig8 => {
                strictly(&robust, |r| r.mean_total_power, Order::Increasing, "robust power")?;
                proportional(&robust, |v| v, "K")?;
            }
        }
        Ok(())
    }
}

fn fail(msg: String) -> Result<()> {
    Err(Error::SelfCheck(msg))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXACT_TOL * a.abs().max(b.abs())
}

#[derive(Clone, Copy, PartialEq)]
enum Order {
    Increasing,
    Decreasing,
}

fn strictly(rows: &[&SweepRow], f: impl Fn(&SweepRow) -> f64, order: Order, what: &str) -> Result<()> {
    for w in rows.windows(2) {
        let (a, b) = (f(w[0]), f(w[1]));
        let ok = match order {
            Order::Increasing => b > a,
            Order::Decreasing => b < a,
        };
        if !ok {
            let dir = if order == Order::Increasing { "increase" } else { "decrease" };
            return fail(format!(
                "{what} does not {dir} from {} ({a}) to {} ({b})",
                w[0].sweep_value, w[1].sweep_value
            ));
        }
    }
    Ok(())
}

/// Mean total power is `c · shape(sweep_value)` for one constant `c`.
fn proportional(rows: &[&SweepRow], shape: impl Fn(f64) -> f64, what: &str) -> Result<()> {
    let c0 = rows[0].mean_total_power / shape(rows[0].sweep_value);
    for r in rows {
        let c = r.mean_total_power / shape(r.sweep_value);
        if !close(c, c0) {
            return fail(format!("robust power is not proportional to {what} at {}", r.sweep_value));
        }
    }
    Ok(())
}

/// Rank structure and optimality residuals of the robust solution at every
/// sweep value (trial 0 channels).
pub fn verifier_self_check(spec: &SweepSpec) -> Result<()> {
    for &v in &spec.values {
        let cfg = spec.config_at(v)?;
        let channels = make_channel_set(&cfg)?;
        let targets = cfg.targets()?;
        let sol = solve_robust(&channels, &targets)?;
        let rank = check_solution_rank_structure(&channels, &sol, &targets)?;
        if let Some(c) = rank.failures().next() {
            return Err(Error::SelfCheck(format!(
                "rank check `{}` failed for {} at {v}: {}",
                c.name, c.subject, c.detail
            )));
        }
        let kkt = kkt_residuals(&channels, &sol, &targets)?;
        if !(kkt.max_relative() < KKT_TOL) {
            return Err(Error::SelfCheck(format!(
                "optimality residual {} exceeds {KKT_TOL} at {v}",
                kkt.max_relative()
            )));
        }
    }
    Ok(())
}

/// Structural check, sweep, then trend check.
pub fn run_preset(
    figure: Figure,
    scale: Scale,
    trials: Option<usize>,
    seed: u64,
    workers: Option<usize>,
) -> Result<SweepResult> {
    let spec = figure.spec(scale, trials, seed);
    verifier_self_check(&spec)?;
    let result = run_sweep(&spec, workers)?;
    figure.trend_check(&result)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert!("fig9".parse::<Figure>().is_err());
        assert_eq!("desk".parse::<Scale>().unwrap(), Scale::Desk);
        assert!("huge".parse::<Scale>().is_err());
    }

    #[test]
    fn presets_are_valid() {
        for f in Figure::ALL {
            for s in [Scale::Desk, Scale::Full] {
                let spec = f.spec(s, None, 1);
                spec.validate().unwrap();
                verifier_self_check(&spec).unwrap();
            }
        }
        assert_eq!(Figure::Fig6.spec(Scale::Desk, None, 1).fixed.n_trials, 2000);
        assert_eq!(Figure::Fig6.spec(Scale::Full, None, 1).fixed.n_trials, 10_000);
    }

    #[test]
    fn power_presets_pass_with_few_trials() {
        for f in [Figure::Fig6, Figure::Fig7, Figure::Fig8] {
            run_preset(f, Scale::Desk, Some(20), 1, Some(2)).unwrap();
        }
    }

    #[test]
    fn trend_check_catches_flat_power() {
        let mut r = run_sweep(&Figure::Fig6.spec(Scale::Desk, Some(5), 1), Some(1)).unwrap();
        for row in r.rows.iter_mut().filter(|r| r.method == Method::Robust) {
            row.mean_total_power = 1.0;
        }
        assert!(matches!(Figure::Fig6.trend_check(&r), Err(Error::SelfCheck(_))));
    }
}
