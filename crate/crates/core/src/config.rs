//! Scenario configuration shared by the channel generator and the harness.
//!
//! The JSON form is a flat object whose keys mirror the struct fields; every
//! key is optional and falls back to the default below.

use serde::{Deserialize, Serialize};

use crate::beamformer::{Method, TargetSinrs};
use crate::channel::{AngularSpread, ErrorSampler, UlaGeometry};
use crate::error::{Error, Result};
use crate::metrics::{EveAggregate, EveAverage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// Scaled DFT columns with prescribed norms; fresh errors per trial.
    Synthetic,
    /// Angular-spread channels projected onto assigned DFT beams; fresh channels per trial.
    Physical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_antennas: usize,
    pub n_users: usize,
    pub gamma_db: f64,
    pub gamma_e_db: f64,
    /// Normalized error radius `ε/‖h̃‖` for the users.
    pub g: f64,
    /// Override for Eve's normalized radius; defaults to `g`.
    pub g_eve: Option<f64>,
    pub sigma2: f64,
    /// Eve's noise variance; defaults to `sigma2`.
    pub eve_sigma2: Option<f64>,
    /// `‖h̃‖²` for synthetic estimates; defaults to `n_antennas`.
    pub channel_norm_sq: Option<f64>,
    pub channel_mode: ChannelMode,
    pub spacing_over_wavelength: f64,
    /// Physical mode: K user spreads followed by Eve's. Random when absent.
    pub spreads: Option<Vec<AngularSpread>>,
    /// Width of randomly placed spreads in physical mode (degrees).
    pub spread_width_deg: f64,
    pub beams_per_user: usize,
    pub n_quadrature: usize,
    pub n_trials: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub an_fraction: f64,
    pub error_sampler: ErrorSampler,
    pub eve_aggregate: EveAggregate,
    pub eve_average: EveAverage,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_antennas: 128,
            n_users: 30,
            gamma_db: 10.0,
            gamma_e_db: 0.0,
            g: 0.5,
            g_eve: None,
            sigma2: 1.0,
            eve_sigma2: None,
            channel_norm_sq: None,
            channel_mode: ChannelMode::Synthetic,
            spacing_over_wavelength: 0.5,
            spreads: None,
            spread_width_deg: 2.0,
            beams_per_user: 2,
            n_quadrature: 64,
            n_trials: 10_000,
            base_seed: 1,
            methods: vec![Method::Robust, Method::NonRobust, Method::AnSplit],
            an_fraction: 0.3,
            error_sampler: ErrorSampler::UniformBall,
            eve_aggregate: EveAggregate::Mean,
            eve_average: EveAverage::DbOfMean,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(Error::invalid("n_users", "must be at least 1"));
        }
        if self.n_users + 1 > self.n_antennas {
            return Err(Error::invalid(
                "n_users",
                format!(
                    "K + 1 = {} exceeds n_antennas = {}",
                    self.n_users + 1,
                    self.n_antennas
                ),
            ));
        }
        check_unit_interval("g", self.g)?;
        if let Some(ge) = self.g_eve {
            check_unit_interval("g_eve", ge)?;
        }
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        check_positive("sigma2", self.sigma2)?;
        if let Some(s) = self.eve_sigma2 {
            check_positive("eve_sigma2", s)?;
        }
        if let Some(n) = self.channel_norm_sq {
            check_positive("channel_norm_sq", n)?;
        }
        if !(self.gamma_db.is_finite() && self.gamma_e_db.is_finite()) {
            return Err(Error::invalid("gamma_db", "SINR targets must be finite"));
        }
        if self.gamma_e_db >= self.gamma_db {
            return Err(Error::invalid(
                "gamma_e_db",
                "Eve's SINR cap must be below the user target",
            ));
        }
        if !(0.0..1.0).contains(&self.an_fraction) {
            return Err(Error::invalid("an_fraction", "must lie in [0, 1)"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "at least one method is required"));
        }
        UlaGeometry::new(self.n_antennas, self.spacing_over_wavelength)?;
        if self.channel_mode == ChannelMode::Physical {
            if self.beams_per_user == 0 {
                return Err(Error::invalid("beams_per_user", "must be at least 1"));
            }
            if (self.n_users + 1) * self.beams_per_user > self.n_antennas {
                return Err(Error::invalid(
                    "beams_per_user",
                    "not enough DFT beams for every receiver",
                ));
            }
            if self.n_quadrature < 8 {
                return Err(Error::invalid("n_quadrature", "must be at least 8"));
            }
            if let Some(spreads) = &self.spreads {
                if spreads.len() != self.n_users + 1 {
                    return Err(Error::invalid(
                        "spreads",
                        format!("expected {} entries (users then Eve)", self.n_users + 1),
                    ));
                }
            }
            if !(self.spread_width_deg >= 0.0 && self.spread_width_deg < 90.0) {
                return Err(Error::invalid("spread_width_deg", "must lie in [0, 90)"));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<UlaGeometry> {
        UlaGeometry::new(self.n_antennas, self.spacing_over_wavelength)
    }

    pub fn gamma(&self) -> f64 {
        db_to_linear(self.gamma_db)
    }

    pub fn gamma_e(&self) -> f64 {
        db_to_linear(self.gamma_e_db)
    }

    pub fn g_eve(&self) -> f64 {
        self.g_eve.unwrap_or(self.g)
    }

    pub fn eve_sigma2(&self) -> f64 {
        self.eve_sigma2.unwrap_or(self.sigma2)
    }

    pub fn channel_norm_sq(&self) -> f64 {
        self.channel_norm_sq.unwrap_or(self.n_antennas as f64)
    }

    pub fn targets(&self) -> Result<TargetSinrs> {
        TargetSinrs::uniform(self.n_users, self.gamma(), self.gamma_e())
    }
}

fn check_unit_interval(field: &str, v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{v} is outside [0, 1)")))
    }
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{v} must be positive and finite")))
    }
}
