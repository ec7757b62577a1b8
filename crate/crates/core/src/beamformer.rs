//! Closed-form robust beamformer and the two baselines it is compared with.
//!
//! The robust design sends each user a single beam along its channel estimate
//! and no artificial noise. Its power is `Pₖ = γₖσₖ²/(‖h̃ₖ‖ − εₖ)²`, the
//! smallest power that keeps the SINR at `γₖ` when the whole error budget
//! points against the beam.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, HermitianMatrix};

/// Directions must have unit norm within this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Robust,
    NonRobust,
    AnSplit,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Robust => "robust",
            Method::NonRobust => "non_robust",
            Method::AnSplit => "an_split",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robust" => Ok(Method::Robust),
            "non_robust" | "non-robust" => Ok(Method::NonRobust),
            "an_split" | "an-split" => Ok(Method::AnSplit),
            _ => Err(Error::invalid("method", format!("unknown method `{s}`"))),
        }
    }
}

/// Per-user SINR target and eavesdropper cap, both linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSinrs {
    gamma: Vec<f64>,
    gamma_e: Vec<f64>,
}

impl TargetSinrs {
    pub fn new(gamma: Vec<f64>, gamma_e: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || gamma.len() != gamma_e.len() {
            return Err(Error::invalid(
                "gamma_e",
                format!("{} user targets but {} Eve caps", gamma.len(), gamma_e.len()),
            ));
        }
        for (k, (&g, &ge)) in gamma.iter().zip(&gamma_e).enumerate() {
            if !(g > 0.0 && g.is_finite() && ge > 0.0 && ge.is_finite()) {
                return Err(Error::invalid("gamma", format!("user {k}: targets must be positive")));
            }
            if ge >= g {
                return Err(Error::invalid(
                    "gamma_e",
                    format!("user {k}: Eve cap {ge} must be below target {g}"),
                ));
            }
        }
        Ok(Self { gamma, gamma_e })
    }

    pub fn uniform(n_users: usize, gamma: f64, gamma_e: f64) -> Result<Self> {
        Self::new(vec![gamma; n_users], vec![gamma_e; n_users])
    }

    pub fn n_users(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn gamma_e(&self) -> &[f64] {
        &self.gamma_e
    }

    fn check(&self, channels: &ChannelSet) -> Result<()> {
        if self.n_users() != channels.n_users() {
            return Err(Error::DimensionMismatch {
                expected: channels.n_users(),
                got: self.n_users(),
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SolutionData {
    method: Method,
    info_directions: Vec<ComplexVector>,
    info_powers: Vec<f64>,
    #[serde(default)]
    an_direction: Option<ComplexVector>,
    #[serde(default)]
    an_power: f64,
    multipliers_s: Vec<Option<f64>>,
    multipliers_e: Vec<Option<f64>>,
    dual_xi: Vec<Option<f64>>,
    #[serde(default, skip_deserializing)]
    total_power: f64,
}

/// Unit beam directions with their powers, plus the Lagrange multipliers of
/// the closed-form solution where they exist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolutionData", into = "SolutionData")]
pub struct BeamformingSolution {
    method: Method,
    info_directions: Vec<ComplexVector>,
    info_powers: Vec<f64>,
    an_direction: Option<ComplexVector>,
    an_power: f64,
    multipliers_s: Vec<Option<f64>>,
    multipliers_e: Vec<Option<f64>>,
    dual_xi: Vec<Option<f64>>,
}

impl TryFrom<SolutionData> for BeamformingSolution {
    type Error = Error;

    fn try_from(d: SolutionData) -> Result<Self> {
        let sol = Self {
            method: d.method,
            info_directions: d.info_directions,
            info_powers: d.info_powers,
            an_direction: d.an_direction,
            an_power: d.an_power,
            multipliers_s: d.multipliers_s,
            multipliers_e: d.multipliers_e,
            dual_xi: d.dual_xi,
        };
        sol.validate()?;
        Ok(sol)
    }
}

impl From<BeamformingSolution> for SolutionData {
    fn from(s: BeamformingSolution) -> Self {
        let total_power = s.total_power();
        SolutionData {
            method: s.method,
            info_directions: s.info_directions,
            info_powers: s.info_powers,
            an_direction: s.an_direction,
            an_power: s.an_power,
            multipliers_s: s.multipliers_s,
            multipliers_e: s.multipliers_e,
            dual_xi: s.dual_xi,
            total_power,
        }
    }
}

fn check_unit(field: &str, v: &ComplexVector) -> Result<()> {
    let dev = (v.norm() - 1.0).abs();
    if dev > UNIT_NORM_TOL {
        return Err(Error::invalid(field, format!("direction norm deviates from 1 by {dev:.3e}")));
    }
    Ok(())
}

impl BeamformingSolution {
    /// Assembles a solution from explicit beams, with no multipliers attached.
    /// Used for externally supplied or hand-built beamformers.
    pub fn from_beams(
        method: Method,
        info_directions: Vec<ComplexVector>,
        info_powers: Vec<f64>,
        an_direction: Option<ComplexVector>,
        an_power: f64,
    ) -> Result<Self> {
        let k = info_directions.len();
        let sol = Self {
            method,
            info_directions,
            info_powers,
            an_direction,
            an_power,
            multipliers_s: vec![None; k],
            multipliers_e: vec![None; k],
            dual_xi: vec![None; k],
        };
        sol.validate()?;
        Ok(sol)
    }

    fn validate(&self) -> Result<()> {
        let k = self.info_directions.len();
        if k == 0 {
            return Err(Error::invalid("info_directions", "at least one user is required"));
        }
        for (name, len) in [
            ("info_powers", self.info_powers.len()),
            ("multipliers_s", self.multipliers_s.len()),
            ("multipliers_e", self.multipliers_e.len()),
            ("dual_xi", self.dual_xi.len()),
        ] {
            if len != k {
                return Err(Error::invalid(name, format!("expected {k} entries, got {len}")));
            }
        }
        let n = self.info_directions[0].dim();
        for u in self.info_directions.iter().chain(self.an_direction.iter()) {
            if u.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: u.dim(),
                });
            }
            check_unit("info_directions", u)?;
        }
        for &p in self.info_powers.iter().chain(std::iter::once(&self.an_power)) {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid("info_powers", format!("{p} is not a valid power")));
            }
        }
        if self.an_power > 0.0 && self.an_direction.is_none() {
            return Err(Error::invalid("an_direction", "positive AN power needs a direction"));
        }
        Ok(())
    }

    /// Same beams and multipliers with replaced info powers.
    pub fn with_info_powers(&self, powers: Vec<f64>) -> Result<Self> {
        let sol = Self {
            info_powers: powers,
            ..self.clone()
        };
        sol.validate()?;
        Ok(sol)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn n_users(&self) -> usize {
        self.info_directions.len()
    }

    pub fn n_antennas(&self) -> usize {
        self.info_directions[0].dim()
    }

    pub fn info_directions(&self) -> &[ComplexVector] {
        &self.info_directions
    }

    pub fn info_powers(&self) -> &[f64] {
        &self.info_powers
    }

    pub fn an_direction(&self) -> Option<&ComplexVector> {
        self.an_direction.as_ref()
    }

    pub fn an_power(&self) -> f64 {
        self.an_power
    }

    /// `μ_{s,k}`; absent when the user's error radius is zero or the method has none.
    pub fn multipliers_s(&self) -> &[Option<f64>] {
        &self.multipliers_s
    }

    /// `μ_{e,k}`; absent when Eve's error radius is zero or the method has none.
    pub fn multipliers_e(&self) -> &[Option<f64>] {
        &self.multipliers_e
    }

    pub fn dual_xi(&self) -> &[Option<f64>] {
        &self.dual_xi
    }

    pub fn total_power(&self) -> f64 {
        self.an_power + self.info_powers.iter().sum::<f64>()
    }

    /// `sₖ = √Pₖ · uₖ`
    pub fn info_beam(&self, k: usize) -> ComplexVector {
        self.info_directions[k].scale(self.info_powers[k].sqrt())
    }

    /// `wₑ = √Pₑ · u`, if any AN is sent.
    pub fn an_beam(&self) -> Option<ComplexVector> {
        self.an_direction
            .as_ref()
            .filter(|_| self.an_power > 0.0)
            .map(|u| u.scale(self.an_power.sqrt()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn unit_estimates(channels: &ChannelSet) -> Result<Vec<ComplexVector>> {
    channels
        .estimates()
        .iter()
        .enumerate()
        .map(|(k, h)| {
            h.normalized().ok_or_else(|| Error::InfeasibleGeometry {
                who: format!("user {k}"),
                radius: channels.error_radii()[k],
                norm: 0.0,
            })
        })
        .collect()
}

/// Closed-form robust solution.
pub fn solve_robust(channels: &ChannelSet, targets: &TargetSinrs) -> Result<BeamformingSolution> {
    targets.check(channels)?;
    let k = channels.n_users();
    let mut powers = Vec::with_capacity(k);
    let mut mu_s = Vec::with_capacity(k);
    let mut xi = Vec::with_capacity(k);
    for i in 0..k {
        let h = channels.estimates()[i].norm();
        let eps = channels.error_radii()[i];
        let sigma2 = channels.noise_vars()[i];
        let gamma = targets.gamma()[i];
        if eps >= h {
            return Err(Error::InfeasibleGeometry {
                who: format!("user {i}"),
                radius: eps,
                norm: h,
            });
        }
        let margin = h - eps;
        let p = gamma * sigma2 / (margin * margin);
        powers.push(p);
        mu_s.push((eps > 0.0).then(|| p * margin / (gamma * eps)));
        xi.push(Some(gamma / (margin * margin)));
    }
    let eps_e = channels.eve_error_radius();
    let mu_e = (eps_e > 0.0).then(|| channels.eve_noise_var() / (eps_e * eps_e));
    Ok(BeamformingSolution {
        method: Method::Robust,
        info_directions: unit_estimates(channels)?,
        info_powers: powers,
        an_direction: None,
        an_power: 0.0,
        multipliers_s: mu_s,
        multipliers_e: vec![mu_e; k],
        dual_xi: xi,
    })
}

/// Perfect-CSI design: the estimate is treated as the true channel.
pub fn solve_non_robust(channels: &ChannelSet, targets: &TargetSinrs) -> Result<BeamformingSolution> {
    targets.check(channels)?;
    let powers = channels
        .estimates()
        .iter()
        .zip(channels.noise_vars())
        .zip(targets.gamma())
        .map(|((h, &s2), &g)| g * s2 / h.norm_sqr())
        .collect();
    let k = channels.n_users();
    Ok(BeamformingSolution {
        method: Method::NonRobust,
        info_directions: unit_estimates(channels)?,
        info_powers: powers,
        an_direction: None,
        an_power: 0.0,
        multipliers_s: vec![None; k],
        multipliers_e: vec![None; k],
        dual_xi: vec![None; k],
    })
}

/// Robust powers with a fixed share `an_fraction` moved into an AN beam
/// along Eve's estimate; the total power is unchanged.
pub fn solve_an_split(
    channels: &ChannelSet,
    targets: &TargetSinrs,
    an_fraction: f64,
) -> Result<BeamformingSolution> {
    if !(0.0..1.0).contains(&an_fraction) {
        return Err(Error::invalid("an_fraction", format!("{an_fraction} is outside [0, 1)")));
    }
    let robust = solve_robust(channels, targets)?;
    if an_fraction == 0.0 {
        return Ok(BeamformingSolution {
            method: Method::AnSplit,
            ..robust
        });
    }
    let total_info: f64 = robust.info_powers.iter().sum();
    let k = robust.n_users();
    let an_direction = channels
        .eve_estimate()
        .normalized()
        .ok_or_else(|| Error::invalid("eve_estimate", "zero-norm estimate"))?;
    Ok(BeamformingSolution {
        method: Method::AnSplit,
        info_powers: robust.info_powers.iter().map(|p| (1.0 - an_fraction) * p).collect(),
        info_directions: robust.info_directions,
        an_direction: Some(an_direction),
        an_power: an_fraction * total_info,
        multipliers_s: vec![None; k],
        multipliers_e: vec![None; k],
        dual_xi: vec![None; k],
    })
}

pub fn solve(
    method: Method,
    channels: &ChannelSet,
    targets: &TargetSinrs,
    an_fraction: f64,
) -> Result<BeamformingSolution> {
    match method {
        Method::Robust => solve_robust(channels, targets),
        Method::NonRobust => solve_non_robust(channels, targets),
        Method::AnSplit => solve_an_split(channels, targets, an_fraction),
    }
}

/// `Wₑ = Pₑ uuᴴ` and `Sₖ = Pₖ uₖuₖᴴ`.
pub fn covariance_views(sol: &BeamformingSolution) -> (HermitianMatrix, Vec<HermitianMatrix>) {
    let n = sol.n_antennas();
    let we = match sol.an_beam() {
        Some(w) => HermitianMatrix::outer(&w),
        None => HermitianMatrix::zeros(n),
    };
    let s = (0..sol.n_users())
        .map(|k| HermitianMatrix::scaled_outer(sol.info_powers[k], &sol.info_directions[k]))
        .collect();
    (we, s)
}
