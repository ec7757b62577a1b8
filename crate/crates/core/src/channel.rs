//! Uniform linear array channels, BDMA estimates and the bounded error model.
//!
//! A [`ChannelSet`] holds K user estimates and one eavesdropper estimate, all
//! mutually orthogonal, together with the radius of the error ball around
//! each estimate and the receiver noise variances.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::{ChannelMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, C64};
use crate::rng::{mix_seed, rng_from_seed, stream, SimRng};

/// Largest normalized inner product accepted between distinct estimates.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
/// Relative slack on ball membership of stored true channels.
const BALL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    n_antennas: usize,
    spacing_over_wavelength: f64,
}

impl UlaGeometry {
    pub fn new(n_antennas: usize, spacing_over_wavelength: f64) -> Result<Self> {
        if n_antennas == 0 {
            return Err(Error::invalid("n_antennas", "must be at least 1"));
        }
        if !(spacing_over_wavelength > 0.0 && spacing_over_wavelength <= 0.5) {
            return Err(Error::invalid(
                "spacing_over_wavelength",
                format!("{spacing_over_wavelength} is outside (0, 0.5]"),
            ));
        }
        Ok(Self {
            n_antennas,
            spacing_over_wavelength,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn spacing_over_wavelength(&self) -> f64 {
        self.spacing_over_wavelength
    }

    /// `(d/λ)·sin θ`, in cycles per antenna.
    pub fn spatial_frequency(&self, theta: f64) -> f64 {
        self.spacing_over_wavelength * theta.sin()
    }

    /// Arrival angle whose steering vector is parallel to DFT column `m`, if one exists.
    pub fn dft_angle(&self, m: usize) -> Option<f64> {
        let s = dft_frequency(self.n_antennas, m) / self.spacing_over_wavelength;
        (s.abs() < 1.0).then(|| s.asin())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    Uniform,
    /// Gaussian density around the center, truncated to the spread; `std` in radians.
    TruncatedGaussian { std: f64 },
}

/// Angular support of the incoming rays for one receiver (radians).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularSpread {
    pub center: f64,
    pub width: f64,
    pub spectrum: Spectrum,
    /// Standard deviation (radians) of independent per-ray phase offsets.
    #[serde(default)]
    pub phase_jitter: f64,
}

impl AngularSpread {
    pub fn uniform(center: f64, width: f64) -> Result<Self> {
        let s = Self {
            center,
            width,
            spectrum: Spectrum::Uniform,
            phase_jitter: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width >= 0.0 && self.width.is_finite()) {
            return Err(Error::invalid("spread.width", "must be finite and non-negative"));
        }
        let lo = self.center - 0.5 * self.width;
        let hi = self.center + 0.5 * self.width;
        if !(lo > -FRAC_PI_2 && hi < FRAC_PI_2) {
            return Err(Error::invalid(
                "spread.center",
                format!("[{lo}, {hi}] is not inside (-π/2, π/2)"),
            ));
        }
        if let Spectrum::TruncatedGaussian { std } = self.spectrum {
            if !(std > 0.0 && std.is_finite()) {
                return Err(Error::invalid("spread.spectrum.std", "must be positive"));
            }
        }
        if !(self.phase_jitter >= 0.0 && self.phase_jitter.is_finite()) {
            return Err(Error::invalid("spread.phase_jitter", "must be non-negative"));
        }
        Ok(())
    }

    fn density(&self, theta: f64) -> f64 {
        match self.spectrum {
            Spectrum::Uniform => 1.0,
            Spectrum::TruncatedGaussian { std } => {
                let z = (theta - self.center) / std;
                (-0.5 * z * z).exp()
            }
        }
    }
}

/// Distribution of the estimation error inside its ball.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSampler {
    #[default]
    UniformBall,
    UniformSphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Receiver {
    User(usize),
    Eve,
}

impl std::fmt::Display for Receiver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Receiver::User(k) => write!(f, "user {k}"),
            Receiver::Eve => write!(f, "eve"),
        }
    }
}

/// Entry `n` is `exp(-j·2π·(d/λ)·n·sin θ)`.
pub fn steering_vector(geometry: &UlaGeometry, theta: f64) -> Result<ComplexVector> {
    if !(theta > -FRAC_PI_2 && theta < FRAC_PI_2) {
        return Err(Error::invalid("theta", format!("{theta} is outside (-π/2, π/2)")));
    }
    let f = geometry.spatial_frequency(theta);
    Ok(ComplexVector::from_fn(geometry.n_antennas, |n| {
        C64::from_polar(1.0, -2.0 * PI * f * n as f64)
    }))
}

/// Unit-norm DFT column `m`: entry `n` is `exp(-j·2π·n·m/N)/√N`.
pub fn dft_column(n_antennas: usize, m: usize) -> ComplexVector {
    assert!(m < n_antennas, "DFT index out of range");
    let scale = 1.0 / (n_antennas as f64).sqrt();
    ComplexVector::from_fn(n_antennas, |n| {
        // reduce n·m first so the phase stays accurate for large arrays
        let k = (n * m) % n_antennas;
        C64::from_polar(scale, -2.0 * PI * k as f64 / n_antennas as f64)
    })
}

/// Spatial frequency of DFT column `m`, wrapped to `[-1/2, 1/2)`.
pub fn dft_frequency(n_antennas: usize, m: usize) -> f64 {
    let f = m as f64 / n_antennas as f64;
    if f >= 0.5 {
        f - 1.0
    } else {
        f
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Midpoint-rule approximation of `∫ α(θ) a(θ) dθ` over the spread.
///
/// Weights are normalized to sum to one. All rays share a common phase drawn
/// from `rng_seed`, perturbed per ray by `phase_jitter · N(0, 1)`. A width-0
/// spread returns the phased steering vector of its center.
pub fn synthesize_channel(
    geometry: &UlaGeometry,
    spread: &AngularSpread,
    n_quadrature: usize,
    rng_seed: u64,
) -> Result<ComplexVector> {
    spread.validate()?;
    if n_quadrature < 8 {
        return Err(Error::invalid("n_quadrature", "must be at least 8"));
    }
    let mut rng = rng_from_seed(rng_seed);
    let common = C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
    if spread.width == 0.0 {
        return Ok(steering_vector(geometry, spread.center)?.scale_complex(common));
    }
    let step = spread.width / n_quadrature as f64;
    let start = spread.center - 0.5 * spread.width;
    let nodes: Vec<f64> = (0..n_quadrature)
        .map(|i| start + (i as f64 + 0.5) * step)
        .collect();
    let densities: Vec<f64> = nodes.iter().map(|&t| spread.density(t)).collect();
    let total: f64 = densities.iter().sum();

    let mut acc = ComplexVector::zeros(geometry.n_antennas);
    for (&theta, &d) in nodes.iter().zip(&densities) {
        let jitter = if spread.phase_jitter > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            C64::from_polar(1.0, spread.phase_jitter * z)
        } else {
            C64::new(1.0, 0.0)
        };
        acc = acc.axpy(common * jitter * (d / total), &steering_vector(geometry, theta)?);
    }
    Ok(acc)
}

/// Orthogonal projection of `channel` onto the span of the given DFT columns,
/// with the norm of the discarded part.
pub fn bdma_estimate(channel: &ComplexVector, assigned: &[usize]) -> Result<(ComplexVector, f64)> {
    if assigned.is_empty() {
        return Err(Error::invalid("assigned_dft_indices", "empty index set"));
    }
    let n = channel.dim();
    let mut seen = vec![false; n];
    for &m in assigned {
        if m >= n {
            return Err(Error::invalid(
                "assigned_dft_indices",
                format!("index {m} out of range for N = {n}"),
            ));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::invalid("assigned_dft_indices", format!("index {m} repeated")));
        }
    }
    let mut estimate = ComplexVector::zeros(n);
    for &m in assigned {
        let u = dft_column(n, m);
        estimate = estimate.axpy(u.dot(channel), &u);
    }
    let residual = channel.sub(&estimate).norm();
    Ok((estimate, residual))
}

/// Gives each receiver `beams_per_user` DFT indices.
///
/// Receivers are served in order of increasing center angle (ties by
/// position); each takes the free indices whose spatial frequency is nearest
/// its own, lower index first on ties.
pub fn assign_dft_beams(
    geometry: &UlaGeometry,
    centers: &[f64],
    beams_per_user: usize,
) -> Result<Vec<Vec<usize>>> {
    let n = geometry.n_antennas;
    if beams_per_user == 0 || centers.len() * beams_per_user > n {
        return Err(Error::invalid(
            "beams_per_user",
            format!("{} receivers × {beams_per_user} beams do not fit in N = {n}", centers.len()),
        ));
    }
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| centers[a].total_cmp(&centers[b]));

    let mut taken = vec![false; n];
    let mut out = vec![Vec::new(); centers.len()];
    for r in order {
        let f = geometry.spatial_frequency(centers[r]);
        let mut free: Vec<usize> = (0..n).filter(|&m| !taken[m]).collect();
        free.sort_by(|&a, &b| {
            circular_distance(dft_frequency(n, a), f)
                .total_cmp(&circular_distance(dft_frequency(n, b), f))
                .then(a.cmp(&b))
        });
        for &m in free.iter().take(beams_per_user) {
            taken[m] = true;
        }
        let mut mine: Vec<usize> = free.into_iter().take(beams_per_user).collect();
        mine.sort_unstable();
        out[r] = mine;
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct ChannelSetData {
    estimates: Vec<ComplexVector>,
    eve_estimate: ComplexVector,
    error_radii: Vec<f64>,
    eve_error_radius: f64,
    noise_vars: Vec<f64>,
    eve_noise_var: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    true_channels: Option<Vec<ComplexVector>>,
}

/// Estimates, error radii and noise levels for K users and one eavesdropper.
///
/// `true_channels`, when present, lists the K users then Eve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelSetData", into = "ChannelSetData")]
pub struct ChannelSet {
    estimates: Vec<ComplexVector>,
    eve_estimate: ComplexVector,
    error_radii: Vec<f64>,
    eve_error_radius: f64,
    noise_vars: Vec<f64>,
    eve_noise_var: f64,
    true_channels: Option<Vec<ComplexVector>>,
}

impl TryFrom<ChannelSetData> for ChannelSet {
    type Error = Error;

    fn try_from(d: ChannelSetData) -> Result<Self> {
        let set = ChannelSet::new(
            d.estimates,
            d.eve_estimate,
            d.error_radii,
            d.eve_error_radius,
            d.noise_vars,
            d.eve_noise_var,
        )?;
        match d.true_channels {
            Some(t) => set.with_true_channels(t),
            None => Ok(set),
        }
    }
}

impl From<ChannelSet> for ChannelSetData {
    fn from(s: ChannelSet) -> Self {
        ChannelSetData {
            estimates: s.estimates,
            eve_estimate: s.eve_estimate,
            error_radii: s.error_radii,
            eve_error_radius: s.eve_error_radius,
            noise_vars: s.noise_vars,
            eve_noise_var: s.eve_noise_var,
            true_channels: s.true_channels,
        }
    }
}

impl ChannelSet {
    pub fn new(
        estimates: Vec<ComplexVector>,
        eve_estimate: ComplexVector,
        error_radii: Vec<f64>,
        eve_error_radius: f64,
        noise_vars: Vec<f64>,
        eve_noise_var: f64,
    ) -> Result<Self> {
        let k = estimates.len();
        if k == 0 {
            return Err(Error::invalid("estimates", "at least one user is required"));
        }
        let n = eve_estimate.dim();
        for h in &estimates {
            if h.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: h.dim(),
                });
            }
        }
        for (name, len) in [("error_radii", error_radii.len()), ("noise_vars", noise_vars.len())] {
            if len != k {
                return Err(Error::invalid(name, format!("expected {k} entries, got {len}")));
            }
        }
        let set = Self {
            estimates,
            eve_estimate,
            error_radii,
            eve_error_radius,
            noise_vars,
            eve_noise_var,
            true_channels: None,
        };
        for r in set.receivers() {
            let eps = set.error_radius(r);
            let norm = set.estimate(r).norm();
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::invalid("error_radius", format!("{r}: {eps} is not a valid radius")));
            }
            if eps >= norm {
                return Err(Error::InfeasibleGeometry {
                    who: r.to_string(),
                    radius: eps,
                    norm,
                });
            }
            let s2 = set.noise_var(r);
            if !(s2 > 0.0 && s2.is_finite()) {
                return Err(Error::invalid("noise_var", format!("{r}: {s2} must be positive")));
            }
        }
        let all = set.receivers();
        for (i, &a) in all.iter().enumerate() {
            for &b in &all[i + 1..] {
                let (ha, hb) = (set.estimate(a), set.estimate(b));
                let overlap = ha.dot(hb).norm() / (ha.norm() * hb.norm());
                if overlap > ORTHOGONALITY_TOL {
                    return Err(Error::NonOrthogonal {
                        first: a.to_string(),
                        second: b.to_string(),
                        overlap,
                    });
                }
            }
        }
        Ok(set)
    }

    /// Attaches realized channels (K users then Eve); each must lie in its ball.
    pub fn with_true_channels(mut self, channels: Vec<ComplexVector>) -> Result<Self> {
        if channels.len() != self.n_users() + 1 {
            return Err(Error::invalid(
                "true_channels",
                format!("expected {} entries", self.n_users() + 1),
            ));
        }
        for (r, h) in self.receivers().into_iter().zip(&channels) {
            if h.dim() != self.n_antennas() {
                return Err(Error::DimensionMismatch {
                    expected: self.n_antennas(),
                    got: h.dim(),
                });
            }
            let dist = h.sub(self.estimate(r)).norm();
            let eps = self.error_radius(r);
            if dist > eps + BALL_TOL * eps.max(self.estimate(r).norm()) {
                return Err(Error::invalid(
                    "true_channels",
                    format!("{r}: distance {dist} exceeds radius {eps}"),
                ));
            }
        }
        self.true_channels = Some(channels);
        Ok(self)
    }

    pub fn n_antennas(&self) -> usize {
        self.eve_estimate.dim()
    }

    pub fn n_users(&self) -> usize {
        self.estimates.len()
    }

    /// Users in order, then Eve.
    pub fn receivers(&self) -> Vec<Receiver> {
        (0..self.n_users())
            .map(Receiver::User)
            .chain(std::iter::once(Receiver::Eve))
            .collect()
    }

    pub fn estimates(&self) -> &[ComplexVector] {
        &self.estimates
    }

    pub fn eve_estimate(&self) -> &ComplexVector {
        &self.eve_estimate
    }

    pub fn error_radii(&self) -> &[f64] {
        &self.error_radii
    }

    pub fn eve_error_radius(&self) -> f64 {
        self.eve_error_radius
    }

    pub fn noise_vars(&self) -> &[f64] {
        &self.noise_vars
    }

    pub fn eve_noise_var(&self) -> f64 {
        self.eve_noise_var
    }

    pub fn true_channels(&self) -> Option<&[ComplexVector]> {
        self.true_channels.as_deref()
    }

    pub fn estimate(&self, r: Receiver) -> &ComplexVector {
        match r {
            Receiver::User(k) => &self.estimates[k],
            Receiver::Eve => &self.eve_estimate,
        }
    }

    pub fn error_radius(&self, r: Receiver) -> f64 {
        match r {
            Receiver::User(k) => self.error_radii[k],
            Receiver::Eve => self.eve_error_radius,
        }
    }

    pub fn noise_var(&self, r: Receiver) -> f64 {
        match r {
            Receiver::User(k) => self.noise_vars[k],
            Receiver::Eve => self.eve_noise_var,
        }
    }

    pub fn check_receiver(&self, r: Receiver) -> Result<()> {
        match r {
            Receiver::User(k) if k >= self.n_users() => Err(Error::invalid(
                "user",
                format!("index {k} out of range for K = {}", self.n_users()),
            )),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Draws an error vector of norm at most `radius`.
pub fn sample_error(dim: usize, radius: f64, sampler: ErrorSampler, rng: &mut SimRng) -> ComplexVector {
    if radius == 0.0 {
        return ComplexVector::zeros(dim);
    }
    let dir = loop {
        let v = ComplexVector::from_fn(dim, |_| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        if let Some(u) = v.normalized() {
            break u;
        }
    };
    let r = match sampler {
        // radius density ∝ r^(2N-1) on [0, ε]
        ErrorSampler::UniformBall => {
            let u: f64 = rng.random();
            radius * u.powf(1.0 / (2 * dim) as f64)
        }
        ErrorSampler::UniformSphere => radius,
    };
    let delta = dir.scale(r);
    let norm = delta.norm();
    if norm > radius {
        delta.scale(radius / norm)
    } else {
        delta
    }
}

/// Estimate plus a random error drawn inside the receiver's ball.
pub fn sample_true_channel(
    set: &ChannelSet,
    receiver: Receiver,
    rng_seed: u64,
    sampler: ErrorSampler,
) -> Result<ComplexVector> {
    set.check_receiver(receiver)?;
    let mut rng = rng_from_seed(rng_seed);
    let h = set.estimate(receiver);
    let eps = set.error_radius(receiver);
    if eps == 0.0 {
        return Ok(h.clone());
    }
    Ok(h.add(&sample_error(h.dim(), eps, sampler, &mut rng)))
}

/// Channel set for trial 0 of `config`.
pub fn make_channel_set(config: &ScenarioConfig) -> Result<ChannelSet> {
    make_trial_channel_set(config, 0)
}

/// Channel set for a given trial. Synthetic sets do not depend on `trial`.
pub fn make_trial_channel_set(config: &ScenarioConfig, trial: u64) -> Result<ChannelSet> {
    config.validate()?;
    match config.channel_mode {
        ChannelMode::Synthetic => synthetic_set(config),
        ChannelMode::Physical => physical_set(config, trial),
    }
}

fn synthetic_set(config: &ScenarioConfig) -> Result<ChannelSet> {
    let n = config.n_antennas;
    let k = config.n_users;
    let mut rng = rng_from_seed(mix_seed(config.base_seed, stream::SYNTH, 0));
    let picks = rand::seq::index::sample(&mut rng, n, k + 1).into_vec();
    let amp = config.channel_norm_sq().sqrt();
    let column = |m: usize| dft_column(n, m).scale(amp);
    let estimates: Vec<ComplexVector> = picks[..k].iter().map(|&m| column(m)).collect();
    let eve = column(picks[k]);
    let radii = estimates.iter().map(|h| config.g * h.norm()).collect();
    let eve_radius = config.g_eve() * eve.norm();
    ChannelSet::new(
        estimates,
        eve,
        radii,
        eve_radius,
        vec![config.sigma2; k],
        config.eve_sigma2(),
    )
}

/// K+1 random spreads with centers on a jittered grid of spatial frequencies.
pub fn random_spreads(config: &ScenarioConfig, rng: &mut SimRng) -> Result<Vec<AngularSpread>> {
    let count = config.n_users + 1;
    let d = config.spacing_over_wavelength;
    let width = config.spread_width_deg.to_radians();
    // keep centers away from endfire so the spread fits inside (-π/2, π/2)
    let f_max = d * (FRAC_PI_2 - width - 1e-3).sin().min(0.9);
    let bin = 2.0 * f_max / count as f64;
    let mut spreads = Vec::with_capacity(count);
    for i in 0..count {
        let jitter: f64 = rng.random_range(0.25..0.75);
        let f = -f_max + (i as f64 + jitter) * bin;
        spreads.push(AngularSpread::uniform((f / d).asin(), width)?);
    }
    // shuffle which receiver gets which bin
    use rand::seq::SliceRandom;
    spreads.shuffle(rng);
    Ok(spreads)
}

fn physical_set(config: &ScenarioConfig, trial: u64) -> Result<ChannelSet> {
    let geometry = config.geometry()?;
    let seed = mix_seed(config.base_seed, stream::CHANNELS, trial);
    let mut rng = rng_from_seed(seed);
    let spreads = match &config.spreads {
        Some(s) => s.clone(),
        None => random_spreads(config, &mut rng)?,
    };
    let centers: Vec<f64> = spreads.iter().map(|s| s.center).collect();
    let beams = assign_dft_beams(&geometry, &centers, config.beams_per_user)?;

    let mut truths = Vec::with_capacity(spreads.len());
    let mut estimates = Vec::with_capacity(spreads.len());
    let mut radii = Vec::with_capacity(spreads.len());
    for (i, (spread, idx)) in spreads.iter().zip(&beams).enumerate() {
        let h = synthesize_channel(&geometry, spread, config.n_quadrature, rng.random())?;
        let (est, mut residual) = bdma_estimate(&h, idx)?;
        if residual <= 1e-12 * h.norm() {
            residual = 0.0;
        }
        let g = if i == config.n_users { config.g_eve() } else { config.g };
        radii.push(residual.max(g * est.norm()));
        truths.push(h);
        estimates.push(est);
    }
    let eve = estimates.pop().expect("eve estimate");
    let eve_radius = radii.pop().expect("eve radius");
    let set = ChannelSet::new(
        estimates,
        eve,
        radii,
        eve_radius,
        vec![config.sigma2; config.n_users],
        config.eve_sigma2(),
    )?;
    set.with_true_channels(truths)
}
