//! Parameter sweeps and their CSV/JSON products.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{run_scenario, ScenarioResult};
use crate::beamformer::Method;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweptParameter {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "N")]
    N,
    #[serde(rename = "K")]
    K,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub swept_parameter: SweptParameter,
    pub values: Vec<f64>,
    pub fixed: ScenarioConfig,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The fixed config with the swept field set to `value`.
    pub fn config_at(&self, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = self.fixed.clone();
        let count = |field: &str| -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::invalid(field, format!("sweep value {value} is not a positive integer")))
            }
        };
        match self.swept_parameter {
            SweptParameter::G => cfg.g = value,
            SweptParameter::N => cfg.n_antennas = count("n_antennas")?,
            SweptParameter::K => cfg.n_users = count("n_users")?,
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "must not be empty"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "must be finite"));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("values", "must be strictly increasing"));
        }
        for &v in &self.values {
            self.config_at(v)?.validate().map_err(|e| at_value(v, e))?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the spec's canonical JSON.
    pub fn config_hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }
}

fn at_value(value: f64, source: Error) -> Error {
    Error::AtSweepValue {
        value,
        source: Box::new(source),
    }
}

/// One CSV row. Field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub method: Method,
    pub mean_total_power: f64,
    pub se_total_power: f64,
    pub mean_secret_sum_rate: f64,
    pub se_secret_sum_rate: f64,
    pub mean_eve_sinr_db: f64,
    pub se_eve_sinr_db: f64,
    pub frac_worstcase_feasible: f64,
    pub n_trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub code_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub swept_parameter: SweptParameter,
    pub rows: Vec<SweepRow>,
    pub provenance: Provenance,
}

impl SweepResult {
    /// Rows of one method in sweep order.
    pub fn series(&self, method: Method) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.method == method).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn rows_for(value: f64, r: &ScenarioResult) -> impl Iterator<Item = SweepRow> + '_ {
    r.methods.iter().map(move |m| SweepRow {
        sweep_value: value,
        method: m.method,
        mean_total_power: m.total_power.mean,
        se_total_power: m.total_power.se,
        mean_secret_sum_rate: m.secret_sum_rate.mean,
        se_secret_sum_rate: m.secret_sum_rate.se,
        mean_eve_sinr_db: m.eve_sinr_db.mean,
        se_eve_sinr_db: m.eve_sinr_db.se,
        frac_worstcase_feasible: m.frac_worstcase_feasible,
        n_trials: r.n_trials,
        seed: r.seed,
    })
}

pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len() * spec.fixed.methods.len());
    for &v in &spec.values {
        let cfg = spec.config_at(v)?;
        let r = run_scenario(&cfg, workers).map_err(|e| at_value(v, e))?;
        rows.extend(rows_for(v, &r));
    }
    Ok(SweepResult {
        swept_parameter: spec.swept_parameter,
        rows,
        provenance: Provenance {
            config_sha256: spec.config_hash()?,
            seed: spec.fixed.base_seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(param: SweptParameter, values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            swept_parameter: param,
            values,
            fixed: ScenarioConfig {
                n_antennas: 32,
                n_users: 4,
                n_trials: 20,
                ..Default::default()
            },
        }
    }

    #[test]
    fn csv_header_and_row_count() {
        let r = run_sweep(&spec(SweptParameter::G, vec![0.1, 0.3]), Some(2)).unwrap();
        let text = r.to_csv_string().unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sweep_value,method,mean_total_power,se_total_power,mean_secret_sum_rate,se_secret_sum_rate,\
             mean_eve_sinr_db,se_eve_sinr_db,frac_worstcase_feasible,n_trials,seed"
        );
        assert_eq!(lines.count(), 6);
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn csv_floats_round_trip() {
        let r = run_sweep(&spec(SweptParameter::G, vec![0.25]), Some(1)).unwrap();
        let text = r.to_csv_string().unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        for (rec, row) in rd.records().zip(&r.rows) {
            let rec = rec.unwrap();
            assert_eq!(rec[2].parse::<f64>().unwrap(), row.mean_total_power);
            assert_eq!(rec[4].parse::<f64>().unwrap(), row.mean_secret_sum_rate);
            assert_eq!(rec[6].parse::<f64>().unwrap(), row.mean_eve_sinr_db);
        }
    }

    #[test]
    fn rejects_unordered_values() {
        let err = spec(SweptParameter::G, vec![0.3, 0.1]).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { ref field, .. } if field == "values"));
        assert!(spec(SweptParameter::G, vec![0.1, 0.1]).validate().is_err());
    }

    #[test]
    fn invalid_value_is_annotated() {
        // K = 40 does not fit N = 32
        let err = spec(SweptParameter::K, vec![2.0, 40.0]).validate().unwrap_err();
        match err {
            Error::AtSweepValue { value, source } => {
                assert_eq!(value, 40.0);
                assert!(source.is_validation());
            }
            other => panic!("{other:?}"),
        }
        assert!(spec(SweptParameter::N, vec![16.5]).validate().is_err());
    }

    #[test]
    fn non_robust_power_flat_in_g() {
        let r = run_sweep(&spec(SweptParameter::G, vec![0.1, 0.4, 0.7]), Some(1)).unwrap();
        let p: Vec<f64> = r.series(Method::NonRobust).iter().map(|s| s.mean_total_power).collect();
        assert!(p.iter().all(|&x| x == p[0]));
        let p: Vec<f64> = r.series(Method::Robust).iter().map(|s| s.mean_total_power).collect();
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn per_user_power_halves_as_n_doubles() {
        let mut s = spec(SweptParameter::N, vec![32.0, 64.0, 128.0]);
        s.fixed.methods = vec![Method::Robust];
        let r = run_sweep(&s, Some(1)).unwrap();
        let p: Vec<f64> = r.rows.iter().map(|s| s.mean_total_power).collect();
        for w in p.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn hash_tracks_spec() {
        let a = spec(SweptParameter::G, vec![0.1]);
        let mut b = a.clone();
        assert_eq!(a.config_hash().unwrap(), b.config_hash().unwrap());
        b.fixed.base_seed = 2;
        assert_ne!(a.config_hash().unwrap(), b.config_hash().unwrap());
        assert_eq!(a.config_hash().unwrap().len(), 64);
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"swept_parameter": "K", "values": [2, 4], "fixed": {"n_antennas": 16, "n_trials": 3}}"#;
        let s = SweepSpec::from_json(text).unwrap();
        assert_eq!(s.swept_parameter, SweptParameter::K);
        assert_eq!(s.config_at(4.0).unwrap().n_users, 4);
        assert!(SweepSpec::from_json(r#"{"swept_parameter": "g", "values": [], "fixed": {}, "x": 1}"#).is_err());
    }
}
