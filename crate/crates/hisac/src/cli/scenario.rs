//! Scenario files. Powers, noise levels and path gains are given in dB with a
//! `_db` suffix, lengths in meters with `_m`; everything is converted to
//! linear units here and nowhere else.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::ArrayConfig;
use crate::error::{Error, Result};
use crate::montecarlo::McConfig;
use crate::params::{db_to_linear, linear_to_db, ScenarioParams};

/// `array` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub n_x: usize,
    pub n_y: usize,
    /// Element spacing.
    pub d_m: f64,
    /// Radiating area of one element (m²).
    pub a_elem_m2: f64,
    pub lambda_m: f64,
    pub conventional: bool,
}

impl Default for ArraySection {
    fn default() -> Self {
        let a = ArrayConfig::holographic_default();
        Self { n_x: a.n_x, n_y: a.n_y, d_m: a.d, a_elem_m2: a.a_elem, lambda_m: a.lambda, conventional: a.conventional }
    }
}

/// `params` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSection {
    /// Downlink transmit power.
    pub p_db: f64,
    /// Uplink user power.
    pub p_c_db: f64,
    /// Uplink sensing power.
    pub p_s_db: f64,
    pub sigma2_s_db: f64,
    pub sigma2_c_db: f64,
    pub sigma2_u_db: f64,
    pub alpha_s_db: f64,
    pub alpha0_db: f64,
    pub a_mu_i_db: f64,
    pub frame_len: u32,
    pub r_target_m: [f64; 3],
    pub r_user_m: [f64; 3],
    /// Target rate in bps/Hz.
    pub r0: f64,
    pub kappa: f64,
    pub iota: f64,
    pub varrho: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        let p = ScenarioParams::default();
        Self {
            p_db: linear_to_db(p.p),
            p_c_db: linear_to_db(p.p_c),
            p_s_db: linear_to_db(p.p_s),
            sigma2_s_db: linear_to_db(p.sigma2_s),
            sigma2_c_db: linear_to_db(p.sigma2_c),
            sigma2_u_db: linear_to_db(p.sigma2_u),
            alpha_s_db: linear_to_db(p.alpha_s),
            alpha0_db: linear_to_db(p.alpha0),
            a_mu_i_db: linear_to_db(p.a_mu_i),
            frame_len: p.frame_len,
            r_target_m: p.r_target,
            r_user_m: p.r_user,
            r0: p.r0,
            kappa: p.kappa,
            iota: p.iota,
            varrho: p.varrho,
        }
    }
}

/// `mc` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub trials: usize,
    /// Draws for outage probabilities below 10⁻³.
    pub tail_trials: usize,
    pub seed: u64,
    pub workers: usize,
    pub ci_z: f64,
}

impl Default for McSection {
    fn default() -> Self {
        let m = McConfig::default();
        Self { trials: m.trials, tail_trials: 1_000_000, seed: m.seed, workers: m.workers, ci_z: m.ci_z }
    }
}

/// `grids` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsSection {
    /// SNR points of a sweep.
    pub snr_db: Vec<f64>,
    pub tau_points: usize,
    pub eps_points: usize,
    pub kappa_points: usize,
    pub iota_points: usize,
    /// Channel draws per τ of the I-CSI region.
    pub region_draws: usize,
    /// Gaussian randomizations of the S-CSI relaxation.
    pub randomizations: usize,
    /// τ of Pareto sweeps.
    pub tau: f64,
}

impl Default for GridsSection {
    fn default() -> Self {
        Self {
            snr_db: (0..=8).map(|i| 5.0 * f64::from(i)).collect(),
            tau_points: 41,
            eps_points: 41,
            kappa_points: 21,
            iota_points: 21,
            region_draws: 1000,
            randomizations: 10_000,
            tau: 0.5,
        }
    }
}

/// `output` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

/// A scenario JSON document. Omitted fields take the reference values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub array: ArraySection,
    pub params: ParamsSection,
    pub mc: McSection,
    pub grids: GridsSection,
    pub output: OutputSection,
}

/// A scenario in linear units, validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub cfg: ArrayConfig,
    pub params: ScenarioParams,
    pub mc: McConfig,
    pub tail_trials: usize,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn resolve(self) -> Result<Scenario> {
        let a = &self.array;
        let cfg = ArrayConfig {
            n_x: a.n_x,
            n_y: a.n_y,
            d: a.d_m,
            a_elem: a.a_elem_m2,
            lambda: a.lambda_m,
            conventional: a.conventional,
        };
        cfg.validate()?;
        let s = &self.params;
        let params = ScenarioParams {
            p: db_to_linear(s.p_db),
            p_c: db_to_linear(s.p_c_db),
            p_s: db_to_linear(s.p_s_db),
            sigma2_s: db_to_linear(s.sigma2_s_db),
            sigma2_c: db_to_linear(s.sigma2_c_db),
            sigma2_u: db_to_linear(s.sigma2_u_db),
            alpha_s: db_to_linear(s.alpha_s_db),
            alpha0: db_to_linear(s.alpha0_db),
            a_mu_i: db_to_linear(s.a_mu_i_db),
            frame_len: s.frame_len,
            r_target: s.r_target_m,
            r_user: s.r_user_m,
            r0: s.r0,
            kappa: s.kappa,
            iota: s.iota,
            varrho: s.varrho,
        };
        params.validate()?;
        let m = &self.mc;
        let mc = McConfig { trials: m.trials, seed: m.seed, workers: m.workers, ci_z: m.ci_z };
        mc.validate()?;
        if m.tail_trials < m.trials {
            return Err(Error::Config(format!(
                "tail_trials ({}) must be at least trials ({})",
                m.tail_trials, m.trials
            )));
        }
        let g = &self.grids;
        if g.snr_db.is_empty() || g.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grids.snr_db must be a nonempty list of finite values".into()));
        }
        for (name, n) in [
            ("tau_points", g.tau_points),
            ("eps_points", g.eps_points),
            ("kappa_points", g.kappa_points),
            ("iota_points", g.iota_points),
        ] {
            if n < 2 {
                return Err(Error::Config(format!("grids.{name} must be at least 2, got {n}")));
            }
        }
        if g.region_draws < 100 || g.randomizations == 0 {
            return Err(Error::Config("grids.region_draws must be at least 100 and randomizations positive".into()));
        }
        if !(0.0..=1.0).contains(&g.tau) {
            return Err(Error::Config(format!("grids.tau must lie in [0, 1], got {}", g.tau)));
        }
        Ok(Scenario { tail_trials: m.tail_trials, file: self, cfg, params, mc })
    }
}

impl Scenario {
    /// SHA-256 of the resolved scenario. The worker count and the output
    /// directory are excluded since neither changes any result.
    pub fn hash(&self) -> String {
        let mut f = self.file.clone();
        f.mc.workers = 0;
        f.output = OutputSection::default();
        let text = serde_json::to_string(&f).expect("scenario serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
