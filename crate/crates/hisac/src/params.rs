//! Scenario parameters shared by every metric.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Powers, noise levels, path gains and positions of one scenario.
///
/// Everything is linear; dB conversion happens at the config boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Downlink transmit power.
    pub p: f64,
    /// Uplink user power.
    pub p_c: f64,
    /// Uplink sensing power.
    pub p_s: f64,
    pub sigma2_s: f64,
    pub sigma2_c: f64,
    pub sigma2_u: f64,
    /// Mean target reflection strength α_s.
    pub alpha_s: f64,
    /// Reference channel power α₀ = A·μ_a.
    pub alpha0: f64,
    /// A·μ_i, the per-element communication channel power.
    pub a_mu_i: f64,
    /// Frame length L in symbols.
    pub frame_len: u32,
    pub r_target: [f64; 3],
    pub r_user: [f64; 3],
    /// Target rate R₀ (bps/Hz).
    pub r0: f64,
    /// FDSAC bandwidth fraction for communication.
    pub kappa: f64,
    /// FDSAC power fraction for communication.
    pub iota: f64,
    /// Uplink co-channel interference ratio ϱ.
    pub varrho: f64,
}

impl Default for ScenarioParams {
    /// 30 dB on every link, α₀ = Aμ_i = α_s = 1, L = 4, R₀ = 12,
    /// κ = ι = 0.5, target at [0, 0, 3] m and user at [1, 1, 5] m.
    fn default() -> Self {
        Self {
            p: 1.0,
            p_c: 1e3,
            p_s: 1e3,
            sigma2_s: 1e-3,
            sigma2_c: 1e-3,
            sigma2_u: 1.0,
            alpha_s: 1.0,
            alpha0: 1.0,
            a_mu_i: 1.0,
            frame_len: 4,
            r_target: [0.0, 0.0, 3.0],
            r_user: [1.0, 1.0, 5.0],
            r0: 12.0,
            kappa: 0.5,
            iota: 0.5,
            varrho: 0.0,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p", self.p),
            ("p_c", self.p_c),
            ("p_s", self.p_s),
            ("sigma2_s", self.sigma2_s),
            ("sigma2_c", self.sigma2_c),
            ("sigma2_u", self.sigma2_u),
            ("alpha0", self.alpha0),
            ("a_mu_i", self.a_mu_i),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return domain(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.alpha_s >= 0.0) {
            return domain(format!("alpha_s must be nonnegative, got {}", self.alpha_s));
        }
        if self.frame_len == 0 {
            return domain("frame length must be at least 1");
        }
        for (name, v) in [("kappa", self.kappa), ("iota", self.iota)] {
            if !(0.0..=1.0).contains(&v) {
                return domain(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if !(self.varrho >= 0.0) {
            return domain(format!("varrho must be nonnegative, got {}", self.varrho));
        }
        if !(self.r_target[2] > 0.0) || !(self.r_user[2] > 0.0) {
            return domain("target and user must lie in front of the array (z > 0)");
        }
        Ok(())
    }

    /// L as a float.
    pub fn l(&self) -> f64 {
        f64::from(self.frame_len)
    }

    /// Downlink sensing SNR p/σ_s².
    pub fn snr_s(&self) -> f64 {
        self.p / self.sigma2_s
    }

    /// Downlink communication SNR p/σ_c².
    pub fn snr_c(&self) -> f64 {
        self.p / self.sigma2_c
    }

    /// Effective uplink noise σ_u²(1 + ϱ).
    pub fn noise_u(&self) -> f64 {
        self.sigma2_u * (1.0 + self.varrho)
    }

    /// 2^R₀ − 1.
    pub fn outage_snr(&self) -> f64 {
        self.r0.exp2() - 1.0
    }
}

/// dB to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
