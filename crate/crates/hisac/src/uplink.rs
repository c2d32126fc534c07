//! Uplink metrics under the two SIC orders: communications-centric (C-C),
//! which estimates the target response first, and sensing-centric (S-C),
//! which decodes the user first.
//!
//! Every function reads the uplink noise as σ_u²(1 + ϱ), so co-channel
//! interference is carried by the scenario itself.

use std::f64::consts::LOG2_E;

use num_complex::Complex64;
use serde::Serialize;

use crate::array::ArrayConfig;
use crate::channels::{CorrelatedChannelModel, SensingChannel, SensingProjection};
use crate::downlink::{
    diag_plus_rank_one_eigs, exponential_outage, exponential_rate, gamma_sum_outage, gamma_sum_rate, positive,
    sc_sr_closed, split_metrics, ClosedForm, CsiMode, FdsacMetrics, ScSensingRate,
};
use crate::error::{domain, Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::params::ScenarioParams;
use crate::special::zeta_ecr;

/// SIC decoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SicOrder {
    CcSic,
    ScSic,
}

/// Corner point of one uplink design.
#[derive(Debug, Clone, Serialize)]
pub struct UplinkDesignResult {
    pub order: SicOrder,
    pub csi: CsiMode,
    pub sr: f64,
    pub ecr: f64,
    pub op: f64,
}

/// p_s·Lα_s‖h_s‖²/σ_u², the per-unit-gain sensing SNR of the uplink echo.
fn echo_gain(hs_norm_sq: f64, params: &ScenarioParams) -> f64 {
    params.p_s / params.noise_u() * params.l() * params.alpha_s * hs_norm_sq
}

/// Ψ = (p_s/σ_u²)Lα_s‖h_s‖⁴ + 1.
pub fn psi(hs: &SensingChannel, params: &ScenarioParams) -> f64 {
    echo_gain(hs.norm_sq, params) * hs.norm_sq + 1.0
}

/// Instantaneous C-C SIC SR with the matched receive beam, for h_c given
/// through ‖h_c‖² and h_sᴴh_c.
pub fn cc_sic_sr_from_gram(hc_norm_sq: f64, cross: Complex64, hs_norm_sq: f64, params: &ScenarioParams) -> f64 {
    let (pc, s2) = (params.p_c, params.noise_u());
    let eff = hs_norm_sq - pc * cross.norm_sqr() / (pc * hc_norm_sq + s2);
    (echo_gain(hs_norm_sq, params) * eff).ln_1p() * LOG2_E / params.l()
}

/// Instantaneous C-C SIC SR for one draw of h_c.
pub fn cc_sic_sr_instantaneous(hc: &CVector, hs: &SensingChannel, params: &ScenarioParams) -> f64 {
    cc_sic_sr_from_gram(hc.norm_squared(), hs.h_s.dotc(hc), hs.norm_sq, params)
}

/// Eigenvalues of Θ = (1 + γ‖h‖⁴)R − γ‖h‖²R^{1/2}hhᴴR^{1/2} with γ = (p_s/σ_u²)Lα_s.
pub fn theta_eigs(
    model: &CorrelatedChannelModel,
    proj: &SensingProjection,
    params: &ScenarioParams,
) -> Result<Vec<f64>> {
    let v = proj.whitened(&model.eigs);
    let g = echo_gain(proj.norm_sq, params);
    let d: Vec<f64> = model.eigs.iter().map(|l| l * (1.0 + g * proj.norm_sq)).collect();
    psd_eigs(diag_plus_rank_one_eigs(&d, &v, -g)?)
}

/// Eigenvalues of Θ̃ = Lα_s‖h‖²R^{1/2}(‖h‖²I − hhᴴ)R^{1/2}, the p_s-normalized limit of Θ.
pub fn theta_limit_eigs(
    model: &CorrelatedChannelModel,
    proj: &SensingProjection,
    params: &ScenarioParams,
) -> Result<Vec<f64>> {
    let v = proj.whitened(&model.eigs);
    let c = params.l() * params.alpha_s * proj.norm_sq;
    let d: Vec<f64> = model.eigs.iter().map(|l| c * proj.norm_sq * l).collect();
    psd_eigs(diag_plus_rank_one_eigs(&d, &v, -c)?)
}

fn psd_eigs(eigs: Vec<f64>) -> Result<Vec<f64>> {
    let max = eigs.iter().copied().fold(0.0, f64::max);
    if let Some(&min) = eigs.last() {
        if min < -1e-8 * max {
            return Err(Error::Numeric(format!("matrix is not PSD: eigenvalue {min:e} against {max:e}")));
        }
    }
    positive(eigs)
}

/// Average SR of the C-C SIC:
/// (1/L)[ζ(Θ, p_c/(σ_u²Ψ)) − ζ(R, p_c/σ_u²) + log₂Ψ].
pub fn cc_sic_avg_sr(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
) -> Result<ClosedForm> {
    let proj = SensingProjection::new(model, hs);
    let s2 = params.noise_u();
    let l = params.l();
    let psi = psi(hs, params);
    let zr = zeta_ecr(&model.eigs, params.p_c / s2)?;
    let exact = (zeta_ecr(&theta_eigs(model, &proj, params)?, params.p_c / (s2 * psi))? - zr + psi.log2()) / l;
    let psi_t = l * params.alpha_s * hs.norm_sq.powi(2) / s2;
    let theta_t = theta_limit_eigs(model, &proj, params)?;
    let approx = (params.p_s.log2() + zeta_ecr(&theta_t, params.p_c / (s2 * s2 * psi_t))? - zr + psi_t.log2()) / l;
    Ok(ClosedForm { exact, approx })
}

/// Uplink ECR and OP after echo removal: ζ(R, p_c/σ_u²) and the Gamma-sum CDF.
pub fn cc_sic_comm(model: &CorrelatedChannelModel, params: &ScenarioParams) -> Result<(ClosedForm, ClosedForm)> {
    let snr = params.p_c / params.noise_u();
    Ok((gamma_sum_rate(&model.eigs, snr)?, gamma_sum_outage(&model.eigs, snr, params.outage_snr())?))
}

/// c = γ/(1 + γ‖h_s‖²) with γ = (p_s/σ_u²)α_s‖h_s‖², so that
/// (γh_sh_sᴴ + I)⁻¹ = I − c·h_sh_sᴴ.
fn woodbury_coeff(hs_norm_sq: f64, params: &ScenarioParams) -> f64 {
    let gamma = params.p_s / params.noise_u() * params.alpha_s * hs_norm_sq;
    gamma / (1.0 + gamma * hs_norm_sq)
}

/// Positive eigenvalues of Φ = R^{1/2}(γh_sh_sᴴ + I)⁻¹R^{1/2}.
pub fn phi_eigs(model: &CorrelatedChannelModel, proj: &SensingProjection, params: &ScenarioParams) -> Result<Vec<f64>> {
    let v = proj.whitened(&model.eigs);
    let c = woodbury_coeff(proj.norm_sq, params);
    psd_eigs(diag_plus_rank_one_eigs(&model.eigs, &v, -c)?)
}

/// Instantaneous S-C SIC CR with the MMSE receiver, from ‖h_c‖² and h_sᴴh_c.
pub fn sc_sic_cr_from_gram(hc_norm_sq: f64, cross: Complex64, hs_norm_sq: f64, params: &ScenarioParams) -> f64 {
    let c = woodbury_coeff(hs_norm_sq, params);
    (params.p_c / params.noise_u() * (hc_norm_sq - c * cross.norm_sqr())).ln_1p() * LOG2_E
}

/// ECR of the S-C SIC, ζ(Φ, p_c/σ_u²), with log₂(p_c/σ_u²) + υ_Φ.
pub fn sc_sic_ecr(model: &CorrelatedChannelModel, hs: &SensingChannel, params: &ScenarioParams) -> Result<ClosedForm> {
    let eigs = phi_eigs(model, &SensingProjection::new(model, hs), params)?;
    gamma_sum_rate(&eigs, params.p_c / params.noise_u())
}

/// OP of the S-C SIC from the Φ spectrum.
pub fn sc_sic_op(model: &CorrelatedChannelModel, hs: &SensingChannel, params: &ScenarioParams) -> Result<ClosedForm> {
    let eigs = phi_eigs(model, &SensingProjection::new(model, hs), params)?;
    gamma_sum_outage(&eigs, params.p_c / params.noise_u(), params.outage_snr())
}

/// Scenario whose downlink sensing SNR equals the uplink one, p_s/σ_u².
pub fn uplink_sensing_params(params: &ScenarioParams) -> ScenarioParams {
    ScenarioParams { p: params.p_s, sigma2_s: params.noise_u(), ..*params }
}

/// SR of the S-C SIC, which matches the downlink S-C SR at p_s/σ_u².
pub fn sc_sic_sr(params: &ScenarioParams, cfg: &ArrayConfig, hs: &SensingChannel) -> ScSensingRate {
    sc_sr_closed(&uplink_sensing_params(params), cfg, hs)
}

/// h_sᴴ(p_cR + σ_u²I)⁻¹h_s through the basis of R.
pub fn interference_quad_form(
    model: &CorrelatedChannelModel,
    proj: &SensingProjection,
    params: &ScenarioParams,
) -> f64 {
    let s2 = params.noise_u();
    let pc = params.p_c;
    let shrink: f64 = proj.g.iter().zip(&model.eigs).map(|(g, l)| g.norm_sqr() * pc * l / (pc * l + s2)).sum();
    (proj.norm_sq - shrink).max(0.0) / s2
}

/// SR of the C-C SIC under S-CSI, (1/L)log₂(1 + p_sLα_s‖h_s‖²·h_sᴴ(p_cR + σ_u²I)⁻¹h_s).
pub fn scsi_cc_sic_sr(model: &CorrelatedChannelModel, hs: &SensingChannel, params: &ScenarioParams) -> ClosedForm {
    let q = interference_quad_form(model, &SensingProjection::new(model, hs), params);
    let l = params.l();
    let k = l * params.alpha_s * hs.norm_sq * q;
    ClosedForm { exact: (params.p_s * k).ln_1p() * LOG2_E / l, approx: (params.p_s.log2() + k.log2()) / l }
}

/// S-CSI receive vector for the S-C order, with its generalized Rayleigh quotient ϰ.
#[derive(Debug, Clone)]
pub struct DetectionVector {
    /// Unit-norm v.
    pub v: CVector,
    /// Uᴴv.
    pub coords: Vec<Complex64>,
    /// ϰ = vᴴRv / vᴴMv with M = (p_s/σ_u²)α_s‖h_s‖²h_sh_sᴴ + I.
    pub kappa: f64,
}

/// Principal generalized eigenvector of (R, M), computed in span(U, h⊥).
pub fn scsi_detection_vector(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
) -> Result<DetectionVector> {
    let proj = SensingProjection::new(model, hs);
    let n = model.rank();
    let orth = proj.orth_sq.sqrt();
    let extra = orth > 1e-12 * proj.norm_sq.sqrt();
    let m = n + usize::from(extra);
    // h_s in the orthonormal basis [U, q].
    let mut h = proj.g.clone();
    if extra {
        h.push(Complex64::from(orth));
    }
    let gamma = params.p_s / params.noise_u() * params.alpha_s * proj.norm_sq;
    let hn2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    // M^{-1/2} = I − t·hhᴴ/‖h‖².
    let t = 1.0 - 1.0 / (1.0 + gamma * hn2).sqrt();
    let minv_half = CMatrix::from_fn(m, m, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::from(id) - h[i] * h[j].conj() * (t / hn2)
    });
    let r = CMatrix::from_fn(m, m, |i, j| Complex64::from(if i == j && i < n { model.eigs[i] } else { 0.0 }));
    let a = &minv_half * r * &minv_half;
    let (vals, vecs) = hermitian_eigen((&a + a.adjoint()) * Complex64::from(0.5))?;
    let kappa = vals[0];
    if !(kappa > 0.0) {
        return Err(Error::Numeric("detection quotient is not positive".into()));
    }
    let y = &minv_half * vecs.column(0);
    let y = &y / Complex64::from(y.norm());
    let coords: Vec<Complex64> = y.iter().take(n).copied().collect();
    let mut v = &model.basis * CVector::from_column_slice(&coords);
    if extra {
        let q = (&hs.h_s - &model.basis * CVector::from_column_slice(&proj.g)) / Complex64::from(orth);
        v += q * y[n];
    }
    Ok(DetectionVector { v, coords, kappa })
}

/// ECR and OP of the S-C SIC under S-CSI: an exponential SNR with mean p_cϰ/σ_u².
pub fn scsi_sc_comm(kappa: f64, params: &ScenarioParams) -> Result<(ClosedForm, ClosedForm)> {
    if !(kappa > 0.0) {
        return domain(format!("ϰ must be positive, got {kappa}"));
    }
    let mean = params.p_c / params.noise_u() * kappa;
    Ok((exponential_rate(mean), exponential_outage(mean, params.outage_snr())))
}

/// ECR and OP of the C-C SIC under S-CSI, detected along the principal mode.
pub fn scsi_cc_sic_comm(model: &CorrelatedChannelModel, params: &ScenarioParams) -> (ClosedForm, ClosedForm) {
    let mean = params.p_c / params.noise_u() * model.lambda1();
    (exponential_rate(mean), exponential_outage(mean, params.outage_snr()))
}

/// ε·(S-C pair) + (1 − ε)·(C-C pair).
pub fn time_sharing_pair(epsilon: f64, sc: (f64, f64), cc: (f64, f64)) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&epsilon) {
        return domain(format!("ε must lie in [0, 1], got {epsilon}"));
    }
    Ok((epsilon * sc.0 + (1.0 - epsilon) * cc.0, epsilon * sc.1 + (1.0 - epsilon) * cc.1))
}

/// Uplink FDSAC metrics. Each sub-band carries its full power.
pub fn fdsac_uplink_metrics(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    csi: CsiMode,
) -> Result<FdsacMetrics> {
    let s2 = params.noise_u();
    let x = params.p_s / s2 * params.l() * params.alpha_s * hs.norm_sq.powi(2);
    split_metrics(model, csi, params.kappa, 1.0, 1.0, x, params.p_c / s2, params)
}

/// Uplink FDSAC (SR, ergodic CR).
pub fn fdsac_uplink(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    csi: CsiMode,
) -> Result<(f64, f64)> {
    let m = fdsac_uplink_metrics(model, hs, params, csi)?;
    Ok((m.sr.exact, m.ecr.exact))
}

/// Folds co-channel interference CN(0, ϱσ_u²I) into the uplink noise.
pub fn apply_interference(params: &ScenarioParams, varrho: f64) -> Result<ScenarioParams> {
    if !(varrho >= 0.0) {
        return domain(format!("ϱ must be nonnegative, got {varrho}"));
    }
    Ok(ScenarioParams { sigma2_u: params.noise_u() * (1.0 + varrho), varrho: 0.0, ..*params })
}

/// Both SIC corner points for one CSI mode.
pub fn design_corners(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    cfg: &ArrayConfig,
    csi: CsiMode,
) -> Result<[UplinkDesignResult; 2]> {
    let sr_sc = sc_sic_sr(params, cfg, hs).exact;
    Ok(match csi {
        CsiMode::Icsi => {
            let (ecr_cc, op_cc) = cc_sic_comm(model, params)?;
            [
                UplinkDesignResult {
                    order: SicOrder::CcSic,
                    csi,
                    sr: cc_sic_avg_sr(model, hs, params)?.exact,
                    ecr: ecr_cc.exact,
                    op: op_cc.exact,
                },
                UplinkDesignResult {
                    order: SicOrder::ScSic,
                    csi,
                    sr: sr_sc,
                    ecr: sc_sic_ecr(model, hs, params)?.exact,
                    op: sc_sic_op(model, hs, params)?.exact,
                },
            ]
        }
        CsiMode::Scsi => {
            let (ecr_cc, op_cc) = scsi_cc_sic_comm(model, params);
            let det = scsi_detection_vector(model, hs, params)?;
            let (ecr_sc, op_sc) = scsi_sc_comm(det.kappa, params)?;
            [
                UplinkDesignResult {
                    order: SicOrder::CcSic,
                    csi,
                    sr: scsi_cc_sic_sr(model, hs, params).exact,
                    ecr: ecr_cc.exact,
                    op: op_cc.exact,
                },
                UplinkDesignResult { order: SicOrder::ScSic, csi, sr: sr_sc, ecr: ecr_sc.exact, op: op_sc.exact },
            ]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_sharing_endpoints() {
        let (sc, cc) = ((3.0, 1.0), (2.0, 5.0));
        assert_eq!(time_sharing_pair(0.0, sc, cc).unwrap(), cc);
        assert_eq!(time_sharing_pair(1.0, sc, cc).unwrap(), sc);
        assert_eq!(time_sharing_pair(0.5, sc, cc).unwrap(), (2.5, 3.0));
        assert!(time_sharing_pair(1.5, sc, cc).is_err());
    }

    #[test]
    fn interference_is_identity_at_zero() {
        let p = ScenarioParams::default();
        assert_eq!(apply_interference(&p, 0.0).unwrap(), p);
    }
}
