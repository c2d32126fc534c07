//! Downlink metrics: sensing-centric (S-C), communications-centric (C-C) and
//! Pareto beamforming under instantaneous (I-CSI) and statistical (S-CSI)
//! channel knowledge, plus the FDSAC baseline.

use std::f64::consts::{LN_2, LOG2_E, PI};

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::array::{array_occupation_ratio, ArrayConfig};
use crate::channels::{CorrelatedChannelModel, SensingChannel};
use crate::error::{domain, Error, Result};
use crate::linalg::{dot_t, hermitian_eigenvalues, CMatrix, CVector};
use crate::params::ScenarioParams;
use crate::special::{exponential_ecr, expsum_cdf, expsum_ln_cdf, upsilon, zeta_ecr, EULER_GAMMA};

/// Instantaneous SR (1/L)·log₂(1 + (p/σ_s²)Lα_s‖h_s‖²|h_sᵀw|²).
pub fn sr_instantaneous(w: &CVector, hs: &SensingChannel, params: &ScenarioParams) -> f64 {
    let g = dot_t(&hs.h_s, w).norm_sqr();
    sr_from_gain(g, hs, params)
}

/// SR for a given beam gain |h_sᵀw|².
pub fn sr_from_gain(gain: f64, hs: &SensingChannel, params: &ScenarioParams) -> f64 {
    let l = params.l();
    (params.snr_s() * l * params.alpha_s * hs.norm_sq * gain).ln_1p() * LOG2_E / l
}

/// Instantaneous CR log₂(1 + (p/σ_c²)|h_cᵀw|²).
pub fn cr_instantaneous(w: &CVector, hc: &CVector, params: &ScenarioParams) -> f64 {
    (params.snr_c() * dot_t(hc, w).norm_sqr()).ln_1p() * LOG2_E
}

/// MMSE of the target response for beam w.
pub fn mmse_of_beam(w: &CVector, hs: &SensingChannel, params: &ScenarioParams) -> f64 {
    let g = dot_t(&hs.h_s, w).norm_sqr();
    params.alpha_s / (1.0 + params.snr_s() * params.l() * params.alpha_s * hs.norm_sq * g)
}

/// S-C SR in closed form with its variants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScSensingRate {
    pub exact: f64,
    pub high_snr: f64,
    /// Same value written through the aperture L_xL_y and occupation ratio η.
    pub aor_form: f64,
    /// Limit as η → 1 at fixed aperture.
    pub aor_bound: f64,
}

pub fn sc_sr_closed(params: &ScenarioParams, cfg: &ArrayConfig, hs: &SensingChannel) -> ScSensingRate {
    let l = params.l();
    let n = cfg.n_total() as f64;
    let r4 = hs.r_s.powi(4);
    let k = l * params.alpha_s * params.alpha0.powi(2) * n * n / (16.0 * PI * PI * params.sigma2_s * r4);
    let exact = (params.p * k).ln_1p() * LOG2_E / l;
    let high_snr = (params.p.log2() + k.log2()) / l;
    let mu_a = params.alpha0 / cfg.a_elem;
    let eta = array_occupation_ratio(cfg);
    let aperture = cfg.l_x() * cfg.l_y();
    let aor = |eta: f64| {
        let x = params.p * l * params.alpha_s * mu_a.powi(2) * (aperture * eta).powi(2)
            / (16.0 * PI * PI * params.sigma2_s * r4);
        x.ln_1p() * LOG2_E / l
    };
    ScSensingRate { exact, high_snr, aor_form: aor(eta), aor_bound: aor(1.0) }
}

/// Ω = N/(bᴴRb).
pub fn omega(model: &CorrelatedChannelModel, hs: &SensingChannel) -> Result<f64> {
    let q = model.quad_form(&hs.b);
    if !(q > 1e-12 * model.trace()) {
        return Err(Error::DegenerateGeometry(format!(
            "bᴴRb = {q:e}: the sensing direction misses every scattering mode"
        )));
    }
    Ok(hs.n() as f64 / q)
}

/// A closed form together with its high-SNR approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub exact: f64,
    pub approx: f64,
}

/// ECR of the S-C design, an exponential SNR with mean p/(σ_c²Ω).
pub fn sc_ecr(params: &ScenarioParams, omega: f64) -> ClosedForm {
    exponential_rate(params.snr_c() / omega)
}

/// OP of the S-C design.
pub fn sc_op(params: &ScenarioParams, omega: f64) -> ClosedForm {
    exponential_outage(params.snr_c() / omega, params.outage_snr())
}

/// E{log₂(1 + X)} and its high-SNR form for X exponential with the given mean.
pub fn exponential_rate(mean_snr: f64) -> ClosedForm {
    ClosedForm { exact: exponential_ecr(mean_snr), approx: mean_snr.log2() - EULER_GAMMA * LOG2_E }
}

/// Pr{X < threshold} for X exponential with the given mean.
pub fn exponential_outage(mean_snr: f64, threshold: f64) -> ClosedForm {
    let x = threshold / mean_snr;
    ClosedForm { exact: -(-x).exp_m1(), approx: x }
}

/// OP of the C-C design: CDF of Σλ_n|h_n|² at σ_c²(2^{R₀}−1)/p.
pub fn cc_op(params: &ScenarioParams, eigs: &[f64]) -> Result<ClosedForm> {
    gamma_sum_outage(eigs, params.snr_c(), params.outage_snr())
}

/// Outage of log₂(1 + snr·Σλ_n|h_n|²) below log₂(1 + threshold), with the
/// high-SNR form thresholdⁿ/(snrⁿ·n!·Πλ_n).
pub fn gamma_sum_outage(eigs: &[f64], snr: f64, threshold: f64) -> Result<ClosedForm> {
    let x = threshold / snr;
    let exact = expsum_cdf(eigs, x)?;
    Ok(ClosedForm { exact, approx: gamma_sum_outage_ln_approx(eigs, snr, threshold).exp() })
}

/// ln of the high-SNR outage form.
pub fn gamma_sum_outage_ln_approx(eigs: &[f64], snr: f64, threshold: f64) -> f64 {
    let n = eigs.len() as f64;
    let ln_prod: f64 = eigs.iter().map(|l| l.ln()).sum();
    n * (threshold / snr).ln() - ln_gamma(n + 1.0) - ln_prod
}

/// ln of the exact C-C outage; stays finite far below the smallest double.
pub fn gamma_sum_ln_outage(eigs: &[f64], snr: f64, threshold: f64) -> Result<f64> {
    expsum_ln_cdf(eigs, threshold / snr)
}

/// ECR of the C-C design, ζ(R, p/σ_c²), with log₂(p/σ_c²) + υ_R.
pub fn cc_ecr(params: &ScenarioParams, eigs: &[f64]) -> Result<ClosedForm> {
    gamma_sum_rate(eigs, params.snr_c())
}

/// ζ(eigs, snr) and its high-SNR form log₂snr + υ(eigs).
pub fn gamma_sum_rate(eigs: &[f64], snr: f64) -> Result<ClosedForm> {
    Ok(ClosedForm { exact: zeta_ecr(eigs, snr)?, approx: snr.log2() + upsilon(eigs)? })
}

/// Eigenvalues of D + s·vvᴴ for diagonal D, largest first.
pub(crate) fn diag_plus_rank_one_eigs(d: &[f64], v: &[Complex64], s: f64) -> Result<Vec<f64>> {
    let n = d.len();
    let m = CMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { Complex64::from(d[i]) } else { Complex64::from(0.0) };
        diag + v[i] * v[j].conj() * s
    });
    hermitian_eigenvalues(m)
}

/// √λ ∘ Uᴴh_s, the sensing direction seen through R^{1/2}.
pub(crate) fn whitened_sensing(model: &CorrelatedChannelModel, hs: &SensingChannel) -> Vec<Complex64> {
    model.project(&hs.h_s).iter().zip(&model.eigs).map(|(g, l)| g * l.sqrt()).collect()
}

/// Positive eigenvalues of Δ = R^{1/2}((p/σ_s²)Lα_s‖h_s‖²h_sh_sᴴ + I)R^{1/2}.
pub fn delta_eigs(model: &CorrelatedChannelModel, hs: &SensingChannel, params: &ScenarioParams) -> Result<Vec<f64>> {
    let v = whitened_sensing(model, hs);
    let gamma = params.snr_s() * params.l() * params.alpha_s * hs.norm_sq;
    positive(diag_plus_rank_one_eigs(&model.eigs, &v, gamma)?)
}

pub(crate) fn positive(eigs: Vec<f64>) -> Result<Vec<f64>> {
    let max = eigs.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::Numeric("matrix has no positive eigenvalue".into()));
    }
    Ok(eigs.into_iter().filter(|&l| l > 1e-12 * max).collect())
}

/// Average SR of the C-C design, (υ_Δ − υ_R)/L.
pub fn cc_avg_sr(model: &CorrelatedChannelModel, hs: &SensingChannel, params: &ScenarioParams) -> Result<ClosedForm> {
    let l = params.l();
    let ups_r = upsilon(&model.eigs)?;
    let exact = (upsilon(&delta_eigs(model, hs, params)?)? - ups_r) / l;
    let xi = xi(model, hs, params)?;
    let approx = (params.p.log2() - xi.log2() - EULER_GAMMA * LOG2_E - ups_r) / l;
    Ok(ClosedForm { exact: exact.max(0.0), approx })
}

/// Ξ = σ_s²Ω/(Lα_s‖h_s‖⁴).
pub fn xi(model: &CorrelatedChannelModel, hs: &SensingChannel, params: &ScenarioParams) -> Result<f64> {
    Ok(params.sigma2_s * omega(model, hs)? / (params.l() * params.alpha_s * hs.norm_sq.powi(2)))
}

/// Which branch of the Pareto solution applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParetoCase {
    CommCentric,
    Interior,
    SensingCentric,
    /// h_c and h_s are collinear, one beam maximizes both rates.
    Collinear,
}

/// Pareto solution expressed through the Gram data of h₁ = √(p/σ_c²)h_c and
/// h₂ = √((p/σ_s²)Lα_s‖h_s‖²)h_s.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParetoPoint {
    pub case: ParetoCase,
    pub sr: f64,
    pub cr: f64,
    /// Root of the boundary equation (interior case).
    pub r_star: Option<f64>,
    /// |g(ℛ*)| relative to ‖h₁‖²‖h₂‖².
    pub residual: Option<f64>,
    /// Beam weights w ∝ a·h₁* + b·e^{j∠ρ}·h₂*, normalized so ‖w‖ = 1.
    pub a: f64,
    pub b: f64,
}

/// Pareto solution from ‖h₁‖², ‖h₂‖² and |ρ| = |h₁ᴴh₂| alone.
pub fn pareto_scalar(n1: f64, n2: f64, rho: f64, tau: f64, frame_len: f64) -> Result<ParetoPoint> {
    if !(0.0..=1.0).contains(&tau) {
        return domain(format!("τ must lie in [0, 1], got {tau}"));
    }
    if !(n1 > 0.0 && n2 > 0.0) {
        return domain("both channels need positive gain");
    }
    let l = frame_len;
    let rate = |a: f64, b: f64| {
        let norm2 = a * a * n1 + b * b * n2 + 2.0 * a * b * rho;
        let x = (a * n1 + b * rho).powi(2) / norm2;
        let y = (a * rho + b * n2).powi(2) / norm2;
        (x.ln_1p() * LOG2_E, y.ln_1p() * LOG2_E / l)
    };
    let point = |case, a: f64, b: f64, r_star, residual| {
        let norm = (a * a * n1 + b * b * n2 + 2.0 * a * b * rho).sqrt();
        let (cr, sr) = rate(a, b);
        ParetoPoint { case, sr, cr, r_star, residual, a: a / norm, b: b / norm }
    };
    let (a_cc, a_sc) = (1.0 / n1.sqrt(), 1.0 / n2.sqrt());
    if rho >= (n1 * n2).sqrt() * (1.0 - 1e-12) {
        return Ok(point(ParetoCase::Collinear, a_cc, 0.0, None, None));
    }
    let cr_cc = n1.ln_1p() * LOG2_E;
    let sr_cc = (rho * rho / n1).ln_1p() * LOG2_E / l;
    let sr_sc = n2.ln_1p() * LOG2_E / l;
    let cr_sc = (rho * rho / n2).ln_1p() * LOG2_E;
    if tau <= sr_cc / (cr_cc + sr_cc) {
        return Ok(point(ParetoCase::CommCentric, a_cc, 0.0, None, None));
    }
    if tau >= sr_sc / (cr_sc + sr_sc) {
        return Ok(point(ParetoCase::SensingCentric, 0.0, a_sc, None, None));
    }
    let det = n1 * n2 - rho * rho;
    let t = |r: f64| (((1.0 - tau) * r * LN_2).exp_m1(), (tau * l * r * LN_2).exp_m1());
    let g = |r: f64| {
        let (t1, t2) = t(r);
        n1 * t2 + n2 * t1 - 2.0 * rho * (t1 * t2).sqrt() - det
    };
    let mut hi = (cr_cc / (1.0 - tau)).min(sr_sc / tau);
    let mut expansions = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Solver(format!(
                "no sign change of the boundary equation up to ℛ = {hi:e} at τ = {tau}"
            )));
        }
    }
    // Largest sign change on a coarse scan, then bisection.
    const SCAN: usize = 64;
    let mut lo = 0.0;
    let mut upper = hi;
    for i in (0..SCAN).rev() {
        let x = hi * i as f64 / SCAN as f64;
        if g(x) < 0.0 {
            lo = x;
            upper = hi * (i + 1) as f64 / SCAN as f64;
            break;
        }
    }
    let mut hi = upper;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_star = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    let residual = g(r_star).abs() / (n1 * n2);
    let (t1, t2) = t(r_star);
    let xi1 = n1 - (t1 / t2).sqrt() * rho;
    let xi2 = n2 - (t2 / t1).sqrt() * rho;
    let a = xi2 * t1.sqrt();
    let b = xi1 * t2.sqrt();
    Ok(point(ParetoCase::Interior, a, b, Some(r_star), Some(residual)))
}

/// Full Pareto beamformer result.
#[derive(Debug, Clone)]
pub struct BeamformerResult {
    pub w: CVector,
    pub tau: f64,
    /// SR and CR by direct substitution of w.
    pub sr: f64,
    pub cr: f64,
    pub r_star: Option<f64>,
    pub residual: Option<f64>,
    pub case: ParetoCase,
}

/// Pareto-optimal beam for one channel draw h_c.
pub fn pareto_beamformer(
    tau: f64,
    hc: &CVector,
    hs: &SensingChannel,
    params: &ScenarioParams,
) -> Result<BeamformerResult> {
    let c1 = params.snr_c().sqrt();
    let c2 = (params.snr_s() * params.l() * params.alpha_s * hs.norm_sq).sqrt();
    let h1 = hc * Complex64::from(c1);
    let h2 = &hs.h_s * Complex64::from(c2);
    let rho = h1.dotc(&h2);
    let pt = pareto_scalar(h1.norm_squared(), h2.norm_squared(), rho.norm(), tau, params.l())?;
    let phase = Complex64::from_polar(1.0, rho.arg());
    let w = h1.map(|z| z.conj() * pt.a) + h2.map(|z| z.conj() * phase * pt.b);
    let w = &w / Complex64::from(w.norm());
    let sr = sr_instantaneous(&w, hs, params);
    let cr = cr_instantaneous(&w, hc, params);
    Ok(BeamformerResult { w, tau, sr, cr, r_star: pt.r_star, residual: pt.residual, case: pt.case })
}

/// C-C beam under S-CSI: the principal column of U.
pub fn scsi_cc_beamformer(model: &CorrelatedChannelModel) -> CVector {
    model.principal_column().map(|z| z.conj())
}

/// ECR of the S-CSI C-C design (exponential with mean pλ₁/σ_c²).
pub fn scsi_cc_ecr(params: &ScenarioParams, lambda1: f64) -> ClosedForm {
    exponential_rate(params.snr_c() * lambda1)
}

/// OP of the S-CSI C-C design.
pub fn scsi_cc_op(params: &ScenarioParams, lambda1: f64) -> ClosedForm {
    exponential_outage(params.snr_c() * lambda1, params.outage_snr())
}

/// Γ = Lα_s‖h_s‖²·|a⋆ᴴh_s|² for the principal column a⋆.
pub fn gamma_scsi(model: &CorrelatedChannelModel, hs: &SensingChannel, params: &ScenarioParams) -> f64 {
    let a = model.principal_column();
    params.l() * params.alpha_s * hs.norm_sq * a.dotc(&hs.h_s).norm_sqr()
}

/// SR of the S-CSI C-C design, (1/L)log₂(1 + (p/σ_s²)Γ).
pub fn scsi_cc_sr(model: &CorrelatedChannelModel, hs: &SensingChannel, params: &ScenarioParams) -> ClosedForm {
    let l = params.l();
    let gamma = gamma_scsi(model, hs, params);
    ClosedForm {
        exact: (params.snr_s() * gamma).ln_1p() * LOG2_E / l,
        approx: (params.p.log2() + (gamma / params.sigma2_s).log2()) / l,
    }
}

/// Channel knowledge at the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsiMode {
    Icsi,
    Scsi,
}

/// Sensing rate of a band/power split: ((1−κ)/L)log₂(1 + ((1−ι)/(1−κ))·x).
pub fn fdsac_sr(kappa: f64, iota: f64, x: f64, frame_len: f64) -> f64 {
    split_rate(1.0 - kappa, 1.0 - iota, x) / frame_len
}

/// κ·log₂(1 + (ι/κ)·x), zero on an empty band.
pub fn split_rate(band: f64, power: f64, x: f64) -> f64 {
    if band <= 0.0 || power <= 0.0 {
        return 0.0;
    }
    band * (power / band * x).ln_1p() * LOG2_E
}

/// FDSAC closed forms: SR, ergodic CR and OP with their high-SNR forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdsacMetrics {
    pub sr: ClosedForm,
    pub ecr: ClosedForm,
    pub op: ClosedForm,
}

/// Metrics of a split with communication band κ.
///
/// `comm_power` and `sens_power` are the power fractions of the two bands,
/// `x_s` the full-band sensing SNR term and `snr_c` the full-band
/// communication SNR.
#[allow(clippy::too_many_arguments)]
pub(crate) fn split_metrics(
    model: &CorrelatedChannelModel,
    csi: CsiMode,
    kappa: f64,
    comm_power: f64,
    sens_power: f64,
    x_s: f64,
    snr_c: f64,
    params: &ScenarioParams,
) -> Result<FdsacMetrics> {
    let l = params.l();
    let band_s = 1.0 - kappa;
    let sr = ClosedForm {
        exact: split_rate(band_s, sens_power, x_s) / l,
        approx: if band_s > 0.0 && sens_power > 0.0 { band_s * (sens_power / band_s * x_s).log2() / l } else { 0.0 },
    };
    if kappa <= 0.0 || comm_power <= 0.0 {
        let zero = ClosedForm { exact: 0.0, approx: 0.0 };
        return Ok(FdsacMetrics { sr, ecr: zero, op: ClosedForm { exact: 1.0, approx: 1.0 } });
    }
    let snr = comm_power / kappa * snr_c;
    let threshold = (params.r0 / kappa).exp2() - 1.0;
    let (ecr, op) = match csi {
        CsiMode::Icsi => (gamma_sum_rate(&model.eigs, snr)?, gamma_sum_outage(&model.eigs, snr, threshold)?),
        CsiMode::Scsi => {
            let mean = snr * model.lambda1();
            (exponential_rate(mean), exponential_outage(mean, threshold))
        }
    };
    let scale = |c: ClosedForm| ClosedForm { exact: kappa * c.exact, approx: kappa * c.approx };
    Ok(FdsacMetrics { sr, ecr: scale(ecr), op })
}

/// Downlink FDSAC metrics with band split κ and power split ι.
pub fn fdsac_downlink_metrics(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    csi: CsiMode,
) -> Result<FdsacMetrics> {
    let x = params.snr_s() * params.l() * params.alpha_s * hs.norm_sq.powi(2);
    split_metrics(model, csi, params.kappa, params.iota, 1.0 - params.iota, x, params.snr_c(), params)
}

/// FDSAC downlink (SR, ergodic CR).
pub fn fdsac_downlink(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    csi: CsiMode,
) -> Result<(f64, f64)> {
    let m = fdsac_downlink_metrics(model, hs, params, csi)?;
    Ok((m.sr.exact, m.ecr.exact))
}

/// Probe powers for the high-SNR fits, in dB.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HighSnrProbe {
    pub p1_db: f64,
    pub p2_db: f64,
}

impl Default for HighSnrProbe {
    fn default() -> Self {
        Self { p1_db: 60.0, p2_db: 70.0 }
    }
}

/// Measured and analytic high-SNR behaviour of one metric family.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub slope: f64,
    pub offset: f64,
    /// None when the outage underflows at every probe pair.
    pub diversity: Option<f64>,
    pub array_gain: Option<f64>,
    pub analytic_slope: Option<f64>,
    pub analytic_diversity: Option<f64>,
    pub probe: HighSnrProbe,
}

/// Fits slope and offset of `rate(snr)` between the probe powers.
pub fn fit_slope(rate: impl Fn(f64) -> Result<f64>, probe: HighSnrProbe) -> Result<(f64, f64)> {
    let (p1, p2) = (crate::params::db_to_linear(probe.p1_db), crate::params::db_to_linear(probe.p2_db));
    let (r1, r2) = (rate(p1)?, rate(p2)?);
    let slope = (r2 - r1) / (p2.log2() - p1.log2());
    let offset = if slope > 0.0 { p2.log2() - r2 / slope } else { f64::NAN };
    Ok((slope, offset))
}

/// Fits diversity and array gain from ln OP(snr). Probes step down 10 dB at a
/// time while the outage is not representable, giving up below 0 dB. A fit is
/// kept only when the slope one decade lower agrees with it to 5%; otherwise
/// the probes are not in the high-SNR regime and the diversity is reported as
/// unmeasurable.
pub fn fit_diversity(
    ln_op: impl Fn(f64) -> Result<f64>,
    probe: HighSnrProbe,
) -> Result<Option<(f64, f64, HighSnrProbe)>> {
    let floor = f64::MIN_POSITIVE.ln();
    let slope = |lo_db: f64, hi_db: f64| -> Result<Option<(f64, f64)>> {
        let (p1, p2) = (crate::params::db_to_linear(lo_db), crate::params::db_to_linear(hi_db));
        let (l1, l2) = (ln_op(p1)?, ln_op(p2)?);
        if l1.is_finite() && l2.is_finite() && l2 > floor {
            Ok(Some((-(l2 - l1) / (p2.ln() - p1.ln()), l2)))
        } else {
            Ok(None)
        }
    };
    let mut probe = probe;
    while probe.p1_db >= 0.0 {
        if let Some((d, l2)) = slope(probe.p1_db, probe.p2_db)? {
            let step = probe.p2_db - probe.p1_db;
            let stable = match slope(probe.p1_db - step, probe.p1_db)? {
                Some((d_low, _)) => (d - d_low).abs() <= 0.05 * d.abs(),
                None => false,
            };
            if !stable {
                return Ok(None);
            }
            let p2 = crate::params::db_to_linear(probe.p2_db);
            let gain = (-l2 / d).exp() / p2;
            return Ok(Some((d, gain, probe)));
        }
        probe.p1_db -= 10.0;
        probe.p2_db -= 10.0;
    }
    Ok(None)
}

/// Slope, offset, diversity and array gain of a metric family.
pub fn asymptotics(
    rate: impl Fn(f64) -> Result<f64>,
    ln_op: Option<&dyn Fn(f64) -> Result<f64>>,
    probe: HighSnrProbe,
    analytic_slope: Option<f64>,
    analytic_diversity: Option<f64>,
) -> Result<AsymptoticsReport> {
    let (slope, offset) = fit_slope(rate, probe)?;
    let (diversity, array_gain) = match ln_op {
        Some(f) => match fit_diversity(f, probe)? {
            Some((d, g, _)) => (Some(d), Some(g)),
            None => (None, None),
        },
        None => (None, None),
    };
    Ok(AsymptoticsReport { slope, offset, diversity, array_gain, analytic_slope, analytic_diversity, probe })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pareto_endpoints() {
        let (n1, n2, rho) = (40.0, 25.0, 12.0);
        assert_eq!(pareto_scalar(n1, n2, rho, 0.0, 4.0).unwrap().case, ParetoCase::CommCentric);
        assert_eq!(pareto_scalar(n1, n2, rho, 1.0, 4.0).unwrap().case, ParetoCase::SensingCentric);
    }

    #[test]
    fn pareto_interior_meets_both_constraints() {
        let (n1, n2, rho) = (4.0e5, 4.8e4, 3.0e4);
        for i in 1..40 {
            let tau = i as f64 / 40.0;
            let pt = pareto_scalar(n1, n2, rho, tau, 4.0).unwrap();
            if let Some(r) = pt.r_star {
                assert!(pt.residual.unwrap() < 1e-9, "residual {:?}", pt.residual);
                assert!(pt.sr >= tau * r - 1e-9, "sr {} < {}", pt.sr, tau * r);
                assert!(pt.cr >= (1.0 - tau) * r - 1e-9);
            }
        }
    }

    #[test]
    fn exponential_kernel_high_snr() {
        let c = exponential_rate(1e6);
        assert_relative_eq!(c.exact, c.approx, epsilon = 1e-4);
    }
}
