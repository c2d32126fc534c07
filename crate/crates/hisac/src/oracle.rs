//! Closed forms paired with Monte Carlo oracles, one per
//! (link, metric, design, CSI) combination.
//!
//! Ergodic rates and outage probabilities are sampled directly from channel
//! draws. Sensing rates are deterministic given h_s, so their oracle
//! simulates the echo and measures the squared error of the LMMSE estimate
//! of the target response; the rate follows from (1/L)·log₂(α_s/MSE).

use std::f64::consts::{LN_2, LOG2_E};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::channels::{correlation_model, sensing_channel, CorrelatedChannelModel, SensingChannel, SensingProjection};
use crate::downlink::{
    cc_avg_sr, cc_ecr, cc_op, exponential_outage, exponential_rate, fdsac_downlink_metrics, omega, pareto_scalar,
    sc_ecr, sc_op, sc_sr_closed, scsi_cc_ecr, scsi_cc_op, scsi_cc_sr, sr_from_gain, ClosedForm, CsiMode,
};
use crate::error::{domain, Error, Result};
use crate::linalg::cn;
use crate::montecarlo::{chunk_rng, comm_coords, estimate_ecr, estimate_op, Estimate, McConfig};
use crate::params::ScenarioParams;
use crate::region::{scsi_pareto_beam, CompressedScene};
use crate::uplink::{
    cc_sic_avg_sr, cc_sic_comm, cc_sic_sr_from_gram, fdsac_uplink_metrics, sc_sic_cr_from_gram, sc_sic_ecr, sc_sic_op,
    sc_sic_sr, scsi_cc_sic_comm, scsi_cc_sic_sr, scsi_detection_vector, scsi_sc_comm,
};

/// Everything that depends on geometry but not on powers or noise.
#[derive(Debug, Clone)]
pub struct Scene {
    pub cfg: ArrayConfig,
    pub model: CorrelatedChannelModel,
    pub hs: SensingChannel,
    pub proj: SensingProjection,
    pub compressed: CompressedScene,
}

impl Scene {
    pub fn new(cfg: &ArrayConfig, params: &ScenarioParams) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        let model = correlation_model(cfg, params)?;
        let hs = sensing_channel(cfg, params)?;
        Ok(Self::assemble(*cfg, model, hs))
    }

    fn assemble(cfg: ArrayConfig, model: CorrelatedChannelModel, hs: SensingChannel) -> Self {
        let proj = SensingProjection::new(&model, &hs);
        let compressed = CompressedScene::new(&model, &hs);
        Self { cfg, model, hs, proj, compressed }
    }

    /// Copy whose correlation eigenvalues are multiplied by `factor`.
    pub fn with_scaled_eigs(&self, factor: f64) -> Self {
        let mut model = self.model.clone();
        model.eigs.iter_mut().for_each(|l| *l *= factor);
        model.variances.iter_mut().for_each(|v| *v *= factor);
        Self::assemble(self.cfg, model, self.hs.clone())
    }
}

/// Uplink or downlink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Link {
    Downlink,
    Uplink,
}

/// Which performance figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Sensing rate (average SR where it is random).
    Sr,
    /// Ergodic communication rate.
    Ecr,
    /// Outage probability of the communication rate.
    Op,
}

/// Beamforming or SIC design. On the uplink `Sc` and `Cc` name the SIC order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    Sc,
    Cc,
    Pareto,
    Fdsac,
}

macro_rules! text_enum {
    ($t:ty, $($v:path => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($v => $s),+ })
            }
        }
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)+
                    _ => Err(Error::Config(format!("unknown value `{s}`, expected one of: {}", [$($s),+].join(", ")))),
                }
            }
        }
    };
}

text_enum!(Link, Link::Downlink => "downlink", Link::Uplink => "uplink");
text_enum!(Metric, Metric::Sr => "sr", Metric::Ecr => "ecr", Metric::Op => "op");
text_enum!(Design, Design::Sc => "sc", Design::Cc => "cc", Design::Pareto => "pareto", Design::Fdsac => "fdsac");
text_enum!(CsiMode, CsiMode::Icsi => "icsi", CsiMode::Scsi => "scsi");

/// One evaluation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub link: Link,
    pub metric: Metric,
    pub design: Design,
    pub csi: CsiMode,
    /// Pareto weight; only read by the Pareto design.
    pub tau: f64,
    /// Randomizations for the S-CSI Pareto beam.
    pub randomizations: usize,
}

impl Query {
    pub fn new(link: Link, metric: Metric, design: Design, csi: CsiMode) -> Self {
        Self { link, metric, design, csi, tau: 0.5, randomizations: 10_000 }
    }

    pub fn name(&self) -> String {
        format!("{}/{}/{}/{}", self.link, self.design, self.csi, self.metric)
    }
}

/// A per-draw sample.
pub type Draw<'a> = Box<dyn Fn(&mut ChaCha20Rng) -> f64 + Sync + 'a>;

/// How to estimate a metric by simulation.
pub enum Oracle<'a> {
    /// Mean of the sampled rate.
    Mean(Draw<'a>),
    /// Frequency of the sampled rate falling below R₀.
    Outage(Draw<'a>, f64),
    /// Mean squared estimation error; the rate is `scale`·log₂(α_s/MSE).
    Mmse { sq_err: Draw<'a>, alpha: f64, scale: f64 },
}

impl Oracle<'_> {
    pub fn run(&self, mc: &McConfig) -> Result<Estimate> {
        match self {
            Oracle::Mean(f) => estimate_ecr(mc, f),
            Oracle::Outage(f, r0) => estimate_op(mc, f, *r0),
            Oracle::Mmse { sq_err, alpha, scale } => {
                let e = estimate_ecr(mc, sq_err)?;
                if !(e.mean > 0.0) {
                    return Err(Error::Numeric("estimated MSE is not positive".into()));
                }
                Ok(Estimate { mean: scale * (alpha / e.mean).log2(), se: scale * e.se / (e.mean * LN_2), n: e.n })
            }
        }
    }
}

/// Closed form, its high-SNR form and the matching oracle.
pub struct Evaluation<'a> {
    pub closed_form: f64,
    pub approx: f64,
    pub oracle: Oracle<'a>,
}

impl Evaluation<'_> {
    fn from(c: ClosedForm, oracle: Oracle<'_>) -> Evaluation<'_> {
        Evaluation { closed_form: c.exact, approx: c.approx, oracle }
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() * LOG2_E
}

fn norm_sq(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}

/// Echo model y = k·h·β + √p_c·h_c·s + n in the compressed basis. `interference`
/// holds p_c·λ_m for the leading coordinates, `noise` the white noise power.
fn mmse_draw<'a>(h: &'a [Complex64], k: f64, alpha: f64, noise: f64, interference: Vec<f64>) -> Draw<'a> {
    // C_z⁻¹a with a = k·h, and the LMMSE gain α/(1 + α·aᴴC_z⁻¹a).
    let var: Vec<f64> = (0..h.len()).map(|i| noise + interference.get(i).copied().unwrap_or(0.0)).collect();
    let wv: Vec<Complex64> = h.iter().zip(&var).map(|(h, v)| h * k / v).collect();
    let quad: f64 = h.iter().zip(&wv).map(|(h, w)| (h.conj() * w).re * k).sum();
    let gain = alpha / (1.0 + alpha * quad);
    let (sa, sn) = (alpha.sqrt(), noise.sqrt());
    Box::new(move |rng| {
        let beta = cn(rng) * sa;
        let s = cn(rng);
        let mut acc = Complex64::from(0.0);
        for (i, (h, w)) in h.iter().zip(&wv).enumerate() {
            let mut y = h * k * beta + cn(rng) * sn;
            if let Some(pl) = interference.get(i) {
                y += cn(rng) * pl.sqrt() * s;
            }
            acc += w.conj() * y;
        }
        (acc * gain - beta).norm_sqr()
    })
}

/// LMMSE oracle for the SR of a beam with gain |h_sᵀw|² at SNR p/σ².
fn beam_sr_oracle<'a>(
    scene: &'a Scene,
    power: f64,
    noise: f64,
    gain: f64,
    params: &ScenarioParams,
    scale: f64,
) -> Oracle<'a> {
    let k = (power * params.l() * gain).sqrt();
    Oracle::Mmse {
        sq_err: mmse_draw(&scene.compressed.h, k, params.alpha_s, noise, Vec::new()),
        alpha: params.alpha_s,
        scale,
    }
}

fn rate_oracle<'a>(metric: Metric, params: &ScenarioParams, f: Draw<'a>) -> Oracle<'a> {
    match metric {
        Metric::Op => Oracle::Outage(f, params.r0),
        _ => Oracle::Mean(f),
    }
}

fn pick(metric: Metric, ecr: ClosedForm, op: ClosedForm) -> ClosedForm {
    if metric == Metric::Op {
        op
    } else {
        ecr
    }
}

/// Evaluates `q` with closed forms taken from `cf` and oracles drawn from
/// `truth`. The two scenes normally coincide.
pub fn evaluate<'a>(cf: &Scene, truth: &'a Scene, params: &ScenarioParams, q: &Query) -> Result<Evaluation<'a>> {
    params.validate()?;
    match q.link {
        Link::Downlink => downlink(cf, truth, params, q),
        Link::Uplink => uplink(cf, truth, params, q),
    }
}

fn downlink<'a>(cf: &Scene, t: &'a Scene, params: &ScenarioParams, q: &Query) -> Result<Evaluation<'a>> {
    let p = *params;
    let snr_c = p.snr_c();
    let eigs = &t.model.eigs;
    let hn2 = t.hs.norm_sq;
    let sr_scale = 1.0 / p.l();
    Ok(match (q.design, q.csi, q.metric) {
        (Design::Sc, _, Metric::Sr) => {
            let c = sc_sr_closed(&p, &cf.cfg, &cf.hs);
            let o = beam_sr_oracle(t, p.p, p.sigma2_s, hn2, &p, sr_scale);
            Evaluation { closed_form: c.exact, approx: c.high_snr, oracle: o }
        }
        (Design::Sc, _, m) => {
            let om = omega(&cf.model, &cf.hs)?;
            let c = pick(m, sc_ecr(&p, om), sc_op(&p, om));
            let f: Draw = Box::new(move |rng| {
                let c = comm_coords(eigs, rng);
                log2_1p(snr_c * t.proj.inner(&c).norm_sqr() / hn2)
            });
            Evaluation::from(c, rate_oracle(m, &p, f))
        }
        (Design::Cc, CsiMode::Icsi, Metric::Sr) => {
            let c = cc_avg_sr(&cf.model, &cf.hs, &p)?;
            let f: Draw = Box::new(move |rng| {
                let c = comm_coords(eigs, rng);
                sr_from_gain(t.proj.inner(&c).norm_sqr() / norm_sq(&c), &t.hs, &p)
            });
            Evaluation::from(c, Oracle::Mean(f))
        }
        (Design::Cc, CsiMode::Icsi, m) => {
            let c = if m == Metric::Op { cc_op(&p, &cf.model.eigs)? } else { cc_ecr(&p, &cf.model.eigs)? };
            let f: Draw = Box::new(move |rng| log2_1p(snr_c * norm_sq(&comm_coords(eigs, rng))));
            Evaluation::from(c, rate_oracle(m, &p, f))
        }
        (Design::Cc, CsiMode::Scsi, Metric::Sr) => {
            let c = scsi_cc_sr(&cf.model, &cf.hs, &p);
            let gain = t.proj.g[0].norm_sqr();
            Evaluation::from(c, beam_sr_oracle(t, p.p, p.sigma2_s, gain, &p, sr_scale))
        }
        (Design::Cc, CsiMode::Scsi, m) => {
            let l1 = cf.model.lambda1();
            let c = pick(m, scsi_cc_ecr(&p, l1), scsi_cc_op(&p, l1));
            let s1 = t.model.lambda1().sqrt();
            let f: Draw = Box::new(move |rng| log2_1p(snr_c * (cn(rng) * s1).norm_sqr()));
            Evaluation::from(c, rate_oracle(m, &p, f))
        }
        (Design::Pareto, CsiMode::Icsi, m) => {
            let tau = q.tau;
            if !(0.0..=1.0).contains(&tau) {
                return domain(format!("τ must lie in [0, 1], got {tau}"));
            }
            let k2 = p.snr_s() * p.l() * p.alpha_s * hn2;
            let n2 = k2 * hn2;
            let f: Draw = Box::new(move |rng| {
                let c = comm_coords(eigs, rng);
                let n1 = snr_c * norm_sq(&c);
                let rho = (snr_c * k2).sqrt() * t.proj.inner(&c).norm();
                match pareto_scalar(n1, n2, rho, tau, p.l()) {
                    Ok(pt) if m == Metric::Sr => pt.sr,
                    Ok(pt) => pt.cr,
                    Err(_) if m == Metric::Sr => log2_1p(rho * rho / n1) / p.l(),
                    Err(_) => log2_1p(n1),
                }
            });
            let nan = ClosedForm { exact: f64::NAN, approx: f64::NAN };
            Evaluation::from(nan, rate_oracle(m, &p, f))
        }
        (Design::Pareto, CsiMode::Scsi, m) => {
            let u_cf = scsi_pareto_beam(&cf.compressed, q.tau, q.randomizations, &mut chunk_rng(0, 0))?;
            let u = scsi_pareto_beam(&t.compressed, q.tau, q.randomizations, &mut chunk_rng(0, 0))?;
            if m == Metric::Sr {
                let gain = cf.compressed.h_form(&u_cf);
                let c = sr_from_gain(gain, &cf.hs, &p);
                let o = beam_sr_oracle(t, p.p, p.sigma2_s, t.compressed.h_form(&u), &p, sr_scale);
                Evaluation {
                    closed_form: c,
                    approx: (p.snr_s() * p.l() * p.alpha_s * hn2 * gain).log2() / p.l(),
                    oracle: o,
                }
            } else {
                let mean = snr_c * cf.compressed.r_form(&u_cf);
                let c = pick(m, exponential_rate(mean), exponential_outage(mean, p.outage_snr()));
                let n = eigs.len();
                let f: Draw = Box::new(move |rng| {
                    let c = comm_coords(eigs, rng);
                    let x: Complex64 = u[..n].iter().zip(&c).map(|(u, c)| u.conj() * c).sum();
                    log2_1p(snr_c * x.norm_sqr())
                });
                Evaluation::from(c, rate_oracle(m, &p, f))
            }
        }
        (Design::Fdsac, csi, m) => {
            let c = fdsac_downlink_metrics(&cf.model, &cf.hs, &p, csi)?;
            let (kappa, iota) = (p.kappa, p.iota);
            match m {
                Metric::Sr => {
                    let o = if kappa >= 1.0 || iota >= 1.0 {
                        Oracle::Mean(Box::new(|_| 0.0))
                    } else {
                        beam_sr_oracle(
                            t,
                            p.p * (1.0 - iota) / (1.0 - kappa),
                            p.sigma2_s,
                            hn2,
                            &p,
                            (1.0 - kappa) / p.l(),
                        )
                    };
                    Evaluation::from(c.sr, o)
                }
                _ => {
                    let f = split_comm_draw(t, csi, kappa, iota, snr_c);
                    Evaluation::from(pick(m, c.ecr, c.op), rate_oracle(m, &p, f))
                }
            }
        }
    })
}

/// κ·log₂(1 + (power/κ)·snr·X) with X the channel gain of the CSI mode.
fn split_comm_draw(t: &Scene, csi: CsiMode, kappa: f64, power: f64, snr: f64) -> Draw<'_> {
    if kappa <= 0.0 || power <= 0.0 {
        return Box::new(|_| 0.0);
    }
    let s = power / kappa * snr;
    let eigs = &t.model.eigs;
    let s1 = t.model.lambda1().sqrt();
    Box::new(move |rng| {
        let x = match csi {
            CsiMode::Icsi => norm_sq(&comm_coords(eigs, rng)),
            CsiMode::Scsi => (cn(rng) * s1).norm_sqr(),
        };
        kappa * log2_1p(s * x)
    })
}

fn uplink<'a>(cf: &Scene, t: &'a Scene, params: &ScenarioParams, q: &Query) -> Result<Evaluation<'a>> {
    let p = *params;
    let s2 = p.noise_u();
    let snr_c = p.p_c / s2;
    let eigs = &t.model.eigs;
    let hn2 = t.hs.norm_sq;
    let sr_scale = 1.0 / p.l();
    Ok(match (q.design, q.csi, q.metric) {
        (Design::Pareto, ..) => return domain("the uplink has no Pareto design; use the time-sharing region"),
        (Design::Sc, _, Metric::Sr) => {
            let c = sc_sic_sr(&p, &cf.cfg, &cf.hs);
            let o = beam_sr_oracle(t, p.p_s, s2, hn2, &p, sr_scale);
            Evaluation { closed_form: c.exact, approx: c.high_snr, oracle: o }
        }
        (Design::Sc, CsiMode::Icsi, m) => {
            let c =
                if m == Metric::Op { sc_sic_op(&cf.model, &cf.hs, &p)? } else { sc_sic_ecr(&cf.model, &cf.hs, &p)? };
            let f: Draw = Box::new(move |rng| {
                let c = comm_coords(eigs, rng);
                sc_sic_cr_from_gram(norm_sq(&c), t.proj.inner(&c), hn2, &p)
            });
            Evaluation::from(c, rate_oracle(m, &p, f))
        }
        (Design::Sc, CsiMode::Scsi, m) => {
            let det_cf = scsi_detection_vector(&cf.model, &cf.hs, &p)?;
            let (ecr, op) = scsi_sc_comm(det_cf.kappa, &p)?;
            let det = scsi_detection_vector(&t.model, &t.hs, &p)?;
            let echo = p.p_s * p.alpha_s * hn2 * det.v.dotc(&t.hs.h_s).norm_sqr() + s2;
            let coords = det.coords;
            let f: Draw = Box::new(move |rng| {
                let c = comm_coords(eigs, rng);
                let x: Complex64 = coords.iter().zip(&c).map(|(v, c)| v.conj() * c).sum();
                log2_1p(p.p_c * x.norm_sqr() / echo)
            });
            Evaluation::from(pick(m, ecr, op), rate_oracle(m, &p, f))
        }
        (Design::Cc, CsiMode::Icsi, Metric::Sr) => {
            let c = cc_sic_avg_sr(&cf.model, &cf.hs, &p)?;
            let f: Draw = Box::new(move |rng| {
                let c = comm_coords(eigs, rng);
                cc_sic_sr_from_gram(norm_sq(&c), t.proj.inner(&c), hn2, &p)
            });
            Evaluation::from(c, Oracle::Mean(f))
        }
        (Design::Cc, CsiMode::Icsi, m) => {
            let (ecr, op) = cc_sic_comm(&cf.model, &p)?;
            let f: Draw = Box::new(move |rng| log2_1p(snr_c * norm_sq(&comm_coords(eigs, rng))));
            Evaluation::from(pick(m, ecr, op), rate_oracle(m, &p, f))
        }
        (Design::Cc, CsiMode::Scsi, Metric::Sr) => {
            let c = scsi_cc_sic_sr(&cf.model, &cf.hs, &p);
            let k = (p.p_s * p.l() * hn2).sqrt();
            let interference: Vec<f64> = eigs.iter().map(|l| p.p_c * l).collect();
            let o = Oracle::Mmse {
                sq_err: mmse_draw(&t.compressed.h, k, p.alpha_s, s2, interference),
                alpha: p.alpha_s,
                scale: sr_scale,
            };
            Evaluation::from(c, o)
        }
        (Design::Cc, CsiMode::Scsi, m) => {
            let (ecr, op) = scsi_cc_sic_comm(&cf.model, &p);
            let s1 = t.model.lambda1().sqrt();
            let f: Draw = Box::new(move |rng| log2_1p(snr_c * (cn(rng) * s1).norm_sqr()));
            Evaluation::from(pick(m, ecr, op), rate_oracle(m, &p, f))
        }
        (Design::Fdsac, csi, m) => {
            let c = fdsac_uplink_metrics(&cf.model, &cf.hs, &p, csi)?;
            let kappa = p.kappa;
            match m {
                Metric::Sr => {
                    let o = if kappa >= 1.0 {
                        Oracle::Mean(Box::new(|_| 0.0))
                    } else {
                        beam_sr_oracle(t, p.p_s / (1.0 - kappa), s2, hn2, &p, (1.0 - kappa) / p.l())
                    };
                    Evaluation::from(c.sr, o)
                }
                _ => Evaluation::from(
                    pick(m, c.ecr, c.op),
                    rate_oracle(m, &p, split_comm_draw(t, csi, kappa, 1.0, snr_c)),
                ),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in ["sr", "ecr", "op"] {
            assert_eq!(s.parse::<Metric>().unwrap().to_string(), s);
        }
        for s in ["sc", "cc", "pareto", "fdsac"] {
            assert_eq!(s.parse::<Design>().unwrap().to_string(), s);
        }
        assert!("bogus".parse::<Link>().is_err());
    }

    #[test]
    fn uplink_pareto_is_rejected() {
        let params = ScenarioParams::default();
        let scene = Scene::new(&ArrayConfig::conventional_default(), &params).unwrap();
        let q = Query::new(Link::Uplink, Metric::Sr, Design::Pareto, CsiMode::Icsi);
        assert!(evaluate(&scene, &scene, &params, &q).is_err());
    }
}
