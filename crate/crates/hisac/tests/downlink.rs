use std::f64::consts::PI;

use approx::assert_relative_eq;
use hisac::array::ArrayConfig;
use hisac::channels::{
    correlation_model, correlation_model_with, sample_comm_channel, sensing_channel, VarianceProfile,
};
use hisac::downlink::*;
use hisac::linalg::{cn, conj, normalized, CVector};
use hisac::montecarlo::{chunk_rng, estimate_ecr, estimate_vec, McConfig};
use hisac::params::{db_to_linear, ScenarioParams};
use hisac::special::expsum_cdf;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn setup() -> (ArrayConfig, ScenarioParams, hisac::channels::CorrelatedChannelModel, hisac::channels::SensingChannel) {
    let cfg = ArrayConfig::holographic_default();
    let p = ScenarioParams::default();
    let m = correlation_model(&cfg, &p).unwrap();
    let hs = sensing_channel(&cfg, &p).unwrap();
    (cfg, p, m, hs)
}

fn matched(hs: &hisac::channels::SensingChannel) -> CVector {
    normalized(&conj(&hs.h_s))
}

#[test]
fn instantaneous_sensing_rate() {
    let (cfg, p, _, hs) = setup();
    let sr = sr_instantaneous(&matched(&hs), &hs, &p);
    assert_relative_eq!(sr, sc_sr_closed(&p, &cfg, &hs).exact, max_relative = 1e-12);

    // A beam orthogonal to h_s*.
    let mut rng = chunk_rng(5, 0);
    let v = CVector::from_iterator(400, (0..400).map(|_| cn(&mut rng)));
    let u = matched(&hs);
    let w = normalized(&(&v - &u * u.dotc(&v)));
    assert!(sr_instantaneous(&w, &hs, &p) < 1e-12);
    assert_relative_eq!(mmse_of_beam(&w, &hs, &p), p.alpha_s, max_relative = 1e-12);

    let m_matched = mmse_of_beam(&u, &hs, &p);
    let want = p.alpha_s / (1.0 + p.snr_s() * p.l() * p.alpha_s * hs.norm_sq.powi(2));
    assert_relative_eq!(m_matched, want, max_relative = 1e-12);
}

#[test]
fn sensing_rate_at_three_meters() {
    let cfg = ArrayConfig::holographic_default();
    let c = cfg.center();
    let p = ScenarioParams { r_target: [c[0], c[1], 3.0], ..ScenarioParams::default() };
    let hs = sensing_channel(&cfg, &p).unwrap();
    let sr = sc_sr_closed(&p, &cfg, &hs);
    let want = 0.25 * (1.0 + 4.0 * 1e3 * (400.0 / (36.0 * PI)).powi(2)).log2();
    assert_relative_eq!(sr.exact, want, max_relative = 1e-12);
    assert!((sr.exact - 3.90).abs() < 5e-3);
}

#[test]
fn sensing_rate_forms() {
    let (cfg, p, _, hs) = setup();
    let sr = sc_sr_closed(&p, &cfg, &hs);
    assert_relative_eq!(sr.aor_form, sr.exact, max_relative = 1e-12);
    assert!(sr.aor_bound >= sr.aor_form);
    let hi = ScenarioParams { sigma2_s: p.p / 1e6, ..p };
    let s = sc_sr_closed(&hi, &cfg, &hs);
    assert!((s.exact - s.high_snr).abs() < 1e-4);
}

#[test]
fn omega_is_one_without_correlation() {
    let cfg = ArrayConfig::holographic_default();
    let p = ScenarioParams::default();
    let iid = correlation_model_with(&cfg, &p, VarianceProfile::Iid).unwrap();
    let hs = sensing_channel(&cfg, &p).unwrap();
    assert_relative_eq!(omega(&iid, &hs).unwrap(), 1.0, max_relative = 1e-12);
}

/// One pass of full 400-element channel draws feeds every ergodic oracle.
#[test]
fn ergodic_metrics_against_channel_draws() {
    let (_, p, m, hs) = setup();
    let w_s = matched(&hs);
    let w_l = scsi_cc_beamformer(&m);
    let (kappa, iota) = (p.kappa, p.iota);
    let mc = McConfig { trials: 100_000, seed: 2024, ..McConfig::default() };
    let est = estimate_vec(&mc, 7, |rng, out| {
        let hc = sample_comm_channel(&m, rng);
        let sc_cr = cr_instantaneous(&w_s, &hc, &p);
        let w_c = normalized(&conj(&hc));
        let cl_cr = cr_instantaneous(&w_l, &hc, &p);
        out[0] = sc_cr;
        out[1] = f64::from(u8::from(sc_cr < p.r0));
        out[2] = cr_instantaneous(&w_c, &hc, &p);
        out[3] = sr_instantaneous(&w_c, &hs, &p);
        out[4] = cl_cr;
        out[5] = f64::from(u8::from(cl_cr < p.r0));
        out[6] = kappa * (1.0 + iota / kappa * p.snr_c() * hc.norm_squared()).log2();
    })
    .unwrap();
    let om = omega(&m, &hs).unwrap();
    let refs = [
        ("sc ecr", sc_ecr(&p, om).exact),
        ("sc op", sc_op(&p, om).exact),
        ("cc ecr", cc_ecr(&p, &m.eigs).unwrap().exact),
        ("cc sr", cc_avg_sr(&m, &hs, &p).unwrap().exact),
        ("scsi ecr", scsi_cc_ecr(&p, m.lambda1()).exact),
        ("scsi op", scsi_cc_op(&p, m.lambda1()).exact),
        ("fdsac ecr", fdsac_downlink(&m, &hs, &p, CsiMode::Icsi).unwrap().1),
    ];
    for (e, (name, cf)) in est.iter().zip(refs) {
        assert!(e.z_score(cf) < 3.0, "{name}: mc {} ± {} closed form {cf}", e.mean, e.se);
    }
}

#[test]
fn sc_high_snr_forms() {
    let (_, p, m, hs) = setup();
    let om = omega(&m, &hs).unwrap();
    let hi = ScenarioParams { sigma2_c: p.p / 1e6, ..p };
    let e = sc_ecr(&hi, om);
    assert!((e.exact - e.approx).abs() < 0.02);
    let want = (1e6f64).log2() - om.log2() - hisac::special::EULER_GAMMA / std::f64::consts::LN_2;
    assert_relative_eq!(e.approx, want, max_relative = 1e-12);

    assert!(sc_op(&ScenarioParams { r0: 1e-9, ..p }, om).exact < 1e-8);
    let huge = ScenarioParams { p: 1e12, ..p };
    let ratio = sc_op(&huge, om).exact * huge.p / (p.sigma2_c * om * p.outage_snr());
    assert_relative_eq!(ratio, 1.0, max_relative = 1e-3);
}

#[test]
fn cc_outage_on_two_eigenvalues() {
    let eigs = [2.0, 1.0];
    let p = ScenarioParams { r0: 1.0, sigma2_c: 0.1, ..ScenarioParams::default() };
    let op = cc_op(&p, &eigs).unwrap();
    assert_eq!(op.exact, expsum_cdf(&eigs, p.outage_snr() / p.snr_c()).unwrap());
    let mc = McConfig { trials: 100_000, seed: 9, ..McConfig::default() };
    let est = estimate_ecr(&mc, |rng| {
        let x = 2.0 * cn(rng).norm_sqr() + cn(rng).norm_sqr();
        f64::from(u8::from((1.0 + 10.0 * x).log2() < 1.0))
    })
    .unwrap();
    assert!(est.z_score(op.exact) < 3.0);
    let hi = ScenarioParams { sigma2_c: 1e-4, ..p };
    let o = cc_op(&hi, &eigs).unwrap();
    assert_relative_eq!(o.exact / o.approx, 1.0, max_relative = 1e-3);
}

#[test]
fn cc_rate_on_two_eigenvalues() {
    let eigs = [2.0, 1.0];
    let p = ScenarioParams { sigma2_c: 0.1, ..ScenarioParams::default() };
    let cf = cc_ecr(&p, &eigs).unwrap().exact;
    let mc = McConfig { trials: 100_000, seed: 10, ..McConfig::default() };
    let est = estimate_ecr(&mc, |rng| (1.0 + 10.0 * (2.0 * cn(rng).norm_sqr() + cn(rng).norm_sqr())).log2()).unwrap();
    assert!(est.z_score(cf) < 3.0);
    let hi = ScenarioParams { sigma2_c: 1e-6, ..p };
    let e = cc_ecr(&hi, &eigs).unwrap();
    assert!((e.exact - e.approx).abs() < 0.02);
    let c = 3.7;
    let scaled: Vec<f64> = eigs.iter().map(|l| l * c).collect();
    let lhs = cc_ecr(&p, &scaled).unwrap().exact;
    let rhs = cc_ecr(&ScenarioParams { p: c * p.p, ..p }, &eigs).unwrap().exact;
    assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
}

#[test]
fn cc_sensing_rate_limits() {
    let (_, p, m, hs) = setup();
    let low = ScenarioParams { p: 1e-12, ..p };
    assert!(cc_avg_sr(&m, &hs, &low).unwrap().exact < 1e-6);
    let hi = ScenarioParams { sigma2_s: p.p / 1e6, ..p };
    let s = cc_avg_sr(&m, &hs, &hi).unwrap();
    assert!((s.exact - s.approx).abs() < 0.05, "{} vs {}", s.exact, s.approx);
}

#[test]
fn pareto_beamformer_cases() {
    let (_, p, m, hs) = setup();
    let mut rng = chunk_rng(77, 0);
    for _ in 0..5 {
        let hc = sample_comm_channel(&m, &mut rng);
        let r0 = pareto_beamformer(0.0, &hc, &hs, &p).unwrap();
        let wc = normalized(&conj(&hc));
        assert!((r0.w.dotc(&wc).norm() - 1.0).abs() < 1e-10);
        assert_relative_eq!(r0.cr, (1.0 + p.snr_c() * hc.norm_squared()).log2(), max_relative = 1e-12);
        let r1 = pareto_beamformer(1.0, &hc, &hs, &p).unwrap();
        assert!((r1.w.dotc(&matched(&hs)).norm() - 1.0).abs() < 1e-10);
        for i in 1..40 {
            let tau = f64::from(i) / 40.0;
            let r = pareto_beamformer(tau, &hc, &hs, &p).unwrap();
            if r.case == ParetoCase::Interior {
                let rs = r.r_star.unwrap();
                assert!(r.residual.unwrap() < 1e-9);
                assert!(r.sr >= tau * rs - 1e-9 && r.cr >= (1.0 - tau) * rs - 1e-9);
            }
        }
    }
}

#[test]
fn statistical_cc_beam() {
    let (_, p, m, hs) = setup();
    let w = scsi_cc_beamformer(&m);
    assert_relative_eq!(m.quad_form(&conj(&w)), m.lambda1(), max_relative = 1e-10);
    let s = scsi_cc_sr(&m, &hs, &p);
    assert_relative_eq!(s.exact, sr_instantaneous(&w, &hs, &p), max_relative = 1e-12);
    let a = m.principal_column();
    let two_ways = gamma_scsi(&m, &hs, &p);
    let sum: Complex64 = a.iter().zip(hs.h_s.iter()).map(|(x, y)| x.conj() * y).sum();
    assert_relative_eq!(two_ways, p.l() * p.alpha_s * hs.norm_sq * sum.norm_sqr(), max_relative = 1e-10);
    assert!(scsi_cc_sr(&m, &hs, &ScenarioParams { p: 1e-15, ..p }).exact < 1e-9);
    assert!(scsi_cc_op(&ScenarioParams { r0: 1e-9, ..p }, m.lambda1()).exact < 1e-8);
}

#[test]
fn statistical_rate_never_beats_instantaneous() {
    let cfg = ArrayConfig::holographic_default();
    let m = correlation_model(&cfg, &ScenarioParams::default()).unwrap();
    let mut rng = chunk_rng(123, 0);
    for _ in 0..10 {
        let db: f64 = rng.random_range(-10.0..50.0);
        let p = ScenarioParams { sigma2_c: 1.0 / db_to_linear(db), ..ScenarioParams::default() };
        assert!(scsi_cc_ecr(&p, m.lambda1()).exact <= cc_ecr(&p, &m.eigs).unwrap().exact);
    }
}

#[test]
fn fdsac_limits() {
    let (cfg, p, m, hs) = setup();
    let sc = sc_sr_closed(&p, &cfg, &hs).exact;
    let edge = ScenarioParams { kappa: 0.0, iota: 0.0, ..p };
    assert_relative_eq!(fdsac_downlink(&m, &hs, &edge, CsiMode::Icsi).unwrap().0, sc, max_relative = 1e-12);
    assert!(fdsac_downlink(&m, &hs, &p, CsiMode::Icsi).unwrap().0 < sc);
}

#[test]
fn high_snr_fits() {
    let (cfg, p, m, hs) = setup();
    let (slope, _) = fit_slope(
        |x| Ok(sc_sr_closed(&ScenarioParams { sigma2_s: p.p / x, ..p }, &cfg, &hs).exact),
        HighSnrProbe::default(),
    )
    .unwrap();
    assert!((slope - 0.25).abs() < 0.01);
    let (slope, _) = fit_slope(
        |x| fdsac_downlink(&m, &hs, &ScenarioParams { sigma2_c: p.p / x, ..p }, CsiMode::Icsi).map(|r| r.1),
        HighSnrProbe::default(),
    )
    .unwrap();
    assert!((slope - 0.5).abs() < 0.01);
    let (d, _, _) = fit_diversity(|x| gamma_sum_ln_outage(&[2.0, 1.0], x, p.outage_snr()), HighSnrProbe::default())
        .unwrap()
        .unwrap();
    assert!((d - 2.0).abs() < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rate_and_mse_order_agree(seed in any::<u64>()) {
        let (_, p, _, hs) = setup();
        let mut rng = chunk_rng(seed, 0);
        let mut beam = || normalized(&CVector::from_iterator(400, (0..400).map(|_| cn(&mut rng))));
        let (a, b) = (beam(), beam());
        let (sa, sb) = (sr_instantaneous(&a, &hs, &p), sr_instantaneous(&b, &hs, &p));
        let (ma, mb) = (mmse_of_beam(&a, &hs, &p), mmse_of_beam(&b, &hs, &p));
        prop_assert_eq!(sa >= sb, ma <= mb);
    }

    #[test]
    fn pareto_rates_stay_under_the_single_objective_optima(
        n1 in 0.1f64..1e4, n2 in 0.1f64..1e4, c in 0.0f64..1.0, tau in 0.0f64..=1.0,
    ) {
        let rho = c * (n1 * n2).sqrt();
        let pt = pareto_scalar(n1, n2, rho, tau, 4.0).unwrap();
        prop_assert!(pt.cr <= (1.0 + n1).log2() + 1e-9);
        prop_assert!(pt.sr <= (1.0 + n2).log2() / 4.0 + 1e-9);
    }
}
