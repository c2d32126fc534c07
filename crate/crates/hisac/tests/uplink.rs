use approx::assert_relative_eq;
use hisac::array::ArrayConfig;
use hisac::channels::{
    correlation_model, correlation_model_with, sample_comm_channel, sensing_channel, CorrelatedChannelModel,
    SensingChannel, VarianceProfile,
};
use hisac::downlink::{cc_ecr, cc_op, CsiMode};
use hisac::linalg::{cn, normalized, CVector};
use hisac::montecarlo::{chunk_rng, estimate_vec, McConfig};
use hisac::params::{db_to_linear, ScenarioParams};
use hisac::uplink::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn setup() -> (ArrayConfig, ScenarioParams, CorrelatedChannelModel, SensingChannel) {
    let cfg = ArrayConfig::holographic_default();
    let p = ScenarioParams::default();
    let m = correlation_model(&cfg, &p).unwrap();
    let hs = sensing_channel(&cfg, &p).unwrap();
    (cfg, p, m, hs)
}

fn random_unit(rng: &mut impl Rng, n: usize) -> CVector {
    normalized(&CVector::from_iterator(n, (0..n).map(|_| cn(rng))))
}

#[test]
fn instantaneous_cc_sic_rate() {
    let (cfg, p, m, hs) = setup();
    let alone = sc_sic_sr(&p, &cfg, &hs).exact;
    let mut rng = chunk_rng(4, 0);
    let hc = sample_comm_channel(&m, &mut rng);
    let quiet = ScenarioParams { p_c: 0.0, ..p };
    assert_relative_eq!(cc_sic_sr_instantaneous(&hc, &hs, &quiet), alone, max_relative = 1e-12);

    let u = normalized(&hs.h_s);
    let orth = &hc - &u * u.dotc(&hc);
    assert_relative_eq!(cc_sic_sr_instantaneous(&orth, &hs, &p), alone, max_relative = 1e-12);

    // p_c → ∞ leaves the part of h_s orthogonal to h_c.
    let eff = hs.norm_sq - hs.h_s.dotc(&hc).norm_sqr() / hc.norm_squared();
    let g = p.p_s / p.noise_u() * p.l() * p.alpha_s * hs.norm_sq;
    let floor = (1.0 + g * eff).log2() / p.l();
    let v = cc_sic_sr_instantaneous(&hc, &hs, &p);
    assert!(floor <= v && v <= alone);
}

#[test]
fn ergodic_metrics_against_channel_draws() {
    let (_, p, m, hs) = setup();
    let det = scsi_detection_vector(&m, &hs, &p).unwrap();
    let gamma = p.p_s / p.noise_u() * p.alpha_s * hs.norm_sq;
    let vhv = {
        let c = det.v.dotc(&hs.h_s).norm_sqr();
        gamma * c + det.v.norm_squared()
    };
    let low = ScenarioParams { p_c: db_to_linear(10.0), ..p };
    let mc = McConfig { trials: 100_000, seed: 31, ..McConfig::default() };
    let est = estimate_vec(&mc, 6, |rng, out| {
        let hc = sample_comm_channel(&m, rng);
        out[0] = cc_sic_sr_instantaneous(&hc, &hs, &p);
        let cr = sc_sic_cr_from_gram(hc.norm_squared(), hs.h_s.dotc(&hc), hs.norm_sq, &p);
        out[1] = cr;
        let cr10 = sc_sic_cr_from_gram(hc.norm_squared(), hs.h_s.dotc(&hc), hs.norm_sq, &low);
        out[2] = f64::from(u8::from(cr10 < low.r0));
        let snr = p.p_c / p.noise_u() * det.v.dotc(&hc).norm_sqr() / vhv;
        out[3] = (1.0 + snr).log2();
        out[4] = f64::from(u8::from((1.0 + snr).log2() < p.r0));
        out[5] = p.kappa * (1.0 + p.p_c / (p.kappa * p.noise_u()) * hc.norm_squared()).log2();
    })
    .unwrap();
    let (sc_e, sc_o) = scsi_sc_comm(det.kappa, &p).unwrap();
    let refs = [
        ("cc sic sr", cc_sic_avg_sr(&m, &hs, &p).unwrap().exact),
        ("sc sic ecr", sc_sic_ecr(&m, &hs, &p).unwrap().exact),
        ("sc sic op at 10 dB", sc_sic_op(&m, &hs, &low).unwrap().exact),
        ("scsi sc ecr", sc_e.exact),
        ("scsi sc op", sc_o.exact),
        ("fdsac ecr", fdsac_uplink(&m, &hs, &p, CsiMode::Icsi).unwrap().1),
    ];
    for (e, (name, cf)) in est.iter().zip(refs) {
        assert!(e.z_score(cf) < 3.0, "{name}: mc {} ± {} closed form {cf}", e.mean, e.se);
    }
}

#[test]
fn cc_sic_average_rate_limits() {
    let (cfg, p, m, hs) = setup();
    let quiet = ScenarioParams { p_c: 1e-12, ..p };
    assert_relative_eq!(
        cc_sic_avg_sr(&m, &hs, &quiet).unwrap().exact,
        sc_sic_sr(&p, &cfg, &hs).exact,
        max_relative = 1e-9
    );
    let hi = ScenarioParams { p_s: 1e6 * p.noise_u(), ..p };
    let s = cc_sic_avg_sr(&m, &hs, &hi).unwrap();
    assert!((s.exact - s.approx).abs() < 0.05, "{} vs {}", s.exact, s.approx);
}

#[test]
fn comm_after_echo_removal_matches_downlink() {
    let (_, p, m, _) = setup();
    let (e, o) = cc_sic_comm(&m, &p).unwrap();
    let dl = ScenarioParams { p: p.p_c, sigma2_c: p.noise_u(), ..p };
    assert_eq!(e.exact, cc_ecr(&dl, &m.eigs).unwrap().exact);
    assert_eq!(o.exact, cc_op(&dl, &m.eigs).unwrap().exact);
    let (_, o) = cc_sic_comm(&m, &ScenarioParams { p_c: 1e9, ..p }).unwrap();
    assert!(o.exact < 1e-12);
}

#[test]
fn sc_sic_without_echo_is_cc_sic() {
    let (_, p, m, hs) = setup();
    let silent = ScenarioParams { p_s: 0.0, ..p };
    let (e, _) = cc_sic_comm(&m, &p).unwrap();
    assert_relative_eq!(sc_sic_ecr(&m, &hs, &silent).unwrap().exact, e.exact, max_relative = 1e-10);
    let r = ScenarioParams { r0: 3.0, p_c: 1.0, ..silent };
    let (_, o3) = cc_sic_comm(&m, &r).unwrap();
    assert_relative_eq!(sc_sic_op(&m, &hs, &r).unwrap().exact, o3.exact, max_relative = 1e-8);
}

#[test]
fn echo_interference_only_hurts() {
    let (_, p, m, hs) = setup();
    let mut rng = chunk_rng(55, 0);
    for _ in 0..10 {
        let q = ScenarioParams {
            p_c: db_to_linear(rng.random_range(0.0..40.0)),
            p_s: db_to_linear(rng.random_range(0.0..40.0)),
            ..p
        };
        assert!(sc_sic_ecr(&m, &hs, &q).unwrap().exact <= cc_sic_comm(&m, &q).unwrap().0.exact + 1e-12);
    }
}

#[test]
fn sc_sic_outage_high_snr_form() {
    let (_, p, m, hs) = setup();
    // Rank-2 spectrum: keep the two strongest wavenumbers.
    let small = CorrelatedChannelModel {
        support: m.support[..2].to_vec(),
        variances: m.variances[..2].to_vec(),
        basis: m.basis.columns(0, 2).into_owned(),
        eigs: m.eigs[..2].to_vec(),
        profile: m.profile,
    };
    let q = ScenarioParams { p_c: 1e4 * p.noise_u(), r0: 1.0, ..p };
    let o = sc_sic_op(&small, &hs, &q).unwrap();
    assert_relative_eq!(o.exact / o.approx, 1.0, max_relative = 1e-3);
}

#[test]
fn statistical_cc_sic_rate() {
    let (cfg, p, m, hs) = setup();
    let quiet = ScenarioParams { p_c: 0.0, ..p };
    assert_relative_eq!(scsi_cc_sic_sr(&m, &hs, &quiet).exact, sc_sic_sr(&p, &cfg, &hs).exact, max_relative = 1e-12);
    assert!(scsi_cc_sic_sr(&m, &hs, &p).exact <= cc_sic_avg_sr(&m, &hs, &p).unwrap().exact);

    let iid = correlation_model_with(&cfg, &p, VarianceProfile::Iid).unwrap();
    let lam = iid.eigs[0];
    let want = (1.0 + p.p_s * p.l() * p.alpha_s * hs.norm_sq.powi(2) / (p.p_c * lam + p.sigma2_u)).log2() / p.l();
    assert_relative_eq!(scsi_cc_sic_sr(&iid, &hs, &p).exact, want, max_relative = 1e-10);
}

#[test]
fn detection_vector() {
    let (_, p, m, hs) = setup();
    let silent = ScenarioParams { p_s: 0.0, ..p };
    let d0 = scsi_detection_vector(&m, &hs, &silent).unwrap();
    assert_relative_eq!(d0.kappa, m.lambda1(), max_relative = 1e-10);
    assert!((d0.v.dotc(&m.principal_column()).norm() - 1.0).abs() < 1e-8);

    let d = scsi_detection_vector(&m, &hs, &p).unwrap();
    assert!(d.kappa > 0.0);
    assert_relative_eq!(d.v.norm(), 1.0, max_relative = 1e-12);
    let gamma = p.p_s / p.noise_u() * p.alpha_s * hs.norm_sq;
    let ratio = |v: &CVector| m.quad_form(v) / (gamma * v.dotc(&hs.h_s).norm_sqr() + v.norm_squared());
    assert_relative_eq!(ratio(&d.v), d.kappa, max_relative = 1e-8);
    let mut rng = chunk_rng(8, 0);
    for _ in 0..100 {
        assert!(ratio(&random_unit(&mut rng, 400)) <= d.kappa + 1e-9);
    }
    let mut prev = 1.0;
    for db in [0.0, 10.0, 20.0, 30.0, 40.0] {
        let (_, o) = scsi_sc_comm(d.kappa, &ScenarioParams { p_c: db_to_linear(db), ..p }).unwrap();
        assert!(o.exact <= prev);
        prev = o.exact;
    }
}

#[test]
fn interference_folding() {
    let (cfg, p, m, hs) = setup();
    assert_eq!(apply_interference(&p, 0.0).unwrap(), p);
    let loaded = ScenarioParams { varrho: 1.0, ..p };
    let halved = ScenarioParams { p_c: p.p_c / 2.0, p_s: p.p_s / 2.0, ..p };
    let a = design_corners(&m, &hs, &loaded, &cfg, CsiMode::Icsi).unwrap();
    let b = design_corners(&m, &hs, &halved, &cfg, CsiMode::Icsi).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_relative_eq!(x.sr, y.sr, max_relative = 1e-9);
        assert_relative_eq!(x.ecr, y.ecr, max_relative = 1e-9);
        assert_relative_eq!(x.op, y.op, max_relative = 1e-6);
    }
    let folded = apply_interference(&p, 1.0).unwrap();
    assert_relative_eq!(folded.noise_u(), loaded.noise_u(), max_relative = 1e-15);
}

#[test]
fn fdsac_uplink_limits() {
    let (cfg, p, m, hs) = setup();
    let edge = ScenarioParams { kappa: 0.0, ..p };
    assert_relative_eq!(
        fdsac_uplink(&m, &hs, &edge, CsiMode::Icsi).unwrap().0,
        sc_sic_sr(&p, &cfg, &hs).exact,
        max_relative = 1e-12
    );
    // The split is dominated by time sharing between the two SIC corners.
    let [cc, sc] = design_corners(&m, &hs, &p, &cfg, CsiMode::Icsi).unwrap();
    let (sr, cr) = fdsac_uplink(&m, &hs, &p, CsiMode::Icsi).unwrap();
    let dominated = (0..=100).any(|i| {
        let (s, c) = time_sharing_pair(f64::from(i) / 100.0, (sc.sr, sc.ecr), (cc.sr, cc.ecr)).unwrap();
        s >= sr && c >= cr
    });
    assert!(dominated);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cc_sic_rate_is_bracketed(
        re in prop::collection::vec(-3.0f64..3.0, 2), hc2 in 0.01f64..1e3, c in 0.0f64..1.0, pc_db in -20.0f64..60.0,
    ) {
        let (_, p, _, hs) = setup();
        let q = ScenarioParams { p_c: db_to_linear(pc_db), ..p };
        let phase = Complex64::new(re[0], re[1]);
        let phase = if phase.norm() > 0.0 { phase / phase.norm() } else { Complex64::from(1.0) };
        let cross = phase * c * (hc2 * hs.norm_sq).sqrt();
        let v = cc_sic_sr_from_gram(hc2, cross, hs.norm_sq, &q);
        let top = cc_sic_sr_from_gram(hc2, Complex64::from(0.0), hs.norm_sq, &q);
        prop_assert!(v >= -1e-12 && v <= top + 1e-12);
    }

    #[test]
    fn time_sharing_is_convex(e in 0.0f64..=1.0, a in 0.0f64..10.0, b in 0.0f64..10.0, c in 0.0f64..10.0, d in 0.0f64..10.0) {
        let (x, y) = time_sharing_pair(e, (a, b), (c, d)).unwrap();
        prop_assert!(x >= a.min(c) - 1e-12 && x <= a.max(c) + 1e-12);
        prop_assert!(y >= b.min(d) - 1e-12 && y <= b.max(d) + 1e-12);
    }
}
