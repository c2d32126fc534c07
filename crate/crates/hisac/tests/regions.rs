use approx::assert_relative_eq;
use hisac::array::ArrayConfig;
use hisac::channels::{correlation_model, sensing_channel, CorrelatedChannelModel, SensingChannel};
use hisac::downlink::{cc_avg_sr, cc_ecr, omega, sc_ecr, sc_sr_closed, scsi_cc_ecr, scsi_cc_sr, CsiMode};
use hisac::linalg::{cn, hermitian_eigenvalues, CMatrix};
use hisac::montecarlo::*;
use hisac::params::ScenarioParams;
use hisac::region::*;
use hisac::special::{exp_integral_ei, exponential_ecr};
use hisac::uplink::{apply_interference, design_corners};
use num_complex::Complex64;
use proptest::prelude::*;
use rand_distr::{Distribution, Exp1};

fn setup() -> (ArrayConfig, ScenarioParams, CorrelatedChannelModel, SensingChannel) {
    let cfg = ArrayConfig::holographic_default();
    let p = ScenarioParams::default();
    let m = correlation_model(&cfg, &p).unwrap();
    let hs = sensing_channel(&cfg, &p).unwrap();
    (cfg, p, m, hs)
}

#[test]
fn exponential_kernel_by_sampling() {
    let mc = McConfig { trials: 200_000, seed: 5, ..McConfig::default() };
    let e = estimate_ecr(&mc, |rng| {
        let x: f64 = Exp1.sample(rng);
        (1.0 + 10.0 * x).log2()
    })
    .unwrap();
    let want = -(0.1f64).exp() * exp_integral_ei(-0.1).unwrap() * std::f64::consts::LOG2_E;
    assert_relative_eq!(want, exponential_ecr(10.0), max_relative = 1e-12);
    assert!(e.z_score(want) < 3.0, "{} ± {}", e.mean, e.se);
}

#[test]
fn standard_error_shrinks_with_trials() {
    let f = |rng: &mut rand_chacha::ChaCha20Rng| Exp1.sample(rng);
    let a = estimate_ecr(&McConfig { trials: 50_000, ..McConfig::default() }, f).unwrap();
    let b = estimate_ecr(&McConfig { trials: 100_000, ..McConfig::default() }, f).unwrap();
    let ratio = b.se / a.se;
    assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.03, "ratio {ratio}");
    assert_eq!(b.n, 100_000);
}

#[test]
fn outage_estimates() {
    let (_, p, m, hs) = setup();
    let mc = McConfig { trials: 5000, ..McConfig::default() };
    let rate = |rng: &mut rand_chacha::ChaCha20Rng| {
        let x: f64 = Exp1.sample(rng);
        (1.0 + x).log2()
    };
    assert_eq!(estimate_op(&mc, rate, 0.0).unwrap().mean, 0.0);
    assert_eq!(estimate_op(&mc, rate, 1e300).unwrap().mean, 1.0);

    // S-C beam at R₀ = 12: exponential SNR with mean p/(σ_c²Ω).
    let om = omega(&m, &hs).unwrap();
    let q = ScenarioParams { r0: 12.0, ..p };
    let want = 1.0 - (-(2f64.powf(q.r0) - 1.0) * om / q.snr_c()).exp();
    let mc = McConfig { trials: 100_000, seed: 9, ..McConfig::default() };
    let est = estimate_op(
        &mc,
        |rng| {
            let x: f64 = Exp1.sample(rng);
            (1.0 + q.snr_c() / om * x).log2()
        },
        q.r0,
    )
    .unwrap();
    assert!(est.z_score(want) < 3.0, "{} ± {} vs {want}", est.mean, est.se);
}

#[test]
fn sr_and_mse_rank_beams_alike() {
    let (_, p, _, hs) = setup();
    let rep = mmse_sr_equivalence(&hs, &p, 200, 3);
    assert_eq!(rep.probes, 201);
    assert_eq!(rep.violations, 0);
    assert_eq!(rep.kendall_tau, 1.0);
    assert!(rep.matched_is_optimal);
}

#[test]
fn unit_grid_shape() {
    let g = unit_grid(41);
    assert_eq!(g.len(), 41);
    assert_eq!((g[0], g[40]), (0.0, 1.0));
    assert_relative_eq!(g[20], 0.5);
    assert_eq!(unit_grid(1), vec![0.0]);
}

#[test]
fn icsi_region_endpoints() {
    let (_, p, m, hs) = setup();
    let mc = McConfig { trials: 20_000, seed: 17, ..McConfig::default() };
    let r = downlink_region_icsi(&m, &hs, &p, &unit_grid(41), &mc).unwrap();
    assert_eq!(r.points.len(), 41);
    assert_eq!(r.to_csv().lines().count(), 42);
    assert_eq!(r.meta.failures, 0);

    let first = &r.points[0];
    let cr = cc_ecr(&p, &m.eigs).unwrap().exact;
    let sr = cc_avg_sr(&m, &hs, &p).unwrap().exact;
    assert!((first.cr - cr).abs() < 3.0 * first.cr_se, "{} vs {cr}", first.cr);
    assert!((first.sr - sr).abs() < 3.0 * first.sr_se, "{} vs {sr}", first.sr);

    let last = r.points.last().unwrap();
    let cfg = ArrayConfig::holographic_default();
    assert_relative_eq!(last.sr, sc_sr_closed(&p, &cfg, &hs).exact, max_relative = 1e-12);
    let cr = sc_ecr(&p, omega(&m, &hs).unwrap()).exact;
    assert!((last.cr - cr).abs() < 3.0 * last.cr_se, "{} vs {cr}", last.cr);

    for w in r.points.windows(2) {
        assert!(w[1].sr >= w[0].sr - 1e-12 && w[1].cr <= w[0].cr + 1e-12);
    }
}

#[test]
fn boundary_is_monotone() {
    let (_, p, m, hs) = setup();
    let r = fdsac_region(&m, &hs, &p, &unit_grid(11), &unit_grid(11), Link::Downlink, CsiMode::Icsi).unwrap();
    assert_eq!(r.meta.grid, 121);
    let b = r.boundary();
    assert!(!b.is_empty());
    for w in b.windows(2) {
        assert!(w[1].sr > w[0].sr && w[1].cr < w[0].cr);
    }
    for q in &r.points {
        assert!(!r.points.iter().any(|o| o.sr > q.sr && o.cr > q.cr));
    }
}

fn scene() -> (CorrelatedChannelModel, CompressedScene) {
    let (_, _, m, hs) = setup();
    let s = CompressedScene::new(&m, &hs);
    (m, s)
}

fn pencil_top(s: &CompressedScene, mu: f64, tau: f64) -> f64 {
    let (a, b) = ((1.0 - mu) / (1.0 - tau), mu / tau);
    let n = s.dim();
    let mat = CMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { a * s.r_diag[i] } else { 0.0 };
        Complex64::from(d) + s.h[i] * s.h[j].conj() * b
    });
    hermitian_eigenvalues(mat).unwrap()[0]
}

#[test]
fn relaxed_solution_is_feasible_and_tight() {
    let (m, s) = scene();
    let mut rng = chunk_rng(21, 0);
    for tau in [0.05, 0.3, 0.5, 0.9] {
        let sol = scsi_relaxed_solve(&s, tau).unwrap();
        let w = sol.w();
        let tr: f64 = (0..w.nrows()).map(|i| w[(i, i)].re).sum();
        assert_relative_eq!(tr, 1.0, max_relative = 1e-9);
        assert_relative_eq!(sol.primal, sol.x_star, max_relative = 1e-6);
        // Weak duality: every μ bounds the optimum from above.
        for mu in [0.0, 0.2, 0.5, 0.8, 1.0] {
            assert!(pencil_top(&s, mu, tau) >= sol.x_star * (1.0 - 1e-9));
        }
        // No unit beam beats the relaxation.
        for _ in 0..50 {
            let u: Vec<Complex64> = (0..s.dim()).map(|_| cn(&mut rng)).collect();
            let n = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let u: Vec<Complex64> = u.iter().map(|z| z / n).collect();
            let v = (s.r_form(&u) / (1.0 - tau)).min(s.h_form(&u) / tau);
            assert!(v <= sol.x_star * (1.0 + 1e-9));
        }
        let (u, val) = sdr_randomize(&sol, &s, 64, &mut rng).unwrap();
        assert!(val <= sol.x_star * (1.0 + 1e-9));
        assert_relative_eq!(s.lift(&m, &u).norm(), 1.0, max_relative = 1e-9);
    }
    assert!(scsi_relaxed_solve(&s, 0.0).is_err());
    assert!(scsi_relaxed_solve(&s, 1.0).is_err());
}

#[test]
fn randomization_is_reproducible() {
    let (_, s) = scene();
    let a = scsi_pareto_beam(&s, 0.4, 100, &mut chunk_rng(8, 2)).unwrap();
    let b = scsi_pareto_beam(&s, 0.4, 100, &mut chunk_rng(8, 2)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scsi_region_endpoints() {
    let (_, p, m, hs) = setup();
    let r = downlink_region_scsi(&m, &hs, &p, &unit_grid(11), 50, 4).unwrap();
    assert_eq!(r.points.len(), 11);
    let lam = m.lambda1();
    assert_relative_eq!(r.points[0].cr, scsi_cc_ecr(&p, lam).exact, max_relative = 1e-10);
    assert_relative_eq!(r.points[0].sr, scsi_cc_sr(&m, &hs, &p).exact, max_relative = 1e-10);
    let cfg = ArrayConfig::holographic_default();
    assert_relative_eq!(r.points[10].sr, sc_sr_closed(&p, &cfg, &hs).exact, max_relative = 1e-10);
    let again = downlink_region_scsi(&m, &hs, &p, &unit_grid(11), 50, 4).unwrap();
    assert_eq!(r.to_csv(), again.to_csv());
}

#[test]
fn region_containments() {
    let (cfg, p, m, hs) = setup();
    let mc = McConfig { trials: 20_000, seed: 23, ..McConfig::default() };
    let icsi = downlink_region_icsi(&m, &hs, &p, &unit_grid(21), &mc).unwrap();
    let scsi = downlink_region_scsi(&m, &hs, &p, &unit_grid(21), 50, 1).unwrap();
    let fd = fdsac_region(&m, &hs, &p, &unit_grid(11), &unit_grid(11), Link::Downlink, CsiMode::Icsi).unwrap();
    assert!(containment_violations(&icsi, &scsi, 3.0).is_empty());
    assert!(containment_violations(&icsi, &fd, 3.0).is_empty());

    let noisy = apply_interference(&p, 2.0).unwrap();
    for csi in [CsiMode::Icsi, CsiMode::Scsi] {
        let clean = uplink_region(&m, &hs, &p, &cfg, csi, &unit_grid(21)).unwrap();
        let hurt = uplink_region(&m, &hs, &noisy, &cfg, csi, &unit_grid(21)).unwrap();
        assert!(containment_violations(&clean, &hurt, 0.0).is_empty());
        let [cc, sc] = design_corners(&m, &hs, &p, &cfg, csi).unwrap();
        assert_eq!((clean.points[0].sr, clean.points[0].cr), (cc.sr, cc.ecr));
        assert_eq!((clean.points[20].sr, clean.points[20].cr), (sc.sr, sc.ecr));
    }
}

fn pt(sr: f64, cr: f64) -> RegionPoint {
    RegionPoint { knob: 0.0, knob2: None, sr, cr, sr_se: 0.0, cr_se: 0.0, design: "t".into(), label: "t".into() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_output_is_undominated(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..40)) {
        let all: Vec<RegionPoint> = pts.iter().map(|&(s, c)| pt(s, c)).collect();
        let b = pareto_filter(&all);
        prop_assert!(!b.is_empty());
        for q in &b {
            prop_assert!(!all.iter().any(|o| o.sr >= q.sr && o.cr >= q.cr && (o.sr > q.sr || o.cr > q.cr)));
        }
        for o in &all {
            prop_assert!(b.iter().any(|q| q.sr >= o.sr && q.cr >= o.cr));
        }
    }
}
