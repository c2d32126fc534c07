//! The validation suite: every closed form against its sampling oracle, plus
//! invariant, high-SNR and diversity checks.

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::scenario::Scenario;
use crate::channels::SensingProjection;
use crate::downlink::{
    cc_avg_sr, cc_ecr, cc_op, exponential_outage, fdsac_downlink_metrics, fit_diversity, fit_slope,
    gamma_sum_ln_outage, gamma_sum_outage_ln_approx, omega, pareto_scalar, sc_ecr, sc_op, sc_sr_closed, scsi_cc_ecr,
    scsi_cc_op, scsi_cc_sr, ClosedForm, CsiMode, HighSnrProbe, ParetoCase,
};
use crate::error::Result;
use crate::montecarlo::{chunk_rng, comm_coords, mmse_sr_equivalence, Estimate, McConfig};
use crate::oracle::{evaluate, Design, Link, Metric, Query, Scene};
use crate::params::{db_to_linear, ScenarioParams};
use crate::region::{
    containment_violations, downlink_region_icsi, downlink_region_scsi, fdsac_region, scsi_relaxed_solve,
    sdr_randomize, unit_grid, uplink_region, Link as RegionLink, RateRegion,
};
use crate::uplink::{
    cc_sic_avg_sr, cc_sic_comm, fdsac_uplink_metrics, phi_eigs, sc_sic_ecr, sc_sic_sr, scsi_cc_sic_comm,
    scsi_cc_sic_sr, scsi_detection_vector, scsi_sc_comm,
};

/// One closed form against its oracle.
#[derive(Debug, Clone, Serialize)]
pub struct PairingResult {
    pub metric: String,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub z_score: f64,
    pub pass: bool,
    pub trials: usize,
}

/// A named invariant with its outcome.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// Full output of `validate`.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub library_version: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub trials: usize,
    pub tail_trials: usize,
    pub ci_z: f64,
    pub tampered: bool,
    pub pairings: Vec<PairingResult>,
    pub invariants: Vec<Check>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// A registered pairing: a query at possibly modified parameters.
#[derive(Debug, Clone)]
pub struct Case {
    pub label: String,
    pub query: Query,
    pub params: ScenarioParams,
}

fn dl_sens(p: &ScenarioParams, snr: f64) -> ScenarioParams {
    ScenarioParams { sigma2_s: p.p / snr, ..*p }
}

fn dl_comm(p: &ScenarioParams, snr: f64) -> ScenarioParams {
    ScenarioParams { sigma2_c: p.p / snr, ..*p }
}

fn ul_sens(p: &ScenarioParams, snr: f64) -> ScenarioParams {
    ScenarioParams { p_s: snr * p.noise_u(), ..*p }
}

fn ul_comm(p: &ScenarioParams, snr: f64) -> ScenarioParams {
    ScenarioParams { p_c: snr * p.noise_u(), ..*p }
}

/// Every closed-form/oracle pairing. Outage probabilities that are far below
/// what any sample size resolves are also checked at 10 dB, where they are not.
pub fn registry(params: &ScenarioParams, tau: f64, randomizations: usize) -> Vec<Case> {
    use CsiMode::{Icsi, Scsi};
    use Design::{Cc, Fdsac, Pareto, Sc};
    use Link::{Downlink, Uplink};
    use Metric::{Ecr, Op, Sr};
    let base: [(Link, Design, CsiMode, Metric); 27] = [
        (Downlink, Sc, Icsi, Sr),
        (Downlink, Sc, Icsi, Ecr),
        (Downlink, Sc, Icsi, Op),
        (Downlink, Cc, Icsi, Sr),
        (Downlink, Cc, Icsi, Ecr),
        (Downlink, Cc, Icsi, Op),
        (Downlink, Cc, Scsi, Sr),
        (Downlink, Cc, Scsi, Ecr),
        (Downlink, Cc, Scsi, Op),
        (Downlink, Pareto, Scsi, Sr),
        (Downlink, Pareto, Scsi, Ecr),
        (Downlink, Pareto, Scsi, Op),
        (Downlink, Fdsac, Icsi, Sr),
        (Downlink, Fdsac, Icsi, Ecr),
        (Downlink, Fdsac, Scsi, Ecr),
        (Uplink, Cc, Icsi, Sr),
        (Uplink, Cc, Icsi, Ecr),
        (Uplink, Cc, Icsi, Op),
        (Uplink, Sc, Icsi, Sr),
        (Uplink, Sc, Icsi, Ecr),
        (Uplink, Sc, Icsi, Op),
        (Uplink, Cc, Scsi, Sr),
        (Uplink, Cc, Scsi, Ecr),
        (Uplink, Cc, Scsi, Op),
        (Uplink, Sc, Scsi, Ecr),
        (Uplink, Sc, Scsi, Op),
        (Uplink, Fdsac, Icsi, Ecr),
    ];
    let mk = |l, d, c, m| Query { tau, randomizations, ..Query::new(l, m, d, c) };
    let mut out: Vec<Case> = base
        .iter()
        .map(|&(l, d, c, m)| {
            let query = mk(l, d, c, m);
            Case { label: query.name(), query, params: *params }
        })
        .collect();
    let ten = db_to_linear(10.0);
    let extra: [(Link, Design, CsiMode, Metric, ScenarioParams, &str); 7] = [
        (Downlink, Cc, Icsi, Op, dl_comm(params, ten), "@snr=10dB"),
        (Uplink, Cc, Icsi, Op, ul_comm(params, ten), "@snr=10dB"),
        (Uplink, Sc, Icsi, Op, ul_comm(params, ten), "@snr=10dB"),
        (Downlink, Fdsac, Icsi, Op, ScenarioParams { r0: 9.0, ..*params }, "@r0=9"),
        (Downlink, Fdsac, Scsi, Op, ScenarioParams { r0: 6.0, ..*params }, "@r0=6"),
        (Uplink, Fdsac, Scsi, Ecr, *params, ""),
        (Uplink, Fdsac, Scsi, Op, ScenarioParams { r0: 6.0, ..*params }, "@r0=6"),
    ];
    for (l, d, c, m, p, tag) in extra {
        let query = mk(l, d, c, m);
        out.push(Case { label: format!("{}{tag}", query.name()), query, params: p });
    }
    out
}

/// Stream seed of a pairing, so pairings never share draws.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// z-score of an estimate against a closed form. Outage SEs are floored at
/// the binomial value √(q(1−q)/n) of the closed form q, rate SEs at the
/// double-precision resolution of the closed form.
pub fn z_score(closed_form: f64, est: &Estimate, metric: Metric) -> f64 {
    let floor = match metric {
        Metric::Op => (closed_form.clamp(0.0, 1.0) * (1.0 - closed_form.clamp(0.0, 1.0)) / est.n as f64).sqrt(),
        _ => 1e-12 * (1.0 + closed_form.abs()),
    };
    let gap = (est.mean - closed_form).abs();
    if gap == 0.0 {
        0.0
    } else {
        gap / est.se.max(floor)
    }
}

/// Runs the registry with closed forms from `cf` and oracles on `truth`.
pub fn run_pairings(cf: &Scene, truth: &Scene, sc: &Scenario) -> Result<Vec<PairingResult>> {
    let g = &sc.file.grids;
    registry(&sc.params, g.tau, g.randomizations)
        .into_iter()
        .map(|case| {
            let ev = evaluate(cf, truth, &case.params, &case.query)?;
            let tail = case.query.metric == Metric::Op && ev.closed_form < 1e-3;
            let trials = if tail { sc.tail_trials } else { sc.mc.trials };
            let mc = McConfig { trials, seed: derive_seed(sc.mc.seed, &case.label), ..sc.mc };
            let est = ev.oracle.run(&mc)?;
            let z = z_score(ev.closed_form, &est, case.query.metric);
            Ok(PairingResult {
                metric: case.label,
                closed_form: ev.closed_form,
                mc_mean: est.mean,
                mc_se: est.se,
                z_score: z,
                pass: ev.closed_form.is_finite() && z <= sc.mc.ci_z,
                trials,
            })
        })
        .collect()
}

fn within(name: &str, exact: f64, approx: f64, tol: f64) -> Check {
    let gap = (exact - approx).abs();
    Check::new(name, gap < tol, format!("exact {exact:.6e} approx {approx:.6e} gap {gap:.3e} (tol {tol})"))
}

fn ln_within(name: &str, ln_exact: f64, ln_approx: f64, rel: f64) -> Check {
    let ratio = (ln_approx - ln_exact).exp();
    Check::new(
        name,
        (ratio - 1.0).abs() < rel,
        format!("ln exact {ln_exact:.6e} ln approx {ln_approx:.6e} ratio {ratio:.6e} (rel tol {rel})"),
    )
}

fn slope_check(name: &str, rate: impl Fn(f64) -> Result<f64>, expected: f64) -> Result<Check> {
    let (slope, offset) = fit_slope(rate, HighSnrProbe::default())?;
    Ok(Check::new(
        name,
        (slope - expected).abs() < 0.01,
        format!("slope {slope:.6} expected {expected:.6} offset {offset:.4}"),
    ))
}

/// Fitted slopes between 60 and 70 dB and high-SNR approximation gaps at 60 dB.
pub fn high_snr_checks(scene: &Scene, params: &ScenarioParams) -> Result<Vec<Check>> {
    let p = *params;
    let (m, hs, cfg) = (&scene.model, &scene.hs, &scene.cfg);
    let l = p.l();
    let kappa = p.kappa;
    let om = omega(m, hs)?;
    let proj = SensingProjection::new(m, hs);
    let mut out = vec![
        slope_check("slope/downlink/sc/sr", |s| Ok(sc_sr_closed(&dl_sens(&p, s), cfg, hs).exact), 1.0 / l)?,
        slope_check("slope/downlink/cc/icsi/sr", |s| Ok(cc_avg_sr(m, hs, &dl_sens(&p, s))?.exact), 1.0 / l)?,
        slope_check("slope/downlink/cc/scsi/sr", |s| Ok(scsi_cc_sr(m, hs, &dl_sens(&p, s)).exact), 1.0 / l)?,
        slope_check("slope/downlink/sc/ecr", |s| Ok(sc_ecr(&dl_comm(&p, s), om).exact), 1.0)?,
        slope_check("slope/downlink/cc/icsi/ecr", |s| Ok(cc_ecr(&dl_comm(&p, s), &m.eigs)?.exact), 1.0)?,
        slope_check("slope/downlink/cc/scsi/ecr", |s| Ok(scsi_cc_ecr(&dl_comm(&p, s), m.lambda1()).exact), 1.0)?,
        slope_check(
            "slope/downlink/fdsac/sr",
            |s| Ok(fdsac_downlink_metrics(m, hs, &dl_sens(&p, s), CsiMode::Icsi)?.sr.exact),
            (1.0 - kappa) / l,
        )?,
        slope_check(
            "slope/downlink/fdsac/icsi/ecr",
            |s| Ok(fdsac_downlink_metrics(m, hs, &dl_comm(&p, s), CsiMode::Icsi)?.ecr.exact),
            kappa,
        )?,
        slope_check(
            "slope/downlink/fdsac/scsi/ecr",
            |s| Ok(fdsac_downlink_metrics(m, hs, &dl_comm(&p, s), CsiMode::Scsi)?.ecr.exact),
            kappa,
        )?,
        slope_check("slope/uplink/cc/icsi/sr", |s| Ok(cc_sic_avg_sr(m, hs, &ul_sens(&p, s))?.exact), 1.0 / l)?,
        slope_check("slope/uplink/sc/sr", |s| Ok(sc_sic_sr(&ul_sens(&p, s), cfg, hs).exact), 1.0 / l)?,
        slope_check("slope/uplink/cc/scsi/sr", |s| Ok(scsi_cc_sic_sr(m, hs, &ul_sens(&p, s)).exact), 1.0 / l)?,
        slope_check("slope/uplink/cc/icsi/ecr", |s| Ok(cc_sic_comm(m, &ul_comm(&p, s))?.0.exact), 1.0)?,
        slope_check("slope/uplink/sc/icsi/ecr", |s| Ok(sc_sic_ecr(m, hs, &ul_comm(&p, s))?.exact), 1.0)?,
        slope_check("slope/uplink/cc/scsi/ecr", |s| Ok(scsi_cc_sic_comm(m, &ul_comm(&p, s)).0.exact), 1.0)?,
        slope_check(
            "slope/uplink/sc/scsi/ecr",
            |s| {
                let q = ul_comm(&p, s);
                Ok(scsi_sc_comm(scsi_detection_vector(m, hs, &q)?.kappa, &q)?.0.exact)
            },
            1.0,
        )?,
        slope_check(
            "slope/uplink/fdsac/sr",
            |s| Ok(fdsac_uplink_metrics(m, hs, &ul_sens(&p, s), CsiMode::Icsi)?.sr.exact),
            (1.0 - kappa) / l,
        )?,
        slope_check(
            "slope/uplink/fdsac/icsi/ecr",
            |s| Ok(fdsac_uplink_metrics(m, hs, &ul_comm(&p, s), CsiMode::Icsi)?.ecr.exact),
            kappa,
        )?,
    ];
    let s60 = db_to_linear(60.0);
    let thr = p.outage_snr();
    let gap = |name: &str, c: ClosedForm| within(name, c.exact, c.approx, 0.05);
    let rel = |name: &str, c: ClosedForm| ln_within(name, c.exact.ln(), c.approx.ln(), 0.05);
    let sc = sc_sr_closed(&dl_sens(&p, s60), cfg, hs);
    out.push(within("approx/downlink/sc/sr", sc.exact, sc.high_snr, 0.05));
    out.push(gap("approx/downlink/sc/ecr", sc_ecr(&dl_comm(&p, s60), om)));
    out.push(rel("approx/downlink/sc/op", sc_op(&dl_comm(&p, s60), om)));
    out.push(ln_within(
        "approx/downlink/cc/icsi/op",
        gamma_sum_ln_outage(&m.eigs, s60, thr)?,
        gamma_sum_outage_ln_approx(&m.eigs, s60, thr),
        0.05,
    ));
    out.push(gap("approx/downlink/cc/icsi/ecr", cc_ecr(&dl_comm(&p, s60), &m.eigs)?));
    out.push(gap("approx/downlink/cc/icsi/sr", cc_avg_sr(m, hs, &dl_sens(&p, s60))?));
    out.push(gap("approx/downlink/cc/scsi/ecr", scsi_cc_ecr(&dl_comm(&p, s60), m.lambda1())));
    out.push(rel("approx/downlink/cc/scsi/op", scsi_cc_op(&dl_comm(&p, s60), m.lambda1())));
    out.push(gap("approx/downlink/cc/scsi/sr", scsi_cc_sr(m, hs, &dl_sens(&p, s60))));
    out.push(gap("approx/uplink/cc/icsi/sr", cc_sic_avg_sr(m, hs, &ul_sens(&p, s60))?));
    let q = ul_comm(&p, s60);
    out.push(gap("approx/uplink/sc/icsi/ecr", sc_sic_ecr(m, hs, &q)?));
    let phi = phi_eigs(m, &proj, &q)?;
    out.push(ln_within(
        "approx/uplink/sc/icsi/op",
        gamma_sum_ln_outage(&phi, s60, thr)?,
        gamma_sum_outage_ln_approx(&phi, s60, thr),
        0.05,
    ));
    out.push(gap("approx/uplink/cc/scsi/sr", scsi_cc_sic_sr(m, hs, &ul_sens(&p, s60))));
    let (e, o) = scsi_sc_comm(scsi_detection_vector(m, hs, &q)?.kappa, &q)?;
    out.push(gap("approx/uplink/sc/scsi/ecr", e));
    out.push(rel("approx/uplink/sc/scsi/op", o));
    Ok(out)
}

fn diversity_check(name: &str, ln_op: impl Fn(f64) -> Result<f64>, expected: f64, tol: f64) -> Result<Check> {
    Ok(match fit_diversity(ln_op, HighSnrProbe::default())? {
        Some((d, gain, probe)) => Check::new(
            name,
            (d - expected).abs() <= tol,
            format!(
                "diversity {d:.4} expected {expected} array gain {gain:.4e} probes {}/{} dB",
                probe.p1_db, probe.p2_db
            ),
        ),
        None => Check::new(name, false, "unmeasurable"),
    })
}

/// Diversity orders where double precision suffices, and the full-rank case
/// that it does not.
pub fn diversity_checks(scene: &Scene, params: &ScenarioParams) -> Result<Vec<Check>> {
    let p = *params;
    let (m, hs) = (&scene.model, &scene.hs);
    let thr = p.outage_snr();
    let om = omega(m, hs)?;
    let mut out = Vec::new();
    for eigs in [vec![2.0, 1.0], vec![3.0, 2.0, 1.0]] {
        let n = eigs.len();
        out.push(diversity_check(
            &format!("diversity/rank-{n}"),
            |s| gamma_sum_ln_outage(&eigs, s, thr),
            n as f64,
            0.1,
        )?);
    }
    let exp_ln = |mean: f64| exponential_outage(mean, thr).exact.ln();
    out.push(diversity_check("diversity/downlink/sc", |s| Ok(exp_ln(s / om)), 1.0, 0.05)?);
    out.push(diversity_check("diversity/downlink/cc/scsi", |s| Ok(exp_ln(s * m.lambda1())), 1.0, 0.05)?);
    out.push(diversity_check(
        "diversity/uplink/cc/scsi",
        |s| Ok(scsi_cc_sic_comm(m, &ul_comm(&p, s)).1.exact.ln()),
        1.0,
        0.05,
    )?);
    let kappa = scsi_detection_vector(m, hs, &p)?.kappa;
    out.push(diversity_check(
        "diversity/uplink/sc/scsi",
        |s| Ok(scsi_sc_comm(kappa, &ul_comm(&p, s))?.1.exact.ln()),
        1.0,
        0.05,
    )?);
    // Full rank: the outage at the nominal probes is below the smallest double.
    let n = m.eigs.len();
    let probe = HighSnrProbe::default();
    let at = |db: f64| gamma_sum_ln_outage(&m.eigs, db_to_linear(db), thr);
    let (l1, l2) = (at(probe.p1_db)?, at(probe.p2_db)?);
    let unrepresentable = l1.exp() < f64::MIN_POSITIVE || l2.exp() < f64::MIN_POSITIVE;
    let reduced = match fit_diversity(|s| gamma_sum_ln_outage(&m.eigs, s, thr), probe)? {
        Some((d, _, pr)) => format!("auto-reduced probes {}/{} dB fit {d:.3}", pr.p1_db, pr.p2_db),
        None => "no stable reduced fit".into(),
    };
    out.push(Check::new(
        format!("diversity/rank-{n}-excluded"),
        unrepresentable,
        format!(
            "ln OP at {}/{} dB = {l1:.1}/{l2:.1}, unmeasurable at double precision; {reduced}",
            probe.p1_db, probe.p2_db
        ),
    ));
    Ok(out)
}

fn containment(name: &str, outer: &RateRegion, inner: &RateRegion, z: f64) -> Check {
    let v = containment_violations(outer, inner, z);
    let detail = match v.first() {
        None => format!("{} points checked", inner.points.len()),
        Some(f) => format!(
            "{} violations, first at knob {} (sr {:.6}, cr {:.6} > {:.6})",
            v.len(),
            f.knob,
            f.sr,
            f.cr,
            f.envelope
        ),
    };
    Check::new(name, v.is_empty(), detail)
}

/// Region, Pareto, relaxation, equivalence and ordering invariants.
pub fn invariant_suite(cf: &Scene, truth: &Scene, sc: &Scenario) -> Result<Vec<Check>> {
    let p = sc.params;
    let g = &sc.file.grids;
    let (m, hs) = (&truth.model, &truth.hs);
    let seed = sc.mc.seed;
    let z = sc.mc.ci_z;
    let mut out = Vec::new();

    let eq = mmse_sr_equivalence(hs, &p, 100, derive_seed(seed, "equivalence"));
    out.push(Check::new(
        "sr-mse-equivalence",
        eq.kendall_tau == 1.0 && eq.matched_is_optimal,
        format!(
            "probes {} kendall {} violations {} matched optimal {}",
            eq.probes, eq.kendall_tau, eq.violations, eq.matched_is_optimal
        ),
    ));

    // Pareto machinery over independent channel draws.
    let taus = unit_grid(g.tau_points);
    let mut rng = chunk_rng(derive_seed(seed, "pareto"), 0);
    let (k2, l) = (p.snr_s() * p.l() * p.alpha_s * hs.norm_sq, p.l());
    let n2 = k2 * hs.norm_sq;
    let (mut worst_res, mut worst_con, mut nonmono) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..100 {
        let c = comm_coords(&m.eigs, &mut rng);
        let n1 = p.snr_c() * c.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let rho = (p.snr_c() * k2).sqrt() * truth.proj.inner(&c).norm();
        let mut prev: Option<(f64, f64)> = None;
        for &tau in &taus {
            let pt = pareto_scalar(n1, n2, rho, tau, l)?;
            if pt.case == ParetoCase::Interior {
                let r = pt.r_star.unwrap_or(f64::NAN);
                worst_res = worst_res.max(pt.residual.unwrap_or(f64::INFINITY));
                worst_con = worst_con.max(tau * r - pt.sr).max((1.0 - tau) * r - pt.cr);
            }
            if let Some((sr, cr)) = prev {
                if pt.sr < sr - 1e-9 || pt.cr > cr + 1e-9 {
                    nonmono += 1;
                }
            }
            prev = Some((pt.sr, pt.cr));
        }
    }
    out.push(Check::new("pareto/residual", worst_res < 1e-9, format!("largest relative residual {worst_res:.3e}")));
    out.push(Check::new(
        "pareto/constraints",
        worst_con <= 1e-9,
        format!("largest constraint shortfall {worst_con:.3e}"),
    ));
    out.push(Check::new("pareto/monotone", nonmono == 0, format!("{nonmono} non-monotone steps")));

    // τ endpoints of the averaged region against the C-C and S-C closed forms.
    let mc = McConfig { seed: derive_seed(seed, "pareto-endpoints"), ..sc.mc };
    let ends = downlink_region_icsi(m, hs, &p, &[0.0, 1.0], &mc)?;
    let om = omega(&cf.model, &cf.hs)?;
    let refs = [
        ("pareto/endpoint/tau=0/sr", ends.points[0].sr, ends.points[0].sr_se, cc_avg_sr(&cf.model, &cf.hs, &p)?.exact),
        ("pareto/endpoint/tau=0/cr", ends.points[0].cr, ends.points[0].cr_se, cc_ecr(&p, &cf.model.eigs)?.exact),
        ("pareto/endpoint/tau=1/sr", ends.points[1].sr, ends.points[1].sr_se, sc_sr_closed(&p, &cf.cfg, &cf.hs).exact),
        ("pareto/endpoint/tau=1/cr", ends.points[1].cr, ends.points[1].cr_se, sc_ecr(&p, om).exact),
    ];
    for (name, mean, se, cf) in refs {
        let zs = z_score(cf, &Estimate { mean, se, n: mc.trials }, Metric::Ecr);
        out.push(Check::new(name, zs <= z, format!("mc {mean:.6} ± {se:.2e} closed form {cf:.6} z {zs:.2}")));
    }

    // Relaxation tightness.
    let mut worst = f64::INFINITY;
    let mut rrng = chunk_rng(derive_seed(seed, "sdr"), 0);
    for &tau in taus.iter().filter(|t| **t > 0.0 && **t < 1.0) {
        let sol = scsi_relaxed_solve(&truth.compressed, tau)?;
        let (_, val) = sdr_randomize(&sol, &truth.compressed, g.randomizations, &mut rrng)?;
        worst = worst.min(val / sol.x_star);
    }
    out.push(Check::new("sdr/tightness", worst >= 0.95, format!("smallest randomized/relaxed ratio {worst:.6}")));

    // Containments on shared grids.
    let kap = unit_grid(g.kappa_points);
    let iot = unit_grid(g.iota_points);
    let eps = unit_grid(g.eps_points);
    let rmc = McConfig { trials: g.region_draws, seed, ..sc.mc };
    let dl_i = downlink_region_icsi(m, hs, &p, &taus, &rmc)?;
    let dl_s = downlink_region_scsi(m, hs, &p, &taus, g.randomizations, seed)?;
    out.push(containment("containment/dl-scsi-in-dl-icsi", &dl_i, &dl_s, z));
    for (csi, outer) in [(CsiMode::Icsi, &dl_i), (CsiMode::Scsi, &dl_s)] {
        let fd = fdsac_region(m, hs, &p, &kap, &iot, RegionLink::Downlink, csi)?;
        out.push(containment(&format!("containment/fdsac-dl-{csi}-in-dl-{csi}"), outer, &fd, z));
    }
    for csi in [CsiMode::Icsi, CsiMode::Scsi] {
        let p0 = ScenarioParams { varrho: 0.0, ..p };
        let p2 = ScenarioParams { varrho: 2.0, ..p };
        let ul = uplink_region(m, hs, &p, &truth.cfg, csi, &eps)?;
        let fd = fdsac_region(m, hs, &p, &kap, &iot, RegionLink::Uplink, csi)?;
        out.push(containment(&format!("containment/fdsac-ul-{csi}-in-ul-{csi}"), &ul, &fd, z));
        let ul0 = uplink_region(m, hs, &p0, &truth.cfg, csi, &eps)?;
        let ul2 = uplink_region(m, hs, &p2, &truth.cfg, csi, &eps)?;
        out.push(containment(&format!("containment/ul-{csi}-varrho2-in-varrho0"), &ul0, &ul2, z));
    }

    // Orderings.
    let mut drng = chunk_rng(derive_seed(seed, "orderings"), 0);
    let mut bad = 0usize;
    for _ in 0..1000 {
        let c = comm_coords(&m.eigs, &mut drng);
        let hc2: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let cross = truth.proj.inner(&c).norm_sqr();
        let (cc_cr, sc_cr) = (hc2, cross / hs.norm_sq);
        let (sc_g, cc_g) = (hs.norm_sq, cross / hc2);
        if cc_cr < sc_cr * (1.0 - 1e-12) || sc_g < cc_g * (1.0 - 1e-12) {
            bad += 1;
        }
    }
    out.push(Check::new("ordering/own-objective", bad == 0, format!("{bad} of 1000 draws out of order")));
    let t6 = cc_avg_sr(m, hs, &p)?.exact;
    let t1 = sc_sr_closed(&p, &truth.cfg, hs).exact;
    out.push(Check::new("ordering/cc-sr-within-sc-sr", (0.0..=t1).contains(&t6), format!("{t6:.6} in [0, {t1:.6}]")));
    let (ei, es) = (cc_ecr(&p, &m.eigs)?.exact, scsi_cc_ecr(&p, m.lambda1()).exact);
    out.push(Check::new("ordering/icsi-ecr-above-scsi", ei >= es, format!("{ei:.6} ≥ {es:.6}")));

    // Outage probabilities: in [0, 1], nonincreasing in power, nondecreasing in R₀.
    let om_t = omega(m, hs)?;
    let kappa = scsi_detection_vector(m, hs, &p)?.kappa;
    type OpFn<'a> = Box<dyn Fn(&ScenarioParams) -> Result<f64> + 'a>;
    let families: Vec<(&str, OpFn, bool)> = vec![
        ("downlink/sc", Box::new(|q| Ok(sc_op(q, om_t).exact)), false),
        ("downlink/cc/icsi", Box::new(|q| Ok(cc_op(q, &m.eigs)?.exact)), false),
        ("downlink/cc/scsi", Box::new(|q| Ok(scsi_cc_op(q, m.lambda1()).exact)), false),
        ("uplink/cc/icsi", Box::new(|q| Ok(cc_sic_comm(m, q)?.1.exact)), true),
        ("uplink/sc/scsi", Box::new(|q| Ok(scsi_sc_comm(kappa, q)?.1.exact)), true),
    ];
    for (name, f, up) in families {
        let mut ok = true;
        let mut prev = f64::INFINITY;
        for db in (0..=12).map(|i| 5.0 * f64::from(i)) {
            let s = db_to_linear(db);
            let q = if up { ul_comm(&p, s) } else { dl_comm(&p, s) };
            let v = f(&q)?;
            ok &= (0.0..=1.0).contains(&v) && v <= prev * (1.0 + 1e-12);
            prev = v;
        }
        let mut prev = 0.0;
        for r0 in (1..=16).map(f64::from) {
            let v = f(&ScenarioParams { r0, ..p })?;
            ok &= (0.0..=1.0).contains(&v) && v >= prev * (1.0 - 1e-12);
            prev = v;
        }
        out.push(Check::new(format!("outage-monotone/{name}"), ok, "power 0..60 dB, R0 1..16"));
    }
    Ok(out)
}

/// Runs the whole suite. With `tamper` the closed forms see correlation
/// eigenvalues scaled by that factor while the oracles keep the true ones.
pub fn cmd_validate(sc: &Scenario, tamper: Option<f64>) -> Result<ValidationReport> {
    let truth = Scene::new(&sc.cfg, &sc.params)?;
    let cf = match tamper {
        Some(f) => truth.with_scaled_eigs(f),
        None => truth.clone(),
    };
    let pairings = run_pairings(&cf, &truth, sc)?;
    let mut invariants = invariant_suite(&cf, &truth, sc)?;
    invariants.extend(high_snr_checks(&cf, &sc.params)?);
    invariants.extend(diversity_checks(&cf, &sc.params)?);
    let failures: Vec<String> = pairings
        .iter()
        .filter(|p| !p.pass)
        .map(|p| p.metric.clone())
        .chain(invariants.iter().filter(|c| !c.pass).map(|c| c.name.clone()))
        .collect();
    Ok(ValidationReport {
        library_version: crate::VERSION.into(),
        scenario_hash: sc.hash(),
        seed: sc.mc.seed,
        trials: sc.mc.trials,
        tail_trials: sc.tail_trials,
        ci_z: sc.mc.ci_z,
        tampered: tamper.is_some(),
        pass: failures.is_empty(),
        pairings,
        invariants,
        failures,
    })
}
