//! SR-CR rate regions: the downlink Pareto sweep under I-CSI, the S-CSI
//! relaxation with Gaussian randomization, uplink time-sharing and the FDSAC
//! baselines, plus a sampled containment check between regions.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::array::ArrayConfig;
use crate::channels::{CorrelatedChannelModel, SensingChannel, SensingProjection};
use crate::downlink::{fdsac_downlink, pareto_scalar, sr_from_gain, CsiMode};
use crate::error::{domain, Error, Result};
use crate::linalg::{cn, hermitian_eigen, CMatrix, CVector};
use crate::montecarlo::{chunk_rng, comm_coords, estimate_vec, McConfig};
use crate::params::ScenarioParams;
use crate::special::exponential_ecr;
use crate::uplink::{design_corners, fdsac_uplink, time_sharing_pair};

/// One achievable (SR, CR) pair and the knob that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct RegionPoint {
    /// τ, ε or κ.
    pub knob: f64,
    /// ι for the downlink FDSAC sweep.
    pub knob2: Option<f64>,
    pub sr: f64,
    pub cr: f64,
    /// Monte Carlo standard errors; zero for closed-form points.
    pub sr_se: f64,
    pub cr_se: f64,
    pub design: String,
    pub label: String,
}

impl RegionPoint {
    fn exact(knob: f64, sr: f64, cr: f64, design: &str, label: &str) -> Self {
        Self { knob, knob2: None, sr, cr, sr_se: 0.0, cr_se: 0.0, design: design.into(), label: label.into() }
    }

    /// Knob rendered for CSV output.
    pub fn knob_text(&self) -> String {
        match self.knob2 {
            Some(k2) => format!("{:.6}:{:.6}", self.knob, k2),
            None => format!("{:.6}", self.knob),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RegionMeta {
    pub grid: usize,
    /// Channel draws per grid point (I-CSI averaging).
    pub draws: Option<usize>,
    /// Gaussian randomizations per grid point (S-CSI).
    pub randomizations: Option<usize>,
    /// Draws on which the Pareto solver failed.
    pub failures: usize,
}

/// Ordered list of region points.
#[derive(Debug, Clone, Serialize)]
pub struct RateRegion {
    pub points: Vec<RegionPoint>,
    pub meta: RegionMeta,
}

impl RateRegion {
    /// Points that no other point dominates, sorted by SR with CR nonincreasing.
    pub fn boundary(&self) -> Vec<RegionPoint> {
        pareto_filter(&self.points)
    }

    /// CSV with columns knob, sr, cr, design, label.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("knob,sr,cr,design,label\n");
        for p in &self.points {
            s.push_str(&format!("{},{:.12e},{:.12e},{},{}\n", p.knob_text(), p.sr, p.cr, p.design, p.label));
        }
        s
    }
}

/// Removes dominated points; ties keep the first occurrence.
pub fn pareto_filter(points: &[RegionPoint]) -> Vec<RegionPoint> {
    let mut sorted: Vec<RegionPoint> = points.to_vec();
    sorted.sort_by(|a, b| b.sr.total_cmp(&a.sr).then(b.cr.total_cmp(&a.cr)));
    let mut out: Vec<RegionPoint> = Vec::new();
    let mut best_cr = f64::NEG_INFINITY;
    for p in sorted {
        if p.cr > best_cr {
            best_cr = p.cr;
            out.push(p);
        }
    }
    out.reverse();
    out
}

/// `n` evenly spaced points on [0, 1].
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return domain("grid must be a nonempty subset of [0, 1]");
    }
    Ok(())
}

/// Downlink I-CSI region: per τ, the Pareto beam's (SR, CR) averaged over
/// `mc.trials` channel draws. Every τ sees the same draws.
pub fn downlink_region_icsi(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    taus: &[f64],
    mc: &McConfig,
) -> Result<RateRegion> {
    check_grid(taus)?;
    let proj = SensingProjection::new(model, hs);
    let snr_c = params.snr_c();
    let k2 = params.snr_s() * params.l() * params.alpha_s * hs.norm_sq;
    let n2 = k2 * hs.norm_sq;
    let l = params.l();
    let failures = AtomicUsize::new(0);
    let mut points = Vec::with_capacity(taus.len());
    for &tau in taus {
        let est = estimate_vec(mc, 2, |rng, out| {
            let c = comm_coords(&model.eigs, rng);
            let n1 = snr_c * c.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let rho = (snr_c * k2).sqrt() * proj.inner(&c).norm();
            match pareto_scalar(n1, n2, rho, tau, l) {
                Ok(pt) => {
                    out[0] = pt.sr;
                    out[1] = pt.cr;
                }
                Err(_) => {
                    failures.fetch_add(1, Ordering::Relaxed);
                    out[0] = (rho * rho / n1).ln_1p() / std::f64::consts::LN_2 / l;
                    out[1] = n1.ln_1p() / std::f64::consts::LN_2;
                }
            }
        })?;
        points.push(RegionPoint {
            knob: tau,
            knob2: None,
            sr: est[0].mean,
            cr: est[1].mean,
            sr_se: est[0].se,
            cr_se: est[1].se,
            design: "pareto".into(),
            label: "dl-icsi".into(),
        });
    }
    let failures = failures.into_inner();
    if failures * 100 > mc.trials * taus.len() {
        return Err(Error::Solver(format!("Pareto solver failed on {failures} of {} draws", mc.trials * taus.len())));
    }
    Ok(RateRegion {
        points,
        meta: RegionMeta { grid: taus.len(), draws: Some(mc.trials), failures, ..Default::default() },
    })
}

/// R and h_s in the orthonormal basis [U, q] of span(U, h_s).
#[derive(Debug, Clone)]
pub struct CompressedScene {
    /// Eigenvalues of R, padded with a zero for q when h_s leaves span(U).
    pub r_diag: Vec<f64>,
    /// h_s in the compressed basis.
    pub h: Vec<Complex64>,
    /// Unit q, when present.
    pub q: Option<CVector>,
}

impl CompressedScene {
    pub fn new(model: &CorrelatedChannelModel, hs: &SensingChannel) -> Self {
        let proj = SensingProjection::new(model, hs);
        let mut r_diag = model.eigs.clone();
        let mut h = proj.g.clone();
        let orth = proj.orth_sq.sqrt();
        let q = if orth > 1e-12 * proj.norm_sq.sqrt() {
            r_diag.push(0.0);
            h.push(Complex64::from(orth));
            Some((&hs.h_s - &model.basis * CVector::from_column_slice(&proj.g)) / Complex64::from(orth))
        } else {
            None
        };
        Self { r_diag, h, q }
    }

    pub fn dim(&self) -> usize {
        self.r_diag.len()
    }

    /// uᴴRu.
    pub fn r_form(&self, u: &[Complex64]) -> f64 {
        u.iter().zip(&self.r_diag).map(|(z, l)| l * z.norm_sqr()).sum()
    }

    /// uᴴHu = |h_sᴴu|².
    pub fn h_form(&self, u: &[Complex64]) -> f64 {
        self.h.iter().zip(u).map(|(h, z)| h.conj() * z).sum::<Complex64>().norm_sqr()
    }

    /// (1−μ)/(1−τ)·R + μ/τ·H.
    fn pencil(&self, mu: f64, tau: f64) -> CMatrix {
        let (a, b) = ((1.0 - mu) / (1.0 - tau), mu / tau);
        let m = self.dim();
        CMatrix::from_fn(m, m, |i, j| {
            let d = if i == j { a * self.r_diag[i] } else { 0.0 };
            Complex64::from(d) + self.h[i] * self.h[j].conj() * b
        })
    }

    /// Largest eigenvalue of the pencil from its secular equation
    /// 1 = b·Σ|h_i|²/(λ − a·r_i).
    fn top_eigenvalue(&self, mu: f64, tau: f64) -> f64 {
        let (a, b) = ((1.0 - mu) / (1.0 - tau), mu / tau);
        let diag_max = self.r_diag.iter().fold(0.0f64, |m, &r| m.max(a * r));
        let weights: Vec<(f64, f64)> = self
            .r_diag
            .iter()
            .zip(&self.h)
            .map(|(&r, h)| (a * r, b * h.norm_sqr()))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        let Some(pole) = weights.iter().map(|w| w.0).reduce(f64::max) else {
            return diag_max;
        };
        let secular = |l: f64| 1.0 - weights.iter().map(|&(d, w)| w / (l - d)).sum::<f64>();
        let (mut lo, mut hi) = (pole, pole + weights.iter().map(|w| w.1).sum::<f64>());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if secular(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.max(diag_max)
    }

    /// Lifts compressed coordinates back to C^N.
    pub fn lift(&self, model: &CorrelatedChannelModel, u: &[Complex64]) -> CVector {
        let n = model.rank();
        let mut v = &model.basis * CVector::from_column_slice(&u[..n]);
        if let Some(q) = &self.q {
            v += q * u[n];
        }
        v
    }
}

/// Solution of the relaxed S-CSI problem for one τ.
#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    pub tau: f64,
    /// Dual multiplier minimizing λ_max((1−μ)R/(1−τ) + μH/τ).
    pub mu: f64,
    /// Minimax value.
    pub x_star: f64,
    /// W* = P·Pᴴ in compressed coordinates; trace one.
    pub factor: CMatrix,
    /// min(tr(RW*)/(1−τ), tr(HW*)/τ), equal to x_star up to tolerance.
    pub primal: f64,
}

impl RelaxedSolution {
    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    /// Dense W* in compressed coordinates.
    pub fn w(&self) -> CMatrix {
        &self.factor * self.factor.adjoint()
    }
}

fn ratio(scene: &CompressedScene, u: &[Complex64], tau: f64) -> f64 {
    (scene.r_form(u) / (1.0 - tau)).min(scene.h_form(u) / tau)
}

/// Solves max over trace-one W ⪰ 0 of min(tr(RW)/(1−τ), tr(HW)/τ) through its
/// one-dimensional dual, for τ ∈ (0, 1).
pub fn scsi_relaxed_solve(scene: &CompressedScene, tau: f64) -> Result<RelaxedSolution> {
    if !(tau > 0.0 && tau < 1.0) {
        return domain(format!("the relaxation needs τ in (0, 1), got {tau}"));
    }
    let top = |mu: f64| -> Result<f64> { Ok(scene.top_eigenvalue(mu, tau)) };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (top(c)?, top(d)?);
    let mut iters = 0;
    while b - a > 1e-10 {
        iters += 1;
        if iters > 200 {
            return Err(Error::Solver(format!("golden section did not converge at τ = {tau}")));
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = top(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = top(d)?;
        }
    }
    let mut mu = 0.5 * (a + b);
    for end in [0.0, 1.0] {
        if top(end)? < top(mu)? {
            mu = end;
        }
    }
    let (vals, vecs) = hermitian_eigen(scene.pencil(mu, tau))?;
    let x_star = vals[0];
    let k = vals.iter().take_while(|&&v| v >= x_star * (1.0 - 1e-7)).count();
    let top_space = vecs.columns(0, k).into_owned();
    let factor = equalize(scene, &top_space, tau)?;
    let cols: Vec<Vec<Complex64>> = (0..factor.ncols()).map(|j| factor.column(j).iter().copied().collect()).collect();
    let tr_r: f64 = cols.iter().map(|u| scene.r_form(u)).sum();
    let tr_h: f64 = cols.iter().map(|u| scene.h_form(u)).sum();
    let primal = (tr_r / (1.0 - tau)).min(tr_h / tau);
    Ok(RelaxedSolution { tau, mu, x_star, factor, primal })
}

/// Trace-one W inside the top eigenspace V that balances the two constraints
/// when V allows it; returned as a factor P with W = PPᴴ.
fn equalize(scene: &CompressedScene, v: &CMatrix, tau: f64) -> Result<CMatrix> {
    let k = v.ncols();
    if k == 1 {
        return Ok(v.clone());
    }
    let m = scene.dim();
    let hv: Vec<Complex64> = (0..k).map(|j| (0..m).map(|i| scene.h[i].conj() * v[(i, j)]).sum()).collect();
    let b = CMatrix::from_fn(k, k, |i, j| {
        let r: Complex64 = (0..m).map(|t| v[(t, i)].conj() * v[(t, j)] * scene.r_diag[t]).sum();
        hv[i].conj() * hv[j] / tau - r / (1.0 - tau)
    });
    let (vals, vecs) = hermitian_eigen((&b + b.adjoint()) * Complex64::from(0.5))?;
    let (hi, lo) = (vals[0], vals[k - 1]);
    let e_hi = v * vecs.column(0);
    let e_lo = v * vecs.column(k - 1);
    if lo >= 0.0 {
        return Ok(CMatrix::from_columns(&[e_lo]));
    }
    if hi <= 0.0 {
        return Ok(CMatrix::from_columns(&[e_hi]));
    }
    let theta = -lo / (hi - lo);
    Ok(CMatrix::from_columns(&[e_hi * Complex64::from(theta.sqrt()), e_lo * Complex64::from((1.0 - theta).sqrt())]))
}

/// Gaussian randomization: draws u ~ CN(0, W*) `m` times and keeps the unit
/// direction with the largest min(uᴴHu/τ, uᴴRu/(1−τ)). Returns the compressed
/// direction and its value.
pub fn sdr_randomize<R: Rng + ?Sized>(
    sol: &RelaxedSolution,
    scene: &CompressedScene,
    m: usize,
    rng: &mut R,
) -> Result<(Vec<Complex64>, f64)> {
    if m == 0 {
        return domain("at least one randomization is needed");
    }
    let p = &sol.factor;
    let (dim, k) = (p.nrows(), p.ncols());
    if k == 1 {
        let u: Vec<Complex64> = p.column(0).iter().copied().collect();
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let u: Vec<Complex64> = u.iter().map(|z| z / norm).collect();
        let val = ratio(scene, &u, sol.tau);
        return Ok((u, val));
    }
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    let mut u = vec![Complex64::from(0.0); dim];
    for _ in 0..m {
        let d: Vec<Complex64> = (0..k).map(|_| cn(rng)).collect();
        for (i, ui) in u.iter_mut().enumerate() {
            *ui = (0..k).map(|j| p[(i, j)] * d[j]).sum();
        }
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let unit: Vec<Complex64> = u.iter().map(|z| z / norm).collect();
        let val = ratio(scene, &unit, sol.tau);
        if val > best.1 {
            best = (unit, val);
        }
    }
    Ok(best)
}

/// S-CSI Pareto beam u = w* in compressed coordinates for one τ.
pub fn scsi_pareto_beam<R: Rng + ?Sized>(
    scene: &CompressedScene,
    tau: f64,
    randomizations: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(0.0..=1.0).contains(&tau) {
        return domain(format!("τ must lie in [0, 1], got {tau}"));
    }
    let mut u = vec![Complex64::from(0.0); scene.dim()];
    if tau == 0.0 {
        u[0] = Complex64::from(1.0);
    } else if tau == 1.0 {
        let norm = scene.h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        u = scene.h.iter().map(|z| z / norm).collect();
    } else {
        let sol = scsi_relaxed_solve(scene, tau)?;
        u = sdr_randomize(&sol, scene, randomizations, rng)?.0;
    }
    Ok(u)
}

/// Downlink S-CSI region. Interior τ use the relaxation and randomization;
/// τ = 0 and τ = 1 use the principal-mode and matched-filter beams.
pub fn downlink_region_scsi(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    taus: &[f64],
    randomizations: usize,
    seed: u64,
) -> Result<RateRegion> {
    check_grid(taus)?;
    let scene = CompressedScene::new(model, hs);
    let snr_c = params.snr_c();
    let mut points = Vec::with_capacity(taus.len());
    for (i, &tau) in taus.iter().enumerate() {
        let u = scsi_pareto_beam(&scene, tau, randomizations, &mut chunk_rng(seed, i as u64))?;
        let sr = sr_from_gain(scene.h_form(&u), hs, params);
        let cr = exponential_ecr(snr_c * scene.r_form(&u));
        points.push(RegionPoint::exact(tau, sr, cr, "sdr", "dl-scsi"));
    }
    Ok(RateRegion {
        points,
        meta: RegionMeta { grid: taus.len(), randomizations: Some(randomizations), ..Default::default() },
    })
}

/// Uplink time-sharing segment between the C-C SIC (ε = 0) and S-C SIC
/// (ε = 1) corner points.
pub fn uplink_region(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    cfg: &ArrayConfig,
    csi: CsiMode,
    eps: &[f64],
) -> Result<RateRegion> {
    check_grid(eps)?;
    let [cc, sc] = design_corners(model, hs, params, cfg, csi)?;
    let label = match csi {
        CsiMode::Icsi => "ul-icsi",
        CsiMode::Scsi => "ul-scsi",
    };
    let points = eps
        .iter()
        .map(|&e| {
            let (sr, cr) = time_sharing_pair(e, (sc.sr, sc.ecr), (cc.sr, cc.ecr))?;
            Ok(RegionPoint::exact(e, sr, cr, "time-sharing", label))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateRegion { points, meta: RegionMeta { grid: eps.len(), ..Default::default() } })
}

/// Which link an FDSAC sweep describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Downlink,
    Uplink,
}

/// FDSAC envelope: (κ, ι) sweep on the downlink, κ sweep on the uplink,
/// Pareto filtered.
pub fn fdsac_region(
    model: &CorrelatedChannelModel,
    hs: &SensingChannel,
    params: &ScenarioParams,
    kappas: &[f64],
    iotas: &[f64],
    link: Link,
    csi: CsiMode,
) -> Result<RateRegion> {
    check_grid(kappas)?;
    let tag = match (link, csi) {
        (Link::Downlink, CsiMode::Icsi) => "fdsac-dl-icsi",
        (Link::Downlink, CsiMode::Scsi) => "fdsac-dl-scsi",
        (Link::Uplink, CsiMode::Icsi) => "fdsac-ul-icsi",
        (Link::Uplink, CsiMode::Scsi) => "fdsac-ul-scsi",
    };
    let mut all = Vec::new();
    for &kappa in kappas {
        match link {
            Link::Downlink => {
                check_grid(iotas)?;
                for &iota in iotas {
                    let p = ScenarioParams { kappa, iota, ..*params };
                    let (sr, cr) = fdsac_downlink(model, hs, &p, csi)?;
                    let mut pt = RegionPoint::exact(kappa, sr, cr, "fdsac", tag);
                    pt.knob2 = Some(iota);
                    all.push(pt);
                }
            }
            Link::Uplink => {
                let p = ScenarioParams { kappa, ..*params };
                let (sr, cr) = fdsac_uplink(model, hs, &p, csi)?;
                all.push(RegionPoint::exact(kappa, sr, cr, "fdsac", tag));
            }
        }
    }
    let grid = all.len();
    Ok(RateRegion { points: pareto_filter(&all), meta: RegionMeta { grid, ..Default::default() } })
}

/// A point of the inner region lying above the outer envelope.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub knob: String,
    pub sr: f64,
    pub cr: f64,
    /// Envelope CR at this SR.
    pub envelope: f64,
    pub slack: f64,
}

/// Checks every point of `inner` against the region under the piecewise-linear
/// boundary of `outer`, allowing `z` combined standard errors.
pub fn containment_violations(outer: &RateRegion, inner: &RateRegion, z: f64) -> Vec<Violation> {
    let b = outer.boundary();
    let mut out = Vec::new();
    if b.is_empty() {
        return inner
            .points
            .iter()
            .map(|p| Violation { knob: p.knob_text(), sr: p.sr, cr: p.cr, envelope: f64::NEG_INFINITY, slack: 0.0 })
            .collect();
    }
    for p in &inner.points {
        let last = b.last().expect("boundary is nonempty");
        let sr_slack = z * (p.sr_se.powi(2) + last.sr_se.powi(2)).sqrt() + 1e-9;
        let (env, env_se) = if p.sr <= b[0].sr {
            (b[0].cr, b[0].cr_se)
        } else if p.sr >= last.sr {
            if p.sr > last.sr + sr_slack {
                (f64::NEG_INFINITY, 0.0)
            } else {
                (last.cr, last.cr_se)
            }
        } else {
            let j = b.iter().position(|q| q.sr >= p.sr).expect("bracketed by the checks above");
            let (l, r) = (&b[j - 1], &b[j]);
            let t = (p.sr - l.sr) / (r.sr - l.sr);
            (l.cr + t * (r.cr - l.cr), l.cr_se.max(r.cr_se))
        };
        let slack = z * (p.cr_se.powi(2) + env_se.powi(2)).sqrt() + 1e-9;
        if p.cr > env + slack {
            out.push(Violation { knob: p.knob_text(), sr: p.sr, cr: p.cr, envelope: env, slack });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(sr: f64, cr: f64) -> RegionPoint {
        RegionPoint::exact(0.0, sr, cr, "t", "t")
    }

    #[test]
    fn filter_keeps_only_nondominated_points() {
        let pts = vec![pt(1.0, 5.0), pt(2.0, 4.0), pt(1.5, 3.0), pt(3.0, 1.0), pt(2.0, 4.0)];
        let b = pareto_filter(&pts);
        let pairs: Vec<(f64, f64)> = b.iter().map(|p| (p.sr, p.cr)).collect();
        assert_eq!(pairs, vec![(1.0, 5.0), (2.0, 4.0), (3.0, 1.0)]);
    }

    #[test]
    fn containment_uses_linear_envelope() {
        let outer = RateRegion { points: vec![pt(0.0, 4.0), pt(2.0, 0.0)], meta: RegionMeta::default() };
        let inside = RateRegion { points: vec![pt(1.0, 1.9)], meta: RegionMeta::default() };
        let outside = RateRegion { points: vec![pt(1.0, 2.1), pt(2.5, 0.0)], meta: RegionMeta::default() };
        assert!(containment_violations(&outer, &inside, 3.0).is_empty());
        assert_eq!(containment_violations(&outer, &outside, 3.0).len(), 2);
    }

    #[test]
    fn secular_root_matches_dense_eigenvalue() {
        let scene = CompressedScene {
            r_diag: vec![3.0, 2.0, 2.0, 0.5, 0.0],
            h: vec![
                Complex64::new(0.3, 0.1),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, -0.4),
                Complex64::new(0.2, 0.2),
                Complex64::new(0.7, 0.0),
            ],
            q: None,
        };
        for (mu, tau) in [(0.0, 0.3), (0.2, 0.3), (0.7, 0.5), (1.0, 0.9)] {
            let dense = hermitian_eigen(scene.pencil(mu, tau)).unwrap().0[0];
            let fast = scene.top_eigenvalue(mu, tau);
            assert!((dense - fast).abs() < 1e-12 * dense.max(1.0), "{mu} {tau}: {dense} vs {fast}");
        }
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(unit_grid(41).len(), 41);
        assert_eq!(unit_grid(41)[40], 1.0);
        assert_eq!(unit_grid(3), vec![0.0, 0.5, 1.0]);
    }
}
