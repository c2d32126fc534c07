//! Batch commands behind the `hisac` binary: metric sweeps, rate regions and
//! the validation suite, with CSV/JSON output and a manifest per directory.

pub mod scenario;
pub mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use scenario::{Scenario, ScenarioFile};
pub use validate::{cmd_validate, ValidationReport};

use crate::downlink::CsiMode;
use crate::error::{Error, Result};
use crate::montecarlo::McConfig;
use crate::oracle::{evaluate, Design, Link, Metric, Query, Scene};
use crate::params::{db_to_linear, ScenarioParams};
use crate::region::{
    containment_violations, downlink_region_icsi, downlink_region_scsi, fdsac_region, unit_grid, uplink_region,
    Link as RegionLink, RateRegion, Violation,
};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for a failed check or a failed computation.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for bad arguments or configuration.
pub const EXIT_USAGE: i32 = 2;

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

const VALID_SWEEPS: &str = "downlink × {sc, cc, pareto, fdsac} × {icsi, scsi} × {sr, ecr, op}; \
                            uplink × {sc, cc, fdsac} × {icsi, scsi} × {sr, ecr, op}";

/// Parameters with the swept SNR applied: p/σ_s² or p/σ_c² on the downlink,
/// p_s/σ_u² or p_c/σ_u² on the uplink.
pub fn at_snr(params: &ScenarioParams, link: Link, metric: Metric, snr: f64) -> ScenarioParams {
    match (link, metric) {
        (Link::Downlink, Metric::Sr) => ScenarioParams { sigma2_s: params.p / snr, ..*params },
        (Link::Downlink, _) => ScenarioParams { sigma2_c: params.p / snr, ..*params },
        (Link::Uplink, Metric::Sr) => ScenarioParams { p_s: snr * params.noise_u(), ..*params },
        (Link::Uplink, _) => ScenarioParams { p_c: snr * params.noise_u(), ..*params },
    }
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// One sweep: a CSV with columns snr_db, closed_form, high_snr_approx,
/// mc_mean, mc_se. Every row reuses the same draws.
pub fn cmd_sweep(
    sc: &Scenario,
    link: Link,
    metric: Metric,
    design: Design,
    csi: CsiMode,
    snr_db: &[f64],
) -> Result<String> {
    if link == Link::Uplink && design == Design::Pareto {
        return Err(Error::Config(format!("invalid combination uplink/pareto; valid: {VALID_SWEEPS}")));
    }
    if snr_db.is_empty() {
        return Err(Error::Config("empty SNR grid".into()));
    }
    let scene = Scene::new(&sc.cfg, &sc.params)?;
    let g = &sc.file.grids;
    let query = Query { tau: g.tau, randomizations: g.randomizations, ..Query::new(link, metric, design, csi) };
    let mut csv = String::from("snr_db,closed_form,high_snr_approx,mc_mean,mc_se\n");
    for &db in snr_db {
        let params = at_snr(&sc.params, link, metric, db_to_linear(db));
        let ev = evaluate(&scene, &scene, &params, &query)?;
        let tail = metric == Metric::Op && ev.closed_form < 1e-3;
        let mc = McConfig { trials: if tail { sc.tail_trials } else { sc.mc.trials }, ..sc.mc };
        let est = ev.oracle.run(&mc)?;
        csv.push_str(&format!("{db},{},{},{},{}\n", num(ev.closed_form), num(ev.approx), num(est.mean), num(est.se)));
    }
    Ok(csv)
}

/// Region families of the `region` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionMode {
    DlIcsi,
    DlScsi,
    Ul,
    FdsacDl,
    FdsacUl,
}

impl fmt::Display for RegionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionMode::DlIcsi => "dl-icsi",
            RegionMode::DlScsi => "dl-scsi",
            RegionMode::Ul => "ul",
            RegionMode::FdsacDl => "fdsac-dl",
            RegionMode::FdsacUl => "fdsac-ul",
        })
    }
}

impl FromStr for RegionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dl-icsi" => RegionMode::DlIcsi,
            "dl-scsi" => RegionMode::DlScsi,
            "ul" => RegionMode::Ul,
            "fdsac-dl" => RegionMode::FdsacDl,
            "fdsac-ul" => RegionMode::FdsacUl,
            _ => {
                return Err(Error::Config(format!(
                    "unknown region `{s}`, expected one of: dl-icsi, dl-scsi, ul, fdsac-dl, fdsac-ul"
                )))
            }
        })
    }
}

impl RegionMode {
    /// Whether the CSI mode changes this region.
    pub fn uses_csi(self) -> bool {
        matches!(self, RegionMode::Ul | RegionMode::FdsacDl | RegionMode::FdsacUl)
    }
}

/// Computes one region. `varrho` overrides the uplink interference level.
pub fn cmd_region(sc: &Scenario, mode: RegionMode, csi: CsiMode, varrho: Option<f64>) -> Result<RateRegion> {
    let mut params = sc.params;
    if let Some(v) = varrho {
        params.varrho = v;
        params.validate()?;
    }
    let scene = Scene::new(&sc.cfg, &params)?;
    let (m, hs) = (&scene.model, &scene.hs);
    let g = &sc.file.grids;
    let seed = sc.mc.seed;
    match mode {
        RegionMode::DlIcsi => {
            let mc = McConfig { trials: g.region_draws, ..sc.mc };
            downlink_region_icsi(m, hs, &params, &unit_grid(g.tau_points), &mc)
        }
        RegionMode::DlScsi => downlink_region_scsi(m, hs, &params, &unit_grid(g.tau_points), g.randomizations, seed),
        RegionMode::Ul => uplink_region(m, hs, &params, &sc.cfg, csi, &unit_grid(g.eps_points)),
        RegionMode::FdsacDl | RegionMode::FdsacUl => {
            let link = if mode == RegionMode::FdsacDl { RegionLink::Downlink } else { RegionLink::Uplink };
            fdsac_region(m, hs, &params, &unit_grid(g.kappa_points), &unit_grid(g.iota_points), link, csi)
        }
    }
}

/// Output file name of a region run.
pub fn region_file_name(mode: RegionMode, csi: CsiMode, varrho: Option<f64>) -> String {
    let mut name = format!("region-{mode}");
    if mode.uses_csi() {
        name.push_str(&format!("-{csi}"));
    }
    if let Some(v) = varrho {
        name.push_str(&format!("-varrho{v}"));
    }
    name.push_str(".csv");
    name
}

/// Output file name of a sweep.
pub fn sweep_file_name(link: Link, metric: Metric, design: Design, csi: CsiMode) -> String {
    format!("sweep-{link}-{design}-{csi}-{metric}.csv")
}

/// Outcome of a containment check between two regions.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub inner: String,
    pub outer: String,
    pub points: usize,
    pub violations: Vec<Violation>,
    pub pass: bool,
}

/// Checks that `inner` lies under the boundary of `outer`.
pub fn check_containment(
    inner_name: &str,
    inner: &RateRegion,
    outer_name: &str,
    outer: &RateRegion,
    z: f64,
) -> ContainmentReport {
    let violations = containment_violations(outer, inner, z);
    ContainmentReport {
        inner: inner_name.into(),
        outer: outer_name.into(),
        points: inner.points.len(),
        pass: violations.is_empty(),
        violations,
    }
}

/// One file listed in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub command: String,
    pub scenario_hash: String,
    pub sha256: String,
}

/// `manifest.json`: every file written into an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub library_version: String,
    pub files: BTreeMap<String, ManifestEntry>,
}

/// Writes `files` into `dir` and records them in `dir/manifest.json`.
pub fn write_outputs(dir: &Path, command: &str, sc: &Scenario, files: &[(String, Vec<u8>)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("manifest.json");
    let mut manifest = std::fs::read_to_string(&path)
        .ok()
        .and_then(|t| serde_json::from_str::<Manifest>(&t).ok())
        .unwrap_or(Manifest { library_version: crate::VERSION.into(), files: BTreeMap::new() });
    manifest.library_version = crate::VERSION.into();
    let hash = sc.hash();
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
        manifest.files.insert(
            name.clone(),
            ManifestEntry {
                command: command.into(),
                scenario_hash: hash.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
            },
        );
    }
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_names() {
        for s in ["dl-icsi", "dl-scsi", "ul", "fdsac-dl", "fdsac-ul"] {
            assert_eq!(s.parse::<RegionMode>().unwrap().to_string(), s);
        }
        assert_eq!(region_file_name(RegionMode::Ul, CsiMode::Scsi, Some(2.0)), "region-ul-scsi-varrho2.csv");
        assert_eq!(region_file_name(RegionMode::DlIcsi, CsiMode::Scsi, None), "region-dl-icsi.csv");
    }

    #[test]
    fn uplink_pareto_is_a_usage_error() {
        let sc = ScenarioFile::default().resolve().unwrap();
        let e = cmd_sweep(&sc, Link::Uplink, Metric::Sr, Design::Pareto, CsiMode::Icsi, &[30.0]).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_USAGE);
    }
}
