//! `hisac`: sweeps, rate regions and the validation suite from a scenario file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hisac::cli::{
    check_containment, cmd_region, cmd_sweep, cmd_validate, exit_code, region_file_name, sweep_file_name,
    write_outputs, RegionMode, Scenario, ScenarioFile, EXIT_FAIL, EXIT_OK, EXIT_USAGE,
};
use hisac::downlink::CsiMode;
use hisac::oracle::{Design, Link, Metric};

/// Holographic-MIMO ISAC performance analysis.
///
/// Every global option can also be set through an environment variable with
/// the HISAC_ prefix; flags win over the environment, which wins over the
/// scenario file.
#[derive(Parser, Debug)]
#[command(name = "hisac", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Scenario JSON; omitted fields take the reference values.
    #[arg(long, global = true, env = "HISAC_CONFIG", value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "HISAC_OUT", value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master Monte Carlo seed.
    #[arg(long, global = true, env = "HISAC_SEED", value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "HISAC_WORKERS", value_name = "N")]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed form, high-SNR form and Monte Carlo estimate over an SNR grid.
    Sweep {
        #[arg(long)]
        link: Link,
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        design: Design,
        #[arg(long, default_value = "icsi")]
        csi: CsiMode,
        /// SNR points in dB; defaults to grids.snr_db.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr_db: Option<Vec<f64>>,
        /// Pareto weight; defaults to grids.tau.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// SR-CR region points.
    Region {
        /// dl-icsi, dl-scsi, ul, fdsac-dl or fdsac-ul.
        mode: RegionMode,
        #[arg(long, default_value = "icsi")]
        csi: CsiMode,
        /// Uplink interference level ϱ.
        #[arg(long)]
        varrho: Option<f64>,
        /// Also check that the region lies inside this one; exit 1 if not.
        #[arg(long, value_name = "MODE")]
        within: Option<RegionMode>,
        /// ϱ of the enclosing region.
        #[arg(long)]
        within_varrho: Option<f64>,
    },
    /// Every closed form against its oracle plus the invariant suites.
    Validate {
        /// Scales the correlation eigenvalues of the closed forms by 1.1.
        #[arg(long, hide = true)]
        tamper_eigs: bool,
    },
}

fn load(global: &Global) -> hisac::Result<(Scenario, PathBuf)> {
    let mut file = match &global.config {
        Some(path) => ScenarioFile::load(path)?,
        None => ScenarioFile::default(),
    };
    if let Some(seed) = global.seed {
        file.mc.seed = seed;
    }
    if let Some(workers) = global.workers {
        file.mc.workers = workers;
    }
    let out = global.out.clone().unwrap_or_else(|| PathBuf::from(&file.output.dir));
    Ok((file.resolve()?, out))
}

fn run(cli: Cli) -> hisac::Result<i32> {
    let (mut sc, out) = load(&cli.global)?;
    match cli.command {
        Command::Sweep { link, metric, design, csi, snr_db, tau } => {
            if let Some(t) = tau {
                sc.file.grids.tau = t;
                sc = sc.file.resolve()?;
            }
            let grid = snr_db.unwrap_or_else(|| sc.file.grids.snr_db.clone());
            let csv = cmd_sweep(&sc, link, metric, design, csi, &grid)?;
            let name = sweep_file_name(link, metric, design, csi);
            write_outputs(
                &out,
                &format!("sweep {link} {metric} {design} {csi}"),
                &sc,
                &[(name.clone(), csv.into_bytes())],
            )?;
            println!("{}", out.join(name).display());
            Ok(EXIT_OK)
        }
        Command::Region { mode, csi, varrho, within, within_varrho } => {
            let region = cmd_region(&sc, mode, csi, varrho)?;
            let name = region_file_name(mode, csi, varrho);
            let mut files = vec![(name.clone(), region.to_csv().into_bytes())];
            let mut code = EXIT_OK;
            if let Some(outer_mode) = within {
                let outer = cmd_region(&sc, outer_mode, csi, within_varrho)?;
                let outer_name = region_file_name(outer_mode, csi, within_varrho);
                let report = check_containment(&name, &region, &outer_name, &outer, sc.mc.ci_z);
                println!(
                    "containment {} in {}: {} ({} points, {} violations)",
                    name,
                    outer_name,
                    if report.pass { "pass" } else { "FAIL" },
                    report.points,
                    report.violations.len()
                );
                if !report.pass {
                    code = EXIT_FAIL;
                }
                let stem = name.trim_end_matches(".csv");
                let mut json = serde_json::to_string_pretty(&report).map_err(hisac::Error::from)?;
                json.push('\n');
                files.push((format!("containment-{stem}.json"), json.into_bytes()));
            }
            write_outputs(&out, &format!("region {mode} {csi}"), &sc, &files)?;
            println!("{}", out.join(name).display());
            Ok(code)
        }
        Command::Validate { tamper_eigs } => {
            let report = cmd_validate(&sc, tamper_eigs.then_some(1.1))?;
            for p in &report.pairings {
                println!("{} {} z={:.2}", if p.pass { "pass" } else { "FAIL" }, p.metric, p.z_score);
            }
            for c in &report.invariants {
                println!("{} {} {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            println!(
                "{} pairings, {} checks, {} failures",
                report.pairings.len(),
                report.invariants.len(),
                report.failures.len()
            );
            let mut json = serde_json::to_string_pretty(&report).map_err(hisac::Error::from)?;
            json.push('\n');
            write_outputs(&out, "validate", &sc, &[("validate.json".into(), json.into_bytes())])?;
            Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("hisac: {e}");
            let code = exit_code(&e);
            ExitCode::from(if code == EXIT_USAGE { EXIT_USAGE as u8 } else { code as u8 })
        }
    }
}
