//! CSV result tables and the run manifest.
//!
//! Deployment table columns, in order:
//!
//! | column | unit |
//! |---|---|
//! | `scenario` | |
//! | `system` | `wifi-baseline`, `wifi-aggressive`, `static`, `zf-ideal`, `zf-erroneous` |
//! | `nx`, `ny`, `ap_count` | |
//! | `ap_density` | APs/km^2 |
//! | `k` | channels (`K_wifi` or `K*`), empty for ZF |
//! | `k_star_found` | `true` if some `K` met the outage constraint, empty unless static |
//! | `snapshots` | |
//! | `lambda_s_mean`, `lambda_s_halfwidth`, `lambda_s_lower`, `lambda_s_upper` | Mbps/km^2, 95% normal interval |
//! | `outage_mean`, `outage_halfwidth`, `outage_lower`, `outage_upper` | proportion, 95% Wilson interval |
//! | `served_users` | users summed over snapshots |
//! | `mu` | Mbps/user |
//! | `demand` | GB/month/user |
//! | `outage_ok` | outage upper bound below beta |
//! | `redraws` | singular-channel redraws summed over snapshots |
//! | `solver_fallbacks` | snapshots whose power solver hit its iteration limit |
//!
//! Dimensioning table columns: `scenario`, `system`, `demand`,
//! `status` (`feasible` or `infeasible-up-to-cap`), `nx`, `ny`,
//! `ap_count`, `ap_density`, `ladder_cap`.
//!
//! Floats are written with 9 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::engine::{DeploymentRecord, DimensioningResult};
use crate::error::Result;
use crate::scenario::Scenario;

pub const DEPLOYMENT_COLUMNS: [&str; 23] = [
    "scenario",
    "system",
    "nx",
    "ny",
    "ap_count",
    "ap_density",
    "k",
    "k_star_found",
    "snapshots",
    "lambda_s_mean",
    "lambda_s_halfwidth",
    "lambda_s_lower",
    "lambda_s_upper",
    "outage_mean",
    "outage_halfwidth",
    "outage_lower",
    "outage_upper",
    "served_users",
    "mu",
    "demand",
    "outage_ok",
    "redraws",
    "solver_fallbacks",
];

pub const DIMENSIONING_COLUMNS: [&str; 9] = [
    "scenario",
    "system",
    "demand",
    "status",
    "nx",
    "ny",
    "ap_count",
    "ap_density",
    "ladder_cap",
];

/// 9 significant digits in scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn deployment_row(scenario: &str, r: &DeploymentRecord) -> Vec<String> {
    let e = &r.estimate;
    vec![
        scenario.to_string(),
        r.system.to_string(),
        r.nx.to_string(),
        r.ny.to_string(),
        r.ap_count.to_string(),
        fmt_float(r.ap_density),
        opt(r.k),
        opt(r.reuse.as_ref().map(|s| s.k_star.is_some())),
        e.snapshots.to_string(),
        fmt_float(e.throughput.mean),
        fmt_float(e.throughput.halfwidth),
        fmt_float(e.throughput.lower),
        fmt_float(e.throughput.upper),
        fmt_float(e.outage.mean),
        fmt_float(e.outage.halfwidth),
        fmt_float(e.outage.lower),
        fmt_float(e.outage.upper),
        e.served_users.to_string(),
        fmt_float(r.mu),
        fmt_float(r.demand),
        r.outage_ok.to_string(),
        e.redraws.to_string(),
        e.solver_fallbacks.to_string(),
    ]
}

pub fn write_deployment_csv<W: Write>(out: W, scenario: &str, results: &[DimensioningResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DEPLOYMENT_COLUMNS)?;
    for res in results {
        for r in &res.records {
            w.write_record(deployment_row(scenario, r))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_dimensioning_csv<W: Write>(out: W, scenario: &str, results: &[DimensioningResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIMENSIONING_COLUMNS)?;
    for res in results {
        for p in &res.points {
            let status = if p.ap_count.is_some() {
                "feasible"
            } else {
                "infeasible-up-to-cap"
            };
            w.write_record([
                scenario.to_string(),
                res.system.to_string(),
                fmt_float(p.demand),
                status.to_string(),
                opt(p.grid.map(|g| g.0)),
                opt(p.grid.map(|g| g.1)),
                opt(p.ap_count),
                opt(p.ap_density.map(fmt_float)),
                res.ladder_cap.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub systems: Vec<String>,
    pub seed: u64,
    pub n_snapshots: usize,
    pub threads: usize,
    pub wall_clock_s: f64,
    pub started_unix_s: u64,
    pub scenario: &'a Scenario,
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_manifest(out: &Path, manifest: &Manifest<'_>) -> Result<PathBuf> {
    let path = manifest_path(out);
    let mut f = std::fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    f.write_all(b"\n")?;
    Ok(path)
}
