//! Result persistence: CSV tables and the machine-readable run manifest.
//!
//! CSV bytes are a replay contract: all floats are written with 17
//! significant digits and no timing information, so rerunning the manifest's
//! configuration reproduces the files exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::ContourParams;
use crate::Real;

use super::{PointResult, SweepAnalysis, SweepConfig, SweepResult};

/// 17 significant digits: enough to round-trip every f64 bit pattern.
pub fn fmt_float(x: Real) -> String {
    format!("{x:.16e}")
}

fn fit_kind_label(point: &PointResult) -> &'static str {
    match &point.fit {
        None => "none",
        Some(fit) => fit.params.kind().label(),
    }
}

fn fit_params_field(point: &PointResult) -> String {
    match &point.fit {
        None => String::new(),
        Some(fit) => {
            let shape = match fit.params {
                ContourParams::Lorentzian { gamma0 } => format!("gamma0={}", fmt_float(gamma0)),
                ContourParams::WeakField { a1, a2 } => {
                    format!("a1={};a2={}", fmt_float(a1), fmt_float(a2))
                }
                ContourParams::StrongField { d1, d2 } => {
                    format!("d1={};d2={}", fmt_float(d1), fmt_float(d2))
                }
            };
            format!("{shape};amplitude={}", fmt_float(fit.amplitude))
        }
    }
}

/// One row per point: parameters, reference quantities, width, IPR, fit.
pub fn results_csv(points: &[PointResult]) -> String {
    let mut out = String::from(
        "n_states,delta,v_rms,band,rabi,pieces,seed,gamma0,xi0,delta_omega,\
         gamma,xi,loc_length,fit_kind,fit_params,residual,overflow\n",
    );
    for p in points {
        let residual = match &p.fit {
            Some(fit) => fmt_float(fit.residual),
            None => "nan".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.params.n_states,
            fmt_float(p.params.delta),
            fmt_float(p.params.v_rms),
            p.params.band,
            fmt_float(p.params.rabi),
            p.params.pieces,
            p.params.seed,
            fmt_float(p.gamma0),
            fmt_float(p.xi0),
            fmt_float(p.delta_omega),
            fmt_float(p.gamma),
            fmt_float(p.xi),
            fmt_float(p.loc_length),
            fit_kind_label(p),
            fit_params_field(p),
            residual,
            fmt_float(p.overflow_fraction),
        ));
    }
    out
}

/// Per-point LSD histogram with the fitted curve on the same grid.
pub fn lsd_csv(point: &PointResult) -> String {
    let mut out = String::from("omega,rho_data,rho_fit,count\n");
    for s in &point.samples {
        let fit = match &point.fit {
            Some(f) => fmt_float(f.density(s.omega)),
            None => "nan".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(s.omega),
            fmt_float(s.rho),
            fit,
            fmt_float(s.count),
        ));
    }
    out
}

/// Machine-readable record of one run; replaying `config` reproduces every
/// CSV byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: SweepConfig,
    pub threads: usize,
    pub wall_seconds: Real,
    pub analysis: SweepAnalysis,
}

/// Write the results table, per-point LSD files, and the manifest into
/// `dir`. Returns the paths written.
pub fn write_outputs(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.points.is_empty() {
        return Err(Error::InvalidParameter(
            "refusing to write outputs for an empty sweep".into(),
        ));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let results_path = dir.join("results.csv");
    write_file(&results_path, results_csv(&result.points).as_bytes())?;
    written.push(results_path);

    for (i, point) in result.points.iter().enumerate() {
        let path = dir.join(format!("lsd_{i:03}.csv"));
        write_file(&path, lsd_csv(point).as_bytes())?;
        written.push(path);
    }

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: result.config.clone(),
        threads: rayon::current_num_threads(),
        wall_seconds: result.points.iter().map(|p| p.wall_seconds).sum(),
        analysis: result.analysis.clone(),
    };
    let manifest_path = dir.join("manifest.json");
    write_file(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    written.push(manifest_path);

    Ok(written)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(bytes)?;
    Ok(())
}

/// Load a manifest written by [`write_outputs`].
pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
