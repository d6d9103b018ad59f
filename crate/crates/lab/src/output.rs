//! CSV tables, gnuplot scripts and run manifests.
//!
//! Numbers are written with 17 significant digits so every double
//! round-trips. The manifest is itself a valid configuration file: the
//! run metadata sits in `#` comment lines above the resolved keys.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use jmgt_core::experiments::{ExperimentConfig, ThresholdResult};
use jmgt_core::EnergySample;

use crate::config::render;
use crate::{LabError, LabResult};

pub const ENERGY_HEADER: &[&str] = &["t", "E0", "E1", "E", "calE", "frakE", "h0tau", "h1tau", "h2tau"];
pub const SWEEP_HEADER: &[&str] = &["tau", "sup_err_sq", "uttt_integral", "omega", "r_squared", "flag"];
pub const THRESHOLD_HEADER: &[&str] = &["iter", "amplitude", "h0tau_norm", "decayed"];

/// `x` with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects the files a command writes below its output directory.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> LabResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> LabResult<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.root.join(name);
        let wrap = |source| LabError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(wrap)?;
        w.write_record(header).map_err(wrap)?;
        for row in rows {
            w.write_record(&row).map_err(wrap)?;
        }
        w.flush().map_err(|e| LabError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> LabResult<()> {
        let path = self.root.join(name);
        std::fs::write(&path, body).map_err(|e| LabError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

pub fn energy_rows(samples: &[EnergySample]) -> impl Iterator<Item = Vec<String>> + '_ {
    samples.iter().map(|s| {
        [s.t, s.e0, s.e1, s.e, s.cal_e, s.frak_e, s.h0tau, s.h1tau, s.h2tau].iter().map(|&x| num(x)).collect()
    })
}

pub fn threshold_rows(r: &ThresholdResult) -> impl Iterator<Item = Vec<String>> + '_ {
    r.history
        .iter()
        .map(|s| vec![s.iter.to_string(), num(s.amplitude), num(s.h0tau_norm), s.decayed.to_string()])
}

/// Gnuplot script rendering one or more CSV columns against the first one
/// into a PNG next to the data.
pub fn plot_script(title: &str, csv: &str, png: &str, columns: &[(usize, &str)], log_x: bool, log_y: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script; run: gnuplot {}", png.replace(".png", ".gp"));
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{png}'");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set key outside");
    if log_x {
        let _ = writeln!(s, "set logscale x");
    }
    if log_y {
        let _ = writeln!(s, "set logscale y");
    }
    let parts: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(i, (col, label))| {
            let file = if i == 0 { format!("'{csv}'") } else { "''".into() };
            format!("{file} using 1:{col} every ::1 with linespoints title '{label}'")
        })
        .collect();
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}

/// Record of one command invocation.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub duration: Duration,
    pub outputs: Vec<String>,
    pub exit_status: i32,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# jmgt-lab run manifest (re-run with --config on this file)");
        let _ = writeln!(s, "# version = {}", self.version);
        let _ = writeln!(s, "# command = {}", self.command);
        let _ = writeln!(s, "# duration_s = {:.3}", self.duration.as_secs_f64());
        let _ = writeln!(s, "# exit_status = {}", self.exit_status);
        for o in &self.outputs {
            let _ = writeln!(s, "# output = {o}");
        }
        s.push_str(&render(&self.config));
        s
    }

    pub fn write(&self, dir: &Path) -> LabResult<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        let path = dir.join("manifest.txt");
        std::fs::write(&path, self.render()).map_err(|e| LabError::io(&path, e))?;
        Ok(path)
    }
}
