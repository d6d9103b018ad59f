//! Flat `key = value` configuration.
//!
//! One key per line, `#` starts a comment line, blank lines are ignored.
//! Every key maps to one field of [`ExperimentConfig`]; unknown or repeated
//! keys are rejected. Command-line overrides are applied on top of the
//! file, and [`render`] writes a fully resolved file that parses back to the
//! same configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use jmgt_core::diagnostics::EnergyField;
use jmgt_core::experiments::{ExperimentConfig, Profile};
use jmgt_core::propagator::Solver;

use crate::{LabError, LabResult};

/// All keys in canonical order (also the order of [`render`]).
pub const KEYS: &[&str] = &[
    "dim",
    "modes",
    "lengths",
    "c",
    "delta",
    "k",
    "tau",
    "solver",
    "tau_grid.max",
    "tau_grid.factor",
    "tau_grid.count",
    "init.profile",
    "init.modes",
    "init.amplitude",
    "init.velocity",
    "t_end",
    "dt",
    "stride",
    "padding",
    "blowup_ceiling",
    "fit.field",
    "fit.floor",
    "fit.floor_rel",
    "fit.trim_fraction",
    "fit.min_samples",
    "decay.t_end",
    "decay.min_r_squared",
    "decay.uniformity_fraction",
    "threshold.rel_tol",
    "threshold.max_amplitude",
    "threshold.max_iter",
    "picard.max_iter",
    "picard.tol",
    "picard.ramp",
    "mms.amplitude",
    "mms.t_end",
    "mms.dt",
    "stabilizability.c1",
];

/// Command-line overrides, applied after the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dt: Option<String>,
    pub t_end: Option<String>,
    pub tau: Option<String>,
    pub stride: Option<String>,
    /// Generic `key=value` pairs.
    pub set: Vec<String>,
}

impl Overrides {
    fn pairs(&self) -> LabResult<Vec<(String, String)>> {
        // `--set` first so the dedicated flags win
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| LabError::ConfigKey {
                key: s.clone(),
                line: None,
                msg: "expected key=value".into(),
            })?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        for (key, v) in [("dt", &self.dt), ("t_end", &self.t_end), ("tau", &self.tau), ("stride", &self.stride)] {
            if let Some(v) = v {
                out.push((key.to_string(), v.clone()));
            }
        }
        Ok(out)
    }
}

type Entries = BTreeMap<String, (String, Option<usize>)>;

fn read_entries(text: &str) -> LabResult<Entries> {
    let mut entries = Entries::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return Err(LabError::ConfigKey { key: s.to_string(), line: Some(line), msg: "expected key = value".into() });
        };
        let key = k.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(LabError::ConfigKey { key, line: Some(line), msg: "unknown key".into() });
        }
        if let Some((_, Some(first))) = entries.get(&key) {
            return Err(LabError::ConfigKey { key, line: Some(line), msg: format!("repeated (first set on line {first})") });
        }
        entries.insert(key, (v.trim().to_string(), Some(line)));
    }
    Ok(entries)
}

/// Parses configuration text without overrides or cross-field validation.
pub fn parse_str(text: &str) -> LabResult<ExperimentConfig> {
    build(read_entries(text)?)
}

/// Reads `path` (or starts from defaults), applies `overrides` and validates.
/// Returns the configuration and any non-fatal warnings.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> LabResult<(ExperimentConfig, Vec<String>)> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| LabError::io(p, e))?,
        None => String::new(),
    };
    let mut entries = read_entries(&text)?;
    for (key, value) in overrides.pairs()? {
        if !KEYS.contains(&key.as_str()) {
            return Err(LabError::ConfigKey { key, line: None, msg: "unknown key".into() });
        }
        entries.insert(key, (value, None));
    }
    let cfg = build(entries)?;
    let warnings = cfg.validate()?;
    Ok((cfg, warnings))
}

fn build(entries: Entries) -> LabResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for key in KEYS {
        if let Some((value, line)) = entries.get(*key) {
            apply_key(&mut cfg, key, value)
                .map_err(|msg| LabError::ConfigKey { key: key.to_string(), line: *line, msg })?;
        }
    }
    Ok(cfg)
}

fn float(v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, got '{v}'"))
}

fn count(v: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("expected a non-negative integer, got '{v}'"))
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|x| float(x.trim())).collect()
}

fn check(ok: bool, what: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(format!("must be {what}"))
    }
}

fn positive(v: &str) -> Result<f64, String> {
    let x = float(v)?;
    check(x > 0.0 && x.is_finite(), "positive and finite")?;
    Ok(x)
}

fn non_negative(v: &str) -> Result<f64, String> {
    let x = float(v)?;
    check(x >= 0.0 && x.is_finite(), "non-negative and finite")?;
    Ok(x)
}

fn at_least_one(v: &str) -> Result<usize, String> {
    let n = count(v)?;
    check(n >= 1, "at least 1")?;
    Ok(n)
}

/// Sets one field from its textual value.
pub fn apply_key(cfg: &mut ExperimentConfig, key: &str, v: &str) -> Result<(), String> {
    match key {
        "dim" => {
            cfg.dim = count(v)?;
            check(cfg.dim == 1 || cfg.dim == 2, "1 or 2")?;
        }
        "modes" => cfg.modes = at_least_one(v)?,
        "lengths" => {
            cfg.lengths = list(v)?;
            check(cfg.lengths.iter().all(|&l| l > 0.0 && l.is_finite()), "positive side lengths")?;
        }
        "c" => cfg.c = positive(v)?,
        "delta" => cfg.delta = positive(v)?,
        "k" => {
            cfg.k = float(v)?;
            check(cfg.k.is_finite(), "finite")?;
        }
        "tau" => cfg.tau = non_negative(v)?,
        "solver" => {
            cfg.solver = match v {
                "jmgt" => Solver::Jmgt,
                "westervelt" => Solver::Westervelt,
                _ => return Err(format!("expected jmgt or westervelt, got '{v}'")),
            }
        }
        "tau_grid.max" => cfg.tau_grid.max = positive(v)?,
        "tau_grid.factor" => {
            cfg.tau_grid.factor = float(v)?;
            check(cfg.tau_grid.factor > 0.0 && cfg.tau_grid.factor < 1.0, "in (0, 1)")?;
        }
        "tau_grid.count" => cfg.tau_grid.count = at_least_one(v)?,
        "init.profile" => {
            cfg.init.profile = match v {
                "mode1" => Profile::Mode1,
                "bump" => Profile::Bump,
                "modes" => Profile::Modes(Vec::new()),
                _ => return Err(format!("expected mode1, bump or modes, got '{v}'")),
            }
        }
        "init.modes" => match &mut cfg.init.profile {
            Profile::Modes(m) => *m = list(v)?,
            _ => return Err("only allowed with init.profile = modes".into()),
        },
        "init.amplitude" => cfg.init.amplitude = non_negative(v)?,
        "init.velocity" => {
            cfg.init.velocity = float(v)?;
            check(cfg.init.velocity.is_finite(), "finite")?;
        }
        "t_end" => cfg.t_end = non_negative(v)?,
        "dt" => cfg.dt = positive(v)?,
        "stride" => cfg.stride = at_least_one(v)?,
        "padding" => {
            cfg.padding = float(v)?;
            check(cfg.padding >= 1.0 && cfg.padding.is_finite(), "at least 1")?;
        }
        "blowup_ceiling" => {
            cfg.blowup_ceiling = float(v)?;
            check(cfg.blowup_ceiling > 0.0, "positive")?;
        }
        "fit.field" => {
            cfg.fit_field = match v {
                "E" => EnergyField::E,
                "calE" => EnergyField::CalE,
                "frakE" => EnergyField::FrakE,
                _ => return Err(format!("expected E, calE or frakE, got '{v}'")),
            }
        }
        "fit.floor" => cfg.fit.floor = if v == "auto" { None } else { Some(non_negative(v)?) },
        "fit.floor_rel" => cfg.fit.floor_rel = non_negative(v)?,
        "fit.trim_fraction" => {
            cfg.fit.trim_fraction = float(v)?;
            check((0.0..1.0).contains(&cfg.fit.trim_fraction), "in [0, 1)")?;
        }
        "fit.min_samples" => {
            cfg.fit.min_samples = count(v)?;
            check(cfg.fit.min_samples >= 2, "at least 2")?;
        }
        "decay.t_end" => cfg.decay_t_end = positive(v)?,
        "decay.min_r_squared" => {
            cfg.decay_min_r_squared = float(v)?;
            check((0.0..=1.0).contains(&cfg.decay_min_r_squared), "in [0, 1]")?;
        }
        "decay.uniformity_fraction" => {
            cfg.uniformity_fraction = float(v)?;
            check(cfg.uniformity_fraction > 0.0 && cfg.uniformity_fraction <= 1.0, "in (0, 1]")?;
        }
        "threshold.rel_tol" => cfg.threshold_rel_tol = positive(v)?,
        "threshold.max_amplitude" => cfg.threshold_max_amplitude = positive(v)?,
        "threshold.max_iter" => cfg.threshold_max_iter = at_least_one(v)?,
        "picard.max_iter" => cfg.picard_max_iter = at_least_one(v)?,
        "picard.tol" => cfg.picard_tol = non_negative(v)?,
        "picard.ramp" => {
            cfg.picard_ramp = list(v)?;
            check(cfg.picard_ramp.iter().all(|&m| m > 0.0), "positive multipliers")?;
        }
        "mms.amplitude" => cfg.mms_amplitude = non_negative(v)?,
        "mms.t_end" => cfg.mms_t_end = positive(v)?,
        "mms.dt" => cfg.mms_dt = positive(v)?,
        "stabilizability.c1" => {
            cfg.c1_grid = list(v)?;
            check(cfg.c1_grid.iter().all(|&c| c >= 0.0), "non-negative")?;
        }
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

/// Fully resolved configuration text; parses back to `cfg`.
pub fn render(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    for key in KEYS {
        let value = match *key {
            "dim" => cfg.dim.to_string(),
            "modes" => cfg.modes.to_string(),
            "lengths" => join(&cfg.lengths),
            "c" => format!("{:?}", cfg.c),
            "delta" => format!("{:?}", cfg.delta),
            "k" => format!("{:?}", cfg.k),
            "tau" => format!("{:?}", cfg.tau),
            "solver" => cfg.solver.name().to_string(),
            "tau_grid.max" => format!("{:?}", cfg.tau_grid.max),
            "tau_grid.factor" => format!("{:?}", cfg.tau_grid.factor),
            "tau_grid.count" => cfg.tau_grid.count.to_string(),
            "init.profile" => match cfg.init.profile {
                Profile::Mode1 => "mode1".into(),
                Profile::Bump => "bump".into(),
                Profile::Modes(_) => "modes".into(),
            },
            "init.modes" => match &cfg.init.profile {
                Profile::Modes(m) => join(m),
                _ => continue,
            },
            "init.amplitude" => format!("{:?}", cfg.init.amplitude),
            "init.velocity" => format!("{:?}", cfg.init.velocity),
            "t_end" => format!("{:?}", cfg.t_end),
            "dt" => format!("{:?}", cfg.dt),
            "stride" => cfg.stride.to_string(),
            "padding" => format!("{:?}", cfg.padding),
            "blowup_ceiling" => format!("{:?}", cfg.blowup_ceiling),
            "fit.field" => cfg.fit_field.name().to_string(),
            "fit.floor" => cfg.fit.floor.map_or("auto".into(), |f| format!("{f:?}")),
            "fit.floor_rel" => format!("{:?}", cfg.fit.floor_rel),
            "fit.trim_fraction" => format!("{:?}", cfg.fit.trim_fraction),
            "fit.min_samples" => cfg.fit.min_samples.to_string(),
            "decay.t_end" => format!("{:?}", cfg.decay_t_end),
            "decay.min_r_squared" => format!("{:?}", cfg.decay_min_r_squared),
            "decay.uniformity_fraction" => format!("{:?}", cfg.uniformity_fraction),
            "threshold.rel_tol" => format!("{:?}", cfg.threshold_rel_tol),
            "threshold.max_amplitude" => format!("{:?}", cfg.threshold_max_amplitude),
            "threshold.max_iter" => cfg.threshold_max_iter.to_string(),
            "picard.max_iter" => cfg.picard_max_iter.to_string(),
            "picard.tol" => format!("{:?}", cfg.picard_tol),
            "picard.ramp" => join(&cfg.picard_ramp),
            "mms.amplitude" => format!("{:?}", cfg.mms_amplitude),
            "mms.t_end" => format!("{:?}", cfg.mms_t_end),
            "mms.dt" => format!("{:?}", cfg.mms_dt),
            "stabilizability.c1" => join(&cfg.c1_grid),
            _ => unreachable!("every key is rendered"),
        };
        let _ = writeln!(out, "{key} = {value}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_str("").unwrap(), ExperimentConfig::default());
        assert_eq!(parse_str("# nothing here\n\n   \n").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn negative_count_names_key_and_line() {
        let err = parse_str("dt = 0.01\ntau_grid.count = -1\n").unwrap_err();
        match &err {
            LabError::ConfigKey { key, line, .. } => {
                assert_eq!(key, "tau_grid.count");
                assert_eq!(*line, Some(2));
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("tau_grid.count"));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_and_repeated_keys_are_rejected() {
        let e = parse_str("dtt = 1\n").unwrap_err();
        assert!(matches!(e, LabError::ConfigKey { ref key, line: Some(1), .. } if key == "dtt"));
        let e = parse_str("dt = 0.1\ndt = 0.2\n").unwrap_err();
        assert!(matches!(e, LabError::ConfigKey { line: Some(2), .. }));
        assert!(parse_str("just words\n").is_err());
    }

    #[test]
    fn type_mismatch_is_reported() {
        let e = parse_str("c = fast\n").unwrap_err();
        assert!(e.to_string().contains("c: expected a number"));
        assert!(parse_str("solver = euler\n").is_err());
        assert!(parse_str("init.modes = 1, 2\n").is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "dt = 1e-2\nt_end = 2\n").unwrap();
        let ov = Overrides { dt: Some("1e-3".into()), set: vec!["k = 0.5".into()], ..Default::default() };
        let (cfg, _) = parse_config(Some(&path), &ov).unwrap();
        assert_eq!(cfg.dt, 1e-3);
        assert_eq!(cfg.t_end, 2.0);
        assert_eq!(cfg.k, 0.5);
        let both = Overrides { dt: Some("1e-3".into()), set: vec!["dt=5e-3".into()], ..Default::default() };
        assert_eq!(parse_config(Some(&path), &both).unwrap().0.dt, 1e-3);
        let bad = Overrides { set: vec!["nope=1".into()], ..Default::default() };
        assert!(matches!(parse_config(Some(&path), &bad), Err(LabError::ConfigKey { line: None, .. })));
    }

    #[test]
    fn cross_field_violations_are_config_errors() {
        let ov = Overrides { set: vec!["t_end = 1.005".into()], ..Default::default() };
        let e = parse_config(None, &ov).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn render_round_trips() {
        let mut cfg = parse_str(
            "dim = 2\nlengths = 1, 2.5\nmodes = 6\ninit.profile = modes\ninit.modes = 1, 0, 0.3\n\
             fit.floor = 1e-20\ntau = 0.0123456789012345\npicard.ramp = 1, 3\nsolver = westervelt\n",
        )
        .unwrap();
        cfg.c = 0.1 + 0.2;
        let text = render(&cfg);
        assert_eq!(parse_str(&text).unwrap(), cfg);
        let d = ExperimentConfig::default();
        assert_eq!(parse_str(&render(&d)).unwrap(), d);
        assert_eq!(text.lines().count(), KEYS.len());
    }
}
