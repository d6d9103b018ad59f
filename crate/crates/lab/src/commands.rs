//! Subcommand drivers. Each writes its CSV tables, a gnuplot script and a
//! `summary.txt` into the output directory; [`execute`] adds the manifest.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use jmgt_core::diagnostics::{energy_identity_residual, fit_decay_rate, stabilizability_report};
use jmgt_core::experiments::{
    assemble_decay_sweep, assemble_tau_sweep, decay_entry, initial_state, run_mms_order, run_picard_vs_etd,
    run_threshold_search, run_westervelt_decay, tau_sweep_record, ExperimentConfig, RLevel, ThresholdResult,
};
use jmgt_core::propagator::{simulate, Solver, Termination};
use jmgt_core::Transform;

use crate::output::{energy_rows, num, plot_script, threshold_rows, OutDir, RunManifest, ENERGY_HEADER, SWEEP_HEADER, THRESHOLD_HEADER};
use crate::parallel::par_map;
use crate::{acceptance, LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    SweepTau,
    SweepDecay,
    Threshold,
    Mms,
    Picard,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::SweepTau => "sweep-tau",
            Command::SweepDecay => "sweep-decay",
            Command::Threshold => "threshold",
            Command::Mms => "mms",
            Command::Picard => "picard",
            Command::Selftest => "selftest",
        }
    }
}

/// Runs `cmd` and writes `manifest.txt` whatever the outcome.
pub fn execute(cmd: Command, cfg: &ExperimentConfig, out_dir: &Path) -> LabResult<()> {
    let start = Instant::now();
    let mut out = OutDir::create(out_dir)?;
    let result = match cmd {
        Command::Simulate => cmd_simulate(cfg, &mut out),
        Command::SweepTau => cmd_sweep_tau(cfg, &mut out),
        Command::SweepDecay => cmd_sweep_decay(cfg, &mut out),
        Command::Threshold => cmd_threshold(cfg, &mut out),
        Command::Mms => cmd_mms(cfg, &mut out),
        Command::Picard => cmd_picard(cfg, &mut out),
        Command::Selftest => cmd_selftest(&mut out),
    };
    let manifest = RunManifest {
        command: cmd.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration: start.elapsed(),
        outputs: out.written().to_vec(),
        exit_status: result.as_ref().err().map_or(0, LabError::exit_code),
        config: cfg.clone(),
    };
    manifest.write(out.root())?;
    result
}

fn line(s: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(s, "{key} = {value}");
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &mut OutDir) -> LabResult<()> {
    let init = initial_state(cfg)?;
    let params = match cfg.solver {
        Solver::Jmgt => cfg.params(cfg.tau)?,
        Solver::Westervelt => cfg.params(0.0)?,
    };
    let traj = simulate(&init, &params, &cfg.sim(cfg.t_end), cfg.solver, None)?;
    out.csv("energy.csv", ENERGY_HEADER, energy_rows(&traj.samples))?;
    out.text(
        "energy.gp",
        &plot_script("energies", "energy.csv", "energy.png", &[(4, "E"), (5, "calE"), (6, "frakE")], false, true),
    )?;

    let mut s = String::new();
    line(&mut s, "solver", cfg.solver.name());
    line(&mut s, "tau", num(params.tau));
    line(&mut s, "termination", traj.termination.label());
    line(&mut s, "final_t", num(traj.final_state.t));
    line(&mut s, "snapshots", traj.states.len());
    if cfg.solver == Solver::Jmgt && traj.states.len() > 1 {
        let tr = Transform::new(init.basis(), cfg.padding)?;
        let r = energy_identity_residual(&traj, &tr);
        line(&mut s, "identity_residual_max_abs", num(r.max_abs));
        line(&mut s, "identity_residual_max_interval", num(r.max_interval));
    }
    match fit_decay_rate(&traj.samples, cfg.fit_field, &cfg.fit) {
        Ok(f) => {
            line(&mut s, "decay_field", cfg.fit_field.name());
            line(&mut s, "decay_omega", num(f.omega));
            line(&mut s, "decay_r_squared", num(f.r_squared));
            line(&mut s, "decay_window", format!("{} {}", num(f.window.0), num(f.window.1)));
        }
        Err(e) => line(&mut s, "decay_fit", format!("unavailable ({e})")),
    }
    if let Ok(rep) = stabilizability_report(&traj.samples, &cfg.c1_grid) {
        line(&mut s, "calE_integral", num(rep.integral));
        line(&mut s, "calE_growing", rep.growing);
        for (c1, c2) in &rep.rows {
            line(&mut s, "stabilizability_c1_c2", format!("{} {}", num(*c1), num(*c2)));
        }
    }
    out.text("summary.txt", &s)?;
    match traj.termination {
        Termination::Completed => Ok(()),
        Termination::NumericalFailure(e) | Termination::BlowUp(e) => Err(LabError::Numerical(e)),
    }
}

pub fn cmd_sweep_tau(cfg: &ExperimentConfig, out: &mut OutDir) -> LabResult<()> {
    let taus = cfg.tau_grid.values();
    let records = par_map(&taus, |&tau| tau_sweep_record(cfg, tau)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let sweep = assemble_tau_sweep(records);
    out.csv(
        "sweep_tau.csv",
        SWEEP_HEADER,
        sweep.records.iter().map(|r| {
            let (omega, r2) = r.decay_fit.map_or((f64::NAN, f64::NAN), |f| (f.omega, f.r_squared));
            vec![num(r.tau), num(r.sup_err_sq), num(r.uttt_integral), num(omega), num(r2), r.flag.label().to_string()]
        }),
    )?;
    out.text(
        "sweep_tau.gp",
        &plot_script(
            "distance to the limit and u_ttt integral",
            "sweep_tau.csv",
            "sweep_tau.png",
            &[(2, "sup_err_sq"), (3, "uttt_integral")],
            true,
            true,
        ),
    )?;
    let mut s = String::new();
    line(&mut s, "records", sweep.records.len());
    for (name, fit) in [("error", &sweep.error_fit), ("uttt", &sweep.uttt_fit)] {
        match fit {
            Ok(f) => {
                line(&mut s, &format!("{name}_slope"), num(f.slope));
                line(&mut s, &format!("{name}_r_squared"), num(f.r_squared));
            }
            Err(e) => line(&mut s, &format!("{name}_fit"), format!("rejected ({e})")),
        }
    }
    out.text("summary.txt", &s)
}

pub fn cmd_sweep_decay(cfg: &ExperimentConfig, out: &mut OutDir) -> LabResult<()> {
    let taus = cfg.tau_grid.values();
    let entries = par_map(&taus, |&tau| decay_entry(cfg, tau)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let sweep = assemble_decay_sweep(entries, cfg);
    let west = run_westervelt_decay(cfg)?;
    let fit_cols = |f: &Result<jmgt_core::diagnostics::DecayFit, jmgt_core::Error>| match f {
        Ok(f) => (num(f.omega), num(f.r_squared)),
        Err(_) => (num(f64::NAN), num(f64::NAN)),
    };
    out.csv(
        "sweep_decay.csv",
        &["tau", "omega", "r_squared", "frak_omega", "frak_r_squared", "flag"],
        sweep.entries.iter().map(|e| {
            let (w, r2) = fit_cols(&e.fit);
            let (fw, fr2) = fit_cols(&e.frak_fit);
            vec![num(e.tau), w, r2, fw, fr2, e.flag.label().to_string()]
        }),
    )?;
    out.text(
        "sweep_decay.gp",
        &plot_script("fitted decay rates", "sweep_decay.csv", "sweep_decay.png", &[(2, "omega"), (4, "frak_omega")], true, false),
    )?;
    let mut s = String::new();
    line(&mut s, "field", cfg.fit_field.name());
    line(&mut s, "uniform", sweep.uniform);
    line(&mut s, "uniformity_fraction", num(cfg.uniformity_fraction));
    line(&mut s, "omega_at_tau_max", sweep.omega_at_tau_max.map_or("none".into(), num));
    line(&mut s, "omega_min", sweep.omega_min.map_or("none".into(), num));
    for e in &sweep.entries {
        if let Err(err) = &e.fit {
            line(&mut s, "fit_failure", format!("tau={} {err}", num(e.tau)));
        }
    }
    let (w, r2) = fit_cols(&west.fit);
    line(&mut s, "westervelt_flag", west.flag.label());
    line(&mut s, "westervelt_omega", w);
    line(&mut s, "westervelt_r_squared", r2);
    line(&mut s, "westervelt_dissipation_T", num(west.dissipation_t));
    line(&mut s, "westervelt_dissipation_2T", num(west.dissipation_2t));
    line(&mut s, "westervelt_dissipation_rel_change", num(west.relative_change()));
    out.text("summary.txt", &s)
}

fn threshold_summary(s: &mut String, r: &ThresholdResult) {
    let level = r.r_level.name();
    match (r.bracket, r.amplitude_bracket) {
        (Some((lo, hi)), Some((alo, ahi))) => {
            line(s, &format!("{level}_rho_bracket"), format!("{} {}", num(lo), num(hi)));
            line(s, &format!("{level}_amplitude_bracket"), format!("{} {}", num(alo), num(ahi)));
        }
        _ => line(s, &format!("{level}_rho_bracket"), "open-ended (no failure up to the amplitude ceiling)"),
    }
    if let Some(rl) = r.r_at_lower {
        line(s, &format!("{level}_r_at_lower"), num(rl));
    }
}

pub fn cmd_threshold(cfg: &ExperimentConfig, out: &mut OutDir) -> LabResult<()> {
    let levels = [RLevel::H1, RLevel::H2];
    let results = par_map(&levels, |&l| run_threshold_search(cfg, l)).into_iter().collect::<Result<Vec<_>, _>>()?;
    // the decay predicate does not depend on the level, so both histories agree
    out.csv("threshold.csv", THRESHOLD_HEADER, threshold_rows(&results[0]))?;
    out.text(
        "threshold.gp",
        &plot_script("bisection history", "threshold.csv", "threshold.png", &[(2, "amplitude"), (3, "h0tau_norm")], false, true),
    )?;
    let mut s = String::new();
    line(&mut s, "tau", num(cfg.tau));
    for r in &results {
        threshold_summary(&mut s, r);
    }
    if let (Some(a), Some(b)) = (results[0].r_at_lower, results[1].r_at_lower) {
        line(&mut s, "r_monotone_H1_le_H2", a <= b);
    }
    out.text("summary.txt", &s)
}

pub fn cmd_mms(cfg: &ExperimentConfig, out: &mut OutDir) -> LabResult<()> {
    let rep = run_mms_order(cfg)?;
    let studies = [&rep.jmgt, &rep.westervelt];
    out.csv(
        "mms.csv",
        &["solver", "dt", "error"],
        studies.iter().flat_map(|st| {
            st.dts.iter().zip(&st.errors).map(|(dt, e)| vec![st.solver.name().to_string(), num(*dt), num(*e)])
        }),
    )?;
    out.text("mms.gp", &mms_plot())?;
    let mut s = String::new();
    for st in studies {
        let n = st.solver.name();
        line(&mut s, &format!("{n}_slope"), num(st.slope));
        line(&mut s, &format!("{n}_richardson"), num(st.richardson));
        line(&mut s, &format!("{n}_floor_limited"), st.floor_limited);
    }
    out.text("summary.txt", &s)
}

fn mms_plot() -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script; run: gnuplot mms.gp\n");
    s.push_str("set datafile separator ','\nset terminal pngcairo size 900,600\nset output 'mms.png'\n");
    s.push_str("set title 'temporal error vs dt'\nset logscale xy\nset key left\n");
    s.push_str("plot 'mms.csv' using (strcol(1) eq 'jmgt' ? $2 : 1/0):3 every ::1 with linespoints title 'jmgt', \\\n");
    s.push_str("     '' using (strcol(1) eq 'westervelt' ? $2 : 1/0):3 every ::1 with linespoints title 'westervelt'\n");
    s
}

pub fn cmd_picard(cfg: &ExperimentConfig, out: &mut OutDir) -> LabResult<()> {
    let rep = run_picard_vs_etd(cfg)?;
    out.csv(
        "picard.csv",
        &["iter", "increment", "ratio"],
        rep.increments.iter().enumerate().map(|(i, d)| {
            let ratio = if i == 0 { f64::NAN } else { rep.ratios[i - 1] };
            vec![i.to_string(), num(*d), num(ratio)]
        }),
    )?;
    out.csv(
        "picard_ramp.csv",
        &["amplitude", "h0tau_norm", "max_ratio", "converged"],
        rep.ramp.iter().map(|r| vec![num(r.amplitude), num(r.h0tau_norm), num(r.max_ratio()), r.converged.to_string()]),
    )?;
    out.text(
        "picard.gp",
        &plot_script("Picard increments", "picard.csv", "picard.png", &[(2, "increment")], false, true),
    )?;
    let mut s = String::new();
    line(&mut s, "discrepancy_sup_h2", num(rep.discrepancy));
    line(&mut s, "tolerance", num(rep.tolerance));
    line(&mut s, "linear_discrepancy_sup_h2", num(rep.linear_discrepancy));
    line(&mut s, "converged", rep.converged);
    line(&mut s, "iterations", rep.increments.len());
    line(&mut s, "first_noncontractive_amplitude", rep.first_noncontractive.map_or("none".into(), num));
    out.text("summary.txt", &s)
}

pub fn cmd_selftest(out: &mut OutDir) -> LabResult<()> {
    let work = out.root().join("selftest_work");
    let results = acceptance::run_all(&work);
    let mut s = String::new();
    for r in &results {
        println!("{r}");
        let _ = writeln!(s, "{r}");
    }
    out.text("selftest.txt", &s)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        Err(LabError::Acceptance { failed })
    } else {
        Ok(())
    }
}
