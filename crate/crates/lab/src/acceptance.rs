//! Acceptance suite: ten criteria with fixed tolerances and runtime
//! budgets. Used by `jmgt-lab selftest` and the `acceptance` test target.

use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use jmgt_core::diagnostics::energy_identity_residual;
use jmgt_core::experiments::{
    initial_state, run_decay_sweep, run_mms_order, run_picard_vs_etd, run_tau_sweep, run_westervelt_decay,
    ExperimentConfig, RecordFlag, TauSweep,
};
use jmgt_core::model::weighted_norm_sq;
use jmgt_core::propagator::{simulate, SimulationConfig, Solver};
use jmgt_core::{JmgtState, ModelParams, NormLevel, OperatorPower, SpectralBasis, SpectralField, Transform};

use crate::commands::cmd_sweep_tau;
use crate::output::OutDir;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.2} s of {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64()
        )
    }
}

type Check = Result<(bool, String), String>;

fn timed(id: u32, name: &'static str, budget_s: u64, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    let (ok, mut detail) = match res {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if elapsed > budget {
        detail.push_str("; over the runtime budget");
    }
    Outcome { id, name, passed: ok && elapsed <= budget, detail, elapsed, budget }
}

/// Runs every criterion. `work` receives the determinism-check outputs.
pub fn run_all(work: &Path) -> Vec<Outcome> {
    let mut out = vec![
        timed(1, "spectral correctness", 1, spectral_correctness),
        timed(2, "linear exactness", 1, linear_exactness),
        timed(3, "energy identity second order", 5, energy_identity_order),
        timed(4, "uniform decay", 120, uniform_decay),
    ];
    // criteria 5 and 6 share one sweep and its runtime
    let start = Instant::now();
    let sweep = run_tau_sweep(&ExperimentConfig { t_end: 5.0, ..Default::default() });
    let shared = start.elapsed();
    out.push(timed(5, "vanishing-relaxation rate", 120, || limit_rate(&sweep)));
    out.push(timed(6, "u_ttt scaling", 120, || uttt_scaling(&sweep)));
    for o in out.iter_mut().filter(|o| o.id == 5 || o.id == 6) {
        o.elapsed += shared;
        if o.elapsed > o.budget {
            o.passed = false;
        }
    }
    out.push(timed(7, "Picard/ETD cross-validation", 30, picard_cross_check));
    out.push(timed(8, "manufactured-solution order", 30, mms_order));
    out.push(timed(9, "Westervelt decay", 30, westervelt_decay));
    out.push(timed(10, "determinism", 240, || determinism(work)));
    out
}

fn e(err: impl fmt::Display) -> String {
    err.to_string()
}

fn test_coefficients(n: usize) -> Vec<f64> {
    (0..n).map(|m| (1.7 * m as f64 + 0.3).sin() / (1.0 + m as f64).sqrt()).collect()
}

fn spectral_correctness() -> Check {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let bases = [
        SpectralBasis::new(1, 64, &[std::f64::consts::PI]).map_err(e)?,
        SpectralBasis::new(2, 16, &[1.0, 2.5]).map_err(e)?,
    ];
    for basis in &bases {
        let f = SpectralField::from_coeffs(basis, test_coefficients(basis.len())).map_err(e)?;
        let tr = Transform::new(basis, 1.5).map_err(e)?;
        let phys = tr.to_physical(&f);
        let back = tr.to_spectral(&phys).map_err(e)?;
        let round_trip = f.coeffs().iter().zip(back.coeffs()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let mut sq = phys.clone();
        for x in sq.samples_mut() {
            *x *= *x;
        }
        let parseval = (sq.integrate() - f.norm_sq()).abs() / f.norm_sq();
        let a = f.apply_power(OperatorPower::One);
        let hh = f.apply_power(OperatorPower::Half).apply_power(OperatorPower::Half);
        let powers = (&hh - &a).norm() / a.norm();
        worst = (worst.0.max(round_trip), worst.1.max(parseval), worst.2.max(powers));
    }
    let ok = worst.0 <= 1e-12 && worst.1 <= 1e-10 && worst.2 <= 1e-15;
    Ok((ok, format!("round-trip {:.1e} (≤ 1e-12), Parseval {:.1e} (≤ 1e-10), A^1/2 A^1/2 vs A {:.1e} (≤ 1e-15)", worst.0, worst.1, worst.2)))
}

/// Roots of `a s³ + b s² + c s + d` with one real root found by bisection
/// (the cubic is monotone enough near it for the bracket below) and the
/// remaining pair from the deflated quadratic.
fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 3] {
    let f = |s: f64| ((a * s + b) * s + c) * s + d;
    let bound = 1.0 + [b, c, d].iter().fold(0.0f64, |m, x| m.max((x / a).abs()));
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f(hi) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let q1 = b + a * r;
    let q0 = c + q1 * r;
    let [s1, s2] = quadratic_roots(a, q1, q0);
    [Complex64::new(r, 0.0), s1, s2]
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
}

/// Derivatives `0..n` at `t` of the solution `Σ cᵢ e^{sᵢ t}` with the given
/// initial derivatives.
fn exponential_solution(roots: &[Complex64], init: &[f64], t: f64) -> Vec<f64> {
    let n = roots.len();
    let mut m: Vec<Vec<Complex64>> = (0..n).map(|r| roots.iter().map(|s| s.powu(r as u32)).collect()).collect();
    let mut rhs: Vec<Complex64> = init.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap_or(col);
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let k = m[r][col] / m[col][col];
            for cc in col..n {
                let v = m[col][cc];
                m[r][cc] -= k * v;
            }
            let v = rhs[col];
            rhs[r] -= k * v;
        }
    }
    let mut coef = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let acc: Complex64 = (r + 1..n).map(|cc| m[r][cc] * coef[cc]).sum();
        coef[r] = (rhs[r] - acc) / m[r][r];
    }
    (0..n).map(|d| (0..n).map(|i| coef[i] * roots[i].powu(d as u32) * (roots[i] * t).exp()).sum::<Complex64>().re).collect()
}

fn linear_exactness() -> Check {
    let basis = SpectralBasis::new(1, 1, &[std::f64::consts::PI]).map_err(e)?;
    let lambda = basis.eigenvalues()[0];
    let params = ModelParams::new(0.1, 1.0, 1.0, 0.0).map_err(e)?;
    let x0 = [1.0, -0.5, 0.25];
    let init = JmgtState::new(
        0.0,
        SpectralField::unit(&basis, 0).scaled(x0[0]),
        SpectralField::unit(&basis, 0).scaled(x0[1]),
        SpectralField::unit(&basis, 0).scaled(x0[2]),
    )
    .map_err(e)?;
    let cfg = SimulationConfig { t_end: 10.0, dt: 0.01, stride: 1, padding: 1.5, blowup_ceiling: 1e6 };
    let mut errs = [0.0f64; 2];
    for (slot, solver) in [Solver::Jmgt, Solver::Westervelt].into_iter().enumerate() {
        let (p, roots): (ModelParams, Vec<Complex64>) = match solver {
            Solver::Jmgt => (params, cubic_roots(params.tau, 1.0, params.b_tau() * lambda, params.c2() * lambda).to_vec()),
            Solver::Westervelt => {
                let p = params.with_tau(0.0).map_err(e)?;
                (p, quadratic_roots(1.0, p.delta * lambda, p.c2() * lambda).to_vec())
            }
        };
        let traj = simulate(&init, &p, &cfg, solver, None).map_err(e)?;
        if !traj.termination.is_completed() {
            return Err(format!("{} run ended early", solver.name()));
        }
        for s in &traj.states {
            let want = exponential_solution(&roots, &x0[..roots.len()], s.t);
            let got = [s.u.coeffs()[0], s.v.coeffs()[0], s.w.coeffs()[0]];
            for (g, w) in got.iter().zip(&want) {
                errs[slot] = errs[slot].max((g - w).abs());
            }
        }
    }
    Ok((
        errs[0] <= 1e-8 && errs[1] <= 1e-8,
        format!("sup error on [0,10]: JMGT {:.1e}, Westervelt {:.1e} (≤ 1e-8)", errs[0], errs[1]),
    ))
}

fn energy_identity_order() -> Check {
    let basis = SpectralBasis::new(1, 16, &[std::f64::consts::PI]).map_err(e)?;
    let tr = Transform::new(&basis, 1.5).map_err(e)?;
    let params = ModelParams::new(0.1, 1.0, 1.0, 0.0).map_err(e)?;
    let u = SpectralField::from_coeffs(&basis, (0..16).map(|m| 1.0 / ((m + 1) as f64).powi(3)).collect()).map_err(e)?;
    let init = JmgtState::new(0.0, u.clone(), u.scaled(-0.5), SpectralField::zeros(&basis)).map_err(e)?;
    let mut res = Vec::new();
    for dt in [0.01, 0.005] {
        let cfg = SimulationConfig { t_end: 2.0, dt, stride: 1, padding: 1.5, blowup_ceiling: 1e6 };
        let traj = simulate(&init, &params, &cfg, Solver::Jmgt, None).map_err(e)?;
        res.push(energy_identity_residual(&traj, &tr).max_abs);
    }
    let ratio = res[0] / res[1];
    Ok((
        (3.5..=4.5).contains(&ratio),
        format!("residual {:.3e} -> {:.3e}, ratio {ratio:.3} (in [3.5, 4.5])", res[0], res[1]),
    ))
}

fn uniform_decay() -> Check {
    let cfg = ExperimentConfig { decay_min_r_squared: 0.95, ..Default::default() };
    let init = initial_state(&cfg).map_err(e)?;
    let mut h0_max = 0.0f64;
    for tau in cfg.tau_grid.values() {
        h0_max = h0_max.max(weighted_norm_sq(&init, NormLevel::H0, &cfg.params(tau).map_err(e)?).sqrt());
    }
    let sweep = run_decay_sweep(&cfg).map_err(e)?;
    let mut worst_r2 = 1.0f64;
    let mut all_ok = true;
    for entry in &sweep.entries {
        match &entry.fit {
            Ok(f) if entry.flag == RecordFlag::Ok => {
                worst_r2 = worst_r2.min(f.r_squared);
                all_ok &= f.omega > 0.0 && f.r_squared >= 0.95;
            }
            _ => all_ok = false,
        }
    }
    let (lo, top) = (sweep.omega_min.unwrap_or(f64::NAN), sweep.omega_at_tau_max.unwrap_or(f64::NAN));
    let ok = all_ok && h0_max <= 1e-2 && lo >= 0.5 * top && sweep.entries.len() == 8;
    Ok((
        ok,
        format!(
            "{} taus down to {:.1e}, |U0|_H0 ≤ {h0_max:.2e}, min omega {lo:.4} vs omega(tau_max) {top:.4}, min R² {worst_r2:.4}",
            sweep.entries.len(),
            cfg.tau_grid.values().last().copied().unwrap_or(f64::NAN)
        ),
    ))
}

fn limit_rate(sweep: &Result<TauSweep, jmgt_core::Error>) -> Check {
    let sweep = sweep.as_ref().map_err(e)?;
    let fit = sweep.error_fit.as_ref().map_err(e)?;
    let all = sweep.records.iter().all(|r| r.flag == RecordFlag::Ok);
    Ok((
        all && fit.slope >= 0.9 && fit.r_squared >= 0.98,
        format!("slope {:.4} (≥ 0.9), R² {:.6} (≥ 0.98) over {} taus", fit.slope, fit.r_squared, sweep.records.len()),
    ))
}

fn uttt_scaling(sweep: &Result<TauSweep, jmgt_core::Error>) -> Check {
    let sweep = sweep.as_ref().map_err(e)?;
    let fit = sweep.uttt_fit.as_ref().map_err(e)?;
    Ok((fit.slope >= -1.1, format!("slope {:.4} (≥ -1.1)", fit.slope)))
}

fn picard_cross_check() -> Check {
    let r = run_picard_vs_etd(&ExperimentConfig::default()).map_err(e)?;
    Ok((
        r.converged && r.discrepancy <= r.tolerance && r.linear_discrepancy <= 1e-10,
        format!(
            "discrepancy {:.2e} (≤ {:.1e}), k=0 discrepancy {:.1e} (≤ 1e-10), {} sweeps",
            r.discrepancy,
            r.tolerance,
            r.linear_discrepancy,
            r.increments.len()
        ),
    ))
}

fn mms_order() -> Check {
    let r = run_mms_order(&ExperimentConfig::default()).map_err(e)?;
    let good = |s: &jmgt_core::experiments::OrderStudy| !s.floor_limited && (1.9..=2.3).contains(&s.slope);
    Ok((
        good(&r.jmgt) && good(&r.westervelt),
        format!("slopes JMGT {:.3}, Westervelt {:.3} (in [1.9, 2.3])", r.jmgt.slope, r.westervelt.slope),
    ))
}

fn westervelt_decay() -> Check {
    let w = run_westervelt_decay(&ExperimentConfig::default()).map_err(e)?;
    let fit = w.fit.as_ref().map_err(e)?;
    let change = w.relative_change();
    Ok((
        w.flag == RecordFlag::Ok && fit.omega > 0.0 && fit.r_squared >= 0.95 && change <= 0.1,
        format!("omega {:.4}, R² {:.4}, dissipation integral change T→2T {:.1e} (≤ 0.1)", fit.omega, fit.r_squared, change),
    ))
}

fn determinism(work: &Path) -> Check {
    let cfg = ExperimentConfig::default();
    let mut bytes = Vec::new();
    for run in ["run_a", "run_b"] {
        let dir = work.join(run);
        let mut out = OutDir::create(&dir).map_err(e)?;
        cmd_sweep_tau(&cfg, &mut out).map_err(e)?;
        let mut files = Vec::new();
        for name in out.written().iter().filter(|n| n.ends_with(".csv")) {
            files.push((name.clone(), std::fs::read(dir.join(name)).map_err(e)?));
        }
        bytes.push(files);
    }
    let same = !bytes[0].is_empty() && bytes[0] == bytes[1];
    Ok((same, format!("{} CSV file(s) compared byte for byte", bytes[0].len())))
}
