//! Quantities computed from finished trajectories: energy-identity
//! residuals, decay-rate fits, distance to the limit problem, `u_ttt`
//! integrals and log-log rate fits.
//!
//! All time integrals use the composite trapezoid rule on the snapshot grid.

use alloc::vec::Vec;

// unused once std is linked elsewhere (its inherent f64 methods take over)
#[allow(unused_imports)]
use num_traits::Float;

use crate::model::{compute_g, energy_e1, EnergySample, JmgtState};
use crate::propagator::{estimate_uttt, Trajectory};
use crate::spectral::{OperatorPower, Transform};
use crate::{Error, Result};

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    // shifting by the first point keeps a constant response exactly flat
    let (x0, y0) = (xs.first().copied().unwrap_or(0.0), ys.first().copied().unwrap_or(0.0));
    let mx = xs.iter().map(|x| x - x0).sum::<f64>() / n + x0;
    let my = ys.iter().map(|y| y - y0).sum::<f64>() / n + y0;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    // a perfectly flat response is explained perfectly
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    LineFit { slope, intercept, r_squared }
}

/// Composite trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(ts: &[f64], ys: &[f64]) -> f64 {
    ts.windows(2).zip(ys.windows(2)).map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])).sum()
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(ts.len());
    if !ts.is_empty() {
        out.push(0.0);
    }
    for (t, y) in ts.windows(2).zip(ys.windows(2)) {
        acc += 0.5 * (t[1] - t[0]) * (y[0] + y[1]);
        out.push(acc);
    }
    out
}

/// Discrete defect in `d/dt E₁ + γ‖u_tt‖² = (G, u_tt + (c²/b) u_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResidual {
    /// Defect over each snapshot interval.
    pub interval: Vec<f64>,
    /// Integrated defect from `t = 0` to each snapshot.
    pub cumulative: Vec<f64>,
    pub max_interval: f64,
    /// `max |cumulative|`, the headline number.
    pub max_abs: f64,
}

pub fn energy_identity_residual(traj: &Trajectory, tr: &Transform) -> IdentityResidual {
    let p = &traj.params;
    let r = p.c2() / p.b_tau();
    let ts: Vec<f64> = traj.times().collect();
    let e1: Vec<f64> = traj.states.iter().map(|s| energy_e1(s, p)).collect();
    let dissipation: Vec<f64> = traj.states.iter().map(|s| p.gamma_tau() * s.w.norm_sq()).collect();
    let work: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let g = compute_g(s, p, tr);
            let zt = s.w.add_scaled(r, &s.v);
            g.inner(&zt).expect("shared basis")
        })
        .collect();
    let mut interval = Vec::with_capacity(ts.len().saturating_sub(1));
    let mut cumulative = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for j in 0..ts.len().saturating_sub(1) {
        let h = ts[j + 1] - ts[j];
        let d = (e1[j + 1] - e1[j]) + 0.5 * h * (dissipation[j] + dissipation[j + 1])
            - 0.5 * h * (work[j] + work[j + 1]);
        interval.push(d);
        acc += d;
        cumulative.push(acc);
    }
    let max_interval = interval.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let max_abs = cumulative.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    IdentityResidual { interval, cumulative, max_interval, max_abs }
}

/// Which energy a decay fit reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyField {
    E,
    CalE,
    FrakE,
}

impl EnergyField {
    pub fn of(self, s: &EnergySample) -> f64 {
        match self {
            EnergyField::E => s.e,
            EnergyField::CalE => s.cal_e,
            EnergyField::FrakE => s.frak_e,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnergyField::E => "E",
            EnergyField::CalE => "calE",
            EnergyField::FrakE => "frakE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Absolute cutoff; `None` means `floor_rel` times the first sample.
    pub floor: Option<f64>,
    pub floor_rel: f64,
    /// Leading fraction of samples dropped as transient.
    pub trim_fraction: f64,
    pub min_samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { floor: None, floor_rel: 1e-12, trim_fraction: 0.1, min_samples: 5 }
    }
}

/// Fitted `energy(t) ≈ exp(log_amplitude − omega·t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub omega: f64,
    pub log_amplitude: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub floor_used: f64,
    pub samples_used: usize,
}

/// Log-linear least squares on the samples after the transient and before
/// the energy first drops to the floor.
pub fn fit_decay_rate(samples: &[EnergySample], field: EnergyField, opts: &FitOptions) -> Result<DecayFit> {
    let Some(first) = samples.first() else {
        return Err(Error::TooFewSamples { needed: opts.min_samples, found: 0 });
    };
    let floor = opts.floor.unwrap_or(opts.floor_rel * field.of(first));
    let skip = (opts.trim_fraction * samples.len() as f64).floor() as usize;
    let window: Vec<&EnergySample> = samples[skip.min(samples.len())..]
        .iter()
        .take_while(|s| {
            let v = field.of(s);
            v > floor && v.is_finite()
        })
        .collect();
    let needed = opts.min_samples.max(2);
    if window.len() < needed {
        return Err(Error::TooFewSamples { needed, found: window.len() });
    }
    let ts: Vec<f64> = window.iter().map(|s| s.t).collect();
    let ys: Vec<f64> = window.iter().map(|s| field.of(s).ln()).collect();
    let fit = fit_line(&ts, &ys);
    Ok(DecayFit {
        omega: -fit.slope + 0.0,
        log_amplitude: fit.intercept,
        r_squared: fit.r_squared,
        window: (ts[0], ts[ts.len() - 1]),
        floor_used: floor,
        samples_used: window.len(),
    })
}

/// `e(t) = ‖A(u^τ − u⁰)‖² + ‖A^{1/2}(u^τ_t − u⁰_t)‖²` per snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitError {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
}

pub fn limit_error_at(a: &JmgtState, b: &JmgtState) -> f64 {
    let du = &a.u - &b.u;
    let dv = &a.v - &b.v;
    du.power_norm_sq(OperatorPower::One) + dv.power_norm_sq(OperatorPower::Half)
}

pub fn error_vs_limit(jmgt: &Trajectory, west: &Trajectory) -> Result<LimitError> {
    if jmgt.states.len() != west.states.len() {
        return Err(Error::TimeGridMismatch);
    }
    let mut times = Vec::with_capacity(jmgt.states.len());
    let mut values = Vec::with_capacity(jmgt.states.len());
    for (a, b) in jmgt.states.iter().zip(&west.states) {
        if (a.t - b.t).abs() > 1e-9 * a.t.abs().max(1.0) {
            return Err(Error::TimeGridMismatch);
        }
        if !a.u.shares_basis(&b.u) {
            return Err(Error::BasisMismatch);
        }
        times.push(a.t);
        values.push(limit_error_at(a, b));
    }
    let sup = values.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(LimitError { times, values, sup })
}

/// `∫‖u_ttt‖²` over the snapshots of a JMGT run.
pub fn uttt_integral(traj: &Trajectory, tr: &Transform) -> Result<f64> {
    let ts: Vec<f64> = traj.times().collect();
    let ys = traj
        .states
        .iter()
        .map(|s| estimate_uttt(s, &traj.params, tr).map(|f| f.norm_sq()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(trapezoid(&ts, &ys))
}

/// `∫ [‖u_tt‖² + ‖Au‖² + ‖A^{1/2}u_t‖²]` over a run (the limit problem's
/// dissipation integral).
pub fn dissipation_integral(traj: &Trajectory) -> f64 {
    let ts: Vec<f64> = traj.times().collect();
    let ys: Vec<f64> = traj
        .states
        .iter()
        .map(|s| s.w.norm_sq() + s.u.power_norm_sq(OperatorPower::One) + s.v.power_norm_sq(OperatorPower::Half))
        .collect();
    trapezoid(&ts, &ys)
}

/// Least squares on `(ln x, ln y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, found: points.len() });
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonPositiveInput);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(fit_line(&xs, &ys))
}

/// Smallest `C₂` with `ℰ(t) + C₁∫₀ᵗℰ ≤ C₂ℰ(0)` along a run, per candidate `C₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizabilityReport {
    /// `(C₁, C₂*)` pairs.
    pub rows: Vec<(f64, f64)>,
    /// `∫₀ᵀ ℰ`.
    pub integral: f64,
    pub integral_finite: bool,
    /// `ℰ(T) > ℰ(0)`: the energy grew, so `C₂*` keeps increasing with `T`.
    pub growing: bool,
}

impl StabilizabilityReport {
    /// Largest `C₁` whose `C₂*` does not exceed `c2_max`.
    pub fn largest_c1_within(&self, c2_max: f64) -> Option<(f64, f64)> {
        self.rows.iter().copied().filter(|&(_, c2)| c2 <= c2_max).max_by(|a, b| a.0.total_cmp(&b.0))
    }
}

pub fn stabilizability_report(samples: &[EnergySample], c1_grid: &[f64]) -> Result<StabilizabilityReport> {
    let Some(first) = samples.first() else {
        return Err(Error::TooFewSamples { needed: 1, found: 0 });
    };
    let e0 = first.cal_e;
    if !(e0 > 0.0) {
        return Err(Error::config("stabilizability report needs a positive initial energy"));
    }
    let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let es: Vec<f64> = samples.iter().map(|s| s.cal_e).collect();
    let cum = cumulative_trapezoid(&ts, &es);
    let rows = c1_grid
        .iter()
        .map(|&c1| {
            let c2 = es.iter().zip(&cum).map(|(e, i)| (e + c1 * i) / e0).fold(f64::NEG_INFINITY, f64::max);
            (c1, c2)
        })
        .collect();
    let integral = *cum.last().unwrap_or(&0.0);
    Ok(StabilizabilityReport {
        rows,
        integral,
        integral_finite: integral.is_finite(),
        growing: es[es.len() - 1] > e0,
    })
}
