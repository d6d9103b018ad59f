//! Orchestrated studies: τ-sweeps against the Westervelt limit, decay-rate
//! sweeps, the smallness-threshold search, manufactured-solution order
//! checks and the Picard/ETD cross-check.
//!
//! Every study is a pure function of an [`ExperimentConfig`]. Sweeps are
//! split into a per-τ record function and an assembly step so callers can
//! evaluate records concurrently and still get identical results.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

// unused once std is linked elsewhere (its inherent f64 methods take over)
#[allow(unused_imports)]
use num_traits::Float;

use crate::diagnostics::{
    dissipation_integral, error_vs_limit, fit_decay_rate, loglog_slope, uttt_integral, DecayFit, EnergyField,
    FitOptions, LineFit,
};
use crate::model::{compute_g, weighted_norm_sq, JmgtState, ModelParams, NormLevel};
use crate::picard::{picard_solve, PicardConfig};
use crate::propagator::{simulate, SimulationConfig, Solver, Termination, Trajectory};
use crate::spectral::{OperatorPower, PhysicalField, SpectralBasis, SpectralField, Transform};
use crate::{Error, Result};

/// Spatial shape of the initial displacement.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// First eigenfunction.
    Mode1,
    /// Smooth bump centred in the domain, projected onto the basis.
    Bump,
    /// Explicit coefficients in mode order (missing trailing modes are 0).
    Modes(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub profile: Profile,
    /// `u₀ = amplitude · shape` with the shape normalized to unit L² norm.
    pub amplitude: f64,
    /// `u₁ = velocity · u₀`.
    pub velocity: f64,
}

/// Geometric τ grid `max, max·factor, …` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGrid {
    pub max: f64,
    pub factor: f64,
    pub count: usize,
}

impl TauGrid {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.max * self.factor.powi(i as i32)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub modes: usize,
    pub lengths: Vec<f64>,
    pub c: f64,
    pub delta: f64,
    pub k: f64,
    /// Relaxation time for single-run studies.
    pub tau: f64,
    pub solver: Solver,
    pub tau_grid: TauGrid,
    pub init: InitialSpec,
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    pub padding: f64,
    pub blowup_ceiling: f64,
    pub fit: FitOptions,
    pub fit_field: EnergyField,
    /// Horizon of decay-rate runs (long enough to reach the fit floor).
    pub decay_t_end: f64,
    pub decay_min_r_squared: f64,
    pub uniformity_fraction: f64,
    pub threshold_rel_tol: f64,
    pub threshold_max_amplitude: f64,
    pub threshold_max_iter: usize,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    /// Amplitude multipliers for the Picard contraction ramp.
    pub picard_ramp: Vec<f64>,
    pub mms_amplitude: f64,
    pub mms_t_end: f64,
    /// Coarsest step of the three-level refinement.
    pub mms_dt: f64,
    pub c1_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            modes: 16,
            lengths: vec![PI],
            c: 1.0,
            delta: 1.0,
            k: 1.0,
            tau: 0.1,
            solver: Solver::Jmgt,
            tau_grid: TauGrid { max: 0.1, factor: 0.5, count: 8 },
            init: InitialSpec { profile: Profile::Mode1, amplitude: 5e-3, velocity: 0.0 },
            t_end: 5.0,
            dt: 1e-2,
            stride: 10,
            padding: 1.5,
            blowup_ceiling: 1e6,
            fit: FitOptions::default(),
            fit_field: EnergyField::CalE,
            decay_t_end: 30.0,
            decay_min_r_squared: 0.9,
            uniformity_fraction: 0.5,
            threshold_rel_tol: 0.05,
            threshold_max_amplitude: 10.0,
            threshold_max_iter: 40,
            picard_max_iter: 50,
            picard_tol: 1e-10,
            picard_ramp: vec![1.0, 10.0, 100.0, 1000.0],
            mms_amplitude: 0.1,
            mms_t_end: 1.0,
            mms_dt: 0.025,
            c1_grid: vec![0.1, 0.25, 0.5, 1.0, 2.0],
        }
    }
}

impl ExperimentConfig {
    /// Checks the invariants; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let basis = self.basis()?;
        self.params(self.tau)?;
        let g = &self.tau_grid;
        if !(g.max > 0.0) || g.count == 0 || !(g.factor > 0.0 && g.factor < 1.0) {
            return Err(Error::config("tau grid needs max > 0, 0 < factor < 1 and count ≥ 1"));
        }
        self.sim(self.t_end).steps()?;
        self.sim(self.decay_t_end).steps()?;
        Transform::new(&basis, self.padding)?;
        if !(self.blowup_ceiling > 0.0) {
            return Err(Error::config("blowup ceiling must be positive"));
        }
        if !self.init.amplitude.is_finite() || !self.init.velocity.is_finite() {
            return Err(Error::config("initial amplitude and velocity must be finite"));
        }
        if let Profile::Modes(m) = &self.init.profile {
            if m.is_empty() || m.len() > basis.len() || m.iter().all(|&x| x == 0.0) {
                return Err(Error::config("mode profile needs 1..=N^dim coefficients, not all zero"));
            }
        }
        if !(self.uniformity_fraction > 0.0 && self.uniformity_fraction <= 1.0) {
            return Err(Error::config("uniformity fraction must lie in (0, 1]"));
        }
        if !(self.fit.trim_fraction >= 0.0 && self.fit.trim_fraction < 1.0) {
            return Err(Error::config("fit trim fraction must lie in [0, 1)"));
        }
        if !(self.threshold_rel_tol > 0.0) || !(self.threshold_max_amplitude > 0.0) {
            return Err(Error::config("threshold tolerance and ceiling must be positive"));
        }
        if !(self.mms_dt > 0.0) || !(self.mms_t_end > 0.0) || self.picard_max_iter == 0 {
            return Err(Error::config("mms/picard settings must be positive"));
        }
        let mut warnings = Vec::new();
        let safe = 0.5 / (self.c * self.c * basis.max_eigenvalue()).sqrt();
        if self.dt > safe {
            warnings.push(alloc::format!(
                "dt = {} exceeds 0.5/sqrt(c^2 lambda_max) = {safe:.3e}; accuracy may degrade",
                self.dt
            ));
        }
        Ok(warnings)
    }

    pub fn basis(&self) -> Result<Arc<SpectralBasis>> {
        SpectralBasis::new(self.dim, self.modes, &self.lengths)
    }

    pub fn params(&self, tau: f64) -> Result<ModelParams> {
        ModelParams::new(tau, self.c, self.delta, self.k)
    }

    pub fn sim(&self, t_end: f64) -> SimulationConfig {
        SimulationConfig {
            t_end,
            dt: self.dt,
            stride: self.stride,
            padding: self.padding,
            blowup_ceiling: self.blowup_ceiling,
        }
    }
}

/// Unit-L² shape of the initial displacement.
pub fn profile_shape(profile: &Profile, basis: &Arc<SpectralBasis>) -> Result<SpectralField> {
    let f = match profile {
        Profile::Mode1 => SpectralField::unit(basis, 0),
        Profile::Modes(m) => {
            let mut c = vec![0.0; basis.len()];
            c[..m.len()].copy_from_slice(m);
            SpectralField::from_coeffs(basis, c)?
        }
        Profile::Bump => {
            let lengths = basis.lengths().to_vec();
            let grid = 4 * basis.modes_per_axis() + 32;
            let g = PhysicalField::from_fn(basis, grid, |x| {
                x.iter()
                    .zip(&lengths)
                    .map(|(xi, l)| {
                        let s = (xi - 0.5 * l) / (0.15 * l);
                        (-s * s).exp()
                    })
                    .product()
            });
            g.to_spectral(basis)?
        }
    };
    let n = f.norm();
    if !(n > 0.0) {
        return Err(Error::config("initial profile has zero norm"));
    }
    Ok(f.scaled(1.0 / n))
}

/// `(u₀, u₁, u₂)` with `u₂` chosen compatible with the limit equation at
/// `t = 0`: the linear acceleration `u₂⁽⁰⁾ = −c²Au₀ − δAu₁` corrected by one
/// fixed-point pass `u₂ = u₂⁽⁰⁾ + 2k P_N(u₀u₂⁽⁰⁾ + u₁²)`. Exact for `k = 0`;
/// otherwise the defect is `O(k²)` and no `O(1)` initial layer forms.
pub fn well_prepared_state(
    u0: SpectralField,
    u1: SpectralField,
    params: &ModelParams,
    padding: f64,
) -> Result<JmgtState> {
    let tr = Transform::new(u0.basis(), padding)?;
    let lin = u0
        .apply_power(OperatorPower::One)
        .scaled(-params.c2())
        .add_scaled(-params.delta, &u1.apply_power(OperatorPower::One));
    let s = JmgtState { t: 0.0, u: u0, v: u1, w: lin };
    let u2 = &s.w + &compute_g(&s, params, &tr);
    Ok(JmgtState { w: u2, ..s })
}

/// Initial state described by `cfg.init` at the given amplitude.
pub fn initial_state_with_amplitude(cfg: &ExperimentConfig, amplitude: f64) -> Result<JmgtState> {
    let basis = cfg.basis()?;
    let shape = profile_shape(&cfg.init.profile, &basis)?;
    let u0 = shape.scaled(amplitude);
    let u1 = u0.scaled(cfg.init.velocity);
    well_prepared_state(u0, u1, &cfg.params(cfg.tau)?, cfg.padding)
}

pub fn initial_state(cfg: &ExperimentConfig) -> Result<JmgtState> {
    initial_state_with_amplitude(cfg, cfg.init.amplitude)
}

/// Outcome label of a sweep record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFlag {
    Ok,
    BlowUp,
    NumericalFailure,
    FitFailed,
}

impl RecordFlag {
    pub fn label(self) -> &'static str {
        match self {
            RecordFlag::Ok => "ok",
            RecordFlag::BlowUp => "blowup",
            RecordFlag::NumericalFailure => "numerical_failure",
            RecordFlag::FitFailed => "fit_failed",
        }
    }

    fn of(t: &Termination) -> Self {
        match t {
            Termination::Completed => RecordFlag::Ok,
            Termination::BlowUp(_) => RecordFlag::BlowUp,
            Termination::NumericalFailure(_) => RecordFlag::NumericalFailure,
        }
    }
}

/// One τ of a vanishing-relaxation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub tau: f64,
    /// `sup_{t≤T} (‖Ax^τ‖² + ‖A^{1/2}x^τ_t‖²)`, `x^τ = u^τ − u⁰`.
    pub sup_err_sq: f64,
    /// `∫₀ᵀ ‖u^τ_ttt‖²`.
    pub uttt_integral: f64,
    pub decay_fit: Option<DecayFit>,
    pub flag: RecordFlag,
}

/// Runs JMGT at `tau` and Westervelt from the same `(u₀, u₁)`.
pub fn tau_sweep_record(cfg: &ExperimentConfig, tau: f64) -> Result<SweepRecord> {
    let params = cfg.params(tau)?;
    let init = initial_state(cfg)?;
    let sim = cfg.sim(cfg.t_end);
    let jmgt = simulate(&init, &params, &sim, Solver::Jmgt, None)?;
    let west = simulate(&init, &params.with_tau(0.0)?, &sim, Solver::Westervelt, None)?;
    let mut flag = RecordFlag::of(&jmgt.termination);
    if flag == RecordFlag::Ok {
        flag = RecordFlag::of(&west.termination);
    }
    if flag != RecordFlag::Ok {
        return Ok(SweepRecord { tau, sup_err_sq: f64::NAN, uttt_integral: f64::NAN, decay_fit: None, flag });
    }
    let tr = Transform::new(init.basis(), cfg.padding)?;
    let err = error_vs_limit(&jmgt, &west)?;
    let uttt = uttt_integral(&jmgt, &tr)?;
    let decay_fit = fit_decay_rate(&jmgt.samples, cfg.fit_field, &cfg.fit).ok();
    Ok(SweepRecord { tau, sup_err_sq: err.sup, uttt_integral: uttt, decay_fit, flag })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauSweep {
    pub records: Vec<SweepRecord>,
    /// Log-log fit of `sup_err_sq` against τ over the usable records.
    pub error_fit: core::result::Result<LineFit, Error>,
    /// Log-log fit of the `u_ttt` integral against τ.
    pub uttt_fit: core::result::Result<LineFit, Error>,
}

/// Fits the rates over records flagged `ok`.
pub fn assemble_tau_sweep(records: Vec<SweepRecord>) -> TauSweep {
    let ok: Vec<&SweepRecord> = records.iter().filter(|r| r.flag == RecordFlag::Ok).collect();
    let err_pts: Vec<(f64, f64)> = ok.iter().map(|r| (r.tau, r.sup_err_sq)).collect();
    let uttt_pts: Vec<(f64, f64)> = ok.iter().map(|r| (r.tau, r.uttt_integral)).collect();
    TauSweep { error_fit: loglog_slope(&err_pts), uttt_fit: loglog_slope(&uttt_pts), records }
}

pub fn run_tau_sweep(cfg: &ExperimentConfig) -> Result<TauSweep> {
    let records =
        cfg.tau_grid.values().into_iter().map(|tau| tau_sweep_record(cfg, tau)).collect::<Result<Vec<_>>>()?;
    Ok(assemble_tau_sweep(records))
}

/// Decay fits of one τ.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayEntry {
    pub tau: f64,
    pub fit: core::result::Result<DecayFit, Error>,
    /// Fit of `𝔈`, reported alongside the main field.
    pub frak_fit: core::result::Result<DecayFit, Error>,
    pub flag: RecordFlag,
}

impl DecayEntry {
    pub fn omega(&self) -> Option<f64> {
        self.fit.as_ref().ok().map(|f| f.omega)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySweep {
    pub entries: Vec<DecayEntry>,
    pub omega_at_tau_max: Option<f64>,
    pub omega_min: Option<f64>,
    /// Every run decayed and `min ω ≥ fraction · ω(τ_max)`.
    pub uniform: bool,
}

pub fn decay_entry(cfg: &ExperimentConfig, tau: f64) -> Result<DecayEntry> {
    let params = cfg.params(tau)?;
    let init = initial_state(cfg)?;
    let traj = simulate(&init, &params, &cfg.sim(cfg.decay_t_end), Solver::Jmgt, None)?;
    let flag = RecordFlag::of(&traj.termination);
    let fit = fit_decay_rate(&traj.samples, cfg.fit_field, &cfg.fit);
    let frak_fit = fit_decay_rate(&traj.samples, EnergyField::FrakE, &cfg.fit);
    let flag = if flag == RecordFlag::Ok && fit.is_err() { RecordFlag::FitFailed } else { flag };
    Ok(DecayEntry { tau, fit, frak_fit, flag })
}

pub fn assemble_decay_sweep(entries: Vec<DecayEntry>, cfg: &ExperimentConfig) -> DecaySweep {
    let omega_at_tau_max = entries
        .iter()
        .max_by(|a, b| a.tau.total_cmp(&b.tau))
        .and_then(|e| if e.flag == RecordFlag::Ok { e.omega() } else { None });
    let all_decayed = !entries.is_empty()
        && entries.iter().all(|e| {
            e.flag == RecordFlag::Ok
                && e.fit.as_ref().is_ok_and(|f| f.omega > 0.0 && f.r_squared >= cfg.decay_min_r_squared)
        });
    let omega_min = entries.iter().filter_map(|e| e.omega()).fold(None, |m: Option<f64>, w| Some(m.map_or(w, |m| m.min(w))));
    let uniform = all_decayed
        && match (omega_min, omega_at_tau_max) {
            (Some(lo), Some(top)) => lo >= cfg.uniformity_fraction * top,
            _ => false,
        };
    DecaySweep { entries, omega_at_tau_max, omega_min, uniform }
}

pub fn run_decay_sweep(cfg: &ExperimentConfig) -> Result<DecaySweep> {
    let entries = cfg.tau_grid.values().into_iter().map(|tau| decay_entry(cfg, tau)).collect::<Result<Vec<_>>>()?;
    Ok(assemble_decay_sweep(entries, cfg))
}

/// Decay of the limit problem over `[0, 2T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WesterveltDecay {
    pub fit: core::result::Result<DecayFit, Error>,
    pub flag: RecordFlag,
    /// Dissipation integral over `[0, T]` and `[0, 2T]`.
    pub dissipation_t: f64,
    pub dissipation_2t: f64,
}

impl WesterveltDecay {
    pub fn relative_change(&self) -> f64 {
        (self.dissipation_2t - self.dissipation_t).abs() / self.dissipation_t.abs()
    }
}

pub fn run_westervelt_decay(cfg: &ExperimentConfig) -> Result<WesterveltDecay> {
    let params = cfg.params(0.0)?;
    let init = initial_state(cfg)?;
    let traj = simulate(&init, &params, &cfg.sim(2.0 * cfg.decay_t_end), Solver::Westervelt, None)?;
    let flag = RecordFlag::of(&traj.termination);
    let half: usize = traj.states.iter().take_while(|s| s.t <= cfg.decay_t_end * (1.0 + 1e-12)).count();
    let prefix = Trajectory {
        states: traj.states[..half].to_vec(),
        samples: traj.samples[..half].to_vec(),
        ..traj.clone()
    };
    let fit = fit_decay_rate(&prefix.samples, cfg.fit_field, &cfg.fit);
    Ok(WesterveltDecay {
        fit,
        flag,
        dissipation_t: dissipation_integral(&prefix),
        dissipation_2t: dissipation_integral(&traj),
    })
}

/// Which norm the threshold search reports as the "bounded" size `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RLevel {
    H1,
    H2,
}

impl RLevel {
    fn norm_level(self) -> NormLevel {
        match self {
            RLevel::H1 => NormLevel::H1,
            RLevel::H2 => NormLevel::H2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RLevel::H1 => "H1",
            RLevel::H2 => "H2",
        }
    }
}

/// Result of bisecting a monotone pass/fail predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Bisection {
    /// `(argument, passed)` in evaluation order.
    pub history: Vec<(f64, bool)>,
    /// Last passing and first failing argument; `None` when nothing failed
    /// up to the ceiling.
    pub bracket: Option<(f64, f64)>,
}

/// Locates the switch of a predicate that passes for small arguments.
/// Expands geometrically from `start` (doubling, capped at `ceiling`),
/// then bisects until `(hi − lo)/hi ≤ rel_tol`.
pub fn bisect_threshold(
    mut passes: impl FnMut(f64) -> bool,
    start: f64,
    ceiling: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Bisection {
    let mut history = Vec::new();
    let mut eval = |a: f64, h: &mut Vec<(f64, bool)>| {
        let p = passes(a);
        h.push((a, p));
        p
    };
    let mut a = start.min(ceiling);
    let (mut lo, mut hi);
    if eval(a, &mut history) {
        lo = a;
        loop {
            if a >= ceiling || history.len() >= max_iter {
                return Bisection { history, bracket: None };
            }
            a = (2.0 * a).min(ceiling);
            if !eval(a, &mut history) {
                hi = a;
                break;
            }
            lo = a;
        }
    } else {
        hi = a;
        loop {
            a *= 0.5;
            if history.len() >= max_iter || a < f64::MIN_POSITIVE {
                return Bisection { history, bracket: Some((0.0, hi)) };
            }
            if eval(a, &mut history) {
                lo = a;
                break;
            }
            hi = a;
        }
    }
    while (hi - lo) / hi > rel_tol && history.len() < max_iter {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut history) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Bisection { history, bracket: Some((lo, hi)) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdStep {
    pub iter: usize,
    pub amplitude: f64,
    pub h0tau_norm: f64,
    pub r_norm: f64,
    pub decayed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub history: Vec<ThresholdStep>,
    /// ℍ₀^τ norms of the data at the last decaying and first non-decaying
    /// amplitude; `None` when every probe decayed (open-ended).
    pub bracket: Option<(f64, f64)>,
    pub amplitude_bracket: Option<(f64, f64)>,
    pub r_level: RLevel,
    /// The `r_level` norm of the data at the lower end of the bracket.
    pub r_at_lower: Option<f64>,
}

impl ThresholdResult {
    pub fn is_open_ended(&self) -> bool {
        self.bracket.is_none()
    }
}

/// Decay verdict for one amplitude: no blow-up, positive fitted rate with
/// `R² ≥ decay_min_r_squared`.
pub fn decays_at(cfg: &ExperimentConfig, amplitude: f64) -> bool {
    let Ok(params) = cfg.params(cfg.tau) else { return false };
    let Ok(init) = initial_state_with_amplitude(cfg, amplitude) else { return false };
    let Ok(traj) = simulate(&init, &params, &cfg.sim(cfg.decay_t_end), Solver::Jmgt, None) else {
        return false;
    };
    if !traj.termination.is_completed() {
        return false;
    }
    fit_decay_rate(&traj.samples, cfg.fit_field, &cfg.fit)
        .is_ok_and(|f| f.omega > 0.0 && f.r_squared >= cfg.decay_min_r_squared)
}

pub fn run_threshold_search(cfg: &ExperimentConfig, r_level: RLevel) -> Result<ThresholdResult> {
    let params = cfg.params(cfg.tau)?;
    let start = if cfg.init.amplitude > 0.0 { cfg.init.amplitude } else { 1e-3 };
    let b = bisect_threshold(
        |a| decays_at(cfg, a),
        start,
        cfg.threshold_max_amplitude,
        cfg.threshold_rel_tol,
        cfg.threshold_max_iter,
    );
    let norms = |a: f64| -> Result<(f64, f64)> {
        let s = initial_state_with_amplitude(cfg, a)?;
        Ok((
            weighted_norm_sq(&s, NormLevel::H0, &params).sqrt(),
            weighted_norm_sq(&s, r_level.norm_level(), &params).sqrt(),
        ))
    };
    let mut history = Vec::with_capacity(b.history.len());
    for (i, &(a, d)) in b.history.iter().enumerate() {
        let (h0, r) = norms(a)?;
        history.push(ThresholdStep { iter: i, amplitude: a, h0tau_norm: h0, r_norm: r, decayed: d });
    }
    let (bracket, r_at_lower) = match b.bracket {
        Some((lo, hi)) => {
            let (n_lo, r_lo) = norms(lo)?;
            let (n_hi, _) = norms(hi)?;
            (Some((n_lo, n_hi)), Some(r_lo))
        }
        None => (None, None),
    };
    Ok(ThresholdResult { history, bracket, amplitude_bracket: b.bracket, r_level, r_at_lower })
}

/// Temporal convergence of one solver on a manufactured solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub solver: Solver,
    pub dts: Vec<f64>,
    /// Error at the final time against the exact solution.
    pub errors: Vec<f64>,
    /// Log-log slope of error against dt.
    pub slope: f64,
    /// `log₂(‖U_h − U_{h/2}‖ / ‖U_{h/2} − U_{h/4}‖)`.
    pub richardson: f64,
    /// Errors already at round-off level; the slope is meaningless.
    pub floor_limited: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsReport {
    pub jmgt: OrderStudy,
    pub westervelt: OrderStudy,
}

/// Error norm below which refinement studies are considered round-off bound.
const ROUNDOFF_GUARD: f64 = 1e-13;

/// Manufactured solution `u* = a e^{−t} φ₁` for both equations, with the
/// source chosen so that `u*` solves the semi-discrete system exactly:
/// `f = a e^{−t}(1 − τ + (c² − b)λ₁) φ₁ − a² e^{−2t} G(φ₁, −φ₁, φ₁)`.
pub fn run_mms_order(cfg: &ExperimentConfig) -> Result<MmsReport> {
    let basis = cfg.basis()?;
    let tr = Transform::new(&basis, cfg.padding)?;
    let a = cfg.mms_amplitude;
    let phi = SpectralField::unit(&basis, 0);
    let lambda = basis.eigenvalues()[0];
    let unit_state = JmgtState { t: 0.0, u: phi.clone(), v: phi.scaled(-1.0), w: phi.clone() };

    let study = |solver: Solver| -> Result<OrderStudy> {
        let params = match solver {
            Solver::Jmgt => cfg.params(cfg.tau)?,
            Solver::Westervelt => cfg.params(0.0)?,
        };
        let g1 = compute_g(&unit_state, &params, &tr);
        let lin = 1.0 - params.tau + (params.c2() - params.b_tau()) * lambda;
        let forcing = |t: f64| -> SpectralField {
            phi.scaled(a * (-t).exp() * lin).add_scaled(-a * a * (-2.0 * t).exp(), &g1)
        };
        let exact_at = |t: f64| unit_state.scaled(a * (-t).exp());
        let init = exact_at(0.0);
        let mut finals = Vec::new();
        let mut errors = Vec::new();
        let dts: Vec<f64> = (0..3).map(|i| cfg.mms_dt / f64::from(1u32 << i)).collect();
        for &dt in &dts {
            let sim = SimulationConfig {
                t_end: cfg.mms_t_end,
                dt,
                stride: usize::MAX,
                padding: cfg.padding,
                blowup_ceiling: cfg.blowup_ceiling,
            };
            let traj = simulate(&init, &params, &sim, solver, Some(&forcing))?;
            if let Termination::NumericalFailure(e) | Termination::BlowUp(e) = traj.termination {
                return Err(e);
            }
            let exact = exact_at(traj.final_state.t);
            errors.push(state_error(&traj.final_state, &exact, solver, &params));
            finals.push(traj.final_state);
        }
        let pts: Vec<(f64, f64)> = dts.iter().copied().zip(errors.iter().copied()).collect();
        let floor_limited = errors.iter().any(|&e| e < ROUNDOFF_GUARD);
        let slope = loglog_slope(&pts).map(|f| f.slope).unwrap_or(f64::NAN);
        let d1 = state_error(&finals[0], &finals[1], solver, &params);
        let d2 = state_error(&finals[1], &finals[2], solver, &params);
        Ok(OrderStudy { solver, dts, errors, slope, richardson: (d1 / d2).log2(), floor_limited })
    };
    Ok(MmsReport { jmgt: study(Solver::Jmgt)?, westervelt: study(Solver::Westervelt)? })
}

/// ℍ₁^τ distance (only `(u, u_t)` for Westervelt).
fn state_error(a: &JmgtState, b: &JmgtState, solver: Solver, params: &ModelParams) -> f64 {
    let mut d = a.diff(b);
    if solver == Solver::Westervelt {
        d.w = SpectralField::zeros(d.u.basis());
    }
    weighted_norm_sq(&d, NormLevel::H1, params).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RampEntry {
    pub amplitude: f64,
    pub h0tau_norm: f64,
    pub ratios: Vec<f64>,
    pub converged: bool,
}

impl RampEntry {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }

    pub fn contractive(&self) -> bool {
        self.converged && self.ratios.iter().all(|&r| r < 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardComparison {
    /// `sup_t ‖W − U_ETD‖_{ℍ₂^τ}` for the configured data.
    pub discrepancy: f64,
    /// `10·max(tol, dt²)`.
    pub tolerance: f64,
    /// Same comparison with `k = 0`.
    pub linear_discrepancy: f64,
    pub converged: bool,
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub ramp: Vec<RampEntry>,
    /// First ramp amplitude at which the iteration stopped contracting.
    pub first_noncontractive: Option<f64>,
}

fn sup_h2_distance(a: &Trajectory, b: &Trajectory, params: &ModelParams) -> Result<f64> {
    if a.states.len() != b.states.len() {
        return Err(Error::TimeGridMismatch);
    }
    Ok(a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| weighted_norm_sq(&x.diff(y), NormLevel::H2, params).sqrt())
        .fold(0.0, f64::max))
}

pub fn run_picard_vs_etd(cfg: &ExperimentConfig) -> Result<PicardComparison> {
    let params = cfg.params(cfg.tau)?;
    let pc = PicardConfig {
        t_end: cfg.t_end,
        dt: cfg.dt,
        padding: cfg.padding,
        max_iter: cfg.picard_max_iter,
        tol: cfg.picard_tol,
    };
    let mut sim = cfg.sim(cfg.t_end);
    sim.stride = 1;

    let compare = |params: &ModelParams, init: &JmgtState| -> Result<(f64, crate::picard::PicardResult)> {
        let pic = picard_solve(init, params, &pc)?;
        let etd = simulate(init, params, &sim, Solver::Jmgt, None)?;
        if let Termination::NumericalFailure(e) | Termination::BlowUp(e) = etd.termination {
            return Err(e);
        }
        Ok((sup_h2_distance(&pic.trajectory, &etd, params)?, pic))
    };

    let init = initial_state(cfg)?;
    let (discrepancy, pic) = compare(&params, &init)?;
    let linear = params.with_k(0.0)?;
    let (linear_discrepancy, _) = compare(&linear, &init)?;

    let mut ramp = Vec::new();
    let mut first_noncontractive = None;
    for &m in &cfg.picard_ramp {
        let amp = cfg.init.amplitude * m;
        let s = initial_state_with_amplitude(cfg, amp)?;
        let r = picard_solve(&s, &params, &pc)?;
        let entry = RampEntry {
            amplitude: amp,
            h0tau_norm: weighted_norm_sq(&s, NormLevel::H0, &params).sqrt(),
            ratios: r.ratios,
            converged: r.converged,
        };
        if !entry.contractive() && first_noncontractive.is_none() {
            first_noncontractive = Some(amp);
        }
        ramp.push(entry);
    }

    Ok(PicardComparison {
        discrepancy,
        tolerance: 10.0 * cfg.picard_tol.max(cfg.dt * cfg.dt),
        linear_discrepancy,
        converged: pic.converged,
        increments: pic.increments,
        ratios: pic.ratios,
        ramp,
        first_noncontractive,
    })
}
