//! Time integration.
//!
//! The linear part of both equations is diagonal in the sine basis, so each
//! mode evolves under a small companion matrix: 3×3 for JMGT,
//!
//! ```text
//! [    0,       1,     0 ]
//! [    0,       0,     1 ]
//! [ −c²λ/τ, −bλ/τ,  −1/τ ]
//! ```
//!
//! and 2×2 `[0, 1; −c²λ, −δλ]` for Westervelt. Exact per-mode exponentials
//! absorb all of the stiffness (including the `1/τ` scale), and the
//! nonlinearity is advanced with the second-order exponential
//! time-differencing predictor–corrector (ETD-RK2):
//!
//! ```text
//! a       = e^{hM} U + h φ₁(hM) N(U, t)
//! U_{n+1} = a + h φ₂(hM) (N(a, t + h) − N(U, t))
//! ```
//!
//! The `u_tt` inside `G` is read from the state for JMGT. For Westervelt
//! it is not a state variable and is recovered from the equation itself by
//! a fixed-point solve of `u_tt = −c²Au − δAu_t + f + 2k P_N(u·u_tt + u_t²)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

// unused once std is linked elsewhere (its inherent f64 methods take over)
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{exp_with_phi, SmallMatrix};
use crate::model::{compute_g, weighted_norm_sq, EnergySample, JmgtState, ModelParams, NormLevel, WestState};
use crate::spectral::{OperatorPower, SpectralBasis, SpectralField, Transform};
use crate::{Error, Result};

/// Which evolution equation a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Jmgt,
    Westervelt,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Jmgt => "jmgt",
            Solver::Westervelt => "westervelt",
        }
    }
}

/// Time-dependent source added to `G`, given in coefficient space.
pub type Forcing<'a> = &'a dyn Fn(f64) -> SpectralField;

/// Linear dynamics of one eigenmode.
pub fn companion_matrix(solver: Solver, params: &ModelParams, lambda: f64) -> SmallMatrix {
    let c2 = params.c2();
    match solver {
        Solver::Jmgt => {
            let tau = params.tau;
            SmallMatrix::from_rows(&[
                &[0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0],
                &[-c2 * lambda / tau, -params.b_tau() * lambda / tau, -1.0 / tau],
            ])
        }
        Solver::Westervelt => {
            SmallMatrix::from_rows(&[&[0.0, 1.0], &[-c2 * lambda, -params.delta * lambda]])
        }
    }
}

/// Routh–Hurwitz test that every root of the characteristic polynomial
/// `τs³ + s² + bλs + c²λ` (resp. `s² + δλs + c²λ`) has negative real part.
pub fn is_mode_stable(solver: Solver, params: &ModelParams, lambda: f64) -> bool {
    let c2l = params.c2() * lambda;
    match solver {
        Solver::Jmgt => {
            let bl = params.b_tau() * lambda;
            params.tau > 0.0 && bl > 0.0 && c2l > 0.0 && bl > params.tau * c2l
        }
        Solver::Westervelt => params.delta * lambda > 0.0 && c2l > 0.0,
    }
}

/// `exp(hM)` and the ETD weights `hφ₁(hM)`, `hφ₂(hM)` of one mode.
#[derive(Debug, Clone)]
pub struct ModeBlock {
    pub exp: SmallMatrix,
    pub phi1: SmallMatrix,
    pub phi2: SmallMatrix,
}

/// Per-mode linear propagators for a fixed step.
#[derive(Debug, Clone)]
pub struct ModePropagator {
    solver: Solver,
    dt: f64,
    blocks: Vec<ModeBlock>,
}

impl ModePropagator {
    pub fn build(basis: &SpectralBasis, params: &ModelParams, dt: f64, solver: Solver) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::config("time step must be positive"));
        }
        match solver {
            Solver::Jmgt if params.tau <= 0.0 => {
                return Err(Error::config("the JMGT propagator needs tau > 0 (use the Westervelt solver for tau = 0)"))
            }
            Solver::Jmgt if !(params.gamma_tau() > 0.0) => {
                return Err(Error::config("gamma_tau must be positive"))
            }
            _ => {}
        }
        let mut blocks = Vec::with_capacity(basis.len());
        for &lambda in basis.eigenvalues() {
            if !is_mode_stable(solver, params, lambda) {
                return Err(Error::config("linear dynamics has a non-decaying mode"));
            }
            let m = companion_matrix(solver, params, lambda);
            let (exp, phi1, phi2) = exp_with_phi(&m, dt);
            if !(exp.is_finite() && phi1.is_finite() && phi2.is_finite()) {
                return Err(Error::config("mode exponential is not finite"));
            }
            blocks.push(ModeBlock { exp, phi1, phi2 });
        }
        Ok(Self { solver, dt, blocks })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn solver(&self) -> Solver {
        self.solver
    }

    pub fn blocks(&self) -> &[ModeBlock] {
        &self.blocks
    }
}

/// Applies `exp(hM)` mode by mode to the components `fields`.
fn apply_exp(blocks: &[ModeBlock], fields: &[&SpectralField], out: &mut [Vec<f64>]) {
    let d = fields.len();
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    for (m, blk) in blocks.iter().enumerate() {
        for i in 0..d {
            x[i] = fields[i].coeffs()[m];
        }
        blk.exp.matvec(&x[..d], &mut y[..d]);
        for i in 0..d {
            out[i][m] = y[i];
        }
    }
}

fn check_finite(fields: &[&SpectralField], t: f64) -> Result<()> {
    for f in fields {
        if let Some(mode) = f.first_non_finite() {
            return Err(Error::NumericalFailure { step: 0, t, mode: Some(mode) });
        }
    }
    Ok(())
}

/// ETD-RK2 stepper for `τu_ttt + u_tt + c²Au + bAu_t = G(u) + f`.
#[derive(Debug, Clone)]
pub struct JmgtStepper {
    params: ModelParams,
    prop: ModePropagator,
    tr: Transform,
}

impl JmgtStepper {
    pub fn new(basis: &Arc<SpectralBasis>, params: &ModelParams, dt: f64, padding: f64) -> Result<Self> {
        Ok(Self {
            params: *params,
            prop: ModePropagator::build(basis, params, dt, Solver::Jmgt)?,
            tr: Transform::new(basis, padding)?,
        })
    }

    pub fn transform(&self) -> &Transform {
        &self.tr
    }

    pub fn propagator(&self) -> &ModePropagator {
        &self.prop
    }

    /// Third-row forcing `(G + f)/τ`.
    fn nonlinear(&self, s: &JmgtState, forcing: Option<Forcing>) -> SpectralField {
        let mut n = compute_g(s, &self.params, &self.tr);
        if let Some(f) = forcing {
            n = &n + &f(s.t);
        }
        n.scaled(1.0 / self.params.tau)
    }

    pub fn step(&self, s: &JmgtState, forcing: Option<Forcing>) -> Result<JmgtState> {
        let dt = self.prop.dt;
        let modes = s.u.coeffs().len();
        let n0 = self.nonlinear(s, forcing);
        let mut lin = vec![vec![0.0; modes]; 3];
        apply_exp(&self.prop.blocks, &[&s.u, &s.v, &s.w], &mut lin);

        let mut pred = [s.u.clone(), s.v.clone(), s.w.clone()];
        for (m, blk) in self.prop.blocks.iter().enumerate() {
            let g = n0.coeffs()[m];
            for (i, p) in pred.iter_mut().enumerate() {
                p.coeffs_mut()[m] = lin[i][m] + blk.phi1[(i, 2)] * g;
            }
        }
        let [pu, pv, pw] = pred;
        let a = JmgtState { t: s.t + dt, u: pu, v: pv, w: pw };
        check_finite(&[&a.u, &a.v, &a.w], a.t)?;

        let n1 = self.nonlinear(&a, forcing);
        let mut out = a.clone();
        for (m, blk) in self.prop.blocks.iter().enumerate() {
            let dg = n1.coeffs()[m] - n0.coeffs()[m];
            if dg == 0.0 {
                continue;
            }
            out.u.coeffs_mut()[m] += blk.phi2[(0, 2)] * dg;
            out.v.coeffs_mut()[m] += blk.phi2[(1, 2)] * dg;
            out.w.coeffs_mut()[m] += blk.phi2[(2, 2)] * dg;
        }
        check_finite(&[&out.u, &out.v, &out.w], out.t)?;
        Ok(out)
    }
}

/// Maximum fixed-point sweeps when recovering `u_tt` for Westervelt.
const ACCEL_MAX_ITER: usize = 200;

/// Solves the quasilinear relation `(1 − 2ku)u_tt + c²Au + δAu_t = 2k u_t² + f`
/// for `u_tt` in the Galerkin sense, returning `(u_tt, G)` with
/// `G = 2k P_N(u·u_tt + u_t²)`.
///
/// Fails when the fixed-point iteration does not settle, which happens once
/// `2k·u` approaches 1 somewhere and the equation degenerates.
pub fn westervelt_acceleration(
    s: &WestState,
    params: &ModelParams,
    tr: &Transform,
    forcing: Option<&SpectralField>,
) -> Result<(SpectralField, SpectralField)> {
    let c2 = params.c2();
    let mut base = s.u.apply_power(OperatorPower::One).scaled(-c2);
    base = base.add_scaled(-params.delta, &s.v.apply_power(OperatorPower::One));
    if let Some(f) = forcing {
        base = &base + f;
    }
    if params.k == 0.0 {
        return Ok((base, SpectralField::zeros(s.u.basis())));
    }
    let two_k = 2.0 * params.k;
    let pu = tr.to_physical(&s.u);
    let pv = tr.to_physical(&s.v);
    let vsq: Vec<f64> = pv.samples().iter().map(|v| v * v).collect();
    let g_of = |w: &SpectralField| -> SpectralField {
        let mut prod = tr.to_physical(w);
        for ((p, u), v2) in prod.samples_mut().iter_mut().zip(pu.samples()).zip(&vsq) {
            *p = two_k * (u * *p + v2);
        }
        tr.to_spectral(&prod).expect("transform grid")
    };
    let mut w = base.clone();
    for _ in 0..ACCEL_MAX_ITER {
        let g = g_of(&w);
        let next = &base + &g;
        let change = (&next - &w).norm();
        let scale = next.norm();
        w = next;
        if !w.is_finite() {
            break;
        }
        if change <= 1e-15 * scale || change == 0.0 {
            let g = g_of(&w);
            return Ok((&base + &g, g));
        }
    }
    Err(Error::NumericalFailure { step: 0, t: s.t, mode: w.first_non_finite() })
}

/// ETD-RK2 stepper for `u_tt + c²Au + δAu_t = G(u) + f`.
#[derive(Debug, Clone)]
pub struct WesterveltStepper {
    params: ModelParams,
    prop: ModePropagator,
    tr: Transform,
}

impl WesterveltStepper {
    pub fn new(basis: &Arc<SpectralBasis>, params: &ModelParams, dt: f64, padding: f64) -> Result<Self> {
        let params = params.with_tau(0.0)?;
        Ok(Self {
            params,
            prop: ModePropagator::build(basis, &params, dt, Solver::Westervelt)?,
            tr: Transform::new(basis, padding)?,
        })
    }

    pub fn transform(&self) -> &Transform {
        &self.tr
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Second-row forcing `G + f`.
    fn nonlinear(&self, s: &WestState, forcing: Option<Forcing>) -> Result<SpectralField> {
        let f = forcing.map(|f| f(s.t));
        let (_, g) = westervelt_acceleration(s, &self.params, &self.tr, f.as_ref())?;
        Ok(match f {
            Some(f) => &g + &f,
            None => g,
        })
    }

    /// `u_tt` implied by the equation at state `s`.
    pub fn acceleration(&self, s: &WestState, forcing: Option<Forcing>) -> Result<SpectralField> {
        let f = forcing.map(|f| f(s.t));
        Ok(westervelt_acceleration(s, &self.params, &self.tr, f.as_ref())?.0)
    }

    pub fn step(&self, s: &WestState, forcing: Option<Forcing>) -> Result<WestState> {
        let dt = self.prop.dt;
        let modes = s.u.coeffs().len();
        let n0 = self.nonlinear(s, forcing)?;
        let mut lin = vec![vec![0.0; modes]; 2];
        apply_exp(&self.prop.blocks, &[&s.u, &s.v], &mut lin);
        let mut a = WestState { t: s.t + dt, u: s.u.clone(), v: s.v.clone() };
        for (m, blk) in self.prop.blocks.iter().enumerate() {
            let g = n0.coeffs()[m];
            a.u.coeffs_mut()[m] = lin[0][m] + blk.phi1[(0, 1)] * g;
            a.v.coeffs_mut()[m] = lin[1][m] + blk.phi1[(1, 1)] * g;
        }
        check_finite(&[&a.u, &a.v], a.t)?;
        let n1 = self.nonlinear(&a, forcing)?;
        let mut out = a;
        for (m, blk) in self.prop.blocks.iter().enumerate() {
            let dg = n1.coeffs()[m] - n0.coeffs()[m];
            out.u.coeffs_mut()[m] += blk.phi2[(0, 1)] * dg;
            out.v.coeffs_mut()[m] += blk.phi2[(1, 1)] * dg;
        }
        check_finite(&[&out.u, &out.v], out.t)?;
        Ok(out)
    }
}

/// `u_ttt = τ⁻¹(G − u_tt − c²Au − bAu_t)`, read off the equation.
pub fn estimate_uttt(s: &JmgtState, params: &ModelParams, tr: &Transform) -> Result<SpectralField> {
    if !(params.tau > 0.0) {
        return Err(Error::config("u_ttt is only defined through the equation for tau > 0"));
    }
    let g = compute_g(s, params, tr);
    let r = g
        .add_scaled(-1.0, &s.w)
        .add_scaled(-params.c2(), &s.u.apply_power(OperatorPower::One))
        .add_scaled(-params.b_tau(), &s.v.apply_power(OperatorPower::One));
    Ok(r.scaled(1.0 / params.tau))
}

/// Time horizon, step and sampling of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Steps between stored snapshots.
    pub stride: usize,
    pub padding: f64,
    /// Abort once the ℍ₁^τ norm exceeds this value.
    pub blowup_ceiling: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { t_end: 10.0, dt: 1e-2, stride: 10, padding: 1.5, blowup_ceiling: 1e6 }
    }
}

impl SimulationConfig {
    /// Number of steps covering `[0, t_end]`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::config("t_end must be finite and non-negative"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("dt must be positive"));
        }
        if self.stride == 0 {
            return Err(Error::config("stride must be at least 1"));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::config("t_end must be an integer multiple of dt"));
        }
        Ok(n as usize)
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// NaN/Inf produced; the trajectory holds the snapshots before it.
    NumericalFailure(Error),
    /// The monitored norm crossed the ceiling.
    BlowUp(Error),
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "ok",
            Termination::NumericalFailure(_) => "numerical_failure",
            Termination::BlowUp(_) => "blowup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMeta {
    pub solver: Solver,
    pub dt: f64,
    pub padding: f64,
    pub stride: usize,
}

/// Snapshots of a run with their energies. Westervelt snapshots carry the
/// acceleration implied by the equation in the `w` slot.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<JmgtState>,
    pub samples: Vec<EnergySample>,
    pub params: ModelParams,
    pub meta: RunMeta,
    pub termination: Termination,
    /// Last state reached, whether or not it falls on the stride.
    pub final_state: JmgtState,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }
}

/// Runs either solver from `initial`. For Westervelt only `(u, u_t)` of
/// `initial` are used.
///
/// Configuration problems are returned as `Err`; numerical failure and
/// blow-up end the run early and are reported in
/// [`Trajectory::termination`].
pub fn simulate(
    initial: &JmgtState,
    params: &ModelParams,
    cfg: &SimulationConfig,
    solver: Solver,
    forcing: Option<Forcing>,
) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    if !initial.is_finite() {
        return Err(Error::config("initial state is not finite"));
    }
    let basis = initial.basis().clone();
    let meta = RunMeta { solver, dt: cfg.dt, padding: cfg.padding, stride: cfg.stride };
    let t0 = initial.t;
    match solver {
        Solver::Jmgt => {
            let stepper = JmgtStepper::new(&basis, params, cfg.dt, cfg.padding)?;
            let mut state = initial.clone();
            let mut traj = Trajectory {
                states: vec![state.clone()],
                samples: vec![EnergySample::of(&state, params)],
                params: *params,
                meta,
                termination: Termination::Completed,
                final_state: state.clone(),
            };
            for j in 1..=steps {
                match stepper.step(&state, forcing) {
                    Ok(mut next) => {
                        next.t = t0 + j as f64 * cfg.dt;
                        state = next;
                    }
                    Err(e) => {
                        traj.termination = Termination::NumericalFailure(with_step(e, j));
                        break;
                    }
                }
                let norm = weighted_norm_sq(&state, NormLevel::H1, params).sqrt();
                if norm > cfg.blowup_ceiling {
                    traj.termination = Termination::BlowUp(Error::BlowUp { step: j, t: state.t, norm });
                    break;
                }
                if j % cfg.stride == 0 {
                    traj.samples.push(EnergySample::of(&state, params));
                    traj.states.push(state.clone());
                }
            }
            traj.final_state = state;
            Ok(traj)
        }
        Solver::Westervelt => {
            let stepper = WesterveltStepper::new(&basis, params, cfg.dt, cfg.padding)?;
            let wparams = *stepper.params();
            let mut state = WestState { t: t0, u: initial.u.clone(), v: initial.v.clone() };
            let snapshot = |s: &WestState| -> Result<JmgtState> {
                Ok(s.with_acceleration(stepper.acceleration(s, forcing)?))
            };
            let first = snapshot(&state)?;
            let mut traj = Trajectory {
                samples: vec![EnergySample::of(&first, &wparams)],
                states: vec![first.clone()],
                params: wparams,
                meta,
                termination: Termination::Completed,
                final_state: first,
            };
            let mut last = state.clone();
            for j in 1..=steps {
                match stepper.step(&state, forcing) {
                    Ok(mut next) => {
                        next.t = t0 + j as f64 * cfg.dt;
                        state = next;
                    }
                    Err(e) => {
                        traj.termination = Termination::NumericalFailure(with_step(e, j));
                        break;
                    }
                }
                last = state.clone();
                let full = state.with_acceleration(SpectralField::zeros(&basis));
                let norm = weighted_norm_sq(&full, NormLevel::H1, &wparams).sqrt();
                if norm > cfg.blowup_ceiling {
                    traj.termination = Termination::BlowUp(Error::BlowUp { step: j, t: state.t, norm });
                    break;
                }
                if j % cfg.stride == 0 {
                    match snapshot(&state) {
                        Ok(snap) => {
                            traj.samples.push(EnergySample::of(&snap, &wparams));
                            traj.states.push(snap);
                        }
                        Err(e) => {
                            traj.termination = Termination::NumericalFailure(with_step(e, j));
                            break;
                        }
                    }
                }
            }
            traj.final_state = match snapshot(&last) {
                Ok(s) => s,
                Err(_) => last.with_acceleration(SpectralField::zeros(&basis)),
            };
            Ok(traj)
        }
    }
}

fn with_step(e: Error, step: usize) -> Error {
    match e {
        Error::NumericalFailure { t, mode, .. } => Error::NumericalFailure { step, t, mode },
        Error::BlowUp { t, norm, .. } => Error::BlowUp { step, t, norm },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    /// All roots of a real polynomial (highest degree first) by the
    /// Durand–Kerner iteration.
    fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
        let lead = coeffs[0];
        let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
        let n = monic.len() - 1;
        let eval = |z: Complex64| monic.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
        let seed = Complex64::new(0.4, 0.9);
        let scale = 1.0 + monic.iter().skip(1).fold(0.0f64, |m, c| m.max(c.abs()));
        let mut z: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * scale).collect();
        for _ in 0..2000 {
            let prev = z.clone();
            for i in 0..n {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= z[i] - z[j];
                    }
                }
                let step = eval(z[i]) / denom;
                z[i] -= step;
            }
            if z.iter().zip(&prev).all(|(a, b)| (a - b).norm() <= 1e-15 * a.norm().max(1.0)) {
                break;
            }
        }
        z
    }

    fn char_poly(solver: Solver, p: &ModelParams, lambda: f64) -> Vec<f64> {
        match solver {
            Solver::Jmgt => vec![p.tau, 1.0, p.b_tau() * lambda, p.c2() * lambda],
            Solver::Westervelt => vec![1.0, p.delta * lambda, p.c2() * lambda],
        }
    }

    fn apply_complex(m: &SmallMatrix, x: &[Complex64]) -> Vec<Complex64> {
        (0..m.dim()).map(|i| (0..m.dim()).map(|j| x[j] * m[(i, j)]).sum()).collect()
    }

    /// Reference solution of one linear mode: `Σ cᵢ e^{sᵢ t}` fitted to the
    /// initial derivatives through the Vandermonde system.
    fn closed_form(roots: &[Complex64], init: &[f64], t: f64) -> Vec<f64> {
        let n = roots.len();
        let mut a: Vec<Vec<Complex64>> =
            (0..n).map(|r| (0..n).map(|col| roots[col].powu(r as u32)).collect()).collect();
        let mut rhs: Vec<Complex64> = init.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
            a.swap(col, piv);
            rhs.swap(col, piv);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for cc in col..n {
                    let v = a[col][cc];
                    a[r][cc] -= f * v;
                }
                let v = rhs[col];
                rhs[r] -= f * v;
            }
        }
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for r in (0..n).rev() {
            let s: Complex64 = (r + 1..n).map(|cc| a[r][cc] * c[cc]).sum();
            c[r] = (rhs[r] - s) / a[r][r];
        }
        (0..n)
            .map(|d| (0..n).map(|i| c[i] * roots[i].powu(d as u32) * (roots[i] * t).exp()).sum::<Complex64>().re)
            .collect()
    }

    fn basis(n: usize) -> Arc<SpectralBasis> {
        SpectralBasis::new(1, n, &[core::f64::consts::PI]).unwrap()
    }

    #[test]
    fn mode_exponential_maps_eigenvectors_to_multiples() {
        let cases = [(0.1, 1.0, 1.0), (0.01, 2.0, 0.5), (0.5, 1.0, 3.0)];
        for &(tau, c, delta) in &cases {
            let p = ModelParams::new(tau, c, delta, 0.0).unwrap();
            for solver in [Solver::Jmgt, Solver::Westervelt] {
                let p = if solver == Solver::Westervelt { p.with_tau(0.0).unwrap() } else { p };
                let b = basis(12);
                let dt = 0.05;
                let prop = ModePropagator::build(&b, &p, dt, solver).unwrap();
                for (blk, &lambda) in prop.blocks().iter().zip(b.eigenvalues()) {
                    for s in poly_roots(&char_poly(solver, &p, lambda)) {
                        let n = blk.exp.dim();
                        let v: Vec<Complex64> = (0..n).map(|d| s.powu(d as u32)).collect();
                        let got = apply_complex(&blk.exp, &v);
                        let scale = (s * dt).exp();
                        let size = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
                        for (g, e) in got.iter().zip(&v) {
                            let err = (g - e * scale).norm() / size;
                            assert!(err < 1e-10, "{solver:?} tau={tau} lambda={lambda}: {err:e}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn routh_hurwitz_agrees_with_roots() {
        let p = ModelParams::new(0.2, 1.5, 0.3, 0.0).unwrap();
        for lambda in [1.0, 4.0, 100.0] {
            assert!(is_mode_stable(Solver::Jmgt, &p, lambda));
            assert!(poly_roots(&char_poly(Solver::Jmgt, &p, lambda)).iter().all(|z| z.re < 0.0));
        }
        // b ≤ τc² makes the third-order mode grow
        let grow = poly_roots(&[0.2, 1.0, 0.2 * 2.25 - 0.1, 2.25]);
        assert!(grow.iter().any(|z| z.re > 0.0));
    }

    #[test]
    fn linear_runs_match_closed_form() {
        let b = basis(6);
        let cfg = SimulationConfig { t_end: 10.0, dt: 0.02, stride: 50, padding: 1.5, blowup_ceiling: 1e6 };
        let p = ModelParams::new(0.1, 1.0, 1.0, 0.0).unwrap();
        let mut init = JmgtState::zeros(&b);
        for m in 0..b.len() {
            init.u.coeffs_mut()[m] = 1.0 / (m as f64 + 1.0);
            init.v.coeffs_mut()[m] = -0.5 / (m as f64 + 1.0);
            init.w.coeffs_mut()[m] = 0.25;
        }
        for solver in [Solver::Jmgt, Solver::Westervelt] {
            let p = if solver == Solver::Westervelt { p.with_tau(0.0).unwrap() } else { p };
            let traj = simulate(&init, &p, &cfg, solver, None).unwrap();
            assert!(traj.termination.is_completed());
            assert_eq!(traj.states.len(), 11);
            for s in &traj.states {
                for (m, &lambda) in b.eigenvalues().iter().enumerate() {
                    let roots = poly_roots(&char_poly(solver, &p, lambda));
                    let x0 = [init.u.coeffs()[m], init.v.coeffs()[m], init.w.coeffs()[m]];
                    let want = closed_form(&roots, &x0[..roots.len()], s.t);
                    assert!((s.u.coeffs()[m] - want[0]).abs() < 1e-8, "{solver:?} t={} m={m}", s.t);
                    assert!((s.v.coeffs()[m] - want[1]).abs() < 1e-8);
                    if solver == Solver::Jmgt {
                        assert!((s.w.coeffs()[m] - want[2]).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let b = basis(8);
        let p = ModelParams::new(0.05, 1.0, 1.0, 2.0).unwrap();
        let cfg = SimulationConfig { t_end: 1.0, dt: 0.01, stride: 10, ..Default::default() };
        for solver in [Solver::Jmgt, Solver::Westervelt] {
            let traj = simulate(&JmgtState::zeros(&b), &p, &cfg, solver, None).unwrap();
            assert!(traj.states.iter().all(|s| s.u.norm() == 0.0 && s.v.norm() == 0.0 && s.w.norm() == 0.0));
            assert!(traj.samples.iter().all(|e| e.frak_e == 0.0));
        }
    }

    #[test]
    fn zero_horizon_gives_initial_sample_only() {
        let b = basis(4);
        let p = ModelParams::new(0.05, 1.0, 1.0, 1.0).unwrap();
        let cfg = SimulationConfig { t_end: 0.0, ..Default::default() };
        let init = JmgtState::new(0.0, SpectralField::unit(&b, 0).scaled(0.01), SpectralField::zeros(&b), SpectralField::zeros(&b)).unwrap();
        let traj = simulate(&init, &p, &cfg, Solver::Jmgt, None).unwrap();
        assert_eq!(traj.states.len(), 1);
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.final_state, init);
    }

    #[test]
    fn snapshots_do_not_depend_on_stride() {
        let b = basis(8);
        let p = ModelParams::new(0.05, 1.0, 1.0, 1.0).unwrap();
        let init = JmgtState::new(0.0, SpectralField::unit(&b, 0).scaled(0.05), SpectralField::unit(&b, 1).scaled(0.02), SpectralField::zeros(&b)).unwrap();
        for solver in [Solver::Jmgt, Solver::Westervelt] {
            let fine = simulate(&init, &p, &SimulationConfig { t_end: 1.0, dt: 0.01, stride: 1, ..Default::default() }, solver, None).unwrap();
            let coarse = simulate(&init, &p, &SimulationConfig { t_end: 1.0, dt: 0.01, stride: 5, ..Default::default() }, solver, None).unwrap();
            assert_eq!(coarse.states.len(), 21);
            for (i, s) in coarse.states.iter().enumerate() {
                assert_eq!(s, &fine.states[5 * i]);
            }
            assert_eq!(coarse.final_state, fine.final_state);
        }
    }

    #[test]
    fn bad_configurations_are_rejected() {
        let b = basis(4);
        let p = ModelParams::new(0.05, 1.0, 1.0, 1.0).unwrap();
        assert!(ModePropagator::build(&b, &p, 0.0, Solver::Jmgt).is_err());
        assert!(ModePropagator::build(&b, &p, -1.0, Solver::Jmgt).is_err());
        assert!(ModePropagator::build(&b, &p.with_tau(0.0).unwrap(), 0.1, Solver::Jmgt).is_err());
        let cfg = SimulationConfig { t_end: 1.0, dt: 0.3, ..Default::default() };
        assert!(cfg.steps().is_err());
        let cfg = SimulationConfig { stride: 0, ..Default::default() };
        assert!(cfg.steps().is_err());
    }

    #[test]
    fn blow_up_is_reported_not_returned_as_error() {
        let b = basis(4);
        let p = ModelParams::new(0.05, 1.0, 1.0, 0.0).unwrap();
        let init = JmgtState::new(0.0, SpectralField::unit(&b, 0), SpectralField::zeros(&b), SpectralField::zeros(&b)).unwrap();
        let cfg = SimulationConfig { t_end: 1.0, dt: 0.01, stride: 1, padding: 1.5, blowup_ceiling: 1e-3 };
        let traj = simulate(&init, &p, &cfg, Solver::Jmgt, None).unwrap();
        assert!(matches!(traj.termination, Termination::BlowUp(Error::BlowUp { step: 1, .. })));
        assert_eq!(traj.states.len(), 1);
    }

    #[test]
    fn westervelt_acceleration_solves_its_own_equation() {
        let b = basis(8);
        let tr = Transform::new(&b, 1.5).unwrap();
        let p = ModelParams::westervelt(1.0, 0.5, 1.5).unwrap();
        let s = WestState::new(0.0, SpectralField::unit(&b, 0).scaled(0.1), SpectralField::unit(&b, 2).scaled(0.05)).unwrap();
        let (utt, g) = westervelt_acceleration(&s, &p, &tr, None).unwrap();
        let direct = {
            let prod = tr.product(&s.u, &utt);
            let vv = tr.product(&s.v, &s.v);
            (&prod + &vv).scaled(2.0 * p.k)
        };
        assert!((&g - &direct).norm() < 1e-14);
        let resid = &(&utt + &s.u.apply_power(OperatorPower::One)) + &s.v.apply_power(OperatorPower::One).scaled(p.delta);
        assert!((&resid - &g).norm() < 1e-13 * utt.norm());
    }

    #[test]
    fn uttt_estimate_matches_linear_mode_dynamics() {
        let b = basis(4);
        let tr = Transform::new(&b, 1.5).unwrap();
        let p = ModelParams::new(0.2, 1.0, 1.0, 0.0).unwrap();
        let s = JmgtState::new(0.0, SpectralField::unit(&b, 1), SpectralField::unit(&b, 1).scaled(2.0), SpectralField::unit(&b, 1).scaled(-1.0)).unwrap();
        let got = estimate_uttt(&s, &p, &tr).unwrap();
        let m = companion_matrix(Solver::Jmgt, &p, 4.0);
        let mut y = [0.0; 3];
        m.matvec(&[1.0, 2.0, -1.0], &mut y);
        assert!((got.coeffs()[1] - y[2]).abs() < 1e-13);
        assert!(estimate_uttt(&s, &p.with_tau(0.0).unwrap(), &tr).is_err());
    }
}
