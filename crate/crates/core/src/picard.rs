//! Mild-solution solver: Picard iteration on the variation-of-parameters
//! formula
//!
//! ```text
//! W^{n+1}(t) = S(t)U₀ + ∫₀ᵗ S(t−σ) τ⁻¹F(Wⁿ(σ)) dσ,   F = (0, 0, G)
//! ```
//!
//! with the semigroup `S` realized by the exact per-mode exponentials and
//! the Duhamel integral by the composite trapezoid rule on the step grid.
//! The trapezoid sum obeys the recursion
//! `I_j = S(h) I_{j−1} + (h/2)(S(h) F_{j−1} + F_j)`, so each sweep is linear
//! in the number of steps.

use alloc::vec;
use alloc::vec::Vec;

// unused once std is linked elsewhere (its inherent f64 methods take over)
#[allow(unused_imports)]
use num_traits::Float;

use crate::model::{compute_g, weighted_norm_sq, EnergySample, JmgtState, ModelParams, NormLevel};
use crate::propagator::{ModePropagator, RunMeta, SimulationConfig, Solver, Termination, Trajectory};
use crate::spectral::{SpectralField, Transform};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub t_end: f64,
    pub dt: f64,
    pub padding: f64,
    pub max_iter: usize,
    /// Stop once `sup_t ‖W^{n+1} − Wⁿ‖_{ℍ₂^τ}` drops below this.
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    /// Final iterate on the full step grid (stride 1).
    pub trajectory: Trajectory,
    /// `sup_t ‖W^{n+1} − Wⁿ‖_{ℍ₂^τ}` per sweep.
    pub increments: Vec<f64>,
    /// `increments[n] / increments[n−1]`.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

impl PicardResult {
    pub fn iterations(&self) -> usize {
        self.increments.len()
    }
}

type Grid = Vec<[Vec<f64>; 3]>;

fn to_state(w: &[Vec<f64>; 3], t: f64, like: &JmgtState) -> JmgtState {
    let b = like.basis();
    JmgtState {
        t,
        u: SpectralField::from_coeffs(b, w[0].clone()).expect("basis size"),
        v: SpectralField::from_coeffs(b, w[1].clone()).expect("basis size"),
        w: SpectralField::from_coeffs(b, w[2].clone()).expect("basis size"),
    }
}

pub fn picard_solve(u0: &JmgtState, params: &ModelParams, cfg: &PicardConfig) -> Result<PicardResult> {
    let steps = SimulationConfig { t_end: cfg.t_end, dt: cfg.dt, stride: 1, padding: cfg.padding, blowup_ceiling: f64::INFINITY }
        .steps()?;
    if cfg.max_iter == 0 {
        return Err(Error::config("picard max_iter must be at least 1"));
    }
    let basis = u0.basis().clone();
    let prop = ModePropagator::build(&basis, params, cfg.dt, Solver::Jmgt)?;
    let tr = Transform::new(&basis, cfg.padding)?;
    let modes = basis.len();
    let blocks = prop.blocks();
    let h = cfg.dt;
    let time = |j: usize| u0.t + j as f64 * h;

    // W⁰(t_j) = S(t_j) U₀
    let mut free: Grid = Vec::with_capacity(steps + 1);
    free.push([u0.u.coeffs().to_vec(), u0.v.coeffs().to_vec(), u0.w.coeffs().to_vec()]);
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    for j in 1..=steps {
        let prev = &free[j - 1];
        let mut next = [vec![0.0; modes], vec![0.0; modes], vec![0.0; modes]];
        for (m, blk) in blocks.iter().enumerate() {
            for i in 0..3 {
                x[i] = prev[i][m];
            }
            blk.exp.matvec(&x, &mut y);
            for i in 0..3 {
                next[i][m] = y[i];
            }
        }
        free.push(next);
    }

    let mut current = free.clone();
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    let inv_tau = 1.0 / params.tau;

    for _ in 0..cfg.max_iter {
        // third-row forcing τ⁻¹G(Wⁿ(t_j)); the first two rows vanish
        let forcing: Vec<Vec<f64>> = current
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let s = to_state(w, time(j), u0);
                compute_g(&s, params, &tr).into_coeffs().into_iter().map(|g| g * inv_tau).collect()
            })
            .collect();
        let mut next: Grid = Vec::with_capacity(steps + 1);
        next.push(free[0].clone());
        let mut integral = [vec![0.0; modes], vec![0.0; modes], vec![0.0; modes]];
        for j in 1..=steps {
            for (m, blk) in blocks.iter().enumerate() {
                // I_j = S(h)(I_{j−1} + (h/2)F_{j−1}) + (h/2)F_j
                for i in 0..3 {
                    x[i] = integral[i][m];
                }
                x[2] += 0.5 * h * forcing[j - 1][m];
                blk.exp.matvec(&x, &mut y);
                y[2] += 0.5 * h * forcing[j][m];
                for i in 0..3 {
                    integral[i][m] = y[i];
                }
            }
            let w = [0, 1, 2].map(|i| free[j][i].iter().zip(&integral[i]).map(|(a, b)| a + b).collect::<Vec<f64>>());
            next.push(w);
        }

        let mut sup = 0.0f64;
        let mut finite = true;
        for (j, (a, b)) in next.iter().zip(&current).enumerate() {
            let d = to_state(&[0, 1, 2].map(|i| a[i].iter().zip(&b[i]).map(|(p, q)| p - q).collect()), time(j), u0);
            let n = weighted_norm_sq(&d, NormLevel::H2, params).sqrt();
            if !n.is_finite() {
                finite = false;
            }
            sup = sup.max(n);
        }
        if !finite {
            sup = f64::INFINITY;
        }
        if let Some(&prev) = increments.last() {
            ratios.push(sup / prev);
        }
        increments.push(sup);
        if !finite {
            break;
        }
        current = next;
        if sup < cfg.tol {
            converged = true;
            break;
        }
    }

    let states: Vec<JmgtState> = current.iter().enumerate().map(|(j, w)| to_state(w, time(j), u0)).collect();
    let samples = states.iter().map(|s| EnergySample::of(s, params)).collect();
    let final_state = states.last().cloned().expect("at least the initial state");
    let termination = if converged {
        Termination::Completed
    } else if increments.last().is_some_and(|d| !d.is_finite()) {
        Termination::NumericalFailure(Error::NumericalFailure { step: 0, t: u0.t, mode: None })
    } else {
        Termination::Completed
    };
    Ok(PicardResult {
        trajectory: Trajectory {
            states,
            samples,
            params: *params,
            meta: RunMeta { solver: Solver::Jmgt, dt: h, padding: cfg.padding, stride: 1 },
            termination,
            final_state,
        },
        increments,
        ratios,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::simulate;
    use crate::spectral::SpectralBasis;

    fn setup(k: f64) -> (JmgtState, ModelParams, PicardConfig) {
        let b = SpectralBasis::new(1, 8, &[core::f64::consts::PI]).unwrap();
        let u = SpectralField::unit(&b, 0).scaled(0.01).add_scaled(0.004, &SpectralField::unit(&b, 2));
        let s = JmgtState::new(0.0, u.clone(), u.scaled(-0.3), SpectralField::zeros(&b)).unwrap();
        let p = ModelParams::new(0.05, 1.0, 1.0, k).unwrap();
        (s, p, PicardConfig { t_end: 1.0, dt: 0.01, padding: 1.5, max_iter: 30, tol: 1e-12 })
    }

    #[test]
    fn linear_problem_is_the_free_evolution() {
        let (s, p, cfg) = setup(0.0);
        let r = picard_solve(&s, &p, &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations(), 1);
        assert_eq!(r.increments[0], 0.0);
        let sim = SimulationConfig { t_end: 1.0, dt: 0.01, stride: 1, padding: 1.5, blowup_ceiling: 1e6 };
        let etd = simulate(&s, &p, &sim, Solver::Jmgt, None).unwrap();
        assert_eq!(r.trajectory.states.len(), etd.states.len());
        for (a, b) in r.trajectory.states.iter().zip(&etd.states) {
            assert!(weighted_norm_sq(&a.diff(b), NormLevel::H2, &p).sqrt() < 1e-13);
        }
    }

    #[test]
    fn small_data_contracts() {
        let (s, p, cfg) = setup(1.0);
        let r = picard_solve(&s, &p, &cfg).unwrap();
        assert!(r.converged);
        assert!(r.ratios.iter().all(|&q| q < 0.1), "{:?}", r.ratios);
        assert_eq!(r.ratios.len() + 1, r.increments.len());
    }

    #[test]
    fn iteration_budget_is_respected() {
        let (s, p, mut cfg) = setup(1.0);
        cfg.max_iter = 2;
        cfg.tol = 0.0;
        let r = picard_solve(&s, &p, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations(), 2);
        cfg.max_iter = 0;
        assert!(picard_solve(&s, &p, &cfg).is_err());
    }
}
