//! Physical parameters, the quadratic nonlinearity and the energy
//! functionals.
//!
//! Everything here works in coefficient space: with an orthonormal basis the
//! L² norms below are Euclidean norms of coefficient vectors.

use alloc::sync::Arc;

use crate::spectral::{OperatorPower, SpectralBasis, SpectralField, Transform};
use crate::{Error, Result};

/// Relaxation time `tau`, sound speed `c`, diffusivity `delta` and
/// nonlinearity `k`, with the derived `b = δ + τc²` and `γ = 1 − τc²/b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub tau: f64,
    pub c: f64,
    pub delta: f64,
    pub k: f64,
    b_tau: f64,
    gamma_tau: f64,
}

impl ModelParams {
    pub fn new(tau: f64, c: f64, delta: f64, k: f64) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::config("tau must be finite and non-negative"));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::config("sound speed c must be positive"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::config("diffusivity delta must be positive"));
        }
        if !k.is_finite() {
            return Err(Error::config("nonlinearity k must be finite"));
        }
        let c2 = c * c;
        let b_tau = delta + tau * c2;
        let gamma_tau = 1.0 - tau * c2 / b_tau;
        Ok(Self { tau, c, delta, k, b_tau, gamma_tau })
    }

    /// Parameters of the limit (τ = 0) problem.
    pub fn westervelt(c: f64, delta: f64, k: f64) -> Result<Self> {
        Self::new(0.0, c, delta, k)
    }

    /// Same physical constants with a different relaxation time.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(tau, self.c, self.delta, self.k)
    }

    /// Same constants with a different nonlinearity coefficient.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        ModelParams::new(self.tau, self.c, self.delta, k)
    }

    pub fn b_tau(&self) -> f64 {
        self.b_tau
    }

    pub fn gamma_tau(&self) -> f64 {
        self.gamma_tau
    }

    pub fn c2(&self) -> f64 {
        self.c * self.c
    }
}

/// Snapshot `(u, u_t, u_tt)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct JmgtState {
    pub t: f64,
    pub u: SpectralField,
    pub v: SpectralField,
    pub w: SpectralField,
}

impl JmgtState {
    pub fn new(t: f64, u: SpectralField, v: SpectralField, w: SpectralField) -> Result<Self> {
        if !u.shares_basis(&v) || !u.shares_basis(&w) {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { t, u, v, w })
    }

    pub fn zeros(basis: &Arc<SpectralBasis>) -> Self {
        let z = SpectralField::zeros(basis);
        Self { t: 0.0, u: z.clone(), v: z.clone(), w: z }
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        self.u.basis()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.w.is_finite()
    }

    /// Scales every component, keeping the time.
    pub fn scaled(&self, s: f64) -> Self {
        Self { t: self.t, u: self.u.scaled(s), v: self.v.scaled(s), w: self.w.scaled(s) }
    }

    /// Componentwise difference (time taken from `self`).
    pub fn diff(&self, other: &Self) -> Self {
        Self { t: self.t, u: &self.u - &other.u, v: &self.v - &other.v, w: &self.w - &other.w }
    }
}

/// Snapshot `(u, u_t)` of the limit problem.
#[derive(Debug, Clone, PartialEq)]
pub struct WestState {
    pub t: f64,
    pub u: SpectralField,
    pub v: SpectralField,
}

impl WestState {
    pub fn new(t: f64, u: SpectralField, v: SpectralField) -> Result<Self> {
        if !u.shares_basis(&v) {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { t, u, v })
    }

    pub fn zeros(basis: &Arc<SpectralBasis>) -> Self {
        let z = SpectralField::zeros(basis);
        Self { t: 0.0, u: z.clone(), v: z }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    /// Attaches an acceleration field to form a full snapshot.
    pub fn with_acceleration(&self, w: SpectralField) -> JmgtState {
        JmgtState { t: self.t, u: self.u.clone(), v: self.v.clone(), w }
    }
}

/// Pseudo-spectral `G = 2k P_N(u·u_tt + u_t²)` on the transform's grid.
///
/// Callers are responsible for checking the result for non-finite entries.
pub fn compute_g(s: &JmgtState, params: &ModelParams, tr: &Transform) -> SpectralField {
    if params.k == 0.0 {
        return SpectralField::zeros(s.basis());
    }
    let pu = tr.to_physical(&s.u);
    let pv = tr.to_physical(&s.v);
    let pw = tr.to_physical(&s.w);
    let mut prod = pu.clone();
    let two_k = 2.0 * params.k;
    for ((p, v), w) in prod.samples_mut().iter_mut().zip(pv.samples()).zip(pw.samples()) {
        *p = two_k * (*p * w + v * v);
    }
    tr.to_spectral(&prod).expect("transform grid")
}

/// `E₀ = ½‖u_t‖² + (c²/2)‖A^{1/2}u‖²`.
pub fn energy_e0(s: &JmgtState, p: &ModelParams) -> f64 {
    0.5 * s.v.norm_sq() + 0.5 * p.c2() * s.u.power_norm_sq(OperatorPower::Half)
}

/// `E₁ = (b/2)‖A^{1/2}z‖² + (τ/2)‖z_t‖² + (c²γ/2b)‖u_t‖²` with
/// `z = u_t + (c²/b)u`.
pub fn energy_e1(s: &JmgtState, p: &ModelParams) -> f64 {
    let b = p.b_tau();
    let r = p.c2() / b;
    let z = s.v.add_scaled(r, &s.u);
    let zt = s.w.add_scaled(r, &s.v);
    0.5 * b * z.power_norm_sq(OperatorPower::Half)
        + 0.5 * p.tau * zt.norm_sq()
        + 0.5 * r * p.gamma_tau() * s.v.norm_sq()
}

pub fn energy_e(s: &JmgtState, p: &ModelParams) -> f64 {
    energy_e0(s, p) + energy_e1(s, p)
}

/// `ℰ = E + ‖Au‖²`.
pub fn energy_cal_e(s: &JmgtState, p: &ModelParams) -> f64 {
    energy_e(s, p) + s.u.power_norm_sq(OperatorPower::One)
}

/// `𝔈 = ℰ + ‖Au_t‖² + τ‖A^{1/2}u_tt‖²`.
pub fn energy_frak_e(s: &JmgtState, p: &ModelParams) -> f64 {
    energy_cal_e(s, p)
        + s.v.power_norm_sq(OperatorPower::One)
        + p.tau * s.w.power_norm_sq(OperatorPower::Half)
}

/// Phase-space level for the τ-weighted norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormLevel {
    /// `D(A^{1/2}) × D(A^{1/2}) × L²`
    H0,
    /// `D(A) × D(A^{1/2}) × L²`
    H1,
    /// `D(A) × D(A) × D(A^{1/2})`
    H2,
}

impl NormLevel {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(NormLevel::H0),
            1 => Ok(NormLevel::H1),
            2 => Ok(NormLevel::H2),
            _ => Err(Error::config("norm level must be 0, 1 or 2")),
        }
    }
}

/// Squared graph norm `‖A^p f‖² + ‖f‖²`; `None` means plain L².
fn graph_sq(f: &SpectralField, p: Option<OperatorPower>) -> f64 {
    f.norm_sq() + p.map_or(0.0, |p| f.power_norm_sq(p))
}

/// Squared τ-weighted norm `‖M_τ^{1/2} U‖²` in the given phase space,
/// `M_τ = diag(1, 1, τ)`.
pub fn weighted_norm_sq(s: &JmgtState, level: NormLevel, p: &ModelParams) -> f64 {
    use OperatorPower::{Half, One};
    let (pu, pv, pw) = match level {
        NormLevel::H0 => (Some(Half), Some(Half), None),
        NormLevel::H1 => (Some(One), Some(Half), None),
        NormLevel::H2 => (Some(One), Some(One), Some(Half)),
    };
    graph_sq(&s.u, pu) + graph_sq(&s.v, pv) + p.tau * graph_sq(&s.w, pw)
}

/// All energies and weighted norms of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub e0: f64,
    pub e1: f64,
    pub e: f64,
    pub cal_e: f64,
    pub frak_e: f64,
    pub h0tau: f64,
    pub h1tau: f64,
    pub h2tau: f64,
}

impl EnergySample {
    pub fn of(s: &JmgtState, p: &ModelParams) -> Self {
        let e0 = energy_e0(s, p);
        let e1 = energy_e1(s, p);
        let e = e0 + e1;
        let cal_e = e + s.u.power_norm_sq(OperatorPower::One);
        let frak_e = cal_e
            + s.v.power_norm_sq(OperatorPower::One)
            + p.tau * s.w.power_norm_sq(OperatorPower::Half);
        Self {
            t: s.t,
            e0,
            e1,
            e,
            cal_e,
            frak_e,
            h0tau: weighted_norm_sq(s, NormLevel::H0, p),
            h1tau: weighted_norm_sq(s, NormLevel::H1, p),
            h2tau: weighted_norm_sq(s, NormLevel::H2, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn basis(n: usize) -> Arc<SpectralBasis> {
        SpectralBasis::new(1, n, &[PI]).unwrap()
    }

    fn field(b: &Arc<SpectralBasis>, c: &[f64]) -> SpectralField {
        SpectralField::from_coeffs(b, c.to_vec()).unwrap()
    }

    /// Expanded form of E₁:
    /// τ/2‖u_tt‖² + b/2‖A^{1/2}u_t‖² + c⁴/2b‖A^{1/2}u‖² + c²(Au_t,u)
    ///   + τc²/b (u_tt,u_t) + c²/2b‖u_t‖².
    fn e1_expanded(s: &JmgtState, p: &ModelParams) -> f64 {
        let (b, c2, tau) = (p.b_tau(), p.c2(), p.tau);
        let au_t = s.v.apply_power(OperatorPower::One);
        0.5 * tau * s.w.norm_sq()
            + 0.5 * b * s.v.power_norm_sq(OperatorPower::Half)
            + c2 * c2 / (2.0 * b) * s.u.power_norm_sq(OperatorPower::Half)
            + c2 * au_t.inner(&s.u).unwrap()
            + tau * c2 / b * s.w.inner(&s.v).unwrap()
            + c2 / (2.0 * b) * s.v.norm_sq()
    }

    #[test]
    fn derived_parameters() {
        let p = ModelParams::new(0.1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.b_tau(), 1.1);
        assert!((p.gamma_tau() - 1.0 / 1.1).abs() < 1e-15);
        assert!(ModelParams::new(-0.1, 1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.1, 0.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.1, 1.0, 0.0, 0.0).is_err());
        let w = ModelParams::westervelt(2.0, 0.5, 1.0).unwrap();
        assert_eq!(w.b_tau(), 0.5);
        assert_eq!(w.gamma_tau(), 1.0);
    }

    #[test]
    fn g_vanishes_without_nonlinearity() {
        let b = basis(6);
        let tr = Transform::new(&b, 1.5).unwrap();
        let s = JmgtState::new(0.0, field(&b, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.1]), SpectralField::unit(&b, 2), SpectralField::unit(&b, 0)).unwrap();
        let p = ModelParams::new(0.1, 1.0, 1.0, 0.0).unwrap();
        assert!(compute_g(&s, &p, &tr).coeffs().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn g_of_velocity_mode_matches_analytic_projection() {
        // u_t = e₁, u = u_tt = 0, k = 1: G = 2·(2/π) sin²x. Projection on
        // e_m: 2(2/π)√(2/π) ∫ sin²x sin(mx) dx = −(4/π)√(2/π)·4/(m(m²−4)) for odd m.
        let n = 8;
        let b = basis(n);
        let p = ModelParams::new(0.1, 1.0, 1.0, 1.0).unwrap();
        let s = JmgtState::new(0.0, SpectralField::zeros(&b), SpectralField::unit(&b, 0), SpectralField::zeros(&b)).unwrap();
        let exact = |m: usize| -> f64 {
            if m % 2 == 0 {
                return 0.0;
            }
            let mf = m as f64;
            -(4.0 / PI) * (2.0 / PI).sqrt() * 4.0 / (mf * (mf * mf - 4.0))
        };
        let mut prev_err = f64::INFINITY;
        for padding in [1.5, 6.0, 24.0] {
            let g = compute_g(&s, &p, &Transform::new(&b, padding).unwrap());
            for (i, gi) in g.coeffs().iter().enumerate() {
                if (i + 1) % 2 == 0 {
                    assert!(gi.abs() < 1e-14, "even mode {} = {gi}", i + 1);
                } else {
                    assert!(gi.abs() > 1e-4);
                }
            }
            let err = (1..=n).map(|m| (g.coeffs()[m - 1] - exact(m)).abs()).fold(0.0, f64::max);
            // the sine-grid quadrature of sin²x·sin(mx) converges at second order
            assert!(err < prev_err / 10.0 || err < 1e-3, "padding {padding}: {err}");
            prev_err = err;
        }
        assert!(prev_err < 2e-3);
    }

    #[test]
    fn energy_examples() {
        let b = basis(4);
        let p = ModelParams::new(0.1, 1.0, 1.0, 0.0).unwrap();
        let zero = JmgtState::zeros(&b);
        assert_eq!(energy_e0(&zero, &p), 0.0);
        assert_eq!(energy_e1(&zero, &p), 0.0);
        assert_eq!(energy_frak_e(&zero, &p), 0.0);
        for lvl in [NormLevel::H0, NormLevel::H1, NormLevel::H2] {
            assert_eq!(weighted_norm_sq(&zero, lvl, &p), 0.0);
        }

        let mut s = JmgtState::zeros(&b);
        s.u = SpectralField::unit(&b, 0);
        assert!((energy_e0(&s, &p) - 0.5).abs() < 1e-15);
        assert!((energy_e1(&s, &p) - 1.0 / 2.2).abs() < 1e-15);
        assert!((weighted_norm_sq(&s, NormLevel::H0, &p) - 2.0).abs() < 1e-15);

        let mut s2 = JmgtState::zeros(&b);
        s2.v = field(&b, &[0.0, 2.0, 0.0, 0.0]);
        assert!((energy_e0(&s2, &p) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn frak_e_at_tau_zero_drops_acceleration_weight() {
        let b = basis(3);
        let p = ModelParams::westervelt(1.0, 1.0, 0.5).unwrap();
        let s = JmgtState::new(0.0, field(&b, &[0.2, 0.1, 0.0]), field(&b, &[0.0, 0.3, 0.1]), field(&b, &[5.0, 1.0, 2.0])).unwrap();
        let lhs = energy_frak_e(&s, &p);
        let rhs = energy_cal_e(&s, &p) + s.v.power_norm_sq(OperatorPower::One);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn weighted_norm_at_unit_tau_is_unweighted() {
        let b = basis(3);
        let p = ModelParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let s = JmgtState::new(0.0, field(&b, &[1.0, 0.0, 0.0]), field(&b, &[0.0, 1.0, 0.0]), field(&b, &[0.0, 0.0, 1.0])).unwrap();
        // H2: (λ₁²+1) + (λ₂²+1) + (λ₃+1)
        let expected = 2.0 + 17.0 + 10.0;
        assert!((weighted_norm_sq(&s, NormLevel::H2, &p) - expected).abs() < 1e-12);
        assert!(NormLevel::from_index(3).is_err());
    }

    fn arb_state(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        let v = || proptest::collection::vec(-1.0f64..1.0, n);
        (v(), v(), v())
    }

    proptest! {
        #[test]
        fn e1_forms_agree((u, v, w) in arb_state(6), log_tau in -4.0f64..0.0, c in 0.3f64..2.0, delta in 0.1f64..2.0) {
            let b = basis(6);
            let p = ModelParams::new(10f64.powf(log_tau), c, delta, 0.0).unwrap();
            let s = JmgtState::new(0.0, field(&b, &u), field(&b, &v), field(&b, &w)).unwrap();
            let direct = energy_e1(&s, &p);
            let expanded = e1_expanded(&s, &p);
            prop_assert!((direct - expanded).abs() <= 1e-12 * direct.abs().max(1.0), "{} vs {}", direct, expanded);
        }

        #[test]
        fn energies_are_two_homogeneous((u, v, w) in arb_state(5), scale in -3.0f64..3.0) {
            let b = basis(5);
            let p = ModelParams::new(0.05, 1.0, 1.0, 0.0).unwrap();
            let s = JmgtState::new(0.0, field(&b, &u), field(&b, &v), field(&b, &w)).unwrap();
            let a = EnergySample::of(&s, &p);
            let z = EnergySample::of(&s.scaled(scale), &p);
            let s2 = scale * scale;
            for (x, y) in [(a.e0, z.e0), (a.e1, z.e1), (a.cal_e, z.cal_e), (a.frak_e, z.frak_e), (a.h2tau, z.h2tau)] {
                prop_assert!((y - s2 * x).abs() <= 1e-12 * (s2 * x).abs().max(1e-300));
            }
        }

        #[test]
        fn energy_sample_identities((u, v, w) in arb_state(4), tau in 0.0f64..1.0) {
            let b = basis(4);
            let p = ModelParams::new(tau, 1.3, 0.7, 0.0).unwrap();
            let s = JmgtState::new(0.0, field(&b, &u), field(&b, &v), field(&b, &w)).unwrap();
            let e = EnergySample::of(&s, &p);
            prop_assert_eq!(e.e, e.e0 + e.e1);
            let au = s.u.power_norm_sq(OperatorPower::One);
            prop_assert!((e.cal_e - e.e - au).abs() <= 1e-12 * e.cal_e.max(1.0));
            let rest = e.frak_e - e.cal_e - s.v.power_norm_sq(OperatorPower::One) - tau * s.w.power_norm_sq(OperatorPower::Half);
            prop_assert!(rest.abs() <= 1e-12 * e.frak_e.max(1.0));
            prop_assert!((e.cal_e - energy_cal_e(&s, &p)).abs() <= 1e-12 * e.cal_e.max(1.0));
        }

        #[test]
        fn gamma_identity(tau in 0.0f64..2.0, c in 0.1f64..3.0, delta in 0.01f64..3.0) {
            let p = ModelParams::new(tau, c, delta, 0.0).unwrap();
            let lhs = p.gamma_tau() * p.b_tau() + tau * c * c;
            prop_assert!((lhs - p.b_tau()).abs() <= 4.0 * f64::EPSILON * p.b_tau());
            prop_assert!((p.gamma_tau() - delta / p.b_tau()).abs() <= 4.0 * f64::EPSILON);
            prop_assert!(p.gamma_tau() > 0.0 && p.gamma_tau() <= 1.0);
        }

        #[test]
        fn weighted_norms_monotone_in_tau((u, v, w) in arb_state(4), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let b = basis(4);
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            let plo = ModelParams::new(lo, 1.0, 1.0, 0.0).unwrap();
            let phi = ModelParams::new(hi, 1.0, 1.0, 0.0).unwrap();
            let s = JmgtState::new(0.0, field(&b, &u), field(&b, &v), field(&b, &w)).unwrap();
            for lvl in [NormLevel::H0, NormLevel::H1, NormLevel::H2] {
                prop_assert!(weighted_norm_sq(&s, lvl, &plo) <= weighted_norm_sq(&s, lvl, &phi));
            }
        }

        #[test]
        fn g_is_quadratically_homogeneous((u, v, w) in arb_state(6), scale in -2.0f64..2.0) {
            let b = basis(6);
            let tr = Transform::new(&b, 1.5).unwrap();
            let p = ModelParams::new(0.1, 1.0, 1.0, 0.7).unwrap();
            let s = JmgtState::new(0.0, field(&b, &u), field(&b, &v), field(&b, &w)).unwrap();
            let g1 = compute_g(&s, &p, &tr);
            let g2 = compute_g(&s.scaled(scale), &p, &tr);
            for (a, c) in g1.coeffs().iter().zip(g2.coeffs()) {
                prop_assert!((c - scale * scale * a).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }
}
