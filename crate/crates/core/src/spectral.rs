//! Dirichlet-Laplacian eigenbasis on 1D/2D rectangles.
//!
//! Basis functions are the L²-orthonormal sines
//! `e_m(x) = Π_i √(2/L_i) sin(m_i π x_i / L_i)` with eigenvalues
//! `λ_m = Σ_i (π m_i / L_i)²`. Modes are ordered row-major over
//! `(m_1, m_2)`, each wavenumber running over `1..=N`, so in 2D the flat
//! index of `(m_1, m_2)` is `(m_1 − 1)·N + (m_2 − 1)`.
//!
//! Physical samples live on the interior collocation grid
//! `x_j = j·L/(M+1)`, `j = 1..=M` per axis, stored row-major over `(j_1, j_2)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

// unused once std is linked elsewhere (its inherent f64 methods take over)
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    dim: usize,
    modes_per_axis: usize,
    lengths: Vec<f64>,
    eigenvalues: Vec<f64>,
    sqrt_eigenvalues: Vec<f64>,
}

impl SpectralBasis {
    /// Builds the basis for `dim ∈ {1, 2}`, `n` modes per axis and one
    /// length per axis.
    pub fn new(dim: usize, n: usize, lengths: &[f64]) -> Result<Arc<Self>> {
        if dim != 1 && dim != 2 {
            return Err(Error::config("basis dimension must be 1 or 2"));
        }
        if n == 0 {
            return Err(Error::config("modes per axis must be positive"));
        }
        if lengths.len() != dim {
            return Err(Error::config("need exactly one domain length per axis"));
        }
        if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::config("domain lengths must be positive and finite"));
        }
        let axis_eig = |axis: usize, m: usize| {
            let k = PI * m as f64 / lengths[axis];
            k * k
        };
        let eigenvalues: Vec<f64> = match dim {
            1 => (1..=n).map(|m| axis_eig(0, m)).collect(),
            _ => (1..=n)
                .flat_map(|m1| (1..=n).map(move |m2| (m1, m2)))
                .map(|(m1, m2)| axis_eig(0, m1) + axis_eig(1, m2))
                .collect(),
        };
        let sqrt_eigenvalues = eigenvalues.iter().map(|l| l.sqrt()).collect();
        Ok(Arc::new(Self {
            dim,
            modes_per_axis: n,
            lengths: lengths.to_vec(),
            eigenvalues,
            sqrt_eigenvalues,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes_per_axis(&self) -> usize {
        self.modes_per_axis
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Total number of modes, `N^dim`.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }

    /// Flat index of the (1-based) wavenumbers `m`.
    pub fn mode_index(&self, m: &[usize]) -> Option<usize> {
        let n = self.modes_per_axis;
        if m.len() != self.dim || m.iter().any(|&mi| mi == 0 || mi > n) {
            return None;
        }
        Some(m.iter().fold(0, |acc, &mi| acc * n + (mi - 1)))
    }

    /// 1-based wavenumbers of flat mode `index`; unused axes are 0.
    pub fn wavenumbers(&self, index: usize) -> [usize; 2] {
        let n = self.modes_per_axis;
        match self.dim {
            1 => [index + 1, 0],
            _ => [index / n + 1, index % n + 1],
        }
    }

    /// Evaluates basis function `index` at the point `x` (one coordinate per axis).
    pub fn eval_mode(&self, index: usize, x: &[f64]) -> f64 {
        let m = self.wavenumbers(index);
        (0..self.dim)
            .map(|axis| {
                let l = self.lengths[axis];
                (2.0 / l).sqrt() * (m[axis] as f64 * PI * x[axis] / l).sin()
            })
            .product()
    }

    fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// Exponent of the Dirichlet Laplacian applied in coefficient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorPower {
    Half,
    One,
}

/// Real coefficient vector in a [`SpectralBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    basis: Arc<SpectralBasis>,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(basis: &Arc<SpectralBasis>) -> Self {
        Self { basis: basis.clone(), coeffs: vec![0.0; basis.len()] }
    }

    pub fn from_coeffs(basis: &Arc<SpectralBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { basis: basis.clone(), coeffs })
    }

    /// Unit coefficient on flat mode `index`.
    pub fn unit(basis: &Arc<SpectralBasis>, index: usize) -> Self {
        let mut f = Self::zeros(basis);
        f.coeffs[index] = 1.0;
        f
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Index of the first non-finite coefficient, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_finite())
    }

    pub fn shares_basis(&self, other: &Self) -> bool {
        self.basis.same_as(&other.basis)
    }

    /// `A^p f`, i.e. `coeffs_m ← λ_m^p · coeffs_m`.
    pub fn apply_power(&self, p: OperatorPower) -> Self {
        let weights = match p {
            OperatorPower::Half => &self.basis.sqrt_eigenvalues,
            OperatorPower::One => &self.basis.eigenvalues,
        };
        let coeffs = self.coeffs.iter().zip(weights).map(|(c, w)| c * w).collect();
        Self { basis: self.basis.clone(), coeffs }
    }

    /// `‖A^p f‖²` without materializing `A^p f`.
    pub fn power_norm_sq(&self, p: OperatorPower) -> f64 {
        match p {
            OperatorPower::Half => {
                self.coeffs.iter().zip(&self.basis.eigenvalues).map(|(c, l)| l * c * c).sum()
            }
            OperatorPower::One => self
                .coeffs
                .iter()
                .zip(&self.basis.eigenvalues)
                .map(|(c, l)| {
                    let a = l * c;
                    a * a
                })
                .sum(),
        }
    }

    /// L² inner product (Parseval: plain dot product of coefficients).
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if !self.shares_basis(other) {
            return Err(Error::BasisMismatch);
        }
        Ok(dot(&self.coeffs, &other.coeffs))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.coeffs, &self.coeffs)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|c| s * c).collect() }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        debug_assert!(self.shares_basis(other));
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect();
        Self { basis: self.basis.clone(), coeffs }
    }

    /// Synthesizes samples on a grid with `round(padding·N)` points per axis.
    pub fn to_physical(&self, padding: f64) -> Result<PhysicalField> {
        Ok(Transform::new(&self.basis, padding)?.to_physical(self))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.add_scaled(-1.0, rhs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Samples on the interior collocation grid of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    basis: Arc<SpectralBasis>,
    grid: usize,
    samples: Vec<f64>,
}

impl PhysicalField {
    pub fn from_samples(basis: &Arc<SpectralBasis>, grid: usize, samples: Vec<f64>) -> Result<Self> {
        if grid == 0 || samples.len() != grid.pow(basis.dim() as u32) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { basis: basis.clone(), grid, samples })
    }

    /// Samples `f` at the grid points of `basis` with `grid` points per axis.
    pub fn from_fn(basis: &Arc<SpectralBasis>, grid: usize, f: impl Fn(&[f64]) -> f64) -> Self {
        let pts = grid_points(basis, grid);
        let samples = match basis.dim() {
            1 => pts[0].iter().map(|&x| f(&[x])).collect(),
            _ => pts[0]
                .iter()
                .flat_map(|&x| pts[1].iter().map(move |&y| (x, y)))
                .map(|(x, y)| f(&[x, y]))
                .collect(),
        };
        Self { basis: basis.clone(), grid, samples }
    }

    pub fn constant(basis: &Arc<SpectralBasis>, grid: usize, value: f64) -> Self {
        let len = grid.pow(basis.dim() as u32);
        Self { basis: basis.clone(), grid, samples: vec![value; len] }
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.is_finite())
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.basis.dim() == other.basis.dim()
            && self.basis.lengths() == other.basis.lengths()
    }

    /// Nodal product `a·b`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect();
        Ok(Self { basis: self.basis.clone(), grid: self.grid, samples })
    }

    /// Projects onto `target` (which must share the domain and have
    /// `N ≤ grid`); modes above the target's `N` are discarded.
    pub fn to_spectral(&self, target: &Arc<SpectralBasis>) -> Result<SpectralField> {
        if target.dim() != self.basis.dim() || target.lengths() != self.basis.lengths() {
            return Err(Error::BasisMismatch);
        }
        let tr = Transform::with_grid(target, self.grid)?;
        tr.to_spectral(self)
    }

    /// Grid quadrature of `∫ f` using the sine-orthogonality weights.
    pub fn integrate(&self) -> f64 {
        let w: f64 = self.basis.lengths().iter().map(|l| l / (self.grid + 1) as f64).product();
        w * self.samples.iter().sum::<f64>()
    }
}

/// Grid coordinates per axis, `x_j = j·L/(M+1)`.
pub fn grid_points(basis: &SpectralBasis, grid: usize) -> Vec<Vec<f64>> {
    basis
        .lengths()
        .iter()
        .map(|&l| (1..=grid).map(|j| j as f64 * l / (grid + 1) as f64).collect())
        .collect()
}

/// Precomputed dense synthesis/analysis matrices between a basis and a
/// collocation grid.
#[derive(Debug, Clone)]
pub struct Transform {
    basis: Arc<SpectralBasis>,
    grid: usize,
    /// Per axis, `grid × N` row-major samples of the 1D orthonormal sines.
    synth: Vec<Vec<f64>>,
    /// Per axis quadrature weight `L/(M+1)`.
    weights: Vec<f64>,
}

impl Transform {
    /// Grid with `round(padding·N)` points per axis; `padding ≥ 1`.
    pub fn new(basis: &Arc<SpectralBasis>, padding: f64) -> Result<Self> {
        if !(padding >= 1.0) || !padding.is_finite() {
            return Err(Error::config("padding must be a finite number ≥ 1"));
        }
        let grid = (padding * basis.modes_per_axis() as f64).round() as usize;
        Self::with_grid(basis, grid.max(basis.modes_per_axis()))
    }

    pub fn with_grid(basis: &Arc<SpectralBasis>, grid: usize) -> Result<Self> {
        let n = basis.modes_per_axis();
        if grid < n {
            return Err(Error::config("grid must resolve every basis mode (M ≥ N)"));
        }
        let synth = basis
            .lengths()
            .iter()
            .map(|&l| {
                let scale = (2.0 / l).sqrt();
                let mut s = Vec::with_capacity(grid * n);
                for j in 1..=grid {
                    for m in 1..=n {
                        // reduce the phase mod 2(M+1) before scaling by π
                        let phase = ((j * m) % (2 * (grid + 1))) as f64 / (grid + 1) as f64;
                        s.push(scale * (PI * phase).sin());
                    }
                }
                s
            })
            .collect();
        let weights = basis.lengths().iter().map(|l| l / (grid + 1) as f64).collect();
        Ok(Self { basis: basis.clone(), grid, synth, weights })
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn to_physical(&self, f: &SpectralField) -> PhysicalField {
        debug_assert_eq!(f.coeffs.len(), self.basis.len());
        let n = self.basis.modes_per_axis();
        let m = self.grid;
        let samples = match self.basis.dim() {
            1 => {
                let s = &self.synth[0];
                (0..m).map(|j| dot(&s[j * n..(j + 1) * n], &f.coeffs)).collect()
            }
            _ => {
                // tmp[m1][j2] = Σ_m2 c[m1][m2] S2[j2][m2]
                let (s1, s2) = (&self.synth[0], &self.synth[1]);
                let mut tmp = vec![0.0; n * m];
                for m1 in 0..n {
                    let row = &f.coeffs[m1 * n..(m1 + 1) * n];
                    for j2 in 0..m {
                        tmp[m1 * m + j2] = dot(row, &s2[j2 * n..(j2 + 1) * n]);
                    }
                }
                let mut out = vec![0.0; m * m];
                for j1 in 0..m {
                    for m1 in 0..n {
                        let a = s1[j1 * n + m1];
                        if a == 0.0 {
                            continue;
                        }
                        let src = &tmp[m1 * m..(m1 + 1) * m];
                        for (o, t) in out[j1 * m..(j1 + 1) * m].iter_mut().zip(src) {
                            *o += a * t;
                        }
                    }
                }
                out
            }
        };
        PhysicalField { basis: self.basis.clone(), grid: m, samples }
    }

    pub fn to_spectral(&self, g: &PhysicalField) -> Result<SpectralField> {
        if g.grid != self.grid
            || g.basis.dim() != self.basis.dim()
            || g.basis.lengths() != self.basis.lengths()
        {
            return Err(Error::GridMismatch);
        }
        let n = self.basis.modes_per_axis();
        let m = self.grid;
        let coeffs = match self.basis.dim() {
            1 => {
                let s = &self.synth[0];
                let w = self.weights[0];
                let mut c = vec![0.0; n];
                for (j, gj) in g.samples.iter().enumerate() {
                    for (ck, sk) in c.iter_mut().zip(&s[j * n..(j + 1) * n]) {
                        *ck += gj * sk;
                    }
                }
                c.iter_mut().for_each(|x| *x *= w);
                c
            }
            _ => {
                let (s1, s2) = (&self.synth[0], &self.synth[1]);
                let w = self.weights[0] * self.weights[1];
                // tmp[m1][j2] = Σ_j1 S1[j1][m1] g[j1][j2]
                let mut tmp = vec![0.0; n * m];
                for j1 in 0..m {
                    let row = &g.samples[j1 * m..(j1 + 1) * m];
                    for m1 in 0..n {
                        let a = s1[j1 * n + m1];
                        if a == 0.0 {
                            continue;
                        }
                        for (t, r) in tmp[m1 * m..(m1 + 1) * m].iter_mut().zip(row) {
                            *t += a * r;
                        }
                    }
                }
                let mut c = vec![0.0; n * n];
                for m1 in 0..n {
                    let trow = &tmp[m1 * m..(m1 + 1) * m];
                    for m2 in 0..n {
                        let acc: f64 = trow.iter().enumerate().map(|(j2, t)| t * s2[j2 * n + m2]).sum();
                        c[m1 * n + m2] = w * acc;
                    }
                }
                c
            }
        };
        Ok(SpectralField { basis: self.basis.clone(), coeffs })
    }

    /// Pseudo-spectral product `P_N(a·b)` of two fields.
    pub fn product(&self, a: &SpectralField, b: &SpectralField) -> SpectralField {
        let pa = self.to_physical(a);
        let pb = self.to_physical(b);
        let prod = PhysicalField {
            basis: self.basis.clone(),
            grid: self.grid,
            samples: pa.samples.iter().zip(&pb.samples).map(|(x, y)| x * y).collect(),
        };
        self.to_spectral(&prod).expect("same grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eigenvalues_1d_unit_interval() {
        let b = SpectralBasis::new(1, 4, &[PI]).unwrap();
        for (l, e) in b.eigenvalues().iter().zip([1.0, 4.0, 9.0, 16.0]) {
            assert!(close(*l, e, 1e-12), "{l} vs {e}");
        }
    }

    #[test]
    fn eigenvalue_2d_single_mode() {
        let b = SpectralBasis::new(2, 1, &[PI, PI]).unwrap();
        assert_eq!(b.len(), 1);
        assert!(close(b.eigenvalues()[0], 2.0, 1e-12));
    }

    #[test]
    fn eigenvalues_length_two() {
        let b = SpectralBasis::new(1, 3, &[2.0]).unwrap();
        let expected = [(PI / 2.0).powi(2), PI * PI, (1.5 * PI).powi(2)];
        for (l, e) in b.eigenvalues().iter().zip(expected) {
            assert!(close(*l, e, 1e-12));
        }
    }

    #[test]
    fn invalid_basis_rejected() {
        assert!(SpectralBasis::new(3, 4, &[1.0, 1.0, 1.0]).is_err());
        assert!(SpectralBasis::new(1, 0, &[1.0]).is_err());
        assert!(SpectralBasis::new(1, 4, &[0.0]).is_err());
        assert!(SpectralBasis::new(2, 4, &[1.0, -1.0]).is_err());
        assert!(SpectralBasis::new(2, 4, &[1.0]).is_err());
    }

    #[test]
    fn mode_ordering_is_row_major() {
        let b = SpectralBasis::new(2, 3, &[1.0, 2.0]).unwrap();
        assert_eq!(b.mode_index(&[1, 1]), Some(0));
        assert_eq!(b.mode_index(&[1, 3]), Some(2));
        assert_eq!(b.mode_index(&[2, 1]), Some(3));
        assert_eq!(b.wavenumbers(5), [2, 3]);
        assert_eq!(b.mode_index(&[0, 1]), None);
        let l = b.eigenvalues()[b.mode_index(&[2, 3]).unwrap()];
        assert!(close(l, (2.0 * PI).powi(2) + (1.5 * PI).powi(2), 1e-12));
    }

    #[test]
    fn power_of_a_on_unit_mode() {
        let b = SpectralBasis::new(1, 4, &[PI]).unwrap();
        let f = SpectralField::unit(&b, 1);
        assert!(close(f.apply_power(OperatorPower::One).coeffs()[1], 4.0, 1e-12));
        let z = SpectralField::zeros(&b);
        assert_eq!(z.apply_power(OperatorPower::Half), z);
    }

    #[test]
    fn synthesis_of_first_mode() {
        let b = SpectralBasis::new(1, 3, &[PI]).unwrap();
        let tr = Transform::with_grid(&b, 3).unwrap();
        let p = tr.to_physical(&SpectralField::unit(&b, 0));
        let s = (2.0 / PI).sqrt();
        let expected = [(PI / 4.0).sin() * s, FRAC_PI_2.sin() * s, (3.0 * PI / 4.0).sin() * s];
        for (a, e) in p.samples().iter().zip(expected) {
            assert!(close(*a, e, 1e-15));
        }
        let z = tr.to_physical(&SpectralField::zeros(&b));
        assert!(z.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn analysis_of_sampled_sine() {
        let b = SpectralBasis::new(1, 6, &[PI]).unwrap();
        let tr = Transform::new(&b, 1.5).unwrap();
        let g = PhysicalField::from_fn(&b, tr.grid(), |x| (2.0 * x[0]).sin() / FRAC_PI_2.sqrt());
        let c = tr.to_spectral(&g).unwrap();
        for (i, ci) in c.coeffs().iter().enumerate() {
            let e = if i == 1 { 1.0 } else { 0.0 };
            assert!(close(*ci, e, 1e-13), "mode {i}: {ci}");
        }
        let zero = PhysicalField::constant(&b, tr.grid(), 0.0);
        assert!(tr.to_spectral(&zero).unwrap().coeffs().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn multiply_by_ones_is_identity() {
        let b = SpectralBasis::new(1, 5, &[PI]).unwrap();
        let a = PhysicalField::from_fn(&b, 8, |x| x[0].sin());
        let ones = PhysicalField::constant(&b, 8, 1.0);
        assert_eq!(a.multiply(&ones).unwrap(), a);
        let sq = a.multiply(&a).unwrap();
        for (s, x) in sq.samples().iter().zip(&grid_points(&b, 8)[0]) {
            assert!(close(*s, x.sin().powi(2), 1e-15));
        }
        let other = PhysicalField::constant(&b, 9, 1.0);
        assert_eq!(a.multiply(&other), Err(Error::GridMismatch));
    }

    #[test]
    fn inner_products_of_unit_modes() {
        let b = SpectralBasis::new(1, 4, &[PI]).unwrap();
        let e1 = SpectralField::unit(&b, 0);
        let e2 = SpectralField::unit(&b, 1);
        assert_eq!(e1.inner(&e1).unwrap(), 1.0);
        assert_eq!(e1.inner(&e2).unwrap(), 0.0);
        let other = SpectralBasis::new(1, 5, &[PI]).unwrap();
        assert_eq!(e1.inner(&SpectralField::unit(&other, 0)), Err(Error::BasisMismatch));
    }

    #[test]
    fn transform_rejects_bad_padding() {
        let b = SpectralBasis::new(1, 4, &[PI]).unwrap();
        assert!(Transform::new(&b, 0.5).is_err());
        assert!(Transform::with_grid(&b, 3).is_err());
    }

    #[test]
    fn projection_onto_smaller_basis() {
        let fine = SpectralBasis::new(1, 8, &[PI]).unwrap();
        let coarse = SpectralBasis::new(1, 3, &[PI]).unwrap();
        let mut f = SpectralField::zeros(&fine);
        f.coeffs_mut()[0] = 1.0;
        f.coeffs_mut()[2] = -0.5;
        f.coeffs_mut()[6] = 2.0;
        let p = f.to_physical(1.0).unwrap();
        let c = p.to_spectral(&coarse).unwrap();
        assert!(close(c.coeffs()[0], 1.0, 1e-13));
        assert!(close(c.coeffs()[1], 0.0, 1e-13));
        assert!(close(c.coeffs()[2], -0.5, 1e-13));
    }
}
