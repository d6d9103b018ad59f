//! Small dense matrices and the matrix exponential.
//!
//! Only what the per-mode propagators need: products, an LU solve and
//! scaling-and-squaring with a degree-13 Padé approximant.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

// unused once std is linked elsewhere (its inherent f64 methods take over)
#[allow(unused_imports)]
use num_traits::Float;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SmallMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "matrix must be square");
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = self.data[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// `Σ_i c_i M_i` over equally sized matrices.
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let n = terms[0].1.n;
        let mut out = Self::zeros(n);
        for (c, m) in terms {
            for (o, x) in out.data.iter_mut().zip(&m.data) {
                *o += c * x;
            }
        }
        out
    }

    fn add_diagonal(&mut self, s: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += s;
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Square sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, size: usize) -> Self {
        let mut out = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.n {
            for j in 0..b.n {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    /// Solves `self · X = rhs` by LU with partial pivoting. Returns `None`
    /// for a numerically singular matrix.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = rhs.data.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .unwrap();
            if a[pivot * n + col] == 0.0 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    x.swap(col * n + j, pivot * n + j);
                }
            }
            let d = a[col * n + col];
            for i in col + 1..n {
                let f = a[i * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[i * n + j] -= f * a[col * n + j];
                }
                for j in 0..n {
                    x[i * n + j] -= f * x[col * n + j];
                }
            }
        }
        for col in (0..n).rev() {
            let d = a[col * n + col];
            for j in 0..n {
                let mut s = x[col * n + j];
                for k in col + 1..n {
                    s -= a[col * n + k] * x[k * n + j];
                }
                x[col * n + j] = s / d;
            }
        }
        Some(Self { n, data: x })
    }
}

impl Index<(usize, usize)> for SmallMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Diagonal similarity `D⁻¹ A D` with power-of-two entries that evens out
/// row and column norms. Returns the balanced matrix and `D`.
fn balance(a: &SmallMatrix) -> (SmallMatrix, Vec<f64>) {
    let n = a.n;
    let mut m = a.clone();
    let mut d = vec![1.0; n];
    for _ in 0..64 {
        let mut converged = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / 2.0 {
                cc *= 2.0;
                rr /= 2.0;
                f *= 2.0;
            }
            while cc >= rr * 2.0 {
                cc /= 2.0;
                rr *= 2.0;
                f /= 2.0;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    (m, d)
}

/// `exp(A)` by balancing, scaling and squaring with a [13/13] Padé
/// approximant.
pub fn expm(a: &SmallMatrix) -> SmallMatrix {
    let n = a.n;
    let (bal, d) = balance(a);
    let norm = bal.norm_one();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let x = bal.scaled(0.5f64.powi(s));

    let b = &PADE13;
    let x2 = x.matmul(&x);
    let x4 = x2.matmul(&x2);
    let x6 = x4.matmul(&x2);
    let mut u_inner = x6.matmul(&SmallMatrix::combine(&[(b[13], &x6), (b[11], &x4), (b[9], &x2)]));
    let u_rest = SmallMatrix::combine(&[(1.0, &u_inner), (b[7], &x6), (b[5], &x4), (b[3], &x2)]);
    u_inner = u_rest;
    u_inner.add_diagonal(b[1]);
    let u = x.matmul(&u_inner);
    let mut v = x6.matmul(&SmallMatrix::combine(&[(b[12], &x6), (b[10], &x4), (b[8], &x2)]));
    v = SmallMatrix::combine(&[(1.0, &v), (b[6], &x6), (b[4], &x4), (b[2], &x2)]);
    v.add_diagonal(b[0]);

    let p = SmallMatrix::combine(&[(1.0, &v), (1.0, &u)]);
    let q = SmallMatrix::combine(&[(1.0, &v), (-1.0, &u)]);
    let mut r = q.solve(&p).expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = r.matmul(&r);
    }
    // undo the balancing: exp(A) = D exp(D⁻¹ A D) D⁻¹
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] *= d[i] / d[j];
        }
    }
    r
}

/// `exp(h·M)` together with the integrated weights
/// `∫₀ʰ exp(Mσ) dσ = h φ₁(hM)` and `(1/h)∫₀ʰ exp(M(h−σ)) σ dσ = h φ₂(hM)`,
/// read off the exponential of the augmented block matrix
/// `[[hM, I, 0], [0, 0, I], [0, 0, 0]]`.
pub fn exp_with_phi(m: &SmallMatrix, h: f64) -> (SmallMatrix, SmallMatrix, SmallMatrix) {
    let n = m.n;
    let mut aug = SmallMatrix::zeros(3 * n);
    aug.set_block(0, 0, &m.scaled(h));
    for i in 0..n {
        aug[(i, n + i)] = 1.0;
        aug[(n + i, 2 * n + i)] = 1.0;
    }
    let e = expm(&aug);
    let exp = e.block(0, 0, n);
    let phi1 = e.block(0, n, n).scaled(h);
    let phi2 = e.block(0, 2 * n, n).scaled(h);
    (exp, phi1, phi2)
}
