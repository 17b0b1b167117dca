//! Small dense square matrices (dimension at most a handful) and the two
//! factorizations the geometry needs: Cholesky and cyclic Jacobi.

use crate::real::{r, Real};
use std::ops::{Index, IndexMut};

/// Row-major `n x n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub n: usize,
    pub a: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Mat { n, a: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_f64(m: &Mat<f64>) -> Self {
        Mat { n: m.n, a: m.a.iter().map(|&x| r(x)).collect() }
    }

    pub fn to_f64(&self) -> Mat<f64> {
        Mat { n: self.n, a: self.a.iter().map(|x| x.to_f64()).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let v = self[(i, k)];
                for j in 0..n {
                    m.a[i * n + j] += v * o.a[k * n + j];
                }
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        Mat { n: self.n, a: self.a.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Mat { n: self.n, a: self.a.iter().zip(&o.a).map(|(&x, &y)| x + y).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Mat { n: self.n, a: self.a.iter().zip(&o.a).map(|(&x, &y)| x - y).collect() }
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Full contraction `sum_ij A_ij B_ij`.
    pub fn dot(&self, o: &Self) -> T {
        self.a.iter().zip(&o.a).map(|(&x, &y)| x * y).sum()
    }

    pub fn max_abs(&self) -> T {
        self.a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Lower-triangular `L` with `L L^T = self`, or `None` if not positive definite.
    pub fn cholesky(&self) -> Option<Self> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(l)
    }

    /// Inverse of a lower-triangular matrix.
    pub fn lower_inverse(&self) -> Self {
        let n = self.n;
        let mut inv = Self::zeros(n);
        for j in 0..n {
            inv[(j, j)] = T::one() / self[(j, j)];
            for i in j + 1..n {
                let mut s = T::zero();
                for k in j..i {
                    s += self[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = -s / self[(i, i)];
            }
        }
        inv
    }

    /// Inverse of a symmetric positive-definite matrix.
    pub fn spd_inverse(&self) -> Option<Self> {
        let li = self.cholesky()?.lower_inverse();
        Some(li.transpose().matmul(&li))
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues and the orthogonal matrix whose columns are eigenvectors.
    pub fn sym_eigen(&self) -> (Vec<T>, Self) {
        let n = self.n;
        let mut s = self.clone();
        let mut q = Self::identity(n);
        let norm = s.max_abs();
        let tol = r::<T>(T::EPSILON) * norm;
        for _sweep in 0..64 {
            let mut off = T::zero();
            for i in 0..n {
                for j in i + 1..n {
                    off = off.max(s[(i, j)].abs());
                }
            }
            if !(off > tol) {
                break;
            }
            for p in 0..n {
                for qq in p + 1..n {
                    let apq = s[(p, qq)];
                    if apq.abs() <= tol * r(1e-3) {
                        continue;
                    }
                    let theta = (s[(qq, qq)] - s[(p, p)]) / (r::<T>(2.0) * apq);
                    let sign = if theta < T::zero() { -T::one() } else { T::one() };
                    let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let skp = s[(k, p)];
                        let skq = s[(k, qq)];
                        s[(k, p)] = c * skp - sn * skq;
                        s[(k, qq)] = sn * skp + c * skq;
                    }
                    for k in 0..n {
                        let spk = s[(p, k)];
                        let sqk = s[(qq, k)];
                        s[(p, k)] = c * spk - sn * sqk;
                        s[(qq, k)] = sn * spk + c * sqk;
                    }
                    for k in 0..n {
                        let qkp = q[(k, p)];
                        let qkq = q[(k, qq)];
                        q[(k, p)] = c * qkp - sn * qkq;
                        q[(k, qq)] = sn * qkp + c * qkq;
                    }
                }
            }
        }
        ((0..n).map(|i| s[(i, i)]).collect(), q)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.a[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.a[i * self.n + j]
    }
}
