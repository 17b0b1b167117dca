//! Symmetric curvature functions `f(kappa)` on the positive cone, powers
//! `F = (|a|/a) f^a` of them, and their first and second derivatives as
//! functions of the second fundamental form.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::real::{r, Real};
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// User-supplied curvature function. The callbacks work in `f64`, so a
/// double-double evaluation through them is only `f64` accurate.
#[derive(Clone)]
pub struct CustomFunction {
    pub name: String,
    pub eval: ScalarFn,
    /// Gradient, length n.
    pub grad: VectorFn,
    /// Row-major n x n Hessian.
    pub hess: VectorFn,
}

#[derive(Clone)]
pub enum BaseFunction {
    /// `sum kappa_i`
    Mean,
    /// `sqrt(sum kappa_i^2)`
    Norm,
    /// `(sum kappa_i^r)^(1/r)`
    PowerMean(f64),
    /// `n / sum(1/kappa_i)`
    HarmonicMean,
    Custom(CustomFunction),
    /// `1 / f(1/kappa)`
    Dual(Box<BaseFunction>),
}

impl fmt::Debug for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseFunction::Mean => write!(f, "Mean"),
            BaseFunction::Norm => write!(f, "Norm"),
            BaseFunction::PowerMean(p) => write!(f, "PowerMean({p})"),
            BaseFunction::HarmonicMean => write!(f, "HarmonicMean"),
            BaseFunction::Custom(c) => write!(f, "Custom({})", c.name),
            BaseFunction::Dual(b) => write!(f, "Dual({b:?})"),
        }
    }
}

impl BaseFunction {
    fn eval<T: Real>(&self, k: &[T]) -> T {
        match self {
            BaseFunction::Mean => k.iter().copied().sum(),
            BaseFunction::Norm => k.iter().map(|&x| x * x).sum::<T>().sqrt(),
            BaseFunction::PowerMean(p) => k.iter().map(|&x| x.powf(*p)).sum::<T>().powf(1.0 / p),
            BaseFunction::HarmonicMean => {
                r::<T>(k.len() as f64) / k.iter().map(|&x| T::one() / x).sum::<T>()
            }
            BaseFunction::Custom(c) => r((c.eval)(&to_f64(k))),
            BaseFunction::Dual(b) => {
                let y: Vec<T> = k.iter().map(|&x| T::one() / x).collect();
                T::one() / b.eval(&y)
            }
        }
    }

    fn grad<T: Real>(&self, k: &[T]) -> Vec<T> {
        let n = k.len();
        match self {
            BaseFunction::Mean => vec![T::one(); n],
            BaseFunction::Norm => {
                let f = self.eval(k);
                k.iter().map(|&x| x / f).collect()
            }
            BaseFunction::PowerMean(p) => {
                let f = self.eval(k);
                k.iter().map(|&x| (x / f).powf(p - 1.0)).collect()
            }
            BaseFunction::HarmonicMean => {
                let s: T = k.iter().map(|&x| T::one() / x).sum();
                let c = r::<T>(n as f64) / (s * s);
                k.iter().map(|&x| c / (x * x)).collect()
            }
            BaseFunction::Custom(c) => (c.grad)(&to_f64(k)).into_iter().map(r).collect(),
            BaseFunction::Dual(b) => {
                let y: Vec<T> = k.iter().map(|&x| T::one() / x).collect();
                let f = b.eval(&y);
                let g = b.grad(&y);
                (0..n).map(|i| g[i] * y[i] * y[i] / (f * f)).collect()
            }
        }
    }

    fn hess<T: Real>(&self, k: &[T]) -> Mat<T> {
        let n = k.len();
        match self {
            BaseFunction::Mean => Mat::zeros(n),
            BaseFunction::Norm => {
                let f = self.eval(k);
                Mat::from_fn(n, |i, j| {
                    let d = if i == j { T::one() } else { T::zero() };
                    (d - k[i] * k[j] / (f * f)) / f
                })
            }
            BaseFunction::PowerMean(p) => {
                let p = *p;
                let f = self.eval(k);
                let c = r::<T>(p - 1.0);
                Mat::from_fn(n, |i, j| {
                    let mut v = -(k[i] * k[j]).powf(p - 1.0) * f.powf(1.0 - 2.0 * p);
                    if i == j {
                        v += k[i].powf(p - 2.0) * f.powf(1.0 - p);
                    }
                    c * v
                })
            }
            BaseFunction::HarmonicMean => {
                let s: T = k.iter().map(|&x| T::one() / x).sum();
                let nn = r::<T>(n as f64);
                let two = r::<T>(2.0);
                Mat::from_fn(n, |i, j| {
                    let ki2 = k[i] * k[i];
                    let kj2 = k[j] * k[j];
                    let mut v = two * nn / (s * s * s * ki2 * kj2);
                    if i == j {
                        v -= two * nn / (s * s * ki2 * k[i]);
                    }
                    v
                })
            }
            BaseFunction::Custom(c) => {
                let h = (c.hess)(&to_f64(k));
                Mat { n, a: h.into_iter().map(r).collect() }
            }
            BaseFunction::Dual(b) => {
                let y: Vec<T> = k.iter().map(|&x| T::one() / x).collect();
                let f = b.eval(&y);
                let g = b.grad(&y);
                let hh = b.hess(&y);
                let two = r::<T>(2.0);
                let f2 = f * f;
                Mat::from_fn(n, |i, j| {
                    let yy = y[i] * y[i] * y[j] * y[j];
                    let mut v = -hh[(i, j)] * yy / f2 + two * g[i] * g[j] * yy / (f2 * f);
                    if i == j {
                        v -= two * g[i] * y[i] * y[i] * y[i] / f2;
                    }
                    v
                })
            }
        }
    }
}

fn to_f64<T: Real>(k: &[T]) -> Vec<f64> {
    k.iter().map(|x| x.to_f64()).collect()
}

fn check_positive<T: Real>(k: &[T]) -> Result<()> {
    for (index, &x) in k.iter().enumerate() {
        if !(x > T::zero()) {
            return Err(Error::NonPositiveCurvature { index, kappa: x.to_f64() });
        }
    }
    Ok(())
}

/// A symmetric, 1-homogeneous, monotone function of the principal curvatures
/// together with the structural flags the Harnack estimates depend on.
#[derive(Clone, Debug)]
pub struct CurvatureFunction {
    pub base: BaseFunction,
    pub convex: bool,
    pub concave: bool,
    pub inverse_concave: bool,
}

impl CurvatureFunction {
    pub fn mean() -> Self {
        Self { base: BaseFunction::Mean, convex: true, concave: true, inverse_concave: true }
    }

    pub fn norm() -> Self {
        Self { base: BaseFunction::Norm, convex: true, concave: false, inverse_concave: true }
    }

    /// Power mean with exponent `p != 0`. Convex for `p >= 1`, concave for
    /// `p <= 1`, inverse-concave for `p >= -1`.
    pub fn power_mean(p: f64) -> Result<Self> {
        if p == 0.0 || !p.is_finite() {
            return Err(Error::InvalidConfig(format!("power-mean exponent must be finite and non-zero, got {p}")));
        }
        Ok(Self { base: BaseFunction::PowerMean(p), convex: p >= 1.0, concave: p <= 1.0, inverse_concave: p >= -1.0 })
    }

    pub fn harmonic_mean() -> Self {
        Self { base: BaseFunction::HarmonicMean, convex: false, concave: true, inverse_concave: true }
    }

    /// Custom function; the caller asserts the flags.
    pub fn custom(c: CustomFunction, convex: bool, concave: bool, inverse_concave: bool) -> Self {
        Self { base: BaseFunction::Custom(c), convex, concave, inverse_concave }
    }

    /// Looks up a built-in by name: `mean`, `norm`, `harmonic-mean`, `power-mean`.
    pub fn by_name(name: &str, power: Option<f64>) -> Result<Self> {
        match name {
            "mean" => Ok(Self::mean()),
            "norm" => Ok(Self::norm()),
            "harmonic-mean" => Ok(Self::harmonic_mean()),
            "power-mean" => Self::power_mean(power.unwrap_or(3.0)),
            other => Err(Error::InvalidConfig(format!("unknown curvature function `{other}`"))),
        }
    }

    pub fn name(&self) -> String {
        match &self.base {
            BaseFunction::Mean => "mean".into(),
            BaseFunction::Norm => "norm".into(),
            BaseFunction::PowerMean(p) => format!("power-mean({p})"),
            BaseFunction::HarmonicMean => "harmonic-mean".into(),
            BaseFunction::Custom(c) => c.name.clone(),
            BaseFunction::Dual(b) => format!("dual({b:?})"),
        }
    }

    pub fn is_mean(&self) -> bool {
        matches!(self.base, BaseFunction::Mean)
    }

    pub fn eval<T: Real>(&self, k: &[T]) -> Result<T> {
        check_positive(k)?;
        Ok(self.base.eval(k))
    }

    pub fn grad<T: Real>(&self, k: &[T]) -> Result<Vec<T>> {
        check_positive(k)?;
        Ok(self.base.grad(k))
    }

    pub fn hess<T: Real>(&self, k: &[T]) -> Result<Mat<T>> {
        check_positive(k)?;
        Ok(self.base.hess(k))
    }

    /// `f(1, ..., 1)` in dimension `n`.
    pub fn umbilic_value(&self, n: usize) -> f64 {
        self.base.eval(&vec![1.0f64; n])
    }

    /// The dual function `1 / f(1/kappa)`. Taking the dual twice returns the
    /// original function.
    pub fn dual(&self) -> Self {
        let base = match &self.base {
            BaseFunction::Dual(b) => (**b).clone(),
            b => BaseFunction::Dual(Box::new(b.clone())),
        };
        match power_mean_exponent(&base) {
            Some(p) => Self { base, convex: p >= 1.0, concave: p <= 1.0, inverse_concave: p >= -1.0 },
            // duality swaps concavity and inverse-concavity; convexity of the dual is not implied
            None => Self { base, convex: false, concave: self.inverse_concave, inverse_concave: self.concave },
        }
    }
}

/// Exponent of the power mean a built-in is proportional to.
fn power_mean_exponent(b: &BaseFunction) -> Option<f64> {
    match b {
        BaseFunction::Mean => Some(1.0),
        BaseFunction::Norm => Some(2.0),
        BaseFunction::PowerMean(p) => Some(*p),
        BaseFunction::HarmonicMean => Some(-1.0),
        BaseFunction::Custom(_) => None,
        BaseFunction::Dual(b) => power_mean_exponent(b).map(|p| -p),
    }
}

/// `dual_f(f)`
pub fn dual_f(f: &CurvatureFunction) -> CurvatureFunction {
    f.dual()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowMode {
    Contracting,
    Expanding,
}

/// `F = (|a|/a) f^a`. Contracting flows use `a = p > 0`; expanding flows use
/// `a = -beta`, so `F = -f^(-beta)`.
#[derive(Clone, Debug)]
pub struct SpeedFunction {
    pub f: CurvatureFunction,
    pub exponent: f64,
}

impl SpeedFunction {
    pub fn contracting(f: CurvatureFunction, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidConfig(format!("speed.exponent must lie in (0, 1], got {p}")));
        }
        Ok(Self { f, exponent: p })
    }

    pub fn expanding(f: CurvatureFunction, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidConfig(format!("speed.exponent must lie in (0, 1) for expanding flows, got {beta}")));
        }
        Ok(Self { f, exponent: -beta })
    }

    pub fn mode(&self) -> FlowMode {
        if self.exponent > 0.0 {
            FlowMode::Contracting
        } else {
            FlowMode::Expanding
        }
    }

    pub fn sign(&self) -> f64 {
        self.exponent.signum()
    }

    /// Magnitude of the exponent (`p` or `beta`).
    pub fn power(&self) -> f64 {
        self.exponent.abs()
    }

    /// `F` as a function of the scalar value of `f`.
    pub fn of_f<T: Real>(&self, f: T) -> T {
        r::<T>(self.sign()) * f.powf(self.exponent)
    }

    pub fn eval<T: Real>(&self, k: &[T]) -> Result<T> {
        Ok(self.of_f(self.f.eval(k)?))
    }

    pub fn grad<T: Real>(&self, k: &[T]) -> Result<Vec<T>> {
        let f = self.f.eval(k)?;
        let c = r::<T>(self.power()) * f.powf(self.exponent - 1.0);
        Ok(self.f.grad(k)?.into_iter().map(|g| c * g).collect())
    }

    pub fn hess<T: Real>(&self, k: &[T]) -> Result<Mat<T>> {
        let a = self.exponent;
        let f = self.f.eval(k)?;
        let g = self.f.grad(k)?;
        let h = self.f.hess(k)?;
        let s = r::<T>(self.power());
        let c1 = r::<T>(a - 1.0) * f.powf(a - 2.0);
        let c2 = f.powf(a - 1.0);
        Ok(Mat::from_fn(k.len(), |i, j| s * (c1 * g[i] * g[j] + c2 * h[(i, j)])))
    }
}

/// Relative eigenvalue gap below which the divided difference is replaced by
/// its coincident limit.
pub const COLLISION_REL_GAP: f64 = 1e-8;

/// Eigen-data of `(g, h)` together with the derivatives of `F` in the
/// eigenframe. All matrix-level derivatives are assembled from this.
#[derive(Clone, Debug)]
pub struct SpectralJet<T> {
    pub kappa: Vec<T>,
    /// Columns are `g`-orthonormal eigenvectors: `V^T g V = I`, `V^T h V = diag(kappa)`.
    pub frame: Mat<T>,
    pub value: T,
    pub d1: Vec<T>,
    pub d2: Mat<T>,
    /// Off-diagonal divided differences `(F_a - F_b)/(kappa_a - kappa_b)`.
    pub divided: Mat<T>,
}

impl<T: Real> SpectralJet<T> {
    pub fn new(speed: &SpeedFunction, g: &Mat<T>, h: &Mat<T>) -> Result<Self> {
        let (kappa, frame) = principal_frame(g, h)?;
        Self::from_frame(speed, kappa, frame)
    }

    pub fn from_frame(speed: &SpeedFunction, kappa: Vec<T>, frame: Mat<T>) -> Result<Self> {
        let n = kappa.len();
        let value = speed.eval(&kappa)?;
        let d1 = speed.grad(&kappa)?;
        let d2 = speed.hess(&kappa)?;
        let kmax = kappa.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let tol = r::<T>(COLLISION_REL_GAP) * kmax;
        let divided = Mat::from_fn(n, |a, b| {
            if a == b {
                return T::zero();
            }
            let gap = kappa[a] - kappa[b];
            if gap.abs() < tol {
                d2[(a, a)] - d2[(a, b)]
            } else {
                (d1[a] - d1[b]) / gap
            }
        });
        Ok(Self { kappa, frame, value, d1, d2, divided })
    }

    pub fn dim(&self) -> usize {
        self.kappa.len()
    }

    /// `V^T eta V`
    pub fn hat(&self, eta: &Mat<T>) -> Mat<T> {
        self.frame.transpose().matmul(eta).matmul(&self.frame)
    }

    /// `F^{ij}` as a contravariant matrix.
    pub fn dot_f(&self) -> Mat<T> {
        let n = self.dim();
        let v = &self.frame;
        Mat::from_fn(n, |i, j| (0..n).map(|a| self.d1[a] * v[(i, a)] * v[(j, a)]).sum())
    }

    /// `g_ij F^{ij}`
    pub fn trace(&self) -> T {
        self.d1.iter().copied().sum()
    }

    /// `F^{ij,kl} eta_ij xi_kl` for covariant symmetric `eta`, `xi`.
    pub fn second(&self, eta: &Mat<T>, xi: &Mat<T>) -> T {
        let e = self.hat(eta);
        let x = self.hat(xi);
        self.second_hat(&e, &x)
    }

    /// Same as [`second`](Self::second) with both arguments already in the eigenframe.
    pub fn second_hat(&self, e: &Mat<T>, x: &Mat<T>) -> T {
        let n = self.dim();
        let mut s = T::zero();
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                s += self.d2[(a, b)] * e[(a, a)] * x[(b, b)] + self.divided[(a, b)] * e[(a, b)] * x[(a, b)];
            }
            s += self.d2[(a, a)] * e[(a, a)] * x[(a, a)];
        }
        s
    }
}

/// Principal curvatures and a `g`-orthonormal eigenframe of `h` relative to `g`.
pub fn principal_frame<T: Real>(g: &Mat<T>, h: &Mat<T>) -> Result<(Vec<T>, Mat<T>)> {
    let l = g
        .cholesky()
        .ok_or_else(|| Error::StabilityViolation("metric is not positive definite".into()))?;
    let li = l.lower_inverse();
    let s = li.matmul(h).matmul(&li.transpose());
    let s = Mat::from_fn(s.n, |i, j| (s[(i, j)] + s[(j, i)]) * r(0.5));
    let (kappa, q) = s.sym_eigen();
    Ok((kappa, li.transpose().matmul(&q)))
}

/// `F^{ij}` at `(g, h)`.
#[allow(non_snake_case)]
pub fn dF_matrix<T: Real>(speed: &SpeedFunction, g: &Mat<T>, h: &Mat<T>) -> Result<Mat<T>> {
    Ok(SpectralJet::new(speed, g, h)?.dot_f())
}

/// `F^{ij,kl} eta_ij xi_kl` at `(g, h)`.
#[allow(non_snake_case)]
pub fn d2F<T: Real>(speed: &SpeedFunction, g: &Mat<T>, h: &Mat<T>, eta: &Mat<T>, xi: &Mat<T>) -> Result<T> {
    Ok(SpectralJet::new(speed, g, h)?.second(eta, xi))
}

/// `g_ij F^{ij}` at `(g, h)`.
#[allow(non_snake_case)]
pub fn trace_dF<T: Real>(speed: &SpeedFunction, g: &Mat<T>, h: &Mat<T>) -> Result<T> {
    Ok(SpectralJet::new(speed, g, h)?.trace())
}
