//! Harnack quantities along the flow.
//!
//! All quantities are reported divided by the time weight, i.e. as
//! `Q = chi / t`, so that positivity of `Q` is the differential inequality.
//! Every report carries the split
//! `Q = dt_speed - theta - correction + offset + zeta_term`.

use crate::error::{Error, Result};
use crate::flow::{default_delta, Trajectory};
use crate::geometry::{AmbientSpace, SurfaceState};
use crate::linalg::Mat;
use crate::real::{r, Real};
use crate::symfunc::{FlowMode, SpeedFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarnackVariant {
    Chi1General,
    Chi2,
    Chi3StrongHp,
    EuclideanContracting,
    EuclideanExpanding,
}

impl HarnackVariant {
    pub const ALL: [HarnackVariant; 5] = [
        HarnackVariant::Chi1General,
        HarnackVariant::Chi2,
        HarnackVariant::Chi3StrongHp,
        HarnackVariant::EuclideanContracting,
        HarnackVariant::EuclideanExpanding,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            HarnackVariant::Chi1General => "chi1-general",
            HarnackVariant::Chi2 => "chi2",
            HarnackVariant::Chi3StrongHp => "chi3-strong-Hp",
            HarnackVariant::EuclideanContracting => "euclidean-contracting",
            HarnackVariant::EuclideanExpanding => "euclidean-expanding",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown Harnack variant '{s}'")))
    }
}

/// `zeta(F) = coef * F^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zeta {
    pub coef: f64,
    pub exponent: f64,
}

/// True on the range `1/2 + 1/(2n) < p < 1`. The boundary belongs to the
/// other branch, where `zeta` vanishes as well.
pub fn first_branch(p: f64, n: usize) -> bool {
    let edge = 0.5 + 0.5 / n as f64;
    p > edge && p < 1.0
}

impl Zeta {
    pub const ZERO: Zeta = Zeta { coef: 0.0, exponent: 0.0 };

    pub fn power(coef: f64, exponent: f64) -> Self {
        Zeta { coef, exponent }
    }

    /// `p (n - 1/(2p - 1)) F^(2 - 1/p)` on the first branch, zero otherwise.
    pub fn strong_hp(p: f64, n: usize) -> Self {
        if first_branch(p, n) {
            Zeta { coef: p * (n as f64 - 1.0 / (2.0 * p - 1.0)), exponent: 2.0 - 1.0 / p }
        } else {
            Zeta::ZERO
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coef == 0.0
    }

    pub fn value<T: Real>(&self, f: T) -> T {
        if self.is_zero() {
            return T::zero();
        }
        r::<T>(self.coef) * f.powf(self.exponent)
    }

    /// `d zeta / dF`
    pub fn d1<T: Real>(&self, f: T) -> T {
        if self.is_zero() {
            return T::zero();
        }
        r::<T>(self.coef * self.exponent) * f.powf(self.exponent - 1.0)
    }

    /// `d^2 zeta / dF^2`
    pub fn d2<T: Real>(&self, f: T) -> T {
        if self.is_zero() {
            return T::zero();
        }
        r::<T>(self.coef * self.exponent * (self.exponent - 1.0)) * f.powf(self.exponent - 2.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnackConfig {
    pub variant: HarnackVariant,
    pub delta: f64,
    pub zeta: Zeta,
    /// Magnitude of the speed exponent.
    pub p: f64,
    pub n: usize,
    pub c: f64,
}

impl HarnackConfig {
    /// Default offset and `zeta` for a flow with the given speed.
    pub fn new(variant: HarnackVariant, speed: &SpeedFunction, ambient: AmbientSpace, n: usize) -> Self {
        let p = speed.power();
        let zeta = if variant == HarnackVariant::Chi3StrongHp { Zeta::strong_hp(p, n) } else { Zeta::ZERO };
        HarnackConfig { variant, delta: default_delta(speed), zeta, p, n, c: ambient.c() }
    }

    pub fn validate(&self, speed: &SpeedFunction) -> Result<()> {
        let mode = speed.mode();
        let a = speed.power();
        if (a - self.p).abs() > 1e-15 * a {
            return Err(Error::InvalidConfig(format!("Harnack exponent {} differs from the speed exponent {a}", self.p)));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidConfig(format!("harnack offset must be finite, got {}", self.delta)));
        }
        let tol = 1e-14;
        match self.variant {
            HarnackVariant::EuclideanContracting => {
                if self.c != 0.0 {
                    return Err(Error::WrongAmbient);
                }
                if mode != FlowMode::Contracting {
                    return Err(Error::WrongSpeed("a contracting speed"));
                }
                let bound = a / (a + 1.0);
                if self.delta < bound - tol {
                    return Err(Error::InvalidConfig(format!("contracting flows need delta >= {bound}, got {}", self.delta)));
                }
            }
            HarnackVariant::EuclideanExpanding => {
                if self.c != 0.0 {
                    return Err(Error::WrongAmbient);
                }
                if mode != FlowMode::Expanding {
                    return Err(Error::WrongSpeed("an expanding speed"));
                }
                let bound = a / (a - 1.0);
                if self.delta > bound + tol {
                    return Err(Error::InvalidConfig(format!("expanding flows need delta <= {bound}, got {}", self.delta)));
                }
            }
            v => {
                if mode != FlowMode::Contracting {
                    return Err(Error::WrongSpeed("a contracting speed"));
                }
                if !(self.delta > 0.0) {
                    return Err(Error::InvalidConfig(format!("harnack offset must be positive, got {}", self.delta)));
                }
                if v == HarnackVariant::Chi3StrongHp && !speed.f.is_mean() {
                    return Err(Error::WrongSpeed("f = mean curvature"));
                }
            }
        }
        Ok(())
    }
}

/// Terms of `Q` at one node.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HarnackTerms {
    pub dt_speed: f64,
    pub theta: f64,
    pub correction: f64,
    pub offset: f64,
    pub zeta_term: f64,
}

impl HarnackTerms {
    pub fn total(&self) -> f64 {
        self.dt_speed - self.theta - self.correction + self.offset + self.zeta_term
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnackReport {
    pub t: f64,
    pub variant: HarnackVariant,
    pub values: Vec<f64>,
    pub terms: Vec<HarnackTerms>,
    pub min: f64,
    pub argmin: usize,
}

impl HarnackReport {
    fn from_terms(t: f64, variant: HarnackVariant, terms: Vec<HarnackTerms>) -> Self {
        let values: Vec<f64> = terms.iter().map(HarnackTerms::total).collect();
        let (argmin, min) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (j, v)| if v < best.1 || v.is_nan() { (j, v) } else { best });
        HarnackReport { t, variant, values, terms, min, argmin }
    }

    pub fn is_positive(&self) -> bool {
        self.min > 0.0
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("Harnack time weight must be positive, got {t}")))
    }
}

fn quad<T: Real>(m: &Mat<T>, v: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..v.len() {
        for j in 0..v.len() {
            s += m[(i, j)] * v[i] * v[j];
        }
    }
    s
}

fn bilinear<T: Real>(m: &Mat<T>, u: &[T], v: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..u.len() {
        for j in 0..v.len() {
            s += u[i] * m[(i, j)] * v[j];
        }
    }
    s
}

/// `dt F = beta + c F tr(F')` at every node.
pub fn dt_speed<T: Real>(state: &SurfaceState<T>) -> Vec<T> {
    let c = r::<T>(state.ambient.c());
    (0..state.nodes)
        .map(|j| state.fields.beta[j] + c * state.speed_value[j] * state.tr_dot_f[j])
        .collect()
}

#[derive(Clone, Debug)]
pub struct Chi1Output<T> {
    pub values: Vec<T>,
    pub dt_speed: Vec<T>,
    pub dt_speed_trajectory: Option<Vec<T>>,
    /// `max |analytic - differenced|` when the trajectory path was used.
    pub discrepancy: Option<f64>,
}

/// `t (dt F - theta) + delta F` with the analytic time derivative.
pub fn chi1<T: Real>(state: &SurfaceState<T>, t: f64, delta: f64) -> Result<Chi1Output<T>> {
    check_time(t)?;
    let d = dt_speed(state);
    let (tt, dd) = (r::<T>(t), r::<T>(delta));
    let values = (0..state.nodes)
        .map(|j| tt * (d[j] - state.fields.theta[j]) + dd * state.speed_value[j])
        .collect();
    Ok(Chi1Output { values, dt_speed: d, dt_speed_trajectory: None, discrepancy: None })
}

/// [`chi1`] together with the centred difference of `F` between the records
/// at `state.t - dt` and `state.t + dt`.
pub fn chi1_cross_checked<T: Real>(
    state: &SurfaceState<T>,
    t: f64,
    delta: f64,
    trajectory: Option<&Trajectory<T>>,
    dt: f64,
) -> Result<Chi1Output<T>> {
    let traj = trajectory.ok_or(Error::MissingTrajectory)?;
    let mut out = chi1(state, t, delta)?;
    let diff = traj.time_derivative(|s| s.speed_value.clone(), state.t, dt)?;
    if diff.len() != out.dt_speed.len() {
        return Err(Error::LabelMismatch);
    }
    let gap = diff.iter().zip(&out.dt_speed).fold(0.0f64, |m, (a, b)| m.max((*a - *b).abs().to_f64()));
    out.dt_speed_trajectory = Some(diff);
    out.discrepancy = Some(gap);
    Ok(out)
}

/// `t (beta - theta) + delta F`
pub fn chi2<T: Real>(state: &SurfaceState<T>, t: f64, delta: f64) -> Result<Vec<T>> {
    check_time(t)?;
    let (tt, dd) = (r::<T>(t), r::<T>(delta));
    Ok((0..state.nodes)
        .map(|j| tt * (state.fields.beta[j] - state.fields.theta[j]) + dd * state.speed_value[j])
        .collect())
}

/// `chi2 + c t zeta(F)`
pub fn chi3<T: Real>(state: &SurfaceState<T>, t: f64, cfg: &HarnackConfig) -> Result<Vec<T>> {
    if !state.speed.f.is_mean() {
        return Err(Error::WrongSpeed("f = mean curvature"));
    }
    let ct = r::<T>(state.ambient.c() * t);
    let mut v = chi2(state, t, cfg.delta)?;
    for (x, &f) in v.iter_mut().zip(&state.speed_value) {
        *x += ct * cfg.zeta.value(f);
    }
    Ok(v)
}

/// `dt H^p - theta - c k H^(2p-1) + p/(p+1) H^p / t` with `k = p/(2p-1)` on
/// the first branch and `k = n p` otherwise.
pub fn strong_hp_quantity<T: Real>(state: &SurfaceState<T>, t: f64, p: f64) -> Result<Vec<T>> {
    check_time(t)?;
    if !state.speed.f.is_mean() || state.speed.mode() != FlowMode::Contracting {
        return Err(Error::WrongSpeed("F = H^p"));
    }
    if (state.speed.power() - p).abs() > 1e-15 {
        return Err(Error::InvalidConfig(format!("exponent {p} does not match the flow speed")));
    }
    let n = state.dim;
    let k = if first_branch(p, n) { p / (2.0 * p - 1.0) } else { n as f64 * p };
    let d = dt_speed(state);
    let ck = r::<T>(state.ambient.c() * k);
    let off = r::<T>(p / (p + 1.0) / t);
    Ok((0..state.nodes)
        .map(|j| {
            let h: T = state.kappa[j].iter().copied().sum();
            d[j] - state.fields.theta[j] - ck * h.powf(2.0 * p - 1.0) + off * state.speed_value[j]
        })
        .collect())
}

/// `dt F - theta + delta F / t` for the Euclidean contracting and expanding flows.
pub fn euclidean_variants<T: Real>(state: &SurfaceState<T>, t: f64, cfg: &HarnackConfig) -> Result<Vec<T>> {
    if state.ambient.is_sphere() {
        return Err(Error::WrongAmbient);
    }
    check_time(t)?;
    cfg.validate(&state.speed)?;
    let d = dt_speed(state);
    let off = r::<T>(cfg.delta / t);
    Ok((0..state.nodes).map(|j| d[j] - state.fields.theta[j] + off * state.speed_value[j]).collect())
}

/// Evaluates the configured variant with its term breakdown.
pub fn evaluate<T: Real>(state: &SurfaceState<T>, t: f64, cfg: &HarnackConfig) -> Result<HarnackReport> {
    check_time(t)?;
    cfg.validate(&state.speed)?;
    if matches!(cfg.variant, HarnackVariant::EuclideanContracting | HarnackVariant::EuclideanExpanding)
        && state.ambient.is_sphere()
    {
        return Err(Error::WrongAmbient);
    }
    let c = state.ambient.c();
    let d = dt_speed(state);
    let terms = (0..state.nodes)
        .map(|j| {
            let f = state.speed_value[j].to_f64();
            let (correction, zeta_term) = match cfg.variant {
                HarnackVariant::Chi2 => (c * f * state.tr_dot_f[j].to_f64(), 0.0),
                HarnackVariant::Chi3StrongHp => {
                    (c * f * state.tr_dot_f[j].to_f64(), c * cfg.zeta.value(state.speed_value[j]).to_f64())
                }
                _ => (0.0, 0.0),
            };
            HarnackTerms {
                dt_speed: d[j].to_f64(),
                theta: state.fields.theta[j].to_f64(),
                correction,
                offset: cfg.delta * f / t,
                zeta_term,
            }
        })
        .collect();
    Ok(HarnackReport::from_terms(t, cfg.variant, terms))
}

/// The remainder `R` of the `chi2` evolution for a general curvature function.
pub fn remainder_r<T: Real>(state: &SurfaceState<T>) -> Vec<T> {
    let tr = &state.tr_dot_f;
    let box_tr = state.box_scalar(tr);
    let grad_tr = state.gradient(tr);
    let two = r::<T>(2.0);
    (0..state.nodes)
        .map(|j| {
            let f = state.speed_value[j];
            let jet = &state.jets[j];
            let df = state.grad_speed.vector_at(j);
            let dtr = grad_tr.vector_at(j);
            let m = &state.dot_f[j];
            let g = state.g.mat_at(j);
            let h = state.h.mat_at(j);
            let b = &state.b[j];
            let bgb = b.matmul(&g).matmul(b);
            let bgf = b.matmul(&g).matmul(m);
            let alpha = state.fields.alpha.mat_at(j);
            let gamma = state.fields.gamma.mat_at(j);
            f * box_tr[j] + two * bilinear(m, &dtr, &df) + f * jet.second(&alpha, &g)
                - two * f * jet.second(&gamma, &g)
                + two * f * f * m.dot(&h)
                + (m.dot(&h) + f) * quad(&bgb, &df)
                - two * quad(&bgf, &df)
        })
        .collect()
}

/// `(F', F'', F''')` of `F = sign H^a` with respect to `H`.
pub fn mean_derivatives<T: Real>(speed: &SpeedFunction, h: T) -> (T, T, T) {
    let a = speed.exponent;
    let s = speed.sign();
    (
        r::<T>(s * a) * h.powf(a - 1.0),
        r::<T>(s * a * (a - 1.0)) * h.powf(a - 2.0),
        r::<T>(s * a * (a - 1.0) * (a - 2.0)) * h.powf(a - 3.0),
    )
}

/// `R` rewritten for speeds that depend on the mean curvature only.
pub fn remainder_r_mean<T: Real>(state: &SurfaceState<T>) -> Result<Vec<T>> {
    if !state.speed.f.is_mean() {
        return Err(Error::WrongSpeed("f = mean curvature"));
    }
    let n = r::<T>(state.dim as f64);
    let two = r::<T>(2.0);
    Ok((0..state.nodes)
        .map(|j| {
            let f = state.speed_value[j];
            let hm: T = state.kappa[j].iter().copied().sum();
            let (f1, f2, f3) = mean_derivatives(&state.speed, hm);
            let df = state.grad_speed.vector_at(j);
            let m = &state.dot_f[j];
            let g = state.g.mat_at(j);
            let b = &state.b[j];
            let bgb = b.matmul(&g).matmul(b);
            let (beta, theta) = (state.fields.beta[j], state.fields.theta[j]);
            let fh2 = m.dot(&state.h2[j]);
            let grad_coef = n * (two * f2 / f1 - f2 * f2 * f / (f1 * f1 * f1) + f3 * f / (f1 * f1));
            two * n * f2 * f / f1 * (beta - theta) - n * f2 * f * f / f1 * fh2
                + two * f * f * f1 * hm
                + grad_coef * quad(m, &df)
                + (f1 * hm + f) * quad(&bgb, &df)
                - two * f1 * theta
        })
        .collect())
}
