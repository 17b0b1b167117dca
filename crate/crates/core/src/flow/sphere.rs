//! Radius of a shrinking or expanding geodesic sphere.
//!
//! The umbilic reduction of the flow is `r' = -F(kappa(r), ..., kappa(r))`
//! with `kappa = cot r` or `1/r`. By homogeneity `F = sign * (f1 kappa)^a`,
//! `f1 = f(1, ..., 1)`, which integrates in closed form except on the sphere
//! with `p != 1`, where the time to reach radius `r` is the quadrature
//! `f1^(-p) int_r^r0 tan^p s ds`.

use super::FlowConfig;
use crate::error::{Error, Result};
use crate::geometry::{AmbientSpace, Representation};
use crate::real::Real;
use crate::symfunc::{FlowMode, SpeedFunction};

const QUAD_RTOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SphereSolution {
    pub ambient: AmbientSpace,
    pub speed: SpeedFunction,
    pub n: usize,
    pub r0: f64,
    pub t0: f64,
    f1: f64,
    extinction: Option<f64>,
}

/// Radius-versus-time solution for geodesic-sphere initial data.
pub fn sphere_ode_solution<T: Real>(cfg: &FlowConfig<T>) -> Result<SphereSolution> {
    match &cfg.initial {
        Representation::GeodesicSphere { n, radius } => {
            SphereSolution::new(cfg.ambient, &cfg.speed, *n, radius.to_f64(), cfg.t_start)
        }
        _ => Err(Error::InvalidConfig("the radius ODE needs geodesic-sphere initial data".into())),
    }
}

/// `int_a^b tan^p s ds` to relative accuracy `QUAD_RTOL`.
fn tan_power_integral(p: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let f = |s: f64| s.tan().powf(p);
    let rough = quadrature::integrate(f, a, b, 1e-6).integral.abs();
    quadrature::integrate(f, a, b, QUAD_RTOL * rough.max(f64::MIN_POSITIVE)).integral
}

impl SphereSolution {
    pub fn new(ambient: AmbientSpace, speed: &SpeedFunction, n: usize, r0: f64, t0: f64) -> Result<Self> {
        if !(r0 > 0.0) || (ambient.is_sphere() && r0 >= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidConfig(format!("initial radius {r0} is outside the convex range")));
        }
        if speed.mode() == FlowMode::Expanding && ambient.is_sphere() {
            return Err(Error::WrongAmbient);
        }
        let f1 = speed.f.umbilic_value(n);
        let mut s = SphereSolution { ambient, speed: speed.clone(), n, r0, t0, f1, extinction: None };
        s.extinction = s.lifespan().map(|l| t0 + l);
        Ok(s)
    }

    fn p(&self) -> f64 {
        self.speed.power()
    }

    fn lifespan(&self) -> Option<f64> {
        let p = self.p();
        match (self.speed.mode(), self.ambient.is_sphere()) {
            (FlowMode::Expanding, _) => None,
            (FlowMode::Contracting, false) => Some(self.r0.powf(p + 1.0) / ((p + 1.0) * self.f1.powf(p))),
            (FlowMode::Contracting, true) if p == 1.0 => Some(-self.r0.cos().ln() / self.f1),
            (FlowMode::Contracting, true) => Some(tan_power_integral(p, 0.0, self.r0) / self.f1.powf(p)),
        }
    }

    pub fn extinction(&self) -> Option<f64> {
        self.extinction
    }

    fn domain_error(&self, t: f64) -> Error {
        Error::DomainExceeded { t, extinction: self.extinction.unwrap_or(f64::INFINITY) }
    }

    pub fn radius(&self, t: f64) -> Result<f64> {
        let s = t - self.t0;
        if !(s >= 0.0) || self.extinction.is_some_and(|e| t >= e) {
            return Err(self.domain_error(t));
        }
        let (p, f1, r0) = (self.p(), self.f1, self.r0);
        let r = match (self.speed.mode(), self.ambient.is_sphere()) {
            (FlowMode::Expanding, _) => {
                let b = p;
                (r0.powf(1.0 - b) + (1.0 - b) * f1.powf(-b) * s).powf(1.0 / (1.0 - b))
            }
            (FlowMode::Contracting, false) => (r0.powf(p + 1.0) - (p + 1.0) * f1.powf(p) * s).powf(1.0 / (p + 1.0)),
            (FlowMode::Contracting, true) if p == 1.0 => (r0.cos() * (f1 * s).exp()).acos(),
            (FlowMode::Contracting, true) => self.invert_quadrature(s),
        };
        if !(r > 0.0) {
            return Err(self.domain_error(t));
        }
        Ok(r)
    }

    /// Solves `f1^(-p) int_r^r0 tan^p = s` by safeguarded Newton iteration.
    fn invert_quadrature(&self, s: f64) -> f64 {
        let (p, f1, r0) = (self.p(), self.f1, self.r0);
        let scale = f1.powf(-p);
        let (mut lo, mut hi) = (0.0, r0);
        let mut x = r0 * 0.5;
        for _ in 0..200 {
            let g = scale * tan_power_integral(p, x, r0) - s;
            if g > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = -scale * x.tan().powf(p);
            let mut nx = x - g / slope;
            if !(nx > lo && nx < hi) {
                nx = 0.5 * (lo + hi);
            }
            if (nx - x).abs() <= 1e-15 * x.max(1e-300) {
                return nx;
            }
            x = nx;
        }
        x
    }

    pub fn curvature(&self, t: f64) -> Result<f64> {
        Ok(self.ambient.sphere_curvature(self.radius(t)?))
    }

    /// Speed of the flow at time `t`.
    pub fn speed_value(&self, t: f64) -> Result<f64> {
        let k = self.curvature(t)?;
        Ok(self.speed.of_f(self.f1 * k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfunc::CurvatureFunction;

    fn mean(p: f64) -> SpeedFunction {
        SpeedFunction::contracting(CurvatureFunction::mean(), p).unwrap()
    }

    #[test]
    fn euclidean_mean_curvature_flow() {
        let s = SphereSolution::new(AmbientSpace::euclidean(), &mean(1.0), 2, 1.0, 0.0).unwrap();
        assert!((s.radius(0.1).unwrap() - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((s.extinction().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn spherical_extinction_time() {
        let s = SphereSolution::new(AmbientSpace::sphere(), &mean(1.0), 2, std::f64::consts::FRAC_PI_3, 0.0).unwrap();
        assert!((s.extinction().unwrap() - 2f64.ln() / 2.0).abs() < 1e-14);
        let r = s.radius(0.1).unwrap();
        assert!((r.cos() - 0.5 * 0.2f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn expanding_square_root_law() {
        let sp = SpeedFunction::expanding(CurvatureFunction::mean(), 0.5).unwrap();
        let s = SphereSolution::new(AmbientSpace::euclidean(), &sp, 2, 1.0, 0.0).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let expect = 1.0 + t / (2.0 * 2f64.sqrt());
            assert!((s.radius(t).unwrap().sqrt() - expect).abs() < 1e-13);
        }
        assert!(s.extinction().is_none());
    }

    #[test]
    fn quadrature_path_matches_closed_form_at_p_one() {
        // route the p = 1 sphere through the quadrature inversion
        let s = SphereSolution::new(AmbientSpace::sphere(), &mean(1.0), 2, 1.0, 0.0).unwrap();
        let t = 0.2;
        let r = s.invert_quadrature(t);
        assert!((r - s.radius(t).unwrap()).abs() < 1e-10);
        let total = tan_power_integral(1.0, 0.0, 1.0) / 2.0;
        assert!((total - s.extinction().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_solution_satisfies_the_ode() {
        let sp = mean(0.5);
        let s = SphereSolution::new(AmbientSpace::sphere(), &sp, 2, 1.0, 0.0).unwrap();
        let (t, h) = (0.3, 1e-4);
        let dr = (s.radius(t + h).unwrap() - s.radius(t - h).unwrap()) / (2.0 * h);
        let rhs = -(2.0 / s.radius(t).unwrap().tan()).sqrt();
        assert!((dr - rhs).abs() < 1e-7 * rhs.abs(), "{dr} vs {rhs}");
    }

    #[test]
    fn beyond_extinction_is_an_error() {
        let s = SphereSolution::new(AmbientSpace::euclidean(), &mean(1.0), 2, 1.0, 0.0).unwrap();
        assert!(matches!(s.radius(0.3), Err(Error::DomainExceeded { .. })));
    }
}
