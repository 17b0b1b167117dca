//! Extrinsic geometry of marker curves in the model surface.
//!
//! Every representation lives in one three-dimensional model with coordinates
//! `(a, b, rho)`. For the unit sphere the markers lie on the unit 2-sphere and
//! the model normal is the position itself; for Euclidean space the markers
//! lie in the plane `a = 0` and the model normal is `e_a`. An axisymmetric
//! hypersurface is swept out by rotating the profile about the axis `rho = 0`
//! in the warped product `N^2 x_rho S^1`.

use super::grid::Grid;
use super::AmbientSpace;
use crate::real::{r, Real};

pub type Point<T> = [T; 3];

#[inline]
pub fn dot<T: Real>(a: &Point<T>, b: &Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: &Point<T>, b: &Point<T>) -> Point<T> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn axpy<T: Real>(s: T, x: &Point<T>, y: &Point<T>) -> Point<T> {
    [y[0] + s * x[0], y[1] + s * x[1], y[2] + s * x[2]]
}

#[inline]
pub fn norm<T: Real>(a: &Point<T>) -> T {
    dot(a, a).sqrt()
}

/// Projects a point back onto the model surface.
pub fn retract<T: Real>(ambient: AmbientSpace, p: &Point<T>) -> Point<T> {
    if ambient.is_sphere() {
        let s = T::one() / norm(p);
        [p[0] * s, p[1] * s, p[2] * s]
    } else {
        [T::zero(), p[1], p[2]]
    }
}

pub fn model_normal<T: Real>(ambient: AmbientSpace, p: &Point<T>) -> Point<T> {
    if ambient.is_sphere() {
        *p
    } else {
        [T::one(), T::zero(), T::zero()]
    }
}

/// Per-node extrinsic data of a marker curve.
#[derive(Clone, Debug)]
pub struct MarkerFrame<T> {
    pub points: Vec<Point<T>>,
    pub normal: Vec<Point<T>>,
    pub tangent: Vec<Point<T>>,
    /// `|x_u|^2`
    pub speed2: Vec<T>,
    /// Curvature of the profile inside the model surface.
    pub kappa_profile: Vec<T>,
    /// `<x_uu, T>`, the tangential part of the second derivative.
    pub tangential_accel: Vec<T>,
}

/// Parity of the model coordinates under reflection through the axis.
pub const COORD_EVEN: [bool; 3] = [true, true, false];

pub fn marker_frame<T: Real>(ambient: AmbientSpace, grid: &Grid, raw: &[Point<T>]) -> MarkerFrame<T> {
    let n = raw.len();
    let points: Vec<Point<T>> = raw.iter().map(|p| retract(ambient, p)).collect();
    let mut d1 = vec![[T::zero(); 3]; n];
    let mut d2 = vec![[T::zero(); 3]; n];
    for c in 0..3 {
        let v: Vec<T> = points.iter().map(|p| p[c]).collect();
        let a = grid.d1(&v, COORD_EVEN[c]);
        let b = grid.d2(&v, COORD_EVEN[c]);
        for j in 0..n {
            d1[j][c] = a[j];
            d2[j][c] = b[j];
        }
    }
    let mut out = MarkerFrame {
        points: points.clone(),
        normal: Vec::with_capacity(n),
        tangent: Vec::with_capacity(n),
        speed2: Vec::with_capacity(n),
        kappa_profile: Vec::with_capacity(n),
        tangential_accel: Vec::with_capacity(n),
    };
    for j in 0..n {
        let p = &points[j];
        let nm = model_normal(ambient, p);
        let xu = axpy(-dot(&d1[j], &nm), &nm, &d1[j]);
        let a = dot(&xu, &xu);
        let len = a.sqrt();
        let t = [xu[0] / len, xu[1] / len, xu[2] / len];
        let nu = cross(&t, &nm);
        out.kappa_profile.push(-dot(&d2[j], &nu) / a);
        out.tangential_accel.push(dot(&d2[j], &t));
        out.speed2.push(a);
        out.tangent.push(t);
        out.normal.push(nu);
    }
    out
}

/// Chordal distances between consecutive markers.
pub fn spacings<T: Real>(points: &[Point<T>], periodic: bool) -> Vec<T> {
    let n = points.len();
    let m = if periodic { n } else { n - 1 };
    (0..m)
        .map(|j| {
            let a = &points[j];
            let b = &points[(j + 1) % n];
            norm(&[b[0] - a[0], b[1] - a[1], b[2] - a[2]])
        })
        .collect()
}

/// Mean distance of the markers from their centroid (geodesic distance on the
/// sphere). For profiles the centroid is projected onto the rotation axis.
pub fn mean_radius<T: Real>(ambient: AmbientSpace, pts: &[Point<T>], on_axis: bool) -> f64 {
    let n = pts.len() as f64;
    let mut c = [0.0; 3];
    for p in pts {
        for k in 0..3 {
            c[k] += p[k].to_f64() / n;
        }
    }
    if on_axis {
        c[2] = 0.0;
    }
    if ambient.is_sphere() {
        let l = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        c = [c[0] / l, c[1] / l, c[2] / l];
    }
    let dist = |p: &Point<T>| {
        let p = [p[0].to_f64(), p[1].to_f64(), p[2].to_f64()];
        if ambient.is_sphere() {
            (p[0] * c[0] + p[1] * c[1] + p[2] * c[2]).clamp(-1.0, 1.0).acos()
        } else {
            ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
        }
    };
    pts.iter().map(dist).sum::<f64>() / n
}

/// Polar shape `R(u) = r0 (1 + sum eps_k cos(k u))` about the centre `e_a`
/// (sphere, geodesic polar radius) or the origin (plane).
#[derive(Clone, Debug, PartialEq)]
pub struct PolarShape {
    pub radius: f64,
    pub modes: Vec<(u32, f64)>,
}

impl PolarShape {
    pub fn round(radius: f64) -> Self {
        PolarShape { radius, modes: vec![] }
    }

    pub fn radius_at<T: Real>(&self, u: T) -> T {
        let mut s = T::one();
        for &(k, e) in &self.modes {
            s += r::<T>(e) * (r::<T>(k as f64) * u).cos();
        }
        r::<T>(self.radius) * s
    }

    pub fn point<T: Real>(&self, ambient: AmbientSpace, u: T) -> Point<T> {
        let rr = self.radius_at(u);
        if ambient.is_sphere() {
            let s = rr.sin();
            [rr.cos(), s * u.cos(), s * u.sin()]
        } else {
            [T::zero(), rr * u.cos(), rr * u.sin()]
        }
    }

    pub fn sample<T: Real>(&self, ambient: AmbientSpace, grid: &Grid) -> Vec<Point<T>> {
        (0..grid.nodes).map(|j| self.point(ambient, grid.coordinate::<T>(j))).collect()
    }
}
