//! Discrete hypersurfaces in the space forms of curvature 0 and 1 and the
//! intrinsic calculus on them: Christoffel symbols, covariant derivatives,
//! the operator `F^{rs} nabla_r nabla_s`, and the Gauss and Codazzi checks.
//!
//! Three representations are supported: a geodesic sphere (a single umbilic
//! node, all spatial derivatives vanish), a closed curve (`n = 1`) and an
//! axisymmetric surface given by its profile curve (`n = 2`).

pub mod field;
pub mod grid;
pub mod markers;

pub use field::Field;
pub use grid::{Grid, GridKind};
pub use markers::{PolarShape, Point};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::real::{r, Real};
use crate::symfunc::{SpectralJet, SpeedFunction};
use field::{flat_index, is_even, multi_index};
use markers::{marker_frame, spacings, MarkerFrame};

/// Largest accepted ratio between the widest and the narrowest marker gap.
pub const MAX_SPACING_RATIO: f64 = 10.0;

/// Simply connected space form of sectional curvature `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientSpace {
    c: f64,
}

impl AmbientSpace {
    pub fn new(c: f64) -> Result<Self> {
        if c == 0.0 || c == 1.0 {
            Ok(AmbientSpace { c })
        } else {
            Err(Error::UnsupportedAmbient(c))
        }
    }

    pub fn euclidean() -> Self {
        AmbientSpace { c: 0.0 }
    }

    pub fn sphere() -> Self {
        AmbientSpace { c: 1.0 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn is_sphere(&self) -> bool {
        self.c == 1.0
    }

    /// Warping of a geodesic sphere of radius `r`: `sin r` or `r`.
    pub fn sn<T: Real>(&self, radius: T) -> T {
        if self.is_sphere() {
            radius.sin()
        } else {
            radius
        }
    }

    /// Principal curvature of a geodesic sphere of radius `r`: `cot r` or `1/r`.
    pub fn sphere_curvature<T: Real>(&self, radius: T) -> T {
        if self.is_sphere() {
            radius.cos() / radius.sin()
        } else {
            T::one() / radius
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation<T> {
    /// Geodesic sphere of the given radius in dimension `n + 1`.
    GeodesicSphere { n: usize, radius: T },
    /// Closed curve on the model surface, sampled on a periodic grid.
    ClosedCurve { points: Vec<Point<T>> },
    /// Profile of a rotation surface, sampled on the cell-centred grid of `(0, pi)`.
    Axisymmetric { points: Vec<Point<T>> },
}

impl<T: Real> Representation<T> {
    pub fn dim(&self) -> usize {
        match self {
            Representation::GeodesicSphere { n, .. } => *n,
            Representation::ClosedCurve { .. } => 1,
            Representation::Axisymmetric { .. } => 2,
        }
    }

    pub fn grid(&self) -> Option<Grid> {
        match self {
            Representation::GeodesicSphere { .. } => None,
            Representation::ClosedCurve { points } => Some(Grid::periodic(points.len())),
            Representation::Axisymmetric { points } => Some(Grid::reflective(points.len())),
        }
    }

    pub fn points(&self) -> &[Point<T>] {
        match self {
            Representation::GeodesicSphere { .. } => &[],
            Representation::ClosedCurve { points } | Representation::Axisymmetric { points } => points,
        }
    }

    pub fn with_points(&self, pts: Vec<Point<T>>) -> Self {
        match self {
            Representation::GeodesicSphere { .. } => self.clone(),
            Representation::ClosedCurve { .. } => Representation::ClosedCurve { points: pts },
            Representation::Axisymmetric { .. } => Representation::Axisymmetric { points: pts },
        }
    }

    pub fn polar_curve(ambient: AmbientSpace, nodes: usize, shape: &PolarShape) -> Self {
        Representation::ClosedCurve { points: shape.sample(ambient, &Grid::periodic(nodes)) }
    }

    pub fn polar_profile(ambient: AmbientSpace, nodes: usize, shape: &PolarShape) -> Self {
        Representation::Axisymmetric { points: shape.sample(ambient, &Grid::reflective(nodes)) }
    }

    pub fn convert<U: Real>(&self) -> Representation<U> {
        let cv = |p: &Point<T>| [r::<U>(p[0].to_f64()), r(p[1].to_f64()), r(p[2].to_f64())];
        match self {
            Representation::GeodesicSphere { n, radius } => {
                Representation::GeodesicSphere { n: *n, radius: r(radius.to_f64()) }
            }
            Representation::ClosedCurve { points } => Representation::ClosedCurve { points: points.iter().map(cv).collect() },
            Representation::Axisymmetric { points } => Representation::Axisymmetric { points: points.iter().map(cv).collect() },
        }
    }
}

/// Fields derived from the speed.
#[derive(Clone, Debug)]
pub struct SpeedFields<T> {
    /// `nabla^2 F + F h^2`
    pub alpha: Field<T>,
    /// `b^{kl} nabla_k F nabla_l h_ij`
    pub gamma: Field<T>,
    /// `alpha - gamma`
    pub eta: Field<T>,
    /// `F^{ij} alpha_ij`
    pub beta: Vec<T>,
    /// `b^{ij} nabla_i F nabla_j F`
    pub theta: Vec<T>,
}

/// Assembled geometric state of one time slice.
#[derive(Clone, Debug)]
pub struct SurfaceState<T: Real> {
    pub ambient: AmbientSpace,
    pub speed: SpeedFunction,
    pub t: f64,
    pub dim: usize,
    pub nodes: usize,
    pub grid: Option<Grid>,
    pub repr: Representation<T>,
    pub frame: Option<MarkerFrame<T>>,
    pub g: Field<T>,
    pub h: Field<T>,
    pub g_inv: Vec<Mat<T>>,
    /// Inverse of the second fundamental form.
    pub b: Vec<Mat<T>>,
    /// `(h^2)_ij = h_ik g^{kl} h_lj`
    pub h2: Vec<Mat<T>>,
    /// `Gamma^k_ij` at flat index `(k * dim + i) * dim + j`.
    pub christoffel: Vec<Vec<T>>,
    pub kappa: Vec<Vec<T>>,
    pub jets: Vec<SpectralJet<T>>,
    /// `F^{ij}`
    pub dot_f: Vec<Mat<T>>,
    pub speed_value: Vec<T>,
    pub tr_dot_f: Vec<T>,
    pub nabla_h: Field<T>,
    pub grad_speed: Field<T>,
    pub hess_speed: Field<T>,
    pub fields: SpeedFields<T>,
}

/// Builds the geometric state of a representation at time `t`.
pub fn assemble<T: Real>(
    repr: &Representation<T>,
    ambient: AmbientSpace,
    speed: &SpeedFunction,
    t: f64,
) -> Result<SurfaceState<T>> {
    let dim = repr.dim();
    let grid = repr.grid();
    let (nodes, frame, g_mats, h_mats) = match repr {
        Representation::GeodesicSphere { n, radius } => {
            if !(radius.to_f64() > 0.0) || (ambient.is_sphere() && radius.to_f64() >= std::f64::consts::FRAC_PI_2) {
                return Err(Error::ConvexityLost { node: 0, kappa: ambient.sphere_curvature(*radius).to_f64() });
            }
            let s = ambient.sn(*radius);
            let k = ambient.sphere_curvature(*radius);
            let g = Mat::identity(*n).scale(s * s);
            let h = g.scale(k);
            (1, None, vec![g], vec![h])
        }
        Representation::ClosedCurve { points } | Representation::Axisymmetric { points } => {
            let grid = grid.expect("marker representations carry a grid");
            if points.len() < 8 {
                return Err(Error::InvalidConfig(format!("at least 8 markers are required, got {}", points.len())));
            }
            let mf = marker_frame(ambient, &grid, points);
            check_spacing(&mf.points, grid.kind == GridKind::Periodic)?;
            let mut gs = Vec::with_capacity(points.len());
            let mut hs = Vec::with_capacity(points.len());
            for j in 0..points.len() {
                let a = mf.speed2[j];
                let k1 = mf.kappa_profile[j];
                if dim == 1 {
                    gs.push(Mat::diag(&[a]));
                    hs.push(Mat::diag(&[k1 * a]));
                } else {
                    let rho = mf.points[j][2];
                    let bb = rho * rho;
                    let k2 = mf.normal[j][2] / rho;
                    gs.push(Mat::diag(&[a, bb]));
                    hs.push(Mat::diag(&[k1 * a, k2 * bb]));
                }
            }
            (points.len(), Some(mf), gs, hs)
        }
    };
    let g = Field::from_mats(dim, &g_mats);
    let h = Field::from_mats(dim, &h_mats);
    let mut g_inv = Vec::with_capacity(nodes);
    for m in &g_mats {
        g_inv.push(m.spd_inverse().ok_or_else(|| Error::StabilityViolation("degenerate metric".into()))?);
    }
    let mut kappa = Vec::with_capacity(nodes);
    let mut jets = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let (k, v) = crate::symfunc::principal_frame(&g_mats[node], &h_mats[node])?;
        if let Some((_, &kmin)) =
            k.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        {
            if !(kmin > T::zero()) || !kmin.is_finite() {
                if !kmin.is_finite() {
                    return Err(Error::StabilityViolation(format!("non-finite curvature at node {node}")));
                }
                return Err(Error::ConvexityLost { node, kappa: kmin.to_f64() });
            }
        }
        jets.push(SpectralJet::from_frame(speed, k.clone(), v)?);
        kappa.push(k);
    }
    let b: Vec<Mat<T>> = h_mats
        .iter()
        .map(|m| m.spd_inverse().ok_or_else(|| Error::ConvexityLost { node: 0, kappa: 0.0 }))
        .collect::<Result<_>>()?;
    let h2: Vec<Mat<T>> = (0..nodes).map(|j| h_mats[j].matmul(&g_inv[j]).matmul(&h_mats[j])).collect();
    let christoffel = christoffel_symbols(dim, grid.as_ref(), &g, &g_inv);
    let dot_f: Vec<Mat<T>> = jets.iter().map(|j| j.dot_f()).collect();
    let speed_value: Vec<T> = jets.iter().map(|j| j.value).collect();
    let tr_dot_f: Vec<T> = jets.iter().map(|j| j.trace()).collect();

    let mut state = SurfaceState {
        ambient,
        speed: speed.clone(),
        t,
        dim,
        nodes,
        grid,
        repr: repr.clone(),
        frame,
        g,
        h,
        g_inv,
        b,
        h2,
        christoffel,
        kappa,
        jets,
        dot_f,
        speed_value,
        tr_dot_f,
        nabla_h: Field::zeros(3, dim, nodes),
        grad_speed: Field::zeros(1, dim, nodes),
        hess_speed: Field::zeros(2, dim, nodes),
        fields: SpeedFields {
            alpha: Field::zeros(2, dim, nodes),
            gamma: Field::zeros(2, dim, nodes),
            eta: Field::zeros(2, dim, nodes),
            beta: vec![],
            theta: vec![],
        },
    };
    state.nabla_h = state.nabla(&state.h);
    let fscalar = Field::scalar_on(dim, state.speed_value.clone());
    state.grad_speed = state.nabla(&fscalar);
    state.hess_speed = state.nabla(&state.grad_speed);
    state.fields = state.compute_speed_fields();
    Ok(state)
}

fn check_spacing<T: Real>(points: &[Point<T>], periodic: bool) -> Result<()> {
    let s = spacings(points, periodic);
    let max = s.iter().fold(0.0f64, |m, x| m.max(x.to_f64()));
    let min = s.iter().fold(f64::INFINITY, |m, x| m.min(x.to_f64()));
    let ratio = max / min;
    if !(ratio <= MAX_SPACING_RATIO) {
        return Err(Error::DegenerateGrid { ratio, limit: MAX_SPACING_RATIO });
    }
    Ok(())
}

fn christoffel_symbols<T: Real>(dim: usize, grid: Option<&Grid>, g: &Field<T>, g_inv: &[Mat<T>]) -> Vec<Vec<T>> {
    let nodes = g.nodes();
    let mut dg = vec![vec![vec![T::zero(); nodes]; dim * dim]; dim];
    if let Some(grid) = grid {
        for c in 0..dim * dim {
            dg[0][c] = grid.d1(&g.comps[c], is_even(dim, 2, c));
        }
    }
    let half = r::<T>(0.5);
    (0..nodes)
        .map(|node| {
            let mut out = vec![T::zero(); dim * dim * dim];
            for k in 0..dim {
                for i in 0..dim {
                    for j in 0..dim {
                        let mut s = T::zero();
                        for l in 0..dim {
                            let v = dg[i][j * dim + l][node] + dg[j][i * dim + l][node] - dg[l][i * dim + j][node];
                            s += g_inv[node][(k, l)] * v;
                        }
                        out[(k * dim + i) * dim + j] = half * s;
                    }
                }
            }
            out
        })
        .collect()
}

/// Residuals of the Gauss and Codazzi equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussCodazziReport {
    /// `max |R_ijkl - c(g g - g g) - (h h - h h)|`
    pub gauss: f64,
    /// `max |nabla_k h_ij - nabla_i h_kj|`
    pub codazzi: f64,
    /// `max |c(g g - g g) + (h h - h h)|`
    pub gauss_scale: f64,
}

impl<T: Real> SurfaceState<T> {
    /// Partial derivative in the grid parameter of one component.
    pub fn d_u(&self, v: &[T], even: bool) -> Vec<T> {
        match &self.grid {
            Some(g) => g.d1(v, even),
            None => vec![T::zero(); v.len()],
        }
    }

    /// Covariant derivative of a covariant field; the new index comes first.
    pub fn nabla(&self, f: &Field<T>) -> Field<T> {
        let d = self.dim;
        let rk = f.rank;
        let nc = d.pow(rk as u32);
        let du: Vec<Vec<T>> = f.comps.iter().enumerate().map(|(c, v)| self.d_u(v, is_even(d, rk, c))).collect();
        let idx: Vec<Vec<usize>> = (0..nc).map(|c| multi_index(d, rk, c)).collect();
        let mut out = Field::zeros(rk + 1, d, self.nodes);
        for node in 0..self.nodes {
            let gam = &self.christoffel[node];
            for k in 0..d {
                for c in 0..nc {
                    let mut v = if k == 0 { du[c][node] } else { T::zero() };
                    let mut j = idx[c].clone();
                    for s in 0..rk {
                        let is = idx[c][s];
                        for m in 0..d {
                            let gmk = gam[(m * d + k) * d + is];
                            if gmk != T::zero() {
                                j[s] = m;
                                v -= gmk * f.comps[flat_index(d, &j)][node];
                            }
                        }
                        j[s] = is;
                    }
                    out.comps[k * nc + c][node] = v;
                }
            }
        }
        out
    }

    /// Contracts the first two indices with `F^{rs}`.
    pub fn contract_dot_f(&self, f: &Field<T>) -> Field<T> {
        assert!(f.rank >= 2);
        let d = self.dim;
        let nc = d.pow(f.rank as u32 - 2);
        let mut out = Field::zeros(f.rank - 2, d, self.nodes);
        for node in 0..self.nodes {
            let m = &self.dot_f[node];
            for c in 0..nc {
                let mut s = T::zero();
                for a in 0..d {
                    for b in 0..d {
                        s += m[(a, b)] * f.comps[(a * d + b) * nc + c][node];
                    }
                }
                out.comps[c][node] = s;
            }
        }
        out
    }

    /// `F^{rs} nabla_r nabla_s T` for a covariant field `T`.
    pub fn box_op(&self, f: &Field<T>) -> Field<T> {
        self.contract_dot_f(&self.nabla(&self.nabla(f)))
    }

    pub fn box_scalar(&self, v: &[T]) -> Vec<T> {
        self.box_op(&Field::scalar_on(self.dim, v.to_vec())).comps.swap_remove(0)
    }

    /// `nabla^2 phi` of a scalar field.
    pub fn covariant_hessian(&self, phi: &[T]) -> Field<T> {
        let f = Field::scalar_on(self.dim, phi.to_vec());
        self.nabla(&self.nabla(&f))
    }

    pub fn gradient(&self, phi: &[T]) -> Field<T> {
        self.nabla(&Field::scalar_on(self.dim, phi.to_vec()))
    }

    /// Raises the last index of a rank-2 field: `T_i^j = T_ik g^{kj}`.
    pub fn raise_last(&self, f: &Field<T>) -> Field<T> {
        let m: Vec<Mat<T>> = (0..self.nodes).map(|j| f.mat_at(j).matmul(&self.g_inv[j])).collect();
        Field::from_mats(self.dim, &m)
    }

    /// Lowers both indices of per-node contravariant matrices.
    pub fn lower_both(&self, m: &[Mat<T>]) -> Field<T> {
        let gm: Vec<Mat<T>> = (0..self.nodes).map(|j| self.g.mat_at(j).matmul(&m[j]).matmul(&self.g.mat_at(j))).collect();
        Field::from_mats(self.dim, &gm)
    }

    pub fn raise_both(&self, f: &Field<T>) -> Vec<Mat<T>> {
        (0..self.nodes).map(|j| self.g_inv[j].matmul(&f.mat_at(j)).matmul(&self.g_inv[j])).collect()
    }

    pub fn mixed_weingarten(&self) -> Field<T> {
        self.raise_last(&self.h)
    }

    fn compute_speed_fields(&self) -> SpeedFields<T> {
        let d = self.dim;
        let mut alpha = Field::zeros(2, d, self.nodes);
        let mut gamma = Field::zeros(2, d, self.nodes);
        let mut beta = Vec::with_capacity(self.nodes);
        let mut theta = Vec::with_capacity(self.nodes);
        for node in 0..self.nodes {
            let f = self.speed_value[node];
            let df = self.grad_speed.vector_at(node);
            let b = &self.b[node];
            for i in 0..d {
                for j in 0..d {
                    let c = i * d + j;
                    alpha.comps[c][node] = self.hess_speed.comps[c][node] + f * self.h2[node][(i, j)];
                    let mut s = T::zero();
                    for k in 0..d {
                        for l in 0..d {
                            s += b[(k, l)] * df[k] * self.nabla_h.comps[(l * d + i) * d + j][node];
                        }
                    }
                    gamma.comps[c][node] = s;
                }
            }
            beta.push(self.dot_f[node].dot(&alpha.mat_at(node)));
            let mut th = T::zero();
            for i in 0..d {
                for j in 0..d {
                    th += b[(i, j)] * df[i] * df[j];
                }
            }
            theta.push(th);
        }
        let eta = alpha.sub(&gamma);
        SpeedFields { alpha, gamma, eta, beta, theta }
    }

    pub fn kappa_min(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, k) in self.kappa.iter().enumerate() {
            for x in k {
                if x.to_f64() < best.1 {
                    best = (j, x.to_f64());
                }
            }
        }
        best
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa.iter().flatten().fold(f64::NEG_INFINITY, |m, x| m.max(x.to_f64()))
    }

    /// Radius of a geodesic sphere, or the mean distance of the markers from
    /// their centre.
    pub fn radius_estimate(&self) -> f64 {
        match &self.repr {
            Representation::GeodesicSphere { radius, .. } => radius.to_f64(),
            Representation::ClosedCurve { .. } => markers::mean_radius(self.ambient, &self.frame.as_ref().expect("marker frame").points, false),
            Representation::Axisymmetric { .. } => markers::mean_radius(self.ambient, &self.frame.as_ref().expect("marker frame").points, true),
        }
    }

    /// Minimal chordal marker spacing (zero for a geodesic sphere).
    pub fn min_spacing(&self) -> f64 {
        match &self.frame {
            None => 0.0,
            Some(mf) => spacings(&mf.points, self.grid.map(|g| g.kind) == Some(GridKind::Periodic))
                .iter()
                .fold(f64::INFINITY, |m, x| m.min(x.to_f64())),
        }
    }

    /// The model coordinate `b` of each marker, a non-trivial smooth test function.
    pub fn axis_coordinate(&self) -> Vec<T> {
        match &self.frame {
            Some(mf) => mf.points.iter().map(|p| p[1]).collect(),
            None => vec![T::zero(); self.nodes],
        }
    }

    pub fn gauss_codazzi_residual(&self) -> GaussCodazziReport {
        let d = self.dim;
        let c = r::<T>(self.ambient.c());
        let mut gauss = 0.0f64;
        let mut scale = 0.0f64;
        if self.grid.is_none() {
            // intrinsic curvature of a geodesic sphere is 1/sn^2 in every plane
            if let Representation::GeodesicSphere { radius, .. } = &self.repr {
                let k = self.ambient.sphere_curvature(*radius);
                let s = self.ambient.sn(*radius);
                let model = c + k * k;
                gauss = (model - T::one() / (s * s)).abs().to_f64();
                scale = model.to_f64();
            }
            return GaussCodazziReport { gauss, codazzi: 0.0, gauss_scale: scale };
        }
        // dGamma is formed pointwise from derivatives of the metric: the symbols
        // themselves are singular on the rotation axis and must not be differenced.
        let grid = self.grid.expect("grid");
        let mut dg = vec![vec![vec![T::zero(); self.nodes]; d * d]; d];
        let mut ddg = vec![vec![vec![vec![T::zero(); self.nodes]; d * d]; d]; d];
        for comp in 0..d * d {
            let even = is_even(d, 2, comp);
            dg[0][comp] = grid.d1(&self.g.comps[comp], even);
            ddg[0][0][comp] = grid.d2(&self.g.comps[comp], even);
        }
        let mut dgam = vec![vec![vec![T::zero(); self.nodes]; d * d * d]; d];
        let half = r::<T>(0.5);
        for node in 0..self.nodes {
            let gi = &self.g_inv[node];
            for i in 0..d {
                // d_i g^{km} = -g^{ka} d_i g_ab g^{bm}
                let dginv = Mat::from_fn(d, |k, m| {
                    let mut s = T::zero();
                    for a in 0..d {
                        for b in 0..d {
                            s -= gi[(k, a)] * dg[i][a * d + b][node] * gi[(b, m)];
                        }
                    }
                    s
                });
                for k in 0..d {
                    for j in 0..d {
                        for l in 0..d {
                            let mut s = T::zero();
                            for m in 0..d {
                                let first = dg[j][l * d + m][node] + dg[l][j * d + m][node] - dg[m][j * d + l][node];
                                let second = ddg[i][j][l * d + m][node] + ddg[i][l][j * d + m][node]
                                    - ddg[i][m][j * d + l][node];
                                s += dginv[(k, m)] * first + gi[(k, m)] * second;
                            }
                            dgam[i][(k * d + j) * d + l][node] = half * s;
                        }
                    }
                }
            }
        }
        let gi = |l: usize, i: usize, j: usize| (l * d + i) * d + j;
        for node in 0..self.nodes {
            let gam = &self.christoffel[node];
            let g = self.g.mat_at(node);
            let h = self.h.mat_at(node);
            // R_{ijk}^l
            let rstd = |i: usize, j: usize, k: usize, l: usize| {
                let mut v = dgam[i][gi(l, j, k)][node] - dgam[j][gi(l, i, k)][node];
                for m in 0..d {
                    v += gam[gi(l, i, m)] * gam[gi(m, j, k)] - gam[gi(l, j, m)] * gam[gi(m, i, k)];
                }
                v
            };
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let mut lhs = T::zero();
                            for m in 0..d {
                                lhs += rstd(i, j, l, m) * g[(m, k)];
                            }
                            let model = c * (g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)])
                                + h[(i, k)] * h[(j, l)]
                                - h[(i, l)] * h[(j, k)];
                            gauss = gauss.max((lhs - model).abs().to_f64());
                            scale = scale.max(model.abs().to_f64());
                        }
                    }
                }
            }
        }
        let mut codazzi = 0.0f64;
        for node in 0..self.nodes {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let a = self.nabla_h.comps[(k * d + i) * d + j][node];
                        let b = self.nabla_h.comps[(i * d + k) * d + j][node];
                        codazzi = codazzi.max((a - b).abs().to_f64());
                    }
                }
            }
        }
        GaussCodazziReport { gauss, codazzi, gauss_scale: scale }
    }
}

/// `speed_fields(state)`
pub fn speed_fields<T: Real>(state: &SurfaceState<T>) -> SpeedFields<T> {
    state.fields.clone()
}

/// `box_op(state, T)`
pub fn box_op<T: Real>(state: &SurfaceState<T>, f: &Field<T>) -> Field<T> {
    state.box_op(f)
}

/// `covariant_hessian(state, phi)`
pub fn covariant_hessian<T: Real>(state: &SurfaceState<T>, phi: &[T]) -> Field<T> {
    state.covariant_hessian(phi)
}

/// `gauss_codazzi_residual(state)`
pub fn gauss_codazzi_residual<T: Real>(state: &SurfaceState<T>) -> GaussCodazziReport {
    state.gauss_codazzi_residual()
}
