//! Subjects and right-hand sides of the evolution identities.
//!
//! Tensors are compared component by component in the coordinates of the
//! marker labels; flattening is node-major ([`Field::flatten`]).

use crate::error::{Error, Result};
use crate::geometry::{Field, SurfaceState};
use crate::harnack::{mean_derivatives, remainder_r, Zeta};
use crate::linalg::Mat;
use crate::real::{r, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Identity {
    Metric,
    InverseMetric,
    Sff,
    Weingarten,
    SffBox,
    WeingartenBox,
    InverseSff,
    SquaredSff,
    Speed,
    Christoffel,
    GradBoxCommutator,
    TimeBoxCommutator,
    GradSpeed,
    Beta,
    Theta,
    Chi2,
    Chi3,
    Chi1,
}

impl Identity {
    pub const ALL: [Identity; 18] = [
        Identity::Metric,
        Identity::InverseMetric,
        Identity::Sff,
        Identity::Weingarten,
        Identity::SffBox,
        Identity::WeingartenBox,
        Identity::InverseSff,
        Identity::SquaredSff,
        Identity::Speed,
        Identity::Christoffel,
        Identity::GradBoxCommutator,
        Identity::TimeBoxCommutator,
        Identity::GradSpeed,
        Identity::Beta,
        Identity::Theta,
        Identity::Chi2,
        Identity::Chi3,
        Identity::Chi1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Identity::Metric => "metric",
            Identity::InverseMetric => "inverse-metric",
            Identity::Sff => "sff",
            Identity::Weingarten => "weingarten",
            Identity::SffBox => "sff-box",
            Identity::WeingartenBox => "weingarten-box",
            Identity::InverseSff => "inverse-sff",
            Identity::SquaredSff => "squared-sff",
            Identity::Speed => "speed",
            Identity::Christoffel => "christoffel",
            Identity::GradBoxCommutator => "grad-box-commutator",
            Identity::TimeBoxCommutator => "time-box-commutator",
            Identity::GradSpeed => "grad-speed",
            Identity::Beta => "beta",
            Identity::Theta => "theta",
            Identity::Chi2 => "chi2",
            Identity::Chi3 => "chi3",
            Identity::Chi1 => "chi1",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown identity '{s}'")))
    }

    /// Whether the identity is defined for speeds of this kind (`chi3` needs `F = F(H)`).
    pub fn applies_to(&self, mean_speed: bool) -> bool {
        *self != Identity::Chi3 || mean_speed
    }
}

/// Constants entering the Harnack identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarnackParams {
    pub delta: f64,
    pub zeta: Zeta,
}

fn quad<T: Real>(m: &Mat<T>, v: &[T]) -> T {
    bil(m, v, v)
}

fn bil<T: Real>(m: &Mat<T>, u: &[T], v: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..u.len() {
        for j in 0..v.len() {
            s += u[i] * m[(i, j)] * v[j];
        }
    }
    s
}

fn mat_vec<T: Real>(m: &Mat<T>, v: &[T]) -> Vec<T> {
    (0..m.n).map(|i| (0..m.n).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// `tr(X F' Y b)`, i.e. `b^{il} F^{jk} X_ij Y_kl`.
pub(crate) fn tr_xfyb<T: Real>(x: &Mat<T>, f: &Mat<T>, y: &Mat<T>, b: &Mat<T>) -> T {
    x.matmul(f).matmul(y).matmul(b).trace()
}

/// Per-node view of the quantities every right-hand side uses.
struct Node<T: Real> {
    f: T,
    g: Mat<T>,
    gi: Mat<T>,
    h: Mat<T>,
    h2: Mat<T>,
    b: Mat<T>,
    df: Mat<T>,
    tr: T,
    hess: Mat<T>,
    alpha: Mat<T>,
    gamma: Mat<T>,
    eta: Mat<T>,
    grad: Vec<T>,
    /// `nabla_i h` for each `i`
    dh: Vec<Mat<T>>,
    beta: T,
    theta: T,
}

impl<T: Real> Node<T> {
    fn new(st: &SurfaceState<T>, j: usize) -> Self {
        let d = st.dim;
        let dh = (0..d)
            .map(|i| Mat::from_fn(d, |k, l| st.nabla_h.comps[(i * d + k) * d + l][j]))
            .collect();
        Node {
            f: st.speed_value[j],
            g: st.g.mat_at(j),
            gi: st.g_inv[j].clone(),
            h: st.h.mat_at(j),
            h2: st.h2[j].clone(),
            b: st.b[j].clone(),
            df: st.dot_f[j].clone(),
            tr: st.tr_dot_f[j],
            hess: st.hess_speed.mat_at(j),
            alpha: st.fields.alpha.mat_at(j),
            gamma: st.fields.gamma.mat_at(j),
            eta: st.fields.eta.mat_at(j),
            grad: st.grad_speed.vector_at(j),
            dh,
            beta: st.fields.beta[j],
            theta: st.fields.theta[j],
        }
    }

    fn fh(&self) -> T {
        self.df.dot(&self.h)
    }

    fn fh2(&self) -> T {
        self.df.dot(&self.h2)
    }

    fn grad_sq(&self) -> T {
        quad(&self.gi, &self.grad)
    }

    /// `b^{ir} b^j_r`
    fn bgb(&self) -> Mat<T> {
        self.b.matmul(&self.g).matmul(&self.b)
    }

    /// `2 F^{ij} h^k_i nabla_k F nabla_j F`
    fn weingarten_grad(&self) -> T {
        r::<T>(2.0) * bil(&self.gi.matmul(&self.h).matmul(&self.df), &self.grad, &self.grad)
    }
}

fn nodes<T: Real>(st: &SurfaceState<T>) -> Vec<Node<T>> {
    (0..st.nodes).map(|j| Node::new(st, j)).collect()
}

fn flat_mats<T: Real>(dim: usize, m: &[Mat<T>]) -> Vec<T> {
    Field::from_mats(dim, m).flatten()
}

fn flat_vecs<T: Real>(dim: usize, v: &[Vec<T>]) -> Vec<T> {
    Field::from_vectors(dim, v).flatten()
}

fn box_mats<T: Real>(st: &SurfaceState<T>, m: &[Mat<T>]) -> Vec<Mat<T>> {
    let b = st.box_op(&Field::from_mats(st.dim, m));
    (0..st.nodes).map(|j| b.mat_at(j)).collect()
}

fn christoffel_flat<T: Real>(st: &SurfaceState<T>) -> Vec<T> {
    st.christoffel.iter().flatten().copied().collect()
}

fn chi1_values<T: Real>(st: &SurfaceState<T>, prm: &HarnackParams) -> Vec<T> {
    let (t, dl, c) = (r::<T>(st.t), r::<T>(prm.delta), r::<T>(st.ambient.c()));
    (0..st.nodes)
        .map(|j| {
            let (f, tr) = (st.speed_value[j], st.tr_dot_f[j]);
            let dtf = st.fields.beta[j] + c * f * tr;
            t * (dtf - st.fields.theta[j]) + dl * f
        })
        .collect()
}

fn chi2_values<T: Real>(st: &SurfaceState<T>, prm: &HarnackParams) -> Vec<T> {
    let (t, dl) = (r::<T>(st.t), r::<T>(prm.delta));
    (0..st.nodes).map(|j| t * (st.fields.beta[j] - st.fields.theta[j]) + dl * st.speed_value[j]).collect()
}

fn chi3_values<T: Real>(st: &SurfaceState<T>, prm: &HarnackParams) -> Vec<T> {
    let ct = r::<T>(st.ambient.c() * st.t);
    chi2_values(st, prm).into_iter().zip(&st.speed_value).map(|(x, &f)| x + ct * prm.zeta.value(f)).collect()
}

/// The quantity whose Lagrangian time derivative is the left-hand side.
pub(crate) fn subject<T: Real>(st: &SurfaceState<T>, id: Identity, prm: &HarnackParams) -> Vec<T> {
    let d = st.dim;
    match id {
        Identity::Metric => st.g.flatten(),
        Identity::InverseMetric => flat_mats(d, &st.g_inv),
        Identity::Sff | Identity::SffBox => st.h.flatten(),
        Identity::Weingarten | Identity::WeingartenBox => st.mixed_weingarten().flatten(),
        Identity::InverseSff => flat_mats(d, &st.b),
        Identity::SquaredSff => flat_mats(d, &st.h2),
        Identity::Speed => st.speed_value.clone(),
        Identity::Christoffel => christoffel_flat(st),
        Identity::GradSpeed => st.grad_speed.flatten(),
        Identity::Beta => st.fields.beta.clone(),
        Identity::Theta => st.fields.theta.clone(),
        Identity::Chi1 => chi1_values(st, prm),
        Identity::Chi2 => chi2_values(st, prm),
        Identity::Chi3 => chi3_values(st, prm),
        Identity::GradBoxCommutator | Identity::TimeBoxCommutator => {
            unreachable!("commutators have no single subject")
        }
    }
}

/// `sff-box` bracket without the final index raising.
fn sff_box_lower<T: Real>(st: &SurfaceState<T>, nd: &[Node<T>], sign: f64) -> Vec<Mat<T>> {
    let d = st.dim;
    let c = r::<T>(st.ambient.c());
    let hs: Vec<Mat<T>> = nd.iter().map(|x| x.h.clone()).collect();
    let bh = box_mats(st, &hs);
    nd.iter()
        .enumerate()
        .map(|(j, x)| {
            let q = Mat::from_fn(d, |a, b| st.jets[j].second(&x.dh[a], &x.dh[b]));
            let k = x.fh() + r::<T>(sign) * x.f;
            bh[j]
                .add(&x.h.scale(x.fh2()))
                .sub(&x.h2.scale(k))
                .add(&q)
                .add(&x.g.scale(c * (x.f + x.fh())).sub(&x.h.scale(c * x.tr)))
        })
        .collect()
}

/// `R_beta` and `R_theta` at every node.
fn r_beta_theta<T: Real>(st: &SurfaceState<T>, nd: &[Node<T>]) -> (Vec<T>, Vec<T>) {
    let box_tr = st.box_scalar(&st.tr_dot_f);
    let grad_tr = st.gradient(&st.tr_dot_f);
    let two = r::<T>(2.0);
    let mut rb = Vec::with_capacity(st.nodes);
    let mut rt = Vec::with_capacity(st.nodes);
    for (j, x) in nd.iter().enumerate() {
        let jet = &st.jets[j];
        let dtr = grad_tr.vector_at(j);
        rb.push(
            x.f * box_tr[j] + two * bil(&x.df, &dtr, &x.grad) + x.f * jet.second(&x.alpha, &x.g)
                + two * x.f * x.f * x.fh(),
        );
        rt.push(
            -(x.fh() + x.f) * quad(&x.bgb(), &x.grad)
                + two * quad(&x.b.matmul(&x.g).matmul(&x.df), &x.grad)
                + two * x.f * jet.second(&x.g, &x.gamma),
        );
    }
    (rb, rt)
}

/// `(F^{ij,kl} + 2 b^{il} F^{jk} - F^{ij} F^{kl} / (delta F)) eta_ij eta_kl`
fn harnack_form<T: Real>(st: &SurfaceState<T>, j: usize, x: &Node<T>, delta: T) -> T {
    let fe = x.df.dot(&x.eta);
    st.jets[j].second(&x.eta, &x.eta) + r::<T>(2.0) * tr_xfyb(&x.eta, &x.df, &x.eta, &x.b) - fe * fe / (delta * x.f)
}

/// Right-hand side assembled from the state at the centre time.
pub(crate) fn rhs<T: Real>(st: &SurfaceState<T>, id: Identity, prm: &HarnackParams) -> Result<Vec<T>> {
    let d = st.dim;
    let c = r::<T>(st.ambient.c());
    let two = r::<T>(2.0);
    let nd = nodes(st);
    let per_mat = |f: &dyn Fn(usize, &Node<T>) -> Mat<T>| -> Vec<T> {
        let m: Vec<Mat<T>> = nd.iter().enumerate().map(|(j, x)| f(j, x)).collect();
        flat_mats(d, &m)
    };
    let out = match id {
        Identity::Metric => per_mat(&|_, x| x.h.scale(-two * x.f)),
        Identity::InverseMetric => per_mat(&|_, x| x.gi.matmul(&x.h).matmul(&x.gi).scale(two * x.f)),
        Identity::Sff => per_mat(&|_, x| x.hess.sub(&x.h2.scale(x.f)).add(&x.g.scale(c * x.f))),
        Identity::Weingarten => per_mat(&|_, x| x.alpha.matmul(&x.gi).add(&Mat::identity(d).scale(c * x.f))),
        Identity::SffBox => flat_mats(d, &sff_box_lower(st, &nd, 1.0)),
        Identity::WeingartenBox => {
            let low = sff_box_lower(st, &nd, -1.0);
            let m: Vec<Mat<T>> = low.iter().zip(&nd).map(|(l, x)| l.matmul(&x.gi)).collect();
            flat_mats(d, &m)
        }
        Identity::InverseSff => {
            let bb = st.raise_both(&st.box_op(&st.lower_both(&st.b)));
            per_mat(&|j, x| {
                let jet = &st.jets[j];
                let m = Mat::from_fn(d, |a, b| {
                    two * tr_xfyb(&x.dh[a], &x.b, &x.dh[b], &x.df) + jet.second(&x.dh[a], &x.dh[b])
                });
                bb[j]
                    .sub(&x.b.scale(x.fh2()))
                    .add(&x.gi.scale(x.fh() + x.f))
                    .sub(&x.b.matmul(&m).matmul(&x.b))
                    .sub(&x.bgb().scale(c * (x.f + x.fh())).sub(&x.b.scale(c * x.tr)))
            })
        }
        Identity::SquaredSff => per_mat(&|_, x| {
            let a = x.hess.matmul(&x.gi).matmul(&x.h);
            a.add(&a.transpose()).add(&x.h.scale(two * c * x.f))
        }),
        Identity::Speed => nd.iter().map(|x| x.beta + c * x.f * x.tr).collect(),
        Identity::Christoffel => {
            let mut out = Vec::with_capacity(st.nodes * d * d * d);
            for x in &nd {
                for k in 0..d {
                    for i in 0..d {
                        for jj in 0..d {
                            let mut s = T::zero();
                            for l in 0..d {
                                s += x.gi[(k, l)]
                                    * (-x.f * x.dh[l][(i, jj)] - x.h[(l, i)] * x.grad[jj] - x.h[(l, jj)] * x.grad[i]
                                        + x.h[(i, jj)] * x.grad[l]);
                            }
                            out.push(s);
                        }
                    }
                }
            }
            out
        }
        Identity::GradSpeed => {
            let box_grad = st.box_op(&st.grad_speed);
            let grad_tr = st.gradient(&st.tr_dot_f);
            let v: Vec<Vec<T>> = nd
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let jet = &st.jets[j];
                    let hfh = mat_vec(&x.h.matmul(&x.df).matmul(&x.h).matmul(&x.gi), &x.grad);
                    let hg = mat_vec(&x.h.matmul(&x.gi), &x.grad);
                    let gf = mat_vec(&x.g.matmul(&x.df), &x.grad);
                    (0..d)
                        .map(|i| {
                            box_grad.comps[i][j]
                                + jet.second(&x.dh[i], &x.alpha)
                                + two * x.f * x.df.matmul(&x.h).matmul(&x.gi).matmul(&x.dh[i]).trace()
                                + x.fh2() * x.grad[i]
                                + hfh[i]
                                - x.fh() * hg[i]
                                + c * (gf[i] + x.f * grad_tr.comps[i][j])
                        })
                        .collect()
                })
                .collect();
            flat_vecs(d, &v)
        }
        Identity::Beta => {
            let bx = st.box_scalar(&st.fields.beta);
            let (rb, _) = r_beta_theta(st, &nd);
            nd.iter()
                .enumerate()
                .map(|(j, x)| {
                    bx[j] + (x.fh2() + c * x.tr) * x.beta
                        + (x.f - x.fh()) * x.grad_sq()
                        + st.jets[j].second(&x.alpha, &x.alpha)
                        + x.weingarten_grad()
                        + two * (two * x.f * tr_xfyb(&x.hess, &x.df, &x.h2, &x.b)
                            + x.f * x.f * tr_xfyb(&x.h2, &x.df, &x.h2, &x.b))
                        + c * rb[j]
                })
                .collect()
        }
        Identity::Theta => {
            let bx = st.box_scalar(&st.fields.theta);
            let (_, rt) = r_beta_theta(st, &nd);
            nd.iter()
                .enumerate()
                .map(|(j, x)| {
                    let jet = &st.jets[j];
                    let og = jet.second(&x.gamma, &x.gamma) - two * jet.second(&x.alpha, &x.gamma);
                    let ob = tr_xfyb(&x.gamma, &x.df, &x.gamma, &x.b) - two * tr_xfyb(&x.alpha, &x.df, &x.gamma, &x.b)
                        + tr_xfyb(&x.hess, &x.df, &x.hess, &x.b);
                    bx[j] + (x.fh2() + c * x.tr) * x.theta + (x.f - x.fh()) * x.grad_sq() + x.weingarten_grad()
                        - og
                        - two * ob
                        + c * rt[j]
                })
                .collect()
        }
        Identity::Chi2 => {
            let chi = chi2_values(st, prm);
            let bx = st.box_scalar(&chi);
            let rr = remainder_r(st);
            let (t, dl) = (r::<T>(st.t), r::<T>(prm.delta));
            nd.iter()
                .enumerate()
                .map(|(j, x)| {
                    let lin = (x.beta - x.theta) / (dl * x.f) + x.fh2() + c * x.tr;
                    bx[j] + lin * chi[j] + t * harnack_form(st, j, x, dl) + t * c * rr[j]
                })
                .collect()
        }
        Identity::Chi3 => {
            if !st.speed.f.is_mean() {
                return Err(Error::WrongSpeed("f = mean curvature"));
            }
            let chi = chi3_values(st, prm);
            let chi2 = chi2_values(st, prm);
            let bx = st.box_scalar(&chi);
            let (t, dl) = (r::<T>(st.t), r::<T>(prm.delta));
            let n = r::<T>(d as f64);
            let z = prm.zeta;
            nd.iter()
                .enumerate()
                .map(|(j, x)| {
                    let hm: T = st.kappa[j].iter().copied().sum();
                    let (f1, f2, f3) = mean_derivatives(&st.speed, hm);
                    let f = x.f;
                    let (z0, z1, z2) = (z.value(f), z.d1(f), z.d2(f));
                    let lin = (x.beta - x.theta) / (dl * f) + x.fh2() + c * x.tr;
                    let grad_coef =
                        n * (two * f2 / f1 - f2 * f2 * f / (f1 * f1 * f1) + f3 * f / (f1 * f1)) - z2;
                    let brace = two * n * f2 * f / f1 * (x.beta - x.theta)
                        + (z1 - n * f2 * f / f1) * x.fh2() * f
                        + c * z1 * x.tr * f
                        + two * f * f * f1 * hm
                        + grad_coef * quad(&x.df, &x.grad)
                        + (f1 * hm + f) * quad(&x.bgb(), &x.grad)
                        - two * f1 * x.theta;
                    bx[j] + lin * chi2[j] + c * z0 + t * harnack_form(st, j, x, dl) + c * t * brace
                })
                .collect()
        }
        Identity::Chi1 => {
            let chi = chi1_values(st, prm);
            let bx = st.box_scalar(&chi);
            let (t, dl) = (r::<T>(st.t), r::<T>(prm.delta));
            nd.iter()
                .enumerate()
                .map(|(j, x)| {
                    let f = x.f;
                    let lin = (x.beta - x.theta) / (dl * f) + x.fh2() + c * (dl - T::one()) / dl * x.tr;
                    let shifted = x.eta.add(&x.g.scale(c * f));
                    let fe = x.df.dot(&x.eta);
                    let form = st.jets[j].second(&shifted, &shifted) + two * tr_xfyb(&x.eta, &x.df, &x.eta, &x.b)
                        - fe * fe / (dl * f);
                    let brace = two * f * f * x.fh() + (x.fh() + f) * quad(&x.bgb(), &x.grad)
                        - two * quad(&x.df.matmul(&x.g).matmul(&x.b), &x.grad);
                    bx[j] + lin * chi[j] + c * x.tr * f / dl * (t * c * x.tr + two * dl) + t * form + t * c * brace
                })
                .collect()
        }
        Identity::GradBoxCommutator | Identity::TimeBoxCommutator => {
            unreachable!("commutators are assembled separately")
        }
    };
    Ok(out)
}

/// Both sides of `nabla_i box f - (box nabla f)_i` at every node.
pub(crate) fn grad_box_sides<T: Real>(st: &SurfaceState<T>, phi: &[T]) -> (Vec<T>, Vec<T>) {
    let d = st.dim;
    let c = r::<T>(st.ambient.c());
    let lhs = st.gradient(&st.box_scalar(phi)).sub(&st.box_op(&st.gradient(phi))).flatten();
    let grad = st.gradient(phi);
    let hess = st.covariant_hessian(phi);
    let nd = nodes(st);
    let v: Vec<Vec<T>> = nd
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let gp = grad.vector_at(j);
            let hp = hess.mat_at(j);
            let a = mat_vec(&x.h.matmul(&x.df).matmul(&x.h).matmul(&x.gi), &gp);
            let hg = mat_vec(&x.h.matmul(&x.gi), &gp);
            let gf = mat_vec(&x.g.matmul(&x.df), &gp);
            (0..d)
                .map(|i| st.jets[j].second(&x.dh[i], &hp) + a[i] - x.fh() * hg[i] + c * gf[i] - c * x.tr * gp[i])
                .collect()
        })
        .collect();
    (lhs, flat_vecs(d, &v))
}

/// Right-hand side of `[dt, box] F` at the centre state.
pub(crate) fn time_box_rhs<T: Real>(st: &SurfaceState<T>) -> Vec<T> {
    let c = r::<T>(st.ambient.c());
    let two = r::<T>(2.0);
    nodes(st)
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let shifted = x.alpha.add(&x.g.scale(c * x.f));
            let outer = Mat::from_fn(st.dim, |a, b| x.grad[a] * x.grad[b]);
            let inner = x.hess.scale(x.f).add(&outer);
            st.jets[j].second(&x.hess, &shifted)
                + two * x.df.matmul(&x.h).matmul(&x.gi).matmul(&inner).trace()
                + (x.f - x.fh()) * x.grad_sq()
        })
        .collect()
}
