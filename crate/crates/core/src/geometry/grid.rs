//! Uniform parameter grids with sixth-order central differences.
//!
//! Closed curves use a periodic grid on `[0, 2pi)`. Axisymmetric profiles use
//! a cell-centred grid on `(0, pi)` so no node sits on the rotation axis; the
//! values beyond each pole are supplied by reflection with the parity of the
//! component (even or odd under `u -> -u` and `u -> 2pi - u`).

use crate::real::{r, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Periodic,
    Reflective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub kind: GridKind,
    pub nodes: usize,
}

impl Grid {
    pub fn periodic(nodes: usize) -> Self {
        Grid { kind: GridKind::Periodic, nodes }
    }

    pub fn reflective(nodes: usize) -> Self {
        Grid { kind: GridKind::Reflective, nodes }
    }

    pub fn spacing<T: Real>(&self) -> T {
        match self.kind {
            GridKind::Periodic => r::<T>(2.0) * T::pi() / r(self.nodes as f64),
            GridKind::Reflective => T::pi() / r(self.nodes as f64),
        }
    }

    /// Parameter value of node `j`.
    pub fn coordinate<T: Real>(&self, j: usize) -> T {
        let h = self.spacing::<T>();
        match self.kind {
            GridKind::Periodic => h * r(j as f64),
            GridKind::Reflective => h * r(j as f64 + 0.5),
        }
    }

    #[inline]
    fn fetch<T: Real>(&self, v: &[T], j: isize, even: bool) -> T {
        let n = self.nodes as isize;
        match self.kind {
            GridKind::Periodic => v[j.rem_euclid(n) as usize],
            GridKind::Reflective => {
                if j < 0 {
                    let x = v[(-1 - j) as usize];
                    if even {
                        x
                    } else {
                        -x
                    }
                } else if j >= n {
                    let x = v[(2 * n - 1 - j) as usize];
                    if even {
                        x
                    } else {
                        -x
                    }
                } else {
                    v[j as usize]
                }
            }
        }
    }

    /// First derivative, `(-f[-3] + 9 f[-2] - 45 f[-1] + 45 f[1] - 9 f[2] + f[3]) / 60h`.
    pub fn d1<T: Real>(&self, v: &[T], even: bool) -> Vec<T> {
        let c = T::one() / (r::<T>(60.0) * self.spacing::<T>());
        (0..self.nodes as isize)
            .map(|j| {
                let f = |o: isize| self.fetch(v, j + o, even);
                (f(3) - f(-3) + r::<T>(9.0) * (f(-2) - f(2)) + r::<T>(45.0) * (f(1) - f(-1))) * c
            })
            .collect()
    }

    /// Second derivative, `(2 f[-3] - 27 f[-2] + 270 f[-1] - 490 f[0] + 270 f[1] - 27 f[2] + 2 f[3]) / 180h^2`.
    pub fn d2<T: Real>(&self, v: &[T], even: bool) -> Vec<T> {
        let h = self.spacing::<T>();
        let c = T::one() / (r::<T>(180.0) * h * h);
        (0..self.nodes as isize)
            .map(|j| {
                let f = |o: isize| self.fetch(v, j + o, even);
                (r::<T>(2.0) * (f(-3) + f(3)) - r::<T>(27.0) * (f(-2) + f(2)) + r::<T>(270.0) * (f(-1) + f(1)) - r::<T>(490.0) * f(0)) * c
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn periodic_derivatives_are_sixth_order() {
        let mut errs = vec![];
        for &n in &[32usize, 64] {
            let g = Grid::periodic(n);
            let v: Vec<f64> = (0..n).map(|j| (g.coordinate::<f64>(j)).sin().exp()).collect();
            let exact: Vec<f64> =
                (0..n).map(|j| g.coordinate::<f64>(j)).map(|u| u.cos() * u.sin().exp()).collect();
            errs.push(max_err(&g.d1(&v, true), &exact));
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 5.8, "order {order}");
    }

    #[test]
    fn reflective_derivatives_respect_parity() {
        let n = 48;
        let g = Grid::reflective(n);
        let us: Vec<f64> = (0..n).map(|j| g.coordinate(j)).collect();
        // odd function about both ends of (0, pi)
        let odd: Vec<f64> = us.iter().map(|u| u.sin() * (1.0 + 0.3 * (2.0 * u).cos())).collect();
        let d_exact: Vec<f64> =
            us.iter().map(|u| u.cos() * (1.0 + 0.3 * (2.0 * u).cos()) - 0.6 * u.sin() * (2.0 * u).sin()).collect();
        assert!(max_err(&g.d1(&odd, false), &d_exact) < 1e-4);
        let even: Vec<f64> = us.iter().map(|u| (2.0 * u).cos()).collect();
        let dd: Vec<f64> = us.iter().map(|u| -4.0 * (2.0 * u).cos()).collect();
        assert!(max_err(&g.d2(&even, true), &dd) < 1e-4);
    }
}
