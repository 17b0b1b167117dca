//! Covariant tensor fields sampled on the nodes of a grid.

use crate::linalg::Mat;
use crate::real::Real;

/// Covariant tensor field of rank `rank` on a `dim`-dimensional surface.
/// Component-major storage: `comps[c][node]`, where the flat component index
/// of the multi-index `(i1, ..., ir)` is `((i1 * dim + i2) * dim + ...) + ir`.
#[derive(Clone, Debug)]
pub struct Field<T> {
    pub rank: usize,
    pub dim: usize,
    pub comps: Vec<Vec<T>>,
}

pub(crate) fn multi_index(dim: usize, rank: usize, mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for s in (0..rank).rev() {
        idx[s] = flat % dim;
        flat /= dim;
    }
    idx
}

pub(crate) fn flat_index(dim: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Components with an even number of `u` indices are even under reflection
/// through the rotation axis.
pub(crate) fn is_even(dim: usize, rank: usize, flat: usize) -> bool {
    multi_index(dim, rank, flat).iter().filter(|&&i| i == 0).count() % 2 == 0
}

impl<T: Real> Field<T> {
    pub fn zeros(rank: usize, dim: usize, nodes: usize) -> Self {
        Field { rank, dim, comps: vec![vec![T::zero(); nodes]; dim.pow(rank as u32)] }
    }

    pub fn scalar(values: Vec<T>) -> Self {
        let dim = 1;
        Field { rank: 0, dim, comps: vec![values] }
    }

    /// Scalar field on a surface of dimension `dim`.
    pub fn scalar_on(dim: usize, values: Vec<T>) -> Self {
        Field { rank: 0, dim, comps: vec![values] }
    }

    pub fn nodes(&self) -> usize {
        self.comps[0].len()
    }

    pub fn values(&self) -> &[T] {
        &self.comps[0]
    }

    /// Rank-1 field from per-node vectors.
    pub fn from_vectors(dim: usize, v: &[Vec<T>]) -> Self {
        let mut f = Self::zeros(1, dim, v.len());
        for (node, x) in v.iter().enumerate() {
            for i in 0..dim {
                f.comps[i][node] = x[i];
            }
        }
        f
    }

    /// Rank-2 field from per-node matrices.
    pub fn from_mats(dim: usize, m: &[Mat<T>]) -> Self {
        let mut f = Self::zeros(2, dim, m.len());
        for (node, x) in m.iter().enumerate() {
            for c in 0..dim * dim {
                f.comps[c][node] = x.a[c];
            }
        }
        f
    }

    pub fn vector_at(&self, node: usize) -> Vec<T> {
        self.comps.iter().map(|c| c[node]).collect()
    }

    pub fn mat_at(&self, node: usize) -> Mat<T> {
        debug_assert_eq!(self.rank, 2);
        Mat { n: self.dim, a: self.vector_at(node) }
    }

    pub fn get(&self, idx: &[usize], node: usize) -> T {
        self.comps[flat_index(self.dim, idx)][node]
    }

    pub fn sub(&self, o: &Self) -> Self {
        let comps = self
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x - y).collect())
            .collect();
        Field { rank: self.rank, dim: self.dim, comps }
    }

    pub fn add(&self, o: &Self) -> Self {
        let comps = self
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x + y).collect())
            .collect();
        Field { rank: self.rank, dim: self.dim, comps }
    }

    pub fn scale(&self, s: T) -> Self {
        let comps = self.comps.iter().map(|a| a.iter().map(|&x| x * s).collect()).collect();
        Field { rank: self.rank, dim: self.dim, comps }
    }

    /// Node-major flattening, used by residual norms and time differences.
    pub fn flatten(&self) -> Vec<T> {
        let nodes = self.nodes();
        let mut out = Vec::with_capacity(nodes * self.comps.len());
        for node in 0..nodes {
            for c in &self.comps {
                out.push(c[node]);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, x| m.max(x.to_f64().abs()))
    }
}
