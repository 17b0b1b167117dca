//! Pointwise inequalities for curvature functions and seeded sample scans.
//!
//! `f_lemma_gap`, `urbas_gap` and `fb_dominance` work in the eigenframe, with
//! `g = I` and `h = diag(kappa)`. `harnack_form_gap` takes a general pair
//! `(g, h)`.

use super::identities::tr_xfyb;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::symfunc::{CurvatureFunction, SpectralJet, SpeedFunction};
use rand::{Rng, RngExt, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use rayon::prelude::*;
use std::fmt;

/// A gap value with the sum of magnitudes of the terms it is built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap {
    pub value: f64,
    pub scale: f64,
}

impl Gap {
    pub fn relative(&self) -> f64 {
        self.value / self.scale.max(f64::MIN_POSITIVE)
    }
}

fn unit(f: &CurvatureFunction) -> SpeedFunction {
    SpeedFunction { f: f.clone(), exponent: 1.0 }
}

fn eigen_jet(f: &CurvatureFunction, kappa: &[f64]) -> Result<SpectralJet<f64>> {
    SpectralJet::from_frame(&unit(f), kappa.to_vec(), Mat::identity(kappa.len()))
}

fn check_shape(kappa: &[f64], eta: &Mat<f64>) -> Result<()> {
    if eta.n != kappa.len() {
        return Err(Error::InvalidConfig(format!("eta is {0}x{0} but kappa has {1} entries", eta.n, kappa.len())));
    }
    Ok(())
}

/// `sum_ij f^i eta_ij^2 / kappa_j`
fn weighted_square(jet: &SpectralJet<f64>, eta: &Mat<f64>) -> f64 {
    let n = jet.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += jet.d1[i] * eta[(i, j)] * eta[(i, j)] / jet.kappa[j];
        }
    }
    s
}

fn d1_trace(jet: &SpectralJet<f64>, eta: &Mat<f64>) -> f64 {
    (0..jet.dim()).map(|i| jet.d1[i] * eta[(i, i)]).sum()
}

pub fn f_lemma_terms(f: &CurvatureFunction, kappa: &[f64], eta: &Mat<f64>) -> Result<Gap> {
    check_shape(kappa, eta)?;
    let jet = eigen_jet(f, kappa)?;
    let a = weighted_square(&jet, eta);
    let tr = d1_trace(&jet, eta);
    let d = tr * tr / jet.value;
    Ok(Gap { value: a - d, scale: a + d })
}

/// `(f^{ik} b^{jl} - f^{ij} f^{kl} / f) eta_ij eta_kl`
pub fn f_lemma_gap(f: &CurvatureFunction, kappa: &[f64], eta: &Mat<f64>) -> Result<f64> {
    Ok(f_lemma_terms(f, kappa, eta)?.value)
}

pub fn urbas_terms(f: &CurvatureFunction, kappa: &[f64], eta: &Mat<f64>) -> Result<Gap> {
    if !f.inverse_concave {
        return Err(Error::WrongSpeed("an inverse-concave curvature function"));
    }
    check_shape(kappa, eta)?;
    let jet = eigen_jet(f, kappa)?;
    let s = jet.second(eta, eta);
    let a = 2.0 * weighted_square(&jet, eta);
    let tr = d1_trace(&jet, eta);
    let d = 2.0 * tr * tr / jet.value;
    Ok(Gap { value: s + a - d, scale: s.abs() + a + d })
}

/// `(f^{ij,kl} + 2 f^{ik} b^{jl}) eta_ij eta_kl - 2 (f^{ij} eta_ij)^2 / f`
pub fn urbas_gap(f: &CurvatureFunction, kappa: &[f64], eta: &Mat<f64>) -> Result<f64> {
    Ok(urbas_terms(f, kappa, eta)?.value)
}

pub fn fb_dominance_terms(f: &CurvatureFunction, kappa: &[f64]) -> Result<Gap> {
    let jet = eigen_jet(f, kappa)?;
    let mut value = f64::INFINITY;
    let mut scale = 0.0f64;
    for i in 0..kappa.len() {
        let q = jet.value / kappa[i];
        value = value.min(q - jet.d1[i]);
        scale = scale.max(q);
    }
    Ok(Gap { value, scale })
}

/// Smallest eigenvalue of `f b - f'`, i.e. `min_i (f / kappa_i - f^i)`.
pub fn fb_dominance(f: &CurvatureFunction, kappa: &[f64]) -> Result<f64> {
    Ok(fb_dominance_terms(f, kappa)?.value)
}

struct FormParts {
    gap: Gap,
    f_jet: SpectralJet<f64>,
    b: Mat<f64>,
}

fn convex_jet(speed: &SpeedFunction, g: &Mat<f64>, h: &Mat<f64>) -> Result<SpectralJet<f64>> {
    SpectralJet::new(speed, g, h).map_err(|e| match e {
        Error::NonPositiveCurvature { index, kappa } => Error::ConvexityLost { node: index, kappa },
        other => other,
    })
}

fn form_parts(speed: &SpeedFunction, g: &Mat<f64>, h: &Mat<f64>, eta: &Mat<f64>, delta: f64) -> Result<FormParts> {
    if !speed.f.convex {
        return Err(Error::WrongSpeed("a convex curvature function"));
    }
    if speed.exponent <= 0.0 {
        return Err(Error::WrongSpeed("a contracting speed F = f^p"));
    }
    if g.n != h.n || eta.n != h.n {
        return Err(Error::InvalidConfig("g, h and eta must have the same size".into()));
    }
    let jet = convex_jet(speed, g, h)?;
    let f_jet = convex_jet(&unit(&speed.f), g, h)?;
    let b = h.spd_inverse().ok_or(Error::ConvexityLost { node: 0, kappa: 0.0 })?;
    let df = jet.dot_f();
    let s = jet.second(eta, eta);
    let c = 2.0 * tr_xfyb(eta, &df, eta, &b);
    let tr = df.dot(eta);
    let d = tr * tr / (delta * jet.value);
    Ok(FormParts { gap: Gap { value: s + c - d, scale: s.abs() + c.abs() + d.abs() }, f_jet, b })
}

pub fn harnack_form_terms(speed: &SpeedFunction, g: &Mat<f64>, h: &Mat<f64>, eta: &Mat<f64>, delta: f64) -> Result<Gap> {
    Ok(form_parts(speed, g, h, eta, delta)?.gap)
}

/// `(F^{ij,kl} + 2 b^{il} F^{jk} - F^{ij} F^{kl} / (delta F)) eta_ij eta_kl`
pub fn harnack_form_gap(speed: &SpeedFunction, g: &Mat<f64>, h: &Mat<f64>, eta: &Mat<f64>, delta: f64) -> Result<f64> {
    Ok(harnack_form_terms(speed, g, h, eta, delta)?.value)
}

/// Split of the Harnack form at `delta = p/(p+1)` into the second derivative
/// of `f` and the f-lemma gap, both scaled by `p f^{p-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub gap: Gap,
    /// `p f^{p-1} f^{ij,kl} eta_ij eta_kl`
    pub second: f64,
    /// `2 p f^{p-1} (f^{ik} b^{jl} - f^{ij} f^{kl} / f) eta_ij eta_kl`
    pub lemma: f64,
    /// `|gap - second - lemma| / scale`
    pub residual: f64,
}

pub fn harnack_form_decomposition(speed: &SpeedFunction, g: &Mat<f64>, h: &Mat<f64>, eta: &Mat<f64>) -> Result<Decomposition> {
    let p = speed.exponent;
    let parts = form_parts(speed, g, h, eta, p / (p + 1.0))?;
    let fj = &parts.f_jet;
    let w = p * fj.value.powf(p - 1.0);
    let df = fj.dot_f();
    let tr = df.dot(eta);
    let second = w * fj.second(eta, eta);
    let lemma = 2.0 * w * (tr_xfyb(eta, &df, eta, &parts.b) - tr * tr / fj.value);
    let scale = parts.gap.scale.max(second.abs() + lemma.abs());
    let residual = (parts.gap.value - second - lemma).abs() / scale.max(f64::MIN_POSITIVE);
    Ok(Decomposition { gap: parts.gap, second, lemma, residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Inequality {
    FLemma,
    HarnackForm,
    Urbas,
    FbDominance,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [Inequality::FLemma, Inequality::HarnackForm, Inequality::Urbas, Inequality::FbDominance];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::FLemma => "f-lemma",
            Inequality::HarnackForm => "harnack-form",
            Inequality::Urbas => "urbas",
            Inequality::FbDominance => "fb-dominance",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown inequality `{s}`")))
    }

    fn has_equality_case(self) -> bool {
        self != Inequality::FbDominance
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_SEED: u64 = 0x4841_524e_4143_4b31;
/// Gaps below `-SCAN_TOLERANCE * scale` count as violations.
pub const SCAN_TOLERANCE: f64 = 1e-10;
/// Bound on `|gap|` at the equality case `eta` proportional to `h`.
pub const WITNESS_TOLERANCE: f64 = 1e-8;
pub const KAPPA_RANGE: (f64, f64) = (1e-2, 1e2);
/// Samples per seeded task; fixed so results do not depend on the thread count.
pub const TASK_SIZE: usize = 1000;

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub inequality: Inequality,
    pub function: CurvatureFunction,
    /// Exponent of `F = f^p`; used by the Harnack form only.
    pub p: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
}

impl ScanConfig {
    pub fn new(inequality: Inequality, function: CurvatureFunction, n: usize) -> Self {
        ScanConfig { inequality, function, p: 0.5, n, samples: 100_000, seed: DEFAULT_SEED }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("scan dimension must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("scan needs at least one sample".into()));
        }
        match self.inequality {
            Inequality::HarnackForm => {
                SpeedFunction::contracting(self.function.clone(), self.p)?;
                if !self.function.convex {
                    return Err(Error::WrongSpeed("a convex curvature function"));
                }
            }
            Inequality::Urbas if !self.function.inverse_concave => {
                return Err(Error::WrongSpeed("an inverse-concave curvature function"))
            }
            _ => {}
        }
        Ok(())
    }
}

/// One random input. Eigenframe inequalities use `g = I`, `h = diag(kappa)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub kappa: Vec<f64>,
    pub g: Mat<f64>,
    pub h: Mat<f64>,
    pub eta: Mat<f64>,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub inequality: Inequality,
    pub function: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Smallest `gap / scale` over all samples.
    pub min_relative: f64,
    pub witness: Sample,
    pub witness_gap: Gap,
    pub violations: usize,
    /// Largest `|gap|` at `eta = s h`; `None` for `fb-dominance`.
    pub equality_max: Option<f64>,
}

impl ScanReport {
    pub fn passes(&self) -> bool {
        self.violations == 0
            && self.min_relative >= -SCAN_TOLERANCE
            && self.equality_max.is_none_or(|e| e <= WITNESS_TOLERANCE)
    }
}

fn gaussian(rng: &mut Xoshiro256PlusPlus) -> f64 {
    rng.sample(StandardNormal)
}

fn symmetric_gaussian(rng: &mut Xoshiro256PlusPlus, n: usize) -> Mat<f64> {
    let mut m = Mat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let x = gaussian(rng);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

fn draw(cfg: &ScanConfig, rng: &mut Xoshiro256PlusPlus) -> Sample {
    let n = cfg.n;
    let (lo, hi) = (KAPPA_RANGE.0.ln(), KAPPA_RANGE.1.ln());
    let kappa: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi).exp()).collect();
    if cfg.inequality != Inequality::HarnackForm {
        let eta = symmetric_gaussian(rng, n);
        return Sample { g: Mat::identity(n), h: Mat::diag(&kappa), kappa, eta };
    }
    // g = L L^T, h = L Q diag(kappa) Q^T L^T, so kappa are the eigenvalues of h relative to g
    let mut l = Mat::zeros(n);
    for i in 0..n {
        for j in 0..i {
            l[(i, j)] = 0.5 * gaussian(rng);
        }
        l[(i, i)] = (0.3 * gaussian(rng)).exp();
    }
    let (_, q) = symmetric_gaussian(rng, n).sym_eigen();
    let lq = l.matmul(&q);
    let g = l.matmul(&l.transpose());
    let h = lq.matmul(&Mat::diag(&kappa)).matmul(&lq.transpose());
    let h = Mat::from_fn(n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
    let eta = symmetric_gaussian(rng, n);
    Sample { kappa, g, h, eta }
}

fn evaluate(cfg: &ScanConfig, speed: &SpeedFunction, s: &Sample, eta: &Mat<f64>) -> Result<Gap> {
    match cfg.inequality {
        Inequality::FLemma => f_lemma_terms(&cfg.function, &s.kappa, eta),
        Inequality::Urbas => urbas_terms(&cfg.function, &s.kappa, eta),
        Inequality::FbDominance => fb_dominance_terms(&cfg.function, &s.kappa),
        Inequality::HarnackForm => harnack_form_terms(speed, &s.g, &s.h, eta, cfg.p / (cfg.p + 1.0)),
    }
}

struct Partial {
    min: Option<(Gap, Sample)>,
    violations: usize,
    equality_max: f64,
}

fn run_task(cfg: &ScanConfig, speed: &SpeedFunction, seed: u64, count: usize) -> Result<Partial> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut out = Partial { min: None, violations: 0, equality_max: 0.0 };
    for _ in 0..count {
        let s = draw(cfg, &mut rng);
        let gap = evaluate(cfg, speed, &s, &s.eta)?;
        if gap.relative() < -SCAN_TOLERANCE {
            out.violations += 1;
        }
        if out.min.as_ref().is_none_or(|(m, _)| gap.relative() < m.relative()) {
            out.min = Some((gap, s.clone()));
        }
        if cfg.inequality.has_equality_case() {
            let k = gaussian(&mut rng);
            let eq = evaluate(cfg, speed, &s, &s.h.scale(k))?;
            out.equality_max = out.equality_max.max(eq.value.abs());
        }
    }
    Ok(out)
}

/// Per-task seeds drawn from a SplitMix64 stream started at `seed`.
pub fn task_seeds(seed: u64, tasks: usize) -> Vec<u64> {
    let mut sm = SplitMix64::seed_from_u64(seed);
    (0..tasks).map(|_| sm.next_u64()).collect()
}

pub fn scan(cfg: &ScanConfig) -> Result<ScanReport> {
    cfg.validate()?;
    let speed = SpeedFunction { f: cfg.function.clone(), exponent: if cfg.p > 0.0 { cfg.p } else { 1.0 } };
    let tasks = cfg.samples.div_ceil(TASK_SIZE);
    let seeds = task_seeds(cfg.seed, tasks);
    let parts: Vec<Partial> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, &s)| run_task(cfg, &speed, s, TASK_SIZE.min(cfg.samples - k * TASK_SIZE)))
        .collect::<Result<_>>()?;
    let mut violations = 0;
    let mut equality_max = 0.0f64;
    let mut best: Option<(Gap, Sample)> = None;
    for p in parts {
        violations += p.violations;
        equality_max = equality_max.max(p.equality_max);
        if let Some((g, s)) = p.min {
            if best.as_ref().is_none_or(|(b, _)| g.relative() < b.relative()) {
                best = Some((g, s));
            }
        }
    }
    let (witness_gap, witness) = best.expect("at least one sample");
    Ok(ScanReport {
        inequality: cfg.inequality,
        function: cfg.function.name(),
        n: cfg.n,
        samples: cfg.samples,
        seed: cfg.seed,
        min_relative: witness_gap.relative(),
        witness,
        witness_gap,
        violations,
        equality_max: cfg.inequality.has_equality_case().then_some(equality_max),
    })
}
