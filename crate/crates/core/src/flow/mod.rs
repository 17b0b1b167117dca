//! Time integration of the normal flow `x_t = -F nu`.
//!
//! Geodesic spheres are advanced through their radius ODE; marker
//! representations move every marker with the classical fourth-order
//! Runge-Kutta scheme. Markers keep their labels, so differences of a stored
//! quantity at a fixed node index are Lagrangian time derivatives.

mod sphere;

pub use sphere::{sphere_ode_solution, SphereSolution};

use crate::error::{Error, Result};
use crate::geometry::markers::{self, marker_frame, Point};
use crate::geometry::{assemble, AmbientSpace, Representation, SurfaceState, MAX_SPACING_RATIO};
use crate::real::{r, Real};
use crate::symfunc::{FlowMode, SpeedFunction};

/// Default safety factor of the parabolic step restriction.
pub const DEFAULT_SAFETY: f64 = 0.5;

/// Relative change of the radius per step on the geodesic-sphere tier, at safety 1.
const SPHERE_STEP_FRACTION: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepPolicy {
    Fixed(f64),
    /// `dt = safety * ds_min^2 / max tr(F')` on marker representations and
    /// `dt = safety * 0.01 * r / |F|` on geodesic spheres.
    Parabolic { safety: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StopConditions {
    pub kappa_cap: Option<f64>,
    pub radius_floor: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct FlowConfig<T = f64> {
    pub ambient: AmbientSpace,
    pub speed: SpeedFunction,
    pub initial: Representation<T>,
    pub policy: StepPolicy,
    pub t_start: f64,
    pub t_end: f64,
    pub stop: StopConditions,
    /// Harnack offset used by monitors of this run.
    pub delta: f64,
    /// Monitors add the `c t zeta(F)` correction when set.
    pub zeta_mode: bool,
    /// Store every k-th step (the final state and `record_times` are always stored).
    pub store_every: usize,
    /// Times the integrator lands on exactly and stores.
    pub record_times: Vec<f64>,
    /// Weight of the tangential redistribution term; zero keeps the motion Lagrangian.
    pub redistribution: f64,
    pub max_steps: usize,
}

/// `p/(p+1)` for contracting speeds, `beta/(beta-1)` for expanding ones.
pub fn default_delta(speed: &SpeedFunction) -> f64 {
    let a = speed.power();
    match speed.mode() {
        FlowMode::Contracting => a / (a + 1.0),
        FlowMode::Expanding => a / (a - 1.0),
    }
}

impl<T: Real> FlowConfig<T> {
    pub fn new(ambient: AmbientSpace, speed: SpeedFunction, initial: Representation<T>, t_end: f64) -> Self {
        let delta = default_delta(&speed);
        FlowConfig {
            ambient,
            speed,
            initial,
            policy: StepPolicy::Parabolic { safety: DEFAULT_SAFETY },
            t_start: 0.0,
            t_end,
            stop: StopConditions::default(),
            delta,
            zeta_mode: false,
            store_every: 1,
            record_times: vec![],
            redistribution: 0.0,
            max_steps: 50_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.t_end > self.t_start) {
            return bad(format!("t_end must exceed t_start ({} <= {})", self.t_end, self.t_start));
        }
        match self.policy {
            StepPolicy::Fixed(dt) if !(dt > 0.0) => return bad(format!("time step must be positive, got {dt}")),
            StepPolicy::Parabolic { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return bad(format!("step safety must lie in (0, 1], got {safety}"))
            }
            _ => {}
        }
        if self.store_every == 0 {
            return bad("store_every must be at least 1".into());
        }
        if !(self.redistribution >= 0.0) {
            return bad(format!("redistribution weight must be non-negative, got {}", self.redistribution));
        }
        if self.speed.mode() == FlowMode::Expanding {
            if self.ambient.is_sphere() {
                return Err(Error::WrongAmbient);
            }
            if !matches!(self.initial, Representation::GeodesicSphere { .. }) {
                return bad("expanding flows are only integrated for geodesic spheres".into());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    Completed,
    ConvexityLost { t: f64, node: usize, kappa: f64 },
    CurvatureCap { t: f64, kappa: f64 },
    RadiusFloor { t: f64, radius: f64 },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::ConvexityLost { .. } => "convexity-lost",
            Termination::CurvatureCap { .. } => "curvature-cap",
            Termination::RadiusFloor { .. } => "radius-floor",
        }
    }
}

/// One stored time slice.
#[derive(Clone, Debug)]
pub struct Record<T> {
    pub t: f64,
    pub step: usize,
    pub repr: Representation<T>,
    pub kappa_min: f64,
    pub kappa_min_node: usize,
    pub kappa_max: f64,
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T = f64> {
    pub ambient: AmbientSpace,
    pub speed: SpeedFunction,
    pub records: Vec<Record<T>>,
    pub termination: Termination,
    pub steps: usize,
    /// Set when markers were redistributed; Lagrangian differences are then invalid.
    pub redistributed: bool,
}

impl<T: Real> Trajectory<T> {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn state(&self, i: usize) -> Result<SurfaceState<T>> {
        let rec = &self.records[i];
        assemble(&rec.repr, self.ambient, &self.speed, rec.t)
    }

    /// Index of the record stored at time `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.records.iter().position(|r| (r.t - t).abs() <= tol).ok_or_else(|| self.out_of_range(t))
    }

    fn out_of_range(&self, t: f64) -> Error {
        let start = self.records.first().map_or(f64::NAN, |r| r.t);
        let end = self.records.last().map_or(f64::NAN, |r| r.t);
        Error::OutOfRange { t, start, end }
    }

    /// Centred difference of a per-node quantity between the records at `t - dt` and `t + dt`.
    pub fn time_derivative<E>(&self, extract: E, t: f64, dt: f64) -> Result<Vec<T>>
    where
        E: Fn(&SurfaceState<T>) -> Vec<T>,
    {
        let a = self.index_of(t - dt)?;
        let b = self.index_of(t + dt)?;
        let (sa, sb) = (self.state(a)?, self.state(b)?);
        let (va, vb) = (extract(&sa), extract(&sb));
        if sa.nodes != sb.nodes || va.len() != vb.len() || self.redistributed {
            return Err(Error::LabelMismatch);
        }
        let span = T::from_f64(self.records[b].t - self.records[a].t);
        Ok(va.iter().zip(&vb).map(|(&x, &y)| (y - x) / span).collect())
    }
}

/// Free-function form of [`Trajectory::time_derivative`].
pub fn time_derivative<T: Real, E>(traj: &Trajectory<T>, extract: E, t: f64, dt: f64) -> Result<Vec<T>>
where
    E: Fn(&SurfaceState<T>) -> Vec<T>,
{
    traj.time_derivative(extract, t, dt)
}

#[derive(Clone, Debug)]
enum Velocity<T> {
    Radius(T),
    Markers(Vec<Point<T>>),
}

/// Velocity field together with the diagnostics of the state it was computed on.
#[derive(Clone, Debug)]
struct Evaluation<T> {
    velocity: Velocity<T>,
    kappa_min: f64,
    kappa_node: usize,
    kappa_max: f64,
    stiffness: f64,
    spacing: f64,
    radius: f64,
    speed_max: f64,
}

#[derive(Clone, Copy)]
struct Motion<'a> {
    ambient: AmbientSpace,
    speed: &'a SpeedFunction,
    redistribution: f64,
}

fn curvature_error(node: usize, kappa: f64) -> Error {
    if kappa.is_finite() {
        Error::ConvexityLost { node, kappa }
    } else {
        Error::StabilityViolation(format!("non-finite curvature at node {node}"))
    }
}

fn evaluate<T: Real>(repr: &Representation<T>, m: Motion) -> Result<Evaluation<T>> {
    match repr {
        Representation::GeodesicSphere { n, radius } => {
            let rr = *radius;
            let rf = rr.to_f64();
            if !(rf > 0.0) || (m.ambient.is_sphere() && rf >= std::f64::consts::FRAC_PI_2) {
                return Err(curvature_error(0, m.ambient.sphere_curvature(rf)));
            }
            let k = m.ambient.sphere_curvature(rr);
            let kappa = vec![k; *n];
            let f = m.speed.eval(&kappa)?;
            let tr: T = m.speed.grad(&kappa)?.into_iter().sum();
            Ok(Evaluation {
                velocity: Velocity::Radius(-f),
                kappa_min: k.to_f64(),
                kappa_node: 0,
                kappa_max: k.to_f64(),
                stiffness: tr.to_f64(),
                spacing: rf,
                radius: rf,
                speed_max: f.to_f64().abs(),
            })
        }
        Representation::ClosedCurve { points } | Representation::Axisymmetric { points } => {
            let grid = repr.grid().expect("marker representations carry a grid");
            let axisymmetric = matches!(repr, Representation::Axisymmetric { .. });
            let mf = marker_frame(m.ambient, &grid, points);
            let gaps = markers::spacings(&mf.points, !axisymmetric);
            let gmax = gaps.iter().fold(0.0f64, |a, x| a.max(x.to_f64()));
            let gmin = gaps.iter().fold(f64::INFINITY, |a, x| a.min(x.to_f64()));
            if !(gmax / gmin <= MAX_SPACING_RATIO) {
                if !(gmax / gmin).is_finite() {
                    return Err(Error::StabilityViolation("marker spacing is not finite".into()));
                }
                return Err(Error::DegenerateGrid { ratio: gmax / gmin, limit: MAX_SPACING_RATIO });
            }
            let mut out = Vec::with_capacity(points.len());
            let (mut kmin, mut knode, mut kmax, mut stiff, mut fmax) = (f64::INFINITY, 0, 0.0f64, 0.0f64, 0.0f64);
            let omega = r::<T>(m.redistribution);
            for j in 0..points.len() {
                let k1 = mf.kappa_profile[j];
                let kappa = if axisymmetric { vec![k1, mf.normal[j][2] / mf.points[j][2]] } else { vec![k1] };
                for k in &kappa {
                    let kf = k.to_f64();
                    if !(kf > 0.0) {
                        return Err(curvature_error(j, kf));
                    }
                    if kf < kmin {
                        kmin = kf;
                        knode = j;
                    }
                    kmax = kmax.max(kf);
                }
                let f = m.speed.eval(&kappa)?;
                let tr: T = m.speed.grad(&kappa)?.into_iter().sum();
                stiff = stiff.max(tr.to_f64());
                fmax = fmax.max(f.to_f64().abs());
                let mut v = markers::axpy(-f, &mf.normal[j], &[T::zero(); 3]);
                if m.redistribution > 0.0 {
                    let s = omega * tr * mf.tangential_accel[j] / mf.speed2[j];
                    v = markers::axpy(s, &mf.tangent[j], &v);
                }
                if !(v[0].is_finite() && v[1].is_finite() && v[2].is_finite()) {
                    return Err(Error::StabilityViolation(format!("non-finite velocity at node {j}")));
                }
                out.push(v);
            }
            Ok(Evaluation {
                velocity: Velocity::Markers(out),
                kappa_min: kmin,
                kappa_node: knode,
                kappa_max: kmax,
                stiffness: stiff,
                spacing: gmin,
                radius: markers::mean_radius(m.ambient, &mf.points, axisymmetric),
                speed_max: fmax,
            })
        }
    }
}

/// `x + sum c_k v_k`, retracted onto the model surface.
fn advance<T: Real>(ambient: AmbientSpace, repr: &Representation<T>, terms: &[(T, &Velocity<T>)]) -> Representation<T> {
    match repr {
        Representation::GeodesicSphere { n, radius } => {
            let mut rr = *radius;
            for (c, v) in terms {
                if let Velocity::Radius(x) = v {
                    rr += *c * *x;
                }
            }
            Representation::GeodesicSphere { n: *n, radius: rr }
        }
        _ => {
            let mut pts = repr.points().to_vec();
            for (c, v) in terms {
                if let Velocity::Markers(vs) = v {
                    for (p, w) in pts.iter_mut().zip(vs) {
                        *p = markers::axpy(*c, w, p);
                    }
                }
            }
            let pts = pts.iter().map(|p| markers::retract(ambient, p)).collect();
            repr.with_points(pts)
        }
    }
}

fn rk4<T: Real, V>(ambient: AmbientSpace, repr: &Representation<T>, dt: f64, k1: &Velocity<T>, vel: V) -> Result<Representation<T>>
where
    V: Fn(&Representation<T>) -> Result<Velocity<T>>,
{
    let h = T::from_f64(dt);
    let half = h * r::<T>(0.5);
    let k2 = vel(&advance(ambient, repr, &[(half, k1)]))?;
    let k3 = vel(&advance(ambient, repr, &[(half, &k2)]))?;
    let k4 = vel(&advance(ambient, repr, &[(h, &k3)]))?;
    let sixth = h / r::<T>(6.0);
    let third = h / r::<T>(3.0);
    Ok(advance(ambient, repr, &[(sixth, k1), (third, &k2), (third, &k3), (sixth, &k4)]))
}

/// One Runge-Kutta step of size `dt` from an assembled state.
pub fn step<T: Real>(state: &SurfaceState<T>, dt: f64, cfg: &FlowConfig<T>) -> Result<SurfaceState<T>> {
    let m = Motion { ambient: state.ambient, speed: &state.speed, redistribution: cfg.redistribution };
    let vel = |x: &Representation<T>| evaluate(x, m).map(|e| e.velocity);
    let k1 = vel(&state.repr)?;
    let next = rk4(state.ambient, &state.repr, dt, &k1, vel)?;
    assemble(&next, state.ambient, &state.speed, state.t + dt)
}

fn record<T: Real>(repr: &Representation<T>, t: f64, step: usize, e: &Evaluation<T>) -> Record<T> {
    Record {
        t,
        step,
        repr: repr.clone(),
        kappa_min: e.kappa_min,
        kappa_min_node: e.kappa_node,
        kappa_max: e.kappa_max,
        radius: e.radius,
    }
}

fn stop_reason<T>(stop: &StopConditions, e: &Evaluation<T>, t: f64) -> Option<Termination> {
    if let Some(cap) = stop.kappa_cap {
        if e.kappa_max > cap {
            return Some(Termination::CurvatureCap { t, kappa: e.kappa_max });
        }
    }
    if let Some(floor) = stop.radius_floor {
        if e.radius < floor {
            return Some(Termination::RadiusFloor { t, radius: e.radius });
        }
    }
    None
}

fn step_size<T>(policy: StepPolicy, e: &Evaluation<T>, sphere: bool) -> f64 {
    match policy {
        StepPolicy::Fixed(dt) => dt,
        StepPolicy::Parabolic { safety } if sphere => safety * SPHERE_STEP_FRACTION * e.radius / e.speed_max,
        StepPolicy::Parabolic { safety } => safety * e.spacing * e.spacing / e.stiffness,
    }
}

/// Integrates until `t_end` or a stop condition.
///
/// Loss of convexity is a regular termination (possibly with no stored
/// state at all); numerical blow-up is an error.
pub fn run<T: Real>(cfg: &FlowConfig<T>) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let m = Motion { ambient: cfg.ambient, speed: &cfg.speed, redistribution: cfg.redistribution };
    let sphere = matches!(cfg.initial, Representation::GeodesicSphere { .. });
    let mut traj = Trajectory {
        ambient: cfg.ambient,
        speed: cfg.speed.clone(),
        records: vec![],
        termination: Termination::Completed,
        steps: 0,
        redistributed: cfg.redistribution > 0.0 && !sphere,
    };
    let mut t = cfg.t_start;
    let lost = |t: f64, e: Error| match e {
        Error::ConvexityLost { node, kappa } => Ok(Termination::ConvexityLost { t, node, kappa }),
        e => Err(e),
    };
    let mut repr = cfg.initial.clone();
    let mut cur = match evaluate(&repr, m) {
        Ok(e) => e,
        Err(e) => {
            traj.termination = lost(t, e)?;
            return Ok(traj);
        }
    };
    traj.records.push(record(&repr, t, 0, &cur));
    if let Some(reason) = stop_reason(&cfg.stop, &cur, t) {
        traj.termination = reason;
        return Ok(traj);
    }
    let mut targets: Vec<f64> = cfg.record_times.iter().copied().filter(|&x| x > t && x < cfg.t_end).collect();
    targets.push(cfg.t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let mut next_target = 0;
    let mut steps = 0;
    while next_target < targets.len() {
        if steps >= cfg.max_steps {
            return Err(Error::StabilityViolation(format!("step limit {} reached at t = {t}", cfg.max_steps)));
        }
        let target = targets[next_target];
        let mut dt = step_size(cfg.policy, &cur, sphere);
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::StabilityViolation(format!("invalid time step {dt} at t = {t}")));
        }
        let remaining = target - t;
        let hit = dt >= remaining * (1.0 - 1e-12);
        if hit {
            dt = remaining;
        } else if 2.0 * dt > remaining {
            dt = remaining / 2.0;
        }
        let vel = |x: &Representation<T>| evaluate(x, m).map(|e| e.velocity);
        let next = match rk4(cfg.ambient, &repr, dt, &cur.velocity, vel) {
            Ok(x) => x,
            Err(e) => {
                traj.termination = lost(t, e)?;
                break;
            }
        };
        let t_next = if hit { target } else { t + dt };
        steps += 1;
        cur = match evaluate(&next, m) {
            Ok(e) => e,
            Err(e) => {
                traj.termination = lost(t_next, e)?;
                break;
            }
        };
        repr = next;
        t = t_next;
        if hit {
            next_target += 1;
        }
        let reason = stop_reason(&cfg.stop, &cur, t);
        if hit || steps % cfg.store_every == 0 || reason.is_some() {
            traj.records.push(record(&repr, t, steps, &cur));
        }
        if let Some(reason) = reason {
            traj.termination = reason;
            break;
        }
    }
    traj.steps = steps;
    Ok(traj)
}

#[cfg(test)]
mod tests;
