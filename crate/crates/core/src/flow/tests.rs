use super::*;
use crate::geometry::PolarShape;
use crate::real::Dd;
use crate::symfunc::CurvatureFunction;

fn mean(p: f64) -> SpeedFunction {
    SpeedFunction::contracting(CurvatureFunction::mean(), p).unwrap()
}

fn sphere_repr(r0: f64) -> Representation<f64> {
    Representation::GeodesicSphere { n: 2, radius: r0 }
}

fn one_step_radius(ambient: AmbientSpace, r0: f64, dt: f64) -> f64 {
    let cfg = FlowConfig::new(ambient, mean(1.0), sphere_repr(r0), dt);
    let st = assemble(&cfg.initial, ambient, &cfg.speed, 0.0).unwrap();
    step(&st, dt, &cfg).unwrap().radius_estimate()
}

#[test]
fn single_step_is_fifth_order_locally() {
    let e = |dt: f64| (one_step_radius(AmbientSpace::euclidean(), 1.0, dt) - (1.0 - 4.0 * dt).sqrt()).abs();
    let ratio = e(0.02) / e(0.01);
    assert!(ratio > 25.0, "ratio {ratio}");
    let s = |dt: f64| {
        let r = one_step_radius(AmbientSpace::sphere(), 1.0, dt);
        (r.cos() - 1f64.cos() * (2.0 * dt).exp()).abs()
    };
    let ratio = s(0.01) / s(0.005);
    assert!(ratio > 25.0, "ratio {ratio}");
}

#[test]
fn zero_velocity_leaves_markers_fixed() {
    let amb = AmbientSpace::sphere();
    let repr = Representation::<f64>::polar_profile(amb, 16, &PolarShape::round(0.5));
    let zero = |x: &Representation<f64>| Ok(Velocity::Markers(vec![[0.0; 3]; x.points().len()]));
    let k1 = zero(&repr).unwrap();
    let next = rk4(amb, &repr, 0.1, &k1, zero).unwrap();
    for (a, b) in next.points().iter().zip(repr.points()) {
        assert!((0..3).all(|k| (a[k] - b[k]).abs() < 1e-15));
    }
}

#[test]
fn sphere_tier_matches_radius_ode() {
    for (amb, r0, p) in [(AmbientSpace::euclidean(), 1.0, 0.5), (AmbientSpace::sphere(), 1.0, 0.5), (AmbientSpace::sphere(), 0.8, 1.0)] {
        let mut cfg = FlowConfig::new(amb, mean(p), sphere_repr(r0), 0.0);
        let exact = sphere_ode_solution(&cfg).unwrap();
        cfg.t_end = 0.8 * exact.extinction().unwrap();
        cfg.store_every = 50;
        let traj = run(&cfg).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        for rec in &traj.records {
            let r = exact.radius(rec.t).unwrap();
            assert!((rec.radius - r).abs() < 1e-6 * r, "t {} {} vs {r}", rec.t, rec.radius);
        }
    }
}

#[test]
fn round_profile_follows_the_sphere_solution() {
    let amb = AmbientSpace::euclidean();
    let initial = Representation::<f64>::polar_profile(amb, 48, &PolarShape::round(1.0));
    let mut cfg = FlowConfig::new(amb, mean(1.0), initial, 0.1);
    cfg.store_every = 200;
    let traj = run(&cfg).unwrap();
    let exact = SphereSolution::new(amb, &cfg.speed, 2, 1.0, 0.0).unwrap();
    let last = traj.records.last().unwrap();
    assert!((last.t - 0.1).abs() < 1e-15);
    let r = exact.radius(last.t).unwrap();
    assert!((last.radius - r).abs() < 1e-5 * r, "{} vs {r}", last.radius);
}

#[test]
fn perturbed_profile_in_the_sphere_stays_convex() {
    let amb = AmbientSpace::sphere();
    let shape = PolarShape { radius: 0.7, modes: vec![(2, 0.1), (3, 0.03)] };
    let initial = Representation::<f64>::polar_profile(amb, 32, &shape);
    let mut cfg = FlowConfig::new(amb, SpeedFunction::contracting(CurvatureFunction::norm(), 0.5).unwrap(), initial, 0.05);
    cfg.store_every = 100;
    let traj = run(&cfg).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    assert!(traj.records.iter().all(|r| r.kappa_min > 0.0));
    let ts = traj.times();
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn non_convex_data_terminates_before_the_first_step() {
    let amb = AmbientSpace::euclidean();
    let initial = Representation::<f64>::polar_profile(amb, 64, &PolarShape { radius: 1.0, modes: vec![(2, 0.8)] });
    let traj = run(&FlowConfig::new(amb, mean(1.0), initial, 0.1)).unwrap();
    assert!(traj.is_empty());
    assert!(matches!(traj.termination, Termination::ConvexityLost { t, .. } if t == 0.0));
}

#[test]
fn marker_velocity_is_normal() {
    let amb = AmbientSpace::sphere();
    let shape = PolarShape { radius: 0.7, modes: vec![(2, 0.1)] };
    let repr = Representation::<f64>::polar_profile(amb, 32, &shape);
    let m = Motion { ambient: amb, speed: &mean(1.0), redistribution: 0.0 };
    let e = evaluate(&repr, m).unwrap();
    let mf = marker_frame(amb, &repr.grid().unwrap(), repr.points());
    if let Velocity::Markers(v) = e.velocity {
        for (w, t) in v.iter().zip(&mf.tangent) {
            assert!(markers::dot(w, t).abs() < 1e-14);
        }
    }
}

#[test]
fn reversing_a_step_is_fifth_order() {
    let amb = AmbientSpace::sphere();
    let shape = PolarShape { radius: 0.7, modes: vec![(2, 0.1)] };
    let repr = Representation::<Dd>::polar_profile(amb, 24, &shape);
    let speed = mean(1.0);
    let cfg = FlowConfig::new(amb, speed.clone(), repr.clone(), 1.0);
    let st = assemble(&repr, amb, &speed, 0.0).unwrap();
    let err = |dt: f64| {
        let back = step(&step(&st, dt, &cfg).unwrap(), -dt, &cfg).unwrap();
        back.repr
            .points()
            .iter()
            .zip(repr.points())
            .map(|(a, b)| (0..3).map(|k| (a[k] - b[k]).abs().to_f64()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(2e-4), err(1e-4));
    assert!((e1 / e2).log2() > 4.5, "{e1} {e2}");
}

#[test]
fn time_derivative_of_speed_on_a_shrinking_sphere() {
    let amb = AmbientSpace::euclidean();
    let mut cfg = FlowConfig::new(amb, mean(1.0), sphere_repr(1.0), 0.1 + 1e-4);
    cfg.policy = StepPolicy::Fixed(1e-4);
    cfg.record_times = vec![0.1 - 1e-4, 0.1];
    cfg.store_every = usize::MAX;
    let traj = run(&cfg).unwrap();
    let d = traj.time_derivative(|s| s.speed_value.clone(), 0.1, 1e-4).unwrap();
    assert!((d[0] - 4.0 / 0.6f64.powf(1.5)).abs() < 1e-5, "{}", d[0]);
    assert!((d[0] - 8.60663).abs() < 1e-5);
    let zero = traj.time_derivative(|s| vec![1.0; s.nodes], 0.1, 1e-4).unwrap();
    assert_eq!(zero, vec![0.0]);
    assert!(matches!(traj.time_derivative(|s| s.speed_value.clone(), 0.5, 1e-4), Err(Error::OutOfRange { .. })));
}

#[test]
fn stop_conditions_end_the_run() {
    let amb = AmbientSpace::euclidean();
    let mut cfg = FlowConfig::new(amb, mean(1.0), sphere_repr(1.0), 0.24);
    cfg.stop.kappa_cap = Some(4.0);
    let traj = run(&cfg).unwrap();
    assert!(matches!(traj.termination, Termination::CurvatureCap { .. }));
    assert!(traj.records.last().unwrap().kappa_max > 4.0);
    cfg.stop = StopConditions { kappa_cap: None, radius_floor: Some(0.5) };
    let traj = run(&cfg).unwrap();
    assert!(matches!(traj.termination, Termination::RadiusFloor { .. }));
}

#[test]
fn invalid_configurations_are_rejected() {
    let amb = AmbientSpace::sphere();
    let sp = SpeedFunction::expanding(CurvatureFunction::mean(), 0.5).unwrap();
    assert_eq!(FlowConfig::new(amb, sp, sphere_repr(0.5), 1.0).validate(), Err(Error::WrongAmbient));
    let mut cfg = FlowConfig::new(amb, mean(1.0), sphere_repr(0.5), 1.0);
    cfg.policy = StepPolicy::Fixed(0.0);
    assert!(matches!(run(&cfg), Err(Error::InvalidConfig(_))));
    assert_eq!(default_delta(&mean(1.0)), 0.5);
    assert_eq!(default_delta(&SpeedFunction::expanding(CurvatureFunction::mean(), 0.5).unwrap()), -1.0);
}
