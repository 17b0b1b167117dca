use super::inequalities::*;
use super::*;
use crate::flow::StopConditions;
use crate::linalg::Mat;
use crate::symfunc::CurvatureFunction;

fn speed(f: CurvatureFunction, p: f64) -> SpeedFunction {
    SpeedFunction::contracting(f, p).unwrap()
}

fn sphere_traj(t_c: f64, dt: f64) -> Trajectory<Dd> {
    let amb = AmbientSpace::sphere();
    let initial = Representation::GeodesicSphere { n: 2, radius: Dd::from_f64(std::f64::consts::FRAC_PI_3) };
    let mut cfg = FlowConfig::new(amb, speed(CurvatureFunction::mean(), 1.0), initial, t_c + dt);
    cfg.t_start = t_c - dt;
    cfg.policy = StepPolicy::Fixed(dt);
    cfg.record_times = vec![t_c];
    cfg.store_every = usize::MAX;
    run(&cfg).unwrap()
}

#[test]
fn order_of_an_exact_power_law() {
    let n = [64, 128, 256];
    let r: Vec<f64> = n.iter().map(|&k| 3.0 * (k as f64).powi(-2)).collect();
    assert!((least_squares_order(&n, &r).unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(least_squares_order(&n[..2], &r[..2]), None);
}

#[test]
fn geodesic_sphere_identities_are_exact() {
    let traj = sphere_traj(0.1, 1e-5);
    let prm = default_params(&traj.speed, 2);
    for id in [Identity::Metric, Identity::Christoffel, Identity::Speed, Identity::Chi2, Identity::Chi1] {
        let e = evolution_residual(&traj, id, 0.1, 1e-5, prm).unwrap();
        assert!(e.residual <= 1e-8, "{} {}", id.name(), e.residual);
    }
    let st = traj.state(traj.index_of(0.1).unwrap()).unwrap();
    assert!(commutator_residual(&st, &vec![Dd::from_f64(2.0); st.nodes]).unwrap() <= 1e-8);
}

#[test]
fn round_profile_identities_are_far_below_the_ladder_threshold() {
    let amb = AmbientSpace::sphere();
    let mut l = Ladder::standard(amb, speed(CurvatureFunction::mean(), 1.0));
    l.shape = PolarShape::round(0.8);
    let ctx = l.context(128).unwrap();
    for id in Identity::ALL {
        let e = ctx.residual(id).unwrap();
        assert!(e.residual <= 1e-5, "{} {}", id.name(), e.residual);
    }
}

#[test]
fn speed_identity_converges_for_the_norm() {
    let l = Ladder::standard(AmbientSpace::sphere(), speed(CurvatureFunction::norm(), 0.5));
    let r: Vec<f64> = [32, 64].iter().map(|&n| l.context(n).unwrap().residual(Identity::Speed).unwrap().residual).collect();
    assert!(r[0] / r[1] > 3.5, "{r:?}");
}

#[test]
fn commutator_on_a_perturbed_state_is_second_order_small() {
    let l = Ladder::standard(AmbientSpace::sphere(), speed(CurvatureFunction::mean(), 0.5));
    let r: Vec<f64> = [32, 64]
        .iter()
        .map(|&n| {
            let st = l.context(n).unwrap().centre;
            commutator_residual(&st, &st.axis_coordinate()).unwrap()
        })
        .collect();
    assert!(r[0] / r[1] > 3.5 && r[1] < 1e-3, "{r:?}");
    let st = l.context(32).unwrap().centre;
    assert!(matches!(commutator_residual(&st, &[Dd::from_f64(1.0)]), Err(Error::InvalidConfig(_))));
}

#[test]
fn ladder_reports_every_applicable_identity() {
    let mut l = Ladder::standard(AmbientSpace::euclidean(), speed(CurvatureFunction::norm(), 1.0));
    l.levels = vec![32, 48, 64];
    let reps = run_ladder(&l, &Identity::ALL).unwrap();
    assert_eq!(reps.len(), Identity::ALL.len() - 1);
    assert!(reps.iter().all(|r| r.identity != Identity::Chi3));
    for r in &reps {
        assert_eq!(r.times(), vec![0.05; 3]);
        assert!(r.order.unwrap() > 1.8, "{} {:?}", r.identity.name(), r.order);
    }
    l.levels = vec![64];
    assert!(matches!(run_ladder(&l, &Identity::ALL), Err(Error::InvalidConfig(_))));
    l.levels = vec![64, 32, 128];
    assert!(matches!(l.validate(), Err(Error::InvalidConfig(_))));
}

#[test]
fn residual_requests_outside_the_records_fail() {
    let traj = sphere_traj(0.1, 1e-4);
    let prm = default_params(&traj.speed, 2);
    assert!(matches!(evolution_residual(&traj, Identity::Metric, 0.3, 1e-4, prm), Err(Error::OutOfRange { .. })));
    let l = Ladder::standard(AmbientSpace::sphere(), speed(CurvatureFunction::norm(), 1.0));
    let ctx = l.context(16).unwrap();
    assert_eq!(ctx.residual(Identity::Chi3).map(|_| ()), Err(Error::WrongSpeed("f = mean curvature")));
}

#[test]
fn chi3_uses_the_test_zeta_when_the_strong_choice_vanishes() {
    assert_eq!(default_params(&speed(CurvatureFunction::mean(), 1.0), 2).zeta, TEST_ZETA);
    let p = default_params(&speed(CurvatureFunction::mean(), 0.9), 2);
    assert_eq!(p.zeta, Zeta::strong_hp(0.9, 2));
    assert!((p.delta - 0.9 / 1.9).abs() < 1e-16);
    assert!(default_params(&speed(CurvatureFunction::norm(), 0.5), 2).zeta.is_zero());
}

#[test]
fn convexity_monitor_on_sphere_and_non_convex_runs() {
    let amb = AmbientSpace::euclidean();
    let mut cfg = FlowConfig::new(amb, speed(CurvatureFunction::mean(), 1.0), Representation::GeodesicSphere { n: 2, radius: 1.0 }, 0.2);
    cfg.store_every = 10;
    cfg.stop = StopConditions::default();
    let traj = run(&cfg).unwrap();
    let rep = convexity_monitor(&traj);
    assert!(rep.preserved());
    assert_eq!(rep.t, traj.records[0].t);
    assert_eq!(rep.min_kappa, traj.records[0].kappa_min);
    let bad = Representation::<f64>::polar_profile(amb, 64, &PolarShape { radius: 1.0, modes: vec![(2, 0.8)] });
    let traj = run(&FlowConfig::new(amb, speed(CurvatureFunction::mean(), 1.0), bad, 0.1)).unwrap();
    let rep = convexity_monitor(&traj);
    assert!(!rep.preserved());
    assert!(rep.min_kappa < 0.0);
    assert!(matches!(rep.termination, Termination::ConvexityLost { .. }));
}

#[test]
fn f_lemma_examples() {
    let mean = CurvatureFunction::mean();
    let eta = Mat::diag(&[1.0, -1.0]);
    assert!((f_lemma_gap(&mean, &[1.0, 2.0], &eta).unwrap() - 1.5).abs() < 1e-15);
    let k = [0.3, 1.7, 4.0];
    assert!(f_lemma_gap(&CurvatureFunction::norm(), &k, &Mat::diag(&k)).unwrap().abs() < 1e-13);
    let tl = Mat::from_fn(3, |i, j| [[1.0, 0.5, 0.0], [0.5, -2.0, 0.3], [0.0, 0.3, 1.0]][i][j]);
    let sq: f64 = tl.dot(&tl);
    let gap = f_lemma_gap(&CurvatureFunction::harmonic_mean(), &[1.0; 3], &tl).unwrap();
    let fi = 1.0 / 3.0;
    assert!((gap - fi * sq).abs() < 1e-14, "{gap}");
    assert!(matches!(f_lemma_gap(&mean, &[1.0, -1.0], &eta), Err(Error::NonPositiveCurvature { index: 1, .. })));
}

#[test]
fn urbas_and_dominance_examples() {
    let mean = CurvatureFunction::mean();
    assert!((urbas_gap(&mean, &[1.0, 2.0], &Mat::diag(&[1.0, -1.0])).unwrap() - 3.0).abs() < 1e-14);
    let k = [0.5, 2.0, 3.0];
    assert!(urbas_gap(&CurvatureFunction::harmonic_mean(), &k, &Mat::diag(&k)).unwrap().abs() < 1e-13);
    assert_eq!(urbas_gap(&mean, &[2.5], &Mat::diag(&[1.7])).unwrap(), 0.0);
    let pm = CurvatureFunction::power_mean(-3.0).unwrap();
    assert!(matches!(urbas_gap(&pm, &k, &Mat::identity(3)), Err(Error::WrongSpeed(_))));
    assert!((fb_dominance(&CurvatureFunction::norm(), &[3.0, 4.0]).unwrap() - 0.45).abs() < 1e-15);
    assert!((fb_dominance(&mean, &[1.0; 4]).unwrap() - 3.0).abs() < 1e-15);
}

#[test]
fn harnack_form_for_the_mean_at_p_one_is_twice_the_f_lemma() {
    let sp = speed(CurvatureFunction::mean(), 1.0);
    let k = [0.7, 2.0];
    let eta = Mat::from_fn(2, |i, j| [[0.4, -1.1], [-1.1, 2.2]][i][j]);
    let form = harnack_form_gap(&sp, &Mat::identity(2), &Mat::diag(&k), &eta, 0.5).unwrap();
    let lemma = f_lemma_gap(&CurvatureFunction::mean(), &k, &eta).unwrap();
    assert!((form - 2.0 * lemma).abs() < 1e-14, "{form} {lemma}");
}

#[test]
fn harnack_form_decomposition_on_a_general_pair() {
    let g = Mat::from_fn(3, |i, j| [[2.0, 0.3, -0.1], [0.3, 1.0, 0.2], [-0.1, 0.2, 1.5]][i][j]);
    let h = Mat::from_fn(3, |i, j| [[3.0, 0.5, 0.0], [0.5, 0.8, 0.1], [0.0, 0.1, 2.0]][i][j]);
    let eta = Mat::from_fn(3, |i, j| [[1.0, -0.4, 2.0], [-0.4, 0.3, 0.7], [2.0, 0.7, -1.2]][i][j]);
    for f in [CurvatureFunction::norm(), CurvatureFunction::mean(), CurvatureFunction::power_mean(3.0).unwrap()] {
        for p in [0.25, 0.5, 1.0] {
            let d = harnack_form_decomposition(&speed(f.clone(), p), &g, &h, &eta).unwrap();
            assert!(d.residual < 1e-12, "{} {p} {d:?}", f.name());
            assert!(d.second >= 0.0 && d.lemma >= 0.0 && d.gap.value >= 0.0);
        }
    }
    let hm = speed(CurvatureFunction::harmonic_mean(), 0.5);
    assert!(matches!(harnack_form_gap(&hm, &g, &h, &eta, 1.0 / 3.0), Err(Error::WrongSpeed(_))));
    let bad = Mat::diag(&[1.0, -1.0, 1.0]);
    let sp = speed(CurvatureFunction::norm(), 0.5);
    assert!(matches!(harnack_form_gap(&sp, &Mat::identity(3), &bad, &eta, 1.0 / 3.0), Err(Error::ConvexityLost { .. })));
}

#[test]
fn scans_are_seeded_and_pass_on_small_samples() {
    for ineq in Inequality::ALL {
        let f = if ineq == Inequality::Urbas { CurvatureFunction::harmonic_mean() } else { CurvatureFunction::norm() };
        let mut cfg = ScanConfig::new(ineq, f, 3);
        cfg.samples = 2500;
        let a = scan(&cfg).unwrap();
        assert!(a.passes(), "{ineq} {a:?}");
        assert_eq!(a.equality_max.is_some(), ineq != Inequality::FbDominance);
        let b = scan(&cfg).unwrap();
        assert_eq!(a.min_relative.to_bits(), b.min_relative.to_bits());
        assert_eq!(a.witness, b.witness);
        cfg.seed += 1;
        assert_ne!(scan(&cfg).unwrap().witness, a.witness);
    }
    assert_eq!(task_seeds(7, 3)[..2], task_seeds(7, 2)[..]);
    let mut cfg = ScanConfig::new(Inequality::Urbas, CurvatureFunction::mean(), 1);
    cfg.samples = 10;
    let rep = scan(&cfg).unwrap();
    assert!(rep.witness_gap.value.abs() < 1e-13);
}

#[test]
fn zeta_conditions_match_the_independent_values() {
    let sp = speed(CurvatureFunction::mean(), 0.9);
    let f = 3f64.powf(0.9);
    let general = zeta_conditions(&sp, 2, f).unwrap();
    let closed = zeta_conditions_closed(&sp, 2, f).unwrap();
    let frozen = [3.7073985286558022, 2.3666934914721318, 0.30102808566008651, 0.026878753795222866, 0.0];
    for (k, (x, y)) in general.entries().iter().zip(closed.entries()).enumerate() {
        assert!((x - frozen[k]).abs() <= 1e-10 * (1.0 + frozen[k].abs()), "{k} {x}");
        assert!((y - frozen[k]).abs() <= 1e-10 * (1.0 + frozen[k].abs()), "{k} {y}");
    }
    assert!(general.zeta_nonzero && general.satisfied());
}

#[test]
fn zeta_conditions_at_p_one_and_at_the_branch_boundary() {
    let one = zeta_conditions(&speed(CurvatureFunction::mean(), 1.0), 3, 2.0).unwrap();
    assert_eq!(one.entries(), [0.0; 5]);
    for n in [2usize, 3, 5] {
        let p = (n as f64 + 1.0) / (2.0 * n as f64);
        let sp = speed(CurvatureFunction::mean(), p);
        let first = Zeta::power(p * (n as f64 - 1.0 / (2.0 * p - 1.0)), 2.0 - 1.0 / p);
        let a = zeta::zeta_conditions_for(&sp, n, 1.7, first).unwrap();
        let b = zeta_conditions(&sp, n, 1.7).unwrap();
        assert!(a.max_difference(&b) < 1e-12, "{n} {a:?} {b:?}");
    }
    let norm = speed(CurvatureFunction::norm(), 0.5);
    assert!(matches!(zeta_conditions(&norm, 2, 1.0), Err(Error::WrongSpeed(_))));
}

#[test]
fn zeta_conditions_hold_across_both_branches() {
    for n in [1usize, 2, 3, 5] {
        for i in 1..=40 {
            let p = i as f64 / 40.0;
            let sp = speed(CurvatureFunction::mean(), p);
            for f in [0.05, 1.0, 30.0] {
                let g = zeta_conditions(&sp, n, f).unwrap();
                let c = zeta_conditions_closed(&sp, n, f).unwrap();
                assert!(g.satisfied(), "{n} {p} {f} {g:?}");
                assert!(g.max_difference(&c) < 1e-10, "{n} {p} {f} {g:?} {c:?}");
            }
        }
    }
}
