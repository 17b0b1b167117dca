//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use harnack_core::flow::{self, FlowConfig, SphereSolution, Termination};
use harnack_core::geometry::{AmbientSpace, PolarShape, Representation};
use harnack_core::harnack::{self, HarnackConfig, HarnackVariant};
use harnack_core::symfunc::{CurvatureFunction, SpeedFunction};
use harnack_core::verify::inequalities::{self, Inequality, ScanConfig, TASK_SIZE};
use harnack_core::verify::zeta::ZETA_TOLERANCE;
use harnack_core::verify::{self, Identity, Ladder};
use std::fs;
use std::path::Path;
use std::time::Instant;

const SPHERE_TOL: f64 = 1e-6;
const LADDER_ORDER: f64 = 1.8;
const LADDER_RESIDUAL: f64 = 1e-4;
const CLOSED_FORM_TOL: f64 = 1e-6;
const SCAN_SAMPLES: usize = 100_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn contracting(f: CurvatureFunction, p: f64) -> SpeedFunction {
    SpeedFunction::contracting(f, p).unwrap()
}

fn ambient(c: f64) -> AmbientSpace {
    AmbientSpace::new(c).unwrap()
}

fn ratio(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sphere_oracle() -> Verdict {
    let mut worst = 0.0f64;
    let mut notes = vec![];
    let mut ok = true;
    for c in [0.0, 1.0] {
        for p in [0.5, 1.0] {
            let amb = ambient(c);
            let sp = contracting(CurvatureFunction::mean(), p);
            let r0 = 1.0;
            let exact = SphereSolution::new(amb, &sp, 2, r0, 0.0).unwrap();
            let t_end = 0.8 * exact.extinction().unwrap();
            let mut cfg = FlowConfig::new(amb, sp, Representation::<f64>::polar_profile(amb, 256, &PolarShape::round(r0)), t_end);
            cfg.store_every = 100;
            let traj = flow::run(&cfg).unwrap();
            let done = traj.termination == Termination::Completed && (traj.records.last().unwrap().t - t_end).abs() < 1e-12;
            let err = traj
                .records
                .iter()
                .map(|r| ratio(r.radius, exact.radius(r.t).unwrap()))
                .fold(0.0, f64::max);
            ok &= done && err <= SPHERE_TOL;
            worst = worst.max(err);
            notes.push(format!("c={c} p={p}: {err:.1e}"));
        }
    }
    verdict(ok, format!("max relative radius error {worst:.2e} <= {SPHERE_TOL:e} ({})", notes.join(", ")))
}

fn ladder_residuals() -> Verdict {
    let mut ok = true;
    let mut worst_order = f64::INFINITY;
    let mut worst_res = 0.0f64;
    let mut failed = vec![];
    let mut checked = 0;
    for f in [CurvatureFunction::mean(), CurvatureFunction::norm()] {
        for p in [0.5, 1.0] {
            let l = Ladder::standard(AmbientSpace::sphere(), contracting(f.clone(), p));
            let reps = verify::run_ladder(&l, &Identity::ALL).unwrap();
            for r in &reps {
                checked += 1;
                let order = r.order.unwrap_or(f64::NAN);
                worst_order = worst_order.min(order);
                worst_res = worst_res.max(r.finest());
                if !r.passes(LADDER_ORDER, LADDER_RESIDUAL) {
                    ok = false;
                    failed.push(format!("{}/{}/p={p}", r.identity.name(), f.name()));
                }
            }
        }
    }
    let mut d = format!(
        "{checked} identity ladders on N=64,128,256: min order {worst_order:.2} >= {LADDER_ORDER}, max finest residual {worst_res:.2e} <= {LADDER_RESIDUAL:e}"
    );
    if !failed.is_empty() {
        d.push_str(&format!("; failed {}", failed.join(" ")));
    }
    verdict(ok, d)
}

struct HarnackRun {
    min_q: f64,
    min_kappa: f64,
    slices: usize,
    completed: bool,
}

fn harnack_run(f: CurvatureFunction, p: f64, variant: HarnackVariant, perturbed: bool) -> HarnackRun {
    let amb = AmbientSpace::sphere();
    let sp = contracting(f, p);
    let shape = if perturbed { PolarShape { radius: 0.7, modes: vec![(2, 0.1), (3, 0.03)] } } else { PolarShape::round(0.7) };
    let ext = SphereSolution::new(amb, &sp, 2, 0.7, 0.0).unwrap().extinction().unwrap();
    let mut cfg = FlowConfig::new(amb, sp.clone(), Representation::<f64>::polar_profile(amb, 64, &shape), 0.6 * ext);
    cfg.store_every = 40;
    let traj = flow::run(&cfg).unwrap();
    let h = HarnackConfig::new(variant, &sp, amb, 2);
    h.validate(&sp).unwrap();
    let mut min_q = f64::INFINITY;
    let mut slices = 0;
    for (i, r) in traj.records.iter().enumerate() {
        if r.t > 0.0 {
            let q = harnack::evaluate(&traj.state(i).unwrap(), r.t, &h).unwrap();
            min_q = min_q.min(q.min);
            slices += 1;
        }
    }
    HarnackRun { min_q, min_kappa: verify::convexity_monitor(&traj).min_kappa, slices, completed: traj.termination == Termination::Completed }
}

fn summarize(runs: &[(String, HarnackRun)]) -> (bool, f64, usize) {
    let ok = runs.iter().all(|(_, r)| r.completed && r.slices > 0 && r.min_q > 0.0);
    let min_q = runs.iter().map(|(_, r)| r.min_q).fold(f64::INFINITY, f64::min);
    (ok, min_q, runs.iter().map(|(_, r)| r.slices).sum())
}

fn weak_harnack(kappa: &mut Vec<(String, f64)>) -> Verdict {
    let mut runs = vec![];
    for f in [CurvatureFunction::mean(), CurvatureFunction::norm()] {
        for p in [0.5, 0.75, 1.0] {
            for perturbed in [false, true] {
                let label = format!("weak {}/p={p}/{}", f.name(), if perturbed { "perturbed" } else { "umbilic" });
                runs.push((label, harnack_run(f.clone(), p, HarnackVariant::Chi1General, perturbed)));
            }
        }
    }
    let (ok, min_q, slices) = summarize(&runs);
    let bad: Vec<&str> = runs.iter().filter(|(_, r)| !(r.min_q > 0.0)).map(|(l, _)| l.as_str()).collect();
    kappa.extend(runs.iter().map(|(l, r)| (l.clone(), r.min_kappa)));
    verdict(ok, format!("{} runs, {slices} slices, min Q {min_q:.4e} > 0{}", runs.len(), fail_list(&bad)))
}

fn fail_list(bad: &[&str]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; not positive: {}", bad.join(" "))
    }
}

fn umbilic_closed_form() -> f64 {
    let amb = AmbientSpace::sphere();
    let sp = contracting(CurvatureFunction::mean(), 1.0);
    let r0 = 1.2;
    let mut cfg = FlowConfig::new(amb, sp.clone(), Representation::GeodesicSphere { n: 2, radius: r0 }, 0.4);
    cfg.store_every = 20;
    let traj = flow::run(&cfg).unwrap();
    let h = HarnackConfig::new(HarnackVariant::Chi3StrongHp, &sp, amb, 2);
    let mut worst = 0.0f64;
    for (i, r) in traj.records.iter().enumerate().filter(|(_, r)| r.t > 0.0) {
        let q = harnack::evaluate(&traj.state(i).unwrap(), r.t, &h).unwrap().min;
        let rad = (r0.cos() * (2.0 * r.t).exp()).acos();
        let cot = 1.0 / rad.tan();
        worst = worst.max(ratio(q, 4.0 * cot.powi(3) + cot / r.t));
    }
    worst
}

fn strong_harnack(kappa: &mut Vec<(String, f64)>) -> Verdict {
    let mut runs = vec![];
    for p in [0.6, 0.9] {
        for perturbed in [false, true] {
            let label = format!("strong p={p}/{}", if perturbed { "perturbed" } else { "umbilic" });
            runs.push((label, harnack_run(CurvatureFunction::mean(), p, HarnackVariant::Chi3StrongHp, perturbed)));
        }
    }
    let (ok, min_q, slices) = summarize(&runs);
    let bad: Vec<&str> = runs.iter().filter(|(_, r)| !(r.min_q > 0.0)).map(|(l, _)| l.as_str()).collect();
    kappa.extend(runs.iter().map(|(l, r)| (l.clone(), r.min_kappa)));
    let branches = !harnack::first_branch(0.6, 2) && harnack::first_branch(0.9, 2);
    let err = umbilic_closed_form();
    verdict(
        ok && branches && err <= CLOSED_FORM_TOL,
        format!(
            "{} runs, {slices} slices, min Q {min_q:.4e} > 0; p=0.6 second branch, p=0.9 first branch: {branches}; umbilic p=1 closed-form error {err:.2e} <= {CLOSED_FORM_TOL:e}{}",
            runs.len(),
            fail_list(&bad)
        ),
    )
}

fn euclidean_variants() -> Verdict {
    let amb = AmbientSpace::euclidean();
    let sp = contracting(CurvatureFunction::mean(), 1.0);
    let mut cfg = FlowConfig::new(amb, sp.clone(), Representation::GeodesicSphere { n: 2, radius: 1.0 }, 0.2);
    cfg.record_times = vec![0.1];
    cfg.store_every = 25;
    let traj = flow::run(&cfg).unwrap();
    let mut h = HarnackConfig::new(HarnackVariant::EuclideanContracting, &sp, amb, 2);
    h.delta = 0.5;
    let mut worst = 0.0f64;
    let mut q01 = f64::NAN;
    for (i, r) in traj.records.iter().enumerate().filter(|(_, r)| r.t > 0.0) {
        let q = harnack::evaluate(&traj.state(i).unwrap(), r.t, &h).unwrap().min;
        let rad = (1.0 - 4.0 * r.t).sqrt();
        worst = worst.max(ratio(q, 4.0 / rad.powi(3) + 1.0 / (rad * r.t)));
        if (r.t - 0.1).abs() < 1e-14 {
            q01 = q;
        }
    }
    let contracting_ok = worst <= CLOSED_FORM_TOL && (q01 - 21.5166).abs() < 1e-4;

    let ex = SpeedFunction::expanding(CurvatureFunction::mean(), 0.5).unwrap();
    let he = HarnackConfig::new(HarnackVariant::EuclideanExpanding, &ex, amb, 2);
    let sol = SphereSolution::new(amb, &ex, 2, 1.0, 0.0).unwrap();
    let mut cfg = FlowConfig::new(amb, ex.clone(), Representation::GeodesicSphere { n: 2, radius: 1.0 }, 100.0);
    let times: Vec<f64> = (0..=16).map(|k| 10f64.powf(-2.0 + 0.25 * k as f64)).collect();
    cfg.record_times = times.clone();
    cfg.store_every = usize::MAX;
    let traj = flow::run(&cfg).unwrap();
    let mut qs = vec![];
    let mut radius_err = 0.0f64;
    for &t in &times {
        let i = traj.index_of(t).unwrap();
        radius_err = radius_err.max(ratio(traj.records[i].radius, sol.radius(t).unwrap()));
        qs.push(harnack::evaluate(&traj.state(i).unwrap(), t, &he).unwrap().min);
    }
    let q1 = qs[8];
    let q100 = qs[16];
    let positive = qs.iter().all(|&q| q > 0.0);
    let decreasing = qs.windows(2).all(|w| w[1] < w[0]);
    let expanding_ok = positive && decreasing && q100 <= 0.1 * q1 && he.delta == -1.0;
    verdict(
        contracting_ok && expanding_ok,
        format!(
            "contracting: Q(0.1) = {q01:.6}, closed-form error {worst:.2e}; expanding delta={}: Q positive {positive}, decreasing {decreasing}, Q(100)/Q(1) = {:.3e} <= 0.1, radius error {radius_err:.1e}",
            he.delta,
            q100 / q1
        ),
    )
}

fn scans() -> Verdict {
    let functions = [
        CurvatureFunction::mean(),
        CurvatureFunction::norm(),
        CurvatureFunction::harmonic_mean(),
        CurvatureFunction::power_mean(3.0).unwrap(),
    ];
    let mut ok = true;
    let mut count = 0;
    let mut min_rel = f64::INFINITY;
    let mut eq_max = 0.0f64;
    let mut failed = vec![];
    for ineq in Inequality::ALL {
        for f in &functions {
            let applies = match ineq {
                Inequality::HarnackForm => f.convex,
                Inequality::Urbas => f.inverse_concave,
                _ => true,
            };
            if !applies {
                continue;
            }
            for n in [2, 3, 5] {
                let cfg = ScanConfig {
                    inequality: ineq,
                    function: f.clone(),
                    p: 0.5,
                    n,
                    samples: SCAN_SAMPLES,
                    seed: inequalities::DEFAULT_SEED,
                };
                let r = inequalities::scan(&cfg).unwrap();
                count += 1;
                min_rel = min_rel.min(r.min_relative);
                eq_max = eq_max.max(r.equality_max.unwrap_or(0.0));
                if !r.passes() {
                    ok = false;
                    failed.push(format!("{ineq}/{}/n={n}", f.name()));
                }
            }
        }
    }
    let urbas_named = [CurvatureFunction::mean(), CurvatureFunction::harmonic_mean()].iter().all(|f| f.inverse_concave);
    let mut d = format!(
        "{count} scans x {SCAN_SAMPLES} samples ({} tasks each): min gap/scale {min_rel:.2e} >= -{:e}, max |gap| at eta = s h {eq_max:.2e} <= {:e}",
        SCAN_SAMPLES.div_ceil(TASK_SIZE),
        inequalities::SCAN_TOLERANCE,
        inequalities::WITNESS_TOLERANCE
    );
    if !failed.is_empty() {
        d.push_str(&format!("; failed {}", failed.join(" ")));
    }
    verdict(ok && urbas_named, d)
}

fn zeta_grid() -> Verdict {
    let mut ok = true;
    let mut points = 0;
    let mut route = 0.0f64;
    let mut identity = 0.0f64;
    let mut min_ineq = f64::INFINITY;
    for k in 0..10 {
        let p = 0.55 + 0.05 * k as f64;
        let sp = contracting(CurvatureFunction::mean(), p);
        for n in [2, 3, 5] {
            for j in 0..41 {
                let h = 10f64.powf(-2.0 + 0.1 * j as f64);
                let fv = h.powf(p);
                let g = verify::zeta_conditions(&sp, n, fv).unwrap();
                let c = verify::zeta_conditions_closed(&sp, n, fv).unwrap();
                points += 1;
                route = route.max(g.max_difference(&c));
                if g.zeta_nonzero {
                    identity = identity.max(g.e.abs() / g.e_scale.max(1.0));
                }
                min_ineq = min_ineq.min([g.a, g.b, g.c, g.d].iter().map(|x| x / (1.0 + x.abs())).fold(f64::INFINITY, f64::min));
                ok &= g.satisfied() && c.satisfied() && g.zeta_nonzero == c.zeta_nonzero;
            }
        }
    }
    ok &= route <= 1e-10;
    verdict(
        ok,
        format!(
            "{points} grid points: min scaled inequality entry {min_ineq:.3e}, identity condition max relative {identity:.2e} <= {ZETA_TOLERANCE:e}, route difference {route:.2e}"
        ),
    )
}

fn convexity(kappa: &[(String, f64)]) -> Verdict {
    let (label, worst) = kappa.iter().fold((String::new(), f64::INFINITY), |acc, (l, k)| if *k < acc.1 { (l.clone(), *k) } else { acc });
    verdict(kappa.len() == 16 && worst > 0.0, format!("{} runs, min principal curvature {worst:.4e} > 0 ({label})", kappa.len()))
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Verdict {
    let tmp = tempfile::TempDir::new().unwrap();
    let cases = [
        (
            "simulate",
            "ambient.c = 1\nspeed.f = norm\nspeed.exponent = 0.5\ninitial.kind = profile\ninitial.radius = 0.7\ninitial.modes = 2:0.1,3:0.03\ngrid.nodes = 64\ntime.end = 0.05\ncadence = 20\n",
        ),
        (
            "monitor",
            "ambient.c = 1\nspeed.f = mean\nspeed.exponent = 0.9\ninitial.kind = profile\ninitial.radius = 0.7\ninitial.modes = 2:0.1,3:0.03\ngrid.nodes = 64\ntime.end = 0.05\ncadence = 20\nharnack.variant = chi3-strong-hp\n",
        ),
        ("verify-evolution", "ambient.c = 1\nspeed.f = mean\nspeed.exponent = 0.5\n"),
        ("scan-inequalities", "samples = 20000\nzeta.h_count = 5\n"),
        ("sphere-exact", "ambient.c = 1\nspeed.exponent = 1\ninitial.radius = 1\ntime.end = 0.3\nharnack.variant = chi3-strong-hp\n"),
    ];
    let mut ok = true;
    let mut files = 0;
    let mut differing = vec![];
    for (sub, cfg) in cases {
        let path = tmp.path().join(format!("{sub}.cfg"));
        fs::write(&path, cfg).unwrap();
        let mut outs = vec![];
        for (k, extra) in [&[][..], &["--deterministic"][..], &[][..]].iter().enumerate() {
            let out = tmp.path().join(format!("{sub}-{k}"));
            let mut args = vec!["harnack-lab".to_string(), sub.into(), "--config".into(), path.display().to_string()];
            args.extend(["--out".into(), out.display().to_string(), "--seed".into(), "11".into()]);
            args.extend(extra.iter().map(|s| s.to_string()));
            let code = harnack_lab::run_cli(args);
            ok &= code == 0;
            outs.push(read_dir(&out));
        }
        files += outs[0].len();
        if !(outs[0] == outs[1] && outs[0] == outs[2]) {
            ok = false;
            differing.push(sub);
        }
    }
    verdict(
        ok,
        format!("5 subcommands x 3 runs (threaded, deterministic, threaded): {files} files byte-identical{}", fail_list(&differing)),
    )
}

fn main() {
    let mut kappa = vec![];
    let mut all = true;
    let mut report = |k: usize, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        all &= v.pass;
        println!(
            "criterion {k} [{}] {name}: {} ({:.1} s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
    };
    report(1, "sphere-oracle fidelity", &mut sphere_oracle);
    report(2, "evolution-identity residuals", &mut ladder_residuals);
    report(3, "weak Harnack", &mut || weak_harnack(&mut kappa));
    report(4, "strong Harnack", &mut || strong_harnack(&mut kappa));
    report(5, "Euclidean variants", &mut euclidean_variants);
    report(6, "inequality scans", &mut scans);
    report(7, "zeta conditions", &mut zeta_grid);
    report(8, "convexity preservation", &mut || convexity(&kappa));
    report(9, "determinism", &mut determinism);
    if !all {
        std::process::exit(1);
    }
}
