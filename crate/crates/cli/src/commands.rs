use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{json_f64, Cell, Format, OutputDir, Table};
use harnack_core::flow::{self, FlowConfig, SphereSolution, StepPolicy, StopConditions, Termination, Trajectory};
use harnack_core::geometry::{assemble, AmbientSpace, PolarShape, Representation};
use harnack_core::harnack::{self, HarnackConfig, HarnackReport, HarnackVariant};
use harnack_core::symfunc::{CurvatureFunction, SpeedFunction};
use harnack_core::verify::inequalities::{self, Inequality, ScanConfig};
use harnack_core::verify::{self, Identity, Ladder};
use serde_json::{json, Map, Value};

/// What a subcommand produced: tables to write and the summary fields.
pub struct Outcome {
    pub tables: Vec<Table>,
    pub details: Map<String, Value>,
    /// Non-success status, written to the summary before the process exits.
    pub failure: Option<CliError>,
}

pub struct Context<'a> {
    pub cfg: &'a Config,
    pub seed: Option<u64>,
}

fn ambient(cfg: &Config) -> CliResult<AmbientSpace> {
    let c: f64 = cfg.require("ambient.c")?;
    AmbientSpace::new(c).map_err(|e| cfg.error("ambient.c", e))
}

fn speed(cfg: &Config) -> CliResult<SpeedFunction> {
    let name: String = cfg.get_or("speed.f", "mean".to_string())?;
    let power: Option<f64> = cfg.get("speed.f_power")?;
    let f = CurvatureFunction::by_name(&name, power).map_err(|e| cfg.error("speed.f", e))?;
    let a: f64 = cfg.require("speed.exponent")?;
    let mode: String = cfg.get_or("speed.mode", "contracting".to_string())?;
    match mode.as_str() {
        "contracting" => SpeedFunction::contracting(f, a),
        "expanding" => SpeedFunction::expanding(f, a),
        other => return Err(cfg.error("speed.mode", format!("expected contracting or expanding, got `{other}`"))),
    }
    .map_err(|e| cfg.error("speed.exponent", e))
}

/// `"2:0.1, 3:0.03"`
fn modes(cfg: &Config, default: Vec<(u32, f64)>) -> CliResult<Vec<(u32, f64)>> {
    let Some(list) = cfg.list::<String>("initial.modes")? else { return Ok(default) };
    list.iter()
        .filter(|s| !s.is_empty() && s.as_str() != "none")
        .map(|s| {
            let (k, e) = s.split_once(':').ok_or_else(|| cfg.error("initial.modes", format!("expected k:eps, got `{s}`")))?;
            let k = k.trim().parse::<u32>().map_err(|_| cfg.error("initial.modes", format!("bad mode `{k}`")))?;
            let e = e.trim().parse::<f64>().map_err(|_| cfg.error("initial.modes", format!("bad amplitude `{e}`")))?;
            Ok((k, e))
        })
        .collect()
}

struct Initial {
    repr: Representation<f64>,
    n: usize,
    /// Radius when the data is a round sphere, for the closed-form solution.
    round: Option<f64>,
}

fn initial(cfg: &Config, amb: AmbientSpace) -> CliResult<Initial> {
    let kind: String = cfg.require("initial.kind")?;
    let radius: f64 = cfg.require("initial.radius")?;
    if !(radius > 0.0) {
        return Err(cfg.error("initial.radius", "must be positive"));
    }
    let nodes = || -> CliResult<usize> {
        let n: usize = cfg.require("grid.nodes")?;
        if n < 8 {
            return Err(cfg.error("grid.nodes", "need at least 8 nodes"));
        }
        Ok(n)
    };
    match kind.as_str() {
        "sphere" => {
            let n: usize = cfg.get_or("initial.dim", 2)?;
            if n == 0 {
                return Err(cfg.error("initial.dim", "must be at least 1"));
            }
            Ok(Initial { repr: Representation::GeodesicSphere { n, radius }, n, round: Some(radius) })
        }
        "profile" | "curve" => {
            let shape = PolarShape { radius, modes: modes(cfg, vec![])? };
            let round = shape.modes.iter().all(|m| m.1 == 0.0).then_some(radius);
            let nodes = nodes()?;
            if kind == "profile" {
                Ok(Initial { repr: Representation::polar_profile(amb, nodes, &shape), n: 2, round })
            } else {
                Ok(Initial { repr: Representation::polar_curve(amb, nodes, &shape), n: 1, round })
            }
        }
        other => Err(cfg.error("initial.kind", format!("expected sphere, profile or curve, got `{other}`"))),
    }
}

struct Setup {
    flow: FlowConfig<f64>,
    n: usize,
    round: Option<f64>,
}

fn flow_setup(cfg: &Config) -> CliResult<Setup> {
    let amb = ambient(cfg)?;
    let sp = speed(cfg)?;
    let init = initial(cfg, amb)?;
    let t_end: f64 = cfg.require("time.end")?;
    let mut fc = FlowConfig::new(amb, sp, init.repr, t_end);
    fc.t_start = cfg.get_or("time.start", 0.0)?;
    let policy: String = cfg.get_or("step.policy", "parabolic".to_string())?;
    fc.policy = match policy.as_str() {
        "parabolic" => StepPolicy::Parabolic { safety: cfg.get_or("step.safety", flow::DEFAULT_SAFETY)? },
        "fixed" => StepPolicy::Fixed(cfg.require("step.dt")?),
        other => return Err(cfg.error("step.policy", format!("expected parabolic or fixed, got `{other}`"))),
    };
    fc.store_every = cfg.get_or("cadence", 1)?;
    fc.stop = StopConditions { kappa_cap: cfg.get("stop.kappa_cap")?, radius_floor: cfg.get("stop.radius_floor")? };
    fc.redistribution = cfg.get_or("flow.redistribution", 0.0)?;
    fc.max_steps = cfg.get_or("flow.max_steps", fc.max_steps)?;
    fc.validate()?;
    Ok(Setup { flow: fc, n: init.n, round: init.round })
}

fn harnack_config(cfg: &Config, s: &Setup, default: Option<HarnackVariant>) -> CliResult<Option<HarnackConfig>> {
    let variant = match cfg.raw("harnack.variant") {
        Some(name) => HarnackVariant::from_name(name).map_err(|e| cfg.error("harnack.variant", e))?,
        None => match default {
            Some(v) => v,
            None => return Ok(None),
        },
    };
    let mut h = HarnackConfig::new(variant, &s.flow.speed, s.flow.ambient, s.n);
    if let Some(d) = cfg.get::<f64>("harnack.delta")? {
        h.delta = d;
    }
    h.validate(&s.flow.speed).map_err(|e| cfg.error("harnack.variant", e))?;
    if matches!(variant, HarnackVariant::EuclideanContracting | HarnackVariant::EuclideanExpanding) && s.flow.ambient.is_sphere() {
        return Err(cfg.error("harnack.variant", "the Euclidean variants need ambient.c = 0"));
    }
    Ok(Some(h))
}

fn default_variant(sp: &SpeedFunction) -> HarnackVariant {
    match sp.mode() {
        harnack_core::symfunc::FlowMode::Contracting => HarnackVariant::Chi1General,
        harnack_core::symfunc::FlowMode::Expanding => HarnackVariant::EuclideanExpanding,
    }
}

fn harnack_at(traj: &Trajectory, i: usize, h: &HarnackConfig) -> CliResult<Option<HarnackReport>> {
    let t = traj.records[i].t;
    if !(t > 0.0) {
        return Ok(None);
    }
    let st = traj.state(i)?;
    Ok(Some(harnack::evaluate(&st, t, h)?))
}

fn termination_details(d: &mut Map<String, Value>, traj: &Trajectory) {
    d.insert("termination".into(), traj.termination.label().into());
    d.insert("steps".into(), traj.steps.into());
    d.insert("records".into(), traj.records.len().into());
    if let Some(last) = traj.records.last() {
        d.insert("final_t".into(), json_f64(last.t));
        d.insert("final_radius".into(), json_f64(last.radius));
    }
    let mon = verify::convexity_monitor(traj);
    d.insert("min_kappa".into(), json_f64(mon.min_kappa));
    d.insert("min_kappa_t".into(), json_f64(mon.t));
    d.insert("min_kappa_node".into(), mon.node.into());
}

fn termination_failure(traj: &Trajectory) -> Option<CliError> {
    match traj.termination {
        Termination::ConvexityLost { t, node, kappa } => {
            Some(CliError::ConvexityLost(format!("at t = {t}, node {node}, kappa = {kappa:e}")))
        }
        _ => None,
    }
}

fn sphere_solution(s: &Setup) -> CliResult<Option<SphereSolution>> {
    match s.round {
        Some(r0) => Ok(Some(SphereSolution::new(s.flow.ambient, &s.flow.speed, s.n, r0, s.flow.t_start)?)),
        None => Ok(None),
    }
}

pub fn simulate(ctx: &Context) -> CliResult<Outcome> {
    let cfg = ctx.cfg;
    let s = flow_setup(cfg)?;
    let h = harnack_config(cfg, &s, Some(default_variant(&s.flow.speed)))?;
    let exact = sphere_solution(&s)?;
    cfg.finish()?;
    let traj = flow::run(&s.flow)?;
    let mut t = Table::new(
        "trajectory",
        &["t", "step", "kappa_min", "kappa_min_node", "kappa_max", "radius", "exact_radius", "min_q", "q_argmin"],
    );
    for (i, r) in traj.records.iter().enumerate() {
        let q = match &h {
            Some(h) => harnack_at(&traj, i, h)?,
            None => None,
        };
        let exact_r = exact.as_ref().and_then(|e| e.radius(r.t).ok()).unwrap_or(f64::NAN);
        t.push(vec![
            r.t.into(),
            r.step.into(),
            r.kappa_min.into(),
            r.kappa_min_node.into(),
            r.kappa_max.into(),
            r.radius.into(),
            exact_r.into(),
            q.as_ref().map_or(f64::NAN, |q| q.min).into(),
            q.as_ref().map_or(Cell::S(String::new()), |q| q.argmin.into()),
        ]);
    }
    let mut d = Map::new();
    termination_details(&mut d, &traj);
    if let Some(v) = &h {
        d.insert("harnack_variant".into(), v.variant.name().into());
    }
    if let Some(e) = &exact {
        d.insert("extinction".into(), e.extinction().map_or(Value::Null, json_f64));
    }
    Ok(Outcome { tables: vec![t], details: d, failure: termination_failure(&traj) })
}

pub fn monitor(ctx: &Context) -> CliResult<Outcome> {
    let cfg = ctx.cfg;
    let s = flow_setup(cfg)?;
    let h = harnack_config(cfg, &s, Some(default_variant(&s.flow.speed)))?.expect("variant has a default");
    cfg.finish()?;
    let traj = flow::run(&s.flow)?;
    let mut t = Table::new(
        "harnack",
        &["t", "min_q", "argmin", "dt_speed", "theta", "correction", "offset", "zeta_term", "kappa_min"],
    );
    let mut worst = f64::INFINITY;
    for (i, r) in traj.records.iter().enumerate() {
        let Some(q) = harnack_at(&traj, i, &h)? else { continue };
        let b = q.terms[q.argmin];
        worst = worst.min(q.min);
        t.push(vec![
            q.t.into(),
            q.min.into(),
            q.argmin.into(),
            b.dt_speed.into(),
            b.theta.into(),
            b.correction.into(),
            b.offset.into(),
            b.zeta_term.into(),
            r.kappa_min.into(),
        ]);
    }
    let mut d = Map::new();
    termination_details(&mut d, &traj);
    d.insert("harnack_variant".into(), h.variant.name().into());
    d.insert("delta".into(), json_f64(h.delta));
    d.insert("min_q".into(), json_f64(worst));
    let failure = termination_failure(&traj).or_else(|| {
        (!(worst > 0.0)).then(|| CliError::CheckFailed(format!("Harnack quantity not positive: min Q = {worst:e}")))
    });
    Ok(Outcome { tables: vec![t], details: d, failure })
}

pub fn verify_evolution(ctx: &Context) -> CliResult<Outcome> {
    let cfg = ctx.cfg;
    let amb = ambient(cfg)?;
    let sp = speed(cfg)?;
    if sp.exponent <= 0.0 {
        return Err(cfg.error("speed.mode", "evolution checks run contracting flows only"));
    }
    let mut ladder = Ladder::standard(amb, sp);
    if let Some(levels) = cfg.list::<usize>("ladder.levels")? {
        ladder.levels = levels;
    }
    ladder.t_centre = cfg.get_or("ladder.t_centre", ladder.t_centre)?;
    ladder.dt_coarse = cfg.get("ladder.dt")?;
    ladder.shape.radius = cfg.get_or("initial.radius", ladder.shape.radius)?;
    ladder.shape.modes = modes(cfg, ladder.shape.modes.clone())?;
    let ids = match cfg.list::<String>("identities")? {
        Some(names) => names
            .iter()
            .map(|n| Identity::from_name(n).map_err(|e| cfg.error("identities", e)))
            .collect::<CliResult<Vec<_>>>()?,
        None => Identity::ALL.to_vec(),
    };
    let min_order: f64 = cfg.get_or("threshold.order", 1.8)?;
    let max_residual: f64 = cfg.get_or("threshold.residual", 1e-4)?;
    ladder.validate().map_err(|e| cfg.error("ladder.levels", e))?;
    cfg.finish()?;
    let reports = verify::run_ladder(&ladder, &ids)?;
    let mut t = Table::new("residuals", &["identity", "level", "t", "dt", "residual", "rhs_scale", "order", "pass"]);
    let mut failed = vec![];
    for rep in &reports {
        let pass = rep.passes(min_order, max_residual);
        if !pass {
            failed.push(rep.identity.name());
        }
        for e in &rep.entries {
            t.push(vec![
                rep.identity.name().into(),
                e.nodes.into(),
                e.t.into(),
                e.dt.into(),
                e.residual.into(),
                e.rhs_scale.into(),
                rep.order.unwrap_or(f64::NAN).into(),
                (pass as usize).into(),
            ]);
        }
    }
    let skipped: Vec<&str> = ids.iter().filter(|i| !reports.iter().any(|r| r.identity == **i)).map(|i| i.name()).collect();
    let mut d = Map::new();
    d.insert("levels".into(), json!(ladder.levels));
    d.insert("threshold_order".into(), json_f64(min_order));
    d.insert("threshold_residual".into(), json_f64(max_residual));
    d.insert("skipped".into(), json!(skipped));
    d.insert("failed".into(), json!(failed));
    let failure = (!failed.is_empty()).then(|| CliError::CheckFailed(format!("identities above threshold: {}", failed.join(", "))));
    Ok(Outcome { tables: vec![t], details: d, failure })
}

fn kappa_text(k: &[f64]) -> String {
    k.iter().map(|x| crate::output::fmt17(*x)).collect::<Vec<_>>().join(" ")
}

pub fn scan_inequalities(ctx: &Context) -> CliResult<Outcome> {
    let cfg = ctx.cfg;
    let ineqs = match cfg.list::<String>("inequalities")? {
        Some(v) => v.iter().map(|s| Inequality::from_name(s).map_err(|e| cfg.error("inequalities", e))).collect::<CliResult<Vec<_>>>()?,
        None => Inequality::ALL.to_vec(),
    };
    let fnames = cfg.list::<String>("functions")?.unwrap_or_else(|| vec!["mean".into(), "norm".into(), "harmonic-mean".into()]);
    let power: Option<f64> = cfg.get("functions.power")?;
    let funcs = fnames
        .iter()
        .map(|n| CurvatureFunction::by_name(n, power).map_err(|e| cfg.error("functions", e)))
        .collect::<CliResult<Vec<_>>>()?;
    let dims = cfg.list::<usize>("dims")?.unwrap_or_else(|| vec![2, 3, 5]);
    let samples: usize = cfg.get_or("samples", 100_000)?;
    let seed: u64 = match ctx.seed {
        Some(s) => s,
        None => cfg.get_or("seed", inequalities::DEFAULT_SEED)?,
    };
    let p: f64 = cfg.get_or("harnack.p", 0.5)?;
    let with_zeta: bool = cfg.get_or("zeta", true)?;
    let zeta_p = cfg.list::<f64>("zeta.p")?.unwrap_or_else(|| (0..10).map(|k| 0.55 + 0.05 * k as f64).collect());
    let zeta_h_count: usize = cfg.get_or("zeta.h_count", 9)?;
    cfg.finish()?;
    if dims.contains(&0) {
        return Err(cfg.error("dims", "dimensions must be at least 1"));
    }

    let mut t = Table::new(
        "scan",
        &[
            "inequality",
            "function",
            "n",
            "samples",
            "seed",
            "min_relative",
            "witness_gap",
            "witness_scale",
            "witness_kappa",
            "violations",
            "equality_max",
            "pass",
        ],
    );
    let mut failed = vec![];
    let mut skipped = vec![];
    for &ineq in &ineqs {
        for f in &funcs {
            let applies = match ineq {
                Inequality::HarnackForm => f.convex,
                Inequality::Urbas => f.inverse_concave,
                _ => true,
            };
            if !applies {
                skipped.push(format!("{ineq}/{}", f.name()));
                continue;
            }
            for &n in &dims {
                let sc = ScanConfig { inequality: ineq, function: f.clone(), p, n, samples, seed };
                let r = inequalities::scan(&sc)?;
                let pass = r.passes();
                if !pass {
                    failed.push(format!("{ineq}/{}/n={n}", f.name()));
                }
                t.push(vec![
                    ineq.name().into(),
                    r.function.clone().into(),
                    n.into(),
                    samples.into(),
                    Cell::S(seed.to_string()),
                    r.min_relative.into(),
                    r.witness_gap.value.into(),
                    r.witness_gap.scale.into(),
                    kappa_text(&r.witness.kappa).into(),
                    r.violations.into(),
                    r.equality_max.unwrap_or(f64::NAN).into(),
                    (pass as usize).into(),
                ]);
            }
        }
    }
    let mut tables = vec![t];
    if with_zeta {
        let mut z = Table::new("zeta", &["p", "n", "h", "a", "b", "c", "d", "e", "route_difference", "pass"]);
        for &pp in &zeta_p {
            let sp = SpeedFunction::contracting(CurvatureFunction::mean(), pp).map_err(|e| cfg.error("zeta.p", e))?;
            for &n in &dims {
                for k in 0..zeta_h_count {
                    let h = if zeta_h_count == 1 { 1.0 } else { 10f64.powf(-2.0 + 4.0 * k as f64 / (zeta_h_count - 1) as f64) };
                    let fv = h.powf(pp);
                    let g = verify::zeta_conditions(&sp, n, fv)?;
                    let c = verify::zeta_conditions_closed(&sp, n, fv)?;
                    let diff = g.max_difference(&c);
                    let pass = g.satisfied() && diff <= 1e-10;
                    if !pass {
                        failed.push(format!("zeta/p={pp}/n={n}/H={h}"));
                    }
                    let mut row: Vec<Cell> = vec![pp.into(), n.into(), h.into()];
                    row.extend(g.entries().iter().map(|&x| Cell::F(x)));
                    row.push(diff.into());
                    row.push((pass as usize).into());
                    z.push(row);
                }
            }
        }
        tables.push(z);
    }
    let mut d = Map::new();
    d.insert("seed".into(), seed.to_string().into());
    d.insert("samples".into(), samples.into());
    d.insert("skipped".into(), json!(skipped));
    d.insert("failed".into(), json!(failed));
    let failure = (!failed.is_empty()).then(|| CliError::CheckFailed(format!("inequality checks failed: {}", failed.join(", "))));
    Ok(Outcome { tables, details: d, failure })
}

pub fn sphere_exact(ctx: &Context) -> CliResult<Outcome> {
    let cfg = ctx.cfg;
    let amb = ambient(cfg)?;
    let sp = speed(cfg)?;
    let n: usize = cfg.get_or("initial.dim", 2)?;
    let r0: f64 = cfg.require("initial.radius")?;
    let t0: f64 = cfg.get_or("time.start", 0.0)?;
    let t_end: f64 = cfg.require("time.end")?;
    let count: usize = cfg.get_or("samples", 101)?;
    let variant = match cfg.raw("harnack.variant") {
        Some(v) => Some(HarnackVariant::from_name(v).map_err(|e| cfg.error("harnack.variant", e))?),
        None => None,
    };
    let delta: Option<f64> = cfg.get("harnack.delta")?;
    cfg.finish()?;
    if count < 2 {
        return Err(cfg.error("samples", "need at least 2 sample times"));
    }
    if !(t_end > t0) {
        return Err(cfg.error("time.end", "must exceed time.start"));
    }
    let sol = SphereSolution::new(amb, &sp, n, r0, t0)?;
    if let Some(ext) = sol.extinction() {
        if t_end >= ext {
            return Err(cfg.error("time.end", format!("beyond the extinction time {ext}")));
        }
    }
    let h = match variant {
        Some(v) => {
            let mut h = HarnackConfig::new(v, &sp, amb, n);
            if let Some(d) = delta {
                h.delta = d;
            }
            h.validate(&sp).map_err(|e| cfg.error("harnack.variant", e))?;
            Some(h)
        }
        None => None,
    };
    let mut t = Table::new("sphere", &["t", "radius", "curvature", "speed", "q"]);
    for k in 0..count {
        let tk = t0 + (t_end - t0) * k as f64 / (count - 1) as f64;
        let r = sol.radius(tk)?;
        let q = match &h {
            Some(h) if tk > 0.0 => {
                let st = assemble(&Representation::GeodesicSphere { n, radius: r }, amb, &sp, tk)?;
                harnack::evaluate(&st, tk, h)?.min
            }
            _ => f64::NAN,
        };
        t.push(vec![tk.into(), r.into(), sol.curvature(tk)?.into(), sol.speed_value(tk)?.into(), q.into()]);
    }
    let mut d = Map::new();
    d.insert("extinction".into(), sol.extinction().map_or(Value::Null, json_f64));
    Ok(Outcome { tables: vec![t], details: d, failure: None })
}

pub fn output_format(cfg: &Config) -> CliResult<Format> {
    match cfg.raw("output.format") {
        Some(s) => Format::parse(s),
        None => Ok(Format::Csv),
    }
}

pub fn table_names(sub: &str) -> &'static [&'static str] {
    match sub {
        "simulate" => &["trajectory"],
        "monitor" => &["harnack"],
        "verify-evolution" => &["residuals"],
        "scan-inequalities" => &["scan", "zeta"],
        "sphere-exact" => &["sphere"],
        _ => &[],
    }
}

pub fn write_all(out: &OutputDir, sub: &str, fmt: Format, o: &Outcome) -> CliResult<Vec<String>> {
    let mut files = vec![];
    for t in &o.tables {
        let p = out.write_table(t, fmt, sub)?;
        files.push(p.file_name().unwrap_or_default().to_string_lossy().into_owned());
    }
    Ok(files)
}
