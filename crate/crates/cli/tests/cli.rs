use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

fn run(dir: &Path, sub: &str, cfg: &str, out: &str, extra: &[&str]) -> Run {
    let cfg_path = dir.join(format!("{out}.cfg"));
    fs::write(&cfg_path, cfg).unwrap();
    let out = dir.join(out);
    let o = Command::new(env!("CARGO_BIN_EXE_harnack-lab"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run { code: o.status.code().unwrap(), stderr: String::from_utf8_lossy(&o.stderr).into_owned(), out }
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(String::from).collect();
    (head, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (head, rows) = csv(path);
    let j = head.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[j].parse().unwrap()).collect()
}

fn summary(r: &Run) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(r.out.join("summary.json")).unwrap()).unwrap()
}

const SPHERE: &str = "ambient.c = 0
speed.f = mean
speed.exponent = 1
initial.kind = sphere
initial.dim = 2
initial.radius = 1
time.end = 0.2
cadence = 20
";

#[test]
fn sphere_simulation_follows_the_closed_form() {
    let d = TempDir::new().unwrap();
    let r = run(d.path(), "simulate", SPHERE, "sph", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = column(&r.out.join("trajectory.csv"), "t");
    let rad = column(&r.out.join("trajectory.csv"), "radius");
    assert!(t.len() > 3);
    for (t, r) in t.iter().zip(&rad) {
        let exact = (1.0 - 4.0 * t).sqrt();
        assert!((r - exact).abs() <= 1e-6 * exact, "t = {t}: {r} vs {exact}");
    }
    let s = summary(&r);
    assert_eq!(s["status"], "ok");
    assert!((s["details"]["extinction"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn missing_exponent_names_the_field() {
    let d = TempDir::new().unwrap();
    let cfg: String = SPHERE.lines().filter(|l| !l.starts_with("speed.exponent")).map(|l| format!("{l}\n")).collect();
    let r = run(d.path(), "simulate", &cfg, "noexp", &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("speed.exponent"), "{}", r.stderr);
}

#[test]
fn unknown_key_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let r = run(d.path(), "simulate", &format!("{SPHERE}speed.exponnet = 1\n"), "typo", &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("speed.exponnet"));
}

#[test]
fn nonconvex_initial_data_exits_two() {
    let d = TempDir::new().unwrap();
    let cfg = "ambient.c = 0\nspeed.exponent = 1\ninitial.kind = curve\ninitial.radius = 1\ninitial.modes = 3:0.2\ngrid.nodes = 64\ntime.end = 0.1\n";
    let r = run(d.path(), "simulate", cfg, "nc", &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    let s = summary(&r);
    assert_eq!(s["exit_code"], 2);
    assert_eq!(s["details"]["termination"], "convexity-lost");
}

#[test]
fn single_level_ladder_is_rejected() {
    let d = TempDir::new().unwrap();
    let cfg = "ambient.c = 1\nspeed.f = mean\nspeed.exponent = 1\nladder.levels = 64\n";
    let r = run(d.path(), "verify-evolution", cfg, "one", &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("ladder.levels"));
}

#[test]
fn identity_filter_restricts_the_table() {
    let d = TempDir::new().unwrap();
    let cfg = "ambient.c = 1\nspeed.f = mean\nspeed.exponent = 1\nladder.levels = 32,48,64\nidentities = metric\n";
    let r = run(d.path(), "verify-evolution", cfg, "metric", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (head, rows) = csv(&r.out.join("residuals.csv"));
    assert_eq!(head[0], "identity");
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "metric"));
    let order = column(&r.out.join("residuals.csv"), "order");
    assert!(order[0] > 1.8);
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let d = TempDir::new().unwrap();
    let first = run(d.path(), "simulate", SPHERE, "sph", &[]);
    assert_eq!(first.code, 0);
    let before = fs::read(first.out.join("trajectory.csv")).unwrap();
    let again = run(d.path(), "simulate", SPHERE, "sph", &[]);
    assert_eq!(again.code, 1);
    assert!(again.stderr.contains("--force"));
    assert_eq!(fs::read(first.out.join("trajectory.csv")).unwrap(), before);
    assert_eq!(run(d.path(), "simulate", SPHERE, "sph", &["--force"]).code, 0);
}

#[test]
fn repeated_scans_are_byte_identical() {
    let d = TempDir::new().unwrap();
    let cfg = "samples = 1500\ndims = 2,3\nzeta.h_count = 3\nzeta.p = 0.6,0.9\n";
    let a = run(d.path(), "scan-inequalities", cfg, "a", &["--seed", "7"]);
    let b = run(d.path(), "scan-inequalities", cfg, "b", &["--seed", "7", "--deterministic"]);
    let c = run(d.path(), "scan-inequalities", cfg, "c", &["--seed", "8"]);
    assert_eq!((a.code, b.code, c.code), (0, 0, 0));
    for f in ["scan.csv", "zeta.csv", "summary.json"] {
        assert_eq!(fs::read(a.out.join(f)).unwrap(), fs::read(b.out.join(f)).unwrap(), "{f}");
    }
    assert_ne!(fs::read(a.out.join("scan.csv")).unwrap(), fs::read(c.out.join("scan.csv")).unwrap());
}

#[test]
fn urbas_runs_in_dimension_one() {
    let d = TempDir::new().unwrap();
    let cfg = "inequalities = urbas\nfunctions = mean,harmonic-mean\ndims = 1\nsamples = 200\nzeta = false\n";
    let r = run(d.path(), "scan-inequalities", cfg, "n1", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let gaps = column(&r.out.join("scan.csv"), "min_relative");
    assert_eq!(gaps.len(), 2);
    assert!(gaps.iter().all(|g| g.abs() < 1e-12));
}

#[test]
fn umbilic_strong_harnack_matches_closed_form() {
    let d = TempDir::new().unwrap();
    let cfg = "ambient.c = 1\nspeed.f = mean\nspeed.exponent = 1\ninitial.kind = sphere\ninitial.dim = 2\ninitial.radius = 1.2\ntime.end = 0.4\ncadence = 25\nharnack.variant = chi3-strong-hp\n";
    let r = run(d.path(), "monitor", cfg, "mon", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let path = r.out.join("harnack.csv");
    let t = column(&path, "t");
    let q = column(&path, "min_q");
    assert!(t.len() > 3);
    for (t, q) in t.iter().zip(&q) {
        let rad = (1.2f64.cos() * (2.0 * t).exp()).acos();
        let cot = 1.0 / rad.tan();
        let exact = 4.0 * cot.powi(3) + cot / t;
        assert!((q - exact).abs() <= 1e-6 * exact, "t = {t}: {q} vs {exact}");
    }
}

#[test]
fn nonpositive_offset_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let cfg = format!("{SPHERE}harnack.variant = chi1-general\nharnack.delta = 0\n");
    let r = run(d.path(), "monitor", &cfg, "bad", &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("harnack"));
}

#[test]
fn json_outputs_match_the_shipped_schemas() {
    let d = TempDir::new().unwrap();
    let schema = |name: &str| -> serde_json::Value {
        let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
        serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
    };
    let table = jsonschema::validator_for(&schema("table.schema.json")).unwrap();
    let summ = jsonschema::validator_for(&schema("summary.schema.json")).unwrap();
    let r = run(d.path(), "simulate", &format!("{SPHERE}output.format = json\n"), "js", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(r.out.join("trajectory.json")).unwrap()).unwrap();
    assert!(table.is_valid(&doc));
    assert!(summ.is_valid(&summary(&r)));
    assert!(doc["rows"][0]["min_q"].is_null());
    let bad = serde_json::json!({"subcommand": "simulate", "table": "trajectory", "columns": []});
    assert!(!table.is_valid(&bad));
}

#[test]
fn sphere_exact_reports_closed_form_and_domain() {
    let d = TempDir::new().unwrap();
    let cfg = "ambient.c = 0\nspeed.exponent = 1\ninitial.dim = 2\ninitial.radius = 1\ntime.end = 0.1\nsamples = 2\nharnack.variant = euclidean-contracting\nharnack.delta = 0.5\n";
    let r = run(d.path(), "sphere-exact", cfg, "ex", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let q = column(&r.out.join("sphere.csv"), "q");
    assert!((q[1] - 21.5166).abs() < 1e-4, "{}", q[1]);
    let late = cfg.replace("time.end = 0.1", "time.end = 0.3");
    assert_eq!(run(d.path(), "sphere-exact", &late, "late", &[]).code, 1);
}

#[test]
fn help_exits_zero_and_bad_subcommand_exits_one() {
    let bin = env!("CARGO_BIN_EXE_harnack-lab");
    assert_eq!(Command::new(bin).arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(Command::new(bin).arg("frobnicate").output().unwrap().status.code(), Some(1));
}
