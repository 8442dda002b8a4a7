use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn omcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omcheck"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, format!("schema_version = 1\n{body}")).unwrap();
    p.to_string_lossy().into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn young_queries() {
    let o = omcheck(&["young", "classify", "power", "p=2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("delta2: true") && s.contains("nabla2: true"), "{s}");
    assert!(s.contains("indices: (2.000000, 2.000000)"), "{s}");

    let s = stdout(&omcheck(&["young", "classify", "identity"]));
    assert!(s.contains("nabla2: false"), "{s}");

    let s = stdout(&omcheck(&["young", "invert", "power", "p=2", "s=9"]));
    assert!(s.contains("phi^-1(9) = 3"), "{s}");

    let bad = omcheck(&["young", "classify", "power", "p=abc"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(omcheck(&["young", "invert", "power", "p=2"]).status.code() == Some(2));
}

#[test]
fn norms_of_simple_functions() {
    let tmp = tempfile::tempdir().unwrap();
    let o = omcheck(&["norm", "orlicz", "indicator", "center=0", "radius=1"]);
    assert!(o.status.success());
    let v = field(&stdout(&o), "value");
    assert!((v / 2f64.sqrt() - 1.0).abs() < 0.02, "{v}");

    assert_eq!(field(&stdout(&omcheck(&["norm", "weak", "zero"])), "value"), 0.0);

    let cfg = write_config(tmp.path(), "lebesgue.toml", "[shapes]\nphi1 = \"lebesgue\"\n");
    let m = field(&stdout(&omcheck(&["--config", &cfg, "norm", "morrey", "indicator", "radius=1"])), "value");
    assert!((m / v - 1.0).abs() < 0.02, "{m} vs {v}");

    let from_config = omcheck(&["--config", configs().join("norm-example.toml").to_str().unwrap(), "norm", "orlicz"]);
    assert_eq!(field(&stdout(&from_config), "value"), v);

    let json = omcheck(&["--format", "jsonl", "norm", "orlicz", "indicator", "radius=1"]);
    let parsed: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(parsed["value"].as_f64().unwrap() > 1.4);
}

#[test]
fn condition_checks_set_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = omcheck(&["check", "wgtcond"]);
    assert_eq!(o.status.code(), Some(0));
    let c = field(&stdout(&o), "constant");
    assert!((c - 2.0).abs() < 0.02, "{c}");

    let cfg = write_config(tmp.path(), "es1.toml", "[shapes]\nphi1 = \"expradius\"\nphi2 = \"expradius\"\n");
    let o = omcheck(&["--config", &cfg, "check", "es1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict: fails"));

    let cfg = write_config(tmp.path(), "g.toml", "[shapes]\nphi1 = \"lebesgue\"\n");
    assert_eq!(omcheck(&["--config", &cfg, "check", "gclass"]).status.code(), Some(0));

    assert_eq!(omcheck(&["check", "ap", "p=2"]).status.code(), Some(0));
    assert_eq!(omcheck(&["check", "wgtcond", "p=2"]).status.code(), Some(2));
    assert_eq!(omcheck(&["check", "nosuch"]).status.code(), Some(2));
}

#[test]
fn bad_configs_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "colour = \"blue\"\n");
    let o = omcheck(&["--config", &cfg, "check", "wgtcond"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    let cfg = write_config(tmp.path(), "w.toml", "weight = \"constant c=0\"\n");
    assert_eq!(omcheck(&["--config", &cfg, "norm", "orlicz", "indicator", "radius=1"]).status.code(), Some(2));
}

#[test]
fn verify_identity_suite_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = omcheck(&["verify", "identity-suite", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("identity-suite [identity-suite]: pass"));
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.starts_with("name,hypothesis,sup_constant,ratio_max,drift,verdict\n"));
    assert!(out.join("reports.jsonl").exists());

    let again = omcheck(&["report", out.join("reports.jsonl").to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(stdout(&again), csv);
}

#[test]
fn verify_necessity_prints_fit() {
    let o = omcheck(&["verify", "cz-necessity"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("slope=") && s.contains("correlation="), "{s}");
}

#[test]
fn verify_blames_the_violated_condition() {
    let cfg = configs().join("violates-wgtcond.toml");
    let o = omcheck(&["--config", cfg.to_str().unwrap(), "verify", "all"]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains(": fail") && s.contains("blame=") && s.contains("wgtcond"), "{s}");
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let o = omcheck(&["verify", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown experiment"));
}

#[test]
fn verify_all_is_byte_identical_across_runs() {
    let run = || omcheck(&["verify", "all", "--grid-points", "1024", "--seed", "7", "--format", "csv"]);
    let (a, b) = (run(), run());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(1), "planted entries fail");
    let text = stdout(&a);
    assert_eq!(text.lines().filter(|l| l.starts_with("maximal-planted,")).count(), 1);
}
