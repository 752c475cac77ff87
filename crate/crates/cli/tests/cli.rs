use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ppstat(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppstat"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("PPSTAT_SEED")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn single_line_error(o: &Output, code: i32) {
    assert_eq!(o.status.code(), Some(code), "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("ppstat: error["), "{err}");
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("generate_poisson.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(ppstat(&["generate"], &cfg, &a).status.success());
    assert!(ppstat(&["generate"], &cfg, &b).status.success());
    let pa = std::fs::read(a.join("pattern_000.json")).unwrap();
    assert_eq!(pa, std::fs::read(b.join("pattern_000.json")).unwrap());
    assert_eq!(manifest(&a)["outputs"], manifest(&b)["outputs"]);
    assert_eq!(manifest(&a)["config_sha256"], manifest(&b)["config_sha256"]);
}

#[test]
fn seed_override_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("generate_poisson.json");
    let plain = tmp.path().join("plain");
    assert!(ppstat(&["generate"], &cfg, &plain).status.success());
    let other = tmp.path().join("other");
    let o = Command::new(env!("CARGO_BIN_EXE_ppstat"))
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&other)
        .env("PPSTAT_SEED", "8")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_ne!(manifest(&plain)["outputs"], manifest(&other)["outputs"]);
}

#[test]
fn doubled_lattice_distances_all_below_half() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let o = ppstat(&["match", "--reps-scale", "0.1"], &configs().join("match_doubled_lattice.json"), &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv_text = std::fs::read_to_string(out.join("distances.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(csv_text.as_bytes());
    let mut f_half = 0.0;
    for rec in rows.records() {
        let rec = rec.unwrap();
        let r: f64 = rec[0].parse().unwrap();
        if r <= 0.5 {
            f_half = rec[1].parse().unwrap();
        }
    }
    assert_eq!(f_half, 1.0);
    assert!(out.join("cdf.svg").exists());
}

#[test]
fn shifted_lattice_is_flagged() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    let o = ppstat(&["diagnose", "--reps-scale", "0.5"], &configs().join("diagnose_shifted_lattice.json"), &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "evidence-against-tolerance");
}

#[test]
fn plot_command_fits_tail_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv_text = String::from("r,tail\n");
    for k in 0..6 {
        let r = 2f64.powi(k);
        csv_text.push_str(&format!("{r},{}\n", 0.3 * r.powi(-2)));
    }
    std::fs::write(tmp.path().join("tail.csv"), csv_text).unwrap();
    let cfg = write_config(tmp.path(), "plot.json", r#"{"command":"plot","input":"tail.csv","kind":"tail-loglog"}"#);
    let out = tmp.path().join("p");
    assert!(ppstat(&["plot"], &cfg, &out).status.success());
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("plot.json")).unwrap()).unwrap();
    assert!((meta["slope"].as_f64().unwrap() + 2.0).abs() < 0.05);
}

#[test]
fn schema_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write_config(
        tmp.path(),
        "u.json",
        r#"{"command":"generate","seed":1,"extra":true,"generator":{"process":{"kind":"poisson","intensity":1},"window":{"kind":"box","bounds":[[0,1]]}}}"#,
    );
    single_line_error(&ppstat(&["generate"], &unknown, &tmp.path().join("o")), 2);
    // command on the line disagrees with the config
    single_line_error(&ppstat(&["match"], &configs().join("generate_poisson.json"), &tmp.path().join("o")), 2);
    let bad_param = write_config(
        tmp.path(),
        "b.json",
        r#"{"command":"generate","seed":1,"generator":{"process":{"kind":"poisson","intensity":-1},"window":{"kind":"box","bounds":[[0,1]]}}}"#,
    );
    single_line_error(&ppstat(&["generate"], &bad_param, &tmp.path().join("o")), 2);
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn computation_errors_exit_three_and_leave_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    // the covering disc of this window is beyond the supported planar radius
    let cfg = write_config(
        tmp.path(),
        "g.json",
        r#"{"command":"generate","seed":1,"generator":{"process":{"kind":"gaf-planar"},"window":{"kind":"box","bounds":[[-30,30],[-30,30]]}}}"#,
    );
    let out = tmp.path().join("o");
    single_line_error(&ppstat(&["generate"], &cfg, &out), 3);
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn io_errors_exit_four() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    single_line_error(&ppstat(&["generate"], &configs().join("generate_poisson.json"), &blocker.join("out")), 4);
    single_line_error(&ppstat(&["generate"], &tmp.path().join("missing.json"), &tmp.path().join("o")), 4);
}
