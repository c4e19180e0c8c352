use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn randvort(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randvort"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RANDVORT_OUT")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn growth_is_bit_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["growth", "--radii", "1,10,100,1000", "--seed", "7"];
    assert!(randvort(&args, &a).status.success());
    assert!(randvort(&args, &b).status.success());
    let ca = fs::read(a.join("growth.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("growth.csv")).unwrap());
    assert_eq!(String::from_utf8(ca).unwrap().lines().count(), 5);
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["results"], mb["results"]);
    assert_eq!(ma["config"]["seed"], "7");
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["moments", "--points", "3:1", "--samples", "64", "--seed", "5"];
    assert!(randvort(&[&args[..], &["--threads", "1"]].concat(), &a).status.success());
    assert!(randvort(&[&args[..], &["--threads", "3"]].concat(), &b).status.success());
    assert_eq!(fs::read(a.join("moments.csv")).unwrap(), fs::read(b.join("moments.csv")).unwrap());
    // The worker count is not part of the configuration identity.
    assert_eq!(manifest(&a)["config_hash"], manifest(&b)["config_hash"]);
}

#[test]
fn verify_kernel_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("vk");
    let o = randvort(&["verify-kernel", "--identity-pairs", "2000"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["results"]["all_pass"], true);
    assert!(m["fitted_constants"]["log_lipschitz_constant"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(out.join("kernel_checks.csv")).unwrap();
    assert!(csv.starts_with("check,value,tolerance,pass"));
    assert!(!csv.contains(",false"));
}

#[test]
fn stationary_shear_records_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ev");
    let o = randvort(&["evolve", "--preset", "shear-stationary", "--t-final", "0.5", "--snapshots", "2"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    let r = &m["results"];
    assert!(r["drift"].as_f64().unwrap() <= r["drift_tol"].as_f64().unwrap());
    assert_eq!(r["drift_within_tol"], true);
    for k in 0..=2 {
        let bin = fs::metadata(out.join(format!("omega_{k:03}.bin"))).unwrap();
        assert_eq!(bin.len(), 128 * 128 * 8);
        let meta: Value = serde_json::from_str(&fs::read_to_string(out.join(format!("omega_{k:03}.json"))).unwrap()).unwrap();
        assert_eq!(meta["config_hash"], m["config_hash"]);
    }
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let ini = tmp.path().join("run.ini");
    fs::write(&ini, "[run]\nseed = 11\n\n[decorrelation]\nseparations = 4,16\n").unwrap();
    let out = tmp.path().join("d");
    let o = randvort(&["decorrelation", "--config", ini.to_str().unwrap(), "offset=2"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["config"]["seed"], "11");
    assert_eq!(m["config"]["offset"], "2");
    assert!(m["config_file_text"].as_str().unwrap().contains("separations"));
    let csv = fs::read_to_string(out.join("decorrelation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

fn expect_config_error(args: &[&str]) {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let o = randvort(args, &out);
    assert_eq!(o.status.code(), Some(2), "{args:?}");
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(!out.exists(), "nothing may be written on a config error");
}

#[test]
fn config_errors_exit_with_2() {
    expect_config_error(&["growth", "--bogus", "1"]);
    expect_config_error(&["growth", "--radii", "1,-3"]);
    expect_config_error(&["growth", "--distribution", "gaussian"]);
    expect_config_error(&["evolve", "--n", "100"]);
    expect_config_error(&["evolve", "--l", "7.5"]);
    expect_config_error(&["weak-residual", "--radius", "10"]);
    expect_config_error(&["weak-residual", "--t-support", "0"]);
    expect_config_error(&["moments", "--samples", "1"]);
    expect_config_error(&["morrey", "--r-max-values", "100.5"]);
}
