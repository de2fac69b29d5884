use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use horotorus_harness::config::{ExperimentConfig, Kind};

fn horotorus(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horotorus"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn zeta_of_a_half() {
    let dir = tempfile::tempdir().unwrap();
    let o = horotorus(&["zeta", "--d", "2", "--b0", "1/2", "--t", "100"], dir.path());
    assert!(o.status.success());
    assert_eq!(report(dir.path())["values"]["zeta"], 2.0);
    let csv = fs::read_to_string(dir.path().join("zeta.csv")).unwrap();
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().nth(1), Some("1/2,1.0000000000000000e2,2"));
}

#[test]
fn orbit_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["orbit", "--d", "2", "--t", "3", "--samples", "200", "--seed", "7", "--b0", "1/3,2/3"];
    assert!(horotorus(&args, a.path()).status.success());
    assert!(horotorus(&args, b.path()).status.success());
    let x = fs::read(a.path().join("orbit.csv")).unwrap();
    assert_eq!(x, fs::read(b.path().join("orbit.csv")).unwrap());
    assert_eq!(String::from_utf8(x).unwrap().lines().count(), 201);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["orbit", "--d", "2", "--t", "30"],
        &["orbit", "--d", "3", "--t", "9"],
        &["fourier", "--d", "2", "--t", "2", "--samples", "50"],
        &["zeta", "--m", "1"],
    ];
    for args in cases {
        let o = horotorus(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    }
}

#[test]
fn exact_acceptance_subset() {
    let dir = tempfile::tempdir().unwrap();
    let o = horotorus(&["acceptance", "--criteria", "7,12"], dir.path());
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("criterion  7 PASS")));
    assert!(stdout.lines().any(|l| l.starts_with("criterion 12 PASS")));
    assert!(dir.path().join("acceptance.csv").exists());
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(Kind::Zeta);
    cfg.b0 = Some(vec!["1/2".into(), "1/3".into()]);
    cfg.m = 1;
    cfg.n = 2;
    cfg.t = Some(50.0);
    cfg.out = dir.path().join("run");
    let path = dir.path().join("cfg.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let back = ExperimentConfig::load(&path).unwrap();
    assert_eq!(serde_json::to_value(&back).unwrap(), serde_json::to_value(&cfg).unwrap());

    let o = Command::new(env!("CARGO_BIN_EXE_horotorus"))
        .args(["zeta", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let flags = dir.path().join("flags");
    assert!(horotorus(&["zeta", "--m", "1", "--n", "2", "--b0", "1/2,1/3", "--t", "50"], &flags).status.success());
    assert_eq!(report(&cfg.out)["values"], report(&flags)["values"]);
    // a config for another kind is rejected
    let o = Command::new(env!("CARGO_BIN_EXE_horotorus")).args(["weyl", "--config"]).arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
