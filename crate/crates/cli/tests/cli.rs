use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn spinbell(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbell"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const XY8_GROUND: &str = r#"{
  "seed": 11,
  "lattice": {"kind": "chain", "L": 8},
  "hamiltonian": {"family": "xy_chain", "gamma": 0.5, "fields": 1.0},
  "state": {"kind": "ground"},
  "schedule": {"parties": 3, "width": 1, "tau": [1, 2, 3]},
  "optimizer": {"restarts": 4},
  "inequality": {"name": "svetlichny3"},
  "certify": {"tau": 3}
}"#;

#[test]
fn build_summary() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"lattice": {"kind": "chain", "L": 4},
            "hamiltonian": {"family": "xy_chain", "gamma": 0.5, "fields": 1.0},
            "state": {"kind": "ground"}}"#,
    );
    let o = spinbell(dir.path(), &["build", "--config", "c.json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["sites"], 4);
    assert_eq!(v["hamiltonian"]["bonds"], 3);
    assert_eq!(v["hamiltonian"]["field_terms"], 4);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", "{\"lattice\": ");
    assert_eq!(
        code(&spinbell(dir.path(), &["build", "--config", "bad.json"])),
        2
    );
    write(
        dir.path(),
        "typo.json",
        r#"{"lattice": {"kind": "chain", "L": 4}, "state": {"kind": "ghz"}, "shedule": {}}"#,
    );
    let o = spinbell(dir.path(), &["build", "--config", "typo.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("shedule"));
    assert_eq!(code(&spinbell(dir.path(), &["build"])), 2);
    assert_eq!(
        code(&spinbell(
            dir.path(),
            &["build", "--config", "missing.json"]
        )),
        2
    );
}

#[test]
fn oversized_lattice_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "big.json",
        r#"{"lattice": {"kind": "chain", "L": 30},
            "hamiltonian": {"family": "xy_chain", "gamma": 0.5, "fields": 1.0},
            "state": {"kind": "ground"}, "spectrum": "full"}"#,
    );
    assert_eq!(
        code(&spinbell(dir.path(), &["build", "--config", "big.json"])),
        3
    );
}

#[test]
fn sweep_rows_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", XY8_GROUND);
    let a = spinbell(
        dir.path(),
        &["sweep", "--config", "c.json", "--threads", "1"],
    );
    let b = spinbell(
        dir.path(),
        &["sweep", "--config", "c.json", "--threads", "4"],
    );
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "tau,t,s,partition,joint,factored,defect,max_region_size"
    );
    assert_eq!(lines.len(), 4);
    assert!(!text.contains('\r'));

    let c = spinbell(
        dir.path(),
        &[
            "sweep", "--config", "c.json", "--seed", "12", "--out", "s.csv",
        ],
    );
    assert_eq!(code(&c), 0);
    assert!(c.stdout.is_empty());
    let fit = spinbell(dir.path(), &["fit", "s.csv"]);
    assert_eq!(code(&fit), 0, "{}", String::from_utf8_lossy(&fit.stderr));
    assert_eq!(json(&fit)["kind"], "decay");
}

#[test]
fn unrealizable_schedule_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        &XY8_GROUND.replace("[1, 2, 3]", "[1, 9]"),
    );
    let o = spinbell(dir.path(), &["sweep", "--config", "c.json"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("max feasible τ is 3"));
}

#[test]
fn evolved_sweep_vanishes_at_t0() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"lattice": {"kind": "chain", "L": 7},
            "hamiltonian": {"family": "xy_chain", "gamma": 0.5, "fields": 1.0},
            "state": {"kind": "evolved", "t": 0.5, "initial": "all_zero"},
            "schedule": {"tau": [1, 2], "t": [0.0, 0.5]},
            "optimizer": {"restarts": 3}}"#,
    );
    let o = spinbell(dir.path(), &["sweep", "--config", "c.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let t: f64 = cols[1].parse().unwrap();
        let defect: f64 = cols[6].parse().unwrap();
        if t == 0.0 {
            assert!(defect <= 1e-12, "{line}");
        }
    }
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "ghz.json",
        r#"{"lattice": {"kind": "chain", "L": 3}, "state": {"kind": "ghz"},
            "regions": [[1], [2], [3]], "schedule": {"tau": [1]},
            "inequality": {"name": "svetlichny3"}}"#,
    );
    let o = spinbell(
        dir.path(),
        &["certify", "--config", "ghz.json", "--out", "r.json"],
    );
    assert_eq!(code(&o), 1);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(report["value"].as_f64().unwrap() > 4.0);
    assert_eq!(report["epsilon_local"], false);

    write(
        dir.path(),
        "noname.json",
        &XY8_GROUND.replace(r#"{"name": "svetlichny3"}"#, r#"{"n": 3}"#),
    );
    assert_eq!(
        code(&spinbell(
            dir.path(),
            &["certify", "--config", "noname.json"]
        )),
        2
    );

    write(dir.path(), "xy.json", XY8_GROUND);
    let a = spinbell(
        dir.path(),
        &["certify", "--config", "xy.json", "--threads", "1"],
    );
    let b = spinbell(
        dir.path(),
        &["certify", "--config", "xy.json", "--threads", "3"],
    );
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fit_exits() {
    let dir = tempfile::tempdir().unwrap();
    let header = "tau,t,s,partition,joint,factored,defect,max_region_size\n";
    let mut exact = String::from(header);
    for tau in 1..=5 {
        let d = 0.5 * (-0.9 * tau as f64).exp();
        exact += &format!("{tau},0.000000000e0,3,seq,{d:.9e},0.000000000e0,{d:.9e},1\n");
    }
    write(dir.path(), "exact.csv", &exact);
    let o = spinbell(dir.path(), &["fit", "exact.csv"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!((v["r_squared"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["kappa_est"].as_f64().unwrap() - 0.9).abs() < 1e-8);

    let two: String = exact.lines().take(3).map(|l| format!("{l}\n")).collect();
    write(dir.path(), "two.csv", &two);
    assert_eq!(code(&spinbell(dir.path(), &["fit", "two.csv"])), 4);
}

#[test]
fn bound_and_bell() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s4.json",
        r#"{"name": "seevinck_svetlichny", "n": 4}"#,
    );
    let o = spinbell(dir.path(), &["bound", "--config", "s4.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["biseparable_bound"], 8.0);

    write(
        dir.path(),
        "ghz.json",
        r#"{"seed": 2, "lattice": {"kind": "chain", "L": 3}, "state": {"kind": "ghz"},
            "regions": [[1], [2], [3]], "inequality": {"name": "svetlichny3"}}"#,
    );
    let o = spinbell(
        dir.path(),
        &[
            "bell",
            "--config",
            "ghz.json",
            "--dump-state",
            "--out",
            "b.json",
        ],
    );
    assert_eq!(code(&o), 0);
    for f in [
        "b.json",
        "b.state.bin",
        "b.state.json",
        "b.assignment.bin",
        "b.assignment.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(
        std::fs::metadata(dir.path().join("b.state.bin"))
            .unwrap()
            .len(),
        8 * 16
    );
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("b.json")).unwrap()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-4);
}
