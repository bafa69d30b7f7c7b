//! Config-driven sweep to CSV, refit from the file, and a binary state dump.
//!
//! Run with `cargo run --release --example sweep_files`.

use spinbell::commands::{cmd_fit, cmd_sweep, FitOptions, RunOptions};
use spinbell::io::{read_csv_file, read_state};
use spinbell::Result;

const CONFIG: &str = r#"{
  "seed": 4,
  "lattice": {"kind": "chain", "L": 9},
  "hamiltonian": {"family": "xy_chain", "gamma": 0.5, "fields": 2.5},
  "state": {"kind": "ground"},
  "schedule": {"parties": 3, "width": 1, "tau": [1, 2, 3, 4]},
  "defect": {"partition": "seq", "observables": ["Z", "Z", "Z"]}
}"#;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("spinbell-sweep-example");
    std::fs::create_dir_all(&dir)?;
    let cfg = dir.join("sweep.json");
    std::fs::write(&cfg, CONFIG)?;
    let csv = dir.join("sweep.csv");
    let opts = RunOptions {
        out: Some(csv.clone()),
        seed: None,
        dump_state: true,
    };
    let out = cmd_sweep(&cfg, &opts)?;
    for p in &out.written {
        println!("wrote {}", p.display());
    }
    for row in read_csv_file(&csv)? {
        println!("τ = {}: defect {:.4e}", row.tau, row.defect);
    }
    let fit = cmd_fit(&csv, &FitOptions::default(), &RunOptions::default())?;
    print!("{}", fit.stdout);
    let psi = read_state(dir.join("sweep.state.bin"))?;
    println!("reloaded a {} state of dimension {}", psi.kind(), psi.dim());
    Ok(())
}
