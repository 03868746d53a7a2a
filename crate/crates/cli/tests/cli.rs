use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn meta(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(fixture(&format!("{name}.json"))).unwrap()).unwrap()
}

fn mpsvqe(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpsvqe"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, v.to_string()).unwrap();
    path.display().to_string()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn jw_h2_has_fifteen_terms() {
    let dir = TempDir::new().unwrap();
    let o = mpsvqe(dir.path(), &["jw", "--bundle", fixture("h2_sto3g.fcidump").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(dir.path().join("pauli_sum.json"));
    assert_eq!(v["term_count"], 15);
    assert_eq!(v["n_qubits"], 4);
    assert_eq!(v["terms"].as_array().unwrap().len(), 14);
}

#[test]
fn jw_empty_bundle_is_constant_only() {
    let dir = TempDir::new().unwrap();
    let bundle = dir.path().join("empty.fcidump");
    fs::write(
        &bundle,
        " &FCI NORB=1,NELEC=0,MS2=0,\n  ORBSYM=1,\n  ISYM=1,\n &END\n 0.5  0  0  0  0\n",
    )
    .unwrap();
    let o = mpsvqe(dir.path(), &["jw", "--bundle", bundle.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(dir.path().join("pauli_sum.json"));
    assert_eq!(v["term_count"], 1);
    assert_eq!(v["constant"], 0.5);
    assert!(v["terms"].as_array().unwrap().is_empty());
}

#[test]
fn jw_h2o_term_count_is_at_most_quartic() {
    let dir = TempDir::new().unwrap();
    let o = mpsvqe(dir.path(), &["jw", "--bundle", fixture("h2o_sto3g.fcidump").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(dir.path().join("pauli_sum.json"));
    let n = v["n_qubits"].as_u64().unwrap();
    assert_eq!(n, 14);
    assert!(v["term_count"].as_u64().unwrap() <= n.pow(4));
}

#[test]
fn jw_unparsable_bundle_exits_with_parse_code() {
    let dir = TempDir::new().unwrap();
    let bundle = dir.path().join("bad.fcidump");
    fs::write(&bundle, " &FCI NORB=2,NELEC=2,\n &END\n not a number 1 1 1 1\n").unwrap();
    let o = mpsvqe(dir.path(), &["jw", "--bundle", bundle.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn vqe_config_without_bundle_names_the_field() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "vqe.json", &serde_json::json!({"max_bond": 16}));
    let o = mpsvqe(dir.path(), &["vqe", "--config", &config]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("bundle"), "{}", stderr(&o));
}

#[test]
fn vqe_missing_bundle_file_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "vqe.json", &serde_json::json!({"bundle": "nowhere.fcidump"}));
    let o = mpsvqe(dir.path(), &["vqe", "--config", &config]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere.fcidump"), "{}", stderr(&o));
}

#[test]
fn vqe_h2_is_accurate_and_worker_independent() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "vqe.json",
        &serde_json::json!({"bundle": fixture("h2_sto3g.fcidump")}),
    );
    let fci = meta("h2_sto3g")["fci_energy"].as_f64().unwrap();
    let mut energies = Vec::new();
    for w in ["1", "8"] {
        let out = dir.path().join(format!("w{w}"));
        let o = mpsvqe(&out, &["--workers", w, "vqe", "--config", &config]);
        assert!(o.status.success(), "{}", stderr(&o));
        let v = read_json(out.join("vqe_result.json"));
        let e = v["energy"].as_f64().unwrap();
        assert!(((e - fci) / fci).abs() < 1e-4, "{e} vs {fci}");
        energies.push(v["energy"].to_string());
        let csv = fs::read_to_string(out.join("energy_history.csv")).unwrap();
        assert!(csv.lines().count() >= 2);
    }
    assert_eq!(energies[0], energies[1]);
}

#[test]
fn vqe_runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "vqe.json",
        &serde_json::json!({"bundle": fixture("h2_sto3g.fcidump"), "optimizer": {"kind": "nelder_mead"}}),
    );
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = mpsvqe(&out, &["--workers", "2", "--seed", "5", "vqe", "--config", &config]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(fs::read(out.join("vqe_result.json")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn dmet_single_fragment_is_the_direct_solve() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "dmet.json",
        &serde_json::json!({"bundle": fixture("h4_chain_sto3g.fcidump"), "fragments": [[0, 1, 2, 3]]}),
    );
    let o = mpsvqe(dir.path(), &["--workers", "1", "dmet", "--config", &config]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(dir.path().join("dmet_result.json"));
    let fci = meta("h4_chain_sto3g")["fci_energy"].as_f64().unwrap();
    assert!((v["total_energy"].as_f64().unwrap() - fci).abs() < 1e-8);
    assert_eq!(v["fragments"].as_array().unwrap().len(), 1);
    assert!(v["chemical_potential"].is_number());
}

#[test]
fn dmet_h10_ring_with_exact_solver_is_within_half_percent() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "dmet.json",
        &serde_json::json!({"bundle": fixture("h10_ring_r1.00_sto3g.fcidump"), "fragments": 2, "solver": "fci"}),
    );
    let o = mpsvqe(dir.path(), &["dmet", "--config", &config]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(dir.path().join("dmet_result.json"));
    let fci = meta("h10_ring_r1.00_sto3g")["fci_energy"].as_f64().unwrap();
    let e = v["total_energy"].as_f64().unwrap();
    assert!(((e - fci) / fci).abs() <= 5e-3, "{e} vs {fci}");
    assert_eq!(v["fragments"].as_array().unwrap().len(), 5);
}

#[test]
fn dmet_fragment_size_must_divide_the_orbitals() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "dmet.json",
        &serde_json::json!({"bundle": fixture("h4_chain_sto3g.fcidump"), "fragments": 3}),
    );
    let o = mpsvqe(dir.path(), &["dmet", "--config", &config]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.path().join("dmet_result.json").exists());
}

#[test]
fn bench_single_size_has_one_row_and_no_fit() {
    let dir = TempDir::new().unwrap();
    let o = mpsvqe(dir.path(), &["bench-scaling", "--qubits", "12", "--repeats", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("n_qubits,seconds"));
    assert!(!dir.path().join("scaling_fit.json").exists());
}

#[test]
fn bench_times_grow_with_size() {
    let dir = TempDir::new().unwrap();
    let o = mpsvqe(dir.path(), &["bench-scaling", "--qubits", "12,24,48"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    let times: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(times.len(), 3);
    assert!(times[0] < times[1] && times[1] < times[2], "{times:?}");
    let fit = read_json(dir.path().join("scaling_fit.json"));
    assert!(fit["r_squared"].is_number());
}

#[test]
fn zero_workers_is_rejected() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "vqe.json",
        &serde_json::json!({"bundle": fixture("h2_sto3g.fcidump")}),
    );
    let o = mpsvqe(dir.path(), &["--workers", "0", "vqe", "--config", &config]);
    assert_eq!(o.status.code(), Some(2));
}
