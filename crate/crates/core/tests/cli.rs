use std::path::Path;
use std::process::{Command, Output};

fn qdsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdsim")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn ideal_model_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdsim(&["model"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["chsh"]["numeric"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((v["fidelity"]["numeric"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["rho_exp"]["basis"][1], "HV");
}

#[test]
fn malformed_key_exits_nonzero_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "v = 0.9\nvisibilty = 0.9\n");
    let out = qdsim(&["model", "--config", &cfg], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("visibilty"));
}

#[test]
fn oracle_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.cfg", "scheme = RF\ng2 = 0.03\nq = 0.9\nv = 0.8\nchi = 0.2\nt1 = 0.5\n");
    let out = qdsim(&["oracle", "--config", &good], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let bad = write(dir.path(), "bad.cfg", "v = 0.8\ng2 = 0.03\nbrightness = 0.5\ndebug_oracle_v_offset = 0.05\n");
    assert_eq!(qdsim(&["oracle", "--config", &bad], dir.path()).status.code(), Some(1));
}

#[test]
fn sweep_writes_csv_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", "v = 0.93\nbrightness = 0.5\naxis = g2 0 0.04 5\naxis = c_wn 0.9 1 3\n");
    let out_path = dir.path().join("s.csv");
    let out = qdsim(&["sweep", "--config", &cfg, "--out", out_path.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "g2,c_wn,S_model,S_werner,F_model,F_werner,concurrence,horodecki");
    assert_eq!(lines.len(), 16);
    let second: Vec<f64> = lines[2].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!((second[0], second[1]), (0.0, 0.95));
}

#[test]
fn tomo_writes_dataset_and_reloads_it() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.txt");
    let a = write(dir.path(), "a.cfg", &format!("tomo_state = singlet\nshots = 10000\ndataset_out = {}\n", ds.display()));
    let b = write(dir.path(), "b.cfg", &format!("tomo_state = singlet\ndataset_in = {}\n", ds.display()));
    let ra = qdsim(&["tomo", "--config", &a, "--seed", "17"], dir.path());
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    assert!(std::fs::read_to_string(&ds).unwrap().starts_with("# shots=10000 seed=17\n"));
    let rb = qdsim(&["tomo", "--config", &b], dir.path());
    let va: serde_json::Value = serde_json::from_slice(&ra.stdout).unwrap();
    let vb: serde_json::Value = serde_json::from_slice(&rb.stdout).unwrap();
    assert_eq!(va["rho_mle"], vb["rho_mle"]);
    assert!(va["fidelity_singlet"].as_f64().unwrap() > 0.99);
}

#[test]
fn noiseless_tomo_is_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n.cfg", "v = 0.9\ng2 = 0.02\nbrightness = 0.4\nc_wn = 0.9\ntomo_state = werner\nnoiseless = true\n");
    let out = qdsim(&["tomo", "--config", &cfg], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["trace_distance_to_true"].as_f64().unwrap() < 1e-3);
}

#[test]
fn state_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = qdsim(&["model"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&model.stdout).unwrap();
    let state = write(dir.path(), "state.json", &v["rho_exp"].to_string());
    let cfg = write(dir.path(), "f.cfg", &format!("tomo_state = file\nstate_file = {state}\nnoiseless = true\n"));
    let out = qdsim(&["tomo", "--config", &cfg, "--format", "csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("quantity,value\nfidelity_to_true,"));
}

#[test]
fn bad_thread_env_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qdsim")).arg("model").env("QDSIM_THREADS", "many").current_dir(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
