use std::process::Command as Process;

use edgebreak_cli::{execute, parse_config, read_manifest, replay, run_command, Command, Config, MANIFEST_FILE};

fn small() -> Config {
    parse_config(
        "mu = 3.0\nhorizon = 8.0\nmargin_factor = 1.5\nreplicas = 12\nn_max = 40\nrows = [10, 20, 40]\nmus = [2.0, 3.0]\n",
    )
    .unwrap()
}

const GOLDEN: &[(Command, &str, &str)] = &[
    (Command::Survival, "survival.csv", "mu,graph,trials,successes,p_hat,ci_low,ci_high,excluded_boundary"),
    (Command::EndpointEquality, "endpoint_equality.csv", "horizon,trials,successes,p_hat,ci_low,ci_high,excluded_boundary"),
    (Command::EndpointEquality, "violations.csv", "replica,excluded,first_violation"),
    (Command::Agreement, "agreement.csv", "replica,excluded,agrees,first_violation"),
    (Command::Shape, "shape.csv", "replica,excluded,survived,agrees"),
    (Command::Breakpoints, "psi.csv", "replica,k,psi,r_psi,censored,excluded"),
    (Command::Breakpoints, "increments.csv", "replica,dr,dpsi"),
    (Command::Restart, "restart.csv", "n,sigma_n,final_position,restarts,censored"),
    (Command::Clt, "endpoints.csv", "r_T,standardized"),
    (Command::Percolation, "runs.csv", "replica,n,size,L,R,tau_proxy,deficit"),
    (Command::DeficitDecay, "raw_counts.csv", "n,replica,size_y,count"),
    (Command::DeficitDecay, "decay.csv", "n,trials,successes,p_hat,ci_low,ci_high"),
    (Command::ScanRuns, "decay.csv", "n,trials,successes,p_hat,ci_low,ci_high"),
];

#[test]
fn csv_headers_are_stable() {
    let cfg = small();
    for &(cmd, file, header) in GOLDEN {
        let out = run_command(cmd, &cfg).unwrap();
        let (_, bytes) = out.files.iter().find(|(n, _)| n == file).unwrap_or_else(|| panic!("{cmd}: no {file}"));
        let first = std::str::from_utf8(bytes).unwrap().lines().next().unwrap();
        assert_eq!(first, header, "{cmd} {file}");
    }
    for cmd in Command::ALL {
        let out = run_command(cmd, &cfg).unwrap();
        for (name, bytes) in &out.files {
            if name.ends_with(".csv") {
                assert!(GOLDEN.iter().any(|g| g.0 == cmd && g.1 == name), "{cmd} {name} has no golden header");
            } else {
                serde_json::from_slice::<serde_json::Value>(bytes).unwrap();
            }
        }
    }
}

#[test]
fn manifests_reproduce_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    for cmd in Command::ALL {
        let (run, manifest) = execute(cmd, &cfg, dir.path(), false).unwrap();
        assert!(run.file_name().unwrap().to_str().unwrap().starts_with(&format!("{}-{}-", cmd.name(), cfg.seed)));
        let loaded = read_manifest(&run.join(MANIFEST_FILE)).unwrap();
        assert_eq!(loaded, manifest);
        assert_eq!(replay(&loaded).unwrap(), Vec::<String>::new(), "{cmd}");
        for f in &manifest.output_files {
            let bytes = std::fs::read(run.join(&f.path)).unwrap();
            assert_eq!(edgebreak_cli::sha256_hex(&bytes), f.sha256);
        }
    }
}

#[test]
fn reruns_get_a_fresh_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let (a, _) = execute(Command::Clt, &cfg, dir.path(), false).unwrap();
    let (b, _) = execute(Command::Clt, &cfg, dir.path(), false).unwrap();
    assert_ne!(a, b);
    assert!(b.to_str().unwrap().ends_with("-1"));
    for f in ["endpoints.csv", "clt.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let mut cfg = small();
    let par = run_command(Command::EndpointEquality, &cfg).unwrap();
    cfg.execution = edgebreak_cli::config::ExecKey::Sequential;
    let seq = run_command(Command::EndpointEquality, &cfg).unwrap();
    assert_eq!(par.files, seq.files);
}

#[test]
fn contamination_warning_and_doubling_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.mus.clear();
    cfg.x_min = Some(-3);
    cfg.x_max = Some(3);
    let (_, m) = execute(Command::Survival, &cfg, dir.path(), true).unwrap();
    assert!(m.warnings.iter().any(|w| w.contains("boundary contamination")), "{:?}", m.warnings);
    let checks = m.window_doubling.unwrap();
    assert_eq!(checks.len(), 1);
}

#[test]
fn subcritical_survival_is_near_zero() {
    let mut cfg = parse_config("mu = 0.01\nhorizon = 100.0\nreplicas = 1000").unwrap();
    cfg.mus.clear();
    let out = run_command(Command::Survival, &cfg).unwrap();
    let (_, r) = &out.headline[0];
    assert!(r.ci_high < 0.05, "{r:?}");
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_edgebreak");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "mv = 3.0\n").unwrap();
    let out = Process::new(exe).args(["survival", "--config"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("mv"));

    let good = dir.path().join("good.toml");
    std::fs::write(&good, "horizon = 5.0\nreplicas = 8\nmargin_factor = 2.0\n").unwrap();
    let out = Process::new(exe)
        .args(["survival", "--seed", "3", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = String::from_utf8(out.stdout).unwrap();
    let manifest = std::path::Path::new(run.trim()).join(MANIFEST_FILE);
    let m = read_manifest(&manifest).unwrap();
    assert_eq!((m.master_seed, m.replica_count), (3, 8));
    let out = Process::new(exe).arg("replay").arg(&manifest).output().unwrap();
    assert!(out.status.success());

    let out = Process::new(exe).arg("defaults").output().unwrap();
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(parse_config(&table).unwrap(), parse_config("").unwrap());
}
