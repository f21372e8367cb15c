use nfbt::baselines::Method;
use nfbt::harness::{
    persist, read_report_csv, run_sweep, write_report_csv, PersistOptions, SimConfig,
};

fn tiny() -> SimConfig {
    let mut c = SimConfig::desk();
    c.array.n_y = 8;
    c.array.n_z = 4;
    c.trials = 3;
    c.prior.num_paths = 2;
    c.sweep.snr_grid_db = vec![0.0, 10.0];
    c
}

#[test]
fn same_seed_same_report() {
    let c = tiny();
    let a = run_sweep(&c).unwrap();
    let b = run_sweep(&c).unwrap();
    assert_eq!(a.points, b.points);
    let mut d = c.clone();
    d.global_seed += 1;
    assert_ne!(run_sweep(&d).unwrap().points, a.points);
}

#[test]
fn report_csv_round_trip_is_exact() {
    let r = run_sweep(&tiny()).unwrap();
    let mut buf = Vec::new();
    write_report_csv(&r.points, &mut buf).unwrap();
    let back = read_report_csv(buf.as_slice()).unwrap();
    assert_eq!(back, r.points);
    for (p, q) in back.iter().zip(&r.points) {
        assert_eq!(p.mean_rho.to_bits(), q.mean_rho.to_bits());
        assert_eq!(p.stderr.to_bits(), q.stderr.to_bits());
    }
}

#[test]
fn persist_writes_optional_files_on_request() {
    let mut c = tiny();
    c.methods = vec![Method::ExhaustiveDft, Method::LseRSparta];
    let r = run_sweep(&c).unwrap();

    let plain = tempfile::tempdir().unwrap();
    persist(&r, &c, plain.path(), PersistOptions::default()).unwrap();
    assert!(plain.path().join("report.csv").is_file());
    assert!(plain.path().join("config_echo.json").is_file());
    assert!(!plain.path().join("trials.csv").exists());
    assert!(!plain.path().join("plot_data.dat").exists());

    let full = tempfile::tempdir().unwrap();
    persist(
        &r,
        &c,
        full.path(),
        PersistOptions {
            trials_csv: true,
            plot_data: true,
        },
    )
    .unwrap();
    let trials = std::fs::read_to_string(full.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2 * 3);
    let plot = std::fs::read_to_string(full.path().join("plot_data.dat")).unwrap();
    assert!(plot.contains("exhaustive_dft") && plot.contains("lse_r_sparta"));

    let echo: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(full.path().join("config_echo.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(echo["seed"], c.global_seed);
    assert_eq!(echo["trials"], 3);
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["desk.toml", "full_scale.toml", "ablation.toml"] {
        SimConfig::from_file(&dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let desk = SimConfig::from_file(&dir.join("desk.toml")).unwrap();
    assert_eq!(desk.array, SimConfig::desk().array);
}
