use std::fs;
use std::path::{Path, PathBuf};

use szilard_battery::cli::{
    cmd_calibrate, cmd_emit_plots, cmd_figure4, cmd_jarzynski, cmd_simulate, run, ExperimentConfig, RunManifest, Table,
    EFFICIENCY_TABLE, ERGOTROPY_TABLE, SIMULATE_TABLE,
};

const SMALL: &str = r#"
[run]
shots = 2000
p_grid = [0.2, 0.5]

[calibration]
shots = 2000
m1_shots = 1000
m2_samples = 1000

[jarzynski]
p_grid = [0.3]
shots = 2000
"#;

fn small() -> ExperimentConfig {
    ExperimentConfig::from_toml_str(SMALL).unwrap()
}

fn ideal_only() -> ExperimentConfig {
    let mut cfg = small();
    cfg.run.ideal_ops = true;
    cfg.run.backends = vec![szilard_battery::engine::Backend::IdealMarkov];
    cfg.run.p_grid = vec![0.0, 0.1, 0.25, 0.5];
    cfg
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden").join(name)
}

/// Compares a table against its checked-in copy cell by cell, numbers to
/// 1e-12. `UPDATE_GOLDEN=1` rewrites the copy.
fn check_golden(name: &str, produced: &Path) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::copy(produced, &path).unwrap();
    }
    let expected = Table::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let actual = Table::read(produced).unwrap();
    assert_eq!(expected.header, actual.header, "{name} header");
    assert_eq!(expected.rows.len(), actual.rows.len(), "{name} rows");
    for (re, ra) in expected.rows.iter().zip(&actual.rows) {
        for (e, a) in re.iter().zip(ra) {
            match (e.parse::<f64>(), a.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!((x - y).abs() <= 1e-12, "{name}: {e} vs {a}"),
                _ => assert_eq!(e, a, "{name}"),
            }
        }
    }
}

fn manifest(dir: &Path, command: &str) -> RunManifest {
    let text = fs::read_to_string(dir.join(format!("manifest_{command}.toml"))).unwrap();
    toml::from_str(&text).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = small();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        cmd_simulate(&cfg, dir).unwrap();
        cmd_jarzynski(&cfg, dir).unwrap();
    }
    for command in ["simulate", "jarzynski"] {
        let (ma, mb) = (manifest(a.path(), command), manifest(b.path(), command));
        assert!(!ma.outputs.is_empty());
        assert_eq!(ma.outputs, mb.outputs);
        assert_eq!(ma.seed, cfg.run.seed);
    }
    assert_eq!(
        fs::read(a.path().join(SIMULATE_TABLE)).unwrap(),
        fs::read(b.path().join(SIMULATE_TABLE)).unwrap()
    );
}

#[test]
fn seed_changes_sampled_tables() {
    let mut cfg = small();
    cfg.run.backends = vec![szilard_battery::engine::Backend::Trajectory];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_simulate(&cfg, a.path()).unwrap();
    cfg.run.seed += 1;
    cmd_simulate(&cfg, b.path()).unwrap();
    assert_ne!(
        fs::read(a.path().join(SIMULATE_TABLE)).unwrap(),
        fs::read(b.path().join(SIMULATE_TABLE)).unwrap()
    );
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(ExperimentConfig::from_toml_str("[run]\nshots = 10\nshot_count = 3\n").is_err());
    assert!(ExperimentConfig::from_toml_str("[detector]\neps = 0.1\n").is_err());
    assert!(ExperimentConfig::from_toml_str("[nonsense]\n").is_err());
    let err = ExperimentConfig::from_toml_str("[detector]\neps_dark = 1.5\n").unwrap_err();
    assert!(err.to_string().contains("eps_dark"), "{err}");
}

#[test]
fn config_round_trips() {
    let cfg = small();
    assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn emit_plots_needs_tables() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    assert!(cmd_emit_plots(&small(), data.path(), out.path()).is_err());
    assert_eq!(fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn ideal_table_is_linear_in_cycles() {
    let dir = tempfile::tempdir().unwrap();
    cmd_simulate(&ideal_only(), dir.path()).unwrap();
    let table = Table::read(&dir.path().join(SIMULATE_TABLE)).unwrap();
    let (p, k, mean) = (
        table.column("p_up").unwrap(),
        table.column("cycle").unwrap(),
        table.column("mean_phonon").unwrap(),
    );
    assert_eq!(table.rows.len(), 4 * 11);
    for r in 0..table.rows.len() {
        let expected = table.f64_at(r, k).unwrap() * table.f64_at(r, p).unwrap();
        assert!((table.f64_at(r, mean).unwrap() - expected).abs() < 1e-12);
    }
    check_golden("simulate_ideal.csv", &dir.path().join(SIMULATE_TABLE));
}

#[test]
fn perfect_ops_give_identity_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.run.ideal_ops = true;
    cmd_calibrate(&cfg, dir.path()).unwrap();
    for name in ["m1.csv", "m1_exact.csv", "m2.csv"] {
        let t = Table::read(&dir.path().join(name)).unwrap();
        let n_max = t.rows[0].len() - 2;
        for (r, row) in t.rows.iter().enumerate().take(n_max + 1) {
            for c in 0..=n_max {
                let v: f64 = row[c + 1].parse().unwrap();
                assert_eq!(v, if r == c { 1.0 } else { 0.0 }, "{name}[{r},{c}]");
            }
        }
    }
}

#[test]
fn exact_readout_matrix_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    cmd_calibrate(&small(), dir.path()).unwrap();
    check_golden("m1_exact.csv", &dir.path().join("m1_exact.csv"));
}

#[test]
fn plots_from_all_backends() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run(["szilard", "simulate", "--out", out, "--shots", "2000"]).unwrap();
    let files = run(["szilard", "emit-plots", "--out", out]).unwrap();
    assert!(files.iter().any(|f| f.ends_with("figure3.svg")));
    let svg = fs::read_to_string(dir.path().join("figure3.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6);
    assert!(svg.starts_with("<svg"));
}

#[test]
fn bad_arguments_fail() {
    assert!(run(["szilard", "teleport"]).is_err());
    assert!(run(["szilard", "simulate", "--backend", "warp"]).is_err());
    assert!(run(["szilard", "simulate", "--config", "/nonexistent/config.toml"]).is_err());
}

#[test]
fn figure4_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.run.p_grid = vec![0.2, 0.35, 0.5];
    cfg.figure4.p_grid = vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
    cmd_figure4(&cfg, dir.path()).unwrap();

    let t = Table::read(&dir.path().join(ERGOTROPY_TABLE)).unwrap();
    let col = |name| t.column(name).unwrap();
    let (p, k, ideal, sim, read) = (
        col("p_up"),
        col("cycle"),
        col("ideal_ergotropy"),
        col("ergotropy"),
        col("readout_ergotropy"),
    );
    let mut finals = 0;
    for r in 0..t.rows.len() {
        if t.f64_at(r, k).unwrap() != 10.0 {
            continue;
        }
        finals += 1;
        let ideal = t.f64_at(r, ideal).unwrap();
        if t.f64_at(r, p).unwrap() == 0.5 {
            assert!((ideal - 2.92).abs() <= 0.01);
        }
        assert!(t.f64_at(r, sim).unwrap() < ideal);
        assert!(t.f64_at(r, read).unwrap() < ideal);
    }
    assert_eq!(finals, 3);

    let t = Table::read(&dir.path().join(EFFICIENCY_TABLE)).unwrap();
    let eff = t.column("ideal_info_work_eff").unwrap();
    let values: Vec<f64> = (0..t.rows.len()).map(|r| t.f64_at(r, eff).unwrap()).collect();
    assert_eq!(values.len(), 6);
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    assert_eq!(*values.last().unwrap(), 0.0);
}
