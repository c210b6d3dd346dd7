use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gcm_peres::output::ResultManifest;

const BIN: &str = env!("CARGO_BIN_EXE_gcm-peres");

const CONFIG: &str = r#"
[model]
b = 0.62
hbar = 0.1

[basis]
n_max = 40

[wavefunction]
levels = [0, 2]
resolution = 80

[classical]
energy = 0.2
trajectories = 2
crossings = 10
samples = 4
mesh = [5, 5]
energies = [0.0, 0.2]
b_values = [0.0, 0.62]
binary_map = true

[classical.l2]
t_max = 200.0

[classical.sali]
duration = 300.0
"#;

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    (dir, cfg)
}

fn run(cfg: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).arg("--config").arg(cfg).env("GCM_PERES_OUT", out).output().unwrap()
}

/// Data rows of a CSV file: skips comments, returns header and rows.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# gcm-peres format 1"));
    let mut lines = lines.skip_while(|l| l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn missing_config_prints_usage_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&dir.path().join("absent.toml"), dir.path(), &["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn invalid_key_is_reported_with_its_path() {
    let (dir, cfg) = setup();
    let out = run(&cfg, dir.path(), &["spectrum", "--set", "basis.n_max=-3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("basis.n_max"));
    let out = run(&cfg, dir.path(), &["spectrum", "--set", "model.c=0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.c"));
}

#[test]
fn unconverged_level_exits_three() {
    let (dir, cfg) = setup();
    let out = run(&cfg, dir.path(), &["wavefunction", "--set", "wavefunction.levels=[5000]"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn lattice_columns_satisfy_the_identity() {
    let (dir, cfg) = setup();
    let out = run(&cfg, dir.path(), &["lattice"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("lattice.csv"));
    let (e, hp, h0) = (column(&h, "energy"), column(&h, "p_hprime"), column(&h, "p_h0"));
    assert!(!rows.is_empty());
    for r in &rows {
        assert!((r[hp] - (r[e] - r[h0]) / 0.62).abs() < 1e-8);
    }

    let out = run(&cfg, dir.path(), &["lattice", "--set", "model.b=0", "--set", "lattice.operators=[\"Hprime\", \"L2\"]"]);
    assert!(out.status.success());
    let (h, rows) = read_csv(&dir.path().join("lattice.csv"));
    assert_eq!(h, ["index", "energy", "p_hprime", "p_l2"]);
    assert!(rows.iter().all(|r| r[2].abs() < 1e-8));
}

#[test]
fn five_d_spectrum_file_differs_from_two_d() {
    let (dir, cfg) = setup();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&cfg, &a, &["spectrum"]).status.success());
    assert!(run(&cfg, &b, &["spectrum", "--set", "quantization=\"5d\""]).status.success());
    let fa = std::fs::read_to_string(a.join("spectrum.csv")).unwrap();
    let fb = std::fs::read_to_string(b.join("spectrum.csv")).unwrap();
    assert_ne!(fa, fb);
    let (h, rows) = read_csv(&a.join("spectrum.csv"));
    assert_eq!(h, ["index", "energy", "converged"]);
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));
}

#[test]
fn density_files_are_self_describing() {
    let (dir, cfg) = setup();
    assert!(run(&cfg, dir.path(), &["wavefunction"]).status.success());
    for level in [0, 2] {
        let path = dir.path().join(format!("density_{level}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        for key in ["# level:", "# x_range:", "# y_range:", "# resolution: 80 80", "# deficit:"] {
            assert!(text.contains(key), "{key}");
        }
        let (_, rows) = read_csv(&path);
        assert_eq!(rows.len(), 80 * 80);
    }
}

#[test]
fn classical_products_have_expected_schema() {
    let (dir, cfg) = setup();
    for cmd in ["poincare", "l2map", "freg", "bounds"] {
        let out = run(&cfg, dir.path(), &[cmd]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let (h, rows) = read_csv(&dir.path().join("section.csv"));
    assert_eq!(h, ["traj_id", "x", "px"]);
    assert_eq!(rows.len(), 20);
    let (h, rows) = read_csv(&dir.path().join("l2map.csv"));
    assert_eq!(h, ["x", "px", "value", "mask"]);
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| (r[3] == 1.0) == r[2].is_nan()));
    let bin = std::fs::read(dir.path().join("l2map.bin")).unwrap();
    assert_eq!(bin.len(), 25 * 8);
    let sidecar: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("l2map.json")).unwrap()).unwrap();
    assert_eq!(sidecar["shape"], serde_json::json!([5, 5]));
    let (h, rows) = read_csv(&dir.path().join("freg.csv"));
    assert_eq!(h, ["E", "f_reg", "stderr", "n"]);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r[1]) && r[3] == 4.0));
    let (h, rows) = read_csv(&dir.path().join("bounds.csv"));
    assert_eq!(h, ["B", "l2_min", "l2_max", "n_converged_samples"]);
    assert_eq!(rows.len(), 2);

    let manifest = ResultManifest::read(&dir.path().join("manifest-l2map.json")).unwrap();
    let names: Vec<&str> = manifest.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["l2map.csv", "l2map.bin", "l2map.json"]);
    assert!(manifest.verify(dir.path()).is_empty());
    assert_eq!(manifest.config["classical"]["mesh"], serde_json::json!([5, 5]));
}

#[test]
fn brody_needs_enough_levels() {
    let (dir, cfg) = setup();
    let out = run(&cfg, dir.path(), &["brody"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too few levels"));
}

#[test]
fn output_directory_comes_from_config_without_override() {
    let (dir, cfg) = setup();
    let target = dir.path().join("from-config");
    let out = Command::new(BIN)
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--set")
        .arg(format!("output.directory=\"{}\"", target.display()))
        .env_remove("GCM_PERES_OUT")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(target.join("spectrum.csv").exists());
    assert!(target.join("manifest-spectrum.json").exists());
}
