use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use lwkit::io::read_binary;
use lwkit::special::hermite_value;

fn lwkit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lwkit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("LWKIT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gaussian_wigner_peaks_at_one_over_pi() {
    let dir = tempfile::tempdir().unwrap();
    let o = lwkit(&["wigner", "--psi", "hermite:0", "--phi", "hermite:0"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (w, meta) = read_binary(&dir.path().join("wigner.bin")).unwrap();
    let (imax, vmax) = w.values().iter().enumerate().max_by(|a, b| a.1.re.total_cmp(&b.1.re)).unwrap();
    assert!((vmax.re - 1.0 / PI).abs() < 1e-9);
    assert_eq!(w.grid().node(imax), vec![0.0, 0.0]);
    assert_eq!(meta.tags["stft_convention"], "TF");
    assert_eq!(meta.tags["psi"], "hermite:0");
    assert!(dir.path().join("wigner_slice.csv").exists());
}

#[test]
fn first_hermite_wigner_is_negative_at_origin() {
    // Oracle: W(0,0) = (πħ)^{-1} ∫ φ₁(u) φ₁(−u) du by a fine trapezoid sum.
    let h = 1e-3;
    let oracle: f64 = (-12000..=12000).map(|i| hermite_value(1, i as f64 * h) * hermite_value(1, -(i as f64) * h) * h).sum::<f64>() / PI;
    assert!((oracle + 1.0 / PI).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let o = lwkit(&["wigner", "--psi", "hermite:1", "--phi", "hermite:1", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("wigner.json")).unwrap()).unwrap();
    let n = doc["meta"]["points"][0].as_u64().unwrap() as usize;
    let centre = doc["re"][(n / 2) * n + n / 2].as_f64().unwrap();
    assert!((centre - oracle).abs() < 1e-9, "{centre}");
    let summary: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!((summary["origin"][0].as_f64().unwrap() - oracle).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = lwkit(&["wigner", "--psi", "laguerre:2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown fixture"));

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"hbar": 1.0, "grid_size": 64}"#).unwrap();
    let o = lwkit(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(lwkit(&["verify", "--case", "no-such-case"], dir.path()).status.code(), Some(2));
    assert_eq!(lwkit(&["wigner", "--grid", "64"], dir.path()).status.code(), Some(2));
    assert_eq!(lwkit(&["stft", "--gamma", "0"], dir.path()).status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_lwkit"))
        .args(["quantize", "--grid", "16,4", "--out"])
        .arg(dir.path())
        .env("LWKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_filters_and_tightens() {
    let dir = tempfile::tempdir().unwrap();
    let o = lwkit(&["verify", "--case", "moyal-identity"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["reports"].as_array().unwrap().len(), 1);
    assert_eq!(doc["reports"][0]["case_id"], "moyal-identity");
    assert_eq!(doc["conventions"]["hbar"], 1.0);

    let o = lwkit(&["verify", "--case", "weyl", "--tol", "1e-12"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL weyl-cocycle"), "{text}");
    assert!(text.contains("residual"));
}

#[test]
fn spectra_and_matrix_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let o = lwkit(&["spectrum", "--symbol", "magnetic"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
    let clusters: std::collections::BTreeSet<&str> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(clusters.len(), 5);

    let o = lwkit(&["spectrum", "--grid", "128,8"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    for (k, v) in summary["levels"].as_array().unwrap().iter().enumerate() {
        assert!((v.as_f64().unwrap() - (k as f64 + 0.5)).abs() < 1e-6);
    }

    let o = lwkit(&["quantize", "--grid", "32,6", "--symbol", "anharmonic:0.2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::metadata(dir.path().join("quantize.bin")).unwrap().len(), 32 * 32 * 16);
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("quantize.bin.json")).unwrap()).unwrap();
    assert_eq!(meta["tags"]["kind"], "quantize");
    assert!(meta["tags"]["symplectic_form"].is_string());
}

#[test]
fn evolution_keeps_the_norm() {
    let dir = tempfile::tempdir().unwrap();
    let o = lwkit(&["evolve", "--psi", "coherent:0.5,-0.3", "--time", "1.5", "--grid", "128,8", "--phase-grid", "96,10", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(summary["norm_deviation"].as_f64().unwrap() < 1e-10);
    assert!(summary["lifted_residual"].as_f64().unwrap() < 1e-5);
    assert!(dir.path().join("evolve.csv").exists() && dir.path().join("evolve.json").exists());
}
