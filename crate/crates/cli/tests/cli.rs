use std::path::{Path, PathBuf};
use std::process::Command;

use reslab::fock::GridLayout;
use reslab::model::ModelSpec;
use reslab::rg::ir_gap_experiment;
use reslab::C64;
use reslab_cli::{run_in, sweep, Experiment, ExperimentConfig, Parameters};
use toml::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn small_model() -> ModelSpec {
    let mut spec = ModelSpec::default_nelson();
    spec.grid = GridLayout::geometric(2e-4, 12.0, 24);
    spec.nmax = 1;
    spec
}

fn float(s: &toml::Table, key: &str) -> f64 {
    s[key].as_float().unwrap_or_else(|| panic!("{key} missing"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reslab"))
}

#[test]
fn shipped_configs_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let cfg = ExperimentConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.canonical().unwrap(), back.canonical().unwrap());
        seen += 1;
    }
    assert_eq!(seen, Experiment::ALL.len());
}

#[test]
fn unknown_key_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("spectrum.toml")).unwrap();
    let bad = text.replace("[parameters]", "[parameters]\ncoupling_strength = 0.1");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, bad).unwrap();
    let out = bin().args(["run", "--config"]).arg(&path).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coupling_strength"));
}

#[test]
fn decoupled_spectrum_run() {
    let dir = tempfile::tempdir().unwrap();
    let params = Parameters { g: Some(0.0), theta: Some(C64::new(0.0, 0.3)), ..Parameters::default() };
    let cfg = ExperimentConfig::new(Experiment::Spectrum, small_model(), params);
    run_in(&cfg, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let values: Vec<C64> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
            C64::new(f[0], f[1])
        })
        .collect();
    let model = reslab::model::Model::new(small_model()).unwrap();
    let rot = C64::new(0.0, -0.3).exp();
    let mut expected: Vec<C64> = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    for n in 0..model.grid().len() {
        for l in [0.0, 1.0] {
            expected.push(l + rot * model.grid().k(n));
        }
    }
    assert_eq!(values.len(), expected.len());
    for e in expected {
        let d = values.iter().map(|v| (v - e).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-12, "{e} missing");
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = ExperimentConfig::from_toml(&std::fs::read_to_string(configs().join("resonance-track.toml")).unwrap()).unwrap();
    let mut cfg = cfg;
    cfg.model = small_model();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_in(&cfg, a.path()).unwrap();
    let rb = run_in(&cfg, b.path()).unwrap();
    assert_eq!(ra.record.config_hash, rb.record.config_hash);
    assert_eq!(ra.record.outputs.len(), rb.record.outputs.len());
    for (fa, fb) in ra.record.outputs.iter().zip(&rb.record.outputs) {
        assert_eq!(fa.sha256, fb.sha256);
        assert_eq!(std::fs::read(&fa.path).unwrap(), std::fs::read(&fb.path).unwrap());
    }
    let mut moved = cfg.clone();
    moved.output_dir = PathBuf::from("elsewhere");
    assert_eq!(moved.canonical().unwrap(), cfg.canonical().unwrap());
}

fn ir_gap_config() -> ExperimentConfig {
    let params = Parameters {
        g: Some(0.05),
        j: Some(1),
        theta: Some(C64::new(0.0, 0.3)),
        sigma_list: Some(vec![0.05, 0.1, 0.2, 0.4]),
        ..Parameters::default()
    };
    ExperimentConfig::new(Experiment::IrGap, small_model(), params)
}

#[test]
fn single_value_sweep_matches_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ir_gap_config();
    cfg.parameters.sigma_list = Some(vec![0.1]);
    let single = run_in(&cfg, &dir.path().join("single")).unwrap();
    let swept = sweep(&cfg, "sigma", &[0.1], 1, &dir.path().join("sweep")).unwrap();
    let run = swept.runs[0].as_ref().unwrap();
    // a one-row table has a NaN slope, so compare serialized forms
    assert_eq!(toml::to_string(&run.summary).unwrap(), toml::to_string(&single.summary).unwrap());
    assert_eq!(run.record.config_hash, single.record.config_hash);
}

#[test]
fn sigma_sweep_reproduces_the_gap_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ir_gap_config();
    let sigmas = cfg.parameters.sigma_list.clone().unwrap();
    let model = reslab::model::Model::new(cfg.model.clone()).unwrap();
    let table = ir_gap_experiment(&model, C64::new(0.0, 0.3), 0.05, 1, &sigmas).unwrap();
    let swept = sweep(&cfg, "sigma", &sigmas, 2, dir.path()).unwrap();
    assert_eq!(swept.failures(), 0);
    for (row, run) in table.rows.iter().zip(&swept.runs) {
        let s = &run.as_ref().unwrap().summary;
        assert_eq!(float(s, "sigma"), row.sigma);
        assert_eq!(float(s, "diff_abs"), row.diff_abs);
        assert_eq!(float(s, "lambda_cut_re"), row.lambda_cut.re);
        assert_eq!(float(s, "lambda_cut_im"), row.lambda_cut.im);
    }
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), sigmas.len() + 1);
}

#[test]
fn failed_value_is_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let params = Parameters { g: Some(0.0), ..Parameters::default() };
    let cfg = ExperimentConfig::new(Experiment::Spectrum, small_model(), params);
    let swept = sweep(&cfg, "g", &[0.01, -1.0, 0.02], 2, dir.path()).unwrap();
    assert_eq!(swept.failures(), 1);
    assert!(swept.runs[0].is_ok() && swept.runs[1].is_err() && swept.runs[2].is_ok());
    assert_eq!(swept.runs[1].as_ref().unwrap_err().exit_code(), 2);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let status: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(status, ["ok", "failed", "ok"]);
    assert!(matches!(swept.runs[0].as_ref().unwrap().summary.get("count"), Some(Value::Integer(_))));
}

#[test]
fn selfcheck_binary_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["selfcheck", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("run_record.toml").exists());
}
