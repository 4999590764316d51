use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reslab::dynamics::{metastability_report, propagate_survival, MetastabilityOptions, PropagationOptions};
use reslab::feshbach::fgr;
use reslab::model::{Model, Part};
use reslab::resolvent::{
    continuation_scan, dprime_norm, pole_fit, ContinuationDomain, ContinuationScan, Profile, SigmaSchedule, TestVector,
};
use reslab::rg::{ir_gap_experiment, Decimator};
use reslab::spectral::{dense_eigenvalues, golden_rule_correction, resonance_at, resonance_table, theta_report, track_resonance};
use reslab::table::{fmt_f64, Table};
use reslab::C64;
use toml::Value;

use crate::config::{Experiment, ExperimentConfig, PsiKind, Schedule};
use crate::output::{sha256_hex, write_atomic, Artifacts, RunRecord};
use crate::{in_module, selfcheck, CliError};

pub type Summary = toml::Table;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub summary: Summary,
    /// Failed checks of a selfcheck run; zero otherwise.
    pub failed_checks: usize,
}

/// Radius unit for continuation domains whose center sits on the real axis.
const REAL_CENTER_SCALE: f64 = 0.1;

fn put(s: &mut Summary, key: &str, x: f64) {
    s.insert(key.to_string(), Value::Float(x));
}

fn put_c(s: &mut Summary, key: &str, z: C64) {
    put(s, &format!("{key}_re"), z.re);
    put(s, &format!("{key}_im"), z.im);
}

fn put_i(s: &mut Summary, key: &str, n: usize) {
    s.insert(key.to_string(), Value::Integer(n as i64));
}

fn put_b(s: &mut Summary, key: &str, b: bool) {
    s.insert(key.to_string(), Value::Boolean(b));
}

/// The probe vector named by `kind`, attached to level `j`.
pub fn test_vector(kind: PsiKind, j: usize, seed: u64) -> TestVector {
    let base = TestVector::level(j);
    match kind {
        PsiKind::Level => base,
        PsiKind::Soft => base.with_boson(j, Profile::Gaussian { amp: 0.5, power: 0.75, scale: 0.5 }),
        PsiKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let profile = Profile::Gaussian {
                amp: rng.gen_range(0.2..1.0),
                power: rng.gen_range(0.75..2.0),
                scale: rng.gen_range(0.3..2.0),
            };
            base.with_boson(j, profile)
        }
    }
}

fn scan_for(cfg: &ExperimentConfig, model: &Model) -> Result<(C64, TestVector, ContinuationScan), CliError> {
    let p = &cfg.parameters;
    let (g, j) = (p.g.unwrap_or_default(), p.j.unwrap_or_default());
    let theta = cfg.theta_or_default();
    let lambda = resonance_at(model, theta, g, j, None).map_err(in_module("spectral"))?.value;
    let (phi1, phi2) = cfg.angles();
    let domain = if lambda.im == 0.0 {
        ContinuationDomain::standard_scaled(lambda, REAL_CENTER_SCALE, phi1, phi2)
    } else {
        ContinuationDomain::standard(lambda, phi1, phi2)
    }
    .map_err(in_module("resolvent"))?;
    let schedule = match p.schedule.unwrap_or_default() {
        Schedule::Fixed => SigmaSchedule::Fixed(p.sigma.unwrap_or_default()),
        Schedule::PowerLaw => SigmaSchedule::PowerLaw,
    };
    let psi = test_vector(p.psi.unwrap_or_default(), j, p.seed.unwrap_or(0));
    let scan = continuation_scan(model, g, theta, &psi, &domain, schedule).map_err(in_module("resolvent"))?;
    Ok((lambda, psi, scan))
}

/// Runs the pipeline and returns its files and summary without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig) -> Result<(Artifacts, Summary, usize), CliError> {
    cfg.validate()?;
    let mut files = Artifacts::default();
    let mut s = Summary::new();
    s.insert("experiment".into(), Value::String(cfg.experiment.name().into()));
    if cfg.experiment == Experiment::Selfcheck {
        let checks = selfcheck::run_suite(&cfg.model, cfg.parameters.seed.unwrap_or(0));
        let failed = checks.iter().filter(|c| !c.passed).count();
        files.add("selfcheck.csv", selfcheck::table(&checks).to_csv());
        put_i(&mut s, "checks", checks.len());
        put_i(&mut s, "failed", failed);
        return Ok((files, s, failed));
    }
    let model = Model::new(cfg.model.clone()).map_err(in_module("model"))?;
    let p = &cfg.parameters;
    let theta = cfg.theta_or_default();
    let g = p.g.unwrap_or_default();
    let j = p.j.unwrap_or_default();
    put_i(&mut s, "dim", model.dim());
    match cfg.experiment {
        Experiment::Spectrum => {
            let part = if p.sigma.is_some() { Part::Cutoff } else { Part::Full };
            let h = model.hamiltonian(theta, g, p.sigma, part).map_err(in_module("model"))?;
            let values = dense_eigenvalues(&h.matrix).map_err(in_module("spectral"))?;
            let mut t = Table::new(&["index", "re", "im"]);
            for (i, v) in values.iter().enumerate() {
                t.push(vec![i.to_string(), fmt_f64(v.re), fmt_f64(v.im)]);
            }
            files.add("spectrum.csv", t.to_csv());
            put_i(&mut s, "count", values.len());
        }
        Experiment::ResonanceTrack => {
            let path = p.g_list.clone().unwrap_or_default();
            let est = track_resonance(&model, theta, &path, j, p.sigma).map_err(in_module("spectral"))?;
            files.add("track.csv", resonance_table(&est).to_csv());
            if let Some(last) = est.last() {
                put_c(&mut s, "lambda", last.value);
                put(&mut s, "residual", last.residual);
            }
        }
        Experiment::ThetaReport => {
            let thetas = p.theta_list.clone().unwrap_or_default();
            let sigma = p.sigma.unwrap_or_default();
            let r = theta_report(&model, g, &thetas, j, sigma).map_err(in_module("spectral"))?;
            let mut t = Table::new(&["theta_re", "theta_im", "full_re", "full_im", "cutoff_re", "cutoff_im", "string_angle"]);
            for i in 0..r.thetas.len() {
                t.push_f64(&[
                    r.thetas[i].re,
                    r.thetas[i].im,
                    r.full[i].re,
                    r.full[i].im,
                    r.cutoff[i].re,
                    r.cutoff[i].im,
                    r.string_angles[i],
                ]);
            }
            files.add("theta_report.csv", t.to_csv());
            put(&mut s, "full_spread", r.full_spread);
            put(&mut s, "cutoff_spread", r.cutoff_spread);
        }
        Experiment::Fgr => {
            let c = fgr(&model, j).map_err(in_module("feshbach"))?;
            files.add("channels.csv", c.channel_table().to_csv());
            put_c(&mut s, "z_od", c.z_od);
            put(&mut s, "z_d", c.z_d);
            put_c(&mut s, "z", c.z);
            put_b(&mut s, "stable", c.stable);
            if let Some(list) = &p.g_list {
                let corr = golden_rule_correction(&model, theta, j, list).map_err(in_module("spectral"))?;
                files.add("correction.csv", corr.table().to_csv());
                put(&mut s, "epsilon_hat", corr.epsilon_hat);
            }
        }
        Experiment::Survival => {
            let lambda = resonance_at(&model, theta, g, j, None).map_err(in_module("spectral"))?.value;
            let h = model.hamiltonian(C64::new(0.0, 0.0), g, None, Part::Full).map_err(in_module("model"))?;
            let psi = model.space().level_vacuum(j);
            let times = p.times.clone().unwrap_or_default();
            let trace = propagate_survival(&h.matrix, &psi, &times, lambda, &PropagationOptions::default())
                .map_err(in_module("dynamics"))?;
            files.add("survival.csv", trace.table().to_csv());
            put_c(&mut s, "lambda", lambda);
            put(&mut s, "sup_deviation", trace.sup_deviation());
        }
        Experiment::Metastability => {
            let opts = MetastabilityOptions { theta, ..Default::default() };
            let g_list = p.g_list.clone().unwrap_or_default();
            let r = metastability_report(&model, j, &g_list, &opts).map_err(in_module("dynamics"))?;
            files.add("metastability.csv", r.table().to_csv());
            for (i, row) in r.rows.iter().enumerate() {
                files.add(&format!("survival_{i}.csv"), row.trace.table().to_csv());
            }
            put(&mut s, "alpha_hat", r.alpha_hat);
            put(&mut s, "alpha_predicted", r.alpha_predicted);
            put(&mut s, "width_floor", r.width_floor);
            let worst = r.rows.iter().map(|row| row.envelope_error).fold(0.0, f64::max);
            put(&mut s, "envelope_error_max", worst);
            put_b(&mut s, "all_resolvable", r.rows.iter().all(|row| row.resolvable));
        }
        Experiment::ResolventScan | Experiment::PoleFit => {
            let (lambda, psi, scan) = scan_for(cfg, &model)?;
            files.add("scan.csv", scan.table().to_csv());
            put_c(&mut s, "lambda", lambda);
            put_i(&mut s, "samples", scan.samples.len());
            put_i(&mut s, "wedge_violations", scan.samples.iter().filter(|x| !x.wedge_ok).count());
            let max_cond = scan.samples.iter().filter(|x| x.wedge_ok).map(|x| x.condition).fold(0.0, f64::max);
            put(&mut s, "max_condition", max_cond);
            put(&mut s, "dprime_norm", dprime_norm(model.space(), &psi.deformed(&model, C64::new(0.0, 0.0))));
            if cfg.experiment == Experiment::PoleFit {
                let fit = pole_fit(&scan.values(), lambda).map_err(in_module("resolvent"))?;
                let summary = fit.summary(model.spec().form.mu);
                let text = toml::to_string(&summary).map_err(|e| CliError::Validation(format!("fit summary: {e}")))?;
                files.add("fit.toml", text);
                put_c(&mut s, "p", fit.residue);
                put(&mut s, "beta_hat", fit.fitted_beta);
                put(&mut s, "beta_band", fit.beta_band);
                put(&mut s, "beta_predicted", summary.beta_predicted);
                put(&mut s, "c_hat", fit.fitted_c);
                put(&mut s, "jackknife_spread", fit.jackknife_spread);
                put(&mut s, "remainder_bound", fit.remainder_bound(lambda));
                put_b(&mut s, "degenerate", fit.degenerate);
            }
        }
        Experiment::IrGap => {
            let list = p.sigma_list.clone().unwrap_or_default();
            let r = ir_gap_experiment(&model, theta, g, j, &list).map_err(in_module("rg"))?;
            files.add("ir_gap.csv", r.table().to_csv());
            put(&mut s, "slope", r.slope);
            put_b(&mut s, "monotone", r.monotone);
            if let [row] = r.rows.as_slice() {
                put(&mut s, "sigma", row.sigma);
                put_c(&mut s, "lambda_full", row.lambda_full);
                put_c(&mut s, "lambda_cut", row.lambda_cut);
                put(&mut s, "diff_abs", row.diff_abs);
                put(&mut s, "gap_over_sigma", row.gap_over_sigma);
                put_b(&mut s, "resolvable", row.resolvable);
            }
        }
        Experiment::Decimate => {
            let sigma = p.sigma.unwrap_or_default();
            let rho0 = p.rho0.unwrap_or_default();
            let d = Decimator::new(&model, theta, g, j, sigma, rho0).map_err(in_module("rg"))?;
            let z = p.z.unwrap_or(d.lambda_cut());
            let r = d.at(z).map_err(in_module("rg"))?;
            let lambda1 = d.root(&Default::default()).map_err(in_module("rg"))?;
            let mut t = Table::new(&["field_energy", "t_re", "t_im"]);
            for (e, v) in &r.t_diag {
                t.push_f64(&[*e, v.re, v.im]);
            }
            files.add("decimation.csv", t.to_csv());
            put(&mut s, "rho", r.rho);
            put(&mut s, "sigma", d.sigma());
            put_i(&mut s, "rank", d.rank());
            put_c(&mut s, "z", z);
            put_c(&mut s, "e_z", r.e_z);
            put_c(&mut s, "delta_e", r.delta_e());
            put(&mut s, "w_norm", r.w_norm);
            put_c(&mut s, "lambda_cut", r.lambda_cut);
            put_c(&mut s, "lambda1", lambda1);
        }
        Experiment::Selfcheck => unreachable!("handled above"),
    }
    Ok((files, s, 0))
}

/// Runs `cfg` and writes its outputs under `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    run_in(cfg, &cfg.output_dir)
}

pub fn run_in(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let config_hash = sha256_hex(cfg.canonical()?.as_bytes());
    let (mut files, summary, failed_checks) = execute(cfg)?;
    let text = toml::to_string(&summary).map_err(|e| CliError::Validation(format!("summary: {e}")))?;
    files.add("summary.toml", text);
    let outputs = files.write_all(dir)?;
    let record = RunRecord {
        config_hash,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time: start.elapsed().as_secs_f64(),
        outputs,
    };
    let text = toml::to_string(&record).map_err(|e| CliError::Validation(format!("run record: {e}")))?;
    write_atomic(&dir.join("run_record.toml"), text.as_bytes())?;
    Ok(RunOutcome { record, summary, failed_checks })
}
