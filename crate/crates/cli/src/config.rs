use std::fmt;
use std::path::PathBuf;

use reslab::model::ModelSpec;
use reslab::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    ResonanceTrack,
    ThetaReport,
    Fgr,
    Survival,
    Metastability,
    ResolventScan,
    PoleFit,
    IrGap,
    Decimate,
    Selfcheck,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Self::Spectrum,
        Self::ResonanceTrack,
        Self::ThetaReport,
        Self::Fgr,
        Self::Survival,
        Self::Metastability,
        Self::ResolventScan,
        Self::PoleFit,
        Self::IrGap,
        Self::Decimate,
        Self::Selfcheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::ResonanceTrack => "resonance-track",
            Self::ThetaReport => "theta-report",
            Self::Fgr => "fgr",
            Self::Survival => "survival",
            Self::Metastability => "metastability",
            Self::ResolventScan => "resolvent-scan",
            Self::PoleFit => "pole-fit",
            Self::IrGap => "ir-gap",
            Self::Decimate => "decimate",
            Self::Selfcheck => "selfcheck",
        }
    }

    /// `(required, optional)` parameter keys.
    pub fn keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        const SCAN_OPT: &[&str] = &["theta", "phi1", "phi2", "psi", "schedule", "sigma", "seed"];
        match self {
            Self::Spectrum => (&["g"], &["theta", "sigma"]),
            Self::ResonanceTrack => (&["g_list", "j"], &["theta", "sigma"]),
            Self::ThetaReport => (&["g", "theta_list", "j", "sigma"], &[]),
            Self::Fgr => (&["j"], &["g_list", "theta"]),
            Self::Survival => (&["g", "j", "times"], &["theta"]),
            Self::Metastability => (&["g_list", "j"], &["theta"]),
            Self::ResolventScan | Self::PoleFit => (&["g", "j"], SCAN_OPT),
            Self::IrGap => (&["g", "j", "sigma_list"], &["theta"]),
            Self::Decimate => (&["g", "j", "sigma", "rho0"], &["theta", "z"]),
            Self::Selfcheck => (&[], &["seed"]),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Vector the resolvent experiments probe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiKind {
    /// `|j> (x) |vacuum>`.
    #[default]
    Level,
    /// Level state plus an infrared-soft one-boson tail.
    Soft,
    /// Level state plus a seeded random one-boson profile.
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Fixed,
    #[default]
    PowerLaw,
}

/// Experiment parameters; complex values are written as `[re, im]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_list: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Scalar parameters a sweep may vary.
pub const SWEEP_AXES: [&str; 7] = ["g", "sigma", "rho0", "phi1", "phi2", "j", "seed"];

impl Parameters {
    pub fn present(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut add = |k: &'static str, on: bool| {
            if on {
                keys.push(k);
            }
        };
        add("g", self.g.is_some());
        add("g_list", self.g_list.is_some());
        add("theta", self.theta.is_some());
        add("theta_list", self.theta_list.is_some());
        add("sigma", self.sigma.is_some());
        add("sigma_list", self.sigma_list.is_some());
        add("j", self.j.is_some());
        add("times", self.times.is_some());
        add("phi1", self.phi1.is_some());
        add("phi2", self.phi2.is_some());
        add("rho0", self.rho0.is_some());
        add("z", self.z.is_some());
        add("psi", self.psi.is_some());
        add("schedule", self.schedule.is_some());
        add("seed", self.seed.is_some());
        keys
    }

    /// Sets a sweep axis. For `ir-gap` the `sigma` axis becomes a one-element `sigma_list`.
    pub fn set_axis(&mut self, experiment: Experiment, axis: &str, value: f64) -> Result<(), CliError> {
        let integer = || -> Result<u64, CliError> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as u64)
            } else {
                Err(CliError::Validation(format!("--values: {axis} needs non-negative integers, got {value}")))
            }
        };
        match axis {
            "g" => self.g = Some(value),
            "sigma" if experiment == Experiment::IrGap => self.sigma_list = Some(vec![value]),
            "sigma" => self.sigma = Some(value),
            "rho0" => self.rho0 = Some(value),
            "phi1" => self.phi1 = Some(value),
            "phi2" => self.phi2 = Some(value),
            "j" => self.j = Some(integer()? as usize),
            "seed" => self.seed = Some(integer()?),
            _ => {
                return Err(CliError::Validation(format!(
                    "--axis: `{axis}` is not a scalar parameter (one of {})",
                    SWEEP_AXES.join(", ")
                )))
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub parameters: Parameters,
    pub model: ModelSpec,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// The part of a config that determines results; `output_dir` is excluded.
#[derive(Serialize)]
struct Canonical<'a> {
    experiment: Experiment,
    parameters: &'a Parameters,
    model: &'a ModelSpec,
}

fn bad(path: &str, reason: impl fmt::Display) -> CliError {
    CliError::Validation(format!("{path}: {reason}"))
}

fn finite(path: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(bad(path, "must be finite"))
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, model: ModelSpec, parameters: Parameters) -> Self {
        Self { experiment, output_dir: default_output_dir(), parameters, model }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Serialization of the result-determining fields, used for hashing.
    pub fn canonical(&self) -> Result<String, CliError> {
        let c = Canonical { experiment: self.experiment, parameters: &self.parameters, model: &self.model };
        toml::to_string(&c).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate().map_err(|e| bad("model", e))?;
        let p = &self.parameters;
        let (required, optional) = self.experiment.keys();
        for key in p.present() {
            if !required.contains(&key) && !optional.contains(&key) {
                return Err(bad(&format!("parameters.{key}"), format!("not used by experiment {}", self.experiment)));
            }
        }
        let present = p.present();
        for key in required {
            if !present.contains(key) {
                return Err(bad(&format!("parameters.{key}"), format!("required by experiment {}", self.experiment)));
            }
        }

        let grid = &self.model.grid;
        let levels = self.model.particle.levels.len();
        let theta_max = self.model.theta_max;
        let check_g = |path: &str, g: f64| {
            finite(path, g)?;
            if g < 0.0 {
                return Err(bad(path, "must be non-negative"));
            }
            Ok(())
        };
        let check_sigma = |path: &str, s: f64| {
            finite(path, s)?;
            if !(s > grid.kmin && s <= grid.kmax) {
                return Err(bad(path, format!("must lie in ({}, {}]", grid.kmin, grid.kmax)));
            }
            Ok(())
        };
        let check_theta = |path: &str, t: C64, needs_im: bool| {
            finite(path, t.re)?;
            finite(path, t.im)?;
            if t.norm() > theta_max {
                return Err(bad(path, format!("|theta| = {} exceeds theta_max = {theta_max}", t.norm())));
            }
            if needs_im && !(t.im > 0.0) {
                return Err(bad(path, "needs Im theta > 0"));
            }
            Ok(())
        };

        if let Some(g) = p.g {
            check_g("parameters.g", g)?;
        }
        if let Some(list) = &p.g_list {
            if list.is_empty() {
                return Err(bad("parameters.g_list", "empty"));
            }
            for (i, &g) in list.iter().enumerate() {
                check_g(&format!("parameters.g_list[{i}]"), g)?;
            }
        }
        if let Some(j) = p.j {
            if j >= levels {
                return Err(bad("parameters.j", format!("level {j} does not exist ({levels} levels)")));
            }
        }
        if let Some(s) = p.sigma {
            check_sigma("parameters.sigma", s)?;
        }
        if let Some(list) = &p.sigma_list {
            if list.is_empty() {
                return Err(bad("parameters.sigma_list", "empty"));
            }
            for (i, &s) in list.iter().enumerate() {
                check_sigma(&format!("parameters.sigma_list[{i}]"), s)?;
            }
        }
        let resonant = self.experiment != Experiment::Spectrum;
        if let Some(t) = p.theta {
            check_theta("parameters.theta", t, resonant)?;
        }
        if let Some(list) = &p.theta_list {
            if list.len() < 3 {
                return Err(bad("parameters.theta_list", "needs at least three values"));
            }
            for (i, &t) in list.iter().enumerate() {
                check_theta(&format!("parameters.theta_list[{i}]"), t, true)?;
                if !(0.15..=0.45).contains(&t.im) {
                    return Err(bad(&format!("parameters.theta_list[{i}]"), "Im theta must lie in [0.15, 0.45]"));
                }
            }
        }
        if let Some(times) = &p.times {
            if times.is_empty() {
                return Err(bad("parameters.times", "empty"));
            }
            for (i, &t) in times.iter().enumerate() {
                finite(&format!("parameters.times[{i}]"), t)?;
                if t < 0.0 {
                    return Err(bad(&format!("parameters.times[{i}]"), "must be non-negative"));
                }
            }
            if times.windows(2).any(|w| w[1] < w[0]) {
                return Err(bad("parameters.times", "must be non-decreasing"));
            }
        }
        for (path, v) in [("parameters.phi1", p.phi1), ("parameters.phi2", p.phi2)] {
            if let Some(v) = v {
                finite(path, v)?;
            }
        }
        let (phi1, phi2) = self.angles();
        if matches!(self.experiment, Experiment::ResolventScan | Experiment::PoleFit) {
            if !(phi1 < std::f64::consts::FRAC_PI_2) {
                return Err(bad("parameters.phi1", "must be below pi/2"));
            }
            if !(phi2 > std::f64::consts::PI && phi2 - phi1 < 2.0 * std::f64::consts::PI) {
                return Err(bad("parameters.phi2", "must exceed pi and stay within one turn of phi1"));
            }
            let theta = self.theta_or_default();
            let lo = std::f64::consts::FRAC_PI_2 - theta.im;
            let hi = 1.5 * std::f64::consts::PI - theta.im;
            if phi1 < lo || phi2 > hi {
                return Err(bad("parameters.theta", format!("wedge needs angles within [{lo}, {hi}] for this Im theta")));
            }
            if p.schedule == Some(Schedule::Fixed) && p.sigma.is_none() {
                return Err(bad("parameters.sigma", "required by schedule = \"fixed\""));
            }
        }
        if let Some(rho) = p.rho0 {
            finite("parameters.rho0", rho)?;
            let sigma = p.sigma.unwrap_or(f64::INFINITY);
            if !(rho > 0.0 && rho <= sigma) {
                return Err(bad("parameters.rho0", "must satisfy 0 < rho0 <= sigma"));
            }
        }
        if let Some(z) = p.z {
            finite("parameters.z", z.re)?;
            finite("parameters.z", z.im)?;
        }
        if self.experiment == Experiment::Metastability {
            let list = p.g_list.as_deref().unwrap_or_default();
            if list.len() < 3 || list.windows(2).any(|w| w[1] >= w[0]) || list.iter().any(|&g| g <= 0.0) {
                return Err(bad("parameters.g_list", "needs at least three positive, strictly decreasing couplings"));
            }
        }
        if self.experiment == Experiment::ResonanceTrack {
            let list = p.g_list.as_deref().unwrap_or_default();
            if list.first() != Some(&0.0) {
                return Err(bad("parameters.g_list", "tracking starts at g = 0"));
            }
        }
        Ok(())
    }

    pub fn theta_or_default(&self) -> C64 {
        let fallback = match self.experiment {
            Experiment::Spectrum => C64::new(0.0, 0.0),
            _ => C64::new(0.0, 0.3),
        };
        self.parameters.theta.unwrap_or(fallback)
    }

    /// Wedge angles, defaulting to `pi/2 - 0.1` and `pi + 0.2`.
    pub fn angles(&self) -> (f64, f64) {
        (
            self.parameters.phi1.unwrap_or(std::f64::consts::FRAC_PI_2 - 0.1),
            self.parameters.phi2.unwrap_or(std::f64::consts::PI + 0.2),
        )
    }
}
