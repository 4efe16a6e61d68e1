//! JSON run and sweep configuration.

use std::fs;
use std::path::{Path, PathBuf};

use gpj_core::{make_profile, BoundaryCondition, InitialProfile, ModelParams, ProfileKind, Tolerances};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_gamma() -> f64 {
    1.0
}
fn default_grid() -> usize {
    65
}
fn default_n_improved() -> usize {
    gpj_core::criteria::DEFAULT_N_IMPROVED
}
fn default_trajectory() -> PathBuf {
    PathBuf::from("trajectory.csv")
}
fn default_report() -> PathBuf {
    PathBuf::from("report.json")
}
fn default_xcheck_n() -> usize {
    512
}
fn default_cfl() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
    /// CSV with header `x,u`; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_path: Option<PathBuf>,
}

impl ProfileSpec {
    pub fn build(&self, base: &Path) -> Result<InitialProfile, CliError> {
        let samples = match (&self.samples_path, self.kind) {
            (Some(path), ProfileKind::Samples) => Some(read_samples(&base.join(path))?),
            (None, ProfileKind::Samples) => {
                return Err(CliError::Config("profile kind `samples` needs `samples_path`".into()))
            }
            _ => None,
        };
        make_profile(self.kind, self.gamma, self.n_modes, samples).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Short label used in sweep rows.
    pub fn label(&self) -> String {
        match self.n_modes {
            Some(n) if self.kind == ProfileKind::FourierZigzag => format!("{}[{n}]", self.kind),
            _ => self.kind.to_string(),
        }
    }
}

fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read samples {}: {e}", path.display())))?;
    rdr.deserialize::<(f64, f64)>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("bad samples file {}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_trajectory")]
    pub trajectory: PathBuf,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_report")]
    pub report: PathBuf,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { trajectory: default_trajectory(), snapshot_times: Vec::new(), report: default_report() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XcheckSpec {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_xcheck_n")]
    pub n: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

impl Default for XcheckSpec {
    fn default() -> Self {
        XcheckSpec { enabled: false, n: default_xcheck_n(), cfl: default_cfl() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub a: f64,
    #[serde(default)]
    pub bc: BoundaryCondition,
    pub profile: ProfileSpec,
    pub t_end: f64,
    /// Labels per snapshot CSV.
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default = "default_n_improved")]
    pub n_improved: usize,
    #[serde(default)]
    pub xcheck: XcheckSpec,
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

impl RunConfig {
    pub fn new(a: f64, profile: ProfileSpec, t_end: f64) -> Self {
        RunConfig {
            a,
            bc: BoundaryCondition::default(),
            profile,
            t_end,
            grid_n: default_grid(),
            tolerances: Tolerances::default(),
            outputs: Outputs::default(),
            n_improved: default_n_improved(),
            xcheck: XcheckSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check(self.a.is_finite(), || format!("a must be finite, got {}", self.a))?;
        check(self.t_end > 0.0 && self.t_end.is_finite(), || format!("t_end must be positive, got {}", self.t_end))?;
        check(self.grid_n >= 16, || format!("grid_n must be at least 16, got {}", self.grid_n))?;
        check(self.profile.gamma.is_finite(), || "gamma must be finite".into())?;
        for &t in &self.outputs.snapshot_times {
            check((0.0..=self.t_end).contains(&t), || format!("snapshot time {t} outside [0, {}]", self.t_end))?;
        }
        self.tolerances.validate().map_err(|e| CliError::Config(e.to_string()))?;
        check((2..=gpj_core::criteria::MAX_N_IMPROVED).contains(&self.n_improved), || {
            format!("n_improved must be in 2..={}", gpj_core::criteria::MAX_N_IMPROVED)
        })?;
        if self.xcheck.enabled {
            check(self.xcheck.n >= gpj_core::eulerian::MIN_EVOLVE_POINTS, || "xcheck.n must be at least 128".into())?;
            check(self.xcheck.cfl > 0.0 && self.xcheck.cfl <= 0.5, || "xcheck.cfl must be in (0, 0.5]".into())?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        ModelParams::with_bc(self.a, self.bc).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub a_values: Vec<f64>,
    pub profiles: Vec<ProfileSpec>,
    pub t_end: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_n_improved")]
    pub n_improved: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check(!self.a_values.is_empty(), || "sweep needs at least one value of a".into())?;
        check(!self.profiles.is_empty(), || "sweep needs at least one profile".into())?;
        check(self.a_values.iter().all(|a| a.is_finite()), || "a values must be finite".into())?;
        check(self.t_end > 0.0 && self.t_end.is_finite(), || format!("t_end must be positive, got {}", self.t_end))?;
        self.tolerances.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Reads a JSON document; returns it with the directory relative paths resolve against.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, PathBuf), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}
