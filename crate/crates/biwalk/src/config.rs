//! Experiment files.
//!
//! One TOML file describes one experiment. Guide indices are 1-based.
//!
//! ```toml
//! [array]
//! n_guides = 71
//! beta = 0.0                 # homogeneous beta_j, in units of C0
//! coupling = 1.0             # homogeneous C_j, in units of C0
//! # beta_profile = [...]     # explicit, length N; overrides `beta`
//! # coupling_profile = [...] # explicit, length N-1; overrides `coupling`
//!
//! [pump]
//! guide = "center"           # 1-based index, "center" or "corner"
//! phase = 0.0
//! strength = 1.0
//! # profile = [[re, im], ...]   # explicit unit-norm profile; overrides `guide`
//! # beta_tilde = [...]          # phase-mismatch override; default 2 beta_j
//!
//! [grid]
//! z_min = 0.05
//! z_max = 30.0
//! points_per_decade = 400
//! # points = [...]           # explicit C0 z values; overrides the above
//! snapshots = 64             # rows written to distributions.csv
//!
//! [analysis]
//! border_threshold = 1e-7
//!
//! [disorder]
//! kappa_c = 0.0
//! kappa_beta = 0.0
//! delta_c = 0.9
//! delta_beta = 3.0
//! beta_0 = 0.0
//! realizations = 200
//! seed = 0
//! averaging = "sigma"        # or "distribution"
//!
//! [regime_map]
//! steps = 21                 # kappa axes 0, 1/(steps-1), ..., 1
//! # kappa_c = [...]          # explicit axes override `steps`
//! # kappa_beta = [...]
//! # window = [0.05, 8.0]     # default: up to the ordered border onset, at most 8
//! points_per_decade = 100
//!
//! [sigma_vs_kappa]
//! steps = 21
//! # kappas = [...]
//! z = [5.0, 10.0]
//! kinds = ["off_diagonal", "diagonal"]
//! ```

use std::path::Path;

use biwalk_core::disorder::DisorderKind;
use biwalk_core::evolution::{geometric_grid, DEFAULT_BORDER_THRESHOLD};
use biwalk_core::model::center_guide;
use biwalk_core::{ArrayConfig, Averaging, Complex64, DisorderSpec, PumpSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub array: ArraySection,
    #[serde(default)]
    pub pump: PumpSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_map: Option<RegimeMapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_vs_kappa: Option<KappaSweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub n_guides: usize,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_profile: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_profile: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedGuide {
    Center,
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GuideRef {
    Index(usize),
    Named(NamedGuide),
}

impl GuideRef {
    /// 0-based guide in an array of `n` guides.
    pub fn resolve(self, n: usize) -> Result<usize, String> {
        match self {
            GuideRef::Named(NamedGuide::Center) => Ok(center_guide(n)),
            GuideRef::Named(NamedGuide::Corner) => Ok(0),
            GuideRef::Index(i) if (1..=n).contains(&i) => Ok(i - 1),
            GuideRef::Index(i) => Err(format!("pump guide {i} outside 1..={n}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guide: Option<GuideRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "one")]
    pub strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_tilde: Option<Vec<f64>>,
}

impl Default for PumpSection {
    fn default() -> Self {
        Self {
            guide: None,
            profile: None,
            phase: 0.0,
            strength: 1.0,
            beta_tilde: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_z_min")]
    pub z_min: f64,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            z_min: default_z_min(),
            z_max: default_z_max(),
            points_per_decade: default_ppd(),
            points: None,
            snapshots: default_snapshots(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_threshold")]
    pub border_threshold: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            border_threshold: DEFAULT_BORDER_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingMode {
    #[default]
    Sigma,
    Distribution,
}

impl From<AveragingMode> for Averaging {
    fn from(m: AveragingMode) -> Self {
        match m {
            AveragingMode::Sigma => Averaging::Sigma,
            AveragingMode::Distribution => Averaging::Distribution,
        }
    }
}

impl From<Averaging> for AveragingMode {
    fn from(m: Averaging) -> Self {
        match m {
            Averaging::Sigma => AveragingMode::Sigma,
            Averaging::Distribution => AveragingMode::Distribution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    #[serde(default)]
    pub kappa_c: f64,
    #[serde(default)]
    pub kappa_beta: f64,
    #[serde(default = "default_delta_c")]
    pub delta_c: f64,
    #[serde(default = "default_delta_beta")]
    pub delta_beta: f64,
    #[serde(default)]
    pub beta_0: f64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub averaging: AveragingMode,
}

impl Default for DisorderSection {
    fn default() -> Self {
        Self::from(&DisorderSpec::default())
    }
}

impl From<&DisorderSpec> for DisorderSection {
    fn from(s: &DisorderSpec) -> Self {
        Self {
            kappa_c: s.kappa_c,
            kappa_beta: s.kappa_beta,
            delta_c: s.delta_c,
            delta_beta: s.delta_beta,
            beta_0: s.beta_0,
            realizations: s.realizations,
            seed: s.master_seed,
            averaging: s.averaging.into(),
        }
    }
}

impl DisorderSection {
    pub fn to_spec(&self) -> Result<DisorderSpec, CliError> {
        let spec = DisorderSpec {
            kappa_c: self.kappa_c,
            kappa_beta: self.kappa_beta,
            delta_c: self.delta_c,
            delta_beta: self.delta_beta,
            beta_0: self.beta_0,
            realizations: self.realizations,
            master_seed: self.seed,
            averaging: self.averaging.into(),
        };
        spec.check().map_err(CliError::invalid_config)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeMapSection {
    #[serde(default = "default_kappa_steps")]
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_window_ppd")]
    pub points_per_decade: usize,
}

impl Default for RegimeMapSection {
    fn default() -> Self {
        Self {
            steps: default_kappa_steps(),
            kappa_c: None,
            kappa_beta: None,
            window: None,
            points_per_decade: default_window_ppd(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    OffDiagonal,
    Diagonal,
}

impl KindName {
    pub fn as_str(self) -> &'static str {
        match self {
            KindName::OffDiagonal => "off_diagonal",
            KindName::Diagonal => "diagonal",
        }
    }
}

impl From<KindName> for DisorderKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::OffDiagonal => DisorderKind::OffDiagonal,
            KindName::Diagonal => DisorderKind::Diagonal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaSweepSection {
    #[serde(default = "default_kappa_steps")]
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
    #[serde(default = "default_sweep_z")]
    pub z: Vec<f64>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<KindName>,
}

impl Default for KappaSweepSection {
    fn default() -> Self {
        Self {
            steps: default_kappa_steps(),
            kappas: None,
            z: default_sweep_z(),
            kinds: default_kinds(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_z_min() -> f64 {
    0.05
}
fn default_z_max() -> f64 {
    30.0
}
fn default_ppd() -> usize {
    400
}
fn default_snapshots() -> usize {
    64
}
fn default_threshold() -> f64 {
    DEFAULT_BORDER_THRESHOLD
}
fn default_delta_c() -> f64 {
    0.9
}
fn default_delta_beta() -> f64 {
    3.0
}
fn default_realizations() -> usize {
    200
}
fn default_kappa_steps() -> usize {
    21
}
fn default_window_ppd() -> usize {
    100
}
fn default_sweep_z() -> Vec<f64> {
    vec![5.0, 10.0]
}
fn default_kinds() -> Vec<KindName> {
    vec![KindName::OffDiagonal, KindName::Diagonal]
}

/// `steps` evenly spaced values on [0, 1].
pub fn unit_axis(steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect(),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The validated physical array described by this file.
    pub fn array_config(&self) -> Result<ArrayConfig, CliError> {
        let n = self.array.n_guides;
        let beta_s = match &self.array.beta_profile {
            Some(p) => p.clone(),
            None => vec![self.array.beta; n],
        };
        let couplings = match &self.array.coupling_profile {
            Some(p) => p.clone(),
            None => vec![self.array.coupling; n.saturating_sub(1)],
        };
        let p = &self.pump;
        let amplitudes = match (&p.profile, p.guide) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "pump: give either `guide` or `profile`, not both".into(),
                ))
            }
            (Some(profile), None) => profile
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect(),
            (None, guide) => {
                let g = guide
                    .unwrap_or(GuideRef::Named(NamedGuide::Center))
                    .resolve(n)
                    .map_err(CliError::Config)?;
                PumpSpec::single(n, g).amplitudes
            }
        };
        let pump = PumpSpec {
            amplitudes,
            beta_tilde: p.beta_tilde.clone(),
            strength: p.strength,
        }
        .with_phase(p.phase);
        ArrayConfig {
            n_guides: n,
            beta_s,
            couplings,
            pump,
        }
        .validate()
        .map_err(CliError::invalid_config)
    }

    /// A file that reproduces `array` exactly, with every profile spelled out.
    pub fn from_array(array: &ArrayConfig) -> Self {
        Self {
            array: ArraySection {
                n_guides: array.n_guides,
                beta: 0.0,
                coupling: 1.0,
                beta_profile: Some(array.beta_s.clone()),
                coupling_profile: Some(array.couplings.clone()),
            },
            pump: PumpSection {
                guide: None,
                profile: Some(array.pump.amplitudes.iter().map(|a| [a.re, a.im]).collect()),
                phase: 0.0,
                strength: array.pump.strength,
                beta_tilde: array.pump.beta_tilde.clone(),
            },
            grid: GridSection::default(),
            analysis: AnalysisSection::default(),
            disorder: None,
            regime_map: None,
            sigma_vs_kappa: None,
        }
    }

    pub fn z_grid(&self) -> Result<Vec<f64>, CliError> {
        let g = &self.grid;
        let grid = match &g.points {
            Some(points) => points.clone(),
            None => geometric_grid(g.z_min, g.z_max, g.points_per_decade)
                .map_err(CliError::from_core)?,
        };
        biwalk_core::evolution::check_grid(&grid).map_err(CliError::from_core)?;
        Ok(grid)
    }

    /// Evenly spread grid indices for the distribution snapshots.
    pub fn snapshot_indices(&self, grid_len: usize) -> Vec<usize> {
        let count = self.grid.snapshots.min(grid_len);
        let mut out: Vec<usize> = match count {
            0 => Vec::new(),
            1 => vec![grid_len - 1],
            _ => (0..count)
                .map(|i| ((i * (grid_len - 1)) as f64 / (count - 1) as f64).round() as usize)
                .collect(),
        };
        out.dedup();
        out
    }

    pub fn border_threshold(&self) -> Result<f64, CliError> {
        let t = self.analysis.border_threshold;
        if t.is_finite() && t > 0.0 && t < 1.0 {
            Ok(t)
        } else {
            Err(CliError::Config(
                "analysis.border_threshold must lie in (0, 1)".into(),
            ))
        }
    }

    pub fn disorder_spec(&self) -> Result<DisorderSpec, CliError> {
        self.disorder
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [disorder] section".into()))?
            .to_spec()
    }
}
