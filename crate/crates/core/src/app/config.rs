use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembly::AssemblyConfig;
use crate::cellformulas::{CellProblem, SearchConfig};
use crate::constructions::{CorrectionGrid, Sd2Spec};
use crate::densities::{DensitySpec, SamplerConfig};
use crate::error::{Error, Result};
use crate::example_tr::BoxFamily;
use crate::fields::Sbv2Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    CheckHypotheses,
    Energy,
    ApproxSequence,
    CellSweep,
    ExampleVerify,
    RelaxAssemble,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::CheckHypotheses => "check-hypotheses",
            TaskKind::Energy => "energy",
            TaskKind::ApproxSequence => "approx-sequence",
            TaskKind::CellSweep => "cell-sweep",
            TaskKind::ExampleVerify => "example-verify",
            TaskKind::RelaxAssemble => "relax-assemble",
        }
    }

    /// Keys the task reads, besides `task`, `seed` and `output`.
    fn keys(&self) -> (&'static [&'static str], &'static [&'static str]) {
        // (required, optional)
        match self {
            TaskKind::CheckHypotheses => (&["densities", "d", "n"], &["sampler"]),
            TaskKind::Energy => (&["densities", "field"], &[]),
            TaskKind::ApproxSequence => (&["sd2"], &["densities", "sequence"]),
            TaskKind::CellSweep => (&["densities", "problem"], &["search"]),
            TaskKind::ExampleVerify => (&["example"], &[]),
            TaskKind::RelaxAssemble => (&["densities", "sd2"], &["assembly"]),
        }
    }
}

/// A field given inline or as a path to its JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldInput {
    File { file: String },
    Inline(Box<Sbv2Field>),
}

impl FieldInput {
    pub fn load(&self, base: &Path) -> Result<Sbv2Field> {
        match self {
            FieldInput::Inline(f) => Ok((**f).clone()),
            FieldInput::File { file } => {
                let text = std::fs::read_to_string(base.join(file))
                    .map_err(|e| Error::Config(format!("cannot read field file `{file}`: {e}")))?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceConfig {
    pub ns: Vec<usize>,
    pub correction_grid: CorrectionGrid,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self { ns: vec![4, 8, 16, 32], correction_grid: CorrectionGrid::Same }
    }
}

/// The trace example: either `l` and `m` in full, or only the slice
/// `Δ(·, a)` as an N×N matrix (then `M = 0` and `L_ijk = B_ij a_k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleConfig {
    pub a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<Vec<f64>>,
    #[serde(default)]
    pub family: BoxFamily,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Random boxes and laminates checked against the closed form.
    #[serde(default = "default_random")]
    pub random_competitors: usize,
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_random() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory. The `--out` flag overrides it; without either,
    /// `SDRELAX_OUT_DIR`, then the working directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Report file name, `report.json` by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    /// CSV file name for the tasks that emit tables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

/// One task with its inputs. Keys that the task does not read are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd2: Option<Sd2Spec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<CellProblem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<ExampleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assembly: Option<AssemblyConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check_keys()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn present(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut add = |k: &'static str, on: bool| {
            if on {
                keys.push(k)
            }
        };
        add("densities", self.densities.is_some());
        add("d", self.d.is_some());
        add("n", self.n.is_some());
        add("sampler", self.sampler.is_some());
        add("field", self.field.is_some());
        add("sd2", self.sd2.is_some());
        add("sequence", self.sequence.is_some());
        add("problem", self.problem.is_some());
        add("search", self.search.is_some());
        add("example", self.example.is_some());
        add("assembly", self.assembly.is_some());
        keys
    }

    /// Every required key is given and no key is foreign to the task.
    pub fn check_keys(&self) -> Result<()> {
        let (required, optional) = self.task.keys();
        let present = self.present();
        if let Some(k) = required.iter().find(|k| !present.contains(k)) {
            return Err(Error::Config(format!("task `{}` needs key `{k}`", self.task.name())));
        }
        if let Some(k) = present.iter().find(|k| !required.contains(k) && !optional.contains(k)) {
            return Err(Error::Config(format!("key `{k}` is not used by task `{}`", self.task.name())));
        }
        Ok(())
    }

    /// The seed reaches every component that samples or records one.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Fills in defaults so the embedded config fully describes the run.
    pub fn resolved(mut self) -> Self {
        let seed = self.seed;
        match self.task {
            TaskKind::CheckHypotheses => {
                self.sampler.get_or_insert_with(SamplerConfig::default).seed = seed;
            }
            TaskKind::ApproxSequence => {
                self.sequence.get_or_insert_with(SequenceConfig::default);
            }
            TaskKind::CellSweep => {
                self.search.get_or_insert_with(SearchConfig::default).seed = seed;
            }
            TaskKind::RelaxAssemble => {
                self.assembly.get_or_insert_with(AssemblyConfig::default).search.seed = seed;
            }
            TaskKind::Energy | TaskKind::ExampleVerify => {}
        }
        self
    }
}
