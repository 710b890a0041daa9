use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use irbl_core::ir::TOKENIZER_VERSION;
use irbl_core::metrics::DEFAULT_K_VALUES;
use irbl_core::techniques::{preset, Technique, TechniqueConfig, TextMode};
use irbl_core::Granularity;
use irbl_history::TransformOptions;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Input locations. Relative paths are resolved against the directory of
/// the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub source_repo: Option<PathBuf>,
    pub transformed_repo: Option<PathBuf>,
    pub bug_reports: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

/// Per-technique parameter overrides; unset fields keep the preset value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechniqueOverride {
    pub text_mode: Option<TextMode>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub history_window_days: Option<f64>,
    pub history_decay_days: Option<f64>,
    pub max_frames: Option<usize>,
    pub list_length: Option<usize>,
}

impl TechniqueOverride {
    fn apply(&self, mut config: TechniqueConfig) -> TechniqueConfig {
        if let Some(v) = self.text_mode {
            config.text_mode = v;
        }
        if let Some(v) = self.alpha {
            config.alpha = v;
        }
        if let Some(v) = self.beta {
            config.beta = v;
        }
        if let Some(v) = self.gamma {
            config.gamma = v;
        }
        if let Some(v) = self.history_window_days {
            config.history_window_days = v;
        }
        if let Some(v) = self.history_decay_days {
            config.history_decay_days = v;
        }
        if let Some(v) = self.max_frames {
            config.max_frames = v;
        }
        if self.list_length.is_some() {
            config.list_length = self.list_length;
        }
        config
    }
}

fn default_techniques() -> Vec<String> {
    Technique::ALL.iter().map(|t| t.name().to_string()).collect()
}

fn default_granularities() -> Vec<Granularity> {
    vec![Granularity::File, Granularity::Method]
}

fn default_k_values() -> Vec<usize> {
    DEFAULT_K_VALUES.to_vec()
}

fn default_compare_k() -> usize {
    1000
}

/// Contents of the TOML run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Project name used in evaluation summaries.
    pub project: String,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default = "default_techniques")]
    pub techniques: Vec<String>,
    #[serde(default = "default_granularities")]
    pub granularities: Vec<Granularity>,
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    /// Budget used by the file-vs-method comparison; must be in `k_values`.
    #[serde(default = "default_compare_k")]
    pub compare_k: usize,
    /// When set, must equal the tokenizer version of this build.
    #[serde(default)]
    pub tokenizer_version: Option<String>,
    #[serde(default)]
    pub transform: TransformOptions,
    /// Keyed by technique name.
    #[serde(default)]
    pub overrides: BTreeMap<String, TechniqueOverride>,
    /// Localize output directories to evaluate together; defaults to
    /// `paths.output_dir`.
    #[serde(default)]
    pub eval_inputs: Vec<PathBuf>,
}

/// A validated configuration with resolved paths and technique parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    #[serde(flatten)]
    pub run: RunConfig,
    pub technique_configs: BTreeMap<String, TechniqueConfig>,
    #[serde(skip)]
    pub techniques: Vec<Technique>,
}

impl Resolved {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut run: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))?;
        let bad = |msg: String| Err(CliError::Input(format!("config: {msg}")));

        if run.project.trim().is_empty() {
            return bad("project must not be empty".into());
        }
        for path in [
            &mut run.paths.source_repo,
            &mut run.paths.transformed_repo,
            &mut run.paths.bug_reports,
            &mut run.paths.catalog,
            &mut run.paths.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            *path = base.join(&*path);
        }
        for path in &mut run.eval_inputs {
            *path = base.join(&*path);
        }

        let mut techniques = Vec::new();
        for name in &run.techniques {
            let t: Technique = name.parse().map_err(|e| CliError::Input(format!("config: {e}")))?;
            if techniques.contains(&t) {
                return bad(format!("technique {t} listed twice"));
            }
            techniques.push(t);
        }
        if techniques.is_empty() {
            return bad("no techniques".into());
        }
        run.techniques = techniques.iter().map(|t| t.name().to_string()).collect();

        let levels: BTreeSet<Granularity> = run.granularities.iter().copied().collect();
        if levels.is_empty() || levels.len() != run.granularities.len() {
            return bad("granularities must be non-empty and distinct".into());
        }
        run.granularities = levels.into_iter().collect();

        run.k_values.sort_unstable();
        run.k_values.dedup();
        if run.k_values.is_empty() || run.k_values[0] == 0 {
            return bad("k_values must be non-empty and positive".into());
        }
        if !run.k_values.contains(&run.compare_k) {
            return bad(format!("compare_k {} is not one of k_values", run.compare_k));
        }
        if let Some(pin) = &run.tokenizer_version {
            if pin != TOKENIZER_VERSION {
                return bad(format!(
                    "tokenizer_version {pin} requested, this build has {TOKENIZER_VERSION}"
                ));
            }
        }

        let mut overrides = BTreeMap::new();
        for (name, o) in &run.overrides {
            let t: Technique = name.parse().map_err(|e| CliError::Input(format!("config overrides: {e}")))?;
            if overrides.insert(t, o.clone()).is_some() {
                return bad(format!("overrides for {t} given twice"));
            }
        }
        run.overrides = overrides.iter().map(|(t, o)| (t.name().to_string(), o.clone())).collect();
        let mut technique_configs = BTreeMap::new();
        for &t in &techniques {
            let config = match overrides.get(&t) {
                Some(o) => o.apply(preset(t)),
                None => preset(t),
            };
            config.validate().map_err(|e| CliError::Input(format!("config for {t}: {e}")))?;
            technique_configs.insert(t.name().to_string(), config);
        }

        Ok(Resolved { run, technique_configs, techniques })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn technique_config(&self, t: Technique) -> &TechniqueConfig {
        &self.technique_configs[t.name()]
    }

    /// The path, which must be configured and must exist.
    pub fn existing(&self, name: &str, path: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        let path = self.configured(name, path)?;
        if !path.exists() {
            return Err(CliError::Input(format!("{name} `{}` does not exist", path.display())));
        }
        Ok(path)
    }

    pub fn configured(&self, name: &str, path: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        path.clone()
            .ok_or_else(|| CliError::Input(format!("config: paths.{name} is not set")))
    }

    /// Repository searched at `granularity`.
    pub fn repo_for(&self, granularity: Granularity) -> Result<PathBuf, CliError> {
        match granularity {
            Granularity::File => self.existing("source_repo", &self.run.paths.source_repo),
            Granularity::Method => self.existing("transformed_repo", &self.run.paths.transformed_repo),
        }
    }

    pub fn output_dir(&self) -> Result<PathBuf, CliError> {
        self.configured("output_dir", &self.run.paths.output_dir)
    }
}
