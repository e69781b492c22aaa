//! Run configuration: one versioned TOML file, unknown keys rejected,
//! individual keys overridable with `--set section.key=value`.

use std::path::{Path, PathBuf};

use qae_core::ansatz::{AnsatzKind, AnsatzSpec, Entanglement};
use qae_core::cae::{Activation, CaeArch, CaeTrainConfig};
use qae_core::encode::{EncodingSpec, Technique};
use qae_core::features::{SelectionSpec, Strategy, DEFAULT_LABEL_COLUMN, DEFAULT_SMOOTHING, LABEL};
use qae_core::optim::AdamConfig;
use qae_core::qae::{ParamInit, QaeLayout, ScoreMode, TrainConfig};
use qae_core::rng::{self, derive_seed};
use qae_core::sim::NoiseModel;
use qae_core::synth::{Marginal, SyntheticSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Qae,
    Cae,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Root seed; every random stream is derived from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub qae: QaeConfig,
    #[serde(default)]
    pub cae: CaeConfig,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Feature-matrix CSV used by `train`.
    pub train: Option<PathBuf>,
    /// Feature-matrix CSV used by `eval` and `compare` when no path is given.
    pub test: Option<PathBuf>,
    pub label_column: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            train: None,
            test: None,
            label_column: LABEL.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    /// Raw-log column holding the 0/1 label for target encoding.
    pub label_column: String,
    pub smoothing: f64,
    pub max_rows: Option<usize>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            label_column: DEFAULT_LABEL_COLUMN.to_string(),
            smoothing: DEFAULT_SMOOTHING,
            max_rows: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionConfig {
    pub strategy: Strategy,
    pub k: usize,
    pub mi_bins: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        let s = SelectionSpec::new(Strategy::FirstN, 8);
        Self {
            strategy: s.strategy,
            k: s.k,
            mi_bins: s.mi_bins,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QaeConfig {
    pub technique: Technique,
    /// EfficientSU2 only; `None` picks the smallest register that fits.
    pub su2_qubits: Option<usize>,
    pub su2_reps: usize,
    pub su2_entanglement: Entanglement,
    pub ansatz: AnsatzKind,
    pub reps: usize,
    pub entanglement: Entanglement,
    /// `None` uses the per-encoding default.
    pub n_trash: Option<usize>,
    pub max_evals: usize,
    pub batch_size: usize,
    pub init: ParamInit,
    pub rho_begin: f64,
    pub rho_end: f64,
    /// `None` scores exactly; otherwise the SWAP test is sampled.
    pub shots: Option<u64>,
    pub readout_flip_prob: f64,
    pub depolarizing_prob: f64,
}

impl Default for QaeConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            technique: Technique::DenseAngle,
            su2_qubits: None,
            su2_reps: 1,
            su2_entanglement: Entanglement::ReverseLinear,
            ansatz: AnsatzKind::RealAmplitudes,
            reps: 1,
            entanglement: Entanglement::Linear,
            n_trash: None,
            max_evals: t.max_evals,
            batch_size: t.batch_size,
            init: t.init,
            rho_begin: t.rho_begin,
            rho_end: t.rho_end,
            shots: None,
            readout_flip_prob: 0.0,
            depolarizing_prob: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CaeConfig {
    /// Encoder widths, input first; `None` uses the default for the input width.
    pub encoder: Option<Vec<usize>>,
    pub activation: Activation,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub adam: AdamConfig,
}

impl Default for CaeConfig {
    fn default() -> Self {
        let t = CaeTrainConfig::default();
        Self {
            encoder: None,
            activation: Activation::default(),
            epochs: t.epochs,
            batch_size: t.batch_size,
            patience: t.patience,
            adam: t.adam,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n_train: usize,
    pub n_test_normal: usize,
    pub n_anomalous: usize,
    pub dimension: usize,
    pub mean: f64,
    pub scale: f64,
    pub correlation: f64,
    pub displacement: f64,
    pub marginal: Marginal,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let s = SyntheticSpec::default();
        Self {
            n_train: s.n_train,
            n_test_normal: s.n_test_normal,
            n_anomalous: s.n_anomalous,
            dimension: s.dimension,
            mean: s.mean,
            scale: s.scale,
            correlation: s.correlation,
            displacement: s.displacement,
            marginal: s.marginal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Histogram bins for the score distributions and the separation modes.
    pub bins: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            bins: qae_core::eval::DEFAULT_BINS,
        }
    }
}

/// The QAE pieces resolved against the selected feature count.
#[derive(Clone, Debug, PartialEq)]
pub struct QaeSetup {
    pub encoding: EncodingSpec,
    pub ansatz: AnsatzSpec,
    pub layout: QaeLayout,
    pub train: TrainConfig,
    /// Mode the threshold is calibrated in.
    pub calibration_mode: ScoreMode,
}

impl RunConfig {
    /// Reads `path` (or starts from defaults) and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => {
                let mut t = toml::Table::new();
                t.insert(
                    "version".into(),
                    toml::Value::Integer(CONFIG_VERSION.into()),
                );
                t
            }
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical JSON form, so formatting and key order in
    /// the source file do not matter.
    pub fn hash(&self) -> String {
        rng::sha256_hex(&serde_json::to_vec(self).expect("config serialises"))
    }

    /// Cross-module checks, run on every load.
    pub fn validate(&self) -> CliResult<()> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.selection.k == 0 {
            return Err(CliError::Config("selection.k must be at least 1".into()));
        }
        if self.eval.bins == 0 {
            return Err(CliError::Config("eval.bins must be at least 1".into()));
        }
        self.synthetic_spec().validate()?;
        match self.model {
            ModelKind::Qae => {
                self.qae_setup(self.selection.k)?;
            }
            ModelKind::Cae => {
                self.cae_arch(self.selection.k)?;
            }
        }
        Ok(())
    }

    pub fn selection_spec(&self) -> SelectionSpec {
        SelectionSpec {
            strategy: self.selection.strategy,
            k: self.selection.k,
            mi_bins: self.selection.mi_bins,
            seed: derive_seed(self.seed, "selection"),
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        let s = &self.synth;
        SyntheticSpec {
            n_train: s.n_train,
            n_test_normal: s.n_test_normal,
            n_anomalous: s.n_anomalous,
            dimension: s.dimension,
            mean: s.mean,
            scale: s.scale,
            correlation: s.correlation,
            displacement: s.displacement,
            marginal: s.marginal,
            seed: self.seed,
        }
    }

    pub fn noise(&self) -> CliResult<Option<NoiseModel>> {
        let q = &self.qae;
        let noise = NoiseModel::new(q.readout_flip_prob, q.depolarizing_prob)?;
        Ok((!noise.is_noiseless()).then_some(noise))
    }

    pub fn qae_setup(&self, n_features: usize) -> CliResult<QaeSetup> {
        let q = &self.qae;
        let encoding = match (q.technique, q.su2_qubits) {
            (Technique::EfficientSu2, Some(n)) => {
                EncodingSpec::efficient_su2(n_features, n, q.su2_reps, q.su2_entanglement)?
            }
            (Technique::EfficientSu2, None) => {
                // fewest qubits whose rotation slots hold every feature
                let n = n_features.div_ceil(2 * (q.su2_reps + 1));
                EncodingSpec::efficient_su2(n_features, n, q.su2_reps, q.su2_entanglement)?
            }
            (t, None) => EncodingSpec::new(t, n_features)?,
            (t, Some(_)) => {
                return Err(CliError::Config(format!(
                    "qae.su2_qubits only applies to efficient_su2, not {t:?}"
                )))
            }
        };
        let n = encoding.n_qubits();
        let ansatz = AnsatzSpec {
            kind: q.ansatz,
            n_qubits: n,
            reps: q.reps,
            entanglement: q.entanglement,
            seed: derive_seed(self.seed, "ansatz"),
        };
        ansatz.validate()?;
        let layout = match q.n_trash {
            Some(k) => QaeLayout::new(n, k)?,
            None => QaeLayout::default_for(&encoding)?,
        };
        let train = TrainConfig {
            max_evals: q.max_evals,
            batch_size: q.batch_size,
            seed: self.seed,
            init: q.init,
            rho_begin: q.rho_begin,
            rho_end: q.rho_end,
        };
        let noise = self.noise()?;
        let calibration_mode = match q.shots {
            None if noise.is_some() => {
                return Err(CliError::Config(
                    "noise parameters need qae.shots to be set".into(),
                ))
            }
            None => ScoreMode::Exact,
            Some(0) => return Err(CliError::Config("qae.shots must be at least 1".into())),
            Some(shots) => ScoreMode::Shots {
                shots,
                seed: derive_seed(self.seed, "sampling/train"),
                noise,
            },
        };
        // builds the whole circuit once so shape errors surface at load
        qae_core::qae::assemble_circuit::<f64>(&encoding, &ansatz, &layout)?;
        Ok(QaeSetup {
            encoding,
            ansatz,
            layout,
            train,
            calibration_mode,
        })
    }

    pub fn cae_arch(&self, n_features: usize) -> CliResult<CaeArch> {
        let arch = match &self.cae.encoder {
            Some(widths) => {
                if widths.first() != Some(&n_features) {
                    return Err(CliError::Config(format!(
                        "cae.encoder must start with the selected width {n_features}, got {widths:?}"
                    )));
                }
                CaeArch {
                    encoder: widths.clone(),
                    activation: self.cae.activation,
                    seed: self.seed,
                }
            }
            None => CaeArch {
                activation: self.cae.activation,
                seed: self.seed,
                ..CaeArch::default_for(n_features)?
            },
        };
        arch.validate()?;
        self.cae.adam.validate()?;
        Ok(arch)
    }

    pub fn cae_train_config(&self) -> CaeTrainConfig {
        CaeTrainConfig {
            epochs: self.cae.epochs,
            batch_size: self.cae.batch_size,
            patience: self.cae.patience,
            adam: self.cae.adam,
        }
    }
}

/// Applies `a.b.c=value`. The value is parsed as a TOML value and falls back
/// to a plain string, so `qae.technique=angle` needs no quotes.
fn apply_override(table: &mut toml::Table, assignment: &str) -> CliResult<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::Config(format!(
            "override `{assignment}` is not of the form key=value"
        ))
    })?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("bad override key `{path}`")));
    }
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let (last, parents) = keys.split_last().expect("non-empty");
    let mut cur = table;
    for k in parents {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{path}`: `{k}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::load(None, &[]).unwrap();
        assert_eq!(cfg.qae.max_evals, 60);
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("version = 1\nsede = 3\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        let err = RunConfig::load(None, &["qae.shotz=10".into()]).unwrap_err();
        assert!(err.to_string().contains("shotz"), "{err}");
    }

    #[test]
    fn overrides_parse_values_and_bare_strings() {
        let cfg = RunConfig::load(
            None,
            &[
                "seed=7".into(),
                "qae.technique=angle".into(),
                "qae.shots=100".into(),
                "selection.k=4".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.qae.technique, Technique::Angle);
        assert_eq!(cfg.qae.shots, Some(100));
        assert_ne!(cfg.hash(), RunConfig::load(None, &[]).unwrap().hash());
    }

    #[test]
    fn cross_module_constraints_checked_at_load() {
        // more trash qubits than the 4 data qubits
        assert!(RunConfig::load(None, &["qae.n_trash=5".into()]).is_err());
        assert!(RunConfig::load(None, &["qae.readout_flip_prob=0.1".into()]).is_err());
        assert!(RunConfig::load(None, &["version=2".into()]).is_err());
        assert!(RunConfig::load(None, &["model=cae".into(), "cae.encoder=[6, 3]".into()]).is_err());
        let ok = RunConfig::load(
            None,
            &["qae.readout_flip_prob=0.1".into(), "qae.shots=64".into()],
        )
        .unwrap();
        assert!(ok.qae_setup(8).unwrap().calibration_mode.is_noisy());
    }
}
