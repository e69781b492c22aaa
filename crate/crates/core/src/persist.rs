//! Versioned JSON model files.
//!
//! A model file carries everything needed to score raw feature rows: the
//! column selection, the fitted scaler, the trained detector and its
//! calibrated threshold, plus the hash of the run configuration and the root
//! seed. Floats are written in shortest round-trip form, so a reloaded model
//! scores bit-identically.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cae::{cae_scores, CaeModel, Standardizer};
use crate::encode::FeatureScaler;
use crate::error::{Error, Result};
use crate::features::Selection;
use crate::qae::{score_samples, QaeModel, ScoreMode};
use crate::scalar::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detector<T> {
    Qae {
        scaler: FeatureScaler<T>,
        /// Mode the threshold was calibrated under; scoring reuses it.
        score_mode: ScoreMode,
        model: QaeModel<T>,
    },
    Cae {
        standardizer: Standardizer<T>,
        model: CaeModel<T>,
    },
}

impl<T: Scalar> Detector<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::Qae { .. } => "qae",
            Detector::Cae { .. } => "cae",
        }
    }

    pub fn threshold(&self) -> Option<T> {
        match self {
            Detector::Qae { model, .. } => model.threshold,
            Detector::Cae { model, .. } => model.threshold,
        }
    }

    pub fn n_inputs(&self) -> usize {
        match self {
            Detector::Qae { scaler, .. } => scaler.n_features(),
            Detector::Cae { standardizer, .. } => standardizer.mean.len(),
        }
    }

    /// Mode scores are computed in; always exact for the CAE.
    pub fn score_mode(&self) -> ScoreMode {
        match self {
            Detector::Qae { score_mode, .. } => score_mode.clone(),
            Detector::Cae { .. } => ScoreMode::Exact,
        }
    }

    /// Scores rows that have already passed column selection.
    pub fn score(&self, rows: &[Vec<T>]) -> Result<Vec<T>> {
        self.score_in(rows, &self.score_mode())
    }

    /// As [`Detector::score`] but with an explicit QAE score mode.
    pub fn score_in(&self, rows: &[Vec<T>], mode: &ScoreMode) -> Result<Vec<T>> {
        match self {
            Detector::Qae { scaler, model, .. } => {
                let scaled = scaler.transform(rows)?;
                Ok(score_samples(model, &scaled, mode)?
                    .into_iter()
                    .map(|r| r.anomaly)
                    .collect())
            }
            Detector::Cae {
                standardizer,
                model,
            } => cae_scores(model, &standardizer.transform(rows)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(deny_unknown_fields)]
pub struct ModelFile<T> {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    /// SHA-256 of the training file, when the model came from one.
    #[serde(default)]
    pub train_sha256: Option<String>,
    /// Column names of the feature matrix the model was trained on.
    pub input_columns: Vec<String>,
    pub selection: Selection,
    pub detector: Detector<T>,
}

impl<T: Scalar> ModelFile<T> {
    pub fn new(
        config_hash: String,
        seed: u64,
        input_columns: Vec<String>,
        selection: Selection,
        detector: Detector<T>,
    ) -> Self {
        Self {
            version: MODEL_FORMAT_VERSION,
            config_hash,
            seed,
            train_sha256: None,
            input_columns,
            selection,
            detector,
        }
    }

    /// Selection then detector scoring of raw feature rows.
    pub fn score(&self, rows: &[Vec<f64>]) -> Result<Vec<T>> {
        self.score_in(rows, &self.detector.score_mode())
    }

    /// Shot-based scoring of a split other than the calibration one should
    /// use a fresh seed via [`ScoreMode::reseeded`].
    pub fn score_in(&self, rows: &[Vec<f64>], mode: &ScoreMode) -> Result<Vec<T>> {
        if let Some(r) = rows.iter().find(|r| r.len() != self.input_columns.len()) {
            return Err(Error::LengthMismatch {
                expected: self.input_columns.len(),
                got: r.len(),
            });
        }
        let selected: Vec<Vec<T>> = self
            .selection
            .apply(rows)?
            .into_iter()
            .map(|r| r.into_iter().map(T::of).collect())
            .collect();
        self.detector.score_in(&selected, mode)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // check the version before the full schema so old files fail clearly
        #[derive(Deserialize)]
        struct Probe {
            version: u32,
        }
        let probe: Probe = serde_json::from_str(text)?;
        if probe.version != MODEL_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(probe.version));
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        out.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn read_from(mut input: impl Read) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
