//! Smoothed target encoding fitted on training rows only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Category `c` maps to `(n_c · mean_c + smoothing · prior) / (n_c + smoothing)`;
/// categories unseen at fit time map to `prior`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetEncoder {
    pub prior: f64,
    pub smoothing: f64,
    pub map: BTreeMap<String, f64>,
}

impl TargetEncoder {
    pub fn fit<S: AsRef<str>>(column: &[S], labels: &[bool], smoothing: f64) -> Result<Self> {
        if column.len() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: column.len(),
                got: labels.len(),
            });
        }
        if column.is_empty() {
            return Err(Error::Empty("target-encoding fit data"));
        }
        if !(smoothing >= 0.0) || !smoothing.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "smoothing must be finite and >= 0, got {smoothing}"
            )));
        }
        let positives = labels.iter().filter(|&&l| l).count();
        let prior = positives as f64 / labels.len() as f64;
        let mut stats: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        for (c, &l) in column.iter().zip(labels) {
            let e = stats.entry(c.as_ref()).or_default();
            e.0 += 1;
            e.1 += u64::from(l);
        }
        let map = stats
            .into_iter()
            .map(|(c, (n, pos))| {
                let n = n as f64;
                (
                    c.to_string(),
                    (pos as f64 + smoothing * prior) / (n + smoothing),
                )
            })
            .collect();
        Ok(Self {
            prior,
            smoothing,
            map,
        })
    }

    pub fn encode(&self, category: &str) -> f64 {
        self.map.get(category).copied().unwrap_or(self.prior)
    }

    pub fn transform<S: AsRef<str>>(&self, column: &[S]) -> Vec<f64> {
        column.iter().map(|c| self.encode(c.as_ref())).collect()
    }
}

/// Fits on `column`/`labels` and returns the encoded training column with the
/// fitted encoder.
pub fn target_encode<S: AsRef<str>>(
    column: &[S],
    labels: &[bool],
    smoothing: f64,
) -> Result<(Vec<f64>, TargetEncoder)> {
    let enc = TargetEncoder::fit(column, labels, smoothing)?;
    Ok((enc.transform(column), enc))
}
