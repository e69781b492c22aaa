//! Decision threshold, confusion metrics, AUROC, separation and score
//! histograms. The anomalous class is the positive class throughout.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean, population_variance, Scalar};

/// Bins used for mode estimation and histogram export.
pub const DEFAULT_BINS: usize = 100;

/// `mean + 2σ` with the population standard deviation. Shared by both models.
pub fn threshold<T: Scalar>(train_scores: &[T]) -> Result<T> {
    if train_scores.is_empty() {
        return Err(Error::Empty("calibration scores"));
    }
    check_finite(train_scores)?;
    Ok(mean(train_scores) + T::of(2.0) * population_variance(train_scores).sqrt())
}

fn check_finite<T: Scalar>(scores: &[T]) -> Result<()> {
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("score".into()));
    }
    Ok(())
}

fn check_labels<T>(scores: &[T], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::Empty("scores"));
    }
    Ok(())
}

/// Conditions under which a metric was reported as 0 by convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFlag {
    /// Labels contain only one class.
    SingleClass,
    /// No positive predictions.
    PrecisionUndefined,
    /// No positive labels.
    RecallUndefined,
    /// Precision and recall are both zero.
    F1Undefined,
    /// Mode of the anomaly scores is zero, so separation has no value.
    SeparationUndefined,
    NoAnomalies,
    NoNormals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub flags: Vec<MetricFlag>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Confusion table with `score > threshold` as the anomalous prediction.
pub fn confusion_metrics<T: Scalar>(
    scores: &[T],
    labels: &[bool],
    threshold: T,
) -> Result<Confusion> {
    check_labels(scores, labels)?;
    check_finite(scores)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s > threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let mut flags = Vec::new();
    if tp + fn_ == 0 || tn + fp == 0 {
        flags.push(MetricFlag::SingleClass);
    }
    let precision = ratio(tp, tp + fp).unwrap_or_else(|| {
        flags.push(MetricFlag::PrecisionUndefined);
        0.0
    });
    let recall = ratio(tp, tp + fn_).unwrap_or_else(|| {
        flags.push(MetricFlag::RecallUndefined);
        0.0
    });
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        flags.push(MetricFlag::F1Undefined);
        0.0
    };
    let accuracy = (tp + tn) as f64 / scores.len() as f64;
    Ok(Confusion {
        tp,
        fp,
        tn,
        fn_,
        precision,
        recall,
        f1,
        accuracy,
        flags,
    })
}

/// Mann-Whitney AUROC with midranks for ties. Needs both classes.
pub fn auroc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<f64> {
    check_labels(scores, labels)?;
    check_finite(scores)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Degenerate("AUROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite"));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their average
        let midrank = (i + j + 2) as f64 / 2.0;
        let pos_in_group = order[i..=j].iter().filter(|&&k| labels[k]).count();
        rank_sum_pos += midrank * pos_in_group as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Equal-width bins over `[0, max]`. A score equal to `max` goes to the last
/// bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub normal: Vec<u64>,
    pub anomalous: Vec<u64>,
}

impl Histogram {
    pub fn new<T: Scalar>(normal: &[T], anomalous: &[T], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidSpec(
                "histogram needs at least one bin".into(),
            ));
        }
        check_finite(normal)?;
        check_finite(anomalous)?;
        let all = normal.iter().chain(anomalous).map(|s| s.as_f64());
        let mut hi = 0.0f64;
        for s in all {
            if s < 0.0 {
                return Err(Error::InvalidSpec(format!("negative score {s}")));
            }
            hi = hi.max(s);
        }
        let width = hi / bins as f64;
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let count = |xs: &[T]| {
            let mut c = vec![0u64; bins];
            for s in xs {
                c[bin_of(s.as_f64(), width, bins)] += 1;
            }
            c
        };
        Ok(Self {
            edges,
            normal: count(normal),
            anomalous: count(anomalous),
        })
    }

    pub fn bins(&self) -> usize {
        self.normal.len()
    }

    fn centre(&self, bin: usize) -> f64 {
        0.5 * (self.edges[bin] + self.edges[bin + 1])
    }

    /// `bin_lo,bin_hi,count_normal,count_anomalous`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "count_normal", "count_anomalous"])?;
        for i in 0..self.bins() {
            w.write_record([
                self.edges[i].to_string(),
                self.edges[i + 1].to_string(),
                self.normal[i].to_string(),
                self.anomalous[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(input);
        let mut edges = Vec::new();
        let mut normal = Vec::new();
        let mut anomalous = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<&str> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("histogram row has {} fields", rec.len())))
            };
            let num = |i: usize| -> Result<f64> {
                field(i)?
                    .parse()
                    .map_err(|e| Error::Parse(format!("histogram edge: {e}")))
            };
            let cnt = |i: usize| -> Result<u64> {
                field(i)?
                    .parse()
                    .map_err(|e| Error::Parse(format!("histogram count: {e}")))
            };
            if edges.is_empty() {
                edges.push(num(0)?);
            }
            edges.push(num(1)?);
            normal.push(cnt(2)?);
            anomalous.push(cnt(3)?);
        }
        if normal.is_empty() {
            return Err(Error::Empty("histogram file"));
        }
        Ok(Self {
            edges,
            normal,
            anomalous,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn bin_of(s: f64, width: f64, bins: usize) -> usize {
    if width <= 0.0 {
        return 0;
    }
    ((s / width).floor() as usize).min(bins - 1)
}

/// First bin with the highest count.
fn mode_bin(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub mode_normal: f64,
    pub mode_anomalous: f64,
    /// `(mode_anomalous - mode_normal) / mode_anomalous`; `None` when the
    /// anomaly mode is zero.
    pub value: Option<f64>,
}

pub fn separation_from_modes(mode_normal: f64, mode_anomalous: f64) -> Option<f64> {
    (mode_anomalous != 0.0).then(|| (mode_anomalous - mode_normal) / mode_anomalous)
}

/// Modes are bin centres of a shared `bins`-bin histogram over `[0, max]`.
pub fn separation<T: Scalar>(normal: &[T], anomalous: &[T], bins: usize) -> Result<Separation> {
    if normal.is_empty() || anomalous.is_empty() {
        return Err(Error::Empty("separation needs scores for both classes"));
    }
    let h = Histogram::new(normal, anomalous, bins)?;
    let mode_normal = h.centre(mode_bin(&h.normal));
    let mode_anomalous = h.centre(mode_bin(&h.anomalous));
    Ok(Separation {
        mode_normal,
        mode_anomalous,
        value: separation_from_modes(mode_normal, mode_anomalous),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_samples: u64,
    pub threshold: f64,
    #[serde(flatten)]
    pub confusion: Confusion,
    pub auroc: Option<f64>,
    pub separation: Option<Separation>,
    pub histogram: Histogram,
}

impl EvalReport {
    pub fn f1(&self) -> f64 {
        self.confusion.f1
    }

    pub fn separation_value(&self) -> Option<f64> {
        self.separation.as_ref().and_then(|s| s.value)
    }

    pub fn flags(&self) -> &[MetricFlag] {
        &self.confusion.flags
    }
}

/// Full report for one model's test scores.
pub fn evaluate<T: Scalar>(
    scores: &[T],
    labels: &[bool],
    threshold: T,
    bins: usize,
) -> Result<EvalReport> {
    let mut confusion = confusion_metrics(scores, labels, threshold)?;
    let normal: Vec<T> = select(scores, labels, false);
    let anomalous: Vec<T> = select(scores, labels, true);
    if anomalous.is_empty() {
        confusion.flags.push(MetricFlag::NoAnomalies);
    }
    if normal.is_empty() {
        confusion.flags.push(MetricFlag::NoNormals);
    }
    let both = !normal.is_empty() && !anomalous.is_empty();
    let auroc = if both {
        Some(auroc(scores, labels)?)
    } else {
        None
    };
    let separation = if both {
        let s = separation(&normal, &anomalous, bins)?;
        if s.value.is_none() {
            confusion.flags.push(MetricFlag::SeparationUndefined);
        }
        Some(s)
    } else {
        None
    };
    Ok(EvalReport {
        n_samples: scores.len() as u64,
        threshold: threshold.as_f64(),
        confusion,
        auroc,
        separation,
        histogram: Histogram::new(&normal, &anomalous, bins)?,
    })
}

fn select<T: Scalar>(scores: &[T], labels: &[bool], class: bool) -> Vec<T> {
    scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == class)
        .map(|(&s, _)| s)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn threshold_cases() {
        assert_eq!(threshold(&[0.2, 0.2]).unwrap(), 0.2);
        assert_eq!(threshold(&[0.0, 1.0]).unwrap(), 1.5);
        assert!(threshold::<f64>(&[]).is_err());
        assert!(threshold(&[f64::NAN]).is_err());
    }

    #[test]
    fn hand_confusion_case() {
        let c =
            confusion_metrics(&[0.1, 0.2, 0.8, 0.3], &[false, false, true, true], 0.25).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (2, 0, 2, 0));
        assert_eq!(c.f1, 1.0);
        assert_eq!(c.accuracy, 1.0);
        assert!(c.flags.is_empty());
    }

    #[test]
    fn all_normal_predictions_flagged() {
        let c = confusion_metrics(&[0.1, 0.2, 0.3], &[false, true, true], 0.5).unwrap();
        assert_eq!(c.recall, 0.0);
        assert_eq!(c.f1, 0.0);
        assert!(c.flags.contains(&MetricFlag::PrecisionUndefined));
        assert!(c.flags.contains(&MetricFlag::F1Undefined));
    }

    #[test]
    fn score_at_threshold_is_normal() {
        let c = confusion_metrics(&[0.5], &[true], 0.5).unwrap();
        assert_eq!(c.fn_, 1);
    }

    #[test]
    fn auroc_extremes() {
        assert_eq!(
            auroc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(),
            1.0
        );
        assert_eq!(
            auroc(&[0.9, 0.8, 0.2, 0.1], &[false, false, true, true]).unwrap(),
            0.0
        );
        assert_eq!(
            auroc(&[0.4; 6], &[false, true, false, true, true, false]).unwrap(),
            0.5
        );
        assert!(auroc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn separation_examples() {
        assert_eq!(separation_from_modes(0.4, 0.4), Some(0.0));
        assert_abs_diff_eq!(
            separation_from_modes(0.03, 1.0).unwrap(),
            0.97,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            separation_from_modes(0.16, 1.0).unwrap(),
            0.84,
            epsilon = 1e-15
        );
        assert_eq!(separation_from_modes(0.1, 0.0), None);
    }

    #[test]
    fn separation_from_scores() {
        // max 1.0, width 0.01: normals pile into bin 3, anomalies into bin 99
        let normal = [0.031, 0.032, 0.035, 0.5];
        let anomalous = [1.0, 0.995, 0.991, 0.2];
        let s = separation(&normal, &anomalous, 100).unwrap();
        assert_abs_diff_eq!(s.mode_normal, 0.035, epsilon = 1e-12);
        assert_abs_diff_eq!(s.mode_anomalous, 0.995, epsilon = 1e-12);
        let same = separation(&[0.5, 0.5], &[0.5, 1.0], 100).unwrap();
        assert_eq!(same.value, Some(0.0));
        let zero = separation(&[0.0], &[0.0], 10).unwrap();
        assert_eq!(zero.value, None);
    }

    #[test]
    fn mode_ties_go_low() {
        let s = separation(&[0.05, 0.85], &[0.55, 0.95, 1.0], 10).unwrap();
        assert_abs_diff_eq!(s.mode_normal, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(s.mode_anomalous, 0.95, epsilon = 1e-12);
    }

    #[test]
    fn histogram_round_trip() {
        let h = Histogram::new(&[0.2, 0.31], &[0.9], 10).unwrap();
        assert_eq!(h.normal.iter().filter(|&&c| c > 0).count(), 2);
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert!(
            String::from_utf8_lossy(&buf).starts_with("bin_lo,bin_hi,count_normal,count_anomalous")
        );
        assert_eq!(Histogram::read_csv(buf.as_slice()).unwrap(), h);
        let one_each = Histogram::new(&[0.1], &[0.7], 100).unwrap();
        let nonzero = one_each
            .normal
            .iter()
            .zip(&one_each.anomalous)
            .filter(|(a, b)| **a + **b > 0)
            .count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn report_without_anomalies_is_flagged() {
        let r = evaluate(&[0.1, 0.2], &[false, false], 0.5, 10).unwrap();
        assert!(r.flags().contains(&MetricFlag::NoAnomalies));
        assert!(r.histogram.anomalous.iter().all(|&c| c == 0));
        assert_eq!(r.auroc, None);
        let c = &r.confusion;
        assert_eq!(c.tp + c.fp + c.tn + c.fn_, r.n_samples);
    }
}
