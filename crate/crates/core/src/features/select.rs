//! Column statistics and the feature-selection strategies.

use serde::{Deserialize, Serialize};

use super::beth::FeatureMatrix;
use super::linalg::symmetric_eigen;
use crate::cae::{cae_latent, cae_train, CaeArch, CaeModel, CaeTrainConfig, Standardizer};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    FirstN,
    AeLatent,
    PcaReduce,
    PcaFilter,
    MutualInfo,
    Anova,
    Kendall,
    LeastCorrelated,
    VarianceBalanced,
    HighestVariance,
}

impl Strategy {
    pub const ALL: [Strategy; 10] = [
        Strategy::FirstN,
        Strategy::AeLatent,
        Strategy::PcaReduce,
        Strategy::PcaFilter,
        Strategy::MutualInfo,
        Strategy::Anova,
        Strategy::Kendall,
        Strategy::LeastCorrelated,
        Strategy::VarianceBalanced,
        Strategy::HighestVariance,
    ];

    pub fn needs_labels(self) -> bool {
        matches!(
            self,
            Strategy::MutualInfo | Strategy::Anova | Strategy::Kendall
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSpec {
    pub strategy: Strategy,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Equal-width bins for mutual information.
    #[serde(default = "default_mi_bins")]
    pub mi_bins: usize,
    /// Seed for the autoencoder behind `AeLatent`.
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    8
}

fn default_mi_bins() -> usize {
    16
}

impl SelectionSpec {
    pub fn new(strategy: Strategy, k: usize) -> Self {
        Self {
            strategy,
            k,
            mi_bins: default_mi_bins(),
            seed: 0,
        }
    }
}

/// Learned projection replacing the raw columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projection {
    /// `(x - mean) · components[i]` for each retained component.
    Pca {
        mean: Vec<f64>,
        components: Vec<Vec<f64>>,
        eigenvalues: Vec<f64>,
    },
    AeLatent {
        standardizer: Standardizer<f64>,
        model: CaeModel<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub spec: SelectionSpec,
    /// Chosen original columns, in selection order. Empty for projections.
    pub columns: Vec<usize>,
    pub projection: Option<Projection>,
    /// Output column names.
    pub names: Vec<String>,
}

impl Selection {
    pub fn output_width(&self) -> usize {
        self.names.len()
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        match &self.projection {
            None => self
                .columns
                .iter()
                .map(|&j| {
                    row.get(j).copied().ok_or(Error::LengthMismatch {
                        expected: j + 1,
                        got: row.len(),
                    })
                })
                .collect(),
            Some(Projection::Pca {
                mean, components, ..
            }) => {
                if row.len() != mean.len() {
                    return Err(Error::LengthMismatch {
                        expected: mean.len(),
                        got: row.len(),
                    });
                }
                Ok(components
                    .iter()
                    .map(|v| {
                        v.iter()
                            .zip(row.iter().zip(mean))
                            .map(|(c, (x, m))| c * (x - m))
                            .sum()
                    })
                    .collect())
            }
            Some(Projection::AeLatent {
                standardizer,
                model,
            }) => {
                let z = standardizer.transform_row(row)?;
                Ok(cae_latent(model, &[z])?.remove(0))
            }
        }
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub mean_variance: f64,
    /// Population standard deviation of the per-column variances.
    pub std_variance: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n)
}

pub fn feature_stats(matrix: &FeatureMatrix) -> Vec<ColumnStats> {
    (0..matrix.n_columns())
        .map(|j| {
            let (mean, variance) = mean_var(&matrix.column(j));
            ColumnStats {
                name: matrix.columns[j].clone(),
                mean,
                variance,
            }
        })
        .collect()
}

/// μ and σ of the variances of `columns`.
pub fn group_stats(stats: &[ColumnStats], columns: &[usize]) -> GroupStats {
    let v: Vec<f64> = columns.iter().map(|&j| stats[j].variance).collect();
    let (m, var) = mean_var(&v);
    GroupStats {
        mean_variance: m,
        std_variance: var.sqrt(),
    }
}

/// Indices of the `k` largest scores; NaN ranks last, ties by lower index.
fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    let key = |s: f64| if s.is_nan() { f64::NEG_INFINITY } else { s };
    idx.sort_by(|&a, &b| key(scores[b]).total_cmp(&key(scores[a])).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Mutual information (nats) between an equal-width binned column and a
/// binary label.
pub fn mutual_information(x: &[f64], labels: &[bool], bins: usize) -> f64 {
    let n = x.len() as f64;
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    if !(hi > lo) || bins == 0 {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut joint = vec![[0u64; 2]; bins];
    for (&v, &l) in x.iter().zip(labels) {
        let b = (((v - lo) / width).floor() as usize).min(bins - 1);
        joint[b][usize::from(l)] += 1;
    }
    let py = [0, 1].map(|c| joint.iter().map(|j| j[c]).sum::<u64>() as f64 / n);
    let mut mi = 0.0;
    for j in &joint {
        let pb = (j[0] + j[1]) as f64 / n;
        for c in 0..2 {
            let pj = j[c] as f64 / n;
            if pj > 0.0 {
                mi += pj * (pj / (pb * py[c])).ln();
            }
        }
    }
    mi
}

/// One-way ANOVA F statistic of `x` grouped by the binary label.
pub fn anova_f(x: &[f64], labels: &[bool]) -> f64 {
    let groups: [Vec<f64>; 2] = [false, true].map(|c| {
        x.iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(&v, _)| v)
            .collect()
    });
    let n = x.len() as f64;
    if groups.iter().any(Vec::is_empty) || n < 3.0 {
        return f64::NAN;
    }
    let grand = x.iter().sum::<f64>() / n;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in &groups {
        let (m, var) = mean_var(g);
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += var * g.len() as f64;
    }
    let (df_b, df_w) = (1.0, n - 2.0);
    if ssw == 0.0 {
        return if ssb > 0.0 { f64::INFINITY } else { f64::NAN };
    }
    (ssb / df_b) / (ssw / df_w)
}

/// Kendall tau-b between `x` and a binary label. Pairs with equal labels are
/// tied in the label, so only cross-label pairs can be (dis)concordant and
/// these are counted by sorting.
pub fn kendall_tau_b(x: &[f64], labels: &[bool]) -> f64 {
    let n = x.len() as f64;
    let total = n * (n - 1.0) / 2.0;
    let n1 = labels.iter().filter(|&&l| l).count() as f64;
    let n0 = n - n1;
    let ties_y = n1 * (n1 - 1.0) / 2.0 + n0 * (n0 - 1.0) / 2.0;

    let mut sorted: Vec<(f64, bool)> = x.iter().copied().zip(labels.iter().copied()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ties_x = 0.0;
    let (mut concordant, mut discordant) = (0.0, 0.0);
    // negatives and positives strictly below the current tie group
    let (mut below0, mut below1) = (0.0, 0.0);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        ties_x += t * (t - 1.0) / 2.0;
        let g1 = sorted[i..j].iter().filter(|p| p.1).count() as f64;
        let g0 = t - g1;
        concordant += g1 * below0;
        discordant += g0 * below1;
        below0 += g0;
        below1 += g1;
        i = j;
    }
    let denom = ((total - ties_x) * (total - ties_y)).sqrt();
    if denom == 0.0 {
        return f64::NAN;
    }
    (concordant - discordant) / denom
}

/// Pearson correlation; `None` when either column is constant.
fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    let cov = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / a.len() as f64;
    Some((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Greedy: start from the column with the lowest mean |correlation| to the
/// rest, then repeatedly add the column whose worst |correlation| with the
/// chosen set is smallest. Constant columns count as fully correlated.
fn least_correlated(cols: &[Vec<f64>], k: usize) -> Vec<usize> {
    let d = cols.len();
    let mut abs_corr = vec![vec![1.0; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let c = correlation(&cols[i], &cols[j]).map_or(1.0, f64::abs);
            abs_corr[i][j] = c;
            abs_corr[j][i] = c;
        }
    }
    let mean_abs: Vec<f64> = (0..d)
        .map(|i| {
            (0..d)
                .filter(|&j| j != i)
                .map(|j| abs_corr[i][j])
                .sum::<f64>()
                / (d.max(2) - 1) as f64
        })
        .collect();
    let mut chosen = top_k(&mean_abs.iter().map(|v| -v).collect::<Vec<_>>(), 1);
    while chosen.len() < k {
        let worst: Vec<f64> = (0..d)
            .map(|j| {
                if chosen.contains(&j) {
                    f64::NAN
                } else {
                    -chosen.iter().map(|&c| abs_corr[c][j]).fold(0.0, f64::max)
                }
            })
            .collect();
        chosen.push(top_k(&worst, 1)[0]);
    }
    chosen
}

/// Quotas for the low / middle / high variance thirds: a quarter of `k` each
/// from the outer groups (at least one when `k >= 3`), the rest from the
/// middle. Gives 2 + 4 + 2 for `k = 8`.
fn variance_quotas(k: usize) -> (usize, usize, usize) {
    let outer = if k >= 3 {
        ((k as f64) / 4.0).round().max(1.0) as usize
    } else {
        0
    };
    (outer, k - 2 * outer, outer)
}

/// Sorts columns by variance, splits them into thirds and takes the
/// highest-variance members of each third according to the quotas. Quota a
/// group cannot fill spills into the middle group, then the others.
fn variance_balanced(variances: &[f64], k: usize) -> Vec<usize> {
    let d = variances.len();
    let mut asc: Vec<usize> = (0..d).collect();
    asc.sort_by(|&a, &b| variances[a].total_cmp(&variances[b]).then(a.cmp(&b)));
    let third = d / 3;
    let groups = [&asc[..third], &asc[third..d - third], &asc[d - third..]];
    let (ql, qm, qh) = variance_quotas(k);
    let mut quotas = [ql, qm, qh];
    for g in [0, 2] {
        let excess = quotas[g].saturating_sub(groups[g].len());
        quotas[g] -= excess;
        quotas[1] += excess;
    }
    let mut chosen = Vec::with_capacity(k);
    let mut leftovers = Vec::new();
    for (g, &q) in groups.iter().zip(&quotas) {
        let take = q.min(g.len());
        chosen.extend(g.iter().rev().take(take));
        leftovers.extend(g.iter().rev().skip(take));
    }
    let short = k - chosen.len();
    chosen.extend(top_k(
        &(0..d)
            .map(|j| {
                if leftovers.contains(&j) {
                    variances[j]
                } else {
                    f64::NAN
                }
            })
            .collect::<Vec<_>>(),
        short,
    ));
    chosen
}

fn covariance(rows: &[Vec<f64>], d: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            let di = r[i] - mean[i];
            for j in i..d {
                cov[i][j] += di * (r[j] - mean[j]) / n;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[i][j] = cov[j][i];
        }
    }
    (mean, cov)
}

fn non_constant(stats: &[ColumnStats]) -> usize {
    stats.iter().filter(|s| s.variance > 0.0).count()
}

/// Column means, eigenvalues (descending) and matching eigenvectors.
type PcaFit = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

pub fn select_features(matrix: &FeatureMatrix, spec: &SelectionSpec) -> Result<Selection> {
    let d = matrix.n_columns();
    let k = spec.k;
    if k == 0 || k > d {
        return Err(Error::InvalidSpec(format!(
            "cannot select {k} of {d} columns"
        )));
    }
    if matrix.rows.is_empty() {
        return Err(Error::Empty("feature matrix"));
    }
    let cols: Vec<Vec<f64>> = (0..d).map(|j| matrix.column(j)).collect();
    let stats = feature_stats(matrix);
    let labels = || -> Result<&Vec<bool>> {
        let l = matrix
            .labels
            .as_ref()
            .ok_or_else(|| Error::InvalidSpec(format!("{:?} needs labels", spec.strategy)))?;
        if l.iter().all(|&x| x) || l.iter().all(|&x| !x) {
            return Err(Error::Degenerate(format!(
                "{:?} needs both label classes",
                spec.strategy
            )));
        }
        Ok(l)
    };
    let by_columns = |columns: Vec<usize>| Selection {
        spec: spec.clone(),
        names: columns.iter().map(|&j| matrix.columns[j].clone()).collect(),
        columns,
        projection: None,
    };
    let pca = || -> Result<PcaFit> {
        if non_constant(&stats) < k {
            return Err(Error::Degenerate(format!(
                "PCA needs at least {k} non-constant columns, found {}",
                non_constant(&stats)
            )));
        }
        let (mean, cov) = covariance(&matrix.rows, d);
        let (vals, vecs) = symmetric_eigen(&cov)?;
        Ok((mean, vals, vecs))
    };

    Ok(match spec.strategy {
        Strategy::FirstN => by_columns((0..k).collect()),
        Strategy::HighestVariance => by_columns(top_k(
            &stats.iter().map(|s| s.variance).collect::<Vec<_>>(),
            k,
        )),
        Strategy::VarianceBalanced => by_columns(variance_balanced(
            &stats.iter().map(|s| s.variance).collect::<Vec<_>>(),
            k,
        )),
        Strategy::LeastCorrelated => by_columns(least_correlated(&cols, k)),
        Strategy::MutualInfo => {
            let l = labels()?;
            let s: Vec<f64> = cols
                .iter()
                .map(|c| mutual_information(c, l, spec.mi_bins))
                .collect();
            by_columns(top_k(&s, k))
        }
        Strategy::Anova => {
            let l = labels()?;
            by_columns(top_k(
                &cols.iter().map(|c| anova_f(c, l)).collect::<Vec<_>>(),
                k,
            ))
        }
        Strategy::Kendall => {
            let l = labels()?;
            let s: Vec<f64> = cols.iter().map(|c| kendall_tau_b(c, l).abs()).collect();
            by_columns(top_k(&s, k))
        }
        Strategy::PcaFilter => {
            let (_, vals, vecs) = pca()?;
            let score: Vec<f64> = (0..d)
                .map(|j| {
                    (0..k)
                        .map(|i| vecs[i][j].abs() * vals[i].max(0.0).sqrt())
                        .sum()
                })
                .collect();
            by_columns(top_k(&score, k))
        }
        Strategy::PcaReduce => {
            let (mean, vals, vecs) = pca()?;
            Selection {
                spec: spec.clone(),
                columns: Vec::new(),
                names: (1..=k).map(|i| format!("pc{i}")).collect(),
                projection: Some(Projection::Pca {
                    mean,
                    components: vecs[..k].to_vec(),
                    eigenvalues: vals[..k].to_vec(),
                }),
            }
        }
        Strategy::AeLatent => {
            if k >= d {
                return Err(Error::InvalidSpec(
                    "autoencoder latent width must be below the column count".into(),
                ));
            }
            let standardizer = Standardizer::fit(&matrix.rows)?;
            let z = standardizer.transform(&matrix.rows)?;
            let mut encoder = vec![d];
            if (d + k) / 2 > k && (d + k) / 2 < d {
                encoder.push((d + k) / 2);
            }
            encoder.push(k);
            let arch = CaeArch {
                encoder,
                seed: spec.seed,
                ..CaeArch::default_for(d)?
            };
            let model = cae_train(&z, &arch, &CaeTrainConfig::default())?;
            Selection {
                spec: spec.clone(),
                columns: Vec::new(),
                names: (1..=k).map(|i| format!("latent{i}")).collect(),
                projection: Some(Projection::AeLatent {
                    standardizer,
                    model,
                }),
            }
        }
    })
}
