//! Kernel-event log ingestion and the 24-column transformation.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::pyliteral::{self, PyValue};
use super::target::TargetEncoder;
use crate::error::{Error, Result};

/// Output columns in order. Raw columns keep their source order; the
/// flattened args follow slot-major (`args_1_name`, `args_1_type`, …).
pub const FEATURE_NAMES: [&str; 24] = [
    "processId",
    "threadId",
    "parentProcessId",
    "userId",
    "mountNamespace",
    "processName",
    "eventId",
    "argsNum",
    "returnValue",
    "args_1_name",
    "args_1_type",
    "args_1_value",
    "args_2_name",
    "args_2_type",
    "args_2_value",
    "args_3_name",
    "args_3_type",
    "args_3_value",
    "args_4_name",
    "args_4_type",
    "args_4_value",
    "args_5_name",
    "args_5_type",
    "args_5_value",
];

pub const MAX_ARGS: usize = 5;
/// Category used for empty argument slots.
pub const ABSENT: &str = "ABSENT";
pub const DEFAULT_LABEL_COLUMN: &str = "sus";
pub const DEFAULT_SMOOTHING: f64 = 10.0;
const HOST_MOUNT_NAMESPACE: i64 = 4_026_531_840;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgRecord {
    pub name: String,
    pub type_name: String,
    pub value: String,
}

/// One event with only the fields the transformation reads.
#[derive(Clone, Debug, PartialEq)]
pub struct RawEvent {
    pub process_id: i64,
    pub thread_id: String,
    pub parent_process_id: i64,
    pub user_id: i64,
    pub mount_namespace: i64,
    pub process_name: String,
    pub event_id: String,
    pub args_num: f64,
    pub return_value: i64,
    pub args: Vec<ArgRecord>,
    pub label: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawEventTable {
    pub rows: Vec<RawEvent>,
}

impl RawEventTable {
    pub fn labels(&self) -> Option<Vec<bool>> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Reads a CSV with a header row. `label_column` is optional in the file;
    /// when present every row must carry a 0/1 value.
    pub fn read_csv<R: Read>(
        input: R,
        label_column: &str,
        max_rows: Option<usize>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(input);
        let headers = rdr.headers()?.clone();
        let find = |names: &[&str]| -> Result<usize> {
            names
                .iter()
                .find_map(|n| headers.iter().position(|h| h.trim() == *n))
                .ok_or_else(|| Error::MissingColumn(names[0].to_string()))
        };
        let c_pid = find(&["processId"])?;
        let c_tid = find(&["threadId"])?;
        let c_ppid = find(&["parentProcessId"])?;
        let c_uid = find(&["userId"])?;
        let c_mnt = find(&["mountNamespace", "mountNameSpace"])?;
        let c_pname = find(&["processName"])?;
        let c_eid = find(&["eventId"])?;
        let c_argsnum = find(&["argsNum"])?;
        let c_ret = find(&["returnValue"])?;
        let c_args = find(&["args"])?;
        let c_label = headers.iter().position(|h| h.trim() == label_column);

        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            if max_rows.is_some_and(|m| rows.len() >= m) {
                break;
            }
            let rec = rec?;
            let at = |c: usize| rec.get(c).unwrap_or("").trim();
            let int = |c: usize| -> Result<i64> {
                let s = at(c);
                s.parse::<i64>()
                    .or_else(|_| s.parse::<f64>().map(|f| f as i64))
                    .map_err(|_| {
                        Error::Parse(format!(
                            "row {}: column `{}` is not an integer: {s:?}",
                            line + 1,
                            &headers[c]
                        ))
                    })
            };
            let args = parse_args(at(c_args))
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
            let label = match c_label {
                None => None,
                Some(c) => Some(match at(c) {
                    "0" | "0.0" | "False" | "false" => false,
                    "1" | "1.0" | "True" | "true" => true,
                    other => {
                        return Err(Error::Parse(format!(
                            "row {}: label `{label_column}` is not 0/1: {other:?}",
                            line + 1
                        )))
                    }
                }),
            };
            rows.push(RawEvent {
                process_id: int(c_pid)?,
                thread_id: at(c_tid).to_string(),
                parent_process_id: int(c_ppid)?,
                user_id: int(c_uid)?,
                mount_namespace: int(c_mnt)?,
                process_name: at(c_pname).to_string(),
                event_id: at(c_eid).to_string(),
                args_num: int(c_argsnum)? as f64,
                return_value: int(c_ret)?,
                args,
                label,
            });
        }
        Ok(Self { rows })
    }
}

/// Parses the `args` cell (a Python list of `{name, type, value}` dicts).
pub fn parse_args(text: &str) -> Result<Vec<ArgRecord>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let PyValue::List(items) = pyliteral::parse(text)? else {
        return Err(Error::Parse("args is not a list".into()));
    };
    if items.len() > MAX_ARGS {
        return Err(Error::Parse(format!(
            "{} args exceed the limit of {MAX_ARGS}",
            items.len()
        )));
    }
    items
        .into_iter()
        .map(|item| {
            let PyValue::Dict(kv) = item else {
                return Err(Error::Parse("args entry is not a dict".into()));
            };
            let get = |key: &str| {
                kv.iter()
                    .find(|(k, _)| *k == PyValue::Str(key.into()))
                    .map(|(_, v)| v.category())
                    .unwrap_or_else(|| ABSENT.to_string())
            };
            Ok(ArgRecord {
                name: get("name"),
                type_name: get("type"),
                value: get("value"),
            })
        })
        .collect()
}

pub fn map_process_id(v: i64) -> f64 {
    if (0..=2).contains(&v) {
        0.0
    } else {
        1.0
    }
}

pub fn map_user_id(v: i64) -> f64 {
    if v < 1000 {
        0.0
    } else {
        1.0
    }
}

pub fn map_mount_namespace(v: i64) -> f64 {
    if v == HOST_MOUNT_NAMESPACE {
        0.0
    } else {
        1.0
    }
}

pub fn map_return_value(v: i64) -> f64 {
    match v.signum() {
        0 => 0.0,
        1 => 1.0,
        _ => 2.0,
    }
}

/// The 15 flattened arg categories of one row, padded with [`ABSENT`].
pub fn flatten_args(args: &[ArgRecord]) -> Vec<String> {
    let mut out = Vec::with_capacity(3 * MAX_ARGS);
    for slot in 0..MAX_ARGS {
        match args.get(slot) {
            Some(a) => {
                out.push(a.name.clone());
                out.push(a.type_name.clone());
                out.push(a.value.clone());
            }
            None => out.extend(std::iter::repeat_n(ABSENT.to_string(), 3)),
        }
    }
    out
}

/// Fitted state needed to transform any split the same way.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessState {
    pub label_column: String,
    pub smoothing: f64,
    pub process_name: TargetEncoder,
    pub thread_id: TargetEncoder,
    pub event_id: TargetEncoder,
    /// Slot-major, 15 encoders.
    pub args: Vec<TargetEncoder>,
    pub args_num_mean: f64,
    pub args_num_std: f64,
}

impl PreprocessState {
    /// Fits every encoder on the labelled training split.
    pub fn fit(train: &RawEventTable, label_column: &str, smoothing: f64) -> Result<Self> {
        if train.rows.is_empty() {
            return Err(Error::Empty("preprocessing fit data"));
        }
        let labels = train
            .labels()
            .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
        let col = |f: fn(&RawEvent) -> &str| -> Vec<&str> { train.rows.iter().map(f).collect() };
        let flat: Vec<Vec<String>> = train.rows.iter().map(|r| flatten_args(&r.args)).collect();
        let args = (0..3 * MAX_ARGS)
            .map(|j| {
                let column: Vec<&str> = flat.iter().map(|r| r[j].as_str()).collect();
                TargetEncoder::fit(&column, &labels, smoothing)
            })
            .collect::<Result<Vec<_>>>()?;
        let n = train.rows.len() as f64;
        let mean = train.rows.iter().map(|r| r.args_num).sum::<f64>() / n;
        let var = train
            .rows
            .iter()
            .map(|r| (r.args_num - mean).powi(2))
            .sum::<f64>()
            / n;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        Ok(Self {
            label_column: label_column.to_string(),
            smoothing,
            process_name: TargetEncoder::fit(&col(|r| &r.process_name), &labels, smoothing)?,
            thread_id: TargetEncoder::fit(&col(|r| &r.thread_id), &labels, smoothing)?,
            event_id: TargetEncoder::fit(&col(|r| &r.event_id), &labels, smoothing)?,
            args,
            args_num_mean: mean,
            args_num_std: std,
        })
    }

    pub fn transform_row(&self, r: &RawEvent) -> Vec<f64> {
        let mut out = vec![
            map_process_id(r.process_id),
            self.thread_id.encode(&r.thread_id),
            map_process_id(r.parent_process_id),
            map_user_id(r.user_id),
            map_mount_namespace(r.mount_namespace),
            self.process_name.encode(&r.process_name),
            self.event_id.encode(&r.event_id),
            (r.args_num - self.args_num_mean) / self.args_num_std,
            map_return_value(r.return_value),
        ];
        out.extend(
            flatten_args(&r.args)
                .iter()
                .zip(&self.args)
                .map(|(c, enc)| enc.encode(c)),
        );
        debug_assert_eq!(out.len(), FEATURE_NAMES.len());
        out
    }
}

/// Numeric table with named columns; labels travel alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<bool>>,
}

/// Name of the label column in cached matrices.
pub const LABEL: &str = "label";

impl FeatureMatrix {
    pub fn new(
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        for r in &rows {
            if r.len() != columns.len() {
                return Err(Error::LengthMismatch {
                    expected: columns.len(),
                    got: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("feature matrix entry".into()));
            }
        }
        if let Some(l) = &labels {
            if l.len() != rows.len() {
                return Err(Error::LengthMismatch {
                    expected: rows.len(),
                    got: l.len(),
                });
            }
        }
        Ok(Self {
            columns,
            rows,
            labels,
        })
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows whose label is `false` (all rows when unlabelled).
    pub fn normal_rows(&self) -> Vec<Vec<f64>> {
        match &self.labels {
            None => self.rows.clone(),
            Some(l) => self
                .rows
                .iter()
                .zip(l)
                .filter(|(_, &a)| !a)
                .map(|(r, _)| r.clone())
                .collect(),
        }
    }

    /// Header row, then one line per row; a trailing `label` column when
    /// labels are present. Lines starting with `#` are written from `comments`.
    pub fn write_csv<W: Write>(&self, out: W, comments: &[String]) -> Result<()> {
        let mut out = out;
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.columns.clone();
        if self.labels.is_some() {
            header.push(LABEL.to_string());
        }
        w.write_record(&header)?;
        for (i, r) in self.rows.iter().enumerate() {
            let mut rec: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            if let Some(l) = &self.labels {
                rec.push(u8::from(l[i]).to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a numeric CSV. A column named `label_column` becomes the labels.
    pub fn read_csv<R: Read>(input: R, label_column: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(input);
        let headers: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let label_idx = headers.iter().position(|h| h == label_column);
        let columns: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, h)| h.clone())
            .collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(columns.len());
            for (i, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Parse(format!(
                        "row {}: column `{}` is not numeric: {field:?}",
                        line + 1,
                        headers.get(i).map(String::as_str).unwrap_or("?")
                    ))
                })?;
                if Some(i) == label_idx {
                    labels.push(v != 0.0);
                } else {
                    row.push(v);
                }
            }
            rows.push(row);
        }
        Self::new(columns, rows, label_idx.map(|_| labels))
    }
}

/// Transforms `raw` with an already fitted state.
pub fn preprocess(raw: &RawEventTable, state: &PreprocessState) -> Result<FeatureMatrix> {
    let rows = raw.rows.iter().map(|r| state.transform_row(r)).collect();
    FeatureMatrix::new(
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        rows,
        raw.labels(),
    )
}
