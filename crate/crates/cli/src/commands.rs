//! Subcommand implementations. Each writes its artifacts and returns a short
//! summary for the terminal.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qae_core::cae::{cae_scores, cae_train, calibrate_cae, Standardizer};
use qae_core::encode::FeatureScaler;
use qae_core::eval::{evaluate, EvalReport};
use qae_core::features::{
    feature_stats, group_stats, preprocess as transform_events, select_features, ColumnStats,
    FeatureMatrix, GroupStats, PreprocessState, RawEventTable, SelectionSpec, Strategy,
};
use qae_core::persist::{Detector, ModelFile};
use qae_core::qae::{calibrate_threshold, score_samples, train as train_qae};
use qae_core::rng::{derive_seed, sha256_hex};
use qae_core::synth::generate;
use serde::{Deserialize, Serialize};

use crate::config::{ModelKind, RunConfig};
use crate::error::{CliError, CliResult};

pub const TOOL: &str = concat!("qae-cli ", env!("CARGO_PKG_VERSION"));
const STATE_VERSION: u32 = 1;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::at(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::at(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::at(path, e))
}

/// Re-tags a core error with the file it came from, keeping its class.
fn in_file(path: &Path, e: qae_core::Error) -> CliError {
    match CliError::from(e) {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        CliError::Runtime(m) => CliError::Runtime(format!("{}: {m}", path.display())),
    }
}

/// `#` comment lines that head every CSV artifact.
fn provenance(cfg: &RunConfig, extra: &[(&str, String)]) -> Vec<String> {
    let mut lines = vec![
        TOOL.to_string(),
        format!("config_sha256={}", cfg.hash()),
        format!("seed={}", cfg.seed),
    ];
    lines.extend(extra.iter().map(|(k, v)| format!("{k}={v}")));
    lines
}

fn comment_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

fn read_matrix(path: &Path, label_column: &str) -> CliResult<(FeatureMatrix, String)> {
    let bytes = read(path)?;
    let m =
        FeatureMatrix::read_csv(bytes.as_slice(), label_column).map_err(|e| in_file(path, e))?;
    Ok((m, sha256_hex(&bytes)))
}

fn matrix_csv(m: &FeatureMatrix, comments: &[String]) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    m.write_csv(&mut buf, comments)?;
    Ok(buf)
}

fn json_bytes<S: Serialize>(value: &S) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serialises");
    s.push('\n');
    s.into_bytes()
}

/// Fitted preprocessing state as stored next to a cached feature matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub version: u32,
    pub config_sha256: String,
    pub seed: u64,
    /// Raw file the encoders were fitted on.
    pub fitted_on_sha256: String,
    pub state: PreprocessState,
}

pub struct PreprocessArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Reuse a fitted state (test split) instead of fitting on `input`.
    pub state_in: Option<PathBuf>,
    /// Where a freshly fitted state goes; defaults next to `output`.
    pub state_out: Option<PathBuf>,
}

pub fn default_state_path(output: &Path) -> PathBuf {
    output.with_extension("state.json")
}

pub fn preprocess(cfg: &RunConfig, args: &PreprocessArgs) -> CliResult<String> {
    let bytes = read(&args.input)?;
    let input_sha = sha256_hex(&bytes);
    let p = &cfg.preprocess;
    let raw = RawEventTable::read_csv(bytes.as_slice(), &p.label_column, p.max_rows)
        .map_err(|e| in_file(&args.input, e))?;
    if raw.rows.is_empty() {
        return Err(CliError::Data(format!("{}: no rows", args.input.display())));
    }
    let (state_file, state_path, fitted) = match &args.state_in {
        Some(path) => {
            let sf: StateFile =
                serde_json::from_slice(&read(path)?).map_err(|e| CliError::at(path, e))?;
            if sf.version != STATE_VERSION {
                return Err(CliError::Config(format!(
                    "{}: unsupported state version {}",
                    path.display(),
                    sf.version
                )));
            }
            (sf, path.clone(), false)
        }
        None => {
            let state = PreprocessState::fit(&raw, &p.label_column, p.smoothing)
                .map_err(|e| in_file(&args.input, e))?;
            let sf = StateFile {
                version: STATE_VERSION,
                config_sha256: cfg.hash(),
                seed: cfg.seed,
                fitted_on_sha256: input_sha.clone(),
                state,
            };
            let path = args
                .state_out
                .clone()
                .unwrap_or_else(|| default_state_path(&args.output));
            (sf, path, true)
        }
    };
    let state_bytes = json_bytes(&state_file);
    if fitted {
        write(&state_path, &state_bytes)?;
    }
    let matrix = transform_events(&raw, &state_file.state)?;
    let comments = provenance(
        cfg,
        &[
            ("input_sha256", input_sha),
            ("state_sha256", sha256_hex(&state_bytes)),
            ("label_source", state_file.state.label_column.clone()),
        ],
    );
    write(&args.output, &matrix_csv(&matrix, &comments)?)?;
    Ok(format!(
        "preprocessed {} rows into {} columns -> {} ({} state {})",
        matrix.rows.len(),
        matrix.n_columns(),
        args.output.display(),
        if fitted { "fitted" } else { "reused" },
        state_path.display()
    ))
}

pub fn synth(cfg: &RunConfig, out_dir: &Path) -> CliResult<String> {
    let spec = cfg.synthetic_spec();
    let data = generate(&spec)?;
    let columns: Vec<String> = (1..=spec.dimension).map(|j| format!("f{j}")).collect();
    let mut extra = vec![("split", "train".to_string())];
    let train = FeatureMatrix::new(columns.clone(), data.train, None)?;
    write(
        &out_dir.join("train.csv"),
        &matrix_csv(&train, &provenance(cfg, &extra))?,
    )?;
    extra[0].1 = "test".into();
    if spec.n_anomalous == 0 {
        log::warn!("synthetic test split has no anomalies");
        extra.push(("flag", "no_anomalies".into()));
    }
    let test = FeatureMatrix::new(columns, data.test, Some(data.test_labels))?;
    write(
        &out_dir.join("test.csv"),
        &matrix_csv(&test, &provenance(cfg, &extra))?,
    )?;
    Ok(format!(
        "wrote {} train and {} test rows ({} anomalous) to {}",
        spec.n_train,
        spec.n_test_normal + spec.n_anomalous,
        spec.n_anomalous,
        out_dir.display()
    ))
}

pub fn model_path(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir
        .join(format!("{}-model.json", kind_name(cfg.model)))
}

pub fn loss_path(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir
        .join(format!("{}-loss.csv", kind_name(cfg.model)))
}

fn kind_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Qae => "qae",
        ModelKind::Cae => "cae",
    }
}

/// Selection, scaling, training and threshold calibration in one go.
pub fn build_model(
    cfg: &RunConfig,
    train: &FeatureMatrix,
) -> CliResult<(ModelFile<f64>, Vec<f64>)> {
    let selection = select_features(train, &cfg.selection_spec())?;
    let normal = train.normal_rows();
    if normal.is_empty() {
        return Err(CliError::Data("training split has no normal rows".into()));
    }
    let x = selection.apply(&normal)?;
    let width = selection.output_width();
    let (detector, trace) = match cfg.model {
        ModelKind::Qae => {
            let setup = cfg.qae_setup(width)?;
            let scaler = FeatureScaler::fit(&x, setup.encoding.technique())?;
            let scaled = scaler.transform(&x)?;
            let model = train_qae(
                &scaled,
                &setup.encoding,
                &setup.ansatz,
                &setup.layout,
                &setup.train,
            )?;
            let scores: Vec<f64> = score_samples(&model, &scaled, &setup.calibration_mode)?
                .into_iter()
                .map(|r| r.anomaly)
                .collect();
            let model = calibrate_threshold(model, &scores)?;
            let trace = model
                .train_meta
                .as_ref()
                .map(|m| m.loss_trace.clone())
                .unwrap_or_default();
            (
                Detector::Qae {
                    scaler,
                    score_mode: setup.calibration_mode,
                    model,
                },
                trace,
            )
        }
        ModelKind::Cae => {
            let arch = cfg.cae_arch(width)?;
            let standardizer = Standardizer::fit(&x)?;
            let z = standardizer.transform(&x)?;
            let model = cae_train(&z, &arch, &cfg.cae_train_config())?;
            let scores = cae_scores(&model, &z)?;
            let model = calibrate_cae(model, &scores)?;
            let trace = model
                .train_meta
                .as_ref()
                .map(|m| m.loss_trace.clone())
                .unwrap_or_default();
            (
                Detector::Cae {
                    standardizer,
                    model,
                },
                trace,
            )
        }
    };
    let file = ModelFile::new(
        cfg.hash(),
        cfg.seed,
        train.columns.clone(),
        selection,
        detector,
    );
    Ok((file, trace))
}

pub fn train(cfg: &RunConfig) -> CliResult<String> {
    let path = cfg
        .data
        .train
        .as_ref()
        .ok_or_else(|| CliError::Config("data.train is not set".into()))?;
    let (matrix, train_sha) = read_matrix(path, &cfg.data.label_column)?;
    let (mut file, trace) = build_model(cfg, &matrix)?;
    file.train_sha256 = Some(train_sha.clone());

    let out = model_path(cfg);
    write(&out, file.to_json()?.as_bytes())?;
    let step = match cfg.model {
        ModelKind::Qae => "evaluation",
        ModelKind::Cae => "epoch",
    };
    let mut csv = comment_block(&provenance(cfg, &[("train_sha256", train_sha)]));
    writeln!(csv, "{step},loss").expect("string write");
    for (i, v) in trace.iter().enumerate() {
        writeln!(csv, "{},{v}", i + 1).expect("string write");
    }
    write(&loss_path(cfg), csv.as_bytes())?;
    let threshold = file.detector.threshold().expect("calibrated above");
    Ok(format!(
        "trained {} on {} rows, {} inputs -> {} features; threshold {threshold:.6}; best loss {:.6}; model {}",
        file.detector.name(),
        matrix.normal_rows().len(),
        matrix.n_columns(),
        file.selection.output_width(),
        trace.iter().copied().fold(f64::INFINITY, f64::min),
        out.display()
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMeta {
    pub tool: String,
    /// Hash of the config that trained the model.
    pub model_config_sha256: String,
    pub model_seed: u64,
    pub model_sha256: String,
    pub test_sha256: String,
    pub detector: String,
    /// `exact`, `shots` or `shots+noise`.
    pub score_mode: String,
    pub noisy: bool,
    pub bins: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub meta: EvalMeta,
    pub report: EvalReport,
    #[serde(skip)]
    pub scores: Vec<f64>,
    #[serde(skip)]
    pub labels: Vec<bool>,
}

/// Scores `test` with a loaded model. The column check runs before any
/// scoring so a mismatched file fails fast.
pub fn evaluate_file(
    file: &ModelFile<f64>,
    model_sha256: &str,
    test: &FeatureMatrix,
    test_sha256: &str,
    bins: usize,
) -> CliResult<Evaluation> {
    if test.columns != file.input_columns {
        return Err(CliError::Config(format!(
            "model expects {} features {:?}, test file has {} {:?}",
            file.input_columns.len(),
            file.input_columns,
            test.n_columns(),
            test.columns
        )));
    }
    let labels = test
        .labels
        .clone()
        .ok_or_else(|| CliError::Data("test file has no label column".into()))?;
    let threshold = file
        .detector
        .threshold()
        .ok_or_else(|| CliError::Runtime("model threshold is not calibrated".into()))?;
    let mode = file
        .detector
        .score_mode()
        .reseeded(derive_seed(file.seed, "sampling/test"));
    let scores = file.score_in(&test.rows, &mode)?;
    let report = evaluate(&scores, &labels, threshold, bins)?;
    Ok(Evaluation {
        meta: EvalMeta {
            tool: TOOL.to_string(),
            model_config_sha256: file.config_hash.clone(),
            model_seed: file.seed,
            model_sha256: model_sha256.to_string(),
            test_sha256: test_sha256.to_string(),
            detector: file.detector.name().to_string(),
            score_mode: mode.describe().to_string(),
            noisy: mode.is_noisy(),
            bins,
        },
        report,
        scores,
        labels,
    })
}

pub fn load_model(path: &Path) -> CliResult<(ModelFile<f64>, String)> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Data(format!("{}: not UTF-8", path.display())))?;
    let file = ModelFile::from_json(&text).map_err(|e| in_file(path, e))?;
    Ok((file, sha256_hex(text.as_bytes())))
}

fn test_path(cfg: &RunConfig, given: Option<&Path>) -> CliResult<PathBuf> {
    given
        .map(Path::to_path_buf)
        .or_else(|| cfg.data.test.clone())
        .ok_or_else(|| CliError::Config("no test file: pass --test or set data.test".into()))
}

pub fn evaluate_paths(cfg: &RunConfig, model: &Path, test: Option<&Path>) -> CliResult<Evaluation> {
    let (file, model_sha) = load_model(model)?;
    let test = test_path(cfg, test)?;
    let (matrix, test_sha) = read_matrix(&test, &cfg.data.label_column)?;
    evaluate_file(&file, &model_sha, &matrix, &test_sha, cfg.eval.bins)
}

pub fn eval(
    cfg: &RunConfig,
    model: &Path,
    test: Option<&Path>,
    out_dir: Option<&Path>,
) -> CliResult<String> {
    let ev = evaluate_paths(cfg, model, test)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| model.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    let stem = model
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("model")
        .trim_end_matches("-model")
        .to_string();

    #[derive(Serialize)]
    struct ReportFile<'a> {
        config_sha256: String,
        seed: u64,
        meta: &'a EvalMeta,
        report: &'a EvalReport,
    }
    let report_path = dir.join(format!("{stem}-report.json"));
    write(
        &report_path,
        &json_bytes(&ReportFile {
            config_sha256: cfg.hash(),
            seed: cfg.seed,
            meta: &ev.meta,
            report: &ev.report,
        }),
    )?;

    let comments = provenance(
        cfg,
        &[
            ("model_sha256", ev.meta.model_sha256.clone()),
            ("test_sha256", ev.meta.test_sha256.clone()),
            ("score_mode", ev.meta.score_mode.clone()),
        ],
    );
    let mut hist = comment_block(&comments).into_bytes();
    ev.report.histogram.write_csv(&mut hist)?;
    write(&dir.join(format!("{stem}-histogram.csv")), &hist)?;

    let mut scores = comment_block(&comments);
    scores.push_str("index,score,label\n");
    for (i, (s, l)) in ev.scores.iter().zip(&ev.labels).enumerate() {
        writeln!(scores, "{i},{s},{}", u8::from(*l)).expect("string write");
    }
    write(&dir.join(format!("{stem}-scores.csv")), scores.as_bytes())?;

    let r = &ev.report;
    let mut summary = format!(
        "{} [{}] on {} samples: F1 {:.4}, precision {:.4}, recall {:.4}, accuracy {:.4}, AUROC {}, separation {}",
        ev.meta.detector,
        ev.meta.score_mode,
        r.n_samples,
        r.f1(),
        r.confusion.precision,
        r.confusion.recall,
        r.confusion.accuracy,
        fmt_opt(r.auroc),
        fmt_opt(r.separation_value()),
    );
    if !r.flags().is_empty() {
        write!(summary, "; flags {:?}", r.flags()).expect("string write");
    }
    write!(summary, "; report {}", report_path.display()).expect("string write");
    Ok(summary)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

/// One row per model, in argument order.
pub fn compare(
    cfg: &RunConfig,
    models: &[PathBuf],
    test: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<String> {
    if models.is_empty() {
        return Err(CliError::Config("compare needs at least one model".into()));
    }
    let test = test_path(cfg, test)?;
    let (matrix, test_sha) = read_matrix(&test, &cfg.data.label_column)?;
    let mut csv = comment_block(&provenance(cfg, &[("test_sha256", test_sha.clone())]));
    csv.push_str("model,detector,score_mode,f1,auroc,separation,precision,recall,accuracy,threshold,model_config_sha256,model_seed,test_sha256\n");
    let mut table = format!(
        "{:<32} {:<4} {:<12} {:>8} {:>8} {:>10}\n",
        "model", "kind", "mode", "F1", "AUROC", "separation"
    );
    for path in models {
        let (file, sha) = load_model(path)?;
        let ev = evaluate_file(&file, &sha, &matrix, &test_sha, cfg.eval.bins)?;
        let r = &ev.report;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            path.display(),
            ev.meta.detector,
            ev.meta.score_mode,
            r.f1(),
            opt(r.auroc),
            opt(r.separation_value()),
            r.confusion.precision,
            r.confusion.recall,
            r.confusion.accuracy,
            r.threshold,
            ev.meta.model_config_sha256,
            ev.meta.model_seed,
            ev.meta.test_sha256,
        )
        .expect("string write");
        writeln!(
            table,
            "{:<32} {:<4} {:<12} {:>8.4} {:>8} {:>10}",
            path.display(),
            ev.meta.detector,
            ev.meta.score_mode,
            r.f1(),
            fmt_opt(r.auroc),
            fmt_opt(r.separation_value()),
        )
        .expect("string write");
    }
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output_dir.join("compare.csv"));
    write(&out, csv.as_bytes())?;
    write!(table, "written to {}", out.display()).expect("string write");
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: Strategy,
    /// Selected column names, or projection output names.
    pub outputs: Vec<String>,
    /// Variance statistics of the selected original columns.
    pub group: Option<GroupStats>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectReport {
    pub tool: String,
    pub config_sha256: String,
    pub seed: u64,
    pub input_sha256: String,
    pub k: usize,
    pub columns: Vec<ColumnStats>,
    pub strategies: Vec<StrategyReport>,
}

/// Column statistics plus what every strategy picks at the configured `k`.
pub fn select_report(
    cfg: &RunConfig,
    input: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<String> {
    let path = input
        .map(Path::to_path_buf)
        .or_else(|| cfg.data.train.clone())
        .ok_or_else(|| CliError::Config("no input: pass --input or set data.train".into()))?;
    let (matrix, sha) = read_matrix(&path, &cfg.data.label_column)?;
    let stats = feature_stats(&matrix);
    let base = cfg.selection_spec();
    let strategies = Strategy::ALL
        .iter()
        .map(|&strategy| {
            let spec = SelectionSpec {
                strategy,
                ..base.clone()
            };
            match select_features(&matrix, &spec) {
                Ok(sel) => StrategyReport {
                    strategy,
                    group: (sel.projection.is_none()).then(|| group_stats(&stats, &sel.columns)),
                    outputs: sel.names,
                    error: None,
                },
                Err(e) => StrategyReport {
                    strategy,
                    outputs: Vec::new(),
                    group: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect::<Vec<_>>();
    let report = SelectReport {
        tool: TOOL.to_string(),
        config_sha256: cfg.hash(),
        seed: cfg.seed,
        input_sha256: sha,
        k: base.k,
        columns: stats,
        strategies,
    };
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output_dir.join("select-report.json"));
    write(&out, &json_bytes(&report))?;
    let mut summary = String::new();
    for s in &report.strategies {
        match &s.error {
            None => writeln!(summary, "{:?}: {}", s.strategy, s.outputs.join(", ")),
            Some(e) => writeln!(summary, "{:?}: unavailable ({e})", s.strategy),
        }
        .expect("string write");
    }
    write!(summary, "written to {}", out.display()).expect("string write");
    Ok(summary)
}
