//! Event-log preprocessing and feature selection.
//!
//! This layer works in `f64` only; its output feeds the scalar-generic core.

mod beth;
mod linalg;
pub mod pyliteral;
mod select;
mod target;

pub use beth::{
    flatten_args, map_mount_namespace, map_process_id, map_return_value, map_user_id, parse_args,
    preprocess, ArgRecord, FeatureMatrix, PreprocessState, RawEvent, RawEventTable, ABSENT,
    DEFAULT_LABEL_COLUMN, DEFAULT_SMOOTHING, FEATURE_NAMES, LABEL, MAX_ARGS,
};
pub use linalg::symmetric_eigen;
pub use select::{
    anova_f, feature_stats, group_stats, kendall_tau_b, mutual_information, select_features,
    ColumnStats, GroupStats, Projection, Selection, SelectionSpec, Strategy,
};
pub use target::{target_encode, TargetEncoder};
