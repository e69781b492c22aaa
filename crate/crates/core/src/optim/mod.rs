//! COBYLA for the quantum model and Adam for the classical baseline.

mod adam;
mod cobyla;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use cobyla::{cobyla_minimize, CobylaConfig, CobylaResult, CobylaStatus};
