//! Configuration, columnar tables, binary snapshots and plot-data export.

mod config;
mod export;
mod snapshot;
mod table;

pub use config::{
    BoundsKind, CalibrationConfig, EvolveConfig, ExperimentConfig, GridConfig, HighFidConfig,
    InitialGuess, InterrogationConfig, ObservationLayout, ObservationPlan, SensitivityPoint,
    OUTPUT_DIR_ENV,
};
pub use export::*;
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};
pub use table::ColumnarTable;
