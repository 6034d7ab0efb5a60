//! Benchmark harness for `sphtree`: timed runs, parameter sweeps, CSV
//! records and walk-order slice exports.

pub mod experiment;
pub mod record;
pub mod viz;

pub use experiment::{
    run_beta_sweep, run_bucket_sweep, run_config, run_scaling, Dataset, RunConfig,
    DEFAULT_BETAS, DEFAULT_BUCKET_SIZES,
};
pub use record::{read_records, summarize, write_records, BenchRecord, Summary};
pub use viz::{export_walk_slice, walk_slice, SliceCell, SliceSummary};
