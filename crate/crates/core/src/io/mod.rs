//! CSV ingestion, covariate transforms, configuration files, run manifests
//! and the sample stream format.

mod config;
mod ecdf;
mod stream;
mod table;

pub use config::{
    DataRef, DataSection, FileConfig, ModelSection, RunManifest, DEFAULT_LOGIT_RANGE, MANIFEST_FORMAT,
    MANIFEST_VERSION, WIDE_LOGIT_RANGE,
};
pub use ecdf::{ecdf_transform, EcdfTransform};
pub use stream::{read_samples, SampleReader, SampleWriter, StreamHeader, SAMPLES_FORMAT, SAMPLES_VERSION};
pub use table::{
    load_dataset, read_json, read_numeric_csv, read_truth, write_csv, write_dataset, write_json, write_truth,
    write_truth_grid, CovariateRows, LoadedData, Schema, Transform,
};

pub use table::create_file;
