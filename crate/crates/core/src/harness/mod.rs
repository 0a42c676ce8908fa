//! Artifacts, reports and the end-to-end pipeline.

pub mod artifact;
pub mod pipeline;
pub mod report;

pub use artifact::{
    from_jsonl, read_artifact, to_jsonl, verify_artifact, verify_loaded, write_artifact, Artifact, ArtifactKind,
    Payload, Verdict, SCHEMA_VERSION,
};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineKind, PipelineOutcome};
pub use report::{reports_to_csv, write_csv, CSV_COLUMNS};
