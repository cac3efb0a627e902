pub mod dataset;
pub mod error;
pub mod lattice;
pub mod metrics;
pub mod tally;
pub mod sampling;
pub mod ingest;
pub mod synth;
pub mod oracle;
pub mod report;
pub mod bench;
