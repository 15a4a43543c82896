pub mod formats;
pub mod ingest;
