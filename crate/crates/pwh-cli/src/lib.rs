//! Ingestion, exact-oracle, query-generation, and benchmark plumbing behind
//! the `pwh` binary, exposed as a library for integration suites.

pub mod bench;
pub mod gen;
pub mod ingest;
pub mod oracle;
pub mod store;
