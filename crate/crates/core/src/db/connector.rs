//! The abstract connector interface.
//!
//! Every backend implements this one small trait; the manager builds batch
//! execution, result comparison, DDL synthesis, insert-statement generation,
//! and value sampling generically on top of it.

use std::time::Duration;

use super::types::{ExecutionError, ExecutionResult, SchemaMetadata};

/// Counter hook for catalog instrumentation. Incremented once per catalog
/// statement a connector issues while reading schema metadata.
pub trait CatalogProbe: Sync {
    fn catalog_query(&self);
}

/// A live connection to one database.
///
/// Implementations serialize their own statement execution; the manager
/// guarantees at most one in-flight statement per connector instance.
pub trait DatabaseConnector: Send {
    /// Executes a single SQL statement, enforcing the wall-clock timeout.
    fn execute(&mut self, sql: &str, timeout: Duration) -> Result<ExecutionResult, ExecutionError>;

    /// Reads complete schema metadata from the catalog. Every catalog
    /// statement issued must be reported through `probe`.
    fn read_schema(&mut self, probe: &dyn CatalogProbe)
        -> Result<SchemaMetadata, ExecutionError>;

    /// Opens an additional independent connection to the same database, used
    /// to fan out batch work. Backends that cannot support a second
    /// connection (e.g. private in-memory databases) return `None`.
    fn try_clone(&self) -> Option<Result<Box<dyn DatabaseConnector>, ExecutionError>>;
}
