//! Domain types for database access: configuration, schema metadata,
//! execution results, and comparison outcomes.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Supported database backends. SQLite is the built-in backend; the enum is
/// the extension point for adding network databases behind the same
/// connector interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Sqlite,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Sqlite => write!(f, "sqlite"),
        }
    }
}

/// Connection settings for one database.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectorConfig {
    pub backend_kind: BackendKind,
    /// Path or URI of the database. For SQLite: a file path, `:memory:`, or
    /// a `file:` URI.
    pub location: String,
    /// Default statement timeout, applied when a call does not supply one.
    #[serde(with = "duration_millis")]
    pub default_timeout: Duration,
    /// Upper bound on concurrently open connections for this database.
    pub max_connections: usize,
}

impl ConnectorConfig {
    pub fn sqlite(location: impl Into<String>) -> Self {
        ConnectorConfig {
            backend_kind: BackendKind::Sqlite,
            location: location.into(),
            default_timeout: Duration::from_millis(5_000),
            max_connections: 4,
        }
    }

    pub fn validate(&self) -> Result<(), DbError> {
        if self.default_timeout.is_zero() {
            return Err(DbError::InvalidConfig(
                "default_timeout must be positive".into(),
            ));
        }
        if self.max_connections == 0 {
            return Err(DbError::InvalidConfig(
                "max_connections must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

mod duration_millis {
    use super::Duration;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

/// One column of a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub declared_type: String,
    pub nullable: bool,
    pub default_value: Option<String>,
}

/// A foreign-key constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKeyMeta {
    pub columns: Vec<String>,
    pub referenced_table: String,
    /// Empty when the constraint references the target table's primary key
    /// implicitly.
    pub referenced_columns: Vec<String>,
}

/// A user-created index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub name: String,
    pub columns: Vec<String>,
}

/// One table: columns, primary key, foreign keys, indexes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMeta {
    pub name: String,
    pub columns: Vec<ColumnMeta>,
    pub primary_key: Vec<String>,
    pub foreign_keys: Vec<ForeignKeyMeta>,
    pub indexes: Vec<IndexMeta>,
}

impl TableMeta {
    pub fn column(&self, name: &str) -> Option<&ColumnMeta> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Structured metadata for one database: every user table with its columns,
/// keys, and indexes. Tables are kept in lexicographic name order so that
/// derived artifacts (DDL, cache entries) are deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaMetadata {
    pub database_id: String,
    pub tables: Vec<TableMeta>,
}

impl SchemaMetadata {
    pub fn table(&self, name: &str) -> Option<&TableMeta> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Checks the structural invariants: unique table names, foreign keys
    /// referencing existing tables, and key/index columns existing in their
    /// table.
    pub fn validate(&self) -> Result<(), DbError> {
        let mut seen = std::collections::HashSet::new();
        for t in &self.tables {
            if !seen.insert(t.name.as_str()) {
                return Err(DbError::InvalidSchema(format!(
                    "duplicate table name {:?}",
                    t.name
                )));
            }
        }
        for t in &self.tables {
            for pk in &t.primary_key {
                if t.column(pk).is_none() {
                    return Err(DbError::InvalidSchema(format!(
                        "primary-key column {:?} missing from table {:?}",
                        pk, t.name
                    )));
                }
            }
            for idx in &t.indexes {
                for c in &idx.columns {
                    if t.column(c).is_none() {
                        return Err(DbError::InvalidSchema(format!(
                            "index {:?} references missing column {:?}",
                            idx.name, c
                        )));
                    }
                }
            }
            for fk in &t.foreign_keys {
                if self.table(&fk.referenced_table).is_none() {
                    return Err(DbError::InvalidSchema(format!(
                        "foreign key on {:?} references missing table {:?}",
                        t.name, fk.referenced_table
                    )));
                }
            }
        }
        Ok(())
    }

    /// All table and column names, in schema order. This is the masking
    /// vocabulary for natural-language questions.
    pub fn identifier_vocabulary(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.tables {
            out.push(t.name.clone());
            for c in &t.columns {
                out.push(c.name.clone());
            }
        }
        out
    }
}

/// One cell of a result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SqlValue {
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
    Blob(Vec<u8>),
}

impl SqlValue {
    /// Renders the value as a SQL literal usable in INSERT statements.
    pub fn to_sql_literal(&self) -> String {
        match self {
            SqlValue::Null => "NULL".to_string(),
            SqlValue::Integer(i) => i.to_string(),
            SqlValue::Real(r) => {
                let s = format!("{r:?}");
                // `{:?}` prints integral floats as `1.0`, which SQLite reads
                // back as REAL; keep it.
                s
            }
            SqlValue::Text(t) => format!("'{}'", t.replace('\'', "''")),
            SqlValue::Blob(b) => {
                let hex: String = b.iter().map(|x| format!("{x:02X}")).collect();
                format!("X'{hex}'")
            }
        }
    }

    /// Human/prompt-facing rendering (no quoting of text).
    pub fn display_string(&self) -> String {
        match self {
            SqlValue::Null => "NULL".to_string(),
            SqlValue::Integer(i) => i.to_string(),
            SqlValue::Real(r) => format!("{r:?}"),
            SqlValue::Text(t) => t.clone(),
            SqlValue::Blob(b) => format!("<blob {} bytes>", b.len()),
        }
    }
}

/// Result of a successful statement execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<SqlValue>>,
    #[serde(with = "duration_millis")]
    pub elapsed: Duration,
}

/// Failure classification for statement execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionErrorKind {
    Syntax,
    Runtime,
    Timeout,
    Connection,
}

/// A failed statement execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionError {
    pub kind: ExecutionErrorKind,
    pub message: String,
}

impl ExecutionError {
    pub fn new(kind: ExecutionErrorKind, message: impl Into<String>) -> Self {
        ExecutionError {
            kind,
            message: message.into(),
        }
    }

    pub fn timeout(threshold: Duration) -> Self {
        ExecutionError {
            kind: ExecutionErrorKind::Timeout,
            message: format!(
                "statement aborted: runtime exceeded the {} ms threshold",
                threshold.as_millis()
            ),
        }
    }
}

impl fmt::Display for ExecutionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

impl std::error::Error for ExecutionError {}

/// How two result sets were compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMode {
    /// Exact row sequence; used when the first query has a top-level
    /// ORDER BY.
    Ordered,
    /// Bag-of-rows equality; used otherwise, since SQL row order is
    /// undefined without ORDER BY.
    Multiset,
}

/// Outcome of comparing the results of two queries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub equal: bool,
    pub mode: CompareMode,
    pub detail: Option<String>,
}

/// Errors from manager-level operations (as opposed to per-statement
/// [`ExecutionError`]s, which batch operations fold into their results).
#[derive(Debug, thiserror::Error)]
pub enum DbError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid schema metadata: {0}")]
    InvalidSchema(String),
    #[error("unknown table {0:?}")]
    UnknownTable(String),
    #[error("database has no rows to sample")]
    EmptyDatabase,
    #[error(transparent)]
    Execution(#[from] ExecutionError),
}
