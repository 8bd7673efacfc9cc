//! SQLite connector.
//!
//! Timeouts use SQLite's progress handler: the handler fires every few
//! thousand VM instructions and aborts the statement once the deadline
//! passes, which surfaces as `SQLITE_INTERRUPT`.

use std::time::{Duration, Instant};

use rusqlite::{Connection, OpenFlags};

use super::connector::{CatalogProbe, DatabaseConnector};
use super::types::{
    ColumnMeta, ExecutionError, ExecutionErrorKind, ExecutionResult, ForeignKeyMeta, IndexMeta,
    SchemaMetadata, SqlValue, TableMeta,
};

const PROGRESS_OPS: i32 = 1_000;

pub struct SqliteConnector {
    conn: Connection,
    location: String,
}

impl SqliteConnector {
    /// Opens an existing database. Missing files are a connection error;
    /// `:memory:` and `file:` URIs are passed through to SQLite.
    pub fn connect(location: &str) -> Result<Self, ExecutionError> {
        let mut flags = OpenFlags::SQLITE_OPEN_READ_WRITE | OpenFlags::SQLITE_OPEN_NO_MUTEX;
        if location.starts_with("file:") {
            flags |= OpenFlags::SQLITE_OPEN_URI | OpenFlags::SQLITE_OPEN_CREATE;
        } else if location == ":memory:" {
            flags |= OpenFlags::SQLITE_OPEN_CREATE;
        } else if !std::path::Path::new(location).exists() {
            return Err(ExecutionError::new(
                ExecutionErrorKind::Connection,
                format!("database file not found: {location}"),
            ));
        }
        let conn = Connection::open_with_flags(location, flags).map_err(|e| {
            ExecutionError::new(ExecutionErrorKind::Connection, e.to_string())
        })?;
        Ok(SqliteConnector {
            conn,
            location: location.to_string(),
        })
    }

    pub fn location(&self) -> &str {
        &self.location
    }

    fn is_memory(&self) -> bool {
        self.location == ":memory:"
            || (self.location.starts_with("file:") && self.location.contains("mode=memory"))
    }

    fn run_statement(&self, sql: &str, start: Instant) -> rusqlite::Result<ExecutionResult> {
        let mut stmt = self.conn.prepare(sql)?;
        let ncols = stmt.column_count();
        let columns: Vec<String> = stmt
            .column_names()
            .into_iter()
            .map(|s| s.to_string())
            .collect();
        let mut out_rows = Vec::new();
        let mut rows = stmt.query([])?;
        while let Some(row) = rows.next()? {
            let mut vals = Vec::with_capacity(ncols);
            for i in 0..ncols {
                vals.push(value_from_ref(row.get_ref(i)?));
            }
            out_rows.push(vals);
        }
        Ok(ExecutionResult {
            columns,
            rows: out_rows,
            elapsed: start.elapsed(),
        })
    }

    fn classify(err: rusqlite::Error, timeout: Duration) -> ExecutionError {
        if let rusqlite::Error::SqliteFailure(ffi, _) = &err {
            if ffi.code == rusqlite::ErrorCode::OperationInterrupted {
                return ExecutionError::timeout(timeout);
            }
        }
        let msg = err.to_string();
        let kind = if msg.contains("syntax error") || msg.contains("incomplete input") {
            ExecutionErrorKind::Syntax
        } else {
            ExecutionErrorKind::Runtime
        };
        ExecutionError::new(kind, msg)
    }

    fn read_table(&self, name: &str, probe: &dyn CatalogProbe) -> rusqlite::Result<TableMeta> {
        probe.catalog_query();
        let quoted = quote_ident(name);
        let mut columns = Vec::new();
        let mut pk_order: Vec<(i64, String)> = Vec::new();
        {
            let mut stmt = self.conn.prepare(&format!("PRAGMA table_info({quoted})"))?;
            let mut rows = stmt.query([])?;
            while let Some(row) = rows.next()? {
                let col_name: String = row.get(1)?;
                let declared_type: String = row.get(2)?;
                let notnull: i64 = row.get(3)?;
                let default_value: Option<String> = row.get(4)?;
                let pk: i64 = row.get(5)?;
                if pk > 0 {
                    pk_order.push((pk, col_name.clone()));
                }
                columns.push(ColumnMeta {
                    name: col_name,
                    declared_type,
                    nullable: notnull == 0,
                    default_value,
                });
            }
        }
        pk_order.sort();
        let primary_key = pk_order.into_iter().map(|(_, c)| c).collect();

        probe.catalog_query();
        let mut fk_groups: std::collections::BTreeMap<i64, ForeignKeyMeta> = Default::default();
        {
            let mut stmt = self
                .conn
                .prepare(&format!("PRAGMA foreign_key_list({quoted})"))?;
            let mut rows = stmt.query([])?;
            while let Some(row) = rows.next()? {
                let id: i64 = row.get(0)?;
                let table: String = row.get(2)?;
                let from: String = row.get(3)?;
                let to: Option<String> = row.get(4)?;
                let entry = fk_groups.entry(id).or_insert_with(|| ForeignKeyMeta {
                    columns: Vec::new(),
                    referenced_table: table,
                    referenced_columns: Vec::new(),
                });
                entry.columns.push(from);
                if let Some(to) = to {
                    entry.referenced_columns.push(to);
                }
            }
        }
        let foreign_keys = fk_groups.into_values().collect();

        probe.catalog_query();
        let mut index_names: Vec<String> = Vec::new();
        {
            let mut stmt = self.conn.prepare(&format!("PRAGMA index_list({quoted})"))?;
            let mut rows = stmt.query([])?;
            while let Some(row) = rows.next()? {
                let idx_name: String = row.get(1)?;
                let origin: String = row.get(3)?;
                // Only user-created indexes; PK/UNIQUE auto-indexes are
                // regenerated by SQLite from the table definition.
                if origin == "c" {
                    index_names.push(idx_name);
                }
            }
        }
        index_names.sort();
        let mut indexes = Vec::new();
        for idx_name in index_names {
            probe.catalog_query();
            let mut cols: Vec<(i64, String)> = Vec::new();
            let mut stmt = self
                .conn
                .prepare(&format!("PRAGMA index_info({})", quote_ident(&idx_name)))?;
            let mut rows = stmt.query([])?;
            while let Some(row) = rows.next()? {
                let seq: i64 = row.get(0)?;
                let col: Option<String> = row.get(2)?;
                if let Some(col) = col {
                    cols.push((seq, col));
                }
            }
            cols.sort();
            indexes.push(IndexMeta {
                name: idx_name,
                columns: cols.into_iter().map(|(_, c)| c).collect(),
            });
        }

        Ok(TableMeta {
            name: name.to_string(),
            columns,
            primary_key,
            foreign_keys,
            indexes,
        })
    }
}

impl DatabaseConnector for SqliteConnector {
    fn execute(&mut self, sql: &str, timeout: Duration) -> Result<ExecutionResult, ExecutionError> {
        let start = Instant::now();
        let deadline = start + timeout;
        self.conn
            .progress_handler(PROGRESS_OPS, Some(move || Instant::now() >= deadline));
        let result = self.run_statement(sql, start);
        self.conn.progress_handler(PROGRESS_OPS, None::<fn() -> bool>);
        match result {
            Ok(r) => {
                if start.elapsed() > timeout {
                    // The progress handler fires between instruction batches,
                    // so a statement can finish just past the deadline.
                    Err(ExecutionError::timeout(timeout))
                } else {
                    Ok(r)
                }
            }
            Err(e) => Err(Self::classify(e, timeout)),
        }
    }

    fn read_schema(
        &mut self,
        probe: &dyn CatalogProbe,
    ) -> Result<SchemaMetadata, ExecutionError> {
        let run = || -> rusqlite::Result<SchemaMetadata> {
            probe.catalog_query();
            let mut names: Vec<String> = Vec::new();
            {
                let mut stmt = self.conn.prepare(
                    "SELECT name FROM sqlite_master \
                     WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name",
                )?;
                let mut rows = stmt.query([])?;
                while let Some(row) = rows.next()? {
                    names.push(row.get(0)?);
                }
            }
            let mut tables = Vec::with_capacity(names.len());
            for name in &names {
                tables.push(self.read_table(name, probe)?);
            }
            Ok(SchemaMetadata {
                database_id: database_id_from_location(&self.location),
                tables,
            })
        };
        run().map_err(|e| ExecutionError::new(ExecutionErrorKind::Connection, e.to_string()))
    }

    fn try_clone(&self) -> Option<Result<Box<dyn DatabaseConnector>, ExecutionError>> {
        if self.is_memory() {
            return None;
        }
        Some(SqliteConnector::connect(&self.location).map(|c| Box::new(c) as Box<_>))
    }
}

fn value_from_ref(v: rusqlite::types::ValueRef<'_>) -> SqlValue {
    use rusqlite::types::ValueRef;
    match v {
        ValueRef::Null => SqlValue::Null,
        ValueRef::Integer(i) => SqlValue::Integer(i),
        ValueRef::Real(r) => SqlValue::Real(r),
        ValueRef::Text(t) => SqlValue::Text(String::from_utf8_lossy(t).into_owned()),
        ValueRef::Blob(b) => SqlValue::Blob(b.to_vec()),
    }
}

/// Double-quote an identifier, escaping embedded quotes.
pub fn quote_ident(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

fn database_id_from_location(location: &str) -> String {
    if location == ":memory:" || location.starts_with("file:") {
        return location.to_string();
    }
    std::path::Path::new(location)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| location.to_string())
}
