//! Core library for a SQL-aware text-to-SQL data augmentation toolkit.
//!
//! The crate is organized around five subsystems:
//!
//! - [`db`] — unified, cache-accelerated access to live databases: execution,
//!   batch execution, result comparison, and schema introspection.
//! - [`analysis`] — SQL structural feature extraction, component-difficulty
//!   classification, corpus statistics, and standardized masking.
//! - [`llm`] — pluggable text-generation backends: an HTTP client speaking the
//!   common chat-completion wire shape and a deterministic scripted mock.
//! - [`pipeline`] — the end-to-end augmentation pipeline: strategy sampling,
//!   SQL augmentation, execution filtering, question generation, CoT
//!   generation and validation, and difficulty annotation.
//! - [`retrieval`] — masked-alignment few-shot retrieval: a trainable
//!   embedding aligned with InfoNCE, a persisted knowledge base, and top-k
//!   structure-matched example selection.
//!
//! Dataset records shared between the pipeline and retrieval live in
//! [`dataset`].

pub mod analysis;
pub mod dataset;
pub mod db;
pub mod llm;
pub mod pipeline;
pub mod retrieval;
