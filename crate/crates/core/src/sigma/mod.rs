//! From tabular rows to the bias σ-algebra.
//!
//! [`ingest`] turns a CSV file and a [`BindingConfig`] into one individual
//! per row plus the role and data facts the binding describes. After
//! materialization, [`build_mask`] records which rows fall under each
//! sensitive concept, and [`atoms`] groups rows by their mask signature. The
//! atoms are the minimal events of the generated σ-algebra: every event is a
//! union of atoms, which [`event_membership`] makes concrete.

mod dataset;
mod mask;
mod partition;

use std::path::PathBuf;

use thiserror::Error;

use crate::ontology::FactError;

pub use dataset::{ingest, ingest_bytes, BindingConfig, Column, ColumnKind, DataBinding, DataTarget, Dataset, Ingested, RoleBinding};
pub use mask::{build_mask, MaskMatrix};
pub use partition::{atoms, event_membership, AtomPartition, EventExpr};

#[derive(Debug, Error)]
pub enum SigmaError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("invalid binding config: {0}")]
    Binding(String),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("binding refers to `{name}`, which is not a {expected} of the ontology")]
    UnknownVocabulary { name: String, expected: &'static str },
    #[error("column `{column}` row {row}: {value:?} is not a decimal number")]
    TypeMismatch { column: String, row: usize, value: String },
    #[error("feature column `{column}` row {row} is empty")]
    MissingFeatureValue { column: String, row: usize },
    #[error("row {row} has an empty individual id")]
    MissingRowId { row: usize },
    #[error("duplicate row id `{0}`")]
    DuplicateRowId(String),
    #[error("data binding targets the objects of `{0}`, but no role binding for it exists")]
    UnboundRoleObject(String),
    #[error(transparent)]
    Fact(#[from] FactError),
    #[error("ontology declares no sensitive concepts; rerun with --allow-trivial to accept a trivial σ-algebra")]
    NoSensitiveConcepts,
    #[error("malformed mask file: {0}")]
    MaskFormat(String),
    #[error("malformed event expression: {0}")]
    BadExpression(String),
}
