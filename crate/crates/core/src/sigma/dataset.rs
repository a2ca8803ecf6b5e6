use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SigmaError;
use crate::decimal::Decimal;
use crate::ontology::{FactStore, Ontology};
use crate::transport::{FeatureMatrix, TransportError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    /// Every non-empty cell parses as an exact decimal.
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    /// Trimmed cells; `None` for empty cells.
    pub cells: Vec<Option<String>>,
}

/// Rows of a CSV file, one individual per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub row_ids: Vec<String>,
    pub columns: Vec<Column>,
    pub feature_columns: Vec<String>,
    /// Parsed feature values, `N × d` in `feature_columns` order.
    features: Array2<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.row_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// The numeric feature columns as a matrix aligned with `row_ids`.
    ///
    /// Fails only when the binding selected no feature columns.
    pub fn features(&self) -> Result<FeatureMatrix, TransportError> {
        FeatureMatrix::new(self.feature_columns.clone(), self.features.clone())
    }
}

/// Where a data binding attaches its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataTarget {
    /// The row individual itself.
    Row,
    /// The object that this row's binding for the named role points at.
    RoleObject(String),
}

impl fmt::Display for DataTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataTarget::Row => f.write_str("row"),
            DataTarget::RoleObject(role) => write!(f, "role_object:{role}"),
        }
    }
}

impl FromStr for DataTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "row" => Ok(DataTarget::Row),
            Some(("role_object", role)) if !role.is_empty() => Ok(DataTarget::RoleObject(role.to_string())),
            _ => Err(format!("invalid data target {s:?} (expected \"row\" or \"role_object:<role>\")")),
        }
    }
}

impl Serialize for DataTarget {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DataTarget {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleBinding {
    pub column: String,
    pub role: String,
    /// Object individual id is `object_prefix` followed by the cell value.
    #[serde(default)]
    pub object_prefix: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBinding {
    pub column: String,
    pub property: String,
    #[serde(default = "row_target")]
    pub target: DataTarget,
}

fn row_target() -> DataTarget {
    DataTarget::Row
}

/// How CSV columns map onto ontology vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingConfig {
    /// Column naming each row; rows are `row1`, `row2`, ... when absent.
    #[serde(default)]
    pub individual_column: Option<String>,
    #[serde(default)]
    pub role_bindings: Vec<RoleBinding>,
    #[serde(default)]
    pub data_bindings: Vec<DataBinding>,
    #[serde(default)]
    pub feature_columns: Vec<String>,
}

impl BindingConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self, SigmaError> {
        serde_json::from_slice(bytes).map_err(|e| SigmaError::Binding(e.to_string()))
    }
}

/// Result of [`ingest`].
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Unmaterialized ABox built from the bound columns.
    pub facts: FactStore,
    /// Bound cells that were empty and therefore produced no fact.
    pub missing_cells: usize,
}

pub fn ingest(dataset_file: &Path, binding: &BindingConfig, ontology: &Ontology) -> Result<Ingested, SigmaError> {
    let bytes = std::fs::read(dataset_file).map_err(|source| SigmaError::Io {
        path: dataset_file.to_path_buf(),
        source,
    })?;
    ingest_bytes(&bytes, binding, ontology)
}

fn read_columns(bytes: &[u8]) -> Result<Vec<Column>, SigmaError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let headers = reader.headers().map_err(|e| SigmaError::Csv(e.to_string()))?.clone();
    let mut seen = HashSet::new();
    let mut columns: Vec<Column> = Vec::with_capacity(headers.len());
    for name in headers.iter() {
        let name = name.trim().to_string();
        if !seen.insert(name.clone()) {
            return Err(SigmaError::DuplicateColumn(name));
        }
        columns.push(Column {
            name,
            kind: ColumnKind::Numeric,
            cells: Vec::new(),
        });
    }
    for record in reader.records() {
        let record = record.map_err(|e| SigmaError::Csv(e.to_string()))?;
        for (column, cell) in columns.iter_mut().zip(record.iter()) {
            let cell = cell.trim();
            column.cells.push((!cell.is_empty()).then(|| cell.to_string()));
        }
    }
    for column in &mut columns {
        let numeric = column
            .cells
            .iter()
            .flatten()
            .all(|cell| cell.parse::<Decimal>().is_ok());
        column.kind = if numeric {
            ColumnKind::Numeric
        } else {
            ColumnKind::Categorical
        };
    }
    Ok(columns)
}

fn parse_decimal(column: &Column, row: usize, cell: &str) -> Result<Decimal, SigmaError> {
    cell.parse().map_err(|_| SigmaError::TypeMismatch {
        column: column.name.clone(),
        row: row + 1,
        value: cell.to_string(),
    })
}

/// [`ingest`] over in-memory CSV bytes.
pub fn ingest_bytes(bytes: &[u8], binding: &BindingConfig, ontology: &Ontology) -> Result<Ingested, SigmaError> {
    let columns = read_columns(bytes)?;
    let n = columns.first().map_or(0, |c| c.cells.len());
    if n == 0 {
        return Err(SigmaError::EmptyDataset);
    }
    let by_name: BTreeMap<&str, &Column> = columns.iter().map(|c| (c.name.as_str(), c)).collect();
    let lookup = |name: &str| {
        by_name
            .get(name)
            .copied()
            .ok_or_else(|| SigmaError::UnknownColumn(name.to_string()))
    };

    let row_ids: Vec<String> = match &binding.individual_column {
        Some(name) => {
            let column = lookup(name)?;
            column
                .cells
                .iter()
                .enumerate()
                .map(|(row, cell)| cell.clone().ok_or(SigmaError::MissingRowId { row: row + 1 }))
                .collect::<Result<_, _>>()?
        }
        None => (1..=n).map(|i| format!("row{i}")).collect(),
    };
    let mut unique = HashSet::with_capacity(n);
    for id in &row_ids {
        if !unique.insert(id.as_str()) {
            return Err(SigmaError::DuplicateRowId(id.clone()));
        }
    }

    let mut facts = FactStore::new();
    for id in &row_ids {
        facts.add_individual(id.clone());
    }
    let mut missing_cells = 0usize;

    // role -> per-row object id
    let mut role_objects: BTreeMap<&str, Vec<Option<String>>> = BTreeMap::new();
    for rb in &binding.role_bindings {
        if !ontology.roles.contains(&rb.role) {
            return Err(SigmaError::UnknownVocabulary {
                name: rb.role.clone(),
                expected: "role",
            });
        }
        let column = lookup(&rb.column)?;
        let mut objects = Vec::with_capacity(n);
        for (row, cell) in column.cells.iter().enumerate() {
            match cell {
                Some(value) => {
                    let object = format!("{}{}", rb.object_prefix, value);
                    facts.add_role(rb.role.clone(), row_ids[row].clone(), object.clone());
                    objects.push(Some(object));
                }
                None => {
                    missing_cells += 1;
                    objects.push(None);
                }
            }
        }
        // A role bound by several columns keeps the first binding's objects as data targets.
        role_objects.entry(rb.role.as_str()).or_insert(objects);
    }

    for db in &binding.data_bindings {
        if !ontology.data_properties.contains(&db.property) {
            return Err(SigmaError::UnknownVocabulary {
                name: db.property.clone(),
                expected: "data property",
            });
        }
        let column = lookup(&db.column)?;
        let targets: Option<&Vec<Option<String>>> = match &db.target {
            DataTarget::Row => None,
            DataTarget::RoleObject(role) => Some(
                role_objects
                    .get(role.as_str())
                    .ok_or_else(|| SigmaError::UnboundRoleObject(role.clone()))?,
            ),
        };
        for (row, cell) in column.cells.iter().enumerate() {
            let Some(cell) = cell else {
                missing_cells += 1;
                continue;
            };
            let value = parse_decimal(column, row, cell)?;
            let individual = match targets {
                None => row_ids[row].clone(),
                Some(objects) => match &objects[row] {
                    Some(object) => object.clone(),
                    None => {
                        missing_cells += 1;
                        continue;
                    }
                },
            };
            facts.add_data(db.property.clone(), individual, value)?;
        }
    }

    let d = binding.feature_columns.len();
    let mut features = Array2::<f64>::zeros((n, d));
    for (j, name) in binding.feature_columns.iter().enumerate() {
        let column = lookup(name)?;
        for (row, cell) in column.cells.iter().enumerate() {
            let cell = cell.as_deref().ok_or_else(|| SigmaError::MissingFeatureValue {
                column: name.clone(),
                row: row + 1,
            })?;
            parse_decimal(column, row, cell)?;
            let value: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| SigmaError::TypeMismatch {
                column: name.clone(),
                row: row + 1,
                value: cell.to_string(),
            })?;
            features[[row, j]] = value;
        }
    }

    Ok(Ingested {
        dataset: Dataset {
            row_ids,
            columns,
            feature_columns: binding.feature_columns.clone(),
            features,
        },
        facts,
        missing_cells,
    })
}
