use std::collections::BTreeSet;

use super::{Dataset, SigmaError};
use crate::ontology::{extension, FactStore, Ontology};

/// `N × k` membership of rows in the sensitive concepts.
///
/// Columns follow the lexicographic order of concept names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskMatrix {
    concepts: Vec<String>,
    row_ids: Vec<String>,
    /// Row-major, one byte (0 or 1) per entry.
    bits: Vec<u8>,
}

impl MaskMatrix {
    /// Builds a mask from explicit rows. Concepts are reordered lexicographically
    /// together with their columns.
    pub fn from_rows(concepts: Vec<String>, row_ids: Vec<String>, rows: &[Vec<bool>]) -> Result<Self, SigmaError> {
        let k = concepts.len();
        if rows.len() != row_ids.len() {
            return Err(SigmaError::MaskFormat(format!(
                "{} rows but {} row ids",
                rows.len(),
                row_ids.len()
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != k) {
            return Err(SigmaError::MaskFormat(format!("row {} has {} entries, expected {k}", bad + 1, rows[bad].len())));
        }
        if concepts.iter().collect::<BTreeSet<_>>().len() != k {
            return Err(SigmaError::MaskFormat("duplicate concept name".into()));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| concepts[a].cmp(&concepts[b]));
        let bits = rows
            .iter()
            .flat_map(|row| order.iter().map(move |&j| u8::from(row[j])))
            .collect();
        Ok(MaskMatrix {
            concepts: order.iter().map(|&j| concepts[j].clone()).collect(),
            row_ids,
            bits,
        })
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_concepts(&self) -> usize {
        self.concepts.len()
    }

    pub fn get(&self, row: usize, concept: usize) -> bool {
        self.bits[row * self.concepts.len() + concept] == 1
    }

    /// The signature of a row: one byte per concept.
    pub fn row(&self, row: usize) -> &[u8] {
        let k = self.concepts.len();
        &self.bits[row * k..(row + 1) * k]
    }

    pub fn column(&self, concept: usize) -> Vec<bool> {
        (0..self.n_rows()).map(|i| self.get(i, concept)).collect()
    }

    /// Header of comma-separated concept names, then one line of `0`/`1`
    /// characters per row. Every line ends with LF.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let k = self.concepts.len();
        let mut out = Vec::with_capacity(self.concepts.iter().map(|c| c.len() + 1).sum::<usize>() + self.n_rows() * (k + 1));
        out.extend_from_slice(self.concepts.join(",").as_bytes());
        out.push(b'\n');
        for i in 0..self.n_rows() {
            out.extend(self.row(i).iter().map(|&b| b'0' + b));
            out.push(b'\n');
        }
        out
    }

    /// Reads the canonical format back. The format carries no row ids, so the
    /// caller supplies them.
    pub fn from_canonical(bytes: &[u8], row_ids: Vec<String>) -> Result<Self, SigmaError> {
        let text = std::str::from_utf8(bytes).map_err(|e| SigmaError::MaskFormat(e.to_string()))?;
        let body = text
            .strip_suffix('\n')
            .ok_or_else(|| SigmaError::MaskFormat("missing final newline".into()))?;
        let mut lines = body.split('\n');
        let header = lines.next().unwrap_or_default();
        let concepts: Vec<String> = if header.is_empty() {
            Vec::new()
        } else {
            header.split(',').map(str::to_string).collect()
        };
        let mut sorted = concepts.clone();
        sorted.sort();
        if sorted != concepts {
            return Err(SigmaError::MaskFormat("concepts are not in lexicographic order".into()));
        }
        let rows = lines
            .map(|line| {
                line.bytes()
                    .map(|b| match b {
                        b'0' => Ok(false),
                        b'1' => Ok(true),
                        other => Err(SigmaError::MaskFormat(format!("unexpected byte {other:#04x}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(concepts, row_ids, &rows)
    }
}

/// Mask of `dataset` rows against every sensitive concept.
///
/// `facts` must be materialized. After materialization this is `O(N · k)`
/// set lookups. An ontology without sensitive concepts is rejected unless
/// `allow_trivial` is set, in which case the mask has zero columns.
pub fn build_mask(
    ontology: &Ontology,
    facts: &FactStore,
    dataset: &Dataset,
    allow_trivial: bool,
) -> Result<MaskMatrix, SigmaError> {
    let concepts = ontology.sensitive_concepts();
    if concepts.is_empty() && !allow_trivial {
        return Err(SigmaError::NoSensitiveConcepts);
    }
    let extensions: Vec<BTreeSet<String>> = concepts
        .iter()
        .map(|c| {
            extension(c, ontology, facts)
                .map(|ext| ext.into_iter().collect())
                .expect("sensitive markers are declared concepts")
        })
        .collect();
    let rows: Vec<Vec<bool>> = dataset
        .row_ids
        .iter()
        .map(|id| extensions.iter().map(|ext| ext.contains(id)).collect())
        .collect();
    MaskMatrix::from_rows(concepts, dataset.row_ids.clone(), &rows)
}
