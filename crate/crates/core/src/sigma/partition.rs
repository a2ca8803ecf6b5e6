use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{MaskMatrix, SigmaError};

/// Rows grouped by identical mask signature.
///
/// Atom ids follow the lexicographic order of the signatures, so the ids do
/// not change when rows are shuffled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomPartition {
    atom_of: Vec<usize>,
    signatures: Vec<Vec<u8>>,
    sizes: Vec<usize>,
}

impl AtomPartition {
    fn from_signatures<'a>(rows: impl ExactSizeIterator<Item = &'a [u8]> + Clone) -> Self {
        let mut ids: BTreeMap<&[u8], usize> = BTreeMap::new();
        for sig in rows.clone() {
            ids.entry(sig).or_insert(0);
        }
        for (id, slot) in ids.values_mut().enumerate() {
            *slot = id;
        }
        let mut sizes = vec![0; ids.len()];
        let atom_of: Vec<usize> = rows
            .map(|sig| {
                let id = ids[sig];
                sizes[id] += 1;
                id
            })
            .collect();
        AtomPartition {
            atom_of,
            signatures: ids.keys().map(|s| s.to_vec()).collect(),
            sizes,
        }
    }

    /// Partition from arbitrary group labels.
    ///
    /// Each label is encoded as a fixed-width big-endian bit signature, so atom
    /// ids are the ranks of the distinct labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let max = labels.iter().copied().max().unwrap_or(0);
        let width = (usize::BITS - max.leading_zeros()) as usize;
        let encoded: Vec<Vec<u8>> = labels
            .iter()
            .map(|&l| (0..width).rev().map(|b| ((l >> b) & 1) as u8).collect())
            .collect();
        Self::from_signatures(encoded.iter().map(Vec::as_slice))
    }

    pub fn n_rows(&self) -> usize {
        self.atom_of.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.sizes.len()
    }

    /// Atom id of every row.
    pub fn labels(&self) -> &[usize] {
        &self.atom_of
    }

    pub fn atom_of(&self, row: usize) -> usize {
        self.atom_of[row]
    }

    pub fn signatures(&self) -> &[Vec<u8>] {
        &self.signatures
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Rows of atom `atom`, ascending.
    pub fn members(&self, atom: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.atom_of[i] == atom).collect()
    }

    /// Rows of every atom, ascending within each atom.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (i, &g) in self.atom_of.iter().enumerate() {
            groups[g].push(i);
        }
        groups
    }

    /// Number of events in the generated σ-algebra, `2^#atoms`, if it fits.
    pub fn algebra_size(&self) -> Option<u128> {
        1u128.checked_shl(self.n_atoms() as u32)
    }
}

/// Atoms of the σ-algebra generated by the mask columns.
pub fn atoms(mask: &MaskMatrix) -> AtomPartition {
    AtomPartition::from_signatures((0..mask.n_rows()).map(|i| mask.row(i)))
}

/// Boolean combination of generator events (mask columns, 0-based).
///
/// Text syntax: `C0`, `!e`, `a & b`, `a | b`, parentheses, and the constants
/// `empty` and `all`. `&` binds tighter than `|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventExpr {
    Generator(usize),
    Complement(Box<EventExpr>),
    Intersection(Box<EventExpr>, Box<EventExpr>),
    Union(Box<EventExpr>, Box<EventExpr>),
    Empty,
    All,
}

impl EventExpr {
    pub fn complement(e: EventExpr) -> Self {
        EventExpr::Complement(Box::new(e))
    }

    pub fn and(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::Intersection(Box::new(a), Box::new(b))
    }

    pub fn or(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::Union(Box::new(a), Box::new(b))
    }

    fn max_generator(&self) -> Option<usize> {
        match self {
            EventExpr::Generator(j) => Some(*j),
            EventExpr::Complement(e) => e.max_generator(),
            EventExpr::Intersection(a, b) | EventExpr::Union(a, b) => a.max_generator().max(b.max_generator()),
            EventExpr::Empty | EventExpr::All => None,
        }
    }

    /// Whether a row with this signature lies in the event.
    pub fn contains(&self, signature: &[u8]) -> bool {
        match self {
            EventExpr::Generator(j) => signature[*j] == 1,
            EventExpr::Complement(e) => !e.contains(signature),
            EventExpr::Intersection(a, b) => a.contains(signature) && b.contains(signature),
            EventExpr::Union(a, b) => a.contains(signature) || b.contains(signature),
            EventExpr::Empty => false,
            EventExpr::All => true,
        }
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventExpr::Generator(j) => write!(f, "C{j}"),
            EventExpr::Complement(e) => write!(f, "!({e})"),
            EventExpr::Intersection(a, b) => write!(f, "({a} & {b})"),
            EventExpr::Union(a, b) => write!(f, "({a} | {b})"),
            EventExpr::Empty => f.write_str("empty"),
            EventExpr::All => f.write_str("all"),
        }
    }
}

struct ExprParser<'a> {
    src: &'a [u8],
    at: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.src.len() && self.src[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.at) == Some(&c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, msg: &str) -> SigmaError {
        SigmaError::BadExpression(format!("{msg} at offset {}", self.at))
    }

    fn union(&mut self) -> Result<EventExpr, SigmaError> {
        let mut acc = self.intersection()?;
        while self.eat(b'|') {
            acc = EventExpr::or(acc, self.intersection()?);
        }
        Ok(acc)
    }

    fn intersection(&mut self) -> Result<EventExpr, SigmaError> {
        let mut acc = self.factor()?;
        while self.eat(b'&') {
            acc = EventExpr::and(acc, self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<EventExpr, SigmaError> {
        if self.eat(b'!') {
            return Ok(EventExpr::complement(self.factor()?));
        }
        if self.eat(b'(') {
            let inner = self.union()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(inner);
        }
        self.skip_ws();
        let start = self.at;
        while self.at < self.src.len() && self.src[self.at].is_ascii_alphanumeric() {
            self.at += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.at]).expect("ascii");
        match word {
            "empty" => Ok(EventExpr::Empty),
            "all" => Ok(EventExpr::All),
            _ => {
                let digits = word.strip_prefix('C').unwrap_or(word);
                digits
                    .parse()
                    .map(EventExpr::Generator)
                    .map_err(|_| self.err(&format!("expected a generator, found {word:?}")))
            }
        }
    }
}

impl FromStr for EventExpr {
    type Err = SigmaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = ExprParser { src: s.as_bytes(), at: 0 };
        let expr = parser.union()?;
        parser.skip_ws();
        if parser.at != s.len() {
            return Err(parser.err("trailing input"));
        }
        Ok(expr)
    }
}

/// Rows (0-based, ascending) in the event described by `expr`.
///
/// Evaluated atom by atom, so the result is always a union of atoms.
pub fn event_membership(expr: &EventExpr, partition: &AtomPartition, mask: &MaskMatrix) -> Result<Vec<usize>, SigmaError> {
    if let Some(j) = expr.max_generator() {
        if j >= mask.n_concepts() {
            return Err(SigmaError::BadExpression(format!(
                "generator C{j} out of range (mask has {} columns)",
                mask.n_concepts()
            )));
        }
    }
    if partition.n_rows() != mask.n_rows() {
        return Err(SigmaError::BadExpression("partition and mask disagree on row count".into()));
    }
    let selected: Vec<bool> = partition.signatures().iter().map(|sig| expr.contains(sig)).collect();
    Ok((0..partition.n_rows()).filter(|&i| selected[partition.atom_of(i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(columns: &[&[u8]]) -> MaskMatrix {
        let n = columns[0].len();
        let rows: Vec<Vec<bool>> = (0..n).map(|i| columns.iter().map(|c| c[i] == 1).collect()).collect();
        let names = (0..columns.len()).map(|j| format!("C{j}")).collect();
        MaskMatrix::from_rows(names, (0..n).map(|i| format!("r{i}")).collect(), &rows).unwrap()
    }

    #[test]
    fn groups_identical_rows() {
        // rows [0,0], [0,1], [0,0]
        let m = mask(&[&[0, 0, 0], &[0, 1, 0]]);
        let p = atoms(&m);
        assert_eq!(p.n_atoms(), 2);
        assert_eq!(p.sizes(), [2, 1]);
        assert_eq!(p.labels(), [0, 1, 0]);
        assert_eq!(p.signatures(), [vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn lexicographic_ids_survive_shuffles() {
        let a = atoms(&mask(&[&[1, 0, 1, 0]]));
        let b = atoms(&mask(&[&[0, 1, 0, 1]]));
        assert_eq!(a.signatures(), b.signatures());
        assert_eq!(a.labels(), [1, 0, 1, 0]);
        assert_eq!(b.labels(), [0, 1, 0, 1]);
    }

    #[test]
    fn all_eight_signatures() {
        let c0: Vec<u8> = (0..8).map(|i| (i >> 2) & 1).collect();
        let c1: Vec<u8> = (0..8).map(|i| (i >> 1) & 1).collect();
        let c2: Vec<u8> = (0..8).map(|i| i & 1).collect();
        let p = atoms(&mask(&[&c0, &c1, &c2]));
        assert_eq!(p.n_atoms(), 8);
        assert_eq!(p.algebra_size(), Some(256));
        assert_eq!(p.labels(), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn complement_and_intersection() {
        let m = mask(&[&[1, 0, 1]]);
        let p = atoms(&m);
        let e: EventExpr = "!C0".parse().unwrap();
        // 1-based row {2}
        assert_eq!(event_membership(&e, &p, &m).unwrap(), vec![1]);

        let m = mask(&[&[1, 1, 0], &[1, 0, 0]]);
        let p = atoms(&m);
        let e: EventExpr = "C0 & C1".parse().unwrap();
        assert_eq!(event_membership(&e, &p, &m).unwrap(), vec![0]);
        let e: EventExpr = "C0 | C1 & !C0".parse().unwrap();
        assert_eq!(event_membership(&e, &p, &m).unwrap(), vec![0, 1]);
        assert!(event_membership(&"all".parse().unwrap(), &p, &m).unwrap().len() == 3);
        assert!(event_membership(&"empty".parse().unwrap(), &p, &m).unwrap().is_empty());
    }

    #[test]
    fn malformed_expressions() {
        for bad in ["", "C", "C0 &", "(C0", "C0 C1", "x1", "!"] {
            assert!(bad.parse::<EventExpr>().is_err(), "{bad:?}");
        }
        let m = mask(&[&[1, 0]]);
        let p = atoms(&m);
        assert!(matches!(
            event_membership(&EventExpr::Generator(1), &p, &m),
            Err(SigmaError::BadExpression(_))
        ));
    }

    #[test]
    fn display_round_trips() {
        let e: EventExpr = "!(C0 & C2) | C1 & all".parse().unwrap();
        assert_eq!(e.to_string().parse::<EventExpr>().unwrap(), e);
    }

    #[test]
    fn from_labels_ranks_labels() {
        let p = AtomPartition::from_labels(&[5, 2, 5, 9]);
        assert_eq!(p.labels(), [1, 0, 1, 2]);
        assert_eq!(p.sizes(), [1, 2, 1]);
        let single = AtomPartition::from_labels(&[0, 0, 0]);
        assert_eq!(single.n_atoms(), 1);
    }
}
