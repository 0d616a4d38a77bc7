//! BIO label schema with fixed-width one-hot codes.
//!
//! Every label owns one slot in a code vector of width [`CODE_WIDTH`]. The
//! standard layout pins `BODOC=0, IODOC=1, BOP=2, IOP=3, BOD=4, IOD=5, BOH=8,
//! O=16`; the remaining categories fill the gaps (`BOL=6, IOL=7, IOH=9,
//! BOPH=10, IOPH=11`) and slots 12 to 15 stay unassigned.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Width of every label code vector.
pub const CODE_WIDTH: usize = 17;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("invalid schema mapping at line {line}: {reason}")]
    InvalidMapping { line: usize, reason: String },
}

/// The six PHI categories scored by the evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Date,
    Doctor,
    Hospital,
    Location,
    Patient,
    Phone,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Date,
        Category::Doctor,
        Category::Hospital,
        Category::Location,
        Category::Patient,
        Category::Phone,
    ];

    /// The `TYPE` attribute used in inline markup, and the de-identification placeholder.
    pub fn tag(self) -> &'static str {
        match self {
            Category::Date => "DATE",
            Category::Doctor => "DOCTOR",
            Category::Hospital => "HOSPITAL",
            Category::Location => "LOCATION",
            Category::Patient => "PATIENT",
            Category::Phone => "PHONE",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.tag() == tag)
    }

    /// Row name in evaluation reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Category::Date => "Date",
            Category::Doctor => "Doctor",
            Category::Hospital => "Hospital",
            Category::Location => "Location",
            Category::Patient => "Patient",
            Category::Phone => "Phone",
        }
    }

    /// Suffix of the short label names (`BOD`, `IODOC`, ...).
    fn code(self) -> &'static str {
        match self {
            Category::Date => "D",
            Category::Doctor => "DOC",
            Category::Hospital => "H",
            Category::Location => "L",
            Category::Patient => "P",
            Category::Phone => "PH",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Index of a label slot in the code vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelId(pub u8);

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    Begin,
    Inside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelKind {
    Outside,
    Phi(Category, Position),
}

impl LabelKind {
    pub fn category(self) -> Option<Category> {
        match self {
            LabelKind::Outside => None,
            LabelKind::Phi(c, _) => Some(c),
        }
    }

    pub fn short_name(self) -> String {
        match self {
            LabelKind::Outside => "O".to_string(),
            LabelKind::Phi(c, Position::Begin) => format!("BO{}", c.code()),
            LabelKind::Phi(c, Position::Inside) => format!("IO{}", c.code()),
        }
    }

    pub fn from_short_name(name: &str) -> Option<LabelKind> {
        if name == "O" {
            return Some(LabelKind::Outside);
        }
        let (position, rest) = match name.split_at_checked(2)? {
            ("BO", rest) => (Position::Begin, rest),
            ("IO", rest) => (Position::Inside, rest),
            _ => return None,
        };
        Category::ALL
            .into_iter()
            .find(|c| c.code() == rest)
            .map(|c| LabelKind::Phi(c, position))
    }
}

/// Bijection between label names and code slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    slots: [Option<LabelKind>; CODE_WIDTH],
    by_name: HashMap<String, LabelId>,
    outside: LabelId,
    begin: [LabelId; 6],
    inside: [LabelId; 6],
}

impl Default for LabelSchema {
    fn default() -> Self {
        use Category::*;
        use Position::*;
        let layout = [
            (0, LabelKind::Phi(Doctor, Begin)),
            (1, LabelKind::Phi(Doctor, Inside)),
            (2, LabelKind::Phi(Patient, Begin)),
            (3, LabelKind::Phi(Patient, Inside)),
            (4, LabelKind::Phi(Date, Begin)),
            (5, LabelKind::Phi(Date, Inside)),
            (6, LabelKind::Phi(Location, Begin)),
            (7, LabelKind::Phi(Location, Inside)),
            (8, LabelKind::Phi(Hospital, Begin)),
            (9, LabelKind::Phi(Hospital, Inside)),
            (10, LabelKind::Phi(Phone, Begin)),
            (11, LabelKind::Phi(Phone, Inside)),
            (16, LabelKind::Outside),
        ];
        LabelSchema::from_layout(&layout).expect("standard layout is complete")
    }
}

impl LabelSchema {
    fn from_layout(layout: &[(usize, LabelKind)]) -> Result<Self, String> {
        let mut slots = [None; CODE_WIDTH];
        let mut by_name = HashMap::new();
        for &(index, kind) in layout {
            if index >= CODE_WIDTH {
                return Err(format!("index {index} outside 0..{CODE_WIDTH}"));
            }
            if slots[index].is_some() {
                return Err(format!("index {index} assigned twice"));
            }
            if by_name.insert(kind.short_name(), LabelId(index as u8)).is_some() {
                return Err(format!("label {} assigned twice", kind.short_name()));
            }
            slots[index] = Some(kind);
        }
        let find = |kind: LabelKind| {
            by_name
                .get(&kind.short_name())
                .copied()
                .ok_or_else(|| format!("label {} missing", kind.short_name()))
        };
        let outside = find(LabelKind::Outside)?;
        let mut begin = [outside; 6];
        let mut inside = [outside; 6];
        for c in Category::ALL {
            begin[c.index()] = find(LabelKind::Phi(c, Position::Begin))?;
            inside[c.index()] = find(LabelKind::Phi(c, Position::Inside))?;
        }
        Ok(LabelSchema { slots, by_name, outside, begin, inside })
    }

    /// Parses a mapping file of `index<TAB>label_name` lines.
    pub fn from_mapping(text: &str) -> Result<Self, LabelError> {
        let mut layout = Vec::new();
        let mut last_line = 0;
        for (lineno, line) in text.lines().enumerate() {
            last_line = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let invalid = |reason: String| LabelError::InvalidMapping { line: lineno + 1, reason };
            let (index, name) = line
                .split_once('\t')
                .ok_or_else(|| invalid("expected `index<TAB>label`".into()))?;
            let index: usize = index
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad index `{index}`")))?;
            let kind = LabelKind::from_short_name(name.trim())
                .ok_or_else(|| invalid(format!("unknown label `{}`", name.trim())))?;
            layout.push((index, kind));
        }
        LabelSchema::from_layout(&layout)
            .map_err(|reason| LabelError::InvalidMapping { line: last_line, reason })
    }

    pub fn to_mapping(&self) -> String {
        let mut out = String::new();
        for (index, kind) in self.slots.iter().enumerate() {
            if let Some(kind) = kind {
                out.push_str(&format!("{index}\t{}\n", kind.short_name()));
            }
        }
        out
    }

    /// Stable 64-bit digest of the mapping, stored in tagger checkpoints.
    pub fn fingerprint(&self) -> u64 {
        let digest = Sha256::digest(self.to_mapping().as_bytes());
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }

    pub fn id(&self, name: &str) -> Result<LabelId, LabelError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| LabelError::UnknownLabel(name.to_string()))
    }

    pub fn name(&self, id: LabelId) -> Option<String> {
        self.kind(id).map(LabelKind::short_name)
    }

    pub fn kind(&self, id: LabelId) -> Option<LabelKind> {
        self.slots.get(id.index()).copied().flatten()
    }

    pub fn category(&self, id: LabelId) -> Option<Category> {
        self.kind(id).and_then(LabelKind::category)
    }

    pub fn is_phi(&self, id: LabelId) -> bool {
        self.category(id).is_some()
    }

    pub fn outside(&self) -> LabelId {
        self.outside
    }

    pub fn begin(&self, category: Category) -> LabelId {
        self.begin[category.index()]
    }

    pub fn inside(&self, category: Category) -> LabelId {
        self.inside[category.index()]
    }

    /// All assigned label ids in index order.
    pub fn ids(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(i, _)| LabelId(i as u8))
    }

    pub fn encode(&self, name: &str) -> Result<[f64; CODE_WIDTH], LabelError> {
        Ok(one_hot(self.id(name)?))
    }

    /// Argmax over the assigned slots; ties go to the smallest index.
    pub fn decode_id(&self, probs: &[f64]) -> LabelId {
        debug_assert_eq!(probs.len(), CODE_WIDTH);
        let mut best: Option<(LabelId, f64)> = None;
        for id in self.ids() {
            let p = probs[id.index()];
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((id, p));
            }
        }
        best.map(|(id, _)| id).unwrap_or(self.outside)
    }

    pub fn decode(&self, probs: &[f64]) -> String {
        self.name(self.decode_id(probs)).expect("decode returns assigned ids")
    }
}

pub fn one_hot(id: LabelId) -> [f64; CODE_WIDTH] {
    let mut code = [0.0; CODE_WIDTH];
    code[id.index()] = 1.0;
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_rows() {
        let s = LabelSchema::default();
        for (name, idx) in [
            ("BODOC", 0),
            ("IODOC", 1),
            ("BOP", 2),
            ("IOP", 3),
            ("BOD", 4),
            ("IOD", 5),
            ("BOH", 8),
            ("O", 16),
        ] {
            assert_eq!(s.id(name).unwrap(), LabelId(idx), "{name}");
        }
        assert_eq!(s.encode("BODOC").unwrap()[0], 1.0);
        assert_eq!(s.encode("O").unwrap()[16], 1.0);
        assert_eq!(s.ids().count(), 13);
        for i in 12..16 {
            assert!(s.kind(LabelId(i)).is_none());
        }
    }

    #[test]
    fn encode_decode_bijection() {
        let s = LabelSchema::default();
        for id in s.ids() {
            let name = s.name(id).unwrap();
            let code = s.encode(&name).unwrap();
            assert_eq!(code.iter().sum::<f64>(), 1.0);
            assert_eq!(code.iter().filter(|&&v| v != 0.0).count(), 1);
            assert_eq!(s.decode(&code), name);
        }
        assert_eq!(s.encode("B-DATE"), Err(LabelError::UnknownLabel("B-DATE".into())));
    }

    #[test]
    fn decode_rules() {
        let s = LabelSchema::default();
        assert_eq!(s.decode(&one_hot(LabelId(4))), "BOD");
        assert_eq!(s.decode(&[0.3; CODE_WIDTH]), "BODOC");
        let mut v = [0.1; CODE_WIDTH];
        v[16] = 0.9;
        assert_eq!(s.decode(&v), "O");
    }

    #[test]
    fn categories_pair_up() {
        let s = LabelSchema::default();
        for c in Category::ALL {
            assert_eq!(s.category(s.begin(c)), Some(c));
            assert_eq!(s.category(s.inside(c)), Some(c));
        }
        assert_eq!(s.category(s.outside()), None);
    }

    #[test]
    fn mapping_round_trip() {
        let s = LabelSchema::default();
        let text = s.to_mapping();
        assert!(text.starts_with("0\tBODOC\n"));
        let back = LabelSchema::from_mapping(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.fingerprint(), s.fingerprint());

        let swapped = text.replace("6\tBOL", "6\tBOPH").replace("10\tBOPH", "10\tBOL");
        let other = LabelSchema::from_mapping(&swapped).unwrap();
        assert_eq!(other.id("BOL").unwrap(), LabelId(10));
        assert_ne!(other.fingerprint(), s.fingerprint());
    }

    #[test]
    fn mapping_errors() {
        assert!(matches!(
            LabelSchema::from_mapping("0\tBODOC\n0\tIODOC\n"),
            Err(LabelError::InvalidMapping { .. })
        ));
        assert!(matches!(
            LabelSchema::from_mapping("17\tO\n"),
            Err(LabelError::InvalidMapping { .. })
        ));
        assert!(matches!(
            LabelSchema::from_mapping("0\tO\n"),
            Err(LabelError::InvalidMapping { .. })
        ));
        assert!(matches!(
            LabelSchema::from_mapping("x\tO\n"),
            Err(LabelError::InvalidMapping { line: 1, .. })
        ));
    }
}
