//! Nucleotide alphabet, fixed-length sequences, and the plain-text ingestion
//! paths (FASTA and fitness TSV).
//!
//! The alphabet is exactly `{A, C, G, T}` with codes `0..4` in that order.
//! Ambiguity codes are rejected rather than silently mapped.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

/// Errors raised while parsing sequences and sequence tables.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SeqError {
    #[error("invalid nucleotide {symbol:?} at position {position}")]
    InvalidCharacter { symbol: char, position: usize },
    #[error("expected sequence of length {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("empty sequence")]
    Empty,
    #[error("malformed FASTA at line {line}: {reason}")]
    MalformedFasta { line: usize, reason: String },
    #[error("fitness table has no header line")]
    HeaderMissing,
    #[error("fitness header must start with a `sequence` column followed by at least one label")]
    BadHeader,
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCountMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: non-numeric fitness value {value:?}")]
    NonNumericFitness { line: usize, value: String },
    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: Box<SeqError>,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SeqError {
    fn from(e: std::io::Error) -> Self {
        SeqError::Io(e.to_string())
    }
}

/// One of the four DNA bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Nucleotide {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Inverse of [`Nucleotide::code`]; `None` for codes outside `0..4`.
    #[inline]
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Nucleotide::A),
            1 => Some(Nucleotide::C),
            2 => Some(Nucleotide::G),
            3 => Some(Nucleotide::T),
            _ => None,
        }
    }

    /// Case-insensitive parse of a single base.
    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Nucleotide::A),
            'C' => Some(Nucleotide::C),
            'G' => Some(Nucleotide::G),
            'T' => Some(Nucleotide::T),
            _ => None,
        }
    }

    #[inline]
    pub fn to_char(self) -> char {
        b"ACGT"[self as usize] as char
    }

    /// Watson-Crick complement (A<->T, C<->G).
    #[inline]
    pub fn complement(self) -> Self {
        // with the A,C,G,T code order the complement is 3 - code
        Nucleotide::from_code(3 - self.code()).unwrap()
    }
}

impl fmt::Display for Nucleotide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A non-empty string over `{A, C, G, T}`.
///
/// Length is fixed at construction. Serialized as its upper-case text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    bases: Vec<Nucleotide>,
}

impl Sequence {
    pub fn from_bases(bases: Vec<Nucleotide>) -> Result<Self, SeqError> {
        if bases.is_empty() {
            return Err(SeqError::Empty);
        }
        Ok(Sequence { bases })
    }

    /// Builds a sequence from integer codes; panics on codes outside `0..4`.
    pub fn from_codes(codes: &[u8]) -> Self {
        assert!(!codes.is_empty(), "sequence must be non-empty");
        Sequence {
            bases: codes
                .iter()
                .map(|&c| Nucleotide::from_code(c).expect("nucleotide code out of range"))
                .collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    #[inline]
    pub fn bases(&self) -> &[Nucleotide] {
        &self.bases
    }

    pub fn codes(&self) -> impl Iterator<Item = u8> + '_ {
        self.bases.iter().map(|b| b.code())
    }

    pub fn reverse_complement(&self) -> Sequence {
        Sequence {
            bases: self.bases.iter().rev().map(|b| b.complement()).collect(),
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bases.iter().map(|b| b.to_char()).collect();
        f.write_str(&s)
    }
}

impl std::str::FromStr for Sequence {
    type Err = SeqError;

    /// Parses a sequence of whatever length the text has.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = s.chars().count();
        parse_sequence(s, n)
    }
}

impl Serialize for Sequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `text` into a sequence of exactly `expected_length` bases.
pub fn parse_sequence(text: &str, expected_length: usize) -> Result<Sequence, SeqError> {
    if text.is_empty() {
        return Err(SeqError::Empty);
    }
    let mut bases = Vec::with_capacity(text.len());
    for (position, symbol) in text.chars().enumerate() {
        match Nucleotide::from_char(symbol) {
            Some(n) => bases.push(n),
            None => return Err(SeqError::InvalidCharacter { symbol, position }),
        }
    }
    if bases.len() != expected_length {
        return Err(SeqError::LengthMismatch {
            expected: expected_length,
            found: bases.len(),
        });
    }
    Ok(Sequence { bases })
}

/// Reverse complement of `s`.
pub fn reverse_complement(s: &Sequence) -> Sequence {
    s.reverse_complement()
}

/// Reads FASTA records as `(name, raw body)` pairs without validating bases.
///
/// The name is the header line after `>`, trimmed. Empty lines are skipped and
/// CRLF line endings are accepted.
pub fn parse_fasta<R: BufRead>(reader: R) -> Result<Vec<(String, String)>, SeqError> {
    let mut records: Vec<(String, String)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            records.push((header.trim().to_string(), String::new()));
        } else {
            match records.last_mut() {
                Some((_, body)) => body.push_str(line.trim()),
                None => {
                    return Err(SeqError::MalformedFasta {
                        line: i + 1,
                        reason: "sequence data before the first header".into(),
                    })
                }
            }
        }
    }
    Ok(records)
}

/// Renders `(name, sequence)` pairs as FASTA, one body line per record.
pub fn render_fasta<'a, I>(records: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a Sequence)>,
{
    let mut out = String::new();
    for (name, seq) in records {
        out.push('>');
        out.push_str(name);
        out.push('\n');
        out.push_str(&seq.to_string());
        out.push('\n');
    }
    out
}

/// A sequence with measured (or predicted) fitness per cell-type label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub sequence: Sequence,
    pub fitness: BTreeMap<String, f64>,
}

/// A parsed fitness table: the label order from the header plus its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessTable {
    pub labels: Vec<String>,
    pub records: Vec<FitnessRecord>,
}

impl FitnessTable {
    /// Values of one label in record order, `None` when the label is unknown.
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        if !self.labels.iter().any(|l| l == label) {
            return None;
        }
        Some(self.records.iter().map(|r| r.fitness[label]).collect())
    }
}

/// Parses a tab-separated fitness table with a `sequence<TAB>label...` header.
///
/// Every sequence must have exactly `length` bases.
pub fn parse_fitness_tsv<R: BufRead>(reader: R, length: usize) -> Result<FitnessTable, SeqError> {
    parse_fitness_tsv_inner(reader, Some(length))
}

/// Like [`parse_fitness_tsv`] but takes the design length from the first row.
pub fn parse_fitness_tsv_infer<R: BufRead>(reader: R) -> Result<FitnessTable, SeqError> {
    parse_fitness_tsv_inner(reader, None)
}

fn parse_fitness_tsv_inner<R: BufRead>(
    reader: R,
    mut length: Option<usize>,
) -> Result<FitnessTable, SeqError> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(SeqError::HeaderMissing),
            Some((_, line)) => {
                let line = line?;
                let line = line.trim_end_matches('\r').to_string();
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
    if !columns[0].eq_ignore_ascii_case("sequence") {
        return Err(SeqError::HeaderMissing);
    }
    if columns.len() < 2 {
        return Err(SeqError::BadHeader);
    }
    let labels: Vec<String> = columns[1..].iter().map(|s| s.to_string()).collect();

    let mut records = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns.len() {
            return Err(SeqError::ColumnCountMismatch {
                line: line_no,
                expected: columns.len(),
                found: fields.len(),
            });
        }
        let raw = fields[0].trim();
        let len = *length.get_or_insert(raw.chars().count());
        let sequence = parse_sequence(raw, len).map_err(|e| SeqError::Record {
            line: line_no,
            source: Box::new(e),
        })?;
        let mut fitness = BTreeMap::new();
        for (label, value) in labels.iter().zip(&fields[1..]) {
            let v: f64 = value
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| SeqError::NonNumericFitness {
                    line: line_no,
                    value: value.to_string(),
                })?;
            fitness.insert(label.clone(), v);
        }
        records.push(FitnessRecord { sequence, fitness });
    }
    Ok(FitnessTable { labels, records })
}

/// Renders a fitness table back to TSV; values use the shortest round-trip
/// decimal representation.
pub fn render_fitness_tsv(table: &FitnessTable) -> String {
    let mut out = String::from("sequence");
    for l in &table.labels {
        out.push('\t');
        out.push_str(l);
    }
    out.push('\n');
    for r in &table.records {
        out.push_str(&r.sequence.to_string());
        for l in &table.labels {
            out.push('\t');
            out.push_str(&format!("{}", r.fitness[l]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_sequence_examples() {
        assert_eq!(parse_sequence("acgt", 4).unwrap().to_string(), "ACGT");
        assert!(matches!(
            parse_sequence("ACGN", 4),
            Err(SeqError::InvalidCharacter { symbol: 'N', position: 3 })
        ));
        assert!(matches!(
            parse_sequence("ACG", 4),
            Err(SeqError::LengthMismatch { expected: 4, found: 3 })
        ));
        assert_eq!(parse_sequence("", 0), Err(SeqError::Empty));
    }

    #[test]
    fn codes_are_fixed_order() {
        for (i, n) in Nucleotide::ALL.iter().enumerate() {
            assert_eq!(n.code() as usize, i);
            assert_eq!(Nucleotide::from_code(i as u8), Some(*n));
            assert_eq!(n.complement().complement(), *n);
        }
        assert_eq!(Nucleotide::A.complement(), Nucleotide::T);
        assert_eq!(Nucleotide::C.complement(), Nucleotide::G);
    }

    #[test]
    fn fasta_examples() {
        let r = parse_fasta(">s1\nACGT".as_bytes()).unwrap();
        assert_eq!(r, vec![("s1".to_string(), "ACGT".to_string())]);
        let r = parse_fasta(">s1\nAC\nGT\n>s2\nTT".as_bytes()).unwrap();
        assert_eq!(
            r,
            vec![("s1".into(), "ACGT".into()), ("s2".into(), "TT".into())]
        );
        assert!(matches!(
            parse_fasta("ACGT".as_bytes()),
            Err(SeqError::MalformedFasta { line: 1, .. })
        ));
        let r = parse_fasta(">a\r\nAC\r\n\r\nGT\r\n".as_bytes()).unwrap();
        assert_eq!(r, vec![("a".into(), "ACGT".into())]);
    }

    #[test]
    fn fitness_tsv_examples() {
        let t = parse_fitness_tsv("sequence\thepg2\tk562\nACGT\t0.9\t0.1\n".as_bytes(), 4).unwrap();
        assert_eq!(t.labels, vec!["hepg2", "k562"]);
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].fitness["hepg2"], 0.9);
        assert_eq!(t.records[0].fitness["k562"], 0.1);

        assert!(matches!(
            parse_fitness_tsv("sequence\thepg2\tk562\nACGT\t0.9\n".as_bytes(), 4),
            Err(SeqError::ColumnCountMismatch { line: 2, expected: 3, found: 2 })
        ));
        assert!(matches!(
            parse_fitness_tsv("sequence\thepg2\tk562\nACGT\tx\t0.1\n".as_bytes(), 4),
            Err(SeqError::NonNumericFitness { line: 2, .. })
        ));
        assert!(matches!(
            parse_fitness_tsv("ACGT\t0.9\n".as_bytes(), 4),
            Err(SeqError::HeaderMissing)
        ));
        assert!(matches!(
            parse_fitness_tsv("".as_bytes(), 4),
            Err(SeqError::HeaderMissing)
        ));
        assert!(matches!(
            parse_fitness_tsv("sequence\ta\nACG\t0.1\n".as_bytes(), 4),
            Err(SeqError::Record { line: 2, .. })
        ));
    }

    #[test]
    fn reverse_complement_examples() {
        let rc = |s: &str| reverse_complement(&s.parse().unwrap()).to_string();
        assert_eq!(rc("ACGT"), "ACGT");
        assert_eq!(rc("AAAC"), "GTTT");
        assert_eq!(rc("GGG"), "CCC");
    }

    fn arb_seq(max_len: usize) -> impl Strategy<Value = Sequence> {
        prop::collection::vec(0u8..4, 1..max_len).prop_map(|c| Sequence::from_codes(&c))
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(s in arb_seq(64)) {
            prop_assert_eq!(parse_sequence(&s.to_string(), s.len()).unwrap(), s.clone());
            prop_assert_eq!(parse_sequence(&s.to_string().to_lowercase(), s.len()).unwrap(), s);
        }

        #[test]
        fn reverse_complement_is_involution(s in arb_seq(64)) {
            prop_assert_eq!(s.reverse_complement().reverse_complement(), s);
        }

        #[test]
        fn fitness_tsv_round_trip(
            rows in prop::collection::vec((prop::collection::vec(0u8..4, 8), -1e6f64..1e6, 0f64..1.0), 1..20)
        ) {
            let labels = vec!["t".to_string(), "o".to_string()];
            let records: Vec<FitnessRecord> = rows
                .iter()
                .map(|(c, a, b)| FitnessRecord {
                    sequence: Sequence::from_codes(c),
                    fitness: [("t".to_string(), *a), ("o".to_string(), *b)].into_iter().collect(),
                })
                .collect();
            let table = FitnessTable { labels, records };
            let parsed = parse_fitness_tsv(render_fitness_tsv(&table).as_bytes(), 8).unwrap();
            prop_assert_eq!(&parsed.labels, &table.labels);
            for (p, r) in parsed.records.iter().zip(&table.records) {
                prop_assert_eq!(&p.sequence, &r.sequence);
                for l in &table.labels {
                    prop_assert!((p.fitness[l] - r.fitness[l]).abs() <= 1e-12);
                }
            }
        }
    }
}
