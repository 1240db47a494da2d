use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::MotifError;

/// Per-position nucleotide probabilities, columns in A,C,G,T order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionProbabilityMatrix {
    /// Matrix identifier (first header token).
    pub name: String,
    /// Transcription factor name, when the header carries one.
    pub tf_name: Option<String>,
    pub columns: Vec<[f64; 4]>,
}

impl PositionProbabilityMatrix {
    /// Normalizes each column of a count (or probability) matrix.
    pub fn from_counts(name: impl Into<String>, counts: &[[f64; 4]]) -> Result<Self, MotifError> {
        let name = name.into();
        let bad = |reason: &str| MotifError::MalformedMotif {
            motif: Some(name.clone()),
            reason: reason.to_string(),
        };
        if counts.is_empty() {
            return Err(bad("motif has no columns"));
        }
        let mut columns = Vec::with_capacity(counts.len());
        for col in counts {
            if col.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(bad("negative or non-finite entry"));
            }
            let total: f64 = col.iter().sum();
            if total <= 0.0 {
                return Err(bad("column sums to zero"));
            }
            columns.push(col.map(|v| v / total));
        }
        Ok(PositionProbabilityMatrix {
            name,
            tf_name: None,
            columns,
        })
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }
}

/// Parses one or more JASPAR-format matrices.
///
/// Each motif is a `>ID NAME` header followed by four rows `A [ .. ]`,
/// `C [ .. ]`, `G [ .. ]`, `T [ .. ]`. Brackets are optional. Counts and
/// probabilities are both accepted; columns are normalized by their sums.
pub fn parse_jaspar<R: BufRead>(reader: R) -> Result<Vec<PositionProbabilityMatrix>, MotifError> {
    let mut motifs = Vec::new();
    let mut current: Option<(String, Option<String>, [Option<Vec<f64>>; 4])> = None;

    let finish = |m: (String, Option<String>, [Option<Vec<f64>>; 4])| -> Result<PositionProbabilityMatrix, MotifError> {
        let (name, tf_name, rows) = m;
        let bad = |reason: String| MotifError::MalformedMotif {
            motif: Some(name.clone()),
            reason,
        };
        let mut full: Vec<Vec<f64>> = Vec::with_capacity(4);
        for (row, letter) in rows.into_iter().zip(['A', 'C', 'G', 'T']) {
            full.push(row.ok_or_else(|| bad(format!("missing {letter} row")))?);
        }
        let width = full[0].len();
        if full.iter().any(|r| r.len() != width) {
            return Err(bad("rows have unequal width".into()));
        }
        let counts: Vec<[f64; 4]> = (0..width)
            .map(|i| [full[0][i], full[1][i], full[2][i], full[3][i]])
            .collect();
        let mut ppm = PositionProbabilityMatrix::from_counts(name.clone(), &counts)?;
        ppm.tf_name = tf_name;
        Ok(ppm)
    };

    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| MotifError::Io(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            if let Some(m) = current.take() {
                motifs.push(finish(m)?);
            }
            let mut parts = header.split_whitespace();
            let name = parts.next().ok_or_else(|| MotifError::MalformedMotif {
                motif: None,
                reason: format!("line {}: empty header", i + 1),
            })?;
            let rest: Vec<&str> = parts.collect();
            let tf = (!rest.is_empty()).then(|| rest.join(" "));
            current = Some((name.to_string(), tf, [None, None, None, None]));
            continue;
        }
        let Some((name, _, rows)) = current.as_mut() else {
            return Err(MotifError::MalformedMotif {
                motif: None,
                reason: format!("line {}: matrix row before any header", i + 1),
            });
        };
        let bad = |reason: String| MotifError::MalformedMotif {
            motif: Some(name.clone()),
            reason: format!("line {}: {reason}", i + 1),
        };
        let mut chars = line.chars();
        let letter = chars.next().unwrap().to_ascii_uppercase();
        let idx = match letter {
            'A' => 0,
            'C' => 1,
            'G' => 2,
            'T' => 3,
            other => return Err(bad(format!("unexpected row label {other:?}"))),
        };
        if rows[idx].is_some() {
            return Err(bad(format!("duplicate {letter} row")));
        }
        let body = chars.as_str().replace(['[', ']'], " ");
        let values = body
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number {t:?}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        if values.is_empty() {
            return Err(bad(format!("{letter} row is empty")));
        }
        if values.iter().any(|v| *v < 0.0) {
            return Err(bad("negative entry".into()));
        }
        rows[idx] = Some(values);
    }
    if let Some(m) = current.take() {
        motifs.push(finish(m)?);
    }
    Ok(motifs)
}

/// Renders matrices back to JASPAR text (probabilities).
pub fn render_jaspar(ppms: &[PositionProbabilityMatrix]) -> String {
    let mut out = String::new();
    for p in ppms {
        out.push('>');
        out.push_str(&p.name);
        if let Some(tf) = &p.tf_name {
            out.push(' ');
            out.push_str(tf);
        }
        out.push('\n');
        for (b, letter) in ['A', 'C', 'G', 'T'].iter().enumerate() {
            out.push_str(&format!("{letter} ["));
            for c in &p.columns {
                out.push_str(&format!(" {}", c[b]));
            }
            out.push_str(" ]\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_matrix() {
        let m = parse_jaspar(">M1 T\nA [ 1 0 ]\nC [ 0 1 ]\nG [ 0 0 ]\nT [ 0 0 ]".as_bytes()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].name, "M1");
        assert_eq!(m[0].tf_name.as_deref(), Some("T"));
        assert_eq!(m[0].columns, vec![[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]);
    }

    #[test]
    fn counts_are_normalized() {
        let m = parse_jaspar(">M2 X\nA[2]\nC[2]\nG[0]\nT[0]\n".as_bytes()).unwrap();
        assert_eq!(m[0].columns, vec![[0.5, 0.5, 0.0, 0.0]]);
    }

    #[test]
    fn several_motifs_and_plain_rows() {
        let text = ">A1 one\nA 3 0\nC 1 0\nG 0 4\nT 0 0\n\n>B2\nA [1]\nC [1]\nG [1]\nT [1]\n";
        let m = parse_jaspar(text.as_bytes()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].columns[0], [0.75, 0.25, 0.0, 0.0]);
        assert_eq!(m[1].tf_name, None);
        assert_eq!(m[1].columns, vec![[0.25; 4]]);
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            ">M\nA [1 0]\nC [0 1]\nG [0 0]\nT [0]\n",     // ragged
            ">M\nA [1 0]\nC [0 1]\nG [0 0]\n",            // missing row
            ">M\nA [1 -1]\nC [0 1]\nG [0 0]\nT [0 1]\n",  // negative
            ">M\nA [0 1]\nC [0 1]\nG [0 0]\nT [0 0]\n",   // zero column
            "A [1]\nC [0]\nG [0]\nT [0]\n",               // no header
            ">M\nA [1]\nA [1]\nG [0]\nT [0]\n",           // duplicate
            ">M\nA [x]\nC [0]\nG [0]\nT [0]\n",           // bad number
        ];
        for c in cases {
            assert!(
                matches!(parse_jaspar(c.as_bytes()), Err(MotifError::MalformedMotif { .. })),
                "{c:?}"
            );
        }
    }

    #[test]
    fn render_round_trip() {
        let text = ">A1 one\nA 3 0\nC 1 0\nG 0 4\nT 0 0\n";
        let m = parse_jaspar(text.as_bytes()).unwrap();
        let back = parse_jaspar(render_jaspar(&m).as_bytes()).unwrap();
        assert_eq!(m, back);
    }
}
