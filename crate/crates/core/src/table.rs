//! Discrete decision table: objects x attributes of small integer codes plus
//! a binary decision column. This is the input form consumed by the
//! rough-set and entropy modules.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::mask::FEATURE_COUNT;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("attribute ids must be distinct and within 1..={FEATURE_COUNT}")]
    BadAttributes,
    #[error("column/decision lengths disagree")]
    Shape,
    #[error("decision values must be 0 or 1")]
    BadDecision,
    #[error("dump line {line}: {reason}")]
    Dump { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Column-major table of discrete codes with one binary decision per object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTable {
    attributes: Vec<u16>,
    columns: Vec<Vec<u32>>,
    decisions: Vec<u8>,
}

impl DecisionTable {
    pub fn new(
        attributes: Vec<u16>,
        columns: Vec<Vec<u32>>,
        decisions: Vec<u8>,
    ) -> Result<Self, TableError> {
        if attributes.len() != columns.len() {
            return Err(TableError::Shape);
        }
        let mut seen = [false; FEATURE_COUNT + 1];
        for &a in &attributes {
            if a == 0 || a as usize > FEATURE_COUNT || seen[a as usize] {
                return Err(TableError::BadAttributes);
            }
            seen[a as usize] = true;
        }
        if columns.iter().any(|c| c.len() != decisions.len()) {
            return Err(TableError::Shape);
        }
        if decisions.iter().any(|&d| d > 1) {
            return Err(TableError::BadDecision);
        }
        Ok(DecisionTable {
            attributes,
            columns,
            decisions,
        })
    }

    /// Builds a table from row-major code rows.
    pub fn from_rows(
        attributes: Vec<u16>,
        rows: &[Vec<u32>],
        decisions: Vec<u8>,
    ) -> Result<Self, TableError> {
        let width = attributes.len();
        if rows.iter().any(|r| r.len() != width) || rows.len() != decisions.len() {
            return Err(TableError::Shape);
        }
        let columns = (0..width)
            .map(|c| rows.iter().map(|r| r[c]).collect())
            .collect();
        Self::new(attributes, columns, decisions)
    }

    pub fn object_count(&self) -> usize {
        self.decisions.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[u16] {
        &self.attributes
    }

    pub fn decisions(&self) -> &[u8] {
        &self.decisions
    }

    /// Column of codes for an attribute id, if present.
    pub fn column(&self, attribute: u16) -> Option<&[u32]> {
        self.attributes
            .iter()
            .position(|&a| a == attribute)
            .map(|i| self.columns[i].as_slice())
    }

    /// Writes the row-per-object numeric dump: `O:<id>,` prefix, the codes in
    /// attribute order, then the decision.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<(), TableError> {
        let ids: Vec<String> = self.attributes.iter().map(|a| a.to_string()).collect();
        writeln!(w, "# attributes={}", ids.join(","))?;
        for obj in 0..self.object_count() {
            write!(w, "O:{}", obj + 1)?;
            for col in &self.columns {
                write!(w, ",{}", col[obj])?;
            }
            writeln!(w, ",{}", self.decisions[obj])?;
        }
        Ok(())
    }

    pub fn save_dump(&self, path: &Path) -> Result<(), TableError> {
        let mut buf = Vec::new();
        self.write_dump(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    /// Reads a dump. The `O:<id>,` prefix is optional per line; without an
    /// `# attributes=` header the attribute ids default to 1..=k.
    pub fn read_dump<R: BufRead>(r: R) -> Result<Self, TableError> {
        let mut attributes: Option<Vec<u16>> = None;
        let mut rows: Vec<Vec<u32>> = Vec::new();
        let mut decisions: Vec<u8> = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(ids) = rest.trim().strip_prefix("attributes=") {
                    let parsed: Result<Vec<u16>, _> =
                        ids.split(',').map(|t| t.trim().parse()).collect();
                    attributes = Some(parsed.map_err(|_| TableError::Dump {
                        line: line_no,
                        reason: "bad attribute header".into(),
                    })?);
                }
                continue;
            }
            let body = match line.split_once(',') {
                Some((head, rest)) if head.len() > 2 && head[..2].eq_ignore_ascii_case("o:") => {
                    rest
                }
                _ => line,
            };
            let values: Result<Vec<u32>, _> = body.split(',').map(|t| t.trim().parse()).collect();
            let mut values = values.map_err(|_| TableError::Dump {
                line: line_no,
                reason: "bad code".into(),
            })?;
            let decision = values.pop().ok_or(TableError::Dump {
                line: line_no,
                reason: "empty row".into(),
            })?;
            if decision > 1 {
                return Err(TableError::Dump {
                    line: line_no,
                    reason: format!("decision {decision} is not binary"),
                });
            }
            decisions.push(decision as u8);
            rows.push(values);
        }
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(TableError::Shape);
        }
        let attributes = attributes.unwrap_or_else(|| (1..=width as u16).collect::<Vec<u16>>());
        Self::from_rows(attributes, &rows, decisions)
    }

    pub fn load_dump(path: &Path) -> Result<Self, TableError> {
        let text = fs::read_to_string(path)?;
        Self::read_dump(text.as_bytes())
    }
}
