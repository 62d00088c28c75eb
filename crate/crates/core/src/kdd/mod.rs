//! KDD-format connection-record ingest.
//!
//! A record line carries 41 comma-separated feature fields plus an attack
//! label with an optional trailing period:
//!
//! ```text
//! 0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,...,0.00,normal.
//! ```
//!
//! Fields 2 (protocol), 3 (service) and 4 (flag) are symbolic and are mapped
//! to integer codes via [`SymbolMaps`]; every other field must parse as a
//! non-negative finite number. The label maps to a binary decision
//! (attack/normal) and a five-way [`AttackClass`].

mod attacks;
mod sample;
mod symbols;

pub use attacks::{classify, AttackClass};
pub use sample::{
    stratified_indices, stratified_sample, target_counts, ClassRatios, SampleError, SampleReport,
};
pub use symbols::{SymbolMapError, SymbolMaps};

use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::exec::map_indexed;
use crate::mask::FEATURE_COUNT;

/// Field count per line: 41 features plus the label.
pub const LINE_FIELDS: usize = FEATURE_COUNT + 1;

/// 1-based indices of the symbolic fields.
pub const SYMBOLIC_FIELDS: [usize; 3] = [2, 3, 4];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: expected {LINE_FIELDS} fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: field {field} (`{token}`) is not a non-negative finite number")]
    NumericParse {
        line: usize,
        field: usize,
        token: String,
    },
    #[error("line {line}: unknown {kind} token `{token}`")]
    UnknownSymbol {
        line: usize,
        kind: &'static str,
        token: String,
    },
    #[error("line {line}: unknown attack label `{label}`")]
    UnknownAttack { line: usize, label: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One raw record: 41 trimmed field tokens plus the label (trailing period
/// stripped). Keeps its source line number for error reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionRecord {
    fields: Vec<String>,
    label: String,
    line: usize,
}

impl ConnectionRecord {
    /// Raw token of a 1-based feature field.
    pub fn field(&self, index: usize) -> &str {
        &self.fields[index - 1]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn line(&self) -> usize {
        self.line
    }
}

/// A fully numeric instance: 41 finite features plus the class tag.
/// The binary decision is derived from the class, so the two can never
/// disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericInstance {
    pub features: [f64; FEATURE_COUNT],
    pub class: AttackClass,
}

impl NumericInstance {
    /// 1 for any attack class, 0 for normal.
    pub fn decision(&self) -> u8 {
        self.class.is_attack() as u8
    }

    /// SVM-style label: +1 attack, -1 normal.
    pub fn signed_label(&self) -> i8 {
        if self.class.is_attack() {
            1
        } else {
            -1
        }
    }
}

/// Splits one line into a [`ConnectionRecord`]. `line_number` is carried into
/// any error (pass 0 when unknown).
pub fn parse_line(line: &str, line_number: usize) -> Result<ConnectionRecord, IngestError> {
    let tokens: Vec<&str> = line.trim().split(',').map(str::trim).collect();
    if tokens.len() != LINE_FIELDS {
        return Err(IngestError::FieldCount {
            line: line_number,
            found: tokens.len(),
        });
    }
    let mut fields = Vec::with_capacity(FEATURE_COUNT);
    for (idx, token) in tokens[..FEATURE_COUNT].iter().enumerate() {
        let field = idx + 1;
        if !SYMBOLIC_FIELDS.contains(&field) {
            parse_numeric(token, field, line_number)?;
        }
        fields.push(token.to_string());
    }
    let label = tokens[FEATURE_COUNT].trim_end_matches('.').to_string();
    Ok(ConnectionRecord {
        fields,
        label,
        line: line_number,
    })
}

fn parse_numeric(token: &str, field: usize, line: usize) -> Result<f64, IngestError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() && *v >= 0.0)
        .ok_or_else(|| IngestError::NumericParse {
            line,
            field,
            token: token.to_string(),
        })
}

/// Maps a record to numbers: symbolic fields through `maps`, the label
/// through the attack dictionary, all other fields parsed as-is.
///
/// In strict mode an unmapped symbolic token is an error; otherwise it maps
/// to the reserved code 0. An unknown attack label is an error in both modes
/// because the record would have no decision.
pub fn transform(
    rec: &ConnectionRecord,
    maps: &SymbolMaps,
    strict: bool,
) -> Result<NumericInstance, IngestError> {
    let class = classify(&rec.label).ok_or_else(|| IngestError::UnknownAttack {
        line: rec.line,
        label: rec.label.clone(),
    })?;
    let mut features = [0.0; FEATURE_COUNT];
    for field in 1..=FEATURE_COUNT {
        let token = rec.field(field);
        features[field - 1] = match field {
            2 => symbol_code(
                maps.protocol_code(token),
                "protocol",
                token,
                rec.line,
                strict,
            )?,
            3 => symbol_code(maps.service_code(token), "service", token, rec.line, strict)?,
            4 => symbol_code(maps.flag_code(token), "flag", token, rec.line, strict)?,
            _ => parse_numeric(token, field, rec.line)?,
        };
    }
    Ok(NumericInstance { features, class })
}

fn symbol_code(
    code: Option<u32>,
    kind: &'static str,
    token: &str,
    line: usize,
    strict: bool,
) -> Result<f64, IngestError> {
    match code {
        Some(c) => Ok(f64::from(c)),
        None if strict => Err(IngestError::UnknownSymbol {
            line,
            kind,
            token: token.to_string(),
        }),
        None => Ok(0.0),
    }
}

/// Ingest outcome counters plus the per-class histogram of accepted records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub total_lines: usize,
    pub accepted: usize,
    pub blank: usize,
    pub skipped_field_count: usize,
    pub skipped_numeric: usize,
    pub skipped_unknown_attack: usize,
    pub substituted_symbols: usize,
    pub class_counts: [usize; 5],
}

impl IngestReport {
    pub fn skipped(&self) -> usize {
        self.skipped_field_count + self.skipped_numeric + self.skipped_unknown_attack
    }

    pub fn class_count(&self, class: AttackClass) -> usize {
        self.class_counts[class.index()]
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8}{:>10}{:>10}", "Class", "Count", "Ratio")?;
        for class in AttackClass::ALL {
            let count = self.class_count(class);
            let ratio = if self.accepted == 0 {
                0.0
            } else {
                count as f64 / self.accepted as f64 * 100.0
            };
            writeln!(f, "{:<8}{:>10}{:>9.2}%", class.name(), count, ratio)?;
        }
        let total_ratio = if self.accepted == 0 { 0.0 } else { 100.0 };
        writeln!(
            f,
            "{:<8}{:>10}{:>9.2}%",
            "Total", self.accepted, total_ratio
        )?;
        if self.skipped() > 0 || self.blank > 0 || self.substituted_symbols > 0 {
            writeln!(
                f,
                "skipped: {} (field-count {}, numeric {}, unknown-attack {}), blank {}, \
                 unknown symbols mapped to 0: {}",
                self.skipped(),
                self.skipped_field_count,
                self.skipped_numeric,
                self.skipped_unknown_attack,
                self.blank,
                self.substituted_symbols,
            )?;
        }
        Ok(())
    }
}

/// Loads a record file. Lenient mode (default) skips malformed lines and
/// counts them in the report; strict mode returns the first error. Parsing
/// runs over chunks in parallel but the output preserves file order.
pub fn load_dataset(
    path: &Path,
    maps: &SymbolMaps,
    strict: bool,
) -> Result<(Vec<NumericInstance>, IngestReport), IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_dataset_str(&text, maps, strict)
}

/// [`load_dataset`] over in-memory text; line numbers start at 1.
pub fn load_dataset_str(
    text: &str,
    maps: &SymbolMaps,
    strict: bool,
) -> Result<(Vec<NumericInstance>, IngestReport), IngestError> {
    let lines: Vec<&str> = text.lines().collect();
    let parsed = map_indexed(lines.len(), |i| {
        let line = lines[i].trim();
        if line.is_empty() {
            return None;
        }
        Some(parse_line(line, i + 1).and_then(|rec| {
            let substituted = count_unknown_symbols(&rec, maps);
            transform(&rec, maps, strict).map(|inst| (inst, substituted))
        }))
    });

    let mut report = IngestReport {
        total_lines: lines.len(),
        ..IngestReport::default()
    };
    let mut instances = Vec::new();
    for outcome in parsed {
        match outcome {
            None => report.blank += 1,
            Some(Ok((inst, substituted))) => {
                report.accepted += 1;
                report.substituted_symbols += substituted;
                report.class_counts[inst.class.index()] += 1;
                instances.push(inst);
            }
            Some(Err(err)) if strict => return Err(err),
            Some(Err(err)) => match err {
                IngestError::FieldCount { .. } => report.skipped_field_count += 1,
                IngestError::NumericParse { .. } => report.skipped_numeric += 1,
                IngestError::UnknownAttack { .. } => report.skipped_unknown_attack += 1,
                // lenient transform never yields these two
                IngestError::UnknownSymbol { .. } | IngestError::Io { .. } => {
                    report.skipped_numeric += 1
                }
            },
        }
    }
    Ok((instances, report))
}

fn count_unknown_symbols(rec: &ConnectionRecord, maps: &SymbolMaps) -> usize {
    [
        maps.protocol_code(rec.field(2)),
        maps.service_code(rec.field(3)),
        maps.flag_code(rec.field(4)),
    ]
    .iter()
    .filter(|c| c.is_none())
    .count()
}
