//! Ordered feature-index subsets and their text serialization.
//!
//! A [`FeatureMask`] is the common currency between the selection stages
//! (rough-set reduct, entropy ranking) and the SVM stage: a strictly
//! increasing list of 1-based feature indices plus a provenance tag saying
//! where the subset came from.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of features in a connection record.
pub const FEATURE_COUNT: usize = 41;

/// Feature names in record order (index 1 = `duration`, ... index 41 =
/// `dst_host_srv_rerror_rate`).
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// Name of a 1-based feature index, if in range.
pub fn feature_name(index: usize) -> Option<&'static str> {
    if (1..=FEATURE_COUNT).contains(&index) {
        Some(FEATURE_NAMES[index - 1])
    } else {
        None
    }
}

/// Where a feature subset came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Greedy rough-set reduct search.
    Reduct,
    /// Shipped 29-feature reference subset.
    Reference,
    /// Information-gain ranking.
    Entropy,
    /// All 41 features.
    Full,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Reduct => "reduct",
            Provenance::Reference => "reference",
            Provenance::Entropy => "entropy",
            Provenance::Full => "full",
        }
    }
}

impl FromStr for Provenance {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, MaskError> {
        match s {
            "reduct" => Ok(Provenance::Reduct),
            "reference" => Ok(Provenance::Reference),
            "entropy" => Ok(Provenance::Entropy),
            "full" => Ok(Provenance::Full),
            other => Err(MaskError::Format(format!("unknown provenance `{other}`"))),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("feature index {0} out of range 1..={FEATURE_COUNT}")]
    OutOfRange(usize),
    #[error("duplicate feature index {0}")]
    Duplicate(usize),
    #[error("malformed mask text: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// An ordered subset of distinct 1-based feature indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMask {
    indices: Vec<usize>,
    provenance: Provenance,
}

impl FeatureMask {
    /// Builds a mask from arbitrary-order indices. Indices are sorted; out of
    /// range or duplicate entries are rejected.
    pub fn new(mut indices: Vec<usize>, provenance: Provenance) -> Result<Self, MaskError> {
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(MaskError::Duplicate(pair[0]));
            }
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > FEATURE_COUNT) {
            return Err(MaskError::OutOfRange(bad));
        }
        Ok(FeatureMask {
            indices,
            provenance,
        })
    }

    /// All 41 features.
    pub fn full() -> Self {
        FeatureMask {
            indices: (1..=FEATURE_COUNT).collect(),
            provenance: Provenance::Full,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Projects a 41-value feature row onto this mask.
    pub fn project(&self, features: &[f64; FEATURE_COUNT]) -> Vec<f64> {
        self.indices.iter().map(|&i| features[i - 1]).collect()
    }

    /// Set comparison against a reference mask: indices in both, indices only
    /// here, and indices only in the reference.
    pub fn diff(&self, reference: &FeatureMask) -> MaskDiff {
        let common = self
            .indices
            .iter()
            .copied()
            .filter(|i| reference.contains(*i))
            .collect();
        let added = self
            .indices
            .iter()
            .copied()
            .filter(|i| !reference.contains(*i))
            .collect();
        let removed = reference
            .indices
            .iter()
            .copied()
            .filter(|i| !self.contains(*i))
            .collect();
        MaskDiff {
            common,
            added,
            removed,
        }
    }

    /// Two-line text form: a provenance header, then the comma-separated
    /// indices.
    pub fn to_text(&self) -> String {
        format!(
            "# provenance={}\n{}\n",
            self.provenance,
            join_indices(&self.indices)
        )
    }

    /// Parses [`to_text`](Self::to_text) output. Extra `#` header lines are
    /// tolerated so callers may prepend their own metadata.
    pub fn from_text(text: &str) -> Result<Self, MaskError> {
        let mut provenance = None;
        let mut indices = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(tag) = rest.strip_prefix("provenance=") {
                    provenance = Some(tag.trim().parse()?);
                }
                continue;
            }
            if indices.is_some() {
                return Err(MaskError::Format("more than one index line".into()));
            }
            indices = Some(parse_indices(line)?);
        }
        let provenance =
            provenance.ok_or_else(|| MaskError::Format("missing provenance header".into()))?;
        // an empty mask serializes as a blank index line
        FeatureMask::new(indices.unwrap_or_default(), provenance)
    }

    pub fn save(&self, path: &Path) -> Result<(), MaskError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MaskError> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// Result of [`FeatureMask::diff`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskDiff {
    pub common: Vec<usize>,
    pub added: Vec<usize>,
    pub removed: Vec<usize>,
}

impl fmt::Display for MaskDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "common: {} ({})",
            self.common.len(),
            join_indices(&self.common)
        )?;
        writeln!(
            f,
            "added: {} ({})",
            self.added.len(),
            join_indices(&self.added)
        )?;
        write!(
            f,
            "removed: {} ({})",
            self.removed.len(),
            join_indices(&self.removed)
        )
    }
}

fn join_indices(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_indices(line: &str) -> Result<Vec<usize>, MaskError> {
    if line.is_empty() {
        return Ok(Vec::new());
    }
    line.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| MaskError::Format(format!("bad index `{tok}`")))
        })
        .collect()
}
