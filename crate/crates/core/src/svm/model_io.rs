//! Versioned line-oriented model persistence.
//!
//! ```text
//! svm-model v1
//! gamma=<f>
//! bias=<f>
//! mask_provenance=<tag>
//! mask=<i>,<i>,...
//! scaling=<min>:<max>,<min>:<max>,...
//! support_vectors=<n>
//! <coefficient> <index>:<value> ...     (n lines, sparse over mask positions)
//! ```
//!
//! Floats are written in shortest round-trip form, so a loaded model scores
//! identically to the saved one.

use std::fs;
use std::path::Path;

use super::sparse::{fmt_sparse_values, parse_sparse_values};
use super::{ScalingModel, SvmError, SvmModel};
use crate::mask::FeatureMask;

const MAGIC: &str = "svm-model v1";

pub fn model_to_text(model: &SvmModel) -> Result<String, SvmError> {
    if model.support_vector_count() == 0 {
        return Err(SvmError::NoSupportVectors);
    }
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("gamma={}\n", model.gamma()));
    out.push_str(&format!("bias={}\n", model.bias()));
    out.push_str(&format!("mask_provenance={}\n", model.mask().provenance()));
    out.push_str(&format!(
        "mask={}\n",
        model
            .mask()
            .indices()
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    out.push_str(&format!(
        "scaling={}\n",
        model
            .scaling()
            .bounds()
            .iter()
            .map(|(lo, hi)| format!("{lo}:{hi}"))
            .collect::<Vec<_>>()
            .join(",")
    ));
    out.push_str(&format!(
        "support_vectors={}\n",
        model.support_vector_count()
    ));
    for (sv, coeff) in model.support_vectors().iter().zip(model.coefficients()) {
        let values = fmt_sparse_values(sv);
        if values.is_empty() {
            out.push_str(&format!("{coeff}\n"));
        } else {
            out.push_str(&format!("{coeff} {values}\n"));
        }
    }
    Ok(out)
}

/// Writes the model, refusing one with no support vectors.
pub fn save_model(model: &SvmModel, path: &Path) -> Result<(), SvmError> {
    fs::write(path, model_to_text(model)?)?;
    Ok(())
}

/// Parses model text. Leading `#` lines before the magic are tolerated so
/// callers may prepend their own metadata.
pub fn model_from_text(text: &str) -> Result<SvmModel, SvmError> {
    let bad = |msg: &str| SvmError::FormatVersion(msg.to_string());
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    if lines.next() != Some(MAGIC) {
        return Err(bad("missing `svm-model v1` header"));
    }
    let mut field = |name: &str| -> Result<String, SvmError> {
        let line = lines
            .next()
            .ok_or_else(|| bad(&format!("truncated before `{name}`")))?;
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| bad(&format!("expected `{name}=`")))
    };
    let gamma: f64 = field("gamma")?.parse().map_err(|_| bad("bad gamma"))?;
    let bias: f64 = field("bias")?.parse().map_err(|_| bad("bad bias"))?;
    let provenance = field("mask_provenance")?
        .parse()
        .map_err(|_| bad("bad provenance"))?;
    let mask_indices: Vec<usize> = field("mask")?
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("bad mask index"))?;
    let mask = FeatureMask::new(mask_indices, provenance).map_err(|e| bad(&e.to_string()))?;
    let bounds: Vec<(f64, f64)> = field("scaling")?
        .split(',')
        .map(|pair| {
            let (lo, hi) = pair.split_once(':')?;
            Some((lo.parse().ok()?, hi.parse().ok()?))
        })
        .collect::<Option<_>>()
        .ok_or_else(|| bad("bad scaling bounds"))?;
    let scaling = ScalingModel::from_bounds(bounds).map_err(|e| bad(&e.to_string()))?;
    let count: usize = field("support_vectors")?
        .parse()
        .map_err(|_| bad("bad count"))?;

    let width = mask.len();
    let mut support_vectors = Vec::with_capacity(count);
    let mut coefficients = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| bad("truncated support vectors"))?;
        let (coeff, rest) = match line.split_once(' ') {
            Some((c, rest)) => (c, rest),
            None => (line, ""),
        };
        coefficients.push(coeff.parse::<f64>().map_err(|_| bad("bad coefficient"))?);
        support_vectors.push(parse_sparse_values(rest, width).map_err(|e| bad(&e))?);
    }
    if gamma.is_nan() || gamma <= 0.0 || !bias.is_finite() {
        return Err(bad("gamma/bias out of range"));
    }
    SvmModel::from_parts(support_vectors, coefficients, bias, gamma, scaling, mask)
}

pub fn load_model(path: &Path) -> Result<SvmModel, SvmError> {
    model_from_text(&fs::read_to_string(path)?)
}
