//! Sparse text rows: `<label> <index>:<value> ...` with 1-based indices and
//! zero-valued entries omitted.

use super::SvmError;

/// Formats one labeled row. An all-zero row renders as the bare label.
pub fn sparse_line(label: i8, row: &[f64]) -> String {
    let sign = if label > 0 { "+1" } else { "-1" };
    let values = fmt_sparse_values(row);
    if values.is_empty() {
        sign.to_string()
    } else {
        format!("{sign} {values}")
    }
}

/// One line per row, in order.
pub fn export_sparse(rows: &[Vec<f64>], labels: &[i8]) -> Result<String, SvmError> {
    if rows.len() != labels.len() {
        return Err(SvmError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let mut out = String::new();
    for (row, &label) in rows.iter().zip(labels) {
        out.push_str(&sparse_line(label, row));
        out.push('\n');
    }
    Ok(out)
}

/// `index:value` pairs of the non-zero entries.
pub(crate) fn fmt_sparse_values(row: &[f64]) -> String {
    row.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, v)| format!("{}:{}", i + 1, v))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses `index:value` pairs back into a dense row of `width` values.
pub(crate) fn parse_sparse_values(text: &str, width: usize) -> Result<Vec<f64>, String> {
    let mut row = vec![0.0; width];
    for pair in text.split_whitespace() {
        let (idx, value) = pair
            .split_once(':')
            .ok_or_else(|| format!("bad pair `{pair}`"))?;
        let idx: usize = idx.parse().map_err(|_| format!("bad index `{idx}`"))?;
        if idx == 0 || idx > width {
            return Err(format!("index {idx} outside 1..={width}"));
        }
        row[idx - 1] = value.parse().map_err(|_| format!("bad value `{value}`"))?;
    }
    Ok(row)
}
