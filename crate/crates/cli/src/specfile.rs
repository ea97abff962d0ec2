//! Explicit-matrix channel files.
//!
//! Language-neutral JSON interchange: complex entries as `[re, im]` pairs,
//! row-major, with declared dimensions. Two kinds are accepted:
//!
//! - `"kind": "kraus"` — a list of `d_out x d_in` Kraus operators that sum
//!   to a trace-preserving channel;
//! - `"kind": "choi"` — the `d_out*d_in x d_out*d_in` Choi matrix directly
//!   (output factor most significant).
//!
//! See `docs/matrix-format.md` for the full format description.

use retropast_core::channels::{ChannelSpec, ChoiOperator};
use retropast_core::{C64, ComplexMatrix};
use serde_json::Value;

use crate::CliError;

/// A channel loaded from an explicit-matrix file: either a Kraus-form spec
/// or a raw Choi operator.
pub enum LoadedChannel {
    Spec(ChannelSpec),
    Choi(ChoiOperator),
}

pub fn load_channel(path: &std::path::Path) -> Result<LoadedChannel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))?;
    let kind = doc
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Usage("spec file missing string field 'kind'".into()))?;
    let d_in = get_dim(&doc, "d_in")?;
    let d_out = get_dim(&doc, "d_out")?;
    match kind {
        "kraus" => {
            let list = doc
                .get("matrices")
                .and_then(Value::as_array)
                .ok_or_else(|| CliError::Usage("kraus file missing array field 'matrices'".into()))?;
            if list.is_empty() {
                return Err(CliError::Usage("kraus file has no operators".into()));
            }
            let operators = list
                .iter()
                .map(|v| parse_matrix(v, d_out, d_in))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LoadedChannel::Spec(ChannelSpec::Kraus { operators }))
        }
        "choi" => {
            let n = d_out * d_in;
            let list = doc
                .get("matrices")
                .and_then(Value::as_array)
                .ok_or_else(|| CliError::Usage("choi file missing array field 'matrices'".into()))?;
            if list.len() != 1 {
                return Err(CliError::Usage(
                    "choi file must contain exactly one matrix".into(),
                ));
            }
            let m = parse_matrix(&list[0], n, n)?;
            let choi = ChoiOperator::new(m, d_out, d_in);
            choi.validate()
                .map_err(|e| CliError::Usage(format!("invalid Choi operator: {e}")))?;
            Ok(LoadedChannel::Choi(choi))
        }
        other => Err(CliError::Usage(format!(
            "unknown spec-file kind '{other}' (expected 'kraus' or 'choi')"
        ))),
    }
}

fn get_dim(doc: &Value, field: &str) -> Result<usize, CliError> {
    let d = doc
        .get(field)
        .and_then(Value::as_u64)
        .ok_or_else(|| CliError::Usage(format!("spec file missing integer field '{field}'")))?;
    if d < 1 {
        return Err(CliError::Usage(format!("'{field}' must be >= 1")));
    }
    Ok(d as usize)
}

fn parse_matrix(v: &Value, rows: usize, cols: usize) -> Result<ComplexMatrix, CliError> {
    let r = v
        .get("rows")
        .and_then(Value::as_u64)
        .ok_or_else(|| CliError::Usage("matrix missing integer field 'rows'".into()))?
        as usize;
    let c = v
        .get("cols")
        .and_then(Value::as_u64)
        .ok_or_else(|| CliError::Usage("matrix missing integer field 'cols'".into()))?
        as usize;
    if r != rows || c != cols {
        return Err(CliError::Usage(format!(
            "matrix is {r}x{c} but the declared channel dimensions require {rows}x{cols}"
        )));
    }
    let data = v
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Usage("matrix missing array field 'data'".into()))?;
    if data.len() != rows * cols {
        return Err(CliError::Usage(format!(
            "matrix 'data' has {} entries, expected {}",
            data.len(),
            rows * cols
        )));
    }
    let mut entries = Vec::with_capacity(data.len());
    for (i, pair) in data.iter().enumerate() {
        let pair = pair
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| CliError::Usage(format!("entry {i} is not a [re, im] pair")))?;
        let re = pair[0]
            .as_f64()
            .ok_or_else(|| CliError::Usage(format!("entry {i} re is not a number")))?;
        let im = pair[1]
            .as_f64()
            .ok_or_else(|| CliError::Usage(format!("entry {i} im is not a number")))?;
        entries.push(C64::new(re, im));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j]))
}
