//! On-disk formats: field snapshot JSON and diagnostics CSV.
//!
//! Snapshot schema: `{meta: {d, n, l, time, form, zero_mean}, coeffs: [...]}`
//! where each coeffs entry is `[k_1, (k_2,) re, im]` and entries are sorted
//! lexicographically by the integer frequency vector. Writers emit full
//! Hermitian pairs (every stored mode); readers validate the symmetry.
//!
//! Diagnostics CSV: fixed column set, 17 significant digits, one row per
//! record. The column list is exported so the CLI can generate a schema
//! file documenting every output column.

use std::io::Write;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{DealiasRule, GridSpec};
use crate::models::State;

/// Column order of the diagnostics CSV.
pub const DIAG_CSV_COLUMNS: [&str; 10] = [
    "t",
    "l2_u",
    "h1_u",
    "linf_phi",
    "alpha_p",
    "mean",
    "mean_residual",
    "curl_residual",
    "mean_gradsq_half",
    "linf_u",
];

/// Human descriptions for the generated schema file.
pub const DIAG_CSV_DESCRIPTIONS: [&str; 10] = [
    "time",
    "L2 norm of U",
    "homogeneous H1 seminorm of U",
    "Linf norm of the full potential phi (mean included)",
    "alpha_p positive-part functional at the configured p",
    "tracked mean of phi",
    "mean-ODE residual |dm/dt + a*m + mean_gradsq_half| (a per form)",
    "relative curl residual of U (2D primal runs; 0 otherwise)",
    "half the mean of |grad phi|^2 (drift term of the mean ODE)",
    "max over the grid of |U| (advective CFL monitor)",
];

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write the diagnostics CSV (header + one row per record).
pub fn write_records_csv<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{}", DIAG_CSV_COLUMNS.join(","))?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt(r.t),
            fmt(r.l2_u),
            fmt(r.h1_u),
            fmt(r.linf_phi),
            fmt(r.alpha_p),
            fmt(r.mean),
            fmt(r.mean_residual),
            fmt(r.curl_residual),
            fmt(r.mean_gradsq_half),
            fmt(r.linf_u_sample.unwrap_or(0.0)),
        )?;
    }
    Ok(())
}

/// Indices of all stored modes in lexicographic order of the frequency vector.
fn lexicographic_indices(grid: &GridSpec) -> Vec<usize> {
    let mut idxs: Vec<usize> = (0..grid.len()).collect();
    idxs.sort_by_key(|&i| grid.index_modes(i));
    idxs
}

/// Serialize one field (full Hermitian set of coefficients).
pub fn field_to_snapshot(field: &SpectralField, time: f64, form: &str) -> Value {
    let grid = &field.grid;
    let coeffs: Vec<Value> = lexicographic_indices(grid)
        .into_iter()
        .map(|i| {
            let k = grid.index_modes(i);
            let c = field.coeffs[i];
            let mut row: Vec<Value> = k.into_iter().map(|v| json!(v)).collect();
            row.push(json!(c.re));
            row.push(json!(c.im));
            Value::Array(row)
        })
        .collect();
    json!({
        "meta": {
            "d": grid.d,
            "n": grid.n,
            "l": grid.l,
            "time": time,
            "form": form,
            "zero_mean": field.zero_mean,
        },
        "coeffs": coeffs,
    })
}

/// Parse and validate a snapshot document. Checks grid sanity, complete
/// coverage of the mode set, and Hermitian symmetry.
pub fn snapshot_to_field(doc: &Value) -> Result<(SpectralField, f64, String)> {
    let meta = doc
        .get("meta")
        .ok_or_else(|| Error::SnapshotFormat("missing meta".into()))?;
    let d = meta.get("d").and_then(Value::as_u64).ok_or_else(|| bad("meta.d"))? as usize;
    let n = meta.get("n").and_then(Value::as_u64).ok_or_else(|| bad("meta.n"))? as usize;
    let l = meta.get("l").and_then(Value::as_f64).ok_or_else(|| bad("meta.l"))?;
    let time = meta.get("time").and_then(Value::as_f64).ok_or_else(|| bad("meta.time"))?;
    let form = meta
        .get("form")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("meta.form"))?
        .to_string();
    let zero_mean = meta
        .get("zero_mean")
        .and_then(Value::as_bool)
        .ok_or_else(|| bad("meta.zero_mean"))?;
    let grid = GridSpec::new(d, n, l, DealiasRule::TwoThirds)
        .map_err(|e| Error::SnapshotFormat(format!("bad grid in meta: {e}")))?;
    let rows = doc
        .get("coeffs")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("coeffs"))?;
    if rows.len() != grid.len() {
        return Err(Error::SnapshotFormat(format!(
            "expected {} coefficient rows, found {}",
            grid.len(),
            rows.len()
        )));
    }
    let mut coeffs = vec![Complex64::ZERO; grid.len()];
    let mut seen = vec![false; grid.len()];
    for row in rows {
        let row = row.as_array().ok_or_else(|| bad("coeffs row"))?;
        if row.len() != d + 2 {
            return Err(Error::SnapshotFormat(format!(
                "coefficient row needs {} entries, found {}",
                d + 2,
                row.len()
            )));
        }
        let k: Vec<i64> = row[..d]
            .iter()
            .map(|v| v.as_i64().ok_or_else(|| bad("mode index")))
            .collect::<Result<_>>()?;
        let re = row[d].as_f64().ok_or_else(|| bad("re"))?;
        let im = row[d + 1].as_f64().ok_or_else(|| bad("im"))?;
        let idx = grid
            .coeff_index(&k)
            .map_err(|e| Error::SnapshotFormat(format!("bad mode {k:?}: {e}")))?;
        if seen[idx] {
            return Err(Error::SnapshotFormat(format!("duplicate mode {k:?}")));
        }
        seen[idx] = true;
        coeffs[idx] = Complex64::new(re, im);
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::SnapshotFormat("incomplete mode coverage".into()));
    }
    // Hermitian validation
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm())).max(1.0);
    for idx in 0..coeffs.len() {
        let neg = grid.negated_index(idx);
        if (coeffs[idx] - coeffs[neg].conj()).norm() > 1e-10 * scale {
            return Err(Error::SnapshotFormat(format!(
                "Hermitian symmetry violated at mode {:?}",
                grid.index_modes(idx)
            )));
        }
    }
    if zero_mean && coeffs[0].norm() > 1e-12 * scale {
        return Err(Error::SnapshotFormat("zero_mean flag but c(0) != 0".into()));
    }
    let field = SpectralField { grid, coeffs, zero_mean };
    Ok((field, time, form))
}

/// Decompose a state into named fields for snapshotting. Scalar states are
/// written as the single full field (mean in c(0)); primal states as one
/// field per component.
pub fn state_fields(state: &State) -> Vec<(String, SpectralField)> {
    match state {
        State::Scalar(s) => vec![("field".to_string(), s.full_field())],
        State::Primal(u) => u
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("u{}", i + 1), c.clone()))
            .collect(),
    }
}

fn bad(what: &str) -> Error {
    Error::SnapshotFormat(format!("missing or malformed {what}"))
}
