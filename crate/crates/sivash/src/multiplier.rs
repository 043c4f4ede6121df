//! Fourier multiplier symbols m(k) defining the instability operator T.
//!
//! All symbols satisfy m(0) = 0 (T preserves zero mean) and are even in k
//! (T maps real fields to real fields). The KSE symbol is unbounded and is
//! flagged so the Cole–Hopf and inertial-manifold paths can reject it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierSymbol {
    /// T = 0 (plain diffusive Burgers).
    Zero,
    /// Burgers–Sivashinsky: m(k) = α − 1 for k ≠ 0.
    Bse { alpha: f64 },
    /// Quasi-Steady: m(k) = ακ²/(1 + κ²), κ = (2π/L)|k|.
    Qse { alpha: f64 },
    /// Kuramoto–Sivashinsky: m(k) = ακ²(1 − κ²). Unbounded; simulation only.
    Kse { alpha: f64 },
    /// Explicit table of (|k|² as written by the caller) → m values.
    /// Keyed by the integer mode vector; must be even in k and cover every
    /// active mode of the grid it is used with.
    Custom { table: BTreeMap<Vec<i64>, f64> },
}

impl MultiplierSymbol {
    /// Symbol value at integer frequency vector `k` on `grid`.
    /// m(0) = 0 for every kind.
    pub fn m(&self, k: &[i64], grid: &GridSpec) -> Result<f64> {
        if k.iter().all(|&ki| ki == 0) {
            return Ok(0.0);
        }
        let k0 = grid.k0();
        let ksq: i64 = k.iter().map(|&ki| ki * ki).sum();
        let kappa_sq = k0 * k0 * ksq as f64;
        Ok(match self {
            MultiplierSymbol::Zero => 0.0,
            MultiplierSymbol::Bse { alpha } => alpha - 1.0,
            MultiplierSymbol::Qse { alpha } => alpha * kappa_sq / (1.0 + kappa_sq),
            MultiplierSymbol::Kse { alpha } => alpha * kappa_sq * (1.0 - kappa_sq),
            MultiplierSymbol::Custom { table } => *table
                .get(k)
                .ok_or_else(|| Error::MissingMultiplierMode(k.to_vec()))?,
        })
    }

    /// Bounded over Z^d? (KSE is not; custom tables are finite, hence bounded.)
    pub fn is_bounded(&self) -> bool {
        !matches!(self, MultiplierSymbol::Kse { .. })
    }

    /// Validate a custom table for evenness m(−k) = m(k); no-op for built-ins.
    pub fn validate(&self) -> Result<()> {
        if let MultiplierSymbol::Custom { table } = self {
            for (k, &v) in table {
                let neg: Vec<i64> = k.iter().map(|&ki| -ki).collect();
                match table.get(&neg) {
                    Some(&vn) if vn == v => {}
                    _ => {
                        return Err(Error::InvalidSpec(format!(
                            "custom symbol not even at k = {k:?}"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}
