//! Distinct Laplacian eigenvalues Λ = (2π/L)²|k|² on the periodic box,
//! their multiplicities, gap statistics, and the spectral-gap condition
//! checker.
//!
//! All comparisons happen on the integer |k|² values; the (2π/L)² scaling
//! is applied only at the module boundary, so gap arithmetic is exact.
//! In 1D the gaps are (2π/L)²(2k+1); in 2D the eigenvalues are the sums of
//! two squares and arbitrarily large gaps still occur, which is what the
//! manifold construction leans on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;

/// One distinct eigenvalue with its lattice multiplicity.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumEntry {
    /// Λ = (2π/L)²·ksq.
    pub lambda: f64,
    /// Integer |k|².
    pub ksq: i64,
    /// Number of lattice points k with |k|² = ksq.
    pub multiplicity: usize,
    /// One representative lattice point.
    pub representative: Vec<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTable {
    pub d: usize,
    pub l: f64,
    /// Largest integer |k|² included.
    pub cutoff: i64,
    /// Strictly increasing in Λ, starting at Λ₀ = 0.
    pub entries: Vec<SpectrumEntry>,
}

/// Strictness of the gap comparison in the SGC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SgcComparator {
    /// λ_{n+1} − λ_n > rhs (the generic statement).
    #[default]
    Strict,
    /// λ_{n+1} − λ_n ≥ rhs (the prepared-case restatement).
    NonStrict,
}

/// Enumerate distinct |k|² ≤ cutoff over Z^d with multiplicities.
/// 1D: the perfect squares, multiplicity 2 away from zero. 2D: the sums of
/// two squares, counted over all sign/order combinations.
pub fn enumerate(d: usize, l: f64, cutoff: i64) -> Result<SpectrumTable> {
    if d != 1 && d != 2 {
        return Err(Error::InvalidSpec(format!("spectrum needs d in {{1,2}}, got {d}")));
    }
    if cutoff < 1 {
        return Err(Error::InvalidSpec(format!("cutoff must be >= 1, got {cutoff}")));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidSpec(format!("L must be positive, got {l}")));
    }
    let scale = {
        let k0 = 2.0 * std::f64::consts::PI / l;
        k0 * k0
    };
    let entries = match d {
        1 => {
            let kmax = (cutoff as f64).sqrt() as i64;
            let mut out = Vec::with_capacity(kmax as usize + 1);
            for k in 0..=kmax {
                let ksq = k * k;
                if ksq > cutoff {
                    break;
                }
                out.push(SpectrumEntry {
                    lambda: scale * ksq as f64,
                    ksq,
                    multiplicity: if k == 0 { 1 } else { 2 },
                    representative: vec![k],
                });
            }
            out
        }
        _ => {
            // counts[s] = #{(k1,k2) ∈ Z² : k1²+k2² = s}, built from the
            // non-negative quadrant with sign multiplicities; partitioned
            // over k1 ranges when the parallel feature is on.
            let kmax = (cutoff as f64).sqrt() as i64;
            let n_chunks = 8.min(kmax as usize + 1).max(1);
            let chunk = (kmax as usize + 1).div_ceil(n_chunks);
            let partials = exec::map_indexed(n_chunks, |ci| {
                let lo = (ci * chunk) as i64;
                let hi = (((ci + 1) * chunk) as i64 - 1).min(kmax);
                let mut counts = vec![0u32; cutoff as usize + 1];
                let mut reps: Vec<Option<(i64, i64)>> = vec![None; cutoff as usize + 1];
                for k1 in lo..=hi {
                    let k1sq = k1 * k1;
                    if k1sq > cutoff {
                        break;
                    }
                    let m1 = if k1 == 0 { 1 } else { 2 };
                    let k2max = ((cutoff - k1sq) as f64).sqrt() as i64;
                    for k2 in 0..=k2max {
                        let s = k1sq + k2 * k2;
                        if s > cutoff {
                            break;
                        }
                        let m2 = if k2 == 0 { 1 } else { 2 };
                        counts[s as usize] += (m1 * m2) as u32;
                        if reps[s as usize].is_none() {
                            reps[s as usize] = Some((k1, k2));
                        }
                    }
                }
                (counts, reps)
            });
            let mut counts = vec![0u32; cutoff as usize + 1];
            let mut reps: Vec<Option<(i64, i64)>> = vec![None; cutoff as usize + 1];
            for (c, r) in partials {
                for s in 0..counts.len() {
                    counts[s] += c[s];
                    if reps[s].is_none() {
                        reps[s] = r[s];
                    }
                }
            }
            let mut out = Vec::new();
            for s in 0..=cutoff {
                let c = counts[s as usize];
                if c > 0 {
                    let (r1, r2) = reps[s as usize].unwrap();
                    out.push(SpectrumEntry {
                        lambda: scale * s as f64,
                        ksq: s,
                        multiplicity: c as usize,
                        representative: vec![r1, r2],
                    });
                }
            }
            out
        }
    };
    Ok(SpectrumTable { d, l, cutoff, entries })
}

impl SpectrumTable {
    /// Consecutive gaps (n, Λ_{n+1} − Λ_n); integer-exact before scaling.
    pub fn gaps(&self) -> Vec<(usize, f64)> {
        let scale = {
            let k0 = 2.0 * std::f64::consts::PI / self.l;
            k0 * k0
        };
        self.entries
            .windows(2)
            .enumerate()
            .map(|(n, w)| (n, scale * (w[1].ksq - w[0].ksq) as f64))
            .collect()
    }

    /// Integer gap sequence |k|²_{n+1} − |k|²_n.
    pub fn gaps_int(&self) -> Vec<i64> {
        self.entries.windows(2).map(|w| w[1].ksq - w[0].ksq).collect()
    }

    /// Smallest n with Λ_{n+1} − Λ_n ≥ g, if any below the cutoff.
    pub fn first_index_with_gap(&self, g: f64) -> Option<usize> {
        self.gaps().into_iter().find(|(_, gap)| *gap >= g).map(|(n, _)| n)
    }

    /// Smallest n satisfying the spectral gap condition
    /// λ_{n+1} − λ_n > 2C(λ_n^{(α−β)/2} + λ_{n+1}^{(α−β)/2})
    /// (≥ with [`SgcComparator::NonStrict`], the prepared-case reading;
    /// for α = β the right side is the constant 4C).
    pub fn check_sgc(
        &self,
        c: f64,
        alpha: f64,
        beta: f64,
        comparator: SgcComparator,
    ) -> Result<Option<usize>> {
        if c < 0.0 {
            return Err(Error::InvalidSpec(format!("SGC needs C >= 0, got {c}")));
        }
        let diff = alpha - beta;
        if !(0.0..=1.0).contains(&diff) {
            return Err(Error::InvalidSpec(format!(
                "SGC needs 0 <= alpha - beta <= 1, got {diff}"
            )));
        }
        for (n, w) in self.entries.windows(2).enumerate() {
            let gap = w[1].lambda - w[0].lambda;
            let rhs =
                2.0 * c * (w[0].lambda.powf(diff / 2.0) + w[1].lambda.powf(diff / 2.0));
            let ok = match comparator {
                SgcComparator::Strict => gap > rhs,
                SgcComparator::NonStrict => gap >= rhs,
            };
            if ok {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// Λ_n.
    pub fn lambda(&self, n: usize) -> f64 {
        self.entries[n].lambda
    }

    /// Number of modes (with multiplicity) in P_n = span{Λ ≤ Λ_n},
    /// constant mode included.
    pub fn dim_p(&self, n: usize) -> usize {
        self.entries[..=n].iter().map(|e| e.multiplicity).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Signed brute-force lattice count, the independent oracle.
    fn brute_force_2d(cutoff: i64) -> Vec<(i64, usize)> {
        let kmax = (cutoff as f64).sqrt() as i64 + 1;
        let mut counts = std::collections::BTreeMap::new();
        for k1 in -kmax..=kmax {
            for k2 in -kmax..=kmax {
                let s = k1 * k1 + k2 * k2;
                if s <= cutoff {
                    *counts.entry(s).or_insert(0usize) += 1;
                }
            }
        }
        counts.into_iter().collect()
    }

    #[test]
    fn one_d_squares_and_multiplicities() {
        let t = enumerate(1, 2.0 * PI, 100).unwrap();
        let ksqs: Vec<i64> = t.entries.iter().map(|e| e.ksq).collect();
        assert_eq!(ksqs, vec![0, 1, 4, 9, 16, 25, 36, 49, 64, 81, 100]);
        assert_eq!(t.entries[0].multiplicity, 1);
        assert!(t.entries[1..].iter().all(|e| e.multiplicity == 2));
    }

    #[test]
    fn two_d_first_distinct_values() {
        let t = enumerate(2, 2.0 * PI, 25).unwrap();
        let ksqs: Vec<i64> = t.entries.iter().map(|e| e.ksq).collect();
        assert_eq!(ksqs, vec![0, 1, 2, 4, 5, 8, 9, 10, 13, 16, 17, 18, 20, 25]);
        // |k|² = 25 has 12 lattice points: (±5,0),(0,±5),(±3,±4),(±4,±3)
        assert_eq!(t.entries.last().unwrap().multiplicity, 12);
    }

    #[test]
    fn two_d_matches_brute_force() {
        let cutoff = 2000;
        let t = enumerate(2, 1.0, cutoff).unwrap();
        let oracle = brute_force_2d(cutoff);
        assert_eq!(t.entries.len(), oracle.len());
        for (e, (s, m)) in t.entries.iter().zip(&oracle) {
            assert_eq!(e.ksq, *s);
            assert_eq!(e.multiplicity, *m);
        }
    }

    #[test]
    fn one_d_gap_formula_exact() {
        let t = enumerate(1, 2.0 * PI, 10_000).unwrap();
        let gaps = t.gaps_int();
        for (k, g) in gaps.iter().enumerate() {
            assert_eq!(*g, 2 * k as i64 + 1);
        }
        // scaled: d = 1, L = 2π, k = 3 → gap 7
        let scaled = t.gaps();
        assert!((scaled[3].1 - 7.0).abs() < 1e-12);
    }

    #[test]
    fn first_gap_queries() {
        let t = enumerate(1, 2.0 * PI, 100).unwrap();
        // gaps are 1, 3, 5, ...: first ≥ 4 is the gap 5 sitting at Λ = 4
        let n = t.first_index_with_gap(4.0).unwrap();
        assert_eq!(t.entries[n].ksq, 4);
        assert_eq!(t.first_index_with_gap(0.0), Some(0));
        assert_eq!(t.first_index_with_gap(1e9), None);
        let empty_gaps = enumerate(1, 1.0, 1).unwrap();
        assert_eq!(empty_gaps.entries.len(), 2); // Λ = 0, 1 only
        let single = SpectrumTable { entries: empty_gaps.entries[..1].to_vec(), ..empty_gaps };
        assert!(single.gaps().is_empty());
    }

    #[test]
    fn sgc_alpha_eq_beta_reduces_to_flat_gap() {
        let t = enumerate(1, 2.0 * PI, 200).unwrap();
        // α = β, C = 1: condition is gap > 4 → gap 5 at Λ = 4 (n = 2)
        let n = t.check_sgc(1.0, 1.0, 1.0, SgcComparator::Strict).unwrap().unwrap();
        assert_eq!(t.entries[n].ksq, 4);
        // C = 0 → n = 0 (first gap 1 > 0)
        assert_eq!(t.check_sgc(0.0, 1.0, 1.0, SgcComparator::Strict).unwrap(), Some(0));
        // nonstrict accepts gap = 4C exactly: C = 0.25 → gap ≥ 1 at n = 0
        assert_eq!(
            t.check_sgc(0.25, 1.0, 1.0, SgcComparator::NonStrict).unwrap(),
            Some(0)
        );
        assert_eq!(t.check_sgc(0.25, 1.0, 1.0, SgcComparator::Strict).unwrap(), Some(1));
    }

    /// Independent per-n scan of the SGC inequality, 20 seeded (C, α−β) draws.
    #[test]
    fn sgc_matches_brute_force_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for d in [1usize, 2] {
            let t = enumerate(d, 2.0 * PI, 3000).unwrap();
            for _ in 0..20 {
                let c: f64 = rng.random_range(0.0..3.0);
                let diff: f64 = rng.random_range(0.0..1.0);
                let got = t.check_sgc(c, 1.0 + diff, 1.0, SgcComparator::Strict).unwrap();
                let mut expect = None;
                for n in 0..t.entries.len() - 1 {
                    let ln = t.entries[n].lambda;
                    let ln1 = t.entries[n + 1].lambda;
                    if ln1 - ln > 2.0 * c * (ln.powf(diff / 2.0) + ln1.powf(diff / 2.0)) {
                        expect = Some(n);
                        break;
                    }
                }
                assert_eq!(got, expect, "d={d} C={c} diff={diff}");
            }
        }
    }

    /// Raising C never lowers the returned index.
    #[test]
    fn sgc_monotone_in_c() {
        let t = enumerate(2, 2.0 * PI, 5000).unwrap();
        let mut last = Some(0);
        for i in 0..30 {
            let c = 0.1 * i as f64;
            let n = t.check_sgc(c, 1.0, 1.0, SgcComparator::Strict).unwrap();
            if let (Some(a), Some(b)) = (last, n) {
                assert!(b >= a, "C={c}: {b} < {a}");
            }
            last = n;
        }
    }

    #[test]
    fn dim_p_counts_multiplicities() {
        let t = enumerate(2, 2.0 * PI, 25).unwrap();
        // Λ ≤ 1: k = 0 (1) + |k|²=1 (4 points) = 5
        assert_eq!(t.dim_p(1), 5);
    }
}
