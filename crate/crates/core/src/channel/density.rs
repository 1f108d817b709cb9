use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fockstate::{Element, TwoModeState};

pub(crate) type PtEntry = ((usize, usize), (usize, usize), f64);

/// Whether `(a, b, c, d)` survives truncation at total photon number `f_max`.
///
/// An element is kept when it belongs to the truncated partial transpose
/// (`a + d <= F` and `c + b <= F`) or to the truncated density matrix itself
/// (`a + b <= F` and `c + d <= F`).
pub fn retained(f_max: usize, (a, b, c, d): Element) -> bool {
    (a + d <= f_max && c + b <= f_max) || (a + b <= f_max && c + d <= f_max)
}

/// Sparse real two-mode density operator `Σ ρ_abcd |a⟩⟨c| ⊗ |b⟩⟨d|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteDensity {
    entries: BTreeMap<Element, f64>,
    f_max: usize,
    ell_max: usize,
    trace_deficit: f64,
}

impl BipartiteDensity {
    /// Builds a density from entries, discarding exact zeros and elements outside the
    /// truncation window, and records `1 - Σ_{a+b<=F} ρ_abab`.
    pub fn from_entries<I>(entries: I, f_max: usize, ell_max: usize) -> Self
    where
        I: IntoIterator<Item = (Element, f64)>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            if v != 0.0 && retained(f_max, k) {
                *map.entry(k).or_insert(0.0) += v;
            }
        }
        map.retain(|_, v| *v != 0.0);
        let mut out = Self {
            entries: map,
            f_max,
            ell_max,
            trace_deficit: 0.0,
        };
        out.trace_deficit = 1.0 - out.trace();
        out
    }

    /// Density of an un-evolved state truncated at `f_max`.
    pub fn from_state(state: &TwoModeState, f_max: usize) -> Self {
        Self::from_entries(state.density_entries(), f_max, 0)
    }

    /// `ρ_abcd`, zero when absent.
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.entries.get(&(a, b, c, d)).copied().unwrap_or(0.0)
    }

    /// Non-zero entries in ascending `(a, b, c, d)` order.
    pub fn iter(&self) -> impl Iterator<Item = (Element, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether no entry is stored.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total photon cutoff.
    pub fn f_max(&self) -> usize {
        self.f_max
    }

    /// Loss-index cutoff used to produce the density (0 when not applicable).
    pub fn ell_max(&self) -> usize {
        self.ell_max
    }

    /// `Σ ρ_abab` over `a + b <= F`.
    pub fn trace(&self) -> f64 {
        self.entries
            .iter()
            .filter(|((a, b, c, d), _)| a == c && b == d && a + b <= self.f_max)
            .map(|(_, v)| v)
            .sum()
    }

    /// `1 - trace`.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Fails when the trace deficit exceeds `epsilon`.
    pub fn check_trace(self, epsilon: f64) -> Result<Self> {
        if self.trace_deficit > epsilon || !self.trace_deficit.is_finite() {
            return Err(Error::TruncationInsufficient {
                deficit: self.trace_deficit,
                epsilon,
                f_max: self.f_max,
            });
        }
        Ok(self)
    }

    /// Largest `|ρ_abcd - ρ_cdab|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|(&(a, b, c, d), &v)| (v - self.get(c, d, a, b)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest element-wise difference from `other`.
    pub fn max_abs_diff(&self, other: &BipartiteDensity) -> f64 {
        let lhs = self.entries.iter().map(|(&(a, b, c, d), &v)| (v - other.get(a, b, c, d)).abs());
        let rhs = other
            .entries
            .iter()
            .filter(|(k, _)| !self.entries.contains_key(k))
            .map(|(_, v)| v.abs());
        lhs.chain(rhs).fold(0.0, f64::max)
    }

    /// Whether every entry satisfies `a - b = c - d`.
    pub fn obeys_selection_rule(&self) -> bool {
        self.entries.keys().all(|&(a, b, c, d)| a + d == c + b)
    }

    /// `Σ wᵢ ρᵢ`. All terms must share `f_max`; the result keeps the largest `ell_max`.
    pub fn weighted_sum<'a, I>(terms: I) -> Option<Self>
    where
        I: IntoIterator<Item = (f64, &'a BipartiteDensity)>,
    {
        let mut acc: BTreeMap<Element, f64> = BTreeMap::new();
        let mut meta: Option<(usize, usize)> = None;
        for (w, rho) in terms {
            let (f, l) = meta.get_or_insert((rho.f_max, rho.ell_max));
            debug_assert_eq!(*f, rho.f_max, "weighted_sum needs a common cutoff");
            *l = (*l).max(rho.ell_max);
            for (k, v) in rho.iter() {
                *acc.entry(k).or_insert(0.0) += w * v;
            }
        }
        let (f, l) = meta?;
        Some(Self::from_entries(acc, f, l))
    }

    /// Entries grouped for the partial transpose: `((row, col), value)` with
    /// row `(a, d)` and column `(c, b)`, restricted to both totals `<= F`.
    pub(crate) fn pt_entries(&self) -> Vec<PtEntry> {
        self.entries
            .iter()
            .filter(|((a, b, c, d), _)| a + d <= self.f_max && c + b <= self.f_max)
            .map(|(&(a, b, c, d), &v)| ((a, d), (c, b), v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockstate::{build_state, Squeezing, StateRecipe};

    #[test]
    fn retention_keeps_both_truncations() {
        assert!(retained(2, (1, 1, 1, 1)));
        assert!(retained(2, (2, 0, 0, 2)));
        assert!(!retained(2, (2, 1, 2, 1)));
        // PT-only element: a + b = 4 but a + d = c + b = 2.
        assert!(retained(2, (2, 2, 0, 0)));
    }

    #[test]
    fn state_density_is_hermitian_and_normalized() {
        let s = build_state(&StateRecipe::tmsv(Squeezing::from_lambda(1.0 / 3.0).unwrap()), 40).unwrap();
        let rho = BipartiteDensity::from_state(&s, 30);
        assert!(rho.hermiticity_error() == 0.0);
        assert!(rho.trace_deficit() < 1e-14);
        assert!(rho.obeys_selection_rule());
        assert!(rho.clone().check_trace(1e-3).is_ok());
        let tight = BipartiteDensity::from_state(&s, 0);
        assert!(matches!(tight.check_trace(1e-3), Err(Error::TruncationInsufficient { .. })));
    }

    #[test]
    fn weighted_sum_is_linear() {
        let s = build_state(&StateRecipe::tmsv(Squeezing::from_lambda(0.5).unwrap()), 40).unwrap();
        let rho = BipartiteDensity::from_state(&s, 10);
        let half = BipartiteDensity::weighted_sum([(0.25, &rho), (0.25, &rho)]).unwrap();
        for (k, v) in rho.iter() {
            assert!((half.get(k.0, k.1, k.2, k.3) - 0.5 * v).abs() < 1e-16);
        }
        assert!(BipartiteDensity::weighted_sum(core::iter::empty()).is_none());
    }
}
