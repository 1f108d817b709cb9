use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use super::blocks::symmetric_blocks;
use crate::channel::BipartiteDensity;
use crate::error::Result;
use crate::numeric::symmetric_eigenvalues;

const HERMITIAN_TOL: f64 = 1e-9;
const CLAMP: f64 = 1e-12;

/// Eigenvalues of one diagonal block of `ρ^PT`.
#[derive(Debug, Clone, PartialEq)]
pub struct PtBlock {
    /// Smallest total photon number `a + d` among the block's basis states.
    pub f: usize,
    /// Basis states `(a, d)` spanning the block.
    pub basis: Vec<(usize, usize)>,
    /// Eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

/// Spectrum of the truncated partial transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct PTSpectrum {
    /// Independent blocks ordered by `f`.
    pub blocks: Vec<PtBlock>,
    /// Sum of all eigenvalues, equal to the retained trace.
    pub trace_check: f64,
}

impl PTSpectrum {
    /// All eigenvalues in block order.
    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.eigenvalues.iter().copied())
    }

    /// The same spectrum with every eigenvalue shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| PtBlock {
                f: b.f,
                basis: b.basis.clone(),
                eigenvalues: b.eigenvalues.iter().map(|x| x + delta).collect(),
            })
            .collect();
        Self {
            blocks,
            trace_check: self.trace_check,
        }
    }
}

/// Partial transpose on mode 2: `ρ^PT[(a, d), (c, b)] = ρ_abcd`, restricted to
/// `a + d <= F_max` and `c + b <= F_max`. The matrix is split into its connected
/// blocks; for states obeying `a − b = c − d` these are exactly the
/// `(F+1)×(F+1)` blocks of fixed total photon number `F`.
pub fn partial_transpose_spectrum(rho: &BipartiteDensity) -> Result<PTSpectrum> {
    let entries = rho.pt_entries();
    let blocks = symmetric_blocks(&entries, HERMITIAN_TOL)?;
    let mut out = Vec::with_capacity(blocks.len());
    let mut trace = 0.0;
    for blk in blocks {
        let n = blk.labels.len();
        trace += (0..n).map(|i| blk.data[i * n + i]).sum::<f64>();
        let eigenvalues = symmetric_eigenvalues(n, &blk.data);
        let f = blk.labels.iter().map(|(a, d)| a + d).min().unwrap_or(0);
        out.push(PtBlock {
            f,
            basis: blk.labels,
            eigenvalues,
        });
    }
    out.sort_by_key(|b| (b.f, b.basis[0]));
    Ok(PTSpectrum {
        blocks: out,
        trace_check: trace,
    })
}

/// `N = Σ |λ|` over negative eigenvalues; values with `|λ| < 1e−12` are treated as zero.
pub fn negativity(spec: &PTSpectrum) -> f64 {
    spec.eigenvalues().filter(|&x| x < -CLAMP).map(|x| -x).sum()
}

/// `E_LN = log₂(1 + 2N)`.
pub fn log_negativity(spec: &PTSpectrum) -> f64 {
    (1.0 + 2.0 * negativity(spec)).log2()
}

/// Log-negativity of a density operator.
pub fn log_negativity_of(rho: &BipartiteDensity) -> Result<f64> {
    partial_transpose_spectrum(rho).map(|s| log_negativity(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockstate::{build_state, SchmidtState, Squeezing, StateRecipe, TwoModeState};
    use approx::assert_relative_eq;

    fn density(s: SchmidtState, f: usize) -> BipartiteDensity {
        BipartiteDensity::from_state(&TwoModeState::Schmidt(s), f)
    }

    #[test]
    fn product_vacuum() {
        let rho = density(SchmidtState::from_coefficients(alloc::vec![1.0], (0, 0)).unwrap(), 4);
        let spec = partial_transpose_spectrum(&rho).unwrap();
        assert_eq!(spec.blocks.len(), 1);
        assert_eq!(spec.blocks[0].eigenvalues, [1.0]);
        assert_eq!(log_negativity(&spec), 0.0);
    }

    #[test]
    fn bell_like_state() {
        let h = 0.5f64.sqrt();
        let rho = density(SchmidtState::from_coefficients(alloc::vec![h, h], (0, 0)).unwrap(), 2);
        let spec = partial_transpose_spectrum(&rho).unwrap();
        let fs: Vec<usize> = spec.blocks.iter().map(|b| b.f).collect();
        assert_eq!(fs, [0, 1, 2]);
        let mut all: Vec<f64> = spec.eigenvalues().collect();
        all.sort_by(f64::total_cmp);
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (x, y) in all.iter().zip(expect) {
            assert_relative_eq!(*x, y, epsilon = 1e-15);
        }
        assert_relative_eq!(log_negativity(&spec), 1.0, epsilon = 1e-15);
        assert_relative_eq!(spec.trace_check, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn tmsv_matches_analytic_value() {
        let s = build_state(&StateRecipe::tmsv(Squeezing::from_lambda(1.0 / 3.0).unwrap()), 80).unwrap();
        let rho = BipartiteDensity::from_state(&s, 30);
        let spec = partial_transpose_spectrum(&rho).unwrap();
        assert!(spec.blocks.iter().all(|b| b.eigenvalues.len() <= b.f + 1));
        assert_relative_eq!(log_negativity(&spec), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn no_negatives_means_zero() {
        let spec = PTSpectrum {
            blocks: alloc::vec![PtBlock {
                f: 0,
                basis: alloc::vec![(0, 0)],
                eigenvalues: alloc::vec![0.3, 0.7, -1e-13]
            }],
            trace_check: 1.0,
        };
        assert_eq!(log_negativity(&spec), 0.0);
    }
}
