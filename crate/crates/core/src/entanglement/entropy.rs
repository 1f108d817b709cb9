use alloc::collections::BTreeMap;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use super::blocks::symmetric_blocks;
use crate::channel::BipartiteDensity;
use crate::error::{Error, Result};
use crate::numeric::symmetric_eigenvalues;

const HERMITIAN_TOL: f64 = 1e-9;
const POSITIVITY_TOL: f64 = 1e-9;

/// Entropy in bits of a spectrum, after clamping eigenvalues in `(−1e−9, 0)` to 0
/// and renormalizing to unit sum.
fn spectrum_entropy(eigs: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &x in eigs {
        if x < -POSITIVITY_TOL {
            return Err(Error::NotPositive(x));
        }
        total += x.max(0.0);
    }
    if total <= 0.0 {
        return Err(Error::NotPositive(total));
    }
    Ok(eigs
        .iter()
        .map(|&x| x.max(0.0) / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum())
}

fn block_spectrum<K: Ord + Copy>(entries: &[(K, K, f64)]) -> Result<Vec<f64>> {
    let mut eigs = Vec::new();
    for blk in symmetric_blocks(entries, HERMITIAN_TOL)? {
        eigs.extend(symmetric_eigenvalues(blk.labels.len(), &blk.data));
    }
    Ok(eigs)
}

/// Von Neumann entropy (bits) of the truncated density `ρ` on `a + b <= F`.
pub fn von_neumann_entropy(rho: &BipartiteDensity) -> Result<f64> {
    let f = rho.f_max();
    let entries: Vec<_> = rho
        .iter()
        .filter(|((a, b, c, d), _)| a + b <= f && c + d <= f)
        .map(|((a, b, c, d), v)| ((a, b), (c, d), v))
        .collect();
    spectrum_entropy(&block_spectrum(&entries)?)
}

/// `E_CE = S(ρ₁) − S(ρ)` with `ρ₁ = Tr₂ ρ`, both taken on the truncated space.
pub fn conditional_entropy_fock(rho: &BipartiteDensity) -> Result<f64> {
    let f = rho.f_max();
    let mut reduced: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for ((a, b, c, d), v) in rho.iter() {
        if b == d && a + b <= f && c + d <= f {
            *reduced.entry((a, c)).or_insert(0.0) += v;
        }
    }
    let entries: Vec<_> = reduced.into_iter().map(|((a, c), v)| (a, c, v)).collect();
    let s1 = spectrum_entropy(&block_spectrum(&entries)?)?;
    Ok(s1 - von_neumann_entropy(rho)?)
}
