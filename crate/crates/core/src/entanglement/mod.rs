//! Entanglement measures of evolved two-mode states.
//!
//! Logarithmic negativity is read off the spectrum of the partial transpose,
//! which splits into small independent blocks. Gaussian covariance-matrix
//! formulas for the TMSV serve as an independent oracle, and the conditional
//! entropy gives a lower bound on distillable entanglement.

mod blocks;
mod entropy;
mod gaussian;
mod negativity;

pub use entropy::{conditional_entropy_fock, von_neumann_entropy};
pub use gaussian::{
    gaussian_conditional_entropy, gaussian_log_negativity, symplectic_entropy, tmsv_covariance_after_channel,
    GaussianCM,
};
pub use negativity::{log_negativity, log_negativity_of, negativity, partial_transpose_spectrum, PTSpectrum, PtBlock};


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::fading::QuadratureRule;

/// Entanglement generated per initial pulse, `R_E = P_c · E_LN`.
pub fn rate(p_c: f64, eln: f64) -> f64 {
    p_c * eln
}

/// `log₂(1 + 2 ∫ p(η) N(η) dη)`, an upper bound on the log-negativity of the
/// ensemble-average state that follows from the convexity of the negativity.
pub fn ensemble_negativity_bound<F>(rule: &QuadratureRule, mut negativity_at: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut mean = 0.0;
    for (eta, w) in rule.iter() {
        mean += w * negativity_at(eta)?;
    }
    Ok((1.0 + 2.0 * mean).log2())
}
