//! Noisy attenuating bosonic channels acting on two-mode states.
//!
//! Each mode passes through `γ₂(φ)∘γ₁(ζ)`: a pure-loss channel of amplitude
//! transmission `ζ = η/φ` followed by a phase-insensitive amplifier of gain
//! `φ² = 1 + χ/2`. The composite has amplitude transmission `η` and adds `χ`
//! units of Gaussian excess noise.
//!
//! Three families of engines are provided:
//! * [`evolve_generic`] tensors the element-wise Kraus action ([`kraus_element_action`])
//!   over every input matrix element and accepts any input, including NOON states
//!   and arbitrary densities.
//! * [`evolve_with_maps`] applies precomputed single-mode maps ([`ModeMap`]), which
//!   is how fading averages are propagated.
//! * closed forms for equal-offset Schmidt inputs: [`evolve_symmetric_noisy`],
//!   [`evolve_symmetric_noiseless`], [`evolve_asymmetric_noisy`] and
//!   [`evolve_asymmetric_noiseless`].

mod closed_form;
mod density;
mod engine;
mod map;

pub use closed_form::{
    evolve_asymmetric_noiseless, evolve_asymmetric_noisy, evolve_symmetric_noiseless, evolve_symmetric_noisy,
};
pub use density::{retained, BipartiteDensity};
pub use engine::{evolve, evolve_generic, evolve_with_maps, EvolutionInput};
pub use map::{kraus_element_action, ModeMap};

use alloc::format;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Result};

/// Default trace tolerance `ε`.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Per-mode channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    eta: f64,
    chi: f64,
}

impl ChannelParams {
    /// Channel with amplitude transmission `eta ∈ [0, 1]` and excess noise `chi >= 0`.
    pub fn new(eta: f64, chi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(domain(format!("amplitude transmission must lie in [0, 1], got {eta}")));
        }
        if !(chi >= 0.0) || !chi.is_finite() {
            return Err(domain(format!("excess noise must be finite and non-negative, got {chi}")));
        }
        Ok(Self { eta, chi })
    }

    /// Channel from its intensity transmission `η²`.
    pub fn from_intensity(transmittance: f64, chi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(domain(format!("transmittance must lie in [0, 1], got {transmittance}")));
        }
        Self::new(transmittance.sqrt(), chi)
    }

    /// The identity channel.
    pub fn identity() -> Self {
        Self { eta: 1.0, chi: 0.0 }
    }

    /// Amplitude transmission `η`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Intensity transmission `η²`.
    pub fn transmittance(&self) -> f64 {
        self.eta * self.eta
    }

    /// Excess noise `χ`.
    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Amplifier parameter `φ = √(1 + χ/2)`.
    pub fn phi(&self) -> f64 {
        (1.0 + 0.5 * self.chi).sqrt()
    }

    /// Loss parameter `ζ = η/φ`.
    pub fn zeta(&self) -> f64 {
        self.eta / self.phi()
    }

    /// Whether the channel is a quantum-limited attenuator.
    pub fn is_noiseless(&self) -> bool {
        self.chi == 0.0
    }

    /// Whether the channel is the identity.
    pub fn is_identity(&self) -> bool {
        self.eta == 1.0 && self.chi == 0.0
    }
}

/// Truncation settings for an evolution.
///
/// `f_max` bounds the total photon number of retained matrix elements, `ell_max`
/// the loss-photon index in the closed-form sums and `ellp_max` the noise-photon
/// index of the amplifier. Evolutions whose retained trace falls below `1 - epsilon`
/// fail with [`crate::Error::TruncationInsufficient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoffs {
    /// Largest total photon number `a + d` (and `a + b`) kept.
    pub f_max: usize,
    /// Largest loss index `ℓ` in the closed-form sums.
    pub ell_max: usize,
    /// Largest amplifier index `ℓ′`.
    pub ellp_max: usize,
    /// Trace tolerance.
    pub epsilon: f64,
}

impl Cutoffs {
    /// `F_max = ℓ_max = ℓ′_max = f`, default `ε`.
    pub fn uniform(f: usize) -> Self {
        Self {
            f_max: f,
            ell_max: f,
            ellp_max: f,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// 10 up to 3.5 dB of source squeezing, 50 above.
    pub fn for_squeezing_db(db: f64) -> Self {
        Self::uniform(if db <= 3.5 { 10 } else { 50 })
    }

    /// Same cutoffs with a different trace tolerance.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self::uniform(10)
    }
}
