//! The studies built on top of the simulation: loss sweeps of equally
//! entangled or operationally derived states, transmissivity optimization,
//! the memory-threshold condition and the comparison with single-photon Bell pairs.
//!
//! Sweeps are split into independent loss points ([`Sweep::run_point`]) so a
//! caller can distribute them over a thread pool and reassemble the rows in
//! grid order.

mod bell;
mod optimize;
mod scenario;
mod sweep;
mod threshold;

pub use bell::{measured_tmsv_bounds, single_photon_ratio, BellComparison, TmsvBounds};
pub use optimize::{optimize_t, Objective, TGrid, TOptimum};
pub use scenario::{Evaluation, Scenario};
pub use sweep::{run_sweep, ResolvedState, Sweep, SweepResult, SweepRow};
pub use threshold::{memory_threshold, memory_threshold_with, ThresholdResult, THRESHOLD_SCAN_POINTS};

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::channel::{Cutoffs, DEFAULT_EPSILON};
use crate::error::{domain, Error, Result};
use crate::fading::DEFAULT_SPOT_RATIO;
use crate::fockstate::{Family, Squeezing, StateRecipe, DEFAULT_N_MAX};

/// Default excess noise on a transmitted mode.
pub const DEFAULT_CHI: f64 = 0.02;

/// Beam-splitter transmissivity used when calibrating states to equal entanglement.
pub const DEFAULT_CALIBRATION_T: f64 = 0.9;

/// Which modes traverse a fading channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    /// Mode 1 stays with the sender, mode 2 crosses one fading channel.
    Asymmetric,
    /// Both modes cross independent, identically distributed fading channels.
    Symmetric,
}

/// How the fading distribution enters the entanglement figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// `E_LN` of the ensemble-average density operator.
    Ensemble,
    /// `∫ p(η) E_LN(ρ(η)) dη`, for receivers that know the realized transmittance.
    Measured,
}

/// Which quantities a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Logarithmic negativity only.
    Eln,
    /// Rate `P_c · E_LN` only.
    Rate,
    /// Both.
    Both,
}

impl Metric {
    /// Whether `E_LN` is reported.
    pub fn reports_eln(self) -> bool {
        !matches!(self, Metric::Rate)
    }

    /// Whether `R_E` is reported.
    pub fn reports_rate(self) -> bool {
        !matches!(self, Metric::Eln)
    }
}

macro_rules! labelled_enum {
    ($ty:ty, $($variant:path => [$label:literal $(, $alias:literal)*]),+ $(,)?) => {
        impl $ty {
            /// Canonical lower-case label.
            pub fn label(self) -> &'static str {
                match self {
                    $($variant => $label,)+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($label $(| $alias)* => Ok($variant),)+
                    other => Err(domain(format!("unrecognized {} '{other}'", stringify!($ty).to_ascii_lowercase()))),
                }
            }
        }
    };
}

labelled_enum!(Setting, Setting::Asymmetric => ["asym", "asymmetric"], Setting::Symmetric => ["sym", "symmetric"]);
labelled_enum!(Averaging, Averaging::Ensemble => ["ensemble"], Averaging::Measured => ["measured"]);
labelled_enum!(Metric, Metric::Eln => ["eln"], Metric::Rate => ["rate"], Metric::Both => ["both"]);

/// How the beam-splitter transmissivity of a derived state is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TChoice {
    /// A fixed value.
    Fixed(f64),
    /// The maximizer of the un-evolved `E_LN` on the default grid.
    MaxInitialEln,
    /// The maximizer of the un-evolved rate `P_c · E_LN` on the default grid.
    MaxInitialRate,
}

/// A state entering a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSource {
    /// A fully specified recipe.
    Recipe(StateRecipe),
    /// A family applied to a TMSV of the given squeezing.
    Derived {
        /// State family.
        family: Family,
        /// Squeezing of the source TMSV.
        squeezing: Squeezing,
        /// Transmissivity selection.
        t: TChoice,
    },
    /// A family whose source squeezing is tuned so the un-evolved state has `target_eln` ebits.
    Calibrated {
        /// State family.
        family: Family,
        /// Fixed beam-splitter transmissivity.
        transmissivity: f64,
        /// Entanglement target in ebits.
        target_eln: f64,
        /// Photon number for NOON states.
        noon_n: u32,
    },
}

impl StateSource {
    /// A family calibrated to `target_eln` ebits at [`DEFAULT_CALIBRATION_T`]; NOON uses `n = 2`.
    pub fn calibrated(family: Family, target_eln: f64) -> Self {
        StateSource::Calibrated {
            family,
            transmissivity: DEFAULT_CALIBRATION_T,
            target_eln,
            noon_n: 2,
        }
    }
}

/// Everything that defines a loss sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Channel geometry.
    pub setting: Setting,
    /// Ensemble or measured averaging.
    pub averaging: Averaging,
    /// States, in output order.
    pub states: Vec<StateSource>,
    /// Excess noise on mode 1.
    pub chi1: f64,
    /// Excess noise on mode 2.
    pub chi2: f64,
    /// Mean fading losses in dB, strictly increasing.
    pub loss_grid_db: Vec<f64>,
    /// Truncation; `None` picks [`Cutoffs::for_squeezing_db`] from the strongest source squeezing.
    pub cutoffs: Option<Cutoffs>,
    /// Reported quantities.
    pub metric: Metric,
    /// Fock cutoff for building the initial states.
    pub n_max: usize,
    /// Beam-spot to aperture ratio of the fading channel.
    pub spot_ratio: f64,
    /// Quadrature order per channel; `None` uses the convergence-checked default
    /// (or [`crate::fading::SYMMETRIC_ORDER`] per axis for measured symmetric sweeps).
    pub quadrature_order: Option<usize>,
    /// Trace tolerance of the automatic cutoffs (explicit `cutoffs` carry their own).
    pub epsilon: f64,
}

impl SweepConfig {
    /// Configuration with default noise for the setting (`χ₁ = 0, χ₂ = 0.02` asymmetric,
    /// `χ₁ = χ₂ = 0.02` symmetric) and default numerics.
    pub fn new(setting: Setting, averaging: Averaging, states: Vec<StateSource>, loss_grid_db: Vec<f64>) -> Self {
        let chi1 = match setting {
            Setting::Asymmetric => 0.0,
            Setting::Symmetric => DEFAULT_CHI,
        };
        Self {
            setting,
            averaging,
            states,
            chi1,
            chi2: DEFAULT_CHI,
            loss_grid_db,
            cutoffs: None,
            metric: Metric::Both,
            n_max: DEFAULT_N_MAX,
            spot_ratio: DEFAULT_SPOT_RATIO,
            quadrature_order: None,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// Checks the grid, noise and numeric settings.
    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(domain("a sweep needs at least one state"));
        }
        if self.loss_grid_db.is_empty() {
            return Err(domain("the loss grid is empty"));
        }
        if self.loss_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(domain("loss grid values must be finite"));
        }
        if self.loss_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("the loss grid must be strictly increasing"));
        }
        for (name, chi) in [("chi1", self.chi1), ("chi2", self.chi2)] {
            if !(chi >= 0.0) || !chi.is_finite() {
                return Err(domain(format!("{name} must be finite and non-negative, got {chi}")));
            }
        }
        if self.n_max == 0 {
            return Err(domain("n_max must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(domain("epsilon must lie in (0, 1)"));
        }
        if self.quadrature_order == Some(0) {
            return Err(domain("quadrature order must be positive"));
        }
        if let Some(c) = self.cutoffs {
            if c.f_max == 0 || !(c.epsilon > 0.0 && c.epsilon < 1.0) {
                return Err(domain("cutoffs need f_max > 0 and epsilon in (0, 1)"));
            }
        }
        Ok(())
    }
}
