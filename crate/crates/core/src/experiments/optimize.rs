use alloc::format;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use super::scenario::Scenario;
use super::{Averaging, Setting};
use crate::channel::Cutoffs;
use crate::error::{domain, Result};
use crate::fading::solve_sigma_for_loss;
use crate::fading::DEFAULT_SPOT_RATIO;
use crate::fockstate::{build_state, creation_probability, recipe_log_negativity, Family, Squeezing, StateRecipe};

/// Quantity maximized over the beam-splitter transmissivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// `E_LN` of the un-evolved state.
    InitialEln,
    /// `P_c · E_LN` of the un-evolved state.
    InitialRate,
    /// `P_c · E_LN` after a fading channel of the given mean loss.
    RateAtLoss {
        /// Mean fading loss in dB.
        loss_db: f64,
        /// Channel geometry.
        setting: Setting,
        /// Ensemble or measured averaging.
        averaging: Averaging,
        /// Excess noise on mode 1.
        chi1: f64,
        /// Excess noise on mode 2.
        chi2: f64,
    },
}

/// Two-stage grid over `T ∈ [t_min, 1]`: a coarse pass, then a fine pass within
/// one coarse step of the coarse winner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGrid {
    /// Lower end of the search interval.
    pub t_min: f64,
    /// Coarse step.
    pub coarse: f64,
    /// Refinement step.
    pub fine: f64,
}

impl Default for TGrid {
    fn default() -> Self {
        Self {
            t_min: 0.5,
            coarse: 0.01,
            fine: 0.001,
        }
    }
}

/// Result of [`optimize_t`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TOptimum {
    /// Maximizing transmissivity (the larger one on ties).
    pub t: f64,
    /// Objective at `t`.
    pub value: f64,
    /// Creation probability at `t`.
    pub p_c: f64,
    /// True when `P_c(t) = 0`: the optimum is a supremum that cannot be prepared.
    pub degenerate: bool,
}

/// Points `hi, hi − step, …` down to `lo`, snapped to multiples of `step` so
/// the grid is reproducible.
fn descending(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| hi - k as f64 * step).filter(|&t| t >= lo - 1e-12).map(|t| t.max(lo)).collect()
}

/// Grid search of `objective` over the transmissivity of `family` applied to a TMSV of `squeezing`.
pub fn optimize_t(family: Family, squeezing: Squeezing, objective: &Objective, grid: &TGrid, n_max: usize) -> Result<TOptimum> {
    if !family.needs_transmissivity() {
        return Err(domain(format!("{family} has no transmissivity to optimize")));
    }
    if !(grid.t_min > 0.0 && grid.t_min < 1.0 && grid.coarse > 0.0 && grid.fine > 0.0 && grid.fine <= grid.coarse) {
        return Err(domain("T grid needs 0 < t_min < 1 and 0 < fine <= coarse"));
    }
    let cutoffs = Cutoffs::for_squeezing_db(squeezing.db());
    let scenario = match *objective {
        Objective::RateAtLoss {
            loss_db,
            setting,
            averaging,
            chi1,
            chi2,
        } => {
            let ch = solve_sigma_for_loss(loss_db, 1.0, DEFAULT_SPOT_RATIO)?;
            let mut sc = Scenario::fading(setting, averaging, &ch, chi1, chi2, None, cutoffs, n_max + 1)?;
            if averaging == Averaging::Ensemble {
                sc.prepare_ensemble();
            }
            Some((sc, averaging))
        }
        _ => None,
    };
    let eval = |t: f64| -> Result<(f64, f64)> {
        let recipe = StateRecipe::photon_operation(family, squeezing, t)?;
        let p_c = creation_probability(&recipe);
        let value = match (&scenario, objective) {
            (Some((sc, averaging)), _) => {
                if p_c == 0.0 {
                    0.0
                } else {
                    p_c * sc.evaluate(&build_state(&recipe, n_max)?, *averaging)?.eln
                }
            }
            (None, Objective::InitialEln) => recipe_log_negativity(&recipe, n_max)?,
            (None, _) => p_c * recipe_log_negativity(&recipe, n_max)?,
        };
        Ok((value, p_c))
    };

    let mut best: Option<TOptimum> = None;
    let consider = |t: f64, best: &mut Option<TOptimum>| -> Result<()> {
        let (value, p_c) = eval(t)?;
        // Candidates arrive in descending T, so a tie keeps the larger T.
        let better = match best {
            None => true,
            Some(b) => value > b.value + 1e-12 * b.value.abs().max(1e-300),
        };
        if better {
            *best = Some(TOptimum {
                t,
                value,
                p_c,
                degenerate: p_c == 0.0,
            });
        }
        Ok(())
    };
    for t in descending(grid.t_min, 1.0, grid.coarse) {
        consider(t, &mut best)?;
    }
    let centre = best.map_or(1.0, |b| b.t);
    let lo = (centre - grid.coarse).max(grid.t_min);
    let hi = (centre + grid.coarse).min(1.0);
    for t in descending(lo, hi, grid.fine) {
        consider(t, &mut best)?;
    }
    best.ok_or_else(|| domain("empty T grid"))
}
