use alloc::vec::Vec;

use super::{Averaging, Setting};
use crate::channel::{evolve_with_maps, BipartiteDensity, ChannelParams, Cutoffs, EvolutionInput, ModeMap};
use crate::entanglement::log_negativity_of;
use crate::error::Result;
use crate::fading::{FadingChannel, QuadratureRule, SYMMETRIC_ORDER};
use crate::fockstate::TwoModeState;

/// Transmittance distributions and noise of the two modes, with the
/// fading-averaged single-mode maps precomputed for ensemble evaluation.
#[derive(Debug, Clone)]
pub struct Scenario {
    rule1: QuadratureRule,
    rule2: QuadratureRule,
    chi1: f64,
    chi2: f64,
    cutoffs: Cutoffs,
    in_max: usize,
    averaged: Option<(ModeMap, ModeMap)>,
}

/// Entanglement of one state in one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Logarithmic negativity (ensemble or measured).
    pub eln: f64,
    /// Largest trace deficit among the evolved operators.
    pub trace_deficit: f64,
    /// Quadrature nodes on the transmitted mode.
    pub quadrature_order: usize,
}

impl Scenario {
    /// Scenario from explicit transmittance rules for the two modes. Input states
    /// may use Fock indices up to `in_max` on either mode.
    pub fn from_rules(
        rule1: QuadratureRule,
        rule2: QuadratureRule,
        chi1: f64,
        chi2: f64,
        cutoffs: Cutoffs,
        in_max: usize,
    ) -> Result<Self> {
        ChannelParams::new(1.0, chi1)?;
        ChannelParams::new(1.0, chi2)?;
        Ok(Self {
            rule1,
            rule2,
            chi1,
            chi2,
            cutoffs,
            in_max,
            averaged: None,
        })
    }

    /// Fixed amplitude transmissions on both modes.
    pub fn fixed(eta1: f64, eta2: f64, chi1: f64, chi2: f64, cutoffs: Cutoffs, in_max: usize) -> Result<Self> {
        ChannelParams::new(eta1, chi1)?;
        ChannelParams::new(eta2, chi2)?;
        Self::from_rules(QuadratureRule::dirac(eta1), QuadratureRule::dirac(eta2), chi1, chi2, cutoffs, in_max)
    }

    /// Fading scenario for `setting`. `order` overrides the quadrature order; by
    /// default the convergence-checked rule is used, or [`SYMMETRIC_ORDER`] nodes per
    /// axis for measured symmetric averaging.
    #[allow(clippy::too_many_arguments)]
    pub fn fading(
        setting: Setting,
        averaging: Averaging,
        ch: &FadingChannel,
        chi1: f64,
        chi2: f64,
        order: Option<usize>,
        cutoffs: Cutoffs,
        in_max: usize,
    ) -> Result<Self> {
        let rule = match (order, setting, averaging) {
            (Some(n), _, _) => QuadratureRule::for_channel(ch, n),
            (None, Setting::Symmetric, Averaging::Measured) => QuadratureRule::for_channel(ch, SYMMETRIC_ORDER),
            (None, _, _) => QuadratureRule::converged(ch),
        };
        let rule1 = match setting {
            Setting::Asymmetric => QuadratureRule::dirac(1.0),
            Setting::Symmetric => rule.clone(),
        };
        Self::from_rules(rule1, rule, chi1, chi2, cutoffs, in_max)
    }

    /// Transmittance rule of mode 1.
    pub fn rule1(&self) -> &QuadratureRule {
        &self.rule1
    }

    /// Transmittance rule of mode 2.
    pub fn rule2(&self) -> &QuadratureRule {
        &self.rule2
    }

    /// Truncation in use.
    pub fn cutoffs(&self) -> &Cutoffs {
        &self.cutoffs
    }

    fn build_averaged(&self) -> (ModeMap, ModeMap) {
        let (c, n) = (self.cutoffs, self.in_max);
        let avg = |r: &QuadratureRule, chi: f64| ModeMap::fading_average(r.nodes(), r.weights(), chi, c.ellp_max, n, c.f_max);
        (avg(&self.rule1, self.chi1), avg(&self.rule2, self.chi2))
    }

    /// Precomputes the fading-averaged maps for repeated ensemble evaluations.
    pub fn prepare_ensemble(&mut self) {
        if self.averaged.is_none() {
            self.averaged = Some(self.build_averaged());
        }
    }

    /// The ensemble-average operator `∫∫ p₁ p₂ ρ(η₁, η₂)`. By linearity this is the
    /// input pushed through the averaged map of each mode.
    pub fn evolve_ensemble(&self, state: &TwoModeState) -> Result<BipartiteDensity> {
        let c = self.cutoffs;
        match &self.averaged {
            Some((m1, m2)) => evolve_with_maps(EvolutionInput::State(state), m1, m2, &c),
            None => {
                let (m1, m2) = self.build_averaged();
                evolve_with_maps(EvolutionInput::State(state), &m1, &m2, &c)
            }
        }
    }

    /// Maps of every node of both rules, for measured averaging.
    fn node_maps(&self) -> (Vec<ModeMap>, Vec<ModeMap>) {
        let c = self.cutoffs;
        let build = |rule: &QuadratureRule, chi: f64| -> Vec<ModeMap> {
            rule.nodes()
                .iter()
                .map(|&eta| {
                    let p = ChannelParams::new(eta.clamp(0.0, 1.0), chi).expect("validated noise");
                    ModeMap::from_params(&p, c.ellp_max, self.in_max, c.f_max)
                })
                .collect()
        };
        (build(&self.rule1, self.chi1), build(&self.rule2, self.chi2))
    }

    /// Applies `f` to the evolved operator at every node pair and returns the
    /// probability-weighted mean together with the largest trace deficit.
    pub fn measured_average<F>(&self, state: &TwoModeState, mut f: F) -> Result<(f64, f64)>
    where
        F: FnMut(&BipartiteDensity) -> Result<f64>,
    {
        let (maps1, maps2) = self.node_maps();
        let mut mean = 0.0;
        let mut worst: f64 = 0.0;
        for (m1, w1) in maps1.iter().zip(self.rule1.weights()) {
            for (m2, w2) in maps2.iter().zip(self.rule2.weights()) {
                let rho = evolve_with_maps(EvolutionInput::State(state), m1, m2, &self.cutoffs)?;
                worst = worst.max(rho.trace_deficit());
                mean += w1 * w2 * f(&rho)?;
            }
        }
        Ok((mean, worst))
    }

    /// Logarithmic negativity of `state` under `averaging`.
    pub fn evaluate(&self, state: &TwoModeState, averaging: Averaging) -> Result<Evaluation> {
        let (eln, trace_deficit) = match averaging {
            Averaging::Ensemble => {
                let rho = self.evolve_ensemble(state)?;
                (log_negativity_of(&rho)?, rho.trace_deficit())
            }
            Averaging::Measured => self.measured_average(state, log_negativity_of)?,
        };
        Ok(Evaluation {
            eln,
            trace_deficit,
            quadrature_order: self.rule2.order(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::evolve;
    use crate::fockstate::{build_state, Squeezing, StateRecipe};
    use approx::assert_relative_eq;

    fn tmsv() -> TwoModeState {
        build_state(&StateRecipe::tmsv(Squeezing::from_lambda(1.0 / 3.0).unwrap()), 40).unwrap()
    }

    #[test]
    fn fixed_scenario_matches_direct_evolution() {
        let s = tmsv();
        let c = Cutoffs::uniform(12);
        let e = 0.5f64.sqrt();
        let mut sc = Scenario::fixed(1.0, e, 0.0, 0.02, c, 41).unwrap();
        sc.prepare_ensemble();
        let a = sc.evolve_ensemble(&s).unwrap();
        let p2 = ChannelParams::new(e, 0.02).unwrap();
        let b = evolve(EvolutionInput::State(&s), &ChannelParams::identity(), &p2, &c).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
        let ens = sc.evaluate(&s, Averaging::Ensemble).unwrap();
        let meas = sc.evaluate(&s, Averaging::Measured).unwrap();
        assert_relative_eq!(ens.eln, meas.eln, epsilon = 1e-12);
    }

    #[test]
    fn two_point_mixture() {
        // Ensemble of a two-point distribution equals the mixture of the two outputs.
        let s = tmsv();
        let c = Cutoffs::uniform(12);
        let rule = QuadratureRule::from_parts(alloc::vec![0.9, 0.4], alloc::vec![0.25, 0.75]).unwrap();
        let sc = Scenario::from_rules(QuadratureRule::dirac(1.0), rule, 0.0, 0.0, c, 41).unwrap();
        let rho = sc.evolve_ensemble(&s).unwrap();
        let at = |eta: f64| {
            evolve(EvolutionInput::State(&s), &ChannelParams::identity(), &ChannelParams::new(eta, 0.0).unwrap(), &c).unwrap()
        };
        let (r1, r2) = (at(0.9), at(0.4));
        let mix = BipartiteDensity::weighted_sum([(0.25, &r1), (0.75, &r2)]).unwrap();
        assert!(rho.max_abs_diff(&mix) < 1e-13);
        let (m, _) = sc.measured_average(&s, log_negativity_of).unwrap();
        let want = 0.25 * log_negativity_of(&r1).unwrap() + 0.75 * log_negativity_of(&r2).unwrap();
        assert_relative_eq!(m, want, epsilon = 1e-13);
    }
}
