use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::optimize::{optimize_t, Objective, TGrid};
use super::scenario::Scenario;
use super::{StateSource, SweepConfig, TChoice};
use crate::channel::Cutoffs;
use crate::error::{Error, Result};
use crate::fading::{solve_sigma_for_loss, FadingChannel};
use crate::fockstate::{
    build_state, calibrate_to_entanglement, creation_probability, recipe_log_negativity, Squeezing, StateRecipe,
    TwoModeState,
};

/// A sweep state after calibration or transmissivity selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedState {
    /// Output label.
    pub label: String,
    /// The concrete recipe.
    pub recipe: StateRecipe,
    /// Creation probability.
    pub p_c: f64,
    /// Un-evolved logarithmic negativity.
    pub initial_eln: f64,
}

/// One `(loss, state)` result.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Mean fading loss in dB.
    pub loss_db: f64,
    /// State label.
    pub state: String,
    /// Logarithmic negativity, when requested.
    pub eln: Option<f64>,
    /// Creation probability.
    pub p_c: f64,
    /// Rate `P_c · E_LN`, when requested.
    pub rate: Option<f64>,
    /// Largest trace deficit of the evolved operators.
    pub trace_deficit: f64,
    /// Quadrature nodes on the transmitted mode.
    pub quadrature_order: usize,
    /// Beam-wander deviation that produces `loss_db`.
    pub sigma_b: f64,
}

/// Rows in `(loss, state)` order plus the resolved inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// All rows, loss-major.
    pub rows: Vec<SweepRow>,
    /// States as actually simulated.
    pub states: Vec<ResolvedState>,
    /// Truncation used.
    pub cutoffs: Cutoffs,
}

impl SweepResult {
    /// Rows of one state, in loss order.
    pub fn series<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.state == label)
    }
}

/// A validated sweep with its states built, ready to evaluate loss points independently.
#[derive(Debug, Clone)]
pub struct Sweep {
    cfg: SweepConfig,
    states: Vec<(ResolvedState, TwoModeState)>,
    cutoffs: Cutoffs,
}

fn resolve(source: &StateSource, n_max: usize) -> Result<StateRecipe> {
    match *source {
        StateSource::Recipe(r) => Ok(r),
        StateSource::Derived { family, squeezing, t } => {
            let t = match (family.needs_transmissivity(), t) {
                (false, _) => 1.0,
                (true, TChoice::Fixed(t)) => t,
                (true, TChoice::MaxInitialEln) => {
                    optimize_t(family, squeezing, &Objective::InitialEln, &TGrid::default(), n_max)?.t
                }
                (true, TChoice::MaxInitialRate) => {
                    optimize_t(family, squeezing, &Objective::InitialRate, &TGrid::default(), n_max)?.t
                }
            };
            StateRecipe::of_family(family, squeezing, t, 2)
        }
        StateSource::Calibrated {
            family,
            transmissivity,
            target_eln,
            noon_n,
        } => {
            let seed = Squeezing::from_lambda(0.5)?;
            let recipe = StateRecipe::of_family(family, seed, transmissivity, noon_n)?;
            calibrate_to_entanglement(&recipe, target_eln, n_max)
        }
    }
}

impl Sweep {
    /// Validates `cfg`, resolves every state and fixes the cutoffs.
    pub fn prepare(cfg: SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let mut states = Vec::with_capacity(cfg.states.len());
        for source in &cfg.states {
            let recipe = resolve(source, cfg.n_max)?;
            let state = build_state(&recipe, cfg.n_max)?;
            let resolved = ResolvedState {
                label: recipe.label(),
                recipe,
                p_c: creation_probability(&recipe),
                initial_eln: recipe_log_negativity(&recipe, cfg.n_max)?,
            };
            states.push((resolved, state));
        }
        let cutoffs = cfg.cutoffs.unwrap_or_else(|| {
            let db = states
                .iter()
                .filter_map(|(r, _)| r.recipe.squeezing())
                .map(|s| s.db())
                .fold(0.0, f64::max);
            let mut c = Cutoffs::for_squeezing_db(db).with_epsilon(cfg.epsilon);
            let noon = states.iter().filter_map(|(r, _)| r.recipe.noon_n()).max().unwrap_or(0) as usize;
            c.f_max = c.f_max.max(noon);
            c
        });
        Ok(Self { cfg, states, cutoffs })
    }

    /// The configuration.
    pub fn config(&self) -> &SweepConfig {
        &self.cfg
    }

    /// States as they will be simulated.
    pub fn states(&self) -> impl Iterator<Item = &ResolvedState> {
        self.states.iter().map(|(r, _)| r)
    }

    /// Truncation in use.
    pub fn cutoffs(&self) -> Cutoffs {
        self.cutoffs
    }

    /// Number of loss points.
    pub fn len(&self) -> usize {
        self.cfg.loss_grid_db.len()
    }

    /// Whether the loss grid is empty (never true after [`Sweep::prepare`]).
    pub fn is_empty(&self) -> bool {
        self.cfg.loss_grid_db.is_empty()
    }

    fn in_max(&self) -> usize {
        self.states
            .iter()
            .map(|(_, s)| {
                let (a, b) = s.max_index();
                a.max(b)
            })
            .max()
            .unwrap_or(0)
    }

    /// The fading channel of loss point `idx`.
    pub fn channel(&self, idx: usize) -> Result<FadingChannel> {
        let loss = self.cfg.loss_grid_db[idx];
        solve_sigma_for_loss(loss, 1.0, self.cfg.spot_ratio).map_err(|e| e.context(format!("loss {loss} dB")))
    }

    /// Evaluates every state at loss point `idx`.
    pub fn run_point(&self, idx: usize) -> Result<Vec<SweepRow>> {
        let loss = self.cfg.loss_grid_db[idx];
        let ch = self.channel(idx)?;
        let cfg = &self.cfg;
        let mut scenario = Scenario::fading(
            cfg.setting,
            cfg.averaging,
            &ch,
            cfg.chi1,
            cfg.chi2,
            cfg.quadrature_order,
            self.cutoffs,
            self.in_max(),
        )?;
        if cfg.averaging == super::Averaging::Ensemble {
            scenario.prepare_ensemble();
        }
        let mut rows = Vec::with_capacity(self.states.len());
        for (resolved, state) in &self.states {
            let ctx = |e: Error| e.context(format!("{} at {loss} dB", resolved.label));
            let ev = scenario.evaluate(state, cfg.averaging).map_err(ctx)?;
            rows.push(SweepRow {
                loss_db: loss,
                state: resolved.label.clone(),
                eln: cfg.metric.reports_eln().then_some(ev.eln),
                p_c: resolved.p_c,
                rate: cfg.metric.reports_rate().then_some(resolved.p_c * ev.eln),
                trace_deficit: ev.trace_deficit,
                quadrature_order: ev.quadrature_order,
                sigma_b: ch.sigma_b(),
            });
        }
        Ok(rows)
    }

    /// Concatenates per-point rows (in loss order) into a result.
    pub fn assemble(&self, points: Vec<Vec<SweepRow>>) -> SweepResult {
        SweepResult {
            rows: points.into_iter().flatten().collect(),
            states: self.states().cloned().collect(),
            cutoffs: self.cutoffs,
        }
    }
}

/// Runs every loss point of `cfg` in order.
pub fn run_sweep(cfg: SweepConfig) -> Result<SweepResult> {
    let sweep = Sweep::prepare(cfg)?;
    let points = (0..sweep.len()).map(|i| sweep.run_point(i)).collect::<Result<Vec<_>>>()?;
    Ok(sweep.assemble(points))
}
