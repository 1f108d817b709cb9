//! Two-mode entangled input states in the Fock basis.
//!
//! Every state except NOON is a pure state in Schmidt form
//! `Σ qₙ |n+δ₁⟩|n+δ₂⟩`, stored as its coefficient vector and the two mode
//! offsets. The photon-operation families are heralded from a two-mode squeezed
//! vacuum (TMSV) through beam splitters of transmissivity `T`.

use alloc::format;
use alloc::vec::Vec;

use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};

/// Default Fock truncation for input states (covers up to 10 dB of squeezing).
pub const DEFAULT_N_MAX: usize = 80;

/// Largest NOON photon number accepted.
pub const NOON_MAX_N: u32 = 10;

/// Two-mode squeezing expressed in dB, as squeezing parameter `r` and as `λ = tanh r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeezing {
    db: f64,
    r: f64,
    lambda: f64,
}

impl Squeezing {
    /// Squeezing from its dB value, `db = -10 log10(exp(-2r))`.
    pub fn from_db(db: f64) -> Result<Self> {
        if !(db >= 0.0) || !db.is_finite() {
            return Err(domain(format!("squeezing must be a finite non-negative dB value, got {db}")));
        }
        let r = db * core::f64::consts::LN_10 / 20.0;
        Self::from_r(r)
    }

    /// Squeezing from the parameter `r >= 0`.
    pub fn from_r(r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(domain(format!("squeezing parameter must be finite and non-negative, got {r}")));
        }
        let lambda = r.tanh();
        if lambda >= 1.0 {
            return Err(domain(format!("squeezing r = {r} saturates λ to 1")));
        }
        Ok(Self {
            db: 20.0 * r / core::f64::consts::LN_10,
            r,
            lambda,
        })
    }

    /// Squeezing from `λ ∈ [0, 1)`.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(domain(format!("λ must lie in [0, 1), got {lambda}")));
        }
        let r = lambda.atanh();
        Ok(Self {
            db: 20.0 * r / core::f64::consts::LN_10,
            r,
            lambda,
        })
    }

    /// Squeezing in dB.
    pub fn db(&self) -> f64 {
        self.db
    }

    /// Squeezing parameter `r`.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// `λ = tanh r`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Quadrature variance of each TMSV mode, `cosh 2r`, in vacuum units.
    pub fn variance(&self) -> f64 {
        let l2 = self.lambda * self.lambda;
        (1.0 + l2) / (1.0 - l2)
    }
}

/// Convenience wrapper for [`Squeezing::from_db`].
pub fn squeezing_from_db(db: f64) -> Result<Squeezing> {
    Squeezing::from_db(db)
}

/// State families. Subscript `B` operates on both modes, `S` on mode 2 only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Two-mode squeezed vacuum.
    Tmsv,
    /// Photon subtraction on both modes.
    PssB,
    /// Photon subtraction on a single mode.
    PssS,
    /// Photon addition on both modes.
    PasB,
    /// Photon addition on a single mode.
    PasS,
    /// Photon replacement on both modes.
    PrsB,
    /// Photon replacement on a single mode.
    PrsS,
    /// `(|n,0⟩ + |0,n⟩)/√2`.
    Noon,
}

impl Family {
    /// All families in canonical order.
    pub const ALL: [Family; 8] = [
        Family::Tmsv,
        Family::PssB,
        Family::PssS,
        Family::PasB,
        Family::PasS,
        Family::PrsB,
        Family::PrsS,
        Family::Noon,
    ];

    /// The six heralded photon-operation families.
    pub const PHOTON_OPERATIONS: [Family; 6] = [
        Family::PssB,
        Family::PssS,
        Family::PasB,
        Family::PasS,
        Family::PrsB,
        Family::PrsS,
    ];

    /// Whether the family is produced by a beam-splitter photon operation.
    pub fn needs_transmissivity(self) -> bool {
        !matches!(self, Family::Tmsv | Family::Noon)
    }

    /// Whether the operation acts on a single mode.
    pub fn is_single_mode(self) -> bool {
        matches!(self, Family::PssS | Family::PasS | Family::PrsS)
    }

    /// Lower-case label used on the command line and in result files.
    pub fn label(self) -> &'static str {
        match self {
            Family::Tmsv => "tmsv",
            Family::PssB => "pss_b",
            Family::PssS => "pss_s",
            Family::PasB => "pas_b",
            Family::PasS => "pas_s",
            Family::PrsB => "prs_b",
            Family::PrsS => "prs_s",
            Family::Noon => "noon",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.label() == norm)
            .ok_or_else(|| domain(format!("unknown state family '{s}'")))
    }
}

/// Everything needed to build one input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRecipe {
    family: Family,
    squeezing: Option<Squeezing>,
    transmissivity: Option<f64>,
    noon_n: Option<u32>,
}

impl StateRecipe {
    /// A two-mode squeezed vacuum.
    pub fn tmsv(squeezing: Squeezing) -> Self {
        Self {
            family: Family::Tmsv,
            squeezing: Some(squeezing),
            transmissivity: None,
            noon_n: None,
        }
    }

    /// A heralded photon-operation state derived from a TMSV with `squeezing`.
    pub fn photon_operation(family: Family, squeezing: Squeezing, transmissivity: f64) -> Result<Self> {
        if !family.needs_transmissivity() {
            return Err(Error::InvalidRecipe(format!("{family} is not a photon-operation family")));
        }
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::InvalidRecipe(format!(
                "beam-splitter transmissivity must lie in [0, 1], got {transmissivity}"
            )));
        }
        if matches!(family, Family::PrsB | Family::PrsS) && transmissivity == 0.0 {
            return Err(Error::InvalidRecipe(format!("{family} with T = 0 is the null state")));
        }
        Ok(Self {
            family,
            squeezing: Some(squeezing),
            transmissivity: Some(transmissivity),
            noon_n: None,
        })
    }

    /// A NOON state with `n` photons, `2 <= n <= 10`.
    pub fn noon(n: u32) -> Result<Self> {
        if !(2..=NOON_MAX_N).contains(&n) {
            return Err(Error::InvalidRecipe(format!(
                "NOON photon number must lie in [2, {NOON_MAX_N}], got {n}"
            )));
        }
        Ok(Self {
            family: Family::Noon,
            squeezing: None,
            transmissivity: None,
            noon_n: Some(n),
        })
    }

    /// Builds a recipe of any family; `transmissivity` is ignored for TMSV.
    pub fn of_family(family: Family, squeezing: Squeezing, transmissivity: f64, noon_n: u32) -> Result<Self> {
        match family {
            Family::Tmsv => Ok(Self::tmsv(squeezing)),
            Family::Noon => Self::noon(noon_n),
            f => Self::photon_operation(f, squeezing, transmissivity),
        }
    }

    /// The same recipe with a different source squeezing.
    pub fn with_squeezing(&self, squeezing: Squeezing) -> Self {
        let mut out = *self;
        if out.squeezing.is_some() {
            out.squeezing = Some(squeezing);
        }
        out
    }

    /// State family.
    pub fn family(&self) -> Family {
        self.family
    }

    /// Source squeezing (absent for NOON).
    pub fn squeezing(&self) -> Option<Squeezing> {
        self.squeezing
    }

    /// Beam-splitter transmissivity (photon operations only).
    pub fn transmissivity(&self) -> Option<f64> {
        self.transmissivity
    }

    /// NOON photon number.
    pub fn noon_n(&self) -> Option<u32> {
        self.noon_n
    }

    /// Label such as `pss_s` or `noon_2`.
    pub fn label(&self) -> alloc::string::String {
        match self.noon_n {
            Some(n) => format!("noon_{n}"),
            None => self.family.label().into(),
        }
    }

    fn lambda_t(&self) -> (f64, f64) {
        (
            self.squeezing.map_or(0.0, |s| s.lambda()),
            self.transmissivity.unwrap_or(1.0),
        )
    }
}

/// Pure state `Σ qₙ |n+offset1⟩₁|n+offset2⟩₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtState {
    coeffs: Vec<f64>,
    offsets: (usize, usize),
    captured_norm: f64,
}

impl SchmidtState {
    /// Builds a normalized state from raw coefficients; `captured_norm` records
    /// `Σ qₙ²` before renormalization.
    pub fn from_coefficients(coeffs: Vec<f64>, offsets: (usize, usize)) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|q| q * q).sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidRecipe("coefficient vector has zero or non-finite norm".into()));
        }
        let scale = norm.sqrt().recip();
        Ok(Self {
            coeffs: coeffs.into_iter().map(|q| q * scale).collect(),
            offsets,
            captured_norm: norm,
        })
    }

    /// Normalized coefficients `q₀..q_{n_max}`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `(offset1, offset2)`.
    pub fn offsets(&self) -> (usize, usize) {
        self.offsets
    }

    /// Truncation index `n_max`.
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Σ qₙ²` of the family formula inside the truncation window, before renormalization.
    pub fn captured_norm(&self) -> f64 {
        self.captured_norm
    }

    /// Largest Fock index occupied on each mode.
    pub fn max_index(&self) -> (usize, usize) {
        (self.n_max() + self.offsets.0, self.n_max() + self.offsets.1)
    }

    /// `2 log2 Σ|qₙ|`. Valid for any offsets since shifted Fock bases remain orthonormal.
    pub(crate) fn schmidt_log_negativity(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|q| q.abs()).sum();
        2.0 * s.log2()
    }

    /// Overlap `⟨self|other⟩`; zero when offsets differ.
    pub fn overlap(&self, other: &SchmidtState) -> f64 {
        if self.offsets != other.offsets {
            return 0.0;
        }
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Fidelity `|⟨self|other⟩|²` between pure states.
    pub fn fidelity(&self, other: &SchmidtState) -> f64 {
        let o = self.overlap(other);
        o * o
    }
}

/// `(|n⟩₁|0⟩₂ + |0⟩₁|n⟩₂)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoonState {
    n: u32,
}

impl NoonState {
    /// Photon number.
    pub fn n(&self) -> u32 {
        self.n
    }
}

/// Any input state this crate can propagate.
#[derive(Debug, Clone, PartialEq)]
pub enum TwoModeState {
    /// Pure Schmidt-form state.
    Schmidt(SchmidtState),
    /// NOON state.
    Noon(NoonState),
}

/// Elementary density entry `ρ_abcd` for `|a⟩⟨c| ⊗ |b⟩⟨d|`.
pub type Element = (usize, usize, usize, usize);

impl TwoModeState {
    /// Non-zero density-matrix entries of `|ψ⟩⟨ψ|`.
    pub fn density_entries(&self) -> Vec<(Element, f64)> {
        match self {
            TwoModeState::Schmidt(s) => {
                let (o1, o2) = s.offsets;
                let mut out = Vec::new();
                for (i, &qi) in s.coeffs.iter().enumerate() {
                    if qi == 0.0 {
                        continue;
                    }
                    for (j, &qj) in s.coeffs.iter().enumerate() {
                        let v = qi * qj;
                        if v != 0.0 {
                            out.push(((i + o1, i + o2, j + o1, j + o2), v));
                        }
                    }
                }
                out
            }
            TwoModeState::Noon(s) => {
                let n = s.n as usize;
                alloc::vec![
                    ((0, n, 0, n), 0.5),
                    ((0, n, n, 0), 0.5),
                    ((n, 0, 0, n), 0.5),
                    ((n, 0, n, 0), 0.5),
                ]
            }
        }
    }

    /// Largest Fock index occupied on each mode.
    pub fn max_index(&self) -> (usize, usize) {
        match self {
            TwoModeState::Schmidt(s) => s.max_index(),
            TwoModeState::Noon(s) => (s.n as usize, s.n as usize),
        }
    }

    /// The Schmidt form, if the state has one.
    pub fn as_schmidt(&self) -> Option<&SchmidtState> {
        match self {
            TwoModeState::Schmidt(s) => Some(s),
            TwoModeState::Noon(_) => None,
        }
    }
}

/// Unnormalized family coefficients `qₙ` for `n ∈ [0, n_max]`, with the
/// closed-form normalization prefactor of each family included.
fn family_coefficients(family: Family, lambda: f64, t: f64, n_max: usize) -> Vec<f64> {
    let l2 = lambda * lambda;
    let t2 = t * t;
    let t4 = t2 * t2;
    (0..=n_max)
        .map(|n| {
            let nf = n as f64;
            let ni = n as i32;
            match family {
                Family::Tmsv => lambda.powi(ni) * (1.0 - l2).sqrt(),
                Family::PssB => {
                    let x = l2 * t4;
                    ((1.0 - x).powi(3) / (1.0 + x)).sqrt() * (lambda * t2).powi(ni) * (nf + 1.0)
                }
                Family::PssS | Family::PasS => {
                    (1.0 - l2 * t2) * (lambda * t).powi(ni) * (nf + 1.0).sqrt()
                }
                Family::PasB => {
                    if n == 0 {
                        0.0
                    } else {
                        let x = l2 * t4;
                        ((1.0 - x).powi(3) / (1.0 + x)).sqrt() * (lambda * t2).powi(ni - 1) * nf
                    }
                }
                Family::PrsB => {
                    let bracket = t2 - nf * (1.0 - t2);
                    (1.0 - l2).sqrt() * lambda.powi(ni) * t.powi(2 * ni - 2) * bracket * bracket
                        / prs_b_probability(lambda, t).sqrt()
                }
                Family::PrsS => {
                    let bracket = t2 - nf * (1.0 - t2);
                    (1.0 - l2).sqrt() * lambda.powi(ni) * t.powi(ni - 1) * bracket
                        / prs_s_probability(lambda, t).sqrt()
                }
                Family::Noon => unreachable!("NOON has no Schmidt coefficients"),
            }
        })
        .collect()
}

fn prs_b_probability(lambda: f64, t: f64) -> f64 {
    let l2 = lambda * lambda;
    let t2 = t * t;
    let t4 = t2 * t2;
    let t6 = t4 * t2;
    let t8 = t4 * t4;
    let bracket = t4
        + (1.0 - 8.0 * t2 + 24.0 * t4 - 32.0 * t6 + 11.0 * t8) * l2
        + t4 * (11.0 - 56.0 * t2 + 96.0 * t4 - 56.0 * t6 + 11.0 * t8) * l2 * l2
        + t8 * (11.0 - 32.0 * t2 + 24.0 * t4 - 8.0 * t6 + t8) * l2 * l2 * l2
        + t8 * t4 * l2 * l2 * l2 * l2;
    (1.0 - l2) / (1.0 - t4 * l2).powi(5) * bracket
}

fn prs_s_probability(lambda: f64, t: f64) -> f64 {
    let l2 = lambda * lambda;
    let t2 = t * t;
    (1.0 - l2) / (1.0 - t2 * l2).powi(3) * (l2 + t2 * (1.0 + (t2 - 4.0) * l2 + l2 * l2))
}

/// Builds the state described by `recipe`, truncated at `n_max` and renormalized.
pub fn build_state(recipe: &StateRecipe, n_max: usize) -> Result<TwoModeState> {
    if let Some(n) = recipe.noon_n {
        return Ok(TwoModeState::Noon(NoonState { n }));
    }
    let (lambda, t) = recipe.lambda_t();
    let offsets = match recipe.family {
        Family::PssS => (1, 0),
        Family::PasS => (0, 1),
        _ => (0, 0),
    };
    let coeffs = family_coefficients(recipe.family, lambda, t, n_max);
    SchmidtState::from_coefficients(coeffs, offsets).map(TwoModeState::Schmidt)
}

/// Heralding probability `P_c` of the recipe. TMSV is deterministic; single
/// photons are assumed available on demand.
pub fn creation_probability(recipe: &StateRecipe) -> f64 {
    let (lambda, t) = recipe.lambda_t();
    let l2 = lambda * lambda;
    let t2 = t * t;
    let t4 = t2 * t2;
    let p = match recipe.family {
        Family::Tmsv => 1.0,
        Family::PssB => l2 * (1.0 - l2) * (1.0 + l2 * t4) * (1.0 - t2).powi(2) / (1.0 - l2 * t4).powi(3),
        Family::PssS => l2 * (1.0 - l2) * (1.0 - t2) / (1.0 - l2 * t2).powi(2),
        Family::PasB => (1.0 - l2) * (1.0 + l2 * t4) * (1.0 - t2).powi(2) / (1.0 - l2 * t4).powi(3),
        Family::PasS => (1.0 - l2) * (1.0 - t2) / (1.0 - l2 * t2).powi(2),
        Family::PrsB => prs_b_probability(lambda, t),
        Family::PrsS => prs_s_probability(lambda, t),
        Family::Noon => noon_probability(recipe.noon_n.unwrap_or(2)),
    };
    p.clamp(0.0, 1.0)
}

fn noon_probability(n: u32) -> f64 {
    if n <= 2 {
        return 1.0;
    }
    let factorial: f64 = (1..n).map(f64::from).product();
    factorial * (2.0 * f64::from(n)).powi(1 - n as i32)
}

/// `E_LN = 2 log2 Σ|qₙ|` of an un-evolved pure state with equal mode offsets.
pub fn analytic_log_negativity(state: &SchmidtState) -> Result<f64> {
    if state.offsets.0 != state.offsets.1 {
        return Err(Error::UnsupportedForm(format!(
            "analytic log-negativity needs equal mode offsets, got {:?}",
            state.offsets
        )));
    }
    Ok(state.schmidt_log_negativity())
}

fn initial_log_negativity(recipe: &StateRecipe, n_max: usize) -> Result<f64> {
    match build_state(recipe, n_max)? {
        TwoModeState::Schmidt(s) => Ok(s.schmidt_log_negativity()),
        TwoModeState::Noon(_) => Ok(1.0),
    }
}

/// Un-evolved logarithmic negativity of any recipe (NOON states carry exactly 1 ebit).
pub fn recipe_log_negativity(recipe: &StateRecipe, n_max: usize) -> Result<f64> {
    initial_log_negativity(recipe, n_max)
}

const CALIBRATION_LAMBDA_MIN: f64 = 1e-6;
const CALIBRATION_LAMBDA_MAX: f64 = 1.0 - 1e-6;
const CALIBRATION_MAX_ITER: usize = 200;
const CALIBRATION_TOL: f64 = 1e-10;

/// Re-tunes the source squeezing of `recipe` (keeping family and `T`) so the
/// un-evolved state carries `target_eln` ebits. NOON recipes are accepted
/// unchanged for a 1-ebit target and rejected otherwise.
pub fn calibrate_to_entanglement(recipe: &StateRecipe, target_eln: f64, n_max: usize) -> Result<StateRecipe> {
    if !(target_eln > 0.0) || !target_eln.is_finite() {
        return Err(domain(format!("target entanglement must be positive, got {target_eln}")));
    }
    if recipe.family == Family::Noon {
        if (target_eln - 1.0).abs() <= 1e-12 {
            return Ok(*recipe);
        }
        return Err(Error::NoSolution(format!(
            "NOON states always carry 1 ebit, cannot reach {target_eln}"
        )));
    }
    let eln_at = |lambda: f64| -> Result<f64> {
        let sq = Squeezing::from_lambda(lambda)?;
        initial_log_negativity(&recipe.with_squeezing(sq), n_max)
    };

    // E_LN must be monotone in λ for the bisection to be meaningful.
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=32 {
        let lambda = CALIBRATION_LAMBDA_MIN + (CALIBRATION_LAMBDA_MAX - CALIBRATION_LAMBDA_MIN) * k as f64 / 32.0;
        let e = eln_at(lambda)?;
        if e < prev - 1e-12 {
            return Err(Error::NoSolution(format!(
                "E_LN of {} is not monotone in λ near λ = {lambda:.4}",
                recipe.label()
            )));
        }
        prev = e;
    }

    let (mut lo, mut hi) = (CALIBRATION_LAMBDA_MIN, CALIBRATION_LAMBDA_MAX);
    let (e_lo, e_hi) = (eln_at(lo)?, eln_at(hi)?);
    if target_eln < e_lo || target_eln > e_hi {
        return Err(Error::NoSolution(format!(
            "{} reaches E_LN in [{e_lo:.6}, {e_hi:.6}], target {target_eln} is outside",
            recipe.label()
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..CALIBRATION_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let e = eln_at(mid)?;
        if (e - target_eln).abs() <= CALIBRATION_TOL {
            break;
        }
        if e < target_eln {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(recipe.with_squeezing(Squeezing::from_lambda(mid)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn schmidt(recipe: &StateRecipe, n_max: usize) -> SchmidtState {
        match build_state(recipe, n_max).unwrap() {
            TwoModeState::Schmidt(s) => s,
            TwoModeState::Noon(_) => panic!("expected Schmidt state"),
        }
    }

    #[test]
    fn squeezing_closed_forms() {
        let zero = Squeezing::from_db(0.0).unwrap();
        assert_eq!((zero.r(), zero.lambda()), (0.0, 0.0));
        let ten = Squeezing::from_db(10.0).unwrap();
        assert_relative_eq!(ten.lambda(), 9.0 / 11.0, epsilon = 1e-14);
        let three = Squeezing::from_db(3.0).unwrap();
        let g = 10f64.powf(0.3);
        assert_relative_eq!(three.lambda(), (g - 1.0) / (g + 1.0), epsilon = 1e-14);
        assert_relative_eq!(three.lambda(), 0.332_278_849_166_244, epsilon = 1e-13);
        for db in [0.5, 3.0, 7.25, 10.0, 15.0] {
            let s = Squeezing::from_db(db).unwrap();
            assert_relative_eq!(-10.0 * (-2.0 * s.r()).exp().log10(), db, epsilon = 1e-12);
            let back = Squeezing::from_lambda(s.lambda()).unwrap();
            assert_relative_eq!(back.db(), db, epsilon = 1e-9);
        }
        assert!(Squeezing::from_db(-1.0).is_err());
        assert!(Squeezing::from_lambda(1.0).is_err());
    }

    #[test]
    fn tmsv_coefficients_are_geometric() {
        let sq = Squeezing::from_lambda(1.0 / 3.0).unwrap();
        let s = schmidt(&StateRecipe::tmsv(sq), 40);
        let norm = (8.0f64 / 9.0).sqrt();
        let tail = (1.0f64 / 9.0).powi(41);
        assert_relative_eq!(s.captured_norm(), 1.0 - tail, epsilon = 1e-15);
        for (n, q) in s.coeffs().iter().enumerate() {
            assert_relative_eq!(*q, (1.0f64 / 3.0).powi(n as i32) * norm, max_relative = 1e-12);
        }
        assert_relative_eq!(analytic_log_negativity(&s).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn analytic_log_negativity_closed_forms() {
        let ten = schmidt(&StateRecipe::tmsv(Squeezing::from_db(10.0).unwrap()), DEFAULT_N_MAX);
        // E = log2((1+λ)/(1-λ)) = log2 10 at 10 dB, up to the n_max = 80 truncation.
        assert_relative_eq!(analytic_log_negativity(&ten).unwrap(), core::f64::consts::LOG2_10, epsilon = 1e-6);
        let vacuum = SchmidtState::from_coefficients(alloc::vec![1.0], (0, 0)).unwrap();
        assert_eq!(analytic_log_negativity(&vacuum).unwrap(), 0.0);
        let pss_s = schmidt(
            &StateRecipe::photon_operation(Family::PssS, Squeezing::from_db(3.0).unwrap(), 0.9).unwrap(),
            40,
        );
        assert!(matches!(analytic_log_negativity(&pss_s), Err(Error::UnsupportedForm(_))));
    }

    #[test]
    fn pss_b_matches_closed_form_schmidt_sum() {
        // Σ y^n (n+1) = 1/(1-y)^2 with y = λT², normalization √((1-x)³/(1+x)), x = y².
        let sq = Squeezing::from_db(3.0).unwrap();
        let t = 0.9;
        let s = schmidt(&StateRecipe::photon_operation(Family::PssB, sq, t).unwrap(), DEFAULT_N_MAX);
        let y = sq.lambda() * t * t;
        let x = y * y;
        let expected = 2.0 * (((1.0 - x).powi(3) / (1.0 + x)).sqrt() / (1.0 - y).powi(2)).log2();
        assert_relative_eq!(analytic_log_negativity(&s).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 1.383_022_020_325_107, epsilon = 1e-12);
        assert_relative_eq!(s.captured_norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn prs_at_unit_transmissivity_is_tmsv() {
        for lambda in [0.1, 1.0 / 3.0, 0.6, 9.0 / 11.0] {
            let sq = Squeezing::from_lambda(lambda).unwrap();
            let tmsv = schmidt(&StateRecipe::tmsv(sq), DEFAULT_N_MAX);
            for family in [Family::PrsB, Family::PrsS] {
                let r = StateRecipe::photon_operation(family, sq, 1.0).unwrap();
                assert_relative_eq!(creation_probability(&r), 1.0, epsilon = 1e-12);
                assert_relative_eq!(schmidt(&r, DEFAULT_N_MAX).fidelity(&tmsv), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_creation_probabilities() {
        let sq = Squeezing::from_db(3.0).unwrap();
        for family in [Family::PssB, Family::PasB, Family::PssS, Family::PasS] {
            let r = StateRecipe::photon_operation(family, sq, 1.0).unwrap();
            assert_eq!(creation_probability(&r), 0.0, "{family}");
        }
        assert_eq!(creation_probability(&StateRecipe::tmsv(sq)), 1.0);
        assert_eq!(creation_probability(&StateRecipe::noon(2).unwrap()), 1.0);
        assert_relative_eq!(creation_probability(&StateRecipe::noon(3).unwrap()), 1.0 / 18.0, epsilon = 1e-15);
        // P_4 = 3! · 8^{-3}
        assert_relative_eq!(creation_probability(&StateRecipe::noon(4).unwrap()), 6.0 / 512.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_probabilities_match_unnormalized_norms() {
        // The PRS coefficient formulas carry 1/√P, so their raw norm must be exactly 1.
        for lambda in [0.1, 0.33, 0.6, 0.8] {
            for t in [0.3, 0.5, 0.9, 0.99] {
                for family in [Family::PrsB, Family::PrsS, Family::PssB, Family::PssS, Family::PasB, Family::PasS] {
                    let raw = family_coefficients(family, lambda, t, 400);
                    let norm: f64 = raw.iter().map(|q| q * q).sum();
                    assert_relative_eq!(norm, 1.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn single_mode_subtraction_and_addition_share_coefficients() {
        let sq = Squeezing::from_lambda(0.45).unwrap();
        let a = schmidt(&StateRecipe::photon_operation(Family::PssS, sq, 0.7).unwrap(), 60);
        let b = schmidt(&StateRecipe::photon_operation(Family::PasS, sq, 0.7).unwrap(), 60);
        assert_eq!(a.coeffs(), b.coeffs());
        assert_eq!((a.offsets(), b.offsets()), ((1, 0), (0, 1)));
        for (n, q) in a.coeffs().iter().enumerate() {
            let expected = (1.0 - 0.45f64.powi(2) * 0.49) * (0.45f64 * 0.7).powi(n as i32) * ((n + 1) as f64).sqrt();
            assert_relative_eq!(*q, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn normalization_and_probability_bounds_on_grid() {
        for lambda in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8] {
            let sq = Squeezing::from_lambda(lambda).unwrap();
            for t in [0.5, 0.6, 0.7, 0.8, 0.9, 0.99] {
                for family in Family::PHOTON_OPERATIONS {
                    let r = StateRecipe::photon_operation(family, sq, t).unwrap();
                    let s = schmidt(&r, DEFAULT_N_MAX);
                    let norm = s.captured_norm();
                    assert!((1.0 - 1e-6..=1.0 + 1e-12).contains(&norm), "{family} λ={lambda} T={t}: {norm}");
                    let p = creation_probability(&r);
                    assert!((0.0..=1.0).contains(&p));
                }
            }
        }
    }

    #[test]
    fn invalid_recipes_are_rejected() {
        let sq = Squeezing::from_db(3.0).unwrap();
        assert!(StateRecipe::photon_operation(Family::PrsB, sq, 0.0).is_err());
        assert!(StateRecipe::photon_operation(Family::PssB, sq, 1.2).is_err());
        assert!(StateRecipe::photon_operation(Family::Tmsv, sq, 0.5).is_err());
        assert!(StateRecipe::noon(1).is_err());
        assert!(StateRecipe::noon(11).is_err());
        let pas_b = StateRecipe::photon_operation(Family::PasB, sq, 0.5).unwrap();
        assert!(build_state(&pas_b, 0).is_err());
    }

    #[test]
    fn calibration_hits_targets() {
        let tmsv = StateRecipe::tmsv(Squeezing::from_db(3.0).unwrap());
        let c = calibrate_to_entanglement(&tmsv, 1.0, DEFAULT_N_MAX).unwrap();
        assert_relative_eq!(c.squeezing().unwrap().lambda(), 1.0 / 3.0, epsilon = 1e-9);

        let sq = Squeezing::from_db(3.0).unwrap();
        for family in Family::PHOTON_OPERATIONS {
            let r = StateRecipe::photon_operation(family, sq, 0.9).unwrap();
            let c = calibrate_to_entanglement(&r, 1.0, DEFAULT_N_MAX).unwrap();
            assert_eq!(c.transmissivity(), Some(0.9));
            let e = recipe_log_negativity(&c, DEFAULT_N_MAX).unwrap();
            assert!((e - 1.0).abs() < 1e-6, "{family}: {e}");
        }

        let noon = StateRecipe::noon(4).unwrap();
        assert_eq!(calibrate_to_entanglement(&noon, 1.0, DEFAULT_N_MAX).unwrap(), noon);
        assert!(calibrate_to_entanglement(&noon, 2.0, DEFAULT_N_MAX).is_err());
        assert!(matches!(
            calibrate_to_entanglement(&tmsv, 40.0, DEFAULT_N_MAX),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn family_labels_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.label().parse::<Family>().unwrap(), f);
        }
        assert_eq!("PSS-S".parse::<Family>().unwrap(), Family::PssS);
        assert!("foo".parse::<Family>().is_err());
    }
}
