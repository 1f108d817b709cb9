use alloc::boxed::Box;
use alloc::vec::Vec;

use super::scenario::Scenario;
use super::Averaging;
use crate::channel::Cutoffs;
use crate::entanglement::{gaussian_log_negativity, tmsv_covariance_after_channel};
use crate::error::Result;
use crate::fading::FadingChannel;
use crate::fockstate::{build_state, creation_probability, Family, StateRecipe};

/// Number of scan intervals for the threshold condition.
pub const THRESHOLD_SCAN_POINTS: usize = 512;

const ROOT_TOL: f64 = 1e-12;

/// Outcome of the memory-threshold condition
/// `P_c ∫_{η_th}^{η₀} p E^{ng} dη / ∫_0^{η₀} p E^{g} dη = μ`, `μ = P[η >= η_th]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    /// Smallest interior threshold `η_th ∈ (0, η₀)`, if any.
    pub eta_th: Option<f64>,
    /// `μ(η_th)`.
    pub mu: Option<f64>,
    /// Memory timescale in units of the channel coherence time, `μ⁻¹ − 1`.
    pub timescale_factor: Option<f64>,
    /// All interior roots, in increasing `η_th`.
    pub interior_roots: Vec<f64>,
    /// True when `η_th = 0` solves the condition (both sides equal 1).
    pub boundary_root: bool,
    /// Creation probability of the non-Gaussian state.
    pub p_c: f64,
    /// `P_c ∫ p E^{ng} / ∫ p E^{g}` over the whole distribution.
    pub full_ratio: f64,
}

/// Solves the threshold condition for arbitrary integrands `E^{ng}(η)` and `E^{g}(η)`.
///
/// Both sides vanish as `η_th → η₀`, so the condition is written in the exceedance
/// `c = μ(η_th)`: `g(c) = P_c I_ng(c)/I_g(1) − c` with `I(c) = ∫_0^c E(η(c′)) dc′`.
/// The integrands are sampled at [`THRESHOLD_SCAN_POINTS`]` + 1` equally spaced `c`,
/// integrated by the trapezoid rule, and sign changes of `g` are refined by
/// bisection on the piecewise-quadratic interpolant.
pub fn memory_threshold_with<F, G>(ch: &FadingChannel, p_c: f64, mut e_ng: F, mut e_g: G) -> Result<ThresholdResult>
where
    F: FnMut(f64) -> Result<f64>,
    G: FnMut(f64) -> Result<f64>,
{
    let n = THRESHOLD_SCAN_POINTS;
    let h = 1.0 / n as f64;
    let cs: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let etas: Vec<f64> = cs.iter().map(|&c| ch.eta_at_exceedance(c)).collect();
    let mut f_ng = Vec::with_capacity(n + 1);
    let mut f_g = Vec::with_capacity(n + 1);
    for &eta in &etas {
        f_ng.push(e_ng(eta)?);
        f_g.push(e_g(eta)?);
    }
    let cumulative = |f: &[f64]| -> Vec<f64> {
        let mut acc = Vec::with_capacity(f.len());
        acc.push(0.0);
        for k in 1..f.len() {
            acc.push(acc[k - 1] + 0.5 * h * (f[k - 1] + f[k]));
        }
        acc
    };
    let (i_ng, i_g) = (cumulative(&f_ng), cumulative(&f_g));
    let denom = i_g[n];
    let mut out = ThresholdResult {
        eta_th: None,
        mu: None,
        timescale_factor: None,
        interior_roots: Vec::new(),
        boundary_root: false,
        p_c,
        full_ratio: if denom > 0.0 { p_c * i_ng[n] / denom } else { f64::NAN },
    };
    if !(denom > 0.0) {
        return Ok(out);
    }
    let g_at = |k: usize, x: f64| -> f64 {
        // Trapezoid-consistent integral of the linear interpolant on [c_k, c_k + x].
        let slope = if k < n { (f_ng[k + 1] - f_ng[k]) / h } else { 0.0 };
        let i = i_ng[k] + f_ng[k] * x + 0.5 * slope * x * x;
        p_c * i / denom - (cs[k] + x)
    };
    let g: Vec<f64> = (0..=n).map(|k| g_at(k, 0.0)).collect();
    out.boundary_root = g[n].abs() <= ROOT_TOL;

    let mut roots_c = Vec::new();
    for k in 1..n {
        if g[k] == 0.0 {
            roots_c.push(cs[k]);
            continue;
        }
        if g[k] * g[k + 1] < 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g_at(k, mid) * g[k] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let c = cs[k] + 0.5 * (lo + hi);
            if c < 1.0 {
                roots_c.push(c);
            }
        }
    }
    // Larger exceedance means smaller η_th; report roots in increasing η_th.
    roots_c.sort_by(|a, b| b.total_cmp(a));
    out.interior_roots = roots_c.iter().map(|&c| ch.eta_at_exceedance(c)).collect();
    if let Some(&c) = roots_c.first() {
        out.eta_th = Some(ch.eta_at_exceedance(c));
        out.mu = Some(c);
        out.timescale_factor = Some(1.0 / c - 1.0);
    }
    Ok(out)
}

/// Threshold condition for two recipes in the asymmetric setting with excess noise
/// `chi` on the transmitted mode. `E_LN(η)` of a TMSV comes from its covariance
/// matrix; every other state is evolved in the Fock basis.
pub fn memory_threshold(
    non_gaussian: &StateRecipe,
    gaussian: &StateRecipe,
    ch: &FadingChannel,
    chi: f64,
    cutoffs: Cutoffs,
    n_max: usize,
) -> Result<ThresholdResult> {
    let integrand = |recipe: &StateRecipe| -> Result<Box<dyn Fn(f64) -> Result<f64>>> {
        if recipe.family() == Family::Tmsv {
            let lambda = recipe.squeezing().map_or(0.0, |s| s.lambda());
            return Ok(Box::new(move |eta| {
                Ok(gaussian_log_negativity(&tmsv_covariance_after_channel(lambda, 1.0, 0.0, eta, chi)?))
            }));
        }
        let state = build_state(recipe, n_max)?;
        Ok(Box::new(move |eta| {
            Scenario::fixed(1.0, eta, 0.0, chi, cutoffs, n_max + 1)?
                .evaluate(&state, Averaging::Measured)
                .map(|e| e.eln)
        }))
    };
    let (e_ng, e_g) = (integrand(non_gaussian)?, integrand(gaussian)?);
    memory_threshold_with(ch, creation_probability(non_gaussian), e_ng, e_g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockstate::Squeezing;

    fn channel() -> FadingChannel {
        FadingChannel::with_sigma(1.0).unwrap()
    }

    #[test]
    fn identical_integrands_give_only_the_boundary_root() {
        let ch = channel();
        let e = |eta: f64| Ok(eta * eta);
        let r = memory_threshold_with(&ch, 1.0, e, e).unwrap();
        assert!(r.boundary_root);
        assert!(r.eta_th.is_none());
        assert!(r.interior_roots.is_empty());
        assert_eq!(r.full_ratio, 1.0);
    }

    #[test]
    fn scaled_integrand_root_matches_dense_oracle() {
        // P_c = 0.4 with E_ng = 2 E_g: g(1) = −0.2 while g′(0) = 0.8 E(η₀)/⟨E⟩ − 1 > 0.
        let ch = channel();
        let eg = |eta: f64| -> Result<f64> { Ok(eta.powi(4)) };
        let r = memory_threshold_with(&ch, 0.4, |eta| Ok(2.0 * eg(eta)?), eg).unwrap();
        let c = r.mu.expect("root");
        assert!(!r.boundary_root);
        assert_eq!(r.interior_roots.len(), 1);

        // Oracle: 200k-point midpoint sums of the same condition.
        let m = 200_000;
        let mut acc = 0.0;
        let vals: Vec<f64> = (0..m)
            .map(|k| {
                let cc = (k as f64 + 0.5) / m as f64;
                ch.eta_at_exceedance(cc).powi(4)
            })
            .collect();
        let total: f64 = vals.iter().sum::<f64>() / m as f64;
        let mut root = None;
        let mut prev = 0.0;
        for (k, v) in vals.iter().enumerate() {
            acc += v / m as f64;
            let cc = (k + 1) as f64 / m as f64;
            let gv = 0.8 * acc / total - cc;
            if k > 0 && prev > 0.0 && gv <= 0.0 {
                root = Some(cc);
            }
            prev = gv;
        }
        let want = root.unwrap();
        assert!((c - want).abs() < 2e-3, "{c} vs {want}");
        assert!((r.timescale_factor.unwrap() - (1.0 / c - 1.0)).abs() < 1e-12);
        assert!((ch.exceedance(r.eta_th.unwrap()) - c).abs() < 1e-9);
    }

    #[test]
    fn tmsv_against_itself() {
        let sq = Squeezing::from_db(3.0).unwrap();
        let t = StateRecipe::tmsv(sq);
        let ch = crate::fading::solve_sigma_for_loss(10.0, 1.0, 1.1).unwrap();
        let r = memory_threshold(&t, &t, &ch, 0.0, Cutoffs::uniform(10), 60).unwrap();
        assert!(r.boundary_root && r.eta_th.is_none());
        let pss = StateRecipe::of_family(Family::PssS, sq, 0.9, 2).unwrap();
        let r = memory_threshold(&pss, &t, &ch, 0.0, Cutoffs::uniform(10), 60).unwrap();
        assert!(r.eta_th.is_none() && !r.boundary_root);
        assert!(r.full_ratio < 1.0);
    }

    #[test]
    fn covariance_and_fock_integrands_agree() {
        let sq = Squeezing::from_db(3.0).unwrap();
        let t = StateRecipe::tmsv(sq);
        let ch = crate::fading::solve_sigma_for_loss(10.0, 1.0, 1.1).unwrap();
        let fock = build_state(&t, 60).unwrap();
        let eln = |eta: f64| -> Result<f64> {
            Scenario::fixed(1.0, eta, 0.0, 0.02, Cutoffs::uniform(12), 61)?
                .evaluate(&fock, Averaging::Measured)
                .map(|e| e.eln)
        };
        let pas = StateRecipe::of_family(Family::PasS, sq, 0.6, 2).unwrap();
        let a = memory_threshold(&pas, &t, &ch, 0.02, Cutoffs::uniform(12), 60).unwrap();
        let ng = build_state(&pas, 60).unwrap();
        let b = memory_threshold_with(
            &ch,
            a.p_c,
            |eta| {
                Scenario::fixed(1.0, eta, 0.0, 0.02, Cutoffs::uniform(12), 61)?
                    .evaluate(&ng, Averaging::Measured)
                    .map(|e| e.eln)
            },
            eln,
        )
        .unwrap();
        assert!((a.full_ratio - b.full_ratio).abs() < 1e-5 * b.full_ratio);
        assert_eq!(a.interior_roots.len(), b.interior_roots.len());
    }
}
