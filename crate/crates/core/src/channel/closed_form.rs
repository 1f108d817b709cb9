//! Closed-form output elements for equal-offset Schmidt inputs `Σ qₙ|n⟩|n⟩`.
//!
//! Only entries with `a − b = c − d` can be non-zero. Entries are computed for
//! `a <= c` and mirrored through Hermiticity.

use alloc::format;
use alloc::vec::Vec;

use super::{retained, BipartiteDensity, ChannelParams, Cutoffs};
use crate::error::{Error, Result};
use crate::fockstate::{Element, SchmidtState};
use crate::numeric::{powers, SqrtBinomial};

fn require_equal_offsets(state: &SchmidtState) -> Result<()> {
    if state.offsets() != (0, 0) {
        return Err(Error::UnsupportedForm(format!(
            "closed-form evolution needs zero mode offsets, got {:?}",
            state.offsets()
        )));
    }
    Ok(())
}

/// Emits every retained `(a, b, c, d)` with `a − b = c − d` and `a <= c`.
fn for_each_output(f_max: usize, mut f: impl FnMut(usize, usize, usize, usize)) {
    for a in 0..=f_max {
        for c in a..=f_max {
            for b in 0..=f_max {
                // d = c − a + b
                let d = c - a + b;
                if d > f_max || !retained(f_max, (a, b, c, d)) {
                    continue;
                }
                f(a, b, c, d);
            }
        }
    }
}

fn assemble(values: Vec<(Element, f64)>, f_max: usize, ell_max: usize, epsilon: f64) -> Result<BipartiteDensity> {
    let mirrored = values.into_iter().flat_map(|((a, b, c, d), v)| {
        let first = Some(((a, b, c, d), v));
        let second = (a != c || b != d).then_some(((c, d, a, b), v));
        first.into_iter().chain(second)
    });
    BipartiteDensity::from_entries(mirrored, f_max, ell_max).check_trace(epsilon)
}

fn q_at(q: &[f64], i: usize) -> f64 {
    q.get(i).copied().unwrap_or(0.0)
}

/// Both modes through noisy channels.
///
/// `ℓ′` and `ℓ` are the mode-2 amplifier and loss indices, `j` the mode-1 loss index;
/// the mode-1 amplifier index is fixed to `a − b − ℓ + ℓ′ + j`. `ℓ` is truncated at
/// `cutoffs.ell_max`.
pub fn evolve_symmetric_noisy(
    state: &SchmidtState,
    p1: &ChannelParams,
    p2: &ChannelParams,
    cutoffs: &Cutoffs,
) -> Result<BipartiteDensity> {
    require_equal_offsets(state)?;
    let q = state.coeffs();
    let f_max = cutoffs.f_max;
    let ell_max = cutoffs.ell_max;
    let top = f_max + ell_max + 1;
    let sb = SqrtBinomial::new(top);
    let (phi1, zeta1, phi2, zeta2) = (p1.phi(), p1.zeta(), p2.phi(), p2.zeta());
    let pre = 1.0 / (phi1 * phi1 * phi2 * phi2);
    let r1 = powers(zeta1 / phi1, 2 * top);
    let g1 = powers(1.0 - 1.0 / (phi1 * phi1), top);
    let l1 = powers(1.0 - zeta1 * zeta1, top);
    let r2 = powers(zeta2 / phi2, 2 * top);
    let g2 = powers(1.0 - 1.0 / (phi2 * phi2), top);
    let l2 = powers(1.0 - zeta2 * zeta2, ell_max);

    let mut values = Vec::new();
    for_each_output(f_max, |a, b, c, d| {
        let diff = a as isize - b as isize;
        let mut sum = 0.0;
        for lp in 0..=b.min(d) {
            let mode2_noise = sb.get(b, lp) * sb.get(d, lp) * g2[lp] * r2[b + d - 2 * lp];
            if mode2_noise == 0.0 {
                continue;
            }
            for l in 0..=ell_max {
                let (m, n) = (b + l - lp, d + l - lp);
                let qq = q_at(q, m) * q_at(q, n);
                if qq == 0.0 {
                    continue;
                }
                let mode2 = mode2_noise * sb.get(m, l) * sb.get(n, l) * l2[l];
                let mut inner = 0.0;
                for j in 0..=m.min(n) {
                    let jp = diff - l as isize + lp as isize + j as isize;
                    if jp < 0 {
                        continue;
                    }
                    let jp = jp as usize;
                    inner += sb.get(a, jp)
                        * sb.get(c, jp)
                        * sb.get(m, j)
                        * sb.get(n, j)
                        * r1[b + d + 2 * l - 2 * lp - 2 * j]
                        * g1[jp]
                        * l1[j];
                }
                sum += qq * mode2 * inner;
            }
        }
        let v = pre * sum;
        if v != 0.0 {
            values.push(((a, b, c, d), v));
        }
    });
    assemble(values, f_max, ell_max, cutoffs.epsilon)
}

/// Both modes through quantum-limited attenuators of amplitude transmission
/// `eta1` and `eta2`; `ℓ` runs from `max(0, a − b)` to `cutoffs.ell_max`.
pub fn evolve_symmetric_noiseless(state: &SchmidtState, eta1: f64, eta2: f64, cutoffs: &Cutoffs) -> Result<BipartiteDensity> {
    require_equal_offsets(state)?;
    let q = state.coeffs();
    let f_max = cutoffs.f_max;
    let ell_max = cutoffs.ell_max;
    let top = f_max + ell_max + 1;
    let sb = SqrtBinomial::new(top);
    let e1 = powers(eta1, 2 * f_max);
    let e2 = powers(eta2, 2 * f_max);
    let t1 = powers(1.0 - eta1 * eta1, top);
    let t2 = powers(1.0 - eta2 * eta2, ell_max);

    let mut values = Vec::new();
    for_each_output(f_max, |a, b, c, d| {
        let start = a.saturating_sub(b);
        let mut sum = 0.0;
        for l in start..=ell_max.max(start) {
            if l > ell_max {
                break;
            }
            let (m, n) = (b + l, d + l);
            let qq = q_at(q, m) * q_at(q, n);
            if qq == 0.0 {
                continue;
            }
            sum += qq
                * sb.get(m, m - a)
                * sb.get(n, n - c)
                * t1[m - a]
                * sb.get(m, l)
                * sb.get(n, l)
                * t2[l];
        }
        let v = sum * e1[a + c] * e2[b + d];
        if v != 0.0 {
            values.push(((a, b, c, d), v));
        }
    });
    assemble(values, f_max, ell_max, cutoffs.epsilon)
}

/// Mode 1 kept, mode 2 through a noisy channel; `ℓ′ <= min(b, d)` is summed exactly.
pub fn evolve_asymmetric_noisy(state: &SchmidtState, p2: &ChannelParams, cutoffs: &Cutoffs) -> Result<BipartiteDensity> {
    require_equal_offsets(state)?;
    let q = state.coeffs();
    let f_max = cutoffs.f_max;
    let sb = SqrtBinomial::new(f_max + 1);
    let (phi, zeta) = (p2.phi(), p2.zeta());
    let pre = 1.0 / (phi * phi);
    let g = powers(1.0 - pre, f_max);
    let r = powers(zeta / phi, 2 * f_max);
    let loss = powers(1.0 - zeta * zeta, 2 * f_max);

    let mut values = Vec::new();
    for_each_output(f_max, |a, b, c, d| {
        let qq = q_at(q, a) * q_at(q, c);
        if qq == 0.0 {
            return;
        }
        let diff = a as isize - b as isize;
        let mut sum = 0.0;
        for lp in 0..=b.min(d) {
            let l = diff + lp as isize;
            if l < 0 {
                continue;
            }
            let l = l as usize;
            sum += sb.get(b, lp) * sb.get(d, lp) * sb.get(a, l) * sb.get(c, l) * g[lp] * r[b + d - 2 * lp] * loss[l];
        }
        let v = pre * qq * sum;
        if v != 0.0 {
            values.push(((a, b, c, d), v));
        }
    });
    assemble(values, f_max, 0, cutoffs.epsilon)
}

/// Mode 1 kept, mode 2 through a quantum-limited attenuator:
/// `ρ_abcd = q_a q_c √(C(a, a−b) C(c, c−d)) (1−η²)^{a−b} η^{b+d}` for `a − b = c − d >= 0`.
pub fn evolve_asymmetric_noiseless(state: &SchmidtState, eta2: f64, cutoffs: &Cutoffs) -> Result<BipartiteDensity> {
    require_equal_offsets(state)?;
    let q = state.coeffs();
    let f_max = cutoffs.f_max;
    let sb = SqrtBinomial::new(f_max);
    let e = powers(eta2, 2 * f_max);
    let t = powers(1.0 - eta2 * eta2, f_max);

    let mut values = Vec::new();
    for_each_output(f_max, |a, b, c, d| {
        if a < b {
            return;
        }
        let k = a - b;
        let v = q_at(q, a) * q_at(q, c) * sb.get(a, k) * sb.get(c, c - d) * t[k] * e[b + d];
        if v != 0.0 {
            values.push(((a, b, c, d), v));
        }
    });
    assemble(values, f_max, 0, cutoffs.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{evolve_generic, EvolutionInput};
    use crate::fockstate::{build_state, Squeezing, StateRecipe, TwoModeState};

    fn tmsv(lambda: f64) -> (TwoModeState, SchmidtState) {
        let s = build_state(&StateRecipe::tmsv(Squeezing::from_lambda(lambda).unwrap()), 80).unwrap();
        let schmidt = s.as_schmidt().unwrap().clone();
        (s, schmidt)
    }

    #[test]
    fn identity_recovers_input() {
        let (s, sc) = tmsv(1.0 / 3.0);
        let cut = Cutoffs::uniform(10);
        let id = ChannelParams::identity();
        let expected = BipartiteDensity::from_state(&s, 10);
        assert!(evolve_symmetric_noisy(&sc, &id, &id, &cut).unwrap().max_abs_diff(&expected) < 1e-14);
        assert!(evolve_symmetric_noiseless(&sc, 1.0, 1.0, &cut).unwrap().max_abs_diff(&expected) < 1e-14);
        assert!(evolve_asymmetric_noisy(&sc, &id, &cut).unwrap().max_abs_diff(&expected) < 1e-14);
        assert!(evolve_asymmetric_noiseless(&sc, 1.0, &cut).unwrap().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn noiseless_limits_agree() {
        let (_, sc) = tmsv(1.0 / 3.0);
        let cut = Cutoffs::uniform(10);
        let (e1, e2) = (0.8f64, 0.5f64.sqrt());
        let p1 = ChannelParams::new(e1, 0.0).unwrap();
        let p2 = ChannelParams::new(e2, 0.0).unwrap();
        let a = evolve_symmetric_noisy(&sc, &p1, &p2, &cut).unwrap();
        let b = evolve_symmetric_noiseless(&sc, e1, e2, &cut).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
        let c = evolve_asymmetric_noisy(&sc, &p2, &cut).unwrap();
        let d = evolve_asymmetric_noiseless(&sc, e2, &cut).unwrap();
        assert!(c.max_abs_diff(&d) < 1e-15);
    }

    #[test]
    fn full_loss_on_mode_two_leaves_vacuum_there() {
        let (_, sc) = tmsv(0.5);
        let out = evolve_symmetric_noiseless(&sc, 0.7, 0.0, &Cutoffs::uniform(20)).unwrap();
        assert!(out.iter().all(|((_, b, _, d), _)| b + d == 0));
    }

    #[test]
    fn closed_forms_match_generic_engine() {
        let (s, sc) = tmsv(0.332_278_849_166_244);
        let cut = Cutoffs::uniform(10);
        for chi in [0.0, 0.02] {
            let p = ChannelParams::from_intensity(0.5, chi).unwrap();
            let generic = evolve_generic(EvolutionInput::State(&s), &p, &p, &cut).unwrap();
            let closed = evolve_symmetric_noisy(&sc, &p, &p, &cut).unwrap();
            assert!(generic.max_abs_diff(&closed) < 1e-9, "χ={chi}: {}", generic.max_abs_diff(&closed));
            let id = ChannelParams::identity();
            let generic = evolve_generic(EvolutionInput::State(&s), &id, &p, &cut).unwrap();
            let closed = evolve_asymmetric_noisy(&sc, &p, &cut).unwrap();
            assert!(generic.max_abs_diff(&closed) < 1e-12);
        }
    }

    #[test]
    fn offsets_are_rejected() {
        let st = build_state(
            &StateRecipe::photon_operation(crate::fockstate::Family::PssS, Squeezing::from_db(3.0).unwrap(), 0.9).unwrap(),
            40,
        )
        .unwrap();
        let sc = st.as_schmidt().unwrap();
        assert!(matches!(
            evolve_asymmetric_noiseless(sc, 0.5, &Cutoffs::default()),
            Err(Error::UnsupportedForm(_))
        ));
    }
}
