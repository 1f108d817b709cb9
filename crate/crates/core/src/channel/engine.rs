use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{retained, BipartiteDensity, ChannelParams, Cutoffs, ModeMap};
use crate::error::Result;
use crate::fockstate::{Element, SchmidtState, TwoModeState};

/// Input accepted by the general engines.
#[derive(Debug, Clone, Copy)]
pub enum EvolutionInput<'a> {
    /// A pure state.
    State(&'a TwoModeState),
    /// An already-mixed density operator.
    Density(&'a BipartiteDensity),
}

impl EvolutionInput<'_> {
    fn max_index(&self) -> (usize, usize) {
        match self {
            EvolutionInput::State(s) => s.max_index(),
            EvolutionInput::Density(rho) => rho.iter().fold((0, 0), |(x, y), ((a, b, c, d), _)| {
                (x.max(a).max(c), y.max(b).max(d))
            }),
        }
    }

    fn entries(&self) -> Vec<(Element, f64)> {
        match self {
            EvolutionInput::State(s) => s.density_entries(),
            EvolutionInput::Density(rho) => rho.iter().collect(),
        }
    }
}

/// Reference engine: every input element `ρ_abcd` is pushed through the
/// element-wise Kraus action of each mode and the results are tensored.
pub fn evolve_generic(
    input: EvolutionInput<'_>,
    p1: &ChannelParams,
    p2: &ChannelParams,
    cutoffs: &Cutoffs,
) -> Result<BipartiteDensity> {
    let (m1, m2) = input.max_index();
    let map1 = ModeMap::from_kraus_actions(p1, cutoffs.ellp_max, m1, cutoffs.f_max);
    let map2 = ModeMap::from_kraus_actions(p2, cutoffs.ellp_max, m2, cutoffs.f_max);
    apply_to_entries(&input.entries(), &map1, &map2, cutoffs.f_max).check_trace(cutoffs.epsilon)
}

/// Evolves `input` through the composite channels of `p1` and `p2`.
pub fn evolve(input: EvolutionInput<'_>, p1: &ChannelParams, p2: &ChannelParams, cutoffs: &Cutoffs) -> Result<BipartiteDensity> {
    let (m1, m2) = input.max_index();
    let map1 = ModeMap::from_params(p1, cutoffs.ellp_max, m1, cutoffs.f_max);
    let map2 = ModeMap::from_params(p2, cutoffs.ellp_max, m2, cutoffs.f_max);
    evolve_with_maps(input, &map1, &map2, cutoffs)
}

/// Evolves `input` through precomputed single-mode maps. Schmidt-form states use a
/// factorized sum over the Schmidt index; other inputs are propagated element by element.
pub fn evolve_with_maps(
    input: EvolutionInput<'_>,
    map1: &ModeMap,
    map2: &ModeMap,
    cutoffs: &Cutoffs,
) -> Result<BipartiteDensity> {
    let rho = match input {
        EvolutionInput::State(TwoModeState::Schmidt(s)) => apply_to_schmidt(s, map1, map2, cutoffs.f_max),
        other => apply_to_entries(&other.entries(), map1, map2, cutoffs.f_max),
    };
    rho.check_trace(cutoffs.epsilon)
}

/// `ρ′(D; s₁′, s₂′) = Σ_s q_s q_{s+D} M₁_D[s₁′][s+δ₁] M₂_D[s₂′][s+δ₂]`, emitted for both
/// orientations of the coherence `D`.
fn apply_to_schmidt(state: &SchmidtState, map1: &ModeMap, map2: &ModeMap, f_max: usize) -> BipartiteDensity {
    let q = state.coeffs();
    let (o1, o2) = state.offsets();
    let mut entries = Vec::new();
    for dd in 0..q.len() {
        let (r1, r2) = (map1.block_rows(dd), map2.block_rows(dd));
        if r1 == 0 || r2 == 0 {
            continue;
        }
        let ns = q.len() - dd;
        let weights: Vec<f64> = (0..ns).map(|s| q[s] * q[s + dd]).collect();
        // t[s1'][s] = M1[s1'][s+o1] * w_s
        let mut t = vec![0.0; r1 * ns];
        for so in 0..r1 {
            for (s, w) in weights.iter().enumerate() {
                t[so * ns + s] = map1.block_entry(dd, so, s + o1) * w;
            }
        }
        let mut m2t = vec![0.0; r2 * ns];
        for so in 0..r2 {
            for s in 0..ns {
                m2t[so * ns + s] = map2.block_entry(dd, so, s + o2);
            }
        }
        for s1 in 0..r1 {
            let row = &t[s1 * ns..(s1 + 1) * ns];
            for s2 in 0..r2 {
                let col = &m2t[s2 * ns..(s2 + 1) * ns];
                let v: f64 = row.iter().zip(col).map(|(x, y)| x * y).sum();
                if v == 0.0 {
                    continue;
                }
                let up = (s1 + dd, s2 + dd, s1, s2);
                if retained(f_max, up) {
                    entries.push((up, v));
                }
                if dd > 0 {
                    let down = (s1, s2, s1 + dd, s2 + dd);
                    if retained(f_max, down) {
                        entries.push((down, v));
                    }
                }
            }
        }
    }
    BipartiteDensity::from_entries(entries, f_max, 0)
}

fn orient(hi_first: bool, d: usize, so: usize) -> (usize, usize) {
    if hi_first {
        (so + d, so)
    } else {
        (so, so + d)
    }
}

/// Element-wise propagation, accumulating into dense blocks keyed by the signed
/// coherence orders `(a − c, b − d)` which both maps preserve.
fn apply_to_entries(entries: &[(Element, f64)], map1: &ModeMap, map2: &ModeMap, f_max: usize) -> BipartiteDensity {
    type Key = (isize, isize);
    let mut blocks: BTreeMap<Key, (usize, usize, Vec<f64>)> = BTreeMap::new();
    for &((a, b, c, d), v) in entries {
        let (d1, d2) = (a.abs_diff(c), b.abs_diff(d));
        let (r1, r2) = (map1.block_rows(d1), map2.block_rows(d2));
        if r1 == 0 || r2 == 0 || a.max(c) > map1.in_max() || b.max(d) > map2.in_max() {
            continue;
        }
        let key = (a as isize - c as isize, b as isize - d as isize);
        let (_, _, acc) = blocks.entry(key).or_insert_with(|| (r1, r2, vec![0.0; r1 * r2]));
        let (s1, s2) = (a.min(c), b.min(d));
        let col2: Vec<f64> = (0..r2).map(|so| map2.block_entry(d2, so, s2)).collect();
        for so1 in 0..r1 {
            let x = v * map1.block_entry(d1, so1, s1);
            if x == 0.0 {
                continue;
            }
            for (dst, y) in acc[so1 * r2..(so1 + 1) * r2].iter_mut().zip(&col2) {
                *dst += x * y;
            }
        }
    }
    let mut out = Vec::new();
    for ((k1, k2), (r1, r2, acc)) in blocks {
        let (d1, d2) = (k1.unsigned_abs(), k2.unsigned_abs());
        for so1 in 0..r1 {
            let (ao, co) = orient(k1 >= 0, d1, so1);
            for so2 in 0..r2 {
                let v = acc[so1 * r2 + so2];
                if v == 0.0 {
                    continue;
                }
                let (bo, dout) = orient(k2 >= 0, d2, so2);
                let key = (ao, bo, co, dout);
                if retained(f_max, key) {
                    out.push((key, v));
                }
            }
        }
    }
    BipartiteDensity::from_entries(out, f_max, 0)
}
