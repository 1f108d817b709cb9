use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use super::ChannelParams;
use crate::numeric::{powers, SqrtBinomial};

/// Coefficients of `γ₂(φ)∘γ₁(ζ)(|m⟩⟨n|)` keyed by output `(m′, n′)`, with the
/// amplifier index summed up to `ellp_max`.
pub fn kraus_element_action(m: usize, n: usize, params: &ChannelParams, ellp_max: usize) -> BTreeMap<(usize, usize), f64> {
    let phi = params.phi();
    let zeta = params.zeta();
    let inv_phi2 = 1.0 / (phi * phi);
    let gain = 1.0 - inv_phi2;
    let lmin = m.min(n);
    let sb = SqrtBinomial::new(m.max(n) + ellp_max);
    let ratio = powers(zeta / phi, m + n);
    let loss = powers(1.0 - zeta * zeta, lmin);
    let noise = powers(gain, ellp_max);
    let mut out = BTreeMap::new();
    for lp in 0..=ellp_max {
        if noise[lp] == 0.0 {
            continue;
        }
        for l in 0..=lmin {
            let coeff = inv_phi2
                * sb.get(m - l + lp, lp)
                * sb.get(n - l + lp, lp)
                * sb.get(m, l)
                * sb.get(n, l)
                * ratio[m + n - 2 * l]
                * noise[lp]
                * loss[l];
            if coeff != 0.0 {
                *out.entry((m - l + lp, n - l + lp)).or_insert(0.0) += coeff;
            }
        }
    }
    out
}

/// Dense `(rows × cols)` block, row-major.
#[derive(Debug, Clone, PartialEq)]
struct Block {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Block {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        if r < self.rows && c < self.cols {
            self.data[r * self.cols + c]
        } else {
            0.0
        }
    }

    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// A single-mode phase-covariant map on Fock operators.
///
/// `|m⟩⟨n|` with `d = |m − n|` and `s = min(m, n)` is sent to
/// `Σ_{s′} M_d[s′][s] |s′+d⟩⟨s′|` (or its transpose when `m < n`). Inputs are
/// supported up to Fock index `in_max` and outputs are kept up to `out_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMap {
    in_max: usize,
    out_max: usize,
    blocks: Vec<Block>,
}

impl ModeMap {
    fn empty(in_max: usize, out_max: usize) -> Self {
        let blocks = (0..=in_max)
            .map(|d| {
                let rows = if d <= out_max { out_max - d + 1 } else { 0 };
                Block::zeros(rows, in_max - d + 1)
            })
            .collect();
        Self { in_max, out_max, blocks }
    }

    /// Identity on indices up to `n_max`.
    pub fn identity(n_max: usize) -> Self {
        let mut map = Self::empty(n_max, n_max);
        for (d, block) in map.blocks.iter_mut().enumerate() {
            for s in 0..=n_max - d {
                *block.at_mut(s, s) = 1.0;
            }
        }
        map
    }

    /// Pure-loss channel of amplitude transmission `zeta`.
    pub fn pure_loss(zeta: f64, in_max: usize, out_max: usize) -> Self {
        let mut map = Self::empty(in_max, out_max);
        let sb = SqrtBinomial::new(in_max);
        let zp = powers(zeta, 2 * in_max);
        let lp = powers(1.0 - zeta * zeta, in_max);
        for (d, block) in map.blocks.iter_mut().enumerate() {
            if d > out_max {
                continue;
            }
            for s in 0..=in_max - d {
                for l in 0..=s {
                    let so = s - l;
                    if so + d > out_max {
                        continue;
                    }
                    *block.at_mut(so, s) = sb.get(s + d, l) * sb.get(s, l) * zp[2 * so + d] * lp[l];
                }
            }
        }
        map
    }

    /// Phase-insensitive amplifier of gain `phi²`, noise index truncated at `ellp_max`.
    pub fn amplifier(phi: f64, ellp_max: usize, in_max: usize, out_max: usize) -> Self {
        let mut map = Self::empty(in_max, out_max);
        let inv_phi2 = 1.0 / (phi * phi);
        let sb = SqrtBinomial::new(out_max.max(in_max) + ellp_max);
        let ip = powers(1.0 / phi, 2 * in_max);
        let gp = powers(1.0 - inv_phi2, ellp_max);
        for (d, block) in map.blocks.iter_mut().enumerate() {
            if d > out_max {
                continue;
            }
            for s in 0..=in_max - d {
                for lp in 0..=ellp_max {
                    let so = s + lp;
                    if so + d > out_max {
                        break;
                    }
                    *block.at_mut(so, s) = inv_phi2 * sb.get(s + d + lp, lp) * sb.get(s + lp, lp) * ip[2 * s + d] * gp[lp];
                }
            }
        }
        map
    }

    /// The composite `γ₂(φ)∘γ₁(ζ)` for `params`, built by composing the two factors.
    pub fn from_params(params: &ChannelParams, ellp_max: usize, in_max: usize, out_max: usize) -> Self {
        if params.is_identity() {
            let mut map = Self::empty(in_max, out_max);
            for (d, block) in map.blocks.iter_mut().enumerate() {
                for s in 0..=in_max - d {
                    if s < block.rows {
                        *block.at_mut(s, s) = 1.0;
                    }
                }
            }
            return map;
        }
        let loss = Self::pure_loss(params.zeta(), in_max, out_max);
        if params.is_noiseless() {
            return loss;
        }
        let amp = Self::amplifier(params.phi(), ellp_max, out_max, out_max);
        loss.then(&amp)
    }

    /// The composite map assembled element by element from [`kraus_element_action`].
    pub fn from_kraus_actions(params: &ChannelParams, ellp_max: usize, in_max: usize, out_max: usize) -> Self {
        let mut map = Self::empty(in_max, out_max);
        for d in 0..=in_max.min(out_max) {
            for s in 0..=in_max - d {
                for ((mo, no), v) in kraus_element_action(s + d, s, params, ellp_max) {
                    if mo <= out_max {
                        *map.blocks[d].at_mut(no, s) += v;
                    }
                }
            }
        }
        map
    }

    /// Average map `Σ wᵢ · loss(ζᵢ)` followed by the common amplifier of `chi`.
    /// Each node is a pure-loss channel `ζᵢ = ηᵢ/φ`.
    pub fn fading_average(etas: &[f64], weights: &[f64], chi: f64, ellp_max: usize, in_max: usize, out_max: usize) -> Self {
        let phi = (1.0 + 0.5 * chi).sqrt();
        let mut acc = Self::empty(in_max, out_max);
        for (&eta, &w) in etas.iter().zip(weights) {
            let loss = Self::pure_loss(eta / phi, in_max, out_max);
            acc.add_scaled(w, &loss);
        }
        if chi == 0.0 {
            return acc;
        }
        let amp = Self::amplifier(phi, ellp_max, out_max, out_max);
        acc.then(&amp)
    }

    /// `self += w · other`; both maps must share their index ranges.
    pub fn add_scaled(&mut self, w: f64, other: &ModeMap) {
        assert_eq!((self.in_max, self.out_max), (other.in_max, other.out_max), "mode map shapes differ");
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += w * y;
            }
        }
    }

    /// `next ∘ self`. Outputs of `self` above `next`'s input range are dropped.
    pub fn then(&self, next: &ModeMap) -> ModeMap {
        let mut out = Self::empty(self.in_max, next.out_max);
        for (d, block) in out.blocks.iter_mut().enumerate() {
            if block.rows == 0 || d > next.in_max {
                continue;
            }
            let first = &self.blocks[d];
            let second = &next.blocks[d];
            let inner = first.rows.min(second.cols);
            for r in 0..block.rows.min(second.rows) {
                for k in 0..inner {
                    let s = second.data[r * second.cols + k];
                    if s == 0.0 {
                        continue;
                    }
                    let row = &first.data[k * first.cols..(k + 1) * first.cols];
                    let dst = &mut block.data[r * block.cols..(r + 1) * block.cols];
                    for (x, y) in dst.iter_mut().zip(row) {
                        *x += s * y;
                    }
                }
            }
        }
        out
    }

    /// Largest supported input index.
    pub fn in_max(&self) -> usize {
        self.in_max
    }

    /// Largest retained output index.
    pub fn out_max(&self) -> usize {
        self.out_max
    }

    /// Coefficient of `|m′⟩⟨n′|` in the image of `|m⟩⟨n|`.
    pub fn coeff(&self, (mo, no): (usize, usize), (m, n): (usize, usize)) -> f64 {
        if mo as isize - no as isize != m as isize - n as isize || m.max(n) > self.in_max {
            return 0.0;
        }
        let d = m.abs_diff(n);
        self.blocks[d].at(mo.min(no), m.min(n))
    }

    /// Row range and column slice accessor for block `d`: `M_d[s′][s]`.
    pub(crate) fn block_entry(&self, d: usize, so: usize, s: usize) -> f64 {
        self.blocks.get(d).map_or(0.0, |b| b.at(so, s))
    }

    /// Number of output rows of block `d`.
    pub(crate) fn block_rows(&self, d: usize) -> usize {
        self.blocks.get(d).map_or(0, |b| b.rows)
    }

    /// Trace of the image of `|m⟩⟨m|` within the output range.
    pub fn diagonal_trace(&self, m: usize) -> f64 {
        if m > self.in_max {
            return 0.0;
        }
        let b = &self.blocks[0];
        (0..b.rows).map(|so| b.at(so, m)).sum()
    }
}
