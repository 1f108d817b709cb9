//! Numerical kernels shared by the simulation modules: binomial tables,
//! Gauss–Legendre rules, power tables and a small symmetric eigensolver wrapper.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

/// Table of `sqrt(C(n, k))` for `0 <= k <= n <= n_max`, built from Pascal's triangle.
#[derive(Debug, Clone)]
pub struct SqrtBinomial {
    n_max: usize,
    rows: Vec<f64>,
}

impl SqrtBinomial {
    /// Builds the table up to `n_max` inclusive.
    pub fn new(n_max: usize) -> Self {
        let mut rows = vec![0.0; (n_max + 1) * (n_max + 2) / 2];
        let mut prev: Vec<f64> = vec![1.0];
        rows[0] = 1.0;
        for n in 1..=n_max {
            let mut cur = vec![1.0; n + 1];
            for k in 1..n {
                cur[k] = prev[k - 1] + prev[k];
            }
            let base = n * (n + 1) / 2;
            for (k, v) in cur.iter().enumerate() {
                rows[base + k] = v.sqrt();
            }
            prev = cur;
        }
        Self { n_max, rows }
    }

    /// Largest `n` covered by the table.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `sqrt(C(n, k))`, zero when `k > n`.
    ///
    /// Panics if `n` exceeds the table.
    #[inline]
    pub fn get(&self, n: usize, k: usize) -> f64 {
        if k > n {
            0.0
        } else {
            self.rows[n * (n + 1) / 2 + k]
        }
    }
}

/// `[x^0, x^1, ..., x^n]` with the convention `0^0 = 1`.
pub fn powers(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    for _ in 0..=n {
        out.push(acc);
        acc *= x;
    }
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order > 0, "Gauss-Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_{n-1}(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Eigenvalues of a dense real symmetric matrix stored row-major, ascending.
pub fn symmetric_eigenvalues(dim: usize, data: &[f64]) -> Vec<f64> {
    debug_assert_eq!(data.len(), dim * dim);
    match dim {
        0 => Vec::new(),
        1 => vec![data[0]],
        _ => {
            let m = DMatrix::from_row_slice(dim, dim, data);
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| a.total_cmp(b));
            ev
        }
    }
}

/// Disjoint-set forest used to split sparse symmetric matrices into
/// independent diagonal blocks.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_match_direct_products() {
        let t = SqrtBinomial::new(60);
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.get(3, 5), 0.0);
        assert!((t.get(10, 3).powi(2) - 120.0).abs() < 1e-10);
        let c60_30 = 118_264_581_564_861_424.0_f64;
        assert!((t.get(60, 30).powi(2) / c60_30 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1usize, 2, 5, 48, 96] {
            let (x, w) = gauss_legendre(order);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}");
            let deg = 2 * order - 1;
            let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            // x^(2n-2) integrates to 2/(2n-1)
            assert!((integral - 2.0 / deg as f64).abs() < 1e-12, "order {order}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn powers_use_zero_to_zero_is_one() {
        assert_eq!(powers(0.0, 2), vec![1.0, 0.0, 0.0]);
        assert_eq!(powers(2.0, 3), vec![1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn union_find_groups_components() {
        let mut uf = UnionFind::new(5);
        uf.union(0, 3);
        uf.union(3, 4);
        assert_eq!(uf.find(4), 0);
        assert_ne!(uf.find(1), uf.find(2));
    }
}
