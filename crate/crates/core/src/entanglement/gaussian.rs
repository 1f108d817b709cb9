use alloc::format;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

type M2 = [[f64; 2]; 2];

const PHYSICAL_SLACK: f64 = 1e-9;

fn det(m: &M2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Two-mode covariance matrix `M = [[A, C], [Cᵀ, B]]` in units where the vacuum
/// quadrature variance is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCM {
    a: M2,
    b: M2,
    c: M2,
}

impl GaussianCM {
    /// Validates symmetry of `A`, `B` and the uncertainty principle `M + iΩ >= 0`.
    pub fn new(a: M2, b: M2, c: M2) -> Result<Self> {
        for (name, m) in [("A", &a), ("B", &b)] {
            if (m[0][1] - m[1][0]).abs() > PHYSICAL_SLACK {
                return Err(Error::UnphysicalCovariance(format!("block {name} is not symmetric")));
            }
            if m[0][0] <= 0.0 || det(m) <= 0.0 {
                return Err(Error::UnphysicalCovariance(format!("block {name} is not positive definite")));
            }
        }
        let cm = Self { a, b, c };
        let least = cm.uncertainty_eigenvalue();
        if !(least >= -PHYSICAL_SLACK) {
            return Err(Error::UnphysicalCovariance(format!(
                "M + iΩ has eigenvalue {least:.3e}"
            )));
        }
        Ok(cm)
    }

    /// Block `A` (mode 1).
    pub fn a(&self) -> M2 {
        self.a
    }

    /// Block `B` (mode 2).
    pub fn b(&self) -> M2 {
        self.b
    }

    /// Correlation block `C`.
    pub fn c(&self) -> M2 {
        self.c
    }

    /// Determinant of the full 4×4 matrix.
    pub fn det(&self) -> f64 {
        if let Some((a, b, c)) = self.standard_form() {
            let x = a * b - c * c;
            return x * x;
        }
        self.matrix().determinant()
    }

    fn matrix(&self) -> nalgebra::Matrix4<f64> {
        let [[a00, a01], [a10, a11]] = self.a;
        let [[b00, b01], [b10, b11]] = self.b;
        let [[c00, c01], [c10, c11]] = self.c;
        nalgebra::Matrix4::new(
            a00, a01, c00, c01, //
            a10, a11, c10, c11, //
            c00, c10, b00, b01, //
            c01, c11, b10, b11,
        )
    }

    /// Smallest eigenvalue of `M + iΩ`, from its real 8×8 embedding `[[M, −Ω], [Ω, M]]`.
    fn uncertainty_eigenvalue(&self) -> f64 {
        let m = self.matrix();
        let omega = nalgebra::Matrix4::new(
            0.0, 1.0, 0.0, 0.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0,
        );
        let mut big = nalgebra::SMatrix::<f64, 8, 8>::zeros();
        big.fixed_view_mut::<4, 4>(0, 0).copy_from(&m);
        big.fixed_view_mut::<4, 4>(4, 4).copy_from(&m);
        big.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-omega));
        big.fixed_view_mut::<4, 4>(4, 0).copy_from(&omega);
        big.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(a, b, c)` when `A = aI`, `B = bI` and `C = diag(c, −c)`.
    fn standard_form(&self) -> Option<(f64, f64, f64)> {
        let (a, b, c) = (self.a, self.b, self.c);
        let diag = |m: M2| m[0][1] == 0.0 && m[1][0] == 0.0;
        (diag(a) && diag(b) && diag(c) && a[0][0] == a[1][1] && b[0][0] == b[1][1] && c[0][0] == -c[1][1])
            .then_some((a[0][0], b[0][0], c[0][0]))
    }

    fn eigen_pair(delta: f64, det_m: f64, disc_sq: f64) -> (f64, f64) {
        let disc = disc_sq.max(0.0).sqrt();
        let plus_sq = 0.5 * (delta + disc);
        if plus_sq <= 0.0 {
            return (0.0, 0.0);
        }
        // ν₋² = det M / ν₊² avoids the cancellation in (Δ − √(Δ² − 4 det M))/2.
        let minus_sq = (det_m / plus_sq).max(0.0);
        (plus_sq.sqrt(), minus_sq.sqrt())
    }

    /// Symplectic eigenvalues `(ν₊, ν₋)` from `Δ = det A + det B + 2 det C`.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let delta = det(&self.a) + det(&self.b) + 2.0 * det(&self.c);
        let det_m = self.det();
        let disc_sq = match self.standard_form() {
            Some((a, b, c)) => (a - b) * (a - b) * ((a + b) * (a + b) - 4.0 * c * c),
            None => delta * delta - 4.0 * det_m,
        };
        Self::eigen_pair(delta, det_m, disc_sq)
    }

    /// Symplectic eigenvalues of the partial transpose, `Δ̃ = det A + det B − 2 det C`.
    pub fn pt_symplectic_eigenvalues(&self) -> (f64, f64) {
        let delta = det(&self.a) + det(&self.b) - 2.0 * det(&self.c);
        let det_m = self.det();
        let disc_sq = match self.standard_form() {
            Some((a, b, c)) => ((a - b) * (a - b) + 4.0 * c * c) * (a + b) * (a + b),
            None => delta * delta - 4.0 * det_m,
        };
        Self::eigen_pair(delta, det_m, disc_sq)
    }
}

/// `f(x) = (x+1)/2 log₂((x+1)/2) − (x−1)/2 log₂((x−1)/2)`, the entropy of a
/// thermal mode with symplectic eigenvalue `x`; `f(1) = 0`.
pub fn symplectic_entropy(x: f64) -> f64 {
    if x <= 1.0 {
        return 0.0;
    }
    let p = 0.5 * (x + 1.0);
    let m = 0.5 * (x - 1.0);
    p * p.log2() - m * m.log2()
}

/// `max(0, −log₂ ν̃₋)`.
pub fn gaussian_log_negativity(cm: &GaussianCM) -> f64 {
    let (_, nu) = cm.pt_symplectic_eigenvalues();
    if nu <= 0.0 {
        return f64::INFINITY;
    }
    (-nu.log2()).max(0.0)
}

/// `S(ρ₁) − S(ρ) = f(√det A) − f(ν₊) − f(ν₋)`.
pub fn gaussian_conditional_entropy(cm: &GaussianCM) -> f64 {
    let (p, m) = cm.symplectic_eigenvalues();
    symplectic_entropy(det(&cm.a).sqrt()) - symplectic_entropy(p) - symplectic_entropy(m)
}

/// Covariance matrix of a TMSV with parameter `lambda` after independent channels
/// `(eta1, chi1)` and `(eta2, chi2)` (amplitude transmissions):
/// `A = (η₁²v + 1 − η₁² + χ₁) I`, `B = (η₂²v + 1 − η₂² + χ₂) I`, `C = η₁η₂√(v²−1) Z`,
/// with `v = (1 + λ²)/(1 − λ²)`.
pub fn tmsv_covariance_after_channel(lambda: f64, eta1: f64, chi1: f64, eta2: f64, chi2: f64) -> Result<GaussianCM> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("λ must lie in [0, 1), got {lambda}")));
    }
    let l2 = lambda * lambda;
    let v = (1.0 + l2) / (1.0 - l2);
    let (t1, t2) = (eta1 * eta1, eta2 * eta2);
    let a = t1 * v + 1.0 - t1 + chi1;
    let b = t2 * v + 1.0 - t2 + chi2;
    let c = eta1 * eta2 * (v * v - 1.0).max(0.0).sqrt();
    GaussianCM::new([[a, 0.0], [0.0, a]], [[b, 0.0], [0.0, b]], [[c, 0.0], [0.0, -c]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const I: M2 = [[1.0, 0.0], [0.0, 1.0]];
    const O: M2 = [[0.0, 0.0], [0.0, 0.0]];

    #[test]
    fn vacuum() {
        let cm = GaussianCM::new(I, I, O).unwrap();
        assert_eq!(gaussian_log_negativity(&cm), 0.0);
        assert_eq!(gaussian_conditional_entropy(&cm), 0.0);
    }

    #[test]
    fn pure_tmsv() {
        let cm = tmsv_covariance_after_channel(1.0 / 3.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(cm.det(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(gaussian_conditional_entropy(&cm), 0.566_165_626_622_601_4, epsilon = 1e-9);
        // For a pure TMSV, −log₂ ν̃₋ = log₂((1+λ)/(1−λ)) = 1.
        assert_relative_eq!(gaussian_log_negativity(&cm), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_half_loss_hand_values() {
        let e = 0.5f64.sqrt();
        let cm = tmsv_covariance_after_channel(1.0 / 3.0, 1.0, 0.0, e, 0.0).unwrap();
        assert_relative_eq!(cm.a()[0][0], 1.25, epsilon = 1e-14);
        assert_relative_eq!(cm.b()[1][1], 1.125, epsilon = 1e-14);
        assert_relative_eq!(cm.c()[0][0], 0.530_330_085_889_910_7, epsilon = 1e-14);
        assert_relative_eq!(cm.c()[1][1], -0.530_330_085_889_910_7, epsilon = 1e-14);
        let (_, nu) = cm.pt_symplectic_eigenvalues();
        assert_relative_eq!(nu, 0.653_499_765_917_654_4, epsilon = 1e-12);
        assert_relative_eq!(gaussian_log_negativity(&cm), 0.613_741_375_637_120_1, epsilon = 1e-12);
        // One-sided pure loss keeps one symplectic eigenvalue at 1.
        let (p, m) = cm.symplectic_eigenvalues();
        assert_relative_eq!(m, 1.0, epsilon = 1e-9);
        assert_relative_eq!(p, 1.125, epsilon = 1e-9);
        assert_relative_eq!(gaussian_conditional_entropy(&cm), 0.223_236_357_794_115_8, epsilon = 1e-9);
    }

    #[test]
    fn unphysical_matrices_are_rejected() {
        let half = [[0.5, 0.0], [0.0, 0.5]];
        assert!(GaussianCM::new(half, half, O).is_err());
        assert!(GaussianCM::new([[1.0, 0.2], [0.0, 1.0]], I, O).is_err());
        let big = [[2.0, 0.0], [0.0, -2.0]];
        assert!(GaussianCM::new(I, I, big).is_err());
    }

    #[test]
    fn entropy_function() {
        assert_eq!(symplectic_entropy(1.0), 0.0);
        assert_relative_eq!(symplectic_entropy(3.0), 2.0 * 2f64.log2() - 1.0 * 1f64.log2(), epsilon = 1e-15);
    }
}
