//! Beam-wander fading: the log-negative Weibull transmittance distribution,
//! quadrature over it, and the map from beam-wander variance to mean loss.
//!
//! Writing `u = 2 ln(η₀/η)` and `t = (L²/2σ_b²) u^{2/γ}`, the variable `t` is a unit
//! exponential. Hence `P[η′ >= η] = 1 − e^{−t(η)}` and the inverse CDF is closed form,
//! which is what the quadrature rule integrates over.

mod bessel;
mod quadrature;

pub use bessel::{bessel_i0e, bessel_i1e};
pub use quadrature::{ensemble_average, ensemble_average_symmetric, QuadratureRule, DEFAULT_ORDER, MAX_ORDER, SYMMETRIC_ORDER};

use alloc::format;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};

/// Default beam-spot to aperture ratio `W/β`.
pub const DEFAULT_SPOT_RATIO: f64 = 1.1;

/// Log-negative Weibull transmittance distribution of a beam-wander channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingChannel {
    sigma_b: f64,
    beta: f64,
    spot_ratio: f64,
    h: f64,
    eta0: f64,
    gamma_s: f64,
    l_scale: f64,
}

impl FadingChannel {
    /// Channel with beam-wander deviation `sigma_b`, aperture radius `beta` and
    /// beam-spot radius `W = spot_ratio · beta`.
    pub fn new(sigma_b: f64, beta: f64, spot_ratio: f64) -> Result<Self> {
        for (name, v) in [("sigma_b", sigma_b), ("aperture radius", beta), ("spot ratio", spot_ratio)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let h = 1.0 / (spot_ratio * spot_ratio);
        let eta0_sq = -(-2.0 * h).exp_m1();
        let x = 4.0 * h;
        let denom = 1.0 - bessel_i0e(x);
        let log_term = (2.0 * eta0_sq / denom).ln();
        let gamma_s = 8.0 * h * bessel_i1e(x) / denom / log_term;
        let l_scale = beta * log_term.powf(-1.0 / gamma_s);
        Ok(Self {
            sigma_b,
            beta,
            spot_ratio,
            h,
            eta0: eta0_sq.sqrt(),
            gamma_s,
            l_scale,
        })
    }

    /// Channel at the default spot ratio with unit aperture.
    pub fn with_sigma(sigma_b: f64) -> Result<Self> {
        Self::new(sigma_b, 1.0, DEFAULT_SPOT_RATIO)
    }

    /// Beam-wander standard deviation.
    pub fn sigma_b(&self) -> f64 {
        self.sigma_b
    }

    /// Receiver aperture radius `β`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `W/β`.
    pub fn spot_ratio(&self) -> f64 {
        self.spot_ratio
    }

    /// Beam-spot radius `W`.
    pub fn spot_radius(&self) -> f64 {
        self.spot_ratio * self.beta
    }

    /// `h = (β/W)²`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Maximum amplitude transmittance `η₀`.
    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// Shape parameter `γ_s`.
    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    /// Scale parameter `L`.
    pub fn l_scale(&self) -> f64 {
        self.l_scale
    }

    fn t_of(&self, eta: f64) -> f64 {
        let u = 2.0 * (self.eta0 / eta).ln();
        self.l_scale * self.l_scale / (2.0 * self.sigma_b * self.sigma_b) * u.powf(2.0 / self.gamma_s)
    }

    fn ln_density_at(&self, v: f64) -> f64 {
        let u = 2.0 * v;
        (2.0 * self.l_scale * self.l_scale / (self.sigma_b * self.sigma_b * self.gamma_s)).ln()
            + (2.0 / self.gamma_s - 1.0) * u.ln()
            - self.l_scale * self.l_scale / (2.0 * self.sigma_b * self.sigma_b) * u.powf(2.0 / self.gamma_s)
    }

    /// Density of the log-attenuation `v = ln(η₀/η) ∈ [0, ∞)`, equal to `η p(η)`.
    /// Unlike [`FadingChannel::pdf`] it stays representable in deep fades where `η`
    /// itself underflows.
    pub fn log_attenuation_pdf(&self, v: f64) -> f64 {
        if !(v >= 0.0) {
            return 0.0;
        }
        if v == 0.0 {
            let expo = 2.0 / self.gamma_s - 1.0;
            return match expo.partial_cmp(&0.0) {
                Some(core::cmp::Ordering::Less) => f64::INFINITY,
                Some(core::cmp::Ordering::Equal) => 2.0 * self.l_scale * self.l_scale / (self.sigma_b * self.sigma_b * self.gamma_s),
                _ => 0.0,
            };
        }
        self.ln_density_at(v).exp()
    }

    /// Probability density of the amplitude transmittance; zero outside `(0, η₀]`.
    /// Evaluated in log space, so it is finite wherever the true density fits in an `f64`.
    pub fn pdf(&self, eta: f64) -> f64 {
        if !(eta > 0.0) || eta > self.eta0 {
            return 0.0;
        }
        let v = (self.eta0 / eta).ln();
        if v == 0.0 {
            return self.log_attenuation_pdf(0.0) / eta;
        }
        (self.ln_density_at(v) - eta.ln()).exp()
    }

    /// `P[η′ >= eta]`.
    pub fn exceedance(&self, eta: f64) -> f64 {
        if eta <= 0.0 {
            1.0
        } else if eta >= self.eta0 {
            0.0
        } else {
            -(-self.t_of(eta)).exp_m1()
        }
    }

    /// `P[η′ <= eta]`.
    pub fn cdf(&self, eta: f64) -> f64 {
        if eta <= 0.0 {
            0.0
        } else if eta >= self.eta0 {
            1.0
        } else {
            (-self.t_of(eta)).exp()
        }
    }

    /// Transmittance at which the exceedance probability equals `c ∈ [0, 1]`.
    pub fn eta_at_exceedance(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return self.eta0;
        }
        if c >= 1.0 {
            return 0.0;
        }
        let t = -(-c).ln_1p();
        self.eta_at_t(t)
    }

    pub(crate) fn eta_at_t(&self, t: f64) -> f64 {
        let u = (2.0 * self.sigma_b * self.sigma_b * t / (self.l_scale * self.l_scale)).powf(0.5 * self.gamma_s);
        self.eta0 * (-0.5 * u).exp()
    }

    /// Smallest achievable mean loss in dB, `−10 log₁₀ η₀²`, reached as `σ_b → 0`.
    pub fn minimum_loss_db(&self) -> f64 {
        -10.0 * (self.eta0 * self.eta0).log10()
    }
}

/// Mean intensity transmittance `∫ η² p(η) dη` under the default (convergence-checked) rule.
pub fn mean_intensity_transmittance(ch: &FadingChannel) -> f64 {
    QuadratureRule::converged(ch).expectation(|eta| eta * eta)
}

/// Mean fading loss in dB, `−10 log₁₀ ∫ η² p(η) dη`.
pub fn mean_loss_db(ch: &FadingChannel) -> f64 {
    -10.0 * mean_intensity_transmittance(ch).log10()
}

/// Finds the beam-wander deviation giving a mean loss of `target_db` by bisection on `ln σ_b`.
pub fn solve_sigma_for_loss(target_db: f64, beta: f64, spot_ratio: f64) -> Result<FadingChannel> {
    let probe = FadingChannel::new(1.0, beta, spot_ratio)?;
    let floor = probe.minimum_loss_db();
    if !target_db.is_finite() || target_db <= floor {
        return Err(Error::NoSolution(format!(
            "mean loss {target_db} dB is below the minimum {floor:.4} dB reachable with W/β = {spot_ratio}"
        )));
    }
    let loss_at = |ln_sigma: f64| -> Result<f64> { Ok(mean_loss_db(&FadingChannel::new(ln_sigma.exp(), beta, spot_ratio)?)) };
    let (mut lo, mut hi) = ((1e-4f64).ln(), (1e4f64).ln());
    if loss_at(lo)? > target_db || loss_at(hi)? < target_db {
        return Err(Error::NoSolution(format!("mean loss {target_db} dB is outside the bracketed σ_b range")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let loss = loss_at(mid)?;
        if (loss - target_db).abs() < 1e-9 {
            lo = mid;
            hi = mid;
            break;
        }
        if loss < target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    FadingChannel::new((0.5 * (lo + hi)).exp(), beta, spot_ratio)
}
