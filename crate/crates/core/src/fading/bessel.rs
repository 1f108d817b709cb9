//! Exponentially scaled modified Bessel functions `e^{−x} I₀(x)` and `e^{−x} I₁(x)`.

#[allow(unused_imports)]
use num_traits::Float;

const SERIES_LIMIT: f64 = 50.0;

fn series(nu: u32, x: f64) -> f64 {
    // I_ν(x) = Σ (x/2)^{2k+ν} / (k! (k+ν)!), summed with the e^{−x} scale folded into the first term.
    let half = 0.5 * x;
    let q = half * half;
    let mut term = (-x).exp() * if nu == 0 { 1.0 } else { half };
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + f64::from(nu)));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum
}

fn asymptotic(nu: u32, x: f64) -> f64 {
    // e^{−x} I_ν(x) ≈ (2πx)^{−1/2} Σ (−1)^k a_k(ν) / x^k, a_k = Π_{j=1..k} (4ν² − (2j−1)²) / (k · 8).
    let mu = 4.0 * f64::from(nu * nu);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        let kf = f64::from(k);
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (kf * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * core::f64::consts::PI * x).sqrt()
}

/// `e^{−x} I₀(x)` for `x >= 0`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(0, x)
    } else {
        asymptotic(0, x)
    }
}

/// `e^{−x} I₁(x)` for `x >= 0`.
pub fn bessel_i1e(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    s * if x <= SERIES_LIMIT { series(1, x) } else { asymptotic(1, x) }
}
