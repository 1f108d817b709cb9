use crate::entanglement::{gaussian_conditional_entropy, gaussian_log_negativity, tmsv_covariance_after_channel};
use crate::error::Result;
use crate::fading::{FadingChannel, QuadratureRule};
use crate::fockstate::Squeezing;

/// Measured-transmittance figures of a TMSV whose mode 2 crosses a fading channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmsvBounds {
    /// `∫ p(η) E_LN(η) dη`, an upper bound on distillable entanglement.
    pub eln: f64,
    /// `∫ p(η) E_CE(η) dη`, a lower bound on distillable entanglement.
    pub ece: f64,
}

/// Measured-transmittance `E_LN` and `E_CE` of a TMSV, mode 1 kept (noise `chi1`)
/// and mode 2 sent through `rule`'s transmittances with noise `chi2`, from the
/// covariance matrix at each node.
pub fn measured_tmsv_bounds(squeezing: Squeezing, rule: &QuadratureRule, chi1: f64, chi2: f64) -> Result<TmsvBounds> {
    let mut eln = 0.0;
    let mut ece = 0.0;
    for (eta, w) in rule.iter() {
        let cm = tmsv_covariance_after_channel(squeezing.lambda(), 1.0, chi1, eta, chi2)?;
        eln += w * gaussian_log_negativity(&cm);
        ece += w * gaussian_conditional_entropy(&cm);
    }
    Ok(TmsvBounds { eln, ece })
}

/// Entanglement rates of a measured-transmittance TMSV link and an ideal Bell-pair link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellComparison {
    /// `R = R_E(TMSV) / R_E(Bell)`.
    pub ratio: f64,
    /// Ebits per pulse from the TMSV.
    pub tmsv_rate: f64,
    /// Ebits per pulse from Bell pairs: the mean intensity transmittance `∫ η² p(η) dη`.
    pub bell_rate: f64,
}

/// Compares a TMSV of `squeezing` with single-photon Bell pairs over the same fading
/// channel, at equal source rates. Each Bell pair keeps one photon, sends the other,
/// and yields one ebit when it arrives (probability `η²`). The TMSV has excess
/// noise `chi` on both modes and its `E_LN` is averaged over the measured transmittance.
pub fn single_photon_ratio(squeezing: Squeezing, ch: &FadingChannel, chi: f64) -> Result<BellComparison> {
    single_photon_ratio_with(squeezing, &QuadratureRule::converged(ch), chi)
}

pub(crate) fn single_photon_ratio_with(squeezing: Squeezing, rule: &QuadratureRule, chi: f64) -> Result<BellComparison> {
    let tmsv_rate = measured_tmsv_bounds(squeezing, rule, chi, chi)?.eln;
    let bell_rate = rule.expectation(|eta| eta * eta);
    Ok(BellComparison {
        ratio: tmsv_rate / bell_rate,
        tmsv_rate,
        bell_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dirac_channel_hand_value() {
        let sq = Squeezing::from_lambda(1.0 / 3.0).unwrap();
        let rule = QuadratureRule::dirac(0.5f64.sqrt());
        let r = single_photon_ratio_with(sq, &rule, 0.0).unwrap();
        assert_relative_eq!(r.bell_rate, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.ratio, 0.613_741_375_637_120_1 / 0.5, epsilon = 1e-12);
    }

    #[test]
    fn vanishing_squeezing_gives_no_advantage() {
        let ch = FadingChannel::with_sigma(1.0).unwrap();
        let r = single_photon_ratio(Squeezing::from_db(1e-6).unwrap(), &ch, 0.02).unwrap();
        assert!(r.ratio < 1e-3);
        assert!(r.ratio >= 0.0);
    }

    #[test]
    fn conditional_entropy_is_below_log_negativity() {
        let ch = FadingChannel::with_sigma(2.0).unwrap();
        let rule = QuadratureRule::converged(&ch);
        for db in [3.0, 10.0] {
            let b = measured_tmsv_bounds(Squeezing::from_db(db).unwrap(), &rule, 0.0, 0.0).unwrap();
            assert!(b.ece <= b.eln);
            assert!(b.ece > 0.0);
        }
    }
}
