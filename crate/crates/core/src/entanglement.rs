//! The two-atom state conditioned on no detector click, and what it is worth.
//!
//! Once the bright modes have decayed, the atoms are in
//! `rho = lambda |phi-><phi-| + (1 - lambda) |00><00|`, with `|phi->` the
//! singlet. Emissions nobody saw (spontaneous photons, and cavity photons the
//! detector missed) feed the `|00>` component.

use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::propagator::{p0_asymptotic, p_cav_limit, p_spon_asymptotic, probabilities};

/// Mixture of the singlet (weight `lambda`) and the atomic ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedMixture {
    pub lambda: f64,
    pub t: f64,
    /// False when `t` is too early (`t < 5 / kappa`) for the bright modes to
    /// have decayed; the mixture form is then only formal.
    pub asymptotic: bool,
}

/// Earliest time, in units of `1/kappa`, at which the mixture form is trusted.
pub const ASYMPTOTIC_ONSET: f64 = 5.0;

impl ConditionedMixture {
    pub fn new(lambda: f64, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "singlet weight must lie in [0, 1]",
            });
        }
        Ok(Self {
            lambda,
            t,
            asymptotic: true,
        })
    }

    pub fn singlet_weight(&self) -> f64 {
        self.lambda
    }

    pub fn ground_weight(&self) -> f64 {
        1.0 - self.lambda
    }
}

fn weight(p0: f64, p_spon: f64, p_cav: f64, eta: f64) -> f64 {
    let unseen = p_spon + (1.0 - eta) * p_cav;
    (p0 / (p0 + unseen)).clamp(0.0, 1.0)
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "detector efficiency must lie in [0, 1]",
        })
    }
}

/// Conditioned mixture at time `t` from the exact probabilities, with a
/// detector of efficiency `eta`.
pub fn mixture_at(params: &Parameters, t: f64, eta: f64) -> Result<ConditionedMixture> {
    check_eta(eta)?;
    let p = probabilities(params, t)?;
    Ok(ConditionedMixture {
        lambda: weight(p.p0, p.p_spon, p.p_cav, eta),
        t,
        asymptotic: t * params.kappa >= ASYMPTOTIC_ONSET,
    })
}

/// Same as [`mixture_at`] but from the long-time forms of the probabilities.
/// At `t = 0` this gives the value at the onset of the asymptotic regime.
pub fn mixture_asymptotic(params: &Parameters, t: f64, eta: f64) -> Result<ConditionedMixture> {
    check_eta(eta)?;
    crate::error::check_time(t)?;
    params.check_generator_inputs()?;
    Ok(ConditionedMixture {
        lambda: weight(
            p0_asymptotic(params, t),
            p_spon_asymptotic(params, t).max(0.0),
            p_cav_limit(params),
            eta,
        ),
        t,
        asymptotic: true,
    })
}

/// Overlap with the singlet. `|00>` is orthogonal to it, so this is `lambda`.
pub fn fidelity(mix: &ConditionedMixture) -> f64 {
    mix.lambda
}

/// `x log2 x` with `0 log2 0 = 0`.
fn xlog2(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.max(1e-300).log2()
    }
}

/// Relative entropy of entanglement in bits:
/// `(lambda - 2) log2(1 - lambda/2) + (1 - lambda) log2(1 - lambda)`.
pub fn relative_entropy_of_entanglement(mix: &ConditionedMixture) -> f64 {
    relative_entropy(mix.lambda)
}

pub fn relative_entropy(lambda: f64) -> f64 {
    let half = 1.0 - 0.5 * lambda;
    // (lambda - 2) log2(1 - lambda/2) = -2 (1 - lambda/2) log2(1 - lambda/2)
    let e = -2.0 * xlog2(half) + xlog2(1.0 - lambda);
    e.clamp(0.0, 1.0)
}

/// Result of one repump-and-listen round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepumpOutcome {
    pub mixture_after_no_click: ConditionedMixture,
    pub click_probability: f64,
}

/// One round of driving the `|000>` component and listening for the cavity
/// photon it produces. The singlet is dark to the drive; the ground component
/// clicks with probability `p_detect`.
pub fn repump_round(mix: &ConditionedMixture, p_detect: f64) -> Result<RepumpOutcome> {
    if !(0.0..=1.0).contains(&p_detect) {
        return Err(Error::InvalidParameter {
            name: "p_detect",
            value: p_detect,
            reason: "detection probability per round must lie in [0, 1]",
        });
    }
    let lambda = mix.lambda;
    let click_probability = (1.0 - lambda) * p_detect;
    let no_click = lambda + (1.0 - lambda) * (1.0 - p_detect);
    // With lambda = 0 and a perfect filter there is no no-click branch.
    let lambda_after = if no_click > 0.0 {
        lambda / no_click
    } else {
        0.0
    };
    Ok(RepumpOutcome {
        mixture_after_no_click: ConditionedMixture {
            lambda: lambda_after.clamp(lambda, 1.0),
            ..*mix
        },
        click_probability,
    })
}

/// Applies `rounds` no-click repump rounds, returning the mixture after each
/// round (index 0 is the input).
pub fn repump_sequence(
    mix: &ConditionedMixture,
    p_detect: f64,
    rounds: usize,
) -> Result<Vec<RepumpOutcome>> {
    let mut out = Vec::with_capacity(rounds + 1);
    out.push(RepumpOutcome {
        mixture_after_no_click: *mix,
        click_probability: 0.0,
    });
    let mut current = *mix;
    for _ in 0..rounds {
        let next = repump_round(&current, p_detect)?;
        current = next.mixture_after_no_click;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mix(lambda: f64) -> ConditionedMixture {
        ConditionedMixture::new(lambda, 0.0).unwrap()
    }

    #[test]
    fn weight_at_time_zero_is_one() {
        let m = mixture_at(&Parameters::reference(), 0.0, 1.0).unwrap();
        assert_eq!(m.lambda, 1.0);
        assert!(!m.asymptotic);
    }

    #[test]
    fn reference_weight_at_fifty() {
        let m = mixture_at(&Parameters::reference(), 50.0, 1.0).unwrap();
        assert!((m.lambda - 0.90349).abs() < 1e-5, "{}", m.lambda);
        assert!(m.asymptotic);
        assert_eq!(fidelity(&m), m.lambda);
    }

    #[test]
    fn imperfect_detector_at_asymptotic_onset() {
        let m = mixture_asymptotic(&Parameters::reference(), 0.0, 0.8).unwrap();
        assert!((m.lambda - 0.83250).abs() < 1e-5, "{}", m.lambda);
    }

    #[test]
    fn unit_efficiency_reduces_to_plain_weight() {
        let p = Parameters::reference();
        for t in [5.0, 30.0, 400.0] {
            let pr = probabilities(&p, t).unwrap();
            let m = mixture_at(&p, t, 1.0).unwrap();
            assert!((m.lambda - pr.p0 / (pr.p0 + pr.p_spon)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ConditionedMixture::new(1.1, 0.0).is_err());
        assert!(ConditionedMixture::new(-0.1, 0.0).is_err());
        assert!(mixture_at(&Parameters::reference(), 1.0, 1.5).is_err());
        assert!(mixture_at(&Parameters::reference(), -1.0, 1.0).is_err());
        assert!(repump_round(&mix(0.5), 1.2).is_err());
    }

    #[test]
    fn fidelity_endpoints() {
        assert_eq!(fidelity(&mix(1.0)), 1.0);
        assert_eq!(fidelity(&mix(0.0)), 0.0);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(relative_entropy_of_entanglement(&mix(1.0)), 1.0);
        assert_eq!(relative_entropy_of_entanglement(&mix(0.0)), 0.0);
        let direct = -1.5 * 0.75f64.log2() + 0.5 * 0.5f64.log2();
        let e = relative_entropy(0.5);
        assert!((e - direct).abs() < 1e-15);
        assert!((e - 0.122556).abs() < 1e-6);
    }

    #[test]
    fn repump_values() {
        let r = repump_round(&mix(1.0), 0.9).unwrap();
        assert_eq!(r.mixture_after_no_click.lambda, 1.0);
        assert_eq!(r.click_probability, 0.0);

        let seq = repump_sequence(&mix(0.8325), 0.9, 3).unwrap();
        let last = seq.last().unwrap().mixture_after_no_click.lambda;
        let closed = 0.8325 / (0.8325 + 0.1675 * 0.001);
        assert!((last - closed).abs() < 1e-12);
        assert!((last - 0.99980).abs() < 1e-5);

        for lambda in [0.01, 0.3, 0.9] {
            let r = repump_round(&mix(lambda), 1.0).unwrap();
            assert_eq!(r.mixture_after_no_click.lambda, 1.0);
        }
        let r = repump_round(&mix(0.0), 1.0).unwrap();
        assert_eq!(r.click_probability, 1.0);
        assert_eq!(r.mixture_after_no_click.lambda, 0.0);
    }

    #[test]
    fn repump_without_detection_is_identity() {
        for lambda in [0.0, 0.2, 0.7, 1.0] {
            let r = repump_round(&mix(lambda), 0.0).unwrap();
            assert_eq!(r.mixture_after_no_click.lambda, lambda);
        }
    }
}
