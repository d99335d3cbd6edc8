//! No-click time evolution `U_cond(t) = exp(-M t)` and the analytic emission
//! probabilities for the initial state `|010>`.
//!
//! Two routes to `exp(-M t)` are available: the three-term Lagrange
//! (spectral) formula built from the closed-form eigenvalues, and a
//! scaling-and-squaring Taylor series that needs no spectral data. The series
//! is picked automatically when the bright pair is close to critical damping.
//!
//! The closed-form amplitudes and the cavity-emission probability are written
//! in terms of `e^{-(kappa+gamma)t/2} cos(St/2)` and
//! `e^{-(kappa+gamma)t/2} sin(St/2)/S`, which stay real, finite and free of the
//! removable singularity at `S = 0` in both the underdamped and overdamped
//! regimes.

use nalgebra::{Matrix3, Vector3};

use crate::error::{check_time, Result};
use crate::model::{ConditionalGenerator, Parameters, StateVector, ATOM_A, ATOM_B, CAVITY};
use crate::C64;

/// How `exp(-M t)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Series,
}

/// Conditional propagator for one parameter set.
#[derive(Debug, Clone)]
pub struct Propagator {
    generator: ConditionalGenerator,
    method: Method,
    /// Lagrange projectors `prod_{j!=i} (M - l_j) / (l_i - l_j)`; unused by the series.
    projectors: [Matrix3<C64>; 3],
}

impl Propagator {
    pub fn new(params: &Parameters) -> Result<Self> {
        Ok(Self::from_generator(ConditionalGenerator::new(params)?))
    }

    pub fn from_generator(generator: ConditionalGenerator) -> Self {
        let method = if generator.near_degenerate() {
            Method::Series
        } else {
            Method::Spectral
        };
        Self::with_method(generator, method)
    }

    /// Forces an evaluation method. Forcing `Spectral` on a degenerate
    /// spectrum yields non-finite entries.
    pub fn with_method(generator: ConditionalGenerator, method: Method) -> Self {
        let m = generator.m().map(|x| C64::new(x, 0.0));
        let l = *generator.eigenvalues();
        let id = Matrix3::<C64>::identity();
        let projector = |i: usize, j: usize, k: usize| {
            (m - id * l[j]) * (m - id * l[k]) / ((l[i] - l[j]) * (l[i] - l[k]))
        };
        let projectors = [projector(0, 1, 2), projector(1, 2, 0), projector(2, 0, 1)];
        Self {
            generator,
            method,
            projectors,
        }
    }

    pub fn generator(&self) -> &ConditionalGenerator {
        &self.generator
    }

    pub fn params(&self) -> &Parameters {
        self.generator.params()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// `exp(-M t)`.
    pub fn u_cond(&self, t: f64) -> Result<Matrix3<f64>> {
        check_time(t)?;
        Ok(match self.method {
            Method::Spectral => self.spectral(t),
            Method::Series => series_exp(&(-t * self.generator.m())),
        })
    }

    fn spectral(&self, t: f64) -> Matrix3<f64> {
        let l = self.generator.eigenvalues();
        let u: Matrix3<C64> = self
            .projectors
            .iter()
            .zip(l)
            .map(|(p, li)| p * (-li * t).exp())
            .sum();
        debug_assert!(
            u.iter().all(|z| z.im.abs() < 1e-10 * (1.0 + z.re.abs())),
            "spectral propagator left an imaginary residue"
        );
        u.map(|z| z.re)
    }

    /// `U_cond(t) psi` with the lost norm moved into `ground_weight`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let amplitudes = apply(&self.u_cond(t)?, &psi.amplitudes);
        let lost = psi.norm_sqr() - amplitudes.norm_squared();
        Ok(StateVector {
            amplitudes,
            ground_weight: psi.ground_weight + lost.max(0.0),
        })
    }

    /// `||U_cond(t) psi||^2`: probability of no emission of any kind in `[0, t]`.
    pub fn survival(&self, psi: &StateVector, t: f64) -> Result<f64> {
        Ok(apply(&self.u_cond(t)?, &psi.amplitudes).norm_squared())
    }

    /// No-emission probability for the initial state `|010>`.
    pub fn p0(&self, t: f64) -> Result<f64> {
        self.survival(&StateVector::initial(), t)
    }

    /// First-emission density `-dP0/dt` for the initial state `|010>`.
    pub fn w1(&self, t: f64) -> Result<f64> {
        let a = apply(&self.u_cond(t)?, &StateVector::initial().amplitudes);
        Ok(emission_rates(self.params(), &a).iter().sum())
    }
}

/// Real matrix acting on complex amplitudes.
pub fn apply(u: &Matrix3<f64>, v: &Vector3<C64>) -> Vector3<C64> {
    u.map(|x| C64::new(x, 0.0)) * v
}

/// Per-channel emission rates `(2 kappa |c_100|^2, 2 gamma |c_010|^2, 2 gamma |c_001|^2)`.
pub fn emission_rates(params: &Parameters, amplitudes: &Vector3<C64>) -> [f64; 3] {
    [
        2.0 * params.kappa * amplitudes[CAVITY].norm_sqr(),
        2.0 * params.gamma * amplitudes[ATOM_A].norm_sqr(),
        2.0 * params.gamma * amplitudes[ATOM_B].norm_sqr(),
    ]
}

/// `exp(a)` by scaling and squaring a truncated Taylor series.
pub fn series_exp(a: &Matrix3<f64>) -> Matrix3<f64> {
    const TOL: f64 = 1e-13;
    let norm = l1_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a / 2f64.powi(squarings);
    let mut sum = Matrix3::identity();
    let mut term = Matrix3::identity();
    for k in 1..=40 {
        term = term * b / k as f64;
        sum += term;
        if l1_norm(&term) < TOL * 1e-3 * l1_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Maximum absolute column sum.
fn l1_norm(a: &Matrix3<f64>) -> f64 {
    a.abs().row_sum().max()
}

/// Damped bright-pair factors `(e^{-ct/2} cos(St/2), e^{-ct/2} sin(St/2)/S)`
/// with `c = kappa + gamma`.
pub(crate) fn damped_bright(params: &Parameters, t: f64) -> (f64, f64) {
    let c = params.kappa + params.gamma;
    let s = params.s();
    let x = s * (0.5 * t);
    if x.norm() < 5e-3 {
        let x2 = x * x;
        let damp = (-0.5 * c * t).exp();
        let cos = C64::new(1.0, 0.0)
            - x2 / 2.0 * (C64::new(1.0, 0.0) - x2 / 12.0 * (C64::new(1.0, 0.0) - x2 / 30.0));
        let sinc = C64::new(1.0, 0.0)
            - x2 / 6.0 * (C64::new(1.0, 0.0) - x2 / 20.0 * (C64::new(1.0, 0.0) - x2 / 42.0));
        return (damp * cos.re, damp * 0.5 * t * sinc.re);
    }
    let i_s = C64::i() * s;
    let e1 = (-(C64::new(c, 0.0) + i_s) * (0.5 * t)).exp();
    let e2 = (-(C64::new(c, 0.0) - i_s) * (0.5 * t)).exp();
    let cos = 0.5 * (e1 + e2);
    let sin_over_s = (e2 - e1) / (2.0 * i_s);
    (cos.re, sin_over_s.re)
}

/// Explicit unnormalized no-click state grown from `|010>`; `ground_weight`
/// holds the probability that an emission has occurred.
pub fn psi_coh_closed_form(params: &Parameters, t: f64) -> Result<StateVector> {
    check_time(t)?;
    params.check_generator_inputs()?;
    let Parameters {
        g_a,
        g_b,
        kappa,
        gamma,
        ..
    } = *params;
    let gsq = params.coupling_sq();
    let dark = g_b * (-gamma * t).exp();
    let (cos, sin_over_s) = damped_bright(params, t);
    let kg = kappa - gamma;
    let a = [
        g_a * (-2.0 * gsq * sin_over_s),
        dark * g_b + g_a * (g_a * cos + g_a * kg * sin_over_s),
        -dark * g_a + g_a * (g_b * cos + g_b * kg * sin_over_s),
    ];
    let mut psi = StateVector::from_real(a.map(|x| x / gsq));
    psi.ground_weight = (1.0 - psi.norm_sqr()).max(0.0);
    Ok(psi)
}

/// Long-time no-emission probability `g_b^2/(g_a^2+g_b^2) e^{-2 gamma t}`,
/// valid once the bright pair has decayed (`t >> 1/kappa`).
pub fn p0_asymptotic(params: &Parameters, t: f64) -> f64 {
    params.g_b * params.g_b / params.coupling_sq() * (-2.0 * params.gamma * t).exp()
}

/// Total cavity-emission probability reached as `t -> infinity`.
pub fn p_cav_limit(params: &Parameters) -> f64 {
    let c = params.kappa + params.gamma;
    params.kappa * params.g_a * params.g_a
        / (c * (params.coupling_sq() + params.kappa * params.gamma))
}

/// Probability that the excitation has left through the cavity in `[0, t]`.
pub fn p_cav(params: &Parameters, t: f64) -> Result<f64> {
    check_time(t)?;
    params.check_generator_inputs()?;
    let c = params.kappa + params.gamma;
    let (cos, sin_over_s) = damped_bright(params, t);
    // 1 - e^{-ct}/S^2 [4(G + kappa gamma) + c(S sin St - c cos St)], with the
    // S^2 in the denominator cancelled analytically.
    let bracket =
        1.0 - (-c * t).exp() - 2.0 * c * sin_over_s * cos - 2.0 * c * c * sin_over_s * sin_over_s;
    Ok(p_cav_limit(params) * bracket)
}

/// Long-time spontaneous-emission probability, the complement of
/// [`p0_asymptotic`] and [`p_cav_limit`].
pub fn p_spon_asymptotic(params: &Parameters, t: f64) -> f64 {
    1.0 - p0_asymptotic(params, t) - p_cav_limit(params)
}

/// `(P0, P_cav, P_spon)` at time `t` for the initial state `|010>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityTriple {
    pub t: f64,
    pub p0: f64,
    pub p_cav: f64,
    pub p_spon: f64,
}

impl ProbabilityTriple {
    /// Clamps into `[0, 1]`; `p_spon` is the complement of the other two.
    pub fn from_parts(t: f64, p0: f64, p_cav: f64) -> Self {
        let p_spon = 1.0 - p0 - p_cav;
        for p in [p0, p_cav, p_spon] {
            debug_assert!(
                (-1e-10..=1.0 + 1e-10).contains(&p),
                "probability {p} out of range at t = {t}"
            );
        }
        Self {
            t,
            p0: p0.clamp(0.0, 1.0),
            p_cav: p_cav.clamp(0.0, 1.0),
            p_spon: p_spon.clamp(0.0, 1.0),
        }
    }

    pub fn sum(&self) -> f64 {
        self.p0 + self.p_cav + self.p_spon
    }
}

pub fn probabilities(params: &Parameters, t: f64) -> Result<ProbabilityTriple> {
    let p0 = psi_coh_closed_form(params, t)?.norm_sqr();
    let p_cav = p_cav(params, t)?;
    Ok(ProbabilityTriple::from_parts(t, p0, p_cav))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn reference() -> Parameters {
        Parameters::reference()
    }

    #[test]
    fn identity_at_time_zero() {
        let prop = Propagator::new(&reference()).unwrap();
        let u = prop.u_cond(0.0).unwrap();
        assert!((u - Matrix3::identity()).abs().max() < 1e-15);
        let series = series_exp(&Matrix3::zeros());
        assert_eq!(series, Matrix3::identity());
    }

    #[test]
    fn negative_time_rejected() {
        let prop = Propagator::new(&reference()).unwrap();
        assert!(matches!(prop.u_cond(-1.0), Err(Error::NegativeTime(_))));
        assert!(matches!(
            p_cav(&reference(), -0.1),
            Err(Error::NegativeTime(_))
        ));
        assert!(psi_coh_closed_form(&reference(), f64::NAN).is_err());
        assert!(probabilities(&reference(), -2.0).is_err());
    }

    #[test]
    fn spectral_matches_series_on_reference_set() {
        let gen = ConditionalGenerator::new(&reference()).unwrap();
        let spectral = Propagator::with_method(gen.clone(), Method::Spectral);
        let series = Propagator::with_method(gen, Method::Series);
        for k in 0..=150 {
            let t = 0.1 * k as f64;
            let d = spectral.u_cond(t).unwrap() - series.u_cond(t).unwrap();
            assert!(d.abs().max() < 1e-10, "t = {t}: {}", d.abs().max());
        }
    }

    #[test]
    fn dark_component_survives_without_spontaneous_decay() {
        let p = Parameters {
            gamma: 0.0,
            ..reference()
        };
        let prop = Propagator::new(&p).unwrap();
        let psi = prop.evolve(&StateVector::initial(), 60.0).unwrap();
        let a = psi.amplitudes;
        assert!((a[0].re).abs() < 1e-12);
        assert!((a[1].re - 0.5).abs() < 1e-12);
        assert!((a[2].re + 0.5).abs() < 1e-12);
        assert!((psi.norm_sqr() - 0.5).abs() < 1e-12);
        assert!((psi.ground_weight - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_form_initial_condition() {
        let psi = psi_coh_closed_form(&reference(), 0.0).unwrap();
        assert_eq!(psi.populations(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn closed_form_plateau_is_quarter_population() {
        let p = reference();
        for t in [40.0, 60.0, 100.0] {
            let pops = psi_coh_closed_form(&p, t).unwrap().populations();
            let plateau = 0.25 * (-2.0 * p.gamma * t).exp();
            assert!(pops[0] < 1e-15);
            assert!((pops[1] - plateau).abs() < 1e-8, "{t}: {pops:?}");
            assert!((pops[2] - plateau).abs() < 1e-8);
        }
    }

    #[test]
    fn p0_values() {
        let prop = Propagator::new(&reference()).unwrap();
        assert!((prop.p0(0.0).unwrap() - 1.0).abs() < 1e-15);
        let want = 0.5 * (-0.02f64).exp();
        assert!((prop.p0(10.0).unwrap() - want).abs() < 1e-4);
        assert!((0.490099 - want).abs() < 1e-6);

        let lossless_atoms = Parameters {
            gamma: 0.0,
            ..reference()
        };
        let prop = Propagator::new(&lossless_atoms).unwrap();
        assert!((prop.p0(80.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn p0_asymptotic_limits() {
        let p = Parameters {
            gamma: 0.0,
            ..reference()
        };
        for t in [0.0, 1.0, 1e3] {
            assert_eq!(p0_asymptotic(&p, t), 0.5);
        }
        let decoupled = Parameters {
            g_a: 0.0,
            ..reference()
        };
        assert!((p0_asymptotic(&decoupled, 7.0) - (-2e-3 * 7.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn w1_at_time_zero_reads_atomic_population() {
        let prop = Propagator::new(&reference()).unwrap();
        assert!((prop.w1(0.0).unwrap() - 2e-3).abs() < 1e-15);
        let p = Parameters {
            gamma: 0.0,
            ..reference()
        };
        assert_eq!(Propagator::new(&p).unwrap().w1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn p_cav_values() {
        let p = reference();
        assert_eq!(p_cav(&p, 0.0).unwrap(), 0.0);
        let limit = 1.0 / (1.001 * 2.001);
        assert!((p_cav_limit(&p) - limit).abs() < 1e-15);
        assert!((p_cav(&p, 60.0).unwrap() - 0.499251).abs() < 1e-6);
    }

    #[test]
    fn probability_triple_values() {
        let t0 = probabilities(&reference(), 0.0).unwrap();
        assert_eq!((t0.p0, t0.p_cav, t0.p_spon), (1.0, 0.0, 0.0));
        let t = probabilities(&reference(), 50.0).unwrap();
        assert!((t.p0 - 0.452419).abs() < 1e-5);
        assert!((t.p_cav - 0.499251).abs() < 1e-5);
        assert!((t.p_spon - 0.048330).abs() < 1e-5);
        assert!((t.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spontaneous_asymptote_matches_complement() {
        let p = reference();
        for t in [10.0, 25.0, 100.0, 1000.0] {
            let exact = probabilities(&p, t).unwrap().p_spon;
            assert!((exact - p_spon_asymptotic(&p, t)).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn overdamped_closed_forms_stay_finite() {
        let p = Parameters {
            kappa: 10.0,
            ..reference()
        };
        for t in [0.0, 1.0, 100.0, 15000.0] {
            let tr = probabilities(&p, t).unwrap();
            assert!(tr.p0.is_finite() && tr.p_cav.is_finite());
            assert!((tr.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn series_handles_critical_damping() {
        let p = Parameters {
            kappa: 8f64.sqrt(),
            gamma: 0.0,
            ..reference()
        };
        let prop = Propagator::new(&p).unwrap();
        assert_eq!(prop.method(), Method::Series);
        // Compare the generic propagator to the closed form, which has no
        // singularity at S = 0.
        for k in 0..=40 {
            let t = 0.25 * k as f64;
            let a = prop.evolve(&StateVector::initial(), t).unwrap().amplitudes;
            let b = psi_coh_closed_form(&p, t).unwrap().amplitudes;
            assert!((a - b).norm() < 1e-12, "t = {t}");
        }
    }
}
