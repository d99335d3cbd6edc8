//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use darkstate::model::Parameters;
use nalgebra::Matrix3;

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Piecewise adaptive Simpson over `[0, t]` in chunks of at most `chunk`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, t: f64, chunk: f64, tol: f64) -> f64 {
    let pieces = (t / chunk).ceil().max(1.0) as usize;
    let h = t / pieces as f64;
    (0..pieces)
        .map(|k| adaptive_simpson(f, k as f64 * h, (k + 1) as f64 * h, tol / pieces as f64))
        .sum()
}

/// Conditional generator written out independently of the library.
pub fn generator_matrix(p: &Parameters) -> Matrix3<f64> {
    Matrix3::new(
        p.kappa, p.g_a, p.g_b, -p.g_a, p.gamma, 0.0, -p.g_b, 0.0, p.gamma,
    )
}

/// `exp(-M t)` through nalgebra's Padé-based matrix exponential.
pub fn expm_oracle(p: &Parameters, t: f64) -> Matrix3<f64> {
    (-t * generator_matrix(p)).exp()
}

/// Amplitudes of `exp(-M t)|010>` from the oracle exponential.
pub fn oracle_state(p: &Parameters, t: f64) -> [f64; 3] {
    let u = expm_oracle(p, t);
    [u[(0, 1)], u[(1, 1)], u[(2, 1)]]
}

/// Deterministic pseudo-random parameter sets with rates in `(0, 2]`,
/// including an overdamped one.
pub fn parameter_sets(count: usize, seed: u64) -> Vec<Parameters> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = move || {
        // xorshift64*
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        (state.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut sets = vec![Parameters {
        g_a: 1.0,
        g_b: 1.0,
        kappa: 10.0,
        gamma: 1e-3,
        eta: 1.0,
    }];
    while sets.len() < count {
        sets.push(Parameters {
            g_a: 0.05 + 1.95 * next(),
            g_b: 0.05 + 1.95 * next(),
            kappa: 0.05 + 1.95 * next(),
            gamma: 0.2 * next(),
            eta: next(),
        });
    }
    sets
}

/// `exp(a)` from a plain Taylor series with scaling and squaring, kept apart
/// from the library's own series.
pub fn taylor_expm(a: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = a.abs().max() * 3.0;
    let squarings = norm.max(1.0).log2().ceil() as u32 + 2;
    let b = a / f64::from(2u32.pow(squarings));
    let mut sum = Matrix3::identity();
    let mut term = Matrix3::identity();
    for k in 1..=30 {
        term = term * b / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}
