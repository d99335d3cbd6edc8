//! Quantum-jump unraveling of the no-click dynamics.
//!
//! A trajectory starts in `|010>`, draws its first emission time by inverting
//! the survival function `||U_cond(t) psi||^2`, and then picks the emitting
//! channel from the instantaneous rates. After any emission the system sits in
//! the absorbing ground state, so one jump ends the trajectory.
//!
//! Every trajectory owns a ChaCha stream keyed by the master seed and selected
//! by its index. Tallies are integer counts merged by addition, so results do
//! not depend on the number of worker threads or on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Parameters, StateVector};
use crate::propagator::{apply, emission_rates, Propagator};

/// Where the first emitted photon went.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Leaked through the cavity mirror.
    Cavity,
    /// Spontaneous emission by atom `a`.
    SponA,
    /// Spontaneous emission by atom `b`.
    SponB,
    /// No emission before the horizon.
    NoJump,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOutcome {
    pub first_jump_time: Option<f64>,
    pub channel: Channel,
    /// A cavity photon that triggered the detector.
    pub detected: bool,
}

/// `15 / gamma`, or `50 / kappa` when atoms do not decay.
pub fn default_horizon(params: &Parameters) -> f64 {
    if params.gamma > 0.0 {
        15.0 / params.gamma
    } else {
        50.0 / params.kappa
    }
}

/// Solves `||U_cond(t) psi||^2 = u` on `[0, horizon]`.
///
/// Returns `None` when `u` lies below the survival probability at the
/// horizon, i.e. the trajectory does not jump in time.
pub fn sample_waiting_time(
    prop: &Propagator,
    psi: &StateVector,
    u: f64,
    horizon: f64,
) -> Result<Option<f64>> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidUniform(u));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon,
            reason: "trajectory horizon must be positive and finite",
        });
    }
    let survival = |t: f64| prop.survival(psi, t);
    if u >= survival(0.0)? {
        return Ok(Some(0.0));
    }
    if u < survival(horizon)? {
        return Ok(None);
    }

    let time_tol = 1e-10 * horizon;
    let (mut lo, mut hi) = (0.0, horizon);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = survival(mid)?;
        if s > u {
            lo = mid;
        } else {
            hi = mid;
        }
        // Time tolerance alone leaves a survival error of order w1 * time_tol.
        if hi - lo <= time_tol && (s - u).abs() < 1e-13 {
            break;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Picks the emitting channel for the state reached at the jump time, in the
/// fixed order cavity, atom `a`, atom `b`.
pub fn classify_jump(params: &Parameters, psi_at_jump: &StateVector, v: f64) -> Result<Channel> {
    let rates = emission_rates(params, &psi_at_jump.amplitudes);
    let total: f64 = rates.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::ZeroRate);
    }
    let threshold = v * total;
    let mut cumulative = 0.0;
    for (rate, channel) in rates.iter().zip([Channel::Cavity, Channel::SponA]) {
        cumulative += rate;
        if threshold < cumulative {
            return Ok(channel);
        }
    }
    // Guard against round-off leaving threshold == total.
    Ok(if rates[2] > 0.0 {
        Channel::SponB
    } else if rates[1] > 0.0 {
        Channel::SponA
    } else {
        Channel::Cavity
    })
}

/// Independent random stream for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulates one trajectory from `|010>`.
pub fn run_trajectory(prop: &Propagator, horizon: f64, seed: u64, index: u64) -> TrajectoryOutcome {
    let mut rng = trajectory_rng(seed, index);
    let u = 1.0 - rng.gen::<f64>();
    let v = rng.gen::<f64>();
    let click = rng.gen::<f64>();

    let psi0 = StateVector::initial();
    let jump = sample_waiting_time(prop, &psi0, u, horizon).expect("u in (0, 1] and horizon valid");
    let Some(t) = jump else {
        return TrajectoryOutcome {
            first_jump_time: None,
            channel: Channel::NoJump,
            detected: false,
        };
    };
    let u_t = prop.u_cond(t).expect("jump time is non-negative");
    let psi_t = StateVector::new(apply(&u_t, &psi0.amplitudes));
    let channel = classify_jump(prop.params(), &psi_t, v)
        .or_else(|_| {
            // The sampled time can land on an isolated zero of the rate; its
            // neighbourhood carries the same channel.
            let nudged = prop.evolve(&psi0, t * (1.0 + 1e-9) + 1e-12)?;
            classify_jump(prop.params(), &nudged, v)
        })
        .expect("first-emission density is positive at sampled jump times");
    TrajectoryOutcome {
        first_jump_time: Some(t),
        channel,
        detected: channel == Channel::Cavity && click < prop.params().eta,
    }
}

/// Ensemble frequencies on a time grid. At grid time `t` a trajectory counts
/// toward `p_cav_hat` or `p_spon_hat` if it emitted on or before `t`, and
/// toward `p0_hat` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate {
    pub n: u64,
    pub t_grid: Vec<f64>,
    pub p0_hat: Vec<f64>,
    pub p_cav_hat: Vec<f64>,
    pub p_spon_hat: Vec<f64>,
    /// Cavity emissions that were also registered by the detector.
    pub p_detected_hat: Vec<f64>,
    pub stderr_p0: Vec<f64>,
    pub stderr_cav: Vec<f64>,
    pub stderr_spon: Vec<f64>,
    /// Totals up to the horizon, indexed cavity, atom `a`, atom `b`, no jump.
    pub channel_totals: [u64; 4],
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnsembleConfig {
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
    /// Trajectory horizon; `None` uses [`default_horizon`].
    pub horizon: Option<f64>,
}

/// Per-grid-bin counts. Bin `k` collects jumps in `(t_{k-1}, t_k]`, the last
/// bin those after the final grid time.
#[derive(Debug, Clone)]
struct Tally {
    cav: Vec<u64>,
    spon: Vec<u64>,
    detected: Vec<u64>,
    channels: [u64; 4],
}

impl Tally {
    fn new(bins: usize) -> Self {
        Self {
            cav: vec![0; bins],
            spon: vec![0; bins],
            detected: vec![0; bins],
            channels: [0; 4],
        }
    }

    fn record(mut self, grid: &[f64], outcome: TrajectoryOutcome) -> Self {
        let slot = match outcome.channel {
            Channel::Cavity => 0,
            Channel::SponA => 1,
            Channel::SponB => 2,
            Channel::NoJump => 3,
        };
        self.channels[slot] += 1;
        if let Some(t) = outcome.first_jump_time {
            let bin = grid.partition_point(|&g| g < t);
            match outcome.channel {
                Channel::Cavity => {
                    self.cav[bin] += 1;
                    if outcome.detected {
                        self.detected[bin] += 1;
                    }
                }
                Channel::SponA | Channel::SponB => self.spon[bin] += 1,
                Channel::NoJump => {}
            }
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in [
            (&mut self.cav, &other.cav),
            (&mut self.spon, &other.spon),
            (&mut self.detected, &other.detected),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (x, y) in self.channels.iter_mut().zip(other.channels) {
            *x += y;
        }
        self
    }
}

pub fn run_ensemble(
    params: &Parameters,
    n: u64,
    t_grid: &[f64],
    seed: u64,
) -> Result<EnsembleEstimate> {
    run_ensemble_with(params, n, t_grid, seed, EnsembleConfig::default())
}

pub fn run_ensemble_with(
    params: &Parameters,
    n: u64,
    t_grid: &[f64],
    seed: u64,
    config: EnsembleConfig,
) -> Result<EnsembleEstimate> {
    params.validate()?;
    if n == 0 {
        return Err(Error::NoTrajectories);
    }
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if t_grid.iter().any(|t| t.is_nan())
        || t_grid[0] < 0.0
        || t_grid.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::UnsortedGrid);
    }
    let horizon = config.horizon.unwrap_or_else(|| default_horizon(params));
    let prop = Propagator::new(params)?;
    let bins = t_grid.len() + 1;

    let simulate = || {
        (0..n)
            .into_par_iter()
            .fold(
                || Tally::new(bins),
                |tally, i| tally.record(t_grid, run_trajectory(&prop, horizon, seed, i)),
            )
            .reduce(|| Tally::new(bins), Tally::merge)
    };
    let tally = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?
            .install(simulate),
        None => simulate(),
    };

    Ok(EnsembleEstimate::from_tally(n, t_grid, &tally))
}

impl EnsembleEstimate {
    fn from_tally(n: u64, t_grid: &[f64], tally: &Tally) -> Self {
        let len = t_grid.len();
        let nf = n as f64;
        let cumulative = |bins: &[u64]| {
            bins[..len]
                .iter()
                .scan(0u64, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect::<Vec<u64>>()
        };
        let cav = cumulative(&tally.cav);
        let spon = cumulative(&tally.spon);
        let detected = cumulative(&tally.detected);
        let freq = |c: &[u64]| c.iter().map(|&x| x as f64 / nf).collect::<Vec<f64>>();
        let p0_hat: Vec<f64> = cav
            .iter()
            .zip(&spon)
            .map(|(c, s)| (n - c - s) as f64 / nf)
            .collect();
        let p_cav_hat = freq(&cav);
        let p_spon_hat = freq(&spon);
        let stderr = |p: &[f64]| {
            p.iter()
                .map(|&q| (q * (1.0 - q) / nf).sqrt())
                .collect::<Vec<f64>>()
        };
        Self {
            n,
            t_grid: t_grid.to_vec(),
            stderr_p0: stderr(&p0_hat),
            stderr_cav: stderr(&p_cav_hat),
            stderr_spon: stderr(&p_spon_hat),
            p0_hat,
            p_cav_hat,
            p_spon_hat,
            p_detected_hat: freq(&detected),
            channel_totals: tally.channels,
        }
    }
}
