//! Tabular datasets and their CSV serialization.
//!
//! Every table has a header row, comma separators, LF line endings and numbers
//! printed with 12 significant digits.

use std::io::Write;

use crate::entanglement::{fidelity, mixture_at, relative_entropy, RepumpOutcome};
use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::montecarlo::EnsembleEstimate;
use crate::propagator::{probabilities, psi_coh_closed_form};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&x| format_g12(x)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-5, 1e12)`.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `steps` evenly spaced times from `t0` to `t1` inclusive.
pub fn linspace(t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: steps as f64,
            reason: "at least two grid points are required",
        });
    }
    if t0.is_nan() || t1.is_nan() || t1 <= t0 || t0 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tmax",
            value: t1,
            reason: "grid end must exceed its (non-negative) start",
        });
    }
    let dt = (t1 - t0) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                t1
            } else {
                t0 + dt * k as f64
            }
        })
        .collect())
}

/// Squared amplitudes of the unnormalized no-click state; they add up to `P0`.
pub fn amplitudes_table(params: &Parameters, grid: &[f64]) -> Result<Table> {
    let mut table = Table::new(["t", "P_100", "P_010", "P_001"]);
    for &t in grid {
        let p = psi_coh_closed_form(params, t)?.populations();
        table.push(vec![t, p[0], p[1], p[2]]);
    }
    Ok(table)
}

pub fn probabilities_table(params: &Parameters, grid: &[f64]) -> Result<Table> {
    let mut table = Table::new(["t", "P0", "Pcav", "Pspon"]);
    for &t in grid {
        let p = probabilities(params, t)?;
        table.push(vec![t, p.p0, p.p_cav, p.p_spon]);
    }
    Ok(table)
}

/// Singlet fidelity for each detector efficiency in `etas`.
pub fn fidelity_table(params: &Parameters, grid: &[f64], etas: &[f64]) -> Result<Table> {
    let header = std::iter::once("t".to_string())
        .chain(etas.iter().map(|e| format!("F_eta={}", format_g12(*e))));
    let mut table = Table::new(header);
    for &t in grid {
        let mut row = vec![t];
        for &eta in etas {
            row.push(fidelity(&mixture_at(params, t, eta)?));
        }
        table.push(row);
    }
    Ok(table)
}

pub fn entropy_table(params: &Parameters, grid: &[f64], eta: f64) -> Result<Table> {
    let mut table = Table::new(["t", "E"]);
    for &t in grid {
        let m = mixture_at(params, t, eta)?;
        table.push(vec![t, relative_entropy(m.lambda)]);
    }
    Ok(table)
}

/// Ensemble frequencies next to the analytic probabilities.
pub fn trajectories_table(params: &Parameters, est: &EnsembleEstimate) -> Result<Table> {
    let mut table = Table::new([
        "t",
        "p0_hat",
        "pcav_hat",
        "pspon_hat",
        "stderr_p0",
        "stderr_pcav",
        "stderr_pspon",
        "pdetected_hat",
        "P0",
        "Pcav",
        "Pspon",
    ]);
    for (k, &t) in est.t_grid.iter().enumerate() {
        let p = probabilities(params, t)?;
        table.push(vec![
            t,
            est.p0_hat[k],
            est.p_cav_hat[k],
            est.p_spon_hat[k],
            est.stderr_p0[k],
            est.stderr_cav[k],
            est.stderr_spon[k],
            est.p_detected_hat[k],
            p.p0,
            p.p_cav,
            p.p_spon,
        ]);
    }
    Ok(table)
}

/// Largest deviation of the ensemble from the analytic values, in units of the
/// binomial standard error `sqrt(P (1 - P) / n)` of the analytic `P`.
pub fn max_sigma_deviation(params: &Parameters, est: &EnsembleEstimate) -> Result<f64> {
    let n = est.n as f64;
    let mut worst: f64 = 0.0;
    for (k, &t) in est.t_grid.iter().enumerate() {
        let p = probabilities(params, t)?;
        for (hat, exact) in [
            (est.p0_hat[k], p.p0),
            (est.p_cav_hat[k], p.p_cav),
            (est.p_spon_hat[k], p.p_spon),
        ] {
            let sigma = (exact * (1.0 - exact) / n).sqrt();
            let dev = (hat - exact).abs();
            let z = if sigma > 0.0 {
                dev / sigma
            } else if dev == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    Ok(worst)
}

pub fn repump_table(sequence: &[RepumpOutcome]) -> Table {
    let mut table = Table::new(["round", "lambda", "E", "click_probability"]);
    for (k, r) in sequence.iter().enumerate() {
        let lambda = r.mixture_after_no_click.lambda;
        table.push(vec![
            k as f64,
            lambda,
            relative_entropy(lambda),
            r.click_probability,
        ]);
    }
    table
}
