//! Visibility and envelope-width fitting.
//!
//! The pattern model is `P(τ) = ½[1 ± V·E((τ−τc)/T)·cos(ωc(τ−τref) + φ)]`,
//! with the cosine dropped for HOMI and an overall count scale `A` for count
//! data. Probability data are fitted by least squares; counts by Poisson
//! maximum likelihood (iteratively reweighted with weights `1/μ`).

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, WktError};
use crate::spectral::{Interferogram, Units};

use super::{analytic_signal, detrend, edge_baseline, envelope, fwhm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeModel {
    Gaussian,
    Triangle,
}

impl EnvelopeModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnvelopeModel::Gaussian => "gaussian",
            EnvelopeModel::Triangle => "triangle",
        }
    }

    /// Unit-height envelope with FWHM 1 and its derivative.
    pub fn eval(&self, u: f64) -> (f64, f64) {
        match self {
            EnvelopeModel::Gaussian => {
                let e = (-4.0 * LN_2 * u * u).exp();
                (e, -8.0 * LN_2 * u * e)
            }
            EnvelopeModel::Triangle => {
                if u.abs() < 1.0 {
                    (1.0 - u.abs(), -u.signum())
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

impl fmt::Display for EnvelopeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvelopeModel {
    type Err = WktError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "triangle" => Ok(Self::Triangle),
            other => Err(WktError::Parse(format!("unknown envelope model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Residual RMS above this fraction of the signal RMS is a failed fit.
    pub divergence_ratio: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iterations: 200, divergence_ratio: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: EnvelopeModel,
    /// Envelope FWHM (s).
    pub temporal_fwhm: f64,
    pub visibility: f64,
    pub visibility_uncertainty: f64,
    /// Residual RMS in probability units.
    pub residual_rms: f64,
    /// Envelope center (s).
    pub center: f64,
    /// Fringe angular frequency (rad/s), absent for HOMI.
    pub carrier: Option<f64>,
    /// Counts at `P = 1`, present for count data.
    pub count_scale: Option<f64>,
    pub iterations: usize,
}

struct Model {
    env: EnvelopeModel,
    sign: f64,
    carrier: bool,
    counts: bool,
    tau_ref: f64,
    /// Parameter scales; the solver works on `p / scale`.
    scale: Vec<f64>,
}

impl Model {
    fn n_params(&self) -> usize {
        3 + if self.carrier { 2 } else { 0 } + usize::from(self.counts)
    }

    /// Model value and gradient with respect to the unscaled parameters.
    fn eval(&self, p: &[f64], tau: f64, grad: &mut [f64]) -> f64 {
        let (v, t, tc) = (p[0], p[1], p[2]);
        let u = (tau - tc) / t;
        let (e, de) = self.env.eval(u);
        let (c, dc) = if self.carrier {
            let arg = p[3] * (tau - self.tau_ref) + p[4];
            (arg.cos(), -arg.sin())
        } else {
            (1.0, 0.0)
        };
        let a = if self.counts { p[self.n_params() - 1] } else { 1.0 };
        let k = 0.5 * a * self.sign;
        grad[0] = k * e * c;
        grad[1] = k * v * c * de * (-u / t);
        grad[2] = k * v * c * de * (-1.0 / t);
        if self.carrier {
            grad[3] = k * v * e * dc * (tau - self.tau_ref);
            grad[4] = k * v * e * dc;
        }
        let prob = 0.5 * (1.0 + self.sign * v * e * c);
        if self.counts {
            grad[self.n_params() - 1] = prob;
        }
        a * prob
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, bottom) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for (i, row) in bottom.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
            b[col + 1 + i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

struct Normal {
    h: Vec<Vec<f64>>,
    g: Vec<f64>,
    objective: f64,
}

fn objective(model: &Model, p: &[f64], tau: &[f64], y: &[f64]) -> f64 {
    if !(p[1] > 0.0) {
        return f64::INFINITY;
    }
    let mut grad = vec![0.0; model.n_params()];
    let mut total = 0.0;
    for (t, yv) in tau.iter().zip(y) {
        let mu = model.eval(p, *t, &mut grad);
        total += if model.counts {
            if !(mu > 0.0) {
                return f64::INFINITY;
            }
            mu - yv * mu.ln()
        } else {
            0.5 * (yv - mu).powi(2)
        };
    }
    total
}

/// Scaled normal equations. Count data use Fisher weights `1/μ`.
fn normal_equations(model: &Model, p: &[f64], tau: &[f64], y: &[f64]) -> Normal {
    let np = model.n_params();
    let mut h = vec![vec![0.0; np]; np];
    let mut g = vec![0.0; np];
    let mut grad = vec![0.0; np];
    for (t, yv) in tau.iter().zip(y) {
        let mu = model.eval(p, *t, &mut grad);
        for (gr, s) in grad.iter_mut().zip(&model.scale) {
            *gr *= s;
        }
        let w = if model.counts { 1.0 / mu.max(1.0) } else { 1.0 };
        let r = yv - mu;
        for a in 0..np {
            g[a] += w * grad[a] * r;
            for b in 0..np {
                h[a][b] += w * grad[a] * grad[b];
            }
        }
    }
    Normal { h, g, objective: objective(model, p, tau, y) }
}

struct Initial {
    params: Vec<f64>,
    tau_ref: f64,
}

fn initial_guess(ig: &Interferogram, carrier: bool) -> Result<Initial> {
    let sig = detrend(ig)?;
    let env = envelope(&sig)?;
    let tau = sig.delays.points();
    let (imax, emax) = env
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) });
    if !(emax > 0.0) {
        return Err(WktError::FitDiverged("no fringe signal".into()));
    }
    let tau_ref = tau[imax];
    let width = fwhm(&tau, &env).unwrap_or((sig.delays.end() - sig.delays.start()) / 8.0);
    let mut params = vec![emax.clamp(0.05, 1.0), width.max(2.0 * sig.delays.step()), tau_ref];
    if carrier {
        let a = analytic_signal(&sig.values);
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..a.len() - 1 {
            if env[k] > 0.5 * emax && env[k + 1] > 0.5 * emax {
                let w = env[k] * env[k + 1];
                num += w * (a[k + 1] * a[k].conj()).arg();
                den += w * sig.delays.step();
            }
        }
        if !(den > 0.0) {
            return Err(WktError::FitDiverged("carrier frequency not resolved".into()));
        }
        params.push(num / den);
        params.push(a[imax].arg());
    }
    if ig.units() == Units::Counts {
        params.push(2.0 * edge_baseline(ig.values()));
    }
    Ok(Initial { params, tau_ref })
}

/// Fits visibility and envelope width of an interferogram.
pub fn fit_envelope(ig: &Interferogram, model: EnvelopeModel) -> Result<FitReport> {
    fit_envelope_with(ig, model, &FitOptions::default())
}

pub fn fit_envelope_with(ig: &Interferogram, env_model: EnvelopeModel, opts: &FitOptions) -> Result<FitReport> {
    let kind = ig.kind().ok_or(WktError::UnknownKind)?;
    let n = ig.values().len();
    if n < 16 {
        return Err(WktError::TooFewSamples { need: 16, got: n });
    }
    let counts = ig.units() == Units::Counts;
    let init = initial_guess(ig, kind.has_carrier())?;
    let mut p = init.params;
    let scale: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(i, v)| match i {
            0 => 1.0,
            1 | 2 => p[1],
            3 if kind.has_carrier() => 1.0 / p[1],
            4 if kind.has_carrier() => 1.0,
            _ => v.abs().max(1.0),
        })
        .collect();
    let model = Model {
        env: env_model,
        sign: kind.fringe_sign(),
        carrier: kind.has_carrier(),
        counts,
        tau_ref: init.tau_ref,
        scale,
    };
    let np = model.n_params();
    if n <= np {
        return Err(WktError::TooFewSamples { need: np + 1, got: n });
    }
    let tau = ig.delays().points();
    let y = ig.values();

    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut normal = normal_equations(&model, &p, &tau, y);
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = normal.h.clone();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * normal.h[i][i].max(1e-300);
            }
            let Some(delta) = solve(a, normal.g.clone()) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(&delta).zip(&model.scale).map(|((pv, d), s)| pv + d * s).collect();
            let obj = objective(&model, &trial, &tau, y);
            if obj <= normal.objective {
                let small = delta.iter().all(|d| d.abs() < 1e-12);
                p = trial;
                normal = normal_equations(&model, &p, &tau, y);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small {
                    lambda = f64::INFINITY;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || !lambda.is_finite() {
            break;
        }
    }

    // Residuals in probability units.
    let a = if counts { p[np - 1] } else { 1.0 };
    let mut grad = vec![0.0; np];
    let (mut res2, mut sig2) = (0.0, 0.0);
    for (t, yv) in tau.iter().zip(y) {
        let mu = model.eval(&p, *t, &mut grad);
        res2 += ((yv - mu) / a).powi(2);
        sig2 += (yv / a - 0.5).powi(2);
    }
    let residual_rms = (res2 / n as f64).sqrt();
    let signal_rms = (sig2 / n as f64).sqrt();
    if !residual_rms.is_finite() || residual_rms > opts.divergence_ratio * signal_rms {
        return Err(WktError::FitDiverged(format!(
            "residual RMS {residual_rms:.3e} exceeds {} of signal RMS {signal_rms:.3e}",
            opts.divergence_ratio
        )));
    }

    let mut e0 = vec![0.0; np];
    e0[0] = 1.0;
    let var = solve(normal.h.clone(), e0).map(|x| x[0]).unwrap_or(f64::NAN) * model.scale[0].powi(2);
    let var = if counts { var } else { var * res2 * a * a / (n - np) as f64 };
    Ok(FitReport {
        model: env_model,
        temporal_fwhm: p[1].abs(),
        visibility: p[0].clamp(0.0, 1.0),
        visibility_uncertainty: var.max(0.0).sqrt(),
        residual_rms,
        center: p[2],
        carrier: model.carrier.then(|| p[3]),
        count_scale: counts.then_some(a),
        iterations,
    })
}
