//! From a control `u` to the time-dependent boundary data `A(t)`, `chi(t)`.
//!
//! `[0, T]` is cut into windows of length `tau`. Inside window `k`,
//! `A(t) = a + beta int_{k tau}^t u`, and `A` is reset to `a` at the start of
//! the next window. The phase is `chi(t) = A(t) x` (offset `b = 0`).

use serde::{Deserialize, Serialize};

use super::synthesis::ControlPulse;
use crate::error::{Error, Result};
use crate::gauge::{is_simple, EdgePotential, GaugePhase};
use crate::graph::MetricGraph;
use crate::propagation::Coefficient;

/// Slack allowed on the window bound.
pub const WINDOW_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySeries {
    pub tau: f64,
    pub windows: usize,
    /// Sample times. Every window contributes its start and end, so interior
    /// window boundaries appear twice: first with the left limit, then reset.
    pub times: Vec<f64>,
    /// `int_{k tau}^t u` at each sample.
    pub window_integral: Vec<f64>,
    /// `A_e(t)` per sample.
    pub potentials: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub beta: Vec<f64>,
    /// `sup_t max_e |A_e(t) - a_e|`.
    pub sup_deviation: f64,
    /// `c tau max_e |beta_e|`.
    pub bound: f64,
    pub within_bound: bool,
}

impl BoundarySeries {
    /// `chi(t_i) = A(t_i) x`.
    pub fn phase(&self, i: usize) -> GaugePhase {
        GaugePhase { a: self.potentials[i].clone(), b: vec![0.0; self.a.len()] }
    }
}

/// Number of windows of length `tau` covering `[0, t]`.
pub fn window_count(t: f64, tau: f64) -> usize {
    if t <= 0.0 {
        return 0;
    }
    let w = (t / tau).ceil() as usize;
    // a duration that is a multiple of tau up to roundoff
    if w > 1 && ((w - 1) as f64 * tau - t).abs() <= 1e-12 * t {
        w - 1
    } else {
        w.max(1)
    }
}

/// `int_{k tau}^t u` with `k = floor(t / tau)`, i.e. right-continuous resets.
pub fn window_integral(u: &ControlPulse, tau: f64, t: f64) -> f64 {
    let windows = window_count(u.duration(), tau);
    let k = ((t / tau).floor() as usize).min(windows.saturating_sub(1));
    u.integral(t) - u.integral(k as f64 * tau)
}

/// [`window_integral`] as a piecewise-linear coefficient with jumps at the
/// window boundaries.
pub fn window_integral_coefficient(u: &ControlPulse, tau: f64) -> Coefficient {
    let t_end = u.duration();
    let windows = window_count(t_end, tau);
    if windows == 0 {
        return Coefficient::Constant(0.0);
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for k in 0..windows {
        let start = k as f64 * tau;
        let end = if k + 1 == windows { t_end } else { (k + 1) as f64 * tau };
        let base = u.integral(start);
        times.push(start);
        values.push(0.0);
        for &kn in &u.knots {
            if kn > start && kn < end {
                times.push(kn);
                values.push(u.integral(kn) - base);
            }
        }
        times.push(end);
        values.push(u.integral(end) - base);
    }
    Coefficient::PiecewiseLinear { times, values }
}

pub fn reconstruct_boundary_control(
    g: &MetricGraph,
    u: &ControlPulse,
    a: &EdgePotential,
    beta: &[f64],
    tau: f64,
    samples_per_window: usize,
) -> Result<BoundarySeries> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("window length tau = {tau} must be positive")));
    }
    u.validate_closed()?;
    a.check(g)?;
    for v in [&a.a[..], beta] {
        let s = is_simple(&EdgePotential::from_a(v.to_vec()), g);
        if !s.simple {
            return Err(Error::NotSimple(s.residuals));
        }
    }
    let t_end = u.duration();
    let windows = window_count(t_end, tau);
    let m = samples_per_window.max(1);
    let mut times = Vec::new();
    let mut integrals = Vec::new();
    for k in 0..windows {
        let start = k as f64 * tau;
        let end = if k + 1 == windows { t_end } else { (k + 1) as f64 * tau };
        let base = u.integral(start);
        for j in 0..=m {
            let t = if j == m { end } else { start + (end - start) * j as f64 / m as f64 };
            times.push(t);
            integrals.push(u.integral(t) - base);
        }
    }
    let potentials: Vec<Vec<f64>> =
        integrals.iter().map(|s| a.a.iter().zip(beta).map(|(ae, be)| ae + be * s).collect()).collect();
    let sup_deviation = potentials
        .iter()
        .flat_map(|p| p.iter().zip(&a.a).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let bmax = beta.iter().map(|b| b.abs()).fold(0.0, f64::max);
    let bound = u.c * tau * bmax;
    Ok(BoundarySeries {
        tau,
        windows,
        times,
        window_integral: integrals,
        potentials,
        a: a.a.clone(),
        beta: beta.to_vec(),
        sup_deviation,
        bound,
        within_bound: sup_deviation <= bound + WINDOW_SLACK,
    })
}

/// `C^infinity` step from 0 at `s <= -1` to 1 at `s >= 1`.
fn smooth_step(s: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let x = 0.5 * (s + 1.0);
    let (p, q) = (f(x), f(1.0 - x));
    if p + q == 0.0 {
        if s < 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        p / (p + q)
    }
}

/// A piecewise-constant control with each jump replaced by a smooth
/// transition of the given width centred on the knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothPulse {
    pub pulse: ControlPulse,
    pub width: f64,
}

impl SmoothPulse {
    pub fn eval(&self, t: f64) -> f64 {
        let p = &self.pulse;
        if p.values.is_empty() {
            return 0.0;
        }
        let h = 0.5 * self.width;
        let mut v = p.values[0];
        for j in 1..p.values.len() {
            let w = smooth_step((t - p.knots[j]) / h);
            v += (p.values[j] - p.values[j - 1]) * w;
        }
        v
    }

    pub fn coefficient(&self) -> Coefficient {
        let s = self.clone();
        Coefficient::function(move |t| s.eval(t), Vec::new())
    }

    /// Total measure of the transition bands.
    pub fn band_measure(&self) -> f64 {
        self.width * self.pulse.cells().saturating_sub(1) as f64
    }

    /// Whether `t` lies in a transition band.
    pub fn in_band(&self, t: f64) -> bool {
        let n = self.pulse.knots.len();
        n > 2 && self.pulse.knots[1..n - 1].iter().any(|&k| (t - k).abs() < 0.5 * self.width)
    }

    /// `count + 1` equally spaced samples on `[0, T]`.
    pub fn samples(&self, count: usize) -> Vec<(f64, f64)> {
        let t = self.pulse.duration();
        (0..=count).map(|i| t * i as f64 / count.max(1) as f64).map(|x| (x, self.eval(x))).collect()
    }
}

pub fn smooth_pulse(u: &ControlPulse, width: f64) -> Result<SmoothPulse> {
    u.validate_closed()?;
    let shortest = u.knots.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if !(width > 0.0) || width >= shortest {
        return Err(Error::InvalidParameter(format!("width {width} must lie in (0, {shortest})")));
    }
    Ok(SmoothPulse { pulse: u.clone(), width })
}
