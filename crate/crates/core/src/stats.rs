//! Unfolding and Brody-distribution fits of nearest-neighbour spacings.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GcmError, Result};

/// Minimum number of levels accepted by the unfolding and the fit.
pub const MIN_LEVELS: usize = 50;
/// Search interval of the likelihood maximization.
pub const OMEGA_SEARCH: (f64, f64) = (-0.5, 1.5);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample {
    /// mean one; zeros mark exact degeneracies
    pub spacings: Vec<f64>,
    pub window: (f64, f64),
    pub count: usize,
}

impl SpacingSample {
    pub fn from_spacings(spacings: Vec<f64>, window: (f64, f64)) -> Result<Self> {
        if spacings.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(GcmError::Fit("spacings must be finite and non-negative".into()));
        }
        let mean = spacings.iter().sum::<f64>() / spacings.len().max(1) as f64;
        if !(mean > 0.0) {
            return Err(GcmError::Fit("spacings have zero mean".into()));
        }
        let spacings: Vec<f64> = spacings.iter().map(|s| s / mean).collect();
        let count = spacings.len();
        Ok(Self { spacings, window, count })
    }

    pub fn mean(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.count.max(1) as f64
    }
}

/// Chebyshev values `T_0..T_degree` at `t ∈ [−1, 1]`.
fn chebyshev(t: f64, degree: usize) -> Vec<f64> {
    let mut out = vec![1.0, t];
    while out.len() < degree + 1 {
        let k = out.len();
        out.push(2.0 * t * out[k - 1] - out[k - 2]);
    }
    out.truncate(degree + 1);
    out
}

/// Smooth staircase fit over the window and mean-normalized spacings of the unfolded levels.
pub fn unfold(energies: &[f64], window: (f64, f64), degree: usize) -> Result<SpacingSample> {
    if energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(GcmError::InvalidParameter("energies must be ascending".into()));
    }
    if !(window.1 > window.0) {
        return Err(GcmError::InvalidParameter(format!("empty window {window:?}")));
    }
    let levels: Vec<f64> = energies.iter().copied().filter(|e| *e >= window.0 && *e <= window.1).collect();
    if levels.len() < MIN_LEVELS {
        return Err(GcmError::TooFewLevels { needed: MIN_LEVELS, have: levels.len() });
    }
    let degree = degree.min(levels.len() - 2);
    let (lo, hi) = (levels[0], levels[levels.len() - 1]);
    let scale = |e: f64| if hi > lo { 2.0 * (e - lo) / (hi - lo) - 1.0 } else { 0.0 };

    // staircase N(E_i) = i + 1/2 sampled at each level
    let design = Mat::from_fn(levels.len(), degree + 1, |i, j| chebyshev(scale(levels[i]), degree)[j]);
    let rhs = Mat::from_fn(levels.len(), 1, |i, _| i as f64 + 0.5);
    let coeffs = design.qr().solve_lstsq(&rhs);
    let unfolded: Vec<f64> = levels
        .iter()
        .map(|&e| {
            chebyshev(scale(e), degree)
                .iter()
                .enumerate()
                .map(|(j, t)| coeffs[(j, 0)] * t)
                .sum()
        })
        .collect();
    let spacings: Vec<f64> = unfolded.windows(2).map(|w| w[1] - w[0]).collect();
    if let Some(bad) = spacings.iter().position(|s| *s < 0.0) {
        return Err(GcmError::Fit(format!(
            "unfolding polynomial is not monotone near E = {} (lower the degree)",
            levels[bad]
        )));
    }
    SpacingSample::from_spacings(spacings, window)
}

/// `b(ω) = Γ((ω+2)/(ω+1))^{ω+1}`, fixing the mean spacing to one.
pub fn brody_scale(omega: f64) -> f64 {
    libm::tgamma((omega + 2.0) / (omega + 1.0)).powf(omega + 1.0)
}

/// `P(s) = (ω+1) b s^ω exp(−b s^{ω+1})`
pub fn brody_density(omega: f64, s: f64) -> f64 {
    let b = brody_scale(omega);
    (omega + 1.0) * b * s.powf(omega) * (-b * s.powf(omega + 1.0)).exp()
}

/// Draws from the Brody distribution by inverting its CDF.
pub fn brody_sample<R: Rng>(omega: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let b = brody_scale(omega);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (-(1.0 - u).ln() / b).powf(1.0 / (omega + 1.0))
        })
        .collect()
}

fn log_likelihood(omega: f64, spacings: &[f64], log_sum: f64) -> f64 {
    let b = brody_scale(omega);
    let n = spacings.len() as f64;
    let tail: f64 = spacings.iter().map(|s| s.powf(omega + 1.0)).sum();
    n * ((omega + 1.0).ln() + b.ln()) + omega * log_sum - b * tail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrodyFit {
    /// clipped to `[0, 1]`
    pub omega: f64,
    pub omega_raw: f64,
    pub clipped: bool,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// spacings used (zeros are dropped)
    pub n: usize,
}

/// Maximum-likelihood Brody parameter with a 95% interval from the observed information.
pub fn brody_fit(sample: &SpacingSample) -> Result<BrodyFit> {
    let positive: Vec<f64> = sample.spacings.iter().copied().filter(|s| *s > 0.0).collect();
    if positive.len() < MIN_LEVELS {
        return Err(GcmError::TooFewLevels { needed: MIN_LEVELS, have: positive.len() });
    }
    let mean = positive.iter().sum::<f64>() / positive.len() as f64;
    let spacings: Vec<f64> = positive.iter().map(|s| s / mean).collect();
    let (min, max) = spacings.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
    if max - min < 1e-12 {
        return Err(GcmError::Fit("all spacings are equal; the Brody likelihood has no maximum".into()));
    }
    let log_sum: f64 = spacings.iter().map(|s| s.ln()).sum();
    let f = |w: f64| log_likelihood(w, &spacings, log_sum);

    // golden-section search for the maximum
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = OMEGA_SEARCH;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let raw = 0.5 * (a + b);
    if raw - OMEGA_SEARCH.0 < 1e-6 || OMEGA_SEARCH.1 - raw < 1e-6 {
        return Err(GcmError::Fit(format!("likelihood maximum at the search boundary (omega = {raw:.4})")));
    }
    let h = 1e-4;
    let curvature = (f(raw + h) - 2.0 * f(raw) + f(raw - h)) / (h * h);
    let half_width = if curvature < 0.0 { 1.96 / (-curvature).sqrt() } else { f64::INFINITY };
    let omega = raw.clamp(0.0, 1.0);
    Ok(BrodyFit {
        omega,
        omega_raw: raw,
        clipped: omega != raw,
        ci_lo: raw - half_width,
        ci_hi: raw + half_width,
        n: spacings.len(),
    })
}
