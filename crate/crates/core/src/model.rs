//! Collective-model potential `V = A β² + B β³ cos 3γ + C β⁴` and its geometry.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{GcmError, Result};

/// Potential coefficients, Planck constant and mass. All quantities are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default = "default_a")]
    pub a: f64,
    pub b: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    pub hbar: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
}

fn default_a() -> f64 {
    -1.0
}

fn default_c() -> f64 {
    1.0
}

fn default_mass() -> f64 {
    1.0
}

impl ModelParams {
    /// Parameters with `(A, C) = (-1, +1)` and unit mass.
    pub fn new(b: f64, hbar: f64) -> Self {
        Self {
            a: -1.0,
            b,
            c: 1.0,
            hbar,
            mass: 1.0,
        }
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.hbar, self.mass];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GcmError::InvalidParameter("model parameters must be finite".into()));
        }
        if self.c <= 0.0 {
            return Err(GcmError::InvalidParameter(format!("C must be > 0, got {}", self.c)));
        }
        if self.hbar <= 0.0 {
            return Err(GcmError::InvalidParameter(format!("hbar must be > 0, got {}", self.hbar)));
        }
        if self.mass <= 0.0 {
            return Err(GcmError::InvalidParameter(format!("mass must be > 0, got {}", self.mass)));
        }
        Ok(())
    }

    /// Classicality `κ = ħ²/K`.
    pub fn classicality(&self) -> f64 {
        self.hbar * self.hbar / self.mass
    }

    pub fn potential(&self, beta: f64, gamma: f64) -> f64 {
        let b2 = beta * beta;
        self.a * b2 + self.b * b2 * beta * (3.0 * gamma).cos() + self.c * b2 * b2
    }

    /// Same potential in `(x, y) = (β cos γ, β sin γ)`; `β³ cos 3γ = x³ − 3xy²`.
    pub fn potential_cartesian(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        self.a * r2 + self.b * (x * x * x - 3.0 * x * y * y) + self.c * r2 * r2
    }

    /// `(∂V/∂x, ∂V/∂y)`.
    pub fn gradient_cartesian(&self, x: f64, y: f64) -> [f64; 2] {
        let r2 = x * x + y * y;
        [
            2.0 * self.a * x + 3.0 * self.b * (x * x - y * y) + 4.0 * self.c * x * r2,
            2.0 * self.a * y - 6.0 * self.b * x * y + 4.0 * self.c * y * r2,
        ]
    }

    /// `[[Vxx, Vxy], [Vxy, Vyy]]`.
    pub fn hessian_cartesian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let vxx = 2.0 * self.a + 6.0 * self.b * x + 4.0 * self.c * (3.0 * x * x + y * y);
        let vyy = 2.0 * self.a - 6.0 * self.b * x + 4.0 * self.c * (x * x + 3.0 * y * y);
        let vxy = -6.0 * self.b * y + 8.0 * self.c * x * y;
        [[vxx, vxy], [vxy, vyy]]
    }

    /// Potential along the `y = 0` line, `V(x, 0) = A x² + B x³ + C x⁴`.
    pub fn potential_on_axis(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.a * x2 + self.b * x2 * x + self.c * x2 * x2
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn canonical_angle(gamma: f64) -> f64 {
    let g = gamma.rem_euclid(TAU);
    if g >= TAU {
        0.0
    } else {
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryKind {
    Minimum,
    Saddle,
    LocalMaximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub beta: f64,
    pub gamma: f64,
    pub energy: f64,
    pub kind: StationaryKind,
}

const GRADIENT_TOLERANCE: f64 = 1e-10;

fn classify(radial: f64, angular: f64) -> StationaryKind {
    match (radial >= 0.0, angular >= 0.0) {
        (true, true) => StationaryKind::Minimum,
        (false, false) => StationaryKind::LocalMaximum,
        _ => StationaryKind::Saddle,
    }
}

/// Positive roots of `4C β² + 3Bσ β + 2A = 0`, polished by Newton steps.
fn radial_roots(p: &ModelParams, sigma: f64) -> Vec<f64> {
    let qa = 4.0 * p.c;
    let qb = 3.0 * p.b * sigma;
    let qc = 2.0 * p.a;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let q = -0.5 * (qb + qb.signum() * sq);
    let mut roots = Vec::with_capacity(2);
    if q != 0.0 {
        roots.push(q / qa);
        roots.push(qc / q);
    } else {
        roots.push(sq / (2.0 * qa));
    }
    let mut out: Vec<f64> = roots
        .into_iter()
        .filter(|r| *r > 0.0)
        .map(|mut r| {
            for _ in 0..3 {
                let f = qa * r * r + qb * r + qc;
                let df = 2.0 * qa * r + qb;
                if df == 0.0 {
                    break;
                }
                r -= f / df;
            }
            r
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1.0));
    out
}

fn check_gradient(p: &ModelParams, beta: f64, gamma: f64) -> Result<()> {
    let [gx, gy] = p.gradient_cartesian(beta * gamma.cos(), beta * gamma.sin());
    let norm = gx.hypot(gy);
    if norm > GRADIENT_TOLERANCE {
        return Err(GcmError::StationaryPoint(format!(
            "|grad V| = {norm:e} at beta = {beta}, gamma = {gamma}"
        )));
    }
    Ok(())
}

/// All stationary points of the potential.
///
/// For `B = 0` the minimum is a ring; it is reported once at `γ = 0`.
pub fn stationary_points(p: &ModelParams) -> Result<Vec<StationaryPoint>> {
    p.validate()?;
    let mut points = Vec::new();

    let origin_kind = if p.a < 0.0 {
        StationaryKind::LocalMaximum
    } else if p.a > 0.0 || p.b == 0.0 {
        StationaryKind::Minimum
    } else {
        StationaryKind::Saddle
    };
    points.push(StationaryPoint {
        beta: 0.0,
        gamma: 0.0,
        energy: 0.0,
        kind: origin_kind,
    });

    if p.b == 0.0 {
        for beta in radial_roots(p, 1.0) {
            let radial = 2.0 * p.a + 12.0 * p.c * beta * beta;
            check_gradient(p, beta, 0.0)?;
            points.push(StationaryPoint {
                beta,
                gamma: 0.0,
                energy: p.potential(beta, 0.0),
                kind: classify(radial, 0.0),
            });
        }
        return Ok(points);
    }

    // cos 3γ = +1 at γ = 0, 2π/3, 4π/3 and −1 at γ = π/3, π, 5π/3
    for (sigma, offset) in [(1.0, 0.0), (-1.0, PI / 3.0)] {
        for beta in radial_roots(p, sigma) {
            let radial = 2.0 * p.a + 6.0 * p.b * sigma * beta + 12.0 * p.c * beta * beta;
            let angular = -9.0 * p.b * sigma * beta;
            let kind = classify(radial, angular);
            for k in 0..3 {
                let gamma = canonical_angle(offset + k as f64 * TAU / 3.0);
                check_gradient(p, beta, gamma)?;
                points.push(StationaryPoint {
                    beta,
                    gamma,
                    energy: p.potential(beta, gamma),
                    kind,
                });
            }
        }
    }
    points.sort_by(|l, r| l.energy.total_cmp(&r.energy).then(l.beta.total_cmp(&r.beta)).then(l.gamma.total_cmp(&r.gamma)));
    Ok(points)
}

/// Lowest value of the potential.
pub fn global_minimum(p: &ModelParams) -> Result<StationaryPoint> {
    stationary_points(p)?
        .into_iter()
        .filter(|s| s.kind == StationaryKind::Minimum)
        .min_by(|l, r| l.energy.total_cmp(&r.energy).then(l.gamma.total_cmp(&r.gamma)))
        .ok_or_else(|| GcmError::StationaryPoint("no minimum found".into()))
}

/// Harmonic expansion around the global minimum,
/// `V ≈ V₀ + k_β (β−β₀)²/2 + k_γ β² (γ−γ₀)²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticWell {
    pub beta0: f64,
    pub gamma0: f64,
    pub v0: f64,
    pub k_beta: f64,
    pub k_gamma: f64,
    pub omega_beta: f64,
    pub omega_gamma: f64,
}

pub fn quadratic_well(p: &ModelParams) -> Result<QuadraticWell> {
    if p.b == 0.0 {
        return Err(GcmError::InvalidParameter(
            "quadratic well needs B != 0 (the B = 0 minimum is a ring)".into(),
        ));
    }
    let min = global_minimum(p)?;
    if min.beta == 0.0 {
        return Err(GcmError::StationaryPoint("global minimum sits at the origin".into()));
    }
    let beta = min.beta;
    let sigma = (3.0 * min.gamma).cos().round();
    let k_beta = 2.0 * p.a + 6.0 * p.b * sigma * beta + 12.0 * p.c * beta * beta;
    let k_gamma = -9.0 * p.b * sigma * beta;
    Ok(QuadraticWell {
        beta0: beta,
        gamma0: min.gamma,
        v0: min.energy,
        k_beta,
        k_gamma,
        omega_beta: (k_beta / p.mass).sqrt(),
        omega_gamma: (k_gamma / p.mass).sqrt(),
    })
}

/// `k_β − k_γ`; its zero marks the β/γ resonance of the local oscillator.
pub fn resonance_mismatch(p: &ModelParams) -> Result<f64> {
    let w = quadratic_well(p)?;
    Ok(w.k_beta - w.k_gamma)
}

/// Radial stiffness `∂²V/∂β²` at the global minimum (also defined on the `B = 0` ring).
pub fn radial_stiffness(p: &ModelParams) -> Result<f64> {
    let min = global_minimum(p)?;
    let sigma = if p.b == 0.0 { 0.0 } else { (3.0 * min.gamma).cos().round() };
    let beta = min.beta;
    Ok(2.0 * p.a + 6.0 * p.b * sigma * beta + 12.0 * p.c * beta * beta)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm <= 0.0) == (flo <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Radial intervals `{β ≥ 0 : V(β, γ) ≤ E}` along a fixed angle.
pub fn accessible_domain(p: &ModelParams, energy: f64, gamma: f64) -> Vec<(f64, f64)> {
    let sigma = (3.0 * gamma).cos();
    let f = |beta: f64| p.potential(beta, gamma) - energy;

    let mut breaks = vec![0.0];
    breaks.extend(radial_roots(p, sigma));
    // upper bracket where the quartic term dominates
    let mut top = breaks.last().copied().unwrap_or(0.0).max(1.0);
    while f(top) <= 0.0 {
        top *= 2.0;
    }
    breaks.push(top);

    let mut roots = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
        }
        if (flo < 0.0 && fhi > 0.0) || (flo > 0.0 && fhi < 0.0) {
            roots.push(bisect(f, lo, hi));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();

    let mut bounds = vec![0.0];
    bounds.extend(roots.iter().copied().filter(|r| *r > 0.0));
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for (i, &lo) in bounds.iter().enumerate() {
        let hi = bounds.get(i + 1).copied();
        let probe = match hi {
            Some(h) => 0.5 * (lo + h),
            None => lo + 1.0,
        };
        let inside = if hi.is_some_and(|h| h == lo) { false } else { f(probe) <= 0.0 };
        if inside {
            let hi = hi.unwrap_or(lo);
            match intervals.last_mut() {
                Some(last) if last.1 == lo => last.1 = hi,
                _ => intervals.push((lo, hi)),
            }
        }
    }
    if intervals.is_empty() && f(0.0) == 0.0 {
        intervals.push((0.0, 0.0));
    }
    intervals
}

/// Accessible `x` range on the `y = 0` line: `V(x, 0) ≤ E`.
pub fn axis_interval(p: &ModelParams, energy: f64) -> Option<(f64, f64)> {
    let right = accessible_domain(p, energy, 0.0);
    let left = accessible_domain(p, energy, PI);
    let hi = right.iter().map(|iv| iv.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = left.iter().map(|iv| -iv.1).fold(f64::INFINITY, f64::min);
    match (right.is_empty(), left.is_empty()) {
        (true, true) => None,
        (false, true) => Some((right.iter().map(|iv| iv.0).fold(f64::INFINITY, f64::min), hi)),
        (true, false) => Some((lo, -left.iter().map(|iv| iv.0).fold(f64::INFINITY, f64::min))),
        (false, false) => Some((lo, hi)),
    }
}
