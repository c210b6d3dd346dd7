//! Fixed-point symplectic composition integrator.
//!
//! Positions and momenta are stored as integers on a uniform lattice and
//! every drift/kick increment is rounded symmetrically, so a step with
//! negated momenta (or negated time step) undoes the forward step bit for
//! bit. Energy error is the usual bounded oscillation of a symplectic map.

use serde::{Deserialize, Serialize};

use super::PhasePoint;
use crate::error::{GcmError, Result};
use crate::model::{self, ModelParams};

/// Largest integer magnitude that still converts to `f64` exactly.
const EXACT_LIMIT: i64 = 1 << 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composition {
    /// Störmer–Verlet, order 2
    Leapfrog,
    /// Yoshida triple jump, order 4
    TripleJump,
    /// nine-stage Kahan–Li scheme, order 6
    KahanLi6,
}

impl Composition {
    /// Leapfrog weights of the palindromic composition.
    fn weights(self) -> Vec<f64> {
        match self {
            Composition::Leapfrog => vec![1.0],
            Composition::TripleJump => {
                let c = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - c);
                vec![w1, -c * w1, w1]
            }
            Composition::KahanLi6 => {
                let half = [
                    0.392_161_444_007_314_139_279_250_56,
                    0.332_599_136_789_359_438_599_748_64,
                    -0.706_246_172_557_639_359_809_964_82,
                    0.082_213_596_293_550_800_231_490_45,
                    0.798_543_990_934_829_963_398_950_35,
                ];
                half.iter().chain(half[..4].iter().rev()).copied().collect()
            }
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Composition::Leapfrog => 2,
            Composition::TripleJump => 4,
            Composition::KahanLi6 => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSettings {
    pub step: f64,
    pub composition: Composition,
    /// bound on `|H(t) − H(0)| / max(1, |H(0)|)`
    pub drift_tolerance: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            step: 0.02,
            composition: Composition::KahanLi6,
            drift_tolerance: 1e-8,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(GcmError::InvalidParameter(format!("integrator step must be > 0, got {}", self.step)));
        }
        if !(self.drift_tolerance > 0.0) {
            return Err(GcmError::InvalidParameter("drift tolerance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stage {
    Drift(f64),
    Kick(f64),
}

fn stages(weights: &[f64]) -> Vec<Stage> {
    let mut out = vec![Stage::Drift(0.5 * weights[0])];
    for (k, &w) in weights.iter().enumerate() {
        out.push(Stage::Kick(w));
        let next = weights.get(k + 1).copied().unwrap_or(0.0);
        out.push(Stage::Drift(0.5 * (w + next)));
    }
    out
}

/// Phase-space state on the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedState {
    pub q: [i64; 2],
    pub p: [i64; 2],
}

/// Radius outside which `V > energy` in every direction.
fn confining_radius(params: &ModelParams, energy: f64) -> f64 {
    let worst = |r: f64| params.a * r * r - params.b.abs() * r.powi(3) + params.c * r.powi(4);
    let mut hi = 1.0;
    while worst(hi) <= energy || hi < 1.0 {
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    hi
}

/// Step engine for one parameter set and energy shell.
#[derive(Debug, Clone)]
pub struct Flow {
    params: ModelParams,
    stages: Vec<Stage>,
    step: f64,
    scale: f64,
}

impl Flow {
    /// Picks the lattice spacing so that every state on the energy shell fits with headroom.
    pub fn new(params: &ModelParams, settings: &IntegratorSettings, energy: f64) -> Result<Self> {
        params.validate()?;
        settings.validate()?;
        let minimum = model::global_minimum(params)?.energy;
        if !energy.is_finite() || energy < minimum {
            return Err(GcmError::EnergyBelowMinimum { energy, minimum });
        }
        let p_max = (2.0 * params.mass * (energy - minimum)).sqrt();
        let bound = confining_radius(params, energy).max(p_max).max(1.0);
        // keep 4x headroom below the exact-conversion limit
        let exponent = (50.0_f64).min((51.0 - bound.log2().ceil()).floor());
        Ok(Self {
            params: *params,
            stages: stages(&settings.composition.weights()),
            step: settings.step,
            scale: 2f64.powf(exponent),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Lattice spacing of positions and momenta.
    pub fn resolution(&self) -> f64 {
        1.0 / self.scale
    }

    /// Number of steps and the signed step used to cover `duration`.
    pub fn plan(&self, duration: f64) -> (u64, f64) {
        let n = (duration.abs() / self.step).ceil().max(1.0) as u64;
        (n, duration / n as f64)
    }

    pub fn to_fixed(&self, p: &PhasePoint) -> Result<FixedState> {
        let conv = |v: f64| {
            let r = (v * self.scale).round();
            if !r.is_finite() || r.abs() >= EXACT_LIMIT as f64 {
                None
            } else {
                Some(r as i64)
            }
        };
        match (conv(p.x), conv(p.y), conv(p.px), conv(p.py)) {
            (Some(x), Some(y), Some(px), Some(py)) => Ok(FixedState { q: [x, y], p: [px, py] }),
            _ => Err(GcmError::Escape { time: 0.0 }),
        }
    }

    pub fn to_point(&self, s: &FixedState) -> PhasePoint {
        let inv = 1.0 / self.scale;
        PhasePoint {
            x: s.q[0] as f64 * inv,
            y: s.q[1] as f64 * inv,
            px: s.p[0] as f64 * inv,
            py: s.p[1] as f64 * inv,
        }
    }

    pub fn energy(&self, s: &FixedState) -> f64 {
        super::hamiltonian_classical(&self.params, &self.to_point(s))
    }

    fn in_range(s: &FixedState) -> bool {
        s.q.iter().chain(&s.p).all(|v| v.abs() < EXACT_LIMIT)
    }

    /// One composition step of signed length `h`. Returns false if the state left the lattice range.
    pub fn advance(&self, s: &mut FixedState, h: f64) -> bool {
        let inv_mass = 1.0 / self.params.mass;
        let inv = 1.0 / self.scale;
        for stage in &self.stages {
            match *stage {
                Stage::Drift(c) => {
                    let f = c * h * inv_mass;
                    for k in 0..2 {
                        s.q[k] += (f * s.p[k] as f64).round() as i64;
                    }
                }
                Stage::Kick(c) => {
                    let g = self.params.gradient_cartesian(s.q[0] as f64 * inv, s.q[1] as f64 * inv);
                    let f = -c * h * self.scale;
                    for k in 0..2 {
                        let dp = (f * g[k]).round();
                        if !dp.is_finite() || dp.abs() >= EXACT_LIMIT as f64 {
                            return false;
                        }
                        s.p[k] += dp as i64;
                    }
                }
            }
        }
        Self::in_range(s)
    }

    /// Same step with deviation vectors `(δx, δy, δpx, δpy)` carried by the tangent map.
    pub fn advance_tangent(&self, s: &mut FixedState, h: f64, deviations: &mut [[f64; 4]]) -> bool {
        let inv_mass = 1.0 / self.params.mass;
        let inv = 1.0 / self.scale;
        for stage in &self.stages {
            match *stage {
                Stage::Drift(c) => {
                    let f = c * h * inv_mass;
                    for k in 0..2 {
                        s.q[k] += (f * s.p[k] as f64).round() as i64;
                    }
                    for d in deviations.iter_mut() {
                        d[0] += f * d[2];
                        d[1] += f * d[3];
                    }
                }
                Stage::Kick(c) => {
                    let (x, y) = (s.q[0] as f64 * inv, s.q[1] as f64 * inv);
                    let g = self.params.gradient_cartesian(x, y);
                    let hess = self.params.hessian_cartesian(x, y);
                    let f = -c * h * self.scale;
                    for k in 0..2 {
                        let dp = (f * g[k]).round();
                        if !dp.is_finite() || dp.abs() >= EXACT_LIMIT as f64 {
                            return false;
                        }
                        s.p[k] += dp as i64;
                    }
                    let ch = c * h;
                    for d in deviations.iter_mut() {
                        let (dx, dy) = (d[0], d[1]);
                        d[2] -= ch * (hess[0][0] * dx + hess[0][1] * dy);
                        d[3] -= ch * (hess[1][0] * dx + hess[1][1] * dy);
                    }
                }
            }
        }
        Self::in_range(s)
    }

    /// Floating-point version of one step, used to interpolate inside a step.
    pub fn advance_f64(&self, p: &PhasePoint, h: f64) -> PhasePoint {
        let inv_mass = 1.0 / self.params.mass;
        let mut q = [p.x, p.y];
        let mut m = [p.px, p.py];
        for stage in &self.stages {
            match *stage {
                Stage::Drift(c) => {
                    q[0] += c * h * inv_mass * m[0];
                    q[1] += c * h * inv_mass * m[1];
                }
                Stage::Kick(c) => {
                    let g = self.params.gradient_cartesian(q[0], q[1]);
                    m[0] -= c * h * g[0];
                    m[1] -= c * h * g[1];
                }
            }
        }
        PhasePoint { x: q[0], y: q[1], px: m[0], py: m[1] }
    }
}

/// Summary of a plain run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub final_point: PhasePoint,
    pub steps: u64,
    pub max_drift: f64,
}

/// Relative energy error `|H − H₀| / max(1, |H₀|)`.
pub fn relative_drift(energy: f64, reference: f64) -> f64 {
    (energy - reference).abs() / reference.abs().max(1.0)
}

impl Flow {
    /// Evolves for a signed duration, calling `visit(t, previous, current)` after each step.
    pub fn run<F>(&self, p0: &PhasePoint, duration: f64, mut visit: F) -> Result<RunSummary>
    where
        F: FnMut(f64, &FixedState, &FixedState) -> std::ops::ControlFlow<()>,
    {
        let mut s = self.to_fixed(p0)?;
        let e0 = self.energy(&s);
        let (n, h) = self.plan(duration);
        let mut max_drift = 0.0f64;
        let mut steps = 0;
        for k in 0..n {
            let prev = s;
            let t = (k + 1) as f64 * h;
            if !self.advance(&mut s, h) {
                return Err(GcmError::Escape { time: t });
            }
            steps += 1;
            max_drift = max_drift.max(relative_drift(self.energy(&s), e0));
            if visit(t, &prev, &s).is_break() {
                break;
            }
        }
        Ok(RunSummary { final_point: self.to_point(&s), steps, max_drift })
    }
}
