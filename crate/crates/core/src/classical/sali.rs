//! Smaller alignment index of two deviation vectors.

use serde::{Deserialize, Serialize};

use super::integrator::{relative_drift, Flow, IntegratorSettings};
use super::{hamiltonian_classical, PhasePoint};
use crate::error::{GcmError, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Regular,
    Chaotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaliSettings {
    pub duration: f64,
    pub regular_threshold: f64,
    pub chaotic_threshold: f64,
    /// run undecided orbits to twice the duration before calling them chaotic
    pub extend_intermediate: bool,
}

impl Default for SaliSettings {
    fn default() -> Self {
        Self {
            duration: 1e4,
            regular_threshold: 1e-4,
            chaotic_threshold: 1e-8,
            extend_intermediate: true,
        }
    }
}

impl SaliSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(GcmError::InvalidParameter(format!("SALI duration must be > 0, got {}", self.duration)));
        }
        if !(self.chaotic_threshold > 0.0 && self.chaotic_threshold < self.regular_threshold) {
            return Err(GcmError::InvalidParameter("SALI thresholds must satisfy 0 < chaotic < regular".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaliOutcome {
    pub value: f64,
    pub time: f64,
    pub regularity: Regularity,
    /// deviation vectors overflowed; classified chaotic
    pub blown_up: bool,
    /// the orbit needed the doubled duration
    pub extended: bool,
    pub max_drift: f64,
}

fn normalize(v: &mut [f64; 4]) -> bool {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return false;
    }
    v.iter_mut().for_each(|c| *c /= n);
    true
}

fn alignment(v1: &[f64; 4], v2: &[f64; 4]) -> f64 {
    let mut plus = 0.0;
    let mut minus = 0.0;
    for k in 0..4 {
        plus += (v1[k] + v2[k]).powi(2);
        minus += (v1[k] - v2[k]).powi(2);
    }
    plus.sqrt().min(minus.sqrt())
}

/// SALI with the default orthonormal pair `e_x`, `e_y`.
pub fn sali(params: &ModelParams, p0: &PhasePoint, settings: &SaliSettings, integrator: &IntegratorSettings) -> Result<SaliOutcome> {
    sali_with_deviations(params, p0, [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], settings, integrator)
}

pub fn sali_with_deviations(
    params: &ModelParams,
    p0: &PhasePoint,
    mut v1: [f64; 4],
    mut v2: [f64; 4],
    settings: &SaliSettings,
    integrator: &IntegratorSettings,
) -> Result<SaliOutcome> {
    settings.validate()?;
    if !normalize(&mut v1) || !normalize(&mut v2) {
        return Err(GcmError::InvalidParameter("deviation vectors must be nonzero and finite".into()));
    }
    if alignment(&v1, &v2) < 1e-12 {
        return Err(GcmError::InvalidParameter("deviation vectors are parallel; SALI would start at zero".into()));
    }
    let energy = hamiltonian_classical(params, p0);
    let flow = Flow::new(params, integrator, energy)?;
    let mut s = flow.to_fixed(p0)?;
    let (n, h) = flow.plan(settings.duration);
    let total = if settings.extend_intermediate { 2 * n } else { n };

    let mut value = alignment(&v1, &v2);
    let mut max_drift = 0.0f64;
    let outcome = |value: f64, time: f64, regularity, blown_up, extended, max_drift| SaliOutcome {
        value,
        time,
        regularity,
        blown_up,
        extended,
        max_drift,
    };
    for k in 0..total {
        let t = (k + 1) as f64 * h;
        let mut devs = [v1, v2];
        if !flow.advance_tangent(&mut s, h, &mut devs) {
            return Err(GcmError::Escape { time: t });
        }
        [v1, v2] = devs;
        max_drift = max_drift.max(relative_drift(flow.energy(&s), energy));
        if !normalize(&mut v1) || !normalize(&mut v2) {
            return Ok(outcome(0.0, t, Regularity::Chaotic, true, k >= n, max_drift));
        }
        value = alignment(&v1, &v2);
        if value < settings.chaotic_threshold {
            return Ok(outcome(value, t, Regularity::Chaotic, false, k >= n, max_drift));
        }
        if k + 1 == n && value > settings.regular_threshold {
            break;
        }
    }
    if max_drift > integrator.drift_tolerance {
        return Err(GcmError::EnergyDrift { drift: max_drift, tolerance: integrator.drift_tolerance });
    }
    let extended = settings.extend_intermediate && value <= settings.regular_threshold;
    let time = if extended { total as f64 * h } else { n as f64 * h };
    let regularity = if value > settings.regular_threshold { Regularity::Regular } else { Regularity::Chaotic };
    Ok(outcome(value, time, regularity, false, extended, max_drift))
}
