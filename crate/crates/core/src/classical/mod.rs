//! Classical dynamics of the collective Hamiltonian in Cartesian coordinates.

mod integrator;
mod peres;
mod sali;
mod section;

pub use integrator::{relative_drift, Composition, FixedState, Flow, IntegratorSettings, RunSummary};
pub use peres::{
    classical_peres_average, freg, l2_bounds, l2_section_map, BoundsRow, L2Average, L2Settings, Mesh, RegularFraction,
    SectionMap,
};
pub use sali::{sali, sali_with_deviations, Regularity, SaliOutcome, SaliSettings};
pub use section::{poincare_section, sample_rng, SectionSampler};

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{GcmError, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl PhasePoint {
    pub fn at_rest(x: f64, y: f64) -> Self {
        Self { x, y, px: 0.0, py: 0.0 }
    }

    /// `L = x p_y − y p_x`
    pub fn angular_momentum(&self) -> f64 {
        self.x * self.py - self.y * self.px
    }

    pub fn reversed(&self) -> Self {
        Self { px: -self.px, py: -self.py, ..*self }
    }

    pub fn max_distance(&self, other: &PhasePoint) -> f64 {
        [self.x - other.x, self.y - other.y, self.px - other.px, self.py - other.py]
            .iter()
            .fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.px, self.py].iter().all(|v| v.is_finite())
    }
}

/// `(p_x² + p_y²)/(2K) + V(x, y)`
pub fn hamiltonian_classical(params: &ModelParams, p: &PhasePoint) -> f64 {
    (p.px * p.px + p.py * p.py) / (2.0 * params.mass) + params.potential_cartesian(p.x, p.y)
}

/// Section crossing `(x, p_x)` at `y = 0`, `p_y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub time: f64,
    pub x: f64,
    pub px: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub initial: PhasePoint,
    pub energy: f64,
    pub final_point: PhasePoint,
    pub duration: f64,
    pub max_drift: f64,
    pub crossings: Vec<Crossing>,
    pub sali_final: Option<f64>,
    pub l2_average: Option<L2Average>,
}

/// Locates `y = 0` inside a step that took `prev` to `next` by Newton iteration on a partial step.
///
/// Returns the time offset from `prev` and the interpolated point.
pub(crate) fn refine_crossing(flow: &Flow, prev: &FixedState, next: &FixedState, h: f64) -> Result<(f64, PhasePoint)> {
    let start = flow.to_point(prev);
    let end = flow.to_point(next);
    let mut delta = h * (-start.y) / (end.y - start.y);
    let mut point = flow.advance_f64(&start, delta);
    for _ in 0..60 {
        if point.y.abs() < 1e-10 {
            return Ok((delta, point));
        }
        // dy/dt = p_y / K
        let slope = point.py / flow.params().mass;
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        delta -= point.y / slope;
        point = flow.advance_f64(&start, delta);
    }
    if point.y.abs() < 1e-10 {
        Ok((delta, point))
    } else {
        Err(GcmError::CrossingRefinement { residual: point.y.abs() })
    }
}

/// Upward crossing test: `y` goes from negative to non-negative.
pub(crate) fn crosses_upward(prev: &FixedState, next: &FixedState) -> bool {
    prev.q[1] < 0 && next.q[1] >= 0
}

/// Integrates for `duration > 0`, recording up to `max_crossings` section crossings.
///
/// Fails if the energy drift exceeds the configured tolerance.
pub fn integrate(
    params: &ModelParams,
    p0: &PhasePoint,
    duration: f64,
    max_crossings: usize,
    settings: &IntegratorSettings,
) -> Result<TrajectoryRecord> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(GcmError::InvalidParameter(format!("duration must be > 0, got {duration}")));
    }
    if !p0.is_finite() {
        return Err(GcmError::InvalidParameter("initial phase point must be finite".into()));
    }
    let energy = hamiltonian_classical(params, p0);
    let flow = Flow::new(params, settings, energy)?;
    let (_, h) = flow.plan(duration);
    let mut crossings = Vec::new();
    let mut failure = None;
    let summary = flow.run(p0, duration, |t, prev, next| {
        if crosses_upward(prev, next) {
            match refine_crossing(&flow, prev, next, h) {
                Ok((delta, c)) if c.py > 0.0 => crossings.push(Crossing {
                    time: t - h + delta,
                    x: c.x,
                    px: c.px,
                    energy: hamiltonian_classical(params, &c),
                }),
                Ok(_) => {}
                Err(e) => {
                    failure = Some(e);
                    return ControlFlow::Break(());
                }
            }
            if max_crossings > 0 && crossings.len() >= max_crossings {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if summary.max_drift > settings.drift_tolerance {
        return Err(GcmError::EnergyDrift { drift: summary.max_drift, tolerance: settings.drift_tolerance });
    }
    Ok(TrajectoryRecord {
        initial: *p0,
        energy,
        final_point: summary.final_point,
        duration: summary.steps as f64 * h,
        max_drift: summary.max_drift,
        crossings,
        sali_final: None,
        l2_average: None,
    })
}

/// Evolves for a signed duration without bookkeeping; negative durations run backwards.
pub fn evolve(params: &ModelParams, p0: &PhasePoint, duration: f64, settings: &IntegratorSettings) -> Result<RunSummary> {
    let energy = hamiltonian_classical(params, p0);
    let flow = Flow::new(params, settings, energy)?;
    flow.run(p0, duration, |_, _, _| ControlFlow::Continue(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hamiltonian_examples() {
        for b in [0.0, 0.24, 0.62] {
            assert_eq!(hamiltonian_classical(&ModelParams::new(b, 0.1), &PhasePoint::at_rest(0.0, 0.0)), 0.0);
        }
        let p = ModelParams::new(2.0 / 3.0, 0.1);
        let e = hamiltonian_classical(&p, &PhasePoint::at_rest((PI / 3.0).cos(), (PI / 3.0).sin()));
        assert!((e + 2.0 / 3.0).abs() < 1e-14);
        let q = PhasePoint { x: 0.3, y: -0.2, px: 0.7, py: -0.4 };
        assert_eq!(hamiltonian_classical(&p, &q), hamiltonian_classical(&p, &q.reversed()));
    }

    #[test]
    fn crossings_lie_on_the_section() {
        let p = ModelParams::new(0.62, 0.1);
        let p0 = PhasePoint { x: 0.2, y: 0.0, px: 0.1, py: 0.6 };
        let rec = integrate(&p, &p0, 200.0, 0, &IntegratorSettings::default()).unwrap();
        assert!(rec.crossings.len() > 10);
        for c in &rec.crossings {
            assert!(relative_drift(c.energy, rec.energy) < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_duration() {
        let p = ModelParams::new(0.62, 0.1);
        assert!(integrate(&p, &PhasePoint::at_rest(0.1, 0.0), -1.0, 0, &IntegratorSettings::default()).is_err());
    }
}
