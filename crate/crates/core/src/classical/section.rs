//! Sampling of the `y = 0`, `p_y > 0` section and Poincaré maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::integrator::IntegratorSettings;
use super::{integrate, PhasePoint, TrajectoryRecord};
use crate::error::{GcmError, Result};
use crate::model::{self, ModelParams};

/// Independent random stream for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Accessible part of the section at fixed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionSampler {
    params: ModelParams,
    pub energy: f64,
    pub x_range: (f64, f64),
    pub px_max: f64,
}

impl SectionSampler {
    pub fn new(params: &ModelParams, energy: f64) -> Result<Self> {
        params.validate()?;
        let minimum = model::global_minimum(params)?.energy;
        let x_range = model::axis_interval(params, energy);
        match x_range {
            Some((lo, hi)) if hi > lo && energy > minimum => Ok(Self {
                params: *params,
                energy,
                x_range: (lo, hi),
                px_max: (2.0 * params.mass * (energy - minimum)).sqrt(),
            }),
            _ => Err(GcmError::EnergyBelowMinimum { energy, minimum }),
        }
    }

    /// `p_x² ≤ 2K(E − V(x, 0))`, strictly inside so that `p_y > 0`.
    pub fn accessible(&self, x: f64, px: f64) -> bool {
        2.0 * self.params.mass * (self.energy - self.params.potential_on_axis(x)) - px * px > 0.0
    }

    /// Phase point with `p_y > 0` fixed by energy, if `(x, p_x)` is accessible.
    pub fn point(&self, x: f64, px: f64) -> Option<PhasePoint> {
        let py2 = 2.0 * self.params.mass * (self.energy - self.params.potential_on_axis(x)) - px * px;
        (py2 > 0.0).then(|| PhasePoint { x, y: 0.0, px, py: py2.sqrt() })
    }

    /// Uniform point of the accessible section area, by rejection.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> PhasePoint {
        loop {
            let x = rng.random_range(self.x_range.0..self.x_range.1);
            let px = rng.random_range(-self.px_max..self.px_max);
            if let Some(p) = self.point(x, px) {
                return p;
            }
        }
    }

    /// `∫ 2 √(2K(E − V(x, 0)))₊ dx`
    pub fn area(&self) -> f64 {
        let steps = 20_000;
        let h = (self.x_range.1 - self.x_range.0) / steps as f64;
        (0..steps)
            .map(|i| {
                let x = self.x_range.0 + (i as f64 + 0.5) * h;
                let w = 2.0 * self.params.mass * (self.energy - self.params.potential_on_axis(x));
                if w > 0.0 {
                    2.0 * w.sqrt() * h
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// `n_traj` random section points, each followed until `n_crossings` upward crossings
/// (or until `max_duration`).
pub fn poincare_section(
    params: &ModelParams,
    energy: f64,
    n_traj: usize,
    n_crossings: usize,
    max_duration: f64,
    seed: u64,
    integrator: &IntegratorSettings,
) -> Result<Vec<TrajectoryRecord>> {
    if n_crossings == 0 {
        return Err(GcmError::InvalidParameter("need at least one crossing per trajectory".into()));
    }
    let sampler = SectionSampler::new(params, energy)?;
    (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let p0 = sampler.sample(&mut sample_rng(seed, i as u64));
            integrate(params, &p0, max_duration, n_crossings, integrator)
        })
        .collect()
}
