//! Classical Peres averages of `L²`, regular fractions and section maps.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrator::{Flow, IntegratorSettings};
use super::sali::{sali, Regularity, SaliSettings};
use super::section::{sample_rng, SectionSampler};
use super::{hamiltonian_classical, PhasePoint};
use crate::error::{GcmError, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct L2Settings {
    pub t_max: f64,
    /// earliest time at which convergence is tested
    pub t_min: f64,
    /// relative change allowed over the trailing window
    pub tolerance: f64,
    /// trailing fraction of the elapsed time that must be flat
    pub window: f64,
}

impl Default for L2Settings {
    fn default() -> Self {
        Self {
            t_max: 1e4,
            t_min: 100.0,
            tolerance: 1e-3,
            window: 0.2,
        }
    }
}

impl L2Settings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.t_max > 0.0
            && self.t_max.is_finite()
            && self.t_min >= 1.0
            && self.tolerance > 0.0
            && self.window > 0.0
            && self.window < 1.0;
        if !ok {
            return Err(GcmError::InvalidParameter(format!("bad L2 averaging settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Average {
    pub value: f64,
    pub converged: bool,
    pub time: f64,
}

/// Running time average of `(x p_y − y p_x)²`, stopped once it is flat over the trailing window.
pub fn classical_peres_average(
    params: &ModelParams,
    p0: &PhasePoint,
    settings: &L2Settings,
    integrator: &IntegratorSettings,
) -> Result<L2Average> {
    settings.validate()?;
    let energy = hamiltonian_classical(params, p0);
    let flow = Flow::new(params, integrator, energy)?;
    let (_, h) = flow.plan(settings.t_max);
    let l2 = |p: &PhasePoint| p.angular_momentum().powi(2);

    let mut previous = l2(p0);
    let mut integral = 0.0;
    // running averages at t = 1, 2, ...
    let mut marks: Vec<f64> = Vec::new();
    let mut checked = 0;
    let mut converged = false;
    let mut elapsed = 0.0;
    let summary = flow.run(p0, settings.t_max, |t, _, next| {
        let current = l2(&flow.to_point(next));
        integral += 0.5 * h * (previous + current);
        previous = current;
        elapsed = t;
        while (marks.len() + 1) as f64 <= t {
            marks.push(integral / t);
        }
        let now = marks.len();
        if now > checked && now as f64 >= settings.t_min {
            checked = now;
            let stride = (now / 200).max(1);
            if now % stride == 0 {
                let avg = integral / t;
                let from = ((1.0 - settings.window) * now as f64).ceil() as usize;
                let spread = marks[from.max(1) - 1..].iter().fold(0.0f64, |m, a| m.max((a - avg).abs()));
                if spread <= settings.tolerance * avg.abs() + 1e-12 {
                    converged = true;
                    return ControlFlow::Break(());
                }
            }
        }
        ControlFlow::Continue(())
    })?;
    if summary.max_drift > integrator.drift_tolerance {
        return Err(GcmError::EnergyDrift { drift: summary.max_drift, tolerance: integrator.drift_tolerance });
    }
    Ok(L2Average { value: integral / elapsed, converged, time: elapsed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularFraction {
    pub energy: f64,
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    pub n_regular: usize,
}

/// Fraction of section-uniform initial conditions classified regular by SALI.
pub fn freg(
    params: &ModelParams,
    energy: f64,
    n_samples: usize,
    seed: u64,
    sali_settings: &SaliSettings,
    integrator: &IntegratorSettings,
) -> Result<RegularFraction> {
    if n_samples == 0 {
        return Err(GcmError::InvalidParameter("need at least one sample".into()));
    }
    let sampler = SectionSampler::new(params, energy)?;
    if sampler.area() <= 0.0 {
        return Err(GcmError::InvalidParameter(format!("section at E = {energy} has zero area")));
    }
    let regular: Vec<bool> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let p0 = sampler.sample(&mut sample_rng(seed, i as u64));
            sali(params, &p0, sali_settings, integrator).map(|o| o.regularity == Regularity::Regular)
        })
        .collect::<Result<_>>()?;
    let n_regular = regular.iter().filter(|r| **r).count();
    let value = n_regular as f64 / n_samples as f64;
    Ok(RegularFraction {
        energy,
        value,
        stderr: (value * (1.0 - value) / n_samples as f64).sqrt(),
        n: n_samples,
        n_regular,
    })
}

/// Rectangle of the `(x, p_x)` section with a cell-centred mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub x_range: [f64; 2],
    pub px_range: [f64; 2],
    pub nx: usize,
    pub npx: usize,
}

impl Mesh {
    /// Bounding rectangle of the accessible section.
    pub fn covering(params: &ModelParams, energy: f64, nx: usize, npx: usize) -> Result<Self> {
        let s = SectionSampler::new(params, energy)?;
        Ok(Self { x_range: [s.x_range.0, s.x_range.1], px_range: [-s.px_max, s.px_max], nx, npx })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_range[0] + (i as f64 + 0.5) * (self.x_range[1] - self.x_range[0]) / self.nx as f64
    }

    pub fn px(&self, j: usize) -> f64 {
        self.px_range[0] + (j as f64 + 0.5) * (self.px_range[1] - self.px_range[0]) / self.npx as f64
    }

    pub fn area(&self) -> f64 {
        (self.x_range[1] - self.x_range[0]) * (self.px_range[1] - self.px_range[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionMap {
    pub energy: f64,
    pub mesh: Mesh,
    /// row-major in `p_x`, `values[j * nx + i]`; NaN where masked
    pub values: Vec<f64>,
    pub accessible: Vec<bool>,
    pub converged: Vec<bool>,
}

impl SectionMap {
    pub fn masked_fraction(&self) -> f64 {
        self.accessible.iter().filter(|a| !**a).count() as f64 / self.accessible.len() as f64
    }
}

pub fn l2_section_map(
    params: &ModelParams,
    energy: f64,
    mesh: &Mesh,
    settings: &L2Settings,
    integrator: &IntegratorSettings,
) -> Result<SectionMap> {
    if mesh.nx == 0 || mesh.npx == 0 {
        return Err(GcmError::InvalidParameter("mesh needs at least one cell per axis".into()));
    }
    let sampler = SectionSampler::new(params, energy)?;
    let cells: Vec<Option<L2Average>> = (0..mesh.nx * mesh.npx)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % mesh.nx, k / mesh.nx);
            match sampler.point(mesh.x(i), mesh.px(j)) {
                Some(p0) => classical_peres_average(params, &p0, settings, integrator).map(Some),
                None => Ok(None),
            }
        })
        .collect::<Result<_>>()?;
    Ok(SectionMap {
        energy,
        mesh: *mesh,
        values: cells.iter().map(|c| c.map_or(f64::NAN, |a| a.value)).collect(),
        accessible: cells.iter().map(Option::is_some).collect(),
        converged: cells.iter().map(|c| c.is_some_and(|a| a.converged)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub b: f64,
    pub l2_min: f64,
    pub l2_max: f64,
    pub n_converged: usize,
    pub n_unconverged: usize,
}

/// Minimum and maximum converged `⟨L²⟩_c` over random section points, per parameter set.
///
/// Both are NaN when no sample converged.
pub fn l2_bounds(
    params_list: &[ModelParams],
    energy: f64,
    n_samples: usize,
    seed: u64,
    settings: &L2Settings,
    integrator: &IntegratorSettings,
) -> Result<Vec<BoundsRow>> {
    params_list
        .iter()
        .map(|params| {
            let sampler = SectionSampler::new(params, energy)?;
            let averages: Vec<L2Average> = (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let p0 = sampler.sample(&mut sample_rng(seed, i as u64));
                    classical_peres_average(params, &p0, settings, integrator)
                })
                .collect::<Result<_>>()?;
            let good: Vec<f64> = averages.iter().filter(|a| a.converged).map(|a| a.value).collect();
            let (l2_min, l2_max) = if good.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (good.iter().copied().fold(f64::INFINITY, f64::min), good.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            };
            Ok(BoundsRow {
                b: params.b,
                l2_min,
                l2_max,
                n_converged: good.len(),
                n_unconverged: n_samples - good.len(),
            })
        })
        .collect()
}
