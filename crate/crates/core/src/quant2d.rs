//! Quantization in the `(β, γ)` plane.
//!
//! Basis functions are 2D oscillator states `R_{n,3m}(β) Θ_m(γ)` with
//! `Θ_0 = 1/√(2π)`, `Θ_m = cos(3mγ)/√π` (even) or `sin(3mγ)/√π` (odd).
//! Only angular momenta that are multiples of 3 respect the `2π/3` symmetry.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::{Operator, Scheme, Site};
use crate::error::{GcmError, Result};
use crate::model::ModelParams;
use crate::radial::{self, RadialLabel};

/// Symmetry under `γ → −γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState2D {
    pub n: u32,
    /// angular index; the physical angular momentum is `3m`
    pub m: u32,
    pub parity: Parity,
}

impl BasisState2D {
    pub fn angular_momentum(&self) -> u32 {
        3 * self.m
    }

    pub fn shell(&self) -> u32 {
        2 * self.n + 3 * self.m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis2D {
    pub states: Vec<BasisState2D>,
    pub n_max: u32,
    pub parity: Parity,
    /// oscillator length `b`
    pub length: f64,
}

impl Basis2D {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub(crate) fn sites(&self) -> Vec<Site> {
        self.states
            .iter()
            .map(|s| Site {
                radial: RadialLabel { n: s.n, a: 3.0 * s.m as f64 },
                angular: s.m,
            })
            .collect()
    }
}

/// All states with `2n + 3m ≤ n_max`, ordered by `(2n + 3m, m, n)`.
pub fn enumerate_basis_2d(n_max: u32, parity: Parity, length: f64) -> Result<Basis2D> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(GcmError::InvalidParameter(format!("oscillator length must be > 0, got {length}")));
    }
    let m_min = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let mut states = Vec::new();
    for m in m_min..=n_max / 3 {
        for n in 0..=(n_max - 3 * m) / 2 {
            states.push(BasisState2D { n, m, parity });
        }
    }
    states.sort_by_key(|s| (s.shell(), s.m, s.n));
    Ok(Basis2D { states, n_max, parity, length })
}

/// `∫₀^∞ R_{n,μ}(β) β^k R_{n',μ'}(β) β dβ` for oscillator length `b`.
pub fn radial_moment_2d(n: u32, mu: u32, n2: u32, mu2: u32, k: i32, b: f64) -> Result<f64> {
    if k < 0 {
        return Err(GcmError::InvalidParameter(format!("moment power must be >= 0, got {k}")));
    }
    let l = RadialLabel { n, a: mu as f64 };
    let r = RadialLabel { n: n2, a: mu2 as f64 };
    Ok(b.powi(k) * radial::moment(l, r, k as u32)?)
}

/// `⟨Θ_m| cos 3γ |Θ_{m'}⟩`.
pub fn angular_coupling_2d(m: u32, m2: u32, parity: Parity) -> f64 {
    if m.abs_diff(m2) != 1 {
        return 0.0;
    }
    match parity {
        Parity::Even if m.min(m2) == 0 => FRAC_1_SQRT_2,
        _ => 0.5,
    }
}

/// Value of the normalized angular function `Θ_m(γ)`.
pub fn angular_function_2d(m: u32, parity: Parity, gamma: f64) -> f64 {
    match (parity, m) {
        (Parity::Even, 0) => 1.0 / (2.0 * PI).sqrt(),
        (Parity::Even, _) => (3.0 * m as f64 * gamma).cos() / PI.sqrt(),
        (Parity::Odd, _) => (3.0 * m as f64 * gamma).sin() / PI.sqrt(),
    }
}

pub fn assemble_matrix_2d(params: &ModelParams, basis: &Basis2D, which: Operator) -> Result<Mat<f64>> {
    let sites = basis.sites();
    let parity = basis.parity;
    Scheme {
        sites: &sites,
        length: basis.length,
        coupling: move |m, m2| angular_coupling_2d(m, m2, parity),
        casimir: |m| (9 * m * m) as f64,
    }
    .assemble(params, which)
}
