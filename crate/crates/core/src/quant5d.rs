//! Five-dimensional quantization restricted to zero angular momentum.
//!
//! With `u = cos 3γ` the O(5) Casimir acting on `J = 0` functions becomes
//! `−9 ħ² d/du (1 − u²) d/du`, so the angular eigenfunctions are Legendre
//! polynomials `P_l(cos 3γ)` with seniority `v = 3l` and eigenvalue
//! `ħ² v(v+3)`. Radial functions carry the `β⁴ dβ` measure and use the
//! Laguerre index `v + 3/2`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::{Operator, Scheme, Site};
use crate::error::{GcmError, Result};
use crate::model::ModelParams;
use crate::radial::{self, RadialLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState5D {
    pub n: u32,
    /// seniority, a multiple of 3
    pub v: u32,
}

impl BasisState5D {
    pub fn legendre_degree(&self) -> u32 {
        self.v / 3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis5D {
    pub states: Vec<BasisState5D>,
    pub n_max: u32,
    pub length: f64,
}

impl Basis5D {
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
                radial: RadialLabel { n: s.n, a: s.v as f64 + 1.5 },
                angular: s.legendre_degree(),
            })
            .collect()
    }
}

/// All `(n, v = 3l)` with `2n + v ≤ n_max`, ordered by `(2n + v, v, n)`.
pub fn enumerate_basis_5d(n_max: u32, length: f64) -> Result<Basis5D> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(GcmError::InvalidParameter(format!("oscillator length must be > 0, got {length}")));
    }
    let mut states = Vec::new();
    for l in 0..=n_max / 3 {
        let v = 3 * l;
        for n in 0..=(n_max - v) / 2 {
            states.push(BasisState5D { n, v });
        }
    }
    states.sort_by_key(|s| (2 * s.n + s.v, s.v, s.n));
    Ok(Basis5D { states, n_max, length })
}

/// `∫₀^∞ R_{n,v}(β) β^k R_{n',v'}(β) β⁴ dβ` for oscillator length `b`.
pub fn radial_moment_5d(n: u32, v: u32, n2: u32, v2: u32, k: i32, b: f64) -> Result<f64> {
    if k < 0 {
        return Err(GcmError::InvalidParameter(format!("moment power must be >= 0, got {k}")));
    }
    let l = RadialLabel { n, a: v as f64 + 1.5 };
    let r = RadialLabel { n: n2, a: v2 as f64 + 1.5 };
    Ok(b.powi(k) * radial::moment(l, r, k as u32)?)
}

/// `⟨P̂_l| u |P̂_{l'}⟩` for Legendre polynomials normalized on `[−1, 1]`.
pub fn legendre_coupling(l: u32, l2: u32) -> f64 {
    if l.abs_diff(l2) != 1 {
        return 0.0;
    }
    let k = l.min(l2) as f64;
    (k + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 3.0)).sqrt()
}

/// Normalized Legendre polynomial `√((2l+1)/2) P_l(u)`.
pub fn normalized_legendre(l: u32, u: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, u);
    let value = match l {
        0 => 1.0,
        1 => u,
        _ => {
            for k in 1..l {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * u * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    };
    value * ((2.0 * l as f64 + 1.0) / 2.0).sqrt()
}

pub fn assemble_matrix_5d(params: &ModelParams, basis: &Basis5D, which: Operator) -> Result<Mat<f64>> {
    let sites = basis.sites();
    Scheme {
        sites: &sites,
        length: basis.length,
        coupling: legendre_coupling,
        casimir: |l| {
            let v = 3 * l;
            (v * (v + 3)) as f64
        },
    }
    .assemble(params, which)
}
