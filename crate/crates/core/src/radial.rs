//! Oscillator radial functions and Gauss–Laguerre quadrature.
//!
//! Both quantization schemes use radial functions of the form
//! `x^{a/2} e^{-x/2} L_n^a(x)` in `x = (β/b)²`, normalized so that
//! `∫₀^∞ u_n^a(x)² dx = 1`. For the 2D scheme `a = μ`, for the 5D scheme
//! `a = v + 3/2`. Radial moments `⟨β^k⟩` then reduce to
//! `b^k ∫ u_n^a u_{n'}^{a'} x^{k/2} dx`, which is a polynomial times
//! `x^α e^{-x}` with `α ∈ {0, 1/2}` and is integrated exactly by a Gauss rule.

use faer::{Mat, Side};

use crate::error::{GcmError, Result};

/// Largest rule we build; beyond this the leading function underflows.
pub const MAX_RULE_SIZE: usize = 340;

/// Orthonormal Laguerre functions `u_0..u_{count-1}` at `x`, each multiplied by `x^{-shift}`.
///
/// `shift` must not exceed `a/2`.
pub fn laguerre_functions(x: f64, a: f64, shift: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let power = 0.5 * a - shift;
    let log_norm = -0.5 * libm::lgamma(a + 1.0);
    let first = if x == 0.0 {
        if power == 0.0 {
            log_norm.exp()
        } else {
            0.0
        }
    } else {
        (-0.5 * x + power * x.ln() + log_norm).exp()
    };
    out.push(first);
    if count == 1 {
        return out;
    }
    let mut prev = 0.0;
    let mut cur = first;
    for n in 0..count - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + a + 1.0 - x) * cur - (nf * (nf + a)).sqrt() * prev)
            / ((nf + 1.0) * (nf + a + 1.0)).sqrt();
        out.push(next);
        prev = cur;
        cur = next;
    }
    out
}

/// Gauss rule for the weight `x^α e^{-x}` on `[0, ∞)`.
///
/// Weights are stored multiplied by `x^α e^{x}`: `Σ w_i f(x_i)` integrates
/// `f(x) = P(x) x^α e^{-x}` exactly for `deg P ≤ 2·size − 1`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(size: usize, alpha: f64) -> Result<Self> {
        if size == 0 || size > MAX_RULE_SIZE {
            return Err(GcmError::InvalidParameter(format!(
                "Gauss-Laguerre rule size must be in 1..={MAX_RULE_SIZE}, got {size}"
            )));
        }
        if alpha <= -1.0 {
            return Err(GcmError::InvalidParameter(format!("alpha must be > -1, got {alpha}")));
        }
        let jacobi = Mat::<f64>::from_fn(size, size, |i, j| {
            if i == j {
                2.0 * i as f64 + alpha + 1.0
            } else if i.abs_diff(j) == 1 {
                let k = i.min(j) as f64;
                ((k + 1.0) * (k + alpha + 1.0)).sqrt()
            } else {
                0.0
            }
        });
        let mut nodes = jacobi
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| GcmError::Eigensolver { dimension: size, max_entry: 4.0 * size as f64 })?;

        let q = size as f64;
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let u = laguerre_functions(*x, alpha, 0.0, size + 1);
                let denom = q * u[size] - (q * (q + alpha)).sqrt() * u[size - 1];
                if denom == 0.0 {
                    break;
                }
                let step = *x * u[size] / denom;
                if !step.is_finite() {
                    break;
                }
                *x -= step;
            }
        }
        let weights = nodes
            .iter()
            .map(|&x| {
                let u = laguerre_functions(x, alpha, 0.0, size);
                1.0 / u.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        Ok(Self { alpha, nodes, weights })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Radial label: node count `n` and Laguerre index `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLabel {
    pub n: u32,
    pub a: f64,
}

/// Degree of the polynomial part of `u u' x^{k/2}` relative to `x^α e^{-x}`.
fn polynomial_degree(l: RadialLabel, r: RadialLabel, k: u32) -> usize {
    let s = 0.5 * (l.a + r.a + k as f64);
    (l.n + r.n) as usize + s.floor() as usize
}

/// `α ∈ {0, 1/2}` absorbing the fractional power of the integrand.
fn rule_alpha(l: RadialLabel, r: RadialLabel, k: u32) -> f64 {
    let s = 0.5 * (l.a + r.a + k as f64);
    let frac = s - s.floor();
    if frac < 0.25 {
        0.0
    } else {
        0.5
    }
}

/// Node count used for a matrix element: `n + n' + (a + a' + k)/2 + 2`.
pub fn node_count(l: RadialLabel, r: RadialLabel, k: u32) -> usize {
    let s = 0.5 * (l.a + r.a + k as f64);
    (l.n + r.n) as usize + s.ceil() as usize + 2
}

/// `∫ u_n^a u_{n'}^{a'} x^{k/2} dx` with a freshly built rule of `nodes` points.
pub fn moment_with_nodes(l: RadialLabel, r: RadialLabel, k: u32, nodes: usize) -> Result<f64> {
    let alpha = rule_alpha(l, r, k);
    let rule = GaussLaguerre::new(nodes, alpha)?;
    debug_assert!(2 * nodes > polynomial_degree(l, r, k));
    Ok(rule.integrate(|x| {
        let ul = laguerre_functions(x, l.a, 0.0, l.n as usize + 1)[l.n as usize];
        let ur = laguerre_functions(x, r.a, 0.0, r.n as usize + 1)[r.n as usize];
        ul * ur * x.powf(0.5 * k as f64)
    }))
}

/// Dimensionless radial moment with the default node count.
pub fn moment(l: RadialLabel, r: RadialLabel, k: u32) -> Result<f64> {
    moment_with_nodes(l, r, k, node_count(l, r, k))
}

/// Radial functions tabulated on both Gauss rules for a fixed set of labels.
///
/// Used by matrix assembly, where the same functions enter many elements.
pub(crate) struct RadialTable {
    rules: [GaussLaguerre; 2],
    // values[rule][label][node]
    values: [Vec<Vec<f64>>; 2],
}

impl RadialTable {
    pub(crate) fn new(labels: &[RadialLabel], max_k: u32) -> Result<Self> {
        let max_n = labels.iter().map(|l| l.n).max().unwrap_or(0);
        let max_a = labels.iter().map(|l| l.a).fold(0.0, f64::max);
        let widest = RadialLabel { n: max_n, a: max_a };
        let size = node_count(widest, widest, max_k);
        let rules = [GaussLaguerre::new(size, 0.0)?, GaussLaguerre::new(size, 0.5)?];

        // group labels by Laguerre index so each recurrence runs once per node
        let mut by_index: Vec<(f64, u32)> = Vec::new();
        for l in labels {
            match by_index.iter_mut().find(|(a, _)| *a == l.a) {
                Some(entry) => entry.1 = entry.1.max(l.n),
                None => by_index.push((l.a, l.n)),
            }
        }
        let values = [0, 1].map(|ri| {
            let rule = &rules[ri];
            let per_index: Vec<(f64, Vec<Vec<f64>>)> = by_index
                .iter()
                .map(|&(a, nmax)| {
                    let cols = rule
                        .nodes
                        .iter()
                        .map(|&x| laguerre_functions(x, a, 0.0, nmax as usize + 1))
                        .collect();
                    (a, cols)
                })
                .collect();
            labels
                .iter()
                .map(|l| {
                    let cols = &per_index.iter().find(|(a, _)| *a == l.a).expect("indexed").1;
                    cols.iter().map(|c| c[l.n as usize]).collect()
                })
                .collect()
        });
        Ok(Self { rules, values })
    }

    /// `∫ u_i u_j x^{k/2} dx` for labels at positions `i`, `j` of the table.
    pub(crate) fn moment(&self, labels: &[RadialLabel], i: usize, j: usize, k: u32) -> f64 {
        let ri = if rule_alpha(labels[i], labels[j], k) == 0.0 { 0 } else { 1 };
        let rule = &self.rules[ri];
        let (vi, vj) = (&self.values[ri][i], &self.values[ri][j]);
        let half = 0.5 * k as f64;
        let mut acc = 0.0;
        for q in 0..rule.nodes.len() {
            let xk = match k {
                0 => 1.0,
                2 => rule.nodes[q],
                4 => rule.nodes[q] * rule.nodes[q],
                _ => rule.nodes[q].powf(half),
            };
            acc += rule.weights[q] * vi[q] * vj[q] * xk;
        }
        acc
    }
}
