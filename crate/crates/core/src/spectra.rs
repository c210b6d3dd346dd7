//! Diagonalization, Peres lattices and wave-function densities.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::Operator;
use crate::error::{GcmError, Result};
use crate::model::{self, ModelParams};
use crate::quant2d::{self, Basis2D, Parity};
use crate::quant5d::{self, Basis5D};
use crate::radial::laguerre_functions;

/// Levels moving less than this between `N_max` and `N_max − 10` count as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;
/// Shell offset of the comparison basis.
pub const CONVERGENCE_SHELL_STEP: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantization {
    #[serde(rename = "2d-even")]
    TwoDEven,
    #[serde(rename = "2d-odd")]
    TwoDOdd,
    #[serde(rename = "5d")]
    FiveD,
}

impl Quantization {
    pub fn name(self) -> &'static str {
        match self {
            Quantization::TwoDEven => "2d-even",
            Quantization::TwoDOdd => "2d-odd",
            Quantization::FiveD => "5d",
        }
    }
}

impl fmt::Display for Quantization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantization {
    type Err = GcmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2d-even" | "2d_even" | "even" => Ok(Quantization::TwoDEven),
            "2d-odd" | "2d_odd" | "odd" => Ok(Quantization::TwoDOdd),
            "5d" => Ok(Quantization::FiveD),
            _ => Err(GcmError::InvalidParameter(format!("unknown quantization '{s}'"))),
        }
    }
}

/// Oscillator basis of either scheme.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    TwoD(Basis2D),
    FiveD(Basis5D),
}

impl Basis {
    pub fn new(quantization: Quantization, n_max: u32, length: f64) -> Result<Self> {
        Ok(match quantization {
            Quantization::TwoDEven => Basis::TwoD(quant2d::enumerate_basis_2d(n_max, Parity::Even, length)?),
            Quantization::TwoDOdd => Basis::TwoD(quant2d::enumerate_basis_2d(n_max, Parity::Odd, length)?),
            Quantization::FiveD => Basis::FiveD(quant5d::enumerate_basis_5d(n_max, length)?),
        })
    }

    pub fn len(&self) -> usize {
        match self {
            Basis::TwoD(b) => b.len(),
            Basis::FiveD(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn length(&self) -> f64 {
        match self {
            Basis::TwoD(b) => b.length,
            Basis::FiveD(b) => b.length,
        }
    }

    pub fn assemble(&self, params: &ModelParams, which: Operator) -> Result<Mat<f64>> {
        match self {
            Basis::TwoD(b) => quant2d::assemble_matrix_2d(params, b, which),
            Basis::FiveD(b) => quant5d::assemble_matrix_5d(params, b, which),
        }
    }
}

/// Oscillator length `√(ħ/(K ω))` with `ω² = V''(β₀)/K` at the potential minimum.
///
/// On the `B = 0` ring this is the radial stiffness of the ring.
pub fn default_length(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let k = model::radial_stiffness(params)?;
    if k <= 0.0 {
        return Err(GcmError::StationaryPoint(format!("non-positive radial stiffness {k}")));
    }
    let omega = (k / params.mass).sqrt();
    Ok((params.hbar / (params.mass * omega)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisMeta {
    pub quantization: Quantization,
    pub n_max: u32,
    pub length: f64,
    pub params: ModelParams,
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    /// ascending
    pub energies: Vec<f64>,
    /// eigenvectors as columns, in basis order
    pub coeffs: Mat<f64>,
    pub meta: BasisMeta,
    pub basis: Basis,
    pub n_converged: usize,
}

impl EigenSolution {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn operator(&self, which: Operator) -> Result<Mat<f64>> {
        self.basis.assemble(&self.meta.params, which)
    }

    pub fn converged_energies(&self) -> &[f64] {
        &self.energies[..self.n_converged]
    }
}

/// Connected components of the nonzero pattern, each sorted, in order of first index.
fn blocks(h: &Mat<f64>) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in j + 1..n {
            if h[(i, j)] != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn max_abs(h: &Mat<f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            m = m.max(h[(i, j)].abs());
        }
    }
    m
}

/// Eigenvalues and, optionally, eigenvectors of a symmetric matrix.
///
/// The matrix is split into its decoupled blocks first, so exact symmetries
/// survive degeneracies. Eigenvectors are sign-fixed so that their largest
/// component is positive.
pub fn diagonalize(h: &Mat<f64>, vectors: bool) -> Result<(Vec<f64>, Option<Mat<f64>>)> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(GcmError::DimensionMismatch { expected: n.max(1), got: h.ncols() });
    }
    let fail = |sub: &Mat<f64>| GcmError::Eigensolver { dimension: sub.nrows(), max_entry: max_abs(sub) };
    let mut pairs: Vec<(f64, Option<Vec<(usize, f64)>>)> = Vec::with_capacity(n);
    for group in blocks(h) {
        let sub = Mat::from_fn(group.len(), group.len(), |i, j| h[(group[i], group[j])]);
        if vectors {
            let evd = sub.self_adjoint_eigen(Side::Lower).map_err(|_| fail(&sub))?;
            let (s, u) = (evd.S().column_vector(), evd.U());
            for k in 0..group.len() {
                let mut col: Vec<(usize, f64)> = (0..group.len()).map(|i| (group[i], u[(i, k)])).collect();
                let lead = col.iter().map(|c| c.1).fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
                if lead < 0.0 {
                    col.iter_mut().for_each(|c| c.1 = -c.1);
                }
                pairs.push((s[k], Some(col)));
            }
        } else {
            let values = sub.self_adjoint_eigenvalues(Side::Lower).map_err(|_| fail(&sub))?;
            pairs.extend(values.into_iter().map(|e| (e, None)));
        }
    }
    if pairs.iter().any(|p| !p.0.is_finite()) {
        return Err(fail(h));
    }
    pairs.sort_by(|l, r| l.0.total_cmp(&r.0));
    let energies = pairs.iter().map(|p| p.0).collect();
    let coeffs = vectors.then(|| {
        let mut c = Mat::<f64>::zeros(n, n);
        for (k, (_, col)) in pairs.iter().enumerate() {
            for &(i, v) in col.as_ref().expect("vectors requested") {
                c[(i, k)] = v;
            }
        }
        c
    });
    Ok((energies, coeffs))
}

/// Length of the leading run of levels that agree between two spectra.
pub fn converged_prefix(coarse: &[f64], fine: &[f64], tolerance: f64) -> usize {
    coarse
        .iter()
        .zip(fine)
        .take_while(|(c, f)| (*c - *f).abs() < tolerance)
        .count()
}

fn convergence_count(params: &ModelParams, quantization: Quantization, n_max: u32, length: f64, fine: &[f64]) -> Result<usize> {
    if n_max < CONVERGENCE_SHELL_STEP {
        return Ok(0);
    }
    let coarse_basis = Basis::new(quantization, n_max - CONVERGENCE_SHELL_STEP, length)?;
    let h = coarse_basis.assemble(params, Operator::H)?;
    let (coarse, _) = diagonalize(&h, false)?;
    Ok(converged_prefix(&coarse, fine, CONVERGENCE_TOLERANCE))
}

/// Full spectrum and eigenvectors of `H` in the chosen basis.
pub fn solve(params: &ModelParams, quantization: Quantization, n_max: u32, length: f64) -> Result<EigenSolution> {
    let basis = Basis::new(quantization, n_max, length)?;
    if basis.is_empty() {
        return Err(GcmError::InvalidParameter(format!("{quantization} basis with N_max = {n_max} is empty")));
    }
    let h = basis.assemble(params, Operator::H)?;
    let (energies, coeffs) = diagonalize(&h, true)?;
    let n_converged = convergence_count(params, quantization, n_max, length, &energies)?;
    Ok(EigenSolution {
        energies,
        coeffs: coeffs.expect("vectors requested"),
        meta: BasisMeta { quantization, n_max, length, params: *params },
        basis,
        n_converged,
    })
}

/// Energies only, with the converged count.
pub fn solve_energies(params: &ModelParams, quantization: Quantization, n_max: u32, length: f64) -> Result<(Vec<f64>, usize)> {
    let basis = Basis::new(quantization, n_max, length)?;
    if basis.is_empty() {
        return Err(GcmError::InvalidParameter(format!("{quantization} basis with N_max = {n_max} is empty")));
    }
    let h = basis.assemble(params, Operator::H)?;
    let (energies, _) = diagonalize(&h, false)?;
    let n_converged = convergence_count(params, quantization, n_max, length, &energies)?;
    Ok((energies, n_converged))
}

fn check_dimension(sol: &EigenSolution, observable: &Mat<f64>) -> Result<()> {
    let d = sol.dimension();
    if observable.nrows() != d || observable.ncols() != d {
        return Err(GcmError::DimensionMismatch { expected: d, got: observable.nrows() });
    }
    Ok(())
}

/// `⟨ψ_i|P|ψ_i⟩` for the first `count` eigenvectors, converged or not.
pub fn expectation_values(sol: &EigenSolution, observable: &Mat<f64>, count: usize) -> Result<Vec<f64>> {
    check_dimension(sol, observable)?;
    let count = count.min(sol.dimension());
    if count == 0 {
        return Ok(Vec::new());
    }
    let c = sol.coeffs.subcols(0, count);
    let pc = observable * c;
    Ok((0..count)
        .map(|k| (0..sol.dimension()).map(|i| c[(i, k)] * pc[(i, k)]).sum())
        .collect())
}

pub fn expectation(sol: &EigenSolution, observable: &Mat<f64>, level: usize) -> Result<f64> {
    if level >= sol.n_converged {
        return Err(GcmError::LevelNotConverged { index: level, n_converged: sol.n_converged });
    }
    check_dimension(sol, observable)?;
    let c = sol.coeffs.col(level);
    let pc = observable * c;
    Ok((0..sol.dimension()).map(|i| c[i] * pc[i]).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeRow {
    pub index: usize,
    pub energy: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeresLattice {
    pub operator: Operator,
    pub rows: Vec<LatticeRow>,
}

pub fn peres_lattice(sol: &EigenSolution, operator: Operator) -> Result<PeresLattice> {
    let p = sol.operator(operator)?;
    let values = expectation_values(sol, &p, sol.n_converged)?;
    let rows = values
        .into_iter()
        .enumerate()
        .map(|(index, value)| LatticeRow { index, energy: sol.energies[index], value })
        .collect();
    Ok(PeresLattice { operator, rows })
}

/// `max_i |⟨H'⟩_i − (E_i − ⟨H₀⟩_i)/B|` over converged levels.
pub fn check_identity_hprime(sol: &EigenSolution) -> Result<f64> {
    let b = sol.meta.params.b;
    if b == 0.0 {
        return Err(GcmError::InvalidParameter("the H' identity divides by B; B = 0 given".into()));
    }
    let h0 = peres_lattice(sol, Operator::H0)?;
    let hp = peres_lattice(sol, Operator::HPrime)?;
    Ok(h0
        .rows
        .iter()
        .zip(&hp.rows)
        .map(|(r0, rp)| (rp.value - (r0.energy - r0.value) / b).abs())
        .fold(0.0, f64::max))
}

/// Uniform cell-centred grid over a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[1] > r[0];
        if !ok(self.x_range) || !ok(self.y_range) || self.nx == 0 || self.ny == 0 {
            return Err(GcmError::InvalidParameter(format!("bad density grid {self:?}")));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_range[1] - self.x_range[0]) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_range[1] - self.y_range[0]) / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_range[0] + (i as f64 + 0.5) * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_range[0] + (j as f64 + 0.5) * self.dy()
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinates {
    /// `(x, y)`, density `|Ψ|²`
    Cartesian,
    /// `(β, γ)`, density `½ β⁴ |sin 3γ| |Ψ|²`
    Polar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub level: usize,
    pub energy: f64,
    pub grid: Grid,
    pub coordinates: Coordinates,
    /// row-major, `values[j * nx + i]` at `(x(i), y(j))`
    pub values: Vec<f64>,
    /// grid sum times cell area
    pub integral: f64,
}

impl DensityField {
    pub fn deficit(&self) -> f64 {
        1.0 - self.integral
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }
}

/// Grid covering the region where level `level` is classically allowed, with a tunnelling margin.
pub fn default_grid(sol: &EigenSolution, level: usize, resolution: usize) -> Result<Grid> {
    let energy = *sol
        .energies
        .get(level)
        .ok_or(GcmError::LevelNotConverged { index: level, n_converged: sol.n_converged })?;
    let p = &sol.meta.params;
    let margin_energy = energy + 1.0 + 20.0 * p.hbar;
    let reach = (0..64)
        .map(|k| k as f64 * TAU / 64.0)
        .flat_map(|g| model::accessible_domain(p, margin_energy, g))
        .map(|iv| iv.1)
        .fold(0.0, f64::max);
    Ok(match sol.meta.quantization {
        Quantization::FiveD => Grid { x_range: [0.0, reach], y_range: [0.0, TAU], nx: resolution, ny: resolution },
        _ => Grid { x_range: [-reach, reach], y_range: [-reach, reach], nx: resolution, ny: resolution },
    })
}

/// Squared wave function of a converged level sampled on a grid.
///
/// 2D levels are sampled in Cartesian `(x, y)`; 5D levels on a `(β, γ)` grid
/// with the volume weight folded in, so that both integrate to one.
pub fn wavefunction_density(sol: &EigenSolution, level: usize, grid: &Grid) -> Result<DensityField> {
    if level >= sol.n_converged {
        return Err(GcmError::LevelNotConverged { index: level, n_converged: sol.n_converged });
    }
    grid.validate()?;
    let b = sol.basis.length();
    let coeff: Vec<f64> = (0..sol.dimension()).map(|i| sol.coeffs[(i, level)]).collect();

    // (Laguerre index, angular label) per state
    let (labels, coordinates): (Vec<(f64, u32, u32)>, Coordinates) = match &sol.basis {
        Basis::TwoD(basis) => (basis.states.iter().map(|s| (3.0 * s.m as f64, s.n, s.m)).collect(), Coordinates::Cartesian),
        Basis::FiveD(basis) => (
            basis.states.iter().map(|s| (s.v as f64 + 1.5, s.n, s.legendre_degree())).collect(),
            Coordinates::Polar,
        ),
    };
    let mut angular_labels: Vec<u32> = labels.iter().map(|l| l.2).collect();
    angular_labels.sort_unstable();
    angular_labels.dedup();
    let max_n: Vec<u32> = angular_labels
        .iter()
        .map(|&m| labels.iter().filter(|l| l.2 == m).map(|l| l.1).max().unwrap_or(0))
        .collect();
    let slot = |m: u32| angular_labels.binary_search(&m).expect("label present");
    let parity = match &sol.basis {
        Basis::TwoD(basis) => Some(basis.parity),
        Basis::FiveD(_) => None,
    };

    let psi = |beta: f64, gamma: f64| -> f64 {
        let x = (beta / b).powi(2);
        let (shift, prefactor) = match parity {
            Some(_) => (0.0, 2f64.sqrt() / b),
            None => (0.75, (2.0 / b.powi(5)).sqrt()),
        };
        let radial: Vec<Vec<f64>> = angular_labels
            .iter()
            .zip(&max_n)
            .map(|(&m, &nm)| {
                let a = labels.iter().find(|l| l.2 == m).expect("label present").0;
                laguerre_functions(x, a, shift, nm as usize + 1)
            })
            .collect();
        let angular: Vec<f64> = angular_labels
            .iter()
            .map(|&m| match parity {
                Some(par) => quant2d::angular_function_2d(m, par, gamma),
                None => quant5d::normalized_legendre(m, (3.0 * gamma).cos()),
            })
            .collect();
        prefactor
            * labels
                .iter()
                .zip(&coeff)
                .map(|(&(_, n, m), &c)| {
                    let k = slot(m);
                    c * radial[k][n as usize] * angular[k]
                })
                .sum::<f64>()
    };

    let values: Vec<f64> = (0..grid.ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            let y = grid.y(j);
            (0..grid.nx).map(move |i| (grid.x(i), y)).collect::<Vec<_>>()
        })
        .map(|(x, y)| match coordinates {
            Coordinates::Cartesian => psi(x.hypot(y), y.atan2(x)).powi(2),
            Coordinates::Polar => 0.5 * x.powi(4) * (3.0 * y).sin().abs() * psi(x, y).powi(2),
        })
        .collect();
    let integral = values.iter().sum::<f64>() * grid.cell_area();
    Ok(DensityField {
        level,
        energy: sol.energies[level],
        grid: *grid,
        coordinates,
        values,
        integral,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_max: u32,
    pub level: usize,
    pub energy: f64,
}

/// Spectra for a ladder of truncations.
pub fn convergence_study(
    params: &ModelParams,
    quantization: Quantization,
    n_max_list: &[u32],
    length: f64,
) -> Result<Vec<ConvergenceRow>> {
    if n_max_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GcmError::InvalidParameter("N_max list must be strictly ascending".into()));
    }
    let mut rows = Vec::new();
    for &n_max in n_max_list {
        let basis = Basis::new(quantization, n_max, length)?;
        let (energies, _) = diagonalize(&basis.assemble(params, Operator::H)?, false)?;
        rows.extend(energies.into_iter().enumerate().map(|(level, energy)| ConvergenceRow { n_max, level, energy }));
    }
    Ok(rows)
}

/// Smallest `N_max` in the study from which `level` stays within `tolerance` of every later value.
pub fn stable_from(rows: &[ConvergenceRow], level: usize, tolerance: f64) -> Option<u32> {
    let track: Vec<(u32, f64)> = rows.iter().filter(|r| r.level == level).map(|r| (r.n_max, r.energy)).collect();
    let last = track.last()?.1;
    let mut first = None;
    for &(n_max, e) in track.iter().rev() {
        if (e - last).abs() < tolerance {
            first = Some(n_max);
        } else {
            break;
        }
    }
    if track.len() < 2 {
        return None;
    }
    first
}
