//! Operator assembly shared by the 2D and 5D oscillator bases.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GcmError, Result};
use crate::model::ModelParams;
use crate::radial::{RadialLabel, RadialTable};

/// Which operator to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    /// `T + Aβ² + Cβ⁴`
    H0,
    /// `β³ cos 3γ`
    #[serde(rename = "Hprime", alias = "hprime", alias = "HPrime")]
    HPrime,
    /// `H0 + B·H'`
    H,
    /// Squared angular momentum (O(2) or O(5) Casimir).
    L2,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::H0 => "H0",
            Operator::HPrime => "Hprime",
            Operator::H => "H",
            Operator::L2 => "L2",
        }
    }
}

impl std::str::FromStr for Operator {
    type Err = GcmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h0" => Ok(Operator::H0),
            "hprime" | "h'" => Ok(Operator::HPrime),
            "h" => Ok(Operator::H),
            "l2" => Ok(Operator::L2),
            _ => Err(GcmError::InvalidParameter(format!("unknown operator '{s}'"))),
        }
    }
}

/// One basis state seen by the assembler.
pub(crate) struct Site {
    pub radial: RadialLabel,
    /// angular index: m in 2D, l in 5D
    pub angular: u32,
}

pub(crate) struct Scheme<'a, C, L>
where
    C: Fn(u32, u32) -> f64 + Sync,
    L: Fn(u32) -> f64 + Sync,
{
    pub sites: &'a [Site],
    pub length: f64,
    /// `⟨angular|cos 3γ|angular'⟩`
    pub coupling: C,
    /// `L²/ħ²` eigenvalue of an angular index
    pub casimir: L,
}

impl<C, L> Scheme<'_, C, L>
where
    C: Fn(u32, u32) -> f64 + Sync,
    L: Fn(u32) -> f64 + Sync,
{
    pub(crate) fn assemble(&self, params: &ModelParams, which: Operator) -> Result<Mat<f64>> {
        params.validate()?;
        let dim = self.sites.len();
        if dim == 0 {
            return Err(GcmError::InvalidParameter("basis is empty".into()));
        }
        if which == Operator::L2 {
            let hb2 = params.hbar * params.hbar;
            return Ok(Mat::from_fn(dim, dim, |i, j| {
                if i == j {
                    hb2 * (self.casimir)(self.sites[i].angular)
                } else {
                    0.0
                }
            }));
        }

        let labels: Vec<RadialLabel> = self.sites.iter().map(|s| s.radial).collect();
        let table = RadialTable::new(&labels, 4)?;
        let b = self.length;
        let kinetic = params.hbar * params.hbar / (params.mass * b * b);
        let (want_h0, want_hp) = match which {
            Operator::H0 => (1.0, 0.0),
            Operator::HPrime => (0.0, 1.0),
            Operator::H => (1.0, params.b),
            Operator::L2 => unreachable!(),
        };

        let rows: Vec<Vec<f64>> = (0..dim)
            .into_par_iter()
            .map(|i| {
                let si = &self.sites[i];
                (i..dim)
                    .map(|j| {
                        let sj = &self.sites[j];
                        let mut v = 0.0;
                        if want_h0 != 0.0 && si.angular == sj.angular {
                            let r2 = table.moment(&labels, i, j, 2);
                            let r4 = table.moment(&labels, i, j, 4);
                            // T = H_osc − (K ω²/2) β², with H_osc = ħω(2n + a + 1)
                            let mut t = -0.5 * kinetic * r2;
                            if i == j {
                                t += kinetic * (2.0 * si.radial.n as f64 + si.radial.a + 1.0);
                            }
                            v += want_h0 * (t + params.a * b * b * r2 + params.c * b.powi(4) * r4);
                        }
                        if want_hp != 0.0 {
                            let ang = (self.coupling)(si.angular, sj.angular);
                            if ang != 0.0 {
                                v += want_hp * ang * b.powi(3) * table.moment(&labels, i, j, 3);
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();

        let mut m = Mat::<f64>::zeros(dim, dim);
        for (i, row) in rows.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let j = i + off;
                if !v.is_finite() {
                    return Err(GcmError::NonFiniteEntry { row: i, col: j });
                }
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }
}
