//! Sampled resonance curves and parameter sweeps.

use rayon::prelude::*;

use crate::doppler::DopplerParams;
use crate::error::{HanleError, Result};
use crate::gobe::{steady_state, SystemParams};
use crate::reduced::{analytic_pi_e, pi_e0, NormalizedParams, ReducedSystem};

/// Which solver produces π_e.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverPath {
    /// Full Bloch equations.
    Gobe,
    /// Low-saturation closed ground-state equations.
    Reduced,
    /// Closed-form 1 → 2 lineshape (Γ = 0 only).
    Analytic,
}

impl SolverPath {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gobe => "gobe",
            Self::Reduced => "reduced",
            Self::Analytic => "analytic",
        }
    }
}

impl std::str::FromStr for SolverPath {
    type Err = HanleError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gobe" => Ok(Self::Gobe),
            "reduced" => Ok(Self::Reduced),
            "analytic" => Ok(Self::Analytic),
            other => Err(HanleError::InvalidParams(format!(
                "unknown path '{other}' (expected gobe, reduced or analytic)"
            ))),
        }
    }
}

/// Post-processing applied to a scan.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Normalization {
    #[default]
    Raw,
    /// `(y - background) / (y(0) - background)`.
    BackgroundAndCenter { background: f64, center: f64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanMeta {
    pub params: Option<SystemParams>,
    pub doppler: Option<DopplerParams>,
    pub path: Option<SolverPath>,
    pub normalization: Normalization,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub omega_g_grid: Vec<f64>,
    pub signal: Vec<f64>,
    pub meta: ScanMeta,
}

impl ScanResult {
    pub fn new(omega_g_grid: Vec<f64>, signal: Vec<f64>, meta: ScanMeta) -> Result<Self> {
        if omega_g_grid.len() != signal.len() {
            return Err(HanleError::InvalidParams(format!(
                "grid has {} points but signal has {}",
                omega_g_grid.len(),
                signal.len()
            )));
        }
        check_increasing(&omega_g_grid)?;
        Ok(Self {
            omega_g_grid,
            signal,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        !matches!(self.meta.normalization, Normalization::Raw)
    }
}

pub(crate) fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(HanleError::InvalidParams("grid contains a non-finite value".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HanleError::InvalidParams("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|k| if k + 1 == count { stop } else { start + step * k as f64 })
                .collect()
        }
    }
}

/// π_e at one parameter point along the chosen path. With `relative` the
/// result is divided by π_e⁽⁰⁾.
pub fn evaluate(params: &SystemParams, path: SolverPath, relative: bool) -> Result<f64> {
    let value = match path {
        SolverPath::Gobe => steady_state(params)?.pi_e,
        SolverPath::Reduced => {
            ReducedSystem::new(params)?.pi_e(params.kappa, params.delta_v, params.gamma_eg, params.omega_g)?
        }
        SolverPath::Analytic => {
            check_analytic_geometry(params)?;
            let np = NormalizedParams::from_system(params)?;
            let ratio = analytic_pi_e(&np)?;
            return Ok(if relative { ratio } else { ratio * pi_e0(params) });
        }
    };
    Ok(if relative { value / pi_e0(params) } else { value })
}

fn check_analytic_geometry(p: &SystemParams) -> Result<()> {
    let is_one_two = p.fg.twice() == 2 && p.fe.twice() == 4;
    let along_k = (p.wave_frame.inverse() * p.b_direction - nalgebra::Vector3::z()).norm() < 1e-12;
    if !is_one_two || !along_k || p.beta != 1.0 {
        return Err(HanleError::UnsupportedRegime(
            "closed form covers only the closed 1 -> 2 transition with B along k".into(),
        ));
    }
    Ok(())
}

/// π_e over a grid of Ω_g at fixed other parameters, in grid order.
pub fn scan_omega(params: &SystemParams, path: SolverPath, grid: &[f64], relative: bool) -> Result<ScanResult> {
    check_increasing(grid)?;
    let signal: Result<Vec<f64>> = match path {
        SolverPath::Reduced => {
            let rs = ReducedSystem::new(params)?;
            let unit = if relative { pi_e0(params) } else { 1.0 };
            grid.par_iter()
                .map(|&o| {
                    rs.pi_e(params.kappa, params.delta_v, params.gamma_eg, o)
                        .map(|v| v / unit)
                        .map_err(|e| e.at(format!("Omega_g = {o}")))
                })
                .collect()
        }
        _ => grid
            .par_iter()
            .map(|&o| {
                let mut p = params.clone();
                p.omega_g = o;
                evaluate(&p, path, relative).map_err(|e| e.at(format!("Omega_g = {o}")))
            })
            .collect(),
    };
    ScanResult::new(
        grid.to_vec(),
        signal?,
        ScanMeta {
            params: Some(params.clone()),
            doppler: None,
            path: Some(path),
            normalization: Normalization::Raw,
        },
    )
}
