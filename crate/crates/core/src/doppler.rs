//! Maxwell velocity averaging
//!
//! ```text
//! ⟨f⟩ = (√π v̄)⁻¹ ∫ f(kv) exp{-(v/v̄)²} dv
//! ```
//!
//! written in terms of the Doppler shift `kv` and its scale `k·v̄`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};
use rayon::prelude::*;

use crate::error::{HanleError, Result};
use crate::gobe::SystemParams;
use crate::reduced::ReducedSystem;
use crate::scan::{check_increasing, Normalization, ScanMeta, ScanResult, SolverPath};

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const DEFAULT_QUADRATURE_ORDER: usize = 96;
/// The Gaussian is truncated at this many `k·v̄`.
pub const TRUNCATION: f64 = 9.0;
/// Ω_g (in units of γ_r) at which the background of a normalized scan is
/// sampled.
pub const BACKGROUND_FIELD: f64 = 1e5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Composite Gauss–Legendre on panels refined geometrically towards
    /// the resonance core, `quadrature_order` nodes per panel.
    #[default]
    GradedLegendre,
    /// Plain Gauss–Hermite with `quadrature_order` nodes.
    GaussHermite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DopplerParams {
    pub k_vbar: f64,
    pub quadrature_order: usize,
    pub rule: QuadratureRule,
    /// Doppler shift at which the integrand is sharpest. Defaults to 0, or
    /// to δ for [`averaged_scan`].
    pub core_center: Option<f64>,
    /// Width of that structure. Defaults to `k_vbar`, or to γ_eg for
    /// [`averaged_scan`].
    pub core_width: Option<f64>,
}

impl Default for DopplerParams {
    fn default() -> Self {
        Self::new(0.0)
    }
}

impl DopplerParams {
    pub fn new(k_vbar: f64) -> Self {
        Self {
            k_vbar,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
            rule: QuadratureRule::default(),
            core_center: None,
            core_width: None,
        }
    }

    /// `k·v̄` for wavenumber `k` [1/m], temperature [K] and atomic mass [kg],
    /// in rad/s.
    pub fn from_temperature(wavenumber: f64, temperature: f64, mass: f64) -> Result<Self> {
        if !(wavenumber >= 0.0 && temperature >= 0.0 && mass > 0.0) {
            return Err(HanleError::InvalidParams(
                "wavenumber and temperature must be non-negative, mass positive".into(),
            ));
        }
        let vbar = (2.0 * BOLTZMANN * temperature / mass).sqrt();
        Ok(Self::new(wavenumber * vbar))
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.quadrature_order = order;
        self
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_core(mut self, center: f64, width: f64) -> Self {
        self.core_center = Some(center);
        self.core_width = Some(width);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_vbar.is_finite() && self.k_vbar >= 0.0) {
            return Err(HanleError::InvalidParams(format!(
                "k_vbar = {} must be finite and non-negative",
                self.k_vbar
            )));
        }
        if self.quadrature_order == 0 {
            return Err(HanleError::InvalidParams("quadrature_order must be at least 1".into()));
        }
        for v in [self.core_center, self.core_width].into_iter().flatten() {
            if !v.is_finite() {
                return Err(HanleError::InvalidParams("core center/width must be finite".into()));
            }
        }
        Ok(())
    }

    /// Quadrature nodes `(kv, weight)` with weights summing to one.
    pub fn nodes(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        if self.k_vbar == 0.0 {
            return Ok(vec![(0.0, 1.0)]);
        }
        let order = NonZeroUsize::new(self.quadrature_order).expect("validated");
        let mut nodes = match self.rule {
            QuadratureRule::GaussHermite => GaussHermite::new(order)
                .as_node_weight_pairs()
                .iter()
                .map(|&(x, w)| (x * self.k_vbar, w))
                .collect::<Vec<_>>(),
            QuadratureRule::GradedLegendre => self.graded_nodes(order),
        };
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        for n in &mut nodes {
            n.1 /= total;
        }
        Ok(nodes)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let l = TRUNCATION * self.k_vbar;
        let c = self.core_center.unwrap_or(0.0);
        let h = match self.core_width {
            Some(h) if h > 0.0 => h,
            _ => self.k_vbar,
        };
        let mut pts = vec![-l, l];
        if c.abs() < l {
            pts.push(c);
        }
        let mut r = h;
        while r < 2.0 * l {
            for p in [c - r, c + r] {
                if p.abs() < l {
                    pts.push(p);
                }
            }
            r *= 4.0;
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn graded_nodes(&self, order: NonZeroUsize) -> Vec<(f64, f64)> {
        let rule = GaussLegendre::new(order);
        let norm = 1.0 / (PI.sqrt() * self.k_vbar);
        let mut out = Vec::new();
        for panel in self.breakpoints().windows(2) {
            let (a, b) = (panel[0], panel[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for &(x, w) in rule.as_node_weight_pairs() {
                let kv = mid + half * x;
                let g = (kv / self.k_vbar).powi(2);
                out.push((kv, w * half * norm * (-g).exp()));
            }
        }
        out
    }
}

/// Velocity average of `f`, a function of the Doppler shift `kv`.
pub fn doppler_average<F: Fn(f64) -> f64>(f: F, dp: &DopplerParams) -> Result<f64> {
    if dp.k_vbar == 0.0 {
        dp.validate()?;
        return Ok(f(0.0));
    }
    Ok(dp.nodes()?.iter().map(|&(kv, w)| w * f(kv)).sum())
}

/// As [`doppler_average`] for a fallible integrand; errors name the node.
pub fn try_doppler_average<F: Fn(f64) -> Result<f64>>(f: F, dp: &DopplerParams) -> Result<f64> {
    let nodes = dp.nodes()?;
    average_on(&nodes, f)
}

fn average_on<F: Fn(f64) -> Result<f64>>(nodes: &[(f64, f64)], f: F) -> Result<f64> {
    let mut acc = 0.0;
    for &(kv, w) in nodes {
        acc += w * f(kv).map_err(|e| e.at(format!("kv = {kv}")))?;
    }
    Ok(acc)
}

/// Velocity-averaged π_e over a grid of Ω_g, using the reduced equations
/// with δ_v = δ - kv at every node.
///
/// With `normalize`, the background (the average at Ω_g = 10⁵ γ_r) is
/// subtracted and the curve divided by its value at Ω_g = 0.
pub fn averaged_scan(
    params: &SystemParams,
    dp: &DopplerParams,
    grid: &[f64],
    normalize: bool,
) -> Result<ScanResult> {
    check_increasing(grid)?;
    let mut dp = *dp;
    dp.core_center.get_or_insert(params.delta_v);
    dp.core_width.get_or_insert(params.gamma_eg);
    let nodes = dp.nodes()?;
    let rs = ReducedSystem::new(params)?;
    let point = |omega_g: f64| -> Result<f64> {
        average_on(&nodes, |kv| {
            rs.pi_e(params.kappa, params.delta_v - kv, params.gamma_eg, omega_g)
        })
        .map_err(|e| e.at(format!("Omega_g = {omega_g}")))
    };
    let raw: Vec<f64> = grid.par_iter().map(|&o| point(o)).collect::<Result<_>>()?;
    let (signal, normalization) = if normalize {
        let background = point(BACKGROUND_FIELD * params.gamma_r)?;
        let center = point(0.0)?;
        let height = center - background;
        if height == 0.0 {
            return Err(HanleError::Domain(
                "no resonance at Omega_g = 0 to normalize against".into(),
            ));
        }
        (
            raw.iter().map(|y| (y - background) / height).collect(),
            Normalization::BackgroundAndCenter { background, center },
        )
    } else {
        (raw, Normalization::Raw)
    };
    ScanResult::new(
        grid.to_vec(),
        signal,
        ScanMeta {
            params: Some(params.clone()),
            doppler: Some(dp),
            path: Some(SolverPath::Reduced),
            normalization,
        },
    )
}

/// Full width at half height of the feature at Ω_g ≈ 0.
///
/// Normalized scans are measured from zero; raw scans from the mean of
/// the two end points.
pub fn resonance_width(scan: &ScanResult) -> Result<f64> {
    let (x, y) = (&scan.omega_g_grid, &scan.signal);
    if x.len() < 3 {
        return Err(HanleError::GridTooNarrow("fewer than three samples".into()));
    }
    let ic = (0..x.len())
        .min_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
        .expect("non-empty");
    let baseline = if scan.is_normalized() {
        0.0
    } else {
        0.5 * (y[0] + y[y.len() - 1])
    };
    let half = baseline + 0.5 * (y[ic] - baseline);
    let side = (y[ic] - half).signum();
    if side == 0.0 {
        return Err(HanleError::GridTooNarrow("no central feature above the baseline".into()));
    }
    let cross = |i: usize, j: usize| -> f64 {
        let t = (y[i] - half) / (y[i] - y[j]);
        x[i] + t * (x[j] - x[i])
    };
    let right = (ic + 1..x.len())
        .find(|&j| (y[j] - half).signum() != side)
        .map(|j| cross(j - 1, j));
    let left = (0..ic)
        .rev()
        .find(|&j| (y[j] - half).signum() != side)
        .map(|j| cross(j + 1, j));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(HanleError::GridTooNarrow(
            "no half-height crossing on both sides of the centre".into(),
        )),
    }
}
