//! Cross-path and structural checks over parameter grids and seeded random
//! draws.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::angular::{AngularMomentum, Polarization};
use crate::error::Result;
use crate::gobe::{collisional_depolarization, steady_state, SystemParams};
use crate::lineshape::{eval_lorentzian, lorentzian_from_coeffs, sign_reversal_gamma1};
use crate::reduced::{analytic_coeffs, analytic_pi_e, pi_e0, reduced_numeric, NormalizedParams};
use crate::scan::linspace;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationConfig {
    pub seed: u64,
    pub structure_draws: usize,
    /// Saturation at which the full equations are compared with the
    /// low-saturation paths.
    pub saturation: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            seed: 0x4a11e,
            structure_draws: 1000,
            saturation: 1e-3,
        }
    }
}

/// Worst relative deviations on the (Ω, Δ, γ̃₁, ε) oracle grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreePathStats {
    pub analytic_vs_reduced: f64,
    pub reduced_vs_gobe: f64,
    pub points: usize,
}

pub fn oracle_grid() -> Vec<NormalizedParams> {
    let mut out = Vec::new();
    for &g in &[0.0, 1.0, 10.0] {
        for &eps in &[0.0, FRAC_PI_8, PI / 5.0] {
            for &delta in &linspace(-5.0, 5.0, 5) {
                for &omega in &linspace(-5.0, 5.0, 5) {
                    out.push(NormalizedParams {
                        omega,
                        delta,
                        gamma1_tilde: g,
                        gamma_tilde: 0.0,
                        epsilon: eps,
                        saturation: 0.0,
                    });
                }
            }
        }
    }
    out
}

/// Compares closed form, reduced equations and full equations with
/// γ_r = 1, γ_eg = 1/2, Γ = 0, β = 1 at the given saturation.
pub fn three_path(saturation: f64) -> Result<ThreePathStats> {
    let grid = oracle_grid();
    let devs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|np| {
            let np = NormalizedParams { saturation, ..*np };
            let p = np.to_system(1.0, 0.5)?;
            let exact = analytic_pi_e(&np)?;
            let unit = pi_e0(&p);
            let reduced = reduced_numeric(&p)?.pi_e / unit;
            let full = steady_state(&p)?.pi_e / unit;
            Ok((
                ((reduced - exact) / exact).abs(),
                ((full - reduced) / reduced).abs(),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(ThreePathStats {
        analytic_vs_reduced: devs.iter().map(|d| d.0).fold(0.0, f64::max),
        reduced_vs_gobe: devs.iter().map(|d| d.1).fold(0.0, f64::max),
        points: devs.len(),
    })
}

/// Worst structural violations over random draws of the full equations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StructureStats {
    pub draws: usize,
    pub closed_draws: usize,
    pub hermiticity: f64,
    pub trace: f64,
    pub collisional_trace: f64,
    pub residual: f64,
}

/// One random but valid parameter set. Γ = 0 is drawn only for closed
/// Fe = Fg + 1 transitions, where the steady state is unique.
pub fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let tg = rng.random_range(0..=4u32);
    let te = loop {
        let te = match rng.random_range(0..3) {
            0 => tg.checked_sub(2),
            1 => Some(tg),
            _ => Some(tg + 2),
        };
        match te {
            Some(te) if !(te == 0 && tg == 0) => break te,
            _ => continue,
        }
    };
    let mut p = SystemParams::new(AngularMomentum::from_twice(tg), AngularMomentum::from_twice(te));
    p.gamma_r = rng.random_range(0.5..2.0);
    p.beta = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.5..1.0) };
    let may_close = p.beta == 1.0 && te == tg + 2;
    p.gamma_transit = if may_close && rng.random_bool(0.5) {
        0.0
    } else {
        rng.random_range(1e-3..0.5) * p.gamma_r
    };
    p.gamma_1 = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..3.0) * p.gamma_r };
    p.gamma_eg = p.gamma_r / 2.0 + p.gamma_transit + rng.random_range(0.0..1.0) * p.gamma_r;
    p.kappa = rng.random_range(0.01..2.0) * p.gamma_r;
    p.delta_v = rng.random_range(-3.0..3.0) * p.gamma_r;
    p.omega_g = rng.random_range(-2.0..2.0) * p.gamma_r;
    p.excited_g_ratio = rng.random_range(-1.0..2.0);
    let b = loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n: f64 = v.norm();
        if n > 0.1 && n <= 1.0 {
            break v / n;
        }
    };
    p.b_direction = b;
    p.pol = Polarization::new(rng.random_range(-FRAC_PI_4..=FRAC_PI_4)).expect("in range");
    p.wave_frame = Rotation3::from_euler_angles(
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
    );
    p
}

pub fn structure_suite(seed: u64, draws: usize) -> Result<StructureStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<SystemParams> = (0..draws).map(|_| random_params(&mut rng)).collect();
    let stats: Vec<StructureStats> = params
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let sol = steady_state(p).map_err(|e| e.at(format!("draw {k}: {p:?}")))?;
            let conserving = p.beta == 1.0;
            Ok(StructureStats {
                draws: 1,
                closed_draws: usize::from(p.gamma_transit == 0.0),
                hermiticity: sol.rho.hermiticity_error(),
                trace: if conserving { (sol.rho.total_population() - 1.0).abs() } else { 0.0 },
                collisional_trace: collisional_depolarization(&sol.rho.rho_ee, p.gamma_1, p.fe)
                    .trace()
                    .norm(),
                residual: sol.residual_norm,
            })
        })
        .collect::<Result<_>>()?;
    Ok(stats.iter().fold(StructureStats::default(), |a, s| StructureStats {
        draws: a.draws + s.draws,
        closed_draws: a.closed_draws + s.closed_draws,
        hermiticity: a.hermiticity.max(s.hermiticity),
        trace: a.trace.max(s.trace),
        collisional_trace: a.collisional_trace.max(s.collisional_trace),
        residual: a.residual.max(s.residual),
    }))
}

/// Worst gap between the closed form and its Lorentzian decomposition,
/// relative to the largest signal, over the oracle grid in (Δ, γ̃₁, ε).
pub fn lorentzian_identity() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &g in &[0.0, 1.0, 10.0] {
        for &eps in &[0.0, FRAC_PI_8, PI / 5.0] {
            for &delta in &linspace(-5.0, 5.0, 5) {
                let lp = lorentzian_from_coeffs(&analytic_coeffs(g, eps), delta)?;
                let (mut gap, mut scale): (f64, f64) = (0.0, 0.0);
                for omega in linspace(-10.0, 10.0, 201) {
                    let np = NormalizedParams {
                        omega,
                        delta,
                        gamma1_tilde: g,
                        gamma_tilde: 0.0,
                        epsilon: eps,
                        saturation: 0.0,
                    };
                    let y = analytic_pi_e(&np)?;
                    scale = scale.max(y.abs());
                    gap = gap.max((y - eval_lorentzian(&lp, omega)).abs());
                }
                worst = worst.max(gap / scale);
            }
        }
    }
    Ok(worst)
}

pub fn run_validation(cfg: &ValidationConfig) -> Result<ValidationReport> {
    let paths = three_path(cfg.saturation)?;
    let structure = structure_suite(cfg.seed, cfg.structure_draws)?;
    let identity = lorentzian_identity()?;
    let mut reversal: f64 = 0.0;
    for d in [0.0, 1.0, 5.0] {
        reversal = reversal.max((sign_reversal_gamma1(0.0, d)? - 2.5).abs());
    }
    let n = structure.draws;
    Ok(ValidationReport {
        checks: vec![
            Check {
                name: "analytic_vs_reduced",
                max_deviation: paths.analytic_vs_reduced,
                tolerance: 1e-9,
                samples: paths.points,
            },
            Check {
                name: "reduced_vs_gobe",
                max_deviation: paths.reduced_vs_gobe,
                tolerance: 5e-3,
                samples: paths.points,
            },
            Check {
                name: "lorentzian_identity",
                max_deviation: identity,
                tolerance: 1e-10,
                samples: 45,
            },
            Check {
                name: "linear_reversal_at_5/2",
                max_deviation: reversal,
                tolerance: 1e-8,
                samples: 3,
            },
            Check {
                name: "hermiticity",
                max_deviation: structure.hermiticity,
                tolerance: 1e-12,
                samples: n,
            },
            Check {
                name: "trace_conservation",
                max_deviation: structure.trace,
                tolerance: 1e-10,
                samples: n,
            },
            Check {
                name: "collisional_trace",
                max_deviation: structure.collisional_trace,
                tolerance: 0.0,
                samples: n,
            },
            Check {
                name: "gobe_residual",
                max_deviation: structure.residual,
                tolerance: 1e-10,
                samples: n,
            },
        ],
    })
}
