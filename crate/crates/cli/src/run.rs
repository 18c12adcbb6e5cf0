use rayon::prelude::*;

use hanle_core::doppler::{averaged_scan, resonance_width};
use hanle_core::lineshape::{fit_samples, lorentzian_from_coeffs, sign_reversal_gamma1, LorentzianParams};
use hanle_core::reduced::{analytic_coeffs, pi_e0, ReducedSystem};
use hanle_core::scan::{evaluate, linspace, scan_omega, SolverPath};
use hanle_core::validate::{run_validation, ValidationConfig};
use hanle_core::{HanleError, NormalizedParams, ResonanceKind};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

/// Tabular result of a run, in grid order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Vec<String>,
    /// False when a validation check failed.
    pub success: bool,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.mode {
        Mode::ScanOmega => scan_omega_mode(cfg),
        Mode::ScanDelta => scan_delta_mode(cfg),
        Mode::LorentzParams => lorentz_mode(cfg),
        Mode::SignReversal => reversal_mode(cfg),
        Mode::DopplerScan => doppler_mode(cfg),
        Mode::Validate => validate_mode(cfg),
    }
}

fn grid(cfg: &RunConfig) -> Vec<f64> {
    let g = cfg.grid.expect("grid resolved for sweep modes");
    linspace(g.start, g.stop, g.count)
}

fn scan_omega_mode(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let scan = scan_omega(p, cfg.path, &grid(cfg), cfg.relative)?;
    let field_unit = p.gamma_eg * p.saturation();
    let rows = scan
        .omega_g_grid
        .iter()
        .zip(&scan.signal)
        .map(|(&o, &y)| vec![Cell::Num(o), Cell::Num(o / field_unit), Cell::Num(y)])
        .collect();
    let (lo, hi) = scan
        .signal
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    Ok(Outcome {
        table: Table {
            columns: vec!["omega_g", "omega_norm", "signal"],
            rows,
        },
        summary: vec![format!("signal range [{lo:.6e}, {hi:.6e}] over {} points", scan.len())],
        success: true,
    })
}

fn scan_delta_mode(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let deltas = grid(cfg);
    let reduced = match cfg.path {
        SolverPath::Reduced => Some(ReducedSystem::new(p)?),
        _ => None,
    };
    let signal: Vec<f64> = deltas
        .par_iter()
        .map(|&d| {
            let mut q = p.clone();
            q.delta_v = d;
            let unit = if cfg.relative { pi_e0(&q) } else { 1.0 };
            match &reduced {
                Some(rs) => rs.pi_e(q.kappa, d, q.gamma_eg, q.omega_g).map(|v| v / unit),
                None => evaluate(&q, cfg.path, cfg.relative),
            }
            .map_err(|e| e.at(format!("delta = {d}")))
        })
        .collect::<Result<_, _>>()?;
    let rows = deltas
        .iter()
        .zip(&signal)
        .map(|(&d, &y)| vec![Cell::Num(d), Cell::Num(d / p.gamma_eg), Cell::Num(y)])
        .collect();
    Ok(Outcome {
        table: Table {
            columns: vec!["delta", "delta_norm", "signal"],
            rows,
        },
        summary: vec![format!("{} detunings", deltas.len())],
        success: true,
    })
}

struct LorentzRow {
    params: LorentzianParams,
    goodness: Option<f64>,
    converged: Option<bool>,
}

fn lorentz_point(cfg: &RunConfig, delta: f64) -> Result<LorentzRow, HanleError> {
    let mut p = cfg.params.clone();
    p.delta_v = delta;
    let np = NormalizedParams::from_system(&p)?;
    match cfg.path {
        SolverPath::Analytic => {
            if p.gamma_transit != 0.0 {
                return Err(HanleError::UnsupportedRegime(
                    "closed-form Lorentzian parameters need gamma_transit = 0; use path = reduced"
                        .into(),
                ));
            }
            if p.fg.twice() != 2 || p.fe.twice() != 4 {
                return Err(HanleError::UnsupportedRegime(
                    "closed-form Lorentzian parameters exist only for 1 -> 2".into(),
                ));
            }
            Ok(LorentzRow {
                params: lorentzian_from_coeffs(&analytic_coeffs(np.gamma1_tilde, np.epsilon), np.delta)?,
                goodness: None,
                converged: None,
            })
        }
        path => {
            let unit = p.gamma_eg * np.saturation;
            let half = cfg.fit_span * (1.0 + np.gamma_tilde);
            let x = linspace(-half, half, cfg.fit_count);
            let omegas: Vec<f64> = x.iter().map(|o| o * unit).collect();
            let scan = scan_omega(&p, path, &omegas, true)?;
            let fit = fit_samples(&x, &scan.signal)?;
            Ok(LorentzRow {
                params: fit.params,
                goodness: Some(fit.goodness),
                converged: Some(fit.converged),
            })
        }
    }
}

fn lorentz_mode(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let deltas = grid(cfg);
    let rows: Vec<LorentzRow> = deltas
        .par_iter()
        .map(|&d| {
            lorentz_point(cfg, d).map_err(|e| e.at(format!("delta = {d}")))
        })
        .collect::<Result<_, _>>()?;
    let fitted = cfg.path != SolverPath::Analytic;
    let mut columns = vec!["delta", "delta_norm", "A", "B", "C", "omega0", "w", "kind"];
    if fitted {
        columns.extend(["goodness", "converged"]);
    }
    let mut unconverged = 0;
    let table_rows = deltas
        .iter()
        .zip(&rows)
        .map(|(&d, r)| {
            let lp = r.params;
            let mut row = vec![
                Cell::Num(d),
                Cell::Num(d / cfg.params.gamma_eg),
                Cell::Num(lp.a),
                Cell::Num(lp.b),
                Cell::Num(lp.c_bg),
                Cell::Num(lp.omega0),
                Cell::Num(lp.w),
                Cell::Text(lp.kind().label().into()),
            ];
            if let (Some(g), Some(c)) = (r.goodness, r.converged) {
                unconverged += usize::from(!c);
                row.push(Cell::Num(g));
                row.push(Cell::Text(c.to_string()));
            }
            row
        })
        .collect();
    let eia = rows.iter().filter(|r| r.params.kind() == ResonanceKind::Eia).count();
    let mut summary = vec![
        "amplitudes in units of pi_e0, omega0 and w in units of gamma_eg*S".to_string(),
        format!("{eia} of {} detunings give EIA (A > 0)", rows.len()),
    ];
    if unconverged > 0 {
        summary.push(format!("{unconverged} fits did not converge"));
    }
    Ok(Outcome {
        table: Table {
            columns,
            rows: table_rows,
        },
        summary,
        success: true,
    })
}

fn reversal_mode(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let delta = p.delta_v / p.gamma_eg;
    let eps = grid(cfg);
    let found: Vec<Result<f64, HanleError>> =
        eps.par_iter().map(|&e| sign_reversal_gamma1(e, delta)).collect();
    let mut rows = Vec::with_capacity(eps.len());
    for (&e, r) in eps.iter().zip(found) {
        match r {
            Ok(g) => rows.push(vec![Cell::Num(e), Cell::Num(g), Cell::Text("found".into())]),
            Err(HanleError::NoReversal { .. }) => {
                rows.push(vec![Cell::Num(e), Cell::Num(f64::NAN), Cell::Text("none".into())])
            }
            Err(other) => {
                return Err(other.at(format!("epsilon = {e}"))
                .into())
            }
        }
    }
    Ok(Outcome {
        table: Table {
            columns: vec!["epsilon", "gamma1_tilde", "status"],
            rows,
        },
        summary: vec![format!("reversal points at Delta = {delta}")],
        success: true,
    })
}

fn doppler_mode(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scan = averaged_scan(&cfg.params, &cfg.doppler, &grid(cfg), cfg.normalize)?;
    let rows = scan
        .omega_g_grid
        .iter()
        .zip(&scan.signal)
        .map(|(&o, &y)| vec![Cell::Num(o), Cell::Num(y)])
        .collect();
    let width = match resonance_width(&scan) {
        Ok(w) => format!("central FWHM {w:.6e}"),
        Err(e) => format!("central FWHM unavailable: {e}"),
    };
    Ok(Outcome {
        table: Table {
            columns: vec!["omega_g", "signal"],
            rows,
        },
        summary: vec![width],
        success: true,
    })
}

fn validate_mode(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = run_validation(&ValidationConfig {
        seed: cfg.seed,
        structure_draws: cfg.draws,
        saturation: cfg.saturation,
    })?;
    let rows = report
        .checks
        .iter()
        .map(|c| {
            vec![
                Cell::Text(c.name.into()),
                Cell::Num(c.max_deviation),
                Cell::Num(c.tolerance),
                Cell::Int(c.samples),
                Cell::Text(if c.passed() { "pass" } else { "FAIL" }.into()),
            ]
        })
        .collect();
    let summary = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{:<24} max {:.3e} tol {:.1e} {}",
                c.name,
                c.max_deviation,
                c.tolerance,
                if c.passed() { "pass" } else { "FAIL" }
            )
        })
        .collect();
    Ok(Outcome {
        table: Table {
            columns: vec!["check", "max_deviation", "tolerance", "samples", "status"],
            rows,
        },
        summary,
        success: report.all_passed(),
    })
}
