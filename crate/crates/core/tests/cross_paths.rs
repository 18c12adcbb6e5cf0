use std::f64::consts::{FRAC_PI_8, PI};

use hanle_core::gobe::steady_state;
use hanle_core::lineshape::{fit_samples, lorentzian_from_coeffs, sign_reversal_gamma1};
use hanle_core::reduced::{analytic_coeffs, analytic_pi_e, pi_e0, reduced_numeric};
use hanle_core::scan::{linspace, scan_omega};
use hanle_core::validate::{run_validation, ValidationConfig};
use hanle_core::{NormalizedParams, Polarization, SolverPath, SystemParams};

#[test]
fn default_validation_structural_checks_pass() {
    let report = run_validation(&ValidationConfig::default()).unwrap();
    for c in &report.checks {
        println!("{:<24} {:.3e} <= {:.1e}", c.name, c.max_deviation, c.tolerance);
    }
    // the full equations keep Zeeman shifts of the optical coherences and
    // saturation, both first order in S; the reduced comparison is covered
    // by the acceptance target
    for c in report.checks.iter().filter(|c| c.name != "reduced_vs_gobe") {
        assert!(c.passed(), "{}", c.name);
    }
}

#[test]
fn elliptical_low_saturation_matches_closed_form() {
    let np = NormalizedParams {
        omega: 0.0,
        delta: 0.0,
        gamma1_tilde: 0.0,
        gamma_tilde: 0.0,
        epsilon: FRAC_PI_8,
        saturation: 1e-4,
    };
    let p = np.to_system(1.0, 0.5).unwrap();
    let full = steady_state(&p).unwrap().pi_e / pi_e0(&p);
    let exact = analytic_coeffs(0.0, FRAC_PI_8);
    assert!((full / (exact.n[0][0] / exact.d[0][0]) - 1.0).abs() < 1e-3);
    assert!((analytic_pi_e(&np).unwrap() - full).abs() < 1e-3 * full);
}

#[test]
fn fit_of_full_equations_tracks_closed_form() {
    let s = 1e-3;
    let np = NormalizedParams {
        omega: 0.0,
        delta: 0.0,
        gamma1_tilde: 0.0,
        gamma_tilde: 0.0,
        epsilon: FRAC_PI_8,
        saturation: s,
    };
    let p = np.to_system(1.0, 0.5).unwrap();
    let unit = p.gamma_eg * s;
    let grid: Vec<f64> = linspace(-6.0, 6.0, 121).iter().map(|o| o * unit).collect();
    let scan = scan_omega(&p, SolverPath::Gobe, &grid, true).unwrap();
    let x: Vec<f64> = grid.iter().map(|o| o / unit).collect();
    let fit = fit_samples(&x, &scan.signal).unwrap();
    let want = lorentzian_from_coeffs(&analytic_coeffs(0.0, FRAC_PI_8), 0.0).unwrap();
    assert!(fit.converged);
    assert!((fit.params.a / want.a - 1.0).abs() < 0.01, "{:?} {:?}", fit.params, want);
    assert!((fit.params.w / want.w - 1.0).abs() < 0.01);
    assert!((fit.params.c_bg / want.c_bg - 1.0).abs() < 0.01);
}

#[test]
fn reduced_agrees_with_full_model_for_weak_light_and_field() {
    let mut p = SystemParams::one_to_two();
    p.gamma_transit = 0.05;
    p.gamma_eg = 0.55;
    p.kappa = 1e-3;
    p.omega_g = 1e-5;
    p.pol = Polarization::new(PI / 7.0).unwrap();
    let a = reduced_numeric(&p).unwrap().pi_e;
    let b = steady_state(&p).unwrap().pi_e;
    assert!((a - b).abs() < 1e-4 * b);
}

#[test]
fn reversal_points_are_bracketed() {
    let g = sign_reversal_gamma1(FRAC_PI_8, 0.0).unwrap();
    assert!(g > 2.0 && g < 2.5);
}
