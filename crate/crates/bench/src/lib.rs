//! Shared fixtures for the solver benchmarks.

use std::f64::consts::FRAC_PI_8;

use hanle_core::{AngularMomentum, Polarization, SystemParams};
use nalgebra::Vector3;

/// 1 → 2 with elliptical light at S = 10⁻².
pub fn elliptical_one_to_two() -> SystemParams {
    let mut p = SystemParams::one_to_two();
    p.kappa = 0.05;
    p.omega_g = 0.01;
    p.delta_v = 0.25;
    p.pol = Polarization::new(FRAC_PI_8).expect("in range");
    p
}

/// 3 → 4 with a tilted field and a leaky transition.
pub fn tilted_three_to_four() -> SystemParams {
    let mut p = SystemParams::new(AngularMomentum::integer(3), AngularMomentum::integer(4));
    p.beta = 0.9;
    p.gamma_transit = 0.01;
    p.gamma_eg = 0.51;
    p.kappa = 0.1;
    p.omega_g = 0.02;
    p.b_direction = Vector3::new(0.6, 0.0, 0.8);
    p.pol = Polarization::new(0.3).expect("in range");
    p
}
