//! Low-saturation reduction of the Bloch equations and the closed-form
//! lineshape of the Fg = 1 → Fe = 2 transition.
//!
//! Eliminating the optical coherences at S ≪ 1 leaves
//!
//! ```text
//! (Γ + γ_r) ρ_ee + γ₁[ρ_ee - Π_e Tr ρ_ee/(2Fe+1)] = 2 γ_eg S V ρ_gg V†
//! Γ(ρ_gg - ρ_gg⁽⁰⁾) + iΩ_g[F_g, ρ_gg] = -{(γ_eg + iδ) S V†V ρ_gg + h.c.} + β γ_r Σ_q T_q† ρ_ee T_q
//! ```
//!
//! The first line gives ρ_ee explicitly in terms of ρ_gg, so the second is a
//! closed linear system in the (2Fg+1)² real coordinates of ρ_gg.

use nalgebra::{DMatrix, DVector};

use crate::angular::{
    coupling_block_for_vector, magnetic_block, tensor_blocks, AngularMomentum, Polarization, C64,
};
use crate::error::{HanleError, Result};
use crate::gobe::{
    excited_population, solve_dense, DensityMatrix, SteadyStateSolution, SystemParams,
    DEFAULT_MAX_SUBLEVELS,
};
use crate::hermitian;

/// Saturation above which the reduced model is flagged as out of its
/// validity domain.
pub const SATURATION_WARNING: f64 = 0.1;

/// The printed coefficient tables take the detuning and the Zeeman shift in
/// units of 2γ_eg and 2γ_eg·S (γ_r when γ_eg = γ_r/2). The public normalized
/// variables use γ_eg and γ_eg·S, so polynomial arguments are divided by
/// this factor before the tables are applied.
pub const TABLE_SCALE: f64 = 2.0;

/// Dimensionless variables of the low-saturation lineshape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedParams {
    /// Ω = Ω_g / (γ_eg S)
    pub omega: f64,
    /// Δ = δ / γ_eg
    pub delta: f64,
    /// γ̃₁ = γ₁ / γ_r
    pub gamma1_tilde: f64,
    /// Γ̃ = Γ / (γ_eg S)
    pub gamma_tilde: f64,
    pub epsilon: f64,
    /// S = κ² / (γ_eg² + δ²)
    pub saturation: f64,
}

impl NormalizedParams {
    /// S is evaluated at the same δ that defines Δ.
    pub fn from_system(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        let s = p.saturation();
        if s <= 0.0 {
            return Err(HanleError::Domain(
                "normalized variables need a non-zero saturation (kappa > 0)".into(),
            ));
        }
        if s > SATURATION_WARNING {
            log::warn!("saturation S = {s:.3} exceeds {SATURATION_WARNING}: low-saturation model is outside its domain");
        }
        let ges = p.gamma_eg * s;
        Ok(Self {
            omega: p.omega_g / ges,
            delta: p.delta_v / p.gamma_eg,
            gamma1_tilde: p.gamma_1 / p.gamma_r,
            gamma_tilde: p.gamma_transit / ges,
            epsilon: p.pol.epsilon(),
            saturation: s,
        })
    }

    /// Physical parameters of a 1 → 2 transition reproducing these
    /// normalized values, for the given γ_r and γ_eg.
    pub fn to_system(&self, gamma_r: f64, gamma_eg: f64) -> Result<SystemParams> {
        let mut p = SystemParams::one_to_two();
        p.gamma_r = gamma_r;
        p.gamma_eg = gamma_eg;
        p.delta_v = self.delta * gamma_eg;
        p.kappa = (self.saturation * (gamma_eg * gamma_eg + p.delta_v * p.delta_v)).sqrt();
        p.omega_g = self.omega * gamma_eg * self.saturation;
        p.gamma_transit = self.gamma_tilde * gamma_eg * self.saturation;
        p.gamma_1 = self.gamma1_tilde * gamma_r;
        p.pol = Polarization::new(self.epsilon)?;
        p.validate()?;
        Ok(p)
    }
}

/// Coefficient tables `N_ij`, `D_kl` of the closed-form 1 → 2 lineshape:
/// first index is the power of the Zeeman shift, second the power of the
/// detuning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyCoeffs {
    pub n: [[f64; 3]; 3],
    pub d: [[f64; 3]; 3],
}

/// Evaluates the printed tables at Γ̃ = 0 with `c = cos 2ε`, `s = sin 2ε`.
///
/// Only the entries with even `i + j` are non-zero.
pub fn analytic_coeffs(gamma1_tilde: f64, epsilon: f64) -> PolyCoeffs {
    let g = gamma1_tilde;
    let (g2, g3) = (g * g, g * g * g);
    let c = (2.0 * epsilon).cos();
    let s = (2.0 * epsilon).sin();
    let (c2, c4) = (c * c, c * c * c * c);
    let one_g2 = (1.0 + g) * (1.0 + g);

    let n00 = (5.0 + 7.0 * g)
        * (25.0 + 115.0 * g + 172.0 * g2 + 84.0 * g3
            - c2 * (15.0 + 9.0 * g - 76.0 * g2 - 84.0 * g3)
            - 4.0 * c4 * g);
    let n02 = -4.0
        * one_g2
        * (-25.0 * (5.0 + 16.0 * g + 12.0 * g2) + c2 * (175.0 + 320.0 * g - 12.0 * g2)
            - 12.0 * c4 * (5.0 - 4.0 * g - 24.0 * g2));
    let n11 = 160.0
        * s
        * one_g2
        * (15.0 + 48.0 * g + 36.0 * g2 - c2 * (8.0 - 6.0 * g - 36.0 * g2));
    let n20 = 48.0
        * one_g2
        * (12.0 * (1.0 + 2.0 * g) * (5.0 + 6.0 * g) - 5.0 * c2 * (7.0 - 5.0 * g - 30.0 * g2));

    let q = 5.0 + 32.0 * g + 36.0 * g2;
    let d00 = (5.0 + 7.0 * g)
        * ((5.0 + 7.0 * g) * q - 4.0 * c2 * (2.0 + 5.0 * g - 8.0 * g2 - 14.0 * g3));
    let d02 = -4.0
        * one_g2
        * (-25.0 * q + 4.0 * c2 * (35.0 + 194.0 * g + 166.0 * g2)
            - 32.0 * c4 * (1.0 + g - 6.0 * g2));
    let d11 = 160.0 * s * one_g2 * (3.0 * q - c2 * (4.0 + 2.0 * g - 24.0 * g2));
    let d20 = 192.0 * one_g2 * (3.0 * q - c2 * (4.0 - 25.0 * g2));

    PolyCoeffs {
        n: [[n00, 0.0, n02], [0.0, n11, 0.0], [n20, 0.0, 0.0]],
        d: [[d00, 0.0, d02], [0.0, d11, 0.0], [d20, 0.0, 0.0]],
    }
}

fn collapse(table: &[[f64; 3]; 3], delta: f64) -> [f64; 3] {
    let x = delta / TABLE_SCALE;
    let mut out = [0.0; 3];
    for (i, row) in table.iter().enumerate() {
        let poly = row[0] + x * (row[1] + x * row[2]);
        out[i] = poly / TABLE_SCALE.powi(i as i32);
    }
    out
}

impl PolyCoeffs {
    /// `N_i(Δ)` as coefficients of Ω⁰, Ω¹, Ω² in normalized units.
    pub fn numerator(&self, delta: f64) -> [f64; 3] {
        collapse(&self.n, delta)
    }

    pub fn denominator(&self, delta: f64) -> [f64; 3] {
        collapse(&self.d, delta)
    }

    /// π_e / π_e⁽⁰⁾ at normalized (Ω, Δ).
    pub fn ratio(&self, omega: f64, delta: f64) -> f64 {
        let n = self.numerator(delta);
        let d = self.denominator(delta);
        (n[0] + omega * (n[1] + omega * n[2])) / (d[0] + omega * (d[1] + omega * d[2]))
    }
}

/// π_e / π_e⁽⁰⁾ from the closed form. Only defined at Γ̃ = 0.
pub fn analytic_pi_e(np: &NormalizedParams) -> Result<f64> {
    if np.gamma_tilde != 0.0 {
        return Err(HanleError::UnsupportedRegime(format!(
            "closed-form coefficients exist only at Gamma~ = 0 (got {}); use reduced_numeric",
            np.gamma_tilde
        )));
    }
    let pc = analytic_coeffs(np.gamma1_tilde, np.epsilon);
    let d = pc.denominator(np.delta);
    let den = d[0] + np.omega * (d[1] + np.omega * d[2]);
    if den == 0.0 || !den.is_finite() {
        return Err(HanleError::Domain(format!(
            "closed-form denominator vanishes at Omega = {}, Delta = {}",
            np.omega, np.delta
        )));
    }
    Ok(pc.ratio(np.omega, np.delta))
}

/// π_e⁽⁰⁾ = 2 γ_eg S / (γ_r + Γ), the linear absorption of unpolarized atoms.
pub fn pi_e0(p: &SystemParams) -> f64 {
    2.0 * p.gamma_eg * p.saturation() / (p.gamma_r + p.gamma_transit)
}

/// The δ- and Ω-independent pieces of the reduced ground-state system,
/// precomputed so that many detunings can be solved cheaply.
///
/// Rates are stored in units of γ_r.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    fe: AngularMomentum,
    ng: usize,
    gamma_r: f64,
    gamma_transit: f64,
    v: DMatrix<C64>,
    identity: DMatrix<f64>,
    zeeman: DMatrix<f64>,
    absorption_re: DMatrix<f64>,
    absorption_im: DMatrix<f64>,
    feed: DMatrix<f64>,
    excited_trace: DVector<f64>,
    isotropic: DVector<f64>,
    gamma_1: f64,
}

impl ReducedSystem {
    /// Uses everything in `params` except κ, δ_v, γ_eg and Ω_g, which are
    /// supplied per solve.
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        params.check_cap(DEFAULT_MAX_SUBLEVELS)?;
        let p = params.in_radiative_units();
        let ng = p.fg.dim();
        let t = tensor_blocks(p.fe, p.fg)?;
        let v = coupling_block_for_vector(p.fg, p.fe, &p.lab_polarization())?;
        let fb = magnetic_block(p.fg, &p.b_direction)?;
        let vv = v.adjoint() * &v;

        let excited_of = |rho: &DMatrix<C64>| -> DMatrix<C64> {
            excited_per_unit(&v, rho, p.gamma_1, p.gamma_transit, p.fe)
        };

        let dim = hermitian::len(ng);
        let mut zeeman = DMatrix::zeros(dim, dim);
        let mut absorption_re = DMatrix::zeros(dim, dim);
        let mut absorption_im = DMatrix::zeros(dim, dim);
        let mut feed = DMatrix::zeros(dim, dim);
        let mut excited_trace = DVector::zeros(dim);
        let mut col = vec![0.0; dim];
        let i = C64::i();
        for k in 0..dim {
            let rho = hermitian::unit(ng, k);

            let z = (&fb * &rho - &rho * &fb) * i;
            hermitian::write_coords(&z, &mut col);
            zeeman.column_mut(k).copy_from_slice(&col);

            let a = &vv * &rho;
            hermitian::write_coords(&(&a + a.adjoint()), &mut col);
            absorption_re.column_mut(k).copy_from_slice(&col);
            let b = &a * i;
            hermitian::write_coords(&(&b + b.adjoint()), &mut col);
            absorption_im.column_mut(k).copy_from_slice(&col);

            let ree = excited_of(&rho);
            excited_trace[k] = ree.trace().re;
            let mut g = t[0].adjoint() * &ree * &t[0];
            g += t[1].adjoint() * &ree * &t[1];
            g += t[2].adjoint() * &ree * &t[2];
            hermitian::write_coords(&(g * C64::new(p.beta, 0.0)), &mut col);
            feed.column_mut(k).copy_from_slice(&col);
        }
        let mut isotropic = DVector::zeros(dim);
        for k in 0..ng {
            isotropic[k] = 1.0 / ng as f64;
        }
        Ok(Self {
            fe: p.fe,
            ng,
            gamma_r: params.gamma_r,
            gamma_transit: p.gamma_transit,
            v,
            identity: DMatrix::identity(dim, dim),
            zeeman,
            absorption_re,
            absorption_im,
            feed,
            excited_trace,
            isotropic,
            gamma_1: p.gamma_1,
        })
    }

    /// Solves for one point; all rates in the caller's units.
    pub fn solve(
        &self,
        kappa: f64,
        delta_v: f64,
        gamma_eg: f64,
        omega_g: f64,
    ) -> Result<SteadyStateSolution> {
        let u = self.gamma_r;
        let (kappa, delta, geg, omega) = (kappa / u, delta_v / u, gamma_eg / u, omega_g / u);
        let s = kappa * kappa / (geg * geg + delta * delta);
        let gt = self.gamma_transit;

        let mut l = &self.identity * gt;
        l += &self.zeeman * omega;
        l += &self.absorption_re * (s * geg);
        l += &self.absorption_im * (s * delta);
        l -= &self.feed * (2.0 * geg * s);
        let mut rhs = &self.isotropic * gt;
        let lhs_original = l.clone();
        let rhs_original = rhs.clone();

        let closed = gt == 0.0;
        if closed {
            for k in 0..l.ncols() {
                l[(0, k)] = if k < self.ng { 1.0 } else { 0.0 };
            }
            rhs.fill(0.0);
            rhs[0] = 1.0;
        }
        let x = solve_dense(l.clone(), &rhs, "reduced ground-state equations")?;
        let residual = (&l * &x - &rhs).norm().max(if closed {
            0.0
        } else {
            (&lhs_original * &x - &rhs_original).norm()
        });

        let rho_gg = hermitian::from_coords(self.ng, x.as_slice());
        let rho_ee = excited_per_unit(&self.v, &rho_gg, self.gamma_1, gt, self.fe)
            * C64::new(2.0 * geg * s, 0.0);
        // lowest-order optical coherence
        let rho_eg = &self.v * &rho_gg * (C64::new(0.0, -kappa) / C64::new(geg, -delta));
        let rho = DensityMatrix {
            rho_gg,
            rho_ee,
            rho_eg,
        };
        let pi_e = 2.0 * geg * s * self.excited_trace.dot(&x);
        debug_assert!((pi_e - excited_population(&rho)).abs() <= 1e-12 * pi_e.abs().max(1e-300));
        Ok(SteadyStateSolution {
            rho,
            pi_e,
            residual_norm: residual / rhs_original.norm().max(1.0),
        })
    }

    /// π_e only, skipping the density-matrix reconstruction.
    pub fn pi_e(&self, kappa: f64, delta_v: f64, gamma_eg: f64, omega_g: f64) -> Result<f64> {
        let u = self.gamma_r;
        let (kappa, delta, geg, omega) = (kappa / u, delta_v / u, gamma_eg / u, omega_g / u);
        let s = kappa * kappa / (geg * geg + delta * delta);
        let gt = self.gamma_transit;
        let mut l = &self.identity * gt;
        l += &self.zeeman * omega;
        l += &self.absorption_re * (s * geg);
        l += &self.absorption_im * (s * delta);
        l -= &self.feed * (2.0 * geg * s);
        let mut rhs = &self.isotropic * gt;
        if gt == 0.0 {
            for k in 0..l.ncols() {
                l[(0, k)] = if k < self.ng { 1.0 } else { 0.0 };
            }
            rhs.fill(0.0);
            rhs[0] = 1.0;
        }
        let x = solve_dense(l, &rhs, "reduced ground-state equations")?;
        Ok(2.0 * geg * s * self.excited_trace.dot(&x))
    }
}

/// ρ_ee per unit 2γ_eg·S: solves the excited-state line for a given ρ_gg.
fn excited_per_unit(
    v: &DMatrix<C64>,
    rho_gg: &DMatrix<C64>,
    gamma_1: f64,
    gamma_transit: f64,
    fe: AngularMomentum,
) -> DMatrix<C64> {
    let ne = fe.dim();
    let x = v * rho_gg * v.adjoint();
    let decay = gamma_transit + 1.0;
    let iso = x.trace() * (gamma_1 / (ne as f64 * decay));
    let mut out = x;
    for k in 0..ne {
        out[(k, k)] += iso;
    }
    out / C64::new(decay + gamma_1, 0.0)
}

/// Solves the reduced closed equations for one parameter point.
///
/// With Γ = 0 the homogeneous ground-state system is closed by Tr ρ_gg = 1.
pub fn reduced_numeric(params: &SystemParams) -> Result<SteadyStateSolution> {
    ReducedSystem::new(params)?.solve(params.kappa, params.delta_v, params.gamma_eg, params.omega_g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    #[test]
    fn linear_zero_collision_table_values() {
        let pc = analytic_coeffs(0.0, 0.0);
        assert_eq!(pc.n[0][0], 50.0);
        assert_eq!(pc.d[0][0], 85.0);
        assert_eq!(pc.n[2][0], 1200.0);
        assert_eq!(pc.d[2][0], 2112.0);
    }

    #[test]
    fn odd_entries_vanish() {
        for g in [0.0, 0.5, 3.0, 20.0] {
            for eps in [-FRAC_PI_4, -0.2, 0.0, FRAC_PI_8, FRAC_PI_4] {
                let pc = analytic_coeffs(g, eps);
                for i in 0..3 {
                    for j in 0..3 {
                        if (i + j) % 2 == 1 || i + j > 2 {
                            assert_eq!(pc.n[i][j], 0.0);
                            assert_eq!(pc.d[i][j], 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn linear_polarization_has_no_cross_terms() {
        for g in [0.0, 1.0, 7.5] {
            let pc = analytic_coeffs(g, 0.0);
            assert_eq!(pc.n[1][1], 0.0);
            assert_eq!(pc.d[1][1], 0.0);
        }
    }

    fn np(omega: f64, delta: f64, g: f64, eps: f64) -> NormalizedParams {
        NormalizedParams {
            omega,
            delta,
            gamma1_tilde: g,
            gamma_tilde: 0.0,
            epsilon: eps,
            saturation: 1e-3,
        }
    }

    #[test]
    fn center_and_wing_values() {
        assert_relative_eq!(analytic_pi_e(&np(0.0, 0.0, 0.0, 0.0)).unwrap(), 10.0 / 17.0, max_relative = 1e-15);
        let far = analytic_pi_e(&np(1e7, 0.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(far, 25.0 / 44.0, max_relative = 1e-12);
    }

    #[test]
    fn symmetric_when_linear_or_resonant() {
        for (d, eps) in [(1.3, 0.0), (0.0, 0.3), (-2.0, 0.0)] {
            for o in [0.1, 0.7, 3.0] {
                let a = analytic_pi_e(&np(o, d, 0.4, eps)).unwrap();
                let b = analytic_pi_e(&np(-o, d, 0.4, eps)).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn transit_relaxation_is_rejected_by_closed_form() {
        let mut p = np(0.0, 0.0, 0.0, 0.0);
        p.gamma_tilde = 0.5;
        assert!(matches!(analytic_pi_e(&p), Err(HanleError::UnsupportedRegime(_))));
    }

    #[test]
    fn linear_absorption_reference() {
        let mut p = SystemParams::one_to_two();
        assert_eq!(pi_e0(&p), 0.0);
        p.gamma_eg = 0.5;
        p.kappa = (0.01f64 * 0.25).sqrt();
        assert_relative_eq!(pi_e0(&p), 0.01, max_relative = 1e-14);
        p.gamma_transit = 1.0;
        p.gamma_eg = 1.5;
        p.kappa = (0.01f64 * 2.25).sqrt();
        let a = pi_e0(&p);
        p.gamma_transit = 2.0;
        assert!(pi_e0(&p) < a);
    }

    #[test]
    fn reduced_matches_closed_form() {
        for &(o, d, g, eps) in &[
            (0.0, 0.0, 0.0, 0.0),
            (1.0, 2.0, 0.0, FRAC_PI_8),
            (-1.0, 2.0, 0.0, FRAC_PI_8),
            (1.4, 4.0, 1.3, 0.7),
            (-4.0, -3.0, 0.4, 0.2),
            (0.3, 6.0, 10.0, PI / 5.0),
        ] {
            let n = np(o, d, g, eps);
            let p = n.to_system(1.0, 0.5).unwrap();
            let numeric = reduced_numeric(&p).unwrap();
            let ratio = numeric.pi_e / pi_e0(&p);
            let exact = analytic_pi_e(&n).unwrap();
            assert_relative_eq!(ratio, exact, max_relative = 1e-10);
            assert!(numeric.residual_norm < 1e-12);
        }
    }

    #[test]
    fn normalized_round_trip() {
        let n = NormalizedParams {
            omega: 0.7,
            delta: -1.2,
            gamma1_tilde: 2.0,
            gamma_tilde: 0.3,
            epsilon: 0.1,
            saturation: 0.004,
        };
        let p = n.to_system(2.0, 1.7).unwrap();
        let back = NormalizedParams::from_system(&p).unwrap();
        assert_relative_eq!(back.omega, n.omega, max_relative = 1e-13);
        assert_relative_eq!(back.delta, n.delta, max_relative = 1e-13);
        assert_relative_eq!(back.gamma_tilde, n.gamma_tilde, max_relative = 1e-13);
        assert_relative_eq!(back.saturation, n.saturation, max_relative = 1e-13);
        assert_relative_eq!(back.gamma1_tilde, n.gamma1_tilde, max_relative = 1e-13);
    }

    #[test]
    fn weak_light_with_transit_leaves_ground_isotropic() {
        let mut p = SystemParams::one_to_two();
        p.gamma_transit = 0.01;
        p.gamma_eg = 0.51;
        p.kappa = 1e-6;
        p.omega_g = 0.002;
        let sol = reduced_numeric(&p).unwrap();
        for i in 0..3 {
            assert_relative_eq!(sol.rho.rho_gg[(i, i)].re, 1.0 / 3.0, max_relative = 1e-8);
        }
        // unpumped linear absorption: Tr(V Π_g V†)/3 · 2γ_eg S/(γ_r+Γ)
        assert_relative_eq!(sol.pi_e / pi_e0(&p), 5.0 / 9.0, max_relative = 1e-6);
    }

    #[test]
    fn reduced_solution_is_consistent() {
        let mut p = SystemParams::one_to_two();
        p.kappa = 0.05;
        p.delta_v = 0.3;
        p.gamma_transit = 0.002;
        p.gamma_eg = 0.502;
        p.omega_g = 0.001;
        p.pol = Polarization::new(0.3).unwrap();
        let sol = reduced_numeric(&p).unwrap();
        assert!(sol.rho.hermiticity_error() < 1e-15);
        let fast = ReducedSystem::new(&p)
            .unwrap()
            .pi_e(p.kappa, p.delta_v, p.gamma_eg, p.omega_g)
            .unwrap();
        assert_relative_eq!(fast, sol.pi_e, max_relative = 1e-14);
        assert_relative_eq!(sol.pi_e, excited_population(&sol.rho), max_relative = 1e-13);
    }
}
