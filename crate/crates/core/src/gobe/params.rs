use nalgebra::{Rotation3, Vector3};

use crate::angular::{AngularMomentum, Polarization, ZeemanBasis};
use crate::error::{HanleError, Result};

/// Default cap on the number of sublevels of either level.
pub const DEFAULT_MAX_SUBLEVELS: usize = 21;

/// Every physical input of the Bloch equations in one bundle.
///
/// Rates may be given in any consistent unit; solvers rescale internally so
/// that `gamma_r = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub fg: AngularMomentum,
    pub fe: AngularMomentum,
    /// Fraction of radiative decay returning to the ground level.
    pub beta: f64,
    /// Rabi coupling κ.
    pub kappa: f64,
    /// Detuning δ_v = ω - ω_eg - kv.
    pub delta_v: f64,
    pub gamma_r: f64,
    /// Excited-state collisional depolarization rate γ₁.
    pub gamma_1: f64,
    /// Optical coherence dephasing γ_eg.
    pub gamma_eg: f64,
    /// Transit relaxation Γ towards the isotropic ground state.
    pub gamma_transit: f64,
    /// Ground-state Zeeman splitting Ω_g.
    pub omega_g: f64,
    /// g_e / g_g, so Ω_e = ratio × Ω_g.
    pub excited_g_ratio: f64,
    pub b_direction: Vector3<f64>,
    pub pol: Polarization,
    /// Orientation of the wave frame (ellipse axes along x, y; k along z)
    /// relative to the frame `b_direction` is written in.
    pub wave_frame: Rotation3<f64>,
}

/// γ_eg = γ_r/2 + Γ, valid when collisions are negligible.
pub fn natural_dephasing(gamma_r: f64, gamma_transit: f64) -> f64 {
    gamma_r / 2.0 + gamma_transit
}

impl SystemParams {
    /// Closed transition with no light, no field, radiative relaxation only.
    pub fn new(fg: AngularMomentum, fe: AngularMomentum) -> Self {
        Self {
            fg,
            fe,
            beta: 1.0,
            kappa: 0.0,
            delta_v: 0.0,
            gamma_r: 1.0,
            gamma_1: 0.0,
            gamma_eg: 0.5,
            gamma_transit: 0.0,
            omega_g: 0.0,
            excited_g_ratio: 1.0,
            b_direction: Vector3::z(),
            pol: Polarization::linear(),
            wave_frame: Rotation3::identity(),
        }
    }

    /// The Fg = 1 → Fe = 2 transition.
    pub fn one_to_two() -> Self {
        Self::new(AngularMomentum::integer(1), AngularMomentum::integer(2))
    }

    /// Sets γ_eg from γ_r and Γ. Only meaningful without collisions.
    pub fn with_natural_dephasing(mut self) -> Result<Self> {
        if self.gamma_1 != 0.0 {
            return Err(HanleError::InvalidParams(
                "gamma_eg = gamma_r/2 + Gamma assumes gamma_1 = 0".into(),
            ));
        }
        self.gamma_eg = natural_dephasing(self.gamma_r, self.gamma_transit);
        Ok(self)
    }

    pub fn basis(&self) -> ZeemanBasis {
        ZeemanBasis::new(self.fg, self.fe)
    }

    pub fn omega_e(&self) -> f64 {
        self.omega_g * self.excited_g_ratio
    }

    /// S = κ² / (γ_eg² + δ_v²).
    pub fn saturation(&self) -> f64 {
        self.kappa * self.kappa / (self.gamma_eg * self.gamma_eg + self.delta_v * self.delta_v)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HanleError::InvalidParams(msg));
        let rates = [
            ("gamma_r", self.gamma_r),
            ("gamma_1", self.gamma_1),
            ("gamma_eg", self.gamma_eg),
            ("gamma_transit", self.gamma_transit),
        ];
        for (name, v) in rates {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("delta_v", self.delta_v),
            ("omega_g", self.omega_g),
            ("excited_g_ratio", self.excited_g_ratio),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} = {v} must be finite"));
            }
        }
        if self.gamma_r <= 0.0 {
            return bad("gamma_r must be positive".into());
        }
        if self.gamma_eg <= 0.0 {
            return bad("gamma_eg must be positive".into());
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad(format!("beta = {} outside (0, 1]", self.beta));
        }
        if self.gamma_1 == 0.0 && self.gamma_eg < self.gamma_r / 2.0 * (1.0 - 1e-12) {
            return bad(format!(
                "gamma_eg = {} below gamma_r/2 = {} without collisions",
                self.gamma_eg,
                self.gamma_r / 2.0
            ));
        }
        let (tg, te) = (self.fg.twice() as i64, self.fe.twice() as i64);
        if (tg - te).abs() > 2 || (tg - te) % 2 != 0 || (tg == 0 && te == 0) {
            return bad(format!(
                "Fg = {} -> Fe = {} is not a dipole transition",
                self.fg, self.fe
            ));
        }
        let n = self.b_direction.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(HanleError::Domain(format!(
                "b_direction has norm {n}, expected a unit vector"
            )));
        }
        Ok(())
    }

    pub(crate) fn check_cap(&self, cap: usize) -> Result<()> {
        for f in [self.fg, self.fe] {
            if f.dim() > cap {
                return Err(HanleError::DimensionCap {
                    sublevels: f.dim(),
                    cap,
                });
            }
        }
        Ok(())
    }

    /// Copy with every rate divided by γ_r.
    pub(crate) fn in_radiative_units(&self) -> Self {
        let u = self.gamma_r;
        Self {
            kappa: self.kappa / u,
            delta_v: self.delta_v / u,
            gamma_r: 1.0,
            gamma_1: self.gamma_1 / u,
            gamma_eg: self.gamma_eg / u,
            gamma_transit: self.gamma_transit / u,
            omega_g: self.omega_g / u,
            ..self.clone()
        }
    }

    /// Lab-frame polarization vector.
    pub(crate) fn lab_polarization(&self) -> Vector3<crate::angular::C64> {
        let e = self.pol.cartesian();
        let re = self.wave_frame * e.map(|z| z.re);
        let im = self.wave_frame * e.map(|z| z.im);
        Vector3::from_fn(|i, _| crate::angular::C64::new(re[i], im[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SystemParams::one_to_two().validate().unwrap();
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut p = SystemParams::one_to_two();
        p.gamma_transit = -1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::one_to_two();
        p.beta = 0.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::one_to_two();
        p.b_direction = Vector3::new(0.0, 0.0, 2.0);
        assert!(matches!(p.validate(), Err(HanleError::Domain(_))));
        let mut p = SystemParams::one_to_two();
        p.fe = AngularMomentum::integer(3);
        assert!(p.validate().is_err());
        let mut p = SystemParams::one_to_two();
        p.gamma_eg = 0.3;
        assert!(p.validate().is_err());
        p.gamma_1 = 1.0;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn natural_dephasing_helper() {
        let mut p = SystemParams::one_to_two();
        p.gamma_transit = 0.001;
        let p = p.with_natural_dephasing().unwrap();
        assert!((p.gamma_eg - 0.501).abs() < 1e-15);
        let mut q = p.clone();
        q.gamma_1 = 0.2;
        assert!(q.with_natural_dephasing().is_err());
    }

    #[test]
    fn saturation_parameter() {
        let mut p = SystemParams::one_to_two();
        p.kappa = 0.1;
        p.gamma_eg = 1.0;
        p.delta_v = 1.0;
        assert!((p.saturation() - 0.005).abs() < 1e-15);
    }
}
