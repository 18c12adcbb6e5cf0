//! Steady state of the generalized optical Bloch equations for an arbitrary
//! (Fg, Fe) pair, field direction and saturation.
//!
//! The density matrix is split into ground, excited and (slowly varying)
//! optical-coherence blocks. At steady state the equations read
//!
//! ```text
//! (γ_eg - iδ) ρ_eg + iκ(V ρ_gg - ρ_ee V) + i(Ω_e F_e ρ_eg - ρ_eg Ω_g F_g)       = 0
//! (Γ + γ_r) ρ_ee + γ_coll{ρ_ee} + iκ(V ρ_ge - ρ_eg V†) + iΩ_e[F_e, ρ_ee]       = 0
//! Γ ρ_gg - G{ρ_ee} + iκ(V† ρ_eg - ρ_ge V) + iΩ_g[F_g, ρ_gg]                    = Γ Π_g/(2Fg+1)
//! ```
//!
//! with ρ_ge = ρ_eg†. Unknowns are the real coordinates of the Hermitian
//! blocks plus `(Re, Im)` of ρ_eg, so the linear system is real and the
//! solution is Hermitian by construction.

mod params;

pub use params::{natural_dephasing, SystemParams, DEFAULT_MAX_SUBLEVELS};

use nalgebra::{DMatrix, DVector};

use crate::angular::{
    coupling_block_for_vector, magnetic_block, tensor_blocks, AngularMomentum, Level, Operator,
    ZeemanBasis, C64,
};
use crate::error::{HanleError, Result};
use crate::hermitian;

/// Block-structured density matrix. `rho_eg` holds the slowly varying
/// optical coherences; `rho_ge` is its adjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub rho_gg: DMatrix<C64>,
    pub rho_ee: DMatrix<C64>,
    pub rho_eg: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn zeros(basis: ZeemanBasis) -> Self {
        let (ng, ne) = (basis.fg.dim(), basis.fe.dim());
        let z = C64::new(0.0, 0.0);
        Self {
            rho_gg: DMatrix::from_element(ng, ng, z),
            rho_ee: DMatrix::from_element(ne, ne, z),
            rho_eg: DMatrix::from_element(ne, ng, z),
        }
    }

    /// Isotropic ground state Π_g/(2Fg+1), nothing excited.
    pub fn isotropic_ground(basis: ZeemanBasis) -> Self {
        let mut rho = Self::zeros(basis);
        let ng = basis.fg.dim();
        rho.rho_gg = DMatrix::identity(ng, ng) * C64::new(1.0 / ng as f64, 0.0);
        rho
    }

    pub fn rho_ge(&self) -> DMatrix<C64> {
        self.rho_eg.adjoint()
    }

    pub fn basis(&self) -> ZeemanBasis {
        ZeemanBasis::new(
            AngularMomentum::from_twice(self.rho_gg.nrows() as u32 - 1),
            AngularMomentum::from_twice(self.rho_ee.nrows() as u32 - 1),
        )
    }

    pub fn ground_population(&self) -> f64 {
        self.rho_gg.trace().re
    }

    pub fn total_population(&self) -> f64 {
        self.rho_gg.trace().re + self.rho_ee.trace().re
    }

    /// Largest Frobenius-norm deviation from Hermiticity of the two
    /// population blocks.
    pub fn hermiticity_error(&self) -> f64 {
        hermitian::anti_hermiticity(&self.rho_gg).max(hermitian::anti_hermiticity(&self.rho_ee))
    }

    /// The full matrix on the concatenated basis.
    pub fn to_operator(&self) -> Operator {
        let basis = self.basis();
        let mut op = Operator::from_block(basis, Level::Ground, Level::Ground, &self.rho_gg);
        let (og, oe) = (basis.offset(Level::Ground), basis.offset(Level::Excited));
        let (ng, ne) = (basis.fg.dim(), basis.fe.dim());
        op.matrix.view_mut((oe, oe), (ne, ne)).copy_from(&self.rho_ee);
        op.matrix.view_mut((oe, og), (ne, ng)).copy_from(&self.rho_eg);
        op.matrix.view_mut((og, oe), (ng, ne)).copy_from(&self.rho_ge());
        op
    }
}

/// π_e = Tr ρ_ee.
pub fn excited_population(rho: &DensityMatrix) -> f64 {
    rho.rho_ee.trace().re
}

#[derive(Clone, Debug)]
pub struct SteadyStateSolution {
    pub rho: DensityMatrix,
    /// Total excited-state population.
    pub pi_e: f64,
    pub residual_norm: f64,
}

/// Repopulation of the ground level by spontaneous decay,
/// `G{ρ_ee} = β γ_r Σ_q T^{eg†}_q ρ_ee T^{eg}_q`.
pub fn spontaneous_transfer(
    rho_ee: &DMatrix<C64>,
    fg: AngularMomentum,
    fe: AngularMomentum,
    beta: f64,
    gamma_r: f64,
) -> Result<DMatrix<C64>> {
    let t = tensor_blocks(fe, fg)?;
    Ok(spontaneous_with(&t, rho_ee, beta * gamma_r))
}

fn spontaneous_with(t: &[DMatrix<C64>; 3], rho_ee: &DMatrix<C64>, rate: f64) -> DMatrix<C64> {
    let mut out = t[0].adjoint() * rho_ee * &t[0];
    out += t[1].adjoint() * rho_ee * &t[1];
    out += t[2].adjoint() * rho_ee * &t[2];
    out * C64::new(rate, 0.0)
}

/// Isotropic collisional relaxation of all excited-state multipoles except
/// the population: `γ₁[ρ_ee - Π_e Tr(ρ_ee)/(2Fe+1)]`. Traceless.
pub fn collisional_depolarization(
    rho_ee: &DMatrix<C64>,
    gamma_1: f64,
    fe: AngularMomentum,
) -> DMatrix<C64> {
    let ne = fe.dim();
    let mean = rho_ee.trace() / ne as f64;
    let mut out = rho_ee * C64::new(gamma_1, 0.0);
    let mut partial = C64::new(0.0, 0.0);
    for i in 0..ne {
        if i + 1 == ne {
            // closes the diagonal so that `trace()` (summed in index order) is exactly zero
            out[(i, i)] = -partial;
        } else {
            out[(i, i)] = (rho_ee[(i, i)] - mean) * gamma_1;
            partial += out[(i, i)];
        }
    }
    out
}

fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

/// Left-hand sides of the four block equations (source term excluded).
#[derive(Clone, Debug)]
pub struct GobeBlocks {
    pub gg: DMatrix<C64>,
    pub ee: DMatrix<C64>,
    pub eg: DMatrix<C64>,
    pub ge: DMatrix<C64>,
}

/// The steady-state Bloch operator for one parameter point, in units of γ_r.
#[derive(Clone, Debug)]
pub struct GobeOperator {
    params: SystemParams,
    t: [DMatrix<C64>; 3],
    v: DMatrix<C64>,
    fg_b: DMatrix<C64>,
    fe_b: DMatrix<C64>,
}

impl GobeOperator {
    pub fn new(params: &SystemParams) -> Result<Self> {
        Self::with_cap(params, DEFAULT_MAX_SUBLEVELS)
    }

    pub fn with_cap(params: &SystemParams, max_sublevels: usize) -> Result<Self> {
        params.validate()?;
        params.check_cap(max_sublevels)?;
        let p = params.in_radiative_units();
        let t = tensor_blocks(p.fe, p.fg)?;
        let v = coupling_block_for_vector(p.fg, p.fe, &p.lab_polarization())?;
        let fg_b = magnetic_block(p.fg, &p.b_direction)?;
        let fe_b = magnetic_block(p.fe, &p.b_direction)?;
        Ok(Self {
            params: p,
            t,
            v,
            fg_b,
            fe_b,
        })
    }

    /// Parameters in units of γ_r.
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Applies the block equations to an arbitrary density matrix. The
    /// ρ_ge equation is evaluated from its own form, not as an adjoint.
    pub fn apply(&self, rho: &DensityMatrix) -> GobeBlocks {
        let p = &self.params;
        let i = C64::i();
        let kappa = C64::new(p.kappa, 0.0);
        let (og, oe) = (p.omega_g, p.omega_e());
        let v = &self.v;
        let vd = v.adjoint();
        let rho_ge = rho.rho_ge();

        let mut gg = &rho.rho_gg * C64::new(p.gamma_transit, 0.0);
        gg -= spontaneous_with(&self.t, &rho.rho_ee, p.beta * p.gamma_r);
        gg += (&vd * &rho.rho_eg - &rho_ge * v) * (i * kappa);
        gg += commutator(&self.fg_b, &rho.rho_gg) * (i * og);

        let mut ee = &rho.rho_ee * C64::new(p.gamma_transit + p.gamma_r, 0.0);
        ee += collisional_depolarization(&rho.rho_ee, p.gamma_1, p.fe);
        ee += (v * &rho_ge - &rho.rho_eg * &vd) * (i * kappa);
        ee += commutator(&self.fe_b, &rho.rho_ee) * (i * oe);

        let mut eg = &rho.rho_eg * C64::new(p.gamma_eg, -p.delta_v);
        eg += (v * &rho.rho_gg - &rho.rho_ee * v) * (i * kappa);
        eg += (&self.fe_b * &rho.rho_eg * (i * oe)) - (&rho.rho_eg * &self.fg_b * (i * og));

        let mut ge = &rho_ge * C64::new(p.gamma_eg, p.delta_v);
        ge += (&vd * &rho.rho_ee - &rho.rho_gg * &vd) * (i * kappa);
        ge += (&self.fg_b * &rho_ge * (i * og)) - (&rho_ge * &self.fe_b * (i * oe));

        GobeBlocks { gg, ee, eg, ge }
    }

    fn layout(&self) -> Layout {
        Layout {
            ng: self.params.fg.dim(),
            ne: self.params.fe.dim(),
        }
    }
}

/// Offsets of the three blocks in the real unknown vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub ng: usize,
    pub ne: usize,
}

impl Layout {
    pub fn gg(&self) -> std::ops::Range<usize> {
        0..hermitian::len(self.ng)
    }
    pub fn ee(&self) -> std::ops::Range<usize> {
        let s = hermitian::len(self.ng);
        s..s + hermitian::len(self.ne)
    }
    pub fn eg(&self) -> std::ops::Range<usize> {
        let s = self.ee().end;
        s..s + 2 * self.ng * self.ne
    }
    pub fn len(&self) -> usize {
        self.eg().end
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unpack(&self, x: &[f64]) -> DensityMatrix {
        DensityMatrix {
            rho_gg: hermitian::from_coords(self.ng, &x[self.gg()]),
            rho_ee: hermitian::from_coords(self.ne, &x[self.ee()]),
            rho_eg: hermitian::complex_from(self.ne, self.ng, &x[self.eg()]),
        }
    }

    pub fn pack(&self, rho: &DensityMatrix) -> DVector<f64> {
        let mut x = DVector::zeros(self.len());
        hermitian::write_coords(&rho.rho_gg, &mut x.as_mut_slice()[self.gg()]);
        hermitian::write_coords(&rho.rho_ee, &mut x.as_mut_slice()[self.ee()]);
        hermitian::write_complex(&rho.rho_eg, &mut x.as_mut_slice()[self.eg()]);
        x
    }

    fn pack_equations(&self, b: &GobeBlocks, out: &mut [f64]) {
        hermitian::write_coords(&b.gg, &mut out[self.gg()]);
        hermitian::write_coords(&b.ee, &mut out[self.ee()]);
        hermitian::write_complex(&b.eg, &mut out[self.eg()]);
    }
}

/// The vectorized steady-state system `L x = s`, rates in units of γ_r.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub matrix: DMatrix<f64>,
    pub source: DVector<f64>,
    pub layout: Layout,
}

pub fn build_liouvillian(params: &SystemParams) -> Result<Liouvillian> {
    build_liouvillian_capped(params, DEFAULT_MAX_SUBLEVELS)
}

pub fn build_liouvillian_capped(params: &SystemParams, max_sublevels: usize) -> Result<Liouvillian> {
    let op = GobeOperator::with_cap(params, max_sublevels)?;
    let layout = op.layout();
    let n = layout.len();
    let mut matrix = DMatrix::zeros(n, n);
    let mut column = vec![0.0; n];
    let mut unit = vec![0.0; n];
    for k in 0..n {
        unit[k] = 1.0;
        let out = op.apply(&layout.unpack(&unit));
        layout.pack_equations(&out, &mut column);
        matrix.column_mut(k).copy_from_slice(&column);
        unit[k] = 0.0;
    }
    let mut rho0 = DensityMatrix::isotropic_ground(params.basis());
    rho0.rho_gg *= C64::new(op.params().gamma_transit, 0.0);
    let source = layout.pack(&rho0);
    Ok(Liouvillian {
        matrix,
        source,
        layout,
    })
}

/// Solves a square system by LU with partial pivoting, rejecting
/// numerically singular matrices.
pub(crate) fn solve_dense(matrix: DMatrix<f64>, rhs: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    let lu = matrix.lu();
    let u = lu.u();
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if max.is_nan() || max <= 0.0 || min <= max * 1e-13 {
        return Err(HanleError::Singular(format!(
            "{what}: pivot ratio {:.3e}",
            if max > 0.0 { min / max } else { 0.0 }
        )));
    }
    lu.solve(rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| HanleError::Singular(what.to_string()))
}

pub fn steady_state(params: &SystemParams) -> Result<SteadyStateSolution> {
    steady_state_capped(params, DEFAULT_MAX_SUBLEVELS)
}

/// With Γ > 0 the inhomogeneous system is solved as is. With Γ = 0 and a
/// closed transition the ground-population equation of `m = -Fg` is replaced
/// by `Tr ρ_gg + Tr ρ_ee = 1`.
pub fn steady_state_capped(params: &SystemParams, max_sublevels: usize) -> Result<SteadyStateSolution> {
    let lv = build_liouvillian_capped(params, max_sublevels)?;
    let layout = lv.layout;
    let closed = params.gamma_transit == 0.0;
    if closed && params.beta < 1.0 {
        return Err(HanleError::NoSteadyState);
    }

    let mut trace_row = DVector::zeros(layout.len());
    for k in 0..layout.ng {
        trace_row[layout.gg().start + k] = 1.0;
    }
    for k in 0..layout.ne {
        trace_row[layout.ee().start + k] = 1.0;
    }

    let (mut matrix, mut rhs) = (lv.matrix.clone(), lv.source.clone());
    if closed {
        matrix.row_mut(0).copy_from(&trace_row.transpose());
        rhs.fill(0.0);
        rhs[0] = 1.0;
    }
    let x = solve_dense(matrix, &rhs, "Bloch equations")?;

    let mut residual = (&lv.matrix * &x - &lv.source).norm_squared();
    if closed {
        residual += (trace_row.dot(&x) - 1.0).powi(2);
    }
    let residual_norm = residual.sqrt() / lv.source.norm().max(1.0);

    let rho = layout.unpack(x.as_slice());
    Ok(SteadyStateSolution {
        pi_e: excited_population(&rho),
        rho,
        residual_norm,
    })
}
