//! Angular-momentum algebra on the Zeeman basis of a two-level (Fg, Fe) atom.
//!
//! Every operator lives on the concatenated basis `|Fg, m⟩` (ascending m)
//! followed by `|Fe, m⟩` (ascending m). That ordering is part of the public
//! contract: serialized matrices from different versions line up.
//!
//! Half-integer projections are carried as twice their value (`twice_m`), so
//! `m = -3/2` is passed as `-3`.

use std::fmt;

use nalgebra::{DMatrix, Vector3};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{HanleError, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Total angular momentum F, stored as 2F so half-integers stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngularMomentum {
    twice_f: u32,
}

impl AngularMomentum {
    pub const fn from_twice(twice_f: u32) -> Self {
        Self { twice_f }
    }

    pub const fn integer(f: u32) -> Self {
        Self { twice_f: 2 * f }
    }

    /// Parses values like `1`, `2`, `1.5`, `3/2`.
    pub fn from_f64(f: f64) -> Result<Self> {
        let twice = 2.0 * f;
        if !(twice.is_finite() && twice >= 0.0 && (twice - twice.round()).abs() < 1e-9) {
            return Err(HanleError::Domain(format!(
                "angular momentum {f} is not a non-negative multiple of 1/2"
            )));
        }
        Ok(Self::from_twice(twice.round() as u32))
    }

    pub const fn twice(self) -> u32 {
        self.twice_f
    }

    pub fn value(self) -> f64 {
        self.twice_f as f64 / 2.0
    }

    /// Number of magnetic sublevels, 2F+1.
    pub const fn dim(self) -> usize {
        self.twice_f as usize + 1
    }

    /// `2m` for every sublevel in ascending order.
    pub fn twice_projections(self) -> impl Iterator<Item = i32> + Clone {
        let tf = self.twice_f as i32;
        (0..=self.twice_f as i32).map(move |k| -tf + 2 * k)
    }

    /// Row index of `|F, m⟩` inside this level's block.
    pub fn index_of(self, twice_m: i32) -> Option<usize> {
        let tf = self.twice_f as i32;
        if twice_m.abs() > tf || (twice_m + tf) % 2 != 0 {
            None
        } else {
            Some(((twice_m + tf) / 2) as usize)
        }
    }

    fn check_projection(self, twice_m: i32) -> Result<()> {
        self.index_of(twice_m).map(|_| ()).ok_or_else(|| {
            HanleError::Domain(format!(
                "projection m = {}/2 is not a sublevel of F = {}",
                twice_m, self
            ))
        })
    }
}

impl fmt::Display for AngularMomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice_f.is_multiple_of(2) {
            write!(f, "{}", self.twice_f / 2)
        } else {
            write!(f, "{}/2", self.twice_f)
        }
    }
}

/// Elliptical polarization of a running wave, parameterized by the
/// ellipticity angle ε (tan ε is the ratio of the ellipse semiaxes).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polarization {
    epsilon: f64,
}

impl Polarization {
    pub fn new(epsilon: f64) -> Result<Self> {
        let quarter = std::f64::consts::FRAC_PI_4;
        if !epsilon.is_finite() || epsilon.abs() > quarter * (1.0 + 1e-12) {
            return Err(HanleError::Domain(format!(
                "ellipticity {epsilon} outside [-pi/4, pi/4]"
            )));
        }
        Ok(Self { epsilon })
    }

    pub const fn linear() -> Self {
        Self { epsilon: 0.0 }
    }

    pub fn epsilon(self) -> f64 {
        self.epsilon
    }

    /// Weights `(e₊₁, e₋₁)` on the circular components:
    /// `cos(ε - π/4)` and `sin(ε - π/4)`.
    pub fn circular_weights(self) -> (f64, f64) {
        let phase = self.epsilon - std::f64::consts::FRAC_PI_4;
        (phase.cos(), phase.sin())
    }

    /// `c = cos 2ε`
    pub fn c(self) -> f64 {
        (2.0 * self.epsilon).cos()
    }

    /// `s = sin 2ε`, the degree of circular polarization.
    pub fn s(self) -> f64 {
        (2.0 * self.epsilon).sin()
    }

    /// Cartesian polarization vector in the wave frame:
    /// `e_x cos ε + i e_y sin ε`.
    pub fn cartesian(self) -> Vector3<C64> {
        Vector3::new(
            C64::new(self.epsilon.cos(), 0.0),
            C64::new(0.0, self.epsilon.sin()),
            ZERO,
        )
    }
}

impl Default for Polarization {
    fn default() -> Self {
        Self::linear()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Ground,
    Excited,
}

/// The concatenated Zeeman basis of a (Fg, Fe) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeemanBasis {
    pub fg: AngularMomentum,
    pub fe: AngularMomentum,
}

impl ZeemanBasis {
    pub fn new(fg: AngularMomentum, fe: AngularMomentum) -> Self {
        Self { fg, fe }
    }

    pub fn momentum(&self, level: Level) -> AngularMomentum {
        match level {
            Level::Ground => self.fg,
            Level::Excited => self.fe,
        }
    }

    pub fn offset(&self, level: Level) -> usize {
        match level {
            Level::Ground => 0,
            Level::Excited => self.fg.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.fg.dim() + self.fe.dim()
    }

    /// Full-basis index of `|level, m⟩`.
    pub fn index_of(&self, level: Level, twice_m: i32) -> Option<usize> {
        self.momentum(level)
            .index_of(twice_m)
            .map(|i| i + self.offset(level))
    }
}

/// A matrix on the full Zeeman basis (ground block first, then excited).
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    pub basis: ZeemanBasis,
    pub matrix: DMatrix<C64>,
}

impl Operator {
    pub fn zeros(basis: ZeemanBasis) -> Self {
        Self {
            basis,
            matrix: DMatrix::zeros(basis.dim(), basis.dim()),
        }
    }

    /// Embeds a `(dim a) x (dim b)` block at the (a, b) position.
    pub fn from_block(basis: ZeemanBasis, a: Level, b: Level, block: &DMatrix<C64>) -> Self {
        let mut op = Self::zeros(basis);
        let (ra, cb) = (basis.offset(a), basis.offset(b));
        op.matrix
            .view_mut((ra, cb), (block.nrows(), block.ncols()))
            .copy_from(block);
        op
    }

    pub fn block(&self, a: Level, b: Level) -> DMatrix<C64> {
        let (da, db) = (self.basis.momentum(a).dim(), self.basis.momentum(b).dim());
        self.matrix
            .view((self.basis.offset(a), self.basis.offset(b)), (da, db))
            .into_owned()
    }

    /// Projector Π_a on one level.
    pub fn projector(basis: ZeemanBasis, level: Level) -> Self {
        let d = basis.momentum(level).dim();
        Self::from_block(basis, level, level, &DMatrix::identity(d, d))
    }
}

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// ⟨j1 m1; j2 m2 | J M⟩ by the Racah sum, all arguments doubled.
///
/// The sum and the prefactor are kept as exact rationals; the only floating
/// point step is the final square root.
fn racah_cg(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tm1 + tm2 != tm {
        return 0.0;
    }
    if tj > tj1 + tj2 || tj < (tj1 - tj2).abs() || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    let half = |x: i64| -> i64 {
        debug_assert!(x % 2 == 0);
        x / 2
    };
    let a = half(tj + tj1 - tj2);
    let b = half(tj - tj1 + tj2);
    let c = half(tj1 + tj2 - tj);
    let d = half(tj1 + tj2 + tj) + 1;
    let jm = [
        half(tj + tm),
        half(tj - tm),
        half(tj1 - tm1),
        half(tj1 + tm1),
        half(tj2 - tm2),
        half(tj2 + tm2),
    ];

    let mut sum = BigRational::zero();
    for k in 0.. {
        let dens = [
            k,
            c - k,
            half(tj1 - tm1) - k,
            half(tj2 + tm2) - k,
            half(tj - tj2 + tm1) + k,
            half(tj - tj1 - tm2) + k,
        ];
        if dens[1] < 0 || dens[2] < 0 || dens[3] < 0 {
            break;
        }
        if dens[4] < 0 || dens[5] < 0 {
            continue;
        }
        let den = dens.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x));
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }

    let numer = BigInt::from(tj + 1)
        * factorial(a)
        * factorial(b)
        * factorial(c)
        * jm.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x));
    let squared = BigRational::new(numer, factorial(d)) * &sum * &sum;
    let magnitude = squared.to_f64().unwrap_or(f64::NAN).sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// `C^{F_a m_a}_{F_b m_b; 1 q}`, the amplitude of `|F_a m_a⟩` in
/// `|F_b m_b⟩ ⊗ |1 q⟩` (Condon-Shortley phases).
pub fn clebsch_gordan(
    f_a: AngularMomentum,
    twice_m_a: i32,
    f_b: AngularMomentum,
    twice_m_b: i32,
    q: i32,
) -> Result<f64> {
    f_a.check_projection(twice_m_a)?;
    f_b.check_projection(twice_m_b)?;
    if !(-1..=1).contains(&q) {
        return Err(HanleError::Domain(format!("q = {q} is not in {{-1, 0, 1}}")));
    }
    Ok(racah_cg(
        f_b.twice() as i64,
        twice_m_b as i64,
        2,
        2 * q as i64,
        f_a.twice() as i64,
        twice_m_a as i64,
    ))
}

fn check_dipole_pair(f_a: AngularMomentum, f_b: AngularMomentum) -> Result<()> {
    let (ta, tb) = (f_a.twice() as i64, f_b.twice() as i64);
    if (ta - tb).abs() > 2 || (ta - tb) % 2 != 0 {
        return Err(HanleError::Domain(format!(
            "F_a = {f_a} and F_b = {f_b} are not coupled by a rank-1 tensor"
        )));
    }
    Ok(())
}

/// Component q of the Wigner vector operator as a `(2F_a+1) x (2F_b+1)` block.
pub fn tensor_block(f_a: AngularMomentum, f_b: AngularMomentum, q: i32) -> Result<DMatrix<C64>> {
    check_dipole_pair(f_a, f_b)?;
    if !(-1..=1).contains(&q) {
        return Err(HanleError::Domain(format!("q = {q} is not in {{-1, 0, 1}}")));
    }
    let mut block = DMatrix::from_element(f_a.dim(), f_b.dim(), ZERO);
    for (i, tma) in f_a.twice_projections().enumerate() {
        for (j, tmb) in f_b.twice_projections().enumerate() {
            if tma == tmb + 2 * q {
                block[(i, j)] = C64::new(clebsch_gordan(f_a, tma, f_b, tmb, q)?, 0.0);
            }
        }
    }
    Ok(block)
}

/// The three tensor components indexed by `q + 1`.
pub(crate) fn tensor_blocks(
    f_a: AngularMomentum,
    f_b: AngularMomentum,
) -> Result<[DMatrix<C64>; 3]> {
    Ok([
        tensor_block(f_a, f_b, -1)?,
        tensor_block(f_a, f_b, 0)?,
        tensor_block(f_a, f_b, 1)?,
    ])
}

/// `T̂^{ab}_q` embedded in the full basis.
pub fn wigner_t(basis: ZeemanBasis, a: Level, b: Level, q: i32) -> Result<Operator> {
    let block = tensor_block(basis.momentum(a), basis.momentum(b), q)?;
    Ok(Operator::from_block(basis, a, b, &block))
}

/// Spherical components `(A₋₁, A₀, A₊₁)` of a complex Cartesian vector,
/// with `A±₁ = ∓(A_x ± i A_y)/√2`.
pub fn spherical_components(v: &Vector3<C64>) -> [C64; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let i = C64::i();
    [
        (v.x - i * v.y) * r,
        v.z,
        -(v.x + i * v.y) * r,
    ]
}

/// Scalar product `T·A = Σ_q (-1)^q T_q A_{-q}`.
fn contract(blocks: &[DMatrix<C64>; 3], v: &Vector3<C64>) -> DMatrix<C64> {
    let comps = spherical_components(v);
    let mut out = DMatrix::from_element(blocks[0].nrows(), blocks[0].ncols(), ZERO);
    for q in -1i32..=1 {
        let sign = if q == 0 { 1.0 } else { -1.0 };
        let weight = comps[(1 - q) as usize] * sign;
        out += &blocks[(q + 1) as usize] * weight;
    }
    out
}

/// The `e←g` block of V̂ for a polarization vector given in Cartesian
/// components of the lab frame.
///
/// The overall sign is fixed so that the wave-frame vector of
/// [`Polarization::cartesian`] reproduces [`coupling_block`] exactly.
pub fn coupling_block_for_vector(
    fg: AngularMomentum,
    fe: AngularMomentum,
    e: &Vector3<C64>,
) -> Result<DMatrix<C64>> {
    let blocks = tensor_blocks(fe, fg)?;
    Ok(-contract(&blocks, e))
}

/// `V̂ = e₊₁ T̂^{eg}_{+1} + e₋₁ T̂^{eg}_{-1}` as an `(2Fe+1) x (2Fg+1)` block.
pub fn coupling_block(
    fg: AngularMomentum,
    fe: AngularMomentum,
    pol: Polarization,
) -> Result<DMatrix<C64>> {
    let (plus, minus) = pol.circular_weights();
    let tp = tensor_block(fe, fg, 1)?;
    let tm = tensor_block(fe, fg, -1)?;
    Ok(tp * C64::new(plus, 0.0) + tm * C64::new(minus, 0.0))
}

pub fn coupling_operator(basis: ZeemanBasis, pol: Polarization) -> Result<Operator> {
    let block = coupling_block(basis.fg, basis.fe, pol)?;
    Ok(Operator::from_block(basis, Level::Excited, Level::Ground, &block))
}

fn check_unit(b: &Vector3<f64>) -> Result<()> {
    let n = b.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
        return Err(HanleError::Domain(format!(
            "magnetic field direction has norm {n}, expected 1"
        )));
    }
    Ok(())
}

/// `F̂_b = √(F(F+1)) T̂^{aa}·b` on a single level.
pub fn magnetic_block(f: AngularMomentum, b: &Vector3<f64>) -> Result<DMatrix<C64>> {
    check_unit(b)?;
    let d = f.dim();
    if f.twice() == 0 {
        return Ok(DMatrix::from_element(d, d, ZERO));
    }
    let ff = f.value();
    let scale = (ff * (ff + 1.0)).sqrt();
    let blocks = tensor_blocks(f, f)?;
    let bc = b.map(|x| C64::new(x, 0.0));
    Ok(contract(&blocks, &bc) * C64::new(scale, 0.0))
}

pub fn magnetic_projection(basis: ZeemanBasis, level: Level, b: &Vector3<f64>) -> Result<Operator> {
    let block = magnetic_block(basis.momentum(level), b)?;
    Ok(Operator::from_block(basis, level, level, &block))
}
