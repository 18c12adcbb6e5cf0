//! Generalized-Lorentzian description of Hanle resonances:
//!
//! ```text
//! y(Ω_g) = A w²/((Ω_g-Ω₀)² + w²) + B w(Ω_g-Ω₀)/((Ω_g-Ω₀)² + w²) + C
//! ```

use nalgebra::{DMatrix, DVector, Matrix5, Vector5};

use crate::error::{HanleError, Result};
use crate::reduced::{analytic_coeffs, PolyCoeffs};
use crate::scan::ScanResult;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianParams {
    /// Symmetric amplitude.
    pub a: f64,
    /// Antisymmetric (dispersive) amplitude.
    pub b: f64,
    /// Background.
    pub c_bg: f64,
    pub omega0: f64,
    pub w: f64,
}

impl LorentzianParams {
    /// Converts closed-form parameters (signal in units of π_e⁽⁰⁾, field in
    /// units of γ_eg·S) to absolute units.
    pub fn scaled(&self, signal_unit: f64, field_unit: f64) -> Self {
        Self {
            a: self.a * signal_unit,
            b: self.b * signal_unit,
            c_bg: self.c_bg * signal_unit,
            omega0: self.omega0 * field_unit,
            w: self.w * field_unit,
        }
    }

    pub fn kind(&self) -> ResonanceKind {
        ResonanceKind::of_amplitude(self.a)
    }
}

/// Sign of the symmetric amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResonanceKind {
    /// A > 0: absorption peak.
    Eia,
    /// A < 0: absorption dip.
    Eit,
    /// A = 0 exactly.
    Null,
}

impl ResonanceKind {
    pub fn of_amplitude(a: f64) -> Self {
        if a > 0.0 {
            Self::Eia
        } else if a < 0.0 {
            Self::Eit
        } else {
            Self::Null
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Eia => "EIA",
            Self::Eit => "EIT",
            Self::Null => "none",
        }
    }
}

/// Exact Lorentzian parameters of the closed-form rational lineshape at
/// normalized detuning Δ. Amplitudes are in units of π_e⁽⁰⁾, Ω₀ and w in
/// units of γ_eg·S.
pub fn lorentzian_from_coeffs(pc: &PolyCoeffs, delta: f64) -> Result<LorentzianParams> {
    let [n0, n1, n2] = pc.numerator(delta);
    let [d0, d1, d2] = pc.denominator(delta);
    let disc = 4.0 * d0 * d2 - d1 * d1;
    if d2 == 0.0 || disc.is_nan() || disc <= 0.0 {
        return Err(HanleError::DegenerateResonance(disc));
    }
    let root = disc.sqrt();
    Ok(LorentzianParams {
        a: 2.0 * (2.0 * n0 * d2 * d2 + n2 * d1 * d1 - n1 * d1 * d2 - 2.0 * n2 * d0 * d2)
            / (d2 * disc),
        b: 2.0 * (n1 * d2 - n2 * d1) / (d2 * root),
        c_bg: n2 / d2,
        omega0: -d1 / (2.0 * d2),
        w: root / (2.0 * d2.abs()),
    })
}

pub fn eval_lorentzian(lp: &LorentzianParams, omega_g: f64) -> f64 {
    let u = omega_g - lp.omega0;
    let den = u * u + lp.w * lp.w;
    (lp.a * lp.w * lp.w + lp.b * lp.w * u) / den + lp.c_bg
}

/// ∂y/∂(A, B, C, Ω₀, w).
fn gradient(lp: &LorentzianParams, x: f64) -> Vector5<f64> {
    let (w, u) = (lp.w, x - lp.omega0);
    let den = u * u + w * w;
    let den2 = den * den;
    let l = w * w / den;
    let k = w * u / den;
    let dl_do = 2.0 * u * w * w / den2;
    let dk_do = w * (u * u - w * w) / den2;
    let dl_dw = 2.0 * w * u * u / den2;
    let dk_dw = u * (u * u - w * w) / den2;
    Vector5::new(
        l,
        k,
        1.0,
        lp.a * dl_do + lp.b * dk_do,
        lp.a * dl_dw + lp.b * dk_dw,
    )
}

fn from_vec(p: &Vector5<f64>) -> LorentzianParams {
    LorentzianParams {
        a: p[0],
        b: p[1],
        c_bg: p[2],
        omega0: p[3],
        w: p[4],
    }
}

fn to_vec(lp: &LorentzianParams) -> Vector5<f64> {
    Vector5::new(lp.a, lp.b, lp.c_bg, lp.omega0, lp.w)
}

/// Result of a least-squares fit. `converged = false` still carries the
/// best parameters found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOutcome {
    pub params: LorentzianParams,
    /// RMS residual over the RMS deviation of the data from its mean.
    pub goodness: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub const FIT_MIN_SAMPLES: usize = 7;
const FIT_MAX_ITERATIONS: usize = 500;

/// Discrete starting point: wing mean, extremum, half-height crossing.
pub fn initial_estimate(x: &[f64], y: &[f64]) -> LorentzianParams {
    let n = x.len();
    let wing = (n / 10).max(1);
    let c = (y[..wing].iter().sum::<f64>() + y[n - wing..].iter().sum::<f64>()) / (2 * wing) as f64;
    let (imax, _) = y
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, v)| {
            let d = (v - c).abs();
            if d > best.1 {
                (i, d)
            } else {
                best
            }
        });
    let a = y[imax] - c;
    let half = a.abs() / 2.0;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            if (y[i] - c).abs() < half {
                let (y0, y1) = ((y[prev] - c).abs(), (y[i] - c).abs());
                let t = if y0 != y1 { (y0 - half) / (y0 - y1) } else { 0.5 };
                return Some(x[prev] + t * (x[i] - x[prev]));
            }
            prev = i;
        }
        None
    };
    let right = crossing(&mut ((imax + 1)..n));
    let left = crossing(&mut (0..imax).rev());
    let span = x[n - 1] - x[0];
    let w = match (left, right) {
        (Some(l), Some(r)) => (r - l) / 2.0,
        (Some(l), None) => x[imax] - l,
        (None, Some(r)) => r - x[imax],
        (None, None) => span / 10.0,
    };
    LorentzianParams {
        a,
        b: 0.0,
        c_bg: c,
        omega0: x[imax],
        w: if w > 0.0 { w } else { span / 10.0 },
    }
}

/// Levenberg–Marquardt fit of the generalized Lorentzian to sampled data.
pub fn fit_lorentzian(scan: &ScanResult) -> Result<FitOutcome> {
    fit_samples(&scan.omega_g_grid, &scan.signal)
}

pub fn fit_samples(x: &[f64], y: &[f64]) -> Result<FitOutcome> {
    if x.len() != y.len() {
        return Err(HanleError::FitInput(format!(
            "{} abscissae but {} samples",
            x.len(),
            y.len()
        )));
    }
    if x.len() < FIT_MIN_SAMPLES {
        return Err(HanleError::FitInput(format!(
            "need at least {FIT_MIN_SAMPLES} samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(HanleError::FitInput("non-finite sample".into()));
    }
    // work on a unit-scaled copy
    let x_mid = 0.5 * (x[0] + x[x.len() - 1]);
    let x_scale = (x[x.len() - 1] - x[0]).abs().max(f64::MIN_POSITIVE) / 2.0;
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let y_spread = y.iter().map(|v| (v - y_mean).abs()).fold(0.0, f64::max);
    let y_scale = if y_spread > 0.0 { y_spread } else { y_mean.abs().max(1.0) };
    let xs: Vec<f64> = x.iter().map(|v| (v - x_mid) / x_scale).collect();
    let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_scale).collect();

    let n = xs.len();
    let residuals = |p: &Vector5<f64>| -> DVector<f64> {
        let lp = from_vec(p);
        DVector::from_fn(n, |i, _| eval_lorentzian(&lp, xs[i]) - ys[i])
    };
    let mut p = to_vec(&initial_estimate(&xs, &ys));
    let mut r = residuals(&p);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        let lp = from_vec(&p);
        let jac = DMatrix::from_fn(n, 5, |i, k| gradient(&lp, xs[i])[k]);
        let jtj: Matrix5<f64> = (jac.transpose() * &jac).fixed_view::<5, 5>(0, 0).into_owned();
        let jtr: Vector5<f64> = (jac.transpose() * &r).fixed_rows::<5>(0).into_owned();
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for k in 0..5 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let trial_r = residuals(&trial);
            let trial_cost = trial_r.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let small_step = step.norm() <= 1e-12 * (p.norm() + 1e-12);
                let small_gain = cost - trial_cost <= 1e-15 * cost.max(1e-300);
                p = trial;
                r = trial_r;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if small_step || small_gain || cost <= 1e-30 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no descent direction left: the current point is stationary
            converged = jtr.norm() <= 1e-8 * (cost.sqrt() + 1e-12) || cost <= 1e-28;
            break;
        }
        if converged {
            break;
        }
    }

    let mut fit = from_vec(&p);
    fit.w = fit.w.abs();
    if fit.w == 0.0 {
        converged = false;
    }
    let spread = (ys.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let goodness = if spread > 0.0 {
        (cost / n as f64).sqrt() / spread
    } else {
        (cost / n as f64).sqrt()
    };
    if fit.w > 0.0 && (xs[n - 1] - xs[0]) < 4.0 * fit.w {
        log::warn!("fit grid spans fewer than four widths; parameters are poorly constrained");
    }
    // a reflected width flips the sign of the dispersive term
    if p[4] < 0.0 {
        fit.b = -fit.b;
    }
    let params = LorentzianParams {
        a: fit.a * y_scale,
        b: fit.b * y_scale,
        c_bg: fit.c_bg * y_scale + y_mean,
        omega0: fit.omega0 * x_scale + x_mid,
        w: fit.w * x_scale,
    };
    if !converged {
        log::warn!("Lorentzian fit did not converge after {iterations} iterations");
    }
    Ok(FitOutcome {
        params,
        goodness,
        converged,
        iterations,
    })
}

/// Search range and sampling for [`sign_reversal_gamma1`].
pub const REVERSAL_RANGE: (f64, f64) = (0.0, 20.0);
const REVERSAL_SAMPLES: usize = 2000;

fn amplitude(g1: f64, epsilon: f64, delta: f64) -> Result<f64> {
    Ok(lorentzian_from_coeffs(&analytic_coeffs(g1, epsilon), delta)?.a)
}

/// The collision rate γ̃₁ at which the closed-form amplitude A changes sign.
pub fn sign_reversal_gamma1(epsilon: f64, delta: f64) -> Result<f64> {
    let (lo, hi) = REVERSAL_RANGE;
    let step = (hi - lo) / REVERSAL_SAMPLES as f64;
    let mut a_prev = amplitude(lo, epsilon, delta)?;
    let mut g_prev = lo;
    for k in 1..=REVERSAL_SAMPLES {
        let g = lo + step * k as f64;
        let a = amplitude(g, epsilon, delta)?;
        if a == 0.0 {
            return Ok(g);
        }
        if a_prev.signum() != a.signum() && a_prev != 0.0 {
            return bisect(g_prev, g, a_prev, epsilon, delta);
        }
        a_prev = a;
        g_prev = g;
    }
    Err(HanleError::NoReversal { lo, hi })
}

fn bisect(mut lo: f64, mut hi: f64, a_lo: f64, epsilon: f64, delta: f64) -> Result<f64> {
    let sign_lo = a_lo.signum();
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let a = amplitude(mid, epsilon, delta)?;
        if a == 0.0 {
            return Ok(mid);
        }
        if a.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
