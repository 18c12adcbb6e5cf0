//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use hanle_core::doppler::{DopplerParams, QuadratureRule};
use hanle_core::scan::SolverPath;
use hanle_core::{AngularMomentum, Polarization, SystemParams};
use nalgebra::Vector3;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    ScanOmega,
    ScanDelta,
    LorentzParams,
    SignReversal,
    DopplerScan,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ScanOmega => "scan-omega",
            Mode::ScanDelta => "scan-delta",
            Mode::LorentzParams => "lorentz-params",
            Mode::SignReversal => "sign-reversal",
            Mode::DopplerScan => "doppler-scan",
            Mode::Validate => "validate",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "scan-omega" => Mode::ScanOmega,
            "scan-delta" => Mode::ScanDelta,
            "lorentz-params" => Mode::LorentzParams,
            "sign-reversal" => Mode::SignReversal,
            "doppler-scan" => Mode::DopplerScan,
            "validate" => Mode::Validate,
            _ => {
                return Err(format!(
                    "unknown mode '{s}' (scan-omega, scan-delta, lorentz-params, sign-reversal, doppler-scan, validate)"
                ))
            }
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every key the config accepts, with its default.
const KEYS: &[(&str, &str)] = &[
    ("mode", "scan-omega"),
    ("path", "reduced"),
    ("fg", "1"),
    ("fe", "2"),
    ("beta", "1"),
    ("gamma_r", "1"),
    ("gamma_eg", "auto"),
    ("gamma_1", "0"),
    ("gamma_transit", "0"),
    ("kappa", "0.1 gamma_eg"),
    ("delta", "0"),
    ("omega_g", "0"),
    ("excited_g_ratio", "1"),
    ("epsilon", "pi/8"),
    ("b_direction", "0,0,1"),
    ("relative", "true"),
    ("grid_start", ""),
    ("grid_stop", ""),
    ("grid_count", ""),
    ("fit_span", "10"),
    ("fit_count", "201"),
    ("k_vbar", "0"),
    ("quadrature_order", "96"),
    ("quadrature_rule", "graded"),
    ("normalize", "true"),
    ("seed", "303374"),
    ("draws", "1000"),
    ("saturation", "1e-3"),
];

/// Where a value came from, for diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    Default,
    File(usize),
    Override,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => f.write_str("default"),
            Origin::File(line) => write!(f, "line {line}"),
            Origin::Override => f.write_str("--override"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::config(lineno, "expected 'key = value'"));
            };
            let key = key.trim();
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(CliError::config(lineno, format!("unknown key '{key}'")));
            }
            if let Some((_, origin)) = cfg.entries.get(key) {
                return Err(CliError::config(
                    lineno,
                    format!("'{key}' already set at {origin}"),
                ));
            }
            cfg.entries
                .insert(key.to_string(), (value.trim().to_string(), Origin::File(lineno)));
        }
        Ok(cfg)
    }

    pub fn set(&mut self, assignment: &str, origin: Origin) -> Result<(), CliError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(CliError::Usage(format!("override '{assignment}' is not key=value")));
        };
        let key = key.trim();
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Usage(format!("unknown key '{key}' in override")));
        }
        self.entries
            .insert(key.to_string(), (value.trim().to_string(), origin));
        Ok(())
    }

    fn get(&self, key: &str) -> (String, Origin) {
        match self.entries.get(key) {
            Some(v) => v.clone(),
            None => {
                let default = KEYS.iter().find(|(k, _)| *k == key).expect("known key").1;
                (default.to_string(), Origin::Default)
            }
        }
    }

    fn field<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, CliError> {
        let (value, origin) = self.get(key);
        parse(&value).map_err(|msg| CliError::Field {
            key: key.to_string(),
            origin: origin.to_string(),
            message: msg,
        })
    }
}

/// A rate, possibly in units of another rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Unit {
    Absolute,
    GammaR,
    GammaEg,
    /// γ_eg · S
    GammaEgS,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

pub fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

pub fn parse_quantity(s: &str) -> Result<Quantity, String> {
    let mut parts = s.split_whitespace();
    let num = parts.next().ok_or("empty value")?;
    let value = parse_number(num)?;
    let unit = match parts.next() {
        None => Unit::Absolute,
        Some("gamma_r") => Unit::GammaR,
        Some("gamma_eg") => Unit::GammaEg,
        Some("gamma_eg_s") => Unit::GammaEgS,
        Some(u) => return Err(format!("unknown unit '{u}' (gamma_r, gamma_eg, gamma_eg_s)")),
    };
    if parts.next().is_some() {
        return Err(format!("trailing text in '{s}'"));
    }
    Ok(Quantity { value, unit })
}

/// Radians, or a multiple of π such as `pi/8`, `-3pi/16`, `3*pi/16`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().replace(' ', "");
    let Some(pos) = t.find("pi") else {
        return parse_number(&t);
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let coef = match head.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => parse_number(h)?,
    };
    let div = match tail {
        "" => 1.0,
        d if d.starts_with('/') => parse_number(&d[1..])?,
        _ => return Err(format!("cannot read angle '{s}'")),
    };
    if div == 0.0 {
        return Err(format!("division by zero in '{s}'"));
    }
    Ok(coef * PI / div)
}

pub fn parse_momentum(s: &str) -> Result<AngularMomentum, String> {
    let t = s.trim();
    let f = match t.split_once('/') {
        Some((n, d)) => parse_number(n)? / parse_number(d)?,
        None => parse_number(t)?,
    };
    AngularMomentum::from_f64(f).map_err(|e| e.to_string())
}

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

fn parse_vector(s: &str) -> Result<Vector3<f64>, String> {
    let v: Vec<f64> = s.split(',').map(parse_number).collect::<Result<_, _>>()?;
    if v.len() != 3 {
        return Err(format!("expected three comma-separated components, got {}", v.len()));
    }
    let b = Vector3::new(v[0], v[1], v[2]);
    let n = b.norm();
    if n == 0.0 {
        return Err("zero vector".into());
    }
    Ok(b / n)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Fully resolved run description.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub path: SolverPath,
    pub params: SystemParams,
    pub doppler: DopplerParams,
    /// Swept variable in absolute units (radians for sign-reversal); empty
    /// for validate.
    pub grid: Option<Grid>,
    pub relative: bool,
    pub normalize: bool,
    pub fit_span: f64,
    pub fit_count: usize,
    pub seed: u64,
    pub draws: usize,
    pub saturation: f64,
    /// Resolved `key = value` lines in a fixed order.
    pub manifest: Vec<(String, String)>,
}

fn default_grid(mode: Mode) -> (&'static str, &'static str, &'static str) {
    match mode {
        Mode::ScanOmega => ("-10 gamma_eg_s", "10 gamma_eg_s", "401"),
        Mode::ScanDelta | Mode::LorentzParams => ("-6 gamma_eg", "6 gamma_eg", "121"),
        Mode::SignReversal => ("0", "pi/5", "33"),
        Mode::DopplerScan => ("-0.1 gamma_r", "0.1 gamma_r", "401"),
        Mode::Validate => ("", "", ""),
    }
}

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self, CliError> {
        let mode: Mode = raw.field("mode", |s| s.trim().parse())?;
        let path: SolverPath = raw.field("path", |s| s.trim().parse().map_err(|e: hanle_core::HanleError| e.to_string()))?;
        let fg = raw.field("fg", parse_momentum)?;
        let fe = raw.field("fe", parse_momentum)?;
        let beta = raw.field("beta", parse_number)?;
        let gamma_r = raw.field("gamma_r", parse_number)?;
        if gamma_r.is_nan() || gamma_r <= 0.0 {
            return Err(CliError::Field {
                key: "gamma_r".into(),
                origin: raw.get("gamma_r").1.to_string(),
                message: "must be positive".into(),
            });
        }
        let abs_r = |q: Quantity, key: &str| -> Result<Option<f64>, CliError> {
            match q.unit {
                Unit::Absolute => Ok(Some(q.value)),
                Unit::GammaR => Ok(Some(q.value * gamma_r)),
                Unit::GammaEg => Ok(None),
                Unit::GammaEgS => Err(CliError::Field {
                    key: key.into(),
                    origin: raw.get(key).1.to_string(),
                    message: "gamma_eg_s is only meaningful for omega_g and Omega grids".into(),
                }),
            }
        };

        let transit = raw.field("gamma_transit", parse_quantity)?;
        let (geg_raw, geg_origin) = raw.get("gamma_eg");
        let gamma_eg = if geg_raw.trim() == "auto" {
            // γ_eg = γ_r/2 + Γ, solved when Γ is given relative to γ_eg
            match abs_r(transit, "gamma_transit")? {
                Some(g) => gamma_r / 2.0 + g,
                None if transit.value < 1.0 => gamma_r / 2.0 / (1.0 - transit.value),
                None => {
                    return Err(CliError::Field {
                        key: "gamma_transit".into(),
                        origin: raw.get("gamma_transit").1.to_string(),
                        message: "with gamma_eg = auto, Gamma must be below 1 gamma_eg".into(),
                    })
                }
            }
        } else {
            let q = parse_quantity(&geg_raw).map_err(|m| CliError::Field {
                key: "gamma_eg".into(),
                origin: geg_origin.to_string(),
                message: m,
            })?;
            match q.unit {
                Unit::Absolute => q.value,
                Unit::GammaR => q.value * gamma_r,
                _ => {
                    return Err(CliError::Field {
                        key: "gamma_eg".into(),
                        origin: geg_origin.to_string(),
                        message: "gamma_eg must be absolute, in gamma_r, or auto".into(),
                    })
                }
            }
        };
        let rate = |key: &str| -> Result<f64, CliError> {
            let q = raw.field(key, parse_quantity)?;
            Ok(abs_r(q, key)?.unwrap_or(q.value * gamma_eg))
        };
        let gamma_transit = rate("gamma_transit")?;
        let gamma_1 = rate("gamma_1")?;
        let kappa = rate("kappa")?;
        let delta = rate("delta")?;
        let saturation_at = |d: f64| kappa * kappa / (gamma_eg * gamma_eg + d * d);
        let omega_rate = |key: &str, q: Quantity, d: f64| -> Result<f64, CliError> {
            Ok(match q.unit {
                Unit::GammaEgS => q.value * gamma_eg * saturation_at(d),
                _ => abs_r(q, key).unwrap_or(None).unwrap_or(q.value * gamma_eg),
            })
        };
        let omega_g = omega_rate("omega_g", raw.field("omega_g", parse_quantity)?, delta)?;
        let epsilon = raw.field("epsilon", parse_angle)?;
        let pol = Polarization::new(epsilon).map_err(|e| CliError::Field {
            key: "epsilon".into(),
            origin: raw.get("epsilon").1.to_string(),
            message: e.to_string(),
        })?;

        let mut params = SystemParams::new(fg, fe);
        params.beta = beta;
        params.gamma_r = gamma_r;
        params.gamma_eg = gamma_eg;
        params.gamma_1 = gamma_1;
        params.gamma_transit = gamma_transit;
        params.kappa = kappa;
        params.delta_v = delta;
        params.omega_g = omega_g;
        params.excited_g_ratio = raw.field("excited_g_ratio", parse_number)?;
        params.b_direction = raw.field("b_direction", parse_vector)?;
        params.pol = pol;
        params.validate()?;

        let rule = raw.field("quadrature_rule", |s| match s.trim() {
            "graded" => Ok(QuadratureRule::GradedLegendre),
            "hermite" => Ok(QuadratureRule::GaussHermite),
            o => Err(format!("unknown rule '{o}' (graded, hermite)")),
        })?;
        let k_vbar = rate("k_vbar")?;
        let doppler = DopplerParams::new(k_vbar)
            .with_order(raw.field("quadrature_order", parse_count)?)
            .with_rule(rule);
        doppler.validate()?;

        let grid = if mode == Mode::Validate {
            None
        } else {
            let (ds, de, dc) = default_grid(mode);
            let pick = |key: &str, default: &str| -> (String, Origin) {
                let (v, o) = raw.get(key);
                if v.is_empty() {
                    (default.to_string(), Origin::Default)
                } else {
                    (v, o)
                }
            };
            let point = |key: &str, default: &str| -> Result<f64, CliError> {
                let (v, o) = pick(key, default);
                let err = |m: String| CliError::Field {
                    key: key.into(),
                    origin: o.to_string(),
                    message: m,
                };
                match mode {
                    Mode::SignReversal => parse_angle(&v).map_err(err),
                    Mode::ScanOmega | Mode::DopplerScan => {
                        let q = parse_quantity(&v).map_err(err)?;
                        omega_rate(key, q, delta)
                    }
                    _ => {
                        let q = parse_quantity(&v).map_err(err)?;
                        if q.unit == Unit::GammaEgS {
                            return Err(err("gamma_eg_s is only meaningful for Omega grids".into()));
                        }
                        Ok(abs_r(q, key)?.unwrap_or(q.value * gamma_eg))
                    }
                }
            };
            let start = point("grid_start", ds)?;
            let stop = point("grid_stop", de)?;
            let (cv, co) = pick("grid_count", dc);
            let count = parse_count(&cv).map_err(|m| CliError::Field {
                key: "grid_count".into(),
                origin: co.to_string(),
                message: m,
            })?;
            if count < 2 {
                return Err(CliError::Field {
                    key: "grid_count".into(),
                    origin: co.to_string(),
                    message: "grid needs at least 2 points".into(),
                });
            }
            if stop.is_nan() || start.is_nan() || stop <= start {
                return Err(CliError::Field {
                    key: "grid_stop".into(),
                    origin: pick("grid_stop", de).1.to_string(),
                    message: format!("grid_stop ({stop}) must exceed grid_start ({start})"),
                });
            }
            Some(Grid { start, stop, count })
        };

        let cfg = RunConfig {
            mode,
            path,
            params,
            doppler,
            grid,
            relative: raw.field("relative", parse_bool)?,
            normalize: raw.field("normalize", parse_bool)?,
            fit_span: raw.field("fit_span", parse_number)?,
            fit_count: raw.field("fit_count", parse_count)?,
            seed: raw.field("seed", |s| s.trim().parse::<u64>().map_err(|e| e.to_string()))?,
            draws: raw.field("draws", parse_count)?,
            saturation: raw.field("saturation", parse_number)?,
            manifest: Vec::new(),
        };
        Ok(cfg.with_manifest())
    }

    fn with_manifest(mut self) -> Self {
        let p = &self.params;
        let b = p.b_direction;
        let mut m: Vec<(String, String)> = vec![
            ("mode".into(), self.mode.to_string()),
            ("path".into(), self.path.name().into()),
            ("fg".into(), p.fg.to_string()),
            ("fe".into(), p.fe.to_string()),
            ("beta".into(), num(p.beta)),
            ("gamma_r".into(), num(p.gamma_r)),
            ("gamma_eg".into(), num(p.gamma_eg)),
            ("gamma_1".into(), num(p.gamma_1)),
            ("gamma_transit".into(), num(p.gamma_transit)),
            ("kappa".into(), num(p.kappa)),
            ("delta".into(), num(p.delta_v)),
            ("omega_g".into(), num(p.omega_g)),
            ("excited_g_ratio".into(), num(p.excited_g_ratio)),
            ("epsilon".into(), num(p.pol.epsilon())),
            ("b_direction".into(), format!("{},{},{}", num(b.x), num(b.y), num(b.z))),
            ("saturation_at_delta".into(), num(p.saturation())),
            ("relative".into(), self.relative.to_string()),
        ];
        if let Some(g) = self.grid {
            m.push(("grid_start".into(), num(g.start)));
            m.push(("grid_stop".into(), num(g.stop)));
            m.push(("grid_count".into(), g.count.to_string()));
        }
        match self.mode {
            Mode::LorentzParams => {
                m.push(("fit_span".into(), num(self.fit_span)));
                m.push(("fit_count".into(), self.fit_count.to_string()));
            }
            Mode::DopplerScan => {
                let rule = match self.doppler.rule {
                    QuadratureRule::GradedLegendre => "graded",
                    QuadratureRule::GaussHermite => "hermite",
                };
                m.push(("k_vbar".into(), num(self.doppler.k_vbar)));
                m.push(("quadrature_order".into(), self.doppler.quadrature_order.to_string()));
                m.push(("quadrature_rule".into(), rule.into()));
                m.push(("normalize".into(), self.normalize.to_string()));
            }
            Mode::Validate => {
                m.push(("seed".into(), self.seed.to_string()));
                m.push(("draws".into(), self.draws.to_string()));
                m.push(("saturation".into(), num(self.saturation)));
            }
            _ => {}
        }
        self.manifest = m;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/8").unwrap(), PI / 8.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("3pi/16").unwrap(), 3.0 * PI / 16.0);
        assert_eq!(parse_angle("3*pi/16").unwrap(), 3.0 * PI / 16.0);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("pie").is_err());
    }

    #[test]
    fn quantities() {
        assert_eq!(
            parse_quantity("0.1 gamma_eg").unwrap(),
            Quantity {
                value: 0.1,
                unit: Unit::GammaEg
            }
        );
        assert_eq!(parse_quantity("2").unwrap().unit, Unit::Absolute);
        assert!(parse_quantity("2 furlongs").is_err());
        assert!(parse_quantity("").is_err());
    }

    #[test]
    fn momenta() {
        assert_eq!(parse_momentum("3/2").unwrap().twice(), 3);
        assert_eq!(parse_momentum("2").unwrap().twice(), 4);
        assert!(parse_momentum("0.3").is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = RawConfig::parse("mode = scan-omega\n\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = RawConfig::parse("kappa 0.1\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let err = RawConfig::parse("kappa = 1\nkappa = 2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn field_errors_name_key_and_origin() {
        let raw = RawConfig::parse("# comment\nepsilon = 2\n").unwrap();
        let err = RunConfig::resolve(&raw).unwrap_err().to_string();
        assert!(err.contains("epsilon") && err.contains("line 2"), "{err}");
    }

    #[test]
    fn auto_dephasing_with_relative_transit_rate() {
        let raw = RawConfig::parse("gamma_transit = 0.005 gamma_eg\n").unwrap();
        let cfg = RunConfig::resolve(&raw).unwrap();
        let p = &cfg.params;
        assert!((p.gamma_eg - 0.5 / 0.995).abs() < 1e-15);
        assert!((p.gamma_transit - 0.005 * p.gamma_eg).abs() < 1e-15);
        assert!((p.gamma_eg - (0.5 + p.gamma_transit)).abs() < 1e-15);
    }

    #[test]
    fn omega_grid_in_natural_units() {
        let mut raw = RawConfig::parse("kappa = 0.1 gamma_eg\ndelta = 0\n").unwrap();
        raw.set("grid_start=-2 gamma_eg_s", Origin::Override).unwrap();
        let cfg = RunConfig::resolve(&raw).unwrap();
        let g = cfg.grid.unwrap();
        assert!((g.start + 2.0 * 0.5 * 0.01).abs() < 1e-15);
        assert_eq!(g.count, 401);
    }

    #[test]
    fn defaults_appear_in_manifest() {
        let cfg = RunConfig::resolve(&RawConfig::default()).unwrap();
        let keys: Vec<&str> = cfg.manifest.iter().map(|(k, _)| k.as_str()).collect();
        for k in ["mode", "path", "gamma_eg", "kappa", "epsilon", "grid_start", "grid_count"] {
            assert!(keys.contains(&k), "{k}");
        }
    }
}
