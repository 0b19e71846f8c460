//! Flat `key = value` config files, merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::CliError;

/// Parsed config file. Keys are normalized to snake_case.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_")
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected key = value, got {raw:?}",
                    i + 1
                )));
            };
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", i + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Self { values })
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!(
                "unknown config key {k:?}; expected one of {}",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    /// Flag value if given, else the config value, else `None`.
    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|e| CliError::Config(format!("config key {key}: cannot parse {raw:?}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }
}

/// An angle given in exactly one of degrees or radians.
pub fn resolve_angle(file: &ConfigFile, flag_deg: Option<f64>, flag_rad: Option<f64>) -> Result<Option<f64>, CliError> {
    let (deg, rad) = if flag_deg.is_some() || flag_rad.is_some() {
        (flag_deg, flag_rad)
    } else {
        (file.get::<f64>("theta_deg", None)?, file.get::<f64>("theta_rad", None)?)
    };
    match (deg, rad) {
        (Some(_), Some(_)) => Err(CliError::Config("give exactly one of theta_deg and theta_rad".into())),
        (Some(d), None) => finite_angle(d.to_radians()).map(Some),
        (None, Some(r)) => finite_angle(r).map(Some),
        (None, None) => Ok(None),
    }
}

fn finite_angle(theta: f64) -> Result<f64, CliError> {
    if theta.is_finite() {
        Ok(theta)
    } else {
        Err(CliError::Config(format!("angle must be finite, got {theta}")))
    }
}

pub fn require_angle(file: &ConfigFile, flag_deg: Option<f64>, flag_rad: Option<f64>) -> Result<f64, CliError> {
    resolve_angle(file, flag_deg, flag_rad)?
        .ok_or_else(|| CliError::Config("an angle is required: pass --theta-deg or --theta-rad".into()))
}

/// A Born weight given as an exact fraction (`3/4`), a plain decimal
/// (`0.75`, read exactly as 75/100) or any other float literal (`7.5e-1`).
#[derive(Debug, Clone, PartialEq)]
pub enum WeightArg {
    Float(f64),
    Exact(BigRational),
}

impl FromStr for WeightArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
            let den: BigInt = den.trim().parse().map_err(|e| format!("bad denominator: {e}"))?;
            if den.is_zero() {
                return Err("zero denominator".into());
            }
            let q = BigRational::new(num, den);
            if q.is_negative() || q > BigRational::from_integer(1.into()) {
                return Err(format!("{q} lies outside [0, 1]"));
            }
            return Ok(WeightArg::Exact(q));
        }
        if let Some(q) = exact_decimal(s) {
            if q > BigRational::from_integer(1.into()) {
                return Err(format!("{s} lies outside [0, 1]"));
            }
            return Ok(WeightArg::Exact(q));
        }
        let q: f64 = s.parse().map_err(|e| format!("{e}"))?;
        if !(0.0..=1.0).contains(&q) {
            return Err(format!("{q} lies outside [0, 1]"));
        }
        Ok(WeightArg::Float(q))
    }
}

/// `digits[.digits]` as an exact rational; `None` for anything else.
fn exact_decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if int.len() + frac.len() == 0 || !digits(int) || !digits(frac) {
        return None;
    }
    let numer: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(numer, denom))
}
