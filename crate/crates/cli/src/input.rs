//! Germ specs, numbers and lists given on the command line.

use std::path::Path;

use hadamard_core::catalog::{CatalogGerm, EntireFactor, NamedGerm, RationalGerm};
use hadamard_core::TruncatedGerm;
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;
use crate::CliResult;

/// A germ from the catalog or from a JSON file.
#[derive(Debug, Clone)]
pub struct Germ {
    pub name: String,
    pub catalog: Option<CatalogGerm>,
    pub rational: Option<RationalGerm>,
    pub coeffs: Option<TruncatedGerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalFile {
    pole: Complex64,
    pole_coeffs: Vec<Complex64>,
    #[serde(default)]
    poly_part: Vec<Complex64>,
}

impl Germ {
    pub fn load(spec: &str) -> CliResult<Self> {
        if spec.ends_with(".json") || Path::new(spec).is_file() {
            return Self::from_file(spec);
        }
        let named: NamedGerm = spec.parse()?;
        let rational = match &named.germ {
            CatalogGerm::Rational(r) => Some(r.clone()),
            CatalogGerm::PoleGerm { omega, order } => {
                let mut a = vec![Complex64::new(0.0, 0.0); *order];
                a[order - 1] = Complex64::new(1.0, 0.0);
                Some(RationalGerm::pure(*omega, a)?)
            }
            _ => None,
        };
        Ok(Self { name: named.name, catalog: Some(named.germ), rational, coeffs: None })
    }

    fn from_file(path: &str) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)?;
        let name = path.to_string();
        let coeffs_of = |v: Value| -> CliResult<TruncatedGerm> { Ok(serde_json::from_value::<TruncatedGerm>(v)?) };
        match value {
            Value::Array(_) => Ok(Self { name, catalog: None, rational: None, coeffs: Some(coeffs_of(value)?) }),
            Value::Object(ref map) if map.contains_key("coefficients") => {
                let c = map["coefficients"].clone();
                Ok(Self { name, catalog: None, rational: None, coeffs: Some(coeffs_of(c)?) })
            }
            Value::Object(_) => {
                let r: RationalFile = serde_json::from_value(value)?;
                let r = RationalGerm::new(r.pole, r.pole_coeffs, r.poly_part)?;
                Ok(Self { name, catalog: Some(CatalogGerm::Rational(r.clone())), rational: Some(r), coeffs: None })
            }
            _ => Err(CliError::usage(format!("{path}: expected a coefficient array or an object"))),
        }
    }

    pub fn coefficients(&self, order: usize) -> CliResult<TruncatedGerm> {
        if let Some(c) = &self.catalog {
            return Ok(c.coefficients(order));
        }
        let c = self.coeffs.as_ref().expect("file germs carry coefficients");
        if c.order() < order {
            return Err(CliError::usage(format!("{} holds {} coefficients, {order} requested", self.name, c.order())));
        }
        Ok(c.truncate(order))
    }

    pub fn evaluator(&self) -> CliResult<&CatalogGerm> {
        self.catalog
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("{} has no closed form; use a catalog germ", self.name)))
    }

    pub fn rational(&self) -> CliResult<&RationalGerm> {
        self.rational
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("{} is not a single-pole rational germ", self.name)))
    }
}

pub fn parse_complex(s: &str) -> CliResult<Complex64> {
    let bad = || CliError::usage(format!("expected `re` or `re,im`, got `{s}`"));
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = match parts.next() {
        Some(v) => v.map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

pub fn parse_points(s: &str) -> CliResult<Vec<Complex64>> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_complex).collect()
}

pub fn parse_orders(s: &str) -> CliResult<Vec<(usize, usize)>> {
    s.split(',')
        .map(|t| {
            let bad = || CliError::usage(format!("bad Padé order `{t}`"));
            match t.split_once('/') {
                Some((l, m)) => Ok((l.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?)),
                None => {
                    let l = t.trim().parse().map_err(|_| bad())?;
                    Ok((l, l))
                }
            }
        })
        .collect()
}

pub fn parse_f1(s: &str) -> CliResult<EntireFactor> {
    let (kind, body) = s
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("f1 must be const:c, exp:r or poly:c0,c1,..., got `{s}`")))?;
    match kind {
        "const" => Ok(EntireFactor::constant(parse_complex(body)?)),
        "exp" => Ok(EntireFactor::Exponential { amplitude: Complex64::new(1.0, 0.0), rate: parse_complex(body)? }),
        "poly" => {
            let c = body
                .split(',')
                .map(|x| x.trim().parse::<f64>().map(|v| Complex64::new(v, 0.0)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::usage(format!("bad polynomial `{body}`")))?;
            Ok(EntireFactor::Polynomial(c))
        }
        _ => Err(CliError::usage(format!("unknown f1 kind `{kind}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_and_lists() {
        assert_eq!(parse_complex("0.3").unwrap(), Complex64::new(0.3, 0.0));
        assert_eq!(parse_complex("1,-2").unwrap(), Complex64::new(1.0, -2.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("x").is_err());
        assert_eq!(parse_orders("10,8/9").unwrap(), vec![(10, 10), (8, 9)]);
        assert_eq!(parse_points("1;0,2").unwrap(), vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]);
    }

    #[test]
    fn f1_specs() {
        assert_eq!(parse_f1("const:1").unwrap(), EntireFactor::constant(Complex64::new(1.0, 0.0)));
        assert!(matches!(parse_f1("poly:1,0.5").unwrap(), EntireFactor::Polynomial(v) if v.len() == 2));
        assert!(parse_f1("sin:1").is_err());
    }

    #[test]
    fn pole_germs_are_rational() {
        let g = Germ::load("pole:omega=2,j=3").unwrap();
        assert_eq!(g.rational().unwrap().pole_order(), 3);
        assert!(Germ::load("log").unwrap().rational().is_err());
    }
}
