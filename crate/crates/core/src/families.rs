//! The Per3(0) family `f_a(z) = (z - 1)(z - a/(2 - a)) / z^2` and named
//! example maps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::RationalMap;
use crate::sphere::{format_complex, Complex};

/// Parameters closer than this to 0 or 2 are rejected.
pub const EXCLUDED_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("parameter a = {0} is excluded (the family degenerates at a = 0 and a = 2)")]
    Excluded(String),
    #[error("parameter must be finite")]
    NonFinite,
    #[error("unknown preset `{0}`; valid names: {names}", names = PRESET_NAMES.join(", "))]
    UnknownPreset(String),
    #[error("preset `per3` needs a parameter a")]
    MissingParameter,
}

/// An admissible parameter `a ∈ C \ {0, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParameterRecord", into = "ParameterRecord")]
pub struct Per3Parameter(Complex);

#[derive(Serialize, Deserialize)]
struct ParameterRecord {
    re: f64,
    im: f64,
}

impl TryFrom<ParameterRecord> for Per3Parameter {
    type Error = FamilyError;
    fn try_from(r: ParameterRecord) -> Result<Self, FamilyError> {
        Per3Parameter::new(Complex::new(r.re, r.im))
    }
}

impl From<Per3Parameter> for ParameterRecord {
    fn from(p: Per3Parameter) -> Self {
        ParameterRecord { re: p.0.re, im: p.0.im }
    }
}

impl Per3Parameter {
    pub fn new(a: Complex) -> Result<Self, FamilyError> {
        if !a.is_finite() {
            return Err(FamilyError::NonFinite);
        }
        if a.norm() < EXCLUDED_TOL || (a - 2.0).norm() < EXCLUDED_TOL {
            return Err(FamilyError::Excluded(format_complex(a)));
        }
        Ok(Per3Parameter(a))
    }

    pub fn value(&self) -> Complex {
        self.0
    }

    pub fn conj(&self) -> Self {
        Per3Parameter(self.0.conj())
    }

    /// The second numerator root `a / (2 - a)`.
    pub fn second_root(&self) -> Complex {
        self.0 / (2.0 - self.0)
    }

    /// The free critical value `-(1 - a)^2 / (a (2 - a))`.
    pub fn free_critical_value(&self) -> Complex {
        let a = self.0;
        -(1.0 - a) * (1.0 - a) / (a * (2.0 - a))
    }
}

impl fmt::Display for Per3Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

/// `f_a` with numerator `(z - 1)(z - b)`, `b = a/(2-a)`, and denominator `z^2`.
pub fn per3_map(p: Per3Parameter) -> RationalMap {
    let b = p.second_root();
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    RationalMap::new(vec![b, -(one + b), one], vec![zero, zero, one]).expect("f_a is a degree-two map for admissible a")
}

pub const PRESET_NAMES: [&str; 4] = ["milnor-tan", "devaney-quartic", "steinmetz", "per3"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    MilnorTan,
    DevaneyQuartic,
    Steinmetz,
    Per3,
}

impl PresetName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::MilnorTan => "milnor-tan",
            PresetName::DevaneyQuartic => "devaney-quartic",
            PresetName::Steinmetz => "steinmetz",
            PresetName::Per3 => "per3",
        }
    }
}

impl FromStr for PresetName {
    type Err = FamilyError;
    fn from_str(s: &str) -> Result<Self, FamilyError> {
        match s {
            "milnor-tan" => Ok(PresetName::MilnorTan),
            "devaney-quartic" => Ok(PresetName::DevaneyQuartic),
            "steinmetz" => Ok(PresetName::Steinmetz),
            "per3" => Ok(PresetName::Per3),
            other => Err(FamilyError::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapPreset {
    pub name: PresetName,
    pub map: RationalMap,
}

/// Milnor and Tan Lei's coefficients in `a (z + 1/z) + b`.
pub const MILNOR_TAN_A: f64 = -0.138115091;
pub const MILNOR_TAN_B: f64 = -0.303108805;

/// Looks up a named map. `per3` needs the parameter `a`; the others ignore it.
pub fn preset(name: &str, a: Option<Per3Parameter>) -> Result<MapPreset, FamilyError> {
    let name: PresetName = name.parse()?;
    let r = |x: f64| Complex::new(x, 0.0);
    let map = match name {
        // a (z + 1/z) + b = (a z^2 + b z + a) / z
        PresetName::MilnorTan => RationalMap::new(
            vec![r(MILNOR_TAN_A), r(MILNOR_TAN_B), r(MILNOR_TAN_A)],
            vec![r(0.0), r(1.0)],
        ),
        // z^2 - 1/(16 z^2) = (z^4 - 1/16) / z^2
        PresetName::DevaneyQuartic => RationalMap::new(
            vec![r(-1.0 / 16.0), r(0.0), r(0.0), r(0.0), r(1.0)],
            vec![r(0.0), r(0.0), r(1.0)],
        ),
        // 1 + (4/27) z^3 / (1 - z) = (1 - z + (4/27) z^3) / (1 - z)
        PresetName::Steinmetz => RationalMap::new(vec![r(1.0), r(-1.0), r(0.0), r(4.0 / 27.0)], vec![r(1.0), r(-1.0)]),
        PresetName::Per3 => {
            return Ok(MapPreset {
                name,
                map: per3_map(a.ok_or(FamilyError::MissingParameter)?),
            })
        }
    }
    .expect("preset coefficients are valid");
    Ok(MapPreset { name, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{chordal_distance, SpherePoint};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn excluded_parameters() {
        assert!(matches!(Per3Parameter::new(c(0.0, 0.0)), Err(FamilyError::Excluded(_))));
        assert!(matches!(Per3Parameter::new(c(2.0, 0.0)), Err(FamilyError::Excluded(_))));
        assert!(Per3Parameter::new(c(2.0, 1e-6)).is_ok());
    }

    #[test]
    fn a_equal_one_gives_square() {
        let f = per3_map(Per3Parameter::new(c(1.0, 0.0)).unwrap());
        assert_eq!(f.numerator(), &[c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(f.eval(SpherePoint::ONE), SpherePoint::ZERO);
    }

    #[test]
    fn critical_cycle_for_sampled_parameters() {
        for a in [c(1.0, 0.0), c(0.3, 0.9), c(-2.5, -1.0), c(2.32, 0.0), c(5.0, 3.0)] {
            let f = per3_map(Per3Parameter::new(a).unwrap());
            assert_eq!(f.eval(SpherePoint::ZERO), SpherePoint::Infinity);
            assert_eq!(f.eval(SpherePoint::Infinity), SpherePoint::ONE);
            assert!(chordal_distance(f.eval(SpherePoint::ONE), SpherePoint::ZERO) < 1e-15);
            assert_eq!(f.degree(), 2);
        }
    }

    #[test]
    fn critical_points_and_values() {
        for a in [c(0.7, 0.2), c(-1.0, 1.5), c(3.0, -0.5)] {
            let p = Per3Parameter::new(a).unwrap();
            let f = per3_map(p);
            let cps = f.critical_points().unwrap();
            assert_eq!(cps.len(), 2);
            let at_zero = cps.iter().any(|q| chordal_distance(*q, SpherePoint::ZERO) < 1e-10);
            let at_a = cps.iter().any(|q| chordal_distance(*q, SpherePoint::new(a)) < 1e-10);
            assert!(at_zero && at_a, "{cps:?}");
            assert_eq!(f.eval(SpherePoint::ZERO), SpherePoint::Infinity);
            let v = f.eval_complex(a);
            assert!(chordal_distance(v, SpherePoint::new(p.free_critical_value())) < 1e-10);
        }
    }

    #[test]
    fn presets_match_formulas() {
        let mt = preset("milnor-tan", None).unwrap().map;
        let z = c(0.4, -1.2);
        let want = MILNOR_TAN_A * (z + z.inv()) + MILNOR_TAN_B;
        assert!(chordal_distance(mt.eval_complex(z), SpherePoint::new(want)) < 1e-14);

        let dq = preset("devaney-quartic", None).unwrap().map;
        let want = z * z - (16.0 * z * z).inv();
        assert!(chordal_distance(dq.eval_complex(z), SpherePoint::new(want)) < 1e-14);

        let st = preset("steinmetz", None).unwrap().map;
        let want = 1.0 + (4.0 / 27.0) * z * z * z / (1.0 - z);
        assert!(chordal_distance(st.eval_complex(z), SpherePoint::new(want)) < 1e-14);
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("mandelbrot", None).unwrap_err();
        let msg = err.to_string();
        for name in PRESET_NAMES {
            assert!(msg.contains(name));
        }
        assert_eq!(preset("per3", None).unwrap_err(), FamilyError::MissingParameter);
    }

    #[test]
    fn devaney_critical_points() {
        let f = preset("devaney-quartic", None).unwrap().map;
        let cps = f.critical_points().unwrap();
        // 0 and infinity (double poles) and the four roots of z^4 = -1/16
        assert_eq!(cps.len(), 6);
        assert!(cps.contains(&SpherePoint::Infinity));
        let finite: Vec<Complex> = cps.iter().filter_map(|p| p.finite()).collect();
        assert!(finite.iter().any(|z| z.norm() < 1e-12));
        let quartic: Vec<&Complex> = finite.iter().filter(|z| z.norm() > 1e-6).collect();
        assert_eq!(quartic.len(), 4);
        for z in quartic {
            assert!((z.powi(4) + 1.0 / 16.0).norm() < 1e-12);
        }
    }
}
