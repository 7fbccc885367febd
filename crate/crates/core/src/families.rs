//! Built-in coefficient fields: Hermite, Laguerre of the first kind, Meixner
//! of the first kind, and a constant-coefficient fixture with `D ≡ 0`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::grid::{Grid, Window};
use crate::moments::{hermite_moments, laguerre_moments, meixner_moments, MeixnerConfig, MomentPair};
use crate::mop_table::{determinantal_table_with, TableOptions};
use crate::par::Exec;
use crate::recurrence::{extract_coeffs_with, CoeffField, DEFAULT_FIT_TOLERANCE};
use crate::scalar::{cast, Precision, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    Hermite { c1: f64, c2: f64 },
    Laguerre1 { alpha1: f64, alpha2: f64 },
    Meixner1 { beta: f64, c1: f64, c2: f64 },
    ConstantToy { u0: f64, v0: f64 },
}

impl FamilySpec {
    pub const NAMES: [&'static str; 4] = ["hermite", "laguerre1", "meixner1", "constant_toy"];

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Hermite { .. } => "hermite",
            FamilySpec::Laguerre1 { .. } => "laguerre1",
            FamilySpec::Meixner1 { .. } => "meixner1",
            FamilySpec::ConstantToy { .. } => "constant_toy",
        }
    }

    fn param_names(name: &str) -> Option<&'static [&'static str]> {
        Some(match name {
            "hermite" => &["c1", "c2"],
            "laguerre1" => &["alpha1", "alpha2"],
            "meixner1" => &["beta", "c1", "c2"],
            "constant_toy" => &["u0", "v0"],
            _ => return None,
        })
    }

    /// Default parameters: `hermite(0, 2)`, `laguerre1(0, 0.4)`,
    /// `meixner1(1, 1/2, 1/3)`, `constant_toy(0, 1)`.
    pub fn default_for(name: &str) -> Result<Self> {
        Self::from_params(name, &BTreeMap::new())
    }

    /// Builds a spec from a family name and named parameters; missing
    /// parameters take their defaults. The result is not validated.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let names = Self::param_names(name).ok_or_else(|| {
            Error::InvalidParams(format!("unknown family `{name}`; expected one of {:?}", Self::NAMES))
        })?;
        if let Some(bad) = params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::InvalidParams(format!(
                "family `{name}` has no parameter `{bad}`"
            )));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        Ok(match name {
            "hermite" => FamilySpec::Hermite {
                c1: get("c1", 0.0),
                c2: get("c2", 2.0),
            },
            "laguerre1" => FamilySpec::Laguerre1 {
                alpha1: get("alpha1", 0.0),
                alpha2: get("alpha2", 0.4),
            },
            "meixner1" => FamilySpec::Meixner1 {
                beta: get("beta", 1.0),
                c1: get("c1", 0.5),
                c2: get("c2", 1.0 / 3.0),
            },
            _ => FamilySpec::ConstantToy {
                u0: get("u0", 0.0),
                v0: get("v0", 1.0),
            },
        })
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match *self {
            FamilySpec::Hermite { c1, c2 } => vec![("c1", c1), ("c2", c2)],
            FamilySpec::Laguerre1 { alpha1, alpha2 } => vec![("alpha1", alpha1), ("alpha2", alpha2)],
            FamilySpec::Meixner1 { beta, c1, c2 } => vec![("beta", beta), ("c1", c1), ("c2", c2)],
            FamilySpec::ConstantToy { u0, v0 } => vec![("u0", u0), ("v0", v0)],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Parses `{"family": "...", "params": {...}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            family: String,
            #[serde(default)]
            params: BTreeMap<String, f64>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        Self::from_params(&raw.family, &raw.params)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Raw<'a> {
            family: &'a str,
            params: BTreeMap<String, f64>,
        }
        serde_json::to_value(Raw {
            family: self.name(),
            params: self.params(),
        })
        .expect("plain data serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.params().into_iter().find(|(_, v)| !v.is_finite());
        if let Some((k, v)) = finite {
            return Err(Error::InvalidParams(format!("{k} = {v} is not finite")));
        }
        match *self {
            FamilySpec::Hermite { c1, c2 } => {
                if c1 == c2 {
                    return Err(Error::InvalidParams("hermite needs c1 != c2".into()));
                }
            }
            FamilySpec::Laguerre1 { alpha1, alpha2 } => {
                if !(alpha1 > -1.0 && alpha2 > -1.0) {
                    return Err(Error::InvalidParams("laguerre1 needs alpha1, alpha2 > -1".into()));
                }
                let diff = alpha1 - alpha2;
                if diff == diff.round() {
                    return Err(Error::InvalidParams(
                        "laguerre1 needs alpha1 - alpha2 outside the integers".into(),
                    ));
                }
            }
            FamilySpec::Meixner1 { beta, c1, c2 } => {
                if !(beta > 0.0) {
                    return Err(Error::InvalidParams("meixner1 needs beta > 0".into()));
                }
                if !(c1 > 0.0 && c1 < 1.0 && c2 > 0.0 && c2 < 1.0) {
                    return Err(Error::InvalidParams("meixner1 needs 0 < c1, c2 < 1".into()));
                }
                if c1 == c2 {
                    return Err(Error::InvalidParams("meixner1 needs c1 != c2".into()));
                }
            }
            FamilySpec::ConstantToy { u0, v0 } => {
                if u0 == v0 {
                    return Err(Error::InvalidParams("constant_toy needs u0 != v0".into()));
                }
            }
        }
        Ok(())
    }

    /// `true` for the families that come with a pair of measures.
    pub fn has_measures(&self) -> bool {
        !matches!(self, FamilySpec::ConstantToy { .. })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name())?;
        for (i, (k, v)) in self.params().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")
    }
}

/// Coefficient field of a family on `window`.
///
/// Laguerre `a, b` have no closed form here: they are extracted from a
/// determinantal table built in double-double arithmetic on `window + (1, 1)`.
pub fn family_field<T: Real>(spec: &FamilySpec, window: Window) -> Result<CoeffField<T>> {
    spec.validate()?;
    let t = |v: f64| T::from_f64(v);
    let idx = |k: usize| T::from_usize(k);
    let one = T::one();
    let two = t(2.0);
    let field = match *spec {
        FamilySpec::Hermite { c1, c2 } => {
            CoeffField::from_fn(window, |n, m| (idx(n) / two, idx(m) / two, t(c1) / two, t(c2) / two))
        }
        FamilySpec::Meixner1 { beta, c1, c2 } => {
            let (beta, c1, c2) = (t(beta), t(c1), t(c2));
            CoeffField::from_fn(window, |n, m| {
                let (nt, mt) = (idx(n), idx(m));
                let s = beta + nt + mt;
                let shared = nt / (one - c1) + mt / (one - c2);
                (
                    c1 * nt * (s - one) / ((one - c1) * (one - c1)),
                    c2 * mt * (s - one) / ((one - c2) * (one - c2)),
                    s * c1 / (one - c1) + shared,
                    s * c2 / (one - c2) + shared,
                )
            })
        }
        FamilySpec::Laguerre1 { alpha1, alpha2 } => {
            let numeric = laguerre_numeric(alpha1, alpha2, window)?;
            let a = numeric.a().map(|&v| cast::<DoubleDouble, T>(v));
            let b = numeric.b().map(|&v| cast::<DoubleDouble, T>(v));
            let c = Grid::from_fn(window, |n, m| t(2.0 * n as f64 + m as f64 + alpha1 + 1.0));
            let d = Grid::from_fn(window, |n, m| t(n as f64 + 2.0 * m as f64 + alpha2 + 1.0));
            CoeffField::new(a, b, c, d)?
        }
        FamilySpec::ConstantToy { u0, v0 } => CoeffField::from_fn(window, |_, _| (one, one, t(u0), t(v0))),
    };
    Ok(field)
}

fn laguerre_numeric(alpha1: f64, alpha2: f64, window: Window) -> Result<CoeffField<DoubleDouble>> {
    let table_w = window.grow();
    let needed = 2 * table_w.n.max(table_w.m) + table_w.n.min(table_w.m);
    let pair = MomentPair::new(
        laguerre_moments::<DoubleDouble>(alpha1, needed)?,
        laguerre_moments::<DoubleDouble>(alpha2, needed)?,
    )?;
    let table = determinantal_table_with(&pair, table_w, &TableOptions::for_precision(Precision::Extended))?;
    extract_coeffs_with(&table, DEFAULT_FIT_TOLERANCE, Exec::default())
}

/// The two measures of a family, with moments through `order`. Parameter
/// constraints are not enforced beyond what the moment constructors need,
/// so coincident measures surface later as non-normal indices.
pub fn family_moment_pair<T: Real>(spec: &FamilySpec, order: usize) -> Result<MomentPair<T>> {
    match *spec {
        FamilySpec::Hermite { c1, c2 } => MomentPair::new(hermite_moments(c1, order), hermite_moments(c2, order)),
        FamilySpec::Laguerre1 { alpha1, alpha2 } => {
            MomentPair::new(laguerre_moments(alpha1, order)?, laguerre_moments(alpha2, order)?)
        }
        FamilySpec::Meixner1 { beta, c1, c2 } => {
            let cfg = MeixnerConfig::for_precision::<T>();
            MomentPair::new(
                meixner_moments(beta, c1, order, &cfg)?,
                meixner_moments(beta, c2, order, &cfg)?,
            )
        }
        FamilySpec::ConstantToy { .. } => Err(Error::Domain("constant_toy has no associated pair of measures".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(FamilySpec::Hermite { c1: 1.0, c2: 1.0 }.validate().is_err());
        assert!(FamilySpec::Laguerre1 {
            alpha1: 0.0,
            alpha2: 1.0
        }
        .validate()
        .is_err());
        assert!(FamilySpec::Laguerre1 {
            alpha1: -1.0,
            alpha2: 0.5
        }
        .validate()
        .is_err());
        assert!(FamilySpec::Meixner1 {
            beta: 0.0,
            c1: 0.5,
            c2: 0.3
        }
        .validate()
        .is_err());
        assert!(FamilySpec::Meixner1 {
            beta: 1.0,
            c1: 1.0,
            c2: 0.3
        }
        .validate()
        .is_err());
        assert!(FamilySpec::Meixner1 {
            beta: 1.0,
            c1: 0.3,
            c2: 0.3
        }
        .validate()
        .is_err());
        assert!(FamilySpec::ConstantToy { u0: 2.0, v0: 2.0 }.validate().is_err());
        assert!(FamilySpec::Hermite { c1: f64::NAN, c2: 1.0 }.validate().is_err());
        for name in FamilySpec::NAMES {
            FamilySpec::default_for(name).unwrap().validate().unwrap();
        }
        assert!(matches!(
            family_field::<f64>(&FamilySpec::Hermite { c1: 1.0, c2: 1.0 }, Window::new(1, 1)),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn json_specs() {
        let s = FamilySpec::from_json(r#"{"family":"meixner1","params":{"beta":2.0,"c2":0.25}}"#).unwrap();
        assert_eq!(
            s,
            FamilySpec::Meixner1 {
                beta: 2.0,
                c1: 0.5,
                c2: 0.25
            }
        );
        assert_eq!(FamilySpec::from_json(&s.to_json_value().to_string()).unwrap(), s);
        assert!(FamilySpec::from_json(r#"{"family":"jacobi"}"#).is_err());
        assert!(FamilySpec::from_json(r#"{"family":"hermite","params":{"beta":1}}"#).is_err());
        assert!(FamilySpec::from_json("not json").is_err());
    }

    #[test]
    fn closed_form_sites() {
        let h = family_field::<f64>(&FamilySpec::Hermite { c1: 0.0, c2: 2.0 }, Window::new(3, 3)).unwrap();
        assert_eq!(h.at(2, 3), (1.0, 1.5, 0.0, 1.0));
        let m = family_field::<f64>(&FamilySpec::default_for("meixner1").unwrap(), Window::new(2, 2)).unwrap();
        let (a, b, _, _) = m.at(1, 1);
        assert!((a - 4.0).abs() < 1e-14);
        assert!((b - 1.5).abs() < 1e-14);
    }

    #[test]
    fn constant_toy_boundary() {
        let f = family_field::<f64>(&FamilySpec::ConstantToy { u0: 0.5, v0: -1.0 }, Window::new(2, 2)).unwrap();
        assert_eq!(f.at(0, 2), (0.0, 1.0, 0.5, -1.0));
        assert_eq!(f.at(2, 0), (1.0, 0.0, 0.5, -1.0));
        assert_eq!(f.at(1, 1), (1.0, 1.0, 0.5, -1.0));
    }

    #[test]
    fn moment_pairs() {
        let p = family_moment_pair::<f64>(&FamilySpec::Hermite { c1: 0.0, c2: 1.0 }, 2).unwrap();
        assert_eq!(p.mu1.values(), &[1.0, 0.0, 0.5]);
        assert_eq!(p.mu2.values(), &[1.0, 0.5, 0.75]);
        let p = family_moment_pair::<f64>(&FamilySpec::default_for("laguerre1").unwrap(), 2).unwrap();
        assert_eq!(p.mu1.values(), &[1.0, 1.0, 2.0]);
        assert!(matches!(
            family_moment_pair::<f64>(&FamilySpec::default_for("constant_toy").unwrap(), 3),
            Err(Error::Domain(_))
        ));
        assert!(family_moment_pair::<f64>(&FamilySpec::Hermite { c1: 1.0, c2: 1.0 }, 3).is_ok());
    }
}
