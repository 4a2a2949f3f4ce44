//! Scalar-or-range parameters (`2`, `0:2:0.05`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// Either a single value or an inclusive range `start:stop:step`.
///
/// The stop value is included when it lies on the grid (within a small
/// fraction of a step), so `0.05:2:0.05` has 40 points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Value(f64),
    Range { start: f64, stop: f64, step: f64 },
}

const GRID_SLACK: f64 = 1e-9;

/// Rounds to 13 significant digits so that grid points print as typed.
fn tidy(x: f64) -> f64 {
    format!("{x:.12e}").parse().unwrap_or(x)
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Value(x) => vec![x],
            Axis::Range { start, stop, step } => {
                let n = ((stop - start) / step + GRID_SLACK).floor() as usize;
                (0..=n).map(|i| tidy(start + i as f64 * step)).collect()
            }
        }
    }

    pub fn is_range(&self) -> bool {
        matches!(self, Axis::Range { .. })
    }

    /// The single value, or an error naming `what` for ranges.
    pub fn scalar(&self, what: &str) -> Result<f64, CliError> {
        match *self {
            Axis::Value(x) => Ok(x),
            Axis::Range { .. } => Err(CliError::Config(format!(
                "{what} must be a single value for this command, got {self}"
            ))),
        }
    }

    pub fn max(&self) -> f64 {
        self.values().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Config(format!("not a finite number: {p:?} in {s:?}")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [x] => Ok(Axis::Value(num(x)?)),
            [a, b, c] => {
                let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
                if !(step > 0.0) {
                    return Err(CliError::Config(format!("range step must be > 0 in {s:?}")));
                }
                if stop < start {
                    return Err(CliError::Config(format!("range stop below start in {s:?}")));
                }
                if (stop - start) / step > 1e7 {
                    return Err(CliError::Config(format!("range {s:?} has too many points")));
                }
                Ok(Axis::Range { start, stop, step })
            }
            _ => Err(CliError::Config(format!(
                "expected a number or start:stop:step, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Value(x) => write!(f, "{x}"),
            Axis::Range { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
        }
    }
}

impl Serialize for Axis {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Axis::Value(x) => s.serialize_f64(*x),
            r => s.serialize_str(&r.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Axis::Value(x)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_stop() {
        let a: Axis = "0.05:2:0.05".parse().unwrap();
        assert_eq!(a.values().len(), 40);
        let b: Axis = "0:2:0.05".parse().unwrap();
        assert_eq!(b.values().len(), 41);
        assert_eq!(b.values()[3], 0.15);
        let c: Axis = "0:1:0.3".parse().unwrap();
        assert_eq!(c.values(), vec![0.0, 0.3, 0.6, 0.9]);
    }

    #[test]
    fn rejects_bad_specs() {
        for s in [
            "", "a", "1:2", "1:2:0", "2:1:0.1", "1:2:-1", "nan", "0:inf:1",
        ] {
            assert!(s.parse::<Axis>().is_err(), "{s}");
        }
    }

    #[test]
    fn serde_round_trip() {
        for s in ["2", "0.5:5:0.1"] {
            let a: Axis = s.parse().unwrap();
            let j = serde_json::to_string(&a).unwrap();
            assert_eq!(serde_json::from_str::<Axis>(&j).unwrap(), a);
        }
        assert_eq!(serde_json::from_str::<Axis>("3").unwrap(), Axis::Value(3.0));
    }
}
