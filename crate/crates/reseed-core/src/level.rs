//! Coverage context levels.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coverage context level, i.e. a total-coverage percentage at which a
/// dedicated test list is trained and later dispatched.
///
/// Stored in hundredths of a percent so that levels order and hash exactly;
/// all arithmetic against running coverage happens in percent as `f64`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Level(u32);

impl Level {
    /// Constructs a level from a percentage, rounding to 0.01 precision.
    pub fn from_percent(pct: f64) -> Result<Self> {
        if !(0.0..=100.0).contains(&pct) || !pct.is_finite() {
            return Err(Error::structural(format!(
                "coverage level {pct} outside [0, 100]"
            )));
        }
        Ok(Level((pct * 100.0).round() as u32))
    }

    pub fn percent(self) -> f64 {
        f64::from(self.0) / 100.0
    }

    /// Raw value in hundredths of a percent.
    pub fn centi(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 100 == 0 {
            write!(f, "{}", self.0 / 100)
        } else {
            let pct = f64::from(self.0) / 100.0;
            let s = format!("{pct:.2}");
            write!(f, "{}", s.trim_end_matches('0').trim_end_matches('.'))
        }
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 % 100 == 0 {
            serializer.serialize_u64(u64::from(self.0 / 100))
        } else {
            serializer.serialize_f64(self.percent())
        }
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pct = f64::deserialize(deserializer)?;
        Level::from_percent(pct).map_err(de::Error::custom)
    }
}

/// Parses a level from its textual form (as used in file keys and CLI args).
impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pct: f64 = s
            .parse()
            .map_err(|_| Error::structural(format!("invalid level: {s:?}")))?;
        Level::from_percent(pct)
    }
}
