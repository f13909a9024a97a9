//! Identifiers for time series, temporal vertices and extended time bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Characters that cannot appear in a series name because they are meaningful
/// to one of the text formats or to the `SERIES@TIME` query syntax.
const RESERVED: &[char] = &['-', '>', ',', ';', '@', '#', '{', '}', '"', '[', ']'];

/// Name of one time series. Non-empty, no whitespace, no reserved characters.
///
/// Ordering is lexicographic on the name and is used everywhere a canonical
/// iteration order is needed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeriesId(String);

impl SeriesId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidSeriesName {
                name,
                reason: "empty".into(),
            });
        }
        if let Some(c) = name.chars().find(|c| c.is_whitespace() || RESERVED.contains(c)) {
            return Err(Error::InvalidSeriesName {
                name: name.clone(),
                reason: format!("contains reserved character {c:?}"),
            });
        }
        Ok(SeriesId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SeriesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for SeriesId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// One time series instance: a series at a signed time index.
///
/// The reference time of the (first) effect is 0; interventions sit at
/// non-positive times.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TemporalVertex {
    pub series: SeriesId,
    pub time: i64,
}

impl TemporalVertex {
    pub fn new(series: SeriesId, time: i64) -> Self {
        TemporalVertex { series, time }
    }
}

impl fmt::Display for TemporalVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.series, self.time)
    }
}

/// A time index extended with the two infinities.
///
/// `t_NC` thresholds live in Z ∪ {+∞} (never reached ⇒ `PosInf`);
/// accessibility ceilings live in Z ∪ {−∞} (never accessible ⇒ `NegInf`).
/// Both use this one type; the unused infinity simply never occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtTime {
    NegInf,
    Finite(i64),
    PosInf,
}

impl ExtTime {
    pub fn finite(self) -> Option<i64> {
        match self {
            ExtTime::Finite(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtTime::Finite(_))
    }
}

impl PartialOrd for ExtTime {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtTime {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use ExtTime::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => std::cmp::Ordering::Equal,
            (NegInf, _) | (_, PosInf) => std::cmp::Ordering::Less,
            (_, NegInf) | (PosInf, _) => std::cmp::Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl From<i64> for ExtTime {
    fn from(t: i64) -> Self {
        ExtTime::Finite(t)
    }
}

impl fmt::Display for ExtTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtTime::NegInf => f.write_str("-inf"),
            ExtTime::Finite(t) => write!(f, "{t}"),
            ExtTime::PosInf => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtTime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtTime::NegInf => s.serialize_str("-inf"),
            ExtTime::PosInf => s.serialize_str("inf"),
            ExtTime::Finite(t) => s.serialize_i64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for ExtTime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(t) => Ok(ExtTime::Finite(t)),
            Raw::Str(s) if s == "inf" || s == "+inf" => Ok(ExtTime::PosInf),
            Raw::Str(s) if s == "-inf" => Ok(ExtTime::NegInf),
            Raw::Str(s) => Err(D::Error::custom(format!("invalid extended time {s:?}"))),
        }
    }
}
