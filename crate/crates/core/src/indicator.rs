//! The seven performance indicators and the fixed-order vector that carries them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of indicator axes.
pub const AXES: usize = 7;

/// One generalized skill axis. The discriminant is the axis position used by
/// every consumer: prediction features, radar polygons and UI charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Indicator {
    TraditionalLow = 0,
    TraditionalHigh = 1,
    Technical = 2,
    Autonomous = 3,
    Endgame = 4,
    Fouls = 5,
    Defense = 6,
}

impl Indicator {
    pub const ALL: [Indicator; AXES] = [
        Indicator::TraditionalLow,
        Indicator::TraditionalHigh,
        Indicator::Technical,
        Indicator::Autonomous,
        Indicator::Endgame,
        Indicator::Fouls,
        Indicator::Defense,
    ];

    /// The five indicators computed from weighted breakdown fields.
    pub const SCORING: [Indicator; 5] = [
        Indicator::TraditionalLow,
        Indicator::TraditionalHigh,
        Indicator::Technical,
        Indicator::Autonomous,
        Indicator::Endgame,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Indicator::TraditionalLow => "TraditionalLow",
            Indicator::TraditionalHigh => "TraditionalHigh",
            Indicator::Technical => "Technical",
            Indicator::Autonomous => "Autonomous",
            Indicator::Endgame => "Endgame",
            Indicator::Fouls => "Fouls",
            Indicator::Defense => "Defense",
        }
    }

    /// Fouls and Defense are stored as non-positive values in raw form.
    pub fn is_penalty(self) -> bool {
        matches!(self, Indicator::Fouls | Indicator::Defense)
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Seven indicator values in the global axis order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndicatorVector(pub [f64; AXES]);

impl IndicatorVector {
    pub const ZERO: IndicatorVector = IndicatorVector([0.0; AXES]);
    pub const ONES: IndicatorVector = IndicatorVector([1.0; AXES]);

    pub fn new(values: [f64; AXES]) -> Self {
        IndicatorVector(values)
    }

    pub fn get(&self, indicator: Indicator) -> f64 {
        self.0[indicator.index()]
    }

    pub fn set(&mut self, indicator: Indicator, value: f64) {
        self.0[indicator.index()] = value;
    }

    pub fn values(&self) -> &[f64; AXES] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = (Indicator, f64)> + '_ {
        Indicator::ALL.into_iter().zip(self.0.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// True when every component lies in `[0, 1]`.
    pub fn is_normalized(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Raw-form sign constraints: scoring axes non-negative, penalty axes non-positive.
    pub fn is_raw_consistent(&self) -> bool {
        self.iter().all(|(i, v)| {
            v.is_finite() && if i.is_penalty() { v <= 0.0 } else { v >= 0.0 }
        })
    }

    /// Component-wise mean. Each component's terms are summed in ascending
    /// order so the result does not depend on the order of `vectors`.
    pub fn mean_of(vectors: &[&IndicatorVector]) -> IndicatorVector {
        let mut out = [0.0; AXES];
        if vectors.is_empty() {
            return IndicatorVector(out);
        }
        let n = vectors.len() as f64;
        let mut column = Vec::with_capacity(vectors.len());
        for (k, slot) in out.iter_mut().enumerate() {
            column.clear();
            column.extend(vectors.iter().map(|v| v.0[k]));
            column.sort_by(f64::total_cmp);
            *slot = column.iter().sum::<f64>() / n;
        }
        IndicatorVector(out)
    }

    /// Cyclic rotation by `shift` axes: `out[k] = self[(k + shift) % 7]`.
    pub fn rotate(&self, shift: usize) -> IndicatorVector {
        let mut out = [0.0; AXES];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.0[(k + shift) % AXES];
        }
        IndicatorVector(out)
    }

    pub fn scale(&self, factor: f64) -> IndicatorVector {
        IndicatorVector(self.0.map(|v| v * factor))
    }
}

/// A team identifier such as `"2539"`. TBA's `frc` prefix is stripped on parse.
///
/// Ordering is numeric for all-digit identifiers (so `"225" < "1218"`), with
/// non-numeric identifiers sorted lexicographically after them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TeamId(String);

impl TeamId {
    pub fn new(id: impl Into<String>) -> Self {
        TeamId(id.into())
    }

    /// Parses a TBA team key (`frc2539`) or a bare identifier (`2539`).
    pub fn from_key(key: &str) -> Self {
        TeamId(key.strip_prefix("frc").unwrap_or(key).to_string())
    }

    /// The TBA team key form, `frc<id>`.
    pub fn to_key(&self) -> String {
        format!("frc{}", self.0)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn sort_key(&self) -> (u8, u64, &str) {
        match self.0.parse::<u64>() {
            Ok(n) if !self.0.is_empty() && self.0.bytes().all(|b| b.is_ascii_digit()) => {
                (0, n, &self.0)
            }
            _ => (1, 0, &self.0),
        }
    }
}

impl Ord for TeamId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for TeamId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TeamId {
    fn from(s: &str) -> Self {
        TeamId::from_key(s)
    }
}

impl Serialize for TeamId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for TeamId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(TeamId::from_key(&s))
    }
}
