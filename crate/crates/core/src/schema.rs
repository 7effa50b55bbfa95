//! Per-season mapping from raw score-breakdown fields onto the seven indicators.
//!
//! Config format (`schemas/<year>.json`):
//!
//! ```json
//! {
//!   "year": 2019,
//!   "indicators": {
//!     "TraditionalLow": [{"field": "cargoPoints", "weight": 1.0}],
//!     "TraditionalHigh": [...], "Technical": [...], "Autonomous": [...], "Endgame": [...]
//!   },
//!   "foul_field": "foulPoints"
//! }
//! ```
//!
//! Fouls and Defense are derived, not configured: Fouls is the negated foul
//! points credited to the opponent, Defense the negated opponent total.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::indicator::{Indicator, IndicatorVector, AXES};
use crate::ingest::{numeric_value, EventDataset, MatchRecord, Side};

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("cannot read schema: {0}")]
    Io(String),
    #[error("malformed schema document: {0}")]
    Format(String),
    #[error("indicator {indicator}: {reason}")]
    Indicator { indicator: String, reason: String },
    #[error("field {field}: {reason}")]
    Field { field: String, reason: String },
    #[error("match {match_key}: breakdown field `{field}` is missing or not numeric")]
    MissingField { field: String, match_key: String },
    #[error("match {match_key}: breakdown field `{field}` is negative ({value})")]
    NegativeField {
        field: String,
        match_key: String,
        value: f64,
    },
    #[error("match {match_key} is from {found}, schema is for {expected}")]
    YearMismatch {
        match_key: String,
        expected: i32,
        found: i32,
    },
}

impl SchemaError {
    fn indicator(indicator: impl fmt::Display, reason: impl Into<String>) -> Self {
        SchemaError::Indicator {
            indicator: indicator.to_string(),
            reason: reason.into(),
        }
    }
}

/// One weighted breakdown field contributing to an indicator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub field: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearSchema {
    pub year: i32,
    /// Terms for the five scoring indicators, indexed by axis.
    terms: [Vec<Term>; 5],
    pub foul_field: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawWeight {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    field: String,
    weight: RawWeight,
}

/// Indicator entries in document order, duplicates preserved so they can be rejected.
struct RawIndicators(Vec<(String, Vec<RawTerm>)>);

impl<'de> Deserialize<'de> for RawIndicators {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = RawIndicators;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from indicator name to a list of terms")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<RawTerm>>()? {
                    entries.push((k, v));
                }
                Ok(RawIndicators(entries))
            }
        }

        deserializer.deserialize_map(EntriesVisitor)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    year: i32,
    indicators: RawIndicators,
    foul_field: String,
}

#[derive(Serialize)]
struct SchemaDoc<'a> {
    year: i32,
    indicators: std::collections::BTreeMap<&'static str, &'a [Term]>,
    foul_field: &'a str,
}

impl YearSchema {
    /// Builds a schema from per-indicator terms, validating completeness and weights.
    pub fn new(
        year: i32,
        entries: impl IntoIterator<Item = (Indicator, Vec<Term>)>,
        foul_field: impl Into<String>,
    ) -> Result<YearSchema, SchemaError> {
        let mut terms: [Option<Vec<Term>>; 5] = Default::default();
        for (indicator, list) in entries {
            if indicator.is_penalty() {
                return Err(SchemaError::indicator(
                    indicator,
                    "is derived from fouls and opponent score and cannot be mapped",
                ));
            }
            let slot = &mut terms[indicator.index()];
            if slot.is_some() {
                return Err(SchemaError::indicator(indicator, "duplicate entry"));
            }
            if list.is_empty() {
                return Err(SchemaError::indicator(indicator, "needs at least one term"));
            }
            let mut seen = BTreeSet::new();
            for t in &list {
                if t.field.is_empty() {
                    return Err(SchemaError::indicator(indicator, "empty field name"));
                }
                if !seen.insert(t.field.as_str()) {
                    return Err(SchemaError::indicator(
                        indicator,
                        format!("field `{}` listed twice", t.field),
                    ));
                }
                if !t.weight.is_finite() {
                    return Err(SchemaError::indicator(
                        indicator,
                        format!("weight for `{}` is not finite", t.field),
                    ));
                }
                if t.weight < 0.0 {
                    return Err(SchemaError::indicator(
                        indicator,
                        format!("weight for `{}` is negative", t.field),
                    ));
                }
            }
            *slot = Some(list);
        }
        let foul_field = foul_field.into();
        if foul_field.is_empty() {
            return Err(SchemaError::Field {
                field: "foul_field".into(),
                reason: "empty".into(),
            });
        }
        let mut out: [Vec<Term>; 5] = Default::default();
        for indicator in Indicator::SCORING {
            out[indicator.index()] = terms[indicator.index()]
                .take()
                .ok_or_else(|| SchemaError::indicator(indicator, "no mapping given"))?;
        }
        Ok(YearSchema {
            year,
            terms: out,
            foul_field,
        })
    }

    pub fn from_json_str(text: &str) -> Result<YearSchema, SchemaError> {
        let raw: RawSchema =
            serde_json::from_str(text).map_err(|e| SchemaError::Format(e.to_string()))?;
        let mut entries = Vec::with_capacity(raw.indicators.0.len());
        for (name, list) in raw.indicators.0 {
            let indicator: Indicator = name
                .parse()
                .map_err(|n| SchemaError::indicator(n, "unknown indicator"))?;
            let mut terms = Vec::with_capacity(list.len());
            for t in list {
                let weight = match t.weight {
                    RawWeight::Number(w) => w,
                    RawWeight::Text(s) => s.trim().parse::<f64>().map_err(|_| {
                        SchemaError::indicator(indicator, format!("weight `{s}` is not a number"))
                    })?,
                };
                terms.push(Term {
                    field: t.field,
                    weight,
                });
            }
            entries.push((indicator, terms));
        }
        YearSchema::new(raw.year, entries, raw.foul_field)
    }

    pub fn to_json_string(&self) -> String {
        let doc = SchemaDoc {
            year: self.year,
            indicators: Indicator::SCORING
                .into_iter()
                .map(|i| (i.name(), self.terms(i)))
                .collect(),
            foul_field: &self.foul_field,
        };
        serde_json::to_string_pretty(&doc).expect("schema document serializes")
    }

    /// Terms mapped onto a scoring indicator; empty for Fouls and Defense.
    pub fn terms(&self, indicator: Indicator) -> &[Term] {
        if indicator.is_penalty() {
            &[]
        } else {
            &self.terms[indicator.index()]
        }
    }

    /// Every breakdown field this schema reads.
    pub fn referenced_fields(&self) -> BTreeSet<&str> {
        self.terms
            .iter()
            .flatten()
            .map(|t| t.field.as_str())
            .chain(std::iter::once(self.foul_field.as_str()))
            .collect()
    }

    /// Checks that every referenced field is present and numeric on both sides
    /// of every match in `ds`.
    pub fn check_dataset(&self, ds: &EventDataset) -> Result<(), SchemaError> {
        for m in &ds.matches {
            for side in [Side::Red, Side::Blue] {
                self.score_alliance(m, side)?;
            }
        }
        Ok(())
    }

    /// Raw indicator vector for one alliance of a match.
    pub fn score_alliance(&self, m: &MatchRecord, side: Side) -> Result<IndicatorVector, SchemaError> {
        if m.year != self.year {
            return Err(SchemaError::YearMismatch {
                match_key: m.match_key.clone(),
                expected: self.year,
                found: m.year,
            });
        }
        let read = |side: Side, field: &str| -> Result<f64, SchemaError> {
            let value = m
                .breakdown(side)
                .get(field)
                .and_then(numeric_value)
                .filter(|v| v.is_finite())
                .ok_or_else(|| SchemaError::MissingField {
                    field: field.to_string(),
                    match_key: m.match_key.clone(),
                })?;
            if value < 0.0 {
                return Err(SchemaError::NegativeField {
                    field: field.to_string(),
                    match_key: m.match_key.clone(),
                    value,
                });
            }
            Ok(value)
        };

        let mut out = [0.0; AXES];
        for indicator in Indicator::SCORING {
            let mut total = 0.0;
            for t in self.terms(indicator) {
                total += t.weight * read(side, &t.field)?;
            }
            out[indicator.index()] = total;
        }
        // Foul points in the opponent's breakdown were conceded by this side.
        out[Indicator::Fouls.index()] = -read(side.opponent(), &self.foul_field)?;
        out[Indicator::Defense.index()] = -f64::from(m.total(side.opponent()));
        Ok(IndicatorVector(out))
    }
}

/// Reads and validates a schema config file.
pub fn load_year_schema(path: &Path) -> Result<YearSchema, SchemaError> {
    let text = fs::read_to_string(path).map_err(|e| SchemaError::Io(format!("{}: {e}", path.display())))?;
    YearSchema::from_json_str(&text)
}
