//! Loading qualification-match fixtures shaped after The Blue Alliance match schema.
//!
//! A fixture file holds either one match object or an array of them. An event
//! is a single fixture file or a directory of `*.json` fixture files. Matches
//! that fail validation are recorded in [`EventDataset::skipped`] instead of
//! aborting the load.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::indicator::TeamId;

/// Raw score-breakdown fields for one alliance, kept verbatim.
pub type Breakdown = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Red,
    Blue,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::Red => Side::Blue,
            Side::Blue => Side::Red,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Red => "red",
            Side::Blue => "blue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    Red,
    Blue,
    Tie,
}

impl Winner {
    pub fn from_totals(red: u32, blue: u32) -> Winner {
        match red.cmp(&blue) {
            std::cmp::Ordering::Greater => Winner::Red,
            std::cmp::Ordering::Less => Winner::Blue,
            std::cmp::Ordering::Equal => Winner::Tie,
        }
    }
}

/// A match object that failed validation. `field` names the offending key.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid match field `{field}`: {reason}")]
pub struct ValidationError {
    pub field: String,
    pub reason: String,
}

impl ValidationError {
    fn new(field: &str, reason: impl Into<String>) -> Self {
        ValidationError {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// One qualification match.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub match_key: String,
    pub event_key: String,
    pub year: i32,
    pub red_teams: [TeamId; 3],
    pub blue_teams: [TeamId; 3],
    pub red_breakdown: Breakdown,
    pub blue_breakdown: Breakdown,
    pub red_total: u32,
    pub blue_total: u32,
    pub winner: Winner,
}

impl MatchRecord {
    pub fn teams(&self, side: Side) -> &[TeamId; 3] {
        match side {
            Side::Red => &self.red_teams,
            Side::Blue => &self.blue_teams,
        }
    }

    pub fn breakdown(&self, side: Side) -> &Breakdown {
        match side {
            Side::Red => &self.red_breakdown,
            Side::Blue => &self.blue_breakdown,
        }
    }

    pub fn total(&self, side: Side) -> u32 {
        match side {
            Side::Red => self.red_total,
            Side::Blue => self.blue_total,
        }
    }

    pub fn all_teams(&self) -> impl Iterator<Item = &TeamId> {
        self.red_teams.iter().chain(self.blue_teams.iter())
    }

    /// Serializes back into the fixture shape accepted by [`parse_match_record`].
    pub fn to_fixture(&self) -> Value {
        let alliance = |side: Side| {
            json!({
                "team_keys": self.teams(side).iter().map(TeamId::to_key).collect::<Vec<_>>(),
                "score": self.total(side),
            })
        };
        let winning = match self.winner {
            Winner::Red => "red",
            Winner::Blue => "blue",
            Winner::Tie => "",
        };
        json!({
            "key": self.match_key,
            "event_key": self.event_key,
            "comp_level": "qm",
            "alliances": { "red": alliance(Side::Red), "blue": alliance(Side::Blue) },
            "score_breakdown": { "red": self.red_breakdown, "blue": self.blue_breakdown },
            "winning_alliance": winning,
        })
    }
}

/// Numeric view of a breakdown value. Booleans count as 0/1; strings and
/// nested values are not numeric.
pub fn numeric_value(value: &Value) -> Option<f64> {
    match value {
        Value::Number(n) => n.as_f64(),
        Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
        _ => None,
    }
}

/// Derives the season from an event key such as `2019paphi`.
pub fn year_from_event_key(event_key: &str) -> Option<i32> {
    let digits: String = event_key.chars().take(4).collect();
    if digits.len() == 4 && digits.bytes().all(|b| b.is_ascii_digit()) {
        digits.parse().ok()
    } else {
        None
    }
}

fn str_field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a str, ValidationError> {
    match obj.get(key) {
        Some(Value::String(s)) if !s.is_empty() => Ok(s),
        Some(_) => Err(ValidationError::new(key, "expected a non-empty string")),
        None => Err(ValidationError::new(key, "missing")),
    }
}

fn alliance_teams(alliance: Option<&Value>, field: &str) -> Result<[TeamId; 3], ValidationError> {
    let keys = alliance
        .and_then(|a| a.get("team_keys"))
        .ok_or_else(|| ValidationError::new(field, "missing team list"))?;
    let keys = keys
        .as_array()
        .ok_or_else(|| ValidationError::new(field, "team list is not an array"))?;
    if keys.len() != 3 {
        return Err(ValidationError::new(
            field,
            format!("expected 3 teams, found {}", keys.len()),
        ));
    }
    let mut ids = Vec::with_capacity(3);
    for key in keys {
        let key = key
            .as_str()
            .filter(|k| !TeamId::from_key(k).as_str().is_empty())
            .ok_or_else(|| ValidationError::new(field, "team key is not a non-empty string"))?;
        ids.push(TeamId::from_key(key));
    }
    let distinct: BTreeSet<_> = ids.iter().collect();
    if distinct.len() != 3 {
        return Err(ValidationError::new(field, "duplicate team in alliance"));
    }
    Ok([ids[0].clone(), ids[1].clone(), ids[2].clone()])
}

fn alliance_total(alliance: Option<&Value>, field: &str) -> Result<u32, ValidationError> {
    let score = alliance
        .and_then(|a| a.get("score"))
        .ok_or_else(|| ValidationError::new(field, "missing score"))?;
    // TBA reports -1 for matches that were never played.
    match score.as_i64() {
        Some(s) if (0..=i64::from(u32::MAX)).contains(&s) => Ok(s as u32),
        Some(s) => Err(ValidationError::new(field, format!("score {s} is not a played total"))),
        None => match score.as_f64() {
            Some(f) if f >= 0.0 && f.fract() == 0.0 && f <= f64::from(u32::MAX) => Ok(f as u32),
            _ => Err(ValidationError::new(field, "score is not a non-negative integer")),
        },
    }
}

fn breakdown_side(breakdown: &Map<String, Value>, side: Side) -> Result<Breakdown, ValidationError> {
    match breakdown.get(side.as_str()) {
        Some(Value::Object(fields)) => Ok(fields.iter().map(|(k, v)| (k.clone(), v.clone())).collect()),
        Some(_) => Err(ValidationError::new(
            "score_breakdown",
            format!("{} breakdown is not an object", side.as_str()),
        )),
        None => Err(ValidationError::new(
            "score_breakdown",
            format!("missing {} breakdown", side.as_str()),
        )),
    }
}

/// Validates one TBA-shaped match object.
pub fn parse_match_value(raw: &Value) -> Result<MatchRecord, ValidationError> {
    let obj = raw
        .as_object()
        .ok_or_else(|| ValidationError::new("match", "expected a JSON object"))?;
    let match_key = str_field(obj, "key")?.to_string();
    let event_key = str_field(obj, "event_key")?.to_string();
    let year = year_from_event_key(&event_key)
        .ok_or_else(|| ValidationError::new("event_key", "does not start with a 4-digit season"))?;

    let alliances = obj.get("alliances");
    let red = alliances.and_then(|a| a.get("red"));
    let blue = alliances.and_then(|a| a.get("blue"));
    let red_teams = alliance_teams(red, "red_teams")?;
    let blue_teams = alliance_teams(blue, "blue_teams")?;
    if red_teams.iter().any(|t| blue_teams.contains(t)) {
        return Err(ValidationError::new("blue_teams", "team appears on both alliances"));
    }
    let red_total = alliance_total(red, "red_total")?;
    let blue_total = alliance_total(blue, "blue_total")?;

    let breakdown = match obj.get("score_breakdown") {
        Some(Value::Object(b)) => b,
        Some(Value::Null) | None => {
            return Err(ValidationError::new("score_breakdown", "missing"));
        }
        Some(_) => return Err(ValidationError::new("score_breakdown", "expected an object")),
    };
    let red_breakdown = breakdown_side(breakdown, Side::Red)?;
    let blue_breakdown = breakdown_side(breakdown, Side::Blue)?;

    Ok(MatchRecord {
        match_key,
        event_key,
        year,
        red_teams,
        blue_teams,
        red_breakdown,
        blue_breakdown,
        red_total,
        blue_total,
        winner: Winner::from_totals(red_total, blue_total),
    })
}

/// Parses a single match object from JSON text.
///
/// Syntax errors are reported as a `ValidationError` on the `match` field.
pub fn parse_match_record(raw_json: &str) -> Result<MatchRecord, ValidationError> {
    let value: Value = serde_json::from_str(raw_json)
        .map_err(|e| ValidationError::new("match", format!("invalid JSON: {e}")))?;
    parse_match_value(&value)
}

/// A match that was rejected during loading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub match_key: String,
    pub reason: String,
}

/// All validated matches of one event (or one season file).
#[derive(Debug, Clone, PartialEq)]
pub struct EventDataset {
    pub event_key: String,
    pub year: i32,
    pub matches: Vec<MatchRecord>,
    pub skipped: Vec<Skipped>,
}

impl EventDataset {
    /// Builds a dataset from already-decoded match objects. `fallback_key`
    /// names the event when the matches do not agree on one.
    pub fn from_values<'a>(
        fallback_key: &str,
        values: impl IntoIterator<Item = (String, &'a Value)>,
    ) -> EventDataset {
        let mut matches = Vec::new();
        let mut skipped = Vec::new();
        for (label, value) in values {
            match parse_match_value(value) {
                Ok(m) => matches.push(m),
                Err(e) => {
                    let key = value
                        .get("key")
                        .and_then(Value::as_str)
                        .map(str::to_string)
                        .unwrap_or(label);
                    skipped.push(Skipped {
                        match_key: key,
                        reason: e.to_string(),
                    });
                }
            }
        }
        let mut ds = EventDataset {
            event_key: fallback_key.to_string(),
            year: year_from_event_key(fallback_key).unwrap_or(0),
            matches: Vec::new(),
            skipped,
        };
        if let Some(first) = matches.first() {
            ds.year = first.year;
            if matches.iter().all(|m| m.event_key == first.event_key) {
                ds.event_key = first.event_key.clone();
            }
        }
        for m in matches {
            if m.year == ds.year {
                ds.matches.push(m);
            } else {
                ds.skipped.push(Skipped {
                    reason: format!("season {} does not match dataset season {}", m.year, ds.year),
                    match_key: m.match_key,
                });
            }
        }
        ds
    }

    pub fn teams(&self) -> BTreeSet<&TeamId> {
        self.matches.iter().flat_map(MatchRecord::all_teams).collect()
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads the match objects in one fixture file. A syntactically broken file
/// yields a single skipped entry rather than an error.
fn read_fixture(path: &Path) -> Result<Result<Vec<Value>, Skipped>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(match serde_json::from_str::<Value>(&text) {
        Ok(Value::Array(items)) => Ok(items),
        Ok(other) => Ok(vec![other]),
        Err(e) => Err(Skipped {
            match_key: path.display().to_string(),
            reason: format!("invalid JSON: {e}"),
        }),
    })
}

/// Loads every match under `path`, a fixture file or a directory of `*.json`
/// fixtures (read in file-name order, non-recursive). Files ending in
/// `.rankings.json` are event rankings, not matches, and are ignored.
///
/// Only an unreadable `path` is an error; broken matches land in `skipped`.
pub fn load_event(path: &Path) -> Result<EventDataset, IngestError> {
    let meta = fs::metadata(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let files: Vec<PathBuf> = if meta.is_dir() {
        let mut files = Vec::new();
        let entries = fs::read_dir(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for entry in entries {
            let entry = entry.map_err(|source| IngestError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let p = entry.path();
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            if p.is_file() && name.ends_with(".json") && !name.ends_with(".rankings.json") {
                files.push(p);
            }
        }
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };

    let mut values: Vec<(String, Value)> = Vec::new();
    let mut broken = Vec::new();
    for file in &files {
        match read_fixture(file)? {
            Ok(items) => {
                let many = items.len() > 1;
                for (i, v) in items.into_iter().enumerate() {
                    let label = if many {
                        format!("{}#{i}", file.display())
                    } else {
                        file.display().to_string()
                    };
                    values.push((label, v));
                }
            }
            Err(skip) => broken.push(skip),
        }
    }
    let mut ds = EventDataset::from_values(&file_stem(path), values.iter().map(|(l, v)| (l.clone(), v)));
    ds.skipped.extend(broken);
    Ok(ds)
}

/// Summary counts for an [`EventDataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntegrityReport {
    pub matches: usize,
    pub teams: usize,
    pub ties: usize,
    pub skipped: usize,
}

pub fn dataset_integrity_report(ds: &EventDataset) -> IntegrityReport {
    IntegrityReport {
        matches: ds.matches.len(),
        teams: ds.teams().len(),
        ties: ds.matches.iter().filter(|m| m.winner == Winner::Tie).count(),
        skipped: ds.skipped.len(),
    }
}

/// Event rankings in the TBA `/event/{key}/rankings` shape:
pub fn rankings_document(ranking: &[TeamId]) -> Value {
    json!({
        "rankings": ranking
            .iter()
            .enumerate()
            .map(|(i, t)| json!({"rank": i + 1, "team_key": t.to_key()}))
            .collect::<Vec<_>>()
    })
}

/// Reads a rankings document, ordering teams by `rank`.
pub fn parse_rankings(text: &str) -> Result<Vec<TeamId>, String> {
    #[derive(serde::Deserialize)]
    struct Entry {
        rank: u32,
        team_key: String,
    }
    #[derive(serde::Deserialize)]
    struct Doc {
        rankings: Vec<Entry>,
    }
    let mut doc: Doc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    doc.rankings.sort_by_key(|e| e.rank);
    let ids: Vec<TeamId> = doc.rankings.iter().map(|e| TeamId::from_key(&e.team_key)).collect();
    let mut ranks: Vec<u32> = doc.rankings.iter().map(|e| e.rank).collect();
    ranks.dedup();
    if ranks.len() != ids.len() {
        return Err("duplicate rank".into());
    }
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(red: i64, blue: i64) -> Value {
        json!({
            "key": "2019tst_qm1",
            "event_key": "2019tst",
            "alliances": {
                "red": {"team_keys": ["frc1", "frc2", "frc3"], "score": red},
                "blue": {"team_keys": ["frc4", "frc5", "frc6"], "score": blue}
            },
            "score_breakdown": {
                "red": {"cargoPoints": 12, "foulPoints": 3, "habLineRobot1": "CrossedHabLine", "completedRocketFar": true},
                "blue": {"cargoPoints": 6, "foulPoints": 0}
            }
        })
    }

    #[test]
    fn winner_follows_totals() {
        let m = parse_match_value(&fixture(60, 45)).unwrap();
        assert_eq!(m.winner, Winner::Red);
        assert_eq!(m.red_teams[0], TeamId::new("1"));
        let m = parse_match_value(&fixture(30, 30)).unwrap();
        assert_eq!(m.winner, Winner::Tie);
        let m = parse_match_value(&fixture(10, 11)).unwrap();
        assert_eq!(m.winner, Winner::Blue);
    }

    #[test]
    fn unknown_fields_are_kept_verbatim() {
        let m = parse_match_value(&fixture(60, 45)).unwrap();
        assert_eq!(m.red_breakdown["habLineRobot1"], json!("CrossedHabLine"));
        assert_eq!(numeric_value(&m.red_breakdown["completedRocketFar"]), Some(1.0));
        assert_eq!(numeric_value(&m.red_breakdown["habLineRobot1"]), None);
    }

    #[test]
    fn missing_blue_teams_names_the_field() {
        let mut v = fixture(1, 2);
        v["alliances"]["blue"].as_object_mut().unwrap().remove("team_keys");
        let err = parse_match_value(&v).unwrap_err();
        assert_eq!(err.field, "blue_teams");
    }

    #[test]
    fn field_errors() {
        let mut v = fixture(1, 2);
        v["alliances"]["red"]["team_keys"] = json!(["frc1", "frc2"]);
        assert_eq!(parse_match_value(&v).unwrap_err().field, "red_teams");

        let mut v = fixture(1, 2);
        v["alliances"]["red"].as_object_mut().unwrap().remove("score");
        assert_eq!(parse_match_value(&v).unwrap_err().field, "red_total");

        let v = fixture(-1, -1);
        assert_eq!(parse_match_value(&v).unwrap_err().field, "red_total");

        let mut v = fixture(1, 2);
        v["score_breakdown"] = Value::Null;
        assert_eq!(parse_match_value(&v).unwrap_err().field, "score_breakdown");

        let mut v = fixture(1, 2);
        v["alliances"]["blue"]["team_keys"] = json!(["frc1", "frc8", "frc9"]);
        assert_eq!(parse_match_value(&v).unwrap_err().field, "blue_teams");

        let mut v = fixture(1, 2);
        v["alliances"]["blue"]["team_keys"] = json!(["frc7", "frc7", "frc9"]);
        assert_eq!(parse_match_value(&v).unwrap_err().field, "blue_teams");

        let mut v = fixture(1, 2);
        v["event_key"] = json!("tst");
        assert_eq!(parse_match_value(&v).unwrap_err().field, "event_key");

        assert_eq!(parse_match_record("{not json").unwrap_err().field, "match");
    }

    #[test]
    fn round_trip_through_fixture_shape() {
        let m = parse_match_value(&fixture(60, 45)).unwrap();
        let again = parse_match_value(&m.to_fixture()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn empty_report_is_zero() {
        let ds = EventDataset::from_values("2019empty", std::iter::empty());
        assert_eq!(dataset_integrity_report(&ds), IntegrityReport::default());
        assert_eq!(ds.year, 2019);
    }

    #[test]
    fn off_season_matches_are_skipped() {
        let a = fixture(1, 2);
        let mut b = fixture(3, 4);
        b["event_key"] = json!("2018tst");
        b["key"] = json!("2018tst_qm1");
        let ds = EventDataset::from_values("x", [("a".into(), &a), ("b".into(), &b)]);
        assert_eq!(ds.matches.len(), 1);
        assert_eq!(ds.skipped.len(), 1);
        assert_eq!(ds.skipped[0].match_key, "2018tst_qm1");
    }

    #[test]
    fn rankings_round_trip() {
        let ranking: Vec<TeamId> = ["2539", "5404", "103"].into_iter().map(TeamId::from).collect();
        let text = rankings_document(&ranking).to_string();
        assert_eq!(parse_rankings(&text).unwrap(), ranking);
        assert!(parse_rankings("{}").is_err());
    }
}
