//! Per-robot indicator extraction and normalization.
//!
//! Match data only scores alliances. A robot's raw profile is the mean of its
//! alliance's raw indicator vectors over every match it played; normalization
//! then maps each axis onto `[0, 1]` relative to the population passed in.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicator::{Indicator, IndicatorVector, TeamId, AXES};
use crate::ingest::{EventDataset, Side};
use crate::schema::{SchemaError, YearSchema};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("dataset {event_key} is from {found}, expected {expected}")]
    YearMismatch {
        event_key: String,
        expected: i32,
        found: i32,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("team {0} appears more than once in the alliance")]
    DuplicateMember(TeamId),
    #[error("an alliance has 1 to 3 members, got {0}")]
    AllianceSize(usize),
    #[error("no profile for team {0}")]
    MissingProfile(TeamId),
    #[error("profile file: {0}")]
    Io(String),
    #[error("profile file is malformed: {0}")]
    Format(String),
}

/// Mean raw indicators of one robot before normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawProfile {
    pub match_count: usize,
    pub raw_means: IndicatorVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotProfile {
    pub team_id: TeamId,
    pub match_count: usize,
    pub raw_means: IndicatorVector,
    pub normalized: IndicatorVector,
}

/// Normalized profiles for one population of events.
///
/// `extrema` holds SCORE_MAX for the scoring axes and SCORE_MIN (the most
/// negative mean) for Fouls and Defense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub year: i32,
    pub extrema: IndicatorVector,
    pub profiles: BTreeMap<TeamId, RobotProfile>,
}

/// Averages each team's alliance raw vectors over all matches in `datasets`.
/// Tied matches count like any other.
pub fn aggregate_robot_profiles(
    datasets: &[EventDataset],
    schema: &YearSchema,
) -> Result<BTreeMap<TeamId, RawProfile>, StatsError> {
    let mut sums: BTreeMap<TeamId, ([f64; AXES], usize)> = BTreeMap::new();
    for ds in datasets {
        if ds.year != schema.year && !ds.matches.is_empty() {
            return Err(StatsError::YearMismatch {
                event_key: ds.event_key.clone(),
                expected: schema.year,
                found: ds.year,
            });
        }
        for m in &ds.matches {
            for side in [Side::Red, Side::Blue] {
                let raw = schema.score_alliance(m, side)?;
                for team in m.teams(side) {
                    let entry = sums.entry(team.clone()).or_insert(([0.0; AXES], 0));
                    for (acc, v) in entry.0.iter_mut().zip(raw.values()) {
                        *acc += v;
                    }
                    entry.1 += 1;
                }
            }
        }
    }
    Ok(sums
        .into_iter()
        .map(|(team, (sum, count))| {
            let n = count as f64;
            let means = IndicatorVector(sum.map(|s| s / n));
            (
                team,
                RawProfile {
                    match_count: count,
                    raw_means: means,
                },
            )
        })
        .collect())
}

/// Normalizes raw means into `[0, 1]` per axis.
///
/// Scoring axes: `v / max`; all zeros when `max == 0`.
/// Fouls and Defense: `1 - v / min`; all ones when `min == 0`.
pub fn normalize_profiles(year: i32, raw: &BTreeMap<TeamId, RawProfile>) -> ProfileSet {
    let mut extrema = [0.0; AXES];
    for indicator in Indicator::ALL {
        let k = indicator.index();
        let values = raw.values().map(|p| p.raw_means.0[k]);
        extrema[k] = if indicator.is_penalty() {
            values.fold(0.0, f64::min)
        } else {
            values.fold(0.0, f64::max)
        };
    }

    let profiles = raw
        .iter()
        .map(|(team, p)| {
            let mut norm = [0.0; AXES];
            for indicator in Indicator::ALL {
                let k = indicator.index();
                let v = p.raw_means.0[k];
                let extreme = extrema[k];
                norm[k] = if indicator.is_penalty() {
                    if extreme == 0.0 {
                        1.0
                    } else {
                        1.0 - v / extreme
                    }
                } else if extreme == 0.0 {
                    0.0
                } else {
                    v / extreme
                };
                norm[k] = norm[k].clamp(0.0, 1.0);
            }
            (
                team.clone(),
                RobotProfile {
                    team_id: team.clone(),
                    match_count: p.match_count,
                    raw_means: p.raw_means,
                    normalized: IndicatorVector(norm),
                },
            )
        })
        .collect();

    ProfileSet {
        year,
        extrema: IndicatorVector(extrema),
        profiles,
    }
}

/// Aggregates and normalizes in one step.
pub fn build_profiles(datasets: &[EventDataset], schema: &YearSchema) -> Result<ProfileSet, StatsError> {
    let raw = aggregate_robot_profiles(datasets, schema)?;
    Ok(normalize_profiles(schema.year, &raw))
}

/// Component-wise mean of the members' normalized vectors.
///
/// Full alliances have three members; partial alliances (a captain with zero
/// or one partner) average over the members present.
pub fn alliance_effectiveness(members: &[&RobotProfile]) -> Result<IndicatorVector, StatsError> {
    if members.is_empty() || members.len() > 3 {
        return Err(StatsError::AllianceSize(members.len()));
    }
    let mut seen = BTreeSet::new();
    for m in members {
        if !seen.insert(&m.team_id) {
            return Err(StatsError::DuplicateMember(m.team_id.clone()));
        }
    }
    let vectors: Vec<&IndicatorVector> = members.iter().map(|m| &m.normalized).collect();
    Ok(IndicatorVector::mean_of(&vectors))
}

impl ProfileSet {
    pub fn get(&self, team: &TeamId) -> Result<&RobotProfile, StatsError> {
        self.profiles
            .get(team)
            .ok_or_else(|| StatsError::MissingProfile(team.clone()))
    }

    /// Effectiveness of an alliance given by team ids.
    pub fn effectiveness(&self, teams: &[TeamId]) -> Result<IndicatorVector, StatsError> {
        let members = teams.iter().map(|t| self.get(t)).collect::<Result<Vec<_>, _>>()?;
        alliance_effectiveness(&members)
    }

    /// Component-wise mean normalized vector over every profile: the
    /// "average alliance" used as a what-if opponent.
    pub fn average_alliance(&self) -> IndicatorVector {
        let vectors: Vec<&IndicatorVector> = self.profiles.values().map(|p| &p.normalized).collect();
        IndicatorVector::mean_of(&vectors)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile set serializes")
    }

    pub fn from_json_str(text: &str) -> Result<ProfileSet, StatsError> {
        let set: ProfileSet = serde_json::from_str(text).map_err(|e| StatsError::Format(e.to_string()))?;
        for (team, p) in &set.profiles {
            if &p.team_id != team {
                return Err(StatsError::Format(format!("profile key {team} holds team {}", p.team_id)));
            }
            if !p.normalized.is_normalized() {
                return Err(StatsError::Format(format!("team {team} has values outside [0, 1]")));
            }
        }
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<(), StatsError> {
        fs::write(path, self.to_json_string()).map_err(|e| StatsError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<ProfileSet, StatsError> {
        let text = fs::read_to_string(path).map_err(|e| StatsError::Io(format!("{}: {e}", path.display())))?;
        ProfileSet::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(entries: &[(&str, [f64; AXES])]) -> BTreeMap<TeamId, RawProfile> {
        entries
            .iter()
            .map(|(t, v)| {
                (
                    TeamId::new(*t),
                    RawProfile {
                        match_count: 1,
                        raw_means: IndicatorVector(*v),
                    },
                )
            })
            .collect()
    }

    #[test]
    fn positive_axis_divides_by_max() {
        let set = normalize_profiles(
            2019,
            &raw(&[
                ("1", [4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
                ("2", [8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
                ("3", [10.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ]),
        );
        let got: Vec<f64> = set.profiles.values().map(|p| p.normalized.0[0]).collect();
        assert_eq!(got, [0.4, 0.8, 1.0]);
        assert_eq!(set.extrema.0[0], 10.0);
    }

    #[test]
    fn penalty_axis_uses_one_minus_ratio() {
        let set = normalize_profiles(
            2019,
            &raw(&[
                ("1", [0.0, 0.0, 0.0, 0.0, 0.0, -4.0, -60.0]),
                ("2", [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0]),
                ("3", [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -15.0]),
            ]),
        );
        let p = |t: &str| set.profiles[&TeamId::new(t)].normalized;
        assert_eq!(p("1").get(Indicator::Defense), 0.0);
        assert_eq!(p("2").get(Indicator::Defense), 1.0);
        assert_eq!(p("3").get(Indicator::Defense), 0.75);
        assert_eq!(p("1").get(Indicator::Fouls), 0.0);
        assert_eq!(p("2").get(Indicator::Fouls), 0.75);
        assert_eq!(p("3").get(Indicator::Fouls), 1.0);
    }

    #[test]
    fn degenerate_denominators() {
        let set = normalize_profiles(2019, &raw(&[("1", [0.0; AXES]), ("2", [0.0; AXES])]));
        for p in set.profiles.values() {
            assert_eq!(p.normalized.0, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        }
    }

    #[test]
    fn effectiveness_means_and_rejects_duplicates() {
        let set = normalize_profiles(
            2019,
            &raw(&[
                ("1", [0.0; AXES]),
                ("2", [5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
                ("3", [10.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ]),
        );
        let a = &set.profiles[&TeamId::new("1")];
        let b = &set.profiles[&TeamId::new("2")];
        let c = &set.profiles[&TeamId::new("3")];
        let e = alliance_effectiveness(&[a, b, c]).unwrap();
        assert_eq!(e.get(Indicator::TraditionalLow), 0.5);
        assert_eq!(alliance_effectiveness(&[c, c, c]).map_err(|e| e.to_string()), Err("team 3 appears more than once in the alliance".into()));
        assert!(matches!(alliance_effectiveness(&[]), Err(StatsError::AllianceSize(0))));
        assert_eq!(alliance_effectiveness(&[c]).unwrap(), c.normalized);
    }

    #[test]
    fn profile_file_round_trip() {
        let set = normalize_profiles(2019, &raw(&[("1", [1.0, 2.0, 3.0, 4.0, 5.0, -6.0, -7.0])]));
        let back = ProfileSet::from_json_str(&set.to_json_string()).unwrap();
        assert_eq!(set, back);
    }
}
