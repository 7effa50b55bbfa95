//! Radar-polygon area scoring and partner selection.
//!
//! An effectiveness vector is drawn on seven equally spaced axes in the fixed
//! indicator order; its score is the area of the resulting polygon,
//! `½·sin(2π/7)·Σ v[k]·v[(k+1) mod 7]`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicator::{Indicator, IndicatorVector, TeamId, AXES};
use crate::stats::{alliance_effectiveness, RobotProfile, StatsError};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("indicator {indicator} = {value} is outside [0, 1]")]
    Domain { indicator: Indicator, value: f64 },
    #[error("no candidates to choose from")]
    EmptyPool,
    #[error("team {0} is both a member and a candidate")]
    Overlap(TeamId),
    #[error("a partial alliance has 1 or 2 members, got {0}")]
    MemberCount(usize),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Area of a radar polygon over normalized indicators.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RadarArea(pub f64);

impl RadarArea {
    /// Area of the all-ones polygon, a regular heptagon of circumradius 1.
    pub fn max() -> RadarArea {
        RadarArea(AXES as f64 / 2.0 * wedge_factor())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn wedge_factor() -> f64 {
    (2.0 * std::f64::consts::PI / AXES as f64).sin()
}

pub fn radar_area(v: &IndicatorVector) -> Result<RadarArea, OptimizerError> {
    for (indicator, value) in v.iter() {
        if !(0.0..=1.0).contains(&value) {
            return Err(OptimizerError::Domain { indicator, value });
        }
    }
    let values = v.values();
    let cross: f64 = (0..AXES).map(|k| values[k] * values[(k + 1) % AXES]).sum();
    Ok(RadarArea(0.5 * wedge_factor() * cross))
}

/// Axis labels and values for drawing one radar polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarData {
    pub axes: Vec<String>,
    pub values: [f64; AXES],
    pub area: f64,
}

impl RadarData {
    pub fn new(v: &IndicatorVector) -> Result<RadarData, OptimizerError> {
        Ok(RadarData {
            axes: Indicator::ALL.iter().map(|i| i.name().to_string()).collect(),
            values: v.0,
            area: radar_area(v)?.0,
        })
    }
}

/// One candidate partner and the alliance it would produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub team_id: TeamId,
    pub area: f64,
    pub effectiveness: IndicatorVector,
}

fn by_area_then_id(a_area: f64, a_id: &TeamId, b_area: f64, b_id: &TeamId) -> Ordering {
    b_area.total_cmp(&a_area).then_with(|| a_id.cmp(b_id))
}

/// Scores every candidate by the area of `current_members + candidate` and
/// returns the best `top_k`, highest area first, ties by ascending team id.
pub fn suggest_partner(
    current_members: &[&RobotProfile],
    pool: &[&RobotProfile],
    top_k: usize,
) -> Result<Vec<Suggestion>, OptimizerError> {
    if current_members.is_empty() || current_members.len() > 2 {
        return Err(OptimizerError::MemberCount(current_members.len()));
    }
    if pool.is_empty() {
        return Err(OptimizerError::EmptyPool);
    }
    let mut members: Vec<&RobotProfile> = current_members.to_vec();
    let mut scored = Vec::with_capacity(pool.len());
    for candidate in pool {
        if current_members.iter().any(|m| m.team_id == candidate.team_id) {
            return Err(OptimizerError::Overlap(candidate.team_id.clone()));
        }
        members.push(candidate);
        let effectiveness = alliance_effectiveness(&members)?;
        members.pop();
        scored.push(Suggestion {
            team_id: candidate.team_id.clone(),
            area: radar_area(&effectiveness)?.0,
            effectiveness,
        });
    }
    scored.sort_by(|a, b| by_area_then_id(a.area, &a.team_id, b.area, &b.team_id));
    scored.truncate(top_k);
    Ok(scored)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAlliance {
    /// Member ids in ascending order.
    pub members: Vec<TeamId>,
    pub effectiveness: IndicatorVector,
    pub area: f64,
}

/// Orders full alliances by descending radar area; ties by member ids.
pub fn rank_alliances(alliances: &[[&RobotProfile; 3]]) -> Result<Vec<RankedAlliance>, OptimizerError> {
    let mut ranked = alliances
        .iter()
        .map(|members| {
            let effectiveness = alliance_effectiveness(members)?;
            let mut ids: Vec<TeamId> = members.iter().map(|m| m.team_id.clone()).collect();
            ids.sort();
            Ok(RankedAlliance {
                members: ids,
                area: radar_area(&effectiveness)?.0,
                effectiveness,
            })
        })
        .collect::<Result<Vec<_>, OptimizerError>>()?;
    ranked.sort_by(|a, b| b.area.total_cmp(&a.area).then_with(|| a.members.cmp(&b.members)));
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(id: &str, v: [f64; AXES]) -> RobotProfile {
        RobotProfile {
            team_id: TeamId::new(id),
            match_count: 1,
            raw_means: IndicatorVector::ZERO,
            normalized: IndicatorVector(v),
        }
    }

    #[test]
    fn regular_heptagon_area() {
        // (7/2)·sin(2π/7), evaluated independently.
        let expected = 2.736_410_188_638_104_f64;
        assert!((radar_area(&IndicatorVector::ONES).unwrap().0 - expected).abs() < 1e-9);
        assert!((RadarArea::max().0 - expected).abs() < 1e-9);
    }

    #[test]
    fn degenerate_polygons_have_zero_area() {
        assert_eq!(radar_area(&IndicatorVector::ZERO).unwrap().0, 0.0);
        for k in 0..AXES {
            let mut v = IndicatorVector::ZERO;
            v.0[k] = 0.8;
            assert_eq!(radar_area(&v).unwrap().0, 0.0);
        }
    }

    #[test]
    fn out_of_range_is_a_domain_error() {
        let mut v = IndicatorVector::ONES;
        v.0[3] = 1.5;
        assert!(matches!(
            radar_area(&v),
            Err(OptimizerError::Domain { indicator: Indicator::Autonomous, .. })
        ));
        v.0[3] = f64::NAN;
        assert!(radar_area(&v).is_err());
    }

    #[test]
    fn complementary_candidate_beats_a_clone() {
        let captain = profile("1", [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let clone = profile("2", [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let complement = profile("3", [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let out = suggest_partner(&[&captain], &[&clone, &complement], 2).unwrap();
        assert_eq!(out[0].team_id, TeamId::new("3"));
        assert!(out[0].area > out[1].area);
    }

    #[test]
    fn single_candidate_and_errors() {
        let captain = profile("1", [0.5; AXES]);
        let only = profile("2", [0.2; AXES]);
        let out = suggest_partner(&[&captain], &[&only], 3).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].team_id, TeamId::new("2"));
        assert!(matches!(suggest_partner(&[&captain], &[], 3), Err(OptimizerError::EmptyPool)));
        assert!(matches!(
            suggest_partner(&[&captain], &[&captain], 3),
            Err(OptimizerError::Overlap(_))
        ));
    }

    #[test]
    fn ties_break_by_team_id() {
        let captain = profile("1", [0.5; AXES]);
        let a = profile("300", [0.2; AXES]);
        let b = profile("25", [0.2; AXES]);
        let out = suggest_partner(&[&captain], &[&a, &b], 2).unwrap();
        assert_eq!(out[0].team_id, TeamId::new("25"));
    }

    #[test]
    fn ranking_prefers_dominant_alliance() {
        let ones: Vec<_> = (0..3).map(|i| profile(&format!("9{i}"), [1.0; AXES])).collect();
        let halves: Vec<_> = (0..3).map(|i| profile(&format!("1{i}"), [0.5; AXES])).collect();
        let alt: Vec<_> = (0..3).map(|i| profile(&format!("2{i}"), [0.5; AXES])).collect();
        let ranked = rank_alliances(&[
            [&halves[0], &halves[1], &halves[2]],
            [&ones[0], &ones[1], &ones[2]],
            [&alt[2], &alt[1], &alt[0]],
        ])
        .unwrap();
        assert_eq!(ranked[0].members[0], TeamId::new("90"));
        assert_eq!(ranked[1].members[0], TeamId::new("10"));
        assert_eq!(ranked[2].members[0], TeamId::new("20"));
        assert_eq!(ranked[1].area, ranked[2].area);
    }
}
