use std::collections::BTreeSet;
use std::f64::consts::PI;

use frc_core::draft::{parse_pick_log, serpentine_seat, write_pick_log, DraftMode, DraftState, SEATS};
use frc_core::optimizer::{radar_area, suggest_partner};
use frc_core::stats::RobotProfile;
use frc_core::{IndicatorVector, TeamId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shoelace formula over the polygon's Cartesian vertices.
fn shoelace(v: &[f64; 7]) -> f64 {
    let pts: Vec<(f64, f64)> = (0..7)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 7.0;
            (v[k] * t.cos(), v[k] * t.sin())
        })
        .collect();
    let mut twice = 0.0;
    for k in 0..7 {
        let (x0, y0) = pts[k];
        let (x1, y1) = pts[(k + 1) % 7];
        twice += x0 * y1 - x1 * y0;
    }
    twice.abs() / 2.0
}

fn unit_vector() -> impl Strategy<Value = [f64; 7]> {
    prop::array::uniform7(0.0f64..=1.0)
}

fn profile(id: usize, v: [f64; 7]) -> RobotProfile {
    RobotProfile {
        team_id: TeamId::new(id.to_string()),
        match_count: 1,
        raw_means: IndicatorVector(v),
        normalized: IndicatorVector(v),
    }
}

#[test]
fn all_ones_area() {
    let a = radar_area(&IndicatorVector([1.0; 7])).unwrap().0;
    assert!((a - 3.5 * (2.0 * PI / 7.0).sin()).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn area_matches_shoelace(v in unit_vector()) {
        let a = radar_area(&IndicatorVector(v)).unwrap().0;
        prop_assert!((a - shoelace(&v)).abs() < 1e-12);
    }

    #[test]
    fn area_is_cyclic_and_quadratic(v in unit_vector(), shift in 0usize..7, c in 0.0f64..=1.0) {
        let base = IndicatorVector(v);
        let a = radar_area(&base).unwrap().0;
        prop_assert!((radar_area(&base.rotate(shift)).unwrap().0 - a).abs() < 1e-12);
        prop_assert!((radar_area(&base.scale(c)).unwrap().0 - c * c * a).abs() < 1e-12);
    }

    #[test]
    fn suggest_partner_is_the_exhaustive_argmax(
        members in prop::collection::vec(unit_vector(), 1..=2),
        pool in prop::collection::vec(unit_vector(), 1..=20),
        k in 1usize..5,
    ) {
        let members: Vec<RobotProfile> = members.into_iter().enumerate().map(|(i, v)| profile(1000 + i, v)).collect();
        let pool: Vec<RobotProfile> = pool.into_iter().enumerate().map(|(i, v)| profile(i + 1, v)).collect();
        let member_refs: Vec<&RobotProfile> = members.iter().collect();
        let pool_refs: Vec<&RobotProfile> = pool.iter().collect();
        let got = suggest_partner(&member_refs, &pool_refs, k).unwrap();

        let mut scored: Vec<(f64, usize)> = pool
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let all: Vec<&[f64; 7]> = members.iter().map(|m| &m.normalized.0).chain([&c.normalized.0]).collect();
                let mean: [f64; 7] = std::array::from_fn(|a| all.iter().map(|v| v[a]).sum::<f64>() / all.len() as f64);
                (shoelace(&mean), i + 1)
            })
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        prop_assert_eq!(got.len(), k.min(pool.len()));
        prop_assert!((got[0].area - scored[0].0).abs() < 1e-12);
        for (g, s) in got.iter().zip(&scored) {
            prop_assert!((g.area - s.0).abs() < 1e-12);
        }
        // The chosen team is a true argmax even if floating ties reorder equals.
        let best = scored[0].0;
        let chosen = scored.iter().find(|s| s.1.to_string() == got[0].team_id.as_str()).unwrap();
        prop_assert!(best - chosen.0 < 1e-12);
    }
}

fn ranking(n: usize) -> Vec<TeamId> {
    (0..n).map(|i| TeamId::new((10 + 7 * i).to_string())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_drafts_conserve_teams_and_follow_the_serpentine(n in 24usize..=40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ranking = ranking(n);
        let position = |t: &TeamId| ranking.iter().position(|r| r == t).unwrap();
        let mut state = DraftState::new(ranking.clone(), DraftMode::Manual).unwrap();
        let mut log = Vec::new();
        while !state.is_complete() {
            let before = state.standing();
            let eligible = state.eligible().unwrap();
            let picked = eligible[rng.gen_range(0..eligible.len())].clone();
            let event = state.pick(&picked).unwrap();
            prop_assert_eq!(event.turn, log.len());
            prop_assert_eq!(event.seat, serpentine_seat(event.turn) + 1);

            let mut expected = before.clone();
            expected.retain(|t| t != &picked);
            prop_assert_eq!(state.standing(), expected);

            let mut seen = BTreeSet::new();
            for a in state.alliances() {
                for t in a.members() {
                    prop_assert!(seen.insert(t.clone()));
                }
            }
            for t in state.pool() {
                prop_assert!(seen.insert(t.clone()));
            }
            prop_assert_eq!(seen.len(), n);
            let captain_ranks: Vec<usize> = state.alliances().iter().map(|a| position(&a.captain)).collect();
            prop_assert!(captain_ranks.windows(2).all(|w| w[0] < w[1]));
            log.push(event);
        }
        prop_assert_eq!(log.len(), 2 * SEATS);
        prop_assert!(state.alliances().iter().all(|a| a.len() == 3));
        prop_assert_eq!(state.pool().len(), n - 3 * SEATS);

        let parsed = parse_pick_log(&write_pick_log(&log)).unwrap();
        prop_assert_eq!(&parsed, &log);
        let replayed = DraftState::replay(ranking, DraftMode::Manual, &parsed).unwrap();
        prop_assert_eq!(replayed, state);
    }
}

#[test]
fn replay_rejects_a_tampered_log() {
    let ranking = ranking(24);
    let mut state = DraftState::new(ranking.clone(), DraftMode::Manual).unwrap();
    let mut log = vec![state.pick(&ranking[9]).unwrap(), state.pick(&ranking[2]).unwrap()];
    log[1].promotions.clear();
    assert!(DraftState::replay(ranking, DraftMode::Manual, &log).is_err());
}
