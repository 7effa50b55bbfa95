use std::collections::BTreeMap;
use std::path::PathBuf;

use frc_core::ingest::{dataset_integrity_report, load_event, parse_match_record, parse_match_value, Winner};
use frc_core::schema::load_year_schema;
use frc_core::stats::{aggregate_robot_profiles, build_profiles, normalize_profiles, RawProfile};
use frc_core::synthetic::SyntheticEvent;
use frc_core::{Indicator, IndicatorVector, TeamId};
use proptest::prelude::*;
use serde_json::{json, Value};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn match_json(red: (u32, [u32; 3]), blue: (u32, [u32; 3])) -> Value {
    let side = |(score, teams): (u32, [u32; 3])| {
        json!({"score": score, "team_keys": teams.iter().map(|t| format!("frc{t}")).collect::<Vec<_>>()})
    };
    json!({
        "key": "2019test_qm1",
        "event_key": "2019test",
        "comp_level": "qm",
        "match_number": 1,
        "alliances": {"red": side(red), "blue": side(blue)},
        "score_breakdown": {"red": {"foulPoints": 0}, "blue": {"foulPoints": 0}}
    })
}

#[test]
fn twelve_match_fixture_report() {
    let path = root().join("fixtures/2019tiny.json");
    let raw: Vec<Value> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let mut teams: Vec<&str> = raw
        .iter()
        .flat_map(|m| {
            ["red", "blue"]
                .into_iter()
                .flat_map(move |s| m["alliances"][s]["team_keys"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()))
        })
        .collect();
    teams.sort();
    teams.dedup();
    let report = dataset_integrity_report(&load_event(&path).unwrap());
    assert_eq!(report.matches, raw.len());
    assert_eq!(report.teams, teams.len());
    assert_eq!((report.matches, report.teams), (12, 18));
}

#[test]
fn six_team_event_means_match_brute_force() {
    let schema = load_year_schema(&root().join("schemas/2019.json")).unwrap();
    let schema_json: Value = serde_json::from_str(&std::fs::read_to_string(root().join("schemas/2019.json")).unwrap()).unwrap();
    let event = SyntheticEvent::generate(&schema, "six", 6, 4, 21);
    assert_eq!(event.matches.len(), 4);
    let fixture = event.fixture_array();
    let ds = frc_core::ingest::EventDataset::from_values(
        "2019six",
        fixture.as_array().unwrap().iter().enumerate().map(|(i, v)| (i.to_string(), v)),
    );
    let profiles = aggregate_robot_profiles(&[ds], &schema).unwrap();

    // Independent recomputation straight from the JSON documents.
    let names = ["TraditionalLow", "TraditionalHigh", "Technical", "Autonomous", "Endgame"];
    let mut sums: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    for m in fixture.as_array().unwrap() {
        for (side, opp) in [("red", "blue"), ("blue", "red")] {
            let b = &m["score_breakdown"][side];
            let mut v: Vec<f64> = names
                .iter()
                .map(|n| {
                    schema_json["indicators"][n]
                        .as_array()
                        .unwrap()
                        .iter()
                        .map(|t| t["weight"].as_f64().unwrap() * b[t["field"].as_str().unwrap()].as_f64().unwrap())
                        .sum()
                })
                .collect();
            v.push(-m["score_breakdown"][opp]["foulPoints"].as_f64().unwrap());
            v.push(-m["alliances"][opp]["score"].as_f64().unwrap());
            for t in m["alliances"][side]["team_keys"].as_array().unwrap() {
                let id = t.as_str().unwrap().trim_start_matches("frc").to_string();
                let e = sums.entry(id).or_insert((vec![0.0; 7], 0));
                for k in 0..7 {
                    e.0[k] += v[k];
                }
                e.1 += 1;
            }
        }
    }
    assert_eq!(sums.len(), 6);
    for (id, (sum, n)) in sums {
        let p = &profiles[&TeamId::new(id)];
        assert_eq!(p.match_count, n);
        for k in 0..7 {
            assert!((p.raw_means.0[k] - sum[k] / n as f64).abs() < 1e-12);
        }
    }
}

fn normalization_oracle(raw: &[[f64; 7]]) -> Vec<[f64; 7]> {
    let mut out = vec![[0.0; 7]; raw.len()];
    for k in 0..7 {
        let penalty = k >= 5;
        let extreme = raw.iter().map(|r| r[k]).fold(0.0, |a: f64, b| if penalty { a.min(b) } else { a.max(b) });
        for (i, r) in raw.iter().enumerate() {
            out[i][k] = match (penalty, extreme == 0.0) {
                (false, true) => 0.0,
                (false, false) => r[k] / extreme,
                (true, true) => 1.0,
                (true, false) => 1.0 - r[k] / extreme,
            };
        }
    }
    out
}

fn raw_dataset() -> impl Strategy<Value = Vec<[f64; 7]>> {
    let value = |k: usize| {
        prop_oneof![
            1 => Just(0.0),
            4 => if k < 5 { (0.0f64..120.0).boxed() } else { (-60.0f64..=0.0).boxed() },
        ]
    };
    let row = (value(0), value(1), value(2), value(3), value(4), value(5), value(6))
        .prop_map(|(a, b, c, d, e, f, g)| [a, b, c, d, e, f, g]);
    prop::collection::vec(row, 1..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn normalization_matches_oracle(raw in raw_dataset()) {
        let map: BTreeMap<TeamId, RawProfile> = raw
            .iter()
            .enumerate()
            .map(|(i, r)| (TeamId::new(i.to_string()), RawProfile { match_count: 1, raw_means: IndicatorVector(*r) }))
            .collect();
        let set = normalize_profiles(2019, &map);
        let expected = normalization_oracle(&raw);
        for (i, e) in expected.iter().enumerate() {
            let got = set.profiles[&TeamId::new(i.to_string())].normalized;
            for k in 0..7 {
                prop_assert!((got.0[k] - e[k]).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&got.0[k]));
            }
        }
        for indicator in Indicator::ALL {
            let k = indicator.index();
            let extreme = set.extrema.0[k];
            if extreme == 0.0 {
                continue;
            }
            for p in set.profiles.values().filter(|p| p.raw_means.0[k] == extreme) {
                let want = if indicator.is_penalty() { 0.0 } else { 1.0 };
                prop_assert_eq!(p.normalized.0[k], want);
            }
        }
    }

    #[test]
    fn winner_follows_totals(red in 0u32..300, blue in 0u32..300) {
        let m = parse_match_value(&match_json((red, [1, 2, 3]), (blue, [4, 5, 6]))).unwrap();
        let want = if red > blue { Winner::Red } else if blue > red { Winner::Blue } else { Winner::Tie };
        prop_assert_eq!(m.winner, want);
    }

    #[test]
    fn fixture_round_trip(red in 0u32..300, blue in 0u32..300, teams in prop::collection::btree_set(1u32..9999, 6)) {
        let t: Vec<u32> = teams.into_iter().collect();
        let m = parse_match_value(&match_json((red, [t[0], t[1], t[2]]), (blue, [t[3], t[4], t[5]]))).unwrap();
        let again = parse_match_record(&m.to_fixture().to_string()).unwrap();
        prop_assert_eq!(again, m);
    }
}

#[test]
fn profiles_from_fixtures_are_in_range() {
    let schema = load_year_schema(&root().join("schemas/2019.json")).unwrap();
    let events: Vec<_> = ["2019tiny.json", "2019syn.json", "2019paphi.json"]
        .iter()
        .map(|f| load_event(&root().join("fixtures").join(f)).unwrap())
        .collect();
    let set = build_profiles(&events, &schema).unwrap();
    let mut teams: Vec<&TeamId> = events.iter().flat_map(|e| e.teams()).collect();
    teams.sort();
    teams.dedup();
    assert_eq!(set.profiles.len(), teams.len());
    assert!(set.profiles.values().all(|p| p.normalized.is_normalized()));
}
