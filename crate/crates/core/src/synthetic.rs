//! Seeded synthetic data: labelled prediction samples and whole qualification
//! events in the fixture shape. Used by tests, benchmarks and the `synth` CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::indicator::{Indicator, IndicatorVector, TeamId};
use crate::ingest::{parse_match_value, rankings_document, MatchRecord};
use crate::predictor::PredictionSample;
use crate::schema::YearSchema;

fn random_vector(rng: &mut impl Rng) -> IndicatorVector {
    IndicatorVector(std::array::from_fn(|_| rng.gen::<f64>()))
}

/// Mean of three uniformly random robot vectors.
pub fn random_alliance(rng: &mut impl Rng) -> IndicatorVector {
    let robots = [random_vector(rng), random_vector(rng), random_vector(rng)];
    IndicatorVector::mean_of(&[&robots[0], &robots[1], &robots[2]])
}

/// Matches whose clean outcome is "red wins iff the red effectiveness sum
/// exceeds blue's", with each label flipped with probability `noise`.
/// Labels alternate before the final shuffle, so classes are exactly
/// balanced for even `n`.
pub fn synthetic_samples(n: usize, noise: f64, seed: u64) -> Vec<PredictionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2 == 0;
        let flipped = rng.gen_bool(noise);
        let clean = label != flipped;
        let mut red = random_alliance(&mut rng);
        let mut blue = random_alliance(&mut rng);
        if (red.sum() > blue.sum()) != clean {
            std::mem::swap(&mut red, &mut blue);
        }
        out.push(PredictionSample::new(&red, &blue, label));
    }
    out.shuffle(&mut rng);
    out
}

/// A generated qualification event.
#[derive(Debug, Clone)]
pub struct SyntheticEvent {
    pub event_key: String,
    pub matches: Vec<MatchRecord>,
    /// Seed order after qualifications: wins, then average score.
    pub ranking: Vec<TeamId>,
    /// Latent per-robot skill in `[0, 1]^7` that generated the scores.
    pub skills: Vec<(TeamId, IndicatorVector)>,
}

impl SyntheticEvent {
    /// `teams` robots play `rounds` rounds; each round reshuffles them into
    /// 3-vs-3 matches (teams left over after filling matches sit out).
    /// Every field referenced by `schema` is filled with a non-negative integer.
    pub fn generate(schema: &YearSchema, event_code: &str, teams: usize, rounds: usize, seed: u64) -> SyntheticEvent {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let event_key = format!("{}{}", schema.year, event_code);
        let ids: Vec<TeamId> = (0..teams).map(|i| TeamId::new((100 + 37 * i).to_string())).collect();
        let skills: Vec<IndicatorVector> = ids.iter().map(|_| random_vector(&mut rng)).collect();

        let mut matches = Vec::new();
        let mut wins = vec![0usize; teams];
        let mut points = vec![0u64; teams];
        let mut played = vec![0usize; teams];
        let mut order: Vec<usize> = (0..teams).collect();
        let mut number = 0;
        for _ in 0..rounds {
            order.shuffle(&mut rng);
            for group in order.chunks_exact(6) {
                number += 1;
                let (red, blue) = group.split_at(3);
                let mut sides = Vec::new();
                for side in [red, blue] {
                    let mut fields = Map::new();
                    let mut scored = 0.0;
                    for indicator in Indicator::SCORING {
                        let strength: f64 = side.iter().map(|&t| skills[t].get(indicator)).sum();
                        for term in schema.terms(indicator) {
                            let v = (strength * 4.0 + rng.gen_range(0.0..2.0)).floor();
                            scored += term.weight * v;
                            fields.insert(term.field.clone(), json!(v as u64));
                        }
                    }
                    // Clean play on Fouls means fewer fouls handed to the opponent.
                    let sloppiness: f64 = side.iter().map(|&t| 1.0 - skills[t].get(Indicator::Fouls)).sum();
                    let conceded = (sloppiness * rng.gen_range(0.0..3.0)).floor() as u64;
                    sides.push((fields, scored, conceded));
                }
                // Defense skill suppresses the opponent's score.
                let defense = |side: &[usize]| side.iter().map(|&t| skills[t].get(Indicator::Defense)).sum::<f64>() / 3.0;
                let mut totals = [0u32; 2];
                for s in 0..2 {
                    let opp = 1 - s;
                    let received = sides[opp].2;
                    sides[s].0.insert(schema.foul_field.clone(), json!(received));
                    let suppression = 1.0 - 0.3 * defense(if s == 0 { blue } else { red });
                    totals[s] = (sides[s].1 * suppression).round() as u32 + received as u32;
                }
                let keys = |side: &[usize]| side.iter().map(|&t| ids[t].to_key()).collect::<Vec<_>>();
                let raw = json!({
                    "key": format!("{event_key}_qm{number}"),
                    "event_key": event_key,
                    "comp_level": "qm",
                    "match_number": number,
                    "alliances": {
                        "red": {"team_keys": keys(red), "score": totals[0]},
                        "blue": {"team_keys": keys(blue), "score": totals[1]}
                    },
                    "score_breakdown": {"red": Value::Object(sides[0].0.clone()), "blue": Value::Object(sides[1].0.clone())}
                });
                let record = parse_match_value(&raw).expect("generated match is valid");
                for (side, total, won) in [
                    (red, totals[0], totals[0] > totals[1]),
                    (blue, totals[1], totals[1] > totals[0]),
                ] {
                    for &t in side {
                        played[t] += 1;
                        points[t] += u64::from(total);
                        wins[t] += usize::from(won);
                    }
                }
                matches.push(record);
            }
        }

        let mut seeds: Vec<usize> = (0..teams).collect();
        seeds.sort_by(|&a, &b| {
            let avg = |t: usize| points[t] as f64 / played[t].max(1) as f64;
            wins[b]
                .cmp(&wins[a])
                .then(avg(b).total_cmp(&avg(a)))
                .then(ids[a].cmp(&ids[b]))
        });
        SyntheticEvent {
            event_key,
            matches,
            ranking: seeds.iter().map(|&t| ids[t].clone()).collect(),
            skills: ids.into_iter().zip(skills).collect(),
        }
    }

    pub fn fixture_array(&self) -> Value {
        Value::Array(self.matches.iter().map(MatchRecord::to_fixture).collect())
    }

    /// Rankings in the TBA `/event/{key}/rankings` shape.
    pub fn rankings_json(&self) -> Value {
        rankings_document(&self.ranking)
    }
}

/// Uniform random normalized vector, exposed for property tests.
pub fn uniform_vector(rng: &mut impl Rng) -> IndicatorVector {
    random_vector(rng)
}
