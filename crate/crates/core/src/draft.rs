//! Alliance-selection snake draft over eight captain seats.
//!
//! Seats, not teams, own turns. Round one visits seats 1→8 and round two
//! 8→1. When a captain is picked by a higher seat, every lower captain moves
//! up one seat and the best-ranked unpicked team takes seat 8; a promoted
//! team therefore inherits the turn of the seat it moved into.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicator::TeamId;
use crate::optimizer::{suggest_partner, OptimizerError, Suggestion};
use crate::stats::{ProfileSet, RobotProfile, StatsError};

pub const SEATS: usize = 8;
pub const ROUNDS: usize = 2;
const TURNS: usize = SEATS * ROUNDS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IneligibleReason {
    NotInEvent,
    IsPicker,
    AlreadyOnAlliance,
    HigherSeededCaptain,
}

#[derive(Debug, Error)]
pub enum DraftError {
    #[error("a draft needs at least {min} ranked teams, got {0}", min = SEATS + 1)]
    TooFewTeams(usize),
    #[error("team {0} is ranked twice")]
    DuplicateTeam(TeamId),
    #[error("the draft is complete")]
    Complete,
    #[error("team {team} cannot be picked: {reason:?}")]
    Ineligible { team: TeamId, reason: IneligibleReason },
    #[error("team {0} is not an alliance captain")]
    NotACaptain(TeamId),
    #[error("pick log line {line}: {message}")]
    LogFormat { line: usize, message: String },
    #[error("replay diverged at pick {index}: {message}")]
    ReplayMismatch { index: usize, message: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DraftMode {
    OptimizeAll,
    OptimizeOne(TeamId),
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alliance {
    pub captain: TeamId,
    pub partners: Vec<TeamId>,
}

impl Alliance {
    fn new(captain: TeamId) -> Self {
        Alliance {
            captain,
            partners: Vec::new(),
        }
    }

    pub fn members(&self) -> impl Iterator<Item = &TeamId> {
        std::iter::once(&self.captain).chain(self.partners.iter())
    }

    pub fn len(&self) -> usize {
        1 + self.partners.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A seat change caused by a pick. Seats are 1-based; `old_seat` is `None`
/// for the team promoted out of the pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Promotion {
    pub team_id: TeamId,
    pub old_seat: Option<usize>,
    pub new_seat: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PickEvent {
    /// Zero-based position in the serpentine turn sequence.
    pub turn: usize,
    /// 1-based seat of the picking captain.
    pub seat: usize,
    pub picking_captain: TeamId,
    pub picked: TeamId,
    pub promotions: Vec<Promotion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DraftState {
    ranking: Vec<TeamId>,
    seats: Vec<Alliance>,
    pool: Vec<TeamId>,
    turn: usize,
    mode: DraftMode,
}

/// Seat index (0-based) owning serpentine turn `turn`.
pub fn serpentine_seat(turn: usize) -> usize {
    let pos = turn % SEATS;
    if (turn / SEATS) % 2 == 0 {
        pos
    } else {
        SEATS - 1 - pos
    }
}

/// Starts a draft: the top eight ranked teams captain seats 1-8.
pub fn new_draft(ranking: &[TeamId]) -> Result<DraftState, DraftError> {
    DraftState::new(ranking.to_vec(), DraftMode::Manual)
}

/// Functional form of [`DraftState::pick`].
pub fn apply_pick(state: &DraftState, picked: &TeamId) -> Result<(DraftState, PickEvent), DraftError> {
    let mut next = state.clone();
    let event = next.pick(picked)?;
    Ok((next, event))
}

impl DraftState {
    pub fn new(ranking: Vec<TeamId>, mode: DraftMode) -> Result<DraftState, DraftError> {
        if ranking.len() <= SEATS {
            return Err(DraftError::TooFewTeams(ranking.len()));
        }
        let mut seen = HashSet::new();
        for t in &ranking {
            if !seen.insert(t) {
                return Err(DraftError::DuplicateTeam(t.clone()));
            }
        }
        let seats = ranking[..SEATS].iter().cloned().map(Alliance::new).collect();
        let pool = ranking[SEATS..].to_vec();
        Ok(DraftState {
            ranking,
            seats,
            pool,
            turn: 0,
            mode,
        })
    }

    pub fn with_mode(mut self, mode: DraftMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> &DraftMode {
        &self.mode
    }

    pub fn ranking(&self) -> &[TeamId] {
        &self.ranking
    }

    pub fn alliances(&self) -> &[Alliance] {
        &self.seats
    }

    /// Unpicked teams outside the captain seats, in ranking order.
    pub fn pool(&self) -> &[TeamId] {
        &self.pool
    }

    pub fn turn(&self) -> usize {
        self.turn
    }

    /// 1-based seat of a current captain.
    pub fn seat_of(&self, team: &TeamId) -> Option<usize> {
        self.seats.iter().position(|a| &a.captain == team).map(|i| i + 1)
    }

    /// Seat captains in seat order followed by the pool in ranking order.
    /// A pick removes exactly the picked team from this list.
    pub fn standing(&self) -> Vec<TeamId> {
        self.seats
            .iter()
            .map(|a| a.captain.clone())
            .chain(self.pool.iter().cloned())
            .collect()
    }

    fn next_turn(&self) -> Option<(usize, usize)> {
        (self.turn..TURNS)
            .map(|t| (t, serpentine_seat(t)))
            .find(|&(_, seat)| seat < self.seats.len())
    }

    fn eligible_from(&self, seat: usize) -> Vec<TeamId> {
        self.seats[seat + 1..]
            .iter()
            .filter(|a| a.partners.is_empty())
            .map(|a| a.captain.clone())
            .chain(self.pool.iter().cloned())
            .collect()
    }

    /// `(turn, 0-based seat)` of the captain to pick next, or `None` once no
    /// turns remain or the picker has nobody left to choose.
    fn current(&self) -> Option<(usize, usize)> {
        let (turn, seat) = self.next_turn()?;
        if self.eligible_from(seat).is_empty() {
            None
        } else {
            Some((turn, seat))
        }
    }

    pub fn is_complete(&self) -> bool {
        self.current().is_none()
    }

    pub fn current_picker(&self) -> Result<TeamId, DraftError> {
        let (_, seat) = self.current().ok_or(DraftError::Complete)?;
        Ok(self.seats[seat].captain.clone())
    }

    /// 1-based seat whose turn it is.
    pub fn current_seat(&self) -> Result<usize, DraftError> {
        self.current().map(|(_, s)| s + 1).ok_or(DraftError::Complete)
    }

    /// Teams the current picker may choose: lower-seeded captains who have
    /// not picked yet, then the pool.
    pub fn eligible(&self) -> Result<Vec<TeamId>, DraftError> {
        let (_, seat) = self.current().ok_or(DraftError::Complete)?;
        Ok(self.eligible_from(seat))
    }

    fn check_eligible(&self, picker_seat: usize, picked: &TeamId) -> Result<(), IneligibleReason> {
        if self.pool.contains(picked) {
            return Ok(());
        }
        if let Some(j) = self.seats.iter().position(|a| &a.captain == picked) {
            return match j.cmp(&picker_seat) {
                std::cmp::Ordering::Equal => Err(IneligibleReason::IsPicker),
                std::cmp::Ordering::Less => Err(IneligibleReason::HigherSeededCaptain),
                std::cmp::Ordering::Greater if !self.seats[j].partners.is_empty() => {
                    Err(IneligibleReason::AlreadyOnAlliance)
                }
                std::cmp::Ordering::Greater => Ok(()),
            };
        }
        if self.seats.iter().any(|a| a.partners.contains(picked)) {
            return Err(IneligibleReason::AlreadyOnAlliance);
        }
        Err(IneligibleReason::NotInEvent)
    }

    /// The current captain picks `picked`. On error the state is unchanged.
    pub fn pick(&mut self, picked: &TeamId) -> Result<PickEvent, DraftError> {
        let (turn, seat) = self.current().ok_or(DraftError::Complete)?;
        self.check_eligible(seat, picked)
            .map_err(|reason| DraftError::Ineligible {
                team: picked.clone(),
                reason,
            })?;

        let mut promotions = Vec::new();
        if let Some(pos) = self.pool.iter().position(|t| t == picked) {
            self.pool.remove(pos);
        } else {
            let j = self
                .seats
                .iter()
                .position(|a| &a.captain == picked)
                .expect("eligible non-pool pick is a captain");
            self.seats.remove(j);
            for (k, alliance) in self.seats.iter().enumerate().skip(j) {
                promotions.push(Promotion {
                    team_id: alliance.captain.clone(),
                    old_seat: Some(k + 2),
                    new_seat: k + 1,
                });
            }
            if !self.pool.is_empty() {
                let entrant = self.pool.remove(0);
                self.seats.push(Alliance::new(entrant.clone()));
                promotions.push(Promotion {
                    team_id: entrant,
                    old_seat: None,
                    new_seat: self.seats.len(),
                });
            }
        }
        self.seats[seat].partners.push(picked.clone());
        self.turn = turn + 1;
        Ok(PickEvent {
            turn,
            seat: seat + 1,
            picking_captain: self.seats[seat].captain.clone(),
            picked: picked.clone(),
            promotions,
        })
    }

    /// Rebuilds a draft from a ranking and a recorded pick log, checking that
    /// every recorded picker and promotion is reproduced.
    pub fn replay(ranking: Vec<TeamId>, mode: DraftMode, log: &[PickEvent]) -> Result<DraftState, DraftError> {
        let mut state = DraftState::new(ranking, mode)?;
        for (index, recorded) in log.iter().enumerate() {
            let event = state.pick(&recorded.picked)?;
            if &event != recorded {
                return Err(DraftError::ReplayMismatch {
                    index,
                    message: format!("expected {recorded:?}, replay produced {event:?}"),
                });
            }
        }
        Ok(state)
    }
}

/// Serializes pick events as JSON lines.
pub fn write_pick_log(events: &[PickEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("pick event serializes"));
        out.push('\n');
    }
    out
}

/// Parses a JSON-lines pick log. Blank lines are ignored.
pub fn parse_pick_log(text: &str) -> Result<Vec<PickEvent>, DraftError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| DraftError::LogFormat {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn alliance_profiles<'a>(profiles: &'a ProfileSet, alliance: &Alliance) -> Result<Vec<&'a RobotProfile>, StatsError> {
    alliance.members().map(|t| profiles.get(t)).collect()
}

/// Ranked partner suggestions for whoever is picking now.
pub fn suggest_for_current_picker(
    state: &DraftState,
    profiles: &ProfileSet,
    top_k: usize,
) -> Result<Vec<Suggestion>, DraftError> {
    let (_, seat) = state.current().ok_or(DraftError::Complete)?;
    let members = alliance_profiles(profiles, &state.seats[seat])?;
    let pool = state
        .eligible_from(seat)
        .iter()
        .map(|t| profiles.get(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(suggest_partner(&members, &pool, top_k)?)
}

fn require_profiles(state: &DraftState, profiles: &ProfileSet) -> Result<(), DraftError> {
    for t in &state.ranking {
        profiles.get(t)?;
    }
    Ok(())
}

/// Every captain takes its area-maximizing partner in turn until the draft completes.
pub fn run_optimize_all(
    state: &DraftState,
    profiles: &ProfileSet,
) -> Result<(DraftState, Vec<PickEvent>), DraftError> {
    require_profiles(state, profiles)?;
    let mut state = state.clone().with_mode(DraftMode::OptimizeAll);
    let mut log = Vec::new();
    while !state.is_complete() {
        let best = suggest_for_current_picker(&state, profiles, 1)?
            .into_iter()
            .next()
            .ok_or(OptimizerError::EmptyPool)?;
        log.push(state.pick(&best.team_id)?);
    }
    Ok((state, log))
}

/// What an assisted captain should do next.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prompt {
    /// Our captain is picking; choose one of these or any other eligible team.
    OurTurn { suggestions: Vec<Suggestion> },
    /// Another captain is picking; enter their choice when it is announced.
    TheirTurn { picker: TeamId },
    Complete,
}

/// Live assistant for a single captain. All picks, including our own, are
/// entered by the user; suggestions are offered only on our turns.
#[derive(Debug, Clone)]
pub struct AssistSession<'a> {
    state: DraftState,
    our_team: TeamId,
    profiles: &'a ProfileSet,
    top_k: usize,
    log: Vec<PickEvent>,
}

/// Opens an assisted session for `our_team`, which must currently captain a seat.
pub fn run_optimize_one<'a>(
    state: &DraftState,
    our_team: &TeamId,
    profiles: &'a ProfileSet,
) -> Result<AssistSession<'a>, DraftError> {
    AssistSession::new(state.clone(), our_team.clone(), profiles, 3)
}

impl<'a> AssistSession<'a> {
    pub fn new(state: DraftState, our_team: TeamId, profiles: &'a ProfileSet, top_k: usize) -> Result<Self, DraftError> {
        if state.seat_of(&our_team).is_none() {
            return Err(DraftError::NotACaptain(our_team));
        }
        require_profiles(&state, profiles)?;
        Ok(AssistSession {
            state: state.with_mode(DraftMode::OptimizeOne(our_team.clone())),
            our_team,
            profiles,
            top_k,
            log: Vec::new(),
        })
    }

    pub fn state(&self) -> &DraftState {
        &self.state
    }

    pub fn log(&self) -> &[PickEvent] {
        &self.log
    }

    pub fn prompt(&self) -> Result<Prompt, DraftError> {
        if self.state.is_complete() {
            return Ok(Prompt::Complete);
        }
        let picker = self.state.current_picker()?;
        if picker == self.our_team {
            Ok(Prompt::OurTurn {
                suggestions: suggest_for_current_picker(&self.state, self.profiles, self.top_k)?,
            })
        } else {
            Ok(Prompt::TheirTurn { picker })
        }
    }

    /// Records the announced pick of whoever is on the clock.
    pub fn enter_pick(&mut self, picked: &TeamId) -> Result<PickEvent, DraftError> {
        let event = self.state.pick(picked)?;
        self.log.push(event.clone());
        Ok(event)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(list: &[&str]) -> Vec<TeamId> {
        list.iter().map(|s| TeamId::new(*s)).collect()
    }

    fn generic(n: usize) -> Vec<TeamId> {
        (1..=n).map(|i| TeamId::new(format!("{}", i * 10))).collect()
    }

    #[test]
    fn too_few_teams() {
        assert!(matches!(new_draft(&generic(8)), Err(DraftError::TooFewTeams(8))));
        assert!(new_draft(&generic(9)).is_ok());
        let mut dup = generic(10);
        dup[9] = dup[0].clone();
        assert!(matches!(new_draft(&dup), Err(DraftError::DuplicateTeam(_))));
    }

    #[test]
    fn fresh_draft_seats_top_eight() {
        let ranking = generic(24);
        let d = new_draft(&ranking).unwrap();
        let captains: Vec<_> = d.alliances().iter().map(|a| a.captain.clone()).collect();
        assert_eq!(captains, ranking[..8]);
        assert_eq!(d.pool(), &ranking[8..]);
        assert_eq!(d.current_picker().unwrap(), ranking[0]);
    }

    #[test]
    fn snake_turn_after_first_round() {
        let ranking = generic(24);
        let mut d = new_draft(&ranking).unwrap();
        for k in 0..8 {
            let p = d.pool()[0].clone();
            let e = d.pick(&p).unwrap();
            assert_eq!(e.seat, k + 1);
        }
        assert_eq!(d.current_picker().unwrap(), ranking[7]);
        let p = d.pool()[0].clone();
        d.pick(&p).unwrap();
        assert_eq!(d.current_picker().unwrap(), ranking[6]);
    }

    #[test]
    fn ineligible_picks() {
        let ranking = generic(24);
        let mut d = new_draft(&ranking).unwrap();
        let err = |d: &mut DraftState, t: &TeamId| match d.pick(t) {
            Err(DraftError::Ineligible { reason, .. }) => reason,
            other => panic!("{other:?}"),
        };
        assert_eq!(err(&mut d, &ranking[0]), IneligibleReason::IsPicker);
        assert_eq!(err(&mut d, &TeamId::new("99999")), IneligibleReason::NotInEvent);
        d.pick(&ranking[10]).unwrap();
        assert_eq!(err(&mut d, &ranking[10]), IneligibleReason::AlreadyOnAlliance);
        assert_eq!(err(&mut d, &ranking[0]), IneligibleReason::HigherSeededCaptain);
        let before = d.clone();
        assert!(d.pick(&ranking[0]).is_err());
        assert_eq!(d, before);
    }

    #[test]
    fn complete_draft_has_eight_full_alliances() {
        let ranking = generic(24);
        let mut d = new_draft(&ranking).unwrap();
        while !d.is_complete() {
            let t = d.eligible().unwrap().last().unwrap().clone();
            d.pick(&t).unwrap();
        }
        assert_eq!(d.alliances().len(), 8);
        assert!(d.alliances().iter().all(|a| a.len() == 3));
        assert!(matches!(d.current_picker(), Err(DraftError::Complete)));
    }

    #[test]
    fn small_event_ends_when_nobody_is_left() {
        let ranking = generic(9);
        let mut d = new_draft(&ranking).unwrap();
        // seat 1 takes seat 2's captain; the lone pool team is promoted.
        let e = d.pick(&ranking[1]).unwrap();
        assert_eq!(e.promotions.last().unwrap().team_id, ranking[8]);
        while !d.is_complete() {
            let t = d.eligible().unwrap()[0].clone();
            d.pick(&t).unwrap();
        }
        let placed: usize = d.alliances().iter().map(Alliance::len).sum();
        assert_eq!(placed + d.pool().len(), 9);
    }

    #[test]
    fn promotion_from_narrated_event() {
        let ranking = ids(&[
            "2539", "5404", "103", "2168", "747", "3974", "1218", "708", "4342", "433", "293", "225",
            "2016", "5407", "486", "1495",
        ]);
        let mut d = new_draft(&ranking).unwrap();
        d.pick(&TeamId::new("225")).unwrap();
        let e = d.pick(&TeamId::new("2168")).unwrap();
        assert_eq!(e.picking_captain, TeamId::new("5404"));
        assert_eq!(d.seat_of(&TeamId::new("747")), Some(4));
        assert_eq!(d.seat_of(&TeamId::new("4342")), Some(8));
        assert_eq!(
            e.promotions.last().unwrap(),
            &Promotion {
                team_id: TeamId::new("4342"),
                old_seat: None,
                new_seat: 8
            }
        );
        assert_eq!(d.current_picker().unwrap(), TeamId::new("103"));
    }

    #[test]
    fn pick_log_round_trip_and_replay() {
        let ranking = generic(30);
        let mut d = new_draft(&ranking).unwrap();
        let mut log = Vec::new();
        log.push(d.pick(&ranking[3]).unwrap());
        while !d.is_complete() {
            let t = d.eligible().unwrap()[1 % d.eligible().unwrap().len()].clone();
            log.push(d.pick(&t).unwrap());
        }
        let text = write_pick_log(&log);
        let parsed = parse_pick_log(&text).unwrap();
        assert_eq!(parsed, log);
        let replayed = DraftState::replay(ranking.clone(), DraftMode::Manual, &parsed).unwrap();
        assert_eq!(replayed, d);

        let mut tampered = log.clone();
        tampered[0].picking_captain = TeamId::new("1");
        assert!(matches!(
            DraftState::replay(ranking, DraftMode::Manual, &tampered),
            Err(DraftError::ReplayMismatch { index: 0, .. })
        ));
        assert!(matches!(parse_pick_log("{}\n"), Err(DraftError::LogFormat { line: 1, .. })));
    }
}
