//! HTTP/JSON service for the draft board.
//!
//! Profiles, the ranking and the model are loaded once and shared read-only.
//! Draft sessions are the only mutable state; each sits behind its own mutex
//! and every write must name the revision it was based on.
//!
//! Every response body carries a `revision`: the session's own revision on
//! session routes, and the service-wide count of session writes elsewhere.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use frc_core::draft::{suggest_for_current_picker, DraftError, DraftMode, DraftState, PickEvent};
use frc_core::optimizer::RadarData;
use frc_core::predictor::{predict, TrainedModel};
use frc_core::stats::ProfileSet;
use frc_core::{IndicatorVector, TeamId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::session::{restore_all, Session, SessionError};

pub struct ServiceConfig {
    pub profiles: ProfileSet,
    pub ranking: Vec<TeamId>,
    pub model: Option<TrainedModel>,
    /// Where sessions are snapshotted; `None` keeps them in memory only.
    pub state_dir: Option<PathBuf>,
}

pub struct AppState {
    profiles: ProfileSet,
    ranking: Vec<TeamId>,
    model: Option<TrainedModel>,
    state_dir: Option<PathBuf>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
    writes: AtomicU64,
}

impl AppState {
    /// Loads the service state, restoring any sessions saved in `state_dir`.
    pub fn new(config: ServiceConfig) -> Result<AppState, SessionError> {
        let restored = match &config.state_dir {
            Some(dir) => restore_all(dir)?,
            None => Vec::new(),
        };
        let mut next = 1;
        let mut writes = 0;
        let mut sessions = BTreeMap::new();
        for s in restored {
            if let Some(n) = s.id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                next = next.max(n + 1);
            }
            writes += 1 + s.revision();
            sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
        }
        Ok(AppState {
            profiles: config.profiles,
            ranking: config.ranking,
            model: config.model,
            state_dir: config.state_dir,
            sessions: RwLock::new(sessions),
            next_id: AtomicU64::new(next),
            writes: AtomicU64::new(writes),
        })
    }

    fn service_revision(&self) -> u64 {
        self.writes.load(Ordering::SeqCst)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}"), self.service_revision()))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/rankings", get(rankings))
        .route("/profiles/{team}", get(profile))
        .route("/average-alliance", get(average_alliance))
        .route("/predict", post(predict_route))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_snapshot))
        .route("/sessions/{id}/picks", post(submit_pick))
        .route("/sessions/{id}/suggestions", get(suggestions))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    revision: u64,
    detail: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>, revision: u64) -> ApiError {
        ApiError {
            status,
            message: message.into(),
            revision,
            detail: None,
        }
    }

    fn from_session(e: SessionError, revision: u64) -> ApiError {
        match e {
            SessionError::StaleRevision { current, .. } => {
                let mut err = ApiError::new(StatusCode::CONFLICT, e.to_string(), revision);
                err.detail = Some(json!({"kind": "stale_revision", "current_revision": current}));
                err
            }
            SessionError::Draft(DraftError::Ineligible { ref team, reason }) => {
                let mut err = ApiError::new(StatusCode::CONFLICT, e.to_string(), revision);
                err.detail = Some(json!({"kind": "ineligible", "team": team, "reason": reason}));
                err
            }
            SessionError::Draft(DraftError::Complete) => {
                let mut err = ApiError::new(StatusCode::CONFLICT, e.to_string(), revision);
                err.detail = Some(json!({"kind": "complete"}));
                err
            }
            SessionError::Draft(ref d @ (DraftError::TooFewTeams(_) | DraftError::DuplicateTeam(_))) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, d.to_string(), revision)
            }
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, other.to_string(), revision),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({"error": self.message, "revision": self.revision});
        if let Some(detail) = self.detail {
            body["detail"] = detail;
        }
        (self.status, Json(body)).into_response()
    }
}

/// Parses a JSON body, answering 422 for anything that is not the expected shape.
fn parse_body<T: DeserializeOwned>(body: &Bytes, revision: u64) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("malformed body: {e}"), revision))
}

async fn rankings(State(app): State<Arc<AppState>>) -> Json<Value> {
    let rows: Vec<Value> = app
        .ranking
        .iter()
        .enumerate()
        .map(|(i, t)| {
            json!({
                "rank": i + 1,
                "team_id": t,
                "captain_seat": if i < frc_core::draft::SEATS { Some(i + 1) } else { None },
                "has_profile": app.profiles.profiles.contains_key(t),
            })
        })
        .collect();
    Json(json!({"revision": app.service_revision(), "year": app.profiles.year, "rankings": rows}))
}

async fn profile(State(app): State<Arc<AppState>>, Path(team): Path<String>) -> Result<Json<Value>, ApiError> {
    let revision = app.service_revision();
    let id = TeamId::from_key(&team);
    let p = app
        .profiles
        .profiles
        .get(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no profile for team {id}"), revision))?;
    let radar = RadarData::new(&p.normalized).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), revision))?;
    Ok(Json(json!({"revision": revision, "profile": p, "radar": radar})))
}

async fn average_alliance(State(app): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let revision = app.service_revision();
    let v = app.profiles.average_alliance();
    let radar = RadarData::new(&v).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), revision))?;
    Ok(Json(json!({
        "revision": revision,
        "profiles": app.profiles.profiles.len(),
        "vector": v,
        "radar": radar,
    })))
}

/// An alliance given either by its members or directly by an effectiveness vector.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AllianceSpec {
    Teams(Vec<TeamId>),
    Vector { vector: IndicatorVector },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictBody {
    red: AllianceSpec,
    blue: AllianceSpec,
}

fn resolve(app: &AppState, spec: &AllianceSpec, revision: u64) -> Result<IndicatorVector, ApiError> {
    match spec {
        AllianceSpec::Teams(teams) => {
            for t in teams {
                if !app.profiles.profiles.contains_key(t) {
                    return Err(ApiError::new(StatusCode::NOT_FOUND, format!("no profile for team {t}"), revision));
                }
            }
            app.profiles
                .effectiveness(teams)
                .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string(), revision))
        }
        AllianceSpec::Vector { vector } => {
            if vector.is_normalized() {
                Ok(*vector)
            } else {
                Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "vector values must lie in [0, 1]",
                    revision,
                ))
            }
        }
    }
}

async fn predict_route(State(app): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let revision = app.service_revision();
    let body: PredictBody = parse_body(&body, revision)?;
    let red = resolve(&app, &body.red, revision)?;
    let blue = resolve(&app, &body.blue, revision)?;
    let model = app
        .model
        .as_ref()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no model loaded", revision))?;
    let p = predict(model, &red, &blue).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string(), revision))?;
    Ok(Json(json!({
        "revision": revision,
        "probability": p.probability,
        "red_wins": p.red_wins,
        "red": red,
        "blue": blue,
    })))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    /// Defaults to the service ranking.
    #[serde(default)]
    ranking: Option<Vec<TeamId>>,
    /// Captain the session assists; omitted for a plain board.
    #[serde(default)]
    our_team: Option<TeamId>,
}

/// Full session view returned by every session route.
#[derive(Debug, Serialize)]
pub struct Snapshot<'a> {
    pub session_id: &'a str,
    pub revision: u64,
    pub state: &'a DraftState,
    pub alliances: Vec<Value>,
    pub complete: bool,
    pub current_seat: Option<usize>,
    pub current_picker: Option<TeamId>,
    pub eligible: Vec<TeamId>,
    pub picks: &'a [PickEvent],
}

fn snapshot<'a>(s: &'a Session, profiles: &ProfileSet) -> Snapshot<'a> {
    let alliances = s
        .state
        .alliances()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let members: Vec<TeamId> = a.members().cloned().collect();
            let area = profiles
                .effectiveness(&members)
                .ok()
                .and_then(|v| frc_core::optimizer::radar_area(&v).ok())
                .map(|a| a.0);
            json!({"seat": i + 1, "captain": a.captain, "partners": a.partners, "area": area})
        })
        .collect();
    Snapshot {
        session_id: &s.id,
        revision: s.revision(),
        state: &s.state,
        alliances,
        complete: s.state.is_complete(),
        current_seat: s.state.current_seat().ok(),
        current_picker: s.state.current_picker().ok(),
        eligible: s.state.eligible().unwrap_or_default(),
        picks: &s.log,
    }
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let revision = app.service_revision();
    let req: CreateSession = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSession::default()
    } else {
        parse_body(&body, revision)?
    };
    let ranking = req.ranking.unwrap_or_else(|| app.ranking.clone());
    let mode = match &req.our_team {
        Some(t) => {
            if !ranking.iter().take(frc_core::draft::SEATS).any(|r| r == t) {
                return Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    format!("team {t} is not one of the eight captains"),
                    revision,
                ));
            }
            DraftMode::OptimizeOne(t.clone())
        }
        None => DraftMode::Manual,
    };
    let id = format!("s{}", app.next_id.fetch_add(1, Ordering::SeqCst));
    let session = Session::create(id.clone(), ranking, mode, app.state_dir.as_deref())
        .map_err(|e| ApiError::from_session(e, revision))?;
    let body = serde_json::to_value(snapshot(&session, &app.profiles)).expect("snapshot serializes");
    app.sessions
        .write()
        .expect("session table lock")
        .insert(id, Arc::new(Mutex::new(session)));
    app.writes.fetch_add(1, Ordering::SeqCst);
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn session_snapshot(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = app.session(&id)?;
    let s = session.lock().expect("session lock");
    Ok(Json(serde_json::to_value(snapshot(&s, &app.profiles)).expect("snapshot serializes")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PickBody {
    picked: TeamId,
    revision: u64,
}

async fn submit_pick(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let session = app.session(&id)?;
    let mut s = session.lock().expect("session lock");
    let body: PickBody = parse_body(&body, s.revision())?;
    let event = s
        .pick(&body.picked, body.revision)
        .map_err(|e| ApiError::from_session(e, s.revision()))?;
    app.writes.fetch_add(1, Ordering::SeqCst);
    Ok(Json(json!({
        "session_id": s.id,
        "revision": s.revision(),
        "event": event,
        "complete": s.state.is_complete(),
    })))
}

#[derive(Debug, Deserialize)]
struct SuggestionQuery {
    k: Option<String>,
}

async fn suggestions(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<SuggestionQuery>,
) -> Result<Json<Value>, ApiError> {
    let session = app.session(&id)?;
    let s = session.lock().expect("session lock");
    let revision = s.revision();
    let k = match q.k.as_deref() {
        None => 3,
        Some(text) => match text.parse::<usize>() {
            Ok(k) if k >= 1 => k,
            _ => return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("k must be a positive integer, got `{text}`"), revision)),
        },
    };
    let picker = s
        .state
        .current_picker()
        .map_err(|e| ApiError::from_session(e.into(), revision))?;
    let seat = s.state.current_seat().map_err(|e| ApiError::from_session(e.into(), revision))?;
    let list = suggest_for_current_picker(&s.state, &app.profiles, k).map_err(|e| match e {
        DraftError::Stats(inner) => ApiError::new(StatusCode::NOT_FOUND, inner.to_string(), revision),
        other => ApiError::from_session(other.into(), revision),
    })?;
    let average = app.profiles.average_alliance();
    let mut out = Vec::with_capacity(list.len());
    for sug in list {
        let radar = RadarData::new(&sug.effectiveness)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), revision))?;
        let win = match &app.model {
            Some(m) => Some(
                predict(m, &sug.effectiveness, &average)
                    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), revision))?
                    .probability,
            ),
            None => None,
        };
        out.push(json!({
            "team_id": sug.team_id,
            "area": sug.area,
            "effectiveness": sug.effectiveness,
            "radar": radar,
            "win_probability_vs_average": win,
        }));
    }
    Ok(Json(json!({
        "session_id": s.id,
        "revision": revision,
        "picker": picker,
        "seat": seat,
        "suggestions": out,
    })))
}
