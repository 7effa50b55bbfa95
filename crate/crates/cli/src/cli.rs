//! Subcommands of the `frc-alliance` binary.
//!
//! Every command writes its JSON artifacts into `--out` (default: the current
//! directory) and a short human-readable summary to standard output.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frc_core::draft::{self, run_optimize_all, write_pick_log, AssistSession, DraftState, PickEvent, Prompt};
use frc_core::ingest::{dataset_integrity_report, load_event, parse_rankings, EventDataset};
use frc_core::optimizer::radar_area;
use frc_core::predictor::{
    accuracy, build_training_set, grid_search, load_model, predict, save_model, split_dataset, train, ParamGrid,
    TrainedModel,
};
use frc_core::schema::{load_year_schema, YearSchema};
use frc_core::stats::{build_profiles, ProfileSet};
use frc_core::synthetic::{synthetic_samples, SyntheticEvent};
use frc_core::{Indicator, TeamId};
use serde_json::{json, Value};

use crate::api::{router, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "frc-alliance", version, about = "Alliance selection analytics for FRC events")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate match fixtures and report what was loaded.
    Ingest(IngestArgs),
    /// Build normalized robot profiles.
    Profiles(ProfilesArgs),
    /// Grid-search, train and evaluate the winner-prediction model.
    Train(TrainArgs),
    /// Predict the winner of one match.
    Predict(PredictArgs),
    /// Run an alliance-selection draft.
    Draft(DraftArgs),
    /// Write a seeded synthetic event (matches and rankings).
    Synth(SynthArgs),
    /// Serve the HTTP API for the draft board.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Directory for JSON artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Fixture files or directories, one event each.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    Event,
    Season,
}

#[derive(Debug, Args)]
pub struct ProfilesArgs {
    #[arg(long)]
    pub year: i32,
    /// One profile set per event, or one across every event given.
    #[arg(long, value_enum, default_value = "season")]
    pub scope: Scope,
    /// Indicator schema; defaults to `schemas/<year>.json`.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Hyperparameter grid (JSON).
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Profiles used to turn matches into samples.
    #[arg(long, required_unless_present = "synthetic")]
    pub profiles: Option<PathBuf>,
    /// Train on this many synthetic samples instead of match data.
    #[arg(long, conflicts_with_all = ["profiles", "events"])]
    pub synthetic: Option<usize>,
    /// Label noise for `--synthetic`.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Share of samples used for training; the rest is the test set.
    #[arg(long, default_value_t = 0.85)]
    pub train_fraction: f64,
    /// Event fixtures providing the matches.
    pub events: Vec<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub profiles: PathBuf,
    /// Red alliance, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub red: Vec<String>,
    /// Blue alliance, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub blue: Vec<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DraftArgs {
    /// Event fixture file or directory.
    #[arg(long)]
    pub event: PathBuf,
    /// `all` optimizes every captain; `one:TEAM` assists a single captain,
    /// reading announced picks from standard input.
    #[arg(long, default_value = "all")]
    pub mode: String,
    /// Final rankings; defaults to `<event>.rankings.json` beside the fixture.
    #[arg(long)]
    pub rankings: Option<PathBuf>,
    /// Precomputed profiles; otherwise built from the event with `--schema`.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Indicator schema; defaults to `schemas/<year>.json`.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Adds win probabilities against the average alliance.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Suggestions shown per turn in `one:` mode.
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2019)]
    pub year: i32,
    /// Indicator schema; defaults to `schemas/<year>.json`.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Event code appended to the year, e.g. `syn` for `2019syn`.
    #[arg(long, default_value = "syn")]
    pub code: String,
    #[arg(long, default_value_t = 24)]
    pub teams: usize,
    #[arg(long, default_value_t = 12)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub profiles: PathBuf,
    #[arg(long)]
    pub rankings: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Directory for session snapshots; sessions found there are restored.
    #[arg(long)]
    pub state_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
}

/// A failed command. Input problems exit with 2, anything else with 1.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) => ExitCode::from(2),
            CliError::Failed(_) => ExitCode::from(1),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Failed(m) => m,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

type CliResult = Result<(), CliError>;

pub fn run(cli: Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Ingest(a) => ingest(a, stdout),
        Command::Profiles(a) => profiles(a, stdout),
        Command::Train(a) => train_cmd(a, stdout),
        Command::Predict(a) => predict_cmd(a, stdout),
        Command::Draft(a) => draft_cmd(a, stdin, stdout),
        Command::Synth(a) => synth(a, stdout),
        Command::Serve(a) => serve(a, stdout),
    }
}

fn say(stdout: &mut dyn Write, text: impl AsRef<str>) -> CliResult {
    writeln!(stdout, "{}", text.as_ref()).map_err(failed)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| failed(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).expect("artifact serializes");
    fs::write(&path, text + "\n").map_err(|e| failed(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn load_events(paths: &[PathBuf]) -> Result<Vec<EventDataset>, CliError> {
    paths.iter().map(|p| load_event(p).map_err(invalid)).collect()
}

fn schema_for(explicit: Option<&Path>, year: i32) -> Result<YearSchema, CliError> {
    let path = explicit
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("schemas/{year}.json")));
    let schema = load_year_schema(&path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if schema.year != year {
        return Err(invalid(format!("{} describes {}, expected {year}", path.display(), schema.year)));
    }
    Ok(schema)
}

fn ingest(a: IngestArgs, stdout: &mut dyn Write) -> CliResult {
    let events = load_events(&a.paths)?;
    let mut rows = Vec::new();
    for (path, ds) in a.paths.iter().zip(&events) {
        let report = dataset_integrity_report(ds);
        say(
            stdout,
            format!(
                "{}: {} ({}) {} matches, {} teams, {} ties, {} skipped",
                path.display(),
                ds.event_key,
                ds.year,
                report.matches,
                report.teams,
                report.ties,
                report.skipped
            ),
        )?;
        for s in &ds.skipped {
            say(stdout, format!("  skipped {}: {}", s.match_key, s.reason))?;
        }
        rows.push(json!({
            "path": path.display().to_string(),
            "event_key": ds.event_key,
            "year": ds.year,
            "report": report,
            "skipped": ds.skipped,
        }));
    }
    let path = write_json(&a.output.out, "ingest-report.json", &json!({"events": rows}))?;
    say(stdout, format!("wrote {}", path.display()))?;
    if events.iter().all(|e| e.matches.is_empty()) {
        return Err(invalid("no valid matches found"));
    }
    Ok(())
}

fn profile_table(set: &ProfileSet, stdout: &mut dyn Write) -> CliResult {
    let header: Vec<String> = Indicator::ALL.iter().map(|i| format!("{:>7}", abbreviation(*i))).collect();
    say(stdout, format!("{:>8} {:>4} {}", "team", "n", header.join(" ")))?;
    for p in set.profiles.values() {
        let cells: Vec<String> = p.normalized.0.iter().map(|v| format!("{v:>7.3}")).collect();
        say(stdout, format!("{:>8} {:>4} {}", p.team_id, p.match_count, cells.join(" ")))?;
    }
    Ok(())
}

fn abbreviation(i: Indicator) -> &'static str {
    match i {
        Indicator::TraditionalLow => "low",
        Indicator::TraditionalHigh => "high",
        Indicator::Technical => "tech",
        Indicator::Autonomous => "auto",
        Indicator::Endgame => "endgame",
        Indicator::Fouls => "fouls",
        Indicator::Defense => "defense",
    }
}

fn profiles(a: ProfilesArgs, stdout: &mut dyn Write) -> CliResult {
    let schema = schema_for(a.schema.as_deref(), a.year)?;
    let events = load_events(&a.paths)?;
    let groups: Vec<(String, Vec<EventDataset>)> = match a.scope {
        Scope::Season => vec![(format!("profiles-{}.json", a.year), events)],
        Scope::Event => events
            .into_iter()
            .map(|e| (format!("profiles-{}-{}.json", a.year, e.event_key), vec![e]))
            .collect(),
    };
    for (name, datasets) in groups {
        let set = build_profiles(&datasets, &schema).map_err(invalid)?;
        if set.profiles.is_empty() {
            return Err(invalid(format!("{name}: no matches to profile")));
        }
        profile_table(&set, stdout)?;
        let path = a.output.out.join(&name);
        fs::create_dir_all(&a.output.out).map_err(failed)?;
        set.save(&path).map_err(failed)?;
        say(stdout, format!("wrote {} ({} robots)", path.display(), set.profiles.len()))?;
    }
    Ok(())
}

fn train_cmd(a: TrainArgs, stdout: &mut dyn Write) -> CliResult {
    let text = fs::read_to_string(&a.grid).map_err(|e| invalid(format!("{}: {e}", a.grid.display())))?;
    let grid = ParamGrid::from_json_str(&text).map_err(invalid)?;
    if !(a.train_fraction > 0.0 && a.train_fraction < 1.0) {
        return Err(invalid("--train-fraction must lie strictly between 0 and 1"));
    }
    let (samples, ties, source) = match (a.synthetic, &a.profiles) {
        (Some(n), _) => (synthetic_samples(n, a.noise, a.seed), 0, format!("synthetic ({n} samples)")),
        (None, Some(profiles)) => {
            if a.events.is_empty() {
                return Err(invalid("train needs event fixtures (or --synthetic)"));
            }
            let set = ProfileSet::load(profiles).map_err(invalid)?;
            let events = load_events(&a.events)?;
            let ts = build_training_set(&events, &set).map_err(invalid)?;
            let keys: Vec<&str> = events.iter().map(|e| e.event_key.as_str()).collect();
            (ts.samples, ts.ties_excluded, keys.join(","))
        }
        (None, None) => return Err(invalid("either --profiles or --synthetic is required")),
    };
    if samples.len() < 2 {
        return Err(invalid(format!("{} samples are too few to split", samples.len())));
    }
    let (train_set, test_set) = split_dataset(&samples, a.train_fraction, a.seed);
    say(
        stdout,
        format!(
            "{} samples from {source} ({ties} ties excluded): {} train / {} test; {} combinations x {} folds",
            samples.len(),
            train_set.len(),
            test_set.len(),
            grid.len(),
            grid.folds
        ),
    )?;
    let report = grid_search(&grid, &train_set, a.seed).map_err(invalid)?;
    let best = &report.entries[report.best_index];
    say(
        stdout,
        format!(
            "best combination #{}: hidden {:?}, {:?}, {:?}, alpha {}, {:?} (cv accuracy {:.4})",
            report.best_index,
            best.config.hidden_layers,
            best.config.activation,
            best.config.solver,
            best.config.alpha,
            best.config.learning_rate,
            best.mean_accuracy
        ),
    )?;
    let mut model = train(&report.best, &train_set).map_err(invalid)?;
    let test_accuracy = accuracy(&model, &test_set);
    model.metadata.test_accuracy = Some(test_accuracy);
    say(
        stdout,
        format!(
            "trained {} epochs: train accuracy {:.4}, test accuracy {:.4}",
            model.metadata.epochs_run, model.metadata.train_accuracy, test_accuracy
        ),
    )?;
    fs::create_dir_all(&a.output.out).map_err(failed)?;
    let model_path = a.output.out.join("model.json");
    save_model(&model, &model_path).map_err(failed)?;
    let report_path = write_json(
        &a.output.out,
        "training-report.json",
        &json!({
            "source": source,
            "seed": a.seed,
            "samples": samples.len(),
            "ties_excluded": ties,
            "train_samples": train_set.len(),
            "test_samples": test_set.len(),
            "train_accuracy": model.metadata.train_accuracy,
            "test_accuracy": test_accuracy,
            "epochs_run": model.metadata.epochs_run,
            "grid": report,
        }),
    )?;
    say(stdout, format!("wrote {} and {}", model_path.display(), report_path.display()))
}

fn team_list(raw: &[String]) -> Result<Vec<TeamId>, CliError> {
    let teams: Vec<TeamId> = raw
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(TeamId::from_key)
        .collect();
    if teams.is_empty() || teams.len() > 3 {
        return Err(invalid(format!("an alliance lists 1 to 3 teams, got {}", teams.len())));
    }
    Ok(teams)
}

fn predict_cmd(a: PredictArgs, stdout: &mut dyn Write) -> CliResult {
    let model = load_model(&a.model).map_err(invalid)?;
    let set = ProfileSet::load(&a.profiles).map_err(invalid)?;
    let red_teams = team_list(&a.red)?;
    let blue_teams = team_list(&a.blue)?;
    let red = set.effectiveness(&red_teams).map_err(invalid)?;
    let blue = set.effectiveness(&blue_teams).map_err(invalid)?;
    let p = predict(&model, &red, &blue).map_err(invalid)?;
    let names = |t: &[TeamId]| t.iter().map(TeamId::as_str).collect::<Vec<_>>().join(",");
    say(
        stdout,
        format!(
            "red {} vs blue {}: P(red wins) = {:.4} -> {} predicted",
            names(&red_teams),
            names(&blue_teams),
            p.probability,
            if p.red_wins { "red" } else { "blue" }
        ),
    )?;
    write_json(
        &a.output.out,
        "prediction.json",
        &json!({
            "red": {"teams": red_teams, "effectiveness": red},
            "blue": {"teams": blue_teams, "effectiveness": blue},
            "probability": p.probability,
            "red_wins": p.red_wins,
        }),
    )?;
    Ok(())
}

fn default_rankings_path(event: &Path) -> PathBuf {
    if event.is_dir() {
        event.join("rankings.json")
    } else {
        let stem = event.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        event.with_file_name(format!("{stem}.rankings.json"))
    }
}

fn parse_mode(text: &str) -> Result<Option<TeamId>, CliError> {
    match text {
        "all" => Ok(None),
        _ => match text.strip_prefix("one:") {
            Some(team) if !team.trim().is_empty() => Ok(Some(TeamId::from_key(team.trim()))),
            _ => Err(invalid(format!("--mode must be `all` or `one:TEAM`, got `{text}`"))),
        },
    }
}

fn draft_cmd(a: DraftArgs, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> CliResult {
    let ours = parse_mode(&a.mode)?;
    let event = load_event(&a.event).map_err(invalid)?;
    let rankings_path = a.rankings.clone().unwrap_or_else(|| default_rankings_path(&a.event));
    let text = fs::read_to_string(&rankings_path).map_err(|e| invalid(format!("{}: {e}", rankings_path.display())))?;
    let ranking = parse_rankings(&text).map_err(|e| invalid(format!("{}: {e}", rankings_path.display())))?;
    let set = match &a.profiles {
        Some(p) => ProfileSet::load(p).map_err(invalid)?,
        None => {
            let schema = schema_for(a.schema.as_deref(), event.year)?;
            build_profiles(std::slice::from_ref(&event), &schema).map_err(invalid)?
        }
    };
    let model = a.model.as_deref().map(load_model).transpose().map_err(invalid)?;
    let start = draft::new_draft(&ranking).map_err(invalid)?;
    say(
        stdout,
        format!(
            "{}: captains {}",
            event.event_key,
            start.alliances().iter().map(|x| x.captain.as_str()).collect::<Vec<_>>().join(", ")
        ),
    )?;

    let (state, log) = match &ours {
        None => {
            let (state, log) = run_optimize_all(&start, &set).map_err(invalid)?;
            for e in &log {
                say(stdout, describe_pick(e))?;
            }
            (state, log)
        }
        Some(team) => assist(start, team.clone(), &set, a.top_k, stdin, stdout)?,
    };
    finish_draft(&a.output.out, &event.event_key, &a.mode, &state, &log, &set, model.as_ref(), stdout)
}

fn describe_pick(e: &PickEvent) -> String {
    let mut line = format!("pick {:>2}: seat {} {} takes {}", e.turn + 1, e.seat, e.picking_captain, e.picked);
    for p in &e.promotions {
        match p.old_seat {
            Some(old) => line.push_str(&format!("; {} {}->{}", p.team_id, old, p.new_seat)),
            None => line.push_str(&format!("; {} enters seat {}", p.team_id, p.new_seat)),
        }
    }
    line
}

/// Interactive single-captain assistant: one announced pick per input line.
/// End of input leaves the draft unfinished; its artifacts are still written.
fn assist(
    start: DraftState,
    team: TeamId,
    set: &ProfileSet,
    top_k: usize,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
) -> Result<(DraftState, Vec<PickEvent>), CliError> {
    let mut session = AssistSession::new(start, team, set, top_k).map_err(invalid)?;
    loop {
        match session.prompt().map_err(invalid)? {
            Prompt::Complete => break,
            Prompt::OurTurn { suggestions } => {
                say(stdout, "your pick; suggestions:")?;
                for (i, s) in suggestions.iter().enumerate() {
                    say(stdout, format!("  {}. {} (area {:.4})", i + 1, s.team_id, s.area))?;
                }
            }
            Prompt::TheirTurn { picker } => say(stdout, format!("{picker} is picking"))?,
        }
        stdout.flush().map_err(failed)?;
        let mut line = String::new();
        if stdin.read_line(&mut line).map_err(failed)? == 0 {
            say(stdout, "input ended before the draft finished")?;
            break;
        }
        let entry = line.trim();
        if entry.is_empty() {
            continue;
        }
        match session.enter_pick(&TeamId::from_key(entry)) {
            Ok(e) => say(stdout, describe_pick(&e))?,
            Err(e) => say(stdout, format!("rejected: {e}"))?,
        }
    }
    Ok((session.state().clone(), session.log().to_vec()))
}

#[allow(clippy::too_many_arguments)]
fn finish_draft(
    out: &Path,
    event_key: &str,
    mode: &str,
    state: &DraftState,
    log: &[PickEvent],
    set: &ProfileSet,
    model: Option<&TrainedModel>,
    stdout: &mut dyn Write,
) -> CliResult {
    let average = set.average_alliance();
    let mut alliances = Vec::new();
    for (i, a) in state.alliances().iter().enumerate() {
        let members: Vec<TeamId> = a.members().cloned().collect();
        let v = set.effectiveness(&members).map_err(invalid)?;
        let area = radar_area(&v).map_err(invalid)?.0;
        let win = model
            .map(|m| predict(m, &v, &average).map(|p| p.probability))
            .transpose()
            .map_err(invalid)?;
        let mut line = format!(
            "alliance {}: {} (area {area:.4})",
            i + 1,
            members.iter().map(TeamId::as_str).collect::<Vec<_>>().join(", ")
        );
        if let Some(w) = win {
            line.push_str(&format!(", P(win vs average) {w:.3}"));
        }
        say(stdout, line)?;
        alliances.push(json!({
            "seat": i + 1,
            "captain": a.captain,
            "partners": a.partners,
            "effectiveness": v,
            "area": area,
            "win_probability_vs_average": win,
        }));
    }
    fs::create_dir_all(out).map_err(failed)?;
    let log_path = out.join("picklog.jsonl");
    fs::write(&log_path, write_pick_log(log)).map_err(failed)?;
    let summary = json!({
        "event_key": event_key,
        "mode": mode,
        "complete": state.is_complete(),
        "picks": log.len(),
        "ranking": state.ranking(),
        "average_alliance": average,
        "alliances": alliances,
        "state": state,
    });
    let path = write_json(out, "draft.json", &summary)?;
    say(stdout, format!("wrote {} and {}", log_path.display(), path.display()))
}

fn synth(a: SynthArgs, stdout: &mut dyn Write) -> CliResult {
    let schema = schema_for(a.schema.as_deref(), a.year)?;
    if a.teams < 9 {
        return Err(invalid("a synthetic event needs at least 9 teams for a draft"));
    }
    let event = SyntheticEvent::generate(&schema, &a.code, a.teams, a.rounds, a.seed);
    let matches = write_json(&a.output.out, &format!("{}.json", event.event_key), &event.fixture_array())?;
    let rankings = write_json(
        &a.output.out,
        &format!("{}.rankings.json", event.event_key),
        &event.rankings_json(),
    )?;
    say(
        stdout,
        format!(
            "{}: {} teams, {} matches; wrote {} and {}",
            event.event_key,
            a.teams,
            event.matches.len(),
            matches.display(),
            rankings.display()
        ),
    )
}

fn serve(a: ServeArgs, stdout: &mut dyn Write) -> CliResult {
    let profiles = ProfileSet::load(&a.profiles).map_err(invalid)?;
    let text = fs::read_to_string(&a.rankings).map_err(|e| invalid(format!("{}: {e}", a.rankings.display())))?;
    let ranking = parse_rankings(&text).map_err(invalid)?;
    let model = a.model.as_deref().map(load_model).transpose().map_err(invalid)?;
    let state = AppState::new(ServiceConfig {
        profiles,
        ranking,
        model,
        state_dir: a.state_dir,
    })
    .map_err(invalid)?;
    let app = router(Arc::new(state));
    let runtime = tokio::runtime::Runtime::new().map_err(failed)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&a.addr)
            .await
            .map_err(|e| invalid(format!("{}: {e}", a.addr)))?;
        let local = listener.local_addr().map_err(failed)?;
        say(stdout, format!("listening on http://{local}"))?;
        stdout.flush().map_err(failed)?;
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(failed)
    })
}

