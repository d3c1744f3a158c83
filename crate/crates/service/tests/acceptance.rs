//! Acceptance suite. One line per criterion: PASS, FAIL or SKIP, with measured values.
//!
//! Run with `cargo test -p quipline-service --test acceptance`. Exits non-zero when any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitCode, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use quipline_core::analytics::{
    curve_records, export_dataset, krippendorff_alpha, parse_dataset, quality_report_from_rows, quantile_bins,
    trend_slope, trend_spearman, DatasetRow, Delimiter,
};
use quipline_core::event::read_log;
use quipline_core::scoring::{
    balance_points_exact, board_order, editing_points_exact, leaderboards, rating_points_exact, ScoringConfig,
};
use quipline_core::{Engine, EventPayload, GameEvent, RATINGS_TO_COMPLETE};
use quipline_sim::{ablate, run, Knob, ProfileMix, SimConfig, Strategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Environment variable pointing at a local copy of the released dataset (a CSV/TSV file
/// or a directory of them).
const RELEASED_DATASET_ENV: &str = "QUIPLINE_RELEASED_DATASET";

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Verdict::{Fail, Pass, Skip};

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

struct Runner {
    failed: usize,
}

impl Runner {
    fn check(&mut self, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let elapsed = start.elapsed();
        let mut v = match result {
            Ok(v) => v,
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Fail(format!("panicked: {msg}"))
            }
        };
        if let (Pass(detail), Some(limit)) = (&v, budget) {
            if elapsed > limit {
                v = Fail(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        let timing = match budget {
            Some(limit) => format!("{elapsed:.2?} of {limit:?}"),
            None => format!("{elapsed:.2?}"),
        };
        match v {
            Pass(d) => println!("PASS  {name}  [{timing}]  {d}"),
            Fail(d) => {
                self.failed += 1;
                println!("FAIL  {name}  [{timing}]  {d}");
            }
            Skip(d) => println!("SKIP  {name}  {d}"),
        }
    }
}

fn main() -> ExitCode {
    let mut r = Runner { failed: 0 };
    r.check("cost_per_datum", Some(Duration::from_secs(1)), cost_per_datum);
    r.check("alpha_oracle_equivalence", Some(Duration::from_secs(5)), alpha_oracle);
    r.check("released_dataset_table", None, released_dataset);
    r.check("lifecycle_properties_1e5_events", Some(Duration::from_secs(30)), lifecycle_suite);
    r.check("scoring_shape", None, scoring_shape);
    r.check("improvement_trends", Some(Duration::from_secs(60)), improvement_trends);
    r.check("incentive_claims", None, incentive_claims);
    r.check("crash_recovery", None, crash_recovery);
    if r.failed > 0 {
        println!("{} criterion(s) failed", r.failed);
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

// Cost per datum

fn cost_per_datum() -> Verdict {
    const SIZE: usize = 8_248;
    let rows: Vec<DatasetRow> = (0..SIZE)
        .map(|i| {
            let grades: Vec<u8> = (0..5).map(|j| ((i * 7 + j * 3) % 4) as u8).collect();
            let mut sorted = grades.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            DatasetRow {
                id: i as u64,
                original: "Senate <delays/> vote".into(),
                edit: format!("w{}", i % 500),
                grades: sorted.iter().map(|g| char::from(b'0' + g)).collect(),
                mean_grade: f64::from(grades.iter().map(|&g| u32::from(g)).sum::<u32>()) / 5.0,
            }
        })
        .collect();
    let report = quality_report_from_rows(&rows, 100_000.0).unwrap();
    let shown = report.cost_per_datum_display();
    verdict(
        report.size == SIZE && shown == "12.1¢",
        format!("size {} budget 100000¢ -> {shown} ({:.4}¢)", report.size, report.cost_per_datum_cents),
    )
}

// Krippendorff alpha against a pairwise oracle

/// Interval alpha from ordered value pairs: within-unit disagreement over all-pairs
/// disagreement, each pair weighted as in the standard definition.
fn alpha_pairwise(units: &[Vec<u8>]) -> f64 {
    let pairable: Vec<&Vec<u8>> = units.iter().filter(|u| u.len() >= 2).collect();
    let all: Vec<f64> = pairable.iter().flat_map(|u| u.iter().map(|&v| f64::from(v))).collect();
    let n = all.len() as f64;
    let mut within = 0.0;
    for u in &pairable {
        let m = u.len() as f64;
        for (i, a) in u.iter().enumerate() {
            for (j, b) in u.iter().enumerate() {
                if i != j {
                    within += (f64::from(*a) - f64::from(*b)).powi(2) / (m - 1.0);
                }
            }
        }
    }
    let mut between = 0.0;
    for (i, a) in all.iter().enumerate() {
        for (j, b) in all.iter().enumerate() {
            if i != j {
                between += (a - b).powi(2);
            }
        }
    }
    let d_o = within / n;
    let d_e = between / (n * (n - 1.0));
    if d_e == 0.0 {
        1.0
    } else {
        1.0 - d_o / d_e
    }
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    let units = rng.random_range(1..=10);
    let raters = rng.random_range(1..=5);
    (0..units)
        .map(|_| {
            let mut unit = Vec::new();
            for _ in 0..raters {
                if rng.random_bool(0.75) {
                    unit.push(rng.random_range(0..4u8));
                }
            }
            unit
        })
        .collect()
}

fn alpha_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    while compared < 200 {
        let m = random_matrix(&mut rng);
        if m.iter().filter(|u| u.len() >= 2).count() < 2 {
            continue;
        }
        let got = krippendorff_alpha(&m).unwrap();
        worst = worst.max((got - alpha_pairwise(&m)).abs());
        compared += 1;
    }
    let mut perfect_ok = 0;
    for _ in 0..50 {
        let units: Vec<Vec<u8>> = (0..rng.random_range(2..=10))
            .map(|_| {
                let grade = rng.random_range(0..4u8);
                vec![grade; rng.random_range(2..=5)]
            })
            .collect();
        if krippendorff_alpha(&units).unwrap() == 1.0 {
            perfect_ok += 1;
        }
    }
    verdict(
        worst <= 1e-9 && perfect_ok == 50,
        format!("200 matrices, max |diff| {worst:.2e}; perfect agreement exactly 1 in {perfect_ok}/50"),
    )
}

// Released data

fn dataset_files(path: &Path) -> Vec<PathBuf> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map(|d| d.filter_map(|e| e.ok().map(|e| e.path())).collect())
            .unwrap_or_default();
        files.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "tsv")));
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    }
}

fn released_dataset() -> Verdict {
    let Some(path) = std::env::var_os(RELEASED_DATASET_ENV) else {
        return Skip(format!("{RELEASED_DATASET_ENV} not set"));
    };
    let path = PathBuf::from(path);
    if !path.exists() {
        return Skip(format!("{} not found", path.display()));
    }
    let mut rows = Vec::new();
    for file in dataset_files(&path) {
        let delimiter = if file.extension().and_then(|e| e.to_str()) == Some("tsv") {
            Delimiter::Tab
        } else {
            Delimiter::Comma
        };
        match std::fs::File::open(&file).map_err(|e| e.to_string()).and_then(|f| {
            parse_dataset(f, delimiter).map_err(|e| e.to_string())
        }) {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => return Fail(format!("{}: {e}", file.display())),
        }
    }
    let report = match quality_report_from_rows(&rows, 100_000.0) {
        Ok(r) => r,
        Err(e) => return Fail(e.to_string()),
    };
    let alpha = report.alpha.unwrap_or(f64::NAN);
    verdict(
        report.size == 8_248 && (report.mean_funniness - 1.26).abs() <= 0.01 && (alpha - 0.25).abs() <= 0.03,
        format!(
            "size {} mean {:.3} alpha {:.3} (want 8248, 1.26±0.01, 0.25±0.03)",
            report.size, report.mean_funniness, alpha
        ),
    )
}

// Lifecycle properties over a long simulated log

fn lifecycle_suite() -> Verdict {
    let mut config = SimConfig {
        seed: 31,
        n_agents: 300,
        n_headlines: 30_000,
        n_steps: 95_000,
        ..SimConfig::default()
    };
    // Caps and completion are enforced at write time; an hourly rating order keeps
    // the run inside its budget without changing what is checked.
    config.engine.sampler.refresh_interval_secs = 3_600;
    let out = run(&config).unwrap();
    let rules = &config.engine.rules;
    let pair_cap = config.engine.sampler.per_pair_cap.unwrap_or(u32::MAX);
    let mut violations: Vec<String> = Vec::new();

    // Walk the log itself, independent of the engine's bookkeeping.
    let mut editor_of = BTreeMap::new();
    let mut grades_per_edit: BTreeMap<u64, usize> = BTreeMap::new();
    let mut edits_by: BTreeMap<u64, u32> = BTreeMap::new();
    let mut ratings_by: BTreeMap<u64, u32> = BTreeMap::new();
    let mut pairs: BTreeMap<(u64, u64), u32> = BTreeMap::new();
    let mut raters_of: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for e in &out.events {
        match &e.payload {
            EventPayload::EditSubmitted { edit, player, .. } => {
                editor_of.insert(edit.0, player.0);
                *edits_by.entry(player.0).or_default() += 1;
            }
            EventPayload::RatingSubmitted { edit, rater, .. } => {
                let editor = editor_of[&edit.0];
                if editor == rater.0 {
                    violations.push(format!("self rating on {edit}"));
                }
                if !raters_of.entry(edit.0).or_default().insert(rater.0) {
                    violations.push(format!("duplicate rater on {edit}"));
                }
                let n = grades_per_edit.entry(edit.0).or_default();
                *n += 1;
                if *n > RATINGS_TO_COMPLETE {
                    violations.push(format!("{edit} has {n} grades"));
                }
                *ratings_by.entry(rater.0).or_default() += 1;
                *pairs.entry((rater.0, editor)).or_default() += 1;
            }
            _ => {}
        }
    }
    violations.extend(edits_by.values().filter(|&&n| n > rules.edit_cap).map(|n| format!("{n} edits")));
    violations.extend(ratings_by.values().filter(|&&n| n > rules.rating_cap).map(|n| format!("{n} ratings")));
    violations.extend(pairs.values().filter(|&&n| n > pair_cap).map(|n| format!("pair count {n}")));
    for e in out.state.edits.values() {
        let complete = e.completed_at.is_some();
        if complete != (grades_per_edit.get(&e.id.0).copied().unwrap_or(0) == RATINGS_TO_COMPLETE) {
            violations.push(format!("{} completion does not match its 5 grades", e.id));
        }
    }

    let replayed = Engine::replay(config.engine.clone(), out.events.clone()).unwrap();
    let replay_same = replayed.state() == &out.state;
    if !replay_same {
        violations.push("replay state differs".into());
    }

    let events = out.events.len();
    let max_pair = pairs.values().max().copied().unwrap_or(0);
    verdict(
        events >= 100_000 && violations.is_empty(),
        format!(
            "{events} events, {} completed, max edits {} ratings {} pair {max_pair}; violations {}{}",
            out.metrics.completed,
            edits_by.values().max().unwrap_or(&0),
            ratings_by.values().max().unwrap_or(&0),
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

// Scoring shape

fn scoring_shape() -> Verdict {
    let cfg = ScoringConfig::default();
    let mut problems = Vec::new();

    // Mean grades of five-grade headlines: 0, 0.2, ..., 3.0.
    let ep: Vec<f64> = (0..=15).map(|k| editing_points_exact(&cfg, f64::from(k) / 5.0)).collect();
    if !ep.windows(2).all(|w| w[1] > w[0]) {
        problems.push("EP not increasing".to_string());
    }
    if !ep.windows(3).all(|w| w[2] - w[1] > w[1] - w[0]) {
        problems.push("EP not convex".to_string());
    }

    // Deltas against a four-grade mean move in quarters.
    for q in 0..=12 {
        let delta = f64::from(q) / 4.0;
        let rp = rating_points_exact(&cfg, delta);
        if delta >= 1.2 && rp >= 0.0 {
            problems.push(format!("RP({delta}) = {rp}"));
        }
    }
    for tenth in 12..=30 {
        let delta = f64::from(tenth) / 10.0;
        if rating_points_exact(&cfg, delta) >= 0.0 {
            problems.push(format!("RP({delta}) not negative"));
        }
    }

    let mut band_cells = 0;
    for edits in 1..=40u32 {
        for ratings in 0..=500u32 {
            let in_band = (3 * edits..=10 * edits).contains(&ratings);
            let bp = balance_points_exact(&cfg, edits, ratings);
            if in_band != (bp == cfg.balance_max) || bp > cfg.balance_max {
                problems.push(format!("BP({edits},{ratings}) = {bp}"));
            }
            band_cells += usize::from(in_band);
        }
    }

    let out = run(&SimConfig {
        n_agents: 40,
        n_headlines: 2_000,
        n_steps: 12_000,
        ..SimConfig::default()
    })
    .unwrap();
    let now = Utc::now();
    let base = board_order(&leaderboards(&cfg, &out.state, now).points_board);
    let factors = [1.0 / 7.0, 0.5, 2.0, 3.0, 10.0, 123.0 / 7.0, 1000.0];
    for f in factors {
        if board_order(&leaderboards(&cfg.scaled(f), &out.state, now).points_board) != base {
            problems.push(format!("board order changed under scaling by {f}"));
        }
    }

    verdict(
        problems.is_empty(),
        format!(
            "EP on 16 grid points, RP on 32 deltas, BP on {} cells ({band_cells} in band), board of {} players under {} scalings; {}",
            40 * 501,
            base.len(),
            factors.len(),
            problems.first().cloned().unwrap_or_else(|| "no violations".into())
        ),
    )
}

// Improvement curves

fn improvement_trends() -> Verdict {
    let config = SimConfig {
        n_agents: 50,
        n_headlines: 3_000,
        n_steps: 60_000,
        target_completed: Some(3_000),
        profile_mix: ProfileMix::only(Strategy::Honest),
        ..SimConfig::default()
    };
    let out = run(&config).unwrap();
    let records = curve_records(&out.state);
    let quintiles = quantile_bins(&records.dataset_funniness, 5);
    let (first, last) = (quintiles[0].mean, quintiles[4].mean);
    let slope = trend_slope(&quantile_bins(&records.edit_quality, 10)).unwrap_or(f64::NAN);
    let rho = trend_spearman(&quantile_bins(&records.rating_deviation, 10)).unwrap_or(f64::NAN);
    verdict(
        out.metrics.completed >= 3_000 && last > first && slope > 0.0 && rho < -0.8,
        format!(
            "{} completed; (a) quintile mean {first:.3} -> {last:.3}; (b) edit-quality slope {slope:+.4}/decile; (c) deviation Spearman {rho:.3}",
            out.metrics.completed
        ),
    )
}

// Incentives

fn incentive_claims() -> Verdict {
    let mix = |s: &str| s.parse::<ProfileMix>().unwrap();
    let config = SimConfig {
        n_agents: 50,
        n_headlines: 3_000,
        n_steps: 20_000,
        profile_mix: mix("honest=0.6,balanced=0.3,spammer=0.08,lowballer=0.02"),
        ..SimConfig::default()
    };
    let with_low = run(&config).unwrap();
    let low = with_low.by_strategy(Strategy::Lowballer).next().unwrap().clone();
    let paired = run(&SimConfig {
        profile_mix: mix("honest=0.62,balanced=0.3,spammer=0.08"),
        ..config
    })
    .unwrap();
    let same_slot = paired.agent(low.player).unwrap().rating_points;
    let honest_share = with_low.by_strategy(Strategy::Honest).count() as f64 / with_low.agents.len() as f64;

    let balance = SimConfig {
        n_headlines: 3_000,
        n_steps: 20_000,
        profile_mix: ProfileMix::only(Strategy::Honest),
        ..SimConfig::default()
    };
    let (cmp, on, off) = ablate(&balance, Knob::BalancePoints).unwrap();
    let median = |o: &quipline_sim::SimOutcome| {
        let mut r: Vec<f64> = o.agents.iter().filter_map(|a| a.ratio()).collect();
        r.sort_by(f64::total_cmp);
        r[r.len() / 2]
    };
    let (share_on, share_off) = (cmp.with_mechanism.unwrap(), cmp.without_mechanism.unwrap());
    let (med_on, med_off) = (median(&on), median(&off));

    verdict(
        honest_share >= 0.6
            && low.rating_points < 0.0
            && same_slot > 0.0
            && share_on > share_off
            && (3.0..=10.0).contains(&med_on),
        format!(
            "lowballer RP {:.1} among {:.0}% honest (same slot honest: {same_slot:+.1}); balance points on/off: in-band share {share_on:.2}/{share_off:.2}, median ratio {med_on:.2}/{med_off:.2}",
            low.rating_points,
            honest_share * 100.0
        ),
    )
}

// Crash recovery

struct Proc {
    child: Child,
    base: String,
}

impl Proc {
    fn spawn(config: &Path) -> Proc {
        let mut child = Command::new(env!("CARGO_BIN_EXE_quipline-server"))
            .arg("--config")
            .arg(config)
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn server");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line.trim().strip_prefix("listening on ").expect("server announced its address");
        Proc {
            child,
            base: format!("http://{addr}"),
        }
    }

    fn kill9(mut self) {
        // Child::kill sends SIGKILL on Unix.
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

#[derive(Default)]
struct Acked {
    events: AtomicU64,
    edits: parking_lot::Mutex<Vec<(u64, u64)>>,
    ratings: parking_lot::Mutex<Vec<(u64, u64, u8)>>,
}

async fn post(http: &reqwest::Client, url: String, token: Option<&str>, body: Value) -> Option<(u16, Value)> {
    let mut req = http.post(url).header("X-Admin-Token", "crash-admin").json(&body);
    if let Some(t) = token {
        req = req.bearer_auth(t);
    }
    let resp = req.send().await.ok()?;
    let status = resp.status().as_u16();
    Some((status, resp.json().await.ok()?))
}

async fn get(http: &reqwest::Client, url: String, token: &str) -> Option<Value> {
    http.get(url).bearer_auth(token).send().await.ok()?.json().await.ok()
}

async fn text(http: &reqwest::Client, url: String) -> String {
    http.get(url).send().await.unwrap().text().await.unwrap()
}

/// One player's loop: mostly rating, some editing, until the server goes away.
async fn client(base: String, token: String, player: u64, seed: u64, acked: Arc<Acked>) {
    let http = reqwest::Client::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if rng.random_bool(0.2) {
            let Some(list) = get(&http, format!("{base}/headlines/editable?limit=20"), &token).await else {
                return;
            };
            let Some(h) = list.as_array().and_then(|l| (!l.is_empty()).then(|| l[rng.random_range(0..l.len())].clone()))
            else {
                continue;
            };
            let idx = h["replaceable"].as_array().unwrap();
            let index = &idx[rng.random_range(0..idx.len())];
            let word = quipline_sim::headlines::SUBSTITUTES[rng.random_range(0..48)];
            let body = json!({"source": h["source"], "index": index, "word": word});
            match post(&http, format!("{base}/edits"), Some(&token), body).await {
                None => return,
                Some((201, v)) => {
                    acked.edits.lock().push((v["edit"].as_u64().unwrap(), player));
                    acked.events.fetch_add(1, Ordering::SeqCst);
                }
                Some(_) => {}
            }
        } else {
            let Some(queue) = get(&http, format!("{base}/rate-queue?k=5"), &token).await else {
                return;
            };
            let items = queue.as_array().cloned().unwrap_or_default();
            if items.is_empty() {
                tokio::time::sleep(Duration::from_millis(20)).await;
                continue;
            }
            for item in items {
                let edit = item["edit"].as_u64().unwrap();
                let grade = ((edit * 7 + player) % 4) as u8;
                match post(&http, format!("{base}/ratings"), Some(&token), json!({"edit": edit, "grade": grade})).await {
                    None => return,
                    Some((200, _)) => {
                        acked.ratings.lock().push((edit, player, grade));
                        acked.events.fetch_add(1, Ordering::SeqCst);
                    }
                    Some(_) => {}
                }
            }
        }
    }
}

fn offline_views(log: &Path, engine: &quipline_core::EngineConfig) -> (Vec<GameEvent>, Engine, String) {
    let events = read_log(std::fs::read(log).unwrap().as_slice()).unwrap();
    let replayed = Engine::replay(engine.clone(), events.clone()).unwrap();
    let mut csv = Vec::new();
    export_dataset(replayed.state(), &mut csv, Delimiter::Comma).unwrap();
    (events, replayed, String::from_utf8(csv).unwrap())
}

fn crash_recovery() -> Verdict {
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(crash_recovery_async())
}

async fn crash_recovery_async() -> Verdict {
    const TARGET: u64 = 10_000;
    const PLAYERS: u64 = 40;
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("events.ndjson");
    let config_path = dir.path().join("server.toml");
    std::fs::write(
        &config_path,
        format!(
            "port = 0\nlog_path = \"{}\"\nadmin_token = \"crash-admin\"\n\n[engine.moderation]\nmin_dwell_ms = 0\n\n[engine.sampler]\nrefresh_interval_secs = 1\n\n[engine.ingestion]\ndaily_cap = 1000000\n",
            log.display()
        ),
    )
    .unwrap();
    let mut engine_cfg = quipline_core::EngineConfig::default();
    engine_cfg.moderation.min_dwell_ms = 0;
    engine_cfg.sampler.refresh_interval_secs = 1;
    engine_cfg.ingestion.daily_cap = 1_000_000;
    let http = reqwest::Client::new();

    // Phase 1: load from concurrent clients, then SIGKILL mid-run.
    let server = Proc::spawn(&config_path);
    let base = server.base.clone();
    let acked = Arc::new(Acked::default());
    let t0 = Utc.with_ymd_and_hms(2020, 1, 6, 0, 0, 0).unwrap();
    for chunk in 0..6 {
        let items: Vec<_> = (chunk * 500..(chunk + 1) * 500)
            .map(|i| quipline_sim::headlines::synthetic_headline(i, t0 + chrono::Duration::seconds(i as i64)))
            .collect();
        let (_, report) = post(&http, format!("{base}/admin/ingest"), None, json!({"items": items})).await.unwrap();
        acked.events.fetch_add(report["admitted"].as_u64().unwrap(), Ordering::SeqCst);
    }
    let mut tasks = Vec::new();
    for p in 0..PLAYERS {
        let (_, reg) = post(&http, format!("{base}/players"), None, json!({"display_name": format!("p{p}")})).await.unwrap();
        acked.events.fetch_add(1, Ordering::SeqCst);
        let token = reg["token"].as_str().unwrap().to_string();
        let player = reg["player"].as_u64().unwrap();
        tasks.push(tokio::spawn(client(base.clone(), token, player, p, acked.clone())));
    }
    let started = Instant::now();
    while acked.events.load(Ordering::SeqCst) < TARGET {
        if started.elapsed() > Duration::from_secs(240) {
            server.kill9();
            return Fail(format!("only {} acked events after 240 s", acked.events.load(Ordering::SeqCst)));
        }
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    server.kill9();
    let acked_at_kill = acked.events.load(Ordering::SeqCst);
    for t in tasks {
        let _ = t.await;
    }

    // Everything acknowledged must be in the log.
    let (events, replayed, offline_csv) = offline_views(&log, &engine_cfg);
    let mut logged_edits = BTreeMap::new();
    let mut logged_ratings = BTreeSet::new();
    for e in &events {
        match &e.payload {
            EventPayload::EditSubmitted { edit, player, .. } => {
                logged_edits.insert(edit.0, player.0);
            }
            EventPayload::RatingSubmitted { edit, rater, grade, .. } => {
                logged_ratings.insert((edit.0, rater.0, grade.value()));
            }
            _ => {}
        }
    }
    let lost_edits = acked.edits.lock().iter().filter(|(e, p)| logged_edits.get(e) != Some(p)).count();
    let lost_ratings = acked.ratings.lock().iter().filter(|r| !logged_ratings.contains(r)).count();

    // Restart and compare with an offline replay of the same file.
    let server = Proc::spawn(&config_path);
    let base = server.base.clone();
    let health: Value = http.get(format!("{base}/health")).send().await.unwrap().json().await.unwrap();
    let boards_live: Value = http.get(format!("{base}/leaderboards")).send().await.unwrap().json().await.unwrap();
    let boards_offline = serde_json::to_value(leaderboards(
        &replayed.config().scoring,
        replayed.state(),
        Utc::now(),
    ))
    .unwrap();
    let export_live = text(&http, format!("{base}/export")).await;
    let replay_match = health["events"].as_u64() == Some(events.len() as u64)
        && boards_live == boards_offline
        && export_live == offline_csv;

    // Phase 2: a quiet server killed and restarted serves identical bytes. A keyed
    // retry after the restart does not duplicate.
    let (_, session) = post(&http, format!("{base}/session"), None, json!({"player": 1})).await.unwrap();
    let token = session["token"].as_str().unwrap().to_string();
    let list = get(&http, format!("{base}/headlines/editable?limit=1"), &token).await.unwrap();
    let keyed = http
        .post(format!("{base}/edits"))
        .bearer_auth(&token)
        .header("Idempotency-Key", "retry-after-crash")
        .json(&json!({"source": list[0]["source"], "index": list[0]["replaceable"][0], "word": "kazoo"}))
        .send()
        .await
        .unwrap()
        .json::<Value>()
        .await
        .unwrap();
    let boards_before = text(&http, format!("{base}/leaderboards")).await;
    let export_before = text(&http, format!("{base}/export")).await;
    let count_before = events.len() + 1;
    server.kill9();

    let server = Proc::spawn(&config_path);
    let base = server.base.clone();
    let boards_after = text(&http, format!("{base}/leaderboards")).await;
    let export_after = text(&http, format!("{base}/export")).await;
    let (_, session) = post(&http, format!("{base}/session"), None, json!({"player": 1})).await.unwrap();
    let token = session["token"].as_str().unwrap().to_string();
    let retried = http
        .post(format!("{base}/edits"))
        .bearer_auth(&token)
        .header("Idempotency-Key", "retry-after-crash")
        .json(&json!({"source": list[0]["source"], "index": list[0]["replaceable"][0], "word": "kazoo"}))
        .send()
        .await
        .unwrap()
        .json::<Value>()
        .await
        .unwrap();
    let health: Value = http.get(format!("{base}/health")).send().await.unwrap().json().await.unwrap();
    let retry_deduped = retried["edit"] == keyed["edit"] && health["events"].as_u64() == Some(count_before as u64);
    server.kill9();

    // Phase 3: a torn final record is dropped on start.
    let intact = std::fs::read(&log).unwrap();
    let mut torn = intact.clone();
    torn.extend_from_slice(br#"{"seq":999999,"at":"2020-01-"#);
    std::fs::write(&log, &torn).unwrap();
    let server = Proc::spawn(&config_path);
    let base = server.base.clone();
    let boards_repaired = text(&http, format!("{base}/leaderboards")).await;
    let export_repaired = text(&http, format!("{base}/export")).await;
    server.kill9();
    let repaired = std::fs::read(&log).unwrap() == intact
        && boards_repaired == boards_after
        && export_repaired == export_after;

    let identical = boards_before == boards_after && export_before == export_after;
    let completed = export_after.lines().count() - 1;
    verdict(
        acked_at_kill >= TARGET && lost_edits == 0 && lost_ratings == 0 && replay_match && identical && retry_deduped && repaired,
        format!(
            "killed after {acked_at_kill} acked events ({} logged, {completed} completed); lost acked edits {lost_edits} ratings {lost_ratings}; restart matches offline replay {replay_match}; kill/restart identical boards+export {identical}; keyed retry deduplicated {retry_deduped}; torn tail repaired {repaired}",
            events.len()
        ),
    )
}
