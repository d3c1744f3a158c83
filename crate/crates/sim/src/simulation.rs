use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use quipline_core::analytics::{improvement_curves, quality_report, ImprovementCurves, QualityReport};
use quipline_core::event::GameEvent;
use quipline_core::sampler::Sampler;
use quipline_core::scoring::{balance_advice, leaderboards, score_state, Leaderboards};
use quipline_core::{EditId, Engine, GameError, GameState, HeadlineRef, PlayerId, Standing, Timestamp};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentProfile};
use crate::config::{SimConfig, Strategy};
use crate::headlines::{max_headlines, synthetic_headline, SUBSTITUTES};
use crate::SimError;

/// Grades submitted sooner than this after serving count as rushed, whatever the policy.
pub const RUSHED_MS: i64 = 2_000;
/// Budget used for the cost-per-datum line of the report.
pub const BUDGET_CENTS: f64 = 100_000.0;
/// Bin width for the curve series written with the report.
pub const CURVE_BIN: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub steps: usize,
    pub completed: usize,
    pub edits: usize,
    pub ratings: usize,
    /// Rejected commands by error code.
    pub rejections: BTreeMap<String, usize>,
    pub max_pair_count: u32,
    /// Mean simulated seconds between a headline's fourth and fifth grade.
    pub mean_fill_latency_secs: Option<f64>,
    pub rushed_attempts: usize,
    pub rushed_accepted: usize,
    /// Share of agents with at least five edits whose rating/edit ratio lies in the balance band.
    pub ratio_in_band: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub player: PlayerId,
    pub strategy: Strategy,
    pub standing: Standing,
    pub edits: u32,
    pub ratings: u32,
    pub editing_points: f64,
    pub rating_points: f64,
    pub balance_points: f64,
    pub total: f64,
    pub mean_received_rating: Option<f64>,
    pub initial_skill: f64,
}

impl AgentSummary {
    pub fn ratio(&self) -> Option<f64> {
        (self.edits > 0).then(|| f64::from(self.ratings) / f64::from(self.edits))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutcome {
    pub events: Vec<GameEvent>,
    pub report: Option<QualityReport>,
    pub curves: ImprovementCurves,
    pub leaderboards: Leaderboards,
    pub metrics: SimMetrics,
    pub agents: Vec<AgentSummary>,
    #[serde(skip)]
    pub state: GameState,
}

impl SimOutcome {
    pub fn agent(&self, player: PlayerId) -> Option<&AgentSummary> {
        self.agents.iter().find(|a| a.player == player)
    }

    pub fn by_strategy(&self, strategy: Strategy) -> impl Iterator<Item = &AgentSummary> {
        self.agents.iter().filter(move |a| a.strategy == strategy)
    }
}

pub fn start_time() -> Timestamp {
    Utc.with_ymd_and_hms(2020, 1, 6, 0, 0, 0).unwrap()
}

struct World {
    config: SimConfig,
    engine: Engine,
    sampler: Sampler,
    rng: ChaCha8Rng,
    agents: Vec<Agent>,
    quality: BTreeMap<EditId, f64>,
    fourth_at: BTreeMap<EditId, Timestamp>,
    fill_latencies: Vec<f64>,
    metrics: SimMetrics,
    ingested: usize,
    day: Option<NaiveDate>,
}

/// Runs one deterministic simulation.
pub fn run(config: &SimConfig) -> Result<SimOutcome, SimError> {
    config.validate()?;
    if config.n_headlines > max_headlines() {
        return Err(SimError::InvalidConfig(format!(
            "at most {} synthetic headlines are available",
            max_headlines()
        )));
    }
    let mut world = World::new(config.clone());
    world.run();
    Ok(world.finish())
}

impl World {
    fn new(config: SimConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut engine = Engine::new(config.engine.clone());
        let mut agents = Vec::with_capacity(config.n_agents);
        for (strategy, count) in config.profile_mix.allocate(config.n_agents) {
            for _ in 0..count {
                let name = format!("{}-{}", strategy, agents.len() + 1);
                let player = engine
                    .register_player(name, start_time())
                    .expect("registration has no preconditions");
                let profile = AgentProfile::sample(strategy, &config.learning, &mut rng);
                agents.push(Agent::new(player, profile));
            }
        }
        let sampler = Sampler::for_engine(&config.engine);
        Self {
            config,
            engine,
            sampler,
            rng,
            agents,
            quality: BTreeMap::new(),
            fourth_at: BTreeMap::new(),
            fill_latencies: Vec::new(),
            metrics: SimMetrics::default(),
            ingested: 0,
            day: None,
        }
    }

    fn run(&mut self) {
        let tick = Duration::seconds(self.config.tick_secs);
        for step in 0..self.config.n_steps {
            if self
                .config
                .target_completed
                .is_some_and(|t| self.engine.state().completed.len() >= t)
            {
                break;
            }
            let now = start_time() + tick * step as i32;
            self.feed(now);
            self.sampler.maybe_refresh(self.engine.state(), now);
            let a = self.rng.random_range(0..self.agents.len());
            self.act(a, now);
            self.metrics.steps = step + 1;
        }
    }

    /// Ingests one daily batch on the first tick of each simulated day.
    fn feed(&mut self, now: Timestamp) {
        let today = now.date_naive();
        if self.day == Some(today) || self.ingested >= self.config.n_headlines {
            return;
        }
        self.day = Some(today);
        let n = (self.config.n_headlines - self.ingested).min(self.config.engine.ingestion.daily_cap as usize);
        let items = (self.ingested..self.ingested + n)
            .map(|i| {
                let age = Duration::minutes(self.rng.random_range(0..720));
                synthetic_headline(i, now - age)
            })
            .collect();
        self.ingested += n;
        self.engine.ingest_batch(items, now);
    }

    fn reject(&mut self, e: &GameError) {
        *self.metrics.rejections.entry(e.code().to_string()).or_insert(0) += 1;
    }

    fn act(&mut self, a: usize, now: Timestamp) {
        let player = self.agents[a].player;
        let Ok(p) = self.engine.state().player(player) else {
            return;
        };
        if p.is_suspended() {
            return;
        }
        let (edits, ratings) = (p.edit_count, p.rating_count);
        let profile = &self.agents[a].profile;
        let scoring = &self.config.engine.scoring;
        let wants_edit = if profile.balance_aware && scoring.balance_enabled {
            let advice = balance_advice(scoring, edits, ratings);
            if advice.more_edits > 0 {
                true
            } else if advice.more_ratings > 0 {
                false
            } else {
                self.rng.random_bool(profile.edit_propensity)
            }
        } else {
            self.rng.random_bool(profile.edit_propensity)
        };
        if wants_edit {
            if !self.try_edit(a, now) {
                self.try_rate(a, now);
            }
        } else if !self.try_rate(a, now) {
            self.try_edit(a, now);
        }
    }

    fn try_edit(&mut self, a: usize, now: Timestamp) -> bool {
        let player = self.agents[a].player;
        if self.engine.state().players[&player].edit_count >= self.config.engine.rules.edit_cap {
            return false;
        }
        let choices: Vec<_> = self
            .engine
            .editable_headlines(Some(player), None, self.config.choice_width)
            .into_iter()
            .map(|s| (s.id, s.replaceable.iter().copied().collect::<Vec<_>>()))
            .collect();
        let Some((source, slots)) = choices.choose(&mut self.rng).cloned() else {
            return false;
        };
        let index = *slots.choose(&mut self.rng).expect("available sources have slots");
        let word = *SUBSTITUTES.choose(&mut self.rng).expect("non-empty");
        match self.engine.submit_edit(player, source, index, word, now) {
            Ok(edit) => {
                let q = self.agents[a].edit_quality(self.config.edit_noise, &mut self.rng);
                self.quality.insert(edit, q);
                self.agents[a].after_edit();
                self.metrics.edits += 1;
                true
            }
            Err(e) => {
                self.reject(&e);
                false
            }
        }
    }

    fn try_rate(&mut self, a: usize, now: Timestamp) -> bool {
        let player = self.agents[a].player;
        let served = match self
            .sampler
            .serve_for_rating(self.engine.state(), player, self.config.choice_width, None)
        {
            Ok(s) => s,
            Err(_) => return false,
        };
        let Some(&edit) = served.choose(&mut self.rng) else {
            return false;
        };
        let quality = self.quality.get(&edit).copied().unwrap_or(0.0);
        let agent = &self.agents[a];

        // Rare side actions keep skip and flag paths exercised.
        if self.rng.random_bool(0.005) {
            if let Err(e) = self.engine.skip_headline(player, HeadlineRef::Edit(edit), now) {
                self.reject(&e);
            }
            return true;
        }
        if agent.profile.strategy == Strategy::Honest && quality < 0.1 && self.rng.random_bool(0.05) {
            if let Err(e) = self.engine.flag_headline(player, edit, now) {
                self.reject(&e);
            }
            return true;
        }

        let grade = agent.grade(quality, &mut self.rng);
        let dwell = agent.dwell_ms(&mut self.rng);
        let rushed = dwell < RUSHED_MS;
        self.metrics.rushed_attempts += usize::from(rushed);
        let served_at = now - Duration::milliseconds(dwell);
        match self.engine.submit_rating(player, edit, grade, served_at, now) {
            Ok(outcome) => {
                self.agents[a].after_rating();
                self.metrics.ratings += 1;
                self.metrics.rushed_accepted += usize::from(rushed);
                let count = self.engine.state().edits[&edit].ratings.len();
                if count == 4 {
                    self.fourth_at.insert(edit, now);
                }
                if outcome.completed {
                    if let Some(t) = self.fourth_at.remove(&edit) {
                        self.fill_latencies.push((now - t).num_seconds() as f64);
                    }
                }
                true
            }
            Err(e) => {
                self.reject(&e);
                // A rushed grade still costs the agent its turn.
                matches!(e, GameError::TooFast)
            }
        }
    }

    fn finish(self) -> SimOutcome {
        let state = self.engine.state().clone();
        let now = start_time()
            + Duration::seconds(self.config.tick_secs) * self.metrics.steps.max(1) as i32;
        let scoring = &self.config.engine.scoring;

        let agents: Vec<AgentSummary> = self
            .agents
            .iter()
            .map(|agent| {
                let p = &state.players[&agent.player];
                let s = score_state(scoring, p, &state.stats[&agent.player]);
                AgentSummary {
                    player: agent.player,
                    strategy: agent.profile.strategy,
                    standing: p.standing,
                    edits: p.edit_count,
                    ratings: p.rating_count,
                    editing_points: s.editing_points,
                    rating_points: s.rating_points,
                    balance_points: s.balance_points,
                    total: s.total,
                    mean_received_rating: s.mean_received_rating,
                    initial_skill: agent.profile.editor_skill,
                }
            })
            .collect();

        let mut metrics = self.metrics;
        metrics.completed = state.completed.len();
        metrics.max_pair_count = state
            .pair_counts
            .values()
            .flat_map(|m| m.values().copied())
            .max()
            .unwrap_or(0);
        metrics.mean_fill_latency_secs = (!self.fill_latencies.is_empty())
            .then(|| self.fill_latencies.iter().sum::<f64>() / self.fill_latencies.len() as f64);
        let active: Vec<f64> = agents
            .iter()
            .filter(|a| a.edits >= 5)
            .filter_map(AgentSummary::ratio)
            .collect();
        metrics.ratio_in_band = (!active.is_empty()).then(|| {
            let inside = active
                .iter()
                .filter(|r| (scoring.balance_ratio_low..=scoring.balance_ratio_high).contains(*r))
                .count();
            inside as f64 / active.len() as f64
        });

        SimOutcome {
            events: self.engine.events().to_vec(),
            report: quality_report(&state, BUDGET_CENTS).ok(),
            curves: improvement_curves(&state, CURVE_BIN),
            leaderboards: leaderboards(scoring, &state, now),
            metrics,
            agents,
            state,
        }
    }
}
