mod common;

use chrono::Duration;
use common::{at, game};
use proptest::prelude::*;
use quipline_core::analytics::krippendorff_alpha;
use quipline_core::feedback::{compare_to_consensus, Consensus};
use quipline_core::sampler::{eligible, Sampler};
use quipline_core::scoring::{
    balance_points_exact, board_order, editing_points_exact, leaderboards, rating_points_exact,
    ScoringConfig,
};
use quipline_core::{EditState, Engine, EngineConfig, Grade, HeadlineRef, PlayerId};

#[derive(Debug, Clone)]
enum Op {
    Edit { player: usize, source: usize, word: usize },
    Rate { player: usize, edit: usize, grade: i64, dwell_ms: i64 },
    Flag { player: usize, edit: usize },
    Skip { player: usize, edit: usize },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        2 => (0..8usize, 0..12usize, 0..6usize).prop_map(|(player, source, word)| Op::Edit { player, source, word }),
        8 => (0..8usize, 0..40usize, -1..5i64, 1500..4000i64)
            .prop_map(|(player, edit, grade, dwell_ms)| Op::Rate { player, edit, grade, dwell_ms }),
        1 => (0..8usize, 0..40usize).prop_map(|(player, edit)| Op::Flag { player, edit }),
        1 => (0..8usize, 0..40usize).prop_map(|(player, edit)| Op::Skip { player, edit }),
    ]
}

const WORDS: [&str; 6] = ["banana", "llama", "pickle", "walrus", "toaster", "kazoo"];

fn run(config: EngineConfig, ops: &[Op]) -> Engine {
    let (mut g, players, sources) = game(config, 8, 12);
    for (i, op) in ops.iter().enumerate() {
        let now = at(60 + 10 * i as i64);
        let edits: Vec<_> = g.state().edits.keys().copied().collect();
        let pick = |n: usize| edits.get(n % edits.len().max(1)).copied();
        let _ = match *op {
            Op::Edit { player, source, word } => {
                let sid = sources[source];
                let index = *g.state().sources[&sid].replaceable.iter().next().unwrap();
                g.submit_edit(players[player], sid, index, WORDS[word], now).map(|_| ())
            }
            Op::Rate { player, edit, grade, dwell_ms } => match pick(edit) {
                Some(e) => g
                    .submit_rating(players[player], e, grade, now - Duration::milliseconds(dwell_ms), now)
                    .map(|_| ()),
                None => Ok(()),
            },
            Op::Flag { player, edit } => match pick(edit) {
                Some(e) => g.flag_headline(players[player], e, now),
                None => Ok(()),
            },
            Op::Skip { player, edit } => match pick(edit) {
                Some(e) => g.skip_headline(players[player], HeadlineRef::Edit(e), now),
                None => Ok(()),
            },
        };
    }
    g
}

fn small_config() -> EngineConfig {
    let mut c = EngineConfig::default();
    c.rules.edit_cap = 6;
    c.rules.rating_cap = 12;
    c.sampler.per_pair_cap = Some(3);
    c
}

fn check_invariants(g: &Engine) {
    let c = g.config();
    let st = g.state();
    for e in st.edits.values() {
        assert!(e.ratings.len() <= 5);
        assert_eq!(e.ratings.len() == 5, e.state == EditState::FullyRated);
        assert!(e.ratings.iter().all(|r| r.rater_id != e.editor_id));
        let mut raters: Vec<_> = e.ratings.iter().map(|r| r.rater_id).collect();
        raters.sort();
        raters.dedup();
        assert_eq!(raters.len(), e.ratings.len());
        assert!(e.ratings.iter().all(|r| (r.submitted_at - r.served_at).num_milliseconds() >= c.moderation.min_dwell_ms));
    }
    for p in st.players.values() {
        assert!(p.edit_count <= c.rules.edit_cap);
        assert!(p.rating_count <= c.rules.rating_cap);
    }
    let cap = c.sampler.per_pair_cap.unwrap();
    for rater in st.players.keys() {
        for editor in st.players.keys() {
            assert!(st.pair_count(*rater, *editor) <= cap);
        }
    }
    for id in &st.pool {
        assert_eq!(st.edits[id].state, EditState::InPool);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_play_keeps_lifecycle_invariants(ops in prop::collection::vec(op(), 0..300)) {
        let g = run(small_config(), &ops);
        check_invariants(&g);
        let replayed = Engine::replay(g.config().clone(), g.events().to_vec()).unwrap();
        prop_assert_eq!(
            serde_json::to_string(replayed.state()).unwrap(),
            serde_json::to_string(g.state()).unwrap()
        );
    }

    #[test]
    fn sampler_never_serves_ineligible(ops in prop::collection::vec(op(), 0..200), rater in 0..8usize) {
        let g = run(small_config(), &ops);
        let sampler = Sampler::for_engine(g.config());
        let now = at(100_000);
        sampler.refresh(g.state(), now);
        let rater = PlayerId(rater as u64 + 1);
        if let Ok(served) = sampler.serve_for_rating(g.state(), rater, 50, None) {
            for id in served {
                let e = &g.state().edits[&id];
                prop_assert_eq!(e.state, EditState::InPool);
                prop_assert!(e.editor_id != rater);
                prop_assert!(!e.has_rater(rater));
                prop_assert!(!g.state().players[&rater].skipped.contains(&HeadlineRef::Edit(id)));
                prop_assert!(eligible(g.state(), &g.config().sampler, rater, id, None));
            }
        }
    }

    #[test]
    fn board_one_order_survives_constant_scaling(ops in prop::collection::vec(op(), 0..300), k in 1u32..1000) {
        let g = run(small_config(), &ops);
        let base = ScoringConfig::default();
        let scaled = base.scaled(f64::from(k) / 7.0);
        let now = at(1_000_000);
        prop_assert_eq!(
            board_order(&leaderboards(&base, g.state(), now).points_board),
            board_order(&leaderboards(&scaled, g.state(), now).points_board)
        );
    }

    #[test]
    fn consensus_is_exactly_one_of_three(grade in 0u8..4, others in prop::collection::vec(0u8..4, 1..5)) {
        let g = Grade::new(grade).unwrap();
        let others: Vec<Grade> = others.into_iter().map(|v| Grade::new(v).unwrap()).collect();
        let mean = others.iter().map(|o| f64::from(o.value())).sum::<f64>() / others.len() as f64;
        let d = f64::from(grade) - mean;
        let expected = if d.abs() <= 0.5 {
            Consensus::Close
        } else if d > 0.0 {
            Consensus::Higher
        } else {
            Consensus::Lower
        };
        prop_assert_eq!(compare_to_consensus(g, &others).unwrap(), expected);
    }

    #[test]
    fn alpha_invariant_under_shift_and_unit_order(
        units in prop::collection::vec(prop::collection::vec(0u8..4, 2..6), 2..10),
        shift in 1u8..20,
        rotate in 0usize..10,
    ) {
        let base = krippendorff_alpha(&units).unwrap();
        let shifted: Vec<Vec<u8>> = units.iter().map(|u| u.iter().map(|g| g + shift).collect()).collect();
        let mut rotated = units.clone();
        let n = rotated.len();
        rotated.rotate_left(rotate % n);
        rotated.reverse();
        prop_assert!((krippendorff_alpha(&shifted).unwrap() - base).abs() < 1e-9);
        prop_assert!((krippendorff_alpha(&rotated).unwrap() - base).abs() < 1e-9);
        prop_assert!(base <= 1.0 + 1e-12);
    }
}

#[test]
fn editing_points_increasing_and_convex_on_grid() {
    let cfg = ScoringConfig::default();
    let ep: Vec<f64> = (0..=15).map(|i| editing_points_exact(&cfg, f64::from(i) * 0.2)).collect();
    let steps: Vec<f64> = ep.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|s| *s > 0.0));
    assert!(steps.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn rating_points_negative_from_one_point_two() {
    let cfg = ScoringConfig::default();
    for i in 0..=30 {
        let delta = f64::from(i) / 10.0;
        let rp = rating_points_exact(&cfg, delta);
        if i >= 12 {
            assert!(rp < 0.0, "delta {delta}");
        }
        if i < 10 {
            assert!(rp > 0.0, "delta {delta}");
        }
    }
}

#[test]
fn balance_points_maximal_exactly_inside_band() {
    let cfg = ScoringConfig::default();
    for edits in 1..=40u32 {
        for ratings in 0..=500u32 {
            let bp = balance_points_exact(&cfg, edits, ratings);
            let inside = 3 * edits <= ratings && ratings <= 10 * edits;
            assert_eq!(bp == cfg.balance_max, inside, "{edits} edits, {ratings} ratings");
            assert!(bp <= cfg.balance_max);
        }
    }
}
