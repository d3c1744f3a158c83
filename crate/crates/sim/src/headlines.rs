//! Synthetic source headlines and substitute words.

use quipline_core::ingestion::RawItem;
use quipline_core::{Category, Timestamp};

const SUBJECTS: [&str; 16] = [
    "Senate", "Judge", "Police", "Lawmakers", "Officials", "Scientists", "Voters", "Doctors",
    "Protesters", "Democrats", "Republicans", "Workers", "Fans", "Leaders", "Troops", "Banks",
];
const VERBS: [&str; 12] = [
    "blames", "backs", "probes", "rejects", "praises", "slams", "delays", "debates", "targets",
    "questions", "warns", "sues",
];
const OBJECTS: [&str; 16] = [
    "budget", "deal", "plan", "tax", "vaccine", "trade", "border", "election", "movie", "bank",
    "phone", "oil", "virus", "summit", "prison", "school",
];
const TOPICS: [&str; 16] = [
    "talks", "prices", "policy", "data", "jobs", "sanctions", "protests", "charges", "records",
    "games", "flights", "markets", "debt", "reform", "emails", "ruling",
];
const PLACES: [&str; 16] = [
    "Ohio", "Texas", "London", "Paris", "Brazil", "Tokyo", "Nevada", "Chicago", "Berlin", "Canada",
    "Kenya", "Mumbai", "Sydney", "Dublin", "Oslo", "Lima",
];

pub const SUBSTITUTES: [&str; 48] = [
    "banana", "llama", "pickle", "walrus", "toaster", "kazoo", "penguin", "noodle", "hamster",
    "taco", "unicorn", "potato", "goat", "squirrel", "pajamas", "donut", "clown", "mustache",
    "sandwich", "wig", "burrito", "toupee", "cat", "puppy", "yodel", "hiccup", "sneeze", "bubble",
    "spatula", "karaoke", "nap", "pudding", "lasagna", "hair", "socks", "broccoli", "cupcake",
    "trombone", "dance", "tickle", "poodle", "mime", "gnome", "muffin", "giraffe", "ferret",
    "meatball", "waffle",
];

const COMBINATIONS: usize =
    SUBJECTS.len() * VERBS.len() * OBJECTS.len() * TOPICS.len() * PLACES.len();

/// The `i`-th synthetic headline; distinct for every `i` below the combination count.
pub fn synthetic_headline(i: usize, published_at: Timestamp) -> RawItem {
    // 7919 is coprime with the combination count, so this walks every combination once.
    let mut k = (i.wrapping_mul(7919)) % COMBINATIONS;
    let mut pick = |len: usize| {
        let v = k % len;
        k /= len;
        v
    };
    let s = SUBJECTS[pick(SUBJECTS.len())];
    let v = VERBS[pick(VERBS.len())];
    let o = OBJECTS[pick(OBJECTS.len())];
    let t = TOPICS[pick(TOPICS.len())];
    let p = PLACES[pick(PLACES.len())];
    let category = Category::ALL[i % Category::ALL.len()];
    RawItem {
        text: format!("{s} {v} {o} over {t} in {p}"),
        category: Some(category.as_str().to_string()),
        source: "synthetic".into(),
        url: format!("https://sim.invalid/{i}"),
        published_at,
    }
}

pub fn max_headlines() -> usize {
    COMBINATIONS
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use quipline_core::ingestion::{normalize_text, tag_replaceable, tokenize, LexiconTagger};
    use std::collections::BTreeSet;

    #[test]
    fn headlines_are_distinct_and_taggable() {
        let t = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
        let tagger = LexiconTagger::default();
        let mut seen = BTreeSet::new();
        for i in 0..5_000 {
            let item = synthetic_headline(i, t);
            assert!(seen.insert(normalize_text(&item.text)));
            let tokens = tokenize(&item.text);
            assert_eq!(tokens.len(), 7);
            assert!(!tag_replaceable(&tokens, &tagger).unwrap().is_empty());
        }
    }
}
