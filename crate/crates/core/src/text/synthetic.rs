//! Seeded generator for desk-scale corpora with planted salient sentences.
//! Each document mixes filler sentences with a few sentences built from a
//! distinctive marker vocabulary; the highlights are verbatim copies of the
//! planted sentences, so the greedy label oracle recovers exactly them and a
//! model can learn the marker vocabulary.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Document, Split};

const FILLER_WORDS: &[&str] = &[
    "table", "garden", "window", "river", "market", "street", "coffee", "train", "paper",
    "morning", "evening", "bridge", "village", "mountain", "harbor", "letter", "bottle", "corner",
    "museum", "ticket", "island", "forest", "kitchen", "library", "station", "blanket", "mirror",
    "pocket", "lantern", "meadow", "orchard", "pebble", "saddle", "teapot", "wagon", "anchor",
    "basket", "candle", "drawer", "engine",
];

const MARKER_WORDS: &[&str] = &[
    "quasar", "obelisk", "zeppelin", "falcon", "glacier", "comet", "turbine", "sphinx", "nebula",
    "compass", "beacon", "citadel", "meteor", "prism", "vortex", "dynamo", "lighthouse", "sonar",
];

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub documents: usize,
    pub seed: u64,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub salient_per_doc: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            documents: 20,
            seed: 7,
            min_sentences: 6,
            max_sentences: 10,
            salient_per_doc: 3,
        }
    }
}

/// Planted positions for one generated document, in document order.
pub type PlantedPositions = Vec<usize>;

/// Generate a corpus and report where the salient sentences were planted.
/// Documents come without labels; run the label oracle to derive them.
pub fn generate(spec: &SyntheticSpec) -> (Corpus, Vec<PlantedPositions>) {
    assert!(spec.min_sentences >= spec.salient_per_doc + 1);
    assert!(spec.max_sentences >= spec.min_sentences);
    assert!(
        spec.salient_per_doc * 4 <= MARKER_WORDS.len(),
        "marker vocabulary cannot cover {} disjoint salient sentences",
        spec.salient_per_doc
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut documents = Vec::with_capacity(spec.documents);
    let mut planted_all = Vec::with_capacity(spec.documents);
    for index in 0..spec.documents {
        let n_sentences = rng.random_range(spec.min_sentences..=spec.max_sentences);
        let planted = distinct_indices(&mut rng, n_sentences, spec.salient_per_doc);

        // Disjoint marker sets per planted sentence keep their gains strict
        // under the greedy oracle.
        let mut marker_pool: Vec<&str> = MARKER_WORDS.to_vec();
        shuffle(&mut rng, &mut marker_pool);

        let mut sentences = Vec::with_capacity(n_sentences);
        let mut highlights = Vec::with_capacity(spec.salient_per_doc);
        let mut marker_cursor = 0;
        for position in 0..n_sentences {
            if planted.contains(&position) {
                let words = rng.random_range(3..=4);
                let text = marker_pool[marker_cursor..marker_cursor + words].join(" ");
                marker_cursor += words;
                highlights.push(text.clone());
                sentences.push(text);
            } else {
                let words = rng.random_range(4..=7);
                let text: Vec<&str> = (0..words)
                    .map(|_| FILLER_WORDS[rng.random_range(0..FILLER_WORDS.len())])
                    .collect();
                sentences.push(text.join(" "));
            }
        }
        documents.push(Document {
            id: format!("doc{index:04}"),
            sentences,
            highlights,
            labels: None,
        });
        planted_all.push(planted);
    }
    (Corpus::new(Split::Train, documents), planted_all)
}

fn distinct_indices(rng: &mut ChaCha8Rng, upper: usize, count: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..upper).collect();
    shuffle(rng, &mut all);
    let mut picked: Vec<usize> = all.into_iter().take(count).collect();
    picked.sort_unstable();
    picked
}

fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
