//! N-gram diversity statistics over whitespace tokens.

use std::collections::HashMap;

/// Weights of the bigram and trigram entropies inside the generation
/// entropy; recorded in run provenance when changed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeWeights {
    pub h2: f64,
    pub h3: f64,
}

impl Default for GeWeights {
    fn default() -> Self {
        GeWeights { h2: 0.5, h3: 0.5 }
    }
}

fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Base-2 entropy of the n-gram distribution over whitespace tokens. Texts
/// with fewer than `n` tokens have no n-grams and score zero.
#[must_use]
pub fn ngram_entropy(text: &str, n: usize) -> f64 {
    let toks = tokens(text);
    if n == 0 || toks.len() < n {
        return 0.0;
    }
    let mut counts: HashMap<&[&str], usize> = HashMap::new();
    for gram in toks.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    let total = (toks.len() - n + 1) as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Generation entropy: the weighted sum of bigram and trigram entropies.
/// Low values mean the text loops; the fluency gate thresholds on this.
#[must_use]
pub fn generation_entropy(text: &str, weights: &GeWeights) -> f64 {
    weights.h2 * ngram_entropy(text, 2) + weights.h3 * ngram_entropy(text, 3)
}

/// Percentage of distinct n-grams among all n-grams (0 when the text is too
/// short to form any).
#[must_use]
pub fn dist_n(text: &str, n: usize) -> f64 {
    let toks = tokens(text);
    if n == 0 || toks.len() < n {
        return 0.0;
    }
    let total = toks.len() - n + 1;
    let distinct = toks
        .windows(n)
        .collect::<std::collections::HashSet<_>>()
        .len();
    100.0 * distinct as f64 / total as f64
}
