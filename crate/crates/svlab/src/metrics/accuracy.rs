//! Exact-match rules for scoring generations against expected answers.

/// The matching rule a prompt style is scored under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchRule {
    /// The generation's first word must equal the answer exactly.
    FirstWord,
    /// The answer must appear somewhere in the generation as a whole word.
    Containment,
}

impl MatchRule {
    #[must_use]
    pub fn matches(self, generated: &str, expected: &str) -> bool {
        match self {
            MatchRule::FirstWord => first_word_match(generated, expected),
            MatchRule::Containment => containment_match(generated, expected),
        }
    }
}

/// Strips one word out of a generation token: trailing ASCII punctuation is
/// dropped, interior characters stay.
fn clean_token(token: &str) -> &str {
    token.trim_end_matches(|c: char| c.is_ascii_punctuation())
}

/// True when the first whitespace-delimited word of `generated`, after
/// dropping trailing ASCII punctuation, equals `expected` exactly
/// (case-sensitive). An empty generation never matches.
#[must_use]
pub fn first_word_match(generated: &str, expected: &str) -> bool {
    match generated.split_whitespace().next() {
        Some(first) => clean_token(first) == expected,
        None => false,
    }
}

/// True when `expected` occurs in `generated` as a whole word: some
/// whitespace token, after dropping trailing ASCII punctuation, equals it
/// exactly. Substring hits inside longer words do not count.
#[must_use]
pub fn containment_match(generated: &str, expected: &str) -> bool {
    generated
        .split_whitespace()
        .any(|token| clean_token(token) == expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_word_rules() {
        let cases = [
            ("Paris", "Paris", true),
            ("  Paris and more", "Paris", true),
            ("Paris.", "Paris", true),
            ("paris", "Paris", false),
            ("grand Paris", "Paris", false),
            ("", "Paris", false),
            ("   ", "Paris", false),
        ];
        for (generated, expected, want) in cases {
            assert_eq!(
                first_word_match(generated, expected),
                want,
                "{generated:?} vs {expected:?}"
            );
        }
    }

    #[test]
    fn containment_needs_word_boundaries() {
        let cases = [
            ("the capital is Paris today", "Paris", true),
            ("the capital is Paris.", "Paris", true),
            ("a Parisian cafe", "Paris", false),
            ("paris", "Paris", false),
            ("", "Paris", false),
        ];
        for (generated, expected, want) in cases {
            assert_eq!(
                containment_match(generated, expected),
                want,
                "{generated:?} vs {expected:?}"
            );
        }
    }
}
