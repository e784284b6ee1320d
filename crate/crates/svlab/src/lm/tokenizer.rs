//! Word-level tokenizer with a closed vocabulary.
//!
//! Every token is either one of the four specials or a whole word. Encoding
//! splits on newlines (each `\n` is its own token) and whitespace; a word that
//! misses the vocabulary is retried with edge punctuation stripped before it
//! falls back to `<unk>`. Decoding joins words with single spaces and emits
//! newline tokens with no surrounding spaces, so `encode(decode(ids)) == ids`
//! for every in-range id sequence.

use std::collections::HashMap;

use crate::error::{Result, SvError};

// ---------------------------------------------------------------------------
// Special tokens
// ---------------------------------------------------------------------------

/// Id of the unknown-word token `<unk>`.
pub const UNK_ID: u32 = 0;
/// Id of the newline token.
pub const NEWLINE_ID: u32 = 1;
/// Id of the question marker `Q:`.
pub const Q_MARKER_ID: u32 = 2;
/// Id of the answer marker `A:`.
pub const A_MARKER_ID: u32 = 3;

const SPECIALS: [&str; 4] = ["<unk>", "\n", "Q:", "A:"];

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

/// Closed-vocabulary word tokenizer.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Tokenizer {
    /// Builds a tokenizer from a word list. Words are deduplicated and sorted
    /// so the same set always yields the same ids; the four specials occupy
    /// ids 0 through 3 in fixed order.
    ///
    /// # Errors
    /// Returns an input error if any word is empty or contains whitespace.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut plain: Vec<String> = Vec::new();
        for word in words {
            let word = word.into();
            if word.is_empty() {
                return Err(SvError::input("vocabulary words must be non-empty"));
            }
            if word.chars().any(char::is_whitespace) {
                return Err(SvError::Input(format!(
                    "vocabulary word {word:?} contains whitespace"
                )));
            }
            if SPECIALS.contains(&word.as_str()) {
                continue;
            }
            plain.push(word);
        }
        plain.sort_unstable();
        plain.dedup();

        let mut tokens: Vec<String> = SPECIALS.iter().map(|s| (*s).to_string()).collect();
        tokens.extend(plain);
        let ids = tokens
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Ok(Tokenizer { tokens, ids })
    }

    /// Rebuilds a tokenizer from an exact token list (specials included), as
    /// stored in a serialized model. The list must start with the four
    /// specials in their fixed order and contain no duplicates.
    ///
    /// # Errors
    /// Returns an input error if the special prefix or uniqueness is violated.
    pub fn from_token_list(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < SPECIALS.len() {
            return Err(SvError::input("token list shorter than the special set"));
        }
        for (i, special) in SPECIALS.iter().enumerate() {
            if tokens[i] != *special {
                return Err(SvError::Input(format!(
                    "token {i} must be {special:?}, got {:?}",
                    tokens[i]
                )));
            }
        }
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, word) in tokens.iter().enumerate() {
            if ids.insert(word.clone(), i as u32).is_some() {
                return Err(SvError::Input(format!("duplicate token {word:?}")));
            }
        }
        Ok(Tokenizer { tokens, ids })
    }

    /// Number of tokens, specials included.
    #[must_use]
    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    /// The token string for `id`, or `<unk>` when out of range.
    #[must_use]
    pub fn token(&self, id: u32) -> &str {
        self.tokens
            .get(id as usize)
            .map_or(SPECIALS[UNK_ID as usize], String::as_str)
    }

    /// The id of an exact token string, if present.
    #[must_use]
    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    /// Full token list in id order.
    #[must_use]
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Encodes text. Each `\n` becomes its own token; everything between
    /// newlines splits on whitespace. A word missing from the vocabulary is
    /// retried with leading/trailing punctuation stripped, then becomes
    /// `<unk>`.
    #[must_use]
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::new();
        for (i, segment) in text.split('\n').enumerate() {
            if i > 0 {
                out.push(NEWLINE_ID);
            }
            for word in segment.split_whitespace() {
                out.push(self.encode_word(word));
            }
        }
        out
    }

    fn encode_word(&self, word: &str) -> u32 {
        if let Some(id) = self.id(word) {
            return id;
        }
        let stripped = word.trim_matches(|c: char| c.is_ascii_punctuation());
        if !stripped.is_empty() {
            if let Some(id) = self.id(stripped) {
                return id;
            }
        }
        UNK_ID
    }

    /// Decodes ids: words are joined with single spaces and newline tokens
    /// are emitted verbatim with no surrounding spaces.
    #[must_use]
    pub fn decode(&self, ids: &[u32]) -> String {
        let mut out = String::new();
        let mut pending_space = false;
        for &id in ids {
            if id == NEWLINE_ID {
                out.push('\n');
                pending_space = false;
                continue;
            }
            if pending_space {
                out.push(' ');
            }
            out.push_str(self.token(id));
            pending_space = true;
        }
        out
    }
}
