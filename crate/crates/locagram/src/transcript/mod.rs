//! Transcription documents: parsing, validation, segmentation, tokenization
//! and canonical serialization of the Transcriber XML subset.
//!
//! A [`Document`] preserves every text character and markup element of its
//! input. Re-serializing an unmodified document reproduces the input up to
//! the canonical normalization described in [`serialize`]: fixed attribute
//! order, self-closed empty elements, canonical escaping and NFC-normalized
//! Unicode.

mod parse;
mod serialize;
mod tokenize;
mod validate;

pub use parse::{
    parse_transcription, parse_with, ParseError, ParseErrorKind, ParseWarning, Parsed, XmlNames,
};
pub use serialize::{serialize, serialize_with_tags, SerializeError};
pub use tokenize::{detokenize, segment, tokenize, tokens_with_tags, turn_tokens};
pub use validate::{validate_conventions, ConventionRule, ConventionViolation};

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::typology::TagFamily;

/// A time attribute value. Keeps the exact source text so serialization can
/// reproduce it; comparisons use the numeric value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timestamp {
    raw: String,
    seconds: f64,
}

impl Timestamp {
    /// Parses a non-negative decimal of the form `digits[.digits]`.
    pub fn parse(raw: &str) -> Option<Timestamp> {
        let mut parts = raw.splitn(2, '.');
        let whole = parts.next()?;
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if let Some(frac) = parts.next() {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
        }
        let seconds: f64 = raw.parse().ok()?;
        Some(Timestamp {
            raw: raw.to_owned(),
            seconds,
        })
    }

    pub fn from_seconds(seconds: f64) -> Timestamp {
        let raw = format!("{seconds}");
        Timestamp { raw, seconds }
    }

    pub fn seconds(&self) -> f64 {
        self.seconds
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Number of digits after the decimal point in the source text.
    pub fn fractional_digits(&self) -> usize {
        self.raw.split_once('.').map_or(0, |(_, f)| f.len())
    }
}

impl PartialEq for Timestamp {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}
impl Eq for Timestamp {}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// One turn-internal content unit, in document order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TurnItem {
    /// `<Sync time="…"/>` anchor.
    Sync { time: Timestamp },
    /// `<Event desc="…" type="…" extent="…"/>` mark.
    Event {
        desc: String,
        kind: String,
        extent: String,
    },
    /// A run of transcription text.
    Text(String),
    /// Markup outside the interpreted subset, preserved verbatim.
    Raw(String),
}

impl TurnItem {
    pub fn text(&self) -> Option<&str> {
        match self {
            TurnItem::Text(t) => Some(t),
            _ => None,
        }
    }
}

/// A maximal stretch of speech by one speaker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: String,
    pub start: Timestamp,
    pub end: Timestamp,
    /// Turn attributes beyond the interpreted three, in source order.
    #[serde(default)]
    pub extra: IndexMap<String, String>,
    pub items: Vec<TurnItem>,
}

impl Turn {
    /// Concatenation of all text items; the coordinate space for token and
    /// violation character spans.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            if let TurnItem::Text(t) = item {
                out.push_str(t);
            }
        }
        out
    }
}

/// A parsed transcription file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    /// Opaque identity of the source (usually the file name).
    pub source: String,
    /// Attributes of the root element, in source order.
    pub metadata: IndexMap<String, String>,
    /// Original DOCTYPE declaration, if any.
    pub doctype: Option<String>,
    pub turns: Vec<Turn>,
}

impl Document {
    pub fn empty() -> Document {
        Document {
            source: String::new(),
            metadata: IndexMap::new(),
            doctype: None,
            turns: Vec::new(),
        }
    }
}

/// Token classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    /// Word ending in a dash: transcription convention for truncation.
    TruncatedWord,
    QuestionMark,
    ExclamationMark,
    /// Zero-width stand-in for an `Event` item.
    Event,
    /// Zero-width stand-in for a `Sync` item.
    Sync,
    /// Annotation opening tag; appears only in tagged-stream views.
    TagOpen,
    /// Annotation closing tag; appears only in tagged-stream views.
    TagClose,
}

impl TokenKind {
    /// Tokens that carry transcription text.
    pub fn is_lexical(self) -> bool {
        matches!(
            self,
            TokenKind::Word
                | TokenKind::TruncatedWord
                | TokenKind::QuestionMark
                | TokenKind::ExclamationMark
        )
    }

    /// Tokens a word-level pattern can consume.
    pub fn is_word(self) -> bool {
        matches!(self, TokenKind::Word | TokenKind::TruncatedWord)
    }
}

/// A token of a turn's stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
    /// Index of the turn within the document.
    pub turn: usize,
    /// Char span within the turn text; empty for zero-width kinds.
    pub span: (usize, usize),
    /// Index of the originating item within the turn.
    pub item: usize,
}

impl Token {
    pub fn uppercase_initial(&self) -> bool {
        self.kind.is_word()
            && self
                .surface
                .chars()
                .next()
                .is_some_and(|c| c.is_uppercase())
    }
}

/// A maximal run of text between consecutive sync marks within a turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub turn: usize,
    /// Half-open item range within the turn.
    pub items: (usize, usize),
    /// Char span within the turn text.
    pub span: (usize, usize),
    pub text: String,
}

/// Standoff annotation over a turn's token stream.
///
/// `start..end` index the turn token stream produced by [`turn_tokens`].
/// Equal spans are ordered by the set's chain order (see
/// [`crate::cascade::AnnotationSet`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawAnnotation {
    pub family: TagFamily,
    pub type_string: String,
    pub turn: usize,
    pub start: usize,
    pub end: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_parsing() {
        let t = Timestamp::parse("14.843").unwrap();
        assert_eq!(t.raw(), "14.843");
        assert_eq!(t.fractional_digits(), 3);
        assert!((t.seconds() - 14.843).abs() < 1e-9);
        assert_eq!(Timestamp::parse("10.88").unwrap().fractional_digits(), 2);
        assert_eq!(Timestamp::parse("7").unwrap().fractional_digits(), 0);
        assert!(Timestamp::parse("").is_none());
        assert!(Timestamp::parse("1.").is_none());
        assert!(Timestamp::parse(".5").is_none());
        assert!(Timestamp::parse("-1").is_none());
        assert!(Timestamp::parse("1e3").is_none());
        assert!(Timestamp::parse("1.2.3").is_none());
    }

    #[test]
    fn turn_text_concatenates_text_items() {
        let turn = Turn {
            speaker: "spk1".into(),
            start: Timestamp::parse("0").unwrap(),
            end: Timestamp::parse("2").unwrap(),
            items: vec![
                TurnItem::Sync {
                    time: Timestamp::parse("0").unwrap(),
                },
                TurnItem::Text("bonjour ".into()),
                TurnItem::Event {
                    desc: "rire".into(),
                    kind: "noise".into(),
                    extent: "instantaneous".into(),
                },
                TurnItem::Text("madame".into()),
            ],
        };
        assert_eq!(turn.text(), "bonjour madame");
    }
}
