//! Segmentation into inter-sync text runs and tokenization.
//!
//! Tokenization is reversible: every lexical token records its char span in
//! the turn text, and [`detokenize`] reconstructs a segment exactly from its
//! tokens plus the untouched separator characters.

use super::{Document, RawAnnotation, Segment, Token, TokenKind, Turn, TurnItem};

/// All tokens of one turn, in order: words, `?`/`!` marks, and zero-width
/// event and sync stand-ins. This is the stream annotations index into.
pub fn turn_tokens(doc: &Document, turn_index: usize) -> Vec<Token> {
    tokens_of_turn(&doc.turns[turn_index], turn_index)
}

pub(crate) fn tokens_of_turn(turn: &Turn, turn_index: usize) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut char_base = 0usize;
    for (item_index, item) in turn.items.iter().enumerate() {
        match item {
            TurnItem::Text(text) => {
                tokenize_chunk(text, turn_index, item_index, char_base, &mut tokens);
                char_base += text.chars().count();
            }
            TurnItem::Event { .. } => tokens.push(Token {
                surface: String::new(),
                kind: TokenKind::Event,
                turn: turn_index,
                span: (char_base, char_base),
                item: item_index,
            }),
            TurnItem::Sync { .. } => tokens.push(Token {
                surface: String::new(),
                kind: TokenKind::Sync,
                turn: turn_index,
                span: (char_base, char_base),
                item: item_index,
            }),
            TurnItem::Raw(_) => {}
        }
    }
    tokens
}

/// One segment per maximal text run between consecutive sync marks. Runs
/// without any text character produce no segment, so segments partition the
/// turn text exactly.
pub fn segment(doc: &Document) -> Vec<Segment> {
    let mut segments = Vec::new();
    for (turn_index, turn) in doc.turns.iter().enumerate() {
        let mut run_start_item = 0usize;
        let mut run_start_char = 0usize;
        let mut char_pos = 0usize;
        let mut run_text = String::new();
        for (item_index, item) in turn.items.iter().enumerate() {
            match item {
                TurnItem::Sync { .. } => {
                    push_run(
                        &mut segments,
                        turn_index,
                        run_start_item,
                        item_index,
                        run_start_char,
                        char_pos,
                        &run_text,
                    );
                    run_start_item = item_index + 1;
                    run_start_char = char_pos;
                    run_text.clear();
                }
                TurnItem::Text(text) => {
                    run_text.push_str(text);
                    char_pos += text.chars().count();
                }
                TurnItem::Event { .. } | TurnItem::Raw(_) => {}
            }
        }
        push_run(
            &mut segments,
            turn_index,
            run_start_item,
            turn.items.len(),
            run_start_char,
            char_pos,
            &run_text,
        );
    }
    segments
}

#[allow(clippy::too_many_arguments)]
fn push_run(
    segments: &mut Vec<Segment>,
    turn: usize,
    item_start: usize,
    item_end: usize,
    char_start: usize,
    char_end: usize,
    text: &str,
) {
    if text.is_empty() {
        return;
    }
    segments.push(Segment {
        turn,
        items: (item_start, item_end),
        span: (char_start, char_end),
        text: text.to_owned(),
    });
}

/// Tokens of one segment: its words, `?`/`!` marks and events. Sync marks
/// delimit segments and never appear inside one.
pub fn tokenize(doc: &Document, seg: &Segment) -> Vec<Token> {
    turn_tokens(doc, seg.turn)
        .into_iter()
        .filter(|t| t.item >= seg.items.0 && t.item < seg.items.1 && t.kind != TokenKind::Sync)
        .collect()
}

/// Reconstructs the segment text from its tokens: token surfaces are spliced
/// back over their spans, separator characters are kept as-is. Equals the
/// original text exactly when the tokens are consistent with it.
pub fn detokenize(seg: &Segment, tokens: &[Token]) -> String {
    let chars: Vec<char> = seg.text.chars().collect();
    let base = seg.span.0;
    let mut out = String::with_capacity(seg.text.len());
    let mut pos = 0usize;
    for token in tokens {
        if !token.kind.is_lexical() {
            continue;
        }
        let (start, end) = (token.span.0 - base, token.span.1 - base);
        while pos < start {
            out.push(chars[pos]);
            pos += 1;
        }
        out.push_str(&token.surface);
        pos = end;
    }
    while pos < chars.len() {
        out.push(chars[pos]);
        pos += 1;
    }
    out
}

/// The tagged-stream view: turn tokens with `TagOpen`/`TagClose` tokens
/// interleaved at annotation boundaries. `annotations` must be in document
/// order (outer before inner on equal spans), as produced by an annotation
/// set's ordered iterator.
pub fn tokens_with_tags(
    doc: &Document,
    turn_index: usize,
    annotations: &[RawAnnotation],
) -> Vec<Token> {
    let plain = turn_tokens(doc, turn_index);
    let anns: Vec<&RawAnnotation> = annotations
        .iter()
        .filter(|a| a.turn == turn_index)
        .collect();
    let mut out = Vec::new();
    for idx in 0..=plain.len() {
        let here = |t: &Token| t.span.0;
        let boundary_char = plain
            .get(idx)
            .map(here)
            .unwrap_or_else(|| plain.last().map(|t| t.span.1).unwrap_or(0));
        // Closes first (innermost out), then opens (outermost in).
        for ann in anns.iter().rev() {
            if ann.end == idx {
                out.push(Token {
                    surface: format!("{}:{}", ann.family, ann.type_string),
                    kind: TokenKind::TagClose,
                    turn: turn_index,
                    span: (boundary_char, boundary_char),
                    item: plain.get(idx).map(|t| t.item).unwrap_or(0),
                });
            }
        }
        for ann in &anns {
            if ann.start == idx {
                out.push(Token {
                    surface: format!("{}:{}", ann.family, ann.type_string),
                    kind: TokenKind::TagOpen,
                    turn: turn_index,
                    span: (boundary_char, boundary_char),
                    item: plain.get(idx).map(|t| t.item).unwrap_or(0),
                });
            }
        }
        if let Some(token) = plain.get(idx) {
            out.push(token.clone());
        }
    }
    out
}

fn tokenize_chunk(
    text: &str,
    turn: usize,
    item: usize,
    char_base: usize,
    tokens: &mut Vec<Token>,
) {
    let mut word_start: Option<usize> = None;
    let mut word = String::new();
    let mut offset = 0usize;
    let mut flush = |start: &mut Option<usize>, word: &mut String, end: usize, out: &mut Vec<Token>| {
        if let Some(s) = start.take() {
            let kind = if word.ends_with('-') {
                TokenKind::TruncatedWord
            } else {
                TokenKind::Word
            };
            out.push(Token {
                surface: std::mem::take(word),
                kind,
                turn,
                span: (char_base + s, char_base + end),
                item,
            });
        }
    };
    for ch in text.chars() {
        match ch {
            c if c.is_whitespace() => flush(&mut word_start, &mut word, offset, tokens),
            '?' | '!' => {
                flush(&mut word_start, &mut word, offset, tokens);
                tokens.push(Token {
                    surface: ch.to_string(),
                    kind: if ch == '?' {
                        TokenKind::QuestionMark
                    } else {
                        TokenKind::ExclamationMark
                    },
                    turn,
                    span: (char_base + offset, char_base + offset + 1),
                    item,
                });
            }
            '\'' | '\u{2019}' => {
                // Elision splits after the apostrophe: j'aime -> "j'" "aime".
                word_start.get_or_insert(offset);
                word.push(ch);
                flush(&mut word_start, &mut word, offset + 1, tokens);
            }
            _ => {
                word_start.get_or_insert(offset);
                word.push(ch);
            }
        }
        offset += 1;
    }
    flush(&mut word_start, &mut word, offset, tokens);
}
