//! Canonical serialization.
//!
//! The canonical form fixes everything the input format leaves free:
//! a standard XML declaration, double-quoted attributes in a fixed order
//! (`speaker`, `startTime`, `endTime`, then extras in source order),
//! self-closed empty elements, minimal escaping, NFC text. Text content is
//! reproduced character for character; annotation tags are emitted tight
//! against the tokens they cover.

use std::collections::HashMap;

use super::tokenize::tokens_of_turn;
use super::{Document, RawAnnotation, Turn, TurnItem, XmlNames};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SerializeError {
    #[error("annotation {type_string} targets turn {turn} which does not exist")]
    UnknownTurn { type_string: String, turn: usize },
    #[error("annotation {type_string} span {start}..{end} crosses the bounds of turn {turn}")]
    SpanOutOfRange {
        type_string: String,
        turn: usize,
        start: usize,
        end: usize,
    },
}

/// Serializes a document without annotations.
pub fn serialize(doc: &Document) -> Vec<u8> {
    serialize_with_tags(doc, &[], &XmlNames::default())
        .expect("serialization without annotations cannot fail")
}

/// Serializes a document with inline annotation elements. `annotations`
/// must be in document order: outer before inner on equal spans.
pub fn serialize_with_tags(
    doc: &Document,
    annotations: &[RawAnnotation],
    names: &XmlNames,
) -> Result<Vec<u8>, SerializeError> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if let Some(doctype) = &doc.doctype {
        out.push_str("<!DOCTYPE ");
        out.push_str(doctype);
        out.push_str(">\n");
    }
    for ann in annotations {
        if ann.turn >= doc.turns.len() {
            return Err(SerializeError::UnknownTurn {
                type_string: ann.type_string.clone(),
                turn: ann.turn,
            });
        }
    }
    let mut trans_attrs = String::new();
    for (key, value) in &doc.metadata {
        push_attr(&mut trans_attrs, key, value);
    }
    if doc.turns.is_empty() {
        out.push_str(&format!("<Trans{trans_attrs}/>\n"));
        return Ok(out);
    }
    out.push_str(&format!("<Trans{trans_attrs}>\n"));
    for (turn_index, turn) in doc.turns.iter().enumerate() {
        let turn_annotations: Vec<&RawAnnotation> = annotations
            .iter()
            .filter(|a| a.turn == turn_index)
            .collect();
        write_turn(&mut out, turn, turn_index, &turn_annotations, names)?;
        out.push('\n');
    }
    out.push_str("</Trans>\n");
    Ok(out.into_bytes())
}

fn write_turn(
    out: &mut String,
    turn: &Turn,
    turn_index: usize,
    annotations: &[&RawAnnotation],
    names: &XmlNames,
) -> Result<(), SerializeError> {
    let mut attrs = String::new();
    if !turn.speaker.is_empty() {
        push_attr(&mut attrs, "speaker", &turn.speaker);
    }
    push_attr(&mut attrs, "startTime", turn.start.raw());
    push_attr(&mut attrs, "endTime", turn.end.raw());
    for (key, value) in &turn.extra {
        push_attr(&mut attrs, key, value);
    }
    out.push_str(&format!("<Turn{attrs}>"));

    // Char positions at which annotation tags open and close.
    let tokens = tokens_of_turn(turn, turn_index);
    let mut opens: HashMap<usize, Vec<&RawAnnotation>> = HashMap::new();
    let mut closes: HashMap<usize, Vec<&RawAnnotation>> = HashMap::new();
    for ann in annotations {
        if ann.start >= ann.end || ann.end > tokens.len() {
            return Err(SerializeError::SpanOutOfRange {
                type_string: ann.type_string.clone(),
                turn: turn_index,
                start: ann.start,
                end: ann.end,
            });
        }
        let open_char = tokens[ann.start].span.0;
        let close_char = tokens[ann.end - 1].span.1;
        opens.entry(open_char).or_default().push(ann);
        // Closes stack in reverse: innermost annotation closes first.
        closes.entry(close_char).or_default().insert(0, ann);
    }

    let mut char_pos = 0usize;
    for item in &turn.items {
        match item {
            TurnItem::Text(text) => {
                for ch in text.chars() {
                    if let Some(list) = closes.remove(&char_pos) {
                        for ann in list {
                            push_close(out, ann, names);
                        }
                    }
                    if let Some(list) = opens.remove(&char_pos) {
                        for ann in list {
                            push_open(out, ann, names);
                        }
                    }
                    push_escaped_char(out, ch);
                    char_pos += 1;
                }
                // Annotations ending exactly at this item's end close before
                // whatever item follows.
                if let Some(list) = closes.remove(&char_pos) {
                    for ann in list {
                        push_close(out, ann, names);
                    }
                }
            }
            TurnItem::Sync { time } => {
                out.push_str(&format!("<Sync time=\"{}\"/>", escape_attr(time.raw())));
            }
            TurnItem::Event { desc, kind, extent } => {
                let mut attrs = String::new();
                if !desc.is_empty() {
                    push_attr(&mut attrs, "desc", desc);
                }
                if !kind.is_empty() {
                    push_attr(&mut attrs, "type", kind);
                }
                if !extent.is_empty() {
                    push_attr(&mut attrs, "extent", extent);
                }
                out.push_str(&format!("<Event{attrs}/>"));
            }
            TurnItem::Raw(raw) => out.push_str(raw),
        }
    }
    out.push_str("</Turn>");
    Ok(())
}

fn push_open(out: &mut String, ann: &RawAnnotation, names: &XmlNames) {
    out.push_str(&format!(
        "<{} type=\"{}\">",
        names.output_name(ann.family),
        escape_attr(&ann.type_string)
    ));
}

fn push_close(out: &mut String, ann: &RawAnnotation, names: &XmlNames) {
    out.push_str(&format!("</{}>", names.output_name(ann.family)));
}

fn push_attr(out: &mut String, key: &str, value: &str) {
    out.push_str(&format!(" {key}=\"{}\"", escape_attr(value)));
}

fn push_escaped_char(out: &mut String, ch: char) {
    match ch {
        '&' => out.push_str("&amp;"),
        '<' => out.push_str("&lt;"),
        '>' => out.push_str("&gt;"),
        _ => out.push(ch),
    }
}

fn escape_attr(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for ch in value.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            _ => out.push(ch),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_transcription;
    use super::*;
    use crate::typology::TagFamily;

    #[test]
    fn canonical_fixture_round_trips_byte_for_byte() {
        let xml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Trans audio_filename=\"t\">\n<Turn speaker=\"spk4\" startTime=\"10.88\" endTime=\"14.843\"><Sync time=\"10.88\"/>vous vous plaisez à Orléans? <Sync time=\"12.721\"/></Turn>\n</Trans>\n";
        let parsed = parse_transcription(xml.as_bytes()).unwrap();
        let bytes = serialize(&parsed.document);
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), xml);
    }

    #[test]
    fn parse_serialize_parse_is_identity() {
        let xml = br#"<Trans scribe="x" version="2">
  <Turn speaker="spk1" startTime="0.0" endTime="5.5">
    <Sync time="0.0"/>moi je suis native de Pithiviers <Event desc="rire" type="noise" extent="instantaneous"/> voil&#224;
  </Turn>
</Trans>"#;
        let first = parse_transcription(xml).unwrap();
        let bytes = serialize(&first.document);
        let second = parse_transcription(&bytes).unwrap();
        assert_eq!(first.document, second.document);
        // A second serialization is a fixed point.
        assert_eq!(bytes, serialize(&second.document));
    }

    #[test]
    fn annotations_are_emitted_tight_and_nested() {
        let xml = br#"<Trans><Turn speaker="s" startTime="16.224" endTime="18.444"><Sync time="16.224"/> <Sync time="17.338"/>neuf ans</Turn></Trans>"#;
        let parsed = parse_transcription(xml).unwrap();
        let anns = vec![
            RawAnnotation {
                family: TagFamily::De,
                type_string: "pers.speaker".into(),
                turn: 0,
                start: 2,
                end: 4,
            },
            RawAnnotation {
                family: TagFamily::De,
                type_string: "identity.arrival".into(),
                turn: 0,
                start: 2,
                end: 4,
            },
            RawAnnotation {
                family: TagFamily::Ne,
                type_string: "time.date.rel".into(),
                turn: 0,
                start: 2,
                end: 4,
            },
        ];
        let bytes =
            serialize_with_tags(&parsed.document, &anns, &XmlNames::default()).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains(
            "<DE type=\"pers.speaker\"><DE type=\"identity.arrival\"><NE type=\"time.date.rel\">neuf ans</NE></DE></DE>"
        ), "got: {text}");
    }

    #[test]
    fn annotated_output_reparses_to_the_same_annotations() {
        let xml = br#"<Trans><Turn speaker="s" startTime="0" endTime="9">moi je suis native de Pithiviers j'aime mieux Orléans</Turn></Trans>"#;
        let parsed = parse_transcription(xml).unwrap();
        let anns = vec![
            RawAnnotation {
                family: TagFamily::De,
                type_string: "pers.speaker".into(),
                turn: 0,
                start: 0,
                end: 6,
            },
            RawAnnotation {
                family: TagFamily::De,
                type_string: "identity.origin".into(),
                turn: 0,
                start: 3,
                end: 6,
            },
            RawAnnotation {
                family: TagFamily::Ne,
                type_string: "loc.admi".into(),
                turn: 0,
                start: 5,
                end: 6,
            },
        ];
        let bytes =
            serialize_with_tags(&parsed.document, &anns, &XmlNames::default()).unwrap();
        let reparsed = parse_transcription(&bytes).unwrap();
        assert_eq!(reparsed.annotations, anns);
        assert_eq!(reparsed.document.turns[0].text(), parsed.document.turns[0].text());
    }

    #[test]
    fn out_of_range_annotation_is_an_error() {
        let xml = br#"<Trans><Turn speaker="s" startTime="0" endTime="1">un mot</Turn></Trans>"#;
        let parsed = parse_transcription(xml).unwrap();
        let ann = RawAnnotation {
            family: TagFamily::Ne,
            type_string: "loc".into(),
            turn: 0,
            start: 1,
            end: 7,
        };
        let err = serialize_with_tags(&parsed.document, &[ann], &XmlNames::default()).unwrap_err();
        assert!(matches!(err, SerializeError::SpanOutOfRange { .. }));
    }

    #[test]
    fn escaping_round_trips() {
        let xml = br#"<Trans note="a &amp; b &quot;q&quot;"><Turn speaker="s" startTime="0" endTime="1">x &amp; y &lt;z&gt;</Turn></Trans>"#;
        let first = parse_transcription(xml).unwrap();
        assert_eq!(first.document.turns[0].text(), "x & y <z>");
        let bytes = serialize(&first.document);
        let second = parse_transcription(&bytes).unwrap();
        assert_eq!(first.document, second.document);
    }
}
