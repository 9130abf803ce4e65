//! Parser for the Transcriber XML subset.
//!
//! Interpreted elements: `Trans`, `Turn`, `Sync`, `Event`, plus inline
//! annotation elements (`NE`/`EN`/`DE` by default). `Episode` and `Section`
//! wrappers are flattened into document metadata with a warning. `Who` and
//! any unknown element inside a turn are preserved verbatim as raw items.

use indexmap::IndexMap;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use super::tokenize::tokens_of_turn;
use super::{Document, RawAnnotation, Timestamp, Turn, TurnItem};
use crate::typology::TagFamily;

/// Element-name configuration for inline annotations. Both `NE` and `EN`
/// are accepted on input for the named-entity family; output always uses
/// the configured output names.
#[derive(Debug, Clone)]
pub struct XmlNames {
    pub ne_input: Vec<String>,
    pub de_input: Vec<String>,
    pub ne_output: String,
    pub de_output: String,
}

impl Default for XmlNames {
    fn default() -> Self {
        XmlNames {
            ne_input: vec!["NE".into(), "EN".into()],
            de_input: vec!["DE".into()],
            ne_output: "NE".into(),
            de_output: "DE".into(),
        }
    }
}

impl XmlNames {
    fn family_of(&self, name: &str) -> Option<TagFamily> {
        if self.ne_input.iter().any(|n| n == name) {
            Some(TagFamily::Ne)
        } else if self.de_input.iter().any(|n| n == name) {
            Some(TagFamily::De)
        } else {
            None
        }
    }

    pub fn output_name(&self, family: TagFamily) -> &str {
        match family {
            TagFamily::Ne => &self.ne_output,
            TagFamily::De => &self.de_output,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error("root element is not Trans")]
    NotTranscription,
    #[error("text content outside a Turn")]
    TextOutsideTurn,
    #[error("element {0} not allowed in this context")]
    MisplacedElement(String),
    #[error("element {element} is missing required attribute {attribute}")]
    MissingAttribute {
        element: &'static str,
        attribute: &'static str,
    },
    #[error("invalid time value {value:?} for attribute {attribute}")]
    InvalidTime { attribute: String, value: String },
    #[error("turn startTime exceeds endTime")]
    TurnTimes,
    #[error("turns are not ordered by start time")]
    TurnOrder,
    #[error("sync times must be non-decreasing within a turn")]
    SyncOrder,
    #[error("sync time lies outside the turn's time range")]
    SyncRange,
    #[error("content after the closing Trans tag")]
    TrailingContent,
}

/// Parse failure with 1-based line and column of the offending input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

/// Recoverable oddity noticed while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Result of a parse: the document, any inline annotations found (in
/// document order, outer before inner), and recoverable warnings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub document: Document,
    pub annotations: Vec<RawAnnotation>,
    pub warnings: Vec<ParseWarning>,
}

/// Parses a transcription with the default element names and no source name.
pub fn parse_transcription(xml: &[u8]) -> Result<Parsed, ParseError> {
    parse_with(xml, "", &XmlNames::default())
}

pub fn parse_with(xml: &[u8], source: &str, names: &XmlNames) -> Result<Parsed, ParseError> {
    let text = std::str::from_utf8(xml).map_err(|e| ParseError {
        line: 1,
        col: e.valid_up_to() + 1,
        kind: ParseErrorKind::Utf8,
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    Parser::new(text, names).run(source)
}

struct OpenAnnotation {
    family: TagFamily,
    type_string: String,
    open_item: usize,
    open_seq: usize,
}

struct ItemAnnotation {
    family: TagFamily,
    type_string: String,
    open_item: usize,
    close_item: usize,
    open_seq: usize,
}

struct TurnBuilder {
    speaker: String,
    start: Timestamp,
    end: Timestamp,
    extra: IndexMap<String, String>,
    items: Vec<TurnItem>,
    open: Vec<OpenAnnotation>,
    closed: Vec<ItemAnnotation>,
    last_sync: Option<f64>,
}

struct Parser<'a> {
    input: &'a str,
    reader: Reader<&'a [u8]>,
    names: &'a XmlNames,
    warnings: Vec<ParseWarning>,
    seq: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str, names: &'a XmlNames) -> Parser<'a> {
        let mut reader = Reader::from_str(input);
        reader.config_mut().check_end_names = true;
        Parser {
            input,
            reader,
            names,
            warnings: Vec::new(),
            seq: 0,
        }
    }

    fn position(&self) -> (usize, usize) {
        line_col(self.input, self.reader.buffer_position() as usize)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        let (line, col) = self.position();
        ParseError { line, col, kind }
    }

    fn warn(&mut self, message: impl Into<String>) {
        let (line, col) = self.position();
        self.warnings.push(ParseWarning {
            line,
            col,
            message: message.into(),
        });
    }

    fn run(mut self, source: &str) -> Result<Parsed, ParseError> {
        let mut document = Document::empty();
        document.source = source.to_owned();
        let mut annotations = Vec::new();
        let mut seen_root = false;

        loop {
            let event = self
                .reader
                .read_event()
                .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
            match event {
                Event::Decl(_) | Event::PI(_) => {}
                Event::DocType(dt) => {
                    document.doctype = Some(decode_text(dt.into_inner().as_ref()));
                }
                Event::Comment(_) => {
                    if seen_root {
                        self.warn("comment outside a Turn is not preserved");
                    }
                }
                Event::Text(t) => {
                    let content = t
                        .unescape()
                        .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
                    if !content.trim().is_empty() {
                        return Err(self.err(ParseErrorKind::TextOutsideTurn));
                    }
                }
                Event::Start(start) => {
                    let name = decode_name(&start);
                    if name != "Trans" {
                        return Err(self.err(ParseErrorKind::NotTranscription));
                    }
                    if seen_root {
                        return Err(self.err(ParseErrorKind::TrailingContent));
                    }
                    seen_root = true;
                    document.metadata = self.attributes(&start)?;
                    self.parse_trans_content(&mut document, &mut annotations)?;
                }
                Event::Empty(start) => {
                    let name = decode_name(&start);
                    if name != "Trans" || seen_root {
                        return Err(self.err(ParseErrorKind::NotTranscription));
                    }
                    seen_root = true;
                    document.metadata = self.attributes(&start)?;
                }
                Event::End(_) => {
                    return Err(self.err(ParseErrorKind::Xml("unexpected closing tag".into())))
                }
                Event::CData(_) => return Err(self.err(ParseErrorKind::TextOutsideTurn)),
                Event::Eof => break,
            }
        }
        if !seen_root {
            return Err(self.err(ParseErrorKind::NotTranscription));
        }
        Ok(Parsed {
            document,
            annotations,
            warnings: self.warnings,
        })
    }

    /// Content of `<Trans>`: turns, possibly wrapped in Episode/Section.
    fn parse_trans_content(
        &mut self,
        document: &mut Document,
        annotations: &mut Vec<RawAnnotation>,
    ) -> Result<(), ParseError> {
        let mut wrapper_depth = 0usize;
        let mut section_count = 0usize;
        loop {
            let event = self
                .reader
                .read_event()
                .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
            match event {
                Event::Start(start) => {
                    let name = decode_name(&start);
                    match name.as_str() {
                        "Turn" => {
                            let turn_index = document.turns.len();
                            let builder = self.turn_attributes(&start)?;
                            let (turn, anns) = self.parse_turn(builder, turn_index)?;
                            if let Some(prev) = document.turns.last() {
                                if prev.start.seconds() > turn.start.seconds() {
                                    return Err(self.err(ParseErrorKind::TurnOrder));
                                }
                            }
                            document.turns.push(turn);
                            annotations.extend(anns);
                        }
                        "Episode" | "Section" => {
                            wrapper_depth += 1;
                            let prefix = if name == "Episode" {
                                "episode".to_owned()
                            } else {
                                section_count += 1;
                                format!("section{section_count}")
                            };
                            self.warn(format!("{name} wrapper flattened"));
                            for (key, value) in self.attributes(&start)? {
                                document.metadata.insert(format!("{prefix}.{key}"), value);
                            }
                        }
                        _ => return Err(self.err(ParseErrorKind::MisplacedElement(name))),
                    }
                }
                Event::Empty(start) => {
                    let name = decode_name(&start);
                    match name.as_str() {
                        "Turn" => {
                            let turn_index = document.turns.len();
                            let builder = self.turn_attributes(&start)?;
                            let (turn, _) = self.finish_turn(builder, turn_index)?;
                            if let Some(prev) = document.turns.last() {
                                if prev.start.seconds() > turn.start.seconds() {
                                    return Err(self.err(ParseErrorKind::TurnOrder));
                                }
                            }
                            document.turns.push(turn);
                        }
                        "Episode" | "Section" => {
                            let prefix = if name == "Episode" {
                                "episode".to_owned()
                            } else {
                                section_count += 1;
                                format!("section{section_count}")
                            };
                            self.warn(format!("{name} wrapper flattened"));
                            for (key, value) in self.attributes(&start)? {
                                document.metadata.insert(format!("{prefix}.{key}"), value);
                            }
                        }
                        _ => return Err(self.err(ParseErrorKind::MisplacedElement(name))),
                    }
                }
                Event::End(end) => {
                    let name = decode_text(end.name().as_ref());
                    match name.as_str() {
                        "Trans" => {
                            if wrapper_depth > 0 {
                                return Err(self.err(ParseErrorKind::Xml(
                                    "unclosed wrapper element".into(),
                                )));
                            }
                            return Ok(());
                        }
                        "Episode" | "Section" => {
                            if wrapper_depth == 0 {
                                return Err(self
                                    .err(ParseErrorKind::Xml("unexpected closing tag".into())));
                            }
                            wrapper_depth -= 1;
                        }
                        _ => {
                            return Err(self.err(ParseErrorKind::Xml(format!(
                                "unexpected closing tag {name}"
                            ))))
                        }
                    }
                }
                Event::Text(t) => {
                    let content = t
                        .unescape()
                        .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
                    if !content.trim().is_empty() {
                        return Err(self.err(ParseErrorKind::TextOutsideTurn));
                    }
                }
                Event::Comment(_) => self.warn("comment outside a Turn is not preserved"),
                Event::CData(_) => return Err(self.err(ParseErrorKind::TextOutsideTurn)),
                Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {
                    return Err(self.err(ParseErrorKind::Xml("misplaced declaration".into())))
                }
                Event::Eof => {
                    return Err(self.err(ParseErrorKind::Xml("unclosed Trans element".into())))
                }
            }
        }
    }

    fn parse_turn(
        &mut self,
        mut builder: TurnBuilder,
        turn_index: usize,
    ) -> Result<(Turn, Vec<RawAnnotation>), ParseError> {
        loop {
            let event = self
                .reader
                .read_event()
                .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
            match event {
                Event::Text(t) => {
                    let content = t
                        .unescape()
                        .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
                    push_text(&mut builder.items, &content);
                }
                Event::Empty(start) => {
                    let name = decode_name(&start);
                    match name.as_str() {
                        "Sync" => self.push_sync(&mut builder, &start)?,
                        "Event" => self.push_event(&mut builder, &start)?,
                        "Turn" | "Trans" | "Episode" | "Section" => {
                            return Err(self.err(ParseErrorKind::MisplacedElement(name)))
                        }
                        _ => {
                            if self.names.family_of(&name).is_some() {
                                self.warn(format!("empty annotation element {name} ignored"));
                            } else {
                                self.push_raw_empty(&mut builder, &name, &start);
                            }
                        }
                    }
                }
                Event::Start(start) => {
                    let name = decode_name(&start);
                    if let Some(family) = self.names.family_of(&name) {
                        let type_string = self
                            .find_attribute(&start, "type")?
                            .ok_or_else(|| {
                                self.err(ParseErrorKind::MissingAttribute {
                                    element: "annotation",
                                    attribute: "type",
                                })
                            })?;
                        builder.open.push(OpenAnnotation {
                            family,
                            type_string,
                            open_item: builder.items.len(),
                            open_seq: self.seq,
                        });
                        self.seq += 1;
                    } else {
                        match name.as_str() {
                            "Turn" | "Trans" | "Episode" | "Section" | "Sync" | "Event" => {
                                return Err(self.err(ParseErrorKind::MisplacedElement(name)))
                            }
                            _ => self.push_raw_nested(&mut builder, &name, &start)?,
                        }
                    }
                }
                Event::End(end) => {
                    let name = decode_text(end.name().as_ref());
                    if name == "Turn" {
                        if let Some(open) = builder.open.last() {
                            return Err(self.err(ParseErrorKind::Xml(format!(
                                "unclosed annotation element {}",
                                open.type_string
                            ))));
                        }
                        return self.finish_turn(builder, turn_index);
                    }
                    if self.names.family_of(&name).is_some() {
                        let open = builder.open.pop().ok_or_else(|| {
                            self.err(ParseErrorKind::Xml(format!("unexpected closing tag {name}")))
                        })?;
                        builder.closed.push(ItemAnnotation {
                            family: open.family,
                            type_string: open.type_string,
                            open_item: open.open_item,
                            close_item: builder.items.len(),
                            open_seq: open.open_seq,
                        });
                    } else {
                        return Err(self.err(ParseErrorKind::Xml(format!(
                            "unexpected closing tag {name}"
                        ))));
                    }
                }
                Event::Comment(c) => {
                    let raw = format!("<!--{}-->", decode_text(c.as_ref()));
                    builder.items.push(TurnItem::Raw(raw));
                }
                Event::CData(c) => {
                    push_text(&mut builder.items, &decode_text(c.as_ref()));
                }
                Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {
                    return Err(self.err(ParseErrorKind::Xml("misplaced declaration".into())))
                }
                Event::Eof => {
                    return Err(self.err(ParseErrorKind::Xml("unclosed Turn element".into())))
                }
            }
        }
    }

    fn finish_turn(
        &mut self,
        builder: TurnBuilder,
        turn_index: usize,
    ) -> Result<(Turn, Vec<RawAnnotation>), ParseError> {
        let turn = Turn {
            speaker: builder.speaker,
            start: builder.start,
            end: builder.end,
            extra: builder.extra,
            items: builder.items,
        };
        // Anchor item-space annotations to the turn token stream and trim
        // zero-width edges to lexical tokens.
        let tokens = tokens_of_turn(&turn, turn_index);
        let mut closed = builder.closed;
        closed.sort_by_key(|a| a.open_seq);
        let mut annotations = Vec::new();
        for ann in closed {
            let mut start = tokens.partition_point(|t| t.item < ann.open_item);
            let mut end = tokens.partition_point(|t| t.item < ann.close_item);
            while start < end && !tokens[start].kind.is_lexical() {
                start += 1;
            }
            while end > start && !tokens[end - 1].kind.is_lexical() {
                end -= 1;
            }
            if start == end {
                self.warn(format!(
                    "annotation {} without lexical content dropped",
                    ann.type_string
                ));
                continue;
            }
            annotations.push(RawAnnotation {
                family: ann.family,
                type_string: ann.type_string,
                turn: turn_index,
                start,
                end,
            });
        }
        Ok((turn, annotations))
    }

    fn push_sync(&mut self, builder: &mut TurnBuilder, start: &BytesStart) -> Result<(), ParseError> {
        let value = self.find_attribute(start, "time")?.ok_or_else(|| {
            self.err(ParseErrorKind::MissingAttribute {
                element: "Sync",
                attribute: "time",
            })
        })?;
        let time = Timestamp::parse(&value).ok_or_else(|| {
            self.err(ParseErrorKind::InvalidTime {
                attribute: "time".into(),
                value: value.clone(),
            })
        })?;
        if let Some(last) = builder.last_sync {
            if time.seconds() < last {
                return Err(self.err(ParseErrorKind::SyncOrder));
            }
        }
        if time.seconds() < builder.start.seconds() || time.seconds() > builder.end.seconds() {
            return Err(self.err(ParseErrorKind::SyncRange));
        }
        builder.last_sync = Some(time.seconds());
        builder.items.push(TurnItem::Sync { time });
        Ok(())
    }

    fn push_event(
        &mut self,
        builder: &mut TurnBuilder,
        start: &BytesStart,
    ) -> Result<(), ParseError> {
        let desc = self.find_attribute(start, "desc")?.unwrap_or_default();
        let kind = self.find_attribute(start, "type")?.unwrap_or_default();
        let extent = self.find_attribute(start, "extent")?.unwrap_or_default();
        builder.items.push(TurnItem::Event { desc, kind, extent });
        Ok(())
    }

    fn push_raw_empty(&mut self, builder: &mut TurnBuilder, name: &str, start: &BytesStart) {
        if name != "Who" {
            self.warn(format!("unknown element {name} preserved verbatim"));
        }
        let inner = decode_text(start.as_ref());
        builder.items.push(TurnItem::Raw(format!("<{inner}/>")));
    }

    /// Unknown element with children: capture its whole subtree verbatim.
    fn push_raw_nested(
        &mut self,
        builder: &mut TurnBuilder,
        name: &str,
        start: &BytesStart,
    ) -> Result<(), ParseError> {
        if name != "Who" {
            self.warn(format!("unknown element {name} preserved verbatim"));
        }
        let inner = decode_text(start.as_ref());
        let span = self
            .reader
            .read_to_end(start.name())
            .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
        let content = &self.input[span.start as usize..span.end as usize];
        builder
            .items
            .push(TurnItem::Raw(format!("<{inner}>{content}</{name}>")));
        Ok(())
    }

    fn turn_attributes(&mut self, start: &BytesStart) -> Result<TurnBuilder, ParseError> {
        let mut speaker = String::new();
        let mut start_time = None;
        let mut end_time = None;
        let mut extra = IndexMap::new();
        for (key, value) in self.attributes(start)? {
            match key.as_str() {
                "speaker" => speaker = value,
                "startTime" => {
                    start_time = Some(Timestamp::parse(&value).ok_or_else(|| {
                        self.err(ParseErrorKind::InvalidTime {
                            attribute: "startTime".into(),
                            value: value.clone(),
                        })
                    })?)
                }
                "endTime" => {
                    end_time = Some(Timestamp::parse(&value).ok_or_else(|| {
                        self.err(ParseErrorKind::InvalidTime {
                            attribute: "endTime".into(),
                            value: value.clone(),
                        })
                    })?)
                }
                _ => {
                    extra.insert(key, value);
                }
            }
        }
        let start_time = start_time.ok_or_else(|| {
            self.err(ParseErrorKind::MissingAttribute {
                element: "Turn",
                attribute: "startTime",
            })
        })?;
        let end_time = end_time.ok_or_else(|| {
            self.err(ParseErrorKind::MissingAttribute {
                element: "Turn",
                attribute: "endTime",
            })
        })?;
        if start_time.seconds() > end_time.seconds() {
            return Err(self.err(ParseErrorKind::TurnTimes));
        }
        Ok(TurnBuilder {
            speaker,
            start: start_time,
            end: end_time,
            extra,
            items: Vec::new(),
            open: Vec::new(),
            closed: Vec::new(),
            last_sync: None,
        })
    }

    fn attributes(&mut self, start: &BytesStart) -> Result<IndexMap<String, String>, ParseError> {
        let mut map = IndexMap::new();
        for attr in start.attributes() {
            let attr = attr.map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
            let key = decode_text(attr.key.as_ref());
            let value = attr
                .unescape_value()
                .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
            map.insert(key, nfc(&value));
        }
        Ok(map)
    }

    fn find_attribute(
        &mut self,
        start: &BytesStart,
        name: &str,
    ) -> Result<Option<String>, ParseError> {
        for attr in start.attributes() {
            let attr = attr.map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
            if attr.key.as_ref() == name.as_bytes() {
                let value = attr
                    .unescape_value()
                    .map_err(|e| self.err(ParseErrorKind::Xml(e.to_string())))?;
                return Ok(Some(nfc(&value)));
            }
        }
        Ok(None)
    }
}

/// Appends text content, merging adjacent text items.
fn push_text(items: &mut Vec<TurnItem>, content: &str) {
    if content.is_empty() {
        return;
    }
    let content = nfc(content);
    if let Some(TurnItem::Text(prev)) = items.last_mut() {
        prev.push_str(&content);
    } else {
        items.push(TurnItem::Text(content));
    }
}

fn nfc(s: &str) -> String {
    match is_nfc_quick(s.chars()) {
        IsNormalized::Yes => s.to_owned(),
        _ => s.nfc().collect(),
    }
}

fn decode_name(start: &BytesStart) -> String {
    decode_text(start.name().as_ref())
}

fn decode_text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn line_col(input: &str, byte_pos: usize) -> (usize, usize) {
    let pos = byte_pos.min(input.len());
    let before = &input.as_bytes()[..pos];
    let line = 1 + before.iter().filter(|&&b| b == b'\n').count();
    let col = pos - before.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::TokenKind;

    const PAPER_TURN: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<Trans audio_filename="eslo1">
<Turn speaker="spk4" startTime="10.88" endTime="14.843">
<Sync time="10.88"/>vous vous plaisez à Orléans? <Sync time="12.721"/></Turn>
</Trans>
"#;

    #[test]
    fn parses_the_paper_turn() {
        let parsed = parse_transcription(PAPER_TURN.as_bytes()).unwrap();
        let doc = &parsed.document;
        assert_eq!(doc.turns.len(), 1);
        let turn = &doc.turns[0];
        assert_eq!(turn.speaker, "spk4");
        assert_eq!(turn.start.raw(), "10.88");
        assert_eq!(turn.end.raw(), "14.843");
        let syncs = turn
            .items
            .iter()
            .filter(|i| matches!(i, TurnItem::Sync { .. }))
            .count();
        assert_eq!(syncs, 2);
        assert_eq!(turn.text().trim_end(), "vous vous plaisez à Orléans?");
        assert!(parsed.annotations.is_empty());
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn empty_trans_has_no_turns() {
        let parsed = parse_transcription(b"<Trans/>").unwrap();
        assert!(parsed.document.turns.is_empty());
        let parsed = parse_transcription(b"<Trans></Trans>").unwrap();
        assert!(parsed.document.turns.is_empty());
    }

    #[test]
    fn malformed_xml_reports_position() {
        let err = parse_transcription(b"<Trans>\n<Turn speaker=\"a\"").unwrap_err();
        assert!(err.line >= 1 && err.col >= 1);
        assert!(matches!(err.kind, ParseErrorKind::Xml(_)));
    }

    #[test]
    fn inline_annotations_both_element_names() {
        let xml = br#"<Trans><Turn speaker="spk1" startTime="0" endTime="5">
moi je suis native de <EN type="loc.admi">Pithiviers</EN> j'aime mieux <NE type="loc.admi">Orl&#233;ans</NE>
</Turn></Trans>"#;
        let parsed = parse_transcription(xml).unwrap();
        assert_eq!(parsed.annotations.len(), 2);
        let a = &parsed.annotations[0];
        assert_eq!(a.family, TagFamily::Ne);
        assert_eq!(a.type_string, "loc.admi");
        // token stream: moi je suis native de Pithiviers j' aime mieux Orléans
        assert_eq!((a.start, a.end), (5, 6));
        assert_eq!((parsed.annotations[1].start, parsed.annotations[1].end), (9, 10));
        assert_eq!(
            parsed.document.turns[0].text().trim(),
            "moi je suis native de Pithiviers j'aime mieux Orléans"
        );
    }

    #[test]
    fn nested_annotations_outer_first() {
        let xml = br#"<Trans><Turn speaker="spk1" startTime="16.224" endTime="18.444">
<Sync time="16.224"/> <Sync time="17.338"/><DE type="pers.speaker"><DE type="identity.arrival"><NE type="time.date.rel">neuf ans</NE></DE></DE>
</Turn></Trans>"#;
        let parsed = parse_transcription(xml).unwrap();
        assert_eq!(parsed.annotations.len(), 3);
        assert_eq!(parsed.annotations[0].type_string, "pers.speaker");
        assert_eq!(parsed.annotations[1].type_string, "identity.arrival");
        assert_eq!(parsed.annotations[2].type_string, "time.date.rel");
        // All three cover exactly the lexical tokens "neuf ans", after the
        // two zero-width sync tokens.
        for ann in &parsed.annotations {
            assert_eq!((ann.start, ann.end), (2, 4));
        }
    }

    #[test]
    fn unknown_elements_preserved_verbatim_with_warning() {
        let xml = br#"<Trans><Turn speaker="s" startTime="0" endTime="1">un <Comment desc="x"/> mot</Turn></Trans>"#;
        let parsed = parse_transcription(xml).unwrap();
        assert!(parsed
            .warnings
            .iter()
            .any(|w| w.message.contains("Comment")));
        assert!(parsed.document.turns[0]
            .items
            .iter()
            .any(|i| matches!(i, TurnItem::Raw(r) if r == "<Comment desc=\"x\"/>")));
    }

    #[test]
    fn event_between_words_is_a_token() {
        let xml = br#"<Trans><Turn speaker="s" startTime="0" endTime="20">vous habitez <Event desc="pi" type="pronounce" extent="instantaneous"/> euh Orléans hein?</Turn></Trans>"#;
        let parsed = parse_transcription(xml).unwrap();
        let tokens = tokens_of_turn(&parsed.document.turns[0], 0);
        let kinds: Vec<TokenKind> = tokens.iter().map(|t| t.kind).collect();
        assert_eq!(kinds[2], TokenKind::Event);
    }

    #[test]
    fn sync_out_of_range_is_an_error() {
        let xml = br#"<Trans><Turn speaker="s" startTime="5" endTime="6"><Sync time="4"/>a</Turn></Trans>"#;
        assert_eq!(
            parse_transcription(xml).unwrap_err().kind,
            ParseErrorKind::SyncRange
        );
    }

    #[test]
    fn decreasing_syncs_are_an_error() {
        let xml = br#"<Trans><Turn speaker="s" startTime="0" endTime="9"><Sync time="5"/>a<Sync time="4"/>b</Turn></Trans>"#;
        assert_eq!(
            parse_transcription(xml).unwrap_err().kind,
            ParseErrorKind::SyncOrder
        );
    }

    #[test]
    fn unordered_turns_are_an_error() {
        let xml = br#"<Trans><Turn speaker="s" startTime="5" endTime="6">a</Turn><Turn speaker="s" startTime="1" endTime="2">b</Turn></Trans>"#;
        assert_eq!(
            parse_transcription(xml).unwrap_err().kind,
            ParseErrorKind::TurnOrder
        );
    }

    #[test]
    fn text_outside_turn_is_an_error() {
        let xml = b"<Trans>bonjour</Trans>";
        assert_eq!(
            parse_transcription(xml).unwrap_err().kind,
            ParseErrorKind::TextOutsideTurn
        );
    }

    #[test]
    fn annotation_without_lexical_content_is_dropped() {
        let xml = br#"<Trans><Turn speaker="s" startTime="0" endTime="1">mot <NE type="loc"> </NE></Turn></Trans>"#;
        let parsed = parse_transcription(xml).unwrap();
        assert!(parsed.annotations.is_empty());
        assert!(parsed.warnings.iter().any(|w| w.message.contains("dropped")));
    }

    #[test]
    fn entities_are_unescaped_and_nfc_applied() {
        // "Orle\u{301}ans" (decomposed) must normalize to "Orléans".
        let xml = "<Trans><Turn speaker=\"s\" startTime=\"0\" endTime=\"1\">Orle\u{301}ans &amp; co</Turn></Trans>";
        let parsed = parse_transcription(xml.as_bytes()).unwrap();
        assert_eq!(parsed.document.turns[0].text(), "Orléans & co");
    }
}
