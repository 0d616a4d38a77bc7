//! Inline `<PHI TYPE="X">…</PHI>` markup and the CoNLL-style dump.

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize_at, Token};
use super::CorpusError;
use crate::labels::{Category, LabelId, LabelKind, LabelSchema, Position};

const OPEN_PREFIX: &str = "<PHI";
const TYPE_ATTR: &str = " TYPE=\"";
const CLOSE_TAG: &str = "</PHI>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    /// Source text with all markup removed.
    pub text: String,
    pub tokens: Vec<Token>,
    pub labels: Vec<LabelId>,
}

impl AnnotatedDocument {
    /// A document with no gold annotation: every token labelled `O`.
    pub fn unlabelled(doc_id: impl Into<String>, text: impl Into<String>, schema: &LabelSchema) -> Self {
        let text = text.into();
        let tokens = tokenize_at(&text, 0);
        let labels = vec![schema.outside(); tokens.len()];
        AnnotatedDocument { doc_id: doc_id.into(), text, tokens, labels }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token_texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }
}

/// A maximal `B-X I-X …` run, as a half-open token range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub category: Category,
}

/// Extracts entity runs. A stray `I-X` (not continuing an `X` run) opens a new run.
pub fn entity_spans(labels: &[LabelId], schema: &LabelSchema) -> Vec<EntitySpan> {
    let mut spans: Vec<EntitySpan> = Vec::new();
    let mut open: Option<EntitySpan> = None;
    for (i, &label) in labels.iter().enumerate() {
        let continues = match (schema.kind(label), open) {
            (Some(LabelKind::Phi(c, Position::Inside)), Some(span)) => span.category == c,
            _ => false,
        };
        if continues {
            if let Some(span) = open.as_mut() {
                span.end = i + 1;
            }
            continue;
        }
        spans.extend(open.take());
        if let Some(c) = schema.category(label) {
            open = Some(EntitySpan { start: i, end: i + 1, category: c });
        }
    }
    spans.extend(open);
    spans
}

/// Strips inline PHI markup and assigns BIO labels to the resulting tokens.
pub fn parse_annotated(
    doc_id: &str,
    raw: &str,
    schema: &LabelSchema,
) -> Result<AnnotatedDocument, CorpusError> {
    let mut text = String::with_capacity(raw.len());
    // (start in stripped text, end, category)
    let mut segments: Vec<(usize, usize, Option<Category>)> = Vec::new();
    let mut open: Option<(Category, usize, usize)> = None; // category, raw offset, text start
    let mut seg_start = 0;
    let mut cursor = 0;

    while let Some(rel) = raw[cursor..].find('<') {
        let at = cursor + rel;
        let rest = &raw[at..];
        if rest.starts_with(CLOSE_TAG) {
            let Some((category, _, start)) = open.take() else {
                return Err(CorpusError::UnbalancedTag { offset: at });
            };
            text.push_str(&raw[cursor..at]);
            segments.push((start, text.len(), Some(category)));
            seg_start = text.len();
            cursor = at + CLOSE_TAG.len();
        } else if is_open_tag(rest) {
            if open.is_some() {
                return Err(CorpusError::NestedTag { offset: at });
            }
            let (category, tag_len) = parse_open_tag(rest, at)?;
            text.push_str(&raw[cursor..at]);
            segments.push((seg_start, text.len(), None));
            open = Some((category, at, text.len()));
            cursor = at + tag_len;
        } else {
            text.push_str(&raw[cursor..at + 1]);
            cursor = at + 1;
        }
    }
    if let Some((_, offset, _)) = open {
        return Err(CorpusError::UnbalancedTag { offset });
    }
    text.push_str(&raw[cursor..]);
    segments.push((seg_start, text.len(), None));

    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    for (start, end, category) in segments {
        let seg_tokens = tokenize_at(&text[start..end], start);
        for (i, token) in seg_tokens.into_iter().enumerate() {
            labels.push(match category {
                None => schema.outside(),
                Some(c) if i == 0 => schema.begin(c),
                Some(c) => schema.inside(c),
            });
            tokens.push(token);
        }
    }
    Ok(AnnotatedDocument { doc_id: doc_id.to_string(), text, tokens, labels })
}

fn is_open_tag(rest: &str) -> bool {
    rest.strip_prefix(OPEN_PREFIX)
        .and_then(|r| r.chars().next())
        .is_some_and(|c| c.is_whitespace() || c == '>')
}

fn parse_open_tag(rest: &str, offset: usize) -> Result<(Category, usize), CorpusError> {
    let malformed = || CorpusError::MalformedTag { offset };
    let after = rest[OPEN_PREFIX.len()..].strip_prefix(TYPE_ATTR).ok_or_else(malformed)?;
    let quote = after.find('"').ok_or_else(malformed)?;
    let name = &after[..quote];
    if !after[quote + 1..].starts_with('>') {
        return Err(malformed());
    }
    let category = Category::from_tag(name)
        .ok_or_else(|| CorpusError::UnknownCategory { category: name.to_string(), offset })?;
    Ok((category, OPEN_PREFIX.len() + TYPE_ATTR.len() + quote + 2))
}

/// Renders a document back to inline markup, one tag per entity run.
pub fn serialize_annotated(doc: &AnnotatedDocument, schema: &LabelSchema) -> String {
    let mut out = String::with_capacity(doc.text.len() + 32);
    let mut cursor = 0;
    for span in entity_spans(&doc.labels, schema) {
        let start = doc.tokens[span.start].start;
        let end = doc.tokens[span.end - 1].end;
        out.push_str(&doc.text[cursor..start]);
        out.push_str(&format!("{OPEN_PREFIX}{TYPE_ATTR}{}\">", span.category.tag()));
        out.push_str(&doc.text[start..end]);
        out.push_str(CLOSE_TAG);
        cursor = end;
    }
    out.push_str(&doc.text[cursor..]);
    out
}

/// One document of a CoNLL-style dump: `(token, label)` rows.
pub type ConllDocument = Vec<(String, LabelId)>;

/// `token<TAB>label` lines with a blank line after every document.
pub fn write_conll<'a, I>(docs: I, schema: &LabelSchema) -> String
where
    I: IntoIterator<Item = (&'a [Token], &'a [LabelId])>,
{
    let mut out = String::new();
    for (tokens, labels) in docs {
        for (token, &label) in tokens.iter().zip(labels) {
            let name = schema.name(label).unwrap_or_else(|| "O".to_string());
            out.push_str(&token.text);
            out.push('\t');
            out.push_str(&name);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn read_conll(text: &str, schema: &LabelSchema) -> Result<Vec<ConllDocument>, CorpusError> {
    let mut docs = Vec::new();
    let mut current = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let row = line.trim_end_matches(['\n', '\r']);
        if row.is_empty() {
            if !current.is_empty() {
                docs.push(std::mem::take(&mut current));
            }
        } else {
            let (token, label) = row
                .rsplit_once('\t')
                .ok_or(CorpusError::MalformedConll { offset })?;
            let label = schema
                .id(label)
                .map_err(|_| CorpusError::UnknownConllLabel { label: label.to_string(), offset })?;
            current.push((token.to_string(), label));
        }
        offset += line.len();
    }
    if !current.is_empty() {
        docs.push(current);
    }
    Ok(docs)
}
