//! A small AIML-subset dialogue interpreter.
//!
//! Supported: `<category>`, `<pattern>` with `*` wildcards (one or more
//! words), `<template>` with `<star/>` / `<star index="n"/>` and at most one
//! `<srai>` redirect. Among matching categories the one with the fewest
//! wildcards wins, ties going to the lexicographically smallest pattern.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub const MAX_SRAI_DEPTH: usize = 8;

pub const DEFAULT_FALLBACK: &str =
    "Sorry, I don't know about that yet. Type HELP to see the topics I can explain.";

const BUNDLED_BRAIN: &str = include_str!("../data/help.aiml");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AimlError {
    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate pattern `{0}`")]
    DuplicatePattern(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternWord {
    Word(String),
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Text(String),
    /// 1-based wildcard index.
    Star(usize),
    Srai(Vec<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub pattern: Vec<PatternWord>,
    pub template: Vec<Node>,
}

impl Category {
    pub fn wildcards(&self) -> usize {
        self.pattern.iter().filter(|w| **w == PatternWord::Star).count()
    }

    pub fn pattern_text(&self) -> String {
        let words: Vec<&str> = self
            .pattern
            .iter()
            .map(|w| match w {
                PatternWord::Word(s) => s.as_str(),
                PatternWord::Star => "*",
            })
            .collect();
        words.join(" ")
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern_text())
    }
}

/// Strips punctuation from every word and collapses whitespace. Case is
/// kept so wildcard bindings can echo the user's spelling.
pub fn normalize(input: &str) -> String {
    let words: Vec<String> = input
        .split_whitespace()
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect();
    words.join(" ")
}

/// Matches `pattern` against uppercased `input` words, returning the word
/// span bound by each wildcard. Wildcards bind as few words as possible.
pub fn match_pattern(pattern: &[PatternWord], input: &[String]) -> Option<Vec<(usize, usize)>> {
    fn go(pattern: &[PatternWord], input: &[String], at: usize, spans: &mut Vec<(usize, usize)>) -> bool {
        match pattern.split_first() {
            None => at == input.len(),
            Some((PatternWord::Word(w), rest)) => {
                at < input.len() && input[at] == *w && go(rest, input, at + 1, spans)
            }
            Some((PatternWord::Star, rest)) => {
                for end in at + 1..=input.len() {
                    spans.push((at, end));
                    if go(rest, input, end, spans) {
                        return true;
                    }
                    spans.pop();
                }
                false
            }
        }
    }
    let mut spans = Vec::new();
    go(pattern, input, 0, &mut spans).then_some(spans)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Brain {
    categories: Vec<Category>,
    fallback: String,
}

impl Brain {
    /// Loads `(file name, contents)` pairs into one brain.
    pub fn load<'a>(files: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Brain, AimlError> {
        let mut categories = Vec::new();
        let mut seen = BTreeSet::new();
        for (name, text) in files {
            for category in parse_file(name, text)? {
                let key = category.pattern_text();
                if !seen.insert(key.clone()) {
                    return Err(AimlError::DuplicatePattern(key));
                }
                categories.push(category);
            }
        }
        Ok(Brain {
            categories,
            fallback: DEFAULT_FALLBACK.to_string(),
        })
    }

    /// The shipped help brain.
    pub fn bundled() -> Brain {
        Brain::load([("help.aiml", BUNDLED_BRAIN)]).expect("bundled brain parses")
    }

    pub fn with_fallback(mut self, fallback: impl Into<String>) -> Self {
        self.fallback = fallback.into();
        self
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    /// The category chosen for `input`, with its wildcard spans.
    pub fn select(&self, input: &str) -> Option<(&Category, Vec<(usize, usize)>)> {
        let upper: Vec<String> = normalize(input)
            .split(' ')
            .filter(|w| !w.is_empty())
            .map(str::to_uppercase)
            .collect();
        self.categories
            .iter()
            .filter_map(|c| match_pattern(&c.pattern, &upper).map(|spans| (c, spans)))
            .min_by(|(a, _), (b, _)| {
                a.wildcards()
                    .cmp(&b.wildcards())
                    .then_with(|| a.pattern_text().cmp(&b.pattern_text()))
            })
    }

    pub fn respond(&self, input: &str) -> String {
        self.respond_at(input, 0)
    }

    fn respond_at(&self, input: &str, depth: usize) -> String {
        if depth > MAX_SRAI_DEPTH {
            return self.fallback.clone();
        }
        let normalized = normalize(input);
        let words: Vec<&str> = normalized.split(' ').filter(|w| !w.is_empty()).collect();
        let Some((category, spans)) = self.select(&normalized) else {
            return self.fallback.clone();
        };
        let star = |i: usize| -> String {
            spans
                .get(i.wrapping_sub(1))
                .map(|&(s, e)| words[s..e].join(" "))
                .unwrap_or_default()
        };
        let mut out = String::new();
        for node in &category.template {
            match node {
                Node::Text(t) => out.push_str(t),
                Node::Star(i) => out.push_str(&star(*i)),
                Node::Srai(inner) => {
                    let mut redirect = String::new();
                    for n in inner {
                        match n {
                            Node::Text(t) => redirect.push_str(t),
                            Node::Star(i) => redirect.push_str(&star(*i)),
                            Node::Srai(_) => {}
                        }
                    }
                    out.push_str(&self.respond_at(&redirect, depth + 1));
                }
            }
        }
        collapse_whitespace(&out)
    }
}

fn collapse_whitespace(s: &str) -> String {
    let words: Vec<&str> = s.split_whitespace().collect();
    words.join(" ")
}

// ---------------------------------------------------------------------------
// Parser for the XML-shaped category files.

struct Cursor<'a> {
    file: &'a str,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, at: usize, message: impl Into<String>) -> AimlError {
        let before = &self.text[..at.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
        AimlError::Parse {
            file: self.file.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn eof(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn skip_trivia(&mut self) -> Result<(), AimlError> {
        loop {
            let trimmed = self.rest().trim_start();
            self.pos = self.text.len() - trimmed.len();
            if trimmed.starts_with("<!--") {
                let end = trimmed
                    .find("-->")
                    .ok_or_else(|| self.error(self.pos, "unterminated comment"))?;
                self.pos += end + 3;
            } else if trimmed.starts_with("<?") {
                let end = trimmed
                    .find("?>")
                    .ok_or_else(|| self.error(self.pos, "unterminated declaration"))?;
                self.pos += end + 2;
            } else {
                return Ok(());
            }
        }
    }

    /// Reads a tag at the cursor: returns (name, is_closing, is_self_closing, attributes).
    fn tag(&mut self) -> Result<Tag, AimlError> {
        let start = self.pos;
        let rest = self.rest();
        if !rest.starts_with('<') {
            return Err(self.error(start, "expected a tag"));
        }
        let end = rest
            .find('>')
            .ok_or_else(|| self.error(start, "unterminated tag"))?;
        let mut inner = rest[1..end].trim();
        self.pos += end + 1;
        let closing = inner.starts_with('/');
        if closing {
            inner = inner[1..].trim_start();
        }
        let self_closing = inner.ends_with('/');
        if self_closing {
            inner = inner[..inner.len() - 1].trim_end();
        }
        let (name, attrs) = match inner.find(char::is_whitespace) {
            Some(i) => (&inner[..i], inner[i..].trim()),
            None => (inner, ""),
        };
        if name.is_empty() {
            return Err(self.error(start, "empty tag name"));
        }
        Ok(Tag {
            name: name.to_ascii_lowercase(),
            closing,
            self_closing,
            attrs: attrs.to_string(),
            at: start,
        })
    }

    fn expect_open(&mut self, name: &str) -> Result<Tag, AimlError> {
        self.skip_trivia()?;
        let at = self.pos;
        let tag = self.tag()?;
        if tag.name != name || tag.closing || tag.self_closing {
            return Err(self.error(at, format!("expected <{name}>")));
        }
        Ok(tag)
    }

    fn expect_close(&mut self, name: &str) -> Result<(), AimlError> {
        self.skip_trivia()?;
        let at = self.pos;
        let tag = self.tag()?;
        if tag.name != name || !tag.closing {
            return Err(self.error(at, format!("expected </{name}>")));
        }
        Ok(())
    }

    /// Template content up to `</close>`.
    fn content(&mut self, close: &str, allow_srai: bool) -> Result<Vec<Node>, AimlError> {
        let mut nodes = Vec::new();
        let mut srai_seen = false;
        loop {
            let rest = self.rest();
            let text_end = rest.find('<').unwrap_or(rest.len());
            if text_end > 0 {
                let raw = &rest[..text_end];
                let at = self.pos;
                nodes.push(Node::Text(decode_entities(raw).map_err(|m| self.error(at, m))?));
                self.pos += text_end;
            }
            if self.eof() {
                return Err(self.error(self.pos, format!("missing </{close}>")));
            }
            if self.rest().starts_with("<!--") {
                self.skip_trivia()?;
                continue;
            }
            let tag = self.tag()?;
            match (tag.name.as_str(), tag.closing, tag.self_closing) {
                (n, true, _) if n == close => return Ok(nodes),
                ("star", false, true) => {
                    let index = star_index(&tag.attrs).ok_or_else(|| self.error(tag.at, "bad star index"))?;
                    nodes.push(Node::Star(index));
                }
                ("srai", false, false) if allow_srai => {
                    if srai_seen {
                        return Err(self.error(tag.at, "at most one <srai> per template"));
                    }
                    srai_seen = true;
                    let inner = self.content("srai", false)?;
                    nodes.push(Node::Srai(inner));
                }
                _ => {
                    return Err(self.error(tag.at, format!("unsupported tag <{}> in template", tag.name)));
                }
            }
        }
    }
}

struct Tag {
    name: String,
    closing: bool,
    self_closing: bool,
    attrs: String,
    at: usize,
}

fn star_index(attrs: &str) -> Option<usize> {
    if attrs.is_empty() {
        return Some(1);
    }
    let value = attrs.strip_prefix("index")?.trim_start().strip_prefix('=')?.trim();
    let value = value.trim_matches(|c| c == '"' || c == '\'');
    value.parse().ok().filter(|i| *i >= 1)
}

fn decode_entities(raw: &str) -> Result<String, String> {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        let end = tail.find(';').ok_or_else(|| "unterminated entity".to_string())?;
        out.push(match &tail[1..end] {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            other => return Err(format!("unknown entity &{other};")),
        });
        rest = &tail[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn parse_pattern(text: &str) -> Vec<PatternWord> {
    text.split_whitespace()
        .filter_map(|w| {
            if w == "*" {
                return Some(PatternWord::Star);
            }
            let word: String = w.chars().filter(|c| c.is_alphanumeric()).collect();
            (!word.is_empty()).then(|| PatternWord::Word(word.to_uppercase()))
        })
        .collect()
}

fn parse_file(file: &str, text: &str) -> Result<Vec<Category>, AimlError> {
    let mut c = Cursor { file, text, pos: 0 };
    let mut out = Vec::new();
    c.skip_trivia()?;
    let wrapped = c.rest().starts_with("<aiml");
    if wrapped {
        c.expect_open("aiml")?;
    }
    loop {
        c.skip_trivia()?;
        if c.eof() {
            if wrapped {
                return Err(c.error(c.pos, "missing </aiml>"));
            }
            break;
        }
        if wrapped && c.rest().starts_with("</") {
            c.expect_close("aiml")?;
            c.skip_trivia()?;
            if !c.eof() {
                return Err(c.error(c.pos, "content after </aiml>"));
            }
            break;
        }
        c.expect_open("category")?;
        let pattern_tag = c.expect_open("pattern")?;
        let rest = c.rest();
        let end = rest
            .find("</")
            .ok_or_else(|| c.error(c.pos, "missing </pattern>"))?;
        let raw = &rest[..end];
        if raw.contains('<') {
            return Err(c.error(c.pos, "patterns may only contain words and *"));
        }
        let pattern_text = decode_entities(raw).map_err(|m| c.error(c.pos, m))?;
        c.pos += end;
        c.expect_close("pattern")?;
        let pattern = parse_pattern(&pattern_text);
        if pattern.is_empty() {
            return Err(c.error(pattern_tag.at, "empty pattern"));
        }
        c.expect_open("template")?;
        let template = c.content("template", true)?;
        c.expect_close("category")?;
        out.push(Category { pattern, template });
    }
    Ok(out)
}
