use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::CorpusError;

/// Whether a constituent is the central or the supporting member of its
/// rhetorical relation. `Root` only appears on a tree's top node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nuclearity {
    Nucleus,
    Satellite,
    Root,
}

impl fmt::Display for Nuclearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nuclearity::Nucleus => "Nucleus",
            Nuclearity::Satellite => "Satellite",
            Nuclearity::Root => "Root",
        })
    }
}

/// One node of an RST constituency tree as stored in a `.bracket` file.
///
/// `span` is the inclusive 1-based EDU range the node covers; leaves have
/// `span.0 == span.1`. Relation names are preserved verbatim (tag sets
/// vary across parser versions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RstTreeNode {
    pub span: (usize, usize),
    pub nuclearity: Nuclearity,
    pub relation: String,
}

impl RstTreeNode {
    pub fn new(first: usize, last: usize, nuclearity: Nuclearity, relation: &str) -> Self {
        RstTreeNode {
            span: (first, last),
            nuclearity,
            relation: relation.to_string(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.span.0 == self.span.1
    }

    pub fn contains(&self, other: &RstTreeNode) -> bool {
        self.span.0 <= other.span.0 && other.span.1 <= self.span.1
    }
}

/// Parse a `.bracket` file: one node per line in the segmenter's
/// convention, `((first, last), 'Nuclearity', 'relation')`. Either quote
/// style is accepted. Spans must be well-ranged (`1 <= first <= last`)
/// and pairwise nested or disjoint.
pub fn parse_bracket(raw: &str) -> Result<Vec<RstTreeNode>, CorpusError> {
    let mut nodes = Vec::new();
    let mut lines = Vec::new();
    for (line_no, line) in raw.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            continue;
        }
        let node =
            parse_bracket_line(line).ok_or(CorpusError::MalformedBracketLine { line: line_no })?;
        nodes.push(node);
        lines.push(line_no);
    }
    // Partial overlaps can never occur in a tree; report the later line.
    for i in 0..nodes.len() {
        for j in 0..i {
            let (a, b) = (&nodes[j], &nodes[i]);
            let overlap = a.span.0.max(b.span.0) <= a.span.1.min(b.span.1);
            if overlap && !a.contains(b) && !b.contains(a) {
                return Err(CorpusError::InconsistentSpan { line: lines[i] });
            }
        }
    }
    Ok(nodes)
}

fn parse_bracket_line(line: &str) -> Option<RstTreeNode> {
    let mut s = Scanner::new(line);
    s.expect('(')?;
    s.expect('(')?;
    let first = s.integer()?;
    s.expect(',')?;
    let last = s.integer()?;
    s.expect(')')?;
    s.expect(',')?;
    let nuclearity = match s.quoted()?.as_str() {
        "Nucleus" => Nuclearity::Nucleus,
        "Satellite" => Nuclearity::Satellite,
        "Root" => Nuclearity::Root,
        _ => return None,
    };
    s.expect(',')?;
    let relation = s.quoted()?;
    s.expect(')')?;
    s.end()?;
    if first == 0 || first > last {
        return None;
    }
    Some(RstTreeNode {
        span: (first, last),
        nuclearity,
        relation,
    })
}

struct Scanner<'a> {
    rest: &'a str,
}

impl<'a> Scanner<'a> {
    fn new(s: &'a str) -> Self {
        Scanner { rest: s }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn expect(&mut self, ch: char) -> Option<()> {
        self.skip_ws();
        self.rest = self.rest.strip_prefix(ch)?;
        Some(())
    }

    fn integer(&mut self) -> Option<usize> {
        self.skip_ws();
        let end = self
            .rest
            .char_indices()
            .take_while(|(_, c)| c.is_ascii_digit())
            .map(|(i, c)| i + c.len_utf8())
            .last()?;
        let (digits, rest) = self.rest.split_at(end);
        self.rest = rest;
        digits.parse().ok()
    }

    fn quoted(&mut self) -> Option<String> {
        self.skip_ws();
        let quote = self
            .rest
            .chars()
            .next()
            .filter(|c| *c == '\'' || *c == '"')?;
        let body = &self.rest[quote.len_utf8()..];
        let close = body.find(quote)?;
        let value = body[..close].to_string();
        self.rest = &body[close + quote.len_utf8()..];
        Some(value)
    }

    fn end(&mut self) -> Option<()> {
        self.skip_ws();
        self.rest.is_empty().then_some(())
    }
}

/// Serialize nodes back to the one-node-per-line bracket layout.
pub fn serialize_bracket(nodes: &[RstTreeNode]) -> String {
    let mut out = String::new();
    for n in nodes {
        out.push_str(&format!(
            "(({}, {}), '{}', '{}')\n",
            n.span.0, n.span.1, n.nuclearity, n.relation
        ));
    }
    out
}
