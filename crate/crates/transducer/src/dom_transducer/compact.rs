//! Emmet-style compact encoding of a DOM tree.
//!
//! Grammar (whitespace is only allowed inside brackets, braces and quotes):
//!
//! ```text
//! abbrev    := item                          one root element
//! sequence  := item ('+' item)*
//! item      := '(' sequence ')' | element | '{' text '}'
//! element   := ident ('#' ident | '.' ident | '[' attr* ']')* ('{' text '}')? ('>' sequence)?
//! attr      := ident ('=' ( '"' quoted '"' | bare ))?
//! ```
//!
//! `>` binds to the element before it, so `a>b+c>d` puts `d` under `c`.
//! Inside identifiers, quoted values and text, `\` escapes the next
//! character. A `{text}` right after an element is its first text child; a
//! bare `{text}` item is a text node among siblings. Text is whitespace
//! collapsed and truncated to [`TEXT_CHARS`] characters, the last being `…`. Comments
//! and whitespace-only text are not encoded.

use serde::{Deserialize, Serialize};

use crate::html_ingest::{count_tokens, DomNode, DomTree, NodeData, NodeId, TokenCount};

pub const TEXT_CHARS: usize = 80;
pub const TRUNCATION_MARKER: char = '…';

const SPECIAL: &[char] = &['#', '.', '[', ']', '{', '}', '(', ')', '>', '+', '\\', '"', '='];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactEncoding {
    pub text: String,
    pub token_count: TokenCount,
}

impl CompactEncoding {
    pub fn new(text: String) -> Self {
        let token_count = count_tokens(&text);
        CompactEncoding { text, token_count }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("compact syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    /// Byte offset into the abbreviation.
    pub offset: usize,
    pub message: String,
}

/// Normalized text as it appears in an encoding, or `None` when the text is
/// whitespace only.
pub fn encoded_text(raw: &str) -> Option<String> {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    if collapsed.is_empty() {
        return None;
    }
    if collapsed.chars().count() > TEXT_CHARS {
        let mut t: String = collapsed.chars().take(TEXT_CHARS - 1).collect();
        t.push(TRUNCATION_MARKER);
        Some(t)
    } else {
        Some(collapsed)
    }
}

pub fn encode_compact(tree: &DomTree) -> CompactEncoding {
    let mut out = String::new();
    encode_element(&tree.root, &mut out);
    CompactEncoding::new(out)
}

enum Item<'a> {
    Element(&'a DomNode),
    Text(String),
}

fn items(children: &[DomNode]) -> Vec<Item<'_>> {
    children
        .iter()
        .filter_map(|c| match &c.data {
            NodeData::Element { .. } => Some(Item::Element(c)),
            NodeData::Text { text } => encoded_text(text).map(Item::Text),
            NodeData::Comment { .. } => None,
        })
        .collect()
}

fn push_escaped(s: &str, extra: &[char], out: &mut String) {
    for c in s.chars() {
        if c == '\\' || extra.contains(&c) {
            out.push('\\');
        }
        out.push(c);
    }
}

fn push_ident(s: &str, out: &mut String) {
    for c in s.chars() {
        if SPECIAL.contains(&c) || c.is_whitespace() {
            out.push('\\');
        }
        out.push(c);
    }
}

fn is_simple_ident(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| SPECIAL.contains(&c) || c.is_whitespace())
}

fn encode_element(node: &DomNode, out: &mut String) {
    let NodeData::Element { tag, attrs } = &node.data else {
        unreachable!("encode_element called on a non-element");
    };
    push_ident(tag, out);

    let mut bracket: Vec<&(String, String)> = Vec::new();
    for attr in attrs {
        let (name, value) = (attr.0.as_str(), attr.1.as_str());
        match name {
            "id" if is_simple_ident(value) => {
                out.push('#');
                out.push_str(value);
            }
            "class" if !value.is_empty() && value.split(' ').all(is_simple_ident) => {
                for cls in value.split(' ') {
                    out.push('.');
                    out.push_str(cls);
                }
            }
            _ => bracket.push(attr),
        }
    }
    if !bracket.is_empty() {
        out.push('[');
        for (i, (name, value)) in bracket.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            push_ident(name, out);
            out.push_str("=\"");
            push_escaped(value, &['"'], out);
            out.push('"');
        }
        out.push(']');
    }

    let mut rest = items(&node.children);
    if let Some(Item::Text(_)) = rest.first() {
        if let Item::Text(t) = rest.remove(0) {
            push_text(&t, out);
        }
    }
    if !rest.is_empty() {
        out.push('>');
        encode_sequence(&rest, out);
    }
}

/// Whether the element's encoding ends in a `>` child sequence.
fn has_child_sequence(el: &DomNode) -> bool {
    let it = items(&el.children);
    match it.first() {
        Some(Item::Text(_)) => it.len() > 1,
        Some(Item::Element(_)) => true,
        None => false,
    }
}

fn push_text(t: &str, out: &mut String) {
    out.push('{');
    push_escaped(t, &['}'], out);
    out.push('}');
}

fn encode_sequence(items: &[Item<'_>], out: &mut String) {
    let last = items.len() - 1;
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push('+');
        }
        match item {
            Item::Text(t) => push_text(t, out),
            Item::Element(el) => {
                if has_child_sequence(el) && i != last {
                    out.push('(');
                    encode_element(el, out);
                    out.push(')');
                } else {
                    encode_element(el, out);
                }
            }
        }
    }
}

/// Parses an abbreviation back into a tree skeleton with fresh ids.
pub fn decode_compact(enc: &CompactEncoding) -> Result<DomTree, SyntaxError> {
    decode_str(&enc.text)
}

pub fn decode_str(src: &str) -> Result<DomTree, SyntaxError> {
    let mut p = Parser { src, pos: 0 };
    let root = p.item()?;
    if p.pos < src.len() {
        return Err(p.error(match p.peek() {
            Some('+') => "abbreviation must have a single root",
            _ => "unexpected character",
        }));
    }
    let root = match root {
        Decoded::Element(node) => node,
        Decoded::Text(_) => {
            return Err(SyntaxError {
                offset: 0,
                message: "root must be an element".into(),
            })
        }
    };
    let mut root = root;
    let mut next = 0;
    renumber(&mut root, &mut next);
    Ok(DomTree::new(root, None))
}

fn renumber(node: &mut DomNode, next: &mut u32) {
    node.id = NodeId(*next);
    *next += 1;
    for c in &mut node.children {
        renumber(c, next);
    }
}

enum Decoded {
    Element(DomNode),
    Text(String),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, message: &str) -> SyntaxError {
        SyntaxError {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, want: char) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(_) => Err(self.error(&format!("expected '{want}'"))),
            None => Err(self.error(&format!("unexpected end, expected '{want}'"))),
        }
    }

    fn sequence(&mut self) -> Result<Vec<Decoded>, SyntaxError> {
        let mut out = vec![self.item()?];
        while self.peek() == Some('+') {
            self.bump();
            out.push(self.item()?);
        }
        Ok(out)
    }

    fn item(&mut self) -> Result<Decoded, SyntaxError> {
        match self.peek() {
            Some('(') => {
                let open = self.pos;
                self.bump();
                let mut seq = self.sequence()?;
                self.expect(')')?;
                if seq.len() != 1 {
                    return Err(SyntaxError {
                        offset: open,
                        message: "a group must hold exactly one item".into(),
                    });
                }
                Ok(seq.remove(0))
            }
            Some('{') => Ok(Decoded::Text(self.braced()?)),
            Some(c) if !SPECIAL.contains(&c) || c == '\\' => self.element().map(Decoded::Element),
            Some(_) => Err(self.error("expected an element")),
            None => Err(self.error("unexpected end, expected an element")),
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c == '\\' {
                self.bump();
                match self.bump() {
                    Some(e) => out.push(e),
                    None => return Err(self.error("dangling escape")),
                }
            } else if c.is_whitespace() || SPECIAL.contains(&c) {
                break;
            } else {
                out.push(c);
                self.bump();
            }
        }
        if out.is_empty() {
            return Err(self.error("expected a name"));
        }
        Ok(out)
    }

    fn element(&mut self) -> Result<DomNode, SyntaxError> {
        let tag = self.ident()?;
        let mut id: Option<String> = None;
        let mut classes: Vec<String> = Vec::new();
        let mut attrs: Vec<(String, String)> = Vec::new();
        loop {
            match self.peek() {
                Some('#') => {
                    self.bump();
                    id = Some(self.ident()?);
                }
                Some('.') => {
                    self.bump();
                    classes.push(self.ident()?);
                }
                Some('[') => {
                    self.bump();
                    self.attr_list(&mut attrs)?;
                }
                _ => break,
            }
        }
        let mut all = Vec::new();
        if let Some(id) = id {
            all.push(("id".to_string(), id));
        }
        if !classes.is_empty() {
            all.push(("class".to_string(), classes.join(" ")));
        }
        for (k, v) in attrs {
            if !all.iter().any(|(n, _)| *n == k) {
                all.push((k, v));
            }
        }
        let mut node = DomNode::element(NodeId(0), tag, all);
        if self.peek() == Some('{') {
            let t = self.braced()?;
            node.children.push(DomNode::text(NodeId(0), t));
        }
        if self.peek() == Some('>') {
            self.bump();
            for child in self.sequence()? {
                node.children.push(match child {
                    Decoded::Element(e) => e,
                    Decoded::Text(t) => DomNode::text(NodeId(0), t),
                });
            }
        }
        Ok(node)
    }

    fn attr_list(&mut self, attrs: &mut Vec<(String, String)>) -> Result<(), SyntaxError> {
        loop {
            while self.peek().is_some_and(char::is_whitespace) {
                self.bump();
            }
            match self.peek() {
                Some(']') => {
                    self.bump();
                    return Ok(());
                }
                None => return Err(self.error("unterminated attribute list")),
                _ => {}
            }
            let name = self.ident()?;
            let value = if self.peek() == Some('=') {
                self.bump();
                if self.peek() == Some('"') {
                    self.bump();
                    self.until('"')?
                } else {
                    let mut v = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_whitespace() || c == ']' {
                            break;
                        }
                        v.push(c);
                        self.bump();
                    }
                    v
                }
            } else {
                String::new()
            };
            attrs.push((name, value));
        }
    }

    fn braced(&mut self) -> Result<String, SyntaxError> {
        self.expect('{')?;
        self.until('}')
    }

    /// Reads escaped content up to and including the closing `end`.
    fn until(&mut self, end: char) -> Result<String, SyntaxError> {
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('\\') => match self.bump() {
                    Some(e) => out.push(e),
                    None => return Err(self.error("dangling escape")),
                },
                Some(c) if c == end => return Ok(out),
                Some(c) => out.push(c),
                None => return Err(self.error(&format!("unterminated, expected '{end}'"))),
            }
        }
    }
}
