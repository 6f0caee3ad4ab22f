//! Random DOM trees and corpus measurements for tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::html_ingest::{count_tokens, is_void_element, DomNode, DomTree, NodeId};

#[derive(Debug, Clone, Copy)]
pub struct TreeShape {
    pub max_depth: usize,
    pub max_fanout: usize,
    /// Probability that a generated element is an interactive one.
    pub interactive_rate: f64,
}

impl Default for TreeShape {
    fn default() -> Self {
        TreeShape {
            max_depth: 8,
            max_fanout: 6,
            interactive_rate: 0.2,
        }
    }
}

const CONTAINERS: &[&str] = &[
    "div", "section", "article", "nav", "header", "footer", "main", "aside", "form", "ul", "ol",
];
const INLINE: &[&str] = &["p", "span", "b", "em", "h1", "h2", "li", "label", "strong"];
const NOISE: &[&str] = &["script", "style", "noscript", "svg", "iframe"];
const WORDS: &[&str] = &[
    "book",
    "hotel",
    "room",
    "smart",
    "controls",
    "price",
    "night",
    "guest",
    "privacy",
    "cookie",
    "tracker",
    "thermostat",
    "a&b",
    "x<y",
    "say \"hi\"",
    "brace}",
    "back\\slash",
    "caf\u{e9}",
    "50%",
    "k=v;",
    "path/to",
];
const INPUT_TYPES: &[&str] = &[
    "", "text", "email", "password", "search", "number", "checkbox", "radio", "submit", "button", "hidden", "date",
];

fn words(rng: &mut impl Rng, n: usize) -> String {
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    shape: TreeShape,
    next: u32,
    in_form: bool,
}

impl<R: Rng> Gen<'_, R> {
    fn id(&mut self) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        id
    }

    fn attrs(&mut self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if self.rng.gen_bool(0.3) {
            out.push(("id".into(), format!("n{}", self.rng.gen_range(0..1000))));
        }
        if self.rng.gen_bool(0.3) {
            let n = self.rng.gen_range(1..3);
            let classes: Vec<String> = (0..n).map(|i| format!("c{}{}", i, self.rng.gen_range(0..9))).collect();
            out.push(("class".into(), classes.join(" ")));
        }
        if self.rng.gen_bool(0.15) {
            out.push(("onclick".into(), "track()".into()));
        }
        if self.rng.gen_bool(0.15) {
            out.push(("title".into(), words(self.rng, 2)));
        }
        out
    }

    fn interactive(&mut self, depth: usize) -> DomNode {
        let id = self.id();
        // Links and buttons need one more level for their text, selects two.
        let room = self.shape.max_depth.saturating_sub(depth);
        let kinds: &[u8] = match room {
            0 => &[2, 4],
            1 => &[0, 1, 2, 4],
            _ => &[0, 1, 2, 3, 4],
        };
        let kind = *kinds.choose(self.rng).unwrap();
        match kind {
            0 => {
                let mut attrs = vec![("href".to_string(), format!("/p/{}", self.rng.gen_range(0..50)))];
                if self.rng.gen_bool(0.2) {
                    attrs.push(("type".into(), "application/td+json".into()));
                }
                let mut a = DomNode::element(id, "a", attrs);
                let t = self.id();
                a.children.push(DomNode::text(t, words(self.rng, 2)));
                a
            }
            1 => {
                let mut b = DomNode::element(id, "button", vec![]);
                let t = self.id();
                b.children.push(DomNode::text(t, words(self.rng, 1)));
                b
            }
            2 => {
                let ty = *INPUT_TYPES.choose(self.rng).unwrap();
                let mut attrs = vec![("name".to_string(), words(self.rng, 1))];
                if !ty.is_empty() {
                    attrs.push(("type".into(), ty.into()));
                }
                DomNode::element(id, "input", attrs)
            }
            3 => {
                let mut s = DomNode::element(id, "select", vec![("name".into(), "r".into())]);
                for _ in 0..self.rng.gen_range(1..3) {
                    let o = self.id();
                    let mut opt = DomNode::element(o, "option", vec![]);
                    let t = self.id();
                    opt.children.push(DomNode::text(t, words(self.rng, 1)));
                    s.children.push(opt);
                }
                s
            }
            _ => DomNode::element(id, "textarea", vec![("placeholder".into(), words(self.rng, 1))]),
        }
    }

    fn node(&mut self, depth: usize) -> DomNode {
        let roll: f64 = self.rng.gen();
        if roll < 0.25 {
            let id = self.id();
            let n = self.rng.gen_range(1..12);
            return DomNode::text(id, words(self.rng, n));
        }
        if roll < 0.25 + self.shape.interactive_rate {
            return self.interactive(depth);
        }
        if roll < 0.30 + self.shape.interactive_rate {
            let tag = *NOISE.choose(self.rng).unwrap();
            let id = self.id();
            let mut n = DomNode::element(id, tag, vec![]);
            if depth < self.shape.max_depth {
                let t = self.id();
                n.children.push(DomNode::text(t, "var x = 1; track(x);"));
            }
            return n;
        }
        let mut tag = if self.rng.gen_bool(0.5) {
            *CONTAINERS.choose(self.rng).unwrap()
        } else {
            *INLINE.choose(self.rng).unwrap()
        };
        // The HTML parser refuses nested forms.
        if tag == "form" && self.in_form {
            tag = "div";
        }
        let id = self.id();
        let attrs = self.attrs();
        let mut el = DomNode::element(id, tag, attrs);
        if depth < self.shape.max_depth && !is_void_element(tag) {
            let outer = self.in_form;
            self.in_form |= tag == "form";
            let n = self.rng.gen_range(0..=self.shape.max_fanout);
            for _ in 0..n {
                let child = self.node(depth + 1);
                el.children.push(child);
            }
            self.in_form = outer;
        }
        el
    }
}

/// A full document: `html > (head > title) + body > random content`.
pub fn random_document(rng: &mut impl Rng, shape: TreeShape) -> DomTree {
    let mut g = Gen {
        rng,
        shape,
        next: 0,
        in_form: false,
    };
    let mut html = DomNode::element(g.id(), "html", vec![]);
    let mut head = DomNode::element(g.id(), "head", vec![]);
    let mut title = DomNode::element(g.id(), "title", vec![]);
    let t = g.id();
    title.children.push(DomNode::text(t, words(g.rng, 2)));
    head.children.push(title);
    let mut body = DomNode::element(g.id(), "body", vec![]);
    let n = g.rng.gen_range(0..=shape.max_fanout);
    for _ in 0..n {
        let child = g.node(3);
        body.children.push(child);
    }
    html.children.push(head);
    html.children.push(body);
    DomTree::new(html, None)
}

/// A random element subtree of at most `shape.max_depth` levels.
pub fn random_tree(rng: &mut impl Rng, shape: TreeShape) -> DomTree {
    let mut g = Gen {
        rng,
        shape,
        next: 0,
        in_form: false,
    };
    let tag = *CONTAINERS.choose(g.rng).unwrap();
    g.in_form = tag == "form";
    let mut root = DomNode::element(g.id(), tag, vec![]);
    let n = g.rng.gen_range(1..=shape.max_fanout);
    for _ in 0..n {
        let child = g.node(2);
        root.children.push(child);
    }
    DomTree::new(root, None)
}

/// Element-only view of a subtree: tags, attributes and nesting. Attributes
/// are sorted by name since their order carries no meaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub tag: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Skeleton>,
}

pub fn skeleton(node: &DomNode) -> Skeleton {
    let mut attrs = node.attrs().to_vec();
    attrs.sort();
    Skeleton {
        tag: node.tag().unwrap_or_default().to_string(),
        attrs,
        children: node.children.iter().filter(|c| c.is_element()).map(skeleton).collect(),
    }
}

/// Tokens outside script, style, noscript, svg, iframe and template
/// elements, comments, and link/meta tags, found by plain string search.
pub fn content_tokens(html: &str) -> u64 {
    let lower = html.to_ascii_lowercase();
    let mut kept = String::new();
    let mut i = 0;
    'outer: while i < html.len() {
        let rest = &lower[i..];
        if rest.starts_with("<!--") {
            i += rest.find("-->").map_or(rest.len(), |e| e + 3);
            continue;
        }
        for tag in ["script", "style", "noscript", "svg", "iframe", "template"] {
            let open = format!("<{tag}");
            if rest.starts_with(&open) && rest[open.len()..].starts_with(|c: char| c == '>' || c.is_whitespace()) {
                let close = format!("</{tag}>");
                i += rest.find(&close).map_or(rest.len(), |e| e + close.len());
                continue 'outer;
            }
        }
        for tag in ["<link", "<meta"] {
            if rest.starts_with(tag) {
                i += rest.find('>').map_or(rest.len(), |e| e + 1);
                continue 'outer;
            }
        }
        let c = html[i..].chars().next().unwrap();
        kept.push(c);
        i += c.len_utf8();
    }
    count_tokens(&kept).get()
}

/// Fraction of the page's tokens that [`content_tokens`] strips.
pub fn boilerplate_share(html: &str) -> f64 {
    let raw = count_tokens(html).get();
    if raw == 0 {
        return 0.0;
    }
    1.0 - content_tokens(html) as f64 / raw as f64
}
