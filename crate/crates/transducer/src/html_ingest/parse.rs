use scraper::{Html, Node};

use super::dom::{DomNode, DomTree, NodeId};
use super::IngestError;

const SNIFF_WINDOW: usize = 1024;

/// Parses raw HTML bytes with HTML5 error-recovery semantics.
///
/// Never fails on malformed markup. Bytes are decoded as UTF-8 with lossy
/// replacement; a declared Latin-1 family charset is decoded byte-for-byte.
/// Any other declared charset, or a UTF-16 byte-order mark, is rejected.
pub fn parse_html(input: &[u8], source_url: Option<&str>) -> Result<DomTree, IngestError> {
    if let Some(url) = source_url {
        let parsed = url::Url::parse(url).map_err(|_| IngestError::InvalidSourceUrl(url.to_string()))?;
        if parsed.cannot_be_a_base() {
            return Err(IngestError::InvalidSourceUrl(url.to_string()));
        }
    }
    let text = decode(input)?;
    let doc = Html::parse_document(&text);

    let html_el = doc
        .tree
        .root()
        .children()
        .find(|c| matches!(c.value(), Node::Element(_)))
        .expect("html5 tree construction always yields an html element");

    let mut next_id = 0u32;
    let root = convert(html_el, &mut next_id).expect("html element converts");
    Ok(DomTree::new(root, source_url.map(str::to_string)))
}

fn convert(node: ego_tree::NodeRef<'_, Node>, next_id: &mut u32) -> Option<DomNode> {
    let id = NodeId(*next_id);
    let mut out = match node.value() {
        Node::Element(el) => {
            let mut attrs: Vec<(String, String)> = Vec::new();
            for (name, value) in el.attrs() {
                let name = name.to_ascii_lowercase();
                if !attrs.iter().any(|(k, _)| *k == name) {
                    attrs.push((name, value.to_string()));
                }
            }
            DomNode::element(id, el.name().to_ascii_lowercase(), attrs)
        }
        Node::Text(t) => DomNode::text(id, &**t),
        Node::Comment(c) => DomNode::comment(id, &**c),
        _ => return None,
    };
    *next_id += 1;
    for child in node.children() {
        if let Some(c) = convert(child, next_id) {
            out.children.push(c);
        }
    }
    Some(out)
}

fn decode(input: &[u8]) -> Result<String, IngestError> {
    if input.starts_with(&[0xFE, 0xFF]) || input.starts_with(&[0xFF, 0xFE]) {
        return Err(IngestError::UnsupportedEncoding("utf-16".into()));
    }
    let input = input.strip_prefix(&[0xEF, 0xBB, 0xBF]).unwrap_or(input);
    match sniff_charset(&input[..input.len().min(SNIFF_WINDOW)]) {
        None => Ok(String::from_utf8_lossy(input).into_owned()),
        Some(cs) => match cs.as_str() {
            "utf-8" | "utf8" | "us-ascii" | "ascii" | "unicode-1-1-utf-8" => {
                Ok(String::from_utf8_lossy(input).into_owned())
            }
            "iso-8859-1" | "latin1" | "l1" | "windows-1252" | "cp1252" => {
                Ok(input.iter().map(|&b| b as char).collect())
            }
            other => Err(IngestError::UnsupportedEncoding(other.to_string())),
        },
    }
}

/// Finds a `charset=` declaration in the prescan window.
fn sniff_charset(window: &[u8]) -> Option<String> {
    let lower: Vec<u8> = window.iter().map(u8::to_ascii_lowercase).collect();
    let needle = b"charset";
    let pos = lower.windows(needle.len()).position(|w| w == needle)?;
    let mut i = pos + needle.len();
    while i < lower.len() && lower[i].is_ascii_whitespace() {
        i += 1;
    }
    if lower.get(i) != Some(&b'=') {
        return None;
    }
    i += 1;
    while i < lower.len() && (lower[i].is_ascii_whitespace() || lower[i] == b'"' || lower[i] == b'\'') {
        i += 1;
    }
    let start = i;
    while i < lower.len() && (lower[i].is_ascii_alphanumeric() || b"-_:.".contains(&lower[i])) {
        i += 1;
    }
    (i > start).then(|| String::from_utf8_lossy(&lower[start..i]).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::html_ingest::dom::NodeData;

    fn tags(node: &DomNode) -> Vec<String> {
        node.children
            .iter()
            .filter_map(|c| c.tag().map(str::to_string))
            .collect()
    }

    #[test]
    fn minimal_document_gets_implied_elements() {
        let t = parse_html(b"<p>hi</p>", None).unwrap();
        assert_eq!(t.root.tag(), Some("html"));
        assert_eq!(tags(&t.root), ["head", "body"]);
        let body = t.body().unwrap();
        assert_eq!(body.children.len(), 1);
        let p = &body.children[0];
        assert!(p.is_tag("p"));
        assert_eq!(p.children[0].text_content(), Some("hi"));
    }

    #[test]
    fn empty_input_is_skeleton() {
        let t = parse_html(b"", None).unwrap();
        assert!(t.node_count() >= 3);
        assert_eq!(tags(&t.root), ["head", "body"]);
    }

    // Tree construction: a <div> start tag closes an open <p> in button scope,
    // so the inner div becomes a sibling of the p inside the outer div.
    #[test]
    fn unclosed_tags_recover() {
        let t = parse_html(b"<div><p>a<div>b</div>", None).unwrap();
        let body = t.body().unwrap();
        assert_eq!(tags(body), ["div"]);
        let outer = &body.children[0];
        assert_eq!(tags(outer), ["p", "div"]);
        assert_eq!(outer.children[0].visible_text(), "a");
        assert_eq!(outer.children[1].visible_text(), "b");
    }

    #[test]
    fn ids_are_document_order() {
        let t = parse_html(b"<div><p>a</p><!--c--><span>b</span></div>", None).unwrap();
        let ids = t.node_ids();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert_eq!(ids.len(), t.node_count());
        assert_eq!(ids.first(), Some(&NodeId(0)));
    }

    #[test]
    fn comments_are_preserved() {
        let t = parse_html(b"<body><!-- note --><p>x</p></body>", None).unwrap();
        let body = t.body().unwrap();
        assert!(matches!(&body.children[0].data, NodeData::Comment { text } if text == " note "));
    }

    #[test]
    fn attribute_names_lowercase_and_unique() {
        let t = parse_html(b"<p CLASS=a class=b ID=x>t</p>", None).unwrap();
        let p = &t.body().unwrap().children[0];
        assert_eq!(
            p.attrs(),
            &[
                ("class".to_string(), "a".to_string()),
                ("id".to_string(), "x".to_string())
            ]
        );
    }

    #[test]
    fn unsupported_charset_is_rejected() {
        let err = parse_html(b"<meta charset=\"shift_jis\"><p>x</p>", None).unwrap_err();
        assert!(matches!(err, IngestError::UnsupportedEncoding(cs) if cs == "shift_jis"));
        assert!(parse_html(&[0xFF, 0xFE, b'<', 0], None).is_err());
    }

    #[test]
    fn latin1_declared_is_decoded() {
        let t = parse_html(b"<meta charset=iso-8859-1><p>caf\xe9</p>", None).unwrap();
        assert_eq!(t.body().unwrap().visible_text(), "caf\u{e9}");
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let t = parse_html(b"<p>a\xffb</p>", None).unwrap();
        assert_eq!(t.body().unwrap().visible_text(), "a\u{fffd}b");
    }

    #[test]
    fn source_url_must_be_absolute() {
        assert!(parse_html(b"", Some("/relative")).is_err());
        let t = parse_html(b"", Some("http://h/booking.html")).unwrap();
        assert_eq!(t.source_url.as_deref(), Some("http://h/booking.html"));
    }
}
