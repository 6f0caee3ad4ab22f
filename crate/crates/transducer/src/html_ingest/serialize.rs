use super::dom::{DomNode, DomTree, NodeData};

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "keygen", "link", "meta", "param", "source", "track",
    "wbr",
];

const RAW_TEXT_ELEMENTS: &[&str] = &[
    "script",
    "style",
    "xmp",
    "iframe",
    "noembed",
    "noframes",
    "plaintext",
    "noscript",
];

// The parser drops one newline directly after these start tags.
const LEADING_NEWLINE_ELEMENTS: &[&str] = &["pre", "textarea", "listing"];

pub fn is_void_element(tag: &str) -> bool {
    VOID_ELEMENTS.contains(&tag)
}

/// Serializes a tree to HTML. Re-parsing the output yields a structurally
/// equal tree for any tree produced by `parse_html`.
pub fn serialize(tree: &DomTree) -> String {
    serialize_node(&tree.root)
}

pub fn serialize_node(node: &DomNode) -> String {
    let mut out = String::new();
    write_node(node, None, &mut out);
    out
}

/// Serializes `node` while skipping any descendant for which `skip` is true.
pub fn serialize_node_filtered(node: &DomNode, skip: &dyn Fn(&DomNode) -> bool) -> String {
    let mut out = String::new();
    write_filtered(node, None, skip, &mut out);
    out
}

fn write_node(node: &DomNode, parent_tag: Option<&str>, out: &mut String) {
    write_filtered(node, parent_tag, &|_| false, out)
}

fn write_filtered(node: &DomNode, parent_tag: Option<&str>, skip: &dyn Fn(&DomNode) -> bool, out: &mut String) {
    match &node.data {
        NodeData::Text { text } => {
            if parent_tag.is_some_and(|t| RAW_TEXT_ELEMENTS.contains(&t)) {
                out.push_str(text);
            } else {
                escape_text(text, out);
            }
        }
        NodeData::Comment { text } => {
            out.push_str("<!--");
            out.push_str(text);
            out.push_str("-->");
        }
        NodeData::Element { tag, attrs } => {
            out.push('<');
            out.push_str(tag);
            for (name, value) in attrs {
                out.push(' ');
                out.push_str(name);
                out.push_str("=\"");
                escape_attr(value, out);
                out.push('"');
            }
            out.push('>');
            if is_void_element(tag) {
                return;
            }
            if LEADING_NEWLINE_ELEMENTS.contains(&tag.as_str()) {
                let first_text = node.children.iter().find(|c| !skip(c)).and_then(DomNode::text_content);
                if first_text.is_some_and(|t| t.starts_with('\n')) {
                    out.push('\n');
                }
            }
            for child in &node.children {
                if !skip(child) {
                    write_filtered(child, Some(tag), skip, out);
                }
            }
            out.push_str("</");
            out.push_str(tag);
            out.push('>');
        }
    }
}

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            c => out.push(c),
        }
    }
}

fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            c => out.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::html_ingest::parse_html;

    fn roundtrip(src: &str) -> String {
        serialize(&parse_html(src.as_bytes(), None).unwrap())
    }

    #[test]
    fn skeleton() {
        assert_eq!(roundtrip(""), "<html><head></head><body></body></html>");
    }

    #[test]
    fn attributes_verbatim() {
        let s = roundtrip(r#"<p class="x">hi</p>"#);
        assert!(s.contains(r#"class="x""#), "{s}");
        assert!(s.contains(r#"<p class="x">hi</p>"#));
    }

    #[test]
    fn escapes_text_and_attributes() {
        let s = roundtrip(r#"<p title='a"b&c'>1 &lt; 2 &amp; 3</p>"#);
        assert!(s.contains(r#"title="a&quot;b&amp;c""#), "{s}");
        assert!(s.contains("1 &lt; 2 &amp; 3"), "{s}");
    }

    #[test]
    fn raw_text_is_not_escaped() {
        let s = roundtrip("<script>if (a < b && c) {}</script>");
        assert!(s.contains("<script>if (a < b && c) {}</script>"), "{s}");
    }

    #[test]
    fn void_elements_have_no_end_tag() {
        let s = roundtrip(r#"<input type="text"><br>"#);
        assert!(s.contains(r#"<input type="text"><br>"#), "{s}");
        assert!(!s.contains("</input>"));
    }

    #[test]
    fn pre_leading_newline_survives() {
        let once = parse_html(b"<pre>\n\nx</pre>", None).unwrap();
        let twice = parse_html(serialize(&once).as_bytes(), None).unwrap();
        assert!(once.structurally_eq(&twice));
    }
}
