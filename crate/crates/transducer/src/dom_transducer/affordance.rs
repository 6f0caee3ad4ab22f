use serde::{Deserialize, Serialize};

use crate::html_ingest::{DomNode, DomTree, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffordanceKind {
    Link,
    Button,
    TextInput,
    Select,
    Textarea,
    Form,
    Checkbox,
    Radio,
    Submit,
}

impl AffordanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AffordanceKind::Link => "link",
            AffordanceKind::Button => "button",
            AffordanceKind::TextInput => "text_input",
            AffordanceKind::Select => "select",
            AffordanceKind::Textarea => "textarea",
            AffordanceKind::Form => "form",
            AffordanceKind::Checkbox => "checkbox",
            AffordanceKind::Radio => "radio",
            AffordanceKind::Submit => "submit",
        }
    }
}

/// An interactive element of the page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffordanceNode {
    pub node_id: NodeId,
    pub kind: AffordanceKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_type_hint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel: Option<String>,
}

/// Maps an element to its affordance kind.
///
/// | element                                               | kind         |
/// |-------------------------------------------------------|--------------|
/// | `a[href]`                                             | `link`       |
/// | `button`, `input[type=button]`                        | `button`     |
/// | `input[type=submit]`                                  | `submit`     |
/// | `input` with no/empty type, `text`, `email`, `password`, `search`, `number` | `text_input` |
/// | `input[type=checkbox]`                                | `checkbox`   |
/// | `input[type=radio]`                                   | `radio`      |
/// | `select`                                              | `select`     |
/// | `textarea`                                            | `textarea`   |
/// | `form`                                                | `form`       |
///
/// Every other element (including `input[type=hidden]`) is not an affordance.
pub fn classify(node: &DomNode) -> Option<AffordanceKind> {
    let tag = node.tag()?;
    Some(match tag {
        "a" if node.attr("href").is_some() => AffordanceKind::Link,
        "button" => AffordanceKind::Button,
        "select" => AffordanceKind::Select,
        "textarea" => AffordanceKind::Textarea,
        "form" => AffordanceKind::Form,
        "input" => {
            let ty = node
                .attr("type")
                .map(|t| t.trim().to_ascii_lowercase())
                .unwrap_or_default();
            match ty.as_str() {
                "" | "text" | "email" | "password" | "search" | "number" => AffordanceKind::TextInput,
                "button" => AffordanceKind::Button,
                "submit" => AffordanceKind::Submit,
                "checkbox" => AffordanceKind::Checkbox,
                "radio" => AffordanceKind::Radio,
                _ => return None,
            }
        }
        _ => return None,
    })
}

pub fn is_interactive(node: &DomNode) -> bool {
    classify(node).is_some()
}

/// Label precedence: visible text, then `aria-label`, then `name`, then
/// `placeholder`. Visible text is descendant text for links and buttons and
/// the `value` of button-like inputs.
fn label_for(node: &DomNode, kind: AffordanceKind) -> String {
    let visible = match (node.tag(), kind) {
        (Some("a"), _) | (Some("button"), _) => node.visible_text(),
        (Some("input"), AffordanceKind::Button | AffordanceKind::Submit) => node
            .attr("value")
            .map(|v| v.split_whitespace().collect::<Vec<_>>().join(" "))
            .unwrap_or_default(),
        _ => String::new(),
    };
    if !visible.is_empty() {
        return visible;
    }
    ["aria-label", "name", "placeholder"]
        .iter()
        .filter_map(|a| node.attr(a))
        .map(str::trim)
        .find(|v| !v.is_empty())
        .unwrap_or_default()
        .to_string()
}

fn non_empty(v: Option<&str>) -> Option<String> {
    v.map(str::trim).filter(|s| !s.is_empty()).map(str::to_string)
}

pub fn affordance_for(node: &DomNode) -> Option<AffordanceNode> {
    let kind = classify(node)?;
    let target = match kind {
        AffordanceKind::Link => non_empty(node.attr("href")),
        AffordanceKind::Form => non_empty(node.attr("action")),
        _ => None,
    };
    let (media_type_hint, rel) = match kind {
        AffordanceKind::Link => (non_empty(node.attr("type")), non_empty(node.attr("rel"))),
        _ => (None, None),
    };
    Some(AffordanceNode {
        node_id: node.id,
        kind,
        label: label_for(node, kind),
        target,
        media_type_hint,
        rel,
    })
}

/// All affordances in document order.
pub fn extract_affordances(tree: &DomTree) -> Vec<AffordanceNode> {
    let mut out = Vec::new();
    tree.root.walk(&mut |n| {
        if let Some(a) = affordance_for(n) {
            out.push(a);
        }
    });
    out
}
