use std::fs;
use std::path::PathBuf;

use affordance_transducer::dom_transducer::{
    clean, decode_compact, encode_compact, transduce, transduce_traced, AffordanceKind, CleaningConfig, TaskContext,
    TransducerConfig,
};
use affordance_transducer::html_ingest::{count_tokens, parse_html, serialize};
use affordance_transducer::test_support::skeleton;

fn pages() -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/pages");
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "html"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn ten_pages_present() {
    assert_eq!(pages().len(), 10);
}

#[test]
fn serialize_is_a_fixpoint() {
    for (name, bytes) in pages() {
        let first = parse_html(&bytes, None).unwrap();
        let again = parse_html(serialize(&first).as_bytes(), None).unwrap();
        assert!(first.structurally_eq(&again), "{name}");
        assert_eq!(serialize(&first), serialize(&again), "{name}");
    }
}

#[test]
fn clean_is_idempotent_on_pages() {
    let cfg = CleaningConfig::default();
    for (name, bytes) in pages() {
        let once = clean(&parse_html(&bytes, None).unwrap(), &cfg);
        assert_eq!(clean(&once, &cfg), once, "{name}");
    }
}

#[test]
fn compact_roundtrip_on_raw_and_transduced_pages() {
    let ctx = TaskContext::new("book a hotel room");
    for (name, bytes) in pages() {
        let raw = parse_html(&bytes, None).unwrap();
        let out = transduce_traced(&bytes, None, &ctx, &TransducerConfig::default())
            .unwrap()
            .output;
        for tree in [raw, out] {
            let enc = encode_compact(&tree);
            let back = decode_compact(&enc).unwrap();
            assert_eq!(skeleton(&back.root), skeleton(&tree.root), "{name}");
            assert!(enc.token_count < count_tokens(&serialize(&tree)), "{name}");
        }
    }
}

#[test]
fn booking_page_model() {
    let (_, bytes) = pages().into_iter().find(|(n, _)| n.starts_with("01_")).unwrap();
    let pam = transduce(
        &bytes,
        Some("http://hotel.test/book"),
        &TaskContext::new("book a hotel room"),
        &TransducerConfig::default(),
    )
    .unwrap();
    assert_eq!(pam.title, "Grand Hotel Bologna - Book your stay");
    let controls = pam
        .affordances
        .iter()
        .find(|a| a.label == "Smart Room Controls")
        .unwrap();
    assert_eq!(controls.kind, AffordanceKind::Link);
    assert_eq!(controls.target.as_deref(), Some("/things/room1"));
    assert_eq!(controls.media_type_hint.as_deref(), Some("application/td+json"));
    assert!(pam
        .affordances
        .iter()
        .any(|a| a.kind == AffordanceKind::Form && a.target.as_deref() == Some("/book")));
    assert!(pam
        .affordances
        .iter()
        .any(|a| a.kind == AffordanceKind::Submit && a.label == "Book now"));
    assert!(!pam.compact.text.contains("dataLayer"));
    assert!(pam.stats.reduction_ratio > 0.0);
}

#[test]
fn malformed_page_still_transduces() {
    let (_, bytes) = pages().into_iter().find(|(n, _)| n.starts_with("08_")).unwrap();
    let pam = transduce(&bytes, None, &TaskContext::new(""), &TransducerConfig::default()).unwrap();
    assert_eq!(pam.title, "Broken page");
    assert!(pam.affordances.iter().any(|a| a.target.as_deref() == Some("/three")));
    assert_eq!(
        pam.affordances
            .iter()
            .filter(|a| a.kind == AffordanceKind::Form)
            .count(),
        1
    );
}
