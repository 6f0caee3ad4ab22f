use std::fs;
use std::path::PathBuf;

use affordance_transducer::dom_transducer::{transduce, TaskContext, TransducerConfig};
use affordance_transducer::test_support::boilerplate_share;

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/boilerplate");
    let mut pages: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "html"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    pages.sort();
    pages
}

#[test]
fn corpus_is_mostly_boilerplate() {
    let pages = corpus();
    assert_eq!(pages.len(), 5);
    for (name, html) in &pages {
        let share = boilerplate_share(html);
        assert!((0.80..=0.90).contains(&share), "{name}: boilerplate share {share:.3}");
    }
}

#[test]
fn transduction_removes_the_boilerplate() {
    let cfg = TransducerConfig::default();
    let mut ratios = Vec::new();
    for (name, html) in corpus() {
        let pam = transduce(html.as_bytes(), None, &TaskContext::new("find the main content"), &cfg).unwrap();
        println!("{name}: {:.3}", pam.stats.reduction_ratio);
        assert!(
            pam.stats.reduction_ratio >= 0.80,
            "{name}: {}",
            pam.stats.reduction_ratio
        );
        ratios.push(pam.stats.reduction_ratio);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(mean >= 0.85, "mean {mean:.3}");
}
