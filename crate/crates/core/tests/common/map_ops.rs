//! Random operation sequences against a cognitive map, checked after every
//! step against a brute-force oracle.

use affordance_core::cognitive_map::{AffordanceQuery, CognitiveMap, HitKind, MapError, Percept};
use affordance_core::td_affordances::parse_td;
use affordance_transducer::dom_transducer::{transduce, TaskContext, TransducerConfig};
use affordance_transducer::html_ingest::serialize;
use affordance_transducer::test_support::{random_document, TreeShape};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map};

const PAGES: &[&str] = &[
    "http://a.test/",
    "http://a.test/p2",
    "http://b.test/",
    "http://c.test/x?q=1",
];
const THINGS: &[&str] = &["urn:t:lamp", "urn:t:room", "urn:t:door"];
const NAMES: &[&str] = &[
    "thermostat",
    "setTemperature",
    "brightness",
    "toggle",
    "open",
    "overheat",
    "level",
];
const NEEDLES: &[&str] = &["temp", "TOG", "o", "room", "book", "zzz", "E"];

#[derive(Debug, Default, Clone, Copy)]
pub struct OpCounts {
    pub pam: usize,
    pub catalog: usize,
    pub query: usize,
    pub persist_load: usize,
    pub rejected: usize,
}

fn page(rng: &mut ChaCha8Rng, url: Option<&str>) -> affordance_transducer::dom_transducer::PageAffordanceModel {
    let shape = TreeShape {
        max_depth: 4,
        max_fanout: 4,
        interactive_rate: 0.3,
    };
    let html = serialize(&random_document(rng, shape));
    transduce(
        html.as_bytes(),
        url,
        &TaskContext::new("book a room"),
        &TransducerConfig::default(),
    )
    .unwrap()
}

fn thing_td(rng: &mut ChaCha8Rng, id: &str) -> String {
    let mut sections = [Map::new(), Map::new(), Map::new()];
    for name in NAMES {
        if rng.gen_bool(0.4) {
            let s = rng.gen_range(0..3);
            let form = match (s, rng.gen_range(0..3)) {
                (0, 1) => json!({"href": format!("p/{name}"), "op": "readproperty"}),
                (0, 2) => json!({"href": format!("p/{name}"), "op": ["writeproperty"]}),
                _ => json!({"href": format!("x/{name}")}),
            };
            sections[s].insert(name.to_string(), json!({"title": name.to_uppercase(), "forms": [form]}));
        }
    }
    let [p, a, e] = sections;
    json!({
        "@context": "https://www.w3.org/2022/wot/td/v1.1",
        "id": id, "title": id, "base": "http://things.test/",
        "securityDefinitions": {"nosec_sc": {"scheme": "nosec"}}, "security": "nosec_sc",
        "properties": p, "actions": a, "events": e,
    })
    .to_string()
}

fn query(rng: &mut ChaCha8Rng) -> AffordanceQuery {
    AffordanceQuery {
        text: rng.gen_bool(0.5).then(|| NEEDLES.choose(rng).unwrap().to_string()),
        kind: rng.gen_bool(0.4).then(|| *HitKind::ALL.choose(rng).unwrap()),
        origin: rng.gen_bool(0.3).then(|| {
            PAGES
                .iter()
                .chain(THINGS)
                .collect::<Vec<_>>()
                .choose(rng)
                .unwrap()
                .to_string()
        }),
    }
}

/// Hits computed straight from the stored percepts, as (origin, kind, name).
fn scan(map: &CognitiveMap, q: &AffordanceQuery) -> Vec<(String, HitKind, String)> {
    let mut out = Vec::new();
    for (origin, entry) in map.entries() {
        let items: Vec<(HitKind, String)> = match &entry.percept {
            Percept::Page(p) => p.affordances.iter().map(|a| (a.kind.into(), a.label.clone())).collect(),
            Percept::Thing(c) => c
                .properties
                .keys()
                .map(|n| (HitKind::Property, n.clone()))
                .chain(c.actions.keys().map(|n| (HitKind::Action, n.clone())))
                .chain(c.events.keys().map(|n| (HitKind::Event, n.clone())))
                .collect(),
            _ => Vec::new(),
        };
        for (kind, name) in items {
            let text_ok = q
                .text
                .as_deref()
                .is_none_or(|t| name.to_lowercase().contains(&t.to_lowercase()));
            if text_ok && q.kind.is_none_or(|k| k == kind) && q.origin.as_deref().is_none_or(|o| o == origin) {
                out.push((origin.clone(), kind, name));
            }
        }
    }
    out.sort();
    out
}

/// Runs `steps` random operations. Returns what ran, or the first failed
/// check.
pub fn run(seed: u64, steps: usize) -> Result<OpCounts, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("map.json");
    let mut map = CognitiveMap::new();
    let mut counts = OpCounts::default();
    for step in 0..steps {
        let before = map.version();
        let fail = |what: String| format!("seed {seed} step {step}: {what}");
        let mutated = match rng.gen_range(0..10) {
            0..=2 => {
                let url = if rng.gen_bool(0.1) {
                    None
                } else {
                    Some(*PAGES.choose(&mut rng).unwrap())
                };
                let prev = url.and_then(|u| map.get(u)).map(|e| e.revision);
                match map.upsert_pam(page(&mut rng, url)) {
                    Ok(rev) => {
                        if rev != prev.unwrap_or(0) + 1 {
                            return Err(fail(format!("revision {rev} after {prev:?}")));
                        }
                        counts.pam += 1;
                        true
                    }
                    Err(MapError::MissingOrigin(_)) if url.is_none() => {
                        counts.rejected += 1;
                        false
                    }
                    Err(e) => return Err(fail(e.to_string())),
                }
            }
            3..=5 => {
                let id = *THINGS.choose(&mut rng).unwrap();
                let mut c = parse_td(&thing_td(&mut rng, id))
                    .map_err(|e| fail(e.to_string()))?
                    .catalog;
                let anonymous = rng.gen_bool(0.1);
                if anonymous {
                    c.thing_id.clear();
                }
                let old = map.catalog(id).cloned();
                match map.upsert_catalog(c.clone()) {
                    Ok(_) => {
                        let diff = map.get(id).unwrap().last_diff.clone().unwrap();
                        if let Some(old) = old {
                            let want = affordance_core::td_affordances::catalog_diff(&old, &c).unwrap();
                            if diff != want {
                                return Err(fail("recorded diff differs from catalog_diff".into()));
                            }
                        }
                        counts.catalog += 1;
                        true
                    }
                    Err(MapError::MissingOrigin(_)) if anonymous => {
                        counts.rejected += 1;
                        false
                    }
                    Err(e) => return Err(fail(e.to_string())),
                }
            }
            6..=8 => {
                let q = query(&mut rng);
                match map.query(&q) {
                    Ok(hits) => {
                        let got: Vec<_> = hits
                            .iter()
                            .map(|h| (h.origin.clone(), h.kind, h.name.clone()))
                            .collect();
                        if got != scan(&map, &q) {
                            return Err(fail(format!("query {q:?} differs from scan")));
                        }
                        counts.query += 1;
                    }
                    Err(MapError::EmptyQuery) if q.is_empty() => counts.rejected += 1,
                    Err(e) => return Err(fail(e.to_string())),
                }
                false
            }
            _ => {
                map.persist(&path).map_err(|e| fail(e.to_string()))?;
                let loaded = CognitiveMap::load(&path).map_err(|e| fail(e.to_string()))?;
                if loaded != map {
                    return Err(fail("load(persist(m)) != m".into()));
                }
                map = loaded;
                counts.persist_load += 1;
                false
            }
        };
        if map.index() != map.rebuild_index() {
            return Err(fail("index differs from rebuild".into()));
        }
        let after = map.version();
        if mutated && after <= before || !mutated && after != before {
            return Err(fail(format!("version {before} -> {after}, mutated={mutated}")));
        }
    }
    Ok(counts)
}
