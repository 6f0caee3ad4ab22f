use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::model::AffordanceCatalog;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameSets {
    pub properties: BTreeSet<String>,
    pub actions: BTreeSet<String>,
    pub events: BTreeSet<String>,
}

impl NameSets {
    pub fn is_empty(&self) -> bool {
        self.properties.is_empty() && self.actions.is_empty() && self.events.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub added: NameSets,
    pub removed: NameSets,
    pub modified: NameSets,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.modified.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("catalogs describe different things: `{old}` vs `{new}`")]
pub struct IdMismatch {
    pub old: String,
    pub new: String,
}

pub fn catalog_diff(old: &AffordanceCatalog, new: &AffordanceCatalog) -> Result<ChangeSet, IdMismatch> {
    if old.thing_id != new.thing_id {
        return Err(IdMismatch {
            old: old.thing_id.clone(),
            new: new.thing_id.clone(),
        });
    }
    let mut cs = ChangeSet::default();
    diff_map(&old.properties, &new.properties, |cs| &mut cs.properties, &mut cs);
    diff_map(&old.actions, &new.actions, |cs| &mut cs.actions, &mut cs);
    diff_map(&old.events, &new.events, |cs| &mut cs.events, &mut cs);
    Ok(cs)
}

fn diff_map<T: PartialEq>(
    old: &indexmap::IndexMap<String, T>,
    new: &indexmap::IndexMap<String, T>,
    pick: impl Fn(&mut NameSets) -> &mut BTreeSet<String>,
    cs: &mut ChangeSet,
) {
    for (name, a) in old {
        match new.get(name) {
            None => {
                pick(&mut cs.removed).insert(name.clone());
            }
            Some(b) if a != b => {
                pick(&mut cs.modified).insert(name.clone());
            }
            Some(_) => {}
        }
    }
    for name in new.keys() {
        if !old.contains_key(name) {
            pick(&mut cs.added).insert(name.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::td_affordances::parse_td;

    const BASE: &str = r#"{"title":"Room","id":"urn:room","base":"http://h/",
        "properties":{"thermostat":{"type":"number","forms":[{"href":"t"}]}},
        "actions":{"setTemperature":{"forms":[{"href":"s"}]}}}"#;

    fn cat(doc: &str) -> AffordanceCatalog {
        parse_td(doc).unwrap().catalog
    }

    #[test]
    fn identity() {
        assert!(catalog_diff(&cat(BASE), &cat(BASE)).unwrap().is_empty());
    }

    #[test]
    fn added_action() {
        let new = BASE.replace(r#""actions":{"#, r#""actions":{"reboot":{"forms":[{"href":"r"}]},"#);
        let cs = catalog_diff(&cat(BASE), &cat(&new)).unwrap();
        assert_eq!(cs.added.actions, ["reboot".to_string()].into());
        let back = catalog_diff(&cat(&new), &cat(BASE)).unwrap();
        assert_eq!(back.removed, cs.added);
        assert!(cs.modified.is_empty() && back.modified.is_empty());
    }

    #[test]
    fn content_type_change_is_a_modification() {
        let new = BASE.replace(r#"{"href":"t"}"#, r#"{"href":"t","contentType":"text/plain"}"#);
        let cs = catalog_diff(&cat(BASE), &cat(&new)).unwrap();
        assert_eq!(cs.modified.properties, ["thermostat".to_string()].into());
        assert!(cs.added.is_empty() && cs.removed.is_empty());
    }

    #[test]
    fn different_things() {
        let other = BASE.replace("urn:room", "urn:other");
        assert!(catalog_diff(&cat(BASE), &cat(&other)).is_err());
    }
}
