//! Structural checks on documents. All problems are collected; nothing aborts
//! on the first failure.

use std::collections::{BTreeMap, HashMap};

use uuid::Uuid;

use super::document::{MrdiDocument, TypeNode};
use super::state::GlobalSerializerState;
use crate::error::Issue;

pub const ELEMENT_TAGS: &[&str] = &[
    "ZZRingElem",
    "QQFieldElem",
    "FpFieldElem",
    "PolyRingElem",
    "MPolyRingElem",
];
pub const RING_TAGS: &[&str] = &["ZZRing", "QQField", "FpField", "PolyRing", "MPolyRing"];
pub const CONTAINER_TAGS: &[&str] = &["Matrix", "Vector", "Tuple", "MonomialMap"];

pub fn is_known_tag(name: &str) -> bool {
    ELEMENT_TAGS.contains(&name) || RING_TAGS.contains(&name) || CONTAINER_TAGS.contains(&name)
}

/// Checks mode-key consistency, type tags, UUID resolvability within `_refs`,
/// and acyclicity of the reference graph.
pub fn validate_document(doc: &MrdiDocument) -> Result<(), Vec<Issue>> {
    validate_with(doc, None)
}

/// Like [`validate_document`], additionally resolving interprocess documents'
/// UUIDs against `global`.
pub fn validate_with(doc: &MrdiDocument, global: Option<&GlobalSerializerState>) -> Result<(), Vec<Issue>> {
    let mut issues = Vec::new();

    match (&doc.ns, &doc.refs) {
        (Some(_), None) => issues.push(Issue::new("/_refs", "mode violation: long-term document without `_refs`")),
        (None, Some(_)) => issues.push(Issue::new("/_refs", "mode violation: interprocess document carrying `_refs`")),
        _ => {}
    }
    if let Some(ns) = &doc.ns {
        if ns.system.is_empty() {
            issues.push(Issue::new("/_ns/system", "empty system name"));
        }
        if ns.version.is_empty() {
            issues.push(Issue::new("/_ns/version", "empty version"));
        }
    }

    check_tags(&doc.type_tree, "/_type", &mut issues);

    let resolvable = |u: &Uuid| -> Option<bool> {
        match (&doc.refs, global) {
            (Some(refs), _) => Some(refs.contains_key(u)),
            (None, Some(g)) => Some(g.context(*u).is_some()),
            (None, None) => None,
        }
    };

    doc.type_tree.walk_refs("/_type", &mut |path, u| {
        if resolvable(&u) == Some(false) {
            issues.push(Issue::new(path, format!("dangling reference {u}")));
        }
    });

    if let Some(refs) = &doc.refs {
        for (uuid, r) in refs {
            let base = format!("/_refs/{uuid}");
            if r.ns.is_some() || r.refs.is_some() {
                issues.push(Issue::new(&base, "mode violation: ref document carrying `_ns` or `_refs`"));
            }
            if !RING_TAGS.contains(&r.type_tree.name.as_str()) {
                issues.push(Issue::new(
                    format!("{base}/_type/name"),
                    format!("unsupported type `{}` for a context", r.type_tree.name),
                ));
            } else {
                check_tags(&r.type_tree, &format!("{base}/_type"), &mut issues);
            }
            r.type_tree.walk_refs(&format!("{base}/_type"), &mut |path, u| {
                if !refs.contains_key(&u) {
                    issues.push(Issue::new(path, format!("dangling reference {u}")));
                }
            });
        }
        issues.extend(find_cycles(refs));
    }

    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

fn check_tags(tree: &TypeNode, path: &str, issues: &mut Vec<Issue>) {
    tree.walk(path, &mut |p, node| {
        if !is_known_tag(&node.name) {
            issues.push(Issue::new(format!("{p}/name"), format!("unsupported type `{}`", node.name)));
        }
    });
}

fn find_cycles(refs: &BTreeMap<Uuid, MrdiDocument>) -> Vec<Issue> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit(
        u: Uuid,
        refs: &BTreeMap<Uuid, MrdiDocument>,
        marks: &mut HashMap<Uuid, Mark>,
        issues: &mut Vec<Issue>,
    ) {
        match marks.get(&u) {
            Some(Mark::Done) => return,
            Some(Mark::Active) => {
                issues.push(Issue::new(format!("/_refs/{u}"), format!("cyclic reference through {u}")));
                return;
            }
            None => {}
        }
        marks.insert(u, Mark::Active);
        if let Some(doc) = refs.get(&u) {
            for dep in doc.type_tree.uuids() {
                if refs.contains_key(&dep) {
                    visit(dep, refs, marks, issues);
                }
            }
        }
        marks.insert(u, Mark::Done);
    }
    let mut marks = HashMap::new();
    let mut issues = Vec::new();
    for u in refs.keys() {
        visit(*u, refs, &mut marks, &mut issues);
    }
    issues
}
