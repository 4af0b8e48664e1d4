//! The text document formats: tree specifications, evidence maps, and
//! stored hidden-Markov-model counts, all JSON.
//!
//! A tree document is an object with a `nodes` list; each node carries
//! `id`, `states`, `parent` (null for the root), and `model`. The root
//! model is `{"vertices": [[p, …], …]}`. A non-root model maps each
//! parent-state label to one of three forms:
//!
//! * `{"vertices": [[p, …], …]}`: an explicit vertex list,
//! * `{"interval": {"lower": [l0, l1], "upper": [u0, u1]}}`: a binary
//!   probability interval, converted to the two vertices `(l0, 1−l0)`
//!   and `(u0, 1−u0)`,
//! * `{"idm": {"counts": [n, …], "s": real}}`: imprecise-Dirichlet
//!   counts.
//!
//! Serialization always emits the canonical vertex form in parent-state
//! order, so build → serialize → build is an identity and the shortest
//! round-trip decimal representation keeps probabilities bit-exact.
//! Evidence documents are plain maps from node id to state label.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::credal_core::{idm_from_counts, CountTable, CredalSet, MassFunction, StateSpace};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tree_model::{Evidence, LocalModel, Tree, TreeBuilder};

/// Top-level tree document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    /// Nodes in document order; the order fixes child ordering.
    pub nodes: Vec<NodeDoc>,
}

/// One node of a tree document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    /// Unique node id.
    pub id: String,
    /// State labels, in order.
    pub states: Vec<String>,
    /// Parent id; null for the root.
    pub parent: Option<String>,
    /// Local model: one credal set for the root, a per-parent-state map
    /// otherwise.
    pub model: ModelDoc,
}

/// Local model of one node.
///
/// The two variants are structurally unambiguous: a root model is an
/// object whose `vertices` value is a list, while a table maps state
/// labels to objects (even a parent state literally labeled "vertices"
/// maps to an object, not a list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelDoc {
    /// Root marginal.
    Leaf(LeafModelDoc),
    /// Conditional table keyed by parent-state label, in parent-state
    /// order.
    Table(IndexMap<String, LeafModelDoc>),
}

/// One credal set in a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LeafModelDoc {
    /// Explicit vertex list.
    Vertices {
        /// One probability row per vertex.
        vertices: Vec<Vec<f64>>,
    },
    /// Binary probability interval.
    Interval {
        /// Lower/upper singleton probabilities.
        interval: IntervalDoc,
    },
    /// Imprecise-Dirichlet counts.
    Idm {
        /// Counts and the caution parameter.
        idm: IdmDoc,
    },
}

/// Bounds of a binary probability interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalDoc {
    /// Lower singleton probabilities, one per state.
    pub lower: Vec<f64>,
    /// Upper singleton probabilities, one per state.
    pub upper: Vec<f64>,
}

/// Imprecise-Dirichlet specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdmDoc {
    /// Observation counts, one per state.
    pub counts: Vec<u64>,
    /// Caution parameter, strictly positive.
    pub s: f64,
}

fn set_from_leaf<R: Real>(
    node_id: &str,
    space: &Arc<StateSpace>,
    leaf: &LeafModelDoc,
) -> Result<CredalSet<R>> {
    let wrap = |e: Error| Error::NodeModel {
        node: node_id.to_string(),
        source: Box::new(e),
    };
    match leaf {
        LeafModelDoc::Vertices { vertices } => {
            if vertices.is_empty() {
                return Err(wrap(Error::EmptyCredalSet));
            }
            let mut rows = Vec::with_capacity(vertices.len());
            for row in vertices {
                let probs: Vec<R> = row.iter().map(|&p| R::from_f64_lossy(p)).collect();
                rows.push(MassFunction::new(space.clone(), &probs).map_err(wrap)?);
            }
            CredalSet::new(rows).map_err(wrap)
        }
        LeafModelDoc::Interval { interval } => {
            if space.len() != 2 {
                return Err(Error::IntervalArity {
                    node: node_id.to_string(),
                    arity: space.len(),
                });
            }
            let bad = |detail: &str| Error::IntervalBounds {
                node: node_id.to_string(),
                detail: detail.to_string(),
            };
            if interval.lower.len() != 2 || interval.upper.len() != 2 {
                return Err(bad("lower and upper need one entry per state"));
            }
            let (l0, l1) = (interval.lower[0], interval.lower[1]);
            let (u0, u1) = (interval.upper[0], interval.upper[1]);
            if !(l0 <= u0 && l1 <= u1) {
                return Err(bad("lower bounds exceed upper bounds"));
            }
            // On a binary space the bounds are conjugate: the lower
            // probability of one state is one minus the upper of the other.
            if (l0 + u1 - 1.0).abs() > 1e-12 || (l1 + u0 - 1.0).abs() > 1e-12 {
                return Err(bad("bounds are not conjugate (l0+u1 and l1+u0 must be 1)"));
            }
            let v = |p: f64| -> Result<MassFunction<R>> {
                MassFunction::new(
                    space.clone(),
                    &[R::from_f64_lossy(p), R::from_f64_lossy(1.0 - p)],
                )
                .map_err(wrap)
            };
            CredalSet::new(vec![v(l0)?, v(u0)?]).map_err(wrap)
        }
        LeafModelDoc::Idm { idm } => {
            let table =
                CountTable::new(space.clone(), &idm.counts, R::from_f64_lossy(idm.s)).map_err(wrap)?;
            Ok(idm_from_counts(&table))
        }
    }
}

/// Builds a tree from a parsed document, enforcing all structural
/// invariants; child order is document order.
pub fn build_tree<R: Real>(doc: &TreeDoc) -> Result<Tree<R>> {
    let mut spaces: Vec<Arc<StateSpace>> = Vec::with_capacity(doc.nodes.len());
    for node in &doc.nodes {
        spaces.push(StateSpace::new(node.states.iter().cloned()).map_err(|e| {
            Error::NodeModel {
                node: node.id.clone(),
                source: Box::new(e),
            }
        })?);
    }

    let mut builder = TreeBuilder::new();
    for (node, space) in doc.nodes.iter().zip(&spaces) {
        match (&node.parent, &node.model) {
            (None, ModelDoc::Leaf(leaf)) => {
                let set = set_from_leaf(&node.id, space, leaf)?;
                builder = builder.root(node.id.clone(), space.clone(), set);
            }
            (None, ModelDoc::Table(_)) => {
                return Err(Error::RootModelKind(node.id.clone()));
            }
            (Some(parent), ModelDoc::Table(table)) => {
                // The builder checks table length; here the labels must
                // match the parent's states exactly, in any order.
                let parent_doc = doc
                    .nodes
                    .iter()
                    .find(|n| &n.id == parent)
                    .ok_or_else(|| Error::UnknownNode(parent.clone()))?;
                let mut sets = Vec::with_capacity(parent_doc.states.len());
                for state in &parent_doc.states {
                    let leaf = table.get(state).ok_or_else(|| Error::MissingConditional {
                        node: node.id.clone(),
                        state: state.clone(),
                    })?;
                    sets.push(set_from_leaf(&node.id, space, leaf)?);
                }
                if table.len() != parent_doc.states.len() {
                    let extra = table
                        .keys()
                        .find(|k| !parent_doc.states.contains(k))
                        .cloned()
                        .unwrap_or_default();
                    return Err(Error::UnknownState {
                        node: parent.clone(),
                        state: extra,
                    });
                }
                builder = builder.child(node.id.clone(), parent.clone(), space.clone(), sets);
            }
            (Some(_), ModelDoc::Leaf(_)) => {
                return Err(Error::ConditionalModelKind(node.id.clone()));
            }
        }
    }
    builder.build()
}

/// Serializes a tree to its canonical document: explicit vertex lists in
/// parent-state order, nodes in document order.
pub fn serialize_tree<R: Real>(tree: &Tree<R>) -> TreeDoc {
    let set_doc = |set: &CredalSet<R>| LeafModelDoc::Vertices {
        vertices: set
            .vertices()
            .iter()
            .map(|v| v.probs().iter().map(|&p| p.to_f64_lossy()).collect())
            .collect(),
    };
    let nodes = tree
        .nodes()
        .iter()
        .map(|node| {
            let model = match node.local() {
                LocalModel::Root(set) => ModelDoc::Leaf(set_doc(set)),
                LocalModel::Conditional(table) => {
                    let parent = tree.node(node.parent().expect("conditional node"));
                    let mut map = IndexMap::with_capacity(table.len());
                    for (ps, set) in table.iter().enumerate() {
                        map.insert(parent.space().label(ps).to_string(), set_doc(set));
                    }
                    ModelDoc::Table(map)
                }
            };
            NodeDoc {
                id: node.id().to_string(),
                states: node.space().labels().to_vec(),
                parent: node.parent().map(|p| tree.node(p).id().to_string()),
                model,
            }
        })
        .collect();
    TreeDoc { nodes }
}

/// Parses a JSON tree document and builds the tree.
pub fn tree_from_json<R: Real>(text: &str) -> Result<Tree<R>> {
    let doc: TreeDoc = serde_json::from_str(text)?;
    build_tree(&doc)
}

/// Serializes a tree as pretty-printed JSON.
pub fn tree_to_json<R: Real>(tree: &Tree<R>) -> String {
    serde_json::to_string_pretty(&serialize_tree(tree)).expect("document serialization")
}

/// Parses an evidence document: a map from node id to state label.
pub fn evidence_from_json(text: &str) -> Result<Evidence> {
    let map: BTreeMap<String, String> = serde_json::from_str(text)?;
    Ok(Evidence::from_pairs(map))
}

/// Serializes evidence as JSON with ids in sorted order.
pub fn evidence_to_json(ev: &Evidence) -> String {
    let map: BTreeMap<&str, &str> = ev.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    serde_json::to_string_pretty(&map).expect("evidence serialization")
}

/// Stored form of a learned hidden Markov model: the retained count
/// tables plus the caution parameter, from which every credal set is
/// rebuilt exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmDoc {
    /// Symbol labels, in order.
    pub alphabet: Vec<String>,
    /// Caution parameter used for all credal sets.
    pub s: f64,
    /// Initial-symbol counts, one per symbol.
    pub initial: Vec<u64>,
    /// Transition counts: row per source symbol, column per successor.
    pub transition: Vec<Vec<u64>>,
    /// Emission counts: row per generative symbol, column per observed.
    pub emission: Vec<Vec<u64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credal_core::{linear_model, vacuous_model};

    fn doc_json() -> &'static str {
        r#"{
          "nodes": [
            {
              "id": "1",
              "states": ["a", "b"],
              "parent": null,
              "model": {"vertices": [[0.5, 0.5]]}
            },
            {
              "id": "2",
              "states": ["u", "v"],
              "parent": "1",
              "model": {
                "a": {"vertices": [[0.5, 0.5]]},
                "b": {"vertices": [[0.5, 0.5]]}
              }
            },
            {
              "id": "3",
              "states": ["p", "q"],
              "parent": "2",
              "model": {
                "u": {"interval": {"lower": [0.4, 0.4], "upper": [0.6, 0.6]}},
                "v": {"idm": {"counts": [1, 1], "s": 2}}
              }
            }
          ]
        }"#
    }

    #[test]
    fn builds_the_three_node_chain_document() {
        let tree: Tree<f64> = tree_from_json(doc_json()).unwrap();
        assert_eq!(tree.len(), 3);
        let n3 = tree.node(tree.node_index("3").unwrap());
        // Interval form became the two bound vertices.
        let set = n3.conditional(0);
        assert_eq!(set.vertices().len(), 2);
        assert!((set.lower_prob(0) - 0.4).abs() < 1e-15);
        assert!((set.upper_prob(0) - 0.6).abs() < 1e-15);
        // IDM counts (1,1) with s=2: bounds 1/4 and 3/4.
        let set = n3.conditional(1);
        assert!((set.lower_prob(0) - 0.25).abs() < 1e-15);
        assert!((set.upper_prob(0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_identity_on_the_canonical_form() {
        let tree: Tree<f64> = tree_from_json(doc_json()).unwrap();
        let doc = serialize_tree(&tree);
        let again: Tree<f64> = build_tree(&doc).unwrap();
        assert_eq!(doc, serialize_tree(&again));
        // Canonical JSON is byte-stable.
        assert_eq!(tree_to_json(&tree), tree_to_json(&again));
    }

    #[test]
    fn round_trip_keeps_seventeen_digit_probabilities() {
        let sp = StateSpace::new(["a", "b"]).unwrap();
        let p = 0.123456789012345678_f64;
        let tree: Tree<f64> = TreeBuilder::new()
            .root(
                "r",
                sp.clone(),
                linear_model(MassFunction::new(sp, &[p, 1.0 - p]).unwrap()),
            )
            .build()
            .unwrap();
        let again: Tree<f64> = tree_from_json(&tree_to_json(&tree)).unwrap();
        let q = again.node(0).marginal().vertices()[0].probs()[0];
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_malformed_documents() {
        // Interval on a non-binary space.
        let text = r#"{
          "nodes": [
            {"id": "1", "states": ["a", "b", "c"], "parent": null,
             "model": {"vertices": [[0.3, 0.3, 0.4]]}},
            {"id": "2", "states": ["u", "v", "w"], "parent": "1",
             "model": {
               "a": {"interval": {"lower": [0.1, 0.1, 0.1], "upper": [0.9, 0.9, 0.9]}},
               "b": {"vertices": [[0.3, 0.3, 0.4]]},
               "c": {"vertices": [[0.3, 0.3, 0.4]]}
             }}
          ]
        }"#;
        assert!(matches!(
            tree_from_json::<f64>(text),
            Err(Error::IntervalArity { ref node, arity: 3 }) if node == "2"
        ));

        // Non-conjugate interval bounds.
        let text = r#"{
          "nodes": [
            {"id": "1", "states": ["a", "b"], "parent": null,
             "model": {"vertices": [[0.5, 0.5]]}},
            {"id": "2", "states": ["u", "v"], "parent": "1",
             "model": {
               "a": {"interval": {"lower": [0.4, 0.3], "upper": [0.6, 0.6]}},
               "b": {"vertices": [[0.5, 0.5]]}
             }}
          ]
        }"#;
        assert!(matches!(
            tree_from_json::<f64>(text),
            Err(Error::IntervalBounds { .. })
        ));

        // Missing parent-state entry.
        let text = r#"{
          "nodes": [
            {"id": "1", "states": ["a", "b"], "parent": null,
             "model": {"vertices": [[0.5, 0.5]]}},
            {"id": "2", "states": ["u", "v"], "parent": "1",
             "model": {"a": {"vertices": [[0.5, 0.5]]}}}
          ]
        }"#;
        assert!(matches!(
            tree_from_json::<f64>(text),
            Err(Error::MissingConditional { ref node, ref state }) if node == "2" && state == "b"
        ));

        // Mutual parents: a cycle unreachable from any root.
        let text = r#"{
          "nodes": [
            {"id": "1", "states": ["a", "b"], "parent": null,
             "model": {"vertices": [[0.5, 0.5]]}},
            {"id": "2", "states": ["a", "b"], "parent": "3",
             "model": {"a": {"vertices": [[0.5, 0.5]]}, "b": {"vertices": [[0.5, 0.5]]}}},
            {"id": "3", "states": ["a", "b"], "parent": "2",
             "model": {"a": {"vertices": [[0.5, 0.5]]}, "b": {"vertices": [[0.5, 0.5]]}}}
          ]
        }"#;
        assert!(matches!(tree_from_json::<f64>(text), Err(Error::Unreachable(_))));
    }

    #[test]
    fn parent_state_named_vertices_still_parses_as_a_table() {
        // A conditional table keyed by a state literally labeled
        // "vertices" must not be mistaken for a root model.
        let text = r#"{
          "nodes": [
            {"id": "1", "states": ["vertices", "other"], "parent": null,
             "model": {"vertices": [[0.5, 0.5]]}},
            {"id": "2", "states": ["u", "v"], "parent": "1",
             "model": {
               "vertices": {"vertices": [[0.2, 0.8]]},
               "other": {"vertices": [[0.7, 0.3]]}
             }}
          ]
        }"#;
        let tree: Tree<f64> = tree_from_json(text).unwrap();
        let n2 = tree.node(tree.node_index("2").unwrap());
        assert!((n2.conditional(0).lower_prob(0) - 0.2).abs() < 1e-15);
        assert!((n2.conditional(1).lower_prob(0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn evidence_documents_round_trip() {
        let ev = Evidence::from_pairs([("2", "u"), ("3", "p")]);
        let text = evidence_to_json(&ev);
        let back = evidence_from_json(&text).unwrap();
        assert_eq!(back.get("2"), Some("u"));
        assert_eq!(back.get("3"), Some("p"));
        assert_eq!(back.len(), 2);
    }

    #[test]
    fn serialization_emits_vertices_in_parent_state_order() {
        let sp1 = StateSpace::new(["b", "a"]).unwrap();
        let sp2 = StateSpace::new(["u", "v"]).unwrap();
        let tree: Tree<f64> = TreeBuilder::new()
            .root("r", sp1.clone(), vacuous_model(sp1))
            .child(
                "c",
                "r",
                sp2.clone(),
                vec![vacuous_model(sp2.clone()), vacuous_model(sp2)],
            )
            .build()
            .unwrap();
        let doc = serialize_tree(&tree);
        match &doc.nodes[1].model {
            ModelDoc::Table(map) => {
                let keys: Vec<&String> = map.keys().collect();
                assert_eq!(keys, ["b", "a"]);
            }
            _ => panic!("expected a conditional table"),
        }
    }
}
