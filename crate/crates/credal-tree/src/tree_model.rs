//! Rooted directed trees of variables with local credal models.
//!
//! Every node holds a finite state space and a local uncertainty model:
//! the root carries a marginal credal set, every other node a conditional
//! credal set per value of its parent. Children are kept in document
//! order, which is part of the canonical form: message products are
//! mathematically order-independent, but diagnostics and serialized
//! output are reproducible only with a fixed order.

use std::collections::HashMap;
use std::collections::btree_map;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::credal_core::{same_space, CredalSet, StateSpace};
use crate::error::{Error, Result};
use crate::scalar::Real;

// --- local models ---

/// The uncertainty model attached to one node.
#[derive(Debug, Clone)]
pub enum LocalModel<R: Real> {
    /// Marginal credal set; only the root carries this.
    Root(CredalSet<R>),
    /// One credal set per parent state, in the parent's label order.
    Conditional(Vec<CredalSet<R>>),
}

/// One variable in the tree.
#[derive(Debug, Clone)]
pub struct Node<R: Real> {
    id: String,
    space: Arc<StateSpace>,
    parent: Option<usize>,
    children: Vec<usize>,
    local: LocalModel<R>,
}

impl<R: Real> Node<R> {
    /// Stable identifier from the source document.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// The node's state space.
    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    /// Index of the parent node, if any.
    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    /// Indices of the children, in document order.
    pub fn children(&self) -> &[usize] {
        &self.children
    }

    /// The local model.
    pub fn local(&self) -> &LocalModel<R> {
        &self.local
    }

    /// The root marginal; panics when called on a non-root node.
    pub fn marginal(&self) -> &CredalSet<R> {
        match &self.local {
            LocalModel::Root(c) => c,
            LocalModel::Conditional(_) => unreachable!("marginal() on a non-root node"),
        }
    }

    /// The conditional credal set for one parent state; panics on the root.
    pub fn conditional(&self, parent_state: usize) -> &CredalSet<R> {
        match &self.local {
            LocalModel::Conditional(table) => &table[parent_state],
            LocalModel::Root(_) => unreachable!("conditional() on the root node"),
        }
    }
}

// --- evidence ---

/// An assignment of observed values to a set of instantiated nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    assignments: BTreeMap<String, String>,
}

impl Evidence {
    /// The empty evidence set.
    pub fn new() -> Self {
        Evidence::default()
    }

    /// Builds evidence from `(node, state)` pairs.
    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let assignments = pairs
            .into_iter()
            .map(|(n, s)| (n.into(), s.into()))
            .collect();
        Evidence { assignments }
    }

    /// Adds or replaces one assignment.
    pub fn assign(&mut self, node: impl Into<String>, state: impl Into<String>) {
        self.assignments.insert(node.into(), state.into());
    }

    /// The assigned state of a node, if instantiated.
    pub fn get(&self, node: &str) -> Option<&str> {
        self.assignments.get(node).map(String::as_str)
    }

    /// True when no node is instantiated.
    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Number of instantiated nodes.
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    /// Iterates assignments in node-id order.
    pub fn iter(&self) -> btree_map::Iter<'_, String, String> {
        self.assignments.iter()
    }
}

// --- trunk ---

/// The chain of nodes the posterior computation walks with the target
/// gamble: every ancestor of the target strictly after its greatest
/// instantiated ancestor, down to the target itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrunkInfo {
    e_t: Option<usize>,
    s_t: usize,
    trunk: Vec<usize>,
}

impl TrunkInfo {
    /// The greatest instantiated ancestor of the target, if any.
    pub fn e_t(&self) -> Option<usize> {
        self.e_t
    }

    /// First trunk node: the child of `e_t` toward the target, or the root.
    pub fn s_t(&self) -> usize {
        self.s_t
    }

    /// Trunk node indices from `s_t` down to the target.
    pub fn trunk(&self) -> &[usize] {
        &self.trunk
    }

    /// The target node index.
    pub fn target(&self) -> usize {
        *self.trunk.last().expect("trunk is never empty")
    }

    /// Trunk node ids, for reporting.
    pub fn trunk_ids<R: Real>(&self, tree: &Tree<R>) -> Vec<String> {
        self.trunk
            .iter()
            .map(|&i| tree.node(i).id().to_string())
            .collect()
    }
}

// --- tree ---

/// An imprecise Markov tree: nodes in document order, a single root, and
/// derived child adjacency plus a parent-before-child traversal order.
#[derive(Debug, Clone)]
pub struct Tree<R: Real> {
    nodes: Vec<Node<R>>,
    root: usize,
    index: HashMap<String, usize>,
    topo: Vec<usize>,
}

impl<R: Real> Tree<R> {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True only for the impossible empty tree; kept for idiom.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the root node.
    pub fn root(&self) -> usize {
        self.root
    }

    /// The node at an index.
    pub fn node(&self, index: usize) -> &Node<R> {
        &self.nodes[index]
    }

    /// All nodes in document order.
    pub fn nodes(&self) -> &[Node<R>] {
        &self.nodes
    }

    /// Resolves a node id to its index.
    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Node indices with every parent before its children.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Resolves evidence labels into per-node state indices.
    ///
    /// The returned vector has one entry per node: `Some(state index)` for
    /// instantiated nodes, `None` elsewhere.
    pub fn resolve_evidence(&self, ev: &Evidence) -> Result<Vec<Option<usize>>> {
        let mut resolved = vec![None; self.nodes.len()];
        for (id, state) in ev.iter() {
            let n = self.node_index(id)?;
            let s = self.nodes[n]
                .space
                .index_of(state)
                .ok_or_else(|| Error::UnknownState {
                    node: id.clone(),
                    state: state.clone(),
                })?;
            resolved[n] = Some(s);
        }
        Ok(resolved)
    }

    /// Path of node indices from the root down to `target`, inclusive.
    pub fn path_from_root(&self, target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}

// --- construction ---

struct RawNode<R: Real> {
    id: String,
    space: Arc<StateSpace>,
    parent: Option<String>,
    local: LocalModel<R>,
}

/// Incremental tree construction in document order.
///
/// Nodes may reference parents declared later; all structural checks run
/// in [`TreeBuilder::build`].
pub struct TreeBuilder<R: Real> {
    raw: Vec<RawNode<R>>,
}

impl<R: Real> Default for TreeBuilder<R> {
    fn default() -> Self {
        TreeBuilder::new()
    }
}

impl<R: Real> TreeBuilder<R> {
    /// Starts an empty builder.
    pub fn new() -> Self {
        TreeBuilder { raw: Vec::new() }
    }

    /// Adds the root node with its marginal credal set.
    pub fn root(
        mut self,
        id: impl Into<String>,
        space: Arc<StateSpace>,
        marginal: CredalSet<R>,
    ) -> Self {
        self.raw.push(RawNode {
            id: id.into(),
            space,
            parent: None,
            local: LocalModel::Root(marginal),
        });
        self
    }

    /// Adds a non-root node with one credal set per parent state.
    pub fn child(
        mut self,
        id: impl Into<String>,
        parent: impl Into<String>,
        space: Arc<StateSpace>,
        conditionals: Vec<CredalSet<R>>,
    ) -> Self {
        self.raw.push(RawNode {
            id: id.into(),
            space,
            parent: Some(parent.into()),
            local: LocalModel::Conditional(conditionals),
        });
        self
    }

    /// Validates the structure and produces the tree.
    pub fn build(self) -> Result<Tree<R>> {
        build_from_raw(self.raw)
    }
}

fn build_from_raw<R: Real>(raw: Vec<RawNode<R>>) -> Result<Tree<R>> {
    if raw.is_empty() {
        return Err(Error::NoRoot);
    }

    let mut index = HashMap::with_capacity(raw.len());
    for (i, r) in raw.iter().enumerate() {
        if index.insert(r.id.clone(), i).is_some() {
            return Err(Error::DuplicateNode(r.id.clone()));
        }
    }

    let mut root = None;
    for r in &raw {
        if r.parent.is_none() {
            match root {
                None => root = Some(r.id.clone()),
                Some(first) => return Err(Error::MultipleRoots(first, r.id.clone())),
            }
        }
    }
    let root = root.ok_or(Error::NoRoot)?;
    let root = index[&root];

    // Resolve parents and collect children in document order.
    let mut parents = vec![None; raw.len()];
    let mut children = vec![Vec::new(); raw.len()];
    for (i, r) in raw.iter().enumerate() {
        if let Some(pid) = &r.parent {
            let p = *index
                .get(pid)
                .ok_or_else(|| Error::UnknownNode(pid.clone()))?;
            parents[i] = Some(p);
            children[p].push(i);
        }
    }

    // Model kinds and per-model consistency.
    for (i, r) in raw.iter().enumerate() {
        match (&r.local, parents[i]) {
            (LocalModel::Root(marginal), None) => {
                if !same_space(marginal.space(), &r.space) {
                    return Err(Error::NodeModel {
                        node: r.id.clone(),
                        source: Box::new(Error::SpaceMismatch(
                            "marginal is not over the node's space".into(),
                        )),
                    });
                }
            }
            (LocalModel::Conditional(table), Some(p)) => {
                let parent_space = &raw[p].space;
                if table.len() != parent_space.len() {
                    let state = parent_space
                        .labels()
                        .get(table.len())
                        .cloned()
                        .unwrap_or_else(|| format!("#{}", table.len()));
                    return Err(Error::MissingConditional {
                        node: r.id.clone(),
                        state,
                    });
                }
                for set in table {
                    if !same_space(set.space(), &r.space) {
                        return Err(Error::NodeModel {
                            node: r.id.clone(),
                            source: Box::new(Error::SpaceMismatch(
                                "conditional set is not over the node's space".into(),
                            )),
                        });
                    }
                }
            }
            (LocalModel::Root(_), Some(_)) => return Err(Error::RootModelKind(r.id.clone())),
            (LocalModel::Conditional(_), None) => {
                return Err(Error::ConditionalModelKind(r.id.clone()))
            }
        }
    }

    // Reachability (also rejects parent cycles among non-root nodes).
    let mut topo = Vec::with_capacity(raw.len());
    let mut seen = vec![false; raw.len()];
    let mut queue = std::collections::VecDeque::from([root]);
    seen[root] = true;
    while let Some(n) = queue.pop_front() {
        topo.push(n);
        for &c in &children[n] {
            if !seen[c] {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    if topo.len() != raw.len() {
        let missing = (0..raw.len()).find(|&i| !seen[i]).expect("one is missing");
        return Err(Error::Unreachable(raw[missing].id.clone()));
    }

    let nodes = raw
        .into_iter()
        .enumerate()
        .map(|(i, r)| Node {
            id: r.id,
            space: r.space,
            parent: parents[i],
            children: std::mem::take(&mut children[i]),
            local: r.local,
        })
        .collect();

    Ok(Tree {
        nodes,
        root,
        index,
        topo,
    })
}

// --- validation ---

/// One strict-positivity violation found by [`validate_tree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositivityViolation {
    /// Node whose local model fails.
    pub node: String,
    /// Conditioning parent state, or `None` for the root marginal.
    pub parent_state: Option<String>,
    /// States whose upper probability is zero.
    pub zero_upper_states: Vec<String>,
}

/// Outcome of checking every local model for strict positivity.
#[derive(Debug, Clone)]
pub struct TreeReport {
    /// Number of (node, parent state) models checked.
    pub checked: usize,
    /// Every model that is not strictly positive.
    pub violations: Vec<PositivityViolation>,
}

impl TreeReport {
    /// True when every local model is strictly positive, which is the
    /// precondition under which the propagation shortcut is exact.
    pub fn preconditions_met(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks strict positivity of every local model, per parent state.
pub fn validate_tree<R: Real>(tree: &Tree<R>) -> TreeReport {
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut check = |node: &Node<R>, parent_state: Option<String>, set: &CredalSet<R>| {
        checked += 1;
        let zero_upper: Vec<String> = (0..node.space.len())
            .filter(|&i| !(set.upper_prob(i) > R::zero()))
            .map(|i| node.space.label(i).to_string())
            .collect();
        if !zero_upper.is_empty() {
            violations.push(PositivityViolation {
                node: node.id.clone(),
                parent_state,
                zero_upper_states: zero_upper,
            });
        }
    };
    for node in &tree.nodes {
        match &node.local {
            LocalModel::Root(marginal) => check(node, None, marginal),
            LocalModel::Conditional(table) => {
                let parent = tree.node(node.parent.expect("non-root has a parent"));
                for (ps, set) in table.iter().enumerate() {
                    check(node, Some(parent.space.label(ps).to_string()), set);
                }
            }
        }
    }
    TreeReport {
        checked,
        violations,
    }
}

// --- trunk computation ---

/// Determines the trunk for a target and evidence set.
///
/// `e_t` is the instantiated ancestor of the target closest to it (the
/// ancestors form a chain, so "greatest" is unambiguous); the trunk runs
/// from its child `s_t` down to the target. Without instantiated
/// ancestors the trunk is the full root-to-target path.
pub fn trunk<R: Real>(tree: &Tree<R>, target: &str, ev: &Evidence) -> Result<TrunkInfo> {
    let t = tree.node_index(target)?;
    let resolved = tree.resolve_evidence(ev)?;
    if resolved[t].is_some() {
        return Err(Error::TargetInstantiated(target.to_string()));
    }
    let path = tree.path_from_root(t);
    let cut = path[..path.len() - 1]
        .iter()
        .rposition(|&n| resolved[n].is_some());
    let (e_t, first) = match cut {
        Some(i) => (Some(path[i]), i + 1),
        None => (None, 0),
    };
    let trunk: Vec<usize> = path[first..].to_vec();
    debug_assert!(trunk.iter().all(|&n| resolved[n].is_none()));
    Ok(TrunkInfo {
        e_t,
        s_t: trunk[0],
        trunk,
    })
}
