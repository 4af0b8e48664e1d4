//! Independent brute-force references for the propagation engine.
//!
//! Three oracles cover the three joint semantics that matter here:
//!
//! * [`enumerate_joint_precise`]: exact Bayes by explicit joint
//!   enumeration, for fully precise trees.
//! * [`strong_posterior_enumeration`]: the sensitivity-analysis
//!   (strong-independence) posterior interval, by enumerating one vertex
//!   choice per local credal set and conditioning each resulting precise
//!   tree.
//! * [`EpistemicChainOracle`]: the epistemic-irrelevance envelope on
//!   chains, by enumerating history-dependent vertex choices (a node's
//!   vertex may depend on the whole ancestor configuration, not just
//!   the parent's state).
//!
//! All three abort with a budget error rather than sample: a reference
//! is exact or absent. The module also hosts the seeded random-instance
//! generator used by tests and benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::credal_core::{CredalSet, Gamble, MassFunction, StateSpace};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tree_model::{Evidence, LocalModel, Tree, TreeBuilder};

use std::sync::Arc;

/// Default ceiling on enumerated vertex selections.
pub const DEFAULT_SELECTION_BUDGET: u64 = 10_000_000;

// --- exact Bayes on precise trees ---

/// Posterior expectation of `g` on `target` in a fully precise tree, by
/// explicit enumeration of the joint space.
///
/// The joint mass of each full configuration is the chain-rule product
/// down the tree; evidence nodes are clamped to their observed states.
/// Fails when any local model has more than one vertex, when the target
/// is instantiated, or when the evidence has probability zero.
pub fn enumerate_joint_precise<R: Real>(
    tree: &Tree<R>,
    target: &str,
    ev: &Evidence,
    g: &Gamble<R>,
) -> Result<R> {
    for node in tree.nodes() {
        let precise = match node.local() {
            LocalModel::Root(set) => set.is_precise(),
            LocalModel::Conditional(table) => table.iter().all(|s| s.is_precise()),
        };
        if !precise {
            return Err(Error::NotPrecise(node.id().to_string()));
        }
    }
    let t = tree.node_index(target)?;
    if !crate::credal_core::same_space(g.space(), tree.node(t).space()) {
        return Err(Error::SpaceMismatch(format!(
            "gamble is not over the space of target `{target}`"
        )));
    }
    let resolved = tree.resolve_evidence(ev)?;
    if resolved[t].is_some() {
        return Err(Error::TargetInstantiated(target.to_string()));
    }

    let order = tree.topological_order().to_vec();
    let mut assignment = vec![0usize; tree.len()];
    let mut numerator = R::zero();
    let mut denominator = R::zero();

    // Depth-first over configurations in topological order, carrying the
    // chain-rule weight of the prefix.
    fn descend<R: Real>(
        tree: &Tree<R>,
        order: &[usize],
        resolved: &[Option<usize>],
        g: &[R],
        t: usize,
        depth: usize,
        weight: R,
        assignment: &mut [usize],
        numerator: &mut R,
        denominator: &mut R,
    ) {
        if depth == order.len() {
            *denominator += weight;
            *numerator += weight * g[assignment[t]];
            return;
        }
        let n = order[depth];
        let node = tree.node(n);
        let states: Box<dyn Iterator<Item = usize>> = match resolved[n] {
            Some(x) => Box::new(std::iter::once(x)),
            None => Box::new(0..node.space().len()),
        };
        for x in states {
            let px = match node.local() {
                LocalModel::Root(set) => set.vertices()[0].probs()[x],
                LocalModel::Conditional(_) => {
                    let parent_state = assignment[node.parent().expect("non-root")];
                    node.conditional(parent_state).vertices()[0].probs()[x]
                }
            };
            assignment[n] = x;
            descend(
                tree,
                order,
                resolved,
                g,
                t,
                depth + 1,
                weight * px,
                assignment,
                numerator,
                denominator,
            );
        }
    }

    descend(
        tree,
        &order,
        &resolved,
        g.values(),
        t,
        0,
        R::one(),
        &mut assignment,
        &mut numerator,
        &mut denominator,
    );

    if denominator <= R::zero() {
        return Err(Error::ZeroEvidenceProbability);
    }
    Ok(numerator / denominator)
}

// --- strong extension by vertex enumeration ---

/// One enumerable vertex choice: a local credal set of `node`, for one
/// parent state.
struct Slot {
    node: usize,
    parent_state: usize,
    choices: usize,
}

/// Posterior interval under strong independence, by enumerating every
/// combination of per-(node, parent-state) vertex choices, conditioning
/// each resulting precise tree, and taking the envelope of the ratios.
///
/// Selections whose evidence probability is zero are skipped; if all of
/// them are, the query has no conditional value and an error is
/// returned. The enumeration aborts with a budget error when the
/// selection count exceeds `budget`.
pub fn strong_posterior_enumeration<R: Real>(
    tree: &Tree<R>,
    target: &str,
    ev: &Evidence,
    g: &Gamble<R>,
    budget: u64,
) -> Result<(R, R)> {
    let t = tree.node_index(target)?;
    if !crate::credal_core::same_space(g.space(), tree.node(t).space()) {
        return Err(Error::SpaceMismatch(format!(
            "gamble is not over the space of target `{target}`"
        )));
    }
    let resolved = tree.resolve_evidence(ev)?;
    if resolved[t].is_some() {
        return Err(Error::TargetInstantiated(target.to_string()));
    }

    // Node depths; the root-to-target path carries the numerator messages.
    let path = tree.path_from_root(t);
    let mut on_path = vec![false; tree.len()];
    let mut path_child: Vec<Option<usize>> = vec![None; tree.len()];
    for (i, &n) in path.iter().enumerate() {
        on_path[n] = true;
        if i + 1 < path.len() {
            path_child[n] = Some(path[i + 1]);
        }
    }
    let mut depth = vec![0usize; tree.len()];
    for &n in tree.topological_order() {
        if let Some(p) = tree.node(n).parent() {
            depth[n] = depth[p] + 1;
        }
    }

    // Slots ordered by node depth, shallow first: the cheap-to-refresh
    // root-side slots become the fastest-spinning digits, so each step
    // recomputes an amortized O(1) prefix of the tree.
    let mut slots: Vec<Slot> = Vec::new();
    for &n in tree.topological_order() {
        match tree.node(n).local() {
            LocalModel::Root(set) => slots.push(Slot {
                node: n,
                parent_state: 0,
                choices: set.vertices().len(),
            }),
            LocalModel::Conditional(table) => {
                for (ps, set) in table.iter().enumerate() {
                    slots.push(Slot {
                        node: n,
                        parent_state: ps,
                        choices: set.vertices().len(),
                    });
                }
            }
        }
    }
    slots.sort_by_key(|s| depth[s.node]);

    let mut required: u128 = 1;
    for s in &slots {
        required = required
            .checked_mul(s.choices as u128)
            .ok_or(Error::BudgetExceeded {
                required: u128::MAX,
                budget,
            })?;
    }
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let total = required as u64;

    // Node -> its slot indices (one per parent state; root has one).
    let mut node_slots: Vec<Vec<usize>> = vec![Vec::new(); tree.len()];
    for (i, s) in slots.iter().enumerate() {
        node_slots[s.node].push(i);
    }
    for list in &mut node_slots {
        list.sort_by_key(|&i| slots[i].parent_state);
    }

    // Nodes touched by digits 0..=j, deepest first, for every prefix j.
    let mut prefix_nodes: Vec<Vec<usize>> = Vec::with_capacity(slots.len());
    let mut seen = vec![false; tree.len()];
    let mut acc: Vec<usize> = Vec::new();
    for s in &slots {
        if !seen[s.node] {
            seen[s.node] = true;
            acc.push(s.node);
            acc.sort_by_key(|&n| std::cmp::Reverse(depth[n]));
        }
        prefix_nodes.push(acc.clone());
    }

    // Current messages: denominator per node and parent state, numerator
    // along the path.
    let mut den: Vec<Vec<R>> = tree
        .nodes()
        .iter()
        .map(|n| match n.local() {
            LocalModel::Root(_) => vec![R::zero(); 1],
            LocalModel::Conditional(table) => vec![R::zero(); table.len()],
        })
        .collect();
    let mut num = den.clone();

    let mut digits = vec![0usize; slots.len()];
    let g_vals = g.values();

    let recompute = |n: usize, digits: &[usize], den: &mut Vec<Vec<R>>, num: &mut Vec<Vec<R>>| {
        let node = tree.node(n);
        let k = node.space().len();
        // Child products for the denominator and, along the path, the
        // numerator (the path child swaps its numerator in).
        let mut child_den = vec![R::one(); k];
        for &c in node.children() {
            for x in 0..k {
                child_den[x] *= den[c][x];
            }
        }
        let child_num: Vec<R> = match path_child[n] {
            Some(pc) => (0..k)
                .map(|x| {
                    let mut w = num[pc][x];
                    for &c in node.children() {
                        if c != pc {
                            w *= den[c][x];
                        }
                    }
                    w
                })
                .collect(),
            None if n == t => (0..k).map(|x| child_den[x] * g_vals[x]).collect(),
            None => child_den.clone(),
        };

        for &slot_idx in &node_slots[n] {
            let slot = &slots[slot_idx];
            let vertex = match node.local() {
                LocalModel::Root(set) => &set.vertices()[digits[slot_idx]],
                LocalModel::Conditional(table) => {
                    &table[slot.parent_state].vertices()[digits[slot_idx]]
                }
            };
            let probs = vertex.probs();
            let (d, nu) = match resolved[n] {
                Some(x) => (probs[x] * child_den[x], probs[x] * child_num[x]),
                None => {
                    let mut d = R::zero();
                    let mut nu = R::zero();
                    for x in 0..k {
                        d += probs[x] * child_den[x];
                        nu += probs[x] * child_num[x];
                    }
                    (d, nu)
                }
            };
            den[n][slot.parent_state] = d;
            num[n][slot.parent_state] = nu;
        }
    };

    let root = tree.root();
    let mut lower = R::infinity();
    let mut upper = R::neg_infinity();
    let mut any = false;

    // First selection: full refresh, deepest nodes first.
    let mut all_nodes: Vec<usize> = (0..tree.len()).collect();
    all_nodes.sort_by_key(|&n| std::cmp::Reverse(depth[n]));
    for &n in &all_nodes {
        recompute(n, &digits, &mut den, &mut num);
    }

    for step in 0..total {
        if step > 0 {
            // Odometer increment; digits below the bumped one reset.
            let mut j = 0;
            while digits[j] + 1 == slots[j].choices {
                digits[j] = 0;
                j += 1;
            }
            digits[j] += 1;
            for &n in &prefix_nodes[j] {
                recompute(n, &digits, &mut den, &mut num);
            }
        }
        let d = den[root][0];
        if d > R::zero() {
            let ratio = num[root][0] / d;
            lower = lower.min(ratio);
            upper = upper.max(ratio);
            any = true;
        }
    }

    if !any {
        return Err(Error::ZeroEvidenceProbability);
    }
    Ok((lower, upper))
}

// --- epistemic envelope on chains ---

/// The epistemic-irrelevance joint envelope of a Markov chain, by
/// enumeration of history-dependent vertex selections.
///
/// Under epistemic irrelevance the conditional mass function a node uses
/// may depend on the configuration of all its ancestors, not merely the
/// parent state. Every such selection induces one precise joint; the
/// oracle stores, per selection, the evidence probability `S0` and the
/// evidence-restricted expectation `S1` of the target gamble, so that
/// the envelope value at shift `mu` is `min(S1 − mu·S0)` and the
/// posterior bounds are the extreme ratios `S1/S0`.
pub struct EpistemicChainOracle<R: Real> {
    pairs: Vec<(R, R)>,
}

impl<R: Real> EpistemicChainOracle<R> {
    /// Enumerates all history-dependent selections of a chain-shaped tree.
    pub fn new(
        tree: &Tree<R>,
        target: &str,
        ev: &Evidence,
        g: &Gamble<R>,
        budget: u64,
    ) -> Result<Self> {
        // The tree must be a path from the root.
        let mut chain = vec![tree.root()];
        loop {
            let node = tree.node(*chain.last().expect("non-empty"));
            match node.children() {
                [] => break,
                [c] => chain.push(*c),
                _ => {
                    return Err(Error::NotAChain(format!(
                        "node `{}` has {} children",
                        node.id(),
                        node.children().len()
                    )))
                }
            }
        }
        if chain.len() != tree.len() {
            return Err(Error::NotAChain("disconnected nodes".to_string()));
        }

        let t = tree.node_index(target)?;
        if !crate::credal_core::same_space(g.space(), tree.node(t).space()) {
            return Err(Error::SpaceMismatch(format!(
                "gamble is not over the space of target `{target}`"
            )));
        }
        let resolved = tree.resolve_evidence(ev)?;
        if resolved[t].is_some() {
            return Err(Error::TargetInstantiated(target.to_string()));
        }
        let target_pos = chain.iter().position(|&n| n == t).expect("target on chain");

        // One slot per (position, ancestor configuration); the number of
        // configurations multiplies up along the chain.
        let sizes: Vec<usize> = chain.iter().map(|&n| tree.node(n).space().len()).collect();
        let vertex_counts: Vec<usize> = chain
            .iter()
            .map(|&n| match tree.node(n).local() {
                LocalModel::Root(set) => set.vertices().len(),
                LocalModel::Conditional(table) => {
                    table.iter().map(|s| s.vertices().len()).max().unwrap_or(1)
                }
            })
            .collect();

        let mut slot_of: Vec<Vec<usize>> = Vec::with_capacity(chain.len());
        let mut slot_choices: Vec<usize> = Vec::new();
        let mut histories = 1usize;
        let mut required: u128 = 1;
        for k in 0..chain.len() {
            let mut ids = Vec::with_capacity(histories);
            for _ in 0..histories {
                ids.push(slot_choices.len());
                slot_choices.push(vertex_counts[k]);
                required = required
                    .checked_mul(vertex_counts[k] as u128)
                    .ok_or(Error::BudgetExceeded {
                        required: u128::MAX,
                        budget,
                    })?;
            }
            slot_of.push(ids);
            histories = histories
                .checked_mul(sizes[k])
                .ok_or(Error::BudgetExceeded {
                    required: u128::MAX,
                    budget,
                })?;
        }
        if required > budget as u128 {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let total = required as u64;

        // Precompute, per joint configuration: consistency with the
        // evidence, the gamble value at the target, and per position the
        // slot to read and the vertex probability index.
        let n_assignments: usize = sizes.iter().product();
        struct Row {
            consistent: bool,
            g_value_idx: usize,
            lookups: Vec<(usize, usize, usize)>, // (slot, position, state)
        }
        let mut rows = Vec::with_capacity(n_assignments);
        for code in 0..n_assignments {
            let mut states = Vec::with_capacity(sizes.len());
            let mut rest = code;
            for &s in &sizes {
                states.push(rest % s);
                rest /= s;
            }
            let consistent = chain
                .iter()
                .enumerate()
                .all(|(k, &n)| resolved[n].map_or(true, |x| states[k] == x));
            let mut lookups = Vec::with_capacity(sizes.len());
            let mut hist = 0usize;
            let mut stride = 1usize;
            for k in 0..sizes.len() {
                lookups.push((slot_of[k][hist], k, states[k]));
                hist += states[k] * stride;
                stride *= sizes[k];
            }
            rows.push(Row {
                consistent,
                g_value_idx: states[target_pos],
                lookups,
            });
        }

        // Vertex probability tables: probs[k][parent_state_or_0][vertex][x].
        let tables: Vec<Vec<Vec<Vec<R>>>> = chain
            .iter()
            .map(|&n| match tree.node(n).local() {
                LocalModel::Root(set) => {
                    vec![set.vertices().iter().map(|v| v.probs().to_vec()).collect()]
                }
                LocalModel::Conditional(table) => table
                    .iter()
                    .map(|s| s.vertices().iter().map(|v| v.probs().to_vec()).collect())
                    .collect(),
            })
            .collect();
        // Parent state per configuration row and position (0 for the root).
        let parent_state = |row: &Row, k: usize| -> usize {
            if k == 0 {
                0
            } else {
                row.lookups[k - 1].2
            }
        };

        let g_vals = g.values();
        let mut digits = vec![0usize; slot_choices.len()];
        let mut pairs = Vec::with_capacity(total as usize);
        for step in 0..total {
            if step > 0 {
                let mut j = 0;
                while digits[j] + 1 == slot_choices[j] {
                    digits[j] = 0;
                    j += 1;
                }
                digits[j] += 1;
            }
            let mut s0 = R::zero();
            let mut s1 = R::zero();
            for row in &rows {
                if !row.consistent {
                    continue;
                }
                let mut w = R::one();
                for (k, &(slot, pos, x)) in row.lookups.iter().enumerate() {
                    let ps = parent_state(row, k);
                    w *= tables[pos][ps][digits[slot]][x];
                }
                s0 += w;
                s1 += w * g_vals[row.g_value_idx];
            }
            pairs.push((s0, s1));
        }

        Ok(EpistemicChainOracle { pairs })
    }

    /// Number of enumerated selections.
    pub fn selection_count(&self) -> usize {
        self.pairs.len()
    }

    /// Envelope value at shift `mu`: the joint lower expectation of
    /// `1_{evidence} · (g − mu)`.
    pub fn rho(&self, mu: R) -> R {
        self.pairs
            .iter()
            .map(|&(s0, s1)| s1 - mu * s0)
            .fold(R::infinity(), R::min)
    }

    /// Posterior bounds: extreme conditional expectations over the
    /// selections with positive evidence probability.
    pub fn posterior_bounds(&self) -> Result<(R, R)> {
        let mut lower = R::infinity();
        let mut upper = R::neg_infinity();
        let mut any = false;
        for &(s0, s1) in &self.pairs {
            if s0 > R::zero() {
                let ratio = s1 / s0;
                lower = lower.min(ratio);
                upper = upper.max(ratio);
                any = true;
            }
        }
        if !any {
            return Err(Error::ZeroEvidenceProbability);
        }
        Ok((lower, upper))
    }
}

/// One-shot envelope value at a single shift; see [`EpistemicChainOracle`].
pub fn epistemic_chain_rho_oracle<R: Real>(
    tree: &Tree<R>,
    target: &str,
    ev: &Evidence,
    g: &Gamble<R>,
    mu: R,
    budget: u64,
) -> Result<R> {
    Ok(EpistemicChainOracle::new(tree, target, ev, g, budget)?.rho(mu))
}

// --- random instance generation ---

/// Shape parameters for the seeded tree generator.
#[derive(Debug, Clone)]
pub struct TreeShape {
    /// Number of nodes, at least 1.
    pub nodes: usize,
    /// Maximum children per node, at least 1 (1 makes a chain).
    pub max_children: usize,
    /// Candidate state-space sizes, drawn uniformly per node.
    pub state_sizes: Vec<usize>,
    /// Vertices per local credal set, at least 1.
    pub vertices_per_set: usize,
    /// Imprecision level in [0, 1]: 0 makes every model precise.
    pub imprecision: f64,
}

/// Smallest probability the generator assigns to any state.
pub const PROBABILITY_FLOOR: f64 = 0.01;

/// Generates a random imprecise Markov tree, deterministically per seed.
///
/// Every local credal set is built around a floored-uniform base mass
/// function `q`, kept as the first vertex; the remaining vertices are the
/// mixtures `(1−imprecision)·q + imprecision·r` with fresh random `r`.
/// All probabilities stay at or above [`PROBABILITY_FLOOR`], so every
/// generated model is strictly positive. The random stream is consumed
/// identically at every imprecision level: two calls differing only in
/// `imprecision` produce the same base mass functions, and imprecision 0
/// produces the precise base tree itself.
pub fn random_tree_generator<R: Real>(shape: &TreeShape, seed: u64) -> Result<Tree<R>> {
    if shape.nodes == 0 {
        return Err(Error::InfeasibleShape("nodes must be at least 1".to_string()));
    }
    if shape.max_children == 0 {
        return Err(Error::InfeasibleShape(
            "max_children must be at least 1".to_string(),
        ));
    }
    if shape.state_sizes.is_empty() {
        return Err(Error::InfeasibleShape("state_sizes is empty".to_string()));
    }
    if shape.state_sizes.iter().any(|&k| k == 0 || (k as f64) * PROBABILITY_FLOOR >= 1.0) {
        return Err(Error::InfeasibleShape(
            "state sizes must be in 1..100 for the probability floor".to_string(),
        ));
    }
    if shape.vertices_per_set == 0 {
        return Err(Error::InfeasibleShape(
            "vertices_per_set must be at least 1".to_string(),
        ));
    }
    if !(0.0..=1.0).contains(&shape.imprecision) {
        return Err(Error::InfeasibleShape(
            "imprecision must lie in [0, 1]".to_string(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Structure: each new node attaches to a uniformly random node that
    // still has child capacity.
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut child_counts = vec![0usize; shape.nodes];
    for i in 1..shape.nodes {
        let eligible: Vec<usize> = (0..i)
            .filter(|&n| child_counts[n] < shape.max_children)
            .collect();
        if eligible.is_empty() {
            return Err(Error::InfeasibleShape(format!(
                "no node can take a {}th child",
                i + 1
            )));
        }
        let p = eligible[rng.gen_range(0..eligible.len())];
        parents.push(Some(p));
        child_counts[p] += 1;
    }

    let sizes: Vec<usize> = (0..shape.nodes)
        .map(|_| shape.state_sizes[rng.gen_range(0..shape.state_sizes.len())])
        .collect();
    let spaces: Vec<Arc<StateSpace>> = sizes
        .iter()
        .map(|&k| {
            let labels: Vec<String> = (0..k).map(|x| format!("s{x}")).collect();
            StateSpace::new(labels).expect("distinct generated labels")
        })
        .collect();

    let mut builder = TreeBuilder::new();
    for i in 0..shape.nodes {
        let id = format!("n{i}");
        match parents[i] {
            None => {
                let set = random_set(&spaces[i], shape, &mut rng);
                builder = builder.root(id, spaces[i].clone(), set);
            }
            Some(p) => {
                let table: Vec<CredalSet<R>> = (0..sizes[p])
                    .map(|_| random_set(&spaces[i], shape, &mut rng))
                    .collect();
                builder = builder.child(id, format!("n{p}"), spaces[i].clone(), table);
            }
        }
    }
    builder.build()
}

fn random_mass<R: Real>(space: &Arc<StateSpace>, rng: &mut impl Rng) -> MassFunction<R> {
    let k = space.len();
    let draws: Vec<f64> = (0..k).map(|_| -(rng.gen::<f64>().max(1e-300)).ln()).collect();
    let total: f64 = draws.iter().sum();
    let free = 1.0 - (k as f64) * PROBABILITY_FLOOR;
    let probs: Vec<R> = draws
        .iter()
        .map(|d| R::from_f64_lossy(PROBABILITY_FLOOR + free * d / total))
        .collect();
    MassFunction::new(space.clone(), &probs).expect("floored simplex point")
}

fn random_set<R: Real>(
    space: &Arc<StateSpace>,
    shape: &TreeShape,
    rng: &mut impl Rng,
) -> CredalSet<R> {
    let base = random_mass::<R>(space, rng);
    let imp = R::from_f64_lossy(shape.imprecision);
    let mut vertices = vec![base.clone()];
    for _ in 1..shape.vertices_per_set {
        // Drawn unconditionally to keep the stream aligned across
        // imprecision levels.
        let noise = random_mass::<R>(space, rng);
        if shape.imprecision > 0.0 {
            let probs: Vec<R> = base
                .probs()
                .iter()
                .zip(noise.probs())
                .map(|(&q, &r)| (R::one() - imp) * q + imp * r)
                .collect();
            vertices.push(MassFunction::new(space.clone(), &probs).expect("mixture"));
        }
    }
    CredalSet::new(vertices).expect("non-empty vertex list")
}

/// Random gamble with values uniform in [-1, 1].
pub fn random_gamble<R: Real>(space: &Arc<StateSpace>, rng: &mut impl Rng) -> Gamble<R> {
    let values: Vec<R> = (0..space.len())
        .map(|_| R::from_f64_lossy(rng.gen_range(-1.0..=1.0)))
        .collect();
    Gamble::new(space.clone(), &values).expect("finite values")
}

/// Instantiates each non-target node independently with probability
/// `prob`, choosing a uniformly random state.
pub fn random_evidence<R: Real>(
    tree: &Tree<R>,
    target: &str,
    prob: f64,
    rng: &mut impl Rng,
) -> Evidence {
    let mut ev = Evidence::new();
    for node in tree.nodes() {
        if node.id() == target || !rng.gen_bool(prob) {
            continue;
        }
        let x = rng.gen_range(0..node.space().len());
        ev.assign(node.id(), node.space().label(x));
    }
    ev
}
