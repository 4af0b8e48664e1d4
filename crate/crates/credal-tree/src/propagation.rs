//! The updating engine: exact lower/upper posterior expectations on a
//! target node by message passing and root finding.
//!
//! The posterior lower expectation under regular extension is the
//! rightmost zero of a one-dimensional function of the shift `μ`:
//! the lower expectation of the gamble `1_{evidence} · (g − μ)` under the
//! tree's joint model. On a tree that function decomposes into
//!
//! * μ-free messages `λ` flowing upward from every node outside the
//!   trunk (they do not depend on the gamble or on μ, so they are
//!   computed once per query), and
//! * a μ-dependent sweep along the trunk, the chain from the child of the
//!   greatest instantiated ancestor of the target down to the target.
//!
//! The sweep value `σ(μ)` has the same sign as the full-tree objective
//! whenever every local model is strictly positive, so its rightmost zero
//! is the posterior; a hybrid secant/bisection finder locates it. When
//! the evidence has upper probability zero, conditioning is vacuous and
//! the query returns the gamble's raw bounds with a flag.

use std::collections::HashMap;

use crate::credal_core::{CredalSet, Gamble};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tree_model::{trunk, Evidence, LocalModel, Tree, TrunkInfo};

// --- message tables ---

/// μ-free messages for one (target, evidence) query.
///
/// For every relevant node outside the trunk, `lambda` holds the lower
/// and upper message vectors indexed by the parent's states. For every
/// trunk node, `cap` holds the pointwise products of the lower (upper)
/// messages of its off-trunk children, indexed by the node's own states.
#[derive(Debug, Clone)]
pub struct MessageTable<R: Real> {
    lambda: Vec<Option<(Vec<R>, Vec<R>)>>,
    cap: HashMap<usize, (Vec<R>, Vec<R>)>,
}

impl<R: Real> MessageTable<R> {
    /// Lower/upper message of a node, over its parent's states.
    pub fn lambda(&self, node: usize) -> Option<(&[R], &[R])> {
        self.lambda[node]
            .as_ref()
            .map(|(l, u)| (l.as_slice(), u.as_slice()))
    }

    /// Aggregated lower/upper child products of a trunk node.
    pub fn cap(&self, node: usize) -> Option<(&[R], &[R])> {
        self.cap.get(&node).map(|(l, u)| (l.as_slice(), u.as_slice()))
    }
}

/// Computes the μ-free messages for a query with the given trunk.
///
/// Messages are produced for every descendant of the first trunk node
/// that is not itself on the trunk; no barren-node pruning is attempted,
/// so fully uninstantiated subtrees simply emit constant-one messages.
pub fn mu_free_messages<R: Real>(
    tree: &Tree<R>,
    info: &TrunkInfo,
    ev: &Evidence,
) -> Result<MessageTable<R>> {
    let resolved = tree.resolve_evidence(ev)?;
    Ok(compute_messages(tree, info.trunk(), &resolved))
}

fn compute_messages<R: Real>(
    tree: &Tree<R>,
    trunk_nodes: &[usize],
    resolved: &[Option<usize>],
) -> MessageTable<R> {
    let mut on_trunk = vec![false; tree.len()];
    for &n in trunk_nodes {
        on_trunk[n] = true;
    }

    // Subtree of the first trunk node, parents before children.
    let mut order = Vec::new();
    let mut stack = vec![trunk_nodes[0]];
    while let Some(n) = stack.pop() {
        order.push(n);
        stack.extend_from_slice(tree.node(n).children());
    }

    let mut lambda: Vec<Option<(Vec<R>, Vec<R>)>> = vec![None; tree.len()];
    for &n in order.iter().rev() {
        if on_trunk[n] {
            continue;
        }
        let node = tree.node(n);
        let k = node.space().len();

        // Pointwise products of the children's messages.
        let mut beta_lo = vec![R::one(); k];
        let mut beta_hi = vec![R::one(); k];
        for &c in node.children() {
            let (l, u) = lambda[c].as_ref().expect("children are computed first");
            for x in 0..k {
                beta_lo[x] *= l[x];
                beta_hi[x] *= u[x];
            }
        }

        let parent = node.parent().expect("off-trunk nodes have parents");
        let parent_states = tree.node(parent).space().len();
        let mut lam_lo = Vec::with_capacity(parent_states);
        let mut lam_hi = Vec::with_capacity(parent_states);
        match resolved[n] {
            // Instantiated: the local gamble is the indicator of the
            // observed state scaled by the (non-negative) child product,
            // so the envelope reduces to singleton probabilities.
            Some(x) => {
                for p in 0..parent_states {
                    let set = node.conditional(p);
                    lam_lo.push(beta_lo[x] * set.lower_prob(x));
                    lam_hi.push(beta_hi[x] * set.upper_prob(x));
                }
            }
            None => {
                for p in 0..parent_states {
                    let set = node.conditional(p);
                    lam_lo.push(set.lower_dot(&beta_lo));
                    lam_hi.push(set.upper_dot(&beta_hi));
                }
            }
        }
        lambda[n] = Some((lam_lo, lam_hi));
    }

    // Aggregated products on the trunk, in document child order.
    let mut cap = HashMap::with_capacity(trunk_nodes.len());
    for &s in trunk_nodes {
        let k = tree.node(s).space().len();
        let mut lo = vec![R::one(); k];
        let mut hi = vec![R::one(); k];
        for &c in tree.node(s).children() {
            if on_trunk[c] {
                continue;
            }
            let (l, u) = lambda[c].as_ref().expect("off-trunk child computed");
            for x in 0..k {
                lo[x] *= l[x];
                hi[x] *= u[x];
            }
        }
        cap.insert(s, (lo, hi));
    }

    MessageTable { lambda, cap }
}

// --- backbone evaluation ---

/// Evaluator of the trunk sweep `σ(μ)` for one query.
///
/// `σ` is non-increasing and concave in `μ`, with `σ(min g) ≥ 0` and
/// `σ(max g) ≤ 0`; its rightmost zero is the posterior lower expectation.
pub struct BackboneEvaluator<'a, R: Real> {
    tree: &'a Tree<R>,
    info: &'a TrunkInfo,
    messages: &'a MessageTable<R>,
    gamble: Vec<R>,
    e_t_state: Option<usize>,
}

impl<'a, R: Real> BackboneEvaluator<'a, R> {
    /// Builds the evaluator from precomputed trunk info and messages.
    pub fn new(
        tree: &'a Tree<R>,
        info: &'a TrunkInfo,
        messages: &'a MessageTable<R>,
        ev: &Evidence,
        g: &Gamble<R>,
    ) -> Result<Self> {
        let target = tree.node(info.target());
        if !crate::credal_core::same_space(g.space(), target.space()) {
            return Err(Error::SpaceMismatch(format!(
                "gamble is not over the space of target `{}`",
                target.id()
            )));
        }
        let resolved = tree.resolve_evidence(ev)?;
        let e_t_state = info.e_t().map(|e| {
            resolved[e].expect("the greatest instantiated ancestor is instantiated")
        });
        Ok(BackboneEvaluator {
            tree,
            info,
            messages,
            gamble: g.values().to_vec(),
            e_t_state,
        })
    }

    /// Evaluates `σ(μ)`.
    pub fn value(&self, mu: R) -> R {
        let trunk_nodes = self.info.trunk();
        let target = *trunk_nodes.last().expect("trunk is never empty");

        // ψ at the target: split g − μ by sign between the lower and
        // upper child products.
        let (cap_lo, cap_hi) = self.messages.cap(target).expect("target has products");
        let mut psi: Vec<R> = self
            .gamble
            .iter()
            .enumerate()
            .map(|(x, &gx)| {
                let d = gx - mu;
                if d >= R::zero() {
                    d * cap_lo[x]
                } else {
                    d * cap_hi[x]
                }
            })
            .collect();

        // Sweep up the trunk. Trunk nodes above the target carry no
        // evidence factor: the greatest instantiated ancestor is below
        // them by construction.
        let mut child = target;
        for &s in trunk_nodes.iter().rev().skip(1) {
            let m = conditional_lower(self.tree.node(child), &psi);
            let (cap_lo, cap_hi) = self.messages.cap(s).expect("trunk node has products");
            psi = m
                .iter()
                .enumerate()
                .map(|(x, &mx)| {
                    if mx >= R::zero() {
                        mx * cap_lo[x]
                    } else {
                        mx * cap_hi[x]
                    }
                })
                .collect();
            child = s;
        }

        // child == s_t here: condition on the observed ancestor state, or
        // close with the root marginal.
        match self.e_t_state {
            Some(xe) => self.tree.node(child).conditional(xe).lower_dot(&psi),
            None => self.tree.node(child).marginal().lower_dot(&psi),
        }
    }
}

/// Lower expectation of `psi` under each parent state of `node`.
fn conditional_lower<R: Real>(node: &crate::tree_model::Node<R>, psi: &[R]) -> Vec<R> {
    let parent_states = match node.local() {
        LocalModel::Conditional(table) => table.len(),
        LocalModel::Root(_) => unreachable!("the sweep conditions on non-root nodes only"),
    };
    (0..parent_states)
        .map(|p| node.conditional(p).lower_dot(psi))
        .collect()
}

// --- full-tree objective ---

/// Evaluator of the full-tree objective `ρ_g(μ)`: the joint lower
/// expectation of `1_{evidence} · (g − μ)` computed over the whole tree,
/// without the trunk shortcut.
///
/// Used to cross-check the shortcut (their rightmost zeros agree whenever
/// every local model is strictly positive) and to test analytic
/// properties: `ρ_g` is concave, non-increasing, and Lipschitz with
/// constant the evidence's upper probability.
pub struct FullRhoEvaluator<'a, R: Real> {
    tree: &'a Tree<R>,
    path: Vec<usize>,
    messages: MessageTable<R>,
    path_states: Vec<Option<usize>>,
    gamble: Vec<R>,
}

impl<'a, R: Real> FullRhoEvaluator<'a, R> {
    /// Precomputes messages for the whole tree relative to the
    /// root-to-target path.
    pub fn new(tree: &'a Tree<R>, target: &str, ev: &Evidence, g: &Gamble<R>) -> Result<Self> {
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
        let path = tree.path_from_root(t);
        let messages = compute_messages(tree, &path, &resolved);
        let path_states = path.iter().map(|&n| resolved[n]).collect();
        Ok(FullRhoEvaluator {
            tree,
            path,
            messages,
            path_states,
            gamble: g.values().to_vec(),
        })
    }

    /// Evaluates `ρ_g(μ)`.
    pub fn rho(&self, mu: R) -> R {
        let target = *self.path.last().expect("path is never empty");
        let (cap_lo, cap_hi) = self.messages.cap(target).expect("target has products");
        let mut psi: Vec<R> = self
            .gamble
            .iter()
            .enumerate()
            .map(|(x, &gx)| {
                let d = gx - mu;
                if d >= R::zero() {
                    d * cap_lo[x]
                } else {
                    d * cap_hi[x]
                }
            })
            .collect();

        let mut child = target;
        for (i, &s) in self.path.iter().enumerate().rev().skip(1) {
            let m = conditional_lower(self.tree.node(child), &psi);
            let (cap_lo, cap_hi) = self.messages.cap(s).expect("path node has products");
            let split = |x: usize, v: R| {
                if v >= R::zero() {
                    v * cap_lo[x]
                } else {
                    v * cap_hi[x]
                }
            };
            // Instantiated path nodes contribute their indicator: ψ is
            // supported on the observed state only.
            psi = match self.path_states[i] {
                Some(xs) => {
                    let mut vec = vec![R::zero(); m.len()];
                    vec[xs] = split(xs, m[xs]);
                    vec
                }
                None => m.iter().enumerate().map(|(x, &v)| split(x, v)).collect(),
            };
            child = s;
        }

        let root = self.tree.node(child);
        match self.path_states[0] {
            Some(xr) => {
                let v = psi[xr];
                if v >= R::zero() {
                    v * root.marginal().lower_prob(xr)
                } else {
                    v * root.marginal().upper_prob(xr)
                }
            }
            None => root.marginal().lower_dot(&psi),
        }
    }
}

// --- evidence probability ---

#[derive(Clone, Copy)]
enum Bound {
    Lower,
    Upper,
}

fn evidence_probability<R: Real>(tree: &Tree<R>, ev: &Evidence, bound: Bound) -> Result<R> {
    if ev.is_empty() {
        return Ok(R::one());
    }
    let resolved = tree.resolve_evidence(ev)?;

    let expect = |set: &CredalSet<R>, beta: &[R]| match bound {
        Bound::Lower => set.lower_dot(beta),
        Bound::Upper => set.upper_dot(beta),
    };
    let singleton = |set: &CredalSet<R>, x: usize| match bound {
        Bound::Lower => set.lower_prob(x),
        Bound::Upper => set.upper_prob(x),
    };

    let mut lambda: Vec<Vec<R>> = vec![Vec::new(); tree.len()];
    for &n in tree.topological_order().iter().rev() {
        let node = tree.node(n);
        let k = node.space().len();
        let mut beta = vec![R::one(); k];
        for &c in node.children() {
            for x in 0..k {
                beta[x] *= lambda[c][x];
            }
        }
        match node.local() {
            LocalModel::Root(marginal) => {
                return Ok(match resolved[n] {
                    Some(x) => beta[x] * singleton(marginal, x),
                    None => expect(marginal, &beta),
                });
            }
            LocalModel::Conditional(table) => {
                let mut lam = Vec::with_capacity(table.len());
                match resolved[n] {
                    Some(x) => {
                        for set in table {
                            lam.push(beta[x] * singleton(set, x));
                        }
                    }
                    None => {
                        for set in table {
                            lam.push(expect(set, &beta));
                        }
                    }
                }
                lambda[n] = lam;
            }
        }
    }
    unreachable!("the reverse topological order ends at the root")
}

/// Upper probability of the evidence event, by the whole-tree upper
/// message recursion. Returns 1 for empty evidence.
pub fn upper_evidence_probability<R: Real>(tree: &Tree<R>, ev: &Evidence) -> Result<R> {
    evidence_probability(tree, ev, Bound::Upper)
}

/// Lower-message analogue of [`upper_evidence_probability`]. When this
/// value is strictly positive the trunk sweep has a unique zero.
pub fn lower_evidence_probability<R: Real>(tree: &Tree<R>, ev: &Evidence) -> Result<R> {
    evidence_probability(tree, ev, Bound::Lower)
}

// --- root finding ---

/// Result of a one-dimensional root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootFindOutcome<R: Real> {
    /// Estimated rightmost root.
    pub root: R,
    /// Number of function evaluations spent.
    pub evaluations: u32,
    /// True when a concavity violation forced a plain-bisection restart.
    pub bisection_fallback: bool,
}

/// Finds the rightmost root of a concave, non-increasing function on
/// `[lo, hi]` with `f(lo) ≥ 0 ≥ f(hi)`.
///
/// Maintains a four-point state `a ≤ b ≤ c ≤ d` with
/// `f(a) ≥ f(b) ≥ 0 > f(c) ≥ f(d)`. The chord through `(b, c)` crosses
/// zero at a point `p` left of the root; the outer secants through
/// `(a, b)` and `(c, d)`, extended to the axis, cross right of it. The
/// probe is the midpoint of `[p, m]`, which at least halves the bracket
/// each step and typically does far better once the secants take over.
/// An exact zero at the probe ends the search immediately whenever a
/// strictly positive value has been seen: concavity then forbids further
/// zeros to the right. If the samples ever contradict concavity or
/// monotonicity, the search restarts as plain bisection on the current
/// sign bracket and flags the result.
pub fn find_rightmost_root<R: Real>(
    mut f: impl FnMut(R) -> R,
    lo: R,
    hi: R,
    tol: R,
) -> Result<RootFindOutcome<R>> {
    if !(tol > R::zero()) {
        return Err(Error::NonPositiveTolerance(tol.to_f64_lossy()));
    }
    let mut evals: u32 = 0;
    let mut eval = |x: R, evals: &mut u32| {
        *evals += 1;
        f(x)
    };

    let f_lo = eval(lo, &mut evals);
    let f_hi = eval(hi, &mut evals);
    if f_lo < R::zero() || f_hi > R::zero() {
        return Err(Error::BracketViolation {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
            f_lo: f_lo.to_f64_lossy(),
            f_hi: f_hi.to_f64_lossy(),
        });
    }
    if f_hi == R::zero() {
        return Ok(RootFindOutcome {
            root: hi,
            evaluations: evals,
            bisection_fallback: false,
        });
    }
    if hi - lo <= tol {
        return Ok(RootFindOutcome {
            root: (lo + hi) / two::<R>(),
            evaluations: evals,
            bisection_fallback: false,
        });
    }

    // Seed the four-point state with two interior probes.
    let third = (hi - lo) / R::from_f64_lossy(3.0);
    let t1 = lo + third;
    let t2 = lo + third + third;
    let f1 = eval(t1, &mut evals);
    let f2 = eval(t2, &mut evals);
    let pts = [(lo, f_lo), (t1, f1), (t2, f2), (hi, f_hi)];

    // Samples of a non-increasing function must not increase.
    let monotone = pts.windows(2).all(|w| w[0].1 >= w[1].1);
    if !monotone {
        return bisection_from(&mut f, pts_bracket(&pts), tol, evals);
    }

    let split = pts.iter().position(|&(_, v)| v < R::zero()).expect("f(hi) < 0");
    let (mut b, mut fb) = pts[split - 1];
    let (mut c, mut fc) = pts[split];
    let (mut a, mut fa) = if split >= 2 { pts[split - 2] } else { pts[split - 1] };
    let (mut d, mut fd) = if split + 1 < 4 { pts[split + 1] } else { pts[split] };
    let mut positive_seen = pts.iter().any(|&(_, v)| v > R::zero());

    let mut p = chord_zero(b, fb, c, fc).max(b);
    let mut m = c;
    if fa > fb {
        m = m.min(secant_zero(a, fa, b, fb));
    }
    if fc > fd {
        m = m.min(secant_zero(c, fc, d, fd));
    }
    if p - m > bracket_noise(p, m) {
        return bisection_from(&mut f, (b, c), tol, evals);
    }

    let max_iters = 64 + 2 * bisection_steps(hi - lo, tol);
    for _ in 0..max_iters {
        if m - p <= tol {
            return Ok(RootFindOutcome {
                root: (p + m) / two::<R>(),
                evaluations: evals,
                bisection_fallback: false,
            });
        }
        let t = (p + m) / two::<R>();
        let ft = eval(t, &mut evals);

        // t lies in (b, c); a non-increasing f keeps ft within [fc, fb].
        if ft > fb || ft < fd.min(fc) {
            return bisection_from(&mut f, (b, c), tol, evals);
        }

        if ft >= R::zero() {
            if ft == R::zero() && positive_seen {
                return Ok(RootFindOutcome {
                    root: t,
                    evaluations: evals,
                    bisection_fallback: false,
                });
            }
            if ft > R::zero() {
                positive_seen = true;
            }
            a = b;
            fa = fb;
            b = t;
            fb = ft;
        } else {
            d = c;
            fd = fc;
            c = t;
            fc = ft;
        }

        // Under concavity both bounds shrink monotonically; collinear
        // samples can regress a recomputed bound by an ulp, so keep the
        // intersection of the old and new brackets instead of treating
        // roundoff as a violation.
        p = p.max(chord_zero(b, fb, c, fc));
        let mut m_new = c;
        if fa > fb {
            m_new = m_new.min(secant_zero(a, fa, b, fb));
        }
        if fc > fd {
            m_new = m_new.min(secant_zero(c, fc, d, fd));
        }
        m = m.min(m_new);
        // A bracket inverted beyond roundoff contradicts concavity.
        if p - m > bracket_noise(p, m) {
            return bisection_from(&mut f, (b, c), tol, evals);
        }
    }
    bisection_from(&mut f, (b, c), tol, evals)
}

/// Plain bisection for the rightmost root; the baseline the hybrid finder
/// is measured against.
pub fn bisection_rightmost_root<R: Real>(
    mut f: impl FnMut(R) -> R,
    lo: R,
    hi: R,
    tol: R,
) -> Result<RootFindOutcome<R>> {
    if !(tol > R::zero()) {
        return Err(Error::NonPositiveTolerance(tol.to_f64_lossy()));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    let evals = 2;
    if f_lo < R::zero() || f_hi > R::zero() {
        return Err(Error::BracketViolation {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
            f_lo: f_lo.to_f64_lossy(),
            f_hi: f_hi.to_f64_lossy(),
        });
    }
    if f_hi == R::zero() {
        return Ok(RootFindOutcome {
            root: hi,
            evaluations: evals,
            bisection_fallback: false,
        });
    }
    let (root, extra) = bisect(&mut f, lo, hi, tol);
    Ok(RootFindOutcome {
        root,
        evaluations: evals + extra,
        bisection_fallback: false,
    })
}

fn two<R: Real>() -> R {
    R::one() + R::one()
}

fn chord_zero<R: Real>(b: R, fb: R, c: R, fc: R) -> R {
    // fb ≥ 0 > fc, so the denominator is positive and the zero lies in [b, c).
    ((fb * c) - (fc * b)) / (fb - fc)
}

fn secant_zero<R: Real>(x0: R, f0: R, x1: R, f1: R) -> R {
    // Requires f0 > f1; the line through both points crosses zero at:
    ((f0 * x1) - (f1 * x0)) / (f0 - f1)
}

fn bracket_noise<R: Real>(p: R, m: R) -> R {
    // Scale of a few ulps around the bracket; inversions within it are
    // roundoff, not evidence against concavity.
    (p.abs() + m.abs() + R::one()) * R::epsilon() * R::from_f64_lossy(4.0)
}

fn pts_bracket<R: Real>(pts: &[(R, R); 4]) -> (R, R) {
    // Rightmost non-negative sample and the last point bound the root even
    // when interior samples are inconsistent.
    let b = pts
        .iter()
        .filter(|&&(_, v)| v >= R::zero())
        .map(|&(x, _)| x)
        .fold(pts[0].0, R::max);
    let c = pts[3].0;
    (b, c)
}

fn bisection_steps<R: Real>(width: R, tol: R) -> u32 {
    let mut steps = 0;
    let mut w = width;
    while w > tol && steps < 4096 {
        w = w / two::<R>();
        steps += 1;
    }
    steps
}

fn bisect<R: Real>(f: &mut impl FnMut(R) -> R, mut lo: R, mut hi: R, tol: R) -> (R, u32) {
    let mut evals = 0;
    while hi - lo > tol {
        let mid = (lo + hi) / two::<R>();
        if mid <= lo || mid >= hi {
            break;
        }
        evals += 1;
        if f(mid) >= R::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ((lo + hi) / two::<R>(), evals)
}

fn bisection_from<R: Real>(
    f: &mut impl FnMut(R) -> R,
    bracket: (R, R),
    tol: R,
    evals: u32,
) -> Result<RootFindOutcome<R>> {
    let (root, extra) = bisect(f, bracket.0, bracket.1, tol);
    Ok(RootFindOutcome {
        root,
        evaluations: evals + extra,
        bisection_fallback: true,
    })
}

// --- posterior queries ---

/// Outcome of a posterior expectation query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorResult<R: Real> {
    /// The computed posterior expectation bound.
    pub value: R,
    /// The other bound, when the caller asked for both.
    pub conjugate_value: Option<R>,
    /// σ evaluations spent by the root finder.
    pub evaluations: u32,
    /// True when the evidence had upper probability zero and the result
    /// is the vacuous bound.
    pub vacuous: bool,
    /// Upper probability of the evidence event (1 for empty evidence).
    pub evidence_upper_prob: R,
    /// Root-finder tolerance used.
    pub tol: R,
    /// True when the root finder fell back to plain bisection.
    pub bisection_fallback: bool,
}

/// Reusable query state: trunk, μ-free messages, and the evidence's upper
/// probability for one (tree, target, evidence) triple.
///
/// The messages do not depend on the gamble, so one engine answers any
/// number of gamble queries against the same target and evidence; the
/// pairwise-dominance loop in the hidden Markov application relies on
/// this.
pub struct QueryEngine<'t, R: Real> {
    tree: &'t Tree<R>,
    info: TrunkInfo,
    messages: MessageTable<R>,
    evidence: Evidence,
    evidence_upper: R,
}

impl<'t, R: Real> QueryEngine<'t, R> {
    /// Computes trunk, messages, and evidence probability for a query.
    pub fn new(tree: &'t Tree<R>, target: &str, ev: &Evidence) -> Result<Self> {
        let info = trunk(tree, target, ev)?;
        let resolved = tree.resolve_evidence(ev)?;
        let messages = compute_messages(tree, info.trunk(), &resolved);
        let evidence_upper = upper_evidence_probability(tree, ev)?;
        Ok(QueryEngine {
            tree,
            info,
            messages,
            evidence: ev.clone(),
            evidence_upper,
        })
    }

    /// The trunk computed for this query.
    pub fn trunk_info(&self) -> &TrunkInfo {
        &self.info
    }

    /// Upper probability of the evidence event.
    pub fn evidence_upper_prob(&self) -> R {
        self.evidence_upper
    }

    /// Lower posterior expectation of `g` under regular extension.
    pub fn posterior_lower(&self, g: &Gamble<R>, tol: R) -> Result<PosteriorResult<R>> {
        if !(tol > R::zero()) {
            return Err(Error::NonPositiveTolerance(tol.to_f64_lossy()));
        }
        let lo = g.min_value();
        let hi = g.max_value();

        if !self.evidence.is_empty() && self.evidence_upper == R::zero() {
            return Ok(PosteriorResult {
                value: lo,
                conjugate_value: None,
                evaluations: 0,
                vacuous: true,
                evidence_upper_prob: self.evidence_upper,
                tol,
                bisection_fallback: false,
            });
        }
        if lo == hi {
            return Ok(PosteriorResult {
                value: lo,
                conjugate_value: None,
                evaluations: 0,
                vacuous: false,
                evidence_upper_prob: self.evidence_upper,
                tol,
                bisection_fallback: false,
            });
        }

        let be = BackboneEvaluator::new(self.tree, &self.info, &self.messages, &self.evidence, g)?;
        let outcome = find_rightmost_root(|mu| be.value(mu), lo, hi, tol)?;
        Ok(PosteriorResult {
            value: outcome.root.max(lo).min(hi),
            conjugate_value: None,
            evaluations: outcome.evaluations,
            vacuous: false,
            evidence_upper_prob: self.evidence_upper,
            tol,
            bisection_fallback: outcome.bisection_fallback,
        })
    }

    /// Upper posterior expectation: the negated lower expectation of `-g`.
    pub fn posterior_upper(&self, g: &Gamble<R>, tol: R) -> Result<PosteriorResult<R>> {
        let mut res = self.posterior_lower(&g.negated(), tol)?;
        res.value = -res.value;
        Ok(res)
    }

    /// Both posterior bounds of one gamble.
    pub fn posterior_interval(&self, g: &Gamble<R>, tol: R) -> Result<PosteriorResult<R>> {
        let lower = self.posterior_lower(g, tol)?;
        let upper = self.posterior_upper(g, tol)?;
        Ok(PosteriorResult {
            conjugate_value: Some(upper.value),
            evaluations: lower.evaluations + upper.evaluations,
            bisection_fallback: lower.bisection_fallback || upper.bisection_fallback,
            ..lower
        })
    }

    /// Posterior probability interval of one target state.
    pub fn interval_event(&self, state: &str, tol: R) -> Result<(R, R)> {
        let target = self.tree.node(self.info.target());
        let g = Gamble::indicator_of(target.space().clone(), state).map_err(|_| {
            Error::UnknownState {
                node: target.id().to_string(),
                state: state.to_string(),
            }
        })?;
        let res = self.posterior_interval(&g, tol)?;
        Ok((res.value, res.conjugate_value.expect("both bounds computed")))
    }
}

/// One-shot lower posterior expectation.
pub fn posterior_lower<R: Real>(
    tree: &Tree<R>,
    target: &str,
    ev: &Evidence,
    g: &Gamble<R>,
    tol: R,
) -> Result<PosteriorResult<R>> {
    QueryEngine::new(tree, target, ev)?.posterior_lower(g, tol)
}

/// One-shot upper posterior expectation.
pub fn posterior_upper<R: Real>(
    tree: &Tree<R>,
    target: &str,
    ev: &Evidence,
    g: &Gamble<R>,
    tol: R,
) -> Result<PosteriorResult<R>> {
    QueryEngine::new(tree, target, ev)?.posterior_upper(g, tol)
}

/// One-shot posterior probability interval of a target state.
pub fn posterior_interval_event<R: Real>(
    tree: &Tree<R>,
    target: &str,
    ev: &Evidence,
    state: &str,
    tol: R,
) -> Result<(R, R)> {
    QueryEngine::new(tree, target, ev)?.interval_event(state, tol)
}
