//! Finite-space gambles and credal sets.
//!
//! A credal set is stored as the explicit, finite list of its vertex mass
//! functions. Expectation is linear in the mass function, so the lower
//! (upper) expectation of a gamble over the whole convex set is attained
//! at a vertex; evaluating an envelope therefore needs no linear
//! programming, just a minimum (maximum) of dot products.
//!
//! Lower and upper expectations obtained this way are coherent: they
//! accept partial gains (the lower expectation never drops below the
//! gamble's minimum), they are super-additive, and they are non-negatively
//! homogeneous. The property suite in `tests/` exercises all three.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

// --- state spaces ---

/// Ordered, non-empty list of distinct state labels.
///
/// Positional indexing is stable: every gamble and mass function over the
/// space stores one value per label, in label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    /// Builds a shared state space from distinct labels.
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyStateSpace);
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::DuplicateState(a.clone()));
            }
        }
        Ok(Arc::new(StateSpace { labels }))
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True for the degenerate one-state space only when empty; spaces are
    /// never empty, so this always returns false. Provided for idiom.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// All labels in order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Label at a position.
    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    /// Position of a label, if present.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Two spaces agree when they are the same allocation or have equal labels.
pub fn same_space(a: &Arc<StateSpace>, b: &Arc<StateSpace>) -> bool {
    Arc::ptr_eq(a, b) || a.labels == b.labels
}

fn ensure_same_space(a: &Arc<StateSpace>, b: &Arc<StateSpace>, what: &str) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "{what}: {:?} vs {:?}",
            a.labels, b.labels
        )))
    }
}

// --- gambles ---

/// A real-valued map on a state space; the object expectations evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamble<R: Real> {
    space: Arc<StateSpace>,
    values: Vec<R>,
}

impl<R: Real> Gamble<R> {
    /// Builds a gamble, rejecting NaN and infinities.
    pub fn new(space: Arc<StateSpace>, values: &[R]) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Gamble {
            space,
            values: values.to_vec(),
        })
    }

    /// The constant gamble `c`.
    pub fn constant(space: Arc<StateSpace>, c: R) -> Result<Self> {
        let values = vec![c; space.len()];
        Gamble::new(space, &values)
    }

    /// The indicator of a single state, by position.
    pub fn indicator(space: Arc<StateSpace>, index: usize) -> Self {
        let mut values = vec![R::zero(); space.len()];
        values[index] = R::one();
        Gamble { space, values }
    }

    /// The indicator of a single state, by label.
    pub fn indicator_of(space: Arc<StateSpace>, label: &str) -> Result<Self> {
        match space.index_of(label) {
            Some(i) => Ok(Gamble::indicator(space, i)),
            None => Err(Error::UnknownState {
                node: String::new(),
                state: label.to_string(),
            }),
        }
    }

    /// The underlying space.
    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    /// One value per state, in label order.
    pub fn values(&self) -> &[R] {
        &self.values
    }

    /// Smallest value.
    pub fn min_value(&self) -> R {
        self.values.iter().copied().fold(R::infinity(), R::min)
    }

    /// Largest value.
    pub fn max_value(&self) -> R {
        self.values.iter().copied().fold(R::neg_infinity(), R::max)
    }

    /// The negated gamble, used for conjugate (upper) evaluations.
    pub fn negated(&self) -> Self {
        Gamble {
            space: self.space.clone(),
            values: self.values.iter().map(|v| -*v).collect(),
        }
    }
}

// --- mass functions ---

/// Normalization slack accepted on construction. Inputs within this
/// distance of total mass 1 are renormalized; anything further is
/// rejected. The bound widens for low-precision scalars, where even a
/// freshly normalized vector can miss 1 by more than 1e-12.
fn normalization_tolerance<R: Real>() -> R {
    let floor = R::from_f64_lossy(1e-12);
    let eps16 = R::epsilon() * R::from_f64_lossy(16.0);
    floor.max(eps16)
}

/// A probability mass function on a state space.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction<R: Real> {
    space: Arc<StateSpace>,
    probs: Vec<R>,
}

impl<R: Real> MassFunction<R> {
    /// Builds a mass function. Probabilities must be non-negative and sum
    /// to 1 within the normalization tolerance; the stored vector is
    /// renormalized to sum to 1.
    pub fn new(space: Arc<StateSpace>, probs: &[R]) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: probs.len(),
            });
        }
        let tol = normalization_tolerance::<R>();
        let mut stored = Vec::with_capacity(probs.len());
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteValue(i));
            }
            if p < -tol {
                return Err(Error::NegativeProbability {
                    index: i,
                    value: p.to_f64_lossy(),
                });
            }
            stored.push(p.max(R::zero()));
        }
        let sum: R = stored.iter().copied().sum();
        if (sum - R::one()).abs() > tol {
            return Err(Error::NotNormalized {
                sum: sum.to_f64_lossy(),
            });
        }
        if sum != R::one() {
            for p in &mut stored {
                *p /= sum;
            }
        }
        Ok(MassFunction {
            space,
            probs: stored,
        })
    }

    /// The point mass on one state.
    pub fn point_mass(space: Arc<StateSpace>, index: usize) -> Self {
        let mut probs = vec![R::zero(); space.len()];
        probs[index] = R::one();
        MassFunction { space, probs }
    }

    /// The uniform mass function.
    pub fn uniform(space: Arc<StateSpace>) -> Self {
        let n = R::from_usize(space.len()).expect("space size fits the scalar");
        let probs = vec![R::one() / n; space.len()];
        MassFunction { space, probs }
    }

    /// The underlying space.
    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    /// One probability per state, in label order.
    pub fn probs(&self) -> &[R] {
        &self.probs
    }

    /// Expectation of a gamble under this mass function.
    pub fn expectation(&self, g: &Gamble<R>) -> Result<R> {
        ensure_same_space(&self.space, &g.space, "expectation")?;
        Ok(dot(&self.probs, &g.values))
    }
}

fn dot<R: Real>(p: &[R], v: &[R]) -> R {
    p.iter().zip(v).map(|(&a, &b)| a * b).sum()
}

// --- credal sets ---

/// A credal set given by the explicit list of its vertices.
///
/// The induced lower expectation is the minimum of the vertex
/// expectations; the upper expectation is the conjugate maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalSet<R: Real> {
    space: Arc<StateSpace>,
    vertices: Vec<MassFunction<R>>,
}

impl<R: Real> CredalSet<R> {
    /// Builds a credal set from a non-empty vertex list over one space.
    pub fn new(vertices: Vec<MassFunction<R>>) -> Result<Self> {
        let first = vertices.first().ok_or(Error::EmptyCredalSet)?;
        let space = first.space.clone();
        for v in &vertices[1..] {
            ensure_same_space(&space, &v.space, "credal set vertices")?;
        }
        Ok(CredalSet { space, vertices })
    }

    /// The precise (single-vertex) credal set of one mass function.
    pub fn linear(p: MassFunction<R>) -> Self {
        CredalSet {
            space: p.space.clone(),
            vertices: vec![p],
        }
    }

    /// The vacuous credal set: all point masses, hence no information
    /// beyond the space itself. Its lower expectation of any gamble is the
    /// gamble's minimum.
    pub fn vacuous(space: Arc<StateSpace>) -> Self {
        let vertices = (0..space.len())
            .map(|i| MassFunction::point_mass(space.clone(), i))
            .collect();
        CredalSet { space, vertices }
    }

    /// The underlying space.
    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    /// The vertex list.
    pub fn vertices(&self) -> &[MassFunction<R>] {
        &self.vertices
    }

    /// True when the set has a single vertex.
    pub fn is_precise(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Lower expectation: the minimum vertex expectation of `g`.
    pub fn lower_expectation(&self, g: &Gamble<R>) -> Result<R> {
        ensure_same_space(&self.space, &g.space, "lower expectation")?;
        Ok(self.lower_dot(&g.values))
    }

    /// Upper expectation, by conjugacy equal to `-lower(-g)`.
    pub fn upper_expectation(&self, g: &Gamble<R>) -> Result<R> {
        ensure_same_space(&self.space, &g.space, "upper expectation")?;
        Ok(self.upper_dot(&g.values))
    }

    /// Lower expectation of a raw value vector (no space check).
    pub fn lower_dot(&self, values: &[R]) -> R {
        debug_assert_eq!(values.len(), self.space.len());
        self.vertices
            .iter()
            .map(|v| dot(&v.probs, values))
            .fold(R::infinity(), R::min)
    }

    /// Upper expectation of a raw value vector (no space check).
    ///
    /// Computed as the negated lower expectation of the negated vector, so
    /// conjugacy holds to the last bit; rounding is symmetric under sign,
    /// so this also equals the maximum vertex expectation.
    pub fn upper_dot(&self, values: &[R]) -> R {
        let negated: Vec<R> = values.iter().map(|&v| -v).collect();
        -self.lower_dot(&negated)
    }

    /// Lower probability of the singleton at `index`.
    pub fn lower_prob(&self, index: usize) -> R {
        self.vertices
            .iter()
            .map(|v| v.probs[index])
            .fold(R::infinity(), R::min)
    }

    /// Upper probability of the singleton at `index`.
    pub fn upper_prob(&self, index: usize) -> R {
        self.vertices
            .iter()
            .map(|v| v.probs[index])
            .fold(R::neg_infinity(), R::max)
    }

    /// True when every singleton has strictly positive upper probability.
    ///
    /// Strict positivity of every local model is what licenses the
    /// sign-test shortcut in the propagation engine.
    pub fn is_strictly_positive(&self) -> bool {
        (0..self.space.len()).all(|i| self.upper_prob(i) > R::zero())
    }
}

impl<R: Real> From<MassFunction<R>> for CredalSet<R> {
    fn from(p: MassFunction<R>) -> Self {
        CredalSet::linear(p)
    }
}

/// Free-function form of [`CredalSet::linear`]: the precise model `{p}`.
pub fn linear_model<R: Real>(p: MassFunction<R>) -> CredalSet<R> {
    CredalSet::linear(p)
}

/// Free-function form of [`CredalSet::vacuous`]: all mass functions on
/// the space (its point masses as vertices).
pub fn vacuous_model<R: Real>(space: Arc<StateSpace>) -> CredalSet<R> {
    CredalSet::vacuous(space)
}

// --- imprecise Dirichlet model ---

/// Observation counts plus the IDM caution parameter `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable<R: Real> {
    space: Arc<StateSpace>,
    counts: Vec<u64>,
    hyper_s: R,
}

impl<R: Real> CountTable<R> {
    /// Builds a count table; `hyper_s` must be strictly positive.
    pub fn new(space: Arc<StateSpace>, counts: &[u64], hyper_s: R) -> Result<Self> {
        if counts.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: counts.len(),
            });
        }
        if !(hyper_s > R::zero()) {
            return Err(Error::NonPositiveHyper(hyper_s.to_f64_lossy()));
        }
        Ok(CountTable {
            space,
            counts: counts.to_vec(),
            hyper_s,
        })
    }

    /// The underlying space.
    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    /// Raw counts, one per state.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The caution parameter `s`.
    pub fn hyper_s(&self) -> R {
        self.hyper_s
    }

    /// Total number of observations.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Builds the IDM credal set for a count table.
///
/// The set has one vertex per state `z`, with probabilities
/// `p_z(x) = (n_x + s·[x = z]) / (s + N)` where `N` is the total count.
/// Its singleton probability envelope is `[n_x / (s + N), (n_x + s) / (s + N)]`;
/// with all-zero counts the set is vacuous.
pub fn idm_from_counts<R: Real>(table: &CountTable<R>) -> CredalSet<R> {
    let n_states = table.space.len();
    let s = table.hyper_s;
    let denom = s + R::from_u64(table.total()).expect("count fits the scalar");
    let base: Vec<R> = table
        .counts
        .iter()
        .map(|&n| R::from_u64(n).expect("count fits the scalar"))
        .collect();
    let vertices = (0..n_states)
        .map(|z| {
            let probs: Vec<R> = (0..n_states)
                .map(|x| {
                    let extra = if x == z { s } else { R::zero() };
                    (base[x] + extra) / denom
                })
                .collect();
            MassFunction {
                space: table.space.clone(),
                probs,
            }
        })
        .collect();
    CredalSet {
        space: table.space.clone(),
        vertices,
    }
}

// --- validation report ---

/// Outcome of checking raw credal-set data.
#[derive(Debug, Clone)]
pub struct CredalReport {
    /// One entry per problem found, naming the offending vertex.
    pub issues: Vec<String>,
    /// Whether every singleton has strictly positive upper probability.
    pub strictly_positive: bool,
}

impl CredalReport {
    /// True when no structural problems were found. A set can pass while
    /// not being strictly positive; positivity is reported separately.
    pub fn pass(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks raw vertex rows against the credal-set invariants.
///
/// Operates on unvalidated data so that it can report exactly what the
/// constructors would reject (negative entries, broken normalization),
/// plus whether the would-be set is strictly positive.
pub fn check_credal_rows<R: Real>(n_states: usize, rows: &[Vec<R>]) -> CredalReport {
    let tol = normalization_tolerance::<R>();
    let mut issues = Vec::new();
    if rows.is_empty() {
        issues.push("no vertices".to_string());
    }
    for (k, row) in rows.iter().enumerate() {
        if row.len() != n_states {
            issues.push(format!(
                "vertex {k}: {} entries for a {n_states}-state space",
                row.len()
            ));
            continue;
        }
        for (i, &p) in row.iter().enumerate() {
            if !p.is_finite() {
                issues.push(format!("vertex {k}: entry {i} is not finite"));
            } else if p < -tol {
                issues.push(format!(
                    "vertex {k}: negative probability {} at entry {i}",
                    p.to_f64_lossy()
                ));
            }
        }
        let sum: R = row.iter().copied().sum();
        if (sum - R::one()).abs() > tol {
            issues.push(format!(
                "vertex {k}: probabilities sum to {}, not 1",
                sum.to_f64_lossy()
            ));
        }
    }
    let strictly_positive = !rows.is_empty()
        && rows.iter().all(|row| row.len() == n_states)
        && (0..n_states).all(|i| {
            rows.iter()
                .map(|row| row[i])
                .fold(R::neg_infinity(), R::max)
                > R::zero()
        });
    CredalReport {
        issues,
        strictly_positive,
    }
}

/// Checks a constructed credal set; see [`check_credal_rows`].
pub fn check_credal_set<R: Real>(set: &CredalSet<R>) -> CredalReport {
    let rows: Vec<Vec<R>> = set.vertices.iter().map(|v| v.probs.clone()).collect();
    check_credal_rows(set.space.len(), &rows)
}
