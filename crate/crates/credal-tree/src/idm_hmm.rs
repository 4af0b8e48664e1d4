//! Imprecise hidden Markov models learned from sequence data.
//!
//! A stationary hidden Markov chain is quantified from paired
//! generative/observed sequences by counting initial symbols,
//! transitions, and emissions, and turning each count row into a credal
//! set with the imprecise Dirichlet model. Recognition unrolls the model
//! into an imprecise Markov tree (a generative chain with one emission
//! leaf per step), conditions on the observed symbols, and reports the
//! maximal states of the final generative variable: those not strictly
//! dominated in posterior lower expectation by any other state.
//!
//! Predictions carry both the set-valued answer and the answer of a
//! precise companion model built from the same counts; the companion
//! mass functions lie inside the credal sets, so the companion's
//! prediction is always one of the maximal states.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::credal_core::{
    idm_from_counts, linear_model, CountTable, CredalSet, Gamble, MassFunction, StateSpace,
};
use crate::error::{Error, Result};
use crate::io::HmmDoc;
use crate::propagation::QueryEngine;
use crate::scalar::Real;
use crate::tree_model::{Evidence, Tree, TreeBuilder};

/// A generative sequence paired with its observed counterpart, both over
/// one alphabet and of equal length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequencePair {
    alphabet: Arc<StateSpace>,
    generative: Vec<usize>,
    observed: Vec<usize>,
}

impl SequencePair {
    /// Builds a pair from symbol labels, resolving them in the alphabet.
    pub fn new<I, J>(alphabet: Arc<StateSpace>, generative: I, observed: J) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
        J: IntoIterator,
        J::Item: AsRef<str>,
    {
        let resolve = |items: &mut dyn Iterator<Item = &str>| -> Result<Vec<usize>> {
            items
                .map(|label| {
                    alphabet
                        .index_of(label)
                        .ok_or_else(|| Error::UnknownSymbol(label.to_string()))
                })
                .collect()
        };
        let generative: Vec<String> = generative.into_iter().map(|s| s.as_ref().to_string()).collect();
        let observed: Vec<String> = observed.into_iter().map(|s| s.as_ref().to_string()).collect();
        let generative = resolve(&mut generative.iter().map(String::as_str))?;
        let observed = resolve(&mut observed.iter().map(String::as_str))?;
        if generative.is_empty() {
            return Err(Error::EmptySequence);
        }
        if generative.len() != observed.len() {
            return Err(Error::SequenceLengthMismatch {
                generative: generative.len(),
                observed: observed.len(),
            });
        }
        Ok(SequencePair {
            alphabet,
            generative,
            observed,
        })
    }

    /// The shared alphabet.
    pub fn alphabet(&self) -> &Arc<StateSpace> {
        &self.alphabet
    }

    /// Generative symbols as indices into the alphabet.
    pub fn generative(&self) -> &[usize] {
        &self.generative
    }

    /// Observed symbols as indices into the alphabet.
    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    /// Sequence length.
    pub fn len(&self) -> usize {
        self.generative.len()
    }

    /// True when the pair holds no symbols (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.generative.is_empty()
    }

    /// Observed symbols as labels.
    pub fn observed_labels(&self) -> Vec<&str> {
        self.observed.iter().map(|&x| self.alphabet.label(x)).collect()
    }
}

/// A stationary imprecise hidden Markov model: credal sets for the
/// initial symbol, the transitions, and the emissions, all derived from
/// retained count tables via the imprecise Dirichlet model.
#[derive(Debug, Clone)]
pub struct ImpreciseHmm<R: Real> {
    alphabet: Arc<StateSpace>,
    hyper_s: R,
    initial_counts: Vec<u64>,
    transition_counts: Vec<Vec<u64>>,
    emission_counts: Vec<Vec<u64>>,
    initial: CredalSet<R>,
    transition: Vec<CredalSet<R>>,
    emission: Vec<CredalSet<R>>,
}

impl<R: Real> ImpreciseHmm<R> {
    fn from_counts(
        alphabet: Arc<StateSpace>,
        initial_counts: Vec<u64>,
        transition_counts: Vec<Vec<u64>>,
        emission_counts: Vec<Vec<u64>>,
        hyper_s: R,
    ) -> Result<Self> {
        let k = alphabet.len();
        let set = |counts: &[u64]| -> Result<CredalSet<R>> {
            let table = CountTable::new(alphabet.clone(), counts, hyper_s)?;
            Ok(idm_from_counts(&table))
        };
        if initial_counts.len() != k
            || transition_counts.len() != k
            || emission_counts.len() != k
            || transition_counts.iter().any(|r| r.len() != k)
            || emission_counts.iter().any(|r| r.len() != k)
        {
            return Err(Error::LengthMismatch {
                expected: k,
                got: initial_counts.len(),
            });
        }
        let initial = set(&initial_counts)?;
        let transition = transition_counts
            .iter()
            .map(|r| set(r))
            .collect::<Result<Vec<_>>>()?;
        let emission = emission_counts
            .iter()
            .map(|r| set(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(ImpreciseHmm {
            alphabet,
            hyper_s,
            initial_counts,
            transition_counts,
            emission_counts,
            initial,
            transition,
            emission,
        })
    }

    /// The alphabet shared by generative and observed symbols.
    pub fn alphabet(&self) -> &Arc<StateSpace> {
        &self.alphabet
    }

    /// The caution parameter used for every credal set.
    pub fn hyper_s(&self) -> R {
        self.hyper_s
    }

    /// Credal set of the initial generative symbol.
    pub fn initial_set(&self) -> &CredalSet<R> {
        &self.initial
    }

    /// Credal set of the successor of generative symbol `x`.
    pub fn transition_set(&self, x: usize) -> &CredalSet<R> {
        &self.transition[x]
    }

    /// Credal set of the observation emitted by generative symbol `x`.
    pub fn emission_set(&self, x: usize) -> &CredalSet<R> {
        &self.emission[x]
    }

    /// Initial-symbol counts.
    pub fn initial_counts(&self) -> &[u64] {
        &self.initial_counts
    }

    /// Transition counts, row per source symbol.
    pub fn transition_counts(&self) -> &[Vec<u64>] {
        &self.transition_counts
    }

    /// Emission counts, row per generative symbol.
    pub fn emission_counts(&self) -> &[Vec<u64>] {
        &self.emission_counts
    }

    /// Rebuilds a model from its stored document.
    pub fn from_doc(doc: &HmmDoc) -> Result<Self> {
        let alphabet = StateSpace::new(doc.alphabet.iter().cloned())?;
        ImpreciseHmm::from_counts(
            alphabet,
            doc.initial.clone(),
            doc.transition.clone(),
            doc.emission.clone(),
            R::from_f64_lossy(doc.s),
        )
    }

    /// The storable document: counts plus the caution parameter.
    pub fn to_doc(&self) -> HmmDoc {
        HmmDoc {
            alphabet: self.alphabet.labels().to_vec(),
            s: self.hyper_s.to_f64_lossy(),
            initial: self.initial_counts.clone(),
            transition: self.transition_counts.clone(),
            emission: self.emission_counts.clone(),
        }
    }

    /// The precise companion mass function of one count row: the
    /// interior point `(n_x + s/k)/(N + s)` of the row's credal set.
    fn companion_mass(&self, counts: &[u64]) -> MassFunction<R> {
        let k = R::from_f64_lossy(self.alphabet.len() as f64);
        let n: u64 = counts.iter().sum();
        let denom = R::from_f64_lossy(n as f64) + self.hyper_s;
        let probs: Vec<R> = counts
            .iter()
            .map(|&c| (R::from_f64_lossy(c as f64) + self.hyper_s / k) / denom)
            .collect();
        MassFunction::new(self.alphabet.clone(), &probs).expect("interior point")
    }
}

/// Learns a stationary imprecise hidden Markov model from a corpus of
/// sequence pairs by counting initial symbols, transitions
/// (`generative[k] → generative[k+1]`), and emissions
/// (`generative[k] → observed[k]`), then applying the imprecise
/// Dirichlet model with caution parameter `s` to every count row.
pub fn learn_hmm<R: Real>(corpus: &[SequencePair], s: R) -> Result<ImpreciseHmm<R>> {
    let first = corpus.first().ok_or(Error::EmptyCorpus)?;
    let alphabet = first.alphabet().clone();
    let k = alphabet.len();
    let mut initial = vec![0u64; k];
    let mut transition = vec![vec![0u64; k]; k];
    let mut emission = vec![vec![0u64; k]; k];
    for pair in corpus {
        if !crate::credal_core::same_space(pair.alphabet(), &alphabet) {
            return Err(Error::SpaceMismatch(
                "all sequence pairs must share one alphabet".to_string(),
            ));
        }
        initial[pair.generative()[0]] += 1;
        for w in pair.generative().windows(2) {
            transition[w[0]][w[1]] += 1;
        }
        for (&g, &o) in pair.generative().iter().zip(pair.observed()) {
            emission[g][o] += 1;
        }
    }
    ImpreciseHmm::from_counts(alphabet, initial, transition, emission, s)
}

fn chain_tree<R: Real>(
    alphabet: &Arc<StateSpace>,
    initial: CredalSet<R>,
    transition: &dyn Fn(usize) -> CredalSet<R>,
    emission: &dyn Fn(usize) -> CredalSet<R>,
    n: usize,
) -> Result<Tree<R>> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let k = alphabet.len();
    let mut builder = TreeBuilder::new().root("s1", alphabet.clone(), initial);
    builder = builder.child(
        "o1",
        "s1",
        alphabet.clone(),
        (0..k).map(emission).collect(),
    );
    for step in 2..=n {
        builder = builder.child(
            format!("s{step}"),
            format!("s{}", step - 1),
            alphabet.clone(),
            (0..k).map(transition).collect(),
        );
        builder = builder.child(
            format!("o{step}"),
            format!("s{step}"),
            alphabet.clone(),
            (0..k).map(emission).collect(),
        );
    }
    builder.build()
}

/// Unrolls the model into the length-`n` imprecise Markov tree: the
/// generative chain `s1 → … → sn` with one observed leaf `ok` under each
/// `sk`, in document order `s1, o1, s2, o2, …`.
pub fn hmm_to_tree<R: Real>(hmm: &ImpreciseHmm<R>, n: usize) -> Result<Tree<R>> {
    chain_tree(
        hmm.alphabet(),
        hmm.initial_set().clone(),
        &|x| hmm.transition_set(x).clone(),
        &|x| hmm.emission_set(x).clone(),
        n,
    )
}

fn companion_tree<R: Real>(hmm: &ImpreciseHmm<R>, n: usize) -> Result<Tree<R>> {
    chain_tree(
        hmm.alphabet(),
        linear_model(hmm.companion_mass(hmm.initial_counts())),
        &|x| linear_model(hmm.companion_mass(&hmm.transition_counts()[x])),
        &|x| linear_model(hmm.companion_mass(&hmm.emission_counts()[x])),
        n,
    )
}

/// A set-valued prediction of the final generative symbol.
#[derive(Debug, Clone)]
pub struct PredictionSet<R: Real> {
    /// Undominated states, in alphabet order; never empty.
    pub maximal_states: Vec<String>,
    /// The precise companion model's prediction; always maximal.
    pub precise_state: String,
    /// Pairwise dominance values: entry `[x][z]` is the posterior lower
    /// expectation of the gamble `I_x − I_z` (diagonal zero).
    pub dominance: Vec<Vec<R>>,
}

impl<R: Real> PredictionSet<R> {
    /// True when exactly one state is maximal.
    pub fn is_determinate(&self) -> bool {
        self.maximal_states.len() == 1
    }

    /// True when `state` is among the maximal states.
    pub fn contains(&self, state: &str) -> bool {
        self.maximal_states.iter().any(|s| s == state)
    }
}

/// Predicts the final generative symbol behind an observed sequence.
///
/// Builds the unrolled tree, conditions on the observations, and keeps
/// the states not strictly dominated under the posterior: `x` dominates
/// `z` when the posterior lower expectation of `I_x − I_z` exceeds ten
/// times the root-finder tolerance (the margin keeps root-finding error
/// from fabricating dominances). The trunk messages are computed once
/// and reused across all ordered pairs, since they do not depend on the
/// gamble.
pub fn predict_maximal<R: Real, S: AsRef<str>>(
    hmm: &ImpreciseHmm<R>,
    observed: &[S],
    tol: R,
) -> Result<PredictionSet<R>> {
    if observed.is_empty() {
        return Err(Error::EmptySequence);
    }
    let n = observed.len();
    let alphabet = hmm.alphabet().clone();
    let k = alphabet.len();
    let tree = hmm_to_tree(hmm, n)?;
    let target = format!("s{n}");
    let mut ev = Evidence::new();
    for (i, symbol) in observed.iter().enumerate() {
        let symbol = symbol.as_ref();
        if alphabet.index_of(symbol).is_none() {
            return Err(Error::UnknownSymbol(symbol.to_string()));
        }
        ev.assign(format!("o{}", i + 1), symbol);
    }

    let engine = QueryEngine::new(&tree, &target, &ev)?;
    let threshold = tol * R::from_f64_lossy(10.0);
    let mut dominance = vec![vec![R::zero(); k]; k];
    for x in 0..k {
        for z in 0..k {
            if x == z {
                continue;
            }
            let mut values = vec![R::zero(); k];
            values[x] = R::one();
            values[z] = -R::one();
            let g = Gamble::new(alphabet.clone(), &values).expect("finite gamble");
            dominance[x][z] = engine.posterior_lower(&g, tol)?.value;
        }
    }
    let maximal_states: Vec<String> = (0..k)
        .filter(|&x| (0..k).all(|z| z == x || dominance[z][x] <= threshold))
        .map(|x| alphabet.label(x).to_string())
        .collect();

    // Companion prediction: argmax posterior probability under the
    // interior precise model, ties broken by alphabet order.
    let companion = companion_tree(hmm, n)?;
    let precise_engine = QueryEngine::new(&companion, &target, &ev)?;
    let mut best = 0usize;
    let mut best_value = R::neg_infinity();
    for x in 0..k {
        let g = Gamble::indicator(alphabet.clone(), x);
        let value = precise_engine.posterior_lower(&g, tol)?.value;
        if value > best_value {
            best_value = value;
            best = x;
        }
    }
    let precise_state = alphabet.label(best).to_string();

    debug_assert!(!maximal_states.is_empty());
    Ok(PredictionSet {
        maximal_states,
        precise_state,
        dominance,
    })
}

/// Scored outcome of one prediction against the true final symbol.
#[derive(Debug, Clone, Copy)]
pub struct PredictionOutcome {
    /// Number of maximal states.
    pub set_size: usize,
    /// True when the maximal set contains the true symbol.
    pub set_contains_truth: bool,
    /// True when the precise companion predicted the true symbol.
    pub precise_correct: bool,
}

/// Aggregated recognition metrics over a test set.
///
/// Rates over empty cells (no determinate instances, or none
/// indeterminate) are reported as 1.0, and the mean indeterminate output
/// size over an empty cell as 1.0; the retained counts disambiguate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    /// Fraction of determinate predictions (single maximal state).
    pub determinacy: f64,
    /// Accuracy on the determinate subset.
    pub single_accuracy: f64,
    /// Fraction of indeterminate predictions whose set holds the truth.
    pub set_accuracy: f64,
    /// Mean maximal-set size over the indeterminate subset.
    pub indeterminate_output_size: f64,
    /// Companion-model accuracy over all instances.
    pub precise_accuracy: f64,
    /// Companion-model accuracy over the indeterminate subset.
    pub precise_accuracy_on_indeterminate: f64,
    /// Total instances scored.
    pub instances: u64,
    /// Determinate instances.
    pub determinate_count: u64,
    /// Determinate instances predicted correctly.
    pub determinate_correct: u64,
    /// Indeterminate instances whose set contains the truth.
    pub indeterminate_set_correct: u64,
    /// Instances the companion model predicted correctly.
    pub precise_correct: u64,
    /// Companion-correct instances within the indeterminate subset.
    pub precise_correct_on_indeterminate: u64,
}

impl EvalMetrics {
    /// Aggregates per-instance outcomes into the metric set.
    pub fn from_outcomes(outcomes: &[PredictionOutcome]) -> EvalMetrics {
        let n = outcomes.len() as u64;
        let mut determinate_count = 0u64;
        let mut determinate_correct = 0u64;
        let mut indeterminate_set_correct = 0u64;
        let mut precise_correct = 0u64;
        let mut precise_correct_on_indeterminate = 0u64;
        let mut size_sum = 0u64;
        for o in outcomes {
            if o.precise_correct {
                precise_correct += 1;
            }
            if o.set_size == 1 {
                determinate_count += 1;
                if o.set_contains_truth {
                    determinate_correct += 1;
                }
            } else {
                size_sum += o.set_size as u64;
                if o.set_contains_truth {
                    indeterminate_set_correct += 1;
                }
                if o.precise_correct {
                    precise_correct_on_indeterminate += 1;
                }
            }
        }
        let indeterminate_count = n - determinate_count;
        let rate = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        EvalMetrics {
            determinacy: rate(determinate_count, n),
            single_accuracy: rate(determinate_correct, determinate_count),
            set_accuracy: rate(indeterminate_set_correct, indeterminate_count),
            indeterminate_output_size: rate(size_sum, indeterminate_count),
            precise_accuracy: rate(precise_correct, n),
            precise_accuracy_on_indeterminate: rate(
                precise_correct_on_indeterminate,
                indeterminate_count,
            ),
            instances: n,
            determinate_count,
            determinate_correct,
            indeterminate_set_correct,
            precise_correct,
            precise_correct_on_indeterminate,
        }
    }

    /// Indeterminate instances.
    pub fn indeterminate_count(&self) -> u64 {
        self.instances - self.determinate_count
    }

    /// Instances whose prediction set (maximal states, or the single
    /// determinate state) contains the truth; the quantity the
    /// determinacy/accuracy identity reconstructs.
    pub fn containment_count(&self) -> u64 {
        self.determinate_correct + self.indeterminate_set_correct
    }
}

/// Predicts every test pair and scores against its final generative
/// symbol.
pub fn evaluate<R: Real>(
    hmm: &ImpreciseHmm<R>,
    test: &[SequencePair],
    tol: R,
) -> Result<EvalMetrics> {
    if test.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut outcomes = Vec::with_capacity(test.len());
    for pair in test {
        if !crate::credal_core::same_space(pair.alphabet(), hmm.alphabet()) {
            return Err(Error::SpaceMismatch(
                "test pairs must use the model's alphabet".to_string(),
            ));
        }
        let prediction = predict_maximal(hmm, &pair.observed_labels(), tol)?;
        let truth = pair.alphabet().label(*pair.generative().last().expect("non-empty"));
        outcomes.push(PredictionOutcome {
            set_size: prediction.maximal_states.len(),
            set_contains_truth: prediction.contains(truth),
            precise_correct: prediction.precise_state == truth,
        });
    }
    Ok(EvalMetrics::from_outcomes(&outcomes))
}

/// Corrupts generative sequences into observed ones: each symbol is
/// independently replaced, with probability `epsilon`, by a uniformly
/// random different symbol. Deterministic per seed.
pub fn corrupt_corpus(
    alphabet: &Arc<StateSpace>,
    sequences: &[Vec<String>],
    epsilon: f64,
    seed: u64,
) -> Result<Vec<SequencePair>> {
    if !(0.0..=1.0).contains(&epsilon) || !epsilon.is_finite() {
        return Err(Error::InvalidCorruptionRate(epsilon));
    }
    if alphabet.len() < 2 && epsilon > 0.0 {
        return Err(Error::InfeasibleShape(
            "corruption needs at least two symbols".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(sequences.len());
    for seq in sequences {
        let generative: Vec<usize> = seq
            .iter()
            .map(|label| {
                alphabet
                    .index_of(label)
                    .ok_or_else(|| Error::UnknownSymbol(label.clone()))
            })
            .collect::<Result<Vec<usize>>>()?;
        if generative.is_empty() {
            return Err(Error::EmptySequence);
        }
        let observed: Vec<usize> = generative
            .iter()
            .map(|&g| {
                if epsilon > 0.0 && rng.gen_bool(epsilon) {
                    // Uniform over the other symbols.
                    let shift = rng.gen_range(1..alphabet.len());
                    (g + shift) % alphabet.len()
                } else {
                    g
                }
            })
            .collect();
        pairs.push(SequencePair {
            alphabet: alphabet.clone(),
            generative,
            observed,
        });
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::trunk;

    fn alphabet(labels: &[&str]) -> Arc<StateSpace> {
        StateSpace::new(labels.iter().copied()).unwrap()
    }

    fn pair(ab: &Arc<StateSpace>, g: &str, o: &str) -> SequencePair {
        let split = |s: &str| s.chars().map(|c| c.to_string()).collect::<Vec<_>>();
        SequencePair::new(ab.clone(), split(g), split(o)).unwrap()
    }

    #[test]
    fn learning_counts_initials_transitions_and_emissions() {
        let ab = alphabet(&["a", "b"]);
        let corpus = vec![pair(&ab, "ab", "ab")];
        let hmm = learn_hmm(&corpus, 2.0_f64).unwrap();
        // Initial counts (1, 0) with s=2: lower 1/3, upper 1.
        assert_eq!(hmm.initial_counts(), &[1, 0]);
        assert!((hmm.initial_set().lower_prob(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((hmm.initial_set().upper_prob(0) - 1.0).abs() < 1e-15);
        // One a→b transition; b was never a source, so its row is vacuous.
        assert_eq!(hmm.transition_counts()[0], vec![0, 1]);
        assert_eq!(hmm.transition_counts()[1], vec![0, 0]);
        assert_eq!(hmm.transition_set(1).lower_prob(0), 0.0);
        assert_eq!(hmm.transition_set(1).upper_prob(0), 1.0);
        // Emissions are identity counts here.
        assert_eq!(hmm.emission_counts()[0], vec![1, 0]);
        assert_eq!(hmm.emission_counts()[1], vec![0, 1]);
    }

    #[test]
    fn tiny_caution_parameter_shrinks_intervals() {
        let ab = alphabet(&["a", "b"]);
        let corpus: Vec<SequencePair> = (0..5)
            .flat_map(|_| [pair(&ab, "ab", "ab"), pair(&ab, "ba", "ba")])
            .collect();
        let hmm = learn_hmm(&corpus, 1e-6).unwrap();
        // Initial counts (5, 5): interval width s/(s+N) < 1e-6.
        let width = hmm.initial_set().upper_prob(0) - hmm.initial_set().lower_prob(0);
        assert!(width > 0.0 && width < 1e-6);
    }

    #[test]
    fn unrolled_tree_shape_and_trunk() {
        let ab = alphabet(&["a", "b"]);
        let hmm = learn_hmm(&[pair(&ab, "ab", "ab")], 1.0).unwrap();

        let t1 = hmm_to_tree(&hmm, 1).unwrap();
        assert_eq!(t1.len(), 2);

        let t3 = hmm_to_tree(&hmm, 3).unwrap();
        assert_eq!(t3.len(), 6);
        let ev = Evidence::from_pairs([("o1", "a"), ("o2", "b"), ("o3", "a")]);
        let info = trunk(&t3, "s3", &ev).unwrap();
        assert_eq!(info.e_t(), None);
        assert_eq!(info.trunk_ids(&t3), ["s1", "s2", "s3"]);

        // IDM models keep every singleton's upper probability positive.
        let report = crate::tree_model::validate_tree(&t3);
        assert!(report.preconditions_met());
    }

    #[test]
    fn near_precise_model_predicts_a_singleton() {
        let ab = alphabet(&["a", "b"]);
        // Deterministic-ish data: identity emissions, alternating chain.
        let corpus: Vec<SequencePair> = (0..20)
            .map(|_| pair(&ab, "abab", "abab"))
            .collect();
        let hmm = learn_hmm(&corpus, 1e-5).unwrap();
        let p = predict_maximal(&hmm, &["a", "b", "a", "b"], 1e-9).unwrap();
        assert_eq!(p.maximal_states, ["b"]);
        assert_eq!(p.precise_state, "b");
        assert!(p.is_determinate());
    }

    #[test]
    fn vacuous_model_predicts_the_whole_alphabet() {
        let ab = alphabet(&["a", "b", "c"]);
        // One short pair leaves almost all counts zero; a huge s makes
        // every set effectively vacuous.
        let hmm = learn_hmm(&[pair(&ab, "a", "a")], 1e6).unwrap();
        let p = predict_maximal(&hmm, &["a", "b"], 1e-9).unwrap();
        assert_eq!(p.maximal_states, ["a", "b", "c"]);
        // The companion prediction still lies inside.
        assert!(p.contains(&p.precise_state));
    }

    #[test]
    fn widening_the_model_turns_a_determinate_answer_indeterminate() {
        let ab = alphabet(&["a", "b"]);
        let corpus: Vec<SequencePair> = (0..6).map(|_| pair(&ab, "ab", "ab")).collect();
        let narrow = learn_hmm(&corpus, 0.1).unwrap();
        let wide = learn_hmm(&corpus, 50.0).unwrap();
        let obs = ["a", "b"];
        let p_narrow = predict_maximal(&narrow, &obs, 1e-9).unwrap();
        let p_wide = predict_maximal(&wide, &obs, 1e-9).unwrap();
        assert_eq!(p_narrow.maximal_states, ["b"]);
        assert_eq!(p_wide.maximal_states, ["a", "b"]);
        // Monotonicity: the wide set contains the narrow one.
        for s in &p_narrow.maximal_states {
            assert!(p_wide.contains(s));
        }
    }

    #[test]
    fn metrics_aggregate_the_hand_fixture() {
        // Five instances over a 4-letter alphabet: three determinate
        // (two correct), two indeterminate of size 3 (one containing the
        // truth); companion correct on 3 overall, 1 of the indeterminate.
        let outcomes = [
            PredictionOutcome { set_size: 1, set_contains_truth: true, precise_correct: true },
            PredictionOutcome { set_size: 1, set_contains_truth: true, precise_correct: true },
            PredictionOutcome { set_size: 1, set_contains_truth: false, precise_correct: false },
            PredictionOutcome { set_size: 3, set_contains_truth: true, precise_correct: true },
            PredictionOutcome { set_size: 3, set_contains_truth: false, precise_correct: false },
        ];
        let m = EvalMetrics::from_outcomes(&outcomes);
        assert!((m.determinacy - 0.6).abs() < 1e-15);
        assert!((m.indeterminate_output_size - 3.0).abs() < 1e-15);
        assert!((m.single_accuracy - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.set_accuracy - 0.5).abs() < 1e-15);
        assert!((m.precise_accuracy - 0.6).abs() < 1e-15);
        assert!((m.precise_accuracy_on_indeterminate - 0.5).abs() < 1e-15);
        // The metrics identity, on exact counts.
        assert_eq!(m.containment_count(), 3);
        assert_eq!(m.determinate_correct + m.indeterminate_set_correct, 3);
    }

    #[test]
    fn empty_cells_report_unit_rates() {
        let outcomes = [PredictionOutcome {
            set_size: 1,
            set_contains_truth: true,
            precise_correct: true,
        }];
        let m = EvalMetrics::from_outcomes(&outcomes);
        assert_eq!(m.determinacy, 1.0);
        assert_eq!(m.set_accuracy, 1.0);
        assert_eq!(m.indeterminate_output_size, 1.0);
        assert_eq!(m.precise_accuracy_on_indeterminate, 1.0);
    }

    #[test]
    fn corruption_rates_zero_and_one() {
        let ab = alphabet(&["a", "b", "c"]);
        let sequences: Vec<Vec<String>> = vec![
            "abcab".chars().map(|c| c.to_string()).collect(),
            "cab".chars().map(|c| c.to_string()).collect(),
        ];
        let clean = corrupt_corpus(&ab, &sequences, 0.0, 9).unwrap();
        for p in &clean {
            assert_eq!(p.generative(), p.observed());
        }
        let full = corrupt_corpus(&ab, &sequences, 1.0, 9).unwrap();
        for p in &full {
            for (g, o) in p.generative().iter().zip(p.observed()) {
                assert_ne!(g, o);
            }
        }
        // Deterministic per seed.
        let again = corrupt_corpus(&ab, &sequences, 1.0, 9).unwrap();
        assert_eq!(full, again);
        let other = corrupt_corpus(&ab, &sequences, 0.5, 10).unwrap();
        assert_eq!(other.len(), 2);

        assert!(matches!(
            corrupt_corpus(&ab, &sequences, 1.5, 1),
            Err(Error::InvalidCorruptionRate(_))
        ));
    }

    #[test]
    fn documents_round_trip_models_exactly() {
        let ab = alphabet(&["a", "b"]);
        let hmm = learn_hmm(&[pair(&ab, "abba", "abab")], 1.5).unwrap();
        let doc = hmm.to_doc();
        let back: ImpreciseHmm<f64> = ImpreciseHmm::from_doc(&doc).unwrap();
        assert_eq!(back.to_doc(), doc);
        assert_eq!(back.initial_counts(), hmm.initial_counts());
    }

    #[test]
    fn sequence_pairs_validate_their_inputs() {
        let ab = alphabet(&["a", "b"]);
        assert!(matches!(
            SequencePair::new(ab.clone(), ["a", "x"], ["a", "a"]),
            Err(Error::UnknownSymbol(ref s)) if s == "x"
        ));
        assert!(matches!(
            SequencePair::new(ab.clone(), ["a", "b"], ["a"]),
            Err(Error::SequenceLengthMismatch { .. })
        ));
        assert!(matches!(
            SequencePair::new(ab, Vec::<String>::new(), Vec::<String>::new()),
            Err(Error::EmptySequence)
        ));
    }
}
