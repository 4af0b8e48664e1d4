//! Command-line surface for the credal-tree engine.
//!
//! Subcommands cover model validation, posterior queries, evidence
//! probabilities, comparison against the strong-extension enumeration,
//! hidden-Markov workflows, and a chain benchmark emitting CSV. Output is
//! JSON with stable key order so runs are byte-reproducible; pass
//! `--human` for aligned tables instead. Exit codes: 0 success, 1
//! validation failure, 2 usage error, 3 numerical precondition failure
//! (enumeration budget, broken bracket, zero-probability conditioning).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand};
use credal_tree::credal_core::{Gamble, StateSpace};
use credal_tree::error::ErrorClass;
use credal_tree::idm_hmm::{evaluate, learn_hmm, predict_maximal, ImpreciseHmm, SequencePair};
use credal_tree::io::{evidence_from_json, tree_from_json, HmmDoc};
use credal_tree::oracles::{
    random_tree_generator, strong_posterior_enumeration, TreeShape, DEFAULT_SELECTION_BUDGET,
};
use credal_tree::propagation::{
    lower_evidence_probability, upper_evidence_probability, QueryEngine,
};
use credal_tree::tree_model::{validate_tree, Evidence, Tree};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "credal-tree",
    version,
    about = "Exact posterior bounds on imprecise Markov trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a tree document: structure, local models, strict positivity.
    Validate(ValidateArgs),
    /// Posterior expectation bounds for a gamble on a target node.
    Query(QueryArgs),
    /// Lower and upper probability of an evidence event.
    EvidenceProb(EvidenceProbArgs),
    /// Posterior interval versus the strong-enumeration interval.
    Compare(CompareArgs),
    /// Learn an imprecise hidden Markov model from a paired corpus.
    HmmTrain(HmmTrainArgs),
    /// Predict the final generative symbol behind an observed sequence.
    HmmPredict(HmmPredictArgs),
    /// Score a model against a paired test corpus.
    HmmEval(HmmEvalArgs),
    /// Mean posterior-interval widths on random chains, as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Tree document (JSON).
    tree: PathBuf,
    /// Print a table instead of JSON.
    #[arg(long)]
    human: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("objective").required(true).args(["gamble", "event"])))]
struct QueryArgs {
    /// Tree document (JSON).
    tree: PathBuf,
    /// Target node id.
    #[arg(long)]
    target: String,
    /// Evidence document (JSON object mapping node ids to states).
    #[arg(long)]
    evidence: Option<PathBuf>,
    /// Inline evidence assignment; repeatable.
    #[arg(long = "assign", value_name = "NODE=STATE", value_parser = parse_assign)]
    assign: Vec<(String, String)>,
    /// Gamble values, comma-separated, in target state order.
    #[arg(long)]
    gamble: Option<String>,
    /// Query the indicator of this target state instead of a gamble.
    #[arg(long)]
    event: Option<String>,
    /// Root-finder tolerance.
    #[arg(long, env = "CREDAL_TREE_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Print a table instead of JSON.
    #[arg(long)]
    human: bool,
}

#[derive(Args)]
struct EvidenceProbArgs {
    /// Tree document (JSON).
    tree: PathBuf,
    /// Evidence document (JSON object mapping node ids to states).
    #[arg(long)]
    evidence: Option<PathBuf>,
    /// Inline evidence assignment; repeatable.
    #[arg(long = "assign", value_name = "NODE=STATE", value_parser = parse_assign)]
    assign: Vec<(String, String)>,
    /// Print a table instead of JSON.
    #[arg(long)]
    human: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("objective").required(true).args(["gamble", "event"])))]
struct CompareArgs {
    /// Tree document (JSON).
    tree: PathBuf,
    /// Target node id.
    #[arg(long)]
    target: String,
    /// Evidence document (JSON object mapping node ids to states).
    #[arg(long)]
    evidence: Option<PathBuf>,
    /// Inline evidence assignment; repeatable.
    #[arg(long = "assign", value_name = "NODE=STATE", value_parser = parse_assign)]
    assign: Vec<(String, String)>,
    /// Gamble values, comma-separated, in target state order.
    #[arg(long)]
    gamble: Option<String>,
    /// Query the indicator of this target state instead of a gamble.
    #[arg(long)]
    event: Option<String>,
    /// Root-finder tolerance.
    #[arg(long, env = "CREDAL_TREE_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Enumeration budget for the strong extension, in selections.
    #[arg(long, default_value_t = DEFAULT_SELECTION_BUDGET)]
    budget: u64,
    /// Print a table instead of JSON.
    #[arg(long)]
    human: bool,
}

#[derive(Args)]
struct HmmTrainArgs {
    /// Generative sequences, one per line, symbols whitespace-separated.
    #[arg(long)]
    corpus: PathBuf,
    /// Paired observed sequences, same line count and lengths.
    #[arg(long)]
    observed: PathBuf,
    /// Caution parameter for all count models.
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    /// Output path for the model document (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HmmPredictArgs {
    /// Model document written by hmm-train.
    #[arg(long)]
    model: PathBuf,
    /// Observed sequence, symbols whitespace-separated.
    #[arg(long)]
    sequence: String,
    /// Dominance tolerance.
    #[arg(long, env = "CREDAL_TREE_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Print a table instead of JSON.
    #[arg(long)]
    human: bool,
}

#[derive(Args)]
struct HmmEvalArgs {
    /// Model document written by hmm-train.
    #[arg(long)]
    model: PathBuf,
    /// Generative test sequences, one per line.
    #[arg(long)]
    test: PathBuf,
    /// Paired observed test sequences.
    #[arg(long)]
    observed: PathBuf,
    /// Dominance tolerance.
    #[arg(long, env = "CREDAL_TREE_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Print a table instead of JSON.
    #[arg(long)]
    human: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Chain lengths, `N` or `LO..HI` (inclusive, at least 2).
    #[arg(long, value_parser = parse_lengths)]
    lengths: LengthRange,
    /// Monte Carlo runs per length.
    #[arg(long, default_value_t = 200)]
    runs: u64,
    /// Base seed; every (length, run) pair derives its own stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumeration budget; lengths whose strong extension exceeds it get
    /// empty strong columns.
    #[arg(long, default_value_t = DEFAULT_SELECTION_BUDGET)]
    budget: u64,
    /// Imprecision level of the generated chains, in [0, 1].
    #[arg(long, default_value_t = 0.7)]
    imprecision: f64,
}

#[derive(Clone, Copy)]
struct LengthRange {
    lo: usize,
    hi: usize,
}

fn parse_lengths(text: &str) -> Result<LengthRange, String> {
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (text, text),
    };
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad length `{lo}`"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad length `{hi}`"))?;
    if lo < 2 {
        return Err("chain lengths start at 2 (the leaf must differ from the root)".to_string());
    }
    if hi < lo {
        return Err(format!("empty length range {lo}..{hi}"));
    }
    Ok(LengthRange { lo, hi })
}

fn parse_assign(text: &str) -> Result<(String, String), String> {
    match text.split_once('=') {
        Some((node, state)) if !node.is_empty() && !state.is_empty() => {
            Ok((node.to_string(), state.to_string()))
        }
        _ => Err(format!("expected NODE=STATE, got `{text}`")),
    }
}

/// A failed run: a message plus the class that fixes the exit code.
struct Failure {
    class: &'static str,
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, err: std::io::Error) -> Failure {
        Failure {
            class: "io",
            code: 1,
            message: format!("{}: {err}", path.display()),
        }
    }

    fn invalid(message: String) -> Failure {
        Failure {
            class: "validation",
            code: 1,
            message,
        }
    }
}

impl From<credal_tree::Error> for Failure {
    fn from(err: credal_tree::Error) -> Failure {
        let (class, code) = match err.class() {
            ErrorClass::Validation => ("validation", 1),
            ErrorClass::Numerical => ("numerical", 3),
        };
        Failure {
            class,
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!(
                "{}",
                json!({ "error": failure.message, "class": failure.class })
            );
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate(args) => validate(args),
        Command::Query(args) => query(args),
        Command::EvidenceProb(args) => evidence_prob(args),
        Command::Compare(args) => compare(args),
        Command::HmmTrain(args) => hmm_train(args),
        Command::HmmPredict(args) => hmm_predict(args),
        Command::HmmEval(args) => hmm_eval(args),
        Command::Bench(args) => bench(args),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn load_tree(path: &Path) -> Result<Tree<f64>, Failure> {
    Ok(tree_from_json(&read_file(path)?)?)
}

fn load_evidence(
    path: Option<&PathBuf>,
    assigns: &[(String, String)],
) -> Result<Evidence, Failure> {
    let mut ev = match path {
        Some(p) => evidence_from_json(&read_file(p)?)?,
        None => Evidence::new(),
    };
    for (node, state) in assigns {
        ev.assign(node.clone(), state.clone());
    }
    Ok(ev)
}

fn objective(
    tree: &Tree<f64>,
    target: &str,
    gamble: Option<&str>,
    event: Option<&str>,
) -> Result<Gamble<f64>, Failure> {
    let space = tree.node(tree.node_index(target)?).space().clone();
    match (gamble, event) {
        (Some(text), None) => {
            let values: Vec<f64> = text
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Failure::invalid(format!("bad gamble value `{v}`")))
                })
                .collect::<Result<_, _>>()?;
            Ok(Gamble::new(space, &values)?)
        }
        (None, Some(state)) => Ok(Gamble::indicator_of(space, state)?),
        _ => unreachable!("clap enforces exactly one objective"),
    }
}

fn emit(human: bool, rows: &[(&str, String)], value: serde_json::Value) {
    if human {
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (key, text) in rows {
            println!("{key:width$}  {text}");
        }
    } else {
        println!("{value}");
    }
}

fn validate(args: ValidateArgs) -> Result<u8, Failure> {
    let tree = load_tree(&args.tree)?;
    let report = validate_tree(&tree);
    let violations: Vec<serde_json::Value> = report
        .violations
        .iter()
        .map(|v| {
            json!({
                "node": v.node,
                "parent_state": v.parent_state,
                "zero_upper_states": v.zero_upper_states,
            })
        })
        .collect();
    if args.human {
        println!("nodes           {}", tree.len());
        println!("models checked  {}", report.checked);
        if report.preconditions_met() {
            println!("every local model is strictly positive");
        }
        for v in &report.violations {
            let given = v
                .parent_state
                .as_deref()
                .map(|s| format!(" given {s}"))
                .unwrap_or_default();
            println!(
                "node {}{given}: zero upper probability on {}",
                v.node,
                v.zero_upper_states.join(", ")
            );
        }
    } else {
        println!(
            "{}",
            json!({
                "nodes": tree.len(),
                "models_checked": report.checked,
                "preconditions_met": report.preconditions_met(),
                "violations": violations,
            })
        );
    }
    Ok(if report.preconditions_met() { 0 } else { 1 })
}

fn query(args: QueryArgs) -> Result<u8, Failure> {
    let tree = load_tree(&args.tree)?;
    let ev = load_evidence(args.evidence.as_ref(), &args.assign)?;
    let g = objective(&tree, &args.target, args.gamble.as_deref(), args.event.as_deref())?;
    let engine = QueryEngine::new(&tree, &args.target, &ev)?;
    let res = engine.posterior_interval(&g, args.tol)?;
    let upper = res.conjugate_value.expect("interval query fills both bounds");
    emit(
        args.human,
        &[
            ("lower", format!("{}", res.value)),
            ("upper", format!("{upper}")),
            ("evidence upper probability", format!("{}", res.evidence_upper_prob)),
            ("evaluations", format!("{}", res.evaluations)),
            ("vacuous", format!("{}", res.vacuous)),
        ],
        json!({
            "lower": res.value,
            "upper": upper,
            "evidence_upper_prob": res.evidence_upper_prob,
            "evaluations": res.evaluations,
            "vacuous": res.vacuous,
        }),
    );
    Ok(0)
}

fn evidence_prob(args: EvidenceProbArgs) -> Result<u8, Failure> {
    let tree = load_tree(&args.tree)?;
    let ev = load_evidence(args.evidence.as_ref(), &args.assign)?;
    let lower = lower_evidence_probability(&tree, &ev)?;
    let upper = upper_evidence_probability(&tree, &ev)?;
    emit(
        args.human,
        &[("lower", format!("{lower}")), ("upper", format!("{upper}"))],
        json!({ "lower": lower, "upper": upper }),
    );
    Ok(0)
}

fn compare(args: CompareArgs) -> Result<u8, Failure> {
    let tree = load_tree(&args.tree)?;
    let ev = load_evidence(args.evidence.as_ref(), &args.assign)?;
    let g = objective(&tree, &args.target, args.gamble.as_deref(), args.event.as_deref())?;
    let engine = QueryEngine::new(&tree, &args.target, &ev)?;
    let res = engine.posterior_interval(&g, args.tol)?;
    let (e_lo, e_hi) = (res.value, res.conjugate_value.expect("both bounds"));
    let (s_lo, s_hi) = strong_posterior_enumeration(&tree, &args.target, &ev, &g, args.budget)?;
    let contained = e_lo <= s_lo + 1e-9 && s_hi <= e_hi + 1e-9;
    emit(
        args.human,
        &[
            ("epistemic", format!("[{e_lo}, {e_hi}]")),
            ("strong", format!("[{s_lo}, {s_hi}]")),
            ("epistemic width", format!("{}", e_hi - e_lo)),
            ("strong width", format!("{}", s_hi - s_lo)),
            ("width difference", format!("{}", (e_hi - e_lo) - (s_hi - s_lo))),
            ("contained", format!("{contained}")),
        ],
        json!({
            "epistemic": { "lower": e_lo, "upper": e_hi },
            "strong": { "lower": s_lo, "upper": s_hi },
            "epistemic_width": e_hi - e_lo,
            "strong_width": s_hi - s_lo,
            "width_difference": (e_hi - e_lo) - (s_hi - s_lo),
            "contained": contained,
        }),
    );
    Ok(if contained { 0 } else { 1 })
}

fn read_sequences(path: &Path) -> Result<Vec<Vec<String>>, Failure> {
    Ok(read_file(path)?
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| line.split_whitespace().map(str::to_string).collect())
        .collect())
}

fn paired_corpus(
    alphabet: &Arc<StateSpace>,
    generative: &[Vec<String>],
    observed: &[Vec<String>],
) -> Result<Vec<SequencePair>, Failure> {
    if generative.len() != observed.len() {
        return Err(Failure::invalid(format!(
            "corpus has {} sequences but observations have {}",
            generative.len(),
            observed.len()
        )));
    }
    generative
        .iter()
        .zip(observed)
        .map(|(g, o)| Ok(SequencePair::new(alphabet.clone(), g, o)?))
        .collect()
}

fn hmm_train(args: HmmTrainArgs) -> Result<u8, Failure> {
    let generative = read_sequences(&args.corpus)?;
    let observed = read_sequences(&args.observed)?;
    let symbols: BTreeSet<&str> = generative
        .iter()
        .chain(&observed)
        .flatten()
        .map(String::as_str)
        .collect();
    if symbols.is_empty() {
        return Err(Failure::invalid("the corpus contains no symbols".to_string()));
    }
    let alphabet = StateSpace::new(symbols)?;
    let corpus = paired_corpus(&alphabet, &generative, &observed)?;
    let hmm = learn_hmm(&corpus, args.s)?;
    let doc = serde_json::to_string_pretty(&hmm.to_doc()).expect("model serialization");
    std::fs::write(&args.out, doc).map_err(|e| Failure::io(&args.out, e))?;
    println!(
        "{}",
        json!({
            "sequences": corpus.len(),
            "alphabet": alphabet.labels(),
            "s": args.s,
            "out": args.out.display().to_string(),
        })
    );
    Ok(0)
}

fn load_hmm(path: &Path) -> Result<ImpreciseHmm<f64>, Failure> {
    let doc: HmmDoc =
        serde_json::from_str(&read_file(path)?).map_err(credal_tree::Error::from)?;
    Ok(ImpreciseHmm::from_doc(&doc)?)
}

fn hmm_predict(args: HmmPredictArgs) -> Result<u8, Failure> {
    let hmm = load_hmm(&args.model)?;
    let observed: Vec<&str> = args.sequence.split_whitespace().collect();
    let prediction = predict_maximal(&hmm, &observed, args.tol)?;
    emit(
        args.human,
        &[
            ("maximal states", prediction.maximal_states.join(", ")),
            ("precise state", prediction.precise_state.clone()),
            ("determinate", format!("{}", prediction.is_determinate())),
        ],
        json!({
            "maximal_states": prediction.maximal_states,
            "precise_state": prediction.precise_state,
            "determinate": prediction.maximal_states.len() == 1,
        }),
    );
    Ok(0)
}

fn hmm_eval(args: HmmEvalArgs) -> Result<u8, Failure> {
    let hmm = load_hmm(&args.model)?;
    let generative = read_sequences(&args.test)?;
    let observed = read_sequences(&args.observed)?;
    let test = paired_corpus(hmm.alphabet(), &generative, &observed)?;
    let m = evaluate(&hmm, &test, args.tol)?;
    emit(
        args.human,
        &[
            ("instances", format!("{}", m.instances)),
            ("determinacy", format!("{}", m.determinacy)),
            ("single accuracy", format!("{}", m.single_accuracy)),
            ("set accuracy", format!("{}", m.set_accuracy)),
            ("indeterminate output size", format!("{}", m.indeterminate_output_size)),
            ("precise accuracy", format!("{}", m.precise_accuracy)),
            (
                "precise accuracy on indeterminate",
                format!("{}", m.precise_accuracy_on_indeterminate),
            ),
        ],
        json!({
            "instances": m.instances,
            "determinacy": m.determinacy,
            "single_accuracy": m.single_accuracy,
            "set_accuracy": m.set_accuracy,
            "indeterminate_output_size": m.indeterminate_output_size,
            "precise_accuracy": m.precise_accuracy,
            "precise_accuracy_on_indeterminate": m.precise_accuracy_on_indeterminate,
            "determinate_count": m.determinate_count,
            "determinate_correct": m.determinate_correct,
            "indeterminate_set_correct": m.indeterminate_set_correct,
            "precise_correct": m.precise_correct,
            "precise_correct_on_indeterminate": m.precise_correct_on_indeterminate,
        }),
    );
    Ok(0)
}

/// SplitMix finalizer over the packed inputs, so every (length, run)
/// pair gets an independent stream and aggregation order is free.
fn mix(seed: u64, len: u64, run: u64) -> u64 {
    let mut z = seed ^ len.rotate_left(24) ^ run.rotate_left(48);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn bench(args: BenchArgs) -> Result<u8, Failure> {
    if !(0.0..=1.0).contains(&args.imprecision) {
        return Err(Failure::invalid(format!(
            "imprecision {} is outside [0, 1]",
            args.imprecision
        )));
    }
    if args.runs == 0 {
        return Err(Failure::invalid("runs must be at least 1".to_string()));
    }
    println!("length,runs,mean_epistemic_width,mean_strong_width,mean_width_difference");
    for len in args.lengths.lo..=args.lengths.hi {
        let mut epistemic_sum = 0.0;
        let mut strong_sum = 0.0;
        let mut strong_feasible = true;
        for run in 0..args.runs {
            let shape = TreeShape {
                nodes: len,
                max_children: 1,
                state_sizes: vec![2],
                vertices_per_set: 2,
                imprecision: args.imprecision,
            };
            let tree: Tree<f64> = random_tree_generator(&shape, mix(args.seed, len as u64, run))?;
            let mut rng = ChaCha8Rng::seed_from_u64(mix(args.seed ^ 1, len as u64, run));
            let leaf = format!("n{}", len - 1);
            let state = if rng.gen_bool(0.5) { "s0" } else { "s1" };
            let ev = Evidence::from_pairs([(leaf.as_str(), state)]);

            let engine = QueryEngine::new(&tree, "n0", &ev)?;
            let (e_lo, e_hi) = engine.interval_event("s0", 1e-10)?;
            epistemic_sum += e_hi - e_lo;

            if strong_feasible {
                let g = Gamble::indicator_of(tree.node(tree.root()).space().clone(), "s0")?;
                match strong_posterior_enumeration(&tree, "n0", &ev, &g, args.budget) {
                    Ok((s_lo, s_hi)) => strong_sum += s_hi - s_lo,
                    Err(credal_tree::Error::BudgetExceeded { .. }) => strong_feasible = false,
                    Err(other) => return Err(other.into()),
                }
            }
        }
        let mean_e = epistemic_sum / args.runs as f64;
        if strong_feasible {
            let mean_s = strong_sum / args.runs as f64;
            println!("{len},{},{mean_e:.6},{mean_s:.6},{:.6}", args.runs, mean_e - mean_s);
        } else {
            println!("{len},{},{mean_e:.6},,", args.runs);
        }
    }
    Ok(0)
}
