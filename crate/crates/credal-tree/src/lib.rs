//! Exact inference for imprecise Markov trees.
//!
//! An imprecise Markov tree is a rooted directed tree of finite-valued
//! variables in which every node carries a credal set (a finite set of
//! probability mass functions, read as the vertices of a convex set of
//! candidate models) conditional on each value of its parent. The tree
//! is read under epistemic irrelevance: learning the value of a node is
//! judged irrelevant to its non-parent non-descendants.
//!
//! The crate computes exact lower and upper posterior expectations of a
//! gamble on a single target node, conditional on the observed values of
//! an arbitrary set of other nodes, in time linear in the number of
//! nodes. It also ships brute-force reference oracles for testing, an
//! imprecise hidden Markov model application learned with the imprecise
//! Dirichlet model, and a command-line front end (see the companion
//! `credal-tree-cli` crate).
//!
//! # Quick start
//!
//! ```
//! use credal_tree::credal_core::{CredalSet, Gamble, MassFunction, StateSpace};
//! use credal_tree::tree_model::{Evidence, TreeBuilder};
//! use credal_tree::propagation::posterior_interval_event;
//!
//! // A three-node chain 1 -> 2 -> 3 with a precise start and an
//! // interval-valued final transition.
//! let space = StateSpace::new(["a", "b"]).unwrap();
//! let half = MassFunction::new(space.clone(), &[0.5, 0.5]).unwrap();
//! let tail = |lo: f64, hi: f64| {
//!     CredalSet::new(vec![
//!         MassFunction::new(space.clone(), &[lo, 1.0 - lo]).unwrap(),
//!         MassFunction::new(space.clone(), &[hi, 1.0 - hi]).unwrap(),
//!     ])
//!     .unwrap()
//! };
//! let tree = TreeBuilder::<f64>::new()
//!     .root("1", space.clone(), CredalSet::linear(half.clone()))
//!     .child("2", "1", space.clone(), vec![half.clone().into(), half.clone().into()])
//!     .child("3", "2", space.clone(), vec![tail(0.4, 0.6), tail(0.4, 0.6)])
//!     .build()
//!     .unwrap();
//!
//! let ev = Evidence::from_pairs([("2", "a"), ("3", "a")]);
//! let (lo, hi) = posterior_interval_event(&tree, "1", &ev, "a", 1e-9).unwrap();
//! assert!((lo - 0.4).abs() < 1e-9 && (hi - 0.6).abs() < 1e-9);
//! ```

pub mod credal_core;
pub mod error;
pub mod idm_hmm;
pub mod io;
pub mod oracles;
pub mod propagation;
pub mod scalar;
pub mod tree_model;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` gamble.
pub type Gamble64 = credal_core::Gamble<f64>;
/// `f64` mass function.
pub type MassFunction64 = credal_core::MassFunction<f64>;
/// `f64` credal set.
pub type CredalSet64 = credal_core::CredalSet<f64>;
/// `f64` count table.
pub type CountTable64 = credal_core::CountTable<f64>;
/// `f64` tree model.
pub type Tree64 = tree_model::Tree<f64>;
/// `f64` posterior result.
pub type PosteriorResult64 = propagation::PosteriorResult<f64>;
/// `f64` imprecise hidden Markov model.
pub type ImpreciseHmm64 = idm_hmm::ImpreciseHmm<f64>;

/// `f32` gamble.
pub type Gamble32 = credal_core::Gamble<f32>;
/// `f32` mass function.
pub type MassFunction32 = credal_core::MassFunction<f32>;
/// `f32` credal set.
pub type CredalSet32 = credal_core::CredalSet<f32>;
/// `f32` tree model.
pub type Tree32 = tree_model::Tree<f32>;
