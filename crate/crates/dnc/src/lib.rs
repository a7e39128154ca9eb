//! Solvers and experiment harnesses for the Bayesian divide-and-choose game.
//!
//! One player (the divider) splits `n` divisible goods into two piles; the
//! other (the chooser) takes her preferred pile. The divider knows his own
//! values but only a prior over the chooser's. This crate computes optimal or
//! provably near-optimal divisions for that divider, evaluates both players'
//! expected utilities exactly where closed forms exist, and reproduces the
//! welfare, risk-aversion, and multiple-offer phenomena of the game at desk
//! scale.
//!
//! Module map:
//! - [`model`]: instances, divisions, the `p <-> q` correspondence, reports.
//! - [`priors`]: prior families, pile-pick probabilities, chooser utility.
//! - [`solver_normal`]: the additive-guarantee sweep solver for independent
//!   normal priors (a cone subproblem per probability cap).
//! - [`solver_discrete`]: exact solver for finite-type priors via subset
//!   enumeration plus a dense LP, including the LP itself.
//! - [`oracle`]: brute-force grid search and exact division evaluation.
//! - [`extensions`]: risk-averse dividers and the multiple-offers game.
//! - [`experiments`]: seeded Monte-Carlo welfare studies.
//! - [`acceptance`]: the end-to-end verification suite behind `dnc verify`.
//!
//! The `dnc` binary fronts all of this; see the book under `book/` for a
//! guided tour.

pub mod acceptance;
pub mod error;
pub mod experiments;
pub mod extensions;
pub mod io;
pub mod mc;
pub mod model;
pub mod oracle;
mod phi;
pub mod priors;
pub mod solver_discrete;
pub mod solver_normal;
mod socp;

pub use error::{Error, Result};
pub use model::{Division, Instance, SolveMethod, SolveReport};
pub use priors::{JointDiscretePrior, Prior};

/// Doc-tests every code snippet in the book, so the guide can never drift
/// from the library. rustdoc sees these modules only when collecting tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/divisions.md")]
    mod divisions {}
    #[doc = include_str!("../../../book/src/priors.md")]
    mod priors {}
    #[doc = include_str!("../../../book/src/normal-solver.md")]
    mod normal_solver {}
    #[doc = include_str!("../../../book/src/discrete-solver.md")]
    mod discrete_solver {}
    #[doc = include_str!("../../../book/src/risk-aversion.md")]
    mod risk_aversion {}
    #[doc = include_str!("../../../book/src/multiple-offers.md")]
    mod multiple_offers {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
