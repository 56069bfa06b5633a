//! Exact equilibrium computation for the Arctic Auction.
//!
//! The crate is organised bottom-up:
//!
//! * [`market`] holds the instance and equilibrium data model, validation,
//!   random instance generation and the JSON wire format.
//! * [`flow`] builds the money network `N(p, r)` and provides exact max-flow,
//!   min-cut and residual-reachability primitives.
//! * [`balanced`] computes balanced flows (max flows minimising the l2 norm
//!   of the buyer surplus vector) and the potential used to bound progress.
//! * [`solver`] runs the primal-dual price-raising algorithm to termination.
//! * [`kkt`] verifies candidate solutions against the optimality conditions
//!   of both convex programs, exactly.
//! * [`cost`] solves the Fisher market with constant marginal costs.
//! * [`oracle`] provides brute-force ground truth for small instances.
//!
//! All solver arithmetic uses arbitrary-precision rationals; nothing on the
//! solve path rounds.

pub mod balanced;
pub mod cost;
pub mod error;
pub mod flow;
pub mod kkt;
pub mod linalg;
pub mod market;
pub mod oracle;
pub mod rational;
pub mod solver;

pub use balanced::{balanced_flow, potential, surplus, verify_property1, PotentialValue, SurplusVector};
pub use cost::{profit, solve_cost_market, CostMarketInstance, CostSolution};
pub use error::{Error, Result};
pub use flow::{build_network, check_invariant, max_flow, maximal_min_cut, min_cut_source_side, Cut, Flow, FlowNetwork};
pub use kkt::{verify_arctic_kkt, verify_cost_kkt, verify_market_clearing, KktReport};
pub use market::{
    generate_random_instance, parse_instance, serialize_equilibrium, validate_instance, Equilibrium,
    MarketInstance, RunStats, ValidationReport,
};
pub use oracle::{numeric_objective, oracle_balanced_surplus, oracle_cost_solve, oracle_solve};
pub use rational::Rational;
pub use solver::{solve, solve_with, SolverOptions};
