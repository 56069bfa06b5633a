//! Per-event records of a solver run.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::events::EventKind;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub phase: usize,
    pub iteration: usize,
    pub event: EventKind,
    pub theta: Rational,
    /// Potential of the most recent balanced flow.
    pub phi: Rational,
    pub active_buyers: usize,
    pub active_goods: usize,
    pub zero_degree: usize,
    pub price_hash: String,
}

/// Prices and every buyer's bang per buck, taken after initialization and
/// after each event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub prices: Vec<Rational>,
    pub alpha: Vec<Rational>,
    pub returned: Vec<Rational>,
}

/// Balanced-flow surpluses at the start and end of an iteration that ended
/// with a new edge and returned no money. Indexed like `buyers`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationSurplus {
    pub buyers: Vec<usize>,
    pub before: Vec<Rational>,
    pub after: Vec<Rational>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub snapshots: Vec<Snapshot>,
    pub iterations: Vec<IterationSurplus>,
    /// `({s}, rest)` was a minimum cut after each event (only recorded when
    /// requested in the options).
    pub event_invariants: Vec<bool>,
}

pub const CSV_HEADER: &str = "phase,iteration,event,theta,phi,active_buyers,active_goods,zero_degree,price_hash";

impl Trace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.phase,
                r.iteration,
                r.event,
                r.theta,
                r.phi,
                r.active_buyers,
                r.active_goods,
                r.zero_degree,
                r.price_hash
            );
        }
        out
    }

    /// Rows whose event ended a phase.
    pub fn phase_ending_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.event.ends_phase()).count()
    }
}

/// First 16 hex digits of SHA-256 over the comma-joined price strings.
pub fn price_hash(prices: &[Rational]) -> String {
    let joined: Vec<String> = prices.iter().map(ToString::to_string).collect();
    let digest = Sha256::digest(joined.join(",").as_bytes());
    hex::encode(digest)[..16].to_string()
}
