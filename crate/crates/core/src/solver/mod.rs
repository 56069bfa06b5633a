//! The primal–dual price-raising algorithm.
//!
//! Prices start low enough that every buyer can afford everything. Each phase
//! takes a balanced flow, picks the buyers with the most surplus money and
//! raises the prices of the goods they want, in lock-step, until an edge
//! appears, a set of goods becomes exactly paid for, or a buyer's best bang
//! per buck falls to 1 and money is handed back. The run ends when no buyer
//! has surplus left.

pub mod events;
mod state;
pub mod trace;

pub use events::{mbpb, Event, EventKind};
pub use state::{PhaseOutcome, PhaseStart, SolverState, Step};
pub use trace::{price_hash, IterationSurplus, Snapshot, Trace, TraceRow};

use crate::error::Result;
use crate::market::{Equilibrium, MarketInstance, RunStats};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Keep per-event rows, price snapshots and iteration surpluses.
    pub record_trace: bool,
    /// Re-check `({s}, rest)` after every event that does not end a phase.
    pub check_invariant_at_events: bool,
    /// Abort with a contract error after this many phases.
    pub max_phases: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { record_trace: false, check_invariant_at_events: false, max_phases: 10_000_000 }
    }
}

impl SolverOptions {
    pub fn traced() -> Self {
        Self { record_trace: true, check_invariant_at_events: true, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub equilibrium: Equilibrium,
    pub stats: RunStats,
    pub trace: Option<Trace>,
}

pub fn solve(inst: &MarketInstance) -> Result<(Equilibrium, RunStats)> {
    let out = solve_with(inst, &SolverOptions::default())?;
    Ok((out.equilibrium, out.stats))
}

pub fn solve_with(inst: &MarketInstance, opts: &SolverOptions) -> Result<SolveOutcome> {
    let mut st = SolverState::initialize(inst, opts.clone())?;
    while st.begin_phase()? == PhaseStart::Started {
        st.run_phase()?;
    }
    let (equilibrium, stats, trace) = st.finish();
    Ok(SolveOutcome { equilibrium, stats, trace })
}
