//! Brute-force ground truth for small instances, kept independent of the
//! solver: no flows, no price raising, only enumeration and linear algebra.

mod cost;
mod qp;
mod support;

pub use cost::{cost_candidates, oracle_cost_solve, BuyerCandidate};
pub use qp::oracle_balanced_surplus;
pub use support::{oracle_solve, oracle_solve_detailed, OracleSolution, SupportGuess, MAX_SUPPORT_ELEMENTS};

use crate::error::{Error, Result};
use crate::market::MarketInstance;
use crate::rational::{to_f64, Rational};

/// `Σ m_i ln(w_i(x_i) + s_i) − Σ s_i`, in floating point.
pub fn numeric_objective(inst: &MarketInstance, x: &[Vec<Rational>], s: &[Rational]) -> Result<f64> {
    let xf: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let sf: Vec<f64> = s.iter().map(to_f64).collect();
    numeric_objective_f64(inst, &xf, &sf)
}

/// [`numeric_objective`] for an allocation already in floating point.
pub fn numeric_objective_f64(inst: &MarketInstance, x: &[Vec<f64>], s: &[f64]) -> Result<f64> {
    let n = inst.num_buyers();
    if x.len() != n || s.len() != n || x.iter().any(|r| r.len() != inst.num_goods()) {
        return Err(Error::Dimension("allocation does not match the instance".into()));
    }
    let mut total = 0.0;
    for i in 0..n {
        let w: f64 = x[i].iter().zip(&inst.utilities[i]).map(|(x, u)| x * to_f64(u)).sum();
        let level = w + s[i];
        if level <= 0.0 {
            return Err(Error::DegenerateObjective(i));
        }
        total += to_f64(&inst.money[i]) * level.ln() - s[i];
    }
    Ok(total)
}
