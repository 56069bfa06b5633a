//! Enumeration for the market with unit production costs.
//!
//! Every sold good is priced at cost, and pricing unsold goods at cost too
//! only loosens the ratio bounds, so `p = d` throughout. Buyers then decouple:
//! the only supports with a unique solution are "refund everything" and "spend
//! everything on one good `j`" (`x_ij = m_i / d_j`). Each candidate is checked
//! against the buyer's conditions with `λ = 1`; among the survivors the one
//! with the smallest refund (largest revenue) wins, lowest good index on ties.

use num_traits::{One, Signed, Zero};

use crate::cost::{CostMarketInstance, CostSolution};
use crate::error::{Error, Result};
use crate::kkt::verify_cost_kkt;
use crate::rational::Rational;

pub const MAX_GOODS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuyerCandidate {
    /// `None` for the full refund.
    pub good: Option<usize>,
    pub refund: Rational,
    pub passes: bool,
}

/// All nonsingular single-buyer supports and whether each satisfies the
/// buyer's optimality conditions at `p = d`.
pub fn cost_candidates(inst: &CostMarketInstance, buyer: usize) -> Vec<BuyerCandidate> {
    let base = &inst.base;
    let d = &inst.unit_costs;
    let money = &base.money[buyer];
    let u = &base.utilities[buyer];
    // level (w_i + s_i) / m_i must dominate every ratio u_ij / d_j and be ≥ 1
    let admissible = |level: &Rational| level >= &Rational::one() && u.iter().zip(d).all(|(u, d)| &(u / d) <= level);
    let mut out = vec![BuyerCandidate { good: None, refund: money.clone(), passes: admissible(&Rational::one()) }];
    for j in 0..base.num_goods() {
        if !u[j].is_positive() {
            continue;
        }
        // x = m/d gives w = u m / d, so the level is u/d; matching the
        // bought good's ratio is then automatic
        let level = &u[j] / &d[j];
        out.push(BuyerCandidate { good: Some(j), refund: Rational::zero(), passes: admissible(&level) });
    }
    out
}

pub fn oracle_cost_solve(inst: &CostMarketInstance) -> Result<CostSolution> {
    inst.validate()?;
    let base = &inst.base;
    let (n, m) = (base.num_buyers(), base.num_goods());
    if m > MAX_GOODS {
        return Err(Error::SizeGuard(format!("{m} goods (limit {MAX_GOODS})")));
    }
    let prices = inst.unit_costs.clone();
    let mut x = vec![vec![Rational::zero(); m]; n];
    let mut s = vec![Rational::zero(); n];
    for i in 0..n {
        let best = cost_candidates(inst, i)
            .into_iter()
            .filter(|c| c.passes)
            .min_by(|a, b| a.refund.cmp(&b.refund).then(a.good.cmp(&b.good)))
            .ok_or(Error::NoSupport)?;
        match best.good {
            Some(j) => x[i][j] = &base.money[i] / &prices[j],
            None => s[i] = best.refund,
        }
    }
    let sol = CostSolution::assemble(inst, prices, x, s);
    if !verify_cost_kkt(inst, &sol)?.overall {
        return Err(Error::Contract("assembled cost solution fails its own check".into()));
    }
    Ok(sol)
}
