//! The linear Fisher market with constant unit production costs.
//!
//! Supply is unbounded, so prices are pinned at cost: `p_j = d_j`. A buyer
//! whose best ratio `u_ij / d_j` is below 1 keeps all money; everyone else
//! spends it all on a best good.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{self, bang_per_buck, validate_instance, MarketInstance};
use crate::rational::{self, serde_rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostMarketInstance {
    pub base: MarketInstance,
    /// `unit_costs[j]`: cost `d_j > 0` per unit of good `j` produced.
    pub unit_costs: Vec<Rational>,
}

impl CostMarketInstance {
    pub fn new(base: MarketInstance, unit_costs: Vec<Rational>) -> Result<Self> {
        if unit_costs.len() != base.num_goods() {
            return Err(Error::Dimension(format!("{} costs for {} goods", unit_costs.len(), base.num_goods())));
        }
        Ok(Self { base, unit_costs })
    }

    /// Base market assumptions plus positive costs.
    pub fn validate(&self) -> Result<()> {
        let mut problems: Vec<String> = validate_instance(&self.base).violations.iter().map(ToString::to_string).collect();
        for (j, d) in self.unit_costs.iter().enumerate() {
            if !d.is_positive() {
                problems.push(format!("good {j} has nonpositive cost {d}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(problems))
        }
    }

    /// Parses the shared instance format; `"costs"` is required here.
    pub fn parse(text: &str) -> Result<Self> {
        let doc = market::parse_document(text)?;
        let costs = doc.costs.ok_or_else(|| Error::Malformed("missing \"costs\"".into()))?;
        let inst = Self::new(doc.instance, costs)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&market::instance_json(&self.base, Some(&self.unit_costs))).expect("json")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostSolution {
    #[serde(with = "serde_rat::vec")]
    pub prices: Vec<Rational>,
    #[serde(with = "serde_rat::matrix")]
    pub allocation: Vec<Vec<Rational>>,
    /// `produced[j] = Σ_i allocation[i][j]`.
    #[serde(with = "serde_rat::vec")]
    pub produced: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub returned: Vec<Rational>,
    #[serde(with = "serde_rat")]
    pub revenue: Rational,
    #[serde(with = "serde_rat")]
    pub profit: Rational,
}

impl CostSolution {
    /// Derives production, revenue and profit from prices, allocation and refunds.
    pub fn assemble(
        inst: &CostMarketInstance,
        prices: Vec<Rational>,
        allocation: Vec<Vec<Rational>>,
        returned: Vec<Rational>,
    ) -> Self {
        let m = inst.base.num_goods();
        let produced: Vec<Rational> = (0..m).map(|j| rational::sum(allocation.iter().map(|r| &r[j]))).collect();
        let revenue = inst.base.total_money() - rational::sum(&returned);
        let cost: Rational = produced.iter().zip(&inst.unit_costs).map(|(y, d)| y * d).sum();
        let profit = &revenue - cost;
        Self { prices, allocation, produced, returned, revenue, profit }
    }
}

pub fn solve_cost_market(inst: &CostMarketInstance) -> Result<CostSolution> {
    inst.validate()?;
    let base = &inst.base;
    let (n, m) = (base.num_buyers(), base.num_goods());
    let prices = inst.unit_costs.clone();
    let mut x = vec![vec![Rational::zero(); m]; n];
    let mut s = vec![Rational::zero(); n];
    for i in 0..n {
        let alpha = bang_per_buck(base, &prices, i);
        if alpha < Rational::one() {
            s[i] = base.money[i].clone();
            continue;
        }
        let j = (0..m)
            .find(|&j| &base.utilities[i][j] / &prices[j] == alpha)
            .expect("the best ratio is attained");
        x[i][j] = &base.money[i] / &prices[j];
    }
    Ok(CostSolution::assemble(inst, prices, x, s))
}

/// Revenue `Σ m_i − Σ s_i` minus production cost `Σ d_j y_j`.
pub fn profit(inst: &CostMarketInstance, sol: &CostSolution) -> Rational {
    let cost: Rational = sol.produced.iter().zip(&inst.unit_costs).map(|(y, d)| y * d).sum();
    inst.base.total_money() - rational::sum(&sol.returned) - cost
}

pub fn serialize_cost_solution(sol: &CostSolution) -> String {
    serde_json::to_string_pretty(sol).expect("json")
}
