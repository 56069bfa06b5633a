//! Exact optimality checks for both convex programs.
//!
//! The dual scalar `λ` is never an input: it is fixed to 1, which is forced
//! when any money is refunded and is the largest admissible value otherwise.
//! Every condition reports a signed or absolute residual; inequalities pass
//! when the worst `lhs − rhs` is at most zero, equalities and implications
//! when the worst absolute difference is zero.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cost::{CostMarketInstance, CostSolution};
use crate::error::{Error, Result};
use crate::market::{bang_per_buck, Equilibrium, MarketInstance};
use crate::rational::{self, serde_rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionResult {
    pub name: String,
    /// Position in the list of KKT conditions, `None` for primal and extra
    /// checks.
    pub kkt: Option<u8>,
    pub passed: bool,
    #[serde(with = "serde_rat")]
    pub residual: Rational,
    /// Where the worst residual occurs, empty on pass.
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BuyerCheck {
    pub buyer: usize,
    /// Which statement, e.g. `"mbpb_goods_only"` or `"alpha_above_one"`.
    pub statement: String,
    /// False when the hypothesis does not hold (the check is then vacuous).
    pub applies: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KktReport {
    pub condition_results: Vec<ConditionResult>,
    #[serde(with = "serde_rat")]
    pub lambda: Rational,
    /// Every condition in `condition_results` passed.
    pub overall: bool,
    pub buyer_statements: Vec<BuyerCheck>,
    pub trichotomy: Vec<BuyerCheck>,
}

impl KktReport {
    pub fn failed(&self) -> Vec<&ConditionResult> {
        self.condition_results.iter().filter(|c| !c.passed).collect()
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.condition_results.iter().find(|c| c.name == name)
    }

    pub fn kkt_condition(&self, k: u8) -> Option<&ConditionResult> {
        self.condition_results.iter().find(|c| c.kkt == Some(k))
    }

    pub fn statements_ok(&self) -> bool {
        self.buyer_statements.iter().all(|c| c.passed)
    }

    pub fn trichotomy_ok(&self) -> bool {
        self.trichotomy.iter().all(|c| c.passed)
    }

    fn finish(condition_results: Vec<ConditionResult>, buyer_statements: Vec<BuyerCheck>, trichotomy: Vec<BuyerCheck>) -> Self {
        let overall = condition_results.iter().all(|c| c.passed);
        Self { condition_results, lambda: Rational::one(), overall, buyer_statements, trichotomy }
    }
}

enum Kind {
    /// Pass iff the largest value is ≤ 0.
    AtMostZero,
    /// Pass iff every value is 0; the residual is the largest magnitude.
    Zero,
}

fn check(name: &str, kkt: Option<u8>, kind: Kind, items: impl IntoIterator<Item = (Rational, String)>) -> ConditionResult {
    let mut worst: Option<(Rational, String)> = None;
    for (v, at) in items {
        let v = match kind {
            Kind::AtMostZero => v,
            Kind::Zero => v.abs(),
        };
        if worst.as_ref().is_none_or(|(w, _)| v > *w) {
            worst = Some((v, at));
        }
    }
    let (residual, at) = worst.unwrap_or_else(|| (Rational::zero(), String::new()));
    let passed = match kind {
        Kind::AtMostZero => !residual.is_positive(),
        Kind::Zero => residual.is_zero(),
    };
    ConditionResult { name: name.into(), kkt, passed, residual, detail: if passed { String::new() } else { at } }
}

fn failure(name: &str, kkt: Option<u8>, residual: Rational, detail: String) -> ConditionResult {
    ConditionResult { name: name.into(), kkt, passed: false, residual, detail }
}

/// Shared view of a candidate point of either program.
struct Point<'a> {
    utilities: &'a [Vec<Rational>],
    money: &'a [Rational],
    prices: &'a [Rational],
    x: &'a [Vec<Rational>],
    s: &'a [Rational],
}

impl Point<'_> {
    fn n(&self) -> usize {
        self.money.len()
    }

    fn m(&self) -> usize {
        self.prices.len()
    }

    fn w(&self, i: usize) -> Rational {
        self.x[i].iter().zip(&self.utilities[i]).fold(Rational::zero(), |acc, (x, u)| acc + x * u)
    }

    fn spent(&self, i: usize) -> Rational {
        self.x[i].iter().zip(self.prices).fold(Rational::zero(), |acc, (x, p)| acc + x * p)
    }

    fn sold(&self, j: usize) -> Rational {
        rational::sum(self.x.iter().map(|row| &row[j]))
    }

    fn check_shape(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        if self.utilities.len() != n || self.utilities.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension(format!("instance is not {n}×{m}")));
        }
        if self.x.len() != n || self.x.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension(format!("allocation is not {n}×{m}")));
        }
        if self.s.len() != n {
            return Err(Error::Dimension(format!("{} refunds for {n} buyers", self.s.len())));
        }
        Ok(())
    }

    fn nonnegativity(&self) -> Vec<ConditionResult> {
        let xs = (0..self.n())
            .flat_map(|i| (0..self.m()).map(move |j| (i, j)))
            .map(|(i, j)| (-&self.x[i][j], format!("x[{i}][{j}]")));
        let ss = (0..self.n()).map(|i| (-&self.s[i], format!("s[{i}]")));
        vec![
            check("allocation_nonnegative", None, Kind::AtMostZero, xs.collect::<Vec<_>>()),
            check("refund_nonnegative", None, Kind::AtMostZero, ss.collect::<Vec<_>>()),
            // the aggregate refund is defined as Σ s_i, so its constraint holds identically
            check("refund_total", None, Kind::Zero, [(Rational::zero(), String::new())]),
        ]
    }

    /// Conditions 3–8, shared by both programs, plus the degenerate-buyer
    /// check that guards the divisions in 5–8.
    fn buyer_conditions(&self, lambda: &Rational) -> Vec<ConditionResult> {
        let (n, m) = (self.n(), self.m());
        let mut out = Vec::new();
        out.push(check("lambda_at_most_one", Some(3), Kind::AtMostZero, [(lambda - Rational::one(), "λ".into())]));
        let refunded = self.s.iter().any(Signed::is_positive);
        let c4 = if refunded { lambda - Rational::one() } else { Rational::zero() };
        out.push(check("refund_forces_lambda_one", Some(4), Kind::Zero, [(c4, "λ".into())]));

        let degenerate: Vec<usize> = (0..n).filter(|&i| !(self.w(i) + &self.s[i]).is_positive()).collect();
        let level: Vec<Option<Rational>> = (0..n)
            .map(|i| {
                let total = self.w(i) + &self.s[i];
                total.is_positive().then(|| total / &self.money[i])
            })
            .collect();

        let mut c5 = Vec::new();
        let mut c6 = Vec::new();
        let mut zero_price: Option<String> = None;
        for i in 0..n {
            let Some(lv) = &level[i] else { continue };
            for j in 0..m {
                let u = &self.utilities[i][j];
                let p = &self.prices[j];
                if !p.is_positive() {
                    if u.is_positive() && zero_price.is_none() {
                        zero_price = Some(format!("buyer {i}, good {j}: price {p} with positive utility"));
                    }
                    continue;
                }
                let ratio = u / p;
                c5.push((&ratio - lv, format!("buyer {i}, good {j}")));
                if self.x[i][j].is_positive() {
                    c6.push((&ratio - lv, format!("buyer {i}, good {j}")));
                }
            }
        }
        out.push(match zero_price {
            Some(at) => failure("bang_per_buck_bound", Some(5), Rational::one(), at),
            None => check("bang_per_buck_bound", Some(5), Kind::AtMostZero, c5),
        });
        out.push(check("bought_at_best_ratio", Some(6), Kind::Zero, c6));

        let mut c7 = Vec::new();
        let mut c8 = Vec::new();
        for i in 0..n {
            let Some(lv) = &level[i] else { continue };
            let inv = lv.recip();
            c7.push((&inv - lambda, format!("buyer {i}")));
            if self.s[i].is_positive() {
                c8.push((&inv - lambda, format!("buyer {i}")));
            }
        }
        out.push(check("lambda_lower_bound", Some(7), Kind::AtMostZero, c7));
        out.push(check("refund_level", Some(8), Kind::Zero, c8));
        out.push(if degenerate.is_empty() {
            check("degenerate_buyer", None, Kind::Zero, [])
        } else {
            failure(
                "degenerate_buyer",
                None,
                Rational::from_integer((degenerate.len() as i64).into()),
                format!("buyers {degenerate:?} hold neither utility nor money"),
            )
        });
        out
    }

    /// Equilibrium statements per buyer, with `α` computed from the prices.
    fn buyer_statements(&self, alpha: &[Rational]) -> Vec<BuyerCheck> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            let bought: Vec<usize> = (0..self.m()).filter(|&j| self.x[i][j].is_positive()).collect();
            let best = |j: usize| self.prices[j].is_positive() && &self.utilities[i][j] / &self.prices[j] == alpha[i];
            out.push(BuyerCheck {
                buyer: i,
                statement: "mbpb_goods_only".into(),
                applies: !bought.is_empty(),
                passed: bought.iter().all(|&j| best(j)) && (bought.is_empty() || alpha[i] >= Rational::one()),
            });
            let mixed = self.s[i].is_positive() && !bought.is_empty();
            out.push(BuyerCheck {
                buyer: i,
                statement: "refund_with_goods_at_cap".into(),
                applies: mixed,
                passed: !mixed
                    || (alpha[i] == Rational::one() && bought.iter().all(|&j| self.utilities[i][j] == self.prices[j])),
            });
            let empty = bought.is_empty();
            out.push(BuyerCheck {
                buyer: i,
                statement: "no_goods_prices_above_cap".into(),
                applies: empty,
                passed: !empty || (0..self.m()).all(|j| self.prices[j] >= self.utilities[i][j]),
            });
        }
        out
    }

    /// How each buyer ends: `α > 1` spends everything on goods, `α = 1`
    /// mixes goods and refund worth `m_i`, `α < 1` gets everything back.
    fn trichotomy(&self, alpha: &[Rational]) -> Vec<BuyerCheck> {
        let one = Rational::one();
        (0..self.n())
            .map(|i| {
                let spent = self.spent(i);
                let worth_ok = &spent + &self.s[i] == self.money[i];
                let goods_best = (0..self.m()).filter(|&j| self.x[i][j].is_positive()).all(|j| {
                    self.prices[j].is_positive() && &self.utilities[i][j] / &self.prices[j] == alpha[i]
                });
                let (statement, passed) = if alpha[i] > one {
                    ("alpha_above_one", self.s[i].is_zero() && spent == self.money[i] && goods_best)
                } else if alpha[i] == one {
                    ("alpha_equal_one", worth_ok && goods_best)
                } else {
                    ("alpha_below_one", self.s[i] == self.money[i] && self.x[i].iter().all(Zero::is_zero))
                };
                BuyerCheck { buyer: i, statement: statement.into(), applies: true, passed }
            })
            .collect()
    }
}

fn alphas(utilities: &[Vec<Rational>], money: &[Rational], prices: &[Rational]) -> Vec<Rational> {
    let inst = MarketInstance { money: money.to_vec(), utilities: utilities.to_vec(), names: None };
    (0..money.len()).map(|i| bang_per_buck(&inst, prices, i)).collect()
}

pub fn verify_arctic_kkt(inst: &MarketInstance, eq: &Equilibrium) -> Result<KktReport> {
    let pt = Point {
        utilities: &inst.utilities,
        money: &inst.money,
        prices: &eq.prices,
        x: &eq.allocation,
        s: &eq.returned,
    };
    if eq.prices.len() != inst.num_goods() {
        return Err(Error::Dimension(format!("{} prices for {} goods", eq.prices.len(), inst.num_goods())));
    }
    pt.check_shape()?;
    let lambda = Rational::one();
    let m = pt.m();
    let mut conds = vec![check(
        "supply",
        None,
        Kind::AtMostZero,
        (0..m).map(|j| (pt.sold(j) - Rational::one(), format!("good {j}"))).collect::<Vec<_>>(),
    )];
    conds.extend(pt.nonnegativity());
    conds.push(check(
        "price_nonnegative",
        Some(1),
        Kind::AtMostZero,
        (0..m).map(|j| (-&eq.prices[j], format!("good {j}"))).collect::<Vec<_>>(),
    ));
    conds.push(check(
        "priced_goods_sold",
        Some(2),
        Kind::Zero,
        (0..m)
            .filter(|&j| eq.prices[j].is_positive())
            .map(|j| (pt.sold(j) - Rational::one(), format!("good {j}")))
            .collect::<Vec<_>>(),
    ));
    conds.extend(pt.buyer_conditions(&lambda));
    let alpha = alphas(&inst.utilities, &inst.money, &eq.prices);
    Ok(KktReport::finish(conds, pt.buyer_statements(&alpha), pt.trichotomy(&alpha)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClearingReport {
    pub goods_cleared: Vec<bool>,
    pub prices_positive: Vec<bool>,
    pub budgets_balanced: Vec<bool>,
    pub overall: bool,
}

/// Every good fully sold at a positive price, and every buyer's spending
/// plus refund equal to the budget.
pub fn verify_market_clearing(inst: &MarketInstance, eq: &Equilibrium) -> ClearingReport {
    let m = eq.prices.len();
    let shape_ok = m == inst.num_goods()
        && eq.allocation.len() == inst.num_buyers()
        && eq.returned.len() == inst.num_buyers()
        && eq.allocation.iter().all(|r| r.len() == m);
    if !shape_ok {
        return ClearingReport { goods_cleared: vec![], prices_positive: vec![], budgets_balanced: vec![], overall: false };
    }
    let goods_cleared: Vec<bool> =
        (0..m).map(|j| rational::sum(eq.allocation.iter().map(|r| &r[j])) == Rational::one()).collect();
    let prices_positive: Vec<bool> = eq.prices.iter().map(Signed::is_positive).collect();
    let budgets_balanced: Vec<bool> =
        (0..inst.num_buyers()).map(|i| eq.spent(i) + &eq.returned[i] == inst.money[i]).collect();
    let overall = goods_cleared.iter().chain(&prices_positive).chain(&budgets_balanced).all(|&b| b);
    ClearingReport { goods_cleared, prices_positive, budgets_balanced, overall }
}

/// Program (primal and dual) checks for the market with unit production
/// costs, plus zero profit and consistency of the reported totals.
pub fn verify_cost_kkt(inst: &CostMarketInstance, sol: &CostSolution) -> Result<KktReport> {
    let base = &inst.base;
    let m = base.num_goods();
    if sol.prices.len() != m || sol.produced.len() != m || inst.unit_costs.len() != m {
        return Err(Error::Dimension(format!("per-good vectors must have {m} entries")));
    }
    let pt = Point {
        utilities: &base.utilities,
        money: &base.money,
        prices: &sol.prices,
        x: &sol.allocation,
        s: &sol.returned,
    };
    pt.check_shape()?;
    let lambda = Rational::one();
    let d = &inst.unit_costs;
    let mut conds = vec![check(
        "production_balance",
        None,
        Kind::Zero,
        (0..m).map(|j| (pt.sold(j) - &sol.produced[j], format!("good {j}"))).collect::<Vec<_>>(),
    )];
    conds.extend(pt.nonnegativity());
    conds.push(check(
        "price_at_most_cost",
        Some(1),
        Kind::AtMostZero,
        (0..m).map(|j| (&sol.prices[j] - &d[j], format!("good {j}"))).collect::<Vec<_>>(),
    ));
    conds.push(check(
        "produced_at_cost",
        Some(2),
        Kind::Zero,
        (0..m)
            .filter(|&j| sol.produced[j].is_positive())
            .map(|j| (&d[j] - &sol.prices[j], format!("good {j}")))
            .collect::<Vec<_>>(),
    ));
    conds.extend(pt.buyer_conditions(&lambda));
    let total = base.total_money();
    let refunds = rational::sum(&sol.returned);
    let cost: Rational = (0..m).map(|j| &d[j] * &sol.produced[j]).sum();
    let revenue = &total - &refunds;
    conds.push(check("budget", None, Kind::Zero,
        (0..pt.n()).map(|i| (pt.spent(i) + &sol.returned[i] - &base.money[i], format!("buyer {i}"))).collect::<Vec<_>>()));
    conds.push(check("revenue_consistent", None, Kind::Zero, [(&sol.revenue - &revenue, "revenue".into())]));
    conds.push(check("profit_consistent", None, Kind::Zero, [(&sol.profit - (&revenue - &cost), "profit".into())]));
    conds.push(check("zero_profit", None, Kind::Zero, [(&revenue - &cost, "profit".into())]));
    let alpha = alphas(&base.utilities, &base.money, &sol.prices);
    Ok(KktReport::finish(conds, pt.buyer_statements(&alpha), pt.trichotomy(&alpha)))
}
