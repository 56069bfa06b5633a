//! Instance and equilibrium data model.
//!
//! Buyers and goods are identified by their list index. Everything is stored
//! as exact rationals; the JSON form writes each number as a `"p/q"` string.

use std::fmt;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{self, bit_size, int, serde_rat, Rational};

/// Optional display names; never consulted by the algorithms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Names {
    #[serde(default)]
    pub buyers: Vec<String>,
    #[serde(default)]
    pub goods: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarketInstance {
    /// `money[i]`: budget of buyer `i`.
    pub money: Vec<Rational>,
    /// `utilities[i][j]`: utility of buyer `i` per unit of good `j`, also the
    /// highest price at which `i` is willing to buy `j`.
    pub utilities: Vec<Vec<Rational>>,
    pub names: Option<Names>,
}

impl MarketInstance {
    /// Builds an instance, checking only that the matrix is rectangular and
    /// matches the money vector. Use [`validate_instance`] for the market
    /// assumptions.
    pub fn new(money: Vec<Rational>, utilities: Vec<Vec<Rational>>) -> Result<Self> {
        if money.is_empty() {
            return Err(Error::Dimension("no buyers".into()));
        }
        if utilities.len() != money.len() {
            return Err(Error::Dimension(format!(
                "{} money entries but {} utility rows",
                money.len(),
                utilities.len()
            )));
        }
        let m = utilities[0].len();
        if m == 0 {
            return Err(Error::Dimension("no goods".into()));
        }
        if let Some(i) = utilities.iter().position(|row| row.len() != m) {
            return Err(Error::Dimension(format!(
                "utility row {i} has {} entries, expected {m}",
                utilities[i].len()
            )));
        }
        Ok(Self { money, utilities, names: None })
    }

    /// Convenience constructor from integer numerators and denominators.
    pub fn from_ratios(money: &[(i64, i64)], utilities: &[Vec<(i64, i64)>]) -> Result<Self> {
        let money = money.iter().map(|&(n, d)| rational::ratio(n, d)).collect();
        let utilities = utilities
            .iter()
            .map(|row| row.iter().map(|&(n, d)| rational::ratio(n, d)).collect())
            .collect();
        Self::new(money, utilities)
    }

    pub fn from_ints(money: &[i64], utilities: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            money.iter().map(|&v| int(v)).collect(),
            utilities.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect(),
        )
    }

    pub fn num_buyers(&self) -> usize {
        self.money.len()
    }

    pub fn num_goods(&self) -> usize {
        self.utilities[0].len()
    }

    pub fn utility(&self, buyer: usize, good: usize) -> &Rational {
        &self.utilities[buyer][good]
    }

    pub fn total_money(&self) -> Rational {
        rational::sum(&self.money)
    }

    pub fn bit_bounds(&self) -> BitBounds {
        let min_money = rational::min_of(&self.money).unwrap_or_else(Rational::zero);
        let max_utility = rational::max_of(self.utilities.iter().flatten()).unwrap_or_else(Rational::zero);
        let input_bits =
            self.money.iter().map(bit_size).sum::<u64>() + self.utilities.iter().flatten().map(bit_size).sum::<u64>();
        BitBounds { min_money, total_money: self.total_money(), max_utility, input_bits }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonpositiveMoney(usize),
    NegativeUtility(usize, usize),
    BuyerWithoutPositiveUtility(usize),
    GoodUndesired(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonpositiveMoney(i) => write!(f, "nonpositive money: buyer {i}"),
            Violation::NegativeUtility(i, j) => write!(f, "negative utility: buyer {i}, good {j}"),
            Violation::BuyerWithoutPositiveUtility(i) => write!(f, "buyer with no positive utility: buyer {i}"),
            Violation::GoodUndesired(j) => write!(f, "good undesired: good {j}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(self.violations.iter().map(ToString::to_string).collect()))
        }
    }
}

/// Checks strictly positive money, nonnegative utilities, and that every
/// buyer wants some good and every good is wanted by some buyer.
pub fn validate_instance(inst: &MarketInstance) -> ValidationReport {
    let mut violations = Vec::new();
    for (i, m) in inst.money.iter().enumerate() {
        if !m.is_positive() {
            violations.push(Violation::NonpositiveMoney(i));
        }
    }
    for (i, row) in inst.utilities.iter().enumerate() {
        for (j, u) in row.iter().enumerate() {
            if u.is_negative() {
                violations.push(Violation::NegativeUtility(i, j));
            }
        }
        if !row.iter().any(Signed::is_positive) {
            violations.push(Violation::BuyerWithoutPositiveUtility(i));
        }
    }
    for j in 0..inst.num_goods() {
        if !inst.utilities.iter().any(|row| row[j].is_positive()) {
            violations.push(Violation::GoodUndesired(j));
        }
    }
    ValidationReport { violations }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equilibrium {
    #[serde(with = "serde_rat::vec")]
    pub prices: Vec<Rational>,
    /// `allocation[i][j]`: units of good `j` held by buyer `i`.
    #[serde(with = "serde_rat::matrix")]
    pub allocation: Vec<Vec<Rational>>,
    #[serde(with = "serde_rat::vec")]
    pub returned: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub alpha: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub bundle_utility: Vec<Rational>,
}

impl Equilibrium {
    /// Fills in `alpha` and `bundle_utility` from prices and allocation.
    pub fn assemble(
        inst: &MarketInstance,
        prices: Vec<Rational>,
        allocation: Vec<Vec<Rational>>,
        returned: Vec<Rational>,
    ) -> Self {
        let alpha = (0..inst.num_buyers()).map(|i| bang_per_buck(inst, &prices, i)).collect();
        let bundle_utility = allocation
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().zip(&inst.utilities[i]).fold(Rational::zero(), |acc, (x, u)| acc + x * u))
            .collect();
        Self { prices, allocation, returned, alpha, bundle_utility }
    }

    /// Money value of buyer `i`'s goods at the equilibrium prices.
    pub fn spent(&self, buyer: usize) -> Rational {
        self.allocation[buyer].iter().zip(&self.prices).fold(Rational::zero(), |acc, (x, p)| acc + x * p)
    }
}

/// `max_j u_ij / p_j`. Goods with nonpositive price are skipped.
pub fn bang_per_buck(inst: &MarketInstance, prices: &[Rational], buyer: usize) -> Rational {
    inst.utilities[buyer]
        .iter()
        .zip(prices)
        .filter(|(_, p)| p.is_positive())
        .map(|(u, p)| u / p)
        .max()
        .unwrap_or_else(Rational::zero)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseType {
    /// A set of goods went tight.
    #[serde(rename = "I")]
    TightSet,
    /// A buyer got all money back and left.
    #[serde(rename = "II")]
    FullReturn,
    /// A buyer got part of the money back.
    #[serde(rename = "III")]
    PartialReturn,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTypeCounts {
    pub type1: usize,
    pub type2: usize,
    pub type3: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitBounds {
    /// Smallest budget.
    #[serde(with = "serde_rat")]
    pub min_money: Rational,
    /// Sum of budgets.
    #[serde(with = "serde_rat")]
    pub total_money: Rational,
    /// Largest utility.
    #[serde(with = "serde_rat")]
    pub max_utility: Rational,
    /// Total bits over all numerators and denominators of the input.
    pub input_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialRecord {
    pub phase: usize,
    #[serde(with = "serde_rat")]
    pub phi_before: Rational,
    #[serde(with = "serde_rat")]
    pub phi_after: Rational,
    pub phase_type: PhaseType,
    /// Buyers still in the market when the phase began.
    pub live_buyers: usize,
    /// Whether `({s}, rest)` was a minimum cut when the phase ended.
    pub invariant_held: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub phase_count: usize,
    pub phase_types: PhaseTypeCounts,
    pub maxflow_calls: u64,
    pub bit_bounds: BitBounds,
    pub potential_trace: Vec<PotentialRecord>,
    /// Largest denominator, in bits, among output prices, allocations and refunds.
    pub max_denominator_bits: u64,
    /// `({s} u B u G, {t})` was a minimum cut of the final network.
    pub termination_cut_min: bool,
    /// Set when every buyer left the market before the goods were sold.
    pub all_buyers_removed: bool,
}

impl RunStats {
    pub fn new(inst: &MarketInstance) -> Self {
        Self {
            phase_count: 0,
            phase_types: PhaseTypeCounts::default(),
            maxflow_calls: 0,
            bit_bounds: inst.bit_bounds(),
            potential_trace: Vec::new(),
            max_denominator_bits: 0,
            termination_cut_min: false,
            all_buyers_removed: false,
        }
    }
}

fn rational_array(v: &Value, what: &str) -> Result<Vec<Rational>> {
    let arr = v.as_array().ok_or_else(|| Error::Malformed(format!("{what} must be an array")))?;
    arr.iter().map(rational::from_json).collect()
}

fn rational_matrix(v: &Value, what: &str) -> Result<Vec<Vec<Rational>>> {
    let arr = v.as_array().ok_or_else(|| Error::Malformed(format!("{what} must be an array of arrays")))?;
    arr.iter().map(|row| rational_array(row, what)).collect()
}

/// Parsed instance document; `costs` is present only for cost markets.
pub(crate) struct InstanceDocument {
    pub instance: MarketInstance,
    pub costs: Option<Vec<Rational>>,
}

pub(crate) fn parse_document(text: &str) -> Result<InstanceDocument> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let obj = doc.as_object().ok_or_else(|| Error::Malformed("instance must be a JSON object".into()))?;
    let money = rational_array(obj.get("money").ok_or_else(|| Error::Malformed("missing \"money\"".into()))?, "money")?;
    let utilities = rational_matrix(
        obj.get("utilities").ok_or_else(|| Error::Malformed("missing \"utilities\"".into()))?,
        "utilities",
    )?;
    let mut instance = MarketInstance::new(money, utilities)?;
    if let Some(names) = obj.get("names") {
        instance.names =
            Some(serde_json::from_value(names.clone()).map_err(|e| Error::Malformed(format!("names: {e}")))?);
    }
    let costs = match obj.get("costs") {
        Some(c) => {
            let c = rational_array(c, "costs")?;
            if c.len() != instance.num_goods() {
                return Err(Error::Dimension(format!("{} costs for {} goods", c.len(), instance.num_goods())));
            }
            Some(c)
        }
        None => None,
    };
    Ok(InstanceDocument { instance, costs })
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<MarketInstance> {
    let doc = parse_document(text)?;
    validate_instance(&doc.instance).into_result()?;
    Ok(doc.instance)
}

pub(crate) fn instance_json(inst: &MarketInstance, costs: Option<&[Rational]>) -> Value {
    let strs = |v: &[Rational]| v.iter().map(rational::format_rational).collect::<Vec<_>>();
    let mut obj = serde_json::Map::new();
    obj.insert("money".into(), serde_json::json!(strs(&inst.money)));
    obj.insert(
        "utilities".into(),
        serde_json::json!(inst.utilities.iter().map(|r| strs(r)).collect::<Vec<_>>()),
    );
    if let Some(c) = costs {
        obj.insert("costs".into(), serde_json::json!(strs(c)));
    }
    if let Some(names) = &inst.names {
        obj.insert("names".into(), serde_json::to_value(names).expect("names serialize"));
    }
    Value::Object(obj)
}

pub fn serialize_instance(inst: &MarketInstance) -> String {
    serde_json::to_string_pretty(&instance_json(inst, None)).expect("instance serializes")
}

pub fn serialize_equilibrium(eq: &Equilibrium, stats: &RunStats) -> String {
    let mut v = serde_json::to_value(eq).expect("equilibrium serializes");
    v["stats"] = serde_json::to_value(stats).expect("stats serialize");
    serde_json::to_string_pretty(&v).expect("json")
}

/// Parses an equilibrium document; an embedded `stats` object is ignored.
pub fn parse_equilibrium(text: &str) -> Result<Equilibrium> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("stats");
        obj.remove("support");
    }
    let eq: Equilibrium = serde_json::from_value(v).map_err(|e| Error::Malformed(e.to_string()))?;
    let n = eq.returned.len();
    let m = eq.prices.len();
    if eq.allocation.len() != n || eq.alpha.len() != n || eq.bundle_utility.len() != n {
        return Err(Error::Dimension("per-buyer arrays disagree in length".into()));
    }
    if eq.allocation.iter().any(|row| row.len() != m) {
        return Err(Error::Dimension("allocation rows must have one entry per good".into()));
    }
    Ok(eq)
}

fn random_market<R: Rng>(rng: &mut R, n: usize, m: usize, max_value: i64) -> MarketInstance {
    loop {
        let money = (0..n).map(|_| int(rng.random_range(1..=max_value))).collect();
        let utilities =
            (0..n).map(|_| (0..m).map(|_| int(rng.random_range(0..=max_value))).collect()).collect();
        let inst = MarketInstance::new(money, utilities).expect("dimensions are consistent");
        if validate_instance(&inst).is_valid() {
            return inst;
        }
    }
}

/// Deterministic random instance: integer utilities in `[0, max_value]`,
/// integer money in `[1, max_value]`, resampled until valid.
pub fn generate_random_instance(seed: u64, n: usize, m: usize, max_value: i64) -> MarketInstance {
    assert!(n >= 1 && m >= 1 && max_value >= 1, "need n, m, max_value >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_market(&mut rng, n, m, max_value)
}

/// Like [`generate_random_instance`], plus integer unit costs in `[1, max_value]`.
pub fn generate_random_costs(seed: u64, n: usize, m: usize, max_value: i64) -> (MarketInstance, Vec<Rational>) {
    assert!(n >= 1 && m >= 1 && max_value >= 1, "need n, m, max_value >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_market(&mut rng, n, m, max_value);
    let costs = (0..m).map(|_| int(rng.random_range(1..=max_value))).collect();
    (inst, costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn parses_single_buyer() {
        let inst = parse_instance(r#"{"money":["1"],"utilities":[["2"]]}"#).unwrap();
        assert_eq!(inst.num_buyers(), 1);
        assert_eq!(inst.num_goods(), 1);
        assert_eq!(inst.money[0], int(1));
        assert_eq!(inst.utilities[0][0], int(2));
    }

    #[test]
    fn parses_symmetric_pair() {
        let inst = parse_instance(r#"{"money":["1","1"],"utilities":[["2","1"],["1","2"]]}"#).unwrap();
        assert_eq!(inst, MarketInstance::from_ints(&[1, 1], &[vec![2, 1], vec![1, 2]]).unwrap());
    }

    #[test]
    fn rejects_buyer_without_positive_utility() {
        let err = parse_instance(r#"{"money":["3/2"],"utilities":[["0"]]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("no positive utility"), "{msg}");
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(matches!(parse_instance("[1,2]"), Err(Error::Malformed(_))));
        assert!(matches!(parse_instance(r#"{"money":["1"]}"#), Err(Error::Malformed(_))));
        assert!(matches!(parse_instance(r#"{"money":["x"],"utilities":[["1"]]}"#), Err(Error::BadRational(_))));
        assert!(matches!(
            parse_instance(r#"{"money":["1","2"],"utilities":[["1"]]}"#),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            parse_instance(r#"{"money":["1","2"],"utilities":[["1"],["1","2"]]}"#),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            parse_instance(r#"{"money":["1"],"utilities":[["1"]],"costs":["1","2"]}"#),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn accepts_integer_literals_and_names() {
        let inst =
            parse_instance(r#"{"money":[2],"utilities":[[1, "1/2"]],"names":{"buyers":["bank"],"goods":["a","b"]}}"#)
                .unwrap();
        assert_eq!(inst.utilities[0][1], ratio(1, 2));
        assert_eq!(inst.names.unwrap().goods, vec!["a", "b"]);
    }

    #[test]
    fn validation_reports() {
        let ok = MarketInstance::from_ints(&[1, 1], &[vec![2, 1], vec![1, 2]]).unwrap();
        assert!(validate_instance(&ok).is_valid());

        let undesired = MarketInstance::from_ints(&[1, 1], &[vec![2, 0], vec![1, 0]]).unwrap();
        let report = validate_instance(&undesired);
        assert_eq!(report.violations, vec![Violation::GoodUndesired(1)]);
        assert!(report.violations[0].to_string().contains("good undesired"));

        let broke = MarketInstance::from_ints(&[0], &[vec![1]]).unwrap();
        let report = validate_instance(&broke);
        assert_eq!(report.violations, vec![Violation::NonpositiveMoney(0)]);
        assert!(report.violations[0].to_string().contains("nonpositive money"));

        let everything = MarketInstance::from_ints(&[-1, 2], &[vec![0, 0], vec![-1, 0]]).unwrap();
        assert_eq!(validate_instance(&everything).violations.len(), 6);
    }

    fn sample_equilibrium() -> (Equilibrium, RunStats) {
        let inst = MarketInstance::from_ratios(&[(1, 1)], &[vec![(1, 2)]]).unwrap();
        let eq = Equilibrium::assemble(&inst, vec![ratio(1, 2)], vec![vec![int(1)]], vec![ratio(1, 2)]);
        (eq, RunStats::new(&inst))
    }

    #[test]
    fn serializes_exact_strings() {
        let (eq, stats) = sample_equilibrium();
        let text = serialize_equilibrium(&eq, &stats);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["prices"], serde_json::json!(["1/2"]));
        assert_eq!(v["returned"], serde_json::json!(["1/2"]));
        assert_eq!(v["allocation"], serde_json::json!([["1"]]));
        assert_eq!(v["alpha"], serde_json::json!(["1"]));
        assert!(v["stats"].is_object());
        assert_eq!(parse_equilibrium(&text).unwrap(), eq);
    }

    #[test]
    fn unit_price_document() {
        let inst = MarketInstance::from_ints(&[1], &[vec![2]]).unwrap();
        let eq = Equilibrium::assemble(&inst, vec![int(1)], vec![vec![int(1)]], vec![int(0)]);
        let text = serialize_equilibrium(&eq, &RunStats::new(&inst));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["prices"], serde_json::json!(["1"]));
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let a = generate_random_instance(7, 2, 2, 5);
        let b = generate_random_instance(7, 2, 2, 5);
        assert_eq!(a, b);
        assert!(validate_instance(&a).is_valid());

        let c = generate_random_instance(1, 4, 3, 10);
        assert_eq!(c.num_buyers(), 4);
        assert_eq!(c.num_goods(), 3);
        assert!(c.utilities.iter().flatten().all(|u| *u >= int(0) && *u <= int(10)));
        assert!(c.money.iter().all(|m| *m >= int(1) && *m <= int(10)));
    }

    #[test]
    fn instance_round_trip() {
        let inst = generate_random_instance(3, 3, 2, 9);
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    proptest! {
        #[test]
        fn generated_instances_validate(seed in 0u64..10_000, n in 1usize..6, m in 1usize..6, max in 1i64..12) {
            let inst = generate_random_instance(seed, n, m, max);
            prop_assert!(validate_instance(&inst).is_valid());
        }

        #[test]
        fn validation_matches_assumptions(money in proptest::collection::vec(0i64..3, 1..4),
                                          seed in 0u64..1000) {
            let n = money.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let utilities: Vec<Vec<i64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(0..2)).collect()).collect();
            let inst = MarketInstance::from_ints(&money, &utilities).unwrap();
            let expected = money.iter().all(|&m| m > 0)
                && utilities.iter().all(|row| row.iter().any(|&u| u > 0))
                && (0..3).all(|j| utilities.iter().any(|row| row[j] > 0));
            prop_assert_eq!(validate_instance(&inst).is_valid(), expected);
        }

        #[test]
        fn equilibrium_round_trip(nums in proptest::collection::vec((-50i64..50, 1i64..50), 6)) {
            let r = |k: usize| ratio(nums[k].0, nums[k].1);
            let eq = Equilibrium {
                prices: vec![r(0), r(1)],
                allocation: vec![vec![r(2), r(3)]],
                returned: vec![r(4)],
                alpha: vec![r(5)],
                bundle_utility: vec![r(0)],
            };
            let inst = MarketInstance::from_ints(&[1], &[vec![1, 1]]).unwrap();
            let text = serialize_equilibrium(&eq, &RunStats::new(&inst));
            prop_assert_eq!(parse_equilibrium(&text).unwrap(), eq);
        }
    }
}
