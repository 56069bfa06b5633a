//! Balanced flows: maximum flows whose buyer-surplus vector has least ℓ2 norm.
//!
//! The construction splits the buyers by surplus level. With `F` the value to
//! route and `c` the sink capacities, the common level `λ` solves
//! `Σ min(c_i, λ) = c(B) − F`. If every buyer can be left exactly
//! `min(c_i, λ)` of surplus the part is finished. Otherwise the buyers that
//! must keep more than `λ` form the sink side of the maximal minimum cut in
//! the network with sink capacities `(c_i − λ)^+`; they receive all the money
//! of their neighbourhood, and the two sides are solved independently. Each
//! split separates the buyers, so at most `2n` max-flow calls are made.

use num_traits::{Signed, Zero};

use crate::flow::{max_flow, maximal_min_cut, residual_reach, Flow, FlowNetwork};
use crate::rational::{self, Rational};

/// Left-over capacity of each buyer's sink edge, indexed by local buyer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurplusVector(pub Vec<Rational>);

impl SurplusVector {
    pub fn max(&self) -> Rational {
        rational::max_of(&self.0).unwrap_or_else(Rational::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PotentialValue {
    pub phi: Rational,
}

pub fn surplus(net: &FlowNetwork, f: &Flow) -> SurplusVector {
    SurplusVector(net.sink_caps().iter().zip(&f.sink).map(|(c, x)| c - x).collect())
}

pub fn potential(sv: &SurplusVector) -> PotentialValue {
    PotentialValue { phi: sv.0.iter().fold(Rational::zero(), |acc, g| acc + g * g) }
}

pub fn balanced_flow(net: &FlowNetwork) -> Flow {
    balanced_flow_counted(net).0
}

/// [`balanced_flow`] together with the number of max-flow computations used.
pub fn balanced_flow_counted(net: &FlowNetwork) -> (Flow, u64) {
    let top = max_flow(net);
    let mut calls = 1;
    let mut out = Flow::zero(net);
    let goods: Vec<usize> = (0..net.num_goods()).collect();
    let buyers: Vec<usize> = (0..net.num_buyers()).collect();
    split(net, &goods, &buyers, top.value, &mut out, &mut calls);
    out.value = rational::sum(&out.source);
    debug_assert!(out.is_feasible(net));
    (out, calls)
}

/// Level `λ ≥ 0` with `Σ min(c_i, λ) = deficit`, for `0 ≤ deficit ≤ Σ c_i`.
fn water_level(caps: &[Rational], deficit: &Rational) -> Rational {
    let mut sorted = caps.to_vec();
    sorted.sort();
    let mut below = Rational::zero();
    for (k, c) in sorted.iter().enumerate() {
        let rest = Rational::from_integer(((sorted.len() - k) as i64).into());
        if &below + c * &rest >= *deficit {
            return (deficit - &below) / rest;
        }
        below += c;
    }
    sorted.last().cloned().unwrap_or_else(Rational::zero)
}

/// Solves the part of `root` induced by `goods` and `buyers` (root-local
/// indices), which must be able to route exactly `target`.
fn split(
    root: &FlowNetwork,
    goods: &[usize],
    buyers: &[usize],
    target: Rational,
    out: &mut Flow,
    calls: &mut u64,
) {
    if buyers.is_empty() {
        return;
    }
    let caps: Vec<Rational> = buyers.iter().map(|&b| root.sink_caps()[b].clone()).collect();
    let deficit = rational::sum(&caps) - &target;
    let level = water_level(&caps, &deficit);
    let reduced: Vec<Rational> =
        caps.iter().map(|c| if c > &level { c - &level } else { Rational::zero() }).collect();
    let (part, map) = root.restrict(goods, buyers, Some(reduced));
    debug_assert_eq!(map.len(), part.edges().len());
    let f = max_flow(&part);
    *calls += 1;
    if f.value == target {
        for (k, &g) in goods.iter().enumerate() {
            out.source[g] = f.source[k].clone();
        }
        for (k, &b) in buyers.iter().enumerate() {
            out.sink[b] = f.sink[k].clone();
        }
        for (k, &e) in map.iter().enumerate() {
            out.edges[e] = f.edges[k].clone();
        }
        return;
    }
    let cut = maximal_min_cut(&part, &f).expect("flow returned by max_flow is maximum");
    let high: Vec<usize> = (0..part.num_buyers()).filter(|&b| !cut.contains(part.buyer_vertex(b))).collect();
    assert!(
        !high.is_empty() && high.len() < buyers.len(),
        "surplus split must separate the buyers"
    );
    let high_goods = part.goods_of(&high);
    let high_value = rational::sum(high_goods.iter().map(|&g| &part.source_caps()[g]));
    let low: Vec<usize> = (0..part.num_buyers()).filter(|b| !high.contains(b)).collect();
    let low_goods: Vec<usize> = (0..part.num_goods()).filter(|g| !high_goods.contains(g)).collect();
    let lift = |xs: &[usize], within: &[usize]| xs.iter().map(|&x| within[x]).collect::<Vec<_>>();
    let rest = &target - &high_value;
    split(root, &lift(&high_goods, goods), &lift(&high, buyers), high_value, out, calls);
    split(root, &lift(&low_goods, goods), &lift(&low, buyers), rest, out, calls);
}

/// True iff `f` is a maximum flow and no residual path (avoiding the sink)
/// leads from a buyer to another buyer with strictly larger surplus.
pub fn verify_property1(net: &FlowNetwork, f: &Flow) -> bool {
    if !f.is_feasible(net) || residual_reach(net, f, net.source(), true)[net.sink()] {
        return false;
    }
    let sv = surplus(net, f);
    for b in 0..net.num_buyers() {
        let seen = residual_reach(net, f, net.buyer_vertex(b), false);
        for b2 in 0..net.num_buyers() {
            if seen[net.buyer_vertex(b2)] && sv.0[b2] > sv.0[b] {
                return false;
            }
        }
    }
    true
}

/// Every non-negative entry, for quick sanity checks on surplus vectors.
pub fn is_nonnegative(sv: &SurplusVector) -> bool {
    !sv.0.iter().any(Signed::is_negative)
}
