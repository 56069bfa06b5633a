//! Events that stop the price rise, and the closed-form `θ` at which each fires.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::market::MarketInstance;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// An active buyer's bang per buck reached 1.
    MoneyReturn { buyer: usize },
    /// A zero-degree buyer's bang per buck reached 1.
    ZRemoval { buyer: usize },
    /// The listed active goods are worth exactly the money of their buyers.
    TightSet { goods: Vec<usize> },
    /// A zero-degree buyer found a best good outside the active goods.
    ZNewEdge { buyer: usize, good: usize },
    /// An active buyer found a best good outside the active goods.
    NewEdge { buyer: usize, good: usize },
}

impl EventKind {
    /// Rank among events firing at the same `θ`; lower goes first.
    pub fn priority(&self) -> u8 {
        match self {
            EventKind::MoneyReturn { .. } => 0,
            EventKind::ZRemoval { .. } => 1,
            EventKind::TightSet { .. } => 2,
            EventKind::ZNewEdge { .. } => 3,
            EventKind::NewEdge { .. } => 4,
        }
    }

    fn tie_key(&self) -> (usize, usize) {
        match self {
            EventKind::MoneyReturn { buyer } | EventKind::ZRemoval { buyer } => (*buyer, 0),
            EventKind::TightSet { goods } => (goods.first().copied().unwrap_or(0), 0),
            EventKind::ZNewEdge { buyer, good } | EventKind::NewEdge { buyer, good } => (*buyer, *good),
        }
    }

    pub fn ends_phase(&self) -> bool {
        matches!(self, EventKind::MoneyReturn { .. } | EventKind::TightSet { .. })
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::MoneyReturn { buyer } => write!(f, "money_return:b{buyer}"),
            EventKind::ZRemoval { buyer } => write!(f, "z_removal:b{buyer}"),
            EventKind::TightSet { goods } => {
                let names: Vec<String> = goods.iter().map(|g| format!("g{g}")).collect();
                write!(f, "tight_set:{}", names.join("|"))
            }
            EventKind::ZNewEdge { buyer, good } => write!(f, "z_new_edge:b{buyer}:g{good}"),
            EventKind::NewEdge { buyer, good } => write!(f, "new_edge:b{buyer}:g{good}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub kind: EventKind,
    pub theta: Rational,
}

impl Event {
    /// Firing order: smaller `θ`, then kind priority, then lowest index.
    pub fn order(&self, other: &Self) -> Ordering {
        self.theta
            .cmp(&other.theta)
            .then(self.kind.priority().cmp(&other.kind.priority()))
            .then(self.kind.tie_key().cmp(&other.kind.tie_key()))
    }
}

/// Bang per buck of `buyer` and every good attaining it.
pub fn mbpb(inst: &MarketInstance, prices: &[Rational], buyer: usize) -> (Rational, Vec<usize>) {
    let mut best = Rational::zero();
    let mut goods = Vec::new();
    for (j, (u, p)) in inst.utilities[buyer].iter().zip(prices).enumerate() {
        if !u.is_positive() || !p.is_positive() {
            continue;
        }
        let r = u / p;
        match r.cmp(&best) {
            Ordering::Greater => {
                best = r;
                goods = vec![j];
            }
            Ordering::Equal => goods.push(j),
            Ordering::Less => {}
        }
    }
    (best, goods)
}

/// `θ` at which a buyer whose best goods all scale by `θ` reaches bang per
/// buck 1; `alpha_base` is its bang per buck at `θ = 1`.
pub fn money_return_theta(alpha_base: &Rational) -> Rational {
    alpha_base.clone()
}

/// `θ` at which a fixed-price good `j` with price `p_j` catches up with a
/// buyer whose bang per buck is `alpha_base / θ`.
pub fn new_edge_theta(alpha_base: &Rational, price: &Rational, utility: &Rational) -> Rational {
    alpha_base * price / utility
}

/// `θ` at which a goods set whose base prices sum to `base_worth` becomes
/// worth `buyers_worth`.
pub fn tight_set_theta(buyers_worth: &Rational, base_worth: &Rational) -> Rational {
    buyers_worth / base_worth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn mbpb_examples() {
        let inst = MarketInstance::from_ints(&[1], &[vec![2, 1]]).unwrap();
        assert_eq!(mbpb(&inst, &[int(1), int(1)], 0), (int(2), vec![0]));
        let inst = MarketInstance::from_ints(&[1], &[vec![2, 2]]).unwrap();
        assert_eq!(mbpb(&inst, &[int(1), int(2)], 0), (int(2), vec![0]));
        let inst = MarketInstance::from_ints(&[1], &[vec![2, 4]]).unwrap();
        assert_eq!(mbpb(&inst, &[int(1), int(2)], 0), (int(2), vec![0, 1]));
    }

    #[test]
    fn threshold_examples() {
        // u_ik = 2 at base price 1, candidate good with u_ij = 1, p_j = 1
        let alpha = int(2) / int(1);
        let theta = new_edge_theta(&alpha, &int(1), &int(1));
        assert_eq!(theta, int(2));
        assert_eq!(&alpha / &theta, int(1) / int(1));
        assert_eq!(money_return_theta(&(int(3) / int(1))), int(3));
        assert_eq!(tight_set_theta(&int(3), &int(2)), ratio(3, 2));
    }

    #[test]
    fn ordering_prefers_priority_then_index() {
        let e = |kind, t: i64| Event { kind, theta: int(t) };
        let mut events = vec![
            e(EventKind::NewEdge { buyer: 0, good: 1 }, 2),
            e(EventKind::TightSet { goods: vec![0] }, 2),
            e(EventKind::MoneyReturn { buyer: 3 }, 2),
            e(EventKind::MoneyReturn { buyer: 1 }, 2),
            e(EventKind::ZNewEdge { buyer: 0, good: 0 }, 1),
        ];
        events.sort_by(|a, b| a.order(b));
        assert_eq!(events[0].kind, EventKind::ZNewEdge { buyer: 0, good: 0 });
        assert_eq!(events[1].kind, EventKind::MoneyReturn { buyer: 1 });
        assert_eq!(events[2].kind, EventKind::MoneyReturn { buyer: 3 });
        assert_eq!(events[3].kind, EventKind::TightSet { goods: vec![0] });
    }
}
