//! Seeded workloads shared by the criterion benches.

use arctic_core::flow::generate_random_network;
use arctic_core::{generate_random_instance, FlowNetwork, MarketInstance};

/// `count` square instances of size `n` with values in `[0, 10]`.
pub fn market_workload(n: usize, count: u64) -> Vec<MarketInstance> {
    (0..count).map(|seed| generate_random_instance(seed, n, n, 10)).collect()
}

/// Random money networks with up to `buyers` buyers and `goods` goods.
pub fn network_workload(buyers: usize, goods: usize, count: u64) -> Vec<FlowNetwork> {
    (0..count).map(|seed| generate_random_network(seed, buyers, goods, 10)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_are_deterministic() {
        assert_eq!(market_workload(3, 4), market_workload(3, 4));
        assert_eq!(network_workload(5, 4, 3).len(), 3);
    }
}
