//! The money network: source → goods (price), goods → buyers (unbounded, one
//! per maximum-bang-per-buck pair), buyers → sink (left-over money).
//!
//! Vertices are numbered `s = 0`, goods `1..=g`, buyers `g+1..=g+b`, and the
//! sink last. Goods and buyers inside a network are addressed by their local
//! position; [`FlowNetwork::goods`] and [`FlowNetwork::buyers`] map those back
//! to instance indices.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::market::{bang_per_buck, MarketInstance};
use crate::rational::{self, ratio, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowNetwork {
    goods: Vec<usize>,
    buyers: Vec<usize>,
    source_caps: Vec<Rational>,
    sink_caps: Vec<Rational>,
    /// `(local good, local buyer)`, sorted and free of duplicates.
    edges: Vec<(usize, usize)>,
}

impl FlowNetwork {
    pub fn new(
        goods: Vec<usize>,
        buyers: Vec<usize>,
        source_caps: Vec<Rational>,
        sink_caps: Vec<Rational>,
        mut edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if goods.len() != source_caps.len() || buyers.len() != sink_caps.len() {
            return Err(Error::Dimension("capacity vectors do not match vertex sets".into()));
        }
        if source_caps.iter().chain(&sink_caps).any(Signed::is_negative) {
            return Err(Error::Precondition("negative capacity".into()));
        }
        if edges.iter().any(|&(g, b)| g >= goods.len() || b >= buyers.len()) {
            return Err(Error::Dimension("edge endpoint out of range".into()));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self { goods, buyers, source_caps, sink_caps, edges })
    }

    pub fn goods(&self) -> &[usize] {
        &self.goods
    }
    pub fn buyers(&self) -> &[usize] {
        &self.buyers
    }
    pub fn source_caps(&self) -> &[Rational] {
        &self.source_caps
    }
    pub fn sink_caps(&self) -> &[Rational] {
        &self.sink_caps
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn num_goods(&self) -> usize {
        self.goods.len()
    }
    pub fn num_buyers(&self) -> usize {
        self.buyers.len()
    }

    pub fn source(&self) -> usize {
        0
    }
    pub fn sink(&self) -> usize {
        self.goods.len() + self.buyers.len() + 1
    }
    pub fn num_vertices(&self) -> usize {
        self.goods.len() + self.buyers.len() + 2
    }
    pub fn good_vertex(&self, g: usize) -> usize {
        1 + g
    }
    pub fn buyer_vertex(&self, b: usize) -> usize {
        1 + self.goods.len() + b
    }

    pub fn local_buyer(&self, id: usize) -> Option<usize> {
        self.buyers.iter().position(|&b| b == id)
    }
    pub fn local_good(&self, id: usize) -> Option<usize> {
        self.goods.iter().position(|&g| g == id)
    }

    pub fn has_edge(&self, g: usize, b: usize) -> bool {
        self.edges.binary_search(&(g, b)).is_ok()
    }

    pub fn total_source_capacity(&self) -> Rational {
        rational::sum(&self.source_caps)
    }
    pub fn total_sink_capacity(&self) -> Rational {
        rational::sum(&self.sink_caps)
    }

    /// Local goods adjacent to any of the given local buyers.
    pub fn goods_of(&self, buyers: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.edges.iter().filter(|(_, b)| buyers.contains(b)).map(|&(g, _)| g).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Local buyers adjacent to any of the given local goods.
    pub fn buyers_of(&self, goods: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.edges.iter().filter(|(g, _)| goods.contains(g)).map(|&(_, b)| b).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn buyer_degree(&self, b: usize) -> usize {
        self.edges.iter().filter(|e| e.1 == b).count()
    }
    pub fn good_degree(&self, g: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == g).count()
    }

    /// Same network with the given edges removed.
    pub fn without_edges(&self, drop: impl Fn(usize, usize) -> bool) -> Self {
        let mut out = self.clone();
        out.edges.retain(|&(g, b)| !drop(g, b));
        out
    }

    pub fn with_sink_caps(&self, sink_caps: Vec<Rational>) -> Result<Self> {
        Self::new(self.goods.clone(), self.buyers.clone(), self.source_caps.clone(), sink_caps, self.edges.clone())
    }

    pub fn with_source_caps(&self, source_caps: Vec<Rational>) -> Result<Self> {
        Self::new(self.goods.clone(), self.buyers.clone(), source_caps, self.sink_caps.clone(), self.edges.clone())
    }

    /// Sub-network induced by the given local goods and buyers, optionally
    /// with replacement sink capacities (indexed like `buyers`). Also returns,
    /// for every sub-network edge, the index of the parent edge.
    pub fn restrict(
        &self,
        goods: &[usize],
        buyers: &[usize],
        sink_caps: Option<Vec<Rational>>,
    ) -> (Self, Vec<usize>) {
        let gpos = |g: usize| goods.iter().position(|&x| x == g);
        let bpos = |b: usize| buyers.iter().position(|&x| x == b);
        let mut edges = Vec::new();
        let mut parent = Vec::new();
        for (k, &(g, b)) in self.edges.iter().enumerate() {
            if let (Some(gl), Some(bl)) = (gpos(g), bpos(b)) {
                edges.push((gl, bl));
                parent.push(k);
            }
        }
        // Parent edges are sorted by (good, buyer) and subsets are taken in
        // increasing order, so `edges` is already sorted when both index
        // lists are increasing; sort defensively and keep the map aligned.
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by_key(|&k| edges[k]);
        let edges: Vec<_> = order.iter().map(|&k| edges[k]).collect();
        let parent: Vec<_> = order.iter().map(|&k| parent[k]).collect();
        let sub = Self {
            goods: goods.iter().map(|&g| self.goods[g]).collect(),
            buyers: buyers.iter().map(|&b| self.buyers[b]).collect(),
            source_caps: goods.iter().map(|&g| self.source_caps[g].clone()).collect(),
            sink_caps: sink_caps.unwrap_or_else(|| buyers.iter().map(|&b| self.sink_caps[b].clone()).collect()),
            edges,
        };
        (sub, parent)
    }

    /// Line-oriented dump: `tail head capacity flow`, one edge per line.
    pub fn dump(&self, flow: Option<&Flow>) -> String {
        let zero = Rational::zero();
        let mut out = String::new();
        for (g, cap) in self.source_caps.iter().enumerate() {
            let f = flow.map_or(&zero, |f| &f.source[g]);
            let _ = writeln!(out, "s g{} {} {}", self.goods[g], cap, f);
        }
        for (k, &(g, b)) in self.edges.iter().enumerate() {
            let f = flow.map_or(&zero, |f| &f.edges[k]);
            let _ = writeln!(out, "g{} b{} inf {}", self.goods[g], self.buyers[b], f);
        }
        for (b, cap) in self.sink_caps.iter().enumerate() {
            let f = flow.map_or(&zero, |f| &f.sink[b]);
            let _ = writeln!(out, "b{} t {} {}", self.buyers[b], cap, f);
        }
        out
    }
}

/// Flow values on every edge of a specific network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flow {
    /// `f(s, j)` per local good.
    pub source: Vec<Rational>,
    /// Flow per network edge, aligned with [`FlowNetwork::edges`].
    pub edges: Vec<Rational>,
    /// `f(i, t)` per local buyer.
    pub sink: Vec<Rational>,
    pub value: Rational,
}

impl Flow {
    pub fn zero(net: &FlowNetwork) -> Self {
        Self {
            source: vec![Rational::zero(); net.num_goods()],
            edges: vec![Rational::zero(); net.edges.len()],
            sink: vec![Rational::zero(); net.num_buyers()],
            value: Rational::zero(),
        }
    }

    /// Checks capacities, nonnegativity and conservation exactly.
    pub fn is_feasible(&self, net: &FlowNetwork) -> bool {
        if self.source.len() != net.num_goods()
            || self.edges.len() != net.edges.len()
            || self.sink.len() != net.num_buyers()
        {
            return false;
        }
        let all = self.source.iter().chain(&self.edges).chain(&self.sink);
        if all.clone().any(Signed::is_negative) {
            return false;
        }
        if self.source.iter().zip(&net.source_caps).any(|(f, c)| f > c)
            || self.sink.iter().zip(&net.sink_caps).any(|(f, c)| f > c)
        {
            return false;
        }
        let mut good_out = vec![Rational::zero(); net.num_goods()];
        let mut buyer_in = vec![Rational::zero(); net.num_buyers()];
        for (k, &(g, b)) in net.edges.iter().enumerate() {
            good_out[g] += &self.edges[k];
            buyer_in[b] += &self.edges[k];
        }
        good_out == self.source && buyer_in == self.sink && self.value == rational::sum(&self.source)
    }

    fn recompute_value(&mut self) {
        self.value = rational::sum(&self.source);
    }
}

/// An `s`–`t` cut given by its source side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    /// Vertex ids on the source side, increasing; always contains `s`.
    pub source_side: Vec<usize>,
    pub capacity: Rational,
}

impl Cut {
    pub fn contains(&self, v: usize) -> bool {
        self.source_side.binary_search(&v).is_ok()
    }

    /// Local goods on the source side.
    pub fn goods(&self, net: &FlowNetwork) -> Vec<usize> {
        (0..net.num_goods()).filter(|&g| self.contains(net.good_vertex(g))).collect()
    }

    /// Local buyers on the source side.
    pub fn buyers(&self, net: &FlowNetwork) -> Vec<usize> {
        (0..net.num_buyers()).filter(|&b| self.contains(net.buyer_vertex(b))).collect()
    }
}

/// Capacity of the cut with the given source side (membership per vertex), or
/// `None` if an unbounded edge crosses it.
pub fn cut_capacity(net: &FlowNetwork, source_side: &[bool]) -> Option<Rational> {
    let t = net.sink();
    if !source_side[0] || source_side[t] {
        return None;
    }
    let mut cap = Rational::zero();
    for g in 0..net.num_goods() {
        if !source_side[net.good_vertex(g)] {
            cap += &net.source_caps[g];
        }
    }
    for &(g, b) in &net.edges {
        if source_side[net.good_vertex(g)] && !source_side[net.buyer_vertex(b)] {
            return None;
        }
    }
    for b in 0..net.num_buyers() {
        if source_side[net.buyer_vertex(b)] {
            cap += &net.sink_caps[b];
        }
    }
    Some(cap)
}

fn make_cut(net: &FlowNetwork, side: Vec<bool>) -> Result<Cut> {
    let capacity = cut_capacity(net, &side).ok_or_else(|| Error::Contract("cut crosses an unbounded edge".into()))?;
    let source_side = side.iter().enumerate().filter(|(_, &x)| x).map(|(v, _)| v).collect();
    Ok(Cut { source_side, capacity })
}

/// Residual arcs as `(tail, head)` pairs. The sink is left out when
/// `with_sink` is false: buyer-to-buyer reachability must not pass through it.
fn residual_arcs(net: &FlowNetwork, f: &Flow, with_sink: bool) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); net.num_vertices()];
    let (s, t) = (net.source(), net.sink());
    for g in 0..net.num_goods() {
        let v = net.good_vertex(g);
        if f.source[g] < net.source_caps[g] {
            adj[s].push(v);
        }
        if f.source[g].is_positive() {
            adj[v].push(s);
        }
    }
    for (k, &(g, b)) in net.edges.iter().enumerate() {
        let (gv, bv) = (net.good_vertex(g), net.buyer_vertex(b));
        adj[gv].push(bv);
        if f.edges[k].is_positive() {
            adj[bv].push(gv);
        }
    }
    if with_sink {
        for b in 0..net.num_buyers() {
            let v = net.buyer_vertex(b);
            if f.sink[b] < net.sink_caps[b] {
                adj[v].push(t);
            }
            if f.sink[b].is_positive() {
                adj[t].push(v);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn reverse(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (u, list) in adj.iter().enumerate() {
        for &v in list {
            rev[v].push(u);
        }
    }
    rev
}

fn reach(adj: &[Vec<usize>], starts: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for v in starts {
        if !seen[v] {
            seen[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Vertices reachable from `start` in the residual graph.
pub fn residual_reach(net: &FlowNetwork, f: &Flow, start: usize, with_sink: bool) -> Vec<bool> {
    reach(&residual_arcs(net, f, with_sink), [start])
}

struct Arc {
    to: usize,
    /// `None` is unbounded.
    cap: Option<Rational>,
    flow: Rational,
}

impl Arc {
    fn residual(&self) -> Option<Rational> {
        self.cap.as_ref().map(|c| c - &self.flow)
    }
    fn has_residual(&self) -> bool {
        self.cap.as_ref().is_none_or(|c| &self.flow < c)
    }
}

/// Exact maximum flow by shortest augmenting paths. Breadth-first search
/// scans neighbours in increasing vertex order, so the result is fully
/// determined by the network.
pub fn max_flow(net: &FlowNetwork) -> Flow {
    let n = net.num_vertices();
    let (s, t) = (net.source(), net.sink());
    let mut arcs: Vec<Arc> = Vec::with_capacity(2 * (net.num_goods() + net.edges.len() + net.num_buyers()));
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut add = |arcs: &mut Vec<Arc>, u: usize, v: usize, cap: Option<Rational>| {
        adj[u].push(arcs.len());
        arcs.push(Arc { to: v, cap, flow: Rational::zero() });
        adj[v].push(arcs.len());
        arcs.push(Arc { to: u, cap: Some(Rational::zero()), flow: Rational::zero() });
    };
    for g in 0..net.num_goods() {
        add(&mut arcs, s, net.good_vertex(g), Some(net.source_caps[g].clone()));
    }
    for &(g, b) in &net.edges {
        add(&mut arcs, net.good_vertex(g), net.buyer_vertex(b), None);
    }
    for b in 0..net.num_buyers() {
        add(&mut arcs, net.buyer_vertex(b), t, Some(net.sink_caps[b].clone()));
    }
    for list in &mut adj {
        list.sort_by_key(|&a| (arcs[a].to, a));
    }

    loop {
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(u) = queue.pop_front() {
            for &a in &adj[u] {
                let v = arcs[a].to;
                if !seen[v] && arcs[a].has_residual() {
                    seen[v] = true;
                    parent[v] = Some(a);
                    if v == t {
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            break;
        }
        let mut path = Vec::new();
        let mut v = t;
        while let Some(a) = parent[v] {
            path.push(a);
            v = arcs[a ^ 1].to;
        }
        let delta = path
            .iter()
            .filter_map(|&a| arcs[a].residual())
            .min()
            .expect("every s-t path has a bounded source arc");
        for &a in &path {
            arcs[a].flow += &delta;
            arcs[a ^ 1].flow -= &delta;
        }
    }

    let mut flow = Flow::zero(net);
    let mut k = 0;
    for g in 0..net.num_goods() {
        flow.source[g] = arcs[k].flow.clone();
        k += 2;
    }
    for e in 0..net.edges.len() {
        flow.edges[e] = arcs[k].flow.clone();
        k += 2;
    }
    for b in 0..net.num_buyers() {
        flow.sink[b] = arcs[k].flow.clone();
        k += 2;
    }
    flow.recompute_value();
    flow
}

/// The min cut closest to the source: everything reachable from `s` in the
/// residual graph.
pub fn min_cut_source_side(net: &FlowNetwork, f: &Flow) -> Result<Cut> {
    let side = residual_reach(net, f, net.source(), true);
    if side[net.sink()] {
        return Err(Error::FlowNotMaximum);
    }
    make_cut(net, side)
}

/// The min cut closest to the sink: every vertex that cannot reach `t` in
/// the residual graph is on the source side.
pub fn maximal_min_cut(net: &FlowNetwork, f: &Flow) -> Result<Cut> {
    let rev = reverse(&residual_arcs(net, f, true));
    let reaches_t = reach(&rev, [net.sink()]);
    if reaches_t[net.source()] {
        return Err(Error::FlowNotMaximum);
    }
    make_cut(net, reaches_t.iter().map(|&x| !x).collect())
}

/// Local buyers outside `targets` with a residual path into `targets`. The
/// sink is excluded from the residual graph; the source is not.
pub fn residual_reachable(net: &FlowNetwork, f: &Flow, targets: &[usize]) -> Vec<usize> {
    let rev = reverse(&residual_arcs(net, f, false));
    let hits = reach(&rev, targets.iter().map(|&b| net.buyer_vertex(b)));
    (0..net.num_buyers()).filter(|b| !targets.contains(b) && hits[net.buyer_vertex(*b)]).collect()
}

/// Whether `({s}, rest)` is a minimum cut, i.e. every source edge can be
/// saturated.
pub fn check_invariant(net: &FlowNetwork) -> bool {
    max_flow(net).value == net.total_source_capacity()
}

/// Network of all buyers at the given prices; see [`build_network_for`].
pub fn build_network(
    inst: &MarketInstance,
    prices: &[Rational],
    returns: &[Rational],
    alphas: &[Rational],
) -> Result<FlowNetwork> {
    let buyers: Vec<usize> = (0..inst.num_buyers()).collect();
    build_network_for(inst, prices, returns, alphas, &buyers)
}

/// Money network over the listed buyers and every good: source edges carry
/// prices, sink edges left-over money, and `(j, i)` is present exactly when
/// `u_ij > 0` and `u_ij / p_j = alpha_i`.
pub fn build_network_for(
    inst: &MarketInstance,
    prices: &[Rational],
    returns: &[Rational],
    alphas: &[Rational],
    buyers: &[usize],
) -> Result<FlowNetwork> {
    let (n, m) = (inst.num_buyers(), inst.num_goods());
    if prices.len() != m || returns.len() != n || alphas.len() != n {
        return Err(Error::Dimension("prices, returns or alphas have the wrong length".into()));
    }
    if let Some(j) = prices.iter().position(|p| !p.is_positive()) {
        return Err(Error::NonpositivePrice(j));
    }
    for &i in buyers {
        if returns[i].is_negative() || returns[i] > inst.money[i] {
            return Err(Error::Precondition(format!("returned money of buyer {i} outside [0, m_i]")));
        }
    }
    let mut edges = Vec::new();
    for (b, &i) in buyers.iter().enumerate() {
        for j in 0..m {
            let u = &inst.utilities[i][j];
            if u.is_positive() && u / &prices[j] == alphas[i] {
                edges.push((j, b));
            }
        }
    }
    FlowNetwork::new(
        (0..m).collect(),
        buyers.to_vec(),
        prices.to_vec(),
        buyers.iter().map(|&i| &inst.money[i] - &returns[i]).collect(),
        edges,
    )
}

/// [`build_network_for`] with alphas computed from the prices.
pub fn network_at(
    inst: &MarketInstance,
    prices: &[Rational],
    returns: &[Rational],
    buyers: &[usize],
) -> Result<FlowNetwork> {
    if let Some(j) = prices.iter().position(|p| !p.is_positive()) {
        return Err(Error::NonpositivePrice(j));
    }
    let alphas: Vec<Rational> = (0..inst.num_buyers()).map(|i| bang_per_buck(inst, prices, i)).collect();
    build_network_for(inst, prices, returns, &alphas, buyers)
}

/// Deterministic random network with rational capacities: up to
/// `max_buyers` buyers, up to `max_goods` goods, prices in `(0, max_value]`,
/// sink capacities in `[0, max_value]`, each edge present with probability 1/2.
pub fn generate_random_network(seed: u64, max_buyers: usize, max_goods: usize, max_value: i64) -> FlowNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.random_range(1..=max_buyers);
    let ng = rng.random_range(1..=max_goods);
    let frac = |rng: &mut ChaCha8Rng, lo: i64| {
        let d = rng.random_range(1..=3);
        ratio(rng.random_range(lo * d..=max_value * d), d)
    };
    let prices: Vec<Rational> = (0..ng).map(|_| frac(&mut rng, 0).max(ratio(1, 3))).collect();
    let sinks: Vec<Rational> = (0..nb).map(|_| frac(&mut rng, 0)).collect();
    let mut edges = Vec::new();
    for g in 0..ng {
        for b in 0..nb {
            if rng.random_bool(0.5) {
                edges.push((g, b));
            }
        }
    }
    FlowNetwork::new((0..ng).collect(), (0..nb).collect(), prices, sinks, edges).expect("consistent by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn net(prices: &[i64], sinks: &[i64], edges: &[(usize, usize)]) -> FlowNetwork {
        FlowNetwork::new(
            (0..prices.len()).collect(),
            (0..sinks.len()).collect(),
            prices.iter().map(|&p| int(p)).collect(),
            sinks.iter().map(|&c| int(c)).collect(),
            edges.to_vec(),
        )
        .unwrap()
    }

    fn alphas(inst: &MarketInstance, p: &[Rational]) -> Vec<Rational> {
        (0..inst.num_buyers()).map(|i| bang_per_buck(inst, p, i)).collect()
    }

    #[test]
    fn builds_single_pair() {
        let inst = MarketInstance::from_ints(&[1], &[vec![2]]).unwrap();
        let p = vec![int(1)];
        let n = build_network(&inst, &p, &[int(0)], &alphas(&inst, &p)).unwrap();
        assert_eq!(n.edges(), &[(0, 0)]);
        assert_eq!(n.source_caps(), &[int(1)]);
        assert_eq!(n.sink_caps(), &[int(1)]);
    }

    #[test]
    fn builds_strict_maxima_only() {
        let inst = MarketInstance::from_ints(&[1, 1], &[vec![2, 1], vec![1, 2]]).unwrap();
        let p = vec![int(1), int(1)];
        let n = build_network(&inst, &p, &[int(0), int(0)], &alphas(&inst, &p)).unwrap();
        assert_eq!(n.edges(), &[(0, 0), (1, 1)]);
    }

    #[test]
    fn builds_ties() {
        let inst = MarketInstance::from_ints(&[1], &[vec![2, 2]]).unwrap();
        let p = vec![int(1), int(1)];
        let n = build_network(&inst, &p, &[int(0)], &alphas(&inst, &p)).unwrap();
        assert_eq!(n.edges(), &[(0, 0), (1, 0)]);
    }

    #[test]
    fn rejects_nonpositive_price() {
        let inst = MarketInstance::from_ints(&[1], &[vec![2, 2]]).unwrap();
        let p = vec![int(1), int(0)];
        let a = vec![int(2)];
        assert!(matches!(build_network(&inst, &p, &[int(0)], &a), Err(Error::NonpositivePrice(1))));
    }

    #[test]
    fn zero_utility_never_an_edge() {
        // alpha is positive, so a zero-utility good can never attain it
        let inst = MarketInstance::from_ints(&[1], &[vec![1, 0]]).unwrap();
        let p = vec![int(1), int(1)];
        let n = build_network(&inst, &p, &[int(0)], &alphas(&inst, &p)).unwrap();
        assert_eq!(n.edges(), &[(0, 0)]);
    }

    #[test]
    fn max_flow_examples() {
        assert_eq!(max_flow(&net(&[1], &[1], &[(0, 0)])).value, int(1));
        assert_eq!(max_flow(&net(&[2], &[1], &[(0, 0)])).value, int(1));
        let f = max_flow(&net(&[1], &[1, 1], &[(0, 0)]));
        assert_eq!(f.sink[1], int(0));
        assert_eq!(f.value, int(1));
    }

    #[test]
    fn min_cut_examples() {
        let s = 0;
        // (b,t) saturated, (s,g) slack
        let n1 = net(&[2], &[1], &[(0, 0)]);
        let f1 = max_flow(&n1);
        assert_eq!(min_cut_source_side(&n1, &f1).unwrap().source_side, vec![s, 1, 2]);
        // (s,g) saturated, (b,t) slack
        let n2 = net(&[1], &[2], &[(0, 0)]);
        let f2 = max_flow(&n2);
        assert_eq!(min_cut_source_side(&n2, &f2).unwrap().source_side, vec![s]);
        // both saturated: reachability stops at s
        let n3 = net(&[1], &[1], &[(0, 0)]);
        let f3 = max_flow(&n3);
        let c3 = min_cut_source_side(&n3, &f3).unwrap();
        assert_eq!(c3.source_side, vec![s]);
        assert_eq!(c3.capacity, int(1));
        // ...while the maximal one goes all the way to the sink
        assert_eq!(maximal_min_cut(&n3, &f3).unwrap().source_side, vec![s, 1, 2]);
    }

    #[test]
    fn maximal_cut_examples() {
        let n1 = net(&[2], &[1], &[(0, 0)]);
        let f1 = max_flow(&n1);
        let c = maximal_min_cut(&n1, &f1).unwrap();
        assert_eq!(c.source_side, vec![0, 1, 2]);
        assert_eq!(c.goods(&n1), vec![0]);
        assert_eq!(c.buyers(&n1), vec![0]);

        let n2 = net(&[1, 1], &[5, 5], &[(0, 0), (1, 1)]);
        let c2 = maximal_min_cut(&n2, &max_flow(&n2)).unwrap();
        assert_eq!(c2.source_side, vec![0]);

        // pair (g0,b0) is tight, pair (g1,b1) has slack money
        let n3 = net(&[2, 1], &[2, 5], &[(0, 0), (1, 1)]);
        let c3 = maximal_min_cut(&n3, &max_flow(&n3)).unwrap();
        assert_eq!(c3.goods(&n3), vec![0]);
        assert_eq!(c3.buyers(&n3), vec![0]);
        assert_eq!(c3.capacity, int(3));
    }

    #[test]
    fn cuts_reject_non_maximum_flow() {
        let n = net(&[1], &[1], &[(0, 0)]);
        let f = Flow::zero(&n);
        assert_eq!(min_cut_source_side(&n, &f), Err(Error::FlowNotMaximum));
        assert_eq!(maximal_min_cut(&n, &f), Err(Error::FlowNotMaximum));
    }

    #[test]
    fn residual_reachable_examples() {
        // decoupled groups
        let n1 = net(&[1, 1], &[2, 2], &[(0, 0), (1, 1)]);
        assert!(residual_reachable(&n1, &max_flow(&n1), &[0]).is_empty());
        // b1 is fed by the good that also feeds b0, which has slack: b1 -> g -> b0
        let n2 = net(&[2], &[2, 2], &[(0, 0), (0, 1)]);
        let mut f = Flow::zero(&n2);
        f.source = vec![int(2)];
        f.edges = vec![int(1), int(1)];
        f.sink = vec![int(1), int(1)];
        f.recompute_value();
        assert!(f.is_feasible(&n2));
        assert_eq!(residual_reachable(&n2, &f, &[0]), vec![1]);
        assert!(residual_reachable(&n2, &f, &[0, 1]).is_empty());
    }

    #[test]
    fn invariant_examples() {
        let inst = MarketInstance::from_ints(&[4, 4], &[vec![1, 1], vec![1, 1]]).unwrap();
        let tiny = vec![int(1), int(1)];
        let n = network_at(&inst, &tiny, &[int(0), int(0)], &[0, 1]).unwrap();
        assert!(check_invariant(&n));
        let big = vec![int(9), int(9)];
        let n = network_at(&inst, &big, &[int(0), int(0)], &[0, 1]).unwrap();
        assert!(!check_invariant(&n));
        assert!(check_invariant(&net(&[1], &[1], &[(0, 0)])));
    }

    #[test]
    fn dump_lists_every_edge() {
        let n = net(&[2], &[1], &[(0, 0)]);
        let f = max_flow(&n);
        assert_eq!(n.dump(Some(&f)), "s g0 2 1\ng0 b0 inf 1\nb0 t 1 1\n");
    }

    fn brute_min_cuts(n: &FlowNetwork) -> (Rational, Vec<Vec<bool>>) {
        let v = n.num_vertices();
        let mut best: Option<Rational> = None;
        let mut sides = Vec::new();
        for mask in 0u32..(1 << (v - 2)) {
            let mut side = vec![false; v];
            side[0] = true;
            for k in 0..v - 2 {
                side[k + 1] = mask >> k & 1 == 1;
            }
            if let Some(c) = cut_capacity(n, &side) {
                match &best {
                    Some(b) if &c > b => {}
                    Some(b) if &c == b => sides.push(side),
                    _ => {
                        best = Some(c);
                        sides = vec![side];
                    }
                }
            }
        }
        (best.unwrap(), sides)
    }

    proptest! {
        #[test]
        fn duality_and_cut_order(seed in 0u64..5000) {
            let n = generate_random_network(seed, 6, 5, 6);
            let f = max_flow(&n);
            prop_assert!(f.is_feasible(&n));
            let lo = min_cut_source_side(&n, &f).unwrap();
            let hi = maximal_min_cut(&n, &f).unwrap();
            prop_assert_eq!(&lo.capacity, &f.value);
            prop_assert_eq!(&hi.capacity, &f.value);
            prop_assert!(lo.source_side.iter().all(|v| hi.contains(*v)));
        }

        #[test]
        fn cuts_match_brute_force(seed in 0u64..5000) {
            // at most 6 vertices in total
            let n = generate_random_network(seed, 2, 2, 5);
            let f = max_flow(&n);
            let (best, sides) = brute_min_cuts(&n);
            prop_assert_eq!(&best, &f.value);
            let lo = min_cut_source_side(&n, &f).unwrap();
            let hi = maximal_min_cut(&n, &f).unwrap();
            let size = |s: &Vec<bool>| s.iter().filter(|x| **x).count();
            let smallest = sides.iter().min_by_key(|s| size(s)).unwrap();
            let largest = sides.iter().max_by_key(|s| size(s)).unwrap();
            prop_assert_eq!(lo.source_side.len(), size(smallest));
            prop_assert_eq!(hi.source_side.len(), size(largest));
            // every minimum cut lies between the two
            for s in &sides {
                for v in &lo.source_side { prop_assert!(s[*v]); }
                for (v, &inside) in s.iter().enumerate() { if inside { prop_assert!(hi.contains(v)); } }
            }
            prop_assert_eq!(lo == hi, sides.len() == 1);
        }

        #[test]
        fn max_flow_is_deterministic(seed in 0u64..1000) {
            let n = generate_random_network(seed, 8, 6, 9);
            prop_assert_eq!(max_flow(&n), max_flow(&n));
        }
    }
}
