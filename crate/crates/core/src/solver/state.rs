//! The solver state machine: phases made of iterations, each iteration
//! raising the prices of the active goods by a common factor `θ` until the
//! first event.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use super::events::{mbpb, money_return_theta, new_edge_theta, tight_set_theta, Event, EventKind};
use super::trace::{price_hash, IterationSurplus, Snapshot, Trace, TraceRow};
use super::SolverOptions;
use crate::balanced::{balanced_flow_counted, potential, surplus};
use crate::error::{Error, Result};
use crate::flow::{cut_capacity, max_flow, maximal_min_cut, min_cut_source_side, residual_reachable, Flow, FlowNetwork};
use crate::market::{
    bang_per_buck, validate_instance, Equilibrium, MarketInstance, PhaseType, PotentialRecord, RunStats,
};
use crate::rational::{self, denom_bits, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhaseStart {
    Started,
    Terminated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Continue,
    PhaseEnded(PhaseType),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseOutcome {
    pub phase_type: PhaseType,
    pub potential_before: Rational,
    pub potential_after: Rational,
    /// The event that ended the phase.
    pub detail: EventKind,
}

struct OpenPhase {
    phi_before: Rational,
    live_buyers: usize,
}

pub struct SolverState<'a> {
    inst: &'a MarketInstance,
    opts: SolverOptions,
    pub prices: Vec<Rational>,
    pub returned: Vec<Rational>,
    pub live: Vec<bool>,
    /// Edges of the current network as `(good, buyer)` instance indices.
    edges: BTreeSet<(usize, usize)>,
    pub active_buyers: Vec<usize>,
    pub active_goods: Vec<usize>,
    pub zero_degree: Vec<usize>,
    pub base_prices: Vec<Rational>,
    base_alpha: Vec<Rational>,
    pub theta: Rational,
    /// Most recent balanced flow and the network it lives in.
    flow_net: FlowNetwork,
    flow: Flow,
    phi: Rational,
    pub stats: RunStats,
    pub trace: Option<Trace>,
    phase: usize,
    iteration: usize,
    iterations_in_phase: usize,
    open: Option<OpenPhase>,
    iteration_start: Option<(Vec<usize>, Vec<Rational>)>,
    money_left_in_iteration: bool,
    terminated: bool,
}

impl<'a> SolverState<'a> {
    /// Starting prices, bang per buck and network. Prices start at
    /// `min_i m_i / |G|`, capped so that every buyer's best utility is at
    /// least the price; goods nobody wants at that price are then lowered to
    /// the highest price at which some buyer's bang per buck is attained.
    pub fn initialize(inst: &'a MarketInstance, opts: SolverOptions) -> Result<Self> {
        validate_instance(inst).into_result()?;
        let (n, m) = (inst.num_buyers(), inst.num_goods());
        let min_money = rational::min_of(&inst.money).expect("at least one buyer");
        let mut start = min_money / Rational::from_integer((m as i64).into());
        let best_utility = inst
            .utilities
            .iter()
            .map(|row| rational::max_of(row).expect("at least one good"))
            .min()
            .expect("at least one buyer");
        if best_utility < start {
            start = best_utility;
        }
        let prices = vec![start; m];
        let placeholder = FlowNetwork::new(vec![], vec![], vec![], vec![], vec![]).expect("empty network");
        let mut st = Self {
            inst,
            opts,
            prices,
            returned: vec![Rational::zero(); n],
            live: vec![true; n],
            edges: BTreeSet::new(),
            active_buyers: Vec::new(),
            active_goods: Vec::new(),
            zero_degree: Vec::new(),
            base_prices: Vec::new(),
            base_alpha: Vec::new(),
            theta: Rational::one(),
            flow: Flow::zero(&placeholder),
            flow_net: placeholder,
            phi: Rational::zero(),
            stats: RunStats::new(inst),
            trace: None,
            phase: 0,
            iteration: 0,
            iterations_in_phase: 0,
            open: None,
            iteration_start: None,
            money_left_in_iteration: false,
            terminated: false,
        };
        if st.opts.record_trace {
            st.trace = Some(Trace::default());
        }
        let alpha = st.alphas();
        st.edges = st.mbpb_edges();
        for j in 0..m {
            if st.edges.iter().any(|&(g, _)| g == j) {
                continue;
            }
            let lowered = (0..n)
                .map(|i| &inst.utilities[i][j] / &alpha[i])
                .max()
                .expect("at least one buyer");
            st.prices[j] = lowered;
        }
        st.edges = st.mbpb_edges();
        if st.alphas() != alpha {
            return Err(Error::Contract("lowering unwanted goods changed a bang per buck".into()));
        }
        st.refresh();
        st.snapshot();
        Ok(st)
    }

    pub fn instance(&self) -> &MarketInstance {
        self.inst
    }

    pub fn live_buyers(&self) -> Vec<usize> {
        (0..self.inst.num_buyers()).filter(|&i| self.live[i]).collect()
    }

    pub fn alphas(&self) -> Vec<Rational> {
        (0..self.inst.num_buyers()).map(|i| bang_per_buck(self.inst, &self.prices, i)).collect()
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Current edge set, `(good, buyer)` pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edges.iter().copied().collect()
    }

    /// Latest balanced flow's potential.
    pub fn phi(&self) -> &Rational {
        &self.phi
    }

    /// Latest balanced flow and its network.
    pub fn current_flow(&self) -> (&FlowNetwork, &Flow) {
        (&self.flow_net, &self.flow)
    }

    fn mbpb_edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for i in self.live_buyers() {
            for j in mbpb(self.inst, &self.prices, i).1 {
                out.insert((j, i));
            }
        }
        out
    }

    /// Network over live buyers and all goods with the current edge set.
    /// `zero_money` sets one buyer's left-over money to zero.
    pub fn network(&self, zero_money: Option<usize>) -> FlowNetwork {
        let buyers = self.live_buyers();
        let local: Vec<Option<usize>> = {
            let mut v = vec![None; self.inst.num_buyers()];
            for (k, &i) in buyers.iter().enumerate() {
                v[i] = Some(k);
            }
            v
        };
        let sinks = buyers
            .iter()
            .map(|&i| if Some(i) == zero_money { Rational::zero() } else { &self.inst.money[i] - &self.returned[i] })
            .collect();
        let edges = self.edges.iter().filter_map(|&(g, i)| local[i].map(|b| (g, b))).collect();
        FlowNetwork::new((0..self.inst.num_goods()).collect(), buyers, self.prices.clone(), sinks, edges)
            .expect("solver networks are consistent")
    }

    fn refresh(&mut self) {
        let net = self.network(None);
        let (f, calls) = balanced_flow_counted(&net);
        self.stats.maxflow_calls += calls;
        self.phi = potential(&surplus(&net, &f)).phi;
        self.flow = f;
        self.flow_net = net;
    }

    fn snapshot(&mut self) {
        let alpha = self.alphas();
        if let Some(t) = &mut self.trace {
            t.snapshots.push(Snapshot { prices: self.prices.clone(), alpha, returned: self.returned.clone() });
        }
    }

    fn goods_of_active(&self) -> Vec<usize> {
        let set: BTreeSet<usize> =
            self.edges.iter().filter(|(_, i)| self.active_buyers.contains(i)).map(|&(g, _)| g).collect();
        set.into_iter().collect()
    }

    /// Computes the balanced flow, the most-surplus buyers `I` and their goods
    /// `J`, prunes edges from `J` to buyers outside `I`, and starts the first
    /// iteration. Terminates instead when no buyer has surplus left.
    pub fn begin_phase(&mut self) -> Result<PhaseStart> {
        if self.terminated {
            return Ok(PhaseStart::Terminated);
        }
        if self.live_buyers().is_empty() {
            self.stats.all_buyers_removed = true;
            self.terminated = true;
            return Ok(PhaseStart::Terminated);
        }
        if self.stats.phase_count >= self.opts.max_phases {
            return Err(Error::Contract(format!("phase limit {} exceeded", self.opts.max_phases)));
        }
        let sv = surplus(&self.flow_net, &self.flow);
        let delta = sv.max();
        if delta.is_zero() {
            self.terminated = true;
            return Ok(PhaseStart::Terminated);
        }
        let buyers = self.flow_net.buyers().to_vec();
        self.active_buyers = buyers.iter().zip(&sv.0).filter(|(_, g)| **g == delta).map(|(&i, _)| i).collect();
        self.active_goods = self.goods_of_active();
        self.open = Some(OpenPhase { phi_before: self.phi.clone(), live_buyers: buyers.len() });
        self.iterations_in_phase = 0;
        self.start_iteration();
        self.iteration_start = Some((buyers, sv.0));
        Ok(PhaseStart::Started)
    }

    fn start_iteration(&mut self) {
        self.base_prices = self.prices.clone();
        self.base_alpha = self.alphas();
        self.theta = Rational::one();
        let (active, goods) = (&self.active_buyers, &self.active_goods);
        self.edges.retain(|(g, i)| !(goods.contains(g) && !active.contains(i)));
        self.zero_degree = self
            .live_buyers()
            .into_iter()
            .filter(|i| !self.active_buyers.contains(i) && !self.edges.iter().any(|e| e.1 == *i))
            .collect();
        self.iteration += 1;
        self.iterations_in_phase += 1;
        self.money_left_in_iteration = false;
    }

    /// The active part `(J, I)` with active prices scaled by `theta`.
    fn active_network(&self, theta: &Rational) -> FlowNetwork {
        let net = self.network(None);
        let goods: Vec<usize> = self.active_goods.clone();
        let buyers: Vec<usize> =
            self.active_buyers.iter().map(|&i| net.local_buyer(i).expect("active buyers are live")).collect();
        let (sub, _) = net.restrict(&goods, &buyers, None);
        let caps = goods.iter().map(|&j| &self.base_prices[j] * theta).collect();
        sub.with_source_caps(caps).expect("same shape")
    }

    fn probe(&mut self, theta: &Rational) -> (FlowNetwork, Flow) {
        let net = self.active_network(theta);
        let f = max_flow(&net);
        self.stats.maxflow_calls += 1;
        (net, f)
    }

    /// Smallest `θ ≤ cap` at which some active goods set is tight, with the
    /// largest such set at that `θ`.
    fn tight_set(&mut self, cap: &Rational) -> Result<Option<(Rational, Vec<usize>)>> {
        let (mut net, mut f) = self.probe(cap);
        let mut theta = cap.clone();
        while f.value < net.total_source_capacity() {
            let cut = min_cut_source_side(&net, &f)?;
            let goods = cut.goods(&net);
            if goods.is_empty() {
                return Err(Error::Contract("violated cut without goods".into()));
            }
            let buyers = net.buyers_of(&goods);
            let worth = rational::sum(buyers.iter().map(|&b| &net.sink_caps()[b]));
            let base = rational::sum(goods.iter().map(|&g| &self.base_prices[net.goods()[g]]));
            let next = tight_set_theta(&worth, &base);
            if next >= theta {
                return Err(Error::Contract("tight-set search made no progress".into()));
            }
            theta = next;
            (net, f) = self.probe(&theta);
        }
        if theta < self.theta {
            return Err(Error::Contract("a goods set was over-priced before the event".into()));
        }
        let cut = maximal_min_cut(&net, &f)?;
        let goods: Vec<usize> = cut.goods(&net).into_iter().map(|g| net.goods()[g]).collect();
        Ok(if goods.is_empty() { None } else { Some((theta, goods)) })
    }

    /// First event as `θ` rises from its current value.
    pub fn next_event(&mut self) -> Result<Event> {
        let mut cands = Vec::new();
        let m = self.inst.num_goods();
        for &i in &self.active_buyers {
            cands.push(Event { kind: EventKind::MoneyReturn { buyer: i }, theta: money_return_theta(&self.base_alpha[i]) });
        }
        for &i in &self.zero_degree {
            cands.push(Event { kind: EventKind::ZRemoval { buyer: i }, theta: money_return_theta(&self.base_alpha[i]) });
        }
        for (set, z) in [(&self.active_buyers, false), (&self.zero_degree, true)] {
            for &i in set {
                for j in (0..m).filter(|j| !self.active_goods.contains(j)) {
                    let u = &self.inst.utilities[i][j];
                    if !u.is_positive() {
                        continue;
                    }
                    let theta = new_edge_theta(&self.base_alpha[i], &self.prices[j], u);
                    let kind =
                        if z { EventKind::ZNewEdge { buyer: i, good: j } } else { EventKind::NewEdge { buyer: i, good: j } };
                    cands.push(Event { kind, theta });
                }
            }
        }
        let cap = cands.iter().map(|e| e.theta.clone()).min().ok_or_else(|| {
            Error::Contract("no event can fire: the active set is empty".into())
        })?;
        if let Some((theta, goods)) = self.tight_set(&cap)? {
            cands.push(Event { kind: EventKind::TightSet { goods }, theta });
        }
        let best = cands.into_iter().min_by(|a, b| a.order(b)).expect("nonempty");
        if best.theta < self.theta {
            return Err(Error::Contract(format!("event {} lies below the current θ", best.kind)));
        }
        Ok(best)
    }

    fn check_alpha(&self, buyer: usize, want: &Rational, what: &str) -> Result<()> {
        let alpha = bang_per_buck(self.inst, &self.prices, buyer);
        if &alpha != want {
            return Err(Error::Contract(format!("{what}: buyer {buyer} has bang per buck {alpha}, expected {want}")));
        }
        Ok(())
    }

    /// Moves prices to the event's `θ` and applies it.
    pub fn apply_event(&mut self, ev: &Event) -> Result<Step> {
        if ev.theta < self.theta {
            return Err(Error::Contract("θ may only rise".into()));
        }
        self.theta = ev.theta.clone();
        for &j in &self.active_goods {
            self.prices[j] = &self.base_prices[j] * &self.theta;
        }
        self.record_row(&ev.kind);
        let step = match &ev.kind {
            EventKind::MoneyReturn { buyer } => {
                if !self.active_buyers.contains(buyer) {
                    return Err(Error::Contract(format!("money return for inactive buyer {buyer}")));
                }
                let t = self.apply_money_return(*buyer)?;
                self.end_phase(t);
                Step::PhaseEnded(t)
            }
            EventKind::TightSet { goods } => {
                self.check_tight(goods)?;
                self.end_phase(PhaseType::TightSet);
                Step::PhaseEnded(PhaseType::TightSet)
            }
            EventKind::ZRemoval { buyer } => {
                let i = *buyer;
                if !self.zero_degree.contains(&i) {
                    return Err(Error::Contract(format!("buyer {i} is not zero-degree")));
                }
                self.check_alpha(i, &Rational::one(), "zero-degree removal")?;
                self.returned[i] = self.inst.money[i].clone();
                self.live[i] = false;
                self.edges.retain(|e| e.1 != i);
                self.zero_degree.retain(|&b| b != i);
                self.money_left_in_iteration = true;
                Step::Continue
            }
            EventKind::ZNewEdge { buyer, good } => {
                let (i, j) = (*buyer, *good);
                if !self.zero_degree.contains(&i) {
                    return Err(Error::Contract(format!("buyer {i} is not zero-degree")));
                }
                self.check_alpha(i, &(&self.inst.utilities[i][j] / &self.prices[j]), "zero-degree edge")?;
                self.edges.insert((j, i));
                self.zero_degree.retain(|&b| b != i);
                Step::Continue
            }
            EventKind::NewEdge { buyer, good } => {
                self.apply_new_edge(*buyer, *good)?;
                Step::Continue
            }
        };
        self.snapshot();
        if step == Step::Continue && self.opts.check_invariant_at_events {
            let ok = crate::flow::check_invariant(&self.network(None));
            if let Some(t) = &mut self.trace {
                t.event_invariants.push(ok);
            }
        }
        Ok(step)
    }

    fn record_row(&mut self, kind: &EventKind) {
        if self.trace.is_none() {
            return;
        }
        let row = TraceRow {
            phase: self.phase,
            iteration: self.iteration,
            event: kind.clone(),
            theta: self.theta.clone(),
            phi: self.phi.clone(),
            active_buyers: self.active_buyers.len(),
            active_goods: self.active_goods.len(),
            zero_degree: self.zero_degree.len(),
            price_hash: price_hash(&self.prices),
        };
        self.trace.as_mut().expect("checked").rows.push(row);
    }

    fn check_tight(&self, goods: &[usize]) -> Result<()> {
        let net = self.network(None);
        let local: Vec<usize> = goods.iter().map(|&j| net.local_good(j).expect("all goods present")).collect();
        let buyers = net.buyers_of(&local);
        let worth_goods = rational::sum(goods.iter().map(|&j| &self.prices[j]));
        let worth_buyers = rational::sum(buyers.iter().map(|&b| &net.sink_caps()[b]));
        if worth_goods != worth_buyers || !goods.iter().all(|j| self.active_goods.contains(j)) {
            return Err(Error::Contract("reported set is not tight".into()));
        }
        Ok(())
    }

    fn apply_new_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if !self.active_buyers.contains(&i) || self.active_goods.contains(&j) {
            return Err(Error::Contract(format!("new edge ({j}, {i}) does not leave the active part")));
        }
        self.check_alpha(i, &(&self.inst.utilities[i][j] / &self.prices[j]), "new edge")?;
        self.edges.insert((j, i));
        self.refresh();
        let sv = surplus(&self.flow_net, &self.flow);
        if let (Some(trace), Some((buyers, before))) = (&mut self.trace, &self.iteration_start) {
            if !self.money_left_in_iteration {
                trace.iterations.push(IterationSurplus {
                    buyers: buyers.clone(),
                    before: before.clone(),
                    after: sv.0.clone(),
                });
            }
        }
        let net = &self.flow_net;
        let targets: Vec<usize> =
            self.active_buyers.iter().map(|&b| net.local_buyer(b).expect("active buyers are live")).collect();
        let joined: Vec<usize> =
            residual_reachable(net, &self.flow, &targets).into_iter().map(|b| net.buyers()[b]).collect();
        self.active_buyers.extend(joined);
        self.active_buyers.sort_unstable();
        self.active_goods = self.goods_of_active();
        let limit = self.inst.num_buyers() * self.inst.num_goods() + 1;
        if self.iterations_in_phase > limit {
            return Err(Error::Contract(format!("more than {limit} iterations in one phase")));
        }
        let buyers = self.flow_net.buyers().to_vec();
        self.start_iteration();
        self.iteration_start = Some((buyers, sv.0));
        Ok(())
    }

    /// Zeroes the buyer's left-over money, then returns either all of it
    /// (when prices are still fully payable without it) or exactly the slack
    /// `worth(S) − worth(T)` of the maximal minimum cut.
    fn apply_money_return(&mut self, i: usize) -> Result<PhaseType> {
        self.check_alpha(i, &Rational::one(), "money return")?;
        let total = rational::sum(&self.prices);
        let without = self.network(Some(i));
        let f = max_flow(&without);
        self.stats.maxflow_calls += 1;
        if f.value == total {
            self.returned[i] = self.inst.money[i].clone();
            self.live[i] = false;
            self.edges.retain(|e| e.1 != i);
            return Ok(PhaseType::FullReturn);
        }
        let cut = maximal_min_cut(&without, &f)?;
        let li = without.local_buyer(i).expect("buyer is live");
        let buyers = cut.buyers(&without);
        if !buyers.contains(&li) {
            return Err(Error::Contract(format!("buyer {i} is not on the source side of the maximal cut")));
        }
        let worth_s = rational::sum(cut.goods(&without).iter().map(|&g| &without.source_caps()[g]));
        let worth_t = rational::sum(buyers.iter().map(|&b| &without.sink_caps()[b]));
        let beta = worth_s - worth_t;
        let leftover = &self.inst.money[i] - &self.returned[i];
        if !beta.is_positive() || beta > leftover {
            return Err(Error::Contract(format!("partial return slack {beta} outside (0, {leftover}]")));
        }
        self.returned[i] = &self.inst.money[i] - &beta;
        let restored = self.network(None);
        if max_flow(&restored).value != total {
            return Err(Error::Contract("partial return did not restore the invariant".into()));
        }
        let side: Vec<bool> = (0..restored.num_vertices()).map(|v| cut.contains(v)).collect();
        if cut_capacity(&restored, &side).as_ref() != Some(&total) {
            return Err(Error::Contract("partial return did not leave the cut set tight".into()));
        }
        Ok(PhaseType::PartialReturn)
    }

    fn end_phase(&mut self, t: PhaseType) {
        self.stats.phase_count += 1;
        match t {
            PhaseType::TightSet => self.stats.phase_types.type1 += 1,
            PhaseType::FullReturn => self.stats.phase_types.type2 += 1,
            PhaseType::PartialReturn => self.stats.phase_types.type3 += 1,
        }
        self.edges = self.mbpb_edges();
        self.refresh();
        let invariant_held = self.flow.value == rational::sum(&self.prices);
        let open = self.open.take().expect("phase was open");
        self.stats.potential_trace.push(PotentialRecord {
            phase: self.phase,
            phi_before: open.phi_before,
            phi_after: self.phi.clone(),
            phase_type: t,
            live_buyers: open.live_buyers,
            invariant_held,
        });
        self.phase += 1;
        self.iteration = 0;
        self.active_buyers.clear();
        self.active_goods.clear();
        self.zero_degree.clear();
        self.iteration_start = None;
    }

    /// Runs events until the phase ends.
    pub fn run_phase(&mut self) -> Result<PhaseOutcome> {
        let before = self.open.as_ref().map(|o| o.phi_before.clone()).ok_or_else(|| {
            Error::Contract("no phase in progress".into())
        })?;
        loop {
            let ev = self.next_event()?;
            if let Step::PhaseEnded(t) = self.apply_event(&ev)? {
                return Ok(PhaseOutcome {
                    phase_type: t,
                    potential_before: before,
                    potential_after: self.phi.clone(),
                    detail: ev.kind,
                });
            }
        }
    }

    /// Allocation from the final flow: `x_ij = f(j, i) / p_j`, refunds `r`.
    pub fn finish(mut self) -> (Equilibrium, RunStats, Option<Trace>) {
        let (n, m) = (self.inst.num_buyers(), self.inst.num_goods());
        let mut alloc = vec![vec![Rational::zero(); m]; n];
        for (k, &(g, b)) in self.flow_net.edges().iter().enumerate() {
            let (i, j) = (self.flow_net.buyers()[b], self.flow_net.goods()[g]);
            alloc[i][j] = &self.flow.edges[k] / &self.prices[j];
        }
        let eq = Equilibrium::assemble(self.inst, self.prices.clone(), alloc, self.returned.clone());
        self.stats.max_denominator_bits =
            eq.prices.iter().chain(eq.allocation.iter().flatten()).chain(&eq.returned).map(denom_bits).max().unwrap_or(0);
        self.stats.termination_cut_min = self.flow.value == self.flow_net.total_sink_capacity();
        (eq, self.stats, self.trace)
    }
}
