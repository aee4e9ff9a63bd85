//! Maximum flow on real-capacitated directed graphs.
//!
//! Shortest augmenting paths (Edmonds–Karp). The number of augmentations is
//! bounded by `O(V·E)` regardless of the capacity values, so the search
//! terminates on irrational capacities too. Neighbors are scanned in
//! ascending node order, which fixes which maximum flow is returned when
//! several exist.

use std::collections::{BTreeSet, VecDeque};

use log::trace;

use crate::error::{Error, Result};
use crate::subnet::Subnetwork;
use crate::webgraph::{Digraph, PageId};

/// Residual amounts at or below this are treated as zero.
pub const EPSILON: f64 = 1e-12;

/// Mutable working copy of a subnetwork's edge capacities, indexed by local
/// edge id. Entries never go negative.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityMap {
    values: Vec<f64>,
}

impl CapacityMap {
    pub fn from_subnetwork(net: &Subnetwork) -> Self {
        CapacityMap {
            values: net.capacities().to_vec(),
        }
    }

    /// Arbitrary non-negative capacities, one per edge.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::invalid(format!("capacity {bad} is not a non-negative real")));
        }
        Ok(CapacityMap { values })
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.values[edge]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `c(e) ← max(c(e) − amount, 0)`.
    pub fn subtract(&mut self, edge: usize, amount: f64) {
        let c = &mut self.values[edge];
        *c = (*c - amount).max(0.0);
    }
}

/// Flow value and the per-edge assignment realizing it.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub value: f64,
    /// Flow on each edge, indexed by local edge id.
    pub edge_flows: Vec<f64>,
}

impl FlowResult {
    pub fn zero(edge_count: usize) -> Self {
        FlowResult {
            value: 0.0,
            edge_flows: vec![0.0; edge_count],
        }
    }
}

/// Max flow from `source` to `sink` on `graph` with nodes flagged in
/// `excluded` removed. Indices are node/edge indices of `graph`.
pub fn max_flow_indexed(graph: &Digraph, caps: &[f64], source: usize, sink: usize, excluded: &[bool]) -> FlowResult {
    let n = graph.node_count();
    let mut flow = vec![0.0; graph.edge_count()];
    let mut value = 0.0;
    // (previous node, edge id, forward?)
    let mut parent: Vec<Option<(usize, usize, bool)>> = vec![None; n];
    let mut queue = VecDeque::new();
    loop {
        parent.iter_mut().for_each(|p| *p = None);
        let mut seen = vec![false; n];
        seen[source] = true;
        queue.clear();
        queue.push_back(source);
        'bfs: while let Some(x) = queue.pop_front() {
            for e in graph.out_edge_ids(x) {
                let (_, y) = graph.edge(e);
                if !seen[y] && !excluded[y] && caps[e] - flow[e] > EPSILON {
                    seen[y] = true;
                    parent[y] = Some((x, e, true));
                    if y == sink {
                        break 'bfs;
                    }
                    queue.push_back(y);
                }
            }
            for e in graph.in_edge_ids(x) {
                let (y, _) = graph.edge(e);
                if !seen[y] && !excluded[y] && flow[e] > EPSILON {
                    seen[y] = true;
                    parent[y] = Some((x, e, false));
                    if y == sink {
                        break 'bfs;
                    }
                    queue.push_back(y);
                }
            }
        }
        if !seen[sink] {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut y = sink;
        while let Some((x, e, forward)) = parent[y] {
            let room = if forward { caps[e] - flow[e] } else { flow[e] };
            bottleneck = bottleneck.min(room);
            y = x;
        }
        let mut y = sink;
        let mut path = vec![sink];
        while let Some((x, e, forward)) = parent[y] {
            if forward {
                flow[e] = (flow[e] + bottleneck).min(caps[e]);
            } else {
                flow[e] = (flow[e] - bottleneck).max(0.0);
            }
            path.push(x);
            y = x;
        }
        path.reverse();
        trace!("augment {bottleneck:e} along {path:?}");
        value += bottleneck;
    }
    FlowResult {
        value,
        edge_flows: flow,
    }
}

/// Max flow between two pages of `net` under capacities `caps`, with the
/// pages in `excluded` removed.
pub fn max_flow(
    net: &Subnetwork,
    caps: &CapacityMap,
    source: PageId,
    sink: PageId,
    excluded: &BTreeSet<PageId>,
) -> Result<FlowResult> {
    if source == sink {
        return Err(Error::invalid("source and sink must differ"));
    }
    if caps.len() != net.edge_count() {
        return Err(Error::invalid("capacity map does not match the subnetwork"));
    }
    let s = net.require(source)?;
    let t = net.require(sink)?;
    let mut mask = vec![false; net.node_count()];
    for &p in excluded {
        if p == source || p == sink {
            return Err(Error::ExcludedPage(p.0 as u64));
        }
        // pages outside the subnetwork are trivially absent
        if let Some(i) = net.local(p) {
            mask[i] = true;
        }
    }
    Ok(max_flow_indexed(net.graph(), caps.values(), s, t, &mask))
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::testutil::{arb_network, brute_min_cut};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn equals_min_cut((g, caps) in arb_network(8), s in 0usize..8, t in 0usize..8) {
            let n = g.node_count();
            let (s, t) = (s % n, t % n);
            prop_assume!(s != t);
            let none = vec![false; n];
            let f = max_flow_indexed(&g, &caps, s, t, &none);
            prop_assert!((f.value - brute_min_cut(&g, &caps, s, t, &none)).abs() <= 1e-9);
        }

        #[test]
        fn flow_is_feasible((g, caps) in arb_network(12), s in 0usize..12, t in 0usize..12) {
            let n = g.node_count();
            let (s, t) = (s % n, t % n);
            prop_assume!(s != t);
            let f = max_flow_indexed(&g, &caps, s, t, &vec![false; n]);
            let mut net = vec![0.0; n];
            for (e, (a, b)) in g.edges().enumerate() {
                prop_assert!(f.edge_flows[e] >= 0.0 && f.edge_flows[e] <= caps[e]);
                net[a] -= f.edge_flows[e];
                net[b] += f.edge_flows[e];
            }
            for (x, &bal) in net.iter().enumerate() {
                if x != s && x != t {
                    prop_assert!(bal.abs() < 1e-9);
                }
            }
            prop_assert!((net[t] - f.value).abs() < 1e-9);
            let out_cap = g.out_edge_ids(s).fold(0.0, |acc, e| acc + caps[e]);
            let in_cap = g.in_edge_ids(t).fold(0.0, |acc, e| acc + caps[e]);
            prop_assert!(f.value <= out_cap + 1e-9 && f.value <= in_cap + 1e-9);
        }

        #[test]
        fn exclusion_never_helps((g, caps) in arb_network(12), s in 0usize..12, t in 0usize..12, drop in 0usize..12) {
            let n = g.node_count();
            let (s, t, drop) = (s % n, t % n, drop % n);
            prop_assume!(s != t && drop != s && drop != t);
            let all = max_flow_indexed(&g, &caps, s, t, &vec![false; n]);
            let mut mask = vec![false; n];
            mask[drop] = true;
            let fewer = max_flow_indexed(&g, &caps, s, t, &mask);
            prop_assert!(fewer.value <= all.value + 1e-9);
            prop_assert!(g.in_edge_ids(drop).chain(g.out_edge_ids(drop)).all(|e| fewer.edge_flows[e] == 0.0));
        }
    }
}
