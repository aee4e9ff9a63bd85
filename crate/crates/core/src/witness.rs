//! Witness discovery by bounded breadth-first search.
//!
//! A SeekRel witness is a third page reachable from both `u` and `v` within
//! `d` hops; a FactRel witness reaches both, which is the same search on the
//! reversed subnetwork. Witnesses are ordered nearest first so that capacity
//! reduction credits near witnesses before the redundant far ones.

use std::collections::VecDeque;

use log::debug;

use crate::error::{Error, Result};
use crate::subnet::Subnetwork;
use crate::webgraph::{GraphView, PageId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Seek,
    Fact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessEntry {
    pub witness: PageId,
    pub min_hop: u32,
    pub max_hop: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessList {
    pub direction: Direction,
    pub entries: Vec<WitnessEntry>,
}

impl WitnessList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn witnesses(&self) -> impl Iterator<Item = PageId> + '_ {
        self.entries.iter().map(|e| e.witness)
    }
}

/// Hop distances from `start`, `None` beyond `depth` levels or unreachable.
pub fn bfs_levels(view: &GraphView<'_>, start: usize, depth: u32) -> Vec<Option<u32>> {
    let mut dist = vec![None; view.node_count()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x].expect("queued nodes have a distance");
        if dx == depth {
            continue;
        }
        for y in view.successors_of(x) {
            if dist[y].is_none() {
                dist[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

fn witness_list(net: &Subnetwork, direction: Direction, d: u32, u: PageId, v: PageId) -> Result<WitnessList> {
    if u == v {
        return Err(Error::invalid("witness search needs two distinct pages"));
    }
    if d == 0 {
        return Err(Error::invalid("search depth must be at least 1"));
    }
    let lu = net.require(u)?;
    let lv = net.require(v)?;
    let view = match direction {
        Direction::Seek => net.view(),
        Direction::Fact => net.view().reversed(),
    };
    let from_u = bfs_levels(&view, lu, d);
    let from_v = bfs_levels(&view, lv, d);
    let mut entries: Vec<WitnessEntry> = from_u
        .iter()
        .zip(&from_v)
        .enumerate()
        .filter(|&(x, _)| x != lu && x != lv)
        .filter_map(|(x, (hu, hv))| {
            let (hu, hv) = ((*hu)?, (*hv)?);
            Some(WitnessEntry {
                witness: net.page(x),
                min_hop: hu.min(hv),
                max_hop: hu.max(hv),
            })
        })
        .collect();
    entries.sort_by_key(|e| (e.min_hop, e.max_hop, e.witness));
    debug!(
        "{direction:?} witnesses for ({u}, {v}) in `{}`: {:?}",
        net.keyword(),
        entries
            .iter()
            .map(|e| (e.witness.0, e.min_hop, e.max_hop))
            .collect::<Vec<_>>()
    );
    Ok(WitnessList { direction, entries })
}

/// Pages reachable from both `u` and `v` within `d` hops, nearest first.
pub fn make_seek_witness_list(net: &Subnetwork, d: u32, u: PageId, v: PageId) -> Result<WitnessList> {
    witness_list(net, Direction::Seek, d, u, v)
}

/// Pages reaching both `u` and `v` within `d` hops, nearest first.
pub fn make_fact_witness_list(net: &Subnetwork, d: u32, u: PageId, v: PageId) -> Result<WitnessList> {
    witness_list(net, Direction::Fact, d, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hits::HitsOptions;
    use crate::testutil::toy7;
    use crate::webgraph::Digraph;

    fn toy_net() -> Subnetwork {
        Subnetwork::from_graph("toy", toy7().graph(), HitsOptions::default()).unwrap()
    }

    fn triples(list: &WitnessList) -> Vec<(u32, u32, u32)> {
        list.entries
            .iter()
            .map(|e| (e.witness.0, e.min_hop, e.max_hop))
            .collect()
    }

    #[test]
    fn seek_lists_on_toy7() {
        let net = toy_net();
        let l = make_seek_witness_list(&net, 3, PageId(0), PageId(1)).unwrap();
        assert_eq!(triples(&l), vec![(3, 1, 2), (6, 2, 2), (4, 2, 3)]);
        let l = make_seek_witness_list(&net, 3, PageId(0), PageId(2)).unwrap();
        assert_eq!(triples(&l), vec![(5, 1, 1), (3, 1, 2), (6, 1, 2), (4, 2, 3)]);
    }

    #[test]
    fn fact_lists_on_toy7() {
        let net = toy_net();
        let l = make_fact_witness_list(&net, 3, PageId(5), PageId(6)).unwrap();
        assert_eq!(triples(&l), vec![(2, 1, 1), (0, 1, 2)]);
        assert!(make_fact_witness_list(&net, 3, PageId(0), PageId(1))
            .unwrap()
            .is_empty());
        let l = make_fact_witness_list(&net, 3, PageId(2), PageId(5)).unwrap();
        assert_eq!(triples(&l), vec![(0, 1, 1)]);
    }

    #[test]
    fn disjoint_components_have_no_witnesses() {
        let (g, _) = Digraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let net = Subnetwork::from_graph("w", &g, HitsOptions::default()).unwrap();
        assert!(make_seek_witness_list(&net, 3, PageId(0), PageId(2))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn depth_limits_reach() {
        let net = toy_net();
        let l = make_seek_witness_list(&net, 1, PageId(0), PageId(2)).unwrap();
        assert_eq!(triples(&l), vec![(5, 1, 1)]);
    }

    #[test]
    fn errors() {
        let net = toy_net();
        assert!(make_seek_witness_list(&net, 3, PageId(0), PageId(0)).is_err());
        assert!(make_seek_witness_list(&net, 0, PageId(0), PageId(1)).is_err());
        assert!(matches!(
            make_seek_witness_list(&net, 3, PageId(0), PageId(40)),
            Err(Error::UnknownPage(40))
        ));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::hits::HitsOptions;
    use crate::testutil::arb_digraph;
    use crate::webgraph::Digraph;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// All-pairs hop counts by repeated edge relaxation.
    fn hop_matrix(g: &Digraph) -> Vec<Vec<Option<u32>>> {
        let n = g.node_count();
        let mut dist = vec![vec![None; n]; n];
        for (x, row) in dist.iter_mut().enumerate() {
            row[x] = Some(0);
        }
        for _ in 0..n {
            for (a, b) in g.edges() {
                for row in dist.iter_mut() {
                    if let Some(da) = row[a] {
                        if row[b].is_none_or(|db| da + 1 < db) {
                            row[b] = Some(da + 1);
                        }
                    }
                }
            }
        }
        dist
    }

    fn set(list: &WitnessList) -> BTreeSet<PageId> {
        list.witnesses().collect()
    }

    proptest! {
        #[test]
        fn lists_are_symmetric(g in arb_digraph(50), u in 0usize..50, v in 0usize..50, d in 1u32..5) {
            let n = g.node_count();
            let (u, v) = (PageId::from_index(u % n), PageId::from_index(v % n));
            prop_assume!(u != v);
            let net = Subnetwork::from_graph("p", &g, HitsOptions::default()).unwrap();
            prop_assert_eq!(
                make_seek_witness_list(&net, d, u, v).unwrap().entries,
                make_seek_witness_list(&net, d, v, u).unwrap().entries
            );
            prop_assert_eq!(
                make_fact_witness_list(&net, d, u, v).unwrap().entries,
                make_fact_witness_list(&net, d, v, u).unwrap().entries
            );
        }

        #[test]
        fn lists_match_independent_distances(g in arb_digraph(30), u in 0usize..30, v in 0usize..30, d in 1u32..5) {
            let n = g.node_count();
            let (u, v) = (u % n, v % n);
            prop_assume!(u != v);
            let net = Subnetwork::from_graph("p", &g, HitsOptions::default()).unwrap();
            let hops = hop_matrix(&g);
            let within = |h: Option<u32>| h.filter(|&h| h <= d);
            let mut seek = Vec::new();
            let mut fact = Vec::new();
            for x in (0..n).filter(|&x| x != u && x != v) {
                if let (Some(a), Some(b)) = (within(hops[u][x]), within(hops[v][x])) {
                    seek.push((a.min(b), a.max(b), x as u32));
                }
                if let (Some(a), Some(b)) = (within(hops[x][u]), within(hops[x][v])) {
                    fact.push((a.min(b), a.max(b), x as u32));
                }
            }
            seek.sort();
            fact.sort();
            let key = |l: WitnessList| -> Vec<(u32, u32, u32)> {
                l.entries.iter().map(|e| (e.min_hop, e.max_hop, e.witness.0)).collect()
            };
            let (pu, pv) = (PageId::from_index(u), PageId::from_index(v));
            prop_assert_eq!(key(make_seek_witness_list(&net, d, pu, pv).unwrap()), seek);
            prop_assert_eq!(key(make_fact_witness_list(&net, d, pu, pv).unwrap()), fact);
        }

        #[test]
        fn deeper_search_only_adds(g in arb_digraph(50), u in 0usize..50, v in 0usize..50, d in 1u32..6) {
            let n = g.node_count();
            let (u, v) = (PageId::from_index(u % n), PageId::from_index(v % n));
            prop_assume!(u != v);
            let net = Subnetwork::from_graph("p", &g, HitsOptions::default()).unwrap();
            prop_assert!(set(&make_seek_witness_list(&net, d, u, v).unwrap())
                .is_subset(&set(&make_seek_witness_list(&net, d + 1, u, v).unwrap())));
            prop_assert!(set(&make_fact_witness_list(&net, d, u, v).unwrap())
                .is_subset(&set(&make_fact_witness_list(&net, d + 1, u, v).unwrap())));
        }
    }
}
