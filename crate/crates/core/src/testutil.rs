use crate::webgraph::{LoadOptions, WebGraph};

pub const TOY7_NODES: &str = "0\thttp://toy/0\n1\thttp://toy/1\n2\thttp://toy/2\n3\thttp://toy/3\n4\thttp://toy/4\n5\thttp://toy/5\n6\thttp://toy/6\n";
pub const TOY7_EDGES: &str = "0 2\n0 5\n1 3\n2 3\n2 5\n2 6\n3 4\n3 6\n";
pub const TOY7_KEYWORDS: &str = "toy\t0\ntoy\t1\ntoy\t2\ntoy\t3\ntoy\t4\ntoy\t5\ntoy\t6\n";

pub fn toy7() -> WebGraph {
    WebGraph::from_text(TOY7_NODES, TOY7_EDGES, Some(TOY7_KEYWORDS), LoadOptions::default()).unwrap()
}

use proptest::prelude::*;

use crate::webgraph::{Digraph, KeywordIndex, PageId, UrlTable};

/// Random digraph on `1..=max_nodes` nodes with up to `3n` raw edges before
/// cleanup.
pub fn arb_digraph(max_nodes: usize) -> impl Strategy<Value = Digraph> {
    (1..=max_nodes).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..=3 * n)
            .prop_map(move |edges| Digraph::from_edges(n, edges).unwrap().0)
    })
}

/// Random digraph with at least two nodes and one capacity per edge.
pub fn arb_network(max_nodes: usize) -> impl Strategy<Value = (Digraph, Vec<f64>)> {
    (2..=max_nodes)
        .prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..=3 * n)
                .prop_map(move |edges| Digraph::from_edges(n, edges).unwrap().0)
        })
        .prop_flat_map(|g| {
            let m = g.edge_count();
            (Just(g), proptest::collection::vec(0.0..2.0f64, m))
        })
}

/// Minimum `s`–`t` cut by enumerating every node bipartition; nodes flagged
/// in `excluded` are deleted together with their edges.
pub fn brute_min_cut(graph: &Digraph, caps: &[f64], s: usize, t: usize, excluded: &[bool]) -> f64 {
    let free: Vec<usize> = (0..graph.node_count())
        .filter(|&x| x != s && x != t && !excluded[x])
        .collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << free.len()) {
        let mut side = vec![false; graph.node_count()];
        side[s] = true;
        for (bit, &x) in free.iter().enumerate() {
            side[x] = mask & (1 << bit) != 0;
        }
        let cut = graph
            .edges()
            .enumerate()
            .filter(|&(_, (a, b))| side[a] && !side[b] && !excluded[a] && !excluded[b])
            .fold(0.0, |acc, (e, _)| acc + caps[e]);
        best = best.min(cut);
    }
    best
}

/// Random Web graph with keywords `k0`, `k1`, `k2`, each on at least one page.
pub fn arb_web(max_nodes: usize) -> impl Strategy<Value = WebGraph> {
    arb_digraph(max_nodes)
        .prop_flat_map(|g| {
            let n = g.node_count();
            (
                Just(g),
                proptest::collection::vec(proptest::collection::vec(0..n, 1..=n.min(6)), 1..=3),
            )
        })
        .prop_map(|(g, tags)| {
            let urls = UrlTable::from_urls((0..g.node_count()).map(|i| format!("http://site{i}/"))).unwrap();
            let mut keywords = KeywordIndex::new();
            for (k, pages) in tags.iter().enumerate() {
                for &p in pages {
                    keywords.insert(&format!("k{k}"), PageId::from_index(p), None).unwrap();
                }
            }
            WebGraph::new(urls, g.edges().collect(), keywords, LoadOptions::default()).unwrap()
        })
}
