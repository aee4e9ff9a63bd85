//! SimRank and PageSim, for comparison with the flow scores.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::webgraph::Digraph;

/// Dense symmetric `n × n` score matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    fn zeros(n: usize) -> Self {
        SimilarityMatrix {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.n..(a + 1) * self.n]
    }

    /// Largest absolute difference from any other matrix of the same size.
    pub fn max_abs_diff(&self, other: &SimilarityMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Upper triangle (diagonal included) as `a<TAB>b<TAB>score` lines with
    /// 6 significant digits. Zero entries off the diagonal are skipped.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in 0..self.n {
            for b in a..self.n {
                let s = self.get(a, b);
                if a == b || s != 0.0 {
                    out.push_str(&format!("{a}\t{b}\t{}\n", sig(s, 6)));
                }
            }
        }
        out
    }
}

/// SimRank by fixed-point iteration from the identity:
/// `s(a, a) = 1`, and for `a ≠ b`
/// `s(a, b) = decay / (|I(a)|·|I(b)|) · Σ s(i, j)` over in-neighbors
/// `i ∈ I(a)`, `j ∈ I(b)`, or 0 when either in-set is empty.
pub fn simrank(graph: &Digraph, decay: f64, iterations: usize) -> Result<SimilarityMatrix> {
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(Error::invalid("SimRank decay must lie in (0, 1]"));
    }
    if iterations == 0 {
        return Err(Error::invalid("SimRank needs at least one iteration"));
    }
    let n = graph.node_count();
    let preds: Vec<Vec<usize>> = (0..n).map(|x| graph.predecessors(x).collect()).collect();
    let mut current = SimilarityMatrix::zeros(n);
    for a in 0..n {
        current.values[a * n + a] = 1.0;
    }
    for _ in 0..iterations {
        let mut next = SimilarityMatrix::zeros(n);
        let prev = &current;
        next.values.par_chunks_mut(n.max(1)).enumerate().for_each(|(a, row)| {
            for (b, slot) in row.iter_mut().enumerate() {
                *slot = if a == b {
                    1.0
                } else if preds[a].is_empty() || preds[b].is_empty() {
                    0.0
                } else {
                    let sum: f64 = preds[a]
                        .iter()
                        .flat_map(|&i| preds[b].iter().map(move |&j| prev.get(i, j)))
                        .sum();
                    decay * sum / (preds[a].len() * preds[b].len()) as f64
                };
            }
        });
        current = next;
    }
    Ok(current)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PageSimParams {
    /// PageRank damping factor.
    pub damping: f64,
    /// Multiplier applied per propagation hop.
    pub decay: f64,
    /// Longest propagation path, in hops.
    pub radius: usize,
}

impl Default for PageSimParams {
    fn default() -> Self {
        PageSimParams {
            damping: 0.85,
            decay: 0.5,
            radius: 3,
        }
    }
}

/// PageRank by power iteration; dangling mass is spread uniformly and the
/// result sums to 1.
pub fn pagerank(graph: &Digraph, damping: f64, tolerance: f64, max_iterations: usize) -> Vec<f64> {
    let n = graph.node_count();
    if n == 0 {
        return Vec::new();
    }
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    for _ in 0..max_iterations {
        let dangling: f64 = (0..n).filter(|&x| graph.out_degree(x) == 0).map(|x| rank[x]).sum();
        let base = (1.0 - damping) * uniform + damping * dangling * uniform;
        let mut next = vec![base; n];
        for (x, &r) in rank.iter().enumerate() {
            let deg = graph.out_degree(x);
            if deg > 0 {
                let share = damping * r / deg as f64;
                for y in graph.successors(x) {
                    next[y] += share;
                }
            }
        }
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        rank = next;
        if delta < tolerance {
            break;
        }
    }
    rank
}

/// PageSim: every page spreads its PageRank along simple out-link paths of
/// at most `radius` hops, splitting evenly over out-links and losing a
/// `decay` factor per hop; a page keeps its own PageRank. The score of two
/// pages is the mass they received from common sources, `Σ_s min(PG(s, a),
/// PG(s, b))`, so the diagonal holds each page's total received mass.
pub fn pagesim(graph: &Digraph, params: PageSimParams) -> Result<SimilarityMatrix> {
    if params.radius == 0 {
        return Err(Error::invalid("PageSim radius must be at least 1"));
    }
    if !(params.damping > 0.0 && params.damping < 1.0) {
        return Err(Error::invalid("PageRank damping must lie in (0, 1)"));
    }
    if !(params.decay > 0.0 && params.decay <= 1.0) {
        return Err(Error::invalid("PageSim decay must lie in (0, 1]"));
    }
    let n = graph.node_count();
    let rank = pagerank(graph, params.damping, 1e-12, 1000);
    // propagated[s][w] = PG(s, w)
    let propagated: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut received = vec![0.0; n];
            received[s] = rank[s];
            let mut on_path = vec![false; n];
            on_path[s] = true;
            spread(graph, s, rank[s], params, 0, &mut on_path, &mut received);
            received
        })
        .collect();
    let mut out = SimilarityMatrix::zeros(n);
    for a in 0..n {
        for b in a..n {
            let s: f64 = propagated.iter().map(|pg| pg[a].min(pg[b])).sum();
            out.values[a * n + b] = s;
            out.values[b * n + a] = s;
        }
    }
    Ok(out)
}

fn spread(
    graph: &Digraph,
    x: usize,
    mass: f64,
    params: PageSimParams,
    depth: usize,
    on_path: &mut [bool],
    received: &mut [f64],
) {
    if depth == params.radius {
        return;
    }
    let deg = graph.out_degree(x);
    if deg == 0 {
        return;
    }
    let share = params.decay * mass / deg as f64;
    for y in graph.successors(x) {
        if on_path[y] {
            continue;
        }
        received[y] += share;
        on_path[y] = true;
        spread(graph, y, share, params, depth + 1, on_path, received);
        on_path[y] = false;
    }
}
