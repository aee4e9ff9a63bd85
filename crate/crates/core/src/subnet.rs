//! Per-keyword capacitated subnetworks.
//!
//! For a keyword `w` the subnetwork starts from the pages containing `w`,
//! grows by one link in each direction, and is then augmented with pages
//! sharing an outlink with the core pages and with siblings reached through
//! the core pages' in-linkers. HITS runs on the induced graph and every edge
//! `(x, y)` gets capacity `hub(x)`.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hits::{compute_hits, HitsOptions};
use crate::webgraph::{limit_outlinks_near, Digraph, GraphView, PageId, WebGraph};

/// Keywords with significance weights, most significant first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeywordSet {
    entries: Vec<(String, f64)>,
}

impl KeywordSet {
    /// Sorts by descending gamma, then keyword. Rejects duplicate keywords
    /// and weights outside `(0, 1]`.
    pub fn new<I: IntoIterator<Item = (String, f64)>>(entries: I) -> Result<Self> {
        let set = Self::from_unordered(entries);
        let mut seen = BTreeSet::new();
        if let Some((k, _)) = set.entries.iter().find(|(k, _)| !seen.insert(k.as_str())) {
            return Err(Error::invalid(format!("duplicate keyword `{k}`")));
        }
        if let Some((k, g)) = set.entries.iter().find(|(_, g)| !(*g > 0.0 && *g <= 1.0)) {
            return Err(Error::invalid(format!("gamma {g} for `{k}` outside (0, 1]")));
        }
        Ok(set)
    }

    pub(crate) fn from_unordered<I: IntoIterator<Item = (String, f64)>>(entries: I) -> Self {
        let mut entries: Vec<(String, f64)> = entries.into_iter().collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        KeywordSet { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn gamma(&self, keyword: &str) -> Option<f64> {
        self.entries.iter().find(|(k, _)| k == keyword).map(|(_, g)| *g)
    }
}

/// Top `k` keywords shared by both pages, ranked by the sum of their two
/// weights. Each selected keyword carries the mean of its two weights.
pub fn select_keywords(ku: &KeywordSet, kv: &KeywordSet, k: usize) -> Result<KeywordSet> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut shared: Vec<(String, f64, f64)> = ku
        .entries
        .iter()
        .filter_map(|(w, gu)| kv.gamma(w).map(|gv| (w.clone(), gu + gv, (gu + gv) / 2.0)))
        .collect();
    shared.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    shared.truncate(k);
    Ok(KeywordSet::from_unordered(shared.into_iter().map(|(w, _, g)| (w, g))))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    /// In-linkers taken per core page (and per shared outlink target).
    pub inlink_cap: usize,
    /// Links kept on each side of the link to a core page when collecting
    /// siblings through an in-linker.
    pub sibling_window: usize,
    /// Run the co-outlink and sibling augmentation after the one-hop growth.
    pub augment: bool,
    pub hits: HitsOptions,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            inlink_cap: 1000,
            sibling_window: 5,
            augment: true,
            hits: HitsOptions::default(),
        }
    }
}

/// Grows the core page set into the subnetwork node set.
///
/// Neighbor lists are sorted by page id, so the in-linker cap keeps the
/// lowest ids and sibling windows are taken over id-ordered outlinks.
pub fn grow_base_set(graph: &Digraph, core: &[usize], options: &BuildOptions) -> BTreeSet<usize> {
    let mut nodes: BTreeSet<usize> = core.iter().copied().collect();
    for &p in core {
        nodes.extend(graph.predecessors(p).take(options.inlink_cap));
        nodes.extend(graph.successors(p));
    }
    if !options.augment {
        return nodes;
    }
    for &p in core {
        // pages sharing an outlink with p
        for y in graph.successors(p) {
            nodes.extend(graph.predecessors(y).take(options.inlink_cap));
        }
        // pages linked near p by p's in-linkers
        for b in graph.predecessors(p).take(options.inlink_cap) {
            let outlinks: Vec<PageId> = graph.successors(b).map(PageId::from_index).collect();
            let near = limit_outlinks_near(
                PageId::from_index(b),
                PageId::from_index(p),
                &outlinks,
                options.sibling_window,
            )
            .expect("in-linker links to core page");
            nodes.extend(near.into_iter().map(PageId::index));
        }
    }
    nodes
}

/// The capacitated network `N_w` for one keyword.
#[derive(Clone, Debug, PartialEq)]
pub struct Subnetwork {
    keyword: String,
    pages: Vec<PageId>,
    graph: Digraph,
    hub: Vec<f64>,
    auth: Vec<f64>,
    capacity: Vec<f64>,
    maxwt: f64,
}

impl Subnetwork {
    /// Induces the subgraph of `web` on `pages`, runs HITS and capacitates.
    pub fn from_pages(keyword: &str, web: &Digraph, pages: &BTreeSet<PageId>, hits: HitsOptions) -> Result<Self> {
        if pages.is_empty() {
            return Err(Error::invalid(format!("keyword `{keyword}` has no pages")));
        }
        let nodes: Vec<usize> = pages.iter().map(|p| p.index()).collect();
        if let Some(&bad) = nodes.iter().find(|&&n| n >= web.node_count()) {
            return Err(Error::UnknownPage(bad as u64));
        }
        let graph = web.induced(&nodes);
        let scores = compute_hits(&GraphView::new(&graph), hits.tolerance, hits.max_iterations)?;
        if !scores.converged {
            warn!(
                "HITS for `{keyword}` stopped after {} sweeps without converging",
                scores.iterations
            );
        }
        Ok(Self::assemble(
            keyword,
            pages.iter().copied().collect(),
            graph,
            scores.hub,
            scores.auth,
        ))
    }

    /// Treats the whole of `graph` as one subnetwork, page ids equal to node
    /// indices.
    pub fn from_graph(keyword: &str, graph: &Digraph, hits: HitsOptions) -> Result<Self> {
        let pages = (0..graph.node_count()).map(PageId::from_index).collect();
        Self::from_pages(keyword, graph, &pages, hits)
    }

    fn assemble(keyword: &str, pages: Vec<PageId>, graph: Digraph, hub: Vec<f64>, auth: Vec<f64>) -> Self {
        let capacity: Vec<f64> = graph.edges().map(|(s, _)| hub[s]).collect();
        let maxwt = capacity.iter().copied().fold(0.0, f64::max);
        if graph.edge_count() == 0 {
            warn!("subnetwork for `{keyword}` has no edges; its scores are all zero");
        }
        Subnetwork {
            keyword: keyword.to_string(),
            pages,
            graph,
            hub,
            auth,
            capacity,
            maxwt,
        }
    }

    pub fn keyword(&self) -> &str {
        &self.keyword
    }

    pub fn pages(&self) -> &[PageId] {
        &self.pages
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn view(&self) -> GraphView<'_> {
        GraphView::new(&self.graph)
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Local node index of `page`.
    pub fn local(&self, page: PageId) -> Option<usize> {
        self.pages.binary_search(&page).ok()
    }

    pub fn page(&self, local: usize) -> PageId {
        self.pages[local]
    }

    pub fn contains(&self, page: PageId) -> bool {
        self.local(page).is_some()
    }

    pub(crate) fn require(&self, page: PageId) -> Result<usize> {
        self.local(page).ok_or(Error::UnknownPage(page.0 as u64))
    }

    pub fn hub(&self, page: PageId) -> Option<f64> {
        self.local(page).map(|i| self.hub[i])
    }

    pub fn auth(&self, page: PageId) -> Option<f64> {
        self.local(page).map(|i| self.auth[i])
    }

    pub fn hub_values(&self) -> &[f64] {
        &self.hub
    }

    pub fn auth_values(&self) -> &[f64] {
        &self.auth
    }

    /// Edge capacities indexed by local edge id.
    pub fn capacities(&self) -> &[f64] {
        &self.capacity
    }

    /// `(src, dst, capacity)` in page ids.
    pub fn edges(&self) -> impl Iterator<Item = (PageId, PageId, f64)> + '_ {
        self.graph
            .edges()
            .zip(&self.capacity)
            .map(|((s, d), &c)| (self.pages[s], self.pages[d], c))
    }

    /// Largest edge capacity; zero for an edgeless subnetwork.
    pub fn maxwt(&self) -> f64 {
        self.maxwt
    }

    /// No edges, hence no flow and no usable `maxwt`.
    pub fn is_degenerate(&self) -> bool {
        self.graph.edge_count() == 0 || self.maxwt <= 0.0
    }

    /// Cache file text: a `keyword<TAB>maxwt` header, then node lines
    /// `id<TAB>hub<TAB>auth` and edge lines `src<TAB>dst<TAB>capacity`, each
    /// block introduced by a `# nodes N` / `# edges M` marker. Reals are
    /// written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\t{:?}\n# nodes {}\n", self.keyword, self.maxwt, self.pages.len());
        for (i, p) in self.pages.iter().enumerate() {
            out.push_str(&format!("{p}\t{:?}\t{:?}\n", self.hub[i], self.auth[i]));
        }
        out.push_str(&format!("# edges {}\n", self.graph.edge_count()));
        for (s, d, c) in self.edges() {
            out.push_str(&format!("{s}\t{d}\t{c:?}\n"));
        }
        out
    }

    /// Parses [`Subnetwork::to_text`] output and re-checks the capacity and
    /// `maxwt` invariants.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::parse(source_name, line, msg);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

        let (line_no, header) = lines.next().ok_or_else(|| err(1, "empty subnetwork file".into()))?;
        let (keyword, maxwt) = header
            .rsplit_once('\t')
            .ok_or_else(|| err(line_no, "expected `keyword<TAB>maxwt`".into()))?;
        if keyword.is_empty() || keyword.contains('\t') {
            return Err(err(line_no, "bad keyword".into()));
        }
        let maxwt = parse_real(maxwt).ok_or_else(|| err(line_no, format!("bad maxwt `{maxwt}`")))?;

        let count_marker = |line: Option<(usize, &str)>, name: &str| -> Result<usize> {
            let (n, l) = line.ok_or_else(|| err(0, format!("missing `# {name}` marker")))?;
            l.strip_prefix(&format!("# {name} "))
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| err(n, format!("expected `# {name} <count>`")))
        };
        let node_count = count_marker(lines.next(), "nodes")?;
        let mut pages = Vec::new();
        let mut hub = Vec::new();
        let mut auth = Vec::new();
        for _ in 0..node_count {
            let (n, l) = lines.next().ok_or_else(|| err(0, "truncated node block".into()))?;
            let f: Vec<&str> = l.split('\t').collect();
            let [id, h, a] = f[..] else {
                return Err(err(n, "expected `id<TAB>hub<TAB>auth`".into()));
            };
            let id: u32 = id.parse().map_err(|_| err(n, format!("bad page id `{id}`")))?;
            if pages.last().is_some_and(|&PageId(prev)| prev >= id) {
                return Err(err(n, "node ids must be strictly increasing".into()));
            }
            let h = parse_real(h).ok_or_else(|| err(n, format!("bad hub `{h}`")))?;
            let a = parse_real(a).ok_or_else(|| err(n, format!("bad auth `{a}`")))?;
            pages.push(PageId(id));
            hub.push(h);
            auth.push(a);
        }
        let edge_count = count_marker(lines.next(), "edges")?;
        let mut edges = Vec::new();
        let mut caps = Vec::new();
        for _ in 0..edge_count {
            let (n, l) = lines.next().ok_or_else(|| err(0, "truncated edge block".into()))?;
            let f: Vec<&str> = l.split('\t').collect();
            let [s, d, c] = f[..] else {
                return Err(err(n, "expected `src<TAB>dst<TAB>capacity`".into()));
            };
            let local = |field: &str| -> Result<usize> {
                let id: u32 = field.parse().map_err(|_| err(n, format!("bad page id `{field}`")))?;
                pages
                    .binary_search(&PageId(id))
                    .map_err(|_| err(n, format!("edge endpoint {id} is not a subnetwork node")))
            };
            let (s, d) = (local(s)?, local(d)?);
            let c = parse_real(c).ok_or_else(|| err(n, format!("bad capacity `{c}`")))?;
            if c.to_bits() != hub[s].to_bits() {
                return Err(err(n, "edge capacity differs from the hub value of its source".into()));
            }
            edges.push((s, d));
            caps.push(c);
        }
        if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(err(n, "trailing content after edge block".into()));
        }
        let (graph, cleanup) = Digraph::from_edges(pages.len(), edges.iter().copied())?;
        if cleanup != Default::default() || graph.edges().ne(edges.iter().copied()) {
            return Err(err(0, "edges must be distinct, loop-free and sorted".into()));
        }
        let net = Self::assemble(keyword, pages, graph, hub, auth);
        if net.maxwt.to_bits() != maxwt.to_bits() {
            return Err(err(1, "maxwt does not match the largest edge capacity".into()));
        }
        Ok(net)
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite() && *x >= 0.0)
}

/// Builds `N_w` for `keyword` from the Web graph.
pub fn build_subnetwork(web: &WebGraph, keyword: &str, options: &BuildOptions) -> Result<Subnetwork> {
    let core: Vec<usize> = web
        .keywords()
        .pages(keyword)
        .ok_or_else(|| Error::UnknownKeyword(keyword.to_string()))?
        .map(PageId::index)
        .collect();
    if core.is_empty() {
        return Err(Error::invalid(format!("keyword `{keyword}` has no pages")));
    }
    let nodes: BTreeSet<PageId> = grow_base_set(web.graph(), &core, options)
        .into_iter()
        .map(PageId::from_index)
        .collect();
    Subnetwork::from_pages(keyword, web.graph(), &nodes, options.hits)
}

/// Subnetworks keyed by keyword.
pub type SubnetworkSet = BTreeMap<String, Subnetwork>;

/// Builds a subnetwork for every keyword in the graph's keyword index, in
/// parallel on the current rayon pool.
pub fn build_all(web: &WebGraph, options: &BuildOptions) -> Result<SubnetworkSet> {
    let keywords: Vec<&str> = web.keywords().keywords().collect();
    keywords
        .par_iter()
        .map(|w| build_subnetwork(web, w, options).map(|n| (w.to_string(), n)))
        .collect()
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::testutil::arb_web;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn capacity_is_source_hub_bitwise(web in arb_web(50)) {
            for net in build_all(&web, &BuildOptions::default()).unwrap().values() {
                for (e, (s, _)) in net.graph().edges().enumerate() {
                    prop_assert_eq!(net.capacities()[e].to_bits(), net.hub_values()[s].to_bits());
                }
                let top = net.capacities().iter().copied().fold(0.0, f64::max);
                prop_assert_eq!(net.maxwt().to_bits(), top.to_bits());
            }
        }

        #[test]
        fn augmentation_only_adds_pages(web in arb_web(50), cap in 1usize..4, window in 0usize..3) {
            let full = BuildOptions { inlink_cap: cap, sibling_window: window, ..Default::default() };
            let plain = BuildOptions { augment: false, ..full };
            for w in web.keywords().keywords() {
                let core: Vec<usize> = web.keywords().pages(w).unwrap().map(PageId::index).collect();
                let small = grow_base_set(web.graph(), &core, &plain);
                let large = grow_base_set(web.graph(), &core, &full);
                prop_assert!(small.is_subset(&large));
                prop_assert!(core.iter().all(|p| small.contains(p)));
            }
        }

        #[test]
        fn builds_are_deterministic(web in arb_web(40)) {
            let a = build_all(&web, &BuildOptions::default()).unwrap();
            let b = build_all(&web, &BuildOptions::default()).unwrap();
            prop_assert_eq!(&a, &b);
            for net in a.values() {
                prop_assert_eq!(&Subnetwork::parse(&net.to_text(), "cache").unwrap(), net);
            }
        }
    }
}
