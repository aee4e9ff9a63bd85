//! Directed Web graph, line-oriented ingestion and graph views.
//!
//! Pages are addressed by dense [`PageId`]s; URLs only show up at the I/O
//! boundary through [`UrlTable`]. The adjacency itself lives in [`Digraph`],
//! a compressed sparse row structure that is also used for the per-keyword
//! subnetworks (there with local node indices).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::subnet::KeywordSet;

/// Dense index of a page in the node table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PageId(pub u32);

impl PageId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Self {
        PageId(u32::try_from(index).expect("page index exceeds u32"))
    }
}

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Counts of edges removed while building a [`Digraph`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeCleanup {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Immutable directed graph in CSR form.
///
/// Edges are stored sorted by `(src, dst)`; an edge id is its position in
/// that order, so out-edges of a node form a contiguous id range and every
/// neighbor list comes out sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    node_count: usize,
    edges: Vec<(u32, u32)>,
    out_offsets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_edge_ids: Vec<u32>,
}

impl Digraph {
    /// Builds a graph on `node_count` nodes. Self-loops and duplicate edges
    /// are dropped and counted; out-of-range endpoints are an error.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<(Self, EdgeCleanup)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut cleanup = EdgeCleanup::default();
        let mut list = Vec::new();
        for (src, dst) in edges {
            for id in [src, dst] {
                if id >= node_count {
                    return Err(Error::UnknownPage(id as u64));
                }
            }
            if src == dst {
                cleanup.self_loops += 1;
                continue;
            }
            list.push((src as u32, dst as u32));
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        cleanup.duplicates = before - list.len();
        Ok((Self::from_sorted(node_count, list), cleanup))
    }

    fn from_sorted(node_count: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut out_offsets = vec![0usize; node_count + 1];
        let mut in_offsets = vec![0usize; node_count + 1];
        for &(s, d) in &edges {
            out_offsets[s as usize + 1] += 1;
            in_offsets[d as usize + 1] += 1;
        }
        for i in 0..node_count {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        // edges are sorted by (src, dst), so filling in edge-id order keeps
        // each in-list sorted by src
        let mut cursor = in_offsets.clone();
        let mut in_edge_ids = vec![0u32; edges.len()];
        for (e, &(_, d)) in edges.iter().enumerate() {
            in_edge_ids[cursor[d as usize]] = e as u32;
            cursor[d as usize] += 1;
        }
        Digraph {
            node_count,
            edges,
            out_offsets,
            in_offsets,
            in_edge_ids,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        let (s, d) = self.edges[e];
        (s as usize, d as usize)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(s, d)| (s as usize, d as usize))
    }

    pub fn out_edge_ids(&self, x: usize) -> Range<usize> {
        self.out_offsets[x]..self.out_offsets[x + 1]
    }

    pub fn in_edge_ids(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_edge_ids[self.in_offsets[x]..self.in_offsets[x + 1]]
            .iter()
            .map(|&e| e as usize)
    }

    pub fn successors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[self.out_edge_ids(x)].iter().map(|&(_, d)| d as usize)
    }

    pub fn predecessors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_edge_ids(x).map(move |e| self.edges[e].0 as usize)
    }

    pub fn out_degree(&self, x: usize) -> usize {
        self.out_offsets[x + 1] - self.out_offsets[x]
    }

    pub fn in_degree(&self, x: usize) -> usize {
        self.in_offsets[x + 1] - self.in_offsets[x]
    }

    pub fn find_edge(&self, src: usize, dst: usize) -> Option<usize> {
        let range = self.out_edge_ids(src);
        let start = range.start;
        self.edges[range]
            .binary_search(&(src as u32, dst as u32))
            .ok()
            .map(|i| start + i)
    }

    /// Subgraph induced by `nodes` (sorted, distinct), relabelled so that
    /// `nodes[i]` becomes node `i`.
    pub fn induced(&self, nodes: &[usize]) -> Digraph {
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        let local: HashMap<usize, u32> = nodes.iter().enumerate().map(|(i, &n)| (n, i as u32)).collect();
        let mut edges = Vec::new();
        for (i, &n) in nodes.iter().enumerate() {
            for d in self.successors(n) {
                if let Some(&j) = local.get(&d) {
                    edges.push((i as u32, j));
                }
            }
        }
        // successors are sorted and the relabelling is monotone
        Self::from_sorted(nodes.len(), edges)
    }
}

/// A read-only view of a [`Digraph`], optionally reversed and with a set of
/// nodes removed.
#[derive(Clone, Debug)]
pub struct GraphView<'a> {
    graph: &'a Digraph,
    reversed: bool,
    excluded: BTreeSet<usize>,
}

impl<'a> GraphView<'a> {
    pub fn new(graph: &'a Digraph) -> Self {
        GraphView {
            graph,
            reversed: false,
            excluded: BTreeSet::new(),
        }
    }

    /// Flips edge direction. Reversing twice gives back the original view.
    pub fn reversed(mut self) -> Self {
        self.reversed = !self.reversed;
        self
    }

    pub fn excluding<I: IntoIterator<Item = usize>>(mut self, nodes: I) -> Self {
        self.excluded.extend(nodes);
        self
    }

    pub fn graph(&self) -> &'a Digraph {
        self.graph
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn excluded(&self) -> &BTreeSet<usize> {
        &self.excluded
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn is_active(&self, x: usize) -> bool {
        x < self.graph.node_count() && !self.excluded.contains(&x)
    }

    fn check(&self, x: usize) -> Result<()> {
        if x >= self.graph.node_count() {
            Err(Error::UnknownPage(x as u64))
        } else if self.excluded.contains(&x) {
            Err(Error::ExcludedPage(x as u64))
        } else {
            Ok(())
        }
    }

    pub fn out_neighbors(&self, x: usize) -> Result<Vec<usize>> {
        self.check(x)?;
        Ok(self.successors_of(x).collect())
    }

    pub fn in_neighbors(&self, x: usize) -> Result<Vec<usize>> {
        self.check(x)?;
        Ok(self.predecessors_of(x).collect())
    }

    /// Successors under this view; `x` itself is not validated.
    pub(crate) fn successors_of(&self, x: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        let it: Box<dyn Iterator<Item = usize> + '_> = if self.reversed {
            Box::new(self.graph.predecessors(x))
        } else {
            Box::new(self.graph.successors(x))
        };
        Box::new(it.filter(move |y| !self.excluded.contains(y)))
    }

    pub(crate) fn predecessors_of(&self, x: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        let it: Box<dyn Iterator<Item = usize> + '_> = if self.reversed {
            Box::new(self.graph.successors(x))
        } else {
            Box::new(self.graph.predecessors(x))
        };
        Box::new(it.filter(move |y| !self.excluded.contains(y)))
    }
}

/// Page URLs indexed by [`PageId`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UrlTable {
    urls: Vec<String>,
    index: HashMap<String, PageId>,
}

impl UrlTable {
    pub fn from_urls<I: IntoIterator<Item = String>>(urls: I) -> Result<Self> {
        let urls: Vec<String> = urls.into_iter().collect();
        let mut index = HashMap::with_capacity(urls.len());
        for (i, u) in urls.iter().enumerate() {
            if index.insert(u.clone(), PageId::from_index(i)).is_some() {
                return Err(Error::invalid(format!("duplicate url `{u}`")));
            }
        }
        Ok(UrlTable { urls, index })
    }

    /// Parses `id<TAB>url` lines. Ids must cover `0..n` exactly once.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut by_id: BTreeMap<u32, (String, usize)> = BTreeMap::new();
        for (line_no, line) in content_lines(text) {
            let (id, url) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source_name, line_no, "expected `id<TAB>url`"))?;
            let id: u32 = id
                .trim()
                .parse()
                .map_err(|_| Error::parse(source_name, line_no, format!("bad page id `{id}`")))?;
            let url = url.trim();
            if url.is_empty() || url.contains('\t') {
                return Err(Error::parse(source_name, line_no, "bad url field"));
            }
            if by_id.insert(id, (url.to_string(), line_no)).is_some() {
                return Err(Error::parse(source_name, line_no, format!("duplicate page id {id}")));
            }
        }
        let mut urls = Vec::with_capacity(by_id.len());
        let mut index = HashMap::with_capacity(by_id.len());
        for (expected, (id, (url, line_no))) in by_id.into_iter().enumerate() {
            if id as usize != expected {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("page ids must be dense from 0; id {expected} is missing"),
                ));
            }
            if index.insert(url.clone(), PageId(id)).is_some() {
                return Err(Error::parse(source_name, line_no, format!("duplicate url `{url}`")));
            }
            urls.push(url);
        }
        Ok(UrlTable { urls, index })
    }

    pub fn len(&self) -> usize {
        self.urls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.urls.is_empty()
    }

    pub fn url(&self, id: PageId) -> Option<&str> {
        self.urls.get(id.index()).map(String::as_str)
    }

    pub fn id(&self, url: &str) -> Option<PageId> {
        self.index.get(url).copied()
    }

    pub fn lookup(&self, url: &str) -> Result<PageId> {
        self.id(url).ok_or_else(|| Error::UnknownUrl(url.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, u) in self.urls.iter().enumerate() {
            out.push_str(&format!("{i}\t{u}\n"));
        }
        out
    }
}

/// Parses `src_id dst_id` lines against a node table of `node_count` pages.
pub fn parse_edges(text: &str, source_name: &str, node_count: usize) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (line_no, line) in content_lines(text) {
        let mut fields = line.split_whitespace();
        let (Some(src), Some(dst), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(source_name, line_no, "expected `src_id dst_id`"));
        };
        let mut pair = [0usize; 2];
        for (slot, field) in pair.iter_mut().zip([src, dst]) {
            let id: u64 = field
                .parse()
                .map_err(|_| Error::parse(source_name, line_no, format!("bad page id `{field}`")))?;
            if id >= node_count as u64 {
                return Err(Error::DanglingEndpoint { line: line_no, id });
            }
            *slot = id as usize;
        }
        edges.push((pair[0], pair[1]));
    }
    Ok(edges)
}

/// Keyword to page sets (`P_w`), with optional per-page significance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeywordIndex {
    keywords: BTreeMap<String, BTreeMap<PageId, Option<f64>>>,
    by_page: BTreeMap<PageId, BTreeSet<String>>,
}

impl KeywordIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, keyword: &str, page: PageId, gamma: Option<f64>) -> Result<()> {
        if keyword.is_empty() || keyword.contains(['\t', '\n', '\r']) {
            return Err(Error::invalid(format!("bad keyword `{keyword}`")));
        }
        if let Some(g) = gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::invalid(format!("gamma {g} outside (0, 1]")));
            }
        }
        let pages = self.keywords.entry(keyword.to_string()).or_default();
        match pages.get(&page) {
            Some(prev) if *prev != gamma => {
                return Err(Error::invalid(format!(
                    "conflicting gamma for keyword `{keyword}` on page {page}"
                )));
            }
            Some(_) => {}
            None => {
                pages.insert(page, gamma);
                self.by_page.entry(page).or_default().insert(keyword.to_string());
            }
        }
        Ok(())
    }

    /// Parses `keyword<TAB>page_id[<TAB>gamma]` lines.
    pub fn parse(text: &str, source_name: &str, node_count: usize) -> Result<Self> {
        let mut index = KeywordIndex::new();
        for (line_no, line) in content_lines(text) {
            let fields: Vec<&str> = line.split('\t').collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    "expected `keyword<TAB>page_id[<TAB>gamma]`",
                ));
            }
            let keyword = fields[0].trim();
            let id: u64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(source_name, line_no, format!("bad page id `{}`", fields[1])))?;
            if id >= node_count as u64 {
                return Err(Error::parse(source_name, line_no, format!("unknown page id {id}")));
            }
            let gamma = match fields.get(2) {
                Some(g) => Some(
                    g.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(source_name, line_no, format!("bad gamma `{g}`")))?,
                ),
                None => None,
            };
            index
                .insert(keyword, PageId(id as u32), gamma)
                .map_err(|e| Error::parse(source_name, line_no, e.to_string()))?;
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.keywords.keys().map(String::as_str)
    }

    /// `P_w`: pages containing `keyword`.
    pub fn pages(&self, keyword: &str) -> Option<impl Iterator<Item = PageId> + '_> {
        self.keywords.get(keyword).map(|p| p.keys().copied())
    }

    pub fn contains(&self, keyword: &str, page: PageId) -> bool {
        self.keywords.get(keyword).is_some_and(|p| p.contains_key(&page))
    }

    /// Significance of `keyword` for `page`; uniform `1/|K|` unless the
    /// keyword file gave an explicit weight.
    pub fn gamma(&self, keyword: &str, page: PageId) -> Option<f64> {
        let explicit = *self.keywords.get(keyword)?.get(&page)?;
        Some(explicit.unwrap_or(1.0 / self.keywords.len() as f64))
    }

    /// `K_u`: every keyword whose page set contains `page`, most significant
    /// first.
    pub fn keyword_set(&self, page: PageId) -> KeywordSet {
        let entries = self
            .by_page
            .get(&page)
            .into_iter()
            .flatten()
            .map(|w| (w.clone(), self.gamma(w, page).expect("indexed keyword")));
        KeywordSet::from_unordered(entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (w, pages) in &self.keywords {
            for (p, g) in pages {
                match g {
                    Some(g) => out.push_str(&format!("{w}\t{p}\t{g:?}\n")),
                    None => out.push_str(&format!("{w}\t{p}\n")),
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Drop edges whose endpoints share a URL host.
    pub drop_intra_host: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub self_loops: usize,
    pub duplicates: usize,
    pub intra_host: usize,
}

/// The raw Web snapshot: URL table, link graph and keyword index.
#[derive(Clone, Debug)]
pub struct WebGraph {
    urls: UrlTable,
    graph: Digraph,
    keywords: KeywordIndex,
    report: IngestReport,
}

impl WebGraph {
    pub fn new(
        urls: UrlTable,
        edges: Vec<(usize, usize)>,
        keywords: KeywordIndex,
        options: LoadOptions,
    ) -> Result<Self> {
        let mut report = IngestReport::default();
        let edges: Vec<(usize, usize)> = if options.drop_intra_host {
            let hosts: Vec<Option<String>> = (0..urls.len())
                .map(|i| host_of(urls.url(PageId::from_index(i)).unwrap_or_default()))
                .collect();
            let before = edges.len();
            let kept: Vec<_> = edges
                .into_iter()
                .filter(|&(s, d)| s == d || hosts[s].is_none() || hosts[s] != hosts[d])
                .collect();
            report.intra_host = before - kept.len();
            kept
        } else {
            edges
        };
        let (graph, cleanup) = Digraph::from_edges(urls.len(), edges)?;
        report.self_loops = cleanup.self_loops;
        report.duplicates = cleanup.duplicates;
        if report.self_loops > 0 {
            warn!("dropped {} self-loop edge(s)", report.self_loops);
        }
        if report.duplicates > 0 {
            warn!("dropped {} duplicate edge(s)", report.duplicates);
        }
        if report.intra_host > 0 {
            warn!("dropped {} intra-host edge(s)", report.intra_host);
        }
        Ok(WebGraph {
            urls,
            graph,
            keywords,
            report,
        })
    }

    /// Builds a graph from the text of the three input files.
    pub fn from_text(nodes: &str, edges: &str, keywords: Option<&str>, options: LoadOptions) -> Result<Self> {
        let urls = UrlTable::parse(nodes, "nodes")?;
        let edges = parse_edges(edges, "edges", urls.len())?;
        let keywords = match keywords {
            Some(text) => KeywordIndex::parse(text, "keywords", urls.len())?,
            None => KeywordIndex::new(),
        };
        Self::new(urls, edges, keywords, options)
    }

    pub fn urls(&self) -> &UrlTable {
        &self.urls
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn keywords(&self) -> &KeywordIndex {
        &self.keywords
    }

    pub fn report(&self) -> IngestReport {
        self.report
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn view(&self) -> GraphView<'_> {
        GraphView::new(&self.graph)
    }

    pub fn out_neighbors(&self, x: PageId) -> Result<Vec<PageId>> {
        Ok(self
            .view()
            .out_neighbors(x.index())?
            .into_iter()
            .map(PageId::from_index)
            .collect())
    }

    /// Edge file text in canonical (sorted) order.
    pub fn edges_to_text(&self) -> String {
        let mut out = String::new();
        for (s, d) in self.graph.edges() {
            out.push_str(&format!("{s} {d}\n"));
        }
        out
    }
}

/// Reads the node, edge and (optional) keyword files.
pub fn load_edge_list(
    node_file: &Path,
    edge_file: &Path,
    keyword_file: Option<&Path>,
    options: LoadOptions,
) -> Result<WebGraph> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
    let node_text = read(node_file)?;
    let edge_text = read(edge_file)?;
    let urls = UrlTable::parse(&node_text, &node_file.display().to_string())?;
    let edges = parse_edges(&edge_text, &edge_file.display().to_string(), urls.len())?;
    let keywords = match keyword_file {
        Some(p) => KeywordIndex::parse(&read(p)?, &p.display().to_string(), urls.len())?,
        None => KeywordIndex::new(),
    };
    WebGraph::new(urls, edges, keywords, options)
}

/// Keeps the `window` links on each side of the link to `core_page` in an
/// ordered outlink list of `anchor_page`.
pub fn limit_outlinks_near(
    anchor_page: PageId,
    core_page: PageId,
    ordered_outlinks: &[PageId],
    window: usize,
) -> Result<Vec<PageId>> {
    let pos = ordered_outlinks
        .iter()
        .position(|&p| p == core_page)
        .ok_or_else(|| Error::invalid(format!("page {anchor_page} does not link to {core_page}")))?;
    let start = pos.saturating_sub(window);
    let end = (pos + window + 1).min(ordered_outlinks.len());
    Ok(ordered_outlinks[start..end].to_vec())
}

fn host_of(u: &str) -> Option<String> {
    url::Url::parse(u).ok()?.host_str().map(str::to_ascii_lowercase)
}

/// Non-blank, non-comment lines with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}
