//! SeekRel, FactRel and SurfRel.
//!
//! For each keyword shared by two pages `u` and `v`, witnesses are visited
//! nearest first. At each witness `x` the max flow `u → x` (without `v`) and
//! `v → x` (without `u`) is computed on the current capacities; the smaller
//! of the two is credited to `x`, and then that amount is taken out of the
//! capacities around `x` so that witnesses further down the list cannot count
//! the same flow again. FactRel mirrors this with flows out of the witness
//! and reduction on its outgoing edges.
//!
//! Per-keyword totals are weighted by `gamma(w) / maxwt(w)` and summed.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{max_flow, FlowResult, EPSILON};
use crate::format::sig;
use crate::subnet::{select_keywords, KeywordSet, Subnetwork, SubnetworkSet};
use crate::webgraph::{KeywordIndex, PageId};
use crate::witness::{make_fact_witness_list, make_seek_witness_list, Direction, WitnessList};

pub use crate::flow::CapacityMap;

/// Flow credited to one witness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessFlow {
    pub witness: PageId,
    /// Flow between `u` and the witness, `v` removed.
    pub flow_u: f64,
    /// Flow between `v` and the witness, `u` removed.
    pub flow_v: f64,
    /// `min(flow_u, flow_v)`.
    pub witnessed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessFlows {
    pub direction: Direction,
    pub entries: Vec<WitnessFlow>,
}

impl WitnessFlows {
    pub fn total(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc + e.witnessed)
    }
}

/// Takes the witnessed amount out of `edges` (the witness's incoming edges
/// for SeekRel, outgoing for FactRel). The smaller flow is subtracted as is;
/// the larger one is first scaled down to the smaller value.
fn reduce_edges(edges: &[usize], flows_u: &FlowResult, flows_v: &FlowResult, caps: &mut CapacityMap) {
    let (small, large) = if flows_u.value <= flows_v.value {
        (flows_u, flows_v)
    } else {
        (flows_v, flows_u)
    };
    if large.value <= 0.0 {
        return;
    }
    let ratio = small.value / large.value;
    // one combined subtraction keeps the result independent of which page
    // is `u` when the two flows tie
    for &e in edges {
        caps.subtract(e, small.edge_flows[e] + large.edge_flows[e] * ratio);
    }
}

/// Reduces the incoming capacity of SeekRel witness `x`.
pub fn reduce_seek_capacity(
    net: &Subnetwork,
    x: PageId,
    flows_u: &FlowResult,
    flows_v: &FlowResult,
    caps: &mut CapacityMap,
) -> Result<()> {
    let lx = net.require(x)?;
    let incoming: Vec<usize> = net.graph().in_edge_ids(lx).collect();
    reduce_edges(&incoming, flows_u, flows_v, caps);
    Ok(())
}

/// Reduces the outgoing capacity of FactRel witness `x`.
pub fn reduce_fact_capacity(
    net: &Subnetwork,
    x: PageId,
    flows_u: &FlowResult,
    flows_v: &FlowResult,
    caps: &mut CapacityMap,
) -> Result<()> {
    let lx = net.require(x)?;
    let outgoing: Vec<usize> = net.graph().out_edge_ids(lx).collect();
    reduce_edges(&outgoing, flows_u, flows_v, caps);
    Ok(())
}

/// Processes `list` in order against `caps`. With `reduce` off the
/// capacities are never touched, which is only useful for comparison.
/// `after_each` sees every credited witness and the capacities after its
/// reduction step.
pub fn process_witnesses<F>(
    net: &Subnetwork,
    list: &WitnessList,
    u: PageId,
    v: PageId,
    caps: &mut CapacityMap,
    reduce: bool,
    mut after_each: F,
) -> Result<WitnessFlows>
where
    F: FnMut(&WitnessFlow, &CapacityMap),
{
    let without_u = BTreeSet::from([u]);
    let without_v = BTreeSet::from([v]);
    let mut entries = Vec::with_capacity(list.len());
    for x in list.witnesses() {
        let (fu, fv) = match list.direction {
            Direction::Seek => (
                max_flow(net, caps, u, x, &without_v)?,
                max_flow(net, caps, v, x, &without_u)?,
            ),
            Direction::Fact => (
                max_flow(net, caps, x, u, &without_v)?,
                max_flow(net, caps, x, v, &without_u)?,
            ),
        };
        let credited = WitnessFlow {
            witness: x,
            flow_u: fu.value,
            flow_v: fv.value,
            witnessed: fu.value.min(fv.value),
        };
        if reduce {
            match list.direction {
                Direction::Seek => reduce_seek_capacity(net, x, &fu, &fv, caps)?,
                Direction::Fact => reduce_fact_capacity(net, x, &fu, &fv, caps)?,
            }
        }
        after_each(&credited, caps);
        entries.push(credited);
    }
    Ok(WitnessFlows {
        direction: list.direction,
        entries,
    })
}

/// SeekRel witness flows of `u` and `v` in one subnetwork.
pub fn flow_seek(net: &Subnetwork, d: u32, u: PageId, v: PageId) -> Result<WitnessFlows> {
    let list = make_seek_witness_list(net, d, u, v)?;
    let mut caps = CapacityMap::from_subnetwork(net);
    process_witnesses(net, &list, u, v, &mut caps, true, |_, _| {})
}

/// FactRel witness flows of `u` and `v` in one subnetwork.
pub fn flow_fact(net: &Subnetwork, d: u32, u: PageId, v: PageId) -> Result<WitnessFlows> {
    let list = make_fact_witness_list(net, d, u, v)?;
    let mut caps = CapacityMap::from_subnetwork(net);
    process_witnesses(net, &list, u, v, &mut caps, true, |_, _| {})
}

/// The four scores of a page pair.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RelScores {
    pub seekrel: f64,
    pub factrel: f64,
    pub surfrel_uv: f64,
    pub surfrel_vu: f64,
}

impl RelScores {
    pub fn scaled(self, factor: f64) -> Self {
        RelScores {
            seekrel: self.seekrel * factor,
            factrel: self.factrel * factor,
            surfrel_uv: self.surfrel_uv * factor,
            surfrel_vu: self.surfrel_vu * factor,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.seekrel, self.factrel, self.surfrel_uv, self.surfrel_vu]
    }

    /// `u_url<TAB>v_url<TAB>seekrel<TAB>factrel<TAB>surfrel_uv<TAB>surfrel_vu`
    pub fn to_line(&self, u_url: &str, v_url: &str) -> String {
        let [a, b, c, d] = self.as_array().map(|x| sig(x, 6));
        format!("{u_url}\t{v_url}\t{a}\t{b}\t{c}\t{d}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScoreParams {
    /// Keywords kept per pair.
    pub k: usize,
    /// Witness search depth.
    pub d: u32,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams { k: 5, d: 3 }
    }
}

impl ScoreParams {
    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 {
            return Err(Error::invalid("k and d must be at least 1"));
        }
        Ok(())
    }
}

/// What to rank by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Seek,
    Fact,
    /// SurfRel from the target to the candidate.
    SurfForward,
    /// SurfRel from the candidate to the target.
    SurfBackward,
}

/// Weighted per-keyword sum shared by all three scores. Keywords whose
/// subnetwork is degenerate or does not hold both pages contribute nothing.
fn aggregate<F>(subnets: &SubnetworkSet, keywords: &KeywordSet, u: PageId, v: PageId, mut per_keyword: F) -> Result<f64>
where
    F: FnMut(&Subnetwork) -> Result<f64>,
{
    if u == v {
        return Err(Error::invalid("relationship scores need two distinct pages"));
    }
    let mut total = 0.0;
    for (w, gamma) in keywords.entries() {
        let net = subnets.get(w).ok_or_else(|| Error::UnknownKeyword(w.clone()))?;
        if net.is_degenerate() || !net.contains(u) || !net.contains(v) {
            continue;
        }
        total += gamma / net.maxwt() * per_keyword(net)?;
    }
    Ok(total)
}

/// SeekRel of `u` and `v` over the top `k` keywords shared by `ku` and `kv`.
pub fn seekrel(
    subnets: &SubnetworkSet,
    ku: &KeywordSet,
    kv: &KeywordSet,
    k: usize,
    d: u32,
    u: PageId,
    v: PageId,
) -> Result<f64> {
    let chosen = select_keywords(ku, kv, k)?;
    aggregate(subnets, &chosen, u, v, |net| Ok(flow_seek(net, d, u, v)?.total()))
}

/// FactRel of `u` and `v` over the top `k` keywords shared by `ku` and `kv`.
pub fn factrel(
    subnets: &SubnetworkSet,
    ku: &KeywordSet,
    kv: &KeywordSet,
    k: usize,
    d: u32,
    u: PageId,
    v: PageId,
) -> Result<f64> {
    let chosen = select_keywords(ku, kv, k)?;
    aggregate(subnets, &chosen, u, v, |net| Ok(flow_fact(net, d, u, v)?.total()))
}

/// `(SurfRel(u → v), SurfRel(v → u))`: plain max flow on untouched
/// capacities.
pub fn surfrel(
    subnets: &SubnetworkSet,
    ku: &KeywordSet,
    kv: &KeywordSet,
    k: usize,
    u: PageId,
    v: PageId,
) -> Result<(f64, f64)> {
    let chosen = select_keywords(ku, kv, k)?;
    let none = BTreeSet::new();
    let direct = |net: &Subnetwork, from: PageId, to: PageId| -> Result<f64> {
        Ok(max_flow(net, &CapacityMap::from_subnetwork(net), from, to, &none)?.value)
    };
    let forward = aggregate(subnets, &chosen, u, v, |net| direct(net, u, v))?;
    let backward = aggregate(subnets, &chosen, u, v, |net| direct(net, v, u))?;
    Ok((forward, backward))
}

/// Scores below this are reported as no relationship.
pub const SCORE_FLOOR: f64 = EPSILON;

/// Scores closer than this count as tied.
pub const TIE_TOLERANCE: f64 = 1e-7;

/// Scores page pairs against prebuilt subnetworks, deriving each page's
/// keyword set from the keyword index.
#[derive(Clone, Copy, Debug)]
pub struct Scorer<'a> {
    subnets: &'a SubnetworkSet,
    keywords: &'a KeywordIndex,
    params: ScoreParams,
}

impl<'a> Scorer<'a> {
    pub fn new(subnets: &'a SubnetworkSet, keywords: &'a KeywordIndex, params: ScoreParams) -> Result<Self> {
        params.validate()?;
        Ok(Scorer {
            subnets,
            keywords,
            params,
        })
    }

    pub fn params(&self) -> ScoreParams {
        self.params
    }

    /// The keywords a pair is scored over.
    pub fn selected_keywords(&self, u: PageId, v: PageId) -> Result<KeywordSet> {
        select_keywords(
            &self.keywords.keyword_set(u),
            &self.keywords.keyword_set(v),
            self.params.k,
        )
    }

    pub fn seekrel(&self, u: PageId, v: PageId) -> Result<f64> {
        let (ku, kv) = (self.keywords.keyword_set(u), self.keywords.keyword_set(v));
        seekrel(self.subnets, &ku, &kv, self.params.k, self.params.d, u, v)
    }

    pub fn factrel(&self, u: PageId, v: PageId) -> Result<f64> {
        let (ku, kv) = (self.keywords.keyword_set(u), self.keywords.keyword_set(v));
        factrel(self.subnets, &ku, &kv, self.params.k, self.params.d, u, v)
    }

    pub fn surfrel(&self, u: PageId, v: PageId) -> Result<(f64, f64)> {
        let (ku, kv) = (self.keywords.keyword_set(u), self.keywords.keyword_set(v));
        surfrel(self.subnets, &ku, &kv, self.params.k, u, v)
    }

    pub fn scores(&self, u: PageId, v: PageId) -> Result<RelScores> {
        let (surfrel_uv, surfrel_vu) = self.surfrel(u, v)?;
        Ok(RelScores {
            seekrel: self.seekrel(u, v)?,
            factrel: self.factrel(u, v)?,
            surfrel_uv,
            surfrel_vu,
        })
    }

    /// Score of `candidate` relative to `target` under `relation`.
    pub fn score(&self, target: PageId, candidate: PageId, relation: Relation) -> Result<f64> {
        match relation {
            Relation::Seek => self.seekrel(target, candidate),
            Relation::Fact => self.factrel(target, candidate),
            Relation::SurfForward => Ok(self.surfrel(target, candidate)?.0),
            Relation::SurfBackward => Ok(self.surfrel(target, candidate)?.1),
        }
    }

    /// `1000 × maxwt` of the most significant keyword shared by the pair.
    /// With a single keyword this turns scores back into raw flow ×1000.
    pub fn display_scale(&self, u: PageId, v: PageId) -> Result<f64> {
        let chosen = self.selected_keywords(u, v)?;
        let top = chosen.keywords().next().and_then(|w| self.subnets.get(w));
        Ok(top.map_or(1000.0, |net| 1000.0 * net.maxwt()))
    }

    /// Pages sharing at least one keyword with `target`.
    pub fn candidates(&self, target: PageId) -> BTreeSet<PageId> {
        let mut out = BTreeSet::new();
        for w in self.keywords.keyword_set(target).keywords() {
            if let Some(pages) = self.keywords.pages(w) {
                out.extend(pages);
            }
        }
        out.remove(&target);
        out
    }

    fn all_scores(&self, target: PageId, relation: Relation) -> Result<Vec<(PageId, f64)>> {
        let candidates: Vec<PageId> = self.candidates(target).into_iter().collect();
        let scored: Result<Vec<(PageId, f64)>> = candidates
            .par_iter()
            .map(|&c| self.score(target, c, relation).map(|s| (c, s)))
            .collect();
        Ok(scored?.into_iter().filter(|&(_, s)| s > SCORE_FLOOR).collect())
    }

    /// Top `n` pages related to `target`, best first. Pages without any
    /// relationship are left out; near-equal scores are ordered by page id.
    pub fn rank_related(&self, target: PageId, relation: Relation, n: usize) -> Result<Vec<(PageId, f64)>> {
        let mut scored = self.all_scores(target, relation)?;
        let bucket = |s: f64| (s / TIE_TOLERANCE).round() as i64;
        scored.sort_by(|a, b| bucket(b.1).cmp(&bucket(a.1)).then(a.0.cmp(&b.0)));
        scored.truncate(n);
        Ok(scored)
    }

    /// Every page tied for the best positive score, in id order.
    pub fn high_scorers(&self, target: PageId, relation: Relation) -> Result<Vec<PageId>> {
        let scored = self.all_scores(target, relation)?;
        let best = scored.iter().map(|&(_, s)| s).fold(0.0, f64::max);
        Ok(scored
            .into_iter()
            .filter(|&(_, s)| best - s <= TIE_TOLERANCE)
            .map(|(p, _)| p)
            .collect())
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::hits::HitsOptions;
    use crate::subnet::{build_all, BuildOptions};
    use crate::testutil::{arb_digraph, arb_web};
    use crate::webgraph::Digraph;
    use crate::witness::WitnessEntry;
    use proptest::prelude::*;

    /// `u = 0` and `v = 1` both link only to the near witness `2`; every
    /// far witness `3..` hangs below it, so all flow to them transits `2`.
    fn chain_net(far: usize, shortcuts: &[bool]) -> Subnetwork {
        let mut edges = vec![(0, 2), (1, 2), (2, 3)];
        for i in 3..2 + far {
            edges.push((i, i + 1));
        }
        for (i, _) in shortcuts.iter().enumerate().filter(|(_, &s)| s) {
            edges.push((2, 3 + i % far));
        }
        let (g, _) = Digraph::from_edges(3 + far, edges).unwrap();
        Subnetwork::from_graph("chain", &g, HitsOptions::default()).unwrap()
    }

    fn pair(g: &Digraph, u: usize, v: usize) -> Option<(PageId, PageId)> {
        let n = g.node_count();
        let (u, v) = (u % n, v % n);
        (u != v).then(|| (PageId::from_index(u), PageId::from_index(v)))
    }

    proptest! {
        #[test]
        fn scores_are_symmetric(web in arb_web(30), u in 0usize..30, v in 0usize..30) {
            let Some((u, v)) = pair(web.graph(), u, v) else { return Ok(()); };
            let subnets = build_all(&web, &BuildOptions::default()).unwrap();
            let scorer = Scorer::new(&subnets, web.keywords(), ScoreParams::default()).unwrap();
            prop_assert_eq!(scorer.seekrel(u, v).unwrap().to_bits(), scorer.seekrel(v, u).unwrap().to_bits());
            prop_assert_eq!(scorer.factrel(u, v).unwrap().to_bits(), scorer.factrel(v, u).unwrap().to_bits());
            let (uv, vu) = scorer.surfrel(u, v).unwrap();
            let (vu2, uv2) = scorer.surfrel(v, u).unwrap();
            prop_assert_eq!((uv, vu), (uv2, vu2));
        }

        #[test]
        fn reduction_never_adds_and_keeps_capacities_non_negative(
            g in arb_digraph(30), u in 0usize..30, v in 0usize..30, d in 1u32..4,
        ) {
            let Some((u, v)) = pair(&g, u, v) else { return Ok(()); };
            let net = Subnetwork::from_graph("p", &g, HitsOptions::default()).unwrap();
            for list in [
                make_seek_witness_list(&net, d, u, v).unwrap(),
                make_fact_witness_list(&net, d, u, v).unwrap(),
            ] {
                let mut non_negative = true;
                let mut caps = CapacityMap::from_subnetwork(&net);
                let reduced = process_witnesses(&net, &list, u, v, &mut caps, true, |_, c| {
                    non_negative &= c.values().iter().all(|&x| x >= 0.0);
                })
                .unwrap();
                let mut fresh = CapacityMap::from_subnetwork(&net);
                let plain = process_witnesses(&net, &list, u, v, &mut fresh, false, |_, _| {}).unwrap();
                prop_assert!(non_negative);
                prop_assert!(reduced.total() <= plain.total() + 1e-9);
                prop_assert_eq!(fresh, CapacityMap::from_subnetwork(&net));
            }
        }

        #[test]
        fn far_witnesses_behind_a_near_one_get_nothing(
            far in 1usize..6,
            shortcuts in proptest::collection::vec(any::<bool>(), 0..6),
            raw_caps in proptest::collection::vec(0.05..2.0f64, 32),
        ) {
            let net = chain_net(far, &shortcuts);
            let caps_in = raw_caps[..net.edge_count()].to_vec();
            let (u, v) = (PageId(0), PageId(1));
            let list = make_seek_witness_list(&net, 8, u, v).unwrap();
            prop_assert_eq!(list.entries[0].witness, PageId(2));
            prop_assert_eq!(list.len(), far + 1);

            let mut caps = CapacityMap::from_values(caps_in.clone()).unwrap();
            let flows = process_witnesses(&net, &list, u, v, &mut caps, true, |_, _| {}).unwrap();
            let near = caps_in[0].min(caps_in[1]);
            prop_assert!((flows.entries[0].witnessed - near).abs() < 1e-12);
            prop_assert!(flows.entries[1..].iter().all(|f| f.witnessed == 0.0));
            prop_assert!((flows.total() - near).abs() < 1e-12);

            let reversed = WitnessList {
                direction: list.direction,
                entries: list.entries.iter().rev().copied().collect::<Vec<WitnessEntry>>(),
            };
            let mut caps = CapacityMap::from_values(caps_in).unwrap();
            let naive = process_witnesses(&net, &reversed, u, v, &mut caps, false, |_, _| {}).unwrap();
            prop_assert!(naive.total() > flows.total());
        }
    }
}
