//! Node-corruption strategies.
//!
//! Every strategy picks a set `B` of corrupted nodes and may rewrite any
//! entry with at least one endpoint in `B`. Entries inside `F x F`, with
//! `F = [n] \ B`, are never touched.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::graph::{AdjacencyMatrix, DirectedAdjacencyMatrix, NodeSet};
use crate::lowerbound::{construct_coupling, operating_point, Pmf};
use crate::rng::RandomStream;

/// Which nodes were corrupted and how.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    pub corrupted: NodeSet,
    pub strategy: String,
    pub gamma_requested: f64,
    pub seed: u64,
    /// Set only by strategies whose `|B|` is random (degree rewiring) when
    /// the draw exceeded `gamma * n`.
    pub over_budget: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryOutcome<G = AdjacencyMatrix> {
    pub graph: G,
    pub record: CorruptionRecord,
}

/// `floor(gamma * n)`.
pub fn budget(n: usize, gamma: f64) -> usize {
    ((gamma * n as f64) + 1e-9).floor() as usize
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && (0.0..1.0).contains(&gamma)) {
        return Err(Error::Parameter(format!(
            "gamma must lie in [0, 1), got {gamma}"
        )));
    }
    Ok(())
}

fn record(b: NodeSet, strategy: &str, gamma: f64, rng: &RandomStream) -> CorruptionRecord {
    CorruptionRecord {
        corrupted: b,
        strategy: strategy.to_string(),
        gamma_requested: gamma,
        seed: rng.key(),
        over_budget: false,
    }
}

fn random_subset(n: usize, k: usize, rng: &mut RandomStream) -> NodeSet {
    let mut picked: Vec<usize> = index::sample(rng, n, k).into_vec();
    picked.sort_unstable();
    NodeSet::from_indices(n, picked)
}

/// The fixed-`B` rewiring behind [`fill_or_empty_adversary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillMode {
    Fill,
    Empty,
    /// One fair coin for the whole run chooses between fill and empty.
    Coin,
}

/// Sets (`present = true`) or clears every edge touching `b`.
pub fn saturate(g: &mut AdjacencyMatrix, b: &NodeSet, present: bool) {
    let n = g.n();
    for i in b.iter() {
        for j in 0..n {
            if j != i {
                g.set_edge(i, j, present);
            }
        }
    }
}

/// Uniform `floor(gamma n)`-subset `B`, then fill, empty, or coin-flip.
pub fn fill_or_empty_adversary(
    g: &AdjacencyMatrix,
    gamma: f64,
    mode: FillMode,
    rng: &mut RandomStream,
) -> Result<AdversaryOutcome> {
    check_gamma(gamma)?;
    let n = g.n();
    let b = random_subset(n, budget(n, gamma), rng);
    let fill = match mode {
        FillMode::Fill => true,
        FillMode::Empty => false,
        FillMode::Coin => rng.random::<bool>(),
    };
    let mut out = g.clone();
    saturate(&mut out, &b, fill);
    let name = match mode {
        FillMode::Fill => "fill",
        FillMode::Empty => "empty",
        FillMode::Coin => "coin",
    };
    Ok(AdversaryOutcome {
        graph: out,
        record: record(b, name, gamma, rng),
    })
}

/// The random partition used by the five-set strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct FiveSets {
    pub b: NodeSet,
    pub s0: NodeSet,
    pub s1: NodeSet,
    pub s2: NodeSet,
    pub s3: NodeSet,
}

/// Part sizes `(|B|, |S0|, |S1|, |S2|, |S3|)` for the five-set strategy.
pub fn five_set_sizes(n: usize, gamma: f64, c: f64) -> Result<[usize; 5]> {
    check_gamma(gamma)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Parameter(format!("c must be nonnegative, got {c}")));
    }
    if c * gamma >= 0.25 {
        return Err(Error::Parameter(format!(
            "five-set strategy needs c * gamma < 0.25, got {}",
            c * gamma
        )));
    }
    let b = budget(n, gamma);
    let s = ((c * gamma * n as f64) + 1e-9).floor() as usize;
    let r = n
        .checked_sub(b + 2 * s)
        .ok_or_else(|| Error::Parameter("five-set parts exceed n".into()))?;
    let s2 = (2 * r) / 3;
    Ok([b, s, s, s2, r - s2])
}

/// Draws the five-set partition from a uniform shuffle of the nodes.
pub fn five_set_partition(n: usize, gamma: f64, c: f64, rng: &mut RandomStream) -> Result<FiveSets> {
    let sizes = five_set_sizes(n, gamma, c)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut parts = Vec::with_capacity(5);
    let mut start = 0;
    for size in sizes {
        parts.push(NodeSet::from_indices(n, order[start..start + size].iter().copied()));
        start += size;
    }
    let mut it = parts.into_iter();
    let mut next = || it.next().expect("five parts");
    Ok(FiveSets {
        b: next(),
        s0: next(),
        s1: next(),
        s2: next(),
        s3: next(),
    })
}

/// Applies the six rewiring steps to a fixed partition.
pub fn apply_five_set(g: &AdjacencyMatrix, parts: &FiveSets, rng: &mut RandomStream) -> AdjacencyMatrix {
    let mut out = g.clone();
    // Clear every B-incident edge; this also covers B-S0.
    saturate(&mut out, &parts.b, false);
    let members: Vec<usize> = parts.b.to_vec();
    for &i in &members {
        for j in parts.s1.iter() {
            out.set_edge(i, j, true);
        }
        for j in parts.s2.iter() {
            out.set_edge(i, j, rng.random::<f64>() < 0.6);
        }
        for j in parts.s3.iter() {
            out.set_edge(i, j, rng.random::<f64>() < 0.3);
        }
    }
    for (x, &i) in members.iter().enumerate() {
        for &j in &members[x + 1..] {
            out.set_edge(i, j, rng.random::<f64>() < 0.6);
        }
    }
    out
}

/// Five-set strategy: a partition `B, S0, S1, S2, S3` chosen so that pruning
/// by degree removes `S0` and `S1` while the surviving `B` nodes bias the
/// remaining density by order `gamma^2`.
pub fn five_set_adversary(
    g: &AdjacencyMatrix,
    gamma: f64,
    c: f64,
    rng: &mut RandomStream,
) -> Result<AdversaryOutcome> {
    let parts = five_set_partition(g.n(), gamma, c, rng)?;
    let graph = apply_five_set(g, &parts, rng);
    Ok(AdversaryOutcome {
        graph,
        record: record(parts.b, "five-set", gamma, rng),
    })
}

/// Oblivious degree rewiring on a directed graph: each node joins `B`
/// independently with probability `0.15 gamma`; every `i` in `B` draws an
/// out-degree from `degree_dist` and gets a uniformly random out-neighbourhood
/// of that size.
pub fn degree_rewiring_adversary(
    dg: &DirectedAdjacencyMatrix,
    gamma: f64,
    degree_dist: &Pmf,
    rng: &mut RandomStream,
) -> Result<AdversaryOutcome<DirectedAdjacencyMatrix>> {
    check_gamma(gamma)?;
    let n = dg.n();
    if degree_dist.support_size() > n {
        return Err(Error::Parameter(format!(
            "degree pmf has support {} but out-degrees are at most {}",
            degree_dist.support_size(),
            n - 1
        )));
    }
    let dist = Pmf::new(degree_dist.mass().to_vec())?;
    let sampler = dist.sampler();
    let q = 0.15 * gamma;
    let b = NodeSet::from_indices(n, (0..n).filter(|_| rng.random::<f64>() < q));
    let mut out = dg.clone();
    for i in b.iter() {
        let d = sampler.sample(rng);
        for w in out.row_mut(i) {
            *w = 0;
        }
        for j in index::sample(rng, n - 1, d).into_iter() {
            let j = if j >= i { j + 1 } else { j };
            out.set_edge(i, j, true);
        }
    }
    let over_budget = b.len() as f64 > gamma * n as f64;
    let mut rec = record(b, "degree-rewire", gamma, rng);
    rec.over_budget = over_budget;
    Ok(AdversaryOutcome { graph: out, record: rec })
}

/// Verifies that `after` equals `before` on `F x F` for `F = [n] \ b`.
pub fn preserves_good_block(before: &AdjacencyMatrix, after: &AdjacencyMatrix, b: &NodeSet) -> bool {
    if before.n() != after.n() {
        return false;
    }
    let f = b.complement();
    let mask = f.words();
    let preserved = f.iter().all(|i| {
        before
            .row(i)
            .iter()
            .zip(after.row(i))
            .zip(mask)
            .all(|((x, y), m)| (x ^ y) & m == 0)
    });
    preserved
}

/// Runs a user strategy and checks its output. The callback receives the
/// graph, the budget `floor(gamma n)` and a stream, and returns `B` with the
/// rewired graph.
pub fn custom_adversary<F>(
    g: &AdjacencyMatrix,
    gamma: f64,
    name: &str,
    rng: &mut RandomStream,
    callback: F,
) -> Result<AdversaryOutcome>
where
    F: FnOnce(&AdjacencyMatrix, usize, &mut RandomStream) -> Result<(NodeSet, AdjacencyMatrix)>,
{
    check_gamma(gamma)?;
    let limit = budget(g.n(), gamma);
    let (b, out) = callback(g, limit, rng)?;
    if b.universe() != g.n() || out.n() != g.n() {
        return Err(Error::Contract("callback changed the node count".into()));
    }
    if b.len() > limit {
        return Err(Error::Budget {
            corrupted: b.len(),
            budget: limit,
        });
    }
    if !out.is_well_formed() {
        return Err(Error::Contract("callback produced a malformed matrix".into()));
    }
    if !preserves_good_block(g, &out, &b) {
        return Err(Error::Contract(
            "callback modified an edge between two uncorrupted nodes".into(),
        ));
    }
    Ok(AdversaryOutcome {
        graph: out,
        record: record(b, name, gamma, rng),
    })
}

/// Strategies addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    None,
    Fill,
    Empty,
    Coin,
    FiveSet { c: f64 },
    DegreeRewire,
}

impl Strategy {
    pub const NAMES: [&'static str; 6] = ["none", "fill", "empty", "coin", "five-set", "degree-rewire"];

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Fill => "fill",
            Self::Empty => "empty",
            Self::Coin => "coin",
            Self::FiveSet { .. } => "five-set",
            Self::DegreeRewire => "degree-rewire",
        }
    }

    /// Whether the strategy acts on a directed sample (the harness then
    /// draws `DG(n, p)` and symmetrizes the corrupted result).
    pub fn is_directed(&self) -> bool {
        matches!(self, Self::DegreeRewire)
    }

    /// Corrupts an undirected graph. `p` is the true edge probability.
    pub fn apply(
        &self,
        g: &AdjacencyMatrix,
        p: f64,
        gamma: f64,
        rng: &mut RandomStream,
    ) -> Result<AdversaryOutcome> {
        check_probability(p, "p")?;
        match *self {
            Self::None => {
                check_gamma(gamma)?;
                Ok(AdversaryOutcome {
                    graph: g.clone(),
                    record: record(NodeSet::empty(g.n()), "none", gamma, rng),
                })
            }
            Self::Fill => fill_or_empty_adversary(g, gamma, FillMode::Fill, rng),
            Self::Empty => fill_or_empty_adversary(g, gamma, FillMode::Empty, rng),
            Self::Coin => fill_or_empty_adversary(g, gamma, FillMode::Coin, rng),
            Self::FiveSet { c } => five_set_adversary(g, gamma, c, rng),
            Self::DegreeRewire => Err(Error::Parameter(
                "degree-rewire acts on directed graphs; use apply_directed".into(),
            )),
        }
    }

    /// Corrupts a directed graph. Only degree rewiring is directed; its
    /// degree law is the `P1` of the coupling between `p` and the shifted
    /// probability at the lower-bound operating point.
    pub fn apply_directed(
        &self,
        dg: &DirectedAdjacencyMatrix,
        p: f64,
        gamma: f64,
        rng: &mut RandomStream,
    ) -> Result<AdversaryOutcome<DirectedAdjacencyMatrix>> {
        match self {
            Self::DegreeRewire => {
                let n = dg.n();
                let p2 = operating_point(n, p, gamma);
                let coupling = construct_coupling(n, p, p2, 0.15 * gamma)?;
                degree_rewiring_adversary(dg, gamma, &coupling.dist1, rng)
            }
            other => Err(Error::Parameter(format!(
                "strategy {} acts on undirected graphs",
                other.name()
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Parses a strategy name; `five-set` accepts an optional `:c` suffix
    /// (default `c = 1`).
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let strategy = match name {
            "none" => Self::None,
            "fill" => Self::Fill,
            "empty" => Self::Empty,
            "coin" => Self::Coin,
            "five-set" => {
                let c = match arg {
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::Parameter(format!("bad five-set constant {v:?}")))?,
                    None => 1.0,
                };
                return Ok(Self::FiveSet { c });
            }
            "degree-rewire" => Self::DegreeRewire,
            _ => {
                return Err(Error::Unknown {
                    kind: "adversary".into(),
                    name: s.into(),
                })
            }
        };
        if arg.is_some() {
            return Err(Error::Parameter(format!("strategy {name} takes no argument")));
        }
        Ok(strategy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_directed_er, sample_er, GraphParams};

    fn er(n: usize, p: f64, seed: u64) -> AdjacencyMatrix {
        sample_er(&GraphParams::new(n, p), &mut RandomStream::from_seed(seed)).unwrap()
    }

    #[test]
    fn zero_gamma_is_identity() {
        let g = er(50, 0.4, 1);
        let mut rng = RandomStream::from_seed(2);
        for mode in [FillMode::Fill, FillMode::Empty, FillMode::Coin] {
            let out = fill_or_empty_adversary(&g, 0.0, mode, &mut rng).unwrap();
            assert_eq!(out.graph, g);
            assert!(out.record.corrupted.is_empty());
        }
        let out = five_set_adversary(&g, 0.0, 1.0, &mut rng).unwrap();
        assert_eq!(out.graph, g);
    }

    #[test]
    fn fill_saturates_corrupted_nodes() {
        let g = er(10, 0.3, 4);
        let out = fill_or_empty_adversary(&g, 0.2, FillMode::Fill, &mut RandomStream::from_seed(5)).unwrap();
        assert_eq!(out.record.corrupted.len(), 2);
        for i in out.record.corrupted.iter() {
            assert_eq!(out.graph.degree(i), 9);
        }
        assert!(preserves_good_block(&g, &out.graph, &out.record.corrupted));
    }

    #[test]
    fn five_set_structure() {
        let g = er(300, 0.5, 6);
        let mut rng = RandomStream::from_seed(7);
        let parts = five_set_partition(300, 0.1, 1.0, &mut rng).unwrap();
        let out = apply_five_set(&g, &parts, &mut rng);
        assert!(preserves_good_block(&g, &out, &parts.b));
        let bsize = parts.b.len();
        assert_eq!(bsize, 30);
        assert_eq!(parts.s0.len(), 30);
        assert_eq!(parts.s1.len(), 30);
        assert_eq!(parts.s2.len() + parts.s3.len(), 210);
        assert_eq!(parts.s2.len(), 140);
        let f = parts.b.complement();
        for i in parts.s1.iter() {
            assert_eq!(out.degree(i), bsize + g.degree_in(i, &f).unwrap());
        }
        for i in parts.s0.iter() {
            assert_eq!(out.degree(i), g.degree_in(i, &f).unwrap());
        }
        assert!(five_set_sizes(100, 0.3, 1.0).is_err());
    }

    #[test]
    fn degree_rewire_point_mass_zero() {
        let dg = sample_directed_er(&GraphParams::new(80, 0.5), &mut RandomStream::from_seed(3)).unwrap();
        let dist = Pmf::point_mass(80, 0);
        let out = degree_rewiring_adversary(&dg, 0.9, &dist, &mut RandomStream::from_seed(4)).unwrap();
        assert!(!out.record.corrupted.is_empty());
        for i in 0..80 {
            if out.record.corrupted.contains(i) {
                assert_eq!(out.graph.out_degree(i), 0);
            } else {
                assert_eq!(out.graph.row(i), dg.row(i));
            }
        }
        let bad = Pmf::point_mass(81, 0);
        assert!(degree_rewiring_adversary(&dg, 0.1, &bad, &mut RandomStream::from_seed(4)).is_err());
    }

    #[test]
    fn custom_callback_validation() {
        let g = er(20, 0.5, 8);
        let mut rng = RandomStream::from_seed(9);
        let same = custom_adversary(&g, 0.1, "id", &mut rng, |g, _, _| {
            Ok((NodeSet::empty(g.n()), g.clone()))
        })
        .unwrap();
        assert_eq!(same.graph, g);

        let flip = custom_adversary(&g, 0.1, "flip", &mut rng, |g, _, _| {
            let mut h = g.clone();
            h.set_edge(0, 1, !g.has_edge(0, 1));
            Ok((NodeSet::from_indices(g.n(), [5]), h))
        });
        assert!(matches!(flip, Err(Error::Contract(_))));

        let greedy = custom_adversary(&g, 0.1, "greedy", &mut rng, |g, _, _| {
            Ok((NodeSet::from_indices(g.n(), 0..3), g.clone()))
        });
        assert!(matches!(greedy, Err(Error::Budget { corrupted: 3, budget: 2 })));
    }

    #[test]
    fn strategy_names_round_trip() {
        for name in Strategy::NAMES {
            let s: Strategy = name.parse().unwrap();
            assert_eq!(s.name(), name);
        }
        assert_eq!("five-set:2".parse::<Strategy>().unwrap(), Strategy::FiveSet { c: 2.0 });
        assert!("zap".parse::<Strategy>().is_err());
    }
}
