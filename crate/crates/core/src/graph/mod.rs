//! Graph representations, Erdős–Rényi samplers and graph files.

pub(crate) mod bits;
mod io;
mod matrix;
mod nodeset;

use serde::{Deserialize, Serialize};

pub use io::{read_graph, read_graph_file, to_text, write_graph, write_graph_file, GraphFile, GraphFormat};
pub use matrix::{directed_to_undirected, AdjacencyMatrix, DirectedAdjacencyMatrix};
pub use nodeset::NodeSet;

use crate::error::{check_probability, Error, Result};
use crate::rng::RandomStream;
use bits::{mask_from, tail_mask, words_for, BernoulliWords, WORD};

/// Parameters of a (possibly corrupted) G(n, p) instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl GraphParams {
    pub fn new(n: usize, p: f64) -> Self {
        Self {
            n,
            p,
            gamma: 0.0,
            seed: 0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("node count must be at least 1".into()));
        }
        check_probability(self.p, "edge probability p")?;
        if !(self.gamma.is_finite() && (0.0..1.0).contains(&self.gamma)) {
            return Err(Error::Parameter(format!(
                "corruption fraction gamma must lie in [0, 1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Samples G(n, p): every unordered pair independently present with
/// probability `p`.
pub fn sample_er(params: &GraphParams, rng: &mut RandomStream) -> Result<AdjacencyMatrix> {
    params.validate()?;
    let n = params.n;
    let stride = words_for(n);
    let gen = BernoulliWords::new(params.p);
    let tail = tail_mask(n);
    let mut bits = vec![0u64; n * stride];
    for i in 0..n {
        let first = (i + 1) / WORD;
        for w in first..stride {
            let mut word = gen.next(rng);
            if w == first {
                word &= mask_from((i + 1) % WORD);
            }
            if w == stride - 1 {
                word &= tail;
            }
            bits[i * stride + w] = word;
        }
    }
    Ok(AdjacencyMatrix::from_upper_rows(n, bits))
}

/// Samples the directed model DG(n, p) over all ordered pairs `i != j`.
pub fn sample_directed_er(
    params: &GraphParams,
    rng: &mut RandomStream,
) -> Result<DirectedAdjacencyMatrix> {
    params.validate()?;
    let n = params.n;
    let stride = words_for(n);
    let gen = BernoulliWords::new(params.p);
    let tail = tail_mask(n);
    let mut bits = vec![0u64; n * stride];
    for i in 0..n {
        for w in 0..stride {
            let mut word = gen.next(rng);
            if w == stride - 1 {
                word &= tail;
            }
            if w == i / WORD {
                word &= !(1 << (i % WORD));
            }
            bits[i * stride + w] = word;
        }
    }
    Ok(DirectedAdjacencyMatrix::from_rows(n, bits))
}
