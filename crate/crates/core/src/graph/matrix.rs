use serde::{Deserialize, Serialize};

use super::bits::{mask_from, tail_mask, transpose64, words_for, WORD};
use super::NodeSet;
use crate::error::{Error, Result};

/// Symmetric, zero-diagonal adjacency matrix of an undirected graph.
///
/// Rows are stored as full bitsets (`n` rows of `ceil(n/64)` words), so row
/// slices, degree counts and row-restricted popcounts are word operations.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyMatrix {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for AdjacencyMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AdjacencyMatrix(n={}, edges={})", self.n, self.edge_count())
    }
}

impl AdjacencyMatrix {
    /// Graph on `n >= 1` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1, "a graph needs at least one node");
        let stride = words_for(n);
        Self {
            n,
            stride,
            bits: vec![0; n * stride],
        }
    }

    pub fn complete(n: usize) -> Self {
        Self::empty(n).complement()
    }

    /// Builds a graph from an edge list; rejects self-loops and out-of-range ids.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("node count must be at least 1".into()));
        }
        let mut a = Self::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Parameter(format!("edge ({i},{j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::Parameter(format!("self-loop ({i},{i}) not allowed")));
            }
            a.set_edge(i, j, true);
        }
        Ok(a)
    }

    /// Assembles a matrix whose rows already hold the strict upper triangle,
    /// mirroring it into the lower triangle with 64x64 block transposes.
    pub(crate) fn from_upper_rows(n: usize, mut bits: Vec<u64>) -> Self {
        let stride = words_for(n);
        debug_assert_eq!(bits.len(), n * stride);
        let blocks = stride;
        let mut block = [0u64; 64];
        for bi in 0..blocks {
            for bj in bi..blocks {
                for (r, slot) in block.iter_mut().enumerate() {
                    let row = bi * WORD + r;
                    *slot = if row < n { bits[row * stride + bj] } else { 0 };
                }
                transpose64(&mut block);
                for (c, &w) in block.iter().enumerate() {
                    let row = bj * WORD + c;
                    if row < n {
                        bits[row * stride + bi] |= w;
                    }
                }
            }
        }
        Self { n, stride, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row `i` as a bitset over `[n]`.
    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    /// Sets or clears the undirected edge `{i, j}`; panics on `i == j`.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j, "self-loops are not allowed");
        assert!(i < self.n && j < self.n, "node out of range");
        let (wi, bi) = (i * self.stride + j / WORD, j % WORD);
        let (wj, bj) = (j * self.stride + i / WORD, i % WORD);
        if present {
            self.bits[wi] |= 1 << bi;
            self.bits[wj] |= 1 << bj;
        } else {
            self.bits[wi] &= !(1 << bi);
            self.bits[wj] &= !(1 << bj);
        }
    }

    /// Degree of node `i` in the whole graph.
    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    /// Number of neighbours of `i` inside `s`.
    pub fn degree_in(&self, i: usize, s: &NodeSet) -> Result<usize> {
        self.check_set(s)?;
        if s.is_empty() {
            return Err(Error::Domain("degree inside an empty node set".into()));
        }
        Ok(self.degree_in_unchecked(i, s))
    }

    #[inline]
    pub(crate) fn degree_in_unchecked(&self, i: usize, s: &NodeSet) -> usize {
        self.row(i)
            .iter()
            .zip(s.words())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `degree_in(i, s) / |s|`.
    pub fn normalized_degree(&self, i: usize, s: &NodeSet) -> Result<f64> {
        let d = self.degree_in(i, s)?;
        Ok(d as f64 / s.len() as f64)
    }

    pub fn edge_count(&self) -> u64 {
        self.bits.iter().map(|w| u64::from(w.count_ones())).sum::<u64>() / 2
    }

    /// `sum_{i,j in s} A[i][j]`, i.e. twice the number of edges inside `s`.
    pub fn edge_mass_in(&self, s: &NodeSet) -> u64 {
        s.iter().map(|i| self.degree_in_unchecked(i, s) as u64).sum()
    }

    /// `p_S = sum_{i,j in S} A[i][j] / |S|^2`, diagonal zeros included in the
    /// denominator.
    pub fn empirical_density(&self, s: &NodeSet) -> Result<f64> {
        self.check_set(s)?;
        let size = s.len() as u64;
        if size == 0 {
            return Err(Error::Domain("empirical density of an empty node set".into()));
        }
        Ok(self.edge_mass_in(s) as f64 / (size * size) as f64)
    }

    /// Flips every off-diagonal entry.
    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        let tail = tail_mask(self.n);
        for i in 0..self.n {
            let row = &mut out.bits[i * self.stride..(i + 1) * self.stride];
            for w in row.iter_mut() {
                *w = !*w;
            }
            if let Some(last) = row.last_mut() {
                *last &= tail;
            }
            row[i / WORD] &= !(1 << (i % WORD));
        }
        out
    }

    /// Induced subgraph on `s`, relabelled to `0..|s|` in ascending order.
    pub fn induced(&self, s: &NodeSet) -> Result<Self> {
        self.check_set(s)?;
        let members = s.to_vec();
        if members.is_empty() {
            return Err(Error::Domain("induced subgraph on an empty node set".into()));
        }
        let m = members.len();
        let mut out = Self::empty(m);
        for (a, &i) in members.iter().enumerate() {
            let row = self.row(i);
            let dst = &mut out.bits[a * out.stride..(a + 1) * out.stride];
            for (b, &j) in members.iter().enumerate() {
                if (row[j / WORD] >> (j % WORD)) & 1 == 1 {
                    dst[b / WORD] |= 1 << (b % WORD);
                }
            }
        }
        Ok(out)
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            let row = self.row(i);
            let first = (i + 1) / WORD;
            (first..self.stride).flat_map(move |w| {
                let lo = if w == first { (i + 1) % WORD } else { 0 };
                let mut bits = row[w] & mask_from(lo);
                std::iter::from_fn(move || {
                    if bits == 0 {
                        None
                    } else {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        Some((i, w * WORD + b))
                    }
                })
            })
        })
    }

    /// Dense `n x n` 0/1 copy (row-major), for exact solvers and tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for (i, j) in self.edges() {
            out[i * self.n + j] = 1.0;
            out[j * self.n + i] = 1.0;
        }
        out
    }

    /// Checks symmetry and the zero diagonal; used by tests and debug asserts.
    pub fn is_well_formed(&self) -> bool {
        let tail = tail_mask(self.n);
        (0..self.n).all(|i| {
            let row = self.row(i);
            !self.has_edge(i, i)
                && row.last().is_none_or(|&w| w & !tail == 0)
                && (0..self.n).all(|j| self.has_edge(i, j) == self.has_edge(j, i))
        })
    }

    pub(crate) fn check_set(&self, s: &NodeSet) -> Result<()> {
        if s.universe() != self.n {
            return Err(Error::Parameter(format!(
                "node set over {} nodes used with a graph on {}",
                s.universe(),
                self.n
            )));
        }
        Ok(())
    }
}

/// Adjacency matrix of a directed graph without self-loops.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedAdjacencyMatrix {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for DirectedAdjacencyMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "DirectedAdjacencyMatrix(n={}, edges={})",
            self.n,
            self.edge_count()
        )
    }
}

impl DirectedAdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1, "a graph needs at least one node");
        let stride = words_for(n);
        Self {
            n,
            stride,
            bits: vec![0; n * stride],
        }
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("node count must be at least 1".into()));
        }
        let mut g = Self::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Parameter(format!("edge ({i},{j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::Parameter(format!("self-loop ({i},{i}) not allowed")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub(crate) fn from_rows(n: usize, bits: Vec<u64>) -> Self {
        let stride = words_for(n);
        debug_assert_eq!(bits.len(), n * stride);
        Self { n, stride, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.stride..(i + 1) * self.stride]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.bits[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j, "self-loops are not allowed");
        assert!(i < self.n && j < self.n, "node out of range");
        let w = i * self.stride + j / WORD;
        if present {
            self.bits[w] |= 1 << (j % WORD);
        } else {
            self.bits[w] &= !(1 << (j % WORD));
        }
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.out_degree(i)).collect()
    }

    pub fn edge_count(&self) -> u64 {
        self.bits.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Ordered edges `(i, j)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            let row = self.row(i);
            (0..self.stride).flat_map(move |w| {
                let mut bits = row[w];
                std::iter::from_fn(move || {
                    if bits == 0 {
                        None
                    } else {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        Some((i, w * WORD + b))
                    }
                })
            })
        })
    }

    pub(crate) fn stride(&self) -> usize {
        self.stride
    }
}

/// Keeps only directed edges `(i, j)` with `i < j` and reads them as
/// undirected edges. Maps a directed ER(p) sample to an undirected G(n, p)
/// sample.
pub fn directed_to_undirected(dg: &DirectedAdjacencyMatrix) -> AdjacencyMatrix {
    let n = dg.n();
    let stride = dg.stride();
    let mut bits = vec![0u64; n * stride];
    for i in 0..n {
        let src = dg.row(i);
        let first = (i + 1) / WORD;
        for w in first..stride {
            let mask = if w == first { mask_from((i + 1) % WORD) } else { u64::MAX };
            bits[i * stride + w] = src[w] & mask;
        }
    }
    AdjacencyMatrix::from_upper_rows(n, bits)
}
