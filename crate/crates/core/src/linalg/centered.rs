use nalgebra::DMatrix;

use super::SymOperator;
use crate::graph::{AdjacencyMatrix, NodeSet};

/// The matrix `(A - shift)_{S x S}`: adjacency entries minus a scalar on every
/// entry of `S x S` (diagonal included), zero outside.
///
/// Vectors passed to [`SymOperator::apply`] are in compact coordinates, one
/// entry per member of `S` in ascending node order.
#[derive(Clone, Debug)]
pub struct CenteredOperator<'a> {
    a: &'a AdjacencyMatrix,
    members: Vec<usize>,
    shift: f64,
    scratch: Scratch,
}

#[derive(Clone, Debug, Default)]
struct Scratch {
    full: Vec<f64>,
    table: Vec<f64>,
}

const CHUNK: usize = 8;
const TABLE: usize = 1 << CHUNK;

impl<'a> CenteredOperator<'a> {
    pub fn new(a: &'a AdjacencyMatrix, s: &NodeSet, shift: f64) -> Self {
        Self::from_members(a, s.to_vec(), shift)
    }

    /// Operator centered at the empirical density `p_S`.
    pub fn at_density(a: &'a AdjacencyMatrix, s: &NodeSet) -> Self {
        let shift = if s.is_empty() {
            0.0
        } else {
            a.edge_mass_in(s) as f64 / (s.len() * s.len()) as f64
        };
        Self::new(a, s, shift)
    }

    pub(crate) fn from_members(a: &'a AdjacencyMatrix, members: Vec<usize>, shift: f64) -> Self {
        Self {
            a,
            members,
            shift,
            scratch: Scratch::default(),
        }
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn graph(&self) -> &AdjacencyMatrix {
        self.a
    }

    /// Dense `|S| x |S|` copy in compact coordinates.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.members.len();
        DMatrix::from_fn(m, m, |r, c| {
            let (i, j) = (self.members[r], self.members[c]);
            f64::from(u8::from(self.a.has_edge(i, j))) - self.shift
        })
    }

    /// Applies the operator to a vector over all `n` nodes; entries outside
    /// `S` are ignored on input and zero on output.
    pub fn apply_full(&mut self, x: &[f64], y: &mut [f64]) {
        let n = self.a.n();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        let xc: Vec<f64> = self.members.iter().map(|&i| x[i]).collect();
        let mut yc = vec![0.0; xc.len()];
        self.apply(&xc, &mut yc);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (&i, &v) in self.members.iter().zip(&yc) {
            y[i] = v;
        }
    }

    /// `A_{SxS} x` through byte-indexed subset-sum tables: for every block of
    /// eight columns the 256 partial sums of `x` are tabulated once, and each
    /// row then costs one lookup per byte of its bitset.
    fn adjacency_apply(&mut self, x: &[f64], y: &mut [f64]) {
        let n = self.a.n();
        let chunks = n.div_ceil(CHUNK);
        let Scratch { full, table } = &mut self.scratch;
        full.clear();
        full.resize(chunks * CHUNK, 0.0);
        for (&i, &v) in self.members.iter().zip(x) {
            full[i] = v;
        }
        table.clear();
        table.resize(chunks * TABLE, 0.0);
        for c in 0..chunks {
            let xs = &full[c * CHUNK..(c + 1) * CHUNK];
            let t = &mut table[c * TABLE..(c + 1) * TABLE];
            for b in 1..TABLE {
                let low = b.trailing_zeros() as usize;
                t[b] = t[b & (b - 1)] + xs[low];
            }
        }
        for (out, &i) in y.iter_mut().zip(&self.members) {
            let row = self.a.row(i);
            let mut acc = 0.0;
            let mut c = 0usize;
            'row: for &word in row {
                let mut w = word;
                for _ in 0..8 {
                    if c >= chunks {
                        break 'row;
                    }
                    acc += table[c * TABLE + (w & 0xff) as usize];
                    w >>= 8;
                    c += 1;
                }
            }
            *out = acc;
        }
    }
}

impl SymOperator for CenteredOperator<'_> {
    fn dim(&self) -> usize {
        self.members.len()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.members.len());
        self.adjacency_apply(x, y);
        let total: f64 = x.iter().sum();
        let offset = self.shift * total;
        y.iter_mut().for_each(|v| *v -= offset);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_er, GraphParams};
    use crate::rng::RandomStream;

    #[test]
    fn matvec_matches_dense_definition() {
        let mut rng = RandomStream::from_seed(21);
        for n in [1usize, 7, 64, 65, 140] {
            let a = sample_er(&GraphParams::new(n, 0.4), &mut rng).unwrap();
            let s = NodeSet::from_indices(n, (0..n).filter(|i| i % 3 != 1));
            let mut op = CenteredOperator::at_density(&a, &s);
            let dense = op.to_dense();
            let x: Vec<f64> = (0..op.dim()).map(|_| rng.uniform() - 0.5).collect();
            let mut y = vec![0.0; op.dim()];
            op.apply(&x, &mut y);
            let expect = &dense * nalgebra::DVector::from_column_slice(&x);
            for (u, v) in y.iter().zip(expect.iter()) {
                assert!((u - v).abs() < 1e-10, "n = {n}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn full_apply_zero_outside_set() {
        let a = AdjacencyMatrix::complete(6);
        let s = NodeSet::from_indices(6, [1, 2, 4]);
        let mut op = CenteredOperator::new(&a, &s, 0.25);
        let x = vec![1.0; 6];
        let mut y = vec![9.0; 6];
        op.apply_full(&x, &mut y);
        // Each member row: 2 neighbours in S minus 0.25 * 3.
        for i in 0..6 {
            let expect = if s.contains(i) { 2.0 - 0.75 } else { 0.0 };
            assert!((y[i] - expect).abs() < 1e-12);
        }
    }
}
