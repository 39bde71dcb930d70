//! Spectral norms and top eigenvectors of centered adjacency submatrices.
//!
//! Small problems go to a dense symmetric eigensolver. Large ones use
//! [`CenteredOperator`], which never materializes `(A - p_S)_{S x S}`: the
//! adjacency part is applied from the bitset rows and the constant shift is a
//! rank-one correction.

mod centered;
mod lanczos;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

pub use centered::CenteredOperator;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, NodeSet};
use crate::rng::{mix_words, RandomStream};

/// Largest dimension handed to the dense eigensolver.
pub const EXACT_CAP: usize = 512;

/// A symmetric linear map applied in place.
pub trait SymOperator {
    fn dim(&self) -> usize;
    fn apply(&mut self, x: &[f64], y: &mut [f64]);
}

/// Wraps a dense symmetric matrix as a [`SymOperator`].
#[derive(Clone, Copy, Debug)]
pub struct DenseOperator<'a> {
    m: &'a DMatrix<f64>,
}

impl<'a> DenseOperator<'a> {
    pub fn new(m: &'a DMatrix<f64>) -> Self {
        Self { m }
    }
}

impl SymOperator for DenseOperator<'_> {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.m.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Approximate top eigenpair of a [`CenteredOperator`].
#[derive(Clone, Debug, PartialEq)]
pub struct EigenEstimate {
    /// Signed Rayleigh quotient `v^T M v`.
    pub value: f64,
    /// Unit vector over all `n` nodes, zero outside `S`.
    pub vector: Vec<f64>,
    /// Estimated `|v^T M v| / ||M||`, from the final residual.
    pub quality: f64,
    pub converged: bool,
    pub matvecs: usize,
}

/// Iterative solver settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    /// Independent random starts; the best `|v^T M v|` is kept.
    pub restarts: usize,
    /// Hard limit on Krylov steps per start, on top of the default
    /// `50 log2(n) / tol` cap.
    pub max_steps: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 0.01,
            restarts: 8,
            max_steps: 600,
        }
    }
}

impl EigenOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 0.01) {
            return Err(Error::Parameter(format!(
                "eigen tolerance must lie in (0, 0.01], got {}",
                self.tol
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Parameter("at least one start is required".into()));
        }
        Ok(())
    }

    pub(crate) fn step_cap(&self, n: usize) -> usize {
        let log = (n.max(2) as f64).log2();
        ((50.0 * log / self.tol).ceil() as usize).min(self.max_steps.max(1))
    }
}

fn check_square(m: &DMatrix<f64>, cap: usize) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Parameter(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() > cap {
        return Err(Error::TooLarge {
            what: "dense eigensolve".into(),
            size: m.nrows(),
            cap,
        });
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Parameter(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// `max |lambda|` of a dense symmetric matrix of dimension at most [`EXACT_CAP`].
pub fn spectral_norm_exact(m: &DMatrix<f64>) -> Result<f64> {
    check_square(m, EXACT_CAP)?;
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let eig = SymmetricEigen::new(m.clone());
    Ok(eig.eigenvalues.amax())
}

/// Operator norm (largest singular value) of an arbitrary dense matrix.
pub fn operator_norm(m: &DMatrix<f64>) -> Result<f64> {
    let size = m.nrows().max(m.ncols());
    if size > EXACT_CAP {
        return Err(Error::TooLarge {
            what: "dense singular value solve".into(),
            size,
            cap: EXACT_CAP,
        });
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(m.singular_values().max())
}

/// Eigenpair of largest `|lambda|` (the first one on ties).
pub fn top_eigenpair_exact(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    check_square(m, EXACT_CAP)?;
    if m.nrows() == 0 {
        return Err(Error::Domain("eigenpair of an empty matrix".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i].abs() > eig.eigenvalues[best].abs() {
            best = i;
        }
    }
    Ok((eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned()))
}

/// Compact-coordinate result used internally by the spectral filter.
#[derive(Clone, Debug)]
pub(crate) struct CompactEigen {
    pub value: f64,
    pub vector: Vec<f64>,
    pub quality: f64,
    pub converged: bool,
    pub matvecs: usize,
}

fn gaussian_like(rng: &mut RandomStream, m: usize) -> Vec<f64> {
    // Sum of two uniforms: symmetric, no zero mass at the origin.
    (0..m)
        .map(|_| rng.random::<f64>() + rng.random::<f64>() - 1.0)
        .collect()
}

/// Iterative top eigenpair in compact coordinates. A warm start, if given,
/// is used (lightly perturbed) for the first run.
pub(crate) fn top_compact<O: SymOperator + ?Sized>(
    op: &mut O,
    opts: &EigenOptions,
    rng: &mut RandomStream,
    warm: Option<&[f64]>,
) -> CompactEigen {
    let m = op.dim();
    let cap = opts.step_cap(m);
    let mut best: Option<CompactEigen> = None;
    for r in 0..opts.restarts {
        let mut start = gaussian_like(rng, m);
        if let (0, Some(w)) = (r, warm) {
            let scale = 0.05 / (m as f64).sqrt();
            for (s, &v) in start.iter_mut().zip(w) {
                *s = v + scale * *s;
            }
        }
        let run = lanczos::lanczos_extreme(op, &start, opts.tol, cap);
        let theta = run.value.abs();
        let quality = if theta == 0.0 && run.residual == 0.0 {
            1.0
        } else {
            theta / (theta + run.residual)
        };
        let cand = CompactEigen {
            value: run.value,
            vector: run.vector,
            quality,
            converged: run.converged,
            matvecs: run.matvecs + best.as_ref().map_or(0, |b| b.matvecs),
        };
        best = Some(match best {
            Some(b) if b.value.abs() >= cand.value.abs() => CompactEigen {
                matvecs: cand.matvecs,
                ..b
            },
            _ => cand,
        });
    }
    best.expect("at least one restart")
}

/// Exact top eigenpair in compact coordinates (dense eigensolve).
pub(crate) fn top_compact_exact(op: &CenteredOperator<'_>) -> CompactEigen {
    let (value, v) = top_eigenpair_exact(&op.to_dense()).expect("size checked by caller");
    CompactEigen {
        value,
        vector: v.iter().copied().collect(),
        quality: 1.0,
        converged: true,
        matvecs: 0,
    }
}

fn expand(op: &CenteredOperator<'_>, compact: CompactEigen) -> EigenEstimate {
    let mut vector = vec![0.0; op.graph().n()];
    for (&i, &v) in op.members().iter().zip(&compact.vector) {
        vector[i] = v;
    }
    EigenEstimate {
        value: compact.value,
        vector,
        quality: compact.quality,
        converged: compact.converged,
        matvecs: compact.matvecs,
    }
}

/// Unit vector `v` with `|v^T M v|` close to `||M||`, by Lanczos iteration
/// with full reorthogonalization and 8 random starts.
///
/// Never fails on slow convergence: the best iterate is returned with
/// `converged = false`.
pub fn top_eigvec_approx(
    op: &mut CenteredOperator<'_>,
    tol: f64,
    rng: &mut RandomStream,
) -> Result<EigenEstimate> {
    top_eigvec_with(op, &EigenOptions::with_tol(tol), rng)
}

pub fn top_eigvec_with(
    op: &mut CenteredOperator<'_>,
    opts: &EigenOptions,
    rng: &mut RandomStream,
) -> Result<EigenEstimate> {
    opts.validate()?;
    if op.dim() == 0 {
        return Err(Error::Domain("eigenvector over an empty node set".into()));
    }
    let compact = top_compact(op, opts, rng, None);
    Ok(expand(op, compact))
}

/// Same solver on any symmetric operator; the vector has length `op.dim()`.
pub fn top_eigvec_operator<O: SymOperator + ?Sized>(
    op: &mut O,
    opts: &EigenOptions,
    rng: &mut RandomStream,
) -> Result<EigenEstimate> {
    opts.validate()?;
    if op.dim() == 0 {
        return Err(Error::Domain("eigenvector of an empty operator".into()));
    }
    let c = top_compact(op, opts, rng, None);
    Ok(EigenEstimate {
        value: c.value,
        vector: c.vector,
        quality: c.quality,
        converged: c.converged,
        matvecs: c.matvecs,
    })
}

/// `||(A - shift)_{S x S}||`: exact below [`EXACT_CAP`], otherwise iterative
/// with 1% tolerance from a stream derived from the set itself.
pub fn centered_norm(a: &AdjacencyMatrix, s: &NodeSet, shift: f64) -> Result<f64> {
    a.check_set(s)?;
    if s.is_empty() {
        return Err(Error::Domain("spectral norm over an empty node set".into()));
    }
    let mut op = CenteredOperator::new(a, s, shift);
    if op.dim() <= EXACT_CAP {
        return spectral_norm_exact(&op.to_dense());
    }
    let mut key = vec![a.n() as u64, shift.to_bits()];
    key.extend_from_slice(s.words());
    let mut rng = RandomStream::derive(mix_words(&key), &[], "centered-norm");
    let opts = EigenOptions::default();
    Ok(top_compact(&mut op, &opts, &mut rng, None).value.abs())
}

/// `||(A - p_S)_{S x S}||`.
pub fn spectral_norm_of_centered(a: &AdjacencyMatrix, s: &NodeSet) -> Result<f64> {
    let p_s = a.empirical_density(s)?;
    centered_norm(a, s, p_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_er, GraphParams};

    #[test]
    fn exact_small_cases() {
        assert_eq!(spectral_norm_exact(&DMatrix::zeros(4, 4)).unwrap(), 0.0);
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((spectral_norm_exact(&m).unwrap() - 1.0).abs() < 1e-12);
        let big = DMatrix::<f64>::zeros(EXACT_CAP + 1, EXACT_CAP + 1);
        assert!(matches!(
            spectral_norm_exact(&big),
            Err(Error::TooLarge { .. })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(spectral_norm_exact(&asym).is_err());
    }

    #[test]
    fn single_edge_centered_norm() {
        let a = AdjacencyMatrix::from_edges(2, [(0, 1)]).unwrap();
        let s = NodeSet::full(2);
        assert!((spectral_norm_of_centered(&a, &s).unwrap() - 1.0).abs() < 1e-12);
        let e = AdjacencyMatrix::empty(7);
        let s = NodeSet::from_indices(7, [1, 4, 5]);
        assert_eq!(spectral_norm_of_centered(&e, &s).unwrap(), 0.0);
        assert!(spectral_norm_of_centered(&e, &NodeSet::empty(7)).is_err());
    }

    #[test]
    fn complete_graph_top_vector() {
        let a = AdjacencyMatrix::complete(10);
        let s = NodeSet::full(10);
        let mut op = CenteredOperator::new(&a, &s, 0.0);
        let est = top_eigvec_approx(&mut op, 0.01, &mut RandomStream::from_seed(3)).unwrap();
        assert!((est.value - 9.0).abs() < 1e-9);
        for v in &est.vector {
            assert!((v.abs() - 10f64.sqrt().recip()).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_operator() {
        let a = AdjacencyMatrix::empty(5);
        let s = NodeSet::from_indices(5, [0, 2, 3]);
        let mut op = CenteredOperator::new(&a, &s, 0.0);
        let est = top_eigvec_approx(&mut op, 0.01, &mut RandomStream::from_seed(3)).unwrap();
        assert_eq!(est.value, 0.0);
        assert!((lanczos::norm(&est.vector) - 1.0).abs() < 1e-12);
        assert_eq!(est.vector[1], 0.0);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let a = AdjacencyMatrix::complete(4);
        let s = NodeSet::full(4);
        let mut op = CenteredOperator::new(&a, &s, 0.0);
        let mut rng = RandomStream::from_seed(1);
        assert!(top_eigvec_approx(&mut op, 0.5, &mut rng).is_err());
        assert!(top_eigvec_approx(&mut op, 0.0, &mut rng).is_err());
    }

    #[test]
    fn iterative_norm_on_large_set() {
        let mut rng = RandomStream::from_seed(8);
        let a = sample_er(&GraphParams::new(700, 0.3), &mut rng).unwrap();
        let s = NodeSet::from_indices(700, (0..700).filter(|i| i % 7 != 0));
        let p_s = a.empirical_density(&s).unwrap();
        let approx = centered_norm(&a, &s, p_s).unwrap();
        let dense = CenteredOperator::new(&a, &s, p_s).to_dense();
        let exact = SymmetricEigen::new(dense).eigenvalues.amax();
        assert!(approx <= exact * (1.0 + 1e-9));
        assert!(approx >= 0.99 * exact, "{approx} vs {exact}");
    }
}
