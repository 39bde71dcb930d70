use nalgebra::{DMatrix, SymmetricEigen};

use super::SymOperator;

/// Result of one Lanczos run, in the operator's own coordinates.
#[derive(Clone, Debug)]
pub(crate) struct RitzPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub matvecs: usize,
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Extreme-magnitude Ritz pair of the tridiagonal `T_k`.
fn extreme_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i].abs() > eig.eigenvalues[best].abs() {
            best = i;
        }
    }
    (
        eig.eigenvalues[best],
        eig.eigenvectors.column(best).iter().copied().collect(),
    )
}

const MIN_STEPS: usize = 6;
const WINDOW: usize = 4;

/// Lanczos with full reorthogonalization, targeting the eigenvalue of largest
/// magnitude. Stops when the residual bound `beta_k |y_k|` drops below
/// `tol |theta|`, when the extreme Ritz value stops growing (relative change
/// below `tol / 10` over a few steps), on an invariant subspace, or after
/// `max_steps` matvecs.
pub(crate) fn lanczos_extreme<O: SymOperator + ?Sized>(
    op: &mut O,
    start: &[f64],
    tol: f64,
    max_steps: usize,
) -> RitzPair {
    let m = op.dim();
    let steps = max_steps.clamp(1, m.max(1));
    let mut q = start.to_vec();
    let s = norm(&q);
    if s > 0.0 && s.is_finite() {
        q.iter_mut().for_each(|v| *v /= s);
    } else {
        q.iter_mut().for_each(|v| *v = 0.0);
        q[0] = 1.0;
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps.min(64));
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut w = vec![0.0; m];
    let mut scale = 0.0f64;
    let mut ritz = (0.0, vec![1.0]);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut matvecs = 0;

    for j in 0..steps {
        op.apply(&q, &mut w);
        matvecs += 1;
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        for _ in 0..2 {
            for v in basis.iter().chain(std::iter::once(&q)) {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        alpha.push(a);
        scale = scale.max(a.abs()).max(b);
        let invariant = b <= 1e-12 * scale.max(f64::MIN_POSITIVE) || scale == 0.0;
        let last = j + 1 == steps;
        let check = invariant || last || j + 1 >= MIN_STEPS && (j < 40 || j % 3 == 0);
        if check {
            ritz = extreme_ritz(&alpha, &beta);
            let theta = ritz.0.abs();
            residual = b * ritz.1.last().map_or(0.0, |y| y.abs());
            history.push(theta);
            let stagnant = history.len() > WINDOW
                && theta - history[history.len() - 1 - WINDOW] <= 0.1 * tol * theta;
            if invariant || residual <= tol * theta || stagnant {
                converged = true;
            }
        }
        basis.push(std::mem::take(&mut q));
        if converged || last {
            break;
        }
        beta.push(b);
        q = w.iter().map(|v| v / b).collect();
    }

    let mut vector = vec![0.0; m];
    for (coef, v) in ritz.1.iter().zip(&basis) {
        axpy(*coef, v, &mut vector);
    }
    let s = norm(&vector);
    if s > 0.0 {
        vector.iter_mut().for_each(|v| *v /= s);
    }
    RitzPair {
        value: ritz.0,
        vector,
        residual,
        converged,
        matvecs,
    }
}
