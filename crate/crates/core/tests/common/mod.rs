#![allow(dead_code)]

use robust_er::graph::AdjacencyMatrix;

/// Largest |eigenvalue| of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_norm(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i].abs()).fold(0.0, f64::max)
}

/// `(edges counted twice) / |S|^2` for the members of a bitmask.
pub fn mask_density(a: &AdjacencyMatrix, mask: u64) -> f64 {
    let members: Vec<usize> = (0..a.n()).filter(|i| mask >> i & 1 == 1).collect();
    let mut twice = 0usize;
    for &i in &members {
        for &j in &members {
            twice += usize::from(a.has_edge(i, j));
        }
    }
    twice as f64 / (members.len() * members.len()) as f64
}

/// Independent re-enumeration of the exhaustive estimator: returns
/// `(best mask, estimate)` under the same tie rule.
pub fn brute_exhaustive(a: &AdjacencyMatrix) -> (u64, f64) {
    let n = a.n();
    let mut scored = Vec::new();
    for mask in 1u64..(1 << n) {
        if (mask.count_ones() as usize) * 2 < n {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let p = mask_density(a, mask);
        let m: Vec<Vec<f64>> = members
            .iter()
            .map(|&i| members.iter().map(|&j| f64::from(u8::from(a.has_edge(i, j))) - p).collect())
            .collect();
        scored.push((mask, jacobi_norm(m)));
    }
    let min = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let mut best = None::<u64>;
    for &(mask, norm) in &scored {
        if norm > min + 1e-9 {
            continue;
        }
        best = match best {
            None => Some(mask),
            Some(b) if mask.count_ones() > b.count_ones() => Some(mask),
            Some(b) if mask.count_ones() == b.count_ones() && mask < b => Some(mask),
            keep => keep,
        };
    }
    let mask = best.unwrap();
    (mask, mask_density(a, mask))
}
