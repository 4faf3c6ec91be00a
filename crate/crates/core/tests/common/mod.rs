//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerical code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

pub type Dense = Vec<Vec<f64>>;

/// Thin SVD by one-sided (Hestenes) Jacobi rotations. Returns singular
/// values in decreasing order with matching U (m×r) and V (n×r) columns,
/// r = min(m, n), stored column-major as `Vec<column>`.
pub struct JacobiSvd {
    pub sigma: Vec<f64>,
    pub u: Dense,
    pub v: Dense,
}

pub fn jacobi_svd(a: &Dense) -> JacobiSvd {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m < n {
        let t = transpose(a);
        let s = jacobi_svd(&t);
        return JacobiSvd {
            sigma: s.sigma,
            u: s.v,
            v: s.u,
        };
    }
    // Columns of A and of the accumulated rotation.
    let mut cols: Dense = (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect();
    let mut v: Dense = (0..n)
        .map(|j| (0..n).map(|i| f64::from(u8::from(i == j))).collect())
        .collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut triples: Vec<(f64, Vec<f64>, Vec<f64>)> = cols
        .into_iter()
        .zip(v)
        .map(|(col, vj)| {
            let s = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            let uj = if s > 0.0 {
                col.iter().map(|x| x / s).collect()
            } else {
                col
            };
            (s, uj, vj)
        })
        .collect();
    triples.sort_by(|a, b| b.0.total_cmp(&a.0));
    JacobiSvd {
        sigma: triples.iter().map(|t| t.0).collect(),
        u: triples.iter().map(|t| t.1.clone()).collect(),
        v: triples.into_iter().map(|t| t.2).collect(),
    }
}

fn rotate(cols: &mut Dense, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..cols[p].len() {
        let x = cols[p][i];
        let y = cols[q][i];
        cols[p][i] = c * x - s * y;
        cols[q][i] = s * x + c * y;
    }
}

pub fn transpose(a: &Dense) -> Dense {
    let n = a.first().map_or(0, Vec::len);
    (0..n).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// tf-idf straight from the definition: boolean term frequency times
/// `1 + ln((N + 1) / (D + 1))`. Keyed by (document index, gram).
pub fn naive_tfidf(docs: &[Vec<String>]) -> BTreeMap<(usize, String), f64> {
    let n = docs.len() as f64;
    let sets: Vec<BTreeSet<&String>> = docs.iter().map(|d| d.iter().collect()).collect();
    let mut out = BTreeMap::new();
    for (i, set) in sets.iter().enumerate() {
        for &g in set {
            let d = sets.iter().filter(|s| s.contains(g)).count() as f64;
            out.insert((i, g.clone()), 1.0 + ((n + 1.0) / (d + 1.0)).ln());
        }
    }
    out
}

/// Dense cosine for vectors given as maps.
pub fn dense_cosine(a: &BTreeMap<usize, f64>, b: &BTreeMap<usize, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    let na: f64 = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Two-sample KS statistic by evaluating both empirical CDFs at every
/// merged point with a full scan. The difference is kept as an exact
/// integer numerator over `n1 · n2`.
pub fn brute_force_ks(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as i64, b.len() as i64);
    let mut best = 0i64;
    for &x in a.iter().chain(b) {
        let c1 = a.iter().filter(|&&y| y <= x).count() as i64;
        let c2 = b.iter().filter(|&&y| y <= x).count() as i64;
        best = best.max((c1 * n2 - c2 * n1).abs());
    }
    best as f64 / (n1 * n2) as f64
}
