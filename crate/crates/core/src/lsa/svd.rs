//! Truncated SVD of a sparse row matrix.
//!
//! Two solvers sit behind [`truncated_svd_rows`]: an exact dense
//! decomposition, and a seeded randomized range finder with subspace
//! (power) iterations for inputs whose short side is too large to densify.
//! Both return factors with singular values in nonincreasing order and with
//! each right singular vector's largest-magnitude entry nonnegative.

use nalgebra::linalg::SVD;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::vectorizer::SparseVector;

/// Largest short side handled by the dense solver under [`Solver::Auto`].
pub const DENSE_SHORT_SIDE_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Auto,
    Dense,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SvdOptions {
    pub solver: Solver,
    pub seed: u64,
    pub oversample: usize,
    /// Power iterations always performed before convergence is checked.
    pub power_iterations: usize,
    /// Relative change in the leading singular values that counts as
    /// converged.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            solver: Solver::Auto,
            seed: 0,
            oversample: 10,
            power_iterations: 4,
            tolerance: 1e-10,
            max_iterations: 300,
        }
    }
}

impl SvdOptions {
    pub fn with_seed(seed: u64) -> Self {
        SvdOptions {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// N×k left singular vectors.
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// M×k right singular vectors.
    pub v: DMatrix<f64>,
    pub solver: Solver,
    /// Subspace iterations used; 0 for the dense solver.
    pub iterations: usize,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

pub fn densify(rows: &[SparseVector], n_cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), n_cols);
    for (i, row) in rows.iter().enumerate() {
        for (c, v) in row.iter() {
            m[(i, c)] = v;
        }
    }
    m
}

/// Top-`k` singular triples of the `rows.len() × n_cols` matrix.
pub fn truncated_svd_rows(rows: &[SparseVector], n_cols: usize, k: usize, options: &SvdOptions) -> Result<SvdFactors> {
    let max = rows.len().min(n_cols);
    if k == 0 || k > max {
        return Err(Error::RankOutOfRange { k, max });
    }
    let solver = match options.solver {
        Solver::Auto if max <= DENSE_SHORT_SIDE_LIMIT => Solver::Dense,
        Solver::Auto => Solver::Randomized,
        s => s,
    };
    let mut factors = match solver {
        Solver::Randomized => randomized(rows, n_cols, k, options)?,
        _ => dense(densify(rows, n_cols), k)?,
    };
    fix_signs(&mut factors);
    Ok(factors)
}

fn svd_sorted(m: DMatrix<f64>) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let budget = 300 * m.nrows().min(m.ncols()).max(1);
    SVD::try_new(m, true, true, f64::EPSILON * 5.0, budget).ok_or(Error::NotConverged {
        iterations: budget,
        residual: f64::NAN,
    })
}

fn dense(a: DMatrix<f64>, k: usize) -> Result<SvdFactors> {
    // Decompose the tall orientation; a wide matrix is handled through its
    // transpose with U and V swapped back afterwards.
    let wide = a.nrows() < a.ncols();
    let tall = if wide { a.transpose() } else { a };
    let svd = svd_sorted(tall)?;
    let left = svd.u.expect("u requested").columns(0, k).into_owned();
    let right = svd.v_t.expect("v requested").transpose().columns(0, k).into_owned();
    let singular_values = svd.singular_values.iter().take(k).copied().collect();
    let (u, v) = if wide { (right, left) } else { (left, right) };
    Ok(SvdFactors {
        u,
        singular_values,
        v,
        solver: Solver::Dense,
        iterations: 0,
    })
}

/// `A X` for sparse `A` (N×M) and dense `X` (M×l).
fn mul(rows: &[SparseVector], x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut y = DMatrix::zeros(rows.len(), x.ncols());
    for j in 0..x.ncols() {
        let xj = x.column(j);
        let mut yj = y.column_mut(j);
        for (i, row) in rows.iter().enumerate() {
            yj[i] = row.iter().map(|(c, v)| v * xj[c]).sum();
        }
    }
    y
}

/// `Aᵀ Y` for sparse `A` (N×M) and dense `Y` (N×l).
fn mul_t(rows: &[SparseVector], n_cols: usize, y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(n_cols, y.ncols());
    for j in 0..y.ncols() {
        let yj = y.column(j);
        let mut zj = z.column_mut(j);
        for (i, row) in rows.iter().enumerate() {
            let w = yj[i];
            if w != 0.0 {
                for (c, v) in row.iter() {
                    zj[c] += v * w;
                }
            }
        }
    }
    z
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

fn randomized(rows: &[SparseVector], n_cols: usize, k: usize, opts: &SvdOptions) -> Result<SvdFactors> {
    let short = rows.len().min(n_cols);
    let width = (k + opts.oversample).min(short);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let omega = DMatrix::from_fn(n_cols, width, |_, _| StandardNormal.sample(&mut rng));

    let mut q = orthonormal_basis(mul(rows, &omega));
    let mut previous: Option<Vec<f64>> = None;
    let mut residual = f64::INFINITY;
    for iteration in 0..=opts.max_iterations {
        // C = Aᵀ Q, so Qᵀ A = Cᵀ. The R factor of C carries its singular
        // values, which serve as the convergence monitor.
        let c = mul_t(rows, n_cols, &q);
        let qr = c.clone().qr();
        let sigma: Vec<f64> = qr.r().singular_values().iter().take(k).copied().collect();
        if iteration >= opts.power_iterations {
            if let Some(prev) = &previous {
                let scale = sigma[0].max(f64::MIN_POSITIVE);
                residual = sigma
                    .iter()
                    .zip(prev)
                    .map(|(s, p)| (s - p).abs() / scale)
                    .fold(0.0, f64::max);
                if residual <= opts.tolerance || sigma[0] == 0.0 {
                    return finish(q, c, k, iteration);
                }
            }
        }
        previous = Some(sigma);
        if iteration == opts.max_iterations {
            break;
        }
        q = orthonormal_basis(mul(rows, &qr.q()));
    }
    Err(Error::NotConverged {
        iterations: opts.max_iterations,
        residual,
    })
}

/// With `C = Aᵀ Q = P Σ Wᵀ`, `A ≈ Q Cᵀ = (Q W) Σ Pᵀ`.
fn finish(q: DMatrix<f64>, c: DMatrix<f64>, k: usize, iterations: usize) -> Result<SvdFactors> {
    let svd = svd_sorted(c)?;
    let p = svd.u.expect("u requested");
    let w = svd.v_t.expect("v requested").transpose();
    let u = (q * w).columns(0, k).into_owned();
    Ok(SvdFactors {
        u,
        singular_values: svd.singular_values.iter().take(k).copied().collect(),
        v: p.columns(0, k).into_owned(),
        solver: Solver::Randomized,
        iterations,
    })
}

/// Flips each (u_j, v_j) pair so the largest-magnitude entry of v_j is
/// nonnegative. Ties go to the lowest index.
fn fix_signs(f: &mut SvdFactors) {
    for j in 0..f.rank() {
        let col = f.v.column(j);
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            f.v.column_mut(j).neg_mut();
            f.u.column_mut(j).neg_mut();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows_of(m: &DMatrix<f64>) -> Vec<SparseVector> {
        (0..m.nrows())
            .map(|i| SparseVector::from_pairs((0..m.ncols()).map(|j| (j, m[(i, j)]))))
            .collect()
    }

    fn random(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn identity_all_ones() {
        let m = DMatrix::<f64>::identity(5, 5);
        let f = truncated_svd_rows(&rows_of(&m), 5, 5, &SvdOptions::default()).unwrap();
        for s in &f.singular_values {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one() {
        let a = nalgebra::DVector::from_vec(vec![1.0, 2.0, 0.5, 3.0]);
        let b = nalgebra::DVector::from_vec(vec![0.5, 1.0, 4.0]);
        let m = &a * b.transpose();
        for solver in [Solver::Dense, Solver::Randomized] {
            let opts = SvdOptions {
                solver,
                ..Default::default()
            };
            let f = truncated_svd_rows(&rows_of(&m), 3, 2, &opts).unwrap();
            assert!((f.singular_values[0] - a.norm() * b.norm()).abs() < 1e-10);
            assert!(f.singular_values[1].abs() <= 1e-8);
        }
    }

    #[test]
    fn rank_out_of_range() {
        let m = random(4, 3, 1);
        assert!(matches!(
            truncated_svd_rows(&rows_of(&m), 3, 4, &SvdOptions::default()),
            Err(Error::RankOutOfRange { k: 4, max: 3 })
        ));
        assert!(truncated_svd_rows(&rows_of(&m), 3, 0, &SvdOptions::default()).is_err());
    }

    #[test]
    fn wide_and_tall_agree() {
        let m = random(6, 9, 3);
        let wide = truncated_svd_rows(&rows_of(&m), 9, 4, &SvdOptions::default()).unwrap();
        let t = m.transpose();
        let tall = truncated_svd_rows(&rows_of(&t), 6, 4, &SvdOptions::default()).unwrap();
        for (a, b) in wide.singular_values.iter().zip(&tall.singular_values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn randomized_matches_dense_on_decaying_spectrum() {
        // 260×240, so Auto would pick the randomized path.
        let (n, m) = (260, 240);
        let left = orthonormal_basis(random(n, 30, 11));
        let right = orthonormal_basis(random(m, 30, 12));
        let mut core = DMatrix::zeros(30, 30);
        for j in 0..30 {
            core[(j, j)] = 0.6f64.powi(j as i32) * 10.0;
        }
        let a = &left * core * right.transpose() + random(n, m, 13) * 1e-9;
        let rows = rows_of(&a);
        let exact = truncated_svd_rows(
            &rows,
            m,
            8,
            &SvdOptions {
                solver: Solver::Dense,
                ..Default::default()
            },
        )
        .unwrap();
        let approx = truncated_svd_rows(&rows, m, 8, &SvdOptions::with_seed(5)).unwrap();
        assert_eq!(approx.solver, Solver::Randomized);
        for (e, r) in exact.singular_values.iter().zip(&approx.singular_values) {
            assert!((e - r).abs() < 1e-8 * exact.singular_values[0], "{e} vs {r}");
        }
        let again = truncated_svd_rows(&rows, m, 8, &SvdOptions::with_seed(5)).unwrap();
        assert_eq!(approx, again);
    }

    #[test]
    fn randomized_reports_non_convergence() {
        let m = random(40, 30, 21);
        let opts = SvdOptions {
            solver: Solver::Randomized,
            oversample: 0,
            max_iterations: 5,
            tolerance: 1e-15,
            ..Default::default()
        };
        match truncated_svd_rows(&rows_of(&m), 30, 10, &opts) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 5);
                assert!(residual > 1e-15);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn sign_convention() {
        let m = random(7, 5, 4);
        let f = truncated_svd_rows(&rows_of(&m), 5, 3, &SvdOptions::default()).unwrap();
        for j in 0..3 {
            let col = f.v.column(j);
            let big = col
                .iter()
                .copied()
                .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(big >= 0.0);
        }
    }
}
