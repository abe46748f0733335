//! Lowest eigenvalues of a sparse Hermitian matrix by shift-invert subspace
//! iteration with Rayleigh–Ritz projection.
//!
//! A block method is used instead of single-vector Lanczos because the
//! lattice operators here have exact degeneracies (square-box symmetry),
//! which a single Krylov vector resolves poorly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{dot, norm, BandedLu, CsrMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("requested {requested} eigenvalues from a {dim}-dimensional operator")]
    TooMany { requested: usize, dim: usize },
    #[error("shift-invert factorisation broke down at row {0}")]
    Factorisation(usize),
    #[error("subspace iteration stalled after {iterations} steps (worst residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    /// Residual target `‖Hv − λv‖ ≤ tol · max(1, |λ|)`.
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iterations: 500,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub iterations: usize,
}

/// Gershgorin lower bound on the spectrum.
fn spectrum_lower_bound(h: &CsrMatrix) -> f64 {
    (0..h.dim())
        .map(|r| {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (c, v) in h.row(r) {
                if c == r {
                    diag = v.re;
                } else {
                    off += v.norm();
                }
            }
            diag - off
        })
        .fold(f64::INFINITY, f64::min)
}

fn orthonormalize(block: &mut [Vec<Complex64>], rng: &mut ChaCha8Rng) {
    for j in 0..block.len() {
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = block.split_at_mut(j);
                let proj = dot(&head[i], &tail[0]);
                for (t, h) in tail[0].iter_mut().zip(&head[i]) {
                    *t -= proj * h;
                }
            }
        }
        let nrm = norm(&block[j]);
        if nrm < 1e-300 {
            for v in block[j].iter_mut() {
                *v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
            // rerun this column with the fresh vector
            for i in 0..j {
                let (head, tail) = block.split_at_mut(j);
                let proj = dot(&head[i], &tail[0]);
                for (t, h) in tail[0].iter_mut().zip(&head[i]) {
                    *t -= proj * h;
                }
            }
        }
        let nrm = norm(&block[j]);
        block[j].iter_mut().for_each(|v| *v /= nrm);
    }
}

/// The `count` smallest eigenvalues (ascending) and their eigenvectors.
pub fn smallest_eigenpairs(h: &CsrMatrix, count: usize, cfg: &EigenConfig) -> Result<Eigenpairs, EigenError> {
    let dim = h.dim();
    if count == 0 {
        return Ok(Eigenpairs {
            values: vec![],
            vectors: vec![],
            iterations: 0,
        });
    }
    if count > dim {
        return Err(EigenError::TooMany { requested: count, dim });
    }
    let block_size = (2 * count).max(count + 8).min(dim);
    let sigma = spectrum_lower_bound(h) - 1.0;
    let lu = BandedLu::factor(h, Complex64::new(sigma, 0.0)).map_err(|e| EigenError::Factorisation(e.row))?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut block: Vec<Vec<Complex64>> = (0..block_size)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect()
        })
        .collect();
    orthonormalize(&mut block, &mut rng);

    let mut worst = f64::INFINITY;
    for iteration in 1..=cfg.max_iterations {
        for v in block.iter_mut() {
            lu.solve_in_place(v);
        }
        orthonormalize(&mut block, &mut rng);
        let hv: Vec<Vec<Complex64>> = block.iter().map(|v| h.mul_vec(v)).collect();
        let projected = DMatrix::from_fn(block_size, block_size, |i, j| {
            let a = dot(&block[i], &hv[j]);
            let b = dot(&block[j], &hv[i]).conj();
            (a + b) * 0.5
        });
        let eig = projected.symmetric_eigen();
        let mut order: Vec<usize> = (0..block_size).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let rotate = |src: &[Vec<Complex64>], col: usize| -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            for (i, v) in src.iter().enumerate() {
                let coef = eig.eigenvectors[(i, col)];
                for (o, x) in out.iter_mut().zip(v) {
                    *o += coef * x;
                }
            }
            out
        };
        let ritz: Vec<Vec<Complex64>> = order.iter().map(|&c| rotate(&block, c)).collect();
        let values: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();

        worst = 0.0;
        for (idx, &col) in order.iter().take(count).enumerate() {
            let hvr = rotate(&hv, col);
            let lambda = values[idx];
            let res: Vec<Complex64> = hvr.iter().zip(&ritz[idx]).map(|(a, b)| a - lambda * b).collect();
            worst = worst.max(norm(&res) / lambda.abs().max(1.0));
        }
        block = ritz;
        if worst <= cfg.tol {
            block.truncate(count);
            return Ok(Eigenpairs {
                values: values[..count].to_vec(),
                vectors: block,
                iterations: iteration,
            });
        }
    }
    Err(EigenError::NotConverged {
        iterations: cfg.max_iterations,
        residual: worst,
    })
}

/// Convenience wrapper returning only eigenvalues.
pub fn smallest_eigenvalues(h: &CsrMatrix, count: usize, cfg: &EigenConfig) -> Result<Vec<f64>, EigenError> {
    smallest_eigenpairs(h, count, cfg).map(|p| p.values)
}
