use num_complex::Complex64;

use super::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    /// Relative residual target `‖b − (A − σ)x‖ ≤ tol · ‖b‖`.
    pub tol: f64,
    /// Krylov dimension between restarts.
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            restart: 80,
            max_iterations: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// True relative residual of `x`.
    pub residual: f64,
    pub converged: bool,
}

pub(crate) fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn shifted_residual(a: &CsrMatrix, shift: Complex64, x: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let ax = a.mul_vec(x);
    b.iter().zip(&ax).zip(x).map(|((b, ax), x)| b - (ax - shift * x)).collect()
}

/// Restarted GMRES for `(A − σI) x = b` with right Jacobi preconditioning.
///
/// Right preconditioning keeps the monitored residual equal to the true
/// residual of the unpreconditioned system.
pub fn gmres_shifted(a: &CsrMatrix, shift: Complex64, b: &[Complex64], cfg: &GmresConfig) -> GmresOutcome {
    let n = a.dim();
    assert_eq!(b.len(), n, "rhs length does not match operator dimension");
    let zero = Complex64::new(0.0, 0.0);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return GmresOutcome {
            x: vec![zero; n],
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let inv_diag: Vec<Complex64> = a
        .diagonal()
        .into_iter()
        .map(|d| {
            let d = d - shift;
            if d.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                d.inv()
            }
        })
        .collect();
    let target = cfg.tol * b_norm;
    let m = cfg.restart.max(1);

    let mut x = vec![zero; n];
    let mut iterations = 0;
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    let mut hess = vec![vec![zero; m]; m + 1];
    let mut cs = vec![0.0f64; m];
    let mut sn = vec![zero; m];
    let mut g = vec![zero; m + 1];
    let mut w = vec![zero; n];
    let mut z = vec![zero; n];

    loop {
        let r = shifted_residual(a, shift, &x, b);
        let beta = norm(&r);
        if beta <= target || iterations >= cfg.max_iterations {
            return GmresOutcome {
                x,
                iterations,
                residual: beta / b_norm,
                converged: beta <= target,
            };
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = zero);
        g[0] = Complex64::new(beta, 0.0);
        let mut cols = 0;
        for j in 0..m {
            for ((zi, vi), di) in z.iter_mut().zip(&basis[j]).zip(&inv_diag) {
                *zi = vi * di;
            }
            a.mul_vec_into(&z, &mut w);
            for (wi, zi) in w.iter_mut().zip(&z) {
                *wi -= shift * zi;
            }
            for i in 0..=j {
                let h = dot(&basis[i], &w);
                hess[i][j] = h;
                for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                    *wk -= h * vk;
                }
            }
            let h_next = norm(&w);
            hess[j + 1][j] = Complex64::new(h_next, 0.0);
            for i in 0..j {
                let (c, s) = (cs[i], sn[i]);
                let upper = hess[i][j];
                let lower = hess[i + 1][j];
                hess[i][j] = c * upper + s * lower;
                hess[i + 1][j] = -s.conj() * upper + c * lower;
            }
            let (c, s) = givens(hess[j][j], hess[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            hess[j][j] = c * hess[j][j] + s * hess[j + 1][j];
            hess[j + 1][j] = zero;
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            iterations += 1;
            cols = j + 1;
            if g[j + 1].norm() <= target || iterations >= cfg.max_iterations || h_next == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }
        let mut y = vec![zero; cols];
        for i in (0..cols).rev() {
            let mut acc = g[i];
            for k in (i + 1)..cols {
                acc -= hess[i][k] * y[k];
            }
            y[i] = acc / hess[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for ((xi, vi), di) in x.iter_mut().zip(&basis[k]).zip(&inv_diag) {
                *xi += yk * vi * di;
            }
        }
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let rho = an.hypot(bn);
    (an / rho, (a / an) * b.conj() / rho)
}
