use num_complex::Complex64;

use super::CsrMatrix;

/// LU factorisation of `A − σI` in band storage, without pivoting.
///
/// Only valid for matrices where elimination without pivoting is stable.
/// That holds for the operators here: `H − σ` with `H` Hermitian and weakly
/// diagonally dominant is strictly dominant once `Im σ ≠ 0`, and positive
/// definite for real `σ` below the spectrum.
#[derive(Debug, Clone)]
pub struct BandedLu {
    dim: usize,
    bw: usize,
    // Row i holds columns i-bw ..= i+bw at offsets 0 ..= 2bw.
    band: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPivot {
    pub row: usize,
}

impl BandedLu {
    pub fn factor(matrix: &CsrMatrix, shift: Complex64) -> Result<Self, ZeroPivot> {
        let dim = matrix.dim();
        let bw = matrix.bandwidth();
        let width = 2 * bw + 1;
        let mut band = vec![Complex64::new(0.0, 0.0); dim * width];
        for (r, c, v) in matrix.triplets() {
            band[r * width + (c + bw - r)] += v;
        }
        for i in 0..dim {
            band[i * width + bw] -= shift;
        }
        for k in 0..dim {
            let pivot = band[k * width + bw];
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(ZeroPivot { row: k });
            }
            let inv = pivot.inv();
            let last = (k + bw).min(dim - 1);
            for i in (k + 1)..=last {
                let lik_pos = i * width + (k + bw - i);
                let l = band[lik_pos] * inv;
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                band[lik_pos] = l;
                for j in (k + 1)..=last {
                    let ukj = band[k * width + (j + bw - k)];
                    band[i * width + (j + bw - i)] -= l * ukj;
                }
            }
        }
        Ok(Self { dim, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let (dim, bw) = (self.dim, self.bw);
        let width = 2 * bw + 1;
        for i in 0..dim {
            let first = i.saturating_sub(bw);
            let mut acc = x[i];
            for j in first..i {
                acc -= self.band[i * width + (j + bw - i)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..dim).rev() {
            let last = (i + bw).min(dim - 1);
            let mut acc = x[i];
            for j in (i + 1)..=last {
                acc -= self.band[i * width + (j + bw - i)] * x[j];
            }
            x[i] = acc / self.band[i * width + bw];
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_shifted_tridiagonal() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, Complex64::new(2.0, 0.0)));
            if i + 1 < n {
                t.push((i, i + 1, Complex64::new(-1.0, 0.3)));
                t.push((i + 1, i, Complex64::new(-1.0, -0.3)));
            }
        }
        let m = CsrMatrix::from_triplets(n, &t);
        let shift = Complex64::new(0.0, 1.0);
        let lu = BandedLu::factor(&m, shift).unwrap();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let x = lu.solve(&b);
        let ax = m.mul_vec(&x);
        let resid: f64 = ax
            .iter()
            .zip(&x)
            .zip(&b)
            .map(|((ax, x), b)| (ax - shift * x - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(resid < 1e-12, "residual {resid}");
    }

    #[test]
    fn zero_pivot_is_reported() {
        let m = CsrMatrix::from_triplets(2, &[(0, 0, Complex64::new(1.0, 0.0)), (1, 1, Complex64::new(1.0, 0.0))]);
        assert_eq!(BandedLu::factor(&m, Complex64::new(1.0, 0.0)).unwrap_err(), ZeroPivot { row: 0 });
    }
}
