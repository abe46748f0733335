//! Complete elliptic integrals of the first and second kind.
//!
//! All functions take the **modulus** `k`, not the parameter `m = k²`.
//! Libraries disagree on this (Cephes, SciPy and Boost use `m`), so callers
//! porting formulas from elsewhere should square-root first.
//!
//! Evaluation is by the arithmetic-geometric mean:
//!
//! ```text
//! K(k) = π / (2 AGM(1, k'))                    k' = √(1 − k²)
//! E(k) = K(k) · (1 − Σ_{j≥0} 2^{j−1} c_j²)     c_0 = k, c_{j+1} = (a_j − b_j)/2
//! ```

use std::f64::consts::FRAC_PI_2;

use super::PotentialError;

const AGM_MAX_ITER: usize = 64;

/// Above this modulus the loop bracket is evaluated from K and E directly;
/// below it the power series is used.
const BRACKET_SERIES_MAX_K: f64 = 0.7;

fn check_modulus(k: f64) -> Result<(), PotentialError> {
    if k.is_nan() || k < 0.0 {
        return Err(PotentialError::Domain(format!(
            "elliptic modulus must be nonnegative, got {k}"
        )));
    }
    Ok(())
}

/// Runs the AGM on (1, k') and returns (K, E).
fn agm_pair(k: f64) -> (f64, f64) {
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    let mut a = 1.0_f64;
    let mut b = kp;
    let mut c = k;
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..AGM_MAX_ITER {
        if c.abs() <= f64::EPSILON * a {
            break;
        }
        let a_next = 0.5 * (a + b);
        let b_next = (a * b).sqrt();
        c = 0.5 * (a - b);
        weight *= 2.0;
        sum += weight * c * c;
        a = a_next;
        b = b_next;
    }
    let big_k = FRAC_PI_2 / a;
    (big_k, big_k * (1.0 - sum))
}

/// Complete elliptic integral of the first kind, `K(k) = ∫₀^{π/2} dt / √(1 − k² sin² t)`.
///
/// Defined for `0 ≤ k < 1`; `k ≥ 1` hits the logarithmic singularity.
pub fn elliptic_k(k: f64) -> Result<f64, PotentialError> {
    check_modulus(k)?;
    if k >= 1.0 {
        return Err(PotentialError::Domain(format!(
            "K(k) has a logarithmic singularity at k = 1 (got k = {k})"
        )));
    }
    if k == 0.0 {
        return Ok(FRAC_PI_2);
    }
    Ok(agm_pair(k).0)
}

/// Complete elliptic integral of the second kind, `E(k) = ∫₀^{π/2} √(1 − k² sin² t) dt`.
///
/// Defined for `0 ≤ k ≤ 1`.
pub fn elliptic_e(k: f64) -> Result<f64, PotentialError> {
    check_modulus(k)?;
    if k > 1.0 {
        return Err(PotentialError::Domain(format!(
            "E(k) is real only for k ≤ 1 (got k = {k})"
        )));
    }
    if k == 0.0 {
        return Ok(FRAC_PI_2);
    }
    if k == 1.0 {
        return Ok(1.0);
    }
    Ok(agm_pair(k).1)
}

/// `[(2 − k²) K(k) − 2 E(k)] / k²`, the loop kernel of the planar potential.
///
/// The bracket vanishes like `π k⁴ / 16`, so direct evaluation cancels
/// catastrophically for small `k`. There the series
/// `(π/2) Σ_{n≥2} [4n a_n/(2n−1) − a_{n−1}] m^n`, `a_n = ((2n−1)!!/(2n)!!)²`
/// is summed instead.
pub(crate) fn loop_bracket_over_k2(k: f64) -> Result<f64, PotentialError> {
    check_modulus(k)?;
    if k >= 1.0 {
        return Err(PotentialError::Domain(format!(
            "loop kernel diverges at k = 1 (got k = {k})"
        )));
    }
    let m = k * k;
    if k < BRACKET_SERIES_MAX_K {
        return Ok(bracket_series_over_m(m));
    }
    let (big_k, big_e) = agm_pair(k);
    Ok(((2.0 - m) * big_k - 2.0 * big_e) / m)
}

fn bracket_series_over_m(m: f64) -> f64 {
    // a_1 = 1/4; the n = 1 coefficient is exactly zero.
    let mut a_prev = 0.25;
    let mut power = m; // m^{n-1}
    let mut sum = 0.0;
    for n in 2..200 {
        let nf = n as f64;
        let ratio = (2.0 * nf - 1.0) / (2.0 * nf);
        let a_n = a_prev * ratio * ratio;
        let term = (4.0 * nf * a_n / (2.0 * nf - 1.0) - a_prev) * power;
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
        a_prev = a_n;
        power *= m;
    }
    FRAC_PI_2 * sum
}
