//! Reference computations used by `reproduce` that do not go through the library's own
//! algorithms: an ascending Bessel series and a Ritz discretization of the strip operator.

use crackwave::quad::GaussLegendre;
use crackwave::spectral::generalized_eigenvalues;
use nalgebra::DMatrix;

/// J_m(x) from 40 terms of the ascending series (compensated sum); fine for x ≲ 10.
pub fn bessel_series(m: i32, x: f64) -> f64 {
    let n = m.unsigned_abs() as i32;
    let mut term = (x / 2.0).powi(n);
    for k in 1..=n {
        term /= k as f64;
    }
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for k in 0..40 {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        term *= -(x * x / 4.0) / (((k + 1) * (k + 1 + n)) as f64);
    }
    if m < 0 && n % 2 == 1 {
        -sum
    } else {
        sum
    }
}

/// Lowest `count` eigenvalues of the symmetric-channel strip operator at wavenumber ξ
/// from a Legendre–Ritz discretization of its energy
/// ∫ 2ξ²|u₁|² + 2|u₂′|² + |u₁′ + iξu₂|² over (−π/2, π/2), u₁ even with mean zero, u₂ odd.
pub fn ritz_branches(xi: f64, degree: usize, count: usize) -> crackwave::Result<Vec<f64>> {
    let half = std::f64::consts::FRAC_PI_2;
    let n1: Vec<usize> = (1..=degree / 2).map(|k| 2 * k).collect();
    let n2: Vec<usize> = (0..degree / 2).map(|k| 2 * k + 1).collect();
    let dim = n1.len() + n2.len();
    let gl = GaussLegendre::<f64>::new(degree + 8);
    let mut k = DMatrix::<f64>::zeros(dim, dim);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut p = vec![0.0; degree + 2];
    let mut dp = vec![0.0; degree + 2];
    for (t, w) in gl.on(-1.0, 1.0) {
        p[0] = 1.0;
        p[1] = t;
        dp[0] = 0.0;
        dp[1] = 1.0;
        for j in 1..=degree {
            let jf = j as f64;
            p[j + 1] = ((2.0 * jf + 1.0) * t * p[j] - jf * p[j - 1]) / (jf + 1.0);
            dp[j + 1] = dp[j - 1] + (2.0 * jf + 1.0) * p[j];
        }
        let (wx, d) = (w * half, 1.0 / half);
        // (u₁, u₁′, v, v′) with u₂ = i·v
        let rows: Vec<[f64; 4]> = n1
            .iter()
            .map(|&j| [p[j], dp[j] * d, 0.0, 0.0])
            .chain(n2.iter().map(|&j| [0.0, 0.0, p[j], dp[j] * d]))
            .collect();
        for (a, ra) in rows.iter().enumerate() {
            for (b, rb) in rows.iter().enumerate() {
                k[(a, b)] += wx
                    * (2.0 * xi * xi * ra[0] * rb[0] + 2.0 * ra[3] * rb[3] + (ra[1] - xi * ra[2]) * (rb[1] - xi * rb[2]));
                m[(a, b)] += wx * (ra[0] * rb[0] + ra[2] * rb[2]);
            }
        }
    }
    let mut ev = generalized_eigenvalues(&k, &m)?;
    ev.truncate(count);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_at_known_value() {
        assert!((bessel_series(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_series(-3, 4.2) + 0.434_394_276_387_200_8).abs() < 1e-14);
    }

    #[test]
    fn ritz_at_zero_wavenumber() {
        // at ξ = 0 the lowest mode is u₂ = i·sin x with eigenvalue 2
        let ev = ritz_branches(0.0, 40, 2).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-10, "{ev:?}");
    }
}
