//! Oracles shared by the oracle and acceptance targets. Nothing here calls the library
//! except the Gauss–Legendre rule.
#![allow(dead_code)]

use crackwave::quad::GaussLegendre;
use nalgebra::{DMatrix, SymmetricEigen};

/// Ascending series summed to 40 terms with compensated accumulation.
pub fn series_j(m: i32, x: f64) -> f64 {
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

/// Ritz discretization of the symmetric-channel strip operator restricted to h₂.
///
/// Energy a[u] = ∫ 2ξ²|u₁|² + 2|u₂′|² + |u₁′ + iξu₂|² over I = (−π/2, π/2); with u₂ = i·v
/// everything is real. u₁ ranges over even Legendre polynomials of positive degree
/// (mean zero), v over odd ones.
pub fn ritz_branches(xi: f64, degree: usize, count: usize) -> Vec<f64> {
    let half = std::f64::consts::FRAC_PI_2;
    let n1: Vec<usize> = (1..=degree / 2).map(|k| 2 * k).collect();
    let n2: Vec<usize> = (0..degree / 2).map(|k| 2 * k + 1).collect();
    let dim = n1.len() + n2.len();
    let gl = GaussLegendre::<f64>::new(degree + 8);
    let mut k = DMatrix::<f64>::zeros(dim, dim);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (t, w) in gl.on(-1.0, 1.0) {
        // Legendre values and derivatives at t
        let mut p = vec![0.0; degree + 2];
        let mut dp = vec![0.0; degree + 2];
        p[0] = 1.0;
        p[1] = t;
        dp[1] = 1.0;
        for j in 1..=degree {
            let jf = j as f64;
            p[j + 1] = ((2.0 * jf + 1.0) * t * p[j] - jf * p[j - 1]) / (jf + 1.0);
            dp[j + 1] = dp[j - 1] + (2.0 * jf + 1.0) * p[j];
        }
        let wx = w * half;
        let d = 1.0 / half;
        // basis rows: (u1, u1', v, v')
        let mut rows = Vec::with_capacity(dim);
        for &j in &n1 {
            rows.push([p[j], dp[j] * d, 0.0, 0.0]);
        }
        for &j in &n2 {
            rows.push([0.0, 0.0, p[j], dp[j] * d]);
        }
        for a in 0..dim {
            for b in 0..dim {
                let (ra, rb) = (rows[a], rows[b]);
                k[(a, b)] += wx
                    * (2.0 * xi * xi * ra[0] * rb[0]
                        + 2.0 * ra[3] * rb[3]
                        + (ra[1] - xi * ra[2]) * (rb[1] - xi * rb[2]));
                m[(a, b)] += wx * (ra[0] * rb[0] + ra[2] * rb[2]);
            }
        }
    }
    let l = m.cholesky().unwrap().l();
    let li = l.try_inverse().unwrap();
    let a = &li * k * li.transpose();
    let mut ev: Vec<f64> = SymmetricEigen::new((&a + a.transpose()) * 0.5).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev.truncate(count);
    ev
}
