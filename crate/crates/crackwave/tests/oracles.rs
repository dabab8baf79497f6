//! Independent oracles: frozen high-precision tables, brute-force quadrature, and a
//! Ritz discretization of the strip operator that shares no code with the library.

use crackwave::boundary_op::bessel_j;
use crackwave::dispersion::{branch_eigenvalues, BranchOptions};
use crackwave::quad::GaussLegendre;
use crackwave::special::bessel_j_seq;

mod common;
use common::{ritz_branches, series_j};

/// J_m(x) from a 40-digit reference computation.
const BESSEL_TABLE: &[(i32, f64, f64)] = &[
    (0, 0.5, 0.938_469_807_240_812_9),
    (0, 7.3, 0.288_216_947_635_014_4),
    (1, 1.0, 0.440_050_585_744_933_5),
    (2, 12.5, -0.173_361_463_438_782_66),
    (5, 3.0, 0.043_028_434_877_047_584),
    (7, 40.0, -0.108_023_431_735_779_43),
    (10, 0.9, 9.212_149_857_207_124e-11),
    (15, 25.0, 0.097_808_984_492_469_84),
    (20, 18.0, 0.067_305_947_437_405_97),
    (-3, 4.2, -0.434_394_276_387_200_8),
    (3, 150.0, 0.065_142_643_342_881_79),
    (0, 1000.0, 0.024_786_686_152_420_175),
];

const HALF_ORDER_TABLE: &[(f64, f64, f64)] = &[
    (0.5, 2.0, 0.513_016_136_561_827_8),
    (1.5, 0.3, 0.043_309_881_918_378_32),
    (3.5, 10.0, -0.099_653_250_964_983_9),
    (11.5, 60.0, -0.016_340_791_237_127_24),
    (30.5, 45.0, 0.095_133_942_992_294_72),
];

#[test]
fn bessel_matches_reference_table() {
    for &(m, x, want) in BESSEL_TABLE {
        let got = bessel_j(m, x);
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-3), "J_{m}({x}) = {got}, want {want}");
    }
}

#[test]
fn half_order_bessel_matches_reference_table() {
    let mut out = Vec::new();
    for &(nu, x, want) in HALF_ORDER_TABLE {
        let k = (nu - 0.5) as usize;
        bessel_j_seq(true, k, x, &mut out);
        assert!((out[k] - want).abs() <= 1e-12 * want.abs().max(1e-3), "J_{nu}({x}) = {}, want {want}", out[k]);
    }
}

#[test]
fn bessel_matches_ascending_series() {
    assert!((series_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
    for m in -6..=20 {
        for &x in &[0.1, 0.9, 2.5, 5.0, 8.0] {
            let (a, b) = (bessel_j(m, x), series_j(m, x));
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-8), "m={m} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn bessel_matches_integral_representation() {
    // (1/2π)∫ cos(mt − x sin t) dt by the trapezoidal rule (spectrally accurate)
    let k = 512;
    for &(m, x) in &[(0, 3.3), (1, 0.7), (4, 11.0), (-5, 6.5), (12, 20.0), (20, 30.0)] {
        let s: f64 = (0..k)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                (m as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            / k as f64;
        assert!((bessel_j(m, x) - s).abs() < 1e-12, "m={m} x={x}");
    }
}

#[test]
fn weber_schafheitlin_by_brute_force() {
    // ∫₀^X J_a J_b / t dt with X large; the tail is O(1/X)
    let gl = GaussLegendre::<f64>::new(32);
    let x_end = 2000.0;
    for &(a, b) in &[(1, 1), (1, 3), (3, 3), (2, 4), (5, 5)] {
        let mut s = 0.0;
        let mut x = 0.0;
        while x < x_end {
            s += gl.integrate(x, x + 2.0, |t| bessel_j(a, t) * bessel_j(b, t) / t);
            x += 2.0;
        }
        let want = if a == b { 1.0 / (2.0 * a as f64) } else { 0.0 };
        assert!((s - want).abs() < 2e-4, "a={a} b={b}: {s}");
    }
}

#[test]
fn branches_match_ritz_discretization() {
    for &xi in &[0.1, 0.4, 0.632, 0.9, 1.0, 1.3, 1.7, 2.0, 2.4, 3.0] {
        let branches = branch_eigenvalues(xi, 3, &BranchOptions::default()).unwrap();
        let ritz = ritz_branches(xi, 40, 3);
        for (b, r) in branches.iter().zip(&ritz) {
            assert!(((b.omega - r) / r).abs() < 1e-4, "xi={xi} k={}: {} vs {r}", b.k, b.omega);
        }
    }
}
