use crackwave::context::ThresholdContext;
use crackwave::dispersion::{branch_eigenvalues, BranchOptions};
use crackwave::dtn::*;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;
const I: C64 = C64 { re: 0.0, im: 1.0 };
const HALF: f64 = std::f64::consts::FRAC_PI_2;

fn lambda() -> f64 {
    ThresholdContext::shared().unwrap().lambda()
}

#[test]
fn determinant_identity_off_axis() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let lam = lambda();
    for _ in 0..500 {
        let xi = C64::new(rng.gen_range(0.0..3.0), 0.0);
        let w = C64::from_polar(rng.gen_range(0.05..0.5), rng.gen_range(0.1..3.0)) + lam;
        let (d, f) = (boundary_determinant(xi, w), determinant_factorization(xi, w));
        assert!((d - f).norm() < 1e-10 * f.norm(), "xi={xi} w={w}");
        let lit = determinant_factorization_literal(xi, w);
        assert!((lit - f).norm() < 1e-10 * f.norm());
    }
}

#[test]
fn solve_residual_and_traction_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let lam = lambda();
    for _ in 0..200 {
        let xi: f64 = rng.gen_range(0.01..4.0);
        let w: f64 = rng.gen_range(0.01..lam - 1e-3);
        let g = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let s = boundary_system_with(C64::new(xi, 0.0), C64::new(w, 0.0), g).unwrap();
        assert!(s.residual() < 1e-10);
        let m = dtn_symbol(xi, C64::new(w, 0.0)).unwrap().value;
        assert!((m * g - s.traction()).norm() < 1e-9 * (m * g).norm(), "xi={xi} w={w}");
    }
}

#[test]
fn reconstructed_profile_satisfies_boundary_conditions() {
    for &(xi, w) in &[(0.7, 1.2), (1.9, 0.4), (0.3, 1.85), (1.1, 0.0)] {
        let g = C64::new(0.8, -0.3);
        let s = boundary_system_with(C64::new(xi, 0.0), C64::new(w, 0.0), g).unwrap();
        let h = 1e-4;
        let d = |x: f64| {
            let (a, b) = (s.profile(x + h), s.profile(x - h));
            [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
        };
        let (u0, d0, dt) = (s.profile(0.0), d(0.0), d(HALF));
        let ut = s.profile(HALF);
        let tol = 1e-7 * (1.0 + g.norm());
        assert!((u0[1] - g).norm() < tol, "u2(0) at xi={xi} w={w}");
        assert!((d0[0] + I * xi * u0[1]).norm() < tol, "shear at 0");
        assert!((dt[0] + I * xi * ut[1]).norm() < tol, "shear at top");
        assert!(dt[1].norm() < tol, "normal stress at top");
        assert!((s.traction() + 2.0 * d0[1]).norm() < tol, "traction");
    }
}

#[test]
fn invertible_below_threshold() {
    let lam = lambda();
    for k in 0..=300 {
        let xi = 0.01 * k as f64;
        for w in [0.2, 1.1, lam - 1e-3] {
            // keep off the lines β = 0, γ = 0 where the fundamental system degenerates
            if (w - xi * xi).abs() < 1e-6 || (w / 2.0 - xi * xi).abs() < 1e-6 {
                continue;
            }
            assert!(boundary_system(C64::new(xi, 0.0), C64::new(w, 0.0)).is_ok(), "xi={xi} w={w}");
        }
    }
}

#[test]
fn static_system_and_inverse_column() {
    for &xi in &[0.2, 0.9, 2.5] {
        let s = boundary_system(C64::new(xi, 0.0), C64::new(0.0, 0.0)).unwrap();
        let col = static_inverse_last_column(xi);
        for k in 0..4 {
            assert!((s.a[k] - col[k]).norm() < 1e-12 * (1.0 + col[k].norm()), "xi={xi} k={k}");
        }
        assert!((s.traction().re - dtn_symbol_static(xi)).abs() < 1e-12 * (1.0 + xi));
    }
}

#[test]
fn static_symbol_limits() {
    assert_eq!(dtn_symbol_static(0.0), 0.0);
    let x: f64 = 1e-3;
    let pi = std::f64::consts::PI;
    assert!((dtn_symbol_static(x) / (pi.powi(3) * x.powi(4) / 48.0) - 1.0).abs() < 1e-4);
    assert!((dtn_symbol_static(50.0) - 50.0).abs() < 1e-10);
    let asym = |x: f64| -2.0 * x * (1.0 + pi * x + pi * pi * x * x / 2.0) * (-pi * x).exp();
    for x in [8.0, 15.0, 30.0] {
        assert!((dtn_symbol_static_residual(x) / asym(x) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn symbol_is_even_real_and_bounded_drift() {
    let lam = lambda();
    let w = C64::new(lam - 0.05, 0.0);
    for k in 0..=90 {
        let x = 10.0 + k as f64;
        assert!(dtn_symbol_residual(x, w).unwrap().norm() < 10.0);
    }
    for &x in &[0.1, 0.632, 2.0] {
        let (a, b) = (dtn_symbol(x, w).unwrap().value, dtn_symbol(-x, w).unwrap().value);
        assert_eq!(a, b);
        assert!(a.im.abs() < 1e-14 * a.norm());
    }
}

#[test]
fn symbol_continuous_below_threshold() {
    // fine scan for real ω in (0, Λ): finite and without jumps between neighbours
    let lam = lambda();
    for w in [0.05, 0.9, lam - 1e-4] {
        let vals: Vec<f64> = (0..=3000)
            .map(|k| dtn_symbol(1e-3 * k as f64, C64::new(w, 0.0)).unwrap().value.re)
            .collect();
        assert!(vals.iter().all(|v| v.is_finite()));
        // steps small relative to the local magnitude (the peak at κ is steep but smooth)
        for p in vals.windows(2) {
            assert!((p[1] - p[0]).abs() < 0.1 * p[0].abs().max(p[1].abs()).max(1.0), "w={w}");
        }
    }
}

#[test]
fn poles_are_rayleigh_lamb_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let xi: f64 = rng.gen_range(0.05..2.5);
        let b = branch_eigenvalues(xi, 1, &BranchOptions::default()).unwrap();
        let w = C64::new(b[0].omega, 0.0);
        assert!(matches!(dtn_symbol(xi, w), Err(crackwave::Error::OnEssentialSpectrum { .. })));
        // just off the pole the symbol is large
        let off = dtn_symbol(xi, w + C64::new(0.0, 1e-8)).unwrap().value.norm();
        assert!(off > 1e4, "xi={xi}: {off}");
    }
}

#[test]
fn low_frequency_limit_is_linear() {
    // m_ω − m₀ = O(ω): the difference shrinks tenfold from ω = 10⁻² to 10⁻³
    for &xi in &[0.3, 1.0, 2.0] {
        let m0 = dtn_symbol_static(xi);
        let d2 = dtn_symbol(xi, C64::new(1e-2, 0.0)).unwrap().value.re - m0;
        let d3 = dtn_symbol(xi, C64::new(1e-3, 0.0)).unwrap().value.re - m0;
        let ratio = d3 / d2;
        assert!((ratio - 0.1).abs() < 5e-3, "xi={xi}: {ratio}");
    }
}

#[test]
fn degenerate_fundamental_system_is_rejected() {
    assert!(matches!(
        boundary_system(C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
        Err(crackwave::Error::SingularSystem { .. })
    ));
    // the symbol itself is regular there
    assert!(dtn_symbol(1.0, C64::new(1.0, 0.0)).unwrap().value.re.is_finite());
}

#[test]
fn errors() {
    assert!(dtn_symbol(f64::NAN, C64::new(1.0, 0.0)).is_err());
    assert!(boundary_system(C64::new(0.0, 0.0), C64::new(0.0, 0.0)).is_err());
}
