use crackwave::boundary_op::{Basis, SymmetryClass};
use crackwave::context::ThresholdContext;
use crackwave::spectral::*;
use crackwave::Error;

fn ctx() -> &'static ThresholdContext {
    ThresholdContext::shared().unwrap()
}

fn solver(class: &str, n: usize, ell: f64) -> ClassSolver<'static> {
    ClassSolver::new(Basis::new(class.parse().unwrap(), n).unwrap(), ell, ctx()).unwrap()
}

#[test]
fn mu1_decreases_and_diverges_toward_threshold() {
    let s = solver("s", 32, 0.05);
    let v: Vec<f64> = [1e-2, 1e-4, 1e-6].iter().map(|&d| s.mu1(d).unwrap()).collect();
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
    assert!(v[2] < v[0] - 10.0, "{v:?}");
    // also through the ω-parametrized entry point
    let b = s.basis();
    let a = mu1(&b, 0.05, ctx().lambda() - 1e-2, ctx()).unwrap();
    assert!((a - v[0]).abs() < 1e-12 * a.abs().max(1.0));
    assert!(mu1(&b, 0.05, ctx().lambda() + 1e-3, ctx()).is_err());
}

#[test]
fn second_eigenvalue_positive() {
    for class in ["s", "as"] {
        let s = solver(class, 16, 0.05);
        for k in 0..8 {
            let d = 0.05 * 10f64.powi(-2 * k);
            let mu = s.mu(d).unwrap();
            assert!(mu[1] > 0.0, "{class} delta={d}: {}", mu[1]);
        }
    }
}

#[test]
fn direct_root_is_unique_crossing() {
    for class in ["s", "as"] {
        let s = solver(class, 32, 0.05);
        let r = s.direct().unwrap();
        assert!(r.gap > 0.0 && r.lambda < ctx().lambda());
        assert_eq!(r.route, Route::Direct);
        // μ₁(λ − gap/10) > 0 > μ₁(λ + gap/10)
        assert!(s.mu1(r.gap * 1.1).unwrap() > 0.0, "{class}");
        assert!(s.mu1(r.gap * 0.9).unwrap() < 0.0, "{class}");
        let deltas: Vec<f64> = (0..=60).map(|k| 1e-15 * 10f64.powf(k as f64 * 13.7 / 60.0)).collect();
        assert_eq!(s.sign_changes(&deltas).unwrap(), 1, "{class}");
    }
}

#[test]
fn routes_agree_and_classes_order() {
    let (s, a) = (solver("s", 32, 0.05), solver("as", 32, 0.05));
    let (sd, ad) = (s.direct().unwrap(), a.direct().unwrap());
    for (solver, d) in [(&s, &sd), (&a, &ad)] {
        let b = solver.birman_schwinger().unwrap();
        assert_eq!(b.route, Route::BirmanSchwinger);
        assert!(b.iterations <= BS_MAX_ITER);
        assert!((d.lambda - b.lambda).abs() / d.gap < 0.05, "{} vs {}", d.gap, b.gap);
    }
    // ℓ⁴ against ℓ⁸
    assert!(sd.gap > 1e3 * ad.gap, "{} {}", sd.gap, ad.gap);
}

#[test]
fn channel_zero_routes_agree() {
    let s = solver("m=0", 32, 0.05);
    let (d, b) = (s.direct().unwrap(), s.birman_schwinger().unwrap());
    assert!((d.lambda - b.lambda).abs() / d.gap < 0.05);
    assert_eq!(d.class, SymmetryClass::Channel(0));
}

#[test]
fn birman_schwinger_leading_order() {
    // √gap ≈ 8|∂ψ|²/√(2ζ″)·(π/2)·ℓ²
    let c = ctx();
    let lead = |ell: f64| 8.0 * c.dpsi_abs().powi(2) / (2.0 * c.zeta_pp()).sqrt() * std::f64::consts::FRAC_PI_2 * ell * ell;
    let mut last = f64::INFINITY;
    for ell in [0.1, 0.05, 0.025] {
        let r = find_eigenvalue_birman_schwinger(&Basis::new(SymmetryClass::Symmetric, 32).unwrap(), ell, c).unwrap();
        let rel = (r.gap.sqrt() / lead(ell) - 1.0).abs();
        assert!(rel < last, "ell={ell}: {rel}");
        last = rel;
    }
    assert!(last < 1e-2, "{last}");
}

#[test]
fn gaps_increase_with_ell_and_vanish() {
    let b = Basis::new(SymmetryClass::Symmetric, 32).unwrap();
    let gaps: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&l| find_eigenvalue_direct(&b, l, ctx()).unwrap().gap)
        .collect();
    assert!(gaps.windows(2).all(|w| w[0] > w[1]), "{gaps:?}");
    assert!(gaps[3] < gaps[2] / 10.0);
}

#[test]
fn truncation_converged() {
    let (a, b) = (solver("s", 32, 0.05), solver("s", 64, 0.05));
    let d = (a.mu1(1e-3).unwrap() - b.mu1(1e-3).unwrap()).abs();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn gap_below_resolution_has_no_sign_change() {
    // ℓ⁸ ≈ 10⁻¹⁹ is beneath the search floor
    let err = solver("as", 16, 0.005).direct().unwrap_err();
    assert!(matches!(err, Error::NoSignChange { .. }), "{err:?}");
}

#[test]
fn fits() {
    let pairs: Vec<(f64, f64)> = [0.4f64, 0.2, 0.1, 0.05, 0.025].iter().map(|&l| (l, 0.5 * l.powi(10))).collect();
    let f = fit_power_law(&pairs).unwrap();
    assert!((f.exponent - 10.0).abs() < 1e-10 && (f.prefactor / 0.5 - 1.0).abs() < 1e-9);
    assert!((f.r_squared - 1.0).abs() < 1e-12);
    assert!((fixed_exponent_prefactor(&pairs, 10.0).unwrap() / 0.5 - 1.0).abs() < 1e-12);
    assert!(fixed_exponent_prefactor(&[(0.1, -1.0)], 4.0).is_err());
    // unsorted input is accepted and reported descending
    let mut rev = pairs.clone();
    rev.reverse();
    assert_eq!(fit_power_law(&rev).unwrap().ell_grid, f.ell_grid);
}
