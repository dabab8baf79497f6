use crackwave::asymptotics::*;
use crackwave::boundary_op::{Basis, QAssembler, SymmetryClass};
use crackwave::context::ThresholdContext;
use crackwave::spectral::find_eigenvalue_direct;

fn ctx() -> &'static ThresholdContext {
    ThresholdContext::shared().unwrap()
}

#[test]
fn nu_general_matches_closed_form() {
    let nu = nu_constants_2d(ctx(), 32).unwrap();
    assert!((nu.ip_ct - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    assert!((nu.ip_id - std::f64::consts::PI / 16.0).abs() < 1e-6);
    assert!(((nu.nu1 - nu.nu1_closed) / nu.nu1_closed).abs() < CLOSED_FORM_TOL);
    assert!(((nu.nu2 - nu.nu2_closed) / nu.nu2_closed).abs() < CLOSED_FORM_TOL);
    // frozen high-precision values
    assert!((nu.nu1 / 70.625_616_013_545_74 - 1.0).abs() < 1e-8, "{}", nu.nu1);
    assert!((nu.nu2 / 0.176_210_128_581_015 - 1.0).abs() < 1e-8, "{}", nu.nu2);
}

#[test]
fn constants_report() {
    let c = AsymptoticConstants::default_set(ctx()).unwrap();
    assert!(c.checks.all_positive);
    assert!(c.checks.ratio_rel_diff < 1e-8);
    assert!(c.checks.rho_pm_rel_diff < 1e-10);
    assert!(c.nu1 > 0.0 && c.nu2 > 0.0);
    assert_eq!(c.rho.keys().copied().collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
    assert!((c.rho[&0] / 5.083_516_918_802_756 - 1.0).abs() < 1e-8);
    assert!((c.rho[&1] / 0.003_607_699_435_097_532_5 - 1.0).abs() < 1e-7);
    for k in ["Lambda", "kappa", "zeta1_pp", "dpsi_abs", "ip_ct", "ip_id"] {
        assert!(c.ingredients.sources.contains_key(k), "{k}");
    }
    assert_eq!(c.ingredients.sources["dpsi_abs"], "modes");
}

#[test]
fn channel_quadratic_forms_converged() {
    for m in 0..=3 {
        let r = rho_constant_3d(ctx(), m, 32).unwrap();
        assert!(((r.ip - r.ip_refined) / r.ip).abs() < 1e-10, "m={m}");
        assert!(r.rho > 0.0);
    }
    // radial profiles 1 and r
    assert!((rho_constant_3d(ctx(), 0, 16).unwrap().ip - 4.0 / 3.0).abs() < 1e-10);
    assert!((rho_constant_3d(ctx(), -1, 16).unwrap().ip - 16.0 / 45.0).abs() < 1e-10);
}

#[test]
fn factorial_factor_for_higher_channels() {
    let r1 = rho_constant_3d(ctx(), 1, 32).unwrap();
    assert_eq!(r1.rho, r1.rho_uncorrected);
    let r2 = rho_constant_3d(ctx(), 2, 32).unwrap();
    assert!((r2.rho_uncorrected / r2.rho - 16.0).abs() < 1e-12);
    // the direct solve follows the corrected constant: gap/ℓ¹⁴ → ρ₂ from above
    let b = Basis::new(SymmetryClass::Channel(2), 32).unwrap();
    let g = find_eigenvalue_direct(&b, 0.5, ctx()).unwrap().gap / 0.5f64.powi(14);
    assert!((g / r2.rho - 1.0).abs() < 0.05, "{g} vs {}", r2.rho);
}

#[test]
fn remainder_bounded_over_grid() {
    let mut worst = 0.0f64;
    for class in [SymmetryClass::Symmetric, SymmetryClass::Antisymmetric] {
        for ell in [0.1, 0.05, 0.025] {
            let asm = QAssembler::new(Basis::new(class, 16).unwrap(), ell, ctx()).unwrap();
            let norms: Vec<f64> =
                [1e-2, 1e-4, 1e-6].iter().map(|&d| expansion_remainder(&asm, ctx(), d).unwrap().norm).collect();
            // no growth as δ → 0 while the singular term itself grows like δ^{-1/2}
            assert!(norms[2] < 1.5 * norms[1], "{class} ell={ell}: {norms:?}");
            worst = worst.max(norms.iter().fold(0.0, |a: f64, &b| a.max(b)) / ell);
        }
    }
    assert!(worst < 1.0, "{worst}");
}

#[test]
fn correction_order_of_symmetric_sweep() {
    let b = Basis::new(SymmetryClass::Symmetric, 32).unwrap();
    let pairs: Vec<(f64, f64)> =
        [0.1, 0.05, 0.025].iter().map(|&l| (l, find_eigenvalue_direct(&b, l, ctx()).unwrap().gap)).collect();
    let nu1 = nu_constants_2d(ctx(), 32).unwrap().nu1;
    let p = correction_order(&pairs, nu1, 4.0).unwrap();
    // at least one order beyond the leading term
    assert!(p > 5.0, "{p}");
}
