use crackwave::asymptotics::rho_constant_3d;
use crackwave::boundary_op::{Basis, QAssembler, SymmetryClass};
use crackwave::context::{SymbolKind, ThresholdContext};
use crackwave::dispersion::{branch_eigenvalues, rayleigh_lamb, zeta1, BranchOptions};
use crackwave::dtn::{boundary_determinant, determinant_factorization, dtn_symbol};
use crackwave::spectral::{fit_power_law, generalized_eigenvalues};
use num_complex::Complex;
use proptest::prelude::*;

type C64 = Complex<f64>;

fn ctx() -> &'static ThresholdContext {
    ThresholdContext::shared().unwrap()
}

fn literal_psi(xi: C64, omega: C64) -> C64 {
    let beta = (omega - xi * xi).sqrt();
    let gamma = (omega * 0.5 - xi * xi).sqrt();
    let h = std::f64::consts::FRAC_PI_2;
    (beta * h).sin() / beta * (gamma * h).cos() * gamma * gamma + (beta * h).cos() * (gamma * h).sin() / gamma * xi * xi
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn psi_even_in_xi(xr in -3.0..3.0f64, xi in -1.0..1.0f64, wr in -1.0..5.0f64, wi in -1.0..1.0f64) {
        let (x, w) = (C64::new(xr, xi), C64::new(wr, wi));
        let (a, b) = (rayleigh_lamb(x, w).unwrap(), rayleigh_lamb(-x, w).unwrap());
        prop_assert!((a - b).norm() <= 1e-13 * (1.0 + a.norm()));
    }

    #[test]
    fn psi_matches_literal_form(xr in -3.0..3.0f64, xi in -0.5..0.5f64, wr in 0.0..5.0f64, wi in -0.5..0.5f64) {
        let (x, w) = (C64::new(xr, xi), C64::new(wr, wi));
        let (b, g) = ((w - x * x).sqrt(), (w * 0.5 - x * x).sqrt());
        prop_assume!(b.norm() > 1e-2 && g.norm() > 1e-2);
        let (a, l) = (rayleigh_lamb(x, w).unwrap(), literal_psi(x, w));
        prop_assert!((a - l).norm() <= 1e-10 * (1.0 + l.norm()), "{} vs {}", a, l);
    }

    #[test]
    fn determinant_factorizes(xr in 0.0..3.0f64, xi in -0.3..0.3f64, wr in 0.1..4.0f64, wi in 0.05..1.0f64) {
        let (x, w) = (C64::new(xr, xi), C64::new(wr, wi));
        let (d, f) = (boundary_determinant(x, w), determinant_factorization(x, w));
        prop_assert!((d - f).norm() <= 1e-10 * f.norm());
    }

    #[test]
    fn symbol_even_and_real_below_threshold(x in 0.0..8.0f64, t in 0.001..0.999f64) {
        let w = C64::new(t * ctx().lambda(), 0.0);
        let (a, b) = (dtn_symbol(x, w).unwrap().value, dtn_symbol(-x, w).unwrap().value);
        prop_assert_eq!(a, b);
        prop_assert!(a.im.abs() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn class_labels_round_trip(m in -20i32..=20, pick in 0..3u8) {
        let c = match pick { 0 => SymmetryClass::Symmetric, 1 => SymmetryClass::Antisymmetric, _ => SymmetryClass::Channel(m) };
        prop_assert_eq!(c.label().parse::<SymmetryClass>().unwrap(), c);
    }

    #[test]
    fn noiseless_power_law_recovered(p in 0.5..16.0f64, c in 1e-6..1e3f64, l0 in 0.05..1.0f64, r in 0.3..0.8f64) {
        let pairs: Vec<(f64, f64)> = (0..5).map(|k| { let l = l0 * r.powi(k); (l, c * l.powf(p)) }).collect();
        let f = fit_power_law(&pairs).unwrap();
        prop_assert!((f.exponent - p).abs() < 1e-9);
        prop_assert!((f.prefactor / c - 1.0).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zeta1_symmetric(x in 0.0..2.5f64) {
        let (a, b) = (zeta1(x).unwrap(), zeta1(-x).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn branches_simple_and_above_threshold(x in 0.0..3.0f64) {
        let b = branch_eigenvalues(x, 3, &BranchOptions::default()).unwrap();
        prop_assert!(b.windows(2).all(|w| w[1].omega > w[0].omega + 1e-8));
        prop_assert!(b[0].omega >= ctx().lambda() - 1e-10);
    }

    #[test]
    fn mu1_monotone_in_omega(ell in 0.03..0.1f64, a in -8.0..-1.5f64, b in -8.0..-1.5f64) {
        prop_assume!((a - b).abs() > 0.1);
        let (near, far) = (10f64.powf(a.min(b)), 10f64.powf(a.max(b)));
        let asm = QAssembler::new(Basis::new(SymmetryClass::Symmetric, 16).unwrap(), ell, ctx()).unwrap();
        let mu = |d: f64| generalized_eigenvalues(&asm.q(SymbolKind::Gap(d)).unwrap(), asm.mass()).unwrap()[0];
        prop_assert!(mu(near) < mu(far));
    }

    #[test]
    fn q_matrix_symmetric(ell in 0.02..0.5f64, d in -9.0..-1.1f64, pick in 0..4u8) {
        let class = match pick { 0 => SymmetryClass::Symmetric, 1 => SymmetryClass::Antisymmetric, k => SymmetryClass::Channel(k as i32 - 2) };
        let asm = QAssembler::new(Basis::new(class, 12).unwrap(), ell, ctx()).unwrap();
        let q = asm.q(SymbolKind::Gap(10f64.powf(d))).unwrap();
        prop_assert!((&q - q.transpose()).amax() <= 1e-10 * q.amax());
    }

    #[test]
    fn rho_depends_on_abs_m(m in 1i32..=4) {
        let (a, b) = (rho_constant_3d(ctx(), m, 16).unwrap(), rho_constant_3d(ctx(), -m, 16).unwrap());
        prop_assert!(((a.rho - b.rho) / a.rho).abs() < 1e-12);
        prop_assert!(a.rho > 0.0);
    }
}
