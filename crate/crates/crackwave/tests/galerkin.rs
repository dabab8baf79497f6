use crackwave::boundary_op::*;
use crackwave::context::{SymbolKind, ThresholdContext};
use crackwave::spectral::generalized_eigenvalues;
use nalgebra::DVector;

fn basis(class: &str, n: usize) -> Basis {
    Basis::new(class.parse().unwrap(), n).unwrap()
}

fn ctx() -> &'static ThresholdContext {
    ThresholdContext::shared().unwrap()
}

#[test]
fn q0_is_diagonal_with_closed_form_entries() {
    for class in ["s", "as"] {
        let b = basis(class, 32);
        let q0 = assemble_q0(&b).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let want = if i == j { std::f64::consts::PI * (b.degree(i) + 1) as f64 / 2.0 } else { 0.0 };
                assert!((q0[(i, j)] - want).abs() < 1e-8, "{class} ({i},{j})");
            }
        }
    }
}

#[test]
fn inverse_of_constant_profile() {
    let b = basis("s", 32);
    let q0 = assemble_q0(&b).unwrap();
    let f = b.load_vector(&|_| 1.0);
    let c = q0.clone().lu().solve(&f).unwrap();
    assert!((f.dot(&c) - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    for k in 0..21 {
        let x = -0.99 + 1.98 * k as f64 / 20.0;
        assert!((b.synthesize(&c, x) - (1.0 - x * x).sqrt()).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn inverse_of_linear_profile() {
    let b = basis("as", 32);
    let q0 = assemble_q0(&b).unwrap();
    let f = b.load_vector(&|x| x);
    let c = q0.clone().lu().solve(&f).unwrap();
    assert!((f.dot(&c) - std::f64::consts::PI / 16.0).abs() < 1e-6);
    for k in 0..21 {
        let x = -0.99 + 1.98 * k as f64 / 20.0;
        assert!((b.synthesize(&c, x) - x / 2.0 * (1.0 - x * x).sqrt()).abs() < 1e-6);
    }
}

#[test]
fn disk_inverse_quadratic_forms() {
    // radial profiles 1 and r: 4/3 and 16/45
    let q = |class: &str, f: &dyn Fn(f64) -> f64| {
        let b = basis(class, 16);
        let v = b.load_vector(f);
        v.dot(&assemble_q0(&b).unwrap().lu().solve(&v).unwrap())
    };
    assert!((q("m=0", &|_| 1.0) - 4.0 / 3.0).abs() < 1e-10);
    assert!((q("m=1", &|r| r) - 16.0 / 45.0).abs() < 1e-10);
}

#[test]
fn mass_and_q0_positive_definite_and_stable() {
    let mut last: Option<f64> = None;
    for n in [8, 16, 32] {
        let b = basis("s", n);
        let ev = generalized_eigenvalues(&assemble_q0(&b).unwrap(), &b.mass_matrix()).unwrap();
        assert!(ev[0] > 0.0);
        if let Some(l) = last {
            assert!((ev[0] - l).abs() < 1e-6 * l);
        }
        last = Some(ev[0]);
    }
    for class in ["as", "m=0", "m=2", "m=-1"] {
        let b = basis(class, 16);
        assert!(b.mass_matrix().cholesky().is_some());
        assert!(assemble_q0(&b).unwrap().cholesky().is_some());
    }
}

#[test]
fn assembled_blocks_are_symmetric() {
    for (class, ell) in [("s", 0.05), ("as", 0.05), ("m=0", 0.1), ("m=1", 0.3)] {
        let blk = assemble_q(&basis(class, 16), ell, ctx().lambda() - 1e-4, ctx()).unwrap();
        let q = &blk.q;
        let asym = (q - q.transpose()).amax();
        assert!(asym <= 1e-10 * q.amax(), "{class}: {asym}");
        assert!(blk.residual_at_cutoff < 1e-2);
        assert_eq!(blk.rank_one.len(), 16);
    }
}

#[test]
fn block_diagonality() {
    let c = ctx();
    let s = SymbolKind::Gap(1e-3);
    let m = cross_block_max(&basis("s", 4), &basis("as", 4), 0.5, s, c).unwrap();
    assert!(m < 1e-8, "{m}");
    let m = cross_block_max(&basis("m=0", 3), &basis("m=1", 3), 0.5, s, c).unwrap();
    assert!(m < 1e-8, "{m}");
    let m = cross_block_max(&basis("m=1", 3), &basis("m=-2", 3), 0.5, SymbolKind::Static, c).unwrap();
    assert!(m < 1e-8, "{m}");
    // same-class block is not trivially zero
    assert!(cross_block_max(&basis("s", 2), &basis("s", 2), 0.5, s, c).unwrap() > 1e-3);
}

#[test]
fn static_form_is_positive_semidefinite() {
    let blk = assemble_q_static(&basis("s", 16), 1.0, ctx()).unwrap();
    let ev = generalized_eigenvalues(&blk.q, &blk.mass).unwrap();
    assert!(ev[0] >= -1e-10, "{}", ev[0]);
    let blk = assemble_q_static(&basis("as", 16), 1.0, ctx()).unwrap();
    assert!(generalized_eigenvalues(&blk.q, &blk.mass).unwrap()[0] >= -1e-10);
}

#[test]
fn rank_one_vector_limits() {
    let k = ctx().kappa();
    let ell = 1e-4;
    let b = basis("s", 16);
    let v = rank_one_vector(&b, ell, k);
    let want = b.load_vector(&|_| 1.0);
    assert!((v - &want).amax() < 1e-6);

    let b = basis("as", 16);
    let v = rank_one_vector(&b, ell, k) / (k * ell);
    assert!((v - b.load_vector(&|x| x)).amax() < 1e-6);

    for m in [-2, 1, 2] {
        let b = basis(&format!("m={m}"), 12);
        let v = rank_one_vector(&b, ell, k) / leading_scale(b.class, ell, k);
        let p = leading_profile(b.class);
        let want: DVector<f64> = b.load_vector(&*p);
        assert!((v - &want).amax() < 1e-6 * want.amax(), "m={m}");
    }
}

#[test]
fn class_labels() {
    assert_eq!(SymmetryClass::Channel(-3).label(), "m=-3");
    assert!(Basis::new(SymmetryClass::Channel(21), 8).is_err());
    assert!(Basis::new(SymmetryClass::Symmetric, 0).is_err());
    assert_eq!(basis("m=0", 4).measure(), std::f64::consts::PI);
    assert_eq!(basis("s", 4).measure(), 2.0);
}

#[test]
fn bessel_negative_order_and_origin() {
    assert_eq!(bessel_j(0, 0.0), 1.0);
    for m in 1..=20 {
        assert_eq!(bessel_j(m, 0.0), 0.0);
        let x: f64 = 3.7;
        let s: f64 = if m % 2 == 0 { 1.0 } else { -1.0 };
        assert!((bessel_j(-m, x) - s * bessel_j(m, x)).abs() < 1e-15);
    }
}

#[test]
fn invalid_inputs() {
    let c = ctx();
    assert!(assemble_q(&basis("s", 8), 0.05, c.lambda() + 0.1, c).is_err());
    assert!(assemble_q(&basis("s", 8), -1.0, 1.0, c).is_err());
    assert!(assemble_q(&basis("s", 8), 0.05, f64::NAN, c).is_err());
}
