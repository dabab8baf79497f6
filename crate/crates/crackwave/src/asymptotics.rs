//! Leading asymptotic constants of the gaps: ν₁, ν₂ for the strip and ρ_m for the
//! plate, together with the ingredients they are built from.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::boundary_op::{
    assemble_q0, factorial, leading_profile, rank_one_vector, singular_coupling, Basis, QAssembler, SymmetryClass,
    DEFAULT_N,
};
use crate::context::{SymbolKind, ThresholdContext};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::generalized_eigenvalues;

/// Relative agreement required between the general formula and the interval closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

/// ⟨Q₀⁻¹Ψ, Ψ⟩ for the leading profile Ψ of the class (1, x, or r^{|m|}e^{imφ}).
pub fn inverse_quadratic_form(basis: &Basis) -> Result<f64> {
    let q0 = assemble_q0(basis)?;
    let profile = leading_profile(basis.class);
    let b = basis.load_vector(&*profile);
    let x = q0
        .cholesky()
        .ok_or_else(|| Error::ConvergenceFailure("Q0 is not positive definite".into()))?
        .solve(&b);
    Ok(b.dot(&x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nu2d {
    pub nu1: f64,
    pub nu2: f64,
    /// 8π²|∂ψ|⁴/ζ″ and κ⁴π²|∂ψ|⁴/(8ζ″).
    pub nu1_closed: f64,
    pub nu2_closed: f64,
    pub ip_ct: f64,
    pub ip_id: f64,
    pub n: usize,
}

/// ν₁ = 32|∂ψ|⁴/ζ″·⟨Q₀⁻¹1,1⟩², ν₂ = 32κ⁴|∂ψ|⁴/ζ″·⟨Q₀⁻¹x,x⟩², checked against π/2 and π/16.
pub fn nu_constants_2d(ctx: &ThresholdContext, n: usize) -> Result<Nu2d> {
    let ip_ct = inverse_quadratic_form(&Basis::new(SymmetryClass::Symmetric, n)?)?;
    let ip_id = inverse_quadratic_form(&Basis::new(SymmetryClass::Antisymmetric, n)?)?;
    let base = 32.0 * ctx.dpsi_abs().powi(4) / ctx.zeta_pp();
    let k4 = ctx.kappa().powi(4);
    let pi = std::f64::consts::PI;
    let out = Nu2d {
        nu1: base * ip_ct * ip_ct,
        nu2: base * k4 * ip_id * ip_id,
        nu1_closed: base * (pi / 2.0).powi(2),
        nu2_closed: base * k4 * (pi / 16.0).powi(2),
        ip_ct,
        ip_id,
        n,
    };
    for (name, general, closed) in [("nu1", out.nu1, out.nu1_closed), ("nu2", out.nu2, out.nu2_closed)] {
        if ((general - closed) / closed).abs() > CLOSED_FORM_TOL {
            return Err(Error::IngredientMismatch { name, general, closed });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rho3d {
    pub m: i32,
    /// ℓ-independent: Λ − λ_m ≈ rho·ℓ^{6+4|m|}.
    pub rho: f64,
    /// The same expression without the Taylor factor 1/(|m|!)⁴ of J_m; equal to `rho` for |m| ≤ 1.
    pub rho_uncorrected: f64,
    pub ip: f64,
    /// Same quadratic form at twice the truncation.
    pub ip_refined: f64,
    pub n: usize,
}

/// ρ_m = 8κ^{4|m|+2}|∂ψ|⁴/((|m|!)⁴2^{4|m|}ζ″)·⟨Q₀⁻¹Ψ_m,Ψ_m⟩².
///
/// The (|m|!)⁴ comes from J_m(z) ≈ (z/2)^{|m|}/|m|!; without it the constant is off by
/// 16 at |m| = 2, as the direct eigenvalue solve confirms.
pub fn rho_constant_3d(ctx: &ThresholdContext, m: i32, n: usize) -> Result<Rho3d> {
    let ip = inverse_quadratic_form(&Basis::new(SymmetryClass::Channel(m), n)?)?;
    let ip_refined = inverse_quadratic_form(&Basis::new(SymmetryClass::Channel(m), 2 * n)?)?;
    let am = m.abs();
    let rho_uncorrected = 8.0 * ctx.kappa().powi(4 * am + 2) * ctx.dpsi_abs().powi(4)
        / (2f64.powi(4 * am) * ctx.zeta_pp())
        * ip
        * ip;
    let rho = rho_uncorrected / factorial(am.unsigned_abs()).powi(4);
    Ok(Rho3d { m, rho, rho_uncorrected, ip, ip_refined, n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingredients {
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub kappa: f64,
    pub zeta1_pp: f64,
    pub dpsi_abs: f64,
    pub ip_ct: f64,
    pub ip_id: f64,
    pub ip_m: BTreeMap<i32, f64>,
    pub n: usize,
    /// Producing module of each ingredient.
    pub sources: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub nu1_closed: f64,
    pub nu2_closed: f64,
    pub nu1_rel_diff: f64,
    pub nu2_rel_diff: f64,
    pub ratio_nu2_nu1: f64,
    pub ratio_expected: f64,
    pub ratio_rel_diff: f64,
    /// max_m |ρ_m − ρ_{−m}|/ρ_m.
    pub rho_pm_rel_diff: f64,
    pub all_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub nu1: f64,
    pub nu2: f64,
    pub rho: BTreeMap<i32, f64>,
    pub ingredients: Ingredients,
    pub checks: Checks,
}

impl AsymptoticConstants {
    pub fn compute(ctx: &ThresholdContext, n: usize, channels: &[i32]) -> Result<Self> {
        let nu = nu_constants_2d(ctx, n)?;
        let mut rho = BTreeMap::new();
        let mut ip_m = BTreeMap::new();
        for &m in channels {
            let r = rho_constant_3d(ctx, m, n)?;
            rho.insert(m, r.rho);
            ip_m.insert(m, r.ip);
        }
        let rho_pm_rel_diff = rho
            .iter()
            .filter_map(|(m, v)| rho.get(&-m).map(|w| ((v - w) / v).abs()))
            .fold(0.0, f64::max);
        let ratio = nu.nu2 / nu.nu1;
        let ratio_expected = ctx.kappa().powi(4) / 64.0;
        let sources = [
            ("Lambda", "dispersion"),
            ("kappa", "dispersion"),
            ("zeta1_pp", "dispersion"),
            ("dpsi_abs", "modes"),
            ("ip_ct", "boundary_op"),
            ("ip_id", "boundary_op"),
            ("ip_m", "boundary_op"),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        let all_positive = nu.nu1 > 0.0 && nu.nu2 > 0.0 && rho.values().all(|&r| r > 0.0);
        Ok(Self {
            nu1: nu.nu1,
            nu2: nu.nu2,
            rho,
            ingredients: Ingredients {
                lambda: ctx.lambda(),
                kappa: ctx.kappa(),
                zeta1_pp: ctx.zeta_pp(),
                dpsi_abs: ctx.dpsi_abs(),
                ip_ct: nu.ip_ct,
                ip_id: nu.ip_id,
                ip_m,
                n,
                sources,
            },
            checks: Checks {
                nu1_closed: nu.nu1_closed,
                nu2_closed: nu.nu2_closed,
                nu1_rel_diff: ((nu.nu1 - nu.nu1_closed) / nu.nu1_closed).abs(),
                nu2_rel_diff: ((nu.nu2 - nu.nu2_closed) / nu.nu2_closed).abs(),
                ratio_nu2_nu1: ratio,
                ratio_expected,
                ratio_rel_diff: ((ratio - ratio_expected) / ratio_expected).abs(),
                rho_pm_rel_diff,
                all_positive,
            },
        })
    }

    pub fn default_set(ctx: &ThresholdContext) -> Result<Self> {
        Self::compute(ctx, DEFAULT_N, &[-2, -1, 0, 1, 2])
    }
}

/// Leading gap exponent of a class: 4, 8, or 6 + 4|m|.
pub fn class_exponent(class: SymmetryClass) -> i32 {
    match class {
        SymmetryClass::Symmetric => 4,
        SymmetryClass::Antisymmetric => 8,
        SymmetryClass::Channel(m) => 6 + 4 * m.abs(),
    }
}

/// Empirical order of the correction: p + slope of ln|gap/(C·ℓ^p) − 1| against ln ℓ.
/// `None` if fewer than two deviations are nonzero.
pub fn correction_order<T: Real>(pairs: &[(T, T)], constant: T, exponent: T) -> Option<T> {
    let pts: Vec<(T, T)> = pairs
        .iter()
        .filter_map(|&(l, g)| {
            let d = (g / (constant * l.powf(exponent)) - T::one()).abs();
            (d > T::zero()).then(|| (l.ln(), d.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_usize_(pts.len());
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for &(x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    (sxx > T::zero()).then(|| exponent + sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub ell: f64,
    pub delta: f64,
    /// ‖ℓQ(ℓ,Λ−δ) − Q₀ + (c/√δ)vvᵀ‖ against the mass matrix.
    pub norm: f64,
}

/// Size of the expansion remainder of ℓ·Q on the class block.
pub fn expansion_remainder(asm: &QAssembler, ctx: &ThresholdContext, delta: f64) -> Result<RemainderSample> {
    let (basis, ell) = (asm.basis, asm.ell);
    let q = asm.q(SymbolKind::Gap(delta))?;
    let c = singular_coupling(basis.class, ell, ctx);
    let v = rank_one_vector(&basis, ell, ctx.kappa());
    let r: DMatrix<f64> = q * ell - asm.q0() + &v * v.transpose() * (c / delta.sqrt());
    let ev = generalized_eigenvalues(&r, asm.mass())?;
    let norm = ev.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    Ok(RemainderSample { ell, delta, norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_by_class() {
        assert_eq!(class_exponent(SymmetryClass::Symmetric), 4);
        assert_eq!(class_exponent(SymmetryClass::Antisymmetric), 8);
        assert_eq!(class_exponent(SymmetryClass::Channel(-2)), 14);
    }

    #[test]
    fn correction_order_of_synthetic_series() {
        let pairs: Vec<(f64, f64)> =
            [0.1, 0.05, 0.025, 0.0125].iter().map(|&l: &f64| (l, 2.0 * l.powi(4) * (1.0 + 3.0 * l))).collect();
        let p = correction_order(&pairs, 2.0, 4.0).unwrap();
        assert!((p - 5.0).abs() < 0.05, "{p}");
    }
}
