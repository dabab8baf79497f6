//! Threshold eigenfunctions of the symmetric channel and their boundary stress.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dispersion::{DispersionContext, ThresholdData};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

type C64 = Complex<f64>;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

/// Relative |Ψ| accepted for an eigenpair.
pub const EIGENPAIR_TOL: f64 = 1e-10;
/// |γ| below which the closed-form eigenfunction degenerates.
pub const GAMMA_MIN: f64 = 1e-2;
pub const DEFAULT_ORDER: usize = 64;

/// Closed-form (non-normalized) eigenfunction at an eigenpair (ξ, ω) and its first two
/// x₂-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RawMode {
    xi: f64,
    beta: C64,
    gamma: C64,
    cb: C64,
    cg: C64,
}

impl RawMode {
    fn new(xi: f64, omega: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::NonFinite("xi"));
        }
        if !omega.is_finite() {
            return Err(Error::NonFinite("omega"));
        }
        let ctx = DispersionContext::<f64>::new();
        let scale = ctx.rayleigh_lamb_scale_real(xi, omega);
        let residual = ctx.rayleigh_lamb_real(xi, omega).abs() / scale;
        if residual > EIGENPAIR_TOL {
            return Err(Error::NotAnEigenpair { residual });
        }
        let x = C64::new(xi, 0.0);
        let w = C64::new(omega, 0.0);
        let gamma = ctx.gamma(x, w);
        if gamma.norm() < GAMMA_MIN {
            return Err(Error::GammaZero { gamma: gamma.norm() });
        }
        let beta = ctx.beta(x, w);
        Ok(Self { xi, beta, gamma, cb: (beta * HALF_PI).cos(), cg: (gamma * HALF_PI).cos() })
    }

    /// [u, u′, u″] at x₂.
    fn eval(&self, x2: f64) -> [[C64; 2]; 3] {
        let (b, g, xi) = (self.beta, self.gamma, self.xi);
        let (b2, g2) = (b * b, g * g);
        let (cbx, sbx) = ((b * x2).cos(), (b * x2).sin());
        let (cgx, sgx) = ((g * x2).cos(), (g * x2).sin());
        let p = g2 * self.cg;
        let q = self.cb * xi * xi;
        let u1 = I * b * (p * cbx + q * cgx);
        let u1d = I * b * (-p * b * sbx - q * g * sgx);
        let u1dd = I * b * (-p * b2 * cbx - q * g2 * cgx);
        let r = xi * b * g * self.cb;
        let u2 = xi * p * sbx - r * sgx;
        let u2d = xi * p * b * cbx - r * g * cgx;
        let u2dd = -xi * p * b2 * sbx + r * g2 * sgx;
        [[u1, u2], [u1d, u2d], [u1dd, u2dd]]
    }
}

/// Non-normalized eigenfunction at x₂ ∈ I = (−π/2, π/2).
pub fn eigenfunction_2d(xi: f64, omega: f64, x2: f64) -> Result<[C64; 2]> {
    Ok(RawMode::new(xi, omega)?.eval(x2)[0])
}

/// Eigenfunction normalized to unit L₂ norm on I₊ = (0, π/2), with the phase fixed so
/// that ∂₂u₂(0) lies on the positive imaginary axis (phase 1 if it vanishes).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    raw: RawMode,
    pub xi: f64,
    pub omega: f64,
    /// L₂(I₊) norm of the non-normalized profile.
    pub norm_half: f64,
    /// Unimodular phase times 1/norm_half.
    pub factor: C64,
}

fn half_norm(raw: &RawMode, order: usize) -> f64 {
    GaussLegendre::<f64>::new(order)
        .integrate(0.0, HALF_PI, |x| {
            let [u1, u2] = raw.eval(x)[0];
            u1.norm_sqr() + u2.norm_sqr()
        })
        .sqrt()
}

impl ModeProfile {
    pub fn new(xi: f64, omega: f64) -> Result<Self> {
        Self::with_order(xi, omega, DEFAULT_ORDER)
    }

    /// Normalizes with Gauss–Legendre of `order` nodes, guarded by `2·order`.
    pub fn with_order(xi: f64, omega: f64, order: usize) -> Result<Self> {
        let raw = RawMode::new(xi, omega)?;
        let n1 = half_norm(&raw, order);
        let n2 = half_norm(&raw, 2 * order);
        if !(n1 > 0.0) || ((n1 - n2) / n2).abs() > 1e-12 {
            return Err(Error::ConvergenceFailure(format!(
                "mode norm: order {order} gives {n1}, order {} gives {n2}",
                2 * order
            )));
        }
        let d = raw.eval(0.0)[1][1];
        let phase = if d.norm() > 0.0 { I * d.conj() / d.norm() } else { C64::new(1.0, 0.0) };
        Ok(Self { raw, xi, omega, norm_half: n2, factor: phase / n2 })
    }

    pub fn eval(&self, x2: f64) -> [C64; 2] {
        let [u1, u2] = self.raw.eval(x2)[0];
        [u1 * self.factor, u2 * self.factor]
    }

    /// [ψ, ψ′, ψ″] at x₂.
    pub fn eval_derivatives(&self, x2: f64) -> [[C64; 2]; 3] {
        self.raw.eval(x2).map(|[a, b]| [a * self.factor, b * self.factor])
    }

    /// ∂₂ψ₂(0).
    pub fn dpsi2_at_0(&self) -> C64 {
        self.raw.eval(0.0)[1][1] * self.factor
    }
}

/// 3D eigenfunction at wavevector ξ ∈ ℝ²: the 2D profile at |ξ| rotated by the polar
/// angle α of ξ, (cos α·u₁, sin α·u₁, u₂).
pub fn eigenfunction_3d(xi: [f64; 2], omega: f64, x3: f64) -> Result<[C64; 3]> {
    let r = xi[0].hypot(xi[1]);
    let alpha = xi[1].atan2(xi[0]);
    let [u1, u2] = eigenfunction_2d(r, omega, x3)?;
    Ok([u1 * alpha.cos(), u1 * alpha.sin(), u2])
}

/// Normalized 3D profile; the normalization is that of the embedded 2D mode.
pub fn eigenfunction_3d_normalized(profile: &ModeProfile, alpha: f64, x3: f64) -> [C64; 3] {
    let [u1, u2] = profile.eval(x3);
    [u1 * alpha.cos(), u1 * alpha.sin(), u2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdModeData {
    pub kappa: f64,
    pub lambda: f64,
    /// ∂₂ψ_{κ,2}(0) of the normalized mode (on the positive imaginary axis).
    pub dpsi2_at_0: C64,
    /// |∂₂ψ_{κ,2}(0)|.
    pub dpsi2_abs: f64,
    /// 1/‖u‖_{L₂(I₊)} of the closed-form representative.
    pub normalization: f64,
    /// Same modulus from c·κ(Λ/2−κ²)√(Λ−κ²)[cos(π/2·√(Λ/2−κ²)) − cos(π/2·√(Λ−κ²))].
    pub closed_form_abs: f64,
    pub quadrature_orders: (usize, usize),
}

pub fn threshold_mode(thr: &ThresholdData) -> Result<ThresholdModeData> {
    threshold_mode_with(thr.kappa, thr.lambda, DEFAULT_ORDER)
}

pub fn threshold_mode_with(kappa: f64, lambda: f64, order: usize) -> Result<ThresholdModeData> {
    let p = ModeProfile::with_order(kappa, lambda, order)?;
    let d = p.dpsi2_at_0();
    let c = 1.0 / p.norm_half;
    let g2 = lambda / 2.0 - kappa * kappa;
    let b2 = lambda - kappa * kappa;
    let closed = c
        * kappa
        * g2
        * b2.sqrt()
        * ((HALF_PI * g2.sqrt()).cos() - (HALF_PI * b2.sqrt()).cos());
    if ((closed.abs() - d.norm()) / d.norm()).abs() > 1e-10 {
        return Err(Error::ConvergenceFailure(format!(
            "closed-form boundary stress {} vs {}",
            closed.abs(),
            d.norm()
        )));
    }
    Ok(ThresholdModeData {
        kappa,
        lambda,
        dpsi2_at_0: d,
        dpsi2_abs: d.norm(),
        normalization: c,
        closed_form_abs: closed.abs(),
        quadrature_orders: (order, 2 * order),
    })
}
