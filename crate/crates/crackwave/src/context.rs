//! Threshold context shared by the boundary and spectral layers, and the residual
//! symbol r(η) = m(η) − |η| evaluated with relative accuracy near the threshold pole.

use std::sync::OnceLock;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dispersion::{psi_omega_taylor, threshold, ThresholdData, ThresholdModel, ThresholdOptions};
use crate::dtn::{dtn_symbol_residual, dtn_symbol_static_residual};
use crate::error::{Error, Result};
use crate::modes::{threshold_mode_with, ThresholdModeData, DEFAULT_ORDER};
use crate::special::{cos_root, sin_ratio};

type C64 = Complex<f64>;

/// Threshold data, the local model of ζ₁ and the normalized threshold mode.
///
/// Gaps δ = Λ − ω are measured from `model.lambda`, which agrees with the minimized
/// `data.lambda` to rounding but is consistent with the excess ζ₁(η) − Λ used in the
/// near-pole factorization.
#[derive(Debug, Clone)]
pub struct ThresholdContext {
    pub data: ThresholdData,
    pub model: ThresholdModel,
    pub mode: ThresholdModeData,
}

static SHARED: OnceLock<std::result::Result<ThresholdContext, Error>> = OnceLock::new();

impl ThresholdContext {
    pub fn compute(opts: &ThresholdOptions) -> Result<Self> {
        let data = threshold(opts)?;
        let model = ThresholdModel::build(&data)?;
        let mode = threshold_mode_with(model.kappa, model.lambda, DEFAULT_ORDER)?;
        Ok(Self { data, model, mode })
    }

    /// Process-wide context with default options, computed once.
    pub fn shared() -> Result<&'static ThresholdContext> {
        SHARED
            .get_or_init(|| Self::compute(&ThresholdOptions::default()))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn lambda(&self) -> f64 {
        self.model.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.model.kappa
    }

    /// ζ₁″(κ) from the local model.
    pub fn zeta_pp(&self) -> f64 {
        2.0 * self.model.c2
    }

    pub fn dpsi_abs(&self) -> f64 {
        self.mode.dpsi2_abs
    }

    /// Half-width of the pole window around κ.
    pub const WINDOW: f64 = 0.1;
    /// Below this gap the pole window uses the factorized kernel.
    pub const FACTORIZE_BELOW: f64 = 1e-3;

    /// √(δ/c₂): the η-scale of the near-threshold peak.
    pub fn peak_width(&self, delta: f64) -> f64 {
        (delta / self.model.c2).sqrt()
    }
}

/// Which Dirichlet-to-Neumann symbol to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SymbolKind {
    /// m₀.
    Static,
    /// m_ω with ω = Λ − δ.
    Gap(f64),
}

impl SymbolKind {
    pub fn omega(&self, ctx: &ThresholdContext) -> f64 {
        match *self {
            SymbolKind::Static => 0.0,
            SymbolKind::Gap(d) => ctx.lambda() - d,
        }
    }
}

const TAYLOR_RADIUS: f64 = 0.25;
const TAYLOR_TERMS: usize = 14;

/// Numerator of m_ω in squared variables.
fn symbol_numerator(eta: f64, omega: f64) -> f64 {
    let x2 = C64::new(eta * eta, 0.0);
    let w = C64::new(omega, 0.0);
    let b2 = w - x2;
    let g2 = w * 0.5 - x2;
    let (sb, cb, sg, cg) = (sin_ratio(b2), cos_root(b2), sin_ratio(g2), cos_root(g2));
    let p = g2 * g2 * g2 + 2.0 * g2 * x2 * x2 + x2 * x2 * x2;
    (-2.0 * sb * sg * p + 4.0 * (cb * cg - 1.0) * g2 * x2).re
}

/// r(η) = m(η) − |η| for η ≥ 0.
///
/// Inside the pole window and for small gaps, Ψ(η, Λ−δ) is written as −h·G(h) with
/// h = (ζ₁(η) − Λ) + δ, G the Taylor series of Ψ(η, ζ₁(η) + t)/t at t = −h, so that the
/// near-cancelling difference ω − ζ₁(η) is never formed.
pub fn residual_symbol(ctx: &ThresholdContext, kind: SymbolKind, eta: f64) -> Result<f64> {
    match kind {
        SymbolKind::Static => Ok(dtn_symbol_static_residual(eta)),
        SymbolKind::Gap(delta) => {
            if !(delta > 0.0) {
                return Err(Error::InvalidInput(format!("gap must be positive, got {delta}")));
            }
            let omega = ctx.lambda() - delta;
            let near = (eta - ctx.kappa()).abs() < ThresholdContext::WINDOW;
            if near && delta < ThresholdContext::FACTORIZE_BELOW {
                let e = ctx.model.excess(eta);
                let h = e + delta;
                let centre = C64::new(ctx.lambda() + e, 0.0);
                let c = psi_omega_taylor(C64::new(eta, 0.0), centre, TAYLOR_RADIUS, TAYLOR_TERMS);
                let mut g = 0.0;
                for ck in c[1..].iter().rev() {
                    g = g * (-h) + ck.re;
                }
                let m = symbol_numerator(eta, omega) / (0.5 * omega * (-h) * g);
                Ok(m - eta)
            } else {
                Ok(dtn_symbol_residual(eta, C64::new(omega, 0.0))?.re)
            }
        }
    }
}
