//! Trapped-mode eigenvalues below the threshold, by the zero crossing of μ₁(ℓ,·) and by
//! the rank-one Birman–Schwinger fixed point, and power-law fits of the gaps.

use std::cell::RefCell;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::boundary_op::{singular_coupling, Basis, QAssembler, SymmetryClass};
use crate::context::{SymbolKind, ThresholdContext};
use crate::error::{Error, Result};
use crate::roots::brent_root;
use crate::scalar::Real;

/// Default window: gaps Λ − ω in (GAP_MIN, EPSILON).
pub const EPSILON: f64 = 0.1;
pub const GAP_MIN: f64 = 1e-16;
pub const BS_MAX_ITER: usize = 100;
pub const BS_TOL: f64 = 1e-12;
/// Steps below this that stop shrinking are at the quadrature noise floor of T.
pub const BS_STALL_TOL: f64 = 1e-9;
/// Root tolerance of the direct search in t = ln δ, i.e. relative to the gap.
pub const DIRECT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    BirmanSchwinger,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::BirmanSchwinger => "birman_schwinger",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub ell: f64,
    pub class: SymmetryClass,
    pub n: usize,
    pub lambda: f64,
    /// Λ − λ, carried separately since it is far below the resolution of λ.
    pub gap: f64,
    pub route: Route,
    /// μ₁(ℓ, λ).
    pub mu1_residual: f64,
    pub iterations: usize,
}

/// Generalized eigenvalues of Q v = μ M v in ascending order.
pub fn generalized_eigenvalues(q: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::ConvergenceFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::ConvergenceFailure("singular Cholesky factor".into()))?;
    let a = &linv * q * linv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// Eigenvalue searches for one class block at fixed ℓ.
pub struct ClassSolver<'a> {
    asm: QAssembler<'a>,
    ctx: &'a ThresholdContext,
}

impl<'a> ClassSolver<'a> {
    pub fn new(basis: Basis, ell: f64, ctx: &'a ThresholdContext) -> Result<Self> {
        Ok(Self { asm: QAssembler::new(basis, ell, ctx)?, ctx })
    }

    pub fn basis(&self) -> Basis {
        self.asm.basis
    }

    pub fn ell(&self) -> f64 {
        self.asm.ell
    }

    pub fn assembler(&self) -> &QAssembler<'a> {
        &self.asm
    }

    /// μ₁ ≤ μ₂ ≤ … at ω = Λ − δ.
    pub fn mu(&self, delta: f64) -> Result<Vec<f64>> {
        let q = self.asm.q(SymbolKind::Gap(delta))?;
        generalized_eigenvalues(&q, self.asm.mass())
    }

    pub fn mu1(&self, delta: f64) -> Result<f64> {
        Ok(self.mu(delta)?[0])
    }

    fn result(&self, delta: f64, route: Route, iterations: usize) -> Result<EigenResult> {
        Ok(EigenResult {
            ell: self.ell(),
            class: self.basis().class,
            n: self.basis().n,
            lambda: self.ctx.lambda() - delta,
            gap: delta,
            route,
            mu1_residual: self.mu1(delta)?,
            iterations,
        })
    }

    /// Unique zero of δ ↦ μ₁(ℓ, Λ−δ) in (GAP_MIN, EPSILON/2), searched in t = ln δ.
    pub fn direct(&self) -> Result<EigenResult> {
        self.direct_with_tol(DIRECT_TOL)
    }

    /// As [`direct`](Self::direct) with a custom relative gap tolerance.
    pub fn direct_with_tol(&self, tol: f64) -> Result<EigenResult> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        let (lo, hi) = (GAP_MIN, EPSILON / 2.0);
        let f_hi = self.mu1(hi)?;
        let f_lo = self.mu1(lo)?;
        if !(f_hi > 0.0 && f_lo < 0.0) {
            return Err(Error::NoSignChange { lo, hi });
        }
        let err = RefCell::new(None);
        let evals = RefCell::new(0usize);
        let t = brent_root(
            |t| {
                *evals.borrow_mut() += 1;
                match self.mu1(t.exp()) {
                    Ok(v) => v,
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            lo.ln(),
            hi.ln(),
            f_lo,
            f_hi,
            tol,
            200,
        )?;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        self.result(t.exp(), Route::Direct, evals.into_inner())
    }

    /// Fixed point √δ = c(ℓ)·vᵀT(δ)⁻¹v with T = ℓQ + (c/√δ)vvᵀ.
    pub fn birman_schwinger(&self) -> Result<EigenResult> {
        let ell = self.ell();
        let c = singular_coupling(self.basis().class, ell, self.ctx);
        let v = crate::boundary_op::rank_one_vector(&self.basis(), ell, self.ctx.kappa());
        let quad = |t: &DMatrix<f64>| -> Result<f64> {
            let x = t
                .clone()
                .lu()
                .solve(&v)
                .ok_or_else(|| Error::FixedPointDivergence { iterations: 0 })?;
            Ok(v.dot(&x))
        };
        let mut delta = (c * quad(self.asm.q0())?).powi(2);
        let mut last_step = f64::INFINITY;
        for it in 1..=BS_MAX_ITER {
            if !(delta > GAP_MIN) || !delta.is_finite() {
                return Err(Error::FixedPointDivergence { iterations: it });
            }
            let t = self.regular_part(delta, c, &v)?;
            let s = c * quad(&t)?;
            if !(s > 0.0) {
                return Err(Error::FixedPointDivergence { iterations: it });
            }
            let next = s * s;
            let step = ((next - delta) / delta).abs();
            let done = step < BS_TOL || (step < BS_STALL_TOL && step >= last_step);
            last_step = step;
            delta = next;
            if done {
                return self.result(delta, Route::BirmanSchwinger, it);
            }
        }
        Err(Error::FixedPointDivergence { iterations: BS_MAX_ITER })
    }

    /// ℓ·Q(ℓ,Λ−δ) with the singular rank-one term removed.
    pub fn regular_part(&self, delta: f64, c: f64, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let q = self.asm.q(SymbolKind::Gap(delta))?;
        Ok(q * self.ell() + v * v.transpose() * (c / delta.sqrt()))
    }

    /// Number of sign changes of μ₁ along the given gaps.
    pub fn sign_changes(&self, deltas: &[f64]) -> Result<usize> {
        let values: Vec<f64> = deltas.iter().map(|&d| self.mu1(d)).collect::<Result<_>>()?;
        Ok(values.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count())
    }
}

pub fn mu1(basis: &Basis, ell: f64, omega: f64, ctx: &ThresholdContext) -> Result<f64> {
    let delta = ctx.lambda() - omega;
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("omega = {omega} is not below the threshold")));
    }
    ClassSolver::new(*basis, ell, ctx)?.mu1(delta)
}

pub fn find_eigenvalue_direct(basis: &Basis, ell: f64, ctx: &ThresholdContext) -> Result<EigenResult> {
    ClassSolver::new(*basis, ell, ctx)?.direct()
}

pub fn find_eigenvalue_birman_schwinger(basis: &Basis, ell: f64, ctx: &ThresholdContext) -> Result<EigenResult> {
    ClassSolver::new(*basis, ell, ctx)?.birman_schwinger()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit<T> {
    pub exponent: T,
    pub prefactor: T,
    pub r_squared: T,
    /// ℓ values, strictly decreasing.
    pub ell_grid: Vec<T>,
    pub gaps: Vec<T>,
}

/// Least-squares line through (ln ℓ, ln gap).
pub fn fit_power_law<T: Real>(pairs: &[(T, T)]) -> Result<PowerLawFit<T>> {
    if pairs.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 4", pairs.len())));
    }
    let mut sorted = pairs.to_vec();
    if sorted.iter().any(|&(l, g)| !(l > T::zero()) || !(g > T::zero()) || !l.is_finite() || !g.is_finite()) {
        return Err(Error::DegenerateFit("ell and gap must be positive and finite".into()));
    }
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::DegenerateFit("repeated ell".into()));
    }
    let (first, last) = (sorted[0].0, sorted[sorted.len() - 1].0);
    if first < T::lit(2.0) * last {
        return Err(Error::DegenerateFit("ell values span less than a factor 2".into()));
    }
    let n = T::from_usize_(sorted.len());
    let xs: Vec<T> = sorted.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<T> = sorted.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .fold(T::zero(), |a, b| a + b);
    let r_squared = if syy > T::zero() { T::one() - ss_res / syy } else { T::one() };
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        ell_grid: sorted.iter().map(|p| p.0).collect(),
        gaps: sorted.iter().map(|p| p.1).collect(),
    })
}

/// Prefactor of gap ≈ C·ℓ^p with p held fixed: the geometric mean of gap/ℓ^p.
///
/// With a known exponent this is far less sensitive to pre-asymptotic curvature than the
/// intercept of a free fit, which extrapolates the slope error all the way to ℓ = 1.
pub fn fixed_exponent_prefactor<T: Real>(pairs: &[(T, T)], exponent: T) -> Result<T> {
    if pairs.is_empty() || pairs.iter().any(|&(l, g)| !(l > T::zero()) || !(g > T::zero())) {
        return Err(Error::DegenerateFit("ell and gap must be positive".into()));
    }
    let n = T::from_usize_(pairs.len());
    let mean = pairs.iter().fold(T::zero(), |a, &(l, g)| a + g.ln() - exponent * l.ln()) / n;
    Ok(mean.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_data() {
        let pairs: Vec<(f64, f64)> = [0.1, 0.07, 0.05, 0.035].iter().map(|&l: &f64| (l, 3.0 * l.powi(4))).collect();
        let fit = fit_power_law(&pairs).unwrap();
        assert!((fit.exponent - 4.0).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-10);
        assert_eq!(fit.ell_grid, vec![0.1, 0.07, 0.05, 0.035]);
    }

    #[test]
    fn narrow_span_is_degenerate() {
        let pairs: Vec<(f64, f64)> = [0.1, 0.09, 0.08, 0.07].iter().map(|&l| (l, l * l)).collect();
        assert!(matches!(fit_power_law(&pairs), Err(Error::DegenerateFit(_))));
        assert!(matches!(fit_power_law(&pairs[..3]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn generalized_eigenvalues_of_scaled_identity() {
        let m = DMatrix::<f64>::identity(3, 3) * 2.0;
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![6.0, 2.0, 4.0]));
        let ev = generalized_eigenvalues(&q, &m).unwrap();
        assert_eq!(ev.len(), 3);
        for (a, b) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
