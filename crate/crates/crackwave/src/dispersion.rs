//! Rayleigh–Lamb dispersion relation of the symmetric channel: branches
//! ζ_k(ξ), the threshold (Λ, κ), and the complex roots near threshold.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::roots::{brent_min, brent_root};
use crate::scalar::Real;
use crate::special::{branch_sqrt, cos_root, cos_root_real, sin_ratio, sin_ratio_real};

type C64 = Complex<f64>;

/// Strip geometry and Lamé coefficients. Fixed: half-width π/2, λ = 0, μ = 1.
/// Square roots use the principal branch with `Im √z ≥ 0` on (−∞, 0].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionContext<T> {
    half_width: T,
    lame_lambda: T,
    lame_mu: T,
}

impl<T: Real> Default for DispersionContext<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> DispersionContext<T> {
    pub fn new() -> Self {
        Self { half_width: T::FRAC_PI_2(), lame_lambda: T::zero(), lame_mu: T::one() }
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn lame_lambda(&self) -> T {
        self.lame_lambda
    }

    pub fn lame_mu(&self) -> T {
        self.lame_mu
    }

    /// β² = ω − ξ².
    pub fn beta_sq(&self, xi: Complex<T>, omega: Complex<T>) -> Complex<T> {
        omega - xi * xi
    }

    /// γ² = ω/2 − ξ².
    pub fn gamma_sq(&self, xi: Complex<T>, omega: Complex<T>) -> Complex<T> {
        omega * T::lit(0.5) - xi * xi
    }

    pub fn beta(&self, xi: Complex<T>, omega: Complex<T>) -> Complex<T> {
        branch_sqrt(self.beta_sq(xi, omega))
    }

    pub fn gamma(&self, xi: Complex<T>, omega: Complex<T>) -> Complex<T> {
        branch_sqrt(self.gamma_sq(xi, omega))
    }

    /// Ψ(ξ,ω) = S(β²)C(γ²)γ² + C(β²)S(γ²)ξ².
    pub fn rayleigh_lamb(&self, xi: Complex<T>, omega: Complex<T>) -> Result<Complex<T>> {
        if !(xi.re.is_finite() && xi.im.is_finite()) {
            return Err(Error::NonFinite("xi"));
        }
        if !(omega.re.is_finite() && omega.im.is_finite()) {
            return Err(Error::NonFinite("omega"));
        }
        Ok(self.psi_unchecked(xi, omega))
    }

    pub(crate) fn psi_unchecked(&self, xi: Complex<T>, omega: Complex<T>) -> Complex<T> {
        let b2 = self.beta_sq(xi, omega);
        let g2 = self.gamma_sq(xi, omega);
        sin_ratio(b2) * cos_root(g2) * g2 + cos_root(b2) * sin_ratio(g2) * xi * xi
    }

    /// Ψ for real arguments (real-valued).
    pub fn rayleigh_lamb_real(&self, xi: T, omega: T) -> T {
        let b2 = omega - xi * xi;
        let g2 = omega * T::lit(0.5) - xi * xi;
        sin_ratio_real(b2) * cos_root_real(g2) * g2 + cos_root_real(b2) * sin_ratio_real(g2) * xi * xi
    }

    /// Magnitude scale of Ψ for relative residuals; never vanishes on a root.
    pub fn rayleigh_lamb_scale_real(&self, xi: T, omega: T) -> T {
        let b2 = omega - xi * xi;
        let g2 = omega * T::lit(0.5) - xi * xi;
        (sin_ratio_real(b2).abs() + cos_root_real(b2).abs())
            * (sin_ratio_real(g2).abs() + cos_root_real(g2).abs())
            * (g2.abs() + xi * xi)
    }
}

/// Shorthand for the double precision context.
pub fn rayleigh_lamb(xi: C64, omega: C64) -> Result<C64> {
    DispersionContext::<f64>::new().rayleigh_lamb(xi, omega)
}

/// Taylor coefficients `c_k = ∂_ω^k Ψ(ξ, ω)/k!`, `k = 0..count`, from a Cauchy integral
/// on the circle of the given radius.
pub fn psi_omega_taylor(xi: C64, omega: C64, radius: f64, count: usize) -> Vec<C64> {
    let ctx = DispersionContext::<f64>::new();
    let n = 32usize.max(2 * count);
    let vals: Vec<(C64, C64)> = (0..n)
        .map(|j| {
            let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            (e, ctx.psi_unchecked(xi, omega + e * radius))
        })
        .collect();
    (0..count)
        .map(|k| {
            let s: C64 = vals.iter().map(|(e, v)| v * e.powi(-(k as i32))).sum();
            s / (n as f64 * radius.powi(k as i32))
        })
        .collect()
}

/// ∂_ξ Ψ by a 16-point Cauchy integral of radius 10⁻².
pub fn psi_xi_derivative(xi: C64, omega: C64) -> C64 {
    let ctx = DispersionContext::<f64>::new();
    let n = 16;
    let r = 1e-2;
    let s: C64 = (0..n)
        .map(|j| {
            let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            ctx.psi_unchecked(xi + e * r, omega) / e
        })
        .sum();
    s / (n as f64 * r)
}

/// One eigenvalue ζ_k(ξ) of the symmetric channel operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub xi: f64,
    pub k: usize,
    pub omega: f64,
    /// |Ψ(ξ,ω)| relative to the magnitude of its two terms.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchOptions {
    /// Initial ω-grid step of the sign-change scan.
    pub step: f64,
    /// Scan stops at 2ξ² + `upper_offset`.
    pub upper_offset: f64,
    /// Scan starts here (ω = 0 is always a spurious root of Ψ).
    pub omega_start: f64,
    /// Root residual tolerance.
    pub tol: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self { step: 0.01, upper_offset: 50.0, omega_start: 0.005, tol: 1e-12 }
    }
}

fn polish_root(xi: f64, lo: f64, hi: f64, flo: f64, fhi: f64) -> Result<f64> {
    let ctx = DispersionContext::<f64>::new();
    brent_root(|w| ctx.rayleigh_lamb_real(xi, w), lo, hi, flo, fhi, 0.0, 200)
}

/// Sign changes of `f` on `[a, b]` sampled with `n` steps; touching minima of |f| are
/// resolved by recursive refinement.
fn scan_brackets(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    n: usize,
    depth: usize,
    wanted: usize,
    out: &mut Vec<(f64, f64, f64, f64)>,
) {
    let h = (b - a) / n as f64;
    let mut prev2: Option<(f64, f64)> = None;
    let mut prev = (a, f(a));
    for i in 1..=n {
        if out.len() >= wanted {
            return;
        }
        let x = if i == n { b } else { a + h * i as f64 };
        let cur = (x, f(x));
        if prev.1 == 0.0 || prev.1.signum() != cur.1.signum() {
            out.push((prev.0, cur.0, prev.1, cur.1));
        } else if let Some(p2) = prev2 {
            // |f| has a local minimum at prev without a sign change: possible close pair
            let touching = prev.1.abs() < p2.1.abs() && prev.1.abs() < cur.1.abs();
            if touching && depth < 4 {
                let mut inner = Vec::new();
                scan_brackets(f, p2.0, cur.0, 32, depth + 1, usize::MAX, &mut inner);
                if inner.len() >= 2 {
                    // drop a bracket already recorded on [p2, prev]
                    out.retain(|br| br.1 <= p2.0);
                    out.extend(inner);
                }
            }
        }
        prev2 = Some(prev);
        prev = cur;
    }
}

/// The `count` smallest positive roots ω of Ψ(ξ, ·), ascending.
pub fn branch_eigenvalues(xi: f64, count: usize, opts: &BranchOptions) -> Result<Vec<BranchPoint>> {
    if !xi.is_finite() {
        return Err(Error::NonFinite("xi"));
    }
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let ctx = DispersionContext::<f64>::new();
    let upper = 2.0 * xi * xi + opts.upper_offset;
    let f = |w: f64| ctx.rayleigh_lamb_real(xi, w);
    let n = ((upper - opts.omega_start) / opts.step).ceil().max(1.0) as usize;
    let mut brackets = Vec::new();
    scan_brackets(&f, opts.omega_start, upper, n, 0, count, &mut brackets);
    if brackets.len() < count {
        return Err(Error::BracketFailure { found: brackets.len(), wanted: count, upper });
    }
    let mut out = Vec::with_capacity(count);
    for (k, &(lo, hi, flo, fhi)) in brackets.iter().take(count).enumerate() {
        let omega = polish_root(xi, lo, hi, flo, fhi)?;
        let scale = ctx.rayleigh_lamb_scale_real(xi, omega).max(f64::MIN_POSITIVE);
        let residual = ctx.rayleigh_lamb_real(xi, omega).abs() / scale;
        if residual > opts.tol {
            return Err(Error::ConvergenceFailure(format!(
                "branch {} at xi = {xi}: residual {residual:e}",
                k + 1
            )));
        }
        out.push(BranchPoint { xi, k: k + 1, omega, residual });
    }
    Ok(out)
}

/// ζ₁(ξ) with default scan options.
pub fn zeta1(xi: f64) -> Result<f64> {
    Ok(branch_eigenvalues(xi, 1, &BranchOptions::default())?[0].omega)
}

/// ζ₁(ξ) by bracketing on a known ω-window.
fn zeta1_in(xi: f64, lo: f64, hi: f64) -> Result<f64> {
    let ctx = DispersionContext::<f64>::new();
    let (flo, fhi) = (ctx.rayleigh_lamb_real(xi, lo), ctx.rayleigh_lamb_real(xi, hi));
    if flo.signum() == fhi.signum() {
        return zeta1(xi);
    }
    polish_root(xi, lo, hi, flo, fhi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub window: (f64, f64),
    /// Relative location tolerance of the minimizer.
    pub location_tol: f64,
    /// Largest finite-difference step; two more halvings are taken for Richardson.
    pub fd_step: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self { window: (0.0, 2.0), location_tol: 1e-8, fd_step: 0.04 }
    }
}

/// Λ = min ζ₁, attained at ξ = ±κ, and the curvature ζ₁″(κ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdData {
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub kappa: f64,
    #[serde(rename = "zeta1_pp")]
    pub zeta1_second_deriv: f64,
    /// Same Richardson estimate started from half the step.
    pub zeta1_pp_half_step: f64,
    /// Relative |Ψ(κ, Λ)|.
    pub psi_residual: f64,
    /// Central-difference ζ₁′(κ).
    pub dzeta_residual: f64,
    pub window: (f64, f64),
    pub fd_steps: Vec<f64>,
}

fn richardson_second(f: &dyn Fn(f64) -> Result<f64>, x: f64, h: f64, f0: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - 2.0 * f0 + f(x - h)?) / (h * h)) };
    let (d1, d2, d3) = (d(h)?, d(h / 2.0)?, d(h / 4.0)?);
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

pub fn threshold(opts: &ThresholdOptions) -> Result<ThresholdData> {
    let (a, b) = opts.window;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("bad threshold window ({a}, {b})")));
    }
    let z = |x: f64| zeta1(x).unwrap_or(f64::INFINITY);
    let (kappa, lambda) = brent_min(z, a, b, opts.location_tol, 500)?;
    if !lambda.is_finite() || kappa - a < 1e-6 || b - kappa < 1e-6 {
        return Err(Error::ConvergenceFailure(format!("minimum at window edge: {kappa}")));
    }
    let zl = |x: f64| zeta1_in(x, lambda - 0.01, lambda + 0.5);
    let h = opts.fd_step;
    let zpp = richardson_second(&zl, kappa, h, lambda)?;
    let zpp_half = richardson_second(&zl, kappa, h / 2.0, lambda)?;
    let dz = (zl(kappa + 1e-3)? - zl(kappa - 1e-3)?) / 2e-3;
    let ctx = DispersionContext::<f64>::new();
    let psi_residual = ctx.rayleigh_lamb_real(kappa, lambda).abs()
        / ctx.rayleigh_lamb_scale_real(kappa, lambda);
    if !(zpp > 0.0) || ((zpp - zpp_half) / zpp).abs() > 1e-4 {
        return Err(Error::ConvergenceFailure(format!(
            "zeta1'' unstable: {zpp} vs {zpp_half}"
        )));
    }
    Ok(ThresholdData {
        lambda,
        kappa,
        zeta1_second_deriv: zpp,
        zeta1_pp_half_step: zpp_half,
        psi_residual,
        dzeta_residual: dz,
        window: opts.window,
        fd_steps: vec![h, h / 2.0, h / 4.0, h / 8.0],
    })
}

/// Chebyshev model of ζ₁ − Λ around κ, giving the excess ζ₁(η) − Λ with small
/// relative error even where it is far below machine epsilon times Λ.
#[derive(Debug, Clone)]
pub struct ThresholdModel {
    center: f64,
    half_width: f64,
    /// Chebyshev coefficients of p(η) = ζ₁(η) − Λ₀ and of p″.
    coef: Vec<f64>,
    coef_dd: Vec<f64>,
    coef_d: Vec<f64>,
    /// Refined minimizer of the model.
    pub kappa: f64,
    /// Reference threshold `Λ₀ + p(κ)`; all gaps are measured from this value.
    pub lambda: f64,
    /// ζ₁″(κ)/2 from the model.
    pub c2: f64,
    gl: GaussLegendre<f64>,
}

fn cheb_eval(c: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

fn cheb_derivative(c: &[f64], scale: f64) -> Vec<f64> {
    let n = c.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    for k in (1..n).rev() {
        let next = if k + 1 < n { d[k + 1] } else { 0.0 };
        d[k - 1] = next + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.iter_mut().for_each(|v| *v *= scale);
    d
}

impl ThresholdModel {
    pub const HALF_WIDTH: f64 = 0.15;
    const POINTS: usize = 25;

    pub fn build(thr: &ThresholdData) -> Result<Self> {
        let w = Self::HALF_WIDTH;
        let n = Self::POINTS;
        let m = n - 1;
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let t = (std::f64::consts::PI * j as f64 / m as f64).cos();
                zeta1_in(thr.kappa + w * t, thr.lambda - 0.01, thr.lambda + 0.1)
                    .map(|z| z - thr.lambda)
            })
            .collect::<Result<_>>()?;
        let mut coef = vec![0.0; n];
        for (k, ck) in coef.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, v) in vals.iter().enumerate() {
                let f = if j == 0 || j == m { 0.5 } else { 1.0 };
                s += f * v * (std::f64::consts::PI * (j * k) as f64 / m as f64).cos();
            }
            *ck = 2.0 * s / m as f64;
        }
        coef[0] *= 0.5;
        coef[m] *= 0.5;
        let coef_d = cheb_derivative(&coef, 1.0 / w);
        let coef_dd = cheb_derivative(&coef_d, 1.0 / w);
        let mut model = Self {
            center: thr.kappa,
            half_width: w,
            coef,
            coef_dd,
            coef_d,
            kappa: thr.kappa,
            lambda: thr.lambda,
            c2: 0.0,
            gl: GaussLegendre::new(16),
        };
        let mut k = thr.kappa;
        for _ in 0..50 {
            let step = model.deriv(k) / model.second(k);
            k -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        model.kappa = k;
        model.lambda = thr.lambda + model.p(k);
        model.c2 = 0.5 * model.second(k);
        if !(model.c2 > 0.0) || (k - thr.kappa).abs() > 1e-5 {
            return Err(Error::ConvergenceFailure("threshold model".into()));
        }
        Ok(model)
    }

    fn t(&self, eta: f64) -> f64 {
        (eta - self.center) / self.half_width
    }

    fn p(&self, eta: f64) -> f64 {
        cheb_eval(&self.coef, self.t(eta))
    }

    fn deriv(&self, eta: f64) -> f64 {
        cheb_eval(&self.coef_d, self.t(eta))
    }

    fn second(&self, eta: f64) -> f64 {
        cheb_eval(&self.coef_dd, self.t(eta))
    }

    /// Whether `eta` lies inside the modelled window.
    pub fn covers(&self, eta: f64) -> bool {
        (eta - self.center).abs() <= 0.95 * self.half_width
    }

    /// ζ₁(η) − Λ via the integral form of the Taylor remainder at κ.
    pub fn excess(&self, eta: f64) -> f64 {
        let d = eta - self.kappa;
        let s: f64 = self
            .gl
            .on(0.0, 1.0)
            .map(|(s, w)| w * (1.0 - s) * self.second(self.kappa + s * d))
            .sum();
        d * d * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourOptions {
    /// Half-width of each rectangle around ±κ.
    pub rect_half_width: f64,
    /// Largest admissible |ω − Λ|.
    pub epsilon: f64,
    pub newton_tol: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self { rect_half_width: 0.3, epsilon: 0.05, newton_tol: 1e-14 }
    }
}

/// The four roots of Ψ(·, ω) in the strip |Im ξ| ≤ Θ near ±κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexRootSet {
    pub omega: C64,
    /// Order: ξ₁₊ (near −κ, upper), ξ₂₊ (near κ, upper), ξ₁₋ (near −κ, lower), ξ₂₋ (near κ, lower).
    pub roots: [C64; 4],
    pub strip_height: f64,
    /// Argument-principle root count over the two rectangles.
    pub count: f64,
}

fn phase_increment(f: &dyn Fn(C64) -> C64, z0: C64, f0: C64, z1: C64, f1: C64, depth: u32) -> f64 {
    let d = (f1 / f0).arg();
    if d.abs() < std::f64::consts::PI / 8.0 || depth > 40 {
        return d;
    }
    let zm = (z0 + z1) * 0.5;
    let fm = f(zm);
    phase_increment(f, z0, f0, zm, fm, depth + 1) + phase_increment(f, zm, fm, z1, f1, depth + 1)
}

/// (1/2π)·Δ arg f around the rectangle `[x0,x1] × [y0,y1]`, counter-clockwise.
pub fn winding_number(f: &dyn Fn(C64) -> C64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let corners = [C64::new(x0, y0), C64::new(x1, y0), C64::new(x1, y1), C64::new(x0, y1)];
    let mut total = 0.0;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let n = 64;
        let mut z_prev = a;
        let mut f_prev = f(a);
        for i in 1..=n {
            let z = a + (b - a) * (i as f64 / n as f64);
            let fz = f(z);
            total += phase_increment(f, z_prev, f_prev, z, fz, 0);
            z_prev = z;
            f_prev = fz;
        }
    }
    total / (2.0 * std::f64::consts::PI)
}

fn newton_root(omega: C64, seed: C64, tol: f64) -> C64 {
    let ctx = DispersionContext::<f64>::new();
    let mut z = seed;
    for _ in 0..300 {
        let f = ctx.psi_unchecked(z, omega);
        if f == C64::new(0.0, 0.0) {
            break;
        }
        let df = psi_xi_derivative(z, omega);
        if df.norm() == 0.0 {
            break;
        }
        let dz = f / df;
        z -= dz;
        if dz.norm() <= tol * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

pub fn complex_roots_near_threshold(
    omega: C64,
    strip_height: f64,
    thr: &ThresholdData,
    opts: &ContourOptions,
) -> Result<ComplexRootSet> {
    if !(omega.re.is_finite() && omega.im.is_finite()) {
        return Err(Error::NonFinite("omega"));
    }
    if (omega - thr.lambda).norm() >= opts.epsilon {
        return Err(Error::InvalidInput(format!(
            "|omega - Lambda| = {} exceeds epsilon = {}",
            (omega - thr.lambda).norm(),
            opts.epsilon
        )));
    }
    let ctx = DispersionContext::<f64>::new();
    let f = |z: C64| ctx.psi_unchecked(z, omega);
    let d = opts.rect_half_width.min(0.9 * thr.kappa);
    let k = thr.kappa;
    let count = winding_number(&f, k - d, k + d, -strip_height, strip_height)
        + winding_number(&f, -k - d, -k + d, -strip_height, strip_height);
    if (count - count.round()).abs() > 0.1 || count.round() != 4.0 {
        return Err(Error::RootCountMismatch { count });
    }
    let hp = (thr.zeta1_second_deriv / 2.0).powf(-0.5);
    let s = branch_sqrt(C64::new(thr.lambda, 0.0) - omega) * hp;
    let i = C64::new(0.0, 1.0);
    let seeds = [-k + i * s, k + i * s, -k - i * s, k - i * s];
    let roots = seeds.map(|z0| newton_root(omega, z0, opts.newton_tol));
    Ok(ComplexRootSet { omega, roots, strip_height, count })
}
