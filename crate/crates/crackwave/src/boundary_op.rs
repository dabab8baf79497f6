//! Galerkin blocks of the rescaled truncated Dirichlet-to-Neumann operator.
//!
//! 2D: φ_n(x) = U_n(x)√(1−x²) on (−1,1), even n for the symmetric class and odd n for
//! the antisymmetric one. Their Fourier transforms are π(−i)ⁿ(n+1)J_{n+1}(ξ)/ξ (up to
//! the unitary 1/√(2π)).
//!
//! 3D, channel m: f_k(r)e^{imφ} on the unit disk with
//! f_k(r) = r^{|m|}(1−r²)^{1/2}P_k^{(|m|,1/2)}(1−2r²), whose order-|m| Hankel transform
//! is Γ(k+3/2)√2/k!·J_{|m|+2k+3/2}(ρ)/ρ^{3/2}.
//!
//! In both cases every form reduces to integrals ∫₀^∞ s(ξ)J_a(ξ)J_b(ξ)/ξ² dξ, split as
//! |ξ|/ℓ (the Q₀ part, computed once) plus the residual symbol r(ξ/ℓ).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::context::{residual_symbol, SymbolKind, ThresholdContext};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::special::{bessel_j_seq, gamma_half_ratio, hankel_coefficients, jacobi_seq};

pub use crate::special::bessel_j;

type C64 = Complex<f64>;

/// Largest supported |m|.
pub const MAX_CHANNEL: i32 = 20;
pub const DEFAULT_N: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryClass {
    Symmetric,
    Antisymmetric,
    Channel(i32),
}

impl SymmetryClass {
    pub fn dimension(&self) -> u8 {
        match self {
            SymmetryClass::Channel(_) => 3,
            _ => 2,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryClass::Symmetric => write!(f, "s"),
            SymmetryClass::Antisymmetric => write!(f, "as"),
            SymmetryClass::Channel(m) => write!(f, "m={m}"),
        }
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "s" => Ok(SymmetryClass::Symmetric),
            "as" => Ok(SymmetryClass::Antisymmetric),
            t => {
                let m = t
                    .strip_prefix("m=")
                    .and_then(|v| v.parse::<i32>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown class '{s}'")))?;
                if m.abs() > MAX_CHANNEL {
                    return Err(Error::InvalidInput(format!("|m| = {} exceeds {MAX_CHANNEL}", m.abs())));
                }
                Ok(SymmetryClass::Channel(m))
            }
        }
    }
}

/// One symmetry class truncated to `n` basis functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    pub class: SymmetryClass,
    pub n: usize,
}

impl Basis {
    pub fn new(class: SymmetryClass, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("basis size must be positive".into()));
        }
        if let SymmetryClass::Channel(m) = class {
            if m.abs() > MAX_CHANNEL {
                return Err(Error::InvalidInput(format!("|m| = {} exceeds {MAX_CHANNEL}", m.abs())));
            }
        }
        Ok(Self { class, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn abs_m(&self) -> usize {
        match self.class {
            SymmetryClass::Channel(m) => m.unsigned_abs() as usize,
            _ => 0,
        }
    }

    /// Chebyshev degree of the k-th 2D basis function.
    pub fn degree(&self, k: usize) -> usize {
        match self.class {
            SymmetryClass::Symmetric => 2 * k,
            SymmetryClass::Antisymmetric => 2 * k + 1,
            SymmetryClass::Channel(_) => k,
        }
    }

    /// Bessel order of the k-th transform.
    pub fn bessel_order(&self, k: usize) -> f64 {
        match self.class {
            SymmetryClass::Channel(_) => self.abs_m() as f64 + 2.0 * k as f64 + 1.5,
            _ => self.degree(k) as f64 + 1.0,
        }
    }

    /// Index into the Bessel sequence produced by [`bessel_j_seq`].
    fn seq_index(&self, k: usize) -> usize {
        match self.class {
            SymmetryClass::Channel(_) => self.abs_m() + 2 * k + 1,
            _ => self.degree(k) + 1,
        }
    }

    fn half_orders(&self) -> bool {
        matches!(self.class, SymmetryClass::Channel(_))
    }

    fn transform_scales(&self) -> Vec<f64> {
        match self.class {
            SymmetryClass::Channel(_) => {
                gamma_half_ratio(self.n).iter().map(|g| g * std::f64::consts::SQRT_2).collect()
            }
            _ => (0..self.n).map(|k| (self.degree(k) + 1) as f64).collect(),
        }
    }

    /// Real factor multiplying ∫₀^∞ s(ξ)J_aJ_b/ξ² dξ in entry (i, j).
    pub fn prefactors(&self) -> DMatrix<f64> {
        let c = self.transform_scales();
        let pi = std::f64::consts::PI;
        DMatrix::from_fn(self.n, self.n, |i, j| match self.class {
            SymmetryClass::Channel(_) => 2.0 * pi * c[i] * c[j],
            _ => {
                let d = (self.degree(i) as i64 - self.degree(j) as i64) / 2;
                let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                pi * c[i] * c[j] * sign
            }
        })
    }

    /// Lebesgue measure of Γ (the interval or the disk).
    pub fn measure(&self) -> f64 {
        match self.class {
            SymmetryClass::Channel(_) => std::f64::consts::PI,
            _ => 2.0,
        }
    }

    /// Values of all basis functions at x (2D: x ∈ (−1,1); 3D: radial r ∈ [0,1]).
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        if x.abs() >= 1.0 {
            return vec![0.0; self.n];
        }
        match self.class {
            SymmetryClass::Channel(_) => {
                let m = self.abs_m();
                let mut p = Vec::new();
                jacobi_seq(self.n - 1, m as f64, 0.5, 1.0 - 2.0 * x * x, &mut p);
                let w = x.powi(m as i32) * (1.0 - x * x).sqrt();
                p.iter().map(|v| v * w).collect()
            }
            _ => {
                let top = self.degree(self.n - 1);
                let mut u = vec![0.0; top + 1];
                u[0] = 1.0;
                if top >= 1 {
                    u[1] = 2.0 * x;
                }
                for k in 2..=top {
                    u[k] = 2.0 * x * u[k - 1] - u[k - 2];
                }
                let w = (1.0 - x * x).sqrt();
                (0..self.n).map(|k| u[self.degree(k)] * w).collect()
            }
        }
    }

    /// Σ c_k φ_k(x).
    pub fn synthesize(&self, coef: &DVector<f64>, x: f64) -> f64 {
        self.eval_all(x).iter().zip(coef.iter()).map(|(a, b)| a * b).sum()
    }

    /// L₂(Γ) Gram matrix.
    pub fn mass_matrix(&self) -> DMatrix<f64> {
        match self.class {
            SymmetryClass::Channel(_) => {
                let m = self.abs_m();
                let gl = GaussLegendre::<f64>::new(self.n + m / 2 + 8);
                let mut out = DMatrix::zeros(self.n, self.n);
                let mut p = Vec::new();
                for (t, w) in gl.on(0.0, 1.0) {
                    jacobi_seq(self.n - 1, m as f64, 0.5, 1.0 - 2.0 * t, &mut p);
                    let wt = std::f64::consts::PI * w * t.powi(m as i32) * (1.0 - t);
                    for i in 0..self.n {
                        for j in 0..=i {
                            out[(i, j)] += wt * p[i] * p[j];
                        }
                    }
                }
                out.fill_upper_triangle_with_lower_triangle();
                out
            }
            _ => {
                let top = self.degree(self.n - 1);
                let gl = GaussLegendre::<f64>::new(2 * top + 32);
                let mut out = DMatrix::zeros(self.n, self.n);
                for (th, w) in gl.on(0.0, std::f64::consts::PI) {
                    let s: Vec<f64> =
                        (0..self.n).map(|k| ((self.degree(k) + 1) as f64 * th).sin()).collect();
                    let wt = w * th.sin();
                    for i in 0..self.n {
                        for j in 0..=i {
                            out[(i, j)] += wt * s[i] * s[j];
                        }
                    }
                }
                out.fill_upper_triangle_with_lower_triangle();
                out
            }
        }
    }

    /// ⟨f, φ_k⟩_{L₂(Γ)}. In 3D `f` is the radial profile of f(r)e^{imφ}.
    pub fn load_vector(&self, f: &dyn Fn(f64) -> f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        match self.class {
            SymmetryClass::Channel(_) => {
                let m = self.abs_m();
                let gl = GaussLegendre::<f64>::new(2 * self.n + m + 64);
                let mut p = Vec::new();
                for (th, w) in gl.on(0.0, std::f64::consts::FRAC_PI_2) {
                    let (s, c) = th.sin_cos();
                    jacobi_seq(self.n - 1, m as f64, 0.5, (2.0 * th).cos(), &mut p);
                    let wt = 2.0 * std::f64::consts::PI * w * f(s) * s.powi(m as i32 + 1) * c * c;
                    for k in 0..self.n {
                        out[k] += wt * p[k];
                    }
                }
            }
            _ => {
                let top = self.degree(self.n - 1);
                let gl = GaussLegendre::<f64>::new(2 * top + 64);
                for (th, w) in gl.on(0.0, std::f64::consts::PI) {
                    let wt = w * f(th.cos()) * th.sin();
                    for k in 0..self.n {
                        out[k] += wt * ((self.degree(k) + 1) as f64 * th).sin();
                    }
                }
            }
        }
        out
    }

    fn seq_len(&self) -> usize {
        self.seq_index(self.n - 1)
    }

    /// Fills `row[k] = J_{a_k}(x)`.
    fn bessel_row(&self, x: f64, scratch: &mut Vec<f64>, row: &mut [f64]) {
        bessel_j_seq(self.half_orders(), self.seq_len(), x, scratch);
        for (k, r) in row.iter_mut().enumerate() {
            *r = scratch[self.seq_index(k)];
        }
    }

    fn max_order(&self) -> f64 {
        self.bessel_order(self.n - 1)
    }
}

/// Accumulates Σ_nodes w·J_a(x)J_b(x) into `acc` in chunks (B·diag(w)·Bᵀ).
fn accumulate_gram(basis: &Basis, nodes: &[(f64, f64)], acc: &mut DMatrix<f64>) {
    const CHUNK: usize = 2048;
    let n = basis.n;
    let mut scratch = Vec::new();
    let mut row = vec![0.0; n];
    for chunk in nodes.chunks(CHUNK) {
        let mut b = DMatrix::<f64>::zeros(n, chunk.len());
        let mut bw = DMatrix::<f64>::zeros(n, chunk.len());
        for (c, &(x, w)) in chunk.iter().enumerate() {
            basis.bessel_row(x, &mut scratch, &mut row);
            for k in 0..n {
                b[(k, c)] = row[k];
                bw[(k, c)] = row[k] * w;
            }
        }
        acc.gemm(1.0, &b, &bw.transpose(), 1.0);
    }
}

/// Panels of width at most `near` up to `switch`, then at most `far`, on [a, b].
fn panel_nodes(gl: &GaussLegendre<f64>, a: f64, b: f64, near: f64, switch: f64, far: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut x = a;
    while x < b {
        let width = if x < switch { near } else { far };
        let y = (x + width).min(b);
        out.extend(gl.on(x, y));
        x = y;
    }
    out
}

/// C^∞ cut-off: 1 on [0, 1/2], 0 on [1, ∞).
fn taper(u: f64) -> f64 {
    if u <= 0.5 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * u - 1.0;
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    1.0 - a / (a + b)
}

/// K_p = ∫_{1/2}^∞ (1 − taper(u)) u^{−p} du.
fn taper_moment(p: i32) -> f64 {
    let gl = GaussLegendre::<f64>::new(16);
    let mut s = 0.0;
    let panels = 32;
    for i in 0..panels {
        let a = 0.5 + 0.5 * i as f64 / panels as f64;
        let b = a + 0.5 / panels as f64;
        s += gl.integrate(a, b, |u| (1.0 - taper(u)) * u.powi(-p));
    }
    s + 1.0 / (p - 1) as f64
}

/// Coefficients d_j of x^{−2j} in P_aP_b + Q_aQ_b (Hankel's expansion).
fn pq_product_coefficients(a: f64, b: f64, terms: usize) -> Vec<f64> {
    let ca = hankel_coefficients(a, 2 * terms + 2);
    let cb = hankel_coefficients(b, 2 * terms + 2);
    // P = Σ (−1)^k c_{2k} x^{−2k}, Q = Σ (−1)^k c_{2k+1} x^{−2k−1}
    let mut d = vec![0.0; terms];
    for (j, dj) in d.iter_mut().enumerate() {
        let mut s = 0.0;
        for k in 0..=j {
            let l = j - k;
            let sp = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
            s += sp * ca[2 * k] * cb[2 * l];
            if j >= 1 && k < j {
                // Q terms: x^{−(2k+1)−(2l'+1)} with k + l' = j − 1
                let lq = j - 1 - k;
                let sq = if (k + lq) % 2 == 0 { 1.0 } else { -1.0 };
                s += sq * ca[2 * k + 1] * cb[2 * lq + 1];
            }
        }
        *dj = s;
    }
    d
}

/// Z_ab = ∫₀^∞ J_a(x)J_b(x)/x dx by tapered quadrature plus an asymptotic tail.
fn z_matrix(basis: &Basis) -> DMatrix<f64> {
    let amax = basis.max_order();
    let x_end = (2.0 * amax * amax).max(1000.0);
    let gl = GaussLegendre::<f64>::new(16);
    let nodes: Vec<(f64, f64)> = panel_nodes(&gl, 0.0, x_end, 1.5, 2.0 * amax + 10.0, 4.0)
        .into_iter()
        .map(|(x, w)| (x, w * taper(x / x_end) / x))
        .collect();
    let n = basis.n;
    let mut z = DMatrix::zeros(n, n);
    accumulate_gram(basis, &nodes, &mut z);
    const TERMS: usize = 7;
    let k: Vec<f64> = (0..TERMS).map(|j| taper_moment(2 * j as i32 + 2)).collect();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (basis.bessel_order(i), basis.bessel_order(j));
            let cos_delta = ((a - b) * std::f64::consts::FRAC_PI_2).cos();
            let d = pq_product_coefficients(a, b, TERMS);
            let tail: f64 = d
                .iter()
                .zip(&k)
                .enumerate()
                .map(|(p, (dj, kj))| dj * kj * x_end.powi(-(2 * p as i32 + 1)))
                .sum();
            z[(i, j)] += cos_delta / std::f64::consts::PI * tail;
        }
    }
    (z.clone() + z.transpose()) * 0.5
}

type Q0Cache = Mutex<HashMap<Basis, Arc<DMatrix<f64>>>>;

fn q0_cache() -> &'static Q0Cache {
    static CACHE: OnceLock<Q0Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn z_cached(basis: &Basis) -> Arc<DMatrix<f64>> {
    if let Some(z) = q0_cache().lock().expect("cache poisoned").get(basis) {
        return z.clone();
    }
    let z = Arc::new(z_matrix(basis));
    q0_cache().lock().expect("cache poisoned").insert(*basis, z.clone());
    z
}

/// Galerkin matrix of q₀[g,h] = ∫|ξ|ĝ conj(ĥ) dξ.
pub fn assemble_q0(basis: &Basis) -> Result<DMatrix<f64>> {
    let z = z_cached(basis);
    let q0 = basis.prefactors().component_mul(&z);
    if q0.iter().any(|v| !v.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite Q0 entry".into()));
    }
    Ok(q0)
}

/// Coordinates ⟨Φ_ℓ, φ_k⟩ of the oscillatory profile of the class: cos(κℓx), sin(κℓx),
/// or J_m(κℓr) (times (−1)^m for negative m).
pub fn rank_one_vector(basis: &Basis, ell: f64, kappa: f64) -> DVector<f64> {
    let k = kappa * ell;
    match basis.class {
        SymmetryClass::Symmetric => basis.load_vector(&|x| (k * x).cos()),
        SymmetryClass::Antisymmetric => basis.load_vector(&|x| (k * x).sin()),
        SymmetryClass::Channel(m) => basis.load_vector(&|r| bessel_j(m, k * r)),
    }
}

/// Leading Taylor profile of Φ_ℓ: 1, x, or r^{|m|} (sign (−1)^m for m < 0).
pub fn leading_profile(class: SymmetryClass) -> Box<dyn Fn(f64) -> f64> {
    match class {
        SymmetryClass::Symmetric => Box::new(|_| 1.0),
        SymmetryClass::Antisymmetric => Box::new(|x| x),
        SymmetryClass::Channel(m) => {
            let s = if m < 0 && m % 2 != 0 { -1.0 } else { 1.0 };
            let p = m.abs();
            Box::new(move |r: f64| s * r.powi(p))
        }
    }
}

/// Scale by which Φ_ℓ approaches the leading profile: 1, κℓ, (κℓ/2)^{|m|}/|m|!.
pub fn leading_scale(class: SymmetryClass, ell: f64, kappa: f64) -> f64 {
    match class {
        SymmetryClass::Symmetric => 1.0,
        SymmetryClass::Antisymmetric => kappa * ell,
        SymmetryClass::Channel(m) => (kappa * ell / 2.0).powi(m.abs()) / factorial(m.unsigned_abs()),
    }
}

/// n! in floating point.
pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Singular coupling c(ℓ): the pole part of ℓ·Q(ℓ, Λ−δ) is −(c/√δ)·vvᵀ.
pub fn singular_coupling(class: SymmetryClass, ell: f64, ctx: &ThresholdContext) -> f64 {
    let d2 = ctx.dpsi_abs().powi(2);
    let root = (2.0 * ctx.zeta_pp()).sqrt();
    match class {
        SymmetryClass::Channel(_) => 4.0 * ctx.kappa() * ell.powi(3) * d2 / root,
        _ => 8.0 * ell * ell * d2 / root,
    }
}

/// Assembled class block of q(ℓ,ω).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalerkinBlock {
    pub class: SymmetryClass,
    pub n: usize,
    pub ell: f64,
    pub omega: f64,
    pub symbol: SymbolKind,
    pub q: DMatrix<f64>,
    pub q0: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub rank_one: DVector<f64>,
    /// Quadrature cut-off in ξ.
    pub cutoff: f64,
    /// |r(Ξ/ℓ)| at the cut-off.
    pub residual_at_cutoff: f64,
}

/// Quadrature data for one (basis, ℓ): nodes away from the pole window with their
/// Bessel values cached, reused across gaps.
pub struct QAssembler<'a> {
    pub basis: Basis,
    pub ell: f64,
    ctx: &'a ThresholdContext,
    q0: DMatrix<f64>,
    z: Arc<DMatrix<f64>>,
    pref: DMatrix<f64>,
    mass: DMatrix<f64>,
    /// η-nodes and weights (already divided by ℓη²) outside the window.
    far_eta: Vec<f64>,
    far_w: Vec<f64>,
    far_bessel: DMatrix<f64>,
    cutoff: f64,
    gl: GaussLegendre<f64>,
}

impl<'a> QAssembler<'a> {
    pub fn new(basis: Basis, ell: f64, ctx: &'a ThresholdContext) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::InvalidInput(format!("ell must be positive, got {ell}")));
        }
        let z = z_cached(&basis);
        let pref = basis.prefactors();
        let q0 = pref.component_mul(&z);
        let gl = GaussLegendre::<f64>::new(16);
        let kappa = ctx.kappa();
        let w = ThresholdContext::WINDOW;
        let amax = basis.max_order();
        let cutoff = (2.0 * amax * amax).max(1000.0);
        let mut eta_nodes: Vec<(f64, f64)> = Vec::new();
        // below the window
        let fine = 0.1f64.min(1.5 / ell);
        eta_nodes.extend(panel_nodes(&gl, 0.0, kappa - w, fine, f64::INFINITY, fine));
        // above the window: fine panels to η = 10, then geometric, then ξ-limited
        let eta_end = cutoff / ell;
        let mut x = kappa + w;
        while x < eta_end {
            let width = if x < 10.0 {
                0.1f64.min(10.0 - x)
            } else {
                let xi_width = if x * ell < 2.0 * amax + 10.0 { 1.5 } else { 4.0 };
                (0.25 * x).min(xi_width / ell)
            };
            let y = (x + width).min(eta_end);
            eta_nodes.extend(gl.on(x, y));
            x = y;
        }
        let n = basis.n;
        let mut far_bessel = DMatrix::zeros(n, eta_nodes.len());
        let mut scratch = Vec::new();
        let mut row = vec![0.0; n];
        for (c, &(eta, _)) in eta_nodes.iter().enumerate() {
            basis.bessel_row(ell * eta, &mut scratch, &mut row);
            for k in 0..n {
                far_bessel[(k, c)] = row[k];
            }
        }
        Ok(Self {
            basis,
            ell,
            ctx,
            q0,
            z,
            pref,
            mass: basis.mass_matrix(),
            far_eta: eta_nodes.iter().map(|p| p.0).collect(),
            far_w: eta_nodes.iter().map(|&(e, w)| w / (ell * e * e)).collect(),
            far_bessel,
            cutoff,
            gl,
        })
    }

    pub fn q0(&self) -> &DMatrix<f64> {
        &self.q0
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    /// η-nodes inside the pole window [κ−w, κ+w], graded geometrically around κ on the
    /// scale of the peak width.
    fn window_nodes(&self, symbol: SymbolKind) -> Vec<(f64, f64)> {
        let kappa = self.ctx.kappa();
        let w = ThresholdContext::WINDOW;
        let s = match symbol {
            SymbolKind::Gap(d) => self.ctx.peak_width(d),
            SymbolKind::Static => w,
        };
        let mut breaks = vec![0.0];
        if s < w / 4.0 {
            let mut t = s;
            while t < w {
                breaks.push(t);
                t *= 2.0;
            }
        } else {
            let k = 4;
            breaks.extend((1..k).map(|i| w * i as f64 / k as f64));
        }
        breaks.push(w);
        let mut out = Vec::new();
        for pair in breaks.windows(2) {
            out.extend(self.gl.on(kappa + pair[0], kappa + pair[1]));
            out.extend(self.gl.on(kappa - pair[1], kappa - pair[0]));
        }
        out
    }

    /// ∫₀^∞ r(ξ/ℓ)J_aJ_b/ξ² dξ.
    fn residual_integrals(&self, symbol: SymbolKind) -> Result<(DMatrix<f64>, f64)> {
        let n = self.basis.n;
        let mut r = DMatrix::zeros(n, n);
        // far nodes: cached Bessel values
        let mut bw = self.far_bessel.clone();
        for (c, (&eta, &w)) in self.far_eta.iter().zip(&self.far_w).enumerate() {
            let v = residual_symbol(self.ctx, symbol, eta)? * w;
            bw.column_mut(c).scale_mut(v);
        }
        r.gemm(1.0, &self.far_bessel, &bw.transpose(), 0.0);
        // window nodes
        let win: Vec<(f64, f64)> = self
            .window_nodes(symbol)
            .into_iter()
            .map(|(eta, w)| {
                residual_symbol(self.ctx, symbol, eta).map(|v| (self.ell * eta, v * w / (self.ell * eta * eta)))
            })
            .collect::<Result<_>>()?;
        accumulate_gram(&self.basis, &win, &mut r);
        // tail beyond the cut-off: r(ξ/ℓ) ≈ c_r/ξ and J_aJ_b ≈ cos Δ/(πξ)
        let xc = self.cutoff;
        let r_end = residual_symbol(self.ctx, symbol, xc / self.ell)?;
        let c_r = r_end * xc;
        for i in 0..n {
            for j in 0..n {
                let delta = (self.basis.bessel_order(i) - self.basis.bessel_order(j))
                    * std::f64::consts::FRAC_PI_2;
                r[(i, j)] += c_r * delta.cos() / (3.0 * std::f64::consts::PI * xc.powi(3));
            }
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::QuadratureFailure("non-finite residual integral".into()));
        }
        Ok(((r.clone() + r.transpose()) * 0.5, r_end.abs()))
    }

    /// Q(ℓ,ω) = pref ∘ (Z/ℓ + R).
    pub fn assemble(&self, symbol: SymbolKind) -> Result<GalerkinBlock> {
        let (r, r_end) = self.residual_integrals(symbol)?;
        let q = self.pref.component_mul(&(self.z.as_ref() / self.ell + r));
        Ok(GalerkinBlock {
            class: self.basis.class,
            n: self.basis.n,
            ell: self.ell,
            omega: symbol.omega(self.ctx),
            symbol,
            q,
            q0: self.q0.clone(),
            mass: self.mass.clone(),
            rank_one: rank_one_vector(&self.basis, self.ell, self.ctx.kappa()),
            cutoff: self.cutoff,
            residual_at_cutoff: r_end,
        })
    }

    /// Q matrix only.
    pub fn q(&self, symbol: SymbolKind) -> Result<DMatrix<f64>> {
        let (r, _) = self.residual_integrals(symbol)?;
        Ok(self.pref.component_mul(&(self.z.as_ref() / self.ell + r)))
    }
}

/// Q(ℓ,ω) for real ω < Λ, ω ≠ 0 (|ω| ≥ 10⁻³).
pub fn assemble_q(basis: &Basis, ell: f64, omega: f64, ctx: &ThresholdContext) -> Result<GalerkinBlock> {
    if !omega.is_finite() {
        return Err(Error::NonFinite("omega"));
    }
    let delta = ctx.lambda() - omega;
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("omega = {omega} is not below the threshold")));
    }
    QAssembler::new(*basis, ell, ctx)?.assemble(SymbolKind::Gap(delta))
}

/// Q(ℓ,0) with the static symbol m₀.
pub fn assemble_q_static(basis: &Basis, ell: f64, ctx: &ThresholdContext) -> Result<GalerkinBlock> {
    QAssembler::new(*basis, ell, ctx)?.assemble(SymbolKind::Static)
}

/// Off-diagonal block between two classes of the same dimension, computed from the
/// complex transforms over the full line (2D) or with the angular integral done
/// numerically (3D). Returns the largest entry modulus.
pub fn cross_block_max(a: &Basis, b: &Basis, ell: f64, symbol: SymbolKind, ctx: &ThresholdContext) -> Result<f64> {
    if a.class.dimension() != b.class.dimension() {
        return Err(Error::InvalidInput("classes of different dimension".into()));
    }
    let gl = GaussLegendre::<f64>::new(16);
    let nodes = panel_nodes(&gl, 0.0, 200.0, 0.5, f64::INFINITY, 0.5);
    let i = C64::new(0.0, 1.0);
    let mut acc = DMatrix::<C64>::zeros(a.n, b.n);
    let angular = |dm: i32| -> C64 {
        let k = 64;
        (0..k)
            .map(|j| C64::from_polar(1.0, dm as f64 * 2.0 * std::f64::consts::PI * j as f64 / k as f64))
            .sum::<C64>()
            * (2.0 * std::f64::consts::PI / k as f64)
    };
    for &(xi, w) in &nodes {
        let s = xi / ell + residual_symbol(ctx, symbol, xi / ell)?;
        match (a.class, b.class) {
            (SymmetryClass::Channel(ma), SymmetryClass::Channel(mb)) => {
                let ang = angular(ma - mb) * (-i).powi(ma) * i.powi(mb);
                for p in 0..a.n {
                    let ha = a.transform_scales()[p] * bessel_nu(a.bessel_order(p), xi) / xi.powf(1.5);
                    for q in 0..b.n {
                        let hb = b.transform_scales()[q] * bessel_nu(b.bessel_order(q), xi) / xi.powf(1.5);
                        acc[(p, q)] += ang * (w * s * ha * hb * xi);
                    }
                }
            }
            _ => {
                let fa_p = fourier_2d(a, xi);
                let fb_p = fourier_2d(b, xi);
                let fa_m = fourier_2d(a, -xi);
                let fb_m = fourier_2d(b, -xi);
                for p in 0..a.n {
                    for q in 0..b.n {
                        let v = fa_p[p] * fb_p[q].conj() + fa_m[p] * fb_m[q].conj();
                        acc[(p, q)] += v * (w * s / (2.0 * std::f64::consts::PI));
                    }
                }
            }
        }
    }
    Ok(acc.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// ∫φ_k(x)e^{−ixξ}dx by direct quadrature in x = cos θ.
fn fourier_2d(basis: &Basis, xi: f64) -> Vec<C64> {
    let gl = GaussLegendre::<f64>::new(64);
    let panels = 8 + (xi.abs() / 4.0) as usize;
    let mut out = vec![C64::new(0.0, 0.0); basis.n];
    for j in 0..panels {
        let a = std::f64::consts::PI * j as f64 / panels as f64;
        let b = std::f64::consts::PI * (j + 1) as f64 / panels as f64;
        for (th, w) in gl.on(a, b) {
            let e = C64::from_polar(w * th.sin(), -xi * th.cos());
            for (k, o) in out.iter_mut().enumerate() {
                *o += e * ((basis.degree(k) + 1) as f64 * th).sin();
            }
        }
    }
    out
}

/// J_ν for integer or half-integer ν ≥ 0.
fn bessel_nu(nu: f64, x: f64) -> f64 {
    let half = nu.fract() != 0.0;
    let idx = if half { (nu - 0.5).round() as usize } else { nu.round() as usize };
    let mut out = Vec::new();
    bessel_j_seq(half, idx, x, &mut out);
    out[idx]
}
