//! Entire trigonometric kernels in the squared variable, Bessel functions,
//! Jacobi polynomials.

use num_complex::Complex;

use crate::scalar::Real;

/// Below this modulus the squared-variable kernels switch to their power series.
pub const SERIES_RADIUS: f64 = 1e-2;

/// Principal square root with `Im √z ≥ 0` on the cut (−∞, 0], including for a
/// negative zero imaginary part.
pub fn branch_sqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.im == T::zero() {
        if z.re >= T::zero() {
            Complex::new(z.re.sqrt(), T::zero())
        } else {
            Complex::new(T::zero(), (-z.re).sqrt())
        }
    } else {
        z.sqrt()
    }
}

/// `S(z) = sin(√z·π/2)/√z`, entire in `z`.
pub fn sin_ratio<T: Real>(z: Complex<T>) -> Complex<T> {
    let h = T::FRAC_PI_2();
    if z.norm() < T::lit(SERIES_RADIUS) {
        // sum_k (-1)^k h^(2k+1) z^k / (2k+1)!
        let h2 = h * h;
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in (0..9usize).rev() {
            let c = -h2 / T::from_usize_((2 * k + 2) * (2 * k + 3));
            acc = Complex::new(T::one(), T::zero()) + z * acc * c;
        }
        acc * h
    } else {
        let r = z.sqrt();
        (r * h).sin() / r
    }
}

/// `C(z) = cos(√z·π/2)`, entire in `z`.
pub fn cos_root<T: Real>(z: Complex<T>) -> Complex<T> {
    let h = T::FRAC_PI_2();
    if z.norm() < T::lit(SERIES_RADIUS) {
        let h2 = h * h;
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in (0..9usize).rev() {
            let c = -h2 / T::from_usize_((2 * k + 1) * (2 * k + 2));
            acc = Complex::new(T::one(), T::zero()) + z * acc * c;
        }
        acc
    } else {
        (z.sqrt() * h).cos()
    }
}

/// Real-argument `S`.
pub fn sin_ratio_real<T: Real>(x: T) -> T {
    let h = T::FRAC_PI_2();
    if x.abs() < T::lit(SERIES_RADIUS) {
        let h2 = h * h;
        let mut acc = T::zero();
        for k in (0..9usize).rev() {
            acc = T::one() - x * acc * h2 / T::from_usize_((2 * k + 2) * (2 * k + 3));
        }
        acc * h
    } else if x > T::zero() {
        let r = x.sqrt();
        (r * h).sin() / r
    } else {
        let r = (-x).sqrt();
        (r * h).sinh() / r
    }
}

/// Real-argument `C`.
pub fn cos_root_real<T: Real>(x: T) -> T {
    let h = T::FRAC_PI_2();
    if x.abs() < T::lit(SERIES_RADIUS) {
        let h2 = h * h;
        let mut acc = T::zero();
        for k in (0..9usize).rev() {
            acc = T::one() - x * acc * h2 / T::from_usize_((2 * k + 1) * (2 * k + 2));
        }
        acc
    } else if x > T::zero() {
        (x.sqrt() * h).cos()
    } else {
        ((-x).sqrt() * h).cosh()
    }
}

/// Coefficients `a_k(ν) = Π_{j≤k}(4ν² − (2j−1)²) / (k!·8^k)` of Hankel's expansion.
pub fn hankel_coefficients<T: Real>(nu: T, count: usize) -> Vec<T> {
    let mu = T::lit(4.0) * nu * nu;
    let mut out = Vec::with_capacity(count);
    let mut a = T::one();
    out.push(a);
    for k in 1..count {
        let odd = T::from_usize_(2 * k - 1);
        a = a * (mu - odd * odd) / (T::from_usize_(k) * T::lit(8.0));
        out.push(a);
    }
    out
}

/// Large-argument `J_ν(x)` from Hankel's P/Q expansion, truncated at the smallest term.
fn bessel_j_hankel<T: Real>(nu: T, x: T) -> T {
    let mu = T::lit(4.0) * nu * nu;
    let (mut p, mut q) = (T::one(), T::zero());
    let mut term = T::one();
    let mut last = T::infinity();
    for k in 1..200usize {
        let odd = T::from_usize_(2 * k - 1);
        term = term * (mu - odd * odd) / (T::from_usize_(k) * T::lit(8.0) * x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // sign pattern: P gets (-1)^(k/2) t_k for even k, Q gets (-1)^((k-1)/2) t_k for odd k
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < T::epsilon() * T::lit(1e-2) {
            break;
        }
    }
    let phi = (nu * T::lit(0.5) + T::lit(0.25)) * T::PI();
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (T::lit(2.0) / (T::PI() * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Fills `out[k] = J_{ν₀+k}(x)` for `k = 0..=n`, where `ν₀ = 1/2` if `half` else 0, `x ≥ 0`.
pub fn bessel_j_seq<T: Real>(half: bool, n: usize, x: T, out: &mut Vec<T>) {
    out.clear();
    out.resize(n + 1, T::zero());
    let nu0 = if half { T::lit(0.5) } else { T::zero() };
    if x == T::zero() {
        if !half {
            out[0] = T::one();
        }
        return;
    }
    let forward = x > T::from_usize_(n + 1) && (half || x >= T::lit(25.0));
    if forward {
        let (j0, j1) = if half {
            let f = (T::lit(2.0) / (T::PI() * x)).sqrt();
            let (s, c) = x.sin_cos();
            (f * s, f * (s / x - c))
        } else {
            (bessel_j_hankel(T::zero(), x), bessel_j_hankel(T::one(), x))
        };
        out[0] = j0;
        if n >= 1 {
            out[1] = j1;
        }
        for k in 1..n {
            let nu = nu0 + T::from_usize_(k);
            out[k + 1] = T::lit(2.0) * nu / x * out[k] - out[k - 1];
        }
        return;
    }
    // Miller's backward recurrence
    let top = n.max(x.ceil().to_usize().unwrap_or(n));
    let mut start = top + 20 + (160.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let big = T::max_value().sqrt();
    let (mut jp1, mut j) = (T::zero(), T::one());
    let mut sum = T::zero();
    for k in (1..=start).rev() {
        let nu = nu0 + T::from_usize_(k);
        let jm1 = T::lit(2.0) * nu / x * j - jp1;
        jp1 = j;
        j = jm1;
        let order = k - 1;
        if order <= n {
            out[order] = j;
        }
        if !half && order % 2 == 0 {
            sum += if order == 0 { j } else { T::lit(2.0) * j };
        }
        if j.abs() > big {
            let s = T::one() / big;
            j *= s;
            jp1 *= s;
            sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    let scale = if half {
        let f = (T::lit(2.0) / (T::PI() * x)).sqrt();
        let (s, c) = x.sin_cos();
        // normalize against whichever closed form is far from a zero of sin
        if n >= 1 && s.abs() < T::lit(0.3) {
            f * (s / x - c) / out[1]
        } else {
            f * s / out[0]
        }
    } else {
        T::one() / sum
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
}

/// `J_m(x)` for integer order, `|m| ≤ 20` the supported range.
pub fn bessel_j<T: Real>(m: i32, x: T) -> T {
    let n = m.unsigned_abs() as usize;
    let mut sign = if m < 0 && n % 2 == 1 { -T::one() } else { T::one() };
    let mut x = x;
    if x < T::zero() {
        x = -x;
        if n % 2 == 1 {
            sign = -sign;
        }
    }
    if x == T::zero() {
        return if n == 0 { sign } else { T::zero() };
    }
    if x < T::lit(2.0) {
        let mut term = T::one();
        for k in 1..=n {
            term = term * x * T::lit(0.5) / T::from_usize_(k);
        }
        let q = -x * x * T::lit(0.25);
        let mut sum = term;
        for k in 1..60usize {
            term = term * q / T::from_usize_(k * (n + k));
            sum += term;
            if term.abs() <= T::epsilon() * sum.abs() * T::lit(0.1) {
                break;
            }
        }
        return sign * sum;
    }
    let mut seq = Vec::new();
    bessel_j_seq(false, n, x, &mut seq);
    sign * seq[n]
}

/// Jacobi polynomials `P_k^{(α,β)}(x)` for `k = 0..=n`.
pub fn jacobi_seq<T: Real>(n: usize, alpha: T, beta: T, x: T, out: &mut Vec<T>) {
    out.clear();
    out.push(T::one());
    if n == 0 {
        return;
    }
    let two = T::lit(2.0);
    out.push((alpha + T::one()) + (alpha + beta + two) * (x - T::one()) / two);
    for k in 2..=n {
        let kk = T::from_usize_(k);
        let s = two * kk + alpha + beta;
        let a = two * kk * (kk + alpha + beta) * (s - two);
        let b = (s - T::one()) * (s * (s - two) * x + alpha * alpha - beta * beta);
        let c = two * (kk + alpha - T::one()) * (kk + beta - T::one()) * s;
        let next = (b * out[k - 1] - c * out[k - 2]) / a;
        out.push(next);
    }
}

/// `Γ(k + 3/2)/k!` for `k = 0..=n`.
pub fn gamma_half_ratio(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut g = std::f64::consts::PI.sqrt() / 2.0;
    out.push(g);
    for k in 1..=n {
        g *= (k as f64 + 0.5) / k as f64;
        out.push(g);
    }
    out
}
