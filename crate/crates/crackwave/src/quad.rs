//! Gauss–Legendre rules.

use crate::scalar::Real;

/// Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule; nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nn = T::from_usize_(n);
        for i in 0..n.div_ceil(2) {
            let mut x = (T::PI() * (T::from_usize_(i) + T::lit(0.75)) / (nn + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (mut p0, mut p1) = (T::one(), x);
                for k in 2..=n {
                    let kk = T::from_usize_(k);
                    let p2 = ((T::lit(2.0) * kk - T::one()) * x * p1 - (kk - T::one()) * p0) / kk;
                    p0 = p1;
                    p1 = p2;
                }
                let (pn, pm) = if n == 1 { (x, T::one()) } else { (p1, p0) };
                dp = nn * (x * pn - pm) / (x * x - T::one());
                let dx = pn / dp;
                x -= dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let h = (b - a) * T::lit(0.5);
        let c = (b + a) * T::lit(0.5);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.on(a, b).fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }
}
