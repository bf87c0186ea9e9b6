//! Gauss–Legendre and Gauss–Hermite rules.

use crate::scalar::Real;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    fn from_f64(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        Self {
            nodes: nodes.into_iter().map(T::c).collect(),
            weights: weights.into_iter().map(T::c).collect(),
        }
    }
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> Rule<T> {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, z).1;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule::from_f64(nodes, weights)
}

/// Value and derivative of the Legendre polynomial of degree `n` at `z`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// `n`-point Gauss–Hermite rule for the standard normal density: `Σ w_i f(x_i) ≈ E f(Z)`.
/// Nodes ascending, weights sum to one.
pub fn gauss_hermite<T: Real>(n: usize) -> Rule<T> {
    // Physicists' rule for e^{-x²} by Newton on orthonormal Hermite functions, then rescaled.
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n + 1 - i],
        };
        for _ in 0..100 {
            let (p, d) = hermite_fn(n, z, pim4);
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let pp = hermite_fn(n, z, pim4).1;
        let w = 2.0 / (pp * pp);
        // Stored descending in physicists' form for the initial-guess recurrences.
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let nodes = nodes.iter().map(|x| x * sqrt2).collect();
    let weights = weights.iter().map(|w| w / sqrt_pi).collect();
    Rule::from_f64(nodes, weights)
}

/// Orthonormal Hermite function of degree `n` and its derivative.
fn hermite_fn(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Composite Gauss–Legendre rule: `panels` equal panels of `per_panel` nodes on `[a, b]`.
pub fn composite_legendre<T: Real>(base: &Rule<T>, a: T, b: T, panels: usize) -> Rule<T> {
    let h = (b - a) / T::c(panels as f64);
    let half = h / T::c(2.0);
    let mut nodes = Vec::with_capacity(panels * base.len());
    let mut weights = Vec::with_capacity(panels * base.len());
    for p in 0..panels {
        let mid = a + h * (T::c(p as f64) + T::c(0.5));
        for (&x, &w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    Rule { nodes, weights }
}
