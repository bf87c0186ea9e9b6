//! Integrands of the form `f(x) = θ(x) · ind(φ(x) > 0)` and the digital Asian option.

mod digital;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::brownian::TimeGrid;
use crate::error::{Error, Result};
use crate::lowdisc::normal_sf;
use crate::scalar::Real;

pub use digital::{
    digital_asian_dphi, digital_asian_phi, make_digital_asian, DigitalAsian, DigitalState,
};

/// Black–Scholes market and contract data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams<T> {
    pub s0: T,
    pub strike: T,
    pub rate: T,
    pub sigma: T,
    pub horizon: T,
}

impl<T: Real> MarketParams<T> {
    pub fn new(s0: T, strike: T, rate: T, sigma: T, horizon: T) -> Result<Self> {
        for (name, v) in [("S0", s0), ("K", strike), ("sigma", sigma), ("T", horizon)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !rate.is_finite() {
            return Err(Error::Domain(format!("rate must be finite, got {rate}")));
        }
        Ok(Self {
            s0,
            strike,
            rate,
            sigma,
            horizon,
        })
    }

    /// `e^{-rT}`.
    pub fn discount(&self) -> T {
        (-self.rate * self.horizon).exp()
    }

    /// Log drift `(r − σ²/2) t`.
    pub fn drift(&self, t: T) -> T {
        (self.rate - self.sigma * self.sigma / T::c(2.0)) * t
    }
}

impl<T: Real> Default for MarketParams<T> {
    /// `S0 = K = 100`, `r = σ = 0.1`, `T = 1`.
    fn default() -> Self {
        Self {
            s0: T::c(100.0),
            strike: T::c(100.0),
            rate: T::c(0.1),
            sigma: T::c(0.1),
            horizon: T::one(),
        }
    }
}

/// Asset prices `S_{t_ℓ} = S0 exp((r − σ²/2) t_ℓ + σ w_ℓ)` along a Brownian path `w`.
pub fn asset_path<T: Real>(params: &MarketParams<T>, w: &[T], grid: &TimeGrid<T>) -> Vec<T> {
    grid.times()
        .into_iter()
        .zip(w)
        .map(|(t, &wl)| params.s0 * (params.drift(t) + params.sigma * wl).exp())
        .collect()
}

/// An integrand `θ(x) · ind(φ(x) > 0)` on `ℝᵈ` with `∂φ/∂x_j > 0`.
///
/// Coordinates other than `j` are called `y`, in their original order with `x_j` removed.
/// `State` carries per-worker scratch so that evaluation along a line `x_j ↦ (x_j, y)`
/// can reuse work done once for `y`.
pub trait JumpIntegrand<T: Real>: Sync {
    type State: Send;

    fn dim(&self) -> usize;

    /// The coordinate `j` (0-based) in which `φ` is increasing.
    fn jump_index(&self) -> usize;

    fn theta(&self, x: &[T]) -> T;
    fn theta_partial(&self, x: &[T], k: usize) -> T;
    fn phi(&self, x: &[T]) -> T;
    fn phi_partial(&self, x: &[T], k: usize) -> T;

    /// `Some(c)` when `θ ≡ c`.
    fn constant_theta(&self) -> Option<T> {
        None
    }

    /// Typical magnitude of `φ`, used to scale the root residual tolerance.
    fn root_scale(&self) -> T {
        T::one()
    }

    /// `∫_lower^∞ θ(x_j, y) ρ(x_j) dx_j` in closed form, when known. `lower = −∞` asks
    /// for the full line.
    fn closed_form_tail(&self, lower: T, _y: &[T]) -> Option<T> {
        self.constant_theta().map(|c| c * normal_sf(lower))
    }

    fn new_state(&self) -> Self::State;

    /// Fixes `y` for subsequent [`JumpIntegrand::section`] calls.
    fn prepare(&self, y: &[T], state: &mut Self::State);

    /// `(φ, ∂φ/∂x_j)` at `(x_j, y)`.
    fn section(&self, state: &mut Self::State, xj: T) -> (T, T);

    /// `θ` at `(x_j, y)`.
    fn section_theta(&self, state: &mut Self::State, xj: T) -> T;

    /// `f(x)` using `state` as scratch.
    fn eval_with(&self, x: &[T], _state: &mut Self::State) -> T {
        if self.phi(x) > T::zero() {
            self.theta(x)
        } else {
            T::zero()
        }
    }

    fn eval(&self, x: &[T]) -> T {
        let mut st = self.new_state();
        self.eval_with(x, &mut st)
    }
}

/// Writes `(x_j, y)` into `out` with `x_j` at position `j`.
pub fn join<T: Copy>(j: usize, xj: T, y: &[T], out: &mut [T]) {
    out[..j].copy_from_slice(&y[..j]);
    out[j] = xj;
    out[j + 1..].copy_from_slice(&y[j..]);
}

/// Splits `x` into `x_j` and the remaining coordinates.
pub fn split<T: Copy>(j: usize, x: &[T]) -> (T, Vec<T>) {
    let mut y = Vec::with_capacity(x.len() - 1);
    y.extend_from_slice(&x[..j]);
    y.extend_from_slice(&x[j + 1..]);
    (x[j], y)
}

type Field<T> = Box<dyn Fn(&[T]) -> T + Send + Sync>;
type Partial<T> = Box<dyn Fn(&[T], usize) -> T + Send + Sync>;

enum Theta<T> {
    Constant(T),
    General(Field<T>, Partial<T>),
}

/// [`JumpIntegrand`] assembled from closures.
pub struct FnIntegrand<T> {
    dim: usize,
    j: usize,
    phi: Field<T>,
    phi_partial: Partial<T>,
    theta: Theta<T>,
    root_scale: T,
}

impl<T: Real> FnIntegrand<T> {
    /// `θ ≡ 1` until replaced.
    pub fn new(
        dim: usize,
        j: usize,
        phi: impl Fn(&[T]) -> T + Send + Sync + 'static,
        phi_partial: impl Fn(&[T], usize) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if j >= dim {
            return Err(Error::Domain(format!(
                "jump index {j} outside dimension {dim}"
            )));
        }
        Ok(Self {
            dim,
            j,
            phi: Box::new(phi),
            phi_partial: Box::new(phi_partial),
            theta: Theta::Constant(T::one()),
            root_scale: T::one(),
        })
    }

    pub fn with_constant_theta(mut self, c: T) -> Self {
        self.theta = Theta::Constant(c);
        self
    }

    pub fn with_theta(
        mut self,
        theta: impl Fn(&[T]) -> T + Send + Sync + 'static,
        theta_partial: impl Fn(&[T], usize) -> T + Send + Sync + 'static,
    ) -> Self {
        self.theta = Theta::General(Box::new(theta), Box::new(theta_partial));
        self
    }

    pub fn with_root_scale(mut self, scale: T) -> Self {
        self.root_scale = scale;
        self
    }
}

impl<T: Real> JumpIntegrand<T> for FnIntegrand<T> {
    type State = Vec<T>;

    fn dim(&self) -> usize {
        self.dim
    }

    fn jump_index(&self) -> usize {
        self.j
    }

    fn theta(&self, x: &[T]) -> T {
        match &self.theta {
            Theta::Constant(c) => *c,
            Theta::General(f, _) => f(x),
        }
    }

    fn theta_partial(&self, x: &[T], k: usize) -> T {
        match &self.theta {
            Theta::Constant(_) => T::zero(),
            Theta::General(_, df) => df(x, k),
        }
    }

    fn phi(&self, x: &[T]) -> T {
        (self.phi)(x)
    }

    fn phi_partial(&self, x: &[T], k: usize) -> T {
        (self.phi_partial)(x, k)
    }

    fn constant_theta(&self) -> Option<T> {
        match self.theta {
            Theta::Constant(c) => Some(c),
            Theta::General(..) => None,
        }
    }

    fn root_scale(&self) -> T {
        self.root_scale
    }

    fn new_state(&self) -> Vec<T> {
        vec![T::zero(); self.dim]
    }

    fn prepare(&self, y: &[T], x: &mut Vec<T>) {
        join(self.j, T::zero(), y, x);
    }

    fn section(&self, x: &mut Vec<T>, xj: T) -> (T, T) {
        x[self.j] = xj;
        ((self.phi)(x), (self.phi_partial)(x, self.j))
    }

    fn section_theta(&self, x: &mut Vec<T>, xj: T) -> T {
        x[self.j] = xj;
        self.theta(x)
    }
}

/// Checks `∂φ/∂x_j > 0` and `φ(x + e_j) > φ(x)` at `samples` uniform points of `[−6, 6]ᵈ`.
/// The error names the first violating sample.
pub fn probe_monotonicity<T: Real, G: JumpIntegrand<T>>(
    g: &G,
    samples: usize,
    seed: u64,
) -> Result<()> {
    let d = g.dim();
    let j = g.jump_index();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![T::zero(); d];
    for index in 0..samples {
        for v in x.iter_mut() {
            *v = T::c(rng.random_range(-6.0..6.0));
        }
        let slope = g.phi_partial(&x, j);
        let here = g.phi(&x);
        let mut shifted = x.clone();
        shifted[j] += T::one();
        let there = g.phi(&shifted);
        if !(slope > T::zero()) || !(there > here) {
            let head: Vec<String> = x
                .iter()
                .take(4)
                .map(|v| format!("{:.4}", v.f64()))
                .collect();
            return Err(Error::Monotonicity {
                index,
                detail: format!(
                    "x = [{}{}], dphi/dx_{} = {slope}, phi(x) = {here}, phi(x + e_j) = {there}",
                    head.join(", "),
                    if d > 4 { ", …" } else { "" },
                    j + 1
                ),
            });
        }
    }
    Ok(())
}
