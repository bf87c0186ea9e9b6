//! Preintegration: integrate out the jump coordinate `x_j` exactly, leaving a smooth
//! function of the remaining coordinates `y`.

mod example;
mod root;

use crate::error::{Error, Result};
use crate::lowdisc::normal_pdf;
use crate::payoff::{join, JumpIntegrand};
use crate::quadrature::{gauss_legendre, Rule};
use crate::scalar::Real;

pub use example::{boundary_decay_probe, DecaySample, Pathological};
pub use root::{
    find_root, find_root_prepared, RootResult, RootStatus, MAX_ITERATIONS, NO_ROOT_CUTOFF,
};

/// Width of the quadrature window above its lower end.
pub const QUADRATURE_SPAN: f64 = 40.0;

/// How the conditional one-dimensional integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreintMode {
    /// Use the integrand's closed-form tail.
    ClosedForm,
    /// Composite Gauss–Legendre on `[ξ*, max(ξ*, 0) + 40]`.
    Quadrature { nodes: usize, panels: usize },
}

impl PreintMode {
    /// 64 nodes on each of 8 panels.
    pub const DEFAULT_QUADRATURE: Self = Self::Quadrature {
        nodes: 64,
        panels: 8,
    };
}

/// `y ↦ ∫ f(x_j, y) ρ(x_j) dx_j` for a fixed integrand and evaluation mode.
#[derive(Debug, Clone)]
pub struct PreintegratedFunction<'a, G, T> {
    g: &'a G,
    mode: PreintMode,
    /// Per-panel rule; also used for `∂θ` terms in closed-form mode.
    rule: Rule<T>,
    panels: usize,
}

impl<'a, T: Real, G: JumpIntegrand<T>> PreintegratedFunction<'a, G, T> {
    pub fn new(g: &'a G, mode: PreintMode) -> Result<Self> {
        let (nodes, panels) = match mode {
            PreintMode::ClosedForm => {
                if g.closed_form_tail(T::zero(), &vec![T::zero(); g.dim() - 1])
                    .is_none()
                {
                    return Err(Error::Contract("integrand has no closed-form tail".into()));
                }
                (64, 8)
            }
            PreintMode::Quadrature { nodes, panels } => {
                if nodes == 0 || panels == 0 {
                    return Err(Error::Config(
                        "quadrature needs at least one node and panel".into(),
                    ));
                }
                (nodes, panels)
            }
        };
        Ok(Self {
            g,
            mode,
            rule: gauss_legendre(nodes),
            panels,
        })
    }

    /// Closed form when the integrand offers one, quadrature otherwise.
    pub fn auto(g: &'a G) -> Self {
        Self::new(g, PreintMode::ClosedForm)
            .or_else(|_| Self::new(g, PreintMode::DEFAULT_QUADRATURE))
            .expect("default quadrature is valid")
    }

    pub fn mode(&self) -> PreintMode {
        self.mode
    }

    pub fn integrand(&self) -> &G {
        self.g
    }

    pub fn evaluate(&self, y: &[T]) -> Result<T> {
        let mut st = self.g.new_state();
        self.evaluate_with(y, &mut st)
    }

    /// Evaluates at `y` reusing `state` as scratch.
    pub fn evaluate_with(&self, y: &[T], state: &mut G::State) -> Result<T> {
        self.g.prepare(y, state);
        let root = find_root_prepared(self.g, state)?;
        self.tail(root.root(), y, state)
    }

    /// `∫_lower^∞ θ ρ`, with `None` meaning the whole line.
    fn tail(&self, lower: Option<T>, y: &[T], state: &mut G::State) -> Result<T> {
        match self.mode {
            PreintMode::ClosedForm => {
                let a = lower.unwrap_or(T::neg_infinity());
                self.g
                    .closed_form_tail(a, y)
                    .ok_or_else(|| Error::Contract("integrand has no closed-form tail".into()))
            }
            PreintMode::Quadrature { .. } => {
                let g = self.g;
                Ok(self.window(lower, |x| g.section_theta(state, x) * normal_pdf(x)))
            }
        }
    }

    /// Composite rule over `[a, max(a, 0) + 40]` where `a` defaults to the no-root cutoff.
    fn window(&self, lower: Option<T>, mut h: impl FnMut(T) -> T) -> T {
        let panels = self.panels;
        let a = lower.unwrap_or(T::c(NO_ROOT_CUTOFF));
        let b = a.max(T::zero()) + T::c(QUADRATURE_SPAN);
        let width = (b - a) / T::c(panels as f64);
        let half = width / T::c(2.0);
        let mut total = T::zero();
        for p in 0..panels {
            let mid = a + width * (T::c(p as f64) + T::c(0.5));
            let s: T = self
                .rule
                .nodes
                .iter()
                .zip(&self.rule.weights)
                .map(|(&x, &w)| w * h(mid + half * x))
                .sum();
            total += half * s;
        }
        total
    }

    /// `∂/∂x_k` of the preintegrated function at `y`, for `k ≠ j` (0-based, full indexing):
    /// `∫_ψ^∞ ∂_kθ ρ + θ(ψ, y) ρ(ψ) ∂_kφ/∂_jφ`.
    pub fn derivative(&self, y: &[T], k: usize) -> Result<T> {
        let g = self.g;
        let (d, j) = (g.dim(), g.jump_index());
        if k >= d || k == j {
            return Err(Error::Domain(format!(
                "derivative coordinate {k} must differ from {j} and be below {d}"
            )));
        }
        let mut st = g.new_state();
        g.prepare(y, &mut st);
        let root = find_root_prepared(g, &mut st)?;
        let psi = root.root();
        let mut x = vec![T::zero(); d];
        let interior = if g.constant_theta().is_some() {
            T::zero()
        } else {
            self.window(psi, |xj| {
                join(j, xj, y, &mut x);
                g.theta_partial(&x, k) * normal_pdf(xj)
            })
        };
        let boundary = match psi {
            None => T::zero(),
            Some(p) => {
                join(j, p, y, &mut x);
                g.theta(&x) * normal_pdf(p) * g.phi_partial(&x, k) / g.phi_partial(&x, j)
            }
        };
        Ok(interior + boundary)
    }
}

/// `∫ f(x_j, y) ρ(x_j) dx_j`, in closed form when available.
pub fn preintegrate<T: Real, G: JumpIntegrand<T>>(g: &G, y: &[T]) -> Result<T> {
    PreintegratedFunction::auto(g).evaluate(y)
}

/// `∂ψ/∂x_k = −∂_kφ / ∂_jφ` at `(ψ(y), y)` (`k` 0-based, full indexing, `k ≠ j`).
pub fn psi_gradient<T: Real, G: JumpIntegrand<T>>(g: &G, y: &[T], k: usize) -> Result<T> {
    let (d, j) = (g.dim(), g.jump_index());
    if k >= d || k == j {
        return Err(Error::Domain(format!(
            "gradient coordinate {k} must differ from {j} and be below {d}"
        )));
    }
    let root = find_root(g, y)?;
    let psi = root
        .root()
        .ok_or_else(|| Error::Domain("no root: φ is positive along the whole line".into()))?;
    let mut x = vec![T::zero(); d];
    join(j, psi, y, &mut x);
    Ok(-g.phi_partial(&x, k) / g.phi_partial(&x, j))
}

/// `∂/∂x_k` of the preintegrated function (see [`PreintegratedFunction::derivative`]).
pub fn dk_preintegrated<T: Real, G: JumpIntegrand<T>>(g: &G, y: &[T], k: usize) -> Result<T> {
    PreintegratedFunction::auto(g).derivative(y, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::{FactorizationMethod, PathFactorization, TimeGrid};
    use crate::payoff::{make_digital_asian, FnIntegrand, MarketParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear(c: f64) -> FnIntegrand<f64> {
        FnIntegrand::new(
            2,
            0,
            move |x: &[f64]| x[0] + c * x[1],
            move |_, k| if k == 0 { 1.0 } else { c },
        )
        .unwrap()
    }

    fn asian(d: usize) -> crate::payoff::DigitalAsian<f64> {
        let f =
            PathFactorization::for_grid(&TimeGrid::new(d, 1.0).unwrap(), FactorizationMethod::Pca)
                .unwrap();
        make_digital_asian(MarketParams::default(), f, 0).unwrap()
    }

    #[test]
    fn one_dimensional_price_is_exact() {
        let g = asian(1);
        let v = preintegrate(&g, &[]).unwrap();
        assert!((v - 0.750_059_434_367_759_9).abs() < 1e-14);
        let q = PreintegratedFunction::new(&g, PreintMode::DEFAULT_QUADRATURE).unwrap();
        assert!((q.evaluate(&[]).unwrap() - v).abs() < 1e-13);
    }

    #[test]
    fn half_mass_for_identity() {
        let g = FnIntegrand::new(1, 0, |x: &[f64]| x[0], |_, _| 1.0).unwrap();
        assert!((preintegrate(&g, &[]).unwrap() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn no_root_gives_full_integral() {
        let g = FnIntegrand::new(1, 0, |x: &[f64]| x[0].exp(), |x, _| x[0].exp())
            .unwrap()
            .with_constant_theta(0.9);
        assert_eq!(preintegrate(&g, &[]).unwrap(), 0.9);
        let q = PreintegratedFunction::new(&g, PreintMode::DEFAULT_QUADRATURE).unwrap();
        assert!((q.evaluate(&[]).unwrap() - 0.9).abs() < 1e-14);
    }

    #[test]
    fn quadrature_handles_varying_theta() {
        // θ = x₁² + x₂: tail of x²ρ is Φ̄(a) + aρ(a).
        let g = linear(1.0).with_theta(
            |x: &[f64]| x[0] * x[0] + x[1],
            |x, k| if k == 0 { 2.0 * x[0] } else { 1.0 },
        );
        let q = PreintegratedFunction::new(&g, PreintMode::DEFAULT_QUADRATURE).unwrap();
        for y in [-2.0, -0.3, 0.0, 1.1, 5.0] {
            let a: f64 = -y;
            let sf = crate::lowdisc::normal_sf(a);
            let exact = sf + a * normal_pdf(a) + y * sf;
            let got = q.evaluate(&[y]).unwrap();
            assert!(
                (got - exact).abs() <= 1e-10 * exact.abs().max(1e-300),
                "y={y}: {got} vs {exact}"
            );
        }
        assert!(PreintegratedFunction::new(&g, PreintMode::ClosedForm).is_err());
    }

    #[test]
    fn quadrature_agrees_with_closed_form_d8() {
        let g = asian(8);
        let c = PreintegratedFunction::new(&g, PreintMode::ClosedForm).unwrap();
        let q = PreintegratedFunction::new(&g, PreintMode::DEFAULT_QUADRATURE).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let y: Vec<f64> = (0..7).map(|_| rng.random_range(-3.0..3.0)).collect();
            assert!((c.evaluate(&y).unwrap() - q.evaluate(&y).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn linear_gradients() {
        assert!((psi_gradient(&linear(1.0), &[0.7], 1).unwrap() + 1.0).abs() < 1e-15);
        assert!((psi_gradient(&linear(2.0), &[-0.2], 1).unwrap() + 2.0).abs() < 1e-15);
        assert!(psi_gradient(&linear(1.0), &[0.7], 0).is_err());
    }

    #[test]
    fn derivative_of_linear_case_is_density() {
        let g = linear(1.0);
        let v = dk_preintegrated(&g, &[0.0], 1).unwrap();
        assert!((v - 0.398_942_280_401_432_7).abs() < 1e-15);
        let v = dk_preintegrated(&g, &[1.3], 1).unwrap();
        assert!((v - normal_pdf(-1.3f64)).abs() < 1e-15);
    }

    #[test]
    fn no_root_has_no_boundary_term() {
        let g = FnIntegrand::new(
            2,
            0,
            |x: &[f64]| x[0].exp() + x[1] * x[1],
            |x, k| if k == 0 { x[0].exp() } else { 2.0 * x[1] },
        )
        .unwrap();
        assert_eq!(dk_preintegrated(&g, &[0.5], 1).unwrap(), 0.0);
        assert!(matches!(psi_gradient(&g, &[0.5], 1), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_with_varying_theta_matches_differences() {
        let g = linear(0.5).with_theta(
            |x: &[f64]| 1.0 + x[0] * x[1],
            |x, k| if k == 0 { x[1] } else { x[0] },
        );
        let q = PreintegratedFunction::new(&g, PreintMode::DEFAULT_QUADRATURE).unwrap();
        for y in [-1.0, 0.2, 2.0] {
            let h = 1e-5;
            let fd = (q.evaluate(&[y + h]).unwrap() - q.evaluate(&[y - h]).unwrap()) / (2.0 * h);
            let an = q.derivative(&[y], 1).unwrap();
            assert!((fd - an).abs() < 1e-8, "y={y}: {fd} vs {an}");
        }
    }
}
