//! Digital Asian call: pays `e^{−rT}` when the arithmetic average of the monitored prices
//! exceeds the strike.

use super::{join, probe_monotonicity, JumpIntegrand, MarketParams};
use crate::brownian::{PathFactorization, TimeGrid, Workspace};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Samples used by [`make_digital_asian`] to check monotonicity.
const PROBE_SAMPLES: usize = 1000;
const PROBE_SEED: u64 = 0x6a09_e667_f3bc_c908;

/// `φ(x) = (S0/d) Σ_ℓ exp((r − σ²/2) t_ℓ + σ (Ax)_ℓ) − K`, `θ ≡ e^{−rT}`.
#[derive(Debug, Clone)]
pub struct DigitalAsian<T: Real> {
    params: MarketParams<T>,
    fact: PathFactorization<T>,
    j: usize,
    drift: Vec<T>,
    /// `σ A_{ℓj}`.
    jump_column: Vec<T>,
    discount: T,
}

/// Per-worker buffers for [`DigitalAsian`].
#[derive(Debug, Clone)]
pub struct DigitalState<T> {
    x: Vec<T>,
    /// Log-price exponents with the `x_j` contribution removed.
    base: Vec<T>,
    ws: Workspace<T>,
}

impl<T: Real> DigitalAsian<T> {
    /// Builds the integrand without probing monotonicity.
    pub fn new_unchecked(
        params: MarketParams<T>,
        fact: PathFactorization<T>,
        j: usize,
    ) -> Result<Self> {
        let d = fact.dim();
        if j >= d {
            return Err(Error::Domain(format!(
                "jump index {j} outside dimension {d}"
            )));
        }
        let grid = TimeGrid::new(d, params.horizon)?;
        let drift = grid.times().into_iter().map(|t| params.drift(t)).collect();
        let jump_column = fact
            .column(j)
            .into_iter()
            .map(|a| params.sigma * a)
            .collect();
        Ok(Self {
            discount: params.discount(),
            params,
            fact,
            j,
            drift,
            jump_column,
        })
    }

    pub fn params(&self) -> &MarketParams<T> {
        &self.params
    }

    pub fn factorization(&self) -> &PathFactorization<T> {
        &self.fact
    }

    /// Fills `state.base` with the exponents at `state.x`.
    fn exponents(&self, state: &mut DigitalState<T>) {
        self.fact.apply(&state.x, &mut state.base, &mut state.ws);
        for (b, &m) in state.base.iter_mut().zip(&self.drift) {
            *b = m + self.params.sigma * *b;
        }
    }

    fn average_scale(&self) -> T {
        self.params.s0 / T::c(self.fact.dim() as f64)
    }

    fn phi_with(&self, x: &[T], state: &mut DigitalState<T>) -> T {
        state.x.copy_from_slice(x);
        self.exponents(state);
        let s: T = state.base.iter().map(|e| e.exp()).sum();
        self.average_scale() * s - self.params.strike
    }
}

impl<T: Real> JumpIntegrand<T> for DigitalAsian<T> {
    type State = DigitalState<T>;

    fn dim(&self) -> usize {
        self.fact.dim()
    }

    fn jump_index(&self) -> usize {
        self.j
    }

    fn theta(&self, _x: &[T]) -> T {
        self.discount
    }

    fn theta_partial(&self, _x: &[T], _k: usize) -> T {
        T::zero()
    }

    fn phi(&self, x: &[T]) -> T {
        self.phi_with(x, &mut self.new_state())
    }

    fn phi_partial(&self, x: &[T], k: usize) -> T {
        let mut st = self.new_state();
        st.x.copy_from_slice(x);
        self.exponents(&mut st);
        let col = if k == self.j {
            self.jump_column.clone()
        } else {
            self.fact
                .column(k)
                .into_iter()
                .map(|a| self.params.sigma * a)
                .collect()
        };
        let s: T = st.base.iter().zip(&col).map(|(e, c)| e.exp() * *c).sum();
        self.average_scale() * s
    }

    fn constant_theta(&self) -> Option<T> {
        Some(self.discount)
    }

    fn root_scale(&self) -> T {
        T::one() + self.params.strike.abs()
    }

    fn new_state(&self) -> DigitalState<T> {
        let d = self.fact.dim();
        DigitalState {
            x: vec![T::zero(); d],
            base: vec![T::zero(); d],
            ws: self.fact.workspace(),
        }
    }

    fn prepare(&self, y: &[T], state: &mut DigitalState<T>) {
        join(self.j, T::zero(), y, &mut state.x);
        self.exponents(state);
    }

    fn section(&self, state: &mut DigitalState<T>, xj: T) -> (T, T) {
        let mut s = T::zero();
        let mut ds = T::zero();
        for (&b, &c) in state.base.iter().zip(&self.jump_column) {
            let e = (b + c * xj).exp();
            s += e;
            ds += e * c;
        }
        let scale = self.average_scale();
        (scale * s - self.params.strike, scale * ds)
    }

    fn section_theta(&self, _state: &mut DigitalState<T>, _xj: T) -> T {
        self.discount
    }

    fn eval_with(&self, x: &[T], state: &mut DigitalState<T>) -> T {
        if self.phi_with(x, state) > T::zero() {
            self.discount
        } else {
            T::zero()
        }
    }
}

/// Digital Asian integrand with `θ ≡ e^{−rT}` and jump coordinate `j` (0-based).
///
/// Fails with [`Error::Monotonicity`] if `φ` is not increasing in `x_j` at some probed point.
pub fn make_digital_asian<T: Real>(
    params: MarketParams<T>,
    fact: PathFactorization<T>,
    j: usize,
) -> Result<DigitalAsian<T>> {
    let g = DigitalAsian::new_unchecked(params, fact, j)?;
    probe_monotonicity(&g, PROBE_SAMPLES, PROBE_SEED)?;
    Ok(g)
}

/// `φ(x)` for the digital Asian option under factorization `fact`.
pub fn digital_asian_phi<T: Real>(
    params: &MarketParams<T>,
    fact: &PathFactorization<T>,
    x: &[T],
) -> Result<T> {
    let g = DigitalAsian::new_unchecked(*params, fact.clone(), 0)?;
    Ok(g.phi(x))
}

/// `∂φ/∂x_k` for the digital Asian option (`k` 0-based).
pub fn digital_asian_dphi<T: Real>(
    params: &MarketParams<T>,
    fact: &PathFactorization<T>,
    x: &[T],
    k: usize,
) -> Result<T> {
    let g = DigitalAsian::new_unchecked(*params, fact.clone(), 0)?;
    if k >= g.dim() {
        return Err(Error::Domain(format!(
            "coordinate {k} outside dimension {}",
            g.dim()
        )));
    }
    Ok(g.phi_partial(x, k))
}
