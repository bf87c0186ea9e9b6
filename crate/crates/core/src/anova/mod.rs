//! Brute-force ANOVA decomposition on a tensor-product quadrature grid.
//!
//! Every axis carries a Gauss–Hermite rule except an optional jump axis `j`, where
//! `g(x_j, y) = θ · ind(x_j > ψ(y))`. There the nodes are the intervals between all
//! jump points `ψ(y)` over the grid of the other axes, weighted by their Gaussian mass,
//! so that integrating along `j` is exact. All identities are then exact on the discrete
//! measure, up to rounding.

mod decompose;

use crate::error::{Error, Result};
use crate::payoff::JumpIntegrand;
use crate::preint::{find_root, PreintegratedFunction};
use crate::quadrature::gauss_hermite;
use crate::scalar::Real;

pub use decompose::{decompose, AnovaDecomposition, VarianceReport, MAX_DIM, MAX_GRID_POINTS};

/// Bit set of 0-based coordinates.
pub type Subset = u32;

/// 0-based members of `u` in increasing order.
pub fn members(u: Subset) -> Vec<usize> {
    (0..32).filter(|k| u >> k & 1 == 1).collect()
}

/// `{1,3}`-style label with 1-based coordinates.
pub fn subset_label(u: Subset) -> String {
    let m: Vec<String> = members(u).iter().map(|k| (k + 1).to_string()).collect();
    format!("{{{}}}", m.join(","))
}

/// A function on `ℝᵈ` to be decomposed.
pub trait AnovaIntegrand<T: Real>: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[T]) -> Result<T>;

    /// Axis along which the function is `θ · ind(x_j > ψ(y))` with constant `θ`.
    fn jump_axis(&self) -> Option<usize> {
        None
    }

    /// `(θ, ψ(y))` on the jump axis; `None` means the function equals `θ` on the whole line.
    fn jump(&self, _y: &[T]) -> Result<(T, Option<T>)> {
        Err(Error::Contract("integrand has no jump axis".into()))
    }

    /// `∫ g(x_j, y) ρ(x_j) dx_j` on the jump axis.
    fn project_jump(&self, _y: &[T]) -> Result<T> {
        Err(Error::Contract("integrand has no jump axis".into()))
    }
}

/// Smooth integrand given by a closure.
pub struct FnAnova<F> {
    dim: usize,
    f: F,
}

impl<F> FnAnova<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F: Fn(&[T]) -> T + Sync> AnovaIntegrand<T> for FnAnova<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[T]) -> Result<T> {
        Ok((self.f)(x))
    }
}

/// Adapter exposing a constant-`θ` [`JumpIntegrand`] with its exact projection.
pub struct JumpAnova<'a, G, T> {
    g: &'a G,
    theta: T,
    pre: PreintegratedFunction<'a, G, T>,
}

impl<'a, T: Real, G: JumpIntegrand<T>> JumpAnova<'a, G, T> {
    pub fn new(g: &'a G) -> Result<Self> {
        let theta = g
            .constant_theta()
            .ok_or_else(|| Error::Contract("exact jump-axis projection needs constant θ".into()))?;
        Ok(Self {
            g,
            theta,
            pre: PreintegratedFunction::auto(g),
        })
    }
}

impl<T: Real, G: JumpIntegrand<T>> AnovaIntegrand<T> for JumpAnova<'_, G, T> {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn eval(&self, x: &[T]) -> Result<T> {
        Ok(self.g.eval(x))
    }

    fn jump_axis(&self) -> Option<usize> {
        Some(self.g.jump_index())
    }

    fn jump(&self, y: &[T]) -> Result<(T, Option<T>)> {
        Ok((self.theta, find_root(self.g, y)?.root()))
    }

    fn project_jump(&self, y: &[T]) -> Result<T> {
        self.pre.evaluate(y)
    }
}

/// `x_{−k} ↦ ∫ g(x_k, x_{−k}) ρ(x_k) dx_k`, exact on the jump axis and `n`-point
/// Gauss–Hermite otherwise. The argument omits coordinate `k`.
pub fn project<'a, T: Real, G: AnovaIntegrand<T>>(
    g: &'a G,
    k: usize,
    n: usize,
) -> Result<impl Fn(&[T]) -> Result<T> + 'a> {
    let d = g.dim();
    if k >= d {
        return Err(Error::Domain(format!("axis {k} outside dimension {d}")));
    }
    let exact = g.jump_axis() == Some(k);
    let rule = gauss_hermite::<T>(n);
    Ok(move |y: &[T]| {
        if exact {
            return g.project_jump(y);
        }
        let mut x = vec![T::zero(); d];
        let mut total = T::zero();
        for (&node, &w) in rule.nodes.iter().zip(&rule.weights) {
            crate::payoff::join(k, node, y, &mut x);
            total += w * g.eval(&x)?;
        }
        Ok(total)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(members(0b101), vec![0, 2]);
        assert_eq!(subset_label(0b101), "{1,3}");
        assert_eq!(subset_label(0), "{}");
    }

    #[test]
    fn projections_of_simple_functions() {
        let g = FnAnova::new(2, |x: &[f64]| x[0] + x[1]);
        let p = project(&g, 0, 16).unwrap();
        assert!((p(&[0.7]).unwrap() - 0.7).abs() < 1e-14);
        let g = FnAnova::new(1, |x: &[f64]| x[0] * x[0]);
        let p = project(&g, 0, 16).unwrap();
        assert!((p(&[]).unwrap() - 1.0).abs() < 1e-14);
        assert!(project(&g, 1, 16).is_err());
    }
}
