//! Two-dimensional integrand whose jump location escapes to `−∞` near the boundary of
//! the set where a root exists:
//! `φ(x₁, x₂) = e^{x₁} − x₂^m sin(1/x₂)` for `x₂ > 0` and `e^{x₁}` otherwise, `θ ≡ 1`.

use super::{find_root, PreintegratedFunction};
use crate::error::Result;
use crate::payoff::JumpIntegrand;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pathological {
    pub m: i32,
}

impl Pathological {
    /// `c(x₂) = x₂^m sin(1/x₂)` (zero for `x₂ ≤ 0`), so that `φ = e^{x₁} − c`.
    pub fn offset<T: Real>(&self, x2: T) -> T {
        if x2 > T::zero() {
            x2.powi(self.m) * x2.recip().sin()
        } else {
            T::zero()
        }
    }

    fn offset_derivative<T: Real>(&self, x2: T) -> T {
        if x2 > T::zero() {
            let inv = x2.recip();
            T::c(self.m as f64) * x2.powi(self.m - 1) * inv.sin() - x2.powi(self.m - 2) * inv.cos()
        } else {
            T::zero()
        }
    }

    /// `ψ(x₂) = m log x₂ + log sin(1/x₂)` where a root exists.
    pub fn psi_exact<T: Real>(&self, x2: T) -> Option<T> {
        if x2 > T::zero() {
            let s = x2.recip().sin();
            if s > T::zero() {
                return Some(T::c(self.m as f64) * x2.ln() + s.ln());
            }
        }
        None
    }
}

impl<T: Real> JumpIntegrand<T> for Pathological {
    type State = T;

    fn dim(&self) -> usize {
        2
    }

    fn jump_index(&self) -> usize {
        0
    }

    fn theta(&self, _x: &[T]) -> T {
        T::one()
    }

    fn theta_partial(&self, _x: &[T], _k: usize) -> T {
        T::zero()
    }

    fn phi(&self, x: &[T]) -> T {
        x[0].exp() - self.offset(x[1])
    }

    fn phi_partial(&self, x: &[T], k: usize) -> T {
        if k == 0 {
            x[0].exp()
        } else {
            -self.offset_derivative(x[1])
        }
    }

    fn constant_theta(&self) -> Option<T> {
        Some(T::one())
    }

    fn new_state(&self) -> T {
        T::zero()
    }

    fn prepare(&self, y: &[T], offset: &mut T) {
        *offset = self.offset(y[0]);
    }

    fn section(&self, offset: &mut T, xj: T) -> (T, T) {
        let e = xj.exp();
        (e - *offset, e)
    }

    fn section_theta(&self, _offset: &mut T, _xj: T) -> T {
        T::one()
    }
}

/// One point of a [`boundary_decay_probe`] path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySample<T> {
    pub x2: T,
    /// Numerical root, `None` where `φ > 0` along the whole line.
    pub psi: Option<T>,
    pub psi_exact: Option<T>,
    /// `∂/∂x₂` of the preintegrated function.
    pub derivative: T,
}

/// Root and preintegrated derivative along a path of `x₂` values.
pub fn boundary_decay_probe<T: Real>(
    fixture: &Pathological,
    path: &[T],
) -> Result<Vec<DecaySample<T>>> {
    let pre = PreintegratedFunction::auto(fixture);
    path.iter()
        .map(|&x2| {
            let root = find_root(fixture, &[x2])?;
            Ok(DecaySample {
                x2,
                psi: root.root(),
                psi_exact: fixture.psi_exact(x2),
                derivative: pre.derivative(&[x2], 1)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn root_at_two_over_pi() {
        let p = Pathological { m: 2 };
        let r = find_root(&p, &[2.0 / PI]).unwrap();
        assert!((r.root().unwrap() + 0.903_165_410_578_909_7).abs() < 1e-12);
    }

    #[test]
    fn no_root_where_sine_is_negative() {
        let p = Pathological { m: 2 };
        assert!(find_root(&p, &[0.1f64]).unwrap().root().is_none());
        assert!(find_root(&p, &[-0.5f64]).unwrap().root().is_none());
        assert!(p.psi_exact(0.1f64).is_none());
    }

    #[test]
    fn decay_toward_boundary() {
        let p = Pathological { m: 2 };
        let path: Vec<f64> = (1..=8).map(|q| 1.0 / PI + 10f64.powi(-q)).collect();
        let s = boundary_decay_probe(&p, &path).unwrap();
        for w in s.windows(2) {
            assert!(w[1].psi.unwrap() < w[0].psi.unwrap());
        }
        for v in &s {
            assert!((v.psi.unwrap() - v.psi_exact.unwrap()).abs() < 1e-9);
        }
        assert!(s[7].psi.unwrap() < -15.0);
        assert!(s[7].derivative.abs() < 1e-6);
    }
}
