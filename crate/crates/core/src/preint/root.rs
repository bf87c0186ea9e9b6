//! Safeguarded Newton search for the jump location `ψ(y)`.

use crate::error::{Error, Result};
use crate::payoff::JumpIntegrand;
use crate::scalar::Real;

/// Below this `x_j` a still-positive `φ` is reported as having no root.
pub const NO_ROOT_CUTOFF: f64 = -40.0;
/// Newton/bisection steps allowed after bracketing.
pub const MAX_ITERATIONS: usize = 50;
/// Upper bracket expansion stops here.
const RIGHT_LIMIT: f64 = (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootStatus<T> {
    Root(T),
    /// `φ(x_j, y) > 0` for every `x_j`, checked down to the cutoff.
    NoRoot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult<T> {
    pub status: RootStatus<T>,
    /// Newton or bisection steps after bracketing.
    pub iterations: usize,
    /// Calls to `φ` including bracketing.
    pub evaluations: usize,
    /// `|φ|` at the root, or `φ` at the cutoff when there is none.
    pub residual: T,
}

impl<T: Copy> RootResult<T> {
    pub fn root(&self) -> Option<T> {
        match self.status {
            RootStatus::Root(x) => Some(x),
            RootStatus::NoRoot => None,
        }
    }
}

/// Finds `ψ(y)` with `φ(ψ(y), y) = 0`.
pub fn find_root<T: Real, G: JumpIntegrand<T>>(g: &G, y: &[T]) -> Result<RootResult<T>> {
    let mut st = g.new_state();
    g.prepare(y, &mut st);
    find_root_prepared(g, &mut st)
}

/// [`find_root`] on a state already prepared for `y`.
///
/// Newton starts at `x_j = 0`. The bracket grows by doubling from `[−1, 1]` toward the
/// side where the sign changes; any Newton step leaving it is replaced by bisection.
/// Converged means `|φ| ≤ 1e-12 · root_scale` and the next Newton correction is below
/// `1e-12 (1 + |x|)`, or the bracket has shrunk to a few ulps.
pub fn find_root_prepared<T: Real, G: JumpIntegrand<T>>(
    g: &G,
    st: &mut G::State,
) -> Result<RootResult<T>> {
    let rel = T::c(1e-12).max(T::epsilon() * T::c(4.0));
    let tol_f = rel * g.root_scale();
    let two = T::c(2.0);
    let mut evaluations = 1;
    let (f0, d0) = g.section(st, T::zero());
    let found = |x: T, f: T, iterations, evaluations| {
        Ok(RootResult {
            status: RootStatus::Root(x),
            iterations,
            evaluations,
            residual: f.abs(),
        })
    };
    if f0 == T::zero() {
        return found(T::zero(), f0, 0, evaluations);
    }

    let (mut lo, mut hi);
    if f0 > T::zero() {
        hi = T::zero();
        let cutoff = T::c(NO_ROOT_CUTOFF);
        let mut a = -T::one();
        loop {
            let (fa, _) = g.section(st, a);
            evaluations += 1;
            if fa == T::zero() {
                return found(a, fa, 0, evaluations);
            }
            if fa < T::zero() {
                lo = a;
                break;
            }
            if a <= cutoff {
                return Ok(RootResult {
                    status: RootStatus::NoRoot,
                    iterations: 0,
                    evaluations,
                    residual: fa,
                });
            }
            a = (a * two).max(cutoff);
        }
    } else {
        lo = T::zero();
        let mut b = T::one();
        loop {
            let (fb, _) = g.section(st, b);
            evaluations += 1;
            if fb == T::zero() {
                return found(b, fb, 0, evaluations);
            }
            if fb > T::zero() {
                hi = b;
                break;
            }
            if b >= T::c(RIGHT_LIMIT) {
                return Err(Error::Convergence {
                    iterations: 0,
                    last: b.f64(),
                });
            }
            b *= two;
        }
    }

    let (mut x, mut f, mut df) = (T::zero(), f0, d0);
    for it in 1..=MAX_ITERATIONS {
        let newton = x - f / df;
        x = if df > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            lo + (hi - lo) / two
        };
        let (fx, dfx) = g.section(st, x);
        evaluations += 1;
        f = fx;
        df = dfx;
        if f > T::zero() {
            hi = x;
        } else if f < T::zero() {
            lo = x;
        } else {
            return found(x, f, it, evaluations);
        }
        let scale = T::one() + x.abs();
        let small_step = df > T::zero() && (f / df).abs() <= rel * scale;
        let collapsed = hi - lo <= T::epsilon() * T::c(4.0) * scale;
        if (f.abs() <= tol_f && small_step) || collapsed {
            return found(x, f, it, evaluations);
        }
    }
    Err(Error::Convergence {
        iterations: MAX_ITERATIONS,
        last: x.f64(),
    })
}
