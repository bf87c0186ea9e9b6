//! Brownian-motion covariance on a time grid and its factorizations `C = A Aᵀ`.

mod bridge;
mod factor;
mod linalg;
mod sine;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use bridge::BridgeSchedule;
pub use factor::{FactorizationMethod, PathFactorization, Workspace};
pub use linalg::{cholesky, jacobi_eigen};
pub use sine::{eigenpairs_closed_form, Eigenpairs, SineTransform};

/// Equally spaced monitoring times `t_ℓ = ℓ T / d`, `ℓ = 1..=d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    steps: usize,
    horizon: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(steps: usize, horizon: T) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Domain("time grid needs at least one step".into()));
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::Domain(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        Ok(Self { steps, horizon })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn dt(&self) -> T {
        self.horizon / T::c(self.steps as f64)
    }

    /// `t_1, …, t_d`; the last entry is exactly the horizon.
    pub fn times(&self) -> Vec<T> {
        let dt = self.dt();
        let mut t: Vec<T> = (1..=self.steps).map(|l| dt * T::c(l as f64)).collect();
        t[self.steps - 1] = self.horizon;
        t
    }
}

/// Dense symmetric covariance matrix, usually `min(t_ℓ, t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T> {
    entries: Array2<T>,
    times: Option<Vec<T>>,
    grid: Option<TimeGrid<T>>,
}

impl<T: Real> CovarianceMatrix<T> {
    /// `Δt · min(ℓ, k)` on an equally spaced grid.
    pub fn from_grid(grid: &TimeGrid<T>) -> Self {
        let d = grid.steps();
        let dt = grid.dt();
        let entries = Array2::from_shape_fn((d, d), |(l, k)| dt * T::c((l.min(k) + 1) as f64));
        Self {
            entries,
            times: Some(grid.times()),
            grid: Some(*grid),
        }
    }

    /// `min(t_ℓ, t_k)` for arbitrary strictly increasing positive times.
    pub fn from_times(times: Vec<T>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Domain("no monitoring times".into()));
        }
        if !(times[0] > T::zero()) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "times must be positive and strictly increasing".into(),
            ));
        }
        let d = times.len();
        let entries = Array2::from_shape_fn((d, d), |(l, k)| times[l.min(k)]);
        Ok(Self {
            entries,
            times: Some(times),
            grid: None,
        })
    }

    /// Arbitrary symmetric matrix. Only the standard and PCA factorizations apply.
    pub fn from_entries(entries: Array2<T>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::Domain(format!(
                "covariance must be square and non-empty, got {r}×{c}"
            )));
        }
        for l in 0..r {
            for k in 0..l {
                if entries[[l, k]] != entries[[k, l]] {
                    return Err(Error::Domain(format!(
                        "covariance not symmetric at ({l}, {k})"
                    )));
                }
            }
        }
        Ok(Self {
            entries,
            times: None,
            grid: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }

    pub fn times(&self) -> Option<&[T]> {
        self.times.as_deref()
    }

    /// The grid this matrix was built from, when it is equally spaced.
    pub fn grid(&self) -> Option<&TimeGrid<T>> {
        self.grid.as_ref()
    }

    pub fn trace(&self) -> T {
        self.entries.diag().sum()
    }
}

/// Returns `+1` or `-1` so that multiplying `v` by it makes its largest-magnitude entry
/// positive. Near-ties resolve to the first such entry.
pub(crate) fn sign_of_dominant<T: Real>(v: &[T]) -> T {
    let max = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let tol = max * T::c(1e-10).max(T::epsilon() * T::c(64.0));
    let lead = v
        .iter()
        .find(|x| x.abs() >= max - tol)
        .copied()
        .unwrap_or(T::one());
    if lead < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn small_covariances() {
        let c = CovarianceMatrix::from_grid(&TimeGrid::new(2, 1.0).unwrap());
        assert_eq!(c.entries(), &array![[0.5, 0.5], [0.5, 1.0]]);
        let c = CovarianceMatrix::from_grid(&TimeGrid::new(1, 1.0).unwrap());
        assert_eq!(c.entries(), &array![[1.0]]);
        let c = CovarianceMatrix::from_grid(&TimeGrid::new(3, 1.5).unwrap());
        for l in 0..3 {
            for k in 0..3 {
                assert!((c.entries()[[l, k]] - 0.5 * (l.min(k) + 1) as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0, 1.0).is_err());
        assert!(TimeGrid::new(3, 0.0).is_err());
        assert!(TimeGrid::new(3, f64::NAN).is_err());
        let g = TimeGrid::new(7, 0.7f64).unwrap();
        assert_eq!(*g.times().last().unwrap(), 0.7);
    }

    #[test]
    fn covariance_validation() {
        assert!(CovarianceMatrix::from_times(vec![0.5, 0.5]).is_err());
        assert!(CovarianceMatrix::from_times(vec![0.0, 0.5]).is_err());
        assert!(CovarianceMatrix::from_entries(array![[1.0, 0.2], [0.3, 1.0]]).is_err());
        let c = CovarianceMatrix::from_times(vec![0.1, 0.4, 1.0]).unwrap();
        assert_eq!(c.entries()[[2, 1]], 0.4);
        assert!((c.trace() - 1.5f64).abs() < 1e-15);
    }

    #[test]
    fn dominant_sign() {
        assert_eq!(sign_of_dominant(&[0.1, -0.9, 0.5]), -1.0);
        assert_eq!(sign_of_dominant(&[0.1, 0.9, -0.5]), 1.0);
        // Exact tie: first occurrence decides.
        assert_eq!(sign_of_dominant(&[-0.5, 0.5]), -1.0);
    }
}
