use ndarray::Array2;
use rustfft::num_complex::Complex;

use super::bridge::BridgeSchedule;
use super::linalg::{cholesky, jacobi_eigen};
use super::sine::{eigenvalue, eigenvector_entry, eigenvector_sign, SineTransform};
use super::{CovarianceMatrix, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// How the Brownian path is built from independent standard normals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorizationMethod {
    /// Lower-triangular Cholesky factor (random walk).
    Standard,
    BrownianBridge,
    /// Principal components, largest eigenvalue first.
    Pca,
}

impl FactorizationMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::BrownianBridge => "bridge",
            Self::Pca => "pca",
        }
    }
}

impl std::str::FromStr for FactorizationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "cholesky" => Ok(Self::Standard),
            "bridge" | "brownian-bridge" => Ok(Self::BrownianBridge),
            "pca" => Ok(Self::Pca),
            other => Err(Error::Config(format!("unknown factorization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Operator<T: Real> {
    /// Explicit row-major `A`.
    Dense(Array2<T>),
    /// `√Δt` times the lower-triangular all-ones matrix.
    CumSum(T),
    Bridge(BridgeSchedule<T>),
    /// Closed-form PCA: column `k` is `scale[k] · u_k`.
    Sine {
        scale: Vec<T>,
        transform: SineTransform<T>,
    },
}

/// Scratch buffers for allocation-free products. One per worker.
#[derive(Debug, Clone, Default)]
pub struct Workspace<T> {
    coeffs: Vec<T>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

/// A factor `A` with `A Aᵀ = C`, stored explicitly or as a fast operator.
#[derive(Debug, Clone)]
pub struct PathFactorization<T: Real> {
    method: FactorizationMethod,
    dim: usize,
    op: Operator<T>,
    eigenvalues: Option<Vec<T>>,
}

impl<T: Real> PathFactorization<T> {
    /// Factorizes an explicit covariance matrix.
    ///
    /// Equally spaced grids get the closed-form PCA; other matrices fall back to Jacobi.
    /// The bridge needs the monitoring times the matrix was built from.
    pub fn factorize(cov: &CovarianceMatrix<T>, method: FactorizationMethod) -> Result<Self> {
        let dim = cov.dim();
        match method {
            FactorizationMethod::Standard => {
                let l = cholesky(cov.entries())?;
                Ok(Self {
                    method,
                    dim,
                    op: Operator::Dense(l),
                    eigenvalues: None,
                })
            }
            FactorizationMethod::BrownianBridge => {
                let times = cov.times().ok_or_else(|| {
                    Error::Factorization("bridge construction needs monitoring times".into())
                })?;
                let b = BridgeSchedule::new(times)?;
                Ok(Self {
                    method,
                    dim,
                    op: Operator::Bridge(b),
                    eigenvalues: None,
                })
            }
            FactorizationMethod::Pca => match cov.grid() {
                Some(g) => Ok(Self::pca_closed_form(g)),
                None => {
                    let (values, vectors) = jacobi_eigen(cov.entries())?;
                    if let Some(bad) = values.iter().find(|&&v| !(v > T::zero())) {
                        return Err(Error::Factorization(format!(
                            "matrix not positive definite (eigenvalue {bad})"
                        )));
                    }
                    let mut a = vectors;
                    for (k, &v) in values.iter().enumerate() {
                        let s = v.sqrt();
                        a.column_mut(k).mapv_inplace(|x| x * s);
                    }
                    Ok(Self {
                        method,
                        dim,
                        op: Operator::Dense(a),
                        eigenvalues: Some(values),
                    })
                }
            },
        }
    }

    /// Factorization on an equally spaced grid without forming `C`; all three methods
    /// use an `O(d)` or `O(d log d)` operator.
    pub fn for_grid(grid: &TimeGrid<T>, method: FactorizationMethod) -> Result<Self> {
        let dim = grid.steps();
        Ok(match method {
            FactorizationMethod::Standard => Self {
                method,
                dim,
                op: Operator::CumSum(grid.dt().sqrt()),
                eigenvalues: None,
            },
            FactorizationMethod::BrownianBridge => Self {
                method,
                dim,
                op: Operator::Bridge(BridgeSchedule::new(&grid.times())?),
                eigenvalues: None,
            },
            FactorizationMethod::Pca => Self::pca_closed_form(grid),
        })
    }

    fn pca_closed_form(grid: &TimeGrid<T>) -> Self {
        let d = grid.steps();
        let values: Vec<T> = (0..d).map(|k| eigenvalue(grid, k)).collect();
        let scale = values
            .iter()
            .enumerate()
            .map(|(k, v)| eigenvector_sign::<T>(d, k) * v.sqrt())
            .collect();
        Self {
            method: FactorizationMethod::Pca,
            dim: d,
            op: Operator::Sine {
                scale,
                transform: SineTransform::new(d),
            },
            eigenvalues: Some(values),
        }
    }

    pub fn method(&self) -> FactorizationMethod {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// PCA eigenvalues, non-increasing.
    pub fn eigenvalues(&self) -> Option<&[T]> {
        self.eigenvalues.as_deref()
    }

    /// Whether products go through the fast sine transform.
    pub fn has_fast_pca(&self) -> bool {
        matches!(self.op, Operator::Sine { .. })
    }

    pub fn workspace(&self) -> Workspace<T> {
        match &self.op {
            Operator::Sine { transform, .. } => {
                let (n, s) = transform.buffer_lens();
                Workspace {
                    coeffs: vec![T::zero(); self.dim],
                    buf: vec![Complex::default(); n],
                    scratch: vec![Complex::default(); s],
                }
            }
            _ => Workspace::default(),
        }
    }

    /// `out = A x`.
    pub fn apply(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.op {
            Operator::Dense(a) => {
                for (o, row) in out.iter_mut().zip(a.rows()) {
                    *o = row.iter().zip(x).map(|(a, b)| *a * *b).sum();
                }
            }
            Operator::CumSum(s) => {
                let mut acc = T::zero();
                for (o, &xi) in out.iter_mut().zip(x) {
                    acc += xi;
                    *o = *s * acc;
                }
            }
            Operator::Bridge(b) => b.apply(x, out),
            Operator::Sine { scale, transform } => {
                if ws.buf.is_empty() {
                    *ws = self.workspace();
                }
                for ((c, &s), &xi) in ws.coeffs.iter_mut().zip(scale).zip(x) {
                    *c = s * xi;
                }
                transform.apply(&ws.coeffs, out, &mut ws.buf, &mut ws.scratch);
            }
        }
    }

    /// Allocating convenience wrapper around [`PathFactorization::apply`].
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.apply(x, &mut out, &mut self.workspace());
        out
    }

    /// `A x` through the fast sine transform. Only valid for the closed-form PCA.
    pub fn pca_matvec_fast(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>) -> Result<()> {
        if !self.has_fast_pca() {
            return Err(Error::Contract(format!(
                "fast product needs an equally spaced PCA factorization, have {}",
                self.method.name()
            )));
        }
        if x.len() != self.dim || out.len() != self.dim {
            return Err(Error::Contract(format!(
                "vectors must have length {}",
                self.dim
            )));
        }
        self.apply(x, out, ws);
        Ok(())
    }

    /// Column `k` of `A` (0-based).
    pub fn column(&self, k: usize) -> Vec<T> {
        let d = self.dim;
        match &self.op {
            Operator::Dense(a) => a.column(k).to_vec(),
            Operator::CumSum(s) => (0..d)
                .map(|l| if l >= k { *s } else { T::zero() })
                .collect(),
            Operator::Sine { scale, .. } => (0..d)
                .map(|l| scale[k] * eigenvector_entry(d, k, l))
                .collect(),
            Operator::Bridge(_) => {
                let mut e = vec![T::zero(); d];
                e[k] = T::one();
                self.matvec(&e)
            }
        }
    }

    /// Explicit `A`.
    pub fn dense(&self) -> Array2<T> {
        if let Operator::Dense(a) = &self.op {
            return a.clone();
        }
        let d = self.dim;
        let mut a = Array2::zeros((d, d));
        for k in 0..d {
            for (l, v) in self.column(k).into_iter().enumerate() {
                a[[l, k]] = v;
            }
        }
        a
    }

    /// `max |A Aᵀ − C|`.
    pub fn residual(&self, cov: &CovarianceMatrix<T>) -> T {
        let a = self.dense();
        let aat = a.dot(&a.t());
        aat.iter()
            .zip(cov.entries().iter())
            .fold(T::zero(), |m, (x, c)| m.max((*x - *c).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    const METHODS: [FactorizationMethod; 3] = [
        FactorizationMethod::Standard,
        FactorizationMethod::BrownianBridge,
        FactorizationMethod::Pca,
    ];

    fn grid(d: usize) -> TimeGrid<f64> {
        TimeGrid::new(d, 1.0).unwrap()
    }

    #[test]
    fn scalar_case_is_one() {
        let g = grid(1);
        let c = CovarianceMatrix::from_grid(&g);
        for m in METHODS {
            let a = PathFactorization::factorize(&c, m).unwrap().dense();
            assert!((a[[0, 0]] - 1.0).abs() < 1e-15, "{m:?}");
            let a = PathFactorization::for_grid(&g, m).unwrap().dense();
            assert!((a[[0, 0]] - 1.0).abs() < 1e-15, "{m:?}");
        }
    }

    #[test]
    fn residuals_small_for_all_methods() {
        for d in [2, 3, 8, 13, 64] {
            let g = grid(d);
            let c = CovarianceMatrix::from_grid(&g);
            for m in METHODS {
                let f = PathFactorization::factorize(&c, m).unwrap();
                assert!(f.residual(&c) <= 1e-12, "d={d} {m:?}");
                let f = PathFactorization::for_grid(&g, m).unwrap();
                assert!(f.residual(&c) <= 1e-12, "d={d} {m:?} grid");
            }
        }
    }

    #[test]
    fn grid_and_matrix_paths_agree() {
        let g = grid(16);
        let c = CovarianceMatrix::from_grid(&g);
        for m in METHODS {
            let a = PathFactorization::factorize(&c, m).unwrap().dense();
            let b = PathFactorization::for_grid(&g, m).unwrap().dense();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-13, "{m:?}");
            }
        }
    }

    #[test]
    fn pca_first_column_positive_and_eigenvalues_sum_to_trace() {
        let g = grid(100);
        let f = PathFactorization::for_grid(&g, FactorizationMethod::Pca).unwrap();
        assert!(f.column(0).iter().all(|&x| x > 0.0));
        let sum: f64 = f.eigenvalues().unwrap().iter().sum();
        assert!((sum - 0.01 * 5050.0).abs() < 1e-9 * sum);
    }

    #[test]
    fn fast_product_contract() {
        let g = grid(4);
        let f = PathFactorization::for_grid(&g, FactorizationMethod::Standard).unwrap();
        let mut out = [0.0; 4];
        let err = f
            .pca_matvec_fast(&[1.0; 4], &mut out, &mut f.workspace())
            .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));

        let p = PathFactorization::for_grid(&g, FactorizationMethod::Pca).unwrap();
        let mut ws = p.workspace();
        p.pca_matvec_fast(&[0.0; 4], &mut out, &mut ws).unwrap();
        assert_eq!(out, [0.0; 4]);
        assert!(p.pca_matvec_fast(&[0.0; 3], &mut out, &mut ws).is_err());
    }

    #[test]
    fn fast_product_first_unit_vector_is_first_column() {
        let p = PathFactorization::for_grid(&grid(2), FactorizationMethod::Pca).unwrap();
        let y = p.matvec(&[1.0, 0.0]);
        let l1 = 1.309_016_994_374_947_4f64;
        let n = 5.0f64;
        let u = [
            2.0 / n.sqrt() * (std::f64::consts::PI / n).sin(),
            2.0 / n.sqrt() * (2.0 * std::f64::consts::PI / n).sin(),
        ];
        assert!((y[0] - l1.sqrt() * u[0]).abs() < 1e-14);
        assert!((y[1] - l1.sqrt() * u[1]).abs() < 1e-14);
    }

    #[test]
    fn non_uniform_times_use_jacobi() {
        let c = CovarianceMatrix::from_times(vec![0.1, 0.25, 0.7, 1.3, 2.0]).unwrap();
        let f = PathFactorization::factorize(&c, FactorizationMethod::Pca).unwrap();
        assert!(!f.has_fast_pca());
        assert!(f.residual(&c) < 1e-13);
        assert!(f.column(0).iter().all(|&x| x > 0.0));
        let b = PathFactorization::factorize(&c, FactorizationMethod::BrownianBridge).unwrap();
        assert!(b.residual(&c) < 1e-14);
    }

    #[test]
    fn non_positive_definite_is_rejected() {
        let c = CovarianceMatrix::from_entries(array![[1.0, 2.0], [2.0, 1.0]]).unwrap();
        for m in METHODS {
            assert!(
                matches!(
                    PathFactorization::factorize(&c, m),
                    Err(Error::Factorization(_))
                ),
                "{m:?}"
            );
        }
    }

    #[test]
    fn f32_factorization() {
        let g = TimeGrid::new(16, 1.0f32).unwrap();
        let c = CovarianceMatrix::from_grid(&g);
        let f = PathFactorization::for_grid(&g, FactorizationMethod::Pca).unwrap();
        assert!(f.residual(&c) < 1e-5);
    }
}
