//! Small dense kernels: Cholesky and cyclic Jacobi for symmetric matrices.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower-triangular `L` with `L Lᵀ = c`. Fails if `c` is not positive definite.
pub fn cholesky<T: Real>(c: &Array2<T>) -> Result<Array2<T>> {
    let d = c.nrows();
    let mut l = Array2::<T>::zeros((d, d));
    for i in 0..d {
        for j in 0..=i {
            let mut s = c[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::Factorization(format!(
                        "matrix not positive definite (pivot {i} is {s})"
                    )));
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in non-increasing order and the matching unit eigenvectors as
/// columns, each signed so that its largest-magnitude entry is positive.
pub fn jacobi_eigen<T: Real>(c: &Array2<T>) -> Result<(Vec<T>, Array2<T>)> {
    let d = c.nrows();
    let mut a = c.clone();
    let mut v = Array2::<T>::eye(d);
    let scale = a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let tol = T::epsilon() * scale * T::c(0.01);
    let mut converged = d < 2;
    for _sweep in 0..100 {
        let off = off_diagonal_max(&a);
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[[p, q]];
                if apq.abs() <= tol {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (T::c(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..d {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = cs * akp - sn * akq;
                    a[[k, q]] = sn * akp + cs * akq;
                }
                for k in 0..d {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = cs * apk - sn * aqk;
                    a[[q, k]] = sn * apk + cs * aqk;
                }
                for k in 0..d {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = cs * vkp - sn * vkq;
                    v[[k, q]] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_max(&a) > tol * T::c(1e4) {
        return Err(Error::Factorization(
            "Jacobi iteration did not converge".into(),
        ));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[[j, j]]
            .partial_cmp(&a[[i, i]])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vectors = Array2::<T>::zeros((d, d));
    for (dst, &src) in order.iter().enumerate() {
        let col: Vec<T> = v.column(src).to_vec();
        let s = super::sign_of_dominant(&col);
        for (l, x) in col.into_iter().enumerate() {
            vectors[[l, dst]] = s * x;
        }
    }
    Ok((values, vectors))
}

fn off_diagonal_max<T: Real>(a: &Array2<T>) -> T {
    let d = a.nrows();
    let mut m = T::zero();
    for p in 0..d {
        for q in p + 1..d {
            m = m.max(a[[p, q]].abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_of_min_kernel_is_scaled_ones() {
        let c = array![[0.5, 0.5], [0.5, 1.0]];
        let l = cholesky(&c).unwrap();
        let r = 0.5f64.sqrt();
        assert!((l[[0, 0]] - r).abs() < 1e-15);
        assert!((l[[1, 0]] - r).abs() < 1e-15);
        assert!((l[[1, 1]] - r).abs() < 1e-15);
        assert_eq!(l[[0, 1]], 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let c = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(cholesky(&c), Err(Error::Factorization(_))));
    }

    #[test]
    fn jacobi_two_by_two() {
        let (vals, vecs) = jacobi_eigen(&array![[0.5, 0.5], [0.5, 1.0]]).unwrap();
        assert!((vals[0] - 1.309_016_994_374_947_4f64).abs() < 1e-14);
        assert!((vals[1] - 0.190_983_005_625_052_6).abs() < 1e-14);
        assert!(vecs.column(0).iter().all(|&x| x > 0.0));
    }

    #[test]
    fn jacobi_reconstructs() {
        let c = array![[4.0f64, 1.0, -2.0], [1.0, 3.0, 0.5], [-2.0, 0.5, 5.0]];
        let (vals, vecs) = jacobi_eigen(&c).unwrap();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = vecs
            .dot(&Array2::from_diag(&ndarray::Array1::from(vals)))
            .dot(&vecs.t());
        for (a, b) in rebuilt.iter().zip(c.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
