//! Standard normal distribution: density, CDF and Moro's inverse CDF.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

// Beasley–Springer central rational approximation.
const A: [f64; 4] = [
    2.50662823884,
    -18.61500062529,
    41.39119773534,
    -25.44106049637,
];
const B: [f64; 4] = [
    -8.47351093090,
    23.08336743743,
    -21.06224101826,
    3.13082909833,
];
// Moro's Chebyshev tail expansion in log(-log(u)).
const C: [f64; 9] = [
    0.3374754822726147,
    0.9761690190917186,
    0.1607979714918209,
    0.0276438810333863,
    0.0038405729373609,
    0.0003951896511919,
    0.0000321767881768,
    0.0000002888167364,
    0.0000003960315187,
];

/// Standard normal density.
#[inline]
pub fn normal_pdf<T: Real>(x: T) -> T {
    (-(x * x) / T::c(2.0)).exp() * T::FRAC_1_SQRT_2() * T::c(0.5) * T::FRAC_2_SQRT_PI()
}

/// Standard normal CDF via `erfc`, accurate in both tails.
#[inline]
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::c(0.5) * (-x * T::FRAC_1_SQRT_2()).erfc()
}

/// Upper tail `1 - Φ(x)` without cancellation.
#[inline]
pub fn normal_sf<T: Real>(x: T) -> T {
    T::c(0.5) * (x * T::FRAC_1_SQRT_2()).erfc()
}

/// Moro's algorithm as published (absolute error about 3e-9).
pub fn moro<T: Real>(u: T) -> T {
    let y = u - T::c(0.5);
    if y.abs() < T::c(0.42) {
        let r = y * y;
        let num = ((T::c(A[3]) * r + T::c(A[2])) * r + T::c(A[1])) * r + T::c(A[0]);
        let den =
            (((T::c(B[3]) * r + T::c(B[2])) * r + T::c(B[1])) * r + T::c(B[0])) * r + T::one();
        y * num / den
    } else {
        let tail = if y < T::zero() { u } else { T::one() - u };
        let r = (-tail.ln()).ln();
        let x = C.iter().rev().fold(T::zero(), |acc, &c| acc * r + T::c(c));
        if y < T::zero() {
            -x
        } else {
            x
        }
    }
}

/// Inverse standard normal CDF: Moro's approximation polished by one Halley step.
///
/// `u` must lie in the open interval `(0, 1)`.
pub fn inverse_normal_cdf<T: Real>(u: T) -> Result<T> {
    if !(u > T::zero() && u < T::one()) {
        return Err(Error::Domain(format!(
            "inverse normal CDF needs 0 < u < 1, got {u}"
        )));
    }
    Ok(inverse_normal_cdf_unchecked(u))
}

/// [`inverse_normal_cdf`] without the domain check.
#[inline]
pub fn inverse_normal_cdf_unchecked<T: Real>(u: T) -> T {
    let half = T::c(0.5);
    if u > half {
        // 1 - u is exact here, so the result is antisymmetric.
        return -lower_half(T::one() - u);
    }
    lower_half(u)
}

#[inline]
fn lower_half<T: Real>(u: T) -> T {
    let x = moro(u);
    let err = normal_cdf(x) - u;
    let t = err / normal_pdf(x);
    x - t / (T::one() + x * t / T::c(2.0))
}

/// Applies [`inverse_normal_cdf`] to every entry.
pub fn to_gaussian<T: Real>(points: &Array2<T>) -> Result<Array2<T>> {
    let mut out = points.clone();
    for u in out.iter_mut() {
        *u = inverse_normal_cdf(*u)?;
    }
    Ok(out)
}

/// In-place variant for the sampling hot path. Entries must already lie in `(0, 1)`.
#[inline]
pub fn to_gaussian_in_place<T: Real>(row: &mut [T]) {
    for u in row.iter_mut() {
        *u = inverse_normal_cdf_unchecked(*u);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn median_maps_to_zero() {
        assert_eq!(inverse_normal_cdf(0.5f64).unwrap(), 0.0);
    }

    #[test]
    fn known_quantiles() {
        // 30-digit reference values.
        let q975 = 1.959_963_984_540_054_2;
        let q1e10 = -6.361_340_902_404_056;
        assert!((inverse_normal_cdf(0.975f64).unwrap() - q975).abs() < 1e-12);
        assert!((inverse_normal_cdf(1e-10f64).unwrap() - q1e10).abs() < 1e-10);
        assert!((inverse_normal_cdf(0.975f32).unwrap() - 1.959_964).abs() < 1e-5);
    }

    #[test]
    fn raw_moro_is_within_its_published_accuracy() {
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            let x = moro(u);
            assert!((x - inverse_normal_cdf(u).unwrap()).abs() < 4e-9, "u={u}");
        }
    }

    #[test]
    fn domain_errors() {
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(
                matches!(inverse_normal_cdf(u), Err(Error::Domain(_))),
                "u={u}"
            );
        }
    }

    #[test]
    fn antisymmetric() {
        for &u in &[0.001953125f64, 0.0625, 0.2, 0.375, 0.4999] {
            let a = inverse_normal_cdf(u).unwrap();
            let b = inverse_normal_cdf(1.0 - u).unwrap();
            assert!((a + b).abs() <= 1e-14 * a.abs().max(1.0), "u={u}");
        }
    }

    #[test]
    fn cdf_and_sf_agree() {
        for &x in &[-8.0, -1.0, 0.0, 0.3, 5.0] {
            assert!((normal_cdf(x) + normal_sf(x) - 1.0f64).abs() < 1e-15);
        }
        assert!((normal_pdf(0.0f64) - 0.398_942_280_401_432_7).abs() < 1e-16);
    }

    #[test]
    fn matrix_transform() {
        let m = array![[0.5f64, 0.5], [0.5, 0.975]];
        let g = to_gaussian(&m).unwrap();
        assert_eq!(g[[0, 0]], 0.0);
        assert_eq!(g[[0, 1]], 0.0);
        assert_eq!(g[[1, 0]], 0.0);
        assert!((g[[1, 1]] - 1.959_964).abs() < 1e-5);

        let empty = Array2::<f64>::zeros((0, 3));
        assert_eq!(to_gaussian(&empty).unwrap().dim(), (0, 3));

        assert!(to_gaussian(&array![[0.5, 1.0]]).is_err());
    }
}
