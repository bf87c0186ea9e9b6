//! Brownian bridge path construction.
//!
//! The terminal point is drawn first. Later variables fill the gaps between already built
//! points, always at the (left) middle index, sweeping left to right within each level.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Precomputed bridge weights for a set of monitoring times.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSchedule<T> {
    times: Vec<T>,
    /// Time index built by variable `i`.
    target: Vec<usize>,
    /// Left neighbour (time index plus one; zero means the origin `W_0 = 0`).
    left: Vec<usize>,
    right: Vec<usize>,
    left_weight: Vec<T>,
    right_weight: Vec<T>,
    std_dev: Vec<T>,
}

impl<T: Real> BridgeSchedule<T> {
    pub fn new(times: &[T]) -> Result<Self> {
        let d = times.len();
        if d == 0 {
            return Err(Error::Domain("bridge needs at least one time".into()));
        }
        let mut built = vec![false; d];
        let mut target = vec![0; d];
        let mut left = vec![0; d];
        let mut right = vec![0; d];
        let mut left_weight = vec![T::zero(); d];
        let mut right_weight = vec![T::zero(); d];
        let mut std_dev = vec![T::zero(); d];

        built[d - 1] = true;
        target[0] = d - 1;
        std_dev[0] = times[d - 1].sqrt();

        let mut j = 0;
        for i in 1..d {
            while built[j] {
                j += 1;
            }
            let mut k = j;
            while !built[k] {
                k += 1;
            }
            // Gap is j..k (exclusive); k is already built.
            let l = j + (k - 1 - j) / 2;
            built[l] = true;
            target[i] = l;
            left[i] = j;
            right[i] = k;
            let t_left = if j == 0 { T::zero() } else { times[j - 1] };
            let span = times[k] - t_left;
            left_weight[i] = (times[k] - times[l]) / span;
            right_weight[i] = (times[l] - t_left) / span;
            std_dev[i] = ((times[l] - t_left) * (times[k] - times[l]) / span).sqrt();
            j = k + 1;
            if j >= d {
                j = 0;
            }
        }
        Ok(Self {
            times: times.to_vec(),
            target,
            left,
            right,
            left_weight,
            right_weight,
            std_dev,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time index set by each input variable, in input order.
    pub fn order(&self) -> &[usize] {
        &self.target
    }

    /// Maps standard normals `z` to the path `W_{t_1}, …, W_{t_d}`.
    pub fn apply(&self, z: &[T], path: &mut [T]) {
        let d = self.len();
        path[d - 1] = self.std_dev[0] * z[0];
        for (i, &zi) in z.iter().enumerate().take(d).skip(1) {
            let (j, k, l) = (self.left[i], self.right[i], self.target[i]);
            let base = self.right_weight[i] * path[k] + self.std_dev[i] * zi;
            path[l] = if j == 0 {
                base
            } else {
                base + self.left_weight[i] * path[j - 1]
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_of_two_order_is_dyadic() {
        let t: Vec<f64> = (1..=8).map(|l| l as f64 / 8.0).collect();
        let b = BridgeSchedule::new(&t).unwrap();
        assert_eq!(b.order(), &[7, 3, 1, 5, 0, 2, 4, 6]);
    }

    #[test]
    fn odd_length_fills_left_to_right() {
        let t: Vec<f64> = (1..=5).map(|l| l as f64).collect();
        let b = BridgeSchedule::new(&t).unwrap();
        assert_eq!(b.order(), &[4, 1, 0, 2, 3]);
    }

    #[test]
    fn terminal_point_comes_first() {
        let t = [0.3, 0.9, 2.0];
        let b = BridgeSchedule::new(&t).unwrap();
        let mut path = [0.0; 3];
        b.apply(&[1.0, 0.0, 0.0], &mut path);
        assert!((path[2] - 2.0f64.sqrt()).abs() < 1e-15);
        // With no other innovations the path is linear interpolation toward W_T.
        assert!((path[0] - 0.3 * 2.0f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((path[1] - 0.9 * 2.0f64.sqrt() / 2.0).abs() < 1e-15);
    }
}
