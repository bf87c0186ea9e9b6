//! Sobol' points in natural order with optional random linear scrambling plus digital shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::direction::{DirectionNumbers, DIGITS};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Points a 32-digit sampler can emit.
pub const CAPACITY: u64 = 1 << 32;

/// Replacement for a scrambled coordinate that lands exactly on zero.
const ZERO_CLAMP: f64 = 1.0 / (1u64 << 33) as f64;
const SCALE: f64 = 1.0 / (1u64 << 32) as f64;

/// Randomization applied on top of the raw digital sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scramble {
    None,
    /// Random nonsingular lower-triangular digit matrix and digital shift per coordinate.
    LinearAffine {
        seed: u64,
    },
}

/// Sobol' sampler. The cursor is the index of the next point to emit.
#[derive(Debug, Clone)]
pub struct SobolSampler {
    /// `prefix[c][k]` is the XOR of the first `k + 1` (scrambled) direction numbers of
    /// coordinate `c`; moving from index `i` to `i + 1` flips exactly those.
    prefix: Vec<[u32; DIGITS]>,
    directions: Vec<[u32; DIGITS]>,
    shift: Vec<u32>,
    state: Vec<u32>,
    cursor: u64,
    scramble: Scramble,
}

impl SobolSampler {
    pub fn new(numbers: &DirectionNumbers, scramble: Scramble) -> Self {
        let dims = numbers.dims();
        let mut directions: Vec<[u32; DIGITS]> = (0..dims).map(|c| *numbers.vectors(c)).collect();
        let mut shift = vec![0u32; dims];
        if let Scramble::LinearAffine { seed } = scramble {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (dirs, sh) in directions.iter_mut().zip(shift.iter_mut()) {
                let rows = random_lower_triangular(&mut rng);
                for v in dirs.iter_mut() {
                    *v = apply_matrix(&rows, *v);
                }
                *sh = rng.random();
            }
        }
        let prefix = directions
            .iter()
            .map(|dirs| {
                let mut p = [0u32; DIGITS];
                let mut acc = 0;
                for (k, v) in dirs.iter().enumerate() {
                    acc ^= v;
                    p[k] = acc;
                }
                p
            })
            .collect();
        Self {
            prefix,
            directions,
            shift,
            state: vec![0; dims],
            cursor: 0,
            scramble,
        }
    }

    pub fn dims(&self) -> usize {
        self.directions.len()
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn scramble(&self) -> Scramble {
        self.scramble
    }

    /// Moves the cursor to `index` in `O(log index)` per coordinate.
    pub fn skip_to(&mut self, index: u64) -> Result<()> {
        if index >= CAPACITY {
            return Err(Error::Capacity(format!("index {index} beyond 2^32 points")));
        }
        for (st, dirs) in self.state.iter_mut().zip(&self.directions) {
            let mut x = 0;
            let mut bits = index;
            let mut k = 0;
            while bits != 0 {
                if bits & 1 == 1 {
                    x ^= dirs[k];
                }
                bits >>= 1;
                k += 1;
            }
            *st = x;
        }
        self.cursor = index;
        Ok(())
    }

    /// Steps the digit state from the cursor index to the next one.
    fn advance(&mut self) -> Result<()> {
        if self.cursor >= CAPACITY {
            return Err(Error::Capacity("sampler exhausted 2^32 points".into()));
        }
        let i = self.cursor as u32;
        if i != u32::MAX {
            let flip = i.trailing_ones() as usize;
            for (st, p) in self.state.iter_mut().zip(&self.prefix) {
                *st ^= p[flip];
            }
        }
        self.cursor += 1;
        Ok(())
    }

    /// Writes the point at the cursor into `out` (length `dims`) and advances.
    pub fn next_into<T: Real>(&mut self, out: &mut [T]) -> Result<()> {
        if self.cursor >= CAPACITY {
            return Err(Error::Capacity("sampler exhausted 2^32 points".into()));
        }
        let scrambled = self.scramble != Scramble::None;
        for ((o, &st), &sh) in out.iter_mut().zip(&self.state).zip(&self.shift) {
            let bits = st ^ sh;
            *o = if scrambled {
                let u = if bits == 0 {
                    ZERO_CLAMP
                } else {
                    bits as f64 * SCALE
                };
                T::open_unit(u)
            } else {
                T::c(bits as f64 * SCALE)
            };
        }
        self.advance()
    }
}

/// Rows of a unit lower-triangular 32×32 matrix over GF(2). Row `i` produces output digit
/// `i + 1` (bit `31 - i`) and may only read digits `1..=i + 1`.
fn random_lower_triangular<R: Rng>(rng: &mut R) -> [u32; DIGITS] {
    let mut rows = [0u32; DIGITS];
    for (i, row) in rows.iter_mut().enumerate() {
        let diag = 1u32 << (31 - i);
        let above = !(diag | (diag - 1));
        *row = diag | (rng.random::<u32>() & above);
    }
    rows
}

fn apply_matrix(rows: &[u32; DIGITS], v: u32) -> u32 {
    rows.iter().enumerate().fold(0, |acc, (i, row)| {
        acc | (((row & v).count_ones() & 1) << (31 - i))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radical_inverse(mut i: u32) -> f64 {
        let mut x = 0.0;
        let mut f = 0.5;
        while i != 0 {
            if i & 1 == 1 {
                x += f;
            }
            i >>= 1;
            f *= 0.5;
        }
        x
    }

    fn first_points(s: &mut SobolSampler, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let mut p = vec![0.0; s.dims()];
                s.next_into(&mut p).unwrap();
                p
            })
            .collect()
    }

    #[test]
    fn first_coordinate_is_van_der_corput_in_natural_order() {
        let dn = DirectionNumbers::joe_kuo(1).unwrap();
        let mut s = SobolSampler::new(&dn, Scramble::None);
        let pts = first_points(&mut s, 4);
        assert_eq!(
            pts.iter().map(|p| p[0]).collect::<Vec<_>>(),
            vec![0.0, 0.5, 0.25, 0.75]
        );
    }

    #[test]
    fn radical_inverse_exhaustive_4096() {
        let dn = DirectionNumbers::joe_kuo(3).unwrap();
        let mut s = SobolSampler::new(&dn, Scramble::None);
        for (i, p) in first_points(&mut s, 4096).iter().enumerate() {
            assert_eq!(p[0], radical_inverse(i as u32), "index {i}");
        }
    }

    #[test]
    fn second_coordinate_known_values() {
        // Coordinate 2 with m = 1, 3, 5: v = 1/2, 3/4, 5/8.
        let dn = DirectionNumbers::joe_kuo(2).unwrap();
        let mut s = SobolSampler::new(&dn, Scramble::None);
        let got: Vec<f64> = first_points(&mut s, 8).iter().map(|p| p[1]).collect();
        assert_eq!(got, vec![0.0, 0.5, 0.75, 0.25, 0.625, 0.125, 0.375, 0.875]);
    }

    #[test]
    fn skip_ahead_matches_sequential() {
        let dn = DirectionNumbers::joe_kuo(16).unwrap();
        let mut a = SobolSampler::new(&dn, Scramble::LinearAffine { seed: 9 });
        let seq = first_points(&mut a, 1000);
        let mut b = SobolSampler::new(&dn, Scramble::LinearAffine { seed: 9 });
        b.skip_to(777).unwrap();
        assert_eq!(first_points(&mut b, 1)[0], seq[777]);
        assert_eq!(b.cursor(), 778);
    }

    #[test]
    fn scrambled_points_avoid_the_boundary() {
        let dn = DirectionNumbers::joe_kuo(8).unwrap();
        let mut s = SobolSampler::new(&dn, Scramble::LinearAffine { seed: 3 });
        for p in first_points(&mut s, 1 << 12) {
            assert!(p.iter().all(|&u| u > 0.0 && u < 1.0));
        }
    }

    #[test]
    fn linear_scramble_is_nonsingular() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows = random_lower_triangular(&mut rng);
        // Images of the 32 unit digit vectors have distinct leading bits.
        let mut seen = 0u32;
        for k in 0..32 {
            let img = apply_matrix(&rows, 1 << k);
            let lead = 31 - img.leading_zeros();
            assert_eq!(lead, k);
            seen |= 1 << lead;
        }
        assert_eq!(seen, u32::MAX);
    }

    #[test]
    fn capacity_is_enforced() {
        let dn = DirectionNumbers::joe_kuo(1).unwrap();
        let mut s = SobolSampler::new(&dn, Scramble::None);
        s.skip_to(CAPACITY - 1).unwrap();
        let mut p = [0.0f64];
        s.next_into(&mut p).unwrap();
        assert!(s.next_into(&mut p).is_err());
        assert!(s.skip_to(CAPACITY).is_err());
    }
}
