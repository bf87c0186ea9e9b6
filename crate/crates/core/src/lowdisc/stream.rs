use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sobol::SobolSampler;
use crate::error::{Error, Result};
use crate::scalar::Real;

const SCALE_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Source of points in `(0,1)^s`: a seeded pseudo-random generator or a Sobol' sampler.
#[derive(Debug, Clone)]
pub enum UniformStream {
    /// ChaCha8 keyed by `seed`; its 64-bit block counter makes the stream replayable
    /// from any position.
    Pseudo {
        rng: Box<ChaCha8Rng>,
        dims: usize,
        seed: u64,
        cursor: u64,
    },
    Sobol(SobolSampler),
}

impl UniformStream {
    pub fn pseudo(dims: usize, seed: u64) -> Self {
        Self::Pseudo {
            rng: Box::new(ChaCha8Rng::seed_from_u64(seed)),
            dims,
            seed,
            cursor: 0,
        }
    }

    pub fn sobol(sampler: SobolSampler) -> Self {
        Self::Sobol(sampler)
    }

    pub fn dims(&self) -> usize {
        match self {
            Self::Pseudo { dims, .. } => *dims,
            Self::Sobol(s) => s.dims(),
        }
    }

    /// Index of the next point.
    pub fn cursor(&self) -> u64 {
        match self {
            Self::Pseudo { cursor, .. } => *cursor,
            Self::Sobol(s) => s.cursor(),
        }
    }

    /// Repositions the stream so that the next point is point number `index`.
    pub fn skip_to(&mut self, index: u64) -> Result<()> {
        match self {
            Self::Pseudo {
                rng, dims, cursor, ..
            } => {
                // Two 32-bit words per coordinate.
                let words = (index as u128) * (*dims as u128) * 2;
                rng.set_word_pos(words);
                *cursor = index;
                Ok(())
            }
            Self::Sobol(s) => s.skip_to(index),
        }
    }

    /// Fills `out` (length `dims`) with the next point.
    #[inline]
    pub fn next_into<T: Real>(&mut self, out: &mut [T]) -> Result<()> {
        match self {
            Self::Pseudo { rng, cursor, .. } => {
                for o in out.iter_mut() {
                    // (k + 1/2) 2^-53 lies strictly inside (0, 1).
                    let bits = rng.next_u64() >> 11;
                    *o = T::open_unit((bits as f64 + 0.5) * SCALE_53);
                }
                *cursor += 1;
                Ok(())
            }
            Self::Sobol(s) => s.next_into(out),
        }
    }

    /// Next `n` points as an `n × s` matrix.
    pub fn next_points<T: Real>(&mut self, n: usize) -> Result<Array2<T>> {
        if n == 0 {
            return Err(Error::Domain("point count must be positive".into()));
        }
        let mut m = Array2::zeros((n, self.dims()));
        for mut row in m.rows_mut() {
            let slice = row.as_slice_mut().expect("row-major");
            self.next_into(slice)?;
        }
        Ok(m)
    }
}
