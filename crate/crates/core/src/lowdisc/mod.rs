//! Uniform point generation (pseudo-random and scrambled Sobol') and the map to Gaussian space.

mod direction;
mod normal;
mod sobol;
mod stream;

pub use direction::{DirectionNumbers, DirectionRecord, DIGITS};
pub use normal::{
    inverse_normal_cdf, inverse_normal_cdf_unchecked, moro, normal_cdf, normal_pdf, normal_sf,
    to_gaussian, to_gaussian_in_place,
};
pub use sobol::{Scramble, SobolSampler, CAPACITY};
pub use stream::UniformStream;
