//! Vector arithmetic, order statistics, distribution functions, and seeded
//! randomness shared by the rest of the crate.

mod rng;
mod stats;
mod vector;

pub use rng::{streams, RngStream, UniformSource};
pub use stats::{coordinate_median, median_in_place, normal_quantile, sample_exponential};
pub use vector::{common_dim, mean_of, GradVector};
