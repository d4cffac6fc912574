//! Caps, floating bodies and Macbeath regions of convex polytopes, economic
//! cap coverings, dependency graphs of Poisson polytopes, and a Monte Carlo
//! harness for their central limit behaviour.

pub mod caps;
pub mod covering;
pub mod depgraph;
pub mod error;
pub mod hull;
pub mod linalg;
pub mod polytope;
pub mod process;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
pub use hull::{convex_hull, HullComplex};
pub use polytope::{builtin, Polytope, PolytopeSpec};

/// Incidence and membership tolerance.
pub const TAU_GEOM: f64 = 1e-9;
/// Relative volume tolerance.
pub const TAU_VOL: f64 = 1e-9;
/// Relative tolerance for points placed on a level set of v.
pub const TAU_LEVEL: f64 = 1e-6;
/// Relative tolerance of the minimal cap search.
pub const TAU_V: f64 = 1e-6;

/// Independent random stream `stream` under the root seed. ChaCha streams
/// are counter based, so the draw for a given (seed, stream) does not depend
/// on how work is scheduled.
pub fn stream_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
