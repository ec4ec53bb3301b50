//! Scalar abstraction. Everything downstream is generic over [`Real`],
//! instantiated with `f32` or `f64`.

use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar usable by the geometry, sampling, and test code.
///
/// Combines nalgebra's field operations with the `num-traits` conversions
/// and the two random draws the samplers need. Implemented for `f32` and
/// `f64`.
pub trait Real:
    nalgebra::RealField + num_traits::FromPrimitive + num_traits::ToPrimitive + Copy
{
    /// Converts an `f64` constant; panics if the value is not representable.
    fn cast(x: f64) -> Self {
        num_traits::FromPrimitive::from_f64(x).expect("f64 constant not representable")
    }

    /// Widens to `f64` (exact for `f32` and `f64`).
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar does not fit in f64")
    }

    fn from_count(n: usize) -> Self {
        num_traits::FromPrimitive::from_usize(n).expect("usize not representable")
    }

    /// Machine epsilon of the concrete type.
    fn machine_epsilon() -> Self;

    /// One standard-normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw in `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f64 {
    fn machine_epsilon() -> Self {
        f64::EPSILON
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

impl Real for f32 {
    fn machine_epsilon() -> Self {
        f32::EPSILON
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

/// SplitMix64 step; the stream-derivation primitive for all seeding.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from `seed` and a stream tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}
