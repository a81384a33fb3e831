use core::fmt::Debug;
use core::iter::Sum;

use num_traits::Float;

/// Element type of tensors and tape nodes.
///
/// Training defaults to `f32`; gradient checking runs in `f64`. The
/// float math comes through `num_traits::Float` (libm-backed, no_std).
pub trait Scalar: Float + Sum + Debug + Default + 'static {
    fn from_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }
}
