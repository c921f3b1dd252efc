use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// Floating point scalar the generic kernels run on. Implemented for `f32` and `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy literal conversion; every constant in this crate fits either type.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
