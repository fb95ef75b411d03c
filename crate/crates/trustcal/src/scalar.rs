//! Floating-point scalar abstraction.
//!
//! All numeric kernels in this crate (bandit state, reward arithmetic,
//! context encoding) are generic over [`Scalar`], so the same code runs in
//! `f32` or `f64`. Replay accounting and reported statistics always use
//! `f64` regardless of the model scalar.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convert an `f64` constant (hyperparameter, literal) into the model scalar.
#[inline]
pub fn from_f64<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("finite f64 converts to scalar")
}

/// Convert a scalar into `f64` for accounting and reporting.
#[inline]
pub fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().expect("scalar converts to f64")
}
