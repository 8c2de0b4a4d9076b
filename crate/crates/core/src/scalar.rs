//! Scalar abstraction for metric arithmetic.
//!
//! Every metric in this crate is a ratio of integer pixel or detection counts.
//! Kernels are written against [`Scalar`] so the same code runs in `f32`,
//! `f64`, or exact rational arithmetic ([`Exact`]).

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

/// Exact rational scalar. Used by the reference evaluator and wherever
/// bit-for-bit agreement between two computation routes is required.
pub type Exact = BigRational;

/// Numeric type a metric can be computed in.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// `numer / denom`, correctly rounded for floating point types.
    ///
    /// `denom` must be non-zero.
    fn from_ratio(numer: u64, denom: u64) -> Self;

    /// Nearest `f64`.
    fn as_f64(&self) -> f64;

    fn from_count(n: u64) -> Self {
        Self::from_ratio(n, 1)
    }
}

impl Scalar for f64 {
    fn from_ratio(numer: u64, denom: u64) -> Self {
        debug_assert!(denom != 0);
        numer as f64 / denom as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(numer: u64, denom: u64) -> Self {
        debug_assert!(denom != 0);
        // Narrow from the f64 quotient; exact for the count ranges seen in masks.
        (numer as f64 / denom as f64) as f32
    }

    fn as_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn from_ratio(numer: u64, denom: u64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Arithmetic mean of `values`, or `None` when empty.
pub fn mean<S: Scalar>(values: &[S]) -> Option<S> {
    if values.is_empty() {
        return None;
    }
    let sum = values.iter().cloned().fold(S::zero(), |acc, v| acc + v);
    Some(sum / S::from_count(values.len() as u64))
}
