//! Scalar abstraction for execution-time values.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{CheckedAdd, CheckedMul, Zero};

/// An exact, non-negative execution time.
///
/// Implemented for the built-in unsigned integers wide enough to hold a cycle
/// count (`u64`, `u128`) and for any arbitrary-precision type that offers the
/// same checked arithmetic (e.g. `num_bigint::BigUint`). All algebra in this
/// crate goes through the checked operations, so fixed-width instantiations
/// report overflow instead of wrapping.
pub trait Weight:
    Clone
    + Ord
    + Hash
    + Debug
    + Display
    + FromStr
    + Zero
    + CheckedAdd
    + CheckedMul
    + From<u64>
    + Send
    + Sync
    + 'static
{
    fn add_checked(&self, other: &Self) -> Option<Self> {
        self.checked_add(other)
    }

    fn mul_checked(&self, other: &Self) -> Option<Self> {
        self.checked_mul(other)
    }

    /// `self * count`, checked.
    fn times(&self, count: u64) -> Option<Self> {
        self.checked_mul(&Self::from(count))
    }
}

impl<T> Weight for T where
    T: Clone
        + Ord
        + Hash
        + Debug
        + Display
        + FromStr
        + Zero
        + CheckedAdd
        + CheckedMul
        + From<u64>
        + Send
        + Sync
        + 'static
{
}
