//! Scalar abstraction used by the volume kernels.
//!
//! The kernels are written once, generic over [`Real`]. Running them with
//! `f64` is the production path; running them with [`Counted`] tallies every
//! add, sub, mul, div, abs and sqrt on a thread-local counter, which is how the
//! bench module obtains FLOP counts of the real kernel code.

use std::cell::Cell;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;

    #[inline]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

thread_local! {
    static FLOPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
fn tally() {
    FLOPS.with(|c| c.set(c.get() + 1));
}

/// Resets the FLOP counter of the current thread.
pub fn reset_flops() {
    FLOPS.with(|c| c.set(0));
}

/// FLOPs tallied on the current thread since the last [`reset_flops`].
pub fn flops() -> u64 {
    FLOPS.with(|c| c.get())
}

/// `f64` that counts arithmetic. Negation and comparisons are free.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Counted(pub f64);

impl Add for Counted {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        tally();
        Counted(self.0 + rhs.0)
    }
}

impl Sub for Counted {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        tally();
        Counted(self.0 - rhs.0)
    }
}

impl Mul for Counted {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        tally();
        Counted(self.0 * rhs.0)
    }
}

impl Div for Counted {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        tally();
        Counted(self.0 / rhs.0)
    }
}

impl Neg for Counted {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Counted(-self.0)
    }
}

impl AddAssign for Counted {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for Counted {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Real for Counted {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Counted(v)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.0
    }
    #[inline]
    fn sqrt(self) -> Self {
        tally();
        Counted(self.0.sqrt())
    }
    #[inline]
    fn abs(self) -> Self {
        tally();
        Counted(self.0.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counted_tallies_each_operation() {
        reset_flops();
        let a = Counted(2.0);
        let b = Counted(3.0);
        let c = (a + b) * a - b / a;
        let _ = c.sqrt().abs();
        let _ = -c;
        assert_eq!(flops(), 6);
        assert_eq!(c.0, 8.5);
    }
}
