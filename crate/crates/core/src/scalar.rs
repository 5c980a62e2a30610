//! Scalar types usable as Fourier coefficient values.
//!
//! Tree spectra over binary features are sums of dyadic rationals, so they are
//! exact in [`Rational64`] (while path depths stay below 63) and exact in `f64`
//! while every path defines at most 52 attributes.

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

pub trait Scalar:
    Signed + PartialOrd + Clone + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `2^-k`.
    fn dyadic(k: u32) -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as scalar")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn dyadic(k: u32) -> Self {
        (-(k as f64)).exp2()
    }
}

impl Scalar for f32 {
    fn dyadic(k: u32) -> Self {
        (-(k as f32)).exp2()
    }
}

impl Scalar for Rational64 {
    /// Panics for `k >= 63`.
    fn dyadic(k: u32) -> Self {
        assert!(k < 63, "dyadic exponent {k} overflows a 64-bit rational");
        Rational64::new(1, 1i64 << k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_values_agree() {
        for k in 0..20 {
            let exact = Rational64::dyadic(k);
            assert_eq!(exact.to_f64().unwrap(), f64::dyadic(k));
            assert_eq!(f32::dyadic(k) as f64, f64::dyadic(k));
        }
        assert_eq!(Rational64::dyadic(3), Rational64::new(1, 8));
    }
}
