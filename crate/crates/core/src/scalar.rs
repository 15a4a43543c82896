//! Scalar policy: exact rational arithmetic or floating point with an
//! explicit matching tolerance.
//!
//! Every algorithm in this crate is generic over [`Scalar`]. The two shipped
//! implementations are [`Rational`] (arbitrary-precision, `EXACT = true`,
//! tolerance ignored) and `f64` (`EXACT = false`, comparisons within
//! [`Tolerance::eps`]: absolute on positions and lags, relative on
//! coefficients).

use core::cmp::Ordering;
use core::fmt::{Debug, Display};
use core::ops::{Add, Div, Mul, Neg, Sub};

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Float, Signed, ToPrimitive, Zero};
use rand_core::RngCore;

/// Exact scalar: an arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Matching tolerance for floating-point scalars.
///
/// Exact scalars ignore it entirely. `eps` is applied absolutely when
/// comparing positions and lags, relatively when comparing coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps: f64,
}

impl Tolerance {
    pub fn new(eps: f64) -> Self {
        Tolerance { eps }
    }

    /// Zero tolerance; useful when driving floating data through exact-style checks.
    pub const fn exact() -> Self {
        Tolerance { eps: 0.0 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: 1e-9 }
    }
}

/// Arithmetic domain for signal positions, lags and coefficients.
pub trait Scalar:
    Sized
    + Clone
    + PartialEq
    + Debug
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when equality is exact and the tolerance is unused.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn is_zero(&self) -> bool;

    /// Total order used for sorting and deterministic tie-breaking.
    fn cmp_total(&self, other: &Self) -> Ordering;

    fn to_f64(&self) -> f64;

    /// Exact square root when one exists in the domain. For rationals this
    /// requires numerator and denominator to be perfect squares; for floats
    /// it is the usual square root of a nonnegative value.
    fn sqrt_exact(&self) -> Option<Self>;

    /// Conversion from a float, used by numeric paths (eigenvectors,
    /// least squares) that compute in `f64` regardless of the scalar mode.
    /// Rationals receive the exact binary expansion of the value.
    fn from_f64_lossy(v: f64) -> Self;

    /// Position/lag matching: `|a - b| <= eps` (floats) or equality (exact).
    fn matches_abs(&self, other: &Self, tol: Tolerance) -> bool;

    /// Coefficient matching: `|a - b| <= eps * max(|a|, |b|)` (floats) or
    /// equality (exact).
    fn matches_rel(&self, other: &Self, tol: Tolerance) -> bool;

    /// Draw the raw components of a random projection direction.
    ///
    /// Floats use i.i.d. standard normals (uniform on the sphere after
    /// normalization); exact scalars use small random integer vectors whose
    /// coordinate range grows with `widen` so adversarial instances cannot
    /// exhaust the pool.
    fn sample_direction_components(dim: usize, widen: u32, rng: &mut dyn RngCore) -> Vec<Self>;

    /// Brings nonzero direction components to canonical form: unit Euclidean
    /// norm for floats, a primitive integer vector with a positive leading
    /// entry for rationals.
    fn canonicalize_direction(components: Vec<Self>) -> Vec<Self>;

    fn abs(&self) -> Self {
        if self.cmp_total(&Self::zero()) == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_negative(&self) -> bool {
        self.cmp_total(&Self::zero()) == Ordering::Less
    }
}

fn unit_f64(rng: &mut dyn RngCore) -> f64 {
    // 53 random mantissa bits in [0, 1).
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(Float::sqrt(*self))
        }
    }

    fn from_f64_lossy(v: f64) -> Self {
        v
    }

    fn matches_abs(&self, other: &Self, tol: Tolerance) -> bool {
        Float::abs(self - other) <= tol.eps
    }

    fn matches_rel(&self, other: &Self, tol: Tolerance) -> bool {
        let scale = Float::max(Float::abs(*self), Float::abs(*other));
        Float::abs(self - other) <= tol.eps * scale
    }

    fn sample_direction_components(dim: usize, _widen: u32, rng: &mut dyn RngCore) -> Vec<Self> {
        // Box-Muller, one normal per coordinate.
        (0..dim)
            .map(|_| {
                let u1 = unit_f64(rng).max(1e-300);
                let u2 = unit_f64(rng);
                Float::sqrt(-2.0 * Float::ln(u1)) * Float::cos(core::f64::consts::TAU * u2)
            })
            .collect()
    }

    fn canonicalize_direction(components: Vec<Self>) -> Vec<Self> {
        let norm = Float::sqrt(components.iter().map(|x| x * x).sum::<f64>());
        components.into_iter().map(|x| x / norm).collect()
    }
}

fn perfect_sqrt(v: &BigInt) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let root = v.sqrt();
    if &root * &root == *v {
        Some(root)
    } else {
        None
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rational as Zero>::zero()
    }

    fn one() -> Self {
        <Rational as num_traits::One>::one()
    }

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        let numer = perfect_sqrt(self.numer())?;
        let denom = perfect_sqrt(self.denom())?;
        Some(Rational::new(numer, denom))
    }

    fn from_f64_lossy(v: f64) -> Self {
        Rational::from_float(v).unwrap_or_else(<Rational as Zero>::zero)
    }

    fn matches_abs(&self, other: &Self, _tol: Tolerance) -> bool {
        self == other
    }

    fn matches_rel(&self, other: &Self, _tol: Tolerance) -> bool {
        self == other
    }

    fn sample_direction_components(dim: usize, widen: u32, rng: &mut dyn RngCore) -> Vec<Self> {
        let bound = 9 + widen as i64;
        let span = (2 * bound + 1) as u64;
        loop {
            let components: Vec<Self> = (0..dim)
                .map(|_| Self::from_int((rng.next_u64() % span) as i64 - bound))
                .collect();
            if components.iter().any(|c| !<Self as Scalar>::is_zero(c)) {
                return components;
            }
        }
    }

    fn canonicalize_direction(components: Vec<Self>) -> Vec<Self> {
        use num_integer::Integer;
        // Clear denominators, then divide by the gcd of the numerators.
        let mut common_den = BigInt::from(1);
        for c in &components {
            common_den = common_den.lcm(c.denom());
        }
        let mut ints: Vec<BigInt> = components
            .iter()
            .map(|c| c.numer() * (&common_den / c.denom()))
            .collect();
        let mut g = BigInt::from(0);
        for v in &ints {
            g = g.gcd(v);
        }
        if !Zero::is_zero(&g) {
            for v in &mut ints {
                *v = &*v / &g;
            }
        }
        if ints.iter().find(|v| !Zero::is_zero(*v)).is_some_and(|v| v.is_negative()) {
            for v in &mut ints {
                *v = -&*v;
            }
        }
        ints.into_iter().map(Rational::from_integer).collect()
    }
}

/// Lexicographic comparison of coordinate vectors under the total order.
pub fn lex_cmp<S: Scalar>(a: &[S], b: &[S]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.cmp_total(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// True when the first nonzero component is positive (the canonical half of
/// a centro-symmetric pair). The zero vector is not lex-positive.
pub fn lex_positive<S: Scalar>(v: &[S]) -> bool {
    for x in v {
        if !x.is_zero() {
            return !x.is_negative();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sqrt() {
        let r = Rational::new(BigInt::from(9), BigInt::from(4));
        assert_eq!(r.sqrt_exact(), Some(Rational::new(BigInt::from(3), BigInt::from(2))));
        assert_eq!(Rational::from_int(2).sqrt_exact(), None);
        assert_eq!(Rational::from_int(-4).sqrt_exact(), None);
    }

    #[test]
    fn float_matching() {
        let tol = Tolerance::new(1e-9);
        assert!(1.0f64.matches_abs(&(1.0 + 1e-10), tol));
        assert!(!1.0f64.matches_abs(&(1.0 + 1e-8), tol));
        assert!(1e6f64.matches_rel(&(1e6 + 1e-4), tol));
        assert!(!1e-6f64.matches_rel(&(2e-6), tol));
    }

    #[test]
    fn lex_helpers() {
        let a = [Rational::from_int(0), Rational::from_int(2)];
        let b = [Rational::from_int(1), Rational::from_int(-5)];
        assert_eq!(lex_cmp(&a, &b), Ordering::Less);
        assert!(lex_positive(&a));
        assert!(!lex_positive(&[Rational::from_int(0), Rational::from_int(-1)]));
        assert!(!lex_positive(&[Rational::from_int(0), Rational::from_int(0)]));
    }
}
