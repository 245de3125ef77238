//! Power series in the rescaled coupling, truncated at a fixed order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::traits::Num;
use num::{BigInt, BigRational};

use crate::error::{Error, Result};

/// Coefficient ring; `f64` and `BigRational` both qualify.
pub trait Coeff: Num + Clone + Neg<Output = Self> + fmt::Debug {
    fn from_ratio(n: i64, d: i64) -> Self;
}

impl Coeff for f64 {
    fn from_ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
}

impl Coeff for BigRational {
    fn from_ratio(n: i64, d: i64) -> Self {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
}

/// Values the generic evaluators compute with: plain numbers or series.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    /// The constant `n / d`, shaped like `self` (same truncation order).
    fn constant(&self, n: i64, d: i64) -> Self;

    /// Multiplication by `n / d`.
    fn scale(&self, n: i64, d: i64) -> Self {
        self.clone() * self.constant(n, d)
    }

    /// Multiplicative inverse; `None` when the (leading) value vanishes.
    fn try_recip(&self) -> Option<Self>;
}

impl Ring for f64 {
    fn constant(&self, n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }

    fn try_recip(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    coeffs: Vec<T>,
}

pub type ExactSeries = TruncatedSeries<BigRational>;

impl<T: Coeff> TruncatedSeries<T> {
    /// Coefficients `c_0..=c_K`; the truncation order is `len - 1`.
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least c_0");
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        TruncatedSeries { coeffs: vec![T::zero(); order + 1] }
    }

    pub fn constant_value(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `c * lambda^power`, truncated.
    pub fn monomial(c: T, power: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Re-truncates (or zero-pads) to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let coeffs = (0..=order).map(|k| self.coeff(k)).collect();
        TruncatedSeries { coeffs }
    }

    pub fn scale_by(&self, c: &T) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    /// Multiplication by `lambda^j`.
    pub fn shift(&self, j: usize) -> Self {
        let k = self.order();
        let coeffs = (0..=k).map(|i| if i >= j { self.coeff(i - j) } else { T::zero() }).collect();
        TruncatedSeries { coeffs }
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        if c0.is_zero() {
            return Err(Error::Argument("series reciprocal needs a nonzero constant term".into()));
        }
        let k = self.order();
        let mut out: Vec<T> = Vec::with_capacity(k + 1);
        out.push(T::one() / c0.clone());
        for n in 1..=k {
            let mut acc = T::zero();
            for j in 1..=n {
                acc = acc + self.coeffs[j].clone() * out[n - j].clone();
            }
            out.push(-(acc / c0.clone()));
        }
        Ok(TruncatedSeries { coeffs: out })
    }

    /// Evaluates the polynomial at `x` (Horner).
    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let k = self.order().min(other.order());
        TruncatedSeries { coeffs: (0..=k).map(|i| f(self.coeff(i), other.coeff(i))).collect() }
    }
}

impl<T: Coeff> Add for TruncatedSeries<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl<T: Coeff> Sub for TruncatedSeries<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl<T: Coeff> Neg for TruncatedSeries<T> {
    type Output = Self;
    fn neg(self) -> Self {
        TruncatedSeries { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl<T: Coeff> Mul for TruncatedSeries<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let k = self.order().min(rhs.order());
        let mut out = vec![T::zero(); k + 1];
        for i in 0..=k {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(k - i) {
                out[i + j] = out[i + j].clone() + self.coeffs[i].clone() * rhs.coeffs[j].clone();
            }
        }
        TruncatedSeries { coeffs: out }
    }
}

impl<T: Coeff> Ring for TruncatedSeries<T> {
    fn constant(&self, n: i64, d: i64) -> Self {
        Self::constant_value(T::from_ratio(n, d), self.order())
    }

    fn scale(&self, n: i64, d: i64) -> Self {
        self.scale_by(&T::from_ratio(n, d))
    }

    fn try_recip(&self) -> Option<Self> {
        self.reciprocal().ok()
    }
}

impl<T: Coeff + fmt::Display> fmt::Display for TruncatedSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})*l"),
                _ => format!("({c})*l^{k}"),
            })
            .collect();
        write!(f, "{} + O(l^{})", terms.join(" + "), self.order() + 1)
    }
}

impl<T: Coeff> fmt::Debug for TruncatedSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn reciprocal_of_geometric() {
        // 1 / (1 - l) = 1 + l + l^2 + l^3
        let s = ExactSeries::from_coeffs(vec![q(1, 1), q(-1, 1), q(0, 1), q(0, 1)]);
        let r = s.reciprocal().unwrap();
        assert_eq!(r.coeffs(), &[q(1, 1), q(1, 1), q(1, 1), q(1, 1)]);
    }

    #[test]
    fn shift_truncates() {
        let s = ExactSeries::from_coeffs(vec![q(1, 1), q(2, 1), q(3, 1)]);
        assert_eq!(s.shift(1).coeffs(), &[q(0, 1), q(1, 1), q(2, 1)]);
        assert!(s.shift(3).is_zero());
    }

    #[test]
    fn mixed_orders_truncate_to_lower() {
        let a = ExactSeries::from_coeffs(vec![q(1, 1), q(1, 1), q(1, 1)]);
        let b = ExactSeries::from_coeffs(vec![q(1, 1), q(1, 1)]);
        assert_eq!((a * b).order(), 1);
    }
}
