use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Leading coefficients smaller than this are treated as zero by the checked
/// division and square root.
pub const LEADING_EPS: f64 = 1e-14;

/// Number field shared by plain `f64` and (nested) truncated Taylor jets.
///
/// Every field in this crate is written once against `Scalar`; feeding it
/// `Jet<S>` inputs differentiates it, and feeding it `Jet<Jet<S>>` inputs
/// differentiates the derivative.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// The plain value, i.e. the coefficient with every jet index zero.
    fn value(&self) -> f64;

    /// Coefficient addressed by one index per nesting level, outermost first.
    /// Missing trailing indices are read as zero; out-of-range indices yield 0.
    fn coefficient(&self, path: &[usize]) -> f64;

    /// Records, per nesting level (outermost at `depth`), the largest
    /// truncation order present in this value.
    fn collect_level_orders(&self, depth: usize, out: &mut Vec<usize>);

    /// A value that is `value` plus a unit perturbation at nesting `level`
    /// truncated at `order`; every other level is unperturbed.
    fn seeded(value: f64, level: usize, order: usize) -> Self;

    fn is_finite(&self) -> bool;

    fn sqrt(&self) -> Result<Self>;
    fn recip(&self) -> Result<Self>;
    fn exp(&self) -> Self;
    fn sin_cos(&self) -> (Self, Self);

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn sin(&self) -> Self {
        self.sin_cos().0
    }

    fn cos(&self) -> Self {
        self.sin_cos().1
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        Ok(acc)
    }

    /// Division that refuses a vanishing leading coefficient in the divisor.
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.recip()?)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn value(&self) -> f64 {
        *self
    }

    fn coefficient(&self, path: &[usize]) -> f64 {
        if path.iter().all(|&i| i == 0) {
            *self
        } else {
            0.0
        }
    }

    fn collect_level_orders(&self, _depth: usize, _out: &mut Vec<usize>) {}

    fn seeded(value: f64, _level: usize, _order: usize) -> Self {
        value
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn sqrt(&self) -> Result<Self> {
        if *self < 0.0 || !f64::is_finite(*self) {
            return Err(Error::JetDomain(format!("sqrt of {self:e}")));
        }
        Ok(f64::sqrt(*self))
    }

    fn recip(&self) -> Result<Self> {
        if self.abs() <= LEADING_EPS {
            return Err(Error::JetDomain(format!("division by {self:e}")));
        }
        Ok(1.0 / *self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn sin_cos(&self) -> (Self, Self) {
        f64::sin_cos(*self)
    }

    fn square(&self) -> Self {
        self * self
    }

    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.abs() <= LEADING_EPS {
            return Err(Error::JetDomain(format!("division by {rhs:e}")));
        }
        Ok(self / rhs)
    }
}

/// Leading values of a slice of scalars.
pub fn values<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(Scalar::value).collect()
}

/// Lifts a plain vector into any scalar type.
pub fn constants<S: Scalar>(v: &[f64]) -> Vec<S> {
    v.iter().map(|&c| S::from_f64(c)).collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (p, q)| acc + p.clone() * q.clone())
}

pub fn norm_sq<S: Scalar>(a: &[S]) -> S {
    a.iter().fold(S::zero(), |acc, p| acc + p.square())
}

/// Highest total degree a product of these values can carry: the sum over
/// nesting levels of the largest truncation order at that level.
pub fn perturbation_degree<S: Scalar>(v: &[S]) -> usize {
    let mut orders = Vec::new();
    for c in v {
        c.collect_level_orders(0, &mut orders);
    }
    orders.iter().sum()
}
