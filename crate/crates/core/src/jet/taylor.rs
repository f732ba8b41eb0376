use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::{Scalar, LEADING_EPS};
use crate::error::{Error, Result};

/// Truncated univariate Taylor series `c_0 + c_1 t + ... + c_m t^m` with
/// coefficients in `S`.
///
/// A jet of length one is an exact constant; mixing it with a longer jet
/// keeps the longer truncation. All non-constant jets that meet in one
/// computation are expected to share the same order.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn constant(c: S) -> Self {
        Jet { coeffs: vec![c] }
    }

    /// `base + t * direction`, truncated at `order`.
    pub fn variable(base: S, direction: S, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(base);
        if order >= 1 {
            coeffs.push(direction);
            coeffs.resize(order + 1, S::zero());
        }
        Jet { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `t^k` (zero beyond the stored length).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// `k`-th derivative in `t` at `t = 0`, i.e. `k! c_k`.
    pub fn derivative(&self, k: usize) -> S {
        self.coeff(k) * factorial(k)
    }

    fn len(&self) -> usize {
        self.coeffs.len()
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn leading_guard(&self, what: &str) -> Result<()> {
        if self.len() > 1 && self.coeffs[0].value().abs() <= LEADING_EPS {
            return Err(Error::JetDomain(format!(
                "{what} with vanishing leading coefficient {:e}",
                self.coeffs[0].value()
            )));
        }
        Ok(())
    }

    fn recip_unchecked_tail(&self, r0: S) -> Self {
        let n = self.len();
        let mut r: Vec<S> = Vec::with_capacity(n);
        r.push(r0.clone());
        for k in 1..n {
            let mut acc = S::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * r[k - j].clone();
            }
            r.push(-(r0.clone() * acc));
        }
        Jet { coeffs: r }
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (mut long, short) = if self.len() >= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        for (a, b) in long.coeffs.iter_mut().zip(short.coeffs) {
            *a = a.clone() + b;
        }
        long
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if rhs.len() == 1 {
            let c = rhs.coeffs.into_iter().next().unwrap();
            return self.map(|a| a.clone() * c.clone());
        }
        if self.len() == 1 {
            let c = self.coeffs.into_iter().next().unwrap();
            return rhs.map(|b| c.clone() * b.clone());
        }
        let n = self.len().max(rhs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc: Option<S> = None;
            for i in 0..=k {
                if i >= self.len() || k - i >= rhs.len() {
                    continue;
                }
                let term = self.coeffs[i].clone() * rhs.coeffs[k - i].clone();
                acc = Some(match acc {
                    Some(a) => a + term,
                    None => term,
                });
            }
            out.push(acc.unwrap_or_else(S::zero));
        }
        Jet { coeffs: out }
    }
}

impl<S: Scalar> Div for Jet<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if rhs.len() == 1 {
            let c = rhs.coeffs.into_iter().next().unwrap();
            return self.map(|a| a.clone() / c.clone());
        }
        let n = self.len().max(rhs.len());
        let b0 = rhs.coeffs[0].clone();
        let mut q: Vec<S> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeff(k);
            for j in 1..=k.min(rhs.len() - 1) {
                acc = acc - rhs.coeffs[j].clone() * q[k - j].clone();
            }
            q.push(acc / b0.clone());
        }
        Jet { coeffs: q }
    }
}

impl<S: Scalar> Add<f64> for Jet<S> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.coeffs[0] = self.coeffs[0].clone() + rhs;
        self
    }
}

impl<S: Scalar> Sub<f64> for Jet<S> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        self + (-rhs)
    }
}

impl<S: Scalar> Mul<f64> for Jet<S> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Jet {
            coeffs: self.coeffs.into_iter().map(|c| c * rhs).collect(),
        }
    }
}

impl<S: Scalar> Div<f64> for Jet<S> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn from_f64(v: f64) -> Self {
        Jet::constant(S::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.coeffs[0].value()
    }

    fn coefficient(&self, path: &[usize]) -> f64 {
        match path.split_first() {
            None => self.value(),
            Some((&k, rest)) => self
                .coeffs
                .get(k)
                .map_or(0.0, |c| c.coefficient(rest)),
        }
    }

    fn collect_level_orders(&self, depth: usize, out: &mut Vec<usize>) {
        if out.len() <= depth {
            out.resize(depth + 1, 0);
        }
        out[depth] = out[depth].max(self.order());
        for c in &self.coeffs {
            c.collect_level_orders(depth + 1, out);
        }
    }

    fn seeded(value: f64, level: usize, order: usize) -> Self {
        if level == 0 {
            Jet::variable(S::from_f64(value), S::one(), order)
        } else {
            Jet::constant(S::seeded(value, level - 1, order))
        }
    }

    fn is_finite(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_finite)
    }

    fn sqrt(&self) -> Result<Self> {
        self.leading_guard("sqrt")?;
        let s0 = self.coeffs[0].sqrt()?;
        let two_s0 = s0.clone() * 2.0;
        let n = self.len();
        let mut s: Vec<S> = Vec::with_capacity(n);
        s.push(s0);
        for k in 1..n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..k {
                acc = acc - s[j].clone() * s[k - j].clone();
            }
            s.push(acc / two_s0.clone());
        }
        Ok(Jet { coeffs: s })
    }

    fn recip(&self) -> Result<Self> {
        let r0 = self.coeffs[0].recip()?;
        Ok(self.recip_unchecked_tail(r0))
    }

    fn exp(&self) -> Self {
        let n = self.len();
        let mut e: Vec<S> = Vec::with_capacity(n);
        e.push(self.coeffs[0].exp());
        for k in 1..n {
            let mut acc = S::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * e[k - j].clone() * j as f64;
            }
            e.push(acc / k as f64);
        }
        Jet { coeffs: e }
    }

    fn sin_cos(&self) -> (Self, Self) {
        let n = self.len();
        let (s0, c0) = self.coeffs[0].sin_cos();
        let mut s: Vec<S> = Vec::with_capacity(n);
        let mut c: Vec<S> = Vec::with_capacity(n);
        s.push(s0);
        c.push(c0);
        for k in 1..n {
            let mut sk = S::zero();
            let mut ck = S::zero();
            for j in 1..=k {
                let ja = self.coeffs[j].clone() * j as f64;
                sk = sk + ja.clone() * c[k - j].clone();
                ck = ck - ja * s[k - j].clone();
            }
            s.push(sk / k as f64);
            c.push(ck / k as f64);
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }

    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        rhs.coeffs[0].recip()?;
        Ok(self.clone() / rhs.clone())
    }
}

/// Lifts `p + t d` into order-`order` jets, coordinate by coordinate.
pub fn lift<S: Scalar>(p: &[S], d: &[S], order: usize) -> Vec<Jet<S>> {
    p.iter()
        .zip(d)
        .map(|(a, b)| Jet::variable(a.clone(), b.clone(), order))
        .collect()
}

/// Lifts `p` as exact constants (no perturbation at the new level).
pub fn lift_const<S: Scalar>(p: &[S]) -> Vec<Jet<S>> {
    p.iter().cloned().map(Jet::constant).collect()
}

/// Lifts `p + t e_axis`.
pub fn lift_axis<S: Scalar>(p: &[S], axis: usize, order: usize) -> Vec<Jet<S>> {
    p.iter()
        .enumerate()
        .map(|(i, a)| {
            if i == axis {
                Jet::variable(a.clone(), S::one(), order)
            } else {
                Jet::constant(a.clone())
            }
        })
        .collect()
}
