//! Truncated univariate power series in the log aspect ratio.
//!
//! A [`PowerSeries`] of order `N` holds the coefficients `c_0 ..= c_N`; every
//! operation truncates its result at the same order and never looks past it.

use crate::error::{Error, Result};

/// Truncation order used by the Landau-coefficient engine. Order 8 keeps the
/// sixth-order coefficient exact under truncated arithmetic.
pub const DEFAULT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
}

impl PowerSeries {
    pub fn zero(order: usize) -> Self {
        PowerSeries { coeffs: vec![0.0; order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(1.0, order)
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value;
        s
    }

    /// The expansion variable itself, `0 + 1*x`.
    pub fn variable(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    /// Builds a series of the given order; missing coefficients are zero and
    /// coefficients past `order` are dropped.
    pub fn from_coeffs(coeffs: &[f64], order: usize) -> Self {
        let mut s = Self::zero(order);
        for (dst, src) in s.coeffs.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::Contract(format!(
                "power series order mismatch: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(PowerSeries { coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(PowerSeries { coeffs })
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// In-place `self += factor * other`; used by accumulation loops.
    pub fn add_scaled(&mut self, other: &Self, factor: f64) -> Result<()> {
        self.check_order(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.order();
        let mut out = Self::zero(n);
        for i in 0..=n {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..=(n - i) {
                out.coeffs[i + j] += a * other.coeffs[j];
            }
        }
        Ok(out)
    }

    /// `exp` of the series. The constant term is factored out as a scalar
    /// `exp(c_0)`; the rest follows from `e' = s' e`, i.e.
    /// `n e_n = sum_{k=1..n} k s_k e_{n-k}`.
    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut out = Self::zero(n);
        out.coeffs[0] = self.coeffs[0].exp();
        for m in 1..=n {
            let mut acc = 0.0;
            for k in 1..=m {
                acc += k as f64 * self.coeffs[k] * out.coeffs[m - k];
            }
            out.coeffs[m] = acc / m as f64;
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}
