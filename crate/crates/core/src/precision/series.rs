use crate::error::{Error, Result};

use super::{HPReal, Precision};

/// Dense truncated power series in the contracted time variable; `coeffs[k]`
/// multiplies `tau^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    coeffs: Vec<HPReal>,
    prec: Precision,
}

/// `sum_{j=0..=k} a[j] * b[k-j]`, the order-`k` coefficient of a product.
pub fn cauchy_coeff(a: &[HPReal], b: &[HPReal], k: usize) -> HPReal {
    debug_assert!(a.len() > k && b.len() > k);
    let mut acc = &a[0] * &b[k];
    for j in 1..=k {
        acc += &(&a[j] * &b[k - j]);
    }
    acc
}

impl TaylorSeries {
    /// Builds a series from its coefficients, rounding every entry to `prec`.
    ///
    /// Panics on an empty coefficient list.
    pub fn new(coeffs: Vec<HPReal>, prec: Precision) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least one coefficient");
        let coeffs = coeffs
            .into_iter()
            .map(|c| {
                if c.precision() == prec {
                    c
                } else {
                    c.with_precision(prec)
                }
            })
            .collect();
        TaylorSeries { coeffs, prec }
    }

    pub fn from_f64s(values: &[f64], prec: Precision) -> Self {
        TaylorSeries::new(
            values.iter().map(|v| HPReal::from_f64(*v, prec)).collect(),
            prec,
        )
    }

    pub fn zero(order: usize, prec: Precision) -> Self {
        TaylorSeries::new(vec![HPReal::zero(prec); order + 1], prec)
    }

    /// `[1, 0, 0, ...]` up to `order`.
    pub fn unit(order: usize, prec: Precision) -> Self {
        let mut s = TaylorSeries::zero(order, prec);
        s.coeffs[0] = HPReal::one(prec);
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn coeffs(&self) -> &[HPReal] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<HPReal> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &HPReal {
        &self.coeffs[k]
    }

    pub fn push(&mut self, c: HPReal) {
        self.coeffs.push(c.with_precision(self.prec));
    }

    pub fn truncated(&self, order: usize) -> Self {
        let n = (order + 1).min(self.coeffs.len());
        TaylorSeries::new(self.coeffs[..n].to_vec(), self.prec)
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coeffs.iter().map(HPReal::to_f64).collect()
    }

    /// Horner evaluation of the truncated series.
    pub fn evaluate(&self, tau: &HPReal) -> HPReal {
        let mut acc = self.coeffs[self.order()].clone();
        for c in self.coeffs[..self.order()].iter().rev() {
            acc = &acc * tau + c;
        }
        acc
    }

    pub fn scale(&self, s: &HPReal) -> Self {
        TaylorSeries::new(self.coeffs.iter().map(|c| c * s).collect(), self.prec)
    }

    pub fn neg(&self) -> Self {
        TaylorSeries::new(self.coeffs.iter().map(|c| -c).collect(), self.prec)
    }

    /// Coefficient-wise sum up to the smaller of the two orders.
    pub fn add(&self, other: &TaylorSeries) -> Self {
        TaylorSeries::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            self.prec.max(other.prec),
        )
    }

    pub fn sub(&self, other: &TaylorSeries) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product truncated at `order`.
    pub fn mul(&self, other: &TaylorSeries, order: usize) -> Result<Self> {
        let got = self.order().min(other.order());
        if got < order {
            return Err(Error::InsufficientOrder { needed: order, got });
        }
        let coeffs = (0..=order)
            .map(|k| cauchy_coeff(&self.coeffs, &other.coeffs, k))
            .collect();
        Ok(TaylorSeries::new(coeffs, self.prec.max(other.prec)))
    }

    /// Series of `1 / self` up to `order`:
    /// `r_0 = 1/a_0`, `r_k = -(sum_{j=1..=k} a_j r_{k-j}) / a_0`.
    pub fn reciprocal(&self, order: usize) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::SingularAtOrigin);
        }
        let a0_inv = self.coeffs[0].recip();
        let mut r: Vec<HPReal> = Vec::with_capacity(order + 1);
        r.push(a0_inv.clone());
        let zero = HPReal::zero(self.prec);
        for k in 1..=order {
            let mut acc = zero.clone();
            for j in 1..=k.min(self.order()) {
                acc += &(&self.coeffs[j] * &r[k - j]);
            }
            r.push(-(acc * &a0_inv));
        }
        Ok(TaylorSeries::new(r, self.prec))
    }
}
