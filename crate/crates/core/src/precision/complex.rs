use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{HPReal, Precision};

/// Complex number with [`HPReal`] parts of equal precision.
#[derive(Clone, PartialEq)]
pub struct HPComplex {
    pub re: HPReal,
    pub im: HPReal,
}

impl HPComplex {
    pub fn new(re: HPReal, im: HPReal) -> Self {
        HPComplex { re, im }
    }

    pub fn from_real(re: HPReal) -> Self {
        let im = HPReal::zero(re.precision());
        HPComplex { re, im }
    }

    pub fn zero(prec: Precision) -> Self {
        HPComplex::new(HPReal::zero(prec), HPReal::zero(prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        HPComplex::new(HPReal::from_f64(re, prec), HPReal::from_f64(im, prec))
    }

    pub fn norm_sqr(&self) -> HPReal {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> HPReal {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> Self {
        HPComplex::new(self.re.clone(), -&self.im)
    }

    pub fn scale(&self, s: &HPReal) -> Self {
        HPComplex::new(&self.re * s, &self.im * s)
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        HPComplex::new(&self.re / &n, -(&self.im / &n))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for HPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} {:+?}i)", self.re, self.im)
    }
}

impl Add<&HPComplex> for &HPComplex {
    type Output = HPComplex;
    fn add(self, o: &HPComplex) -> HPComplex {
        HPComplex::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub<&HPComplex> for &HPComplex {
    type Output = HPComplex;
    fn sub(self, o: &HPComplex) -> HPComplex {
        HPComplex::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul<&HPComplex> for &HPComplex {
    type Output = HPComplex;
    fn mul(self, o: &HPComplex) -> HPComplex {
        HPComplex::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Div<&HPComplex> for &HPComplex {
    type Output = HPComplex;
    fn div(self, o: &HPComplex) -> HPComplex {
        let n = o.norm_sqr();
        HPComplex::new(
            (&self.re * &o.re + &self.im * &o.im) / &n,
            (&self.im * &o.re - &self.re * &o.im) / &n,
        )
    }
}

impl Neg for &HPComplex {
    type Output = HPComplex;
    fn neg(self) -> HPComplex {
        HPComplex::new(-&self.re, -&self.im)
    }
}

impl Add for HPComplex {
    type Output = HPComplex;
    fn add(self, o: HPComplex) -> HPComplex {
        &self + &o
    }
}

impl Sub for HPComplex {
    type Output = HPComplex;
    fn sub(self, o: HPComplex) -> HPComplex {
        &self - &o
    }
}

impl Mul for HPComplex {
    type Output = HPComplex;
    fn mul(self, o: HPComplex) -> HPComplex {
        &self * &o
    }
}

impl Div for HPComplex {
    type Output = HPComplex;
    fn div(self, o: HPComplex) -> HPComplex {
        &self / &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_div_inverse() {
        let p = Precision::digits(40);
        let a = HPComplex::from_f64(1.5, -2.0, p);
        let b = HPComplex::from_f64(0.25, 3.0, p);
        let back = &(&a * &b) / &b;
        assert!((&back - &a).abs() <= p.tolerance(2));
        let i = HPComplex::from_f64(0.0, 1.0, p);
        let m1 = &i * &i;
        assert_eq!(m1.to_f64_pair(), (-1.0, 0.0));
    }
}
