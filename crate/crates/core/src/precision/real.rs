use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

thread_local! {
    // Cache for pi, ln2 and friends used by the transcendental functions.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Working precision expressed in significant decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    /// Floor applied when the precision is derived from an approximant order.
    pub const MIN_DIGITS: u32 = 34;

    pub fn digits(digits: u32) -> Self {
        assert!(digits > 0, "precision must be positive");
        Precision { digits }
    }

    /// `L + M + 1` digits, never less than [`Precision::MIN_DIGITS`].
    pub fn for_order(num_deg: usize, den_deg: usize) -> Self {
        let d = (num_deg + den_deg + 1) as u32;
        Precision::digits(d.max(Self::MIN_DIGITS))
    }

    pub fn decimal_digits(&self) -> u32 {
        self.digits
    }

    /// Binary mantissa length, `ceil(digits * log2(10))`.
    pub fn bits(&self) -> usize {
        (self.digits as f64 * LOG2_10).ceil() as usize
    }

    /// `10^(e - digits)`, the usual shape of a relative tolerance.
    pub fn tolerance(&self, e: i32) -> HPReal {
        HPReal::pow10(e - self.digits as i32, *self)
    }
}

/// Arbitrary-precision real number.
///
/// Every value carries its own mantissa length; binary operations round to the
/// larger of the two operand precisions.
#[derive(Clone)]
pub struct HPReal {
    v: BigFloat,
    prec: Precision,
}

impl HPReal {
    fn wrap(v: BigFloat, prec: Precision) -> Self {
        HPReal { v, prec }
    }

    pub fn zero(prec: Precision) -> Self {
        Self::from_i64(0, prec)
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(n: i64, prec: Precision) -> Self {
        Self::wrap(BigFloat::from_i64(n, prec.bits()), prec)
    }

    /// Exact conversion of the binary value of `x`.
    pub fn from_f64(x: f64, prec: Precision) -> Self {
        Self::wrap(BigFloat::from_f64(x, prec.bits().max(64)), prec).rounded(prec)
    }

    pub fn from_ratio(num: i64, den: i64, prec: Precision) -> Self {
        Self::from_i64(num, prec) / Self::from_i64(den, prec)
    }

    /// Parses a decimal literal (`"1.25"`, `"-3e-4"`) or a ratio (`"8/3"`).
    pub fn parse(s: &str, prec: Precision) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = Self::parse(n, prec)?;
            let d = Self::parse(d, prec)?;
            if d.is_zero() {
                return Err(Error::InvalidParameter {
                    name: s.to_string(),
                    reason: "zero denominator".into(),
                });
            }
            return Ok(n / d);
        }
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, prec.bits(), RM, cc));
        if v.is_nan() || v.is_inf() {
            return Err(Error::InvalidParameter {
                name: s.to_string(),
                reason: "not a finite decimal number".into(),
            });
        }
        Ok(Self::wrap(v, prec))
    }

    pub fn pow10(e: i32, prec: Precision) -> Self {
        let ten = Self::from_i64(10, prec);
        let p = ten.powi(e.unsigned_abs() as usize);
        if e < 0 {
            p.recip()
        } else {
            p
        }
    }

    /// Pi at the given precision.
    pub fn pi(prec: Precision) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(prec.bits(), RM)), prec)
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    fn bits(&self) -> usize {
        self.prec.bits()
    }

    fn rounded(mut self, prec: Precision) -> Self {
        if !self.v.is_zero() {
            let _ = self.v.set_precision(prec.bits(), RM);
        }
        self.prec = prec;
        self
    }

    /// Re-rounds to another precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        self.clone().rounded(prec)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.v.is_nan() || self.v.is_inf())
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.v.is_positive() && !self.v.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.prec)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.v.reciprocal(self.bits(), RM), self.prec)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.v.sqrt(self.bits(), RM), self.prec)
    }

    pub fn cbrt(&self) -> Self {
        Self::wrap(self.v.cbrt(self.bits(), RM), self.prec)
    }

    pub fn powi(&self, n: usize) -> Self {
        Self::wrap(self.v.powi(n, self.bits(), RM), self.prec)
    }

    /// `self^e` for positive `self`.
    pub fn powf(&self, e: &HPReal) -> Self {
        let prec = self.prec.max(e.prec);
        Self::wrap(with_consts(|cc| self.v.pow(&e.v, prec.bits(), RM, cc)), prec)
    }

    /// Natural logarithm of `|self|` in `f64`, finite for any nonzero value
    /// even when `self` itself is outside the `f64` range.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let low = Precision::digits(20);
        let v = self.abs().with_precision(low);
        let l = Self::wrap(with_consts(|cc| v.v.ln(low.bits(), RM, cc)), low);
        l.to_f64()
    }

    pub fn sin(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.sin(self.bits(), RM, cc)), self.prec)
    }

    pub fn cos(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.cos(self.bits(), RM, cc)), self.prec)
    }

    pub fn asin(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.asin(self.bits(), RM, cc)), self.prec)
    }

    pub fn atan2(&self, x: &HPReal) -> Self {
        let prec = self.precision();
        if x.is_zero() {
            let half_pi = Self::pi(prec) / Self::from_i64(2, prec);
            return if self.is_negative() { -half_pi } else { half_pi };
        }
        let base = Self::wrap(
            with_consts(|cc| (self / x).v.atan(self.bits(), RM, cc)),
            self.prec,
        );
        if x.is_positive() {
            base
        } else if self.is_negative() {
            base - Self::pi(prec)
        } else {
            base + Self::pi(prec)
        }
    }

    pub fn max(&self, other: &HPReal) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Nearest `f64`. Values outside the `f64` range saturate to infinity.
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf() {
            return if self.v.is_inf_pos() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }
        match self.v.as_raw_parts() {
            None => f64::NAN,
            Some((words, _, sign, exp, _)) => {
                if words.iter().all(|w| *w == 0) {
                    return 0.0;
                }
                // mantissa is a fraction in [0.5, 1) with the most significant word last
                let mut m = 0.0f64;
                for w in words.iter().rev().take(2) {
                    m = m * 18446744073709551616.0 + *w as f64;
                }
                let used = words.len().min(2) as i32;
                let val = m * 2f64.powi(-64 * used) * 2f64.powi(exp.clamp(-1100, 1100));
                if sign == Sign::Neg {
                    -val
                } else {
                    val
                }
            }
        }
    }

    /// Scientific notation with `sig` significant digits, e.g. `-1.2500e-3`.
    pub fn to_sci_string(&self, sig: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let raw = with_consts(|cc| self.v.format(Radix::Dec, RoundingMode::ToEven, cc))
            .unwrap_or_else(|_| "NaN".into());
        round_decimal_string(&raw, sig.max(1))
    }

    /// Full-precision decimal string.
    pub fn to_decimal_string(&self) -> String {
        self.to_sci_string(self.precision().decimal_digits() as usize)
    }

    fn bin(&self, o: &HPReal, f: impl FnOnce(&BigFloat, &BigFloat, usize) -> BigFloat) -> Self {
        let prec = self.prec.max(o.prec);
        Self::wrap(f(&self.v, &o.v, prec.bits()), prec)
    }
}

/// Rounds an astro-float decimal rendering (`[-]d.ddd…e[+-]x`) to `sig` digits.
fn round_decimal_string(raw: &str, sig: usize) -> String {
    let (neg, body) = match raw.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, raw),
    };
    let (mant, exp) = match body.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .map(|b| b - b'0')
        .collect();
    // position of the decimal point relative to digits[0]
    let mut exp10 = exp + int_part.len() as i64 - 1;
    while digits.len() > 1 && digits[0] == 0 {
        digits.remove(0);
        exp10 -= 1;
    }
    if digits.len() > sig {
        let round_up = digits[sig] >= 5;
        digits.truncate(sig);
        if round_up {
            let mut i = sig;
            loop {
                if i == 0 {
                    digits.insert(0, 1);
                    digits.truncate(sig);
                    exp10 += 1;
                    break;
                }
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
    }
    while digits.len() > 1 && *digits.last().unwrap() == 0 {
        digits.pop();
    }
    let mut out = String::with_capacity(digits.len() + 8);
    if neg {
        out.push('-');
    }
    out.push((b'0' + digits[0]) as char);
    if digits.len() > 1 {
        out.push('.');
        out.extend(digits[1..].iter().map(|d| (b'0' + d) as char));
    }
    if exp10 != 0 {
        out.push_str(&format!("e{exp10}"));
    }
    out
}

impl fmt::Debug for HPReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(20))
    }
}

impl fmt::Display for HPReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{}", self.to_sci_string(p)),
            None => write!(f, "{}", self.to_decimal_string()),
        }
    }
}

impl PartialEq for HPReal {
    fn eq(&self, other: &Self) -> bool {
        self.v.cmp(&other.v) == Some(0)
    }
}

impl PartialOrd for HPReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $op:ident) => {
        impl $tr<&HPReal> for &HPReal {
            type Output = HPReal;
            fn $m(self, o: &HPReal) -> HPReal {
                self.bin(o, |a, b, p| a.$op(b, p, RM))
            }
        }
        impl $tr<HPReal> for HPReal {
            type Output = HPReal;
            fn $m(self, o: HPReal) -> HPReal {
                (&self).$m(&o)
            }
        }
        impl $tr<&HPReal> for HPReal {
            type Output = HPReal;
            fn $m(self, o: &HPReal) -> HPReal {
                (&self).$m(o)
            }
        }
        impl $tr<HPReal> for &HPReal {
            type Output = HPReal;
            fn $m(self, o: HPReal) -> HPReal {
                self.$m(&o)
            }
        }
    };
}

bin_op!(Add, add, add);
bin_op!(Sub, sub, sub);
bin_op!(Mul, mul, mul);
bin_op!(Div, div, div);

impl AddAssign<&HPReal> for HPReal {
    fn add_assign(&mut self, o: &HPReal) {
        *self = &*self + o;
    }
}

impl SubAssign<&HPReal> for HPReal {
    fn sub_assign(&mut self, o: &HPReal) {
        *self = &*self - o;
    }
}

impl MulAssign<&HPReal> for HPReal {
    fn mul_assign(&mut self, o: &HPReal) {
        *self = &*self * o;
    }
}

impl Neg for HPReal {
    type Output = HPReal;
    fn neg(self) -> HPReal {
        HPReal::wrap(BigFloat::neg(&self.v), self.prec)
    }
}

impl Neg for &HPReal {
    type Output = HPReal;
    fn neg(self) -> HPReal {
        HPReal::wrap(BigFloat::neg(&self.v), self.prec)
    }
}
