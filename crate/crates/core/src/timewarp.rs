//! Time contraction `tau = M * (1 - (K t + 1)^(-p))`, mapping `t in [0, inf)`
//! onto `tau in [0, M)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{HPReal, Precision, TaylorSeries};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeContractionMap {
    /// Rate parameter `K` in 1/s.
    #[serde(rename = "K")]
    pub rate: f64,
    /// Exponent `p`.
    #[serde(default = "default_exponent")]
    pub p: u32,
    /// Finite image `M` of `t = inf`.
    #[serde(default = "default_horizon", alias = "horizon_M")]
    pub horizon: f64,
}

fn default_exponent() -> u32 {
    3
}

fn default_horizon() -> f64 {
    1.0
}

impl TimeContractionMap {
    pub fn new(rate: f64, p: u32) -> Result<Self> {
        Self::with_horizon(rate, p, 1.0)
    }

    pub fn with_horizon(rate: f64, p: u32, horizon: f64) -> Result<Self> {
        let m = TimeContractionMap { rate, p, horizon };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::config("mapping.K", "must be a positive finite number"));
        }
        if self.p == 0 {
            return Err(Error::config("mapping.p", "must be at least 1"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::config("mapping.horizon", "must be positive"));
        }
        Ok(())
    }

    pub fn map_time(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let base = self.rate * t + 1.0;
        let tau = self.horizon * (1.0 - base.powi(-(self.p as i32)));
        // f64 saturates at M long before t does; keep the image half-open
        Ok(tau.min(self.horizon.next_down()))
    }

    pub fn inverse_map(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0 && tau < self.horizon) {
            return Err(Error::TauOutOfRange {
                tau,
                horizon: self.horizon,
            });
        }
        let rest = 1.0 - tau / self.horizon;
        Ok((rest.powf(-1.0 / self.p as f64) - 1.0) / self.rate)
    }

    pub fn map_time_hp(&self, t: &HPReal) -> Result<HPReal> {
        if t.is_negative() {
            return Err(Error::NegativeTime(t.to_f64()));
        }
        let prec = t.precision();
        let base = HPReal::from_f64(self.rate, prec) * t + HPReal::one(prec);
        let decay = base.powi(self.p as usize).recip();
        Ok(HPReal::from_f64(self.horizon, prec) * (HPReal::one(prec) - decay))
    }

    pub fn inverse_map_hp(&self, tau: &HPReal) -> Result<HPReal> {
        let prec = tau.precision();
        let horizon = HPReal::from_f64(self.horizon, prec);
        if tau.is_negative() || *tau >= horizon {
            return Err(Error::TauOutOfRange {
                tau: tau.to_f64(),
                horizon: self.horizon,
            });
        }
        let rest = HPReal::one(prec) - tau / &horizon;
        let expo = -HPReal::from_ratio(1, self.p as i64, prec);
        Ok((rest.powf(&expo) - HPReal::one(prec)) / HPReal::from_f64(self.rate, prec))
    }

    /// Taylor coefficients of `theta(tau) = dt/dtau` about `tau = 0`.
    ///
    /// `theta = (1 - tau/M)^(-(p+1)/p) / (p K M)` satisfies
    /// `(M - tau) theta' = ((p+1)/p) theta`, giving
    /// `Theta(k+1) = Theta(k) (k + (p+1)/p) / ((k+1) M)`.
    pub fn theta_series(&self, order: usize, prec: Precision) -> TaylorSeries {
        let p = self.p as i64;
        let horizon = HPReal::from_f64(self.horizon, prec);
        let mut th = Vec::with_capacity(order + 1);
        th.push(
            (HPReal::from_i64(p, prec) * HPReal::from_f64(self.rate, prec) * &horizon).recip(),
        );
        let shift = HPReal::from_ratio(p + 1, p, prec);
        for k in 0..order {
            let num = HPReal::from_i64(k as i64, prec) + &shift;
            let den = HPReal::from_i64(k as i64 + 1, prec) * &horizon;
            let next = &th[k] * &(num / den);
            th.push(next);
        }
        TaylorSeries::new(th, prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_examples() {
        let m = TimeContractionMap::new(1.0, 3).unwrap();
        assert_eq!(m.map_time(0.0).unwrap(), 0.0);
        assert_eq!(m.map_time(1.0).unwrap(), 0.875);
        assert!(matches!(m.map_time(-1.0), Err(Error::NegativeTime(_))));
        let m5 = TimeContractionMap::new(5.0, 3).unwrap();
        let far = m5.map_time(1e9).unwrap();
        assert!(far < 1.0 && far > 1.0 - 1e-12);
        let t1 = m5.map_time(100.0).unwrap();
        assert!(t1 < far);
    }

    #[test]
    fn inverse_examples() {
        let m = TimeContractionMap::new(1.0, 3).unwrap();
        assert_eq!(m.inverse_map(0.0).unwrap(), 0.0);
        assert!((m.inverse_map(0.875).unwrap() - 1.0).abs() < 1e-15);
        let m5 = TimeContractionMap::new(5.0, 3).unwrap();
        assert!((m5.inverse_map(0.999).unwrap() - 1.8).abs() < 1e-12);
        assert!(m.inverse_map(1.0).is_err());
        assert!(m.inverse_map(-0.1).is_err());
    }

    #[test]
    fn theta_leading_terms() {
        let p = Precision::digits(40);
        let th = TimeContractionMap::new(1.0, 3).unwrap().theta_series(4, p);
        assert_eq!(th.coeff(0), &HPReal::from_ratio(1, 3, p));
        let th5 = TimeContractionMap::new(5.0, 3).unwrap().theta_series(4, p);
        assert_eq!(th5.coeff(0), &HPReal::from_ratio(1, 15, p));
        let expect = HPReal::from_ratio(1, 15, p) * HPReal::from_ratio(4, 3, p);
        assert!((th5.coeff(1) - &expect).abs() <= p.tolerance(1));
        assert!(th5.coeffs().iter().all(HPReal::is_positive));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TimeContractionMap::new(0.0, 3).is_err());
        assert!(TimeContractionMap::new(1.0, 0).is_err());
    }
}
