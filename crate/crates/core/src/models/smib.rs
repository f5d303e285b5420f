use serde::{Deserialize, Serialize};

use super::{scalar_dispatch, DynamicalModel, Jacobian};
use crate::dtengine::{primitives::sin_cos_step, CoefficientTable};
use crate::error::{Error, Result};
use crate::precision::{HPReal, Scalar};

/// Classical single machine against an infinite bus:
/// `delta' = omega`, `M omega' = Pm - Pmax sin(delta) - D omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smib {
    /// Inertia constant `M`.
    pub inertia: f64,
    /// Damping coefficient `D`.
    pub damping: f64,
    /// Mechanical power `Pm`.
    pub p_mech: f64,
    /// Peak electrical power `Pmax`.
    pub p_max: f64,
}

impl Smib {
    pub fn new(inertia: f64, damping: f64, p_mech: f64, p_max: f64) -> Result<Self> {
        let bad = |name: &str, reason: &str| Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        };
        if !(inertia > 0.0 && inertia.is_finite()) {
            return Err(bad("inertia", "must be positive"));
        }
        if !(damping >= 0.0 && damping.is_finite()) {
            return Err(bad("damping", "must be non-negative"));
        }
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(bad("p_max", "must be positive"));
        }
        if !p_mech.is_finite() {
            return Err(bad("p_mech", "must be finite"));
        }
        Ok(Smib {
            inertia,
            damping,
            p_mech,
            p_max,
        })
    }

    /// Designated equilibrium `(asin(Pm / Pmax), 0)`.
    pub fn equilibrium(&self) -> Result<[f64; 2]> {
        if self.p_mech.abs() > self.p_max {
            return Err(Error::NoEquilibrium(format!(
                "Pm = {} exceeds Pmax = {}",
                self.p_mech, self.p_max
            )));
        }
        Ok([(self.p_mech / self.p_max).asin(), 0.0])
    }

    /// Unstable equilibrium `(pi - delta*, 0)` on the separatrix.
    pub fn saddle(&self) -> Result<[f64; 2]> {
        let [d, _] = self.equilibrium()?;
        Ok([std::f64::consts::PI - d, 0.0])
    }

    fn eval<S: Scalar>(&self, x: &[S], _v: &[S]) -> (Vec<S>, Vec<S>) {
        let l = |v: f64| x[0].lift(v);
        let acc = (l(self.p_mech) - l(self.p_max) * x[0].sin() - l(self.damping) * x[1].clone())
            / l(self.inertia);
        (vec![x[1].clone(), acc], Vec::new())
    }

    fn jac<S: Scalar>(&self, x: &[S], _v: &[S]) -> Jacobian<S> {
        let mut j = Jacobian::zeros(2, 0, &x[0]);
        let l = |v: f64| x[0].lift(v);
        j.fx.set(0, 1, l(1.0));
        j.fx.set(1, 0, -(l(self.p_max) * x[0].cos()) / l(self.inertia));
        j.fx.set(1, 1, l(-self.damping / self.inertia));
        j
    }
}

impl DynamicalModel for Smib {
    fn name(&self) -> &str {
        "smib"
    }

    fn state_names(&self) -> Vec<String> {
        vec!["delta".into(), "omega".into()]
    }

    scalar_dispatch!();

    fn dt_aux_names(&self) -> Vec<String> {
        vec!["sin_delta".into(), "cos_delta".into()]
    }

    fn dt_aux_init(&self, x0: &[HPReal], _v0: &[HPReal]) -> Vec<HPReal> {
        vec![x0[0].sin(), x0[0].cos()]
    }

    fn dt_aux(&self, t: &CoefficientTable, k: usize) -> Vec<HPReal> {
        let (s, c) = sin_cos_step(t.xs(0), t.auxs(0), t.auxs(1), k);
        vec![s, c]
    }

    fn dt_f(&self, t: &CoefficientTable, k: usize) -> Vec<HPReal> {
        let prec = t.precision();
        let omega = &t.xs(1)[k];
        let mut torque = -(&HPReal::from_f64(self.p_max, prec) * &t.auxs(0)[k])
            - &HPReal::from_f64(self.damping, prec) * omega;
        if k == 0 {
            torque += &HPReal::from_f64(self.p_mech, prec);
        }
        vec![omega.clone(), torque / HPReal::from_f64(self.inertia, prec)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{find_sep, lift, testutil::check_jacobian};
    use crate::precision::Precision;

    #[test]
    fn zero_power_rest_is_equilibrium() {
        let m = Smib::new(0.1, 0.05, 0.0, 2.0).unwrap();
        let (f, _) = m.residuals_f64(&[0.0, 0.0], &[]);
        assert_eq!(f, vec![0.0, 0.0]);
    }

    #[test]
    fn equilibrium_is_pi_over_six() {
        let m = Smib::new(0.1, 0.05, 1.0, 2.0).unwrap();
        let [d, w] = m.equilibrium().unwrap();
        assert!((d - std::f64::consts::FRAC_PI_6).abs() < 1e-15);
        assert_eq!(w, 0.0);
        let prec = Precision::digits(40);
        let sep = find_sep(&m, &lift(&[0.4, 0.1], prec), &[], prec).unwrap();
        let pi6 = HPReal::pi(prec) / HPReal::from_i64(6, prec);
        assert!((&sep.x_star[0] - &pi6).abs() <= prec.tolerance(20));
        assert!(sep.x_star[1].abs() <= prec.tolerance(20));
    }

    #[test]
    fn overloaded_machine_has_no_equilibrium() {
        let m = Smib::new(0.1, 0.05, 3.0, 2.0).unwrap();
        assert!(matches!(m.equilibrium(), Err(Error::NoEquilibrium(_))));
        assert!(Smib::new(0.0, 0.05, 1.0, 2.0).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = Smib::new(0.1, 0.05, 1.0, 2.0).unwrap();
        for p in [[0.5, 0.0], [2.0, -3.0], [-1.0, 7.5]] {
            check_jacobian(&m, &p, &[]);
        }
    }
}
