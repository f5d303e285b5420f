use serde::{Deserialize, Serialize};

use super::{scalar_dispatch, DynamicalModel, Jacobian};
use crate::dtengine::{primitives::convolve, CoefficientTable};
use crate::error::{Error, Result};
use crate::precision::{HPReal, Scalar};

/// `x' = sigma (y - x)`, `y' = x (rho - z) - y`, `z' = x y - beta z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lorenz {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Lorenz {
    pub fn new(sigma: f64, rho: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("rho", rho), ("beta", beta)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(Lorenz { sigma, rho, beta })
    }

    /// `sigma = 1, rho = 2, beta = 1`: every trajectory off the stable
    /// manifold of the origin settles on one of two equilibria.
    pub fn stable() -> Self {
        Lorenz::new(1.0, 2.0, 1.0).expect("finite")
    }

    pub fn chaotic() -> Self {
        Lorenz::new(10.0, 28.0, 8.0 / 3.0).expect("finite")
    }

    /// The two symmetric equilibria `(+-a, +-a, rho - 1)`, `a = sqrt(beta (rho - 1))`
    /// (only real when `rho > 1`).
    pub fn twin_equilibria(&self) -> Option<([f64; 3], [f64; 3])> {
        if self.rho <= 1.0 || self.beta <= 0.0 {
            return None;
        }
        let a = (self.beta * (self.rho - 1.0)).sqrt();
        Some(([a, a, self.rho - 1.0], [-a, -a, self.rho - 1.0]))
    }

    fn eval<S: Scalar>(&self, x: &[S], _v: &[S]) -> (Vec<S>, Vec<S>) {
        let (a, b, c) = (x[0].clone(), x[1].clone(), x[2].clone());
        let sigma = a.lift(self.sigma);
        let rho = a.lift(self.rho);
        let beta = a.lift(self.beta);
        (
            vec![
                sigma * (b.clone() - a.clone()),
                a.clone() * (rho - c.clone()) - b.clone(),
                a * b - beta * c,
            ],
            Vec::new(),
        )
    }

    fn jac<S: Scalar>(&self, x: &[S], _v: &[S]) -> Jacobian<S> {
        let mut j = Jacobian::zeros(3, 0, &x[0]);
        let l = |v: f64| x[0].lift(v);
        j.fx.set(0, 0, l(-self.sigma));
        j.fx.set(0, 1, l(self.sigma));
        j.fx.set(1, 0, l(self.rho) - x[2].clone());
        j.fx.set(1, 1, l(-1.0));
        j.fx.set(1, 2, -x[0].clone());
        j.fx.set(2, 0, x[1].clone());
        j.fx.set(2, 1, x[0].clone());
        j.fx.set(2, 2, l(-self.beta));
        j
    }
}

impl DynamicalModel for Lorenz {
    fn name(&self) -> &str {
        "lorenz"
    }

    fn state_names(&self) -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    scalar_dispatch!();

    fn dt_f(&self, t: &CoefficientTable, k: usize) -> Vec<HPReal> {
        let prec = t.precision();
        let (x, y, z) = (t.xs(0), t.xs(1), t.xs(2));
        let sigma = HPReal::from_f64(self.sigma, prec);
        let rho = HPReal::from_f64(self.rho, prec);
        let beta = HPReal::from_f64(self.beta, prec);
        vec![
            &sigma * &(&y[k] - &x[k]),
            &(&rho * &x[k]) - &convolve(x, z, k) - &y[k],
            convolve(x, y, k) - &beta * &z[k],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{find_sep, lift, testutil::check_jacobian};
    use crate::precision::Precision;

    #[test]
    fn origin_is_equilibrium() {
        let (f, g) = Lorenz::chaotic().residuals_f64(&[0.0; 3], &[]);
        assert_eq!(f, vec![0.0; 3]);
        assert!(g.is_empty());
    }

    #[test]
    fn chaotic_twin_equilibria_vanish() {
        let l = Lorenz::chaotic();
        let (a, b) = l.twin_equilibria().unwrap();
        assert!((a[0] - 8.48528137423857).abs() < 1e-12);
        assert_eq!(a[2], 27.0);
        for p in [a, b] {
            let (f, _) = l.residuals_f64(&p, &[]);
            assert!(f.iter().all(|c| c.abs() < 1e-12), "{f:?}");
        }
    }

    #[test]
    fn stable_sep_from_guess() {
        let prec = Precision::digits(50);
        let l = Lorenz::stable();
        let sep = find_sep(&l, &lift(&[1.2, 0.8, 1.1], prec), &[], prec).unwrap();
        for c in &sep.x_star {
            assert!((c - &HPReal::one(prec)).abs() <= prec.tolerance(25));
        }
        assert!(!sep.guess_was_equilibrium);
        // Newton happily returns the repelling origin when started there
        let o = find_sep(&l, &lift(&[0.0; 3], prec), &[], prec).unwrap();
        assert!(o.guess_was_equilibrium);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let l = Lorenz::chaotic();
        for p in [[1.0, -2.0, 3.0], [0.3, 0.7, -5.0], [-8.0, 2.5, 20.0]] {
            check_jacobian(&l, &p, &[]);
        }
    }
}
