//! Taylor coefficients of the state trajectory in contracted time by
//! differential transformation, and of the stability indicator built on it.
//!
//! With `theta = dt/dtau`, the transformed system is `dx/dtau = theta f`,
//! `0 = g`. Its DT form is
//!
//! ```text
//! X(k+1) = (sum_{j<=k} Theta(j) F(k-j)) / (k+1)
//! Jv V(k+1) = -G(k+1)|_{V(k+1)=0}
//! ```
//!
//! where `F(k)`, `G(k)` are the order-`k` coefficients of `f` and `g`
//! supplied by the model from lower-order data. `G(k)` is affine in `V(k)`
//! with slope `dg/dv` at the initial point, so a single factorization serves
//! every order.

pub mod primitives;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::models::DynamicalModel;
use crate::precision::{HPReal, Precision, TaylorSeries};
use crate::timewarp::TimeContractionMap;

/// `d_0` below this means the initial state sits on the equilibrium.
pub const DEGENERATE_DISTANCE_SQ: f64 = 1e-20;

/// Per-variable coefficient series, all of one order and precision.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub x: Vec<TaylorSeries>,
    pub v: Vec<TaylorSeries>,
    pub aux: Vec<TaylorSeries>,
    pub aux_names: Vec<String>,
    prec: Precision,
}

impl CoefficientTable {
    pub fn new(x0: &[HPReal], v0: &[HPReal], aux0: Vec<HPReal>, aux_names: Vec<String>, prec: Precision) -> Self {
        let one = |c: &HPReal| TaylorSeries::new(vec![c.clone()], prec);
        CoefficientTable {
            x: x0.iter().map(one).collect(),
            v: v0.iter().map(one).collect(),
            aux: aux0.iter().map(one).collect(),
            aux_names,
            prec,
        }
    }

    pub fn order(&self) -> usize {
        self.x.first().map_or(0, TaylorSeries::order)
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Coefficients of state `i` (read by model DT hooks).
    pub fn xs(&self, i: usize) -> &[HPReal] {
        self.x[i].coeffs()
    }

    pub fn vs(&self, j: usize) -> &[HPReal] {
        self.v[j].coeffs()
    }

    pub fn auxs(&self, a: usize) -> &[HPReal] {
        self.aux[a].coeffs()
    }

    pub fn aux_by_name(&self, name: &str) -> Option<&TaylorSeries> {
        self.aux_names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.aux[i])
    }

    /// Row `k` as `(X(k), V(k))`.
    pub fn slice(&self, k: usize) -> (Vec<HPReal>, Vec<HPReal>) {
        (
            self.x.iter().map(|s| s.coeff(k).clone()).collect(),
            self.v.iter().map(|s| s.coeff(k).clone()).collect(),
        )
    }

    /// `x(tau)` from the truncated series.
    pub fn evaluate_state(&self, tau: &HPReal) -> Vec<HPReal> {
        self.x.iter().map(|s| s.evaluate(tau)).collect()
    }
}

fn max_abs(v: &[HPReal], prec: Precision) -> HPReal {
    let mut m = HPReal::zero(prec);
    for c in v {
        m = m.max(&c.abs());
    }
    m
}

/// Runs the DT recurrences from `(x0, v0)` up to `order`.
pub fn propagate_coefficients(
    model: &dyn DynamicalModel,
    map: &TimeContractionMap,
    x0: &[HPReal],
    v0: &[HPReal],
    order: usize,
    prec: Precision,
) -> Result<CoefficientTable> {
    let theta = map.theta_series(order, prec);
    propagate_with_theta(model, theta.coeffs(), x0, v0, order, prec)
}

/// Same as [`propagate_coefficients`] for the untransformed system
/// (`theta = 1`), which yields ordinary Taylor coefficients in `t`.
pub fn propagate_identity(
    model: &dyn DynamicalModel,
    x0: &[HPReal],
    v0: &[HPReal],
    order: usize,
    prec: Precision,
) -> Result<CoefficientTable> {
    let theta = TaylorSeries::unit(order, prec);
    propagate_with_theta(model, theta.coeffs(), x0, v0, order, prec)
}

fn propagate_with_theta(
    model: &dyn DynamicalModel,
    theta: &[HPReal],
    x0: &[HPReal],
    v0: &[HPReal],
    order: usize,
    prec: Precision,
) -> Result<CoefficientTable> {
    if order < 1 {
        return Err(Error::Precondition("propagation order must be at least 1".into()));
    }
    let n = model.state_dim();
    let m = model.algebraic_dim();
    if x0.len() != n || v0.len() != m {
        return Err(Error::Precondition(format!(
            "initial point has dimensions ({}, {}), model expects ({n}, {m})",
            x0.len(),
            v0.len()
        )));
    }
    let x0: Vec<HPReal> = x0.iter().map(|c| c.with_precision(prec)).collect();
    let v0: Vec<HPReal> = v0.iter().map(|c| c.with_precision(prec)).collect();
    let aux0 = model.dt_aux_init(&x0, &v0);
    let mut table = CoefficientTable::new(&x0, &v0, aux0, model.dt_aux_names(), prec);

    let lu = if m > 0 {
        let g0 = model.dt_g(&table, 0);
        let residual = max_abs(&g0, prec);
        let scale = max_abs(&v0, prec).max(&HPReal::one(prec));
        let consistency = HPReal::pow10(-(prec.decimal_digits() as i32) / 2, prec) * &scale;
        if residual > consistency {
            return Err(Error::InconsistentInitialCondition {
                residual: residual.to_f64(),
            });
        }
        let jv: Matrix<HPReal> = model.jacobian_hp(&x0, &v0).gv;
        Some(Lu::factor(&jv, &prec.tolerance(5), "algebraic Jacobian dg/dv")?)
    } else {
        None
    };

    let mut rhs: Vec<Vec<HPReal>> = vec![Vec::with_capacity(order); n];
    for k in 0..order {
        let fk = model.dt_f(&table, k);
        for (i, f) in fk.into_iter().enumerate() {
            rhs[i].push(f);
        }
        let inv = HPReal::from_i64(k as i64 + 1, prec).recip();
        for i in 0..n {
            let next = primitives::convolve(theta, &rhs[i], k) * &inv;
            table.x[i].push(next);
        }
        let aux = model.dt_aux(&table, k + 1);
        for (a, c) in aux.into_iter().enumerate() {
            table.aux[a].push(c);
        }
        if let Some(lu) = &lu {
            for s in table.v.iter_mut() {
                s.push(HPReal::zero(prec));
            }
            let g = model.dt_g(&table, k + 1);
            let dv = lu.solve(&g.iter().map(|c| -c).collect::<Vec<_>>());
            for (s, c) in table.v.iter_mut().zip(dv) {
                let mut coeffs = std::mem::replace(s, TaylorSeries::zero(0, prec)).into_coeffs();
                *coeffs.last_mut().expect("pushed above") = c;
                *s = TaylorSeries::new(coeffs, prec);
            }
        }
    }
    Ok(table)
}

/// Taylor series of `d = |x - x*|^2` and `h = -1/d`.
#[derive(Clone, Debug)]
pub struct IndicatorSeries {
    pub h: TaylorSeries,
    pub d: TaylorSeries,
    pub x_star: Vec<HPReal>,
}

impl IndicatorSeries {
    /// Largest deviation of `h * d` from `-1` (order 0) and `0` (higher).
    pub fn convolution_defect(&self) -> HPReal {
        let prec = self.h.precision();
        let order = self.h.order().min(self.d.order());
        let prod = self.h.mul(&self.d, order).expect("orders match");
        let mut worst = (prod.coeff(0) + &HPReal::one(prec)).abs();
        for c in &prod.coeffs()[1..] {
            worst = worst.max(&c.abs());
        }
        worst
    }
}

pub fn indicator_coefficients(
    table: &CoefficientTable,
    x_star: &[HPReal],
    order: usize,
) -> Result<IndicatorSeries> {
    let prec = table.precision();
    if table.order() < order {
        return Err(Error::InsufficientOrder {
            needed: order,
            got: table.order(),
        });
    }
    let offsets: Vec<Vec<HPReal>> = table
        .x
        .iter()
        .zip(x_star)
        .map(|(s, xs)| {
            let mut c: Vec<HPReal> = s.coeffs()[..=order].to_vec();
            c[0] = &c[0] - xs;
            c
        })
        .collect();
    let d: Vec<HPReal> = (0..=order)
        .map(|k| {
            let mut acc = HPReal::zero(prec);
            for e in &offsets {
                acc += &primitives::convolve(e, e, k);
            }
            acc
        })
        .collect();
    let d = TaylorSeries::new(d, prec);
    if d.coeff(0).to_f64() < DEGENERATE_DISTANCE_SQ {
        return Err(Error::AlreadyAtSep {
            distance_sq: d.coeff(0).to_f64(),
        });
    }
    let h = d.reciprocal(order)?.neg();
    Ok(IndicatorSeries {
        h,
        d,
        x_star: x_star.to_vec(),
    })
}
