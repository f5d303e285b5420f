//! System descriptions `x' = f(x, v)`, `0 = g(x, v)` for the test systems,
//! equilibrium solving and fault scenarios.

mod lorenz;
mod smib;
mod wscc;

pub use lorenz::Lorenz;
pub use smib::Smib;
pub use wscc::{
    post_fault_initial_state, solve_power_flow, BusData, BusKind, FaultScenario, LineData,
    LoadData, LoadModel, MachineData, NetworkData, NetworkState, PostFaultStart, PowerFlow, Wscc9,
    WsccOptions,
};

use crate::dtengine::CoefficientTable;
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Lu, Matrix};
use crate::precision::{HPReal, Precision, Scalar};

/// Partial derivatives of `f` and `g` with respect to `x` and `v`.
#[derive(Clone, Debug)]
pub struct Jacobian<S> {
    pub fx: Matrix<S>,
    pub fv: Matrix<S>,
    pub gx: Matrix<S>,
    pub gv: Matrix<S>,
}

impl<S: Scalar> Jacobian<S> {
    pub fn zeros(n: usize, m: usize, like: &S) -> Self {
        let z = like.zero_like();
        Jacobian {
            fx: Matrix::filled(n, n, z.clone()),
            fv: Matrix::filled(n, m, z.clone()),
            gx: Matrix::filled(m, n, z.clone()),
            gv: Matrix::filled(m, m, z),
        }
    }

    /// `[[fx, fv], [gx, gv]]`.
    pub fn stacked(&self) -> Matrix<S> {
        let n = self.fx.rows();
        let m = self.gv.rows();
        let z = self.fx.get(0, 0).zero_like();
        let mut out = Matrix::filled(n + m, n + m, z);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.fx.get(i, j).clone());
            }
            for j in 0..m {
                out.set(i, n + j, self.fv.get(i, j).clone());
            }
        }
        for i in 0..m {
            for j in 0..n {
                out.set(n + i, j, self.gx.get(i, j).clone());
            }
            for j in 0..m {
                out.set(n + i, n + j, self.gv.get(i, j).clone());
            }
        }
        out
    }
}

/// A semi-explicit DAE (an ODE when `algebraic_dim() == 0`).
///
/// Residuals and Jacobians come in an `f64` flavour for the reference
/// integrator and an [`HPReal`] flavour for equilibrium solves. The `dt_*`
/// hooks give the order-`k` Taylor coefficient of `f`, `g` and any auxiliary
/// series from the lower-order entries of a [`CoefficientTable`].
pub trait DynamicalModel: Send + Sync {
    fn name(&self) -> &str;
    fn state_names(&self) -> Vec<String>;
    fn algebraic_names(&self) -> Vec<String> {
        Vec::new()
    }

    fn state_dim(&self) -> usize {
        self.state_names().len()
    }

    fn algebraic_dim(&self) -> usize {
        self.algebraic_names().len()
    }

    fn residuals_f64(&self, x: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>);
    fn residuals_hp(&self, x: &[HPReal], v: &[HPReal]) -> (Vec<HPReal>, Vec<HPReal>);
    fn jacobian_f64(&self, x: &[f64], v: &[f64]) -> Jacobian<f64>;
    fn jacobian_hp(&self, x: &[HPReal], v: &[HPReal]) -> Jacobian<HPReal>;

    /// Names of the auxiliary series the DT recurrences carry.
    fn dt_aux_names(&self) -> Vec<String> {
        Vec::new()
    }

    /// Order-0 auxiliary values at `(x0, v0)`.
    fn dt_aux_init(&self, _x0: &[HPReal], _v0: &[HPReal]) -> Vec<HPReal> {
        Vec::new()
    }

    /// Order-`k` auxiliary coefficients; `X(0..=k)` is available.
    fn dt_aux(&self, _table: &CoefficientTable, _k: usize) -> Vec<HPReal> {
        Vec::new()
    }

    /// Order-`k` coefficient of `f(x(tau), v(tau))`.
    fn dt_f(&self, table: &CoefficientTable, k: usize) -> Vec<HPReal>;

    /// Order-`k` coefficient of `g(x(tau), v(tau))`.
    fn dt_g(&self, _table: &CoefficientTable, _k: usize) -> Vec<HPReal> {
        Vec::new()
    }
}

macro_rules! scalar_dispatch {
    () => {
        fn residuals_f64(&self, x: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
            self.eval(x, v)
        }
        fn residuals_hp(
            &self,
            x: &[$crate::precision::HPReal],
            v: &[$crate::precision::HPReal],
        ) -> (Vec<$crate::precision::HPReal>, Vec<$crate::precision::HPReal>) {
            self.eval(x, v)
        }
        fn jacobian_f64(&self, x: &[f64], v: &[f64]) -> $crate::models::Jacobian<f64> {
            self.jac(x, v)
        }
        fn jacobian_hp(
            &self,
            x: &[$crate::precision::HPReal],
            v: &[$crate::precision::HPReal],
        ) -> $crate::models::Jacobian<$crate::precision::HPReal> {
            self.jac(x, v)
        }
    };
}
pub(crate) use scalar_dispatch;

/// Equilibrium `f = 0, g = 0` found by Newton's method.
#[derive(Clone, Debug)]
pub struct EquilibriumPoint {
    pub x_star: Vec<HPReal>,
    pub v_star: Vec<HPReal>,
    pub residual_norm: HPReal,
    pub iterations: usize,
    /// The vector field already vanished at the guess. Newton returns such a
    /// point whether it attracts or repels, so the caller must supply the
    /// designated equilibrium.
    pub guess_was_equilibrium: bool,
}

pub const SEP_MAX_ITERATIONS: usize = 50;

fn stacked_residual<S: Scalar>(f: Vec<S>, g: Vec<S>) -> Vec<S> {
    f.into_iter().chain(g).collect()
}

/// Newton iteration on the stacked residual `[f; g] = 0`, to
/// `10^(-digits/2)` in the infinity norm.
pub fn find_sep(
    model: &dyn DynamicalModel,
    x_guess: &[HPReal],
    v_guess: &[HPReal],
    prec: Precision,
) -> Result<EquilibriumPoint> {
    let n = model.state_dim();
    let m = model.algebraic_dim();
    let tol = HPReal::pow10(-(prec.decimal_digits() as i32) / 2, prec);
    let lu_tol = prec.tolerance(5);
    let mut x: Vec<HPReal> = x_guess.iter().map(|c| c.with_precision(prec)).collect();
    let mut v: Vec<HPReal> = v_guess.iter().map(|c| c.with_precision(prec)).collect();
    let (f0, g0) = model.residuals_hp(&x, &v);
    let initial = stacked_residual(f0, g0);
    let guess_was_equilibrium = norm_inf(&initial) == 0.0;
    let mut r = initial;
    for it in 0..=SEP_MAX_ITERATIONS {
        let norm = inf_norm_hp(&r, prec);
        if norm <= tol {
            return Ok(EquilibriumPoint {
                x_star: x,
                v_star: v,
                residual_norm: norm,
                iterations: it,
                guess_was_equilibrium,
            });
        }
        if it == SEP_MAX_ITERATIONS {
            break;
        }
        let jac = model.jacobian_hp(&x, &v).stacked();
        let lu = Lu::factor(&jac, &lu_tol, "equilibrium Jacobian")?;
        let rhs: Vec<HPReal> = r.iter().map(|c| -c).collect();
        let dz = lu.solve(&rhs);
        for i in 0..n {
            x[i] = &x[i] + &dz[i];
        }
        for j in 0..m {
            v[j] = &v[j] + &dz[n + j];
        }
        let (f, g) = model.residuals_hp(&x, &v);
        r = stacked_residual(f, g);
    }
    Err(Error::NewtonNonConvergence {
        iterations: SEP_MAX_ITERATIONS,
        residual: norm_inf(&r),
    })
}

fn inf_norm_hp(v: &[HPReal], prec: Precision) -> HPReal {
    let mut m = HPReal::zero(prec);
    for c in v {
        m = m.max(&c.abs());
    }
    m
}

/// Solves `g(x, v) = 0` for `v` with `x` held fixed, in high precision.
pub fn solve_algebraic_hp(
    model: &dyn DynamicalModel,
    x: &[HPReal],
    v_guess: &[HPReal],
    prec: Precision,
) -> Result<Vec<HPReal>> {
    if model.algebraic_dim() == 0 {
        return Ok(Vec::new());
    }
    let tol = prec.tolerance(5);
    let mut v: Vec<HPReal> = v_guess.iter().map(|c| c.with_precision(prec)).collect();
    for _ in 0..SEP_MAX_ITERATIONS {
        let (_, g) = model.residuals_hp(x, &v);
        let scale = inf_norm_hp(&v, prec).max(&HPReal::one(prec));
        if inf_norm_hp(&g, prec) <= &tol * &scale {
            return Ok(v);
        }
        let jac = model.jacobian_hp(x, &v);
        let lu = Lu::factor(&jac.gv, &tol, "algebraic Jacobian")?;
        let dv = lu.solve(&g.iter().map(|c| -c).collect::<Vec<_>>());
        for (vi, d) in v.iter_mut().zip(dv) {
            *vi = &*vi + &d;
        }
    }
    let (_, g) = model.residuals_hp(x, &v);
    Err(Error::NewtonNonConvergence {
        iterations: SEP_MAX_ITERATIONS,
        residual: norm_inf(&g),
    })
}

/// Chord-Newton solver for `g(x, v) = 0` in `f64`, reusing one factorization
/// of `dg/dv` until it stops contracting.
pub struct AlgebraicSolver {
    lu: Option<Lu<f64>>,
    pub tol: f64,
}

impl AlgebraicSolver {
    pub fn new(tol: f64) -> Self {
        AlgebraicSolver { lu: None, tol }
    }

    pub fn solve(&mut self, model: &dyn DynamicalModel, x: &[f64], v: &mut [f64]) -> Result<()> {
        if v.is_empty() {
            return Ok(());
        }
        let mut last = f64::INFINITY;
        for _ in 0..SEP_MAX_ITERATIONS {
            let (_, g) = model.residuals_f64(x, v);
            let norm = norm_inf(&g);
            if norm <= self.tol {
                return Ok(());
            }
            if self.lu.is_none() || norm > 0.5 * last {
                let jac = model.jacobian_f64(x, v);
                self.lu = Some(Lu::factor(&jac.gv, &1e-14, "algebraic Jacobian")?);
            }
            last = norm;
            let dv = self
                .lu
                .as_ref()
                .expect("factored above")
                .solve(&g.iter().map(|c| -c).collect::<Vec<_>>());
            for (vi, d) in v.iter_mut().zip(dv) {
                *vi += d;
            }
        }
        let (_, g) = model.residuals_f64(x, v);
        Err(Error::NewtonNonConvergence {
            iterations: SEP_MAX_ITERATIONS,
            residual: norm_inf(&g),
        })
    }
}

/// `x`, `v` lifted to high precision.
pub fn lift(values: &[f64], prec: Precision) -> Vec<HPReal> {
    values.iter().map(|c| HPReal::from_f64(*c, prec)).collect()
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Checks analytic Jacobians against central differences of the
    /// residuals, both evaluated at 34 digits.
    pub fn check_jacobian(model: &dyn DynamicalModel, x: &[f64], v: &[f64]) {
        let prec = Precision::digits(34);
        let xs = lift(x, prec);
        let vs = lift(v, prec);
        let jac = model.jacobian_hp(&xs, &vs);
        let h = HPReal::parse("1e-12", prec).unwrap();
        let two_h = &h * &HPReal::from_i64(2, prec);
        let n = x.len();
        let m = v.len();
        for col in 0..n + m {
            let mut xp = xs.clone();
            let mut vp = vs.clone();
            let mut xm = xs.clone();
            let mut vm = vs.clone();
            if col < n {
                xp[col] = &xp[col] + &h;
                xm[col] = &xm[col] - &h;
            } else {
                vp[col - n] = &vp[col - n] + &h;
                vm[col - n] = &vm[col - n] - &h;
            }
            let (fp, gp) = model.residuals_hp(&xp, &vp);
            let (fm, gm) = model.residuals_hp(&xm, &vm);
            let fd: Vec<HPReal> = fp
                .iter()
                .chain(&gp)
                .zip(fm.iter().chain(&gm))
                .map(|(a, b)| (a - b) / &two_h)
                .collect();
            let stacked = jac.stacked();
            for (row, d) in fd.iter().enumerate() {
                let a = stacked.get(row, col).to_f64();
                let d = d.to_f64();
                let scale = a.abs().max(d.abs()).max(1.0);
                assert!(
                    (a - d).abs() <= 1e-6 * scale,
                    "{}: d(row {row})/d(col {col}) analytic {a} vs fd {d}",
                    model.name()
                );
            }
        }
    }
}
