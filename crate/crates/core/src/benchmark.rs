//! Fixed-step RK4 reference integrator and the ground-truth verdicts derived
//! from its trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{AlgebraicSolver, DynamicalModel};
use crate::timewarp::TimeContractionMap;

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_BLOWUP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    Blowup,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub algebraics: Vec<Vec<f64>>,
    pub terminated: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectories hold the initial sample")
    }

    /// State at time `t` by cubic Lagrange interpolation over the four
    /// nearest samples.
    pub fn state_at(&self, t: f64) -> Option<Vec<f64>> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        if n < 4 {
            let i = self.times.partition_point(|&s| s < t).min(n - 1);
            return Some(self.states[i].clone());
        }
        let i = self.times.partition_point(|&s| s < t);
        let start = i.saturating_sub(2).min(n - 4);
        let idx = start..start + 4;
        let mut out = vec![0.0; self.states[0].len()];
        for a in idx.clone() {
            let mut w = 1.0;
            for b in idx.clone() {
                if a != b {
                    w *= (t - self.times[b]) / (self.times[a] - self.times[b]);
                }
            }
            for (o, s) in out.iter_mut().zip(&self.states[a]) {
                *o += w * s;
            }
        }
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rk4Options {
    pub dt: f64,
    pub horizon: f64,
    pub blowup: f64,
    /// Keep every `record_every`-th step (the final step is always kept).
    pub record_every: usize,
}

impl Rk4Options {
    pub fn new(horizon: f64) -> Self {
        Rk4Options {
            dt: DEFAULT_DT,
            horizon,
            blowup: DEFAULT_BLOWUP,
            record_every: 10,
        }
    }
}

struct Stepper<'a> {
    model: &'a dyn DynamicalModel,
    solver: &'a mut AlgebraicSolver,
}

impl Stepper<'_> {
    fn rate(&mut self, x: &[f64], v: &mut Vec<f64>) -> Result<Vec<f64>> {
        self.solver.solve(self.model, x, v)?;
        Ok(self.model.residuals_f64(x, v).0)
    }

    /// One classic RK4 step; `v` enters as the algebraic state at `x` and
    /// leaves solved at the new state.
    fn step(&mut self, x: &[f64], v: &mut Vec<f64>, h: f64) -> Result<Vec<f64>> {
        let axpy = |a: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(xi, ki)| xi + a * ki).collect() };
        let k1 = self.rate(x, v)?;
        let mut vs = v.clone();
        let k2 = self.rate(&axpy(0.5 * h, &k1), &mut vs)?;
        let k3 = self.rate(&axpy(0.5 * h, &k2), &mut vs)?;
        let k4 = self.rate(&axpy(h, &k3), &mut vs)?;
        let next: Vec<f64> = (0..x.len())
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        *v = vs;
        self.solver.solve(self.model, &next, v)?;
        Ok(next)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt".into(),
            reason: format!("must be positive, got {dt}"),
        });
    }
    Ok(())
}

/// Integrates `x' = f(x, v(x))` from `(x0, v0)` with RK4, solving `g = 0`
/// for `v` at every stage, until `horizon` or until `|x|` exceeds `blowup`.
pub fn rk4_integrate(
    model: &dyn DynamicalModel,
    x0: &[f64],
    v0: &[f64],
    opts: &Rk4Options,
) -> Result<Trajectory> {
    check_dt(opts.dt)?;
    if !(opts.horizon >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "horizon".into(),
            reason: "must be non-negative".into(),
        });
    }
    let mut solver = AlgebraicSolver::new(1e-12);
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    solver.solve(model, &x, &mut v)?;
    let steps = (opts.horizon / opts.dt).round() as usize;
    let stride = opts.record_every.max(1);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x.clone()],
        algebraics: vec![v.clone()],
        terminated: Termination::Horizon,
    };
    let mut stepper = Stepper {
        model,
        solver: &mut solver,
    };
    for n in 1..=steps {
        x = stepper.step(&x, &mut v, opts.dt)?;
        let t = n as f64 * opts.dt;
        let size = x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let blown = !(size <= opts.blowup);
        if n % stride == 0 || n == steps || blown {
            traj.times.push(t);
            traj.states.push(x.clone());
            traj.algebraics.push(v.clone());
        }
        if blown {
            traj.terminated = Termination::Blowup;
            break;
        }
    }
    Ok(traj)
}

/// `steps` RK4 steps of size `h`, returning only the end point.
pub fn rk4_fixed(
    model: &dyn DynamicalModel,
    x0: &[f64],
    v0: &[f64],
    h: f64,
    steps: usize,
    solver: &mut AlgebraicSolver,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dt(h.abs())?;
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    let mut stepper = Stepper { model, solver };
    for n in 1..=steps {
        x = stepper.step(&x, &mut v, h)?;
        if x.iter().any(|c| !(c.abs() <= DEFAULT_BLOWUP)) {
            return Err(Error::Blowup(n as f64 * h));
        }
    }
    Ok((x, v))
}

/// States at the given times (ascending, may be negative for backward
/// integration), each reached with steps no longer than `dt`.
pub fn rk4_sample(
    model: &dyn DynamicalModel,
    x0: &[f64],
    v0: &[f64],
    times: &[f64],
    dt: f64,
) -> Result<Vec<Vec<f64>>> {
    check_dt(dt)?;
    let mut solver = AlgebraicSolver::new(1e-13);
    let mut out = vec![Vec::new(); times.len()];
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].abs().total_cmp(&times[b].abs()));
    for sign in [1.0, -1.0] {
        let (mut x, mut v) = (x0.to_vec(), v0.to_vec());
        let mut t = 0.0f64;
        for &i in order.iter().filter(|&&i| times[i] * sign >= 0.0) {
            let target = times[i];
            let span = target - t;
            if span != 0.0 {
                let steps = (span.abs() / dt).ceil() as usize;
                let (nx, nv) = rk4_fixed(model, &x, &v, span / steps as f64, steps, &mut solver)?;
                x = nx;
                v = nv;
                t = target;
            }
            out[i] = x.clone();
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleVerdict {
    Stable,
    UnstableDivergent,
    UnstableOtherSep,
    Inconclusive,
}

impl OracleVerdict {
    pub fn is_stable(self) -> bool {
        self == OracleVerdict::Stable
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Distance to `x*` that counts as converged.
    pub conv_tol: f64,
    /// Trailing fraction of the run examined.
    pub horizon_fraction: f64,
    /// Distance from `x*` beyond which a steadily receding state counts as
    /// divergent even without blow-up.
    pub escape_distance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            conv_tol: 1e-4,
            horizon_fraction: 0.1,
            escape_distance: 50.0,
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Classifies a reference trajectory against the designated equilibrium.
pub fn truth_classify(traj: &Trajectory, x_star: &[f64], settings: &OracleSettings) -> OracleVerdict {
    if traj.terminated == Termination::Blowup {
        return OracleVerdict::UnstableDivergent;
    }
    let t_end = *traj.times.last().expect("non-empty trajectory");
    let t_from = t_end * (1.0 - settings.horizon_fraction);
    let start = traj.times.partition_point(|&t| t < t_from);
    let tail = &traj.states[start..];
    let dists: Vec<f64> = tail.iter().map(|x| distance(x, x_star)).collect();
    if dists.iter().all(|&d| d <= settings.conv_tol) {
        return OracleVerdict::Stable;
    }
    let last = traj.final_state();
    let spread = tail.iter().map(|x| distance(x, last)).fold(0.0, f64::max);
    if spread <= settings.conv_tol {
        return OracleVerdict::UnstableOtherSep;
    }
    let receding = dists.windows(2).all(|w| w[1] >= w[0]);
    if receding && dists[0] > settings.escape_distance {
        return OracleVerdict::UnstableDivergent;
    }
    OracleVerdict::Inconclusive
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSample {
    pub t: f64,
    pub tau: f64,
    /// `None` where the state coincides with `x*`.
    pub h: Option<f64>,
}

/// `(t, tau, h)` for every recorded sample of the trajectory.
pub fn indicator_along_trajectory(
    traj: &Trajectory,
    x_star: &[f64],
    map: &TimeContractionMap,
) -> Result<Vec<IndicatorSample>> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, x)| {
            let d = distance(x, x_star).powi(2);
            Ok(IndicatorSample {
                t,
                tau: map.map_time(t)?,
                h: (d > 0.0).then(|| -1.0 / d),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Jacobian, Lorenz};
    use crate::dtengine::CoefficientTable;
    use crate::precision::{HPReal, Scalar};

    /// `x' = -x`.
    struct Decay;

    impl DynamicalModel for Decay {
        fn name(&self) -> &str {
            "decay"
        }
        fn state_names(&self) -> Vec<String> {
            vec!["x".into()]
        }
        fn residuals_f64(&self, x: &[f64], _v: &[f64]) -> (Vec<f64>, Vec<f64>) {
            (vec![-x[0]], Vec::new())
        }
        fn residuals_hp(&self, x: &[HPReal], _v: &[HPReal]) -> (Vec<HPReal>, Vec<HPReal>) {
            (vec![-&x[0]], Vec::new())
        }
        fn jacobian_f64(&self, x: &[f64], v: &[f64]) -> Jacobian<f64> {
            let mut j = Jacobian::zeros(1, 0, &x[0]);
            j.fx.set(0, 0, -1.0);
            let _ = v;
            j
        }
        fn jacobian_hp(&self, x: &[HPReal], _v: &[HPReal]) -> Jacobian<HPReal> {
            let mut j = Jacobian::zeros(1, 0, &x[0]);
            j.fx.set(0, 0, x[0].lift(-1.0));
            j
        }
        fn dt_f(&self, t: &CoefficientTable, k: usize) -> Vec<HPReal> {
            vec![-&t.xs(0)[k]]
        }
    }

    #[test]
    fn decay_reaches_inverse_e() {
        let traj = rk4_integrate(&Decay, &[1.0], &[], &Rk4Options::new(1.0)).unwrap();
        let x1 = traj.final_state()[0];
        assert!((x1 - (-1f64).exp()).abs() < 1e-11);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        assert_eq!(traj.terminated, Termination::Horizon);
    }

    #[test]
    fn halving_the_step_divides_error_by_sixteen() {
        let err = |dt: f64| {
            let opts = Rk4Options { dt, ..Rk4Options::new(1.0) };
            let traj = rk4_integrate(&Decay, &[1.0], &[], &opts).unwrap();
            (traj.final_state()[0] - (-1f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn equilibrium_stays_put() {
        let m = Lorenz::stable();
        let traj = rk4_integrate(&m, &[1.0, 1.0, 1.0], &[], &Rk4Options::new(2.0)).unwrap();
        assert!(traj.states.iter().all(|x| x == &vec![1.0, 1.0, 1.0]));
    }

    #[test]
    fn chaotic_lorenz_is_bounded_and_unsettled() {
        let traj = rk4_integrate(&Lorenz::chaotic(), &[1.0, 0.0, 0.0], &[], &Rk4Options::new(20.0)).unwrap();
        assert_eq!(traj.terminated, Termination::Horizon);
        assert!(traj.states.iter().all(|x| x.iter().all(|c| c.abs() < 100.0)));
        let (a, b) = Lorenz::chaotic().twin_equilibria().unwrap();
        for sep in [a, b] {
            let v = truth_classify(&traj, &sep, &OracleSettings::default());
            assert_eq!(v, OracleVerdict::Inconclusive);
        }
    }

    #[test]
    fn blowup_is_divergent() {
        struct Growth;
        impl DynamicalModel for Growth {
            fn name(&self) -> &str {
                "growth"
            }
            fn state_names(&self) -> Vec<String> {
                vec!["x".into()]
            }
            fn residuals_f64(&self, x: &[f64], _v: &[f64]) -> (Vec<f64>, Vec<f64>) {
                (vec![x[0] * x[0]], Vec::new())
            }
            fn residuals_hp(&self, x: &[HPReal], _v: &[HPReal]) -> (Vec<HPReal>, Vec<HPReal>) {
                (vec![&x[0] * &x[0]], Vec::new())
            }
            fn jacobian_f64(&self, x: &[f64], _v: &[f64]) -> Jacobian<f64> {
                let mut j = Jacobian::zeros(1, 0, &x[0]);
                j.fx.set(0, 0, 2.0 * x[0]);
                j
            }
            fn jacobian_hp(&self, x: &[HPReal], _v: &[HPReal]) -> Jacobian<HPReal> {
                let mut j = Jacobian::zeros(1, 0, &x[0]);
                j.fx.set(0, 0, &x[0] + &x[0]);
                j
            }
            fn dt_f(&self, t: &CoefficientTable, k: usize) -> Vec<HPReal> {
                vec![crate::dtengine::primitives::convolve(t.xs(0), t.xs(0), k)]
            }
        }
        let traj = rk4_integrate(&Growth, &[1.0], &[], &Rk4Options::new(2.0)).unwrap();
        assert_eq!(traj.terminated, Termination::Blowup);
        assert_eq!(truth_classify(&traj, &[0.0], &OracleSettings::default()), OracleVerdict::UnstableDivergent);
    }

    #[test]
    fn lorenz_stable_converges_and_twin_is_other_sep() {
        let m = Lorenz::stable();
        let opts = Rk4Options::new(30.0);
        let settings = OracleSettings::default();
        let traj = rk4_integrate(&m, &[2.0, 0.5, 2.0], &[], &opts).unwrap();
        assert_eq!(truth_classify(&traj, &[1.0, 1.0, 1.0], &settings), OracleVerdict::Stable);
        let traj = rk4_integrate(&m, &[-2.0, -0.5, 2.0], &[], &opts).unwrap();
        assert_eq!(truth_classify(&traj, &[1.0, 1.0, 1.0], &settings), OracleVerdict::UnstableOtherSep);
        let h = indicator_along_trajectory(&traj, &[1.0, 1.0, 1.0], &TimeContractionMap::new(1.0, 3).unwrap()).unwrap();
        assert_eq!(h[0].tau, 0.0);
        assert_eq!(h[0].h, Some(-1.0 / (9.0 + 2.25 + 1.0)));
        assert!((h.last().unwrap().h.unwrap() + 1.0 / 8.0).abs() < 1e-6);
    }

    #[test]
    fn stable_verdict_implies_deep_indicator() {
        let m = Lorenz::stable();
        let traj = rk4_integrate(&m, &[2.0, 0.5, 2.0], &[], &Rk4Options::new(30.0)).unwrap();
        let settings = OracleSettings::default();
        assert!(truth_classify(&traj, &[1.0, 1.0, 1.0], &settings).is_stable());
        let samples = indicator_along_trajectory(&traj, &[1.0, 1.0, 1.0], &TimeContractionMap::new(1.0, 3).unwrap()).unwrap();
        let last = samples.last().unwrap().h.unwrap();
        assert!(last < -1.0 / (settings.conv_tol * settings.conv_tol));
    }

    #[test]
    fn backward_and_forward_sampling() {
        let xs = rk4_sample(&Decay, &[1.0], &[], &[-0.5, 0.0, 0.25, 1.0], 1e-3).unwrap();
        for (x, t) in xs.iter().zip([-0.5f64, 0.0, 0.25, 1.0]) {
            assert!((x[0] - (-t).exp()).abs() < 1e-12);
        }
    }
}
