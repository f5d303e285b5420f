//! The assessment pipeline: equilibrium, coefficient propagation, Padé pole
//! search and the horizon test, plus comparison against the RK4 oracle.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benchmark::{rk4_integrate, truth_classify, OracleSettings, OracleVerdict, Rk4Options, Trajectory};
use crate::dtengine::{indicator_coefficients, propagate_coefficients, CoefficientTable, IndicatorSeries};
use crate::error::{Error, Result};
use crate::models::{
    find_sep, lift, post_fault_initial_state, solve_algebraic_hp, AlgebraicSolver, DynamicalModel, EquilibriumPoint,
    FaultScenario, LoadModel, Lorenz, NetworkData, NetworkState, Smib, Wscc9, WsccOptions,
};
use crate::pade::{build_pade, smallest_positive_real_root, PadeApproximant, PoleFilter, RootReport};
use crate::precision::{HPReal, Precision};
use crate::timewarp::TimeContractionMap;

pub const SCENARIO_SCHEMA: &str = "polewarp.scenario/1";

/// Default largest `L + M` a configuration may request.
pub const DEFAULT_MAX_ORDER: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Lorenz(Lorenz),
    Smib(Smib),
    Wscc9 {
        /// Network data file; the bundled system when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        network: Option<PathBuf>,
        #[serde(default)]
        load_model: LoadModel,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Explicit {
        x: Vec<f64>,
        /// Algebraic guess; solved from the states when empty.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        v: Vec<f64>,
    },
    Fault(FaultScenario),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadeOrder {
    #[serde(rename = "L")]
    pub num: usize,
    #[serde(rename = "M")]
    pub den: usize,
}

/// Optional overrides of [`PoleFilter`] fields.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doublet_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doublet_residue: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub require_negative_branch: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conv_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape_distance: Option<f64>,
}

/// One assessment job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub model: ModelSpec,
    pub initial: InitialCondition,
    /// Guess for the designated equilibrium's states; model default if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sep_guess: Option<Vec<f64>>,
    pub mapping: TimeContractionMap,
    pub order: PadeOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    #[serde(default)]
    pub filter: FilterOverrides,
    #[serde(default)]
    pub oracle: OracleConfig,
}

fn default_max_order() -> usize {
    DEFAULT_MAX_ORDER
}

impl ScenarioConfig {
    pub fn new(name: &str, model: ModelSpec, initial: InitialCondition, mapping: TimeContractionMap, order: usize) -> Self {
        ScenarioConfig {
            schema: SCENARIO_SCHEMA.into(),
            name: name.into(),
            model,
            initial,
            sep_guess: None,
            mapping,
            order: PadeOrder { num: order, den: order },
            digits: None,
            epsilon: None,
            max_order: DEFAULT_MAX_ORDER,
            filter: FilterOverrides::default(),
            oracle: OracleConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::config("<config>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a configuration file; relative data paths inside it are taken
    /// relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let ModelSpec::Wscc9 { network: Some(p), .. } = &mut cfg.model {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(Error::config("schema", format!("expected \"{SCENARIO_SCHEMA}\", got \"{}\"", self.schema)));
        }
        self.mapping.validate()?;
        if self.order.num + self.order.den + 1 > self.max_order {
            return Err(Error::config(
                "order",
                format!("L + M + 1 = {} exceeds max_order {}", self.order.num + self.order.den + 1, self.max_order),
            ));
        }
        if self.order.den == 0 {
            return Err(Error::config("order.M", "the denominator degree must be at least 1"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < self.mapping.horizon) {
                return Err(Error::config("epsilon", "must lie in (0, M)"));
            }
        }
        if let Some(d) = self.digits {
            if d < 16 {
                return Err(Error::config("digits", "at least 16 digits are required"));
            }
        }
        if let InitialCondition::Fault(f) = &self.initial {
            f.validate()?;
            if !matches!(self.model, ModelSpec::Wscc9 { .. }) {
                return Err(Error::config("initial", "fault scenarios need a network model"));
            }
        }
        Ok(())
    }

    pub fn precision(&self) -> Precision {
        self.digits
            .map(Precision::digits)
            .unwrap_or_else(|| Precision::for_order(self.order.num, self.order.den))
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(0.01 * self.mapping.horizon)
    }

    pub fn pole_filter(&self) -> PoleFilter {
        let mut f = PoleFilter::defaults(self.mapping.horizon, self.precision());
        f.require_negative_branch = true;
        f.doublet_residue = DEFAULT_DOUBLET_RESIDUE;
        let o = &self.filter;
        f.imag_tol = o.imag_tol.unwrap_or(f.imag_tol);
        f.pos_tol = o.pos_tol.unwrap_or(f.pos_tol);
        f.doublet_distance = o.doublet_distance.unwrap_or(f.doublet_distance);
        f.doublet_residue = o.doublet_residue.unwrap_or(f.doublet_residue);
        f.require_negative_branch = o.require_negative_branch.unwrap_or(f.require_negative_branch);
        f
    }

    pub fn oracle_settings(&self) -> (Rk4Options, OracleSettings) {
        let horizon = match self.model {
            ModelSpec::Lorenz(_) => 30.0,
            ModelSpec::Smib(_) => 10.0,
            ModelSpec::Wscc9 { .. } => 10.0,
        };
        let mut rk = Rk4Options::new(self.oracle.horizon.unwrap_or(horizon));
        if let Some(dt) = self.oracle.dt {
            rk.dt = dt;
        }
        let mut s = OracleSettings::default();
        s.conv_tol = self.oracle.conv_tol.unwrap_or(s.conv_tol);
        s.horizon_fraction = self.oracle.horizon_fraction.unwrap_or(s.horizon_fraction);
        s.escape_distance = self.oracle.escape_distance.unwrap_or(s.escape_distance);
        (rk, s)
    }

    /// Copy with a different fault clearing time.
    pub fn with_clearing_time(&self, fct: f64) -> Result<Self> {
        let mut cfg = self.clone();
        match &mut cfg.initial {
            InitialCondition::Fault(f) => f.clearing_time = fct,
            InitialCondition::Explicit { .. } => {
                return Err(Error::config("initial", "clearing-time sweeps need a fault scenario"))
            }
        }
        Ok(cfg)
    }
}

/// Residues below this fraction of `|h_0|` mark spurious poles.
pub const DEFAULT_DOUBLET_RESIDUE: f64 = 1e-2;

/// A model instance with its starting point and designated-equilibrium guess.
pub struct PreparedScenario {
    pub model: Box<dyn DynamicalModel>,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    pub sep_guess: (Vec<f64>, Vec<f64>),
}

fn network_data(network: &Option<PathBuf>) -> Result<NetworkData> {
    match network {
        None => Ok(NetworkData::wscc9()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::config("model.network", format!("{}: {e}", p.display())))?;
            NetworkData::from_json(&text)
        }
    }
}

pub fn prepare(cfg: &ScenarioConfig) -> Result<PreparedScenario> {
    cfg.validate()?;
    let check_dim = |x: &[f64], n: usize| {
        if x.len() != n {
            Err(Error::config("initial.x", format!("expected {n} states, got {}", x.len())))
        } else {
            Ok(())
        }
    };
    let prepared = match &cfg.model {
        ModelSpec::Lorenz(m) => {
            let m = Lorenz::new(m.sigma, m.rho, m.beta)?;
            let guess = m.twin_equilibria().map_or(vec![0.0; 3], |(a, _)| a.to_vec());
            let InitialCondition::Explicit { x, .. } = &cfg.initial else {
                return Err(Error::config("initial", "Lorenz needs an explicit initial state"));
            };
            check_dim(x, 3)?;
            PreparedScenario {
                model: Box::new(m),
                x0: x.clone(),
                v0: Vec::new(),
                sep_guess: (guess, Vec::new()),
            }
        }
        ModelSpec::Smib(m) => {
            let m = Smib::new(m.inertia, m.damping, m.p_mech, m.p_max)?;
            let guess = m.equilibrium()?.to_vec();
            let InitialCondition::Explicit { x, .. } = &cfg.initial else {
                return Err(Error::config("initial", "SMIB needs an explicit initial state"));
            };
            check_dim(x, 2)?;
            PreparedScenario {
                model: Box::new(m),
                x0: x.clone(),
                v0: Vec::new(),
                sep_guess: (guess, Vec::new()),
            }
        }
        ModelSpec::Wscc9 { network, load_model } => {
            let data = network_data(network)?;
            let options = WsccOptions { load_model: *load_model };
            match &cfg.initial {
                InitialCondition::Fault(f) => {
                    let (rk, _) = cfg.oracle_settings();
                    let start = post_fault_initial_state(&data, options, f, rk.dt)?;
                    PreparedScenario {
                        sep_guess: (start.prefault_x.clone(), start.prefault_v.clone()),
                        x0: start.x0,
                        v0: start.v0,
                        model: Box::new(start.post_model),
                    }
                }
                InitialCondition::Explicit { x, v } => {
                    let m = Wscc9::new(&data, options, None, NetworkState::Post)?;
                    check_dim(x, m.state_dim())?;
                    let (xp, vp) = m.prefault_point();
                    let mut v0 = if v.is_empty() { vp.clone() } else { v.clone() };
                    if v0.len() != m.algebraic_dim() {
                        return Err(Error::config("initial.v", format!("expected {} values", m.algebraic_dim())));
                    }
                    AlgebraicSolver::new(1e-13).solve(&m, x, &mut v0)?;
                    PreparedScenario {
                        model: Box::new(m),
                        x0: x.clone(),
                        v0,
                        sep_guess: (xp, vp),
                    }
                }
            }
        }
    };
    let mut prepared = prepared;
    if let Some(g) = &cfg.sep_guess {
        check_dim(g, prepared.model.state_dim()).map_err(|_| Error::config("sep_guess", "wrong length"))?;
        prepared.sep_guess.0 = g.clone();
    }
    Ok(prepared)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityStatus {
    Stable,
    UnstableOtherSep,
    UnstableDivergent,
    UnstableUnclassified,
}

impl StabilityStatus {
    pub fn is_stable(self) -> bool {
        self == StabilityStatus::Stable
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub digits: u32,
    #[serde(rename = "L")]
    pub num_deg: usize,
    #[serde(rename = "M")]
    pub den_deg: usize,
    pub degree_reductions: usize,
    pub filtered_roots: usize,
    pub kept_roots: usize,
    pub roots_converged: bool,
    pub h0: f64,
    pub sep_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub status: StabilityStatus,
    /// Smallest kept real pole, as a decimal string at working precision.
    pub tau_pole: Option<String>,
    pub pole_error: Option<f64>,
    pub epsilon: f64,
    pub horizon: f64,
    /// `P/Q` at `tau = M (1 - 1e-3)`; absent when that point is a pole.
    pub h_at_horizon: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl StabilityVerdict {
    pub fn tau_pole_f64(&self) -> Option<f64> {
        self.tau_pole.as_deref().and_then(|s| s.parse().ok())
    }
}

/// Thresholds of the unstable-subtype diagnosis, relative to `|h_0|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubtypeRule {
    pub zero_tol: f64,
    pub finite_bound: f64,
}

impl Default for SubtypeRule {
    fn default() -> Self {
        SubtypeRule {
            zero_tol: 0.05,
            finite_bound: 1e3,
        }
    }
}

impl SubtypeRule {
    pub fn classify(&self, h_at_horizon: Option<f64>, h0: f64) -> StabilityStatus {
        let scale = h0.abs();
        match h_at_horizon {
            Some(h) if h.abs() <= self.zero_tol * scale => StabilityStatus::UnstableDivergent,
            Some(h) if h < 0.0 && h.abs() <= self.finite_bound * scale => StabilityStatus::UnstableOtherSep,
            _ => StabilityStatus::UnstableUnclassified,
        }
    }
}

/// Wall-clock seconds per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub prepare: f64,
    pub sep_solve: f64,
    pub propagation: f64,
    pub pade: f64,
    pub roots: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.prepare + self.sep_solve + self.propagation + self.pade + self.roots
    }
}

/// Every intermediate of one assessment.
pub struct Assessment {
    pub verdict: StabilityVerdict,
    pub sep: EquilibriumPoint,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    pub table: CoefficientTable,
    pub indicator: IndicatorSeries,
    pub approximant: PadeApproximant,
    pub roots: Vec<RootReport>,
    pub timings: StageTimings,
    pub model: Box<dyn DynamicalModel>,
}

/// Where the pipeline failed, for error reporting.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

fn at<T>(stage: &'static str, r: Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|error| StageError { stage, error })
}

pub fn assess(cfg: &ScenarioConfig) -> Result<StabilityVerdict> {
    assess_detailed(cfg).map(|a| a.verdict).map_err(|e| e.error)
}

pub fn assess_detailed(cfg: &ScenarioConfig) -> std::result::Result<Assessment, StageError> {
    let mut timings = StageTimings::default();
    let clock = Instant::now();
    at("configuration", cfg.validate())?;
    let prepared = at("initialization", prepare(cfg))?;
    timings.prepare = clock.elapsed().as_secs_f64();
    let prec = cfg.precision();
    let model = prepared.model;

    let clock = Instant::now();
    let (gx, gv) = &prepared.sep_guess;
    let sep = at("sep solve", find_sep(model.as_ref(), &lift(gx, prec), &lift(gv, prec), prec))?;
    timings.sep_solve = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let order = cfg.order.num + cfg.order.den;
    let x0 = lift(&prepared.x0, prec);
    let v0 = at(
        "initialization",
        solve_algebraic_hp(model.as_ref(), &x0, &lift(&prepared.v0, prec), prec),
    )?;
    let table = at(
        "propagation",
        propagate_coefficients(model.as_ref(), &cfg.mapping, &x0, &v0, order, prec),
    )?;
    let indicator = at("propagation", indicator_coefficients(&table, &sep.x_star, order))?;
    timings.propagation = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let approximant = at("pade", build_pade(&indicator.h, cfg.order.num, cfg.order.den))?;
    timings.pade = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let search = smallest_positive_real_root(&approximant, &cfg.pole_filter());
    timings.roots = clock.elapsed().as_secs_f64();
    if !search.converged && search.tau_pole.is_none() {
        let worst = search.roots.iter().map(|r| r.residual).fold(0.0, f64::max);
        return Err(StageError {
            stage: "roots",
            error: Error::RootNonConvergence {
                sweeps: crate::pade::MAX_ROOT_SWEEPS,
                worst_residual: worst,
            },
        });
    }

    let horizon = cfg.mapping.horizon;
    let eps = cfg.epsilon();
    let h0 = indicator.h.coeff(0).to_f64();
    let probe = HPReal::from_f64(horizon * (1.0 - 1e-3), prec);
    let h_at_horizon = approximant.evaluate(&probe).ok().map(|v| v.to_f64()).filter(|v| v.is_finite());
    let pole_error = search
        .tau_pole
        .as_ref()
        .map(|t| (t - &HPReal::from_f64(horizon, prec)).abs().to_f64());
    let status = match pole_error {
        Some(e) if e <= eps => StabilityStatus::Stable,
        _ => SubtypeRule::default().classify(h_at_horizon, h0),
    };
    let kept = search.roots.iter().filter(|r| r.status == crate::pade::RootStatus::Kept).count();
    let verdict = StabilityVerdict {
        status,
        tau_pole: search.tau_pole.as_ref().map(|t| t.to_sci_string(prec.decimal_digits() as usize)),
        pole_error,
        epsilon: eps,
        horizon,
        h_at_horizon,
        diagnostics: Diagnostics {
            digits: prec.decimal_digits(),
            num_deg: approximant.num_deg,
            den_deg: approximant.den_deg,
            degree_reductions: approximant.degree_reductions,
            filtered_roots: search.filtered,
            kept_roots: kept,
            roots_converged: search.converged,
            h0,
            sep_iterations: sep.iterations,
        },
    };
    Ok(Assessment {
        verdict,
        sep,
        x0: prepared.x0,
        v0: prepared.v0,
        table,
        indicator,
        approximant,
        roots: search.roots,
        timings,
        model,
    })
}

/// Reference trajectory of the scenario and its ground-truth verdict.
pub fn oracle_run(cfg: &ScenarioConfig) -> Result<(Trajectory, OracleVerdict, Vec<f64>)> {
    let prepared = prepare(cfg)?;
    let prec = Precision::digits(34);
    let (gx, gv) = &prepared.sep_guess;
    let sep = find_sep(prepared.model.as_ref(), &lift(gx, prec), &lift(gv, prec), prec)?;
    let x_star: Vec<f64> = sep.x_star.iter().map(HPReal::to_f64).collect();
    let (rk, settings) = cfg.oracle_settings();
    let traj = rk4_integrate(prepared.model.as_ref(), &prepared.x0, &prepared.v0, &rk)?;
    let verdict = truth_classify(&traj, &x_star, &settings);
    Ok((traj, verdict, x_star))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub method: StabilityVerdict,
    pub oracle: OracleVerdict,
    /// `None` when the oracle is inconclusive.
    pub agree: Option<bool>,
}

pub fn classify_against_oracle(cfg: &ScenarioConfig) -> Result<AgreementReport> {
    let method = assess(cfg)?;
    let (_, oracle, _) = oracle_run(cfg)?;
    let agree = match oracle {
        OracleVerdict::Inconclusive => None,
        o => Some(o.is_stable() == method.status.is_stable()),
    };
    Ok(AgreementReport { method, oracle, agree })
}

/// Clearing times straddling the stability boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub stable: f64,
    pub unstable: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CctReport {
    pub method: Bracket,
    pub oracle: Bracket,
    pub step: f64,
}

/// Bisects the clearing time on the grid `fct_lo + k step` down to one step,
/// once with `stable_at` supplied by the method and once by the oracle.
pub fn bisect_grid(
    fct_lo: f64,
    fct_hi: f64,
    step: f64,
    mut stable_at: impl FnMut(f64) -> Result<bool>,
) -> Result<Bracket> {
    if !(step > 0.0) {
        return Err(Error::config("step", "must be positive"));
    }
    if fct_hi < fct_lo {
        return Err(Error::Precondition("fct_hi must not be below fct_lo".into()));
    }
    if fct_hi == fct_lo {
        return Ok(Bracket {
            stable: fct_lo,
            unstable: fct_hi,
        });
    }
    let n = ((fct_hi - fct_lo) / step).round().max(1.0) as i64;
    let at_k = |k: i64| if k == n { fct_hi } else { fct_lo + k as f64 * step };
    if !stable_at(fct_lo)? {
        return Err(Error::Precondition(format!("clearing time {fct_lo} s is not stable")));
    }
    if stable_at(fct_hi)? {
        return Err(Error::Precondition(format!("clearing time {fct_hi} s is not unstable")));
    }
    let (mut lo, mut hi) = (0i64, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if stable_at(at_k(mid))? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket {
        stable: at_k(lo),
        unstable: at_k(hi),
    })
}

pub fn cct_bisect(cfg: &ScenarioConfig, fct_lo: f64, fct_hi: f64, step: f64) -> Result<CctReport> {
    let method = bisect_grid(fct_lo, fct_hi, step, |fct| {
        Ok(assess(&cfg.with_clearing_time(fct)?)?.status.is_stable())
    })?;
    let oracle = bisect_grid(fct_lo, fct_hi, step, |fct| {
        let (_, v, _) = oracle_run(&cfg.with_clearing_time(fct)?)?;
        match v {
            OracleVerdict::Inconclusive => Err(Error::Precondition(format!(
                "oracle is inconclusive at clearing time {fct} s"
            ))),
            v => Ok(v.is_stable()),
        }
    })?;
    Ok(CctReport { method, oracle, step })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorenz(x: [f64; 3]) -> ScenarioConfig {
        ScenarioConfig::new(
            "lorenz",
            ModelSpec::Lorenz(Lorenz::stable()),
            InitialCondition::Explicit { x: x.to_vec(), v: vec![] },
            TimeContractionMap::new(1.0, 3).unwrap(),
            40,
        )
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = lorenz([2.0, 0.5, 2.0]);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ScenarioConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(cfg.precision().decimal_digits(), 81);
        assert_eq!(cfg.epsilon(), 0.01);
    }

    #[test]
    fn config_errors_name_the_key() {
        let mut cfg = lorenz([2.0, 0.5, 2.0]);
        cfg.epsilon = Some(2.0);
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "epsilon"));
        let mut cfg = lorenz([2.0, 0.5, 2.0]);
        cfg.schema = "other".into();
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "schema"));
        let mut cfg = lorenz([2.0, 0.5, 2.0]);
        cfg.order.num = 380;
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "order"));
    }

    #[test]
    fn lorenz_stable_case_finds_horizon_pole() {
        let v = assess(&lorenz([2.0, 0.5, 2.0])).unwrap();
        assert_eq!(v.status, StabilityStatus::Stable, "{v:?}");
        assert!(v.pole_error.unwrap() <= 0.01);
    }

    #[test]
    fn start_on_equilibrium_is_an_error() {
        let err = assess(&lorenz([1.0, 1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::AlreadyAtSep { .. }));
    }

    #[test]
    fn verdicts_are_deterministic_and_round_trip() {
        let cfg = lorenz([2.0, 0.5, 2.0]);
        let a = assess(&cfg).unwrap();
        let b = assess(&cfg).unwrap();
        assert_eq!(a, b);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<StabilityVerdict>(&text).unwrap(), a);
    }

    #[test]
    fn subtype_rule() {
        let r = SubtypeRule::default();
        assert_eq!(r.classify(Some(-0.001), -1.0), StabilityStatus::UnstableDivergent);
        assert_eq!(r.classify(Some(-0.5), -1.0), StabilityStatus::UnstableOtherSep);
        assert_eq!(r.classify(Some(-1e9), -1.0), StabilityStatus::UnstableUnclassified);
        assert_eq!(r.classify(Some(3.0), -1.0), StabilityStatus::UnstableUnclassified);
        assert_eq!(r.classify(None, -1.0), StabilityStatus::UnstableUnclassified);
    }

    #[test]
    fn grid_bisection() {
        let b = bisect_grid(0.0, 1.0, 0.01, |t| Ok(t < 0.255)).unwrap();
        assert!((b.stable - 0.25).abs() < 1e-12 && (b.unstable - 0.26).abs() < 1e-12);
        let same = bisect_grid(0.3, 0.3, 0.01, |_| unreachable!()).unwrap();
        assert_eq!((same.stable, same.unstable), (0.3, 0.3));
        assert!(matches!(bisect_grid(0.0, 1.0, 0.01, |_| Ok(true)), Err(Error::Precondition(_))));
    }
}
