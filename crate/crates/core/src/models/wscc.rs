use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{AlgebraicSolver, DynamicalModel, Jacobian};
use crate::dtengine::{primitives::sin_cos_step, CoefficientTable};
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Lu, Matrix};
use crate::precision::{HPReal, Scalar};

const STANDARD_DATA: &str = include_str!("../../data/wscc9.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusData {
    pub id: usize,
    pub kind: BusKind,
    /// Voltage magnitude set point for slack and PV buses.
    #[serde(default = "unit_voltage")]
    pub v: f64,
    /// Scheduled active generation for PV buses.
    #[serde(default)]
    pub p_gen: f64,
}

fn unit_voltage() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineData {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance.
    #[serde(default)]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineData {
    pub bus: usize,
    /// Inertia constant in seconds.
    pub h: f64,
    pub xd_prime: f64,
    /// Damping in per-unit power per per-unit speed deviation.
    #[serde(default)]
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadData {
    pub bus: usize,
    pub p: f64,
    pub q: f64,
}

/// Network and machine data, all quantities in per unit on `base_mva`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(alias = "base_MVA")]
    pub base_mva: f64,
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    pub buses: Vec<BusData>,
    pub lines: Vec<LineData>,
    pub machines: Vec<MachineData>,
    #[serde(default)]
    pub loads: Vec<LoadData>,
}

fn default_frequency() -> f64 {
    60.0
}

impl NetworkData {
    /// The Anderson–Fouad 3-machine, 9-bus system.
    pub fn wscc9() -> Self {
        serde_json::from_str(STANDARD_DATA).expect("bundled network data parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: NetworkData = serde_json::from_str(text)?;
        data.validate()?;
        Ok(data)
    }

    fn bus_index(&self, id: usize) -> Result<usize> {
        self.buses
            .iter()
            .position(|b| b.id == id)
            .ok_or_else(|| Error::config("network.buses", format!("unknown bus id {id}")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_mva > 0.0) {
            return Err(Error::config("network.base_mva", "must be positive"));
        }
        if !(self.frequency_hz > 0.0) {
            return Err(Error::config("network.frequency_hz", "must be positive"));
        }
        let ids: BTreeSet<usize> = self.buses.iter().map(|b| b.id).collect();
        if ids.len() != self.buses.len() {
            return Err(Error::config("network.buses", "duplicate bus id"));
        }
        let slacks = self.buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slacks != 1 {
            return Err(Error::config("network.buses", format!("need exactly one slack bus, found {slacks}")));
        }
        for l in &self.lines {
            self.bus_index(l.from)?;
            self.bus_index(l.to)?;
            if l.r == 0.0 && l.x == 0.0 {
                return Err(Error::config("network.lines", format!("line {}-{} has zero impedance", l.from, l.to)));
            }
        }
        if self.machines.is_empty() {
            return Err(Error::config("network.machines", "at least one machine is required"));
        }
        for (i, m) in self.machines.iter().enumerate() {
            let b = self.bus_index(m.bus)?;
            if self.buses[b].kind == BusKind::Pq {
                return Err(Error::config("network.machines", format!("machine at bus {} sits on a PQ bus", m.bus)));
            }
            if !(m.h > 0.0 && m.xd_prime > 0.0 && m.d >= 0.0) {
                return Err(Error::config("network.machines", format!("machine {i} needs h > 0, xd_prime > 0, d >= 0")));
            }
        }
        if self.buses[self.bus_index(self.machines[0].bus)?].kind != BusKind::Slack {
            return Err(Error::config("network.machines", "the first machine must sit on the slack bus"));
        }
        for l in &self.loads {
            self.bus_index(l.bus)?;
        }
        Ok(())
    }

    /// Bus admittance matrix of lines and shunts, as `(G, B)`.
    fn ybus(&self) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let n = self.buses.len();
        let mut g = vec![vec![0.0; n]; n];
        let mut b = vec![vec![0.0; n]; n];
        for l in &self.lines {
            let i = self.bus_index(l.from)?;
            let j = self.bus_index(l.to)?;
            let den = l.r * l.r + l.x * l.x;
            let (gs, bs) = (l.r / den, -l.x / den);
            g[i][i] += gs;
            g[j][j] += gs;
            g[i][j] -= gs;
            g[j][i] -= gs;
            b[i][i] += bs + l.b / 2.0;
            b[j][j] += bs + l.b / 2.0;
            b[i][j] -= bs;
            b[j][i] -= bs;
        }
        Ok((g, b))
    }
}

/// How loads enter the algebraic equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadModel {
    /// Folded into the network as shunt admittances at the pre-fault voltage.
    #[default]
    ConstantImpedance,
    /// Power balance at load buses, quadratic in the bus voltages.
    ConstantPower,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkState {
    #[default]
    Pre,
    On,
    Post,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WsccOptions {
    #[serde(default)]
    pub load_model: LoadModel,
}

/// Three-phase fault through an impedance, removed after `clearing_time`
/// without any change of topology.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultScenario {
    /// Bus id as written in the network data.
    pub faulted_bus: usize,
    pub r_f: f64,
    pub x_f: f64,
    pub clearing_time: f64,
}

impl FaultScenario {
    pub fn bus9(clearing_time: f64) -> Self {
        FaultScenario {
            faulted_bus: 9,
            r_f: 0.0,
            x_f: 0.001,
            clearing_time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clearing_time >= 0.0 && self.clearing_time.is_finite()) {
            return Err(Error::config("fault.clearing_time", "must be a non-negative number of seconds"));
        }
        if self.r_f == 0.0 && self.x_f == 0.0 {
            return Err(Error::config("fault", "fault impedance must be nonzero"));
        }
        Ok(())
    }

    /// `(g, b)` of `1 / (r_f + j x_f)`.
    pub fn admittance(&self) -> (f64, f64) {
        let den = self.r_f * self.r_f + self.x_f * self.x_f;
        (self.r_f / den, -self.x_f / den)
    }
}

/// Converged AC power flow.
#[derive(Clone, Debug)]
pub struct PowerFlow {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    /// Net injection `P + jQ` at every bus (generation minus load).
    pub p_inj: Vec<f64>,
    pub q_inj: Vec<f64>,
    pub iterations: usize,
}

fn injections(g: &[Vec<f64>], b: &[Vec<f64>], vm: &[f64], va: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = vm.len();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        for k in 0..n {
            let d = va[i] - va[k];
            p[i] += vm[i] * vm[k] * (g[i][k] * d.cos() + b[i][k] * d.sin());
            q[i] += vm[i] * vm[k] * (g[i][k] * d.sin() - b[i][k] * d.cos());
        }
    }
    (p, q)
}

/// Newton–Raphson power flow in polar coordinates.
pub fn solve_power_flow(data: &NetworkData) -> Result<PowerFlow> {
    data.validate()?;
    let n = data.buses.len();
    let (g, b) = data.ybus()?;
    let mut p_sched = vec![0.0; n];
    let mut q_sched = vec![0.0; n];
    for (i, bus) in data.buses.iter().enumerate() {
        if bus.kind == BusKind::Pv {
            p_sched[i] += bus.p_gen;
        }
    }
    for l in &data.loads {
        let i = data.bus_index(l.bus)?;
        p_sched[i] -= l.p;
        q_sched[i] -= l.q;
    }
    let mut vm: Vec<f64> = data
        .buses
        .iter()
        .map(|b| if b.kind == BusKind::Pq { 1.0 } else { b.v })
        .collect();
    let mut va = vec![0.0; n];
    let angle_idx: Vec<usize> = (0..n).filter(|&i| data.buses[i].kind != BusKind::Slack).collect();
    let mag_idx: Vec<usize> = (0..n).filter(|&i| data.buses[i].kind == BusKind::Pq).collect();
    let dim = angle_idx.len() + mag_idx.len();

    let mismatch = |vm: &[f64], va: &[f64]| -> Vec<f64> {
        let (p, q) = injections(&g, &b, vm, va);
        angle_idx
            .iter()
            .map(|&i| p_sched[i] - p[i])
            .chain(mag_idx.iter().map(|&i| q_sched[i] - q[i]))
            .collect()
    };
    let apply = |vm: &mut [f64], va: &mut [f64], dz: &[f64]| {
        for (k, &i) in angle_idx.iter().enumerate() {
            va[i] += dz[k];
        }
        for (k, &i) in mag_idx.iter().enumerate() {
            vm[i] += dz[angle_idx.len() + k];
        }
    };

    for it in 0..30 {
        let r = mismatch(&vm, &va);
        if norm_inf(&r) < 1e-13 {
            let (p_inj, q_inj) = injections(&g, &b, &vm, &va);
            return Ok(PowerFlow {
                vm,
                va,
                p_inj,
                q_inj,
                iterations: it,
            });
        }
        let h = 1e-7;
        let mut jac = Matrix::filled(dim, dim, 0.0);
        for col in 0..dim {
            let mut unit = vec![0.0; dim];
            unit[col] = h;
            let (mut vp, mut ap) = (vm.clone(), va.clone());
            apply(&mut vp, &mut ap, &unit);
            let rp = mismatch(&vp, &ap);
            unit[col] = -h;
            let (mut vq, mut aq) = (vm.clone(), va.clone());
            apply(&mut vq, &mut aq, &unit);
            let rq = mismatch(&vq, &aq);
            for row in 0..dim {
                jac.set(row, col, -(rp[row] - rq[row]) / (2.0 * h));
            }
        }
        let lu = Lu::factor(&jac, &1e-12, "power flow Jacobian")?;
        let dz = lu.solve(&r);
        apply(&mut vm, &mut va, &dz);
    }
    Err(Error::NewtonNonConvergence {
        iterations: 30,
        residual: norm_inf(&mismatch(&vm, &va)),
    })
}

/// Classical-machine multi-machine system with rectangular bus voltages.
///
/// States are the rotor angles of machines `2..N` relative to machine 1,
/// followed by the speed deviations of all machines; the algebraic vector
/// holds `(Vr, Vi)` for every bus in the rotor frame of machine 1.
#[derive(Clone, Debug)]
pub struct Wscc9 {
    name: String,
    bus_ids: Vec<usize>,
    /// Network matrix the algebraic rows use, `Y = G + jB`.
    g: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    /// Load buses written as power balances (constant-power option only).
    power_rows: Vec<Option<(f64, f64)>>,
    gen_bus: Vec<usize>,
    emf: Vec<f64>,
    xd: Vec<f64>,
    h: Vec<f64>,
    d: Vec<f64>,
    p_mech: Vec<f64>,
    omega_b: f64,
    state: NetworkState,
    x_pre: Vec<f64>,
    v_pre: Vec<f64>,
}

impl Wscc9 {
    pub fn new(
        data: &NetworkData,
        options: WsccOptions,
        fault: Option<&FaultScenario>,
        state: NetworkState,
    ) -> Result<Self> {
        let pf = solve_power_flow(data)?;
        let nb = data.buses.len();
        let nm = data.machines.len();
        let (mut g, mut b) = data.ybus()?;

        let mut gen_bus = Vec::with_capacity(nm);
        let mut emf = Vec::with_capacity(nm);
        let mut delta = Vec::with_capacity(nm);
        let mut p_mech = Vec::with_capacity(nm);
        for m in &data.machines {
            let i = data.bus_index(m.bus)?;
            let mut p_load = 0.0;
            let mut q_load = 0.0;
            for l in data.loads.iter().filter(|l| l.bus == m.bus) {
                p_load += l.p;
                q_load += l.q;
            }
            let machines_here = data.machines.iter().filter(|o| o.bus == m.bus).count() as f64;
            let pg = (pf.p_inj[i] + p_load) / machines_here;
            let qg = (pf.q_inj[i] + q_load) / machines_here;
            let (vr, vi) = (pf.vm[i] * pf.va[i].cos(), pf.vm[i] * pf.va[i].sin());
            // I = conj(S / V)
            let v2 = vr * vr + vi * vi;
            let ir = (pg * vr + qg * vi) / v2;
            let ii = (pg * vi - qg * vr) / v2;
            let er = vr - m.xd_prime * ii;
            let ei = vi + m.xd_prime * ir;
            gen_bus.push(i);
            emf.push(er.hypot(ei));
            delta.push(ei.atan2(er));
            p_mech.push(pg);
            b[i][i] -= 1.0 / m.xd_prime;
        }

        let mut power_rows = vec![None; nb];
        for l in &data.loads {
            let i = data.bus_index(l.bus)?;
            match options.load_model {
                LoadModel::ConstantImpedance => {
                    let v2 = pf.vm[i] * pf.vm[i];
                    g[i][i] += l.p / v2;
                    b[i][i] -= l.q / v2;
                }
                LoadModel::ConstantPower => {
                    if gen_bus.contains(&i) {
                        return Err(Error::config(
                            "network.loads",
                            "constant-power loads at generator buses are not supported",
                        ));
                    }
                    let (p, q) = power_rows[i].unwrap_or((0.0, 0.0));
                    power_rows[i] = Some((p + l.p, q + l.q));
                }
            }
        }

        if let (NetworkState::On, Some(f)) = (state, fault) {
            f.validate()?;
            let i = data.bus_index(f.faulted_bus)?;
            let (gf, bf) = f.admittance();
            g[i][i] += gf;
            b[i][i] += bf;
        } else if state == NetworkState::On {
            return Err(Error::Precondition("fault-on network requested without a fault".into()));
        }

        let ref_angle = delta[0];
        let x_pre: Vec<f64> = delta[1..]
            .iter()
            .map(|d| d - ref_angle)
            .chain(std::iter::repeat(0.0).take(nm))
            .collect();
        let v_pre: Vec<f64> = (0..nb)
            .flat_map(|i| {
                let a = pf.va[i] - ref_angle;
                [pf.vm[i] * a.cos(), pf.vm[i] * a.sin()]
            })
            .collect();

        let model = Wscc9 {
            name: data.name.clone().unwrap_or_else(|| "wscc9".into()),
            bus_ids: data.buses.iter().map(|b| b.id).collect(),
            g,
            b,
            power_rows,
            gen_bus,
            emf,
            xd: data.machines.iter().map(|m| m.xd_prime).collect(),
            h: data.machines.iter().map(|m| m.h).collect(),
            d: data.machines.iter().map(|m| m.d).collect(),
            p_mech,
            omega_b: 2.0 * PI * data.frequency_hz,
            state,
            x_pre,
            v_pre,
        };
        let jac = model.jac(&model.x_pre, &model.v_pre);
        Lu::factor(&jac.gv, &1e-12, "network matrix")?;
        Ok(model)
    }

    /// The standard system with default options.
    pub fn standard(fault: Option<&FaultScenario>, state: NetworkState) -> Result<Self> {
        Wscc9::new(&NetworkData::wscc9(), WsccOptions::default(), fault, state)
    }

    pub fn network_state(&self) -> NetworkState {
        self.state
    }

    pub fn machines(&self) -> usize {
        self.emf.len()
    }

    pub fn buses(&self) -> usize {
        self.bus_ids.len()
    }

    /// Pre-fault operating point `(x, v)` from the power flow.
    pub fn prefault_point(&self) -> (Vec<f64>, Vec<f64>) {
        (self.x_pre.clone(), self.v_pre.clone())
    }

    /// Relative rotor angle of machine `i` (zero for the reference machine).
    fn angle<S: Scalar>(&self, x: &[S], i: usize) -> S {
        if i == 0 {
            x[0].zero_like()
        } else {
            x[i - 1].clone()
        }
    }

    fn speed_index(&self, i: usize) -> usize {
        self.machines() - 1 + i
    }

    fn currents<S: Scalar>(&self, v: &[S], bus: usize) -> (S, S) {
        let mut ir = v[0].zero_like();
        let mut ii = v[0].zero_like();
        for c in 0..self.buses() {
            let (gc, bc) = (self.g[bus][c], self.b[bus][c]);
            if gc == 0.0 && bc == 0.0 {
                continue;
            }
            let (vr, vi) = (&v[2 * c], &v[2 * c + 1]);
            ir = ir + vr.lift(gc) * vr.clone() - vr.lift(bc) * vi.clone();
            ii = ii + vr.lift(bc) * vr.clone() + vr.lift(gc) * vi.clone();
        }
        (ir, ii)
    }

    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> (Vec<S>, Vec<S>) {
        let nm = self.machines();
        let l = |c: f64| x[0].lift(c);
        let mut f = Vec::with_capacity(2 * nm - 1);
        for i in 1..nm {
            f.push(l(self.omega_b) * (x[self.speed_index(i)].clone() - x[self.speed_index(0)].clone()));
        }
        for i in 0..nm {
            let th = self.angle(x, i);
            let (vr, vi) = (&v[2 * self.gen_bus[i]], &v[2 * self.gen_bus[i] + 1]);
            let pe = l(self.emf[i] / self.xd[i]) * (vr.clone() * th.sin() - vi.clone() * th.cos());
            let w = x[self.speed_index(i)].clone();
            f.push((l(self.p_mech[i]) - pe - l(self.d[i]) * w) / l(2.0 * self.h[i]));
        }
        let mut g = Vec::with_capacity(2 * self.buses());
        for bus in 0..self.buses() {
            let (ir, ii) = self.currents(v, bus);
            let (vr, vi) = (&v[2 * bus], &v[2 * bus + 1]);
            if let Some((p, q)) = self.power_rows[bus] {
                g.push(vr.clone() * ir.clone() + vi.clone() * ii.clone() + l(p));
                g.push(vi.clone() * ir - vr.clone() * ii + l(q));
            } else {
                g.push(ir);
                g.push(ii);
            }
        }
        for i in 0..nm {
            let th = self.angle(x, i);
            let k = l(self.emf[i] / self.xd[i]);
            let bus = self.gen_bus[i];
            g[2 * bus] = g[2 * bus].clone() - k.clone() * th.sin();
            g[2 * bus + 1] = g[2 * bus + 1].clone() + k * th.cos();
        }
        (f, g)
    }

    fn jac<S: Scalar>(&self, x: &[S], v: &[S]) -> Jacobian<S> {
        let nm = self.machines();
        let nb = self.buses();
        let n = 2 * nm - 1;
        let mut j = Jacobian::zeros(n, 2 * nb, &x[0]);
        let l = |c: f64| x[0].lift(c);
        for i in 1..nm {
            j.fx.set(i - 1, self.speed_index(i), l(self.omega_b));
            j.fx.set(i - 1, self.speed_index(0), l(-self.omega_b));
        }
        for i in 0..nm {
            let row = nm - 1 + i;
            let th = self.angle(x, i);
            let (s, c) = (th.sin(), th.cos());
            let bus = self.gen_bus[i];
            let (vr, vi) = (v[2 * bus].clone(), v[2 * bus + 1].clone());
            let k = self.emf[i] / self.xd[i];
            let m2 = 2.0 * self.h[i];
            if i > 0 {
                let dpe = l(k) * (vr * c.clone() + vi * s.clone());
                j.fx.set(row, i - 1, -dpe / l(m2));
                j.gx.set(2 * bus, i - 1, -(l(k) * c.clone()));
                j.gx.set(2 * bus + 1, i - 1, -(l(k) * s.clone()));
            }
            j.fx.set(row, self.speed_index(i), l(-self.d[i] / m2));
            j.fv.set(row, 2 * bus, -(l(k) * s) / l(m2));
            j.fv.set(row, 2 * bus + 1, l(k) * c / l(m2));
        }
        for bus in 0..nb {
            match self.power_rows[bus] {
                None => {
                    for c in 0..nb {
                        let (gc, bc) = (self.g[bus][c], self.b[bus][c]);
                        j.gv.set(2 * bus, 2 * c, l(gc));
                        j.gv.set(2 * bus, 2 * c + 1, l(-bc));
                        j.gv.set(2 * bus + 1, 2 * c, l(bc));
                        j.gv.set(2 * bus + 1, 2 * c + 1, l(gc));
                    }
                }
                Some(_) => {
                    let (ir, ii) = self.currents(v, bus);
                    let (vr, vi) = (v[2 * bus].clone(), v[2 * bus + 1].clone());
                    for c in 0..nb {
                        let (gc, bc) = (l(self.g[bus][c]), l(self.b[bus][c]));
                        let mut p_r = vr.clone() * gc.clone() + vi.clone() * bc.clone();
                        let mut p_i = vi.clone() * gc.clone() - vr.clone() * bc.clone();
                        let mut q_r = vi.clone() * gc.clone() - vr.clone() * bc.clone();
                        let mut q_i = -(vi.clone() * bc) - vr.clone() * gc;
                        if c == bus {
                            p_r = p_r + ir.clone();
                            p_i = p_i + ii.clone();
                            q_r = q_r - ii.clone();
                            q_i = q_i + ir.clone();
                        }
                        j.gv.set(2 * bus, 2 * c, p_r);
                        j.gv.set(2 * bus, 2 * c + 1, p_i);
                        j.gv.set(2 * bus + 1, 2 * c, q_r);
                        j.gv.set(2 * bus + 1, 2 * c + 1, q_i);
                    }
                }
            }
        }
        j
    }

    /// Order-`k` coefficients of the bus currents `Y V`.
    fn current_coeffs(&self, t: &CoefficientTable, bus: usize, k: usize) -> (HPReal, HPReal) {
        let prec = t.precision();
        let mut ir = HPReal::zero(prec);
        let mut ii = HPReal::zero(prec);
        for c in 0..self.buses() {
            let (gc, bc) = (self.g[bus][c], self.b[bus][c]);
            if gc == 0.0 && bc == 0.0 {
                continue;
            }
            let (gc, bc) = (HPReal::from_f64(gc, prec), HPReal::from_f64(bc, prec));
            let (vr, vi) = (&t.vs(2 * c)[k], &t.vs(2 * c + 1)[k]);
            ir += &(&(&gc * vr) - &(&bc * vi));
            ii += &(&(&bc * vr) + &(&gc * vi));
        }
        (ir, ii)
    }

    /// Order-`k` coefficients of `sin` and `cos` of machine `i`'s angle.
    fn trig_coeffs(&self, t: &CoefficientTable, i: usize, k: usize) -> (HPReal, HPReal) {
        let prec = t.precision();
        if i == 0 {
            let c = if k == 0 { HPReal::one(prec) } else { HPReal::zero(prec) };
            (HPReal::zero(prec), c)
        } else {
            (t.auxs(2 * (i - 1))[k].clone(), t.auxs(2 * (i - 1) + 1)[k].clone())
        }
    }
}

impl DynamicalModel for Wscc9 {
    fn name(&self) -> &str {
        &self.name
    }

    fn state_names(&self) -> Vec<String> {
        let nm = self.machines();
        (1..nm)
            .map(|i| format!("delta_{}_1", i + 1))
            .chain((0..nm).map(|i| format!("domega_{}", i + 1)))
            .collect()
    }

    fn algebraic_names(&self) -> Vec<String> {
        self.bus_ids
            .iter()
            .flat_map(|id| [format!("vr_{id}"), format!("vi_{id}")])
            .collect()
    }

    super::scalar_dispatch!();

    fn dt_aux_names(&self) -> Vec<String> {
        (1..self.machines())
            .flat_map(|i| [format!("sin_delta_{}_1", i + 1), format!("cos_delta_{}_1", i + 1)])
            .collect()
    }

    fn dt_aux_init(&self, x0: &[HPReal], _v0: &[HPReal]) -> Vec<HPReal> {
        (1..self.machines())
            .flat_map(|i| [x0[i - 1].sin(), x0[i - 1].cos()])
            .collect()
    }

    fn dt_aux(&self, t: &CoefficientTable, k: usize) -> Vec<HPReal> {
        (1..self.machines())
            .flat_map(|i| {
                let (s, c) = sin_cos_step(t.xs(i - 1), t.auxs(2 * (i - 1)), t.auxs(2 * (i - 1) + 1), k);
                [s, c]
            })
            .collect()
    }

    fn dt_f(&self, t: &CoefficientTable, k: usize) -> Vec<HPReal> {
        let prec = t.precision();
        let nm = self.machines();
        let wb = HPReal::from_f64(self.omega_b, prec);
        let mut out = Vec::with_capacity(2 * nm - 1);
        for i in 1..nm {
            out.push(&wb * &(&t.xs(self.speed_index(i))[k] - &t.xs(self.speed_index(0))[k]));
        }
        for i in 0..nm {
            let bus = self.gen_bus[i];
            let (vr, vi) = (t.vs(2 * bus), t.vs(2 * bus + 1));
            let mut pe = HPReal::zero(prec);
            for j in 0..=k {
                let (s, c) = self.trig_coeffs(t, i, k - j);
                pe += &(&(&vr[j] * &s) - &(&vi[j] * &c));
            }
            pe = pe * HPReal::from_f64(self.emf[i] / self.xd[i], prec);
            let mut acc = -pe - &HPReal::from_f64(self.d[i], prec) * &t.xs(self.speed_index(i))[k];
            if k == 0 {
                acc += &HPReal::from_f64(self.p_mech[i], prec);
            }
            out.push(acc / HPReal::from_f64(2.0 * self.h[i], prec));
        }
        out
    }

    fn dt_g(&self, t: &CoefficientTable, k: usize) -> Vec<HPReal> {
        let prec = t.precision();
        let mut g = Vec::with_capacity(2 * self.buses());
        for bus in 0..self.buses() {
            match self.power_rows[bus] {
                None => {
                    let (ir, ii) = self.current_coeffs(t, bus, k);
                    g.push(ir);
                    g.push(ii);
                }
                Some((p, q)) => {
                    let (vr, vi) = (t.vs(2 * bus), t.vs(2 * bus + 1));
                    let mut pr = HPReal::zero(prec);
                    let mut qr = HPReal::zero(prec);
                    for j in 0..=k {
                        let (ir, ii) = self.current_coeffs(t, bus, k - j);
                        pr += &(&(&vr[j] * &ir) + &(&vi[j] * &ii));
                        qr += &(&(&vi[j] * &ir) - &(&vr[j] * &ii));
                    }
                    if k == 0 {
                        pr += &HPReal::from_f64(p, prec);
                        qr += &HPReal::from_f64(q, prec);
                    }
                    g.push(pr);
                    g.push(qr);
                }
            }
        }
        for i in 0..self.machines() {
            let (s, c) = self.trig_coeffs(t, i, k);
            let kk = HPReal::from_f64(self.emf[i] / self.xd[i], prec);
            let bus = self.gen_bus[i];
            g[2 * bus] = &g[2 * bus] - &(&kk * &s);
            g[2 * bus + 1] = &g[2 * bus + 1] + &(&kk * &c);
        }
        g
    }
}

/// Post-fault starting point for a fault scenario.
#[derive(Clone, Debug)]
pub struct PostFaultStart {
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    pub prefault_x: Vec<f64>,
    pub prefault_v: Vec<f64>,
    pub post_model: Wscc9,
}

/// Integrates the fault-on network from the pre-fault point for the
/// clearing time with RK4 at step `dt`, then re-solves the post-fault
/// network voltages with the states held.
pub fn post_fault_initial_state(
    data: &NetworkData,
    options: WsccOptions,
    scenario: &FaultScenario,
    dt: f64,
) -> Result<PostFaultStart> {
    scenario.validate()?;
    let pre = Wscc9::new(data, options, None, NetworkState::Pre)?;
    let on = Wscc9::new(data, options, Some(scenario), NetworkState::On)?;
    let post = Wscc9::new(data, options, Some(scenario), NetworkState::Post)?;
    let (x_pre, v_pre) = pre.prefault_point();
    let mut x = x_pre.clone();
    let mut v = v_pre.clone();
    if scenario.clearing_time > 0.0 {
        let mut solver = AlgebraicSolver::new(1e-13);
        solver.solve(&on, &x, &mut v)?;
        let steps = (scenario.clearing_time / dt).round().max(1.0) as usize;
        let h = scenario.clearing_time / steps as f64;
        let traj = crate::benchmark::rk4_fixed(&on, &x, &v, h, steps, &mut solver)?;
        x = traj.0;
        v = traj.1;
    }
    let mut solver = AlgebraicSolver::new(1e-14);
    solver.solve(&post, &x, &mut v)?;
    Ok(PostFaultStart {
        x0: x,
        v0: v,
        prefault_x: x_pre,
        prefault_v: v_pre,
        post_model: post,
    })
}
