//! Multi-bus power network with classical (constant-flux) machines.
//!
//! Differential states per machine: rotor angle `delta` (rad) and per-unit
//! speed `omega`. Algebraic variables: rectangular bus voltages
//! `(vre, vim)` per bus. Algebraic residuals are nodal current balances;
//! the slack bus is pinned to its set voltage.
//!
//! Loads are constant-power with a constant-impedance fallback whenever the
//! local voltage magnitude drops below a threshold; the impedance is fixed
//! from the initial power-flow voltage.

use nalgebra::{Complex, DMatrix, DVector};

use crate::dae::{fd_jacobian, DaeSystem, Event, SystemState};
use crate::error::{Result, SolverError};
use crate::nonlinear::{newton_solve, NewtonConfig};

pub const OMEGA_SYNC: f64 = 2.0 * std::f64::consts::PI * 60.0;

/// Voltage magnitude below which a load switches to constant impedance.
pub const LOW_VOLTAGE_THRESHOLD: f64 = 0.4;

type C = Complex<f64>;

#[derive(Debug, Clone)]
pub struct Branch {
    /// 1-based identifier used by `trip`/`close` event labels.
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub in_service: bool,
}

#[derive(Debug, Clone)]
pub struct Machine {
    pub bus: usize,
    /// Inertia constant (s).
    pub h: f64,
    /// Damping coefficient (pu torque per pu speed deviation).
    pub d: f64,
    /// Transient reactance (pu).
    pub xd_p: f64,
    /// Scheduled active power at the terminal (pu), used at initialization.
    pub p_dispatch: f64,
    /// Terminal voltage magnitude setpoint, used at initialization.
    pub vset: f64,
    /// Internal EMF magnitude; fixed by `solve_equilibrium`.
    pub ep: f64,
    /// Mechanical power; fixed by `solve_equilibrium`.
    pub pm: f64,
}

#[derive(Debug, Clone)]
pub struct Load {
    pub bus: usize,
    pub p: f64,
    pub q: f64,
    /// Voltage magnitude from the initial power flow, anchoring the
    /// constant-impedance fallback.
    pub v_ref: f64,
}

#[derive(Debug, Clone)]
pub struct PowerNetworkDae {
    /// External bus numbers, position = internal index.
    pub bus_ids: Vec<usize>,
    pub slack: usize,
    pub slack_v: C,
    pub branches: Vec<Branch>,
    pub machines: Vec<Machine>,
    pub loads: Vec<Load>,
    /// Per-bus fault shunt admittance, zero when healthy.
    shunts: Vec<C>,
    ybus: DMatrix<C>,
    events: Vec<Event>,
}

impl PowerNetworkDae {
    pub fn new(
        bus_ids: Vec<usize>,
        slack_bus_id: usize,
        slack_v: C,
        branches: Vec<Branch>,
        machines: Vec<Machine>,
        loads: Vec<Load>,
        mut events: Vec<Event>,
    ) -> Result<Self> {
        let n = bus_ids.len();
        let index_of = |id: usize| -> Result<usize> {
            bus_ids
                .iter()
                .position(|&b| b == id)
                .ok_or_else(|| SolverError::Config(format!("unknown bus {id}")))
        };
        let slack = index_of(slack_bus_id)?;
        for b in &branches {
            if b.from >= n || b.to >= n || b.from == b.to {
                return Err(SolverError::Config(format!("branch {} endpoints invalid", b.id)));
            }
            if b.x == 0.0 && b.r == 0.0 {
                return Err(SolverError::Config(format!("branch {} has zero impedance", b.id)));
            }
        }
        for m in &machines {
            if m.bus >= n {
                return Err(SolverError::Config("machine bus out of range".into()));
            }
            if m.bus == slack {
                return Err(SolverError::Config("machine at the slack bus is not supported".into()));
            }
            if m.h <= 0.0 || m.xd_p <= 0.0 {
                return Err(SolverError::Config("machine needs H > 0 and xd' > 0".into()));
            }
        }
        for l in &loads {
            if l.bus >= n {
                return Err(SolverError::Config("load bus out of range".into()));
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut sys = Self {
            bus_ids,
            slack,
            slack_v,
            branches,
            machines,
            loads,
            shunts: vec![C::new(0.0, 0.0); n],
            ybus: DMatrix::zeros(n, n),
            events,
        };
        sys.rebuild_ybus();
        Ok(sys)
    }

    pub fn n_bus(&self) -> usize {
        self.bus_ids.len()
    }

    fn rebuild_ybus(&mut self) {
        let n = self.n_bus();
        let mut y = DMatrix::from_element(n, n, C::new(0.0, 0.0));
        for b in self.branches.iter().filter(|b| b.in_service) {
            let ys = C::new(1.0, 0.0) / C::new(b.r, b.x);
            y[(b.from, b.from)] += ys;
            y[(b.to, b.to)] += ys;
            y[(b.from, b.to)] -= ys;
            y[(b.to, b.from)] -= ys;
        }
        for (k, s) in self.shunts.iter().enumerate() {
            y[(k, k)] += *s;
        }
        self.ybus = y;
    }

    pub fn bus_voltage(&self, y: &DVector<f64>, bus: usize) -> C {
        C::new(y[2 * bus], y[2 * bus + 1])
    }

    fn voltages(&self, y: &DVector<f64>) -> Vec<C> {
        (0..self.n_bus()).map(|k| self.bus_voltage(y, k)).collect()
    }

    /// Machine terminal current injection for rotor angle `delta`.
    fn machine_current(&self, m: &Machine, delta: f64, v: C) -> C {
        let e = C::new(m.ep * delta.cos(), m.ep * delta.sin());
        (e - v) / C::new(0.0, m.xd_p)
    }

    /// Load current drawn from the bus (to be subtracted from injections).
    fn load_current(&self, l: &Load, v: C) -> C {
        if v.norm() < LOW_VOLTAGE_THRESHOLD {
            let yl = C::new(l.p, -l.q) / (l.v_ref * l.v_ref);
            yl * v
        } else {
            C::new(l.p, -l.q) / v.conj()
        }
    }

    /// Air-gap electrical power of machine `i`.
    pub fn electrical_power(&self, i: usize, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let m = &self.machines[i];
        let delta = x[2 * i];
        let v = self.bus_voltage(y, m.bus);
        m.ep * (v.re * delta.sin() - v.im * delta.cos()) / m.xd_p
    }

    /// Solves the pre-disturbance power flow, back-computes each machine's
    /// internal EMF and mechanical power, anchors load fallback impedances,
    /// and returns the consistent equilibrium state at `t = 0`.
    pub fn solve_equilibrium(&mut self, cfg: &NewtonConfig) -> Result<SystemState> {
        let n = self.n_bus();
        let residual = |z: &DVector<f64>| -> DVector<f64> {
            let v: Vec<C> = (0..n).map(|k| C::new(z[2 * k], z[2 * k + 1])).collect();
            let mut r = DVector::zeros(2 * n);
            for k in 0..n {
                if k == self.slack {
                    r[2 * k] = v[k].re - self.slack_v.re;
                    r[2 * k + 1] = v[k].im - self.slack_v.im;
                    continue;
                }
                let inet: C = (0..n).map(|j| self.ybus[(k, j)] * v[j]).sum();
                // Constant-power draw at the power-flow stage.
                let il: C = self
                    .loads
                    .iter()
                    .filter(|l| l.bus == k)
                    .map(|l| C::new(l.p, -l.q) / v[k].conj())
                    .sum();
                if let Some(m) = self.machines.iter().find(|m| m.bus == k) {
                    let igen = inet + il;
                    let s = v[k] * igen.conj();
                    r[2 * k] = s.re - m.p_dispatch;
                    r[2 * k + 1] = v[k].norm_sqr() - m.vset * m.vset;
                } else {
                    let mis = inet + il;
                    r[2 * k] = mis.re;
                    r[2 * k + 1] = mis.im;
                }
            }
            r
        };
        let jacobian = |z: &DVector<f64>| fd_jacobian(z, 2 * n, |zp| residual(zp));

        let mut guess = DVector::zeros(2 * n);
        for k in 0..n {
            guess[2 * k] = 1.0;
        }
        guess[2 * self.slack] = self.slack_v.re;
        guess[2 * self.slack + 1] = self.slack_v.im;

        let mut pf_cfg = cfg.clone();
        pf_cfg.max_iter = pf_cfg.max_iter.max(50);
        // The equilibrium anchors every downstream comparison; solve it
        // well below the integration tolerances.
        pf_cfg.tol_residual = pf_cfg.tol_residual.min(1e-12);
        pf_cfg.tol_step = pf_cfg.tol_step.min(1e-12);
        let (z, report) = newton_solve(residual, jacobian, &guess, &pf_cfg).map_err(|e| {
            SolverError::InitializationFailure(format!("power flow failed: {e}"))
        })?;
        if !report.converged {
            return Err(SolverError::InitializationFailure(
                "power flow did not converge".into(),
            ));
        }

        let v: Vec<C> = (0..n).map(|k| C::new(z[2 * k], z[2 * k + 1])).collect();
        for l in &mut self.loads {
            l.v_ref = v[l.bus].norm();
        }
        let mut x = DVector::zeros(2 * self.machines.len());
        for i in 0..self.machines.len() {
            let k = self.machines[i].bus;
            let inet: C = (0..n).map(|j| self.ybus[(k, j)] * v[j]).sum();
            let il: C = self
                .loads
                .iter()
                .filter(|l| l.bus == k)
                .map(|l| C::new(l.p, -l.q) / v[k].conj())
                .sum();
            let igen = inet + il;
            let xd = self.machines[i].xd_p;
            let e = v[k] + C::new(0.0, xd) * igen;
            let m = &mut self.machines[i];
            m.ep = e.norm();
            let delta = e.im.atan2(e.re);
            m.pm = m.ep * (v[k].re * delta.sin() - v[k].im * delta.cos()) / xd;
            x[2 * i] = delta;
            x[2 * i + 1] = 1.0;
        }
        Ok(SystemState::new(0.0, x, z))
    }

    /// Reactive output of machine `i` at the given network solution, for
    /// verification against external power-flow results.
    pub fn machine_reactive_power(&self, i: usize, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let m = &self.machines[i];
        let v = self.bus_voltage(y, m.bus);
        let igen = self.machine_current(m, x[2 * i], v);
        (v * igen.conj()).im
    }
}

impl DaeSystem for PowerNetworkDae {
    fn n_states(&self) -> usize {
        2 * self.machines.len()
    }

    fn n_algebraic(&self) -> usize {
        2 * self.n_bus()
    }

    fn f(&self, _t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_states());
        for (i, m) in self.machines.iter().enumerate() {
            let omega = x[2 * i + 1];
            let pe = self.electrical_power(i, x, y);
            out[2 * i] = OMEGA_SYNC * (omega - 1.0);
            out[2 * i + 1] = (m.pm - pe - m.d * (omega - 1.0)) / (2.0 * m.h);
        }
        out
    }

    fn g(&self, _t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.n_bus();
        let v = self.voltages(y);
        let mut inj = vec![C::new(0.0, 0.0); n];
        for (i, m) in self.machines.iter().enumerate() {
            inj[m.bus] += self.machine_current(m, x[2 * i], v[m.bus]);
        }
        for l in &self.loads {
            inj[l.bus] -= self.load_current(l, v[l.bus]);
        }
        let mut r = DVector::zeros(2 * n);
        for k in 0..n {
            if k == self.slack {
                r[2 * k] = v[k].re - self.slack_v.re;
                r[2 * k + 1] = v[k].im - self.slack_v.im;
            } else {
                let flow: C = (0..n).map(|j| self.ybus[(k, j)] * v[j]).sum();
                let mis = inj[k] - flow;
                r[2 * k] = mis.re;
                r[2 * k + 1] = mis.im;
            }
        }
        r
    }

    fn jac_fx(&self, _t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        let ns = self.n_states();
        let mut jac = DMatrix::zeros(ns, ns);
        for (i, m) in self.machines.iter().enumerate() {
            let delta = x[2 * i];
            let v = self.bus_voltage(y, m.bus);
            let dpe_ddelta = m.ep * (v.re * delta.cos() + v.im * delta.sin()) / m.xd_p;
            jac[(2 * i, 2 * i + 1)] = OMEGA_SYNC;
            jac[(2 * i + 1, 2 * i)] = -dpe_ddelta / (2.0 * m.h);
            jac[(2 * i + 1, 2 * i + 1)] = -m.d / (2.0 * m.h);
        }
        jac
    }

    fn jac_fy(&self, _t: f64, x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.n_states(), self.n_algebraic());
        for (i, m) in self.machines.iter().enumerate() {
            let delta = x[2 * i];
            let s = m.ep / (m.xd_p * 2.0 * m.h);
            jac[(2 * i + 1, 2 * m.bus)] = -s * delta.sin();
            jac[(2 * i + 1, 2 * m.bus + 1)] = s * delta.cos();
        }
        jac
    }

    fn jac_gx(&self, _t: f64, x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.n_algebraic(), self.n_states());
        for (i, m) in self.machines.iter().enumerate() {
            if m.bus == self.slack {
                continue;
            }
            let delta = x[2 * i];
            // d(machine current)/d(delta): E' rotates with delta.
            jac[(2 * m.bus, 2 * i)] = m.ep * delta.cos() / m.xd_p;
            jac[(2 * m.bus + 1, 2 * i)] = m.ep * delta.sin() / m.xd_p;
        }
        jac
    }

    fn jac_gy(&self, _t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n_bus();
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            if k == self.slack {
                jac[(2 * k, 2 * k)] = 1.0;
                jac[(2 * k + 1, 2 * k + 1)] = 1.0;
                continue;
            }
            for j in 0..n {
                let yk = self.ybus[(k, j)];
                jac[(2 * k, 2 * j)] -= yk.re;
                jac[(2 * k, 2 * j + 1)] += yk.im;
                jac[(2 * k + 1, 2 * j)] -= yk.im;
                jac[(2 * k + 1, 2 * j + 1)] -= yk.re;
            }
        }
        for m in &self.machines {
            if m.bus == self.slack {
                continue;
            }
            let (rk, ck) = (2 * m.bus, 2 * m.bus);
            // d/dV of (E' - V)/(j x): -1/(j x) = j/x.
            jac[(rk, ck + 1)] += -1.0 / m.xd_p;
            jac[(rk + 1, ck)] += 1.0 / m.xd_p;
        }
        let _ = x;
        for l in &self.loads {
            if l.bus == self.slack {
                continue;
            }
            let v = self.bus_voltage(y, l.bus);
            let (rk, ck) = (2 * l.bus, 2 * l.bus);
            if v.norm() < LOW_VOLTAGE_THRESHOLD {
                let yl = C::new(l.p, -l.q) / (l.v_ref * l.v_ref);
                jac[(rk, ck)] -= yl.re;
                jac[(rk, ck + 1)] -= -yl.im;
                jac[(rk + 1, ck)] -= yl.im;
                jac[(rk + 1, ck + 1)] -= yl.re;
            } else {
                let u = v.norm_sqr();
                let ilre = (l.p * v.re + l.q * v.im) / u;
                let ilim = (l.p * v.im - l.q * v.re) / u;
                jac[(rk, ck)] -= l.p / u - 2.0 * v.re * ilre / u;
                jac[(rk, ck + 1)] -= l.q / u - 2.0 * v.im * ilre / u;
                jac[(rk + 1, ck)] -= -l.q / u - 2.0 * v.re * ilim / u;
                jac[(rk + 1, ck + 1)] -= l.p / u - 2.0 * v.im * ilim / u;
            }
        }
        jac
    }

    fn events(&self) -> &[Event] {
        &self.events
    }

    fn apply_event_action(&mut self, label: &str) -> Result<()> {
        let parts: Vec<&str> = label.split_whitespace().collect();
        let bad = || SolverError::Config(format!("unrecognized event label '{label}'"));
        match parts.as_slice() {
            ["fault_on", bus, adm] => {
                let id: usize = bus.parse().map_err(|_| bad())?;
                let g: f64 = adm.parse().map_err(|_| bad())?;
                let k = self
                    .bus_ids
                    .iter()
                    .position(|&b| b == id)
                    .ok_or_else(bad)?;
                self.shunts[k] = C::new(g, 0.0);
            }
            ["fault_off", bus] => {
                let id: usize = bus.parse().map_err(|_| bad())?;
                let k = self
                    .bus_ids
                    .iter()
                    .position(|&b| b == id)
                    .ok_or_else(bad)?;
                self.shunts[k] = C::new(0.0, 0.0);
            }
            ["trip", br] | ["close", br] => {
                let id: usize = br.parse().map_err(|_| bad())?;
                let on = parts[0] == "close";
                let b = self
                    .branches
                    .iter_mut()
                    .find(|b| b.id == id)
                    .ok_or_else(bad)?;
                b.in_service = on;
            }
            _ => return Err(bad()),
        }
        self.rebuild_ybus();
        Ok(())
    }

    fn state_names(&self) -> Vec<String> {
        self.machines
            .iter()
            .flat_map(|m| {
                let id = self.bus_ids[m.bus];
                [format!("delta_{id}"), format!("omega_{id}")]
            })
            .collect()
    }

    fn algebraic_names(&self) -> Vec<String> {
        self.bus_ids
            .iter()
            .flat_map(|id| [format!("vre_{id}"), format!("vim_{id}")])
            .collect()
    }
}
