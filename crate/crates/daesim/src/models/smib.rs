//! Single machine vs. infinite bus on a 3-bus network.
//!
//! Bus 1 carries the machine, bus 2 is the infinite (slack) bus, bus 3 the
//! load. Default disturbance: a solid fault (shunt conductance 1e4 pu) at
//! bus 3 from t = 0.5 s, cleared at t = 0.6 s. The case is lossless and
//! undamped by default, so post-fault swings persist.

use nalgebra::Complex;

use crate::dae::{Event, SystemState};
use crate::error::Result;
use crate::models::network::{Branch, Load, Machine, PowerNetworkDae};
use crate::nonlinear::NewtonConfig;

#[derive(Debug, Clone)]
pub struct SmibParams {
    pub h: f64,
    pub d: f64,
    pub xd_p: f64,
    /// Infinite-bus voltage (real, angle reference).
    pub v2: f64,
    pub x12: f64,
    pub x13: f64,
    pub x23: f64,
    pub p_load: f64,
    pub q_load: f64,
    /// Machine active-power dispatch.
    pub p_dispatch: f64,
    /// Machine terminal voltage setpoint.
    pub vset: f64,
    pub fault_on: f64,
    pub fault_off: f64,
    /// Fault shunt conductance at bus 3.
    pub fault_admittance: f64,
}

impl Default for SmibParams {
    fn default() -> Self {
        Self {
            h: 3.0,
            d: 0.0,
            xd_p: 0.3,
            v2: 1.0,
            x12: 0.5,
            x13: 0.3,
            x23: 0.2,
            p_load: 0.8,
            q_load: 0.2,
            p_dispatch: 0.9,
            vset: 1.0,
            fault_on: 0.5,
            fault_off: 0.6,
            fault_admittance: 1e4,
        }
    }
}

/// Builds the initialized system; the returned state is the pre-fault
/// equilibrium at `t = 0`.
pub fn build_smib(params: &SmibParams) -> Result<(PowerNetworkDae, SystemState)> {
    let branches = vec![
        Branch { id: 1, from: 0, to: 1, r: 0.0, x: params.x12, in_service: true },
        Branch { id: 2, from: 0, to: 2, r: 0.0, x: params.x13, in_service: true },
        Branch { id: 3, from: 1, to: 2, r: 0.0, x: params.x23, in_service: true },
    ];
    let machines = vec![Machine {
        bus: 0,
        h: params.h,
        d: params.d,
        xd_p: params.xd_p,
        p_dispatch: params.p_dispatch,
        vset: params.vset,
        ep: 0.0,
        pm: 0.0,
    }];
    let loads = vec![Load {
        bus: 2,
        p: params.p_load,
        q: params.q_load,
        v_ref: 1.0,
    }];
    let events = vec![
        Event::new(
            params.fault_on,
            format!("fault_on 3 {}", params.fault_admittance),
        ),
        Event::new(params.fault_off, "fault_off 3"),
    ];
    let mut sys = PowerNetworkDae::new(
        vec![1, 2, 3],
        2,
        Complex::new(params.v2, 0.0),
        branches,
        machines,
        loads,
        events,
    )?;
    let state = sys.solve_equilibrium(&NewtonConfig::default())?;
    Ok((sys, state))
}
