//! Multi-machine classical-model system built from a parsed case file.

use nalgebra::Complex;

use crate::dae::{Event, SystemState};
use crate::error::{Result, SolverError};
use crate::io::case::CaseData;
use crate::models::network::{Branch, Load, Machine, PowerNetworkDae};
use crate::nonlinear::NewtonConfig;

/// Builds and initializes the system described by `case`.
pub fn build_multimachine(case: &CaseData) -> Result<(PowerNetworkDae, SystemState)> {
    let index_of = |id: usize| -> Result<usize> {
        case.buses
            .iter()
            .position(|&b| b == id)
            .ok_or_else(|| SolverError::Config(format!("case references unknown bus {id}")))
    };
    let branches = case
        .branches
        .iter()
        .map(|&(id, from, to, r, x)| {
            Ok(Branch {
                id,
                from: index_of(from)?,
                to: index_of(to)?,
                r,
                x,
                in_service: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let machines = case
        .machines
        .iter()
        .map(|&(bus, h, d, xd_p, p, vset)| {
            Ok(Machine {
                bus: index_of(bus)?,
                h,
                d,
                xd_p,
                p_dispatch: p,
                vset,
                ep: 0.0,
                pm: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let loads = case
        .loads
        .iter()
        .map(|&(bus, p, q)| {
            Ok(Load {
                bus: index_of(bus)?,
                p,
                q,
                v_ref: 1.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let events = case
        .events
        .iter()
        .map(|(t, label)| Event::new(*t, label.clone()))
        .collect();
    let mut sys = PowerNetworkDae::new(
        case.buses.clone(),
        case.slack_bus,
        Complex::new(case.slack_v.0, case.slack_v.1),
        branches,
        machines,
        loads,
        events,
    )?;
    let state = sys
        .solve_equilibrium(&NewtonConfig::default())
        .map_err(|e| SolverError::InitializationFailure(format!("case initialization: {e}")))?;
    Ok((sys, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dae::DaeSystem;
    use crate::io::case::parse_case;
    use crate::models::smib::{build_smib, SmibParams};
    use approx::assert_abs_diff_eq;

    /// The default single-machine case expressed as a case file.
    const SMIB_CASE: &str = "\
[bus]
1
2 slack 1.0 0.0
3
[branch]
1 1 2 0.0 0.5
2 1 3 0.0 0.3
3 2 3 0.0 0.2
[machine]
1 3.0 0.0 0.3 0.9 1.0
[load]
3 0.8 0.2
[event]
0.5 fault_on 3 10000
0.6 fault_off 3
";

    #[test]
    fn single_machine_case_degenerates_to_smib() {
        let (sys_a, st_a) = build_multimachine(&parse_case(SMIB_CASE).unwrap()).unwrap();
        let (sys_b, st_b) = build_smib(&SmibParams::default()).unwrap();
        assert_abs_diff_eq!((&st_a.x - &st_b.x).abs().max(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!((&st_a.y - &st_b.y).abs().max(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sys_a.machines[0].ep, sys_b.machines[0].ep, epsilon = 1e-10);
        assert_abs_diff_eq!(sys_a.machines[0].pm, sys_b.machines[0].pm, epsilon = 1e-10);
        assert_eq!(sys_a.events().len(), 2);
    }

    #[test]
    fn unknown_bus_reference_rejected() {
        let bad = "[bus]\n1 slack 1 0\n[branch]\n1 1 7 0.0 0.5\n";
        let case = parse_case(bad).unwrap();
        assert!(build_multimachine(&case).is_err());
    }
}
