//! Scenario configuration: flat `key = value` lines with dotted keys.
//!
//! ```text
//! # which model to run
//! model = smib                 # smib | scalar | case
//! model.case_path = cases/three_machine.case   # required for model = case
//! model.scalar.a = -2.0        # scalar-model parameters
//! model.scalar.b = 1.0
//! model.scalar.c = 1.0
//! model.scalar.x0 = 1.0
//! solver = pc-predict          # itm | pc-hold | pc-predict
//! controller.rtol = 1e-6
//! controller.atol = 1e-8
//! controller.h_min = 1e-7
//! controller.h_max = 0.1
//! h0 = 1e-3
//! t_end = 10.0
//! check.epsilon = 1e-4         # enables the consistency check for pc-predict
//! check.max_recorrections = 3
//! out_dir = out
//! seed = 0                     # reserved, unused by the solvers
//! ```
//!
//! Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use crate::control::{AlgebraicCheck, PiController};
use crate::error::{Result, SolverError};
use crate::integrate::{SchemeKind, SolverScheme};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSelector {
    Smib,
    Scalar { a: f64, b: f64, c: f64, x0: f64 },
    Case(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub model: ModelSelector,
    pub solver: SchemeKind,
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub h0: f64,
    pub t_end: f64,
    /// Consistency-check threshold; `None` keeps the scheme's default
    /// (on at 1e-4 for pc-hold, off for pc-predict and itm).
    pub epsilon: Option<f64>,
    pub max_recorrections: usize,
    pub out_dir: Option<PathBuf>,
    /// Reserved for stochastic scenarios; the solvers never read it.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let ctl = PiController::default();
        Self {
            model: ModelSelector::Smib,
            solver: SchemeKind::SimultaneousItm,
            rtol: ctl.rtol,
            atol: ctl.atol,
            h_min: ctl.h_min,
            h_max: ctl.h_max,
            h0: 1e-3,
            t_end: 10.0,
            epsilon: None,
            max_recorrections: AlgebraicCheck::default().max_recorrections,
            out_dir: None,
            seed: 0,
        }
    }
}

pub fn parse_scheme_name(name: &str) -> Result<SchemeKind> {
    match name {
        "itm" => Ok(SchemeKind::SimultaneousItm),
        "pc-hold" => Ok(SchemeKind::PartitionedHold),
        "pc-predict" => Ok(SchemeKind::PartitionedPredict),
        _ => Err(SolverError::Config(format!(
            "unknown solver '{name}' (expected itm, pc-hold or pc-predict)"
        ))),
    }
}

impl ScenarioConfig {
    pub fn controller(&self) -> PiController {
        let mut ctl = PiController::default();
        ctl.rtol = self.rtol;
        ctl.atol = self.atol;
        ctl.h_min = self.h_min;
        ctl.h_max = self.h_max;
        ctl
    }

    pub fn scheme(&self) -> SolverScheme {
        let mut scheme = SolverScheme::for_kind(self.solver);
        match self.solver {
            SchemeKind::PartitionedHold => {
                let mut check = AlgebraicCheck::default();
                if let Some(eps) = self.epsilon {
                    check.epsilon = eps;
                }
                check.max_recorrections = self.max_recorrections;
                scheme.algebraic_check = Some(check);
            }
            SchemeKind::PartitionedPredict => {
                if let Some(eps) = self.epsilon {
                    scheme.algebraic_check = Some(AlgebraicCheck {
                        epsilon: eps,
                        max_recorrections: self.max_recorrections,
                    });
                }
            }
            SchemeKind::SimultaneousItm => {}
        }
        scheme
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("controller.rtol", self.rtol),
            ("controller.atol", self.atol),
            ("controller.h_min", self.h_min),
            ("controller.h_max", self.h_max),
            ("h0", self.h0),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::Config(format!("{key} must be positive, got {v}")));
            }
        }
        if self.h_min > self.h_max {
            return Err(SolverError::Config(
                "controller.h_min exceeds controller.h_max".into(),
            ));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SolverError::Config(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(SolverError::Config(format!(
                    "check.epsilon must be positive, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    let mut scalar = (-2.0, 1.0, 1.0, 1.0);
    let mut model_name: Option<String> = None;
    let mut case_path: Option<PathBuf> = None;

    let bad_value = |key: &str, val: &str| {
        SolverError::Config(format!("bad value '{val}' for key '{key}'"))
    };
    let parse_f64 = |key: &str, val: &str| -> Result<f64> {
        val.parse().map_err(|_| bad_value(key, val))
    };

    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| {
            SolverError::Config(format!("line {}: expected `key = value`", i + 1))
        })?;
        let (key, val) = (key.trim(), val.trim());
        match key {
            "model" => model_name = Some(val.to_string()),
            "model.case_path" => case_path = Some(PathBuf::from(val)),
            "model.scalar.a" => scalar.0 = parse_f64(key, val)?,
            "model.scalar.b" => scalar.1 = parse_f64(key, val)?,
            "model.scalar.c" => scalar.2 = parse_f64(key, val)?,
            "model.scalar.x0" => scalar.3 = parse_f64(key, val)?,
            "solver" => cfg.solver = parse_scheme_name(val)?,
            "controller.rtol" => cfg.rtol = parse_f64(key, val)?,
            "controller.atol" => cfg.atol = parse_f64(key, val)?,
            "controller.h_min" => cfg.h_min = parse_f64(key, val)?,
            "controller.h_max" => cfg.h_max = parse_f64(key, val)?,
            "h0" => cfg.h0 = parse_f64(key, val)?,
            "t_end" => cfg.t_end = parse_f64(key, val)?,
            "check.epsilon" => cfg.epsilon = Some(parse_f64(key, val)?),
            "check.max_recorrections" => {
                cfg.max_recorrections = val.parse().map_err(|_| bad_value(key, val))?
            }
            "out_dir" => cfg.out_dir = Some(PathBuf::from(val)),
            "seed" => cfg.seed = val.parse().map_err(|_| bad_value(key, val))?,
            _ => {
                return Err(SolverError::Config(format!(
                    "unknown configuration key '{key}'"
                )))
            }
        }
    }

    cfg.model = match model_name.as_deref() {
        None | Some("smib") => ModelSelector::Smib,
        Some("scalar") => ModelSelector::Scalar {
            a: scalar.0,
            b: scalar.1,
            c: scalar.2,
            x0: scalar.3,
        },
        Some("case") => ModelSelector::Case(case_path.ok_or_else(|| {
            SolverError::Config("model = case requires model.case_path".into())
        })?),
        Some(other) => {
            return Err(SolverError::Config(format!(
                "unknown model '{other}' (expected smib, scalar or case)"
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|source| SolverError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_config() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.model, ModelSelector::Smib);
        assert_eq!(cfg.solver, SchemeKind::SimultaneousItm);
        assert_eq!(cfg.t_end, 10.0);
    }

    #[test]
    fn full_round_of_keys() {
        let cfg = parse_config(
            "model = scalar\nmodel.scalar.a = -1.0\nsolver = pc-hold\n\
             controller.rtol = 1e-7\ncheck.epsilon = 1e-6\nt_end = 2.5\nseed = 7\n",
        )
        .unwrap();
        assert!(matches!(cfg.model, ModelSelector::Scalar { a, .. } if a == -1.0));
        assert_eq!(cfg.solver, SchemeKind::PartitionedHold);
        assert_eq!(cfg.rtol, 1e-7);
        assert_eq!(cfg.epsilon, Some(1e-6));
        assert_eq!(cfg.seed, 7);
        let scheme = cfg.scheme();
        assert_eq!(scheme.algebraic_check.unwrap().epsilon, 1e-6);
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let err = parse_config("controler.rtol = 1e-6\n").unwrap_err();
        assert!(err.to_string().contains("controler.rtol"));
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse_config("t_end = -1\n").is_err());
        assert!(parse_config("controller.rtol = 0\n").is_err());
        assert!(parse_config("solver = rk4\n").is_err());
        assert!(parse_config("model = case\n").is_err());
        assert!(parse_config("controller.h_min = 1.0\ncontroller.h_max = 0.5\n").is_err());
    }

    #[test]
    fn predict_check_off_by_default_configurable_on() {
        let off = parse_config("solver = pc-predict\n").unwrap();
        assert!(off.scheme().algebraic_check.is_none());
        let on = parse_config("solver = pc-predict\ncheck.epsilon = 1e-4\n").unwrap();
        assert_eq!(on.scheme().algebraic_check.unwrap().epsilon, 1e-4);
    }
}
