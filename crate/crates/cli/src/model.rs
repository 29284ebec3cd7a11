//! A configured run as profile functions of `t`.

use serde_json::{json, Value};

use g2c_core::analytic::{bryant_salamon, cone_family, symmetric_solution, AnalyticError};
use g2c_core::numerics::grid::geomspace;
use g2c_core::numerics::rk::RkOptions;
use g2c_core::ode::{solve, CoclosedSystem, DSolution, OdeError, SolveOptions};
use g2c_core::scalar::ScalarFn;
use g2c_core::structures::{build_g2, ProfileSet};
use g2c_core::verify::{coclosed_residual, verify_profiles, verify_solution, VerificationReport, VerifyOptions, SCHEMA_VERSION};

use crate::config::{ProfileSpec, RunConfig};
use crate::table::Row;
use crate::{CliError, TOOL_VERSION};

pub enum Model {
    Ode { sol: DSolution, profiles: ProfileSet },
    Closed { profiles: ProfileSet, d: Option<[ScalarFn; 3]> },
}

pub(crate) fn ode_error(e: OdeError) -> CliError {
    match e {
        OdeError::InvalidSystem(msg) => CliError::Config(msg),
        other => CliError::Numerical(other.to_string()),
    }
}

fn analytic_error(e: AnalyticError) -> CliError {
    match e {
        AnalyticError::Invalid(_) | AnalyticError::RadiusBelowOne(_) | AnalyticError::NoLinearAsymptote(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    }
}

pub fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        t_max: cfg.grid.t_max,
        t_switch: cfg.grid.t_switch,
        series_order: cfg.grid.series_order,
        rk: RkOptions {
            rtol: cfg.tolerances.ode_rel,
            atol: cfg.tolerances.ode_abs,
            ..Default::default()
        },
    }
}

pub fn verify_options(cfg: &RunConfig) -> VerifyOptions {
    VerifyOptions {
        t_max: Some(cfg.grid.t_max),
        coclosed_tol: cfg.tolerances.verify,
        ..Default::default()
    }
}

impl Model {
    /// Builds the run. Polynomial, cone and sine profiles go through the
    /// singular ODE solver; the other families have their own constructions.
    pub fn solve(cfg: &RunConfig) -> Result<Model, CliError> {
        cfg.validate()?;
        match cfg.a_profiles() {
            Some(a) => {
                let sys = CoclosedSystem::new(a, cfg.b0, cfg.domain_end()).map_err(ode_error)?;
                let sol = solve(&sys, &solve_options(cfg)).map_err(ode_error)?;
                let profiles = sol.profile_set().map_err(ode_error)?;
                Ok(Model::Ode { sol, profiles })
            }
            None => Self::closed(cfg),
        }
    }

    /// Closed-form or quadrature construction; the cone uses its closed form.
    pub fn closed(cfg: &RunConfig) -> Result<Model, CliError> {
        cfg.validate()?;
        let t_max = cfg.grid.t_max;
        match &cfg.profile {
            ProfileSpec::Cone => Ok(Model::Closed {
                profiles: cone_family(cfg.b0),
                d: None,
            }),
            ProfileSpec::Symmetric { a1 } => {
                let s = symmetric_solution(a1.a_profile(), cfg.b0, t_max).map_err(analytic_error)?;
                let d = s.d_fn();
                Ok(Model::Closed {
                    profiles: s.profile_set(),
                    d: Some([d.clone(), d.clone(), d]),
                })
            }
            ProfileSpec::BryantSalamon { r_max, points } => {
                let mut grid = vec![1.0];
                grid.extend(geomspace(1.0 + 1e-8, *r_max, points - 1));
                let bs = bryant_salamon(&grid).map_err(analytic_error)?;
                if t_max > bs.t_max() {
                    return Err(CliError::Config(format!(
                        "t_max = {t_max} exceeds the tabulated range t(r_max) = {}",
                        bs.t_max()
                    )));
                }
                Ok(Model::Closed {
                    profiles: bs.profile_set(),
                    d: None,
                })
            }
            other => Err(CliError::Config(format!(
                "profile {} has no closed form",
                serde_json::to_value(other).expect("serializes")["kind"]
            ))),
        }
    }

    pub fn profiles(&self) -> &ProfileSet {
        match self {
            Model::Ode { profiles, .. } | Model::Closed { profiles, .. } => profiles,
        }
    }

    pub fn d(&self, t: f64) -> [f64; 3] {
        match self {
            Model::Ode { sol, .. } => sol.d(t),
            Model::Closed { d: Some(d), .. } => std::array::from_fn(|i| d[i].eval(t)),
            Model::Closed { profiles, d: None } => {
                let (a, b) = profiles.values(t);
                std::array::from_fn(|k| {
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    a[i] * b[i] * a[j] * b[j]
                })
            }
        }
    }

    /// Table rows at `ts`; `res_dpsi` is undefined (NaN) at `t = 0`.
    pub fn rows(&self, ts: &[f64]) -> Result<Vec<Row>, CliError> {
        let res = dpsi_residuals(self.profiles(), ts)?;
        Ok(ts
            .iter()
            .zip(res)
            .map(|(&t, r)| {
                let (a, b) = self.profiles().values(t);
                let d = self.d(t);
                [t, a[0], a[1], a[2], b[0], b[1], b[2], d[0], d[1], d[2], r]
            })
            .collect())
    }

    pub fn verify(&self, subject: &str, opts: &VerifyOptions) -> Result<VerificationReport, CliError> {
        match self {
            Model::Ode { sol, .. } => verify_solution(subject, sol, opts).map_err(ode_error),
            Model::Closed { profiles, .. } => Ok(verify_profiles(subject, profiles, opts)),
        }
    }

    /// Series data and run metadata written next to the table.
    pub fn sidecar(&self, cfg: &RunConfig) -> Value {
        let config: Value = serde_json::from_str(&cfg.canonical_json()).expect("valid json");
        let mut v = json!({
            "schema_version": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "config_sha256": cfg.hash(),
            "config": config,
            "b0": self.profiles().b0,
        });
        match self {
            Model::Ode { sol, .. } => {
                let sys = sol.system();
                let boot = sol.bootstrap();
                let b2: Vec<f64> = sol.b_taylor().iter().map(|c| c.get(2).copied().unwrap_or(0.0)).collect();
                let stats = sol.stats();
                v["model"] = json!("ode");
                v["bootstrap"] = json!({
                    "order": boot.order,
                    "t_switch": boot.t_switch,
                    "a3": sys.a3(),
                    "d4": boot.d4(),
                    "b2": b2,
                    "d_series": boot.coeffs,
                });
                v["switch_mismatch"] = json!(sol.switch_mismatch());
                v["integrator"] = json!({
                    "accepted": stats.accepted,
                    "rejected": stats.rejected,
                    "evaluations": stats.evaluations,
                });
            }
            Model::Closed { .. } => {
                v["model"] = json!("closed_form");
                v["bootstrap"] = Value::Null;
            }
        }
        v
    }
}

/// Relative `dψ` residual of `p` at each `t`; NaN where `t ≤ 0`.
pub fn dpsi_residuals(p: &ProfileSet, ts: &[f64]) -> Result<Vec<f64>, CliError> {
    let pos: Vec<f64> = ts.iter().copied().filter(|t| *t > 0.0).collect();
    let r = coclosed_residual(&build_g2(p), &pos).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut it = r.values.into_iter();
    Ok(ts
        .iter()
        .map(|t| if *t > 0.0 { it.next().unwrap_or(f64::NAN) } else { f64::NAN })
        .collect())
}
