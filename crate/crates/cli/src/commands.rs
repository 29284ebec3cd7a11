//! The subcommands, independent of argument parsing.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use g2c_core::numerics::grid::linspace;
use g2c_core::numerics::spline::CubicSpline;
use g2c_core::scalar::ScalarFn;
use g2c_core::structures::ProfileSet;
use g2c_core::verify::{
    compact_obstruction_demo, verify_profiles, Check, CompactOptions, CompactReport, GridSummary,
    VerificationReport, NO_EXTENSION,
};

use crate::config::{hex_digest, RunConfig};
use crate::model::{dpsi_residuals, ode_error, verify_options, Model};
use crate::table::{ProfileTable, TableMeta};
use crate::{fmt_f64, write_atomic, CliError, TOOL_VERSION};

pub fn table_grid(cfg: &RunConfig) -> Vec<f64> {
    linspace(0.0, cfg.grid.t_max, cfg.grid.points)
}

pub fn build_table(cfg: &RunConfig, model: &Model) -> Result<ProfileTable, CliError> {
    Ok(ProfileTable {
        meta: TableMeta {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: cfg.hash(),
            config: cfg.canonical_json(),
        },
        rows: model.rows(&table_grid(cfg))?,
    })
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// The report with the tool version and config hash attached.
pub fn report_json(report: &VerificationReport, config_hash: &str) -> Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["tool_version"] = json!(TOOL_VERSION);
    v["config_sha256"] = json!(config_hash);
    v
}

pub struct SolveOutput {
    pub table: ProfileTable,
    pub table_path: PathBuf,
    pub sidecar_path: PathBuf,
}

/// Solves, then writes the table and the JSON sidecar into `out`.
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<SolveOutput, CliError> {
    let model = Model::solve(cfg)?;
    write_solution(cfg, &model, out)
}

fn write_solution(cfg: &RunConfig, model: &Model, out: &Path) -> Result<SolveOutput, CliError> {
    let table = build_table(cfg, model)?;
    let table_path = out.join(&cfg.outputs.table);
    let sidecar_path = out.join(&cfg.outputs.sidecar);
    write_atomic(&table_path, table.to_csv().as_bytes())?;
    write_json(&sidecar_path, &model.sidecar(cfg))?;
    Ok(SolveOutput {
        table,
        table_path,
        sidecar_path,
    })
}

/// Solves and runs the full check suite; the report goes to `out`.
pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<(VerificationReport, PathBuf), CliError> {
    let model = Model::solve(cfg)?;
    let report = model.verify(&subject(cfg, &model), &verify_options(cfg))?;
    let path = out.join(&cfg.outputs.report);
    write_json(&path, &report_json(&report, &cfg.hash()))?;
    Ok((report, path))
}

fn subject(cfg: &RunConfig, model: &Model) -> String {
    let kind = serde_json::to_value(&cfg.profile).expect("serializes")["kind"]
        .as_str()
        .unwrap_or("profile")
        .to_string();
    format!("{kind}, b0 = {}", model.profiles().b0)
}

/// Re-checks a saved table against the run it claims to come from.
///
/// The embedded config is solved again. `A` and the residual column must be
/// reproduced exactly, and `D` must match the tabulated `A, B`. The suite then
/// runs on the profiles with `B_i` replaced by `B_i·s_i`, where `s_i`
/// interpolates the ratio of tabulated to recomputed `B_i`; an intact table
/// has `s_i ≡ 1` and gives the same report as a fresh run.
pub fn cmd_verify_table(
    path: &Path,
    out: Option<&Path>,
    tol: Option<f64>,
) -> Result<(VerificationReport, PathBuf), CliError> {
    let table = ProfileTable::read(path)?;
    let table_err = |msg: String| CliError::Table {
        path: path.to_path_buf(),
        msg,
    };
    if hex_digest(table.meta.config.as_bytes()) != table.meta.config_hash {
        return Err(table_err("embedded config does not match its sha256".into()));
    }
    let mut cfg = RunConfig::from_json(&table.meta.config)?;
    if let Some(t) = tol {
        cfg.tolerances.verify = t;
    }
    let model = Model::solve(&cfg)?;
    let ts: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let grid = GridSummary::of(&ts);

    let mut a_err = 0.0f64;
    let mut a_scale = 0.0f64;
    let mut d_err = 0.0f64;
    let mut ratios = [vec![], vec![], vec![]];
    for r in &table.rows {
        let (a, b) = model.profiles().values(r[0]);
        for i in 0..3 {
            a_err = a_err.max((r[1 + i] - a[i]).abs());
            a_scale = a_scale.max(a[i].abs());
            ratios[i].push(r[4 + i] / b[i]);
        }
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let v = r[1 + i] * r[4 + i] * r[1 + j] * r[4 + j];
            d_err = d_err.max((v - r[7 + k]).abs() / r[7 + k].abs().max(f64::MIN_POSITIVE));
        }
    }
    let mut checks = vec![
        Check::at_most("table_a", "tabulated A_i equal the configured profiles", a_err / a_scale, 1e-12, grid),
        Check::at_most("table_consistency", "A_iB_iA_jB_j = D_k in the table", d_err, 1e-9, grid),
    ];

    let exact = ratios.iter().all(|r| r.iter().all(|x| *x == 1.0));
    let profiles = if exact {
        model.profiles().clone()
    } else {
        let b = std::array::from_fn(|i| -> Result<ScalarFn, CliError> {
            let s = CubicSpline::not_a_knot(ts.clone(), ratios[i].clone())
                .map_err(|e| table_err(e.to_string()))?;
            Ok(model.profiles().b[i].mul(&s.into_scalar_fn()))
        });
        let [b1, b2, b3] = b;
        let p = model.profiles();
        ProfileSet::new(p.a.clone(), [b1?, b2?, b3?], p.b0, p.domain_end)
    };

    let res = dpsi_residuals(&profiles, &ts)?;
    let mut mismatches = 0usize;
    let mut worst = 0.0f64;
    for (r, x) in table.rows.iter().zip(&res) {
        let y = r[10];
        if x.to_bits() != y.to_bits() && !(x.is_nan() && y.is_nan()) {
            mismatches += 1;
            worst = worst.max(if x.is_finite() && y.is_finite() { (x - y).abs() } else { f64::INFINITY });
        }
    }
    checks.push(
        Check::at_most("table_residuals", "res_dpsi column reproduced bit for bit", worst, 0.0, grid)
            .with_metric("mismatched_rows", mismatches as f64),
    );

    let subject = format!("table {}", path.display());
    let opts = verify_options(&cfg);
    let suite = if exact {
        model.verify(&subject, &opts)?
    } else {
        verify_profiles(&subject, &profiles, &opts)
    };
    checks.extend(suite.checks);
    let report = VerificationReport::new(subject, checks);

    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let report_path = dir.join(&cfg.outputs.report);
    write_json(&report_path, &report_json(&report, &table.meta.config_hash))?;
    Ok((report, report_path))
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    pub b0: f64,
    pub passed: bool,
    pub max_res_dpsi: f64,
    pub d_tmax: [f64; 3],
    pub failed_checks: Vec<String>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn sum_d(&self) -> f64 {
        self.d_tmax.iter().sum()
    }
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "run", "b0", "passed", "max_res_dpsi", "sum_d_tmax", "D1_tmax", "D2_tmax", "D3_tmax", "failed_checks", "error",
];

/// Parses a comma-separated list of `b0` values.
pub fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    let vals = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Usage(format!("not a number in range: {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.is_empty() {
        return Err(CliError::Usage("parameter range is empty".into()));
    }
    Ok(vals)
}

fn sweep_one(base: &RunConfig, index: usize, b0: f64, out: &Path) -> SweepRow {
    let mut row = SweepRow {
        index,
        b0,
        passed: false,
        max_res_dpsi: f64::NAN,
        d_tmax: [f64::NAN; 3],
        failed_checks: vec![],
        error: None,
    };
    let mut cfg = base.clone();
    cfg.b0 = b0;
    let dir = out.join(format!("run_{index:03}"));
    let result = (|| -> Result<(), CliError> {
        let model = Model::solve(&cfg)?;
        write_solution(&cfg, &model, &dir)?;
        row.d_tmax = model.d(cfg.grid.t_max);
        let report = model.verify(&subject(&cfg, &model), &verify_options(&cfg))?;
        write_json(&dir.join(&cfg.outputs.report), &report_json(&report, &cfg.hash()))?;
        row.passed = report.passed;
        row.max_res_dpsi = report.get("coclosed").map_or(f64::NAN, |c| c.residual);
        row.failed_checks = report.failures().map(|c| c.name.clone()).collect();
        Ok(())
    })();
    if let Err(e) = result {
        row.passed = false;
        row.error = Some(e.to_string());
    }
    row
}

/// Solves and verifies one run per `b0` value, `threads` at a time, and
/// writes `summary.csv` in input order. Failing runs are recorded and do
/// not stop the sweep.
pub fn cmd_sweep(
    base: &RunConfig,
    b0s: &[f64],
    out: &Path,
    threads: Option<usize>,
) -> Result<(Vec<SweepRow>, PathBuf), CliError> {
    if b0s.is_empty() {
        return Err(CliError::Usage("parameter range is empty".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        b0s.par_iter()
            .enumerate()
            .map(|(i, &b0)| sweep_one(base, i, b0, out))
            .collect()
    });

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS).expect("write to memory");
    for r in &rows {
        let mut rec = vec![
            r.index.to_string(),
            fmt_f64(r.b0),
            r.passed.to_string(),
            fmt_f64(r.max_res_dpsi),
            fmt_f64(r.sum_d()),
        ];
        rec.extend(r.d_tmax.iter().map(|x| fmt_f64(*x)));
        rec.push(r.failed_checks.join(";"));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).expect("write to memory");
    }
    let path = out.join("summary.csv");
    write_atomic(&path, &w.into_inner().expect("flush to memory"))?;
    Ok((rows, path))
}

/// Integrates towards `t = 1` where the `A_i` vanish and writes the
/// obstruction report to `out/compact.json`.
pub fn cmd_compact_demo(cfg: &RunConfig, out: &Path) -> Result<(CompactReport, PathBuf), CliError> {
    let defaults = CompactOptions::default();
    let mut cfg = cfg.clone();
    cfg.grid.t_max = 1.0 - defaults.eps_min;
    cfg.validate()?;
    let a = cfg.a_profiles().ok_or_else(|| {
        CliError::Config("compact-demo needs an odd_poly, cone or sine profile".into())
    })?;
    for (i, p) in a.iter().enumerate() {
        for t in linspace(0.0, 1.0, 1001).into_iter().skip(1).take(999) {
            let v = p.f.eval(t);
            if !(v > 0.0) {
                return Err(CliError::Config(format!(
                    "A{} must be positive on (0, 1); A{}({t}) = {v}",
                    i + 1,
                    i + 1
                )));
            }
        }
    }
    let opts = CompactOptions {
        a,
        b0: cfg.b0,
        ..defaults
    };
    let report = compact_obstruction_demo(&opts).map_err(ode_error)?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["schema_version"] = json!(report.report.schema_version);
    v["tool_version"] = json!(TOOL_VERSION);
    v["config_sha256"] = json!(cfg.hash());
    let path = out.join("compact.json");
    write_json(&path, &v)?;
    Ok((report, path))
}

pub fn compact_passed(r: &CompactReport) -> bool {
    r.verdict == NO_EXTENSION
}

/// Closed-form families: table, sidecar and report.
pub fn cmd_special(cfg: &RunConfig, out: &Path) -> Result<(SolveOutput, VerificationReport, PathBuf), CliError> {
    let model = Model::closed(cfg)?;
    let solved = write_solution(cfg, &model, out)?;
    let report = model.verify(&subject(cfg, &model), &verify_options(cfg))?;
    let path = out.join(&cfg.outputs.report);
    write_json(&path, &report_json(&report, &cfg.hash()))?;
    Ok((solved, report, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_values("-1").unwrap(), vec![-1.0]);
        assert!(matches!(parse_values(""), Err(CliError::Usage(_))));
        assert!(matches!(parse_values(" , "), Err(CliError::Usage(_))));
        assert!(parse_values("1,x").is_err());
    }

    #[test]
    fn empty_sweep_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let e = cmd_sweep(&RunConfig::default(), &[], dir.path(), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
