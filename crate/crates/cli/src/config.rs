//! Run configuration: a JSON document describing one solve/verify run.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use g2c_core::ode::AProfile;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// Odd coefficients `[c₁, c₃, c₅, …]` of each `A_i`.
    OddPoly { a: [Vec<f64>; 3] },
    Cone,
    /// `A_i = sin(kt)/(2k)` on `[0, π/k)`.
    Sine { k: f64 },
    /// `A₁ = A₂ = A₃`, solved by quadrature.
    Symmetric { a1: A1Spec },
    /// The complete torsion-free metric, tabulated on `r ∈ [1, r_max]`.
    BryantSalamon {
        #[serde(default = "default_r_max")]
        r_max: f64,
        #[serde(default = "default_r_points")]
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum A1Spec {
    OddPoly { coefficients: Vec<f64> },
    Cone,
    Sine { k: f64 },
    /// `a·t + (1/2 − a)·t/(1 + t²)`.
    RationalLinear { a: f64 },
}

fn default_r_max() -> f64 {
    1e3
}

fn default_r_points() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    /// Rows of the output table, evenly spaced on `[0, t_max]`.
    pub points: usize,
    pub t_switch: f64,
    pub series_order: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            t_max: 10.0,
            points: 201,
            t_switch: 1e-2,
            series_order: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Integrator tolerances; tighter than the library defaults so that the
    /// `b_{i,2}` fit in the check suite stays well inside its bound.
    pub ode_rel: f64,
    pub ode_abs: f64,
    /// Bound on the relative `dψ` residual.
    pub verify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode_rel: 1e-12,
            ode_abs: 1e-14,
            verify: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// Output directory, relative to the config file.
    pub dir: PathBuf,
    pub table: String,
    pub sidecar: String,
    pub report: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: PathBuf::from("out"),
            table: "profile.csv".into(),
            sidecar: "solution.json".into(),
            report: "report.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSpec,
    #[serde(default = "default_b0")]
    pub b0: f64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_b0() -> f64 {
    1.0
}

/// The part of a config that determines the numbers in the outputs.
#[derive(Serialize)]
struct Canonical<'a> {
    profile: &'a ProfileSpec,
    b0: f64,
    grid: &'a GridConfig,
    tolerances: &'a Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::with_profile(ProfileSpec::Cone)
    }
}

impl RunConfig {
    pub fn with_profile(profile: ProfileSpec) -> Self {
        RunConfig {
            profile,
            b0: 1.0,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            outputs: Outputs::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a config and resolves the output directory against the file's
    /// location.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if cfg.outputs.dir.is_relative() {
            let base = path.parent().unwrap_or(Path::new(""));
            cfg.outputs.dir = base.join(&cfg.outputs.dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.b0.is_finite() && self.b0 != 0.0) {
            return bad("b0 must be nonzero".into());
        }
        let g = &self.grid;
        if !(g.t_switch > 0.0 && g.t_max > g.t_switch && g.t_max.is_finite()) {
            return bad(format!(
                "t_max > t_switch > 0 violated (t_max = {}, t_switch = {})",
                g.t_max, g.t_switch
            ));
        }
        if g.points < 2 {
            return bad("grid.points must be at least 2".into());
        }
        if g.series_order < 4 {
            return bad(format!("grid.series_order must be at least 4, got {}", g.series_order));
        }
        let tol = &self.tolerances;
        for (name, v) in [("ode_rel", tol.ode_rel), ("ode_abs", tol.ode_abs), ("verify", tol.verify)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerances.{name} must be positive"));
            }
        }
        match &self.profile {
            ProfileSpec::OddPoly { a } => {
                for (i, c) in a.iter().enumerate() {
                    check_odd_poly(c, &format!("A{}", i + 1))?;
                }
            }
            ProfileSpec::Cone => {}
            ProfileSpec::Sine { k } => check_sine(*k, g.t_max)?,
            ProfileSpec::Symmetric { a1 } => match a1 {
                A1Spec::OddPoly { coefficients } => check_odd_poly(coefficients, "A1")?,
                A1Spec::Cone => {}
                A1Spec::Sine { k } => check_sine(*k, g.t_max)?,
                A1Spec::RationalLinear { a } => {
                    if !(*a > 0.0 && a.is_finite()) {
                        return bad(format!("rational_linear slope must be positive, got {a}"));
                    }
                }
            },
            ProfileSpec::BryantSalamon { r_max, points } => {
                if !(*r_max > 1.0 && r_max.is_finite()) || *points < 4 {
                    return bad("bryant_salamon needs r_max > 1 and at least 4 points".into());
                }
            }
        }
        Ok(())
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&Canonical {
            profile: &self.profile,
            b0: self.b0,
            grid: &self.grid,
            tolerances: &self.tolerances,
        })
        .expect("config serializes")
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex encoded.
    pub fn hash(&self) -> String {
        hex_digest(self.canonical_json().as_bytes())
    }

    /// The three `A_i` when the profile is driven through the ODE solver.
    pub fn a_profiles(&self) -> Option<[AProfile; 3]> {
        match &self.profile {
            ProfileSpec::OddPoly { a } => Some([0, 1, 2].map(|i| AProfile::odd_poly(&a[i]))),
            ProfileSpec::Cone => Some([AProfile::cone(), AProfile::cone(), AProfile::cone()]),
            ProfileSpec::Sine { k } => {
                let s = AProfile::sine(*k);
                Some([s.clone(), s.clone(), s])
            }
            _ => None,
        }
    }

    /// Right end of the domain on which the `A_i` are positive.
    pub fn domain_end(&self) -> f64 {
        match &self.profile {
            ProfileSpec::Sine { k } | ProfileSpec::Symmetric { a1: A1Spec::Sine { k } } => PI / k,
            _ => f64::INFINITY,
        }
    }
}

impl A1Spec {
    pub fn a_profile(&self) -> AProfile {
        match self {
            A1Spec::OddPoly { coefficients } => AProfile::odd_poly(coefficients),
            A1Spec::Cone => AProfile::cone(),
            A1Spec::Sine { k } => AProfile::sine(*k),
            A1Spec::RationalLinear { a } => AProfile::rational_linear(*a),
        }
    }
}

fn check_odd_poly(c: &[f64], name: &str) -> Result<(), CliError> {
    if c.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Config(format!("{name} has a non-finite coefficient")));
    }
    if c.first() != Some(&0.5) {
        return Err(CliError::Config(format!(
            "{name} must have leading coefficient 1/2 (got {:?})",
            c.first()
        )));
    }
    Ok(())
}

fn check_sine(k: f64, t_max: f64) -> Result<(), CliError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(CliError::Config(format!("sine frequency must be positive, got {k}")));
    }
    if t_max >= PI / k {
        return Err(CliError::Config(format!(
            "t_max = {t_max} must lie inside the domain [0, π/k) = [0, {})",
            PI / k
        )));
    }
    Ok(())
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
