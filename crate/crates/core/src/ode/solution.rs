use std::sync::Arc;

use serde::Serialize;

use super::series::{b_series, series_coefficients};
use super::{rhs_from_values, second_derivative, CoclosedSystem, OdeError};
use crate::numerics::rk::{self, RkError, RkOptions, RkStats};
use crate::scalar::{poly_derivative, poly_eval, Evaluator, ScalarFn, ScalarLeaf};
use crate::structures::ProfileSet;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub t_max: f64,
    pub t_switch: f64,
    pub series_order: usize,
    pub rk: RkOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            t_max: 10.0,
            t_switch: 1e-2,
            series_order: 8,
            rk: RkOptions::default(),
        }
    }
}

/// Even Taylor coefficients of `D_i` used on `[0, t_switch]`.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesBootstrap {
    pub order: usize,
    /// Coefficients indexed by power.
    pub coeffs: [Vec<f64>; 3],
    pub t_switch: f64,
}

/// `D`, `Ḋ`, `D̈` at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivState {
    pub d: [f64; 3],
    pub d_dot: [f64; 3],
    pub d_ddot: [f64; 3],
}

/// An accepted integrator step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Node {
    pub t: f64,
    #[serde(flatten)]
    pub state: DerivState,
}

impl SeriesBootstrap {
    pub fn state(&self, t: f64) -> DerivState {
        let each = |k: usize| {
            std::array::from_fn(|i| {
                let mut c = self.coeffs[i].clone();
                for _ in 0..k {
                    c = poly_derivative(&c);
                }
                poly_eval(&c, t)
            })
        };
        DerivState {
            d: each(0),
            d_dot: each(1),
            d_ddot: each(2),
        }
    }

    /// Coefficients of `t⁴`.
    pub fn d4(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.coeffs[i].get(4).copied().unwrap_or(0.0))
    }
}

struct SolutionData {
    system: CoclosedSystem,
    bootstrap: SeriesBootstrap,
    nodes: Vec<Node>,
    t_max: f64,
    stats: RkStats,
    switch_mismatch: f64,
    b_taylor: [Vec<f64>; 3],
}

/// Solved trajectory `D(t)` on `[0, t_max]`.
#[derive(Clone)]
pub struct DSolution {
    data: Arc<SolutionData>,
    d_fns: [ScalarFn; 3],
}

impl std::fmt::Debug for DSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DSolution")
            .field("t_max", &self.data.t_max)
            .field("nodes", &self.data.nodes.len())
            .field("switch_mismatch", &self.data.switch_mismatch)
            .finish()
    }
}

/// Quintic Hermite interpolation between two nodes.
fn hermite(n0: &Node, n1: &Node, t: f64) -> DerivState {
    let h = n1.t - n0.t;
    let s = (t - n0.t) / h;
    let mut out = DerivState {
        d: [0.0; 3],
        d_dot: [0.0; 3],
        d_ddot: [0.0; 3],
    };
    for i in 0..3 {
        let (a, b) = (&n0.state, &n1.state);
        let c0 = a.d[i];
        let c1 = h * a.d_dot[i];
        let c2 = 0.5 * h * h * a.d_ddot[i];
        let del = b.d[i] - c0 - c1 - c2;
        let del1 = h * b.d_dot[i] - c1 - 2.0 * c2;
        let del2 = h * h * b.d_ddot[i] - 2.0 * c2;
        let c3 = 10.0 * del - 4.0 * del1 + 0.5 * del2;
        let c4 = -15.0 * del + 7.0 * del1 - del2;
        let c5 = 6.0 * del - 3.0 * del1 + 0.5 * del2;
        out.d[i] = c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))));
        let p1 = c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * (4.0 * c4 + s * 5.0 * c5)));
        let p2 = 2.0 * c2 + s * (6.0 * c3 + s * (12.0 * c4 + s * 20.0 * c5));
        out.d_dot[i] = p1 / h;
        out.d_ddot[i] = p2 / (h * h);
    }
    out
}

impl SolutionData {
    fn state(&self, t: f64) -> Option<DerivState> {
        if !(0.0..=self.t_max * (1.0 + 1e-12)).contains(&t) {
            return None;
        }
        if t <= self.bootstrap.t_switch || self.nodes.len() < 2 {
            return Some(self.bootstrap.state(t));
        }
        let k = self.nodes.partition_point(|n| n.t <= t);
        let k = k.clamp(1, self.nodes.len() - 1);
        Some(hermite(&self.nodes[k - 1], &self.nodes[k], t))
    }
}

struct DLeaf {
    data: Arc<SolutionData>,
    index: usize,
    order: usize,
}

impl ScalarLeaf for DLeaf {
    fn eval(&self, t: f64) -> f64 {
        match self.data.state(t) {
            Some(s) => [s.d, s.d_dot, s.d_ddot][self.order][self.index],
            None => f64::NAN,
        }
    }

    fn derivative(&self) -> Option<ScalarFn> {
        (self.order < 2).then(|| {
            ScalarFn::leaf(Arc::new(DLeaf {
                data: self.data.clone(),
                index: self.index,
                order: self.order + 1,
            }))
        })
    }

    fn describe(&self) -> String {
        format!("{}D{}", ["", "d/dt ", "d²/dt² "][self.order], self.index + 1)
    }
}

/// Power series on `[0, t_switch]`, then Dormand–Prince to `t_max`.
pub fn solve(sys: &CoclosedSystem, opts: &SolveOptions) -> Result<DSolution, OdeError> {
    if !(opts.t_switch > 0.0) || !(opts.t_max > 0.0) {
        return Err(OdeError::InvalidSystem(
            "t_switch and t_max must be positive".into(),
        ));
    }
    if opts.t_max > sys.domain_end {
        return Err(OdeError::InvalidSystem(format!(
            "t_max = {} exceeds the domain end {}",
            opts.t_max, sys.domain_end
        )));
    }
    let available = sys.a.iter().map(|p| p.taylor.len()).min().unwrap_or(0) / 2 * 2;
    let order = opts.series_order.min(available);
    if order < 4 {
        return Err(OdeError::InvalidSystem(format!(
            "series order {order} is below 4; supply more Taylor data for A"
        )));
    }
    let taylor: [&[f64]; 3] = std::array::from_fn(|i| sys.a[i].taylor.as_slice());
    let coeffs = series_coefficients(taylor, sys.b0 * sys.b0, order)?;
    let b_taylor = b_series(&coeffs, taylor, sys.b0, order - 1);
    let bootstrap = SeriesBootstrap {
        order,
        coeffs,
        t_switch: opts.t_switch.min(opts.t_max),
    };

    let a_fns = sys.a_fns();
    let a_dots: [ScalarFn; 3] = std::array::from_fn(|i| a_fns[i].derivative().expect("validated"));
    let mut nodes = Vec::new();
    let mut stats = RkStats::default();
    if opts.t_max > bootstrap.t_switch {
        let ts = bootstrap.t_switch;
        // Integrate E = D/t², which stays O(1) at the singular orbit so that
        // the absolute tolerance does not dominate there.
        let y0 = bootstrap.state(ts).d.map(|d| d / (ts * ts));
        let mut failure: Option<OdeError> = None;
        let f = |t: f64, e: &[f64; 3]| {
            let mut ev = Evaluator::new(t);
            let d = e.map(|x| x * t * t);
            let dd = rhs_from_values(a_fns.clone().map(|a| ev.eval(&a)), d);
            std::array::from_fn(|i| (dd[i] - 2.0 * t * e[i]) / (t * t))
        };
        let result = rk::integrate(f, ts, y0, opts.t_max, &opts.rk, |t, e, de| {
            let d = e.map(|x| x * t * t);
            let dd: [f64; 3] = std::array::from_fn(|i| t * t * de[i] + 2.0 * t * e[i]);
            let mut ev = Evaluator::new(t);
            let a = a_fns.clone().map(|x| ev.eval(&x));
            if let Some(i) = (0..3).find(|&i| !(a[i] > 0.0)) {
                failure = Some(OdeError::InvalidSystem(format!(
                    "A{} is not positive at t = {t}",
                    i + 1
                )));
                return Err(String::new());
            }
            if let Some(i) = (0..3).find(|&i| !(d[i] > 0.0)) {
                failure = Some(OdeError::InvariantViolation {
                    t,
                    detail: format!("D{} = {} is not positive", i + 1, d[i]),
                });
                return Err(String::new());
            }
            let a_dot = a_dots.clone().map(|x| ev.eval(&x));
            nodes.push(Node {
                t,
                state: DerivState {
                    d,
                    d_dot: dd,
                    d_ddot: second_derivative(a, a_dot, d, dd),
                },
            });
            Ok(())
        });
        stats = match result {
            Ok(s) => s,
            Err(RkError::Rejected { .. }) => return Err(failure.expect("recorded failure")),
            Err(RkError::StepUnderflow { t, h }) => return Err(OdeError::StepUnderflow { t, h }),
            Err(RkError::NonFinite { t }) => return Err(OdeError::NonFinite { t }),
        };
    }

    let mut data = SolutionData {
        system: sys.clone(),
        bootstrap,
        nodes,
        t_max: opts.t_max,
        stats,
        switch_mismatch: 0.0,
        b_taylor,
    };
    let probe = 2.0 * data.bootstrap.t_switch;
    if probe <= data.t_max && data.nodes.len() >= 2 {
        let series = data.bootstrap.state(probe).d;
        let integ = data.state(probe).expect("inside domain").d;
        data.switch_mismatch = (0..3)
            .map(|i| ((series[i] - integ[i]) / series[i]).abs())
            .fold(0.0, f64::max);
    }
    let data = Arc::new(data);
    let d_fns = std::array::from_fn(|index| {
        ScalarFn::leaf(Arc::new(DLeaf {
            data: data.clone(),
            index,
            order: 0,
        }))
    });
    Ok(DSolution { data, d_fns })
}

impl DSolution {
    pub fn system(&self) -> &CoclosedSystem {
        &self.data.system
    }

    pub fn bootstrap(&self) -> &SeriesBootstrap {
        &self.data.bootstrap
    }

    /// Accepted integrator steps, ascending in `t`.
    pub fn nodes(&self) -> &[Node] {
        &self.data.nodes
    }

    pub fn t_max(&self) -> f64 {
        self.data.t_max
    }

    pub fn stats(&self) -> RkStats {
        self.data.stats
    }

    /// Relative disagreement of series and integrator at `2·t_switch`.
    pub fn switch_mismatch(&self) -> f64 {
        self.data.switch_mismatch
    }

    pub fn state(&self, t: f64) -> Option<DerivState> {
        self.data.state(t)
    }

    pub fn d(&self, t: f64) -> [f64; 3] {
        self.state(t).map(|s| s.d).unwrap_or([f64::NAN; 3])
    }

    pub fn d_dot(&self, t: f64) -> [f64; 3] {
        self.state(t).map(|s| s.d_dot).unwrap_or([f64::NAN; 3])
    }

    /// `D_i` as functions of `t` with derivatives through second order.
    pub fn d_fns(&self) -> [ScalarFn; 3] {
        self.d_fns.clone()
    }

    /// Taylor coefficients of `B_i` at 0 implied by the series (by power).
    pub fn b_taylor(&self) -> &[Vec<f64>; 3] {
        &self.data.b_taylor
    }

    /// `B_i = sign(b0)·sqrt(D_jD_k/(D_iA_i²))`, with `B_i(0) = b0`.
    pub fn recover_b(&self) -> Result<[ScalarFn; 3], OdeError> {
        if let Some(n) = self.nodes().iter().find(|n| n.state.d.iter().any(|d| !(*d > 0.0))) {
            return Err(OdeError::InvariantViolation {
                t: n.t,
                detail: "nonpositive D under the square root".into(),
            });
        }
        let a = self.system().a_fns();
        let d = &self.d_fns;
        let radius = 1e-3 * self.bootstrap().t_switch;
        let sign = self.system().b0.signum();
        Ok(std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let num = ScalarFn::product(&[d[j].clone(), d[k].clone()]);
            let den = ScalarFn::product(&[d[i].clone(), a[i].clone(), a[i].clone()]);
            num.mul(&den.recip())
                .sqrt()
                .scale(sign)
                .guarded(radius, self.data.b_taylor[i].clone())
        }))
    }

    pub fn profile_set(&self) -> Result<ProfileSet, OdeError> {
        Ok(ProfileSet::new(
            self.system().a_fns(),
            self.recover_b()?,
            self.system().b0,
            self.t_max(),
        ))
    }
}
