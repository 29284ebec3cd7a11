//! The invariant half-flat SU(3)-structure and the G₂-structure it sweeps out.

use std::sync::OnceLock;

use crate::exterior::{
    d_orbit, epsilon, hodge_star, BasisIndex, CoframeScaling, ExteriorError, Form, InvariantForm,
    Monomial, PointForm, Scaling,
};
use crate::scalar::{Evaluator, ScalarFn};

/// The six metric functions and the common boundary value `b0 = B_i(0)`.
#[derive(Clone, Debug)]
pub struct ProfileSet {
    pub a: [ScalarFn; 3],
    pub b: [ScalarFn; 3],
    pub b0: f64,
    /// Right end `L` of the domain `[0, L)`; may be infinite.
    pub domain_end: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ProfileError {
    #[error("b0 must be nonzero")]
    ZeroB0,
    #[error("A{index} is not positive at t = {t} (value {value})")]
    NonPositiveA { index: usize, t: f64, value: f64 },
    #[error("B{index} has the wrong sign at t = {t} (value {value}, b0 = {b0})")]
    WrongSignB { index: usize, t: f64, value: f64, b0: f64 },
}

impl ProfileSet {
    pub fn new(a: [ScalarFn; 3], b: [ScalarFn; 3], b0: f64, domain_end: f64) -> Self {
        ProfileSet {
            a,
            b,
            b0,
            domain_end,
        }
    }

    /// Checks `A_i > 0` and `sign B_i = sign b0` at the interior sample points.
    pub fn validate(&self, ts: &[f64]) -> Result<(), ProfileError> {
        if self.b0 == 0.0 {
            return Err(ProfileError::ZeroB0);
        }
        for &t in ts.iter().filter(|&&t| t > 0.0 && t < self.domain_end) {
            let mut ev = Evaluator::new(t);
            for i in 0..3 {
                let value = ev.eval(&self.a[i]);
                if !(value > 0.0) {
                    return Err(ProfileError::NonPositiveA { index: i + 1, t, value });
                }
                let value = ev.eval(&self.b[i]);
                if !(value * self.b0.signum() > 0.0) {
                    return Err(ProfileError::WrongSignB {
                        index: i + 1,
                        t,
                        value,
                        b0: self.b0,
                    });
                }
            }
        }
        Ok(())
    }

    /// `([A_i(t)], [B_i(t)])`.
    pub fn values(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        let mut ev = Evaluator::new(t);
        (
            self.a.clone().map(|f| ev.eval(&f)),
            self.b.clone().map(|f| ev.eval(&f)),
        )
    }

    /// Symbolic metric scaling `(1, 2A_i, 2B_i)`.
    pub fn scaling(&self) -> Scaling<ScalarFn> {
        Scaling::from_profiles(&self.a, &self.b)
    }
}

#[derive(Clone, Debug)]
pub struct SU3Structure {
    pub omega: InvariantForm,
    pub omega1: InvariantForm,
    pub omega2: InvariantForm,
}

#[derive(Clone, Debug)]
pub struct G2Structure {
    pub phi: InvariantForm,
    pub psi: InvariantForm,
    pub su3: SU3Structure,
    pub scaling: Scaling<ScalarFn>,
    pub orientation: i32,
}

fn p(i: usize) -> BasisIndex {
    BasisIndex::plus(i)
}

fn m(i: usize) -> BasisIndex {
    BasisIndex::minus(i)
}

/// The two indices of `{1,2,3}` other than `k`, ascending.
fn others(k: usize) -> (usize, usize) {
    match k {
        1 => (2, 3),
        2 => (1, 3),
        _ => (1, 2),
    }
}

pub fn build_su3(p_set: &ProfileSet) -> SU3Structure {
    let (a, b) = (&p_set.a, &p_set.b);
    let mut omega = InvariantForm::zero(2);
    for i in 1..=3 {
        let c = ScalarFn::product(&[a[i - 1].clone(), b[i - 1].clone()]).scale(4.0);
        omega = omega.plus(&Form::from_sequence(&[m(i), p(i)], c));
    }

    let bbb = ScalarFn::product(&[b[0].clone(), b[1].clone(), b[2].clone()]);
    let aaa = ScalarFn::product(&[a[0].clone(), a[1].clone(), a[2].clone()]);
    let mut omega1 = Form::from_sequence(&[m(1), m(2), m(3)], bbb.scale(8.0));
    let mut omega2 = Form::from_sequence(&[p(1), p(2), p(3)], aaa.scale(-8.0));
    // Each unordered pair {i, j} appears twice in the ε-sum.
    for k in 1..=3 {
        let (i, j) = others(k);
        let e = epsilon(i, j, k) as f64;
        let aab = ScalarFn::product(&[a[i - 1].clone(), a[j - 1].clone(), b[k - 1].clone()]);
        let bba = ScalarFn::product(&[b[i - 1].clone(), b[j - 1].clone(), a[k - 1].clone()]);
        omega1 = omega1.plus(&Form::from_sequence(&[p(i), p(j), m(k)], aab.scale(-8.0 * e)));
        omega2 = omega2.plus(&Form::from_sequence(&[m(i), m(j), p(k)], bba.scale(8.0 * e)));
    }
    SU3Structure {
        omega,
        omega1,
        omega2,
    }
}

fn dt_form() -> InvariantForm {
    InvariantForm::basis(BasisIndex::DT)
}

/// `φ = dt∧ω + Ω₁`, `ψ = ω²/2 − dt∧Ω₂`.
pub fn assemble_g2(su3: SU3Structure, scaling: Scaling<ScalarFn>, orientation: i32) -> G2Structure {
    let dt = dt_form();
    let wedge = |x: &InvariantForm, y: &InvariantForm| x.wedge(y).expect("degree ≤ 7");
    let phi = wedge(&dt, &su3.omega).plus(&su3.omega1);
    let psi = wedge(&su3.omega, &su3.omega)
        .scaled(0.5)
        .minus(&wedge(&dt, &su3.omega2));
    G2Structure {
        phi,
        psi,
        su3,
        scaling,
        orientation,
    }
}

pub fn build_g2(p_set: &ProfileSet) -> G2Structure {
    assemble_g2(build_su3(p_set), p_set.scaling(), calibrated_orientation())
}

/// Sign making `φ∧ψ = +7·vol` for the cone at `t = 1`. Computed once.
pub fn calibrated_orientation() -> i32 {
    static SIGN: OnceLock<i32> = OnceLock::new();
    *SIGN.get_or_init(|| {
        let half_t = ScalarFn::poly(vec![0.0, 0.5]);
        let cone = ProfileSet::new(
            [half_t.clone(), half_t.clone(), half_t.clone()],
            [half_t.clone(), half_t.clone(), half_t],
            1.0,
            f64::INFINITY,
        );
        let g = assemble_g2(build_su3(&cone), cone.scaling(), 1);
        let ratio = g.phi_wedge_psi_ratio(1.0);
        if ratio > 0.0 {
            1
        } else {
            -1
        }
    })
}

impl G2Structure {
    pub fn metric(&self, t: f64) -> Result<CoframeScaling, ExteriorError> {
        self.scaling.at(t)
    }

    /// `(φ∧ψ)/vol` at `t`, using the unoriented volume `e⁰∧…∧e⁶`.
    pub fn phi_wedge_psi_ratio(&self, t: f64) -> f64 {
        let top = self.phi.at(t).wedge(&self.psi.at(t)).expect("degree 7");
        let vol = self.scaling.volume().at(t);
        top.get(Monomial::VOLUME) / vol.get(Monomial::VOLUME)
    }

    /// `⋆φ` at `t`, for comparison with `ψ`.
    pub fn star_phi(&self, t: f64) -> Result<PointForm, ExteriorError> {
        let s = self.metric(t)?;
        Ok(hodge_star(&self.phi.at(t), &s, self.orientation))
    }
}

impl SU3Structure {
    /// Max-norm of `ω∧Ω₂` at `t`.
    pub fn compatibility_residual(&self, t: f64) -> f64 {
        let (w, o2) = (self.omega.at(t), self.omega2.at(t));
        w.wedge(&o2).expect("degree 5").max_abs()
    }

    /// Max-norm of `Ω₁∧Ω₂ − (2/3)ω³` at `t`, relative to the size of `ω³`.
    pub fn normalization_residual(&self, t: f64) -> f64 {
        let (w, o1, o2) = (self.omega.at(t), self.omega1.at(t), self.omega2.at(t));
        let w3 = w.power(3).expect("degree 6");
        let diff = o1.wedge(&o2).expect("degree 6").minus(&w3.scaled(2.0 / 3.0));
        diff.max_abs() / w3.max_abs().max(f64::MIN_POSITIVE)
    }
}

/// Largest `|coefficient|` of `d_N Ω₁` and of `d_N(ω²)` over `ts`, each
/// relative to the largest coefficient of the differentiated form.
pub fn check_halfflat(s: &SU3Structure, ts: &[f64]) -> (f64, f64) {
    let omega_sq = s.omega.wedge(&s.omega).expect("degree 4");
    let d1 = d_orbit(&s.omega1);
    let d2 = d_orbit(&omega_sq);
    let mut res = (0.0f64, 0.0f64);
    for &t in ts {
        let mut ev = Evaluator::new(t);
        let rel = |num: &InvariantForm, den: &InvariantForm, ev: &mut Evaluator| {
            let scale = den.eval_with(ev).max_abs().max(f64::MIN_POSITIVE);
            num.eval_with(ev).max_abs() / scale
        };
        res.0 = res.0.max(rel(&d1, &s.omega1, &mut ev));
        res.1 = res.1.max(rel(&d2, &omega_sq, &mut ev));
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cone(b0: f64) -> ProfileSet {
        let a = ScalarFn::poly(vec![0.0, 0.5]);
        let b = ScalarFn::poly(vec![b0 * b0, 0.0, 0.25]).sqrt().scale(b0.signum());
        ProfileSet::new(
            [a.clone(), a.clone(), a],
            [b.clone(), b.clone(), b],
            b0,
            f64::INFINITY,
        )
    }

    fn wobbly() -> ProfileSet {
        let a = [
            ScalarFn::poly(vec![0.3, 0.5, 0.0, 0.1]),
            ScalarFn::sin(0.4, 1.3, 0.9).add(&ScalarFn::constant(1.0)),
            ScalarFn::poly(vec![0.7, 0.2]).exp(),
        ];
        let b = [
            ScalarFn::poly(vec![-1.0, -0.3]),
            ScalarFn::poly(vec![2.0, 0.0, 0.5]).sqrt().neg(),
            ScalarFn::poly(vec![0.5, 1.0]).recip().scale(-1.0),
        ];
        ProfileSet::new(a, b, -1.0, f64::INFINITY)
    }

    #[test]
    fn constant_half_profiles_give_unit_omega() {
        let h = ScalarFn::constant(0.5);
        let set = ProfileSet::new(
            [h.clone(), h.clone(), h.clone()],
            [h.clone(), h.clone(), h],
            0.5,
            f64::INFINITY,
        );
        let w = build_su3(&set).omega.at(0.0);
        for i in 1..=3 {
            let (mono, sign) = Monomial::from_sequence(&[m(i), p(i)]).unwrap();
            assert_eq!(w.get(mono) * sign as f64, 1.0);
        }
        assert_eq!(w.len(), 3);
    }

    #[test]
    fn algebraic_identities() {
        for set in [cone(1.0), cone(-2.0), wobbly()] {
            let s = build_su3(&set);
            for t in [0.3, 1.0, 2.7] {
                assert!(s.compatibility_residual(t) < 1e-12);
                assert!(s.normalization_residual(t) < 1e-12, "{}", s.normalization_residual(t));
            }
        }
    }

    #[test]
    fn half_flat_for_any_profiles() {
        for set in [cone(1.0), wobbly()] {
            let (r1, r2) = check_halfflat(&build_su3(&set), &[0.2, 0.9, 3.1]);
            assert!(r1 < 1e-12 && r2 < 1e-12, "{r1} {r2}");
        }
    }

    #[test]
    fn corrupted_omega1_is_not_closed() {
        let set = cone(1.0);
        let mut s = build_su3(&set);
        let aaa = ScalarFn::product(&[set.a[0].clone(), set.a[1].clone(), set.a[2].clone()]);
        s.omega1 = s
            .omega1
            .plus(&Form::from_sequence(&[p(1), p(2), p(3)], aaa.scale(8.0)));
        let (r1, _) = check_halfflat(&s, &[1.0]);
        assert!(r1 > 0.1, "{r1}");
    }

    #[test]
    fn orientation_calibration() {
        assert_eq!(calibrated_orientation(), 1);
        for set in [cone(1.0), wobbly()] {
            let g = build_g2(&set);
            for t in [0.5, 1.0, 2.0] {
                assert!((g.phi_wedge_psi_ratio(t) - 7.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn psi_is_star_phi() {
        for set in [cone(0.5), wobbly()] {
            let g = build_g2(&set);
            for t in [0.4, 1.7] {
                let psi = g.psi.at(t);
                let diff = g.star_phi(t).unwrap().minus(&psi).max_abs();
                assert!(diff <= 1e-10 * psi.max_abs(), "{diff}");
            }
        }
    }

    #[test]
    fn cone_metric_is_identity_at_one() {
        let g = build_g2(&cone(1.0));
        let diag = g.metric(1.0).unwrap().metric_diagonal();
        assert_eq!(diag[..4], [1.0; 4]);
        assert!(diag[4..].iter().all(|x| (x - 5.0).abs() < 1e-15));
    }

    #[test]
    fn validation_rejects_bad_profiles() {
        let mut set = cone(1.0);
        assert!(set.validate(&[0.5, 1.0]).is_ok());
        set.b0 = 0.0;
        assert_eq!(set.validate(&[1.0]), Err(ProfileError::ZeroB0));
        let mut set = cone(1.0);
        set.a[1] = ScalarFn::poly(vec![0.0, -0.5]);
        assert!(matches!(
            set.validate(&[1.0]),
            Err(ProfileError::NonPositiveA { index: 2, .. })
        ));
    }
}
