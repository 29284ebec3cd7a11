//! Exterior derivative on `I × (S³×S³)` for invariant forms.
//!
//! On the orbit the coframe obeys
//!
//! ```text
//! dη_i⁺ = −ε_ijk (η_j⁺∧η_k⁺ + η_j⁻∧η_k⁻)
//! dη_i⁻ = −2 ε_ijk η_j⁻∧η_k⁺
//! ```
//!
//! summed over all `j, k`, which is what the bracket relations
//! `[T_i, T_j] = 2ε_ijk T_k` require. On the cylinder `d = dt∧∂_t + d_N`.

use std::sync::OnceLock;

use super::basis::{BasisIndex, Monomial};
use super::form::{Coefficient, Form, InvariantForm};
use super::ExteriorError;

/// Levi-Civita symbol on `{1,2,3}`.
pub fn epsilon(i: usize, j: usize, k: usize) -> i32 {
    match (i, j, k) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
        (1, 3, 2) | (3, 2, 1) | (2, 1, 3) => -1,
        _ => 0,
    }
}

/// `d_N` of each coframe element as a list of `(monomial, integer coefficient)`.
fn coframe_differentials() -> &'static [Vec<(Monomial, i32)>; 7] {
    static TABLE: OnceLock<[Vec<(Monomial, i32)>; 7]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table: [Vec<(Monomial, i32)>; 7] = Default::default();
        let mut push = |target: BasisIndex, seq: [BasisIndex; 2], k: i32| {
            let (m, s) = Monomial::from_sequence(&seq).expect("distinct indices");
            let slot = &mut table[target.code() as usize];
            match slot.iter_mut().find(|(mm, _)| *mm == m) {
                Some(entry) => entry.1 += s * k,
                None => slot.push((m, s * k)),
            }
        };
        for i in 1..=3 {
            for j in 1..=3 {
                for k in 1..=3 {
                    let e = epsilon(i, j, k);
                    if e == 0 {
                        continue;
                    }
                    let (p, m) = (BasisIndex::plus, BasisIndex::minus);
                    push(p(i), [p(j), p(k)], -e);
                    push(p(i), [m(j), m(k)], -e);
                    push(m(i), [m(j), p(k)], -2 * e);
                }
            }
        }
        for slot in table.iter_mut() {
            slot.retain(|(_, c)| *c != 0);
            slot.sort();
        }
        table
    })
}

/// Orbit part of the exterior derivative. Coefficients are not differentiated.
pub fn d_orbit<C: Coefficient>(f: &Form<C>) -> Form<C> {
    let table = coframe_differentials();
    let mut out = Form::zero(f.degree() + 1);
    if f.degree() >= BasisIndex::COUNT {
        return out;
    }
    for (m, c) in f.terms() {
        for (pos, b) in m.indices().enumerate() {
            let lead_sign = if pos % 2 == 0 { 1 } else { -1 };
            let below = Monomial::from_mask(m.mask() & ((1u8 << b.code()) - 1)).unwrap();
            let above = Monomial::from_mask(m.mask() & !((2u8 << b.code()) - 1)).unwrap();
            for &(pair, k) in &table[b.code() as usize] {
                let Some((left, s1)) = below.wedge(pair) else {
                    continue;
                };
                let Some((full, s2)) = left.wedge(above) else {
                    continue;
                };
                out.insert(full, c.scaled((lead_sign * s1 * s2 * k) as f64));
            }
        }
    }
    out
}

/// Full exterior derivative `d = dt∧∂_t + d_N`.
///
/// Only coefficients of `dt`-free monomials are differentiated; the others
/// are annihilated by `dt∧dt = 0`.
pub fn d(f: &InvariantForm) -> Result<InvariantForm, ExteriorError> {
    let mut out = d_orbit(f);
    let dt = Monomial::single(BasisIndex::DT);
    for (m, c) in f.terms() {
        if m.contains(BasisIndex::DT) {
            continue;
        }
        let dc = c
            .derivative()
            .ok_or_else(|| ExteriorError::MissingDerivative {
                monomial: m.to_string(),
            })?;
        let (full, s) = dt.wedge(*m).expect("dt-free monomial");
        out.insert(full, dc.scale(s as f64));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::PointForm;
    use crate::scalar::ScalarFn;

    fn two_form(pairs: &[(BasisIndex, BasisIndex, f64)]) -> PointForm {
        let mut f = PointForm::zero(2);
        for &(a, b, c) in pairs {
            let (m, s) = Monomial::from_sequence(&[a, b]).unwrap();
            f.insert(m, c * s as f64);
        }
        f
    }

    #[test]
    fn d_eta_plus_one() {
        let (p, m) = (BasisIndex::plus, BasisIndex::minus);
        let got = d_orbit(&PointForm::basis(p(1)));
        let want = two_form(&[(p(2), p(3), -2.0), (m(2), m(3), -2.0)]);
        assert_eq!(got, want);
    }

    #[test]
    fn d_eta_minus_one() {
        let (p, m) = (BasisIndex::plus, BasisIndex::minus);
        let got = d_orbit(&PointForm::basis(m(1)));
        let want = two_form(&[(m(2), p(3), -2.0), (p(2), m(3), -2.0)]);
        assert_eq!(got, want);
    }

    #[test]
    fn d_orbit_squares_to_zero_on_coframe() {
        for b in BasisIndex::all() {
            let dd = d_orbit(&d_orbit(&PointForm::basis(b)));
            assert!(dd.is_empty(), "d_N² {b} = {dd:?}");
        }
    }

    #[test]
    fn dt_is_closed() {
        assert!(d_orbit(&PointForm::basis(BasisIndex::DT)).is_empty());
    }

    #[test]
    fn d_of_function_times_dt_vanishes() {
        let f = InvariantForm::monomial(
            Monomial::single(BasisIndex::DT),
            ScalarFn::poly(vec![1.0, 2.0, 3.0]),
        );
        assert!(d(&f).unwrap().is_empty());
    }

    #[test]
    fn leibniz_on_one_form() {
        let (p, m) = (BasisIndex::plus, BasisIndex::minus);
        let coef = ScalarFn::poly(vec![0.5, 0.0, 1.0]);
        let f = InvariantForm::monomial(Monomial::single(p(1)), coef);
        let t = 0.7;
        let got = d(&f).unwrap().at(t);
        let mut want = two_form(&[(p(2), p(3), -2.0), (m(2), m(3), -2.0)]).scaled(0.5 + t * t);
        want.insert(Monomial::from_sequence(&[BasisIndex::DT, p(1)]).unwrap().0, 2.0 * t);
        assert_eq!(got, want);
    }

    #[test]
    fn missing_derivative_names_monomial() {
        let opaque = ScalarFn::from_closures("opaque", |t: f64| t, None::<fn(f64) -> f64>);
        let f = InvariantForm::monomial(Monomial::single(BasisIndex::minus(2)), opaque);
        match d(&f) {
            Err(ExteriorError::MissingDerivative { monomial }) => assert_eq!(monomial, "η2-"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
