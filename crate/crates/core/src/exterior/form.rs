use std::collections::BTreeMap;
use std::fmt;

use super::basis::{BasisIndex, Monomial};
use super::ExteriorError;
use crate::scalar::{Evaluator, ScalarFn};

/// Ring operations a form coefficient needs.
pub trait Coefficient: Clone + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, k: f64) -> Self;
    fn reciprocal(&self) -> Self;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, k: f64) -> Self {
        self * k
    }
    fn reciprocal(&self) -> Self {
        1.0 / self
    }
}

impl Coefficient for ScalarFn {
    fn zero() -> Self {
        ScalarFn::zero()
    }
    fn from_f64(x: f64) -> Self {
        ScalarFn::constant(x)
    }
    fn is_zero(&self) -> bool {
        ScalarFn::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn times(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn scaled(&self, k: f64) -> Self {
        self.scale(k)
    }
    fn reciprocal(&self) -> Self {
        self.recip()
    }
}

/// A homogeneous form: a sparse sum of canonical monomials of one degree.
#[derive(Clone, PartialEq)]
pub struct Form<C> {
    degree: usize,
    terms: BTreeMap<Monomial, C>,
}

/// Form with `t`-dependent coefficients.
pub type InvariantForm = Form<ScalarFn>;
/// Form evaluated at one value of `t`.
pub type PointForm = Form<f64>;

impl<C: Coefficient> Form<C> {
    pub fn zero(degree: usize) -> Self {
        Form {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(c: C) -> Self {
        Self::monomial(Monomial::ONE, c)
    }

    pub fn basis(b: BasisIndex) -> Self {
        Self::monomial(Monomial::single(b), C::from_f64(1.0))
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let mut f = Self::zero(m.degree());
        f.insert(m, c);
        f
    }

    /// `c · e_{i₁}∧…∧e_{iₖ}` for an arbitrary (not necessarily sorted) sequence.
    pub fn from_sequence(seq: &[BasisIndex], c: C) -> Self {
        match Monomial::from_sequence(seq) {
            Some((m, s)) => Self::monomial(m, c.scaled(s as f64)),
            None => Self::zero(seq.len()),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: Monomial) -> Option<&C> {
        self.terms.get(&m)
    }

    /// Adds `c · m`, merging with an existing term and pruning zeros.
    pub fn insert(&mut self, m: Monomial, c: C) {
        assert_eq!(
            m.degree(),
            self.degree,
            "monomial {m} does not match form degree {}",
            self.degree
        );
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&m) {
            Some(old) => old.plus(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(m, merged);
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ExteriorError> {
        if self.degree != other.degree {
            return Err(ExteriorError::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, c.clone());
        }
        Ok(out)
    }

    /// Sum of two forms of equal degree.
    ///
    /// Panics on a degree mismatch; use [`Form::try_add`] to handle it.
    pub fn plus(&self, other: &Self) -> Self {
        self.try_add(other).expect("adding forms of different degree")
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    pub fn scaled(&self, k: f64) -> Self {
        self.map(|c| c.scaled(k))
    }

    pub fn times_coefficient(&self, k: &C) -> Self {
        self.map(|c| c.times(k))
    }

    fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero(self.degree);
        for (m, c) in &self.terms {
            out.insert(*m, f(c));
        }
        out
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Form<D> {
        let mut out = Form::<D>::zero(self.degree);
        for (m, c) in &self.terms {
            out.insert(*m, f(c));
        }
        out
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self, ExteriorError> {
        let degree = self.degree + other.degree;
        if degree > BasisIndex::COUNT {
            return Err(ExteriorError::DegreeOverflow {
                lhs: self.degree,
                rhs: other.degree,
            });
        }
        let mut out = Self::zero(degree);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, s)) = ma.wedge(*mb) {
                    out.insert(m, ca.times(cb).scaled(s as f64));
                }
            }
        }
        Ok(out)
    }

    /// `self ∧ self ∧ …` (`n` factors).
    pub fn power(&self, n: usize) -> Result<Self, ExteriorError> {
        let mut acc = Self::scalar(C::from_f64(1.0));
        for _ in 0..n {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// Splits `self = dt ∧ α + β` with `α, β` free of `dt`; returns `(α, β)`.
    pub fn split_dt(&self) -> (Self, Self) {
        let dt = Monomial::single(BasisIndex::DT);
        let mut alpha = Self::zero(self.degree.saturating_sub(1));
        let mut beta = Self::zero(self.degree);
        for (m, c) in &self.terms {
            if m.contains(BasisIndex::DT) {
                // dt is the lowest index, so dt ∧ rest is already canonical.
                alpha.insert(Monomial::from_mask(m.mask() & !dt.mask()).unwrap(), c.clone());
            } else {
                beta.insert(*m, c.clone());
            }
        }
        (alpha, beta)
    }
}

impl InvariantForm {
    /// Evaluates every coefficient at `t`.
    pub fn at(&self, t: f64) -> PointForm {
        let mut ev = Evaluator::new(t);
        self.eval_with(&mut ev)
    }

    pub fn eval_with(&self, ev: &mut Evaluator) -> PointForm {
        let mut out = PointForm::zero(self.degree);
        for (m, c) in &self.terms {
            out.insert(*m, ev.eval(c));
        }
        out
    }
}

impl PointForm {
    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn get(&self, m: Monomial) -> f64 {
        self.terms.get(&m).copied().unwrap_or(0.0)
    }

    /// Drops terms with `|c| <= tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = Self::zero(self.degree);
        for (m, c) in &self.terms {
            if c.abs() > tol {
                out.insert(*m, *c);
            }
        }
        out
    }
}

impl fmt::Debug for PointForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 (degree {})", self.degree);
        }
        let parts: Vec<_> = self.terms.iter().map(|(m, c)| format!("{c}·{m}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for InvariantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self
            .terms
            .iter()
            .map(|(m, c)| format!("[{}]·{m}", c.describe()))
            .collect();
        write!(f, "InvariantForm(degree {}: {})", self.degree, parts.join(" + "))
    }
}
