use super::basis::{BasisIndex, Monomial};
use super::form::{Coefficient, Form};
use super::ExteriorError;
use crate::scalar::ScalarFn;

/// Diagonal orthonormalisation `e⁰ = dt`, `e^i = a_i η_i⁺`, `e^{i+3} = b_i η_i⁻`.
///
/// Entry `k` is the length of coframe element `k`; entry 0 is always 1.
#[derive(Clone, Debug)]
pub struct Scaling<C> {
    factors: [C; 7],
    inverses: [C; 7],
}

/// Scaling at a single `t`.
pub type CoframeScaling = Scaling<f64>;

impl<C: Coefficient> Scaling<C> {
    fn from_factors(factors: [C; 7]) -> Self {
        let inverses = factors.clone().map(|c| c.reciprocal());
        Scaling { factors, inverses }
    }

    pub fn factor(&self, b: BasisIndex) -> &C {
        &self.factors[b.code() as usize]
    }

    fn product_over(&self, m: Monomial, inverse: bool) -> C {
        let src = if inverse { &self.inverses } else { &self.factors };
        m.indices()
            .filter(|b| *b != BasisIndex::DT)
            .fold(C::from_f64(1.0), |acc, b| acc.times(&src[b.code() as usize]))
    }

    /// `vol = e⁰∧…∧e⁶` expressed in the η frame.
    pub fn volume(&self) -> Form<C> {
        Form::monomial(Monomial::VOLUME, self.product_over(Monomial::VOLUME, false))
    }
}

impl CoframeScaling {
    /// `a` and `b` are the values `2A_i(t)` and `2B_i(t)`.
    pub fn new(a: [f64; 3], b: [f64; 3]) -> Result<Self, ExteriorError> {
        let factors = [1.0, a[0], a[1], a[2], b[0], b[1], b[2]];
        if let Some(index) = factors.iter().position(|x| *x == 0.0 || !x.is_finite()) {
            return Err(ExteriorError::SingularMetric { index });
        }
        Ok(Self::from_factors(factors))
    }

    /// Diagonal of the metric in the η frame.
    pub fn metric_diagonal(&self) -> [f64; 7] {
        self.factors.map(|x| x * x)
    }
}

impl Scaling<ScalarFn> {
    /// Symbolic scaling `(1, 2A_i, 2B_i)` from profile functions.
    pub fn from_profiles(a: &[ScalarFn; 3], b: &[ScalarFn; 3]) -> Self {
        let [a1, a2, a3] = a.clone().map(|f| f.scale(2.0));
        let [b1, b2, b3] = b.clone().map(|f| f.scale(2.0));
        Self::from_factors([ScalarFn::one(), a1, a2, a3, b1, b2, b3])
    }

    pub fn at(&self, t: f64) -> Result<CoframeScaling, ExteriorError> {
        let v = self.factors.clone().map(|f| f.eval(t));
        CoframeScaling::new([v[1], v[2], v[3]], [v[4], v[5], v[6]])
    }
}

/// Hodge star of the diagonal metric, oriented by `orientation_sign · vol`.
pub fn hodge_star<C: Coefficient>(f: &Form<C>, s: &Scaling<C>, orientation_sign: i32) -> Form<C> {
    let mut out = Form::zero(BasisIndex::COUNT - f.degree());
    for (m, c) in f.terms() {
        let comp = m.complement();
        let (_, sigma) = m.wedge(comp).expect("disjoint");
        let k = s.product_over(comp, false).times(&s.product_over(*m, true));
        out.insert(comp, c.times(&k).scaled((sigma * orientation_sign) as f64));
    }
    out
}

/// Pointwise metric inner product of two forms of equal degree.
pub fn inner_product(f: &Form<f64>, g: &Form<f64>, s: &CoframeScaling) -> f64 {
    f.terms()
        .filter_map(|(m, a)| g.coefficient(*m).map(|b| (m, a * b)))
        .map(|(m, ab)| {
            let inv = s.product_over(*m, true);
            ab * inv * inv
        })
        .sum()
}
