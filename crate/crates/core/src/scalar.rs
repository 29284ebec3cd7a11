//! Scalar functions of the cohomogeneity parameter `t`.
//!
//! A [`ScalarFn`] is an immutable expression graph. Sums, products,
//! reciprocals, square roots and compositions carry their derivative
//! symbolically, so the derivative of any expression built from
//! differentiable leaves is again a [`ScalarFn`]. Derivative graphs are
//! memoised per node, which keeps shared subexpressions shared.
//!
//! Evaluation of many coefficients at the same `t` should go through an
//! [`Evaluator`]; it caches node values by identity so that a profile such as
//! `B_1(t)` is computed once no matter how many products reference it.

use std::collections::HashMap;
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};
use std::sync::{Arc, OnceLock};

/// A user-defined leaf of an expression graph (interpolants, tabulated
/// inverses, solver output).
pub trait ScalarLeaf: Send + Sync {
    fn eval(&self, t: f64) -> f64;
    /// Exact derivative as another expression, if known.
    fn derivative(&self) -> Option<ScalarFn>;
    fn describe(&self) -> String;
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ScalarFn(Arc<Node>);

struct Node {
    kind: Kind,
    deriv: OnceLock<Option<ScalarFn>>,
}

enum Kind {
    Const(f64),
    /// Ascending coefficients.
    Poly(Vec<f64>),
    /// `amp * sin(freq * t + phase)`
    Sin { amp: f64, freq: f64, phase: f64 },
    /// `constant + sum_k weight_k * term_k`
    Linear { constant: f64, terms: Vec<(f64, ScalarFn)> },
    Product(Vec<ScalarFn>),
    Recip(ScalarFn),
    Sqrt(ScalarFn),
    Exp(ScalarFn),
    /// `outer(inner(t))`; `outer` is a function of its own variable.
    Compose { outer: ScalarFn, inner: ScalarFn },
    /// Taylor polynomial on `|t| <= radius`, `expr` elsewhere.
    Guard { radius: f64, taylor: Vec<f64>, expr: ScalarFn },
    Leaf(Arc<dyn ScalarLeaf>),
    Closure { f: RealFn, df: Option<RealFn>, tag: String },
}

impl ScalarFn {
    fn from_kind(kind: Kind) -> Self {
        ScalarFn(Arc::new(Node {
            kind,
            deriv: OnceLock::new(),
        }))
    }

    pub fn constant(c: f64) -> Self {
        Self::from_kind(Kind::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The identity `t ↦ t`.
    pub fn identity() -> Self {
        Self::poly(vec![0.0, 1.0])
    }

    /// Polynomial with ascending coefficients; trailing zeros are trimmed.
    pub fn poly(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        match coeffs.len() {
            0 => Self::zero(),
            1 => Self::constant(coeffs[0]),
            _ => Self::from_kind(Kind::Poly(coeffs)),
        }
    }

    /// `amp * sin(freq * t + phase)`.
    pub fn sin(amp: f64, freq: f64, phase: f64) -> Self {
        if amp == 0.0 {
            return Self::zero();
        }
        Self::from_kind(Kind::Sin { amp, freq, phase })
    }

    pub fn leaf(leaf: Arc<dyn ScalarLeaf>) -> Self {
        Self::from_kind(Kind::Leaf(leaf))
    }

    /// A function known only through closures. Without `df` the result has
    /// no derivative.
    pub fn from_closures<F, G>(tag: impl Into<String>, f: F, df: Option<G>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_kind(Kind::Closure {
            f: Arc::new(f),
            df: df.map(|g| Arc::new(g) as RealFn),
            tag: tag.into(),
        })
    }

    /// Use `taylor` (ascending) for `|t| <= radius`, `self` elsewhere. Used to
    /// remove removable singularities at the singular orbit.
    pub fn guarded(&self, radius: f64, taylor: Vec<f64>) -> Self {
        Self::from_kind(Kind::Guard {
            radius,
            taylor,
            expr: self.clone(),
        })
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.0.kind {
            Kind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    fn ptr_eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn linear_parts(&self) -> (f64, Vec<(f64, ScalarFn)>) {
        match &self.0.kind {
            Kind::Const(c) => (*c, Vec::new()),
            Kind::Linear { constant, terms } => (*constant, terms.clone()),
            _ => (0.0, vec![(1.0, self.clone())]),
        }
    }

    fn from_linear(constant: f64, terms: Vec<(f64, ScalarFn)>) -> Self {
        let terms: Vec<_> = terms.into_iter().filter(|(w, _)| *w != 0.0).collect();
        match (constant, terms.len()) {
            (c, 0) => Self::constant(c),
            (c, 1) if c == 0.0 && terms[0].0 == 1.0 => terms[0].1.clone(),
            _ => Self::from_kind(Kind::Linear { constant, terms }),
        }
    }

    /// Weighted sum; identical subexpressions (by identity) are merged.
    pub fn linear_combination(items: &[(f64, ScalarFn)]) -> Self {
        let mut constant = 0.0;
        let mut terms: Vec<(f64, ScalarFn)> = Vec::new();
        for (w, f) in items {
            let (c, parts) = f.linear_parts();
            constant += w * c;
            for (v, g) in parts {
                match terms.iter_mut().find(|(_, h)| h.ptr_eq(&g)) {
                    Some(slot) => slot.0 += w * v,
                    None => terms.push((w * v, g)),
                }
            }
        }
        Self::from_linear(constant, terms)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::linear_combination(&[(1.0, self.clone()), (1.0, other.clone())])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::linear_combination(&[(1.0, self.clone()), (-1.0, other.clone())])
    }

    pub fn scale(&self, k: f64) -> Self {
        if k == 1.0 {
            return self.clone();
        }
        Self::linear_combination(&[(k, self.clone())])
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::product(&[self.clone(), other.clone()])
    }

    /// Product of factors. Constant factors are pulled out as a weight.
    pub fn product(factors: &[ScalarFn]) -> Self {
        let mut weight = 1.0;
        let mut rest = Vec::with_capacity(factors.len());
        for f in factors {
            match &f.0.kind {
                Kind::Const(c) => weight *= c,
                Kind::Product(inner) => rest.extend(inner.iter().cloned()),
                _ => rest.push(f.clone()),
            }
        }
        if weight == 0.0 {
            return Self::zero();
        }
        let core = match rest.len() {
            0 => return Self::constant(weight),
            1 => rest.pop().unwrap(),
            _ => Self::from_kind(Kind::Product(rest)),
        };
        core.scale(weight)
    }

    pub fn recip(&self) -> Self {
        match self.0.kind {
            Kind::Const(c) => Self::constant(1.0 / c),
            _ => Self::from_kind(Kind::Recip(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Self {
        match self.0.kind {
            Kind::Const(c) => Self::constant(c.sqrt()),
            _ => Self::from_kind(Kind::Sqrt(self.clone())),
        }
    }

    pub fn exp(&self) -> Self {
        match self.0.kind {
            Kind::Const(c) => Self::constant(c.exp()),
            _ => Self::from_kind(Kind::Exp(self.clone())),
        }
    }

    /// `self ∘ inner`, i.e. `t ↦ self(inner(t))`.
    pub fn compose(&self, inner: &ScalarFn) -> Self {
        match self.0.kind {
            Kind::Const(_) => self.clone(),
            _ => Self::from_kind(Kind::Compose {
                outer: self.clone(),
                inner: inner.clone(),
            }),
        }
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        Evaluator::new(t).eval(self)
    }

    /// Value of the first derivative at `t`, if the derivative is known.
    pub fn eval_deriv(&self, t: f64) -> Option<f64> {
        self.derivative().map(|d| d.eval(t))
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative().is_some()
    }

    /// Exact derivative, memoised on the node.
    pub fn derivative(&self) -> Option<ScalarFn> {
        self.0.deriv.get_or_init(|| self.build_derivative()).clone()
    }

    /// `n`-th derivative.
    pub fn nth_derivative(&self, n: usize) -> Option<ScalarFn> {
        let mut f = self.clone();
        for _ in 0..n {
            f = f.derivative()?;
        }
        Some(f)
    }

    fn build_derivative(&self) -> Option<ScalarFn> {
        Some(match &self.0.kind {
            Kind::Const(_) => Self::zero(),
            Kind::Poly(c) => Self::poly(poly_derivative(c)),
            Kind::Sin { amp, freq, phase } => {
                Self::sin(amp * freq, *freq, phase + std::f64::consts::FRAC_PI_2)
            }
            Kind::Linear { terms, .. } => {
                let mut items = Vec::with_capacity(terms.len());
                for (w, f) in terms {
                    items.push((*w, f.derivative()?));
                }
                Self::linear_combination(&items)
            }
            Kind::Product(factors) => {
                let mut items = Vec::with_capacity(factors.len());
                for (i, f) in factors.iter().enumerate() {
                    let df = f.derivative()?;
                    if df.is_zero() {
                        continue;
                    }
                    let mut fs = factors.clone();
                    fs[i] = df;
                    items.push((1.0, Self::product(&fs)));
                }
                Self::linear_combination(&items)
            }
            Kind::Recip(f) => {
                let df = f.derivative()?;
                Self::product(&[df, self.clone(), self.clone()]).neg()
            }
            Kind::Sqrt(f) => {
                let df = f.derivative()?;
                Self::product(&[df, self.recip()]).scale(0.5)
            }
            Kind::Exp(f) => Self::product(&[f.derivative()?, self.clone()]),
            Kind::Compose { outer, inner } => {
                let douter = outer.derivative()?.compose(inner);
                Self::product(&[douter, inner.derivative()?])
            }
            Kind::Guard {
                radius,
                taylor,
                expr,
            } => expr.derivative()?.guarded(*radius, poly_derivative(taylor)),
            Kind::Leaf(leaf) => leaf.derivative()?,
            Kind::Closure { df, tag, .. } => {
                let df = df.clone()?;
                Self::from_kind(Kind::Closure {
                    f: df,
                    df: None,
                    tag: format!("d/dt[{tag}]"),
                })
            }
        })
    }

    fn describe_into(&self, out: &mut String, depth: usize) {
        if depth > 4 {
            out.push('…');
            return;
        }
        match &self.0.kind {
            Kind::Const(c) => out.push_str(&format!("{c}")),
            Kind::Poly(c) => out.push_str(&format!("poly{c:?}")),
            Kind::Sin { amp, freq, phase } => {
                out.push_str(&format!("{amp}·sin({freq}t+{phase})"))
            }
            Kind::Linear { constant, terms } => {
                out.push('(');
                if *constant != 0.0 {
                    out.push_str(&format!("{constant}"));
                }
                for (w, f) in terms {
                    out.push_str(&format!(" + {w}·"));
                    f.describe_into(out, depth + 1);
                }
                out.push(')');
            }
            Kind::Product(fs) => {
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        out.push('·');
                    }
                    f.describe_into(out, depth + 1);
                }
            }
            Kind::Recip(f) => {
                out.push_str("1/(");
                f.describe_into(out, depth + 1);
                out.push(')');
            }
            Kind::Sqrt(f) => {
                out.push_str("sqrt(");
                f.describe_into(out, depth + 1);
                out.push(')');
            }
            Kind::Exp(f) => {
                out.push_str("exp(");
                f.describe_into(out, depth + 1);
                out.push(')');
            }
            Kind::Compose { outer, inner } => {
                outer.describe_into(out, depth + 1);
                out.push_str(" ∘ ");
                inner.describe_into(out, depth + 1);
            }
            Kind::Guard { expr, .. } => expr.describe_into(out, depth),
            Kind::Leaf(l) => out.push_str(&l.describe()),
            Kind::Closure { tag, .. } => out.push_str(tag),
        }
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        self.describe_into(&mut s, 0);
        s
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.describe())
    }
}

impl From<f64> for ScalarFn {
    fn from(c: f64) -> Self {
        ScalarFn::constant(c)
    }
}

pub fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

pub fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a * k as f64)
        .collect()
}

#[derive(Default)]
struct IdHasher(u64);

impl Hasher for IdHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 << 8 | b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }
    fn write_usize(&mut self, n: usize) {
        self.0 = (n as u64 >> 3).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
}

/// Evaluates expression graphs at a fixed `t`, caching node values.
pub struct Evaluator {
    t: f64,
    cache: HashMap<usize, f64, BuildHasherDefault<IdHasher>>,
}

impl Evaluator {
    pub fn new(t: f64) -> Self {
        Evaluator {
            t,
            cache: HashMap::default(),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eval(&mut self, f: &ScalarFn) -> f64 {
        let t = self.t;
        let v = match &f.0.kind {
            Kind::Const(c) => return *c,
            Kind::Poly(c) => return poly_eval(c, t),
            Kind::Sin { amp, freq, phase } => return amp * (freq * t + phase).sin(),
            _ => {
                if let Some(&v) = self.cache.get(&f.id()) {
                    return v;
                }
                self.eval_uncached(f)
            }
        };
        self.cache.insert(f.id(), v);
        v
    }

    fn eval_uncached(&mut self, f: &ScalarFn) -> f64 {
        let t = self.t;
        match &f.0.kind {
            Kind::Linear { constant, terms } => {
                let mut acc = *constant;
                for (w, g) in terms {
                    acc += w * self.eval(g);
                }
                acc
            }
            Kind::Product(fs) => {
                let mut acc = 1.0;
                for g in fs {
                    acc *= self.eval(g);
                }
                acc
            }
            Kind::Recip(g) => 1.0 / self.eval(g),
            Kind::Sqrt(g) => self.eval(g).sqrt(),
            Kind::Exp(g) => self.eval(g).exp(),
            Kind::Compose { outer, inner } => {
                let u = self.eval(inner);
                Evaluator::new(u).eval(outer)
            }
            Kind::Guard {
                radius,
                taylor,
                expr,
            } => {
                if t.abs() <= *radius {
                    poly_eval(taylor, t)
                } else {
                    self.eval(expr)
                }
            }
            Kind::Leaf(l) => l.eval(t),
            Kind::Closure { f, .. } => f(t),
            Kind::Const(_) | Kind::Poly(_) | Kind::Sin { .. } => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_diff(f: &ScalarFn, t: f64) -> f64 {
        let h = 1e-5 * t.abs().max(1.0);
        (f.eval(t + h) - f.eval(t - h)) / (2.0 * h)
    }

    fn assert_deriv_matches(f: &ScalarFn, ts: &[f64]) {
        let df = f.derivative().expect("derivative");
        for &t in ts {
            let exact = df.eval(t);
            let fd = central_diff(f, t);
            let scale = exact.abs().max(1.0);
            assert!(
                (exact - fd).abs() <= 1e-6 * scale,
                "t={t}: exact {exact} vs fd {fd} for {f:?}"
            );
        }
    }

    #[test]
    fn polynomial_value_and_derivative() {
        let p = ScalarFn::poly(vec![1.0, -2.0, 0.5]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 2.0);
        assert_eq!(p.eval_deriv(2.0), Some(-2.0 + 2.0));
    }

    #[test]
    fn composite_derivatives_match_finite_differences() {
        let t = ScalarFn::identity();
        let a = ScalarFn::poly(vec![0.0, 0.5, 0.0, 0.1]);
        let b = ScalarFn::poly(vec![1.0, 0.0, 0.25]).sqrt();
        let s = ScalarFn::sin(0.5, 3.0, 0.2);
        let expr = ScalarFn::product(&[a.clone(), b.clone(), s.clone()])
            .add(&a.mul(&b).recip())
            .sub(&t.scale(3.0).exp())
            .add(&b.compose(&s));
        assert_deriv_matches(&expr, &[0.3, 0.9, 1.7, 2.5]);
        let second = expr.derivative().unwrap();
        assert_deriv_matches(&second, &[0.4, 1.1]);
    }

    #[test]
    fn linear_combination_cancels_identical_terms() {
        let a = ScalarFn::poly(vec![0.0, 1.0, 2.0]);
        let z = a.sub(&a);
        assert!(z.is_zero());
        let two_a = a.add(&a);
        assert_eq!(two_a.eval(1.5), 2.0 * a.eval(1.5));
    }

    #[test]
    fn closure_without_derivative_reports_none() {
        let f = ScalarFn::from_closures("opaque", |t: f64| t * t, None::<fn(f64) -> f64>);
        assert!(!f.has_derivative());
        assert!(!f.mul(&ScalarFn::identity()).has_derivative());
        let g = ScalarFn::from_closures("sq", |t: f64| t * t, Some(|t: f64| 2.0 * t));
        assert_eq!(g.eval_deriv(3.0), Some(6.0));
    }

    #[test]
    fn guard_uses_taylor_near_zero() {
        // sin(t)/t with removable singularity at 0
        let expr = ScalarFn::sin(1.0, 1.0, 0.0).mul(&ScalarFn::identity().recip());
        let g = expr.guarded(1e-8, vec![1.0, 0.0, -1.0 / 6.0]);
        assert_eq!(g.eval(0.0), 1.0);
        assert!((g.eval(0.5) - 0.5f64.sin() / 0.5).abs() < 1e-15);
        assert_eq!(g.eval_deriv(0.0), Some(0.0));
    }

    #[test]
    fn derivative_is_memoised() {
        let f = ScalarFn::poly(vec![0.0, 1.0]).sqrt();
        let d1 = f.derivative().unwrap();
        let d2 = f.derivative().unwrap();
        assert!(d1.ptr_eq(&d2));
    }
}
