use std::fmt;

/// One element of the invariant coframe `{dt, η₁⁺, η₂⁺, η₃⁺, η₁⁻, η₂⁻, η₃⁻}`,
/// in that fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(u8);

impl BasisIndex {
    pub const DT: BasisIndex = BasisIndex(0);
    pub const COUNT: usize = 7;

    pub fn new(code: u8) -> Option<Self> {
        (code < 7).then_some(BasisIndex(code))
    }

    /// `η_i⁺` for `i ∈ {1,2,3}`.
    pub fn plus(i: usize) -> Self {
        assert!((1..=3).contains(&i), "frame index {i} out of range");
        BasisIndex(i as u8)
    }

    /// `η_i⁻` for `i ∈ {1,2,3}`.
    pub fn minus(i: usize) -> Self {
        assert!((1..=3).contains(&i), "frame index {i} out of range");
        BasisIndex(i as u8 + 3)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = BasisIndex> {
        (0..7).map(BasisIndex)
    }

    pub fn name(self) -> &'static str {
        ["dt", "η1+", "η2+", "η3+", "η1-", "η2-", "η3-"][self.0 as usize]
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A wedge of distinct coframe elements in ascending order, as a 7-bit mask.
/// Signs live in the coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(u8);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);
    pub const VOLUME: Monomial = Monomial(0x7f);

    pub fn from_mask(mask: u8) -> Option<Self> {
        (mask < 0x80).then_some(Monomial(mask))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn single(b: BasisIndex) -> Self {
        Monomial(1 << b.code())
    }

    pub fn contains(self, b: BasisIndex) -> bool {
        self.0 & (1 << b.code()) != 0
    }

    pub fn indices(self) -> impl Iterator<Item = BasisIndex> {
        BasisIndex::all().filter(move |&b| self.contains(b))
    }

    pub fn complement(self) -> Self {
        Monomial(!self.0 & 0x7f)
    }

    /// Canonical monomial and sign of `e_{i₁}∧…∧e_{iₖ}` for an arbitrary
    /// index sequence; `None` if an index repeats.
    pub fn from_sequence(seq: &[BasisIndex]) -> Option<(Monomial, i32)> {
        let mut acc = (Monomial::ONE, 1);
        for &b in seq {
            let (m, s) = acc.0.wedge(Monomial::single(b))?;
            acc = (m, acc.1 * s);
        }
        Some(acc)
    }

    /// `self ∧ other = sign · result`, or `None` when they share an index.
    pub fn wedge(self, other: Monomial) -> Option<(Monomial, i32)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // Each pair (a ∈ self, b ∈ other) with a > b costs one transposition.
        let mut swaps = 0u32;
        for b in other.indices() {
            let above = self.0 >> (b.code() + 1);
            swaps += above.count_ones();
        }
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        Some((Monomial(self.0 | other.0), sign))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("1");
        }
        let names: Vec<_> = self.indices().map(|b| b.name()).collect();
        f.write_str(&names.join("∧"))
    }
}
