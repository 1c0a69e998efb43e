//! Windowed graded vector spaces and degree-shifting linear maps.
//!
//! Grading is homological throughout. A [`WindowedGradedSpace`] knows its
//! basis exactly on `window`; outside the window it is either known to be
//! zero (the `complete_*` flags) or unknown. Any query that would depend on an
//! unknown degree is an error rather than a silent zero.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fplin::{self, FpMatrix};

/// Closed degree interval `[lo, hi]`. Serialized as `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl TryFrom<(i64, i64)> for Window {
    type Error = Error;

    fn try_from((lo, hi): (i64, i64)) -> Result<Self> {
        Window::new(lo, hi)
    }
}

impl From<Window> for (i64, i64) {
    fn from(w: Window) -> Self {
        (w.lo, w.hi)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Window(format!("lower end {lo} exceeds upper end {hi}")));
        }
        Ok(Window { lo, hi })
    }

    /// `[lo, hi]` if nonempty.
    pub fn try_new(lo: i64, hi: i64) -> Option<Self> {
        (lo <= hi).then_some(Window { lo, hi })
    }

    pub fn point(d: i64) -> Self {
        Window { lo: d, hi: d }
    }

    pub fn contains(&self, d: i64) -> bool {
        self.lo <= d && d <= self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        Window::try_new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn shift(&self, n: i64) -> Window {
        Window { lo: self.lo + n, hi: self.hi + n }
    }

    pub fn negate(&self) -> Window {
        Window { lo: -self.hi, hi: -self.lo }
    }

    /// Shrink by `below` at the bottom and `above` at the top.
    pub fn shrink(&self, below: i64, above: i64) -> Option<Window> {
        Window::try_new(self.lo + below, self.hi - above)
    }

    pub fn degrees(&self) -> impl DoubleEndedIterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Graded F_p vector space with a named basis, exact on its window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceJson", into = "SpaceJson")]
pub struct WindowedGradedSpace {
    p: u64,
    window: Window,
    basis: BTreeMap<i64, Vec<String>>,
    complete_below: bool,
    complete_above: bool,
}

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    p: u64,
    window: Window,
    basis: BTreeMap<i64, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    complete: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    complete_below: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    complete_above: Option<bool>,
}

impl TryFrom<SpaceJson> for WindowedGradedSpace {
    type Error = Error;

    fn try_from(j: SpaceJson) -> Result<Self> {
        // Hand-written spaces list everything they have unless told otherwise.
        let both = j.complete.unwrap_or(true);
        let mut v = WindowedGradedSpace::new(j.p, j.window)?;
        v.complete_below = j.complete_below.unwrap_or(both);
        v.complete_above = j.complete_above.unwrap_or(both);
        for (d, labels) in j.basis {
            v.set_degree(d, labels)?;
        }
        Ok(v)
    }
}

impl From<WindowedGradedSpace> for SpaceJson {
    fn from(v: WindowedGradedSpace) -> Self {
        let complete = (v.complete_below == v.complete_above).then_some(v.complete_below);
        let split = complete.is_none();
        SpaceJson {
            p: v.p,
            window: v.window,
            basis: v.basis,
            complete,
            complete_below: split.then_some(v.complete_below),
            complete_above: split.then_some(v.complete_above),
        }
    }
}

const NEG_INF: i64 = i64::MIN / 4;
const POS_INF: i64 = i64::MAX / 4;

impl WindowedGradedSpace {
    /// The zero space on `window`, with nothing known outside it.
    pub fn new(p: u64, window: Window) -> Result<Self> {
        fplin::check_prime(p)?;
        Ok(WindowedGradedSpace {
            p,
            window,
            basis: BTreeMap::new(),
            complete_below: false,
            complete_above: false,
        })
    }

    /// A space known to vanish outside `window`.
    pub fn complete(p: u64, window: Window) -> Result<Self> {
        let mut v = Self::new(p, window)?;
        v.complete_below = true;
        v.complete_above = true;
        Ok(v)
    }

    /// One basis element `label` in degree `d`, zero elsewhere.
    pub fn point(p: u64, d: i64, label: &str) -> Result<Self> {
        let mut v = Self::complete(p, Window::point(d))?;
        v.set_degree(d, vec![label.to_string()])?;
        Ok(v)
    }

    pub fn set_completeness(&mut self, below: bool, above: bool) {
        self.complete_below = below;
        self.complete_above = above;
    }

    /// Replace the basis in degree `d`.
    pub fn set_degree(&mut self, d: i64, labels: Vec<String>) -> Result<()> {
        if !self.window.contains(d) {
            return Err(Error::OutsideWindow { degree: d, lo: self.window.lo, hi: self.window.hi });
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Input(format!("duplicate label {l:?} in degree {d}")));
            }
        }
        if labels.is_empty() {
            self.basis.remove(&d);
        } else {
            self.basis.insert(d, labels);
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn complete_below(&self) -> bool {
        self.complete_below
    }

    pub fn complete_above(&self) -> bool {
        self.complete_above
    }

    /// Whether the dimension in degree `d` is determined.
    pub fn knows(&self, d: i64) -> bool {
        self.window.contains(d)
            || (d < self.window.lo && self.complete_below)
            || (d > self.window.hi && self.complete_above)
    }

    pub fn dim(&self, d: i64) -> Result<usize> {
        if !self.knows(d) {
            return Err(Error::OutsideWindow { degree: d, lo: self.window.lo, hi: self.window.hi });
        }
        Ok(self.basis.get(&d).map_or(0, Vec::len))
    }

    /// Dimension in degree `d`, treating unknown degrees as zero. Only for
    /// callers that have already restricted to a valid window.
    pub fn dim_or_zero(&self, d: i64) -> usize {
        self.basis.get(&d).map_or(0, Vec::len)
    }

    pub fn labels(&self, d: i64) -> &[String] {
        self.basis.get(&d).map_or(&[], Vec::as_slice)
    }

    pub fn index_of(&self, d: i64, label: &str) -> Option<usize> {
        self.labels(d).iter().position(|l| l == label)
    }

    /// Degrees with a nonzero basis, ascending.
    pub fn support(&self) -> impl Iterator<Item = (i64, &[String])> {
        self.basis.iter().map(|(&d, l)| (d, l.as_slice()))
    }

    pub fn total_dim(&self) -> usize {
        self.basis.values().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn min_nonzero(&self) -> Option<i64> {
        self.basis.keys().next().copied()
    }

    pub fn max_nonzero(&self) -> Option<i64> {
        self.basis.keys().next_back().copied()
    }

    /// Exact dimensions on `w`, which must be a known region.
    pub fn dim_vector(&self, w: Window) -> Result<Vec<(i64, usize)>> {
        w.degrees().map(|d| Ok((d, self.dim(d)?))).collect()
    }

    /// Same basis, viewed on a narrower window. Degrees cut away become unknown.
    pub fn restrict(&self, w: Window) -> Result<Self> {
        let inner = self
            .window
            .intersect(&w)
            .ok_or_else(|| Error::Window(format!("{w} does not meet {}", self.window)))?;
        let mut out = Self::new(self.p, inner)?;
        out.complete_below = self.complete_below && inner.lo == self.window.lo;
        out.complete_above = self.complete_above && inner.hi == self.window.hi;
        out.basis = self.basis.range(inner.lo..=inner.hi).map(|(&d, l)| (d, l.clone())).collect();
        Ok(out)
    }

    /// Σ^n: degree `d` of the result is degree `d - n` of `self`.
    pub fn suspend(&self, n: i64) -> Self {
        WindowedGradedSpace {
            p: self.p,
            window: self.window.shift(n),
            basis: self.basis.iter().map(|(&d, l)| (d + n, l.clone())).collect(),
            complete_below: self.complete_below,
            complete_above: self.complete_above,
        }
    }

    /// Degreewise linear dual: degree `d` of the dual is degree `-d` of `self`.
    /// The dual basis element to `x` is labelled `x*`.
    pub fn dual(&self) -> Self {
        WindowedGradedSpace {
            p: self.p,
            window: self.window.negate(),
            basis: self
                .basis
                .iter()
                .map(|(&d, l)| (-d, l.iter().map(|x| dual_label(x)).collect()))
                .collect(),
            complete_below: self.complete_above,
            complete_above: self.complete_below,
        }
    }

    /// Supremum of the degrees that might carry a nonzero class.
    fn sup_possible(&self) -> i64 {
        if !self.complete_above {
            return POS_INF;
        }
        let unknown_below = if self.complete_below { NEG_INF } else { self.window.lo - 1 };
        self.max_nonzero().unwrap_or(NEG_INF).max(unknown_below)
    }

    fn inf_possible(&self) -> i64 {
        if !self.complete_below {
            return NEG_INF;
        }
        let unknown_above = if self.complete_above { POS_INF } else { self.window.hi + 1 };
        self.min_nonzero().unwrap_or(POS_INF).min(unknown_above)
    }

    /// Window on which `a ⊗ b` is exactly determined by the known parts of
    /// `a` and `b`, plus completeness of the result.
    pub fn tensor_window(a: &Self, b: &Self) -> Result<(Window, bool, bool)> {
        let mut lo = a.window.lo + b.window.lo;
        let mut hi = a.window.hi + b.window.hi;
        let mut below = true;
        let mut above = true;
        // Each unknown tail of one factor pairs against the possibly nonzero
        // part of the other; a degree is exact only when no such pair lands in it.
        for (x, y) in [(a, b), (b, a)] {
            if !x.complete_below {
                let s = y.sup_possible();
                if s == POS_INF {
                    return Err(Error::Window("both factors are unbounded in opposite directions".into()));
                }
                if s != NEG_INF {
                    lo = lo.max(x.window.lo + s);
                    below = false;
                }
            }
            if !x.complete_above {
                let i = y.inf_possible();
                if i == NEG_INF {
                    return Err(Error::Window("both factors are unbounded in opposite directions".into()));
                }
                if i != POS_INF {
                    hi = hi.min(x.window.hi + i);
                    above = false;
                }
            }
        }
        let w = Window::new(lo, hi).map_err(|_| Error::Window("tensor product has no exact degrees".into()))?;
        Ok((w, below, above))
    }

    /// Tensor product over F_p. Basis `x⊗y` ordered by (|x|, index of x, index of y).
    pub fn tensor(a: &Self, b: &Self) -> Result<Self> {
        if a.p != b.p {
            return Err(Error::Shape("tensor of spaces over different primes".into()));
        }
        let (w, below, above) = Self::tensor_window(a, b)?;
        let mut out = Self::new(a.p, w)?;
        out.complete_below = below;
        out.complete_above = above;
        for (d, labels) in Self::tensor_pairs(a, b, w) {
            let names = labels
                .into_iter()
                .map(|(e, i, j)| tensor_label(&a.labels(e)[i], &b.labels(d - e)[j]))
                .collect();
            out.set_degree(d, names)?;
        }
        Ok(out)
    }

    /// For each degree of `w`, the contributing `(|x|, i, j)` triples in the
    /// canonical tensor order.
    pub fn tensor_pairs(a: &Self, b: &Self, w: Window) -> BTreeMap<i64, Vec<(i64, usize, usize)>> {
        let mut out: BTreeMap<i64, Vec<(i64, usize, usize)>> = BTreeMap::new();
        for (e, la) in a.support() {
            for (f, lb) in b.support() {
                let d = e + f;
                if !w.contains(d) {
                    continue;
                }
                let slot = out.entry(d).or_default();
                for i in 0..la.len() {
                    for j in 0..lb.len() {
                        slot.push((e, i, j));
                    }
                }
            }
        }
        for v in out.values_mut() {
            v.sort();
        }
        out
    }

    /// `a ⊕ b`, labels `(x,0)` and `(0,y)`. `a`-summands come first in each degree.
    pub fn direct_sum(a: &Self, b: &Self) -> Result<Self> {
        if a.p != b.p {
            return Err(Error::Shape("sum of spaces over different primes".into()));
        }
        let w = a
            .window
            .intersect(&b.window)
            .ok_or_else(|| Error::Window("direct sum of disjoint windows".into()))?;
        let mut out = Self::new(a.p, w)?;
        out.complete_below = a.complete_below && b.complete_below && a.window.lo == b.window.lo;
        out.complete_above = a.complete_above && b.complete_above && a.window.hi == b.window.hi;
        for d in w.degrees() {
            let mut l: Vec<String> = a.labels(d).iter().map(|x| format!("({x},0)")).collect();
            l.extend(b.labels(d).iter().map(|y| format!("(0,{y})")));
            out.set_degree(d, l)?;
        }
        Ok(out)
    }
}

pub fn dual_label(x: &str) -> String {
    format!("{x}*")
}

pub fn tensor_label(x: &str, y: &str) -> String {
    let wrap = |s: &str| if s.contains('⊗') { format!("({s})") } else { s.to_string() };
    format!("{}⊗{}", wrap(x), wrap(y))
}

/// A family of matrices `source_d → target_{d+shift}`, defined for source
/// degrees in `domain`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedMap {
    pub source: WindowedGradedSpace,
    pub target: WindowedGradedSpace,
    pub shift: i64,
    pub domain: Window,
    blocks: BTreeMap<i64, FpMatrix>,
}

impl GradedMap {
    pub fn zero(source: WindowedGradedSpace, target: WindowedGradedSpace, shift: i64, domain: Window) -> Self {
        GradedMap { source, target, shift, domain, blocks: BTreeMap::new() }
    }

    pub fn identity(space: &WindowedGradedSpace) -> Self {
        let mut m = GradedMap::zero(space.clone(), space.clone(), 0, space.window());
        for (d, l) in space.support() {
            m.blocks.insert(d, FpMatrix::identity(space.p(), l.len()));
        }
        m
    }

    pub fn p(&self) -> u64 {
        self.source.p()
    }

    /// Install the block for source degree `d`; shapes are checked.
    pub fn set_block(&mut self, d: i64, m: FpMatrix) -> Result<()> {
        if !self.domain.contains(d) {
            return Err(Error::OutsideWindow { degree: d, lo: self.domain.lo, hi: self.domain.hi });
        }
        let rows = self.target.dim_or_zero(d + self.shift);
        let cols = self.source.dim_or_zero(d);
        if m.rows() != rows || m.cols() != cols {
            return Err(Error::Shape(format!(
                "block at degree {d} is {}x{}, expected {rows}x{cols}",
                m.rows(),
                m.cols()
            )));
        }
        if m.is_zero() {
            self.blocks.remove(&d);
        } else {
            self.blocks.insert(d, m);
        }
        Ok(())
    }

    /// Block at source degree `d` (a zero matrix when nothing is stored).
    pub fn block(&self, d: i64) -> FpMatrix {
        match self.blocks.get(&d) {
            Some(m) => m.clone(),
            None => FpMatrix::zero(
                self.p(),
                self.target.dim_or_zero(d + self.shift),
                self.source.dim_or_zero(d),
            ),
        }
    }

    pub fn stored_blocks(&self) -> impl Iterator<Item = (i64, &FpMatrix)> {
        self.blocks.iter().map(|(&d, m)| (d, m))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `self ∘ rhs`, defined where `rhs` lands in the domain of `self`.
    pub fn compose(&self, rhs: &GradedMap) -> Result<GradedMap> {
        let lo = rhs.domain.lo.max(self.domain.lo - rhs.shift);
        let hi = rhs.domain.hi.min(self.domain.hi - rhs.shift);
        let domain = Window::new(lo, hi).map_err(|_| Error::Window("composite has empty domain".into()))?;
        let mut out = GradedMap::zero(rhs.source.clone(), self.target.clone(), self.shift + rhs.shift, domain);
        for d in domain.degrees() {
            if rhs.source.dim_or_zero(d) == 0 {
                continue;
            }
            let m = self.block(d + rhs.shift).mul(&rhs.block(d))?;
            out.set_block(d, m)?;
        }
        Ok(out)
    }

    /// Degreewise transpose: a map `target* → source*` of the same shift.
    pub fn dual(&self) -> GradedMap {
        let src = self.target.dual();
        let tgt = self.source.dual();
        let domain = self.domain.shift(self.shift).negate();
        let mut out = GradedMap::zero(src, tgt, self.shift, domain);
        for (d, m) in &self.blocks {
            // source degree of the dual block is -(d + shift)
            out.blocks.insert(-(d + self.shift), m.transpose());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: u64, w: (i64, i64), dims: &[(i64, usize)]) -> WindowedGradedSpace {
        let mut v = WindowedGradedSpace::complete(p, Window::new(w.0, w.1).unwrap()).unwrap();
        for &(d, n) in dims {
            v.set_degree(d, (0..n).map(|i| format!("x{d}_{i}")).collect()).unwrap();
        }
        v
    }

    #[test]
    fn suspend_shifts_and_inverts() {
        let k = WindowedGradedSpace::point(3, 0, "1").unwrap();
        let s = k.suspend(5);
        assert_eq!(s.dim(5).unwrap(), 1);
        assert_eq!(s.dim(0).unwrap(), 0);
        assert_eq!(k.suspend(0), k);
        let v = space(5, (-2, 6), &[(0, 2), (3, 1)]);
        assert_eq!(v.suspend(3).suspend(-3), v);
    }

    #[test]
    fn dual_negates_degrees() {
        let k = WindowedGradedSpace::point(2, 7, "x").unwrap();
        let d = k.dual();
        assert_eq!(d.dim(-7).unwrap(), 1);
        assert_eq!(d.labels(-7), ["x*".to_string()]);
        let v = space(3, (-1, 4), &[(0, 1), (4, 3)]);
        assert_eq!(v.dual().dual().dim_vector(v.window()).unwrap(), v.dim_vector(v.window()).unwrap());
        assert!(space(3, (0, 0), &[]).dual().is_zero());
    }

    #[test]
    fn tensor_dimension_formula() {
        let a = space(3, (0, 6), &[(0, 1), (2, 2), (5, 1)]);
        let b = space(3, (-1, 3), &[(-1, 1), (1, 2), (3, 1)]);
        let t = WindowedGradedSpace::tensor(&a, &b).unwrap();
        for d in t.window().degrees() {
            let brute: usize = (-20..20).map(|e| a.dim_or_zero(e) * b.dim_or_zero(d - e)).sum();
            assert_eq!(t.dim(d).unwrap(), brute, "degree {d}");
        }
        let k = WindowedGradedSpace::point(3, 0, "1").unwrap();
        let kb = WindowedGradedSpace::tensor(&k, &b).unwrap();
        assert_eq!(kb.dim_vector(b.window()).unwrap(), b.dim_vector(b.window()).unwrap());
    }

    #[test]
    fn tensor_window_of_half_open_spaces() {
        let mut a = space(2, (0, 10), &[(0, 1), (4, 1), (8, 1)]);
        a.set_completeness(true, false);
        let b = a.clone();
        let t = WindowedGradedSpace::tensor(&a, &b).unwrap();
        assert_eq!(t.window(), Window::new(0, 10).unwrap());
        assert!(t.complete_below() && !t.complete_above());
        assert!(t.dim(11).is_err());
    }

    #[test]
    fn dim_vector_rejects_unknown_region() {
        let mut v = space(2, (0, 4), &[(0, 1)]);
        v.set_completeness(true, false);
        assert!(v.dim_vector(Window::new(0, 5).unwrap()).is_err());
        assert_eq!(v.dim_vector(Window::new(-2, 1).unwrap()).unwrap(), vec![(-2, 0), (-1, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn suspension_commutes_with_dual() {
        let v = space(5, (-3, 4), &[(-3, 1), (0, 2), (4, 1)]);
        let lhs = v.suspend(2).dual();
        let rhs = v.dual().suspend(-2);
        assert_eq!(lhs.dim_vector(lhs.window()).unwrap(), rhs.dim_vector(rhs.window()).unwrap());
    }

    #[test]
    fn json_round_trip_defaults_to_complete() {
        let s = r#"{"p":3,"window":[0,3],"basis":{"0":["a"],"3":["b","c"]}}"#;
        let v: WindowedGradedSpace = serde_json::from_str(s).unwrap();
        assert!(v.complete_below() && v.complete_above());
        assert_eq!(v.dim(3).unwrap(), 2);
        let back: WindowedGradedSpace = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn map_compose_and_dual() {
        let v = space(3, (0, 2), &[(0, 1), (1, 1), (2, 1)]);
        let mut f = GradedMap::zero(v.clone(), v.clone(), -1, v.window());
        f.set_block(1, FpMatrix::from_rows(3, &[vec![2]])).unwrap();
        f.set_block(2, FpMatrix::from_rows(3, &[vec![1]])).unwrap();
        let ff = f.compose(&f).unwrap();
        assert_eq!(ff.block(2), FpMatrix::from_rows(3, &[vec![2]]));
        let fd = f.dual();
        assert_eq!(fd.block(-1), FpMatrix::from_rows(3, &[vec![1]]));
        assert_eq!(fd.block(0), FpMatrix::from_rows(3, &[vec![2]]));
    }
}
