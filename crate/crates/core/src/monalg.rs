//! Graded-commutative monomial algebras over F_p.
//!
//! An algebra is a tensor product of single-generator algebras, each
//! polynomial, exterior, truncated polynomial, or a Laurent interval. Only
//! windows of such algebras are ever materialized.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fplin::{self, FpMatrix};
use crate::graded::{GradedMap, Window, WindowedGradedSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpRange {
    /// `[0, ∞)`
    Polynomial,
    /// `{0, 1}`
    Exterior,
    /// `[0, h)`
    Truncated(i64),
    /// `(−∞, e_max]`; products past `e_max` vanish.
    LaurentBelow(i64),
    /// `(−∞, ∞)`
    Laurent,
}

impl ExpRange {
    fn bounds(&self) -> (Option<i64>, Option<i64>) {
        match *self {
            ExpRange::Polynomial => (Some(0), None),
            ExpRange::Exterior => (Some(0), Some(1)),
            ExpRange::Truncated(h) => (Some(0), Some(h - 1)),
            ExpRange::LaurentBelow(e) => (None, Some(e)),
            ExpRange::Laurent => (None, None),
        }
    }

    pub fn admits(&self, e: i64) -> bool {
        let (lo, hi) = self.bounds();
        lo.is_none_or(|l| e >= l) && hi.is_none_or(|h| e <= h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Parity>,
    pub range: ExpRange,
}

impl GeneratorSpec {
    pub fn new(name: impl Into<String>, degree: i64, range: ExpRange) -> Self {
        GeneratorSpec { name: name.into(), degree, parity: None, range }
    }

    pub fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }
}

/// Exponent vector in generator order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<i64>);

impl Monomial {
    pub fn unit(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn exps(&self) -> &[i64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialAlgebra {
    p: u64,
    generators: Vec<GeneratorSpec>,
}

/// An F_p-linear combination of monomials. Coefficients are nonzero residues.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<Monomial, u64>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: Monomial, c: u64) -> Self {
        let mut e = Self::zero();
        if c != 0 {
            e.terms.insert(m, c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &Monomial) -> u64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, p: u64, m: Monomial, c: u64) {
        let c = c % p;
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m).or_insert(0);
        *e = fplin::add(p, *e, c);
        if *e == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add_assign(&mut self, p: u64, rhs: &AlgebraElement) {
        for (m, c) in rhs.terms() {
            self.add_term(p, m.clone(), c);
        }
    }

    pub fn scale(&self, p: u64, s: u64) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, c) in self.terms() {
            out.add_term(p, m.clone(), fplin::mul(p, c, s % p));
        }
        out
    }
}

impl MonomialAlgebra {
    pub fn new(p: u64, generators: Vec<GeneratorSpec>) -> Result<Self> {
        fplin::check_prime(p)?;
        let mut names = std::collections::HashSet::new();
        for g in &generators {
            if g.degree == 0 {
                return Err(Error::Input(format!("generator {} has degree 0", g.name)));
            }
            if !names.insert(g.name.as_str()) {
                return Err(Error::Input(format!("duplicate generator {}", g.name)));
            }
            let odd = g.is_odd();
            if let Some(par) = g.parity {
                if (par == Parity::Odd) != odd {
                    return Err(Error::Input(format!("generator {} has parity {par:?} but degree {}", g.name, g.degree)));
                }
            }
            if odd && p != 2 && g.range != ExpRange::Exterior {
                return Err(Error::Input(format!("odd generator {} must be exterior at p={p}", g.name)));
            }
            if let ExpRange::Truncated(h) = g.range {
                if h < 1 {
                    return Err(Error::Input(format!("truncation height {h} for {}", g.name)));
                }
            }
            if g.name.is_empty() || g.name.chars().any(|c| "+-* ".contains(c)) && !g.name.starts_with('(') {
                return Err(Error::Input(format!("unusable generator name {:?}", g.name)));
            }
        }
        Ok(MonomialAlgebra { p, generators })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.generators
    }

    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn degree(&self, m: &Monomial) -> i64 {
        m.0.iter().zip(&self.generators).map(|(&e, g)| e * g.degree).sum()
    }

    pub fn unit(&self) -> Monomial {
        Monomial::unit(self.ngens())
    }

    /// `g_i^e` as a monomial.
    pub fn gen_power(&self, i: usize, e: i64) -> Monomial {
        let mut m = self.unit();
        m.0[i] = e;
        m
    }

    pub fn label(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .0
            .iter()
            .zip(&self.generators)
            .filter(|(&e, _)| e != 0)
            .map(|(&e, g)| {
                let name = if g.name.contains('^') && !g.name.starts_with('(') {
                    format!("({})", g.name)
                } else {
                    g.name.clone()
                };
                if e == 1 {
                    name
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    pub fn element_degree(&self, x: &AlgebraElement) -> Result<Option<i64>> {
        let mut deg = None;
        for (m, _) in x.terms() {
            let d = self.degree(m);
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => {
                    return Err(Error::Inhomogeneous(format!("terms in degrees {e} and {d}")));
                }
                _ => {}
            }
        }
        Ok(deg)
    }

    pub fn element_to_string(&self, x: &AlgebraElement) -> String {
        if x.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = x
            .terms()
            .map(|(m, c)| {
                let l = self.label(m);
                match (c, l.as_str()) {
                    (1, _) => l,
                    (_, "1") => c.to_string(),
                    _ => format!("{c}*{l}"),
                }
            })
            .collect();
        parts.join(" + ")
    }

    /// Product of two monomials: `Some((product, ±1))`, or `None` when a
    /// relation kills it.
    pub fn mul_monomials(&self, x: &Monomial, y: &Monomial) -> Option<(Monomial, u64)> {
        let p = self.p;
        let n = self.ngens();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let e = x.0[i] + y.0[i];
            if !self.generators[i].range.admits(e) {
                return None;
            }
            if p != 2 && self.generators[i].is_odd() && x.0[i] != 0 && y.0[i] != 0 {
                return None;
            }
            out.push(e);
        }
        let mut sign = false;
        if p != 2 {
            // y's factor j moves left past x's factors i > j.
            let mut odd_x_after = 0i64;
            for j in (0..n).rev() {
                if self.generators[j].is_odd() && y.0[j].rem_euclid(2) == 1 && odd_x_after % 2 == 1 {
                    sign = !sign;
                }
                if self.generators[j].is_odd() {
                    odd_x_after += x.0[j].rem_euclid(2);
                }
            }
        }
        Some((Monomial(out), if sign { p - 1 } else { 1 }))
    }

    pub fn multiply(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let p = self.p;
        let mut out = AlgebraElement::zero();
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                if let Some((m, s)) = self.mul_monomials(a, b) {
                    out.add_term(p, m, fplin::mul(p, fplin::mul(p, ca, cb), s));
                }
            }
        }
        out
    }

    /// Per-generator exponent bounds forced by the window, by interval
    /// propagation on degree contributions.
    fn exponent_bounds(&self, w: Window) -> Result<Vec<(i64, i64)>> {
        const INF: i128 = i128::MAX / 8;
        let n = self.ngens();
        // contribution intervals c_i = e_i * deg_i
        let mut lo = vec![-INF; n];
        let mut hi = vec![INF; n];
        for (i, g) in self.generators.iter().enumerate() {
            let (el, eh) = g.range.bounds();
            let d = g.degree as i128;
            let (a, b) = (el.map(|e| e as i128 * d), eh.map(|e| e as i128 * d));
            let (cl, ch) = if d > 0 { (a, b) } else { (b, a) };
            lo[i] = cl.unwrap_or(-INF);
            hi[i] = ch.unwrap_or(INF);
        }
        let (wl, wh) = (w.lo as i128, w.hi as i128);
        loop {
            let mut changed = false;
            let sum_lo: i128 = lo.iter().map(|&v| v.max(-INF)).sum::<i128>();
            let sum_hi: i128 = hi.iter().map(|&v| v.min(INF)).sum::<i128>();
            for i in 0..n {
                let others_hi = if hi[i] >= INF { sum_hi_excluding(&hi, i) } else { sum_hi - hi[i] };
                let others_lo = if lo[i] <= -INF { sum_lo_excluding(&lo, i) } else { sum_lo - lo[i] };
                if others_hi < INF {
                    let nl = wl - others_hi;
                    if nl > lo[i] {
                        lo[i] = nl;
                        changed = true;
                    }
                }
                if others_lo > -INF {
                    let nh = wh - others_lo;
                    if nh < hi[i] {
                        hi[i] = nh;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
            if (0..n).any(|i| lo[i] > hi[i]) {
                break;
            }
        }
        let mut out = Vec::with_capacity(n);
        for (i, g) in self.generators.iter().enumerate() {
            if lo[i] <= -INF || hi[i] >= INF {
                return Err(Error::Unbounded(format!(
                    "generator {} contributes infinitely many monomials to window {w}",
                    g.name
                )));
            }
            let d = g.degree as i128;
            // exponent range from contribution range
            let (el, eh) = if d > 0 {
                (div_ceil(lo[i], d), div_floor(hi[i], d))
            } else {
                (div_ceil(hi[i], d), div_floor(lo[i], d))
            };
            let (rl, rh) = g.range.bounds();
            let el = rl.map_or(el, |r| el.max(r as i128));
            let eh = rh.map_or(eh, |r| eh.min(r as i128));
            out.push((el as i64, eh as i64));
        }
        Ok(out)
    }

    /// All monomials with degree in `w`, grouped by degree, labels in
    /// lexicographic exponent order.
    pub fn enumerate_basis(&self, w: Window) -> Result<MonomialBasis> {
        let bounds = self.exponent_bounds(w)?;
        let n = self.ngens();
        let mut found: BTreeMap<i64, Vec<Monomial>> = BTreeMap::new();
        if bounds.iter().all(|&(l, h)| l <= h) {
            // Suffix min/max degree for pruning.
            let mut suf_min = vec![0i64; n + 1];
            let mut suf_max = vec![0i64; n + 1];
            for i in (0..n).rev() {
                let d = self.generators[i].degree;
                let (l, h) = bounds[i];
                suf_min[i] = suf_min[i + 1] + (l * d).min(h * d);
                suf_max[i] = suf_max[i + 1] + (l * d).max(h * d);
            }
            let mut cur = vec![0i64; n];
            self.dfs(0, 0, &bounds, &suf_min, &suf_max, w, &mut cur, &mut found);
        }
        for v in found.values_mut() {
            v.sort();
        }
        let mut space = WindowedGradedSpace::new(self.p, w)?;
        let (below, above) = self.global_extent();
        space.set_completeness(below.is_some_and(|b| b >= w.lo), above.is_some_and(|a| a <= w.hi));
        for (d, ms) in &found {
            space.set_degree(*d, ms.iter().map(|m| self.label(m)).collect())?;
        }
        let mut index = HashMap::new();
        for (d, ms) in &found {
            for (i, m) in ms.iter().enumerate() {
                index.insert(m.clone(), (*d, i));
            }
        }
        Ok(MonomialBasis { space, monomials: found, index })
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        i: usize,
        deg: i64,
        bounds: &[(i64, i64)],
        suf_min: &[i64],
        suf_max: &[i64],
        w: Window,
        cur: &mut Vec<i64>,
        out: &mut BTreeMap<i64, Vec<Monomial>>,
    ) {
        if deg + suf_max[i] < w.lo || deg + suf_min[i] > w.hi {
            return;
        }
        if i == cur.len() {
            out.entry(deg).or_default().push(Monomial(cur.clone()));
            return;
        }
        let d = self.generators[i].degree;
        for e in bounds[i].0..=bounds[i].1 {
            cur[i] = e;
            self.dfs(i + 1, deg + e * d, bounds, suf_min, suf_max, w, cur, out);
        }
        cur[i] = 0;
    }

    /// Lowest and highest degree of any monomial, if finite.
    pub fn global_extent(&self) -> (Option<i64>, Option<i64>) {
        let mut lo = Some(0i64);
        let mut hi = Some(0i64);
        for g in &self.generators {
            let (el, eh) = g.range.bounds();
            let (a, b) = (el.map(|e| e * g.degree), eh.map(|e| e * g.degree));
            let (cl, ch) = if g.degree > 0 { (a, b) } else { (b, a) };
            lo = lo.zip(cl).map(|(x, y)| x + y);
            hi = hi.zip(ch).map(|(x, y)| x + y);
        }
        (lo, hi)
    }

    /// Extend generator values to a derivation of degree `shift` on the
    /// windowed basis: `D(xy) = D(x)y + (−1)^{shift·|x|} x D(y)`.
    /// Generators absent from `values` go to zero.
    pub fn derivation_extend(
        &self,
        basis: &MonomialBasis,
        values: &BTreeMap<usize, AlgebraElement>,
        shift: i64,
    ) -> Result<GradedMap> {
        let p = self.p;
        for (&i, v) in values {
            if let Some(d) = self.element_degree(v)? {
                let want = self.generators[i].degree + shift;
                if d != want {
                    return Err(Error::Inhomogeneous(format!(
                        "value of {} has degree {d}, expected {want}",
                        self.generators[i].name
                    )));
                }
            }
        }
        let space = basis.space().clone();
        let w = space.window();
        let domain = Window::new(w.lo.max(w.lo - shift), w.hi.min(w.hi - shift))
            .map_err(|_| Error::Window(format!("window {w} too narrow for shift {shift}")))?;
        let domain = extend_domain(&space, domain, shift);
        let mut map = GradedMap::zero(space.clone(), space.clone(), shift, domain);
        for d in domain.degrees() {
            let src = basis.monomials(d);
            if src.is_empty() {
                continue;
            }
            let tdim = space.dim_or_zero(d + shift);
            let mut m = FpMatrix::zero(p, tdim, src.len());
            for (c, mono) in src.iter().enumerate() {
                let img = self.apply_derivation(mono, values, shift);
                for (t, coeff) in img.terms() {
                    let (td, r) = basis.locate(t).ok_or_else(|| {
                        Error::Window(format!("{} leaves the window", self.label(t)))
                    })?;
                    debug_assert_eq!(td, d + shift);
                    m.add_entry(r, c, coeff);
                }
            }
            map.set_block(d, m)?;
        }
        Ok(map)
    }

    pub fn apply_derivation(
        &self,
        mono: &Monomial,
        values: &BTreeMap<usize, AlgebraElement>,
        shift: i64,
    ) -> AlgebraElement {
        let p = self.p;
        let mut out = AlgebraElement::zero();
        let mut prefix_deg = 0i64;
        for (i, &a) in mono.0.iter().enumerate() {
            if a != 0 {
                if let Some(v) = values.get(&i) {
                    // D(g^a) = a g^{a-1} D(g)
                    let coeff = fplin::reduce(p, a);
                    if coeff != 0 && !v.is_zero() {
                        let mut prefix = mono.clone();
                        prefix.0[i..].iter_mut().for_each(|e| *e = 0);
                        let mut suffix = mono.clone();
                        suffix.0[..=i].iter_mut().for_each(|e| *e = 0);
                        let lower = AlgebraElement::monomial(self.gen_power(i, a - 1), 1);
                        let dg = self.multiply(&lower, v);
                        let t = self.multiply(
                            &self.multiply(&AlgebraElement::monomial(prefix, 1), &dg),
                            &AlgebraElement::monomial(suffix, 1),
                        );
                        let mut s = coeff;
                        if (shift * prefix_deg).rem_euclid(2) == 1 {
                            s = fplin::neg(p, s);
                        }
                        out.add_assign(p, &t.scale(p, s));
                    }
                }
            }
            prefix_deg += a * self.generators[i].degree;
        }
        out
    }

    /// Parse `"2*xi1^3*tau2 - t^-1 + 1"` into an element.
    pub fn parse(&self, s: &str) -> Result<AlgebraElement> {
        let p = self.p;
        let mut out = AlgebraElement::zero();
        for (neg, term) in split_terms(s)? {
            let mut acc = AlgebraElement::monomial(self.unit(), if neg { p - 1 } else { 1 });
            for factor in split_top(&term, '*') {
                let factor = factor.trim();
                if factor.is_empty() {
                    return Err(Error::Parse(format!("empty factor in {term:?}")));
                }
                if let Ok(c) = factor.parse::<i64>() {
                    acc = acc.scale(p, fplin::reduce(p, c));
                    continue;
                }
                let (name, exp) = split_power(factor)?;
                let i = self
                    .gen_index(name)
                    .or_else(|| {
                        // accept a parenthesized plain name
                        name.strip_prefix('(').and_then(|n| n.strip_suffix(')')).and_then(|n| self.gen_index(n))
                    })
                    .ok_or_else(|| Error::Parse(format!("unknown generator {name:?}")))?;
                if !self.generators[i].range.admits(exp) {
                    acc = AlgebraElement::zero();
                    continue;
                }
                acc = self.multiply(&acc, &AlgebraElement::monomial(self.gen_power(i, exp), 1));
            }
            out.add_assign(p, &acc);
        }
        Ok(out)
    }
}

fn sum_hi_excluding(v: &[i128], skip: usize) -> i128 {
    const INF: i128 = i128::MAX / 8;
    let mut s = 0;
    for (i, &x) in v.iter().enumerate() {
        if i != skip {
            if x >= INF {
                return INF;
            }
            s += x;
        }
    }
    s
}

fn sum_lo_excluding(v: &[i128], skip: usize) -> i128 {
    const INF: i128 = i128::MAX / 8;
    let mut s = 0;
    for (i, &x) in v.iter().enumerate() {
        if i != skip {
            if x <= -INF {
                return -INF;
            }
            s += x;
        }
    }
    s
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

/// Degrees whose image lies in a region known to be zero still count as
/// defined: the map is zero there.
fn extend_domain(space: &WindowedGradedSpace, inner: Window, shift: i64) -> Window {
    let w = space.window();
    let mut lo = inner.lo;
    let mut hi = inner.hi;
    while lo > w.lo && space.knows(lo - 1 + shift) {
        lo -= 1;
    }
    while hi < w.hi && space.knows(hi + 1 + shift) {
        hi += 1;
    }
    Window { lo, hi }
}

/// Split on top-level `+`/`-`, returning (negated, term) pairs.
fn split_terms(s: &str) -> Result<Vec<(bool, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    let mut prev: Option<char> = None;
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced parentheses in {s:?}")));
        }
        // a sign right after '^' belongs to the exponent
        if depth == 0 && (ch == '+' || ch == '-') && prev != Some('^') {
            if !cur.trim().is_empty() {
                out.push((neg, cur.trim().to_string()));
            } else if !out.is_empty() || ch == '+' && neg {
                return Err(Error::Parse(format!("dangling sign in {s:?}")));
            }
            neg = ch == '-';
            cur.clear();
        } else {
            cur.push(ch);
        }
        if !ch.is_whitespace() {
            prev = Some(ch);
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in {s:?}")));
    }
    if cur.trim().is_empty() {
        return Err(Error::Parse(format!("expression {s:?} ends without a term")));
    }
    out.push((neg, cur.trim().to_string()));
    Ok(out)
}

fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && ch == sep {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    out.push(cur);
    out
}

/// `name^e` → (name, e); a bare name has exponent 1.
fn split_power(f: &str) -> Result<(&str, i64)> {
    let mut depth = 0;
    let mut caret = None;
    for (i, ch) in f.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '^' if depth == 0 => caret = Some(i),
            _ => {}
        }
    }
    match caret {
        None => Ok((f, 1)),
        Some(i) => {
            let e = f[i + 1..].trim().trim_start_matches('(').trim_end_matches(')');
            let e: i64 = e.parse().map_err(|_| Error::Parse(format!("bad exponent in {f:?}")))?;
            Ok((f[..i].trim(), e))
        }
    }
}

/// A window of a monomial algebra: the graded space plus the monomial
/// behind each basis vector.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    space: WindowedGradedSpace,
    monomials: BTreeMap<i64, Vec<Monomial>>,
    index: HashMap<Monomial, (i64, usize)>,
}

impl MonomialBasis {
    pub fn space(&self) -> &WindowedGradedSpace {
        &self.space
    }

    pub fn monomials(&self, d: i64) -> &[Monomial] {
        self.monomials.get(&d).map_or(&[], Vec::as_slice)
    }

    pub fn all(&self) -> impl Iterator<Item = (i64, &Monomial)> {
        self.monomials.iter().flat_map(|(&d, v)| v.iter().map(move |m| (d, m)))
    }

    pub fn locate(&self, m: &Monomial) -> Option<(i64, usize)> {
        self.index.get(m).copied()
    }

    /// Coordinates of a homogeneous element of degree `d`.
    pub fn to_vector(&self, x: &AlgebraElement, d: i64) -> Result<Vec<u64>> {
        let mut v = vec![0; self.space.dim_or_zero(d)];
        for (m, c) in x.terms() {
            match self.locate(m) {
                Some((e, i)) if e == d => v[i] = c,
                Some((e, _)) => return Err(Error::Inhomogeneous(format!("term in degree {e}, expected {d}"))),
                None => return Err(Error::Window(format!("monomial outside window {}", self.space.window()))),
            }
        }
        Ok(v)
    }

    pub fn from_vector(&self, d: i64, v: &[u64]) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, &c) in self.monomials(d).iter().zip(v) {
            if c != 0 {
                out.terms.insert(m.clone(), c);
            }
        }
        out
    }
}

impl fmt::Display for MonomialAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| format!("{}:{}", g.name, g.degree)).collect();
        write!(f, "F_{}[{}]", self.p, gens.join(", "))
    }
}

/// JSON algebra description: `{ "p", "generators": [...], "window": [lo, hi] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub p: u64,
    pub generators: Vec<GeneratorSpec>,
    pub window: Window,
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<(MonomialAlgebra, MonomialBasis)> {
        let alg = MonomialAlgebra::new(self.p, self.generators.clone())?;
        let basis = alg.enumerate_basis(self.window)?;
        Ok((alg, basis))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    #[test]
    fn polynomial_window() {
        let a = MonomialAlgebra::new(3, vec![GeneratorSpec::new("xi1", 4, ExpRange::Polynomial)]).unwrap();
        let b = a.enumerate_basis(w(0, 8)).unwrap();
        let dims = b.space().dim_vector(w(0, 8)).unwrap();
        assert_eq!(dims, vec![(0, 1), (1, 0), (2, 0), (3, 0), (4, 1), (5, 0), (6, 0), (7, 0), (8, 1)]);
        assert_eq!(b.space().labels(8), ["xi1^2".to_string()]);
        assert!(b.space().complete_below() && !b.space().complete_above());
    }

    #[test]
    fn exterior_pair() {
        let a = MonomialAlgebra::new(
            3,
            vec![GeneratorSpec::new("a", 1, ExpRange::Exterior), GeneratorSpec::new("b", 3, ExpRange::Exterior)],
        )
        .unwrap();
        let b = a.enumerate_basis(w(0, 4)).unwrap();
        let nz: Vec<(i64, usize)> = b.space().support().map(|(d, l)| (d, l.len())).collect();
        assert_eq!(nz, vec![(0, 1), (1, 1), (3, 1), (4, 1)]);
    }

    #[test]
    fn laurent_interval() {
        let a = MonomialAlgebra::new(2, vec![GeneratorSpec::new("t", -2, ExpRange::LaurentBelow(2))]).unwrap();
        let b = a.enumerate_basis(w(-4, 10)).unwrap();
        let degs: Vec<i64> = b.space().support().map(|(d, _)| d).collect();
        assert_eq!(degs, vec![-4, -2, 0, 2, 4, 6, 8, 10]);
        assert_eq!(b.space().labels(-4), ["t^2".to_string()]);
        assert_eq!(b.space().labels(10), ["t^-5".to_string()]);
        assert!(b.space().complete_below());
    }

    #[test]
    fn unbounded_family_rejected() {
        let a = MonomialAlgebra::new(
            2,
            vec![GeneratorSpec::new("x", 2, ExpRange::Polynomial), GeneratorSpec::new("y", -2, ExpRange::Polynomial)],
        )
        .unwrap();
        assert!(matches!(a.enumerate_basis(w(0, 4)), Err(Error::Unbounded(_))));
    }

    #[test]
    fn koszul_and_relations() {
        let a = MonomialAlgebra::new(
            3,
            vec![
                GeneratorSpec::new("tau1", 5, ExpRange::Exterior),
                GeneratorSpec::new("tau2", 17, ExpRange::Exterior),
                GeneratorSpec::new("x", 2, ExpRange::Truncated(3)),
            ],
        )
        .unwrap();
        let t1 = a.parse("tau1").unwrap();
        let t2 = a.parse("tau2").unwrap();
        let ab = a.multiply(&t1, &t2);
        let ba = a.multiply(&t2, &t1);
        assert_eq!(ab, ba.scale(3, 2));
        assert!(a.multiply(&t1, &t1).is_zero());
        let x = a.parse("x").unwrap();
        let x2 = a.parse("x^2").unwrap();
        assert!(a.multiply(&x2, &x).is_zero());
        assert_eq!(a.parse("tau2*tau1").unwrap(), ab.scale(3, 2));
    }

    #[test]
    fn signs_vanish_at_two() {
        let a = MonomialAlgebra::new(
            2,
            vec![GeneratorSpec::new("a", 1, ExpRange::Polynomial), GeneratorSpec::new("b", 3, ExpRange::Polynomial)],
        )
        .unwrap();
        let x = a.parse("b*a").unwrap();
        assert_eq!(x, a.parse("a*b").unwrap());
        assert_eq!(x.coeff(&Monomial(vec![1, 1])), 1);
    }

    #[test]
    fn derivation_on_square_and_zero() {
        let a = MonomialAlgebra::new(
            3,
            vec![GeneratorSpec::new("xi", 4, ExpRange::Polynomial), GeneratorSpec::new("v", 1, ExpRange::Exterior)],
        )
        .unwrap();
        let basis = a.enumerate_basis(w(0, 20)).unwrap();
        let mut vals = BTreeMap::new();
        vals.insert(0, a.parse("xi*v").unwrap());
        let d = a.derivation_extend(&basis, &vals, 1).unwrap();
        // D(xi^2) = 2 xi * xi v = 2 xi^2 v
        let src = basis.to_vector(&a.parse("xi^2").unwrap(), 8).unwrap();
        let img = d.block(8).mul_vec(&src);
        assert_eq!(basis.from_vector(9, &img), a.parse("2*xi^2*v").unwrap());

        let zero = a.derivation_extend(&basis, &BTreeMap::new(), 1).unwrap();
        assert!(zero.is_zero());

        let mut bad = BTreeMap::new();
        bad.insert(0, a.parse("xi").unwrap());
        assert!(a.derivation_extend(&basis, &bad, 1).is_err());
    }

    #[test]
    fn parser_handles_parenthesized_names() {
        let a = MonomialAlgebra::new(
            3,
            vec![GeneratorSpec::new("(xi1^3)", 12, ExpRange::Polynomial), GeneratorSpec::new("t", -2, ExpRange::Laurent)],
        )
        .unwrap();
        let x = a.parse("2*(xi1^3)^2*t^-1 - t^(-3)").unwrap();
        assert_eq!(x.coeff(&Monomial(vec![2, -1])), 2);
        assert_eq!(x.coeff(&Monomial(vec![0, -3])), 2);
        assert_eq!(a.label(&Monomial(vec![2, -1])), "(xi1^3)^2*t^-1");
        assert!(a.parse("xi1 +").is_err());
        assert!(a.parse("nope").is_err());
    }
}
