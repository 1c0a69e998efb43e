//! Modules over the exterior algebra E(Q) on one odd-degree generator.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fplin::{quotient_basis, FpMatrix};
use crate::graded::{GradedMap, Window, WindowedGradedSpace};
use crate::monalg::{AlgebraSpec, MonomialBasis};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QModule {
    space: WindowedGradedSpace,
    q: GradedMap,
    qdeg: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub valid: bool,
    /// Lowest source degree where Q∘Q ≠ 0.
    pub first_failure: Option<i64>,
    pub checked: Option<Window>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicDecomposition {
    /// Top-class degree of each free summand E(Q), ascending.
    pub free: Vec<i64>,
    /// Degree of each trivial summand k, ascending.
    pub trivial: Vec<i64>,
    pub valid_window: Window,
    #[serde(skip)]
    free_generators: Vec<(i64, Vec<u64>)>,
    #[serde(skip)]
    trivial_generators: Vec<(i64, Vec<u64>)>,
}

impl CyclicDecomposition {
    pub fn free_generators(&self) -> &[(i64, Vec<u64>)] {
        &self.free_generators
    }

    pub fn trivial_generators(&self) -> &[(i64, Vec<u64>)] {
        &self.trivial_generators
    }

    /// Dimension of degree `d` as rebuilt from the summands.
    pub fn reassembled_dim(&self, d: i64, qdeg: i64) -> usize {
        let free = self.free.iter().filter(|&&t| t == d || t - qdeg == d).count();
        let triv = self.trivial.iter().filter(|&&t| t == d).count();
        free + triv
    }

    pub fn trivial_dim(&self, d: i64) -> usize {
        self.trivial.iter().filter(|&&t| t == d).count()
    }
}

impl QModule {
    /// Build from blocks `M_d → M_{d−qdeg}` keyed by source degree. Q is
    /// defined wherever its target degree is known.
    pub fn from_blocks(space: WindowedGradedSpace, qdeg: i64, blocks: BTreeMap<i64, FpMatrix>) -> Result<Self> {
        if qdeg <= 0 || qdeg % 2 == 0 {
            return Err(Error::InvalidModule(format!("|Q| = {qdeg} must be odd and positive")));
        }
        let domain = q_domain(&space, qdeg)?;
        let mut q = GradedMap::zero(space.clone(), space.clone(), -qdeg, domain);
        for (d, m) in blocks {
            if !domain.contains(d) {
                if m.is_zero() {
                    continue;
                }
                return Err(Error::InvalidModule(format!("Q block at degree {d} outside its domain {domain}")));
            }
            q.set_block(d, m).map_err(|e| Error::InvalidModule(e.to_string()))?;
        }
        Ok(QModule { space, q, qdeg })
    }

    pub fn from_map(q: GradedMap, qdeg: i64) -> Result<Self> {
        if q.shift != -qdeg || q.source != q.target {
            return Err(Error::InvalidModule(format!("Q must be an endomorphism of shift {}", -qdeg)));
        }
        let blocks = q.stored_blocks().map(|(d, m)| (d, m.clone())).collect();
        Self::from_blocks(q.source.clone(), qdeg, blocks)
    }

    /// Q = 0 on `space`.
    pub fn trivial_action(space: WindowedGradedSpace, qdeg: i64) -> Result<Self> {
        Self::from_blocks(space, qdeg, BTreeMap::new())
    }

    /// k in degree `d`.
    pub fn k(p: u64, qdeg: i64, d: i64) -> Result<Self> {
        Self::trivial_action(WindowedGradedSpace::point(p, d, "1")?, qdeg)
    }

    /// E(Q) with top class in degree `top`: basis `1` in `top`, `Q` in `top − qdeg`.
    pub fn free(p: u64, qdeg: i64, top: i64) -> Result<Self> {
        let mut space = WindowedGradedSpace::complete(p, Window::new(top - qdeg, top)?)?;
        space.set_degree(top, vec!["1".into()])?;
        space.set_degree(top - qdeg, vec!["Q".into()])?;
        let mut blocks = BTreeMap::new();
        blocks.insert(top, FpMatrix::identity(p, 1));
        Self::from_blocks(space, qdeg, blocks)
    }

    pub fn p(&self) -> u64 {
        self.space.p()
    }

    pub fn space(&self) -> &WindowedGradedSpace {
        &self.space
    }

    pub fn q(&self) -> &GradedMap {
        &self.q
    }

    pub fn qdeg(&self) -> i64 {
        self.qdeg
    }

    pub fn window(&self) -> Window {
        self.space.window()
    }

    /// `Q: M_d → M_{d−|Q|}`.
    pub fn q_block(&self, d: i64) -> FpMatrix {
        self.q.block(d)
    }

    pub fn q_defined(&self, d: i64) -> bool {
        self.q.domain.contains(d) || self.space.dim(d) == Ok(0)
    }

    /// Degrees on which both Q out of and Q into the degree are known.
    pub fn homology_window(&self) -> Option<Window> {
        let w = self.window();
        let lo = w.degrees().find(|&d| self.space.knows(d - self.qdeg))?;
        let hi = w.degrees().rev().find(|&d| self.space.knows(d + self.qdeg))?;
        Window::try_new(lo, hi)
    }

    pub fn validate(&self) -> Validation {
        let dom = self.q.domain;
        let lo = dom.lo.max(dom.lo + self.qdeg);
        let checked = Window::try_new(lo, dom.hi);
        let mut first_failure = None;
        if let Some(cw) = checked {
            for d in cw.degrees() {
                if self.space.dim_or_zero(d) == 0 {
                    continue;
                }
                let qq = self.q_block(d - self.qdeg).mul(&self.q_block(d));
                if !qq.map(|m| m.is_zero()).unwrap_or(false) {
                    first_failure = Some(d);
                    break;
                }
            }
        }
        Validation { valid: first_failure.is_none(), first_failure, checked }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        match v.first_failure {
            None => Ok(()),
            Some(d) => Err(Error::InvalidModule(format!("Q∘Q ≠ 0 on degree {d}"))),
        }
    }

    pub fn suspend(&self, n: i64) -> QModule {
        let blocks = self.q.stored_blocks().map(|(d, m)| (d + n, m.clone())).collect();
        Self::from_blocks(self.space.suspend(n), self.qdeg, blocks).expect("suspension preserves shapes")
    }

    /// Degreewise dual with Q acting by the transpose.
    pub fn dual(&self) -> QModule {
        let qd = self.q.dual();
        let blocks = qd.stored_blocks().map(|(d, m)| (d, m.clone())).collect();
        Self::from_blocks(self.space.dual(), self.qdeg, blocks).expect("dual preserves shapes")
    }

    pub fn direct_sum(a: &QModule, b: &QModule) -> Result<QModule> {
        same_qdeg(a, b)?;
        let space = WindowedGradedSpace::direct_sum(&a.space, &b.space)?;
        let mut blocks = BTreeMap::new();
        for d in q_domain(&space, a.qdeg)?.degrees() {
            let (x, y) = (a.q_block(d), b.q_block(d));
            let rows = x.rows() + y.rows();
            let cols = x.cols() + y.cols();
            if rows == 0 || cols == 0 {
                continue;
            }
            let mut m = FpMatrix::zero(a.p(), rows, cols);
            for (r, c, v) in x.triplets() {
                m.add_entry(r, c, v);
            }
            for (r, c, v) in y.triplets() {
                m.add_entry(x.rows() + r, x.cols() + c, v);
            }
            blocks.insert(d, m);
        }
        Self::from_blocks(space, a.qdeg, blocks)
    }

    /// `a ⊗ b` with `Q(x⊗y) = Qx⊗y + (−1)^{|x|} x⊗Qy`.
    pub fn tensor(a: &QModule, b: &QModule) -> Result<QModule> {
        same_qdeg(a, b)?;
        let p = a.p();
        let q = a.qdeg;
        let space = WindowedGradedSpace::tensor(&a.space, &b.space)?;
        let pairs = WindowedGradedSpace::tensor_pairs(&a.space, &b.space, space.window());
        let index: HashMap<i64, HashMap<(i64, usize, usize), usize>> = pairs
            .iter()
            .map(|(&d, v)| (d, v.iter().enumerate().map(|(k, &t)| (t, k)).collect()))
            .collect();
        let domain = q_domain(&space, q)?;
        let mut blocks = BTreeMap::new();
        for d in domain.degrees() {
            let Some(src) = pairs.get(&d) else { continue };
            let tdim = space.dim_or_zero(d - q);
            if tdim == 0 {
                continue;
            }
            let tidx = &index[&(d - q)];
            let mut m = FpMatrix::zero(p, tdim, src.len());
            let mut qa: BTreeMap<i64, FpMatrix> = BTreeMap::new();
            let mut qb: BTreeMap<i64, FpMatrix> = BTreeMap::new();
            for (c, &(e, i, j)) in src.iter().enumerate() {
                let fa = qa.entry(e).or_insert_with(|| a.q_block(e));
                for &(r, v) in sparse_col(fa, i).iter() {
                    let k = tidx[&(e - q, r, j)];
                    m.add_entry(k, c, v);
                }
                let fb = qb.entry(d - e).or_insert_with(|| b.q_block(d - e));
                let sign_neg = e.rem_euclid(2) == 1;
                for &(r, v) in sparse_col(fb, j).iter() {
                    let k = tidx[&(e, i, r)];
                    let v = if sign_neg { crate::fplin::neg(p, v) } else { v };
                    m.add_entry(k, c, v);
                }
            }
            blocks.insert(d, m);
        }
        Self::from_blocks(space, q, blocks)
    }

    /// Cohen–Kaplansky splitting into free and trivial cyclic summands,
    /// processed from the top degree down with pivot-chosen complements.
    pub fn cyclic_decompose(&self) -> Result<CyclicDecomposition> {
        self.ensure_valid()?;
        let valid = self
            .homology_window()
            .ok_or_else(|| Error::Window(format!("window {} too narrow for |Q| = {}", self.window(), self.qdeg)))?;
        let p = self.p();
        let mut free = Vec::new();
        let mut trivial = Vec::new();
        let mut free_generators = Vec::new();
        let mut trivial_generators = Vec::new();
        for d in self.window().degrees().rev() {
            let dim = self.space.dim_or_zero(d);
            if dim == 0 || !self.space.knows(d - self.qdeg) {
                continue;
            }
            let qd = self.q_block(d);
            let ker = qd.kernel_basis();
            let comp = quotient_basis(&ker, dim);
            for c in comp.columns() {
                free.push(d);
                free_generators.push((d, c));
            }
            if valid.contains(d) {
                let im = self.q_block(d + self.qdeg).image_basis();
                // express the image in kernel coordinates, then complete
                let mut coords = Vec::with_capacity(im.cols());
                for col in im.columns() {
                    coords.push(ker.solve(&col).ok_or_else(|| {
                        Error::InvalidModule(format!("image of Q not inside its kernel at degree {d}"))
                    })?);
                }
                let s = FpMatrix::from_columns(p, ker.cols(), &coords);
                let reps = quotient_basis(&s, ker.cols());
                for c in reps.columns() {
                    trivial.push(d);
                    trivial_generators.push((d, ker.mul_vec(&c)));
                }
            }
        }
        free.sort();
        trivial.sort();
        Ok(CyclicDecomposition { free, trivial, valid_window: valid, free_generators, trivial_generators })
    }

    /// Whether the free generators, their Q-images and the trivial
    /// generators form a basis of each degree in the valid window.
    pub fn decomposition_is_basis(&self, dec: &CyclicDecomposition) -> bool {
        let p = self.p();
        dec.valid_window.degrees().all(|d| {
            let dim = self.space.dim_or_zero(d);
            let mut cols: Vec<Vec<u64>> = Vec::new();
            for (e, v) in &dec.free_generators {
                if *e == d {
                    cols.push(v.clone());
                } else if *e - self.qdeg == d {
                    cols.push(self.q_block(*e).mul_vec(v));
                }
            }
            for (e, v) in &dec.trivial_generators {
                if *e == d {
                    cols.push(v.clone());
                }
            }
            cols.len() == dim && FpMatrix::from_columns(p, dim, &cols).rank() == dim
        })
    }

    /// No trivial summands on the valid window.
    pub fn is_simple_torsion_certificate(&self) -> Result<bool> {
        Ok(self.cyclic_decompose()?.trivial.is_empty())
    }
}

fn same_qdeg(a: &QModule, b: &QModule) -> Result<()> {
    if a.qdeg != b.qdeg {
        return Err(Error::InvalidModule(format!("|Q| mismatch: {} vs {}", a.qdeg, b.qdeg)));
    }
    if a.p() != b.p() {
        return Err(Error::InvalidModule("modules over different primes".into()));
    }
    Ok(())
}

fn q_domain(space: &WindowedGradedSpace, qdeg: i64) -> Result<Window> {
    let w = space.window();
    let lo = w.degrees().find(|&d| space.knows(d - qdeg));
    let hi = w.degrees().rev().find(|&d| space.knows(d - qdeg));
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok(Window { lo, hi }),
        _ => Err(Error::Window(format!("window {w} too narrow for |Q| = {qdeg}"))),
    }
}

fn sparse_col(m: &FpMatrix, c: usize) -> Vec<(usize, u64)> {
    (0..m.rows()).filter_map(|r| {
        let v = m.get(r, c);
        (v != 0).then_some((r, v))
    }).collect()
}

/// QModule file formats.
///
/// Explicit: `{ "p", "window", "basis", "qdeg", "q_blocks": { "<deg>": [[r, c, v], ...] } }`.
/// Algebra-backed: `{ "p", "generators", "window", "qdeg", "q_on_generators": [{"gen", "value"}] }`.
#[derive(Clone, Debug)]
pub enum QModuleFile {
    Explicit { space: WindowedGradedSpace, qdeg: i64, q_blocks: BTreeMap<i64, Vec<(usize, usize, i64)>> },
    Algebra { algebra: AlgebraSpec, qdeg: i64, q_on_generators: Vec<GeneratorValue> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorValue {
    pub gen: String,
    pub value: String,
}

#[derive(Deserialize)]
struct ExplicitQ {
    qdeg: i64,
    #[serde(default)]
    q_blocks: BTreeMap<i64, Vec<(usize, usize, i64)>>,
}

#[derive(Deserialize)]
struct AlgebraQ {
    qdeg: i64,
    q_on_generators: Vec<GeneratorValue>,
}

impl QModuleFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let field = |e: serde_json::Error| Error::Parse(e.to_string());
        if v.get("q_on_generators").is_some() {
            let algebra: AlgebraSpec = serde_json::from_value(v.clone()).map_err(field)?;
            let q: AlgebraQ = serde_json::from_value(v).map_err(field)?;
            Ok(QModuleFile::Algebra { algebra, qdeg: q.qdeg, q_on_generators: q.q_on_generators })
        } else {
            let space: WindowedGradedSpace = serde_json::from_value(v.clone()).map_err(field)?;
            let q: ExplicitQ = serde_json::from_value(v).map_err(field)?;
            Ok(QModuleFile::Explicit { space, qdeg: q.qdeg, q_blocks: q.q_blocks })
        }
    }

    pub fn build(&self) -> Result<QModule> {
        match self {
            QModuleFile::Explicit { space, qdeg, q_blocks } => {
                let p = space.p();
                let mut blocks = BTreeMap::new();
                for (&d, entries) in q_blocks {
                    let rows = space.dim_or_zero(d - qdeg);
                    let cols = space.dim_or_zero(d);
                    let mut m = FpMatrix::zero(p, rows, cols);
                    for &(r, c, v) in entries {
                        if r >= rows || c >= cols {
                            return Err(Error::Input(format!(
                                "q_blocks[{d}]: entry ({r}, {c}) outside a {rows}x{cols} block"
                            )));
                        }
                        m.add_entry(r, c, crate::fplin::reduce(p, v));
                    }
                    blocks.insert(d, m);
                }
                QModule::from_blocks(space.clone(), *qdeg, blocks)
            }
            QModuleFile::Algebra { algebra, qdeg, q_on_generators } => {
                let (alg, basis) = algebra.build()?;
                let mut values = BTreeMap::new();
                for gv in q_on_generators {
                    let i = alg
                        .gen_index(&gv.gen)
                        .ok_or_else(|| Error::Input(format!("unknown generator {:?}", gv.gen)))?;
                    values.insert(i, alg.parse(&gv.value)?);
                }
                qmodule_from_derivation(&alg, &basis, &values, *qdeg)
            }
        }
    }

    /// Serialize a module in the explicit format.
    pub fn explicit_json(m: &QModule) -> serde_json::Value {
        let mut v = serde_json::to_value(m.space()).expect("space serializes");
        let blocks: BTreeMap<String, Vec<(usize, usize, u64)>> = m
            .q()
            .stored_blocks()
            .map(|(d, b)| (d.to_string(), b.triplets().collect()))
            .collect();
        v["qdeg"] = m.qdeg().into();
        v["q_blocks"] = serde_json::to_value(blocks).expect("blocks serialize");
        v
    }
}

/// QModule whose Q is the derivation extending `values`.
pub fn qmodule_from_derivation(
    alg: &crate::monalg::MonomialAlgebra,
    basis: &MonomialBasis,
    values: &BTreeMap<usize, crate::monalg::AlgebraElement>,
    qdeg: i64,
) -> Result<QModule> {
    let map = alg.derivation_extend(basis, values, -qdeg)?;
    QModule::from_map(map, qdeg)
}
