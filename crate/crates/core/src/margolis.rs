//! Margolis homology `H(M;Q) = ker Q / im Q` and the statements built on it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fplin::{quotient_basis, FpMatrix};
use crate::graded::{GradedMap, Window, WindowedGradedSpace};
use crate::qmod::QModule;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeRow {
    pub degree: i64,
    pub kernel: usize,
    pub image: usize,
    pub homology: usize,
}

#[derive(Clone, Debug)]
struct DegreeData {
    /// Basis of ker Q_d, as columns.
    kernel: FpMatrix,
    /// Basis of im Q_{d+|Q|}, as columns.
    image: FpMatrix,
    /// Homology representatives, as columns in M_d coordinates.
    reps: FpMatrix,
    labels: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct MargolisResult {
    pub homology: WindowedGradedSpace,
    pub valid_window: Window,
    pub table: Vec<DegreeRow>,
    data: BTreeMap<i64, DegreeData>,
}

impl MargolisResult {
    pub fn dim(&self, d: i64) -> usize {
        self.homology.dim_or_zero(d)
    }

    pub fn is_zero(&self) -> bool {
        self.homology.is_zero()
    }

    pub fn representatives(&self, d: i64) -> Option<&FpMatrix> {
        self.data.get(&d).map(|x| &x.reps)
    }

    /// Homology coordinates of a cycle `z` in degree `d`.
    pub fn coordinates(&self, d: i64, z: &[u64]) -> Option<Vec<u64>> {
        let data = self.data.get(&d)?;
        let n = data.reps.cols();
        let both = data.reps.hstack(&data.image).ok()?;
        let x = both.solve(z)?;
        Some(x[..n].to_vec())
    }
}

pub fn margolis_homology(m: &QModule) -> Result<MargolisResult> {
    m.ensure_valid()?;
    let valid = m
        .homology_window()
        .ok_or_else(|| Error::Window(format!("window {} too narrow for |Q| = {}", m.window(), m.qdeg())))?;
    let q = m.qdeg();
    let degrees: Vec<i64> = valid.degrees().collect();
    let per_degree: Vec<(i64, DegreeData)> = degrees
        .par_iter()
        .map(|&d| (d, degree_homology(m, d, q)))
        .collect();
    let w = m.window();
    let mut homology = WindowedGradedSpace::new(m.p(), valid)?;
    homology.set_completeness(
        m.space().complete_below() && valid.lo == w.lo,
        m.space().complete_above() && valid.hi == w.hi,
    );
    let mut table = Vec::with_capacity(per_degree.len());
    let mut data = BTreeMap::new();
    for (d, dd) in per_degree {
        table.push(DegreeRow { degree: d, kernel: dd.kernel.cols(), image: dd.image.cols(), homology: dd.reps.cols() });
        homology.set_degree(d, dd.labels.clone())?;
        data.insert(d, dd);
    }
    Ok(MargolisResult { homology, valid_window: valid, table, data })
}

fn degree_homology(m: &QModule, d: i64, q: i64) -> DegreeData {
    let p = m.p();
    let dim = m.space().dim_or_zero(d);
    let (kernel, free) = m.q_block(d).kernel_basis_with_free();
    let image = m.q_block(d + q).image_basis();
    // image in kernel coordinates; a validated module has im Q ⊆ ker Q
    let coords: Vec<Vec<u64>> = image.columns().iter().map(|c| free.iter().map(|&f| c[f]).collect()).collect();
    let s = FpMatrix::from_columns(p, kernel.cols(), &coords);
    let comp = quotient_basis(&s, kernel.cols());
    let mut cols = Vec::with_capacity(comp.cols());
    let mut labels = Vec::with_capacity(comp.cols());
    for c in comp.columns() {
        let j = c.iter().position(|&v| v != 0).expect("standard basis vector");
        labels.push(format!("[{}]", m.space().labels(d)[free[j]]));
        cols.push(kernel.mul_vec(&c));
    }
    let reps = FpMatrix::from_columns(p, dim, &cols);
    DegreeData { kernel, image, reps, labels }
}

/// A short exact sequence `0 → M′ →i M →j M″ → 0` of QModules.
#[derive(Clone, Debug)]
pub struct ShortExactSequence {
    pub sub: QModule,
    pub mid: QModule,
    pub quot: QModule,
    pub inclusion: GradedMap,
    pub projection: GradedMap,
}

#[derive(Clone, Debug, Serialize)]
pub struct LesReport {
    pub exact: bool,
    /// `(degree, position)` pairs where exactness fails; position is one of
    /// `"H(M)"`, `"H(M'')"`, `"H(M')"`.
    pub failures: Vec<(i64, String)>,
    pub checked: Option<Window>,
    /// Rank of the connecting map out of each degree of H(M″).
    pub connecting_ranks: BTreeMap<i64, usize>,
}

fn induced(src: &MargolisResult, tgt: &MargolisResult, f: &FpMatrix, d_src: i64, d_tgt: i64) -> FpMatrix {
    let p = src.homology.p();
    let reps = src.representatives(d_src).cloned().unwrap_or_else(|| FpMatrix::zero(p, f.cols(), 0));
    let n_tgt = tgt.dim(d_tgt);
    let cols: Vec<Vec<u64>> = reps
        .columns()
        .iter()
        .map(|r| {
            let img = f.mul_vec(r);
            tgt.coordinates(d_tgt, &img).unwrap_or_else(|| vec![0; n_tgt])
        })
        .collect();
    FpMatrix::from_columns(p, n_tgt, &cols)
}

fn check_equivariant(f: &GradedMap, a: &QModule, b: &QModule, name: &str) -> Result<()> {
    let q = a.qdeg();
    for d in f.domain.degrees() {
        if !f.domain.contains(d - q) || !a.q_defined(d) || !b.q_defined(d) {
            continue;
        }
        let lhs = f.block(d - q).mul(&a.q_block(d))?;
        let rhs = b.q_block(d).mul(&f.block(d))?;
        if lhs != rhs {
            return Err(Error::InvalidModule(format!("{name} does not commute with Q at degree {d}")));
        }
    }
    Ok(())
}

impl ShortExactSequence {
    /// Q-equivariance and degreewise short exactness.
    pub fn check(&self) -> Result<()> {
        check_equivariant(&self.inclusion, &self.sub, &self.mid, "inclusion")?;
        check_equivariant(&self.projection, &self.mid, &self.quot, "projection")?;
        let w = self.inclusion.domain.intersect(&self.projection.domain).ok_or_else(|| Error::Window("maps share no degrees".into()))?;
        for d in w.degrees() {
            let i = self.inclusion.block(d);
            let j = self.projection.block(d);
            let ji = j.mul(&i)?;
            let (a, b, c) = (i.cols(), i.rows(), j.rows());
            if !ji.is_zero() || i.rank() != a || j.rank() != c || a + c != b {
                return Err(Error::InvalidModule(format!("sequence not short exact at degree {d}")));
            }
        }
        Ok(())
    }
}

/// Build the long exact sequence, with the connecting map constructed by
/// lifting along `j` and pulling back along `i`, and test exactness.
pub fn les_check(ses: &ShortExactSequence) -> Result<LesReport> {
    ses.check()?;
    let q = ses.mid.qdeg();
    let h1 = margolis_homology(&ses.sub)?;
    let h2 = margolis_homology(&ses.mid)?;
    let h3 = margolis_homology(&ses.quot)?;
    let common = h1
        .valid_window
        .intersect(&h2.valid_window)
        .and_then(|w| w.intersect(&h3.valid_window))
        .and_then(|w| w.intersect(&ses.inclusion.domain))
        .and_then(|w| w.intersect(&ses.projection.domain));
    let mut report = LesReport { exact: true, failures: Vec::new(), checked: common, connecting_ranks: BTreeMap::new() };
    let Some(w) = common else {
        return Ok(report);
    };
    let p = ses.mid.p();
    let mut i_star = BTreeMap::new();
    let mut j_star = BTreeMap::new();
    let mut delta = BTreeMap::new();
    for d in w.degrees() {
        i_star.insert(d, induced(&h1, &h2, &ses.inclusion.block(d), d, d));
        j_star.insert(d, induced(&h2, &h3, &ses.projection.block(d), d, d));
        if !w.contains(d - q) {
            continue;
        }
        // ∂[z] = [y] with i(y) = Q(x), j(x) = z
        let jb = ses.projection.block(d);
        let ib = ses.inclusion.block(d - q);
        let reps = h3.representatives(d).cloned().unwrap_or_else(|| FpMatrix::zero(p, 0, 0));
        let mut cols = Vec::new();
        for z in reps.columns() {
            let x = jb.solve(&z).ok_or_else(|| Error::InvalidModule(format!("projection not onto at {d}")))?;
            let qx = ses.mid.q_block(d).mul_vec(&x);
            let y = ib.solve(&qx).ok_or_else(|| Error::InvalidModule(format!("Q·lift leaves the submodule at {d}")))?;
            cols.push(h1.coordinates(d - q, &y).unwrap_or_else(|| vec![0; h1.dim(d - q)]));
        }
        let dm = FpMatrix::from_columns(p, h1.dim(d - q), &cols);
        report.connecting_ranks.insert(d, dm.rank());
        delta.insert(d, dm);
    }
    for d in w.degrees() {
        // at H(M)_d: ker j_* = im i_*
        let (is, js) = (&i_star[&d], &j_star[&d]);
        if js.kernel_basis().cols() != is.rank() || !js.mul(is)?.is_zero() {
            report.failures.push((d, "H(M)".into()));
        }
        if let Some(dl) = delta.get(&d) {
            // at H(M″)_d: ker ∂ = im j_*
            if dl.kernel_basis().cols() != js.rank() || !dl.mul(js)?.is_zero() {
                report.failures.push((d, "H(M'')".into()));
            }
            // at H(M′)_{d−q}: ker i_* = im ∂
            let next = &i_star[&(d - q)];
            if next.kernel_basis().cols() != dl.rank() || !next.mul(dl)?.is_zero() {
                report.failures.push((d - q, "H(M')".into()));
            }
        }
    }
    report.exact = report.failures.is_empty();
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct KunnethReport {
    pub holds: bool,
    pub window: Option<Window>,
    /// `(degree, dim H(a⊗b), Σ dim H(a)·dim H(b))`
    pub table: Vec<(i64, usize, usize)>,
}

pub fn kunneth_check(a: &QModule, b: &QModule) -> Result<KunnethReport> {
    let t = QModule::tensor(a, b)?;
    let ht = margolis_homology(&t)?;
    let ha = margolis_homology(a)?;
    let hb = margolis_homology(b)?;
    let predicted = WindowedGradedSpace::tensor(&ha.homology, &hb.homology);
    let (w, pred) = match predicted {
        Ok(pred) => (pred.window().intersect(&ht.valid_window), Some(pred)),
        Err(_) => (None, None),
    };
    let mut table = Vec::new();
    if let (Some(w), Some(pred)) = (w, pred) {
        for d in w.degrees() {
            table.push((d, ht.dim(d), pred.dim_or_zero(d)));
        }
    }
    let holds = table.iter().all(|&(_, x, y)| x == y);
    Ok(KunnethReport { holds, window: w, table })
}

/// `Ext^s_{E(Q)}(k, M)`: `ker Q` for `s = 0`, else `Σ^{−s|Q|} H(M;Q)`.
pub fn ext_q(m: &QModule, s: u32) -> Result<WindowedGradedSpace> {
    if s == 0 {
        return kernel_space(m);
    }
    Ok(margolis_homology(m)?.homology.suspend(-(s as i64) * m.qdeg()))
}

/// `Σ^{−s|Q|} H(M;Q)^*` for `s > 0`.
pub fn ext_dual(m: &QModule, s: u32) -> Result<WindowedGradedSpace> {
    if s == 0 {
        return Err(Error::Input("the dual description only covers s > 0".into()));
    }
    Ok(margolis_homology(m)?.homology.dual().suspend(-(s as i64) * m.qdeg()))
}

fn kernel_space(m: &QModule) -> Result<WindowedGradedSpace> {
    m.ensure_valid()?;
    let dom = m.q().domain;
    let mut out = WindowedGradedSpace::new(m.p(), dom)?;
    let w = m.window();
    out.set_completeness(
        m.space().complete_below() && dom.lo == w.lo,
        m.space().complete_above() && dom.hi == w.hi,
    );
    for d in dom.degrees() {
        let k = m.q_block(d).kernel_basis();
        let labels = (0..k.cols()).map(|i| format!("ker{d}.{i}")).collect();
        out.set_degree(d, labels)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub holds: bool,
    pub window: Option<Window>,
    /// `(degree, dim H(M*), dim H(M)*)`
    pub table: Vec<(i64, usize, usize)>,
}

/// Compare `H(M*;Q)` with `H(M;Q)^*` degreewise.
pub fn duality_check(m: &QModule) -> Result<DualityReport> {
    let lhs = margolis_homology(&m.dual())?;
    let rhs = margolis_homology(m)?.homology.dual();
    let w = lhs.valid_window.intersect(&rhs.window());
    let table: Vec<(i64, usize, usize)> = w
        .iter()
        .flat_map(|w| w.degrees())
        .map(|d| (d, lhs.dim(d), rhs.dim_or_zero(d)))
        .collect();
    Ok(DualityReport { holds: table.iter().all(|&(_, x, y)| x == y), window: w, table })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homology_of_k_and_free() {
        let h = margolis_homology(&QModule::k(3, 3, 0).unwrap()).unwrap();
        assert_eq!(h.dim(0), 1);
        assert_eq!(h.homology.labels(0), ["[1]".to_string()]);
        let f = margolis_homology(&QModule::free(5, 5, 2).unwrap()).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn ext_of_k_and_free() {
        let k = QModule::k(2, 3, 0).unwrap();
        for s in 0..5 {
            let e = ext_q(&k, s).unwrap();
            assert_eq!(e.total_dim(), 1);
            assert_eq!(e.dim(-(s as i64) * 3).unwrap(), 1);
        }
        let f = QModule::free(2, 3, 0).unwrap();
        let e0 = ext_q(&f, 0).unwrap();
        assert_eq!(e0.total_dim(), 1);
        assert_eq!(e0.dim(-3).unwrap(), 1);
        assert!(ext_q(&f, 1).unwrap().is_zero());
        assert!(ext_dual(&f, 0).is_err());
        assert_eq!(ext_dual(&k, 2).unwrap().dim(-6).unwrap(), 1);
    }

    #[test]
    fn kunneth_for_points() {
        let k = QModule::k(3, 1, 0).unwrap();
        let r = kunneth_check(&k, &k).unwrap();
        assert!(r.holds);
        assert_eq!(r.table, vec![(0, 1, 1)]);
        let f = QModule::free(3, 1, 0).unwrap();
        let r = kunneth_check(&f, &k).unwrap();
        assert!(r.holds && r.table.iter().all(|&(_, x, _)| x == 0));
    }

    #[test]
    fn les_for_free_module_over_k() {
        // 0 → Σ^{-|Q|} k → E(Q) → k → 0 with E(Q) top in degree 0
        let q = 3;
        let f = QModule::free(2, q, 0).unwrap();
        let w = f.window();
        let mut sub_space = WindowedGradedSpace::complete(2, w).unwrap();
        sub_space.set_degree(-q, vec!["Q".into()]).unwrap();
        let mut quot_space = WindowedGradedSpace::complete(2, w).unwrap();
        quot_space.set_degree(0, vec!["1".into()]).unwrap();
        let sub = QModule::trivial_action(sub_space.clone(), q).unwrap();
        let quot = QModule::trivial_action(quot_space.clone(), q).unwrap();
        let mut inc = GradedMap::zero(sub_space, f.space().clone(), 0, w);
        inc.set_block(-q, FpMatrix::identity(2, 1)).unwrap();
        let mut proj = GradedMap::zero(f.space().clone(), quot_space, 0, w);
        proj.set_block(0, FpMatrix::identity(2, 1)).unwrap();
        let ses = ShortExactSequence { sub, mid: f, quot, inclusion: inc, projection: proj };
        let r = les_check(&ses).unwrap();
        assert!(r.exact, "{:?}", r.failures);
        assert_eq!(r.connecting_ranks.get(&0), Some(&1));
    }

    #[test]
    fn duality_on_k() {
        let r = duality_check(&QModule::k(5, 1, 4).unwrap()).unwrap();
        assert!(r.holds);
        assert!(r.table.contains(&(-4, 1, 1)));
    }
}
