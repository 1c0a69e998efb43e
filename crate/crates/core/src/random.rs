//! Seeded random E(Q)-modules and short exact sequences for property suites.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::Result;
use crate::fplin::{quotient_basis, FpMatrix};
use crate::graded::{GradedMap, Window, WindowedGradedSpace};
use crate::margolis::ShortExactSequence;
use crate::qmod::QModule;

#[derive(Clone, Copy, Debug)]
pub struct RandomModuleParams {
    pub p: u64,
    pub qdeg: i64,
    /// Upper bound on the total dimension.
    pub max_dim: usize,
    /// Width of the degree window.
    pub width: i64,
}

/// A direct sum of random free and trivial cyclic summands, disguised by a
/// random change of basis in every degree. The result is complete on its
/// window, so every degree of the window is valid.
pub fn random_qmodule<R: Rng>(rng: &mut R, params: RandomModuleParams) -> Result<QModule> {
    let RandomModuleParams { p, qdeg, max_dim, width } = params;
    let lo = rng.gen_range(-width..=0);
    let w = Window::new(lo, lo + width.max(qdeg))?;
    let target = rng.gen_range(0..=max_dim);
    // summands as (degree, is_free)
    let mut summands = Vec::new();
    let mut total = 0;
    while total < target {
        let free = rng.gen_bool(0.6) && total + 2 <= target && w.len() as i64 > qdeg;
        if free {
            let top = rng.gen_range(w.lo + qdeg..=w.hi);
            summands.push((top, true));
            total += 2;
        } else {
            summands.push((rng.gen_range(w.lo..=w.hi), false));
            total += 1;
        }
    }
    let mut basis: BTreeMap<i64, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    for &(d, free) in &summands {
        let i = *basis.entry(d).or_insert(0);
        basis.insert(d, i + 1);
        if free {
            let j = *basis.entry(d - qdeg).or_insert(0);
            basis.insert(d - qdeg, j + 1);
            edges.push((d, i, j));
        }
    }
    let mut space = WindowedGradedSpace::complete(p, w)?;
    for (&d, &n) in &basis {
        space.set_degree(d, (0..n).map(|i| format!("e{d}.{i}")).collect())?;
    }
    let mut raw: BTreeMap<i64, FpMatrix> = BTreeMap::new();
    for &(d, i, j) in &edges {
        let m = raw
            .entry(d)
            .or_insert_with(|| FpMatrix::zero(p, basis[&(d - qdeg)], basis[&d]));
        m.add_entry(j, i, 1);
    }
    // Q' = B_{d−q}^{-1} Q B_d
    let change: BTreeMap<i64, (FpMatrix, FpMatrix)> = basis
        .iter()
        .map(|(&d, &n)| {
            let b = random_invertible(rng, p, n);
            let inv = inverse(&b);
            (d, (b, inv))
        })
        .collect();
    let mut blocks = BTreeMap::new();
    for (d, m) in raw {
        let b = &change[&d].0;
        let binv = &change[&(d - qdeg)].1;
        blocks.insert(d, binv.mul(&m)?.mul(b)?);
    }
    QModule::from_blocks(space, qdeg, blocks)
}

pub fn random_invertible<R: Rng>(rng: &mut R, p: u64, n: usize) -> FpMatrix {
    loop {
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..p) as i64).collect()).collect();
        let m = if n == 0 { FpMatrix::zero(p, 0, 0) } else { FpMatrix::from_rows(p, &rows) };
        if m.rank() == n {
            return m;
        }
    }
}

/// Inverse of a square invertible matrix.
pub fn inverse(m: &FpMatrix) -> FpMatrix {
    let n = m.rows();
    let cols: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            m.solve(&e).expect("invertible")
        })
        .collect();
    FpMatrix::from_columns(m.p(), n, &cols)
}

/// `0 → N → M → M/N → 0` for the E(Q)-submodule N generated by a few random
/// homogeneous vectors of a random module M.
pub fn random_ses<R: Rng>(rng: &mut R, params: RandomModuleParams) -> Result<ShortExactSequence> {
    let m = random_qmodule(rng, params)?;
    let p = params.p;
    let q = params.qdeg;
    let w = m.window();
    let sp = m.space();
    let degs: Vec<i64> = sp.support().map(|(d, _)| d).collect();
    let mut gens: BTreeMap<i64, Vec<Vec<u64>>> = BTreeMap::new();
    if !degs.is_empty() {
        for _ in 0..rng.gen_range(0..=3) {
            let d = degs[rng.gen_range(0..degs.len())];
            let v: Vec<u64> = (0..sp.dim_or_zero(d)).map(|_| rng.gen_range(0..p)).collect();
            gens.entry(d).or_default().push(v);
        }
    }
    // N_d = span(gens_d ∪ Q gens_{d+q})
    let mut sub_basis: BTreeMap<i64, FpMatrix> = BTreeMap::new();
    for d in w.degrees() {
        let n = sp.dim_or_zero(d);
        let mut cols: Vec<Vec<u64>> = gens.get(&d).cloned().unwrap_or_default();
        for v in gens.get(&(d + q)).into_iter().flatten() {
            cols.push(m.q_block(d + q).mul_vec(v));
        }
        sub_basis.insert(d, FpMatrix::from_columns(p, n, &cols).image_basis());
    }
    let mut sub_space = WindowedGradedSpace::complete(p, w)?;
    let mut quot_space = WindowedGradedSpace::complete(p, w)?;
    let mut comp: BTreeMap<i64, FpMatrix> = BTreeMap::new();
    let mut full_inv: BTreeMap<i64, FpMatrix> = BTreeMap::new();
    for d in w.degrees() {
        let n = sp.dim_or_zero(d);
        let s = &sub_basis[&d];
        let c = quotient_basis(s, n);
        sub_space.set_degree(d, (0..s.cols()).map(|i| format!("n{d}.{i}")).collect())?;
        quot_space.set_degree(d, (0..c.cols()).map(|i| format!("c{d}.{i}")).collect())?;
        full_inv.insert(d, inverse(&s.hstack(&c)?));
        comp.insert(d, c);
    }
    let mut sub_blocks = BTreeMap::new();
    let mut quot_blocks = BTreeMap::new();
    let mut inclusion = GradedMap::zero(sub_space.clone(), sp.clone(), 0, w);
    let mut projection = GradedMap::zero(sp.clone(), quot_space.clone(), 0, w);
    for d in w.degrees() {
        let s = &sub_basis[&d];
        let c = &comp[&d];
        inclusion.set_block(d, s.clone())?;
        // projection = C-rows of [S | C]^{-1}
        let inv = &full_inv[&d];
        let keep: Vec<Vec<u64>> = (s.cols()..s.cols() + c.cols()).map(|r| inv.dense_row(r)).collect();
        projection.set_block(d, FpMatrix::from_columns(p, sp.dim_or_zero(d), &keep).transpose())?;
        if !w.contains(d - q) {
            continue;
        }
        let qd = m.q_block(d);
        let coords = full_inv[&(d - q)].mul(&qd)?;
        let (s_lo, c_lo) = (sub_basis[&(d - q)].cols(), comp[&(d - q)].cols());
        // Q on N: top rows of coords·S
        let qs = coords.mul(s)?;
        let qc = coords.mul(c)?;
        sub_blocks.insert(d, rows_range(&qs, 0, s_lo));
        quot_blocks.insert(d, rows_range(&qc, s_lo, s_lo + c_lo));
    }
    let sub = QModule::from_blocks(sub_space, q, sub_blocks)?;
    let quot = QModule::from_blocks(quot_space, q, quot_blocks)?;
    Ok(ShortExactSequence { sub, mid: m, quot, inclusion, projection })
}

fn rows_range(m: &FpMatrix, lo: usize, hi: usize) -> FpMatrix {
    let rows: Vec<Vec<u64>> = (lo..hi).map(|r| m.dense_row(r)).collect();
    FpMatrix::from_columns(m.p(), m.cols(), &rows).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_modules_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &p in &[2, 3, 5] {
            for &q in &[1, 3] {
                let m = random_qmodule(&mut rng, RandomModuleParams { p, qdeg: q, max_dim: 20, width: 12 }).unwrap();
                assert!(m.validate().valid);
                assert!(m.space().total_dim() <= 20);
            }
        }
    }

    #[test]
    fn random_ses_is_short_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let ses = random_ses(&mut rng, RandomModuleParams { p: 3, qdeg: 3, max_dim: 15, width: 10 }).unwrap();
            ses.check().unwrap();
        }
    }
}
