//! Ext over E(Q) from the periodic free resolution of k, computed by brute
//! force with nothing but linear algebra.
//!
//! The resolution is `P_s = E(Q)·g_s`, `|g_s| = −s|Q|`, `d(g_s) = Q g_{s−1}`.
//! A module map `f: P_s → M` of internal degree `t` is a pair
//! `(x, y) = (f(g_s), f(Q g_s))` subject to `y = Qx`; the coboundary is
//! precomposition with `d`, i.e. `(x, y) ↦ (y, 0)`.
//!
//! Degree translation: a class represented by `x = f(g_s)` is reported in
//! degree `|x| − s|Q|`. This puts Ext^s(k, k) in degree `−s|Q|` and the
//! socle of E(Q) (top class in degree 0) in degree `−|Q|` for `s = 0`.

use crate::error::Result;
use crate::fplin::FpMatrix;
use crate::qmod::QModule;

/// `(reported degree, dim Ext^s)` for every degree the module's window
/// determines, ascending.
pub fn ext_by_resolution(m: &QModule, s: u32) -> Result<Vec<(i64, usize)>> {
    let q = m.qdeg();
    let p = m.p();
    let sp = m.space();
    let w = m.window();
    let shift = s as i64 * q;
    let mut out = Vec::new();
    for x in (w.lo - 2 * q)..=(w.hi + q) {
        let needed = [x + q, x, x - q, x - 2 * q];
        if !needed.iter().all(|&d| sp.knows(d)) {
            continue;
        }
        if ![x + q, x, x - q].iter().all(|&d| m.q_defined(d)) {
            continue;
        }
        // cochains in filtration s: x ∈ M_x, y ∈ M_{x−q}
        let cs = cochains(m, x);
        // coboundary out of s into s+1 (x' = y)
        let ds = coboundary(p, sp.dim_or_zero(x), sp.dim_or_zero(x - q), sp.dim_or_zero(x - 2 * q), &cs)?;
        let ker = cs.cols() - ds.rank();
        let im = if s == 0 {
            0
        } else {
            // filtration s−1 in the same internal degree: x'' ∈ M_{x+q}, y'' ∈ M_x
            let prev = cochains(m, x + q);
            coboundary(p, sp.dim_or_zero(x + q), sp.dim_or_zero(x), sp.dim_or_zero(x - q), &prev)?.rank()
        };
        out.push((x - shift, ker - im));
    }
    Ok(out)
}

/// Basis of `{(x, y) ∈ M_d ⊕ M_{d−q} : y = Qx}` as columns.
fn cochains(m: &QModule, d: i64) -> FpMatrix {
    let p = m.p();
    let a = m.space().dim_or_zero(d);
    let b = m.space().dim_or_zero(d - m.qdeg());
    let qd = m.q_block(d);
    let mut c = FpMatrix::zero(p, b, a + b);
    for (r, col, v) in qd.triplets() {
        c.add_entry(r, col, v);
    }
    for r in 0..b {
        c.add_entry(r, a + r, p - 1);
    }
    c.kernel_basis()
}

/// Matrix of `(x, y) ↦ (y, 0)` applied to the cochain basis `cs`, landing in
/// the `(x', y')` coordinates of the next filtration.
fn coboundary(p: u64, a: usize, b: usize, c: usize, cs: &FpMatrix) -> Result<FpMatrix> {
    let mut sel = FpMatrix::zero(p, b + c, a + b);
    for r in 0..b {
        sel.add_entry(r, a + r, 1);
    }
    sel.mul(cs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_and_free_translation() {
        let k = QModule::k(3, 5, 0).unwrap();
        for s in 0..4u32 {
            let e = ext_by_resolution(&k, s).unwrap();
            let nz: Vec<_> = e.into_iter().filter(|&(_, n)| n > 0).collect();
            assert_eq!(nz, vec![(-(s as i64) * 5, 1)]);
        }
        let f = QModule::free(3, 5, 0).unwrap();
        let e0: Vec<_> = ext_by_resolution(&f, 0).unwrap().into_iter().filter(|&(_, n)| n > 0).collect();
        assert_eq!(e0, vec![(-5, 1)]);
        assert!(ext_by_resolution(&f, 2).unwrap().iter().all(|&(_, n)| n == 0));
    }
}
