//! Seeded randomized checks over random E(Q)-modules.
//!
//! Each check is tallied as passed, failed or inconclusive (nothing to
//! compare on the module's window). The first failure of each check keeps a
//! short description so a report can point at it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fplin::FpMatrix;
use crate::graded::{Window, WindowedGradedSpace};
use crate::margolis::{duality_check, ext_q, kunneth_check, les_check, margolis_homology};
use crate::qmod::QModule;
use crate::random::{random_qmodule, random_ses, RandomModuleParams};
use crate::resolution::ext_by_resolution;
use crate::steenrod::Verdict;

pub const DEFAULT_SEED: u64 = 0x6d61_7267;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub primes: Vec<u64>,
    pub qdegs: Vec<i64>,
    /// Modules (or pairs) per `(p, |Q|)` case.
    pub count: usize,
    pub max_dim: usize,
    /// Width of each random module's window.
    pub width: i64,
    /// Largest filtration compared against the resolution.
    pub max_s: u32,
}

impl SuiteConfig {
    pub fn appendix(seed: u64) -> Self {
        SuiteConfig { seed, primes: vec![2, 3, 5], qdegs: vec![1, 3, 5, 7], count: 200, max_dim: 40, width: 24, max_s: 4 }
    }

    pub fn kunneth(seed: u64) -> Self {
        SuiteConfig { seed, primes: vec![2, 3, 5], qdegs: vec![1, 3, 5, 7], count: 100, max_dim: 40, width: 24, max_s: 0 }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckTally {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub first_failure: Option<String>,
}

impl CheckTally {
    fn new(name: &str) -> Self {
        CheckTally { name: name.into(), ..Default::default() }
    }

    fn record(&mut self, outcome: Option<bool>, what: impl FnOnce() -> String) {
        match outcome {
            Some(true) => self.passed += 1,
            Some(false) => {
                self.failed += 1;
                if self.first_failure.is_none() {
                    self.first_failure = Some(what());
                }
            }
            None => self.inconclusive += 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckTally>,
    pub verdict: Verdict,
}

impl SuiteReport {
    fn finish(seed: u64, checks: Vec<CheckTally>) -> Self {
        let verdict = if checks.iter().any(|c| c.failed > 0) {
            Verdict::Fail
        } else if checks.iter().any(|c| c.passed == 0) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        SuiteReport { seed, checks, verdict }
    }

    pub fn check(&self, name: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn case_rng(seed: u64, p: u64, q: i64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (p << 32) ^ (q as u64) << 8)
}

/// Q² = 0, duality, free acyclicity, Ext against the resolution, the
/// decomposition round trip and the long exact sequence.
pub fn appendix_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut q2 = CheckTally::new("q_squared_zero");
    let mut free = CheckTally::new("free_acyclic");
    let mut dual = CheckTally::new("duality");
    let mut ext = CheckTally::new("ext_vs_resolution");
    let mut dec = CheckTally::new("decomposition_roundtrip");
    let mut les = CheckTally::new("long_exact_sequence");
    for &p in &cfg.primes {
        for &q in &cfg.qdegs {
            let mut rng = case_rng(cfg.seed, p, q);
            let params = RandomModuleParams { p, qdeg: q, max_dim: cfg.max_dim, width: cfg.width };
            for i in 0..cfg.count {
                let tag = || format!("p={p} |Q|={q} module #{i}");
                let m = random_qmodule(&mut rng, params)?;
                q2.record(Some(m.validate().valid), tag);
                free.record(Some(free_sum_is_acyclic(&mut rng, p, q)?), tag);
                dual.record(soften(duality_check(&m).map(|r| r.window.is_some().then_some(r.holds)))?, tag);
                ext.record(soften(ext_agrees(&m, cfg.max_s))?, tag);
                dec.record(soften(decomposition_outcome(&m))?, tag);
                let ses = random_ses(&mut rng, params)?;
                les.record(soften(les_check(&ses).map(|r| r.checked.is_some().then_some(r.exact)))?, tag);
            }
        }
    }
    Ok(SuiteReport::finish(cfg.seed, vec![q2, free, dual, ext, dec, les]))
}

/// The per-module checks of [`appendix_suite`] on one given module.
pub fn check_module(m: &QModule, max_s: u32) -> Result<SuiteReport> {
    let mut q2 = CheckTally::new("q_squared_zero");
    let v = m.validate();
    q2.record(Some(v.valid), || format!("Q∘Q ≠ 0 on degree {}", v.first_failure.unwrap_or_default()));
    let mut checks = vec![q2];
    if v.valid {
        let mut dual = CheckTally::new("duality");
        let mut ext = CheckTally::new("ext_vs_resolution");
        let mut dec = CheckTally::new("decomposition_roundtrip");
        dual.record(soften(duality_check(m).map(|r| r.window.is_some().then_some(r.holds)))?, String::new);
        ext.record(soften(ext_agrees(m, max_s))?, String::new);
        dec.record(soften(decomposition_outcome(m))?, String::new);
        checks.extend([dual, ext, dec]);
    }
    Ok(SuiteReport::finish(0, checks))
}

/// Degreewise H(A⊗B) = H(A)⊗H(B) on random pairs.
pub fn kunneth_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut kun = CheckTally::new("kunneth");
    for &p in &cfg.primes {
        let mut rng = case_rng(cfg.seed, p, 0);
        for i in 0..cfg.count {
            let q = cfg.qdegs[rng.gen_range(0..cfg.qdegs.len())];
            let params = RandomModuleParams { p, qdeg: q, max_dim: cfg.max_dim, width: cfg.width };
            let a = random_qmodule(&mut rng, params)?;
            let b = random_qmodule(&mut rng, params)?;
            let outcome = soften(kunneth_check(&a, &b).map(|r| (!r.table.is_empty()).then_some(r.holds)))?;
            kun.record(outcome, || format!("p={p} |Q|={q} pair #{i}"));
        }
    }
    Ok(SuiteReport::finish(cfg.seed, vec![kun]))
}

/// A window too narrow to say anything is inconclusive, not an error.
fn soften(r: Result<Option<bool>>) -> Result<Option<bool>> {
    match r {
        Err(Error::Window(_)) => Ok(None),
        r => r,
    }
}

/// A sum of 1 to 3 copies of E(Q) with random tops in `[−10, 10]`.
fn free_sum_is_acyclic(rng: &mut ChaCha8Rng, p: u64, q: i64) -> Result<bool> {
    let w = Window::new(-10 - q, 10)?;
    let tops: Vec<i64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(-10..=10)).collect();
    let mut space = WindowedGradedSpace::complete(p, w)?;
    let mut slots: BTreeMap<i64, usize> = BTreeMap::new();
    let mut pairs = Vec::new();
    for &t in &tops {
        let a = *slots.entry(t).or_default();
        *slots.get_mut(&t).unwrap() += 1;
        let b = *slots.entry(t - q).or_default();
        *slots.get_mut(&(t - q)).unwrap() += 1;
        pairs.push((t, a, b));
    }
    for (&d, &n) in &slots {
        space.set_degree(d, (0..n).map(|i| format!("e{d}.{i}")).collect())?;
    }
    let mut blocks: BTreeMap<i64, FpMatrix> = BTreeMap::new();
    for (t, a, b) in pairs {
        blocks
            .entry(t)
            .or_insert_with(|| FpMatrix::zero(p, slots[&(t - q)], slots[&t]))
            .add_entry(b, a, 1);
    }
    let m = QModule::from_blocks(space, q, blocks)?;
    Ok(margolis_homology(&m)?.is_zero())
}

/// `None` when no degree of the module is covered by both descriptions.
fn ext_agrees(m: &QModule, max_s: u32) -> Result<Option<bool>> {
    let mut compared = 0;
    for s in 0..=max_s {
        let fast = match ext_q(m, s) {
            Ok(e) => e,
            Err(Error::Window(_)) => continue,
            Err(e) => return Err(e),
        };
        for (d, n) in ext_by_resolution(m, s)? {
            if fast.knows(d) {
                compared += 1;
                if fast.dim_or_zero(d) != n {
                    return Ok(Some(false));
                }
            }
        }
    }
    Ok((compared > 0).then_some(true))
}

/// Reassembled dimensions, trivial summands against Margolis homology, and
/// the generators forming a basis, all on the valid window.
fn decomposition_outcome(m: &QModule) -> Result<Option<bool>> {
    let dec = m.cyclic_decompose()?;
    let h = margolis_homology(m)?;
    let q = m.qdeg();
    let ok = dec.valid_window.degrees().all(|d| {
        dec.reassembled_dim(d, q) == m.space().dim_or_zero(d) && dec.trivial_dim(d) == h.dim(d)
    }) && m.decomposition_is_basis(&dec);
    Ok(Some(ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let mut cfg = SuiteConfig::appendix(7);
        cfg.count = 5;
        let r = appendix_suite(&cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let mut cfg = SuiteConfig::kunneth(7);
        cfg.count = 5;
        assert_eq!(kunneth_suite(&cfg).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    #[ignore = "full size; run by the acceptance target"]
    fn full_suites() {
        let t = std::time::Instant::now();
        let r = appendix_suite(&SuiteConfig::appendix(DEFAULT_SEED)).unwrap();
        eprintln!("{:?} {:?}", t.elapsed(), r);
        let t = std::time::Instant::now();
        let r = kunneth_suite(&SuiteConfig::kunneth(DEFAULT_SEED)).unwrap();
        eprintln!("{:?} {:?}", t.elapsed(), r);
    }
}
