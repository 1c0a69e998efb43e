//! Algebra and coaction routines against brute-force oracles that share no
//! code with the library.

use std::collections::BTreeMap;

use margolis_core::fplin::FpMatrix;
use margolis_core::graded::Window;
use margolis_core::monalg::{ExpRange, GeneratorSpec, Monomial, MonomialAlgebra};
use margolis_core::steenrod::{gen_power_coaction, t2_mul_bounded, DualSteenrod, GenCoaction, Tensor2};
use margolis_core::tate::tate_series_steps;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gens() -> Vec<GeneratorSpec> {
    vec![
        GeneratorSpec::new("x", 2, ExpRange::Polynomial),
        GeneratorSpec::new("y", 3, ExpRange::Exterior),
        GeneratorSpec::new("z", 5, ExpRange::Exterior),
        GeneratorSpec::new("w", 4, ExpRange::Truncated(3)),
        GeneratorSpec::new("t", -2, ExpRange::LaurentBelow(2)),
    ]
}

fn range(r: ExpRange) -> (i64, i64) {
    match r {
        ExpRange::Polynomial => (0, 40),
        ExpRange::Exterior => (0, 1),
        ExpRange::Truncated(h) => (0, h - 1),
        ExpRange::LaurentBelow(e) => (-40, e),
        ExpRange::Laurent => (-40, 40),
    }
}

/// Monomial counts per degree by nested loops over exponent ranges.
fn brute_counts(g: &[GeneratorSpec], w: Window) -> BTreeMap<i64, usize> {
    let mut counts = BTreeMap::new();
    let mut exps = vec![0i64; g.len()];
    fn rec(g: &[GeneratorSpec], i: usize, exps: &mut Vec<i64>, w: Window, out: &mut BTreeMap<i64, usize>) {
        if i == g.len() {
            let d: i64 = g.iter().zip(exps.iter()).map(|(s, e)| s.degree * e).sum();
            if w.contains(d) {
                *out.entry(d).or_default() += 1;
            }
            return;
        }
        let (lo, hi) = range(g[i].range);
        for e in lo..=hi {
            exps[i] = e;
            rec(g, i + 1, exps, w, out);
        }
    }
    rec(g, 0, &mut exps, w, &mut counts);
    counts
}

#[test]
fn enumeration_counts_match_brute_force() {
    for p in [2, 3, 5] {
        let g = gens();
        let alg = MonomialAlgebra::new(p, g.clone()).unwrap();
        let w = Window::new(-4, 30).unwrap();
        let basis = alg.enumerate_basis(w).unwrap();
        let brute = brute_counts(&g, w);
        for d in w.degrees() {
            assert_eq!(basis.monomials(d).len(), brute.get(&d).copied().unwrap_or(0), "p={p} degree {d}");
        }
    }
}

/// Product of monomials by writing both as words in the generators and
/// sorting the odd letters, one transposition at a time.
fn brute_product(p: u64, g: &[GeneratorSpec], x: &[i64], y: &[i64]) -> Option<(Vec<i64>, u64)> {
    let out: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    for (s, &e) in g.iter().zip(&out) {
        let (lo, hi) = range(s.range);
        let unbounded_below = matches!(s.range, ExpRange::LaurentBelow(_) | ExpRange::Laurent);
        if e > hi || (!unbounded_below && e < lo) {
            return None;
        }
    }
    if p == 2 {
        return Some((out, 1));
    }
    let odd = |i: usize| g[i].degree % 2 != 0;
    let mut word: Vec<usize> = Vec::new();
    for src in [x, y] {
        for (i, &e) in src.iter().enumerate() {
            if odd(i) && e % 2 != 0 {
                word.push(i);
            }
        }
    }
    let mut swaps = 0;
    for i in 0..word.len() {
        for j in 0..word.len() - 1 - i {
            if word[j] > word[j + 1] {
                word.swap(j, j + 1);
                swaps += 1;
            }
        }
    }
    if word.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((out, if swaps % 2 == 1 { p - 1 } else { 1 }))
}

fn random_exps(rng: &mut ChaCha8Rng, g: &[GeneratorSpec]) -> Vec<i64> {
    g.iter()
        .map(|s| {
            let (lo, hi) = range(s.range);
            rng.gen_range(lo.max(-6)..=hi.min(6))
        })
        .collect()
}

#[test]
fn products_match_brute_force() {
    for p in [2, 3, 5] {
        let g = gens();
        let alg = MonomialAlgebra::new(p, g.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(p);
        for _ in 0..500 {
            let (x, y) = (random_exps(&mut rng, &g), random_exps(&mut rng, &g));
            let got = alg.mul_monomials(&Monomial(x.clone()), &Monomial(y.clone())).map(|(m, s)| (m.0, s));
            assert_eq!(got, brute_product(p, &g, &x, &y), "p={p} {x:?} * {y:?}");
        }
    }
}

#[test]
fn rank_plus_nullity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [2, 3, 5, 7] {
        for _ in 0..50 {
            let (r, c) = (rng.gen_range(0..9), rng.gen_range(1..9));
            let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(0..p as i64)).collect()).collect();
            let m = if r == 0 { FpMatrix::zero(p, 0, c) } else { FpMatrix::from_rows(p, &rows) };
            let k = m.kernel_basis();
            assert_eq!(m.rank() + k.cols(), c);
            assert!(m.mul(&k).unwrap().is_zero());
        }
    }
}

/// Exact C(n, i) for any integer n, reduced mod p.
fn exact_binomial_mod(p: u64, n: i64, i: i64) -> u64 {
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for r in 0..i {
        num *= (n - r) as i128;
        den *= (r + 1) as i128;
    }
    (num / den).rem_euclid(p as i128) as u64
}

fn laurent(p: u64) -> MonomialAlgebra {
    MonomialAlgebra::new(p, vec![GeneratorSpec::new("t", -2, ExpRange::Laurent)]).unwrap()
}

fn psi(fragment: &DualSteenrod, alg: &MonomialAlgebra, e: i64) -> Tensor2 {
    gen_power_coaction(fragment, alg, &GenCoaction::Series(tate_series_steps(fragment)), 0, e)
}

#[test]
fn coaction_of_t_powers_has_binomial_coefficients() {
    for p in [2u64, 3, 5] {
        let fragment = DualSteenrod::new(p, 60).unwrap();
        let alg = laurent(p);
        for n in -12..=12i64 {
            let c = psi(&fragment, &alg, n);
            for i in 0..=4 {
                let Some(a) = fragment.xi_role(1, i) else { continue };
                let m = alg.gen_power(0, n + i * (p as i64 - 1));
                let got = c.get(&(a, m)).copied().unwrap_or(0);
                assert_eq!(got, exact_binomial_mod(p, n, i), "p={p} n={n} i={i}");
            }
        }
    }
}

#[test]
fn coaction_of_t_times_t_inverse_is_one() {
    for p in [2u64, 3, 5] {
        let fragment = DualSteenrod::new(p, 60).unwrap();
        let alg = laurent(p);
        let prod = t2_mul_bounded(fragment.algebra(), &alg, &psi(&fragment, &alg, 1), &psi(&fragment, &alg, -1), 60);
        let mut one = Tensor2::new();
        one.insert((fragment.unit(), alg.unit()), 1);
        assert_eq!(prod, one, "p={p}");
    }
}
