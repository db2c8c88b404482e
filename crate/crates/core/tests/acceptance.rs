//! Acceptance criteria 1 to 9. Runs without the libtest harness so every criterion prints a
//! PASS or FAIL line; the process exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use laurent_ritt::chains::{connect, verify_chain, Connector};
use laurent_ritt::decompose::{poly_split, type1_split, DecomposeError};
use laurent_ritt::ritt_catalog::{
    laurent_q_sides, q2_sides, q3_sides, sporadic24, sporadic24_certificate,
};
use laurent_ritt::selftest::{self, small_poly, small_scalar, Check};
use laurent_ritt::{
    compose_all, CycloScalar as S, Decomposer, Decomposition, LaurentPoly, Limits, Poly, RatFunc,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn from_check(c: Check) -> Self {
        let detail = if c.failed.is_empty() {
            format!("{} checks", c.passed)
        } else {
            format!(
                "{} passed, {} failed; first: {}",
                c.passed,
                c.failed.len(),
                c.failed[0]
            )
        };
        Outcome { ok: c.ok(), detail }
    }

    fn tally(passed: usize, failures: Vec<String>) -> Self {
        let ok = failures.is_empty() && passed > 0;
        let detail = match failures.first() {
            None => format!("{passed} checks"),
            Some(f) => format!("{passed} passed, {} failed; first: {f}", failures.len()),
        };
        Outcome { ok, detail }
    }
}

fn compose_lp(g: &Poly, h: &LaurentPoly) -> LaurentPoly {
    g.as_laurent().compose(h).expect("polynomial outer factor")
}

fn dihedral(n: u32) -> LaurentPoly {
    LaurentPoly::from_ints(&[(n as i64, 1), (-(n as i64), 1)])
}

fn nonzero_scalar(rng: &mut impl Rng) -> S {
    loop {
        let c = small_scalar(rng);
        if !c.is_zero() {
            return c;
        }
    }
}

fn poly_of_degree(rng: &mut impl Rng, deg: usize) -> Poly {
    let mut c: Vec<S> = (0..deg).map(|_| small_scalar(rng)).collect();
    c.push(nonzero_scalar(rng));
    Poly::from_coeffs(&c)
}

/// Laurent polynomial with exact pole orders `p0` at zero and `pinf` at infinity.
fn laurent_with_poles(rng: &mut impl Rng, p0: i64, pinf: i64) -> LaurentPoly {
    LaurentPoly::from_terms((-p0..=pinf).map(|e| {
        let c = if e == -p0 || e == pinf {
            nonzero_scalar(rng)
        } else {
            small_scalar(rng)
        };
        (e, c)
    }))
}

// ---------------------------------------------------------------------------------------------
// Oracle: maximal chains in the subgroup lattice of the dihedral group of order 2n.

/// Element `r^a s^b` is encoded as `a + n b`.
fn dihedral_mul(n: usize, x: usize, y: usize) -> usize {
    let (a1, b1) = (x % n, x / n);
    let (a2, b2) = (y % n, y / n);
    let a = if b1 == 0 {
        (a1 + a2) % n
    } else {
        (a1 + n - a2) % n
    };
    a + n * (b1 ^ b2)
}

fn generated(n: usize, gens: &[usize]) -> BTreeSet<usize> {
    let mut set: BTreeSet<usize> = BTreeSet::from([0]);
    let mut frontier = vec![0];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = dihedral_mul(n, x, g);
            if set.insert(y) {
                frontier.push(y);
            }
        }
    }
    set
}

/// Number of maximal chains from the trivial subgroup to the whole group. Every subgroup of a
/// dihedral group is generated by at most two elements, so closing all pairs lists them all.
fn dihedral_maximal_chains(n: usize) -> u64 {
    let order = 2 * n;
    let mut subgroups: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for x in 0..order {
        for y in x..order {
            subgroups.insert(generated(n, &[x, y]));
        }
    }
    let subs: Vec<BTreeSet<usize>> = subgroups.into_iter().collect();
    let covers = |a: &BTreeSet<usize>, b: &BTreeSet<usize>| {
        a.len() < b.len()
            && a.is_subset(b)
            && !subs
                .iter()
                .any(|c| a.len() < c.len() && c.len() < b.len() && a.is_subset(c) && c.is_subset(b))
    };
    let mut idx: Vec<usize> = (0..subs.len()).collect();
    idx.sort_by_key(|&i| std::cmp::Reverse(subs[i].len()));
    let mut count: BTreeMap<usize, u64> = BTreeMap::new();
    for &i in &idx {
        let c = if subs[i].len() == order {
            1
        } else {
            idx.iter()
                .filter(|&&j| covers(&subs[i], &subs[j]))
                .map(|j| count[j])
                .sum()
        };
        count.insert(i, c);
    }
    let trivial = subs.iter().position(|s| s.len() == 1).unwrap();
    count[&trivial]
}

// ---------------------------------------------------------------------------------------------
// Oracle: coefficient ansatz for splits f = g ∘ h with h monic at infinity and zero constant.

/// Fixes the unknown coefficient of `x^e` in `h` so that the coefficient of `x^target_exp` in
/// `h^r` equals `target`. The coefficient is affine in the unknown once all coefficients further
/// from the constant term are known, so two trial expansions determine it.
fn fix_coefficient(h: &LaurentPoly, e: i64, r: u32, target_exp: i64, target: &S) -> LaurentPoly {
    let c0 = h.pow(r).coeff(target_exp);
    let h1 = h + &LaurentPoly::monomial(S::one(), e);
    let c1 = h1.pow(r).coeff(target_exp);
    let t = (target - &c0)
        .checked_div(&(&c1 - &c0))
        .expect("linear coefficient is nonzero");
    h + &LaurentPoly::monomial(t, e)
}

/// Outer polynomial `g` with `g ∘ h = f`, by matching top coefficients of powers of `h`.
fn solve_outer(f: &LaurentPoly, h: &LaurentPoly, r: u32) -> Option<Poly> {
    let sinf = h.max_exp().unwrap();
    let mut rem = f.clone();
    let mut g = vec![S::zero(); r as usize + 1];
    for k in (1..=r).rev() {
        let hk = h.pow(k);
        let c = rem.coeff(k as i64 * sinf).checked_div(&hk.lead()).unwrap();
        rem = &rem - &hk.scale(&c);
        g[k as usize] = c;
    }
    g[0] = rem.constant_term();
    rem = &rem - &LaurentPoly::constant(g[0].clone());
    rem.is_zero().then(|| Poly::from_coeffs(&g))
}

/// Every split of `f` with outer degree `r`, or `None` when a needed root of unity ratio is not
/// expressible.
fn ansatz_splits(f: &LaurentPoly, r: u32) -> Option<Vec<(Poly, LaurentPoly)>> {
    let (d0, dinf) = (f.d_zero() as i64, f.d_inf() as i64);
    let (s0, sinf) = (d0 / r as i64, dinf / r as i64);
    let lc = f.lead();
    let mut top = LaurentPoly::monomial(S::one(), sinf);
    for j in 1..sinf {
        let target = f.coeff(r as i64 * sinf - j).checked_div(&lc).unwrap();
        top = fix_coefficient(&top, sinf - j, r, r as i64 * sinf - j, &target);
    }
    let candidates = if s0 == 0 {
        vec![top]
    } else {
        let roots = f.trail().checked_div(&lc).unwrap().all_nth_roots(r)?;
        roots
            .into_iter()
            .map(|c| {
                let mut h = &top + &LaurentPoly::monomial(c, -s0);
                for j in 1..s0 {
                    let target = f.coeff(-(r as i64) * s0 + j).checked_div(&lc).unwrap();
                    h = fix_coefficient(&h, -s0 + j, r, -(r as i64) * s0 + j, &target);
                }
                h
            })
            .collect()
    };
    let mut out: Vec<(Poly, LaurentPoly)> = Vec::new();
    for h in candidates {
        if let Some(g) = solve_outer(f, &h, r) {
            if !out.iter().any(|(_, h2)| h2 == &h) {
                out.push((g, h));
            }
        }
    }
    out.sort_by_key(|(_, h)| h.canonical_key());
    Some(out)
}

// ---------------------------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    Outcome::from_check(selftest::dickson_suite(50, 60, 20, 40, 5, 11))
}

fn criterion_2() -> Outcome {
    Outcome::from_check(selftest::dfac_suite(24))
}

fn criterion_3() -> Outcome {
    Outcome::from_check(selftest::catalogue_sweep(12, 60, 20, 13))
}

fn criterion_4() -> Outcome {
    let (g1, h1, g2, h2) = sporadic24();
    let f = compose_lp(&g1, &h1);
    let mut passed = 0;
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if ok {
            passed += 1;
        } else {
            failures.push(what.to_string());
        }
    };
    check(compose_lp(&g2, &h2) == f, "g1 ∘ h1 = g2 ∘ h2");
    check(f.degree() == 24, "composite has degree 24");
    let fr = RatFunc::from_laurent(&f);
    for (k, step) in sporadic24_certificate().iter().enumerate() {
        check(&compose_all(step) == &fr, &format!("certificate step {k}"));
    }

    // The two sides refined to complete decompositions through their outer factors.
    let mut dec = Decomposer::new(Limits::default());
    let mut refine = |outer: &Poly, inner: &LaurentPoly| -> Option<Decomposition> {
        let left = dec.chains(outer.as_laurent()).ok()?.first()?.clone();
        let right = dec.chains(inner).ok()?.first()?.clone();
        let factors: Vec<RatFunc> = left
            .iter()
            .chain(&right)
            .map(RatFunc::from_laurent)
            .collect();
        dec.certify(factors).ok()
    };
    let side1 = refine(&g1, &h1);
    let side2 = refine(&g2, &h2);
    check(
        side1.as_ref().is_some_and(|d| d.is_complete()),
        "first side refines to a complete decomposition",
    );
    check(
        side2.as_ref().is_some_and(|d| d.is_complete()),
        "second side refines to a complete decomposition",
    );
    if let (Some(a), Some(b)) = (&side1, &side2) {
        match connect(a, b, &Limits::default()) {
            Ok(p) => {
                check(verify_chain(&p), "chain verifies");
                check(
                    p.decs.len() <= 8,
                    &format!("chain has {} decompositions", p.decs.len()),
                );
            }
            Err(e) => check(false, &format!("connect failed: {e}")),
        }
    }
    Outcome::tally(passed, failures)
}

fn criterion_5() -> Outcome {
    let mut passed = 0;
    let mut failures = Vec::new();
    for n in [2u32, 3, 4, 6, 12] {
        let expected = dihedral_maximal_chains(n as usize);
        let got = laurent_ritt::complete_decompositions(&dihedral(n), &Limits::default())
            .map(|d| d.len() as u64);
        match got {
            Ok(c) if c == expected => passed += 1,
            other => failures.push(format!(
                "n = {n}: lattice gives {expected}, decomposer gives {other:?}"
            )),
        }
    }
    Outcome::tally(passed, failures)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut passed = 0;
    let mut failures = Vec::new();
    for trial in 0..100 {
        let g = {
            let d = rng.gen_range(2..=4);
            poly_of_degree(&mut rng, d)
        };
        if trial % 2 == 0 {
            let h = {
                let d = rng.gen_range(2..=4);
                poly_of_degree(&mut rng, d)
            };
            let f = g.compose(&h);
            let n = f.deg() as u32;
            for r in (2..n).filter(|r| n % r == 0) {
                let lib = poly_split(&f, r)
                    .map(|(g, h)| vec![(g.into_laurent(), h.into_laurent())])
                    .unwrap_or_default();
                let oracle: Vec<(LaurentPoly, LaurentPoly)> = ansatz_splits(f.as_laurent(), r)
                    .unwrap()
                    .into_iter()
                    .map(|(g, h)| (g.into_laurent(), h))
                    .collect();
                if lib == oracle {
                    passed += 1;
                } else {
                    failures.push(format!(
                        "poly f = {f}, r = {r}: library {} vs oracle {}",
                        lib.len(),
                        oracle.len()
                    ));
                }
            }
        } else {
            let (p0, pinf) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
            let h = laurent_with_poles(&mut rng, p0, pinf);
            let f = compose_lp(&g, &h);
            let (d0, dinf) = (f.d_zero() as u32, f.d_inf() as u32);
            for r in (2..d0 + dinf).filter(|r| d0 % r == 0 && dinf % r == 0) {
                let lib = type1_split(&f, r);
                let oracle = ansatz_splits(&f, r);
                let agree = match (&lib, &oracle) {
                    (Ok(a), Some(b)) => a == b,
                    (Err(DecomposeError::RootUnavailable { .. }), None) => true,
                    _ => false,
                };
                if agree {
                    passed += 1;
                } else {
                    failures.push(format!(
                        "laurent f = {f}, r = {r}: library {lib:?} vs oracle {oracle:?}"
                    ));
                }
            }
        }
    }
    Outcome::tally(passed, failures)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut passed = 0;
    let mut failures = Vec::new();
    for _ in 0..50 {
        let g1 = {
            let d = rng.gen_range(2..=4);
            poly_of_degree(&mut rng, d)
        };
        let h1 = {
            let d = rng.gen_range(2..=4);
            poly_of_degree(&mut rng, d)
        };
        let (a, b) = (nonzero_scalar(&mut rng), small_scalar(&mut rng));
        let mu0 = Poly::from_coeffs(&[b.clone(), a.clone()]);
        let mu0_inv = Poly::from_coeffs(&[(-&b).checked_div(&a).unwrap(), a.inv().unwrap()]);
        let g2 = g1.compose(&mu0);
        let h2 = mu0_inv.compose(&h1);
        let f = g1.compose(&h1);
        assert_eq!(g2.compose(&h2), f);

        // Both right factors reduce to the unique normalized right factor of that degree; the
        // affine map relating them is read off from leading and constant coefficients.
        let r = g1.deg() as u32;
        let splits = ansatz_splits(f.as_laurent(), r).unwrap();
        let ok = splits.len() == 1 && {
            let h = Poly::from_laurent(splits[0].1.clone()).unwrap();
            let lam = |k: &Poly| Poly::from_coeffs(&[k.coeff(0), k.lead()]);
            let (l1, l2) = (lam(&h1), lam(&h2));
            let l2_inv = Poly::from_coeffs(&[
                (-&l2.coeff(0)).checked_div(&l2.lead()).unwrap(),
                l2.lead().inv().unwrap(),
            ]);
            let mu = l1.compose(&l2_inv);
            let mu_inv = l2.compose(&Poly::from_coeffs(&[
                (-&l1.coeff(0)).checked_div(&l1.lead()).unwrap(),
                l1.lead().inv().unwrap(),
            ]));
            l1.compose(&h) == h1
                && l2.compose(&h) == h2
                && mu.deg() == 1
                && g1.compose(&mu) == g2
                && mu_inv.compose(&h1) == h2
                && poly_split(&f, r).map(|(_, hl)| hl == h).unwrap_or(false)
        };
        if ok {
            passed += 1;
        } else {
            failures.push(format!("g1 = {g1}, h1 = {h1}, g2 = {g2}, h2 = {h2}"));
        }
    }
    Outcome::tally(passed, failures)
}

fn pm_one(rng: &mut impl Rng) -> S {
    if rng.gen_bool(0.5) {
        S::one()
    } else {
        S::from_int(-1)
    }
}

fn random_three_factor(rng: &mut impl Rng) -> LaurentPoly {
    loop {
        let a = rng.gen_range(2..=3usize);
        let b = rng.gen_range(2..=3usize);
        let (p0, pinf) = (rng.gen_range(1..=2i64), rng.gen_range(1..=2i64));
        if a * b * (p0 + pinf) as usize > 24 {
            continue;
        }
        let u = Poly::from_coeffs(&(0..=a).map(|_| pm_one(rng)).collect::<Vec<_>>());
        let v = Poly::from_coeffs(&(0..=b).map(|_| pm_one(rng)).collect::<Vec<_>>());
        let w = LaurentPoly::from_terms((-p0..=pinf).map(|e| (e, pm_one(rng))));
        return compose_lp(&u.compose(&v), &w);
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (g1, h1, _, _) = sporadic24();
    let mut corpus = vec![compose_lp(&g1, &h1)];
    corpus.extend([2u32, 3, 4, 6, 12].map(dihedral));
    corpus.extend((0..50).map(|_| random_three_factor(&mut rng)));

    let mut passed = 0;
    let mut failures = Vec::new();
    for f in &corpus {
        let mut conn = Connector::new(Limits::default());
        let decs = match conn.decomposer().complete_decompositions(f) {
            Ok(d) => d,
            Err(e) => {
                failures.push(format!("{f}: {e}"));
                continue;
            }
        };
        let degrees = decs[0].sorted_degrees();
        if decs.iter().any(|d| d.sorted_degrees() != degrees) {
            failures.push(format!("{f}: degree multisets differ"));
            continue;
        }
        passed += 1;
        for i in 0..decs.len() {
            for j in i + 1..decs.len() {
                match conn.connect(&decs[i], &decs[j]) {
                    Ok(p) if verify_chain(&p) => passed += 1,
                    Ok(_) => failures.push(format!("{f}: chain {i} to {j} does not verify")),
                    Err(e) => failures.push(format!("{f}: connect {i} to {j}: {e}")),
                }
            }
        }
    }
    Outcome::tally(passed, failures)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut passed = 0;
    let mut failures = Vec::new();
    for _ in 0..20 {
        let p = small_poly(&mut rng, 3);
        for (name, (l, r)) in [("q2", q2_sides(&p)), ("q3", q3_sides(&p))] {
            if l == r {
                passed += 1;
            } else {
                failures.push(format!("{name} with p = {p}"));
            }
        }
        let big_q = &small_poly(&mut rng, 2) * &Poly::x();
        match laurent_q_sides(&big_q) {
            Ok((l, r)) if l == r => passed += 1,
            _ => failures.push(format!("Q = {big_q}")),
        }
    }
    Outcome::tally(passed, failures)
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let results: Vec<(u32, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(k, run)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let out = run();
                    (k, out, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion panicked"))
            .collect()
    });
    let mut all = true;
    for (k, out, secs) in &results {
        all &= out.ok;
        println!(
            "criterion {k}: {} ({}, {secs:.1}s)",
            if out.ok { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
