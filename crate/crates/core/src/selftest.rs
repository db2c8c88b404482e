//! Identity suites shared by the command-line `selftest` and the acceptance tests.

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chains::{connect, verify_chain};
use crate::cyclofield::CycloScalar;
use crate::decompose::{complete_decompositions, dihedral_decompositions, Limits};
use crate::dickson::{
    dickson, dickson1, dickson_plus, dickson_plus_factors, dickson_second, BivariatePoly,
};
use crate::ratfunc::{compose_all, Decomposition, LaurentPoly, Poly, RatFunc};
use crate::ritt_catalog::{
    conjugated_q, construct, dickson_conjugate_steps, laurent_q_sides, q2_sides, q3_sides,
    sporadic24_certificate, AzCase, MoveKind,
};

type S = CycloScalar;

/// Outcome of one suite.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub passed: usize,
    pub failed: Vec<String>,
}

impl Check {
    fn new(name: &str) -> Self {
        Check {
            name: name.to_string(),
            ..Default::default()
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(what());
        }
    }

    pub fn ok(&self) -> bool {
        self.failed.is_empty() && self.passed > 0
    }
}

/// A random scalar from `{0, ±1, ±2, zeta_3, zeta_4}`.
pub fn small_scalar(rng: &mut impl Rng) -> S {
    match rng.gen_range(0..7) {
        0 => S::zero(),
        1 => S::one(),
        2 => S::from_int(-1),
        3 => S::from_int(2),
        4 => S::from_int(-2),
        5 => S::root_of_unity(3, 1),
        _ => S::i(),
    }
}

/// A random nonzero polynomial of degree at most `deg` with coefficients from [`small_scalar`].
pub fn small_poly(rng: &mut impl Rng, deg: usize) -> Poly {
    loop {
        let c: Vec<S> = (0..=deg).map(|_| small_scalar(rng)).collect();
        let p = Poly::from_coeffs(&c);
        if !p.is_zero() {
            return p;
        }
    }
}

fn random_alpha(rng: &mut impl Rng) -> S {
    loop {
        let a = &S::from_int(rng.gen_range(-3..=3))
            + &(&S::root_of_unity(*[3u32, 4, 5].choose(rng).unwrap(), 1)
                * &S::from_int(rng.gen_range(-2..=2)));
        if !a.is_zero() {
            return a;
        }
    }
}

/// Dickson identities: the functional equation, the composition law, variable scaling and the
/// second-kind relation.
pub fn dickson_suite(
    max_n: u32,
    max_mn: u32,
    max_scale: u32,
    max_second: u32,
    alphas: usize,
    seed: u64,
) -> Check {
    let mut c = Check::new("dickson");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xi = LaurentPoly::from_ints(&[(1, 1), (-1, 1)]).to_ratfunc();
    for n in 1..=max_n {
        let lhs = RatFunc::from(dickson1(n)).compose(&xi);
        let ni = n as i64;
        c.record(
            lhs == LaurentPoly::from_ints(&[(ni, 1), (-ni, 1)]).to_ratfunc(),
            || format!("D_{n}(x + 1/x)"),
        );
    }
    let alphas: Vec<S> = (0..alphas).map(|_| random_alpha(&mut rng)).collect();
    for a in &alphas {
        for m in 1..=max_mn {
            for n in 1..=max_mn / m {
                let lhs = dickson(m, &a.pow(n as i64)).compose(&dickson(n, a));
                c.record(lhs == dickson(m * n, a), || {
                    format!("D_{m} ∘ D_{n} at alpha = {a}")
                });
            }
        }
        let beta = random_alpha(&mut rng);
        for n in 1..=max_scale {
            let lhs = dickson(n, a).scale(&beta.pow(n as i64));
            let rhs = dickson(n, &(&(&beta * &beta) * a))
                .compose(&Poly::from_coeffs(&[S::zero(), beta.clone()]));
            c.record(lhs == rhs, || {
                format!("scaling D_{n} by {beta} at alpha = {a}")
            });
        }
    }
    for n in 1..=max_second {
        let d = dickson1(n);
        let e = dickson_second(n - 1);
        let lhs = &(&d * &d) - &Poly::constant(S::from_int(4));
        c.record(lhs == &Poly::from_ints(&[-4, 0, 1]) * &(&e * &e), || {
            format!("D_{n}^2 - 4")
        });
    }
    c
}

/// Product of the factors of `D_n(x) + D_n(y)` against the direct sum.
pub fn dfac_suite(max_n: u32) -> Check {
    let mut c = Check::new("dickson_plus_factors");
    for n in 1..=max_n {
        let (lin, qs) = dickson_plus_factors(n);
        let mut prod = lin.unwrap_or_else(BivariatePoly::one);
        for q in &qs {
            prod = &prod * q;
        }
        c.record(prod == dickson_plus(n), || format!("n = {n}"));
    }
    c
}

/// Instantiates every catalogue family over integer parameters up to `max` (primitive roots of
/// unity of order `2 d m n` only while `d m n <= max_product`) and over `randoms` random polynomial parameters per family.
pub fn catalogue_sweep(max: u32, max_product: u32, randoms: usize, seed: u64) -> Check {
    let mut c = Check::new("catalogue");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = |c: &mut Check, k: MoveKind| match construct(&k) {
        Ok(b) => c.record(b.verified, || format!("{k:?} did not verify")),
        Err(e) => c.record(false, || format!("{k:?}: {e}")),
    };
    let q0: RatFunc = Poly::from_ints(&[1, 1]).into();
    for n in 1..=max {
        for r in -(max as i64)..=max as i64 {
            if r.unsigned_abs().gcd(&(n as u64)) == 1 {
                run(
                    &mut c,
                    MoveKind::MonomialTwist {
                        n,
                        r,
                        q: q0.clone(),
                    },
                );
            }
        }
        run(&mut c, MoveKind::DicksonBridge { n });
        for m in 1..=max {
            run(&mut c, MoveKind::DicksonSwap { m, n });
        }
        for k in 0..n as i64 {
            run(
                &mut c,
                MoveKind::DicksonConjugate {
                    n,
                    zeta: S::root_of_unity(n, k),
                },
            );
        }
        for k in (1..2 * n as i64).step_by(2) {
            run(
                &mut c,
                MoveKind::UniqueNegation {
                    n,
                    zeta: S::root_of_unity(2 * n, k),
                },
            );
        }
        for r in 1..n {
            if r.gcd(&n) == 1 {
                run(&mut c, MoveKind::UniqueBinomial { n, r });
            }
        }
    }
    for d in 2..=max {
        for m in 1..=max {
            for n in 1..=max {
                if m.gcd(&n) != 1 {
                    continue;
                }
                let dmn = d * m * n;
                // a root of -1 of 2-power order keeps the field small for large products
                let two = 2 << dmn.trailing_zeros();
                run(
                    &mut c,
                    MoveKind::DicksonNegation {
                        d,
                        m,
                        n,
                        zeta: S::root_of_unity(two, 1),
                    },
                );
                if dmn <= max_product && two != 2 * dmn {
                    run(
                        &mut c,
                        MoveKind::DicksonNegation {
                            d,
                            m,
                            n,
                            zeta: S::root_of_unity(2 * dmn, 1),
                        },
                    );
                }
            }
        }
    }
    run(&mut c, MoveKind::Sporadic24);
    for n in 1..=max.min(4) {
        for m in 1..=max.min(4) {
            for k in (1..2 * n as i64).step_by(2) {
                let gamma = S::root_of_unity(2 * n, k);
                run(
                    &mut c,
                    MoveKind::OddRemainder {
                        m,
                        n,
                        gamma,
                        g: Poly::from_ints(&[0, 1, 0, 1]),
                    },
                );
            }
        }
    }
    for m in 1..=max.min(6) {
        for n in 1..=max.min(6) {
            let alpha = S::root_of_unity(2 * m * n, 1);
            run(
                &mut c,
                MoveKind::AZTemplate(AzCase::Rotated {
                    m,
                    n,
                    alpha,
                    p: Poly::one(),
                }),
            );
        }
    }
    for n in 2..=max {
        for k in 1..n as i64 {
            let alpha = S::root_of_unity(n, k);
            let r = (1..=n).find(|r| !alpha.pow(*r as i64).is_one()).unwrap();
            run(
                &mut c,
                MoveKind::AZTemplate(AzCase::Scaled {
                    alpha: alpha.clone(),
                    r,
                    n,
                    p: Poly::one(),
                    h2: LaurentPoly::from_ints(&[(1, 1), (-1, 1)]).to_ratfunc(),
                }),
            );
            if alpha != S::from_int(-1) {
                run(
                    &mut c,
                    MoveKind::AZTemplate(AzCase::Sheared {
                        m: 1,
                        n,
                        r,
                        alpha,
                        p: Poly::one(),
                    }),
                );
            }
        }
    }
    for _ in 0..randoms {
        let p = small_poly(&mut rng, 3);
        let pr: RatFunc = p.clone().into();
        let n = rng.gen_range(1..=max.min(6));
        let r = loop {
            let r = rng.gen_range(-6i64..=6);
            if r.unsigned_abs().gcd(&(n as u64)) == 1 {
                break r;
            }
        };
        run(
            &mut c,
            MoveKind::MonomialTwist {
                n,
                r,
                q: pr.clone(),
            },
        );
        run(&mut c, MoveKind::QuadraticBridge { p: p.clone() });
        let odd = Poly::from_laurent(
            &p.compose(&Poly::from_ints(&[0, 0, 1])).into_laurent() * &LaurentPoly::x(),
        )
        .unwrap();
        let n2 = rng.gen_range(1..=3u32);
        let gamma = S::root_of_unity(2 * n2, 1);
        run(
            &mut c,
            MoveKind::OddRemainder {
                m: rng.gen_range(1..=3),
                n: n2,
                gamma,
                g: odd,
            },
        );
        let h2: RatFunc = small_poly(&mut rng, 2)
            .compose(&Poly::from_ints(&[0, 1, 1]))
            .into();
        if !h2.is_constant() {
            let alpha = S::root_of_unity(3, 1);
            run(
                &mut c,
                MoveKind::AZTemplate(AzCase::Scaled {
                    alpha,
                    r: 1,
                    n: 3,
                    p: p.clone(),
                    h2,
                }),
            );
        }
        let (m, n) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        run(
            &mut c,
            MoveKind::AZTemplate(AzCase::Rotated {
                m,
                n,
                alpha: S::root_of_unity(2 * m * n, 1),
                p: p.clone(),
            }),
        );
        run(
            &mut c,
            MoveKind::AZTemplate(AzCase::Sheared {
                m,
                n: 4,
                r: 1,
                alpha: S::i(),
                p,
            }),
        );
    }
    c
}

/// Conjugate-Dickson reduction, the `q` conjugation identities and the sporadic certificate.
pub fn identity_suite(max_n: u32, randoms: usize, seed: u64) -> Check {
    let mut c = Check::new("identities");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=max_n {
        for k in 0..n as i64 {
            let z = S::root_of_unity(n, k);
            let ni = n as i64;
            let target = LaurentPoly::from_ints(&[(ni, 1), (-ni, 1)]).to_ratfunc();
            let ok = dickson_conjugate_steps(n, &z)
                .iter()
                .all(|s| compose_all(s) == target);
            c.record(ok, || format!("conjugate reduction n = {n}, k = {k}"));
        }
    }
    for _ in 0..randoms {
        let p = small_poly(&mut rng, 3);
        let (a, b) = q2_sides(&p);
        c.record(a == b, || format!("x q(x^2) identity for p = {p}"));
        let (a, b) = q3_sides(&p);
        c.record(a == b, || format!("x q(x)^2 identity for p = {p}"));
        let big_q = Poly::from_laurent(&small_poly(&mut rng, 2).into_laurent() * &LaurentPoly::x())
            .unwrap();
        match laurent_q_sides(&big_q) {
            Ok((a, b)) => c.record(a == b && a.is_laurent(), || {
                format!("Q(1/(x + 1)) identity for Q = {big_q}")
            }),
            Err(e) => c.record(false, || e.to_string()),
        }
        c.record(!conjugated_q(&p).is_constant() || p.deg() == 0, || {
            format!("q degenerate for p = {p}")
        });
    }
    let cert = sporadic24_certificate();
    let f = compose_all(&cert[0]);
    c.record(cert.iter().all(|s| compose_all(s) == f), || {
        "sporadic certificate".into()
    });
    c
}

/// Dihedral decomposition counts and split verification.
pub fn decompose_suite(ns: &[u32]) -> Check {
    let mut c = Check::new("decompose");
    // maximal chains in the subgroup lattice of the dihedral group of order 2n
    let known = |n: u32| match n {
        2 => Some(3),
        3 => Some(4),
        4 => Some(7),
        6 => Some(19),
        8 => Some(15),
        12 => Some(62),
        _ => None,
    };
    for &n in ns {
        let ni = n as i64;
        let f = LaurentPoly::from_ints(&[(ni, 1), (-ni, 1)]);
        match complete_decompositions(&f, &Limits::default()) {
            Ok(d) => {
                if let Some(k) = known(n) {
                    c.record(d.len() == k, || {
                        format!("x^{n} + x^-{n}: {} chains, expected {k}", d.len())
                    });
                }
                let degs: Vec<Vec<u64>> = d.iter().map(Decomposition::sorted_degrees).collect();
                c.record(degs.windows(2).all(|w| w[0] == w[1]), || {
                    format!("degree multisets differ for n = {n}")
                });
                c.record(d.iter().all(|x| x.composition() == &f.to_ratfunc()), || {
                    format!("composition for n = {n}")
                });
            }
            Err(e) => c.record(false, || format!("n = {n}: {e}")),
        }
        let splits = dihedral_decompositions(n);
        c.record(
            splits
                .iter()
                .all(|s| s.outer.compose(&s.inner) == f.to_ratfunc()),
            || format!("dihedral splits n = {n}"),
        );
    }
    c
}

/// All pairs of complete decompositions of a few dihedral polynomials joined and re-verified.
pub fn chains_suite(ns: &[u32]) -> Check {
    let mut c = Check::new("chains");
    for &n in ns {
        let ni = n as i64;
        let f = LaurentPoly::from_ints(&[(ni, 1), (-ni, 1)]);
        let Ok(decs) = complete_decompositions(&f, &Limits::default()) else {
            c.record(false, || format!("n = {n}: decomposition failed"));
            continue;
        };
        for a in &decs {
            for b in &decs {
                let ok = connect(a, b, &Limits::default())
                    .map(|p| verify_chain(&p))
                    .unwrap_or(false);
                c.record(ok, || format!("connect {a} to {b}"));
            }
        }
    }
    c
}

/// Quick suite, or the full-size one with `deep`.
pub fn run(deep: bool) -> Vec<Check> {
    if deep {
        vec![
            dickson_suite(50, 60, 20, 40, 5, 1),
            dfac_suite(24),
            catalogue_sweep(12, 60, 20, 2),
            identity_suite(8, 20, 3),
            decompose_suite(&[2, 3, 4, 6, 8, 12]),
            chains_suite(&[4, 6, 8]),
        ]
    } else {
        vec![
            dickson_suite(20, 24, 10, 20, 2, 1),
            dfac_suite(12),
            catalogue_sweep(5, 24, 3, 2),
            identity_suite(6, 5, 3),
            decompose_suite(&[2, 3, 4, 6]),
            chains_suite(&[4, 6]),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_passes() {
        for c in run(false) {
            assert!(c.ok(), "{}: {:?}", c.name, c.failed);
        }
    }

    #[test]
    fn random_scalars_cover_the_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let vals: Vec<S> = (0..200).map(|_| small_scalar(&mut rng)).collect();
        assert!(
            vals.contains(&S::i())
                && vals.contains(&S::zero())
                && vals.contains(&S::root_of_unity(3, 1))
        );
        assert!(small_poly(&mut rng, 3).deg() <= 3);
    }
}
