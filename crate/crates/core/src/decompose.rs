//! Splitting Laurent polynomials under composition and enumerating complete decompositions.
//!
//! Every decomposition `f = g ∘ h` of a Laurent polynomial is equivalent, after inserting a
//! degree-one map between the factors, to one of two shapes: `g` a polynomial and `h` Laurent
//! (Type 1), or `g` Laurent and `h = x^n` (Type 2). Right factors are therefore searched among
//! monomials and among Laurent polynomials found by root extraction of the expansions of `f` at
//! infinity and at zero.
//!
//! Chains are stored outermost first. A chain is *canonical* when every factor except the first
//! is in the normal form of [`canonical_right`]; the first factor absorbs the leftover maps.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::cyclofield::{CycloScalar, Rational};
use crate::ratfunc::{Decomposition, LaurentPoly, Mobius, Poly, RatFunc};

type S = CycloScalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecomposeError {
    #[error("input is constant")]
    ConstantInput,
    #[error("composition is not a Laurent polynomial")]
    NotLaurentComposition,
    #[error("no {r}-th root of {value} found in a cyclotomic field")]
    RootUnavailable { value: String, r: u32 },
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

pub type Result<T> = std::result::Result<T, DecomposeError>;

/// Search bounds shared by decomposition enumeration and chain search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_degree: u64,
    pub max_conductor: u32,
    pub max_results: usize,
    pub max_frontier: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_degree: 64,
            max_conductor: 240,
            max_results: 100_000,
            max_frontier: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitKind {
    Type1,
    Type2,
    PolyPoly,
}

/// A verified split `outer ∘ inner = input`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub outer: RatFunc,
    pub inner: RatFunc,
    pub kind: SplitKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Type1,
    Type2,
}

/// `g ∘ h` rewritten as `G ∘ H` with `G = g ∘ mu` and `H = mu^-1 ∘ h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedPair {
    pub mu: Mobius,
    pub g: RatFunc,
    pub h: RatFunc,
    pub kind: PairKind,
}

/// Largest `N` with `f = G(x^N)`.
pub fn monomial_part(f: &LaurentPoly) -> Result<u64> {
    f.monomial_part().ok_or(DecomposeError::ConstantInput)
}

/// Moves the degree-one ambiguity of `g ∘ h` so that the pair becomes Type 1 or Type 2.
pub fn normalize_decomposition(g: &RatFunc, h: &RatFunc) -> Result<NormalizedPair> {
    if g.is_constant() || h.is_constant() {
        return Err(DecomposeError::ConstantInput);
    }
    if !g.compose(h).is_laurent() {
        return Err(DecomposeError::NotLaurentComposition);
    }
    let h0 = h.eval(&S::zero());
    let hinf = h.eval_inf();
    let is_pole = |p: &Option<S>| g.eval_projective(p.as_ref()).is_none();
    let (p0, pinf) = (is_pole(&h0), is_pole(&hinf));
    let two_poles = p0 && pinf && h0 != hinf;
    let mu = if two_poles {
        let h1 = h.eval(&S::one());
        Mobius::from_points(h0.as_ref(), hinf.as_ref(), h1.as_ref())
            .ok_or(DecomposeError::NotLaurentComposition)?
    } else {
        let alpha = if p0 { h0 } else { hinf };
        match alpha {
            None => Mobius::identity(),
            Some(a) => Mobius::new(a, S::one(), S::one(), S::zero()).unwrap(),
        }
    };
    let kind = if two_poles {
        PairKind::Type2
    } else {
        PairKind::Type1
    };
    let big_g = g.compose(&mu.to_ratfunc());
    let big_h = mu.inverse().to_ratfunc().compose(h);
    debug_assert_eq!(big_g.compose(&big_h), g.compose(h));
    Ok(NormalizedPair {
        mu,
        g: big_g,
        h: big_h,
        kind,
    })
}

/// Coefficients `b_0..b_{count-1}` of `A^(1/r)` for a series `A` with `a_0 = 1`.
fn root_series(a: &[S], r: u32, count: usize) -> Vec<S> {
    let mut b = vec![S::one()];
    let r_big = r as i64;
    for k in 1..count {
        let mut acc = S::zero();
        for j in 1..=k.min(a.len() - 1) {
            if a[j].is_zero() {
                continue;
            }
            let w = Rational::new(
                ((r_big + 1) * j as i64 - r_big * k as i64).into(),
                (r_big * k as i64).into(),
            );
            acc = &acc + &(&a[j] * &b[k - j]).scale(&w);
        }
        b.push(acc);
    }
    b
}

/// Finds `g` of degree `r` with `g ∘ h = f`, given `h` monic of top exponent `top`.
fn eliminate_at_infinity(f: &LaurentPoly, h: &LaurentPoly, r: u32, top: i64) -> Option<Poly> {
    let mut powers = vec![LaurentPoly::one(), h.clone()];
    for _ in 2..=r {
        powers.push(powers.last().unwrap() * h);
    }
    let mut rem = f.clone();
    let mut g = vec![S::zero(); r as usize + 1];
    for k in (1..=r as usize).rev() {
        let e = k as i64 * top;
        if rem.max_exp().is_some_and(|m| m > e) {
            return None;
        }
        let c = rem.coeff(e);
        if !c.is_zero() {
            rem = &rem - &powers[k].scale(&c);
        }
        g[k] = c;
    }
    g[0] = rem.constant_term();
    rem = &rem - &LaurentPoly::constant(g[0].clone());
    rem.is_zero().then(|| Poly::from_coeffs(&g))
}

/// Positive-exponent part of a right factor of degree `s = deg f / r` at infinity.
fn top_tail(f: &LaurentPoly, r: u32, s: i64) -> LaurentPoly {
    let d = f.max_exp().unwrap();
    let lc_inv = f.lead().inv().unwrap();
    let a: Vec<S> = (0..s as usize)
        .map(|j| &f.coeff(d - j as i64) * &lc_inv)
        .collect();
    let b = root_series(&a, r, s as usize);
    LaurentPoly::from_terms(b.into_iter().enumerate().map(|(k, c)| (s - k as i64, c)))
}

/// `(g, h)` with `g ∘ h = f`, `deg g = r`, `h` monic with zero constant term.
pub fn poly_split(f: &Poly, r: u32) -> Option<(Poly, Poly)> {
    let n = f.deg();
    if r < 2 || n % r as u64 != 0 || r as u64 >= n {
        return None;
    }
    let s = (n / r as u64) as i64;
    let h = top_tail(f.as_laurent(), r, s);
    let g = eliminate_at_infinity(f.as_laurent(), &h, r, s)?;
    Some((g, Poly::from_laurent(h).unwrap()))
}

/// All `(g, h)` with `g` a polynomial of degree `r`, `h` Laurent with both poles, monic at
/// infinity with zero constant term, and `g ∘ h = f`.
pub fn type1_split(f: &LaurentPoly, r: u32) -> Result<Vec<(Poly, LaurentPoly)>> {
    type1_split_bounded(f, r, u32::MAX)
}

fn type1_split_bounded(
    f: &LaurentPoly,
    r: u32,
    max_conductor: u32,
) -> Result<Vec<(Poly, LaurentPoly)>> {
    let (d0, dinf) = (f.d_zero(), f.d_inf());
    if d0 == 0 || dinf == 0 {
        return Err(DecomposeError::PreconditionViolated(
            "type1_split needs poles at 0 and infinity".into(),
        ));
    }
    if r < 2 || d0 % r as u64 != 0 || dinf % r as u64 != 0 || r as u64 >= d0 + dinf {
        return Err(DecomposeError::PreconditionViolated(format!(
            "bad split degree {r}"
        )));
    }
    let (s0, sinf) = ((d0 / r as u64) as i64, (dinf / r as u64) as i64);
    let top = top_tail(f, r, sinf);
    let ratio = f.trail().checked_div(&f.lead()).unwrap();
    let branches = ratio
        .all_nth_roots(r)
        .ok_or_else(|| DecomposeError::RootUnavailable {
            value: ratio.to_string(),
            r,
        })?;
    let low = -(d0 as i64);
    let t_inv = f.trail().inv().unwrap();
    let a: Vec<S> = (0..s0 as usize)
        .map(|j| &f.coeff(low + j as i64) * &t_inv)
        .collect();
    let b = root_series(&a, r, s0 as usize);
    let mut out: Vec<(Poly, LaurentPoly)> = Vec::new();
    for c in branches {
        if c.conductor() > max_conductor {
            return Err(DecomposeError::LimitExceeded(format!(
                "conductor {} above {}",
                c.conductor(),
                max_conductor
            )));
        }
        let bottom =
            LaurentPoly::from_terms(b.iter().enumerate().map(|(k, v)| (-s0 + k as i64, v * &c)));
        let h = &top + &bottom;
        if let Some(g) = eliminate_at_infinity(f, &h, r, sinf) {
            if !out.iter().any(|(_, h2)| h2 == &h) {
                out.push((g, h));
            }
        }
    }
    out.sort_by_key(|(_, h)| h.canonical_key());
    Ok(out)
}

/// Normal form of a right factor up to composition with a degree-one map on the left.
///
/// Returns `(mu, c)` with `h = mu ∘ c`, where `c` is `x^s` when `h` is a degree-one image of a
/// monomial, and otherwise `h` scaled so that its coefficient at the highest pole (at infinity if
/// present, at zero otherwise) is 1 and shifted to zero constant term.
pub fn canonical_right(h: &LaurentPoly) -> (Mobius, LaurentPoly) {
    assert!(!h.is_constant(), "constant right factor");
    if let Some((c, e)) = h.as_shifted_monomial() {
        let w = h.constant_term();
        let mono = LaurentPoly::monomial(S::one(), e.abs());
        let mu = if e > 0 {
            Mobius::affine(c, w)
        } else {
            Mobius::new(w, c, S::one(), S::zero()).unwrap()
        };
        return (mu, mono);
    }
    let t = if h.d_inf() > 0 { h.lead() } else { h.trail() };
    let w = h.constant_term();
    let c = (h - &LaurentPoly::constant(w.clone())).scale(&t.inv().unwrap());
    (Mobius::affine(t, w), c)
}

/// `(mu, l)` with `t = mu ∘ l` and `l` Laurent, if such a pair exists.
pub fn laurent_representative(t: &RatFunc) -> Option<(Mobius, LaurentPoly)> {
    if let Some(l) = t.as_laurent() {
        return Some((Mobius::identity(), l));
    }
    for w in [t.eval(&S::zero()), t.eval_inf()].into_iter().flatten() {
        let shifted = t - &RatFunc::constant(w.clone());
        if let Some(l) = shifted.inv().ok().and_then(|r| r.as_laurent()) {
            return Some((Mobius::new(w, S::one(), S::one(), S::zero()).unwrap(), l));
        }
    }
    None
}

/// `(mu, c)` with `t = mu ∘ c` and `c` in the normal form of [`canonical_right`].
pub fn right_class(t: &RatFunc) -> Option<(Mobius, LaurentPoly)> {
    let (m1, l) = laurent_representative(t)?;
    if l.is_constant() {
        return None;
    }
    let (m2, c) = canonical_right(&l);
    Some((m1.compose(&m2), c))
}

/// `A` with `A ∘ h = f` for Laurent `f` and `h`, when it exists.
pub fn left_divide(f: &LaurentPoly, h: &LaurentPoly) -> Option<RatFunc> {
    if h.is_constant() {
        return None;
    }
    if f.is_constant() {
        return Some(f.to_ratfunc());
    }
    if let Some((c, e)) = h.as_shifted_monomial() {
        let b = f.divide_exponents(e)?;
        let w = h.constant_term();
        let back = Mobius::affine(c.clone(), w).inverse();
        return Some(b.to_ratfunc().compose(&back.to_ratfunc()));
    }
    if h.d_inf() == 0 {
        return left_divide(&f.invert_var(), &h.invert_var());
    }
    let (n, m) = (f.degree(), h.degree());
    if n % m != 0 || f.d_inf() % h.d_inf() != 0 {
        return None;
    }
    let r = (f.d_inf() / h.d_inf()) as u32;
    let lc = h.lead();
    let monic = h.scale(&lc.inv().unwrap());
    let g = eliminate_at_infinity(f, &monic, r, h.d_inf() as i64)?;
    // g(h / lc) = f, so A = g(x / lc)
    let a = g.as_laurent().scale_var(&lc.inv().unwrap());
    Some(a.to_ratfunc())
}

/// `A` with `A ∘ h = f`, required to be Laurent.
pub fn left_divide_laurent(f: &LaurentPoly, h: &LaurentPoly) -> Option<LaurentPoly> {
    left_divide(f, h)?.as_laurent()
}

/// A chain in canonical form together with the maps relating it to the chain it came from:
/// the original `i`-th factor is `maps[i] ∘ factors[i] ∘ maps[i+1]^-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalChain {
    pub factors: Vec<LaurentPoly>,
    pub maps: Vec<Mobius>,
}

impl CanonicalChain {
    pub fn key(&self) -> String {
        chain_key(&self.factors)
    }
}

pub fn chain_key(factors: &[LaurentPoly]) -> String {
    factors
        .iter()
        .map(|f| f.canonical_key())
        .collect::<Vec<_>>()
        .join("||")
}

/// Pushes all degree-one ambiguity of a factor list to the left.
pub fn canonicalize_chain(factors: &[RatFunc]) -> Result<CanonicalChain> {
    let k = factors.len();
    if k == 0 {
        return Err(DecomposeError::PreconditionViolated("empty chain".into()));
    }
    let mut maps = vec![Mobius::identity(); k + 1];
    let mut canon = vec![LaurentPoly::zero(); k];
    for i in (1..k).rev() {
        let y = factors[i].compose(&maps[i + 1].to_ratfunc());
        let (mu, c) = right_class(&y).ok_or(DecomposeError::NotLaurentComposition)?;
        canon[i] = c;
        maps[i] = mu;
    }
    let y0 = factors[0].compose(&maps[1].to_ratfunc());
    canon[0] = y0
        .as_laurent()
        .ok_or(DecomposeError::NotLaurentComposition)?;
    Ok(CanonicalChain {
        factors: canon,
        maps,
    })
}

/// Canonical proper right factors `(outer, inner)` with `outer ∘ inner = f`, sorted by inner degree.
pub type RightFactors = Vec<(LaurentPoly, LaurentPoly)>;

/// Memoizing engine for right factors, indecomposability and complete decompositions.
#[derive(Debug, Default)]
pub struct Decomposer {
    limits: Limits,
    rights: HashMap<String, Arc<RightFactors>>,
    chains: HashMap<String, Arc<Vec<Vec<LaurentPoly>>>>,
}

impl Decomposer {
    pub fn new(limits: Limits) -> Self {
        Decomposer {
            limits,
            ..Default::default()
        }
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    fn check_degree(&self, f: &LaurentPoly) -> Result<()> {
        if f.degree() > self.limits.max_degree {
            return Err(DecomposeError::LimitExceeded(format!(
                "degree {} above {}",
                f.degree(),
                self.limits.max_degree
            )));
        }
        Ok(())
    }

    /// All proper right factors in canonical form.
    pub fn right_factors(&mut self, f: &LaurentPoly) -> Result<Arc<RightFactors>> {
        if f.is_constant() {
            return Err(DecomposeError::ConstantInput);
        }
        self.check_degree(f)?;
        let key = f.canonical_key();
        if let Some(r) = self.rights.get(&key) {
            return Ok(r.clone());
        }
        let res = Arc::new(self.compute_right_factors(f)?);
        self.rights.insert(key, res.clone());
        Ok(res)
    }

    fn compute_right_factors(&self, f: &LaurentPoly) -> Result<RightFactors> {
        let n = f.degree();
        let mut found: BTreeMap<(u64, String), (LaurentPoly, LaurentPoly)> = BTreeMap::new();
        let mut add = |outer: RatFunc, inner: LaurentPoly| {
            let (nu, c) = canonical_right(&inner);
            let outer = outer
                .compose(&nu.to_ratfunc())
                .as_laurent()
                .expect("Laurent outer factor");
            found
                .entry((c.degree(), c.canonical_key()))
                .or_insert((outer, c));
        };
        let m = f.monomial_part().unwrap();
        for s in 2..=m {
            if m % s == 0 && s < n {
                let outer = f.divide_exponents(s as i64).unwrap();
                add(
                    outer.to_ratfunc(),
                    LaurentPoly::monomial(S::one(), s as i64),
                );
            }
        }
        let (d0, dinf) = (f.d_zero(), f.d_inf());
        if d0 == 0 || dinf == 0 {
            let flip = d0 > 0;
            let p = Poly::from_laurent(if flip { f.invert_var() } else { f.clone() }).unwrap();
            for r in 2..n {
                if n % r != 0 {
                    continue;
                }
                if let Some((g, h)) = poly_split(&p, r as u32) {
                    let h = if flip {
                        h.into_laurent().invert_var()
                    } else {
                        h.into_laurent()
                    };
                    add(g.into(), h);
                }
            }
        } else {
            let g = d0.gcd(&dinf);
            for r in 2..=g {
                if g % r != 0 {
                    continue;
                }
                for (outer, h) in type1_split_bounded(f, r as u32, self.limits.max_conductor)? {
                    add(outer.into(), h);
                }
            }
        }
        Ok(found.into_values().collect())
    }

    pub fn is_indecomposable(&mut self, f: &LaurentPoly) -> Result<bool> {
        let n = f.degree();
        if n < 2 {
            return Err(DecomposeError::PreconditionViolated(
                "degree below 2".into(),
            ));
        }
        if is_prime(n) {
            return Ok(true);
        }
        Ok(self.right_factors(f)?.is_empty())
    }

    /// Right factors that are themselves indecomposable.
    pub fn minimal_right_factors(&mut self, f: &LaurentPoly) -> Result<RightFactors> {
        let all = self.right_factors(f)?;
        let mut out = Vec::new();
        for (g, h) in all.iter() {
            if self.is_indecomposable(h)? {
                out.push((g.clone(), h.clone()));
            }
        }
        Ok(out)
    }

    /// All canonical complete decompositions of `f`, outermost factor first.
    pub fn chains(&mut self, f: &LaurentPoly) -> Result<Arc<Vec<Vec<LaurentPoly>>>> {
        if f.degree() < 2 {
            return Err(DecomposeError::PreconditionViolated(
                "degree below 2".into(),
            ));
        }
        self.check_degree(f)?;
        let key = f.canonical_key();
        if let Some(c) = self.chains.get(&key) {
            return Ok(c.clone());
        }
        let mut out: Vec<Vec<LaurentPoly>> = Vec::new();
        for (g, h) in self.minimal_right_factors(f)? {
            for chain in self.chains(&g)?.iter() {
                let mut c = chain.clone();
                c.push(h.clone());
                out.push(c);
                if out.len() > self.limits.max_results {
                    return Err(DecomposeError::LimitExceeded(format!(
                        "more than {} decompositions",
                        self.limits.max_results
                    )));
                }
            }
        }
        if out.is_empty() {
            out.push(vec![f.clone()]);
        }
        out.sort_by_cached_key(|c| chain_key(c));
        let res = Arc::new(out);
        self.chains.insert(key, res.clone());
        Ok(res)
    }

    /// Complete decompositions as [`Decomposition`] values.
    pub fn complete_decompositions(&mut self, f: &LaurentPoly) -> Result<Vec<Decomposition>> {
        Ok(self
            .chains(f)?
            .iter()
            .map(|c| chain_to_decomposition(c))
            .collect())
    }

    /// Checks that a factor list composes to a Laurent polynomial through indecomposable factors.
    pub fn certify(&mut self, factors: Vec<RatFunc>) -> Result<Decomposition> {
        let canon = canonicalize_chain(&factors)?;
        for c in &canon.factors {
            if c.degree() < 2 || !self.is_indecomposable(c)? {
                return Ok(Decomposition::new(factors));
            }
        }
        Ok(Decomposition::with_flag(factors, true))
    }
}

pub(crate) fn chain_to_decomposition(c: &[LaurentPoly]) -> Decomposition {
    Decomposition::with_flag(c.iter().map(|f| f.to_ratfunc()).collect(), true)
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

pub fn is_indecomposable(f: &LaurentPoly) -> Result<bool> {
    Decomposer::new(Limits::default()).is_indecomposable(f)
}

/// All complete decompositions of `f` up to the canonical equivalence.
pub fn complete_decompositions(f: &LaurentPoly, limits: &Limits) -> Result<Vec<Decomposition>> {
    Decomposer::new(limits.clone()).complete_decompositions(f)
}

/// One representative split per equivalence class for `x^n + x^-n`.
pub fn dihedral_decompositions(n: u32) -> Vec<SplitResult> {
    assert!(n >= 1);
    let ni = n as i64;
    let f = LaurentPoly::from_ints(&[(ni, 1), (-ni, 1)]).to_ratfunc();
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        let di = d as i64;
        if d > 1 {
            let outer = LaurentPoly::from_ints(&[(ni / di, 1), (-ni / di, 1)]).to_ratfunc();
            out.push(SplitResult {
                outer,
                inner: LaurentPoly::from_ints(&[(di, 1)]).to_ratfunc(),
                kind: SplitKind::Type2,
            });
        }
        if d < n {
            for j in 0..(n / d) as i64 {
                let beta = S::root_of_unity(2 * n, j);
                let sign = if j % 2 == 0 {
                    S::one()
                } else {
                    S::from_int(-1)
                };
                let outer = RatFunc::from(crate::dickson::dickson1(n / d)).scale(&sign);
                let bd = beta.pow(di);
                let inner =
                    LaurentPoly::from_terms([(di, bd.inv().unwrap()), (-di, bd)]).to_ratfunc();
                out.push(SplitResult {
                    outer,
                    inner,
                    kind: SplitKind::Type1,
                });
            }
        }
    }
    for s in &out {
        assert_eq!(
            s.outer.compose(&s.inner),
            f,
            "dihedral split failed to verify"
        );
    }
    out
}

impl fmt::Display for SplitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) @ ({})", self.outer, self.inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dickson::dickson1;
    use proptest::prelude::*;

    fn lp(t: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_ints(t)
    }

    fn dn(n: u32) -> LaurentPoly {
        dickson1(n).into_laurent()
    }

    #[test]
    fn monomial_parts() {
        assert_eq!(monomial_part(&lp(&[(6, 1), (-6, 1)])), Ok(6));
        assert_eq!(monomial_part(&lp(&[(3, 1), (1, -3)])), Ok(1));
        assert_eq!(monomial_part(&lp(&[(4, 1), (0, 2), (-2, 1)])), Ok(2));
        assert_eq!(
            monomial_part(&lp(&[(0, 5)])),
            Err(DecomposeError::ConstantInput)
        );
    }

    #[test]
    fn normalization_examples() {
        let inv = Mobius::inversion().to_ratfunc();
        let p = normalize_decomposition(&inv, &inv).unwrap();
        assert_eq!(
            (p.kind, p.g.clone(), p.h.clone()),
            (PairKind::Type1, RatFunc::x(), RatFunc::x())
        );
        assert_eq!(p.mu, Mobius::inversion());

        let g = &RatFunc::x() + &RatFunc::new(Poly::one(), Poly::from_ints(&[-1, 1])).unwrap();
        let h = Poly::from_ints(&[1, 1]).into();
        let p = normalize_decomposition(&g, &h).unwrap();
        assert_eq!(p.kind, PairKind::Type2);
        assert_eq!(p.mu, Mobius::affine(S::one(), S::one()));
        assert_eq!(p.g, lp(&[(1, 1), (0, 1), (-1, 1)]).to_ratfunc());
        assert_eq!(p.h, RatFunc::x());

        let p =
            normalize_decomposition(&lp(&[(1, 1), (-1, 1)]).into(), &lp(&[(2, 1)]).into()).unwrap();
        assert_eq!(p.kind, PairKind::Type2);
        assert!(p.mu.is_identity());
    }

    #[test]
    fn poly_split_examples() {
        let f = Poly::from_ints(&[0, 0, 2, 0, 1]);
        assert_eq!(
            poly_split(&f, 2),
            Some((Poly::from_ints(&[0, 2, 1]), Poly::from_ints(&[0, 0, 1])))
        );
        let x6 = Poly::from_ints(&[0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(
            poly_split(&x6, 2),
            Some((Poly::from_ints(&[0, 0, 1]), Poly::from_ints(&[0, 0, 0, 1])))
        );
        assert_eq!(poly_split(&Poly::from_ints(&[1, 1, 0, 0, 1]), 2), None);
    }

    #[test]
    fn type1_examples() {
        let got = type1_split(&lp(&[(2, 1), (-2, 1)]), 2).unwrap();
        // both branches of the bottom root verify: x^2 + x^-2 = (x - 1/x)^2 + 2 as well
        assert_eq!(got.len(), 2);
        assert!(got.contains(&(dickson1(2), lp(&[(1, 1), (-1, 1)]))));
        assert!(got.contains(&(Poly::from_ints(&[2, 0, 1]), lp(&[(1, 1), (-1, -1)]))));
        let got = type1_split(&lp(&[(6, 1), (-6, 1)]), 3).unwrap();
        assert!(got.contains(&(dickson1(3), lp(&[(2, 1), (-2, 1)]))));
        assert!(type1_split(&lp(&[(2, 1), (-4, 1)]), 2).unwrap().is_empty());
    }

    #[test]
    fn indecomposability() {
        assert!(is_indecomposable(&lp(&[(3, 1), (-1, 1)])).unwrap());
        assert!(!is_indecomposable(&lp(&[(2, 1), (-2, 1)])).unwrap());
        assert!(is_indecomposable(&dn(5)).unwrap());
        assert!(!is_indecomposable(&dn(4)).unwrap());
    }

    #[test]
    fn small_chain_counts() {
        let lim = Limits::default();
        assert_eq!(
            complete_decompositions(&lp(&[(4, 1), (-4, 1)]), &lim)
                .unwrap()
                .len(),
            7
        );
        let x4 = complete_decompositions(&lp(&[(4, 1)]), &lim).unwrap();
        assert_eq!(x4.len(), 1);
        assert_eq!(x4[0].degrees(), vec![2, 2]);
        let d6 = complete_decompositions(&dn(6), &lim).unwrap();
        let mut degs: Vec<_> = d6.iter().map(|d| d.degrees()).collect();
        degs.sort();
        assert_eq!(degs, vec![vec![2, 3], vec![3, 2]]);
        for d in &d6 {
            assert_eq!(d.composition(), &dn(6).to_ratfunc());
            assert!(d.is_complete());
        }
    }

    #[test]
    fn dihedral_classes_match_right_factors() {
        for n in [1u32, 2, 3, 4, 6] {
            let f = lp(&[(n as i64, 1), (-(n as i64), 1)]);
            let splits = dihedral_decompositions(n);
            let mut a: Vec<String> = splits
                .iter()
                .map(|s| {
                    canonical_right(&s.inner.as_laurent().unwrap())
                        .1
                        .canonical_key()
                })
                .collect();
            a.sort();
            a.dedup();
            assert_eq!(a.len(), splits.len());
            let mut b: Vec<String> = Decomposer::default()
                .right_factors(&f)
                .unwrap()
                .iter()
                .map(|(_, h)| h.canonical_key())
                .collect();
            b.sort();
            assert_eq!(a, b, "n = {n}");
        }
        assert_eq!(dihedral_decompositions(2).len(), 3);
    }

    #[test]
    fn canonical_chain_round_trip() {
        // x^2 ∘ (x + 1) ∘ (x^2 + 1/x^2), disguised by degree-one maps
        let mu = Mobius::new(S::one(), S::from_int(2), S::one(), S::from_int(-1)).unwrap();
        let a = lp(&[(2, 1)]).to_ratfunc().compose(&mu.to_ratfunc());
        let b = mu
            .inverse()
            .to_ratfunc()
            .compose(&lp(&[(2, 1), (-2, 1)]).to_ratfunc());
        let f = a.compose(&b);
        let canon = canonicalize_chain(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(canon.factors[1], lp(&[(2, 1), (-2, 1)]));
        let back = canon.factors[0]
            .compose(&canon.factors[1])
            .unwrap()
            .to_ratfunc();
        assert_eq!(back, f);
        for (i, x) in [a, b].iter().enumerate() {
            let rebuilt = canon.maps[i]
                .to_ratfunc()
                .compose(&canon.factors[i].to_ratfunc())
                .compose(&canon.maps[i + 1].inverse().to_ratfunc());
            assert_eq!(&rebuilt, x);
        }
    }

    #[test]
    fn left_division() {
        let f = lp(&[(6, 1), (-6, 1)]);
        let a = left_divide_laurent(&f, &lp(&[(2, 1), (-2, 1)])).unwrap();
        assert_eq!(a, dn(3));
        let a = left_divide_laurent(&f, &lp(&[(3, 1)])).unwrap();
        assert_eq!(a, lp(&[(2, 1), (-2, 1)]));
        assert!(left_divide(&f, &lp(&[(4, 1)])).is_none());
        let h = lp(&[(1, 1), (-2, 3)]);
        let g = Poly::from_ints(&[1, 2, 0, 1]);
        let f = g.as_laurent().compose(&h).unwrap();
        assert_eq!(left_divide_laurent(&f, &h).unwrap(), g.into_laurent());
    }

    fn small_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        (
            prop::collection::vec(-2i64..=2, 1..=max_deg),
            prop::sample::select(vec![1i64, -1, 2]),
        )
            .prop_map(|(mut c, lead)| {
                c.push(lead);
                Poly::from_ints(&c)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn poly_split_recovers_equivalent_pair(g in small_poly(3), h in small_poly(3)) {
            prop_assume!(g.deg() >= 2 && h.deg() >= 2);
            let f = g.compose(&h);
            let (g2, h2) = poly_split(&f, g.deg() as u32).unwrap();
            prop_assert_eq!(g2.compose(&h2), f);
            // h2 is h made monic with zero constant term
            let c = h.lead();
            let shifted = &h - &Poly::constant(h.coeff(0));
            prop_assert_eq!(h2, shifted.scale(&c.inv().unwrap()));
        }

        #[test]
        fn chains_share_degree_multiset(g in small_poly(2), k in 1i64..3) {
            prop_assume!(g.deg() >= 2);
            let inner = lp(&[(k, 1), (-k, 1)]);
            let f = g.as_laurent().compose(&inner).unwrap();
            let decs = complete_decompositions(&f, &Limits::default()).unwrap();
            let first = decs[0].sorted_degrees();
            for d in &decs {
                prop_assert_eq!(d.sorted_degrees(), first.clone());
                prop_assert_eq!(d.composition(), &f.to_ratfunc());
            }
        }
    }
}
