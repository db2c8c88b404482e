//! Exact arithmetic in cyclotomic fields `Q(zeta_N)`.
//!
//! A [`CycloScalar`] stores its conductor `N` together with `phi(N)` rational
//! coordinates in the power basis `1, zeta_N, ..., zeta_N^(phi(N)-1)`, reduced
//! modulo the cyclotomic polynomial `Phi_N`. Binary operations embed both
//! operands into the lcm of their conductors. Results that turn out to be
//! rational drop back to conductor 1; no other conductor shrinking happens
//! unless [`CycloScalar::minimize`] is called.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
}

struct FieldData {
    phi: usize,
    cyclo: Vec<i64>,
    /// `powers[k]` is `zeta^k` written in the power basis, as sparse integer coordinates.
    powers: Vec<Vec<(usize, i64)>>,
}

fn field_cache() -> &'static RwLock<HashMap<u32, Arc<FieldData>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<FieldData>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn field(n: u32) -> Arc<FieldData> {
    if let Some(f) = field_cache().read().unwrap().get(&n) {
        return f.clone();
    }
    let cyclo = cyclotomic_poly(n);
    let phi = cyclo.len() - 1;
    let mut powers = Vec::with_capacity(n as usize);
    let mut cur = vec![0i64; phi + 1];
    cur[0] = 1;
    for _ in 0..n {
        powers.push(
            cur[..phi]
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(i, c)| (i, *c))
                .collect(),
        );
        // multiply by zeta and reduce by the monic Phi_N
        cur.rotate_right(1);
        let carry = cur[phi];
        if carry != 0 {
            for i in 0..=phi {
                cur[i] -= carry * cyclo[i];
            }
        }
    }
    let data = Arc::new(FieldData { phi, cyclo, powers });
    field_cache()
        .write()
        .unwrap()
        .entry(n)
        .or_insert(data)
        .clone()
}

/// Integer coefficients of `Phi_n`, lowest degree first.
pub fn cyclotomic_poly(n: u32) -> Vec<i64> {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let div = cyclotomic_poly_cached(d);
            num = exact_div_monic(&num, &div);
        }
    }
    num
}

fn cyclotomic_poly_cached(n: u32) -> Vec<i64> {
    if let Some(f) = field_cache().read().unwrap().get(&n) {
        return f.cyclo.clone();
    }
    field(n).cyclo.clone()
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = num.len() - 1 - dd;
    let mut q = vec![0i64; qd + 1];
    for k in (0..=qd).rev() {
        let c = rem[k + dd];
        q[k] = c;
        if c != 0 {
            for (j, dj) in den.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|c| *c == 0));
    q
}

pub fn euler_phi(n: u32) -> u32 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn lcm(a: u32, b: u32) -> u32 {
    a / a.gcd(&b) * b
}

fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Accumulates `sum c_e zeta_n^e` for arbitrary nonnegative exponents `e`.
fn reduce_dense(n: u32, dense: &[Rational]) -> Vec<Rational> {
    let f = field(n);
    let mut out = vec![Rational::zero(); f.phi];
    for (e, c) in dense.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = e % n as usize;
        if e < f.phi {
            out[e] += c;
        } else {
            for (j, t) in &f.powers[e] {
                out[*j] += c * Rational::from_integer(BigInt::from(*t));
            }
        }
    }
    out
}

/// An exact element of `Q(zeta_N)`.
#[derive(Clone, Debug)]
pub struct CycloScalar {
    conductor: u32,
    coeffs: Vec<Rational>,
}

impl CycloScalar {
    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(v)))
    }

    pub fn from_frac(p: i64, q: i64) -> Self {
        Self::from_rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_rational(q: Rational) -> Self {
        CycloScalar {
            conductor: 1,
            coeffs: vec![q],
        }
    }

    /// Builds `sum coeffs[k] * zeta_n^k` for any number of coefficients.
    pub fn from_power_coeffs(n: u32, coeffs: &[Rational]) -> Self {
        assert!(n >= 1);
        let mut s = CycloScalar {
            conductor: n,
            coeffs: reduce_dense(n, coeffs),
        };
        s.collapse();
        s
    }

    /// `zeta_n^k`. The conductor of the result divides `n`.
    pub fn root_of_unity(n: u32, k: i64) -> Self {
        assert!(n >= 1, "root of unity of order 0");
        let k = k.rem_euclid(n as i64) as u32;
        let g = if k == 0 { n } else { k.gcd(&n) };
        let (mut n, mut k) = (n / g, k / g);
        let mut negate = false;
        if n % 4 == 2 {
            // zeta_{2M} = -zeta_M^((M+1)/2) for odd M
            let m = n / 2;
            negate = k % 2 == 1;
            k = ((k as u64 * ((m as u64 + 1) / 2)) % m as u64) as u32;
            n = m;
        }
        let mut dense = vec![Rational::zero(); k as usize + 1];
        dense[k as usize] = Rational::one();
        let s = Self::from_power_coeffs(n, &dense);
        if negate {
            -s
        } else {
            s
        }
    }

    /// The imaginary unit `zeta_4`.
    pub fn i() -> Self {
        Self::root_of_unity(4, 1)
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.conductor == 1 {
            Some(&self.coeffs[0])
        } else if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational()
            .filter(|q| q.is_integer())
            .map(|q| q.to_integer())
    }

    fn collapse(&mut self) {
        if self.conductor > 1 && self.coeffs[1..].iter().all(|c| c.is_zero()) {
            self.coeffs.truncate(1);
            self.conductor = 1;
        }
    }

    /// Re-expresses `self` in conductor `m`, which must be a multiple of the current one.
    pub fn embed(&self, m: u32) -> Self {
        assert!(
            m % self.conductor == 0,
            "conductor {m} is not a multiple of {}",
            self.conductor
        );
        if m == self.conductor {
            return self.clone();
        }
        let step = (m / self.conductor) as usize;
        let mut dense = vec![Rational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            dense[k * step] = c.clone();
        }
        CycloScalar {
            conductor: m,
            coeffs: reduce_dense(m, &dense),
        }
    }

    fn align(&self, other: &Self) -> (Self, Self) {
        let m = lcm(self.conductor, other.conductor);
        (self.embed(m), other.embed(m))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let mut s = if self.conductor == other.conductor {
            CycloScalar {
                conductor: self.conductor,
                coeffs: self
                    .coeffs
                    .iter()
                    .zip(&other.coeffs)
                    .map(|(a, b)| f(a, b))
                    .collect(),
            }
        } else if other.conductor == 1 {
            let mut coeffs = self.coeffs.clone();
            coeffs[0] = f(&self.coeffs[0], &other.coeffs[0]);
            for c in coeffs.iter_mut().skip(1) {
                *c = f(c, &Rational::zero());
            }
            CycloScalar {
                conductor: self.conductor,
                coeffs,
            }
        } else {
            let (a, b) = self.align(other);
            return a.zip_with(&b, f);
        };
        s.collapse();
        s
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        CycloScalar {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        if other.conductor == 1 {
            return self.scale(&other.coeffs[0]);
        }
        if self.conductor == 1 {
            return other.scale(&self.coeffs[0]);
        }
        if self.conductor != other.conductor {
            let (a, b) = self.align(other);
            return a.mul_ref(&b);
        }
        let n = self.conductor;
        let phi = self.coeffs.len();
        let mut dense = vec![Rational::zero(); 2 * phi - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    dense[i + j] += a * b;
                }
            }
        }
        let mut s = CycloScalar {
            conductor: n,
            coeffs: reduce_dense(n, &dense),
        };
        s.collapse();
        s
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(Self::from_rational(q.recip()));
        }
        let f = field(self.conductor);
        let modulus: Vec<Rational> = f
            .cyclo
            .iter()
            .map(|c| Rational::from_integer(BigInt::from(*c)))
            .collect();
        let inv = qpoly_inverse_mod(&self.coeffs, &modulus);
        let mut s = CycloScalar {
            conductor: self.conductor,
            coeffs: inv,
        };
        s.collapse();
        Ok(s)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Self {
        if e < 0 {
            return self.inv().expect("negative power of zero").pow(-e);
        }
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Applies the automorphism `zeta_N -> zeta_N^a`, `a` coprime to the conductor.
    pub fn galois(&self, a: i64) -> Self {
        let n = self.conductor;
        let a = a.rem_euclid(n as i64) as usize;
        let mut dense = vec![Rational::zero(); n as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                dense[(a * k) % n as usize] += c;
            }
        }
        let mut s = CycloScalar {
            conductor: n,
            coeffs: reduce_dense(n, &dense),
        };
        s.collapse();
        s
    }

    /// Complex conjugation under any embedding.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// The same element written in the smallest conductor that contains it.
    /// Conductors congruent to 2 mod 4 are never chosen since `Q(zeta_2M) = Q(zeta_M)` for odd `M`.
    pub fn minimize(&self) -> Self {
        let n = self.conductor;
        if n == 1 {
            return self.clone();
        }
        for m in divisors(n) {
            if m == n || m % 4 == 2 {
                continue;
            }
            let fixed = (2..n as i64).all(|a| {
                (a as u32).gcd(&n) != 1 || (a as u32) % m != 1 % m || self.galois(a) == *self
            });
            if !fixed {
                continue;
            }
            let phi_m = euler_phi(m) as usize;
            let columns: Vec<Vec<Rational>> = (0..phi_m)
                .map(|j| Self::root_of_unity(m, j as i64).embed(n).coeffs)
                .collect();
            let rows: Vec<Vec<Rational>> = (0..self.coeffs.len())
                .map(|i| columns.iter().map(|c| c[i].clone()).collect())
                .collect();
            if let Some(sol) = solve_linear(rows, self.coeffs.clone()) {
                let mut s = CycloScalar {
                    conductor: m,
                    coeffs: sol,
                };
                s.collapse();
                return s;
            }
        }
        self.clone()
    }

    /// A string that is equal for equal elements regardless of conductor.
    pub fn canonical_key(&self) -> String {
        let m = self.minimize();
        let mut s = format!("{}:", m.conductor);
        for c in &m.coeffs {
            s.push_str(&c.to_string());
            s.push(',');
        }
        s
    }

    /// Writes `self = q * zeta_M^k` with `q > 0` rational if possible.
    pub fn as_rational_times_root_of_unity(&self) -> Option<(Rational, u32, u32)> {
        if self.is_zero() {
            return None;
        }
        let m = lcm(2, self.conductor);
        for k in 0..m {
            let b = self * &Self::root_of_unity(m, -(k as i64));
            if let Some(q) = b.as_rational() {
                if q.is_positive() {
                    return Some((q.clone(), m, k));
                }
            }
        }
        None
    }

    /// Multiplicative order if `self` is a root of unity.
    pub fn root_of_unity_order(&self) -> Option<u32> {
        let (q, m, k) = self.as_rational_times_root_of_unity()?;
        if !q.is_one() {
            return None;
        }
        Some(if k == 0 { 1 } else { m / k.gcd(&m) })
    }

    /// The square root of a nonzero integer.
    ///
    /// For `d > 0` the root is the one that is positive under `zeta_M -> exp(2 pi i / M)`;
    /// it is assembled from quadratic Gauss sums, whose signs are known exactly.
    /// For `d < 0` the result is `sqrt_integer(|d|) * zeta_4`.
    pub fn sqrt_integer(d: i64) -> Self {
        assert!(d != 0, "square root of zero requested through sqrt_integer");
        if d < 0 {
            return &Self::sqrt_integer(-d) * &Self::i();
        }
        let mut rest = d as u64;
        let mut square = 1i64;
        let mut result = Self::one();
        let mut p = 2u64;
        while p * p <= rest {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            square *= (p as i64).pow(e / 2);
            if e % 2 == 1 {
                result = &result * &sqrt_prime(p);
            }
            p += 1;
        }
        if rest > 1 {
            result = &result * &sqrt_prime(rest);
        }
        result.scale(&Rational::from_integer(BigInt::from(square)))
    }

    /// Some `r` with `r^n = self`, chosen deterministically, or `None`.
    ///
    /// When `self = q * zeta_M^k` with `q > 0` rational the principal root
    /// `q^(1/n) * zeta_(Mn)^k` is returned (it has the smallest argument in
    /// `[0, 2 pi)`); `q^(1/n)` must be rational or the square root of a rational.
    /// Otherwise small powers `self^j` are tried in the same way and the first
    /// candidate (in a fixed order) whose `n`-th power is `self` wins.
    pub fn try_nth_root(&self, n: u32) -> Option<Self> {
        assert!(n >= 1);
        if n == 1 || self.is_zero() {
            return Some(self.clone());
        }
        if let Some((q, m, k)) = self.as_rational_times_root_of_unity() {
            let base = positive_rational_root(&q, n)?;
            return Some(&base * &Self::root_of_unity(m * n, k as i64));
        }
        for j in 2..=4u32 {
            let pw = self.pow(j as i64);
            if let Some((q, m, k)) = pw.as_rational_times_root_of_unity() {
                let nj = n * j;
                let Some(base) = positive_rational_root(&q, nj) else {
                    continue;
                };
                let rho0 = &base * &Self::root_of_unity(m * nj, k as i64);
                for l in 0..nj {
                    let cand = &rho0 * &Self::root_of_unity(nj, l as i64);
                    if cand.pow(n as i64) == *self {
                        return Some(cand);
                    }
                }
            }
        }
        None
    }

    /// All `n` roots `r` with `r^n = self`, principal root first.
    pub fn all_nth_roots(&self, n: u32) -> Option<Vec<Self>> {
        let r0 = self.try_nth_root(n)?;
        Some(
            (0..n)
                .map(|l| &r0 * &Self::root_of_unity(n, l as i64))
                .collect(),
        )
    }

    fn fmt_rational(q: &Rational) -> String {
        if q.is_integer() {
            q.to_integer().to_string()
        } else {
            format!("{}/{}", q.numer(), q.denom())
        }
    }

    /// Parses `"p"` or `"p/q"`.
    pub fn parse_rational(s: &str) -> Option<Rational> {
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().ok()?;
                let q: BigInt = q.trim().parse().ok()?;
                if q.is_zero() {
                    return None;
                }
                Some(Rational::new(p, q))
            }
            None => Some(Rational::from_integer(s.parse().ok()?)),
        }
    }

    /// True when printing needs no surrounding parentheses inside a product.
    pub fn is_atomic(&self) -> bool {
        match self.as_rational() {
            Some(q) => q.is_integer() && !q.is_negative(),
            None => false,
        }
    }
}

fn sqrt_prime(p: u64) -> CycloScalar {
    if p == 2 {
        return &CycloScalar::root_of_unity(8, 1) + &CycloScalar::root_of_unity(8, -1);
    }
    let mut dense = vec![Rational::zero(); p as usize];
    for a in 1..p {
        let leg = legendre(a, p);
        dense[a as usize] = Rational::from_integer(BigInt::from(leg));
    }
    let gauss = CycloScalar::from_power_coeffs(p as u32, &dense);
    if p % 4 == 1 {
        gauss
    } else {
        -(&gauss * &CycloScalar::i())
    }
}

fn legendre(a: u64, p: u64) -> i64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if result == 1 {
        1
    } else {
        -1
    }
}

fn exact_root(v: &BigInt, n: u32) -> Option<BigInt> {
    let r = v.nth_root(n);
    if r.pow(n) == *v {
        Some(r)
    } else {
        None
    }
}

/// Positive real `q^(1/n)` for rational `q > 0`, when it lies in a cyclotomic field.
fn positive_rational_root(q: &Rational, n: u32) -> Option<CycloScalar> {
    if let (Some(a), Some(b)) = (exact_root(q.numer(), n), exact_root(q.denom(), n)) {
        return Some(CycloScalar::from_rational(Rational::new(a, b)));
    }
    if n % 2 == 0 {
        let (a, b) = (exact_root(q.numer(), n / 2)?, exact_root(q.denom(), n / 2)?);
        // sqrt(a/b) = sqrt(a*b)/b
        let ab = (&a * &b).to_i64()?;
        let s = CycloScalar::sqrt_integer(ab);
        return Some(s.scale(&Rational::new(BigInt::one(), b)));
    }
    None
}

fn qpoly_trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn qpoly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    qpoly_trim(&mut r);
    let mut b = b.to_vec();
    qpoly_trim(&mut b);
    let db = b.len() - 1;
    let lb = b[db].clone();
    if r.len() < b.len() {
        return (vec![Rational::zero()], r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] / &lb;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[k + j] -= &c * bj;
            }
        }
        q[k] = c;
    }
    r.truncate(db.max(1));
    qpoly_trim(&mut r);
    (q, r)
}

fn qpoly_sub_mul(a: &[Rational], q: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len().max(q.len() + b.len() - 1)];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, qi) in q.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] -= qi * bj;
        }
    }
    qpoly_trim(&mut out);
    out
}

fn qpoly_inverse_mod(a: &[Rational], m: &[Rational]) -> Vec<Rational> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    qpoly_trim(&mut r1);
    let (mut s0, mut s1) = (vec![Rational::zero()], vec![Rational::one()]);
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = qpoly_divrem(&r0, &r1);
        let s = qpoly_sub_mul(&s0, &q, &s1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    assert!(
        r0.len() == 1,
        "element is not invertible modulo the cyclotomic polynomial"
    );
    let c = r0[0].recip();
    let (_, rem) = qpoly_divrem(&s0, m);
    let phi = m.len() - 1;
    let mut out: Vec<Rational> = rem.into_iter().map(|x| x * &c).collect();
    out.resize(phi, Rational::zero());
    out
}

/// Solves `rows * y = rhs` exactly; `None` if inconsistent. Free variables are set to zero.
pub(crate) fn solve_linear(
    mut rows: Vec<Vec<Rational>>,
    mut rhs: Vec<Rational>,
) -> Option<Vec<Rational>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(row, p);
        rhs.swap(row, p);
        let inv = rows[row][col].recip();
        for c in col..ncols {
            rows[row][c] = &rows[row][c] * &inv;
        }
        rhs[row] = &rhs[row] * &inv;
        for r in 0..rows.len() {
            if r != row && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in col..ncols {
                    let t = &rows[row][c] * &f;
                    rows[r][c] -= t;
                }
                let t = &rhs[row] * &f;
                rhs[r] -= t;
            }
        }
        pivots.push(col);
        row += 1;
    }
    if rhs[row..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut sol = vec![Rational::zero(); ncols];
    for (r, c) in pivots.into_iter().enumerate() {
        sol[c] = rhs[r].clone();
    }
    Some(sol)
}

impl PartialEq for CycloScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.align(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycloScalar {}

impl Default for CycloScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for CycloScalar {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl From<Rational> for CycloScalar {
    fn from(q: Rational) -> Self {
        Self::from_rational(q)
    }
}

impl Add for &CycloScalar {
    type Output = CycloScalar;
    fn add(self, rhs: &CycloScalar) -> CycloScalar {
        if self.conductor == 1 && rhs.conductor != 1 {
            return rhs.zip_with(self, |a, b| a + b);
        }
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CycloScalar {
    type Output = CycloScalar;
    fn sub(self, rhs: &CycloScalar) -> CycloScalar {
        if self.conductor == 1 && rhs.conductor != 1 {
            return -rhs.zip_with(self, |a, b| a - b);
        }
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &CycloScalar {
    type Output = CycloScalar;
    fn mul(self, rhs: &CycloScalar) -> CycloScalar {
        self.mul_ref(rhs)
    }
}

impl Neg for &CycloScalar {
    type Output = CycloScalar;
    fn neg(self) -> CycloScalar {
        CycloScalar {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for CycloScalar {
    type Output = CycloScalar;
    fn neg(self) -> CycloScalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CycloScalar {
            type Output = CycloScalar;
            fn $m(self, rhs: CycloScalar) -> CycloScalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for CycloScalar {
    /// Text form accepted back by the expression parser, e.g. `3/4` or `(zeta(8) - zeta(8)^3)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{}", Self::fmt_rational(q));
        }
        let n = self.conductor;
        let terms: Vec<(usize, &Rational)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let mut out = String::new();
        for (idx, (k, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let unit = match k {
                0 => String::new(),
                1 => format!("zeta({n})"),
                _ => format!("zeta({n})^{k}"),
            };
            if unit.is_empty() {
                out.push_str(&Self::fmt_rational(&abs));
            } else if abs.is_one() {
                out.push_str(&unit);
            } else {
                out.push_str(&format!("{}*{}", Self::fmt_rational(&abs), unit));
            }
        }
        if terms.len() > 1 || out.starts_with('-') {
            write!(f, "({out})")
        } else {
            write!(f, "{out}")
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarRepr {
    conductor: u32,
    coeffs: Vec<String>,
}

impl Serialize for CycloScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ScalarRepr {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(Self::fmt_rational).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ScalarRepr::deserialize(d)?;
        if repr.conductor == 0 {
            return Err(D::Error::custom("conductor must be positive"));
        }
        if repr.coeffs.len() != euler_phi(repr.conductor) as usize {
            return Err(D::Error::custom(
                "coefficient count must equal phi(conductor)",
            ));
        }
        let coeffs = repr
            .coeffs
            .iter()
            .map(|s| {
                Self::parse_rational(s)
                    .ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CycloScalar {
            conductor: repr.conductor,
            coeffs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(n: u32, k: i64) -> CycloScalar {
        CycloScalar::root_of_unity(n, k)
    }

    #[test]
    fn basic_identities() {
        assert_eq!(&z(4, 1) * &z(4, 1), CycloScalar::from_int(-1));
        let s2 = &z(8, 1) + &z(8, -1);
        assert_eq!(&s2 * &s2, CycloScalar::from_int(2));
        assert_eq!(&z(3, 1) + &z(3, 2), CycloScalar::from_int(-1));
        assert_eq!(z(6, 3), CycloScalar::from_int(-1));
        assert_eq!(z(1, 0), CycloScalar::one());
        assert_eq!(&z(4, 1) * &z(4, 3), CycloScalar::one());
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn orders() {
        for n in 1..=30u32 {
            assert_eq!(z(n, 1).pow(n as i64), CycloScalar::one());
            for k in 0..n as i64 {
                let expect = n / (k as u32).gcd(&n).max(1);
                let expect = if k == 0 { 1 } else { expect };
                assert_eq!(z(n, k).root_of_unity_order(), Some(expect), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn square_roots() {
        assert_eq!(CycloScalar::sqrt_integer(-1), z(4, 1));
        assert_eq!(CycloScalar::sqrt_integer(4), CycloScalar::from_int(2));
        assert_eq!(CycloScalar::sqrt_integer(2), &z(8, 1) + &z(8, -1));
        for d in -30i64..=30 {
            if d == 0 {
                continue;
            }
            let s = CycloScalar::sqrt_integer(d);
            assert_eq!(&s * &s, CycloScalar::from_int(d), "d={d}");
            assert_eq!((4 * d.unsigned_abs() as u32) % s.conductor(), 0);
        }
    }

    #[test]
    fn nth_roots() {
        assert_eq!(CycloScalar::from_int(-1).try_nth_root(2), Some(z(4, 1)));
        assert_eq!(
            CycloScalar::from_int(8).try_nth_root(3),
            Some(CycloScalar::from_int(2))
        );
        assert_eq!(z(3, 1).try_nth_root(2), Some(z(6, 1)));
        let one_plus_i = &CycloScalar::one() + &z(4, 1);
        let r = CycloScalar::from_int(-4).try_nth_root(4).unwrap();
        assert_eq!(r.pow(4), CycloScalar::from_int(-4));
        assert_eq!(
            one_plus_i.pow(2).try_nth_root(2).unwrap().pow(2),
            one_plus_i.pow(2)
        );
        assert!(CycloScalar::from_int(2).try_nth_root(3).is_none());
    }

    #[test]
    fn minimize_and_keys() {
        let a = z(3, 1).embed(12);
        assert_eq!(a.conductor(), 12);
        let m = a.minimize();
        assert_eq!(m.conductor(), 3);
        assert_eq!(m, z(3, 1));
        let b = z(5, 2).embed(10);
        assert_eq!(b.minimize().conductor(), 5);
        assert_eq!(z(8, 2).embed(24).canonical_key(), z(4, 1).canonical_key());
    }

    #[test]
    fn division() {
        let a = &CycloScalar::from_int(3) + &z(5, 2);
        let b = &z(7, 1) - &CycloScalar::from_frac(1, 2);
        let q = a.checked_div(&b).unwrap();
        assert_eq!(&q * &b, a);
        assert_eq!(CycloScalar::zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn json_round_trip() {
        let a = &CycloScalar::from_frac(3, 4) + &z(12, 5);
        let s = serde_json::to_string(&a).unwrap();
        let b: CycloScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&b).unwrap(), s);
    }

    fn arb_scalar() -> impl Strategy<Value = CycloScalar> {
        let conductors = prop::sample::select(vec![1u32, 3, 4, 5, 8, 12, 15, 16]);
        (conductors, prop::collection::vec(-5i64..=5, 1..6), 1i64..4).prop_map(|(n, cs, den)| {
            let coeffs: Vec<Rational> = cs
                .into_iter()
                .map(|c| Rational::new(c.into(), den.into()))
                .collect();
            CycloScalar::from_power_coeffs(n, &coeffs)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn embedding_is_a_homomorphism(a in arb_scalar(), b in arb_scalar()) {
            let m = 48;
            let (ea, eb) = (a.embed(lcm(a.conductor(), m)), b.embed(lcm(b.conductor(), m)));
            prop_assert_eq!(&a + &b, &ea + &eb);
            prop_assert_eq!(&a - &b, &ea - &eb);
            prop_assert_eq!(&a * &b, &ea * &eb);
            if !b.is_zero() {
                prop_assert_eq!(a.checked_div(&b).unwrap(), ea.checked_div(&eb).unwrap());
            }
        }

        #[test]
        fn nth_root_of_power(a in arb_scalar(), n in 1u32..=6) {
            let p = a.pow(n as i64);
            if let Some(r) = p.try_nth_root(n) {
                prop_assert_eq!(r.pow(n as i64), p);
            } else {
                prop_assert!(a.as_rational_times_root_of_unity().is_none());
            }
        }

        #[test]
        fn minimize_preserves_value(a in arb_scalar()) {
            let m = a.minimize();
            prop_assert_eq!(&m, &a);
            prop_assert!(m.conductor() <= a.conductor().max(1) || a.conductor() % 4 == 2);
        }
    }
}
