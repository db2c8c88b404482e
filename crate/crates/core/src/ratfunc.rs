//! Laurent polynomials, polynomials, reduced rational functions and Möbius maps.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclofield::{CycloScalar, FieldError};

type S = CycloScalar;

/// A finite sum `sum c_e x^e` with `e` ranging over the integers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, CycloScalar>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn x() -> Self {
        Self::monomial(S::one(), 1)
    }

    pub fn constant(c: CycloScalar) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: CycloScalar, e: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        LaurentPoly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, CycloScalar)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, &c);
        }
        p
    }

    /// Integer-coefficient shorthand: `from_ints(&[(2, 1), (-2, 1)])` is `x^2 + x^-2`.
    pub fn from_ints(terms: &[(i64, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(e, c)| (e, S::from_int(c))))
    }

    fn add_term(&mut self, e: i64, c: &CycloScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = &*v + c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &CycloScalar)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: i64) -> CycloScalar {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Pole order at infinity.
    pub fn d_inf(&self) -> u64 {
        self.max_exp().map_or(0, |e| e.max(0) as u64)
    }

    /// Pole order at zero.
    pub fn d_zero(&self) -> u64 {
        self.min_exp().map_or(0, |e| (-e).max(0) as u64)
    }

    /// Degree as a rational function, `d0 + d_inf`.
    pub fn degree(&self) -> u64 {
        self.d_zero() + self.d_inf()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| *e == 0)
    }

    pub fn constant_term(&self) -> CycloScalar {
        self.coeff(0)
    }

    pub fn is_polynomial(&self) -> bool {
        self.min_exp().is_none_or(|e| e >= 0)
    }

    /// Coefficient of the highest power.
    pub fn lead(&self) -> CycloScalar {
        self.terms.values().next_back().cloned().unwrap_or_default()
    }

    /// Coefficient of the lowest power.
    pub fn trail(&self) -> CycloScalar {
        self.terms.values().next().cloned().unwrap_or_default()
    }

    /// `Some((c, e))` when `self = c x^e + constant` with `e != 0`.
    pub fn as_shifted_monomial(&self) -> Option<(CycloScalar, i64)> {
        let mut it = self.terms.iter().filter(|(e, _)| **e != 0);
        let (e, c) = it.next()?;
        if it.next().is_some() {
            return None;
        }
        Some((c.clone(), *e))
    }

    pub fn scale(&self, c: &CycloScalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, v)| (e + k, v.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one();
        for _ in 0..n {
            result = &result * self;
        }
        result
    }

    /// `f(x^n)`; a negative `n` also inverts the variable.
    pub fn substitute_power(&self, n: i64) -> Self {
        assert!(n != 0);
        LaurentPoly {
            terms: self.terms.iter().map(|(e, v)| (e * n, v.clone())).collect(),
        }
    }

    /// `f(alpha x)`.
    pub fn scale_var(&self, alpha: &CycloScalar) -> Self {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (*e, v * &alpha.pow(*e)))
                .collect(),
        }
    }

    /// `f(1/x)`.
    pub fn invert_var(&self) -> Self {
        self.substitute_power(-1)
    }

    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| **e != 0)
                .map(|(e, v)| (e - 1, v * &S::from_int(*e))),
        )
    }

    /// `f(c)`, or `None` when `c = 0` and `f` has a pole there.
    pub fn eval(&self, c: &CycloScalar) -> Option<CycloScalar> {
        if c.is_zero() {
            return if self.d_zero() > 0 {
                None
            } else {
                Some(self.constant_term())
            };
        }
        let mut acc = S::zero();
        for (e, v) in &self.terms {
            acc = &acc + &(v * &c.pow(*e));
        }
        Some(acc)
    }

    /// `self ∘ h` when it is again a Laurent polynomial.
    pub fn compose(&self, h: &LaurentPoly) -> Option<LaurentPoly> {
        if self.is_constant() {
            return Some(self.clone());
        }
        if h.num_terms() == 1 {
            let (e, c) = h.terms().next().unwrap();
            if e == 0 {
                return Some(Self::constant(self.eval(c)?));
            }
            return Some(LaurentPoly {
                terms: self
                    .terms
                    .iter()
                    .map(|(k, v)| (k * e, v * &c.pow(*k)))
                    .collect(),
            });
        }
        if !self.is_polynomial() {
            return None;
        }
        let top = self.max_exp().unwrap();
        let mut acc = Self::zero();
        for k in (0..=top).rev() {
            acc = &acc * h;
            if let Some(c) = self.terms.get(&k) {
                acc.add_term(0, c);
            }
        }
        Some(acc)
    }

    /// Largest `N` with `f = G(x^N)`; `None` for constants.
    pub fn monomial_part(&self) -> Option<u64> {
        let mut g = 0u64;
        for e in self.terms.keys() {
            if *e != 0 {
                g = num_integer::gcd(g, e.unsigned_abs());
            }
        }
        if g == 0 {
            None
        } else {
            Some(g)
        }
    }

    /// `G` with `G(x^n) = self`, when every exponent is divisible by `n`.
    pub fn divide_exponents(&self, n: i64) -> Option<LaurentPoly> {
        if self.terms.keys().any(|e| e % n != 0) {
            return None;
        }
        Some(LaurentPoly {
            terms: self.terms.iter().map(|(e, v)| (e / n, v.clone())).collect(),
        })
    }

    pub fn to_ratfunc(&self) -> RatFunc {
        RatFunc::from_laurent(self)
    }

    /// Equal for equal polynomials regardless of scalar conductors.
    pub fn canonical_key(&self) -> String {
        let mut s = String::new();
        for (e, c) in &self.terms {
            s.push_str(&format!("{e}:{};", c.canonical_key()));
        }
        s
    }

    /// Same polynomial with every scalar rewritten in its smallest conductor.
    pub fn minimized(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c.minimize())).collect(),
        }
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, &-c);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut acc: BTreeMap<i64, CycloScalar> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let p = ca * cb;
                match acc.get_mut(&(a + b)) {
                    Some(v) => *v = &*v + &p,
                    None => {
                        acc.insert(a + b, p);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        LaurentPoly { terms: acc }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, v)| (*e, -v)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(LaurentPoly, Add, add);
forward_owned!(LaurentPoly, Sub, sub);
forward_owned!(LaurentPoly, Mul, mul);

fn fmt_terms<'a>(terms: impl Iterator<Item = (i64, &'a CycloScalar)>) -> String {
    let mut out = String::new();
    for (idx, (e, c)) in terms.enumerate() {
        let rational = c.as_rational().cloned();
        let negative = rational
            .as_ref()
            .is_some_and(|q| q < &num_traits::Zero::zero());
        let abs = if negative { -c } else { c.clone() };
        if idx > 0 {
            out.push_str(if negative { " - " } else { " + " });
        } else if negative {
            out.push('-');
        }
        let var = match e {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{e}"),
        };
        if var.is_empty() {
            out.push_str(&abs.to_string());
        } else if abs.is_one() {
            out.push_str(&var);
        } else {
            out.push_str(&format!("{abs}*{var}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for LaurentPoly {
    /// Highest power first, e.g. `x^2 + 3/2*x - x^-2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_terms(self.terms().rev()))
    }
}

/// Exponent-to-scalar map, keyed by decimal strings in JSON.
fn serialize_terms<Ser: Serializer>(p: &LaurentPoly, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    let m: BTreeMap<String, &CycloScalar> =
        p.terms.iter().map(|(e, c)| (e.to_string(), c)).collect();
    let ordered: Vec<(String, &CycloScalar)> = {
        let mut v: Vec<_> = m.into_iter().collect();
        v.sort_by_key(|(k, _)| k.parse::<i64>().unwrap());
        v
    };
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(ordered.len()))?;
    for (k, v) in ordered {
        map.serialize_entry(&k, v)?;
    }
    map.end()
}

fn deserialize_terms<'de, D: Deserializer<'de>>(d: D) -> Result<LaurentPoly, D::Error> {
    let m: BTreeMap<String, CycloScalar> = BTreeMap::deserialize(d)?;
    let mut terms = Vec::new();
    for (k, v) in m {
        let e: i64 = k
            .parse()
            .map_err(|_| D::Error::custom(format!("bad exponent {k:?}")))?;
        terms.push((e, v));
    }
    Ok(LaurentPoly::from_terms(terms))
}

impl Serialize for LaurentPoly {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        serialize_terms(self, s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        deserialize_terms(d)
    }
}

/// A polynomial: a Laurent polynomial without negative exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly(LaurentPoly);

impl Poly {
    pub fn from_laurent(p: LaurentPoly) -> Option<Self> {
        if p.is_polynomial() {
            Some(Poly(p))
        } else {
            None
        }
    }

    pub fn zero() -> Self {
        Poly(LaurentPoly::zero())
    }

    pub fn one() -> Self {
        Poly(LaurentPoly::one())
    }

    pub fn x() -> Self {
        Poly(LaurentPoly::x())
    }

    pub fn constant(c: CycloScalar) -> Self {
        Poly(LaurentPoly::constant(c))
    }

    pub fn from_coeffs(coeffs: &[CycloScalar]) -> Self {
        Poly(LaurentPoly::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (i as i64, c.clone())),
        ))
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly(LaurentPoly::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (i as i64, S::from_int(*c))),
        ))
    }

    pub fn as_laurent(&self) -> &LaurentPoly {
        &self.0
    }

    pub fn into_laurent(self) -> LaurentPoly {
        self.0
    }

    pub fn deg(&self) -> u64 {
        self.0.d_inf()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn lead(&self) -> CycloScalar {
        self.0.lead()
    }

    pub fn coeff(&self, e: i64) -> CycloScalar {
        self.0.coeff(e)
    }

    /// Lowest exponent present, i.e. the order of vanishing at 0.
    pub fn ord0(&self) -> u64 {
        self.0.min_exp().map_or(0, |e| e as u64)
    }

    pub fn is_monomial(&self) -> bool {
        self.0.num_terms() == 1
    }

    pub fn scale(&self, c: &CycloScalar) -> Self {
        Poly(self.0.scale(c))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().inv().unwrap())
    }

    pub fn pow(&self, n: u32) -> Self {
        Poly(self.0.pow(n))
    }

    pub fn derivative(&self) -> Self {
        Poly(self.0.derivative())
    }

    pub fn eval(&self, c: &CycloScalar) -> CycloScalar {
        let mut acc = S::zero();
        let Some(top) = self.0.max_exp() else {
            return acc;
        };
        for k in (0..=top).rev() {
            acc = &(&acc * c) + &self.0.coeff(k);
        }
        acc
    }

    pub fn compose(&self, h: &Poly) -> Poly {
        Poly(self.0.compose(&h.0).expect("polynomial composition"))
    }

    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly), FieldError> {
        if d.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let dd = d.deg() as i64;
        let inv = d.lead().inv()?;
        let mut r = self.0.clone();
        let mut q = LaurentPoly::zero();
        while let Some(top) = r.max_exp() {
            if top < dd {
                break;
            }
            let c = &r.lead() * &inv;
            let t = LaurentPoly::monomial(c, top - dd);
            r = &r - &(&t * &d.0);
            q = &q + &t;
        }
        Ok((Poly(q), Poly(r)))
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_monomial() || other.is_monomial() {
            // a monomial only shares powers of x
            let k = self.ord0().min(other.ord0());
            return Poly(LaurentPoly::monomial(S::one(), k as i64));
        }
        let (mut a, mut b) = (self.monic(), other.monic());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).unwrap();
            a = b;
            b = r.monic();
        }
        a.monic()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        Poly(&self.0 + &rhs.0)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        Poly(&self.0 - &rhs.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly(&self.0 * &rhs.0)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(-&self.0)
    }
}

forward_owned!(Poly, Add, add);
forward_owned!(Poly, Sub, sub);
forward_owned!(Poly, Mul, mul);

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Poly {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        serialize_terms(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = deserialize_terms(d)?;
        Poly::from_laurent(p).ok_or_else(|| D::Error::custom("polynomial with negative exponent"))
    }
}

/// A rational function `num/den` with `den` monic and coprime to `num`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    /// Reduces `num/den`; `None` when `den = 0`.
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::constant(S::zero()));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.deg() == 0 {
            (num, den)
        } else {
            (num.divrem(&g).unwrap().0, den.divrem(&g).unwrap().0)
        };
        Some(Self::normalized(num, den))
    }

    /// Assumes `gcd(num, den) = 1`; only makes `den` monic.
    fn normalized(num: Poly, den: Poly) -> Self {
        let l = den.lead();
        if l.is_one() {
            return RatFunc { num, den };
        }
        let inv = l.inv().unwrap();
        RatFunc {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn constant(c: CycloScalar) -> Self {
        RatFunc {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn x() -> Self {
        RatFunc {
            num: Poly::x(),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn from_laurent(p: &LaurentPoly) -> Self {
        let d0 = p.d_zero() as i64;
        let num = Poly(p.shift(d0));
        let den = Poly(LaurentPoly::monomial(S::one(), d0));
        if d0 == 0 {
            return RatFunc { num, den };
        }
        // x does not divide num since its lowest term sits at exponent 0
        RatFunc { num, den }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn degree(&self) -> u64 {
        self.num.deg().max(self.den.deg())
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn as_constant(&self) -> Option<CycloScalar> {
        if self.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    /// The Laurent polynomial equal to `self`, if the denominator is a power of `x`.
    pub fn as_laurent(&self) -> Option<LaurentPoly> {
        if !self.den.is_monomial() {
            return None;
        }
        Some(self.num.0.shift(-(self.den.deg() as i64)))
    }

    pub fn as_poly(&self) -> Option<Poly> {
        if self.den.deg() == 0 {
            Some(self.num.clone())
        } else {
            None
        }
    }

    pub fn is_laurent(&self) -> bool {
        self.den.is_monomial()
    }

    pub fn scale(&self, c: &CycloScalar) -> Self {
        if c.is_zero() {
            return Self::constant(S::zero());
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.num.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let n = e.unsigned_abs() as u32;
        Ok(RatFunc {
            num: base.num.pow(n),
            den: base.den.pow(n),
        })
    }

    /// `f(c)`; `None` means the value is infinity.
    pub fn eval(&self, c: &CycloScalar) -> Option<CycloScalar> {
        let d = self.den.eval(c);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(c).checked_div(&d).unwrap())
    }

    /// Value at infinity; `None` if it is a pole.
    pub fn eval_inf(&self) -> Option<CycloScalar> {
        let (a, b) = (self.num.deg(), self.den.deg());
        if a > b {
            None
        } else if a < b || self.num.is_zero() {
            Some(S::zero())
        } else {
            Some(self.num.lead().checked_div(&self.den.lead()).unwrap())
        }
    }

    /// Value at a point of the projective line, `None` standing for infinity.
    pub fn eval_projective(&self, c: Option<&CycloScalar>) -> Option<CycloScalar> {
        match c {
            Some(c) => self.eval(c),
            None => self.eval_inf(),
        }
    }

    /// `self ∘ g`.
    ///
    /// Panics if `g` is a constant sitting at a pole of `self`.
    pub fn compose(&self, g: &RatFunc) -> RatFunc {
        if self.is_constant() {
            return self.clone();
        }
        if let Some(c) = g.as_constant() {
            let v = self
                .eval(&c)
                .expect("composition with a constant at a pole");
            return Self::constant(v);
        }
        if let (Some(f), Some(h)) = (self.as_laurent(), g.as_laurent()) {
            if let Some(r) = f.compose(&h) {
                return Self::from_laurent(&r);
            }
        }
        // Homogenized Horner: with g = P/Q and d = max(deg A, deg B),
        // A(P/Q) Q^d and B(P/Q) Q^d are already coprime.
        let (p, q) = (&g.num, &g.den);
        let d = self.degree() as u32;
        let mut ppow = vec![Poly::one()];
        let mut qpow = vec![Poly::one()];
        for _ in 0..d {
            ppow.push(ppow.last().unwrap() * p);
            qpow.push(qpow.last().unwrap() * q);
        }
        let homog = |a: &Poly| {
            let mut acc = Poly::zero();
            for (i, c) in a.0.terms() {
                let i = i as usize;
                acc = &acc + &(&ppow[i] * &qpow[d as usize - i]).scale(c);
            }
            acc
        };
        Self::normalized(homog(&self.num), homog(&self.den))
    }

    /// Applies `mu` on the given side: `mu ∘ f`, `f ∘ mu`, or `mu^-1 ∘ f ∘ mu`.
    pub fn mobius_act(&self, mu: &Mobius, side: Side) -> RatFunc {
        match side {
            Side::Left => mu.to_ratfunc().compose(self),
            Side::Right => self.compose(&mu.to_ratfunc()),
            Side::Conjugate => mu
                .inverse()
                .to_ratfunc()
                .compose(&self.compose(&mu.to_ratfunc())),
        }
    }

    pub fn canonical_key(&self) -> String {
        format!(
            "{}|{}",
            self.num.0.canonical_key(),
            self.den.0.canonical_key()
        )
    }

    pub fn minimized(&self) -> Self {
        RatFunc {
            num: Poly(self.num.0.minimized()),
            den: Poly(self.den.0.minimized()),
        }
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone()).unwrap();
        }
        RatFunc::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .unwrap()
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).unwrap()
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

forward_owned!(RatFunc, Add, add);
forward_owned!(RatFunc, Sub, sub);
forward_owned!(RatFunc, Mul, mul);

impl From<LaurentPoly> for RatFunc {
    fn from(p: LaurentPoly) -> Self {
        RatFunc::from_laurent(&p)
    }
}

impl From<&LaurentPoly> for RatFunc {
    fn from(p: &LaurentPoly) -> Self {
        RatFunc::from_laurent(p)
    }
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> Self {
        RatFunc::from_poly(p)
    }
}

impl fmt::Display for RatFunc {
    /// Laurent polynomials print as sums of powers of `x`; anything else as `(num)/(den)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.as_laurent() {
            return write!(f, "{l}");
        }
        write!(f, "({})/({})", self.num, self.den)
    }
}

#[derive(Serialize, Deserialize)]
struct RatFuncRepr {
    num: Poly,
    den: Poly,
}

impl Serialize for RatFunc {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        RatFuncRepr {
            num: self.num.clone(),
            den: self.den.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatFunc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RatFuncRepr::deserialize(d)?;
        RatFunc::new(r.num, r.den).ok_or_else(|| D::Error::custom("zero denominator"))
    }
}

/// Which side a Möbius map acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Conjugate,
}

/// Substitutions `f(alpha x)`, `f(x^n)` and `f(1/x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Substitution {
    Scale(CycloScalar),
    Power(u32),
    Invert,
}

pub fn monomial_substitute(f: &LaurentPoly, kind: &Substitution) -> LaurentPoly {
    match kind {
        Substitution::Scale(alpha) => {
            assert!(!alpha.is_zero(), "scaling by zero");
            f.scale_var(alpha)
        }
        Substitution::Power(n) => {
            assert!(*n >= 1);
            f.substitute_power(*n as i64)
        }
        Substitution::Invert => f.invert_var(),
    }
}

/// The degree-one map `(a x + b)/(c x + d)`, scaled so that its first nonzero entry is 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mobius {
    a: CycloScalar,
    b: CycloScalar,
    c: CycloScalar,
    d: CycloScalar,
}

impl Mobius {
    pub fn new(a: CycloScalar, b: CycloScalar, c: CycloScalar, d: CycloScalar) -> Option<Self> {
        if (&(&a * &d) - &(&b * &c)).is_zero() {
            return None;
        }
        let first = [&a, &b, &c, &d]
            .into_iter()
            .find(|v| !v.is_zero())
            .unwrap()
            .clone();
        let inv = first.inv().unwrap();
        Some(Mobius {
            a: &a * &inv,
            b: &b * &inv,
            c: &c * &inv,
            d: &d * &inv,
        })
    }

    pub fn identity() -> Self {
        Self::affine(S::one(), S::zero())
    }

    /// `a x + b`.
    pub fn affine(a: CycloScalar, b: CycloScalar) -> Self {
        Self::new(a, b, S::zero(), S::one()).expect("affine map with zero slope")
    }

    /// `1/x`.
    pub fn inversion() -> Self {
        Self::new(S::zero(), S::one(), S::one(), S::zero()).unwrap()
    }

    pub fn entries(&self) -> [&CycloScalar; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// The unique map sending `0, inf, 1` to `p0, pinf, p1` (`None` = infinity).
    pub fn from_points(
        p0: Option<&CycloScalar>,
        pinf: Option<&CycloScalar>,
        p1: Option<&CycloScalar>,
    ) -> Option<Self> {
        // columns of the matrix are lifts of pinf and p0, scaled so the sum hits p1
        let lift = |p: Option<&CycloScalar>| match p {
            Some(v) => (v.clone(), S::one()),
            None => (S::one(), S::zero()),
        };
        let (u1, u2) = lift(pinf);
        let (v1, v2) = lift(p0);
        let (w1, w2) = lift(p1);
        // solve s*u + t*v = w
        let det = &(&u1 * &v2) - &(&u2 * &v1);
        if det.is_zero() {
            return None;
        }
        let s = (&(&w1 * &v2) - &(&w2 * &v1)).checked_div(&det).ok()?;
        let t = (&(&u1 * &w2) - &(&u2 * &w1)).checked_div(&det).ok()?;
        Self::new(&s * &u1, &t * &v1, &s * &u2, &t * &v2)
    }

    pub fn from_ratfunc(f: &RatFunc) -> Option<Self> {
        if f.degree() != 1 {
            return None;
        }
        let (n, d) = (f.num(), f.den());
        Self::new(n.coeff(1), n.coeff(0), d.coeff(1), d.coeff(0))
    }

    pub fn to_ratfunc(&self) -> RatFunc {
        RatFunc::new(
            Poly::from_coeffs(&[self.b.clone(), self.a.clone()]),
            Poly::from_coeffs(&[self.d.clone(), self.c.clone()]),
        )
        .unwrap()
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &Mobius) -> Mobius {
        Self::new(
            &(&self.a * &o.a) + &(&self.b * &o.c),
            &(&self.a * &o.b) + &(&self.b * &o.d),
            &(&self.c * &o.a) + &(&self.d * &o.c),
            &(&self.c * &o.b) + &(&self.d * &o.d),
        )
        .unwrap()
    }

    pub fn inverse(&self) -> Mobius {
        Self::new(self.d.clone(), -&self.b, -&self.c, self.a.clone()).unwrap()
    }

    pub fn is_identity(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    pub fn is_affine(&self) -> bool {
        self.c.is_zero()
    }

    /// Image of a point of the projective line.
    pub fn apply(&self, p: Option<&CycloScalar>) -> Option<CycloScalar> {
        let (num, den) = match p {
            Some(v) => (&(&self.a * v) + &self.b, &(&self.c * v) + &self.d),
            None => (self.a.clone(), self.c.clone()),
        };
        if den.is_zero() {
            None
        } else {
            Some(num.checked_div(&den).unwrap())
        }
    }
}

impl fmt::Display for Mobius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ratfunc())
    }
}

/// A factor sequence, outermost first, together with its composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    factors: Vec<RatFunc>,
    complete: bool,
    composition: RatFunc,
}

impl Decomposition {
    /// An unflagged decomposition; see `decompose::certify_complete` for the complete flag.
    pub fn new(factors: Vec<RatFunc>) -> Self {
        Self::with_flag(factors, false)
    }

    pub(crate) fn with_flag(factors: Vec<RatFunc>, complete: bool) -> Self {
        assert!(
            !factors.is_empty(),
            "a decomposition needs at least one factor"
        );
        let composition = compose_all(&factors);
        Decomposition {
            factors,
            complete,
            composition,
        }
    }

    pub fn factors(&self) -> &[RatFunc] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn composition(&self) -> &RatFunc {
        &self.composition
    }

    pub fn degrees(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.degree()).collect()
    }

    pub fn sorted_degrees(&self) -> Vec<u64> {
        let mut d = self.degrees();
        d.sort_unstable();
        d
    }
}

/// Composition of a factor list, outermost first.
pub fn compose_all(factors: &[RatFunc]) -> RatFunc {
    let mut it = factors.iter().rev();
    let mut acc = it.next().cloned().unwrap_or_else(RatFunc::x);
    for f in it {
        acc = f.compose(&acc);
    }
    acc
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|p| format!("({p})")).collect();
        write!(f, "{}", parts.join(" @ "))
    }
}

#[derive(Serialize, Deserialize)]
struct DecompositionRepr {
    factors: Vec<RatFunc>,
    complete: bool,
    degrees: Vec<u64>,
}

impl Serialize for Decomposition {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        DecompositionRepr {
            factors: self.factors.clone(),
            complete: self.complete,
            degrees: self.degrees(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Decomposition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = DecompositionRepr::deserialize(d)?;
        if r.factors.is_empty() {
            return Err(D::Error::custom("empty factor list"));
        }
        let dec = Decomposition::with_flag(r.factors, r.complete);
        if dec.degrees() != r.degrees {
            return Err(D::Error::custom("degrees do not match the factors"));
        }
        Ok(dec)
    }
}
