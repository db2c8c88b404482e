//! Dickson polynomials of both kinds and the factorization of `D_n(x) + D_n(y)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclofield::CycloScalar;
use crate::ratfunc::{Poly, RatFunc};

type S = CycloScalar;

/// `D_n(x, alpha)`, characterized by `D_n(z + alpha/z, alpha) = z^n + (alpha/z)^n`.
pub fn dickson(n: u32, alpha: &CycloScalar) -> Poly {
    if n == 0 {
        return Poly::constant(S::from_int(2));
    }
    let x = Poly::x();
    let mut prev = Poly::constant(S::from_int(2));
    let mut cur = x.clone();
    for _ in 1..n {
        let next = &(&x * &cur) - &prev.scale(alpha);
        prev = cur;
        cur = next;
    }
    cur
}

/// `D_n(x) = D_n(x, 1)`.
pub fn dickson1(n: u32) -> Poly {
    dickson(n, &S::one())
}

/// `E_n`, with `E_n(z + 1/z) = (z^(n+1) - z^-(n+1)) / (z - 1/z)`.
pub fn dickson_second(n: u32) -> Poly {
    let x = Poly::x();
    let mut prev = Poly::one();
    if n == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..n {
        let next = &(&x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// A polynomial in `x` and `y`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BivariatePoly {
    terms: BTreeMap<(u32, u32), CycloScalar>,
}

impl BivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_terms([((0, 0), S::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), CycloScalar)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, &c);
        }
        p
    }

    fn add_term(&mut self, k: (u32, u32), c: &CycloScalar) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(k).or_default();
        *v = &*v + c;
        if v.is_zero() {
            self.terms.remove(&k);
        }
    }

    /// `p(x)` viewed as a polynomial in `x` alone (or in `y` alone when `in_y`).
    pub fn from_univariate(p: &Poly, in_y: bool) -> Self {
        Self::from_terms(p.as_laurent().terms().map(|(e, c)| {
            let e = e as u32;
            (if in_y { (0, e) } else { (e, 0) }, c.clone())
        }))
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &CycloScalar)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> CycloScalar {
        self.terms.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    /// `p(u, v)` for rational functions `u`, `v`.
    pub fn eval(&self, u: &RatFunc, v: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::constant(S::zero());
        for ((i, j), c) in &self.terms {
            let t = &u.pow(*i as i64).unwrap() * &v.pow(*j as i64).unwrap();
            acc = &acc + &t.scale(c);
        }
        acc
    }
}

impl Add for &BivariatePoly {
    type Output = BivariatePoly;
    fn add(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c);
        }
        out
    }
}

impl Sub for &BivariatePoly {
    type Output = BivariatePoly;
    fn sub(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, &-c);
        }
        out
    }
}

impl Mul for &BivariatePoly {
    type Output = BivariatePoly;
    fn mul(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = BivariatePoly::zero();
        for ((a, b), c) in &self.terms {
            for ((d, e), f) in &rhs.terms {
                out.add_term((a + d, b + e), &(c * f));
            }
        }
        out
    }
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (k, ((i, j), c)) in self.terms.iter().rev().enumerate() {
            let negative = c
                .as_rational()
                .is_some_and(|q| q < &num_traits::Zero::zero());
            let abs = if negative { -c } else { c.clone() };
            if k > 0 {
                out.push_str(if negative { " - " } else { " + " });
            } else if negative {
                out.push('-');
            }
            let mut mono = Vec::new();
            match i {
                0 => {}
                1 => mono.push("x".to_string()),
                _ => mono.push(format!("x^{i}")),
            }
            match j {
                0 => {}
                1 => mono.push("y".to_string()),
                _ => mono.push(format!("y^{j}")),
            }
            let m = mono.join("*");
            out.push_str(&if m.is_empty() {
                abs.to_string()
            } else if abs.is_one() {
                m
            } else {
                format!("{abs}*{m}")
            });
        }
        write!(f, "{out}")
    }
}

impl Serialize for BivariatePoly {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            terms: Vec<(u32, u32, &'a CycloScalar)>,
        }
        Repr {
            terms: self.terms.iter().map(|((i, j), c)| (*i, *j, c)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BivariatePoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            terms: Vec<(u32, u32, CycloScalar)>,
        }
        let r = Repr::deserialize(d)?;
        let mut seen = std::collections::BTreeSet::new();
        for (i, j, _) in &r.terms {
            if !seen.insert((*i, *j)) {
                return Err(D::Error::custom(format!("duplicate term ({i}, {j})")));
            }
        }
        Ok(Self::from_terms(
            r.terms.into_iter().map(|(i, j, c)| ((i, j), c)),
        ))
    }
}

/// Factors of `D_n(x) + D_n(y)`: the linear factor `x + y` (odd `n` only) and one
/// quadratic `x^2 - 2cos(pi k/n) xy + y^2 - 4sin^2(pi k/n)` per odd `k < n`, in increasing `k`.
pub fn dickson_plus_factors(n: u32) -> (Option<BivariatePoly>, Vec<BivariatePoly>) {
    assert!(n >= 1);
    let linear =
        (n % 2 == 1).then(|| BivariatePoly::from_terms([((1, 0), S::one()), ((0, 1), S::one())]));
    let two_n = 2 * n;
    let quadratics = (1..n)
        .step_by(2)
        .map(|k| {
            let z = S::root_of_unity(two_n, k as i64);
            let zi = S::root_of_unity(two_n, -(k as i64));
            // -2cos = -(z + 1/z); -4sin^2 = z^2 + z^-2 - 2
            let xy = -&(&z + &zi);
            let c = &(&(&z * &z) + &(&zi * &zi)) - &S::from_int(2);
            BivariatePoly::from_terms([
                ((2, 0), S::one()),
                ((1, 1), xy),
                ((0, 2), S::one()),
                ((0, 0), c),
            ])
        })
        .collect();
    (linear, quadratics)
}

/// `D_n(x) + D_n(y)` as a bivariate polynomial.
pub fn dickson_plus(n: u32) -> BivariatePoly {
    let d = dickson1(n);
    &BivariatePoly::from_univariate(&d, false) + &BivariatePoly::from_univariate(&d, true)
}
