//! Parameterized identities `g1 ∘ h1 = g2 ∘ h2` between Laurent polynomials, twisted pairs
//! `g ∘ h1 = gamma * g ∘ h2`, and classifiers that recover template parameters from a given
//! bidecomposition.
//!
//! Constructors always verify by exact expansion. Classifiers return a witness only after every
//! factorization it claims has been reassembled and compared exactly.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::cyclofield::CycloScalar;
use crate::decompose::{
    self, canonical_right, laurent_representative, left_divide, left_divide_laurent,
    normalize_decomposition, DecomposeError, Decomposer, Limits, NormalizedPair, PairKind,
};
use crate::dickson::dickson1;
use crate::ratfunc::{LaurentPoly, Mobius, Poly, RatFunc};

type S = CycloScalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogueError {
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("not classified: {0}")]
    NotClassified(String),
    #[error("composition is not of the form (x - 1/x) p(x + 1/x)")]
    NotOddShape,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}

pub type Result<T> = std::result::Result<T, CatalogueError>;

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(CatalogueError::BadParameters(msg.into()))
}

/// A named family of bidecompositions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum MoveKind {
    /// `x^n ∘ x^r q(x^n) = x^r q(x)^n ∘ x^n`.
    MonomialTwist {
        n: u32,
        r: i64,
        q: RatFunc,
    },
    /// `D_m ∘ D_n = D_n ∘ D_m`.
    DicksonSwap {
        m: u32,
        n: u32,
    },
    /// `D_n ∘ (x + 1/x) = (x + 1/x) ∘ x^n`.
    DicksonBridge {
        n: u32,
    },
    /// `D_n ∘ (x + 1/x) = D_n ∘ (zeta x + 1/(zeta x))` with `zeta^n = 1`.
    DicksonConjugate {
        n: u32,
        zeta: CycloScalar,
    },
    /// `D_dm ∘ (x^n + x^-n) = -D_dn ∘ ((zeta x)^m + (zeta x)^-m)` with `zeta^(dmn) = -1`.
    DicksonNegation {
        d: u32,
        m: u32,
        n: u32,
        zeta: CycloScalar,
    },
    /// `x^2 ∘ (x - 1/x) p(x + 1/x) = (x^2 - 4) p(x)^2 ∘ (x + 1/x)`.
    QuadraticBridge {
        p: Poly,
    },
    Sporadic24,
    /// `x^n ∘ (x^n + 1)/x^r = (x + 1)^n/x^r ∘ x^n`.
    UniqueBinomial {
        n: u32,
        r: u32,
    },
    /// `D_n ∘ (x + 1/x) = -D_n ∘ (zeta x + 1/(zeta x))` with `zeta^n = -1`.
    UniqueNegation {
        n: u32,
        zeta: CycloScalar,
    },
    AZTemplate(AzCase),
    /// `G ∘ D_n ∘ (x^m/s + s/x^m) = G ∘ (x/I + I/x) ∘ x^(nm)` with `s^2 = gamma`, `gamma^n = -1`,
    /// `I = s^n` and `G` odd.
    OddRemainder {
        m: u32,
        n: u32,
        gamma: CycloScalar,
        g: Poly,
    },
}

/// Twisted pair families `g ∘ h1 = gamma * g ∘ h2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum AzCase {
    /// `h1 = alpha h2`, `g = x^r p(x^n)`, `alpha^n = 1`, `gamma = alpha^r`.
    #[serde(rename = "1")]
    Scaled {
        alpha: CycloScalar,
        r: u32,
        n: u32,
        p: Poly,
        h2: RatFunc,
    },
    /// `g = G ∘ D_n` with `G = x p(x^2)`, `h1 = x^m + x^-m`, `h2 = h1(alpha x)`, `alpha^(nm) = -1`.
    #[serde(rename = "2")]
    Rotated {
        m: u32,
        n: u32,
        alpha: CycloScalar,
        p: Poly,
    },
    /// `g = G ∘ ((1 - alpha) x^2/2 - 2)` with `G = x^r p(x^n)`, `h1 = x^m + x^-m`,
    /// `h2 = (x^m - x^-m)/sqrt(alpha)`, `alpha^n = 1`, `alpha != -1`.
    #[serde(rename = "3")]
    Sheared {
        m: u32,
        n: u32,
        r: u32,
        alpha: CycloScalar,
        p: Poly,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bidecomposition {
    pub g1: RatFunc,
    pub h1: RatFunc,
    pub g2: RatFunc,
    pub h2: RatFunc,
    pub verified: bool,
}

impl Bidecomposition {
    pub fn new(g1: RatFunc, h1: RatFunc, g2: RatFunc, h2: RatFunc) -> Self {
        let verified = verify_bidecomposition(&g1, &h1, &g2, &h2);
        Bidecomposition {
            g1,
            h1,
            g2,
            h2,
            verified,
        }
    }

    pub fn composition(&self) -> RatFunc {
        self.g1.compose(&self.h1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistedPair {
    pub g: Poly,
    pub h1: RatFunc,
    pub h2: RatFunc,
    pub gamma: CycloScalar,
}

impl TwistedPair {
    pub fn verify(&self) -> bool {
        let g = RatFunc::from(self.g.clone());
        !self.gamma.is_one() && g.compose(&self.h1) == g.compose(&self.h2).scale(&self.gamma)
    }
}

pub fn verify_bidecomposition(g1: &RatFunc, h1: &RatFunc, g2: &RatFunc, h2: &RatFunc) -> bool {
    g1.compose(h1) == g2.compose(h2)
}

fn mono(e: i64) -> LaurentPoly {
    LaurentPoly::monomial(S::one(), e)
}

fn x_plus_inv() -> LaurentPoly {
    LaurentPoly::from_ints(&[(1, 1), (-1, 1)])
}

fn x_minus_inv() -> LaurentPoly {
    LaurentPoly::from_ints(&[(1, 1), (-1, -1)])
}

/// `x^k + x^-k`.
fn sym_mono(k: i64) -> LaurentPoly {
    LaurentPoly::from_ints(&[(k, 1), (-k, 1)])
}

fn rf(l: &LaurentPoly) -> RatFunc {
    l.to_ratfunc()
}

fn dk(n: u32) -> RatFunc {
    dickson1(n).into()
}

fn q(n: i64, d: i64) -> S {
    S::from_frac(n, d)
}

fn is_root_of(z: &S, n: u32, target: i64) -> bool {
    z.pow(n as i64) == S::from_int(target)
}

fn is_odd_poly(g: &Poly) -> bool {
    !g.is_zero() && g.as_laurent().terms().all(|(e, _)| e % 2 != 0)
}

/// `x^r p(x^n)`, with `p` read at `1` when `n = 0`.
fn twist_poly(r: u32, n: u32, p: &Poly) -> Poly {
    let inner = if n == 0 {
        Poly::constant(p.eval(&S::one()))
    } else {
        p.compose(&Poly::from_laurent(mono(n as i64)).unwrap())
    };
    &Poly::from_laurent(mono(r as i64)).unwrap() * &inner
}

/// The four functions of the degree-24 sporadic bidecomposition.
pub fn sporadic24() -> (Poly, LaurentPoly, Poly, LaurentPoly) {
    let g1 = Poly::from_coeffs(&[
        q(-1, 1),
        q(0, 1),
        q(1, 1),
        q(0, 1),
        q(-1, 3),
        q(0, 1),
        q(1, 27),
    ]);
    let h1 = LaurentPoly::from_terms([(2, q(1, 1)), (1, q(2, 1)), (-1, q(1, 1)), (-2, q(-1, 4))]);
    let g2 = Poly::from_ints(&[0, 0, 0, -4, 3]);
    let h2 = LaurentPoly::from_terms([
        (3, q(1, 3)),
        (2, q(1, 1)),
        (1, q(1, 2)),
        (0, q(2, 3)),
        (-1, q(-1, 4)),
        (-2, q(1, 4)),
        (-3, q(-1, 24)),
    ]);
    (g1, h1, g2, h2)
}

/// Successive factor lists, each composing to the sporadic degree-24 polynomial, leading from
/// `(x^2/3 - 1)^3 ∘ h1` to `(3x^4 - 4x^3) ∘ h2`.
pub fn sporadic24_certificate() -> Vec<Vec<RatFunc>> {
    let (g1, h1, g2, h2) = sporadic24();
    let s2 = S::sqrt_integer(2);
    let nu = RatFunc::from(LaurentPoly::monomial(s2.clone(), 1));
    // h1 = (x + 1/x) p(x - 1/x) ∘ nu with p = x/2 + sqrt(2)
    let pr: RatFunc = Poly::from_coeffs(&[s2, q(1, 2)]).into();
    let cube_third: RatFunc = Poly::from_coeffs(&[q(-1, 1), q(1, 3)]).pow(3).into();
    let bridge = &rf(&x_plus_inv()) * &pr.compose(&rf(&x_minus_inv()));
    let quad = &RatFunc::from(Poly::from_ints(&[4, 0, 1])) * &pr.pow(2).unwrap();
    let quartic: RatFunc = Poly::from_ints(&[3, 4, 0, 0, 1]).into();
    let tail = rf(&LaurentPoly::from_terms([
        (1, q(1, 1)),
        (0, q(1, 1)),
        (-1, q(-1, 2)),
    ]));
    let cube: RatFunc = Poly::from_ints(&[0, 0, 0, 1]).into();
    let quartic_third: RatFunc =
        Poly::from_coeffs(&[q(0, 1), q(4, 3), q(0, 1), q(0, 1), q(1, 3)]).into();
    let shift_third: RatFunc = Poly::from_coeffs(&[q(4, 3), q(1, 3)]).into();
    let twisted = &RatFunc::x() * &shift_third.pow(3).unwrap();
    let g2r: RatFunc = g2.into();
    vec![
        vec![g1.into(), rf(&h1)],
        vec![
            cube_third.clone(),
            Poly::from_ints(&[0, 0, 1]).into(),
            bridge.compose(&nu),
        ],
        vec![cube_third.clone(), quad, rf(&x_minus_inv()).compose(&nu)],
        vec![cube_third, quartic, tail.clone()],
        vec![cube.clone(), quartic_third, tail.clone()],
        vec![twisted, cube.clone(), tail.clone()],
        vec![g2r.clone(), shift_third, cube, tail],
        vec![g2r, rf(&h2)],
    ]
}

pub fn instantiate(kind: &MoveKind) -> Result<Bidecomposition> {
    let b = construct(kind)?;
    assert!(
        b.verified,
        "catalogue identity failed to verify for {kind:?}"
    );
    Ok(b)
}

/// Builds the quadruple for `kind` and records whether it verifies, without asserting.
pub fn construct(kind: &MoveKind) -> Result<Bidecomposition> {
    let (g1, h1, g2, h2) = match kind {
        MoveKind::MonomialTwist { n, r, q } => {
            if *n == 0 || (*r).unsigned_abs().gcd(&(*n as u64)) != 1 {
                return bad(format!(
                    "MonomialTwist needs n >= 1 and gcd(r, n) = 1, got n = {n}, r = {r}"
                ));
            }
            if q.as_constant().is_some_and(|c| c.is_zero()) {
                return bad("MonomialTwist needs a nonzero q");
            }
            let xn = rf(&mono(*n as i64));
            let xr = rf(&mono(*r));
            let h1 = &xr * &q.compose(&xn);
            let g2 = &xr * &q.pow(*n as i64).unwrap();
            (xn.clone(), h1, g2, xn)
        }
        MoveKind::DicksonSwap { m, n } => {
            if *m == 0 || *n == 0 {
                return bad("DicksonSwap needs m, n >= 1");
            }
            (dk(*m), dk(*n), dk(*n), dk(*m))
        }
        MoveKind::DicksonBridge { n } => {
            if *n == 0 {
                return bad("DicksonBridge needs n >= 1");
            }
            (
                dk(*n),
                rf(&x_plus_inv()),
                rf(&x_plus_inv()),
                rf(&mono(*n as i64)),
            )
        }
        MoveKind::DicksonConjugate { n, zeta } => {
            if *n == 0 || !is_root_of(zeta, *n, 1) {
                return bad("DicksonConjugate needs zeta^n = 1");
            }
            let h2 = LaurentPoly::from_terms([(1, zeta.clone()), (-1, zeta.inv().unwrap())]);
            (dk(*n), rf(&x_plus_inv()), dk(*n), rf(&h2))
        }
        MoveKind::DicksonNegation { d, m, n, zeta } => {
            if *d < 2 || *m == 0 || *n == 0 || m.gcd(n) != 1 {
                return bad("DicksonNegation needs d >= 2 and coprime m, n >= 1");
            }
            if !is_root_of(zeta, d * m * n, -1) {
                return bad("DicksonNegation needs zeta^(dmn) = -1");
            }
            let zm = zeta.pow(*m as i64);
            let h2 = LaurentPoly::from_terms([
                (*m as i64, zm.clone()),
                (-(*m as i64), zm.inv().unwrap()),
            ]);
            (dk(d * m), rf(&sym_mono(*n as i64)), -&dk(d * n), rf(&h2))
        }
        MoveKind::QuadraticBridge { p } => {
            if p.is_zero() {
                return bad("QuadraticBridge needs a nonzero p");
            }
            let pr: RatFunc = p.clone().into();
            let h1 = &rf(&x_minus_inv()) * &pr.compose(&rf(&x_plus_inv()));
            let g2 = &RatFunc::from(Poly::from_ints(&[-4, 0, 1])) * &pr.pow(2).unwrap();
            (
                Poly::from_ints(&[0, 0, 1]).into(),
                h1,
                g2,
                rf(&x_plus_inv()),
            )
        }
        MoveKind::Sporadic24 => {
            let (g1, h1, g2, h2) = sporadic24();
            (g1.into(), rf(&h1), g2.into(), rf(&h2))
        }
        MoveKind::UniqueBinomial { n, r } => {
            if *r == 0 || r >= n || r.gcd(n) != 1 {
                return bad("UniqueBinomial needs 0 < r < n with gcd(r, n) = 1");
            }
            let (ni, ri) = (*n as i64, *r as i64);
            let h1 = LaurentPoly::from_ints(&[(ni - ri, 1), (-ri, 1)]);
            let xr = rf(&mono(-ri));
            let g2 = &xr * &RatFunc::from(Poly::from_ints(&[1, 1]).pow(*n));
            (rf(&mono(ni)), rf(&h1), g2, rf(&mono(ni)))
        }
        MoveKind::UniqueNegation { n, zeta } => {
            if *n == 0 || !is_root_of(zeta, *n, -1) {
                return bad("UniqueNegation needs zeta^n = -1");
            }
            let h2 = LaurentPoly::from_terms([(1, zeta.clone()), (-1, zeta.inv().unwrap())]);
            (dk(*n), rf(&x_plus_inv()), -&dk(*n), rf(&h2))
        }
        MoveKind::AZTemplate(case) => {
            let t = construct_twisted(case)?;
            let g: RatFunc = t.g.clone().into();
            (g.clone(), t.h1, g.scale(&t.gamma), t.h2)
        }
        MoveKind::OddRemainder { m, n, gamma, g } => {
            if *m == 0 || *n == 0 || !is_root_of(gamma, *n, -1) {
                return bad("OddRemainder needs m, n >= 1 and gamma^n = -1");
            }
            if !is_odd_poly(g) {
                return bad("OddRemainder needs an odd G");
            }
            let s = gamma.try_nth_root(2).ok_or_else(|| {
                CatalogueError::BadParameters(format!("no square root of {gamma}"))
            })?;
            let i = s.pow(*n as i64);
            let mi = *m as i64;
            let h1 = LaurentPoly::from_terms([(mi, s.inv().unwrap()), (-mi, s.clone())]);
            let inner = LaurentPoly::from_terms([(1, i.inv().unwrap()), (-1, i)]);
            let gr: RatFunc = g.clone().into();
            (
                gr.compose(&dk(*n)),
                rf(&h1),
                gr.compose(&rf(&inner)),
                rf(&mono(mi * *n as i64)),
            )
        }
    };
    Ok(Bidecomposition::new(g1, h1, g2, h2))
}

pub fn instantiate_twisted(case: &AzCase) -> Result<TwistedPair> {
    let pair = construct_twisted(case)?;
    assert!(pair.verify(), "twisted pair failed to verify for {case:?}");
    Ok(pair)
}

/// Builds the twisted pair for `case` without asserting that it verifies.
pub fn construct_twisted(case: &AzCase) -> Result<TwistedPair> {
    let pair = match case {
        AzCase::Scaled { alpha, r, n, p, h2 } => {
            if !is_root_of(alpha, *n, 1) {
                return bad("case 1 needs alpha^n = 1");
            }
            if p.is_zero() || h2.is_constant() {
                return bad("case 1 needs nonzero p and nonconstant h2");
            }
            let gamma = alpha.pow(*r as i64);
            if gamma.is_one() {
                return bad("case 1 needs alpha^r != 1");
            }
            TwistedPair {
                g: twist_poly(*r, *n, p),
                h1: h2.scale(alpha),
                h2: h2.clone(),
                gamma,
            }
        }
        AzCase::Rotated { m, n, alpha, p } => {
            if *m == 0 || *n == 0 || !is_root_of(alpha, m * n, -1) {
                return bad("case 2 needs alpha^(nm) = -1");
            }
            if p.is_zero() {
                return bad("case 2 needs nonzero p");
            }
            let big_g = twist_poly(1, 2, p);
            let h1 = sym_mono(*m as i64);
            TwistedPair {
                g: big_g.compose(&dickson1(*n)),
                h2: rf(&h1.scale_var(alpha)),
                h1: rf(&h1),
                gamma: S::from_int(-1),
            }
        }
        AzCase::Sheared { m, n, r, alpha, p } => {
            if *m == 0 || !is_root_of(alpha, *n, 1) || *alpha == S::from_int(-1) {
                return bad("case 3 needs alpha^n = 1 and alpha != -1");
            }
            if p.is_zero() {
                return bad("case 3 needs nonzero p");
            }
            let gamma = alpha.pow(*r as i64);
            if gamma.is_one() {
                return bad("case 3 needs alpha^r != 1");
            }
            let s = alpha.try_nth_root(2).ok_or_else(|| {
                CatalogueError::BadParameters(format!("no square root of {alpha}"))
            })?;
            let half = &(&S::one() - alpha) * &q(1, 2);
            let inner = Poly::from_coeffs(&[S::from_int(-2), S::zero(), half]);
            let mi = *m as i64;
            TwistedPair {
                g: twist_poly(*r, *n, p).compose(&inner),
                h1: rf(&sym_mono(mi)),
                h2: rf(&LaurentPoly::from_terms([
                    (mi, s.inv().unwrap()),
                    (-mi, -&s.inv().unwrap()),
                ])),
                gamma,
            }
        }
    };
    Ok(pair)
}

/// The five expressions of the reduction of a conjugate Dickson pair, each a factor list composing
/// to `x^n + x^-n`: `D_n ∘ (zeta x + 1/(zeta x))`, `D_n ∘ (x + 1/x) ∘ zeta x`,
/// `(x + 1/x) ∘ x^n ∘ zeta x`, `(x + 1/x) ∘ x^n`, `D_n ∘ (x + 1/x)`.
pub fn dickson_conjugate_steps(n: u32, zeta: &CycloScalar) -> Vec<Vec<RatFunc>> {
    let zx = rf(&LaurentPoly::monomial(zeta.clone(), 1));
    let h2 = LaurentPoly::from_terms([(1, zeta.clone()), (-1, zeta.inv().unwrap())]);
    let xn = rf(&mono(n as i64));
    vec![
        vec![dk(n), rf(&h2)],
        vec![dk(n), rf(&x_plus_inv()), zx.clone()],
        vec![rf(&x_plus_inv()), xn.clone(), zx],
        vec![rf(&x_plus_inv()), xn],
        vec![dk(n), rf(&x_plus_inv())],
    ]
}

/// `q = 4i p(2(x - 1)/(x + 1))/(x + 1)`.
pub fn conjugated_q(p: &Poly) -> RatFunc {
    let m = RatFunc::new(Poly::from_ints(&[-2, 2]), Poly::from_ints(&[1, 1])).unwrap();
    let inv = RatFunc::new(Poly::one(), Poly::from_ints(&[1, 1])).unwrap();
    (&RatFunc::from(p.clone()).compose(&m) * &inv).scale(&(&S::i() * &S::from_int(4)))
}

/// Both sides of `x q(x^2) = H1 ∘ (x + i)/(x - i)` with `H1 = (x - 1/x) p(x + 1/x)`.
pub fn q2_sides(p: &Poly) -> (RatFunc, RatFunc) {
    let qq = conjugated_q(p);
    let lhs = &RatFunc::x() * &qq.compose(&rf(&mono(2)));
    let h1 = &rf(&x_minus_inv()) * &RatFunc::from(p.clone()).compose(&rf(&x_plus_inv()));
    let i = S::i();
    let mu = RatFunc::new(
        Poly::from_coeffs(&[i.clone(), S::one()]),
        Poly::from_coeffs(&[-i, S::one()]),
    )
    .unwrap();
    (lhs, h1.compose(&mu))
}

/// Both sides of `x q(x)^2 = G2 ∘ (2x - 2)/(x + 1)` with `G2 = (x^2 - 4) p^2`.
pub fn q3_sides(p: &Poly) -> (RatFunc, RatFunc) {
    let qq = conjugated_q(p);
    let lhs = &RatFunc::x() * &qq.pow(2).unwrap();
    let g2 =
        &RatFunc::from(Poly::from_ints(&[-4, 0, 1])) * &RatFunc::from(p.clone()).pow(2).unwrap();
    let mu = RatFunc::new(Poly::from_ints(&[-2, 2]), Poly::from_ints(&[1, 1])).unwrap();
    (lhs, g2.compose(&mu))
}

/// Both sides of `x q(x^2) ∘ i(x - 1)/(x + 1) = i (x - 1)/(x + 1) Q((x + 1)^2/(4x))` for
/// `q = Q(1/(x + 1))` with `Q(0) = 0`.
pub fn laurent_q_sides(big_q: &Poly) -> Result<(RatFunc, RatFunc)> {
    if !big_q.coeff(0).is_zero() {
        return bad("Q must vanish at 0");
    }
    let qr: RatFunc = big_q.clone().into();
    let inv = RatFunc::new(Poly::one(), Poly::from_ints(&[1, 1])).unwrap();
    let small_q = qr.compose(&inv);
    let i = S::i();
    let ratio = RatFunc::new(Poly::from_ints(&[-1, 1]), Poly::from_ints(&[1, 1])).unwrap();
    let outer = &RatFunc::x() * &small_q.compose(&rf(&mono(2)));
    let lhs = outer.compose(&ratio.scale(&i));
    let arg = RatFunc::new(Poly::from_ints(&[1, 2, 1]), Poly::from_ints(&[0, 4])).unwrap();
    let rhs = &ratio.scale(&i) * &qr.compose(&arg);
    Ok((lhs, rhs))
}

/// `G` with `g1 = G ∘ x^(L/n)` and `g2 = G ∘ x^(L/m)`, `L = lcm(n, m)`.
pub fn classify_type2(g1: &LaurentPoly, n: u32, g2: &LaurentPoly, m: u32) -> Result<LaurentPoly> {
    if n == 0 || m == 0 {
        return Err(CatalogueError::PreconditionViolated(
            "monomial degrees must be positive".into(),
        ));
    }
    let f = g1.substitute_power(n as i64);
    if f != g2.substitute_power(m as i64) {
        return Err(CatalogueError::PreconditionViolated(
            "g1 ∘ x^n differs from g2 ∘ x^m".into(),
        ));
    }
    let l = n.lcm(&m) as i64;
    let big_g = f.divide_exponents(l).expect("composition lies in C[x^lcm]");
    assert_eq!(big_g.substitute_power(l / n as i64), *g1);
    assert_eq!(big_g.substitute_power(l / m as i64), *g2);
    Ok(big_g)
}

/// How `g1 ∘ h1 = g2 ∘ x^n` (with `g1` a polynomial) decomposes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum MixedWitness {
    /// `h1 = A ∘ x^n` and `g2 = g1 ∘ A`.
    Trivial { a: LaurentPoly },
    /// `g1 = G ∘ x^(n/r) ∘ mu`, `h1 = mu^-1 ∘ x^e p(x^n)`, `g2 = G ∘ x^(e/r) p(x)^(n/r)`.
    Case1 {
        g: Poly,
        mu: Mobius,
        e: i64,
        p: Poly,
        r: u32,
    },
    /// `g1 = G ∘ D_(n/r) ∘ mu`, `h1 = mu^-1 ∘ (x^e + x^-e) ∘ alpha x`,
    /// `g2 = G ∘ (x^(e/r) + x^(-e/r)) ∘ alpha^n x`.
    Case2 {
        g: Poly,
        mu: Mobius,
        e: i64,
        alpha: CycloScalar,
        r: u32,
    },
}

pub fn classify_mixed(
    g1: &Poly,
    h1: &LaurentPoly,
    g2: &LaurentPoly,
    n: u32,
) -> Result<MixedWitness> {
    if n < 2 {
        return Err(CatalogueError::PreconditionViolated(
            "n must be at least 2".into(),
        ));
    }
    let f = RatFunc::from(g1.clone()).compose(&rf(h1));
    if f != rf(&g2.substitute_power(n as i64)) {
        return Err(CatalogueError::PreconditionViolated(
            "g1 ∘ h1 differs from g2 ∘ x^n".into(),
        ));
    }
    if h1.is_constant() {
        return Err(DecomposeError::ConstantInput.into());
    }
    let ni = n as i64;
    if let Some(a) = h1.divide_exponents(ni) {
        let back = RatFunc::from(g1.clone()).compose(&rf(&a));
        assert_eq!(back, rf(g2));
        return Ok(MixedWitness::Trivial { a });
    }
    let w = h1.constant_term();
    let k = h1 - &LaurentPoly::constant(w.clone());
    let e = k.min_exp().unwrap();
    if k.terms().all(|(x, _)| (x - e) % ni == 0) {
        let p = Poly::from_laurent(k.shift(-e).divide_exponents(ni).unwrap()).unwrap();
        let r = e.unsigned_abs().gcd(&(n as u64)) as u32;
        let mu = Mobius::affine(S::one(), -&w);
        let lifted = RatFunc::from(g1.clone()).compose(&mu.inverse().to_ratfunc());
        let big_g = lifted
            .as_laurent()
            .and_then(|l| l.divide_exponents((n / r) as i64))
            .and_then(Poly::from_laurent);
        if let Some(big_g) = big_g {
            let g1t = rf(&mono((n / r) as i64));
            let g2t = &rf(&mono(e / r as i64)) * &RatFunc::from(p.pow(n / r));
            let gr: RatFunc = big_g.clone().into();
            if gr.compose(&g2t) == rf(g2) {
                assert_eq!(
                    gr.compose(&g1t).compose(&mu.to_ratfunc()),
                    g1.clone().into()
                );
                assert_eq!(
                    mu.inverse()
                        .to_ratfunc()
                        .compose(&rf(&k))
                        .compose(&RatFunc::x()),
                    rf(h1)
                );
                return Ok(MixedWitness::Case1 {
                    g: big_g,
                    mu,
                    e,
                    p,
                    r,
                });
            }
        }
    }
    if k.num_terms() == 2 && k.max_exp() == Some(-e) && e < 0 {
        let e = -e;
        let (u, v) = (k.coeff(e), k.coeff(-e));
        let prod = &u * &v;
        for a in prod.all_nth_roots(2).unwrap_or_default() {
            let ratio = u.checked_div(&a).unwrap();
            for alpha in ratio.all_nth_roots(e as u32).unwrap_or_default() {
                let mu_inv = Mobius::affine(a.clone(), w.clone());
                let mu = mu_inv.inverse();
                let r = (e as u64).gcd(&(n as u64)) as u32;
                let lifted = RatFunc::from(g1.clone()).compose(&mu_inv.to_ratfunc());
                let Some(lifted) = lifted.as_laurent() else {
                    continue;
                };
                let Some(big_g) =
                    left_divide(&lifted, dickson1(n / r).as_laurent()).and_then(|x| x.as_poly())
                else {
                    continue;
                };
                let er = e / r as i64;
                let g2t = sym_mono(er).scale_var(&alpha.pow(ni));
                let gr: RatFunc = big_g.clone().into();
                let h1t = sym_mono(e).scale_var(&alpha);
                if gr.compose(&rf(&g2t).compose(&rf(&mono(1)))) == rf(g2)
                    && mu_inv.to_ratfunc().compose(&rf(&h1t)) == rf(h1)
                {
                    assert_eq!(
                        gr.compose(&dk(n / r)).compose(&mu.to_ratfunc()),
                        g1.clone().into()
                    );
                    return Ok(MixedWitness::Case2 {
                        g: big_g,
                        mu,
                        e,
                        alpha,
                        r,
                    });
                }
            }
        }
    }
    Err(CatalogueError::NotClassified(
        "no Type 1 / Type 2 template matches".into(),
    ))
}

/// Which two-pole template a pair of Type 1 decompositions follows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "template")]
pub enum Type1Case {
    /// `(x^n, x^r p(x)^n)` over `(x^r p(x^n), x^n)`.
    Monomial {
        n: u32,
        r: i64,
        p: Poly,
    },
    /// `(x^2, (x^2 - 4) p^2)` over `((x - 1/x) p(x + 1/x), x + 1/x)`.
    Quadratic {
        p: Poly,
    },
    /// `(D_m, D_n)` over `(D_n, D_m)`.
    Dickson {
        m: u32,
        n: u32,
    },
    Sporadic,
    /// `(D_dm, -D_dn)` over `(x^n + x^-n, (zeta x)^m + (zeta x)^-m)`.
    Negation {
        d: u32,
        m: u32,
        n: u32,
        zeta: CycloScalar,
    },
}

impl Type1Case {
    pub fn index(&self) -> usize {
        match self {
            Type1Case::Monomial { .. } => 1,
            Type1Case::Quadratic { .. } => 2,
            Type1Case::Dickson { .. } => 3,
            Type1Case::Sporadic => 4,
            Type1Case::Negation { .. } => 5,
        }
    }
}

/// `g1 = G ∘ G1 ∘ mu1`, `g2 = G ∘ G2 ∘ mu2`, `h1 = mu1^-1 ∘ H1 ∘ H`, `h2 = mu2^-1 ∘ H2 ∘ H`.
/// When `swapped` is set the roles of the two input pairs are exchanged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Type1Witness {
    pub case: Type1Case,
    pub swapped: bool,
    pub g: Poly,
    pub h: RatFunc,
    pub mu1: Mobius,
    pub mu2: Mobius,
    pub g1t: Poly,
    pub g2t: Poly,
    pub h1t: LaurentPoly,
    pub h2t: LaurentPoly,
}

impl Type1Witness {
    fn identities(&self) -> usize {
        [
            self.g == Poly::x(),
            self.h == RatFunc::x(),
            self.mu1.is_identity(),
            self.mu2.is_identity(),
        ]
        .iter()
        .filter(|b| **b)
        .count()
    }

    /// Reassembles `(g1, h1, g2, h2)` in the caller's order.
    pub fn reassemble(&self) -> (RatFunc, RatFunc, RatFunc, RatFunc) {
        let big_g: RatFunc = self.g.clone().into();
        let a = big_g
            .compose(&self.g1t.clone().into())
            .compose(&self.mu1.to_ratfunc());
        let b = self
            .mu1
            .inverse()
            .to_ratfunc()
            .compose(&rf(&self.h1t))
            .compose(&self.h);
        let c = big_g
            .compose(&self.g2t.clone().into())
            .compose(&self.mu2.to_ratfunc());
        let d = self
            .mu2
            .inverse()
            .to_ratfunc()
            .compose(&rf(&self.h2t))
            .compose(&self.h);
        if self.swapped {
            (c, d, a, b)
        } else {
            (a, b, c, d)
        }
    }
}

/// Template data on the residues `B1`, `B2`: `B_i = mu_inv_i ∘ H_i ∘ lambda`.
struct Template {
    case: Type1Case,
    lambda: Mobius,
    mu1_inv: Mobius,
    mu2_inv: Mobius,
    g1t: Poly,
    g2t: Poly,
    h1t: LaurentPoly,
    h2t: LaurentPoly,
}

fn lp_exact_div(a: &LaurentPoly, b: &LaurentPoly) -> Option<LaurentPoly> {
    let (ma, mb) = (a.min_exp()?, b.min_exp()?);
    let pa = Poly::from_laurent(a.shift(-ma))?;
    let pb = Poly::from_laurent(b.shift(-mb))?;
    let (qq, r) = pa.divrem(&pb).ok()?;
    r.is_zero().then(|| qq.into_laurent().shift(ma - mb))
}

/// `P` with `P(x + 1/x) = s`.
fn symmetric_to_poly(s: &LaurentPoly) -> Option<Poly> {
    if s.is_constant() {
        return Some(Poly::constant(s.constant_term()));
    }
    Poly::from_laurent(left_divide_laurent(s, &x_plus_inv())?)
}

/// `u x^k + v x^-k + w` with `k > 0`, `u v != 0`.
fn two_sided(b: &LaurentPoly) -> Option<(i64, S, S, S)> {
    let k = b.max_exp()?;
    if k <= 0 || b.min_exp() != Some(-k) || b.terms().any(|(e, _)| e != k && e != -k && e != 0) {
        return None;
    }
    Some((k, b.coeff(k), b.coeff(-k), b.constant_term()))
}

fn t_monomial(b1: &LaurentPoly, b2: &LaurentPoly) -> Vec<Template> {
    let Some((c, n)) = b2.as_shifted_monomial() else {
        return vec![];
    };
    if n < 1 {
        return vec![];
    }
    let w1 = b1.constant_term();
    let k = b1 - &LaurentPoly::constant(w1.clone());
    let Some(e) = k.min_exp() else { return vec![] };
    if k.terms().any(|(x, _)| (x - e) % n != 0) || e.unsigned_abs().gcd(&(n as u64)) != 1 {
        return vec![];
    }
    let p = Poly::from_laurent(k.shift(-e).divide_exponents(n).unwrap()).unwrap();
    let Some(g2t) = Poly::from_laurent(&mono(e) * &p.pow(n as u32).into_laurent()) else {
        return vec![];
    };
    vec![Template {
        case: Type1Case::Monomial {
            n: n as u32,
            r: e,
            p,
        },
        lambda: Mobius::identity(),
        mu1_inv: Mobius::affine(S::one(), w1),
        mu2_inv: Mobius::affine(c, b2.constant_term()),
        g1t: Poly::from_laurent(mono(n)).unwrap(),
        g2t,
        h1t: k,
        h2t: mono(n),
    }]
}

fn t_quadratic(b1: &LaurentPoly, b2: &LaurentPoly) -> Vec<Template> {
    let Some((1, u, v, w2)) = two_sided(b2) else {
        return vec![];
    };
    let mut out = Vec::new();
    for theta in u
        .checked_div(&v)
        .unwrap()
        .all_nth_roots(2)
        .unwrap_or_default()
    {
        let a = u.checked_div(&theta).unwrap();
        let w1 = b1.constant_term();
        let k = &b1.scale_var(&theta.inv().unwrap()) - &LaurentPoly::constant(w1.clone());
        if k.is_zero() || k.invert_var() != -&k {
            continue;
        }
        let Some(p) = lp_exact_div(&k, &x_minus_inv()).and_then(|s| symmetric_to_poly(&s)) else {
            continue;
        };
        out.push(Template {
            g2t: &Poly::from_ints(&[-4, 0, 1]) * &p.pow(2),
            case: Type1Case::Quadratic { p },
            lambda: Mobius::affine(theta, S::zero()),
            mu1_inv: Mobius::affine(S::one(), w1),
            mu2_inv: Mobius::affine(a, w2.clone()),
            g1t: Poly::from_ints(&[0, 0, 1]),
            h1t: k,
            h2t: x_plus_inv(),
        });
    }
    out
}

/// `(a, b)` with `c = a D_k + b`.
fn dickson_affine(c: &Poly, k: u32) -> Option<(S, S)> {
    let d = dickson1(k);
    if c.deg() != k as u64 {
        return None;
    }
    let a = c.lead();
    let rest = c - &d.scale(&a);
    (rest.deg() == 0).then(|| (a, rest.coeff(0)))
}

fn t_dickson(b1: &LaurentPoly, b2: &LaurentPoly) -> Vec<Template> {
    let (Some(p1), Some(p2)) = (
        Poly::from_laurent(b1.clone()),
        Poly::from_laurent(b2.clone()),
    ) else {
        return vec![];
    };
    let (n, m) = (p1.deg() as u32, p2.deg() as u32);
    if n == 0 || m == 0 || n.gcd(&m) != 1 {
        return vec![];
    }
    let reference = if n >= m { &p1 } else { &p2 };
    let k = reference.deg() as i64;
    let lead = reference.lead();
    let t = reference
        .coeff(k - 1)
        .checked_div(&(&lead * &S::from_int(k)))
        .unwrap();
    let thetas = if k >= 3 {
        let ratio = reference.coeff(k - 2).checked_div(&lead).unwrap();
        let den = &(&(&t * &t) * &S::from_int(k * (k - 1) / 2)) - &ratio;
        if den.is_zero() {
            return vec![];
        }
        let sq = S::from_int(k).checked_div(&den).unwrap();
        sq.try_nth_root(2).into_iter().collect::<Vec<_>>()
    } else {
        vec![S::one()]
    };
    let mut out = Vec::new();
    for theta in thetas {
        let lambda = Mobius::affine(theta.clone(), &t * &theta);
        let back = Poly::from_laurent(lambda.inverse().to_ratfunc().as_laurent().unwrap()).unwrap();
        let (Some((a1, c1)), Some((a2, c2))) = (
            dickson_affine(&p1.compose(&back), n),
            dickson_affine(&p2.compose(&back), m),
        ) else {
            continue;
        };
        out.push(Template {
            case: Type1Case::Dickson { m, n },
            lambda,
            mu1_inv: Mobius::affine(a1, c1),
            mu2_inv: Mobius::affine(a2, c2),
            g1t: dickson1(m),
            g2t: dickson1(n),
            h1t: dickson1(n).into_laurent(),
            h2t: dickson1(m).into_laurent(),
        });
    }
    out
}

fn t_sporadic(b1: &LaurentPoly, b2: &LaurentPoly) -> Vec<Template> {
    let (g1s, h1s, g2s, h2s) = sporadic24();
    if b1.max_exp() != Some(2)
        || b1.min_exp() != Some(-2)
        || b2.max_exp() != Some(3)
        || b2.min_exp() != Some(-3)
    {
        return vec![];
    }
    let (c2, c1) = (b1.coeff(2), b1.coeff(1));
    if c1.is_zero() {
        return vec![];
    }
    let theta = (&c2 * &S::from_int(2)).checked_div(&c1).unwrap();
    let a1 = c2.checked_div(&(&theta * &theta)).unwrap();
    let w1 = b1.constant_term();
    if *b1 != &h1s.scale_var(&theta).scale(&a1) + &LaurentPoly::constant(w1.clone()) {
        return vec![];
    }
    let t2 = h2s.scale_var(&theta);
    let a2 = b2.lead().checked_div(&t2.lead()).unwrap();
    let w2 = &b2.constant_term() - &(&a2 * &t2.constant_term());
    if *b2 != &t2.scale(&a2) + &LaurentPoly::constant(w2.clone()) {
        return vec![];
    }
    vec![Template {
        case: Type1Case::Sporadic,
        lambda: Mobius::affine(theta, S::zero()),
        mu1_inv: Mobius::affine(a1, w1),
        mu2_inv: Mobius::affine(a2, w2),
        g1t: g1s,
        g2t: g2s,
        h1t: h1s,
        h2t: h2s,
    }]
}

fn t_negation(b1: &LaurentPoly, b2: &LaurentPoly, max_outer: u64) -> Vec<Template> {
    let (Some((n, u1, v1, w1)), Some((m, u2, v2, w2))) = (two_sided(b1), two_sided(b2)) else {
        return vec![];
    };
    if n.gcd(&m) != 1 {
        return vec![];
    }
    let mut out = Vec::new();
    let thetas = u1
        .checked_div(&v1)
        .unwrap()
        .all_nth_roots(2 * n as u32)
        .unwrap_or_default();
    let a2s = (&u2 * &v2).all_nth_roots(2).unwrap_or_default();
    for theta in &thetas {
        let a1 = u1.checked_div(&theta.pow(n)).unwrap();
        for a2 in &a2s {
            let z = u2.checked_div(&(a2 * &theta.pow(m))).unwrap();
            let Some(zeta) = z.try_nth_root(m as u32) else {
                continue;
            };
            for d in 2..=(max_outer / m as u64).max(1) as u32 {
                if z.pow(d as i64 * n) != S::from_int(-1) {
                    continue;
                }
                let zm = zeta.pow(m);
                out.push(Template {
                    case: Type1Case::Negation {
                        d,
                        m: m as u32,
                        n: n as u32,
                        zeta: zeta.clone(),
                    },
                    lambda: Mobius::affine(theta.clone(), S::zero()),
                    mu1_inv: Mobius::affine(a1.clone(), w1.clone()),
                    mu2_inv: Mobius::affine(a2.clone(), w2.clone()),
                    g1t: dickson1(d * m as u32),
                    g2t: -&dickson1(d * n as u32),
                    h1t: sym_mono(n),
                    h2t: LaurentPoly::from_terms([(m, zm.clone()), (-m, zm.inv().unwrap())]),
                });
            }
        }
    }
    out
}

/// Completes a template by solving for `G` and checks all four factorizations.
fn finish(
    g1: &Poly,
    h1: &LaurentPoly,
    g2: &Poly,
    h2: &LaurentPoly,
    base: &RatFunc,
    t: Template,
    swapped: bool,
) -> Option<Type1Witness> {
    let lifted = RatFunc::from(g1.clone())
        .compose(&t.mu1_inv.to_ratfunc())
        .as_laurent()?;
    let big_g = left_divide(&lifted, t.g1t.as_laurent())?.as_poly()?;
    let h = t.lambda.to_ratfunc().compose(base);
    let w = Type1Witness {
        case: t.case,
        swapped: false,
        g: big_g,
        h,
        mu1: t.mu1_inv.inverse(),
        mu2: t.mu2_inv.inverse(),
        g1t: t.g1t,
        g2t: t.g2t,
        h1t: t.h1t,
        h2t: t.h2t,
    };
    let (a, b, c, d) = w.reassemble();
    if a != RatFunc::from(g1.clone())
        || b != rf(h1)
        || c != RatFunc::from(g2.clone())
        || d != rf(h2)
    {
        return None;
    }
    Some(Type1Witness { swapped, ..w })
}

/// Identifies the two-pole template behind `g1 ∘ h1 = g2 ∘ h2` with polynomial `g1`, `g2`.
///
/// All common right factors `H` of `h1` and `h2` are tried; among verified witnesses the one with
/// the most identity components among `G`, `H`, `mu1`, `mu2` wins, then the lowest template index.
pub fn classify_two_type1(
    g1: &Poly,
    h1: &LaurentPoly,
    g2: &Poly,
    h2: &LaurentPoly,
) -> Result<Type1Witness> {
    let lhs = RatFunc::from(g1.clone()).compose(&rf(h1));
    if lhs != RatFunc::from(g2.clone()).compose(&rf(h2)) {
        return Err(CatalogueError::PreconditionViolated(
            "g1 ∘ h1 differs from g2 ∘ h2".into(),
        ));
    }
    if h1.is_constant() || h2.is_constant() || g1.deg() == 0 {
        return Err(DecomposeError::ConstantInput.into());
    }
    let mut dec = Decomposer::new(Limits::default());
    let mut candidates: Vec<LaurentPoly> = dec
        .right_factors(h1)?
        .iter()
        .map(|(_, c)| c.clone())
        .collect();
    candidates.push(canonical_right(h1).1);
    candidates.push(LaurentPoly::x());
    candidates.sort_by_key(|c| std::cmp::Reverse(c.degree()));
    let max_outer = g1.deg().max(g2.deg());
    let mut best: Option<Type1Witness> = None;
    for c in &candidates {
        let (Some(a1), Some(a2)) = (left_divide_laurent(h1, c), left_divide_laurent(h2, c)) else {
            continue;
        };
        for flip in [false, true] {
            let (b1, b2) = if flip {
                (a1.invert_var(), a2.invert_var())
            } else {
                (a1.clone(), a2.clone())
            };
            let base = if flip { rf(c).inv().unwrap() } else { rf(c) };
            for swapped in [false, true] {
                let (p1, p2) = if swapped { (&b2, &b1) } else { (&b1, &b2) };
                let (gg1, hh1, gg2, hh2) = if swapped {
                    (g2, h2, g1, h1)
                } else {
                    (g1, h1, g2, h2)
                };
                let templates = t_monomial(p1, p2)
                    .into_iter()
                    .chain(t_quadratic(p1, p2))
                    .chain(t_dickson(p1, p2))
                    .chain(t_sporadic(p1, p2))
                    .chain(t_negation(p1, p2, max_outer));
                for t in templates {
                    if let Some(w) = finish(gg1, hh1, gg2, hh2, &base, t, swapped) {
                        let better = match &best {
                            None => true,
                            Some(b) => {
                                (w.identities(), std::cmp::Reverse(w.case.index()))
                                    > (b.identities(), std::cmp::Reverse(b.case.index()))
                            }
                        };
                        if better {
                            best = Some(w);
                        }
                    }
                }
            }
        }
    }
    let w =
        best.ok_or_else(|| CatalogueError::NotClassified("no two-pole template matches".into()))?;
    let (a, b, c, d) = w.reassemble();
    assert!(a == g1.clone().into() && b == rf(h1) && c == g2.clone().into() && d == rf(h2));
    Ok(w)
}

/// Result of [`classify`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape")]
pub enum Classification {
    /// Both pairs end in a monomial: `g1 = G ∘ x^(L/n)`, `g2 = G ∘ x^(L/m)`.
    Type2 {
        g: LaurentPoly,
        n: u32,
        m: u32,
    },
    /// One pair ends in `x^n`; `swapped` records that it was the first pair.
    Mixed {
        witness: MixedWitness,
        n: u32,
        swapped: bool,
    },
    TwoType1 {
        witness: Type1Witness,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub tag: String,
    /// `a` when the pairs were classified as `(g_i, h_i(x - a))`, which happens only for polynomial
    /// composites that the unshifted pairs do not match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_shift: Option<CycloScalar>,
    pub normalized: [NormalizedPair; 2],
    pub classification: Classification,
}

fn type2_degree(p: &NormalizedPair) -> Option<u32> {
    let (c, e) = p.h.as_laurent()?.as_shifted_monomial()?;
    (c.is_one() && e > 0 && p.h.as_laurent()?.constant_term().is_zero()).then_some(e as u32)
}

/// Normalizes both pairs of `g1 ∘ h1 = g2 ∘ h2` and dispatches to the matching classifier.
///
/// A polynomial composite may need a change of variable on the inside before the templates apply
/// (`(x + 1)^3 - 1` is a monomial only after `x -> x - 1`). When the direct attempt is not
/// classified, the pairs are retried with the shift that removes the subleading term of the
/// composite; a right factor without that term yields a composite without it, so one shift serves
/// both pairs.
pub fn classify(g1: &RatFunc, h1: &RatFunc, g2: &RatFunc, h2: &RatFunc) -> Result<ClassifyReport> {
    if !verify_bidecomposition(g1, h1, g2, h2) {
        return Err(CatalogueError::PreconditionViolated(
            "g1 ∘ h1 differs from g2 ∘ h2".into(),
        ));
    }
    let err = match classify_direct(g1, h1, g2, h2) {
        Err(e @ CatalogueError::NotClassified(_)) => e,
        other => return other,
    };
    let Some(f) = g1.compose(h1).as_poly() else {
        return Err(err);
    };
    let n = f.deg() as i64;
    let sub = f.coeff(n - 1);
    if n < 2 || sub.is_zero() {
        return Err(err);
    }
    let a = sub
        .checked_div(&(&f.lead() * &S::from_int(n)))
        .expect("nonzero leading coefficient");
    let nu = RatFunc::from(Poly::from_coeffs(&[-&a, S::one()]));
    let mut report = classify_direct(g1, &h1.compose(&nu), g2, &h2.compose(&nu))?;
    report.inner_shift = Some(a);
    Ok(report)
}

fn classify_direct(
    g1: &RatFunc,
    h1: &RatFunc,
    g2: &RatFunc,
    h2: &RatFunc,
) -> Result<ClassifyReport> {
    let p1 = normalize_decomposition(g1, h1)?;
    let p2 = normalize_decomposition(g2, h2)?;
    let n1 = if p1.kind == PairKind::Type2 {
        type2_degree(&p1)
    } else {
        None
    };
    let n2 = if p2.kind == PairKind::Type2 {
        type2_degree(&p2)
    } else {
        None
    };
    let laurent = |r: &RatFunc| {
        r.as_laurent().ok_or(CatalogueError::Decompose(
            DecomposeError::NotLaurentComposition,
        ))
    };
    let poly = |r: &RatFunc| {
        r.as_poly()
            .ok_or_else(|| CatalogueError::NotClassified("outer factor is not a polynomial".into()))
    };
    let (tag, classification) = match (n1, n2) {
        (Some(n), Some(m)) => {
            let g = classify_type2(&laurent(&p1.g)?, n, &laurent(&p2.g)?, m)?;
            ("Lbidec.1".to_string(), Classification::Type2 { g, n, m })
        }
        (None, Some(n)) | (Some(n), None) => {
            let swapped = n1.is_some();
            let (a, b) = if swapped { (&p2, &p1) } else { (&p1, &p2) };
            let (ga, ha) = (poly(&a.g)?, laurent(&a.h)?);
            if n < 2 {
                return Err(CatalogueError::NotClassified(
                    "degree-one right factor".into(),
                ));
            }
            let witness = classify_mixed(&ga, &ha, &laurent(&b.g)?, n)?;
            let tag = if matches!(witness, MixedWitness::Case2 { .. }) {
                "Lbidec.6"
            } else {
                "Lbidec.1"
            };
            (
                tag.to_string(),
                Classification::Mixed {
                    witness,
                    n,
                    swapped,
                },
            )
        }
        (None, None) => {
            let w = classify_two_type1(
                &poly(&p1.g)?,
                &laurent(&p1.h)?,
                &poly(&p2.g)?,
                &laurent(&p2.h)?,
            )?;
            (
                format!("Lbidec.{}", w.case.index()),
                Classification::TwoType1 { witness: w },
            )
        }
    };
    Ok(ClassifyReport {
        tag,
        inner_shift: None,
        normalized: [p1, p2],
        classification,
    })
}

/// Squarefree split `g = A B^2` with `A` squarefree (carrying the leading coefficient).
fn square_split(g: &Poly) -> (Poly, Poly) {
    let lc = g.lead();
    let mut b = g.monic();
    let dg = b.derivative();
    if dg.is_zero() {
        return (g.clone(), Poly::one());
    }
    let a0 = b.gcd(&dg);
    let mut c = dg.divrem(&a0).unwrap().0;
    b = b.divrem(&a0).unwrap().0;
    let (mut odd, mut half) = (Poly::one(), Poly::one());
    let mut i = 1u32;
    while b.deg() > 0 {
        let d = &c - &b.derivative();
        let a = b.gcd(&d);
        if i % 2 == 1 {
            odd = &odd * &a;
        }
        half = &half * &a.pow(i / 2);
        b = b.divrem(&a).unwrap().0;
        c = d.divrem(&a).unwrap().0;
        i += 1;
    }
    (odd.scale(&lc), half)
}

/// Exact polynomial square root.
fn poly_sqrt(p: &Poly) -> Option<Poly> {
    if p.is_zero() {
        return Some(Poly::zero());
    }
    if p.deg() % 2 == 1 {
        return None;
    }
    let k = p.deg() / 2;
    let lc = p.lead().try_nth_root(2)?;
    let mut coeffs = vec![S::zero(); k as usize + 1];
    coeffs[k as usize] = lc.clone();
    let two_lc = &lc * &S::from_int(2);
    // top-down: the coefficient of x^(k+j) in p - r^2 fixes the coefficient of x^j in r
    for j in (0..k as usize).rev() {
        let r = Poly::from_coeffs(&coeffs);
        let rest = p - &(&r * &r);
        coeffs[j] = rest
            .coeff(k as i64 + j as i64)
            .checked_div(&two_lc)
            .unwrap();
    }
    let r = Poly::from_coeffs(&coeffs);
    (&r * &r == *p).then_some(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum WeirdEven {
    /// `g ∘ mu = x B^2` and `mu^-1 ∘ h = (x^2 - 4) D^2`.
    Case1 { mu: Mobius, b: Poly, d: Poly },
    /// `g ∘ mu = (x^2 - 4) B^2` and `mu^-1 ∘ h = D_n`.
    Case2 { mu: Mobius, b: Poly, n: u32 },
}

/// Splits `g ∘ h = (x^2 - 4) p^2` for polynomials `g`, `h`.
pub fn split_weird_even(g: &Poly, h: &Poly, p: &Poly) -> Result<WeirdEven> {
    let f = g.compose(h);
    if f != &Poly::from_ints(&[-4, 0, 1]) * &p.pow(2) {
        return Err(CatalogueError::PreconditionViolated(
            "g ∘ h differs from (x^2 - 4) p^2".into(),
        ));
    }
    let (a, _) = square_split(g);
    let gr: RatFunc = g.clone().into();
    let hr: RatFunc = h.clone().into();
    match a.deg() {
        1 => {
            let (slope, root) = (a.lead(), -&a.coeff(0).checked_div(&a.lead()).unwrap());
            let mu = Mobius::affine(slope.inv().unwrap(), root);
            let gm = gr.compose(&mu.to_ratfunc()).as_poly().unwrap();
            let hm = mu.inverse().to_ratfunc().compose(&hr).as_poly().unwrap();
            let b = lp_exact_div(gm.as_laurent(), &mono(1))
                .and_then(Poly::from_laurent)
                .and_then(|c| poly_sqrt(&c));
            let d = lp_exact_div(hm.as_laurent(), Poly::from_ints(&[-4, 0, 1]).as_laurent())
                .and_then(Poly::from_laurent)
                .and_then(|c| poly_sqrt(&c));
            if let (Some(b), Some(d)) = (b, d) {
                return Ok(WeirdEven::Case1 { mu, b, d });
            }
        }
        2 => {
            let (la, lb, lc) = (a.coeff(2), a.coeff(1), a.coeff(0));
            let disc = &(&lb * &lb) - &(&(&la * &lc) * &S::from_int(4));
            if let Some(sq) = disc.try_nth_root(2) {
                let two_a = &la * &S::from_int(2);
                let alpha = (&(-&lb) - &sq).checked_div(&two_a).unwrap();
                let beta = (&(-&lb) + &sq).checked_div(&two_a).unwrap();
                for (x0, x1) in [(&alpha, &beta), (&beta, &alpha)] {
                    // mu(-2) = x0, mu(2) = x1
                    let mu = Mobius::affine(
                        (x1 - x0).checked_div(&S::from_int(4)).unwrap(),
                        (x0 + x1).checked_div(&S::from_int(2)).unwrap(),
                    );
                    let gm = gr.compose(&mu.to_ratfunc()).as_poly().unwrap();
                    let hm = mu.inverse().to_ratfunc().compose(&hr).as_poly().unwrap();
                    let n = hm.deg() as u32;
                    if hm != dickson1(n) {
                        continue;
                    }
                    let b =
                        lp_exact_div(gm.as_laurent(), Poly::from_ints(&[-4, 0, 1]).as_laurent())
                            .and_then(Poly::from_laurent)
                            .and_then(|c| poly_sqrt(&c));
                    if let Some(b) = b {
                        return Ok(WeirdEven::Case2 { mu, b, n });
                    }
                }
            }
        }
        _ => {}
    }
    Err(CatalogueError::NotClassified(
        "squarefree part of g has the wrong shape".into(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum WeirdOdd {
    /// `mu^-1 ∘ h = (x - 1/x) q(x + 1/x)` and `g ∘ mu` odd.
    Case1 { mu: Mobius, q: Poly },
    /// `mu^-1 ∘ h = x^m/s + s/x^m` with `s^2 = gamma`, and `g ∘ mu = G ∘ D_n` with `G` odd.
    Case2 {
        mu: Mobius,
        m: u32,
        gamma: CycloScalar,
        g: Poly,
        n: u32,
    },
}

/// Splits `g ∘ h` when the composition satisfies `f(1/x) = -f(x)`.
pub fn split_weird_odd(g: &Poly, h: &LaurentPoly) -> Result<WeirdOdd> {
    let gr: RatFunc = g.clone().into();
    let f = gr
        .compose(&rf(h))
        .as_laurent()
        .ok_or(DecomposeError::NotLaurentComposition)?;
    if f.is_zero() || f.invert_var() != -&f {
        return Err(CatalogueError::NotOddShape);
    }
    let w = h.constant_term();
    let k = h - &LaurentPoly::constant(w.clone());
    if k.invert_var() == -&k {
        let mu = Mobius::affine(S::one(), w.clone());
        let qq = lp_exact_div(&k, &x_minus_inv()).and_then(|s| symmetric_to_poly(&s));
        let gm = gr.compose(&mu.to_ratfunc()).as_poly().unwrap();
        if let Some(qq) = qq {
            if is_odd_poly(&gm) {
                return Ok(WeirdOdd::Case1 { mu, q: qq });
            }
        }
    }
    if let Some((m, u, v, _)) = two_sided(h) {
        let gamma = v.checked_div(&u).unwrap();
        if let Some(s) = gamma.try_nth_root(2) {
            let a = (&s * &u).inv().unwrap();
            let mu = Mobius::affine(a.inv().unwrap(), w.clone());
            let gm = gr.compose(&mu.to_ratfunc()).as_poly().unwrap();
            for n in 1..=g.deg() as u32 {
                if g.deg() % n as u64 != 0 || gamma.pow(n as i64) != S::from_int(-1) {
                    continue;
                }
                let Some(big_g) = left_divide(gm.as_laurent(), dickson1(n).as_laurent())
                    .and_then(|r| r.as_poly())
                else {
                    continue;
                };
                if is_odd_poly(&big_g) {
                    return Ok(WeirdOdd::Case2 {
                        mu,
                        m: m as u32,
                        gamma,
                        g: big_g,
                        n,
                    });
                }
            }
        }
    }
    Err(CatalogueError::NotClassified(
        "odd-shaped composition outside both templates".into(),
    ))
}

/// `(r, n, p)` with `f = x^r p(x^n)`, `n >= 2` maximal and `r` the lowest exponent.
pub fn detect_twist_shape(f: &LaurentPoly) -> Option<(i64, u32, Poly)> {
    let r = f.min_exp()?;
    let n = f
        .terms()
        .fold(0u64, |g, (e, _)| g.gcd(&(e - r).unsigned_abs()));
    if n < 2 {
        return None;
    }
    let p = Poly::from_laurent(f.shift(-r).divide_exponents(n as i64)?)?;
    Some((r, n as u32, p))
}

/// Every other way of writing `u ∘ v` as a composition of two indecomposables, in canonical form.
pub fn local_alternatives(u: &RatFunc, v: &RatFunc) -> Result<Vec<(RatFunc, RatFunc)>> {
    local_alternatives_with(&mut Decomposer::new(Limits::default()), u, v)
}

pub fn local_alternatives_with(
    dec: &mut Decomposer,
    u: &RatFunc,
    v: &RatFunc,
) -> Result<Vec<(RatFunc, RatFunc)>> {
    let w = u.compose(v);
    let (nu, l) = laurent_representative(&w).ok_or(DecomposeError::NotLaurentComposition)?;
    let nur = nu.to_ratfunc();
    let mut out = Vec::new();
    for c in dec.chains(&l)?.iter().filter(|c| c.len() == 2) {
        let a = nur.compose(&rf(&c[0]));
        let b = rf(&c[1]);
        debug_assert_eq!(a.compose(&b), w);
        out.push((a, b));
    }
    Ok(out)
}

/// Complete decompositions of a Laurent polynomial given as a rational function.
pub fn chains_of(f: &RatFunc, limits: &Limits) -> Result<Vec<crate::ratfunc::Decomposition>> {
    let l = f
        .as_laurent()
        .ok_or(DecomposeError::NotLaurentComposition)?;
    Ok(decompose::complete_decompositions(&l, limits)?)
}
