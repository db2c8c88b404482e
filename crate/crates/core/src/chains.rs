//! Sequences of complete decompositions in which consecutive members differ in two adjacent
//! factors only.
//!
//! The search runs over canonical chains (see [`canonicalize_chain`]): a step replaces two
//! adjacent canonical factors `C_i, C_(i+1)` by another complete decomposition of `C_i ∘ C_(i+1)`.
//! Each step is replayed on the actual factor lists, and the degree-one maps left over at the end
//! are absorbed by explicit moves, so a proof can be checked without trusting canonicalization.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::decompose::{
    canonicalize_chain, chain_key, CanonicalChain, DecomposeError, Decomposer, Limits,
};
use crate::ratfunc::{compose_all, Decomposition, LaurentPoly, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("no chain found: {0}")]
    NotConnected(String),
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Decompose(DecomposeError),
}

impl From<DecomposeError> for ChainError {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::LimitExceeded(s) => ChainError::LimitExceeded(s),
            other => ChainError::Decompose(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, ChainError>;

/// Replacement of the factors at positions `i`, `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub i: usize,
    pub before: (RatFunc, RatFunc),
    pub after: (RatFunc, RatFunc),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainProof {
    pub f: RatFunc,
    pub decs: Vec<Decomposition>,
    pub moves: Vec<Move>,
}

/// One edge of the canonical search graph: position and replacement pair.
#[derive(Clone, Debug)]
struct Edge {
    i: usize,
    a: LaurentPoly,
    b: LaurentPoly,
    target: String,
}

/// Chain search with cached decompositions and neighbour lists, for many queries on related inputs.
#[derive(Debug, Default)]
pub struct Connector {
    dec: Decomposer,
    edges: HashMap<String, Vec<Edge>>,
    states: HashMap<String, Vec<LaurentPoly>>,
}

fn splice(c: &[LaurentPoly], i: usize, a: &LaurentPoly, b: &LaurentPoly) -> Vec<RatFunc> {
    let mut out: Vec<RatFunc> = c.iter().map(|f| f.to_ratfunc()).collect();
    out[i] = a.to_ratfunc();
    out[i + 1] = b.to_ratfunc();
    out
}

impl Connector {
    pub fn new(limits: Limits) -> Self {
        Connector {
            dec: Decomposer::new(limits),
            ..Default::default()
        }
    }

    pub fn decomposer(&mut self) -> &mut Decomposer {
        &mut self.dec
    }

    fn neighbours(&mut self, key: &str) -> Result<Vec<Edge>> {
        if let Some(e) = self.edges.get(key) {
            return Ok(e.clone());
        }
        let c = self.states[key].clone();
        let mut out = Vec::new();
        for i in 0..c.len().saturating_sub(1) {
            let w = c[i].to_ratfunc().compose(&c[i + 1].to_ratfunc());
            let w = w
                .as_laurent()
                .ok_or(DecomposeError::NotLaurentComposition)?;
            for pair in self.dec.chains(&w)?.iter() {
                if pair.len() != 2 || (pair[0] == c[i] && pair[1] == c[i + 1]) {
                    continue;
                }
                let next = canonicalize_chain(&splice(&c, i, &pair[0], &pair[1]))?;
                let target = next.key();
                if target == key {
                    continue;
                }
                self.states.entry(target.clone()).or_insert(next.factors);
                out.push(Edge {
                    i,
                    a: pair[0].clone(),
                    b: pair[1].clone(),
                    target,
                });
            }
        }
        self.edges.insert(key.to_string(), out.clone());
        Ok(out)
    }

    /// Shortest canonical path as a list of edges.
    fn search(&mut self, start: &CanonicalChain, goal: &str) -> Result<Vec<Edge>> {
        let skey = start.key();
        self.states
            .entry(skey.clone())
            .or_insert_with(|| start.factors.clone());
        let mut parent: HashMap<String, Option<(String, Edge)>> = HashMap::new();
        parent.insert(skey.clone(), None);
        let mut queue = VecDeque::from([skey]);
        let cap = self.dec.limits().max_frontier;
        while let Some(k) = queue.pop_front() {
            if k == goal {
                let mut path = Vec::new();
                let mut cur = k;
                while let Some(Some((prev, e))) = parent.get(&cur).cloned() {
                    path.push(e);
                    cur = prev;
                }
                path.reverse();
                return Ok(path);
            }
            for e in self.neighbours(&k)? {
                if !parent.contains_key(&e.target) {
                    parent.insert(e.target.clone(), Some((k.clone(), e.clone())));
                    queue.push_back(e.target.clone());
                    if parent.len() > cap {
                        return Err(ChainError::LimitExceeded(format!(
                            "more than {cap} chain states"
                        )));
                    }
                }
            }
        }
        Err(ChainError::NotConnected(
            "the canonical move graph has no path between the chains".into(),
        ))
    }

    /// A verified sequence from `dec1` to `dec2`.
    pub fn connect(&mut self, dec1: &Decomposition, dec2: &Decomposition) -> Result<ChainProof> {
        let f = dec1.composition().clone();
        if &f != dec2.composition() {
            return Err(ChainError::PreconditionViolated(
                "decompositions compose to different functions".into(),
            ));
        }
        let fl = f
            .as_laurent()
            .ok_or(DecomposeError::NotLaurentComposition)?;
        if fl.degree() > self.dec.limits().max_degree {
            return Err(ChainError::LimitExceeded(format!(
                "degree {} above {}",
                fl.degree(),
                self.dec.limits().max_degree
            )));
        }
        for d in [dec1, dec2] {
            if !self.dec.certify(d.factors().to_vec())?.is_complete() {
                return Err(ChainError::PreconditionViolated(format!(
                    "{d} is not a complete decomposition"
                )));
            }
        }
        let (x, y) = (dec1.factors().to_vec(), dec2.factors().to_vec());
        if x.len() != y.len() {
            return Err(ChainError::NotConnected(
                "complete decompositions of different lengths".into(),
            ));
        }
        let cy = canonicalize_chain(&y)?;
        let path = self.search(&canonicalize_chain(&x)?, &cy.key())?;

        let mut cur = x;
        let mut decs = vec![Decomposition::with_flag(cur.clone(), true)];
        let mut moves = Vec::new();
        let mut push = |cur: &mut Vec<RatFunc>, i: usize, u: RatFunc, v: RatFunc| {
            if cur[i] == u && cur[i + 1] == v {
                return;
            }
            let before = (cur[i].clone(), cur[i + 1].clone());
            cur[i] = u.clone();
            cur[i + 1] = v.clone();
            moves.push(Move {
                i,
                before,
                after: (u, v),
            });
            decs.push(Decomposition::with_flag(cur.clone(), true));
        };
        for e in &path {
            let cc = canonicalize_chain(&cur)?;
            let left = cc.maps[e.i].to_ratfunc();
            let right = cc.maps[e.i + 2].inverse().to_ratfunc();
            push(
                &mut cur,
                e.i,
                left.compose(&e.a.to_ratfunc()),
                e.b.to_ratfunc().compose(&right),
            );
            debug_assert_eq!(canonicalize_chain(&cur)?.key(), e.target);
        }
        // both chains now share a canonical form; move the degree-one maps over one slot at a time
        let lam = canonicalize_chain(&cur)?.maps;
        if chain_key(&canonicalize_chain(&cur)?.factors) != cy.key() {
            return Err(ChainError::NotConnected(
                "replayed path ended in the wrong class".into(),
            ));
        }
        for j in 0..cur.len().saturating_sub(1) {
            let adjust = cy.maps[j + 1].compose(&lam[j + 1].inverse()).to_ratfunc();
            let v = adjust.compose(&cur[j + 1]);
            push(&mut cur, j, y[j].clone(), v);
        }
        if cur != y {
            return Err(ChainError::NotConnected(
                "degree-one adjustment failed".into(),
            ));
        }
        let proof = ChainProof { f, decs, moves };
        assert!(
            verify_chain(&proof),
            "constructed chain failed verification"
        );
        Ok(proof)
    }
}

/// Connects two complete decompositions of the same Laurent polynomial.
pub fn connect(dec1: &Decomposition, dec2: &Decomposition, limits: &Limits) -> Result<ChainProof> {
    Connector::new(limits.clone()).connect(dec1, dec2)
}

fn sorted_degrees(fs: &[RatFunc]) -> Vec<u64> {
    let mut d: Vec<u64> = fs.iter().map(|f| f.degree()).collect();
    d.sort_unstable();
    d
}

/// Checks a proof from scratch: every member composes to `f`, consecutive members differ only at
/// the recorded positions, each move preserves the composition of its pair, and degree multisets
/// agree throughout.
pub fn verify_chain(proof: &ChainProof) -> bool {
    let Some(first) = proof.decs.first() else {
        return false;
    };
    if proof.moves.len() + 1 != proof.decs.len() {
        return false;
    }
    let degs = sorted_degrees(first.factors());
    for d in &proof.decs {
        if d.factors().is_empty()
            || compose_all(d.factors()) != proof.f
            || sorted_degrees(d.factors()) != degs
        {
            return false;
        }
    }
    for (m, w) in proof.moves.iter().zip(proof.decs.windows(2)) {
        let (a, b) = (w[0].factors(), w[1].factors());
        if a.len() != b.len() || m.i + 1 >= a.len() {
            return false;
        }
        for j in 0..a.len() {
            if j != m.i && j != m.i + 1 && a[j] != b[j] {
                return false;
            }
        }
        if (a[m.i].clone(), a[m.i + 1].clone()) != m.before
            || (b[m.i].clone(), b[m.i + 1].clone()) != m.after
        {
            return false;
        }
        if m.before.0.compose(&m.before.1) != m.after.0.compose(&m.after.1) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclofield::CycloScalar;
    use crate::dickson::dickson1;
    use crate::ratfunc::Poly;

    fn lp(t: &[(i64, i64)]) -> RatFunc {
        LaurentPoly::from_ints(t).to_ratfunc()
    }

    #[test]
    fn dihedral_six_example() {
        let dec1 = Decomposition::new(vec![lp(&[(1, 1), (-1, 1)]), lp(&[(2, 1)]), lp(&[(3, 1)])]);
        let dec2 = Decomposition::new(vec![
            dickson1(2).into(),
            dickson1(3).into(),
            lp(&[(1, 1), (-1, 1)]),
        ]);
        let proof = connect(&dec1, &dec2, &Limits::default()).unwrap();
        assert_eq!(proof.moves.len(), 2);
        assert_eq!((proof.moves[0].i, proof.moves[1].i), (0, 1));
        assert!(verify_chain(&proof));
        assert_eq!(proof.decs.last().unwrap().factors(), dec2.factors());
    }

    #[test]
    fn trivial_and_tampered() {
        let dec = Decomposition::new(vec![lp(&[(1, 1), (-1, 1)]), lp(&[(2, 1)])]);
        let proof = connect(&dec, &dec, &Limits::default()).unwrap();
        assert!(proof.moves.is_empty() && proof.decs.len() == 1);
        assert!(verify_chain(&proof));

        let dec1 = Decomposition::new(vec![lp(&[(1, 1), (-1, 1)]), lp(&[(2, 1)]), lp(&[(3, 1)])]);
        let dec2 = Decomposition::new(vec![
            dickson1(2).into(),
            dickson1(3).into(),
            lp(&[(1, 1), (-1, 1)]),
        ]);
        let mut bad = connect(&dec1, &dec2, &Limits::default()).unwrap();
        let mut fs = bad.decs[1].factors().to_vec();
        fs[0] = fs[0].scale(&CycloScalar::from_int(2));
        bad.decs[1] = Decomposition::new(fs);
        assert!(!verify_chain(&bad));
    }

    #[test]
    fn fudge_moves_absorb_maps() {
        // same canonical chain, different degree-one maps between the factors
        let c = CycloScalar::from_int(3);
        let u = lp(&[(1, 1), (-1, 1)]);
        let v = lp(&[(2, 1)]);
        let dec1 = Decomposition::new(vec![u.clone(), v.clone()]);
        let shifted_u = u.compose(&RatFunc::from(Poly::from_coeffs(&[
            CycloScalar::from_frac(-1, 3),
            c.inv().unwrap(),
        ])));
        let shifted_v = RatFunc::from(Poly::from_coeffs(&[CycloScalar::one(), c])).compose(&v);
        let dec2 = Decomposition::new(vec![shifted_u, shifted_v]);
        let proof = connect(&dec1, &dec2, &Limits::default()).unwrap();
        assert_eq!(proof.moves.len(), 1);
        assert!(verify_chain(&proof));
    }

    #[test]
    fn all_pairs_dihedral_eight() {
        let f = LaurentPoly::from_ints(&[(8, 1), (-8, 1)]);
        let mut conn = Connector::new(Limits::default());
        let decs = conn.decomposer().complete_decompositions(&f).unwrap();
        for a in &decs {
            for b in &decs {
                let p = conn.connect(a, b).unwrap();
                assert!(verify_chain(&p));
            }
        }
    }

    #[test]
    fn json_shape() {
        let dec1 = Decomposition::new(vec![lp(&[(1, 1), (-1, 1)]), lp(&[(3, 1)])]);
        let dec2 = Decomposition::new(vec![dickson1(3).into(), lp(&[(1, 1), (-1, 1)])]);
        let proof = connect(&dec1, &dec2, &Limits::default()).unwrap();
        let v = serde_json::to_value(&proof).unwrap();
        assert_eq!(v["moves"][0]["i"], 0);
        assert!(v["moves"][0]["before"].is_array());
        let back: ChainProof = serde_json::from_value(v).unwrap();
        assert_eq!(back, proof);
    }

    #[test]
    fn rejects_incomplete() {
        let dec1 = Decomposition::new(vec![lp(&[(6, 1), (-6, 1)])]);
        let dec2 = Decomposition::new(vec![lp(&[(3, 1), (-3, 1)]), lp(&[(2, 1)])]);
        assert!(matches!(
            connect(&dec1, &dec2, &Limits::default()),
            Err(ChainError::PreconditionViolated(_))
        ));
    }
}
