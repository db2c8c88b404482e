//! Every local move produced by chain search is a bidecomposition that the classifier recognises.

use laurent_ritt::ritt_catalog::{classify, sporadic24};
use laurent_ritt::{Connector, LaurentPoly, Limits};

fn check_all_moves(f: &LaurentPoly) -> usize {
    let mut conn = Connector::new(Limits::default());
    let decs = conn.decomposer().complete_decompositions(f).unwrap();
    let mut seen = 0;
    for (k, a) in decs.iter().enumerate() {
        for b in &decs[k + 1..] {
            let proof = conn.connect(a, b).unwrap();
            for m in &proof.moves {
                let r = classify(&m.before.0, &m.before.1, &m.after.0, &m.after.1);
                let report = r.unwrap_or_else(|e| panic!("move {m:?} not classified: {e}"));
                assert!(report.tag.starts_with("Lbidec."), "{}", report.tag);
                seen += 1;
            }
        }
    }
    seen
}

#[test]
fn dihedral_moves() {
    for n in [4i64, 6, 8] {
        let f = LaurentPoly::from_ints(&[(n, 1), (-n, 1)]);
        assert!(check_all_moves(&f) > 0, "n = {n}");
    }
}

#[test]
fn sporadic_moves() {
    let (g1, h1, _, _) = sporadic24();
    let f = g1.as_laurent().compose(&h1).unwrap();
    assert!(check_all_moves(&f) > 0);
}
