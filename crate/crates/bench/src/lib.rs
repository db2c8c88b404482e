//! Fixed inputs shared by the benchmarks.

use laurent_ritt::ritt_catalog::sporadic24;
use laurent_ritt::{CycloScalar, LaurentPoly, Poly};

/// `x^n + x^-n`.
pub fn dihedral(n: i64) -> LaurentPoly {
    LaurentPoly::from_ints(&[(n, 1), (-n, 1)])
}

/// The degree-24 sporadic composite.
pub fn sporadic() -> LaurentPoly {
    let (g1, h1, _, _) = sporadic24();
    g1.as_laurent().compose(&h1).unwrap()
}

/// A composite `g ∘ h` of degree `deg g * 4` whose coefficients live in `Q(zeta_12)`.
pub fn mixed_composite(outer_degree: usize) -> LaurentPoly {
    let z = CycloScalar::root_of_unity(12, 1);
    let coeffs: Vec<CycloScalar> = (0..=outer_degree)
        .map(|k| &CycloScalar::from_int(k as i64 + 1) + &z)
        .collect();
    let g = Poly::from_coeffs(&coeffs);
    let h = LaurentPoly::from_terms([
        (2, CycloScalar::one()),
        (1, z.clone()),
        (-1, CycloScalar::from_int(3)),
        (-2, &z * &z),
    ]);
    g.as_laurent().compose(&h).unwrap()
}
