//! Multiplication maps on the quotient ring `K[unknowns]/I`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::AlgebraError;
use crate::field::Field;
use crate::groebner::{GroebnerBasis, StandardBasis};
use crate::poly::Polynomial;

/// Coordinates of a normal form in the standard-monomial basis.
pub fn coordinates<F: Field>(nf: &Polynomial<F>, basis: &StandardBasis) -> Vec<F> {
    let mut out = vec![F::zero(); basis.dimension()];
    for (m, c) in nf.terms() {
        let i = basis.position(m).expect("normal form term is a standard monomial");
        out[i] = c.clone();
    }
    out
}

/// Matrix of `p ↦ NF(h·p)` in the basis `b`. Row `i` holds the coordinates of
/// `NF(h·b_i)`, so `M · (b_j(s))_j = h(s) · (b_j(s))_j` at every root `s`.
pub fn multiplication_matrix<F: Field>(
    gb: &GroebnerBasis<F>,
    basis: &StandardBasis,
    h: &Polynomial<F>,
) -> Result<Vec<Vec<F>>, AlgebraError> {
    basis
        .monomials()
        .iter()
        .map(|b| {
            let hb = h.checked_mul(&Polynomial::monomial(b.clone(), F::one()))?;
            Ok(coordinates(&gb.normal_form(&hb)?, basis))
        })
        .collect()
}

/// Exact product of square matrices over a field.
pub fn mat_mul<F: Field>(a: &[Vec<F>], b: &[Vec<F>]) -> Vec<Vec<F>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(F::zero(), |acc, k| {
                        if a[i][k].is_zero() || b[k][j].is_zero() {
                            acc
                        } else {
                            acc.add(&a[i][k].mul(&b[k][j]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// `A·B == B·A` exactly.
pub fn commute<F: Field>(a: &[Vec<F>], b: &[Vec<F>]) -> bool {
    let ab = mat_mul(a, b);
    let ba = mat_mul(b, a);
    ab.iter().zip(&ba).all(|(r, s)| r.iter().zip(s).all(|(x, y)| x.sub(y).is_zero()))
}
