//! Multivariate gcd over ℚ: content extraction plus a recursive subresultant
//! remainder sequence in one main variable at a time.

use alloc::vec::Vec;

use crate::field::Field;
use crate::monomial::MonomialOrder;
use crate::poly::{reduce, Polynomial};
use crate::rational::Rational;

type Poly = Polynomial<Rational>;

/// Greatest common divisor, monic under grevlex. `gcd(0, 0) = 0`.
pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    assert_eq!(a.nvars(), b.nvars(), "gcd of polynomials from different rings");
    monic(&gcd_rec(a, b))
}

/// Exact quotient `p / d`, or `None` when `d` does not divide `p`.
pub fn exact_div(p: &Poly, d: &Poly) -> Option<Poly> {
    if d.is_zero() {
        return None;
    }
    if d.is_constant() {
        let inv = d.constant_term().inv().ok()?;
        return Some(p.scale(&inv));
    }
    let div = reduce(p, core::slice::from_ref(d), &MonomialOrder::lex()).ok()?;
    if div.remainder.is_zero() {
        div.quotients.into_iter().next()
    } else {
        None
    }
}

fn monic(p: &Poly) -> Poly {
    if p.is_zero() {
        return p.clone();
    }
    p.make_monic(&MonomialOrder::grevlex()).expect("nonzero leading coefficient")
}

fn first_var(p: &Poly) -> Option<usize> {
    (0..p.nvars()).find(|&v| p.degree_in(v) > 0)
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return monic(b);
    }
    if b.is_zero() {
        return monic(a);
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(a.nvars());
    }
    let n = a.nvars();
    let shared = (0..n).find(|&v| a.degree_in(v) > 0 && b.degree_in(v) > 0);
    let Some(v) = shared else {
        // a's first variable is absent from b, so only a's content in it can
        // contribute
        let va = first_var(a).unwrap();
        return gcd_rec(&content(a, va), b);
    };
    let (ca, cb) = (content(a, v), content(b, v));
    let pa = exact_div(a, &ca).expect("content divides");
    let pb = exact_div(b, &cb).expect("content divides");
    let c = gcd_rec(&ca, &cb);
    let g = subresultant_gcd(&pa, &pb, v);
    monic(&(&c * &g))
}

/// Coefficients of `p` viewed as a polynomial in `v`; entry `k` multiplies `v^k`.
fn coeffs_in(p: &Poly, v: usize) -> Vec<Poly> {
    let d = p.degree_in(v) as usize;
    let mut out: Vec<Vec<_>> = (0..=d).map(|_| Vec::new()).collect();
    for (m, c) in p.terms() {
        let k = m.exponents()[v] as usize;
        out[k].push((m.with_exponent(v, 0), c.clone()));
    }
    out.into_iter().map(|ts| Poly::from_terms(p.nvars(), ts)).collect()
}

fn from_coeffs(coeffs: &[Poly], v: usize, nvars: usize) -> Poly {
    let mut terms = Vec::new();
    for (k, c) in coeffs.iter().enumerate() {
        for (m, a) in c.terms() {
            terms.push((m.with_exponent(v, k as u32), a.clone()));
        }
    }
    Poly::from_terms(nvars, terms)
}

fn trim(c: &mut Vec<Poly>) {
    while c.len() > 1 && c.last().unwrap().is_zero() {
        c.pop();
    }
    if c.len() == 1 && c[0].is_zero() {
        c.clear();
    }
}

/// gcd of the coefficients of `p` with respect to `v`.
fn content(p: &Poly, v: usize) -> Poly {
    let mut g = Poly::zero(p.nvars());
    for c in coeffs_in(p, v) {
        if c.is_zero() {
            continue;
        }
        g = gcd_rec(&g, &c);
        if g.is_constant() {
            return Poly::one(p.nvars());
        }
    }
    g
}

/// Pseudo-remainder `lc(b)^(da-db+1) · a mod b` in the variable of the
/// coefficient vectors.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r: Vec<Poly> = a.to_vec();
    let mut e = a.len() as i64 - b.len() as i64 + 1;
    while !r.is_empty() && r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = &*c * lb;
        }
        for (k, bk) in b.iter().enumerate() {
            r[k + shift] = &r[k + shift] - &(&lr * bk);
        }
        debug_assert!(r[dr].is_zero());
        r.pop();
        trim(&mut r);
        e -= 1;
    }
    if e > 0 && !r.is_empty() {
        let f = lb.pow(e as u32).expect("small exponent");
        for c in r.iter_mut() {
            *c = &*c * &f;
        }
    }
    r
}

fn div_all(c: &mut [Poly], d: &Poly) {
    for x in c.iter_mut() {
        *x = exact_div(x, d).expect("subresultant division is exact");
    }
}

/// gcd of two polynomials primitive in `v` with positive degree in `v`.
fn subresultant_gcd(a: &Poly, b: &Poly, v: usize) -> Poly {
    let n = a.nvars();
    let (mut a, mut b) = (coeffs_in(a, v), coeffs_in(b, v));
    if a.len() < b.len() {
        core::mem::swap(&mut a, &mut b);
    }
    let mut g = Poly::one(n);
    let mut h = Poly::one(n);
    loop {
        let delta = (a.len() - b.len()) as u32;
        let r = prem(&a, &b);
        if r.is_empty() {
            break;
        }
        if r.len() == 1 {
            return Poly::one(n);
        }
        a = core::mem::replace(&mut b, r);
        let divisor = &g * &h.pow(delta).unwrap();
        div_all(&mut b, &divisor);
        g = a.last().unwrap().clone();
        h = if delta == 0 {
            h
        } else {
            let num = g.pow(delta).unwrap();
            let den = h.pow(delta - 1).unwrap();
            exact_div(&num, &den).expect("subresultant h update is exact")
        };
    }
    let bp = from_coeffs(&b, v, n);
    let c = content(&bp, v);
    exact_div(&bp, &c).expect("content divides")
}
