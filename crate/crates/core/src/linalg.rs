//! Small dense complex eigenproblems for the online phase.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::SolveError;

/// Row-major square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// `None` if a row has the wrong length or an entry is not finite.
    pub fn from_rows(rows: &[Vec<C64>]) -> Option<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n || r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return None;
            }
            data.extend_from_slice(r);
        }
        Some(DenseMatrix { n, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&v| C64::new(v, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseMatrix { n: self.n, data }
    }

    /// `Σ c_i M_i`; all matrices must share a dimension.
    pub fn linear_combination(mats: &[&DenseMatrix], coeffs: &[f64]) -> DenseMatrix {
        let n = mats.first().map_or(0, |m| m.n);
        let mut out = Self::zeros(n);
        for (m, &c) in mats.iter().zip(coeffs) {
            for (o, v) in out.data.iter_mut().zip(&m.data) {
                *o += v * c;
            }
        }
        out
    }
}

/// An eigenvalue with a unit right eigenvector and `‖Mv − λv‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: C64,
    pub vector: Vec<C64>,
    pub residual: f64,
}

/// Iteration caps for the QR algorithm and inverse iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenConfig {
    pub max_dim: usize,
    pub max_sweeps_per_eigenvalue: usize,
    pub inverse_iterations: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig { max_dim: 200, max_sweeps_per_eigenvalue: 60, inverse_iterations: 3 }
    }
}

fn hessenberg(a: &mut DenseMatrix) {
    let n = a.n;
    for k in 0..n.saturating_sub(2) {
        let norm = libm::sqrt((k + 1..n).map(|i| a.get(i, k).norm_sqr()).sum());
        if norm == 0.0 {
            continue;
        }
        let x0 = a.get(k + 1, k);
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| a.get(i, k)).collect();
        v[0] -= alpha;
        let vn = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        if vn == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vn;
        }
        // A ← (I − 2vv*) A
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * a.get(k + 1 + t, j)).sum();
            for (t, vi) in v.iter().enumerate() {
                let cur = a.get(k + 1 + t, j);
                a.set(k + 1 + t, j, cur - vi * s * 2.0);
            }
        }
        // A ← A (I − 2vv*)
        for i in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| a.get(i, k + 1 + t) * vi).sum();
            for (t, vi) in v.iter().enumerate() {
                let cur = a.get(i, k + 1 + t);
                a.set(i, k + 1 + t, cur - s * vi.conj() * 2.0);
            }
        }
        for i in k + 2..n {
            a.set(i, k, C64::new(0.0, 0.0));
        }
    }
}

fn givens(a: C64, b: C64) -> (C64, C64) {
    let r = libm::sqrt(a.norm_sqr() + b.norm_sqr());
    if r == 0.0 {
        (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    } else {
        (a / r, b / r)
    }
}

/// Eigenvalues by Hessenberg reduction and Wilkinson-shifted QR sweeps.
pub fn eigenvalues(m: &DenseMatrix, cfg: &EigenConfig) -> Result<Vec<C64>, SolveError> {
    let n = m.n;
    if n > cfg.max_dim {
        return Err(SolveError::InvalidConfig(alloc::format!("matrix dimension {n} exceeds the cap of {}", cfg.max_dim)));
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n;
    let mut sweeps = 0;
    while hi > 1 {
        let last = hi - 1;
        let mut l = last;
        while l > 0 {
            let sub = h.get(l, l - 1).norm();
            let diag = h.get(l - 1, l - 1).norm() + h.get(l, l).norm();
            if sub <= eps * diag.max(eps * scale) {
                h.set(l, l - 1, C64::new(0.0, 0.0));
                break;
            }
            l -= 1;
        }
        if l == last {
            hi -= 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > cfg.max_sweeps_per_eigenvalue {
            return Err(SolveError::EigenNonConvergence);
        }
        let (a, b, c, d) = (h.get(last - 1, last - 1), h.get(last - 1, last), h.get(last, last - 1), h.get(last, last));
        let mut shift = if sweeps % 11 == 10 {
            // exceptional shift
            d + c.norm() * 0.75
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let (s1, s2) = ((a + d) * 0.5 + disc, (a + d) * 0.5 - disc);
            if (s1 - d).norm() <= (s2 - d).norm() { s1 } else { s2 }
        };
        if !shift.re.is_finite() || !shift.im.is_finite() {
            shift = d;
        }
        for i in l..=last {
            let cur = h.get(i, i);
            h.set(i, i, cur - shift);
        }
        let mut rots = Vec::with_capacity(last - l);
        for k in l..last {
            let (cs, sn) = givens(h.get(k, k), h.get(k + 1, k));
            for j in k..=last {
                let (x, y) = (h.get(k, j), h.get(k + 1, j));
                h.set(k, j, cs.conj() * x + sn.conj() * y);
                h.set(k + 1, j, -sn * x + cs * y);
            }
            rots.push((cs, sn));
        }
        for (t, &(cs, sn)) in rots.iter().enumerate() {
            let k = l + t;
            for i in l..=(k + 2).min(last) {
                let (x, y) = (h.get(i, k), h.get(i, k + 1));
                h.set(i, k, x * cs + y * sn);
                h.set(i, k + 1, -x * sn.conj() + y * cs.conj());
            }
        }
        for i in l..=last {
            let cur = h.get(i, i);
            h.set(i, i, cur + shift);
        }
    }
    Ok((0..n).map(|i| h.get(i, i)).collect())
}

/// Solves `A y = b` by LU with partial pivoting; tiny pivots are nudged so
/// that nearly singular systems (inverse iteration) still produce a vector.
fn lu_solve(a: &DenseMatrix, b: &[C64], pivot_floor: f64) -> Vec<C64> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].norm().total_cmp(&m[j * n + k].norm())).unwrap();
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        if m[k * n + k].norm() < pivot_floor {
            m[k * n + k] = C64::new(pivot_floor, 0.0);
        }
        let piv = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let t = m[k * n + j];
                m[i * n + j] -= f * t;
            }
            let t = x[k];
            x[i] -= f * t;
        }
    }
    for k in (0..n).rev() {
        let s: C64 = (k + 1..n).map(|j| m[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k * n + k];
    }
    x
}

fn normalize(v: &mut [C64]) -> bool {
    let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    if !(norm > 0.0 && norm.is_finite()) {
        return false;
    }
    // fix the phase so the largest entry is real positive
    let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    let phase = big.conj() / big.norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
    true
}

/// Residual `‖Mv − λv‖`.
pub fn eigen_residual(m: &DenseMatrix, value: C64, v: &[C64]) -> f64 {
    let mv = m.mul_vec(v);
    libm::sqrt(mv.iter().zip(v).map(|(a, b)| (a - b * value).norm_sqr()).sum())
}

/// Eigenvector for a known eigenvalue by inverse iteration.
pub fn eigenvector(m: &DenseMatrix, value: C64, cfg: &EigenConfig) -> EigenPair {
    let n = m.n;
    let scale = m.frobenius_norm().max(1.0);
    let mut shifted = m.clone();
    for i in 0..n {
        shifted.set(i, i, m.get(i, i) - value);
    }
    let floor = f64::EPSILON * scale;
    let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0, 0.0) + C64::new(0.0, 1e-3 * i as f64)).collect();
    normalize(&mut v);
    for _ in 0..cfg.inverse_iterations.max(1) {
        let mut y = lu_solve(&shifted, &v, floor);
        if !normalize(&mut y) {
            break;
        }
        v = y;
    }
    let residual = eigen_residual(m, value, &v);
    EigenPair { value, vector: v, residual }
}

/// Full eigendecomposition: eigenvalues by QR, vectors by inverse iteration.
pub fn eigen_decompose(m: &DenseMatrix, cfg: &EigenConfig) -> Result<Vec<EigenPair>, SolveError> {
    let values = eigenvalues(m, cfg)?;
    Ok(values.into_iter().map(|l| eigenvector(m, l, cfg)).collect())
}

/// Rayleigh quotient `v*Mv / v*v` and its residual `‖Mv − ρv‖`.
pub fn rayleigh_value(m: &DenseMatrix, v: &[C64]) -> (C64, f64) {
    let mv = m.mul_vec(v);
    let num: C64 = v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let rho = num / den;
    let res = libm::sqrt(mv.iter().zip(v).map(|(a, b)| (a - b * rho).norm_sqr()).sum());
    (rho, res)
}

/// Coefficients uniform on `[−1, 1]` from a ChaCha8 stream.
pub fn random_coefficients(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0).collect()
}

/// A random combination of commuting matrices; generically its eigenvalues
/// are simple wherever the joint spectrum is.
pub fn random_combination(mats: &[&DenseMatrix], seed: u64) -> (DenseMatrix, Vec<f64>) {
    let c = random_coefficients(mats.len(), seed);
    (DenseMatrix::linear_combination(mats, &c), c)
}

/// Smallest pairwise eigenvalue gap.
pub fn min_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sorted_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn companion_of_u2_minus_4() {
        let m = real(&[&[0.0, 1.0], &[4.0, 0.0]]);
        let ev = sorted_re(eigenvalues(&m, &EigenConfig::default()).unwrap());
        assert!((ev[0] - C64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - C64::new(2.0, 0.0)).norm() < 1e-12);
        for p in eigen_decompose(&m, &EigenConfig::default()).unwrap() {
            assert!(p.residual < 1e-12);
            // eigenvector ∝ (1, u)
            let ratio = p.vector[1] / p.vector[0];
            assert!((ratio - p.value).norm() < 1e-10);
        }
    }

    #[test]
    fn complex_pair() {
        let m = real(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let ev = sorted_re(eigenvalues(&m, &EigenConfig::default()).unwrap());
        assert!(ev.iter().all(|z| (z.im.abs() - 1.0).abs() < 1e-12 && z.re.abs() < 1e-12));
    }

    #[test]
    fn identity_and_defective() {
        let ev = eigenvalues(&DenseMatrix::identity(4), &EigenConfig::default()).unwrap();
        assert!(ev.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-14));
        let j = real(&[&[2.0, 1.0], &[0.0, 2.0]]);
        let ev = eigenvalues(&j, &EigenConfig::default()).unwrap();
        assert!(ev.iter().all(|z| (z - C64::new(2.0, 0.0)).norm() < 1e-7));
    }

    #[test]
    fn deterministic_coefficients() {
        assert_eq!(random_coefficients(5, 42), random_coefficients(5, 42));
        assert_ne!(random_coefficients(5, 42), random_coefficients(5, 43));
        assert!(random_coefficients(100, 1).iter().all(|c| (-1.0..=1.0).contains(c)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn trace_and_residuals(entries in proptest::collection::vec(-10.0f64..10.0, 1..=49)) {
            let n = (entries.len() as f64).sqrt() as usize;
            let rows: Vec<Vec<f64>> = (0..n).map(|i| entries[i * n..(i + 1) * n].to_vec()).collect();
            let m = DenseMatrix::from_real_rows(&rows).unwrap();
            let pairs = eigen_decompose(&m, &EigenConfig::default()).unwrap();
            let sum: C64 = pairs.iter().map(|p| p.value).sum();
            let norm = m.frobenius_norm();
            prop_assert!((sum - m.trace()).norm() <= 1e-9 * (1.0 + norm));
            let gap = min_gap(&pairs.iter().map(|p| p.value).collect::<Vec<_>>());
            if gap > 1e-3 * (1.0 + norm) {
                for p in &pairs {
                    prop_assert!(p.residual <= 1e-8 * (1.0 + norm), "residual {}", p.residual);
                }
            }
        }
    }
}
