//! Small dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Operator norm of a Hermitian matrix via its spectrum.
pub fn herm_op_norm(h: &CMat) -> f64 {
    let ev = h.clone().symmetric_eigenvalues();
    ev.iter().fold(0.0_f64, |a, &x| a.max(x.abs()))
}

/// Top singular triple `(s, p, q)` with `m q = s p`, unit `p`, `q`.
pub fn top_singular(m: &CMat) -> (f64, CVec, CVec) {
    let svd = m.clone().svd(true, true);
    let (idx, s) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bs), (i, &s)| {
                if s > bs {
                    (i, s)
                } else {
                    (bi, bs)
                }
            });
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let p = u.column(idx).into_owned();
    let q = v_t.row(idx).adjoint().into_owned();
    (s, p, q)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Real parameter count of the d×d Hermitian matrices.
pub fn herm_dim(d: usize) -> usize {
    d * d
}

/// Frobenius-orthonormal coordinates of a Hermitian matrix. Diagonal entries
/// first, then `(√2 Re h_ij, √2 Im h_ij)` for `i < j` in row-major order.
pub fn herm_params(h: &CMat) -> Vec<f64> {
    let d = h.nrows();
    let mut z = Vec::with_capacity(d * d);
    for i in 0..d {
        z.push(h[(i, i)].re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let hij = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            z.push(s * hij.re);
            z.push(s * hij.im);
        }
    }
    z
}

/// Inverse of [`herm_params`].
pub fn herm_from_params(z: &[f64], d: usize) -> CMat {
    debug_assert_eq!(z.len(), d * d);
    let mut h = CMat::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = c(z[i]);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let v = Complex64::new(z[k] * r, z[k + 1] * r);
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
            k += 2;
        }
    }
    h
}

/// Gradient of the real functional `E ↦ Re tr(E K)` in the coordinates of
/// [`herm_params`].
pub fn herm_grad(k: &CMat) -> Vec<f64> {
    let d = k.nrows();
    let mut g = Vec::with_capacity(d * d);
    for i in 0..d {
        g.push(k[(i, i)].re);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            g.push((k[(j, i)].re + k[(i, j)].re) * r);
            g.push((k[(i, j)].im - k[(j, i)].im) * r);
        }
    }
    g
}

/// Coordinates of the identity in [`herm_params`] form.
pub fn identity_params(d: usize) -> Vec<f64> {
    let mut z = vec![0.0; d * d];
    z[..d].iter_mut().for_each(|x| *x = 1.0);
    z
}

/// Kronecker product of vectors; index `(a, b)` maps to `a * b.len() + b`.
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let nb = b.len();
    CVec::from_fn(a.len() * nb, |k, _| a[k / nb] * b[k % nb])
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `Tr_2(x y*)` for vectors on `C^{dm} ⊗ C^{dn}`.
pub fn partial_trace_second(x: &CVec, y: &CVec, dm: usize, dn: usize) -> CMat {
    CMat::from_fn(dm, dm, |a, ap| {
        (0..dn).map(|b| x[a * dn + b] * y[ap * dn + b].conj()).sum()
    })
}

/// `Tr_1(x y*)` for vectors on `C^{dm} ⊗ C^{dn}`.
pub fn partial_trace_first(x: &CVec, y: &CVec, dm: usize, dn: usize) -> CMat {
    CMat::from_fn(dn, dn, |b, bp| {
        (0..dm).map(|a| x[a * dn + b] * y[a * dn + bp].conj()).sum()
    })
}

/// `(S ⊗ I_n) x` without forming the Kronecker product.
pub fn apply_left_factor(s: &CMat, x: &CVec, dn: usize) -> CVec {
    let dm = s.nrows();
    CVec::from_fn(dm * dn, |k, _| {
        let (a, b) = (k / dn, k % dn);
        (0..dm).map(|ap| s[(a, ap)] * x[ap * dn + b]).sum()
    })
}

/// `(I_m ⊗ T) x` without forming the Kronecker product.
pub fn apply_right_factor(t: &CMat, x: &CVec, dm: usize) -> CVec {
    let dn = t.nrows();
    debug_assert_eq!(x.len(), dm * dn);
    CVec::from_fn(dm * dn, |k, _| {
        let (a, b) = (k / dn, k % dn);
        (0..dn).map(|bp| t[(b, bp)] * x[a * dn + bp]).sum()
    })
}

pub fn outer(x: &CVec, y: &CVec) -> CMat {
    x * y.adjoint()
}

/// Sample from the Gaussian unitary ensemble, Frobenius-normalized to 1.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let z: Vec<f64> = (0..d * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = z
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let z: Vec<f64> = z.into_iter().map(|x| x / norm).collect();
    herm_from_params(&z, d)
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let n = v.norm();
    v / c(n)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn herm_params_roundtrip_and_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(4, &mut rng);
        let za = herm_params(&a);
        let back = herm_from_params(&za, 4);
        assert!((&back - &a).norm() < 1e-14);
        let tr = trace(&(&a * &b)).re;
        assert!((tr - dot(&za, &herm_params(&b))).abs() < 1e-13);
    }

    #[test]
    fn herm_grad_is_gradient_of_re_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_complex_matrix(3, 3, &mut rng);
        let g = herm_grad(&k);
        let e = random_hermitian(3, &mut rng);
        let lhs = trace(&(&e * &k)).re;
        assert!((lhs - dot(&herm_params(&e), &g)).abs() < 1e-12);
    }

    #[test]
    fn factor_actions_match_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_complex_matrix(2, 2, &mut rng);
        let t = random_complex_matrix(3, 3, &mut rng);
        let x = random_unit_vector(6, &mut rng);
        let left = kron(&s, &identity(3)) * &x;
        let right = kron(&identity(2), &t) * &x;
        assert!((apply_left_factor(&s, &x, 3) - left).norm() < 1e-13);
        assert!((apply_right_factor(&t, &x, 2) - right).norm() < 1e-13);
    }

    #[test]
    fn partial_traces_match_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_unit_vector(6, &mut rng);
        let y = random_unit_vector(6, &mut rng);
        let e = random_complex_matrix(2, 2, &mut rng);
        let k = outer(&x, &y);
        let full = trace(&(kron(&e, &identity(3)) * &k));
        let reduced = trace(&(&e * partial_trace_second(&x, &y, 2, 3)));
        assert!((full - reduced).norm() < 1e-13);
        let f = random_complex_matrix(3, 3, &mut rng);
        let full = trace(&(kron(&identity(2), &f) * &k));
        let reduced = trace(&(&f * partial_trace_first(&x, &y, 2, 3)));
        assert!((full - reduced).norm() < 1e-13);
    }

    #[test]
    fn top_singular_triple_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_complex_matrix(4, 3, &mut rng);
        let (s, p, q) = top_singular(&m);
        assert!((&m * &q - &p * c(s)).norm() < 1e-12);
        assert!((s - op_norm(&m)).abs() < 1e-12);
    }
}
