use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CosetPoint;
use crate::error::{ProxError, Result};
use crate::linalg::{c, CMat, CVec, I, ZERO};

/// The spin-n/2 irreducible representation of SU(2) on H^n, dim d_n = n + 1.
///
/// Basis vector `k` carries J_z-weight `n/2 - k`, so index 0 is the
/// highest-weight vector ξ^n.
#[derive(Debug, Clone)]
pub struct Irrep {
    pub n: usize,
    pub dim: usize,
    pub j_z: DMatrix<f64>,
    pub j_plus: DMatrix<f64>,
    pub j_minus: DMatrix<f64>,
    pub highest_index: usize,
    generators: [CMat; 3],
    // J_y = Q diag(λ) Q*, used to exponentiate the section.
    jy_vectors: CMat,
    jy_values: Vec<f64>,
}

/// Builds the spin-n/2 irrep with standard (Condon–Shortley) ladder matrices.
pub fn make_irrep(n: usize) -> Result<Irrep> {
    if n < 1 {
        return Err(ProxError::InvalidParameter(
            "irrep index n must be at least 1".into(),
        ));
    }
    Ok(Irrep::build(n))
}

impl Irrep {
    fn build(n: usize) -> Self {
        let dim = n + 1;
        let j = n as f64 / 2.0;
        let weight = |k: usize| j - k as f64;
        let j_z = DMatrix::from_fn(dim, dim, |r, s| if r == s { weight(r) } else { 0.0 });
        // J+ |j, m> = sqrt(j(j+1) - m(m+1)) |j, m+1>, and weight m+1 sits at index k-1.
        let j_plus = DMatrix::from_fn(dim, dim, |r, s| {
            if s == r + 1 {
                let m = weight(s);
                (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
            } else {
                0.0
            }
        });
        let j_minus = j_plus.transpose();
        let jp = j_plus.map(c);
        let jm = j_minus.map(c);
        let jx = (&jp + &jm) * c(0.5);
        let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
        let jz = j_z.map(c);
        let eig = jy.clone().symmetric_eigen();
        Self {
            n,
            dim,
            j_z,
            j_plus,
            j_minus,
            highest_index: 0,
            generators: [jx, jy, jz],
            jy_vectors: eig.eigenvectors,
            jy_values: eig.eigenvalues.iter().copied().collect(),
        }
    }

    /// Spin j = n/2.
    pub fn spin(&self) -> f64 {
        self.n as f64 / 2.0
    }

    /// Complex generators (J_x, J_y, J_z); dU(X) = i Σ X_k J_k.
    pub fn generators(&self) -> &[CMat; 3] {
        &self.generators
    }

    /// Σ X_k J_k for a real direction X.
    pub fn generator_along(&self, x: [f64; 3]) -> CMat {
        let g = &self.generators;
        &g[0] * c(x[0]) + &g[1] * c(x[1]) + &g[2] * c(x[2])
    }

    pub fn highest_weight_vector(&self) -> CVec {
        let mut v = CVec::zeros(self.dim);
        v[self.highest_index] = c(1.0);
        v
    }

    /// exp(-iθ J_y).
    pub fn rotate_y(&self, theta: f64) -> CMat {
        let q = &self.jy_vectors;
        let phases = CMat::from_fn(self.dim, self.dim, |r, s| {
            if r == s {
                (-I * self.jy_values[r] * theta).exp()
            } else {
                ZERO
            }
        });
        q * phases * q.adjoint()
    }

    /// exp(-iφ J_z).
    pub fn rotate_z(&self, phi: f64) -> CMat {
        CMat::from_fn(self.dim, self.dim, |r, s| {
            if r == s {
                (-I * self.j_z[(r, r)] * phi).exp()
            } else {
                ZERO
            }
        })
    }

    /// α_g(T) = U T U*.
    pub fn act(&self, x: &CosetPoint, t: &CMat) -> CMat {
        let u = group_unitary(self, x);
        &u * t * u.adjoint()
    }
}

/// U^n(g_x) for the fixed section g_(θ,φ) = exp(-iφ J_z) exp(-iθ J_y).
pub fn group_unitary(rep: &Irrep, x: &CosetPoint) -> CMat {
    rep.rotate_z(x.phi) * rep.rotate_y(x.theta)
}

fn sqrt_binomials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut b = 1.0_f64;
    for k in 0..=n {
        out.push(b.sqrt());
        b = b * (n - k) as f64 / (k + 1) as f64;
    }
    out
}

/// The coherent vector U^n(g_x) ξ^n in closed form:
/// component k is √C(n,k) cos^{n-k}(θ/2) sin^k(θ/2) e^{-iφ(n/2 - k)}.
pub fn coherent_vector(n: usize, x: &CosetPoint) -> CVec {
    let (s, cc) = (x.theta / 2.0).sin_cos();
    let binom = sqrt_binomials(n);
    let j = n as f64 / 2.0;
    CVec::from_fn(n + 1, |k, _| {
        let mag = binom[k] * cc.powi((n - k) as i32) * s.powi(k as i32);
        Complex64::from_polar(mag, -x.phi * (j - k as f64))
    })
}

/// Coherent vector and its rank-one projection α_x(P^n).
pub fn coherent_state(rep: &Irrep, x: &CosetPoint) -> (CVec, CMat) {
    let v = coherent_vector(rep.n, x);
    let p = &v * v.adjoint();
    (v, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, identity};

    fn real(m: &DMatrix<f64>) -> CMat {
        m.map(c)
    }

    #[test]
    fn ladder_commutators_hold() {
        for n in 1..=12 {
            let rep = make_irrep(n).unwrap();
            let (jz, jp, jm) = (real(&rep.j_z), real(&rep.j_plus), real(&rep.j_minus));
            assert!((commutator(&jz, &jp) - &jp).norm() < 1e-12);
            assert!((commutator(&jz, &jm) + &jm).norm() < 1e-12);
            assert!((commutator(&jp, &jm) - &jz * c(2.0)).norm() < 1e-12);
            let xi = rep.highest_weight_vector();
            assert!((&jp * &xi).norm() < 1e-15);
            assert_eq!(rep.dim, n + 1);
        }
    }

    #[test]
    fn small_irreps_match_closed_forms() {
        let r1 = make_irrep(1).unwrap();
        assert_eq!(r1.j_z[(0, 0)], 0.5);
        assert_eq!(r1.j_z[(1, 1)], -0.5);
        assert_eq!(r1.j_plus.iter().filter(|x| **x != 0.0).count(), 1);
        assert_eq!(r1.j_plus[(0, 1)], 1.0);
        let r2 = make_irrep(2).unwrap();
        assert_eq!(
            (r2.j_z[(0, 0)], r2.j_z[(1, 1)], r2.j_z[(2, 2)]),
            (1.0, 0.0, -1.0)
        );
        assert!(make_irrep(0).is_err());
    }

    #[test]
    fn unitary_is_unitary_and_identity_at_north() {
        let rep = make_irrep(6).unwrap();
        let u0 = group_unitary(&rep, &CosetPoint::NORTH);
        assert!((&u0 - identity(7)).norm() < 1e-12);
        for &(t, p) in &[(0.3, 1.0), (2.9, 5.0), (std::f64::consts::PI, 0.2)] {
            let u = group_unitary(&rep, &CosetPoint::new(t, p).unwrap());
            assert!((u.adjoint() * &u - identity(7)).norm() < 1e-12);
        }
    }

    #[test]
    fn half_turn_flips_spin_half() {
        let rep = make_irrep(1).unwrap();
        let u = group_unitary(&rep, &CosetPoint::new(std::f64::consts::PI, 0.0).unwrap());
        let image = &u * rep.highest_weight_vector();
        assert!(image[0].norm() < 1e-14);
        assert!((image[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_coherent_vector_matches_unitary() {
        for n in [1, 2, 5, 9] {
            let rep = make_irrep(n).unwrap();
            for &(t, p) in &[
                (0.0, 0.0),
                (0.7, 2.2),
                (2.5, 6.0),
                (std::f64::consts::PI, 1.0),
            ] {
                let x = CosetPoint::new(t, p).unwrap();
                let direct = group_unitary(&rep, &x) * rep.highest_weight_vector();
                let closed = coherent_vector(n, &x);
                assert!((direct - &closed).norm() < 1e-12, "n={n} x={x:?}");
                assert!((closed.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent_projection_properties() {
        let rep = make_irrep(1).unwrap();
        let x = CosetPoint::new(1.2, 0.4).unwrap();
        let (v, p) = coherent_state(&rep, &x);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((&p - p.adjoint()).norm() < 1e-12);
        assert!((crate::linalg::trace(&p).re - 1.0).abs() < 1e-12);
        let two_jz = real(&rep.j_z) * c(2.0);
        let expect = (v.adjoint() * two_jz * &v)[(0, 0)].re;
        assert!((expect - x.theta.cos()).abs() < 1e-12);
        let (_, pn) = coherent_state(&rep, &CosetPoint::NORTH);
        let xi = rep.highest_weight_vector();
        assert!((pn - &xi * xi.adjoint()).norm() < 1e-15);
    }
}
