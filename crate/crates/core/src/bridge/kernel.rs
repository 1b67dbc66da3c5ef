//! Exact operator norm of `M = A v v* − v v* B` for a unit vector v.
//!
//! With `a = A v`, `b = B* v`, `α = v*a`, `β = v*b` and the components
//! `a⊥ = a − α v`, `b⊥ = b − β v`, the map M sends `v ↦ c v + a⊥` and
//! `b⊥/|b⊥| ↦ −|b⊥| v` (with `c = α − β̄`) and kills everything orthogonal to
//! both, so its norm is the top singular value of the 2×2 matrix
//! `[[c, −|b⊥|], [|a⊥|, 0]]`.

use num_complex::Complex64;

use crate::error::{check_dim, ProxError, Result};
use crate::linalg::{c, CMat, CVec, ZERO};

/// Reduced 2×2 data of a rank-one defect.
#[derive(Debug, Clone, Copy)]
pub struct ReducedDefect {
    pub c: Complex64,
    pub a_perp: f64,
    pub b_perp: f64,
}

/// Norm of the reduced defect and its top singular vectors in the reduced
/// coordinates: `range = p[0] v + p[1] û`, `domain = q[0] v + q[1] ŵ`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedSvd {
    pub value: f64,
    pub p: [Complex64; 2],
    pub q: [Complex64; 2],
}

impl ReducedDefect {
    pub fn norm(&self) -> f64 {
        let f = self.c.norm_sqr() + self.a_perp * self.a_perp + self.b_perp * self.b_perp;
        let det = self.a_perp * self.b_perp;
        0.5 * ((f + 2.0 * det).max(0.0).sqrt() + (f - 2.0 * det).max(0.0).sqrt())
    }

    pub fn svd(&self) -> ReducedSvd {
        let s = self.norm();
        let (cc, ap, bp) = (self.c, self.a_perp, self.b_perp);
        if s == 0.0 {
            return ReducedSvd {
                value: 0.0,
                p: [c(1.0), ZERO],
                q: [c(1.0), ZERO],
            };
        }
        // C*C = [[|c|² + ap², −c̄ bp], [−c bp, bp²]]
        let h11 = cc.norm_sqr() + ap * ap;
        let h12 = -cc.conj() * bp;
        let h22 = bp * bp;
        let lam = s * s;
        let y1 = [h12, c(lam - h11)];
        let y2 = [c(lam - h22), h12.conj()];
        let n1 = (y1[0].norm_sqr() + y1[1].norm_sqr()).sqrt();
        let n2 = (y2[0].norm_sqr() + y2[1].norm_sqr()).sqrt();
        let q = if n1 >= n2 && n1 > 0.0 {
            [y1[0] / n1, y1[1] / n1]
        } else if n2 > 0.0 {
            [y2[0] / n2, y2[1] / n2]
        } else {
            [c(1.0), ZERO]
        };
        // p = C q / s
        let p = [(cc * q[0] - q[1] * bp) / s, q[0] * ap / s];
        ReducedSvd { value: s, p, q }
    }
}

/// Full-space singular vectors of a defect together with the reduction basis.
#[derive(Debug, Clone)]
pub struct DefectWitness {
    pub value: f64,
    /// Left singular vector (range side).
    pub p: CVec,
    /// Right singular vector (domain side).
    pub q: CVec,
}

fn split(x: &CVec, v: &CVec) -> (Complex64, CVec, f64) {
    let along = v.dotc(x);
    let perp = x - v * along;
    let norm = perp.norm();
    (along, perp, norm)
}

/// Defect data from `a = A v` and `b = B* v`.
pub fn reduce(a: &CVec, b: &CVec, v: &CVec) -> (ReducedDefect, CVec, CVec) {
    let (alpha, a_perp, an) = split(a, v);
    let (beta, b_perp, bn) = split(b, v);
    let u_hat = if an > 0.0 {
        a_perp / c(an)
    } else {
        CVec::zeros(v.len())
    };
    let w_hat = if bn > 0.0 {
        b_perp / c(bn)
    } else {
        CVec::zeros(v.len())
    };
    (
        ReducedDefect {
            c: alpha - beta.conj(),
            a_perp: an,
            b_perp: bn,
        },
        u_hat,
        w_hat,
    )
}

/// ‖A v v* − v v* B‖ via the 2×2 reduction.
pub fn rank_one_defect(a_op: &CMat, b_op: &CMat, v: &CVec) -> Result<f64> {
    Ok(rank_one_defect_witness(a_op, b_op, v)?.value)
}

/// As [`rank_one_defect`], also returning top singular vectors.
pub fn rank_one_defect_witness(a_op: &CMat, b_op: &CMat, v: &CVec) -> Result<DefectWitness> {
    let d = v.len();
    check_dim(d, a_op.nrows())?;
    check_dim(d, a_op.ncols())?;
    check_dim(d, b_op.nrows())?;
    check_dim(d, b_op.ncols())?;
    let vn = v.norm();
    if (vn - 1.0).abs() > 1e-10 {
        return Err(ProxError::InvalidParameter(format!(
            "defect vector must be a unit vector, |v| = {vn}"
        )));
    }
    let a = a_op * v;
    let b = b_op.adjoint() * v;
    let (red, u_hat, w_hat) = reduce(&a, &b, v);
    let svd = red.svd();
    let p = v * svd.p[0] + &u_hat * svd.p[1];
    let q = v * svd.q[0] + &w_hat * svd.q[1];
    Ok(DefectWitness {
        value: svd.value,
        p,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, op_norm, outer, random_complex_matrix, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense(a: &CMat, b: &CMat, v: &CVec) -> f64 {
        let p = outer(v, v);
        op_norm(&(a * &p - &p * b))
    }

    #[test]
    fn identity_pair_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_unit_vector(5, &mut rng);
        assert!(rank_one_defect(&identity(5), &identity(5), &v).unwrap() < 1e-15);
    }

    #[test]
    fn scalar_against_eigenvector() {
        let b = CMat::from_diagonal(&CVec::from_vec(vec![c(0.3), c(-1.2), c(2.0)]));
        let v = CVec::from_vec(vec![ZERO, c(1.0), ZERO]);
        let a = identity(3) * c(0.7);
        assert!((rank_one_defect(&a, &b, &v).unwrap() - 1.9).abs() < 1e-14);
    }

    #[test]
    fn spin_half_closed_form() {
        use crate::group_rep::{coherent_vector, make_irrep, CosetPoint};
        let rep = make_irrep(1).unwrap();
        let two_jz = rep.j_z.map(c) * c(2.0);
        for theta in [0.0, 0.4, 1.3, 2.8, std::f64::consts::PI] {
            let x = CosetPoint::new(theta, 0.9).unwrap();
            let v = coherent_vector(1, &x);
            let expect = (v.adjoint() * &two_jz * &v)[(0, 0)];
            let a = identity(2) * expect;
            let val = rank_one_defect(&a, &two_jz, &v).unwrap();
            assert!((val - theta.sin().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_dense_norm_and_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for d in 1..=8 {
            for _ in 0..10 {
                let a = random_complex_matrix(d, d, &mut rng);
                let b = random_complex_matrix(d, d, &mut rng);
                let v = random_unit_vector(d, &mut rng);
                let w = rank_one_defect_witness(&a, &b, &v).unwrap();
                let oracle = dense(&a, &b, &v);
                assert!((w.value - oracle).abs() < 1e-10 * oracle.max(1.0));
                let p = outer(&v, &v);
                let m = &a * &p - &p * &b;
                let realized = (w.p.adjoint() * m * &w.q)[(0, 0)];
                assert!((realized.re - w.value).abs() < 1e-10 * oracle.max(1.0));
            }
        }
    }

    #[test]
    fn rejects_non_unit_vectors() {
        let v = CVec::from_vec(vec![c(2.0), ZERO]);
        assert!(rank_one_defect(&identity(2), &identity(2), &v).is_err());
    }
}
