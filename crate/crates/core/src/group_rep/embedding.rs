use super::make_irrep;
use crate::error::{ProxError, Result};
use crate::linalg::{c, CMat, CVec};

/// Isometry V: H^{m+n} → H^m ⊗ H^n onto the top component, with
/// Π^{mn} = V V*.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub m: usize,
    pub n: usize,
    /// Columns are the weight basis of H^{m+n}, highest weight first.
    pub v: CMat,
}

impl Embedding {
    pub fn dim_product(&self) -> usize {
        (self.m + 1) * (self.n + 1)
    }

    pub fn dim_top(&self) -> usize {
        self.m + self.n + 1
    }

    /// Π^{mn} as a dense matrix.
    pub fn projection(&self) -> CMat {
        &self.v * self.v.adjoint()
    }
}

/// Builds V by iterated total lowering from ξ^m ⊗ ξ^n with renormalization.
pub fn highest_weight_embedding(m: usize, n: usize) -> Result<Embedding> {
    if m < 1 || n < 1 {
        return Err(ProxError::InvalidParameter(
            "embedding levels must be at least 1".into(),
        ));
    }
    let (rm, rn) = (make_irrep(m)?, make_irrep(n)?);
    let (dm, dn) = (m + 1, n + 1);
    let top = m + n + 1;
    let mut v = CMat::zeros(dm * dn, top);
    let mut col = CVec::zeros(dm * dn);
    col[0] = c(1.0);
    for k in 0..top {
        v.set_column(k, &col);
        if k + 1 == top {
            break;
        }
        // (J- ⊗ I + I ⊗ J-) applied entrywise; J- has one subdiagonal.
        let mut next = CVec::zeros(dm * dn);
        for a in 0..dm {
            for b in 0..dn {
                let x = col[a * dn + b];
                if x.norm() == 0.0 {
                    continue;
                }
                if a + 1 < dm {
                    next[(a + 1) * dn + b] += x * rm.j_minus[(a + 1, a)];
                }
                if b + 1 < dn {
                    next[a * dn + b + 1] += x * rn.j_minus[(b + 1, b)];
                }
            }
        }
        let norm = next.norm();
        col = next / c(norm);
    }
    Ok(Embedding { m, n, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_rep::{coherent_vector, group_unitary, CosetPoint};
    use crate::linalg::{identity, kron, kron_vec};

    #[test]
    fn spin_half_pair_gives_triplet() {
        let e = highest_weight_embedding(1, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |11>, (|10> + |01>)/√2, |00> in the (up, down) basis.
        let expected = [
            [1.0, 0.0, 0.0],
            [0.0, s, 0.0],
            [0.0, s, 0.0],
            [0.0, 0.0, 1.0],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (k, &x) in row.iter().enumerate() {
                assert!((e.v[(r, k)].re - x).abs() < 1e-14 && e.v[(r, k)].im == 0.0);
            }
        }
    }

    #[test]
    fn isometry_and_invariance() {
        for &(m, n) in &[(1, 2), (2, 3), (3, 3), (4, 1)] {
            let e = highest_weight_embedding(m, n).unwrap();
            let top = e.dim_top();
            assert!((e.v.adjoint() * &e.v - identity(top)).norm() < 1e-12);
            let pi = e.projection();
            let (rm, rn, rt) = (
                make_irrep(m).unwrap(),
                make_irrep(n).unwrap(),
                make_irrep(m + n).unwrap(),
            );
            for &(t, p) in &[(0.4, 1.3), (2.2, 4.4)] {
                let x = CosetPoint::new(t, p).unwrap();
                let u = kron(&group_unitary(&rm, &x), &group_unitary(&rn, &x));
                assert!((&u * &pi - &pi * &u).norm() < 1e-10);
                // V intertwines U^{m+n} with U^m ⊗ U^n.
                assert!((&u * &e.v - &e.v * group_unitary(&rt, &x)).norm() < 1e-10);
                // Coherent vectors factor: V v^{m+n}(x) = v^m(x) ⊗ v^n(x).
                let lhs = &e.v * coherent_vector(m + n, &x);
                let rhs = kron_vec(&coherent_vector(m, &x), &coherent_vector(n, &x));
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}
