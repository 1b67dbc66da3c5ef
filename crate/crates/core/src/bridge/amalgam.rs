//! Amalgamation of two bridges over a commutative middle algebra C(X) on a
//! finite node set. D = C(X, B^m) and E = C(X, B^n) are bimodules with
//! distinguished elements d₀, e₀; the amalgam is F = C(X, B^m ⊗ B^n) with
//! f₀(x) = d₀(x) ⊗ e₀(x). Middle elements act by scalars at each node, so
//! `(a⊗I) f₀ − f₀ (I⊗c) = (a d₀ − d₀ b) ⊗ e₀ + d₀ ⊗ (b e₀ − e₀ c)`.

use crate::error::{check_dim, ProxError, Result};
use crate::exec;
use crate::group_rep::{coherent_vector, CosetPoint};
use crate::linalg::{identity, kron, op_norm, outer, CMat};
use crate::quantum_metric::{BridgeTerm, DirectSumSeminorm, Summand};

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct AmalgamSpec {
    pub m: usize,
    pub n: usize,
    pub nodes: Vec<CosetPoint>,
    /// d₀ at each node, of size d_m.
    pub d0: Vec<CMat>,
    /// e₀ at each node, of size d_n.
    pub e0: Vec<CMat>,
    pub gamma_d: f64,
    pub gamma_e: f64,
}

impl AmalgamSpec {
    /// d₀ = ω_m and e₀ = ω_n on the given nodes.
    pub fn coherent(
        m: usize,
        n: usize,
        nodes: Vec<CosetPoint>,
        gamma_d: f64,
        gamma_e: f64,
    ) -> Self {
        let proj = |k: usize, x: &CosetPoint| {
            let v = coherent_vector(k, x);
            outer(&v, &v)
        };
        let d0 = exec::map_slice(&nodes, |x| proj(m, x));
        let e0 = exec::map_slice(&nodes, |x| proj(n, x));
        Self {
            m,
            n,
            nodes,
            d0,
            e0,
            gamma_d,
            gamma_e,
        }
    }

    fn validate(&self) -> Result<()> {
        check_dim(self.nodes.len(), self.d0.len())?;
        check_dim(self.nodes.len(), self.e0.len())?;
        for (d, e) in self.d0.iter().zip(&self.e0) {
            check_dim(self.m + 1, d.nrows())?;
            check_dim(self.m + 1, d.ncols())?;
            check_dim(self.n + 1, e.nrows())?;
            check_dim(self.n + 1, e.ncols())?;
        }
        for (name, parts) in [("d0", &self.d0), ("e0", &self.e0)] {
            let norm = parts.iter().map(op_norm).fold(0.0, f64::max);
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(ProxError::InvalidParameter(format!(
                    "{name} must have norm 1, found {norm}"
                )));
            }
        }
        if !(self.gamma_d > 0.0 && self.gamma_e > 0.0) {
            return Err(ProxError::InvalidParameter(
                "bridge constants must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Evaluators for N_D, N_E and N_F of a validated spec.
#[derive(Debug, Clone)]
pub struct Amalgam {
    spec: AmalgamSpec,
    f0: Vec<CMat>,
}

impl Amalgam {
    pub fn spec(&self) -> &AmalgamSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.nodes.is_empty()
    }

    fn check_middle(&self, b: &[num_complex::Complex64]) -> Result<()> {
        check_dim(self.len(), b.len())
    }

    /// sup_x ‖a d₀(x) − d₀(x) b(x)‖.
    pub fn n_d(&self, a: &CMat, b: &[num_complex::Complex64]) -> Result<f64> {
        check_dim(self.spec.m + 1, a.nrows())?;
        self.check_middle(b)?;
        Ok(sup(self.len(), |k| {
            let d = &self.spec.d0[k];
            op_norm(&(a * d - d * b[k]))
        }))
    }

    /// sup_x ‖b(x) e₀(x) − e₀(x) c‖.
    pub fn n_e(&self, b: &[num_complex::Complex64], c: &CMat) -> Result<f64> {
        check_dim(self.spec.n + 1, c.nrows())?;
        self.check_middle(b)?;
        Ok(sup(self.len(), |k| {
            let e = &self.spec.e0[k];
            op_norm(&(e * b[k] - e * c))
        }))
    }

    /// sup_x ‖(a⊗I) f₀(x) − f₀(x) (I⊗c)‖, by dense singular values.
    pub fn n_f(&self, a: &CMat, c: &CMat) -> Result<f64> {
        check_dim(self.spec.m + 1, a.nrows())?;
        check_dim(self.spec.n + 1, c.nrows())?;
        let left = kron(a, &identity(self.spec.n + 1));
        let right = kron(&identity(self.spec.m + 1), c);
        Ok(sup(self.len(), |k| {
            let f = &self.f0[k];
            op_norm(&(&left * f - f * &right))
        }))
    }

    /// N_F as a seminorm term, valid when d₀ and e₀ are coherent projections.
    pub fn bridge_term(&self) -> Option<BridgeTerm> {
        let coherent =
            AmalgamSpec::coherent(self.spec.m, self.spec.n, self.spec.nodes.clone(), 1.0, 1.0);
        let same = coherent
            .d0
            .iter()
            .zip(&self.spec.d0)
            .chain(coherent.e0.iter().zip(&self.spec.e0))
            .all(|(x, y)| (x - y).norm() <= UNIT_TOL);
        same.then(|| {
            BridgeTerm::Bb(std::sync::Arc::new(super::BbBridge::new(
                self.spec.m,
                self.spec.n,
                self.spec.nodes.clone(),
            )))
        })
    }
}

fn sup<F: Fn(usize) -> f64 + Sync + Send>(len: usize, f: F) -> f64 {
    exec::map_indices(len, f).into_iter().fold(0.0, f64::max)
}

/// The amalgamated evaluator and its constant γ_D + γ_E.
pub fn amalgamate(spec: AmalgamSpec) -> Result<(Amalgam, f64)> {
    spec.validate()?;
    let f0: Vec<CMat> = spec
        .d0
        .iter()
        .zip(&spec.e0)
        .map(|(d, e)| kron(d, e))
        .collect();
    if f0.iter().all(|f| op_norm(f) == 0.0) {
        return Err(ProxError::DegenerateAmalgam);
    }
    let gamma = spec.gamma_d + spec.gamma_e;
    Ok((Amalgam { spec, f0 }, gamma))
}

/// `L_left ∨ L_right ∨ γ⁻¹(N ∨ N*)`.
pub fn combined_seminorm(
    gamma: f64,
    left: Summand,
    right: Summand,
    bridge: BridgeTerm,
) -> Result<DirectSumSeminorm> {
    DirectSumSeminorm::new(gamma, left, right, bridge)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::bridge::BbBridge;
    use crate::group_rep::{sphere_grid, EvalGrid};
    use crate::linalg::random_hermitian;

    fn nodes() -> Vec<CosetPoint> {
        EvalGrid::new(6, 8).nodes
    }

    #[test]
    fn coherent_instance_matches_bb_bridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (m, n) in [(1, 1), (2, 3), (4, 2)] {
            let (amalgam, gamma) =
                amalgamate(AmalgamSpec::coherent(m, n, nodes(), 0.5, 0.25)).unwrap();
            assert_eq!(gamma, 0.75);
            let bb = BbBridge::new(m, n, nodes());
            for _ in 0..5 {
                let s = random_hermitian(m + 1, &mut rng);
                let t = random_hermitian(n + 1, &mut rng);
                let dense = amalgam.n_f(&s, &t).unwrap();
                assert!((dense - bb.sup(&s, &t).0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn triangle_inequality_of_the_amalgam() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (amalgam, _) = amalgamate(AmalgamSpec::coherent(2, 3, nodes(), 1.0, 1.0)).unwrap();
        for _ in 0..30 {
            let a = random_hermitian(3, &mut rng);
            let c = random_hermitian(4, &mut rng);
            let b: Vec<Complex64> = (0..amalgam.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let f = amalgam.n_f(&a, &c).unwrap();
            let bound = amalgam.n_d(&a, &b).unwrap() + amalgam.n_e(&b, &c).unwrap();
            assert!(f <= bound + 1e-9);
        }
    }

    #[test]
    fn nondegenerate_and_degenerate() {
        let (amalgam, _) = amalgamate(AmalgamSpec::coherent(1, 2, nodes(), 1.0, 1.0)).unwrap();
        let one = identity(2);
        let zero = CMat::zeros(3, 3);
        assert!((amalgam.n_f(&one, &zero).unwrap() - 1.0).abs() < 1e-12);

        // d₀ and e₀ supported on disjoint nodes.
        let mut spec = AmalgamSpec::coherent(1, 1, nodes(), 1.0, 1.0);
        let half = spec.nodes.len() / 2;
        for k in 0..spec.nodes.len() {
            if k < half {
                spec.d0[k].fill(Complex64::new(0.0, 0.0));
            } else {
                spec.e0[k].fill(Complex64::new(0.0, 0.0));
            }
        }
        assert!(matches!(
            amalgamate(spec),
            Err(ProxError::DegenerateAmalgam)
        ));
    }

    #[test]
    fn rejects_non_unit_elements() {
        let mut spec = AmalgamSpec::coherent(1, 1, nodes(), 1.0, 1.0);
        spec.d0[0] *= Complex64::new(2.0, 0.0);
        assert!(amalgamate(spec).is_err());
    }

    #[test]
    fn bridge_term_only_for_coherent_specs() {
        let grid = sphere_grid(4).unwrap();
        let (amalgam, _) =
            amalgamate(AmalgamSpec::coherent(1, 1, grid.nodes.clone(), 1.0, 1.0)).unwrap();
        assert!(amalgam.bridge_term().is_some());
        let mut spec = AmalgamSpec::coherent(1, 1, grid.nodes.clone(), 1.0, 1.0);
        spec.e0[0] = identity(2);
        let (other, _) = amalgamate(spec).unwrap();
        assert!(other.bridge_term().is_none());
    }
}
