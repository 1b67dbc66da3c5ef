//! Lipschitz seminorms on B^n and on functions on S², states, direct-sum
//! seminorms and the metric they induce on states.

mod lipschitz;
mod seminorm;
mod state_metric;

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ProxError, Result};
use crate::group_rep::{CosetPoint, QuadratureGrid};
use crate::harmonics::HarmonicExpansion;
use crate::linalg::{c, is_hermitian, trace, CMat};

pub use lipschitz::{
    function_lipschitz, matrix_lipschitz, matrix_lipschitz_witness, FunctionLipschitz,
    LipschitzWitness, SmoothMatrixLipschitz,
};
pub use seminorm::{BridgeTerm, DirectSumSeminorm, Element, Summand};
pub use state_metric::{
    state_metric, state_metric_placed, Side, StateMetricOptions, StateMetricResult,
};

/// Elements of B^n are plain complex matrices; Hermiticity is checked where
/// it matters.
pub type HermitianOperator = CMat;

/// A function on S² sampled at the nodes of a quadrature grid.
#[derive(Debug, Clone)]
pub struct FunctionSamples {
    grid: Arc<QuadratureGrid>,
    values: Vec<Complex64>,
    band_limit: Option<usize>,
}

impl FunctionSamples {
    pub fn new(
        grid: Arc<QuadratureGrid>,
        values: Vec<Complex64>,
        band_limit: Option<usize>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(ProxError::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            band_limit,
        })
    }

    pub fn from_fn<F>(grid: Arc<QuadratureGrid>, band_limit: Option<usize>, f: F) -> Self
    where
        F: Fn(&CosetPoint) -> Complex64,
    {
        let values = grid.nodes.iter().map(f).collect();
        Self {
            grid,
            values,
            band_limit,
        }
    }

    /// Samples of a real band-limited expansion.
    pub fn from_expansion(grid: Arc<QuadratureGrid>, f: &HarmonicExpansion) -> Self {
        let degree = f.degree;
        Self::from_fn(grid, Some(degree), |x| f.eval(x))
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn band_limit(&self) -> Option<usize> {
        self.band_limit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
            band_limit: self.band_limit,
        }
    }

    /// Pointwise difference; both sides must live on the same grid.
    pub fn sub(&self, other: &FunctionSamples) -> Result<Self> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.nodes != other.grid.nodes {
            return Err(ProxError::InvalidParameter(
                "samples live on different grids".into(),
            ));
        }
        let band_limit = match (self.band_limit, other.band_limit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
            band_limit,
        })
    }

    /// Harmonic expansion recovered by quadrature. Needs a declared band limit
    /// L with the grid exact to degree 2L.
    pub fn expansion(&self) -> Result<HarmonicExpansion> {
        let degree = self
            .band_limit
            .ok_or_else(|| ProxError::InvalidParameter("samples carry no band limit".into()))?;
        if 2 * degree > self.grid.exact_degree {
            return Err(ProxError::UnsupportedDegree {
                requested: 2 * degree,
                supported: self.grid.exact_degree,
            });
        }
        Ok(HarmonicExpansion::project(&self.grid, &self.values, degree))
    }
}

/// A state of B^n (density matrix) or of C(S²) restricted to a grid
/// (probability weights on the nodes).
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Density(CMat),
    Measure(Vec<f64>),
}

const STATE_TOL: f64 = 1e-12;

impl State {
    pub fn density(rho: CMat) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(ProxError::InvalidState(
                "density must be a nonempty square matrix".into(),
            ));
        }
        if !is_hermitian(&rho, 1e-10) {
            return Err(ProxError::InvalidState("density is not Hermitian".into()));
        }
        let tr = trace(&rho);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(ProxError::InvalidState(format!("density has trace {tr}")));
        }
        let low = SymmetricEigen::new(rho.clone()).eigenvalues.min();
        if low < -1e-10 {
            return Err(ProxError::InvalidState(format!(
                "density has eigenvalue {low}"
            )));
        }
        Ok(State::Density(rho))
    }

    pub fn measure(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(ProxError::InvalidState("empty measure".into()));
        }
        if let Some(w) = weights.iter().find(|w| **w < -STATE_TOL || !w.is_finite()) {
            return Err(ProxError::InvalidState(format!("negative weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(ProxError::InvalidState(format!("weights sum to {total}")));
        }
        Ok(State::Measure(weights))
    }

    /// Normalized trace on B^d.
    pub fn tracial(d: usize) -> Self {
        State::Density(CMat::identity(d, d) * c(1.0 / d as f64))
    }

    pub fn pure(v: &crate::linalg::CVec) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(ProxError::InvalidState("zero vector".into()));
        }
        let u = v / c(n);
        Ok(State::Density(&u * u.adjoint()))
    }

    pub fn dim(&self) -> usize {
        match self {
            State::Density(r) => r.nrows(),
            State::Measure(w) => w.len(),
        }
    }

    pub fn as_density(&self) -> Result<&CMat> {
        match self {
            State::Density(r) => Ok(r),
            State::Measure(_) => Err(ProxError::InvalidState("expected a density matrix".into())),
        }
    }

    /// μ(T) = tr(ρ T).
    pub fn expect(&self, t: &CMat) -> Result<Complex64> {
        let rho = self.as_density()?;
        crate::error::check_dim(rho.nrows(), t.nrows())?;
        Ok(trace(&(rho * t)))
    }

    /// μ(f) = Σ w_k f(x_k).
    pub fn integrate(&self, f: &FunctionSamples) -> Result<Complex64> {
        match self {
            State::Measure(w) => {
                crate::error::check_dim(w.len(), f.len())?;
                Ok(w.iter().zip(f.values()).map(|(w, v)| v * *w).sum())
            }
            State::Density(_) => Err(ProxError::InvalidState("expected a measure".into())),
        }
    }
}

/// Seeded random density matrix G G*/tr(G G*) with G complex Ginibre.
pub fn random_state(dim: usize, seed: u64) -> Result<State> {
    if dim == 0 {
        return Err(ProxError::InvalidParameter(
            "state dimension must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let p = &g * g.adjoint();
    let tr = trace(&p).re;
    let mut rho = p / c(tr);
    // exact Hermitian symmetry
    let sym = (&rho + rho.adjoint()) * c(0.5);
    rho = sym;
    Ok(State::Density(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_rep::sphere_grid;

    #[test]
    fn random_states_are_states() {
        for d in 1..=7 {
            for seed in 0..5 {
                let s = random_state(d, seed).unwrap();
                let rho = s.as_density().unwrap().clone();
                assert!(State::density(rho.clone()).is_ok());
                assert!((trace(&rho).re - 1.0).abs() < 1e-12);
            }
        }
        let one = random_state(1, 3).unwrap();
        assert!((one.as_density().unwrap()[(0, 0)] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn random_states_are_deterministic() {
        assert_eq!(random_state(4, 11).unwrap(), random_state(4, 11).unwrap());
        assert_ne!(random_state(4, 11).unwrap(), random_state(4, 12).unwrap());
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(State::density(CMat::identity(2, 2)).is_err());
        assert!(State::measure(vec![0.5, 0.6]).is_err());
        assert!(State::measure(vec![1.5, -0.5]).is_err());
        assert!(random_state(0, 1).is_err());
    }

    #[test]
    fn samples_check_lengths_and_recover_expansions() {
        let g = Arc::new(sphere_grid(6).unwrap());
        assert!(FunctionSamples::new(g.clone(), vec![c(0.0); 3], None).is_err());
        let f = FunctionSamples::from_fn(g.clone(), Some(2), |x| c(x.theta.cos().powi(2)));
        let e = f.expansion().unwrap();
        let x = CosetPoint::new(0.7, 0.1).unwrap();
        assert!((e.eval(&x).re - 0.7f64.cos().powi(2)).abs() < 1e-12);
        let too_high = FunctionSamples::from_fn(g, Some(4), |_| c(1.0));
        assert!(matches!(
            too_high.expansion(),
            Err(ProxError::UnsupportedDegree { .. })
        ));
    }
}
