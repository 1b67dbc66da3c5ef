use std::f64::consts::{PI, TAU};

use super::CosetPoint;
use crate::error::{ProxError, Result};

/// Largest exactness degree accepted by [`sphere_grid`].
pub const MAX_EXACT_DEGREE: usize = 400;

/// Product Gauss–Legendre (in cos θ) × uniform (in φ) rule for the
/// normalized invariant measure on S².
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<CosetPoint>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&CosetPoint) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; count];
    let mut ws = vec![0.0; count];
    let nf = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[count - 1 - i] = x;
        ws[i] = w;
        ws[count - 1 - i] = w;
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Grid integrating every spherical harmonic of degree ≤ `exact_degree`
/// exactly.
pub fn sphere_grid(exact_degree: usize) -> Result<QuadratureGrid> {
    if exact_degree > MAX_EXACT_DEGREE {
        return Err(ProxError::UnsupportedDegree {
            requested: exact_degree,
            supported: MAX_EXACT_DEGREE,
        });
    }
    // 2 n_theta - 1 ≥ L for the polynomial part, n_phi > L for the Fourier part.
    let n_theta = exact_degree / 2 + 1;
    let n_phi = exact_degree + 1;
    let (xs, ws) = gauss_legendre(n_theta);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (x, w) in xs.iter().zip(&ws) {
        let theta = x.clamp(-1.0, 1.0).acos();
        for k in 0..n_phi {
            nodes.push(CosetPoint::new_unchecked(
                theta,
                TAU * k as f64 / n_phi as f64,
            ));
            weights.push(w / 2.0 / n_phi as f64);
        }
    }
    Ok(QuadratureGrid {
        nodes,
        weights,
        exact_degree,
        n_theta,
        n_phi,
    })
}

/// Evaluation nodes for suprema: equispaced in θ including both poles (each
/// pole once), equispaced in φ.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    pub nodes: Vec<CosetPoint>,
    /// Largest angular step, used as the initial step of local polishing.
    pub spacing: f64,
}

impl EvalGrid {
    pub fn new(theta_intervals: usize, n_phi: usize) -> Self {
        let ti = theta_intervals.max(2);
        let np = n_phi.max(3);
        let mut nodes = vec![CosetPoint::NORTH];
        for i in 1..ti {
            let theta = PI * i as f64 / ti as f64;
            for k in 0..np {
                nodes.push(CosetPoint::new_unchecked(theta, TAU * k as f64 / np as f64));
            }
        }
        nodes.push(CosetPoint::new_unchecked(PI, 0.0));
        Self {
            nodes,
            spacing: (PI / ti as f64).max(TAU / np as f64),
        }
    }

    /// `factor` times denser than `grid` in each angular direction.
    pub fn refine(grid: &QuadratureGrid, factor: usize) -> Self {
        let f = factor.max(1);
        Self::new(f * grid.n_theta, f * grid.n_phi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (xs, ws) = gauss_legendre(6);
        assert!((ws.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 10 ≤ 2·6 - 1
        let approx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(10)).sum();
        assert!((approx - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn grid_basic_integrals() {
        let g = sphere_grid(6).unwrap();
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(g.weights.iter().all(|w| *w > 0.0));
        assert!((g.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!(g.integrate(|x| x.theta.cos()).abs() < 1e-12);
        assert!((g.integrate(|x| x.theta.cos().powi(2)) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degree_cap() {
        assert!(matches!(
            sphere_grid(MAX_EXACT_DEGREE + 1),
            Err(ProxError::UnsupportedDegree { .. })
        ));
    }

    #[test]
    fn eval_grid_contains_poles() {
        let g = EvalGrid::new(8, 10);
        assert_eq!(g.len(), 2 + 7 * 10);
        assert_eq!(g.nodes[0].theta, 0.0);
        assert_eq!(g.nodes.last().unwrap().theta, PI);
    }
}
