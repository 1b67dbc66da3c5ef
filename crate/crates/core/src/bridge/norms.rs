//! The bridge seminorms built from coherent states:
//! `N_n(f, T) = sup_x ‖f(x) α_x(P^n) − α_x(P^n) T‖` between C(S²) and B^n and
//! `N_mn(S, T) = sup_x ‖(S⊗I) ω_mn(x) − ω_mn(x) (I⊗T)‖` between B^m and B^n,
//! where ω_mn(x) projects onto v^m(x) ⊗ v^n(x). Both reduce node-wise to the
//! rank-one kernel, so nothing larger than d_m or d_n is ever formed.

use std::sync::Arc;

use num_complex::Complex64;

use super::kernel::{ReducedDefect, ReducedSvd};
use crate::berezin::SUP_REFINEMENT;
use crate::error::{check_dim, Result};
use crate::exec;
use crate::group_rep::{coherent_vector, CosetPoint, EvalGrid, Irrep, QuadratureGrid};
use crate::harmonics::{real_basis_at, HarmonicExpansion};
use crate::linalg::{c, CMat, CVec};
use crate::quantum_metric::FunctionSamples;

fn split(x: &CVec, v: &CVec) -> (Complex64, CVec, f64) {
    let along = v.dotc(x);
    let perp = x - v * along;
    let norm = perp.norm();
    let unit = if norm > 0.0 {
        perp / c(norm)
    } else {
        CVec::zeros(v.len())
    };
    (along, unit, norm)
}

/// Node-wise data of N_n between real expansions of a fixed degree and B^n.
#[derive(Debug, Clone)]
pub struct AbBridge {
    pub n: usize,
    pub degree: usize,
    nodes: Vec<CosetPoint>,
    vectors: Vec<CVec>,
    basis: Vec<Vec<f64>>,
}

/// Value of a node defect with the gradient pieces used by the ascents.
#[derive(Debug, Clone)]
pub struct AbNodeGradient {
    pub value: f64,
    /// Derivative with respect to the real function value f(x).
    pub d_value: f64,
    /// Kernel K with `Re tr(E K)` the derivative along a Hermitian E.
    pub kernel: CMat,
}

impl AbBridge {
    pub fn new(n: usize, degree: usize, nodes: Vec<CosetPoint>) -> Self {
        let vectors = exec::map_slice(&nodes, |x| coherent_vector(n, x));
        let basis = exec::map_slice(&nodes, |x| real_basis_at(degree, x));
        Self {
            n,
            degree,
            nodes,
            vectors,
            basis,
        }
    }

    /// Nodes of `grid` refined by the sup-norm factor.
    pub fn for_grid(n: usize, degree: usize, grid: &QuadratureGrid) -> Self {
        Self::new(n, degree, EvalGrid::refine(grid, SUP_REFINEMENT).nodes)
    }

    pub fn nodes(&self) -> &[CosetPoint] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Real basis values at node k.
    pub fn basis(&self, k: usize) -> &[f64] {
        &self.basis[k]
    }

    pub fn function_value(&self, k: usize, z: &[f64]) -> f64 {
        self.basis[k].iter().zip(z).map(|(a, b)| a * b).sum()
    }

    fn reduce(&self, k: usize, fx: Complex64, t: &CMat) -> (ReducedDefect, CVec) {
        let v = &self.vectors[k];
        let b = t.adjoint() * v;
        let (beta, w_hat, bn) = split(&b, v);
        (
            ReducedDefect {
                c: fx - beta.conj(),
                a_perp: 0.0,
                b_perp: bn,
            },
            w_hat,
        )
    }

    pub fn node_value(&self, k: usize, fx: Complex64, t: &CMat) -> f64 {
        self.reduce(k, fx, t).0.norm()
    }

    pub fn node_gradient(&self, k: usize, fx: f64, t: &CMat) -> AbNodeGradient {
        let (red, w_hat) = self.reduce(k, c(fx), t);
        let ReducedSvd { value, p, q } = red.svd();
        let v = &self.vectors[k];
        let d_value = (p[0].conj() * q[0]).re;
        let qv = v * q[0] + &w_hat * q[1];
        let kernel = -(qv * v.adjoint()) * p[0].conj();
        AbNodeGradient {
            value,
            d_value,
            kernel,
        }
    }

    /// Node values for a real expansion given by coordinates `z`.
    pub fn values(&self, z: &[f64], t: &CMat) -> Vec<f64> {
        exec::map_indices(self.len(), |k| {
            self.node_value(k, c(self.function_value(k, z)), t)
        })
    }

    /// (sup, argmax node) for real coordinates `z`.
    pub fn sup(&self, z: &[f64], t: &CMat) -> (f64, usize) {
        let vals = self.values(z, t);
        exec::argmax(&vals).map(|(k, v)| (v, k)).unwrap_or((0.0, 0))
    }

    /// Sup for an arbitrary (possibly complex) expansion.
    pub fn sup_expansion(&self, f: &HarmonicExpansion, t: &CMat) -> f64 {
        exec::map_indices(self.len(), |k| {
            self.node_value(k, f.eval(&self.nodes[k]), t)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// N_n(f, T) = ‖f ω_n − ω_n T‖: the maximum of the node defects over the
/// grid nodes and, when f carries a band limit, over a refined grid.
pub fn bridge_norm_ab(rep: &Irrep, f: &FunctionSamples, t: &CMat) -> Result<f64> {
    check_dim(rep.dim, t.nrows())?;
    check_dim(rep.dim, t.ncols())?;
    let grid = f.grid();
    let node_defect = |x: &CosetPoint, fx: Complex64| {
        let v = coherent_vector(rep.n, x);
        let b = t.adjoint() * &v;
        let (beta, _, bn) = split(&b, &v);
        ReducedDefect {
            c: fx - beta.conj(),
            a_perp: 0.0,
            b_perp: bn,
        }
        .norm()
    };
    let coarse = exec::map_indices(grid.len(), |k| node_defect(&grid.nodes[k], f.values()[k]));
    let mut best = coarse.into_iter().fold(0.0, f64::max);
    if let Ok(e) = f.expansion() {
        let eval = EvalGrid::refine(grid, SUP_REFINEMENT);
        let fine = exec::map_slice(&eval.nodes, |x| node_defect(x, e.eval(x)));
        best = fine.into_iter().fold(best, f64::max);
    }
    Ok(best)
}

/// Node-wise data of N_mn.
#[derive(Debug, Clone)]
pub struct BbBridge {
    pub m: usize,
    pub n: usize,
    nodes: Vec<CosetPoint>,
    vm: Vec<CVec>,
    vn: Vec<CVec>,
}

#[derive(Debug, Clone)]
pub struct BbNodeGradient {
    pub value: f64,
    pub kernel_s: CMat,
    pub kernel_t: CMat,
}

impl BbBridge {
    pub fn new(m: usize, n: usize, nodes: Vec<CosetPoint>) -> Self {
        let vm = exec::map_slice(&nodes, |x| coherent_vector(m, x));
        let vn = exec::map_slice(&nodes, |x| coherent_vector(n, x));
        Self {
            m,
            n,
            nodes,
            vm,
            vn,
        }
    }

    pub fn for_grid(m: usize, n: usize, grid: &QuadratureGrid) -> Self {
        Self::new(m, n, EvalGrid::refine(grid, SUP_REFINEMENT).nodes)
    }

    pub fn nodes(&self) -> &[CosetPoint] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Coherent vectors of both levels at node k.
    pub fn vectors(&self, k: usize) -> (&CVec, &CVec) {
        (&self.vm[k], &self.vn[k])
    }

    fn reduce(&self, k: usize, s: &CMat, t: &CMat) -> (ReducedDefect, CVec, CVec) {
        let (a, b) = (&self.vm[k], &self.vn[k]);
        let (alpha, u_hat, an) = split(&(s * a), a);
        let (beta, w_hat, bn) = split(&(t.adjoint() * b), b);
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

    pub fn node_value(&self, k: usize, s: &CMat, t: &CMat) -> f64 {
        self.reduce(k, s, t).0.norm()
    }

    pub fn node_gradient(&self, k: usize, s: &CMat, t: &CMat) -> BbNodeGradient {
        let (red, u_hat, w_hat) = self.reduce(k, s, t);
        let ReducedSvd { value, p, q } = red.svd();
        let (a, b) = (&self.vm[k], &self.vn[k]);
        let pa = a * p[0] + &u_hat * p[1];
        let kernel_s = (a * pa.adjoint()) * q[0];
        let qb = b * q[0] + &w_hat * q[1];
        let kernel_t = -(qb * (b * p[0]).adjoint());
        BbNodeGradient {
            value,
            kernel_s,
            kernel_t,
        }
    }

    pub fn values(&self, s: &CMat, t: &CMat) -> Vec<f64> {
        exec::map_indices(self.len(), |k| self.node_value(k, s, t))
    }

    pub fn sup(&self, s: &CMat, t: &CMat) -> (f64, usize) {
        exec::argmax(&self.values(s, t))
            .map(|(k, v)| (v, k))
            .unwrap_or((0.0, 0))
    }
}

/// N_mn(S, T) over the refined nodes of `grid`.
pub fn bridge_norm_bb(
    m: usize,
    n: usize,
    s: &CMat,
    t: &CMat,
    grid: &QuadratureGrid,
) -> Result<f64> {
    check_dim(m + 1, s.nrows())?;
    check_dim(m + 1, s.ncols())?;
    check_dim(n + 1, t.nrows())?;
    check_dim(n + 1, t.ncols())?;
    Ok(BbBridge::for_grid(m, n, grid).sup(s, t).0)
}

/// Shared handle used by seminorms and the sweep caches.
pub type SharedBbBridge = Arc<BbBridge>;
