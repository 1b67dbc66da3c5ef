//! Lipschitz seminorms in derivative form.
//!
//! With the bi-invariant metric whose orthonormal Lie-algebra basis acts as
//! `i J_k`, the seminorm of T ∈ B^n is `sup_{|X|=1} ‖[X·J, T]‖`, and for a
//! function on S² it is the supremum of the rotational derivative.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{check_dim, ProxError, Result};
use crate::exec;
use crate::group_rep::{CosetPoint, EvalGrid, Irrep};
use crate::harmonics::{
    coeff_count, derivative_bound, expansion_lipschitz, harmonics_at, HarmonicExpansion,
};
use crate::linalg::{
    c, commutator, herm_op_norm, is_hermitian, op_norm, top_singular, CMat, CVec, I,
};
use crate::sphere_opt::{compass_polish, Polish};

use super::FunctionSamples;

const COARSE_DIRECTIONS: usize = 64;
const MAX_STARTS: usize = 16;
/// Coarse directions within this fraction of the coarse maximum seed ascents.
const START_FRACTION: f64 = 0.85;
/// A start this aligned with an ascent endpoint already found is skipped.
const SAME_BASIN: f64 = 0.95;

/// Fibonacci points on the upper hemisphere. The objective is even in X, so
/// these cover the whole direction sphere at twice the nominal density.
fn fibonacci_hemisphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            [r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

fn coarse_directions() -> &'static [[f64; 3]] {
    static DIRS: OnceLock<Vec<[f64; 3]>> = OnceLock::new();
    DIRS.get_or_init(|| fibonacci_hemisphere(COARSE_DIRECTIONS))
}

/// Maximizer data for `sup_X ‖[X·J, T]‖`: the value equals
/// `Re⟨p, [X·J, T] q⟩`.
#[derive(Debug, Clone)]
pub struct LipschitzWitness {
    pub value: f64,
    pub direction: [f64; 3],
    pub p: CVec,
    pub q: CVec,
}

impl LipschitzWitness {
    /// K with `Re tr(E K)` the derivative of the witnessed value along E.
    pub fn gradient_kernel(&self, rep: &Irrep) -> CMat {
        let xj = rep.generator_along(self.direction);
        let qp = &self.q * self.p.adjoint();
        &qp * &xj - &xj * &qp
    }
}

fn combine(cs: &[CMat; 3], x: [f64; 3]) -> CMat {
    &cs[0] * c(x[0]) + &cs[1] * c(x[1]) + &cs[2] * c(x[2])
}

/// Full evaluation with a maximizing witness. `hint` adds a warm-start
/// direction to the coarse scan.
pub fn matrix_lipschitz_witness(
    rep: &Irrep,
    t: &CMat,
    hint: Option<[f64; 3]>,
) -> Result<LipschitzWitness> {
    check_dim(rep.dim, t.nrows())?;
    check_dim(rep.dim, t.ncols())?;
    let g = rep.generators();
    let cs = [
        commutator(&g[0], t),
        commutator(&g[1], t),
        commutator(&g[2], t),
    ];
    let hermitian = is_hermitian(t, 1e-12);
    // For Hermitian T the combination is anti-Hermitian and i·M is Hermitian.
    let norm_of = |x: [f64; 3]| {
        let m = combine(&cs, x);
        if hermitian {
            herm_op_norm(&(m * I))
        } else {
            op_norm(&m)
        }
    };
    let dirs = coarse_directions();
    let values: Vec<f64> = dirs.iter().map(|&x| norm_of(x)).collect();
    let top = values.iter().cloned().fold(0.0, f64::max);
    let mut starts: Vec<([f64; 3], f64)> = dirs
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v >= START_FRACTION * top)
        .map(|(x, v)| (*x, *v))
        .collect();
    if let Some(h) = hint {
        let r = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        if r > 0.0 {
            let h = [h[0] / r, h[1] / r, h[2] / r];
            starts.push((h, norm_of(h)));
        }
    }
    starts.sort_by(|a, b| b.1.total_cmp(&a.1));
    starts.truncate(MAX_STARTS);
    let mut best: Option<LipschitzWitness> = None;
    let mut reached: Vec<[f64; 3]> = Vec::new();
    for &(x, _) in &starts {
        if reached.iter().any(|y| dot3(x, *y).abs() > SAME_BASIN) {
            continue;
        }
        let w = ascend(&cs, x, hermitian);
        reached.push(w.direction);
        if best.as_ref().is_none_or(|b| w.value > b.value) {
            best = Some(w);
        }
    }
    let mut best = best.expect("the coarse scan has a maximum");
    let (px, pv) = polish_direction(&norm_of, best.direction, best.value);
    if pv > best.value * (1.0 + 1e-12) {
        let w = ascend(&cs, px, hermitian);
        best = if w.value >= pv {
            w
        } else {
            let (s, p, q) = top_pair(&combine(&cs, px), hermitian);
            LipschitzWitness {
                value: s,
                direction: px,
                p,
                q,
            }
        };
    }
    Ok(best)
}

/// Alternating ascent: X ← normalize(Re⟨p, C_k q⟩), (p, q) ← top singular
/// pair of Σ X_k C_k. The value never decreases.
fn ascend(cs: &[CMat; 3], x0: [f64; 3], hermitian: bool) -> LipschitzWitness {
    let mut x = x0;
    let (mut s, mut p, mut q) = top_pair(&combine(cs, x), hermitian);
    for _ in 0..200 {
        let grad: Vec<f64> = cs
            .iter()
            .map(|ck| (p.adjoint() * ck * &q)[(0, 0)].re)
            .collect();
        let r = (grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]).sqrt();
        if r == 0.0 {
            break;
        }
        let nx = [grad[0] / r, grad[1] / r, grad[2] / r];
        let (ns, np, nq) = top_pair(&combine(cs, nx), hermitian);
        if ns <= s * (1.0 + 1e-10) {
            if ns > s {
                (x, s, p, q) = (nx, ns, np, nq);
            }
            break;
        }
        (x, s, p, q) = (nx, ns, np, nq);
    }
    LipschitzWitness {
        value: s,
        direction: x,
        p,
        q,
    }
}

/// Top singular triple of M. When M is anti-Hermitian the eigenvectors of
/// i·M are singular vectors, which is cheaper than an SVD.
fn top_pair(m: &CMat, anti_hermitian: bool) -> (f64, CVec, CVec) {
    if !anti_hermitian {
        return top_singular(m);
    }
    let eig = (m * I).symmetric_eigen();
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bk, bl), (k, &l)| {
            if l.abs() > bl.abs() {
                (k, l)
            } else {
                (bk, bl)
            }
        });
    let q = eig.eigenvectors.column(k).into_owned();
    let p = &q * Complex64::new(0.0, -lambda.signum());
    (lambda.abs(), p, q)
}

/// Compass search on the direction sphere. Catches the stalls of the
/// alternating ascent where top singular values cross.
fn polish_direction<F: Fn([f64; 3]) -> f64>(f: &F, x0: [f64; 3], v0: f64) -> ([f64; 3], f64) {
    let (mut x, mut v) = (x0, v0);
    let mut h = 0.02;
    while h > 1e-8 {
        let helper = if x[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let e1 = normalize3(cross(x, helper));
        let e2 = cross(x, e1);
        let mut moved = false;
        for (a, b) in [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (0.7, 0.7),
            (-0.7, 0.7),
            (0.7, -0.7),
            (-0.7, -0.7),
        ] {
            let y = normalize3([
                x[0] + h * (a * e1[0] + b * e2[0]),
                x[1] + h * (a * e1[1] + b * e2[1]),
                x[2] + h * (a * e1[2] + b * e2[2]),
            ]);
            let fy = f(y);
            if fy > v {
                (x, v, moved) = (y, fy, true);
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (x, v)
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let r = norm3(a);
    [a[0] / r, a[1] / r, a[2] / r]
}

/// L^B_n(T) = sup over unit Lie-algebra directions of ‖[dU(X), T]‖.
pub fn matrix_lipschitz(rep: &Irrep, t: &CMat) -> Result<f64> {
    Ok(matrix_lipschitz_witness(rep, t, None)?.value)
}

/// L_A(f) for band-limited samples: the harmonic expansion up to `degree` is
/// recovered by quadrature (needs exactness 2·degree) and its rotational
/// derivative is maximized over a refined grid.
pub fn function_lipschitz(f: &FunctionSamples, degree: usize) -> Result<f64> {
    let grid = f.grid();
    if 2 * degree > grid.exact_degree {
        return Err(ProxError::UnsupportedDegree {
            requested: 2 * degree,
            supported: grid.exact_degree,
        });
    }
    let expansion = HarmonicExpansion::project(grid, f.values(), degree);
    let eval = EvalGrid::new(
        4 * grid.n_theta.max(degree + 2),
        4 * grid.n_phi.max(2 * degree + 2),
    );
    Ok(expansion_lipschitz(&expansion, &eval, Polish::DEFAULT).value)
}

/// L_A restricted to real expansions of a fixed degree, in the coordinates of
/// [`crate::harmonics::real_basis_at`], with a supergradient at the maximizing point.
#[derive(Debug, Clone)]
pub struct FunctionLipschitz {
    degree: usize,
    grid: EvalGrid,
    /// Per basis function, the ladder coefficients of its degree block.
    ladders: Vec<(usize, [Vec<Complex64>; 3])>,
    /// node-major table of Im (L_k B_j)(x): `[node][j][k]`.
    table: Vec<f64>,
    polish: Polish,
}

impl FunctionLipschitz {
    pub fn new(degree: usize) -> Self {
        Self::with_grid(
            degree,
            EvalGrid::new(3 * (degree + 1), 6 * (degree + 1)),
            Polish {
                starts: 1,
                min_step: 1e-7,
            },
        )
    }

    pub fn with_grid(degree: usize, grid: EvalGrid, polish: Polish) -> Self {
        let count = coeff_count(degree);
        let ladders: Vec<(usize, [Vec<Complex64>; 3])> = (0..count)
            .map(|j| {
                let mut e = vec![0.0; count];
                e[j] = 1.0;
                let l = (j as f64).sqrt().floor() as usize;
                let lad = HarmonicExpansion::from_real_params(degree, &e).ladder();
                let block = |h: &HarmonicExpansion| h.coeffs[l * l..(l + 1) * (l + 1)].to_vec();
                (l, [block(&lad[0]), block(&lad[1]), block(&lad[2])])
            })
            .collect();
        let rows = exec::map_slice(&grid.nodes, |x| basis_rows(degree, &ladders, x));
        let table = rows.into_iter().flatten().collect();
        Self {
            degree,
            grid,
            ladders,
            table,
            polish,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn param_dim(&self) -> usize {
        coeff_count(self.degree)
    }

    pub fn grid(&self) -> &EvalGrid {
        &self.grid
    }

    fn gradient_at_node(&self, z: &[f64], node: usize) -> [f64; 3] {
        let width = 3 * z.len();
        let row = &self.table[node * width..(node + 1) * width];
        let mut g = [0.0; 3];
        for (j, zj) in z.iter().enumerate() {
            for k in 0..3 {
                g[k] += zj * row[3 * j + k];
            }
        }
        g
    }

    /// Value, supergradient in the real coordinates, and the maximizing point.
    pub fn value_grad(&self, z: &[f64]) -> (f64, Vec<f64>, CosetPoint) {
        assert_eq!(z.len(), self.param_dim());
        let values: Vec<f64> =
            exec::map_indices(self.grid.len(), |i| norm3(self.gradient_at_node(z, i)));
        let (node, scanned) = exec::argmax(&values).unwrap_or((0, 0.0));
        let mut point = self.grid.nodes[node];
        let mut value = scanned;
        if self.polish.starts > 0 && scanned > 0.0 {
            let f = HarmonicExpansion::from_real_params(self.degree, z);
            let ladder = f.ladder();
            let (p, v) = compass_polish(
                &|x: &CosetPoint| derivative_bound(&ladder, x),
                point,
                scanned,
                self.grid.spacing,
                self.polish.min_step,
            );
            if v > value {
                value = v;
                point = p;
            }
        }
        let rows = basis_rows(self.degree, &self.ladders, &point);
        let mut g = [0.0; 3];
        for (j, zj) in z.iter().enumerate() {
            for k in 0..3 {
                g[k] += zj * rows[3 * j + k];
            }
        }
        let r = norm3(g);
        let grad = if r > 0.0 {
            (0..z.len())
                .map(|j| (0..3).map(|k| g[k] * rows[3 * j + k]).sum::<f64>() / r)
                .collect()
        } else {
            vec![0.0; z.len()]
        };
        (value, grad, point)
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.value_grad(z).0
    }

    /// ℓ^p norm of the gradient lengths over the grid nodes, with gradient.
    pub fn smooth_value_grad(&self, z: &[f64], p: f64) -> (f64, Vec<f64>) {
        assert_eq!(z.len(), self.param_dim());
        let grads: Vec<[f64; 3]> =
            exec::map_indices(self.grid.len(), |i| self.gradient_at_node(z, i));
        let lens: Vec<f64> = grads.iter().map(|g| norm3(*g)).collect();
        let top = lens.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return (0.0, vec![0.0; z.len()]);
        }
        let value = top
            * lens
                .iter()
                .map(|v| (v / top).powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
        let width = 3 * z.len();
        let mut out = vec![0.0; z.len()];
        for (i, (g, len)) in grads.iter().zip(&lens).enumerate() {
            let w = (len / value).powf(p - 1.0);
            if w < 1e-300 || *len == 0.0 {
                continue;
            }
            let row = &self.table[i * width..(i + 1) * width];
            for (j, o) in out.iter_mut().enumerate() {
                let dot3 = g[0] * row[3 * j] + g[1] * row[3 * j + 1] + g[2] * row[3 * j + 2];
                *o += w * dot3 / len;
            }
        }
        (value, out)
    }
}

/// Smooth model of L^B_n for Hermitian T: the ℓ^p norm of the eigenvalues of
/// `i[X·J, T]` over a fixed set of directions X. It tends to the maximum over
/// the set as p grows.
#[derive(Debug, Clone)]
pub struct SmoothMatrixLipschitz {
    generators: Vec<CMat>,
}

impl SmoothMatrixLipschitz {
    pub fn new(rep: &Irrep, directions: usize) -> Self {
        let generators = fibonacci_hemisphere(directions)
            .into_iter()
            .map(|x| rep.generator_along(x))
            .collect();
        Self { generators }
    }

    /// Value and kernel K with `Re tr(E K)` the derivative along Hermitian E.
    pub fn value_kernel(&self, t: &CMat, p: f64) -> (f64, CMat) {
        let d = t.nrows();
        let eigs: Vec<_> = self
            .generators
            .iter()
            .map(|xj| ((xj * t - t * xj) * I).symmetric_eigen())
            .collect();
        let top = eigs
            .iter()
            .flat_map(|e| e.eigenvalues.iter())
            .fold(0.0_f64, |a, l| a.max(l.abs()));
        if top == 0.0 {
            return (0.0, CMat::zeros(d, d));
        }
        let sum: f64 = eigs
            .iter()
            .flat_map(|e| e.eigenvalues.iter())
            .map(|l| (l.abs() / top).powf(p))
            .sum();
        let value = top * sum.powf(1.0 / p);
        let mut kernel = CMat::zeros(d, d);
        for (e, xj) in eigs.iter().zip(&self.generators) {
            let mut w = CMat::zeros(d, d);
            for (k, l) in e.eigenvalues.iter().enumerate() {
                let s = (l.abs() / value).powf(p - 1.0) * l.signum();
                if s != 0.0 {
                    let u = e.eigenvectors.column(k);
                    w += u * u.adjoint() * c(s);
                }
            }
            kernel += (&w * xj - xj * &w) * I;
        }
        (value, kernel)
    }
}

fn norm3(g: [f64; 3]) -> f64 {
    (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
}

fn basis_rows(degree: usize, ladders: &[(usize, [Vec<Complex64>; 3])], x: &CosetPoint) -> Vec<f64> {
    let y = harmonics_at(degree, x);
    let mut out = Vec::with_capacity(3 * ladders.len());
    for (l, lad) in ladders {
        let ys = &y[l * l..(l + 1) * (l + 1)];
        for coeffs in lad {
            let w: Complex64 = ys.iter().zip(coeffs).map(|(a, b)| a * b).sum();
            out.push(w.im);
        }
    }
    out
}
