//! Empirical bridge constants with Berezin partners:
//! `γ̂^A_n = sup N_n(f, σ̌^n_f) / L_A(f)` over real f of degree ≤ n and
//! `γ̂^B_n = sup N_n(σ^n_T, T) / L^B_n(T)` over Hermitian T.
//!
//! Both ratios are rotation invariant, so ascents work with the defect at the
//! north pole alone. Reported values take the full refined sup.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::norms::AbBridge;
use crate::berezin::{SMOOTHING, SUP_REFINEMENT};
use crate::error::{ProxError, Result};
use crate::exec;
use crate::group_rep::{coherent_vector, make_irrep, CosetPoint, EvalGrid, Irrep, QuadratureGrid};
use crate::harmonics::{coeff_count, real_basis_at};
use crate::linalg::{
    c, dot, herm_dim, herm_from_params, herm_grad, herm_params, identity_params, random_hermitian,
    CMat, CVec,
};
use crate::optimize::{ratio_ascent, AscentOptions, RatioEval, RatioObjective};
use crate::quantum_metric::{
    matrix_lipschitz, matrix_lipschitz_witness, FunctionLipschitz, SmoothMatrixLipschitz,
};

const SMOOTH_DIRECTIONS: usize = 128;

#[derive(Debug, Clone, Copy)]
pub struct GammaOptions {
    pub family_size: usize,
    /// Number of best family members refined by ascent.
    pub starts: usize,
    pub seed: u64,
    pub ascent: AscentOptions,
}

impl Default for GammaOptions {
    fn default() -> Self {
        Self {
            family_size: 64,
            starts: 3,
            seed: 0,
            ascent: AscentOptions {
                max_iter: 80,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct GammaEstimates {
    pub n: usize,
    pub gamma_a: f64,
    pub gamma_b: f64,
    /// Maximizing function (real coordinates), normalized to L_A = 1.
    pub witness_a: Vec<f64>,
    /// Maximizing operator, normalized to L^B_n = 1.
    pub witness_b: CMat,
}

impl GammaEstimates {
    /// max(γ̂^A_n, γ̂^B_n).
    pub fn gamma(&self) -> f64 {
        self.gamma_a.max(self.gamma_b)
    }
}

/// Shared data for both constants at one n.
pub struct GammaContext {
    rep: Irrep,
    count: usize,
    /// Hermitian coordinates of σ̌^n applied to each real basis function.
    lower_basis: Vec<Vec<f64>>,
    lipschitz: FunctionLipschitz,
    smooth: SmoothMatrixLipschitz,
    north: AbBridge,
    refined: AbBridge,
}

impl GammaContext {
    pub fn new(n: usize, grid: &QuadratureGrid) -> Result<Self> {
        let rep = make_irrep(n)?;
        if grid.exact_degree < 2 * n {
            return Err(ProxError::UnsupportedDegree {
                requested: 2 * n,
                supported: grid.exact_degree,
            });
        }
        let count = coeff_count(n);
        let d = rep.dim;
        let projections: Vec<CMat> = exec::map_slice(&grid.nodes, |x| {
            let v = coherent_vector(n, x);
            &v * v.adjoint()
        });
        let basis: Vec<Vec<f64>> = exec::map_slice(&grid.nodes, |x| real_basis_at(n, x));
        let lower_basis = exec::map_indices(count, |j| {
            let mut m = CMat::zeros(d, d);
            for (k, p) in projections.iter().enumerate() {
                m += p * c(grid.weights[k] * basis[k][j]);
            }
            herm_params(&(m * c(d as f64)))
        });
        Ok(Self {
            count,
            lower_basis,
            lipschitz: FunctionLipschitz::new(n),
            smooth: SmoothMatrixLipschitz::new(&rep, SMOOTH_DIRECTIONS),
            north: AbBridge::new(n, n, vec![CosetPoint::NORTH]),
            refined: AbBridge::new(n, n, EvalGrid::refine(grid, SUP_REFINEMENT).nodes),
            rep,
        })
    }

    pub fn n(&self) -> usize {
        self.rep.n
    }

    pub fn irrep(&self) -> &Irrep {
        &self.rep
    }

    /// σ̌^n of the real expansion with coordinates `z`.
    pub fn lower(&self, z: &[f64]) -> CMat {
        let mut p = vec![0.0; herm_dim(self.rep.dim)];
        for (zj, row) in z.iter().zip(&self.lower_basis) {
            p.iter_mut().zip(row).for_each(|(a, b)| *a += zj * b);
        }
        herm_from_params(&p, self.rep.dim)
    }

    pub fn function_lipschitz(&self, z: &[f64]) -> f64 {
        self.lipschitz.value(z)
    }

    /// N_n(f, σ̌^n_f) / L_A(f) over all refined nodes.
    pub fn ratio_a(&self, z: &[f64]) -> f64 {
        let lip = self.lipschitz.value(z);
        if lip <= 0.0 {
            return 0.0;
        }
        self.refined.sup(z, &self.lower(z)).0 / lip
    }

    /// N_n(σ^n_T, T) over all refined nodes.
    pub fn symbol_defect(&self, t: &CMat) -> f64 {
        exec::map_slice(self.refined.nodes(), |x| {
            variance_defect(&coherent_vector(self.rep.n, x), t).0
        })
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// N_n(σ^n_T, T) / L^B_n(T) over all refined nodes.
    pub fn ratio_b(&self, t: &CMat) -> Result<f64> {
        let lip = matrix_lipschitz(&self.rep, t)?;
        if lip <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.symbol_defect(t) / lip)
    }
}

/// ‖(T − ⟨v,Tv⟩)v‖ for Hermitian T with the unit vector ŵ along the defect.
fn variance_defect(v: &CVec, t: &CMat) -> (f64, CVec) {
    let tv = t * v;
    let beta = v.dotc(&tv);
    let w = tv - v * beta;
    let r = w.norm();
    let unit = if r > 0.0 {
        w / c(r)
    } else {
        CVec::zeros(v.len())
    };
    (r, unit)
}

struct RatioA<'a> {
    ctx: &'a GammaContext,
    p: Option<f64>,
}

impl RatioObjective for RatioA<'_> {
    fn dim(&self) -> usize {
        self.ctx.count
    }

    fn evaluate(&self, z: &[f64]) -> RatioEval {
        let ctx = self.ctx;
        let t = ctx.lower(z);
        let ng = ctx
            .north
            .node_gradient(0, ctx.north.function_value(0, z), &t);
        let kg = herm_grad(&ng.kernel);
        let grad_num = ctx
            .north
            .basis(0)
            .iter()
            .zip(&ctx.lower_basis)
            .map(|(b, row)| ng.d_value * b + dot(row, &kg))
            .collect();
        let (den, grad_den) = match self.p {
            Some(p) => ctx.lipschitz.smooth_value_grad(z, p),
            None => {
                let (v, g, _) = ctx.lipschitz.value_grad(z);
                (v, g)
            }
        };
        RatioEval {
            num: ng.value,
            den,
            grad_num,
            grad_den,
        }
    }

    fn project(&self, z: &mut [f64]) {
        z[0] = 0.0;
    }
}

struct RatioB<'a> {
    ctx: &'a GammaContext,
    north: CVec,
    iota: Vec<f64>,
    p: Option<f64>,
}

impl RatioObjective for RatioB<'_> {
    fn dim(&self) -> usize {
        self.iota.len()
    }

    fn evaluate(&self, z: &[f64]) -> RatioEval {
        let rep = &self.ctx.rep;
        let t = herm_from_params(z, rep.dim);
        let (num, w) = variance_defect(&self.north, &t);
        let kernel = &self.north * w.adjoint();
        let (den, den_kernel) = match self.p {
            Some(p) => self.ctx.smooth.value_kernel(&t, p),
            None => {
                let wit = matrix_lipschitz_witness(rep, &t, None).expect("dimensions checked");
                (wit.value, wit.gradient_kernel(rep))
            }
        };
        RatioEval {
            num,
            den,
            grad_num: herm_grad(&kernel),
            grad_den: herm_grad(&den_kernel),
        }
    }

    fn project(&self, z: &mut [f64]) {
        let ii = dot(&self.iota, &self.iota);
        let s = dot(z, &self.iota) / ii;
        z.iter_mut().zip(&self.iota).for_each(|(a, b)| *a -= s * b);
    }
}

/// Test family for A: one zonal harmonic per degree 1..n, then seeded random
/// real expansions of degree ≤ n with coefficients decaying in the degree.
pub fn function_family(n: usize, size: usize, seed: u64) -> Vec<Vec<f64>> {
    let count = coeff_count(n);
    let mut out = Vec::with_capacity(size);
    for l in 1..=n.min(size) {
        let mut z = vec![0.0; count];
        z[l * l + l] = 1.0;
        out.push(z);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < size {
        let z: Vec<f64> = (0..count)
            .map(|j| {
                let l = (j as f64).sqrt().floor();
                if j == 0 {
                    0.0
                } else {
                    rng.sample::<f64, _>(StandardNormal) / (1.0 + l)
                }
            })
            .collect();
        out.push(z);
    }
    out
}

/// Test family for B^n: σ̌^n images of the first half of the function family,
/// then seeded random Hermitian matrices.
pub fn operator_family(ctx: &GammaContext, size: usize, seed: u64) -> Vec<CMat> {
    let half = size.div_ceil(2);
    let mut out: Vec<CMat> = function_family(ctx.n(), half, seed)
        .iter()
        .map(|z| ctx.lower(z))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    while out.len() < size {
        out.push(random_hermitian(ctx.rep.dim, &mut rng));
    }
    out
}

fn top_indices(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b)));
    order.truncate(k);
    order
}

/// γ̂^A_n and γ̂^B_n. `grid` must integrate degree 2n exactly.
pub fn gamma_estimates(
    n: usize,
    grid: &Arc<QuadratureGrid>,
    opts: &GammaOptions,
) -> Result<GammaEstimates> {
    let ctx = GammaContext::new(n, grid)?;
    gamma_with_context(&ctx, opts)
}

pub fn gamma_with_context(ctx: &GammaContext, opts: &GammaOptions) -> Result<GammaEstimates> {
    if opts.family_size == 0 {
        return Err(ProxError::InvalidParameter(
            "test family must be nonempty".into(),
        ));
    }
    let rep = &ctx.rep;

    let fam_a = function_family(ctx.n(), opts.family_size, opts.seed);
    let scores_a = exec::map_slice(&fam_a, |z| ctx.ratio_a(z));
    let mut best_a = (0.0, fam_a[0].clone());
    for (z, s) in fam_a.iter().zip(&scores_a) {
        if *s > best_a.0 {
            best_a = (*s, z.clone());
        }
    }
    let starts_a = top_indices(&scores_a, opts.starts);
    let refined_a = exec::map_slice(&starts_a, |&k| {
        let mut z = fam_a[k].clone();
        for (stage, p) in SMOOTHING.iter().map(|p| Some(*p)).chain([None]).enumerate() {
            let res = ratio_ascent(
                &RatioA { ctx, p },
                &z,
                AscentOptions {
                    seed: opts.seed.wrapping_add((k * 8 + stage) as u64),
                    ..opts.ascent
                },
            );
            z = res.z;
        }
        (ctx.ratio_a(&z), z)
    });
    for (r, z) in refined_a {
        if r > best_a.0 {
            best_a = (r, z);
        }
    }

    let fam_b = operator_family(ctx, opts.family_size, opts.seed);
    let scores_b = fam_b
        .iter()
        .map(|t| ctx.ratio_b(t))
        .collect::<Result<Vec<_>>>()?;
    let mut best_b = (0.0, fam_b[0].clone());
    for (t, s) in fam_b.iter().zip(&scores_b) {
        if *s > best_b.0 {
            best_b = (*s, t.clone());
        }
    }
    let north = coherent_vector(ctx.n(), &CosetPoint::NORTH);
    let iota = identity_params(rep.dim);
    let starts_b = top_indices(&scores_b, opts.starts);
    let refined_b = exec::map_slice(&starts_b, |&k| {
        let mut z = herm_params(&fam_b[k]);
        for (stage, p) in SMOOTHING.iter().map(|p| Some(*p)).chain([None]).enumerate() {
            let obj = RatioB {
                ctx,
                north: north.clone(),
                iota: iota.clone(),
                p,
            };
            let res = ratio_ascent(
                &obj,
                &z,
                AscentOptions {
                    seed: opts.seed.wrapping_add((k * 8 + stage) as u64 + 1),
                    ..opts.ascent
                },
            );
            z = res.z;
        }
        let t = herm_from_params(&z, rep.dim);
        (ctx.ratio_b(&t), t)
    });
    for (r, t) in refined_b {
        let r = r?;
        if r > best_b.0 {
            best_b = (r, t);
        }
    }

    let lip_a = ctx.function_lipschitz(&best_a.1);
    let witness_a = if lip_a > 0.0 {
        best_a.1.iter().map(|v| v / lip_a).collect()
    } else {
        best_a.1
    };
    let lip_b = matrix_lipschitz(rep, &best_b.1)?;
    let witness_b = if lip_b > 0.0 {
        &best_b.1 / c(lip_b)
    } else {
        best_b.1
    };
    Ok(GammaEstimates {
        n: ctx.n(),
        gamma_a: best_a.0,
        gamma_b: best_b.0,
        witness_a,
        witness_b,
    })
}
