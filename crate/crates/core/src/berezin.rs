//! Berezin symbols: the covariant symbol σ^n_T(x) = tr(α_x(P^n) T), the
//! contravariant operator σ̌^n_f = d_n ∫ f(x) α_x(P^n) dx, their composites,
//! and the defect constant δ̂^B_n.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, ProxError, Result};
use crate::exec;
use crate::group_rep::{
    coherent_vector, make_irrep, sphere_grid, CosetPoint, EvalGrid, Irrep, QuadratureGrid,
};
use crate::linalg::{
    c, commutator, herm_from_params, herm_grad, herm_params, identity, identity_params,
    random_hermitian, CMat, CVec, I,
};
use crate::optimize::{ratio_ascent, AscentOptions, RatioEval, RatioObjective};
use crate::quantum_metric::{
    matrix_lipschitz, matrix_lipschitz_witness, FunctionSamples, SmoothMatrixLipschitz,
};

/// Exponents of the smoothed objectives, run in order before the exact one.
pub const SMOOTHING: [f64; 3] = [8.0, 32.0, 128.0];
const SMOOTH_DIRECTIONS: usize = 128;

/// Nodes per angular direction of the sup-norm grid relative to the
/// quadrature grid.
pub const SUP_REFINEMENT: usize = 4;

/// σ^n_T at a single point.
pub fn upper_symbol_at(n: usize, t: &CMat, x: &CosetPoint) -> Complex64 {
    let v = coherent_vector(n, x);
    v.dotc(&(t * &v))
}

/// σ^n_T sampled on the grid. Symbols of B^n have degree at most n.
pub fn upper_symbol(rep: &Irrep, t: &CMat, grid: &Arc<QuadratureGrid>) -> Result<FunctionSamples> {
    check_dim(rep.dim, t.nrows())?;
    check_dim(rep.dim, t.ncols())?;
    let values = exec::map_slice(&grid.nodes, |x| upper_symbol_at(rep.n, t, x));
    FunctionSamples::new(grid.clone(), values, Some(rep.n))
}

/// σ̌^n_f = d_n Σ_k w_k f(x_k) α_{x_k}(P^n). Samples without a band limit are
/// treated as degree ≤ n.
pub fn lower_operator(rep: &Irrep, f: &FunctionSamples) -> Result<CMat> {
    let grid = f.grid();
    let needed = f.band_limit().unwrap_or(rep.n) + rep.n;
    if grid.exact_degree < needed {
        return Err(ProxError::UnsupportedDegree {
            requested: needed,
            supported: grid.exact_degree,
        });
    }
    let d = rep.dim;
    let acc = exec::chunked_sum(
        grid.len(),
        64,
        |range| {
            let mut m = CMat::zeros(d, d);
            for k in range {
                let v = coherent_vector(rep.n, &grid.nodes[k]);
                let s = f.values()[k] * grid.weights[k];
                m += &v * v.adjoint() * s;
            }
            m
        },
        |a, b| a + b,
    )
    .unwrap_or_else(|| CMat::zeros(d, d));
    Ok(acc * c(d as f64))
}

/// σ̌^n(σ^n_T).
pub fn berezin_transform(rep: &Irrep, t: &CMat, grid: &Arc<QuadratureGrid>) -> Result<CMat> {
    let symbol = upper_symbol(rep, t, grid)?;
    lower_operator(rep, &symbol)
}

/// Maximum modulus over the nodes. When the samples carry a band limit the
/// expansion is also evaluated on a grid [`SUP_REFINEMENT`] times denser.
pub fn symbol_sup_norm(f: &FunctionSamples) -> f64 {
    let on_nodes = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    match f.expansion() {
        Ok(e) => {
            let eval = EvalGrid::refine(f.grid(), SUP_REFINEMENT);
            let refined = exec::map_slice(&eval.nodes, |x| e.eval(x).norm());
            refined.into_iter().fold(on_nodes, f64::max)
        }
        Err(_) => on_nodes,
    }
}

/// ‖σ^n_T‖_∞ over an evaluation grid, computed directly from T.
pub fn operator_symbol_sup(n: usize, t: &CMat, grid: &EvalGrid) -> f64 {
    exec::map_slice(&grid.nodes, |x| upper_symbol_at(n, t, x).norm())
        .into_iter()
        .fold(0.0, f64::max)
}

fn vec_row_major(m: &CMat) -> CVec {
    let (r, cc) = m.shape();
    CVec::from_fn(r * cc, |k, _| m[(k / cc, k % cc)])
}

fn unvec_row_major(v: &CVec, d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| v[i * d + j])
}

/// The unital completely positive map T ↦ σ̌^m(σ^n_T) from B^n to B^m as a
/// d_m² × d_n² matrix acting on row-major vectorizations.
#[derive(Debug, Clone)]
pub struct BerezinChannel {
    pub m: usize,
    pub n: usize,
    pub exact_degree: usize,
    matrix: CMat,
}

impl BerezinChannel {
    pub fn new(m: usize, n: usize, grid: &QuadratureGrid) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(ProxError::InvalidParameter(
                "channel levels must be positive".into(),
            ));
        }
        if grid.exact_degree < m + n {
            return Err(ProxError::UnsupportedDegree {
                requested: m + n,
                supported: grid.exact_degree,
            });
        }
        let (dm, dn) = (m + 1, n + 1);
        let matrix = exec::chunked_sum(
            grid.len(),
            32,
            |range| {
                let mut k = CMat::zeros(dm * dm, dn * dn);
                for i in range {
                    let x = &grid.nodes[i];
                    let vm = coherent_vector(m, x);
                    let vn = coherent_vector(n, x);
                    let pm = vec_row_major(&(&vm * vm.adjoint()));
                    let pnt = vec_row_major(&(&vn * vn.adjoint()).transpose());
                    k += &pm * pnt.transpose() * c(grid.weights[i]);
                }
                k
            },
            |a, b| a + b,
        )
        .unwrap_or_else(|| CMat::zeros(dm * dm, dn * dn));
        Ok(Self {
            m,
            n,
            exact_degree: grid.exact_degree,
            matrix: matrix * c(dm as f64),
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// σ̌^m(σ^n_T).
    pub fn apply(&self, t: &CMat) -> Result<CMat> {
        check_dim(self.n + 1, t.nrows())?;
        check_dim(self.n + 1, t.ncols())?;
        Ok(unvec_row_major(
            &(&self.matrix * vec_row_major(t)),
            self.m + 1,
        ))
    }

    /// Density of the state T ↦ μ(σ̌^m(σ^n_T)) for μ with density `rho`.
    pub fn apply_dual(&self, rho: &CMat) -> Result<CMat> {
        check_dim(self.m + 1, rho.nrows())?;
        check_dim(self.m + 1, rho.ncols())?;
        let out = self.matrix.transpose() * vec_row_major(&rho.transpose());
        Ok(unvec_row_major(&out, self.n + 1).transpose())
    }
}

/// One total-spin component of the conjugation action on B^n, as an
/// orthonormal basis in the Hermitian coordinates of [`herm_params`].
#[derive(Debug, Clone)]
pub struct IsotypicComponent {
    pub l: usize,
    pub basis: Vec<Vec<f64>>,
}

impl IsotypicComponent {
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        for b in &self.basis {
            let s: f64 = b.iter().zip(z).map(|(a, b)| a * b).sum();
            out.iter_mut().zip(b).for_each(|(o, bi)| *o += s * bi);
        }
        out
    }
}

/// Orthonormal Hermitian bases of the spin-l components of B^n, built from
/// the tensor operators J_+^l by repeated commutation with J_-.
pub fn isotypic_components(rep: &Irrep) -> Vec<IsotypicComponent> {
    let d = rep.dim;
    let [jx, jy, _] = rep.generators();
    let raise = jx + jy * I;
    let lower = jx - jy * I;
    let mut top = identity(d);
    (0..d)
        .map(|l| {
            if l > 0 {
                top = &top * &raise;
            }
            let mut basis = Vec::with_capacity(2 * l + 1);
            let mut t = top.clone();
            for m in (0..=l).rev() {
                if m == 0 {
                    basis.push(unit_params(&((&t + t.adjoint()) * c(0.5))));
                } else {
                    basis.push(unit_params(&(&t + t.adjoint())));
                    basis.push(unit_params(&((&t - t.adjoint()) * I)));
                    t = commutator(&lower, &t);
                }
            }
            IsotypicComponent { l, basis }
        })
        .collect()
}

fn unit_params(h: &CMat) -> Vec<f64> {
    let z = herm_params(h);
    let r = crate::linalg::norm2(&z);
    z.into_iter().map(|v| v / r).collect()
}

fn project_out_identity(z: &mut [f64], iota: &[f64]) {
    let ii: f64 = iota.iter().map(|v| v * v).sum();
    let s: f64 = z.iter().zip(iota).map(|(a, b)| a * b).sum::<f64>() / ii;
    z.iter_mut().zip(iota).for_each(|(a, b)| *a -= s * b);
}

/// Ratio ‖T − σ̌^n(σ^n_T)‖ / L^B_n(T) on Hermitian coordinates.
struct DefectRatio<'a> {
    rep: &'a Irrep,
    channel: &'a BerezinChannel,
    iota: Vec<f64>,
    component: Option<&'a IsotypicComponent>,
    smooth: Option<(&'a SmoothMatrixLipschitz, f64)>,
}

impl RatioObjective for DefectRatio<'_> {
    fn dim(&self) -> usize {
        self.iota.len()
    }

    fn evaluate(&self, z: &[f64]) -> RatioEval {
        let d = self.rep.dim;
        let t = herm_from_params(z, d);
        let bt = self.channel.apply(&t).expect("channel dimensions");
        let diff = &t - &bt;
        let eig = ((&diff + diff.adjoint()) * c(0.5)).symmetric_eigen();
        let (num, weights, den, den_kernel) = match self.smooth {
            Some((model, p)) => {
                let top = eig.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
                let num = if top > 0.0 {
                    top * eig
                        .eigenvalues
                        .iter()
                        .map(|l| (l.abs() / top).powf(p))
                        .sum::<f64>()
                        .powf(1.0 / p)
                } else {
                    0.0
                };
                let weights: Vec<f64> = eig
                    .eigenvalues
                    .iter()
                    .map(|l| {
                        if num > 0.0 {
                            (l.abs() / num).powf(p - 1.0) * l.signum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let (den, k) = model.value_kernel(&t, p);
                (num, weights, den, k)
            }
            None => {
                let (k, lam) =
                    eig.eigenvalues
                        .iter()
                        .enumerate()
                        .fold((0, 0.0_f64), |(bk, bl), (k, l)| {
                            if l.abs() > bl.abs() {
                                (k, *l)
                            } else {
                                (bk, bl)
                            }
                        });
                let mut weights = vec![0.0; d];
                weights[k] = lam.signum();
                let w = matrix_lipschitz_witness(self.rep, &t, None).expect("dimensions");
                (lam.abs(), weights, w.value, w.gradient_kernel(self.rep))
            }
        };
        let mut uu = CMat::zeros(d, d);
        for (k, w) in weights.iter().enumerate() {
            if *w != 0.0 {
                let u = eig.eigenvectors.column(k);
                uu += u * u.adjoint() * c(*w);
            }
        }
        let kern = &uu - self.channel.apply(&uu).expect("channel dimensions");
        RatioEval {
            num,
            den,
            grad_num: herm_grad(&kern),
            grad_den: herm_grad(&den_kernel),
        }
    }

    fn project(&self, z: &mut [f64]) {
        match self.component {
            Some(comp) => {
                let p = comp.project(z);
                z.copy_from_slice(&p);
            }
            None => project_out_identity(z, &self.iota),
        }
    }
}

/// Which search produced the reported δ̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaSource {
    /// Ascent started inside the spin-l component.
    Isotypic { l: usize },
    /// Ascent from the given seeded random start.
    Random { trial: usize },
}

#[derive(Debug, Clone)]
pub struct DeltaEstimate {
    pub n: usize,
    pub value: f64,
    pub source: DeltaSource,
    /// Best ratio restricted to each component l = 1..n (index l − 1).
    pub per_component: Vec<f64>,
    /// Maximizer, normalized to L^B_n = 1.
    pub witness: CMat,
}

#[derive(Debug, Clone, Copy)]
pub struct DeltaOptions {
    pub trials: usize,
    pub seed: u64,
    /// Extra exactness of the quadrature beyond the required 2n.
    pub quadrature_margin: usize,
    /// Ascent settings of the smoothed stages.
    pub ascent: AscentOptions,
    /// Iteration cap of the final stage on the exact seminorm.
    pub exact_iter: usize,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        Self {
            trials: 4,
            seed: 0,
            quadrature_margin: 2,
            ascent: AscentOptions::default(),
            exact_iter: 30,
        }
    }
}

/// δ̂^B_n: a lower estimate of sup ‖T − σ̌^n(σ^n_T)‖ / L^B_n(T).
pub fn delta_estimate(n: usize, trials: usize, seed: u64) -> Result<f64> {
    Ok(delta_estimate_detailed(
        n,
        DeltaOptions {
            trials,
            seed,
            ..Default::default()
        },
    )?
    .value)
}

pub fn delta_estimate_detailed(n: usize, opts: DeltaOptions) -> Result<DeltaEstimate> {
    if opts.trials == 0 {
        return Err(ProxError::InvalidParameter(
            "delta_estimate needs at least one trial".into(),
        ));
    }
    let rep = make_irrep(n)?;
    let grid = sphere_grid(2 * n + opts.quadrature_margin)?;
    let channel = BerezinChannel::new(n, n, &grid)?;
    delta_with_channel(&rep, &channel, opts)
}

/// As [`delta_estimate_detailed`] with a prebuilt n → n channel.
pub fn delta_with_channel(
    rep: &Irrep,
    channel: &BerezinChannel,
    opts: DeltaOptions,
) -> Result<DeltaEstimate> {
    let n = rep.n;
    if channel.m != n || channel.n != n {
        return Err(ProxError::InvalidParameter(
            "delta needs the n → n Berezin channel".into(),
        ));
    }
    let d = rep.dim;
    let iota = identity_params(d);
    let components = isotypic_components(rep);
    let mut best: Option<(f64, Vec<f64>, DeltaSource)> = None;
    let mut per_component = Vec::with_capacity(n);
    let consider =
        |best: &mut Option<(f64, Vec<f64>, DeltaSource)>, r: f64, z: Vec<f64>, s: DeltaSource| {
            if best.as_ref().is_none_or(|b| r > b.0) {
                *best = Some((r, z, s));
            }
        };

    let model = SmoothMatrixLipschitz::new(rep, SMOOTH_DIRECTIONS);
    let staged = |component: Option<&IsotypicComponent>, z0: &[f64], seed: u64| {
        let mut z = z0.to_vec();
        let stages = SMOOTHING.iter().map(|p| Some((&model, *p))).chain([None]);
        let mut ratio = 0.0;
        for (stage, smooth) in stages.enumerate() {
            let obj = DefectRatio {
                rep,
                channel,
                iota: iota.clone(),
                component,
                smooth,
            };
            let max_iter = if smooth.is_some() {
                opts.ascent.max_iter
            } else {
                opts.exact_iter
            };
            let res = ratio_ascent(
                &obj,
                &z,
                AscentOptions {
                    seed: seed.wrapping_add(stage as u64),
                    max_iter,
                    ..opts.ascent
                },
            );
            z = res.z;
            ratio = res.ratio;
        }
        (ratio, z)
    };

    let jz = rep.j_z.map(c);
    let mut starts = Vec::with_capacity(n);
    let mut power = CMat::identity(d, d);
    for comp in components.iter().skip(1) {
        power = &power * &jz;
        let mut start = comp.project(&herm_params(&power));
        if start.iter().all(|v| v.abs() < 1e-12) {
            start = comp.basis[0].clone();
        }
        starts.push(start);
    }
    let iso = exec::map_indices(n, |i| {
        let comp = &components[i + 1];
        staged(Some(comp), &starts[i], opts.seed ^ ((comp.l as u64) << 8))
    });
    let mut iso_best: Option<(f64, Vec<f64>, usize)> = None;
    for (i, (r, z)) in iso.into_iter().enumerate() {
        let l = components[i + 1].l;
        per_component.push(r);
        if iso_best.as_ref().is_none_or(|b| r > b.0) {
            iso_best = Some((r, z.clone(), l));
        }
        consider(&mut best, r, z, DeltaSource::Isotypic { l });
    }
    if let Some((_, z, l)) = iso_best {
        let (r, z) = staged(None, &z, opts.seed ^ 0xff);
        consider(&mut best, r, z, DeltaSource::Isotypic { l });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_starts: Vec<Vec<f64>> = (0..opts.trials)
        .map(|_| herm_params(&random_hermitian(d, &mut rng)))
        .collect();
    let random = exec::map_indices(opts.trials, |trial| {
        staged(
            None,
            &random_starts[trial],
            opts.seed.wrapping_add(1 + trial as u64) << 4,
        )
    });
    for (trial, (r, z)) in random.into_iter().enumerate() {
        consider(&mut best, r, z, DeltaSource::Random { trial });
    }

    let (_, z, source) = best.expect("n ≥ 1 gives at least one component");
    let t = herm_from_params(&z, d);
    let lip = matrix_lipschitz(rep, &t)?;
    let witness = if lip > 0.0 { t / c(lip) } else { t };
    let value = {
        let diff = &witness - channel.apply(&witness)?;
        crate::linalg::herm_op_norm(&((&diff + diff.adjoint()) * c(0.5)))
    };
    Ok(DeltaEstimate {
        n,
        value,
        source,
        per_component,
        witness,
    })
}
