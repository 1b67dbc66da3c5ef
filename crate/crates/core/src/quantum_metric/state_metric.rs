//! Lower estimates of ρ_L(μ, ν) = sup{|μ(a) − ν(b)| : L(a, b) ≤ 1} by a
//! cutting-plane ascent.
//!
//! Since L is a seminorm, the sup equals the maximum of the ratio
//! `(μ(a) − ν(b)) / L(a, b)`. The bridge term is enforced only on an active set
//! of nodes; after each ascent the most violated node is added. The outer max
//! is smoothed by a p-norm during the ascent and evaluated exactly at the end,
//! so the returned value is always the exact ratio at the certificate.

use super::lipschitz::SmoothMatrixLipschitz;
use super::seminorm::{DirectSumSeminorm, Element, Summand};
use super::State;
use crate::error::{check_dim, ProxError, Result};
use crate::harmonics::real_basis_at;
use crate::linalg::{dot, herm_from_params, herm_grad, norm2};
use crate::optimize::{ratio_ascent, soft_max, AscentOptions, RatioEval, RatioObjective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct StateMetricOptions {
    /// Operator-norm cap on iterates (as an extra seminorm term ‖·‖/radius).
    pub radius: f64,
    pub max_rounds: usize,
    pub tol: f64,
    /// Exponents of the smoothed maximum, used in sequence.
    pub smoothing: Vec<f64>,
    pub ascent: AscentOptions,
    /// Additional starting pairs tried besides the objective gradient.
    pub starts: Vec<(Element, Element)>,
}

impl Default for StateMetricOptions {
    fn default() -> Self {
        Self {
            radius: 10.0 * std::f64::consts::PI,
            max_rounds: 6,
            tol: 1e-4,
            smoothing: vec![16.0, 64.0, 256.0],
            ascent: AscentOptions {
                max_iter: 60,
                ..AscentOptions::default()
            },
            starts: Vec::new(),
        }
    }
}

impl StateMetricOptions {
    /// One smoothing stage and short ascents, for bulk sampling.
    pub fn fast() -> Self {
        Self {
            smoothing: vec![32.0],
            ascent: AscentOptions {
                max_iter: 25,
                ..AscentOptions::default()
            },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct StateMetricResult {
    /// |μ(a) − ν(b)| at the certificate, which satisfies L(a, b) ≤ 1 and the
    /// radius cap.
    pub value: f64,
    pub certificate: (Element, Element),
    pub converged: bool,
    /// The radius cap was the binding constraint: the true sup is larger.
    pub unbounded: bool,
    pub rounds: usize,
    pub active_nodes: Vec<usize>,
}

/// ρ_L(μ, ν) with μ a state of the left summand and ν of the right one.
pub fn state_metric(
    l: &DirectSumSeminorm,
    mu: &State,
    nu: &State,
    opts: &StateMetricOptions,
) -> Result<StateMetricResult> {
    state_metric_placed(l, (mu, Side::Left), (nu, Side::Right), opts)
}

fn state_gradient(summand: &Summand, state: &State) -> Result<Vec<f64>> {
    match (summand, state) {
        (Summand::Matrix(rep), State::Density(rho)) => {
            check_dim(rep.dim, rho.nrows())?;
            Ok(herm_grad(rho))
        }
        (Summand::Function { lipschitz, grid }, State::Measure(w)) => {
            check_dim(grid.len(), w.len())?;
            let mut g = vec![0.0; summand.param_dim()];
            for (x, wk) in grid.nodes.iter().zip(w) {
                for (gj, bj) in g.iter_mut().zip(real_basis_at(lipschitz.degree(), x)) {
                    *gj += wk * bj;
                }
            }
            Ok(g)
        }
        _ => Err(ProxError::InvalidState(
            "state does not match its summand".into(),
        )),
    }
}

/// General form: each state sits on the given side.
pub fn state_metric_placed(
    l: &DirectSumSeminorm,
    mu: (&State, Side),
    nu: (&State, Side),
    opts: &StateMetricOptions,
) -> Result<StateMetricResult> {
    // Canonical order makes the result exactly symmetric.
    let (mu, nu) = if mu.1 == Side::Right && nu.1 == Side::Left {
        (nu, mu)
    } else {
        (mu, nu)
    };
    let dl = l.left.param_dim();
    let dr = l.right.param_dim();
    let mut objective = vec![0.0; dl + dr];
    for (state, side, sign) in [(mu.0, mu.1, 1.0), (nu.0, nu.1, -1.0)] {
        let summand = if side == Side::Left {
            &l.left
        } else {
            &l.right
        };
        let g = state_gradient(summand, state)?;
        let off = if side == Side::Left { 0 } else { dl };
        objective[off..off + g.len()]
            .iter_mut()
            .zip(&g)
            .for_each(|(o, v)| *o += sign * v);
    }
    let mut null: Vec<f64> = l
        .left
        .unit_params()
        .into_iter()
        .chain(l.right.unit_params())
        .collect();
    let nn = norm2(&null);
    null.iter_mut().for_each(|v| *v /= nn);

    let smooth = |s: &Summand| match s {
        Summand::Matrix(rep) => Some(SmoothMatrixLipschitz::new(rep, SMOOTH_DIRECTIONS)),
        Summand::Function { .. } => None,
    };
    let mut problem = Problem {
        l,
        objective,
        null,
        active: Vec::new(),
        p: 16.0,
        radius: opts.radius,
        dl,
        smooth: [smooth(&l.left), smooth(&l.right)],
    };
    let mut c0 = problem.objective.clone();
    problem.project(&mut c0);
    let zero_pair = || {
        (
            l.left.from_params(&vec![0.0; dl]),
            l.right.from_params(&vec![0.0; dr]),
        )
    };
    if norm2(&c0) <= 1e-14 * (1.0 + norm2(&problem.objective)) {
        return Ok(StateMetricResult {
            value: 0.0,
            certificate: zero_pair(),
            converged: true,
            unbounded: false,
            rounds: 0,
            active_nodes: Vec::new(),
        });
    }

    // (1, 0) reaches γ / N(1, 0) for every pair of states on different sides.
    let mut scalar: Vec<f64> = l
        .left
        .unit_params()
        .into_iter()
        .chain(vec![0.0; dr])
        .collect();
    problem.project(&mut scalar);
    if dot(&scalar, &problem.objective) < 0.0 {
        scalar.iter_mut().for_each(|v| *v = -*v);
    }
    let mut starts = vec![c0];
    if norm2(&scalar) > 1e-12 && mu.1 != nu.1 {
        starts.push(scalar);
    }
    for (a, b) in &opts.starts {
        let mut z = l.left.to_params(a)?;
        z.extend(l.right.to_params(b)?);
        problem.project(&mut z);
        if dot(&z, &problem.objective) < 0.0 {
            z.iter_mut().for_each(|v| *v = -*v);
        }
        if norm2(&z) > 0.0 {
            starts.push(z);
        }
    }

    // First round from every start, keep the best.
    let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
    for z0 in &starts {
        problem.active = vec![problem.worst_node(z0).0];
        let z = problem.smoothed_ascent(z0, &opts.smoothing, opts.ascent);
        let exact = problem.exact(&z);
        if best.as_ref().is_none_or(|b| exact.value > b.0) {
            best = Some((exact.value, z, problem.active.clone()));
        }
    }
    let (_, mut z, active) = best.expect("at least one start");
    problem.active = active;
    let mut rounds = 1;
    let mut converged = false;
    loop {
        let exact = problem.exact(&z);
        let (node, n_val) = problem.worst_node(&z);
        let others = exact.den_without_bridge.max(problem.active_bridge(&z));
        let violated = !problem.active.contains(&node) && n_val / l.gamma > others * (1.0 + 1e-9);
        if !violated {
            converged = true;
            break;
        }
        if rounds >= opts.max_rounds {
            break;
        }
        problem.active.push(node);
        let next = problem.smoothed_ascent(&z, &opts.smoothing, opts.ascent);
        let next_exact = problem.exact(&next);
        rounds += 1;
        let change = (next_exact.value - exact.value).abs();
        // The exact value uses every node, so either point is a valid certificate.
        if next_exact.value >= exact.value {
            z = next;
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let exact = problem.exact(&z);
    let value = exact.value;
    let scale = if exact.den > 0.0 {
        1.0 / exact.den
    } else {
        0.0
    };
    let a = l
        .left
        .from_params(&z[..dl].iter().map(|v| v * scale).collect::<Vec<_>>());
    let b = l
        .right
        .from_params(&z[dl..].iter().map(|v| v * scale).collect::<Vec<_>>());
    Ok(StateMetricResult {
        value,
        certificate: (a, b),
        converged,
        unbounded: exact.radius_binding,
        rounds,
        active_nodes: problem.active.clone(),
    })
}

const SMOOTH_DIRECTIONS: usize = 128;
/// Nodes within this fraction of the worst defect join the smoothed maximum.
const NEAR_FRACTION: f64 = 0.5;
/// Larger near sets are thinned evenly; the cutting rounds restore exactness.
const NEAR_CAP: usize = 192;

struct Problem<'a> {
    l: &'a DirectSumSeminorm,
    objective: Vec<f64>,
    null: Vec<f64>,
    active: Vec<usize>,
    p: f64,
    radius: f64,
    dl: usize,
    /// Smooth L models for matrix summands, left then right.
    smooth: [Option<SmoothMatrixLipschitz>; 2],
}

struct Exact {
    value: f64,
    den: f64,
    den_without_bridge: f64,
    radius_binding: bool,
}

impl Problem<'_> {
    fn split<'z>(&self, z: &'z [f64]) -> (&'z [f64], &'z [f64]) {
        z.split_at(self.dl)
    }

    fn node_value(&self, k: usize, z: &[f64]) -> f64 {
        let (zl, zr) = self.split(z);
        self.l.bridge_node_value(k, zl, zr)
    }

    /// Node with the largest bridge defect over all nodes.
    fn worst_node(&self, z: &[f64]) -> (usize, f64) {
        let (zl, zr) = self.split(z);
        crate::exec::argmax(&self.l.bridge_values(zl, zr)).unwrap_or((0, 0.0))
    }

    fn active_bridge(&self, z: &[f64]) -> f64 {
        self.active
            .iter()
            .map(|k| self.node_value(*k, z))
            .fold(0.0, f64::max)
            / self.l.gamma
    }

    fn node_term(&self, k: usize, z: &[f64]) -> (f64, Vec<f64>) {
        let (zl, zr) = self.split(z);
        let g = self.l.gamma;
        let (value, gl, gr) = self.l.bridge_node_grad(k, zl, zr);
        let grad = gl.into_iter().chain(gr).map(|v| v / g).collect();
        (value / g, grad)
    }

    fn padded(&self, left: bool, g: Vec<f64>, total: usize) -> Vec<f64> {
        let mut out = vec![0.0; total];
        let off = if left { 0 } else { self.dl };
        out[off..off + g.len()].copy_from_slice(&g);
        out
    }

    fn smooth_lipschitz(&self, side: usize, z: &[f64]) -> (f64, Vec<f64>) {
        let summand = if side == 0 {
            &self.l.left
        } else {
            &self.l.right
        };
        match (summand, &self.smooth[side]) {
            (Summand::Matrix(rep), Some(model)) => {
                let (v, k) = model.value_kernel(&herm_from_params(z, rep.dim), self.p);
                (v, herm_grad(&k))
            }
            (Summand::Function { lipschitz, .. }, _) => lipschitz.smooth_value_grad(z, self.p),
            (Summand::Matrix(_), None) => summand.lipschitz_grad(z),
        }
    }

    fn terms(&self, z: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let (zl, zr) = self.split(z);
        let n = z.len();
        let (ll, gl) = self.smooth_lipschitz(0, zl);
        let (lr, gr) = self.smooth_lipschitz(1, zr);
        let (nl, gnl) = self.l.left.norm_grad(zl);
        let (nr, gnr) = self.l.right.norm_grad(zr);
        let mut values = vec![ll, lr, nl / self.radius, nr / self.radius];
        let mut grads = vec![
            self.padded(true, gl, n),
            self.padded(false, gr, n),
            self.padded(true, gnl.into_iter().map(|v| v / self.radius).collect(), n),
            self.padded(false, gnr.into_iter().map(|v| v / self.radius).collect(), n),
        ];
        let all = self.l.bridge_values(zl, zr);
        let top = all.iter().cloned().fold(0.0, f64::max);
        let mut near: Vec<usize> = (0..all.len())
            .filter(|k| all[*k] >= NEAR_FRACTION * top)
            .collect();
        if near.len() > NEAR_CAP {
            let stride = near.len().div_ceil(NEAR_CAP);
            near = near.into_iter().step_by(stride).collect();
        }
        for k in self
            .active
            .iter()
            .chain(crate::exec::argmax(&all).map(|(k, _)| k).iter())
        {
            if !near.contains(k) {
                near.push(*k);
            }
        }
        for (v, g) in crate::exec::map_slice(&near, |k| self.node_term(*k, z)) {
            values.push(v);
            grads.push(g);
        }
        (values, grads)
    }

    fn exact(&self, z: &[f64]) -> Exact {
        let (zl, zr) = self.split(z);
        let num = dot(&self.objective, z).abs();
        let ll = self.l.left.lipschitz_grad(zl).0;
        let lr = self.l.right.lipschitz_grad(zr).0;
        let rad = self
            .l
            .left
            .norm_grad(zl)
            .0
            .max(self.l.right.norm_grad(zr).0)
            / self.radius;
        let bridge = self.worst_node(z).1 / self.l.gamma;
        let core = ll.max(lr).max(bridge);
        let den = core.max(rad);
        let value = if den > 0.0 { num / den } else { 0.0 };
        Exact {
            value,
            den,
            den_without_bridge: ll.max(lr).max(rad),
            radius_binding: rad > 0.0 && rad >= core,
        }
    }

    /// Runs the stages in turn and returns the iterate with the best exact
    /// value, the start included.
    fn smoothed_ascent(&mut self, z0: &[f64], smoothing: &[f64], opts: AscentOptions) -> Vec<f64> {
        let mut best = (self.exact(z0).value, z0.to_vec());
        let mut z = z0.to_vec();
        for &p in smoothing {
            self.p = p;
            z = ratio_ascent(&*self, &z, opts).z;
            let v = self.exact(&z).value;
            if v > best.0 {
                best = (v, z.clone());
            }
        }
        best.1
    }
}

impl RatioObjective for Problem<'_> {
    fn dim(&self) -> usize {
        self.objective.len()
    }

    fn evaluate(&self, z: &[f64]) -> RatioEval {
        let (values, grads) = self.terms(z);
        let (den, grad_den) = soft_max(&values, &grads, self.p);
        RatioEval {
            num: dot(&self.objective, z),
            den,
            grad_num: self.objective.clone(),
            grad_den,
        }
    }

    fn project(&self, z: &mut [f64]) {
        let s = dot(z, &self.null);
        z.iter_mut().zip(&self.null).for_each(|(a, b)| *a -= s * b);
    }
}
