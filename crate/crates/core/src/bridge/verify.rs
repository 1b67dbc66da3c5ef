//! Checks that `γ⁻¹N` is a bridge for a pair of Lipschitz seminorms on a test
//! family: every self-adjoint a with L_left(a) = 1 needs a partner b with
//! `L_right(b) ∨ γ⁻¹N(a, b) ∨ γ⁻¹N(a*, b*) ≤ 1 + ε`, and symmetrically.

use serde::{Deserialize, Serialize};

use std::sync::Arc;

use super::{
    function_family, gamma_with_context, operator_family, AbBridge, GammaContext, GammaEstimates,
    GammaOptions,
};
use crate::berezin::{lower_operator, upper_symbol};
use crate::error::{ProxError, Result};
use crate::exec;
use crate::group_rep::sphere_grid;
use crate::harmonics::HarmonicExpansion;
use crate::optimize::soft_max;
use crate::quantum_metric::{
    BridgeTerm, DirectSumSeminorm, Element, FunctionSamples, Side, Summand,
};

/// Result of one partner search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartnerGap {
    /// Summand the tested element belongs to.
    pub side: Side,
    /// Position in that side's family.
    pub index: usize,
    pub lipschitz: f64,
    /// max(L(b), γ⁻¹N) at the partner, for the element scaled to L = 1.
    pub partner_value: f64,
    /// partner_value − 1 (for scalars, partner_value itself).
    pub gap: f64,
    /// Whether the Berezin partner had to be improved by descent.
    pub descended: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BridgeReport {
    pub gamma: f64,
    pub epsilon: f64,
    pub family_size: usize,
    pub worst_gap: f64,
    pub passed: bool,
    /// γ⁻¹N(1, 0) > 0.
    pub nondegenerate: bool,
    pub gaps: Vec<PartnerGap>,
    /// (element, partner) pairs in family order, left side first.
    #[serde(skip)]
    pub witnesses: Vec<(Element, Element)>,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub epsilon: f64,
    /// Gradient steps per smoothing stage of the partner descent.
    pub descent_steps: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            descent_steps: 60,
        }
    }
}

const SCALAR_TOL: f64 = 1e-10;
const DESCENT_SMOOTHING: [f64; 3] = [16.0, 64.0, 256.0];

/// Runs the check in both directions. `to_right` and `to_left` give the
/// initial partners.
pub fn verify_bridge<FR, FL>(
    l: &DirectSumSeminorm,
    left_family: &[Element],
    right_family: &[Element],
    to_right: FR,
    to_left: FL,
    opts: VerifyOptions,
) -> Result<BridgeReport>
where
    FR: Fn(&Element) -> Result<Element> + Sync,
    FL: Fn(&Element) -> Result<Element> + Sync,
{
    if !(l.gamma > 0.0) || !(opts.epsilon > 0.0) {
        return Err(ProxError::InvalidParameter(
            "verification needs γ > 0 and ε > 0".into(),
        ));
    }
    let left = exec::map_indices(left_family.len(), |i| {
        check_one(l, Side::Left, i, &left_family[i], &to_right, opts)
    });
    let right = exec::map_indices(right_family.len(), |i| {
        check_one(l, Side::Right, i, &right_family[i], &to_left, opts)
    });
    let mut gaps = Vec::new();
    let mut witnesses = Vec::new();
    for r in left.into_iter().chain(right) {
        let (g, pair) = r?;
        gaps.push(g);
        witnesses.push(pair);
    }
    let worst_gap = gaps.iter().map(|g| g.gap).fold(f64::NEG_INFINITY, f64::max);
    let zero = l.right.from_params(&vec![0.0; l.right.param_dim()]);
    let nondegenerate = l.bridge.eval(&l.left.unit(), &zero)? / l.gamma > 0.0;
    Ok(BridgeReport {
        gamma: l.gamma,
        epsilon: opts.epsilon,
        family_size: left_family.len() + right_family.len(),
        worst_gap,
        passed: worst_gap <= opts.epsilon,
        nondegenerate,
        gaps,
        witnesses,
    })
}

fn check_one<F>(
    l: &DirectSumSeminorm,
    side: Side,
    index: usize,
    element: &Element,
    partner_of: &F,
    opts: VerifyOptions,
) -> Result<(PartnerGap, (Element, Element))>
where
    F: Fn(&Element) -> Result<Element>,
{
    let (own, other) = match side {
        Side::Left => (&l.left, &l.right),
        Side::Right => (&l.right, &l.left),
    };
    let lip = own.lipschitz(element)?;
    let scalar = lip <= SCALAR_TOL;
    let a = if scalar {
        element.clone()
    } else {
        element.scale(1.0 / lip)
    };
    let za = own.to_params(&a)?;
    let b0 = partner_of(&a)?;
    let zb0 = other.to_params(&b0)?;
    let value = |zb: &[f64]| partner_value(l, side, &za, zb);
    let start = value(&zb0);
    let target = if scalar { 0.0 } else { 1.0 };
    let (zb, best, descended) = if start - target > opts.epsilon {
        let (z, v) = descend(l, side, &za, &zb0, start, opts.descent_steps);
        (z, v, true)
    } else {
        (zb0, start, false)
    };
    let gap = best - target;
    let b = other.from_params(&zb);
    Ok((
        PartnerGap {
            side,
            index,
            lipschitz: lip,
            partner_value: best,
            gap,
            descended,
        },
        (a, b),
    ))
}

fn split<'a>(side: Side, za: &'a [f64], zb: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    match side {
        Side::Left => (za, zb),
        Side::Right => (zb, za),
    }
}

/// L of the partner ∨ γ⁻¹ sup N. Self-adjoint pairs make N(a*, b*) = N(a, b).
fn partner_value(l: &DirectSumSeminorm, side: Side, za: &[f64], zb: &[f64]) -> f64 {
    let other = match side {
        Side::Left => &l.right,
        Side::Right => &l.left,
    };
    let (zl, zr) = split(side, za, zb);
    let n = l.bridge_values(zl, zr).into_iter().fold(0.0, f64::max);
    other.lipschitz_grad(zb).0.max(n / l.gamma)
}

/// Smoothed max-of-terms descent on the partner coordinates; keeps the best
/// exact value seen.
fn descend(
    l: &DirectSumSeminorm,
    side: Side,
    za: &[f64],
    zb0: &[f64],
    v0: f64,
    steps: usize,
) -> (Vec<f64>, f64) {
    let other = match side {
        Side::Left => &l.right,
        Side::Right => &l.left,
    };
    let terms = |zb: &[f64]| {
        let (zl, zr) = split(side, za, zb);
        let nodes = l.bridge_values(zl, zr);
        let top = nodes.iter().cloned().fold(0.0, f64::max);
        let (lv, lg) = other.lipschitz_grad(zb);
        let mut values = vec![lv];
        let mut grads = vec![lg];
        for (k, v) in nodes.iter().enumerate() {
            if *v >= 0.5 * top && top > 0.0 {
                let (nv, gl, gr) = l.bridge_node_grad(k, zl, zr);
                let g = match side {
                    Side::Left => gr,
                    Side::Right => gl,
                };
                values.push(nv / l.gamma);
                grads.push(g.into_iter().map(|x| x / l.gamma).collect());
            }
        }
        (values, grads)
    };
    let mut best = (zb0.to_vec(), v0);
    let mut z = zb0.to_vec();
    for p in DESCENT_SMOOTHING {
        let eval = |z: &[f64]| {
            let (v, g) = terms(z);
            soft_max(&v, &g, p)
        };
        let (mut f, mut g) = eval(&z);
        let mut t = 0.1 * best.1.max(1e-3);
        for _ in 0..steps {
            let gn = crate::linalg::norm2(&g);
            if gn == 0.0 {
                break;
            }
            let mut accepted = false;
            while t > 1e-12 {
                let cand: Vec<f64> = z.iter().zip(&g).map(|(a, d)| a - t * d / gn).collect();
                let (fc, gc) = eval(&cand);
                if fc < f {
                    (z, f, g) = (cand, fc, gc);
                    t *= 2.0;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
            let exact = partner_value(l, side, za, &z);
            if exact < best.1 {
                best = (z.clone(), exact);
            }
        }
    }
    best
}

/// Verification of the C(S²)–B^n bridge on the standard families with
/// γ = γ̂^A_n + γ̂^B_n.
#[derive(Debug, Clone)]
pub struct StandardVerification {
    pub gamma: GammaEstimates,
    pub report: BridgeReport,
}

pub fn verify_standard(
    n: usize,
    quadrature_margin: usize,
    gamma_opts: &GammaOptions,
    opts: VerifyOptions,
) -> Result<StandardVerification> {
    let grid = Arc::new(sphere_grid(2 * n + quadrature_margin)?);
    let ctx = GammaContext::new(n, &grid)?;
    let gamma = gamma_with_context(&ctx, gamma_opts)?;
    let rep = Arc::new(ctx.irrep().clone());
    let l = DirectSumSeminorm::new(
        gamma.gamma_a + gamma.gamma_b,
        Summand::function(n, grid.clone()),
        Summand::Matrix(rep.clone()),
        BridgeTerm::Ab(Arc::new(AbBridge::for_grid(n, n, &grid))),
    )?;
    let left: Vec<Element> = function_family(n, gamma_opts.family_size, gamma_opts.seed)
        .iter()
        .map(|z| Element::Function(HarmonicExpansion::from_real_params(n, z)))
        .collect();
    let right: Vec<Element> = operator_family(&ctx, gamma_opts.family_size, gamma_opts.seed)
        .into_iter()
        .map(Element::Matrix)
        .collect();
    let down = |e: &Element| {
        let s = FunctionSamples::from_expansion(grid.clone(), e.as_function()?);
        Ok(Element::Matrix(lower_operator(&rep, &s)?))
    };
    let up = |e: &Element| {
        let s = upper_symbol(&rep, e.as_matrix()?, &grid)?;
        Ok(Element::Function(s.expansion()?))
    };
    let report = verify_bridge(&l, &left, &right, down, up, opts)?;
    Ok(StandardVerification { gamma, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_rep::QuadratureGrid;

    fn setup(n: usize, gamma: f64) -> (DirectSumSeminorm, Arc<QuadratureGrid>) {
        let grid = Arc::new(sphere_grid(2 * n + 2).unwrap());
        let rep = Arc::new(crate::group_rep::make_irrep(n).unwrap());
        let l = DirectSumSeminorm::new(
            gamma,
            Summand::function(n, grid.clone()),
            Summand::Matrix(rep),
            BridgeTerm::Ab(Arc::new(AbBridge::for_grid(n, n, &grid))),
        )
        .unwrap();
        (l, grid)
    }

    fn partners(
        n: usize,
        grid: &Arc<QuadratureGrid>,
    ) -> (
        impl Fn(&Element) -> Result<Element> + Sync + '_,
        impl Fn(&Element) -> Result<Element> + Sync + '_,
    ) {
        let rep = crate::group_rep::make_irrep(n).unwrap();
        let rep2 = rep.clone();
        let down = move |e: &Element| {
            let f = e.as_function()?.clone();
            let s = FunctionSamples::from_fn(grid.clone(), Some(n), |x| f.eval(x));
            Ok(Element::Matrix(lower_operator(&rep, &s)?))
        };
        let up = move |e: &Element| {
            let s = upper_symbol(&rep2, e.as_matrix()?, grid)?;
            Ok(Element::Function(HarmonicExpansion::project(
                grid,
                s.values(),
                n,
            )))
        };
        (down, up)
    }

    fn families(n: usize, grid: &QuadratureGrid, size: usize) -> (Vec<Element>, Vec<Element>) {
        let ctx = GammaContext::new(n, grid).unwrap();
        let left = function_family(n, size, 0)
            .iter()
            .map(|z| Element::Function(HarmonicExpansion::from_real_params(n, z)))
            .collect();
        let right = operator_family(&ctx, size, 0)
            .into_iter()
            .map(Element::Matrix)
            .collect();
        (left, right)
    }

    #[test]
    fn passes_with_the_summed_constant() {
        let gopts = GammaOptions {
            family_size: 16,
            ..Default::default()
        };
        let v = verify_standard(2, 2, &gopts, VerifyOptions::default()).unwrap();
        let report = v.report;
        assert!(report.passed, "worst gap {}", report.worst_gap);
        assert!(report.nondegenerate);
        assert!((report.gamma - v.gamma.gamma_a - v.gamma.gamma_b).abs() < 1e-15);
        assert_eq!(report.gaps.len(), 32);
        assert_eq!(report.witnesses.len(), 32);
    }

    #[test]
    fn tiny_constant_fails() {
        let n = 1;
        let (l, grid) = setup(n, 1e-4);
        let (left, right) = families(n, &grid, 4);
        let (down, up) = partners(n, &grid);
        let opts = VerifyOptions {
            descent_steps: 10,
            ..Default::default()
        };
        let report = verify_bridge(&l, &left, &right, down, up, opts).unwrap();
        assert!(!report.passed);
        assert!(report.worst_gap > 0.05);
    }

    #[test]
    fn scalars_pass_for_any_constant() {
        let n = 2;
        for gamma in [1e-6, 1.0, 1e6] {
            let (l, grid) = setup(n, gamma);
            let mut z = vec![0.0; 9];
            z[0] = 2.5;
            let left = vec![Element::Function(HarmonicExpansion::from_real_params(
                n, &z,
            ))];
            let right = vec![Element::Matrix(
                crate::linalg::CMat::identity(3, 3) * crate::linalg::c(-1.5),
            )];
            let (down, up) = partners(n, &grid);
            let report =
                verify_bridge(&l, &left, &right, down, up, VerifyOptions::default()).unwrap();
            assert!(report.passed, "γ={gamma}: {}", report.worst_gap);
            assert!(
                report.worst_gap.abs() < 1e-6,
                "γ={gamma}: {}",
                report.worst_gap
            );
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let (l, grid) = setup(1, 1.0);
        let (down, up) = partners(1, &grid);
        let opts = VerifyOptions {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(verify_bridge(&l, &[], &[], down, up, opts).is_err());
    }
}
