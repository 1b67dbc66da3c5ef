//! Seminorms on direct sums `L(a, b) = L_left(a) ∨ L_right(b) ∨ γ⁻¹(N(a, b) ∨ N(a*, b*))`.

use std::sync::Arc;

use num_complex::Complex64;

use super::lipschitz::{matrix_lipschitz, matrix_lipschitz_witness, FunctionLipschitz};
use crate::bridge::{AbBridge, BbBridge};
use crate::error::{check_dim, ProxError, Result};
use crate::exec;
use crate::group_rep::{Irrep, QuadratureGrid};
use crate::harmonics::{coeff_count, expansion_lipschitz, real_basis_at, HarmonicExpansion};
use crate::linalg::{
    herm_dim, herm_from_params, herm_grad, herm_op_norm, herm_params, identity_params,
    is_hermitian, op_norm, CMat,
};
use crate::sphere_opt::Polish;

/// An element of one summand.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Matrix(CMat),
    Function(HarmonicExpansion),
}

impl Element {
    pub fn adjoint(&self) -> Element {
        match self {
            Element::Matrix(m) => Element::Matrix(m.adjoint()),
            Element::Function(f) => Element::Function(f.conj()),
        }
    }

    pub fn as_matrix(&self) -> Result<&CMat> {
        match self {
            Element::Matrix(m) => Ok(m),
            Element::Function(_) => Err(ProxError::InvalidParameter(
                "expected a matrix element".into(),
            )),
        }
    }

    pub fn as_function(&self) -> Result<&HarmonicExpansion> {
        match self {
            Element::Function(f) => Ok(f),
            Element::Matrix(_) => Err(ProxError::InvalidParameter(
                "expected a function element".into(),
            )),
        }
    }

    pub fn scale(&self, s: f64) -> Element {
        match self {
            Element::Matrix(m) => Element::Matrix(m * Complex64::new(s, 0.0)),
            Element::Function(f) => Element::Function(HarmonicExpansion {
                degree: f.degree,
                coeffs: f.coeffs.iter().map(|c| c * s).collect(),
            }),
        }
    }
}

/// One summand of the direct sum with its Lipschitz seminorm.
#[derive(Debug, Clone)]
pub enum Summand {
    /// B^n with L^B_n.
    Matrix(Arc<Irrep>),
    /// Real band-limited functions with L_A; states are weights on `grid`.
    Function {
        lipschitz: Arc<FunctionLipschitz>,
        grid: Arc<QuadratureGrid>,
    },
}

impl Summand {
    pub fn function(degree: usize, grid: Arc<QuadratureGrid>) -> Self {
        Summand::Function {
            lipschitz: Arc::new(FunctionLipschitz::new(degree)),
            grid,
        }
    }

    /// Real dimension of the coordinates used by the ascents.
    pub fn param_dim(&self) -> usize {
        match self {
            Summand::Matrix(rep) => herm_dim(rep.dim),
            Summand::Function { lipschitz, .. } => coeff_count(lipschitz.degree()),
        }
    }

    pub fn unit(&self) -> Element {
        match self {
            Summand::Matrix(rep) => Element::Matrix(CMat::identity(rep.dim, rep.dim)),
            Summand::Function { lipschitz, .. } => {
                let mut z = vec![0.0; coeff_count(lipschitz.degree())];
                z[0] = 1.0;
                Element::Function(HarmonicExpansion::from_real_params(lipschitz.degree(), &z))
            }
        }
    }

    pub fn check(&self, e: &Element) -> Result<()> {
        match (self, e) {
            (Summand::Matrix(rep), Element::Matrix(m)) => {
                check_dim(rep.dim, m.nrows())?;
                check_dim(rep.dim, m.ncols())
            }
            (Summand::Function { lipschitz, .. }, Element::Function(f)) => {
                check_dim(lipschitz.degree(), f.degree)
            }
            _ => Err(ProxError::InvalidParameter(
                "element does not belong to this summand".into(),
            )),
        }
    }

    pub fn lipschitz(&self, e: &Element) -> Result<f64> {
        self.check(e)?;
        match (self, e) {
            (Summand::Matrix(rep), Element::Matrix(m)) => matrix_lipschitz(rep, m),
            (Summand::Function { lipschitz, .. }, Element::Function(f)) => {
                if f.coeffs
                    .iter()
                    .zip(f.conj().coeffs.iter())
                    .all(|(a, b)| (a - b).norm() <= 1e-14)
                {
                    Ok(lipschitz.value(&f.real_params()))
                } else {
                    Ok(expansion_lipschitz(f, lipschitz.grid(), Polish::DEFAULT).value)
                }
            }
            _ => unreachable!("checked above"),
        }
    }

    pub fn to_params(&self, e: &Element) -> Result<Vec<f64>> {
        self.check(e)?;
        match e {
            Element::Matrix(m) => {
                if !is_hermitian(m, 1e-12) {
                    return Err(ProxError::InvalidParameter(
                        "coordinates need a Hermitian element".into(),
                    ));
                }
                Ok(herm_params(m))
            }
            Element::Function(f) => Ok(f.real_params()),
        }
    }

    pub fn from_params(&self, z: &[f64]) -> Element {
        match self {
            Summand::Matrix(rep) => Element::Matrix(herm_from_params(z, rep.dim)),
            Summand::Function { lipschitz, .. } => {
                Element::Function(HarmonicExpansion::from_real_params(lipschitz.degree(), z))
            }
        }
    }

    pub fn unit_params(&self) -> Vec<f64> {
        match self {
            Summand::Matrix(rep) => identity_params(rep.dim),
            Summand::Function { lipschitz, .. } => {
                let mut z = vec![0.0; coeff_count(lipschitz.degree())];
                z[0] = 1.0;
                z
            }
        }
    }

    /// L with a supergradient in the real coordinates.
    pub(crate) fn lipschitz_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Summand::Matrix(rep) => {
                let t = herm_from_params(z, rep.dim);
                let w =
                    matrix_lipschitz_witness(rep, &t, None).expect("coordinates match the summand");
                (w.value, herm_grad(&w.gradient_kernel(rep)))
            }
            Summand::Function { lipschitz, .. } => {
                let (v, g, _) = lipschitz.value_grad(z);
                (v, g)
            }
        }
    }

    /// Sup norm with a supergradient (functions: over the state grid nodes).
    pub(crate) fn norm_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Summand::Matrix(rep) => {
                let t = herm_from_params(z, rep.dim);
                let eig = nalgebra::SymmetricEigen::new(t);
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
                let u = eig.eigenvectors.column(k).into_owned();
                let kern = (&u * u.adjoint()) * Complex64::new(lam.signum(), 0.0);
                (lam.abs(), herm_grad(&kern))
            }
            Summand::Function { lipschitz, grid } => {
                let deg = lipschitz.degree();
                let vals: Vec<f64> = exec::map_slice(&grid.nodes, |x| {
                    real_basis_at(deg, x)
                        .iter()
                        .zip(z)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        .abs()
                });
                let (k, v) = exec::argmax(&vals).unwrap_or((0, 0.0));
                let basis = real_basis_at(deg, &grid.nodes[k]);
                let s: f64 = basis
                    .iter()
                    .zip(z)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .signum();
                (v, basis.into_iter().map(|b| s * b).collect())
            }
        }
    }

    pub fn sup_norm(&self, e: &Element) -> Result<f64> {
        self.check(e)?;
        match e {
            Element::Matrix(m) => Ok(if is_hermitian(m, 1e-12) {
                herm_op_norm(m)
            } else {
                op_norm(m)
            }),
            Element::Function(f) => match self {
                Summand::Function { grid, .. } => {
                    Ok(exec::map_slice(&grid.nodes, |x| f.eval(x).norm())
                        .into_iter()
                        .fold(0.0, f64::max))
                }
                Summand::Matrix(_) => unreachable!("checked above"),
            },
        }
    }
}

/// The bridge part N of a direct-sum seminorm.
#[derive(Debug, Clone)]
pub enum BridgeTerm {
    /// N_n between functions (left) and B^n (right).
    Ab(Arc<AbBridge>),
    /// N_mn between B^m (left) and B^n (right).
    Bb(Arc<BbBridge>),
}

impl BridgeTerm {
    pub fn len(&self) -> usize {
        match self {
            BridgeTerm::Ab(b) => b.len(),
            BridgeTerm::Bb(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sup over all nodes.
    pub fn eval(&self, a: &Element, b: &Element) -> Result<f64> {
        match self {
            BridgeTerm::Ab(br) => {
                let f = a.as_function()?;
                let t = b.as_matrix()?;
                check_dim(br.n + 1, t.nrows())?;
                if f.degree != br.degree {
                    return Err(ProxError::DimensionMismatch {
                        expected: br.degree,
                        found: f.degree,
                    });
                }
                Ok(br.sup_expansion(f, t))
            }
            BridgeTerm::Bb(br) => {
                let s = a.as_matrix()?;
                let t = b.as_matrix()?;
                check_dim(br.m + 1, s.nrows())?;
                check_dim(br.n + 1, t.nrows())?;
                Ok(br.sup(s, t).0)
            }
        }
    }
}

/// The four terms of a direct-sum seminorm at a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeminormTerms {
    pub left: f64,
    pub right: f64,
    pub bridge: f64,
    pub bridge_adjoint: f64,
}

/// `L_left(a) ∨ L_right(b) ∨ γ⁻¹(N(a, b) ∨ N(a*, b*))`.
#[derive(Debug, Clone)]
pub struct DirectSumSeminorm {
    pub gamma: f64,
    pub left: Summand,
    pub right: Summand,
    pub bridge: BridgeTerm,
}

impl DirectSumSeminorm {
    pub fn new(gamma: f64, left: Summand, right: Summand, bridge: BridgeTerm) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(ProxError::InvalidParameter(format!(
                "bridge constant must be positive, got {gamma}"
            )));
        }
        match (&left, &right, &bridge) {
            (Summand::Function { lipschitz, .. }, Summand::Matrix(rep), BridgeTerm::Ab(b)) => {
                check_dim(b.n, rep.n)?;
                check_dim(b.degree, lipschitz.degree())?;
            }
            (Summand::Matrix(rm), Summand::Matrix(rn), BridgeTerm::Bb(b)) => {
                check_dim(b.m, rm.n)?;
                check_dim(b.n, rn.n)?;
            }
            _ => {
                return Err(ProxError::InvalidParameter(
                    "summands do not match the bridge".into(),
                ))
            }
        }
        Ok(Self {
            gamma,
            left,
            right,
            bridge,
        })
    }

    pub fn terms(&self, a: &Element, b: &Element) -> Result<SeminormTerms> {
        Ok(SeminormTerms {
            left: self.left.lipschitz(a)?,
            right: self.right.lipschitz(b)?,
            bridge: self.bridge.eval(a, b)? / self.gamma,
            bridge_adjoint: self.bridge.eval(&a.adjoint(), &b.adjoint())? / self.gamma,
        })
    }

    pub fn value(&self, a: &Element, b: &Element) -> Result<f64> {
        let t = self.terms(a, b)?;
        Ok(t.left.max(t.right).max(t.bridge).max(t.bridge_adjoint))
    }

    fn matrices(&self, zl: &[f64], zr: &[f64]) -> (Element, Element) {
        (self.left.from_params(zl), self.right.from_params(zr))
    }

    /// Bridge defects at every node for coordinates (zl, zr), unscaled by γ.
    pub(crate) fn bridge_values(&self, zl: &[f64], zr: &[f64]) -> Vec<f64> {
        let (a, b) = self.matrices(zl, zr);
        match &self.bridge {
            BridgeTerm::Ab(br) => br.values(zl, b.as_matrix().expect("matrix summand")),
            BridgeTerm::Bb(br) => br.values(
                a.as_matrix().expect("matrix summand"),
                b.as_matrix().expect("matrix summand"),
            ),
        }
    }

    pub(crate) fn bridge_node_value(&self, k: usize, zl: &[f64], zr: &[f64]) -> f64 {
        let (a, b) = self.matrices(zl, zr);
        match &self.bridge {
            BridgeTerm::Ab(br) => br.node_value(
                k,
                Complex64::new(br.function_value(k, zl), 0.0),
                b.as_matrix().expect("matrix"),
            ),
            BridgeTerm::Bb(br) => br.node_value(
                k,
                a.as_matrix().expect("matrix"),
                b.as_matrix().expect("matrix"),
            ),
        }
    }

    /// Defect at node k with gradients in both coordinate blocks, unscaled.
    pub(crate) fn bridge_node_grad(
        &self,
        k: usize,
        zl: &[f64],
        zr: &[f64],
    ) -> (f64, Vec<f64>, Vec<f64>) {
        let (a, b) = self.matrices(zl, zr);
        match &self.bridge {
            BridgeTerm::Ab(br) => {
                let ng =
                    br.node_gradient(k, br.function_value(k, zl), b.as_matrix().expect("matrix"));
                let gl = br.basis(k).iter().map(|v| ng.d_value * v).collect();
                (ng.value, gl, herm_grad(&ng.kernel))
            }
            BridgeTerm::Bb(br) => {
                let ng = br.node_gradient(
                    k,
                    a.as_matrix().expect("matrix"),
                    b.as_matrix().expect("matrix"),
                );
                (ng.value, herm_grad(&ng.kernel_s), herm_grad(&ng.kernel_t))
            }
        }
    }
}
