//! Band-limited functions on S² in the complex spherical-harmonic basis,
//! orthonormal for the normalized invariant measure (Condon–Shortley phase).
//!
//! The rotation generators act through the ladder relations
//! `L± Y_lm = √(l(l+1) − m(m±1)) Y_{l,m±1}`, `L_z Y_lm = m Y_lm`, which gives
//! the Riemannian gradient without any pole singularity.

use num_complex::Complex64;

use crate::group_rep::{CosetPoint, EvalGrid, QuadratureGrid};
use crate::linalg::{c, ZERO};
use crate::sphere_opt::{sphere_sup, Polish, SupResult};

#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    (l * l) + (l as i64 + m) as usize
}

pub fn coeff_count(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// Normalized associated Legendre values `Q[l][m]`, m ≥ 0, such that
/// `Y_lm = Q_l^m(cos θ) e^{imφ}` has unit L² norm for the normalized measure.
pub fn normalized_legendre(degree: usize, theta: f64) -> Vec<Vec<f64>> {
    let (s, x) = theta.sin_cos();
    let mut q = vec![vec![0.0; degree + 1]; degree + 1];
    q[0][0] = 1.0;
    for m in 1..=degree {
        let mf = m as f64;
        q[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * q[m - 1][m - 1];
    }
    for m in 0..degree {
        q[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * x * q[m][m];
    }
    for m in 0..=degree {
        let mf = m as f64;
        for l in m + 2..=degree {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            q[l][m] = a * (x * q[l - 1][m] - b * q[l - 2][m]);
        }
    }
    q
}

/// All `Y_lm(x)` for l ≤ degree, indexed by [`lm_index`].
pub fn harmonics_at(degree: usize, x: &CosetPoint) -> Vec<Complex64> {
    let q = normalized_legendre(degree, x.theta);
    let mut out = vec![ZERO; coeff_count(degree)];
    for (l, row) in q.iter().enumerate() {
        for m in 0..=l {
            let y = Complex64::from_polar(1.0, m as f64 * x.phi) * row[m];
            out[lm_index(l, m as i64)] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[lm_index(l, -(m as i64))] = y.conj() * sign;
            }
        }
    }
    out
}

/// Real orthonormal basis values at `x`: `Y_l0`, then `√2 Re Y_lm`,
/// `√2 Im Y_lm` for m = 1..l, degree by degree. Index 0 is the constant.
pub fn real_basis_at(degree: usize, x: &CosetPoint) -> Vec<f64> {
    let y = harmonics_at(degree, x);
    let s = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(coeff_count(degree));
    for l in 0..=degree {
        out.push(y[lm_index(l, 0)].re);
        for m in 1..=l as i64 {
            let v = y[lm_index(l, m)];
            out.push(s * v.re);
            out.push(s * v.im);
        }
    }
    out
}

/// f = Σ c_lm Y_lm with l ≤ degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicExpansion {
    pub degree: usize,
    pub coeffs: Vec<Complex64>,
}

impl HarmonicExpansion {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![ZERO; coeff_count(degree)],
        }
    }

    /// Real function with coordinates `params` in the basis of [`real_basis_at`].
    pub fn from_real_params(degree: usize, params: &[f64]) -> Self {
        assert_eq!(params.len(), coeff_count(degree));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Self::zero(degree);
        let mut k = 0;
        for l in 0..=degree {
            out.coeffs[lm_index(l, 0)] = c(params[k]);
            k += 1;
            for m in 1..=l as i64 {
                let (a, b) = (params[k], params[k + 1]);
                k += 2;
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[lm_index(l, m)] = Complex64::new(a, -b) * r;
                out.coeffs[lm_index(l, -m)] = Complex64::new(a, b) * (r * sign);
            }
        }
        out
    }

    /// Complex conjugate function, using conj(Y_lm) = (-1)^m Y_{l,-m}.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.degree);
        for l in 0..=self.degree {
            for m in -(l as i64)..=l as i64 {
                let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                out.coeffs[lm_index(l, m)] = self.coeffs[lm_index(l, -m)].conj() * sign;
            }
        }
        out
    }

    /// Inverse of [`HarmonicExpansion::from_real_params`]; the imaginary part
    /// of a non-real expansion is dropped.
    pub fn real_params(&self) -> Vec<f64> {
        let s = std::f64::consts::SQRT_2;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for l in 0..=self.degree {
            out.push(self.coeffs[lm_index(l, 0)].re);
            for m in 1..=l as i64 {
                let v = self.coeffs[lm_index(l, m)];
                out.push(s * v.re);
                out.push(-s * v.im);
            }
        }
        out
    }

    /// Projection of quadrature samples onto degree ≤ `degree`; exact when the
    /// samples come from a function of that band limit and the grid integrates
    /// degree `2·degree`.
    pub fn project(grid: &QuadratureGrid, values: &[Complex64], degree: usize) -> Self {
        let mut out = Self::zero(degree);
        for ((x, w), f) in grid.nodes.iter().zip(&grid.weights).zip(values) {
            let y = harmonics_at(degree, x);
            for (acc, yk) in out.coeffs.iter_mut().zip(&y) {
                *acc += yk.conj() * *f * *w;
            }
        }
        out
    }

    pub fn eval(&self, x: &CosetPoint) -> Complex64 {
        harmonics_at(self.degree, x)
            .iter()
            .zip(&self.coeffs)
            .map(|(y, c)| y * c)
            .sum()
    }

    /// Coefficients of (L_x f, L_y f, L_z f).
    pub fn ladder(&self) -> [HarmonicExpansion; 3] {
        let d = self.degree;
        let mut lp = Self::zero(d);
        let mut lm = Self::zero(d);
        let mut lz = Self::zero(d);
        for l in 0..=d {
            let ll = (l * (l + 1)) as f64;
            for m in -(l as i64)..=l as i64 {
                let cm = self.coeffs[lm_index(l, m)];
                let mf = m as f64;
                lz.coeffs[lm_index(l, m)] = cm * mf;
                if m < l as i64 {
                    lp.coeffs[lm_index(l, m + 1)] += cm * (ll - mf * (mf + 1.0)).sqrt();
                }
                if m > -(l as i64) {
                    lm.coeffs[lm_index(l, m - 1)] += cm * (ll - mf * (mf - 1.0)).sqrt();
                }
            }
        }
        let half = c(0.5);
        let minus_half_i = Complex64::new(0.0, -0.5);
        let lx = Self {
            degree: d,
            coeffs: lp
                .coeffs
                .iter()
                .zip(&lm.coeffs)
                .map(|(a, b)| (a + b) * half)
                .collect(),
        };
        let ly = Self {
            degree: d,
            coeffs: lp
                .coeffs
                .iter()
                .zip(&lm.coeffs)
                .map(|(a, b)| (a - b) * minus_half_i)
                .collect(),
        };
        [lx, ly, lz]
    }
}

/// Pointwise rotational-derivative bound for a band-limited function:
/// `sup_{|X|=1} |X · (L f)(x)|` from precomputed ladder expansions.
pub fn derivative_bound(ladder: &[HarmonicExpansion; 3], x: &CosetPoint) -> f64 {
    let y = harmonics_at(ladder[0].degree, x);
    let w: Vec<Complex64> = ladder
        .iter()
        .map(|e| y.iter().zip(&e.coeffs).map(|(a, b)| a * b).sum())
        .collect();
    let (aa, bb, ab) = w.iter().fold((0.0, 0.0, 0.0), |(aa, bb, ab), z| {
        (aa + z.re * z.re, bb + z.im * z.im, ab + z.re * z.im)
    });
    let tr = aa + bb;
    let disc = ((aa - bb) * (aa - bb) + 4.0 * ab * ab).sqrt();
    (0.5 * (tr + disc)).max(0.0).sqrt()
}

/// Lipschitz constant of a band-limited function for the great-circle metric:
/// supremum of [`derivative_bound`] over `grid`, polished.
pub fn expansion_lipschitz(f: &HarmonicExpansion, grid: &EvalGrid, polish: Polish) -> SupResult {
    let ladder = f.ladder();
    sphere_sup(grid, |x| derivative_bound(&ladder, x), polish)
}
