use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ProxError, Result};

/// A point of G/H ≅ S² in polar angles. The north pole (θ = 0) is the
/// identity coset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosetPoint {
    pub theta: f64,
    pub phi: f64,
}

impl CosetPoint {
    pub const NORTH: CosetPoint = CosetPoint {
        theta: 0.0,
        phi: 0.0,
    };

    /// Validates θ ∈ [0, π] and wraps φ into [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(ProxError::InvalidParameter("non-finite coset angle".into()));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(ProxError::InvalidParameter(format!(
                "theta = {theta} outside [0, pi]"
            )));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    pub(crate) fn new_unchecked(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn to_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Point for a nonzero 3-vector (normalized internally).
    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let z = (v[2] / r).clamp(-1.0, 1.0);
        let theta = z.acos();
        let phi = if v[0] == 0.0 && v[1] == 0.0 {
            0.0
        } else {
            v[1].atan2(v[0]).rem_euclid(TAU)
        };
        Self {
            theta,
            phi: if phi >= TAU { 0.0 } else { phi },
        }
    }

    /// The fixed section g_x = R_z(φ) R_y(θ) as a rotation of R³.
    pub fn section_rotation(&self) -> Rotation {
        Rotation::about_z(self.phi).compose(&Rotation::about_y(self.theta))
    }

    /// Great-circle distance.
    pub fn distance(&self, other: &CosetPoint) -> f64 {
        let a = self.to_vector();
        let b = other.to_vector();
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let s = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        let cdot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        s.atan2(cdot)
    }
}

/// A rotation of R³ stored as an orthogonal matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub fn about_z(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Rotation([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn about_y(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Rotation([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Rotation(out)
    }

    pub fn inverse(&self) -> Rotation {
        let m = self.0;
        Rotation([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Rotation angle in [0, π]; this is the geodesic length of the rotation
    /// for the unit-speed one-parameter subgroups.
    pub fn angle(&self) -> f64 {
        let tr = self.0[0][0] + self.0[1][1] + self.0[2][2];
        ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_maps_north_pole_to_point() {
        let x = CosetPoint::new(1.1, 4.0).unwrap();
        let v = x.section_rotation().apply([0.0, 0.0, 1.0]);
        let w = x.to_vector();
        for k in 0..3 {
            assert!((v[k] - w[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_out_of_range_theta() {
        assert!(CosetPoint::new(-0.1, 0.0).is_err());
        assert!(CosetPoint::new(3.5, 0.0).is_err());
        let p = CosetPoint::new(0.5, -1.0).unwrap();
        assert!((0.0..TAU).contains(&p.phi));
    }

    #[test]
    fn vector_roundtrip() {
        let x = CosetPoint::new(2.0, 5.5).unwrap();
        let y = CosetPoint::from_vector(x.to_vector());
        assert!(x.distance(&y) < 1e-12);
    }
}
