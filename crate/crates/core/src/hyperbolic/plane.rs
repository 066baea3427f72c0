//! Upper half-plane points, PSL(2,R) isometries and ideal boundary points.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `ad - bc = 1` accepted by [`IsometryMatrix::new`].
pub const DET_TOL: f64 = 1e-12;

/// A point of the hyperbolic plane in the upper half-plane chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidPoint(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(Self { x, y })
    }

    /// The point `i`, used as the centre of the fundamental octagon.
    pub const I: HPoint = HPoint { x: 0.0, y: 1.0 };

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Image in the Poincaré disk under `z -> (z - i) / (z + i)`.
    pub fn to_disk(self) -> Complex64 {
        let z = self.to_complex();
        (z - Complex64::i()) / (z + Complex64::i())
    }

    pub fn from_disk(w: Complex64) -> Result<Self> {
        if w.norm() >= 1.0 {
            return Err(Error::InvalidPoint(format!("{w} is not inside the unit disk")));
        }
        let z = Complex64::i() * (Complex64::new(1.0, 0.0) + w) / (Complex64::new(1.0, 0.0) - w);
        HPoint::new(z.re, z.im)
    }

    /// Coordinates `(X, Y)` on the hyperboloid sheet; a well-conditioned key
    /// for hashing points far from `i`.
    pub(crate) fn hyperboloid_xy(self) -> (f64, f64) {
        let r2 = self.x * self.x + self.y * self.y;
        (self.x / self.y, (r2 - 1.0) / (2.0 * self.y))
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Hyperbolic distance in the upper half-plane.
pub fn hyperbolic_distance(z1: HPoint, z2: HPoint) -> f64 {
    let dx = z1.x - z2.x;
    let dy = z1.y - z2.y;
    let chord = (dx * dx + dy * dy).sqrt();
    2.0 * (chord / (2.0 * (z1.y * z2.y).sqrt())).asinh()
}

/// `cosh` of the hyperbolic distance, cheaper when only comparisons are needed.
pub(crate) fn cosh_distance(z1: HPoint, z2: HPoint) -> f64 {
    let dx = z1.x - z2.x;
    let dy = z1.y - z2.y;
    1.0 + (dx * dx + dy * dy) / (2.0 * z1.y * z2.y)
}

/// An orientation-preserving isometry `z -> (az + b) / (cz + d)` with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl IsometryMatrix {
    pub const IDENTITY: IsometryMatrix = IsometryMatrix { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Self { a, b, c, d };
        m.check()?;
        Ok(m)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn check(&self) -> Result<()> {
        let det = self.det();
        if (det - 1.0).abs() > DET_TOL || !det.is_finite() {
            return Err(Error::InvalidIsometry { det });
        }
        Ok(())
    }

    /// Rescales so the determinant is exactly one again (up to rounding).
    pub fn renormalized(self) -> Self {
        let s = self.det().sqrt().recip();
        Self { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Translation along the vertical geodesic through `i`: `z -> e^t z`.
    pub fn vertical_translation(t: f64) -> Self {
        let h = 0.5 * t;
        Self { a: h.exp(), b: 0.0, c: 0.0, d: (-h).exp() }
    }

    /// Rotation about `i` turning tangent vectors at `i` by `phi` (counter-clockwise).
    pub fn rotation_about_i(phi: f64) -> Self {
        let (s, c) = (0.5 * phi).sin_cos();
        Self { a: c, b: s, c: -s, d: c }
    }

    /// The isometry taking the upward unit vector at `i` to the unit vector at
    /// `z` making angle `angle` with the positive real direction.
    pub fn frame(z: HPoint, angle: f64) -> Self {
        let sy = z.y.sqrt();
        let scale_shift = Self { a: sy, b: z.x / sy, c: 0.0, d: 1.0 / sy };
        scale_shift * Self::rotation_about_i(angle - FRAC_PI_2)
    }

    /// Hyperbolic translation of length `t` along the geodesic leaving `i` in direction `phi`.
    pub fn translation_from_i(phi: f64, t: f64) -> Self {
        let r = Self::rotation_about_i(phi - FRAC_PI_2);
        (r * Self::vertical_translation(t) * r.inverse()).renormalized()
    }

    /// Möbius action on the upper half-plane.
    pub fn apply(&self, z: HPoint) -> HPoint {
        let w = self.apply_complex(z.to_complex());
        // The imaginary part is exactly y / |cz + d|^2 for unit determinant.
        let den = (self.c * z.x + self.d).powi(2) + (self.c * z.y).powi(2);
        HPoint { x: w.re, y: z.y / den }
    }

    pub(crate) fn apply_complex(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// New direction angle of a tangent vector at `z` with angle `angle` after applying `self`.
    pub fn push_angle(&self, z: HPoint, angle: f64) -> f64 {
        let w = z.to_complex() * self.c + self.d;
        wrap_angle(angle - 2.0 * w.arg())
    }

    /// Checked Möbius action: rejects matrices that drifted off unit determinant.
    pub fn try_apply(&self, z: HPoint) -> Result<HPoint> {
        self.check()?;
        HPoint::new(z.x, z.y)?;
        Ok(self.apply(z))
    }

    /// Image of an ideal boundary point.
    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        match p {
            BoundaryPoint::Infinity => {
                if self.c == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Translation length `2 acosh(|tr|/2)` of a hyperbolic element.
    pub fn translation_length(&self) -> Result<f64> {
        let t = self.trace().abs();
        if t <= 2.0 {
            return Err(Error::NotHyperbolic { trace: t });
        }
        Ok(2.0 * (0.5 * t).acosh())
    }

    /// Repelling and attracting fixed points of a hyperbolic element.
    pub fn axis_endpoints(&self) -> Result<(BoundaryPoint, BoundaryPoint)> {
        let tr = self.trace();
        if tr.abs() <= 2.0 {
            return Err(Error::NotHyperbolic { trace: tr.abs() });
        }
        // Normalize the sign so the trace is positive; the action is unchanged.
        let m = if tr < 0.0 { self.scaled(-1.0) } else { *self };
        // Fixed points solve c z^2 + (d - a) z - b = 0; use the cancellation-free
        // pair q / c and -b / q. The root `small` is always finite.
        let bq = m.d - m.a;
        let disc = (tr * tr - 4.0).sqrt();
        let q = -0.5 * (bq + if bq >= 0.0 { disc } else { -disc });
        let small = -m.b / q;
        let far = if m.c.abs() <= 1e-14 * q.abs() {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(q / m.c)
        };
        let near = BoundaryPoint::Finite(small);
        // At a fixed point z, c z + d is an eigenvalue; it exceeds 1 in modulus
        // exactly at the attracting point.
        if (m.c * small + m.d).abs() > 1.0 {
            Ok((far, near))
        } else {
            Ok((near, far))
        }
    }

    fn scaled(&self, s: f64) -> Self {
        Self { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    /// Projective distance to the identity, insensitive to the overall sign.
    pub fn distance_to_identity(&self) -> f64 {
        let plus = (self.a - 1.0).abs().max(self.b.abs()).max(self.c.abs()).max((self.d - 1.0).abs());
        let minus = (self.a + 1.0).abs().max(self.b.abs()).max(self.c.abs()).max((self.d + 1.0).abs());
        plus.min(minus)
    }
}

impl Mul for IsometryMatrix {
    type Output = IsometryMatrix;

    fn mul(self, o: IsometryMatrix) -> IsometryMatrix {
        IsometryMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// A point of the ideal boundary `R ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

impl BoundaryPoint {
    /// Position on the unit circle of the disk model, in `(-π, π]`.
    pub fn circle_angle(self) -> f64 {
        match self {
            BoundaryPoint::Infinity => 0.0,
            BoundaryPoint::Finite(x) => {
                let w = Complex64::new(x, -1.0) / Complex64::new(x, 1.0);
                w.arg()
            }
        }
    }

    /// Chordal comparison on the circle at infinity.
    pub fn approx_eq(self, other: BoundaryPoint, tol: f64) -> bool {
        wrap_angle(self.circle_angle() - other.circle_angle()).abs() <= tol
    }
}

/// The isometry mapping the geodesic `0 -> ∞` onto the geodesic `from -> to`.
pub fn geodesic_frame(from: BoundaryPoint, to: BoundaryPoint) -> Result<IsometryMatrix> {
    use BoundaryPoint::*;
    let m = match (from, to) {
        (Finite(p), Infinity) => IsometryMatrix { a: 1.0, b: p, c: 0.0, d: 1.0 },
        (Infinity, Finite(q)) => IsometryMatrix { a: q, b: -1.0, c: 1.0, d: 0.0 },
        (Finite(p), Finite(q)) => {
            let gap = q - p;
            if gap.abs() < 1e-300 {
                return Err(Error::NoConnector);
            }
            let m = if gap > 0.0 {
                IsometryMatrix { a: q, b: p, c: 1.0, d: 1.0 }
            } else {
                IsometryMatrix { a: q, b: -p, c: 1.0, d: -1.0 }
            };
            m.renormalized()
        }
        (Infinity, Infinity) => return Err(Error::NoConnector),
    };
    Ok(m)
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_translation_and_scaling() {
        let i = HPoint::I;
        assert_eq!(IsometryMatrix::IDENTITY.try_apply(i).unwrap(), i);
        let t = IsometryMatrix::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let z = t.apply(i);
        assert_abs_diff_eq!(z.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.y, 1.0, epsilon = 1e-15);
        let s = IsometryMatrix::new(0.5f64.exp(), 0.0, 0.0, (-0.5f64).exp()).unwrap();
        let z = s.apply(i);
        assert_abs_diff_eq!(z.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.y, std::f64::consts::E, epsilon = 1e-14);
    }

    #[test]
    fn non_unit_determinant_is_rejected() {
        assert!(matches!(IsometryMatrix::new(2.0, 0.0, 0.0, 1.0), Err(Error::InvalidIsometry { .. })));
        let m = IsometryMatrix { a: 1.0, b: 0.0, c: 0.0, d: 1.1 };
        assert!(m.try_apply(HPoint::I).is_err());
    }

    #[test]
    fn invalid_points_are_rejected() {
        assert!(HPoint::new(0.0, 0.0).is_err());
        assert!(HPoint::new(0.0, -1.0).is_err());
        assert!(HPoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let i = HPoint::I;
        assert_eq!(hyperbolic_distance(i, i), 0.0);
        let e = HPoint::new(0.0, std::f64::consts::E).unwrap();
        assert_abs_diff_eq!(hyperbolic_distance(i, e), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn translation_length_trace_three() {
        // Oracle: iterate on a point of the axis and measure displacement.
        let m = IsometryMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let (from, to) = m.axis_endpoints().unwrap();
        let f = geodesic_frame(from, to).unwrap();
        let p = f.apply(HPoint::I);
        let q = m.apply(p);
        let measured = hyperbolic_distance(p, q);
        assert_abs_diff_eq!(measured, 1.924847300238413, epsilon = 1e-12);
        assert_abs_diff_eq!(m.translation_length().unwrap(), measured, epsilon = 1e-12);
    }

    #[test]
    fn parabolic_is_not_hyperbolic() {
        let m = IsometryMatrix::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(m.translation_length(), Err(Error::NotHyperbolic { .. })));
    }

    #[test]
    fn frame_maps_standard_vector() {
        let z = HPoint::new(0.3, 2.0).unwrap();
        let m = IsometryMatrix::frame(z, 1.1);
        let w = m.apply(HPoint::I);
        assert_abs_diff_eq!(w.x, 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(w.y, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.push_angle(HPoint::I, FRAC_PI_2), 1.1, epsilon = 1e-14);
    }

    #[test]
    fn attracting_endpoint_of_vertical_translation() {
        let (from, to) = IsometryMatrix::vertical_translation(1.0).axis_endpoints().unwrap();
        assert_eq!(to, BoundaryPoint::Infinity);
        assert!(from.approx_eq(BoundaryPoint::Finite(0.0), 1e-12));
    }

    #[test]
    fn disk_round_trip() {
        let z = HPoint::new(-0.7, 0.4).unwrap();
        let back = HPoint::from_disk(z.to_disk()).unwrap();
        assert_abs_diff_eq!(back.x, z.x, epsilon = 1e-13);
        assert_abs_diff_eq!(back.y, z.y, epsilon = 1e-13);
    }
}
