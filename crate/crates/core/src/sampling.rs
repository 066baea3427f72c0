//! Seeded random unit tangents and nearby pairs.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::hyperbolic::{HPoint, IsometryMatrix};
use crate::surface::{CollarProfile, SurfaceModel, UnitTangent};

/// Collar samples are drawn from `|r| <= COLLAR_SAMPLE_RADIUS`.
pub const COLLAR_SAMPLE_RADIUS: f64 = 1.5;

/// Liouville-distributed unit tangent: on the constant model uniform over the
/// fundamental octagon, on the collar uniform (area `f dr dθ`) over the
/// truncated collar `|r| <= COLLAR_SAMPLE_RADIUS`.
pub fn random_tangent<R: Rng + ?Sized>(model: &SurfaceModel, rng: &mut R) -> Result<UnitTangent> {
    let angle = rng.gen_range(0.0..TAU);
    match model {
        SurfaceModel::ConstantNegative(group) => {
            let cosh_r = group.circumradius().cosh();
            loop {
                // Hyperbolic area in a disk about i has density ∝ sinh ρ.
                let rho = (1.0 + rng.gen::<f64>() * (cosh_r - 1.0)).acosh();
                let phi = rng.gen_range(0.0..TAU);
                let p = HPoint::from_disk(Complex64::from_polar((0.5 * rho).tanh(), phi))?;
                if group.contains(p, 0.0) {
                    return Ok(UnitTangent::plane(p, angle));
                }
            }
        }
        SurfaceModel::Collar(prof) => {
            let (r, theta) = random_collar_point(prof, COLLAR_SAMPLE_RADIUS, rng);
            Ok(UnitTangent::collar(r, theta, angle))
        }
    }
}

fn random_collar_point<R: Rng + ?Sized>(prof: &CollarProfile, radius: f64, rng: &mut R) -> (f64, f64) {
    let f_max = prof.f(radius);
    loop {
        let r = rng.gen_range(-radius..=radius);
        if rng.gen::<f64>() * f_max <= prof.f(r) {
            return (r, rng.gen_range(0.0..TAU));
        }
    }
}

/// A unit tangent on a closed band geodesic (`|r| <= w/2`, `ψ = ±π/2`).
pub fn random_band_tangent<R: Rng + ?Sized>(prof: &CollarProfile, rng: &mut R) -> UnitTangent {
    let h = prof.half_width();
    let psi = if rng.gen::<bool>() { 0.5 * PI } else { -0.5 * PI };
    UnitTangent::collar(rng.gen_range(-h..=h), rng.gen_range(0.0..TAU), psi)
}

/// `v` moved by at most `radius` in base (chart-metric) and angle.
pub fn perturb<R: Rng + ?Sized>(model: &SurfaceModel, v: &UnitTangent, radius: f64, rng: &mut R) -> Result<UnitTangent> {
    let dir = rng.gen_range(0.0..TAU);
    let step = rng.gen_range(0.0..radius);
    let dangle = rng.gen_range(-radius..=radius);
    match model {
        SurfaceModel::ConstantNegative(_) => {
            let p = v.plane_point()?;
            let q = (IsometryMatrix::frame(p, 0.0) * IsometryMatrix::translation_from_i(dir, step)).apply(HPoint::I);
            Ok(UnitTangent::plane(q, v.angle + dangle))
        }
        SurfaceModel::Collar(prof) => {
            let (r, theta) = v.collar_coords()?;
            Ok(UnitTangent::collar(r + step * dir.cos(), theta + step * dir.sin() / prof.f(r), v.angle + dangle))
        }
    }
}

/// `v` displaced by `size` in the unit direction `dir = (transverse, along, angle)`
/// of the Sasaki frame at `v`. On the constant model the displacement is an
/// isometric transvection, so the plane Sasaki distance to `v` is exactly `size`.
pub fn sasaki_offset(model: &SurfaceModel, v: &UnitTangent, dir: [f64; 3], size: f64) -> Result<UnitTangent> {
    let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let [u0, u1, u2] = if norm > 0.0 { dir.map(|x| size * x / norm) } else { [0.0; 3] };
    match model {
        SurfaceModel::ConstantNegative(_) => {
            let frame = IsometryMatrix::frame(v.plane_point()?, v.angle);
            let shift = IsometryMatrix::translation_from_i(u1.atan2(u0), u0.hypot(u1));
            UnitTangent::plane(HPoint::I, 0.5 * PI + u2).moved_by(&(frame * shift))
        }
        SurfaceModel::Collar(prof) => {
            let (r, theta) = v.collar_coords()?;
            let (s, c) = v.angle.sin_cos();
            // Transverse = ψ + π/2 direction, along = ψ direction, in the orthonormal chart frame.
            let dr = u1 * c - u0 * s;
            let dy = u1 * s + u0 * c;
            Ok(UnitTangent::collar(r + dr, theta + dy / prof.f(r), v.angle + u2))
        }
    }
}

/// A unit direction drawn uniformly from the sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let d = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n2: f64 = d.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return d.map(|x| x / n);
        }
    }
}
