//! The two surface models: the constant curvature −1 genus-two quotient and a
//! warped-product collar `dr² + f(r)² dθ²` containing a flat band.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{build_genus2_group, hyperbolic_distance, wrap_angle, FuchsianGroup, HPoint, IsometryMatrix};

/// Number of grid points used to certify convexity of a collar profile.
const CONVEXITY_GRID: usize = 10_000;

/// Even convex profile `f(r) = c cosh(m(r))` of a collar.
///
/// `m` vanishes on the band `|r| <= w/2` and has slope `S((|r| - w/2)/s)`
/// outside, with `S(x) = 3x² - 2x³` clamped to `[0, 1]`. Then `f` is C², flat
/// on the band and exactly `c cosh(|r| - w/2 - s/2)` beyond the ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarProfile {
    pub c: f64,
    pub w: f64,
    pub s: f64,
}

impl CollarProfile {
    pub fn half_width(&self) -> f64 {
        0.5 * self.w
    }

    /// Ramp coordinate `x = (|r| - w/2)/s` clamped to `[0, 1]`, with `|r|` excess past the ramp.
    fn ramp(&self, r: f64) -> (f64, f64) {
        let x = (r.abs() - 0.5 * self.w) / self.s;
        if x <= 0.0 {
            (0.0, 0.0)
        } else if x >= 1.0 {
            (1.0, (x - 1.0) * self.s)
        } else {
            (x, 0.0)
        }
    }

    /// Signed warping exponent `m(r)` (odd in r).
    pub fn m(&self, r: f64) -> f64 {
        let (x, beyond) = self.ramp(r);
        let unsigned = self.s * (x.powi(3) - 0.5 * x.powi(4)) + beyond;
        unsigned.copysign(r)
    }

    /// `m'(r)`, even in r.
    pub fn dm(&self, r: f64) -> f64 {
        let (x, _) = self.ramp(r);
        x * x * (3.0 - 2.0 * x)
    }

    /// `m''(r)`, odd in r.
    pub fn ddm(&self, r: f64) -> f64 {
        let (x, _) = self.ramp(r);
        (6.0 * x * (1.0 - x) / self.s).copysign(r)
    }

    pub fn f(&self, r: f64) -> f64 {
        self.c * self.m(r).cosh()
    }

    pub fn df(&self, r: f64) -> f64 {
        self.c * self.m(r).sinh() * self.dm(r)
    }

    pub fn ddf(&self, r: f64) -> f64 {
        let m = self.m(r);
        let dm = self.dm(r);
        self.c * (m.cosh() * dm * dm + m.sinh() * self.ddm(r))
    }

    /// `f'/f`.
    pub fn log_derivative(&self, r: f64) -> f64 {
        self.m(r).tanh() * self.dm(r)
    }

    /// Gaussian curvature `-f''/f`.
    pub fn curvature(&self, r: f64) -> f64 {
        let dm = self.dm(r);
        -(dm * dm + self.m(r).tanh() * self.ddm(r))
    }

    pub fn in_band(&self, r: f64) -> bool {
        r.abs() <= 0.5 * self.w
    }
}

/// A point in a model chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChartPoint {
    /// Upper half-plane point (constant model, universal cover).
    Plane(HPoint),
    /// Collar coordinates; `theta` may be unwrapped (a lift to the cover).
    Collar { r: f64, theta: f64 },
}

/// A unit tangent vector: base point plus direction angle in the orthonormal
/// chart frame. For the plane the angle is measured from `+x`; for the collar
/// it is measured from `∂r` towards `(1/f)∂θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitTangent {
    pub base: ChartPoint,
    pub angle: f64,
}

impl UnitTangent {
    pub fn plane(p: HPoint, angle: f64) -> Self {
        Self { base: ChartPoint::Plane(p), angle: angle.rem_euclid(TAU) }
    }

    pub fn collar(r: f64, theta: f64, angle: f64) -> Self {
        Self { base: ChartPoint::Collar { r, theta }, angle: angle.rem_euclid(TAU) }
    }

    /// The flip `-θ`.
    pub fn reversed(&self) -> Self {
        Self { base: self.base, angle: (self.angle + PI).rem_euclid(TAU) }
    }

    pub fn plane_point(&self) -> Result<HPoint> {
        match self.base {
            ChartPoint::Plane(p) => Ok(p),
            ChartPoint::Collar { .. } => Err(Error::ModelMismatch { expected: "constant-curvature" }),
        }
    }

    pub fn collar_coords(&self) -> Result<(f64, f64)> {
        match self.base {
            ChartPoint::Collar { r, theta } => Ok((r, theta)),
            ChartPoint::Plane(_) => Err(Error::ModelMismatch { expected: "collar" }),
        }
    }

    /// Image under an isometry of the plane.
    pub fn moved_by(&self, m: &IsometryMatrix) -> Result<Self> {
        let p = self.plane_point()?;
        Ok(Self::plane(m.apply(p), m.push_angle(p, self.angle)))
    }
}

impl fmt::Display for UnitTangent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.base {
            ChartPoint::Plane(p) => write!(f, "({}, {}; {})", p.x, p.y, self.angle),
            ChartPoint::Collar { r, theta } => write!(f, "(r={}, θ={}; {})", r, theta, self.angle),
        }
    }
}

/// A surface model.
#[derive(Debug, Clone)]
pub enum SurfaceModel {
    ConstantNegative(FuchsianGroup),
    Collar(CollarProfile),
}

impl SurfaceModel {
    pub fn genus2() -> Self {
        SurfaceModel::ConstantNegative(build_genus2_group())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SurfaceModel::ConstantNegative(_) => "constant",
            SurfaceModel::Collar(_) => "collar",
        }
    }

    pub fn group(&self) -> Result<&FuchsianGroup> {
        match self {
            SurfaceModel::ConstantNegative(g) => Ok(g),
            SurfaceModel::Collar(_) => Err(Error::ModelMismatch { expected: "constant-curvature" }),
        }
    }

    pub fn profile(&self) -> Result<&CollarProfile> {
        match self {
            SurfaceModel::Collar(p) => Ok(p),
            SurfaceModel::ConstantNegative(_) => Err(Error::ModelMismatch { expected: "collar" }),
        }
    }

    /// Checks that a tangent vector lives in this model's chart.
    pub fn check(&self, v: &UnitTangent) -> Result<()> {
        match (self, v.base) {
            (SurfaceModel::ConstantNegative(_), ChartPoint::Plane(_)) => Ok(()),
            (SurfaceModel::Collar(_), ChartPoint::Collar { r, theta }) if r.is_finite() && theta.is_finite() => Ok(()),
            (SurfaceModel::Collar(_), ChartPoint::Collar { .. }) => {
                Err(Error::InvalidPoint("non-finite collar coordinates".into()))
            }
            (SurfaceModel::ConstantNegative(_), _) => Err(Error::ModelMismatch { expected: "constant-curvature" }),
            (SurfaceModel::Collar(_), _) => Err(Error::ModelMismatch { expected: "collar" }),
        }
    }

    /// Parses a model specification: `key = value` lines with keys `kind`
    /// (`constant` or `collar`), and for the collar `c`, `w`, `s`. `#` starts a comment.
    pub fn from_spec_str(text: &str) -> Result<Self> {
        let mut kind = None;
        let (mut c, mut w, mut s) = (1.0, 0.5, 0.5);
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("line {}: '{value}' is not a number", n + 1)))
            };
            match key {
                "kind" => kind = Some(value.to_string()),
                "c" => c = num()?,
                "w" => w = num()?,
                "s" => s = num()?,
                other => return Err(Error::InvalidInput(format!("line {}: unknown key '{other}'", n + 1))),
            }
        }
        match kind.as_deref() {
            Some("constant") | Some("genus2") => Ok(Self::genus2()),
            Some("collar") => build_collar(c, w, s),
            Some(k) => Err(Error::InvalidInput(format!("unknown model kind '{k}'"))),
            None => Err(Error::InvalidInput("missing model kind".into())),
        }
    }
}

/// Gaussian curvature at a chart point.
pub fn curvature_at(model: &SurfaceModel, p: &ChartPoint) -> f64 {
    match (model, p) {
        (SurfaceModel::ConstantNegative(_), _) => -1.0,
        (SurfaceModel::Collar(prof), ChartPoint::Collar { r, .. }) => prof.curvature(*r),
        (SurfaceModel::Collar(prof), ChartPoint::Plane(_)) => prof.curvature(f64::INFINITY),
    }
}

/// Builds a collar model, validating the profile on a dense grid.
pub fn build_collar(c: f64, w: f64, s: f64) -> Result<SurfaceModel> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidProfile(format!("waist c must be positive, got {c}")));
    }
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::InvalidProfile(format!("band width w must be nonnegative, got {w}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidProfile(format!("smoothing scale s must be positive, got {s}")));
    }
    let prof = CollarProfile { c, w, s };
    let reach = 0.5 * w + s + 2.0;
    for k in 0..=CONVEXITY_GRID {
        let r = -reach + 2.0 * reach * k as f64 / CONVEXITY_GRID as f64;
        let ddf = prof.ddf(r);
        if !(ddf >= -1e-12 * prof.f(r)) {
            return Err(Error::InvalidProfile(format!("f'' = {ddf} < 0 at r = {r}")));
        }
    }
    Ok(SurfaceModel::Collar(prof))
}

/// Distance on the genus-two surface between two points of the cover.
pub fn surface_distance(group: &FuchsianGroup, p: HPoint, q: HPoint) -> f64 {
    let d = hyperbolic_distance(p, q);
    if d < group.injectivity_radius() {
        return d;
    }
    let (Ok((p0, _)), Ok((q0, _))) = (group.reduce(p), group.reduce(q)) else {
        return d;
    };
    group.min_over_lifts(p0, q0, |g| hyperbolic_distance(p0, g.apply(q0)))
}

/// Reduces a plane tangent vector into the octagon.
pub fn reduce_tangent(group: &FuchsianGroup, v: &UnitTangent) -> Result<UnitTangent> {
    let p = v.plane_point()?;
    let (_, _, m) = group.reduce_with_matrix(p)?;
    v.moved_by(&m.inverse())
}

/// The lift of `v` nearest to `anchor` in the plane Sasaki distance, with the
/// deck element `g` such that the lift is `g v`.
pub fn nearest_lift(group: &FuchsianGroup, anchor: &UnitTangent, v: &UnitTangent) -> Result<(UnitTangent, IsometryMatrix)> {
    let (_, _, ma) = group.reduce_with_matrix(anchor.plane_point()?)?;
    let (_, _, mv) = group.reduce_with_matrix(v.plane_point()?)?;
    let (a0, v0) = (anchor.moved_by(&ma.inverse())?, v.moved_by(&mv.inverse())?);
    let (p0, q0) = (a0.plane_point()?, v0.plane_point()?);
    let (_, g) = group.argmin_over_lifts(p0, q0, |g| plane_sasaki(&a0, &v0.moved_by(g).unwrap_or(v0)).unwrap_or(f64::INFINITY));
    let deck = (ma * g * mv.inverse()).renormalized();
    Ok((v.moved_by(&deck)?, deck))
}

/// Angle from the parallel transport of `(p, a)` along the segment `[p, q]`
/// to `(q, b)`, in `(-π, π]`. Invariant under isometries of the plane.
pub fn transported_angle_gap(p: HPoint, a: f64, q: HPoint, b: f64) -> f64 {
    if hyperbolic_distance(p, q) < 1e-14 {
        return wrap_angle(b - a);
    }
    // Put p at i (affine maps keep chart angles), then rotate so q lies straight above.
    let to_i = IsometryMatrix::frame(p, FRAC_PI_2).inverse();
    let q1 = to_i.apply(q);
    let heading = q1.to_disk().arg() + FRAC_PI_2;
    let n = IsometryMatrix::rotation_about_i(FRAC_PI_2 - heading) * to_i;
    // Along the imaginary axis the chart frame is parallel.
    wrap_angle(n.push_angle(q, b) - n.push_angle(p, a))
}

/// Sasaki-type distance on the cover of the constant model (no deck minimisation).
pub fn plane_sasaki(a: &UnitTangent, b: &UnitTangent) -> Result<f64> {
    let (p, q) = (a.plane_point()?, b.plane_point()?);
    Ok(hyperbolic_distance(p, q).hypot(transported_angle_gap(p, a.angle, q, b.angle)))
}

/// Collar base-distance proxy: the larger of the flat-cylinder distance and the
/// Fermi-coordinate hyperbolic distance, with `Δθ` taken as given (`lifted`) or
/// wrapped to `(-π, π]`.
fn collar_base_distance(prof: &CollarProfile, (r1, t1): (f64, f64), (r2, t2): (f64, f64), lifted: bool) -> f64 {
    let dt = if lifted { t2 - t1 } else { wrap_angle(t2 - t1) };
    let flat = (r2 - r1).hypot(prof.c * dt);
    let (m1, m2) = (prof.m(r1), prof.m(r2));
    let ch = m1.cosh() * m2.cosh() * (prof.c * dt).cosh() - m1.sinh() * m2.sinh();
    flat.max(ch.max(1.0).acosh())
}

/// Sasaki distance proxy: `sqrt(base² + angle²)`. On the constant model the
/// angle is compared after parallel transport along the shortest segment; on
/// the collar the chart-frame angle difference stands in for transport.
pub fn sasaki_distance(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent) -> Result<f64> {
    model.check(a)?;
    model.check(b)?;
    match model {
        SurfaceModel::Collar(prof) => {
            let base = collar_base_distance(prof, a.collar_coords()?, b.collar_coords()?, false);
            Ok(base.hypot(wrap_angle(a.angle - b.angle)))
        }
        SurfaceModel::ConstantNegative(group) => {
            let direct = plane_sasaki(a, b)?;
            let base = hyperbolic_distance(a.plane_point()?, b.plane_point()?);
            // Any other lift is at base distance >= 2 inj - base.
            if direct <= 2.0 * group.injectivity_radius() - base {
                return Ok(direct);
            }
            let (ra, rb) = (reduce_tangent(group, a)?, reduce_tangent(group, b)?);
            let (p0, q0) = (ra.plane_point()?, rb.plane_point()?);
            Ok(group.min_over_lifts(p0, q0, |g| {
                let q = g.apply(q0);
                hyperbolic_distance(p0, q).hypot(transported_angle_gap(p0, ra.angle, q, g.push_angle(q0, rb.angle)))
            }))
        }
    }
}

/// Base-point distance on the universal cover (collar: proxy with unwrapped θ).
pub fn lifted_base_distance(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent) -> Result<f64> {
    match model {
        SurfaceModel::Collar(prof) => Ok(collar_base_distance(prof, a.collar_coords()?, b.collar_coords()?, true)),
        SurfaceModel::ConstantNegative(_) => Ok(hyperbolic_distance(a.plane_point()?, b.plane_point()?)),
    }
}

/// Sasaki proxy on the universal cover (collar: unwrapped θ; plane: no deck group).
pub fn lifted_sasaki(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent) -> Result<f64> {
    model.check(a)?;
    model.check(b)?;
    match model {
        SurfaceModel::Collar(prof) => {
            let base = collar_base_distance(prof, a.collar_coords()?, b.collar_coords()?, true);
            Ok(base.hypot(wrap_angle(a.angle - b.angle)))
        }
        SurfaceModel::ConstantNegative(_) => plane_sasaki(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn collar() -> SurfaceModel {
        build_collar(1.0, 0.5, 0.5).unwrap()
    }

    #[test]
    fn collar_profile_shape() {
        let prof = *collar().profile().unwrap();
        assert_eq!(prof.f(0.1), 1.0);
        assert_eq!(prof.df(0.25), 0.0);
        assert_eq!(prof.df(-0.25), 0.0);
        assert_eq!(prof.curvature(0.0), 0.0);
        assert!(prof.curvature(0.2501) < 0.0);
        assert_abs_diff_eq!(prof.curvature(5.0), -1.0, epsilon = 1e-12);
        // Finite-difference oracle for -f''/f far out.
        let (r, h) = (6.0, 1e-4);
        let fd = (prof.f(r + h) - 2.0 * prof.f(r) + prof.f(r - h)) / (h * h);
        assert_abs_diff_eq!(-fd / prof.f(r), -1.0, epsilon = 1e-3);
        // C² across the ramp ends.
        for r0 in [0.25, 0.75] {
            let e = 1e-9;
            assert_abs_diff_eq!(prof.ddf(r0 - e), prof.ddf(r0 + e), epsilon = 1e-6);
        }
    }

    #[test]
    fn curvature_sign_on_dense_grid() {
        let prof = *collar().profile().unwrap();
        for k in 0..10_000 {
            let r = -6.0 + 12.0 * k as f64 / 9_999.0;
            let kr = prof.curvature(r);
            assert!(kr <= 1e-12);
            if r.abs() <= 0.25 {
                assert_eq!(kr, 0.0);
            } else {
                assert!(kr < 0.0, "r = {r}");
            }
        }
    }

    #[test]
    fn degenerate_band_and_bad_parameters() {
        let m = build_collar(1.0, 0.0, 0.3).unwrap();
        let prof = m.profile().unwrap();
        assert_eq!(prof.curvature(0.0), 0.0);
        assert!(prof.curvature(1e-3) < 0.0);
        assert!(matches!(build_collar(0.0, 0.5, 0.5), Err(Error::InvalidProfile(_))));
        assert!(matches!(build_collar(1.0, -1.0, 0.5), Err(Error::InvalidProfile(_))));
        assert!(matches!(build_collar(1.0, 0.5, 0.0), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn constant_model_curvature() {
        let m = SurfaceModel::genus2();
        assert_eq!(curvature_at(&m, &ChartPoint::Plane(HPoint::I)), -1.0);
    }

    #[test]
    fn sasaki_basics() {
        let m = SurfaceModel::genus2();
        let a = UnitTangent::plane(HPoint::new(0.2, 1.3).unwrap(), 0.4);
        assert_eq!(sasaki_distance(&m, &a, &a).unwrap(), 0.0);
        let b = UnitTangent::plane(HPoint::new(0.2, 1.3).unwrap(), 0.4 + std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(sasaki_distance(&m, &a, &b).unwrap(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        let c = collar();
        let x = UnitTangent::collar(0.1, 0.3, 1.0);
        let y = UnitTangent::collar(0.1, 0.3, 1.0 + std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(sasaki_distance(&c, &x, &y).unwrap(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert!(sasaki_distance(&c, &x, &a).is_err());
    }

    #[test]
    fn transport_gap_is_isometry_invariant() {
        let (p, q) = (HPoint::new(0.3, 0.7).unwrap(), HPoint::new(-1.2, 2.5).unwrap());
        let gap = transported_angle_gap(p, 0.4, q, 2.1);
        let m = IsometryMatrix::translation_from_i(1.1, 0.8) * IsometryMatrix::rotation_about_i(0.3);
        let moved = transported_angle_gap(m.apply(p), m.push_angle(p, 0.4), m.apply(q), m.push_angle(q, 2.1));
        assert_abs_diff_eq!(gap, moved, epsilon = 1e-12);
        // Along a vertical geodesic the chart frame is parallel.
        let (u, v) = (HPoint::new(0.5, 1.0).unwrap(), HPoint::new(0.5, 3.0).unwrap());
        assert_abs_diff_eq!(transported_angle_gap(u, 0.2, v, 0.2), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn surface_distance_is_bounded_by_twice_circumradius() {
        let m = SurfaceModel::genus2();
        let g = m.group().unwrap();
        let p = IsometryMatrix::translation_from_i(0.2, 5.0).apply(HPoint::I);
        let q = IsometryMatrix::translation_from_i(2.9, 6.0).apply(HPoint::I);
        let d = surface_distance(g, p, q);
        assert!(d <= 2.0 * g.circumradius() + 1e-9);
        assert!(d <= hyperbolic_distance(p, q));
        // Brute-force oracle over the full neighbour list.
        let (p0, _) = g.reduce(p).unwrap();
        let (q0, _) = g.reduce(q).unwrap();
        let brute = g.neighbours().iter().map(|h| hyperbolic_distance(p0, h.apply(q0))).fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(d, brute, epsilon = 1e-12);
    }

    #[test]
    fn deck_translates_are_at_distance_zero() {
        let m = SurfaceModel::genus2();
        let g = m.group().unwrap();
        let a = UnitTangent::plane(HPoint::new(0.3, 0.8).unwrap(), 2.0);
        let w = "abC".parse().unwrap();
        let b = a.moved_by(&g.evaluate(&w)).unwrap();
        assert!(sasaki_distance(&m, &a, &b).unwrap() < 1e-9);
        assert!(lifted_sasaki(&m, &a, &b).unwrap() > 1.0);
    }

    #[test]
    fn spec_parsing() {
        let m = SurfaceModel::from_spec_str("kind = collar\nc = 1.5 # waist\nw = 0.5\ns = 0.25\n").unwrap();
        assert_eq!(*m.profile().unwrap(), CollarProfile { c: 1.5, w: 0.5, s: 0.25 });
        assert!(SurfaceModel::from_spec_str("kind = constant").unwrap().group().is_ok());
        assert!(SurfaceModel::from_spec_str("kind = torus").is_err());
        assert!(SurfaceModel::from_spec_str("c = 1").is_err());
        assert!(SurfaceModel::from_spec_str("kind = collar\nq = 2").is_err());
    }

    proptest! {
        #[test]
        fn sasaki_symmetric_constant(x1 in -1.0..1.0f64, y1 in 0.3..3.0f64, a1 in 0.0..6.28f64,
                                     x2 in -1.0..1.0f64, y2 in 0.3..3.0f64, a2 in 0.0..6.28f64) {
            let m = SurfaceModel::genus2();
            let u = UnitTangent::plane(HPoint::new(x1, y1).unwrap(), a1);
            let v = UnitTangent::plane(HPoint::new(x2, y2).unwrap(), a2);
            let d1 = sasaki_distance(&m, &u, &v).unwrap();
            let d2 = sasaki_distance(&m, &v, &u).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-9, "{} vs {}", d1, d2);
            prop_assert!(d1 <= plane_sasaki(&u, &v).unwrap() + 1e-12);
        }

        #[test]
        fn sasaki_symmetric_collar(r1 in -3.0..3.0f64, t1 in 0.0..6.28f64, a1 in 0.0..6.28f64,
                                   r2 in -3.0..3.0f64, t2 in 0.0..6.28f64, a2 in 0.0..6.28f64) {
            let m = build_collar(1.0, 0.5, 0.5).unwrap();
            let u = UnitTangent::collar(r1, t1, a1);
            let v = UnitTangent::collar(r2, t2, a2);
            let d1 = sasaki_distance(&m, &u, &v).unwrap();
            prop_assert!((d1 - sasaki_distance(&m, &v, &u).unwrap()).abs() < 1e-12);
            prop_assert!(d1 >= 0.0);
        }
    }
}
