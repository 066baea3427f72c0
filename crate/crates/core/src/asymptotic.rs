//! Busemann functions, ideal endpoints, (bi-)asymptoticity, heteroclinic
//! connectors and horocycles.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{geodesic_flow, trajectory};
use crate::hyperbolic::{geodesic_frame, hyperbolic_distance, BoundaryPoint, HPoint, IsometryMatrix};
use crate::matching::{best_shift, windowed_nearest};
use crate::ode::Dopri5;
use crate::surface::{lifted_base_distance, ChartPoint, CollarProfile, SurfaceModel, UnitTangent};

/// Endpoint comparisons on the constant model use this tolerance on the circle angle.
pub const ENDPOINT_TOL: f64 = 1e-9;
/// Escaping collar geodesics are followed until `|m(r)|` exceeds this.
const ESCAPE_DEPTH: f64 = 25.0;
const ESCAPE_TIME_CAP: f64 = 1e3;
/// Tangent circles this close outside the band edge are treated as band circles.
const BAND_SLACK: f64 = 1e-9;
/// Sampling step and matching window used by the collar asymptoticity test.
const MATCH_DT: f64 = 0.05;
/// Beyond this warp `f(r)`, integration error in `θ` is amplified into chart
/// distances comparable to the matching tolerances.
pub const TRUSTED_WARP: f64 = 1e4;
/// Matched-distance growth below this is integration noise.
const GROWTH_FLOOR: f64 = 1e-3;
const MATCH_WINDOW: f64 = 1.0;

/// How a collar geodesic ends (in forward time).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndLabel {
    /// `r → ±∞`.
    Escape(i8),
    /// A closed circle inside the flat band, traversed with the given orientation (sign of sin ψ).
    Band(i8),
    /// Spirals onto the band edge on `side`.
    Edge { side: i8, orientation: i8 },
}

impl EndLabel {
    /// Ends that stay at bounded distance from each other.
    pub fn compatible(&self, other: &EndLabel) -> bool {
        match (self, other) {
            (EndLabel::Escape(a), EndLabel::Escape(b)) => a == b,
            (EndLabel::Escape(_), _) | (_, EndLabel::Escape(_)) => false,
            (a, b) => a.orientation() == b.orientation(),
        }
    }

    fn orientation(&self) -> i8 {
        match self {
            EndLabel::Escape(_) => 0,
            EndLabel::Band(o) => *o,
            EndLabel::Edge { orientation, .. } => *orientation,
        }
    }
}

/// Asymptotic datum of a collar geodesic end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarEnd {
    pub label: EndLabel,
    /// Clairaut invariant `f(r) sin ψ`, conserved along the geodesic.
    pub momentum: f64,
    /// Limit of the (unwrapped) angular coordinate for escaping ends; `None`
    /// for trapped ends and for escapes too slow to resolve.
    pub theta_limit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IdealPoint {
    Boundary(BoundaryPoint),
    Collar(CollarEnd),
}

impl IdealPoint {
    pub fn approx_eq(&self, other: &IdealPoint, tol: f64) -> bool {
        match (self, other) {
            (IdealPoint::Boundary(a), IdealPoint::Boundary(b)) => a.approx_eq(*b, tol),
            (IdealPoint::Collar(a), IdealPoint::Collar(b)) => {
                a.label.compatible(&b.label)
                    && match (a.theta_limit, b.theta_limit) {
                        (Some(x), Some(y)) => (x - y).abs() <= tol.max(1e-6),
                        _ => true,
                    }
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusemannValue {
    pub value: f64,
    pub t_used: f64,
    /// `|value(T) - value(T/2)|`.
    pub error_bound: f64,
}

/// Three-valued outcome of the bi-asymptoticity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Biasymptotic {
    Yes { sup: f64 },
    No { sup: f64 },
    /// The sampled sup is within 10% of the bound.
    Indeterminate { sup: f64, bound: f64 },
}

impl Biasymptotic {
    pub fn is_yes(&self) -> bool {
        matches!(self, Biasymptotic::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Biasymptotic::No { .. })
    }
}

/// `b⁺(x) ≈ d(x, γ_θ(T)) - T` on the universal cover of the constant model.
pub fn busemann(model: &SurfaceModel, v: &UnitTangent, x: &ChartPoint, t: f64) -> Result<BusemannValue> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("T must be positive, got {t}")));
    }
    let SurfaceModel::ConstantNegative(_) = model else {
        return Err(Error::Unsupported("Busemann functions are only evaluated on the constant model"));
    };
    let ChartPoint::Plane(p) = *x else {
        return Err(Error::ModelMismatch { expected: "constant-curvature" });
    };
    let at = |s: f64| -> Result<f64> {
        let g = geodesic_flow(model, v, s, 1e-12)?.plane_point()?;
        Ok(hyperbolic_distance(p, g) - s)
    };
    let value = at(t)?;
    let half = at(0.5 * t)?;
    Ok(BusemannValue { value, t_used: t, error_bound: (value - half).abs() })
}

fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// End label and Clairaut invariant of the forward end of a collar geodesic.
fn end_label(prof: &CollarProfile, v: &UnitTangent, tol: f64) -> Result<(EndLabel, f64)> {
    let (r, _) = v.collar_coords()?;
    let (s, c) = v.angle.sin_cos();
    let momentum = prof.f(r) * s;
    let tangent = 1.0 - s.abs() <= 1e-12;
    let label = if r.abs() <= prof.half_width() + BAND_SLACK {
        if tangent {
            EndLabel::Band(sign(s))
        } else {
            EndLabel::Escape(sign(c))
        }
    } else {
        let side = sign(r);
        let outward = side as f64 * c > 0.0;
        if tangent || outward {
            EndLabel::Escape(side)
        } else {
            let gap = momentum.abs() - prof.c;
            let eps = prof.c * tol.max(1e-12);
            if gap > eps {
                EndLabel::Escape(side)
            } else if gap < -eps {
                EndLabel::Escape(-side)
            } else {
                EndLabel::Edge { side, orientation: sign(s) }
            }
        }
    };
    Ok((label, momentum))
}

/// Classifies the forward end of a collar geodesic from the Clairaut invariant.
pub fn collar_end(prof: &CollarProfile, v: &UnitTangent, tol: f64) -> Result<CollarEnd> {
    let (label, momentum) = end_label(prof, v, tol)?;
    let theta_limit = match label {
        EndLabel::Escape(side) => escape_angle(prof, v, side, tol)?,
        _ => None,
    };
    Ok(CollarEnd { label, momentum, theta_limit })
}

/// Follows an escaping geodesic until the warping is deep enough that the
/// remaining angular drift is negligible.
fn escape_angle(prof: &CollarProfile, v: &UnitTangent, side: i8, tol: f64) -> Result<Option<f64>> {
    let (r, theta) = v.collar_coords()?;
    let rhs = |_: f64, y: &[f64; 3]| {
        let (s, c) = y[2].sin_cos();
        [c, s / prof.f(y[0]), -prof.log_derivative(y[0]) * s]
    };
    let mut ode = Dopri5::new(rhs, 0.0, [r, theta, v.angle], tol.clamp(1e-13, 1e-8))?;
    let mut t = 0.0;
    loop {
        let y = *ode.state();
        if side as f64 * prof.m(y[0]) > ESCAPE_DEPTH && side as f64 * y[2].cos() > 0.0 {
            return Ok(Some(y[1]));
        }
        if t > ESCAPE_TIME_CAP {
            return Ok(None);
        }
        t += 1.0;
        ode.advance_to(t)?;
    }
}

/// Forward ideal endpoint.
pub fn forward_endpoint(model: &SurfaceModel, v: &UnitTangent, tol: f64) -> Result<IdealPoint> {
    model.check(v)?;
    match model {
        SurfaceModel::ConstantNegative(_) => {
            let m = IsometryMatrix::frame(v.plane_point()?, v.angle);
            Ok(IdealPoint::Boundary(m.apply_boundary(BoundaryPoint::Infinity)))
        }
        SurfaceModel::Collar(prof) => Ok(IdealPoint::Collar(collar_end(prof, v, tol)?)),
    }
}

/// Backward ideal endpoint: the forward endpoint of `-θ`.
pub fn backward_endpoint(model: &SurfaceModel, v: &UnitTangent, tol: f64) -> Result<IdealPoint> {
    forward_endpoint(model, &v.reversed(), tol)
}

pub fn are_forward_asymptotic(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent, tol: f64) -> Result<bool> {
    Ok(forward_endpoint(model, a, tol)?.approx_eq(&forward_endpoint(model, b, tol)?, ENDPOINT_TOL.max(tol)))
}

pub fn are_backward_asymptotic(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent, tol: f64) -> Result<bool> {
    are_forward_asymptotic(model, &a.reversed(), &b.reversed(), tol)
}

/// Samples the orbit of `v` at spacing `MATCH_DT` over `[-span, span]`.
pub(crate) fn sample_orbit(model: &SurfaceModel, v: &UnitTangent, span: f64, tol: f64) -> Result<Vec<(f64, UnitTangent)>> {
    let mut back = trajectory(model, v, -span, MATCH_DT, tol)?.samples;
    back.reverse();
    back.pop();
    back.extend(trajectory(model, v, span, MATCH_DT, tol)?.samples);
    Ok(back)
}

/// Matched distances between the orbits of `a` and `b` on the cover, for the
/// samples of `a` in `[-T, T]`, after aligning by the best time shift. On the
/// collar only samples with `f(r) <= TRUSTED_WARP` take part.
pub fn matched_profile(
    model: &SurfaceModel,
    a: &UnitTangent,
    b: &UnitTangent,
    t: f64,
    tol: f64,
    mut dist: impl FnMut(&UnitTangent, &UnitTangent) -> f64,
) -> Result<Vec<(f64, f64)>> {
    let mut sa = sample_orbit(model, a, t, tol)?;
    if let SurfaceModel::Collar(prof) = model {
        sa.retain(|(_, x)| x.collar_coords().map_or(false, |(r, _)| prof.f(r) <= TRUSTED_WARP));
    }
    let sb = sample_orbit(model, b, 1.5 * t + MATCH_WINDOW, tol)?;
    let shift = best_shift(&sa, &sb, 0.5 * t, &mut dist);
    let near = windowed_nearest(&sa, &sb, shift, MATCH_WINDOW, &mut dist);
    Ok(sa.iter().map(|s| s.0).zip(near).collect())
}

/// [`matched_profile`] with the base-point distance.
pub fn matched_distances(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent, t: f64, tol: f64) -> Result<Vec<(f64, f64)>> {
    matched_profile(model, a, b, t, tol, |x, y| lifted_base_distance(model, x, y).unwrap_or(f64::INFINITY))
}

/// Bi-asymptoticity on the universal cover. Exact on the constant model; on
/// the collar the end labels rule out incompatible pairs, then the sampled
/// matched distance over `[-T, T]` must stay below `c` without growing over
/// the three outermost dyadic time windows.
pub fn are_biasymptotic(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent, t: f64, c: f64) -> Result<Biasymptotic> {
    let tol = 1e-10;
    if !(t > 0.0 && c > 0.0) {
        return Err(Error::InvalidInput(format!("need T > 0 and C > 0, got T = {t}, C = {c}")));
    }
    model.check(a)?;
    model.check(b)?;
    if let SurfaceModel::ConstantNegative(_) = model {
        let same = are_forward_asymptotic(model, a, b, tol)? && are_backward_asymptotic(model, a, b, tol)?;
        let sup = if same { 0.0 } else { f64::INFINITY };
        return Ok(if same { Biasymptotic::Yes { sup } } else { Biasymptotic::No { sup } });
    }
    let prof = model.profile()?;
    let labels = |v: &UnitTangent| -> Result<(EndLabel, EndLabel)> { Ok((end_label(prof, v, tol)?.0, end_label(prof, &v.reversed(), tol)?.0)) };
    let ((fa, ba), (fb, bb)) = (labels(a)?, labels(b)?);
    if !fa.compatible(&fb) || !ba.compatible(&bb) {
        return Ok(Biasymptotic::No { sup: f64::INFINITY });
    }
    let ends_match = forward_endpoint(model, a, tol)?.approx_eq(&forward_endpoint(model, b, tol)?, 1e-6)
        && backward_endpoint(model, a, tol)?.approx_eq(&backward_endpoint(model, b, tol)?, 1e-6);
    if !ends_match {
        return Ok(Biasymptotic::No { sup: f64::INFINITY });
    }
    let profile = matched_distances(model, a, b, t, tol)?;
    let sup = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    let window_sup = |lo: f64, hi: f64| {
        profile.iter().filter(|p| p.0.abs() >= lo && p.0.abs() <= hi).map(|p| p.1).fold(0.0, f64::max)
    };
    let (w0, w1, w2) = (window_sup(t / 8.0, t / 4.0), window_sup(t / 4.0, t / 2.0), window_sup(t / 2.0, t));
    let slack = GROWTH_FLOOR + 0.01 * w0.max(w1);
    let growing = w1 > w0 + slack || w2 > w1 + slack;
    Ok(if (sup - c).abs() <= 0.1 * c {
        Biasymptotic::Indeterminate { sup, bound: c }
    } else if sup < c && !growing {
        Biasymptotic::Yes { sup }
    } else {
        Biasymptotic::No { sup }
    })
}

/// Unit tangent of the geodesic from the backward endpoint of `a` to the
/// forward endpoint of `b`, at the point closest to the base of `a`.
pub fn heteroclinic_connector(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent) -> Result<UnitTangent> {
    model.group()?;
    let IdealPoint::Boundary(from) = backward_endpoint(model, a, 1e-12)? else { unreachable!() };
    let IdealPoint::Boundary(to) = forward_endpoint(model, b, 1e-12)? else { unreachable!() };
    if from.approx_eq(to, ENDPOINT_TOL) {
        return Err(Error::NoConnector);
    }
    let frame = geodesic_frame(from, to)?;
    let p = frame.inverse().apply(a.plane_point()?);
    let foot = HPoint { x: 0.0, y: p.x.hypot(p.y) };
    Ok(UnitTangent::plane(frame.apply(foot), frame.push_angle(foot, FRAC_PI_2)))
}

/// `n` vectors on the stable horocycle through `θ`, centred on `θ` and spaced
/// by arc length `arc / n`.
pub fn horocycle_sample(model: &SurfaceModel, v: &UnitTangent, arc: f64, n: usize) -> Result<Vec<UnitTangent>> {
    model.group()?;
    if n == 0 {
        return Err(Error::InvalidInput("horocycle sample needs n >= 1".into()));
    }
    let m = IsometryMatrix::frame(v.plane_point()?, v.angle);
    Ok((0..n)
        .map(|k| {
            let q = HPoint { x: (k as f64 - 0.5 * (n as f64 - 1.0)) * arc / n as f64, y: 1.0 };
            UnitTangent::plane(m.apply(q), m.push_angle(q, FRAC_PI_2))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::build_collar;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn up(x: f64, y: f64) -> UnitTangent {
        UnitTangent::plane(HPoint::new(x, y).unwrap(), FRAC_PI_2)
    }

    fn pt(x: f64, y: f64) -> ChartPoint {
        ChartPoint::Plane(HPoint::new(x, y).unwrap())
    }

    #[test]
    fn busemann_closed_forms() {
        let m = SurfaceModel::genus2();
        let v = up(0.0, 1.0);
        assert_abs_diff_eq!(busemann(&m, &v, &pt(0.0, 1f64.exp()), 3.0).unwrap().value, -1.0, epsilon = 1e-12);
        assert!(busemann(&m, &v, &pt(0.0, 1.0), 20.0).unwrap().value.abs() < 1e-12);
        for y in [0.3, 1.7, 4.0] {
            let b = busemann(&m, &v, &pt(0.0, y), 20.0).unwrap();
            assert_abs_diff_eq!(b.value, -y.ln(), epsilon = 1e-6);
        }
        // Horocycles about ∞ are horizontal: b(x + iy) = -log y.
        let a = busemann(&m, &v, &pt(1.0, 1.0), 20.0).unwrap();
        let b = busemann(&m, &v, &pt(1.0, 1.0), 40.0).unwrap();
        assert!((a.value - b.value).abs() < 1e-8);
        assert!(b.error_bound < a.error_bound);
        assert!(matches!(
            busemann(&build_collar(1.0, 0.5, 0.5).unwrap(), &UnitTangent::collar(0.0, 0.0, 0.0), &ChartPoint::Collar { r: 0.0, theta: 0.0 }, 5.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn busemann_gradient_and_cocycle() {
        let m = SurfaceModel::genus2();
        let v = UnitTangent::plane(HPoint::new(0.4, 0.8).unwrap(), 2.2);
        let b = |x: f64, y: f64| busemann(&m, &v, &pt(x, y), 25.0).unwrap().value;
        let (x, y, h) = (-0.3, 1.4, 1e-5);
        let gx = (b(x + h, y) - b(x - h, y)) / (2.0 * h);
        let gy = (b(x, y + h) - b(x, y - h)) / (2.0 * h);
        assert_abs_diff_eq!(y * gx.hypot(gy), 1.0, epsilon = 1e-4);
        for t in [0.5, 2.0, 5.0] {
            let p = geodesic_flow(&m, &v, t, 1e-12).unwrap().base;
            assert_abs_diff_eq!(busemann(&m, &v, &p, 30.0).unwrap().value, -t, epsilon = 1e-6);
        }
    }

    #[test]
    fn horospheres_are_equidistant() {
        let m = SurfaceModel::genus2();
        let v = up(0.0, 1.0);
        let horo = horocycle_sample(&m, &v, 8.0, 4001).unwrap();
        for t in [0.5, 1.5] {
            let p = HPoint::new(0.7, (t as f64).exp()).unwrap();
            let d = horo.iter().map(|h| hyperbolic_distance(p, h.plane_point().unwrap())).fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(d, t, epsilon = 1e-4);
        }
    }

    #[test]
    fn endpoints_of_vertical_vectors() {
        let m = SurfaceModel::genus2();
        let v = up(0.0, 1.0);
        assert_eq!(forward_endpoint(&m, &v, 1e-12).unwrap(), IdealPoint::Boundary(BoundaryPoint::Infinity));
        let IdealPoint::Boundary(BoundaryPoint::Finite(x)) = forward_endpoint(&m, &v.reversed(), 1e-12).unwrap() else {
            panic!()
        };
        assert!(x.abs() < 1e-12);
    }

    #[test]
    fn connector_examples() {
        let m = SurfaceModel::genus2();
        let theta = up(0.0, 1.0);
        // Geodesic from -1 to 1 through i, pointing right.
        let eta = UnitTangent::plane(HPoint::I, 0.0);
        let c = heteroclinic_connector(&m, &theta, &eta).unwrap();
        let p = c.plane_point().unwrap();
        assert_abs_diff_eq!((p.x - 0.5).hypot(p.y), 0.5, epsilon = 1e-12);
        assert!(are_forward_asymptotic(&m, &c, &eta, 1e-12).unwrap());
        assert!(are_backward_asymptotic(&m, &c, &theta, 1e-12).unwrap());
        let same = heteroclinic_connector(&m, &theta, &theta).unwrap();
        assert!(are_biasymptotic(&m, &same, &theta, 10.0, 1.0).unwrap().is_yes());
        assert!(matches!(heteroclinic_connector(&m, &theta, &theta.reversed()), Err(Error::NoConnector)));
    }

    #[test]
    fn horocycle_examples() {
        let m = SurfaceModel::genus2();
        let v = up(0.0, 1.0);
        assert_eq!(horocycle_sample(&m, &v, 0.0, 1).unwrap(), vec![v]);
        let hs = horocycle_sample(&m, &v, 0.6, 2).unwrap();
        let p = hs[1].plane_point().unwrap();
        assert_abs_diff_eq!(p.x, 0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hs[1].angle, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn collar_band_circles_are_biasymptotic() {
        let m = build_collar(1.0, 0.5, 0.5).unwrap();
        let a = UnitTangent::collar(0.0, 0.0, FRAC_PI_2);
        let b = UnitTangent::collar(0.1, 0.0, FRAC_PI_2);
        match are_biasymptotic(&m, &a, &b, 20.0, 1.0).unwrap() {
            Biasymptotic::Yes { sup } => assert_abs_diff_eq!(sup, 0.1, epsilon = 1e-6),
            other => panic!("{other:?}"),
        }
        let shifted = geodesic_flow(&m, &a, 2.5, 1e-10).unwrap();
        assert!(are_biasymptotic(&m, &a, &shifted, 20.0, 1.0).unwrap().is_yes());
        // Just outside the band the tangent geodesic turns away on both ends.
        let out = UnitTangent::collar(0.26, 0.0, FRAC_PI_2);
        assert!(are_biasymptotic(&m, &a, &out, 20.0, 1.0).unwrap().is_no());
        let across = UnitTangent::collar(0.0, 0.0, 0.4);
        assert!(are_biasymptotic(&m, &a, &across, 20.0, 1.0).unwrap().is_no());
    }

    #[test]
    fn collar_end_labels() {
        let m = build_collar(1.0, 0.5, 0.5).unwrap();
        let prof = *m.profile().unwrap();
        let end = |r: f64, psi: f64| collar_end(&prof, &UnitTangent::collar(r, 0.0, psi), 1e-10).unwrap();
        assert_eq!(end(0.1, FRAC_PI_2).label, EndLabel::Band(1));
        assert_eq!(end(0.1, -FRAC_PI_2).label, EndLabel::Band(-1));
        assert_eq!(end(0.1, 0.3).label, EndLabel::Escape(1));
        assert_eq!(end(0.1, 2.9).label, EndLabel::Escape(-1));
        assert_eq!(end(-1.0, FRAC_PI_2).label, EndLabel::Escape(-1));
        // Heading inwards with momentum exactly c: spirals onto the edge.
        let r = 1.0;
        let psi = std::f64::consts::PI - (prof.c / prof.f(r)).asin();
        assert_eq!(end(r, psi).label, EndLabel::Edge { side: 1, orientation: 1 });
        assert!(end(0.1, 0.3).theta_limit.is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn endpoints_are_flow_invariant(x in -2.0..2.0f64, y in 0.2..3.0f64, a in 0.0..6.28f64) {
            let m = SurfaceModel::genus2();
            let v = UnitTangent::plane(HPoint::new(x, y).unwrap(), a);
            let w = geodesic_flow(&m, &v, 5.0, 1e-12).unwrap();
            prop_assert!(forward_endpoint(&m, &v, 1e-12).unwrap().approx_eq(&forward_endpoint(&m, &w, 1e-12).unwrap(), 1e-9));
            prop_assert!(backward_endpoint(&m, &v, 1e-12).unwrap().approx_eq(&backward_endpoint(&m, &w, 1e-12).unwrap(), 1e-9));
        }

        #[test]
        fn connector_is_heteroclinic(x1 in -1.0..1.0f64, y1 in 0.3..2.0f64, a1 in 0.0..6.28f64,
                                     x2 in -1.0..1.0f64, y2 in 0.3..2.0f64, a2 in 0.0..6.28f64) {
            let m = SurfaceModel::genus2();
            let th = UnitTangent::plane(HPoint::new(x1, y1).unwrap(), a1);
            let et = UnitTangent::plane(HPoint::new(x2, y2).unwrap(), a2);
            if let Ok(c) = heteroclinic_connector(&m, &th, &et) {
                prop_assert!(are_forward_asymptotic(&m, &c, &et, 1e-12).unwrap());
                prop_assert!(are_backward_asymptotic(&m, &c, &th, 1e-12).unwrap());
            }
        }

        #[test]
        fn horocycle_samples_are_stable(x in -1.0..1.0f64, y in 0.3..2.0f64, a in 0.0..6.28f64) {
            let m = SurfaceModel::genus2();
            let v = UnitTangent::plane(HPoint::new(x, y).unwrap(), a);
            for h in horocycle_sample(&m, &v, 1.0, 5).unwrap() {
                prop_assert!(busemann(&m, &v, &h.base, 30.0).unwrap().value.abs() < 1e-8);
                prop_assert!(are_forward_asymptotic(&m, &h, &v, 1e-12).unwrap());
                let mut last = f64::INFINITY;
                for k in 0..=10 {
                    let t = k as f64;
                    let d = hyperbolic_distance(
                        geodesic_flow(&m, &h, t, 1e-12).unwrap().plane_point().unwrap(),
                        geodesic_flow(&m, &v, t, 1e-12).unwrap().plane_point().unwrap(),
                    );
                    prop_assert!(d <= last + 1e-7);
                    last = d;
                }
            }
        }
    }
}
