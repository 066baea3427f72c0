//! Pseudo-orbits, shadowing on the constant model, closing periodic chains,
//! and periodic-orbit tables.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotic::heteroclinic_connector;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::flow::{geodesic_flow, trajectory, Trajectory};
use crate::hyperbolic::{enumerate_conjugacy_classes, wrap_angle, GroupWord, HPoint, IsometryMatrix};
use crate::matching::minmax_match;
use crate::sampling::{random_direction, random_tangent, sasaki_offset};
use crate::surface::{lifted_sasaki, nearest_lift, plane_sasaki, sasaki_distance, SurfaceModel, UnitTangent};

const FLOW_TOL: f64 = 1e-12;
/// Sampling step along broken paths.
const PATH_DT: f64 = 0.02;
/// First and last segments shorter than this do not pin down ideal endpoints.
pub const MIN_ENDPOINT_SEGMENT: f64 = 1.0;
const MAX_SHOOTING_ITERATIONS: usize = 100;
const SHOOTING_RESIDUAL: f64 = 1e-11;

/// A finite `δ`-pseudo-orbit: `d(φ_{τ_k} x_k, x_{k+1}) < δ`, `τ_k >= a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoOrbit {
    pub points: Vec<UnitTangent>,
    pub times: Vec<f64>,
    /// Measured Sasaki jump at each joint (including the closing joint when periodic).
    pub jumps: Vec<f64>,
    /// Largest measured jump.
    pub delta: f64,
    pub min_time: f64,
    pub periodic: bool,
}

impl PseudoOrbit {
    pub fn total_time(&self) -> f64 {
        self.times.iter().sum()
    }
}

/// Validates a chain of segments `(x_k, τ_k)`; every jump must be below `delta_target`.
pub fn make_pseudo_orbit(
    model: &SurfaceModel,
    segments: &[(UnitTangent, f64)],
    delta_target: f64,
    min_time: f64,
    periodic: bool,
) -> Result<PseudoOrbit> {
    if segments.is_empty() {
        return Err(Error::InvalidInput("pseudo-orbit needs at least one segment".into()));
    }
    if let Some((k, (_, tau))) = segments.iter().enumerate().find(|(_, s)| !(s.1 >= min_time)) {
        return Err(Error::InvalidInput(format!("segment {k} has duration {tau} < {min_time}")));
    }
    let n = segments.len();
    let joints = if periodic { n } else { n - 1 };
    let mut jumps = Vec::with_capacity(joints);
    for k in 0..joints {
        let (x, tau) = segments[k];
        let next = segments[(k + 1) % n].0;
        let jump = sasaki_distance(model, &geodesic_flow(model, &x, tau, FLOW_TOL)?, &next)?;
        if !(jump < delta_target) {
            return Err(Error::PseudoOrbitJump { index: k, jump, target: delta_target });
        }
        jumps.push(jump);
    }
    Ok(PseudoOrbit {
        points: segments.iter().map(|s| s.0).collect(),
        times: segments.iter().map(|s| s.1).collect(),
        delta: jumps.iter().copied().fold(0.0, f64::max),
        jumps,
        min_time,
        periodic,
    })
}

/// A reusable random chain shape: start, durations and unit jump directions.
/// Scaling the jumps by `δ` gives a family of pseudo-orbits with the same skeleton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub start: UnitTangent,
    pub durations: Vec<f64>,
    pub directions: Vec<[f64; 3]>,
}

impl Skeleton {
    /// `n` segments with durations uniform in `[a, 2a]`.
    pub fn random<R: Rng + ?Sized>(model: &SurfaceModel, n: usize, a: f64, rng: &mut R) -> Result<Self> {
        let start = random_tangent(model, rng)?;
        let durations = (0..n).map(|_| rng.gen_range(a..=2.0 * a)).collect();
        let directions = (0..n.saturating_sub(1)).map(|_| random_direction(rng)).collect();
        Ok(Self { start, durations, directions })
    }

    /// Pseudo-orbit whose joints jump by `jump` along the skeleton directions.
    pub fn segments(&self, model: &SurfaceModel, jump: f64) -> Result<Vec<(UnitTangent, f64)>> {
        let mut out = Vec::with_capacity(self.durations.len());
        let mut x = self.start;
        for (k, &tau) in self.durations.iter().enumerate() {
            out.push((x, tau));
            if let Some(dir) = self.directions.get(k) {
                x = sasaki_offset(model, &geodesic_flow(model, &x, tau, FLOW_TOL)?, *dir, jump)?;
            }
        }
        Ok(out)
    }
}

/// One row of a tracing table: path time `t`, orbit time `α(t)` and the distance there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub t: f64,
    pub alpha: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowingResult {
    pub orbit: UnitTangent,
    pub epsilon: f64,
    /// `sup |α(t) - t|`.
    pub reparam_dev: f64,
    pub matched: Vec<MatchRow>,
}

/// Lifts a chain to the cover so that consecutive segments join up.
fn lift_chain(model: &SurfaceModel, po: &PseudoOrbit) -> Result<Vec<UnitTangent>> {
    let mut lifted = vec![po.points[0]];
    for k in 1..po.points.len() {
        let end = geodesic_flow(model, &lifted[k - 1], po.times[k - 1], FLOW_TOL)?;
        lifted.push(lift_near(model, &end, &po.points[k])?.0);
    }
    Ok(lifted)
}

/// Lift of `v` nearest `anchor` and, on the constant model, the deck element used.
fn lift_near(model: &SurfaceModel, anchor: &UnitTangent, v: &UnitTangent) -> Result<(UnitTangent, IsometryMatrix)> {
    match model {
        SurfaceModel::ConstantNegative(group) => nearest_lift(group, anchor, v),
        SurfaceModel::Collar(_) => {
            let (_, ta) = anchor.collar_coords()?;
            let (r, tv) = v.collar_coords()?;
            let turns = ((ta - tv) / TAU).round();
            Ok((UnitTangent::collar(r, tv + turns * TAU, v.angle), IsometryMatrix::IDENTITY))
        }
    }
}

/// Samples the broken path of a lifted chain at spacing about `PATH_DT`.
fn broken_path(model: &SurfaceModel, chain: &[UnitTangent], times: &[f64], budget: &mut Budget) -> Result<Vec<(f64, UnitTangent)>> {
    let mut out = Vec::new();
    let mut start = 0.0;
    for (k, (x, &tau)) in chain.iter().zip(times).enumerate() {
        let n = (tau / PATH_DT).ceil().max(1.0) as usize;
        let last = k + 1 == chain.len();
        let traj = trajectory(model, x, tau, tau / n as f64, FLOW_TOL)?;
        for (j, (s, v)) in traj.samples.into_iter().enumerate() {
            if j == n && !last {
                break;
            }
            if !budget.spend() {
                return Err(Error::BudgetExhausted(format!("broken path sampling stopped at t = {}", start + s)));
            }
            out.push((start + s, v));
        }
        start += tau;
    }
    Ok(out)
}

/// Traces `path` by the orbit of `y` on the plane; `frame` maps the geodesic
/// `0 → ∞` onto the orbit of `y`. For each path sample the orbit time `α`
/// minimises `max(d, |α - t|)`, found by ternary search between the orthogonal
/// projection time and `t`.
fn trace_on_plane(frame: &IsometryMatrix, y: &UnitTangent, path: &[(f64, UnitTangent)]) -> Result<ShadowingResult> {
    let inv = frame.inverse();
    let s0 = inv.apply(y.plane_point()?).to_complex().norm().ln();
    let orbit_at = |s: f64| {
        let q = HPoint { x: 0.0, y: (s0 + s).exp() };
        UnitTangent::plane(frame.apply(q), frame.push_angle(q, FRAC_PI_2))
    };
    let mut rows = Vec::with_capacity(path.len());
    for (t, v) in path {
        let p = inv.apply(v.plane_point()?).to_complex().norm().ln() - s0;
        let d = |s: f64| plane_sasaki(v, &orbit_at(s)).unwrap_or(f64::INFINITY);
        let cost = |s: f64| d(s).max((s - t).abs());
        let (mut lo, mut hi) = if p <= *t { (p, *t) } else { (*t, p) };
        for _ in 0..100 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if cost(m1) <= cost(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let mut alpha = 0.5 * (lo + hi);
        // At the crossing of the two terms keep |α - t| <= d; moving α towards
        // t (away from the projection) only increases d.
        let gap = d(alpha);
        if (alpha - t).abs() > gap {
            alpha = t + (alpha - t).signum() * gap;
        }
        rows.push(MatchRow { t: *t, alpha, distance: d(alpha) });
    }
    Ok(summarize(*y, rows))
}

/// `ε` is the smallest radius certified by the traced reparametrization: it
/// bounds both the distances and `|α(t) - t|`.
fn summarize(orbit: UnitTangent, matched: Vec<MatchRow>) -> ShadowingResult {
    let reparam_dev = matched.iter().map(|r| (r.alpha - r.t).abs()).fold(0.0, f64::max);
    let epsilon = matched.iter().map(|r| r.distance).fold(reparam_dev, f64::max);
    ShadowingResult { orbit, epsilon, reparam_dev, matched }
}

/// Morse-style shadowing on the constant model: the tracing orbit joins the
/// backward endpoint of the first segment to the forward endpoint of the last.
pub fn shadow_search(model: &SurfaceModel, po: &PseudoOrbit, budget: &mut Budget) -> Result<ShadowingResult> {
    if !matches!(model, SurfaceModel::ConstantNegative(_)) {
        return Err(Error::Unsupported("shadowing search runs on the constant model"));
    }
    if po.periodic {
        return Err(Error::InvalidInput("periodic chains are closed with close_periodic".into()));
    }
    let (first, last) = (po.times[0], po.times[po.times.len() - 1]);
    if first < MIN_ENDPOINT_SEGMENT || last < MIN_ENDPOINT_SEGMENT {
        return Err(Error::EndpointUnstable);
    }
    let chain = lift_chain(model, po)?;
    let y = heteroclinic_connector(model, &chain[0], &chain[chain.len() - 1]).map_err(|e| match e {
        Error::NoConnector => Error::EndpointUnstable,
        other => other,
    })?;
    let frame = IsometryMatrix::frame(y.plane_point()?, y.angle);
    let path = broken_path(model, &chain, &po.times, budget)?;
    trace_on_plane(&frame, &y, &path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OrbitSource {
    Word(GroupWord),
    Shooting { seed: UnitTangent, iterations: usize },
}

/// How well a closed orbit follows the chain it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosingCheck {
    /// `Σ τ_k`.
    pub chain_time: f64,
    /// `|period - Σ τ_k|`.
    pub period_gap: f64,
    pub epsilon: f64,
    pub reparam_dev: f64,
    pub segments: usize,
}

impl ClosingCheck {
    /// `|τ - (t_{k+1} - t_0)| <= (k + 1) ε`.
    pub fn period_bound_holds(&self) -> bool {
        self.period_gap <= (self.segments as f64 + 1.0) * self.epsilon.max(f64::EPSILON)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicOrbitRecord {
    pub source: OrbitSource,
    pub period: f64,
    pub initial: UnitTangent,
    pub samples: Trajectory,
    pub primitive: bool,
    /// `d(φ_ℓ θ, θ)` on the surface.
    pub return_error: f64,
    pub closing: Option<ClosingCheck>,
}

fn record(model: &SurfaceModel, source: OrbitSource, period: f64, initial: UnitTangent, primitive: bool) -> Result<PeriodicOrbitRecord> {
    let samples = trajectory(model, &initial, period, period / 200.0, FLOW_TOL)?;
    let end = *samples.end().expect("trajectory has samples");
    let return_error = sasaki_distance(model, &end, &initial)?;
    Ok(PeriodicOrbitRecord { source, period, initial, samples, primitive, return_error, closing: None })
}

/// Unit tangent on the axis of `g` nearest to `near`, pointing towards the attracting end.
fn axis_tangent(g: &IsometryMatrix, near: HPoint) -> Result<(UnitTangent, IsometryMatrix)> {
    let (rep, att) = g.axis_endpoints()?;
    let frame = crate::hyperbolic::geodesic_frame(rep, att)?;
    let p = frame.inverse().apply(near);
    let foot = HPoint { x: 0.0, y: p.x.hypot(p.y) };
    let v = UnitTangent::plane(frame.apply(foot), frame.push_angle(foot, FRAC_PI_2));
    Ok((v, frame))
}

/// Closes a periodic pseudo-orbit. On the constant model the deck element
/// accumulated along the lifted chain is hyperbolic and its axis is the closed
/// orbit. On the collar a damped least-squares shooting on `(r, ψ, ℓ)` from the
/// first point (fixed `θ`) finds a closed geodesic with the chain's winding.
pub fn close_periodic(model: &SurfaceModel, po: &PseudoOrbit, budget: &mut Budget) -> Result<PeriodicOrbitRecord> {
    if !po.periodic {
        return Err(Error::InvalidInput("close_periodic needs a periodic pseudo-orbit".into()));
    }
    let chain = lift_chain(model, po)?;
    let end = geodesic_flow(model, &chain[chain.len() - 1], po.times[po.times.len() - 1], FLOW_TOL)?;
    let mut rec = match model {
        SurfaceModel::ConstantNegative(group) => {
            let (_, g) = lift_near(model, &end, &chain[0])?;
            let tr = g.trace().abs();
            if tr <= 2.0 + 1e-9 {
                return Err(Error::ClosingFailed { residual: tr - 2.0 });
            }
            let (v, _) = axis_tangent(&g, chain[0].plane_point()?)?;
            let (z, word) = group.reduce(g.apply(HPoint::I))?;
            if crate::hyperbolic::hyperbolic_distance(z, HPoint::I) > 1e-6 {
                return Err(Error::ClosingFailed { residual: crate::hyperbolic::hyperbolic_distance(z, HPoint::I) });
            }
            let word = word.cyclically_reduced();
            let primitive = word.is_primitive();
            record(model, OrbitSource::Word(word), g.translation_length()?, v, primitive)?
        }
        SurfaceModel::Collar(_) => {
            let (_, t0) = chain[0].collar_coords()?;
            let (_, t1) = end.collar_coords()?;
            let turns = ((t1 - t0) / TAU).round();
            let (v, period, iterations) = shoot_closed(model, &chain[0], po.total_time(), turns, budget)?;
            record(model, OrbitSource::Shooting { seed: chain[0], iterations }, period, v, true)?
        }
    };
    // Specification-style closeness over one pass of the chain.
    let path = broken_path(model, &chain, &po.times, budget)?;
    let traced = match model {
        SurfaceModel::ConstantNegative(_) => {
            let frame = IsometryMatrix::frame(rec.initial.plane_point()?, rec.initial.angle);
            trace_on_plane(&frame, &rec.initial, &path)?
        }
        SurfaceModel::Collar(_) => {
            let span = po.total_time() + 2.0;
            let mut orbit = trajectory(model, &rec.initial, -2.0, PATH_DT, FLOW_TOL)?.samples;
            orbit.reverse();
            orbit.pop();
            orbit.extend(trajectory(model, &rec.initial, span, PATH_DT, FLOW_TOL)?.samples);
            let m = minmax_match(&path, &orbit, 1.0, |a, b| lifted_sasaki(model, a, b).unwrap_or(f64::INFINITY));
            let rows = path.iter().zip(m).map(|((t, _), (d, s))| MatchRow { t: *t, alpha: s, distance: d }).collect();
            summarize(rec.initial, rows)
        }
    };
    let chain_time = po.total_time();
    rec.closing = Some(ClosingCheck {
        chain_time,
        period_gap: (rec.period - chain_time).abs(),
        epsilon: traced.epsilon,
        reparam_dev: traced.reparam_dev,
        segments: po.points.len(),
    });
    Ok(rec)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Levenberg–Marquardt on the return map residual of a collar geodesic.
fn shoot_closed(model: &SurfaceModel, seed: &UnitTangent, period0: f64, turns: f64, budget: &mut Budget) -> Result<(UnitTangent, f64, usize)> {
    let (r0, theta0) = seed.collar_coords()?;
    let residual = |x: &[f64; 3]| -> Result<[f64; 3]> {
        let v = UnitTangent::collar(x[0], theta0, x[1]);
        let w = geodesic_flow(model, &v, x[2], FLOW_TOL)?;
        let (r, th) = w.collar_coords()?;
        Ok([r - x[0], th - theta0 - turns * TAU, wrap_angle(w.angle - x[1])])
    };
    let norm = |r: &[f64; 3]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = [r0, seed.angle, period0];
    let mut res = residual(&x)?;
    let mut mu = 1e-3;
    let mut iterations = 0;
    while norm(&res) > SHOOTING_RESIDUAL {
        if iterations >= MAX_SHOOTING_ITERATIONS || !budget.spend() {
            return Err(Error::ClosingFailed { residual: norm(&res) });
        }
        iterations += 1;
        let h = 1e-7;
        let mut jac = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut xp = x;
            xp[j] += h;
            let rp = residual(&xp)?;
            for i in 0..3 {
                jac[i][j] = (rp[i] - res[i]) / h;
            }
        }
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                jtj[i][j] = (0..3).map(|k| jac[k][i] * jac[k][j]).sum();
            }
            jtr[i] = -(0..3).map(|k| jac[k][i] * res[k]).sum::<f64>();
        }
        loop {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += mu * (jtj[i][i] + 1.0);
            }
            let step = solve3(damped, jtr).ok_or(Error::ClosingFailed { residual: norm(&res) })?;
            let trial = [x[0] + step[0], x[1] + step[1], x[2] + step[2]];
            let r_trial = if trial[2] > 0.0 { residual(&trial).ok() } else { None };
            match r_trial {
                Some(rt) if norm(&rt) < norm(&res) => {
                    x = trial;
                    res = rt;
                    mu = (mu / 3.0).max(1e-12);
                    break;
                }
                _ => {
                    mu *= 4.0;
                    if mu > 1e12 {
                        return Err(Error::ClosingFailed { residual: norm(&res) });
                    }
                }
            }
        }
    }
    Ok((UnitTangent::collar(x[0], theta0, x[1]), x[2], iterations))
}

/// Closed geodesics of length at most `t`, sorted by (period, word).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicTable {
    pub records: Vec<PeriodicOrbitRecord>,
    pub requested: f64,
    pub certified: f64,
    pub complete: bool,
}

impl PeriodicTable {
    /// CSV with header `word,period,x,y,angle,primitive`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,period,x,y,angle,primitive\n");
        for r in &self.records {
            let word = match &r.source {
                OrbitSource::Word(w) => w.to_string(),
                OrbitSource::Shooting { .. } => String::new(),
            };
            let (x, y) = match r.initial.base {
                crate::surface::ChartPoint::Plane(p) => (p.x, p.y),
                crate::surface::ChartPoint::Collar { r, theta } => (r, theta),
            };
            let _ = writeln!(out, "{word},{},{x},{y},{},{}", r.period, r.initial.angle, r.primitive);
        }
        out
    }

    pub fn count_up_to(&self, t: f64) -> usize {
        self.records.iter().filter(|r| r.period <= t).count()
    }
}

/// Primitive closed geodesics of the genus-two surface up to length `t`.
pub fn enumerate_periodic_orbits(model: &SurfaceModel, t: f64) -> Result<PeriodicTable> {
    let group = model.group()?;
    let enumeration = enumerate_conjugacy_classes(group, t)?;
    let mut records = enumeration
        .classes
        .iter()
        .map(|c| {
            let (v, _) = axis_tangent(&c.element, HPoint::I)?;
            record(model, OrbitSource::Word(c.word.clone()), c.length, v, c.word.is_primitive())
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| {
        a.period.total_cmp(&b.period).then_with(|| match (&a.source, &b.source) {
            (OrbitSource::Word(x), OrbitSource::Word(y)) => x.cmp(y),
            _ => std::cmp::Ordering::Equal,
        })
    });
    Ok(PeriodicTable { records, requested: t, certified: enumeration.certified, complete: enumeration.is_complete() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::Letter;
    use crate::surface::build_collar;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn split_orbit(model: &SurfaceModel, v: &UnitTangent, times: &[f64]) -> Vec<(UnitTangent, f64)> {
        let mut x = *v;
        times
            .iter()
            .map(|&tau| {
                let seg = (x, tau);
                x = geodesic_flow(model, &x, tau, FLOW_TOL).unwrap();
                seg
            })
            .collect()
    }

    #[test]
    fn pseudo_orbit_construction() {
        let m = SurfaceModel::genus2();
        let v = UnitTangent::plane(HPoint::new(0.1, 1.2).unwrap(), 0.4);
        let po = make_pseudo_orbit(&m, &split_orbit(&m, &v, &[2.0, 3.0, 2.5]), 1e-6, 1.0, false).unwrap();
        assert!(po.delta < 1e-9);
        let mut segs = split_orbit(&m, &v, &[3.0, 3.0]);
        segs[1].0 = sasaki_offset(&m, &segs[1].0, [1.0, 0.0, 0.0], 0.05).unwrap();
        let po = make_pseudo_orbit(&m, &segs, 0.1, 1.0, false).unwrap();
        assert_abs_diff_eq!(po.delta, 0.05, epsilon = 1e-9);
        assert!(matches!(make_pseudo_orbit(&m, &segs, 0.04, 1.0, false), Err(Error::PseudoOrbitJump { index: 0, .. })));
        assert!(make_pseudo_orbit(&m, &segs, 0.1, 5.0, false).is_err());
    }

    #[test]
    fn true_orbit_is_shadowed_by_itself() {
        let m = SurfaceModel::genus2();
        let v = UnitTangent::plane(HPoint::new(-0.2, 0.9).unwrap(), 2.0);
        let po = make_pseudo_orbit(&m, &split_orbit(&m, &v, &[3.0, 4.0, 3.0]), 1e-6, 1.0, false).unwrap();
        let s = shadow_search(&m, &po, &mut Budget::unlimited()).unwrap();
        assert!(s.epsilon < 1e-10, "{}", s.epsilon);
        assert!(s.reparam_dev < 1e-10);
        assert!(plane_sasaki(&s.orbit, &v).unwrap() < 1e-9);
    }

    #[test]
    fn jump_at_a_joint_is_traced() {
        let m = SurfaceModel::genus2();
        let v = UnitTangent::plane(HPoint::new(0.3, 1.1).unwrap(), 1.0);
        let mut segs = split_orbit(&m, &v, &[5.0, 5.0]);
        segs[1].0 = sasaki_offset(&m, &segs[1].0, [1.0, 0.0, 0.3], 0.05).unwrap();
        let po = make_pseudo_orbit(&m, &segs, 0.06, 1.0, false).unwrap();
        let s = shadow_search(&m, &po, &mut Budget::unlimited()).unwrap();
        assert!(s.epsilon <= 0.2, "{}", s.epsilon);
        assert!(s.reparam_dev <= 0.05 && s.reparam_dev <= s.epsilon);
        assert!(s.matched.windows(2).all(|w| w[1].alpha >= w[0].alpha - 1e-9));
    }

    #[test]
    fn halving_the_jumps_tightens_the_shadow() {
        let m = SurfaceModel::genus2();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let sk = Skeleton::random(&m, 5, 2.0, &mut rng).unwrap();
            let mut last = f64::INFINITY;
            for delta in [0.08, 0.04, 0.02] {
                let po = make_pseudo_orbit(&m, &sk.segments(&m, 0.9 * delta).unwrap(), delta, 2.0, false).unwrap();
                let s = shadow_search(&m, &po, &mut Budget::unlimited()).unwrap();
                assert!(s.epsilon < last && s.reparam_dev <= s.epsilon);
                last = s.epsilon;
            }
        }
    }

    #[test]
    fn short_end_segments_are_rejected() {
        let m = SurfaceModel::genus2();
        let v = UnitTangent::plane(HPoint::I, 0.0);
        let po = make_pseudo_orbit(&m, &split_orbit(&m, &v, &[0.5, 2.0]), 1e-6, 0.1, false).unwrap();
        assert!(matches!(shadow_search(&m, &po, &mut Budget::unlimited()), Err(Error::EndpointUnstable)));
        assert!(matches!(shadow_search(&m, &po, &mut Budget::evals(3)), Err(Error::EndpointUnstable)));
    }

    #[test]
    fn closing_around_a_generator_axis() {
        let m = SurfaceModel::genus2();
        let g = m.group().unwrap().letter_matrix(Letter::new(0).unwrap());
        let (v, _) = axis_tangent(&g, HPoint::I).unwrap();
        let ell = g.translation_length().unwrap();
        let segs = split_orbit(&m, &v, &[ell / 3.0; 3]);
        let po = make_pseudo_orbit(&m, &segs, 1e-6, 0.5, true).unwrap();
        let rec = close_periodic(&m, &po, &mut Budget::unlimited()).unwrap();
        assert_abs_diff_eq!(rec.period, ell, epsilon = 1e-8);
        assert!(sasaki_distance(&m, &rec.initial, &v).unwrap() < 1e-6);
        assert!(rec.return_error < 1e-6);
        assert!(rec.primitive);
        let check = rec.closing.unwrap();
        assert!(check.epsilon < 1e-8 && check.period_bound_holds());

        // The same chain with noise still closes onto the same axis.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noisy: Vec<_> = segs.iter().map(|(x, t)| (sasaki_offset(&m, x, random_direction(&mut rng), 0.01).unwrap(), *t)).collect();
        let po = make_pseudo_orbit(&m, &noisy, 0.05, 0.5, true).unwrap();
        let rec = close_periodic(&m, &po, &mut Budget::unlimited()).unwrap();
        assert_abs_diff_eq!(rec.period, ell, epsilon = 1e-8);
        let check = rec.closing.unwrap();
        assert!(check.period_bound_holds(), "{check:?}");
    }

    #[test]
    fn collar_band_circle_is_recovered() {
        let m = build_collar(1.0, 0.5, 0.5).unwrap();
        let v = UnitTangent::collar(0.01, 0.0, FRAC_PI_2 + 0.01);
        let segs = split_orbit(&m, &v, &[TAU / 4.0; 4]);
        let po = make_pseudo_orbit(&m, &segs, 0.1, 0.5, true).unwrap();
        let rec = close_periodic(&m, &po, &mut Budget::unlimited()).unwrap();
        assert_abs_diff_eq!(rec.period, TAU, epsilon = 1e-6);
        assert!(rec.return_error < 1e-8);
        assert_abs_diff_eq!(rec.initial.angle, FRAC_PI_2, epsilon = 1e-8);
    }

    #[test]
    fn periodic_table() {
        let m = SurfaceModel::genus2();
        assert!(enumerate_periodic_orbits(&m, 3.0).unwrap().records.is_empty());
        let table = enumerate_periodic_orbits(&m, 5.5).unwrap();
        assert!(table.complete);
        assert_eq!(table.records.len(), 24);
        assert!(table.records.windows(2).all(|w| w[0].period <= w[1].period));
        for r in &table.records {
            assert!(r.primitive && r.return_error < 1e-6, "{}", r.return_error);
        }
        assert!(table.count_up_to(5.0) > table.count_up_to(4.0));
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 25);
        assert!(csv.starts_with("word,period,x,y,angle,primitive"));
    }
}
