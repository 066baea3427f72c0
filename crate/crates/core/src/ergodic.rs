//! Separated and spanning sets, entropy slopes, periodic-orbit measures,
//! Liouville quadrature and the Ruelle inequality.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::flow::{geodesic_flow, jacobi_evolve, JacobiState};
use crate::hyperbolic::{HPoint, IsometryMatrix};
use crate::sampling::{random_band_tangent, random_tangent};
use crate::shadowing::{PeriodicOrbitRecord, PeriodicTable};
use crate::strips::QuotientClass;
use crate::surface::{
    curvature_at, lifted_sasaki, nearest_lift, plane_sasaki, surface_distance, SurfaceModel, UnitTangent,
};

const FLOW_TOL: f64 = 1e-10;
/// Largest fit residual (RMS of `log M`) for a slope to count as reliable.
pub const RELIABLE_RESIDUAL: f64 = 0.05;
/// Integration slack in spanning-set cover tests.
const COVER_SLACK: f64 = 1e-9;

/// Candidate points for separated-set counts. Draws are nested: the first
/// `n` candidates do not depend on `count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SamplerKind {
    /// Liouville measure (octagon on the constant model, truncated collar otherwise).
    Liouville,
    /// Uniform along the unstable horocycle arc of the given length centred on `centre`.
    UnstableArc { centre: UnitTangent, length: f64 },
    /// Tangents to the closed band geodesics of the collar.
    BandStrip,
    /// Uniform in time along a closed orbit.
    ClosedOrbit { initial: UnitTangent, period: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub kind: SamplerKind,
    pub seed: u64,
    pub count: usize,
}

impl Sampler {
    pub fn new(kind: SamplerKind, seed: u64, count: usize) -> Self {
        Self { kind, seed, count }
    }

    pub fn descriptor(&self) -> String {
        let kind = match &self.kind {
            SamplerKind::Liouville => "liouville".to_string(),
            SamplerKind::UnstableArc { length, .. } => format!("unstable-arc(length={length})"),
            SamplerKind::BandStrip => "band-strip".to_string(),
            SamplerKind::ClosedOrbit { period, .. } => format!("closed-orbit(period={period})"),
        };
        format!("{kind},seed={},count={}", self.seed, self.count)
    }

    pub fn draw(&self, model: &SurfaceModel) -> Result<Vec<UnitTangent>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| match &self.kind {
                SamplerKind::Liouville => random_tangent(model, &mut rng),
                SamplerKind::UnstableArc { centre, length } => unstable_arc_point(model, centre, rng.gen_range(-0.5..0.5) * length),
                SamplerKind::BandStrip => Ok(random_band_tangent(model.profile()?, &mut rng)),
                SamplerKind::ClosedOrbit { initial, period } => geodesic_flow(model, initial, rng.gen_range(0.0..*period), FLOW_TOL),
            })
            .collect()
    }
}

/// Point at arc length `s` along the unstable horocycle through `v` (constant
/// model); on the collar, an `r`-offset.
pub fn unstable_arc_point(model: &SurfaceModel, v: &UnitTangent, s: f64) -> Result<UnitTangent> {
    match model {
        SurfaceModel::ConstantNegative(_) => {
            // W^u(v) = -W^s(-v).
            let back = v.reversed();
            let m = IsometryMatrix::frame(back.plane_point()?, back.angle);
            let q = HPoint { x: s, y: 1.0 };
            Ok(UnitTangent::plane(m.apply(q), m.push_angle(q, FRAC_PI_2)).reversed())
        }
        SurfaceModel::Collar(_) => {
            let (r, theta) = v.collar_coords()?;
            Ok(UnitTangent::collar(r + s, theta, v.angle))
        }
    }
}

/// Maximal `(n, ε)`-separated count (greedy lower bound) for the time-`step` map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCount {
    /// Horizon `n · step`.
    pub t: f64,
    pub step: f64,
    pub iterates: usize,
    pub eps: f64,
    pub m: usize,
    pub seeds: String,
    pub candidates_tried: usize,
    /// The budget ran out before every candidate was examined.
    pub lower_bound_only: bool,
}

/// Orbit samples at times `0, step, ..., n·step`.
fn grid_orbit(model: &SurfaceModel, v: &UnitTangent, step: f64, n: usize) -> Result<Vec<UnitTangent>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut x = *v;
    out.push(x);
    for _ in 0..n {
        x = geodesic_flow(model, &x, step, FLOW_TOL)?;
        out.push(x);
    }
    Ok(out)
}

/// Radius below which a lift pairing chosen at time 0 stays the nearest one.
fn pairing_radius(model: &SurfaceModel) -> f64 {
    match model {
        SurfaceModel::ConstantNegative(g) => g.injectivity_radius(),
        SurfaceModel::Collar(p) => std::f64::consts::PI * p.c,
    }
}

/// Lift of `b` nearest `a`, if the two are within `eps` on the surface.
fn close_lift(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent, eps: f64) -> Result<Option<LiftMap>> {
    match model {
        SurfaceModel::ConstantNegative(group) => {
            if plane_sasaki(a, b)? <= eps {
                return Ok(Some(LiftMap::Plane(IsometryMatrix::IDENTITY)));
            }
            let (lift, g) = nearest_lift(group, a, b)?;
            Ok((plane_sasaki(a, &lift)? <= eps).then_some(LiftMap::Plane(g)))
        }
        SurfaceModel::Collar(_) => {
            let (_, ta) = a.collar_coords()?;
            let (r, tb) = b.collar_coords()?;
            let turns = ((ta - tb) / TAU).round();
            let lift = UnitTangent::collar(r, tb + turns * TAU, b.angle);
            Ok((lifted_sasaki(model, a, &lift)? <= eps).then_some(LiftMap::Turns(turns)))
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum LiftMap {
    Plane(IsometryMatrix),
    Turns(f64),
}

impl LiftMap {
    fn apply(&self, v: &UnitTangent) -> Result<UnitTangent> {
        match self {
            LiftMap::Plane(g) => v.moved_by(g),
            LiftMap::Turns(k) => {
                let (r, t) = v.collar_coords()?;
                Ok(UnitTangent::collar(r, t + k * TAU, v.angle))
            }
        }
    }
}

/// True when the two grid orbits stay within `eps` at every grid time.
fn bowen_close(model: &SurfaceModel, a: &[UnitTangent], b: &[UnitTangent], eps: f64) -> Result<bool> {
    let Some(lift) = close_lift(model, &a[0], &b[0], eps)? else {
        return Ok(false);
    };
    // While consecutive grid distances are below eps·e^step < the pairing
    // radius, the time-0 pairing remains the nearest lift.
    for (x, y) in a.iter().zip(b).skip(1) {
        if lifted_sasaki(model, x, &lift.apply(y)?)? > eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Greedy `(n, ε)`-separated packing of the sampler's candidates for the
/// time-`step` map, `n = round(t / step)`.
pub fn count_separated(model: &SurfaceModel, sampler: &Sampler, t: f64, eps: f64, step: f64, budget: &mut Budget) -> Result<SeparationCount> {
    if !(t > 0.0 && eps > 0.0 && step > 0.0) {
        return Err(Error::InvalidInput(format!("need T, ε, step > 0, got {t}, {eps}, {step}")));
    }
    if eps * step.exp() >= pairing_radius(model) {
        return Err(Error::InvalidInput(format!("ε e^step = {} exceeds the lift pairing radius", eps * step.exp())));
    }
    let n = (t / step).round().max(1.0) as usize;
    let candidates = sampler.draw(model)?;
    let mut accepted: Vec<Vec<UnitTangent>> = Vec::new();
    let mut tried = 0;
    let mut lower_bound_only = false;
    for c in &candidates {
        if !budget.spend() {
            lower_bound_only = true;
            break;
        }
        tried += 1;
        let orbit = grid_orbit(model, c, step, n)?;
        let mut separated = true;
        for other in &accepted {
            if bowen_close(model, &orbit, other, eps)? {
                separated = false;
                break;
            }
        }
        if separated {
            accepted.push(orbit);
        }
    }
    Ok(SeparationCount {
        t: n as f64 * step,
        step,
        iterates: n,
        eps,
        m: accepted.len(),
        seeds: sampler.descriptor(),
        candidates_tried: tried,
        lower_bound_only,
    })
}

/// Least-squares line `y = a x + b`; returns `(a, b, rms residual)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - a * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub eps: f64,
    /// Slope of `log M` per iterate of the time-`step` map.
    pub slope: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Caveat {
    /// Greedy packings only bound `M` from below.
    LowerBound,
    /// Counts decrease somewhere in `T` (sampler artifact).
    NonMonotoneCounts,
    /// No `ε` met the residual cutoff; the smallest `ε` was used.
    NoReliableEpsilon,
    /// Some count stopped early on its budget.
    BudgetLimited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Entropy of the time-`step` map (slope per iterate).
    pub h: f64,
    pub step: f64,
    pub eps_used: f64,
    pub per_eps: Vec<SlopeFit>,
    pub t_grid: Vec<f64>,
    pub caveats: Vec<Caveat>,
}

impl EntropyEstimate {
    /// Entropy per unit flow time.
    pub fn per_time(&self) -> f64 {
        self.h / self.step
    }
}

/// Fits `log M` against the iterate count for each `ε` and reports the slope at
/// the smallest `ε` whose fit residual is below [`RELIABLE_RESIDUAL`].
pub fn entropy_estimate(counts: &[SeparationCount]) -> Result<EntropyEstimate> {
    let step = counts.first().ok_or_else(|| Error::InvalidInput("no counts".into()))?.step;
    if counts.iter().any(|c| (c.step - step).abs() > 1e-12 || c.m == 0) {
        return Err(Error::InvalidInput("counts must share one time step and be positive".into()));
    }
    let mut eps: Vec<f64> = counts.iter().map(|c| c.eps).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let mut caveats = vec![Caveat::LowerBound];
    if counts.iter().any(|c| c.lower_bound_only) {
        caveats.push(Caveat::BudgetLimited);
    }
    let mut per_eps = Vec::new();
    let mut t_grid: Vec<f64> = counts.iter().map(|c| c.t).collect();
    t_grid.sort_by(f64::total_cmp);
    t_grid.dedup();
    for &e in &eps {
        let mut rows: Vec<&SeparationCount> = counts.iter().filter(|c| c.eps == e).collect();
        rows.sort_by_key(|c| c.iterates);
        let mut ns: Vec<usize> = rows.iter().map(|c| c.iterates).collect();
        ns.dedup();
        if ns.len() < 3 {
            return Err(Error::InvalidInput(format!("ε = {e} has fewer than 3 distinct horizons")));
        }
        if rows.windows(2).any(|w| w[1].m < w[0].m) && !caveats.contains(&Caveat::NonMonotoneCounts) {
            caveats.push(Caveat::NonMonotoneCounts);
        }
        let xs: Vec<f64> = rows.iter().map(|c| c.iterates as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|c| (c.m as f64).ln()).collect();
        let (slope, _, residual) = fit_line(&xs, &ys);
        per_eps.push(SlopeFit { eps: e, slope, residual });
    }
    let chosen = match per_eps.iter().find(|f| f.residual < RELIABLE_RESIDUAL) {
        Some(f) => *f,
        None => {
            caveats.push(Caveat::NoReliableEpsilon);
            per_eps[0]
        }
    };
    Ok(EntropyEstimate { h: chosen.slope, step, eps_used: chosen.eps, per_eps, t_grid, caveats })
}

/// `slope(time-t counts) / slope(time-1 counts)`; Abramov predicts `t`.
pub fn abramov_ratio(time_t: &EntropyEstimate, time_1: &EntropyEstimate) -> f64 {
    time_t.h / time_1.h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRate {
    pub slope: f64,
    pub residual: f64,
    pub counts: Vec<(f64, usize)>,
    /// Slope of `log(T · #Per(T))`, the prime-geodesic-theorem corrected count.
    pub corrected_slope: f64,
}

/// Slope of `log #Per(T)` over `t_grid`.
pub fn growth_rate_per(table: &PeriodicTable, t_grid: &[f64]) -> Result<GrowthRate> {
    growth_rate_filtered(table, t_grid, |_| true)
}

/// [`growth_rate_per`] restricted to records accepted by `keep`.
pub fn growth_rate_filtered(table: &PeriodicTable, t_grid: &[f64], keep: impl Fn(&PeriodicOrbitRecord) -> bool) -> Result<GrowthRate> {
    if t_grid.len() < 2 {
        return Err(Error::InvalidInput("growth rate needs at least two horizons".into()));
    }
    let t_max = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if table.certified < t_max {
        return Err(Error::IncompleteEnumeration { certified: table.certified });
    }
    let counts: Vec<(f64, usize)> =
        t_grid.iter().map(|&t| (t, table.records.iter().filter(|r| r.period <= t && keep(r)).count())).collect();
    if let Some((t, _)) = counts.iter().find(|c| c.1 == 0) {
        return Err(Error::InvalidInput(format!("no periodic orbits up to T = {t}")));
    }
    let xs: Vec<f64> = counts.iter().map(|c| c.0).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();
    let (slope, _, residual) = fit_line(&xs, &ys);
    let corrected: Vec<f64> = counts.iter().map(|c| (c.1 as f64 * c.0).ln()).collect();
    let (corrected_slope, _, _) = fit_line(&xs, &corrected);
    Ok(GrowthRate { slope, residual, counts, corrected_slope })
}

/// Test functions on the unit tangent bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    Constant(f64),
    /// Smoothed indicator of a surface ball: 1 within `radius`, 0 beyond `radius + soft`.
    Ball { centre: HPoint, radius: f64, soft: f64 },
    /// `exp(-d(base, centre))` on the surface.
    Decay { centre: HPoint },
    /// Gaussian curvature at the base point.
    Curvature,
    /// Smoothed indicator of heading: `(1 + cos(angle - direction)) / 2` in the chart frame (collar).
    CollarHeading { direction: f64 },
    /// `tanh(r)` on the collar.
    CollarDepth,
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

impl Observable {
    pub fn id(&self) -> String {
        match self {
            Observable::Constant(c) => format!("const({c})"),
            Observable::Ball { centre, radius, .. } => format!("ball({:.4},{:.4};{radius})", centre.x, centre.y),
            Observable::Decay { centre } => format!("decay({:.4},{:.4})", centre.x, centre.y),
            Observable::Curvature => "curvature".into(),
            Observable::CollarHeading { direction } => format!("heading({direction})"),
            Observable::CollarDepth => "depth".into(),
        }
    }

    /// The three smooth test functions used for equidistribution on the
    /// constant model: balls about the octagon centre and about the vertex
    /// point, and the distance decay from the centre.
    pub fn battery(model: &SurfaceModel) -> Result<Vec<Observable>> {
        let group = model.group()?;
        Ok(vec![
            Observable::Ball { centre: HPoint::I, radius: 1.0, soft: 0.3 },
            Observable::Ball { centre: group.vertices()[0], radius: 0.8, soft: 0.3 },
            Observable::Decay { centre: HPoint::I },
        ])
    }

    pub fn depends_on_angle(&self) -> bool {
        matches!(self, Observable::CollarHeading { .. })
    }

    /// Lipschitz constant in the base distance.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Observable::Constant(_) | Observable::Curvature => 0.0,
            Observable::Ball { soft, .. } => 1.5 / soft,
            Observable::Decay { .. } | Observable::CollarHeading { .. } | Observable::CollarDepth => 1.0,
        }
    }

    pub fn eval(&self, model: &SurfaceModel, v: &UnitTangent) -> Result<f64> {
        let base_distance = |c: HPoint| -> Result<f64> { Ok(surface_distance(model.group()?, v.plane_point()?, c)) };
        Ok(match self {
            Observable::Constant(c) => *c,
            Observable::Ball { centre, radius, soft } => 1.0 - smoothstep((base_distance(*centre)? - radius) / soft),
            Observable::Decay { centre } => (-base_distance(*centre)?).exp(),
            Observable::Curvature => curvature_at(model, &v.base),
            Observable::CollarHeading { direction } => {
                v.collar_coords()?;
                0.5 * (1.0 + (v.angle - direction).cos())
            }
            Observable::CollarDepth => v.collar_coords()?.0.tanh(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `ν_{ψ,T}`: uniform over orbits of period at most `T`.
    UpTo,
    /// Uniform over orbits with period in `[T - w, T + w]`.
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureAtom {
    pub initial: UnitTangent,
    pub period: f64,
    pub weight: f64,
}

/// A convex combination of periodic-orbit measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitMeasure {
    pub atoms: Vec<MeasureAtom>,
    pub normalization: Normalization,
}

impl OrbitMeasure {
    fn uniform(records: Vec<&PeriodicOrbitRecord>, normalization: Normalization) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidInput("no periodic orbits selected".into()));
        }
        let w = 1.0 / records.len() as f64;
        let atoms = records.iter().map(|r| MeasureAtom { initial: r.initial, period: r.period, weight: w }).collect();
        Ok(Self { atoms, normalization })
    }

    /// `ν_{ψ,T}`.
    pub fn up_to(table: &PeriodicTable, t: f64) -> Result<Self> {
        Self::uniform(table.records.iter().filter(|r| r.period <= t).collect(), Normalization::UpTo)
    }

    /// Window variant over periods in `[T - w, T + w]`.
    pub fn window(table: &PeriodicTable, t: f64, w: f64) -> Result<Self> {
        Self::uniform(table.records.iter().filter(|r| (r.period - t).abs() <= w).collect(), Normalization::Window)
    }

    pub fn single(initial: UnitTangent, period: f64) -> Self {
        Self { atoms: vec![MeasureAtom { initial, period, weight: 1.0 }], normalization: Normalization::UpTo }
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

/// Time average `(1/ℓ) ∫_0^ℓ f(φ_t x) dt` by the midpoint rule.
pub fn orbit_average(model: &SurfaceModel, initial: &UnitTangent, period: f64, f: &Observable) -> Result<f64> {
    let n = ((period / 0.01).ceil() as usize).max(200);
    let h = period / n as f64;
    let mut x = geodesic_flow(model, initial, 0.5 * h, FLOW_TOL)?;
    let mut acc = 0.0;
    for k in 0..n {
        acc += f.eval(model, &x)?;
        if k + 1 < n {
            x = geodesic_flow(model, &x, h, FLOW_TOL)?;
        }
    }
    Ok(acc / n as f64)
}

/// `∫ f dμ`.
pub fn orbit_measure_integrate(model: &SurfaceModel, mu: &OrbitMeasure, f: &Observable) -> Result<f64> {
    let mut acc = 0.0;
    for a in &mu.atoms {
        acc += a.weight * orbit_average(model, &a.initial, a.period, f)?;
    }
    Ok(acc)
}

/// Liouville average of `f` over the unit tangent bundle of the octagon:
/// midpoint rule on a polar grid about `i` (hyperbolic area `sinh ρ dρ dφ`),
/// keeping cells whose midpoint lies in the octagon, times an angle grid when
/// `f` depends on the direction. `cells` is the spatial cell count.
pub fn liouville_average(model: &SurfaceModel, f: &Observable, cells: usize) -> Result<f64> {
    let group = model.group()?;
    let side = (cells as f64).sqrt().ceil().max(8.0) as usize;
    let (n_rho, n_phi) = (side, side);
    let n_angle = if f.depends_on_angle() { 16 } else { 1 };
    let r_max = group.circumradius();
    let (d_rho, d_phi) = (r_max / n_rho as f64, TAU / n_phi as f64);
    let (mut acc, mut area) = (0.0, 0.0);
    for i in 0..n_rho {
        let rho = (i as f64 + 0.5) * d_rho;
        let weight = rho.sinh() * d_rho * d_phi;
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * d_phi;
            let p = HPoint::from_disk(Complex64::from_polar((0.5 * rho).tanh(), phi))?;
            if !group.contains(p, 0.0) {
                continue;
            }
            let mut cell = 0.0;
            for k in 0..n_angle {
                let angle = (k as f64 + 0.5) * TAU / n_angle as f64;
                cell += f.eval(model, &UnitTangent::plane(p, angle))?;
            }
            acc += weight * cell / n_angle as f64;
            area += weight;
        }
    }
    Ok(acc / area)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmeRow {
    pub t: f64,
    pub observable: String,
    pub value: f64,
    /// `value(T) - value(previous T)`; `None` on the first row.
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSummary {
    pub observable: String,
    pub liouville: f64,
    /// `|∫ f dν_{ψ,T_max} - Liouville(f)|`.
    pub final_gap: f64,
    /// `|∫ f dν̂ - ∫ f dν_{ψ,T_max}|` for the window variant.
    pub window_gap: f64,
    /// Absolute successive differences are non-increasing.
    pub differences_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmeReport {
    pub rows: Vec<MmeRow>,
    pub summaries: Vec<ObservableSummary>,
}

impl MmeReport {
    /// CSV with columns `T,observable,value,difference`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,observable,value,difference\n");
        for r in &self.rows {
            let d = r.difference.map_or(String::new(), |d| d.to_string());
            let _ = writeln!(out, "{},{},{},{}", r.t, r.observable, r.value, d);
        }
        out
    }
}

/// Convergence of `∫ f dν_{ψ,T}` over `t_grid` towards the Liouville average.
pub fn mme_diagnostics(
    model: &SurfaceModel,
    table: &PeriodicTable,
    t_grid: &[f64],
    observables: &[Observable],
    window: f64,
    quadrature_cells: usize,
) -> Result<MmeReport> {
    model.group()?;
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.is_empty() {
        return Err(Error::InvalidInput("T grid must be non-empty and increasing".into()));
    }
    let t_max = t_grid[t_grid.len() - 1];
    if table.certified < t_max + window {
        return Err(Error::IncompleteEnumeration { certified: table.certified });
    }
    let measures = t_grid.iter().map(|&t| OrbitMeasure::up_to(table, t)).collect::<Result<Vec<_>>>()?;
    let hat = OrbitMeasure::window(table, t_max, window)?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for f in observables {
        let values = measures.iter().map(|mu| orbit_measure_integrate(model, mu, f)).collect::<Result<Vec<_>>>()?;
        for (k, (&t, &v)) in t_grid.iter().zip(&values).enumerate() {
            rows.push(MmeRow { t, observable: f.id(), value: v, difference: (k > 0).then(|| v - values[k - 1]) });
        }
        let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let liouville = liouville_average(model, f, quadrature_cells)?;
        let last = values[values.len() - 1];
        summaries.push(ObservableSummary {
            observable: f.id(),
            liouville,
            final_gap: (last - liouville).abs(),
            window_gap: (orbit_measure_integrate(model, &hat, f)? - last).abs(),
            differences_decreasing: diffs.windows(2).all(|w| w[1] <= w[0]),
        });
    }
    Ok(MmeReport { rows, summaries })
}

/// Lyapunov exponent of a closed orbit: `(1/ℓ) log ρ`, with `ρ` the spectral
/// radius of the Jacobi monodromy over one period.
pub fn periodic_lyapunov(model: &SurfaceModel, initial: &UnitTangent, period: f64) -> Result<f64> {
    let a = jacobi_evolve(model, initial, period, JacobiState::new(1.0, 0.0), FLOW_TOL)?;
    let b = jacobi_evolve(model, initial, period, JacobiState::new(0.0, 1.0), FLOW_TOL)?;
    // det = 1, so the eigenvalues are tr/2 ± sqrt((tr/2)^2 - 1).
    let half = 0.5 * (a.j + b.jp);
    let rho = if half.abs() <= 1.0 { 1.0 } else { half.abs() + (half * half - 1.0).sqrt() };
    Ok(rho.ln() / period)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuelleReport {
    pub h_surrogate: f64,
    pub lambda_integral: f64,
    pub atom_lyapunov: Vec<f64>,
    pub tolerance: f64,
    pub holds: bool,
}

/// `h ≤ λ(μ) = Σ w_i λ(γ_i)`. A single-orbit measure has entropy 0; otherwise
/// `entropy` (an estimate for the supporting dynamics) is used.
pub fn ruelle_check(model: &SurfaceModel, mu: &OrbitMeasure, entropy: Option<f64>, tol: f64) -> Result<RuelleReport> {
    let atom_lyapunov =
        mu.atoms.iter().map(|a| periodic_lyapunov(model, &a.initial, a.period)).collect::<Result<Vec<_>>>()?;
    let lambda_integral = mu.atoms.iter().zip(&atom_lyapunov).map(|(a, l)| a.weight * l).sum();
    let h_surrogate = if mu.atoms.len() == 1 {
        0.0
    } else {
        entropy.ok_or_else(|| Error::InvalidInput("multi-orbit measures need an entropy estimate".into()))?
    };
    Ok(RuelleReport { h_surrogate, lambda_integral, atom_lyapunov, tolerance: tol, holds: h_surrogate <= lambda_integral + tol })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntropyReport {
    pub eps: f64,
    /// `(n, N(n, ε, [θ]))`.
    pub sizes: Vec<(usize, usize)>,
    pub constant: bool,
}

/// Greedy `(n, ε)`-spanning set sizes of the class cross-section under the time-1 map.
pub fn class_entropy_check(model: &SurfaceModel, class: &QuotientClass, n_grid: &[usize], eps: f64) -> Result<ClassEntropyReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("ε must be positive, got {eps}")));
    }
    let members = if class.is_trivial() { vec![class.representative] } else { class.strip.members.clone() };
    let n_max = n_grid.iter().copied().max().unwrap_or(0);
    let orbits = members.iter().map(|m| grid_orbit(model, m, 1.0, n_max)).collect::<Result<Vec<_>>>()?;
    let mut sizes = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let mut centres: Vec<usize> = Vec::new();
        for (i, o) in orbits.iter().enumerate() {
            let covered = centres.iter().any(|&c| {
                o[..=n].iter().zip(&orbits[c][..=n]).all(|(x, y)| lifted_sasaki(model, x, y).map_or(false, |d| d <= eps + COVER_SLACK))
            });
            if !covered {
                centres.push(i);
            }
        }
        sizes.push((n, centres.len()));
    }
    let constant = sizes.windows(2).all(|w| w[0].1 == w[1].1);
    Ok(ClassEntropyReport { eps, sizes, constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shadowing::enumerate_periodic_orbits;
    use crate::strips::{quotient_class, ScanSpec, DEFAULT_HORIZON};
    use crate::surface::build_collar;
    use approx::assert_abs_diff_eq;

    fn synthetic(rate: f64, ts: &[usize], eps: f64) -> Vec<SeparationCount> {
        ts.iter()
            .map(|&n| SeparationCount {
                t: n as f64,
                step: 1.0,
                iterates: n,
                eps,
                m: (rate * n as f64).exp().ceil() as usize,
                seeds: "synthetic".into(),
                candidates_tried: 0,
                lower_bound_only: false,
            })
            .collect()
    }

    #[test]
    fn synthetic_counts_give_their_rate() {
        let e = entropy_estimate(&synthetic(0.7, &[4, 6, 8, 10, 12], 0.1)).unwrap();
        assert_abs_diff_eq!(e.h, 0.7, epsilon = 1e-2);
        let flat = entropy_estimate(&synthetic(0.0, &[2, 4, 6], 0.1)).unwrap();
        assert!(flat.h.abs() < 0.05);
        assert!(entropy_estimate(&synthetic(0.7, &[2, 4], 0.1)).is_err());
        // Time-2 resampling of the same counts doubles the slope per iterate.
        let resampled: Vec<_> = synthetic(0.7, &[4, 6, 8, 10, 12], 0.1)
            .into_iter()
            .map(|c| SeparationCount { step: 2.0, iterates: c.iterates / 2, ..c })
            .collect();
        assert_abs_diff_eq!(abramov_ratio(&entropy_estimate(&resampled).unwrap(), &e), 2.0, epsilon = 0.01);
    }

    #[test]
    fn separated_counts_are_monotone_in_eps_and_time() {
        let m = SurfaceModel::genus2();
        let centre = UnitTangent::plane(HPoint::I, 0.3);
        let sampler = Sampler::new(SamplerKind::UnstableArc { centre, length: 0.1 }, 1, 400);
        let count = |t: f64, e: f64| count_separated(&m, &sampler, t, e, 1.0, &mut Budget::unlimited()).unwrap().m;
        assert!(count(3.0, 0.1) >= count(3.0, 0.2));
        assert!(count(3.0, 0.1) >= count(2.0, 0.1));
        let liouville = Sampler::new(SamplerKind::Liouville, 2, 150);
        let a = count_separated(&m, &liouville, 1.0, 0.1, 1.0, &mut Budget::unlimited()).unwrap().m;
        let b = count_separated(&m, &liouville, 1.0, 0.2, 1.0, &mut Budget::unlimited()).unwrap().m;
        assert!(a >= b);
        let partial = count_separated(&m, &sampler, 2.0, 0.1, 1.0, &mut Budget::evals(10)).unwrap();
        assert!(partial.lower_bound_only && partial.candidates_tried == 10);
    }

    #[test]
    fn closed_orbit_has_no_exponential_separation() {
        let m = SurfaceModel::genus2();
        let table = enumerate_periodic_orbits(&m, 3.1).unwrap();
        let r = &table.records[0];
        let sampler = Sampler::new(SamplerKind::ClosedOrbit { initial: r.initial, period: r.period }, 3, 300);
        let counts: Vec<_> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&t| count_separated(&m, &sampler, t, 0.1, 1.0, &mut Budget::unlimited()).unwrap())
            .collect();
        assert!(counts.windows(2).all(|w| w[1].m == w[0].m), "{:?}", counts.iter().map(|c| c.m).collect::<Vec<_>>());
        assert!(entropy_estimate(&counts).unwrap().h.abs() < 0.05);
    }

    #[test]
    fn growth_rate_requirements() {
        let m = SurfaceModel::genus2();
        let table = enumerate_periodic_orbits(&m, 6.0).unwrap();
        let g = growth_rate_per(&table, &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(g.counts.iter().map(|c| c.1).collect::<Vec<_>>(), vec![12, 24, 48]);
        assert!(matches!(growth_rate_per(&table, &[4.0, 7.0]), Err(Error::IncompleteEnumeration { .. })));
        assert!(growth_rate_per(&table, &[2.0, 3.0]).is_err());
        let same = growth_rate_filtered(&table, &[4.0, 5.0, 6.0], |_| true).unwrap();
        assert_eq!(same.slope, g.slope);
    }

    #[test]
    fn orbit_measures_integrate_linearly() {
        let m = SurfaceModel::genus2();
        let table = enumerate_periodic_orbits(&m, 5.0).unwrap();
        let mu = OrbitMeasure::up_to(&table, 5.0).unwrap();
        assert_abs_diff_eq!(mu.total_weight(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(orbit_measure_integrate(&m, &mu, &Observable::Constant(1.0)).unwrap(), 1.0, epsilon = 1e-12);
        let single = OrbitMeasure::single(table.records[0].initial, table.records[0].period);
        assert_abs_diff_eq!(orbit_measure_integrate(&m, &single, &Observable::Curvature).unwrap(), -1.0, epsilon = 1e-12);
        let f = Observable::Ball { centre: HPoint::I, radius: 1.0, soft: 0.3 };
        let g = Observable::Decay { centre: HPoint::I };
        let (a, b) = (orbit_measure_integrate(&m, &mu, &f).unwrap(), orbit_measure_integrate(&m, &mu, &g).unwrap());
        assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        // Two-orbit measure: the mean of the two orbit averages.
        let two = OrbitMeasure {
            atoms: table.records[..2].iter().map(|r| MeasureAtom { initial: r.initial, period: r.period, weight: 0.5 }).collect(),
            normalization: Normalization::UpTo,
        };
        let each: Vec<f64> = table.records[..2].iter().map(|r| orbit_average(&m, &r.initial, r.period, &f).unwrap()).collect();
        assert_abs_diff_eq!(orbit_measure_integrate(&m, &two, &f).unwrap(), 0.5 * (each[0] + each[1]), epsilon = 1e-12);
    }

    #[test]
    fn liouville_quadrature_of_a_ball() {
        let m = SurfaceModel::genus2();
        // A hard ball of radius 1 about i lies inside the octagon: area 2π(cosh 1 - 1) over 4π.
        let hard = Observable::Ball { centre: HPoint::I, radius: 1.0, soft: 1e-9 };
        let exact = 0.5 * (1f64.cosh() - 1.0);
        assert_abs_diff_eq!(liouville_average(&m, &hard, 250_000).unwrap(), exact, epsilon = 5e-3);
        assert_abs_diff_eq!(liouville_average(&m, &Observable::Constant(1.0), 10_000).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ruelle_examples() {
        let m = SurfaceModel::genus2();
        let table = enumerate_periodic_orbits(&m, 3.1).unwrap();
        let single = OrbitMeasure::single(table.records[0].initial, table.records[0].period);
        let r = ruelle_check(&m, &single, None, 0.05).unwrap();
        assert!(r.holds && r.h_surrogate == 0.0);
        assert_abs_diff_eq!(r.lambda_integral, 1.0, epsilon = 1e-6);
        let c = build_collar(1.0, 0.5, 0.5).unwrap();
        let band = OrbitMeasure::single(UnitTangent::collar(0.0, 0.0, FRAC_PI_2), TAU);
        let r = ruelle_check(&c, &band, None, 0.05).unwrap();
        assert!(r.holds && r.lambda_integral.abs() < 1e-9);
    }

    #[test]
    fn class_entropy_of_band_and_trivial_classes() {
        let c = build_collar(1.0, 0.5, 0.5).unwrap();
        let scan = ScanSpec::new(1.0, 0.01).unwrap();
        let band = quotient_class(&c, &UnitTangent::collar(0.0, 0.0, FRAC_PI_2), scan, DEFAULT_HORIZON, 1.0).unwrap();
        let r = class_entropy_check(&c, &band, &[1, 5, 10, 20], 0.05).unwrap();
        assert!(r.constant && r.sizes[0].1 > 1, "{:?}", r.sizes);
        let finer = class_entropy_check(&c, &band, &[1, 5, 10, 20], 0.025).unwrap();
        assert!(finer.sizes.iter().zip(&r.sizes).all(|(a, b)| a.1 >= b.1));
        let g = SurfaceModel::genus2();
        let trivial = quotient_class(&g, &UnitTangent::plane(HPoint::I, 0.2), scan, DEFAULT_HORIZON, 1.0).unwrap();
        let r = class_entropy_check(&g, &trivial, &[1, 5, 10], 0.05).unwrap();
        assert!(r.sizes.iter().all(|s| s.1 == 1));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn slope_of_exponential_counts(rate in 0.0f64..2.0, start in 4usize..8) {
            let e = entropy_estimate(&synthetic(rate, &[start, start + 3, start + 6, start + 9], 0.1)).unwrap();
            proptest::prop_assert!((e.h - rate).abs() < 0.03, "{} vs {}", e.h, rate);
            proptest::prop_assert!(e.per_eps.iter().all(|f| f.slope >= -1e-12));
        }
    }
}
