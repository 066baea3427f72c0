//! Geodesic flow, Jacobi fields, the unstable Riccati slope, Lyapunov
//! exponents and rank classification on both surface models.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{HPoint, IsometryMatrix};
use crate::ode::Dopri5;
use crate::surface::{plane_sasaki, ChartPoint, CollarProfile, SurfaceModel, UnitTangent};

/// Initial backward time for the Riccati construction of the unstable slope.
pub const DEFAULT_T_BACK: f64 = 10.0;
/// Largest backward time tried before the slope is reported unconverged.
pub const T_BACK_CAP: f64 = 10.0 * (1u64 << 21) as f64;
/// Successive Riccati slopes closer than this are considered converged.
const SLOPE_CONVERGENCE: f64 = 1e-10;

/// Samples of an orbit `t -> φ_t(θ)`. Collar angles θ are unwrapped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, UnitTangent)>,
    pub model: String,
    pub tol: f64,
}

impl Trajectory {
    /// CSV with header `t,x,y,angle` (constant model) or `t,r,theta,angle` (collar).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header = match self.samples.first().map(|s| s.1.base) {
            Some(ChartPoint::Collar { .. }) => "t,r,theta,angle",
            _ => "t,x,y,angle",
        };
        out.push_str(header);
        out.push('\n');
        for (t, v) in &self.samples {
            let (a, b) = match v.base {
                ChartPoint::Plane(p) => (p.x, p.y),
                ChartPoint::Collar { r, theta } => (r, theta),
            };
            let _ = writeln!(out, "{t},{a},{b},{}", v.angle);
        }
        out
    }

    pub fn end(&self) -> Option<&UnitTangent> {
        self.samples.last().map(|s| &s.1)
    }
}

/// Orthogonal Jacobi component and its covariant derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiState {
    pub j: f64,
    pub jp: f64,
}

impl JacobiState {
    pub fn new(j: f64, jp: f64) -> Self {
        Self { j, jp }
    }

    pub fn norm(&self) -> f64 {
        self.j.hypot(self.jp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rank {
    RankOne,
    Higher,
}

/// Rank label with the evidence it was based on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankLabel {
    pub label: Rank,
    pub max_abs_curvature: f64,
    pub lyapunov: f64,
}

/// Unstable slope `u = J'/J` with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiSlope {
    pub u: f64,
    pub t_back: f64,
    /// Change from the previous doubling of `t_back`.
    pub change: f64,
    pub converged: bool,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")))
    }
}

/// Exact flow on the plane: conjugate to the upward vertical geodesic through `i`.
fn plane_flow(p: HPoint, angle: f64, t: f64) -> UnitTangent {
    let m = IsometryMatrix::frame(p, angle);
    let q = HPoint { x: 0.0, y: t.exp() };
    UnitTangent::plane(m.apply(q), m.push_angle(q, FRAC_PI_2))
}

/// Geodesic equations on the collar for the state `(r, θ, ψ)`.
fn collar_rhs(prof: &CollarProfile, y: &[f64]) -> [f64; 3] {
    let (r, psi) = (y[0], y[2]);
    let (s, c) = psi.sin_cos();
    [c, s / prof.f(r), -prof.log_derivative(r) * s]
}

fn collar_state(v: &UnitTangent) -> Result<[f64; 3]> {
    let (r, theta) = v.collar_coords()?;
    Ok([r, theta, v.angle])
}

fn collar_tangent(y: &[f64]) -> UnitTangent {
    UnitTangent::collar(y[0], y[1], y[2])
}

/// `φ_t(θ)`: exact on the constant model, adaptive ODE on the collar.
pub fn geodesic_flow(model: &SurfaceModel, v: &UnitTangent, t: f64, tol: f64) -> Result<UnitTangent> {
    check_tol(tol)?;
    model.check(v)?;
    if t == 0.0 {
        return Ok(*v);
    }
    match model {
        SurfaceModel::ConstantNegative(_) => Ok(plane_flow(v.plane_point()?, v.angle, t)),
        SurfaceModel::Collar(prof) => {
            let mut ode = Dopri5::new(|_, y: &[f64; 3]| collar_rhs(prof, y), 0.0, collar_state(v)?, tol)?;
            ode.advance_to(t)?;
            Ok(collar_tangent(ode.state()))
        }
    }
}

/// Samples `φ_t(θ)` at `t = 0, dt, 2dt, ...` up to `t_end` (which may be negative).
pub fn trajectory(model: &SurfaceModel, v: &UnitTangent, t_end: f64, dt: f64, tol: f64) -> Result<Trajectory> {
    check_tol(tol)?;
    model.check(v)?;
    if !(dt > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!("invalid sampling: t_end = {t_end}, dt = {dt}")));
    }
    let n = (t_end.abs() / dt).round().max(1.0) as usize;
    let times = (0..=n).map(|k| t_end * k as f64 / n as f64);
    let mut samples = Vec::with_capacity(n + 1);
    match model {
        SurfaceModel::ConstantNegative(_) => {
            let p = v.plane_point()?;
            samples.extend(times.map(|t| (t, plane_flow(p, v.angle, t))));
        }
        SurfaceModel::Collar(prof) => {
            let mut ode = Dopri5::new(|_, y: &[f64; 3]| collar_rhs(prof, y), 0.0, collar_state(v)?, tol)?;
            for t in times {
                ode.advance_to(t)?;
                samples.push((t, collar_tangent(ode.state())));
            }
        }
    }
    Ok(Trajectory { samples, model: model.kind_name().to_string(), tol })
}

/// Solves `J'' + K(γ(t)) J = 0` along the geodesic of `θ` from 0 to `t`.
pub fn jacobi_evolve(model: &SurfaceModel, v: &UnitTangent, t: f64, init: JacobiState, tol: f64) -> Result<JacobiState> {
    check_tol(tol)?;
    model.check(v)?;
    match model {
        SurfaceModel::ConstantNegative(_) => {
            let (s, c) = (t.sinh(), t.cosh());
            Ok(JacobiState { j: init.j * c + init.jp * s, jp: init.j * s + init.jp * c })
        }
        SurfaceModel::Collar(prof) => {
            let [r, th, psi] = collar_state(v)?;
            let rhs = |_: f64, y: &[f64; 5]| {
                let g = collar_rhs(prof, &y[..3]);
                [g[0], g[1], g[2], y[4], -prof.curvature(y[0]) * y[3]]
            };
            let mut ode = Dopri5::new(rhs, 0.0, [r, th, psi, init.j, init.jp], tol)?;
            let y = ode.advance_to(t)?;
            Ok(JacobiState { j: y[3], jp: y[4] })
        }
    }
}

/// Riccati slope `u(0)` from a single backward time and initial slope `u0`.
pub fn unstable_slope_from(model: &SurfaceModel, v: &UnitTangent, t_back: f64, u0: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    model.check(v)?;
    if !(t_back > 0.0) {
        return Err(Error::InvalidInput(format!("T_back must be positive, got {t_back}")));
    }
    let u = match model {
        SurfaceModel::ConstantNegative(_) => {
            // u' = 1 - u² has the closed form u = tanh(t + atanh u0) for |u0| < 1.
            let mut ode = Dopri5::new(|_, y: &[f64; 1]| [1.0 - y[0] * y[0]], -t_back, [u0], tol)?;
            ode.advance_to(0.0)?[0]
        }
        SurfaceModel::Collar(prof) => {
            let start = geodesic_flow(model, v, -t_back, tol)?;
            let [r, th, psi] = collar_state(&start)?;
            let rhs = |_: f64, y: &[f64; 4]| {
                let g = collar_rhs(prof, &y[..3]);
                [g[0], g[1], g[2], -prof.curvature(y[0]) - y[3] * y[3]]
            };
            let mut ode = Dopri5::new(rhs, -t_back, [r, th, psi, u0], tol)?;
            ode.advance_to(0.0)?[3]
        }
    };
    if u.is_finite() {
        Ok(u)
    } else {
        Err(Error::RiccatiBlowUp { t_back })
    }
}

/// Unstable slope with `T_back` doubling until successive values agree.
pub fn unstable_slope_diagnosed(model: &SurfaceModel, v: &UnitTangent, t_back: f64, tol: f64) -> Result<RiccatiSlope> {
    let mut tb = t_back;
    let mut prev: Option<f64> = None;
    loop {
        let u = match unstable_slope_from(model, v, tb, 1.0, tol) {
            Ok(u) => Some(u),
            Err(Error::RiccatiBlowUp { .. }) | Err(Error::IntegrationFailure { .. }) => None,
            Err(e) => return Err(e),
        };
        if let (Some(u), Some(p)) = (u, prev) {
            let change = (u - p).abs();
            if change < SLOPE_CONVERGENCE.max(tol) || 2.0 * tb > T_BACK_CAP {
                return Ok(RiccatiSlope { u, t_back: tb, change, converged: change < SLOPE_CONVERGENCE.max(tol) });
            }
        }
        if u.is_none() && 2.0 * tb > T_BACK_CAP {
            return Err(Error::RiccatiBlowUp { t_back: tb });
        }
        prev = u.or(prev);
        tb *= 2.0;
    }
}

/// `u(0) = J'/J` of the unstable Jacobi field, starting from `T_back` and
/// doubling it until the value settles.
pub fn unstable_slope(model: &SurfaceModel, v: &UnitTangent, t_back: f64, tol: f64) -> Result<f64> {
    unstable_slope_diagnosed(model, v, t_back, tol).map(|s| s.u)
}

/// `‖(J, J')(T)‖` for the unit-norm unstable initial condition `(1, u)/‖(1, u)‖`.
pub fn dphi_growth(model: &SurfaceModel, v: &UnitTangent, t: f64, tol: f64) -> Result<f64> {
    let u = unstable_slope(model, v, DEFAULT_T_BACK, tol)?;
    growth_with_slope(model, v, t, u, tol)
}

/// Growth of the Jacobi field with initial slope `u` over `[0, t]`.
pub fn growth_with_slope(model: &SurfaceModel, v: &UnitTangent, t: f64, u: f64, tol: f64) -> Result<f64> {
    let n = 1f64.hypot(u);
    let end = jacobi_evolve(model, v, t, JacobiState::new(1.0 / n, u / n), tol)?;
    Ok(end.norm())
}

/// `(1/T) log dphi_growth`; a finite-T estimate.
pub fn lyapunov_exponent(model: &SurfaceModel, v: &UnitTangent, t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("T must be positive, got {t}")));
    }
    Ok(dphi_growth(model, v, t, tol)?.ln() / t)
}

/// Largest `|K|` sampled along `φ_t(θ)` for `t ∈ [-T, T]`.
pub fn max_abs_curvature(model: &SurfaceModel, v: &UnitTangent, t: f64, tol: f64) -> Result<f64> {
    match model {
        SurfaceModel::ConstantNegative(_) => Ok(1.0),
        SurfaceModel::Collar(prof) => {
            let dt = 0.01;
            let mut worst: f64 = 0.0;
            for dir in [t, -t] {
                let traj = trajectory(model, v, dir, dt, tol)?;
                for (_, w) in &traj.samples {
                    worst = worst.max(prof.curvature(w.collar_coords()?.0).abs());
                }
            }
            Ok(worst)
        }
    }
}

/// Higher rank iff the sampled `|K|` along `[-T, T]` stays below `tol`.
pub fn rank_classify(model: &SurfaceModel, v: &UnitTangent, t: f64, tol: f64) -> Result<RankLabel> {
    let flow_tol = tol.clamp(1e-12, 1e-8);
    let max_k = max_abs_curvature(model, v, t, flow_tol)?;
    let lyapunov = lyapunov_exponent(model, v, t, flow_tol)?;
    let label = if max_k < tol { Rank::Higher } else { Rank::RankOne };
    Ok(RankLabel { label, max_abs_curvature: max_k, lyapunov })
}

/// Central finite-difference estimate of `‖Dφ_t ξ‖` for the perpendicular
/// variation `ξ = (J0, J0')`, using step `delta`. Serves as an independent
/// check of [`jacobi_evolve`].
pub fn finite_difference_growth(
    model: &SurfaceModel,
    v: &UnitTangent,
    t: f64,
    init: JacobiState,
    delta: f64,
    tol: f64,
) -> Result<f64> {
    match model {
        SurfaceModel::ConstantNegative(_) => {
            let p = v.plane_point()?;
            let perturb = |eps: f64| {
                // Move along the normal geodesic, then rotate by eps * J0'.
                let m = IsometryMatrix::frame(p, v.angle + FRAC_PI_2);
                let q = HPoint { x: 0.0, y: (eps * init.j).exp() };
                let base = m.apply(q);
                let dir = m.push_angle(q, FRAC_PI_2) - FRAC_PI_2 + eps * init.jp;
                UnitTangent::plane(base, dir)
            };
            let plus = geodesic_flow(model, &perturb(delta), t, tol)?;
            let minus = geodesic_flow(model, &perturb(-delta), t, tol)?;
            Ok(plane_sasaki(&plus, &minus)? / (2.0 * delta))
        }
        SurfaceModel::Collar(prof) => {
            let [r, th, psi] = collar_state(v)?;
            let perturb = |eps: f64| {
                // Horizontal lift of the normal displacement, plus a vertical part.
                let dr = -eps * init.j * psi.sin();
                let dth = eps * init.j * psi.cos() / prof.f(r);
                UnitTangent::collar(r + dr, th + dth, psi - prof.df(r) * dth + eps * init.jp)
            };
            let plus = geodesic_flow(model, &perturb(delta), t, tol)?;
            let minus = geodesic_flow(model, &perturb(-delta), t, tol)?;
            let (r1, t1) = plus.collar_coords()?;
            let (r2, t2) = minus.collar_coords()?;
            let rm = 0.5 * (r1 + r2);
            let (dr, dth) = (r1 - r2, t1 - t2);
            let dpsi = crate::hyperbolic::wrap_angle(plus.angle - minus.angle) + prof.df(rm) * dth;
            let horizontal = dr.hypot(prof.f(rm) * dth);
            Ok(horizontal.hypot(dpsi) / (2.0 * delta))
        }
    }
}
