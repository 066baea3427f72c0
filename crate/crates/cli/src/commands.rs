//! Subcommand bodies. Each fills a [`Run`] with tables and JSON reports.

use std::f64::consts::FRAC_PI_2;

use flatstrip::asymptotic::busemann;
use flatstrip::budget::Budget;
use flatstrip::ergodic::{
    class_entropy_check, count_separated, entropy_estimate, growth_rate_per, mme_diagnostics, ruelle_check, Observable,
    OrbitMeasure, Sampler, SamplerKind,
};
use flatstrip::flow::{dphi_growth, jacobi_evolve, rank_classify, trajectory, JacobiState, Rank};
use flatstrip::hyperbolic::HPoint;
use flatstrip::sampling::{perturb, random_band_tangent, random_tangent};
use flatstrip::shadowing::{enumerate_periodic_orbits, make_pseudo_orbit, shadow_search, OrbitSource, Skeleton};
use flatstrip::strips::{
    detect_strip, expansivity_probe, q_config, quotient_class, semiconjugacy_check, ClassParams, FlowKind, ScanSpec,
};
use flatstrip::{build_collar, ChartPoint, SurfaceModel, UnitTangent};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::output::{cell, Run, Table};
use crate::CliError;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub model: SurfaceModel,
    pub rng: ChaCha8Rng,
    pub budget: Budget,
    pub run: Run,
}

impl Context {
    fn tol(&self) -> Result<f64, CliError> {
        self.cfg.f64("tol")
    }

    /// Spends one unit of the run budget, flagging the run partial when it is gone.
    fn spend(&mut self) -> bool {
        let ok = self.budget.spend();
        if !ok {
            self.run.partial = true;
        }
        ok
    }

    /// Model-appropriate sample: on the collar, every other one is a band tangent.
    fn sample(&mut self, k: usize) -> Result<UnitTangent, CliError> {
        match &self.model {
            SurfaceModel::Collar(prof) if k % 2 == 0 => Ok(random_band_tangent(prof, &mut self.rng)),
            m => Ok(random_tangent(m, &mut self.rng)?),
        }
    }
}

fn coords(v: &UnitTangent) -> (f64, f64) {
    match v.base {
        ChartPoint::Plane(p) => (p.x, p.y),
        ChartPoint::Collar { r, theta } => (r, theta),
    }
}

fn coord_names(model: &SurfaceModel) -> [&'static str; 2] {
    match model {
        SurfaceModel::ConstantNegative(_) => ["x", "y"],
        SurfaceModel::Collar(_) => ["r", "theta"],
    }
}

fn tangent_from(model: &SurfaceModel, v: &[f64]) -> Result<UnitTangent, CliError> {
    let [a, b, angle] = v else {
        return Err(CliError::Config("flow.start needs three numbers".into()));
    };
    Ok(match model {
        SurfaceModel::ConstantNegative(_) => UnitTangent::plane(HPoint::new(*a, *b)?, *angle),
        SurfaceModel::Collar(_) => UnitTangent::collar(*a, *b, *angle),
    })
}

pub fn flow(ctx: &mut Context) -> Result<(), CliError> {
    let v = tangent_from(&ctx.model, &ctx.cfg.list("flow.start")?)?;
    let traj = trajectory(&ctx.model, &v, ctx.cfg.f64("flow.T")?, ctx.cfg.f64("flow.dt")?, ctx.tol()?)?;
    let [a, b] = coord_names(&ctx.model);
    let mut t = Table::new(&["t", a, b, "angle"]);
    for (time, w) in &traj.samples {
        let (x, y) = coords(w);
        t.push(vec![cell(time), cell(x), cell(y), cell(w.angle)]);
    }
    ctx.run.write_table("trajectory", &t)
}

pub fn jacobi(ctx: &mut Context) -> Result<(), CliError> {
    let (n, horizon, tol) = (ctx.cfg.usize("jacobi.samples")?, ctx.cfg.f64("jacobi.T")?, ctx.tol()?);
    let [a, b] = coord_names(&ctx.model);
    let mut t = Table::new(&["index", a, b, "angle", "lyapunov", "max_abs_curvature", "rank"]);
    for k in 0..n {
        if !ctx.spend() {
            break;
        }
        let v = ctx.sample(k)?;
        let lab = rank_classify(&ctx.model, &v, horizon, tol.max(1e-9))?;
        let (x, y) = coords(&v);
        let rank = if lab.label == Rank::Higher { "higher" } else { "rank-one" };
        t.push(vec![cell(k), cell(x), cell(y), cell(v.angle), cell(lab.lyapunov), cell(lab.max_abs_curvature), cell(rank)]);
    }
    ctx.run.budget_used.insert("jacobi.samples".into(), t.len() as u64);
    ctx.run.write_table("jacobi", &t)
}

pub fn busemann_grid(ctx: &mut Context) -> Result<(), CliError> {
    let (n, horizon) = (ctx.cfg.usize("busemann.grid")?.max(2), ctx.cfg.f64("busemann.T")?);
    let v = UnitTangent::plane(HPoint::I, FRAC_PI_2);
    let mut t = Table::new(&["x", "y", "value", "t_used", "error_bound"]);
    for i in 0..n {
        for j in 0..n {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let y = 0.5 * 4f64.powf(j as f64 / (n - 1) as f64);
            let b = busemann(&ctx.model, &v, &ChartPoint::Plane(HPoint::new(x, y)?), horizon)?;
            t.push(vec![cell(x), cell(y), cell(b.value), cell(b.t_used), cell(b.error_bound)]);
        }
    }
    ctx.run.write_table("busemann", &t)
}

fn class_params(ctx: &Context, step_key: &str) -> Result<ClassParams, CliError> {
    let q = q_config(&ctx.model)?;
    Ok(ClassParams {
        scan: ScanSpec::new(q, ctx.cfg.f64(step_key)?)?,
        horizon: ctx.cfg.f64("strips.horizon")?,
        bound: ctx.cfg.f64("strips.bound")?,
    })
}

pub fn strips(ctx: &mut Context) -> Result<(), CliError> {
    let p = class_params(ctx, "strips.step")?;
    let [a, b] = coord_names(&ctx.model);
    let mut t = Table::new(&["index", a, b, "angle", "width", "lo", "hi", "uncertainty", "trivial", "truncated"]);
    for k in 0..ctx.cfg.usize("strips.samples")? {
        if !ctx.spend() {
            break;
        }
        let v = ctx.sample(k)?;
        let s = detect_strip(&ctx.model, &v, p.scan, p.horizon, p.bound)?;
        let (x, y) = coords(&v);
        t.push(vec![
            cell(k),
            cell(x),
            cell(y),
            cell(v.angle),
            cell(s.width),
            cell(s.lo),
            cell(s.hi),
            cell(s.uncertainty),
            cell(s.is_trivial()),
            cell(s.truncated),
        ]);
    }
    ctx.run.budget_used.insert("strips.samples".into(), t.len() as u64);
    ctx.run.write_table("strips", &t)
}

pub fn quotient(ctx: &mut Context) -> Result<(), CliError> {
    let p = class_params(ctx, "quotient.step")?;
    let (n, eps) = (ctx.cfg.usize("quotient.samples")?, ctx.cfg.f64("quotient.eps")?);
    let mut pairs = Vec::with_capacity(n);
    let mut reports = Vec::with_capacity(n);
    for k in 0..n {
        let a = ctx.sample(2 * k)?;
        let b = match &ctx.model {
            SurfaceModel::Collar(prof) => {
                let (r, theta) = a.collar_coords()?;
                let h = prof.half_width();
                UnitTangent::collar((r + ctx.rng.gen_range(-0.15..0.15)).clamp(-h, h), theta, a.angle)
            }
            m => perturb(m, &a, 0.02, &mut ctx.rng)?,
        };
        reports.push(quotient_class(&ctx.model, &a, p.scan, p.horizon, p.bound)?.report(&ctx.model));
        pairs.push((a, b));
    }
    ctx.run.write_json("classes.json", &reports)?;
    let mut t = Table::new(&["flow", "epsilon", "checked", "same_orbit", "violations", "partial"]);
    for flow in [FlowKind::Original, FlowKind::Quotient] {
        let r = expansivity_probe(&ctx.model, flow, eps, &pairs, p.horizon, p, &mut ctx.budget)?;
        ctx.run.partial |= r.partial;
        let name = if flow == FlowKind::Original { "original" } else { "quotient" };
        t.push(vec![cell(name), cell(eps), cell(r.checked), cell(r.same_orbit), cell(r.violations.len()), cell(r.partial)]);
    }
    ctx.run.budget_used.insert("quotient.pairs".into(), ctx.budget.used());
    ctx.run.write_table("expansivity", &t)
}

pub fn shadow(ctx: &mut Context) -> Result<(), CliError> {
    let (n, segs, a) = (ctx.cfg.usize("shadow.skeletons")?, ctx.cfg.usize("shadow.segments")?, ctx.cfg.f64("shadow.a")?);
    let deltas = ctx.cfg.list("shadow.deltas")?;
    let mut t = Table::new(&["skeleton", "delta", "measured_jump", "epsilon", "reparam_dev"]);
    'outer: for k in 0..n {
        let sk = Skeleton::random(&ctx.model, segs, a, &mut ctx.rng)?;
        for &delta in &deltas {
            if ctx.budget.is_exhausted() {
                ctx.run.partial = true;
                break 'outer;
            }
            let po = make_pseudo_orbit(&ctx.model, &sk.segments(&ctx.model, 0.9 * delta)?, delta, a, false)?;
            let s = shadow_search(&ctx.model, &po, &mut ctx.budget)?;
            t.push(vec![cell(k), cell(delta), cell(po.delta), cell(s.epsilon), cell(s.reparam_dev)]);
        }
    }
    ctx.run.budget_used.insert("shadow.path_samples".into(), ctx.budget.used());
    ctx.run.write_table("shadow", &t)
}

pub fn periodic(ctx: &mut Context) -> Result<(), CliError> {
    let table = enumerate_periodic_orbits(&ctx.model, ctx.cfg.f64("periodic.T")?)?;
    let mut t = Table::new(&["word", "period", "x", "y", "angle", "primitive"]);
    for r in &table.records {
        let word = match &r.source {
            OrbitSource::Word(w) => w.to_string(),
            OrbitSource::Shooting { .. } => String::new(),
        };
        let (x, y) = coords(&r.initial);
        t.push(vec![word, cell(r.period), cell(x), cell(y), cell(r.initial.angle), cell(r.primitive)]);
    }
    ctx.run.write_table("periodic", &t)?;
    let grid = ctx.cfg.list("periodic.T_grid")?;
    let mut g = Table::new(&["T", "count", "slope", "corrected_slope"]);
    for (i, &horizon) in grid.iter().enumerate() {
        let (slope, corrected) = if i == 0 {
            (String::new(), String::new())
        } else {
            let rate = growth_rate_per(&table, &grid[..=i])?;
            (cell(rate.slope), cell(rate.corrected_slope))
        };
        g.push(vec![cell(horizon), cell(table.count_up_to(horizon)), slope, corrected]);
    }
    ctx.run.write_table("growth", &g)
}

pub fn entropy(ctx: &mut Context) -> Result<(), CliError> {
    let count = ctx.cfg.usize("entropy.count")?;
    let seed = ctx.rng.gen();
    let kind = match ctx.cfg.str("entropy.sampler") {
        "arc" => {
            let centre = ctx.sample(1)?;
            SamplerKind::UnstableArc { centre, length: ctx.cfg.f64("entropy.arc")? }
        }
        "liouville" => SamplerKind::Liouville,
        "band" => SamplerKind::BandStrip,
        other => return Err(CliError::Config(format!("entropy.sampler: unknown sampler '{other}'"))),
    };
    let sampler = Sampler::new(kind, seed, count);
    let step = ctx.cfg.f64("entropy.step")?;
    let mut counts = Vec::new();
    let mut t = Table::new(&["T", "step", "eps", "M", "candidates_tried", "lower_bound_only"]);
    for &eps in &ctx.cfg.list("entropy.eps")? {
        for &horizon in &ctx.cfg.list("entropy.T_grid")? {
            let c = count_separated(&ctx.model, &sampler, horizon, eps, step, &mut ctx.budget)?;
            ctx.run.partial |= c.lower_bound_only;
            t.push(vec![cell(c.t), cell(c.step), cell(c.eps), cell(c.m), cell(c.candidates_tried), cell(c.lower_bound_only)]);
            counts.push(c);
        }
    }
    ctx.run.budget_used.insert("entropy.candidates".into(), ctx.budget.used());
    ctx.run.write_table("counts", &t)?;
    ctx.run.write_json("entropy.json", &entropy_estimate(&counts)?)
}

pub fn mme(ctx: &mut Context) -> Result<(), CliError> {
    let grid = ctx.cfg.list("mme.T_grid")?;
    let window = ctx.cfg.f64("mme.window")?;
    let t_max = grid.iter().copied().fold(0.0, f64::max);
    let table = enumerate_periodic_orbits(&ctx.model, t_max + window)?;
    let obs = Observable::battery(&ctx.model)?;
    let rep = mme_diagnostics(&ctx.model, &table, &grid, &obs, window, ctx.cfg.usize("mme.cells")?)?;
    let mut t = Table::new(&["T", "observable", "value", "difference"]);
    for r in &rep.rows {
        t.push(vec![cell(r.t), r.observable.clone(), cell(r.value), r.difference.map_or(String::new(), cell)]);
    }
    ctx.run.write_table("mme", &t)?;
    ctx.run.write_json("mme_summary.json", &rep.summaries)
}

type Check = (&'static str, fn() -> flatstrip::Result<(bool, String)>);

/// Fast invariant checks on the built-in models.
const CHECKS: &[Check] = &[
    ("side-pairing", || {
        let r = SurfaceModel::genus2().group()?.side_pairing_residual();
        Ok((r < 1e-10, format!("residual {r:.2e}")))
    }),
    ("jacobi-closed-form", || {
        let m = SurfaceModel::genus2();
        let j = jacobi_evolve(&m, &UnitTangent::plane(HPoint::I, 0.0), 1.0, JacobiState::new(0.0, 1.0), 1e-12)?;
        let e = (j.j - 1f64.sinh()).abs().max((j.jp - 1f64.cosh()).abs());
        Ok((e < 1e-8, format!("error {e:.2e}")))
    }),
    ("unstable-growth-monotone", || {
        let c = build_collar(1.0, 0.5, 0.5)?;
        let v = UnitTangent::collar(0.3, 0.0, 0.7);
        let g: Vec<f64> = [0.5, 1.0, 2.0, 4.0].iter().map(|&t| dphi_growth(&c, &v, t, 1e-10)).collect::<Result<_, _>>()?;
        Ok((g.windows(2).all(|w| w[1] >= w[0] - 1e-9), format!("{g:?}")))
    }),
    ("busemann-cocycle", || {
        let m = SurfaceModel::genus2();
        let v = UnitTangent::plane(HPoint::new(0.4, 0.8)?, 2.2);
        let p = flatstrip::flow::geodesic_flow(&m, &v, 2.0, 1e-12)?.base;
        let e = (busemann(&m, &v, &p, 30.0)?.value + 2.0).abs();
        Ok((e < 1e-6, format!("error {e:.2e}")))
    }),
    ("band-strip-width", || {
        let c = build_collar(1.0, 0.5, 0.5)?;
        let s = detect_strip(&c, &UnitTangent::collar(0.0, 0.0, FRAC_PI_2), ScanSpec::new(1.0, 0.01)?, 20.0, 1.0)?;
        Ok(((s.width - 0.5).abs() <= 0.01, format!("width {}", s.width)))
    }),
    ("constant-strips-trivial", || {
        let m = SurfaceModel::genus2();
        let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let mut trivial = 0;
        for _ in 0..20 {
            let v = random_tangent(&m, &mut rng)?;
            trivial += detect_strip(&m, &v, ScanSpec::covering(1.0), 20.0, 1.0)?.is_trivial() as usize;
        }
        Ok((trivial == 20, format!("{trivial}/20 trivial")))
    }),
    ("semiconjugacy", || {
        let c = build_collar(1.0, 0.5, 0.5)?;
        let r = semiconjugacy_check(&c, &UnitTangent::collar(0.1, 0.0, FRAC_PI_2), 1.7, 10, ScanSpec::new(1.0, 0.01)?, 20.0, 1.0)?;
        Ok((r.holds(), format!("{}/{} members agree", r.members_agreeing, r.members_checked)))
    }),
    ("shadowing-halving", || {
        let m = SurfaceModel::genus2();
        let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2);
        let mut eps = Vec::new();
        let sk = Skeleton::random(&m, 4, 2.0, &mut rng)?;
        for delta in [0.08, 0.04, 0.02] {
            let po = make_pseudo_orbit(&m, &sk.segments(&m, 0.9 * delta)?, delta, 2.0, false)?;
            let s = shadow_search(&m, &po, &mut Budget::unlimited())?;
            if s.reparam_dev > s.epsilon {
                return Ok((false, "reparametrization exceeds ε".into()));
            }
            eps.push(s.epsilon);
        }
        Ok((eps.windows(2).all(|w| w[1] < w[0]), format!("{eps:?}")))
    }),
    ("separated-monotone-in-eps", || {
        let m = SurfaceModel::genus2();
        let s = Sampler::new(SamplerKind::UnstableArc { centre: UnitTangent::plane(HPoint::I, 0.3), length: 0.1 }, 3, 300);
        let a = count_separated(&m, &s, 3.0, 0.1, 1.0, &mut Budget::unlimited())?.m;
        let b = count_separated(&m, &s, 3.0, 0.2, 1.0, &mut Budget::unlimited())?.m;
        Ok((a >= b, format!("M(0.1) = {a}, M(0.2) = {b}")))
    }),
    ("systole-count", || {
        let t = enumerate_periodic_orbits(&SurfaceModel::genus2(), 3.1)?;
        Ok((t.records.len() == 12, format!("{} orbits up to 3.1", t.records.len())))
    }),
    ("ruelle-band", || {
        let c = build_collar(1.0, 0.5, 0.5)?;
        let r = ruelle_check(&c, &OrbitMeasure::single(UnitTangent::collar(0.0, 0.0, FRAC_PI_2), std::f64::consts::TAU), None, 0.05)?;
        Ok((r.holds && r.lambda_integral.abs() < 1e-9, format!("λ = {:.1e}", r.lambda_integral)))
    }),
    ("class-entropy-zero", || {
        let c = build_collar(1.0, 0.5, 0.5)?;
        let class = quotient_class(&c, &UnitTangent::collar(0.0, 0.0, FRAC_PI_2), ScanSpec::new(1.0, 0.01)?, 20.0, 1.0)?;
        let r = class_entropy_check(&c, &class, &[1, 5, 10, 20], 0.05)?;
        Ok((r.constant, format!("{:?}", r.sizes)))
    }),
];

/// Runs the invariant checks; `Ok(false)` when any fails.
pub fn checks(ctx: &mut Context) -> Result<bool, CliError> {
    let mut t = Table::new(&["check", "pass", "detail"]);
    let mut all = true;
    for (name, run) in CHECKS {
        if !ctx.spend() {
            break;
        }
        let (pass, detail) = run()?;
        all &= pass;
        t.push(vec![cell(name), cell(pass), detail.replace(',', ";")]);
    }
    ctx.run.budget_used.insert("checks".into(), t.len() as u64);
    ctx.run.write_table("checks", &t)?;
    Ok(all)
}
