//! Flat strips, the equivalence relation collapsing them, quotient classes,
//! the quotient flow and expansivity probes.

use serde::{Deserialize, Serialize};

use crate::asymptotic::{are_biasymptotic, are_forward_asymptotic, matched_profile, sample_orbit, Biasymptotic};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::flow::geodesic_flow;
use crate::hyperbolic::{HPoint, IsometryMatrix};
use crate::matching::best_shift;
use crate::surface::{lifted_sasaki, sasaki_distance, SurfaceModel, UnitTangent};

pub const DEFAULT_SCAN_STEP: f64 = 1e-3;
/// Half-length of the time window used by bi-asymptoticity checks.
pub const DEFAULT_HORIZON: f64 = 20.0;
/// Pairs whose matched distance stays below this are taken to share an orbit.
const SAME_ORBIT_TOL: f64 = 1e-6;
/// Classes are compared through at most this many members.
const HAUSDORFF_MEMBERS: usize = 33;
const FLOW_TOL: f64 = 1e-10;

/// Offsets scanned along the transversal: `[-range, range]` at `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub range: f64,
    pub step: f64,
}

impl ScanSpec {
    pub fn new(range: f64, step: f64) -> Result<Self> {
        if !(range > 0.0 && step > 0.0) || range / step > 1e6 {
            return Err(Error::InvalidInput(format!("bad scan: range {range}, step {step}")));
        }
        Ok(Self { range, step })
    }

    /// Covers `[-q, q]` at the default step.
    pub fn covering(q: f64) -> Self {
        Self { range: q, step: DEFAULT_SCAN_STEP }
    }
}

/// Default bound on strip widths: 1.5 × the widest strip observed, floor 1.
/// The widest strip of the collar is the band itself.
pub fn q_config(model: &SurfaceModel) -> Result<f64> {
    match model {
        SurfaceModel::ConstantNegative(_) => Ok(1.0),
        SurfaceModel::Collar(prof) => {
            let centre = UnitTangent::collar(0.0, 0.0, std::f64::consts::FRAC_PI_2);
            let probe = 2.0 * prof.w + 1.0;
            let strip = detect_strip(model, &centre, ScanSpec::covering(probe), DEFAULT_HORIZON, 2.0 * probe)?;
            Ok(q_from_widths([strip.width]))
        }
    }
}

pub fn q_from_widths(widths: impl IntoIterator<Item = f64>) -> f64 {
    (1.5 * widths.into_iter().fold(0.0, f64::max)).max(1.0)
}

/// Point at signed arc-length `offset` along the transversal through `v`:
/// the stable horocycle on the constant model, a pure `r`-shift on the collar.
pub fn transversal_member(model: &SurfaceModel, v: &UnitTangent, offset: f64) -> Result<UnitTangent> {
    match model {
        SurfaceModel::ConstantNegative(_) => {
            let m = IsometryMatrix::frame(v.plane_point()?, v.angle);
            let q = HPoint { x: offset, y: 1.0 };
            Ok(UnitTangent::plane(m.apply(q), m.push_angle(q, std::f64::consts::FRAC_PI_2)))
        }
        SurfaceModel::Collar(_) => {
            let (r, theta) = v.collar_coords()?;
            Ok(UnitTangent::collar(r + offset, theta, v.angle))
        }
    }
}

/// Cross-section of the strip through `base`: the maximal interval of
/// transversal offsets `[lo, hi]` bi-asymptotic to `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub base: UnitTangent,
    pub step: f64,
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    /// Scan resolution on each end.
    pub uncertainty: f64,
    /// An end of the interval was decided as indeterminate rather than "no".
    pub boundary_indeterminate: bool,
    /// The scan hit its range before leaving the strip.
    pub truncated: bool,
    pub offsets: Vec<f64>,
    pub members: Vec<UnitTangent>,
}

impl Strip {
    /// Below twice the scan step a strip cannot be told from a single geodesic.
    pub fn is_trivial(&self) -> bool {
        self.width < 2.0 * self.step
    }

    fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Evenly spaced members including both ends, at most `n` of them.
    pub fn member_sample(&self, n: usize) -> Vec<UnitTangent> {
        let len = self.members.len();
        if len <= n || n < 2 {
            return self.members.clone();
        }
        (0..n).map(|k| self.members[k * (len - 1) / (n - 1)]).collect()
    }
}

/// Scans the transversal through `v` outward from offset 0 in both directions.
pub fn detect_strip(model: &SurfaceModel, v: &UnitTangent, scan: ScanSpec, t: f64, c: f64) -> Result<Strip> {
    let scan = ScanSpec::new(scan.range, scan.step)?;
    model.check(v)?;
    let steps = (scan.range / scan.step).floor() as i64;
    let mut indeterminate = false;
    let mut truncated = false;
    let mut side = |dir: i64| -> Result<i64> {
        for k in 1..=steps {
            let w = transversal_member(model, v, (dir * k) as f64 * scan.step)?;
            match are_biasymptotic(model, v, &w, t, c)? {
                Biasymptotic::Yes { .. } => {}
                Biasymptotic::No { .. } => return Ok(k - 1),
                Biasymptotic::Indeterminate { .. } => {
                    indeterminate = true;
                    return Ok(k - 1);
                }
            }
        }
        truncated = true;
        Ok(steps)
    };
    let up = side(1)?;
    let down = side(-1)?;
    let offsets: Vec<f64> = (-down..=up).map(|k| k as f64 * scan.step).collect();
    let members = offsets.iter().map(|&s| transversal_member(model, v, s)).collect::<Result<Vec<_>>>()?;
    let (lo, hi) = (-(down as f64) * scan.step, up as f64 * scan.step);
    Ok(Strip {
        base: *v,
        step: scan.step,
        lo,
        hi,
        width: hi - lo,
        uncertainty: scan.step,
        boundary_indeterminate: indeterminate,
        truncated,
        offsets,
        members,
    })
}

/// `η ∼ θ`: `η` is forward asymptotic to `θ` and the two are bi-asymptotic.
pub fn equivalence_check(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent, t: f64, c: f64) -> Result<Biasymptotic> {
    if let SurfaceModel::ConstantNegative(_) = model {
        if !are_forward_asymptotic(model, a, b, 1e-10)? {
            return Ok(Biasymptotic::No { sup: f64::INFINITY });
        }
    }
    are_biasymptotic(model, a, b, t, c)
}

/// An equivalence class `[θ]`: the strip through `θ`, represented by the
/// midpoint of its cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientClass {
    pub strip: Strip,
    pub representative: UnitTangent,
}

impl QuotientClass {
    pub fn from_strip(model: &SurfaceModel, strip: Strip) -> Result<Self> {
        let representative = transversal_member(model, &strip.base, strip.midpoint())?;
        Ok(Self { strip, representative })
    }

    pub fn is_trivial(&self) -> bool {
        self.strip.is_trivial()
    }

    pub fn members(&self) -> Vec<UnitTangent> {
        if self.is_trivial() {
            vec![self.representative]
        } else {
            self.strip.member_sample(HAUSDORFF_MEMBERS)
        }
    }

    /// Equality as points of the quotient: same member set up to `tol`.
    pub fn same_point(&self, model: &SurfaceModel, other: &QuotientClass, tol: f64) -> Result<bool> {
        Ok(quotient_distance(model, self, other)? <= tol)
    }

    pub fn report(&self, model: &SurfaceModel) -> StripReport {
        StripReport {
            model: model.kind_name().to_string(),
            representative: self.representative,
            width: self.strip.width,
            uncertainty: self.strip.uncertainty,
            member_count: self.strip.members.len(),
            trivial: self.is_trivial(),
            boundary_indeterminate: self.strip.boundary_indeterminate,
            truncated: self.strip.truncated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub model: String,
    pub representative: UnitTangent,
    pub width: f64,
    pub uncertainty: f64,
    pub member_count: usize,
    pub trivial: bool,
    pub boundary_indeterminate: bool,
    pub truncated: bool,
}

/// `χ(θ)`.
pub fn quotient_class(model: &SurfaceModel, v: &UnitTangent, scan: ScanSpec, t: f64, c: f64) -> Result<QuotientClass> {
    QuotientClass::from_strip(model, detect_strip(model, v, scan, t, c)?)
}

fn hausdorff(a: &[UnitTangent], b: &[UnitTangent], mut dist: impl FnMut(&UnitTangent, &UnitTangent) -> f64) -> f64 {
    let mut directed = |x: &[UnitTangent], y: &[UnitTangent]| {
        x.iter().map(|p| y.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Hausdorff distance between the (sampled) member sets under the Sasaki proxy.
pub fn quotient_distance(model: &SurfaceModel, a: &QuotientClass, b: &QuotientClass) -> Result<f64> {
    let (ma, mb) = (a.members(), b.members());
    let mut err = None;
    let d = hausdorff(&ma, &mb, |x, y| {
        sasaki_distance(model, x, y).unwrap_or_else(|e| {
            err = Some(e);
            f64::INFINITY
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(d),
    }
}

/// `ψ_t([θ]) = [φ_t θ]`: flows the representative and re-detects its class.
pub fn quotient_flow(model: &SurfaceModel, class: &QuotientClass, t_flow: f64, scan: ScanSpec, t: f64, c: f64) -> Result<QuotientClass> {
    let moved = geodesic_flow(model, &class.representative, t_flow, FLOW_TOL)?;
    quotient_class(model, &moved, scan, t, c)
}

/// Outcome of a semi-conjugacy check at one `(θ, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiconjugacyReport {
    /// `φ_t θ ∼ rep(ψ_t(χθ))`.
    pub representative: Biasymptotic,
    /// `φ_t η ∼ φ_t θ` for sampled members `η` of `χθ`.
    pub members_agreeing: usize,
    pub members_checked: usize,
}

impl SemiconjugacyReport {
    pub fn holds(&self) -> bool {
        self.representative.is_yes() && self.members_agreeing == self.members_checked
    }
}

/// Checks `χ(φ_t θ) = ψ_t(χθ)` through the representative and through up to
/// `n_members` members of `χθ`.
pub fn semiconjugacy_check(
    model: &SurfaceModel,
    v: &UnitTangent,
    t_flow: f64,
    n_members: usize,
    scan: ScanSpec,
    t: f64,
    c: f64,
) -> Result<SemiconjugacyReport> {
    let class = quotient_class(model, v, scan, t, c)?;
    let flowed_class = quotient_flow(model, &class, t_flow, scan, t, c)?;
    let moved = geodesic_flow(model, v, t_flow, FLOW_TOL)?;
    let representative = equivalence_check(model, &moved, &flowed_class.representative, t, c)?;
    let members = class.strip.member_sample(n_members);
    let mut agreeing = 0;
    for m in &members {
        let mm = geodesic_flow(model, m, t_flow, FLOW_TOL)?;
        if equivalence_check(model, &mm, &moved, t, c)?.is_yes() {
            agreeing += 1;
        }
    }
    Ok(SemiconjugacyReport { representative, members_agreeing: agreeing, members_checked: members.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowKind {
    Original,
    Quotient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub first: UnitTangent,
    pub second: UnitTangent,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansivityReport {
    pub flow: FlowKind,
    pub epsilon: f64,
    pub checked: usize,
    /// Pairs skipped because they lie on one orbit (of the flow probed).
    pub same_orbit: usize,
    pub violations: Vec<Violation>,
    /// The budget ran out before all pairs were checked.
    pub partial: bool,
}

/// Largest `ε` for which the model expects no violators on the quotient flow
/// (and, on the constant model, on the original flow): the injectivity radius
/// on the constant model, half the band width (capped by `c`) on the collar.
pub fn expansivity_threshold(model: &SurfaceModel) -> f64 {
    match model {
        SurfaceModel::ConstantNegative(g) => g.injectivity_radius(),
        SurfaceModel::Collar(p) => p.half_width().min(p.c),
    }
}

/// Parameters for class detection inside the quotient probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub scan: ScanSpec,
    pub horizon: f64,
    pub bound: f64,
}

/// Searches the given pairs (compared on the universal cover, lifts as given)
/// for distinct orbits that stay within `ε` of each other over `[-T, T]` up
/// to monotone reparametrization.
pub fn expansivity_probe(
    model: &SurfaceModel,
    flow: FlowKind,
    eps: f64,
    pairs: &[(UnitTangent, UnitTangent)],
    t: f64,
    class_params: ClassParams,
    budget: &mut Budget,
) -> Result<ExpansivityReport> {
    if !(eps > 0.0 && t > 0.0) {
        return Err(Error::InvalidInput(format!("need ε > 0 and T > 0, got {eps}, {t}")));
    }
    let mut report = ExpansivityReport { flow, epsilon: eps, checked: 0, same_orbit: 0, violations: vec![], partial: false };
    for (index, (a, b)) in pairs.iter().enumerate() {
        if !budget.spend() {
            report.partial = true;
            break;
        }
        report.checked += 1;
        let sup = match flow {
            FlowKind::Original => original_sup(model, a, b, t)?,
            FlowKind::Quotient => quotient_sup(model, a, b, t, eps, class_params)?,
        };
        match sup {
            None => report.same_orbit += 1,
            Some(s) if s <= eps => report.violations.push(Violation { index, first: *a, second: *b, sup: s }),
            Some(_) => {}
        }
    }
    report.violations.sort_by_key(|v| v.index);
    Ok(report)
}

/// Sup of the matched Sasaki distance, or `None` on a common orbit.
fn original_sup(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent, t: f64) -> Result<Option<f64>> {
    let profile = matched_profile(model, a, b, t, FLOW_TOL, |x, y| lifted_sasaki(model, x, y).unwrap_or(f64::INFINITY))?;
    let sup = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok((sup > SAME_ORBIT_TOL).then_some(sup))
}

/// Sup over time of the windowed-minimum Hausdorff distance between the
/// flowed classes, stopping early once it exceeds `ε`. `None` when the two
/// classes lie on one quotient orbit.
fn quotient_sup(model: &SurfaceModel, a: &UnitTangent, b: &UnitTangent, t: f64, eps: f64, p: ClassParams) -> Result<Option<f64>> {
    let ca = quotient_class(model, a, p.scan, p.horizon, p.bound)?;
    let cb = quotient_class(model, b, p.scan, p.horizon, p.bound)?;
    let dist = |x: &UnitTangent, y: &UnitTangent| lifted_sasaki(model, x, y).unwrap_or(f64::INFINITY);

    let oa = sample_orbit(model, &ca.representative, t, FLOW_TOL)?;
    let span_b = 1.5 * t + 1.0;
    let ob = sample_orbit(model, &cb.representative, span_b, FLOW_TOL)?;
    let shift = best_shift(&oa, &ob, 0.5 * t, dist);
    let shifted = geodesic_flow(model, &ca.representative, shift, FLOW_TOL)?;
    if equivalence_check(model, &shifted, &cb.representative, p.horizon, p.bound)?.is_yes() {
        return Ok(None);
    }

    let orbits = |class: &QuotientClass, span: f64| -> Result<Vec<Vec<(f64, UnitTangent)>>> {
        class.members().iter().map(|m| sample_orbit(model, m, span, FLOW_TOL)).collect()
    };
    let (ma, mb) = (orbits(&ca, t)?, orbits(&cb, span_b)?);
    let at = |orbits: &[Vec<(f64, UnitTangent)>], k: usize| orbits.iter().map(|o| o[k].1).collect::<Vec<_>>();
    let dt = oa[1].0 - oa[0].0;
    let b0 = ob.len() / 2;
    let window = (1.0 / dt).round() as isize;
    let stride = 2;
    let mut sup: f64 = 0.0;
    for i in (0..oa.len()).step_by(stride) {
        let sa = at(&ma, i);
        let centre = b0 as isize + ((oa[i].0 + shift) / dt).round() as isize;
        let lo = (centre - window).max(0) as usize;
        let hi = ((centre + window).max(-1) as usize).min(ob.len() - 1);
        let best = (lo..=hi).map(|j| hausdorff(&sa, &at(&mb, j), dist)).fold(f64::INFINITY, f64::min);
        sup = sup.max(best);
        if sup > eps {
            break;
        }
    }
    Ok((sup > SAME_ORBIT_TOL).then_some(sup))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{perturb, random_tangent};
    use crate::surface::build_collar;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn collar() -> SurfaceModel {
        build_collar(1.0, 0.5, 0.5).unwrap()
    }

    fn params() -> ClassParams {
        ClassParams { scan: ScanSpec::new(1.0, 0.01).unwrap(), horizon: DEFAULT_HORIZON, bound: 1.0 }
    }

    #[test]
    fn band_strip_has_the_band_width() {
        let m = collar();
        let v = UnitTangent::collar(0.0, 0.3, FRAC_PI_2);
        let s = detect_strip(&m, &v, ScanSpec::new(1.0, 0.01).unwrap(), DEFAULT_HORIZON, 1.0).unwrap();
        assert_abs_diff_eq!(s.width, 0.5, epsilon = 0.01);
        assert!(!s.is_trivial() && !s.truncated);
        // Convexity: the scanned offsets form a gap-free interval.
        assert!(s.offsets.windows(2).all(|w| (w[1] - w[0] - 0.01).abs() < 1e-12));
        let off = UnitTangent::collar(0.1, 0.0, FRAC_PI_2);
        let s2 = detect_strip(&m, &off, ScanSpec::new(1.0, 0.01).unwrap(), DEFAULT_HORIZON, 1.0).unwrap();
        assert_abs_diff_eq!(s2.lo, -0.35, epsilon = 1e-9);
        assert_abs_diff_eq!(s2.hi, 0.15, epsilon = 1e-9);
    }

    #[test]
    fn transversal_and_constant_strips_are_trivial() {
        let m = collar();
        let across = UnitTangent::collar(0.0, 0.0, 0.4);
        assert!(detect_strip(&m, &across, ScanSpec::new(1.0, 0.01).unwrap(), DEFAULT_HORIZON, 1.0).unwrap().is_trivial());
        let g = SurfaceModel::genus2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = random_tangent(&g, &mut rng).unwrap();
            let s = detect_strip(&g, &v, ScanSpec::covering(1.0), DEFAULT_HORIZON, 1.0).unwrap();
            assert_eq!(s.width, 0.0);
        }
    }

    #[test]
    fn q_config_covers_the_band() {
        assert_eq!(q_config(&SurfaceModel::genus2()).unwrap(), 1.0);
        assert_eq!(q_config(&collar()).unwrap(), 1.0);
        assert_abs_diff_eq!(q_config(&build_collar(1.0, 1.0, 0.5).unwrap()).unwrap(), 1.5, epsilon = 2e-3);
    }

    #[test]
    fn equivalence_examples() {
        let g = SurfaceModel::genus2();
        let v = UnitTangent::plane(HPoint::I, FRAC_PI_2);
        assert!(equivalence_check(&g, &v, &v, 20.0, 1.0).unwrap().is_yes());
        // Same forward endpoint ∞, different backward endpoint.
        let w = UnitTangent::plane(HPoint::new(1.0, 1.0).unwrap(), FRAC_PI_2);
        assert!(equivalence_check(&g, &v, &w, 20.0, 1.0).unwrap().is_no());
        let m = collar();
        let a = UnitTangent::collar(0.0, 0.0, FRAC_PI_2);
        let b = UnitTangent::collar(0.1, 0.0, FRAC_PI_2);
        assert!(equivalence_check(&m, &a, &b, 20.0, 1.0).unwrap().is_yes());
        assert!(equivalence_check(&m, &a, &b.reversed(), 20.0, 1.0).unwrap().is_no());
    }

    #[test]
    fn quotient_distance_examples() {
        let g = SurfaceModel::genus2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (v, w) = (random_tangent(&g, &mut rng).unwrap(), random_tangent(&g, &mut rng).unwrap());
        let p = params();
        let (cv, cw) = (quotient_class(&g, &v, p.scan, p.horizon, p.bound).unwrap(), quotient_class(&g, &w, p.scan, p.horizon, p.bound).unwrap());
        assert_eq!(quotient_distance(&g, &cv, &cv).unwrap(), 0.0);
        assert_abs_diff_eq!(quotient_distance(&g, &cv, &cw).unwrap(), sasaki_distance(&g, &v, &w).unwrap(), epsilon = 1e-12);

        let m = collar();
        let band = quotient_class(&m, &UnitTangent::collar(0.05, 0.0, FRAC_PI_2), p.scan, p.horizon, p.bound).unwrap();
        let far_v = UnitTangent::collar(1.2, 0.0, 0.3);
        let far = quotient_class(&m, &far_v, p.scan, p.horizon, p.bound).unwrap();
        assert!(far.is_trivial());
        let d = quotient_distance(&m, &band, &far).unwrap();
        let base = sasaki_distance(&m, &band.representative, &far_v).unwrap();
        assert!(d >= base - band.strip.width - 1e-9);
        assert!((quotient_distance(&m, &band, &far).unwrap() - quotient_distance(&m, &far, &band).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn quotient_flow_fixes_band_classes() {
        let m = collar();
        let p = params();
        let class = quotient_class(&m, &UnitTangent::collar(0.0, 0.0, FRAC_PI_2), p.scan, p.horizon, p.bound).unwrap();
        let same = quotient_flow(&m, &class, 0.0, p.scan, p.horizon, p.bound).unwrap();
        assert!(same.same_point(&m, &class, 1e-9).unwrap());
        // A full period of the band circles returns every member.
        let period = std::f64::consts::TAU;
        let back = quotient_flow(&m, &class, period, p.scan, p.horizon, p.bound).unwrap();
        assert!(back.same_point(&m, &class, 1e-6).unwrap());
        let r = semiconjugacy_check(&m, &UnitTangent::collar(0.1, 0.0, FRAC_PI_2), 1.7, 10, p.scan, p.horizon, p.bound).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn expansivity_on_band_pairs() {
        let m = collar();
        let pairs: Vec<_> = [-0.2, -0.1, 0.0]
            .iter()
            .map(|&r| (UnitTangent::collar(r, 0.0, FRAC_PI_2), UnitTangent::collar(r + 0.1, 0.0, FRAC_PI_2)))
            .collect();
        let orig = expansivity_probe(&m, FlowKind::Original, 0.2, &pairs, 20.0, params(), &mut Budget::unlimited()).unwrap();
        assert_eq!(orig.violations.len(), 3);
        assert!(orig.violations.iter().all(|v| (v.sup - 0.1).abs() < 1e-9));
        let quo = expansivity_probe(&m, FlowKind::Quotient, 0.2, &pairs, 20.0, params(), &mut Budget::unlimited()).unwrap();
        assert!(quo.violations.is_empty());
        assert_eq!(quo.same_orbit, 3);
        let partial = expansivity_probe(&m, FlowKind::Original, 0.2, &pairs, 20.0, params(), &mut Budget::evals(1)).unwrap();
        assert!(partial.partial && partial.checked == 1);
    }

    #[test]
    fn constant_model_is_expansive_on_nearby_pairs() {
        let g = SurfaceModel::genus2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pairs: Vec<_> = (0..30)
            .map(|_| {
                let v = random_tangent(&g, &mut rng).unwrap();
                let w = perturb(&g, &v, 0.02, &mut rng).unwrap();
                (v, w)
            })
            .collect();
        let r = expansivity_probe(&g, FlowKind::Original, 0.05, &pairs, 20.0, params(), &mut Budget::unlimited()).unwrap();
        assert!(r.violations.is_empty());
        let shifted = geodesic_flow(&g, &pairs[0].0, 0.7, 1e-12).unwrap();
        let same = expansivity_probe(&g, FlowKind::Original, 0.05, &[(pairs[0].0, shifted)], 20.0, params(), &mut Budget::unlimited()).unwrap();
        assert_eq!(same.same_orbit, 1);
    }
}
