//! The genus-two surface group of the regular octagon with interior angles
//! π/4, opposite sides paired by hyperbolic translations.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::plane::{cosh_distance, hyperbolic_distance, HPoint, IsometryMatrix};
use super::word::{GroupWord, Letter};
use crate::error::{Error, Result};

const MAX_REDUCTION_STEPS: usize = 10_000;

/// Products are renormalized to unit determinant after this many factors.
const RENORMALIZE_EVERY: usize = 32;

/// Side-pairing group of the regular hyperbolic octagon.
///
/// The octagon is centred at `i` (the disk origin). Side `k` has its midpoint
/// in direction `(2k+1)π/8` from the centre; generator letter `k` translates
/// the octagon across side `k`, so `a, b, c, d` pair sides `4..8` with `0..4`.
#[derive(Debug, Clone)]
pub struct FuchsianGroup {
    generators: [IsometryMatrix; 4],
    side_maps: [IsometryMatrix; 8],
    /// Images of the centre under the side maps.
    side_centres: [HPoint; 8],
    vertices: [HPoint; 8],
    relation: GroupWord,
    inradius: f64,
    circumradius: f64,
    /// Group elements moving the centre far enough to realise every nearest lift, sorted by displacement.
    neighbours: Arc<[IsometryMatrix]>,
    displacements: Arc<[f64]>,
}

impl FuchsianGroup {
    pub fn generators(&self) -> &[IsometryMatrix; 4] {
        &self.generators
    }

    pub fn letter_matrix(&self, l: Letter) -> IsometryMatrix {
        self.side_maps[l.index()]
    }

    pub fn relation(&self) -> &GroupWord {
        &self.relation
    }

    /// Octagon vertices in the half-plane chart.
    pub fn vertices(&self) -> &[HPoint; 8] {
        &self.vertices
    }

    /// Octagon vertices in the Poincaré disk; vertex 0 lies on the positive real axis.
    pub fn octagon_vertices_disk(&self) -> [Complex64; 8] {
        self.vertices.map(|v| v.to_disk())
    }

    pub fn centre(&self) -> HPoint {
        HPoint::I
    }

    /// Distance from the centre to each side.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// Distance from the centre to each vertex.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Length of the shortest closed geodesic, attained by the generators.
    pub fn systole(&self) -> f64 {
        2.0 * self.inradius
    }

    /// Injectivity radius of the quotient surface.
    pub fn injectivity_radius(&self) -> f64 {
        self.inradius
    }

    pub fn side_centres(&self) -> &[HPoint; 8] {
        &self.side_centres
    }

    /// Elements `g` sorted by `d(i, g i)`, up to `2R + sqrt(4R² + π²)`. This
    /// covers every lift relevant to distances between points of the octagon,
    /// including Sasaki-type distances with an angle term bounded by π.
    pub fn neighbours(&self) -> &[IsometryMatrix] {
        &self.neighbours
    }

    /// `d(i, g i)` for each entry of [`Self::neighbours`].
    pub fn displacements(&self) -> &[f64] {
        &self.displacements
    }

    /// Minimum of `cost(g)` over lifts, where `cost(g) >= d(p, g q)` for `p, q`
    /// in the octagon. Lifts are scanned by displacement and the scan stops once
    /// the triangle inequality rules out any improvement.
    pub fn min_over_lifts(&self, p: HPoint, q: HPoint, cost: impl FnMut(&IsometryMatrix) -> f64) -> f64 {
        self.argmin_over_lifts(p, q, cost).0
    }

    /// [`Self::min_over_lifts`] together with the minimising element.
    pub fn argmin_over_lifts(&self, p: HPoint, q: HPoint, mut cost: impl FnMut(&IsometryMatrix) -> f64) -> (f64, IsometryMatrix) {
        let slack = hyperbolic_distance(p, HPoint::I) + hyperbolic_distance(q, HPoint::I);
        let mut best = (f64::INFINITY, IsometryMatrix::IDENTITY);
        for (g, &rho) in self.neighbours.iter().zip(self.displacements.iter()) {
            if rho - slack > best.0 {
                break;
            }
            let c = cost(g);
            if c < best.0 {
                best = (c, *g);
            }
        }
        best
    }

    /// Evaluates a word as a matrix (renormalizing determinant drift periodically).
    pub fn evaluate(&self, w: &GroupWord) -> IsometryMatrix {
        let mut m = IsometryMatrix::IDENTITY;
        for (k, l) in w.letters().iter().enumerate() {
            m = m * self.letter_matrix(*l);
            if (k + 1) % RENORMALIZE_EVERY == 0 {
                m = m.renormalized();
            }
        }
        m
    }

    /// True when `z` lies in the closed octagon (within `tol` in cosh-distance).
    pub fn contains(&self, z: HPoint, tol: f64) -> bool {
        let c0 = cosh_distance(z, HPoint::I);
        self.side_centres.iter().all(|&s| c0 <= cosh_distance(z, s) + tol)
    }

    /// Greedy reduction into the octagon: returns `(z', w, m)` with `m = eval(w)`
    /// and `m z' = z`.
    pub fn reduce_with_matrix(&self, z: HPoint) -> Result<(HPoint, GroupWord, IsometryMatrix)> {
        let mut cur = z;
        let mut word = GroupWord::empty();
        let mut m = IsometryMatrix::IDENTITY;
        for step in 0..MAX_REDUCTION_STEPS {
            let c0 = cosh_distance(cur, HPoint::I);
            let (best, cb) = self
                .side_centres
                .iter()
                .enumerate()
                .map(|(k, &s)| (k, cosh_distance(cur, s)))
                .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            if cb >= c0 * (1.0 - 1e-14) {
                return Ok((cur, word, m));
            }
            let letter = Letter::new(best as u8)?;
            cur = self.side_maps[letter.inverse().index()].apply(cur);
            word.push(letter);
            m = m * self.side_maps[best];
            if (step + 1) % RENORMALIZE_EVERY == 0 {
                m = m.renormalized();
            }
        }
        Err(Error::ReductionFailed { iterations: MAX_REDUCTION_STEPS })
    }

    pub fn reduce(&self, z: HPoint) -> Result<(HPoint, GroupWord)> {
        self.reduce_with_matrix(z).map(|(p, w, _)| (p, w))
    }

    /// Hyperbolic distance from `z` to the closed octagon.
    pub fn distance_to_domain(&self, z: HPoint) -> f64 {
        if self.contains(z, 1e-12) {
            return 0.0;
        }
        (0..8)
            .map(|k| segment_distance(z, self.vertices[k], self.vertices[(k + 1) % 8]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Interior angle at a vertex, computed from the constructed vertices.
    pub fn vertex_angle(&self, k: usize) -> f64 {
        let v = self.vertices[k];
        let to_frame = IsometryMatrix::frame(v, std::f64::consts::FRAC_PI_2).inverse();
        let dir = |p: HPoint| {
            let q = to_frame.apply(p);
            q.to_disk().arg() + std::f64::consts::FRAC_PI_2
        };
        let a = dir(self.vertices[(k + 1) % 8]);
        let b = dir(self.vertices[(k + 7) % 8]);
        super::plane::wrap_angle(a - b).abs()
    }

    /// Largest distance between paired side endpoints after applying the generator.
    pub fn side_pairing_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            let g = self.generators[k];
            let (p, q) = (self.vertices[k + 4], self.vertices[(k + 5) % 8]);
            let (gp, gq) = (g.apply(p), g.apply(q));
            let (u, v) = (self.vertices[k], self.vertices[k + 1]);
            let straight = hyperbolic_distance(gp, u).max(hyperbolic_distance(gq, v));
            let crossed = hyperbolic_distance(gp, v).max(hyperbolic_distance(gq, u));
            worst = worst.max(straight.min(crossed));
        }
        worst
    }
}

/// Distance from `z` to the geodesic segment `[p, q]`.
fn segment_distance(z: HPoint, p: HPoint, q: HPoint) -> f64 {
    // Put the segment on the imaginary axis.
    let to_p = IsometryMatrix::frame(p, 0.0).inverse();
    let q1 = to_p.apply(q);
    // Rotate about i so q1 lands on the imaginary axis above i.
    let phi = q1.to_disk().arg() + std::f64::consts::FRAC_PI_2;
    let rot = IsometryMatrix::rotation_about_i(std::f64::consts::FRAC_PI_2 - phi);
    let m = rot * to_p;
    let (z1, q2) = (m.apply(z), m.apply(q));
    let (lo, hi) = (1.0f64, q2.y.max(1.0));
    let h = z1.x.hypot(z1.y);
    if h >= lo && h <= hi {
        (z1.x.abs() / z1.y).asinh()
    } else {
        hyperbolic_distance(z, p).min(hyperbolic_distance(z, q))
    }
}

/// Builds the regular-octagon genus-two group. The construction runs once per
/// process; later calls return a cheap clone.
pub fn build_genus2_group() -> FuchsianGroup {
    static GROUP: OnceLock<FuchsianGroup> = OnceLock::new();
    GROUP.get_or_init(construct_genus2_group).clone()
}

fn construct_genus2_group() -> FuchsianGroup {
    // Regular octagon with interior angles π/4:
    //   cosh(circumradius) = cot²(π/8),  cosh(inradius) = cot(π/8).
    let cot = 1.0 / FRAC_PI_8.tan();
    let circumradius = (cot * cot).acosh();
    let inradius = cot.acosh();

    let side_dir = |k: usize| (2 * k + 1) as f64 * FRAC_PI_8;
    let generators: [IsometryMatrix; 4] =
        std::array::from_fn(|k| IsometryMatrix::translation_from_i(side_dir(k), 2.0 * inradius));
    let side_maps: [IsometryMatrix; 8] =
        std::array::from_fn(|k| if k < 4 { generators[k] } else { generators[k - 4].inverse() });
    let side_centres = side_maps.map(|m| m.apply(HPoint::I));
    let vertices: [HPoint; 8] = std::array::from_fn(|k| {
        IsometryMatrix::translation_from_i(k as f64 * FRAC_PI_4, circumradius).apply(HPoint::I)
    });
    let relation: GroupWord = RELATION.parse().expect("static relation word");

    let mut group = FuchsianGroup {
        generators,
        side_maps,
        side_centres,
        vertices,
        relation,
        inradius,
        circumradius,
        neighbours: Arc::from(Vec::new()),
        displacements: Arc::from(Vec::new()),
    };
    let reach = 2.0 * circumradius + (4.0 * circumradius * circumradius + PI * PI).sqrt();
    let mut ball: Vec<(f64, IsometryMatrix)> = group
        .ball_elements(reach)
        .into_iter()
        .map(|g| (hyperbolic_distance(HPoint::I, g.apply(HPoint::I)), g))
        .collect();
    ball.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (displacements, neighbours): (Vec<f64>, Vec<IsometryMatrix>) = ball.into_iter().unzip();
    group.displacements = displacements.into();
    group.neighbours = neighbours.into();
    group
}

/// Surface relation of the opposite-side pairing (verified numerically in tests).
const RELATION: &str = "aBcDAbCd";

impl FuchsianGroup {
    /// All elements `g` with `d(i, g i) <= radius`, found by breadth-first
    /// search over side-adjacent tiles meeting the ball.
    fn ball_elements(&self, radius: f64) -> Vec<IsometryMatrix> {
        let mut out = vec![IsometryMatrix::IDENTITY];
        let mut index = CentreIndex::default();
        index.insert(HPoint::I.hyperboloid_xy());
        let mut frontier = std::collections::VecDeque::from([IsometryMatrix::IDENTITY]);
        while let Some(g) = frontier.pop_front() {
            for l in Letter::all() {
                let h = g * self.letter_matrix(l);
                let c = h.apply(HPoint::I);
                let key = c.hyperboloid_xy();
                if index.find(key).is_some() {
                    continue;
                }
                index.insert(key);
                if self.distance_to_domain(h.inverse().apply(HPoint::I)) <= radius {
                    frontier.push_back(h);
                    if hyperbolic_distance(HPoint::I, c) <= radius {
                        out.push(h);
                    }
                }
            }
        }
        out
    }
}

/// Spatial hash of tile centres on the hyperboloid. Distinct centres are at
/// least `2 * inradius` apart, far more than one bin.
#[derive(Default)]
pub(super) struct CentreIndex {
    bins: std::collections::HashMap<(i64, i64), Vec<u32>>,
    keys: Vec<(f64, f64)>,
}

impl CentreIndex {
    pub(super) fn find(&self, key: (f64, f64)) -> Option<u32> {
        let (bx, by) = (key.0.floor() as i64, key.1.floor() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.bins.get(&(bx + dx, by + dy)) {
                    for &id in ids {
                        let k = self.keys[id as usize];
                        if (k.0 - key.0).hypot(k.1 - key.1) < 0.5 {
                            return Some(id);
                        }
                    }
                }
            }
        }
        None
    }

    pub(super) fn insert(&mut self, key: (f64, f64)) -> u32 {
        let id = self.keys.len() as u32;
        self.keys.push(key);
        self.bins.entry((key.0.floor() as i64, key.1.floor() as i64)).or_default().push(id);
        id
    }
}
