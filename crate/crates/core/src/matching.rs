//! Reparametrized closeness of sampled orbits.
//!
//! Orbits are compared up to a monotone reparametrization: each sample of one
//! orbit is matched to samples of the other within a time window, and the
//! coupling must be monotone (a banded discrete Fréchet distance).

/// A sampled orbit: times (increasing) with values.
pub type Samples<X> = [(f64, X)];

/// For each sample `(t, a)` of `a`, the distance to the nearest sample of `b`
/// whose time lies in `[t + shift - window, t + shift + window]`
/// (`+∞` when the window holds no sample).
pub fn windowed_nearest<X>(
    a: &Samples<X>,
    b: &Samples<X>,
    shift: f64,
    window: f64,
    mut dist: impl FnMut(&X, &X) -> f64,
) -> Vec<f64> {
    let mut lo = 0;
    a.iter()
        .map(|(t, x)| {
            let (from, to) = (t + shift - window, t + shift + window);
            while lo < b.len() && b[lo].0 < from {
                lo += 1;
            }
            b[lo..].iter().take_while(|(s, _)| *s <= to).map(|(_, y)| dist(x, y)).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Banded discrete Fréchet distance: the least, over monotone couplings of the
/// two sample sequences that only pair samples with `|t_a + shift - t_b| <= window`,
/// of the largest paired distance. Returns `+∞` when no admissible coupling exists.
pub fn banded_frechet<X>(
    a: &Samples<X>,
    b: &Samples<X>,
    shift: f64,
    window: f64,
    mut dist: impl FnMut(&X, &X) -> f64,
) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    // Band of admissible j for each i.
    let mut bands = Vec::with_capacity(a.len());
    let mut lo = 0;
    for (t, _) in a {
        while lo < b.len() && b[lo].0 < t + shift - window {
            lo += 1;
        }
        let mut hi = lo;
        while hi < b.len() && b[hi].0 <= t + shift + window {
            hi += 1;
        }
        bands.push((lo, hi));
    }
    let mut prev: Vec<f64> = Vec::new();
    let mut prev_lo = 0;
    for (i, &(lo, hi)) in bands.iter().enumerate() {
        let mut cur = vec![f64::INFINITY; hi.saturating_sub(lo)];
        for j in lo..hi {
            let d = dist(&a[i].1, &b[j].1);
            let get_prev = |jj: usize| {
                if jj >= prev_lo && jj - prev_lo < prev.len() {
                    prev[jj - prev_lo]
                } else {
                    f64::INFINITY
                }
            };
            let best_before = if i == 0 && j == 0 {
                f64::NEG_INFINITY
            } else {
                let mut m = f64::INFINITY;
                if i > 0 {
                    m = m.min(get_prev(j));
                    if j > 0 {
                        m = m.min(get_prev(j - 1));
                    }
                }
                if j > lo {
                    m = m.min(cur[j - 1 - lo]);
                }
                m
            };
            cur[j - lo] = d.max(best_before);
        }
        prev = cur;
        prev_lo = lo;
    }
    // The coupling must end at the last sample of both sequences.
    let last = b.len() - 1;
    if last >= prev_lo && last - prev_lo < prev.len() {
        prev[last - prev_lo]
    } else {
        f64::INFINITY
    }
}

/// Time shift `σ` (among the sample times of `b`, within `[-max_shift, max_shift]`)
/// minimising the distance from the sample of `a` nearest to time 0 to `b(σ)`.
pub fn best_shift<X>(a: &Samples<X>, b: &Samples<X>, max_shift: f64, mut dist: impl FnMut(&X, &X) -> f64) -> f64 {
    let Some((t0, x0)) = a.iter().min_by(|p, q| p.0.abs().total_cmp(&q.0.abs())) else {
        return 0.0;
    };
    b.iter()
        .filter(|(s, _)| (s - t0).abs() <= max_shift)
        .map(|(s, y)| (dist(x0, y), s - t0))
        .min_by(|p, q| p.0.total_cmp(&q.0).then(p.1.abs().total_cmp(&q.1.abs())))
        .map_or(0.0, |(_, s)| s)
}

/// Monotone min-max matching: each sample `(t, a)` of `a` is matched to the
/// sample `(s, b)` of `b` with `|s - t| <= window`, at or after the previous
/// match, minimising `max(dist(a, b), |s - t|)`. Returns `(distance, s)` per
/// sample of `a`; `(+∞, t)` when the window is empty.
pub fn minmax_match<X>(a: &Samples<X>, b: &Samples<X>, window: f64, mut dist: impl FnMut(&X, &X) -> f64) -> Vec<(f64, f64)> {
    let mut floor = 0;
    a.iter()
        .map(|(t, x)| {
            while floor < b.len() && b[floor].0 < t - window {
                floor += 1;
            }
            let mut best: Option<(f64, usize, f64)> = None;
            for (j, (s, y)) in b.iter().enumerate().skip(floor) {
                if *s > t + window {
                    break;
                }
                let d = dist(x, y);
                let cost = d.max((s - t).abs());
                if best.map_or(true, |b| cost < b.0) {
                    best = Some((cost, j, d));
                }
            }
            match best {
                Some((_, j, d)) => {
                    floor = j;
                    (d, b[j].0)
                }
                None => (f64::INFINITY, *t),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(offset: f64, speed: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n).map(|k| (k as f64 * 0.1, offset + speed * k as f64 * 0.1)).collect()
    }

    #[test]
    fn identical_orbits_match_exactly() {
        let a = line(0.0, 1.0, 50);
        assert_eq!(banded_frechet(&a, &a, 0.0, 0.5, |x, y| (x - y).abs()), 0.0);
        assert!(windowed_nearest(&a, &a, 0.0, 0.5, |x, y| (x - y).abs()).iter().all(|&d| d == 0.0));
    }

    #[test]
    fn parallel_orbits_at_fixed_offset() {
        let a = line(0.0, 0.0, 30);
        let b = line(0.3, 0.0, 30);
        let f = banded_frechet(&a, &b, 0.0, 0.2, |x, y| (x - y).abs());
        assert!((f - 0.3).abs() < 1e-12);
    }

    #[test]
    fn time_shifted_orbit_is_recovered() {
        let a: Vec<(f64, f64)> = (0..100).map(|k| (k as f64 * 0.1 - 5.0, k as f64 * 0.1 - 5.0)).collect();
        let b: Vec<(f64, f64)> = (0..100).map(|k| (k as f64 * 0.1 - 5.0, k as f64 * 0.1 - 5.0 - 1.0)).collect();
        let s = best_shift(&a, &b, 3.0, |x, y| (x - y).abs());
        assert!((s - 1.0).abs() < 1e-9);
        let near = windowed_nearest(&a[..80], &b, s, 0.05, |x, y| (x - y).abs());
        assert!(near.iter().all(|&d| d < 1e-9));
    }

    #[test]
    fn minmax_match_prefers_small_time_offsets() {
        let a = line(0.0, 1.0, 20);
        // b runs 0.3 ahead in value: matching b at s = t - 0.3 is exact but costs 0.3 in time.
        let b = line(0.3, 1.0, 20);
        let m = minmax_match(&a[5..], &b, 1.0, |x, y| (x - y).abs());
        for ((t, _), (d, s)) in a[5..].iter().zip(&m) {
            assert!(d.max((s - t).abs()) <= 0.2 + 1e-9);
        }
    }

    #[test]
    fn no_admissible_coupling() {
        let a = line(0.0, 1.0, 10);
        let b: Vec<(f64, f64)> = line(0.0, 1.0, 10).into_iter().map(|(t, x)| (t + 100.0, x)).collect();
        assert_eq!(banded_frechet(&a, &b, 0.0, 1.0, |x, y| (x - y).abs()), f64::INFINITY);
    }
}
