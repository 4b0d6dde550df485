//! Values checked against independent computations that share no code with
//! the library: naive greedy packing, brute-force shadow search, quadrature.

use approx::assert_abs_diff_eq;

use seqdyn_core::entropy::{analytic_entropy, separated_count, CandidateSet};
use seqdyn_core::ergodic::{measure_distance, EmpiricalMeasure};
use seqdyn_core::limit_stats::sigma_green_kubo;
use seqdyn_core::shadowing::{expansiveness_probe, perturbed_orbit, shadow_expanding};
use seqdyn_core::{circle_dist, MapSequence, Mode, Observable, Point, SmoothMap, Space};

/// Greedy in grid order with a plain O(N·S) scan; the doubling orbit of
/// i/R is exact in binary, so (2^j · i) mod R gives it without rounding.
fn naive_doubling_greedy(r: u64, n: u32, eps: f64) -> u64 {
    let orbit = |i: u64| (0..n).map(move |j| ((i << j) % r) as f64 / r as f64);
    let mut kept: Vec<u64> = Vec::new();
    for i in 0..r {
        let far = kept
            .iter()
            .all(|&k| orbit(i).zip(orbit(k)).any(|(a, b)| circle_dist(a, b) > eps));
        if far {
            kept.push(i);
        }
    }
    kept.len() as u64
}

#[test]
fn doubling_count_matches_naive_greedy() {
    let seq = MapSequence::constant(SmoothMap::doubling());
    for (n, eps) in [(4usize, 0.125), (6, 0.125), (5, 0.2)] {
        let r = 1u64 << 14;
        let lib = separated_count(&seq, n, eps, &CandidateSet::grid(Space::Circle, r as usize)).unwrap();
        assert_eq!(lib, naive_doubling_greedy(r, n as u32, eps), "n {n}, ε {eps}");
    }
}

#[test]
fn doubling_count_respects_continuum_maximum() {
    // a strictly 1/8-separated set for the doubling map at time n has at most
    // 2^(n+2) − 1 points: 2^(n−1) arcs of length 2^(1−n), each holding < 8 gaps of 1/(8·2^(n−1))
    let seq = MapSequence::constant(SmoothMap::doubling());
    let c = separated_count(&seq, 10, 0.125, &CandidateSet::grid(Space::Circle, 1 << 20)).unwrap();
    assert!(c <= 4095);
    assert_eq!(c, 4080);
}

#[test]
fn doubling_expansiveness_time() {
    // distances double until they pass ε₀: smallest N with 0.01 · 2^N ≥ 0.25
    let seq = MapSequence::constant(SmoothMap::doubling());
    let n = (0..).find(|&k| 0.01 * 2f64.powi(k) >= 0.25).unwrap() as usize;
    assert_eq!(n, 5);
    assert_eq!(expansiveness_probe(&seq, 0.25, 0.01, 10_000).unwrap(), n);
    assert_eq!(expansiveness_probe(&seq, 0.25, 0.25, 100).unwrap(), 0);
}

#[test]
fn doubling_shadow_found_by_grid_scan() {
    let seq = MapSequence::constant(SmoothMap::doubling());
    // 8 steps keep the tracing interval (width ≈ 2e−3/2^7) many grid cells wide
    let p = perturbed_orbit(&seq, &Point::circle(0.3), 1e-3, 8, 7).unwrap();
    let s = shadow_expanding(&seq, &p, 1.0).unwrap();
    let xs: Vec<f64> = p.points.iter().map(|q| q.x()).collect();
    // every candidate on a 1e−6 grid whose doubling orbit stays within 1e−3
    let tracers: Vec<f64> = (0..1_000_000)
        .map(|i| i as f64 * 1e-6)
        .filter(|&y| {
            let mut z = y;
            xs.iter().all(|&x| {
                let ok = circle_dist(z, x) <= 1e-3;
                z = (2.0 * z).fract();
                ok
            })
        })
        .collect();
    assert!(!tracers.is_empty());
    // they form a single cluster, and it contains the shadow point
    let (lo, hi) = (tracers[0], *tracers.last().unwrap());
    assert!(hi - lo < 2e-3 && tracers.len() as f64 >= (hi - lo) / 1e-6 - 1.0);
    assert!(s.point.x() >= lo - 1e-6 && s.point.x() <= hi + 1e-6);
    assert!(s.beta <= 1e-3);
}

fn quadrature_autocov(phi: &Observable, f: &SmoothMap, lag: usize, points: usize) -> f64 {
    (0..points)
        .map(|i| {
            let x = (i as f64 + 0.5) / points as f64;
            let mut y = Point::circle(x);
            for _ in 0..lag {
                y = f.eval(&y);
            }
            phi.eval(&Point::circle(x)) * phi.eval(&y)
        })
        .sum::<f64>()
        / points as f64
}

#[test]
fn green_kubo_autocovariances_match_quadrature() {
    // φ = cos 2πx + cos 4πx: C(0) = 1, C(1) = 1/2, C(j ≥ 2) = 0, σ² = 2
    let phi = Observable::trig(
        Space::Circle,
        0.0,
        vec![
            Mode { coefficient: 1.0, frequency: [1, 0], phase: 0.0 },
            Mode { coefficient: 1.0, frequency: [2, 0], phase: 0.0 },
        ],
    );
    let f = SmoothMap::doubling();
    let gk = sigma_green_kubo(&f, &phi, 1 << 20, 8, 5).unwrap();
    for (j, &c) in gk.autocov.iter().enumerate() {
        let q = quadrature_autocov(&phi, &f, j, 1 << 12);
        assert!((c - q).abs() < 0.02, "C({j}) = {c}, quadrature {q}");
    }
    assert!((gk.sigma2 - 2.0).abs() < 4.0 * gk.std_error.max(0.01), "{} ± {}", gk.sigma2, gk.std_error);
}

#[test]
fn analytic_entropies() {
    let golden = (3.0 + 5f64.sqrt()) / 2.0;
    assert_abs_diff_eq!(analytic_entropy(&MapSequence::constant(SmoothMap::doubling())), 2f64.ln(), epsilon = 1e-15);
    assert_abs_diff_eq!(analytic_entropy(&MapSequence::constant(SmoothMap::cat_map())), golden.ln(), epsilon = 1e-12);
}

#[test]
fn circle_point_masses_are_half_apart() {
    let a = EmpiricalMeasure::point_mass(Point::circle(0.1));
    let b = EmpiricalMeasure::point_mass(Point::circle(0.6));
    assert_abs_diff_eq!(measure_distance(&a, &b).unwrap(), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(measure_distance(&a, &a).unwrap(), 0.0, epsilon = 1e-15);
}
