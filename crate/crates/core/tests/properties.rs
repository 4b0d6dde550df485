use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use seqdyn_core::conjugacy::{sequential_conjugacy, ConjugacySample};
use seqdyn_core::entropy::{separated_count, CandidateSet};
use seqdyn_core::ergodic::{
    birkhoff_average, measure_distance, periodic_limit_measure, pushforward, EmpiricalMeasure, OrbitStart,
    Provenance,
};
use seqdyn_core::limit_stats::{asip_rate_schedule, checkpoints, clt_check, sigma_green_kubo, RateStatus, SeriesStats};
use seqdyn_core::shadowing::{perturbed_orbit, shadow_anosov, shadow_expanding, HyperbolicSplitting, PseudoOrbit};
use seqdyn_core::{circle_dist, seq_distance, MapSequence, Observable, Order, Point, SmoothMap, Space, TrigTerm};

fn circle_map(amplitude: f64, frequency: i32) -> SmoothMap {
    SmoothMap::expanding_circle(2, 0.0, vec![TrigTerm::circle(amplitude, frequency)]).unwrap()
}

fn cat(amplitude: f64) -> SmoothMap {
    SmoothMap::perturbed_cat_map(amplitude).unwrap()
}

fn atoms(points: &[f64]) -> EmpiricalMeasure {
    EmpiricalMeasure::from_points(points.iter().map(|&x| Point::circle(x)).collect(), Provenance::Samples)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifts_are_strictly_monotone(a in -0.1f64..0.1, k in 1i32..4, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assume!(x != y);
        let f = circle_map(a / k as f64, k);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        prop_assert!(f.lift(lo).unwrap() < f.lift(hi).unwrap());
    }

    #[test]
    fn inverse_branches_invert(a in -0.1f64..0.1, y in 0.0f64..1.0, b in 0u32..2) {
        let f = circle_map(a, 1);
        let x = f.inverse_branch(&Point::circle(y), b).unwrap();
        prop_assert!(circle_dist(f.eval(&x).x(), y) <= 1e-12);
    }

    #[test]
    fn torus_two_sided_compose_round_trips(a in -0.001f64..0.001, n in 1i64..12, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let seq = MapSequence::periodic(vec![cat(a), SmoothMap::cat_map()]).unwrap().two_sided().unwrap();
        let p = Point::torus(x, y);
        let q = seq.compose(n, &p).unwrap();
        // F_n sends time 0 to time n; the backward orbit from the shifted sequence returns it
        let back = seq.shifted(n).unwrap().compose(-n, &q).unwrap();
        prop_assert!(back.dist(&p) <= 1e-9, "{} from {:?}", back.dist(&p), p);
    }

    #[test]
    fn inverse_branches_contract(a in -0.1f64..0.1, y in 0.0f64..1.0, t in -1.0f64..1.0, b in 0u32..2) {
        let f = circle_map(a, 1);
        let r = f.rates();
        let z = y + t * r.delta0;
        let fy = f.inverse_branch(&Point::circle(y), b).unwrap();
        let fz = MapSequence::constant(f.clone()).map(0).nearest_preimage(z, fy.x()).unwrap();
        let d = circle_dist(y, z);
        prop_assert!(circle_dist(fy.x(), fz) <= r.lambda * d * (1.0 + 1e-9));
    }

    #[test]
    fn seq_distance_is_a_pseudometric(a in -0.05f64..0.05, b in -0.05f64..0.05, c in -0.05f64..0.05) {
        let f = MapSequence::constant(circle_map(a, 1));
        let g = MapSequence::periodic(vec![circle_map(b, 1), circle_map(c, 2)]).unwrap();
        let h = MapSequence::constant(circle_map(c, 1));
        for order in [Order::C0, Order::C1] {
            let fg = seq_distance(&f, &g, order, 256).unwrap();
            let gf = seq_distance(&g, &f, order, 256).unwrap();
            prop_assert!((fg.lower - gf.lower).abs() <= 1e-15 && (fg.upper - gf.upper).abs() <= 1e-15);
            let gh = seq_distance(&g, &h, order, 256).unwrap();
            let fh = seq_distance(&f, &h, order, 256).unwrap();
            prop_assert!(fh.lower <= fg.upper + gh.upper + 1e-15);
        }
    }

    #[test]
    fn measure_distance_is_a_metric(
        p in prop::collection::vec(0.0f64..1.0, 1..12),
        q in prop::collection::vec(0.0f64..1.0, 1..12),
        r in prop::collection::vec(0.0f64..1.0, 1..12),
    ) {
        let (mp, mq, mr) = (atoms(&p), atoms(&q), atoms(&r));
        let pq = measure_distance(&mp, &mq).unwrap();
        prop_assert!((pq - measure_distance(&mq, &mp).unwrap()).abs() <= 1e-12);
        prop_assert!(measure_distance(&mp, &mp).unwrap() <= 1e-12);
        let pr = measure_distance(&mp, &mr).unwrap();
        let rq = measure_distance(&mr, &mq).unwrap();
        prop_assert!(pq <= pr + rq + 1e-12);
    }

    #[test]
    fn identity_pushforward_fixes_measures(p in prop::collection::vec(0.0f64..1.0, 1..32)) {
        let mu = atoms(&p);
        let id = ConjugacySample::identity(Space::Circle, 64);
        let pushed = pushforward(&id, &mu).unwrap();
        let (xs, ws) = pushed.to_atoms();
        let (ys, vs) = mu.to_atoms();
        prop_assert_eq!(ws, vs);
        for (a, b) in xs.iter().zip(&ys) {
            prop_assert!(a.dist(b) <= 1e-15);
        }
        let mixed = periodic_limit_measure(&[id.clone(), id.clone(), id], &mu).unwrap();
        prop_assert!(measure_distance(&mixed, &mu).unwrap() <= 1e-12);
    }

    #[test]
    fn counts_grow_as_eps_shrinks_and_n_grows(e in 0.05f64..0.3, shrink in 0.5f64..1.0, n in 1usize..6) {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let cands = CandidateSet::grid(Space::Circle, 1 << 12);
        let s = separated_count(&seq, n, e, &cands).unwrap();
        prop_assert!(separated_count(&seq, n, e * shrink, &cands).unwrap() >= s);
        prop_assert!(separated_count(&seq, n + 1, e, &cands).unwrap() >= s);
    }
}

/// Largest (n, ε)-separated subset of a small candidate list, by exhaustion.
fn max_separated(orbits: &[Vec<f64>], eps: f64) -> u32 {
    let m = orbits.len();
    let sep = |i: usize, j: usize| orbits[i].iter().zip(&orbits[j]).any(|(a, b)| circle_dist(*a, *b) > eps);
    (0u32..1 << m)
        .filter(|mask| {
            (0..m).all(|i| mask >> i & 1 == 0 || (i + 1..m).all(|j| mask >> j & 1 == 0 || sep(i, j)))
        })
        .map(|mask| mask.count_ones())
        .max()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn greedy_never_overcounts(xs in prop::collection::vec(0.0f64..1.0, 4..14), e in 0.05f64..0.45, n in 1usize..4, a in -0.05f64..0.05) {
        let f = circle_map(a, 1);
        let seq = MapSequence::constant(f.clone());
        let orbits: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| {
                let mut v = vec![x];
                for _ in 1..n {
                    let last = *v.last().unwrap();
                    v.push(f.eval(&Point::circle(last)).x());
                }
                v
            })
            .collect();
        let pts = xs.iter().map(|&x| Point::circle(x)).collect();
        let cands = CandidateSet::subset(Space::Circle, pts, e / 8.0);
        let greedy = separated_count(&seq, n, e, &cands).unwrap();
        prop_assert!(greedy >= 1);
        prop_assert!(greedy <= max_separated(&orbits, e) as u64);
    }

    #[test]
    fn lifted_conjugacy_images_increase(a in -0.05f64..0.05, b in -0.05f64..0.05) {
        let f = MapSequence::constant(SmoothMap::doubling());
        let g = MapSequence::periodic(vec![circle_map(a, 1), circle_map(b, 1)]).unwrap();
        let h = sequential_conjugacy(&f, &g, 256, 40).unwrap();
        prop_assert!(h.monotonicity_violations().is_empty());
        let lifted = h.lifted();
        prop_assert!(*lifted.last().unwrap() < lifted[0] + 1.0);
    }

    #[test]
    fn expanding_shadow_meets_bound_and_nests(a in -0.05f64..0.05, x0 in 0.0f64..1.0, delta in 1e-5f64..1e-2, seed in any::<u64>()) {
        let seq = MapSequence::constant(circle_map(a, 1));
        let r = seq.rates();
        let p = perturbed_orbit(&seq, &Point::circle(x0), delta, 60, seed).unwrap();
        prop_assert!((p.defect - p.recompute_defect(&seq)).abs() <= 1e-14);
        let s = shadow_expanding(&seq, &p, 1e-9).unwrap();
        prop_assert!((s.beta - s.recompute_beta(&p)).abs() <= 1e-12);
        let bound = r.lambda * p.defect / (1.0 - r.lambda) + r.lambda.powi(60) * r.delta0;
        prop_assert!(s.beta <= bound * (1.0 + 1e-9) + 1e-15, "β {} bound {bound}", s.beta);
        // a deeper truncation lands inside the shorter one's nested ball
        for k in [20usize, 40] {
            let short = PseudoOrbit::new(&seq, p.points[..=k].to_vec(), 0, seed).unwrap();
            let z = shadow_expanding(&seq, &short, 1.0).unwrap();
            let gap = z.point.dist(&s.point);
            prop_assert!(gap <= r.lambda.powi(k as i32) * bound * (1.0 + 1e-9) + 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn anosov_shadow_is_unique_and_traces(a in -0.001f64..0.001, x in 0.0f64..1.0, y in 0.0f64..1.0, seed in any::<u64>()) {
        let seq = MapSequence::constant(cat(a));
        let split = HyperbolicSplitting::new(&seq).unwrap();
        let p = perturbed_orbit(&seq, &Point::torus(x, y), 1e-4, 200, seed).unwrap();
        let s = shadow_anosov(&seq, &p, &split, 1e-9).unwrap();
        prop_assert!(s.unique);
        prop_assert!((s.beta - s.recompute_beta(&p)).abs() <= 1e-12);
        prop_assert!(s.orbit_residual <= 1e-9);
    }

    #[test]
    fn constant_birkhoff_matches_direct_iteration(a in -0.001f64..0.001, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let f = cat(a);
        let seq = MapSequence::constant(f.clone());
        let phi = Observable::trig(Space::Torus, 0.25, vec![seqdyn_core::Mode { coefficient: 1.0, frequency: [1, 1], phase: 0.5 }]);
        let avg = birkhoff_average(&seq, &phi, &OrbitStart::Point(Point::torus(x, y)), 500).unwrap();
        let mut p = Point::torus(x, y);
        let mut s = 0.0;
        for _ in 0..500 {
            s += phi.eval(&p);
            p = f.eval(&p);
        }
        prop_assert!((avg[499] - s / 500.0).abs() <= 1e-12);
    }
}

#[test]
fn sigma2_stable_when_samples_double() {
    let f = SmoothMap::doubling();
    let mode = |k| seqdyn_core::Mode { coefficient: 1.0, frequency: [k, 0], phase: 0.0 };
    let phi = Observable::trig(Space::Circle, 0.0, vec![mode(1), mode(2)]);
    let a = sigma_green_kubo(&f, &phi, 1 << 20, 40, 3).unwrap();
    let b = sigma_green_kubo(&f, &phi, 1 << 21, 40, 3).unwrap();
    let se = a.std_error.max(b.std_error);
    assert!((a.sigma2 - b.sigma2).abs() <= 2.0 * se, "{} vs {} (se {se})", a.sigma2, b.sigma2);
}

#[test]
fn drift_bounded_across_horizons() {
    let mut c_primes = Vec::new();
    for n_max in [1 << 12, 1 << 14, 1 << 16] {
        let r = asip_rate_schedule(1.0, 0.1, 1.0, n_max).unwrap();
        assert!(r.c_prime <= r.analytic_bound, "C′ {} > {}", r.c_prime, r.analytic_bound);
        c_primes.push(r.c_prime);
    }
    // C′ is a running max over n ≤ n_max
    assert!(c_primes.windows(2).all(|w| w[1] >= w[0]), "{c_primes:?}");
}

#[test]
fn clt_check_accepts_iid_normals() {
    let n = 1024;
    let ensemble = 2000;
    let cps = checkpoints(n);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sums = (0..ensemble)
        .map(|_| {
            let mut s = 0.0;
            let mut row = Vec::new();
            for j in 1..=n {
                let z: f64 = StandardNormal.sample(&mut rng);
                s += z;
                if cps.contains(&j) {
                    row.push(s);
                }
            }
            row
        })
        .collect();
    let stats = SeriesStats {
        checkpoints: cps,
        sums,
        seed: 11,
        ensemble,
        rate: RateStatus::Constant,
    };
    let report = clt_check(&stats, 1.0).unwrap();
    assert!(report.pass, "{:?}", report.checkpoints.last());
}
