//! Module-level invariants exercised on random data: symplectic algebra,
//! volume against Monte-Carlo, round trips, reversal antisymmetry, engine
//! agreement, and monotonicity.

use ehz::nalgebra::{DMatrix, DVector};
use ehz::polytope::VPolytope;
use ehz::solver::{self, CapacitySequence, SolverConfig};
use ehz::symplectic::SymplecticSpace;
use ehz::{bodies, cuts, HPolytope};
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_vec(v.to_vec())
}

proptest! {
    #[test]
    fn omega_is_bilinear_and_antisymmetric(
        xs in prop::collection::vec(-10.0f64..10.0, 6),
        ys in prop::collection::vec(-10.0f64..10.0, 6),
        zs in prop::collection::vec(-10.0f64..10.0, 6),
        a in -5.0f64..5.0,
    ) {
        let sp = SymplecticSpace::new(3).unwrap();
        let (x, y, z) = (dvec(&xs), dvec(&ys), dvec(&zs));
        let w_xy = sp.omega(&x, &y).unwrap();
        prop_assert!((w_xy + sp.omega(&y, &x).unwrap()).abs() <= 1e-12 * (1.0 + w_xy.abs()));
        prop_assert!(sp.omega(&x, &x).unwrap().abs() <= 1e-12 * (1.0 + x.norm_squared()));
        let lhs = sp.omega(&(a * &x + &z), &y).unwrap();
        let rhs = a * w_xy + sp.omega(&z, &y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        // <Jx, y> = omega(x, y)
        let jx = sp.j_apply(&x).unwrap();
        prop_assert!((jx.dot(&y) - w_xy).abs() <= 1e-12 * (1.0 + w_xy.abs()));
    }
}

/// Monte-Carlo rejection sampling agrees with the exact volume within three
/// standard errors at 10^6 samples, for every library body.
#[test]
fn volume_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for name in ["simplex", "cube", "y", "cross-polytope", "24-cell", "pentagon-product"] {
        let body = bodies::by_name(name, Some(4)).unwrap();
        let exact = body.volume().unwrap();
        let verts = body.vertices().unwrap();
        let dim = body.dim();
        let (mut lo, mut hi) = (vec![f64::INFINITY; dim], vec![f64::NEG_INFINITY; dim]);
        for v in verts.vertices() {
            for i in 0..dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        let box_vol: f64 = (0..dim).map(|i| hi[i] - lo[i]).product();
        let n = 1_000_000usize;
        let mut hits = 0usize;
        let mut point = DVector::zeros(dim);
        for _ in 0..n {
            for i in 0..dim {
                point[i] = rng.gen_range(lo[i]..hi[i]);
            }
            if body.contains(&point, 0.0) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let estimate = p * box_vol;
        let stderr = box_vol * (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (estimate - exact).abs() <= 3.0 * stderr,
            "{name}: exact {exact}, MC {estimate} +- {stderr}"
        );
    }
}

#[test]
fn reversal_negates_the_action() {
    let y = bodies::y_body().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seq in random_feasible_sequences(&y, &mut rng, 25) {
        let forward = solver::sequence_action(&y, &seq).unwrap();
        let reversed = CapacitySequence::new(seq.entries.iter().rev().copied().collect());
        let backward = solver::sequence_action(&y, &reversed).unwrap();
        assert!((forward + backward).abs() <= 1e-10 * (1.0 + forward.abs()));
    }
}

#[test]
fn engines_agree_on_small_bodies() {
    for name in ["square", "pentagon", "simplex", "cube"] {
        let body = bodies::by_name(name, Some(4)).unwrap();
        let rb = solver::capacity(&body, &SolverConfig::brute()).unwrap();
        let rn = solver::capacity(&body, &SolverConfig::bnb()).unwrap();
        let rel = (rb.a_star - rn.a_star).abs() / rb.a_star;
        assert!(rel <= 1e-10, "{name}: brute {} vs bnb {}", rb.a_star, rn.a_star);
    }
}

#[test]
fn capacity_monotone_under_inclusion() {
    let cfg = SolverConfig::bnb();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["cube", "simplex", "y"] {
        let body = bodies::by_name(name, Some(4)).unwrap();
        let c_body = solver::capacity(&body, &cfg).unwrap().capacity;
        for _ in 0..5 {
            let v = random_unit(&mut rng, 4);
            let h_plus = body.support(&v).unwrap();
            let h_minus = body.support(&(-&v)).unwrap();
            let s = -h_minus + (h_plus + h_minus) * rng.gen_range(0.2..0.8);
            let spec = cuts::CutSpec::new(v.clone(), s).unwrap();
            let pieces = cuts::cut(&body, &spec).unwrap();
            for piece in [&pieces.k1, &pieces.k2] {
                let c_piece = solver::capacity(piece, &cfg).unwrap().capacity;
                assert!(
                    c_piece <= c_body + 1e-9,
                    "{name}: piece capacity {c_piece} exceeds body capacity {c_body}"
                );
            }
        }
    }
}

/// Piece capacity grows as the piece grows with the sweep level.
#[test]
fn sweep_piece_monotonicity_on_cube() {
    let cube = bodies::cube(4, 1.0).unwrap();
    let v = dvec(&[1.0, 0.0, 0.0, 0.0]);
    let levels = cuts::level_grid(&cube, &v, 7).unwrap();
    let table = cuts::sweep(&cube, &v, &levels, &SolverConfig::bnb()).unwrap();
    // Levels ascend, so K1 = {x1 >= level} shrinks and K2 grows.
    for w in table.rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(a.c1.unwrap() >= b.c1.unwrap() - 1e-9);
        assert!(a.c2.unwrap() <= b.c2.unwrap() + 1e-9);
    }
}

#[test]
fn linear_image_round_trip_preserves_volume() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y = bodies::y_body().unwrap();
    let vol = y.volume().unwrap();
    for _ in 0..3 {
        let m = random_gl(&mut rng, 4, 0.6);
        let image = y.linear_image(&m).unwrap();
        let det = m.determinant().abs();
        let vol_image = image.volume().unwrap();
        assert!(
            (vol_image - det * vol).abs() <= 1e-7 * vol_image.max(1.0),
            "vol {vol_image} vs det*vol {}",
            det * vol
        );
    }
}

#[test]
fn vertex_facet_round_trip_on_random_polygons() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let pts: Vec<DVector<f64>> = (0..rng.gen_range(4..12))
            .map(|_| dvec(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]))
            .collect();
        let Ok(vp) = VPolytope::new(2, pts) else { continue };
        if vp.vertices().len() < 3 {
            continue;
        }
        let Ok(hp) = vp.facets() else { continue };
        let back = hp.vertices().unwrap();
        assert_eq!(back.vertices().len(), vp.vertices().len());
        for v in vp.vertices() {
            assert!(back.vertices().iter().any(|w| (w - v).amax() <= 1e-7));
        }
    }
}

// -- helpers ---------------------------------------------------------------

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0f64));
        let n = v.norm();
        if n > 0.1 {
            return v / n;
        }
    }
}

fn random_gl(rng: &mut ChaCha8Rng, dim: usize, min_det: f64) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0f64));
        if m.determinant().abs() >= min_det {
            return m;
        }
    }
}

/// Random members of `M(K)`: optimize a random linear objective over the
/// constraint polytope and keep the positive-support solution in a random
/// cyclic order.
fn random_feasible_sequences(
    body: &HPolytope,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Vec<CapacitySequence> {
    let k = body.facet_count();
    let dim = body.dim();
    let mut out = Vec::new();
    while out.len() < count {
        let mut cons = vec![ehz::lp::LinCon::eq(
            (0..k).map(|i| body.height(i)).collect(),
            1.0,
        )];
        for row in 0..dim {
            cons.push(ehz::lp::LinCon::eq(
                (0..k).map(|i| body.normal(i)[row]).collect(),
                0.0,
            ));
        }
        let objective: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bounds = vec![(0.0, 10.0); k];
        let Ok((_, beta)) = ehz::lp::solve_lp(true, &objective, &cons, &bounds) else {
            continue;
        };
        let mut entries: Vec<(usize, f64)> = beta
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b > 1e-9)
            .map(|(i, &b)| (i, b))
            .collect();
        if entries.len() < 2 {
            continue;
        }
        entries.shuffle(rng);
        out.push(CapacitySequence::new(entries));
    }
    out
}
