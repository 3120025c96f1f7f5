use proptest::prelude::*;
use qwalk::bloch::{bessel_j, bulk_probability_offset, pbc_amplitude};
use qwalk::dynamics::{amplitude, classical_field, quantum_field, snapshot_run};
use qwalk::limiting::{limiting_field, star_contrast};
use qwalk::spectral::{decompose_rows, default_tau};
use qwalk::{
    build_adjacency, decompose, linear_to_node, mirror, node_to_linear, special_nodes, Boundary,
    LatticeSpec, Node,
};

fn node(side: usize) -> impl Strategy<Value = Node> {
    (1..=side, 1..=side).prop_map(|(x, y)| Node::new(x, y))
}

fn lattice() -> impl Strategy<Value = (usize, Boundary)> {
    (1usize..=10, any::<bool>()).prop_map(|(n, pbc)| {
        let b = if pbc && n >= 3 { Boundary::Periodic } else { Boundary::Open };
        (n, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn adjacency_is_symmetric_with_zero_row_sums((side, boundary) in lattice()) {
        let a = build_adjacency(LatticeSpec::new(side, boundary, 1.0).unwrap());
        let dim = side * side;
        for i in 0..dim {
            prop_assert_eq!(a.row(i).iter().sum::<f64>(), 0.0);
            for j in 0..dim {
                prop_assert_eq!(a.get(i, j), a.get(j, i));
            }
            let diag = a.get(i, i);
            prop_assert!(diag <= 4.0);
            if boundary == Boundary::Periodic {
                prop_assert_eq!(diag, 4.0);
            }
        }
    }

    #[test]
    fn adjacency_commutes_with_mirror((side, boundary) in lattice()) {
        let a = build_adjacency(LatticeSpec::new(side, boundary, 1.0).unwrap());
        let m = |i: usize| node_to_linear(mirror(linear_to_node(i, side).unwrap(), side).unwrap(), side).unwrap();
        for i in 0..side * side {
            for j in 0..side * side {
                prop_assert_eq!(a.get(i, j), a.get(m(i), m(j)));
            }
        }
    }

    #[test]
    fn index_round_trip(side in 1usize..=60, seed in any::<usize>()) {
        let idx = seed % (side * side);
        let n = linear_to_node(idx, side).unwrap();
        prop_assert_eq!(node_to_linear(n, side).unwrap(), idx);
        prop_assert_eq!(mirror(mirror(n, side).unwrap(), side).unwrap(), n);
    }

    #[test]
    fn quantum_source_symmetry(
        (side, j, k) in (1usize..=8).prop_flat_map(|n| (Just(n), node(n), node(n))),
        t in 0.0f64..20.0,
    ) {
        let eig = decompose(&build_adjacency(LatticeSpec::open(side).unwrap())).unwrap();
        let forward = amplitude(&eig, j, k, t, 1.0).unwrap().norm_sqr();
        let backward = amplitude(&eig, k, j, t, 1.0).unwrap().norm_sqr();
        prop_assert!((forward - backward).abs() <= 1e-12);
    }

    #[test]
    fn classical_return_decreases(
        (side, j) in (2usize..=8).prop_flat_map(|n| (Just(n), node(n))),
        t in 0.0f64..10.0,
        dt in 0.01f64..2.0,
    ) {
        let eig = decompose(&build_adjacency(LatticeSpec::open(side).unwrap())).unwrap();
        let idx = node_to_linear(j, side).unwrap();
        let early = classical_field(&eig, j, t, 1.0).unwrap().values[idx];
        let late = classical_field(&eig, j, t + dt, 1.0).unwrap().values[idx];
        prop_assert!(late <= early + 1e-12);
        prop_assert!(late >= 1.0 / (side * side) as f64 - 1e-12);
    }
}

#[test]
fn periodic_amplitude_matches_spectral_path() {
    for side in [3, 4, 7, 10] {
        let eig = decompose(&build_adjacency(LatticeSpec::periodic(side).unwrap())).unwrap();
        let j = Node::new(1, 2);
        for t in [0.0, 0.3, 1.7, 6.0, 25.0] {
            for idx in 0..side * side {
                let k = linear_to_node(idx, side).unwrap();
                let spectral = amplitude(&eig, j, k, t, 1.0).unwrap();
                let modes = pbc_amplitude(side, j, k, t, 1.0).unwrap();
                assert!((spectral - modes).norm() <= 1e-10, "N={side} t={t} k={k:?}");
            }
        }
    }
}

#[test]
fn bulk_partial_sums_reach_one() {
    for t in [0.5, 3.0, 10.0, 40.0] {
        let m = (2.0 * t) as i64 + 30;
        let sum: f64 = (-m..=m)
            .flat_map(|dx| (-m..=m).map(move |dy| (dx, dy)))
            .map(|(dx, dy)| bulk_probability_offset(dx, dy, t, 1.0).unwrap())
            .sum();
        assert!((sum - 1.0).abs() <= 1e-8, "t={t}: {sum}");
    }
}

#[test]
fn short_times_follow_the_bulk() {
    for side in [15, 21] {
        let a = build_adjacency(LatticeSpec::open(side).unwrap());
        let m = special_nodes(side).middle.unwrap();
        let eig = decompose_rows(&a, &[node_to_linear(m, side).unwrap()]).unwrap();
        for i in 0..=40 {
            let t = i as f64 * 0.05;
            let finite = amplitude(&eig, m, m, t, 1.0).unwrap().norm_sqr();
            let bulk = bessel_j(0, 2.0 * t).unwrap().powi(4);
            assert!((finite - bulk).abs() <= 1e-3, "N={side} t={t}");
        }
    }
}

#[test]
fn corner_walk_concentrates_on_the_diagonal() {
    let side = 15;
    let eig = decompose(&build_adjacency(LatticeSpec::open(side).unwrap())).unwrap();
    let c = special_nodes(side).corner;
    let times: Vec<f64> = (1..=8).map(|i| i as f64).collect();
    for field in snapshot_run(&eig, c, &times, 1.0).unwrap() {
        let on: f64 = (1..=side).map(|i| field.get(Node::new(i, i)).unwrap()).sum::<f64>() / side as f64;
        let off = (1.0 - on * side as f64) / (side * side - side) as f64;
        assert!(on > off, "t={}: {on} vs {off}", field.time);
    }
}

#[test]
fn middle_source_limiting_field() {
    for side in [5, 7, 9, 11] {
        let a = build_adjacency(LatticeSpec::open(side).unwrap());
        let eig = decompose(&a).unwrap();
        let p = eig.degeneracies(default_tau(&a)).unwrap();
        let m = special_nodes(side).middle.unwrap();
        let chi = limiting_field(&eig, &p, m).unwrap();
        assert!((chi.total() - 1.0).abs() <= 1e-10);
        for idx in 0..side * side {
            let k = linear_to_node(idx, side).unwrap();
            let mk = mirror(k, side).unwrap();
            assert!((chi.get(k).unwrap() - chi.get(mk).unwrap()).abs() <= 1e-12);
        }
        let (on, off) = star_contrast(&chi, m).unwrap();
        assert!(on > off, "N={side}: star {on} vs rest {off}");
    }
}

#[test]
fn limiting_field_mirror_covariance() {
    let side = 6;
    let a = build_adjacency(LatticeSpec::open(side).unwrap());
    let eig = decompose(&a).unwrap();
    let p = eig.degeneracies(default_tau(&a)).unwrap();
    for j in [Node::new(1, 1), Node::new(2, 5), Node::new(3, 3)] {
        let direct = limiting_field(&eig, &p, j).unwrap();
        let image = limiting_field(&eig, &p, mirror(j, side).unwrap()).unwrap();
        for idx in 0..side * side {
            let k = linear_to_node(idx, side).unwrap();
            let mk = mirror(k, side).unwrap();
            assert!((direct.get(k).unwrap() - image.get(mk).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn corner_symmetry_at_five_and_asymmetry_at_six() {
    let chi = |side: usize| {
        let a = build_adjacency(LatticeSpec::open(side).unwrap());
        let eig = decompose(&a).unwrap();
        let p = eig.degeneracies(default_tau(&a)).unwrap();
        let s = special_nodes(side);
        let f = limiting_field(&eig, &p, s.corner).unwrap();
        (f.get(s.corner).unwrap(), f.get(s.opposite_corner).unwrap())
    };
    let (cc, oc) = chi(5);
    assert!((cc - oc).abs() * 25.0 <= 1e-6, "{cc} {oc}");
    let (cc, oc) = chi(6);
    assert!((cc - oc).abs() * 36.0 > 1e-3, "{cc} {oc}");
}

#[test]
fn quantum_field_stays_normalized_on_long_runs() {
    let side = 12;
    let eig = decompose(&build_adjacency(LatticeSpec::open(side).unwrap())).unwrap();
    for t in [0.0, 1.0, 50.0, 500.0] {
        let f = quantum_field(&eig, Node::new(3, 7), t, 1.0).unwrap();
        assert!((f.total() - 1.0).abs() <= 1e-10);
    }
}

/// Bisection on an independent power series for J_0.
#[test]
fn first_zero_of_j0() {
    let series = |x: f64| {
        let (mut term, mut sum) = (1.0, 1.0);
        for m in 1..60 {
            term *= -(x * x / 4.0) / (m * m) as f64;
            sum += term;
        }
        sum
    };
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if series(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = 0.5 * (lo + hi);
    assert!((zero - 2.404_825_557_695_773).abs() < 1e-12);
    assert!(bessel_j(0, zero).unwrap().abs() < 1e-13);
}
