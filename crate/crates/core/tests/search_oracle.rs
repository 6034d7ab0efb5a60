use proptest::prelude::*;
use sphtree::oracle::brute_force_neighbors_with;
use sphtree::search::{
    find_neighbors_all_with_stats, find_neighbors_blocked_with_stats,
    find_neighbors_one_with_stats, for_each_within, leaves_in_range,
};
use sphtree::{
    brute_force_neighbors, build_tree, compute_root_box, find_neighbors_all,
    find_neighbors_blocked, gen_center_clustered, gen_lattice, gen_uniform_random,
    reorder_particles, BoundingBox, BuildPolicy, GenSpec, NeighborLists, ParticleSet, Schedule,
    SearchConfig, Tree, TreeParams,
};

fn unit_cube() -> BoundingBox {
    BoundingBox::cube(3, 0.0, 1.0).unwrap()
}

fn canonical(mut l: NeighborLists) -> NeighborLists {
    l.canonicalize();
    l.by_query_id()
}

fn tree_for(p: &ParticleSet, params: &TreeParams) -> Tree {
    let bbox = compute_root_box(p).unwrap();
    build_tree(p, &bbox, params).unwrap().0
}

fn assert_matches_oracle(p: &ParticleSet, params: &TreeParams, config: &SearchConfig) {
    let tree = tree_for(p, params);
    let got = canonical(find_neighbors_all(&tree, p, config).unwrap());
    let want = canonical(brute_force_neighbors_with(p, config.include_self));
    assert_eq!(got, want, "{params:?} {config:?}");
}

#[test]
fn uniform_fixed_h_matches_oracle() {
    let p = gen_uniform_random(200, 3, &unit_cube(), 42)
        .unwrap()
        .with_smoothing_lengths(vec![0.1; 200])
        .unwrap();
    for policy in [BuildPolicy::Adaptive, BuildPolicy::FixedOctree] {
        for include_self in [false, true] {
            let config = SearchConfig { include_self, ..SearchConfig::default() };
            assert_matches_oracle(&p, &TreeParams::default().with_policy(policy), &config);
        }
    }
}

#[test]
fn clustered_variable_h_matches_oracle_for_every_schedule() {
    let p = GenSpec::clustered(2000, 30, 3).generate().unwrap();
    for policy in [BuildPolicy::Adaptive, BuildPolicy::FixedOctree] {
        for schedule in Schedule::all() {
            for threads in [1, 4] {
                let config = SearchConfig::new(threads, schedule);
                assert_matches_oracle(&p, &TreeParams::default().with_policy(policy), &config);
            }
        }
    }
}

#[test]
fn lattice_boundary_ties_match_oracle() {
    // Radius exactly one spacing: neighbors sit on the sphere.
    let mut p = gen_lattice(12, 3, &unit_cube()).unwrap();
    let a = 1.0 / 12.0;
    p = p.with_smoothing_lengths(vec![a / 2.0; p.len()]).unwrap();
    let tree = tree_for(&p, &TreeParams::default());
    let got = canonical(find_neighbors_all(&tree, &p, &SearchConfig::default()).unwrap());
    assert_eq!(got, canonical(brute_force_neighbors(&p)));
}

#[test]
fn two_dimensional_sets_match_oracle() {
    let bbox = BoundingBox::cube(2, -1.0, 1.0).unwrap();
    let p = gen_center_clustered(1500, 2, &bbox, 8).unwrap();
    let p = sphtree::assign_smoothing_lengths(&p, 12).unwrap();
    for policy in [BuildPolicy::Adaptive, BuildPolicy::FixedOctree] {
        assert_matches_oracle(&p, &TreeParams::default().with_policy(policy), &SearchConfig::new(3, Schedule::guided()));
    }
}

#[test]
fn results_do_not_depend_on_thread_count_or_schedule() {
    let p = GenSpec::uniform(3000, 40, 5).generate().unwrap();
    let tree = tree_for(&p, &TreeParams::default());
    let base = find_neighbors_all(&tree, &p, &SearchConfig::default()).unwrap();
    for schedule in Schedule::all() {
        for threads in [2, 3, 8] {
            let got = find_neighbors_all(&tree, &p, &SearchConfig::new(threads, schedule)).unwrap();
            assert_eq!(got, base);
        }
    }
}

#[test]
fn policy_does_not_change_results() {
    let p = GenSpec::clustered(4000, 50, 12).generate().unwrap();
    let a = canonical(find_neighbors_all(&tree_for(&p, &TreeParams::default()), &p, &SearchConfig::default()).unwrap());
    let o = canonical(find_neighbors_all(&tree_for(&p, &TreeParams::octree()), &p, &SearchConfig::default()).unwrap());
    assert_eq!(a, o);
}

#[test]
fn uniform_h_lists_are_symmetric() {
    let p = gen_center_clustered(1500, 3, &unit_cube(), 2)
        .unwrap()
        .with_smoothing_lengths(vec![0.04; 1500])
        .unwrap();
    let tree = tree_for(&p, &TreeParams::default());
    let l = find_neighbors_all(&tree, &p, &SearchConfig::default()).unwrap();
    let mut pairs = std::collections::HashSet::new();
    for (q, ns) in l.iter() {
        for &n in ns {
            pairs.insert((q, n));
        }
    }
    assert!(pairs.iter().all(|&(a, b)| pairs.contains(&(b, a))));
}

#[test]
fn pruned_leaves_hold_no_neighbors() {
    let p = GenSpec::clustered(3000, 30, 21).generate().unwrap();
    let tree = tree_for(&p, &TreeParams::default());
    for q in (0..p.len()).step_by(7) {
        let x = p.position(q);
        let radius = 2.0 * p.h()[q];
        let visited: std::collections::HashSet<*const _> = leaves_in_range(&tree, &x, radius)
            .into_iter()
            .map(|l| l as *const _)
            .collect();
        for leaf in tree.leaves() {
            if visited.contains(&(leaf as *const _)) {
                continue;
            }
            for &i in tree.particles_of(leaf) {
                let y = p.position(i as usize);
                let d2: f64 = (0..3).map(|l| (y[l] - x[l]).powi(2)).sum();
                assert!(d2 > radius * radius, "pruned leaf held neighbor {i} of {q}");
            }
        }
    }
}

#[test]
fn for_each_within_reports_true_distances() {
    let p = GenSpec::uniform(1000, 20, 4).generate().unwrap();
    let tree = tree_for(&p, &TreeParams::default());
    let x = [0.3, 0.6, 0.45];
    let mut got = Vec::new();
    for_each_within(&tree, &p, &x, 0.1, |i, d2| {
        let y = p.position(i as usize);
        let want: f64 = (0..3).map(|l| (y[l] - x[l]).powi(2)).sum();
        assert_eq!(d2, want);
        got.push(i);
    });
    got.sort_unstable();
    let want: Vec<u32> = (0..p.len() as u32)
        .filter(|&i| {
            let y = p.position(i as usize);
            (0..3).map(|l| (y[l] - x[l]).powi(2)).sum::<f64>() <= 0.01
        })
        .collect();
    assert_eq!(got, want);
}

#[test]
fn best_case_lattice_visits_are_bounded() {
    for m in [8usize, 16, 32] {
        let p = gen_lattice(m, 3, &unit_cube()).unwrap();
        let a = 1.0 / m as f64;
        let p = p.with_smoothing_lengths(vec![0.75 * a; p.len()]).unwrap();
        let (tree, d) = build_tree(&p, &unit_cube(), &TreeParams::default()).unwrap();
        assert_eq!(d.max_depth, 1);
        let mut max = 0;
        for q in 0..p.len() {
            let (_, s) = find_neighbors_one_with_stats(&tree, &p, q, p.h()[q], false).unwrap();
            max = max.max(s.node_visits);
            let x = p.position(q);
            let interior = (0..3).all(|l| x[l] > 2.0 * a && x[l] < 1.0 - 2.0 * a);
            if interior {
                assert_eq!(s.node_visits, 28, "m = {m}, q = {q}");
            }
        }
        assert_eq!(max, 28, "m = {m}");
    }
}

#[test]
fn reorder_is_a_bijection_and_rebuild_is_identity() {
    let p = GenSpec::clustered(5000, 30, 17).generate().unwrap();
    let bbox = compute_root_box(&p).unwrap();
    let (tree, _) = build_tree(&p, &bbox, &TreeParams::default()).unwrap();
    let (r, perm) = reorder_particles(&tree, &p).unwrap();
    let mut seen = vec![false; p.len()];
    for &o in perm.forward() {
        assert!(!std::mem::replace(&mut seen[o as usize], true));
    }
    assert_eq!(perm.unapply(&perm.apply(p.ids())), p.ids());
    for i in 0..p.len() {
        assert_eq!(r.position(i), p.position(perm.forward()[i] as usize));
    }
    let (rt, _) = build_tree(&r, &bbox, &TreeParams::default()).unwrap();
    assert!(rt.walk_order().iter().enumerate().all(|(i, &o)| i as u32 == o));

    let before = canonical(find_neighbors_all(&tree, &p, &SearchConfig::default()).unwrap());
    let after = canonical(find_neighbors_all(&rt, &r, &SearchConfig::default()).unwrap());
    assert_eq!(before, after);
}

#[test]
fn blocked_search_matches_plain_search() {
    let p = GenSpec::clustered(4000, 40, 6).generate().unwrap();
    let tree = tree_for(&p, &TreeParams::default());
    let config = SearchConfig::default();
    let (plain, plain_stats) = find_neighbors_all_with_stats(&tree, &p, &config).unwrap();
    let plain = canonical(plain);
    for block in [1, 2, 8, 64, tree.leaves().len(), usize::MAX] {
        let (got, stats) = find_neighbors_blocked_with_stats(&tree, &p, block, &config).unwrap();
        assert_eq!(canonical(got), plain, "block = {block}");
        assert!(stats.node_visits <= plain_stats.node_visits, "block = {block}");
    }
    assert!(find_neighbors_blocked(&tree, &p, 0, &config).is_err());
    let threaded = find_neighbors_blocked(&tree, &p, 4, &SearchConfig::new(4, Schedule::dynamic())).unwrap();
    assert_eq!(canonical(threaded), plain);
}

#[test]
fn mismatched_tree_is_rejected() {
    let p = GenSpec::uniform(100, 10, 1).generate().unwrap();
    let q = GenSpec::uniform(120, 10, 1).generate().unwrap();
    let tree = tree_for(&p, &TreeParams::default());
    assert!(find_neighbors_all(&tree, &q, &SearchConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_sets_match_oracle(
        pts in prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 1..250),
        hs in prop::collection::vec(0.01f64..2.0, 250),
        s in 1usize..12,
        beta in 0.1f64..1.0,
        octree in any::<bool>(),
        threads in 1usize..4,
        block in 1usize..6,
    ) {
        let h = hs[..pts.len()].to_vec();
        let p = ParticleSet::from_points(&pts, h).unwrap();
        let policy = if octree { BuildPolicy::FixedOctree } else { BuildPolicy::Adaptive };
        let params = TreeParams { bucket_size: s, beta, policy, ..TreeParams::default() };
        let tree = tree_for(&p, &params);
        let config = SearchConfig::new(threads, Schedule::Static);
        let want = canonical(brute_force_neighbors(&p));
        prop_assert_eq!(&canonical(find_neighbors_all(&tree, &p, &config).unwrap()), &want);
        prop_assert_eq!(&canonical(find_neighbors_blocked(&tree, &p, block, &config).unwrap()), &want);
    }

    #[test]
    fn snapped_grid_points_match_oracle(
        cells in prop::collection::vec(prop::array::uniform2(0u8..10), 2..200),
        h in prop::sample::select(vec![0.05, 0.1, 0.15, 0.25]),
    ) {
        // Grid-aligned 2D points put many pairs exactly at the radius and
        // many particles exactly on sub-cell faces.
        let pts: Vec<[f64; 2]> = cells.iter().map(|c| [f64::from(c[0]) * 0.1, f64::from(c[1]) * 0.1]).collect();
        let p = ParticleSet::from_points_uniform_h(&pts, h).unwrap();
        let tree = tree_for(&p, &TreeParams::default().with_bucket_size(2));
        prop_assert_eq!(
            canonical(find_neighbors_all(&tree, &p, &SearchConfig::default()).unwrap()),
            canonical(brute_force_neighbors(&p))
        );
    }
}
