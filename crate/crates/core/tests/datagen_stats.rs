use sphtree::{
    assign_smoothing_lengths, brute_force_neighbors, build_tree, compute_root_box,
    find_neighbors_all, gen_center_clustered, gen_lattice, gen_uniform_random, load_snapshot,
    save_snapshot, BoundingBox, GenKind, GenSpec, SearchConfig, TreeParams,
};

fn unit_cube() -> BoundingBox {
    BoundingBox::cube(3, 0.0, 1.0).unwrap()
}

#[test]
fn uniform_octants_are_binomial() {
    let n = 100_000;
    let p = gen_uniform_random(n, 3, &unit_cube(), 2024).unwrap();
    let mut counts = [0usize; 8];
    for i in 0..n {
        let x = p.position(i);
        let o = (0..3).fold(0, |acc, l| acc * 2 + usize::from(x[l] >= 0.5));
        counts[o] += 1;
    }
    let mean = n as f64 / 8.0;
    let sigma = (n as f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt();
    for c in counts {
        assert!((c as f64 - mean).abs() <= 5.0 * sigma, "{counts:?}");
    }
}

#[test]
fn clustered_median_radius() {
    // Density ~ 1/r in a ball of radius R gives P(r < x) = (x/R)^2.
    let n = 100_000;
    let p = gen_center_clustered(n, 3, &unit_cube(), 99).unwrap();
    let mut r: Vec<f64> = (0..n)
        .map(|i| {
            let x = p.position(i);
            (0..3).map(|l| (x[l] - 0.5).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    r.sort_by(f64::total_cmp);
    let median = r[n / 2];
    let want = 0.5 / 2f64.sqrt();
    assert!((median - want).abs() <= 0.02 * want, "median {median}");
    assert!(r[n - 1] <= 0.5);
}

#[test]
fn clustered_2d_median_radius() {
    // In the plane a 1/r density makes the radius itself uniform.
    let n = 50_000;
    let bbox = BoundingBox::cube(2, 0.0, 1.0).unwrap();
    let p = gen_center_clustered(n, 2, &bbox, 5).unwrap();
    let mut r: Vec<f64> = (0..n)
        .map(|i| {
            let x = p.position(i);
            ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt()
        })
        .collect();
    r.sort_by(f64::total_cmp);
    let median = r[n / 2];
    assert!((median - 0.25).abs() <= 0.02 * 0.25, "median {median}");
}

#[test]
fn lattice_target_six_mean() {
    let p = gen_lattice(16, 3, &unit_cube()).unwrap();
    let p = assign_smoothing_lengths(&p, 6).unwrap();
    let tree = build_tree(&p, &compute_root_box(&p).unwrap(), &TreeParams::default()).unwrap().0;
    let mean = find_neighbors_all(&tree, &p, &SearchConfig::default()).unwrap().mean_count();
    assert!((5.0..=7.0).contains(&mean), "mean {mean}");
}

#[test]
fn target_of_everyone_gives_full_lists() {
    let n = 64;
    let p = gen_uniform_random(n, 3, &unit_cube(), 1).unwrap();
    let p = assign_smoothing_lengths(&p, n - 1).unwrap();
    let l = brute_force_neighbors(&p);
    assert!((0..n).all(|i| l.get(i).len() == n - 1));
}

#[test]
fn uniform_target_is_met_within_tolerance() {
    let p = GenSpec::uniform(10_000, 100, 31).generate().unwrap();
    let tree = build_tree(&p, &compute_root_box(&p).unwrap(), &TreeParams::default()).unwrap().0;
    let l = find_neighbors_all(&tree, &p, &SearchConfig::default()).unwrap();
    let mean = l.mean_count();
    assert!((85.0..=115.0).contains(&mean), "mean {mean}");
    // Distinct positions: every particle gets exactly the target.
    assert!((0..l.len()).all(|i| l.get(i).len() == 100));
}

#[test]
fn clustered_smoothing_lengths_shrink_toward_the_center() {
    let p = GenSpec::clustered(20_000, 50, 8).generate().unwrap();
    let (mut inner, mut outer) = (Vec::new(), Vec::new());
    for i in 0..p.len() {
        let x = p.position(i);
        let r = (0..3).map(|l| (x[l] - 0.5).powi(2)).sum::<f64>().sqrt();
        if r < 0.05 {
            inner.push(p.h()[i]);
        } else if r > 0.4 {
            outer.push(p.h()[i]);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&inner) * 1.5 < mean(&outer));
}

#[test]
fn same_seed_same_data() {
    for kind in [GenKind::Lattice, GenKind::UniformRandom, GenKind::CenterClustered] {
        let spec = GenSpec {
            kind,
            size: if kind == GenKind::Lattice { 6 } else { 300 },
            ..GenSpec::uniform(300, 20, 77)
        };
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
    }
    let a = GenSpec::uniform(300, 20, 1).generate().unwrap();
    let b = GenSpec::uniform(300, 20, 2).generate().unwrap();
    assert_ne!(a, b);
}

#[test]
fn snapshot_files_round_trip() {
    let p = GenSpec::clustered(500, 20, 4).generate().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clustered.txt");
    save_snapshot(&p, &path).unwrap();
    assert_eq!(load_snapshot(&path).unwrap(), p);
}
