use std::f64::consts::E;

use cutplane::geometry::{
    estimate_volume, generalized_partition_check, grunbaum_check, random_polytope, random_unit, VerifyConfig,
};
use cutplane::{seed, Error, SphericalPolytope};

/// Fraction of cell centers of an `n`-per-axis grid on `[-1,1]^3` inside the body, times the cube volume.
fn grid_volume_3d(p: &SphericalPolytope, n: usize) -> f64 {
    let h = 2.0 / n as f64;
    let mut inside = 0usize;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let w = [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h, -1.0 + (k as f64 + 0.5) * h];
                if p.contains(&w).unwrap() {
                    inside += 1;
                }
            }
        }
    }
    inside as f64 * h * h * h
}

#[test]
fn volume_matches_grid_count() {
    let normals = vec![
        vec![1.0, 0.2, 0.0],
        vec![0.3, 1.0, -0.1],
        vec![0.5, -0.2, 1.0],
        vec![1.0, 1.0, 0.2],
        vec![0.9, -0.3, 0.4],
    ];
    let p = SphericalPolytope::from_normals(3, &normals).unwrap();
    let grid = grid_volume_3d(&p, 200);
    let mc = estimate_volume(&p, 400_000, 1).unwrap();
    assert!((mc.value / grid - 1.0).abs() < 0.02, "mc {} grid {grid}", mc.value);
}

#[test]
fn sixty_degree_sector_split_by_bisector() {
    let a = 60f64.to_radians();
    let p = SphericalPolytope::from_normals(2, &[vec![a.cos(), a.sin()], vec![a.cos(), -a.sin()]]).unwrap();
    let r = grunbaum_check("sector", &p, &[1.0, 0.0], &VerifyConfig::new(200_000, 3)).unwrap();
    assert!(r.satisfied);
    for side in [r.ratio, r.ratio_minus] {
        assert!(side >= 1.0 / E - 3.0 * r.ratio_stderr && side <= 1.0 - 1.0 / E + 3.0 * r.ratio_stderr);
    }
    // grid oracle: sector centroid and the area beyond it along the bisector
    let n = 2000;
    let h = 1.0 / n as f64;
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..2 * n {
            let w = [(i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h];
            if p.contains(&w).unwrap() {
                pts.push(w[0]);
            }
        }
    }
    let cg = pts.iter().sum::<f64>() / pts.len() as f64;
    let beyond = pts.iter().filter(|&&x| x >= cg).count() as f64 / pts.len() as f64;
    assert!((r.ratio - beyond).abs() < 4.0 * r.ratio_stderr + 1e-3, "mc {} grid {beyond}", r.ratio);
}

#[test]
fn partition_volumes_add_up() {
    for d in 2..=4 {
        let p = random_polytope(d, d as u64);
        let v = random_unit(d, &mut seed::rng(9));
        let r = grunbaum_check("r", &p, &v, &VerifyConfig::new(50_000, d as u64)).unwrap();
        let se = (r.vol_total.stderr.powi(2) + r.vol_plus.stderr.powi(2) + r.vol_minus.stderr.powi(2)).sqrt();
        assert!((r.vol_plus.value + r.vol_minus.value - r.vol_total.value).abs() <= 3.0 * se + 1e-12);
    }
}

#[test]
fn offset_cuts_in_the_plane() {
    let mut held = 0;
    for run in 0..20u64 {
        let p = random_polytope(2, seed::derive(40, run));
        let v = random_unit(2, &mut seed::rng(seed::derive(41, run)));
        let cfg = VerifyConfig::new(50_000, run);
        match generalized_partition_check("r", &p, &v, 0.2, &cfg) {
            Ok(r) => {
                assert!(r.satisfied, "{r:?}");
                held += 1;
            }
            Err(Error::OffsetOutsideBody) => {}
            Err(e) => panic!("{e}"),
        }
        if let Ok(r) = generalized_partition_check("r", &p, &v, 0.9, &cfg) {
            assert!(r.bound < 0.004 && (r.ratio == 0.0 || r.satisfied));
        }
    }
    assert!(held > 0);
}

#[test]
fn offset_check_on_ball_at_zero_lambda() {
    let ball = SphericalPolytope::ball(2);
    let cfg = VerifyConfig::new(20_000, 5);
    let g = grunbaum_check("ball", &ball, &[0.0, 1.0], &cfg).unwrap();
    assert_eq!(generalized_partition_check("ball", &ball, &[0.0, 1.0], 0.0, &cfg).unwrap(), g);
    assert!(matches!(
        generalized_partition_check("ball", &ball, &[0.0, 1.0], 1.0, &cfg),
        Err(Error::LambdaOutOfRange(_))
    ));
}
