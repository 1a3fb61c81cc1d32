use proptest::prelude::*;

use cutplane::active::{select_query, Pool, QueryScore};
use cutplane::centers::{hit_and_run, SamplerConfig};
use cutplane::compression::CompressionScheme;
use cutplane::harness::Config;
use cutplane::perceptron::{localize, OracleStrategy};
use cutplane::{build_version_space, CenterEstimate, CenterMethod, Dataset, SphericalPolytope};

/// Points labeled by a fixed direction, keeping a margin of at least 0.05.
fn separable(dim: usize) -> impl Strategy<Value = Dataset> {
    (prop::collection::vec(-1.0f64..1.0, dim), prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dim), 1..60))
        .prop_filter_map("degenerate", |(w, xs)| {
            let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n < 0.1 {
                return None;
            }
            let rows: Vec<(Vec<f64>, i64)> = xs
                .into_iter()
                .filter_map(|x| {
                    let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / n;
                    (s.abs() >= 0.05).then_some((x, if s > 0.0 { 1 } else { -1 }))
                })
                .collect();
            if rows.is_empty() {
                None
            } else {
                Dataset::from_rows(rows).ok()
            }
        })
}

fn strategy() -> impl Strategy<Value = OracleStrategy> {
    prop_oneof![
        Just(OracleStrategy::largest_error()),
        Just(OracleStrategy::smallest_error()),
        any::<u64>().prop_map(OracleStrategy::random_error),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn localize_ends_inside(data in separable(3), st in strategy()) {
        let t = localize(&data, st, u64::MAX).unwrap();
        let vs = build_version_space(&data).unwrap();
        prop_assert!(vs.contains(&t.w_final).unwrap());
        prop_assert_eq!(t.updates_per_round.iter().sum::<u64>(), t.total_updates);
        let mut planes = t.plane_indices.clone();
        planes.sort_unstable();
        planes.dedup();
        prop_assert_eq!(planes.len(), t.num_planes());
    }

    #[test]
    fn scheme_text_round_trips(data in separable(2), st in strategy()) {
        let s = CompressionScheme::from_trace(&localize(&data, st, u64::MAX).unwrap(), st);
        let back: CompressionScheme = s.to_text().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn sampler_stays_inside(normals in prop::collection::vec(prop::collection::vec(0.1f64..1.0, 3), 0..5), s in any::<u64>()) {
        let p = SphericalPolytope::from_normals(3, &normals).unwrap();
        for x in hit_and_run(&p, 50, &SamplerConfig::for_dim(3, s)).unwrap() {
            prop_assert!(p.contains(&x).unwrap());
        }
    }

    #[test]
    fn queries_skip_marked_points(xs in prop::collection::vec(prop::collection::vec(0.5f64..2.0, 2), 1..30), mask_bits in any::<u32>()) {
        let pool = Pool::new(xs.clone()).unwrap();
        let mask: Vec<bool> = (0..xs.len()).map(|i| mask_bits >> (i % 32) & 1 == 1).collect();
        let c = CenterEstimate { point: vec![0.6, -0.8], method: CenterMethod::Chebyshev, n_samples: 0, inscribed_radius: None };
        match select_query(&c, &pool, &mask, QueryScore::Absolute) {
            Ok(i) => prop_assert!(!mask[i]),
            Err(_) => prop_assert!(mask.iter().all(|&m| m)),
        }
    }

    #[test]
    fn config_values_round_trip(v in any::<u64>(), x in -1e6f64..1e6) {
        let mut c = Config::new();
        c.set("a", v);
        c.set("b", x);
        let back = Config::parse(&format!("a = {}\nb = {}\n", c.raw("a").unwrap(), c.raw("b").unwrap())).unwrap();
        prop_assert_eq!(back.get("a", 0u64).unwrap(), v);
        prop_assert_eq!(back.get("b", 0.0f64).unwrap(), x);
        prop_assert_eq!(back.hash(), c.hash());
    }
}
