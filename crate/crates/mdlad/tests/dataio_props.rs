use mdlad::dataset::{load_csv, one_hot_encode, LoadOptions};
use mdlad::export::{export_ranking, load_ranking, Format};
use mdlad::synth::{generate_synthetic, Attribute, SyntheticSpec};
use mdlad_core::ScoredRanking;
use proptest::prelude::*;

fn ordered_ids(r: &ScoredRanking) -> Vec<usize> {
    r.order().iter().map(|&p| r.ids()[p]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ranking_round_trip(
        scores in prop::collection::vec(
            prop_oneof![0.0f64..1e4, Just(1.0), (0u32..20).prop_map(|k| f64::from(k) / 3.0)],
            0..40,
        ),
        json in any::<bool>(),
        labelled in any::<bool>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ranking");
        let format = if json { Format::Json } else { Format::Csv };
        let labels: Vec<bool> = (0..scores.len()).map(|i| i % 3 == 0).collect();
        let r = ScoredRanking::new(scores.clone());
        export_ranking(&r, labelled.then_some(labels.as_slice()), &path, format).unwrap();
        let back = load_ranking(&path, format).unwrap();
        prop_assert_eq!(ordered_ids(&back.ranking), ordered_ids(&r));
        for (&id, &s) in back.ranking.ids().iter().zip(back.ranking.scores()) {
            let rel = (s - scores[id]).abs() / scores[id].abs().max(f64::MIN_POSITIVE);
            prop_assert!(rel < 1e-12);
        }
        prop_assert_eq!(back.labels.is_some(), labelled && !scores.is_empty());
    }

    #[test]
    fn export_is_deterministic(scores in prop::collection::vec(0.0f64..100.0, 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let r = ScoredRanking::new(scores);
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        export_ranking(&r, None, &a, Format::Csv).unwrap();
        export_ranking(&r, None, &b, Format::Csv).unwrap();
        prop_assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn one_hot_keeps_records_and_fixes_binary(
        cells in prop::collection::vec(prop::collection::vec(0u8..4, 3), 1..30),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut text = String::from("x,y,z\n");
        for r in &cells {
            text += &format!("v{},w{},{}\n", r[0], r[1] % 2, r[2] % 2);
        }
        std::fs::write(&path, text).unwrap();
        let d = load_csv(&path, &LoadOptions::default()).unwrap();
        let e = one_hot_encode(&d);
        prop_assert_eq!(e.n_records(), d.n_records());
        prop_assert!(e.table().arities().iter().all(|&a| a <= 2));
        prop_assert_eq!(one_hot_encode(&e), e.clone());
        for (row, orig) in e.table().rows().zip(&cells) {
            if d.table().arities()[0] > 2 {
                // Exactly one indicator per expanded column.
                let k = d.table().arities()[0] as usize;
                prop_assert_eq!(row[..k].iter().sum::<u32>(), 1);
                let value = format!("v{}", orig[0]);
                let hot = row[..k].iter().position(|&b| b == 1).unwrap();
                prop_assert_eq!(&d.columns()[0].domain[hot], &value);
            }
        }
    }

    #[test]
    fn synthetic_data_is_reproducible(seed in any::<u64>()) {
        let spec = SyntheticSpec::blocks(&[40, 30], 6, 2, seed);
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        generate_synthetic(&spec).unwrap().0.write_csv(&a, b',').unwrap();
        generate_synthetic(&spec).unwrap().0.write_csv(&b, b',').unwrap();
        prop_assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

/// Within each cluster of the default data, every attribute's frequency of
/// ones is within five percentage points of its parameter.
#[test]
fn cluster_frequencies_match_parameters() {
    for seed in 0..10 {
        let spec = SyntheticSpec { seed, ..SyntheticSpec::default() };
        let (d, _) = generate_synthetic(&spec).unwrap();
        let mut start = 0;
        for (c, &size) in spec.n_per_cluster.iter().enumerate() {
            for j in 0..spec.m() {
                let ones = (start..start + size).filter(|&i| d.table().row(i)[j] == 1).count();
                let freq = ones as f64 / size as f64;
                let Attribute::Bernoulli(p) = spec.clusters[c][j] else { unreachable!() };
                assert!(
                    (freq - p).abs() <= 0.05,
                    "seed {seed} cluster {c} attribute {j}: {freq} vs {p}"
                );
            }
            start += size;
        }
    }
}
