use mdlad_core::{auc, ndcg};
use proptest::prelude::*;

fn pair_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0.0;
    for (i, &a) in labels.iter().enumerate() {
        for (j, &b) in labels.iter().enumerate() {
            if a && !b {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    credit += 1.0;
                } else if scores[i] == scores[j] {
                    credit += 0.5;
                }
            }
        }
    }
    credit / pairs
}

fn definition_ndcg(scores: &[f64], labels: &[bool]) -> f64 {
    // Rank r (1-based) of record i: records with a higher score, or the same
    // score and a smaller index, come first.
    let n = scores.len();
    let mut dcg = 0.0;
    for i in 0..n {
        if !labels[i] {
            continue;
        }
        let ahead = (0..n)
            .filter(|&j| scores[j] > scores[i] || (scores[j] == scores[i] && j < i))
            .count();
        dcg += 1.0 / ((ahead + 2) as f64).log2();
    }
    let relevant = labels.iter().filter(|&&l| l).count();
    let ideal: f64 = (1..=relevant).map(|r| 1.0 / ((r + 1) as f64).log2()).sum();
    dcg / ideal
}

fn case() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..=8).prop_flat_map(|n| {
        (
            // A small score alphabet so ties are common.
            prop::collection::vec((0u8..5).prop_map(f64::from), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn auc_matches_pair_counting((scores, labels) in case()) {
        let both = labels.iter().any(|&l| l) && labels.iter().any(|&l| !l);
        match auc(&scores, &labels) {
            Ok(v) => {
                prop_assert!(both);
                prop_assert!((v - pair_auc(&scores, &labels)).abs() < 1e-12);
            }
            Err(_) => prop_assert!(!both),
        }
    }

    #[test]
    fn ndcg_matches_definition((scores, labels) in case()) {
        match ndcg(&scores, &labels, None) {
            Ok(v) => prop_assert!((v - definition_ndcg(&scores, &labels)).abs() < 1e-12),
            Err(_) => prop_assert!(labels.iter().all(|&l| !l)),
        }
    }

    #[test]
    fn metrics_ignore_increasing_transforms(
        scores in prop::collection::vec(-5.0f64..5.0, 2..30),
        seed in any::<u64>(),
    ) {
        let labels: Vec<bool> = (0..scores.len()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let affine: Vec<f64> = scores.iter().map(|x| 2.0 * x + 7.0).collect();
        let exp: Vec<f64> = scores.iter().map(|x| x.exp()).collect();
        // Exact ties must survive the transforms for the claim to apply.
        for t in [&affine, &exp] {
            for i in 0..scores.len() {
                for j in 0..scores.len() {
                    prop_assume!((scores[i] < scores[j]) == (t[i] < t[j]));
                }
            }
        }
        let a = auc(&scores, &labels).unwrap();
        let d = ndcg(&scores, &labels, None).unwrap();
        for t in [&affine, &exp] {
            prop_assert_eq!(auc(t, &labels).unwrap().to_bits(), a.to_bits());
            prop_assert_eq!(ndcg(t, &labels, None).unwrap().to_bits(), d.to_bits());
        }
    }
}

#[test]
fn all_ties_give_one_half() {
    for n in 2..20 {
        let scores = vec![3.25; n];
        let labels: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        assert_eq!(auc(&scores, &labels).unwrap(), 0.5);
    }
}

#[test]
fn reversed_perfect_ranking() {
    let scores = [1.0, 2.0, 3.0, 4.0, 5.0];
    let labels = [true, true, false, false, false];
    assert_eq!(auc(&scores, &labels).unwrap(), 0.0);
}

#[test]
fn ndcg_falls_as_the_anomaly_sinks() {
    let n = 10;
    let mut last = f64::INFINITY;
    for pos in 0..n {
        let scores: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        let labels: Vec<bool> = (0..n).map(|i| i == pos).collect();
        let v = ndcg(&scores, &labels, None).unwrap();
        assert!(v <= last);
        last = v;
    }
}
