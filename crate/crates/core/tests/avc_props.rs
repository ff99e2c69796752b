use mdlad_core::{fit_avc, CodedTable, ScoringConfig};
use proptest::prelude::*;

fn table_strategy() -> impl Strategy<Value = CodedTable> {
    (prop::collection::vec(1u32..5, 1..6), 1usize..40).prop_flat_map(|(arities, n)| {
        let cells: Vec<_> = arities.iter().map(|&a| 0..a).collect();
        prop::collection::vec(cells, n)
            .prop_map(move |rows| CodedTable::from_rows(arities.clone(), &rows).unwrap())
    })
}

fn permute_columns(t: &CodedTable, perm: &[usize]) -> CodedTable {
    let arities = perm.iter().map(|&j| t.arities()[j]).collect();
    let rows: Vec<Vec<u32>> = t.rows().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
    CodedTable::from_rows(arities, &rows).unwrap()
}

fn doubled(t: &CodedTable) -> CodedTable {
    let rows: Vec<Vec<u32>> = t.rows().chain(t.rows()).map(|r| r.to_vec()).collect();
    CodedTable::from_rows(t.arities().to_vec(), &rows).unwrap()
}

proptest! {
    #[test]
    fn column_order_does_not_change_scores(t in table_strategy(), shift in 0usize..8) {
        let w = t.width();
        let perm: Vec<usize> = (0..w).map(|j| (j + shift) % w).rev().collect();
        let p = permute_columns(&t, &perm);
        for config in [ScoringConfig::LAPLACE_SUM, ScoringConfig::MLE_MEAN] {
            let a = fit_avc(&t, config).unwrap().score_all(&t).unwrap();
            let b = fit_avc(&p, config).unwrap().score_all(&p).unwrap();
            for (x, y) in a.scores().iter().zip(b.scores()) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn duplicating_records(t in table_strategy()) {
        let d = doubled(&t);
        let mle = fit_avc(&t, ScoringConfig::MLE_MEAN).unwrap();
        let mle2 = fit_avc(&d, ScoringConfig::MLE_MEAN).unwrap();
        let lap = fit_avc(&t, ScoringConfig::LAPLACE_SUM).unwrap();
        let lap2 = fit_avc(&d, ScoringConfig::LAPLACE_SUM).unwrap();
        let n = t.n_rows() as f64;
        for r in t.rows() {
            prop_assert!((mle.score(r).unwrap() - mle2.score(r).unwrap()).abs() <= 1e-12);
            // Per attribute the corrected probability moves by at most
            // (k - 1) / (n + k) relative; bound the log change loosely by
            // log2(1 + k/n) per attribute.
            let bound: f64 = t.arities().iter().map(|&k| (1.0 + 2.0 * f64::from(k) / n).log2()).sum();
            prop_assert!((lap.score(r).unwrap() - lap2.score(r).unwrap()).abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn sum_and_mean_rank_alike(t in table_strategy()) {
        let sum = fit_avc(&t, ScoringConfig::LAPLACE_SUM).unwrap();
        let mean = sum.clone().with_config(ScoringConfig {
            aggregation: mdlad_core::Aggregation::Mean,
            ..ScoringConfig::LAPLACE_SUM
        });
        let a = sum.score_all(&t).unwrap();
        let b = mean.score_all(&t).unwrap();
        prop_assert_eq!(a.order(), b.order());
    }
}
