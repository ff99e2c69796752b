//! Ranking quality of anomaly scores against ground truth.
//!
//! AUC is the Mann-Whitney statistic: the chance that a random anomaly
//! outscores a random normal record, with ties worth one half. nDCG uses
//! binary relevance and a `1 / log2(rank + 1)` discount from rank 1, where
//! ranks come from sorting scores descending with ties broken by ascending
//! record index.

use alloc::vec::Vec;

use crate::code::log2;
use crate::error::{Error, Result};
use crate::ranking::descending_order;

/// Scores paired with anomaly flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRanking<'a> {
    scores: &'a [f64],
    anomalies: &'a [bool],
}

impl<'a> LabeledRanking<'a> {
    pub fn new(scores: &'a [f64], anomalies: &'a [bool]) -> Result<Self> {
        if scores.len() != anomalies.len() {
            return Err(Error::LengthMismatch {
                scores: scores.len(),
                labels: anomalies.len(),
            });
        }
        Ok(Self { scores, anomalies })
    }

    pub fn n_anomalies(&self) -> usize {
        self.anomalies.iter().filter(|&&a| a).count()
    }

    pub fn auc(&self) -> Result<f64> {
        let n_pos = self.n_anomalies();
        let n_neg = self.anomalies.len() - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::AucUndefined);
        }
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[a].total_cmp(&self.scores[b]));

        // Twice the Mann-Whitney U, kept in integers: 2 per win, 1 per tie.
        let mut twice_u: u128 = 0;
        let mut negatives_below: u128 = 0;
        let mut start = 0;
        while start < idx.len() {
            let score = self.scores[idx[start]];
            let mut end = start;
            let (mut pos, mut neg) = (0u128, 0u128);
            while end < idx.len() && self.scores[idx[end]].total_cmp(&score).is_eq() {
                if self.anomalies[idx[end]] {
                    pos += 1;
                } else {
                    neg += 1;
                }
                end += 1;
            }
            twice_u += 2 * pos * negatives_below + pos * neg;
            negatives_below += neg;
            start = end;
        }
        Ok(twice_u as f64 / (2 * n_pos as u128 * n_neg as u128) as f64)
    }

    /// Normalised DCG, optionally truncated to the top `cutoff` ranks.
    pub fn ndcg(&self, cutoff: Option<usize>) -> Result<f64> {
        let n_pos = self.n_anomalies();
        if n_pos == 0 {
            return Err(Error::NdcgUndefined);
        }
        let depth = cutoff.unwrap_or(self.scores.len()).min(self.scores.len());
        if depth == 0 {
            return Err(Error::InvalidConfig("nDCG cutoff must be positive"));
        }
        let ids: Vec<usize> = (0..self.scores.len()).collect();
        let order = descending_order(&ids, self.scores);
        let mut dcg = 0.0;
        for (r, &p) in order.iter().take(depth).enumerate() {
            if self.anomalies[p] {
                dcg += discount(r + 1);
            }
        }
        let mut ideal = 0.0;
        for r in 0..n_pos.min(depth) {
            ideal += discount(r + 1);
        }
        Ok(dcg / ideal)
    }
}

fn discount(rank: usize) -> f64 {
    1.0 / log2((rank + 1) as f64)
}

pub fn auc(scores: &[f64], anomalies: &[bool]) -> Result<f64> {
    LabeledRanking::new(scores, anomalies)?.auc()
}

pub fn ndcg(scores: &[f64], anomalies: &[bool], cutoff: Option<usize>) -> Result<f64> {
    LabeledRanking::new(scores, anomalies)?.ndcg(cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: bool = true;
    const N: bool = false;

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[9.0, 8.0, 1.0, 0.5], &[A, A, N, N]).unwrap(), 1.0);
        assert_eq!(auc(&[2.0; 5], &[A, N, N, A, N]).unwrap(), 0.5);
        assert_eq!(auc(&[3.0, 2.0, 1.0, 0.0], &[A, N, A, N]).unwrap(), 0.75);
        assert_eq!(auc(&[0.0, 1.0, 2.0, 3.0], &[A, A, N, N]).unwrap(), 0.0);
    }

    #[test]
    fn auc_needs_both_classes() {
        assert_eq!(auc(&[1.0, 2.0], &[A, A]), Err(Error::AucUndefined));
        assert_eq!(auc(&[1.0, 2.0], &[N, N]), Err(Error::AucUndefined));
        assert!(auc(&[1.0], &[A, N]).is_err());
    }

    #[test]
    fn ndcg_examples() {
        assert_eq!(ndcg(&[5.0, 4.0, 1.0], &[A, A, N], None).unwrap(), 1.0);
        assert_eq!(ndcg(&[5.0, 4.0, 1.0, 0.0], &[A, N, N, N], None).unwrap(), 1.0);
        let v = ndcg(&[5.0, 4.0, 3.0, 0.0], &[N, N, A, N], None).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(ndcg(&[1.0, 2.0], &[N, N], None), Err(Error::NdcgUndefined));
    }

    #[test]
    fn ndcg_ties_use_index_order() {
        // The anomaly at index 1 sits behind index 0 in a tie.
        let v = ndcg(&[1.0, 1.0], &[N, A], None).unwrap();
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn ndcg_cutoff() {
        assert_eq!(ndcg(&[5.0, 4.0, 3.0], &[N, N, A], Some(2)).unwrap(), 0.0);
        assert_eq!(ndcg(&[5.0, 4.0, 3.0], &[A, N, A], Some(1)).unwrap(), 1.0);
    }
}
