use alloc::vec::Vec;

/// Relative gap below which two scores count as tied when ranking.
///
/// Codelengths that agree in exact arithmetic can differ in the last few
/// bits once summed in floating point (for instance `4/11 * 5/11 * 5/12` and
/// `5/11 * 5/11 * 4/12`). Treating such near-equal scores as ties keeps the
/// id tie-break deterministic.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Per-record scores in bits with the induced descending order.
///
/// Higher scores rank first. Runs of scores whose consecutive gaps are within
/// [`TIE_TOLERANCE`] (relative) form a tie and are ordered by ascending
/// record id.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRanking {
    ids: Vec<usize>,
    scores: Vec<f64>,
    order: Vec<usize>,
}

impl ScoredRanking {
    /// Scores for records `0..scores.len()`.
    pub fn new(scores: Vec<f64>) -> Self {
        let ids = (0..scores.len()).collect();
        Self::with_ids(ids, scores)
    }

    /// # Panics
    /// If `ids` and `scores` differ in length.
    pub fn with_ids(ids: Vec<usize>, scores: Vec<f64>) -> Self {
        assert_eq!(ids.len(), scores.len(), "ids and scores must align");
        let order = tied_descending_order(&ids, &scores);
        Self { ids, scores, order }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Positions into `ids`/`scores`, best first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `(rank, id, score)` with 1-based ranks.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.order
            .iter()
            .enumerate()
            .map(|(r, &p)| (r + 1, self.ids[p], self.scores[p]))
    }

    /// 1-based rank of every position.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = alloc::vec![0; self.len()];
        for (r, &p) in self.order.iter().enumerate() {
            ranks[p] = r + 1;
        }
        ranks
    }
}

fn near(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

fn tied_descending_order(ids: &[usize], scores: &[f64]) -> Vec<usize> {
    let mut order = descending_order(ids, scores);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && near(scores[order[end - 1]], scores[order[end]]) {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by_key(|&p| ids[p]);
        }
        start = end;
    }
    order
}

/// Exact descending order, ties by ascending id.
pub(crate) fn descending_order(ids: &[usize], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    order
}
