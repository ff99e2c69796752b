//! Heterogeneous synthetic data with a handful of seeded anomalies.
//!
//! Records come from a few clusters, each with independent per-attribute
//! distributions. The anomalies are drawn from the average of the cluster
//! distributions: every attribute value is individually common, but the
//! combination belongs to no cluster. A single product model cannot see that;
//! a mixture can.

use mdlad_core::CodedTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{CategoricalDataset, Column};
use crate::error::{Error, Result};

/// Generator used for synthetic draws.
pub const SYNTH_RNG: &str = "ChaCha8 (rand_chacha), seeded with seed_from_u64";

/// Distribution of one attribute within one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Attribute {
    /// Binary attribute; the value is the probability of `1`.
    Bernoulli(f64),
    /// Categorical attribute over `0..probabilities.len()`.
    Categorical(Vec<f64>),
}

impl Attribute {
    fn arity(&self) -> usize {
        match self {
            Self::Bernoulli(_) => 2,
            Self::Categorical(p) => p.len(),
        }
    }

    /// Probabilities of every outcome.
    fn distribution(&self) -> Vec<f64> {
        match self {
            Self::Bernoulli(p) => vec![1.0 - p, *p],
            Self::Categorical(p) => p.clone(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u32 {
        match self {
            Self::Bernoulli(p) => u32::from(rng.random::<f64>() < *p),
            Self::Categorical(p) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, &pi) in p.iter().enumerate() {
                    acc += pi;
                    if u < acc {
                        return i as u32;
                    }
                }
                (p.len() - 1) as u32
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_per_cluster: Vec<usize>,
    /// One distribution per attribute, per cluster.
    pub clusters: Vec<Vec<Attribute>>,
    #[serde(default)]
    pub n_seeded_anomalies: usize,
    /// Distribution of the seeded anomalies; the mean of the clusters when
    /// absent.
    #[serde(default)]
    pub anomaly: Option<Vec<Attribute>>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// Three clusters of 334/333/333 records over 12 binary attributes, each
    /// cluster with its own block of four likely-one attributes, plus three
    /// seeded anomalies.
    fn default() -> Self {
        Self::blocks(&[334, 333, 333], 12, 3, 0)
    }
}

impl SyntheticSpec {
    /// Binary clusters with disjoint "active" attribute blocks: cluster `c`
    /// has `p = 0.9` on its block of `m / clusters` attributes and `p = 0.1`
    /// elsewhere. Attributes left over when `m` does not divide evenly stay
    /// inactive everywhere.
    pub fn blocks(sizes: &[usize], m: usize, n_seeded_anomalies: usize, seed: u64) -> Self {
        let k = sizes.len().max(1);
        let width = m / k;
        let clusters = (0..sizes.len())
            .map(|c| {
                (0..m)
                    .map(|j| {
                        let active = width > 0 && j / width == c && j < width * k;
                        Attribute::Bernoulli(if active { 0.9 } else { 0.1 })
                    })
                    .collect()
            })
            .collect();
        Self {
            n_per_cluster: sizes.to_vec(),
            clusters,
            n_seeded_anomalies,
            anomaly: None,
            seed,
        }
    }

    /// Number of attributes.
    pub fn m(&self) -> usize {
        self.clusters.first().map_or(0, Vec::len)
    }

    pub fn n_records(&self) -> usize {
        self.n_per_cluster.iter().sum::<usize>() + self.n_seeded_anomalies
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.clusters.is_empty() {
            return bad("at least one cluster is required".into());
        }
        if self.n_per_cluster.len() != self.clusters.len() {
            return bad(format!(
                "{} cluster sizes for {} clusters",
                self.n_per_cluster.len(),
                self.clusters.len()
            ));
        }
        let m = self.m();
        if m == 0 {
            return bad("at least one attribute is required".into());
        }
        let arities: Vec<usize> = self.clusters[0].iter().map(Attribute::arity).collect();
        let all = self.clusters.iter().chain(self.anomaly.as_ref());
        for (c, attrs) in all.enumerate() {
            if attrs.len() != m {
                return bad(format!("distribution {c} has {} attributes, expected {m}", attrs.len()));
            }
            for (j, a) in attrs.iter().enumerate() {
                if a.arity() != arities[j] {
                    return bad(format!("attribute {j} changes arity between clusters"));
                }
                let p = a.distribution();
                if p.len() < 2 || p.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                    return bad(format!(
                        "attribute {j}: probabilities must lie strictly between 0 and 1"
                    ));
                }
                if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return bad(format!("attribute {j}: probabilities must sum to 1"));
                }
            }
        }
        let normal: usize = self.n_per_cluster.iter().sum();
        if normal == 0 {
            return bad("clusters are empty".into());
        }
        // Anomalies must stay rare; a tenth of the data is the upper limit.
        if self.n_seeded_anomalies * 10 > normal {
            return bad(format!(
                "{} anomalies is too many for {normal} normal records",
                self.n_seeded_anomalies
            ));
        }
        Ok(())
    }

    /// Per-attribute mean of the cluster distributions.
    pub fn mean_attributes(&self) -> Vec<Attribute> {
        let c = self.clusters.len() as f64;
        (0..self.m())
            .map(|j| {
                let mut acc = vec![0.0; self.clusters[0][j].arity()];
                for cluster in &self.clusters {
                    for (a, p) in acc.iter_mut().zip(cluster[j].distribution()) {
                        *a += p / c;
                    }
                }
                match self.clusters[0][j] {
                    Attribute::Bernoulli(_) => Attribute::Bernoulli(acc[1]),
                    Attribute::Categorical(_) => Attribute::Categorical(acc),
                }
            })
            .collect()
    }
}

/// Draws the clusters in order, then the seeded anomalies. The returned
/// labels (also attached to the dataset) mark only the seeded records.
///
/// Columns are named `a0, a1, ...`; a column's domain is `0..arity` written
/// as decimal strings, whether or not every value was drawn.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(CategoricalDataset, Vec<bool>)> {
    spec.validate()?;
    let m = spec.m();
    let anomaly = spec.anomaly.clone().unwrap_or_else(|| spec.mean_attributes());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_records();
    let mut cells = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);

    let sources = spec
        .clusters
        .iter()
        .zip(&spec.n_per_cluster)
        .map(|(c, &size)| (c, size, false))
        .chain(std::iter::once((&anomaly, spec.n_seeded_anomalies, true)));
    for (attrs, size, is_anomaly) in sources {
        for _ in 0..size {
            cells.extend(attrs.iter().map(|a| a.draw(&mut rng)));
            labels.push(is_anomaly);
        }
    }

    let columns: Vec<Column> = spec.clusters[0]
        .iter()
        .enumerate()
        .map(|(j, a)| Column {
            name: format!("a{j}"),
            domain: (0..a.arity()).map(|v| v.to_string()).collect(),
        })
        .collect();
    let arities = columns.iter().map(Column::arity).collect();
    let table = CodedTable::from_cells(arities, n, cells)?;
    let data = CategoricalDataset::new(columns, table)?.with_labels(labels.clone(), None)?;
    Ok((data, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_shape() {
        let spec = SyntheticSpec::default();
        assert_eq!(spec.n_per_cluster.iter().sum::<usize>(), 1000);
        assert_eq!(spec.m(), 12);
        let (d, labels) = generate_synthetic(&spec).unwrap();
        assert_eq!(d.n_records(), 1003);
        assert_eq!(labels.iter().filter(|&&l| l).count(), 3);
        assert!(labels[1000..].iter().all(|&l| l));
    }

    #[test]
    fn block_parameters() {
        let spec = SyntheticSpec::default();
        for (c, cluster) in spec.clusters.iter().enumerate() {
            for (j, a) in cluster.iter().enumerate() {
                let p = if j / 4 == c { 0.9 } else { 0.1 };
                assert_eq!(a, &Attribute::Bernoulli(p));
            }
        }
    }

    #[test]
    fn anomalies_follow_the_cluster_mean() {
        let mean = SyntheticSpec::default().mean_attributes();
        for a in mean {
            match a {
                Attribute::Bernoulli(p) => assert!((p - (0.9 + 0.1 + 0.1) / 3.0).abs() < 1e-12),
                Attribute::Categorical(_) => panic!("binary spec"),
            }
        }
    }

    #[test]
    fn equal_seeds_give_equal_data() {
        let spec = SyntheticSpec::default();
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec { seed: 1, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn single_cluster_without_anomalies() {
        let spec = SyntheticSpec::blocks(&[1000], 12, 0, 5);
        let (d, labels) = generate_synthetic(&spec).unwrap();
        assert_eq!(d.n_records(), 1000);
        assert!(labels.iter().all(|&l| !l));
    }

    #[test]
    fn categorical_attributes() {
        let spec = SyntheticSpec {
            n_per_cluster: vec![50, 50],
            clusters: vec![
                vec![Attribute::Categorical(vec![0.8, 0.1, 0.1]), Attribute::Bernoulli(0.5)],
                vec![Attribute::Categorical(vec![0.1, 0.1, 0.8]), Attribute::Bernoulli(0.5)],
            ],
            n_seeded_anomalies: 2,
            anomaly: None,
            seed: 9,
        };
        let (d, _) = generate_synthetic(&spec).unwrap();
        assert_eq!(d.table().arities(), &[3, 2]);
        assert_eq!(d.columns()[0].domain, ["0", "1", "2"]);
        match &spec.mean_attributes()[0] {
            Attribute::Categorical(p) => assert!((p[1] - 0.1).abs() < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut spec = SyntheticSpec::default();
        spec.clusters[1][3] = Attribute::Bernoulli(1.0);
        assert!(matches!(generate_synthetic(&spec), Err(Error::InvalidSpec(_))));
        let mut spec = SyntheticSpec::default();
        spec.clusters[0][0] = Attribute::Categorical(vec![0.5, 0.6]);
        assert!(spec.validate().is_err());
        let spec = SyntheticSpec {
            n_seeded_anomalies: 500,
            ..SyntheticSpec::default()
        };
        assert!(spec.validate().is_err());
        let mut spec = SyntheticSpec::default();
        spec.clusters[2].pop();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_json_accepts_numbers_and_vectors() {
        let json = r#"{"n_per_cluster":[10],"clusters":[[0.3,[0.2,0.8]]],"seed":4}"#;
        let spec: SyntheticSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.clusters[0][0], Attribute::Bernoulli(0.3));
        assert_eq!(spec.clusters[0][1], Attribute::Categorical(vec![0.2, 0.8]));
        assert_eq!(spec.n_seeded_anomalies, 0);
        spec.validate().unwrap();
    }
}
