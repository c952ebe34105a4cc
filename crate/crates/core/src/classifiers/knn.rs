use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{check_binary_labels, ClassifierError};

/// Euclidean k-nearest-neighbour vote. `k` must be odd so votes cannot tie.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_features: usize,
    /// Row-major training points.
    pub train_points: Vec<f64>,
    pub train_labels: Vec<u8>,
}

impl KnnModel {
    pub fn fit(x: ArrayView2<'_, f64>, labels: &[u8], k: usize) -> Result<Self, ClassifierError> {
        check_binary_labels(x.nrows(), labels)?;
        if k == 0 || k.is_multiple_of(2) {
            return Err(ClassifierError::InvalidHyperparameter(format!("knn k must be odd and positive, got {k}")));
        }
        if k > x.nrows() {
            return Err(ClassifierError::InvalidHyperparameter(format!(
                "knn k = {k} exceeds {} training points",
                x.nrows()
            )));
        }
        Ok(KnnModel {
            k,
            n_features: x.ncols(),
            train_points: x.iter().copied().collect(),
            train_labels: labels.to_vec(),
        })
    }

    pub fn n_train(&self) -> usize {
        self.train_labels.len()
    }

    /// Indices of the k nearest training points; equal distances resolve to
    /// the lower training index.
    pub fn neighbours(&self, query: &[f64]) -> Result<Vec<usize>, ClassifierError> {
        if query.len() != self.n_features {
            return Err(ClassifierError::DimensionMismatch { got: query.len(), want: self.n_features });
        }
        let mut dist: Vec<(f64, usize)> = self
            .train_points
            .chunks_exact(self.n_features.max(1))
            .take(self.n_train())
            .enumerate()
            .map(|(i, p)| {
                let d: f64 = p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        if self.n_features == 0 {
            dist = (0..self.n_train()).map(|i| (0.0, i)).collect();
        }
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
            dist.truncate(self.k);
        }
        dist.sort_by(by_distance);
        Ok(dist.into_iter().map(|(_, i)| i).collect())
    }

    pub fn predict(&self, query: &[f64]) -> Result<u8, ClassifierError> {
        let votes = self.neighbours(query)?.into_iter().filter(|&i| self.train_labels[i] == 1).count();
        Ok(u8::from(2 * votes > self.k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Exhaustive oracle: sort every distance, stable on index.
    fn oracle(x: &Array2<f64>, labels: &[u8], k: usize, q: &[f64]) -> u8 {
        let mut d: Vec<(f64, usize)> = x
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i))
            .collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let ones = d[..k].iter().filter(|(_, i)| labels[*i] == 1).count();
        if ones * 2 > k {
            1
        } else {
            0
        }
    }

    #[test]
    fn zero_distance_identity() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [5.0, 5.0]];
        let m = KnnModel::fit(x.view(), &[0, 1, 0], 1).unwrap();
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap(), 1);
        assert_eq!(m.predict(&[5.0, 5.0]).unwrap(), 0);
    }

    #[test]
    fn majority_of_three() {
        let x = array![[0.0], [1.0], [2.0], [10.0], [11.0]];
        let m = KnnModel::fit(x.view(), &[1, 1, 0, 0, 0], 3).unwrap();
        assert_eq!(m.predict(&[0.5]).unwrap(), 1);
    }

    #[test]
    fn tie_break_by_lower_index() {
        let x = array![[1.0], [-1.0], [3.0]];
        let m = KnnModel::fit(x.view(), &[1, 0, 0], 1).unwrap();
        assert_eq!(m.neighbours(&[0.0]).unwrap(), vec![0]);
        assert_eq!(m.predict(&[0.0]).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_hyperparameters_and_queries() {
        let x = array![[0.0], [1.0], [2.0]];
        assert!(KnnModel::fit(x.view(), &[0, 1, 0], 2).is_err());
        assert!(KnnModel::fit(x.view(), &[0, 1, 0], 5).is_err());
        assert!(KnnModel::fit(x.view(), &[0, 1, 3], 1).is_err());
        let m = KnnModel::fit(x.view(), &[0, 1, 0], 3).unwrap();
        assert_eq!(m.predict(&[1.0, 2.0]), Err(ClassifierError::DimensionMismatch { got: 2, want: 1 }));
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((200, 4), |_| rng.random_range(-3.0..3.0));
        let labels: Vec<u8> = (0..200).map(|_| rng.random_range(0..2)).collect();
        for k in [1, 3, 5, 7] {
            let m = KnnModel::fit(x.view(), &labels, k).unwrap();
            for _ in 0..50 {
                let q: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
                assert_eq!(m.predict(&q).unwrap(), oracle(&x, &labels, k, &q));
            }
        }
    }

    #[test]
    fn permutation_invariance_without_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = Array2::from_shape_fn((60, 3), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<u8> = (0..60).map(|i| (i % 3 == 0) as u8).collect();
        let perm: Vec<usize> = (0..60).rev().collect();
        let xp = x.select(ndarray::Axis(0), &perm);
        let lp: Vec<u8> = perm.iter().map(|&i| labels[i]).collect();
        let a = KnnModel::fit(x.view(), &labels, 5).unwrap();
        let b = KnnModel::fit(xp.view(), &lp, 5).unwrap();
        for _ in 0..30 {
            let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert_eq!(a.predict(&q).unwrap(), b.predict(&q).unwrap());
        }
    }
}
