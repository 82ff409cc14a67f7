use crate::series::Series;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OrderStatError {
    #[error("k = {k} out of range for n = {n} (need 1 <= k <= n)")]
    KOutOfRange { k: usize, n: usize },
}

/// The empirical distribution function t -> (1/n) * #{j : v_j <= t},
/// realized as the sorted sample plus binary-search rank lookup.
///
/// Ties are counted by <=, so tied values all get the maximal rank.
#[derive(Debug, Clone)]
pub struct EcdfView {
    sorted: Vec<f64>,
}

impl EcdfView {
    fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp); // values finite by Series invariant
        EcdfView { sorted }
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    /// F̂(t); non-decreasing, F̂(max) = 1, values on the grid {0, 1/n, ..., 1}.
    pub fn value(&self, t: f64) -> f64 {
        let le = self.sorted.partition_point(|v| *v <= t);
        le as f64 / self.sorted.len() as f64
    }

    /// The k-th largest sample value, duplicates counted with multiplicity.
    pub fn kth_largest(&self, k: usize) -> Result<f64, OrderStatError> {
        let n = self.sorted.len();
        if k == 0 || k > n {
            return Err(OrderStatError::KOutOfRange { k, n });
        }
        Ok(self.sorted[n - k])
    }
}

pub fn empirical_cdf(series: &Series) -> EcdfView {
    EcdfView::from_values(series.values())
}

pub fn kth_largest(series: &Series, k: usize) -> Result<f64, OrderStatError> {
    empirical_cdf(series).kth_largest(k)
}

pub(crate) fn ecdf_of_slice(values: &[f64]) -> EcdfView {
    EcdfView::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> Series {
        Series::new("s", values.to_vec()).unwrap()
    }

    #[test]
    fn direct_counts() {
        let e = empirical_cdf(&series(&[3.0, 1.0, 2.0]));
        assert_eq!(e.value(3.0), 1.0);
        assert_eq!(e.value(1.0), 1.0 / 3.0);
        assert_eq!(e.value(2.0), 2.0 / 3.0);
        assert_eq!(e.value(0.5), 0.0);
    }

    #[test]
    fn ties_use_le_count() {
        let e = empirical_cdf(&series(&[5.0, 5.0, 5.0]));
        assert_eq!(e.value(5.0), 1.0);
        assert_eq!(e.value(4.999), 0.0);
    }

    #[test]
    fn uniform_ranks() {
        let vals: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let e = empirical_cdf(&series(&vals));
        assert_eq!(e.value(50.0), 0.5);
        assert_eq!(e.value(50.5), 0.5);
    }

    #[test]
    fn order_statistics() {
        assert_eq!(kth_largest(&series(&[4.0, 1.0, 3.0, 2.0]), 2), Ok(3.0));
        assert_eq!(kth_largest(&series(&[7.0, 7.0, 1.0]), 2), Ok(7.0));
        assert_eq!(kth_largest(&series(&[9.0, 9.0]), 1), Ok(9.0));
        assert!(matches!(
            kth_largest(&series(&[1.0, 2.0]), 0),
            Err(OrderStatError::KOutOfRange { k: 0, n: 2 })
        ));
        assert!(kth_largest(&series(&[1.0, 2.0]), 3).is_err());
    }
}
