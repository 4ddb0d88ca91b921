//! Min-max scaling of feature columns.

use super::DescriptorError;

/// Per-column `(min, max)` ranges fitted on a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    ranges: Vec<(f64, f64)>,
}

impl Normalizer {
    pub fn from_ranges(ranges: Vec<(f64, f64)>) -> Self {
        Self { ranges }
    }

    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, DescriptorError> {
        let width = rows.first().ok_or(DescriptorError::EmptyDataset)?.len();
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); width];
        for row in rows {
            if row.len() != width {
                return Err(DescriptorError::Dimension {
                    expected: width,
                    got: row.len(),
                });
            }
            for (r, &v) in ranges.iter_mut().zip(row) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        Ok(Self { ranges })
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Scales one value of column `j`; constant columns map to 0.
    pub fn scale(&self, j: usize, v: f64) -> f64 {
        let (lo, hi) = self.ranges[j];
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    }

    /// Inverse of [`Normalizer::scale`]; a constant column maps back to its value.
    pub fn unscale(&self, j: usize, v: f64) -> f64 {
        let (lo, hi) = self.ranges[j];
        lo + v * (hi - lo)
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>, DescriptorError> {
        if row.len() != self.len() {
            return Err(DescriptorError::Dimension {
                expected: self.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.scale(j, v))
            .collect())
    }

    pub fn inverse(&self, row: &[f64]) -> Result<Vec<f64>, DescriptorError> {
        if row.len() != self.len() {
            return Err(DescriptorError::Dimension {
                expected: self.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.unscale(j, v))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_max_columns() {
        let rows = vec![vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]];
        let n = Normalizer::fit(&rows).unwrap();
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| n.transform(r).unwrap()).collect();
        assert_eq!(scaled, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]]);
        for (r, s) in rows.iter().zip(&scaled) {
            let back = n.inverse(s).unwrap();
            for (a, b) in r.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(n.transform(&[1.0]).is_err());
        assert!(Normalizer::fit(&[]).is_err());
    }
}
