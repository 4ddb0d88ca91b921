//! Repeated k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{r_squared_values, Dataset, Predictor, RegressionError};

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: usize,
    pub repeats: usize,
    /// Test R² per trial, repeat-major.
    pub scores: Vec<f64>,
    pub median: f64,
}

/// Median; the mean of the two middle values for an even count.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

/// Independent seed for one `(repeat, fold)` trainer, or for the partition
/// of a repeat when `fold` is `None`.
pub fn derive_seed(seed: u64, repeat: usize, fold: Option<usize>) -> u64 {
    // splitmix64 over the combined coordinates
    let tag = (repeat as u64) << 32 | fold.map_or(0xffff_ffff, |f| f as u64);
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `repeats` random partitions into `folds` folds. `train` receives
/// the training rows and a derived seed.
///
/// A held-out fold whose targets are all equal (always the case for
/// single-row folds) is scored against the training mean instead of its
/// own mean, so every trial yields a score.
pub fn cross_validate<F, P>(
    data: &Dataset,
    folds: usize,
    repeats: usize,
    seed: u64,
    mut train: F,
) -> Result<CvReport, RegressionError>
where
    F: FnMut(&Dataset, u64) -> Result<P, RegressionError>,
    P: Predictor,
{
    if folds < 2 || data.len() < folds {
        return Err(RegressionError::TooFewRows {
            rows: data.len(),
            folds,
        });
    }
    if repeats == 0 {
        return Err(RegressionError::Config("at least one repeat is required".into()));
    }
    let mut scores = Vec::with_capacity(folds * repeats);
    for repeat in 0..repeats {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, repeat, None)));
        let (base, extra) = (data.len() / folds, data.len() % folds);
        let mut start = 0;
        for fold in 0..folds {
            let size = base + usize::from(fold < extra);
            let test: Vec<usize> = order[start..start + size].to_vec();
            let train_rows: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
            start += size;
            let train_set = data.subset(&train_rows);
            let test_set = data.subset(&test);
            let model = train(&train_set, derive_seed(seed, repeat, Some(fold)))?;
            let predicted = test_set
                .x()
                .iter()
                .map(|x| model.predict(x))
                .collect::<Result<Vec<_>, _>>()?;
            let score = match r_squared_values(test_set.y(), &predicted) {
                Err(RegressionError::ConstantTarget) => {
                    out_of_sample_r2(test_set.y(), &predicted, train_set.y())?
                }
                other => other?,
            };
            log::debug!("cv repeat {repeat} fold {fold}: R² {score:.6}");
            scores.push(score);
        }
    }
    let median = median(&scores).expect("at least one score");
    Ok(CvReport {
        folds,
        repeats,
        scores,
        median,
    })
}

fn out_of_sample_r2(observed: &[f64], predicted: &[f64], train_y: &[f64]) -> Result<f64, RegressionError> {
    let mean = train_y.iter().sum::<f64>() / train_y.len() as f64;
    let total: f64 = observed.iter().map(|a| (a - mean).powi(2)).sum();
    if total == 0.0 {
        return Err(RegressionError::ConstantTarget);
    }
    let err: f64 = observed.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Ok(1.0 - err / total)
}
