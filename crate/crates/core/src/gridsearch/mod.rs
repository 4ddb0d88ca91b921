//! Grid neighbor search around a found solution.
//!
//! Feature vectors are projected by affine maps `θ_p(x) = w_p·(x, 1)`; the
//! projected space is cut into boxes `S(z)` of width `δ` around the seed's
//! image, and each box near the center is tested for a further solution.

mod search;

pub use search::{grid_search, GridOptions, GridRecord, GridSearchResult, GridState, Witness};

use std::cmp::Ordering;

use thiserror::Error;

use crate::descriptors::DescriptorRegistry;
use crate::milp::MilpError;
use crate::regression::LinearModel;

/// Widths below this are accepted but numerically fragile.
pub const MIN_RECOMMENDED_WIDTH: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid grid geometry: {0}")]
    Geometry(String),
    #[error("projection weights must be finite")]
    NonFinite,
    #[error("model column {column} is outside the registry of {width} descriptors")]
    Registry { column: usize, width: usize },
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// Affine projections of a `K`-dimensional feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    width: usize,
    weights: Vec<Vec<f64>>,
}

impl ProjectionSet {
    /// Each row has `K + 1` entries, the last one being the constant term.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self, GridError> {
        let first = weights
            .first()
            .ok_or_else(|| GridError::Geometry("at least one projection is required".into()))?;
        if first.is_empty() {
            return Err(GridError::Geometry("a projection needs a constant term".into()));
        }
        let width = first.len() - 1;
        for row in &weights {
            if row.len() != width + 1 {
                return Err(GridError::Dimension {
                    expected: width + 1,
                    got: row.len(),
                });
            }
            if row.iter().any(|w| !w.is_finite()) {
                return Err(GridError::NonFinite);
            }
        }
        Ok(Self { width, weights })
    }

    pub fn p_max(&self) -> usize {
        self.weights.len()
    }

    /// Feature dimension `K`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }
}

/// `θ(x)`, one component per projection.
pub fn theta(ps: &ProjectionSet, x: &[f64]) -> Result<Vec<f64>, GridError> {
    if x.len() != ps.width {
        return Err(GridError::Dimension {
            expected: ps.width,
            got: x.len(),
        });
    }
    Ok(ps
        .weights
        .iter()
        .map(|w| w[..ps.width].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[ps.width])
        .collect())
}

/// Embeds linear property models as projections over the whole registry.
pub fn make_property_projections(models: &[LinearModel], reg: &DescriptorRegistry) -> Result<ProjectionSet, GridError> {
    let width = reg.len();
    let mut rows = Vec::with_capacity(models.len());
    for model in models {
        let mut w = vec![0.0; width + 1];
        for (&j, &c) in model.selected.iter().zip(&model.weights) {
            if j >= width {
                return Err(GridError::Registry { column: j, width });
            }
            w[j] += c;
        }
        w[width] = model.bias;
        rows.push(w);
    }
    ProjectionSet::new(rows)
}

/// Center `s*`, widths `δ` and radii `r` of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    pub center: Vec<f64>,
    pub widths: Vec<f64>,
    pub radius: Vec<u32>,
}

impl GridGeometry {
    pub fn new(center: Vec<f64>, widths: Vec<f64>, radius: Vec<u32>) -> Result<Self, GridError> {
        let p = center.len();
        if p == 0 {
            return Err(GridError::Geometry("empty grid dimension".into()));
        }
        for len in [widths.len(), radius.len()] {
            if len != p {
                return Err(GridError::Dimension { expected: p, got: len });
            }
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(GridError::NonFinite);
        }
        for &d in &widths {
            if !(d.is_finite() && d > 0.0) {
                return Err(GridError::Geometry(format!("grid width {d} is not positive")));
            }
            if d < MIN_RECOMMENDED_WIDTH {
                log::warn!("grid width {d} is below {MIN_RECOMMENDED_WIDTH}; boundaries may blur under solver tolerances");
            }
        }
        Ok(Self { center, widths, radius })
    }

    /// Centers the grid on the image of a seed feature vector.
    pub fn around_seed(ps: &ProjectionSet, seed: &[f64], widths: Vec<f64>, radius: Vec<u32>) -> Result<Self, GridError> {
        let center = theta(ps, seed)?;
        Self::new(center, widths, radius)
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }
}

/// Closed interval of `S(z)` in every dimension.
pub fn subspace_bounds(geo: &GridGeometry, z: &[i64]) -> Vec<(f64, f64)> {
    geo.center
        .iter()
        .zip(&geo.widths)
        .zip(z)
        .map(|((&s, &d), &k)| (s + (k as f64 - 0.5) * d, s + (k as f64 + 0.5) * d))
        .collect()
}

/// Shell index `max_p |z(p)|`.
pub fn shell(z: &[i64]) -> u64 {
    z.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0)
}

/// Every grid of `N(r)`, by shell and then lexicographically.
pub fn neighbor(geo: &GridGeometry) -> Vec<Vec<i64>> {
    let mut grids: Vec<Vec<i64>> = vec![vec![]];
    for &r in &geo.radius {
        let r = i64::from(r);
        grids = grids
            .into_iter()
            .flat_map(|prefix| {
                (-r..=r).map(move |k| {
                    let mut z = prefix.clone();
                    z.push(k);
                    z
                })
            })
            .collect();
    }
    grids.sort_by(|a, b| match shell(a).cmp(&shell(b)) {
        Ordering::Equal => a.cmp(b),
        o => o,
    });
    grids
}

/// `z' ⪯ z`: `z'` lies between the origin and `z` in every dimension.
pub fn grid_leq(z_prime: &[i64], z: &[i64]) -> bool {
    z_prime.len() == z.len()
        && z_prime
            .iter()
            .zip(z)
            .all(|(&a, &b)| (0 <= a && a <= b) || (0 >= a && a >= b))
}

/// `z' ≺ z`.
pub fn grid_lt(z_prime: &[i64], z: &[i64]) -> bool {
    z_prime != z && grid_leq(z_prime, z)
}
