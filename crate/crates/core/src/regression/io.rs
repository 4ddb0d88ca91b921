//! Text persistence of trained models.
//!
//! ```text
//! kind = mlp
//! architecture = 2 4 1
//! selected = ns:C2 ac:C.O.1
//! x_min = 0 1
//! x_max = 6 3
//! y_min = -1.5
//! y_max = 7.25
//! layer.0.weights = ...row-major...
//! layer.0.bias = ...
//! ```
//!
//! A linear model stores `weights` and `bias` instead of the layer lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Layer, LinearModel, MlpModel, Predictor, RegressionError};

#[derive(Debug, Clone, PartialEq)]
pub enum PredictionModel {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl PredictionModel {
    pub fn selected(&self) -> &[usize] {
        match self {
            PredictionModel::Linear(m) => &m.selected,
            PredictionModel::Mlp(m) => &m.selected,
        }
    }
}

impl Predictor for PredictionModel {
    fn predict(&self, x: &[f64]) -> Result<f64, RegressionError> {
        match self {
            PredictionModel::Linear(m) => m.predict(x),
            PredictionModel::Mlp(m) => m.predict(x),
        }
    }
}

/// A model over normalized features together with the descriptor ids it
/// reads and the ranges needed to map raw values in and out.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: PredictionModel,
    /// Descriptor id of every selected column, in model input order.
    pub ids: Vec<String>,
    /// Raw `(min, max)` of every selected column.
    pub x_ranges: Vec<(f64, f64)>,
    /// Raw `(min, max)` of the target; predictions are made in `[0, 1]` scale.
    pub y_range: (f64, f64),
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl ModelFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kind = match &self.model {
            PredictionModel::Linear(_) => "linear",
            PredictionModel::Mlp(_) => "mlp",
        };
        writeln!(out, "kind = {kind}").unwrap();
        if let PredictionModel::Mlp(m) = &self.model {
            let arch: Vec<String> = m.architecture().iter().map(usize::to_string).collect();
            writeln!(out, "architecture = {}", arch.join(" ")).unwrap();
        }
        writeln!(out, "selected = {}", self.ids.join(" ")).unwrap();
        writeln!(out, "x_min = {}", join(self.x_ranges.iter().map(|r| r.0))).unwrap();
        writeln!(out, "x_max = {}", join(self.x_ranges.iter().map(|r| r.1))).unwrap();
        writeln!(out, "y_min = {}", self.y_range.0).unwrap();
        writeln!(out, "y_max = {}", self.y_range.1).unwrap();
        match &self.model {
            PredictionModel::Linear(m) => {
                writeln!(out, "weights = {}", join(m.weights.iter().copied())).unwrap();
                writeln!(out, "bias = {}", m.bias).unwrap();
            }
            PredictionModel::Mlp(m) => {
                for (l, layer) in m.layers.iter().enumerate() {
                    let w = layer.weights.iter().flatten().copied();
                    writeln!(out, "layer.{l}.weights = {}", join(w)).unwrap();
                    writeln!(out, "layer.{l}.bias = {}", join(layer.bias.iter().copied())).unwrap();
                }
            }
        }
        out
    }

    /// Parses a model file; `resolve` maps a descriptor id to its column in
    /// the feature vector.
    pub fn parse<F>(text: &str, resolve: F) -> Result<Self, RegressionError>
    where
        F: Fn(&str) -> Option<usize>,
    {
        let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| RegressionError::ModelFile {
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            fields.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        }
        let get = |key: &str| -> Result<&(usize, String), RegressionError> {
            fields.get(key).ok_or_else(|| RegressionError::ModelFile {
                line: 0,
                message: format!("missing `{key}`"),
            })
        };
        let numbers = |key: &str| -> Result<Vec<f64>, RegressionError> {
            let (line, v) = get(key)?;
            v.split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|e| RegressionError::ModelFile {
                        line: *line,
                        message: format!("{key}: {e}"),
                    })
                })
                .collect()
        };
        let scalar = |key: &str| -> Result<f64, RegressionError> {
            let v = numbers(key)?;
            match v.as_slice() {
                [x] => Ok(*x),
                _ => Err(RegressionError::ModelFile {
                    line: get(key)?.0,
                    message: format!("{key} takes one number"),
                }),
            }
        };

        let (sel_line, sel) = get("selected")?;
        let ids: Vec<String> = sel.split_whitespace().map(str::to_string).collect();
        let selected = ids
            .iter()
            .map(|id| {
                resolve(id).ok_or_else(|| RegressionError::ModelFile {
                    line: *sel_line,
                    message: format!("unknown descriptor `{id}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (x_min, x_max) = (numbers("x_min")?, numbers("x_max")?);
        if x_min.len() != ids.len() || x_max.len() != ids.len() {
            return Err(RegressionError::ModelFile {
                line: get("x_min")?.0,
                message: "range count differs from the number of selected descriptors".into(),
            });
        }
        let x_ranges = x_min.into_iter().zip(x_max).collect();
        let y_range = (scalar("y_min")?, scalar("y_max")?);

        let (kind_line, kind) = get("kind")?;
        let model = match kind.as_str() {
            "linear" => PredictionModel::Linear(LinearModel::new(selected, numbers("weights")?, scalar("bias")?)?),
            "mlp" => {
                let arch: Vec<usize> = numbers("architecture")?.into_iter().map(|v| v as usize).collect();
                let mut layers = Vec::new();
                for (l, w) in arch.windows(2).enumerate() {
                    let flat = numbers(&format!("layer.{l}.weights"))?;
                    let bias = numbers(&format!("layer.{l}.bias"))?;
                    if flat.len() != w[0] * w[1] || bias.len() != w[1] {
                        return Err(RegressionError::ModelFile {
                            line: get(&format!("layer.{l}.weights"))?.0,
                            message: format!("layer {l} does not match architecture {arch:?}"),
                        });
                    }
                    layers.push(Layer {
                        weights: flat.chunks(w[0]).map(<[f64]>::to_vec).collect(),
                        bias,
                    });
                }
                let m = MlpModel::new(selected, layers)?;
                if m.architecture() != arch {
                    return Err(RegressionError::ModelFile {
                        line: get("architecture")?.0,
                        message: format!("architecture {arch:?} does not match the selected descriptors"),
                    });
                }
                PredictionModel::Mlp(m)
            }
            other => {
                return Err(RegressionError::ModelFile {
                    line: *kind_line,
                    message: format!("unknown model kind `{other}`"),
                })
            }
        };
        Ok(Self {
            model,
            ids,
            x_ranges,
            y_range,
        })
    }

    /// Maps a normalized prediction back to the target's raw scale.
    pub fn unscale_y(&self, v: f64) -> f64 {
        self.y_range.0 + v * (self.y_range.1 - self.y_range.0)
    }

    /// Maps a raw target value into the model's `[0, 1]` scale.
    pub fn scale_y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn resolver(ids: &'static [&'static str]) -> impl Fn(&str) -> Option<usize> {
        move |id| ids.iter().position(|x| *x == id)
    }

    const IDS: &[&str] = &["n_atoms", "ns:C2", "ac:C.O.1"];

    #[test]
    fn mlp_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = MlpModel::random(vec![2, 1], &[2, 3, 1], &mut rng).unwrap();
        let file = ModelFile {
            model: PredictionModel::Mlp(m),
            ids: vec!["ac:C.O.1".into(), "ns:C2".into()],
            x_ranges: vec![(0.0, 3.0), (1.0, 1.0)],
            y_range: (-2.0, 0.1),
        };
        let back = ModelFile::parse(&file.to_text(), resolver(IDS)).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_text(), file.to_text());
    }

    #[test]
    fn linear_round_trip_and_errors() {
        let file = ModelFile {
            model: PredictionModel::Linear(LinearModel::new(vec![0], vec![0.25], -1.0 / 3.0).unwrap()),
            ids: vec!["n_atoms".into()],
            x_ranges: vec![(2.0, 9.0)],
            y_range: (0.0, 10.0),
        };
        let text = file.to_text();
        assert_eq!(ModelFile::parse(&text, resolver(IDS)).unwrap(), file);
        assert!(ModelFile::parse(&text.replace("n_atoms", "bogus"), resolver(IDS)).is_err());
        assert!(ModelFile::parse(&text.replace("kind = linear", "kind = tree"), resolver(IDS)).is_err());
        assert!(ModelFile::parse("kind = linear\n", resolver(IDS)).is_err());
        assert_eq!(file.scale_y(5.0), 0.5);
        assert_eq!(file.unscale_y(0.5), 5.0);
    }
}
