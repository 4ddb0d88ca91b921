//! Fully connected ReLU networks with a single linear output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{r_squared_values, Dataset, Predictor, RegressionError, TrainConfig};

/// One affine layer; `weights[o][i]` connects input `i` to output `o`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: vec![vec![0.0; inputs]; outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

/// Rectifier on every hidden layer, identity on the output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// Feature columns fed to the input layer.
    pub selected: Vec<usize>,
    pub layers: Vec<Layer>,
}

/// Partial derivatives of the loss, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSummary {
    pub epochs: u32,
    pub train_r2: f64,
}

impl MlpModel {
    pub fn new(selected: Vec<usize>, layers: Vec<Layer>) -> Result<Self, RegressionError> {
        let model = Self { selected, layers };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), RegressionError> {
        let last = self
            .layers
            .last()
            .ok_or_else(|| RegressionError::Config("network has no layers".into()))?;
        if last.outputs() != 1 {
            return Err(RegressionError::Config("output layer must have width 1".into()));
        }
        let mut width = self.selected.len();
        for layer in &self.layers {
            if layer.outputs() == 0 || layer.weights.iter().any(|r| r.len() != width) {
                return Err(RegressionError::Config(format!(
                    "layer dimensions do not conform to architecture {:?}",
                    self.architecture()
                )));
            }
            let finite = layer.bias.iter().chain(layer.weights.iter().flatten()).all(|v| v.is_finite());
            if !finite {
                return Err(RegressionError::NonFinite("network parameters"));
            }
            width = layer.outputs();
        }
        Ok(())
    }

    /// `(K', p_1, ..., p_ℓ, 1)`.
    pub fn architecture(&self) -> Vec<usize> {
        let mut arch = vec![self.selected.len()];
        arch.extend(self.layers.iter().map(Layer::outputs));
        arch
    }

    /// Randomly initialized network of shape `arch`.
    pub fn random<R: Rng>(selected: Vec<usize>, arch: &[usize], rng: &mut R) -> Result<Self, RegressionError> {
        check_architecture(&selected, arch)?;
        let layers = arch
            .windows(2)
            .map(|w| {
                let bound = (6.0 / w[0].max(1) as f64).sqrt();
                Layer {
                    weights: (0..w[1])
                        .map(|_| (0..w[0]).map(|_| rng.gen_range(-bound..bound)).collect())
                        .collect(),
                    bias: (0..w[1]).map(|_| rng.gen_range(0.0..0.1)).collect(),
                }
            })
            .collect();
        Self::new(selected, layers)
    }

    /// Output for an input of the network's own width.
    pub fn forward(&self, x: &[f64]) -> Result<f64, RegressionError> {
        if x.len() != self.selected.len() {
            return Err(RegressionError::Dimension {
                expected: self.selected.len(),
                got: x.len(),
            });
        }
        Ok(self.activations(x).last().unwrap()[0])
    }

    /// Layer outputs, input first; hidden outputs are rectified.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.apply(acts.last().unwrap());
            if l + 1 < self.layers.len() {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    /// `(1/2n) Σ (η(x) - y)²` over network-width rows, with its gradient.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], ys: &[f64]) -> (f64, Gradients) {
        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer::zeros(l.inputs(), l.outputs()))
            .collect();
        let n = xs.len() as f64;
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let acts = self.activations(x);
            let err = acts.last().unwrap()[0] - y;
            loss += err * err / (2.0 * n);
            let mut delta = vec![err / n];
            for l in (0..self.layers.len()).rev() {
                let input = &acts[l];
                let g = &mut grads[l];
                for (o, d) in delta.iter().enumerate() {
                    g.bias[o] += d;
                    for (i, a) in input.iter().enumerate() {
                        g.weights[o][i] += d * a;
                    }
                }
                if l == 0 {
                    break;
                }
                let layer = &self.layers[l];
                delta = (0..layer.inputs())
                    .map(|i| {
                        if input[i] > 0.0 {
                            delta.iter().enumerate().map(|(o, d)| d * layer.weights[o][i]).sum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
        (loss, Gradients { layers: grads })
    }

    fn step(&mut self, grads: &Gradients, rate: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (row, grow) in layer.weights.iter_mut().zip(&g.weights) {
                for (w, d) in row.iter_mut().zip(grow) {
                    *w -= rate * d;
                }
            }
            for (b, d) in layer.bias.iter_mut().zip(&g.bias) {
                *b -= rate * d;
            }
        }
    }

    fn select<'a>(&self, x: &'a [f64]) -> Result<Vec<f64>, RegressionError> {
        self.selected
            .iter()
            .map(|&j| {
                x.get(j).copied().ok_or(RegressionError::Dimension {
                    expected: j + 1,
                    got: x.len(),
                })
            })
            .collect()
    }
}

impl Predictor for MlpModel {
    fn predict(&self, x: &[f64]) -> Result<f64, RegressionError> {
        self.forward(&self.select(x)?)
    }
}

fn check_architecture(selected: &[usize], arch: &[usize]) -> Result<(), RegressionError> {
    if arch.len() < 2 || arch[0] != selected.len() || *arch.last().unwrap() != 1 || arch.contains(&0) {
        return Err(RegressionError::Config(format!(
            "architecture {arch:?} does not fit {} inputs and one output",
            selected.len()
        )));
    }
    Ok(())
}

/// Mini-batch gradient descent on the squared error. After every epoch the
/// train R² is checked against `r_stop`; at most ⌈1.5·it_stop⌉ epochs run.
pub fn train_mlp(
    data: &Dataset,
    selected: &[usize],
    arch: &[usize],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainingSummary), RegressionError> {
    cfg.validate()?;
    check_architecture(selected, arch)?;
    if let Some(&j) = selected.iter().find(|&&j| j >= data.width()) {
        return Err(RegressionError::Dimension {
            expected: j + 1,
            got: data.width(),
        });
    }
    let sub = data.select_columns(selected);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::random(selected.to_vec(), arch, &mut rng)?;
    let rows: Vec<&[f64]> = sub.x().iter().map(Vec::as_slice).collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let cap = cfg.epoch_cap();
    let mut summary = TrainingSummary {
        epochs: 0,
        train_r2: f64::NEG_INFINITY,
    };
    while summary.epochs < cap {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| rows[i]).collect();
            let ys: Vec<f64> = batch.iter().map(|&i| sub.y()[i]).collect();
            let (_, grads) = model.loss_and_gradient(&xs, &ys);
            model.step(&grads, cfg.learning_rate);
        }
        summary.epochs += 1;
        let predicted = rows
            .iter()
            .map(|x| model.forward(x))
            .collect::<Result<Vec<_>, _>>()?;
        if predicted.iter().any(|p| !p.is_finite()) {
            return Err(RegressionError::NonFinite("network parameters (training diverged)"));
        }
        summary.train_r2 = r_squared_values(sub.y(), &predicted)?;
        if summary.train_r2 > cfg.r_stop {
            break;
        }
    }
    log::debug!(
        "mlp {:?}: {} epochs, train R² {:.6}",
        arch,
        summary.epochs,
        summary.train_r2
    );
    Ok((model, summary))
}
