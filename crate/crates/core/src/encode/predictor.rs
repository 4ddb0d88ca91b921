//! C1: linear models and ReLU networks as constraints.

use crate::milp::{LinExpr, MilpModel, Sense, VarId};
use crate::regression::{LinearModel, MlpModel, PredictionModel};

use super::{finite_bounds, EncodeError};

fn check_inputs(selected: &[usize], x: &[VarId]) -> Result<(), EncodeError> {
    match selected.iter().max() {
        Some(&j) if j >= x.len() => Err(EncodeError::Dimension {
            expected: j + 1,
            got: x.len(),
        }),
        _ => Ok(()),
    }
}

/// `y = Σ w_j x_j + b` over the model's selected columns of `x`.
pub fn encode_linear(
    m: &mut MilpModel,
    prefix: &str,
    model: &LinearModel,
    x: &[VarId],
    y: VarId,
) -> Result<(), EncodeError> {
    check_inputs(&model.selected, x)?;
    for &j in &model.selected {
        finite_bounds(m, x[j])?;
    }
    if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
        return Err(EncodeError::NonFinite(format!("linear model `{prefix}`")));
    }
    let mut expr = LinExpr::term(y, 1.0);
    for (&j, &w) in model.selected.iter().zip(&model.weights) {
        expr.add_term(x[j], -w);
    }
    m.add_constraint(&format!("{prefix}.out"), expr, Sense::Eq, model.bias)?;
    Ok(())
}

/// Variables of one rectified unit and the interval its pre-activation
/// ranges over.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenUnit {
    pub output: VarId,
    pub active: VarId,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpEncoding {
    /// Hidden layers, input side first.
    pub hidden: Vec<Vec<HiddenUnit>>,
}

/// Big-M encoding of a ReLU network. For a hidden unit with pre-activation
/// `z ∈ [L, U]`, output `h` and indicator `σ`:
///
/// ```text
/// z = w·h_prev + b,   h >= z,   h <= z + M⁻(1 - σ),   h <= M⁺σ,   h >= 0
/// ```
///
/// with `M⁻ >= max(-L, 0)` and `M⁺ >= max(U, 0)`.
///
/// The output layer is an equality into `y`.
pub fn encode_mlp(
    m: &mut MilpModel,
    prefix: &str,
    model: &MlpModel,
    x: &[VarId],
    y: VarId,
) -> Result<MlpEncoding, EncodeError> {
    check_inputs(&model.selected, x)?;
    let mut inputs: Vec<VarId> = model.selected.iter().map(|&j| x[j]).collect();
    let mut bounds = inputs
        .iter()
        .map(|&v| finite_bounds(m, v))
        .collect::<Result<Vec<_>, _>>()?;
    let mut hidden = Vec::new();
    let last = model.layers.len() - 1;
    for (l, layer) in model.layers.iter().enumerate() {
        let mut units = Vec::with_capacity(layer.outputs());
        let mut next_bounds = Vec::with_capacity(layer.outputs());
        for (j, (row, &b)) in layer.weights.iter().zip(&layer.bias).enumerate() {
            let (mut lo, mut hi) = (b, b);
            for (&w, &(a, c)) in row.iter().zip(&bounds) {
                lo += (w * a).min(w * c);
                hi += (w * a).max(w * c);
            }
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(EncodeError::NonFinite(format!("bounds of {prefix} layer {l} unit {j}")));
            }
            // z = Σ w h_prev + b, kept as the expression `pre` plus constant b
            let mut pre = LinExpr::new();
            for (&w, &v) in row.iter().zip(&inputs) {
                pre.add_term(v, w);
            }
            if l == last {
                let mut expr = LinExpr::term(y, 1.0);
                expr.add_expr(&pre, -1.0);
                m.add_constraint(&format!("{prefix}.out"), expr, Sense::Eq, b)?;
                continue;
            }
            let name = format!("{prefix}.l{l}.u{j}");
            // LP text carries 12 significant digits, so bounds get a margin;
            // any M at or above the true bound keeps the encoding exact
            let margin = |v: f64| 1e-4 + 1e-6 * v.abs();
            let m_plus = hi.max(0.0) + margin(hi);
            let m_minus = (-lo).max(0.0) + margin(lo);
            let z = m.add_continuous(&format!("{name}.z"), lo - margin(lo), hi + margin(hi))?;
            let h = m.add_continuous(&format!("{name}.h"), 0.0, m_plus)?;
            let s = m.add_binary(&format!("{name}.s"))?;
            let mut def = LinExpr::term(z, 1.0);
            def.add_expr(&pre, -1.0);
            m.add_constraint(&format!("{name}.pre"), def, Sense::Eq, b)?;
            m.add_constraint(&format!("{name}.ge"), vec![(h, 1.0), (z, -1.0)], Sense::Ge, 0.0)?;
            m.add_constraint(
                &format!("{name}.act"),
                vec![(h, 1.0), (z, -1.0), (s, m_minus)],
                Sense::Le,
                m_minus,
            )?;
            m.add_constraint(&format!("{name}.on"), vec![(h, 1.0), (s, -m_plus)], Sense::Le, 0.0)?;
            units.push(HiddenUnit {
                output: h,
                active: s,
                lower: lo,
                upper: hi,
            });
            next_bounds.push((0.0, m_plus));
        }
        if l < last {
            inputs = units.iter().map(|u| u.output).collect();
            bounds = next_bounds;
            hidden.push(units);
        }
    }
    Ok(MlpEncoding { hidden })
}

pub fn encode_predictor(
    m: &mut MilpModel,
    prefix: &str,
    model: &PredictionModel,
    x: &[VarId],
    y: VarId,
) -> Result<(), EncodeError> {
    match model {
        PredictionModel::Linear(lm) => encode_linear(m, prefix, lm, x, y),
        PredictionModel::Mlp(mlp) => encode_mlp(m, prefix, mlp, x, y).map(|_| ()),
    }
}
