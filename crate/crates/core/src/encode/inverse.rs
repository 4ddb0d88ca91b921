//! The combined instance: graph (C2), normalized features, predictor (C1)
//! and the target interval.

use crate::chemgraph::ElementTable;
use crate::descriptors::DescriptorRegistry;
use crate::milp::{LinExpr, MilpModel, Sense, VarId};
use crate::regression::ModelFile;

use super::{bind_target, encode_graph, encode_predictor, EncodeError, GraphEncoding, TargetInterval, TopologySpec};

#[derive(Debug, Clone)]
pub struct InverseInstance {
    pub model: MilpModel,
    pub graph: GraphEncoding,
    /// Normalized feature per registry descriptor.
    pub x_norm: Vec<VarId>,
    /// Predicted target in raw units.
    pub y: VarId,
}

/// Builds the inverse problem for one trained predictor.
///
/// `ranges` are the dataset's raw `(min, max)` per registry descriptor;
/// the model file's own ranges take precedence on its selected columns.
/// The predictor's inputs are confined to `[0, 1]`, i.e. to the range seen
/// in training.
pub fn build_inverse(
    reg: &DescriptorRegistry,
    table: &ElementTable,
    spec: &TopologySpec,
    predictor: &ModelFile,
    ranges: &[(f64, f64)],
    target: &TargetInterval,
) -> Result<InverseInstance, EncodeError> {
    if ranges.len() != reg.len() {
        return Err(EncodeError::Dimension {
            expected: reg.len(),
            got: ranges.len(),
        });
    }
    let mut model = MilpModel::new();
    let graph = encode_graph(&mut model, "g", spec, reg, table)?;
    let mut ranges = ranges.to_vec();
    for (&j, &r) in predictor.model.selected().iter().zip(&predictor.x_ranges) {
        ranges[j] = r;
    }
    let mut x_norm = Vec::with_capacity(reg.len());
    for (j, &(lo, hi)) in ranges.iter().enumerate() {
        let selected = predictor.model.selected().contains(&j);
        let raw = graph.x[j];
        let name = format!("xn{j}");
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(EncodeError::NonFinite(format!("range of descriptor {j}")));
        }
        if hi <= lo {
            x_norm.push(model.add_continuous(&name, 0.0, 0.0)?);
            continue;
        }
        let span = hi - lo;
        let (raw_lo, raw_hi) = (model.variable(raw).lower, model.variable(raw).upper);
        let (a, b) = if selected {
            (0.0, 1.0)
        } else {
            ((raw_lo - lo) / span, (raw_hi - lo) / span)
        };
        let v = model.add_continuous(&name, a, b)?;
        model.add_constraint(&format!("{name}.def"), vec![(v, span), (raw, -1.0)], Sense::Eq, -lo)?;
        x_norm.push(v);
    }
    let y_norm = model.add_continuous("y_norm", f64::NEG_INFINITY, f64::INFINITY)?;
    encode_predictor(&mut model, "eta", &predictor.model, &x_norm, y_norm)?;
    let y = model.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY)?;
    let (y_lo, y_hi) = predictor.y_range;
    let mut unscale = LinExpr::term(y, 1.0);
    unscale.add_term(y_norm, -(y_hi - y_lo));
    model.add_constraint("y.def", unscale, Sense::Eq, y_lo)?;
    bind_target(&mut model, "target", y, target)?;
    Ok(InverseInstance {
        model,
        graph,
        x_norm,
        y,
    })
}
