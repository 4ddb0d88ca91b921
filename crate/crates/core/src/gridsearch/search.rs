use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::milp::{LinExpr, MilpModel, MilpSolver, Sense, SolveStatus, VarId, FEASIBILITY_TOLERANCE};

use super::{grid_lt, neighbor, shell, subspace_bounds, theta, GridError, GridGeometry, ProjectionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridOptions {
    /// Skip grids dominated by a grid proved infeasible.
    pub prune: bool,
    /// Worker threads per shell. With more than one, infeasible grids only
    /// prune later shells.
    pub threads: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { prune: true, threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridState {
    /// Index into [`GridSearchResult::witnesses`].
    Feasible { witness: usize },
    Infeasible,
    /// Skipped because the infeasible grid `by` satisfies `by ≺ z`.
    Pruned { by: Vec<i64> },
    Timeout,
    Failed(String),
}

impl GridState {
    pub fn label(&self) -> &'static str {
        match self {
            GridState::Feasible { .. } => "feasible",
            GridState::Infeasible => "infeasible",
            GridState::Pruned { .. } => "pruned",
            GridState::Timeout => "timeout",
            GridState::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRecord {
    pub z: Vec<i64>,
    pub state: GridState,
    pub objective: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub z: Vec<i64>,
    /// Full solution of the grid's model, indexed like the base model.
    pub values: Vec<f64>,
    /// Values of the projected feature variables.
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridSearchResult {
    /// One record per grid of `N(r)`, in visiting order.
    pub records: Vec<GridRecord>,
    pub witnesses: Vec<Witness>,
}

impl GridSearchResult {
    pub fn record(&self, z: &[i64]) -> Option<&GridRecord> {
        self.records.iter().find(|r| r.z == z)
    }

    pub fn grids_with(&self, label: &str) -> BTreeSet<Vec<i64>> {
        self.records
            .iter()
            .filter(|r| r.state.label() == label)
            .map(|r| r.z.clone())
            .collect()
    }

    pub fn feasible(&self) -> BTreeSet<Vec<i64>> {
        self.grids_with("feasible")
    }

    /// Grids handed to the solver that came back decided or failed.
    pub fn solved_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| !matches!(r.state, GridState::Pruned { .. } | GridState::Timeout))
            .count()
    }

    /// `z1,...,zP,status,witness,objective,seconds`; the witness column
    /// holds the witness id of a feasible grid and the pruning grid of a
    /// pruned one.
    pub fn to_csv(&self) -> String {
        let p = self.records.first().map_or(0, |r| r.z.len());
        let mut out = String::new();
        for i in 1..=p {
            write!(out, "z{i},").unwrap();
        }
        out.push_str("status,witness,objective,seconds\n");
        for r in &self.records {
            for k in &r.z {
                write!(out, "{k},").unwrap();
            }
            let witness = match &r.state {
                GridState::Feasible { witness } => witness.to_string(),
                GridState::Pruned { by } => by.iter().map(i64::to_string).collect::<Vec<_>>().join(";"),
                _ => String::new(),
            };
            let objective = r.objective.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{witness},{objective},{:.3}", r.state.label(), r.seconds).unwrap();
        }
        out
    }
}

struct Outcome {
    state: GridState,
    objective: Option<f64>,
    seconds: f64,
    witness: Option<Witness>,
}

struct Search<'a> {
    model: MilpModel,
    theta_vars: Vec<VarId>,
    x: &'a [VarId],
    ps: &'a ProjectionSet,
    geo: &'a GridGeometry,
    solver: &'a dyn MilpSolver,
}

impl Search<'_> {
    fn solve(&self, z: &[i64]) -> Result<Outcome, GridError> {
        let mut m = self.model.clone();
        let bounds = subspace_bounds(self.geo, z);
        for (p, (&t, &(lo, hi))) in self.theta_vars.iter().zip(&bounds).enumerate() {
            m.add_constraint(&format!("grid.p{p}.lo"), LinExpr::term(t, 1.0), Sense::Ge, lo)?;
            m.add_constraint(&format!("grid.p{p}.hi"), LinExpr::term(t, 1.0), Sense::Le, hi)?;
        }
        let r = self.solver.solve(&m)?;
        let mut witness = None;
        let state = match r.status {
            SolveStatus::Optimal | SolveStatus::Feasible => {
                let x: Vec<f64> = self.x.iter().map(|v| r.values[v.0]).collect();
                let image = theta(self.ps, &x)?;
                let inside = image
                    .iter()
                    .zip(&bounds)
                    .all(|(&t, &(lo, hi))| t >= lo - FEASIBILITY_TOLERANCE && t <= hi + FEASIBILITY_TOLERANCE);
                if inside {
                    witness = Some(Witness {
                        z: z.to_vec(),
                        values: r.values,
                        x,
                        theta: image,
                    });
                    GridState::Feasible { witness: usize::MAX }
                } else {
                    GridState::Failed(format!("witness image {image:?} lies outside its grid"))
                }
            }
            SolveStatus::Infeasible => GridState::Infeasible,
            SolveStatus::Timeout => GridState::Timeout,
            SolveStatus::SolverError(e) => GridState::Failed(e),
        };
        Ok(Outcome {
            state,
            objective: r.objective.filter(|_| witness.is_some()),
            seconds: r.seconds,
            witness,
        })
    }
}

fn record(result: &mut GridSearchResult, infeasible: &mut Vec<Vec<i64>>, z: Vec<i64>, mut o: Outcome) {
    log::info!("grid {z:?}: {}", o.state.label());
    if let Some(w) = o.witness.take() {
        o.state = GridState::Feasible {
            witness: result.witnesses.len(),
        };
        result.witnesses.push(w);
    }
    if o.state == GridState::Infeasible {
        infeasible.push(z.clone());
    }
    result.records.push(GridRecord {
        z,
        state: o.state,
        objective: o.objective,
        seconds: o.seconds,
    });
}

fn pruned_by(infeasible: &[Vec<i64>], z: &[i64]) -> Option<Vec<i64>> {
    infeasible.iter().find(|w| grid_lt(w, z)).cloned()
}

/// Tests every grid of `N(r)` in shell order.
///
/// `x` are the variables of `base` that `ps` projects. Each grid adds
/// `θ_p(x) ∈ S(z)` for every `p` to a copy of `base`. Grids reported
/// infeasible (never timed-out ones) prune every later grid they precede
/// under `≺` when `opts.prune` is set.
pub fn grid_search(
    base: &MilpModel,
    x: &[VarId],
    ps: &ProjectionSet,
    geo: &GridGeometry,
    solver: &dyn MilpSolver,
    opts: GridOptions,
) -> Result<GridSearchResult, GridError> {
    if x.len() != ps.width() {
        return Err(GridError::Dimension {
            expected: ps.width(),
            got: x.len(),
        });
    }
    if geo.dimension() != ps.p_max() {
        return Err(GridError::Dimension {
            expected: ps.p_max(),
            got: geo.dimension(),
        });
    }
    let mut model = base.clone();
    let mut theta_vars = Vec::with_capacity(ps.p_max());
    for (p, w) in ps.weights().iter().enumerate() {
        let t = model.add_continuous(&format!("grid.theta{p}"), f64::NEG_INFINITY, f64::INFINITY)?;
        let mut def = LinExpr::term(t, 1.0);
        for (&v, &c) in x.iter().zip(w) {
            if c != 0.0 {
                def.add_term(v, -c);
            }
        }
        model.add_constraint(&format!("grid.theta{p}.def"), def, Sense::Eq, w[ps.width()])?;
        theta_vars.push(t);
    }
    let search = Search {
        model,
        theta_vars,
        x,
        ps,
        geo,
        solver,
    };

    let grids = neighbor(geo);
    let mut result = GridSearchResult::default();
    let mut infeasible: Vec<Vec<i64>> = Vec::new();
    let mut start = 0;
    while start < grids.len() {
        let s = shell(&grids[start]);
        let end = start + grids[start..].iter().take_while(|z| shell(z) == s).count();
        let layer = &grids[start..end];
        start = end;

        if opts.threads <= 1 {
            for z in layer {
                if let Some(by) = pruned_by(&infeasible, z).filter(|_| opts.prune) {
                    record(&mut result, &mut infeasible, z.clone(), pruned(by));
                    continue;
                }
                let o = search.solve(z)?;
                record(&mut result, &mut infeasible, z.clone(), o);
            }
            continue;
        }

        let mut todo = Vec::new();
        let mut slots: Vec<Option<Outcome>> = Vec::with_capacity(layer.len());
        for (i, z) in layer.iter().enumerate() {
            match pruned_by(&infeasible, z).filter(|_| opts.prune) {
                Some(by) => slots.push(Some(pruned(by))),
                None => {
                    todo.push(i);
                    slots.push(None);
                }
            }
        }
        let next = AtomicUsize::new(0);
        let done: Mutex<Vec<(usize, Result<Outcome, GridError>)>> = Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..opts.threads.min(todo.len()) {
                scope.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&i) = todo.get(k) else { break };
                    let o = search.solve(&layer[i]);
                    done.lock().expect("worker panicked").push((i, o));
                });
            }
        });
        for (i, o) in done.into_inner().expect("worker panicked") {
            slots[i] = Some(o?);
        }
        for (z, o) in layer.iter().zip(slots) {
            record(&mut result, &mut infeasible, z.clone(), o.expect("every grid is decided"));
        }
    }
    Ok(result)
}

fn pruned(by: Vec<i64>) -> Outcome {
    Outcome {
        state: GridState::Pruned { by },
        objective: None,
        seconds: 0.0,
        witness: None,
    }
}
