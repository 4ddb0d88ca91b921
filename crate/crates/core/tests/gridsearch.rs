mod common;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use molinfer::descriptors::DescriptorRegistry;
use molinfer::gridsearch::{
    grid_lt, grid_search, make_property_projections, neighbor, subspace_bounds, theta, GridGeometry, GridOptions,
    GridSearchResult, GridState, ProjectionSet,
};
use molinfer::milp::{MilpError, MilpModel, MilpSolver, Sense, SolveResult, SolveStatus, SolverConfig};
use molinfer::regression::{LinearModel, Predictor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solver() -> SolverConfig {
    SolverConfig::discover().expect("a MILP solver on PATH").with_time_limit(60.0)
}

struct Counting<S> {
    inner: S,
    calls: AtomicUsize,
}

impl<S: MilpSolver> MilpSolver for Counting<S> {
    fn solve(&self, model: &MilpModel) -> Result<SolveResult, MilpError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.solve(model)
    }
}

/// Answers every model with a fixed status and no solution.
struct Always(SolveStatus);

impl MilpSolver for Always {
    fn solve(&self, _: &MilpModel) -> Result<SolveResult, MilpError> {
        Ok(SolveResult {
            status: self.0.clone(),
            values: vec![],
            objective: None,
            log_digest: String::new(),
            seconds: 0.0,
        })
    }
}

fn one_dimensional() -> (MilpModel, ProjectionSet, GridGeometry) {
    let mut m = MilpModel::new();
    let x = m.add_continuous("x", 0.0, 10.0).unwrap();
    m.add_constraint("cap", vec![(x, 1.0)], Sense::Le, 6.4).unwrap();
    let ps = ProjectionSet::new(vec![vec![1.0, 0.0]]).unwrap();
    let geo = GridGeometry::around_seed(&ps, &[5.0], vec![1.0], vec![3]).unwrap();
    (m, ps, geo)
}

fn set(grids: &[i64]) -> BTreeSet<Vec<i64>> {
    grids.iter().map(|&k| vec![k]).collect()
}

fn check_invariants(r: &GridSearchResult, ps: &ProjectionSet, geo: &GridGeometry) {
    assert_eq!(r.records.len(), neighbor(geo).len());
    let timeouts = r.grids_with("timeout").len();
    let pruned = r.grids_with("pruned").len();
    assert_eq!(r.solved_count() + pruned + timeouts, neighbor(geo).len());
    for rec in &r.records {
        match &rec.state {
            GridState::Pruned { by } => {
                assert!(grid_lt(by, &rec.z));
                assert_eq!(r.record(by).unwrap().state, GridState::Infeasible);
            }
            GridState::Feasible { witness } => {
                let w = &r.witnesses[*witness];
                assert_eq!(w.z, rec.z);
                let image = theta(ps, &w.x).unwrap();
                for (&t, &(lo, hi)) in image.iter().zip(&subspace_bounds(geo, &rec.z)) {
                    assert!(t >= lo - 1e-6 && t <= hi + 1e-6, "{t} outside [{lo}, {hi}]");
                }
            }
            _ => {}
        }
    }
    let center = subspace_bounds(geo, &vec![0; geo.dimension()]);
    for (&s, &(lo, hi)) in geo.center.iter().zip(&center) {
        assert!(lo <= s && s <= hi);
    }
}

#[test]
fn one_dimensional_toy() {
    let (m, ps, geo) = one_dimensional();
    let x = vec![m.var_by_name("x").unwrap()];
    let s = solver();
    let r = grid_search(&m, &x, &ps, &geo, &s, GridOptions::default()).unwrap();
    let order: Vec<i64> = r.records.iter().map(|rec| rec.z[0]).collect();
    assert_eq!(order, vec![0, -1, 1, -2, 2, -3, 3]);
    assert_eq!(r.feasible(), set(&[-3, -2, -1, 0, 1]));
    assert_eq!(r.grids_with("infeasible"), set(&[2]));
    assert_eq!(r.record(&[3]).unwrap().state, GridState::Pruned { by: vec![2] });
    check_invariants(&r, &ps, &geo);

    let all = grid_search(&m, &x, &ps, &geo, &s, GridOptions { prune: false, threads: 1 }).unwrap();
    assert_eq!(all.feasible(), r.feasible());
    assert_eq!(all.grids_with("infeasible"), set(&[2, 3]));

    let parallel = grid_search(&m, &x, &ps, &geo, &s, GridOptions { prune: true, threads: 3 }).unwrap();
    assert_eq!(parallel.feasible(), r.feasible());
    assert_eq!(parallel.grids_with("pruned"), set(&[3]));

    let csv = r.to_csv();
    assert!(csv.starts_with("z1,status,witness,objective,seconds\n0,feasible,0,"));
    assert!(csv.contains("\n3,pruned,2,,0.000\n"));
}

#[test]
fn zero_radius_solves_only_the_center() {
    let (m, ps, _) = one_dimensional();
    let x = vec![m.var_by_name("x").unwrap()];
    let geo = GridGeometry::around_seed(&ps, &[5.0], vec![1.0], vec![0]).unwrap();
    let s = Counting {
        inner: solver(),
        calls: AtomicUsize::new(0),
    };
    let r = grid_search(&m, &x, &ps, &geo, &s, GridOptions::default()).unwrap();
    assert_eq!(s.calls.load(Ordering::Relaxed), 1);
    assert_eq!(r.feasible(), set(&[0]));
}

#[test]
fn timeouts_never_prune() {
    let (m, ps, geo) = one_dimensional();
    let x = vec![m.var_by_name("x").unwrap()];
    let r = grid_search(&m, &x, &ps, &geo, &Always(SolveStatus::Timeout), GridOptions::default()).unwrap();
    assert_eq!(r.grids_with("timeout").len(), 7);
    check_invariants(&r, &ps, &geo);

    let r = grid_search(&m, &x, &ps, &geo, &Always(SolveStatus::Infeasible), GridOptions::default()).unwrap();
    assert_eq!(r.grids_with("infeasible"), set(&[0]));
    assert_eq!(r.grids_with("pruned").len(), 6);
    check_invariants(&r, &ps, &geo);
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let (m, ps, geo) = one_dimensional();
    let s = Always(SolveStatus::Infeasible);
    assert!(grid_search(&m, &[], &ps, &geo, &s, GridOptions::default()).is_err());
    let geo2 = GridGeometry::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![1, 1]).unwrap();
    let x = vec![m.var_by_name("x").unwrap()];
    assert!(grid_search(&m, &x, &ps, &geo2, &s, GridOptions::default()).is_err());
}

#[test]
fn property_projections_reproduce_model_predictions() {
    let t = common::table();
    let graphs: Vec<_> = common::fixtures().into_iter().map(|(_, g)| g).collect();
    let reg = DescriptorRegistry::build(&graphs, 2, &t).unwrap();
    let k = reg.len();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let models: Vec<LinearModel> = (0..2)
        .map(|_| {
            let selected: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.3)).collect();
            let weights = selected.iter().map(|_| rng.gen_range(-2.0..2.0)).collect();
            LinearModel::new(selected, weights, rng.gen_range(-1.0..1.0)).unwrap()
        })
        .collect();
    let ps = make_property_projections(&models, &reg).unwrap();
    assert_eq!((ps.p_max(), ps.width()), (2, k));
    for _ in 0..100 {
        let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let image = theta(&ps, &x).unwrap();
        for (model, t) in models.iter().zip(image) {
            assert!((model.predict(&x).unwrap() - t).abs() <= 1e-12);
        }
    }
    let outside = LinearModel::new(vec![k], vec![1.0], 0.0).unwrap();
    assert!(make_property_projections(&[outside], &reg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pruned_search_agrees_with_enumeration(seed in any::<u64>()) {
        let toy = common::toy_grid(seed);
        let s = solver();
        let all = grid_search(&toy.model, &toy.x, &toy.ps, &toy.geo, &s, GridOptions { prune: false, threads: 1 }).unwrap();
        prop_assert_eq!(&all.feasible(), &toy.oracle);
        check_invariants(&all, &toy.ps, &toy.geo);
        let pruned = grid_search(&toy.model, &toy.x, &toy.ps, &toy.geo, &s, GridOptions::default()).unwrap();
        prop_assert!(pruned.feasible().is_subset(&toy.oracle));
        check_invariants(&pruned, &toy.ps, &toy.geo);
        prop_assert!(toy.oracle.contains(&vec![0; toy.geo.dimension()]));
    }

    #[test]
    fn pruning_is_exact_on_monotone_instances(seed in any::<u64>()) {
        let toy = common::monotone_toy_grid(seed);
        let s = solver();
        for threads in [1, 2] {
            let r = grid_search(&toy.model, &toy.x, &toy.ps, &toy.geo, &s, GridOptions { prune: true, threads }).unwrap();
            prop_assert_eq!(&r.feasible(), &toy.oracle);
            let mut rest = r.grids_with("infeasible");
            rest.extend(r.grids_with("pruned"));
            prop_assert_eq!(rest.len() + toy.oracle.len(), 49);
            prop_assert!(rest.is_disjoint(&toy.oracle));
            check_invariants(&r, &toy.ps, &toy.geo);
        }
    }
}
