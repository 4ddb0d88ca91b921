mod common;

use std::collections::BTreeMap;

use molinfer::chemgraph::TwoLayerDecomposition;
use molinfer::descriptors::{Descriptor, DescriptorRegistry};
use molinfer::encode::{
    bind_target, encode_graph, encode_linear, encode_mlp, CountBounds, TargetInterval, TopologySpec,
};
use molinfer::milp::{LinExpr, MilpModel, MilpSolver, Objective, SolveStatus, SolverConfig};
use molinfer::regression::{Layer, LinearModel, MlpModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solver() -> SolverConfig {
    SolverConfig::discover().expect("a MILP solver on PATH").with_time_limit(60.0)
}

fn random_network(rng: &mut ChaCha8Rng) -> MlpModel {
    let inputs = rng.gen_range(1..=6);
    let depth = rng.gen_range(1..=3);
    let mut arch = vec![inputs];
    arch.extend((0..depth).map(|_| rng.gen_range(1..=8)));
    arch.push(1);
    let mut net = MlpModel::random((0..inputs).collect(), &arch, rng).unwrap();
    // spread biases to both signs so that units switch on and off
    for layer in &mut net.layers {
        for b in &mut layer.bias {
            *b = rng.gen_range(-0.5..0.5);
        }
    }
    net
}

/// Builds `x` fixed at `point`, the network encoding and a free output.
fn fixed_input_instance(net: &MlpModel, point: &[f64]) -> (MilpModel, molinfer::milp::VarId) {
    let mut m = MilpModel::new();
    let x: Vec<_> = point
        .iter()
        .enumerate()
        .map(|(j, &v)| m.add_continuous(&format!("x{j}"), v, v).unwrap())
        .collect();
    let y = m.add_continuous("y", -1e6, 1e6).unwrap();
    encode_mlp(&mut m, "n", net, &x, y).unwrap();
    (m, y)
}

#[test]
fn c1_exactness_on_random_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = solver();
    for case in 0..100 {
        let net = random_network(&mut rng);
        let point: Vec<f64> = (0..net.selected.len()).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let (m, y) = fixed_input_instance(&net, &point);
        let r = s.solve(&m).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "case {case}");
        let want = net.forward(&point).unwrap();
        assert!((r.values[y.0] - want).abs() <= 1e-6, "case {case}: {} vs {want}", r.values[y.0]);
    }
}

fn one_dim_network() -> MlpModel {
    MlpModel::new(
        vec![0],
        vec![
            Layer {
                weights: vec![vec![2.0], vec![-3.0], vec![1.0]],
                bias: vec![-0.5, 1.0, -0.8],
            },
            Layer {
                weights: vec![vec![1.0, 0.5, -2.0]],
                bias: vec![0.1],
            },
        ],
    )
    .unwrap()
}

#[test]
fn c1_target_outside_the_range_is_infeasible() {
    let net = one_dim_network();
    // range over the box by dense enumeration; the network is piecewise
    // linear with kinks at 0.25, 1/3 and 0.8, all on the grid
    let values: Vec<f64> = (0..=1200).map(|i| net.forward(&[i as f64 / 1200.0]).unwrap()).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s = solver();
    let run = |t: TargetInterval| {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        let y = m.add_continuous("y", -100.0, 100.0).unwrap();
        encode_mlp(&mut m, "n", &net, &[x], y).unwrap();
        bind_target(&mut m, "t", y, &t).unwrap();
        let r = s.solve(&m).unwrap();
        if r.status == SolveStatus::Optimal {
            let y_at_x = net.forward(&[r.values[x.0]]).unwrap();
            assert!((y_at_x - r.values[y.0]).abs() < 1e-6);
        }
        r.status
    };
    assert_eq!(run(TargetInterval::new(hi + 0.01, hi + 1.0).unwrap()), SolveStatus::Infeasible);
    assert_eq!(run(TargetInterval::new(lo - 1.0, lo - 0.01).unwrap()), SolveStatus::Infeasible);
    assert_eq!(run(TargetInterval::new(hi, hi).unwrap()), SolveStatus::Optimal);
    let mid = (lo + hi) / 2.0;
    assert_eq!(run(TargetInterval::new(mid, mid).unwrap()), SolveStatus::Optimal);
    // widening never loses feasibility
    assert_eq!(run(TargetInterval::new(lo - 5.0, hi + 5.0).unwrap()), SolveStatus::Optimal);
}

#[test]
fn c1_positive_preactivations_switch_units_on() {
    let net = MlpModel::new(
        vec![0, 1],
        vec![
            Layer {
                weights: vec![vec![1.0, 2.0], vec![0.5, 0.0]],
                bias: vec![0.1, 0.2],
            },
            Layer {
                weights: vec![vec![1.0, -1.0]],
                bias: vec![0.0],
            },
        ],
    )
    .unwrap();
    let mut m = MilpModel::new();
    let x: Vec<_> = [0.3, 0.9].iter().enumerate().map(|(j, &v)| m.add_continuous(&format!("x{j}"), v, v).unwrap()).collect();
    let y = m.add_continuous("y", -10.0, 10.0).unwrap();
    let enc = encode_mlp(&mut m, "n", &net, &x, y).unwrap();
    let r = solver().solve(&m).unwrap();
    for unit in &enc.hidden[0] {
        assert!(unit.lower > 0.0);
        assert_eq!(r.values[unit.active.0], 1.0);
    }
    assert!((r.values[y.0] - net.forward(&[0.3, 0.9]).unwrap()).abs() < 1e-9);
}

#[test]
fn linear_model_hits_the_hyperplane() {
    let lm = LinearModel::new(vec![0, 2], vec![1.5, -2.0], 0.25).unwrap();
    let mut m = MilpModel::new();
    let x: Vec<_> = (0..3).map(|j| m.add_continuous(&format!("x{j}"), 0.0, 1.0).unwrap()).collect();
    let y = m.add_continuous("y", 0.7, 0.7).unwrap();
    encode_linear(&mut m, "p", &lm, &x, y).unwrap();
    let r = solver().solve(&m).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let v = &r.values;
    assert!((1.5 * v[0] - 2.0 * v[2] + 0.25 - 0.7).abs() < 1e-6);
    let zero = LinearModel::new(vec![1], vec![0.0], -3.0).unwrap();
    let mut m = MilpModel::new();
    let x: Vec<_> = (0..2).map(|j| m.add_continuous(&format!("x{j}"), 0.0, 1.0).unwrap()).collect();
    let y = m.add_continuous("y", -10.0, 10.0).unwrap();
    encode_linear(&mut m, "p", &zero, &x, y).unwrap();
    assert_eq!(solver().solve(&m).unwrap().values[y.0], -3.0);
}

fn is_structure_count(d: &Descriptor) -> bool {
    matches!(d, Descriptor::Adjacency(_) | Descriptor::Edge(_) | Descriptor::Symbol(_))
}

/// Solves with the ac/ec/ns variables fixed to `target` and returns the
/// decoded graph's feature vector together with the solver's values.
fn solve_fixed(
    reg: &DescriptorRegistry,
    spec: &TopologySpec,
    target: &[f64],
    s: &SolverConfig,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let t = common::table();
    let mut m = MilpModel::new();
    let enc = encode_graph(&mut m, "g", spec, reg, &t).unwrap();
    for (j, d) in reg.descriptors().iter().enumerate() {
        if is_structure_count(d) {
            m.restrict_bounds(enc.x[j], target[j], target[j]).unwrap();
        }
    }
    let r = s.solve(&m).unwrap();
    if r.status != SolveStatus::Optimal {
        assert_eq!(r.status, SolveStatus::Infeasible);
        return None;
    }
    let g = enc.decode(&r.values).unwrap();
    let features = reg.featurize(&g, reg.rho()).unwrap();
    let assigned: Vec<f64> = enc.x.iter().map(|v| r.values[v.0]).collect();
    Some((features, assigned))
}

fn assert_sound(reg: &DescriptorRegistry, features: &[f64], assigned: &[f64]) {
    for (j, d) in reg.descriptors().iter().enumerate() {
        if d.is_count() {
            assert_eq!(features[j], assigned[j], "{d}");
        } else {
            assert!((features[j] - assigned[j]).abs() < 1e-6, "{d}: {} vs {}", features[j], assigned[j]);
        }
    }
}

#[test]
fn c2_path_of_three_interior_vertices() {
    let family = common::interior_tree_family(&["C", "O"], 3);
    let t = common::table();
    let reg = DescriptorRegistry::build(&family, 1, &t).unwrap();
    let spec_text = "n_interior_max = 3\n[elements]\nC = 0 20\nO = 0 20\n[ac]\nC.C.1 = 1\nC.O.1 = 1\n";
    let mut spec = TopologySpec::parse(spec_text, &t).unwrap();
    // every other adjacency-configuration is excluded
    for d in reg.descriptors() {
        if let Descriptor::Adjacency(ac) = d {
            spec.ac.entry(ac.clone()).or_insert(CountBounds::exactly(0));
        }
    }
    let mut m = MilpModel::new();
    let enc = encode_graph(&mut m, "g", &spec, &reg, &t).unwrap();
    let r = solver().solve(&m).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let g = enc.decode(&r.values).unwrap();
    let d = TwoLayerDecomposition::new(&g, 1).unwrap();
    let mut labels: Vec<&str> = d.interior().iter().map(|&v| d.graph().element(v).label()).collect();
    labels.sort_unstable();
    assert_eq!(labels, ["C", "C", "O"]);
    assert_eq!(d.interior_edges().len(), 2);
    // the oxygen is an end of the path
    let o = *d.interior().iter().find(|&&v| d.graph().element(v).label() == "O").unwrap();
    let interior_neighbors = d.graph().neighbor_lists()[o].iter().filter(|&&w| d.is_interior(w)).count();
    assert_eq!(interior_neighbors, 1);
    let features = reg.featurize(&g, 1).unwrap();
    let assigned: Vec<f64> = enc.x.iter().map(|v| r.values[v.0]).collect();
    assert_sound(&reg, &features, &assigned);
}

#[test]
fn c2_triple_bonded_oxygens_are_infeasible() {
    let t = common::table();
    let family = common::interior_tree_family(&["C", "O"], 2);
    let base = DescriptorRegistry::build(&family, 1, &t).unwrap();
    let mut descriptors = base.descriptors().to_vec();
    descriptors.push(Descriptor::parse("ac:O.O.3", &t).unwrap());
    descriptors.sort();
    let reg = DescriptorRegistry::new(1, base.hydrogen_mass(), descriptors).unwrap();
    let text = "n_interior_max = 4\n[elements]\nC = 0 20\nO = 0 20\n[ac]\nO.O.3 = 1 3\n";
    let spec = TopologySpec::parse(text, &t).unwrap();
    let mut m = MilpModel::new();
    encode_graph(&mut m, "g", &spec, &reg, &t).unwrap();
    assert_eq!(solver().solve(&m).unwrap().status, SolveStatus::Infeasible);
    // without the registry entry the requirement is rejected before solving
    let mut m = MilpModel::new();
    assert!(encode_graph(&mut m, "g", &spec, &base, &t).is_err());
}

#[test]
fn c2_round_trip_over_the_exhaustive_family() {
    let t = common::table();
    let family = common::interior_tree_family(&["C", "O", "N"], 4);
    let reg = DescriptorRegistry::build(&family, 1, &t).unwrap();
    let mut targets: BTreeMap<Vec<u64>, Vec<f64>> = BTreeMap::new();
    for g in &family {
        let x = reg.featurize(g, 1).unwrap();
        let key = reg
            .descriptors()
            .iter()
            .zip(&x)
            .filter(|(d, _)| is_structure_count(d))
            .map(|(_, v)| *v as u64)
            .collect();
        targets.entry(key).or_insert(x);
    }
    eprintln!("{} graphs, {} distinct count vectors, K = {}", family.len(), targets.len(), reg.len());
    let spec = TopologySpec::new(4, ["C", "O", "N"].map(|e| t.resolve(e).unwrap().clone()));
    let s = solver();
    let start = std::time::Instant::now();
    for (i, x) in targets.values().enumerate() {
        let (features, assigned) = solve_fixed(&reg, &spec, x, &s).unwrap_or_else(|| panic!("count vector {i} infeasible"));
        for (j, d) in reg.descriptors().iter().enumerate() {
            if is_structure_count(d) {
                assert_eq!(features[j], x[j], "{d}");
            }
        }
        assert_sound(&reg, &features, &assigned);
        if i == 9 {
            eprintln!("10 solves in {:?}", start.elapsed());
        }
    }
}



/// Maximizes a random combination of descriptors and checks that the
/// decoded witness featurizes to the assigned values.
fn random_soundness(reg: &DescriptorRegistry, spec: &TopologySpec, rng: &mut ChaCha8Rng, rounds: usize) -> usize {
    let t = common::table();
    let s = solver();
    let mut feasible = 0;
    for _ in 0..rounds {
        let mut m = MilpModel::new();
        let enc = encode_graph(&mut m, "g", spec, reg, &t).unwrap();
        let mut terms = Vec::new();
        for &v in &enc.x {
            if rng.gen_bool(0.3) {
                terms.push((v, rng.gen_range(-1.0..1.0)));
            }
        }
        m.set_objective(Objective::Maximize(LinExpr::from(terms))).unwrap();
        let r = s.solve(&m).unwrap();
        if r.status == SolveStatus::Infeasible {
            continue;
        }
        assert_eq!(r.status, SolveStatus::Optimal);
        feasible += 1;
        let g = enc.decode(&r.values).unwrap();
        let features = reg.featurize(&g, reg.rho()).unwrap();
        let assigned: Vec<f64> = enc.x.iter().map(|v| r.values[v.0]).collect();
        assert_sound(reg, &features, &assigned);
    }
    feasible
}

#[test]
fn c2_soundness_under_random_objectives() {
    let t = common::table();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let family = common::interior_tree_family(&["C", "O", "N"], 3);
    let reg = DescriptorRegistry::build(&family, 1, &t).unwrap();
    let spec = TopologySpec::new(5, ["C", "O", "N"].map(|e| t.resolve(e).unwrap().clone()));
    assert_eq!(random_soundness(&reg, &spec, &mut rng, 15), 15);

    // branch parameter 2 with fringe classes and configurations taken
    // from the fixture molecules
    let fixtures: Vec<_> = common::fixtures().into_iter().map(|(_, g)| g).collect();
    let reg = DescriptorRegistry::build(&fixtures, 2, &t).unwrap();
    let elements: Vec<_> = reg
        .descriptors()
        .iter()
        .filter_map(|d| match d {
            Descriptor::ElementCount(e) => Some(e.clone()),
            _ => None,
        })
        .collect();
    let spec = TopologySpec::new(6, elements);
    assert!(random_soundness(&reg, &spec, &mut rng, 15) > 0);
}

#[test]
fn c2_tightening_upper_bounds_never_adds_solutions() {
    let t = common::table();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let family = common::interior_tree_family(&["C", "O", "N"], 3);
    let reg = DescriptorRegistry::build(&family, 1, &t).unwrap();
    let s = solver();
    let configs: Vec<Descriptor> = reg
        .descriptors()
        .iter()
        .filter(|d| matches!(d, Descriptor::Adjacency(_) | Descriptor::Edge(_)))
        .cloned()
        .collect();
    let status = |spec: &TopologySpec| {
        let mut m = MilpModel::new();
        encode_graph(&mut m, "g", spec, &reg, &t).unwrap();
        s.solve(&m).unwrap().status
    };
    for _ in 0..10 {
        let mut spec = TopologySpec::new(4, ["C", "O", "N"].map(|e| t.resolve(e).unwrap().clone()));
        spec.n_interior_min = 3;
        for d in &configs {
            if rng.gen_bool(0.4) {
                let ub = CountBounds::new(0, rng.gen_range(0..=2));
                match d {
                    Descriptor::Adjacency(ac) => spec.ac.insert(ac.clone(), ub),
                    Descriptor::Edge(ec) => spec.ec.insert(ec.clone(), ub),
                    _ => unreachable!(),
                };
            }
        }
        let mut tighter = spec.clone();
        for b in tighter.ac.values_mut().chain(tighter.ec.values_mut()) {
            b.upper = b.upper.saturating_sub(rng.gen_range(0..=1));
        }
        let (loose, tight) = (status(&spec), status(&tighter));
        if tight == SolveStatus::Optimal {
            assert_eq!(loose, SolveStatus::Optimal);
        }
        if loose == SolveStatus::Infeasible {
            assert_eq!(tight, SolveStatus::Infeasible);
        }
    }
}
