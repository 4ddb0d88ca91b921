#![allow(dead_code)]

use std::collections::BTreeSet;

use molinfer::chemgraph::{Bond, ChemicalGraph, ElementTable};
use molinfer::gridsearch::{theta, GridGeometry, ProjectionSet};
use molinfer::milp::{LinExpr, MilpModel, Sense, VarId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn table() -> ElementTable {
    ElementTable::default()
}

pub fn parse(text: &str) -> ChemicalGraph {
    ChemicalGraph::parse(text, &table()).unwrap()
}

/// Named molecules in graph-file form.
pub const FIXTURES: &[(&str, &str)] = &[
    ("ethanol", "3 2\n1 C\n2 C\n3 O\n1 2 1\n2 3 1\n"),
    (
        "hexane",
        "6 5\n1 C\n2 C\n3 C\n4 C\n5 C\n6 C\n1 2 1\n2 3 1\n3 4 1\n4 5 1\n5 6 1\n",
    ),
    (
        "benzene",
        "6 6\n1 C\n2 C\n3 C\n4 C\n5 C\n6 C\n1 2 1\n2 3 2\n3 4 1\n4 5 2\n5 6 1\n6 1 2\n",
    ),
    (
        "toluene",
        "7 7\n1 C\n2 C\n3 C\n4 C\n5 C\n6 C\n7 C\n1 2 1\n2 3 2\n3 4 1\n4 5 2\n5 6 1\n6 1 2\n1 7 1\n",
    ),
    (
        "cyclohexanol",
        "7 7\n1 C\n2 C\n3 C\n4 C\n5 C\n6 C\n7 O\n1 2 1\n2 3 1\n3 4 1\n4 5 1\n5 6 1\n6 1 1\n1 7 1\n",
    ),
    (
        "acetic_acid",
        "4 3\n1 C\n2 C\n3 O\n4 O\n1 2 1\n2 3 2\n2 4 1\n",
    ),
    (
        "2-methylpentane",
        "6 5\n1 C\n2 C\n3 C\n4 C\n5 C\n6 C\n1 2 1\n2 3 1\n3 4 1\n4 5 1\n2 6 1\n",
    ),
    (
        "pentanenitrile",
        "6 5\n1 C\n2 C\n3 C\n4 C\n5 C\n6 N\n1 2 1\n2 3 1\n3 4 1\n4 5 1\n5 6 3\n",
    ),
    (
        "pyridine",
        "6 6\n1 N\n2 C\n3 C\n4 C\n5 C\n6 C\n1 2 2\n2 3 1\n3 4 2\n4 5 1\n5 6 2\n6 1 1\n",
    ),
    (
        "decalin",
        "10 11\n1 C\n2 C\n3 C\n4 C\n5 C\n6 C\n7 C\n8 C\n9 C\n10 C\n\
         1 2 1\n2 3 1\n3 4 1\n4 5 1\n5 6 1\n6 1 1\n5 7 1\n7 8 1\n8 9 1\n9 10 1\n10 6 1\n",
    ),
    (
        "dimethyl_sulfone",
        "5 4\n1 C\n2 S(6)\n3 C\n4 O\n5 O\n1 2 1\n2 3 1\n2 4 2\n2 5 2\n",
    ),
    (
        "octanoic_acid_ester",
        "11 10\n1 C\n2 C\n3 C\n4 C\n5 C\n6 C\n7 C\n8 C\n9 O\n10 O\n11 C\n\
         1 2 1\n2 3 1\n3 4 1\n4 5 1\n5 6 1\n6 7 1\n7 8 1\n8 9 2\n8 10 1\n10 11 1\n",
    ),
    ("methane", "1 0\n1 C\n"),
];

pub fn fixtures() -> Vec<(&'static str, ChemicalGraph)> {
    FIXTURES.iter().map(|(n, t)| (*n, parse(t))).collect()
}

pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// A random connected valence-respecting graph over {C, N, O} with up to
/// `max_atoms` atoms and up to `extra_edges` non-tree edges.
pub fn random_graph<R: Rng>(rng: &mut R, max_atoms: usize, extra_edges: usize) -> ChemicalGraph {
    let t = table();
    let pool = ["C", "C", "C", "N", "O"];
    let mut atoms = vec![t.resolve("C").unwrap().clone()];
    let mut used = vec![0u32];
    let mut bonds: Vec<Bond> = Vec::new();
    let cap = |atoms: &Vec<molinfer::chemgraph::ElementSpec>, used: &Vec<u32>, v: usize| {
        u32::from(atoms[v].valence()) - used[v]
    };
    let n = rng.gen_range(1..=max_atoms);
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&v| cap(&atoms, &used, v) >= 1).collect();
        let Some(&parent) = open.choose(rng) else {
            break;
        };
        atoms.push(t.resolve(pool.choose(rng).unwrap()).unwrap().clone());
        used.push(1);
        used[parent] += 1;
        bonds.push(Bond::new(parent, i, 1));
    }
    let n = atoms.len();
    for _ in 0..extra_edges {
        if n < 3 {
            break;
        }
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v
            || bonds.iter().any(|b| (b.u, b.v) == (u.min(v), u.max(v)))
            || cap(&atoms, &used, u) == 0
            || cap(&atoms, &used, v) == 0
        {
            continue;
        }
        used[u] += 1;
        used[v] += 1;
        bonds.push(Bond::new(u, v, 1));
    }
    for b in bonds.iter_mut() {
        let extra = rng.gen_range(0..=2u32);
        let room = extra
            .min(cap(&atoms, &used, b.u))
            .min(cap(&atoms, &used, b.v));
        used[b.u] += room;
        used[b.v] += room;
        b.multiplicity += room as u8;
    }
    ChemicalGraph::new(atoms, bonds).unwrap()
}

/// Every graph whose interior is a tree of at most `max_interior` vertices
/// over `elements` (interior multiplicities 1..3), with single-bonded carbon
/// leaves added so that the interior is exactly the tree at branch
/// parameter 1: an interior leaf gets at least one carbon leaf and a lone
/// interior vertex at least two. Isomorphic copies are not removed.
pub fn interior_tree_family(elements: &[&str], max_interior: usize) -> Vec<ChemicalGraph> {
    let t = table();
    let specs: Vec<_> = elements.iter().map(|e| t.resolve(e).unwrap().clone()).collect();
    let carbon = t.resolve("C").unwrap().clone();
    let mut out = Vec::new();
    for n in 1..=max_interior {
        // parent arrays with parent[j] < j cover every tree shape
        let mut parents = vec![0usize; n];
        loop {
            let edges: Vec<(usize, usize)> = (1..n).map(|j| (parents[j], j)).collect();
            let mut labels = vec![0usize; n];
            loop {
                let mut mults = vec![1u8; edges.len()];
                loop {
                    let mut sums = vec![0u32; n];
                    let mut deg = vec![0u32; n];
                    for (&(a, b), &m) in edges.iter().zip(&mults) {
                        sums[a] += u32::from(m);
                        sums[b] += u32::from(m);
                        deg[a] += 1;
                        deg[b] += 1;
                    }
                    let ranges: Option<Vec<(u32, u32)>> = (0..n)
                        .map(|v| {
                            let val = u32::from(specs[labels[v]].valence());
                            let lo = match deg[v] {
                                0 => 2,
                                1 => 1,
                                _ => 0,
                            };
                            (sums[v] + lo <= val).then(|| (lo, val - sums[v]))
                        })
                        .collect();
                    if let Some(ranges) = ranges {
                        let mut leaves: Vec<u32> = ranges.iter().map(|r| r.0).collect();
                        loop {
                            let mut atoms: Vec<_> = labels.iter().map(|&l| specs[l].clone()).collect();
                            let mut bonds: Vec<Bond> =
                                edges.iter().zip(&mults).map(|(&(a, b), &m)| Bond::new(a, b, m)).collect();
                            for (v, &k) in leaves.iter().enumerate() {
                                for _ in 0..k {
                                    bonds.push(Bond::new(v, atoms.len(), 1));
                                    atoms.push(carbon.clone());
                                }
                            }
                            out.push(ChemicalGraph::new(atoms, bonds).unwrap());
                            if !odometer(&mut leaves, |v| ranges[v].0, |v| ranges[v].1) {
                                break;
                            }
                        }
                    }
                    if !odometer(&mut mults, |_| 1, |_| 3) {
                        break;
                    }
                }
                if !odometer(&mut labels, |_| 0, |_| specs.len() - 1) {
                    break;
                }
            }
            if !odometer(&mut parents, |_| 0, |j| j.saturating_sub(1)) {
                break;
            }
        }
    }
    out
}

/// Advances a mixed-radix counter; false after the last value.
fn odometer<T>(digits: &mut [T], lo: impl Fn(usize) -> T, hi: impl Fn(usize) -> T) -> bool
where
    T: Copy + PartialOrd + std::ops::Add<Output = T> + From<u8>,
{
    for i in 0..digits.len() {
        if digits[i] < hi(i) {
            digits[i] = digits[i] + T::from(1);
            return true;
        }
        digits[i] = lo(i);
    }
    false
}

/// Small integer program with projections whose grid feasibility is known
/// by enumeration.
pub struct ToyGrid {
    pub model: MilpModel,
    pub x: Vec<VarId>,
    pub ps: ProjectionSet,
    pub geo: GridGeometry,
    /// Grids of `N(r)` holding the image of at least one feasible point.
    pub oracle: BTreeSet<Vec<i64>>,
}

fn grid_of(image: &[f64], geo: &GridGeometry) -> Option<Vec<i64>> {
    let mut z = Vec::with_capacity(image.len());
    for (p, &t) in image.iter().enumerate() {
        let k = ((t - geo.center[p]) / geo.widths[p]).round() as i64;
        if k.unsigned_abs() > u64::from(geo.radius[p]) {
            return None;
        }
        z.push(k);
    }
    Some(z)
}

fn box_points(lower: &[i64], upper: &[i64]) -> Vec<Vec<i64>> {
    let mut points = vec![vec![]];
    for (&lo, &hi) in lower.iter().zip(upper) {
        points = points
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Random integer box program `a·x <= b` feasible at a random seed point,
/// with integer projection weights and widths that keep every projected
/// point off the grid boundaries.
pub fn toy_grid(seed: u64) -> ToyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=3);
    let mut model = MilpModel::new();
    let x: Vec<VarId> = (0..n).map(|i| model.add_integer(&format!("x{i}"), -4.0, 4.0).unwrap()).collect();
    let seed_x: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..=4)).collect();
    let mut rows = Vec::new();
    for c in 0..rng.gen_range(1..=3) {
        let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        let b = a.iter().zip(&seed_x).map(|(p, q)| p * q).sum::<i64>() + rng.gen_range(0..=3);
        let expr = LinExpr::from(x.iter().zip(&a).map(|(&v, &c)| (v, c as f64)).collect::<Vec<_>>());
        model.add_constraint(&format!("c{c}"), expr, Sense::Le, b as f64).unwrap();
        rows.push((a, b));
    }
    let p_max = rng.gen_range(1..=2);
    let weights: Vec<Vec<f64>> = (0..p_max)
        .map(|_| loop {
            let w: Vec<f64> = (0..=n).map(|_| rng.gen_range(-2..=2) as f64).collect();
            if w[..n].iter().any(|&c| c != 0.0) {
                break w;
            }
        })
        .collect();
    let ps = ProjectionSet::new(weights).unwrap();
    let widths = (0..p_max).map(|_| *[0.75, 1.0, 1.5, 2.5].choose(&mut rng).unwrap()).collect();
    let radius = (0..p_max).map(|_| rng.gen_range(0..=3)).collect();
    let seed_f: Vec<f64> = seed_x.iter().map(|&v| v as f64).collect();
    let geo = GridGeometry::around_seed(&ps, &seed_f, widths, radius).unwrap();
    let oracle = box_points(&vec![-4; n], &vec![4; n])
        .into_iter()
        .filter(|p| rows.iter().all(|(a, b)| a.iter().zip(p).map(|(c, v)| c * v).sum::<i64>() <= *b))
        .filter_map(|p| {
            let f: Vec<f64> = p.iter().map(|&v| v as f64).collect();
            grid_of(&theta(&ps, &f).unwrap(), &geo)
        })
        .collect();
    ToyGrid {
        model,
        x,
        ps,
        geo,
        oracle,
    }
}

/// Two-dimensional program whose feasible grids form a `⪯`-downward
/// closed set: an asymmetric integer box cut by `α·|x| <= c`, projected
/// onto `x` itself with unit widths around the origin.
pub fn monotone_toy_grid(seed: u64) -> ToyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MilpModel::new();
    let lower: Vec<i64> = (0..2).map(|_| -rng.gen_range(0..=4)).collect();
    let upper: Vec<i64> = (0..2).map(|_| rng.gen_range(0..=4)).collect();
    let alpha: Vec<i64> = (0..2).map(|_| rng.gen_range(1..=3)).collect();
    let cap = rng.gen_range(0..=12);
    let mut x = Vec::new();
    let mut cut = LinExpr::new();
    for p in 0..2 {
        let v = model.add_integer(&format!("x{p}"), lower[p] as f64, upper[p] as f64).unwrap();
        let u = model.add_continuous(&format!("u{p}"), 0.0, 8.0).unwrap();
        model.add_constraint(&format!("u{p}.pos"), vec![(u, 1.0), (v, -1.0)], Sense::Ge, 0.0).unwrap();
        model.add_constraint(&format!("u{p}.neg"), vec![(u, 1.0), (v, 1.0)], Sense::Ge, 0.0).unwrap();
        cut.add_term(u, alpha[p] as f64);
        x.push(v);
    }
    model.add_constraint("cut", cut, Sense::Le, cap as f64).unwrap();
    let ps = ProjectionSet::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
    let geo = GridGeometry::around_seed(&ps, &[0.0, 0.0], vec![1.0, 1.0], vec![3, 3]).unwrap();
    let oracle = box_points(&lower, &upper)
        .into_iter()
        .filter(|p| alpha[0] * p[0].abs() + alpha[1] * p[1].abs() <= cap)
        .filter_map(|p| grid_of(&[p[0] as f64, p[1] as f64], &geo))
        .collect();
    ToyGrid {
        model,
        x,
        ps,
        geo,
        oracle,
    }
}
