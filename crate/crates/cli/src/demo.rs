//! A synthetic dataset of small acyclic molecules with a target that is a
//! linear function of their composition.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use molinfer::chemgraph::{Bond, ChemicalGraph, ElementTable, TwoLayerDecomposition};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random tree on C, N and O with 6 to 11 atoms; about one bond in eight
/// is double where both ends have room for it.
pub fn random_molecule<R: Rng>(rng: &mut R, table: &ElementTable) -> ChemicalGraph {
    let pick = |rng: &mut R| match rng.gen_range(0..10) {
        0..=6 => "C",
        7 | 8 => "O",
        _ => "N",
    };
    loop {
        let n = rng.gen_range(6..=11);
        let mut atoms = vec![table.resolve("C").expect("carbon").clone()];
        let mut used = vec![0u8];
        let mut bonds = Vec::new();
        for i in 1..n {
            let e = table.resolve(pick(rng)).expect("built-in element").clone();
            let open: Vec<usize> = (0..i).filter(|&j| used[j] < atoms[j].valence()).collect();
            if open.is_empty() {
                break;
            }
            let j = open[rng.gen_range(0..open.len())];
            let room = (atoms[j].valence() - used[j]).min(e.valence());
            let m = if room >= 2 && rng.gen_bool(0.125) { 2 } else { 1 };
            used[j] += m;
            used.push(m);
            atoms.push(e);
            bonds.push(Bond::new(j, i, m));
        }
        if atoms.len() == n {
            return ChemicalGraph::new(atoms, bonds).expect("valence respected by construction");
        }
    }
}

/// `0.8 #C + 1.5 #O + 1.1 #N - 0.6 #interior vertices` at branch
/// parameter 2, a linear function of registry descriptors.
pub fn synthetic_target(g: &ChemicalGraph) -> Result<f64> {
    let mut y = 0.0;
    for a in g.atoms() {
        y += match a.symbol() {
            "C" => 0.8,
            "O" => 1.5,
            "N" => 1.1,
            _ => 0.0,
        };
    }
    let interior = TwoLayerDecomposition::new(g, 2)?.interior().len();
    Ok(y - 0.6 * interior as f64)
}

const SPEC: &str = "n_interior_max = 5
n_interior_min = 1

[elements]
C = 0 5
O = 0 2
N = 0 2
";

/// Writes graphs, targets, a topological specification and a config.
pub fn write_demo(dir: &Path, size: usize, seed: u64) -> Result<()> {
    let table = ElementTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs_dir = dir.join("graphs");
    fs::create_dir_all(&graphs_dir).with_context(|| format!("creating {}", graphs_dir.display()))?;
    let mut targets = String::from("id,value\n");
    let mut values = Vec::with_capacity(size);
    for i in 0..size {
        let g = random_molecule(&mut rng, &table);
        let id = format!("m{i:03}");
        let y = synthetic_target(&g)?;
        fs::write(graphs_dir.join(format!("{id}.graph")), g.to_text())?;
        writeln!(targets, "{id},{y}").unwrap();
        values.push(y);
    }
    values.sort_by(f64::total_cmp);
    let mid = values[values.len() / 2];
    fs::write(dir.join("targets.csv"), targets)?;
    fs::write(dir.join("spec.txt"), SPEC)?;
    let config = format!(
        "seed = {seed}
run_dir = \"run\"

[data]
graphs = \"graphs\"
targets = \"targets.csv\"
rho = 2

[train]
model = \"mlp\"
hidden = [4]
select_lambda = 0.001
it_stop = 2000
folds = 5
repeats = 10

[infer]
spec = \"spec.txt\"
y_lower = {}
y_upper = {}

[solver]
time_limit = 120

[grid]
widths = [1.0]
radius = [2]

[[grid.projection]]
weights = {{ n_atoms = 1.0 }}
",
        mid - 0.5,
        mid + 0.5
    );
    fs::write(dir.join("config.toml"), config)?;
    Ok(())
}
